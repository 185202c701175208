"""Regenerates the committed fixtures. Deterministic for a fixed numpy version."""
import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent
rng = np.random.default_rng(7)


def dump(name, obj):
    (OUT / name).write_text(json.dumps(obj, indent=1) + "\n")


def forward(params, x):
    h = x
    for i, (w, b) in enumerate(params):
        h = h @ w.T + b
        if i + 1 < len(params):
            h = np.maximum(h, 0)
    return h


def train_classifier():
    # label: inside the disc of radius 0.3 around (0.5, 0.5)
    x = rng.uniform(0, 1, size=(4000, 2))
    y = (np.linalg.norm(x - 0.5, axis=1) < 0.3).astype(int)
    sizes = [2, 8, 8, 2]
    params = [
        (rng.normal(0, np.sqrt(2 / a), size=(b, a)), np.zeros(b))
        for a, b in zip(sizes[:-1], sizes[1:])
    ]
    lr = 0.05
    for _ in range(3000):
        acts = [x]
        pre = []
        h = x
        for i, (w, b) in enumerate(params):
            z = h @ w.T + b
            pre.append(z)
            h = np.maximum(z, 0) if i + 1 < len(params) else z
            acts.append(h)
        logits = acts[-1] - acts[-1].max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        g = p
        g[np.arange(len(y)), y] -= 1
        g /= len(y)
        for i in reversed(range(len(params))):
            w, b = params[i]
            gw = g.T @ acts[i]
            gb = g.sum(axis=0)
            if i > 0:
                g = (g @ w) * (pre[i - 1] > 0)
            params[i] = (w - lr * 20 * gw, b - lr * 20 * gb)
    acc = (forward(params, x).argmax(axis=1) == y).mean()
    return params, acc


def misclassified_on_grid(params, anchor, eps, label, n=201):
    t = np.linspace(-eps, eps, n)
    gx, gy = np.meshgrid(t, t)
    pts = anchor + np.stack([gx.ravel(), gy.ravel()], axis=1)
    pred = forward(params, pts).argmax(axis=1)
    bad = np.nonzero(pred != label)[0]
    return pts[bad[0]] if len(bad) else None


def classifier_fixture():
    params, acc = train_classifier()
    anchor = np.array([0.5, 0.72])
    label = int(forward(params, anchor[None])[0].argmax())
    eps_found, point = None, None
    for eps in np.geomspace(1e-3, 0.5, 120):
        point = misclassified_on_grid(params, anchor, eps, label)
        if point is not None:
            eps_found = float(eps)
            break
    net = {
        "input_dim": 2,
        "final_relu": False,
        "layers": [{"weights": w.tolist(), "bias": b.tolist()} for w, b in params],
    }
    dump("classifier_2_8_8_2.json", net)
    dump(
        "classifier_robustness.json",
        {
            "anchor": anchor.tolist(),
            "true_class": label,
            "adversarial_epsilon": eps_found,
            "grid_witness": point.tolist(),
            "training_accuracy": float(acc),
        },
    )


def closed_loop_fixture():
    w1 = rng.normal(0, 1, size=(6, 2))
    b1 = rng.normal(0, 0.3, size=6)
    w2 = rng.normal(0, 0.5, size=(2, 6))
    b2 = np.array([0.3, 0.3])
    dump(
        "controller_2_6_2.json",
        {
            "input_dim": 2,
            "final_relu": False,
            "layers": [
                {"weights": w1.tolist(), "bias": b1.tolist()},
                {"weights": w2.tolist(), "bias": b2.tolist()},
            ],
        },
    )
    dump(
        "closed_loop_system.json",
        {
            "workspace": {"lower": [0.0, 0.0], "upper": [1.5, 1.5]},
            "cell": 0.5,
            "obstacle": {"lower": [0.9, 0.9], "upper": [1.2, 1.2]},
            "A": [[1.0, 0.1], [0.0, 1.0]],
            "B": [[0.5, 0.0], [0.0, 0.5]],
            "H": [[1.0, 0.0], [0.0, 1.0]],
            "d": [-0.75, -0.75],
        },
    )


def box_polytope(lo, hi):
    n = len(lo)
    a = []
    b = []
    for i in range(n):
        row = [0.0] * n
        row[i] = 1.0
        a.append(row)
        b.append(hi[i])
        row = [0.0] * n
        row[i] = -1.0
        a.append(row)
        b.append(-lo[i])
    return {"A": a, "b": b}


def property_files():
    rob = json.loads((OUT / "classifier_robustness.json").read_text())
    for name, eps in [("robustness_adversarial.json", rob["adversarial_epsilon"]),
                      ("robustness_small.json", rob["adversarial_epsilon"] / 10)]:
        dump(name, {"type": "robustness", "anchor": rob["anchor"], "epsilon": eps,
                    "true_class": rob["true_class"]})
    sys_ = json.loads((OUT / "closed_loop_system.json").read_text())
    cells = []
    for i in range(3):
        for j in range(3):
            lo = [0.5 * i, 0.5 * j]
            cells.append(box_polytope(lo, [lo[0] + 0.5, lo[1] + 0.5]))
    obs = sys_["obstacle"]
    dump("closed_loop_property.json", {
        "type": "closed_loop", "regions": cells,
        "obstacles": [box_polytope(obs["lower"], obs["upper"])],
        "A": sys_["A"], "B": sys_["B"], "H": sys_["H"], "d": sys_["d"]})
    dump("identity_net.json", {"input_dim": 1, "final_relu": True,
                               "layers": [{"weights": [[1.0]], "bias": [0.0]}]})
    unit = {"lower": [0.0], "upper": [1.0]}
    dump("identity_safe.json", {"type": "raw", "input_set": unit,
                                "violation_set": {"A": [[-1.0]], "b": [-2.0]}})
    dump("identity_unsafe.json", {"type": "raw", "input_set": unit,
                                  "violation_set": {"A": [[-1.0]], "b": [-0.5]}})


if __name__ == "__main__":
    classifier_fixture()
    closed_loop_fixture()
    property_files()
