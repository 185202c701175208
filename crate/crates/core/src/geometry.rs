//! Polytopes, boxes and hyperplanes: containment, sign-pattern feasibility,
//! Monte-Carlo volume fractions and seeded sampling.

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Sense};
use crate::network::{rows_to_matrix, Phase};

/// Slack granted to every half-space when deciding sign-pattern feasibility.
pub const SIGN_FEASIBILITY_TOL: f64 = 1e-7;

/// Rejection sampling draws at most this many candidates per requested point.
pub const REJECTION_OVERSAMPLING: usize = 50;

/// `{x : A x ≤ b}`. Zero rows means the whole space of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr", into = "PolytopeRepr")]
pub struct Polytope {
    a: Array2<f64>,
    b: Array1<f64>,
}

impl Polytope {
    pub fn new(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Shape(format!(
                "polytope has {} rows in A but {} entries in b",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Value("polytope contains a non-finite entry".into()));
        }
        Ok(Self { a, b })
    }

    /// The unconstrained space of dimension `dim`.
    pub fn whole_space(dim: usize) -> Self {
        Self {
            a: Array2::zeros((0, dim)),
            b: Array1::zeros(0),
        }
    }

    pub fn from_box(b: &HyperBox) -> Self {
        let d = b.dim();
        let mut a = Array2::zeros((2 * d, d));
        let mut rhs = Array1::zeros(2 * d);
        for i in 0..d {
            a[[2 * i, i]] = 1.0;
            rhs[2 * i] = b.upper[i];
            a[[2 * i + 1, i]] = -1.0;
            rhs[2 * i + 1] = -b.lower[i];
        }
        Self { a, b: rhs }
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn b(&self) -> &Array1<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }

    /// True iff `A x ≤ b + tol` componentwise.
    pub fn contains(&self, x: ArrayView1<f64>, tol: f64) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "point of length {} tested against a {}-dimensional polytope",
                x.len(),
                self.dim()
            )));
        }
        Ok(self
            .a
            .dot(&x)
            .iter()
            .zip(self.b.iter())
            .all(|(lhs, rhs)| *lhs <= rhs + tol))
    }

    pub fn intersect(&self, other: &Polytope) -> Result<Polytope> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("cannot intersect polytopes of different dimension".into()));
        }
        let a = ndarray::concatenate![ndarray::Axis(0), self.a, other.a];
        let b = ndarray::concatenate![ndarray::Axis(0), self.b, other.b];
        Polytope::new(a, b)
    }

    /// LP rows `A x ≤ b` over variables `offset..offset + dim` of a program
    /// with `width` variables.
    pub(crate) fn lp_rows(&self, width: usize, offset: usize) -> Vec<Constraint> {
        self.a
            .outer_iter()
            .zip(self.b.iter())
            .map(|(row, &rhs)| {
                let mut coeffs = vec![0.0; width];
                coeffs[offset..offset + row.len()]
                    .iter_mut()
                    .zip(row.iter())
                    .for_each(|(c, v)| *c = *v);
                Constraint::new(coeffs, Sense::Le, rhs)
            })
            .collect()
    }

    /// Per-coordinate bounds found by `2·dim` LPs.
    pub fn bounding_box(&self) -> Result<HyperBox> {
        let d = self.dim();
        let mut base = LinearProgram::new();
        for i in 0..d {
            base.add_variable(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY);
        }
        for c in self.lp_rows(d, 0) {
            base.add_constraint(c)?;
        }
        let mut lower = Array1::zeros(d);
        let mut upper = Array1::zeros(d);
        for i in 0..d {
            for (sign, slot) in [(1.0, &mut lower), (-1.0, &mut upper)] {
                let mut prog = base.clone();
                prog.set_objective_coeff(i, sign);
                match lp::solve(&prog, lp::DEFAULT_TOL)? {
                    LpOutcome::Optimal { solution, .. } => slot[i] = solution[i],
                    LpOutcome::Infeasible { .. } => {
                        return Err(Error::Domain("polytope is empty".into()))
                    }
                    LpOutcome::Unbounded => {
                        return Err(Error::Domain(format!(
                            "polytope is unbounded along coordinate {i}"
                        )))
                    }
                }
            }
        }
        HyperBox::new(lower, upper)
    }
}

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    /// Needed only when `A` has no rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl TryFrom<PolytopeRepr> for Polytope {
    type Error = Error;

    fn try_from(r: PolytopeRepr) -> Result<Self> {
        let cols = match (r.a.first(), r.dim) {
            (Some(row), _) => row.len(),
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Error::Shape("polytope with no rows needs an explicit `dim`".into()))
            }
        };
        Polytope::new(rows_to_matrix(&r.a, cols)?, Array1::from(r.b))
    }
}

impl From<Polytope> for PolytopeRepr {
    fn from(p: Polytope) -> Self {
        PolytopeRepr {
            a: p.a.outer_iter().map(|r| r.to_vec()).collect(),
            b: p.b.to_vec(),
            dim: (p.a.nrows() == 0).then_some(p.a.ncols()),
        }
    }
}

/// Axis-aligned box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr", into = "BoxRepr")]
pub struct HyperBox {
    lower: Array1<f64>,
    upper: Array1<f64>,
}

impl HyperBox {
    pub fn new(lower: Array1<f64>, upper: Array1<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Shape("box bounds have different lengths".into()));
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Value("box bounds must be finite".into()));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::Value("box has lower > upper".into()));
        }
        Ok(Self { lower, upper })
    }

    /// Max-norm ball of radius `eps` around `center`.
    pub fn around(center: ArrayView1<f64>, eps: f64) -> Result<Self> {
        HyperBox::new(center.mapv(|c| c - eps), center.mapv(|c| c + eps))
    }

    pub fn lower(&self) -> &Array1<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &Array1<f64> {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: ArrayView1<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }

    /// Intersection, or `None` when empty.
    pub fn intersect(&self, other: &HyperBox) -> Result<Option<HyperBox>> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("cannot intersect boxes of different dimension".into()));
        }
        let lower = ndarray::Zip::from(&self.lower)
            .and(&other.lower)
            .map_collect(|a, b| a.max(*b));
        let upper = ndarray::Zip::from(&self.upper)
            .and(&other.upper)
            .map_collect(|a, b| a.min(*b));
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Ok(None);
        }
        Ok(Some(HyperBox { lower, upper }))
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(l, u)| u - l)
            .product()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Array1<f64> {
        Array1::from_shape_fn(self.dim(), |i| {
            let (l, u) = (self.lower[i], self.upper[i]);
            if u > l {
                rng.gen_range(l..=u)
            } else {
                l
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<BoxRepr> for HyperBox {
    type Error = Error;

    fn try_from(r: BoxRepr) -> Result<Self> {
        HyperBox::new(Array1::from(r.lower), Array1::from(r.upper))
    }
}

impl From<HyperBox> for BoxRepr {
    fn from(b: HyperBox) -> Self {
        BoxRepr {
            lower: b.lower.to_vec(),
            upper: b.upper.to_vec(),
        }
    }
}

/// A bounded input region: either a box or a general polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Region {
    Box(HyperBox),
    Polytope(Polytope),
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Box(b) => b.dim(),
            Region::Polytope(p) => p.dim(),
        }
    }

    pub fn contains(&self, x: ArrayView1<f64>, tol: f64) -> Result<bool> {
        match self {
            Region::Box(b) => {
                if x.len() != b.dim() {
                    return Err(Error::Shape("point dimension differs from box".into()));
                }
                Ok(b.contains(x, tol))
            }
            Region::Polytope(p) => p.contains(x, tol),
        }
    }

    pub fn to_polytope(&self) -> Polytope {
        match self {
            Region::Box(b) => Polytope::from_box(b),
            Region::Polytope(p) => p.clone(),
        }
    }

    pub fn bounding_box(&self) -> Result<HyperBox> {
        match self {
            Region::Box(b) => Ok(b.clone()),
            Region::Polytope(p) => p.bounding_box(),
        }
    }
}

/// Which closed side of a hyperplane: `+` is `normal·x + offset ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
        }
    }
}

impl From<Phase> for Side {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Active => Side::Positive,
            Phase::Inactive => Side::Negative,
        }
    }
}

/// The set `{x : normal·x + offset = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Array1<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Array1<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// A zero normal does not define a hyperplane.
    pub fn is_degenerate(&self) -> bool {
        self.normal.iter().all(|v| *v == 0.0)
    }

    pub fn eval(&self, x: ArrayView1<f64>) -> f64 {
        self.normal.dot(&x) + self.offset
    }

    pub fn on_side(&self, x: ArrayView1<f64>, side: Side) -> bool {
        side.sign() * self.eval(x) >= 0.0
    }
}

/// Whether some point of `domain` lies on the requested closed side of every plane.
pub fn sign_pattern_feasible(planes: &[(Hyperplane, Side)], domain: &Polytope) -> Result<bool> {
    let d = domain.dim();
    if let Some((p, _)) = planes.iter().find(|(p, _)| p.normal.len() != d) {
        return Err(Error::Shape(format!(
            "hyperplane of dimension {} in a {}-dimensional domain",
            p.normal.len(),
            d
        )));
    }
    let mut prog = LinearProgram::new();
    for i in 0..d {
        prog.add_variable(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY);
    }
    for c in domain.lp_rows(d, 0) {
        prog.add_constraint(c)?;
    }
    for (plane, side) in planes {
        // side·(n·x + c) ≥ -tol
        let s = side.sign();
        prog.add_constraint(Constraint::new(
            plane.normal.iter().map(|v| s * v).collect(),
            Sense::Ge,
            -s * plane.offset - SIGN_FEASIBILITY_TOL,
        ))?;
    }
    Ok(!lp::solve(&prog, lp::DEFAULT_TOL)?.is_infeasible())
}

/// Fraction of `samples` on the closed `side` of `plane`.
pub fn volume_fraction(plane: &Hyperplane, side: Side, samples: &[Array1<f64>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if let Some(s) = samples.iter().find(|s| s.len() != plane.normal.len()) {
        return Err(Error::Shape(format!(
            "sample of length {} against a {}-dimensional plane",
            s.len(),
            plane.normal.len()
        )));
    }
    let hits = samples
        .iter()
        .filter(|x| plane.on_side(x.view(), side))
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Deterministic samples of a region.
///
/// Boxes are sampled uniformly. Polytopes are rejection-sampled from their
/// bounding box (computed by LP when not supplied), drawing at most
/// [`REJECTION_OVERSAMPLING`] candidates per requested point.
pub fn sample_domain(
    region: &Region,
    bounding: Option<&HyperBox>,
    count: usize,
    seed: u64,
) -> Result<Vec<Array1<f64>>> {
    if count == 0 {
        return Err(Error::Value("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match region {
        Region::Box(b) => Ok((0..count).map(|_| b.draw(&mut rng)).collect()),
        Region::Polytope(p) => {
            let derived;
            let bbox = match bounding {
                Some(b) => b,
                None => {
                    derived = p.bounding_box()?;
                    &derived
                }
            };
            let mut out = Vec::with_capacity(count);
            for _ in 0..count * REJECTION_OVERSAMPLING {
                let x = bbox.draw(&mut rng);
                if p.contains(x.view(), 0.0)? {
                    out.push(x);
                    if out.len() == count {
                        return Ok(out);
                    }
                }
            }
            Err(Error::SamplingFailed {
                accepted: out.len(),
                requested: count,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::{prop, prop_assert, proptest};

    fn unit_box(d: usize) -> HyperBox {
        HyperBox::new(Array1::from_elem(d, -1.0), Array1::from_elem(d, 1.0)).unwrap()
    }

    #[test]
    fn box_containment() {
        let p = Polytope::from_box(&unit_box(2));
        assert!(p.contains(array![0.0, 0.0].view(), 0.0).unwrap());
        assert!(!p.contains(array![2.0, 0.0].view(), 0.0).unwrap());
        assert!(matches!(p.contains(array![0.0].view(), 0.0), Err(Error::Shape(_))));
    }

    #[test]
    fn lp_certificate_points_are_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut found = 0;
        for _ in 0..50 {
            let a = Array2::from_shape_fn((6, 3), |_| rng.gen_range(-1.0..1.0));
            let b = Array1::from_shape_fn(6, |_| rng.gen_range(-0.5..1.0));
            let poly = Polytope::new(a, b).unwrap();
            let mut prog = LinearProgram::new();
            for i in 0..3 {
                prog.add_variable(format!("x{i}"), -10.0, 10.0);
            }
            for c in poly.lp_rows(3, 0) {
                prog.add_constraint(c).unwrap();
            }
            if let LpOutcome::Optimal { solution, .. } = lp::solve(&prog, lp::DEFAULT_TOL).unwrap() {
                assert!(poly.contains(Array1::from(solution).view(), 1e-7).unwrap());
                found += 1;
            }
        }
        assert!(found > 10);
    }

    #[test]
    fn contradictory_half_spaces() {
        let domain = Polytope::from_box(
            &HyperBox::new(array![-10.0, -10.0], array![10.0, 10.0]).unwrap(),
        );
        let planes = vec![
            (Hyperplane::new(array![1.0, 0.0], -1.0), Side::Positive),
            (Hyperplane::new(array![-1.0, 0.0], -1.0), Side::Positive),
        ];
        assert!(!sign_pattern_feasible(&planes, &domain).unwrap());
        for side in [Side::Positive, Side::Negative] {
            let single = vec![(Hyperplane::new(array![1.0, 1.0], 0.5), side)];
            assert!(sign_pattern_feasible(&single, &domain).unwrap());
        }
    }

    fn count_feasible_patterns(planes: &[Hyperplane], domain: &Polytope) -> usize {
        (0..1usize << planes.len())
            .filter(|mask| {
                let pattern: Vec<(Hyperplane, Side)> = planes
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let side = if mask >> i & 1 == 1 { Side::Positive } else { Side::Negative };
                        (p.clone(), side)
                    })
                    .collect();
                sign_pattern_feasible(&pattern, domain).unwrap()
            })
            .count()
    }

    #[test]
    fn three_lines_in_the_plane_give_at_most_seven_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let domain = Polytope::from_box(&HyperBox::new(array![-100.0, -100.0], array![100.0, 100.0]).unwrap());
        for _ in 0..20 {
            let planes: Vec<Hyperplane> = (0..3)
                .map(|_| {
                    Hyperplane::new(
                        Array1::from_shape_fn(2, |_| rng.gen_range(-1.0..1.0)),
                        rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            assert!(count_feasible_patterns(&planes, &domain) <= 7);
        }
    }

    #[test]
    fn adding_a_plane_never_restores_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let domain = Polytope::from_box(&unit_box(2));
        for _ in 0..100 {
            let mut planes = Vec::new();
            let mut was = true;
            for _ in 0..5 {
                planes.push((
                    Hyperplane::new(
                        Array1::from_shape_fn(2, |_| rng.gen_range(-1.0..1.0)),
                        rng.gen_range(-1.0..1.0),
                    ),
                    if rng.gen_bool(0.5) { Side::Positive } else { Side::Negative },
                ));
                let now = sign_pattern_feasible(&planes, &domain).unwrap();
                assert!(was || !now);
                was = now;
            }
        }
    }

    #[test]
    fn half_plane_through_center_has_half_the_samples() {
        let samples =
            sample_domain(&Region::Box(unit_box(2)), None, 10_000, 1).unwrap();
        let plane = Hyperplane::new(array![1.0, 0.0], 0.0);
        let f = volume_fraction(&plane, Side::Positive, &samples).unwrap();
        assert!((f - 0.5).abs() <= 0.02);
        let far = Hyperplane::new(array![1.0, 0.0], -5.0);
        assert_eq!(volume_fraction(&far, Side::Positive, &samples).unwrap(), 0.0);
        assert_eq!(volume_fraction(&far, Side::Negative, &samples).unwrap(), 1.0);
        assert!(matches!(
            volume_fraction(&plane, Side::Positive, &[]),
            Err(Error::EmptySamples)
        ));
    }

    /// Exact fraction of `b` on the positive side of `plane`, by the
    /// inclusion–exclusion formula for a simplex-cut unit cube.
    fn exact_box_fraction(b: &HyperBox, plane: &Hyperplane) -> f64 {
        let d = b.dim();
        // n·x + c ≥ 0 with x = l + w∘s, s ∈ [0,1]^d  ⇔  Σ a_i s_i ≤ t
        let mut a: Vec<f64> = (0..d)
            .map(|i| -plane.normal[i] * (b.upper[i] - b.lower[i]))
            .collect();
        let mut t = plane.offset + plane.normal.dot(&b.lower);
        for ai in a.iter_mut() {
            if *ai < 0.0 {
                t -= *ai;
                *ai = -*ai;
            }
        }
        let fact: f64 = (1..=d).map(|k| k as f64).product();
        let prod: f64 = a.iter().product();
        let mut sum = 0.0;
        for mask in 0..1usize << d {
            let shift: f64 = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).sum();
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (t - shift).max(0.0).powi(d as i32);
        }
        sum / (fact * prod)
    }

    #[test]
    fn volume_fraction_matches_exact_slab_volume() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 4000;
        for trial in 0..30 {
            let d = 1 + trial % 3;
            let lower = Array1::from_shape_fn(d, |_| rng.gen_range(-2.0..0.0));
            let upper = &lower + &Array1::from_shape_fn(d, |_| rng.gen_range(0.5..2.0));
            let b = HyperBox::new(lower, upper).unwrap();
            let center = (&b.lower + &b.upper) / 2.0;
            let normal = Array1::from_shape_fn(d, |_| rng.gen_range(-1.0..1.0));
            let offset = -normal.dot(&center) + rng.gen_range(-0.5..0.5);
            let plane = Hyperplane::new(normal, offset);
            let exact = exact_box_fraction(&b, &plane);
            let samples = sample_domain(&Region::Box(b), None, n, trial as u64).unwrap();
            let est = volume_fraction(&plane, Side::Positive, &samples).unwrap();
            let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!(
                (est - exact).abs() <= 3.0 * sigma + 1e-9,
                "trial {trial}: estimate {est} vs exact {exact}"
            );
        }
    }

    #[test]
    fn sampling_is_deterministic_and_uniform() {
        let b = Region::Box(HyperBox::new(array![0.0], array![1.0]).unwrap());
        assert_eq!(
            sample_domain(&b, None, 3, 7).unwrap(),
            sample_domain(&b, None, 3, 7).unwrap()
        );
        let pts = sample_domain(&Region::Box(unit_box(2)), None, 10_000, 3).unwrap();
        for i in 0..2 {
            let mean = pts.iter().map(|p| p[i]).sum::<f64>() / pts.len() as f64;
            assert!(mean.abs() <= 0.05);
        }
        assert!(matches!(sample_domain(&b, None, 0, 1), Err(Error::Value(_))));
    }

    #[test]
    fn triangle_acceptance_matches_area() {
        // x ≥ 0, y ≥ 0, x + y ≤ 1 inside the box [0,1]² (area ratio 1/2)
        let tri = Polytope::new(
            array![[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]],
            array![0.0, 0.0, 1.0],
        )
        .unwrap();
        let bbox = tri.bounding_box().unwrap();
        assert!((bbox.upper()[0] - 1.0).abs() < 1e-9 && bbox.lower()[1].abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let accepted = (0..n)
            .filter(|_| tri.contains(bbox.draw(&mut rng).view(), 0.0).unwrap())
            .count();
        let frac = accepted as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((frac - 0.5).abs() <= 3.0 * sigma);
        let pts = sample_domain(&Region::Polytope(tri.clone()), None, 500, 2).unwrap();
        assert!(pts.iter().all(|p| tri.contains(p.view(), 0.0).unwrap()));
    }

    #[test]
    fn sliver_polytope_exhausts_rejection_cap() {
        let sliver = Polytope::new(
            array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, -1.0], [-1.0, 1.0]],
            array![1.0, 1.0, 1.0, 1.0, 1e-9, 1e-9],
        )
        .unwrap();
        assert!(matches!(
            sample_domain(&Region::Polytope(sliver), None, 100, 0),
            Err(Error::SamplingFailed { .. })
        ));
    }

    #[test]
    fn serde_forms() {
        let p: Polytope = serde_json::from_str(r#"{"A": [[1, 0]], "b": [2]}"#).unwrap();
        assert_eq!(p.dim(), 2);
        let r: Region = serde_json::from_str(r#"{"lower": [0, 0], "upper": [1, 1]}"#).unwrap();
        assert!(matches!(r, Region::Box(_)));
        let r: Region = serde_json::from_str(r#"{"A": [[1]], "b": [0]}"#).unwrap();
        assert!(matches!(r, Region::Polytope(_)));
        assert!(serde_json::from_str::<HyperBox>(r#"{"lower": [1], "upper": [0]}"#).is_err());
        let empty = Polytope::whole_space(3);
        let back: Polytope = serde_json::from_value(serde_json::to_value(&empty).unwrap()).unwrap();
        assert_eq!(back, empty);
    }

    proptest! {
        #[test]
        fn both_sides_cover_every_sample(
            normal in prop::collection::vec(-2.0f64..2.0, 2),
            offset in -1.0f64..1.0,
            pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..40),
        ) {
            let plane = Hyperplane::new(Array1::from(normal), offset);
            let samples: Vec<Array1<f64>> = pts.into_iter().map(Array1::from).collect();
            let plus = volume_fraction(&plane, Side::Positive, &samples).unwrap();
            let minus = volume_fraction(&plane, Side::Negative, &samples).unwrap();
            prop_assert!(plus + minus >= 1.0 - 1e-12);
        }
    }
}
