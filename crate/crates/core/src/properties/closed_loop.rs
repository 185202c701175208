use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::geometry::{HyperBox, Polytope, Region};
use crate::network::{AffineMap, Network};

use super::{CoupledConstraint, VerificationQuery};

/// One-step safety of `x⁺ = A x + B NN(H x + d)` from each region to each obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopSpec {
    pub regions: Vec<Polytope>,
    pub obstacles: Vec<Polytope>,
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub observation: AffineMap,
}

impl ClosedLoopSpec {
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.state_dim();
        let dim_err = |what: String| Err(Error::Dimension(what));
        if self.a.ncols() != n {
            return dim_err(format!("A is {}x{}, expected square", n, self.a.ncols()));
        }
        if self.b.nrows() != n {
            return dim_err(format!("B has {} rows, expected {n}", self.b.nrows()));
        }
        if self.observation.input_dim() != n {
            return dim_err(format!("H takes {} states, expected {n}", self.observation.input_dim()));
        }
        for (i, r) in self.regions.iter().enumerate() {
            if r.dim() != n {
                return dim_err(format!("region {i} has dimension {}, expected {n}", r.dim()));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.dim() != n {
                return dim_err(format!("obstacle {i} has dimension {}, expected {n}", o.dim()));
            }
        }
        Ok(())
    }

    /// Checks the controller's input and output widths against `net`.
    pub fn validate_for(&self, net: &Network) -> Result<()> {
        self.validate()?;
        if self.observation.output_dim() != net.input_dim() {
            return Err(Error::Dimension(format!(
                "H produces {} values but the network takes {}",
                self.observation.output_dim(),
                net.input_dim()
            )));
        }
        if self.b.ncols() != net.output_dim() {
            return Err(Error::Dimension(format!(
                "B takes {} controls but the network outputs {}",
                self.b.ncols(),
                net.output_dim()
            )));
        }
        Ok(())
    }

    pub fn successor(&self, net: &Network, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        let u = net.eval(self.observation.apply(x)?.view())?;
        Ok(self.a.dot(&x) + self.b.dot(&u))
    }
}

/// Query asking whether some state in `region` steps into `obstacle`.
pub fn transition_query(spec: &ClosedLoopSpec, region: &Polytope, obstacle: &Polytope) -> VerificationQuery {
    let coupled = obstacle
        .a()
        .outer_iter()
        .zip(obstacle.b())
        .map(|(row, &rhs)| CoupledConstraint {
            gx: row.dot(&spec.a),
            gz: row.dot(&spec.b),
            g: rhs,
        })
        .collect();
    VerificationQuery {
        input_set: Region::Polytope(region.clone()),
        input_map: Some(spec.observation.clone()),
        violation_set: Polytope::whole_space(spec.b.ncols()),
        coupled,
    }
}

/// Every (region, obstacle) pair, region-major.
pub fn closed_loop_queries(spec: &ClosedLoopSpec) -> Result<Vec<((usize, usize), VerificationQuery)>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.regions.len() * spec.obstacles.len());
    for (m, r) in spec.regions.iter().enumerate() {
        for (t, o) in spec.obstacles.iter().enumerate() {
            out.push(((m, t), transition_query(spec, r, o)));
        }
    }
    Ok(out)
}

/// Grid cells of side `epsilon` covering `bounds`; the last cell along an
/// axis is shorter when the side does not divide the extent. Cells are
/// ordered with the last axis varying fastest.
pub fn grid_workspace(bounds: &HyperBox, epsilon: f64) -> Result<Vec<Polytope>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Value(format!("grid side must be positive, got {epsilon}")));
    }
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let counts: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| (((h - l) / epsilon - 1e-9).ceil() as usize).max(1))
        .collect();
    let mut cells = Vec::with_capacity(counts.iter().product());
    let mut idx = vec![0usize; counts.len()];
    loop {
        let lower = Array1::from_iter(idx.iter().enumerate().map(|(k, &i)| lo[k] + i as f64 * epsilon));
        let upper = Array1::from_iter(
            idx.iter()
                .enumerate()
                .map(|(k, &i)| if i + 1 == counts[k] { hi[k] } else { lo[k] + (i + 1) as f64 * epsilon }),
        );
        cells.push(Polytope::from_box(&HyperBox::new(lower, upper)?));
        let mut k = idx.len();
        loop {
            if k == 0 {
                return Ok(cells);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Layer;
    use crate::search::{verify, Verdict, VerifierConfig};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> HyperBox {
        HyperBox::new(array![0.0, 0.0], array![1.0, 1.0]).unwrap()
    }

    #[test]
    fn grid_examples() {
        assert_eq!(grid_workspace(&unit_square(), 0.5).unwrap().len(), 4);
        let cells = grid_workspace(&HyperBox::new(array![0.0], array![1.0]).unwrap(), 0.3).unwrap();
        assert_eq!(cells.len(), 4);
        let last = cells[3].bounding_box().unwrap();
        assert!((last.upper()[0] - last.lower()[0] - 0.1).abs() < 1e-9);
        assert!(grid_workspace(&unit_square(), 0.0).is_err());
    }

    #[test]
    fn grid_cells_tile_the_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bounds = HyperBox::new(array![-0.3, 0.2], array![0.9, 1.0]).unwrap();
        let cells = grid_workspace(&bounds, 0.35).unwrap();
        assert_eq!(cells.len(), 4 * 3);
        let boxes: Vec<HyperBox> = cells.iter().map(|c| c.bounding_box().unwrap()).collect();
        for _ in 0..2000 {
            let x = array![rng.gen_range(-0.3..0.9), rng.gen_range(0.2..1.0)];
            let interior = boxes
                .iter()
                .filter(|b| b.lower().iter().zip(b.upper()).zip(&x).all(|((l, u), v)| l < v && v < u))
                .count();
            let closed = boxes.iter().filter(|b| b.contains(x.view(), 0.0)).count();
            assert!(interior == 1 || (interior == 0 && closed >= 2));
        }
    }

    fn identity_spec(regions: Vec<Polytope>, obstacles: Vec<Polytope>) -> ClosedLoopSpec {
        ClosedLoopSpec {
            regions,
            obstacles,
            a: Array2::eye(2),
            b: Array2::eye(2),
            observation: AffineMap::identity(2),
        }
    }

    fn identity_net() -> Network {
        Network::new(2, vec![Layer::new(Array2::eye(2), array![0.0, 0.0]).unwrap()], true).unwrap()
    }

    #[test]
    fn far_obstacle_is_safe() {
        let region = Polytope::from_box(&HyperBox::new(array![0.0, 0.0], array![0.1, 0.1]).unwrap());
        let obstacle = Polytope::new(array![[-1.0, 0.0]], array![-10.0]).unwrap();
        let spec = identity_spec(vec![region], vec![obstacle]);
        let qs = closed_loop_queries(&spec).unwrap();
        assert_eq!(qs.len(), 1);
        let out = verify(&identity_net(), &qs[0].1, &VerifierConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Safe);
    }

    #[test]
    fn self_transition_is_unsafe() {
        // NN(x) = relu(-x) is 0 on the positive quadrant, so the state stays put
        let net = Network::new(2, vec![Layer::new(-Array2::eye(2), array![0.0, 0.0]).unwrap()], true).unwrap();
        let region = Polytope::from_box(&HyperBox::new(array![0.2, 0.2], array![0.4, 0.4]).unwrap());
        let spec = identity_spec(vec![region.clone()], vec![region.clone()]);
        let (_, q) = closed_loop_queries(&spec).unwrap().remove(0);
        match verify(&net, &q, &VerifierConfig::default()).unwrap().verdict {
            Verdict::Unsafe { input, .. } => {
                let next = spec.successor(&net, input.view()).unwrap();
                assert!(region.contains(next.view(), 1e-6).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_errors() {
        let mut spec = identity_spec(vec![Polytope::whole_space(3)], vec![]);
        assert!(matches!(closed_loop_queries(&spec), Err(Error::Dimension(_))));
        spec.regions.clear();
        spec.b = Array2::eye(3);
        assert!(matches!(spec.validate(), Err(Error::Dimension(_))));
        let spec = identity_spec(vec![], vec![]);
        let wide = Network::new(2, vec![Layer::new(Array2::eye(2), array![0.0, 0.0]).unwrap(), Layer::new(Array2::ones((3, 2)), Array1::zeros(3)).unwrap()], false).unwrap();
        assert!(matches!(spec.validate_for(&wide), Err(Error::Dimension(_))));
    }

    #[test]
    fn query_count_is_product() {
        let cells = grid_workspace(&unit_square(), 0.5).unwrap();
        let spec = identity_spec(cells.clone(), cells[..3].to_vec());
        let qs = closed_loop_queries(&spec).unwrap();
        assert_eq!(qs.len(), 12);
        assert_eq!(qs[5].0, (1, 2));
    }
}
