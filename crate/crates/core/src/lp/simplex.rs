//! Dense two-phase tableau simplex.
//!
//! Variables are shifted, mirrored or split into nonnegative columns, every
//! row gets a slack, surplus or artificial column, and phase 1 minimizes the
//! artificial sum. Pivoting uses Dantzig's rule for a bounded number of pivots
//! per phase and then falls back to Bland's rule, which cannot cycle.

use super::{Constraint, LinearProgram, LpBackend, LpOutcome, Sense, Tag};
use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-9;
const DUAL_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    /// Dantzig pivots per phase before switching to Bland's rule; `None`
    /// derives a limit from the program size.
    pub dantzig_pivots: Option<usize>,
    /// Hard cap on pivots per phase; exceeding it is a numeric failure.
    pub max_pivots: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            dantzig_pivots: None,
            max_pivots: 200_000,
        }
    }
}

impl LpBackend for DenseSimplex {
    fn solve(&self, lp: &LinearProgram, tol: f64) -> Result<LpOutcome> {
        self.run(lp, tol, true)
    }

    fn is_feasible(&self, lp: &LinearProgram, tol: f64) -> Result<bool> {
        Ok(!self.run(lp, tol, false)?.is_infeasible())
    }
}

#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    Shift { col: usize, lower: f64 },
    Mirror { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * (self.cols + 1) + c
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[self.idx(r, c)]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[self.idx(r, self.cols)]
    }

    fn objective_row(&self) -> &[f64] {
        let start = self.idx(self.rows, 0);
        &self.data[start..start + self.cols + 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.at(r, c);
        let row_start = r * width;
        for v in &mut self.data[row_start..row_start + width] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[row_start..row_start + width].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let start = i * width;
            let factor = self.data[start + c];
            if factor == 0.0 {
                continue;
            }
            for (v, pv) in self.data[start..start + width].iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.data[start + c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Rewrites the objective row for cost vector `costs` under the current basis.
    fn price(&mut self, costs: &[f64]) {
        let width = self.cols + 1;
        let mut obj = vec![0.0; width];
        obj[..self.cols].copy_from_slice(costs);
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(&self.data[r * width..(r + 1) * width]) {
                *o -= cb * v;
            }
        }
        let start = self.rows * width;
        self.data[start..start + width].copy_from_slice(&obj);
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl DenseSimplex {
    fn run(&self, lp: &LinearProgram, tol: f64, optimize: bool) -> Result<LpOutcome> {
        let n = lp.num_variables();

        // nonnegative column layout
        let mut maps = Vec::with_capacity(n);
        let mut n_struct = 0;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for v in lp.variables() {
            if v.lower > v.upper + tol {
                return Ok(LpOutcome::Infeasible { witness: Vec::new() });
            }
            if v.lower.is_finite() {
                maps.push(ColumnMap::Shift {
                    col: n_struct,
                    lower: v.lower,
                });
                if v.upper.is_finite() {
                    bound_rows.push((n_struct, (v.upper - v.lower).max(0.0)));
                }
                n_struct += 1;
            } else if v.upper.is_finite() {
                maps.push(ColumnMap::Mirror {
                    col: n_struct,
                    upper: v.upper,
                });
                n_struct += 1;
            } else {
                maps.push(ColumnMap::Split {
                    pos: n_struct,
                    neg: n_struct + 1,
                });
                n_struct += 2;
            }
        }

        // rows in structural columns, rhs made nonnegative
        struct Row {
            coeffs: Vec<f64>,
            sense: Sense,
            rhs: f64,
            tag: Option<Tag>,
        }
        let mut rows: Vec<Row> = Vec::with_capacity(lp.constraints().len() + bound_rows.len());
        for c in lp.constraints() {
            rows.push(transform_row(c, &maps, n_struct));
        }
        for &(col, ub) in &bound_rows {
            let mut coeffs = vec![0.0; n_struct];
            coeffs[col] = 1.0;
            rows.push(Row {
                coeffs,
                sense: Sense::Le,
                rhs: ub,
                tag: None,
            });
        }
        fn transform_row(c: &Constraint, maps: &[ColumnMap], n_struct: usize) -> Row {
            let mut coeffs = vec![0.0; n_struct];
            let mut rhs = c.rhs;
            for (a, m) in c.coeffs.iter().zip(maps) {
                if *a == 0.0 {
                    continue;
                }
                match *m {
                    ColumnMap::Shift { col, lower } => {
                        coeffs[col] += a;
                        rhs -= a * lower;
                    }
                    ColumnMap::Mirror { col, upper } => {
                        coeffs[col] -= a;
                        rhs -= a * upper;
                    }
                    ColumnMap::Split { pos, neg } => {
                        coeffs[pos] += a;
                        coeffs[neg] -= a;
                    }
                }
            }
            Row {
                coeffs,
                sense: c.sense,
                rhs,
                tag: c.tag,
            }
        }
        for row in &mut rows {
            if row.rhs < 0.0 {
                row.rhs = -row.rhs;
                row.coeffs.iter_mut().for_each(|v| *v = -*v);
                row.sense = match row.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
        }

        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let n_art = rows.iter().filter(|r| r.sense != Sense::Le).count();
        let art_start = n_struct + n_slack;
        let cols = art_start + n_art;

        let mut tab = Tableau {
            rows: m,
            cols,
            data: vec![0.0; (m + 1) * (cols + 1)],
            basis: vec![0; m],
        };
        // (unit column, phase-1 cost) per row, for Farkas multipliers
        let mut unit_cols = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n_struct, art_start);
        for (r, row) in rows.iter().enumerate() {
            let base = tab.idx(r, 0);
            tab.data[base..base + n_struct].copy_from_slice(&row.coeffs);
            let rhs_idx = tab.idx(r, cols);
            tab.data[rhs_idx] = row.rhs;
            match row.sense {
                Sense::Le => {
                    let i = tab.idx(r, next_slack);
                    tab.data[i] = 1.0;
                    tab.basis[r] = next_slack;
                    unit_cols.push((next_slack, 0.0));
                    next_slack += 1;
                }
                Sense::Ge => {
                    let i = tab.idx(r, next_slack);
                    tab.data[i] = -1.0;
                    next_slack += 1;
                    let i = tab.idx(r, next_art);
                    tab.data[i] = 1.0;
                    tab.basis[r] = next_art;
                    unit_cols.push((next_art, 1.0));
                    next_art += 1;
                }
                Sense::Eq => {
                    let i = tab.idx(r, next_art);
                    tab.data[i] = 1.0;
                    tab.basis[r] = next_art;
                    unit_cols.push((next_art, 1.0));
                    next_art += 1;
                }
            }
        }
        let original = tab.data.clone();

        let bland_after = self
            .dantzig_pivots
            .unwrap_or_else(|| 20 * (m + cols) + 50);

        // phase 1
        if n_art > 0 {
            let mut costs = vec![0.0; cols];
            costs[art_start..].iter_mut().for_each(|c| *c = 1.0);
            tab.price(&costs);
            if let PhaseEnd::Unbounded = self.iterate(&mut tab, cols, 1.0, bland_after)? {
                return Err(Error::Numeric("phase 1 reported an unbounded ray".into()));
            }
            let infeasibility = -tab.objective_row()[cols];
            if infeasibility > tol {
                let obj = tab.objective_row();
                let mut witness: Vec<Tag> = rows
                    .iter()
                    .zip(&unit_cols)
                    .filter_map(|(row, &(col, cost))| {
                        let y = cost - obj[col];
                        (y.abs() > DUAL_EPS).then_some(row.tag).flatten()
                    })
                    .collect();
                witness.sort_unstable();
                witness.dedup();
                return Ok(LpOutcome::Infeasible { witness });
            }
            // pivot remaining zero-level artificials out of the basis
            for r in 0..m {
                if tab.basis[r] < art_start {
                    continue;
                }
                let best = (0..art_start)
                    .map(|j| (j, tab.at(r, j).abs()))
                    .filter(|&(_, v)| v > PIVOT_EPS)
                    .max_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((j, _)) = best {
                    tab.pivot(r, j);
                }
            }
        }

        // phase 2
        let mut costs = vec![0.0; cols];
        if optimize {
            for (c, m) in lp.objective().iter().zip(&maps) {
                match *m {
                    ColumnMap::Shift { col, .. } => costs[col] += c,
                    ColumnMap::Mirror { col, .. } => costs[col] -= c,
                    ColumnMap::Split { pos, neg } => {
                        costs[pos] += c;
                        costs[neg] -= c;
                    }
                }
            }
        }
        let scale = costs.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let unbounded = if costs.iter().any(|&c| c != 0.0) {
            tab.price(&costs);
            matches!(
                self.iterate(&mut tab, art_start, scale, bland_after)?,
                PhaseEnd::Unbounded
            )
        } else {
            false
        };
        if unbounded {
            return Ok(LpOutcome::Unbounded);
        }

        let mut values = vec![0.0; cols];
        for r in 0..m {
            values[tab.basis[r]] = tab.rhs(r);
        }
        if let Some(refined) = refine_basic_solution(&original, m, cols, &tab.basis) {
            for (r, v) in refined.into_iter().enumerate() {
                values[tab.basis[r]] = v;
            }
        }
        let x: Vec<f64> = maps
            .iter()
            .map(|m| match *m {
                ColumnMap::Shift { col, lower } => lower + values[col].max(0.0),
                ColumnMap::Mirror { col, upper } => upper - values[col].max(0.0),
                ColumnMap::Split { pos, neg } => values[pos].max(0.0) - values[neg].max(0.0),
            })
            .collect();

        let magnitude = lp
            .constraints()
            .iter()
            .map(|c| c.rhs.abs())
            .chain(x.iter().map(|v| v.abs()))
            .fold(1.0f64, f64::max);
        let violation = lp.max_violation(&x);
        if violation > 1e-6 * magnitude {
            return Err(Error::Numeric(format!(
                "simplex solution violates the program by {violation:e}"
            )));
        }
        Ok(LpOutcome::Optimal {
            objective: lp.objective_value(&x),
            solution: x,
        })
    }

    fn iterate(
        &self,
        tab: &mut Tableau,
        allowed: usize,
        cost_scale: f64,
        bland_after: usize,
    ) -> Result<PhaseEnd> {
        let eps = 1e-9 * cost_scale;
        let mut pivots = 0usize;
        loop {
            let bland = pivots >= bland_after;
            let obj = tab.objective_row();
            let mut entering = None;
            let mut best = -eps;
            for (j, &d) in obj[..allowed].iter().enumerate() {
                if d < -eps {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if d < best {
                        best = d;
                        entering = Some(j);
                    }
                }
            }
            let Some(col) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let mut leaving: Option<(usize, f64, f64)> = None;
            for r in 0..tab.rows {
                let a = tab.at(r, col);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = tab.rhs(r).max(0.0) / a;
                leaving = match leaving {
                    None => Some((r, ratio, a)),
                    Some((br, bratio, ba)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        let better = if tie {
                            if bland {
                                tab.basis[r] < tab.basis[br]
                            } else {
                                a > ba
                            }
                        } else {
                            ratio < bratio
                        };
                        if better {
                            Some((r, ratio, a))
                        } else {
                            Some((br, bratio, ba))
                        }
                    }
                };
            }
            let Some((row, _, _)) = leaving else {
                return Ok(PhaseEnd::Unbounded);
            };
            tab.pivot(row, col);
            pivots += 1;
            if pivots > self.max_pivots {
                return Err(Error::Numeric(format!(
                    "simplex exceeded {} pivots",
                    self.max_pivots
                )));
            }
        }
    }
}

/// Re-solves `B x_B = b` from the original rows to shed accumulated pivot error.
fn refine_basic_solution(
    original: &[f64],
    m: usize,
    cols: usize,
    basis: &[usize],
) -> Option<Vec<f64>> {
    if m == 0 {
        return Some(Vec::new());
    }
    let width = cols + 1;
    // augmented m × (m + 1)
    let mut a = vec![0.0; m * (m + 1)];
    for r in 0..m {
        for (k, &b) in basis.iter().enumerate() {
            a[r * (m + 1) + k] = original[r * width + b];
        }
        a[r * (m + 1) + m] = original[r * width + cols];
    }
    for k in 0..m {
        let (p, pv) = (k..m)
            .map(|r| (r, a[r * (m + 1) + k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pv < 1e-12 {
            return None;
        }
        if p != k {
            for c in 0..=m {
                a.swap(p * (m + 1) + c, k * (m + 1) + c);
            }
        }
        let diag = a[k * (m + 1) + k];
        for r in (k + 1)..m {
            let f = a[r * (m + 1) + k] / diag;
            if f == 0.0 {
                continue;
            }
            for c in k..=m {
                a[r * (m + 1) + c] -= f * a[k * (m + 1) + c];
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let mut s = a[k * (m + 1) + m];
        for c in (k + 1)..m {
            s -= a[k * (m + 1) + c] * x[c];
        }
        x[k] = s / a[k * (m + 1) + k];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, Constraint, DEFAULT_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: enumerate every basis of the inequality system
    /// (constraints plus variable bounds), keep feasible vertices, take the best.
    fn vertex_enumeration_optimum(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
        fn combos(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..m {
                cur.push(i);
                combos(i + 1, m, k, cur, out);
                cur.pop();
            }
        }
        let mut all = Vec::new();
        combos(0, a.len(), c.len(), &mut Vec::new(), &mut all);
        let mut best: Option<f64> = None;
        for idx in all {
            let rows: Vec<&Vec<f64>> = idx.iter().map(|&i| &a[i]).collect();
            let rhs: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
            let Some(x) = solve_square(&rows, &rhs) else {
                continue;
            };
            let feasible = a
                .iter()
                .zip(b)
                .all(|(row, bi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9);
            if feasible {
                let val: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(val, |b: f64| b.min(val)));
            }
        }
        best
    }

    fn solve_square(rows: &[&Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
        let n = rows.len();
        let mut a: Vec<Vec<f64>> = rows
            .iter()
            .zip(rhs)
            .map(|(r, b)| {
                let mut v = (*r).clone();
                v.push(*b);
                v
            })
            .collect();
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))?;
            if a[p][k].abs() < 1e-10 {
                return None;
            }
            a.swap(p, k);
            for r in 0..n {
                if r != k {
                    let f = a[r][k] / a[k][k];
                    for c in k..=n {
                        a[r][c] -= f * a[k][c];
                    }
                }
            }
        }
        Some((0..n).map(|k| a[k][n] / a[k][k]).collect())
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut optimal = 0;
        for _ in 0..300 {
            let n = 5;
            let mut lp = LinearProgram::new();
            for i in 0..n {
                lp.add_variable(format!("x{i}"), -10.0, 10.0);
            }
            let mut a = Vec::new();
            let mut b = Vec::new();
            for _ in 0..8 {
                let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let rhs = rng.gen_range(-1.0..2.0);
                lp.add_constraint(Constraint::new(row.clone(), Sense::Le, rhs))
                    .unwrap();
                a.push(row);
                b.push(rhs);
            }
            // box bounds as explicit rows for the oracle
            for i in 0..n {
                let mut up = vec![0.0; n];
                up[i] = 1.0;
                a.push(up.clone());
                b.push(10.0);
                up[i] = -1.0;
                a.push(up);
                b.push(10.0);
            }
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            lp.set_objective(c.clone()).unwrap();
            let oracle = vertex_enumeration_optimum(&a, &b, &c);
            match (solve(&lp, DEFAULT_TOL).unwrap(), oracle) {
                (LpOutcome::Optimal { objective, solution }, Some(best)) => {
                    assert!((objective - best).abs() <= 1e-6, "{objective} vs {best}");
                    assert!(lp.max_violation(&solution) <= DEFAULT_TOL);
                    optimal += 1;
                }
                (LpOutcome::Infeasible { .. }, None) => {}
                (got, want) => panic!("solver {got:?} vs oracle {want:?}"),
            }
        }
        assert!(optimal > 100);
    }

    #[test]
    fn no_sampled_feasible_point_beats_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let n = 3;
            let mut lp = LinearProgram::new();
            for i in 0..n {
                lp.add_variable(format!("x{i}"), -1.0, 1.0);
            }
            for _ in 0..4 {
                let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                lp.add_constraint(Constraint::new(row, Sense::Le, rng.gen_range(0.0..1.0)))
                    .unwrap();
            }
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            lp.set_objective(c.clone()).unwrap();
            let LpOutcome::Optimal { objective, .. } = solve(&lp, DEFAULT_TOL).unwrap() else {
                panic!("origin is feasible");
            };
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if lp.max_violation(&x) == 0.0 {
                    assert!(lp.objective_value(&x) >= objective - 1e-9);
                }
            }
        }
    }

    #[test]
    fn equality_and_free_variables() {
        // min x + y  s.t. x - y = 1, x + y >= -3, x, y free  → objective -3
        let mut lp = LinearProgram::new();
        lp.add_variable("x", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_variable("y", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint(Constraint::new(vec![1.0, -1.0], Sense::Eq, 1.0)).unwrap();
        lp.add_constraint(Constraint::new(vec![1.0, 1.0], Sense::Ge, -3.0)).unwrap();
        lp.set_objective(vec![1.0, 1.0]).unwrap();
        let LpOutcome::Optimal { solution, objective } = solve(&lp, DEFAULT_TOL).unwrap() else {
            panic!()
        };
        assert!((objective + 3.0).abs() < 1e-9);
        assert!((solution[0] - solution[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bounded_only_variable() {
        // max x with x <= 2 via bound only
        let mut lp = LinearProgram::new();
        lp.add_variable("x", f64::NEG_INFINITY, 2.0);
        lp.set_objective(vec![-1.0]).unwrap();
        let LpOutcome::Optimal { solution, .. } = solve(&lp, DEFAULT_TOL).unwrap() else {
            panic!()
        };
        assert!((solution[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_program_terminates_under_bland() {
        // a classic cycling example for Dantzig's rule without anti-cycling
        let mut lp = LinearProgram::new();
        for i in 0..4 {
            lp.add_variable(format!("x{i}"), 0.0, f64::INFINITY);
        }
        lp.add_constraint(Constraint::new(vec![0.5, -5.5, -2.5, 9.0], Sense::Le, 0.0)).unwrap();
        lp.add_constraint(Constraint::new(vec![0.5, -1.5, -0.5, 1.0], Sense::Le, 0.0)).unwrap();
        lp.add_constraint(Constraint::new(vec![1.0, 0.0, 0.0, 0.0], Sense::Le, 1.0)).unwrap();
        lp.set_objective(vec![-10.0, 57.0, 9.0, 24.0]).unwrap();
        let solver = DenseSimplex {
            dantzig_pivots: Some(0),
            ..DenseSimplex::default()
        };
        let LpOutcome::Optimal { objective, .. } = solver.solve(&lp, DEFAULT_TOL).unwrap() else {
            panic!()
        };
        assert!((objective + 1.0).abs() < 1e-9);
        assert_eq!(solve(&lp, DEFAULT_TOL).unwrap().status_name(), "OPTIMAL");
    }

    #[test]
    fn identical_programs_give_identical_outcomes() {
        let mut lp = LinearProgram::new();
        lp.add_variable("a", 0.0, 3.0);
        lp.add_variable("b", -1.0, 4.0);
        lp.add_constraint(Constraint::new(vec![1.0, 1.0], Sense::Ge, 1.0)).unwrap();
        lp.set_objective(vec![1.0, 1.0]).unwrap();
        assert_eq!(solve(&lp, DEFAULT_TOL).unwrap(), solve(&lp, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn inverted_bounds_are_infeasible() {
        let mut lp = LinearProgram::new();
        lp.add_variable("a", 1.0, 0.0);
        assert!(solve(&lp, DEFAULT_TOL).unwrap().is_infeasible());
    }
}
