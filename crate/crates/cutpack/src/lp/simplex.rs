//! Dense simplex over exact rationals.
//!
//! Fresh programs go through two-phase primal simplex; a solved
//! [`SimplexState`] can then absorb extra `>=` rows and re-optimize with
//! dual pivots, which is what lazy constraint generation wants. Bland's
//! rule everywhere, so no cycling. Sizes here are desk-scale (hundreds of
//! rows/columns at most), so a dense tableau is fine.

use crate::ratio::Q;
use num::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, Q)>,
    pub sense: Sense,
    pub rhs: Q,
}

/// Minimization LP over nonnegative variables.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<(usize, Q)>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplexOutcome {
    Optimal { values: Vec<Q>, objective: Q },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows[i] has num_cols coefficient entries followed by the rhs
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    num_cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        &self.rows[i][self.num_cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        debug_assert!(!piv.is_zero());
        if !piv.is_one() {
            for x in self.rows[row].iter_mut() {
                if !x.is_zero() {
                    *x /= &piv;
                }
            }
        }
        let prow = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (x, p) in r.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's-rule simplex on the current basis. `cost` is the reduced-cost
    /// row (mutated in place); returns false on unboundedness.
    fn optimize(&mut self, cost: &mut Vec<Q>) -> bool {
        // eliminate basic variables from the cost row
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            let factor = cost[b].clone();
            if !factor.is_zero() {
                for (x, p) in cost.iter_mut().zip(&self.rows[i]) {
                    if !p.is_zero() {
                        *x -= &factor * p;
                    }
                }
            }
        }
        loop {
            let Some(col) = (0..self.num_cols).find(|&j| cost[j].is_negative()) else {
                return true;
            };
            // min-ratio leaving row; ties broken by smallest basis variable
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = best else {
                return false;
            };
            self.pivot(row, col);
            let factor = cost[col].clone();
            if !factor.is_zero() {
                for (x, p) in cost.iter_mut().zip(&self.rows[row]) {
                    if !p.is_zero() {
                        *x -= &factor * p;
                    }
                }
            }
        }
    }
}

/// A solved tableau that can absorb further `>=` rows and re-optimize with
/// dual simplex, so lazy constraint generation never restarts from scratch.
pub struct SimplexState {
    t: Tableau,
    /// reduced-cost row at the current basis, length `num_cols + 1`
    cost: Vec<Q>,
    num_vars: usize,
}

impl SimplexState {
    /// Optimal values of the structural variables at the current basis.
    pub fn values(&self) -> Vec<Q> {
        let mut values = vec![Q::zero(); self.num_vars];
        for (i, &b) in self.t.basis.iter().enumerate() {
            if b < self.num_vars {
                values[b] = self.t.rhs(i).clone();
            }
        }
        values
    }

    /// Append `sum coeffs >= rhs` with a fresh surplus variable as its basic
    /// variable. The basis stays dual feasible; call [`reoptimize`] after.
    ///
    /// [`reoptimize`]: SimplexState::reoptimize
    pub fn add_ge_row(&mut self, coeffs: &[(usize, Q)], rhs: Q) {
        let surplus = self.t.num_cols;
        for r in self.t.rows.iter_mut() {
            r.insert(surplus, Q::zero());
        }
        self.cost.insert(surplus, Q::zero());
        self.t.num_cols += 1;

        // `sum - surplus = rhs`, negated so the surplus is basic at `-slackness`
        let mut row = vec![Q::zero(); self.t.num_cols + 1];
        for (j, c) in coeffs {
            row[*j] -= c;
        }
        row[surplus] = Q::one();
        row[self.t.num_cols] = -rhs;
        // express the row over the current basis
        for i in 0..self.t.basis.len() {
            let factor = row[self.t.basis[i]].clone();
            if !factor.is_zero() {
                for (x, p) in row.iter_mut().zip(&self.t.rows[i]) {
                    if !p.is_zero() {
                        *x -= &factor * p;
                    }
                }
            }
        }
        self.t.rows.push(row);
        self.t.basis.push(surplus);
    }

    /// Dual simplex with Bland's rule: restore primal feasibility while the
    /// reduced costs stay nonnegative. Returns false when the program became
    /// infeasible.
    pub fn reoptimize(&mut self) -> bool {
        loop {
            // leaving row: smallest basis variable with negative rhs
            let mut leave: Option<usize> = None;
            for i in 0..self.t.rows.len() {
                if self.t.rhs(i).is_negative()
                    && leave.map_or(true, |l| self.t.basis[i] < self.t.basis[l])
                {
                    leave = Some(i);
                }
            }
            let Some(row) = leave else {
                return true;
            };
            // entering column: min |cost_j / a_rj| over a_rj < 0, ties by index
            let mut best: Option<(usize, Q)> = None;
            for j in 0..self.t.num_cols {
                let a = &self.t.rows[row][j];
                if a.is_negative() {
                    let ratio = &self.cost[j] / -a;
                    if best.as_ref().map_or(true, |(_, br)| ratio < *br) {
                        best = Some((j, ratio));
                    }
                }
            }
            let Some((col, _)) = best else {
                return false;
            };
            self.t.pivot(row, col);
            let factor = self.cost[col].clone();
            if !factor.is_zero() {
                for (x, p) in self.cost.iter_mut().zip(&self.t.rows[row]) {
                    if !p.is_zero() {
                        *x -= &factor * p;
                    }
                }
            }
        }
    }
}

/// Exact primal simplex with Bland's anti-cycling rule.
pub fn simplex_solve(lp: &LinearProgram) -> SimplexOutcome {
    match simplex_solve_state(lp) {
        Ok(state) => {
            let values = state.values();
            let objective = lp.objective.iter().map(|(j, c)| c * &values[*j]).sum();
            SimplexOutcome::Optimal { values, objective }
        }
        Err(outcome) => outcome,
    }
}

/// Like [`simplex_solve`], but hands back the solved state for incremental
/// row additions. The error side carries `Infeasible` or `Unbounded`.
pub fn simplex_solve_state(lp: &LinearProgram) -> Result<SimplexState, SimplexOutcome> {
    let n = lp.num_vars;
    let m = lp.rows.len();

    // Count structural columns: one slack/surplus per inequality, one
    // artificial per >=/= row (and per <= row with negative rhs).
    let mut num_slack = 0usize;
    for r in &lp.rows {
        if r.sense != Sense::Eq {
            num_slack += 1;
        }
    }
    let mut need_artificial = vec![false; m];
    for (i, r) in lp.rows.iter().enumerate() {
        let neg = r.rhs.is_negative();
        need_artificial[i] = match r.sense {
            Sense::Le => neg,
            Sense::Ge => !neg,
            Sense::Eq => true,
        };
    }
    let num_art: usize = need_artificial.iter().filter(|&&b| b).count();
    let num_cols = n + num_slack + num_art;

    let mut t = Tableau {
        rows: vec![vec![Q::zero(); num_cols + 1]; m],
        basis: vec![usize::MAX; m],
        num_cols,
    };

    let mut slack_idx = n;
    let mut art_idx = n + num_slack;
    let mut art_cols = Vec::new();
    for (i, r) in lp.rows.iter().enumerate() {
        for (j, c) in &r.coeffs {
            t.rows[i][*j] += c;
        }
        t.rows[i][num_cols] = r.rhs.clone();
        if r.sense != Sense::Eq {
            t.rows[i][slack_idx] = if r.sense == Sense::Le { Q::one() } else { -Q::one() };
            if !need_artificial[i] {
                t.basis[i] = slack_idx;
            }
            slack_idx += 1;
        }
        if need_artificial[i] {
            // normalize to nonnegative rhs so the artificial can be basic
            if t.rows[i][num_cols].is_negative() {
                for x in t.rows[i].iter_mut() {
                    *x = -x.clone();
                }
            }
            t.rows[i][art_idx] = Q::one();
            t.basis[i] = art_idx;
            art_cols.push(art_idx);
            art_idx += 1;
        }
    }

    // Phase 1: drive artificials to zero.
    if num_art > 0 {
        let mut cost = vec![Q::zero(); num_cols + 1];
        for &c in &art_cols {
            cost[c] = Q::one();
        }
        if !t.optimize(&mut cost) {
            unreachable!("phase-1 objective is bounded below by zero");
        }
        if cost[num_cols].is_negative() {
            // optimum value is -cost[rhs]; nonzero means infeasible
            return Err(SimplexOutcome::Infeasible);
        }
        // Pivot out any artificial stuck in the basis; drop redundant rows.
        let is_art = |j: usize| j >= n + num_slack;
        let mut i = 0;
        while i < t.rows.len() {
            if is_art(t.basis[i]) {
                match (0..n + num_slack).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(col) => t.pivot(i, col),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        // Drop the artificial columns outright: they sit in one contiguous
        // tail block, no basis entry points at them anymore, and removing
        // them shrinks every later pivot.
        for r in t.rows.iter_mut() {
            let rhs = r.pop().expect("tableau rows carry an rhs entry");
            r.truncate(n + num_slack);
            r.push(rhs);
        }
        t.num_cols = n + num_slack;
    }
    let num_cols = t.num_cols;

    // Phase 2.
    let mut cost = vec![Q::zero(); num_cols + 1];
    for (j, c) in &lp.objective {
        cost[*j] += c;
    }
    if !t.optimize(&mut cost) {
        return Err(SimplexOutcome::Unbounded);
    }

    Ok(SimplexState { t, cost, num_vars: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{q, qr};

    fn solve(lp: &LinearProgram) -> (Vec<Q>, Q) {
        match simplex_solve(lp) {
            SimplexOutcome::Optimal { values, objective } => (values, objective),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn max_x_under_cap() {
        // max x s.t. x <= 3  ==  min -x
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![(0, q(-1))],
            rows: vec![Row { coeffs: vec![(0, q(1))], sense: Sense::Le, rhs: q(3) }],
        };
        let (v, obj) = solve(&lp);
        assert_eq!(v[0], q(3));
        assert_eq!(obj, q(-3));
    }

    #[test]
    fn min_lambda_two_lower_bounds() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![(0, q(1))],
            rows: vec![
                Row { coeffs: vec![(0, q(1))], sense: Sense::Ge, rhs: q(1) },
                Row { coeffs: vec![(0, q(1))], sense: Sense::Ge, rhs: q(2) },
            ],
        };
        let (v, _) = solve(&lp);
        assert_eq!(v[0], q(2));
    }

    #[test]
    fn two_edge_path_lp() {
        // Hand-enumerated: min l s.t. d1 + d2 >= 1, d1 <= l, d2 <= l.
        // Optimal vertex: d1 = d2 = 1/2, l = 1/2.
        let lp = LinearProgram {
            num_vars: 3, // l, d1, d2
            objective: vec![(0, q(1))],
            rows: vec![
                Row { coeffs: vec![(1, q(1)), (2, q(1))], sense: Sense::Ge, rhs: q(1) },
                Row { coeffs: vec![(1, q(1)), (0, q(-1))], sense: Sense::Le, rhs: q(0) },
                Row { coeffs: vec![(2, q(1)), (0, q(-1))], sense: Sense::Le, rhs: q(0) },
            ],
        };
        let (v, obj) = solve(&lp);
        assert_eq!(obj, qr(1, 2));
        assert_eq!(v[0], qr(1, 2));
    }

    #[test]
    fn infeasible_detected() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![(0, q(1))],
            rows: vec![
                Row { coeffs: vec![(0, q(1))], sense: Sense::Le, rhs: q(1) },
                Row { coeffs: vec![(0, q(1))], sense: Sense::Ge, rhs: q(2) },
            ],
        };
        assert_eq!(simplex_solve(&lp), SimplexOutcome::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![(0, q(-1))],
            rows: vec![Row { coeffs: vec![(0, q(1))], sense: Sense::Ge, rhs: q(1) }],
        };
        assert_eq!(simplex_solve(&lp), SimplexOutcome::Unbounded);
    }

    #[test]
    fn equality_row() {
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![(0, q(1)), (1, q(2))],
            rows: vec![Row {
                coeffs: vec![(0, q(1)), (1, q(1))],
                sense: Sense::Eq,
                rhs: q(4),
            }],
        };
        let (v, obj) = solve(&lp);
        assert_eq!(v, vec![q(4), q(0)]);
        assert_eq!(obj, q(4));
    }

    #[test]
    fn negative_rhs_le_row() {
        // x >= 2 written as -x <= -2
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![(0, q(1))],
            rows: vec![Row { coeffs: vec![(0, q(-1))], sense: Sense::Le, rhs: q(-2) }],
        };
        let (v, _) = solve(&lp);
        assert_eq!(v[0], q(2));
    }
}
