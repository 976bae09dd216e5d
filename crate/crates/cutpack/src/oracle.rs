//! Exact brute-force reference solver for small instances.
//!
//! The oracle optimizes over partition-form solutions: each commodity is a
//! coloring of the vertices by its terminals (non-terminal vertices pick a
//! side), and an edge's load counts the commodities whose coloring cuts it.
//! This matches the solutions the pipeline emits, and is within a factor of
//! two of the unrestricted edge-subset formulation.

use crate::instance::{IntegralCutFamily, Instance};
use crate::ratio::{qr, Q};
use crate::set::VertexSet;
use num::Zero;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("search budget exhausted after {explored} nodes")]
    BudgetExceeded { explored: u64 },
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
}

/// Exact optimum together with a feasible witness.
#[derive(Clone, Debug)]
pub struct OracleResult {
    /// min over partition-form solutions of max_e load_e / c_e
    pub optimal_max_relative_load: Q,
    /// per-terminal cuts: each terminal's side of its commodity's coloring
    pub witness: IntegralCutFamily,
    /// per-edge load of the witness, counting each commodity once
    pub loads: Vec<i64>,
}

/// One commodity's coloring, reduced to the data the search needs.
#[derive(Clone)]
struct Coloring {
    /// bitmask over edges cut by this coloring
    mask: u128,
    /// side index (into the commodity's member list) per vertex
    sides: Vec<u8>,
}

struct Search {
    /// deduplicated colorings per commodity, cheapest first
    candidates: Vec<Vec<Coloring>>,
    /// commodity indices, most constrained first
    order: Vec<usize>,
    budget: u64,
    explored: u64,
}

impl Search {
    fn charge(&mut self, amount: u64) -> Result<(), OracleError> {
        self.explored += amount;
        if self.explored > self.budget {
            Err(OracleError::BudgetExceeded { explored: self.explored })
        } else {
            Ok(())
        }
    }

    /// Depth-first search for a joint choice of colorings within the given
    /// per-edge budgets.
    fn feasible(
        &mut self,
        budgets: &mut Vec<i64>,
        depth: usize,
        chosen: &mut Vec<usize>,
    ) -> Result<bool, OracleError> {
        if depth == self.order.len() {
            return Ok(true);
        }
        let a = self.order[depth];
        for ci in 0..self.candidates[a].len() {
            self.charge(1)?;
            let mask = self.candidates[a][ci].mask;
            let mut fits = true;
            let mut bits = mask;
            while bits != 0 {
                let e = bits.trailing_zeros() as usize;
                if budgets[e] == 0 {
                    fits = false;
                    break;
                }
                bits &= bits - 1;
            }
            if !fits {
                continue;
            }
            let mut bits = mask;
            while bits != 0 {
                let e = bits.trailing_zeros() as usize;
                budgets[e] -= 1;
                bits &= bits - 1;
            }
            chosen.push(ci);
            if self.feasible(budgets, depth + 1, chosen)? {
                return Ok(true);
            }
            chosen.pop();
            let mut bits = mask;
            while bits != 0 {
                let e = bits.trailing_zeros() as usize;
                budgets[e] += 1;
                bits &= bits - 1;
            }
        }
        Ok(false)
    }
}

fn enumerate_colorings(
    instance: &Instance,
    commodity: usize,
    budget_left: u64,
) -> Result<Vec<Coloring>, OracleError> {
    let graph = instance.graph();
    let n = graph.num_vertices();
    let members = &instance.commodities()[commodity];
    let s = members.len();
    let mut pinned: Vec<Option<u8>> = vec![None; n];
    for (side, &v) in members.iter().enumerate() {
        pinned[v] = Some(side as u8);
    }
    let free: Vec<usize> = (0..n).filter(|&v| pinned[v].is_none()).collect();
    let total = (s as u64).checked_pow(free.len() as u32);
    if total.map_or(true, |t| t > budget_left) {
        return Err(OracleError::BudgetExceeded { explored: budget_left });
    }

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut counter = vec![0u8; free.len()];
    loop {
        let mut sides: Vec<u8> = (0..n).map(|v| pinned[v].unwrap_or(0)).collect();
        for (fi, &v) in free.iter().enumerate() {
            sides[v] = counter[fi];
        }
        let mut mask = 0u128;
        for (e, edge) in graph.edges().iter().enumerate() {
            if sides[edge.u] != sides[edge.v] {
                mask |= 1u128 << e;
            }
        }
        if seen.insert(mask) {
            out.push(Coloring { mask, sides });
        }
        // mixed-radix increment
        let mut fi = 0;
        loop {
            if fi == counter.len() {
                out.sort_by_key(|c| (c.mask.count_ones(), c.mask));
                return Ok(out);
            }
            counter[fi] += 1;
            if counter[fi] < s as u8 {
                break;
            }
            counter[fi] = 0;
            fi += 1;
        }
    }
}

/// Exhaustively compute the best achievable max relative load.
pub fn brute_force_opt(instance: &Instance, budget: u64) -> Result<OracleResult, OracleError> {
    let graph = instance.graph();
    let m = graph.num_edges();
    if m > 128 {
        return Err(OracleError::TooLarge(format!("{m} edges, oracle masks hold 128")));
    }
    let k = instance.num_commodities();

    let mut candidates = Vec::with_capacity(k);
    let mut enumerated = 0u64;
    for a in 0..k {
        let cand = enumerate_colorings(instance, a, budget.saturating_sub(enumerated))?;
        enumerated += cand.len() as u64;
        candidates.push(cand);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&a| (candidates[a].len(), a));
    let mut search = Search { candidates, order, budget, explored: enumerated };

    // candidate thresholds: every possible max relative load is m/c_e
    let thresholds: Vec<Q> = {
        let mut set = BTreeSet::new();
        for edge in graph.edges() {
            for load in 0..=k as i64 {
                set.insert(qr(load, edge.capacity));
            }
        }
        set.into_iter().collect()
    };

    let run = |search: &mut Search, threshold: &Q| -> Result<Option<Vec<usize>>, OracleError> {
        // integral loads: load_e <= floor(threshold * c_e)
        let mut budgets: Vec<i64> = graph
            .edges()
            .iter()
            .map(|e| (threshold * crate::ratio::q(e.capacity)).floor().to_integer())
            .map(|b| i64::try_from(b).expect("small budget"))
            .collect();
        let mut chosen = Vec::new();
        Ok(search
            .feasible(&mut budgets, 0, &mut chosen)?
            .then(|| {
                // chosen is indexed by search depth; rearrange per commodity
                let mut per_commodity = vec![0; search.order.len()];
                for (depth, &a) in search.order.iter().enumerate() {
                    per_commodity[a] = chosen[depth];
                }
                per_commodity
            }))
    };

    // binary search over thresholds; the largest is always feasible
    let mut lo = 0usize;
    let mut hi = thresholds.len() - 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if run(&mut search, &thresholds[mid])?.is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let opt = thresholds[lo].clone();
    let chosen = run(&mut search, &opt)?
        .expect("threshold certified feasible during the binary search");

    let mut loads = vec![0i64; m];
    for a in 0..k {
        let mask = search.candidates[a][chosen[a]].mask;
        let mut bits = mask;
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            loads[e] += 1;
            bits &= bits - 1;
        }
    }
    let achieved = loads
        .iter()
        .zip(graph.edges())
        .map(|(&l, e)| qr(l, e.capacity))
        .max()
        .unwrap_or_else(Q::zero);
    assert_eq!(achieved, opt, "witness must attain the certified optimum");

    let n = graph.num_vertices();
    let assignment = instance
        .terminals()
        .iter()
        .map(|t| {
            let members = &instance.commodities()[t.commodity];
            let side = members.iter().position(|&v| v == t.vertex).unwrap() as u8;
            let sides = &search.candidates[t.commodity][chosen[t.commodity]].sides;
            VertexSet::from_iter(n, (0..n).filter(|&v| sides[v] == side))
        })
        .collect();
    Ok(OracleResult {
        optimal_max_relative_load: opt,
        witness: IntegralCutFamily { assignment },
        loads,
    })
}

/// Per-edge comparison of an integral solution's loads against the
/// theorem's bound for the given working capacities.
#[derive(Clone, Debug)]
pub struct GuaranteeReport {
    /// (edge, load, bound) for every breach
    pub violations: Vec<(usize, i64, i64)>,
    /// max over edges of load - bound
    pub max_slack: i64,
    pub bound_name: &'static str,
}

pub fn check_guarantee(
    family: &IntegralCutFamily,
    instance: &Instance,
    working_capacities: &[i64],
    mode: crate::instance::Mode,
) -> GuaranteeReport {
    let graph = instance.graph();
    let loads = crate::instance::integral_load(family.assignment.iter(), graph);
    let (bound_name, bound): (_, Box<dyn Fn(i64) -> i64>) = match mode {
        crate::instance::Mode::Mcp => ("8c+4", Box::new(|c| 8 * c + 4)),
        crate::instance::Mode::Cscp => ("c+2", Box::new(|c| c + 2)),
    };
    let mut violations = Vec::new();
    let mut max_slack = i64::MIN;
    for e in 0..graph.num_edges() {
        let b = bound(working_capacities[e]);
        max_slack = max_slack.max(loads[e] - b);
        if loads[e] > b {
            violations.push((e, loads[e], b));
        }
    }
    GuaranteeReport { violations, max_slack, bound_name }
}
