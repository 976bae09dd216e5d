//! From LP metrics to feasible fractional laminar cut families.
//!
//! `lam1` handles the common-sink case by uncrossing ball cuts directly;
//! `lam2` handles general multiway cut packing by quantizing ball cuts of
//! radius 1/2, expanding them into an integral cut family, laminarizing
//! that with `integer_lam2`, and keeping each terminal's innermost half.

pub mod integer_lam2;

pub use integer_lam2::{integer_lam2, IntegerCutInput};

use crate::instance::{fractional_load, Instance, WeightedCut};
use crate::lp::{commodity_distances, MetricSolution};
use crate::ratio::{q, qr, Q};
use crate::set::VertexSet;
use num::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LaminarError {
    #[error("iteration cap exceeded in {0} (rule-selection bug)")]
    IterationCap(&'static str),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Weighted laminar cuts with unit total weight per terminal.
#[derive(Clone, Debug)]
pub struct FractionalLaminarFamily {
    pub cuts: Vec<WeightedCut>,
    pub num_terminals: usize,
}

impl FractionalLaminarFamily {
    /// Assert Definition-1 invariants: laminarity, unit weight per terminal,
    /// owner's vertex inside every owned cut.
    pub fn validate(&self, instance: &Instance) -> Result<(), LaminarError> {
        let terminals = instance.terminals();
        assert_eq!(self.num_terminals, terminals.len());
        for (i, a) in self.cuts.iter().enumerate() {
            if !a.weight.is_positive() {
                return Err(LaminarError::Internal(format!("cut {i} has weight {}", a.weight)));
            }
            if !a.cut.contains(terminals[a.owner].vertex) {
                return Err(LaminarError::Internal(format!(
                    "cut {i} misses its root {}",
                    terminals[a.owner].vertex
                )));
            }
            if !a.cut.is_proper() {
                return Err(LaminarError::Internal(format!("cut {i} is not proper")));
            }
        }
        for i in 0..self.cuts.len() {
            for j in i + 1..self.cuts.len() {
                if self.cuts[i].cut.crosses(&self.cuts[j].cut) {
                    return Err(LaminarError::Internal(format!("cuts {i} and {j} cross")));
                }
            }
        }
        for t in 0..self.num_terminals {
            let total: Q = self
                .cuts
                .iter()
                .filter(|c| c.owner == t)
                .map(|c| c.weight.clone())
                .sum();
            if total != Q::one() {
                return Err(LaminarError::Internal(format!(
                    "terminal {t} has total weight {total}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-terminal distance-ball prefix cuts.
///
/// For terminal `i` of commodity `a`, vertices are sorted by shortest-path
/// distance from `r_i` under `d_a`; each prefix strictly inside
/// `radius_cap` becomes a cut weighted by its (scaled) distance gap, so each
/// terminal's cuts total exactly one. Unreachable vertices count as beyond
/// the cap.
pub fn ball_cuts(
    instance: &Instance,
    metric: &MetricSolution,
    radius_cap: &Q,
) -> Result<Vec<WeightedCut>, LaminarError> {
    let n = instance.graph().num_vertices();
    let mut out = Vec::new();
    for (id, term) in instance.terminals().iter().enumerate() {
        let dist = commodity_distances(instance, metric, term.commodity, term.vertex);
        let mut order: Vec<usize> = (0..n).filter(|&v| dist[v].is_some()).collect();
        // the root leads its distance class: other vertices can tie it at
        // distance zero, and every prefix must contain the root
        order.sort_by_key(|&x| (dist[x].clone(), x != term.vertex, x));
        debug_assert_eq!(order[0], term.vertex);

        let mut prefix = VertexSet::empty(n);
        let mut total = Q::zero();
        for (b, &v) in order.iter().enumerate() {
            let dv = dist[v].as_ref().unwrap();
            if dv >= radius_cap {
                break;
            }
            prefix.insert(v);
            let next = order
                .get(b + 1)
                .and_then(|&u| dist[u].clone())
                .map_or_else(|| radius_cap.clone(), |d| d.min(radius_cap.clone()));
            let weight = (next - dv) / radius_cap;
            if weight.is_positive() {
                if !prefix.is_proper() {
                    return Err(LaminarError::Internal(format!(
                        "ball of terminal {id} swallowed the whole graph; metric infeasible"
                    )));
                }
                total += &weight;
                out.push(WeightedCut { cut: prefix.clone(), weight, owner: id });
            }
        }
        if total != Q::one() {
            return Err(LaminarError::Internal(format!(
                "terminal {id} ball weights sum to {total}, not 1"
            )));
        }
    }
    Ok(out)
}

/// Round weights up to multiples of `1/d_squared` and truncate outermost
/// excess so each terminal totals exactly one.
///
/// Conceptually every cut then splits into weight-`1/d_squared` copies; the
/// returned cuts keep merged weights (exact multiples of the grid) with the
/// same meaning.
pub fn quantize(cuts: &[WeightedCut], d_squared: i64) -> Result<Vec<WeightedCut>, LaminarError> {
    let grid = qr(1, d_squared);
    let num_terminals = cuts.iter().map(|c| c.owner + 1).max().unwrap_or(0);
    let mut out = Vec::new();
    for t in 0..num_terminals {
        let mut mine: Vec<&WeightedCut> = cuts.iter().filter(|c| c.owner == t).collect();
        // innermost first; nested ball cuts have strictly increasing size
        mine.sort_by_key(|c| (c.cut.len(), c.cut.clone()));
        let mut acc = Q::zero();
        for c in mine {
            if acc == Q::one() {
                break;
            }
            let mut w = (&c.weight / &grid).ceil() * &grid;
            if &acc + &w > Q::one() {
                w = Q::one() - &acc;
            }
            if w.is_positive() {
                acc += &w;
                out.push(WeightedCut { cut: c.cut.clone(), weight: w, owner: t });
            }
        }
        if acc != Q::one() {
            return Err(LaminarError::Internal(format!(
                "terminal {t}: quantized weight {acc}, rounded-up total cannot fall short of 1"
            )));
        }
    }
    Ok(out)
}

fn push_merged(cuts: &mut Vec<WeightedCut>, add: WeightedCut) {
    if add.weight.is_zero() {
        return;
    }
    if let Some(existing) = cuts
        .iter_mut()
        .find(|c| c.owner == add.owner && c.cut == add.cut)
    {
        existing.weight += add.weight;
    } else {
        cuts.push(add);
    }
}

/// Resolve every crossing pair of a common-sink family.
///
/// The replacement of a crossing pair's equal-weight portions is chosen by
/// where the two owners' roots lie; every rule keeps each root inside its
/// owner's cut, keeps the sink outside, and never increases any edge load.
pub fn uncross_cscp(
    mut cuts: Vec<WeightedCut>,
    roots: &[usize],
    sink: usize,
) -> Result<Vec<WeightedCut>, LaminarError> {
    let unit_count: Q = cuts.iter().map(|c| c.weight.clone()).sum();
    let cap = 1_000_000usize.max(unit_count.to_integer().to_string().len() * 1000);
    for _ in 0..cap {
        let mut found = None;
        'scan: for i in 0..cuts.len() {
            for j in i + 1..cuts.len() {
                if cuts[i].cut.crosses(&cuts[j].cut) {
                    found = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((i, j)) = found else {
            debug_assert!(cuts.iter().all(|c| !c.cut.contains(sink)));
            return Ok(cuts);
        };
        let w = cuts[i].weight.clone().min(cuts[j].weight.clone());
        let (ci, cj) = (cuts[i].cut.clone(), cuts[j].cut.clone());
        let (oi, oj) = (cuts[i].owner, cuts[j].owner);
        let (ri, rj) = (roots[oi], roots[oj]);
        let ri_in_j = cj.contains(ri);
        let rj_in_i = ci.contains(rj);
        let inter = ci.intersect(&cj);
        let union = ci.union(&cj);
        let (new_i, new_j) = match (ri_in_j, rj_in_i) {
            // both roots in the intersection: either assignment works
            (true, true) => (inter, union),
            (false, false) => (ci.difference(&cj), cj.difference(&ci)),
            (true, false) => (inter, union),
            (false, true) => (union, inter),
        };
        cuts[i].weight -= &w;
        cuts[j].weight -= &w;
        cuts.retain(|c| c.weight.is_positive());
        push_merged(&mut cuts, WeightedCut { cut: new_i, weight: w.clone(), owner: oi });
        push_merged(&mut cuts, WeightedCut { cut: new_j, weight: w, owner: oj });
    }
    Err(LaminarError::IterationCap("uncross_cscp"))
}

/// Lam-1: LP metric to a feasible fractional laminar family for the CSCP.
///
/// The result is feasible against capacities `lambda*c_e + 1/N` with
/// `N = n*k`.
pub fn lam1(
    instance: &Instance,
    metric: &MetricSolution,
) -> Result<FractionalLaminarFamily, LaminarError> {
    assert!(instance.is_cscp(), "lam1 needs a common-sink instance");
    let sink = instance.sink().unwrap();
    let n = instance.graph().num_vertices() as i64;
    let k = instance.num_commodities() as i64;
    let big_n = n * k;
    let roots: Vec<usize> = instance.terminals().iter().map(|t| t.vertex).collect();

    let raw = ball_cuts(instance, metric, &q(1))?;
    let quantized = quantize(&raw, big_n * big_n)?;
    let load_before = fractional_load(&quantized, instance.graph());
    let cuts = uncross_cscp(quantized, &roots, sink)?;
    let load_after = fractional_load(&cuts, instance.graph());
    for (e, (after, before)) in load_after.iter().zip(&load_before).enumerate() {
        if after > before {
            return Err(LaminarError::Internal(format!(
                "uncrossing increased load on edge {e}: {before} -> {after}"
            )));
        }
    }
    let family = FractionalLaminarFamily { cuts, num_terminals: roots.len() };
    family.validate(instance)?;
    Ok(family)
}

/// The `1/N` slack term of Lam-1's capacity guarantee, as used by the
/// pipeline: the family is feasible against `lambda*c_e + lam1_slack`.
pub fn lam1_slack(instance: &Instance) -> Q {
    let n = instance.graph().num_vertices() as i64;
    let k = instance.num_commodities() as i64;
    qr(1, n * k)
}

/// Lam-2: LP metric to a feasible fractional laminar family for the MCP,
/// feasible against capacities `4*(2*lambda*c_e + 1/D)`.
///
/// `D` must be even; the paper's choice is `n * sum_a |S_a|`, overridable to
/// keep the `D^2`-fold commodity expansion tractable.
pub fn lam2(
    instance: &Instance,
    metric: &MetricSolution,
    grid_param: i64,
) -> Result<FractionalLaminarFamily, LaminarError> {
    assert!(grid_param > 0 && grid_param % 2 == 0, "grid parameter D must be positive and even");
    let d2 = grid_param * grid_param;
    let terminals = instance.terminals();

    let raw = ball_cuts(instance, metric, &qr(1, 2))?;
    let quantized = quantize(&raw, d2)?;

    // Expand: D^2 copies of every commodity; copy c of terminal i receives
    // the c-th innermost unit of i's quantized cuts.
    let grid = qr(1, d2);
    let mut per_terminal: Vec<Vec<VertexSet>> = vec![Vec::new(); terminals.len()];
    for t in 0..terminals.len() {
        let mut mine: Vec<&WeightedCut> = quantized.iter().filter(|c| c.owner == t).collect();
        mine.sort_by_key(|c| (c.cut.len(), c.cut.clone()));
        for c in mine {
            let copies = (&c.weight / &grid).to_integer();
            let copies = u64::try_from(copies).expect("grid multiple");
            for _ in 0..copies {
                per_terminal[t].push(c.cut.clone());
            }
        }
        if per_terminal[t].len() != d2 as usize {
            return Err(LaminarError::Internal(format!(
                "terminal {t}: {} unit cuts, expected {d2}",
                per_terminal[t].len()
            )));
        }
    }
    let mut input = IntegerCutInput { cuts: Vec::new(), roots: Vec::new(), commodities: Vec::new() };
    let mut expanded_of: Vec<Vec<usize>> = vec![Vec::new(); terminals.len()];
    for copy in 0..d2 as usize {
        for (t, term) in terminals.iter().enumerate() {
            expanded_of[t].push(input.cuts.len());
            input.cuts.push(per_terminal[t][copy].clone());
            input.roots.push(term.vertex);
            input.commodities.push(term.commodity * d2 as usize + copy);
        }
    }

    let load_in = crate::instance::integral_load(input.cuts.iter(), instance.graph());
    let output = integer_lam2(instance.graph(), &input)?;
    let load_out = crate::instance::integral_load(output.iter(), instance.graph());
    for (e, (o, i)) in load_out.iter().zip(&load_in).enumerate() {
        if *o > 2 * i {
            return Err(LaminarError::Internal(format!(
                "integer_lam2 more than doubled load on edge {e}: {i} -> {o}"
            )));
        }
    }

    // Keep each original terminal's D^2/2 innermost cuts at weight 2/D^2.
    let keep = (d2 / 2) as usize;
    let weight = qr(2, d2);
    let mut cuts = Vec::new();
    for (t, ids) in expanded_of.iter().enumerate() {
        let mut mine: Vec<&VertexSet> = ids.iter().map(|&x| &output[x]).collect();
        mine.sort_by_key(|c| (c.len(), (*c).clone()));
        for c in mine.into_iter().take(keep) {
            push_merged(
                &mut cuts,
                WeightedCut { cut: c.clone(), weight: weight.clone(), owner: t },
            );
        }
    }
    let family = FractionalLaminarFamily { cuts, num_terminals: terminals.len() };
    family.validate(instance)?;
    Ok(family)
}

/// The slack term of Lam-2's guarantee: the family is feasible against
/// `4*(2*lambda*c_e + 1/D)` = `8*lambda*c_e + lam2_slack`.
pub fn lam2_slack(grid_param: i64) -> Q {
    qr(4, grid_param)
}

/// Paper default for Lam-2's blowup parameter, rounded up to even.
pub fn default_grid_param(instance: &Instance) -> i64 {
    let n = instance.graph().num_vertices() as i64;
    let total: i64 = instance.commodities().iter().map(|s| s.len() as i64).sum();
    let d = n * total;
    if d % 2 == 0 {
        d
    } else {
        d + 1
    }
}

/// Enforce the inclusion invariant: whenever terminal `i` dominates `j` in
/// the cut-inclusion order and cuts of both contain both roots, `i`'s cut is
/// the inner one. Ownership of equal-weight portions is swapped pairwise
/// until no violation remains.
pub fn inclusion_invariant_preprocess(
    family: FractionalLaminarFamily,
    roots: &[usize],
) -> Result<FractionalLaminarFamily, LaminarError> {
    let mut cuts = family.cuts;
    let num_terminals = family.num_terminals;
    let cap = 100_000 + cuts.len() * cuts.len() * 64;

    let outermost = |cuts: &[WeightedCut], t: usize| -> Option<VertexSet> {
        cuts.iter()
            .filter(|c| c.owner == t)
            .max_by_key(|c| (c.cut.len(), c.cut.clone()))
            .map(|c| c.cut.clone())
    };
    // i dominates j: strictly smaller outermost cut, ties by terminal id.
    let dominates = |oi: &VertexSet, oj: &VertexSet, i: usize, j: usize| -> bool {
        oi.is_strict_subset(oj) || (oi == oj && i < j)
    };

    for _ in 0..cap {
        let outer: Vec<Option<VertexSet>> =
            (0..num_terminals).map(|t| outermost(&cuts, t)).collect();
        let mut violation = None;
        'scan: for i in 0..num_terminals {
            for j in 0..num_terminals {
                if i == j {
                    continue;
                }
                let (Some(oi), Some(oj)) = (&outer[i], &outer[j]) else { continue };
                if !dominates(oi, oj, i, j) {
                    continue;
                }
                for a in 0..cuts.len() {
                    if cuts[a].owner != i {
                        continue;
                    }
                    for b in 0..cuts.len() {
                        if cuts[b].owner != j {
                            continue;
                        }
                        let (ca, cb) = (&cuts[a].cut, &cuts[b].cut);
                        if ca.contains(roots[i])
                            && ca.contains(roots[j])
                            && cb.contains(roots[i])
                            && cb.contains(roots[j])
                            && !ca.is_subset(cb)
                        {
                            violation = Some((a, b));
                            break 'scan;
                        }
                    }
                }
            }
        }
        let Some((a, b)) = violation else {
            return Ok(FractionalLaminarFamily { cuts, num_terminals });
        };
        // Laminarity forces cuts[b].cut strictly inside cuts[a].cut here;
        // swap ownership of equal-weight portions so the dominant terminal
        // gets the inner cut.
        debug_assert!(cuts[b].cut.is_strict_subset(&cuts[a].cut));
        let w = cuts[a].weight.clone().min(cuts[b].weight.clone());
        let inner = cuts[b].cut.clone();
        let outer_set = cuts[a].cut.clone();
        let (oi, oj) = (cuts[a].owner, cuts[b].owner);
        cuts[a].weight -= &w;
        cuts[b].weight -= &w;
        cuts.retain(|c| c.weight.is_positive());
        push_merged(&mut cuts, WeightedCut { cut: inner, weight: w.clone(), owner: oi });
        push_merged(&mut cuts, WeightedCut { cut: outer_set, weight: w, owner: oj });
    }
    Err(LaminarError::IterationCap("inclusion_invariant_preprocess"))
}
