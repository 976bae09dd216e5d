//! The multiway cut packing LP relaxation.
//!
//! Variables are a per-commodity length `d_a(e)` for every edge plus the
//! relative-load objective `lambda`. Inter-terminal separation constraints
//! (every path between two terminals of a commodity has length >= 1) are
//! generated lazily from shortest-path violations; capacity rows
//! `sum_a d_a(e) <= lambda * c_e` are always present. Everything is exact.

pub mod simplex;

pub use simplex::{
    simplex_solve, simplex_solve_state, LinearProgram, Row, Sense, SimplexOutcome, SimplexState,
};

use crate::instance::{Graph, Instance};
use crate::ratio::{q, Q};
use num::{One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

/// The LP output: optimal `lambda` and per-commodity edge lengths in [0,1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSolution {
    pub lambda: Q,
    /// `lengths[a][e]` is d_a(e).
    pub lengths: Vec<Vec<Q>>,
}

/// A violated separation constraint: the edges of one too-short path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathConstraint {
    pub commodity: usize,
    pub edges: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("constraint generation did not converge within {0} rounds")]
    IterationCap(usize),
    #[error("LP reported {0}; the cut-packing relaxation is always feasible and bounded")]
    BadOutcome(&'static str),
}

/// Single-source shortest-path distances and parent edges under nonnegative
/// rational edge lengths. `None` marks unreachable vertices.
pub fn shortest_paths(
    graph: &Graph,
    lengths: &[Q],
    source: usize,
) -> (Vec<Option<Q>>, Vec<Option<usize>>) {
    let n = graph.num_vertices();
    let mut dist: Vec<Option<Q>> = vec![None; n];
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    dist[source] = Some(Q::zero());
    loop {
        // O(n^2) selection is plenty at this scale.
        let mut next: Option<usize> = None;
        for v in 0..n {
            if !done[v] && dist[v].is_some() {
                let better = match next {
                    None => true,
                    Some(u) => dist[v].as_ref().unwrap() < dist[u].as_ref().unwrap(),
                };
                if better {
                    next = Some(v);
                }
            }
        }
        let Some(u) = next else { break };
        done[u] = true;
        for (ei, e) in graph.edges().iter().enumerate() {
            let other = if e.u == u {
                e.v
            } else if e.v == u {
                e.u
            } else {
                continue;
            };
            let cand = dist[u].as_ref().unwrap() + &lengths[ei];
            if dist[other].as_ref().map_or(true, |d| cand < *d) {
                dist[other] = Some(cand);
                parent_edge[other] = Some(ei);
            }
        }
    }
    (dist, parent_edge)
}

fn walk_back(graph: &Graph, parent_edge: &[Option<usize>], source: usize, mut v: usize) -> Vec<usize> {
    let mut edges = Vec::new();
    while v != source {
        let ei = parent_edge[v].expect("walk_back called on reachable vertex");
        let e = &graph.edges()[ei];
        v = if e.u == v { e.v } else { e.u };
        edges.push(ei);
    }
    edges.reverse();
    edges
}

/// All terminal-pair paths of length `< 1 - tol` under the given lengths.
pub fn separation_oracle(
    solution: &MetricSolution,
    instance: &Instance,
    tol: &Q,
) -> Vec<PathConstraint> {
    let graph = instance.graph();
    let threshold = Q::one() - tol;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (a, terms) in instance.commodities().iter().enumerate() {
        for (pi, &ri) in terms.iter().enumerate() {
            let (dist, parent) = shortest_paths(graph, &solution.lengths[a], ri);
            for &rj in terms.iter().skip(pi + 1) {
                if let Some(d) = &dist[rj] {
                    if *d < threshold {
                        let edges = walk_back(graph, &parent, ri, rj);
                        let mut key = edges.clone();
                        key.sort_unstable();
                        if seen.insert((a, key)) {
                            out.push(PathConstraint { commodity: a, edges });
                        }
                    }
                }
            }
        }
    }
    out
}

fn var_d(a: usize, e: usize, num_edges: usize) -> usize {
    1 + a * num_edges + e
}

fn build_lp(instance: &Instance, paths: &[PathConstraint]) -> LinearProgram {
    let graph = instance.graph();
    let m = graph.num_edges();
    let k = instance.num_commodities();
    let mut rows = Vec::new();
    for (e, edge) in graph.edges().iter().enumerate() {
        let mut coeffs: Vec<(usize, Q)> = (0..k).map(|a| (var_d(a, e, m), q(1))).collect();
        coeffs.push((0, q(-edge.capacity)));
        rows.push(Row { coeffs, sense: Sense::Le, rhs: Q::zero() });
    }
    for p in paths {
        let coeffs = p
            .edges
            .iter()
            .map(|&e| (var_d(p.commodity, e, m), q(1)))
            .collect();
        rows.push(Row { coeffs, sense: Sense::Ge, rhs: Q::one() });
    }
    LinearProgram { num_vars: 1 + k * m, objective: vec![(0, q(1))], rows }
}

fn extract(instance: &Instance, values: &[Q]) -> MetricSolution {
    let m = instance.graph().num_edges();
    let lengths = (0..instance.num_commodities())
        .map(|a| (0..m).map(|e| values[var_d(a, e, m)].clone()).collect())
        .collect();
    MetricSolution { lambda: values[0].clone(), lengths }
}

/// Cap every length at one. A path through a clamped edge keeps length at
/// least one from that edge alone, so every separation constraint survives,
/// and capacity usage only drops. Applied once, after convergence.
fn clamp(mut solution: MetricSolution) -> MetricSolution {
    let one = Q::one();
    for lengths in solution.lengths.iter_mut() {
        for v in lengths.iter_mut() {
            if *v > one {
                *v = one.clone();
            }
        }
    }
    solution
}

/// Solve the relaxation by lazy path generation. `tol` is zero in normal
/// exact-rational operation.
pub fn solve_mcp_lp(instance: &Instance, tol: &Q) -> Result<MetricSolution, LpError> {
    const MAX_ROUNDS: usize = 500;
    let graph = instance.graph();

    // Seed with a min-hop path per terminal pair so the first LP is already
    // meaningful.
    let hop_lengths = vec![Q::one(); graph.num_edges()];
    let mut paths: Vec<PathConstraint> = Vec::new();
    let mut seen = BTreeSet::new();
    for (a, terms) in instance.commodities().iter().enumerate() {
        for (pi, &ri) in terms.iter().enumerate() {
            let (dist, parent) = shortest_paths(graph, &hop_lengths, ri);
            for &rj in terms.iter().skip(pi + 1) {
                if dist[rj].is_some() {
                    let edges = walk_back(graph, &parent, ri, rj);
                    let mut key = edges.clone();
                    key.sort_unstable();
                    if seen.insert((a, key)) {
                        paths.push(PathConstraint { commodity: a, edges });
                    }
                }
            }
        }
    }

    let m = graph.num_edges();
    let lp = build_lp(instance, &paths);
    let mut state = match simplex_solve_state(&lp) {
        Ok(state) => state,
        Err(SimplexOutcome::Infeasible) => return Err(LpError::BadOutcome("infeasible")),
        _ => return Err(LpError::BadOutcome("unbounded")),
    };

    // Each round appends the violated path rows to the solved tableau and
    // repairs feasibility with dual simplex instead of re-solving.
    for _ in 0..MAX_ROUNDS {
        let solution = extract(instance, &state.values());
        let violated = separation_oracle(&solution, instance, tol);
        if violated.is_empty() {
            return Ok(clamp(solution));
        }
        for p in violated {
            let mut key = p.edges.clone();
            key.sort_unstable();
            if seen.insert((p.commodity, key)) {
                let coeffs: Vec<(usize, Q)> =
                    p.edges.iter().map(|&e| (var_d(p.commodity, e, m), q(1))).collect();
                state.add_ge_row(&coeffs, Q::one());
            } else {
                // A repeated path means the last solve failed to satisfy an
                // existing row; that would be a simplex bug.
                return Err(LpError::BadOutcome("repeated violated path"));
            }
        }
        if !state.reoptimize() {
            return Err(LpError::BadOutcome("infeasible"));
        }
    }
    Err(LpError::IterationCap(MAX_ROUNDS))
}

/// Distances from one terminal under its commodity metric; used by the
/// laminarization algorithms.
pub fn commodity_distances(
    instance: &Instance,
    metric: &MetricSolution,
    commodity: usize,
    source: usize,
) -> Vec<Option<Q>> {
    shortest_paths(instance.graph(), &metric.lengths[commodity], source).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Graph;
    use crate::ratio::qr;

    fn path_instance() -> Instance {
        // s - x - t, one commodity {s, t}, unit capacities
        let g = Graph::new(3, vec![(0, 1, 1), (1, 2, 1)]).unwrap();
        Instance::new(g, vec![vec![0, 2]], None).unwrap()
    }

    #[test]
    fn path_splits_evenly() {
        let sol = solve_mcp_lp(&path_instance(), &Q::zero()).unwrap();
        assert_eq!(sol.lambda, qr(1, 2));
        assert_eq!(sol.lengths[0], vec![qr(1, 2), qr(1, 2)]);
    }

    #[test]
    fn single_edge() {
        let g = Graph::new(2, vec![(0, 1, 1)]).unwrap();
        let inst = Instance::new(g, vec![vec![0, 1]], None).unwrap();
        let sol = solve_mcp_lp(&inst, &Q::zero()).unwrap();
        assert_eq!(sol.lambda, q(1));
        assert_eq!(sol.lengths[0], vec![q(1)]);
    }

    #[test]
    fn oracle_finds_short_paths() {
        let inst = path_instance();
        let zero = MetricSolution {
            lambda: Q::zero(),
            lengths: vec![vec![Q::zero(), Q::zero()]],
        };
        let v = separation_oracle(&zero, &inst, &Q::zero());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].edges, vec![0, 1]);

        let partial = MetricSolution {
            lambda: Q::zero(),
            lengths: vec![vec![qr(3, 10), qr(3, 10)]],
        };
        let v = separation_oracle(&partial, &inst, &Q::zero());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].edges, vec![0, 1]);

        let feasible = MetricSolution {
            lambda: qr(1, 2),
            lengths: vec![vec![qr(1, 2), qr(1, 2)]],
        };
        assert!(separation_oracle(&feasible, &inst, &Q::zero()).is_empty());
    }

    #[test]
    fn oracle_adjacent_pair_zero_lengths() {
        let g = Graph::new(2, vec![(0, 1, 1)]).unwrap();
        let inst = Instance::new(g, vec![vec![0, 1]], None).unwrap();
        let zero = MetricSolution { lambda: Q::zero(), lengths: vec![vec![Q::zero()]] };
        let v = separation_oracle(&zero, &inst, &Q::zero());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].edges, vec![0]);
    }

    #[test]
    fn capacity_scaling_inverts_lambda() {
        let g1 = Graph::new(3, vec![(0, 1, 1), (1, 2, 1)]).unwrap();
        let g3 = Graph::new(3, vec![(0, 1, 3), (1, 2, 3)]).unwrap();
        let i1 = Instance::new(g1, vec![vec![0, 2]], None).unwrap();
        let i3 = Instance::new(g3, vec![vec![0, 2]], None).unwrap();
        let s1 = solve_mcp_lp(&i1, &Q::zero()).unwrap();
        let s3 = solve_mcp_lp(&i3, &Q::zero()).unwrap();
        assert_eq!(s3.lambda, s1.lambda / q(3));
    }

    #[test]
    fn lambda_at_most_k() {
        // two commodities sharing one edge
        let g = Graph::new(2, vec![(0, 1, 1)]).unwrap();
        let inst = Instance::new(g, vec![vec![0, 1], vec![0, 1]], None).unwrap();
        let sol = solve_mcp_lp(&inst, &Q::zero()).unwrap();
        assert_eq!(sol.lambda, q(2));
        assert!(sol.lambda <= q(2));
    }

    #[test]
    fn metric_invariants_hold() {
        let inst = path_instance();
        let sol = solve_mcp_lp(&inst, &Q::zero()).unwrap();
        // warm check: no violated paths at tol 0
        assert!(separation_oracle(&sol, &inst, &Q::zero()).is_empty());
        // capacity rows hold exactly
        for (e, edge) in inst.graph().edges().iter().enumerate() {
            let total: Q = sol.lengths.iter().map(|l| l[e].clone()).sum();
            assert!(total <= &sol.lambda * q(edge.capacity));
        }
    }
}
