//! Deterministic rounding of fractional laminar cut families.
//!
//! `round1` handles the common-sink case: terminals are assigned their
//! root's meta-node in order of decreasing depth, paying with the innermost
//! unit of fractional weight and reassigning freed cuts; every edge ends up
//! loaded at most `c_e + 1`. `round2` extends this to general multiway cut
//! packing with the cut-inclusion ordering and a defaulting mechanism for
//! overloaded edges, ending at `c_e + 3`.
//!
//! Both rounders check their load invariants after every iteration and
//! fail loudly instead of producing an over-loaded answer.

use crate::instance::{boundary, Graph, Instance};
use crate::laminar::{inclusion_invariant_preprocess, FractionalLaminarFamily, LaminarError};
use crate::ratio::Q;
use crate::set::VertexSet;
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error("input family is not feasible: edge {edge} carries fractional load {load} > {capacity}")]
    InfeasibleInput { edge: usize, load: String, capacity: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Laminar(#[from] LaminarError),
}

fn internal(msg: impl Into<String>) -> RoundingError {
    RoundingError::Internal(msg.into())
}

/// A weighted cut under rounding; dead cuts keep index stability by carrying
/// weight zero until the end of the iteration.
#[derive(Clone, Debug)]
struct Cut {
    set: VertexSet,
    weight: Q,
    owner: usize,
}

/// The evolving fractional family.
struct Frac {
    cuts: Vec<Cut>,
    /// tie-break position per terminal in the frozen cut-inclusion order;
    /// identity unless the caller installs one
    rank: Vec<usize>,
}

impl Frac {
    fn new(family: &FractionalLaminarFamily) -> Self {
        Frac {
            cuts: family
                .cuts
                .iter()
                .map(|c| Cut { set: c.cut.clone(), weight: c.weight.clone(), owner: c.owner })
                .collect(),
            rank: (0..family.num_terminals).collect(),
        }
    }

    fn loads(&self, graph: &Graph) -> Vec<Q> {
        let mut loads = vec![Q::zero(); graph.num_edges()];
        for c in &self.cuts {
            if c.weight.is_positive() {
                for e in boundary(&c.set, graph) {
                    loads[e] += &c.weight;
                }
            }
        }
        loads
    }

    fn depth(&self, v: usize) -> Q {
        self.cuts
            .iter()
            .filter(|c| c.weight.is_positive() && c.set.contains(v))
            .map(|c| c.weight.clone())
            .sum()
    }

    /// Live cut indices matching `pred`, innermost first. Equal sets are
    /// ordered by the owners' frozen cut-inclusion rank so that a dominant
    /// terminal's cuts count as inner.
    fn chain<F: Fn(&Cut) -> bool>(&self, pred: F) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.cuts.len())
            .filter(|&i| self.cuts[i].weight.is_positive() && pred(&self.cuts[i]))
            .collect();
        idx.sort_by_key(|&i| {
            (self.cuts[i].set.len(), self.cuts[i].set.clone(), self.rank[self.cuts[i].owner])
        });
        idx
    }

    /// The innermost cuts matching `pred` with total weight exactly
    /// `target`, splitting the boundary cut if it straddles the threshold.
    /// Returned indices are whole cuts, innermost first.
    fn take_innermost<F: Fn(&Cut) -> bool>(
        &mut self,
        pred: F,
        target: &Q,
    ) -> Result<Vec<usize>, RoundingError> {
        let chain = self.chain(pred);
        let mut taken = Vec::new();
        let mut acc = Q::zero();
        for i in chain {
            if &acc == target {
                break;
            }
            let remaining = target - &acc;
            if self.cuts[i].weight <= remaining {
                acc += &self.cuts[i].weight;
                taken.push(i);
            } else {
                // split: a new cut carries exactly the missing weight
                self.cuts[i].weight -= &remaining;
                self.cuts.push(Cut {
                    set: self.cuts[i].set.clone(),
                    weight: remaining,
                    owner: self.cuts[i].owner,
                });
                acc = target.clone();
                taken.push(self.cuts.len() - 1);
            }
        }
        if &acc != target {
            return Err(internal(format!(
                "innermost selection found weight {acc} of the requested {target}"
            )));
        }
        Ok(taken)
    }

    fn kill(&mut self, i: usize) {
        self.cuts[i].weight = Q::zero();
    }

    /// Drop dead cuts and merge duplicates with the same set and owner.
    fn consolidate(&mut self) {
        let mut merged: BTreeMap<(VertexSet, usize), Q> = BTreeMap::new();
        for c in &self.cuts {
            if c.weight.is_positive() {
                *merged.entry((c.set.clone(), c.owner)).or_insert_with(Q::zero) += &c.weight;
            }
        }
        self.cuts = merged
            .into_iter()
            .map(|((set, owner), weight)| Cut { set, weight, owner })
            .collect();
    }

    /// Outermost live cut of a terminal, if any.
    fn outermost(&self, owner: usize) -> Option<&VertexSet> {
        self.cuts
            .iter()
            .filter(|c| c.owner == owner && c.weight.is_positive())
            .max_by_key(|c| (c.set.len(), c.set.clone()))
            .map(|c| &c.set)
    }
}

/// Union-find over vertices with per-iteration snapshots, so the rounder
/// can ask for the meta-node of a vertex at any past time and for the
/// iteration at which two vertices merged.
pub struct MetaNodeHistory {
    n: usize,
    parent: Vec<usize>,
    snaps: Vec<Vec<usize>>,
}

impl MetaNodeHistory {
    pub fn new(n: usize) -> Self {
        let parent: Vec<usize> = (0..n).collect();
        MetaNodeHistory { n, parent: parent.clone(), snaps: vec![parent] }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    pub fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            self.parent[hi] = lo;
        }
    }

    /// Record the current partition; snapshot 0 is the all-singleton state.
    pub fn snapshot(&mut self) {
        let snap: Vec<usize> = (0..self.n).map(|v| self.find(v)).collect();
        self.snaps.push(snap);
    }

    pub fn num_snapshots(&self) -> usize {
        self.snaps.len()
    }

    pub fn current_meta(&mut self, v: usize) -> VertexSet {
        let root = self.find(v);
        let members: Vec<usize> = (0..self.n).filter(|&u| self.find(u) == root).collect();
        VertexSet::from_iter(self.n, members)
    }

    /// The meta-node of `v` as of snapshot `t`.
    pub fn meta_at(&self, t: usize, v: usize) -> VertexSet {
        let snap = &self.snaps[t];
        VertexSet::from_iter(self.n, (0..self.n).filter(|&u| snap[u] == snap[v]))
    }

    /// First snapshot index at which `u` and `v` share a meta-node.
    pub fn join_time(&self, u: usize, v: usize) -> Option<usize> {
        (0..self.snaps.len()).find(|&t| self.snaps[t][u] == self.snaps[t][v])
    }
}

fn check_input(
    frac: &Frac,
    graph: &Graph,
    capacities: &[i64],
) -> Result<(), RoundingError> {
    for (edge, load) in frac.loads(graph).iter().enumerate() {
        if load > &Q::from_integer(capacities[edge].into()) {
            return Err(RoundingError::InfeasibleInput {
                edge,
                load: crate::ratio::fmt_q(load),
                capacity: capacities[edge].to_string(),
            });
        }
    }
    Ok(())
}

/// Contract every zero-fractional-load edge; returns the edges contracted.
fn contract_dead_edges(
    frac: &Frac,
    graph: &Graph,
    history: &mut MetaNodeHistory,
) -> Vec<usize> {
    let loads = frac.loads(graph);
    let mut contracted = Vec::new();
    for (e, edge) in graph.edges().iter().enumerate() {
        if loads[e].is_zero() {
            history.union(edge.u, edge.v);
            contracted.push(e);
        }
    }
    contracted
}

/// Round a feasible fractional laminar family for the common-sink problem
/// into integral cuts with load at most `c_e + 1` per edge.
pub fn round1(
    instance: &Instance,
    family: &FractionalLaminarFamily,
) -> Result<Vec<VertexSet>, RoundingError> {
    assert!(instance.is_cscp(), "round1 needs a common-sink instance");
    let graph = instance.graph();
    let capacities = graph.capacities();
    let sink = instance.sink().unwrap();
    let roots: Vec<usize> = instance.terminals().iter().map(|t| t.vertex).collect();
    let t_count = roots.len();

    let mut frac = Frac::new(family);
    check_input(&frac, graph, &capacities)?;
    let mut history = MetaNodeHistory::new(graph.num_vertices());
    contract_dead_edges(&frac, graph, &mut history);
    let mut remaining: BTreeSet<usize> = (0..t_count).collect();
    let mut assignment: Vec<Option<VertexSet>> = vec![None; t_count];
    let mut int_loads = vec![0i64; graph.num_edges()];

    while !remaining.is_empty() {
        // deepest terminal, smallest id on ties
        let i = remaining
            .iter()
            .copied()
            .max_by(|&a, &b| frac.depth(roots[a]).cmp(&frac.depth(roots[b])).then(b.cmp(&a)))
            .unwrap();
        let a_i = history.current_meta(roots[i]);
        if a_i.contains(sink) {
            return Err(internal(format!("meta-node of terminal {i} reached the sink")));
        }
        for e in boundary(&a_i, graph) {
            int_loads[e] += 1;
        }
        assignment[i] = Some(a_i);
        remaining.remove(&i);

        // pay with the innermost unit of weight above r_i, reassigning the
        // freed cuts of i to the owners displaced from that unit
        let k = frac.take_innermost(|c| c.set.contains(roots[i]), &Q::one())?;
        let mut pending: Vec<usize> = Vec::new();
        for idx in k {
            if frac.cuts[idx].owner == i {
                frac.kill(idx);
            } else {
                pending.push(idx);
            }
        }
        for idx in pending {
            let j = frac.cuts[idx].owner;
            if !remaining.contains(&j) {
                return Err(internal(format!(
                    "cut of already-assigned terminal {j} still in the family"
                )));
            }
            let w = frac.cuts[idx].weight.clone();
            frac.kill(idx);
            let slice = frac.take_innermost(|c| c.owner == i, &w)?;
            for s in slice {
                frac.cuts[s].owner = j;
            }
        }
        if frac.cuts.iter().any(|c| c.owner == i && c.weight.is_positive()) {
            return Err(internal(format!("terminal {i} retains cuts after assignment")));
        }
        frac.consolidate();
        contract_dead_edges(&frac, graph, &mut history);
        history.snapshot();

        // per-iteration load invariants
        let loads = frac.loads(graph);
        for e in 0..graph.num_edges() {
            let (la, lc, c) = (int_loads[e], &loads[e], capacities[e]);
            let ok = if la <= c - 1 {
                Q::from_integer(la.into()) + lc <= Q::from_integer(c.into())
            } else if la == c {
                lc <= &Q::one()
            } else if la == c + 1 {
                lc.is_zero()
            } else {
                false
            };
            if !ok {
                return Err(internal(format!(
                    "edge {e}: integral load {la}, fractional load {lc}, capacity {c}"
                )));
            }
        }
    }
    Ok(assignment.into_iter().map(Option::unwrap).collect())
}

/// Round a feasible fractional laminar family for the MCP into integral
/// cuts with load at most `c_e + 3` per edge.
pub fn round2(
    instance: &Instance,
    family: &FractionalLaminarFamily,
) -> Result<Vec<VertexSet>, RoundingError> {
    let graph = instance.graph();
    let capacities = graph.capacities();
    let roots: Vec<usize> = instance.terminals().iter().map(|t| t.vertex).collect();
    let t_count = roots.len();

    let family = inclusion_invariant_preprocess(family.clone(), &roots)?;
    let mut frac = Frac::new(&family);
    check_input(&frac, graph, &capacities)?;

    // Freeze the cut-inclusion order right after preprocessing: a strict
    // subset among outermost cuts dominates, remaining ties break by id.
    // Cuts only shrink from here on, so the inclusion invariant keeps
    // holding with respect to this order even as current outermost cuts
    // drift; re-deriving the order mid-run would lose that.
    let rank: Vec<usize> = {
        let mut order: Vec<usize> = (0..t_count).collect();
        let outer: Vec<&VertexSet> = (0..t_count)
            .map(|t| {
                frac.outermost(t)
                    .ok_or_else(|| internal(format!("terminal {t} owns no cuts")))
            })
            .collect::<Result<_, _>>()?;
        order.sort_by_key(|&t| (outer[t].len(), outer[t].clone(), t));
        let mut rank = vec![0; t_count];
        for (pos, &t) in order.iter().enumerate() {
            rank[t] = pos;
        }
        rank
    };
    frac.rank = rank.clone();
    let mut history = MetaNodeHistory::new(graph.num_vertices());
    let mut remaining: BTreeSet<usize> = (0..t_count).collect();
    let mut assignment: Vec<Option<VertexSet>> = vec![None; t_count];
    let mut int_loads = vec![0i64; graph.num_edges()];
    let mut defaulted_y: BTreeSet<usize> = BTreeSet::new();
    // integral load of each dead edge when it was contracted
    let mut z_entry: BTreeMap<usize, i64> = BTreeMap::new();
    for e in contract_dead_edges(&frac, graph, &mut history) {
        z_entry.insert(e, 0);
    }

    while !remaining.is_empty() {
        // deepest terminals, then one undominated in cut-inclusion order
        let depths: BTreeMap<usize, Q> =
            remaining.iter().map(|&t| (t, frac.depth(roots[t]))).collect();
        let max_depth = depths.values().max().unwrap().clone();
        // most dominant in the frozen cut-inclusion order, hence undominated
        let i = remaining
            .iter()
            .copied()
            .filter(|t| depths[t] == max_depth)
            .min_by_key(|&t| rank[t])
            .ok_or_else(|| internal("no candidate terminal at maximum depth"))?;

        let meta = history.current_meta(roots[i]);
        let e_i: Vec<usize> = boundary(&meta, graph)
            .into_iter()
            .filter(|e| defaulted_y.contains(e))
            .collect();
        let a_i = if e_i.is_empty() {
            meta.clone()
        } else {
            // default: retreat to the meta-node of r_i from before the
            // first offending endpoint joined it
            let u_set: Vec<usize> = e_i
                .iter()
                .flat_map(|&e| {
                    let edge = &graph.edges()[e];
                    [edge.u, edge.v]
                })
                .filter(|&v| meta.contains(v))
                .collect();
            if u_set.contains(&roots[i]) {
                return Err(internal(format!(
                    "terminal {i} defaults on an edge at its own vertex"
                )));
            }
            let u_i = u_set
                .iter()
                .copied()
                .min_by_key(|&u| (history.join_time(u, roots[i]), u))
                .unwrap();
            let t_join = history
                .join_time(u_i, roots[i])
                .ok_or_else(|| internal("defaulting endpoint never joined the meta-node"))?;
            if t_join == 0 {
                return Err(internal("defaulting endpoint present from the start"));
            }
            history.meta_at(t_join - 1, roots[i])
        };
        match frac.outermost(i) {
            Some(o) if a_i.is_subset(o) && a_i.contains(roots[i]) => {}
            _ => {
                return Err(internal(format!(
                    "assigned cut of terminal {i} is not between its root and outermost cut"
                )))
            }
        }
        for e in boundary(&a_i, graph) {
            int_loads[e] += 1;
            if let Some(&entry) = z_entry.get(&e) {
                if int_loads[e] > entry + 1 {
                    return Err(internal(format!("dead edge {e} loaded more than once")));
                }
            }
        }
        assignment[i] = Some(a_i);
        remaining.remove(&i);

        // pay with the innermost unit above r_i: drop i's cuts entirely and
        // carve the meta-node out of the other cuts in that unit
        let k = frac.take_innermost(|c| c.set.contains(roots[i]), &Q::one())?;
        for idx in 0..frac.cuts.len() {
            if frac.cuts[idx].owner == i {
                frac.kill(idx);
            }
        }
        for idx in k {
            let c = &frac.cuts[idx];
            if c.owner == i || c.weight.is_zero() {
                continue;
            }
            if !meta.is_subset(&c.set) {
                return Err(internal(format!(
                    "cut in the innermost unit does not contain the meta-node of {i}"
                )));
            }
            if meta.contains(roots[c.owner]) {
                return Err(internal(format!(
                    "terminal {} shares the meta-node of the assigned terminal {i}",
                    c.owner
                )));
            }
            let shrunk = frac.cuts[idx].set.difference(&meta);
            frac.cuts[idx].set = shrunk;
        }
        frac.consolidate();

        // classify edges: overloaded ones stop being loadable, dead ones
        // are contracted
        let loads = frac.loads(graph);
        for e in 0..graph.num_edges() {
            if int_loads[e] == capacities[e] + 2 && loads[e].is_positive() {
                defaulted_y.insert(e);
            }
        }
        for e in contract_dead_edges(&frac, graph, &mut history) {
            z_entry.entry(e).or_insert(int_loads[e]);
            defaulted_y.remove(&e);
        }
        history.snapshot();

        for e in 0..graph.num_edges() {
            let (la, lc, c) = (int_loads[e], &loads[e], capacities[e]);
            let ok = if lc.is_zero() {
                la <= c + 3
            } else if la <= c - 1 {
                Q::from_integer(la.into()) + lc <= Q::from_integer(c.into())
            } else {
                la <= c + 2 && lc <= &Q::one()
            };
            if !ok {
                return Err(internal(format!(
                    "edge {e}: integral load {la}, fractional load {lc}, capacity {c}"
                )));
            }
        }
    }
    Ok(assignment.into_iter().map(Option::unwrap).collect())
}
