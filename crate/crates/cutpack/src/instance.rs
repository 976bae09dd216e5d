//! Core data model: graphs, commodities, cuts, load accounting and the
//! feasibility verifiers.
//!
//! A "cut" here is a proper subset of the vertices; its boundary is the set
//! of edges with exactly one endpoint inside. Loads count, per edge, the
//! cuts (weighted for fractional families) whose boundary contains the
//! edge.

use crate::ratio::{q, Q};
use crate::set::VertexSet;
use num::{Signed, Zero};
use thiserror::Error;

/// Undirected graph with positive integral edge capacities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub capacity: i64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("edge {index}: endpoint {vertex} out of range (n = {n})")]
    VertexOutOfRange { index: usize, vertex: usize, n: usize },
    #[error("edge {index}: self loop at vertex {vertex}")]
    SelfLoop { index: usize, vertex: usize },
    #[error("edge {index}: capacity {capacity} must be >= 1")]
    BadCapacity { index: usize, capacity: i64 },
    #[error("edges {first} and {second} duplicate the pair ({u},{v})")]
    DuplicateEdge { first: usize, second: usize, u: usize, v: usize },
    #[error("commodity {commodity} has {count} terminals, need >= 2")]
    TooFewTerminals { commodity: usize, count: usize },
    #[error("commodity {commodity}: terminal vertex {vertex} out of range")]
    TerminalOutOfRange { commodity: usize, vertex: usize },
    #[error("commodity {commodity}: repeated terminal vertex {vertex}")]
    RepeatedTerminal { commodity: usize, vertex: usize },
    #[error("sink vertex {sink} out of range")]
    SinkOutOfRange { sink: usize },
    #[error("commodity {commodity} must be a (source, sink) pair in CSCP mode")]
    NotSinkPair { commodity: usize },
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize, i64)>) -> Result<Self, InstanceError> {
        let mut seen: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
        let mut out = Vec::with_capacity(edges.len());
        for (index, (u, v, capacity)) in edges.into_iter().enumerate() {
            for vertex in [u, v] {
                if vertex >= num_vertices {
                    return Err(InstanceError::VertexOutOfRange { index, vertex, n: num_vertices });
                }
            }
            if u == v {
                return Err(InstanceError::SelfLoop { index, vertex: u });
            }
            if capacity < 1 {
                return Err(InstanceError::BadCapacity { index, capacity });
            }
            let key = (u.min(v), u.max(v));
            if let Some(&first) = seen.get(&key) {
                return Err(InstanceError::DuplicateEdge { first, second: index, u: key.0, v: key.1 });
            }
            seen.insert(key, index);
            out.push(Edge { u, v, capacity });
        }
        Ok(Graph { num_vertices, edges: out })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn capacities(&self) -> Vec<i64> {
        self.edges.iter().map(|e| e.capacity).collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return true;
        }
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                    if a == u && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// A terminal: a member of one commodity, residing at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Terminal {
    pub commodity: usize,
    pub vertex: usize,
}

/// A full problem instance: graph, commodities, optional common sink.
#[derive(Clone, Debug)]
pub struct Instance {
    graph: Graph,
    commodities: Vec<Vec<usize>>,
    sink: Option<usize>,
    terminals: Vec<Terminal>,
}

impl Instance {
    pub fn new(
        graph: Graph,
        commodities: Vec<Vec<usize>>,
        sink: Option<usize>,
    ) -> Result<Self, InstanceError> {
        if let Some(s) = sink {
            if s >= graph.num_vertices() {
                return Err(InstanceError::SinkOutOfRange { sink: s });
            }
        }
        for (commodity, terms) in commodities.iter().enumerate() {
            if terms.len() < 2 {
                return Err(InstanceError::TooFewTerminals { commodity, count: terms.len() });
            }
            let mut seen = std::collections::BTreeSet::new();
            for &vertex in terms {
                if vertex >= graph.num_vertices() {
                    return Err(InstanceError::TerminalOutOfRange { commodity, vertex });
                }
                if !seen.insert(vertex) {
                    return Err(InstanceError::RepeatedTerminal { commodity, vertex });
                }
            }
            if let Some(s) = sink {
                if terms.len() != 2 || !terms.contains(&s) {
                    return Err(InstanceError::NotSinkPair { commodity });
                }
            }
        }
        // Terminal ids are assigned in commodity order. In CSCP mode the
        // sink itself is not a terminal (Definition of the working set T).
        let mut terminals = Vec::new();
        for (commodity, terms) in commodities.iter().enumerate() {
            for &vertex in terms {
                if Some(vertex) != sink {
                    terminals.push(Terminal { commodity, vertex });
                }
            }
        }
        Ok(Instance { graph, commodities, sink, terminals })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn commodities(&self) -> &[Vec<usize>] {
        &self.commodities
    }

    pub fn num_commodities(&self) -> usize {
        self.commodities.len()
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub fn is_cscp(&self) -> bool {
        self.sink.is_some()
    }

    /// The working terminal set: all terminals, minus the sink in CSCP mode.
    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    /// Terminal ids of `terminal.commodity`'s other members (including, for
    /// MCP, terminals at the sink-free vertices; for CSCP the sink has no id).
    pub fn same_commodity(&self, id: usize) -> Vec<usize> {
        let c = self.terminals[id].commodity;
        (0..self.terminals.len())
            .filter(|&j| j != id && self.terminals[j].commodity == c)
            .collect()
    }
}

/// A cut owned by a terminal, with a positive rational weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedCut {
    pub cut: VertexSet,
    pub weight: Q,
    pub owner: usize,
}

/// One integral cut per terminal; the final answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralCutFamily {
    pub assignment: Vec<VertexSet>,
}

/// Edge indices of `delta(cut)`: edges with exactly one endpoint inside.
pub fn boundary(cut: &VertexSet, graph: &Graph) -> Vec<usize> {
    graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| cut.contains(e.u) != cut.contains(e.v))
        .map(|(i, _)| i)
        .collect()
}

/// True iff the two cuts cross: intersection and both differences nonempty.
pub fn crosses(c1: &VertexSet, c2: &VertexSet) -> bool {
    c1.crosses(c2)
}

/// True iff no pair of cuts in the family crosses.
pub fn is_laminar<'a, I: IntoIterator<Item = &'a VertexSet>>(family: I) -> bool {
    let cuts: Vec<&VertexSet> = family.into_iter().collect();
    for i in 0..cuts.len() {
        for j in i + 1..cuts.len() {
            if cuts[i].crosses(cuts[j]) {
                return false;
            }
        }
    }
    true
}

/// Per-edge total weight of cuts whose boundary contains the edge.
pub fn fractional_load(cuts: &[WeightedCut], graph: &Graph) -> Vec<Q> {
    let mut load = vec![Q::zero(); graph.num_edges()];
    for wc in cuts {
        for (i, e) in graph.edges().iter().enumerate() {
            if wc.cut.contains(e.u) != wc.cut.contains(e.v) {
                load[i] += &wc.weight;
            }
        }
    }
    load
}

/// Per-edge count of integral cuts whose boundary contains the edge.
pub fn integral_load<'a, I: IntoIterator<Item = &'a VertexSet>>(cuts: I, graph: &Graph) -> Vec<i64> {
    let mut load = vec![0i64; graph.num_edges()];
    for cut in cuts {
        for (i, e) in graph.edges().iter().enumerate() {
            if cut.contains(e.u) != cut.contains(e.v) {
                load[i] += 1;
            }
        }
    }
    load
}

/// Problem mode: general multiway cut packing or common-sink s-t packing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Mcp,
    Cscp,
}

/// First failed feasibility clause, with a witness.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("family is not laminar: cuts {first} and {second} cross")]
    NotLaminar { first: usize, second: usize },
    #[error("cut {index} is not a proper vertex subset")]
    ImproperCut { index: usize },
    #[error("cut {index} has non-positive weight")]
    BadWeight { index: usize },
    #[error("terminal {terminal}: total cut weight is {total}, want exactly 1")]
    WeightNotUnit { terminal: usize, total: String },
    #[error("cut {index} does not contain its owner's vertex {vertex}")]
    RootMissing { index: usize, vertex: usize },
    #[error("terminal {terminal} has no cuts")]
    TerminalUncovered { terminal: usize },
    #[error("terminals {i} and {j} (same commodity): each root lies in the other's cut union")]
    SeparationMcp { i: usize, j: usize },
    #[error("cut {index} contains the sink")]
    SinkContained { index: usize },
    #[error("edge {edge} overloaded: load {load} > capacity {capacity}")]
    LoadExceeded { edge: usize, load: String, capacity: String },
    #[error("terminal {terminal}: assigned cut does not contain its vertex {vertex}")]
    IntegralRootMissing { terminal: usize, vertex: usize },
    #[error("terminals {i} and {j} (same commodity): neither assigned cut separates them")]
    NotSeparated { i: usize, j: usize },
}

/// Check Definition 1 (fractional laminar family) plus feasibility for the
/// given mode against per-edge rational capacities.
pub fn verify_fractional_feasible(
    cuts: &[WeightedCut],
    instance: &Instance,
    capacities: &[Q],
    mode: Mode,
) -> Result<(), Violation> {
    let graph = instance.graph();
    let terminals = instance.terminals();

    for (index, wc) in cuts.iter().enumerate() {
        if !wc.cut.is_proper() {
            return Err(Violation::ImproperCut { index });
        }
        if !wc.weight.is_positive() {
            return Err(Violation::BadWeight { index });
        }
        let root = terminals[wc.owner].vertex;
        if !wc.cut.contains(root) {
            return Err(Violation::RootMissing { index, vertex: root });
        }
    }
    for first in 0..cuts.len() {
        for second in first + 1..cuts.len() {
            if cuts[first].cut.crosses(&cuts[second].cut) {
                return Err(Violation::NotLaminar { first, second });
            }
        }
    }
    for (terminal, _) in terminals.iter().enumerate() {
        let total: Q = cuts
            .iter()
            .filter(|wc| wc.owner == terminal)
            .map(|wc| wc.weight.clone())
            .sum();
        if total.is_zero() {
            return Err(Violation::TerminalUncovered { terminal });
        }
        if total != q(1) {
            return Err(Violation::WeightNotUnit {
                terminal,
                total: crate::ratio::fmt_q(&total),
            });
        }
    }

    match mode {
        Mode::Cscp => {
            let sink = instance.sink().expect("CSCP verification needs a sink");
            for (index, wc) in cuts.iter().enumerate() {
                if wc.cut.contains(sink) {
                    return Err(Violation::SinkContained { index });
                }
            }
        }
        Mode::Mcp => {
            // Clause (2): one-sided exclusion per same-commodity pair.
            for i in 0..terminals.len() {
                for j in instance.same_commodity(i) {
                    if j <= i {
                        continue;
                    }
                    let ri = terminals[i].vertex;
                    let rj = terminals[j].vertex;
                    let j_in_i = cuts.iter().any(|wc| wc.owner == i && wc.cut.contains(rj));
                    let i_in_j = cuts.iter().any(|wc| wc.owner == j && wc.cut.contains(ri));
                    if j_in_i && i_in_j {
                        return Err(Violation::SeparationMcp { i, j });
                    }
                }
            }
        }
    }

    let load = fractional_load(cuts, graph);
    for (edge, l) in load.iter().enumerate() {
        if l > &capacities[edge] {
            return Err(Violation::LoadExceeded {
                edge,
                load: crate::ratio::fmt_q(l),
                capacity: crate::ratio::fmt_q(&capacities[edge]),
            });
        }
    }
    Ok(())
}

/// Summary of a verified integral solution.
#[derive(Clone, Debug)]
pub struct IntegralReport {
    pub max_load: i64,
    /// max over edges of load / capacity
    pub max_relative_load: Q,
    pub loads: Vec<i64>,
}

/// Check per-terminal separation: for each same-commodity pair, at least one
/// of the two assigned cuts contains exactly one of the two roots.
pub fn verify_integral_solution(
    family: &IntegralCutFamily,
    instance: &Instance,
) -> Result<IntegralReport, Violation> {
    let terminals = instance.terminals();
    assert_eq!(family.assignment.len(), terminals.len(), "one cut per terminal");
    for (terminal, cut) in family.assignment.iter().enumerate() {
        let vertex = terminals[terminal].vertex;
        if !cut.contains(vertex) {
            return Err(Violation::IntegralRootMissing { terminal, vertex });
        }
        if !cut.is_proper() {
            return Err(Violation::ImproperCut { index: terminal });
        }
    }
    for i in 0..terminals.len() {
        for j in instance.same_commodity(i) {
            if j <= i {
                continue;
            }
            let ri = terminals[i].vertex;
            let rj = terminals[j].vertex;
            let sep =
                |c: &VertexSet| c.contains(ri) != c.contains(rj);
            if !sep(&family.assignment[i]) && !sep(&family.assignment[j]) {
                return Err(Violation::NotSeparated { i, j });
            }
            // CSCP additionally demands the sink stays outside.
            if let Some(sink) = instance.sink() {
                for t in [i, j] {
                    if family.assignment[t].contains(sink) {
                        return Err(Violation::SinkContained { index: t });
                    }
                }
            }
        }
    }
    let loads = integral_load(family.assignment.iter(), instance.graph());
    let max_load = loads.iter().copied().max().unwrap_or(0);
    let max_relative_load = loads
        .iter()
        .zip(instance.graph().edges())
        .map(|(&l, e)| crate::ratio::qr(l, e.capacity))
        .max()
        .unwrap_or_else(Q::zero);
    Ok(IntegralReport { max_load, max_relative_load, loads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::qr;

    fn triangle() -> Graph {
        Graph::new(3, vec![(0, 1, 1), (0, 2, 1), (1, 2, 1)]).unwrap()
    }

    #[test]
    fn graph_validation() {
        assert!(matches!(
            Graph::new(2, vec![(0, 0, 1)]),
            Err(InstanceError::SelfLoop { .. })
        ));
        assert!(matches!(
            Graph::new(2, vec![(0, 1, 0)]),
            Err(InstanceError::BadCapacity { .. })
        ));
        assert!(matches!(
            Graph::new(2, vec![(0, 1, 1), (1, 0, 2)]),
            Err(InstanceError::DuplicateEdge { .. })
        ));
        assert!(matches!(
            Graph::new(2, vec![(0, 3, 1)]),
            Err(InstanceError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn boundary_triangle() {
        let g = triangle();
        let c = VertexSet::singleton(3, 0);
        assert_eq!(boundary(&c, &g), vec![0, 1]);
    }

    #[test]
    fn boundary_path_prefix() {
        let g = Graph::new(3, vec![(0, 1, 1), (1, 2, 1)]).unwrap();
        let c = VertexSet::from_iter(3, [0, 1]);
        assert_eq!(boundary(&c, &g), vec![1]);
    }

    #[test]
    fn boundary_symmetry() {
        let g = triangle();
        for cut in [
            VertexSet::singleton(3, 1),
            VertexSet::from_iter(3, [0, 2]),
        ] {
            let comp = VertexSet::full(3).difference(&cut);
            assert_eq!(boundary(&cut, &g), boundary(&comp, &g));
        }
    }

    #[test]
    fn crossing_cases() {
        let ab = VertexSet::from_iter(3, [0, 1]);
        let bc = VertexSet::from_iter(3, [1, 2]);
        let a = VertexSet::singleton(3, 0);
        let b = VertexSet::singleton(3, 1);
        assert!(crosses(&ab, &bc));
        assert!(!crosses(&a, &ab));
        assert!(!crosses(&a, &b));
    }

    #[test]
    fn laminar_check() {
        let a = VertexSet::singleton(3, 0);
        let ab = VertexSet::from_iter(3, [0, 1]);
        let c = VertexSet::singleton(3, 2);
        let bc = VertexSet::from_iter(3, [1, 2]);
        assert!(is_laminar([&a, &ab, &c]));
        assert!(!is_laminar([&ab, &bc]));
        assert!(is_laminar(std::iter::empty::<&VertexSet>()));
    }

    /// Star with center = sink 2, leaves 0 and 1, one commodity per leaf.
    fn star_cscp() -> Instance {
        let g = Graph::new(3, vec![(0, 2, 1), (1, 2, 1)]).unwrap();
        Instance::new(g, vec![vec![0, 2], vec![1, 2]], Some(2)).unwrap()
    }

    #[test]
    fn star_family_feasible() {
        let inst = star_cscp();
        let cuts = vec![
            WeightedCut { cut: VertexSet::singleton(3, 0), weight: q(1), owner: 0 },
            WeightedCut { cut: VertexSet::singleton(3, 1), weight: q(1), owner: 1 },
        ];
        let caps: Vec<Q> = inst.graph().capacities().iter().map(|&c| q(c)).collect();
        assert_eq!(verify_fractional_feasible(&cuts, &inst, &caps, Mode::Cscp), Ok(()));
        let load = fractional_load(&cuts, inst.graph());
        assert_eq!(load, vec![q(1), q(1)]);
    }

    #[test]
    fn sink_containment_rejected() {
        let inst = star_cscp();
        let cuts = vec![
            WeightedCut { cut: VertexSet::from_iter(3, [0, 2]), weight: q(1), owner: 0 },
            WeightedCut { cut: VertexSet::singleton(3, 1), weight: q(1), owner: 1 },
        ];
        let caps: Vec<Q> = inst.graph().capacities().iter().map(|&c| q(c)).collect();
        assert!(matches!(
            verify_fractional_feasible(&cuts, &inst, &caps, Mode::Cscp),
            Err(Violation::SinkContained { .. })
        ));
    }

    #[test]
    fn nested_loads_on_path() {
        let g = Graph::new(3, vec![(0, 1, 1), (1, 2, 1)]).unwrap();
        let cuts = vec![
            WeightedCut { cut: VertexSet::singleton(3, 0), weight: qr(1, 2), owner: 0 },
            WeightedCut { cut: VertexSet::from_iter(3, [0, 1]), weight: qr(1, 2), owner: 0 },
        ];
        assert_eq!(fractional_load(&cuts, &g), vec![qr(1, 2), qr(1, 2)]);
    }

    #[test]
    fn integral_star_ok() {
        let inst = star_cscp();
        let fam = IntegralCutFamily {
            assignment: vec![VertexSet::singleton(3, 0), VertexSet::singleton(3, 1)],
        };
        let rep = verify_integral_solution(&fam, &inst).unwrap();
        assert_eq!(rep.max_load, 1);
        assert_eq!(rep.max_relative_load, q(1));
    }

    #[test]
    fn integral_identical_cuts_rejected() {
        let g = Graph::new(3, vec![(0, 1, 1), (1, 2, 1)]).unwrap();
        let inst = Instance::new(g, vec![vec![0, 2]], None).unwrap();
        let both = VertexSet::from_iter(3, [0, 2]);
        let fam = IntegralCutFamily { assignment: vec![both.clone(), both] };
        assert!(matches!(
            verify_integral_solution(&fam, &inst),
            Err(Violation::NotSeparated { .. })
        ));
    }

    #[test]
    fn submodular_uncrossing_load() {
        // load of {C1 cap C2, C1 cup C2} <= load of {C1, C2} edge-wise
        let g = triangle();
        let c1 = VertexSet::from_iter(3, [0, 1]);
        let c2 = VertexSet::from_iter(3, [1, 2]);
        let before = fractional_load(
            &[
                WeightedCut { cut: c1.clone(), weight: q(1), owner: 0 },
                WeightedCut { cut: c2.clone(), weight: q(1), owner: 0 },
            ],
            &g,
        );
        let after = fractional_load(
            &[
                WeightedCut { cut: c1.intersect(&c2), weight: q(1), owner: 0 },
                WeightedCut { cut: c1.union(&c2), weight: q(1), owner: 0 },
            ],
            &g,
        );
        for (a, b) in after.iter().zip(&before) {
            assert!(a <= b);
        }
    }
}
