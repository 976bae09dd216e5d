//! Instance and fixture generators, all deterministic in their seed.

use crate::instance::{Graph, Instance, InstanceError, Mode, WeightedCut};
use crate::laminar::{integer_lam2::IntegerCutInput, FractionalLaminarFamily};
use crate::ratio::{q, qr, Q};
use crate::set::VertexSet;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// The hard family from the integrality-gap construction: a clique with a
/// pendant chain. `n` must be even and at least 4. The instance is CSCP with
/// one commodity per clique vertex, all sharing the chain's far endpoint as
/// the sink. Its LP optimum is at most 1, yet every integral packing loads
/// some edge at least twice.
pub fn clique_chain(n: usize) -> Instance {
    assert!(n >= 4 && n % 2 == 0, "clique_chain needs an even n >= 4");
    let chain_len = n / 2; // vertices v_1 .. v_{n/2 + 1}, t = last
    let mut edges = Vec::new();
    // clique on 0..n
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v, 1));
        }
    }
    // v_1 is vertex n, star-connected to every clique vertex
    for u in 0..n {
        edges.push((u, n, 1));
    }
    // the chain v_1 - v_2 - ... - v_{n/2+1}
    for i in 0..chain_len {
        edges.push((n + i, n + i + 1, 1));
    }
    let sink = n + chain_len;
    let graph = Graph::new(sink + 1, edges).expect("construction is simple and connected");
    let commodities = (0..n).map(|u| vec![u, sink]).collect();
    Instance::new(graph, commodities, Some(sink)).expect("valid by construction")
}

/// Parameters for [`random_instance`].
#[derive(Clone, Copy, Debug)]
pub struct RandomParams {
    pub n: usize,
    pub k: usize,
    /// max commodity size (MCP only; CSCP commodities are sink pairs)
    pub max_group: usize,
    pub max_capacity: i64,
    pub mode: Mode,
}

impl RandomParams {
    fn validate(&self) -> Result<(), GenError> {
        let err = |msg: String| Err(GenError::BadParams(msg));
        if self.n < 2 || self.n > 64 {
            return err(format!("n = {} outside 2..=64", self.n));
        }
        if self.k < 1 || self.k > 8 {
            return err(format!("k = {} outside 1..=8", self.k));
        }
        if self.max_group < 2 || self.max_group > 4 {
            return err(format!("max_group = {} outside 2..=4", self.max_group));
        }
        if self.max_capacity < 1 {
            return err(format!("max_capacity = {} below 1", self.max_capacity));
        }
        let needed = match self.mode {
            Mode::Cscp => self.k + 1,
            Mode::Mcp => 2,
        };
        if self.n < needed {
            return err(format!("n = {} too small for {} commodities", self.n, self.k));
        }
        Ok(())
    }
}

fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, max_capacity: i64) -> Graph {
    // random spanning tree, then extra edges with probability 0.3
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(1..=max_capacity)));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if edges.iter().any(|&(a, b, _)| (a, b) == (u, v)) {
                continue;
            }
            if rng.gen_bool(0.3) {
                edges.push((u, v, rng.gen_range(1..=max_capacity)));
            }
        }
    }
    edges.sort();
    Graph::new(n, edges).expect("tree edges keep the graph simple and connected")
}

/// A seeded random instance. Identical parameters and seed always produce
/// the identical instance.
pub fn random_instance(params: &RandomParams, seed: u64) -> Result<Instance, GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n;
    let graph = random_connected_graph(&mut rng, n, params.max_capacity);
    let commodities = match params.mode {
        Mode::Cscp => {
            let sink = n - 1;
            let mut sources: Vec<usize> = (0..sink).collect();
            // sample k distinct sources
            for i in 0..params.k {
                let j = rng.gen_range(i..sources.len());
                sources.swap(i, j);
            }
            sources.truncate(params.k);
            sources.sort();
            return Ok(Instance::new(
                graph,
                sources.into_iter().map(|s| vec![s, n - 1]).collect(),
                Some(n - 1),
            )?);
        }
        Mode::Mcp => (0..params.k)
            .map(|_| {
                let size = rng.gen_range(2..=params.max_group.min(n));
                let mut verts: Vec<usize> = (0..n).collect();
                for i in 0..size {
                    let j = rng.gen_range(i..verts.len());
                    verts.swap(i, j);
                }
                verts.truncate(size);
                verts.sort();
                verts
            })
            .collect(),
    };
    Ok(Instance::new(graph, commodities, None)?)
}

/// All blocks of a random laminar partition tree over `0..n`, including the
/// singletons but excluding the whole ground set.
fn random_laminar_blocks(rng: &mut ChaCha8Rng, verts: &[usize], n: usize, out: &mut Vec<VertexSet>) {
    if verts.len() <= 1 {
        return;
    }
    let parts = rng.gen_range(2..=3.min(verts.len()));
    // random partition of verts into `parts` nonempty blocks
    let mut shuffled = verts.to_vec();
    for i in (1..shuffled.len()).rev() {
        let j = rng.gen_range(0..=i);
        shuffled.swap(i, j);
    }
    let mut blocks: Vec<Vec<usize>> = (0..parts).map(|i| vec![shuffled[i]]).collect();
    for &v in &shuffled[parts..] {
        blocks[rng.gen_range(0..parts)].push(v);
    }
    for block in blocks {
        out.push(VertexSet::from_iter(n, block.iter().copied()));
        random_laminar_blocks(rng, &block, n, out);
    }
}

/// Random positive rational weights summing to one.
fn random_weights(rng: &mut ChaCha8Rng, count: usize) -> Vec<Q> {
    let mut tickets: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = tickets.iter().sum();
    tickets.drain(..).map(|t| qr(t, total)).collect()
}

/// A random laminar fractional cut packing for a random instance, built
/// directly (no LP): each terminal owns a chain of blocks of one shared
/// laminar partition tree, every block containing the terminal's root and
/// avoiding its co-terminals and the sink. Capacities are set to the
/// ceiling of the resulting fractional loads, so the family is feasible.
pub fn random_laminar_family(
    params: &RandomParams,
    seed: u64,
) -> Result<(Instance, FractionalLaminarFamily), GenError> {
    params.validate()?;
    let bare = random_instance(params, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = bare.graph().num_vertices();

    let mut blocks = Vec::new();
    let verts: Vec<usize> = (0..n).collect();
    random_laminar_blocks(&mut rng, &verts, n, &mut blocks);
    blocks.sort_by_key(|b| (b.len(), b.clone()));
    blocks.dedup();

    let mut cuts = Vec::new();
    for (id, t) in bare.terminals().iter().enumerate() {
        let forbidden: Vec<usize> = bare.commodities()[t.commodity]
            .iter()
            .copied()
            .filter(|&v| v != t.vertex)
            .collect();
        let admissible: Vec<&VertexSet> = blocks
            .iter()
            .filter(|b| b.contains(t.vertex) && forbidden.iter().all(|&v| !b.contains(v)))
            .collect();
        assert!(!admissible.is_empty(), "the singleton block always qualifies");
        let mut chosen: Vec<&VertexSet> =
            admissible.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        if chosen.is_empty() {
            chosen.push(admissible[0]);
        }
        let weights = random_weights(&mut rng, chosen.len());
        for (set, weight) in chosen.into_iter().zip(weights) {
            cuts.push(WeightedCut { cut: set.clone(), weight, owner: id });
        }
    }

    // re-derive capacities from the loads the family actually places
    let loads = crate::instance::fractional_load(&cuts, bare.graph());
    let edges: Vec<(usize, usize, i64)> = bare
        .graph()
        .edges()
        .iter()
        .zip(&loads)
        .map(|(e, l)| {
            let c = if l.is_zero() { q(1) } else { l.ceil() };
            (e.u, e.v, i64::try_from(c.to_integer()).expect("small capacity"))
        })
        .collect();
    let graph = Graph::new(n, edges)?;
    let instance = Instance::new(graph, bare.commodities().to_vec(), bare.sink())?;
    let family =
        FractionalLaminarFamily { cuts, num_terminals: instance.terminals().len() };
    family
        .validate(&instance)
        .expect("chains of one laminar tree always validate");
    Ok((instance, family))
}

/// A random valid input for the integer cut restructuring step: one cut per
/// terminal, each containing its own root and none of its co-terminals.
pub fn random_integer_input(
    params: &RandomParams,
    seed: u64,
) -> Result<(Instance, IntegerCutInput), GenError> {
    params.validate()?;
    let instance = random_instance(params, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x517c_c1b7_2722_0a95);
    let n = instance.graph().num_vertices();
    let mut cuts = Vec::new();
    let mut roots = Vec::new();
    let mut commodities = Vec::new();
    for t in instance.terminals() {
        let forbidden: Vec<usize> = instance.commodities()[t.commodity]
            .iter()
            .copied()
            .filter(|&v| v != t.vertex)
            .collect();
        let members = (0..n).filter(|&v| {
            v == t.vertex || (!forbidden.contains(&v) && rng.gen_bool(0.4))
        });
        let mut set = VertexSet::from_iter(n, members);
        if set.len() == n {
            // keep cuts proper
            let drop = (0..n).rev().find(|&v| v != t.vertex).unwrap();
            set.remove(drop);
        }
        cuts.push(set);
        roots.push(t.vertex);
        commodities.push(t.commodity);
    }
    Ok((instance, IntegerCutInput { cuts, roots, commodities }))
}

/// Sanity check used by the examples: does the total weight per terminal
/// come to one?
pub fn total_weight_per_terminal(family: &FractionalLaminarFamily) -> Vec<Q> {
    let mut totals = vec![Q::zero(); family.num_terminals];
    for c in &family.cuts {
        totals[c.owner] += &c.weight;
    }
    totals
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    #[test]
    fn clique_chain_shape() {
        let inst = clique_chain(4);
        // 4 clique vertices, v_1, v_2, t
        assert_eq!(inst.graph().num_vertices(), 7);
        assert_eq!(inst.num_commodities(), 4);
        assert_eq!(inst.sink(), Some(6));
        assert!(inst.graph().is_connected());
        // clique (6) + star (4) + chain (2)
        assert_eq!(inst.graph().num_edges(), 12);
    }

    #[test]
    fn random_instance_is_deterministic() {
        let p = RandomParams { n: 9, k: 3, max_group: 3, max_capacity: 3, mode: Mode::Mcp };
        let a = random_instance(&p, 7).unwrap();
        let b = random_instance(&p, 7).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let c = random_instance(&p, 8).unwrap();
        assert_ne!(format!("{a:?}"), format!("{c:?}"));
    }

    #[test]
    fn bad_params_rejected() {
        let p = RandomParams { n: 9, k: 3, max_group: 1, max_capacity: 3, mode: Mode::Mcp };
        assert!(matches!(random_instance(&p, 0), Err(GenError::BadParams(_))));
        let p = RandomParams { n: 3, k: 3, max_group: 2, max_capacity: 3, mode: Mode::Cscp };
        assert!(matches!(random_instance(&p, 0), Err(GenError::BadParams(_))));
    }

    #[test]
    fn laminar_family_validates_and_fits_capacities() {
        for seed in 0..20 {
            for mode in [Mode::Cscp, Mode::Mcp] {
                let p = RandomParams { n: 8, k: 3, max_group: 3, max_capacity: 3, mode };
                let (inst, family) = random_laminar_family(&p, seed).unwrap();
                let loads = crate::instance::fractional_load(&family.cuts, inst.graph());
                for (l, e) in loads.iter().zip(inst.graph().edges()) {
                    assert!(*l <= q(e.capacity));
                }
                for w in total_weight_per_terminal(&family) {
                    assert!(w.is_one());
                }
            }
        }
    }

    #[test]
    fn integer_input_respects_preconditions() {
        for seed in 0..20 {
            let p = RandomParams { n: 8, k: 3, max_group: 3, max_capacity: 3, mode: Mode::Mcp };
            let (inst, input) = random_integer_input(&p, seed).unwrap();
            for (i, cut) in input.cuts.iter().enumerate() {
                assert!(cut.contains(input.roots[i]));
                assert!(cut.len() < inst.graph().num_vertices());
                for (j, &r) in input.roots.iter().enumerate() {
                    if j != i && input.commodities[j] == input.commodities[i] {
                        assert!(!cut.contains(r));
                    }
                }
            }
        }
    }
}
