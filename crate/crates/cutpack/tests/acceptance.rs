//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single PASS line on success; a failed assertion is the FAIL line.

use cutpack::gen::{clique_chain, random_instance, random_integer_input, random_laminar_family, RandomParams};
use cutpack::instance::{
    integral_load, is_laminar, verify_fractional_feasible, verify_integral_solution,
    IntegralCutFamily, Mode,
};
use cutpack::io::{write_json, InstanceFile, SolutionFile};
use cutpack::laminar::{integer_lam2::integer_lam2, lam1, lam1_slack, lam2, lam2_slack};
use cutpack::lp::solve_mcp_lp;
use cutpack::oracle::brute_force_opt;
use cutpack::pipeline::solve;
use cutpack::ratio::{q, Q};
use cutpack::rounding::{round1, round2};
use num::Zero;
use std::sync::Mutex;
use std::time::Instant;

/// Serializes the criteria so the wall-clock assertions in [`ac1`] and
/// [`ac7`] measure their own work even when the harness runs tests on
/// several threads.
///
/// [`ac1`]: ac1_mcp_pipeline_meets_8c_plus_4
/// [`ac7`]: ac7_clique_chain_integrality_gap
static SEQUENTIAL: Mutex<()> = Mutex::new(());

fn run_alone() -> std::sync::MutexGuard<'static, ()> {
    SEQUENTIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn mcp_params(seed: u64) -> RandomParams {
    // n <= 12, k <= 4, commodities of size <= 3, capacities <= 3
    RandomParams {
        n: 5 + (seed % 8) as usize,
        k: 1 + (seed % 4) as usize,
        max_group: 2 + (seed % 2) as usize,
        max_capacity: 1 + (seed % 3) as i64,
        mode: Mode::Mcp,
    }
}

fn cscp_params(seed: u64) -> RandomParams {
    RandomParams {
        n: 6 + (seed % 7) as usize,
        k: 1 + (seed % 4) as usize,
        max_group: 2,
        max_capacity: 1 + (seed % 3) as i64,
        mode: Mode::Cscp,
    }
}

#[test]
fn ac1_mcp_pipeline_meets_8c_plus_4() {
    let _guard = run_alone();
    let start = Instant::now();
    for seed in 0..100u64 {
        let params = mcp_params(seed);
        let instance = random_instance(&params, seed).unwrap();
        let grid = if seed % 2 == 0 { 4 } else { 6 };
        let out = solve(&instance, None, Some(grid)).unwrap();
        assert!(out.violations.is_empty(), "seed {seed}: {:?}", out.violations);
        for (e, (&load, &cap)) in
            out.report.loads.iter().zip(&out.integralized_capacities).enumerate()
        {
            assert!(load <= 8 * cap + 4, "seed {seed} edge {e}: load {load} > {}", 8 * cap + 4);
        }
    }
    assert!(start.elapsed().as_secs() < 600, "criterion 1 exceeded ten minutes");
    println!("[AC1] PASS: 100 random MCP instances within 8c+4");
}

#[test]
fn ac2_cscp_pipeline_meets_c_plus_2() {
    let _guard = run_alone();
    for seed in 0..100u64 {
        let params = cscp_params(seed);
        let instance = random_instance(&params, seed).unwrap();
        let out = solve(&instance, None, None).unwrap();
        assert!(out.violations.is_empty(), "seed {seed}: {:?}", out.violations);
        for (e, (&load, &cap)) in
            out.report.loads.iter().zip(&out.integralized_capacities).enumerate()
        {
            assert!(load <= cap + 2, "seed {seed} edge {e}: load {load} > {}", cap + 2);
        }
    }
    println!("[AC2] PASS: 100 random CSCP instances within c+2");
}

#[test]
fn ac3_round1_meets_c_plus_1_on_direct_families() {
    let _guard = run_alone();
    for seed in 0..200u64 {
        let params = cscp_params(seed);
        let (instance, family) = random_laminar_family(&params, seed).unwrap();
        let cuts = round1(&instance, &family).unwrap();
        let loads = integral_load(cuts.iter(), instance.graph());
        for (e, (&load, edge)) in loads.iter().zip(instance.graph().edges()).enumerate() {
            assert!(
                load <= edge.capacity + 1,
                "seed {seed} edge {e}: load {load} > {}",
                edge.capacity + 1
            );
        }
        let family = IntegralCutFamily { assignment: cuts };
        verify_integral_solution(&family, &instance).unwrap();
    }
    println!("[AC3] PASS: 200 direct CSCP families rounded within c+1");
}

#[test]
fn ac4_round2_meets_c_plus_3_on_direct_families() {
    let _guard = run_alone();
    for seed in 0..200u64 {
        let params = mcp_params(seed);
        let (instance, family) = random_laminar_family(&params, seed).unwrap();
        let cuts = round2(&instance, &family).unwrap();
        let loads = integral_load(cuts.iter(), instance.graph());
        for (e, (&load, edge)) in loads.iter().zip(instance.graph().edges()).enumerate() {
            assert!(
                load <= edge.capacity + 3,
                "seed {seed} edge {e}: load {load} > {}",
                edge.capacity + 3
            );
        }
        let family = IntegralCutFamily { assignment: cuts };
        verify_integral_solution(&family, &instance).unwrap();
    }
    println!("[AC4] PASS: 200 direct MCP families rounded within c+3");
}

#[test]
fn ac5_integer_restructuring_is_laminar_and_doubles_at_most() {
    let _guard = run_alone();
    for seed in 0..500u64 {
        let params = RandomParams {
            n: 4 + (seed % 7) as usize, // n <= 10
            k: 1 + (seed % 3) as usize,
            max_group: 2 + (seed % 2) as usize,
            max_capacity: 2,
            mode: Mode::Mcp,
        };
        let (instance, input) = random_integer_input(&params, seed).unwrap();
        let graph = instance.graph();
        let output = integer_lam2(graph, &input).unwrap();
        assert!(is_laminar(output.iter()), "seed {seed}: output crosses");
        // separation: same-commodity pairs still lie on opposite sides of
        // at least one output cut
        for i in 0..output.len() {
            for j in (i + 1)..output.len() {
                if input.commodities[i] != input.commodities[j] {
                    continue;
                }
                let (ri, rj) = (input.roots[i], input.roots[j]);
                let sep = (output[i].contains(ri) && !output[i].contains(rj))
                    || (output[j].contains(rj) && !output[j].contains(ri));
                assert!(sep, "seed {seed}: pair ({i},{j}) no longer separated");
            }
        }
        let before = integral_load(input.cuts.iter(), graph);
        let after = integral_load(output.iter(), graph);
        for (e, (&a, &b)) in after.iter().zip(&before).enumerate() {
            assert!(a <= 2 * b, "seed {seed} edge {e}: load {a} > 2*{b}");
        }
    }
    println!("[AC5] PASS: 500 integer restructurings laminar, separating, within 2x load");
}

#[test]
fn ac6_laminar_stage_feasible_against_fractional_guarantee() {
    let _guard = run_alone();
    for seed in 0..30u64 {
        let params = cscp_params(seed);
        let instance = random_instance(&params, seed).unwrap();
        let metric = solve_mcp_lp(&instance, &Q::zero()).unwrap();
        let family = lam1(&instance, &metric).unwrap();
        let slack = lam1_slack(&instance);
        let caps: Vec<Q> = instance
            .graph()
            .edges()
            .iter()
            .map(|e| &metric.lambda * q(e.capacity) + &slack)
            .collect();
        verify_fractional_feasible(&family.cuts, &instance, &caps, Mode::Cscp)
            .unwrap_or_else(|v| panic!("seed {seed} (cscp): {v}"));
    }
    for seed in 0..30u64 {
        let params = mcp_params(seed);
        let instance = random_instance(&params, seed).unwrap();
        let metric = solve_mcp_lp(&instance, &Q::zero()).unwrap();
        let d = if seed % 2 == 0 { 4 } else { 6 };
        let family = lam2(&instance, &metric, d).unwrap();
        let slack = lam2_slack(d);
        let caps: Vec<Q> = instance
            .graph()
            .edges()
            .iter()
            .map(|e| q(8) * &metric.lambda * q(e.capacity) + &slack)
            .collect();
        verify_fractional_feasible(&family.cuts, &instance, &caps, Mode::Mcp)
            .unwrap_or_else(|v| panic!("seed {seed} (mcp): {v}"));
    }
    println!("[AC6] PASS: laminar stages feasible against their fractional guarantees");
}

#[test]
fn ac7_clique_chain_integrality_gap() {
    let _guard = run_alone();
    for n in [4usize, 6] {
        let start = Instant::now();
        let instance = clique_chain(n);
        let metric = solve_mcp_lp(&instance, &Q::zero()).unwrap();
        assert!(metric.lambda <= q(1), "clique_chain({n}): lambda {} > 1", metric.lambda);
        let oracle = brute_force_opt(&instance, 200_000_000).unwrap();
        assert!(
            oracle.optimal_max_relative_load >= q(2),
            "clique_chain({n}): integral optimum {} < 2",
            oracle.optimal_max_relative_load
        );
        if n == 6 {
            assert!(start.elapsed().as_secs() < 60, "clique_chain(6) exceeded one minute");
        }
    }
    println!("[AC7] PASS: clique chains have lambda <= 1 and integral optimum >= 2");
}

#[test]
fn ac8_oracle_sandwich_on_small_instances() {
    let _guard = run_alone();
    for seed in 0..25u64 {
        let params = RandomParams {
            n: 4 + (seed % 4) as usize, // n <= 7
            k: 1 + (seed % 3) as usize,
            max_group: 2 + (seed % 2) as usize,
            max_capacity: 2,
            mode: if seed % 2 == 0 { Mode::Mcp } else { Mode::Cscp },
        };
        let instance = random_instance(&params, seed).unwrap();
        let out = solve(&instance, None, None).unwrap();
        assert!(out.violations.is_empty(), "seed {seed}: {:?}", out.violations);
        let oracle = brute_force_opt(&instance, 50_000_000).unwrap();
        assert!(
            out.metric.lambda <= oracle.optimal_max_relative_load,
            "seed {seed}: lambda {} above integral optimum {}",
            out.metric.lambda,
            oracle.optimal_max_relative_load
        );
        assert!(
            oracle.optimal_max_relative_load <= out.report.max_relative_load,
            "seed {seed}: optimum {} above the pipeline's achieved load {}",
            oracle.optimal_max_relative_load,
            out.report.max_relative_load
        );
        verify_integral_solution(&oracle.witness, &instance)
            .unwrap_or_else(|v| panic!("seed {seed}: oracle witness invalid: {v}"));
    }
    println!("[AC8] PASS: lambda <= oracle optimum <= pipeline load on 25 small instances");
}

#[test]
fn ac9_solution_files_are_byte_deterministic() {
    let _guard = run_alone();
    let dir = std::env::temp_dir().join("cutpack-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    for seed in 0..5u64 {
        let params = mcp_params(seed);
        let instance = random_instance(&params, seed).unwrap();
        let mut bytes = Vec::new();
        for run in 0..2 {
            let out = solve(&instance, None, None).unwrap();
            let cuts = out
                .assignment
                .assignment
                .iter()
                .enumerate()
                .map(|(id, s)| (id, s.iter().collect::<Vec<_>>()))
                .collect();
            let file = SolutionFile {
                lambda: cutpack::ratio::fmt_q(&out.metric.lambda),
                cuts,
                loads: instance
                    .graph()
                    .edges()
                    .iter()
                    .zip(&out.report.loads)
                    .map(|(e, &l)| (e.u, e.v, l))
                    .collect(),
                bound: out.guarantee.bound_name.to_string(),
                violations: out.violations.clone(),
            };
            let path = dir.join(format!("sol-{seed}-{run}.json"));
            write_json(&path, &file).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "seed {seed}: solution bytes differ across runs");
        // the instance file serializes deterministically as well
        let a = serde_json::to_vec(&InstanceFile::from_instance(&instance)).unwrap();
        let b = serde_json::to_vec(&InstanceFile::from_instance(&instance)).unwrap();
        assert_eq!(a, b);
    }
    println!("[AC9] PASS: repeated runs emit identical solution bytes");
}
