//! Property tests for the structural invariants each stage must keep.

use cutpack::gen::{random_instance, random_integer_input, random_laminar_family, RandomParams};
use cutpack::instance::{fractional_load, integral_load, is_laminar, Mode};
use cutpack::laminar::integer_lam2::integer_lam2;
use cutpack::laminar::{quantize, uncross_cscp};
use cutpack::lp::solve_mcp_lp;
use cutpack::ratio::{fmt_q, parse_q, q, qr, Q};
use num::{One, Signed, Zero};
use proptest::prelude::*;

fn small_mcp(seed: u64) -> RandomParams {
    RandomParams {
        n: 4 + (seed % 6) as usize,
        k: 1 + (seed % 3) as usize,
        max_group: 2 + (seed % 2) as usize,
        max_capacity: 3,
        mode: Mode::Mcp,
    }
}

fn small_cscp(seed: u64) -> RandomParams {
    RandomParams {
        n: 5 + (seed % 5) as usize,
        k: 1 + (seed % 3) as usize,
        max_group: 2,
        max_capacity: 3,
        mode: Mode::Cscp,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_serialization_round_trips(n in -1000i64..1000, d in 1i64..1000) {
        let x = qr(n, d);
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn lp_lambda_is_positive_and_certified(seed in 0u64..200) {
        let instance = random_instance(&small_mcp(seed), seed).unwrap();
        let metric = solve_mcp_lp(&instance, &Q::zero()).unwrap();
        prop_assert!(metric.lambda.is_positive());
        // the certificate: per-commodity loads fit lambda * c_e
        let graph = instance.graph();
        for e in 0..graph.num_edges() {
            let total: Q = metric.lengths.iter().map(|d| d[e].clone()).sum();
            prop_assert!(total <= &metric.lambda * q(graph.edges()[e].capacity));
        }
    }

    #[test]
    fn quantization_stays_on_grid_and_unit(seed in 0u64..200) {
        let (instance, family) = random_laminar_family(&small_cscp(seed), seed).unwrap();
        let d2 = 16i64;
        let quantized = quantize(&family.cuts, d2).unwrap();
        let mut totals = vec![Q::zero(); family.num_terminals];
        for c in &quantized {
            // every weight is a positive multiple of the grid step
            let scaled = &c.weight * q(d2);
            prop_assert!(scaled.is_integer() && scaled.is_positive());
            totals[c.owner] += &c.weight;
        }
        for t in totals {
            prop_assert!(t.is_one());
        }
        let _ = instance;
    }

    #[test]
    fn uncrossing_yields_laminar_without_heavier_edges(seed in 0u64..200) {
        let instance = random_instance(&small_cscp(seed), seed).unwrap();
        let metric = solve_mcp_lp(&instance, &Q::zero()).unwrap();
        let raw = cutpack::laminar::ball_cuts(&instance, &metric, &q(1)).unwrap();
        let quantized = quantize(&raw, 64).unwrap();
        let roots: Vec<usize> = instance.terminals().iter().map(|t| t.vertex).collect();
        let before = fractional_load(&quantized, instance.graph());
        let cuts = uncross_cscp(quantized, &roots, instance.sink().unwrap()).unwrap();
        let after = fractional_load(&cuts, instance.graph());
        prop_assert!(is_laminar(cuts.iter().map(|c| &c.cut)));
        for (a, b) in after.iter().zip(&before) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn integer_restructuring_never_loses_roots(seed in 0u64..300) {
        let (instance, input) = random_integer_input(&small_mcp(seed), seed).unwrap();
        let output = integer_lam2(instance.graph(), &input).unwrap();
        prop_assert_eq!(output.len(), input.cuts.len());
        for (i, cut) in output.iter().enumerate() {
            prop_assert!(cut.contains(input.roots[i]));
        }
        let before = integral_load(input.cuts.iter(), instance.graph());
        let after = integral_load(output.iter(), instance.graph());
        for (a, b) in after.iter().zip(&before) {
            prop_assert!(*a <= 2 * b);
        }
    }

    #[test]
    fn generated_instances_always_validate(seed in 0u64..500, cscp in any::<bool>()) {
        let params = if cscp { small_cscp(seed) } else { small_mcp(seed) };
        let instance = random_instance(&params, seed).unwrap();
        prop_assert!(instance.graph().is_connected());
        prop_assert_eq!(instance.is_cscp(), cscp);
        for c in instance.commodities() {
            prop_assert!(c.len() >= 2);
        }
    }
}
