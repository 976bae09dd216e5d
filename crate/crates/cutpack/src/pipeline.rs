//! The end-to-end solver: LP relaxation, laminar restructuring, rounding,
//! verification.
//!
//! The integral guarantee is stated against the integralized capacities
//! `c_hat_e = max(1, ceil(lambda * c_e))`: at most `8*c_hat_e + 4` cuts per
//! edge for multiway instances, `c_hat_e + 2` for common-sink instances.

use crate::instance::{
    fractional_load, verify_fractional_feasible, verify_integral_solution, Graph, Instance,
    IntegralCutFamily, IntegralReport, Mode,
};
use crate::laminar::{lam1, lam1_slack, lam2, lam2_slack, LaminarError};
use crate::lp::{solve_mcp_lp, LpError, MetricSolution};
use crate::oracle::{check_guarantee, GuaranteeReport};
use crate::ratio::{q, Q};
use crate::rounding::{round1, round2, RoundingError};
use num::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Laminar(#[from] LaminarError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
}

/// Everything the pipeline produced, ready for reporting.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub mode: Mode,
    pub metric: MetricSolution,
    pub family: crate::laminar::FractionalLaminarFamily,
    /// `max(1, ceil(lambda * c_e))` per edge: the theorem's capacities
    pub integralized_capacities: Vec<i64>,
    pub assignment: IntegralCutFamily,
    pub report: IntegralReport,
    pub guarantee: GuaranteeReport,
    /// all verification failures, as display strings; empty on success
    pub violations: Vec<String>,
}

/// Mode actually used for an instance given a CLI request.
pub fn resolve_mode(instance: &Instance, requested: Option<Mode>) -> Mode {
    match requested {
        Some(m) => m,
        None if instance.is_cscp() => Mode::Cscp,
        None => Mode::Mcp,
    }
}

/// `max(1, ceil(lambda * c_e))` per edge.
pub fn integralized_capacities(instance: &Instance, lambda: &Q) -> Vec<i64> {
    instance
        .graph()
        .edges()
        .iter()
        .map(|e| {
            let c = (lambda * q(e.capacity)).ceil().to_integer();
            i64::try_from(c).expect("small capacity").max(1)
        })
        .collect()
}

/// The capacities the rounding stage works against: the ceiling of the
/// laminar stage's fractional guarantee. These never exceed the theorem's
/// budget (`c_hat + 1` in CSCP mode, `8*c_hat + 1` in MCP mode), so the
/// rounded loads stay within `c_hat + 2` and `8*c_hat + 4` respectively.
fn working_capacities(fractional_caps: &[Q]) -> Vec<i64> {
    fractional_caps
        .iter()
        .map(|f| {
            let c = i64::try_from(f.ceil().to_integer()).expect("small capacity");
            c.max(1)
        })
        .collect()
}

/// Run the full pipeline on an instance.
///
/// `grid` overrides the Lam-2 blowup parameter `D` (even, at least 4);
/// the default is 4, the cheapest choice that keeps the slack `4/D` within
/// the rounding budget. Larger `D` tightens the fractional guarantee toward
/// `8*lambda*c_e` at a quadratic cost in cut count.
pub fn solve(
    instance: &Instance,
    requested_mode: Option<Mode>,
    grid: Option<i64>,
) -> Result<SolveOutcome, PipelineError> {
    let mode = resolve_mode(instance, requested_mode);
    let metric = solve_mcp_lp(instance, &Q::zero())?;
    let graph = instance.graph();

    // fractional feasibility bound from the laminar stage, per edge
    let (family, fractional_caps): (_, Vec<Q>) = match mode {
        Mode::Cscp => {
            let family = lam1(instance, &metric)?;
            let slack = lam1_slack(instance);
            let caps = graph
                .edges()
                .iter()
                .map(|e| &metric.lambda * q(e.capacity) + &slack)
                .collect();
            (family, caps)
        }
        Mode::Mcp => {
            let d = grid.unwrap_or(4);
            assert!(d >= 4 && d % 2 == 0, "grid parameter must be even and at least 4");
            let family = lam2(instance, &metric, d)?;
            let slack = lam2_slack(d);
            let caps = graph
                .edges()
                .iter()
                .map(|e| q(8) * &metric.lambda * q(e.capacity) + &slack)
                .collect();
            (family, caps)
        }
    };

    let mut violations = Vec::new();
    if let Err(v) = verify_fractional_feasible(&family.cuts, instance, &fractional_caps, mode) {
        violations.push(format!("fractional family: {v}"));
    }

    // round against integral working capacities
    let working = working_capacities(&fractional_caps);
    let working_graph = Graph::new(
        graph.num_vertices(),
        graph
            .edges()
            .iter()
            .zip(&working)
            .map(|(e, &c)| (e.u, e.v, c))
            .collect(),
    )
    .expect("same topology as the input graph");
    let working_instance = Instance::new(
        working_graph,
        instance.commodities().to_vec(),
        instance.sink(),
    )
    .expect("same commodities as the input instance");

    let cuts = match mode {
        Mode::Cscp => round1(&working_instance, &family)?,
        Mode::Mcp => round2(&working_instance, &family)?,
    };
    let assignment = IntegralCutFamily { assignment: cuts };

    let report = match verify_integral_solution(&assignment, instance) {
        Ok(report) => report,
        Err(v) => {
            violations.push(format!("integral solution: {v}"));
            let loads =
                crate::instance::integral_load(assignment.assignment.iter(), graph);
            let max_load = loads.iter().copied().max().unwrap_or(0);
            IntegralReport { max_load, max_relative_load: Q::zero(), loads }
        }
    };

    let caps = integralized_capacities(instance, &metric.lambda);
    let guarantee = check_guarantee(&assignment, instance, &caps, mode);
    for &(e, load, bound) in &guarantee.violations {
        violations.push(format!(
            "edge {e}: load {load} exceeds the {} bound {bound}",
            guarantee.bound_name
        ));
    }

    Ok(SolveOutcome {
        mode,
        metric,
        family,
        integralized_capacities: caps,
        assignment,
        report,
        guarantee,
        violations,
    })
}

/// Max over edges of the fractional family's load relative to the laminar
/// stage's guarantee; at most one when the stage works correctly.
pub fn fractional_guarantee_ratio(
    outcome: &SolveOutcome,
    instance: &Instance,
) -> Q {
    let loads = fractional_load(&outcome.family.cuts, instance.graph());
    let slack = match outcome.mode {
        Mode::Cscp => lam1_slack(instance),
        Mode::Mcp => lam2_slack(4),
    };
    let factor = match outcome.mode {
        Mode::Cscp => Q::one(),
        Mode::Mcp => q(8),
    };
    instance
        .graph()
        .edges()
        .iter()
        .zip(&loads)
        .map(|(e, l)| l / (&factor * &outcome.metric.lambda * q(e.capacity) + &slack))
        .max()
        .unwrap_or_else(Q::zero)
}
