//! Direct integration of the full network.
//!
//! The state is the vector of cell outputs `x`; inputs are `u = P x` and
//! every cell follows `x_i' = (-x_i + T(u_i)) / tau`. Integration is
//! classic fixed-step RK4 with a fixed summation order, so runs are
//! bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::cell::StaticMap;
use crate::existence::{ExistenceCertificate, PatternSolution, Verdict};
use crate::graph::ScaledAdjacency;
use crate::matrix::norm_inf;
use crate::partition::Partition;

/// Most rows kept in a trace.
pub const MAX_SAMPLES: usize = 10_000;
/// Relative slack on the box `[0, A]` before a state counts as escaped.
pub const BOX_SLACK: f64 = 1e-9;
/// Default clustering gap, relative to `A`.
pub const CLUSTER_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulateError {
    #[error("state left [0, A] at t = {t} (cell {cell}, value {value}); reduce the step")]
    StateOutOfBox { t: f64, cell: usize, value: f64 },
    #[error("bad options: {0}")]
    BadOptions(&'static str),
    #[error("initial state has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("trace did not converge")]
    NotConverged,
}

/// Integration options; times are absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub step: f64,
    pub max_time: f64,
    /// Stop once `||x'||_inf` drops below this.
    pub conv_tol: f64,
}

impl SimOptions {
    /// Step `0.01 tau`, horizon `1e4 tau`, tolerance `1e-9`.
    pub fn for_tau(tau: f64) -> Self {
        Self {
            step: 0.01 * tau,
            max_time: 1e4 * tau,
            conv_tol: 1e-9,
        }
    }

    fn validate(&self) -> Result<(), SimulateError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SimulateError::BadOptions("step must be positive"));
        }
        if !(self.max_time >= self.step && self.max_time.is_finite()) {
            return Err(SimulateError::BadOptions("max_time must be at least one step"));
        }
        if !(self.conv_tol > 0.0) {
            return Err(SimulateError::BadOptions("conv_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub converged: bool,
    pub final_derivative_norm: f64,
    pub steps: usize,
}

struct Rhs<'a, M: ?Sized> {
    rows: Vec<Vec<(usize, f64)>>,
    model: &'a M,
    inv_tau: f64,
}

impl<M: StaticMap + ?Sized> Rhs<'_, M> {
    /// Inputs are summed over the terms `p_ij x_j` in sorted order, so two
    /// cells whose terms agree as multisets get bit-identical inputs. An
    /// automorphism-invariant state therefore stays exactly invariant
    /// instead of drifting by rounding along unstable transverse modes.
    fn eval(&self, x: &[f64], out: &mut [f64], terms: &mut Vec<f64>) {
        for (i, row) in self.rows.iter().enumerate() {
            terms.clear();
            terms.extend(row.iter().map(|&(j, p)| p * x[j]));
            terms.sort_unstable_by(f64::total_cmp);
            let u: f64 = terms.iter().sum();
            // P x is nonnegative for x >= 0; guard the rounding edge
            out[i] = (-x[i] + self.model.value(u.max(0.0))) * self.inv_tau;
        }
    }
}

/// Integrates from `x0` until convergence or `max_time`.
pub fn integrate<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    model: &M,
    x0: &[f64],
    opts: &SimOptions,
) -> Result<SimulationTrace, SimulateError> {
    integrate_with_observer(sa, model, x0, opts, |_, _| {})
}

/// As [`integrate`], calling `observe(t, x)` after every step.
pub fn integrate_with_observer<M, F>(
    sa: &ScaledAdjacency,
    model: &M,
    x0: &[f64],
    opts: &SimOptions,
    mut observe: F,
) -> Result<SimulationTrace, SimulateError>
where
    M: StaticMap + ?Sized,
    F: FnMut(f64, &[f64]),
{
    opts.validate()?;
    let n = sa.n();
    if x0.len() != n {
        return Err(SimulateError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let ub = model.upper_bound();
    let slack = BOX_SLACK * ub;
    let check_box = |t: f64, x: &[f64]| -> Result<(), SimulateError> {
        match x
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v >= -slack && v <= ub + slack))
        {
            Some((cell, &value)) => Err(SimulateError::StateOutOfBox { t, cell, value }),
            None => Ok(()),
        }
    };
    check_box(0.0, x0)?;

    let rhs = Rhs {
        rows: sa.sparse_rows(),
        model,
        inv_tau: 1.0 / model.tau(),
    };
    let max_steps = libm::ceil(opts.max_time / opts.step) as usize;
    // leave room for the final row
    let stride = max_steps.div_ceil(MAX_SAMPLES - 2).max(1);
    let h = opts.step;

    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut terms = Vec::new();

    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    rhs.eval(&x, &mut k1, &mut terms);
    let mut deriv = norm_inf(&k1);
    let mut steps = 0;
    let mut t = 0.0;
    while deriv >= opts.conv_tol && steps < max_steps {
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        rhs.eval(&tmp, &mut k2, &mut terms);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        rhs.eval(&tmp, &mut k3, &mut terms);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        rhs.eval(&tmp, &mut k4, &mut terms);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        steps += 1;
        t = steps as f64 * h;
        check_box(t, &x)?;
        observe(t, &x);
        rhs.eval(&x, &mut k1, &mut terms);
        deriv = norm_inf(&k1);
        if steps % stride == 0 {
            times.push(t);
            states.push(x.clone());
        }
    }
    if *times.last().unwrap() != t {
        times.push(t);
        states.push(x.clone());
    }
    Ok(SimulationTrace {
        times,
        states,
        final_state: x,
        final_time: t,
        converged: deriv < opts.conv_tol,
        final_derivative_norm: deriv,
        steps,
    })
}

/// `u_hom 1 + eps d / ||d||_inf`, clipped to `[0, upper]`.
///
/// # Panics
///
/// If `direction` is zero.
pub fn perturbed_start(u_hom: f64, direction: &[f64], eps: f64, upper: f64) -> Vec<f64> {
    let scale = norm_inf(direction);
    assert!(scale > 0.0, "perturbation direction is zero");
    direction
        .iter()
        .map(|d| (u_hom + eps * d / scale).clamp(0.0, upper))
        .collect()
}

/// Cells grouped by final value.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPattern {
    /// Cell indices per group, each sorted; groups by value descending.
    pub groups: Vec<Vec<usize>>,
    /// Mean final value per group.
    pub values: Vec<f64>,
}

impl EmpiricalPattern {
    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// Whether the grouping equals `pi` up to the order of classes.
    pub fn matches(&self, pi: &Partition) -> bool {
        if self.groups.len() != pi.r() {
            return false;
        }
        self.groups.iter().all(|g| {
            let c = pi.class_of(g[0]);
            pi.classes()[c] == *g
        })
    }
}

/// Single-linkage clustering of `values` with gap threshold `tol`.
pub fn cluster(values: &[f64], tol: f64) -> EmpiricalPattern {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut prev = f64::INFINITY;
    for i in order {
        if groups.is_empty() || prev - values[i] > tol {
            groups.push(Vec::new());
        }
        groups.last_mut().unwrap().push(i);
        prev = values[i];
    }
    let values = groups
        .iter()
        .map(|g| g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64)
        .collect();
    groups.iter_mut().for_each(|g| g.sort_unstable());
    EmpiricalPattern { groups, values }
}

/// Clusters the final state of a converged trace.
pub fn classify(trace: &SimulationTrace, tol: f64) -> Result<EmpiricalPattern, SimulateError> {
    if !trace.converged {
        return Err(SimulateError::NotConverged);
    }
    Ok(cluster(&trace.final_state, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Match,
    NoMatch,
    /// The pattern was not certified; the run is reported but not judged.
    Exploratory,
}

impl VerifyOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerifyOutcome::Match => "MATCH",
            VerifyOutcome::NoMatch => "NO_MATCH",
            VerifyOutcome::Exploratory => "EXPLORATORY",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub outcome: VerifyOutcome,
    pub note: Option<&'static str>,
    pub empirical: Option<EmpiricalPattern>,
    pub same_grouping: bool,
    /// `max_i |(P x_final)_i - z_class(i)|`.
    pub deviation: f64,
    pub trace: SimulationTrace,
}

/// Simulates from the homogeneous state nudged along the lifted `v_r`
/// and compares the outcome with the predicted pattern.
///
/// The sign of the nudge points towards the predicted outputs. Failure to
/// land on the pattern is reported as `NoMatch`, not an error.
#[allow(clippy::too_many_arguments)]
pub fn verify_certificate<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    pi: &Partition,
    model: &M,
    cert: &ExistenceCertificate,
    pattern: &PatternSolution,
    eps: f64,
    opts: &SimOptions,
) -> Result<VerifyReport, SimulateError> {
    let mut dir = pi.lift(&cert.v_r);
    // the nudge acts on outputs x = T(u), and T is decreasing
    let toward: f64 = pattern
        .x
        .iter()
        .zip(&dir)
        .map(|(x, d)| (x - cert.u_star) * d)
        .sum();
    if toward < 0.0 {
        dir.iter_mut().for_each(|d| *d = -*d);
    }
    let x0 = perturbed_start(cert.u_star, &dir, eps, model.upper_bound());
    let trace = integrate(sa, model, &x0, opts)?;
    let u_final = sa.apply(&trace.final_state);
    let deviation = u_final
        .iter()
        .zip(&pattern.u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let empirical = classify(&trace, CLUSTER_REL_TOL * model.upper_bound()).ok();
    let same_grouping = empirical.as_ref().is_some_and(|e| e.matches(pi));
    let (outcome, note) = if cert.verdict != Verdict::Certified {
        (
            VerifyOutcome::Exploratory,
            Some("no certificate; simulation exploratory only"),
        )
    } else if same_grouping {
        (VerifyOutcome::Match, None)
    } else {
        (VerifyOutcome::NoMatch, None)
    };
    Ok(VerifyReport {
        outcome,
        note,
        empirical,
        same_grouping,
        deviation,
        trace,
    })
}
