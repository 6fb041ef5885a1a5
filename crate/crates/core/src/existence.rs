//! Existence certificates for nonhomogeneous patterns and the reduced
//! fixed-point solve.
//!
//! Steady inputs of the network solve `u = P T_N(u)`. Restricting to inputs
//! that are constant on the classes of an equitable partition gives the
//! reduced equation `z = pbar T_r(z)`, and any root lifts back to a root of
//! the full equation. When the reduced graph is two-colourable and
//! `|T'(u*)| lambda_r < -1`, with `lambda_r` the smallest eigenvalue of
//! `pbar`, a root other than `u* 1` exists.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::cell::{fixed_point, CellError, StaticMap};
use crate::graph::ScaledAdjacency;
use crate::matrix::{max_abs_diff, norm_inf, Matrix};
use crate::partition::{Partition, QuotientModel};
use crate::spectral::{eigen_reversible, SpectralError};

/// Width of the band around `|T'(u*)| lambda_r = -1` that counts as the
/// boundary (strict inequality not met).
pub const CONDITION_BAND: f64 = 1e-9;
/// Residual a reduced root must reach to be accepted.
pub const ROOT_TOL: f64 = 1e-10;
/// Relative spread (`max z - min z` over `u*`) above which a root counts as
/// nonhomogeneous.
pub const HOMOGENEOUS_SPREAD: f64 = 1e-6;
/// Perturbation size, relative to `u*`, of the solver starting points.
pub const START_EPS: f64 = 0.1;
pub const NEWTON_MAX_ITERS: usize = 100;
pub const NEWTON_MAX_HALVINGS: usize = 40;
pub const ODE_STEP: f64 = 0.01;
pub const ODE_MAX_STEPS: usize = 10_000_000;
pub const ODE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExistenceError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("both solver strategies converged to the homogeneous state only")]
    OnlyHomogeneousFound,
    #[error("reduced solve did not converge")]
    NoConvergence,
    #[error("sign-flipped linearisation is not cooperative (entry ({0}, {1}))")]
    NotCooperative(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Inconclusive,
    AssumptionFailed,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Certified => "CERTIFIED",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::AssumptionFailed => "ASSUMPTION_FAILED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceCertificate {
    pub u_star: f64,
    /// Eigenvalues of `pbar`, descending.
    pub quotient_spectrum: Vec<f64>,
    pub lambda_r: f64,
    /// Eigenvector of `pbar` for `lambda_r`, unit max-norm.
    pub v_r: Vec<f64>,
    /// How many eigenvalues of `pbar` sit within `1e-9` of `lambda_r`. With
    /// multiplicity above one `v_r` is one vector of the eigenspace.
    pub lambda_r_multiplicity: usize,
    pub t_prime_star: f64,
    /// `|T'(u*)| lambda_r`.
    pub condition_value: f64,
    /// Whether the reduced graph is two-colourable.
    pub assumption1: bool,
    pub verdict: Verdict,
}

impl ExistenceCertificate {
    /// Smallest `|T'(u*)|` that certifies this quotient, `-1 / lambda_r`;
    /// `None` when `lambda_r` is not negative beyond rounding.
    pub fn slope_threshold(&self) -> Option<f64> {
        (self.lambda_r < -CONDITION_BAND).then(|| -1.0 / self.lambda_r)
    }
}

/// Evaluates the eigenvalue test on a quotient.
pub fn certify<M: StaticMap + ?Sized>(
    q: &QuotientModel,
    model: &M,
) -> Result<ExistenceCertificate, ExistenceError> {
    let fp = fixed_point(model);
    let t_prime_star = model.slope(fp.u_star);
    let spec = eigen_reversible(&q.pbar, &q.dbar)?;
    let lambda_r = spec.min();
    let mut v_r = spec.vectors.as_ref().unwrap().last().unwrap().clone();
    let top = norm_inf(&v_r);
    v_r.iter_mut().for_each(|x| *x /= top);
    let condition_value = t_prime_star.abs() * lambda_r;
    let assumption1 = q.reduced_bipartite.is_some();
    let verdict = if !assumption1 {
        Verdict::AssumptionFailed
    } else if condition_value < -1.0 - CONDITION_BAND {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    Ok(ExistenceCertificate {
        u_star: fp.u_star,
        lambda_r_multiplicity: spec.min_multiplicity(1e-9),
        quotient_spectrum: spec.values,
        lambda_r,
        v_r,
        t_prime_star,
        condition_value,
        assumption1,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Damped Newton, falling back to the ODE route if only the homogeneous
    /// root is found.
    Newton,
    /// Integrate the auxiliary system `z' = -z + pbar T_r(z)` to rest.
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Newton,
    Ode,
    /// No solve attempted; homogeneous state returned.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveWarning {
    /// The certificate was not `Certified`; the homogeneous root is returned.
    NotCertified,
    /// Newton found only the homogeneous root; the ODE route supplied the
    /// answer.
    NewtonFellBack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub z: Vec<f64>,
    pub residual_reduced: f64,
    pub homogeneous: bool,
    pub method: SolveMethod,
    pub warning: Option<SolveWarning>,
    /// Other nonhomogeneous roots found from the opposite start.
    pub alternatives: Vec<Vec<f64>>,
}

/// Progress of a long reduced solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveProgress {
    pub steps: usize,
    pub derivative_norm: f64,
}

fn reduced_residual<M: StaticMap + ?Sized>(pbar: &Matrix, model: &M, z: &[f64]) -> Vec<f64> {
    let tz: Vec<f64> = z.iter().map(|&x| model.value(x)).collect();
    let ptz = pbar.mul_vec(&tz);
    z.iter().zip(&ptz).map(|(a, b)| a - b).collect()
}

fn is_homogeneous(z: &[f64], u_star: f64) -> bool {
    let (lo, hi) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    hi - lo <= HOMOGENEOUS_SPREAD * u_star
}

fn newton<M: StaticMap + ?Sized>(pbar: &Matrix, model: &M, z0: &[f64]) -> Option<Vec<f64>> {
    let r = z0.len();
    let mut z = z0.to_vec();
    let mut g = reduced_residual(pbar, model, &z);
    let mut norm = norm_inf(&g);
    for _ in 0..NEWTON_MAX_ITERS {
        if norm < 1e-15 {
            break;
        }
        let slopes: Vec<f64> = z.iter().map(|&x| model.slope(x)).collect();
        let j = Matrix::from_fn(r, r, |a, b| {
            let id = if a == b { 1.0 } else { 0.0 };
            id - pbar[(a, b)] * slopes[b]
        });
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let dz = j.solve(&rhs)?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..NEWTON_MAX_HALVINGS {
            let zn: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + step * b).collect();
            if zn.iter().all(|&x| x >= 0.0) {
                let gn = reduced_residual(pbar, model, &zn);
                let nn = norm_inf(&gn);
                if nn < norm {
                    z = zn;
                    g = gn;
                    norm = nn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (norm < ROOT_TOL).then_some(z)
}

/// Checks that `R DF(z*) R` has nonnegative off-diagonal entries, with `R`
/// the sign flip by reduced-graph side and `DF(z*) = -I + T'(u*) pbar`.
pub fn check_cooperative(q: &QuotientModel, t_prime_star: f64) -> Result<(), ExistenceError> {
    let r = q.r();
    let flip = q.sign_flip().unwrap_or_else(|| vec![1.0; r]);
    let df = Matrix::from_fn(r, r, |i, j| {
        let id = if i == j { -1.0 } else { 0.0 };
        id + t_prime_star * q.pbar[(i, j)]
    });
    let j = df.scale(&flip, &flip);
    for a in 0..r {
        for b in 0..r {
            if a != b && j[(a, b)] < 0.0 {
                return Err(ExistenceError::NotCooperative(a, b));
            }
        }
    }
    Ok(())
}

fn integrate_auxiliary<M: StaticMap + ?Sized>(
    pbar: &Matrix,
    model: &M,
    z0: &[f64],
    progress: &mut dyn FnMut(SolveProgress),
) -> Option<Vec<f64>> {
    let f = |z: &[f64]| -> Vec<f64> { reduced_residual(pbar, model, z).iter().map(|x| -x).collect() };
    let axpy = |z: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        z.iter().zip(k).map(|(a, b)| (a + h * b).max(0.0)).collect()
    };
    let h = ODE_STEP;
    let mut z = z0.to_vec();
    for step in 0..ODE_MAX_STEPS {
        let k1 = f(&z);
        let dn = norm_inf(&k1);
        if dn < ODE_TOL {
            return Some(z);
        }
        if step % 100_000 == 0 && step > 0 {
            progress(SolveProgress {
                steps: step,
                derivative_norm: dn,
            });
        }
        let k2 = f(&axpy(&z, &k1, 0.5 * h));
        let k3 = f(&axpy(&z, &k2, 0.5 * h));
        let k4 = f(&axpy(&z, &k3, h));
        for i in 0..z.len() {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    None
}

/// Solves the reduced equation for a nonhomogeneous root.
pub fn solve_reduced<M: StaticMap + ?Sized>(
    q: &QuotientModel,
    model: &M,
    cert: &ExistenceCertificate,
    strategy: Strategy,
) -> Result<ReducedSolution, ExistenceError> {
    solve_reduced_with_progress(q, model, cert, strategy, &mut |_| {})
}

pub fn solve_reduced_with_progress<M: StaticMap + ?Sized>(
    q: &QuotientModel,
    model: &M,
    cert: &ExistenceCertificate,
    strategy: Strategy,
    progress: &mut dyn FnMut(SolveProgress),
) -> Result<ReducedSolution, ExistenceError> {
    let r = q.r();
    let u_star = cert.u_star;
    if cert.v_r.len() != r {
        return Err(ExistenceError::DimensionMismatch {
            expected: r,
            got: cert.v_r.len(),
        });
    }
    if cert.verdict != Verdict::Certified {
        let z = vec![u_star; r];
        return Ok(ReducedSolution {
            residual_reduced: norm_inf(&reduced_residual(&q.pbar, model, &z)),
            z,
            homogeneous: true,
            method: SolveMethod::Homogeneous,
            warning: Some(SolveWarning::NotCertified),
            alternatives: Vec::new(),
        });
    }
    let eps = START_EPS * u_star;
    let starts: Vec<Vec<f64>> = [1.0, -1.0]
        .iter()
        .map(|s| cert.v_r.iter().map(|v| (u_star + s * eps * v).max(0.0)).collect())
        .collect();

    let collect = |roots: Vec<Option<Vec<f64>>>| -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for z in roots.into_iter().flatten() {
            if is_homogeneous(&z, u_star) {
                continue;
            }
            if out.iter().all(|o| max_abs_diff(o, &z) > 1e-8) {
                out.push(z);
            }
        }
        // canonical choice: lexicographically largest, so z_1 > z_2 for
        // symmetric pairs
        out.sort_by(|a, b| {
            for (x, y) in a.iter().zip(b) {
                match y.total_cmp(x) {
                    core::cmp::Ordering::Equal => continue,
                    o => return o,
                }
            }
            core::cmp::Ordering::Equal
        });
        out
    };

    let mut method = SolveMethod::Newton;
    let mut warning = None;
    let mut roots = Vec::new();
    if strategy == Strategy::Newton {
        roots = collect(starts.iter().map(|s| newton(&q.pbar, model, s)).collect());
        if roots.is_empty() {
            warning = Some(SolveWarning::NewtonFellBack);
        }
    }
    if roots.is_empty() {
        method = SolveMethod::Ode;
        check_cooperative(q, cert.t_prime_star)?;
        let raw: Vec<Option<Vec<f64>>> = starts
            .iter()
            .map(|s| integrate_auxiliary(&q.pbar, model, s, progress))
            .collect();
        if raw.iter().all(Option::is_none) {
            return Err(ExistenceError::NoConvergence);
        }
        roots = collect(raw);
    }
    if roots.is_empty() {
        return Err(ExistenceError::OnlyHomogeneousFound);
    }
    let z = roots.remove(0);
    Ok(ReducedSolution {
        residual_reduced: norm_inf(&reduced_residual(&q.pbar, model, &z)),
        z,
        homogeneous: false,
        method,
        warning,
        alternatives: roots,
    })
}

/// A reduced root lifted to every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSolution {
    pub z: Vec<f64>,
    /// Steady inputs `u_i = z_j` for `i` in class `j`.
    pub u: Vec<f64>,
    /// Steady states `x_i = S(u_i) = T(u_i)`.
    pub x: Vec<f64>,
    pub residual_reduced: f64,
    /// `||u - P T_N(u)||_inf`.
    pub residual_full: f64,
    pub homogeneous: bool,
    pub method: SolveMethod,
    pub warning: Option<SolveWarning>,
    pub alternatives: Vec<Vec<f64>>,
}

/// Lifts class values `z` to `(u, x, ||u - P T_N(u)||_inf)`.
pub fn lift_values<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    pi: &Partition,
    z: &[f64],
    model: &M,
) -> Result<(Vec<f64>, Vec<f64>, f64), ExistenceError> {
    if z.len() != pi.r() {
        return Err(ExistenceError::DimensionMismatch {
            expected: pi.r(),
            got: z.len(),
        });
    }
    if pi.n() != sa.n() {
        return Err(ExistenceError::DimensionMismatch {
            expected: sa.n(),
            got: pi.n(),
        });
    }
    let u = pi.lift(z);
    let x: Vec<f64> = u.iter().map(|&v| model.value(v)).collect();
    let pu = sa.apply(&x);
    let residual = max_abs_diff(&u, &pu);
    Ok((u, x, residual))
}

pub fn lift<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    pi: &Partition,
    reduced: &ReducedSolution,
    model: &M,
) -> Result<PatternSolution, ExistenceError> {
    let (u, x, residual_full) = lift_values(sa, pi, &reduced.z, model)?;
    Ok(PatternSolution {
        z: reduced.z.clone(),
        u,
        x,
        residual_reduced: reduced.residual_reduced,
        residual_full,
        homogeneous: reduced.homogeneous,
        method: reduced.method,
        warning: reduced.warning,
        alternatives: reduced.alternatives.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::HillMap;
    use crate::lattice::Lattice;
    use crate::partition::quotient;

    fn pair_quotient() -> QuotientModel {
        let g = Lattice::Path(2).generate().unwrap();
        let sa = g.scaled_adjacency().unwrap();
        quotient(&sa, &Partition::singletons(2)).unwrap()
    }

    #[test]
    fn certify_bipartite_pair() {
        let q = pair_quotient();
        let c = certify(&q, &HillMap::symmetric(6.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert!((c.lambda_r + 1.0).abs() < 1e-12);
        assert!((c.condition_value + 3.0).abs() < 1e-12);
        assert_eq!(c.slope_threshold(), Some(1.0 / -c.lambda_r));
        let c = certify(&q, &HillMap::symmetric(2.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn uncertified_returns_homogeneous() {
        let q = pair_quotient();
        let m = HillMap::symmetric(2.0);
        let c = certify(&q, &m).unwrap();
        let s = solve_reduced(&q, &m, &c, Strategy::Newton).unwrap();
        assert_eq!(s.z, vec![1.0, 1.0]);
        assert!(s.homogeneous);
        assert_eq!(s.warning, Some(SolveWarning::NotCertified));
    }

    #[test]
    fn pair_root_is_swapped_fixed_point() {
        let q = pair_quotient();
        let m = HillMap::symmetric(6.0);
        let c = certify(&q, &m).unwrap();
        for strategy in [Strategy::Newton, Strategy::Ode] {
            let s = solve_reduced(&q, &m, &c, strategy).unwrap();
            assert!(!s.homogeneous);
            assert!(s.z[0] > s.z[1]);
            assert!((s.z[0] - m.value(s.z[1])).abs() < 1e-10);
            assert!((s.z[1] - m.value(s.z[0])).abs() < 1e-10);
            assert_eq!(s.alternatives.len(), 1);
        }
    }

    #[test]
    fn lift_dimension_checked() {
        let g = Lattice::Path(2).generate().unwrap();
        let sa = g.scaled_adjacency().unwrap();
        let m = HillMap::symmetric(6.0);
        assert!(matches!(
            lift_values(&sa, &Partition::singletons(2), &[1.0], &m),
            Err(ExistenceError::DimensionMismatch { .. })
        ));
        let (u, _, res) = lift_values(&sa, &Partition::trivial(2), &[1.0], &m).unwrap();
        assert_eq!(u, vec![1.0, 1.0]);
        assert!(res < 1e-12);
    }
}
