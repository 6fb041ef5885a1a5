//! Local stability of lifted patterns.
//!
//! Three independent routes:
//!
//! * the spectrum of the full Jacobian `(-I + diag(T'(u)) P) / tau`;
//! * the block split of that Jacobian into the representative block
//!   `-I + diag(T'(z)) pbar` and the transverse block `-I + diag(t_D) M`;
//! * the small-gain test `rho(pbar Γbar) < 1`, with per-class gains
//!   `γ_j = -T'(z_j)`, which is equivalent to `rho(P Γ) < 1`.
//!
//! The transverse spectrum is computed without `M`: the class-constant
//! subspace is invariant under the Jacobian, so in the symmetric
//! coordinates its orthogonal complement is invariant too, and the
//! restriction there has the transverse block's spectrum.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::cell::{dc_gain, CellError, StaticMap};
use crate::graph::ScaledAdjacency;
use crate::matrix::{max_abs_diff, Matrix};
use crate::partition::{BlockDecomposition, Partition, QuotientModel};
use crate::spectral::{
    complement_spectrum, gain_weighted_perron, gershgorin_abscissa_bound, multiset_distance,
    multiset_union, reversible_symmetric_form, slope_coupled_spectrum, spectral_radius_nonneg,
    SpectralError,
};

/// Abscissas and spectral radii within this distance of the stability
/// boundary are reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;
/// Largest `||u - P T_N(u)||_inf` accepted as a steady state.
pub const STEADY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("pattern is not a steady state (residual {0:e})")]
    NotSteadyState(f64),
    #[error("transverse coordinates are not in class-major order")]
    OrderingMismatch,
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    Marginal,
}

impl StabilityVerdict {
    pub fn from_abscissa(a: f64) -> Self {
        if a < -MARGINAL_BAND {
            StabilityVerdict::Stable
        } else if a > MARGINAL_BAND {
            StabilityVerdict::Unstable
        } else {
            StabilityVerdict::Marginal
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityVerdict::Stable => "STABLE",
            StabilityVerdict::Unstable => "UNSTABLE",
            StabilityVerdict::Marginal => "MARGINAL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallGainVerdict {
    CertifiedStable,
    NotCertified,
}

impl SmallGainVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            SmallGainVerdict::CertifiedStable => "CERTIFIED_STABLE",
            SmallGainVerdict::NotCertified => "NOT_CERTIFIED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullStability {
    pub abscissa: f64,
    pub verdict: StabilityVerdict,
    /// Jacobian eigenvalues, descending; empty when `approximate`.
    pub spectrum: Vec<f64>,
    /// Set when some slope is zero and only a Gershgorin bound on the
    /// abscissa is available.
    pub approximate: bool,
}

fn slopes<M: StaticMap + ?Sized>(model: &M, u: &[f64]) -> Vec<f64> {
    u.iter().map(|&x| model.slope(x)).collect()
}

/// Spectrum of the network Jacobian at the steady inputs `u`.
pub fn full_jacobian_stability<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    model: &M,
    u: &[f64],
) -> Result<FullStability, StabilityError> {
    if u.len() != sa.n() {
        return Err(StabilityError::DimensionMismatch {
            expected: sa.n(),
            got: u.len(),
        });
    }
    let tu: Vec<f64> = u.iter().map(|&x| model.value(x)).collect();
    let residual = max_abs_diff(u, &sa.apply(&tu));
    if !(residual < STEADY_TOL) {
        return Err(StabilityError::NotSteadyState(residual));
    }
    let tau = model.tau();
    let t = slopes(model, u);
    match slope_coupled_spectrum(&sa.p, &sa.d, &t) {
        Ok(sp) => {
            let spectrum: Vec<f64> = sp.values.iter().map(|l| l / tau).collect();
            let abscissa = spectrum[0];
            Ok(FullStability {
                abscissa,
                verdict: StabilityVerdict::from_abscissa(abscissa),
                spectrum,
                approximate: false,
            })
        }
        Err(SpectralError::NonNegativeSlope(_)) => {
            let j = Matrix::from_fn(sa.n(), sa.n(), |i, k| {
                let id = if i == k { -1.0 } else { 0.0 };
                (id + t[i] * sa.p[(i, k)]) / tau
            });
            let bound = gershgorin_abscissa_bound(&j);
            // an upper bound only certifies stability
            let verdict = if bound < -MARGINAL_BAND {
                StabilityVerdict::Stable
            } else {
                StabilityVerdict::Marginal
            };
            Ok(FullStability {
                abscissa: bound,
                verdict,
                spectrum: Vec::new(),
                approximate: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Spectrum of `diag(g) P` restricted to the complement of the
/// class-constant subspace, for a class-constant positive `g`.
///
/// With `g = 1` this is the spectrum of the transverse block `M`.
pub fn transverse_spectrum(
    sa: &ScaledAdjacency,
    pi: &Partition,
    g: &[f64],
) -> Result<Vec<f64>, StabilityError> {
    let n = sa.n();
    let (s, a) = reversible_symmetric_form(&sa.p, &sa.d, g)?;
    let invariant: Vec<Vec<f64>> = pi
        .classes()
        .iter()
        .map(|class| {
            let mut v = vec![0.0; n];
            for &i in class {
                v[i] = a[i];
            }
            let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    let candidates: Vec<Vec<f64>> = pi
        .classes()
        .iter()
        .flat_map(|c| c[1..].iter().copied())
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            e
        })
        .collect();
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    Ok(complement_spectrum(&s, &invariant, &candidates)?.values)
}

/// Spectrum of the transverse block `M` of the decomposition.
pub fn m_block_spectrum(
    sa: &ScaledAdjacency,
    decomp: &BlockDecomposition,
) -> Result<Vec<f64>, StabilityError> {
    transverse_spectrum(sa, &decomp.partition, &vec![1.0; sa.n()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockStability {
    /// Spectrum of `(-I + diag(T'(z)) pbar) / tau`.
    pub representative: Vec<f64>,
    /// Spectrum of `(-I + diag(t_D) M) / tau`.
    pub transverse: Vec<f64>,
    /// Spectrum of the full Jacobian.
    pub full: Vec<f64>,
    /// Multiset distance between the union of the block spectra and `full`.
    pub consistency: f64,
    /// `|trace of the transverse block - sum of transverse eigenvalues|`,
    /// comparing the explicit `M` against the restricted spectrum.
    pub transverse_trace_defect: f64,
}

impl BlockStability {
    pub fn abscissa(&self) -> f64 {
        self.representative
            .iter()
            .chain(&self.transverse)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn class_degrees(sa: &ScaledAdjacency, pi: &Partition) -> Vec<f64> {
    let mut dbar = vec![0.0; pi.r()];
    for (v, &d) in sa.d.iter().enumerate() {
        dbar[pi.class_of(v)] += d;
    }
    dbar
}

/// Stability matrices of the representative and transverse subsystems.
pub fn block_stability<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    decomp: &BlockDecomposition,
    model: &M,
    z: &[f64],
) -> Result<BlockStability, StabilityError> {
    let pi = &decomp.partition;
    if z.len() != pi.r() {
        return Err(StabilityError::DimensionMismatch {
            expected: pi.r(),
            got: z.len(),
        });
    }
    let expected: Vec<usize> = pi
        .classes()
        .iter()
        .flat_map(|c| c[1..].iter().copied())
        .collect();
    if decomp.non_representatives != expected {
        return Err(StabilityError::OrderingMismatch);
    }
    let tau = model.tau();
    let tbar = slopes(model, z);
    let t = pi.lift(&tbar);
    let dbar = class_degrees(sa, pi);

    let representative: Vec<f64> = slope_coupled_spectrum(&decomp.pbar_block, &dbar, &tbar)?
        .values
        .iter()
        .map(|l| l / tau)
        .collect();
    let g: Vec<f64> = t.iter().map(|x| x.abs()).collect();
    let mut transverse: Vec<f64> = transverse_spectrum(sa, pi, &g)?
        .iter()
        .map(|mu| (-1.0 - mu) / tau)
        .collect();
    transverse.sort_by(|a, b| b.total_cmp(a));
    let full: Vec<f64> = slope_coupled_spectrum(&sa.p, &sa.d, &t)?
        .values
        .iter()
        .map(|l| l / tau)
        .collect();
    let consistency = multiset_distance(&multiset_union(&representative, &transverse), &full);

    let td: Vec<f64> = decomp
        .non_representatives
        .iter()
        .map(|&k| t[k])
        .collect();
    let m_trace: f64 = (0..td.len())
        .map(|i| (-1.0 + td[i] * decomp.m_block[(i, i)]) / tau)
        .sum();
    let transverse_trace_defect = (m_trace - transverse.iter().sum::<f64>()).abs();

    Ok(BlockStability {
        representative,
        transverse,
        full,
        consistency,
        transverse_trace_defect,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallGain {
    /// Per-class gains `γ_j = -T'(z_j)`.
    pub gamma_bar: Vec<f64>,
    /// Per-cell gains, constant on classes.
    pub gamma: Vec<f64>,
    /// `rho(P Γ)`, from the symmetric form of `Γ P`.
    pub rho_full: f64,
    /// `rho(pbar Γbar)`, by power iteration.
    pub rho_reduced: f64,
    /// Perron vector of `P Γ`, unit max-norm.
    pub perron_full: Vec<f64>,
    /// Perron vector of `pbar Γbar`, unit max-norm.
    pub perron_reduced: Vec<f64>,
    pub verdict: SmallGainVerdict,
    /// Whether `I - Γ P` passed the nonsingular M-matrix check.
    pub m_matrix: bool,
}

pub fn small_gain<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    q: &QuotientModel,
    model: &M,
    z: &[f64],
) -> Result<SmallGain, StabilityError> {
    let gamma_bar = z
        .iter()
        .map(|&zj| dc_gain(model, zj))
        .collect::<Result<Vec<_>, _>>()?;
    small_gain_with(sa, q, &gamma_bar)
}

/// Small-gain test for arbitrary positive per-class gains.
pub fn small_gain_with(
    sa: &ScaledAdjacency,
    q: &QuotientModel,
    gamma_bar: &[f64],
) -> Result<SmallGain, StabilityError> {
    let pi = &q.partition;
    if gamma_bar.len() != pi.r() {
        return Err(StabilityError::DimensionMismatch {
            expected: pi.r(),
            got: gamma_bar.len(),
        });
    }
    let gamma = pi.lift(gamma_bar);
    let reduced = spectral_radius_nonneg(&q.pbar.scale_cols(gamma_bar))?;
    let (rho_full, x) = gain_weighted_perron(&sa.p, &sa.d, &gamma)?;
    // Γ P x = ρ x  =>  P Γ (Γ^{-1} x) = ρ Γ^{-1} x
    let mut perron_full: Vec<f64> = x.iter().zip(&gamma).map(|(a, g)| a / g).collect();
    let top = perron_full.iter().cloned().fold(0.0, f64::max);
    perron_full.iter_mut().for_each(|v| *v /= top);
    let verdict = if reduced.rho < 1.0 - MARGINAL_BAND {
        SmallGainVerdict::CertifiedStable
    } else {
        SmallGainVerdict::NotCertified
    };
    Ok(SmallGain {
        gamma_bar: gamma_bar.to_vec(),
        m_matrix: is_nonsingular_m_matrix(&sa.p.scale_rows(&gamma)),
        gamma,
        rho_full,
        rho_reduced: reduced.rho,
        perron_full,
        perron_reduced: reduced.vector,
        verdict,
    })
}

/// Whether `I - A` is a nonsingular M-matrix for a nonnegative `A`: all
/// leading principal minors positive, checked through the pivots of an
/// unpivoted LU factorisation.
pub fn is_nonsingular_m_matrix(a: &Matrix) -> bool {
    let n = a.rows();
    let mut m = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - a[(i, j)]);
    for k in 0..n {
        let piv = m[(k, k)];
        if !(piv > 0.0) {
            return false;
        }
        for i in (k + 1)..n {
            let f = m[(i, k)] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    true
}

/// Which routes to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Methods {
    pub full: bool,
    pub block: bool,
    pub small_gain: bool,
}

impl Methods {
    pub const ALL: Methods = Methods {
        full: true,
        block: true,
        small_gain: true,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub full: Option<FullStability>,
    pub blocks: Option<BlockStability>,
    pub small_gain: Option<SmallGain>,
}

impl StabilityReport {
    /// `|rho_full - rho_reduced|`, when the small-gain route ran.
    pub fn lifting_gap(&self) -> Option<f64> {
        self.small_gain
            .as_ref()
            .map(|s| (s.rho_full - s.rho_reduced).abs())
    }
}

/// Runs the selected routes on a lifted pattern.
pub fn analyze<M: StaticMap + ?Sized>(
    sa: &ScaledAdjacency,
    q: &QuotientModel,
    decomp: Option<&BlockDecomposition>,
    model: &M,
    z: &[f64],
    methods: Methods,
) -> Result<StabilityReport, StabilityError> {
    let u = q.partition.lift(z);
    let full = methods
        .full
        .then(|| full_jacobian_stability(sa, model, &u))
        .transpose()?;
    let blocks = match (methods.block, decomp) {
        (true, Some(d)) => Some(block_stability(sa, d, model, z)?),
        (true, None) => {
            let d = crate::partition::block_decompose(sa, &q.partition)
                .expect("quotient partition is equitable");
            Some(block_stability(sa, &d, model, z)?)
        }
        (false, _) => None,
    };
    let small_gain = methods
        .small_gain
        .then(|| small_gain(sa, q, model, z))
        .transpose()?;
    Ok(StabilityReport {
        full,
        blocks,
        small_gain,
    })
}
