//! Eigenvalue machinery.
//!
//! Every matrix this crate needs a spectrum for is similar to a symmetric
//! one. A row-stochastic `P` with degrees `d` satisfies detailed balance
//! `d_i p_ij = d_j p_ji`, so for any positive diagonal `g` the matrix
//! `diag(g) P` is similar, through `diag(sqrt(d / g))`, to the symmetric
//! matrix with entries `w_ij sqrt(g_i g_j / (d_i d_j))`. That covers `P`
//! itself (`g = 1`), the gain-weighted `Γ P`, and the one-state Jacobian
//! `-I + diag(t) P` with `t < 0` (`g = |t|`). All of them go through the
//! cyclic Jacobi solver below.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::matrix::{norm_inf, Matrix};

pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const POWER_MAX_ITERS: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("detailed balance violated by {0:e}")]
    DetailedBalanceViolated(f64),
    #[error("matrix has a negative entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
    #[error("matrix is reducible")]
    Reducible,
    #[error("slope at cell {0} is not negative")]
    NonNegativeSlope(usize),
    #[error("weights must be positive")]
    NonpositiveWeight,
}

/// Real spectrum sorted descending, optionally with matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Number of eigenvalues within `tol` of the smallest one.
    pub fn min_multiplicity(&self, tol: f64) -> usize {
        let m = self.min();
        self.values.iter().filter(|&&v| (v - m).abs() <= tol).count()
    }

    fn sorted(mut pairs: Vec<(f64, Vec<f64>)>) -> Self {
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let values = pairs.iter().map(|p| p.0).collect();
        let vectors = pairs.into_iter().map(|p| p.1).collect();
        Self {
            values,
            vectors: Some(vectors),
        }
    }
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is
/// positive.
fn orient(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn normalize2(v: &mut [f64]) {
    let n = libm::sqrt(v.iter().map(|x| x * x).sum());
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius norm drops below `1e-12 ||A||_F`.
pub fn sym_eigen(a: &Matrix) -> Result<Spectrum, SpectralError> {
    if !a.is_square() {
        return Err(SpectralError::NotSquare(a.rows(), a.cols()));
    }
    let asym = a.asymmetry();
    if asym >= 1e-10 {
        return Err(SpectralError::NotSymmetric(asym));
    }
    let n = a.rows();
    let mut m = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let scale = m.frobenius();
    let target = 1e-12 * scale;
    let off = |m: &Matrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        libm::sqrt(s)
    };
    let mut sweeps = 0;
    while off(&m) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(SpectralError::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // smaller root of t^2 + 2 theta t - 1 = 0
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let pairs = (0..n)
        .map(|i| {
            let mut col: Vec<f64> = (0..n).map(|k| v[(k, i)]).collect();
            orient(&mut col);
            (m[(i, i)], col)
        })
        .collect();
    Ok(Spectrum::sorted(pairs))
}

/// Symmetric matrix similar to `diag(g) P` for a reversible row-stochastic
/// `P` with stationary weights `d`, together with the similarity vector
/// `a = sqrt(d / g)`: `S = diag(a) diag(g) P diag(a)^{-1}`.
pub fn reversible_symmetric_form(
    p: &Matrix,
    d: &[f64],
    g: &[f64],
) -> Result<(Matrix, Vec<f64>), SpectralError> {
    if !p.is_square() {
        return Err(SpectralError::NotSquare(p.rows(), p.cols()));
    }
    let n = p.rows();
    assert_eq!(d.len(), n);
    assert_eq!(g.len(), n);
    if d.iter().chain(g).any(|&x| !(x > 0.0)) {
        return Err(SpectralError::NonpositiveWeight);
    }
    let defect = detailed_balance_defect(p, d);
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    if defect > 1e-10 * dmax.max(1.0) {
        return Err(SpectralError::DetailedBalanceViolated(defect));
    }
    let a: Vec<f64> = d.iter().zip(g).map(|(di, gi)| libm::sqrt(di / gi)).collect();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            // average the two triangles so S is exactly symmetric
            let sij = a[i] * g[i] * p[(i, j)] / a[j];
            let sji = a[j] * g[j] * p[(j, i)] / a[i];
            let v = 0.5 * (sij + sji);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok((s, a))
}

/// Largest `|d_i p_ij - d_j p_ji|`.
pub fn detailed_balance_defect(p: &Matrix, d: &[f64]) -> f64 {
    p.scale_rows(d).asymmetry()
}

/// Spectrum and eigenvectors of a reversible row-stochastic matrix.
///
/// Eigenvectors are eigenvectors of `P` itself (not of its symmetric form),
/// scaled to unit Euclidean norm.
pub fn eigen_reversible(p: &Matrix, d: &[f64]) -> Result<Spectrum, SpectralError> {
    let (s, a) = reversible_symmetric_form(p, d, &vec![1.0; d.len()])?;
    let sym = sym_eigen(&s)?;
    let pairs = sym
        .values
        .iter()
        .zip(sym.vectors.unwrap())
        .map(|(&l, y)| {
            let mut v: Vec<f64> = y.iter().zip(&a).map(|(yi, ai)| yi / ai).collect();
            normalize2(&mut v);
            orient(&mut v);
            (l, v)
        })
        .collect();
    Ok(Spectrum::sorted(pairs))
}

fn strongly_connected(m: &Matrix) -> bool {
    let n = m.rows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let e = if forward { m[(i, j)] } else { m[(j, i)] };
                if e > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Perron root and positive Perron vector of a nonnegative irreducible
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Perron {
    pub rho: f64,
    /// Scaled to unit max-norm.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Power iterations tried before switching to Noda iteration.
pub const POWER_PHASE_ITERS: usize = 500;

/// Collatz–Wielandt bounds `min_i (Mv)_i / v_i <= rho <= max_i (Mv)_i / v_i`.
fn cw_bounds(m: &Matrix, v: &[f64]) -> (f64, f64, Vec<f64>) {
    let w = m.mul_vec(v);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for (wi, vi) in w.iter().zip(v) {
        let ratio = wi / vi;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo, hi, w)
}

fn perron_done(v: Vec<f64>, lo: f64, hi: f64, iterations: usize) -> Perron {
    let mut vector = v;
    let top = norm_inf(&vector);
    vector.iter_mut().for_each(|x| *x /= top);
    Perron {
        rho: 0.5 * (hi + lo),
        vector,
        iterations,
    }
}

/// Perron root by power iteration on `M + sI`, `s` the largest row sum,
/// from the all-ones vector.
///
/// The shift keeps periodic matrices (bipartite supports) from
/// oscillating. Stops once the Collatz–Wielandt bounds agree to `1e-12`
/// relative. When the shift dwarfs `rho` the power phase stalls; after
/// [`POWER_PHASE_ITERS`] steps the iterate is handed to Noda's inverse
/// iteration `v <- (hi I - M)^{-1} v`, which keeps `v` positive and
/// converges superlinearly.
pub fn spectral_radius_nonneg(m: &Matrix) -> Result<Perron, SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare(m.rows(), m.cols()));
    }
    let n = m.rows();
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] < 0.0 {
                return Err(SpectralError::NegativeEntry(i, j));
            }
        }
    }
    if n == 1 {
        return Ok(Perron {
            rho: m[(0, 0)],
            vector: vec![1.0],
            iterations: 0,
        });
    }
    if !strongly_connected(m) {
        return Err(SpectralError::Reducible);
    }
    let shift = m.row_sums().into_iter().fold(0.0, f64::max);
    let mut v = vec![1.0; n];
    for it in 1..=POWER_PHASE_ITERS {
        let (lo, hi, w) = cw_bounds(m, &v);
        if hi - lo <= 1e-12 * hi {
            return Ok(perron_done(v, lo, hi, it));
        }
        let mut next: Vec<f64> = w.iter().zip(&v).map(|(wi, vi)| wi + shift * vi).collect();
        let top = norm_inf(&next);
        next.iter_mut().for_each(|x| *x /= top);
        v = next;
    }
    let mut best = (f64::INFINITY, 0.0, 0.0, v.clone());
    for it in (POWER_PHASE_ITERS + 1)..=POWER_MAX_ITERS {
        let (lo, hi, _) = cw_bounds(m, &v);
        if hi - lo < best.0 {
            best = (hi - lo, lo, hi, v.clone());
        }
        if hi - lo <= 1e-12 * hi {
            return Ok(perron_done(v, lo, hi, it));
        }
        let a = Matrix::from_fn(n, n, |i, j| if i == j { hi } else { 0.0 } - m[(i, j)]);
        match a.solve_with_pivot_tol(&v, 0.0) {
            Some(w) if w.iter().all(|&x| x > 0.0 && x.is_finite()) => {
                let top = norm_inf(&w);
                v = w.iter().map(|x| x / top).collect();
            }
            // shift numerically at rho: the best iterate is as good as it gets
            _ => {
                let (gap, lo, hi, v) = best;
                if gap <= 1e-10 * hi {
                    return Ok(perron_done(v, lo, hi, it));
                }
                return Err(SpectralError::NoConvergence(it));
            }
        }
    }
    Err(SpectralError::NoConvergence(POWER_MAX_ITERS))
}

/// Perron root and vector of `diag(gamma) P` through its symmetric form.
///
/// The returned vector is an eigenvector of `diag(gamma) P`, positive and
/// max-normalised.
pub fn gain_weighted_perron(
    p: &Matrix,
    d: &[f64],
    gamma: &[f64],
) -> Result<(f64, Vec<f64>), SpectralError> {
    let (s, a) = reversible_symmetric_form(p, d, gamma)?;
    let sym = sym_eigen(&s)?;
    let y = &sym.vectors.as_ref().unwrap()[0];
    let mut v: Vec<f64> = y.iter().zip(&a).map(|(yi, ai)| yi / ai).collect();
    orient(&mut v);
    let top = norm_inf(&v);
    v.iter_mut().for_each(|x| *x /= top);
    Ok((sym.max(), v))
}

/// Spectrum of `-I + diag(t) P` for slopes `t < 0`.
///
/// `diag(t) P = -diag(|t|) P` is similar to `-S` with `S` symmetric, so the
/// spectrum is `-1 - spec(S)`.
pub fn slope_coupled_spectrum(
    p: &Matrix,
    d: &[f64],
    t: &[f64],
) -> Result<Spectrum, SpectralError> {
    if let Some(i) = t.iter().position(|&x| !(x < 0.0)) {
        return Err(SpectralError::NonNegativeSlope(i));
    }
    let g: Vec<f64> = t.iter().map(|x| x.abs()).collect();
    let (s, _) = reversible_symmetric_form(p, d, &g)?;
    let sym = sym_eigen(&s)?;
    let mut values: Vec<f64> = sym.values.iter().map(|l| -1.0 - l).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum {
        values,
        vectors: None,
    })
}

/// Spectrum of the one-state network Jacobian `-I + diag(t) P` (time
/// constant 1).
pub fn jacobian_spectrum(
    sa: &crate::graph::ScaledAdjacency,
    t: &[f64],
) -> Result<Spectrum, SpectralError> {
    slope_coupled_spectrum(&sa.p, &sa.d, t)
}

/// Gershgorin upper bound on the spectral abscissa of a square matrix.
pub fn gershgorin_abscissa_bound(m: &Matrix) -> f64 {
    (0..m.rows())
        .map(|i| {
            let off: f64 = m
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, x)| x.abs())
                .sum();
            m[(i, i)] + off
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spectrum of a symmetric `s` restricted to the orthogonal complement of
/// the span of `invariant`, an `s`-invariant set of orthonormal vectors.
///
/// `candidates` must span the complement together with `invariant`; they are
/// orthogonalised (two passes of modified Gram–Schmidt) in order.
pub fn complement_spectrum(
    s: &Matrix,
    invariant: &[Vec<f64>],
    candidates: &[Vec<f64>],
) -> Result<Spectrum, SpectralError> {
    let n = s.rows();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let mut x = c.clone();
        for _ in 0..2 {
            for b in invariant.iter().chain(basis.iter()) {
                let dot: f64 = x.iter().zip(b).map(|(p, q)| p * q).sum();
                x.iter_mut().zip(b).for_each(|(p, q)| *p -= dot * q);
            }
        }
        normalize2(&mut x);
        basis.push(x);
    }
    let m = basis.len();
    let sb: Vec<Vec<f64>> = basis.iter().map(|b| s.mul_vec(b)).collect();
    let mut proj = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v: f64 = (0..n).map(|k| basis[i][k] * sb[j][k]).sum();
            proj[(i, j)] = v;
            proj[(j, i)] = v;
        }
    }
    let mut sp = sym_eigen(&proj)?;
    sp.vectors = None;
    Ok(sp)
}

/// Max distance between two real multisets under the optimal (sorted)
/// matching; infinite when the sizes differ.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Union of two multisets, sorted descending.
pub fn multiset_union(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = a.iter().chain(b).copied().collect();
    u.sort_by(|x, y| y.total_cmp(x));
    u
}
