//! Per-cell dynamics.
//!
//! Each cell is the one-state system `x' = (-x + T(u)) / tau` with output
//! `y = x`. For a constant input `u` it settles at `S(u) = T(u)`, so the
//! static input/output map is `T` itself. Its linearisation at an input `z`
//! is a first-order lag whose L2-gain is the dc-gain `-T'(z)`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CellError {
    #[error("Hill parameter {name} = {value} is out of range")]
    BadParameter { name: &'static str, value: f64 },
    #[error("negative input {0}")]
    NegativeInput(f64),
    #[error("operating point {0} is not positive")]
    NonpositiveOperatingPoint(f64),
}

/// A positive, bounded, decreasing static input/output map.
pub trait StaticMap {
    fn value(&self, u: f64) -> f64;
    fn slope(&self, u: f64) -> f64;
    /// Least upper bound of the map on `u >= 0`.
    fn upper_bound(&self) -> f64;
    /// Time constant of the one-state cell realising the map.
    fn tau(&self) -> f64 {
        1.0
    }
}

/// Decreasing Hill function `T(u) = A / (1 + (u/K)^h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillMap {
    pub amplitude: f64,
    pub threshold: f64,
    pub exponent: f64,
    pub tau: f64,
}

impl HillMap {
    pub fn new(amplitude: f64, threshold: f64, exponent: f64, tau: f64) -> Result<Self, CellError> {
        let checks = [
            ("A", amplitude, amplitude > 0.0),
            ("K", threshold, threshold > 0.0),
            ("h", exponent, exponent >= 1.0),
            ("tau", tau, tau > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(CellError::BadParameter { name, value });
            }
        }
        Ok(Self {
            amplitude,
            threshold,
            exponent,
            tau,
        })
    }

    /// `A = 2, K = 1, tau = 1`: fixed point `u* = 1` and `|T'(u*)| = h / 2`.
    pub fn symmetric(exponent: f64) -> Self {
        Self::new(2.0, 1.0, exponent, 1.0).expect("valid exponent")
    }

    pub fn t_eval(&self, u: f64) -> Result<f64, CellError> {
        if u < 0.0 {
            return Err(CellError::NegativeInput(u));
        }
        Ok(self.value(u))
    }

    pub fn t_prime(&self, u: f64) -> Result<f64, CellError> {
        if u < 0.0 {
            return Err(CellError::NegativeInput(u));
        }
        Ok(self.slope(u))
    }
}

impl StaticMap for HillMap {
    #[inline]
    fn value(&self, u: f64) -> f64 {
        let s = libm::pow(u / self.threshold, self.exponent);
        self.amplitude / (1.0 + s)
    }

    #[inline]
    fn slope(&self, u: f64) -> f64 {
        let x = u / self.threshold;
        let s = libm::pow(x, self.exponent);
        let ds = libm::pow(x, self.exponent - 1.0);
        -(self.amplitude * self.exponent / self.threshold) * ds / ((1.0 + s) * (1.0 + s))
    }

    fn upper_bound(&self) -> f64 {
        self.amplitude
    }

    fn tau(&self) -> f64 {
        self.tau
    }
}

/// The homogeneous fixed point `T(u*) = u*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub u_star: f64,
    pub residual: f64,
}

/// Unique root of `T(u) - u` on `(0, upper_bound)` by bisection.
///
/// `T(0) > 0` and `T(ub) - ub < 0`, and `T(u) - u` is strictly decreasing,
/// so the root is bracketed and unique.
pub fn fixed_point<M: StaticMap + ?Sized>(m: &M) -> FixedPoint {
    let (mut lo, mut hi) = (0.0_f64, m.upper_bound());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = m.value(mid) - mid;
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick whichever bracket end has the smaller residual
    let rl = (m.value(lo) - lo).abs();
    let rh = (m.value(hi) - hi).abs();
    let u_star = if rl <= rh { lo } else { hi };
    FixedPoint {
        u_star,
        residual: rl.min(rh),
    }
}

/// Right-hand side `(-x + T(u)) / tau` of the one-state cell.
#[inline]
pub fn cell_rhs<M: StaticMap + ?Sized>(m: &M, x: f64, u: f64) -> f64 {
    (-x + m.value(u)) / m.tau()
}

/// Dc-gain `-T'(z)` of the cell linearised at input `z`; equal to its
/// L2-gain.
pub fn dc_gain<M: StaticMap + ?Sized>(m: &M, z: f64) -> Result<f64, CellError> {
    if !(z > 0.0) {
        return Err(CellError::NonpositiveOperatingPoint(z));
    }
    Ok(-m.slope(z))
}
