//! The Lorentz/hyperboloid model: lifting vectors onto the forward sheet,
//! the Lorentzian inner product, and hyperbolic distance.
//!
//! A vector v lifts to (√(1+‖v‖²), v), which lands on the forward sheet
//! S⁺ = { x : x₀² − ‖x̄‖² = 1, x₀ > 0 }. For two sheet points the Lorentzian
//! product B(X,Y) = x₀y₀ − Σ xᵢyᵢ is at least 1, with equality exactly at
//! X = Y, and d(X,Y) = acosh(B(X,Y)) is the hyperbolic distance.

use crate::error::{Error, Result};

/// Relative tolerance for the B ≥ 1 lower bound.
///
/// The product x₀y₀ − Σxᵢyᵢ cancels catastrophically for near-identical
/// points, leaving rounding noise proportional to the x₀y₀ term, so the
/// tolerance scales with max(1, x₀y₀). Values in [1 − tol, 1) are clamped
/// up to 1; below the band the input was not a lifted point and the call
/// fails.
pub const CLAMP_TOL: f64 = 1e-9;

/// Relative width of the band above 1 snapped down to exactly 1.
///
/// Wide enough for accumulated rounding in the self-product (≈ √n·ε·x₀²,
/// well under 1e-12·x₀² at the dimensions in play) so identical points get
/// distance exactly 0, yet far narrower than [`CLAMP_TOL`] so genuinely
/// distinct large-norm points keep their true distance and the metric
/// axioms survive.
pub const SNAP_TOL: f64 = 1e-12;

/// A point on the forward hyperboloid sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint {
    x0: f64,
    spatial: Vec<f64>,
}

impl HyperboloidPoint {
    /// Assemble a point from raw coordinates, verifying sheet membership.
    pub fn from_parts(x0: f64, spatial: Vec<f64>) -> Result<HyperboloidPoint> {
        if !x0.is_finite() || spatial.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidVector);
        }
        let point = HyperboloidPoint { x0, spatial };
        if point.x0 < 1.0 || point.sheet_residual() > CLAMP_TOL {
            return Err(Error::InvalidVector);
        }
        Ok(point)
    }

    #[cfg(test)]
    pub(crate) fn unchecked(x0: f64, spatial: Vec<f64>) -> HyperboloidPoint {
        HyperboloidPoint { x0, spatial }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn spatial(&self) -> &[f64] {
        &self.spatial
    }

    pub fn dim(&self) -> usize {
        self.spatial.len()
    }

    /// |x₀² − ‖x̄‖² − 1| / max(1, x₀²), the forward-sheet membership residual.
    pub fn sheet_residual(&self) -> f64 {
        let norm_sq: f64 = self.spatial.iter().map(|v| v * v).sum();
        (self.x0 * self.x0 - norm_sq - 1.0).abs() / f64::max(1.0, self.x0 * self.x0)
    }
}

/// Lift a vector onto the forward sheet: v ↦ (√(1+‖v‖²), v).
///
/// The norm accumulates left to right in a single accumulator so the result
/// is the same on every machine and worker count.
pub fn lift(v: &[f64]) -> Result<HyperboloidPoint> {
    let mut norm_sq = 0.0f64;
    for &c in v {
        if !c.is_finite() {
            return Err(Error::InvalidVector);
        }
        norm_sq += c * c;
    }
    let x0 = (1.0 + norm_sq).sqrt();
    if !x0.is_finite() {
        return Err(Error::InvalidVector);
    }
    Ok(HyperboloidPoint {
        x0,
        spatial: v.to_vec(),
    })
}

/// Lorentzian inner product without clamping or domain checks.
///
/// Single sequential accumulator: x₀y₀ first, then the spatial products
/// subtracted left to right.
pub fn lorentz_inner_raw(x: &HyperboloidPoint, y: &HyperboloidPoint) -> f64 {
    let mut acc = x.x0 * y.x0;
    for (a, b) in x.spatial.iter().zip(&y.spatial) {
        acc -= a * b;
    }
    acc
}

/// Lorentzian inner product of two sheet points, guaranteed ≥ 1.
///
/// Values in [1 − [`CLAMP_TOL`]·s, 1 + [`SNAP_TOL`]·s] for s = max(1, x₀y₀)
/// become exactly 1 so identical points give distance 0; values below that
/// range report a domain error (the input was not produced by [`lift`]).
pub fn lorentz_inner(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let raw = lorentz_inner_raw(x, y);
    let scale = f64::max(1.0, x.x0 * y.x0);
    if raw < 1.0 - CLAMP_TOL * scale {
        return Err(Error::Domain {
            value: raw,
            pair: None,
        });
    }
    if raw <= 1.0 + SNAP_TOL * scale {
        return Ok(1.0);
    }
    Ok(raw)
}

/// Inverse hyperbolic cosine, stable as z → 1⁺.
///
/// Computed as log1p((z−1) + √((z−1)(z+1))), which keeps full relative
/// precision where the closed form ln(z+√(z²−1)) loses digits.
pub fn acosh_stable(z: f64) -> Result<f64> {
    if z < 1.0 || z.is_nan() {
        return Err(Error::Domain {
            value: z,
            pair: None,
        });
    }
    let u = z - 1.0;
    Ok((u + (u * (z + 1.0)).sqrt()).ln_1p())
}

/// Hyperbolic distance d(X,Y) = acosh(B(X,Y)).
pub fn distance(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    acosh_stable(lorentz_inner(x, y)?)
}
