//! Collar-lemma formulas and the modulus bound on the boundary geodesic.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this length the half-width is evaluated in log form.
pub const SMALL_LENGTH: f64 = 1e-3;

fn check_length(l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLength(l))
    }
}

/// `asinh(1 / sinh(l/2))`, the collar half-width around a geodesic of
/// length `l`.
pub fn collar_halfwidth(l: f64) -> Result<f64> {
    check_length(l)?;
    if l <= SMALL_LENGTH {
        Ok(collar_halfwidth_log(l))
    } else {
        Ok((1.0 / (0.5 * l).sinh()).asinh())
    }
}

/// Same quantity as `-ln tanh(l/4)`, accurate when `1/sinh(l/2)` is huge.
pub fn collar_halfwidth_log(l: f64) -> f64 {
    -(0.25 * l).tanh().ln()
}

/// `dL/dl = -1 / (2 sinh(l/2))`.
pub fn collar_halfwidth_derivative(l: f64) -> Result<f64> {
    check_length(l)?;
    Ok(-0.5 / (0.5 * l).sinh())
}

/// Log radius `r = pi^2 / l` of the removed disk `|z| <= e^{-r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollarRadius {
    pub r: f64,
    /// `ln e^{-r}`
    pub ln_hole_radius: f64,
}

impl CollarRadius {
    /// `e^{-r}`; underflows to zero for very short geodesics.
    pub fn hole_radius(&self) -> f64 {
        self.ln_hole_radius.exp()
    }
}

pub fn collar_log_radius(l: f64) -> Result<CollarRadius> {
    check_length(l)?;
    let r = PI * PI / l;
    Ok(CollarRadius {
        r,
        ln_hole_radius: -r,
    })
}

/// `pi / m`: an embedded annulus of modulus `m` around a curve bounds the
/// length of the geodesic in its class.
pub fn geodesic_upper_bound(m: f64) -> Result<f64> {
    if m > 0.0 && m.is_finite() {
        Ok(PI / m)
    } else {
        Err(Error::NonPositiveModulus(m))
    }
}
