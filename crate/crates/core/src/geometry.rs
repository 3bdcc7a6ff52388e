//! Pinhole viewing geometry.
//!
//! The image lies in the `xy` plane centred at the origin; the observer sits at
//! `(x0, y0, z0)` with `z0 > 0`. Spherical coordinates use
//!
//! ```text
//! x0 = r sin(theta) sin(phi)
//! y0 = r cos(theta)
//! z0 = r sin(theta) cos(phi)
//! ```
//!
//! so `theta = pi/2, phi = 0` is the on-axis direction. Substituting this
//! mapping into the Cartesian visual angle gives the closed forms in
//! [`visual_angle_spherical`]: the numerator becomes `r^2 - d^2/4` and the
//! product of the two ray lengths collapses to `sqrt((r^2 + d^2/4)^2 - (x0 d)^2)`
//! (resp. `y0 d` for the vertical extent).
//!
//! Lengths are inches, angles radians. Perceived frequencies are cycles per degree.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observer (or camera) location in front of the screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewingPosition {
    x0: f64,
    y0: f64,
    z0: f64,
}

impl ViewingPosition {
    pub fn new(x0: f64, y0: f64, z0: f64) -> Result<Self> {
        if !(x0.is_finite() && y0.is_finite() && z0.is_finite()) {
            return Err(Error::domain("viewing position must be finite"));
        }
        if z0 <= 0.0 {
            return Err(Error::domain(format!(
                "observer must be in front of the screen (z0 = {z0} <= 0)"
            )));
        }
        Ok(Self { x0, y0, z0 })
    }

    /// Builds a position from `(r, theta, phi)`.
    pub fn from_spherical(r0: f64, theta0: f64, phi0: f64) -> Result<Self> {
        spherical_to_cartesian(r0, theta0, phi0)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn r0(&self) -> f64 {
        (self.x0 * self.x0 + self.y0 * self.y0 + self.z0 * self.z0).sqrt()
    }

    /// Polar angle in `(0, pi)`, measured from the +y axis.
    pub fn theta0(&self) -> f64 {
        (self.y0 / self.r0()).clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in `(-pi/2, pi/2)`, measured from the +z axis towards +x.
    pub fn phi0(&self) -> f64 {
        self.x0.atan2(self.z0)
    }

    pub fn spherical(&self) -> (f64, f64, f64) {
        (self.r0(), self.theta0(), self.phi0())
    }
}

pub fn spherical_to_cartesian(r0: f64, theta0: f64, phi0: f64) -> Result<ViewingPosition> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r0}")));
    }
    if !(theta0 > 0.0 && theta0 < PI) {
        return Err(Error::domain(format!("theta0 = {theta0} outside (0, pi)")));
    }
    if !(phi0 > -FRAC_PI_2 && phi0 < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "phi0 = {phi0} outside (-pi/2, pi/2)"
        )));
    }
    let (st, ct) = theta0.sin_cos();
    let (sp, cp) = phi0.sin_cos();
    ViewingPosition::new(r0 * st * sp, r0 * ct, r0 * st * cp)
}

/// Physical and pixel extent of a display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplayGeometry {
    /// Width in inches.
    pub d_x: f64,
    /// Height in inches.
    pub d_y: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub ppi: f64,
}

/// Allowed disagreement between the physical size and `pixels / ppi`.
const SIZE_TOLERANCE_IN: f64 = 0.05;

impl DisplayGeometry {
    pub fn new(d_x: f64, d_y: f64, n_x: usize, n_y: usize, ppi: f64) -> Result<Self> {
        let g = Self {
            d_x,
            d_y,
            n_x,
            n_y,
            ppi,
        };
        g.validate()?;
        Ok(g)
    }

    /// Display whose physical size follows from the pixel count and density.
    pub fn from_pixels(n_x: usize, n_y: usize, ppi: f64) -> Result<Self> {
        Self::new(n_x as f64 / ppi, n_y as f64 / ppi, n_x, n_y, ppi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_x > 0.0 && self.d_y > 0.0 && self.ppi > 0.0) || self.n_x == 0 || self.n_y == 0 {
            return Err(Error::domain(format!("degenerate display {self:?}")));
        }
        let ex = (self.d_x - self.n_x as f64 / self.ppi).abs();
        let ey = (self.d_y - self.n_y as f64 / self.ppi).abs();
        if ex > SIZE_TOLERANCE_IN || ey > SIZE_TOLERANCE_IN {
            return Err(Error::domain(format!(
                "display size {}x{} in inconsistent with {}x{} px at {} ppi",
                self.d_x, self.d_y, self.n_x, self.n_y, self.ppi
            )));
        }
        Ok(())
    }

    /// Same physical screen sampled at a different pixel grid.
    ///
    /// Density is rescaled along x; cycles-per-image quantities are unchanged.
    pub fn at_resolution(&self, n_x: usize, n_y: usize) -> Self {
        Self {
            d_x: self.d_x,
            d_y: self.d_y,
            n_x,
            n_y,
            ppi: self.ppi * n_x as f64 / self.n_x as f64,
        }
    }

    pub fn same_physical_size(&self, other: &DisplayGeometry) -> bool {
        (self.d_x - other.d_x).abs() < 1e-9 && (self.d_y - other.d_y).abs() < 1e-9
    }

    pub fn diagonal(&self) -> f64 {
        self.d_x.hypot(self.d_y)
    }
}

/// Angle subtended by the display, horizontally and vertically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisualAngle {
    pub theta_x: f64,
    pub theta_y: f64,
}

impl VisualAngle {
    pub fn degrees(&self) -> (f64, f64) {
        (self.theta_x.to_degrees(), self.theta_y.to_degrees())
    }
}

/// Angle subtended at `n` by the segment from `a` to `b`.
fn subtended(n: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let na = [a[0] - n[0], a[1] - n[1], a[2] - n[2]];
    let nb = [b[0] - n[0], b[1] - n[1], b[2] - n[2]];
    let dot = na[0] * nb[0] + na[1] * nb[1] + na[2] * nb[2];
    let cross = [
        na[1] * nb[2] - na[2] * nb[1],
        na[2] * nb[0] - na[0] * nb[2],
        na[0] * nb[1] - na[1] * nb[0],
    ];
    let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    // atan2(|NA x NB|, NA . NB) rather than acos of the normalised dot
    cross_norm.atan2(dot)
}

/// Visual angle from the Cartesian position.
pub fn visual_angle(pos: &ViewingPosition, display: &DisplayGeometry) -> Result<VisualAngle> {
    if !(display.d_x > 0.0 && display.d_y > 0.0) {
        return Err(Error::domain(format!("degenerate display {display:?}")));
    }
    let n = [pos.x0, pos.y0, pos.z0];
    let hx = display.d_x / 2.0;
    let hy = display.d_y / 2.0;
    Ok(VisualAngle {
        theta_x: subtended(n, [-hx, 0.0, 0.0], [hx, 0.0, 0.0]),
        theta_y: subtended(n, [0.0, -hy, 0.0], [0.0, hy, 0.0]),
    })
}

/// Visual angle from the spherical closed form.
///
/// Independent of [`visual_angle`]; the two agree to rounding error.
pub fn visual_angle_spherical(
    r0: f64,
    theta0: f64,
    phi0: f64,
    display: &DisplayGeometry,
) -> Result<VisualAngle> {
    if !(display.d_x > 0.0 && display.d_y > 0.0) {
        return Err(Error::domain(format!("degenerate display {display:?}")));
    }
    if r0.is_nan() || r0 <= 0.0 {
        return Err(Error::domain(format!("radius must be positive, got {r0}")));
    }
    let closed_form = |d: f64, lateral: f64| {
        let r2 = r0 * r0;
        let q = d * d / 4.0;
        let den = ((r2 + q) * (r2 + q) - (lateral * d).powi(2)).sqrt();
        ((r2 - q) / den).clamp(-1.0, 1.0).acos()
    };
    Ok(VisualAngle {
        theta_x: closed_form(display.d_x, r0 * theta0.sin() * phi0.sin()),
        theta_y: closed_form(display.d_y, r0 * theta0.cos()),
    })
}

/// Perceived frequency in cycles per degree of a grating with `(n_x, n_y)`
/// cycles across the image.
pub fn perceived_frequency(n_x: f64, n_y: f64, angle: &VisualAngle) -> Result<(f64, f64)> {
    if !(angle.theta_x > 0.0 && angle.theta_y > 0.0) {
        return Err(Error::domain(format!(
            "non-positive visual angle {angle:?}"
        )));
    }
    let (dx, dy) = angle.degrees();
    Ok((n_x / dx, n_y / dy))
}
