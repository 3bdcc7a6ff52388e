//! Distance-as-filtering: what an observer at a given position perceives.
//!
//! Each DFT bin `(n_x, n_y)` is mapped to a perceived frequency in cycles per
//! degree using the visual angle subtended by the display, then attenuated by
//! a low-pass gain that is flat up to `f0 = f1 / r`, falls off as
//! `1 - (log(f / f0) / log r)^2`, and is zero beyond `f1`. The cut-off `f1`
//! shrinks for oblique viewing to account for screen dimming.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{visual_angle, DisplayGeometry, ViewingPosition, VisualAngle};
use crate::raster::GrayImage;
use crate::spectral::{signed_frequency, Fft2d, Spectrum};

/// Largest `|phi0|` covered by the calibration data.
pub const CALIBRATED_MAX_PHI: f64 = std::f64::consts::FRAC_PI_3;
/// Largest `|theta0 - pi/2|` covered by the calibration data.
pub const CALIBRATED_MAX_THETA_OFFSET: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DafSpec {
    /// On-axis cut-off, cycles per degree.
    pub f1_base: f64,
    /// `f1 / f0`.
    pub ratio_r: f64,
    /// Exponent of the angular attenuation.
    pub k_a: f64,
}

impl Default for DafSpec {
    fn default() -> Self {
        Self {
            f1_base: 31.0,
            ratio_r: 3.0,
            k_a: 3.0,
        }
    }
}

impl DafSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio_r > 1.0 && self.f1_base > 0.0 && self.k_a > 0.0) {
            return Err(Error::domain(format!("invalid DAF parameters {self:?}")));
        }
        Ok(())
    }

    pub fn f0(&self) -> f64 {
        self.f1_base / self.ratio_r
    }
}

/// Angle-attenuated cut-off `f1` for an observer at `(phi0, theta0)`.
pub fn effective_f1(phi0: f64, theta0: f64, spec: &DafSpec) -> Result<f64> {
    if !(phi0 > -FRAC_PI_2 && phi0 < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "phi0 = {phi0} outside (-pi/2, pi/2)"
        )));
    }
    if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return Err(Error::domain(format!("theta0 = {theta0} outside (0, pi)")));
    }
    let a_phi = 1.0 - (phi0.abs() / FRAC_PI_2).powf(spec.k_a);
    let a_theta = 1.0 - ((theta0 - FRAC_PI_2).abs() / FRAC_PI_2).powf(spec.k_a);
    Ok(spec.f1_base * a_phi * a_theta)
}

/// True when the viewing direction lies outside the calibrated range.
pub fn is_extrapolated(phi0: f64, theta0: f64) -> bool {
    phi0.abs() > CALIBRATED_MAX_PHI + 1e-12
        || (theta0 - FRAC_PI_2).abs() > CALIBRATED_MAX_THETA_OFFSET + 1e-12
}

pub fn daf_gain(fp_mag: f64, f1: f64, ratio_r: f64) -> f64 {
    if f1 <= 0.0 {
        return if fp_mag == 0.0 { 1.0 } else { 0.0 };
    }
    let f0 = f1 / ratio_r;
    if fp_mag < f0 {
        1.0
    } else if fp_mag > f1 {
        0.0
    } else {
        let t = (fp_mag / f0).ln() / ratio_r.ln();
        1.0 - t * t
    }
}

/// Everything about a viewing position that the filter depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewingConditions {
    pub angle: VisualAngle,
    pub f1: f64,
    pub extrapolated_angles: bool,
}

impl ViewingConditions {
    pub fn new(pos: &ViewingPosition, display: &DisplayGeometry, spec: &DafSpec) -> Result<Self> {
        spec.validate()?;
        let angle = visual_angle(pos, display)?;
        let (phi0, theta0) = (pos.phi0(), pos.theta0());
        Ok(Self {
            angle,
            f1: effective_f1(phi0, theta0, spec)?,
            extrapolated_angles: is_extrapolated(phi0, theta0),
        })
    }

    /// DAF gain for every bin of an `n_x x n_y` DFT, natural order.
    pub fn gain_grid(&self, n_x: usize, n_y: usize, ratio_r: f64) -> Vec<f64> {
        let (deg_x, deg_y) = self.angle.degrees();
        let fx: Vec<f64> = (0..n_x).map(|k| signed_frequency(k, n_x) / deg_x).collect();
        let mut out = Vec::with_capacity(n_x * n_y);
        for ky in 0..n_y {
            let fy = signed_frequency(ky, n_y) / deg_y;
            out.extend(
                fx.iter()
                    .map(|&fx| daf_gain(fx.hypot(fy), self.f1, ratio_r)),
            );
        }
        out
    }
}

/// Bring an image onto the display's pixel grid, resampling if needed.
pub(crate) fn fit_to_display(image: &GrayImage, display: &DisplayGeometry) -> GrayImage {
    if image.dims() == (display.n_x, display.n_y) {
        return image.clone();
    }
    log::warn!(
        "image is {}x{} but display is {}x{}; resampling bilinearly",
        image.width(),
        image.height(),
        display.n_x,
        display.n_y
    );
    image.resize_bilinear(display.n_x, display.n_y)
}

/// Simulated percept of `image` shown on `display` and viewed from `pos`.
pub fn simulate_perception(
    image: &GrayImage,
    display: &DisplayGeometry,
    pos: &ViewingPosition,
    spec: &DafSpec,
) -> Result<GrayImage> {
    display.validate()?;
    let image = fit_to_display(image, display);
    let conditions = ViewingConditions::new(pos, display, spec)?;
    let fft = Fft2d::new(display.n_x, display.n_y);
    let spectrum = Spectrum::forward(&image, &fft)?;
    let gains = conditions.gain_grid(display.n_x, display.n_y, spec.ratio_r);
    Ok(spectrum.scaled(&gains).inverse(&fft))
}
