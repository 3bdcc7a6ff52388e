//! Visibility index: how much the user's keypad still shows through from a
//! viewing position.
//!
//! Both the hybrid keypad and its low-passed surfer component are filtered for
//! the position, cut into their ten buttons, and compared pairwise with the
//! mean structural similarity. The index is the mean of the ten values; at or
//! above the threshold the user's digits are predicted to be unreadable.

use serde::{Deserialize, Serialize};

use crate::device::DeviceProfile;
use crate::error::{Error, Result};
use crate::geometry::ViewingPosition;
use crate::keypad::{segment_buttons, HybridKeypad, KeypadLayout};
use crate::perception::{DafSpec, ViewingConditions};
use crate::raster::GrayImage;
use crate::spectral::{Fft2d, Spectrum};

/// Threshold calibrated for observers with the strongest vision.
pub const DEFAULT_V_TH: f64 = 0.93;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "SSIM window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.sigma > 0.0 && self.dynamic_range > 0.0) {
            return Err(Error::domain(format!("invalid SSIM parameters {self:?}")));
        }
        Ok(())
    }

    /// Normalised 1D Gaussian taps; the 2D window is their outer product.
    pub fn taps(&self) -> Vec<f64> {
        let c = (self.window / 2) as f64;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - c;
                (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    }

    fn constants(&self) -> (f64, f64) {
        let c1 = (self.k1 * self.dynamic_range).powi(2);
        let c2 = (self.k2 * self.dynamic_range).powi(2);
        (c1, c2)
    }
}

/// Separable "valid" filtering: output is `(w - n + 1) x (h - n + 1)`.
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let n = taps.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = taps.iter().zip(&row[x..x + n]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for (k, t) in taps.iter().enumerate() {
            let row = &horiz[(y + k) * ow..(y + k + 1) * ow];
            for (o, v) in out[y * ow..(y + 1) * ow].iter_mut().zip(row) {
                *o += t * v;
            }
        }
    }
    out
}

/// Mean SSIM over all window positions fully inside the images.
pub fn mssim(reference: &GrayImage, distorted: &GrayImage, params: &SsimParams) -> Result<f64> {
    params.validate()?;
    reference.ensure_same_dims(distorted)?;
    let (w, h) = reference.dims();
    if w < params.window || h < params.window {
        return Err(Error::domain(format!(
            "{w}x{h} image is smaller than the {} px SSIM window",
            params.window
        )));
    }
    let taps = params.taps();
    let x = reference.samples();
    let y = distorted.samples();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &taps);
    let mu_y = filter_valid(y, w, h, &taps);
    let e_xx = filter_valid(&xx, w, h, &taps);
    let e_yy = filter_valid(&yy, w, h, &taps);
    let e_xy = filter_valid(&xy, w, h, &taps);

    let (c1, c2) = params.constants();
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = e_xx[i] - mx * mx;
            let var_y = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityVerdict {
    pub index_v: f64,
    pub threshold_v_th: f64,
    /// Whether the user's keypad is predicted readable.
    pub visible: bool,
    pub position: Option<ViewingPosition>,
    pub extrapolated_angles: bool,
}

/// Threshold rule: `v >= v_th` is safe, anything below is visible.
pub fn verdict(index_v: f64, v_th: f64) -> Result<VisibilityVerdict> {
    if !(v_th > 0.0 && v_th <= 1.0) {
        return Err(Error::domain(format!("v_th = {v_th} outside (0, 1]")));
    }
    Ok(VisibilityVerdict {
        index_v,
        threshold_v_th: v_th,
        visible: index_v < v_th,
        position: None,
        extrapolated_angles: false,
    })
}

/// Visibility analysis of one keypad, with its spectra precomputed so that
/// each position costs two inverse transforms and ten SSIM evaluations.
#[derive(Debug, Clone)]
pub struct VisibilityEvaluator {
    device: DeviceProfile,
    layout: KeypadLayout,
    daf: DafSpec,
    ssim: SsimParams,
    fft: Fft2d,
    hybrid: Spectrum,
    surfer_low: Spectrum,
}

impl VisibilityEvaluator {
    pub fn new(keypad: &HybridKeypad, daf: DafSpec, ssim: SsimParams) -> Result<Self> {
        let (w, h) = keypad.dims();
        let fft = Fft2d::new(w, h);
        let hybrid = Spectrum::forward(&keypad.hybrid.composed, &fft)?;
        let surfer_low = Spectrum::forward(&keypad.hybrid.surfer_low, &fft)?;
        Self::from_spectra(
            keypad.device.clone(),
            keypad.layout,
            daf,
            ssim,
            fft,
            hybrid,
            surfer_low,
        )
    }

    /// Builds an evaluator from spectra already in hand.
    pub fn from_spectra(
        device: DeviceProfile,
        layout: KeypadLayout,
        daf: DafSpec,
        ssim: SsimParams,
        fft: Fft2d,
        hybrid: Spectrum,
        surfer_low: Spectrum,
    ) -> Result<Self> {
        daf.validate()?;
        ssim.validate()?;
        let dims = (device.display.n_x, device.display.n_y);
        for d in [fft.dims(), hybrid.dims(), surfer_low.dims()] {
            if d != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: d,
                });
            }
        }
        layout.validate(dims.0, dims.1)?;
        Ok(Self {
            device,
            layout,
            daf,
            ssim,
            fft,
            hybrid,
            surfer_low,
        })
    }

    pub fn device(&self) -> &DeviceProfile {
        &self.device
    }

    pub fn conditions(&self, pos: &ViewingPosition) -> Result<ViewingConditions> {
        ViewingConditions::new(pos, &self.device.display, &self.daf)
    }

    /// Percepts of the hybrid and of the surfer component at `pos`.
    pub fn perceived(&self, pos: &ViewingPosition) -> Result<(GrayImage, GrayImage)> {
        let cond = self.conditions(pos)?;
        let (w, h) = self.fft.dims();
        let gains = cond.gain_grid(w, h, self.daf.ratio_r);
        Spectrum::inverse_pair(&self.hybrid, &self.surfer_low, &gains, &self.fft)
    }

    /// Per-button MSSIM values at `pos`, in button order.
    pub fn button_scores(&self, pos: &ViewingPosition) -> Result<Vec<f64>> {
        let (hybrid, surfer) = self.perceived(pos)?;
        let distorted = segment_buttons(&hybrid, &self.layout)?;
        let reference = segment_buttons(&surfer, &self.layout)?;
        reference
            .iter()
            .zip(&distorted)
            .map(|(r, d)| mssim(r, d, &self.ssim))
            .collect()
    }

    pub fn index(&self, pos: &ViewingPosition) -> Result<f64> {
        let scores = self.button_scores(pos)?;
        Ok(scores.iter().sum::<f64>() / scores.len() as f64)
    }

    pub fn verdict(&self, pos: &ViewingPosition, v_th: f64) -> Result<VisibilityVerdict> {
        let v = self.index(pos)?;
        let mut out = verdict(v, v_th)?;
        out.position = Some(*pos);
        out.extrapolated_angles = self.conditions(pos)?.extrapolated_angles;
        Ok(out)
    }
}

/// Resolves `device` against the keypad's own pixel grid.
///
/// A profile describing the same physical screen at another resolution is
/// accepted; the keypad's resolution wins.
pub(crate) fn device_for_keypad(
    keypad: &HybridKeypad,
    device: &DeviceProfile,
) -> Result<DeviceProfile> {
    device.validate()?;
    if !device.display.same_physical_size(&keypad.device.display) {
        return Err(Error::domain(format!(
            "keypad was built for a {:.3}x{:.3} in display, not {:.3}x{:.3} in",
            keypad.device.display.d_x,
            keypad.device.display.d_y,
            device.display.d_x,
            device.display.d_y
        )));
    }
    let (w, h) = keypad.dims();
    Ok(device.at_resolution(w, h))
}

pub fn visibility_index(
    keypad: &HybridKeypad,
    pos: &ViewingPosition,
    device: &DeviceProfile,
    daf: &DafSpec,
    ssim: &SsimParams,
) -> Result<f64> {
    let mut keypad = keypad.clone();
    keypad.device = device_for_keypad(&keypad, device)?;
    VisibilityEvaluator::new(&keypad, *daf, *ssim)?.index(pos)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPosition {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl From<&ViewingPosition> for SphericalPosition {
    fn from(p: &ViewingPosition) -> Self {
        let (r, theta, phi) = p.spherical();
        Self { r, theta, phi }
    }
}

/// Verdict in its exchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub v: f64,
    pub v_th: f64,
    pub visible: bool,
    pub position: SphericalPosition,
    pub device: String,
    pub sigma_lf: f64,
    pub sigma_hf: f64,
    pub extrapolated_angles: bool,
}

impl VerdictReport {
    pub fn new(verdict: &VisibilityVerdict, pos: &ViewingPosition, keypad: &HybridKeypad) -> Self {
        Self {
            v: verdict.index_v,
            v_th: verdict.threshold_v_th,
            visible: verdict.visible,
            position: pos.into(),
            device: keypad.device.name.clone(),
            sigma_lf: keypad.sigma_lf,
            sigma_hf: keypad.sigma_hf,
            extrapolated_angles: verdict.extrapolated_angles,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Per-window SSIM summed directly over the 2D window.
    fn brute_force_mssim(a: &GrayImage, b: &GrayImage, p: &SsimParams) -> f64 {
        let n = p.window;
        let c = (n / 2) as f64;
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d2 = (i as f64 - c).powi(2) + (j as f64 - c).powi(2);
                weights[i * n + j] = (-d2 / (2.0 * p.sigma * p.sigma)).exp();
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let c1 = (p.k1 * p.dynamic_range).powi(2);
        let c2 = (p.k2 * p.dynamic_range).powi(2);
        let (w, h) = a.dims();
        let mut acc = 0.0;
        let mut count = 0;
        for oy in 0..=h - n {
            for ox in 0..=w - n {
                let (mut mx, mut my) = (0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let wt = weights[i * n + j];
                        mx += wt * a.get(ox + j, oy + i);
                        my += wt * b.get(ox + j, oy + i);
                    }
                }
                let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let wt = weights[i * n + j];
                        let dx = a.get(ox + j, oy + i) - mx;
                        let dy = b.get(ox + j, oy + i) - my;
                        vx += wt * dx * dx;
                        vy += wt * dy * dy;
                        cov += wt * dx * dy;
                    }
                }
                acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                    / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        acc / count as f64
    }

    fn random(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.gen())
    }

    #[test]
    fn identity_and_symmetry() {
        let p = SsimParams::default();
        let a = random(20, 24, 1);
        let b = random(20, 24, 2);
        assert_abs_diff_eq!(mssim(&a, &a, &p).unwrap(), 1.0, epsilon = 1e-12);
        let ab = mssim(&a, &b, &p).unwrap();
        assert!(ab < 1.0);
        assert_abs_diff_eq!(ab, mssim(&b, &a, &p).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn matches_brute_force_oracle() {
        let p = SsimParams::default();
        for seed in 0..5 {
            let a = random(16, 16, seed);
            let b = random(16, 16, seed + 50);
            let fast = mssim(&a, &b, &p).unwrap();
            assert_abs_diff_eq!(fast, brute_force_mssim(&a, &b, &p), epsilon = 1e-9);
        }
    }

    #[test]
    fn inverted_texture_scores_low() {
        let p = SsimParams::default();
        let a = GrayImage::from_fn(32, 32, |x, y| {
            0.5 + 0.25 * ((x as f64 * 0.9).sin() * (y as f64 * 0.7).cos())
        });
        let inv = a.map(|v| 1.0 - v);
        let oracle = brute_force_mssim(&a, &inv, &p);
        assert!(oracle < 0.2, "{oracle}");
        assert_abs_diff_eq!(mssim(&a, &inv, &p).unwrap(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn errors() {
        let p = SsimParams::default();
        let a = GrayImage::filled(10, 30, 0.0);
        assert!(mssim(&a, &a, &p).is_err());
        let b = GrayImage::filled(12, 30, 0.0);
        let c = GrayImage::filled(13, 30, 0.0);
        assert!(matches!(
            mssim(&b, &c, &p),
            Err(Error::DimensionMismatch { .. })
        ));
        let even = SsimParams { window: 8, ..p };
        assert!(mssim(&b, &b, &even).is_err());
    }

    #[test]
    fn threshold_rule() {
        assert!(!verdict(0.95, 0.93).unwrap().visible);
        assert!(!verdict(0.93, 0.93).unwrap().visible);
        assert!(verdict(0.80, 0.93).unwrap().visible);
        assert!(verdict(0.5, 0.0).is_err());
        assert!(verdict(0.5, 1.5).is_err());
    }
}
