//! Frequency-domain Gaussian filtering and hybrid composition.
//!
//! Filters are applied by multiplying the unpadded `(N_x, N_y)`-point DFT of
//! an image with a gain grid. Frequencies are signed cycles per image (c/im),
//! so a filter has the same visual effect at any resolution.

use std::fmt::Write as _;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Planned forward and inverse 2D transforms for one image size.
#[derive(Clone)]
pub struct Fft2d {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2d({}x{})", self.width, self.height)
    }
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Unnormalised in-place transform of a row-major buffer.
    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let (rows, cols) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        let (w, h) = (self.width, self.height);
        let mut scratch = vec![Complex64::default(); rows.get_inplace_scratch_len()];
        for row in buf.chunks_exact_mut(w) {
            rows.process_with_scratch(row, &mut scratch);
        }
        let mut transposed = transpose(buf, w, h);
        scratch.resize(cols.get_inplace_scratch_len(), Complex64::default());
        for col in transposed.chunks_exact_mut(h) {
            cols.process_with_scratch(col, &mut scratch);
        }
        buf.copy_from_slice(&transpose(&transposed, h, w));
    }
}

fn transpose(buf: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); w * h];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = buf[y * w + x];
        }
    }
    out
}

/// Signed frequency of DFT bin `k` out of `n`, in cycles per image.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// DFT of a real image, bins in natural (uncentred) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn forward(image: &GrayImage, fft: &Fft2d) -> Result<Self> {
        if image.dims() != fft.dims() {
            return Err(Error::DimensionMismatch {
                expected: fft.dims(),
                actual: image.dims(),
            });
        }
        let mut data: Vec<Complex64> = image
            .samples()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft.process(&mut data, false);
        Ok(Self {
            width: image.width(),
            height: image.height(),
            data,
        })
    }

    pub fn of(image: &GrayImage) -> Result<Self> {
        Self::forward(image, &Fft2d::new(image.width(), image.height()))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.data
    }

    /// Signed `(n_x, n_y)` of the bin at flat index `i`.
    pub fn bin(&self, i: usize) -> (f64, f64) {
        (
            signed_frequency(i % self.width, self.width),
            signed_frequency(i / self.width, self.height),
        )
    }

    /// Coefficient-wise product with a real gain grid.
    pub fn scaled(&self, gains: &[f64]) -> Spectrum {
        debug_assert_eq!(gains.len(), self.data.len());
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(gains).map(|(c, g)| c * g).collect(),
        }
    }

    /// `self * ga + other * gb`, bin by bin.
    pub fn blend(&self, ga: &[f64], other: &Spectrum, gb: &[f64]) -> Spectrum {
        Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(ga)
                .zip(other.data.iter().zip(gb))
                .map(|((a, wa), (b, wb))| a * wa + b * wb)
                .collect(),
        }
    }

    /// Inverse transform; also returns the largest discarded imaginary part.
    pub fn inverse_with_residue(&self, fft: &Fft2d) -> (GrayImage, f64) {
        let mut buf = self.data.clone();
        fft.process(&mut buf, true);
        let norm = 1.0 / (self.width * self.height) as f64;
        let mut residue = 0.0f64;
        let samples = buf
            .iter()
            .map(|c| {
                residue = residue.max((c.im * norm).abs());
                c.re * norm
            })
            .collect();
        let img = GrayImage::new(self.width, self.height, samples)
            .expect("inverse transform yields finite samples");
        (img, residue)
    }

    pub fn inverse(&self, fft: &Fft2d) -> GrayImage {
        self.inverse_with_residue(fft).0
    }

    /// Inverse transforms of `a * gains` and `b * gains` with a single
    /// complex transform. Both spectra must come from real images and
    /// `gains` must be even in frequency.
    pub fn inverse_pair(
        a: &Spectrum,
        b: &Spectrum,
        gains: &[f64],
        fft: &Fft2d,
    ) -> Result<(GrayImage, GrayImage)> {
        for d in [a.dims(), b.dims()] {
            if d != fft.dims() {
                return Err(Error::DimensionMismatch {
                    expected: fft.dims(),
                    actual: d,
                });
            }
        }
        if gains.len() != a.data.len() {
            return Err(Error::domain(format!(
                "{} gains for {} bins",
                gains.len(),
                a.data.len()
            )));
        }
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a
            .data
            .iter()
            .zip(&b.data)
            .zip(gains)
            .map(|((x, y), g)| (x + i * y) * g)
            .collect();
        fft.process(&mut buf, true);
        let norm = 1.0 / (a.width * a.height) as f64;
        let re = buf.iter().map(|c| c.re * norm).collect();
        let im = buf.iter().map(|c| c.im * norm).collect();
        Ok((
            GrayImage::new(a.width, a.height, re)?,
            GrayImage::new(a.width, a.height, im)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

/// Gaussian filter parameterised by its vertical frequency deviation.
///
/// The horizontal deviation follows the image aspect, `sigma_x = sigma_y * N_x / N_y`,
/// which makes the spatial kernel isotropic in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFilterSpec {
    pub kind: FilterKind,
    /// Cycles per image.
    pub sigma_y: f64,
}

impl GaussianFilterSpec {
    pub fn lowpass(sigma_y: f64) -> Self {
        Self {
            kind: FilterKind::Lowpass,
            sigma_y,
        }
    }

    pub fn highpass(sigma_y: f64) -> Self {
        Self {
            kind: FilterKind::Highpass,
            sigma_y,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_y.is_finite() && self.sigma_y > 0.0) {
            return Err(Error::domain(format!(
                "sigma_y must be positive, got {}",
                self.sigma_y
            )));
        }
        Ok(())
    }

    /// `(sigma_x, sigma_y)` for an `n_x x n_y` grid.
    pub fn sigmas(&self, n_x: usize, n_y: usize) -> (f64, f64) {
        (self.sigma_y * n_x as f64 / n_y as f64, self.sigma_y)
    }

    /// Gain at bin `(f_x, f_y)` (c/im) for an `n_x x n_y` grid.
    pub fn gain(&self, f_x: f64, f_y: f64, n_x: usize, n_y: usize) -> f64 {
        let (sx, sy) = self.sigmas(n_x, n_y);
        let low = (-(f_x * f_x) / (2.0 * sx * sx) - (f_y * f_y) / (2.0 * sy * sy)).exp();
        match self.kind {
            FilterKind::Lowpass => low,
            FilterKind::Highpass => 1.0 - low,
        }
    }

    /// Gain for every bin of an `n_x x n_y` DFT, natural order.
    pub fn gain_grid(&self, n_x: usize, n_y: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_x * n_y);
        for ky in 0..n_y {
            let fy = signed_frequency(ky, n_y);
            for kx in 0..n_x {
                out.push(self.gain(signed_frequency(kx, n_x), fy, n_x, n_y));
            }
        }
        out
    }
}

pub fn gaussian_gain(spec: &GaussianFilterSpec, bin: (f64, f64), dims: (usize, usize)) -> f64 {
    spec.gain(bin.0, bin.1, dims.0, dims.1)
}

pub fn apply_filter(image: &GrayImage, spec: &GaussianFilterSpec) -> Result<GrayImage> {
    if image.is_empty() {
        return Err(Error::domain("cannot filter an empty image"));
    }
    spec.validate()?;
    let (w, h) = image.dims();
    let fft = Fft2d::new(w, h);
    let spectrum = Spectrum::forward(image, &fft)?;
    Ok(spectrum.scaled(&spec.gain_grid(w, h)).inverse(&fft))
}

/// `composed = highpass(user) + lowpass(surfer)`, kept unclamped.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridImage {
    pub composed: GrayImage,
    pub user_high: GrayImage,
    pub surfer_low: GrayImage,
    pub sigma_lf: f64,
    pub sigma_hf: f64,
}

pub fn compose_hybrid(
    user_img: &GrayImage,
    surfer_img: &GrayImage,
    sigma_lf: f64,
    sigma_hf: f64,
) -> Result<HybridImage> {
    user_img.ensure_same_dims(surfer_img)?;
    let user_high = apply_filter(user_img, &GaussianFilterSpec::highpass(sigma_hf))?;
    let surfer_low = apply_filter(surfer_img, &GaussianFilterSpec::lowpass(sigma_lf))?;
    let composed = user_high.add(&surfer_low)?;
    Ok(HybridImage {
        composed,
        user_high,
        surfer_low,
        sigma_lf,
        sigma_hf,
    })
}

/// One bucket of a 1D spectrum: summed `ln(1 + |X(f)|)` over bins whose
/// rounded magnitude equals `magnitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub magnitude_c_per_im: f64,
    pub log_power: f64,
}

pub fn spectrum_profile(image: &GrayImage) -> Result<Vec<ProfilePoint>> {
    if image.is_empty() {
        return Err(Error::domain("cannot profile an empty image"));
    }
    let spectrum = Spectrum::of(image)?;
    let mut buckets: Vec<f64> = Vec::new();
    for (i, c) in spectrum.coefficients().iter().enumerate() {
        let (fx, fy) = spectrum.bin(i);
        let bucket = fx.hypot(fy).round() as usize;
        if bucket >= buckets.len() {
            buckets.resize(bucket + 1, 0.0);
        }
        buckets[bucket] += c.norm().ln_1p();
    }
    Ok(buckets
        .into_iter()
        .enumerate()
        .map(|(m, p)| ProfilePoint {
            magnitude_c_per_im: m as f64,
            log_power: p,
        })
        .collect())
}

pub fn profile_to_csv(profile: &[ProfilePoint]) -> String {
    let mut out = String::from("magnitude_c_per_im,log_power\n");
    for p in profile {
        let _ = writeln!(out, "{},{}", p.magnitude_c_per_im, p.log_power);
    }
    out
}
