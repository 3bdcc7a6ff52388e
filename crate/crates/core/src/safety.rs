//! Safety distances for naked-eye and camera observers, the 3D visibility
//! region, and tuning the high-pass deviation for a required distance.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceProfile;
use crate::error::{Error, Result};
use crate::geometry::ViewingPosition;
use crate::keypad::{
    render_with_layout, shuffle_ordering, DigitOrdering, HybridKeypad, KeypadLayout, RenderStyle,
};
use crate::perception::DafSpec;
use crate::raster::GrayImage;
use crate::spectral::{Fft2d, GaussianFilterSpec, Spectrum};
use crate::visibility::{device_for_keypad, SsimParams, VisibilityEvaluator, DEFAULT_V_TH};

/// Smallest attacker azimuth assumed by the threat model.
pub const MIN_ATTACKER_PHI: f64 = FRAC_PI_6;
/// Closest a surveillance camera is assumed to record from, inches.
pub const CAMERA_THREAT_DISTANCE: f64 = 100.0;
/// Safety distances of the threat-model scenarios, inches.
pub const SCENARIO_DISTANCES: [f64; 4] = [25.0, 35.0, 45.0, 60.0];
/// Seeds averaged by [`solve_sigma_hf`].
pub const SOLVE_SEEDS: [u64; 5] = [11, 23, 37, 41, 53];

const MM_PER_INCH: f64 = 25.4;

/// Model parameters shared by the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub daf: DafSpec,
    pub ssim: SsimParams,
    pub v_th: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            daf: DafSpec::default(),
            ssim: SsimParams::default(),
            v_th: DEFAULT_V_TH,
        }
    }
}

/// Coarse scan then bisection along one viewing ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaySearch {
    pub theta0: f64,
    pub phi0: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub step: f64,
    pub tolerance: f64,
    /// Largest drop of the index tolerated before the bracket is declared non-monotone.
    pub dip_tolerance: f64,
}

impl Default for RaySearch {
    fn default() -> Self {
        Self {
            theta0: FRAC_PI_2,
            phi0: MIN_ATTACKER_PHI,
            r_min: 5.0,
            r_max: 300.0,
            step: 5.0,
            tolerance: 0.5,
            dip_tolerance: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub r: f64,
    pub v: f64,
}

pub type SearchTrace = Vec<TracePoint>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafetyMode {
    NakedEye,
    Camera,
}

/// Geometry of the high-pass cut-off used by the camera analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffAnalysis {
    pub sigma_x_hf: f64,
    pub sigma_y_hf: f64,
    /// Half-gain ellipse semi-axes, c/im.
    pub ellipse_a: f64,
    pub ellipse_b: f64,
    /// Corners of the largest inscribed rectangle, c/im.
    pub f_x_s: f64,
    pub f_y_s: f64,
    /// Longest surviving cycle on screen, inches.
    pub l_x: f64,
    pub l_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyResult {
    /// Inches.
    pub safety_distance: f64,
    pub mode: SafetyMode,
    pub inputs: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: SearchTrace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<CutoffAnalysis>,
}

/// Half-gain cut-off of the high-pass filter and the longest cycle it lets through.
pub fn cutoff_analysis(sigma_hf: f64, device: &DeviceProfile) -> Result<CutoffAnalysis> {
    GaussianFilterSpec::highpass(sigma_hf).validate()?;
    device.validate()?;
    let d = &device.display;
    let (sigma_x, sigma_y) = GaussianFilterSpec::highpass(sigma_hf).sigmas(d.n_x, d.n_y);
    // gain 1/2 where f_x^2 / (2 sx^2) + f_y^2 / (2 sy^2) = ln 2
    let half = (2.0 * 2f64.ln()).sqrt();
    let (a, b) = (sigma_x * half, sigma_y * half);
    let corner = std::f64::consts::FRAC_1_SQRT_2;
    let (f_x_s, f_y_s) = (a * corner, b * corner);
    Ok(CutoffAnalysis {
        sigma_x_hf: sigma_x,
        sigma_y_hf: sigma_y,
        ellipse_a: a,
        ellipse_b: b,
        f_x_s,
        f_y_s,
        l_x: (d.n_x as f64 / d.ppi) / f_x_s,
        l_y: (d.n_y as f64 / d.ppi) / f_y_s,
    })
}

/// Distance beyond which the longest user-keypad cycle covers at most one
/// camera pixel.
pub fn camera_safety_distance(sigma_hf: f64, device: &DeviceProfile) -> Result<SafetyResult> {
    let camera = device
        .camera
        .ok_or_else(|| Error::NoCamera(device.name.clone()))?;
    let cutoff = cutoff_analysis(sigma_hf, device)?;
    let cycle = cutoff.l_x.max(cutoff.l_y);
    // focal length and pixel size are both in mm, so the ratio is unitless
    let d_s = camera.focal_length_mm * cycle / camera.pixel_size_mm;
    Ok(SafetyResult {
        safety_distance: d_s,
        mode: SafetyMode::Camera,
        inputs: serde_json::json!({
            "device": device.name,
            "sigma_hf": sigma_hf,
            "focal_length_mm": camera.focal_length_mm,
            "pixel_size_mm": camera.pixel_size_mm,
            "cycle_length_mm": cycle * MM_PER_INCH,
        }),
        trace: Vec::new(),
        cutoff: Some(cutoff),
    })
}

/// Smallest distance along `search`'s ray at which the index reaches `v_th`.
pub fn search_ray(
    evaluator: &VisibilityEvaluator,
    v_th: f64,
    search: &RaySearch,
) -> Result<(f64, SearchTrace)> {
    let eval = |r: f64| -> Result<f64> {
        evaluator.index(&ViewingPosition::from_spherical(
            r,
            search.theta0,
            search.phi0,
        )?)
    };
    let mut trace = SearchTrace::new();
    let mut running_max = f64::NEG_INFINITY;
    let steps = ((search.r_max - search.r_min) / search.step).round() as usize;
    for i in 0..=steps {
        let r = search.r_min + i as f64 * search.step;
        let v = eval(r)?;
        trace.push(TracePoint { r, v });
        if v < running_max - search.dip_tolerance {
            return Err(Error::NonMonotone { at: r, trace });
        }
        running_max = running_max.max(v);
        if v < v_th {
            continue;
        }
        if i == 0 {
            return Ok((r, trace));
        }
        let (mut lo, mut hi) = (r - search.step, r);
        while hi - lo > search.tolerance {
            let mid = 0.5 * (lo + hi);
            let v_mid = eval(mid)?;
            trace.push(TracePoint { r: mid, v: v_mid });
            if v_mid >= v_th {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok((hi, trace));
    }
    Err(Error::Unbounded {
        v_th,
        upper: search.r_max,
        trace,
    })
}

pub fn naked_eye_safety_distance(
    keypad: &HybridKeypad,
    device: &DeviceProfile,
    v_th: f64,
) -> Result<SafetyResult> {
    let config = AnalysisConfig {
        v_th,
        ..AnalysisConfig::default()
    };
    naked_eye_safety_distance_with(keypad, device, &config, &RaySearch::default())
}

pub fn naked_eye_safety_distance_with(
    keypad: &HybridKeypad,
    device: &DeviceProfile,
    config: &AnalysisConfig,
    search: &RaySearch,
) -> Result<SafetyResult> {
    let mut keypad = keypad.clone();
    keypad.device = device_for_keypad(&keypad, device)?;
    let evaluator = VisibilityEvaluator::new(&keypad, config.daf, config.ssim)?;
    let (d_s, trace) = search_ray(&evaluator, config.v_th, search)?;
    Ok(SafetyResult {
        safety_distance: d_s,
        mode: SafetyMode::NakedEye,
        inputs: serde_json::json!({
            "device": device.name,
            "sigma_lf": keypad.sigma_lf,
            "sigma_hf": keypad.sigma_hf,
            "v_th": config.v_th,
            "theta0": search.theta0,
            "phi0": search.phi0,
            "resolution": [keypad.dims().0, keypad.dims().1],
        }),
        trace,
        cutoff: None,
    })
}

/// Evenly spaced samples, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    /// Axis symmetric about zero.
    pub fn centered(half_extent: f64, count: usize) -> Self {
        Self::new(-half_extent, half_extent, count)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![0.5 * (self.min + self.max)];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.min + i as f64 * step)
            .collect()
    }

    pub fn step(&self) -> f64 {
        if self.count > 1 {
            (self.max - self.min) / (self.count - 1) as f64
        } else {
            0.0
        }
    }
}

/// Closest distance to the screen considered by the region scan.
pub const MIN_REGION_Z: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub x: GridAxis,
    pub y: GridAxis,
    pub z: GridAxis,
}

impl RegionGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("x", self.x), ("y", self.y), ("z", self.z)] {
            if axis.count == 0 || axis.max.is_nan() || axis.min.is_nan() || axis.max < axis.min {
                return Err(Error::domain(format!("empty {name} axis {axis:?}")));
            }
        }
        if self.z.min <= MIN_REGION_Z {
            return Err(Error::domain(format!(
                "region grid must keep z0 > {MIN_REGION_Z} in (got {})",
                self.z.min
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.count * self.y.count * self.z.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell centres, z slowest and x fastest.
    pub fn positions(&self) -> Vec<(f64, f64, f64)> {
        let (xs, ys, zs) = (self.x.values(), self.y.values(), self.z.values());
        let mut out = Vec::with_capacity(self.len());
        for &z in &zs {
            for &y in &ys {
                for &x in &xs {
                    out.push((x, y, z));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v: f64,
    pub visible: bool,
}

/// Farthest visible cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub max_r0: f64,
    pub theta0: f64,
    pub phi0: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRegion {
    pub grid: RegionGrid,
    pub v_th: f64,
    pub cells: Vec<RegionCell>,
    pub boundary: Option<RegionBoundary>,
}

impl VisibilityRegion {
    pub fn visible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.visible).count()
    }

    pub fn cell(&self, ix: usize, iy: usize, iz: usize) -> &RegionCell {
        &self.cells[(iz * self.grid.y.count + iy) * self.grid.x.count + ix]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z,v,visible\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{},{}", c.x, c.y, c.z, c.v, c.visible);
        }
        out
    }

    /// The `zx` plane nearest `y = 0`: one block per cell, x to the right and
    /// z growing downwards. Visible cells are white, the rest are shaded by `v`.
    pub fn zx_slice(&self, block: usize) -> GrayImage {
        let iy = self
            .grid
            .y
            .values()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (nx, nz) = (self.grid.x.count, self.grid.z.count);
        GrayImage::from_fn(nx * block, nz * block, |px, pz| {
            let c = self.cell(px / block, iy, pz / block);
            if c.visible {
                1.0
            } else {
                0.6 * (1.0 - c.v).clamp(0.0, 1.0)
            }
        })
    }
}

pub fn visibility_region(
    keypad: &HybridKeypad,
    device: &DeviceProfile,
    grid: &RegionGrid,
    v_th: f64,
) -> Result<VisibilityRegion> {
    let config = AnalysisConfig {
        v_th,
        ..AnalysisConfig::default()
    };
    visibility_region_with(keypad, device, grid, &config)
}

pub fn visibility_region_with(
    keypad: &HybridKeypad,
    device: &DeviceProfile,
    grid: &RegionGrid,
    config: &AnalysisConfig,
) -> Result<VisibilityRegion> {
    grid.validate()?;
    let mut keypad = keypad.clone();
    keypad.device = device_for_keypad(&keypad, device)?;
    let evaluator = VisibilityEvaluator::new(&keypad, config.daf, config.ssim)?;
    let cells = grid
        .positions()
        .into_par_iter()
        .map(|(x, y, z)| {
            let v = evaluator.index(&ViewingPosition::new(x, y, z)?)?;
            Ok(RegionCell {
                x,
                y,
                z,
                v,
                visible: v < config.v_th,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let boundary = cells
        .iter()
        .filter(|c| c.visible)
        .map(|c| (c, (c.x * c.x + c.y * c.y + c.z * c.z).sqrt()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, r)| {
            let p = ViewingPosition::new(c.x, c.y, c.z).expect("grid keeps z0 > 0");
            RegionBoundary {
                max_r0: r,
                theta0: p.theta0(),
                phi0: p.phi0(),
                x: c.x,
                y: c.y,
                z: c.z,
            }
        });
    Ok(VisibilityRegion {
        grid: *grid,
        v_th: config.v_th,
        cells,
        boundary,
    })
}

/// Pre-transformed user and surfer keypads for one seed.
struct SeedSpectra {
    layout: KeypadLayout,
    user: Spectrum,
    surfer: Spectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSolution {
    pub sigma_hf: f64,
    pub target_distance: f64,
    /// Mean index at the target for the returned sigma.
    pub v: f64,
    pub seeds: Vec<u64>,
    /// `(sigma_hf, mean v)` for every evaluated sigma.
    pub trace: Vec<(f64, f64)>,
}

/// Bracket searched by [`solve_sigma_hf`], c/im.
pub const SIGMA_BRACKET: (f64, f64) = (50.0, 800.0);
const SIGMA_TOLERANCE: f64 = 5.0;

/// Smallest `sigma_hf` whose keypads are unreadable from
/// `(target_ds, pi/2, pi/6)`, averaged over [`SOLVE_SEEDS`].
pub fn solve_sigma_hf(
    target_ds: f64,
    device: &DeviceProfile,
    sigma_lf: f64,
    v_th: f64,
) -> Result<SigmaSolution> {
    let config = AnalysisConfig {
        v_th,
        ..AnalysisConfig::default()
    };
    solve_sigma_hf_with(target_ds, device, sigma_lf, &config, &SOLVE_SEEDS)
}

pub fn solve_sigma_hf_with(
    target_ds: f64,
    device: &DeviceProfile,
    sigma_lf: f64,
    config: &AnalysisConfig,
    seeds: &[u64],
) -> Result<SigmaSolution> {
    if !(10.0..=120.0).contains(&target_ds) {
        return Err(Error::domain(format!(
            "target safety distance {target_ds} in outside [10, 120]"
        )));
    }
    if seeds.is_empty() {
        return Err(Error::domain("at least one seed is required"));
    }
    GaussianFilterSpec::lowpass(sigma_lf).validate()?;
    device.validate()?;
    let (w, h) = (device.display.n_x, device.display.n_y);
    let fft = Fft2d::new(w, h);
    let style = RenderStyle::default();
    let base = KeypadLayout::standard(w, h, DigitOrdering::REGULAR);
    let surfer_img = render_with_layout(&base, &style, (w, h))?;
    let surfer = Spectrum::forward(&surfer_img, &fft)?;
    let prepared = seeds
        .iter()
        .map(|&seed| {
            let ordering = shuffle_ordering(&mut ChaCha8Rng::seed_from_u64(seed));
            let layout = base.with_ordering(ordering);
            let user = Spectrum::forward(&render_with_layout(&layout, &style, (w, h))?, &fft)?;
            Ok(SeedSpectra {
                layout,
                user,
                surfer: surfer.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let low = GaussianFilterSpec::lowpass(sigma_lf).gain_grid(w, h);
    let pos = ViewingPosition::from_spherical(target_ds, FRAC_PI_2, MIN_ATTACKER_PHI)?;

    let mean_v = |sigma_hf: f64| -> Result<f64> {
        let high = GaussianFilterSpec::highpass(sigma_hf).gain_grid(w, h);
        let total = prepared
            .iter()
            .map(|s| {
                let surfer_low = s.surfer.scaled(&low);
                let hybrid = s.user.blend(&high, &s.surfer, &low);
                VisibilityEvaluator::from_spectra(
                    device.clone(),
                    s.layout,
                    config.daf,
                    config.ssim,
                    fft.clone(),
                    hybrid,
                    surfer_low,
                )?
                .index(&pos)
            })
            .sum::<Result<f64>>()?;
        Ok(total / prepared.len() as f64)
    };

    let (mut lo, mut hi) = SIGMA_BRACKET;
    let mut trace = Vec::new();
    let v_hi = mean_v(hi)?;
    trace.push((hi, v_hi));
    if v_hi < config.v_th {
        return Err(Error::SigmaUnreachable { lo, hi });
    }
    let v_lo = mean_v(lo)?;
    trace.push((lo, v_lo));
    let (sigma, v) = if v_lo >= config.v_th {
        (lo, v_lo)
    } else {
        let mut best = v_hi;
        while hi - lo > SIGMA_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            let v_mid = mean_v(mid)?;
            trace.push((mid, v_mid));
            if v_mid >= config.v_th {
                hi = mid;
                best = v_mid;
            } else {
                lo = mid;
            }
        }
        (hi, best)
    };
    Ok(SigmaSolution {
        sigma_hf: sigma,
        target_distance: target_ds,
        v,
        seeds: seeds.to_vec(),
        trace,
    })
}

/// Keypad rebuilt for `seed` exactly as [`solve_sigma_hf`] sees it.
pub fn solver_keypad(
    device: &DeviceProfile,
    sigma_lf: f64,
    sigma_hf: f64,
    seed: u64,
) -> Result<HybridKeypad> {
    let ordering = shuffle_ordering(&mut ChaCha8Rng::seed_from_u64(seed));
    crate::keypad::hybrid_keypad_with_ordering(
        device,
        sigma_lf,
        sigma_hf,
        ordering,
        &RenderStyle::default(),
    )
}
