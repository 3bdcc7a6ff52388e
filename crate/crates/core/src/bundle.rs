//! Keypad bundles: everything needed to reproduce a generated keypad, plus
//! its images.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::{Category, DeviceProfile, DEFAULT_SIGMA_LF};
use crate::error::{Error, Result};
use crate::keypad::{
    hybrid_keypad_with_ordering, shuffle_ordering, DigitOrdering, HybridKeypad, KeypadLayout,
    RenderStyle,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Fraction of the native resolution keypads are rendered at by default.
pub const DEFAULT_WORKING_SCALE: f64 = 0.5;

/// Added to the zero-mean high-pass component before it is stored as an image.
pub const USER_HIGH_OFFSET: f64 = 0.5;

/// Working pixel grid for `device` at `scale`, kept above the renderable minimum.
pub fn working_resolution(device: &DeviceProfile, scale: f64) -> Result<(usize, usize)> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::domain(format!("scale {scale} outside (0, 1]")));
    }
    let n_x = (device.display.n_x as f64 * scale).round() as usize;
    let n_y = (device.display.n_y as f64 * scale).round() as usize;
    let (min_x, min_y) = crate::keypad::MIN_DIMS;
    if n_x < min_x || n_y < min_y {
        return Err(Error::domain(format!(
            "{n_x}x{n_y} is below the {min_x}x{min_y} keypad minimum"
        )));
    }
    Ok((n_x, n_y))
}

/// Request for one keypad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypadRequest {
    pub device: DeviceProfile,
    /// Pixel grid to render at; `None` uses [`DEFAULT_WORKING_SCALE`].
    #[serde(default)]
    pub resolution: Option<(usize, usize)>,
    #[serde(default)]
    pub category: Option<Category>,
    #[serde(default)]
    pub sigma_lf: Option<f64>,
    #[serde(default)]
    pub sigma_hf: Option<f64>,
    pub seed: u64,
}

impl KeypadRequest {
    /// Resolved `(sigma_lf, sigma_hf)`. Explicit values override the category.
    pub fn sigmas(&self) -> Result<(f64, f64)> {
        let lf = self
            .sigma_lf
            .or(self.category.map(Category::sigma_lf))
            .unwrap_or(DEFAULT_SIGMA_LF);
        let hf = self
            .sigma_hf
            .or(self.category.map(Category::sigma_hf))
            .ok_or_else(|| Error::domain("either a category or sigma_hf is required"))?;
        for (name, s) in [("sigma_lf", lf), ("sigma_hf", hf)] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {s}")));
            }
        }
        Ok((lf, hf))
    }

    pub fn resolution(&self) -> Result<(usize, usize)> {
        match self.resolution {
            Some(r) => Ok(r),
            None => working_resolution(&self.device, DEFAULT_WORKING_SCALE),
        }
    }

    pub fn build(&self, style: &RenderStyle) -> Result<(HybridKeypad, BundleMetadata)> {
        self.device.validate()?;
        let (sigma_lf, sigma_hf) = self.sigmas()?;
        let (w, h) = self.resolution()?;
        let ordering = shuffle_ordering(&mut ChaCha8Rng::seed_from_u64(self.seed));
        let device = self.device.at_resolution(w, h);
        let keypad = hybrid_keypad_with_ordering(&device, sigma_lf, sigma_hf, ordering, style)?;
        let meta = BundleMetadata {
            schema_version: SCHEMA_VERSION,
            device: self.device.clone(),
            resolution: (w, h),
            category: self.category,
            sigma_lf,
            sigma_hf,
            seed: self.seed,
            user_ordering: keypad.user_ordering,
            surfer_ordering: keypad.surfer_ordering,
            user_high_offset: USER_HIGH_OFFSET,
            glyph_dir: None,
        };
        Ok((keypad, meta))
    }
}

/// Bundle metadata; enough to rebuild the keypad exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMetadata {
    pub schema_version: u32,
    /// Native profile.
    pub device: DeviceProfile,
    pub resolution: (usize, usize),
    #[serde(default)]
    pub category: Option<Category>,
    pub sigma_lf: f64,
    pub sigma_hf: f64,
    pub seed: u64,
    pub user_ordering: DigitOrdering,
    pub surfer_ordering: DigitOrdering,
    pub user_high_offset: f64,
    /// Directory of the glyph atlas the keypad was drawn with, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyph_dir: Option<String>,
}

impl BundleMetadata {
    pub fn from_json(text: &str) -> Result<Self> {
        let meta: BundleMetadata = serde_json::from_str(text)?;
        if meta.schema_version != SCHEMA_VERSION {
            return Err(Error::domain(format!(
                "unsupported bundle schema {}",
                meta.schema_version
            )));
        }
        meta.device.validate()?;
        Ok(meta)
    }

    pub fn rebuild(&self, style: &RenderStyle) -> Result<HybridKeypad> {
        let device = self
            .device
            .at_resolution(self.resolution.0, self.resolution.1);
        let keypad = hybrid_keypad_with_ordering(
            &device,
            self.sigma_lf,
            self.sigma_hf,
            self.user_ordering,
            style,
        )?;
        if keypad.surfer_ordering != self.surfer_ordering {
            return Err(Error::domain(
                "bundle surfer ordering is not the regular one",
            ));
        }
        Ok(keypad)
    }
}

/// Encoded images of a bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleImages {
    pub hybrid: Vec<u8>,
    pub user_high: Vec<u8>,
    pub surfer_low: Vec<u8>,
}

impl BundleImages {
    pub fn encode(keypad: &HybridKeypad) -> Result<Self> {
        Ok(Self {
            hybrid: keypad.hybrid.composed.encode_png()?,
            user_high: keypad
                .hybrid
                .user_high
                .map(|v| v + USER_HIGH_OFFSET)
                .encode_png()?,
            surfer_low: keypad.hybrid.surfer_low.encode_png()?,
        })
    }
}

pub fn layout_json(layout: &KeypadLayout) -> Result<String> {
    Ok(serde_json::to_string_pretty(layout)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(seed: u64) -> KeypadRequest {
        KeypadRequest {
            device: DeviceProfile::nexus6(),
            resolution: Some((360, 640)),
            category: Some(Category::C2),
            sigma_lf: None,
            sigma_hf: None,
            seed,
        }
    }

    #[test]
    fn build_is_reproducible() {
        let style = RenderStyle::default();
        let (a, ma) = request(7).build(&style).unwrap();
        let (b, mb) = request(7).build(&style).unwrap();
        assert_eq!(a, b);
        assert_eq!(ma, mb);
        assert_eq!(
            BundleImages::encode(&a).unwrap(),
            BundleImages::encode(&b).unwrap()
        );
        let text = serde_json::to_string(&ma).unwrap();
        let back = BundleMetadata::from_json(&text).unwrap();
        assert_eq!(back.rebuild(&style).unwrap(), a);
        assert_eq!((ma.sigma_lf, ma.sigma_hf), (35.0, 215.0));
    }

    #[test]
    fn explicit_sigmas_override_category() {
        let mut r = request(1);
        r.sigma_hf = Some(320.0);
        assert_eq!(r.sigmas().unwrap(), (35.0, 320.0));
        r.category = None;
        r.sigma_hf = None;
        assert!(r.sigmas().is_err());
    }

    #[test]
    fn default_resolution_is_half_native() {
        assert_eq!(
            working_resolution(&DeviceProfile::nexus6(), 0.5).unwrap(),
            (720, 1280)
        );
        assert_eq!(
            working_resolution(&DeviceProfile::iphone6(), 0.5).unwrap(),
            (375, 667)
        );
        assert!(working_resolution(&DeviceProfile::iphone6(), 0.25).is_err());
    }
}
