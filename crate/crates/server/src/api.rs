use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use illusionpad::bundle::{
    working_resolution, BundleMetadata, KeypadRequest, DEFAULT_WORKING_SCALE,
};
use illusionpad::keypad::{KeypadLayout, Rect};
use illusionpad::visibility::VerdictReport;
use illusionpad::{Category, DeviceProfile, ViewingPosition};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{ApiError, ApiResult};

/// Largest pixel count accepted for a rendered keypad.
pub const MAX_PIXELS: usize = 4096 * 4096;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DeviceRef {
    Name(String),
    Profile(DeviceProfile),
}

impl Default for DeviceRef {
    fn default() -> Self {
        DeviceRef::Name("nexus6".into())
    }
}

impl DeviceRef {
    pub fn resolve(&self, profiles_dir: Option<&Path>) -> ApiResult<DeviceProfile> {
        match self {
            DeviceRef::Profile(p) => {
                p.validate()
                    .map_err(|e| ApiError::bad_request(format!("invalid device profile: {e}")))?;
                Ok(p.clone())
            }
            DeviceRef::Name(name) => {
                if let Some(dir) = profiles_dir {
                    let safe = name
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
                    let path = dir.join(format!("{name}.json"));
                    if safe && path.is_file() {
                        return DeviceProfile::load(&path)
                            .map_err(|e| ApiError::bad_request(format!("profile {name}: {e}")));
                    }
                }
                DeviceProfile::preset(name).ok_or_else(|| {
                    ApiError::bad_request(format!("unknown device {name:?}"))
                        .with_detail(json!({ "profiles": known_profiles(profiles_dir) }))
                })
            }
        }
    }
}

pub fn known_profiles(profiles_dir: Option<&Path>) -> Vec<String> {
    let mut names: Vec<String> = DeviceProfile::presets()
        .into_iter()
        .map(|p| p.name)
        .collect();
    if let Some(Ok(entries)) = profiles_dir.map(std::fs::read_dir) {
        for e in entries.flatten() {
            let path = e.path();
            if path.extension().is_some_and(|x| x == "json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    names.push(stem.to_string());
                }
            }
        }
    }
    names.sort();
    names.dedup();
    names
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridRequest {
    #[serde(default)]
    pub device: DeviceRef,
    #[serde(default)]
    pub category: Option<Category>,
    #[serde(default)]
    pub sigma_lf: Option<f64>,
    #[serde(default)]
    pub sigma_hf: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub resolution: Option<(usize, usize)>,
}

impl HybridRequest {
    pub fn to_keypad_request(
        &self,
        profiles_dir: Option<&Path>,
        seed: u64,
    ) -> ApiResult<KeypadRequest> {
        let device = self.device.resolve(profiles_dir)?;
        if self.category.is_none() && self.sigma_hf.is_none() {
            return Err(ApiError::bad_request(
                "either category or sigma_hf is required",
            ));
        }
        if let Some((w, h)) = self.resolution {
            if w.saturating_mul(h) > MAX_PIXELS {
                return Err(ApiError::bad_request(format!(
                    "resolution {w}x{h} is too large"
                )));
            }
        }
        let resolution = match self.resolution {
            Some(r) => r,
            None => working_resolution(&device, DEFAULT_WORKING_SCALE)?,
        };
        Ok(KeypadRequest {
            device,
            resolution: Some(resolution),
            category: self.category,
            sigma_lf: self.sigma_lf,
            sigma_hf: self.sigma_hf,
            seed,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Text(String),
}

impl Angle {
    pub fn radians(&self) -> ApiResult<f64> {
        match self {
            Angle::Radians(v) => Ok(*v),
            Angle::Text(s) => {
                let t = s.trim();
                let parsed = match t.strip_suffix("deg") {
                    Some(n) => n.trim().parse::<f64>().map(f64::to_radians),
                    None => t.parse::<f64>(),
                };
                parsed.map_err(|_| ApiError::bad_request(format!("invalid angle {s:?}")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PositionBody {
    Spherical { r: f64, theta: Angle, phi: Angle },
    Cartesian { x: f64, y: f64, z: f64 },
}

impl PositionBody {
    /// Malformed positions are validation errors, not domain errors.
    pub fn resolve(&self) -> ApiResult<ViewingPosition> {
        let pos = match self {
            PositionBody::Spherical { r, theta, phi } => {
                ViewingPosition::from_spherical(*r, theta.radians()?, phi.radians()?)
            }
            PositionBody::Cartesian { x, y, z } => ViewingPosition::new(*x, *y, *z),
        };
        pos.map_err(|e| ApiError::bad_request(format!("invalid position: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    #[serde(default)]
    pub keypad: Option<HybridRequest>,
    /// Base64 PNG to filter instead of a keypad.
    #[serde(default)]
    pub png: Option<String>,
    #[serde(default)]
    pub device: Option<DeviceRef>,
    pub position: PositionBody,
    #[serde(default)]
    pub v_th: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BundleImagesB64 {
    pub hybrid: String,
    pub user_high: String,
    pub surfer_low: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HybridResponse {
    pub schema_version: u32,
    pub metadata: BundleMetadata,
    pub layout: KeypadLayout,
    pub images: BundleImagesB64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionsBody {
    pub f1: f64,
    pub visual_angle_deg: (f64, f64),
    pub extrapolated_angles: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResponse {
    pub schema_version: u32,
    pub perceived: String,
    pub conditions: ConditionsBody,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
}

/// Keypad shown to a demo session: the image and its button rectangles,
/// never the digit ordering.
#[derive(Debug, Clone, Serialize)]
pub struct SessionKeypad {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub buttons: Vec<Rect>,
}

pub fn b64(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

pub fn unb64(text: &str) -> ApiResult<Vec<u8>> {
    STANDARD
        .decode(text.trim())
        .map_err(|e| ApiError::bad_request(format!("invalid base64: {e}")))
}
