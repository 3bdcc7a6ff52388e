//! Browser bindings: generate a keypad, view it from a position, and compute
//! the camera safety distance.

use illusionpad::bundle::working_resolution;
use illusionpad::keypad::make_hybrid_keypad;
use illusionpad::safety::camera_safety_distance;
use illusionpad::visibility::{VisibilityEvaluator, DEFAULT_V_TH};
use illusionpad::{Category, DafSpec, DeviceProfile, HybridKeypad, SsimParams, ViewingPosition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Fraction of the native resolution the demo renders at.
pub const DEMO_SCALE: f64 = 0.25;

fn category(name: &str) -> Result<Category, String> {
    Category::ALL
        .into_iter()
        .find(|c| c.name().eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| format!("unknown category {name:?}; expected c1..c4"))
}

fn device(name: &str) -> Result<DeviceProfile, String> {
    DeviceProfile::preset(name).ok_or_else(|| format!("unknown device {name:?}"))
}

#[wasm_bindgen]
pub struct Demo {
    keypad: HybridKeypad,
    evaluator: VisibilityEvaluator,
}

#[wasm_bindgen]
pub struct Perception {
    v: f64,
    visible: bool,
    extrapolated: bool,
    png: Vec<u8>,
}

#[wasm_bindgen]
impl Perception {
    #[wasm_bindgen(getter)]
    pub fn v(&self) -> f64 {
        self.v
    }

    #[wasm_bindgen(getter)]
    pub fn visible(&self) -> bool {
        self.visible
    }

    #[wasm_bindgen(getter)]
    pub fn extrapolated(&self) -> bool {
        self.extrapolated
    }

    #[wasm_bindgen(getter)]
    pub fn png(&self) -> Vec<u8> {
        self.png.clone()
    }
}

impl Demo {
    pub fn build(device_name: &str, category_name: &str, seed: u32) -> Result<Demo, String> {
        let native = device(device_name)?;
        let c = category(category_name)?;
        let (w, h) = working_resolution(&native, DEMO_SCALE).map_err(|e| e.to_string())?;
        let dev = native.at_resolution(w, h);
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
        let keypad = make_hybrid_keypad(&dev, c.sigma_lf(), c.sigma_hf(), &mut rng)
            .map_err(|e| e.to_string())?;
        let evaluator =
            VisibilityEvaluator::new(&keypad, DafSpec::default(), SsimParams::default())
                .map_err(|e| e.to_string())?;
        Ok(Demo { keypad, evaluator })
    }

    pub fn try_hybrid_png(&self) -> Result<Vec<u8>, String> {
        self.keypad
            .hybrid
            .composed
            .encode_png()
            .map_err(|e| e.to_string())
    }

    pub fn try_perceive(&self, r: f64, theta_deg: f64, phi_deg: f64) -> Result<Perception, String> {
        let pos = ViewingPosition::from_spherical(r, theta_deg.to_radians(), phi_deg.to_radians())
            .map_err(|e| e.to_string())?;
        let verdict = self
            .evaluator
            .verdict(&pos, DEFAULT_V_TH)
            .map_err(|e| e.to_string())?;
        let (image, _) = self.evaluator.perceived(&pos).map_err(|e| e.to_string())?;
        Ok(Perception {
            v: verdict.index_v,
            visible: verdict.visible,
            extrapolated: verdict.extrapolated_angles,
            png: image.encode_png().map_err(|e| e.to_string())?,
        })
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(device_name: &str, category_name: &str, seed: u32) -> Result<Demo, JsError> {
        Demo::build(device_name, category_name, seed).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.keypad.dims().0
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.keypad.dims().1
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_hf(&self) -> f64 {
        self.keypad.sigma_hf
    }

    /// Digits shown on buttons 0..9 to the user, in button order.
    #[wasm_bindgen(getter)]
    pub fn user_digits(&self) -> Vec<u8> {
        self.keypad.user_ordering.digits().to_vec()
    }

    pub fn hybrid_png(&self) -> Result<Vec<u8>, JsError> {
        self.try_hybrid_png().map_err(|e| JsError::new(&e))
    }

    pub fn perceive(&self, r: f64, theta_deg: f64, phi_deg: f64) -> Result<Perception, JsError> {
        self.try_perceive(r, theta_deg, phi_deg)
            .map_err(|e| JsError::new(&e))
    }
}

pub fn try_camera_distance(device_name: &str, category_name: &str) -> Result<f64, String> {
    let dev = device(device_name)?;
    let c = category(category_name)?;
    camera_safety_distance(c.sigma_hf(), &dev)
        .map(|r| r.safety_distance)
        .map_err(|e| e.to_string())
}

/// Inches beyond which the device's camera cannot resolve the user keypad.
#[wasm_bindgen]
pub fn camera_distance(device_name: &str, category_name: &str) -> Result<f64, JsError> {
    try_camera_distance(device_name, category_name).map_err(|e| JsError::new(&e))
}
