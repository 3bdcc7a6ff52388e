//! Device profiles and the predefined keypad categories.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DisplayGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraProfile {
    pub focal_length_mm: f64,
    pub pixel_size_mm: f64,
}

impl CameraProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length_mm > 0.0 && self.pixel_size_mm > 0.0) {
            return Err(Error::domain(format!("invalid camera {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    pub display: DisplayGeometry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraProfile>,
}

impl DeviceProfile {
    /// 5.96 in, 1440x2560 at 493 ppi, with its rear camera.
    pub fn nexus6() -> Self {
        Self {
            name: "nexus6".into(),
            display: DisplayGeometry::from_pixels(1440, 2560, 493.0).expect("valid preset"),
            camera: Some(CameraProfile {
                focal_length_mm: 3.8,
                pixel_size_mm: 0.001127,
            }),
        }
    }

    /// 4.7 in, 750x1334 at 326 ppi.
    pub fn iphone6() -> Self {
        Self {
            name: "iphone6".into(),
            display: DisplayGeometry::from_pixels(750, 1334, 326.0).expect("valid preset"),
            camera: None,
        }
    }

    pub fn presets() -> Vec<DeviceProfile> {
        vec![Self::nexus6(), Self::iphone6()]
    }

    pub fn preset(name: &str) -> Option<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Self::presets().into_iter().find(|p| p.name == key)
    }

    pub fn validate(&self) -> Result<()> {
        self.display.validate()?;
        if let Some(c) = &self.camera {
            c.validate()?;
        }
        Ok(())
    }

    /// The same device sampled at a coarser (or finer) pixel grid.
    pub fn at_resolution(&self, n_x: usize, n_y: usize) -> Self {
        Self {
            name: self.name.clone(),
            display: self.display.at_resolution(n_x, n_y),
            camera: self.camera,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: DeviceProfile = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Predefined hybrid-keypad categories, from most usable to most secure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    C1,
    C2,
    C3,
    C4,
}

/// Low-pass deviation shared by all categories, c/im.
pub const DEFAULT_SIGMA_LF: f64 = 35.0;

impl Category {
    pub const ALL: [Category; 4] = [Category::C1, Category::C2, Category::C3, Category::C4];

    pub fn sigma_lf(self) -> f64 {
        DEFAULT_SIGMA_LF
    }

    pub fn sigma_hf(self) -> f64 {
        match self {
            Category::C1 => 145.0,
            Category::C2 => 215.0,
            Category::C3 => 305.0,
            Category::C4 => 440.0,
        }
    }

    /// Threat-model distance the category is meant to protect, inches.
    pub fn scenario_distance(self) -> f64 {
        match self {
            Category::C1 => 60.0,
            Category::C2 => 45.0,
            Category::C3 => 35.0,
            Category::C4 => 25.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::C1 => "c1",
            Category::C2 => "c2",
            Category::C3 => "c3",
            Category::C4 => "c4",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(Category::C1),
            "c2" => Ok(Category::C2),
            "c3" => Ok(Category::C3),
            "c4" => Ok(Category::C4),
            other => Err(Error::domain(format!("unknown category {other:?}"))),
        }
    }
}
