//! Hybrid-image PIN keypads: composition, perception simulation, visibility
//! scoring and shoulder-surfing safety distances.

pub mod bundle;
pub mod device;
pub mod error;
pub mod font;
pub mod geometry;
pub mod keypad;
pub mod perception;
pub mod raster;
pub mod safety;
pub mod spectral;
pub mod visibility;

pub use device::{CameraProfile, Category, DeviceProfile};
pub use error::{Error, Result};
pub use geometry::{DisplayGeometry, ViewingPosition, VisualAngle};
pub use keypad::{DigitOrdering, HybridKeypad, KeypadLayout};
pub use perception::DafSpec;
pub use raster::GrayImage;
pub use visibility::{SsimParams, VisibilityVerdict};
