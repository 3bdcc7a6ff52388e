use std::path::{Path, PathBuf};

use illusionpad::DeviceProfile;

use crate::output::CliError;
use crate::CliResult;

pub const PROFILES_ENV: &str = "ILLUSIONPAD_PROFILES";

/// Looks `spec` up as a profile file, then in the profile directory, then
/// among the built-in presets.
pub fn resolve_device(spec: &str, dir: Option<&Path>) -> CliResult<DeviceProfile> {
    let direct = PathBuf::from(spec);
    if spec.ends_with(".json") || direct.components().count() > 1 {
        return load(&direct);
    }
    if let Some(dir) = dir {
        let candidate = dir.join(format!("{spec}.json"));
        if candidate.is_file() {
            return load(&candidate);
        }
    }
    DeviceProfile::preset(spec).ok_or_else(|| {
        let known: Vec<String> = DeviceProfile::presets()
            .into_iter()
            .map(|p| p.name)
            .collect();
        CliError::Usage(format!(
            "unknown device {spec:?}; presets: {}",
            known.join(", ")
        ))
    })
}

fn load(path: &Path) -> CliResult<DeviceProfile> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "device profile {} not found",
            path.display()
        )));
    }
    DeviceProfile::load(path).map_err(|e| match e {
        illusionpad::Error::Json(j) => {
            CliError::Usage(format!("bad profile {}: {j}", path.display()))
        }
        other => other.into(),
    })
}
