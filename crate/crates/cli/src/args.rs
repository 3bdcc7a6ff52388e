use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use illusionpad::geometry::ViewingPosition;
use illusionpad::DeviceProfile;

use crate::output::CliError;
use crate::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "illusionpad",
    version,
    about = "Hybrid-image PIN keypads and their shoulder-surfing analysis"
)]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory of device profile JSON files.
    #[arg(long, global = true, env = crate::PROFILES_ENV)]
    pub profiles: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a hybrid keypad bundle.
    Generate(GenerateArgs),
    /// Filter an image as seen from a viewing position.
    Simulate(SimulateArgs),
    /// Visibility verdict for a bundle at one position.
    Visibility(VisibilityArgs),
    /// Scan a 3D grid of positions.
    Region(RegionArgs),
    /// Naked-eye or camera safety distance.
    Safety(SafetyArgs),
    /// Smallest high-pass deviation for a target safety distance.
    Tune(TuneArgs),
    /// Radially averaged log power spectrum of an image.
    Spectrum(SpectrumArgs),
}

/// Accepts `30deg` or bare radians.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, degrees) = match t.strip_suffix("deg") {
        Some(n) => (n.trim(), true),
        None => (t, false),
    };
    let v: f64 = num.parse().map_err(|_| format!("invalid angle {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("invalid angle {s:?}"));
    }
    Ok(if degrees { v.to_radians() } else { v })
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h = h.parse().map_err(|_| format!("bad height in {s:?}"))?;
    Ok((w, h))
}

fn parse_grid(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    match parts.as_slice() {
        [a, b, c] => {
            let n = |t: &str| t.parse::<usize>().map_err(|_| format!("bad grid {s:?}"));
            let g = (n(a)?, n(b)?, n(c)?);
            if g.0 == 0 || g.1 == 0 || g.2 == 0 {
                return Err(format!("empty grid {s:?}"));
            }
            Ok(g)
        }
        _ => Err(format!("expected NXxNYxNZ, got {s:?}")),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B, got {s:?}"))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| format!("bad number in {s:?}"))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| format!("bad number in {s:?}"))?;
    Ok((a, b))
}

#[derive(Debug, Args)]
pub struct ResolutionArgs {
    /// Pixel grid to work at, `WxH` or `native`.
    #[arg(long, conflicts_with = "scale")]
    pub resolution: Option<String>,
    /// Fraction of the native resolution.
    #[arg(long)]
    pub scale: Option<f64>,
}

impl ResolutionArgs {
    /// `None` leaves the choice to the library default.
    pub fn resolve(&self, device: &DeviceProfile) -> CliResult<Option<(usize, usize)>> {
        if let Some(r) = &self.resolution {
            if r == "native" {
                return Ok(Some((device.display.n_x, device.display.n_y)));
            }
            return parse_dims(r).map(Some).map_err(CliError::Usage);
        }
        match self.scale {
            Some(s) => Ok(Some(illusionpad::bundle::working_resolution(device, s)?)),
            None => Ok(None),
        }
    }
}

#[derive(Debug, Args)]
pub struct PositionArgs {
    /// Distance to the screen centre, inches.
    #[arg(long)]
    pub r: Option<f64>,
    /// Polar angle from the +y axis (`deg` suffix or radians).
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Azimuth in the zx plane (`deg` suffix or radians).
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
}

impl PositionArgs {
    pub fn resolve(&self) -> CliResult<ViewingPosition> {
        let spherical = [self.r, self.theta, self.phi];
        let cartesian = [self.x, self.y, self.z];
        let any = |v: &[Option<f64>]| v.iter().any(Option::is_some);
        match (any(&spherical), any(&cartesian)) {
            (true, false) => match spherical {
                [Some(r), Some(t), Some(p)] => Ok(ViewingPosition::from_spherical(r, t, p)?),
                _ => Err(CliError::Usage(
                    "spherical position needs --r, --theta and --phi".into(),
                )),
            },
            (false, true) => match cartesian {
                [Some(x), Some(y), Some(z)] => Ok(ViewingPosition::new(x, y, z)?),
                _ => Err(CliError::Usage(
                    "cartesian position needs --x, --y and --z".into(),
                )),
            },
            (true, true) => Err(CliError::Usage(
                "give either --r/--theta/--phi or --x/--y/--z".into(),
            )),
            (false, false) => Err(CliError::Usage("a viewing position is required".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Visibility threshold.
    #[arg(long, default_value_t = illusionpad::visibility::DEFAULT_V_TH)]
    pub v_th: f64,
    /// Head-on DAF cut-off, c/deg.
    #[arg(long)]
    pub daf_f1: Option<f64>,
    /// Ratio between the DAF cut-off and the start of its roll-off.
    #[arg(long)]
    pub daf_ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Preset name, profile name, or path to a profile JSON.
    #[arg(long)]
    pub device: String,
    /// c1..c4
    #[arg(long)]
    pub category: Option<String>,
    #[arg(long)]
    pub sigma_lf: Option<f64>,
    #[arg(long)]
    pub sigma_hf: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory of digit_0.png .. digit_9.png glyph assets.
    #[arg(long)]
    pub glyphs: Option<PathBuf>,
    #[command(flatten)]
    pub resolution: ResolutionArgs,
    #[arg(long, default_value = "keypad")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "nexus6")]
    pub device: String,
    #[command(flatten)]
    pub position: PositionArgs,
    #[arg(long)]
    pub daf_f1: Option<f64>,
    #[arg(long, default_value = "perceived.png")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[command(flatten)]
    pub position: PositionArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also write the verdict JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Cells per axis, `NXxNYxNZ`.
    #[arg(long, value_parser = parse_grid, default_value = "20x20x20")]
    pub grid: (usize, usize, usize),
    /// Half extents in x and y, inches.
    #[arg(long, value_parser = parse_pair, default_value = "60,60")]
    pub extent: (f64, f64),
    /// Nearest and farthest z, inches.
    #[arg(long, value_parser = parse_pair, default_value = "6,120")]
    pub z_range: (f64, f64),
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "region.csv")]
    pub out: PathBuf,
    /// PNG of the zx plane nearest y = 0.
    #[arg(long)]
    pub slice: Option<PathBuf>,
    /// Pixels per cell in the slice.
    #[arg(long, default_value_t = 8)]
    pub block: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SafetyModeArg {
    Camera,
    NakedEye,
}

#[derive(Debug, Args)]
pub struct SafetyArgs {
    #[arg(long, value_enum)]
    pub mode: SafetyModeArg,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long)]
    pub device: Option<String>,
    #[arg(long)]
    pub sigma_hf: Option<f64>,
    #[arg(long)]
    pub category: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Required safety distance, inches.
    #[arg(long)]
    pub target: f64,
    #[arg(long, default_value = "nexus6")]
    pub device: String,
    #[arg(long, default_value_t = illusionpad::device::DEFAULT_SIGMA_LF)]
    pub sigma_lf: f64,
    #[command(flatten)]
    pub resolution: ResolutionArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "spectrum.csv")]
    pub out: PathBuf,
}
