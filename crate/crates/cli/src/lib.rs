//! `illusionpad` command line.

mod args;
mod output;
mod profiles;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use illusionpad::bundle::{
    layout_json, BundleImages, BundleMetadata, KeypadRequest, SCHEMA_VERSION,
};
use illusionpad::keypad::{GlyphAtlas, GlyphSource, RenderStyle};
use illusionpad::perception::{simulate_perception, ViewingConditions};
use illusionpad::safety::{
    camera_safety_distance, naked_eye_safety_distance_with, solve_sigma_hf_with,
    visibility_region_with, AnalysisConfig, GridAxis, RaySearch, RegionGrid,
};
use illusionpad::spectral::{profile_to_csv, spectrum_profile};
use illusionpad::visibility::{VerdictReport, VisibilityEvaluator};
use illusionpad::{Category, DeviceProfile, GrayImage, HybridKeypad};
use serde::Serialize;
use serde_json::json;

use args::*;
pub use args::{parse_angle, Cli, Command};
use output::{write_atomic, CliError};
pub use profiles::{resolve_device, PROFILES_ENV};

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let ctx = Context {
        json: cli.json,
        profiles: cli.profiles.clone(),
    };
    match &cli.command {
        Command::Generate(a) => generate(&ctx, a, out),
        Command::Simulate(a) => simulate(&ctx, a, out),
        Command::Visibility(a) => visibility(&ctx, a, out),
        Command::Region(a) => region(&ctx, a, out),
        Command::Safety(a) => safety(&ctx, a, out),
        Command::Tune(a) => tune(&ctx, a, out),
        Command::Spectrum(a) => spectrum(&ctx, a, out),
    }
}

struct Context {
    json: bool,
    profiles: Option<PathBuf>,
}

impl Context {
    fn device(&self, spec: &str) -> CliResult<DeviceProfile> {
        resolve_device(spec, self.profiles.as_deref())
    }

    /// Prints `body` as a versioned JSON document, or `human` otherwise.
    fn emit<T: Serialize>(
        &self,
        out: &mut dyn Write,
        command: &str,
        body: &T,
        human: &str,
    ) -> CliResult<()> {
        if self.json {
            let mut doc = serde_json::to_value(body).map_err(illusionpad::Error::from)?;
            if let Some(map) = doc.as_object_mut() {
                map.insert("schema_version".into(), json!(SCHEMA_VERSION));
                map.insert("command".into(), json!(command));
            }
            let text = serde_json::to_string_pretty(&doc).map_err(illusionpad::Error::from)?;
            writeln!(out, "{text}")?;
        } else {
            writeln!(out, "{human}")?;
        }
        Ok(())
    }
}

fn style_for(glyphs: Option<&Path>) -> CliResult<RenderStyle> {
    let mut style = RenderStyle::default();
    if let Some(dir) = glyphs {
        style.glyphs = GlyphSource::Atlas(GlyphAtlas::load_dir(dir)?);
    }
    Ok(style)
}

fn load_bundle(dir: &Path) -> CliResult<(BundleMetadata, HybridKeypad)> {
    let path = dir.join("metadata.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read bundle {}: {e}", path.display())))?;
    let meta = BundleMetadata::from_json(&text)?;
    let style = style_for(meta.glyph_dir.as_deref().map(Path::new))?;
    let keypad = meta.rebuild(&style)?;
    Ok((meta, keypad))
}

fn analysis_config(a: &ModelArgs) -> AnalysisConfig {
    let mut config = AnalysisConfig {
        v_th: a.v_th,
        ..AnalysisConfig::default()
    };
    if let Some(f1) = a.daf_f1 {
        config.daf.f1_base = f1;
    }
    if let Some(r) = a.daf_ratio {
        config.daf.ratio_r = r;
    }
    config
}

fn generate(ctx: &Context, a: &GenerateArgs, out: &mut dyn Write) -> CliResult<()> {
    let device = ctx.device(&a.device)?;
    let category = a
        .category
        .as_deref()
        .map(str::parse::<Category>)
        .transpose()?;
    if category.is_none() && a.sigma_hf.is_none() {
        return Err(CliError::Usage("pass --category or --sigma-hf".into()));
    }
    let request = KeypadRequest {
        resolution: a.resolution.resolve(&device)?,
        device,
        category,
        sigma_lf: a.sigma_lf,
        sigma_hf: a.sigma_hf,
        seed: a.seed.unwrap_or_else(rand::random),
    };
    let style = style_for(a.glyphs.as_deref())?;
    let (keypad, mut meta) = request.build(&style)?;
    meta.glyph_dir = a.glyphs.as_ref().map(|p| p.display().to_string());
    let images = BundleImages::encode(&keypad)?;
    let meta_json = serde_json::to_string_pretty(&meta).map_err(illusionpad::Error::from)?;
    let layout = layout_json(&keypad.layout)?;

    std::fs::create_dir_all(&a.out)?;
    write_atomic(&a.out.join("hybrid.png"), &images.hybrid)?;
    write_atomic(&a.out.join("user_high.png"), &images.user_high)?;
    write_atomic(&a.out.join("surfer_low.png"), &images.surfer_low)?;
    write_atomic(&a.out.join("layout.json"), layout.as_bytes())?;
    write_atomic(&a.out.join("metadata.json"), meta_json.as_bytes())?;

    let human = format!(
        "wrote {} ({}x{}, sigma_lf {}, sigma_hf {}, seed {})",
        a.out.display(),
        meta.resolution.0,
        meta.resolution.1,
        meta.sigma_lf,
        meta.sigma_hf,
        meta.seed
    );
    ctx.emit(
        out,
        "generate",
        &json!({ "out": a.out, "metadata": meta }),
        &human,
    )
}

fn simulate(ctx: &Context, a: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let device = ctx.device(&a.device)?;
    let pos = a.position.resolve()?;
    let image = GrayImage::load_png(&a.input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.input.display())))?;
    let (w, h) = image.dims();
    let device = device.at_resolution(w, h);
    let mut daf = illusionpad::DafSpec::default();
    if let Some(f1) = a.daf_f1 {
        daf.f1_base = f1;
    }
    let perceived = simulate_perception(&image, &device.display, &pos, &daf)?;
    let cond = ViewingConditions::new(&pos, &device.display, &daf)?;
    let (deg_x, deg_y) = cond.angle.degrees();
    let echo = json!({
        "input": a.input,
        "output": a.out,
        "position": illusionpad::visibility::SphericalPosition::from(&pos),
        "f1": cond.f1,
        "visual_angle_rad": [cond.angle.theta_x, cond.angle.theta_y],
        "visual_angle_deg": [deg_x, deg_y],
        "extrapolated_angles": cond.extrapolated_angles,
    });
    write_atomic(&a.out, &perceived.encode_png()?)?;
    let echo_text = serde_json::to_string_pretty(&echo).map_err(illusionpad::Error::from)?;
    write_atomic(&a.out.with_extension("json"), echo_text.as_bytes())?;
    let human = format!(
        "wrote {} (f1 {:.3} c/deg, visual angle {:.3} x {:.3} deg)",
        a.out.display(),
        cond.f1,
        deg_x,
        deg_y
    );
    ctx.emit(out, "simulate", &echo, &human)
}

fn visibility(ctx: &Context, a: &VisibilityArgs, out: &mut dyn Write) -> CliResult<()> {
    let pos = a.position.resolve()?;
    let config = analysis_config(&a.model);
    let (_, keypad) = load_bundle(&a.bundle)?;
    let evaluator = VisibilityEvaluator::new(&keypad, config.daf, config.ssim)?;
    let verdict = evaluator.verdict(&pos, config.v_th)?;
    let report = VerdictReport::new(&verdict, &pos, &keypad);
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&report).map_err(illusionpad::Error::from)?;
        write_atomic(path, text.as_bytes())?;
    }
    let human = format!(
        "v = {:.4} (threshold {}): {}",
        report.v,
        report.v_th,
        if report.visible {
            "visible"
        } else {
            "not visible"
        }
    );
    ctx.emit(out, "visibility", &report, &human)
}

fn region(ctx: &Context, a: &RegionArgs, out: &mut dyn Write) -> CliResult<()> {
    let (nx, ny, nz) = a.grid;
    let grid = RegionGrid {
        x: GridAxis::centered(a.extent.0, nx),
        y: GridAxis::centered(a.extent.1, ny),
        z: GridAxis::new(a.z_range.0, a.z_range.1, nz),
    };
    let config = analysis_config(&a.model);
    let (meta, keypad) = load_bundle(&a.bundle)?;
    let region = visibility_region_with(&keypad, &meta.device, &grid, &config)?;
    write_atomic(&a.out, region.to_csv().as_bytes())?;
    if let Some(path) = &a.slice {
        write_atomic(path, &region.zx_slice(a.block).encode_png()?)?;
    }
    let summary = json!({
        "cells": region.cells.len(),
        "visible_cells": region.visible_count(),
        "v_th": region.v_th,
        "grid": region.grid,
        "boundary": region.boundary,
        "csv": a.out,
    });
    let human = match &region.boundary {
        Some(b) => format!(
            "{} of {} cells visible; farthest at r0 = {:.2} in (theta {:.3}, phi {:.3})",
            region.visible_count(),
            region.cells.len(),
            b.max_r0,
            b.theta0,
            b.phi0
        ),
        None => format!("no visible cells among {}", region.cells.len()),
    };
    ctx.emit(out, "region", &summary, &human)
}

fn safety(ctx: &Context, a: &SafetyArgs, out: &mut dyn Write) -> CliResult<()> {
    let result = match a.mode {
        SafetyModeArg::Camera => {
            let (device, sigma_hf) = match &a.bundle {
                Some(dir) => {
                    let (meta, _) = load_bundle(dir)?;
                    (meta.device, meta.sigma_hf)
                }
                None => {
                    let device = ctx.device(a.device.as_deref().unwrap_or("nexus6"))?;
                    let sigma = match (a.sigma_hf, a.category.as_deref()) {
                        (Some(s), _) => s,
                        (None, Some(c)) => c.parse::<Category>()?.sigma_hf(),
                        (None, None) => {
                            return Err(CliError::Usage(
                                "camera mode needs --bundle, --sigma-hf or --category".into(),
                            ))
                        }
                    };
                    (device, sigma)
                }
            };
            camera_safety_distance(sigma_hf, &device)?
        }
        SafetyModeArg::NakedEye => {
            let dir = a
                .bundle
                .as_ref()
                .ok_or_else(|| CliError::Usage("naked-eye mode needs --bundle".into()))?;
            let (meta, keypad) = load_bundle(dir)?;
            let device = match &a.device {
                Some(spec) => ctx.device(spec)?,
                None => meta.device.clone(),
            };
            naked_eye_safety_distance_with(
                &keypad,
                &device,
                &analysis_config(&a.model),
                &RaySearch::default(),
            )?
        }
    };
    let human = format!("safety distance {:.2} in", result.safety_distance);
    ctx.emit(out, "safety", &result, &human)
}

fn tune(ctx: &Context, a: &TuneArgs, out: &mut dyn Write) -> CliResult<()> {
    let device = ctx.device(&a.device)?;
    let working = match a.resolution.resolve(&device)? {
        Some((w, h)) => device.at_resolution(w, h),
        None => {
            let (w, h) = illusionpad::bundle::working_resolution(
                &device,
                illusionpad::bundle::DEFAULT_WORKING_SCALE,
            )?;
            device.at_resolution(w, h)
        }
    };
    let solution = solve_sigma_hf_with(
        a.target,
        &working,
        a.sigma_lf,
        &analysis_config(&a.model),
        &illusionpad::safety::SOLVE_SEEDS,
    )?;
    let human = format!(
        "sigma_hf {:.1} c/im reaches v = {:.4} at {} in",
        solution.sigma_hf, solution.v, a.target
    );
    ctx.emit(out, "tune", &solution, &human)
}

fn spectrum(ctx: &Context, a: &SpectrumArgs, out: &mut dyn Write) -> CliResult<()> {
    let image = GrayImage::load_png(&a.input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.input.display())))?;
    let profile = spectrum_profile(&image)?;
    write_atomic(&a.out, profile_to_csv(&profile).as_bytes())?;
    let summary = json!({ "input": a.input, "csv": a.out, "points": profile.len() });
    let human = format!("wrote {} ({} radial bins)", a.out.display(), profile.len());
    ctx.emit(out, "spectrum", &summary, &human)
}
