//! Keypad rendering, shuffling, button segmentation and hybrid assembly.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::DeviceProfile;
use crate::error::{Error, Result};
use crate::font;
use crate::raster::GrayImage;
use crate::spectral::{compose_hybrid, HybridImage};

/// Smallest canvas on which the digits stay legible.
pub const MIN_DIMS: (usize, usize) = (300, 533);

/// Digit shown on each button, indexed row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct DigitOrdering([u8; 10]);

impl DigitOrdering {
    /// 1 2 3 / 4 5 6 / 7 8 9 / 0.
    pub const REGULAR: DigitOrdering = DigitOrdering([1, 2, 3, 4, 5, 6, 7, 8, 9, 0]);

    pub fn new(digits: [u8; 10]) -> Result<Self> {
        let mut seen = [false; 10];
        for &d in &digits {
            if d > 9 || seen[d as usize] {
                return Err(Error::Layout(format!(
                    "ordering {digits:?} is not a permutation of 0..9"
                )));
            }
            seen[d as usize] = true;
        }
        Ok(Self(digits))
    }

    pub fn digit_at(&self, button: usize) -> u8 {
        self.0[button]
    }

    pub fn button_of(&self, digit: u8) -> usize {
        self.0
            .iter()
            .position(|&d| d == digit)
            .expect("ordering is a bijection")
    }

    pub fn digits(&self) -> [u8; 10] {
        self.0
    }
}

impl TryFrom<Vec<u8>> for DigitOrdering {
    type Error = Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        let arr: [u8; 10] = v
            .try_into()
            .map_err(|v: Vec<u8>| Error::Layout(format!("ordering has {} digits", v.len())))?;
        Self::new(arr)
    }
}

impl From<DigitOrdering> for Vec<u8> {
    fn from(o: DigitOrdering) -> Self {
        o.0.to_vec()
    }
}

/// Unbiased Fisher-Yates permutation of the ten digits.
pub fn shuffle_ordering<R: Rng + ?Sized>(rng: &mut R) -> DigitOrdering {
    let mut digits = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];
    digits.shuffle(rng);
    DigitOrdering(digits)
}

/// When the user's keypad is re-shuffled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShuffleMode {
    #[default]
    PerAttempt,
    PerDigit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Button grid. Buttons 0..8 fill the grid row-major; button 9 (the lone
/// bottom key) sits in the centre column of the next row when the first nine
/// fill whole rows, otherwise in the next free cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeypadLayout {
    pub rows: usize,
    pub cols: usize,
    pub origin_px: (usize, usize),
    pub cell_px: (usize, usize),
    pub ordering: DigitOrdering,
}

/// Fraction of the screen height, from the bottom, occupied by the grid.
const GRID_HEIGHT_FRACTION: f64 = 0.7;

impl KeypadLayout {
    /// 4x3 flush grid over the lower part of a `width x height` canvas.
    pub fn standard(width: usize, height: usize, ordering: DigitOrdering) -> Self {
        let (rows, cols) = (4, 3);
        let cell_w = width / cols;
        let cell_h = (GRID_HEIGHT_FRACTION * height as f64).floor() as usize / rows;
        Self {
            rows,
            cols,
            origin_px: ((width - cols * cell_w) / 2, height - rows * cell_h),
            cell_px: (cell_w, cell_h),
            ordering,
        }
    }

    pub fn with_ordering(&self, ordering: DigitOrdering) -> Self {
        Self { ordering, ..*self }
    }

    fn cell_of(&self, button: usize) -> (usize, usize) {
        if button < 9 {
            (button / self.cols, button % self.cols)
        } else if 9 % self.cols == 0 {
            (9 / self.cols, self.cols / 2)
        } else {
            (9 / self.cols, 9 % self.cols)
        }
    }

    pub fn button_rects(&self) -> Vec<Rect> {
        (0..10)
            .map(|b| {
                let (row, col) = self.cell_of(b);
                Rect {
                    x: self.origin_px.0 + col * self.cell_px.0,
                    y: self.origin_px.1 + row * self.cell_px.1,
                    w: self.cell_px.0,
                    h: self.cell_px.1,
                }
            })
            .collect()
    }

    /// Checks the grid shape and that every button fits a `width x height` canvas.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.cols == 0 || self.rows * self.cols < 10 || self.rows <= self.cell_of(9).0 {
            return Err(Error::Layout(format!(
                "a {}x{} grid cannot hold ten buttons",
                self.rows, self.cols
            )));
        }
        if self.cell_px.0 == 0 || self.cell_px.1 == 0 {
            return Err(Error::Layout("empty button cells".into()));
        }
        for r in self.button_rects() {
            if r.x + r.w > width || r.y + r.h > height {
                return Err(Error::OutOfBounds {
                    rect: (r.x, r.y, r.w, r.h),
                    width,
                    height,
                });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Per-digit artwork used instead of the stroke font.
///
/// Each asset is a coverage mask: 0 is background, 1 is ink.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphAtlas {
    glyphs: Vec<GrayImage>,
}

impl GlyphAtlas {
    pub fn new(glyphs: Vec<Option<GrayImage>>) -> Result<Self> {
        let missing: Vec<u8> = glyphs
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_none())
            .map(|(d, _)| d as u8)
            .chain(glyphs.len() as u8..10)
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingGlyphs(missing));
        }
        Ok(Self {
            glyphs: glyphs.into_iter().flatten().take(10).collect(),
        })
    }

    /// Loads `digit_0.png` ... `digit_9.png` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let glyphs = (0..10)
            .map(|d| {
                let path = dir.join(format!("digit_{d}.png"));
                if path.exists() {
                    GrayImage::load_png(&path).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(glyphs)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum GlyphSource {
    #[default]
    StrokeFont,
    Atlas(GlyphAtlas),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub background: f64,
    pub foreground: f64,
    /// Glyph height as a fraction of the button height.
    pub glyph_height: f64,
    /// Stroke width as a fraction of the glyph height.
    pub stroke_width: f64,
    pub glyphs: GlyphSource,
    pub face: Option<ButtonFace>,
}

/// Rounded button drawn under each glyph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButtonFace {
    pub fill: f64,
    pub outline: f64,
    /// Gap to the cell border, fraction of the cell height.
    pub inset: f64,
    /// Corner radius, fraction of the cell height.
    pub radius: f64,
    /// Outline width, fraction of the cell height; 0 for none.
    pub outline_width: f64,
}

impl ButtonFace {
    /// Signed distance to the face boundary, negative inside.
    fn distance(&self, cell: Rect, x: f64, y: f64) -> f64 {
        let h = cell.h as f64;
        let (inset, r) = (self.inset * h, self.radius * h);
        let hx = cell.w as f64 / 2.0 - inset;
        let hy = h / 2.0 - inset;
        let r = r.min(hx).min(hy).max(0.0);
        let qx = (x - cell.x as f64 - cell.w as f64 / 2.0).abs() - (hx - r);
        let qy = (y - cell.y as f64 - h / 2.0).abs() - (hy - r);
        qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0) - r
    }

    fn paint(&self, img: &mut GrayImage, cell: Rect) {
        let ow = self.outline_width * cell.h as f64;
        for y in cell.y..cell.y + cell.h {
            for x in cell.x..cell.x + cell.w {
                let d = self.distance(cell, x as f64 + 0.5, y as f64 + 0.5);
                let fill = (0.5 - d).clamp(0.0, 1.0);
                let mut v = img.get(x, y);
                v += fill * (self.fill - v);
                if ow > 0.0 {
                    let edge = (ow / 2.0 - (d + ow / 2.0).abs() + 0.5).clamp(0.0, 1.0);
                    v += edge * (self.outline - v);
                }
                img.set(x, y, v);
            }
        }
    }
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            background: 0.0,
            foreground: 1.0,
            glyph_height: 0.55,
            stroke_width: 0.14,
            glyphs: GlyphSource::StrokeFont,
            face: Some(ButtonFace {
                fill: 0.0,
                outline: 1.0,
                inset: 0.05,
                radius: 0.2,
                outline_width: 0.015,
            }),
        }
    }
}

fn glyph_mask(digit: u8, style: &RenderStyle, cell: Rect) -> (usize, usize, Vec<f64>) {
    let height = ((style.glyph_height * cell.h as f64).round() as usize).max(1);
    match &style.glyphs {
        GlyphSource::StrokeFont => {
            let stroke = (style.stroke_width * height as f64).max(1.0);
            font::rasterize(digit, height, stroke)
        }
        GlyphSource::Atlas(atlas) => {
            let src = &atlas.glyphs[digit as usize];
            let width = ((src.width() as f64 * height as f64 / src.height() as f64).round()
                as usize)
                .clamp(1, cell.w);
            let scaled = src.resize_bilinear(width, height.min(cell.h));
            let (w, h) = scaled.dims();
            let cov = scaled.into_samples().into_iter().map(|v| v.clamp(0.0, 1.0));
            (w, h, cov.collect())
        }
    }
}

/// Renders a keypad with `layout` on a `dims` canvas.
pub fn render_with_layout(
    layout: &KeypadLayout,
    style: &RenderStyle,
    dims: (usize, usize),
) -> Result<GrayImage> {
    let (width, height) = dims;
    if width < MIN_DIMS.0 || height < MIN_DIMS.1 {
        return Err(Error::domain(format!(
            "keypad canvas {width}x{height} is below the {}x{} minimum",
            MIN_DIMS.0, MIN_DIMS.1
        )));
    }
    layout.validate(width, height)?;
    let mut img = GrayImage::filled(width, height, style.background);
    for (button, cell) in layout.button_rects().into_iter().enumerate() {
        if let Some(face) = &style.face {
            face.paint(&mut img, cell);
        }
        let (gw, gh, cov) = glyph_mask(layout.ordering.digit_at(button), style, cell);
        // centre the mask, clipping anything that spills out of the cell
        let ox = cell.x as isize + (cell.w as isize - gw as isize) / 2;
        let oy = cell.y as isize + (cell.h as isize - gh as isize) / 2;
        for gy in 0..gh {
            for gx in 0..gw {
                let c = cov[gy * gw + gx];
                if c == 0.0 {
                    continue;
                }
                let (px, py) = (ox + gx as isize, oy + gy as isize);
                if px < cell.x as isize
                    || py < cell.y as isize
                    || px >= (cell.x + cell.w) as isize
                    || py >= (cell.y + cell.h) as isize
                {
                    continue;
                }
                let v = img.get(px as usize, py as usize);
                img.set(px as usize, py as usize, v + c * (style.foreground - v));
            }
        }
    }
    Ok(img)
}

/// Renders a keypad on the standard layout.
pub fn render_keypad(
    ordering: DigitOrdering,
    style: &RenderStyle,
    dims: (usize, usize),
) -> Result<GrayImage> {
    render_with_layout(
        &KeypadLayout::standard(dims.0, dims.1, ordering),
        style,
        dims,
    )
}

/// Exact crops of the ten buttons, index-aligned with the layout.
pub fn segment_buttons(image: &GrayImage, layout: &KeypadLayout) -> Result<Vec<GrayImage>> {
    layout
        .button_rects()
        .into_iter()
        .map(|r| image.crop(r.x, r.y, r.w, r.h))
        .collect()
}

/// A hybrid keypad together with everything needed to reproduce and analyse it.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridKeypad {
    pub hybrid: HybridImage,
    pub user_ordering: DigitOrdering,
    pub surfer_ordering: DigitOrdering,
    /// Button geometry; its ordering is the user's.
    pub layout: KeypadLayout,
    /// Device at the resolution the keypad was rendered at.
    pub device: DeviceProfile,
    pub sigma_lf: f64,
    pub sigma_hf: f64,
}

impl HybridKeypad {
    pub fn dims(&self) -> (usize, usize) {
        self.hybrid.composed.dims()
    }

    /// Keypad with the user component removed: the composite equals the
    /// low-passed surfer keypad.
    pub fn without_user_component(&self) -> Self {
        let mut k = self.clone();
        k.hybrid.user_high = GrayImage::filled(self.dims().0, self.dims().1, 0.0);
        k.hybrid.composed = k.hybrid.surfer_low.clone();
        k
    }
}

/// Builds a hybrid keypad for a known user ordering.
pub fn hybrid_keypad_with_ordering(
    device: &DeviceProfile,
    sigma_lf: f64,
    sigma_hf: f64,
    user_ordering: DigitOrdering,
    style: &RenderStyle,
) -> Result<HybridKeypad> {
    device.validate()?;
    if !(sigma_lf > 0.0 && sigma_hf > 0.0) {
        return Err(Error::domain(format!(
            "sigmas must be positive (lf = {sigma_lf}, hf = {sigma_hf})"
        )));
    }
    let dims = (device.display.n_x, device.display.n_y);
    let layout = KeypadLayout::standard(dims.0, dims.1, user_ordering);
    let user = render_with_layout(&layout, style, dims)?;
    let surfer = render_with_layout(&layout.with_ordering(DigitOrdering::REGULAR), style, dims)?;
    let hybrid = compose_hybrid(&user, &surfer, sigma_lf, sigma_hf)?;
    Ok(HybridKeypad {
        hybrid,
        user_ordering,
        surfer_ordering: DigitOrdering::REGULAR,
        layout,
        device: device.clone(),
        sigma_lf,
        sigma_hf,
    })
}

/// Shuffles a user ordering from `rng` and builds the hybrid keypad.
pub fn make_hybrid_keypad<R: Rng + ?Sized>(
    device: &DeviceProfile,
    sigma_lf: f64,
    sigma_hf: f64,
    rng: &mut R,
) -> Result<HybridKeypad> {
    let ordering = shuffle_ordering(rng);
    hybrid_keypad_with_ordering(
        device,
        sigma_lf,
        sigma_hf,
        ordering,
        &RenderStyle::default(),
    )
}
