//! Built-in stroke font for the ten digits.
//!
//! Glyphs are polylines in a box 0.6 wide and 1.0 tall, y pointing down.

use std::f64::consts::PI;

pub const GLYPH_ASPECT: f64 = 0.6;

type Polyline = Vec<(f64, f64)>;

/// Points on an elliptical arc from `a0` to `a1` degrees (90 is up).
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, a0: f64, a1: f64) -> Polyline {
    let steps = (((a1 - a0).abs() / 6.0).ceil() as usize).max(2);
    (0..=steps)
        .map(|i| {
            let a = (a0 + (a1 - a0) * i as f64 / steps as f64) * PI / 180.0;
            (cx + rx * a.cos(), cy - ry * a.sin())
        })
        .collect()
}

fn join(mut a: Polyline, b: &[(f64, f64)]) -> Polyline {
    a.extend_from_slice(b);
    a
}

fn rotate_half_turn(lines: Vec<Polyline>) -> Vec<Polyline> {
    lines
        .into_iter()
        .map(|l| {
            l.into_iter()
                .map(|(x, y)| (GLYPH_ASPECT - x, 1.0 - y))
                .collect()
        })
        .collect()
}

pub fn strokes(digit: u8) -> Vec<Polyline> {
    match digit {
        0 => vec![arc(0.3, 0.5, 0.28, 0.48, 0.0, 360.0)],
        1 => vec![vec![(0.12, 0.2), (0.34, 0.02), (0.34, 0.98)]],
        2 => vec![join(
            arc(0.3, 0.28, 0.27, 0.26, 160.0, -35.0),
            &[(0.03, 0.98), (0.58, 0.98)],
        )],
        3 => vec![
            arc(0.29, 0.26, 0.25, 0.24, 150.0, -90.0),
            arc(0.29, 0.74, 0.28, 0.24, 90.0, -150.0),
        ],
        4 => vec![vec![(0.44, 0.98), (0.44, 0.02), (0.02, 0.7), (0.58, 0.7)]],
        5 => vec![join(
            vec![(0.54, 0.02), (0.1, 0.02), (0.06, 0.45)],
            &arc(0.3, 0.68, 0.27, 0.3, 145.0, -145.0),
        )],
        6 => vec![
            arc(0.3, 0.7, 0.27, 0.28, 0.0, 360.0),
            arc(0.3, 0.7, 0.27, 0.68, 65.0, 180.0),
        ],
        7 => vec![vec![(0.02, 0.02), (0.58, 0.02), (0.2, 0.98)]],
        8 => vec![
            arc(0.3, 0.25, 0.23, 0.23, 0.0, 360.0),
            arc(0.3, 0.73, 0.28, 0.25, 0.0, 360.0),
        ],
        9 => rotate_half_turn(strokes(6)),
        _ => Vec::new(),
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Anti-aliased coverage mask of `digit`, `height` pixels tall.
///
/// Returns `(width, height, coverage)` with coverage in `[0, 1]`.
pub fn rasterize(digit: u8, height: usize, stroke_px: f64) -> (usize, usize, Vec<f64>) {
    let pad = (stroke_px / 2.0).ceil() as usize + 1;
    let scale = height as f64;
    let width = (GLYPH_ASPECT * scale).round() as usize;
    let (w, h) = (width + 2 * pad, height + 2 * pad);
    let segments: Vec<((f64, f64), (f64, f64))> = strokes(digit)
        .iter()
        .flat_map(|line| {
            line.windows(2).map(|s| {
                (
                    (s[0].0 * scale + pad as f64, s[0].1 * scale + pad as f64),
                    (s[1].0 * scale + pad as f64, s[1].1 * scale + pad as f64),
                )
            })
        })
        .collect();
    let half = stroke_px / 2.0;
    let mut coverage = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let d = segments
                .iter()
                .map(|&(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min);
            coverage[y * w + x] = (half - d + 0.5).clamp(0.0, 1.0);
        }
    }
    (w, h, coverage)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_digit_has_ink_inside_its_box() {
        for d in 0..10 {
            let lines = strokes(d);
            assert!(!lines.is_empty());
            for (x, y) in lines.iter().flatten() {
                assert!((-1e-9..=GLYPH_ASPECT + 1e-9).contains(x), "{d}: x={x}");
                assert!((-1e-9..=1.0 + 1e-9).contains(y), "{d}: y={y}");
            }
            let (_, _, cov) = rasterize(d, 60, 5.0);
            assert!(cov.iter().sum::<f64>() > 100.0);
        }
    }

    #[test]
    fn glyphs_are_distinct() {
        let masks: Vec<Vec<f64>> = (0..10).map(|d| rasterize(d, 50, 4.0).2).collect();
        for a in 0..10 {
            for b in a + 1..10 {
                let diff: f64 = masks[a]
                    .iter()
                    .zip(&masks[b])
                    .map(|(x, y)| (x - y).abs())
                    .sum();
                assert!(diff > 50.0, "{a} vs {b}: {diff}");
            }
        }
    }
}
