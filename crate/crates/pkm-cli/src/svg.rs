//! Minimal deterministic SVG writer.
//!
//! Elements are emitted in insertion order with all coordinates printed
//! at fixed 6-decimal precision, so equal inputs produce byte-identical
//! documents.

use pkm_core::planar::{Rect, Vec2};

/// World-to-pixel mapping with a fixed margin and flipped y axis.
#[derive(Debug, Clone, Copy)]
pub struct Canvas {
    world: Rect,
    scale: f64,
    margin: f64,
    pub width: f64,
    pub height: f64,
}

impl Canvas {
    pub fn new(world: Rect, px_width: f64) -> Self {
        let margin = 24.0;
        let scale = (px_width - 2.0 * margin) / world.width();
        let height = world.height() * scale + 2.0 * margin;
        Canvas {
            world,
            scale,
            margin,
            width: px_width,
            height,
        }
    }

    pub fn x(&self, wx: f64) -> f64 {
        self.margin + (wx - self.world.min.x) * self.scale
    }

    pub fn y(&self, wy: f64) -> f64 {
        self.height - self.margin - (wy - self.world.min.y) * self.scale
    }

    pub fn len(&self, w: f64) -> f64 {
        w * self.scale
    }

    pub fn point(&self, p: Vec2) -> (f64, f64) {
        (self.x(p.x), self.y(p.y))
    }
}

pub struct Svg {
    pub canvas: Canvas,
    body: String,
}

impl Svg {
    pub fn new(canvas: Canvas) -> Self {
        Svg {
            canvas,
            body: String::new(),
        }
    }

    pub fn comment(&mut self, text: &str) {
        self.body.push_str(&format!("<!-- {text} -->\n"));
    }

    pub fn rect(&mut self, min: Vec2, w: f64, h: f64, style: &str) {
        let (x, y) = (self.canvas.x(min.x), self.canvas.y(min.y + h));
        self.body.push_str(&format!(
            "<rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" {}/>\n",
            x,
            y,
            self.canvas.len(w),
            self.canvas.len(h),
            style
        ));
    }

    pub fn line(&mut self, a: Vec2, b: Vec2, style: &str) {
        let (x1, y1) = self.canvas.point(a);
        let (x2, y2) = self.canvas.point(b);
        self.body.push_str(&format!(
            "<line x1=\"{x1:.6}\" y1=\"{y1:.6}\" x2=\"{x2:.6}\" y2=\"{y2:.6}\" {style}/>\n"
        ));
    }

    pub fn polyline(&mut self, points: &[Vec2], style: &str) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for p in points {
            let (x, y) = self.canvas.point(*p);
            d.push_str(&format!("{x:.6},{y:.6} "));
        }
        self.body
            .push_str(&format!("<polyline points=\"{}\" {}/>\n", d.trim_end(), style));
    }

    pub fn polygon(&mut self, points: &[Vec2], style: &str) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for p in points {
            let (x, y) = self.canvas.point(*p);
            d.push_str(&format!("{x:.6},{y:.6} "));
        }
        self.body
            .push_str(&format!("<polygon points=\"{}\" {}/>\n", d.trim_end(), style));
    }

    pub fn circle(&mut self, center: Vec2, r_world: f64, style: &str) {
        let (cx, cy) = self.canvas.point(center);
        self.body.push_str(&format!(
            "<circle cx=\"{cx:.6}\" cy=\"{cy:.6}\" r=\"{:.6}\" {style}/>\n",
            self.canvas.len(r_world)
        ));
    }

    /// Rotated ellipse; `angle` in radians, world frame.
    pub fn ellipse(&mut self, center: Vec2, rx: f64, ry: f64, angle: f64, style: &str) {
        let (cx, cy) = self.canvas.point(center);
        // svg rotates clockwise in pixel space; world rotation is ccw
        let deg = -angle.to_degrees();
        self.body.push_str(&format!(
            "<ellipse cx=\"0\" cy=\"0\" rx=\"{:.6}\" ry=\"{:.6}\" transform=\"translate({cx:.6} {cy:.6}) rotate({deg:.6})\" {style}/>\n",
            self.canvas.len(rx),
            self.canvas.len(ry),
        ));
    }

    pub fn text(&mut self, at: Vec2, size_px: f64, content: &str) {
        let (x, y) = self.canvas.point(at);
        self.body.push_str(&format!(
            "<text x=\"{x:.6}\" y=\"{y:.6}\" font-family=\"monospace\" font-size=\"{size_px:.6}\">{content}</text>\n"
        ));
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{}</svg>\n",
            self.canvas.width, self.canvas.height, self.canvas.width, self.canvas.height, self.body
        )
    }
}

/// Linear interpolation between two `#rrggbb` colors.
fn lerp_color(a: (u8, u8, u8), b: (u8, u8, u8), t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

/// Diverging blue-white-red colormap on a log scale: `value = center`
/// maps to white; the scale is clipped to `[lo, hi]`.
pub fn log_diverging_color(value: f64, lo: f64, hi: f64) -> String {
    let blue = (33, 102, 172);
    let white = (247, 247, 247);
    let red = (178, 24, 43);
    if !value.is_finite() || value <= 0.0 {
        return "#999999".into();
    }
    let u = (value.ln() - lo.ln()) / (hi.ln() - lo.ln());
    let u = u.clamp(0.0, 1.0);
    if u < 0.5 {
        lerp_color(blue, white, u * 2.0)
    } else {
        lerp_color(white, red, (u - 0.5) * 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_input_is_byte_identical() {
        let render = || {
            let canvas = Canvas::new(Rect::from_bounds(-1.0, -1.0, 1.0, 1.0), 600.0);
            let mut svg = Svg::new(canvas);
            svg.rect(Vec2::new(-0.5, -0.5), 1.0, 1.0, "fill=\"#cfe8cf\"");
            svg.polyline(
                &[Vec2::new(-0.9, 0.9), Vec2::ZERO, Vec2::new(0.9, -0.9)],
                "fill=\"none\" stroke=\"#000000\"",
            );
            svg.ellipse(Vec2::ZERO, 0.3, 0.1, 0.5, "fill=\"none\" stroke=\"#336699\"");
            svg.finish()
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn colormap_centers_on_white() {
        assert_eq!(log_diverging_color(1.0, 1.0 / 9.0, 9.0), "#f7f7f7");
        assert_eq!(log_diverging_color(f64::NAN, 1.0 / 9.0, 9.0), "#999999");
        // clipped at the ends
        assert_eq!(
            log_diverging_color(100.0, 1.0 / 9.0, 9.0),
            log_diverging_color(9.0, 1.0 / 9.0, 9.0)
        );
    }

    #[test]
    fn y_axis_is_flipped() {
        let canvas = Canvas::new(Rect::from_bounds(0.0, 0.0, 1.0, 1.0), 100.0);
        assert!(canvas.y(1.0) < canvas.y(0.0));
    }
}
