//! Plot layers: occupancy cells, amplification heatmaps with bound
//! isolines, isotropy locus, workspace square, rails, and manipulability
//! ellipse glyphs. Layers render in the order they are added.

use pkm_core::kinetostatics::{IsotropyLocus, VafGrid};
use pkm_core::mechanisms::{inverse_kinematics, MechanismGeometry, MechanismKind};
use pkm_core::planar::{singular_axes2, Mat2, Rect, Vec2};
use pkm_core::singularity::{CWorkspace, CellClass, Interval};
use pkm_core::workspace::SquareWorkspace;

use crate::svg::{log_diverging_color, Svg};

/// Default color-scale clip for amplification heatmaps: log-symmetric
/// around 1 so the bounds 1/3 and 3 sit at mirrored positions.
pub const HEAT_SCALE_LO: f64 = 1.0 / 9.0;
pub const HEAT_SCALE_HI: f64 = 9.0;

pub fn cell_color(class: CellClass) -> &'static str {
    match class {
        CellClass::Unreachable => "#f0f0f0",
        CellClass::Regular => "#cfe8cf",
        CellClass::SerialBoundary => "#f4b183",
        CellClass::ParallelSingular => "#d64545",
    }
}

/// Occupancy-grid cells, colored by class. Unreachable cells are skipped
/// (the background shows through); runs of equal class within a row are
/// merged into one rectangle.
pub fn cworkspace_layer(svg: &mut Svg, cw: &CWorkspace) {
    svg.comment("layer: cworkspace cells");
    for j in 0..cw.ny {
        let mut i = 0;
        while i < cw.nx {
            let class = cw.class_at(i, j);
            let mut end = i + 1;
            while end < cw.nx && cw.class_at(end, j) == class {
                end += 1;
            }
            if class != CellClass::Unreachable {
                let c0 = cw.cell_center(i, j);
                svg.rect(
                    Vec2::new(c0.x - 0.5 * cw.pitch, c0.y - 0.5 * cw.pitch),
                    (end - i) as f64 * cw.pitch,
                    cw.pitch,
                    &format!("fill=\"{}\"", cell_color(class)),
                );
            }
            i = end;
        }
    }
}

/// Heatmap of the larger amplification factor on a log color scale.
pub fn heatmap_layer(svg: &mut Svg, grid: &VafGrid) {
    svg.comment("layer: lambda_max heatmap");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let v = grid.lambda_max[grid.index(i, j)];
            if !v.is_finite() {
                continue;
            }
            let c = grid.cell_center(i, j);
            svg.rect(
                Vec2::new(c.x - 0.5 * grid.pitch, c.y - 0.5 * grid.pitch),
                grid.pitch,
                grid.pitch,
                &format!(
                    "fill=\"{}\"",
                    log_diverging_color(v, HEAT_SCALE_LO, HEAT_SCALE_HI)
                ),
            );
        }
    }
}

/// Isolines of a per-cell scalar field at `iso`, by marching squares on
/// the cell-center lattice. NaN cells break the contour.
pub fn isoline_segments(
    values: &[f64],
    nx: usize,
    ny: usize,
    origin: Vec2,
    pitch: f64,
    iso: f64,
) -> Vec<(Vec2, Vec2)> {
    let at = |i: usize, j: usize| values[j * nx + i];
    let center = |i: usize, j: usize| {
        Vec2::new(
            origin.x + (i as f64 + 0.5) * pitch,
            origin.y + (j as f64 + 0.5) * pitch,
        )
    };
    let mut segments = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let corners = [
                (center(i, j), at(i, j)),
                (center(i + 1, j), at(i + 1, j)),
                (center(i + 1, j + 1), at(i + 1, j + 1)),
                (center(i, j + 1), at(i, j + 1)),
            ];
            if corners.iter().any(|(_, v)| !v.is_finite()) {
                continue;
            }
            let mut crossings: Vec<Vec2> = Vec::new();
            for k in 0..4 {
                let (pa, va) = corners[k];
                let (pb, vb) = corners[(k + 1) % 4];
                if (va - iso) * (vb - iso) < 0.0 {
                    let t = (iso - va) / (vb - va);
                    crossings.push(pa + (pb - pa) * t);
                }
            }
            if crossings.len() == 2 {
                segments.push((crossings[0], crossings[1]));
            } else if crossings.len() == 4 {
                // saddle: pair by edge order
                segments.push((crossings[0], crossings[1]));
                segments.push((crossings[2], crossings[3]));
            }
        }
    }
    segments
}

pub fn bound_isolines_layer(svg: &mut Svg, grid: &VafGrid, lo: f64, hi: f64) {
    svg.comment("layer: bound isolines");
    let origin = grid.bounds.min;
    if hi.is_finite() {
        for (a, b) in isoline_segments(&grid.lambda_max, grid.nx, grid.ny, origin, grid.pitch, hi)
        {
            svg.line(a, b, "stroke=\"#7a1515\" stroke-width=\"1.2\"");
        }
    }
    if lo > 0.0 {
        for (a, b) in isoline_segments(&grid.lambda_min, grid.nx, grid.ny, origin, grid.pitch, lo)
        {
            svg.line(
                a,
                b,
                "stroke=\"#14447a\" stroke-width=\"1.2\" stroke-dasharray=\"4 3\"",
            );
        }
    }
}

pub fn locus_layer(svg: &mut Svg, locus: &IsotropyLocus) {
    svg.comment("layer: isotropy locus");
    svg.polyline(
        &locus.points,
        "fill=\"none\" stroke=\"#1a7a1a\" stroke-width=\"1.6\"",
    );
}

pub fn square_layer(svg: &mut Svg, geom: &MechanismGeometry, sq: &SquareWorkspace) {
    svg.comment("layer: u-workspace square");
    let corners = sq.corners(geom);
    svg.polygon(
        &corners,
        "fill=\"none\" stroke=\"#000000\" stroke-width=\"1.8\"",
    );
}

/// Rails (slider travel) and the struts at the square's center pose.
pub fn mechanism_layer(
    svg: &mut Svg,
    geom: &MechanismGeometry,
    intervals: &[Interval; 2],
    pose: Vec2,
) {
    svg.comment("layer: rails and struts");
    let rail_style = "stroke=\"#555555\" stroke-width=\"2.5\"";
    match geom.kind() {
        MechanismKind::Biglide => {
            let e = geom.rail_gap();
            svg.line(
                Vec2::new(intervals[0].lo, -e),
                Vec2::new(intervals[0].hi, -e),
                rail_style,
            );
            svg.line(
                Vec2::new(intervals[1].lo, 0.0),
                Vec2::new(intervals[1].hi, 0.0),
                rail_style,
            );
        }
        MechanismKind::Orthoglide2D => {
            svg.line(
                Vec2::new(intervals[0].lo, 0.0),
                Vec2::new(intervals[0].hi, 0.0),
                rail_style,
            );
            svg.line(
                Vec2::new(0.0, intervals[1].lo),
                Vec2::new(0.0, intervals[1].hi),
                rail_style,
            );
        }
    }
    if let Ok(q) = inverse_kinematics(geom, pose) {
        let (s1, s2) = geom.slider_positions(q);
        let strut = "stroke=\"#222222\" stroke-width=\"1.4\"";
        svg.line(s1, pose, strut);
        svg.line(s2, pose, strut);
        let dot = "fill=\"#222222\"";
        let r = geom.strut_length() * 0.012;
        svg.circle(s1, r, dot);
        svg.circle(s2, r, dot);
        svg.circle(pose, r, dot);
    }
}

/// Velocity manipulability ellipses on a sparse lattice: the image of a
/// unit joint-speed circle under the forward velocity map.
pub fn ellipse_layer(svg: &mut Svg, geom: &MechanismGeometry, region: Rect, n: usize, glyph: f64) {
    svg.comment("layer: manipulability ellipses");
    for j in 0..n {
        for i in 0..n {
            let p = Vec2::new(
                region.min.x + region.width() * (i as f64 + 0.5) / n as f64,
                region.min.y + region.height() * (j as f64 + 0.5) / n as f64,
            );
            let Ok(q) = inverse_kinematics(geom, p) else {
                continue;
            };
            let Ok(j_inv) = pkm_core::mechanisms::inverse_jacobian(geom, p, q) else {
                continue;
            };
            let ((s_min, _), (s_max, v_max)) = singular_axes2(&j_inv);
            if s_min <= 0.0 {
                continue;
            }
            // J maps the right-singular frame of J^-1 to its reciprocal
            // stretches: semi-axis 1/s_min along v_min, 1/s_max along v_max.
            let angle = v_max.y.atan2(v_max.x);
            let rx = glyph / s_max; // along v_max
            let ry = glyph / s_min;
            svg.ellipse(
                p,
                rx,
                ry,
                angle,
                "fill=\"none\" stroke=\"#444488\" stroke-width=\"0.8\"",
            );
        }
    }
}

/// Sanity helper for tests: evaluate the inverse Jacobian as a matrix.
#[allow(dead_code)]
pub fn inverse_jacobian_matrix(geom: &MechanismGeometry, p: Vec2) -> Option<Mat2> {
    let q = inverse_kinematics(geom, p).ok()?;
    pkm_core::mechanisms::inverse_jacobian(geom, p, q).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolines_of_linear_field_are_straight() {
        // f(x, y) = x on a small grid: iso x = 0.5 is a vertical line
        let nx = 8;
        let ny = 8;
        let pitch = 0.25;
        let origin = Vec2::ZERO;
        let mut values = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                values[j * nx + i] = origin.x + (i as f64 + 0.5) * pitch;
            }
        }
        let segs = isoline_segments(&values, nx, ny, origin, pitch, 0.5);
        assert!(!segs.is_empty());
        for (a, b) in segs {
            assert!((a.x - 0.5).abs() < 1e-12);
            assert!((b.x - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn isolines_skip_nan_cells() {
        let values = vec![f64::NAN; 16];
        assert!(isoline_segments(&values, 4, 4, Vec2::ZERO, 1.0, 0.5).is_empty());
    }
}
