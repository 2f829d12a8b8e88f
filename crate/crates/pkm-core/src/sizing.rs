//! Sizing: scale a normalized design to a target workspace side, extract
//! joint ranges and the machine envelope, and compare mechanisms.
//!
//! The whole kinetostatic field is scale-invariant, so designs are grown
//! at strut length 1 and scaled afterwards. The machine envelope is the
//! rail-aligned bounding box of the sliders' travel, the struts at
//! boundary poses, and the useful workspace itself; its area is the
//! compactness metric, and `L0` is its extent along the rail
//! direction(s). That convention is stated in every report so envelope
//! figures are attributable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetostatics::{segment_params, VafBounds};
use crate::mechanisms::{inverse_kinematics, MechanismGeometry, MechanismKind};
use crate::planar::{Rect, Vec2};
use crate::singularity::{CWorkspace, Interval};
use crate::workspace::{
    compare_orientations, Binding, CenterSideMap, DesignOptions, GrowthReport,
    OrientationReport, SquareWorkspace,
};

/// Scales a normalized design (grown at strut length 1) so its square
/// reaches `target_side`. Everything scales about the origin; the
/// amplification field is unchanged.
pub fn scale_to_target(
    geom_norm: &MechanismGeometry,
    sq_norm: &SquareWorkspace,
    target_side: f64,
) -> Result<(MechanismGeometry, SquareWorkspace)> {
    if !(sq_norm.side > 0.0) {
        return Err(Error::InvalidParameter {
            what: "square.side",
            detail: format!("must be positive, got {}", sq_norm.side),
        });
    }
    let k = target_side / sq_norm.side;
    let geom = geom_norm.scaled(k)?;
    let mut sq = sq_norm.scaled(k);
    // pin the side exactly to the target
    sq.side = target_side;
    Ok((geom, sq))
}

/// Per-joint travel intervals spanned while the tool covers the square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRanges {
    pub intervals: [Interval; 2],
    /// The larger of the two interval widths.
    pub delta_rho: f64,
}

/// Joint travel over the square's boundary, sampled with `n_boundary`
/// Chebyshev nodes per side plus corners and sharpened by golden-section
/// refinement. The joint coordinates are monotone in the slider-parallel
/// pose coordinate, so their extrema over the square lie on its boundary.
pub fn joint_ranges(
    geom: &MechanismGeometry,
    sq: &SquareWorkspace,
    n_boundary: usize,
) -> Result<JointRanges> {
    let corners = sq.corners(geom);
    let params = segment_params(n_boundary.max(33));
    let rho = |side: usize, t: f64| -> Result<(f64, f64)> {
        let p0 = corners[side];
        let p1 = corners[(side + 1) % 4];
        let q = inverse_kinematics(geom, p0 + (p1 - p0) * t)?;
        Ok((q.rho1, q.rho2))
    };

    #[derive(Clone, Copy)]
    struct Extreme {
        value: f64,
        side: usize,
        t: f64,
    }
    let mut lo = [Extreme {
        value: f64::INFINITY,
        side: 0,
        t: 0.0,
    }; 2];
    let mut hi = [Extreme {
        value: f64::NEG_INFINITY,
        side: 0,
        t: 0.0,
    }; 2];
    for side in 0..4 {
        for &t in &params {
            let (r1, r2) = rho(side, t)?;
            for (j, r) in [r1, r2].into_iter().enumerate() {
                if r < lo[j].value {
                    lo[j] = Extreme { value: r, side, t };
                }
                if r > hi[j].value {
                    hi[j] = Extreme { value: r, side, t };
                }
            }
        }
    }

    // Sharpen each extremum with a golden search in a local window.
    let window = 2.0 / (params.len() as f64);
    let refine = |e: Extreme, j: usize, maximize: bool| -> Result<f64> {
        let a = (e.t - window).max(0.0);
        let b = (e.t + window).min(1.0);
        let f = |t: f64| -> f64 {
            match rho(e.side, t) {
                Ok((r1, r2)) => {
                    let v = if j == 0 { r1 } else { r2 };
                    if maximize {
                        -v
                    } else {
                        v
                    }
                }
                Err(_) => f64::INFINITY,
            }
        };
        let t = golden(a, b, 1e-12, f);
        let (r1, r2) = rho(e.side, t)?;
        let v = if j == 0 { r1 } else { r2 };
        Ok(if maximize {
            v.max(e.value)
        } else {
            v.min(e.value)
        })
    };
    let i1 = Interval::new(refine(lo[0], 0, false)?, refine(hi[0], 0, true)?);
    let i2 = Interval::new(refine(lo[1], 1, false)?, refine(hi[1], 1, true)?);
    Ok(JointRanges {
        intervals: [i1, i2],
        delta_rho: i1.width().max(i2.width()),
    })
}

fn golden(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Machine envelope: rail-aligned bounding box and its area, plus the
/// base dimension `L0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub l0: f64,
    pub area: f64,
    pub bbox: Rect,
}

/// Bounding box of slider travel, struts at boundary poses, and the
/// square itself. Strut segments connect sliders (inside the rail spans)
/// to boundary poses (inside the square), so the hull of rail-segment
/// endpoints and square corners covers everything.
pub fn envelope(
    geom: &MechanismGeometry,
    sq: &SquareWorkspace,
    intervals: &[Interval; 2],
) -> Envelope {
    let corners = sq.corners(geom);
    let mut bbox = Rect::new(corners[0], corners[0]);
    for c in &corners[1..] {
        bbox = bbox.expanded_to(*c);
    }
    match geom.kind() {
        MechanismKind::Biglide => {
            let e = geom.rail_gap();
            bbox = bbox.expanded_to(Vec2::new(intervals[0].lo, -e));
            bbox = bbox.expanded_to(Vec2::new(intervals[0].hi, -e));
            bbox = bbox.expanded_to(Vec2::new(intervals[1].lo, 0.0));
            bbox = bbox.expanded_to(Vec2::new(intervals[1].hi, 0.0));
        }
        MechanismKind::Orthoglide2D => {
            bbox = bbox.expanded_to(Vec2::new(intervals[0].lo, 0.0));
            bbox = bbox.expanded_to(Vec2::new(intervals[0].hi, 0.0));
            bbox = bbox.expanded_to(Vec2::new(0.0, intervals[1].lo));
            bbox = bbox.expanded_to(Vec2::new(0.0, intervals[1].hi));
        }
    }
    let l0 = match geom.kind() {
        MechanismKind::Biglide => bbox.width(),
        MechanismKind::Orthoglide2D => bbox.width().max(bbox.height()),
    };
    Envelope {
        l0,
        area: bbox.area(),
        bbox,
    }
}

/// Pose box for the Cartesian-workspace grid of a design.
pub fn cworkspace_box(geom: &MechanismGeometry, intervals: &[Interval; 2]) -> Rect {
    let l = geom.strut_length();
    match geom.kind() {
        MechanismKind::Orthoglide2D => {
            Rect::from_bounds(-1.05 * l, -1.05 * l, 1.05 * l, 1.05 * l)
        }
        MechanismKind::Biglide => {
            let x_lo = intervals[0].lo.min(intervals[1].lo) - 0.05 * l;
            let x_hi = intervals[0].hi.max(intervals[1].hi) + 0.05 * l;
            Rect::from_bounds(x_lo, 0.0, x_hi, 1.02 * l)
        }
    }
}

/// One sized machine: everything a Table-style comparison row needs plus
/// the selection provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub kind: MechanismKind,
    pub target_side: f64,
    pub bounds: VafBounds,
    /// Envelope extent along the rail direction(s).
    pub l0: f64,
    pub strut_length: f64,
    /// Larger of the two joint travel widths.
    pub delta_rho: f64,
    pub envelope_area: f64,
    pub envelope_bbox: Rect,
    pub workspace: SquareWorkspace,
    /// Selected side orientation w.r.t. the symmetry axis, radians.
    pub theta_selected: f64,
    pub joint_ranges: [Interval; 2],
    /// Bound contacts on the grown boundary, at the target scale.
    pub bindings: Vec<Binding>,
    pub u_area: f64,
    pub c_area: f64,
    pub ratio: f64,
    pub t_connected: bool,
    pub parallel_free: bool,
    /// Per-orientation summaries from the selection step.
    pub orientations: Vec<OrientationReport>,
}

/// Design result plus the bulky artifacts (occupancy grid, center map)
/// used for plotting and verification.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    pub result: DesignResult,
    pub cworkspace: CWorkspace,
    /// Center-side map of the selected orientation, at strut length 1.
    pub center_map_norm: CenterSideMap,
    /// Growth report of the selected orientation, at strut length 1.
    pub growth_norm: GrowthReport,
}

/// Full design pipeline: normalize to strut length 1, compare
/// orientations (center search and growth inside), scale to the target,
/// size joints and envelope, and grid the Cartesian workspace.
pub fn design_mechanism(
    kind: MechanismKind,
    bounds: &VafBounds,
    target_side: f64,
    opts: &DesignOptions,
) -> Result<DesignOutcome> {
    let geom_norm = MechanismGeometry::new(kind, 1.0)?;
    let comparison = compare_orientations(&geom_norm, bounds, target_side, opts)?;
    let selected = comparison.selected;
    let reports = comparison.reports();
    let outcome = comparison.outcomes.into_iter().nth(selected).unwrap();
    let report = outcome.report;
    let art = outcome.artifacts.expect("selected orientation is feasible");
    let k = art.geom.strut_length();
    let bindings = art
        .growth_norm
        .bindings
        .iter()
        .map(|b| Binding {
            bound: b.bound,
            lambda: b.lambda,
            point: b.point * k,
            side: b.side,
            param: b.param,
        })
        .collect();
    let result = DesignResult {
        kind,
        target_side,
        bounds: *bounds,
        l0: art.envelope.l0,
        strut_length: k,
        delta_rho: art.joint_ranges.delta_rho,
        envelope_area: art.envelope.area,
        envelope_bbox: art.envelope.bbox,
        workspace: art.square,
        theta_selected: report.theta,
        joint_ranges: art.joint_ranges.intervals,
        bindings,
        u_area: report.u_area,
        c_area: report.c_area,
        ratio: report.ratio,
        t_connected: report.t_connected,
        parallel_free: report.parallel_free,
        orientations: reports,
    };
    Ok(DesignOutcome {
        result,
        cworkspace: art.cworkspace,
        center_map_norm: art.center_map_norm,
        growth_norm: art.growth_norm,
    })
}

/// Published reference values for the canonical task (square side 1 m,
/// amplification bounds [1/3, 3]): `(L0, L, delta_rho, envelope)`.
pub const REFERENCE_BIGLIDE: [f64; 4] = [5.95, 3.05, 1.67, 16.45];
/// See [`REFERENCE_BIGLIDE`].
pub const REFERENCE_ORTHOGLIDE: [f64; 4] = [2.08, 1.06, 1.18, 3.91];

fn reference_row(kind: MechanismKind) -> [f64; 4] {
    match kind {
        MechanismKind::Biglide => REFERENCE_BIGLIDE,
        MechanismKind::Orthoglide2D => REFERENCE_ORTHOGLIDE,
    }
}

/// Whether the scenario matches the one the reference values were
/// published for.
fn reference_applicable(target_side: f64, bounds: &VafBounds) -> bool {
    (target_side - 1.0).abs() <= 1e-9
        && (bounds.lo - 1.0 / 3.0).abs() <= 1e-4
        && (bounds.hi - 3.0).abs() <= 1e-9
}

pub const COMPARE_FIELDS: [&str; 4] = ["L0 (m)", "L (m)", "delta_rho (m)", "envelope (m^2)"];

/// One mechanism's comparison entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: MechanismKind,
    /// `[L0, L, delta_rho, envelope_area]`.
    pub values: [f64; 4],
    pub reference: Option<[f64; 4]>,
    /// Percent deviation of computed values from the reference.
    pub deviation_pct: Option<[f64; 4]>,
    /// Field-wise ratio to the most compact design in the set.
    pub ratio_to_baseline: [f64; 4],
}

/// Side-by-side comparison of designs sized for the same scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub target_side: f64,
    pub bounds: VafBounds,
    pub rows: Vec<ComparisonRow>,
    /// Index of the baseline (smallest envelope) row.
    pub baseline: usize,
}

/// Builds the comparison table. All designs must share the target side
/// and bounds.
pub fn compare_designs(results: &[DesignResult]) -> Result<ComparisonTable> {
    if results.len() < 2 {
        return Err(Error::MismatchedScenario {
            detail: format!("need at least two designs, got {}", results.len()),
        });
    }
    let first = &results[0];
    for r in &results[1..] {
        if (r.target_side - first.target_side).abs() > 1e-12 * first.target_side
            || (r.bounds.lo - first.bounds.lo).abs() > 1e-12
            || (r.bounds.hi - first.bounds.hi).abs() > 1e-12 && first.bounds.hi.is_finite()
        {
            return Err(Error::MismatchedScenario {
                detail: format!(
                    "design for {} was sized at target {} with bounds [{}, {}], expected target {} with bounds [{}, {}]",
                    r.kind, r.target_side, r.bounds.lo, r.bounds.hi,
                    first.target_side, first.bounds.lo, first.bounds.hi
                ),
            });
        }
    }
    let baseline = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.envelope_area.partial_cmp(&b.1.envelope_area).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let base_values = [
        results[baseline].l0,
        results[baseline].strut_length,
        results[baseline].delta_rho,
        results[baseline].envelope_area,
    ];
    let with_reference = reference_applicable(first.target_side, &first.bounds);
    let rows = results
        .iter()
        .map(|r| {
            let values = [r.l0, r.strut_length, r.delta_rho, r.envelope_area];
            let reference = with_reference.then(|| reference_row(r.kind));
            let deviation_pct = reference.map(|reference| {
                let mut dev = [0.0; 4];
                for i in 0..4 {
                    dev[i] = 100.0 * (values[i] - reference[i]) / reference[i];
                }
                dev
            });
            let mut ratio = [0.0; 4];
            for i in 0..4 {
                ratio[i] = values[i] / base_values[i];
            }
            ComparisonRow {
                kind: r.kind,
                values,
                reference,
                deviation_pct,
                ratio_to_baseline: ratio,
            }
        })
        .collect();
    Ok(ComparisonTable {
        target_side: first.target_side,
        bounds: first.bounds,
        rows,
        baseline,
    })
}

impl ComparisonTable {
    pub fn row(&self, kind: MechanismKind) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    /// CSV rendering with units in the header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("mechanism,L0 (m),L (m),delta_rho (m),envelope (m^2)");
        out.push_str(",ref L0 (m),ref L (m),ref delta_rho (m),ref envelope (m^2)");
        out.push_str(",dev L0 (%),dev L (%),dev delta_rho (%),dev envelope (%)");
        out.push_str(
            ",ratio L0 (dimensionless),ratio L (dimensionless),ratio delta_rho (dimensionless),ratio envelope (dimensionless)\n",
        );
        for row in &self.rows {
            out.push_str(row.kind.label());
            for v in row.values {
                out.push_str(&format!(",{v:.6}"));
            }
            match row.reference {
                Some(reference) => {
                    for v in reference {
                        out.push_str(&format!(",{v:.6}"));
                    }
                    for v in row.deviation_pct.unwrap() {
                        out.push_str(&format!(",{v:.2}"));
                    }
                }
                None => out.push_str(",,,,,,,,"),
            }
            for v in row.ratio_to_baseline {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Design comparison -- square useful workspace, side {:.6} m, amplification bounds [{:.6}, {:.6}]\n",
            self.target_side, self.bounds.lo, self.bounds.hi
        ));
        out.push_str(
            "Envelope convention: rail-aligned bounding box of slider travel, struts at boundary poses, and the workspace square.\n\n",
        );
        out.push_str(&format!(
            "{:<14}{:<12}{:>12}{:>12}{:>16}{:>18}\n",
            "mechanism", "row", "L0 (m)", "L (m)", "delta_rho (m)", "envelope (m^2)"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<14}{:<12}{:>12.4}{:>12.4}{:>16.4}{:>18.4}\n",
                row.kind.label(),
                "computed",
                row.values[0],
                row.values[1],
                row.values[2],
                row.values[3]
            ));
            if let (Some(reference), Some(dev)) = (row.reference, row.deviation_pct) {
                out.push_str(&format!(
                    "{:<14}{:<12}{:>12.4}{:>12.4}{:>16.4}{:>18.4}\n",
                    "", "reference", reference[0], reference[1], reference[2], reference[3]
                ));
                out.push_str(&format!(
                    "{:<14}{:<12}{:>11.1}%{:>11.1}%{:>15.1}%{:>17.1}%\n",
                    "", "deviation", dev[0], dev[1], dev[2], dev[3]
                ));
            }
        }
        let base = &self.rows[self.baseline];
        out.push('\n');
        for row in &self.rows {
            if row.kind == base.kind {
                continue;
            }
            out.push_str(&format!(
                "{}/{} ratios (dimensionless): L0 {:.3}, L {:.3}, delta_rho {:.3}, envelope {:.3}\n",
                row.kind.label(),
                base.kind.label(),
                row.ratio_to_baseline[0],
                row.ratio_to_baseline[1],
                row.ratio_to_baseline[2],
                row.ratio_to_baseline[3]
            ));
        }
        out
    }
}
