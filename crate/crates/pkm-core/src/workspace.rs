//! Square useful-workspace model: feasibility under VAF bounds, bisection
//! growth, center-locus search, and orientation comparison.
//!
//! The useful workspace (u-workspace) is a square region of the Cartesian
//! workspace inside which both velocity amplification factors stay within
//! prescribed bounds and no singularity occurs, so any machining
//! trajectory within it is feasible. Feasibility is evaluated on the
//! square's corners and sides: the VAF extrema of these mechanisms occur
//! on the boundary of a square placed in the working region (an interior
//! sweep is available behind [`FeasibilityOptions::interior_pitch`] to
//! double-check that).
//!
//! Orientation is measured relative to the mechanism's symmetry axis
//! `(Delta)`: `theta = 0` aligns the square's sides with the axis,
//! `theta = 45 deg` puts a diagonal along it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::kinetostatics::{segment_params, vaf_at, VafBounds};
use crate::mechanisms::{symmetry_axis, MechanismGeometry};
use crate::planar::Vec2;
use crate::singularity::{build_cworkspace, verify_t_connected, Interval};
use crate::sizing;

/// Square useful workspace: center, side orientation relative to the
/// symmetry axis, and side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareWorkspace {
    pub center: Vec2,
    /// Orientation of the sides w.r.t. the symmetry axis, radians.
    pub theta: f64,
    pub side: f64,
}

impl SquareWorkspace {
    pub fn new(center: Vec2, theta: f64, side: f64) -> Self {
        SquareWorkspace {
            center,
            theta,
            side,
        }
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Corner points ordered counterclockwise `P1..P4`, starting from the
    /// corner with the greatest projection on the symmetry-axis direction
    /// (ties broken by the projection on its perpendicular).
    pub fn corners(&self, geom: &MechanismGeometry) -> [Vec2; 4] {
        let axis = symmetry_axis(geom);
        let base = axis.dir.y.atan2(axis.dir.x) + self.theta;
        let r = self.side * std::f64::consts::FRAC_1_SQRT_2;
        let corner = |k: usize| {
            let ang = base + std::f64::consts::FRAC_PI_4 + k as f64 * std::f64::consts::FRAC_PI_2;
            self.center + Vec2::new(ang.cos(), ang.sin()) * r
        };
        let pts = [corner(0), corner(1), corner(2), corner(3)];
        let key = |p: &Vec2| {
            let d = *p - self.center;
            (d.dot(axis.dir), d.dot(axis.dir.perp()))
        };
        let mut start = 0;
        for k in 1..4 {
            let (a, b) = key(&pts[k]);
            let (sa, sb) = key(&pts[start]);
            if a > sa + 1e-12 * self.side || ((a - sa).abs() <= 1e-12 * self.side && b > sb) {
                start = k;
            }
        }
        [
            pts[start],
            pts[(start + 1) % 4],
            pts[(start + 2) % 4],
            pts[(start + 3) % 4],
        ]
    }

    /// Uniformly scaled copy (about the origin, like the geometry).
    pub fn scaled(&self, k: f64) -> SquareWorkspace {
        SquareWorkspace {
            center: self.center * k,
            theta: self.theta,
            side: self.side * k,
        }
    }
}

/// Which VAF bound a violation or binding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// `lambda_min` against the lower bound.
    Lo,
    /// `lambda_max` against the upper bound.
    Hi,
}

/// First failure found on a square boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Side index `0..4` (side `i` runs from corner `P_{i+1}` to the next).
    pub side: usize,
    /// Parameter along the side in `[0, 1]`.
    pub param: f64,
    pub point: Vec2,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ViolationKind {
    BelowLo { lambda_min: f64 },
    AboveHi { lambda_max: f64 },
    Evaluation(Error),
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityCheck {
    pub feasible: bool,
    pub violation: Option<Violation>,
}

/// Knobs for boundary sampling; `interior_pitch` additionally sweeps an
/// interior grid and requires the square region to be t-connected,
/// promoting any interior violation to a hard failure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityOptions {
    pub n_side: usize,
    pub interior_pitch: Option<f64>,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions {
            n_side: 257,
            interior_pitch: None,
        }
    }
}

/// Checks the VAF bounds on the four corners and `n_side` samples per
/// side. Returns the first violation in side order.
pub fn square_feasible(
    geom: &MechanismGeometry,
    sq: &SquareWorkspace,
    bounds: &VafBounds,
    n_side: usize,
) -> FeasibilityCheck {
    square_feasible_with(
        geom,
        sq,
        bounds,
        &FeasibilityOptions {
            n_side,
            interior_pitch: None,
        },
    )
}

pub fn square_feasible_with(
    geom: &MechanismGeometry,
    sq: &SquareWorkspace,
    bounds: &VafBounds,
    opts: &FeasibilityOptions,
) -> FeasibilityCheck {
    let corners = sq.corners(geom);
    let params = segment_params(opts.n_side);
    for side in 0..4 {
        let p0 = corners[side];
        let p1 = corners[(side + 1) % 4];
        for &t in &params {
            let p = p0 + (p1 - p0) * t;
            match vaf_at(geom, p) {
                Ok(v) => {
                    if v.lambda_min < bounds.lo {
                        return FeasibilityCheck {
                            feasible: false,
                            violation: Some(Violation {
                                side,
                                param: t,
                                point: p,
                                kind: ViolationKind::BelowLo {
                                    lambda_min: v.lambda_min,
                                },
                            }),
                        };
                    }
                    if v.lambda_max > bounds.hi {
                        return FeasibilityCheck {
                            feasible: false,
                            violation: Some(Violation {
                                side,
                                param: t,
                                point: p,
                                kind: ViolationKind::AboveHi {
                                    lambda_max: v.lambda_max,
                                },
                            }),
                        };
                    }
                }
                Err(e) => {
                    return FeasibilityCheck {
                        feasible: false,
                        violation: Some(Violation {
                            side,
                            param: t,
                            point: p,
                            kind: ViolationKind::Evaluation(e),
                        }),
                    }
                }
            }
        }
    }
    if let Some(pitch) = opts.interior_pitch {
        if let Some(violation) = interior_check(geom, sq, bounds, pitch) {
            return FeasibilityCheck {
                feasible: false,
                violation: Some(violation),
            };
        }
    }
    FeasibilityCheck {
        feasible: true,
        violation: None,
    }
}

/// Interior sweep: VAF bounds on a grid over the square plus a
/// t-connectedness check of the square region.
fn interior_check(
    geom: &MechanismGeometry,
    sq: &SquareWorkspace,
    bounds: &VafBounds,
    pitch: f64,
) -> Option<Violation> {
    let corners = sq.corners(geom);
    let n = (sq.side / pitch).ceil().max(1.0) as usize;
    for j in 0..=n {
        for i in 0..=n {
            let u = i as f64 / n as f64;
            let v = j as f64 / n as f64;
            let p = corners[0]
                + (corners[1] - corners[0]) * u
                + (corners[3] - corners[0]) * v;
            match vaf_at(geom, p) {
                Ok(vaf) => {
                    if vaf.lambda_min < bounds.lo {
                        return Some(Violation {
                            side: 4,
                            param: 0.0,
                            point: p,
                            kind: ViolationKind::BelowLo {
                                lambda_min: vaf.lambda_min,
                            },
                        });
                    }
                    if vaf.lambda_max > bounds.hi {
                        return Some(Violation {
                            side: 4,
                            param: 0.0,
                            point: p,
                            kind: ViolationKind::AboveHi {
                                lambda_max: vaf.lambda_max,
                            },
                        });
                    }
                }
                Err(e) => {
                    return Some(Violation {
                        side: 4,
                        param: 0.0,
                        point: p,
                        kind: ViolationKind::Evaluation(e),
                    })
                }
            }
        }
    }
    // t-connectedness of the square region at the same pitch
    let mut bbox = crate::planar::Rect::new(corners[0], corners[0]);
    for c in &corners[1..] {
        bbox = bbox.expanded_to(*c);
    }
    let pad = 2.0 * pitch;
    let bbox = crate::planar::Rect::from_bounds(
        bbox.min.x - pad,
        bbox.min.y - pad,
        bbox.max.x + pad,
        bbox.max.y + pad,
    );
    let unlimited = [
        Interval::new(f64::NEG_INFINITY, f64::INFINITY),
        Interval::new(f64::NEG_INFINITY, f64::INFINITY),
    ];
    let Ok(cw) = build_cworkspace(geom, &unlimited, bbox, pitch) else {
        return None;
    };
    let res = verify_t_connected(&cw, &corners);
    if !res.ok {
        let point = res
            .offending
            .map(|(i, j)| cw.cell_center(i, j))
            .unwrap_or(sq.center);
        return Some(Violation {
            side: 4,
            param: 0.0,
            point,
            kind: ViolationKind::Evaluation(Error::InvalidParameter {
                what: "interior",
                detail: "square region is not t-connected".into(),
            }),
        });
    }
    None
}

/// A bound reached (within tolerance) on the grown square's boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub bound: BoundKind,
    /// The measured factor at the binding location.
    pub lambda: f64,
    pub point: Vec2,
    pub side: usize,
    pub param: f64,
}

/// Result of growing a square at a fixed center and orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub square: SquareWorkspace,
    /// Bound contacts on the final boundary; empty when growth stopped at
    /// reachability or singularity limits instead of a VAF bound.
    pub bindings: Vec<Binding>,
    pub iterations: usize,
}

/// Growth options; lengths are relative to the strut length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthOptions {
    pub tol_side_rel: f64,
    pub n_side: usize,
    /// Cap on the doubling phase.
    pub max_side_rel: f64,
    /// Re-verify feasibility monotonicity below the result and fall back
    /// to a linear scan when it fails.
    pub monotone_check: bool,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions {
            tol_side_rel: 1e-4,
            n_side: 257,
            max_side_rel: 8.0,
            monotone_check: false,
        }
    }
}

/// Absolute tolerance on lambda for reporting a bound as binding.
const BIND_TOL: f64 = 2e-2;
/// Tolerance on lambda for collecting all locations tied at an extremum.
const BIND_LOC_TOL: f64 = 1e-6;

/// Grows a square at `center`/`theta` by bisection between a feasible and
/// an infeasible side until the bracket is narrower than the tolerance.
/// The result `a*` is feasible while `a* + tol` is not.
pub fn grow_square(
    geom: &MechanismGeometry,
    center: Vec2,
    theta: f64,
    bounds: &VafBounds,
    opts: &GrowthOptions,
) -> Result<GrowthReport> {
    let l = geom.strut_length();
    let tol = opts.tol_side_rel * l;
    let feasible = |side: f64| {
        square_feasible(
            geom,
            &SquareWorkspace::new(center, theta, side),
            bounds,
            opts.n_side,
        )
    };
    let seed = feasible(tol);
    if !seed.feasible {
        let reason = seed
            .violation
            .map(|v| format!("{:?}", v.kind))
            .unwrap_or_else(|| "unknown".into());
        return Err(Error::InfeasibleAtSeed {
            x: center.x,
            y: center.y,
            reason,
        });
    }
    let mut iterations = 0usize;
    let mut lo = tol;
    let mut hi = tol * 2.0;
    loop {
        if hi > opts.max_side_rel * l {
            return Err(Error::InvalidParameter {
                what: "max_side",
                detail: format!(
                    "square still feasible at {hi:.3}; raise max_side_rel if intended"
                ),
            });
        }
        iterations += 1;
        if feasible(hi).feasible {
            lo = hi;
            hi *= 2.0;
        } else {
            break;
        }
    }
    while hi - lo > tol {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if feasible(mid).feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut side = lo;
    if opts.monotone_check && !monotone_below(geom, center, theta, bounds, opts, side) {
        side = linear_scan(geom, center, theta, bounds, opts);
        iterations += (side / tol) as usize;
    }
    let square = SquareWorkspace::new(center, theta, side);
    let bindings = survey_bindings(geom, &square, bounds, opts.n_side);
    Ok(GrowthReport {
        square,
        bindings,
        iterations,
    })
}

fn monotone_below(
    geom: &MechanismGeometry,
    center: Vec2,
    theta: f64,
    bounds: &VafBounds,
    opts: &GrowthOptions,
    side: f64,
) -> bool {
    let probes = 16;
    (1..=probes).all(|k| {
        let a = side * k as f64 / (probes + 1) as f64;
        square_feasible(
            geom,
            &SquareWorkspace::new(center, theta, a),
            bounds,
            opts.n_side,
        )
        .feasible
    })
}

fn linear_scan(
    geom: &MechanismGeometry,
    center: Vec2,
    theta: f64,
    bounds: &VafBounds,
    opts: &GrowthOptions,
) -> f64 {
    let tol = opts.tol_side_rel * geom.strut_length();
    let mut side = tol;
    loop {
        let next = side + tol;
        let check = square_feasible(
            geom,
            &SquareWorkspace::new(center, theta, next),
            bounds,
            opts.n_side,
        );
        if !check.feasible {
            return side;
        }
        side = next;
    }
}

/// Surveys the boundary of the final square and records every location
/// where a factor sits within [`BIND_TOL`] of its bound.
fn survey_bindings(
    geom: &MechanismGeometry,
    sq: &SquareWorkspace,
    bounds: &VafBounds,
    n_side: usize,
) -> Vec<Binding> {
    let corners = sq.corners(geom);
    let params = segment_params(n_side);
    let mut samples = Vec::with_capacity(4 * params.len());
    for side in 0..4 {
        let p0 = corners[side];
        let p1 = corners[(side + 1) % 4];
        for &t in &params {
            let p = p0 + (p1 - p0) * t;
            if let Ok(v) = vaf_at(geom, p) {
                samples.push((side, t, p, v));
            }
        }
    }
    if samples.is_empty() {
        return Vec::new();
    }
    let min_lambda = samples
        .iter()
        .map(|s| s.3.lambda_min)
        .fold(f64::INFINITY, f64::min);
    let max_lambda = samples
        .iter()
        .map(|s| s.3.lambda_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut bindings = Vec::new();
    let mut push_locations = |bound: BoundKind, target: f64| {
        let mut points: Vec<Vec2> = Vec::new();
        for (side, t, p, v) in &samples {
            let lambda = match bound {
                BoundKind::Lo => v.lambda_min,
                BoundKind::Hi => v.lambda_max,
            };
            if (lambda - target).abs() <= BIND_LOC_TOL {
                // corners are shared by two sides: keep one copy
                if points
                    .iter()
                    .all(|q| q.distance(*p) > 1e-9 * geom.strut_length())
                {
                    points.push(*p);
                    bindings.push(Binding {
                        bound,
                        lambda,
                        point: *p,
                        side: *side,
                        param: *t,
                    });
                }
            }
        }
    };
    if bounds.lo > 0.0 && (min_lambda - bounds.lo).abs() <= BIND_TOL {
        push_locations(BoundKind::Lo, min_lambda);
    }
    if bounds.hi.is_finite() && (max_lambda - bounds.hi).abs() <= BIND_TOL {
        push_locations(BoundKind::Hi, max_lambda);
    }
    bindings
}

/// Scan extents for the center-locus search, absolute lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterScan {
    /// Half-range along the symmetry axis.
    pub along: f64,
    /// Half-range perpendicular to it.
    pub perp: f64,
    pub step: f64,
}

impl CenterScan {
    pub fn relative(geom: &MechanismGeometry, along: f64, perp: f64, step: f64) -> Self {
        let l = geom.strut_length();
        CenterScan {
            along: along * l,
            perp: perp * l,
            step: step * l,
        }
    }
}

/// Grown side per scanned center; `sides` is row-major over
/// `(perp index) x (along index)`. Infeasible centers hold side 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSideMap {
    pub along_offsets: Vec<f64>,
    pub perp_offsets: Vec<f64>,
    pub centers: Vec<Vec2>,
    pub sides: Vec<f64>,
}

impl CenterSideMap {
    pub fn side_at(&self, i_along: usize, j_perp: usize) -> f64 {
        self.sides[j_perp * self.along_offsets.len() + i_along]
    }
}

/// Outcome of the center search: the best center's growth report plus the
/// full map for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSearch {
    pub best: Option<(Vec2, GrowthReport)>,
    pub map: CenterSideMap,
}

/// Grows a square at every center of a grid spanned by the symmetry axis
/// and its perpendicular around the isotropic point, and returns the
/// center with the largest side (ties: closer to the isotropic point,
/// then lexicographic scan order).
pub fn center_locus_search(
    geom: &MechanismGeometry,
    theta: f64,
    bounds: &VafBounds,
    scan: &CenterScan,
    opts: &GrowthOptions,
) -> CenterSearch {
    let axis = symmetry_axis(geom);
    let origin = geom.isotropic_point();
    let offsets = |half: f64| {
        let n = (half / scan.step).floor() as i64;
        (-n..=n).map(|k| k as f64 * scan.step).collect::<Vec<f64>>()
    };
    let along = offsets(scan.along);
    let perp = offsets(scan.perp);
    let centers: Vec<Vec2> = perp
        .iter()
        .flat_map(|&v| {
            along
                .iter()
                .map(move |&u| (u, v))
                .collect::<Vec<(f64, f64)>>()
        })
        .map(|(u, v)| origin + axis.dir * u + axis.dir.perp() * v)
        .collect();
    let reports: Vec<Option<GrowthReport>> = exec::map_indexed(centers.len(), |idx| {
        grow_square(geom, centers[idx], theta, bounds, opts).ok()
    });
    let sides: Vec<f64> = reports
        .iter()
        .map(|r| r.as_ref().map(|g| g.square.side).unwrap_or(0.0))
        .collect();
    let mut best: Option<(usize, f64, f64)> = None; // (index, side, dist2)
    for (idx, side) in sides.iter().enumerate() {
        if *side <= 0.0 {
            continue;
        }
        let dist2 = (centers[idx] - origin).norm_squared();
        let better = match best {
            None => true,
            Some((_, bs, bd)) => {
                *side > bs || (*side == bs && (dist2 < bd || (dist2 == bd && false)))
            }
        };
        if better {
            best = Some((idx, *side, dist2));
        }
    }
    CenterSearch {
        best: best.map(|(idx, _, _)| {
            let report = reports[idx].clone().expect("best candidate grew");
            (centers[idx], report)
        }),
        map: CenterSideMap {
            along_offsets: along,
            perp_offsets: perp,
            centers,
            sides,
        },
    }
}

/// Options shared by the center search and the full design pipeline.
/// Relative quantities are in units of the strut length.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    pub n_side: usize,
    pub tol_side_rel: f64,
    pub scan_along_rel: f64,
    pub scan_perp_rel: f64,
    pub scan_step_rel: f64,
    /// Boundary samples per side for joint-range extraction.
    pub n_boundary: usize,
    /// Occupancy-grid pitch for the Cartesian-workspace comparison.
    pub cworkspace_pitch_rel: f64,
    /// Orientations whose u/C ratios differ by less than this relative
    /// tolerance are tied (grid-resolution noise); the tie goes to the
    /// smaller envelope.
    pub ratio_tie_rel: f64,
    /// Candidate side orientations relative to the symmetry axis.
    pub thetas: Vec<f64>,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            n_side: 257,
            tol_side_rel: 1e-4,
            scan_along_rel: 0.3,
            scan_perp_rel: 0.3,
            scan_step_rel: 0.02,
            n_boundary: 512,
            cworkspace_pitch_rel: 0.005,
            ratio_tie_rel: 0.05,
            thetas: vec![0.0, std::f64::consts::FRAC_PI_4],
        }
    }
}

impl DesignOptions {
    pub fn growth(&self) -> GrowthOptions {
        GrowthOptions {
            tol_side_rel: self.tol_side_rel,
            n_side: self.n_side,
            max_side_rel: 8.0,
            monotone_check: false,
        }
    }
}

/// Serializable per-orientation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationReport {
    /// Side orientation w.r.t. the symmetry axis, radians.
    pub theta: f64,
    pub feasible: bool,
    /// Best center at strut length 1.
    pub center_norm: Option<Vec2>,
    /// Grown side at strut length 1.
    pub side_norm: f64,
    /// u-workspace area / Cartesian-workspace area, at the target scale.
    pub ratio: f64,
    pub u_area: f64,
    pub c_area: f64,
    /// No parallel-singular cells inside the Cartesian workspace.
    pub parallel_free: bool,
    /// The whole reachable set is t-connected.
    pub t_connected: bool,
    pub envelope_area: f64,
    pub delta_rho: f64,
    /// Envelope of the normalized machine (strut length 1) carrying its
    /// grown square: the footprint cost of the orientation itself,
    /// independent of the later sizing step.
    pub envelope_area_norm: f64,
    /// Joint travel of the normalized machine over its grown square.
    pub delta_rho_norm: f64,
    pub selected: bool,
}

/// Scaled design pieces for the winning orientation (and any feasible
/// loser, for plotting).
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationArtifacts {
    pub growth_norm: GrowthReport,
    pub center_map_norm: CenterSideMap,
    pub geom: MechanismGeometry,
    pub square: SquareWorkspace,
    pub joint_ranges: sizing::JointRanges,
    pub envelope: sizing::Envelope,
    pub cworkspace: crate::singularity::CWorkspace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationOutcome {
    pub report: OrientationReport,
    pub artifacts: Option<OrientationArtifacts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationComparison {
    pub outcomes: Vec<OrientationOutcome>,
    pub selected: usize,
}

impl OrientationComparison {
    pub fn selected_outcome(&self) -> &OrientationOutcome {
        &self.outcomes[self.selected]
    }

    pub fn reports(&self) -> Vec<OrientationReport> {
        self.outcomes.iter().map(|o| o.report.clone()).collect()
    }
}

/// Runs the center search and growth for every orientation, scales each
/// winner to the target side, sizes joints and envelope, grids the
/// Cartesian workspace, and selects the orientation.
///
/// Selection: orientations whose Cartesian workspace contains
/// parallel-singular cells are discarded; among the rest the largest
/// u/C area ratio wins, with ties (see [`DesignOptions::ratio_tie_rel`])
/// going to the smaller normalized envelope. Both criteria are
/// dimensionless: orientation quality is a property of the mechanism
/// shape, decided before the design is sized.
pub fn compare_orientations(
    geom_norm: &MechanismGeometry,
    bounds: &VafBounds,
    target_side: f64,
    opts: &DesignOptions,
) -> Result<OrientationComparison> {
    if opts.thetas.is_empty() {
        return Err(Error::InvalidParameter {
            what: "thetas",
            detail: "need at least one orientation".into(),
        });
    }
    if !(target_side > 0.0) {
        return Err(Error::InvalidParameter {
            what: "target_side",
            detail: format!("must be positive, got {target_side}"),
        });
    }
    let scan = CenterScan::relative(
        geom_norm,
        opts.scan_along_rel,
        opts.scan_perp_rel,
        opts.scan_step_rel,
    );
    let growth_opts = opts.growth();
    let mut outcomes = Vec::with_capacity(opts.thetas.len());
    for &theta in &opts.thetas {
        let search = center_locus_search(geom_norm, theta, bounds, &scan, &growth_opts);
        let Some((center, growth)) = search.best.clone() else {
            outcomes.push(OrientationOutcome {
                report: OrientationReport {
                    theta,
                    feasible: false,
                    center_norm: None,
                    side_norm: 0.0,
                    ratio: 0.0,
                    u_area: 0.0,
                    c_area: 0.0,
                    parallel_free: false,
                    t_connected: false,
                    envelope_area: f64::INFINITY,
                    delta_rho: f64::INFINITY,
                    envelope_area_norm: f64::INFINITY,
                    delta_rho_norm: f64::INFINITY,
                    selected: false,
                },
                artifacts: None,
            });
            continue;
        };
        let ranges_norm = sizing::joint_ranges(geom_norm, &growth.square, opts.n_boundary)?;
        let envelope_norm = sizing::envelope(geom_norm, &growth.square, &ranges_norm.intervals);
        let (geom_s, square_s) = sizing::scale_to_target(geom_norm, &growth.square, target_side)?;
        let ranges = sizing::joint_ranges(&geom_s, &square_s, opts.n_boundary)?;
        let envelope = sizing::envelope(&geom_s, &square_s, &ranges.intervals);
        let pitch = opts.cworkspace_pitch_rel * geom_s.strut_length();
        let cw_bounds = sizing::cworkspace_box(&geom_s, &ranges.intervals);
        let cw = build_cworkspace(&geom_s, &ranges.intervals, cw_bounds, pitch)?;
        let counts = cw.counts();
        let u_area = square_s.area();
        let c_area = cw.reachable_area();
        let tcon = cw.reachable_t_connected();
        outcomes.push(OrientationOutcome {
            report: OrientationReport {
                theta,
                feasible: true,
                center_norm: Some(center),
                side_norm: growth.square.side,
                ratio: if c_area > 0.0 { u_area / c_area } else { 0.0 },
                u_area,
                c_area,
                parallel_free: counts.parallel_singular == 0,
                t_connected: tcon.ok,
                envelope_area: envelope.area,
                delta_rho: ranges.delta_rho,
                envelope_area_norm: envelope_norm.area,
                delta_rho_norm: ranges_norm.delta_rho,
                selected: false,
            },
            artifacts: Some(OrientationArtifacts {
                growth_norm: growth,
                center_map_norm: search.map,
                geom: geom_s,
                square: square_s,
                joint_ranges: ranges,
                envelope,
                cworkspace: cw,
            }),
        });
    }

    // Discard orientations with parallel singularities inside the
    // Cartesian workspace, then maximize the u/C ratio.
    let admissible: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.report.feasible && o.report.parallel_free)
        .map(|(i, _)| i)
        .collect();
    if admissible.is_empty() {
        return Err(Error::AllOrientationsRejected {
            detail: outcomes
                .iter()
                .map(|o| {
                    format!(
                        "theta {:.1} deg: {}",
                        o.report.theta.to_degrees(),
                        if !o.report.feasible {
                            "infeasible"
                        } else {
                            "parallel singularities in C-workspace"
                        }
                    )
                })
                .collect::<Vec<_>>()
                .join("; "),
        });
    }
    let best_ratio = admissible
        .iter()
        .map(|&i| outcomes[i].report.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = admissible
        .iter()
        .copied()
        .filter(|&i| outcomes[i].report.ratio >= best_ratio * (1.0 - opts.ratio_tie_rel))
        .collect();
    let selected = tied
        .into_iter()
        .min_by(|&a, &b| {
            outcomes[a]
                .report
                .envelope_area_norm
                .partial_cmp(&outcomes[b].report.envelope_area_norm)
                .unwrap()
                .then(a.cmp(&b))
        })
        .expect("admissible set nonempty");
    outcomes[selected].report.selected = true;
    Ok(OrientationComparison { outcomes, selected })
}
