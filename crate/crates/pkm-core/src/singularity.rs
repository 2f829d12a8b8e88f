//! Singularity classification and Cartesian-workspace occupancy grids.
//!
//! Three configuration types matter here. A *parallel* singularity
//! (`det A = 0`) lets the tool move with locked actuators — control is
//! lost, so these must stay out of any usable region. A *serial*
//! singularity (`det B = 0`) blocks motion along some direction and bounds
//! the Cartesian workspace. When a serial singularity coincides with both
//! sliders meeting at one point the struts overlap and the tool can rotate
//! freely about them: a *structural* singularity.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec;
use crate::mechanisms::{inverse_kinematics, jacobians, MechanismGeometry};
use crate::planar::{Rect, Vec2};

/// Default relative tolerance on `|det A|` for classification.
pub const TOL_A: f64 = 1e-6;
/// Default relative tolerance on `|det B|` for classification.
pub const TOL_B: f64 = 1e-6;

/// Configuration class with the measured determinants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityClass {
    pub kind: SingularityKind,
    pub det_a: f64,
    pub det_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityKind {
    Regular,
    Serial,
    Parallel,
    Structural,
}

/// Classifies a consistent configuration `(p, q)`.
///
/// Parallel when `|det A| < tol_a L^2`; serial when `|det B| < tol_b L^2`;
/// structural when the serial criterion holds and the sliders coincide
/// within `tol_b L` (overlapping struts). When parallel and serial both
/// fire without slider coincidence, parallel wins: loss of control
/// dominates.
pub fn classify(
    geom: &MechanismGeometry,
    p: Vec2,
    q: crate::mechanisms::JointPos,
    tol_a: f64,
    tol_b: f64,
) -> Result<SingularityClass> {
    let pair = jacobians(geom, p, q)?;
    let l = geom.strut_length();
    let l2 = l * l;
    let det_a = pair.a.det();
    let det_b = pair.b.det();
    let parallel = det_a.abs() < tol_a * l2;
    let serial = det_b.abs() < tol_b * l2;
    let kind = if serial {
        let (s1, s2) = geom.slider_positions(q);
        if s1.distance(s2) <= tol_b * l {
            SingularityKind::Structural
        } else if parallel {
            SingularityKind::Parallel
        } else {
            SingularityKind::Serial
        }
    } else if parallel {
        SingularityKind::Parallel
    } else {
        SingularityKind::Regular
    };
    Ok(SingularityClass { kind, det_a, det_b })
}

/// Classification of one occupancy cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClass {
    Unreachable,
    Regular,
    SerialBoundary,
    ParallelSingular,
}

impl CellClass {
    pub fn label(&self) -> &'static str {
        match self {
            CellClass::Unreachable => "unreachable",
            CellClass::Regular => "regular",
            CellClass::SerialBoundary => "serial-boundary",
            CellClass::ParallelSingular => "parallel-singular",
        }
    }
}

/// Occupancy grid over a pose box: each cell center is classified under
/// the joint limits. Reachable-regular cells always have a well-defined
/// VAF (the classification tolerances are far looser than the evaluation
/// guards).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CWorkspace {
    pub bounds: Rect,
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<CellClass>,
}

/// Cell census of a [`CWorkspace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CellCounts {
    pub unreachable: usize,
    pub regular: usize,
    pub serial_boundary: usize,
    pub parallel_singular: usize,
}

impl CWorkspace {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn class_at(&self, i: usize, j: usize) -> CellClass {
        self.cells[self.index(i, j)]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.bounds.min.x + (i as f64 + 0.5) * self.pitch,
            self.bounds.min.y + (j as f64 + 0.5) * self.pitch,
        )
    }

    pub fn counts(&self) -> CellCounts {
        let mut c = CellCounts::default();
        for cell in &self.cells {
            match cell {
                CellClass::Unreachable => c.unreachable += 1,
                CellClass::Regular => c.regular += 1,
                CellClass::SerialBoundary => c.serial_boundary += 1,
                CellClass::ParallelSingular => c.parallel_singular += 1,
            }
        }
        c
    }

    /// Area covered by reachable cells (any non-unreachable class).
    pub fn reachable_area(&self) -> f64 {
        let c = self.counts();
        (c.regular + c.serial_boundary + c.parallel_singular) as f64 * self.pitch * self.pitch
    }

    pub fn regular_area(&self) -> f64 {
        self.counts().regular as f64 * self.pitch * self.pitch
    }

    /// Checks that the whole reachable set is t-connected: every
    /// reachable cell is regular and the regular cells form one
    /// 4-connected component.
    pub fn reachable_t_connected(&self) -> TConnectivity {
        let mut singular = None;
        for j in 0..self.ny {
            for i in 0..self.nx {
                match self.class_at(i, j) {
                    CellClass::SerialBoundary | CellClass::ParallelSingular => {
                        singular = Some((i, j));
                        break;
                    }
                    _ => {}
                }
            }
            if singular.is_some() {
                break;
            }
        }
        if let Some(cell) = singular {
            return TConnectivity {
                ok: false,
                components: 0,
                offending: Some(cell),
            };
        }
        let components = self.count_components(|class| class == CellClass::Regular);
        TConnectivity {
            ok: components == 1,
            components,
            offending: None,
        }
    }

    /// Number of 4-connected components among cells selected by `pred`.
    fn count_components(&self, pred: impl Fn(CellClass) -> bool) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.cells.len() {
            if seen[start] || !pred(self.cells[start]) {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (i, j) = (idx % self.nx, idx / self.nx);
                let mut push = |ii: usize, jj: usize| {
                    let n = jj * self.nx + ii;
                    if !seen[n] && pred(self.cells[n]) {
                        seen[n] = true;
                        stack.push(n);
                    }
                };
                if i > 0 {
                    push(i - 1, j);
                }
                if i + 1 < self.nx {
                    push(i + 1, j);
                }
                if j > 0 {
                    push(i, j - 1);
                }
                if j + 1 < self.ny {
                    push(i, j + 1);
                }
            }
        }
        components
    }

    /// CSV export: one `x,y,class` row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 32);
        out.push_str("x (m),y (m),class\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let c = self.cell_center(i, j);
                out.push_str(&format!(
                    "{:.6},{:.6},{}\n",
                    c.x,
                    c.y,
                    self.class_at(i, j).label()
                ));
            }
        }
        out
    }
}

/// Result of a t-connectedness check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TConnectivity {
    pub ok: bool,
    /// Number of 4-connected components among the checked cells.
    pub components: usize,
    /// First offending cell `(i, j)` when not t-connected.
    pub offending: Option<(usize, usize)>,
}

/// Per-joint travel interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Builds the occupancy grid for `geom` under per-joint travel limits.
///
/// Each cell center is classified through the working-mode inverse
/// kinematics: unreachable when IK fails or a joint leaves its limits,
/// otherwise by [`classify`] at the default tolerances (serial and
/// structural cells both map to [`CellClass::SerialBoundary`]). The
/// output is deterministic for a fixed pitch.
pub fn build_cworkspace(
    geom: &MechanismGeometry,
    joint_limits: &[Interval; 2],
    bounds: Rect,
    pitch: f64,
) -> Result<CWorkspace> {
    if !(pitch > 0.0) || !pitch.is_finite() {
        return Err(crate::error::Error::InvalidParameter {
            what: "pitch",
            detail: format!("must be positive and finite, got {pitch}"),
        });
    }
    let nx = (bounds.width() / pitch).ceil().max(1.0) as usize;
    let ny = (bounds.height() / pitch).ceil().max(1.0) as usize;
    let limits = *joint_limits;
    let geom = *geom;
    let rows: Vec<Vec<CellClass>> = exec::map_indexed(ny, move |j| {
        (0..nx)
            .map(|i| {
                let p = Vec2::new(
                    bounds.min.x + (i as f64 + 0.5) * pitch,
                    bounds.min.y + (j as f64 + 0.5) * pitch,
                );
                classify_cell(&geom, &limits, p)
            })
            .collect()
    });
    let cells = rows.into_iter().flatten().collect();
    Ok(CWorkspace {
        bounds,
        pitch,
        nx,
        ny,
        cells,
    })
}

fn classify_cell(geom: &MechanismGeometry, limits: &[Interval; 2], p: Vec2) -> CellClass {
    let Ok(q) = inverse_kinematics(geom, p) else {
        return CellClass::Unreachable;
    };
    if !limits[0].contains(q.rho1) || !limits[1].contains(q.rho2) {
        return CellClass::Unreachable;
    }
    match classify(geom, p, q, TOL_A, TOL_B) {
        Ok(class) => match class.kind {
            SingularityKind::Regular => CellClass::Regular,
            SingularityKind::Parallel => CellClass::ParallelSingular,
            SingularityKind::Serial | SingularityKind::Structural => CellClass::SerialBoundary,
        },
        Err(_) => CellClass::Unreachable,
    }
}

/// Checks that a convex polygonal region of the grid is t-connected:
/// every cell whose rectangle intersects the polygon must be
/// reachable-regular and those cells must form one 4-connected component.
/// Returns the first offending cell in row-major order otherwise.
pub fn verify_t_connected(cw: &CWorkspace, region: &[Vec2]) -> TConnectivity {
    let mut selected = vec![false; cw.cells.len()];
    let mut any = false;
    for j in 0..cw.ny {
        for i in 0..cw.nx {
            let c = cw.cell_center(i, j);
            let half = 0.5 * cw.pitch;
            let cell_rect = Rect::from_bounds(c.x - half, c.y - half, c.x + half, c.y + half);
            if rect_intersects_convex_polygon(&cell_rect, region) {
                if cw.class_at(i, j) != CellClass::Regular {
                    return TConnectivity {
                        ok: false,
                        components: 0,
                        offending: Some((i, j)),
                    };
                }
                selected[cw.index(i, j)] = true;
                any = true;
            }
        }
    }
    if !any {
        return TConnectivity {
            ok: false,
            components: 0,
            offending: None,
        };
    }
    // Flood fill within the selected cells only.
    let mut seen = vec![false; cw.cells.len()];
    let start = selected.iter().position(|&s| s).unwrap();
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(idx) = stack.pop() {
        let (i, j) = (idx % cw.nx, idx / cw.nx);
        let mut push = |ii: usize, jj: usize| {
            let n = jj * cw.nx + ii;
            if selected[n] && !seen[n] {
                seen[n] = true;
                stack.push(n);
            }
        };
        if i > 0 {
            push(i - 1, j);
        }
        if i + 1 < cw.nx {
            push(i + 1, j);
        }
        if j > 0 {
            push(i, j - 1);
        }
        if j + 1 < cw.ny {
            push(i, j + 1);
        }
    }
    for idx in 0..cw.cells.len() {
        if selected[idx] && !seen[idx] {
            return TConnectivity {
                ok: false,
                components: 2,
                offending: Some((idx % cw.nx, idx / cw.nx)),
            };
        }
    }
    TConnectivity {
        ok: true,
        components: 1,
        offending: None,
    }
}

/// Separating-axis intersection test between an axis-aligned rectangle
/// and a convex polygon (vertices in order).
fn rect_intersects_convex_polygon(rect: &Rect, poly: &[Vec2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let rect_pts = [
        rect.min,
        Vec2::new(rect.max.x, rect.min.y),
        rect.max,
        Vec2::new(rect.min.x, rect.max.y),
    ];
    // axes: rectangle normals (x, y) + polygon edge normals
    let mut axes: Vec<Vec2> = vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    for k in 0..poly.len() {
        let edge = poly[(k + 1) % poly.len()] - poly[k];
        if edge.norm() > 0.0 {
            axes.push(edge.perp().normalized());
        }
    }
    for axis in axes {
        let project = |pts: &[Vec2]| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in pts {
                let d = p.dot(axis);
                lo = lo.min(d);
                hi = hi.max(d);
            }
            (lo, hi)
        };
        let (alo, ahi) = project(&rect_pts);
        let (blo, bhi) = project(poly);
        if ahi < blo || bhi < alo {
            return false;
        }
    }
    true
}
