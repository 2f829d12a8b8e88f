//! Kinematic models of the two mechanisms.
//!
//! Both machines move a tool point `P = (x, y)` through two equal-length
//! struts whose other ends ride on actuated prismatic rails:
//!
//! * **Biglide** — both rails along the x-axis. Slider 1 at `(rho1, -e)`,
//!   slider 2 at `(rho2, 0)`, where `e` is the perpendicular gap between
//!   the rails (0 by default, i.e. collinear rails). Canonical working
//!   mode leans strut 1 right of its slider and strut 2 left
//!   (`sign(x - rho1) = -1`, `sign(x - rho2) = +1`) with the workspace in
//!   the upper half plane `y > 0`.
//! * **2-DOF Orthoglide** — rail 1 is the x-axis (slider at `(rho1, 0)`),
//!   rail 2 the y-axis (slider at `(0, rho2)`). Canonical mode
//!   `(-1, -1)`; the isotropic point `S = (0, 0)` with joints `(L, L)`.
//!
//! Differentiating each strut-length constraint `|P - s_i(rho_i)| = L`
//! gives the velocity relation `A tdot = B rhodot`, with `A` rows equal to
//! the strut vectors `P - s_i` and `B` the diagonal of their projections
//! onto the rail directions. Both frames keep `B` diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planar::{Mat2, Vec2};

/// Relative tolerance (in units of L) for pose/joint consistency checks.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Mechanism family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MechanismKind {
    Biglide,
    Orthoglide2D,
}

impl MechanismKind {
    pub fn label(&self) -> &'static str {
        match self {
            MechanismKind::Biglide => "biglide",
            MechanismKind::Orthoglide2D => "orthoglide2",
        }
    }
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Branch sign of one strut: which side of its slider the tool leans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Neg => -1.0,
            Sign::Pos => 1.0,
        }
    }
}

/// Inverse-kinematics branch, fixed per geometry instance.
///
/// `sigma_i` is the sign of the strut-vector component along rail `i`
/// (`x - rho_i` for rails parallel to x, `y - rho_2` for the Orthoglide's
/// vertical rail). Mode switching requires constructing a new geometry;
/// nothing switches branches implicitly near singularities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingMode {
    pub sigma1: Sign,
    pub sigma2: Sign,
}

impl WorkingMode {
    pub const fn new(sigma1: Sign, sigma2: Sign) -> Self {
        WorkingMode { sigma1, sigma2 }
    }

    /// The branch used throughout the design procedure.
    ///
    /// For the Biglide with collinear rails, modes with `sigma1 == sigma2`
    /// put both sliders at the same point for every pose (a permanent
    /// structural singularity), so the canonical choice is `(-1, +1)`.
    pub const fn canonical(kind: MechanismKind) -> Self {
        match kind {
            MechanismKind::Biglide => WorkingMode::new(Sign::Neg, Sign::Pos),
            MechanismKind::Orthoglide2D => WorkingMode::new(Sign::Neg, Sign::Neg),
        }
    }
}

/// Prismatic joint coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPos {
    pub rho1: f64,
    pub rho2: f64,
}

impl JointPos {
    pub const fn new(rho1: f64, rho2: f64) -> Self {
        JointPos { rho1, rho2 }
    }
}

/// The parallel matrix `A` and serial matrix `B` of `A tdot = B rhodot`
/// at one configuration. `B` is diagonal in the canonical frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianPair {
    pub a: Mat2,
    pub b: Mat2,
}

/// A line given by a point and a unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub point: Vec2,
    pub dir: Vec2,
}

/// Immutable mechanism description: kind, strut length, rail layout, and
/// working mode. All operations on it are pure, so values can be shared
/// freely across threads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismGeometry {
    kind: MechanismKind,
    strut_length: f64,
    rail_gap: f64,
    mode: WorkingMode,
}

impl MechanismGeometry {
    /// Canonical-mode geometry with collinear Biglide rails (`e = 0`).
    pub fn new(kind: MechanismKind, strut_length: f64) -> Result<Self> {
        if !(strut_length > 0.0) || !strut_length.is_finite() {
            return Err(Error::InvalidParameter {
                what: "strut_length",
                detail: format!("must be positive and finite, got {strut_length}"),
            });
        }
        Ok(MechanismGeometry {
            kind,
            strut_length,
            rail_gap: 0.0,
            mode: WorkingMode::canonical(kind),
        })
    }

    /// Sets the perpendicular gap between the two Biglide rails.
    pub fn with_rail_gap(mut self, e: f64) -> Result<Self> {
        if self.kind != MechanismKind::Biglide {
            return Err(Error::InvalidParameter {
                what: "rail_gap",
                detail: "only the Biglide has a rail gap".into(),
            });
        }
        if !(e >= 0.0) || !e.is_finite() {
            return Err(Error::InvalidParameter {
                what: "rail_gap",
                detail: format!("must be nonnegative and finite, got {e}"),
            });
        }
        self.rail_gap = e;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: WorkingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    pub fn strut_length(&self) -> f64 {
        self.strut_length
    }

    pub fn rail_gap(&self) -> f64 {
        self.rail_gap
    }

    pub fn mode(&self) -> WorkingMode {
        self.mode
    }

    /// Similar geometry with every length multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter {
                what: "scale",
                detail: format!("must be positive and finite, got {k}"),
            });
        }
        Ok(MechanismGeometry {
            kind: self.kind,
            strut_length: self.strut_length * k,
            rail_gap: self.rail_gap * k,
            mode: self.mode,
        })
    }

    /// Slider positions for given joint coordinates.
    pub fn slider_positions(&self, q: JointPos) -> (Vec2, Vec2) {
        match self.kind {
            MechanismKind::Biglide => (
                Vec2::new(q.rho1, -self.rail_gap),
                Vec2::new(q.rho2, 0.0),
            ),
            MechanismKind::Orthoglide2D => (Vec2::new(q.rho1, 0.0), Vec2::new(0.0, q.rho2)),
        }
    }

    /// Unit directions of the two rails.
    pub fn rail_directions(&self) -> (Vec2, Vec2) {
        match self.kind {
            MechanismKind::Biglide => (Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
            MechanismKind::Orthoglide2D => (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)),
        }
    }

    /// The point where the two velocity amplification factors coincide on
    /// the symmetry axis: `(0, 0)` for the Orthoglide (where they are both
    /// exactly 1), `(0, L / sqrt(2))` for the Biglide.
    pub fn isotropic_point(&self) -> Vec2 {
        match self.kind {
            MechanismKind::Biglide => Vec2::new(0.0, self.strut_length / std::f64::consts::SQRT_2),
            MechanismKind::Orthoglide2D => Vec2::ZERO,
        }
    }
}

/// Joint coordinates reaching pose `p` on the geometry's working-mode
/// branch. The returned joints satisfy both strut-length constraints to
/// machine precision.
pub fn inverse_kinematics(geom: &MechanismGeometry, p: Vec2) -> Result<JointPos> {
    let l = geom.strut_length;
    let s1 = geom.mode.sigma1.as_f64();
    let s2 = geom.mode.sigma2.as_f64();
    match geom.kind {
        MechanismKind::Orthoglide2D => {
            let d1 = l * l - p.y * p.y;
            if d1 < 0.0 {
                return Err(Error::out_of_reach(p, "|y| exceeds strut length"));
            }
            let d2 = l * l - p.x * p.x;
            if d2 < 0.0 {
                return Err(Error::out_of_reach(p, "|x| exceeds strut length"));
            }
            Ok(JointPos::new(p.x - s1 * d1.sqrt(), p.y - s2 * d2.sqrt()))
        }
        MechanismKind::Biglide => {
            if p.y <= 0.0 {
                return Err(Error::mode_violation(
                    p,
                    "canonical Biglide workspace lies at y > 0",
                ));
            }
            let ye = p.y + geom.rail_gap;
            let d1 = l * l - ye * ye;
            if d1 < 0.0 {
                return Err(Error::out_of_reach(p, "|y + e| exceeds strut length"));
            }
            let d2 = l * l - p.y * p.y;
            if d2 < 0.0 {
                return Err(Error::out_of_reach(p, "|y| exceeds strut length"));
            }
            Ok(JointPos::new(p.x - s1 * d1.sqrt(), p.x - s2 * d2.sqrt()))
        }
    }
}

fn sign_matches(value: f64, sigma: Sign, tol: f64) -> bool {
    // Values inside the tolerance band (serial boundary) match either sign.
    match sigma {
        Sign::Neg => value <= tol,
        Sign::Pos => value >= -tol,
    }
}

/// Tool pose assembling the mechanism at joints `q`, on the branch
/// consistent with the working mode.
///
/// For the Orthoglide the two mode-consistent circle intersections are
/// distinguished by the sign of `det A`: the working aspect is the one
/// containing the isotropic point (`det A > 0`). The Biglide uses the
/// upper assembly (`y > 0`).
pub fn forward_kinematics(geom: &MechanismGeometry, q: JointPos) -> Result<Vec2> {
    let l = geom.strut_length;
    let (c1, c2) = geom.slider_positions(q);
    let diff = c2 - c1;
    let d = diff.norm();
    if d <= 1e-9 * l {
        return Err(Error::StructuralSingularity {
            rho1: q.rho1,
            rho2: q.rho2,
        });
    }
    let half = d * 0.5;
    let h_sq = l * l - half * half;
    if h_sq < -4.0 * f64::EPSILON * l * l {
        return Err(Error::NoAssembly {
            rho1: q.rho1,
            rho2: q.rho2,
        });
    }
    let h = h_sq.max(0.0).sqrt();
    let mid = c1 + diff * 0.5;
    let n = diff.perp() * (1.0 / d);
    let candidates = [mid + n * h, mid - n * h];

    let tol = 1e-9 * l;
    let mut matching: Vec<Vec2> = Vec::with_capacity(2);
    for p in candidates {
        let (u1, u2) = mode_components(geom, p, q);
        if sign_matches(u1, geom.mode.sigma1, tol) && sign_matches(u2, geom.mode.sigma2, tol) {
            matching.push(p);
        }
    }
    match matching.len() {
        0 => Err(Error::ModeViolation {
            x: mid.x,
            y: mid.y,
            detail: "no circle intersection consistent with working mode",
        }),
        1 => Ok(matching[0]),
        _ => {
            let p = match geom.kind {
                // Upper assembly.
                MechanismKind::Biglide => {
                    if matching[0].y >= matching[1].y {
                        matching[0]
                    } else {
                        matching[1]
                    }
                }
                // Working aspect: det A > 0 around S.
                MechanismKind::Orthoglide2D => {
                    let det = |p: Vec2| {
                        let (s1, s2) = geom.slider_positions(q);
                        Mat2::from_rows(p - s1, p - s2).det()
                    };
                    if det(matching[0]) >= det(matching[1]) {
                        matching[0]
                    } else {
                        matching[1]
                    }
                }
            };
            Ok(p)
        }
    }
}

/// Strut-vector components along the rails, whose signs define the mode.
fn mode_components(geom: &MechanismGeometry, p: Vec2, q: JointPos) -> (f64, f64) {
    match geom.kind {
        MechanismKind::Biglide => (p.x - q.rho1, p.x - q.rho2),
        MechanismKind::Orthoglide2D => (p.x - q.rho1, p.y - q.rho2),
    }
}

fn check_consistent(geom: &MechanismGeometry, p: Vec2, q: JointPos) -> Result<()> {
    let l = geom.strut_length;
    let (s1, s2) = geom.slider_positions(q);
    let r1 = (p.distance(s1) - l).abs();
    let r2 = (p.distance(s2) - l).abs();
    let residual = r1.max(r2);
    if residual > CONSISTENCY_TOL * l {
        return Err(Error::InconsistentPose { residual });
    }
    Ok(())
}

/// The Jacobian pair `(A, B)` at a consistent configuration `(p, q)`.
///
/// Row `i` of `A` is the strut vector `p - s_i`; `B` is diagonal with the
/// strut vectors' components along their rails.
pub fn jacobians(geom: &MechanismGeometry, p: Vec2, q: JointPos) -> Result<JacobianPair> {
    check_consistent(geom, p, q)?;
    let (s1, s2) = geom.slider_positions(q);
    let (r1, r2) = geom.rail_directions();
    let v1 = p - s1;
    let v2 = p - s2;
    Ok(JacobianPair {
        a: Mat2::from_rows(v1, v2),
        b: Mat2::diagonal(v1.dot(r1), v2.dot(r2)),
    })
}

/// Relative guard on `|det B|` below which the configuration is treated
/// as serial-singular.
pub const SERIAL_GUARD: f64 = 1e-9;
/// Relative guard on `|det A|` below which the configuration is treated
/// as parallel-singular.
pub const PARALLEL_GUARD: f64 = 1e-12;

/// The inverse Jacobian `J^-1 = B^-1 A`, mapping tool velocity to joint
/// velocity (`rhodot = J^-1 tdot`).
pub fn inverse_jacobian(geom: &MechanismGeometry, p: Vec2, q: JointPos) -> Result<Mat2> {
    let pair = jacobians(geom, p, q)?;
    let l2 = geom.strut_length * geom.strut_length;
    let det_b = pair.b.det();
    if det_b.abs() < SERIAL_GUARD * l2 {
        return Err(Error::SerialSingular {
            x: p.x,
            y: p.y,
            det_b: det_b.abs(),
        });
    }
    // B is diagonal: scale rows of A.
    let b1 = pair.b.a11;
    let b2 = pair.b.a22;
    Ok(Mat2::new(
        pair.a.a11 / b1,
        pair.a.a12 / b1,
        pair.a.a21 / b2,
        pair.a.a22 / b2,
    ))
}

/// The symmetry axis used for workspace-center searches: the line along
/// which the kinetostatic field is mirror-symmetric.
pub fn symmetry_axis(geom: &MechanismGeometry) -> Line {
    match geom.kind {
        // Any vertical line; canonical x = 0.
        MechanismKind::Biglide => Line {
            point: Vec2::ZERO,
            dir: Vec2::new(0.0, 1.0),
        },
        // The isotropy continuum x + y = 0.
        MechanismKind::Orthoglide2D => Line {
            point: Vec2::ZERO,
            dir: Vec2::new(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn orthoglide(l: f64) -> MechanismGeometry {
        MechanismGeometry::new(MechanismKind::Orthoglide2D, l).unwrap()
    }

    fn biglide(l: f64) -> MechanismGeometry {
        MechanismGeometry::new(MechanismKind::Biglide, l).unwrap()
    }

    /// Circle-line intersection solved by bisection; independent of the
    /// closed-form IK path.
    fn ik_oracle_rail(center: Vec2, radius: f64, rail_point: Vec2, rail_dir: Vec2, sigma: f64) -> f64 {
        // Find t with |rail_point + t*rail_dir - center| = radius and
        // sign((center - point(t)) . rail_dir) = sigma ... i.e. strut
        // component along rail has sign sigma: center - slider.
        let f = |t: f64| {
            let p = rail_point + rail_dir * t;
            p.distance(center) - radius
        };
        // The slider sits at the foot of the perpendicular plus/minus the
        // in-rail offset; bracket on the correct side.
        let foot = (center - rail_point).dot(rail_dir);
        let (mut a, mut b) = if sigma < 0.0 {
            (foot, foot + 2.0 * radius)
        } else {
            (foot - 2.0 * radius, foot)
        };
        // strut component x - rho has sign sigma => rho on opposite side of foot
        let (fa, fb) = (f(a), f(b));
        assert!(
            fa <= 0.0 && fb >= 0.0 || fa >= 0.0 && fb <= 0.0,
            "oracle bracket failed"
        );
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(a) <= 0.0) == (f(m) <= 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn ik_orthoglide_isotropic_posture() {
        let q = inverse_kinematics(&orthoglide(1.0), Vec2::ZERO).unwrap();
        assert_relative_eq!(q.rho1, 1.0, max_relative = 1e-14);
        assert_relative_eq!(q.rho2, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn ik_orthoglide_example_pose() {
        let geom = orthoglide(1.0);
        let p = Vec2::new(0.3, -0.3);
        let q = inverse_kinematics(&geom, p).unwrap();
        assert_relative_eq!(q.rho1, 1.253939, max_relative = 1e-6);
        assert_relative_eq!(q.rho2, 0.653939, max_relative = 1e-6);
        // circle-line intersection oracle
        let t1 = ik_oracle_rail(p, 1.0, Vec2::ZERO, Vec2::new(1.0, 0.0), -1.0);
        let t2 = ik_oracle_rail(p, 1.0, Vec2::ZERO, Vec2::new(0.0, 1.0), -1.0);
        assert_relative_eq!(q.rho1, t1, epsilon = 1e-10);
        assert_relative_eq!(q.rho2, t2, epsilon = 1e-10);
    }

    #[test]
    fn ik_biglide_example_pose() {
        let geom = biglide(1.0);
        let q = inverse_kinematics(&geom, Vec2::new(0.0, 0.6)).unwrap();
        assert_relative_eq!(q.rho1, 0.8, max_relative = 1e-12);
        assert_relative_eq!(q.rho2, -0.8, max_relative = 1e-12);
    }

    #[test]
    fn ik_satisfies_strut_constraints() {
        let geom = biglide(2.5);
        let p = Vec2::new(0.7, 1.9);
        let q = inverse_kinematics(&geom, p).unwrap();
        let (s1, s2) = geom.slider_positions(q);
        assert!((p.distance(s1) - 2.5).abs() < 1e-12 * 2.5);
        assert!((p.distance(s2) - 2.5).abs() < 1e-12 * 2.5);
    }

    #[test]
    fn ik_rejects_unreachable_and_wrong_half_plane() {
        let geom = orthoglide(1.0);
        assert!(matches!(
            inverse_kinematics(&geom, Vec2::new(0.0, 1.5)),
            Err(Error::OutOfReach { .. })
        ));
        let geom = biglide(1.0);
        assert!(matches!(
            inverse_kinematics(&geom, Vec2::new(0.3, -0.2)),
            Err(Error::ModeViolation { .. })
        ));
        assert!(matches!(
            inverse_kinematics(&geom, Vec2::new(0.3, 1.2)),
            Err(Error::OutOfReach { .. })
        ));
    }

    #[test]
    fn fk_orthoglide_isotropic_posture() {
        let p = forward_kinematics(&orthoglide(1.0), JointPos::new(1.0, 1.0)).unwrap();
        assert!(p.distance(Vec2::ZERO) < 1e-12);
    }

    #[test]
    fn fk_biglide_example() {
        let p = forward_kinematics(&biglide(1.0), JointPos::new(0.8, -0.8)).unwrap();
        assert_relative_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.6, max_relative = 1e-12);
    }

    #[test]
    fn fk_biglide_two_circle_oracle() {
        // Scan-and-bisect on the circle around slider 1.
        let geom = biglide(1.0);
        let q = JointPos::new(0.8, -0.8);
        let (c1, c2) = geom.slider_positions(q);
        let g = |theta: f64| {
            let p = c1 + Vec2::new(theta.cos(), theta.sin());
            p.distance(c2) - 1.0
        };
        let mut roots = Vec::new();
        let n = 4096;
        for k in 0..n {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            let b = std::f64::consts::TAU * (k + 1) as f64 / n as f64;
            if g(a) == 0.0 || g(a) * g(b) < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..100 {
                    let m = 0.5 * (lo + hi);
                    if (g(lo) <= 0.0) == (g(m) <= 0.0) {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                let t = 0.5 * (lo + hi);
                roots.push(c1 + Vec2::new(t.cos(), t.sin()));
            }
        }
        let upper = roots
            .iter()
            .copied()
            .filter(|p| p.y > 0.0)
            .next()
            .expect("oracle found no upper intersection");
        let p = forward_kinematics(&geom, q).unwrap();
        assert!(p.distance(upper) < 1e-9);
    }

    #[test]
    fn fk_coincident_sliders_is_structural() {
        assert!(matches!(
            forward_kinematics(&biglide(1.0), JointPos::new(0.5, 0.5)),
            Err(Error::StructuralSingularity { .. })
        ));
    }

    #[test]
    fn fk_disjoint_circles_is_no_assembly() {
        assert!(matches!(
            forward_kinematics(&biglide(1.0), JointPos::new(2.5, -2.5)),
            Err(Error::NoAssembly { .. })
        ));
    }

    #[test]
    fn fk_picks_working_aspect_for_orthoglide() {
        // Joints with two mode-consistent assemblies; the working aspect
        // is the branch around S where det A > 0.
        let geom = orthoglide(1.0);
        let q = JointPos::new(1.2, 1.3);
        let p = forward_kinematics(&geom, q).unwrap();
        let pair = jacobians(&geom, p, q).unwrap();
        assert!(pair.a.det() > 0.0);
        assert_eq!(inverse_kinematics(&geom, p).unwrap(), q);
    }

    #[test]
    fn roundtrip_random_poses() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let modes = [
            WorkingMode::new(Sign::Neg, Sign::Neg),
            WorkingMode::new(Sign::Neg, Sign::Pos),
            WorkingMode::new(Sign::Pos, Sign::Neg),
            WorkingMode::new(Sign::Pos, Sign::Pos),
        ];
        // Orthoglide: all four branches, poses inside the working aspect.
        for mode in modes {
            let geom = orthoglide(1.0).with_mode(mode);
            let mut n = 0;
            while n < 2500 {
                let p = Vec2::new(rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99));
                let q = inverse_kinematics(&geom, p).unwrap();
                let pair = jacobians(&geom, p, q).unwrap();
                if pair.a.det() <= 1e-3 {
                    continue; // other aspect or near the aspect boundary
                }
                let back = forward_kinematics(&geom, q).unwrap();
                assert!(back.distance(p) <= 1e-9, "mode {mode:?} pose {p:?}");
                n += 1;
            }
        }
        // Biglide: the two nondegenerate branches, any x, upper assembly.
        for mode in [
            WorkingMode::new(Sign::Neg, Sign::Pos),
            WorkingMode::new(Sign::Pos, Sign::Neg),
        ] {
            let geom = biglide(1.0).with_mode(mode);
            for _ in 0..5000 {
                let p = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.01..0.99));
                let q = inverse_kinematics(&geom, p).unwrap();
                let back = forward_kinematics(&geom, q).unwrap();
                assert!(back.distance(p) <= 1e-9, "mode {mode:?} pose {p:?}");
            }
        }
    }

    #[test]
    fn jacobians_orthoglide_isotropic() {
        let geom = orthoglide(1.0);
        let pair = jacobians(&geom, Vec2::ZERO, JointPos::new(1.0, 1.0)).unwrap();
        assert_eq!(pair.a, Mat2::new(-1.0, 0.0, 0.0, -1.0));
        assert_eq!(pair.b, Mat2::diagonal(-1.0, -1.0));
    }

    #[test]
    fn jacobians_biglide_example() {
        let geom = biglide(1.0);
        let pair = jacobians(&geom, Vec2::new(0.0, 0.6), JointPos::new(0.8, -0.8)).unwrap();
        assert_relative_eq!(pair.a.a11, -0.8, max_relative = 1e-12);
        assert_relative_eq!(pair.a.a12, 0.6, max_relative = 1e-12);
        assert_relative_eq!(pair.a.a21, 0.8, max_relative = 1e-12);
        assert_relative_eq!(pair.a.a22, 0.6, max_relative = 1e-12);
        assert_relative_eq!(pair.b.a11, -0.8, max_relative = 1e-12);
        assert_relative_eq!(pair.b.a22, 0.8, max_relative = 1e-12);
        assert_eq!(pair.b.a12, 0.0);
        assert_eq!(pair.b.a21, 0.0);
    }

    #[test]
    fn jacobians_biglide_on_rail_line_is_parallel_singular() {
        // y = 0 puts both struts along the rail: rows of A proportional.
        let geom = biglide(1.0);
        let p = Vec2::new(0.3, 0.0);
        let q = JointPos::new(1.3, -0.7);
        let pair = jacobians(&geom, p, q).unwrap();
        assert_eq!(pair.a.det(), 0.0);
    }

    #[test]
    fn jacobians_reject_inconsistent_pose() {
        let geom = biglide(1.0);
        assert!(matches!(
            jacobians(&geom, Vec2::new(0.0, 0.7), JointPos::new(0.8, -0.8)),
            Err(Error::InconsistentPose { .. })
        ));
    }

    #[test]
    fn inverse_jacobian_orthoglide_isotropic_is_identity() {
        let geom = orthoglide(1.0);
        let j = inverse_jacobian(&geom, Vec2::ZERO, JointPos::new(1.0, 1.0)).unwrap();
        assert_relative_eq!(j.a11, 1.0, max_relative = 1e-14);
        assert_relative_eq!(j.a22, 1.0, max_relative = 1e-14);
        assert!(j.a12.abs() < 1e-14 && j.a21.abs() < 1e-14);
    }

    #[test]
    fn inverse_jacobian_biglide_example() {
        let geom = biglide(1.0);
        let p = Vec2::new(0.0, 0.6);
        let q = inverse_kinematics(&geom, p).unwrap();
        let j = inverse_jacobian(&geom, p, q).unwrap();
        assert_relative_eq!(j.a11, 1.0, max_relative = 1e-12);
        assert_relative_eq!(j.a12, -0.75, max_relative = 1e-12);
        assert_relative_eq!(j.a21, 1.0, max_relative = 1e-12);
        assert_relative_eq!(j.a22, 0.75, max_relative = 1e-12);
    }

    #[test]
    fn inverse_jacobian_orthoglide_symmetric_example() {
        let geom = orthoglide(1.0);
        let p = Vec2::new(0.5547, 0.5547);
        let q = inverse_kinematics(&geom, p).unwrap();
        let j = inverse_jacobian(&geom, p, q).unwrap();
        assert_relative_eq!(j.a11, 1.0, max_relative = 1e-12);
        assert_relative_eq!(j.a12, -2.0 / 3.0, max_relative = 1e-5);
        assert_relative_eq!(j.a21, -2.0 / 3.0, max_relative = 1e-5);
        assert_relative_eq!(j.a22, 1.0, max_relative = 1e-12);
    }

    /// Central finite differences of the inverse kinematics.
    fn fd_inverse_jacobian(geom: &MechanismGeometry, p: Vec2, h: f64) -> Mat2 {
        let col = |dx: f64, dy: f64| {
            let qp = inverse_kinematics(geom, Vec2::new(p.x + dx, p.y + dy)).unwrap();
            let qm = inverse_kinematics(geom, Vec2::new(p.x - dx, p.y - dy)).unwrap();
            (
                (qp.rho1 - qm.rho1) / (2.0 * h),
                (qp.rho2 - qm.rho2) / (2.0 * h),
            )
        };
        let (j11, j21) = col(h, 0.0);
        let (j12, j22) = col(0.0, h);
        Mat2::new(j11, j12, j21, j22)
    }

    #[test]
    fn inverse_jacobian_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let ortho = orthoglide(1.0);
        let big = biglide(1.0);
        let mut checked = 0;
        while checked < 1000 {
            let (geom, p) = if checked % 2 == 0 {
                (
                    &ortho,
                    Vec2::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)),
                )
            } else {
                (
                    &big,
                    Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(0.1..0.9)),
                )
            };
            let q = inverse_kinematics(geom, p).unwrap();
            let pair = jacobians(geom, p, q).unwrap();
            if pair.b.det().abs() < 1e-2 || pair.a.det().abs() < 1e-2 {
                continue;
            }
            let j = inverse_jacobian(geom, p, q).unwrap();
            let fd = fd_inverse_jacobian(geom, p, 1e-6);
            let norm = |m: &Mat2| {
                (m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22).sqrt()
            };
            let diff = Mat2::new(
                j.a11 - fd.a11,
                j.a12 - fd.a12,
                j.a21 - fd.a21,
                j.a22 - fd.a22,
            );
            assert!(
                norm(&diff) <= 1e-5 * norm(&j),
                "FD mismatch at {p:?} on {:?}",
                geom.kind()
            );
            checked += 1;
        }
    }

    #[test]
    fn velocity_relation_holds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let geom = orthoglide(1.0);
        for _ in 0..500 {
            let p = Vec2::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
            let q = inverse_kinematics(&geom, p).unwrap();
            let pair = jacobians(&geom, p, q).unwrap();
            if pair.b.det().abs() < 1e-2 {
                continue;
            }
            let j = inverse_jacobian(&geom, p, q).unwrap();
            let t_dot = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let rho_dot = j.mul_vec(t_dot);
            let lhs = pair.a.mul_vec(t_dot);
            let rhs = pair.b.mul_vec(rho_dot);
            assert!((lhs - rhs).norm() <= 1e-10);
        }
    }

    #[test]
    fn biglide_jacobians_are_translation_invariant() {
        let geom = biglide(1.0);
        let y = 0.47;
        let base_q = inverse_kinematics(&geom, Vec2::new(0.0, y)).unwrap();
        let base = jacobians(&geom, Vec2::new(0.0, y), base_q).unwrap();
        for dx in [-2.0, -0.3, 0.5, 1.7] {
            let p = Vec2::new(dx, y);
            let q = inverse_kinematics(&geom, p).unwrap();
            // joints shift by dx
            assert_relative_eq!(q.rho1 - base_q.rho1, dx, epsilon = 1e-12);
            assert_relative_eq!(q.rho2 - base_q.rho2, dx, epsilon = 1e-12);
            let pair = jacobians(&geom, p, q).unwrap();
            assert_relative_eq!(pair.a.a11, base.a.a11, epsilon = 1e-12);
            assert_relative_eq!(pair.a.a21, base.a.a21, epsilon = 1e-12);
            assert_relative_eq!(pair.b.a11, base.b.a11, epsilon = 1e-12);
            assert_relative_eq!(pair.b.a22, base.b.a22, epsilon = 1e-12);
        }
    }

    #[test]
    fn orthoglide_swap_symmetry_transposes_inverse_jacobian() {
        let geom = orthoglide(1.0);
        let p = Vec2::new(0.41, -0.23);
        let q = inverse_kinematics(&geom, p).unwrap();
        let j = inverse_jacobian(&geom, p, q).unwrap();
        let p_sw = Vec2::new(p.y, p.x);
        let q_sw = inverse_kinematics(&geom, p_sw).unwrap();
        assert_relative_eq!(q_sw.rho1, q.rho2, epsilon = 1e-14);
        assert_relative_eq!(q_sw.rho2, q.rho1, epsilon = 1e-14);
        let j_sw = inverse_jacobian(&geom, p_sw, q_sw).unwrap();
        assert_relative_eq!(j_sw.a12, j.a21, epsilon = 1e-14);
        assert_relative_eq!(j_sw.a21, j.a12, epsilon = 1e-14);
    }

    #[test]
    fn symmetry_axes() {
        let line = symmetry_axis(&orthoglide(1.0));
        assert_relative_eq!(line.dir.x, 0.70711, max_relative = 1e-5);
        assert_relative_eq!(line.dir.y, -0.70711, max_relative = 1e-5);
        let line = symmetry_axis(&biglide(1.0));
        assert_eq!(line.dir, Vec2::new(0.0, 1.0));
        let gapped = biglide(1.0).with_rail_gap(0.2).unwrap();
        assert_eq!(symmetry_axis(&gapped).dir, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn geometry_validation() {
        assert!(MechanismGeometry::new(MechanismKind::Biglide, 0.0).is_err());
        assert!(MechanismGeometry::new(MechanismKind::Biglide, -1.0).is_err());
        assert!(orthoglide(1.0).with_rail_gap(0.1).is_err());
        assert!(biglide(1.0).with_rail_gap(-0.1).is_err());
    }

    #[test]
    fn scaled_geometry_scales_all_lengths() {
        let geom = biglide(2.0).with_rail_gap(0.3).unwrap();
        let scaled = geom.scaled(2.5).unwrap();
        assert_relative_eq!(scaled.strut_length(), 5.0);
        assert_relative_eq!(scaled.rail_gap(), 0.75);
        assert_eq!(scaled.mode(), geom.mode());
    }
}
