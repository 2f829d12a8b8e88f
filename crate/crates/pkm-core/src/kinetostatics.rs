//! Velocity amplification factors, condition-number field, and
//! isotropy-locus tracing.
//!
//! The manipulability ellipse of the tool velocity is defined by the
//! inverse Jacobian: unit joint speed maps to an ellipse whose semiaxis
//! lengths are the velocity amplification factors (VAF)
//! `lambda_i = 1 / gamma_i`, the reciprocals of the singular values of
//! `J^-1` (equivalently the singular values of `J`). A design bound
//! `lo <= lambda_i <= hi` keeps the transmission between joint and tool
//! speed within a prescribed range in every direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::mechanisms::{
    self, inverse_kinematics, jacobians, MechanismGeometry, MechanismKind,
};
use crate::planar::{singular_values2, Mat2, Rect, Vec2};

/// Ordered pair of velocity amplification factors at a pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vaf {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Vaf {
    /// Builds the pair sorted ascending.
    pub fn from_pair(a: f64, b: f64) -> Self {
        if a <= b {
            Vaf {
                lambda_min: a,
                lambda_max: b,
            }
        } else {
            Vaf {
                lambda_min: b,
                lambda_max: a,
            }
        }
    }

    pub fn cond(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }
}

/// Admissible range for both amplification factors.
///
/// The default `[1/3, 3]` caps the tool speed at three times the joint
/// speed and vice versa. `lo = 0` / `hi = inf` disable a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VafBounds {
    pub lo: f64,
    pub hi: f64,
}

impl VafBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo <= 1.0) || lo.is_nan() {
            return Err(Error::InvalidParameter {
                what: "bounds.lo",
                detail: format!("need 0 <= lo <= 1, got {lo}"),
            });
        }
        if !(hi >= 1.0) {
            return Err(Error::InvalidParameter {
                what: "bounds.hi",
                detail: format!("need hi >= 1, got {hi}"),
            });
        }
        Ok(VafBounds { lo, hi })
    }

    pub fn contains(&self, vaf: Vaf) -> bool {
        vaf.lambda_min >= self.lo && vaf.lambda_max <= self.hi
    }
}

impl Default for VafBounds {
    fn default() -> Self {
        VafBounds {
            lo: 1.0 / 3.0,
            hi: 3.0,
        }
    }
}

/// Computes the inverse Jacobian at `p`, refusing evaluation close to
/// singularities so downstream searches never consume garbage values.
fn guarded_inverse_jacobian(geom: &MechanismGeometry, p: Vec2) -> Result<Mat2> {
    let q = inverse_kinematics(geom, p)?;
    let pair = jacobians(geom, p, q)?;
    let l2 = geom.strut_length() * geom.strut_length();
    let det_b = pair.b.det();
    if det_b.abs() < mechanisms::SERIAL_GUARD * l2 {
        return Err(Error::SerialSingular {
            x: p.x,
            y: p.y,
            det_b: det_b.abs(),
        });
    }
    let det_a = pair.a.det();
    if det_a.abs() < mechanisms::PARALLEL_GUARD * l2 {
        return Err(Error::ParallelSingular {
            x: p.x,
            y: p.y,
            det_a: det_a.abs(),
        });
    }
    Ok(Mat2::new(
        pair.a.a11 / pair.b.a11,
        pair.a.a12 / pair.b.a11,
        pair.a.a21 / pair.b.a22,
        pair.a.a22 / pair.b.a22,
    ))
}

/// Velocity amplification factors at pose `p`.
pub fn vaf_at(geom: &MechanismGeometry, p: Vec2) -> Result<Vaf> {
    let j_inv = guarded_inverse_jacobian(geom, p)?;
    let (s_min, s_max) = singular_values2(&j_inv);
    Ok(Vaf::from_pair(1.0 / s_max, 1.0 / s_min))
}

/// Closed-form Biglide amplification factors, which depend only on the
/// tool height: the unordered pair `{1/sqrt(2), sqrt(L^2 - y^2)/(sqrt(2) y)}`.
pub fn vaf_closed_form_biglide(l: f64, y: f64) -> Result<Vaf> {
    if !(y > 0.0 && y < l) {
        return Err(Error::DomainOutOfRange {
            what: "y",
            value: y,
            lo: 0.0,
            hi: l,
        });
    }
    let s = (l * l - y * y).sqrt();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    Ok(Vaf::from_pair(inv_sqrt2, s / (std::f64::consts::SQRT_2 * y)))
}

/// Condition number of the Jacobian at `p` (`lambda_max / lambda_min`).
pub fn cond_at(geom: &MechanismGeometry, p: Vec2) -> Result<f64> {
    Ok(vaf_at(geom, p)?.cond())
}

/// Polyline of configurations where the two amplification factors
/// coincide, with the common factor value at every vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyLocus {
    pub points: Vec<Vec2>,
    pub vaf_along: Vec<f64>,
}

/// Default acceptance threshold on `cond - 1` for locus points.
pub const TOL_ISO: f64 = 1e-6;

/// Golden-section minimization of `f` on `[a, b]` down to interval `tol`.
fn golden_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
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

/// Measured common factor at a (numerically) isotropic pose: the
/// geometric mean of the pair, which is first-order insensitive to the
/// residual split between the two factors.
fn common_vaf(vaf: Vaf) -> f64 {
    (vaf.lambda_min * vaf.lambda_max).sqrt()
}

/// Traces the isotropy continuum inside `region`.
///
/// For the Orthoglide the locus is marched from the isotropic point `S`
/// along the symmetry axis with a perpendicular golden-section corrector;
/// for the Biglide the single isotropic height is root-found and swept
/// across the region. Every stored point satisfies
/// `cond(J) <= 1 + tol_iso`.
pub fn trace_isotropy_locus(
    geom: &MechanismGeometry,
    region: Rect,
    step: f64,
    tol_iso: f64,
) -> Result<IsotropyLocus> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            what: "step",
            detail: format!("must be positive, got {step}"),
        });
    }
    match geom.kind() {
        MechanismKind::Biglide => trace_biglide(geom, region, step, tol_iso),
        MechanismKind::Orthoglide2D => trace_orthoglide(geom, region, step, tol_iso),
    }
}

fn trace_biglide(
    geom: &MechanismGeometry,
    region: Rect,
    step: f64,
    tol_iso: f64,
) -> Result<IsotropyLocus> {
    let l = geom.strut_length();
    // The two factors cross where s(y) = y; bisect the signed gap.
    let gap = |y: f64| (l * l - y * y).sqrt() - y;
    let (mut lo, mut hi) = (1e-9 * l, l * (1.0 - 1e-12));
    if gap(lo) < 0.0 || gap(hi) > 0.0 {
        return Err(Error::EmptyLocus);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y_star = 0.5 * (lo + hi);
    if y_star < region.min.y || y_star > region.max.y {
        return Err(Error::EmptyLocus);
    }
    let mut points = Vec::new();
    let mut vaf_along = Vec::new();
    let n = (region.width() / step).ceil().max(1.0) as usize;
    for k in 0..=n {
        let x = region.min.x + region.width() * k as f64 / n as f64;
        let p = Vec2::new(x, y_star);
        let vaf = vaf_at(geom, p)?;
        if vaf.cond() > 1.0 + tol_iso {
            return Err(Error::EmptyLocus);
        }
        points.push(p);
        vaf_along.push(common_vaf(vaf));
    }
    Ok(IsotropyLocus { points, vaf_along })
}

fn trace_orthoglide(
    geom: &MechanismGeometry,
    region: Rect,
    step: f64,
    tol_iso: f64,
) -> Result<IsotropyLocus> {
    let axis = mechanisms::symmetry_axis(geom);
    let dir = axis.dir;
    let perp = dir.perp();
    // Corrected locus point near `p`, or None where no isotropic pose
    // exists within the corrector window.
    let correct = |p: Vec2| -> Option<(Vec2, f64)> {
        let f = |h: f64| match cond_at(geom, p + perp * h) {
            Ok(c) => c - 1.0,
            Err(_) => f64::INFINITY,
        };
        let h = golden_min(-step, step, 1e-10 * geom.strut_length(), f);
        let q = p + perp * h;
        let vaf = vaf_at(geom, q).ok()?;
        if vaf.cond() - 1.0 <= tol_iso && region.contains(q) {
            Some((q, common_vaf(vaf)))
        } else {
            None
        }
    };

    // Seed at S when possible, otherwise scan the axis for a point whose
    // corrected pose lands inside the region.
    let s = geom.isotropic_point();
    let seed_t = if region.contains(s) {
        Some(0.0)
    } else {
        let t_lo = -2.0 * geom.strut_length();
        let mut found = None;
        let mut t = t_lo;
        while t <= -t_lo {
            if region.contains(s + dir * t) && correct(s + dir * t).is_some() {
                found = Some(t);
                break;
            }
            t += step;
        }
        found
    };
    let Some(seed_t) = seed_t else {
        return Err(Error::EmptyLocus);
    };

    let march = |sign: f64| -> Vec<(Vec2, f64)> {
        let mut out = Vec::new();
        let mut k = if sign > 0.0 { 1 } else { 0 };
        loop {
            let t = seed_t + sign * step * k as f64;
            let p = s + dir * t;
            if !region.contains(p) {
                break;
            }
            match correct(p) {
                Some(hit) => out.push(hit),
                None => break,
            }
            k += 1;
        }
        out
    };

    let backward = march(-1.0);
    let forward = march(1.0);
    if backward.is_empty() && forward.is_empty() {
        return Err(Error::EmptyLocus);
    }
    let mut points = Vec::with_capacity(backward.len() + forward.len());
    let mut vaf_along = Vec::with_capacity(backward.len() + forward.len());
    for (p, v) in backward.into_iter().rev().chain(forward) {
        points.push(p);
        vaf_along.push(v);
    }
    Ok(IsotropyLocus { points, vaf_along })
}

/// Extrema of the amplification factors over a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentExtrema {
    /// Smallest `lambda_min` over the samples.
    pub lambda_min: f64,
    /// Segment parameter in `[0, 1]` where it occurs.
    pub lambda_min_at: f64,
    /// Largest `lambda_max` over the samples.
    pub lambda_max: f64,
    pub lambda_max_at: f64,
}

/// Sample parameters for a segment: `n` Chebyshev-spaced interior nodes
/// plus both endpoints, ascending.
pub(crate) fn segment_params(n: usize) -> Vec<f64> {
    let mut params = Vec::with_capacity(n + 2);
    params.push(0.0);
    for k in 0..n {
        let angle = std::f64::consts::PI * (2.0 * (n - 1 - k) as f64 + 1.0) / (2.0 * n as f64);
        params.push(0.5 * (1.0 + angle.cos()));
    }
    params.push(1.0);
    params
}

/// VAF extrema over `n` Chebyshev-spaced samples of the segment
/// `p0 -> p1` plus both endpoints. Requires `n >= 33`; evaluation errors
/// are reported with the offending sample.
pub fn vaf_extrema_on_segment(
    geom: &MechanismGeometry,
    p0: Vec2,
    p1: Vec2,
    n: usize,
) -> Result<SegmentExtrema> {
    if n < 33 {
        return Err(Error::InvalidParameter {
            what: "n",
            detail: format!("need at least 33 samples per segment, got {n}"),
        });
    }
    let mut ext: Option<SegmentExtrema> = None;
    for t in segment_params(n) {
        let p = p0 + (p1 - p0) * t;
        let vaf = vaf_at(geom, p).map_err(|e| Error::SampleFailure {
            param: t,
            x: p.x,
            y: p.y,
            source: Box::new(e),
        })?;
        match &mut ext {
            None => {
                ext = Some(SegmentExtrema {
                    lambda_min: vaf.lambda_min,
                    lambda_min_at: t,
                    lambda_max: vaf.lambda_max,
                    lambda_max_at: t,
                });
            }
            Some(e) => {
                if vaf.lambda_min < e.lambda_min {
                    e.lambda_min = vaf.lambda_min;
                    e.lambda_min_at = t;
                }
                if vaf.lambda_max > e.lambda_max {
                    e.lambda_max = vaf.lambda_max;
                    e.lambda_max_at = t;
                }
            }
        }
    }
    Ok(ext.expect("segment always has samples"))
}

/// Per-cell amplification factors over a rectangular grid. Cells where
/// evaluation fails (unreachable or singular) hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct VafGrid {
    pub bounds: Rect,
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
    pub lambda_min: Vec<f64>,
    pub lambda_max: Vec<f64>,
}

impl VafGrid {
    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.bounds.min.x + (i as f64 + 0.5) * self.pitch,
            self.bounds.min.y + (j as f64 + 0.5) * self.pitch,
        )
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Evaluates the VAF field over `bounds` at the given pitch
/// (row-parallel when the `parallel` feature is enabled).
pub fn vaf_grid(geom: &MechanismGeometry, bounds: Rect, pitch: f64) -> VafGrid {
    let nx = (bounds.width() / pitch).ceil().max(1.0) as usize;
    let ny = (bounds.height() / pitch).ceil().max(1.0) as usize;
    let rows: Vec<Vec<(f64, f64)>> = exec::map_indexed(ny, |j| {
        (0..nx)
            .map(|i| {
                let p = Vec2::new(
                    bounds.min.x + (i as f64 + 0.5) * pitch,
                    bounds.min.y + (j as f64 + 0.5) * pitch,
                );
                match vaf_at(geom, p) {
                    Ok(v) => (v.lambda_min, v.lambda_max),
                    Err(_) => (f64::NAN, f64::NAN),
                }
            })
            .collect()
    });
    let mut lambda_min = Vec::with_capacity(nx * ny);
    let mut lambda_max = Vec::with_capacity(nx * ny);
    for row in rows {
        for (lo, hi) in row {
            lambda_min.push(lo);
            lambda_max.push(hi);
        }
    }
    VafGrid {
        bounds,
        pitch,
        nx,
        ny,
        lambda_min,
        lambda_max,
    }
}
