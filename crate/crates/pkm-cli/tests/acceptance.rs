//! Acceptance suite: one test per acceptance criterion, each printing a
//! `criterion N PASS` line (run with `--nocapture` to see them).
//!
//! Published reference design values are not reproducible exactly: the
//! source material under-specifies the rail offsets, strut attachments,
//! and the envelope convention, so the comparison criteria check the
//! structural claims (orderings, ratios, closed forms) and report the
//! reference rows side by side with deviations.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pkm_core::kinetostatics::{trace_isotropy_locus, vaf_at, vaf_closed_form_biglide, TOL_ISO};
use pkm_core::mechanisms::{
    inverse_jacobian, inverse_kinematics, jacobians, MechanismGeometry, MechanismKind,
};
use pkm_core::planar::{Mat2, Rect, Vec2};
use pkm_core::sizing::{compare_designs, design_mechanism, DesignOutcome};
use pkm_core::workspace::{
    center_locus_search, grow_square, BoundKind, CenterScan, DesignOptions, GrowthOptions,
};
use pkm_core::VafBounds;

fn orthoglide(l: f64) -> MechanismGeometry {
    MechanismGeometry::new(MechanismKind::Orthoglide2D, l).unwrap()
}

fn biglide(l: f64) -> MechanismGeometry {
    MechanismGeometry::new(MechanismKind::Biglide, l).unwrap()
}

const THETA_B: f64 = std::f64::consts::FRAC_PI_4;

/// Canonical designs (target side 1 m, bounds [1/3, 3], default
/// options), computed once and shared across criteria.
fn canonical_designs() -> &'static (DesignOutcome, DesignOutcome) {
    static DESIGNS: OnceLock<(DesignOutcome, DesignOutcome)> = OnceLock::new();
    DESIGNS.get_or_init(|| {
        let opts = DesignOptions::default();
        let bounds = VafBounds::default();
        let big = design_mechanism(MechanismKind::Biglide, &bounds, 1.0, &opts).unwrap();
        let orth = design_mechanism(MechanismKind::Orthoglide2D, &bounds, 1.0, &opts).unwrap();
        (big, orth)
    })
}

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

fn frob(m: &Mat2) -> f64 {
    (m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22).sqrt()
}

#[test]
fn c1_jacobian_matches_finite_differences() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0001);
    for kind in [MechanismKind::Orthoglide2D, MechanismKind::Biglide] {
        let geom = MechanismGeometry::new(kind, 1.0).unwrap();
        let mut checked = 0;
        while checked < 1000 {
            let p = match kind {
                MechanismKind::Orthoglide2D => {
                    Vec2::new(rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95))
                }
                MechanismKind::Biglide => {
                    Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(0.05..0.95))
                }
            };
            let q = inverse_kinematics(&geom, p).unwrap();
            let pair = jacobians(&geom, p, q).unwrap();
            if pair.a.det().abs() < 1e-2 || pair.b.det().abs() < 1e-2 {
                continue; // criterion covers nonsingular poses
            }
            let j = inverse_jacobian(&geom, p, q).unwrap();
            let fd = fd_inverse_jacobian(&geom, p, 1e-6);
            let diff = Mat2::new(
                j.a11 - fd.a11,
                j.a12 - fd.a12,
                j.a21 - fd.a21,
                j.a22 - fd.a22,
            );
            assert!(
                frob(&diff) <= 1e-5 * frob(&j),
                "criterion 1 FAIL: finite-difference mismatch at {p:?} ({kind:?})"
            );
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion 1 FAIL: runtime {elapsed:?} exceeds 1 s"
    );
    println!(
        "criterion 1 PASS: analytic inverse Jacobian matches central finite differences \
         (1000 poses per mechanism, rel 1e-5) in {elapsed:?}"
    );
}

#[test]
fn c2_biglide_closed_forms_and_band_growth() {
    let geom = biglide(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002);
    let sqrt2 = std::f64::consts::SQRT_2;
    for _ in 0..10_000 {
        let y = rng.gen_range(0.02..0.98);
        let x = rng.gen_range(-2.0..2.0);
        let v = vaf_at(&geom, Vec2::new(x, y)).unwrap();
        let cf = vaf_closed_form_biglide(1.0, y).unwrap();
        assert!(
            (v.lambda_min - cf.lambda_min).abs() <= 1e-10
                && (v.lambda_max - cf.lambda_max).abs() <= 1e-10,
            "criterion 2 FAIL: closed form mismatch at ({x}, {y})"
        );
        let s = (1.0 - y * y).sqrt();
        let expected = [1.0 / sqrt2, s / (sqrt2 * y)];
        let got = [v.lambda_min, v.lambda_max];
        let direct_match = (got[0] - expected[0].min(expected[1])).abs() <= 1e-10
            && (got[1] - expected[0].max(expected[1])).abs() <= 1e-10;
        assert!(direct_match, "criterion 2 FAIL: factor pair at ({x}, {y})");
    }

    // band boundaries recovered by growth: diamond diagonal within 1e-3 L
    let y_lo = 1.0 / 19.0_f64.sqrt();
    let y_hi = 3.0 / 11.0_f64.sqrt();
    let center = Vec2::new(0.0, 0.5 * (y_lo + y_hi));
    let report = grow_square(
        &geom,
        center,
        THETA_B,
        &VafBounds::default(),
        &GrowthOptions::default(),
    )
    .unwrap();
    let diagonal = report.square.side * sqrt2;
    assert!(
        (diagonal - 0.675106).abs() <= 1e-3,
        "criterion 2 FAIL: diagonal {diagonal} vs 0.675106"
    );
    let corners = report.square.corners(&geom);
    assert!((corners[0].y - y_hi).abs() <= 1e-3);
    assert!((corners[2].y - y_lo).abs() <= 1e-3);
    println!(
        "criterion 2 PASS: closed-form factors at 10^4 poses (1e-10) and band growth \
         diagonal {diagonal:.6} = 0.675106 +/- 1e-3"
    );
}

#[test]
fn c3_orthoglide_isotropy_locus() {
    let geom = orthoglide(1.0);
    let region = Rect::from_bounds(-0.9, -0.9, 0.9, 0.9);
    let locus = trace_isotropy_locus(&geom, region, 1.0 / 500.0, TOL_ISO).unwrap();
    assert!(locus.points.len() > 500);
    for (p, v) in locus.points.iter().zip(&locus.vaf_along) {
        assert!(
            (p.x + p.y).abs() <= 1e-6,
            "criterion 3 FAIL: locus point {p:?} off x + y = 0"
        );
        let expected = (1.0 - p.x * p.x).sqrt();
        assert!(
            (v - expected).abs() <= 1e-8,
            "criterion 3 FAIL: common factor {v} vs {expected} at {p:?}"
        );
        let cond = vaf_at(&geom, *p).unwrap().cond();
        assert!(
            (cond - 1.0).abs() <= 1e-8,
            "criterion 3 FAIL: cond {cond} at {p:?}"
        );
    }
    println!(
        "criterion 3 PASS: {} locus points on x + y = 0 within 1e-6, common factor \
         sqrt(L^2 - t^2)/L within 1e-8, cond(J) = 1 within 1e-8",
        locus.points.len()
    );
}

#[test]
fn c4_orthoglide_growth_binding() {
    let geom = orthoglide(1.0);
    let start = Instant::now();
    let report = grow_square(
        &geom,
        Vec2::ZERO,
        THETA_B,
        &VafBounds::default(),
        &GrowthOptions::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "criterion 4 FAIL: growth took {elapsed:?}"
    );

    // boundary survey: max factor = 3.0 +/- 1e-3, min factor strictly > 1/3
    let corners = report.square.corners(&geom);
    let mut max_lambda = f64::NEG_INFINITY;
    let mut min_lambda = f64::INFINITY;
    for side in 0..4 {
        let p0 = corners[side];
        let p1 = corners[(side + 1) % 4];
        for k in 0..=512 {
            let t = k as f64 / 512.0;
            let v = vaf_at(&geom, p0 + (p1 - p0) * t).unwrap();
            max_lambda = max_lambda.max(v.lambda_max);
            min_lambda = min_lambda.min(v.lambda_min);
        }
    }
    assert!(
        (max_lambda - 3.0).abs() <= 1e-3,
        "criterion 4 FAIL: boundary max {max_lambda} not 3.0 +/- 1e-3"
    );
    assert!(
        min_lambda > 1.0 / 3.0 + 1e-3,
        "criterion 4 FAIL: lower bound not slack (min {min_lambda})"
    );

    // binding attained at two opposite corners symmetric about the axis
    let his: Vec<Vec2> = report
        .bindings
        .iter()
        .filter(|b| b.bound == BoundKind::Hi)
        .map(|b| b.point)
        .collect();
    assert_eq!(
        his.len(),
        2,
        "criterion 4 FAIL: expected two upper-bound corners, got {:?}",
        report.bindings
    );
    let (p, q) = (his[0], his[1]);
    assert!((p + q).norm() <= 1e-6, "criterion 4 FAIL: not opposite");
    let reflected = Vec2::new(-p.y, -p.x); // reflection across x + y = 0
    assert!(
        reflected.distance(q) <= 1e-6,
        "criterion 4 FAIL: not symmetric about the axis"
    );
    let corner_dist = |pt: Vec2| {
        corners
            .iter()
            .map(|c| c.distance(pt))
            .fold(f64::INFINITY, f64::min)
    };
    assert!(corner_dist(p) <= 1e-9 && corner_dist(q) <= 1e-9);
    println!(
        "criterion 4 PASS: grown square side {:.6}, boundary max {max_lambda:.6} = 3 +/- 1e-3 \
         at two opposite corners symmetric about the axis, lower bound slack, in {elapsed:?}",
        report.square.side
    );
}

#[test]
fn c5_center_optimality() {
    // Orthoglide: the scan returns the isotropic point within one step
    let geom = orthoglide(1.0);
    let scan = CenterScan::relative(&geom, 0.3, 0.3, 0.02);
    let search = center_locus_search(
        &geom,
        THETA_B,
        &VafBounds::default(),
        &scan,
        &GrowthOptions::default(),
    );
    let (best, _) = search.best.clone().expect("feasible centers");
    assert!(
        best.norm() <= scan.step + 1e-12,
        "criterion 5 FAIL: best center {best:?} more than one step from S"
    );

    // Biglide: the side map is constant perpendicular to the axis
    let geom = biglide(1.0);
    let scan = CenterScan::relative(&geom, 0.3, 0.3, 0.02);
    let search = center_locus_search(
        &geom,
        THETA_B,
        &VafBounds::default(),
        &scan,
        &GrowthOptions::default(),
    );
    let n_along = search.map.along_offsets.len();
    let n_perp = search.map.perp_offsets.len();
    let mut max_spread = 0.0_f64;
    for i in 0..n_along {
        let base = search.map.side_at(i, 0);
        for j in 1..n_perp {
            max_spread = max_spread.max((search.map.side_at(i, j) - base).abs());
        }
    }
    assert!(
        max_spread <= 1e-9,
        "criterion 5 FAIL: perpendicular spread {max_spread}"
    );
    println!(
        "criterion 5 PASS: Orthoglide best center at S (|c| = {:.6} <= one scan step), \
         Biglide side map constant across the axis-orthogonal direction (spread {max_spread:.3e})",
        best.norm()
    );
}

#[test]
fn c6_design_soundness_and_connectivity() {
    let (big, orth) = canonical_designs();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    for outcome in [big, orth] {
        let r = &outcome.result;
        let geom = MechanismGeometry::new(r.kind, r.strut_length).unwrap();
        let corners = r.workspace.corners(&geom);
        let mut violations = 0usize;
        for _ in 0..10_000 {
            let u = rng.gen_range(0.0..1.0);
            let v = rng.gen_range(0.0..1.0);
            let p = corners[0] + (corners[1] - corners[0]) * u + (corners[3] - corners[0]) * v;
            let vaf = vaf_at(&geom, p).unwrap();
            if vaf.lambda_min < 1.0 / 3.0 - 1e-6 || vaf.lambda_max > 3.0 + 1e-6 {
                violations += 1;
            }
        }
        assert_eq!(
            violations, 0,
            "criterion 6 FAIL: {violations} interior bound violations for {:?}",
            r.kind
        );
        let tcon = outcome.cworkspace.reachable_t_connected();
        assert!(
            tcon.ok,
            "criterion 6 FAIL: C-workspace of {:?} not t-connected: {tcon:?}",
            r.kind
        );
    }
    println!(
        "criterion 6 PASS: 10^4 interior samples inside [1/3, 3] with zero violations and \
         t-connected Cartesian workspaces for both designs"
    );
}

#[test]
fn c7_comparative_table() {
    let (big, orth) = canonical_designs();
    let rb = &big.result;
    let ro = &orth.result;
    assert!(
        rb.l0 > ro.l0
            && rb.strut_length > ro.strut_length
            && rb.delta_rho > ro.delta_rho
            && rb.envelope_area > ro.envelope_area,
        "criterion 7 FAIL: Biglide not strictly larger on all four parameters"
    );
    let ratio = rb.envelope_area / ro.envelope_area;
    assert!(
        ratio >= 2.0,
        "criterion 7 FAIL: envelope ratio {ratio} below 2"
    );
    let table = compare_designs(&[rb.clone(), ro.clone()]).unwrap();
    let text = table.to_text();
    for needle in [
        "5.95", "3.05", "1.67", "16.45", "2.08", "1.06", "1.18", "3.91", "deviation",
    ] {
        assert!(
            text.contains(needle),
            "criterion 7 FAIL: report missing `{needle}`:\n{text}"
        );
    }
    println!(
        "criterion 7 PASS: Biglide strictly larger on L0/L/delta_rho/envelope, envelope ratio \
         {ratio:.2} >= 2, reference rows and deviations printed"
    );
}

#[test]
fn c8_scale_invariance() {
    let opts = DesignOptions::default();
    let bounds = VafBounds::default();
    let (big1, orth1) = canonical_designs();
    for (kind, d1) in [
        (MechanismKind::Biglide, &big1.result),
        (MechanismKind::Orthoglide2D, &orth1.result),
    ] {
        let d2 = design_mechanism(kind, &bounds, 2.0, &opts).unwrap().result;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-30);
        assert!(rel(2.0 * d1.l0, d2.l0) <= 1e-6, "criterion 8 FAIL: L0");
        assert!(
            rel(2.0 * d1.strut_length, d2.strut_length) <= 1e-6,
            "criterion 8 FAIL: L"
        );
        assert!(
            rel(2.0 * d1.delta_rho, d2.delta_rho) <= 1e-6,
            "criterion 8 FAIL: delta_rho"
        );
        assert!(
            rel(4.0 * d1.envelope_area, d2.envelope_area) <= 1e-6,
            "criterion 8 FAIL: envelope"
        );
        assert!(
            rel(2.0 * d1.workspace.side, d2.workspace.side) <= 1e-6,
            "criterion 8 FAIL: side"
        );
        for i in 0..2 {
            assert!(
                rel(2.0 * d1.joint_ranges[i].lo, d2.joint_ranges[i].lo) <= 1e-6
                    && rel(2.0 * d1.joint_ranges[i].hi, d2.joint_ranges[i].hi) <= 1e-6,
                "criterion 8 FAIL: joint range {i}"
            );
        }
    }
    println!(
        "criterion 8 PASS: designing at 1 m and scaling by 2 equals designing at 2 m within \
         1e-6 relative on all design fields"
    );
}

#[test]
fn c9_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let run_compare = |out: &std::path::Path| {
        let code = pkm_cli::run([
            "pkm",
            "compare",
            "--bounds",
            "0.3333333333333333",
            "3",
            "--target-side",
            "1.0",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "criterion 9 FAIL: compare exited nonzero");
    };
    run_compare(&out_a);
    run_compare(&out_b);
    let mut names: Vec<String> = std::fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(
        names.contains(&"compare.csv".to_string())
            && names.contains(&"compare.txt".to_string())
            && names.contains(&"design_biglide.json".to_string())
            && names.contains(&"design_orthoglide2.json".to_string())
            && names.iter().any(|n| n.ends_with(".svg")),
        "criterion 9 FAIL: missing outputs: {names:?}"
    );
    for name in &names {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "criterion 9 FAIL: {name} differs between runs");
    }
    println!(
        "criterion 9 PASS: two `compare` runs produced byte-identical {} output files \
         (JSON/CSV/TXT/SVG)",
        names.len()
    );
}
