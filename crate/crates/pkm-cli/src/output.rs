//! Report emitters and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use pkm_core::kinetostatics::IsotropyLocus;
use pkm_core::sizing::DesignResult;
use pkm_core::workspace::{BoundKind, CenterSideMap};

/// Writes via a temp file in the same directory, then renames into
/// place, so readers never observe partial files.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = PathBuf::from(path);
    let mut name = tmp
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    tmp.set_file_name(name);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

pub fn locus_csv(locus: &IsotropyLocus) -> String {
    let mut out = String::from("x (m),y (m),vaf (dimensionless)\n");
    for (p, v) in locus.points.iter().zip(&locus.vaf_along) {
        out.push_str(&format!("{:.6},{:.6},{:.6}\n", p.x, p.y, v));
    }
    out
}

pub fn center_map_csv(map: &CenterSideMap) -> String {
    let mut out = String::from("along (m),perp (m),x (m),y (m),side (m)\n");
    let n_along = map.along_offsets.len();
    for (j, &v) in map.perp_offsets.iter().enumerate() {
        for (i, &u) in map.along_offsets.iter().enumerate() {
            let idx = j * n_along + i;
            let c = map.centers[idx];
            out.push_str(&format!(
                "{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                u, v, c.x, c.y, map.sides[idx]
            ));
        }
    }
    out
}

pub fn design_json(result: &DesignResult) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("design result serializes");
    s.push('\n');
    s
}

/// Human-readable design summary printed after `design`.
pub fn design_summary(result: &DesignResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "design: {} for a square useful workspace of side {:.6} m (bounds [{:.6}, {:.6}])\n",
        result.kind, result.target_side, result.bounds.lo, result.bounds.hi
    ));
    out.push_str(&format!(
        "  orientation theta = {:.2} deg from the symmetry axis; center = ({:.6}, {:.6}) m\n",
        result.theta_selected.to_degrees(),
        result.workspace.center.x,
        result.workspace.center.y
    ));
    out.push_str(&format!(
        "  L0 = {:.6} m, L = {:.6} m, delta_rho = {:.6} m, envelope = {:.6} m^2\n",
        result.l0, result.strut_length, result.delta_rho, result.envelope_area
    ));
    out.push_str(&format!(
        "  joint 1 in [{:.6}, {:.6}] m, joint 2 in [{:.6}, {:.6}] m\n",
        result.joint_ranges[0].lo,
        result.joint_ranges[0].hi,
        result.joint_ranges[1].lo,
        result.joint_ranges[1].hi
    ));
    out.push_str(&format!(
        "  u/C area ratio = {:.6} (dimensionless); C-workspace t-connected: {}\n",
        result.ratio, result.t_connected
    ));
    if result.bindings.is_empty() {
        out.push_str("  growth limited by reachability/singularities (no VAF bound binding)\n");
    } else {
        for b in &result.bindings {
            out.push_str(&format!(
                "  binding: {} bound, lambda = {:.6} at ({:.6}, {:.6}) m\n",
                match b.bound {
                    BoundKind::Lo => "lower",
                    BoundKind::Hi => "upper",
                },
                b.lambda,
                b.point.x,
                b.point.y
            ));
        }
    }
    out
}
