//! Artifact emission: CSV field dumps, frame and point-cloud tables,
//! Wavefront meshes, audit tables, and report rendering. All writes are
//! atomic (temp file + rename) so partial artifacts never appear.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::field::{AmbientField, ScalarField};
use crate::frame::Frame;
use crate::pde::WenteAudit;
use crate::surface::Immersion;
use crate::theorems::CheckReport;

/// Writes `contents` to `path` atomically: a temp file in the same
/// directory is populated first, then renamed over the target.
pub fn atomic_write(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile_in(dir)?;
    tmp.1.write_all(contents.as_bytes())?;
    tmp.1.sync_all()?;
    drop(tmp.1);
    fs::rename(&tmp.0, path)
}

fn tempfile_in(dir: &Path) -> std::io::Result<(std::path::PathBuf, fs::File)> {
    for attempt in 0..64 {
        let name = format!(
            ".tmp-{}-{attempt}",
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.subsec_nanos())
                .unwrap_or(0)
        );
        let candidate = dir.join(name);
        match fs::OpenOptions::new().write(true).create_new(true).open(&candidate) {
            Ok(f) => return Ok((candidate, f)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    Err(std::io::Error::new(
        std::io::ErrorKind::AlreadyExists,
        "could not create temp file",
    ))
}

fn push_f64(out: &mut String, v: f64) {
    // 17 significant digits: round-trips every f64
    let _ = write!(out, "{v:.16e}");
}

/// `s,theta,value` rows, row-major with s outermost.
pub fn scalar_csv(field: &ScalarField) -> String {
    let g = field.grid;
    let mut out = String::from("s,theta,value\n");
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            push_f64(&mut out, g.s(i));
            out.push(',');
            push_f64(&mut out, g.theta(j));
            out.push(',');
            push_f64(&mut out, field.at(i, j));
            out.push('\n');
        }
    }
    out
}

/// `s,theta,x1..xn` rows sampling an ambient field.
pub fn points_csv(field: &AmbientField) -> String {
    let g = field.grid;
    let mut out = String::from("s,theta");
    for c in 0..field.dim {
        let _ = write!(out, ",x{}", c + 1);
    }
    out.push('\n');
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            push_f64(&mut out, g.s(i));
            out.push(',');
            push_f64(&mut out, g.theta(j));
            for v in field.at(i, j) {
                out.push(',');
                push_f64(&mut out, *v);
            }
            out.push('\n');
        }
    }
    out
}

/// `s,theta,e1_1..e1_n,e2_1..e2_n` rows for a frame.
pub fn frame_csv(frame: &Frame) -> String {
    let g = frame.e1.grid;
    let n = frame.e1.dim;
    let mut out = String::from("s,theta");
    for c in 0..n {
        let _ = write!(out, ",e1_{}", c + 1);
    }
    for c in 0..n {
        let _ = write!(out, ",e2_{}", c + 1);
    }
    out.push('\n');
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            push_f64(&mut out, g.s(i));
            out.push(',');
            push_f64(&mut out, g.theta(j));
            for v in frame.e1.at(i, j).iter().chain(frame.e2.at(i, j)) {
                out.push(',');
                push_f64(&mut out, *v);
            }
            out.push('\n');
        }
    }
    out
}

/// Wavefront-style quad mesh of the immersed annulus (first three ambient
/// coordinates; theta wraps, s does not).
pub fn mesh_obj(imm: &Immersion) -> String {
    let g = imm.grid;
    let mut out = String::new();
    let _ = writeln!(out, "# {} on {}x{} grid", imm.name, g.n_s, g.n_theta);
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            let p = imm.f.at(i, j);
            let z = if imm.dim > 2 { p[2] } else { 0.0 };
            let _ = writeln!(out, "v {:.9} {:.9} {:.9}", p[0], p[1], z);
        }
    }
    let node = |i: usize, j: usize| i * g.n_theta + (j % g.n_theta) + 1;
    for i in 0..g.n_s - 1 {
        for j in 0..g.n_theta {
            let _ = writeln!(
                out,
                "f {} {} {} {}",
                node(i, j),
                node(i, j + 1),
                node(i + 1, j + 1),
                node(i + 1, j)
            );
        }
    }
    out
}

/// `sample,seed,sup_ratio,grad_ratio,bound_inf,bound_l2` audit table.
pub fn audit_csv(audit: &WenteAudit) -> String {
    let mut out = String::from("sample,seed,sup_ratio,grad_ratio,bound_inf,bound_l2\n");
    for row in &audit.rows {
        let _ = write!(out, "{},{},", row.sample, row.seed);
        push_f64(&mut out, row.sup_ratio);
        out.push(',');
        push_f64(&mut out, row.grad_ratio);
        out.push(',');
        push_f64(&mut out, row.bound_inf);
        out.push(',');
        push_f64(&mut out, row.bound_l2);
        out.push('\n');
    }
    out
}

/// JSON rendering with stable key order (maps are ordered).
pub fn report_json(report: &CheckReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Human-readable table of one report.
pub fn render_report(report: &CheckReport) -> String {
    let mut out = String::new();
    let verdict = if report.not_applicable {
        "not-applicable"
    } else if report.passed {
        "pass"
    } else {
        "FAIL"
    };
    let g = report.grid;
    let _ = writeln!(
        out,
        "{}  [{}]  grid {}x{}  tol {:.3e}",
        report.name, verdict, g.n_s, g.n_theta, report.tolerance
    );
    if !report.hypotheses.is_empty() {
        let _ = writeln!(out, "  hypotheses:");
        for h in &report.hypotheses {
            let _ = writeln!(
                out,
                "    [{}] {}  ({:.6e} vs {:.6e})",
                if h.satisfied { "ok" } else { "--" },
                h.description,
                h.measured,
                h.threshold
            );
        }
    }
    if !report.quantities.is_empty() {
        let _ = writeln!(out, "  quantities:");
        for (k, v) in &report.quantities {
            let _ = writeln!(out, "    {k:<24} {v:.10e}");
        }
    }
    if !report.residuals.is_empty() {
        let _ = writeln!(out, "  residuals:");
        for (k, v) in &report.residuals {
            let flag = if *v <= report.tolerance { " " } else { "!" };
            let _ = writeln!(out, "   {flag}{k:<24} {v:.10e}");
        }
    }
    out
}

/// One `surface,check,passed,na,margin,tolerance,grid` row.
pub fn batch_csv_row(surface: &str, report: &CheckReport) -> String {
    let g = report.grid;
    format!(
        "{},{},{},{},{},{:.6e},{}x{}\n",
        surface,
        report.name,
        report.passed,
        report.not_applicable,
        if report.margin().is_nan() {
            "nan".to_string()
        } else {
            format!("{:.6e}", report.margin())
        },
        report.tolerance,
        g.n_s,
        g.n_theta
    )
}

/// Header plus one row per report.
pub fn batch_csv(rows: &[(String, CheckReport)]) -> String {
    let mut out = String::from("surface,check,passed,na,margin,tolerance,grid\n");
    for (surface, report) in rows {
        out.push_str(&batch_csv_row(surface, report));
    }
    out
}
