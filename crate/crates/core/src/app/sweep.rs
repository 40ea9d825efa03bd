//! Pair sweep tables.

use std::io::Write;
use std::path::Path;

use super::analysis::{run_analysis, Report, SweepRow};
use super::spec::SystemSpec;
use crate::error::Result;

const HEADER: &str =
    "pair_index,kind,lam_min_P,lam_max_P,lam_min_Q,lam_max_Q,tm_lower,tm_upper,tn_lower,tn_upper";

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn row(r: &SweepRow) -> String {
    [
        cell(r.pair_index),
        r.kind.clone(),
        cell(r.lam_min_p),
        cell(r.lam_max_p),
        cell(r.lam_min_q),
        cell(r.lam_max_q),
        cell(r.tm_lower),
        cell(r.tm_upper),
        cell(r.tn_lower),
        cell(r.tn_upper),
    ]
    .join(",")
}

/// One line per pair (random first, then ellipsoid pairs), then the solver
/// reference times.
pub fn sweep_csv(report: &Report) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in &report.sweep {
        out.push_str(&row(r));
        out.push('\n');
    }
    out
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(res?)
}

pub fn sweep_pairs_csv(spec: &SystemSpec, out_path: &Path) -> Result<Report> {
    let report = run_analysis(spec)?;
    write_atomic(out_path, sweep_csv(&report).as_bytes())?;
    Ok(report)
}
