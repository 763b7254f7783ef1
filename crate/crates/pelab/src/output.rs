//! Report files: JSON, CSV tables and SVG plots, each written atomically.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use pelab_core::linalg::norm2;
use pelab_core::probe::SettlingRun;
use pelab_core::Trajectory;
use serde::Serialize;

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// 17 significant digits, enough to round-trip any double.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(w.into_inner()?)
}

/// `t,x1,…,xn`, one row per grid node.
pub fn trajectory_csv(tr: &Trajectory) -> Result<Vec<u8>> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=tr.dim()).map(|i| format!("x{i}")));
    csv_bytes(
        &header,
        (0..tr.len()).map(|i| std::iter::once(num(tr.time(i))).chain(tr.state(i).iter().map(|v| num(*v))).collect()),
    )
}

/// `t0,direction_index,T`.
pub fn settling_csv(runs: &[SettlingRun]) -> Result<Vec<u8>> {
    let header = ["t0", "direction_index", "T"].map(String::from);
    csv_bytes(
        &header,
        runs.iter().map(|r| vec![num(r.t0), r.direction.to_string(), num(r.settling)]),
    )
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const MARGIN: f64 = 60.0;
const FLOOR: f64 = 1e-16;
const MAX_POINTS: usize = 2000;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// `‖x(t)‖` against `t` on a log axis, one polyline per trajectory.
///
/// Norms below `1e-16` (including exact zeros) sit on the bottom decade.
pub fn norm_plot_svg(title: &str, trajs: &[(String, &Trajectory)]) -> String {
    let series: Vec<Vec<(f64, f64)>> = trajs
        .iter()
        .map(|(_, tr)| {
            let thin = tr.len().div_ceil(MAX_POINTS).max(1);
            let mut pts: Vec<(f64, f64)> = (0..tr.len())
                .step_by(thin)
                .map(|i| (tr.time(i), norm2(tr.state(i)).max(FLOOR)))
                .collect();
            if tr.len() > 0 && (tr.len() - 1) % thin != 0 {
                pts.push((tr.final_time(), norm2(tr.final_state()).max(FLOOR)));
            }
            pts
        })
        .collect();
    let all = series.iter().flatten();
    let (mut t_lo, mut t_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(t, y) in all {
        t_lo = t_lo.min(t);
        t_hi = t_hi.max(t);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !t_lo.is_finite() {
        (t_lo, t_hi, y_lo, y_hi) = (0.0, 1.0, 1.0, 1.0);
    }
    if t_hi <= t_lo {
        t_hi = t_lo + 1.0;
    }
    let d_lo = y_lo.log10().floor() as i32;
    let mut d_hi = y_hi.log10().ceil() as i32;
    if d_hi <= d_lo {
        d_hi = d_lo + 1;
    }
    let px = |t: f64| MARGIN + (t - t_lo) / (t_hi - t_lo) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y.log10() - d_lo as f64) / (d_hi - d_lo) as f64 * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let step = ((d_hi - d_lo) as usize).div_ceil(12).max(1);
    for d in (d_lo..=d_hi).step_by(step) {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            W - MARGIN,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.2}">{}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text><text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        H - MARGIN + 18.0,
        trim(t_lo),
        W - MARGIN,
        H - MARGIN + 18.0,
        trim(t_hi),
        W / 2.0,
        H - MARGIN + 36.0
    );
    for (k, (pts, (label, _))) in series.iter().zip(trajs).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut poly = String::new();
        for &(t, y) in pts {
            let _ = write!(poly, "{:.2},{:.2} ", px(t), py(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
            poly.trim_end(),
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn trim(v: f64) -> String {
    format!("{v:.6}").trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
