//! CSV traces, key=value summaries and SVG regret plots. Every file is
//! written to a temporary sibling first and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::AggregateResult;

/// `%.6g`-style formatting: six significant digits, trailing zeros
/// stripped, exponent form outside `[1e-4, 1e6)`.
pub fn fmt_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    strip_zeros(&format!("{x:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Output(format!("{} is not a file path", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(Error::from)
}

pub fn csv_text(r: &AggregateResult) -> String {
    let mut s = String::with_capacity(r.mean.len() * 32);
    s.push_str("t,mean_regret,std_regret");
    if r.theory.is_some() {
        s.push_str(",theory_bound");
    }
    s.push('\n');
    for i in 0..r.mean.len() {
        let _ = write!(s, "{},{},{}", i + 1, fmt_g6(r.mean[i]), fmt_g6(r.std[i]));
        if let Some(th) = &r.theory {
            let _ = write!(s, ",{}", fmt_g6(th[i]));
        }
        s.push('\n');
    }
    s
}

pub fn emit_csv(r: &AggregateResult, path: &Path) -> Result<()> {
    write_atomic(path, csv_text(r).as_bytes())
}

/// `key=value` lines; with several results every key is prefixed by the
/// result label.
pub fn summary_text(results: &[AggregateResult], extra: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in extra {
        let _ = writeln!(s, "{k}={v}");
    }
    let multi = results.len() > 1;
    for r in results {
        let p = if multi { format!("{}.", slug(&r.label)) } else { String::new() };
        if !multi {
            let _ = writeln!(s, "label={}", r.label);
        }
        let _ = writeln!(s, "{p}reps={}", r.reps);
        let _ = writeln!(s, "{p}T={}", r.horizon());
        let _ = writeln!(s, "{p}final_mean_regret={}", fmt_g6(r.final_mean()));
        let _ = writeln!(s, "{p}final_std_regret={}", fmt_g6(r.final_std()));
        let se = r.final_std() / (r.reps as f64).sqrt();
        let _ = writeln!(s, "{p}final_se_regret={}", fmt_g6(se));
        if let Some(th) = &r.theory {
            let _ = writeln!(s, "{p}final_theory_bound={}", fmt_g6(*th.last().unwrap_or(&0.0)));
        }
    }
    s
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Rounds a positive span to 1, 2 or 5 times a power of ten.
fn nice_step(span: f64, ticks: usize) -> f64 {
    let raw = span / ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Self-contained SVG: one curve with a shaded +-1 std band per result,
/// dashed theory curves when present, axis labels and a legend in input
/// order.
pub fn svg_text(results: &[AggregateResult]) -> Result<String> {
    let first = results.first().ok_or_else(|| Error::Output("nothing to plot".into()))?;
    let horizon = first.mean.len();
    if horizon == 0 {
        return Err(Error::Output("empty regret curve".into()));
    }
    if let Some(r) = results.iter().find(|r| r.mean.len() != horizon || r.std.len() != horizon) {
        return Err(Error::Output(format!(
            "horizon mismatch: `{}` has {} rounds, `{}` has {horizon}",
            r.label,
            r.mean.len(),
            first.label
        )));
    }
    let (w, h) = (860.0, 520.0);
    let (left, right, top, bottom) = (80.0, 20.0, 20.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let mut ymax = results
        .iter()
        .flat_map(|r| r.mean.iter().zip(&r.std).map(|(m, s)| m + s))
        .fold(0.0f64, f64::max);
    let with_theory = results.iter().any(|r| r.theory.is_some());
    if ymax <= 0.0 {
        ymax = 1.0;
    }
    let ystep = nice_step(ymax, 5);
    let ymax = (ymax / ystep).ceil() * ystep;
    let xmax = horizon as f64;
    let sx = |t: f64| left + pw * t / xmax;
    let sy = |y: f64| top + ph * (1.0 - y.clamp(0.0, ymax) / ymax);
    // At most ~800 vertices per curve.
    let stride = horizon.div_ceil(800).max(1);
    let mut idx: Vec<usize> = (0..horizon).step_by(stride).collect();
    if idx.last() != Some(&(horizon - 1)) {
        idx.push(horizon - 1);
    }

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r##"<g stroke="#ccc" stroke-width="1">"##);
    let mut y = 0.0;
    while y <= ymax + ystep * 1e-9 {
        let _ = writeln!(s, r#"<line x1="{left}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, sy(y), left + pw, sy(y));
        y += ystep;
    }
    s.push_str("</g>\n");
    let xstep = nice_step(xmax, 8);
    let _ = writeln!(s, r#"<g text-anchor="middle">"#);
    let mut x = 0.0;
    while x <= xmax + 1e-9 {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, sx(x), top + ph + 18.0, fmt_g6(x));
        x += xstep;
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, r#"<g text-anchor="end">"#);
    let mut y = 0.0;
    while y <= ymax + ystep * 1e-9 {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, left - 6.0, sy(y) + 4.0, fmt_g6(y));
        y += ystep;
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">round t</text>"#,
        left + pw / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">cumulative group regret</text>"#,
        top + ph / 2.0
    );

    for (ci, r) in results.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let mut band = String::new();
        for &i in &idx {
            let _ = write!(band, "{:.2},{:.2} ", sx(i as f64 + 1.0), sy(r.mean[i] + r.std[i]));
        }
        for &i in idx.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx(i as f64 + 1.0), sy(r.mean[i] - r.std[i]));
        }
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band.trim_end());
        let line: Vec<String> =
            idx.iter().map(|&i| format!("{:.2},{:.2}", sx(i as f64 + 1.0), sy(r.mean[i]))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        if let Some(th) = &r.theory {
            // Only the part of the bound inside the plotted range is drawn.
            let mut seg: Vec<String> = Vec::new();
            for &i in idx.iter().chain(std::iter::once(&usize::MAX)) {
                if i != usize::MAX && th[i] <= ymax {
                    seg.push(format!("{:.2},{:.2}", sx(i as f64 + 1.0), sy(th[i])));
                    continue;
                }
                if seg.len() > 1 {
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
                        seg.join(" ")
                    );
                }
                seg.clear();
            }
        }
    }

    let lx = left + 12.0;
    let mut ly = top + 16.0;
    for (ci, r) in results.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="3"/>"#,
            ly - 4.0,
            lx + 22.0,
            ly - 4.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 28.0, esc(&r.label));
        ly += 16.0;
    }
    if with_theory {
        let _ = writeln!(
            s,
            r##"<line x1="{lx}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#333" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            ly - 4.0,
            lx + 22.0,
            ly - 4.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">regret bound</text>"#, lx + 28.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_plot(results: &[AggregateResult], path: &Path) -> Result<()> {
    write_atomic(path, svg_text(results)?.as_bytes())
}

/// Files written for one command.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputBundle {
    pub traces: Vec<PathBuf>,
    pub summary: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Directory-safe form of a label.
pub fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_' | '=') { c } else { '_' })
        .collect();
    if s.is_empty() {
        "run".into()
    } else {
        s
    }
}

/// Writes traces (CSV first), summaries and optionally the plot. A single
/// result goes straight into `dir`; several results get one subdirectory
/// per label plus a combined summary and plot at the top.
pub fn write_bundle(
    dir: &Path,
    results: &[AggregateResult],
    extra: &[(String, String)],
    plot: bool,
) -> Result<OutputBundle> {
    if results.is_empty() {
        return Err(Error::Output("no results to write".into()));
    }
    let mut bundle = OutputBundle::default();
    if let [r] = results {
        let p = dir.join("traces.csv");
        emit_csv(r, &p)?;
        bundle.traces.push(p);
    } else {
        let mut seen = std::collections::HashSet::new();
        for r in results {
            let name = slug(&r.label);
            if !seen.insert(name.clone()) {
                return Err(Error::Output(format!("duplicate label `{}`", r.label)));
            }
            let sub = dir.join(&name);
            let p = sub.join("traces.csv");
            emit_csv(r, &p)?;
            write_atomic(&sub.join("summary.txt"), summary_text(std::slice::from_ref(r), &[]).as_bytes())?;
            bundle.traces.push(p);
        }
    }
    bundle.summary = dir.join("summary.txt");
    write_atomic(&bundle.summary, summary_text(results, extra).as_bytes())?;
    if plot {
        let p = dir.join("plot.svg");
        emit_svg_plot(results, &p)?;
        bundle.plot = Some(p);
    }
    Ok(bundle)
}
