use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::{seed_averages, SeedAverage, SweepParam};
use super::table::{check_header, read_csv, read_records};
use super::{RegKind, TrialRecord};
use crate::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

/// Columns that can be drawn as series, with their stroke patterns.
const SERIES: [(&str, &str); 5] = [
    ("sim_error", "6,4"),
    ("pred_error", ""),
    ("approx_error", "2,3"),
    ("onebit_error", "8,3,2,3"),
    ("sparsified_error", "1,5"),
];
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub out_dir: PathBuf,
    /// x-axis parameter; inferred from the records when unset.
    pub param: Option<SweepParam>,
    pub columns: Vec<String>,
}

impl PlotSpec {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            param: None,
            columns: ["sim_error", "pred_error", "approx_error", "onebit_error"].map(String::from).to_vec(),
        }
    }
}

/// Renders one SVG per regularizer in `csv`, plotting seed averages of
/// the requested columns against the swept parameter. Returns the files
/// written, named `<regularizer>_<param>.svg`.
pub fn emit_plots(csv: impl AsRef<Path>, spec: &PlotSpec) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(csv.as_ref())?;
    let (header, _) = read_csv(text.as_bytes())?;
    check_header(&header)?;
    let records = read_records(text.as_bytes())?;
    if records.is_empty() {
        return Err(Error::invalid(format!("{} has no rows to plot", csv.as_ref().display())));
    }
    let styles = spec
        .columns
        .iter()
        .map(|c| {
            SERIES
                .iter()
                .position(|(name, _)| name == c)
                .ok_or_else(|| Error::Parse(format!("unknown column `{c}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut regs: Vec<RegKind> = records.iter().map(|r| r.regularizer).collect();
    regs.sort();
    regs.dedup();
    let mut written = Vec::new();
    for reg in regs {
        let rows: Vec<TrialRecord> = records.iter().filter(|r| r.regularizer == reg).cloned().collect();
        let param = match spec.param {
            Some(p) => p,
            None => infer_param(&rows)?,
        };
        let svg = render(reg, param, &seed_averages(&rows, param), &styles);
        let path = spec.out_dir.join(format!("{reg}_{param}.svg"));
        fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn infer_param(rows: &[TrialRecord]) -> Result<SweepParam> {
    let varying: Vec<SweepParam> = SweepParam::ALL
        .into_iter()
        .filter(|p| rows.iter().any(|r| p.value_of(r) != p.value_of(&rows[0])))
        .collect();
    match varying[..] {
        [] => Ok(SweepParam::Lambda),
        [p] => Ok(p),
        _ => Err(Error::invalid(format!(
            "several parameters vary ({}); choose one",
            varying.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn column(avg: &SeedAverage, idx: usize) -> Option<f64> {
    let v = match idx {
        0 => Some(avg.sim_error),
        1 => Some(avg.pred_error),
        2 => avg.approx_error,
        3 => Some(avg.onebit_error),
        _ => avg.sparsified_error,
    };
    v.filter(|v| v.is_finite())
}

/// Affine map of `v` from `[lo, hi]` onto `[a, b]`, in log coordinates when `log`.
pub(crate) fn axis(v: f64, lo: f64, hi: f64, log: bool, a: f64, b: f64) -> f64 {
    let t = |x: f64| if log { x.log10() } else { x };
    let (lo, hi, v) = (t(lo), t(hi), t(v));
    if hi > lo {
        a + (b - a) * (v - lo) / (hi - lo)
    } else {
        (a + b) / 2.0
    }
}

fn nice_ceiling(v: f64) -> f64 {
    if !(v > 0.0) {
        return 0.5;
    }
    let p = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * p).find(|&c| c >= v).unwrap_or(10.0 * p)
}

fn render(reg: RegKind, param: SweepParam, avgs: &[SeedAverage], styles: &[usize]) -> String {
    let mut pts: Vec<&SeedAverage> = avgs.iter().collect();
    pts.sort_by(|a, b| a.value.total_cmp(&b.value));
    let xs: Vec<f64> = pts.iter().map(|a| a.value).collect();
    let log = param == SweepParam::Lambda && xs.iter().all(|&x| x > 0.0);
    let (xlo, xhi) = (xs[0], xs[xs.len() - 1]);
    let ymax = nice_ceiling(
        pts.iter().flat_map(|a| styles.iter().filter_map(|&s| column(a, s))).fold(0.0, f64::max),
    );
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let px = |v: f64| axis(v, xlo, xhi, log, x0, x1);
    let py = |v: f64| axis(v, 0.0, ymax, false, y0, y1);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{reg}</text>"#, (x0 + x1) / 2.0);
    let _ = writeln!(s, r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#);
    for k in 0..=5 {
        let v = ymax * k as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 7.0, y + 4.0, fmt_tick(v));
    }
    let ticks: Vec<f64> = if log {
        let (a, b) = (xlo.log10().floor() as i32, xhi.log10().ceil() as i32);
        (a..=b).map(|e| 10f64.powi(e)).filter(|&t| t >= xlo * (1.0 - 1e-9) && t <= xhi * (1.0 + 1e-9)).collect()
    } else {
        xs.clone()
    };
    for t in ticks {
        let x = px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 4.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 18.0, fmt_tick(t));
    }
    let xlabel = if log { format!("{param} (log scale)") } else { param.to_string() };
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, (x0 + x1) / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">error</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let mut legend_row = 0;
    for &idx in styles {
        let (name, dash) = SERIES[idx];
        let color = COLORS[idx];
        let line: Vec<(f64, f64)> = pts.iter().filter_map(|a| column(a, idx).map(|v| (px(a.value), py(v)))).collect();
        if line.is_empty() {
            continue;
        }
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        let coords: Vec<String> = line.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
            coords.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * legend_row as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
            lx + 30.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{name}</text>"#, lx + 36.0, ly + 4.0);
        legend_row += 1;
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let t = format!("{v:.3}");
        t.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}
