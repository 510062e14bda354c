//! Tabulated bound curves as CSV, and a small static SVG chart of them.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::Rational;

use super::{bound_curves, BoundCurves};

const SIG_DIGITS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub delta: Rational,
    pub curves: BoundCurves,
}

/// Every `(n, δ)` pair in the given order, `n` outermost.
pub fn sweep_rows(ns: &[usize], deltas: &[Rational]) -> Result<Vec<SweepRow>> {
    if ns.is_empty() || deltas.is_empty() {
        return Err(domain("sweep needs at least one n and one δ"));
    }
    let mut rows = Vec::with_capacity(ns.len() * deltas.len());
    for &n in ns {
        for d in deltas {
            rows.push(SweepRow {
                n,
                delta: d.clone(),
                curves: bound_curves(n, d)?,
            });
        }
    }
    Ok(rows)
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    n: usize,
    delta: String,
    bound_random: String,
    bound_2p: String,
    bound_opt: String,
    delta_exact: Rational,
    bound_random_exact: Rational,
    bound_2p_exact: Rational,
    bound_opt_exact: Rational,
}

fn csv_error(e: csv::Error) -> Error {
    domain(format!("csv: {e}"))
}

/// Decimal columns at six significant digits followed by exact `p/q` columns.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        let c = &r.curves;
        w.serialize(CsvRow {
            n: r.n,
            delta: r.delta.to_sig_digits(SIG_DIGITS),
            bound_random: c.random.to_sig_digits(SIG_DIGITS),
            bound_2p: c.second_price.to_sig_digits(SIG_DIGITS),
            bound_opt: c.opt.to_sig_digits(SIG_DIGITS),
            delta_exact: r.delta.clone(),
            bound_random_exact: c.random.clone(),
            bound_2p_exact: c.second_price.clone(),
            bound_opt_exact: c.opt.clone(),
        })
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| domain(format!("csv: {e}")))?;
    Ok(())
}

/// Reads rows back from their exact columns.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(csv_error)?;
            Ok(SweepRow {
                n: row.n,
                delta: row.delta_exact,
                curves: BoundCurves {
                    random: row.bound_random_exact,
                    second_price: row.bound_2p_exact,
                    opt: row.bound_opt_exact,
                },
            })
        })
        .collect()
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 50.0;
const SERIES: [(&str, &str); 3] = [
    ("random assignment", "#1b9e77"),
    ("second price", "#d95f02"),
    ("optimal", "#7570b3"),
];

/// One panel per distinct `n`: δ on the horizontal axis, guaranteed welfare
/// fraction on the vertical axis, both over `[0, 1]`.
pub fn write_svg<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(domain("nothing to plot"));
    }
    let width = ns.len() as f64 * (PANEL_W + 2.0 * MARGIN);
    let height = PANEL_H + 2.0 * MARGIN + 40.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, &n) in ns.iter().enumerate() {
        let ox = p as f64 * (PANEL_W + 2.0 * MARGIN) + MARGIN;
        let oy = MARGIN;
        let px = |d: f64| ox + d * PANEL_W;
        let py = |v: f64| oy + (1.0 - v.clamp(0.0, 1.0)) * PANEL_H;
        let _ = writeln!(
            s,
            r#"<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        for t in 0..=4 {
            let f = t as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{f}</text>"#,
                px(f),
                oy + PANEL_H + 16.0
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{f}</text>"#, ox - 6.0, py(f) + 4.0);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">δ  (n = {n})</text>"#,
            px(0.5),
            oy + PANEL_H + 34.0
        );
        let mut pts: Vec<&SweepRow> = rows.iter().filter(|r| r.n == n).collect();
        pts.sort_by(|a, b| a.delta.cmp(&b.delta));
        for (k, (_, color)) in SERIES.iter().enumerate() {
            let coords: Vec<String> = pts
                .iter()
                .map(|r| {
                    let v = match k {
                        0 => &r.curves.random,
                        1 => &r.curves.second_price,
                        _ => &r.curves.opt,
                    };
                    format!("{:.2},{:.2}", px(r.delta.to_f64()), py(v.to_f64()))
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                coords.join(" ")
            );
        }
        for (k, (label, color)) in SERIES.iter().enumerate() {
            let ly = oy + 14.0 + 16.0 * k as f64;
            let lx = ox + PANEL_W - 150.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, lx + 26.0, ly + 4.0);
        }
    }
    s.push_str("</svg>\n");
    out.write_all(s.as_bytes())
        .map_err(|e| domain(format!("svg: {e}")))
}
