//! Writes the three bound curves for two and four players to CSV and SVG.

use std::fs::File;

use knightian::welfare::{sweep_rows, write_csv, write_svg};
use knightian::Rational;

fn main() -> knightian::Result<()> {
    let deltas: Vec<Rational> = (1..100).map(|k| Rational::frac(k, 100)).collect();
    let rows = sweep_rows(&[2, 4], &deltas)?;
    let dir = std::env::temp_dir();
    let (csv, svg) = (dir.join("bound_curves.csv"), dir.join("bound_curves.svg"));
    let open = |p: &std::path::Path| File::create(p).map_err(|e| knightian::Error::Domain(format!("{}: {e}", p.display())));
    write_csv(&rows, open(&csv)?)?;
    write_svg(&rows, open(&svg)?)?;
    println!("{} rows written to {} and {}", rows.len(), csv.display(), svg.display());
    Ok(())
}
