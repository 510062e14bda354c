//! Exact prices of the optimal mechanism, including logarithmic terms.

use knightian::mechanisms::{price_opt, PriceKind};
use knightian::Rational;

fn main() -> knightian::Result<()> {
    let delta = Rational::frac(1, 3);
    for v in [vec![10, 2], vec![9, 8, 1], vec![6, 6]] {
        let z: Vec<Rational> = v.iter().map(|&x| Rational::int(x)).collect();
        for i in 0..v.len() {
            let expected = price_opt(i, &z, &delta, PriceKind::Expected)?;
            let per_win = match price_opt(i, &z, &delta, PriceKind::Conditional) {
                Ok(p) => format!("{p} ≈ {:.6}", p.to_f64()),
                Err(e) => e.to_string(),
            };
            println!("{v:?} player {}: expected {expected} ≈ {:.6}; if winning {per_win}", i + 1, expected.to_f64());
        }
    }
    Ok(())
}
