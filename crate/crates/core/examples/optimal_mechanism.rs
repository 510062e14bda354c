//! The optimal allocation rule: threshold, candidate winners and probabilities.

use knightian::mechanisms::{candidate_winner_count, d_delta, f_delta, piecewise_profile};
use knightian::Rational;

fn main() -> knightian::Result<()> {
    let delta = Rational::frac(1, 3);
    let d = d_delta(&delta)?;
    println!("δ = {delta}, D = {d}");
    for v in [vec![10, 2], vec![9, 8, 1], vec![4, 4, 4], vec![0, 0]] {
        let z: Vec<Rational> = v.iter().map(|&x| Rational::int(x)).collect();
        let mut sorted = z.clone();
        sorted.sort_by(|a, b| b.cmp(a));
        let f = f_delta(&z, &delta)?;
        let probs: Vec<String> = f.probs().iter().map(|p| p.to_string()).collect();
        match candidate_winner_count(&sorted, &d) {
            Ok((k, t)) => println!("{v:?}: {k} candidate winner(s) above threshold {t}, probabilities {probs:?}"),
            Err(e) => println!("{v:?}: {e}, probabilities {probs:?}"),
        }
    }
    // player 1's probability as a function of its own bid against (8, 1)
    let profile = piecewise_profile(&[Rational::int(8), Rational::int(1)], &delta, &Rational::int(20))?;
    for k in 0..profile.pieces.len() {
        let (lo, hi) = profile.span(k);
        let (a, b) = &profile.pieces[k];
        let tail = if b.is_negative() { format!(" - {}/z", b.abs()) } else if b.is_zero() { String::new() } else { format!(" + {b}/z") };
        println!("  on [{lo}, {hi}]: {a}{tail}");
    }
    Ok(())
}
