//! The adversarial contexts and how the implemented mechanisms fare on them.

use knightian::dominance::{FiniteMechanism, UdedMode};
use knightian::mechanisms::{Mechanism, TieRule};
use knightian::welfare::{context_ratio, theorem1_construction, theorem35_construction_with, YRounding};
use knightian::Rational;

fn main() -> knightian::Result<()> {
    let (n, bound, delta) = (2, 10, Rational::frac(1, 2));
    let t1 = theorem1_construction(n, bound, &delta)?;
    println!("truthful-mechanism bound: c = {}, K̂ = {:?}, cap {}", t1.c, t1.k_hat.iter().map(|k| k.to_string()).collect::<Vec<_>>(), t1.bound);

    let sp = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::Lexicographic), n, bound, 1 << 20)?;
    for rounding in [YRounding::Floor, YRounding::Ceil] {
        let t = theorem35_construction_with(n, bound, &delta, rounding)?;
        let ks: Vec<String> = t.context.k.iter().map(|k| k.to_string()).collect();
        let mut worst = None::<Rational>;
        for j in 0..n {
            let r = context_ratio(&sp, &t.context_at(j)?, UdedMode::DmBox(2))?.ratio;
            worst = Some(worst.map_or(r.clone(), |w| w.min(r)));
        }
        println!(
            "{rounding:?}: x = {}, y = {}, K = {ks:?}, θ = {:?}, shared {:?}, second price ratio {}",
            t.x,
            t.y,
            t.context.theta,
            t.shared_values,
            worst.expect("n ≥ 1")
        );
    }
    Ok(())
}
