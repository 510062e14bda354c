//! Auditing direct mechanisms that ask players to report their candidate sets.

use knightian::welfare::{direct_mechanism, theorem1_audit, DirectKind};
use knightian::{Error, Rational};

fn main() -> knightian::Result<()> {
    let delta = Rational::frac(1, 2);
    let naive = direct_mechanism(DirectKind::NaiveUniform, 2, 10, &delta, 1 << 20)?;
    let rep = theorem1_audit(&naive)?;
    println!("uniform: truthful {}, invariance {}, ratio {} ≤ {}: {}", rep.truthful, rep.claim1_holds, rep.ratio, rep.bound, rep.passes);

    let midpoint = direct_mechanism(DirectKind::MidpointSecondPrice, 2, 8, &delta, 1 << 20)?;
    match theorem1_audit(&midpoint) {
        Err(Error::NotTruthful(w)) => println!("midpoint second price rejected: {w}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
