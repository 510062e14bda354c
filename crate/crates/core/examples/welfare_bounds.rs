//! Exhaustive welfare checks against the guaranteed curves.

use knightian::dominance::{FiniteMechanism, UdedMode};
use knightian::mechanisms::Mechanism;
use knightian::welfare::{bound_curves, crossover_delta, verify_positive_theorem, worst_case_ratio, PositiveTheorem};
use knightian::Rational;

fn main() -> knightian::Result<()> {
    let delta = Rational::frac(1, 2);
    let c = bound_curves(2, &delta)?;
    println!("n = 2, δ = {delta}: random {}, second price {}, optimal {}", c.random, c.second_price, c.opt);
    if let Some(iv) = crossover_delta(2)? {
        println!("second price falls below random assignment past δ ∈ [{:.6}, {:.6}]", iv.lo.to_f64(), iv.hi.to_f64());
    }
    for th in [PositiveTheorem::SecondPriceLex, PositiveTheorem::SecondPriceRandom, PositiveTheorem::Optimal] {
        let rep = verify_positive_theorem(th, 2, 10, &delta, 1 << 40)?;
        println!("{th:?}: pass = {} over {} (profile, valuation) pairs", rep.pass, rep.checked);
    }
    let opt = FiniteMechanism::tabulate(&Mechanism::optimal(delta.clone())?, 2, 8, 1 << 20)?;
    let rep = worst_case_ratio(&opt, &delta, UdedMode::DmBox(1), 1 << 40)?;
    println!(
        "optimal mechanism, B = 8: worst ratio {} at K = {:?}, θ = {:?}, bids {:?}",
        rep.ratio,
        rep.witness_context.k.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        rep.witness_context.theta,
        rep.witness_profile
    );
    Ok(())
}
