//! Dominance relations and undominated sets for a tabulated mechanism.

use knightian::dominance::{dnt, mixed_dominator, uded_with, very_weakly_dominates, FiniteMechanism, MixedStrategy, UdedMode};
use knightian::mechanisms::{Mechanism, TieRule};
use knightian::{CandidateSet, Rational};

fn main() -> knightian::Result<()> {
    let sp = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::Lexicographic), 2, 10, 1 << 20)?;
    let k5 = CandidateSet::singleton(5)?;
    let v = very_weakly_dominates(&sp, 1, &k5, &MixedStrategy::pure(4), 5)?;
    println!("player 2, K = {k5}: does bidding 4 very-weakly dominate 5? {:?}", v.verdict);
    if let Some(sigma) = mixed_dominator(&sp, 0, &k5, 3)? {
        println!("bid 3 is dominated by {:?}", sigma.weights());
    }
    let wide = CandidateSet::interval(3, 7)?;
    println!("dominant bids for K = {wide}: {:?}", dnt(&sp, 0, &wide)?);

    let opt = FiniteMechanism::tabulate(&Mechanism::optimal(Rational::frac(1, 3))?, 2, 10, 1 << 20)?;
    for k in [CandidateSet::interval(3, 5)?, CandidateSet::interval(6, 8)?] {
        let full = uded_with(&sp, 0, &k, UdedMode::Full)?;
        let boxed = uded_with(&opt, 0, &k, UdedMode::DmBox(1))?;
        println!("K = {k}: second price UDed {:?}, optimal UDed {:?}", full.strategies, boxed.strategies);
    }
    Ok(())
}
