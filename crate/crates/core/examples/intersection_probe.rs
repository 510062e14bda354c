//! Mixtures over two undominated sets that are indistinguishable to every opponent.

use knightian::dominance::{intersection_probe, FiniteMechanism};
use knightian::mechanisms::{Mechanism, TieRule};
use knightian::CandidateSet;

fn main() -> knightian::Result<()> {
    let m = FiniteMechanism::tabulate(&Mechanism::SecondPrice(TieRule::Lexicographic), 2, 10, 1 << 20)?;
    let (k, k2) = (CandidateSet::interval(3, 5)?, CandidateSet::interval(4, 6)?);
    let rep = intersection_probe(&m, 0, &k, &k2)?;
    println!("UDed({k}) = {:?}, UDed({k2}) = {:?}", rep.uded, rep.uded_prime);
    println!("ε* = {}", rep.epsilon);
    println!("σ  = {:?}", rep.sigma.weights());
    println!("σ' = {:?}", rep.sigma_prime.weights());
    Ok(())
}
