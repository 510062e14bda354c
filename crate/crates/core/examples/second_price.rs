//! Second price under both tie rules.

use knightian::mechanisms::{bids, second_price, SecondPriceResult, TieRule};

fn main() {
    for v in [vec![7, 3, 5], vec![5, 5, 2]] {
        for tie in [TieRule::Lexicographic, TieRule::UniformRandom] {
            match second_price(&bids(&v), tie) {
                SecondPriceResult::Deterministic(o) => {
                    let winner = o.winner.map_or("nobody".to_string(), |w| format!("player {}", w + 1));
                    println!("{v:?} {tie:?}: {winner} wins, prices {:?}", o.prices.iter().map(|p| p.to_string()).collect::<Vec<_>>());
                }
                SecondPriceResult::Randomized { alloc, expected_prices } => {
                    let probs: Vec<String> = alloc.probs().iter().map(|p| p.to_string()).collect();
                    let prices: Vec<String> = expected_prices.iter().map(|p| p.to_string()).collect();
                    println!("{v:?} {tie:?}: win probabilities {probs:?}, expected prices {prices:?}");
                }
            }
        }
    }
}
