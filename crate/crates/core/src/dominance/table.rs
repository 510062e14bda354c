use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{bids, AllocationRule, Mechanism};
use crate::price_expr::PriceExpression;
use crate::rational::Rational;

/// A mechanism over finite pure-strategy sets, with expected allocations and
/// expected prices tabulated for every pure profile.
///
/// Profiles are indexed in row-major order: the first player's strategy is the
/// most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMechanism {
    id: String,
    strategy_counts: Vec<usize>,
    alloc: Vec<Vec<Rational>>,
    price: Vec<Vec<PriceExpression>>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    #[serde(default)]
    id: String,
    strategy_counts: Vec<usize>,
    #[serde(default)]
    profiles: Option<Vec<Vec<usize>>>,
    alloc: Vec<Vec<Rational>>,
    price: Vec<Vec<PriceExpression>>,
}

/// Number of profiles over the given strategy counts, if it fits.
pub fn profile_count(counts: &[usize]) -> Option<u128> {
    counts
        .iter()
        .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
}

impl FiniteMechanism {
    /// Tabulates a mechanism over bids `{0, …, B}` for `n` players.
    pub fn tabulate(mech: &Mechanism, n: usize, bound: i64, budget: u128) -> Result<Self> {
        if n == 0 || bound < 0 {
            return Err(Error::Domain("need n ≥ 1 and B ≥ 0".into()));
        }
        let counts = vec![bound as usize + 1; n];
        let total = profile_count(&counts).unwrap_or(u128::MAX);
        if total > budget {
            return Err(Error::BudgetExceeded {
                required: total,
                budget,
            });
        }
        let mut alloc = Vec::with_capacity(total as usize);
        let mut price = Vec::with_capacity(total as usize);
        for idx in 0..total as usize {
            let profile = decode(&counts, idx);
            let v = bids(&profile.iter().map(|&s| s as i64).collect::<Vec<_>>());
            alloc.push(mech.allocate(&v).into_probs());
            price.push(mech.expected_prices(&v)?);
        }
        Ok(FiniteMechanism {
            id: mech.id(),
            strategy_counts: counts,
            alloc,
            price,
        })
    }

    /// Builds a mechanism from explicit tables in row-major order.
    pub fn from_tables(
        id: impl Into<String>,
        strategy_counts: Vec<usize>,
        alloc: Vec<Vec<Rational>>,
        price: Vec<Vec<PriceExpression>>,
    ) -> Result<Self> {
        let n = strategy_counts.len();
        if n == 0 || strategy_counts.contains(&0) {
            return Err(Error::InvalidTable("every player needs at least one strategy".into()));
        }
        let total = profile_count(&strategy_counts)
            .ok_or_else(|| Error::InvalidTable("profile space too large".into()))? as usize;
        if alloc.len() != total || price.len() != total {
            return Err(Error::InvalidTable(format!(
                "expected {total} profiles, got {} allocation and {} price rows",
                alloc.len(),
                price.len()
            )));
        }
        for (idx, (a, p)) in alloc.iter().zip(&price).enumerate() {
            if a.len() != n || p.len() != n {
                return Err(Error::InvalidTable(format!("row {idx} does not have {n} entries")));
            }
            crate::context::AllocationVector::new(a.clone())
                .map_err(|e| Error::InvalidTable(format!("row {idx}: {e}")))?;
        }
        Ok(FiniteMechanism {
            id: id.into(),
            strategy_counts,
            alloc,
            price,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn strategies(&self, i: usize) -> usize {
        self.strategy_counts[i]
    }

    pub fn profile_count(&self) -> usize {
        self.alloc.len()
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.strategy_counts)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    pub fn profile(&self, index: usize) -> Vec<usize> {
        decode(&self.strategy_counts, index)
    }

    pub fn alloc(&self, profile: &[usize]) -> &[Rational] {
        &self.alloc[self.index(profile)]
    }

    pub fn prices(&self, profile: &[usize]) -> &[PriceExpression] {
        &self.price[self.index(profile)]
    }

    pub fn alloc_at(&self, index: usize) -> &[Rational] {
        &self.alloc[index]
    }

    pub fn price_at(&self, index: usize) -> &[PriceExpression] {
        &self.price[index]
    }

    /// True when every price is rational.
    pub fn has_rational_prices(&self) -> bool {
        self.price.iter().flatten().all(PriceExpression::is_rational)
    }

    /// Number of opponent subprofiles for player `i`.
    pub fn opponent_count(&self, i: usize) -> usize {
        self.strategy_counts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &c)| c)
            .product()
    }

    /// The `k`-th opponent subprofile of player `i`, in row-major order.
    pub fn opponents(&self, i: usize, k: usize) -> Vec<usize> {
        let counts: Vec<usize> = self
            .strategy_counts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &c)| c)
            .collect();
        decode(&counts, k)
    }

    /// Profile index of `s ⊔ t` where `t` is an opponent subprofile of player `i`.
    pub fn join_index(&self, i: usize, s: usize, t: &[usize]) -> usize {
        let mut acc = 0;
        let mut it = t.iter();
        for (j, &c) in self.strategy_counts.iter().enumerate() {
            let x = if j == i { s } else { *it.next().expect("opponent entry") };
            acc = acc * c + x;
        }
        acc
    }

    pub fn to_json(&self) -> String {
        let wire = Wire {
            id: self.id.clone(),
            strategy_counts: self.strategy_counts.clone(),
            profiles: Some((0..self.profile_count()).map(|k| self.profile(k)).collect()),
            alloc: self.alloc.clone(),
            price: self.price.clone(),
        };
        serde_json::to_string(&wire).expect("tables serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: Wire = serde_json::from_str(s).map_err(|e| Error::InvalidTable(e.to_string()))?;
        if let Some(profiles) = &w.profiles {
            for (k, p) in profiles.iter().enumerate() {
                if *p != decode(&w.strategy_counts, k) {
                    return Err(Error::InvalidTable(format!(
                        "profile {k} is {p:?}, expected row-major order"
                    )));
                }
            }
        }
        FiniteMechanism::from_tables(w.id, w.strategy_counts, w.alloc, w.price)
    }
}

fn decode(counts: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; counts.len()];
    for (slot, &c) in out.iter_mut().zip(counts).rev() {
        *slot = index % c;
        index /= c;
    }
    out
}
