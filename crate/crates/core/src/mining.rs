//! Level-wise Apriori and association-rule generation.
//!
//! Supports are fractions of transactions. Every frequency is derived from
//! integer counts through [`Frequency::from_counts`], so results are exact
//! for rational scalars and reproducible bit-for-bit for floats.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::TransactionSet;
use crate::scalar::Frequency;

pub const DEFAULT_MIN_SUPPORT: f64 = 0.2;
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiningError {
    #[error("cannot mine an empty transaction set")]
    EmptyTransactions,
    #[error("minimum support must lie in (0, 1]")]
    SupportOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentItemset<F> {
    /// Sorted, duplicate-free.
    pub items: Vec<String>,
    /// Number of transactions containing every item.
    pub count: usize,
    pub support: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule<F> {
    pub antecedent: Vec<String>,
    pub consequent: Vec<String>,
    pub support: F,
    pub confidence: F,
}

impl<F> AssociationRule<F> {
    /// `true` when every antecedent item is in `set`.
    pub fn antecedent_within(&self, set: &BTreeSet<String>) -> bool {
        self.antecedent.iter().all(|a| set.contains(a))
    }
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// All itemsets whose support reaches `min_support`, ordered by size and
/// then lexicographically.
pub fn frequent_itemsets<F: Frequency>(
    transactions: &TransactionSet,
    min_support: F,
) -> Result<Vec<FrequentItemset<F>>, MiningError> {
    frequent_itemsets_up_to(transactions, min_support, usize::MAX)
}

/// [`frequent_itemsets`] restricted to itemsets of at most `max_size` items.
/// Position baskets share many cells across levels, so their full lattice
/// can be exponential while only singletons are needed.
pub fn frequent_itemsets_up_to<F: Frequency>(
    transactions: &TransactionSet,
    min_support: F,
    max_size: usize,
) -> Result<Vec<FrequentItemset<F>>, MiningError> {
    if transactions.is_empty() {
        return Err(MiningError::EmptyTransactions);
    }
    if !min_support.is_unit_fraction() {
        return Err(MiningError::SupportOutOfRange);
    }
    let n = transactions.len();

    let vocab: Vec<&str> = transactions
        .transactions
        .iter()
        .flat_map(|t| t.items.iter().map(String::as_str))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let id_of: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    // BTreeSet iteration is sorted, and ids follow lexicographic order.
    let encoded: Vec<Vec<u32>> = transactions
        .transactions
        .iter()
        .map(|t| t.items.iter().map(|s| id_of[s.as_str()]).collect())
        .collect();

    let frequent = |count: usize| F::from_counts(count, n) >= min_support;

    let mut singles = vec![0usize; vocab.len()];
    for t in &encoded {
        for &i in t {
            singles[i as usize] += 1;
        }
    }
    let mut level: Vec<(Vec<u32>, usize)> = singles
        .iter()
        .enumerate()
        .filter(|(_, &c)| frequent(c))
        .map(|(i, &c)| (vec![i as u32], c))
        .collect();

    let mut found: Vec<(Vec<u32>, usize)> = Vec::new();
    while !level.is_empty() {
        let size = level[0].0.len();
        let candidates = if size < max_size { join_and_prune(&level) } else { Vec::new() };
        found.append(&mut level);
        if candidates.is_empty() {
            break;
        }
        let k = candidates[0].len();
        let mut counts = vec![0usize; candidates.len()];
        for t in encoded.iter().filter(|t| t.len() >= k) {
            for (cand, count) in candidates.iter().zip(counts.iter_mut()) {
                if is_subset(cand, t) {
                    *count += 1;
                }
            }
        }
        level = candidates
            .into_iter()
            .zip(counts)
            .filter(|(_, c)| frequent(*c))
            .collect();
    }

    Ok(found
        .into_iter()
        .map(|(ids, count)| FrequentItemset {
            items: ids.iter().map(|&i| vocab[i as usize].to_string()).collect(),
            count,
            support: F::from_counts(count, n),
        })
        .collect())
}

/// Candidate (k+1)-itemsets from sorted frequent k-itemsets: join pairs
/// sharing a (k-1)-prefix, then drop any candidate with an infrequent
/// k-subset.
fn join_and_prune(level: &[(Vec<u32>, usize)]) -> Vec<Vec<u32>> {
    let known: HashSet<&[u32]> = level.iter().map(|(s, _)| s.as_slice()).collect();
    let mut out = Vec::new();
    for (i, (a, _)) in level.iter().enumerate() {
        let prefix = &a[..a.len() - 1];
        for (b, _) in &level[i + 1..] {
            if &b[..b.len() - 1] != prefix {
                break;
            }
            let mut cand = a.clone();
            cand.push(*b.last().expect("non-empty itemset"));
            let all_subsets_frequent = (0..cand.len()).all(|skip| {
                let sub: Vec<u32> = cand
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &x)| x)
                    .collect();
                known.contains(sub.as_slice())
            });
            if all_subsets_frequent {
                out.push(cand);
            }
        }
    }
    out
}

/// Every rule `A ⇒ C` over a bipartition of a frequent itemset whose
/// confidence reaches `min_confidence`.
///
/// Consequents grow level by level: moving an item from the antecedent to
/// the consequent can only lower confidence, so a consequent is extended
/// only when all of its immediate sub-consequents passed. Itemsets whose
/// antecedent subsets are missing from `itemsets` produce no rules.
///
/// Ordered by confidence (descending), support (descending), antecedent,
/// then consequent.
pub fn association_rules<F: Frequency>(
    itemsets: &[FrequentItemset<F>],
    min_confidence: F,
) -> Vec<AssociationRule<F>> {
    let counts: HashMap<&[String], usize> = itemsets.iter().map(|s| (s.items.as_slice(), s.count)).collect();
    let mut rules = Vec::new();

    for set in itemsets.iter().filter(|s| s.items.len() >= 2) {
        let k = set.items.len();
        let split = |consequent: &[usize]| -> (Vec<String>, Vec<String>) {
            let mut ante = Vec::with_capacity(k - consequent.len());
            let mut cons = Vec::with_capacity(consequent.len());
            for (i, item) in set.items.iter().enumerate() {
                if consequent.contains(&i) {
                    cons.push(item.clone());
                } else {
                    ante.push(item.clone());
                }
            }
            (ante, cons)
        };

        let mut candidates: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        while !candidates.is_empty() && candidates[0].len() < k {
            let mut passing = Vec::new();
            for cons_idx in candidates {
                let (antecedent, consequent) = split(&cons_idx);
                let Some(&ante_count) = counts.get(antecedent.as_slice()) else {
                    continue;
                };
                let confidence = F::from_counts(set.count, ante_count);
                if confidence >= min_confidence {
                    rules.push(AssociationRule {
                        antecedent,
                        consequent,
                        support: set.support.clone(),
                        confidence,
                    });
                    passing.push(cons_idx);
                }
            }
            candidates = grow_consequents(&passing);
        }
    }

    rules.sort_by(rule_order);
    rules
}

fn grow_consequents(passing: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let known: HashSet<&[usize]> = passing.iter().map(Vec::as_slice).collect();
    let mut out = Vec::new();
    for (i, a) in passing.iter().enumerate() {
        let prefix = &a[..a.len() - 1];
        for b in &passing[i + 1..] {
            if &b[..b.len() - 1] != prefix {
                break;
            }
            let mut cand = a.clone();
            cand.push(*b.last().expect("non-empty"));
            let closed = (0..cand.len()).all(|skip| {
                let sub: Vec<usize> = cand
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &x)| x)
                    .collect();
                known.contains(sub.as_slice())
            });
            if closed {
                out.push(cand);
            }
        }
    }
    out
}

fn rule_order<F: Frequency>(a: &AssociationRule<F>, b: &AssociationRule<F>) -> Ordering {
    b.confidence
        .partial_cmp(&a.confidence)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.support.partial_cmp(&a.support).unwrap_or(Ordering::Equal))
        .then_with(|| a.antecedent.cmp(&b.antecedent))
        .then_with(|| a.consequent.cmp(&b.consequent))
}

/// Frequent itemsets and the rules over them in one call.
pub fn mine<F: Frequency>(
    transactions: &TransactionSet,
    min_support: F,
    min_confidence: F,
) -> Result<(Vec<FrequentItemset<F>>, Vec<AssociationRule<F>>), MiningError> {
    let itemsets = frequent_itemsets(transactions, min_support)?;
    let rules = association_rules(&itemsets, min_confidence);
    Ok((itemsets, rules))
}
