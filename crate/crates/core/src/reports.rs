//! Empirical reports: measured gaps for the classical inequalities whose
//! constants are machine-relative.
//!
//! Everything here is emitted for inspection, never asserted.  The chain
//! rule, the effective-complexity versus sufficient-statistic bracket,
//! and the depth phase transition all hold up to additive constants that
//! depend on the underlying machine; these builders measure the constants
//! this machine actually exhibits at desk budgets.

use serde::Serialize;

use crate::bits::BitString;
use crate::codec::encode_string;
use crate::depth_stats::{census, census_argmax, CensusRow};
use crate::dyadic::Dyadic;
use crate::effective::{effective_complexity, EffectiveValue};
use crate::ensembles::ConstraintSet;
use crate::enumerator::{chaitin_k, cond_k, prefix_k};
use crate::interval::RealInterval;
use crate::vm::Budget;

/// One measured instance of K(x,y) against K(y) + K(x|y*).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainRuleRow {
    pub x: BitString,
    pub y: BitString,
    /// Self-delimiting pairing whose complexity stands in for K(x,y).
    pub pair_encoding: BitString,
    pub k_pair: Option<u32>,
    pub k_y: Option<u32>,
    pub k_x_given_y: Option<u32>,
    /// K(y) + K(x|y*) − K(x,y); negative when the pairing overhead wins.
    pub gap: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainRuleReport {
    pub max_len: u32,
    pub max_steps: u64,
    pub rows: Vec<ChainRuleRow>,
    pub min_gap: Option<i64>,
    pub max_gap: Option<i64>,
}

/// Measures the chain rule over all pairs of strings up to `pair_len`
/// bits each.  The joint object is the concatenation of self-delimiting
/// encodings, the conditional is the minimal-program form.
pub fn chain_rule_report(pair_len: u32, budget: &Budget) -> ChainRuleReport {
    let shorts: Vec<BitString> = (0..=pair_len)
        .flat_map(BitString::strings_of_length)
        .collect();
    let mut rows = Vec::with_capacity(shorts.len() * shorts.len());
    for x in &shorts {
        for y in &shorts {
            let pair_encoding = encode_string(x).concat(&encode_string(y));
            let k_pair = prefix_k(&pair_encoding, budget);
            let k_y = prefix_k(y, budget);
            let k_x_given_y = chaitin_k(x, y, budget);
            let gap = match (k_pair, k_y, k_x_given_y) {
                (Some(p), Some(ky), Some(kxy)) => {
                    Some(i64::from(ky) + i64::from(kxy) - i64::from(p))
                }
                _ => None,
            };
            rows.push(ChainRuleRow {
                x: x.clone(),
                y: y.clone(),
                pair_encoding,
                k_pair,
                k_y,
                k_x_given_y,
                gap,
            });
        }
    }
    let gaps = || rows.iter().filter_map(|r| r.gap);
    ChainRuleReport {
        max_len: budget.max_len,
        max_steps: budget.max_steps,
        min_gap: gaps().min(),
        max_gap: gaps().max(),
        rows,
    }
}

/// Effective complexity against the minimal sufficient-statistic level
/// for one string at one slack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KmssGapRow {
    pub x: BitString,
    pub delta: Dyadic,
    pub slack: u32,
    pub effective: EffectiveValue,
    pub k_delta: Option<u32>,
    /// ℰ − k_Δ where both are finite; the bracket's measured width.
    pub gap: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KmssGapReport {
    pub n: u32,
    pub max_len: u32,
    pub max_steps: u64,
    pub rows: Vec<KmssGapRow>,
}

/// Sweeps every string of length `n` over the given slacks, recording the
/// two quantities the sufficient-statistic bracket relates.  Rows where
/// either side is undefined or infinite simply carry no gap.
pub fn kmss_gap_report(
    n: u32,
    delta: &Dyadic,
    slacks: &[u32],
    budget: &Budget,
) -> KmssGapReport {
    let mut rows = Vec::new();
    for x in BitString::strings_of_length(n) {
        for &slack in slacks {
            let eff = effective_complexity(
                &x,
                delta,
                &Dyadic::from_int(i64::from(slack)),
                budget,
                &ConstraintSet::unconstrained(),
            );
            let effective = match &eff {
                Ok(r) => r.value.clone(),
                Err(_) => EffectiveValue::Infinite,
            };
            let k_delta = crate::depth_stats::kmss(&x, slack, budget)
                .ok()
                .flatten()
                .map(|r| r.k_delta);
            let gap = match (&effective, k_delta) {
                (EffectiveValue::Finite(e), Some(k)) => {
                    Some(i64::from(*e) - i64::from(k))
                }
                _ => None,
            };
            rows.push(KmssGapRow {
                x: x.clone(),
                delta: delta.clone(),
                slack,
                effective,
                k_delta,
                gap,
            });
        }
    }
    KmssGapReport {
        n,
        max_len: budget.max_len,
        max_steps: budget.max_steps,
        rows,
    }
}

/// One point of the depth phase-transition scatter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScatterPoint {
    pub x: BitString,
    pub effective: Option<EffectiveValue>,
    pub depth_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthScatterReport {
    pub n: u32,
    pub points: Vec<ScatterPoint>,
    /// String the census ranks highest by effective complexity.
    pub effective_argmax: Option<BitString>,
    pub max_depth_steps: Option<u64>,
    pub deepest: Vec<BitString>,
    /// Whether the effective-complexity argmax sits among the deepest
    /// strings; the qualitative shape of the transition, not asserted.
    pub argmax_is_deepest: bool,
}

/// Census-backed scatter of effective complexity against logical depth
/// for all strings of length `n`.
pub fn depth_scatter_report(
    n: u32,
    delta: &Dyadic,
    slack: &Dyadic,
    z: u32,
    budget: &Budget,
) -> DepthScatterReport {
    let rows = census(n, delta, slack, z, budget);
    scatter_from_census(n, &rows)
}

/// The same scatter from precomputed census rows.
pub fn scatter_from_census(n: u32, rows: &[CensusRow]) -> DepthScatterReport {
    let points: Vec<ScatterPoint> = rows
        .iter()
        .map(|r| ScatterPoint {
            x: r.x.clone(),
            effective: r.eff.as_ref().map(|e| e.value.clone()),
            depth_steps: r.depth.as_ref().and_then(|d| d.value),
        })
        .collect();
    let effective_argmax = census_argmax(rows).map(|r| r.x.clone());
    let max_depth_steps = points.iter().filter_map(|p| p.depth_steps).max();
    let deepest: Vec<BitString> = match max_depth_steps {
        None => Vec::new(),
        Some(m) => points
            .iter()
            .filter(|p| p.depth_steps == Some(m))
            .map(|p| p.x.clone())
            .collect(),
    };
    let argmax_is_deepest = match &effective_argmax {
        None => false,
        Some(x) => deepest.contains(x),
    };
    DepthScatterReport {
        n,
        points,
        effective_argmax,
        max_depth_steps,
        deepest,
        argmax_is_deepest,
    }
}

/// Entropy of an ensemble against its expected conditional complexity
/// Σ E(s)·K(s|E), the machine-relative identity behind coarse-graining.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CondEntropyRow {
    pub encoding: BitString,
    pub k_ensemble: u32,
    pub entropy: RealInterval,
    /// Exact dyadic Σ E(s)·K(s|E) with the encoding fed as auxiliary
    /// input; None when some support string falls off budget.
    pub expected_cond_k: Option<Dyadic>,
    /// entropy − expected_cond_k, enclosed.
    pub gap: Option<RealInterval>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CondEntropyReport {
    pub max_len: u32,
    pub max_steps: u64,
    pub rows: Vec<CondEntropyRow>,
}

/// Sweeps every in-budget ensemble, comparing interval entropy with the
/// exact expectation of conditional complexity given the ensemble's own
/// encoding.
pub fn cond_entropy_report(budget: &Budget) -> CondEntropyReport {
    let rows = crate::effective::candidate_ensembles(budget)
        .into_iter()
        .map(|(e, k)| {
            let encoding = e.serialize();
            let entropy = e.entropy(budget.precision);
            let expected_cond_k = e
                .entries()
                .iter()
                .map(|(s, w)| cond_k(s, &encoding, budget).map(|ks| w.mul_int(u64::from(ks))))
                .collect::<Option<Vec<Dyadic>>>()
                .map(|terms| terms.iter().fold(Dyadic::zero(), |a, t| a.add(t)));
            let gap = expected_cond_k
                .as_ref()
                .map(|s| entropy.sub(&RealInterval::point(s.clone())));
            CondEntropyRow {
                encoding,
                k_ensemble: k,
                entropy,
                expected_cond_k,
                gap,
            }
        })
        .collect();
    CondEntropyReport {
        max_len: budget.max_len,
        max_steps: budget.max_steps,
        rows,
    }
}
