//! Logical depth, the structure function, minimal sufficient statistics,
//! deficiency measures, and whole-length censuses.
//!
//! Depth asks how long the near-shortest programs for a string run; the
//! structure function asks how small a cheaply describable set containing
//! the string can be.  Both are computed exactly under budgets by reusing
//! the enumeration engine, and the census sweeps a whole length class to
//! expose how the measures interact.
//!
//! Conditional complexities "given n" feed the condition to the machine as
//! an auxiliary string.  The primary convention hands over a shortest
//! prefix program for the length code gamma(n); a secondary one hands the
//! plain machine the length code itself.  Both are exposed; nothing
//! asserts they agree.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::codec::gamma_encode;
use crate::dyadic::Dyadic;
use crate::effective::{effective_complexity, EffectiveResult, EffectiveValue};
use crate::ensembles::{parse_set, ConstraintSet};
use crate::enumerator::{
    complexity_table, plain_c, prefix_k, prefix_k_nat, shortest_program, visit_halting,
    ComplexityTable,
};
use crate::interval::{log2_nat, RealInterval};
use crate::vm::{Budget, MachineKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DepthStatsError {
    #[error("plain complexity of the string is undefined within budget")]
    CxUndefined,
    #[error("conditional prefix complexity of the string is undefined within budget")]
    KxUndefined,
    #[error("no program for the length code is found within budget")]
    AuxUndefined,
    #[error("the structure function needs a non-empty string")]
    EmptyString,
}

/// How "given n" is realized on the machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conditioning {
    /// Auxiliary input = a canonical shortest prefix program for the
    /// length code gamma(n).  Primary convention.
    ShortestProgram,
    /// Auxiliary input = the length code gamma(n) itself, on the plain
    /// machine.  Comparison variant; never asserted equal to the primary.
    PlainDirect,
}

impl Default for Conditioning {
    fn default() -> Self {
        Conditioning::ShortestProgram
    }
}

// Desk-scale guard: the pruned walk grows roughly like 1.75^len.
const MAX_DEPTH_SEARCH_LEN: u32 = 24;

/// Exact minimal halting time over the near-shortest programs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthResult {
    /// Minimal steps over halting programs of length ≤ cx + z within
    /// fuel; None if none halts (impossible when cx was measured at the
    /// same budget, kept for shape honesty).
    pub value: Option<u64>,
    pub z: u32,
    pub cx: u32,
    /// A program attaining the minimum: fewest steps, then shortest, then
    /// lexicographically least.
    pub witness: Option<BitString>,
}

/// Logical depth at significance level z: the fewest steps in which any
/// program at most z bits longer than the shortest one produces `x` on
/// the plain machine.
pub fn logical_depth(x: &BitString, z: u32, budget: &Budget) -> Result<DepthResult, DepthStatsError> {
    let cx = plain_c(x, budget).ok_or(DepthStatsError::CxUndefined)?;
    let cap = cx + z;
    assert!(
        cap <= MAX_DEPTH_SEARCH_LEN,
        "depth search at length {cap} exceeds the desk-scale walk guard"
    );
    let inner = Budget::new(cap, budget.max_steps).with_precision(budget.precision);
    let mut best: Option<(u64, BitString)> = None;
    visit_halting(MachineKind::Plain, &BitString::new(), &inner, &mut |p, o, s| {
        if o == x {
            let better = match &best {
                None => true,
                Some((bs, bp)) => {
                    s < *bs || (s == *bs && (p.len(), p) < (bp.len(), bp))
                }
            };
            if better {
                best = Some((s, p.clone()));
            }
        }
    });
    let (value, witness) = match best {
        Some((s, p)) => (Some(s), Some(p)),
        None => (None, None),
    };
    Ok(DepthResult { value, z, cx, witness })
}

// The conditional table realizing "given n" under the chosen convention.
fn conditional_table(
    n: u32,
    budget: &Budget,
    conditioning: Conditioning,
) -> Result<ComplexityTable, DepthStatsError> {
    assert!(n >= 1, "length codes start at 1");
    let code = gamma_encode(u64::from(n));
    match conditioning {
        Conditioning::ShortestProgram => {
            let y_star = shortest_program(&code, MachineKind::Prefix, budget)
                .ok_or(DepthStatsError::AuxUndefined)?;
            Ok(complexity_table(MachineKind::Prefix, &y_star, budget))
        }
        Conditioning::PlainDirect => Ok(complexity_table(MachineKind::Plain, &code, budget)),
    }
}

// A set whose encoding some conditional program produces: the raw material
// of the structure function.
#[derive(Debug, Clone)]
struct QualifyingSet {
    set: BTreeSet<BitString>,
    cardinality: u64,
    kstar: u32,
    witness_program: BitString,
}

// All subsets of {0,1}^n containing x whose canonical encodings appear in
// the conditional table, in canonical encoding order.
fn qualifying_sets(
    x: &BitString,
    budget: &Budget,
    conditioning: Conditioning,
) -> Result<(Vec<QualifyingSet>, ComplexityTable), DepthStatsError> {
    if x.is_empty() {
        return Err(DepthStatsError::EmptyString);
    }
    let n = x.len();
    let table = conditional_table(n as u32, budget, conditioning)?;
    let mut sets = Vec::new();
    for (out, entry) in table.iter() {
        let Ok(set) = parse_set(out) else { continue };
        if !set.contains(x) || set.iter().any(|s| s.len() != n) {
            continue;
        }
        sets.push(QualifyingSet {
            cardinality: set.len() as u64,
            set,
            kstar: entry.min_len,
            witness_program: entry.witness.clone(),
        });
    }
    Ok((sets, table))
}

/// The structure function at level k: the smallest set of length-n
/// strings containing `x` whose encoding has conditional complexity ≤ k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureResult {
    pub k: u32,
    pub n: u32,
    /// None when no set qualifies within budget at this k.
    pub witness_set: Option<BTreeSet<BitString>>,
    pub cardinality: Option<u64>,
    /// log2 of the cardinality when it is a power of two.
    pub hk_exact: Option<u32>,
    /// Enclosure of log2 of the cardinality (point iff exact).
    pub hk_interval: Option<RealInterval>,
    /// Conditional complexity of the winning set's encoding.
    pub witness_k: Option<u32>,
}

pub fn structure_function(
    x: &BitString,
    k: u32,
    budget: &Budget,
) -> Result<StructureResult, DepthStatsError> {
    structure_function_with(x, k, budget, Conditioning::default())
}

pub fn structure_function_with(
    x: &BitString,
    k: u32,
    budget: &Budget,
    conditioning: Conditioning,
) -> Result<StructureResult, DepthStatsError> {
    let (sets, _) = qualifying_sets(x, budget, conditioning)?;
    // First minimal-cardinality qualifier in canonical encoding order.
    let best = sets
        .iter()
        .filter(|q| q.kstar <= k)
        .min_by_key(|q| q.cardinality);
    let n = x.len() as u32;
    Ok(match best {
        Some(q) => StructureResult {
            k,
            n,
            witness_set: Some(q.set.clone()),
            cardinality: Some(q.cardinality),
            hk_exact: q.cardinality.is_power_of_two().then(|| q.cardinality.trailing_zeros()),
            hk_interval: Some(log2_nat(q.cardinality, budget.precision)),
            witness_k: Some(q.kstar),
        },
        None => StructureResult {
            k,
            n,
            witness_set: None,
            cardinality: None,
            hk_exact: None,
            hk_interval: None,
            witness_k: None,
        },
    })
}

/// A minimal sufficient statistic: the level where a set description of
/// `x` stops paying for itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KmssResult {
    pub k_delta: u32,
    /// Shortest program for the winning set's encoding.
    pub witness_program: BitString,
    pub witness_set: BTreeSet<BitString>,
    pub cardinality: u64,
    /// Conditional complexity of `x` given n, the right side's anchor.
    pub kstar_x: u32,
}

pub fn kmss(
    x: &BitString,
    delta: u32,
    budget: &Budget,
) -> Result<Option<KmssResult>, DepthStatsError> {
    kmss_with(x, delta, budget, Conditioning::default())
}

/// Minimal k such that the best level-k set satisfies
/// log2(cardinality) + k ≤ K(x given n) + Δ, decided in exact integer
/// arithmetic as cardinality·2^k ≤ 2^(K+Δ).  None when no level within
/// the budget qualifies.
pub fn kmss_with(
    x: &BitString,
    delta: u32,
    budget: &Budget,
    conditioning: Conditioning,
) -> Result<Option<KmssResult>, DepthStatsError> {
    let (sets, table) = qualifying_sets(x, budget, conditioning)?;
    let kstar_x = table.complexity(x).ok_or(DepthStatsError::KxUndefined)?;
    let bound_exp = u64::from(kstar_x) + u64::from(delta);
    for k in 0..=budget.max_len {
        let best = sets
            .iter()
            .filter(|q| q.kstar <= k)
            .min_by_key(|q| q.cardinality);
        let Some(q) = best else { continue };
        // cardinality * 2^k <= 2^bound_exp, exactly.
        let lhs = u128::from(q.cardinality) << k;
        if bound_exp < 127 && lhs <= (1u128 << bound_exp) {
            return Ok(Some(KmssResult {
                k_delta: k,
                witness_program: q.witness_program.clone(),
                witness_set: q.set.clone(),
                cardinality: q.cardinality,
                kstar_x,
            }));
        }
    }
    Ok(None)
}

/// ℓ(x) + K(ℓ(x)) − K(x), clipped at zero: how far `x` falls short of
/// the incompressibility ceiling.
pub fn incompressibility(x: &BitString, budget: &Budget) -> Option<u32> {
    let kx = prefix_k(x, budget)?;
    let klen = prefix_k_nat(x.len() as u64, budget)?;
    Some((x.len() as u32 + klen).saturating_sub(kx))
}

/// ℓ(x) − C(x), clipped at zero: how compressible `x` is in the plain
/// sense.
pub fn randomness_deficiency(x: &BitString, budget: &Budget) -> Option<u32> {
    let cx = plain_c(x, budget)?;
    Some((x.len() as u32).saturating_sub(cx))
}

/// C(x) + K(C(x)) − K(x), clipped at zero: the slack in the standard
/// bridge between plain and prefix complexity.
pub fn well_behaved_slack(x: &BitString, budget: &Budget) -> Option<u32> {
    let cx = plain_c(x, budget)?;
    let kx = prefix_k(x, budget)?;
    let kc = prefix_k_nat(u64::from(cx), budget)?;
    Some((cx + kc).saturating_sub(kx))
}

/// One row of the whole-length census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub x: BitString,
    pub cx: Option<u32>,
    pub kx: Option<u32>,
    pub r: Option<u32>,
    pub m: Option<u32>,
    pub wb: Option<u32>,
    pub eff: Option<EffectiveResult>,
    pub depth: Option<DepthResult>,
}

/// Census over all strings of length n: every measure for every string,
/// rows in lexicographic order.  Rows are independent and computed in
/// parallel; each cell that falls off budget is None rather than an
/// error.
pub fn census(n: u32, delta: &Dyadic, slack: &Dyadic, z: u32, budget: &Budget) -> Vec<CensusRow> {
    let strings: Vec<BitString> = BitString::strings_of_length(n).collect();
    strings
        .into_par_iter()
        .map(|x| {
            let eff = effective_complexity(
                &x,
                delta,
                slack,
                budget,
                &ConstraintSet::Unconstrained,
            )
            .ok();
            let depth = logical_depth(&x, z, budget).ok();
            CensusRow {
                cx: plain_c(&x, budget),
                kx: prefix_k(&x, budget),
                r: incompressibility(&x, budget),
                m: randomness_deficiency(&x, budget),
                wb: well_behaved_slack(&x, budget),
                eff,
                depth,
                x,
            }
        })
        .collect()
}

/// The row whose effective complexity is empirically largest: infinite
/// beats every finite value, larger finite beats smaller, undefined never
/// wins; ties go to the first row in order.
pub fn census_argmax(rows: &[CensusRow]) -> Option<&CensusRow> {
    fn rank(row: &CensusRow) -> (u8, u32) {
        match &row.eff {
            Some(r) => match r.value {
                EffectiveValue::Infinite => (2, 0),
                EffectiveValue::Finite(v) => (1, v),
            },
            None => (0, 0),
        }
    }
    rows.iter().max_by(|a, b| rank(a).cmp(&rank(b)).then(std::cmp::Ordering::Greater))
}

fn opt_cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "undefined".into(),
    }
}

/// Fixed-header CSV rendering of census rows.
pub fn census_csv(rows: &[CensusRow]) -> String {
    let mut out = String::from("x,c,k,r,m,wb,eff,depth\n");
    for row in rows {
        let eff = match &row.eff {
            Some(r) => match r.value {
                EffectiveValue::Finite(v) => v.to_string(),
                EffectiveValue::Infinite => "inf".into(),
            },
            None => "undefined".into(),
        };
        let depth = match &row.depth {
            Some(d) => opt_cell(&d.value),
            None => "undefined".into(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.x,
            opt_cell(&row.cx),
            opt_cell(&row.kx),
            opt_cell(&row.r),
            opt_cell(&row.m),
            opt_cell(&row.wb),
            eff,
            depth,
        ));
    }
    out
}
