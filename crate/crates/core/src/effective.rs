//! Effective complexity by exhaustive minimization.
//!
//! The effective complexity of a string is the shortest description of an
//! ensemble for which the string is typical and whose total information
//! (description length plus entropy) does not exceed the string's own
//! prefix complexity by more than a slack.  Under dyadic weights and
//! explicit budgets the minimization domain is a finite, fully enumerable
//! list, so the infimum is computed exactly rather than bounded.
//!
//! Also here: the tau witness sets connecting effective complexity to
//! logical depth.  tau(y, f) collects every string produced by some plain
//! program of length at most y within f(y) steps; the uniform ensemble on
//! tau is the cheap-description witness that shallow strings cannot have
//! high effective complexity.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::ensembles::{is_typical_detailed, ConstraintSet, Ensemble, UniformEnsemble};
use crate::enumerator::{complexity_table, plain_c, prefix_k, prefix_k_nat};
use crate::interval::RealInterval;
use crate::vm::{Budget, MachineKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EffectiveError {
    #[error("prefix complexity of the string is undefined within budget")]
    KxUndefined,
    #[error("plain complexity of the string is undefined within budget")]
    CxUndefined,
    #[error(transparent)]
    Tau(#[from] TauError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TauError {
    #[error("step bound needs {needed} steps but the fuel budget is {fuel}")]
    FuelExceeded { needed: u64, fuel: u64 },
    #[error("program length {y} exceeds the length budget {max_len}")]
    LengthExceeded { y: u32, max_len: u32 },
}

/// Every ensemble whose canonical encoding is produced by some halting
/// prefix program within budget, paired with the length of the shortest
/// such program.  Strict parsing admits only canonical encodings, so the
/// list is duplicate-free; order follows the canonical encoding order.
pub fn candidate_ensembles(budget: &Budget) -> Vec<(Ensemble, u32)> {
    complexity_table(MachineKind::Prefix, &BitString::new(), budget)
        .iter()
        .filter_map(|(out, entry)| Ensemble::parse(out).ok().map(|e| (e, entry.min_len)))
        .collect()
}

fn sigma_interval(e: &Ensemble, k: u32, precision: u32) -> RealInterval {
    RealInterval::point(Dyadic::from_int(i64::from(k))).add(&e.entropy(precision))
}

struct DomainScan {
    /// Members with their description complexities, canonical order.
    members: Vec<(Ensemble, u32)>,
    kx: u32,
    borderline_excluded: usize,
    ambiguous_typical: usize,
}

// Filters the candidate list by the three domain predicates.  The per-
// candidate checks run data-parallel; counters are folded afterwards in
// list order, so the outcome is schedule-independent.
fn scan_domain(
    x: &BitString,
    delta: &Dyadic,
    slack: &Dyadic,
    budget: &Budget,
    constraint: &ConstraintSet,
) -> Result<DomainScan, EffectiveError> {
    assert!(!delta.is_negative() && !slack.is_negative(), "slacks must be non-negative");
    let kx = prefix_k(x, budget).ok_or(EffectiveError::KxUndefined)?;
    let bound = Dyadic::from_int(i64::from(kx)).add(slack);
    let checked: Vec<_> = candidate_ensembles(budget)
        .into_par_iter()
        .map(|(e, k)| {
            let typ = is_typical_detailed(x, &e, delta, budget.precision);
            let sigma = sigma_interval(&e, k, budget.precision);
            let member = constraint.ensemble_member(&e);
            (e, k, typ, sigma, member)
        })
        .collect();
    let mut scan = DomainScan {
        members: Vec::new(),
        kx,
        borderline_excluded: 0,
        ambiguous_typical: 0,
    };
    for (e, k, typ, sigma, member) in checked {
        if !typ.typical || !member {
            continue;
        }
        if *sigma.hi() <= bound {
            if typ.ambiguous {
                scan.ambiguous_typical += 1;
            }
            scan.members.push((e, k));
        } else if *sigma.lo() <= bound {
            // The interval straddles the bound: conservatively out, but
            // the exclusion is reported rather than silent.
            scan.borderline_excluded += 1;
        }
    }
    Ok(scan)
}

/// The minimization domain: candidates for which `x` is δ-typical, whose
/// total information certifiably stays within K(x) + Δ (upper interval
/// endpoint against the bound), and which satisfy the constraint.
pub fn minimization_domain(
    x: &BitString,
    delta: &Dyadic,
    slack: &Dyadic,
    budget: &Budget,
    constraint: &ConstraintSet,
) -> Result<Vec<Ensemble>, EffectiveError> {
    Ok(scan_domain(x, delta, slack, budget, constraint)?
        .members
        .into_iter()
        .map(|(e, _)| e)
        .collect())
}

/// Minimum over the domain, or a distinct infinity when it is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveValue {
    Finite(u32),
    Infinite,
}

impl Serialize for EffectiveValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            EffectiveValue::Finite(v) => serializer.serialize_u32(*v),
            EffectiveValue::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl EffectiveValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, EffectiveValue::Finite(_))
    }

    pub fn finite(&self) -> Option<u32> {
        match self {
            EffectiveValue::Finite(v) => Some(*v),
            EffectiveValue::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EffectiveParams {
    pub x: BitString,
    pub delta: Dyadic,
    pub slack: Dyadic,
    pub max_len: u32,
    pub max_steps: u64,
    pub constraint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EffectiveResult {
    pub value: EffectiveValue,
    pub witness: Option<Ensemble>,
    pub domain_size: usize,
    pub params: EffectiveParams,
    /// Budgeted prefix complexity of `x` used inside the Σ bound.
    pub kx: u32,
    /// Candidates whose Σ interval straddled the bound and were excluded.
    pub borderline_excluded: usize,
    /// Domain members admitted through the inclusive typicality tie-break.
    pub ambiguous_typical: usize,
}

/// Exact effective complexity under budget: the least description
/// complexity over the minimization domain, with the witness ensemble.
/// Ties go to the canonically least encoding.
pub fn effective_complexity(
    x: &BitString,
    delta: &Dyadic,
    slack: &Dyadic,
    budget: &Budget,
    constraint: &ConstraintSet,
) -> Result<EffectiveResult, EffectiveError> {
    let scan = scan_domain(x, delta, slack, budget, constraint)?;
    let best = scan
        .members
        .iter()
        .min_by(|(ea, ka), (eb, kb)| ka.cmp(kb).then_with(|| ea.serialize().cmp(&eb.serialize())));
    let (value, witness) = match best {
        Some((e, k)) => (EffectiveValue::Finite(*k), Some(e.clone())),
        None => (EffectiveValue::Infinite, None),
    };
    Ok(EffectiveResult {
        value,
        witness,
        domain_size: scan.members.len(),
        params: EffectiveParams {
            x: x.clone(),
            delta: delta.clone(),
            slack: slack.clone(),
            max_len: budget.max_len,
            max_steps: budget.max_steps,
            constraint: constraint.id(),
        },
        kx: scan.kx,
        borderline_excluded: scan.borderline_excluded,
        ambiguous_typical: scan.ambiguous_typical,
    })
}

/// A monotone step-count bound n ↦ f(n), used to cut off the tau sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StepBound {
    /// f(n) = n.
    Identity,
    /// f(n) = n·2ⁿ, saturating.
    LinearExp,
    /// f(n) = the power tower 2^2^…^2 of height n, truncated at `cap`
    /// (the fuel budget): beyond height four every value is `cap`.
    PowerTower { cap: u64 },
    /// Explicit non-decreasing table; inputs beyond the end clamp to the
    /// last entry.
    Table(Vec<u64>),
}

impl StepBound {
    /// Validated table constructor: non-empty and non-decreasing.
    pub fn table(values: Vec<u64>) -> Option<Self> {
        if values.is_empty() || values.windows(2).any(|w| w[0] > w[1]) {
            return None;
        }
        Some(StepBound::Table(values))
    }

    pub fn eval(&self, n: u32) -> u64 {
        match self {
            StepBound::Identity => u64::from(n),
            StepBound::LinearExp => {
                if n >= 58 {
                    u64::MAX
                } else {
                    u64::from(n) << n
                }
            }
            StepBound::PowerTower { cap } => {
                let mut t: u64 = 1;
                for _ in 0..n {
                    if t >= 63 {
                        return *cap;
                    }
                    t = 1 << t;
                }
                t.min(*cap)
            }
            StepBound::Table(v) => v[(n as usize).min(v.len() - 1)],
        }
    }

    pub fn name(&self) -> String {
        match self {
            StepBound::Identity => "identity".into(),
            StepBound::LinearExp => "linear-exp".into(),
            StepBound::PowerTower { cap } => format!("power-tower(cap={cap})"),
            StepBound::Table(v) => format!("table({} entries)", v.len()),
        }
    }
}

/// The strings reachable by plain programs of length ≤ y within f(y)
/// steps, with the uniform ensemble on them when non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauSet {
    pub y: u32,
    pub allowed_steps: u64,
    pub set: BTreeSet<BitString>,
    /// None only when a constraint filters the set to nothing.
    pub uniform: Option<UniformEnsemble>,
}

pub fn tau_set(y: u32, f: &StepBound, budget: &Budget) -> Result<TauSet, TauError> {
    tau_set_constrained(y, f, budget, &ConstraintSet::Unconstrained)
}

/// As [`tau_set`], keeping only strings whose point masses satisfy the
/// constraint.  Because fuel exhaustion is decided by total step cost,
/// membership at budget (y, f(y)) is exactly the two-sided condition
/// "some program of length ≤ y halts within f(y) steps".
pub fn tau_set_constrained(
    y: u32,
    f: &StepBound,
    budget: &Budget,
    constraint: &ConstraintSet,
) -> Result<TauSet, TauError> {
    let needed = f.eval(y);
    if needed > budget.max_steps {
        return Err(TauError::FuelExceeded { needed, fuel: budget.max_steps });
    }
    if y > budget.max_len {
        return Err(TauError::LengthExceeded { y, max_len: budget.max_len });
    }
    let inner = Budget::new(y, needed).with_precision(budget.precision);
    let set: BTreeSet<BitString> = complexity_table(MachineKind::Plain, &BitString::new(), &inner)
        .outputs()
        .filter(|s| constraint.dirac_member(s))
        .cloned()
        .collect();
    // There are fewer than 2^(y+1) programs of length at most y.
    debug_assert!((set.len() as u128) < (1u128 << (y + 1)));
    let uniform = UniformEnsemble::new(set.clone());
    Ok(TauSet { y, allowed_steps: needed, set, uniform })
}

/// Witness half of the depth edge report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauWitnessReport {
    pub set_size: usize,
    pub encoding_len: usize,
    /// Budgeted prefix complexity of the set encoding; None off budget.
    pub k: Option<u32>,
    /// Total information K + log2(set size); None when K is undefined.
    pub sigma: Option<RealInterval>,
    /// Whether `x` is 0-typical for the uniform witness (always true when
    /// the witness exists, since x ∈ tau).
    pub typical: bool,
}

/// Report connecting logical depth to effective complexity on this
/// machine: if some program of length ≤ C(x)+z produces x within
/// f(C(x)+z) steps, then x lies in tau(C(x)+z, f) and the uniform
/// ensemble on that set is an explicit cheap description for which x is
/// 0-typical.  All figures are measured, none asserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthEdgeReport {
    pub x: BitString,
    pub z: u32,
    pub step_bound: String,
    pub cx: u32,
    /// Budgeted prefix complexity of the number C(x).
    pub k_of_cx: Option<u32>,
    pub y: u32,
    pub allowed_steps: u64,
    pub tau_size: usize,
    /// Whether the depth of x at slack z stays within f(C(x)+z).
    pub within_bound: bool,
    /// Exact minimal halting steps over programs of length ≤ y within the
    /// step cutoff (equals the z-depth of x when within the bound).
    pub depth_steps: Option<u64>,
    pub witness: Option<TauWitnessReport>,
    pub note: String,
}

pub fn depth_edge_report(
    x: &BitString,
    z: u32,
    f: &StepBound,
    budget: &Budget,
) -> Result<DepthEdgeReport, EffectiveError> {
    let cx = plain_c(x, budget).ok_or(EffectiveError::CxUndefined)?;
    let y = cx + z;
    let tau = tau_set(y, f, budget)?;
    let within = tau.set.contains(x);
    let depth_steps = if within {
        let inner = Budget::new(y, tau.allowed_steps).with_precision(budget.precision);
        complexity_table(MachineKind::Plain, &BitString::new(), &inner)
            .get(x)
            .map(|e| e.min_steps_any)
    } else {
        None
    };
    let witness = if within {
        tau.uniform.as_ref().map(|u| {
            let k = u.k(budget);
            TauWitnessReport {
                set_size: u.len(),
                encoding_len: u.serialize().len(),
                k,
                sigma: k.and(u.total_information(budget, budget.precision)),
                typical: u.is_typical(x),
            }
        })
    } else {
        None
    };
    let note = if within {
        "depth within bound; uniform tau ensemble witnesses a cheap typical description".into()
    } else {
        "no witness via tau: no program of length <= C(x)+z halts within the step bound".into()
    };
    Ok(DepthEdgeReport {
        x: x.clone(),
        z,
        step_bound: f.name(),
        cx,
        k_of_cx: prefix_k_nat(u64::from(cx), budget),
        y,
        allowed_steps: tau.allowed_steps,
        tau_size: tau.set.len(),
        within_bound: within,
        depth_steps,
        witness,
        note,
    })
}
