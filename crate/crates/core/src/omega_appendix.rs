//! An explicitly computable ensemble whose entropy encodes the halting
//! probability.
//!
//! Strings are partitioned into classes by their leading zeros; class n
//! receives total weight 2^(-n), spread over finitely many of its members
//! so that the class contributes entropy n·2^(-n) plus the n-th increment
//! of a non-decreasing lower approximation Ω_1 ≤ Ω_2 ≤ … of the halting
//! probability.  Summing the geometric series, the entropy of the full
//! construction is 2 + lim Ω_n, so computing it to arbitrary precision
//! would decide the halting problem; the finite prefixes built here
//! converge at the explicit rate (N+2)·2^(-N).
//!
//! The splitter solves the one knob problem exactly: given a weight c and
//! a target s ≥ -c·log2(c), find finitely many positive dyadic parts
//! summing to exactly c whose entropy contribution lands within tol of s.

use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::enumerator::omega_lower;
use crate::interval::{log2_interval, log2_nat, neg_w_log2_w, Decision, RealInterval};
use crate::vm::Budget;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AppendixError {
    #[error("entropy target {s} is below the single-part minimum for weight {c}")]
    Infeasible { c: Dyadic, s: Dyadic },
    #[error("weight must lie in (0, 1], got {c}")]
    BadWeight { c: Dyadic },
    #[error("equal-split search needs more than 2^20 parts; target too aggressive")]
    PartBudget,
    #[error("omega sequence must start at zero")]
    OmegaStart,
    #[error("omega sequence decreases at index {index}")]
    DecreasingOmega { index: usize },
    #[error("omega schedule supplies {have} values but {need} are needed")]
    ScheduleTooShort { have: usize, need: usize },
}

/// Index n of the class containing `x`: one more than the number of
/// leading zeros.  Class n holds exactly the strings that start with
/// n−1 zeros followed by nothing or by a one.
pub fn partition_index(x: &BitString) -> u32 {
    let mut zeros = 0u32;
    for bit in x.bits() {
        if bit {
            break;
        }
        zeros += 1;
    }
    zeros + 1
}

/// The first `count` members of class n in canonical order: the bare
/// prefix of n−1 zeros, then that prefix plus a one plus every suffix in
/// canonical order.
pub fn class_strings(n: u32, count: usize) -> Vec<BitString> {
    assert!(n >= 1, "classes are indexed from 1");
    let mut zeros = BitString::new();
    for _ in 1..n {
        zeros.push(false);
    }
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(zeros.clone());
    let mut opened = zeros;
    opened.push(true);
    let mut suffix_len = 0u32;
    while out.len() < count {
        for suffix in BitString::strings_of_length(suffix_len) {
            out.push(opened.concat(&suffix));
            if out.len() == count {
                return out;
            }
        }
        suffix_len += 1;
    }
    out
}

/// Positive dyadic parts summing to exactly `c`, with the realized
/// entropy contribution Σ −r·log2(r) enclosed by `entropy`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitOutcome {
    pub parts: Vec<Dyadic>,
    pub entropy: RealInterval,
}

const PART_CAP: u64 = 1 << 20;

// Entropy of the one-knob family: count−1 parts of size d plus one part
// of size c − (count−1)·d.  Exact dyadic inputs, interval output.
fn family_entropy(c: &Dyadic, d: &Dyadic, count: u64, precision: u32) -> RealInterval {
    let rest = c.sub(&d.mul_int(count - 1));
    debug_assert!(rest.is_positive());
    neg_w_log2_w(&rest, precision).add(&neg_w_log2_w(d, precision).scale_nonneg(
        &Dyadic::from_int(count as i64 - 1),
    ))
}

fn family_parts(c: &Dyadic, d: &Dyadic, count: u64) -> Vec<Dyadic> {
    let mut parts = vec![c.sub(&d.mul_int(count - 1))];
    parts.extend(std::iter::repeat(d.clone()).take(count as usize - 1));
    parts
}

// Entropy of the equal split of c into k parts, −c·log2(c/k), evaluated
// as c·(log2 k − log2 c) so only dyadic quantities enter the logs.
fn equal_split_entropy(c: &Dyadic, k: u64, precision: u32) -> RealInterval {
    log2_nat(k, precision)
        .sub(&log2_interval(c, precision))
        .scale_nonneg(c)
}

fn within(interval: &RealInterval, s: &Dyadic, tol: &Dyadic) -> bool {
    interval.hi().sub(s) <= *tol && s.sub(interval.lo()) <= *tol
}

/// Splits weight `c` into positive dyadic parts summing exactly to `c`
/// whose entropy contribution is within `tol` of `s`.
///
/// The minimal part count k with equal-split entropy reaching `s` fixes
/// the family; a single free part is then bisected until the realized
/// entropy is certified inside the tolerance window.  Infeasible targets
/// (below the single-part minimum −c·log2(c) − tol) are rejected.
pub fn split_weight(
    c: &Dyadic,
    s: &Dyadic,
    tol: &Dyadic,
    precision: u32,
) -> Result<SplitOutcome, AppendixError> {
    assert!(tol.is_positive(), "tolerance must be positive");
    if !c.is_positive() || *c > Dyadic::one() {
        return Err(AppendixError::BadWeight { c: c.clone() });
    }
    // Interval widths must sit far below the tolerance window.
    let p = precision.max(u32::try_from(tol.exp()).unwrap_or(precision) + 16);

    let single = neg_w_log2_w(c, p);
    if s.add(tol) < *single.lo() {
        return Err(AppendixError::Infeasible { c: c.clone(), s: s.clone() });
    }

    // Minimal part count whose equal split reaches the target: double to
    // bracket it, then binary search inside the last doubling.
    let target = RealInterval::point(s.clone());
    let reaches = |k: u64| equal_split_entropy(c, k, p).ge(&target) != Decision::False;
    let mut count = 1u64;
    while !reaches(count) {
        count *= 2;
        if count > PART_CAP {
            return Err(AppendixError::PartBudget);
        }
    }
    let mut below = count / 2;
    while count - below > 1 {
        let mid = below + (count - below) / 2;
        if reaches(mid) {
            count = mid;
        } else {
            below = mid;
        }
    }

    if count == 1 {
        // Feasibility pins s within tol of the single-part entropy.
        return Ok(SplitOutcome { parts: vec![c.clone()], entropy: single });
    }

    // Exact equal split when the count divides the dyadic weight evenly.
    if count.is_power_of_two() {
        let d = c.mul(&Dyadic::power_of_two(-i64::from(count.trailing_zeros())));
        let e = family_entropy(c, &d, count, p);
        if within(&e, s, tol) {
            return Ok(SplitOutcome { parts: family_parts(c, &d, count), entropy: e });
        }
    }

    // Bisect the free knob d in (0, c/count]: the family entropy increases
    // with d on this range, from the single-part minimum up to the equal
    // split value.
    let mut hi = {
        // Dyadic floor of c/count at generous precision.
        let extra = u64::from(p) + 64;
        let numer = (c.numer() << extra) / num_bigint::BigInt::from(count);
        Dyadic::new(numer, c.exp() + extra)
    };
    let e_hi = family_entropy(c, &hi, count, p);
    if e_hi.ge(&RealInterval::point(s.clone())) == Decision::False {
        // The equal split exceeds s by less than the rounding gap, which
        // is far inside the tolerance window.
        return Ok(SplitOutcome { parts: family_parts(c, &hi, count), entropy: e_hi });
    }
    let mut lo = hi.half();
    loop {
        let e = family_entropy(c, &lo, count, p);
        match e.ge(&RealInterval::point(s.clone())) {
            Decision::False => break,
            Decision::Unknown => {
                return Ok(SplitOutcome { parts: family_parts(c, &lo, count), entropy: e })
            }
            Decision::True => {
                hi = lo.clone();
                lo = lo.half();
            }
        }
    }
    let cap = 4 * p + 80;
    let mut mid = lo.midpoint(&hi);
    for _ in 0..cap {
        let e = family_entropy(c, &mid, count, p);
        if within(&e, s, tol) {
            return Ok(SplitOutcome { parts: family_parts(c, &mid, count), entropy: e });
        }
        match e.ge(&RealInterval::point(s.clone())) {
            Decision::True => hi = mid,
            Decision::False => lo = mid,
            // Straddling s at working precision means the value is within
            // interval width of the target, far inside tol.
            Decision::Unknown => {
                return Ok(SplitOutcome { parts: family_parts(c, &mid, count), entropy: e })
            }
        }
        mid = lo.midpoint(&hi);
    }
    let e = family_entropy(c, &mid, count, p);
    debug_assert!(within(&e, s, tol), "bisection failed to converge");
    Ok(SplitOutcome { parts: family_parts(c, &mid, count), entropy: e })
}

/// Where the Ω approximations come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum OmegaSource {
    /// Kraft sums of the machine's own halting prefixes at a growing
    /// budget schedule; genuine lower approximations of this machine's
    /// halting probability.
    MachineDerived { schedule: Vec<Budget> },
    /// An explicit table Ω_1, Ω_2, …
    Table(Vec<Dyadic>),
}

impl OmegaSource {
    fn sequence(&self, need: usize) -> Result<Vec<Dyadic>, AppendixError> {
        let seq: Vec<Dyadic> = match self {
            OmegaSource::MachineDerived { schedule } => {
                if schedule.len() < need {
                    return Err(AppendixError::ScheduleTooShort {
                        have: schedule.len(),
                        need,
                    });
                }
                schedule[..need].iter().map(|b| omega_lower(b).value).collect()
            }
            OmegaSource::Table(t) => {
                if t.len() < need {
                    return Err(AppendixError::ScheduleTooShort { have: t.len(), need });
                }
                t[..need].to_vec()
            }
        };
        if !seq[0].is_zero() {
            return Err(AppendixError::OmegaStart);
        }
        for i in 1..seq.len() {
            if seq[i] < seq[i - 1] {
                return Err(AppendixError::DecreasingOmega { index: i });
            }
        }
        Ok(seq)
    }
}

/// A budget ladder whose Kraft sums are non-decreasing (each budget
/// dominates the previous), starting from the empty budget so that
/// Ω_1 = 0.
///
/// Block n can only absorb an increment of roughly k·2^(-n) with 2^k
/// parts, so the ladder must front-load its growth: it climbs for eight
/// rungs and then freezes, making later increments exactly zero.  The
/// partial entropies then converge to 2 plus the frozen rung's Kraft
/// sum, a genuine lower approximation of the halting probability.
pub fn default_omega_schedule(count: usize) -> Vec<Budget> {
    const LADDER: [(u32, u64); 9] = [
        (0, 0),
        (3, 10),
        (5, 32),
        (7, 64),
        (8, 64),
        (9, 96),
        (10, 128),
        (11, 160),
        (12, 256),
    ];
    (0..count)
        .map(|i| {
            let (l, f) = LADDER[i.min(LADDER.len() - 1)];
            Budget::new(l, f)
        })
        .collect()
}

/// One realized class of the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppendixBlock {
    pub n: u32,
    /// n·2^(−n) + (Ω_{n+1} − Ω_n), what the block's entropy aims for.
    pub target_entropy: Dyadic,
    /// Weights on the first strings of class n, summing to exactly 2^(−n).
    pub parts: Vec<(BitString, Dyadic)>,
    pub entropy: RealInterval,
}

/// The first N blocks of the construction with their realized entropy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialAppendixEnsemble {
    pub n_blocks: u32,
    pub blocks: Vec<AppendixBlock>,
    /// Encloses Σ_{n≤N} n·2^(−n) + Ω_{N+1} up to the splitting tolerance;
    /// converges to 2 + Ω at rate (N+2)·2^(−N).
    pub partial_entropy: RealInterval,
    /// Sum of the per-block splitting tolerances: the realized entropy may
    /// sit this far from its target on top of the interval width, because
    /// the dyadic weights only approximate the ideal real-valued split.
    pub tolerance: Dyadic,
    pub omega_seq_used: Vec<Dyadic>,
}

/// Builds blocks 1..=N.  Block n holds total weight 2^(−n) on the first
/// strings of class n, split so its entropy hits n·2^(−n) plus the n-th
/// Ω increment; per-block tolerance 2^(−precision−n) keeps the summed
/// error below 2^(−precision).
pub fn build_appendix_ensemble(
    n_blocks: u32,
    source: &OmegaSource,
    precision: u32,
) -> Result<PartialAppendixEnsemble, AppendixError> {
    assert!(n_blocks >= 1, "at least one block");
    let omegas = source.sequence(n_blocks as usize + 1)?;
    let mut blocks = Vec::with_capacity(n_blocks as usize);
    let mut partial = RealInterval::zero();
    let mut tolerance = Dyadic::zero();
    for n in 1..=n_blocks {
        let c = Dyadic::power_of_two(-i64::from(n));
        let step = omegas[n as usize].sub(&omegas[n as usize - 1]);
        let target = c.mul_int(u64::from(n)).add(&step);
        let tol = Dyadic::power_of_two(-i64::from(precision) - i64::from(n));
        let split = split_weight(&c, &target, &tol, precision)?;
        let strings = class_strings(n, split.parts.len());
        partial = partial.add(&split.entropy);
        tolerance = tolerance.add(&tol);
        blocks.push(AppendixBlock {
            n,
            target_entropy: target,
            parts: strings.into_iter().zip(split.parts).collect(),
            entropy: split.entropy,
        });
    }
    Ok(PartialAppendixEnsemble {
        n_blocks,
        blocks,
        partial_entropy: partial,
        tolerance,
        omega_seq_used: omegas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::dyadic::parse_dyadic;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        parse_dyadic(s).unwrap()
    }

    #[test]
    fn partition_index_frozen() {
        assert_eq!(partition_index(&bits("")), 1);
        assert_eq!(partition_index(&bits("1")), 1);
        assert_eq!(partition_index(&bits("10")), 1);
        assert_eq!(partition_index(&bits("0")), 2);
        assert_eq!(partition_index(&bits("011")), 2);
        assert_eq!(partition_index(&bits("00")), 3);
        assert_eq!(partition_index(&bits("0001")), 4);
    }

    #[test]
    fn partition_covers_everything_once() {
        // Classes tile the strings: membership by index agrees with the
        // generator, and within a length class sizes add up.
        for len in 0..=10u32 {
            let mut count = 0usize;
            for x in BitString::strings_of_length(len) {
                let n = partition_index(&x);
                assert!(n <= len + 1);
                count += 1;
                let among = class_strings(n, 1 << 12);
                assert!(among.contains(&x), "{x} missing from class {n}");
            }
            assert_eq!(count, 1usize << len);
        }
    }

    #[test]
    fn class_strings_are_canonical_and_distinct() {
        for n in 1..=4u32 {
            let v = class_strings(n, 20);
            assert_eq!(v.len(), 20);
            for w in v.windows(2) {
                assert!(w[0] < w[1], "class {n} not in canonical order");
            }
            assert!(v.iter().all(|x| partition_index(x) == n));
        }
        // First members match the construction by hand.
        assert_eq!(class_strings(1, 4), vec![bits(""), bits("1"), bits("10"), bits("11")]);
        assert_eq!(class_strings(2, 3), vec![bits("0"), bits("01"), bits("010")]);
        assert_eq!(class_strings(3, 2), vec![bits("00"), bits("001")]);
    }

    #[test]
    fn split_frozen_examples() {
        let tol = d("1/2^30");
        let half = d("1/2^1");

        let fair = split_weight(&Dyadic::one(), &Dyadic::one(), &tol, 32).unwrap();
        assert_eq!(fair.parts, vec![half.clone(), half.clone()]);
        assert!(fair.entropy.is_point());
        assert_eq!(fair.entropy.lo(), &Dyadic::one());

        let single = split_weight(&half, &half, &tol, 32).unwrap();
        assert_eq!(single.parts, vec![half.clone()]);

        let quad = split_weight(&half, &d("3/2^1"), &tol, 32).unwrap();
        assert_eq!(quad.parts, vec![d("1/2^3"); 4]);
        assert!(quad.entropy.is_point());
        assert_eq!(quad.entropy.lo(), &d("3/2^1"));
    }

    #[test]
    fn split_rejects_infeasible_targets() {
        let tol = d("1/2^30");
        let err = split_weight(&d("1/2^1"), &d("1/2^2"), &tol, 32).unwrap_err();
        assert!(matches!(err, AppendixError::Infeasible { .. }));
        let err = split_weight(&d("3/2^1"), &Dyadic::one(), &tol, 32).unwrap_err();
        assert!(matches!(err, AppendixError::BadWeight { .. }));
    }

    #[test]
    fn split_hits_irrational_targets_within_tol() {
        // Targets strictly between equal-split levels force bisection.
        let tol = d("1/2^30");
        for (c, s) in [
            (d("1/2^1"), d("5/2^3")),
            (d("1/2^1"), d("11/2^3")),
            (d("3/2^2"), d("1/2^1")),
            (d("1/2^2"), d("3/2^2")),
        ] {
            let out = split_weight(&c, &s, &tol, 32).unwrap();
            let total = out.parts.iter().fold(Dyadic::zero(), |a, p| a.add(p));
            assert_eq!(total, c, "parts must sum exactly");
            assert!(out.parts.iter().all(|p| p.is_positive()));
            assert!(within(&out.entropy, &s, &tol), "entropy off target for {c} {s}");
        }
    }

    #[test]
    fn default_schedule_prefix_and_omegas() {
        let sched = default_omega_schedule(3);
        assert_eq!(sched[0], Budget::new(0, 0));
        assert_eq!(sched[1], Budget::new(3, 10));
        assert_eq!(sched[2], Budget::new(5, 32));
        let source = OmegaSource::MachineDerived { schedule: sched };
        let seq = source.sequence(3).unwrap();
        assert_eq!(seq, vec![Dyadic::zero(), d("1/2^3"), d("3/2^4")]);
        // Budgets keep dominating, so the sums keep growing.
        let longer = default_omega_schedule(12);
        for w in longer.windows(2) {
            assert!(w[1].dominates(&w[0]));
        }
    }

    #[test]
    fn single_block_with_zero_omega_step() {
        let src = OmegaSource::Table(vec![Dyadic::zero(), Dyadic::zero()]);
        let e = build_appendix_ensemble(1, &src, 32).unwrap();
        assert_eq!(e.blocks.len(), 1);
        let block = &e.blocks[0];
        assert_eq!(block.parts, vec![(bits(""), d("1/2^1"))]);
        assert_eq!(e.partial_entropy, RealInterval::point(d("1/2^1")));
    }

    #[test]
    fn zero_omega_gives_exact_partial_entropy() {
        // With every step zero each block needs a single part, so the
        // partial entropy is the closed-form 2 − (N+2)·2^(−N), exactly.
        let n = 12u32;
        let src = OmegaSource::Table(vec![Dyadic::zero(); n as usize + 1]);
        let e = build_appendix_ensemble(n, &src, 32).unwrap();
        let expect = Dyadic::from_int(2)
            .sub(&Dyadic::power_of_two(-i64::from(n)).mul_int(u64::from(n) + 2));
        assert_eq!(e.partial_entropy, RealInterval::point(expect));
        for block in &e.blocks {
            assert_eq!(block.parts.len(), 1);
        }
    }

    #[test]
    fn convergence_bound_holds_with_machine_omegas() {
        let n = 10u32;
        let src = OmegaSource::MachineDerived {
            schedule: default_omega_schedule(n as usize + 1),
        };
        let e = build_appendix_ensemble(n, &src, 32).unwrap();
        // |partial − (2 + Ω_{N+1})| ≤ (N+2)·2^(−N) + width + tolerance.
        let limit = Dyadic::from_int(2).add(e.omega_seq_used.last().unwrap());
        let tail = Dyadic::power_of_two(-i64::from(n))
            .mul_int(u64::from(n) + 2)
            .add(&e.partial_entropy.width())
            .add(&e.tolerance);
        let gap_hi = e.partial_entropy.hi().sub(&limit);
        let gap_lo = limit.sub(e.partial_entropy.lo());
        assert!(gap_hi <= tail && gap_lo <= tail, "convergence bound violated");
        // Block weights sum to exactly 2^(−n) each.
        for block in &e.blocks {
            let total = block.parts.iter().fold(Dyadic::zero(), |a, (_, p)| a.add(p));
            assert_eq!(total, Dyadic::power_of_two(-i64::from(block.n)));
        }
    }

    #[test]
    fn bad_omega_sequences_are_rejected() {
        let start = OmegaSource::Table(vec![d("1/2^3"), d("1/2^2")]);
        assert_eq!(
            build_appendix_ensemble(1, &start, 32).unwrap_err(),
            AppendixError::OmegaStart
        );
        let dec = OmegaSource::Table(vec![Dyadic::zero(), d("1/2^2"), d("1/2^3")]);
        assert_eq!(
            build_appendix_ensemble(2, &dec, 32).unwrap_err(),
            AppendixError::DecreasingOmega { index: 2 }
        );
        let short = OmegaSource::Table(vec![Dyadic::zero()]);
        assert_eq!(
            build_appendix_ensemble(1, &short, 32).unwrap_err(),
            AppendixError::ScheduleTooShort { have: 1, need: 2 }
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn split_posts_on_random_feasible_pairs(ke in 1u64..16, e in 1u32..10, bump in 0u64..12) {
            // c = odd/2^e in (0,1]; s between the single-part minimum and
            // a level a few equal-split doublings up.
            let c = Dyadic::from_ratio(2 * ke - 1, e);
            prop_assume!(c <= Dyadic::one());
            let tol = d("1/2^30");
            let single = neg_w_log2_w(&c, 48);
            let s = single.hi().add(&c.mul_int(bump).half().half());
            let out = split_weight(&c, &s, &tol, 32).unwrap();
            let total = out.parts.iter().fold(Dyadic::zero(), |a, p| a.add(p));
            prop_assert_eq!(total, c);
            prop_assert!(out.parts.iter().all(|p| p.is_positive()));
            prop_assert!(out.parts.len() as u64 <= PART_CAP);
            prop_assert!(within(&out.entropy, &s, &tol));
        }
    }
}
