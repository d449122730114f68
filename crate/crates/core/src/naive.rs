//! Deliberately simple reference implementations used to validate the
//! optimized engines.
//!
//! Everything here recomputes quantities straight from their definitions:
//! complexity tables by running every program through the public machine
//! API one at a time, halting-probability sums by adding `2^-len` per
//! halting program, and logarithms by a fixed-point arctanh series carried
//! to far more bits than the interval arithmetic ever claims.  None of it
//! shares code with the enumerator or the interval module, so agreement
//! between the two paths is meaningful evidence rather than an identity.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::vm::{run_plain_with_aux, run_prefix, Budget, MachineKind, RunStatus};

/// Minimal-program statistics for one output, accumulated by brute force.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveEntry {
    pub min_len: u32,
    /// Lexicographically least program among those of minimal length.
    pub witness: BitString,
    pub min_steps_at_min_len: u64,
    pub min_steps_any: u64,
}

/// Runs every program of length at most `budget.max_len` and folds the
/// halting ones into per-output minima.  For the prefix machine a program
/// counts only if it halts consuming exactly its own length.
pub fn naive_table(
    kind: MachineKind,
    budget: &Budget,
    aux: &BitString,
) -> BTreeMap<BitString, NaiveEntry> {
    let mut table: BTreeMap<BitString, NaiveEntry> = BTreeMap::new();
    for len in 0..=budget.max_len {
        for p in BitString::strings_of_length(len) {
            let r = match kind {
                MachineKind::Plain => run_plain_with_aux(&p, aux, budget.max_steps),
                MachineKind::Prefix => run_prefix(&p, aux, budget.max_steps),
            };
            if r.status != RunStatus::Halted {
                continue;
            }
            if kind == MachineKind::Prefix && r.consumed != u64::from(len) {
                continue;
            }
            match table.get_mut(&r.output) {
                None => {
                    table.insert(
                        r.output.clone(),
                        NaiveEntry {
                            min_len: len,
                            witness: p,
                            min_steps_at_min_len: r.steps,
                            min_steps_any: r.steps,
                        },
                    );
                }
                Some(e) => {
                    // Lengths arrive in increasing order and, within a
                    // length, in lexicographic order, so the stored witness
                    // is already canonical; only the step minima can move.
                    if len == e.min_len {
                        e.min_steps_at_min_len = e.min_steps_at_min_len.min(r.steps);
                    }
                    e.min_steps_any = e.min_steps_any.min(r.steps);
                }
            }
        }
    }
    table
}

/// Lower approximation of the halting probability: the sum of `2^-len(p)`
/// over every program in the budgeted prefix domain, computed term by term.
pub fn naive_omega(budget: &Budget) -> Dyadic {
    let mut total = Dyadic::zero();
    let aux = BitString::new();
    for len in 0..=budget.max_len {
        for p in BitString::strings_of_length(len) {
            let r = run_prefix(&p, &aux, budget.max_steps);
            if r.status == RunStatus::Halted && r.consumed == u64::from(len) {
                total = total.add(&Dyadic::power_of_two(-i64::from(len)));
            }
        }
    }
    total
}

const LN_SERIES_REDUCTION_MAX: u32 = 64;

/// `atanh(p/q) * 2^bits`, floor-truncated per term; requires `p/q <= 1/3`.
/// The truncated tail and the per-term floors together stay below
/// `2^-(bits-8)` of the true value.
fn atanh_fixed(p: &BigInt, q: &BigInt, bits: u32) -> BigInt {
    debug_assert!(!p.is_negative() && p * 3u32 <= *q);
    let p2 = p * p;
    let q2 = q * q;
    let mut pow = (p << bits) / q;
    let mut acc = BigInt::zero();
    let mut k = BigInt::one();
    while !pow.is_zero() {
        acc += &pow / &k;
        pow = (&pow * &p2) / &q2;
        k += 2;
    }
    acc
}

/// `ln(2) * 2^bits` via `ln 2 = 2 atanh(1/3)`.
fn ln2_fixed(bits: u32) -> BigInt {
    2 * atanh_fixed(&BigInt::one(), &BigInt::from(3u32), bits)
}

/// `ln(m) * 2^bits` for an integer `m >= 1`, by mantissa reduction:
/// `ln m = k ln 2 + 2 atanh((m - 2^k)/(m + 2^k))` with `k = floor(log2 m)`.
fn ln_u64_fixed(m: u64, bits: u32) -> BigInt {
    assert!(m >= 1);
    let k = 63 - m.leading_zeros();
    debug_assert!(k <= LN_SERIES_REDUCTION_MAX);
    let top = BigInt::one() << k;
    let p = BigInt::from(m) - &top;
    let q = BigInt::from(m) + &top;
    BigInt::from(k) * ln2_fixed(bits) + 2 * atanh_fixed(&p, &q, bits)
}

/// High-precision `log2` of a positive dyadic whose numerator fits in a
/// machine word.  The result is a single dyadic within `2^-(bits-16)` of the
/// true value; tests compare interval enclosures against it.
pub fn oracle_log2(q: &Dyadic, bits: u32) -> Dyadic {
    let (k, e) = q
        .to_ratio()
        .expect("oracle_log2 needs a positive dyadic with a word-sized numerator");
    let ln_k = ln_u64_fixed(k, bits);
    let log2_k = (ln_k << bits) / ln2_fixed(bits);
    let numer = log2_k - (BigInt::from(e) << bits);
    Dyadic::new(numer, u64::from(bits))
}

/// High-precision Shannon entropy of a weight vector (weights need not sum
/// to one; callers pass full distributions).  Within
/// `weights.len() * 2^-(bits-16)` of the true value.
pub fn oracle_entropy(weights: &[Dyadic], bits: u32) -> Dyadic {
    let mut total = Dyadic::zero();
    for w in weights {
        if w.is_zero() {
            continue;
        }
        let (k, e) = w
            .to_ratio()
            .expect("oracle_entropy needs weights in (0, 1] with word-sized numerators");
        // -w log2 w = w * (e - log2 k)
        let ln2 = ln2_fixed(bits);
        let log2_k = (ln_u64_fixed(k, bits) << bits) / ln2;
        let numer = BigInt::from(k) * ((BigInt::from(e) << bits) - log2_k);
        total = total.add(&Dyadic::new(numer, u64::from(bits) + u64::from(e)));
    }
    total
}

/// Error budget for comparing an interval against the oracle value.
pub fn oracle_slack(terms: u32, bits: u32) -> Dyadic {
    Dyadic::power_of_two(-(i64::from(bits) - 16)).mul_int(u64::from(terms.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::dyadic::parse_dyadic;
    use crate::interval::log2_interval;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        parse_dyadic(s).unwrap()
    }

    #[test]
    fn plain_table_small_budget() {
        let t = naive_table(MachineKind::Plain, &Budget::new(4, 64), &BitString::new());
        let empty = &t[&bits("")];
        assert_eq!(empty.min_len, 0);
        assert_eq!(empty.witness, bits(""));
        assert_eq!(empty.min_steps_any, 0);

        let zo = &t[&bits("01")];
        assert_eq!(zo.min_len, 4);
        assert_eq!(zo.witness, bits("0001"));
        assert_eq!(zo.min_steps_at_min_len, 2);

        assert_eq!(t[&bits("0")].min_len, 2);
        assert_eq!(t[&bits("0")].witness, bits("00"));
    }

    #[test]
    fn prefix_table_small_budget() {
        let t = naive_table(MachineKind::Prefix, &Budget::new(5, 64), &BitString::new());
        assert_eq!(t[&bits("")].min_len, 3);
        assert_eq!(t[&bits("")].witness, bits("100"));
        assert_eq!(t[&bits("")].min_steps_at_min_len, 1);
        assert_eq!(t[&bits("0")].min_len, 5);
        assert_eq!(t[&bits("0")].witness, bits("00100"));
        assert_eq!(t[&bits("1")].min_len, 5);
        assert_eq!(t[&bits("1")].witness, bits("01100"));
        // Nothing longer than one bit fits in five program bits.
        assert!(t.keys().all(|x| x.len() <= 1));
    }

    #[test]
    fn conditional_table_ignores_aux_cost_advantage() {
        // Copying an aux bit costs four program bits; writing it directly
        // costs two, so conditioning cannot shorten one-bit outputs.
        let t = naive_table(MachineKind::Prefix, &Budget::new(8, 64), &bits("1"));
        assert_eq!(t[&bits("1")].min_len, 5);
        assert_eq!(t[&bits("1")].witness, bits("01100"));
    }

    #[test]
    fn omega_lower_sums() {
        assert_eq!(naive_omega(&Budget::new(3, 10)), d("1/2^3"));
        assert_eq!(naive_omega(&Budget::new(5, 32)), d("3/2^4"));
    }

    #[test]
    fn oracle_log2_matches_frozen_constant() {
        let got = oracle_log2(&Dyadic::from_int(3), 160);
        let want = d("14276073055288016/2^53");
        let err = got.sub(&want);
        assert!(err >= Dyadic::zero());
        assert!(err < Dyadic::power_of_two(-52));
    }

    #[test]
    fn oracle_entropy_matches_known_value() {
        let h = oracle_entropy(&[d("3/2^2"), d("1/2^2")], 160);
        let known = 2.0 - 0.75 * 3f64.log2();
        assert!((h.to_f64_lossy() - known).abs() < 1e-12);
    }

    #[test]
    fn oracle_entropy_exact_zero_for_point_mass() {
        assert_eq!(oracle_entropy(&[Dyadic::one()], 160), Dyadic::zero());
    }

    proptest! {
        #[test]
        fn interval_log2_encloses_oracle(k in 1u64..100_000, e in 0u32..40) {
            let q = Dyadic::from_ratio(k, e);
            prop_assume!(q.is_positive());
            let iv = log2_interval(&q, 48);
            let oracle = oracle_log2(&q, 160);
            let slack = oracle_slack(1, 160);
            prop_assert!(iv.lo() <= &oracle.add(&slack));
            prop_assert!(&oracle.sub(&slack) <= iv.hi());
        }
    }
}
