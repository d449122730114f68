//! Finite-support probability ensembles with exact dyadic weights.
//!
//! Restricting weights to dyadic rationals keeps every probability
//! comparison exact and every minimization domain finite, while entropies
//! (irrational in general) are enclosed in dyadic intervals.  The wire
//! format is canonical: a given ensemble has exactly one encoding, so
//! equality of ensembles is equality of bit strings, and the prefix
//! complexity of an ensemble is well defined as the complexity of its
//! encoding.
//!
//! Wire formats:
//!   ensemble: gamma(m) then, per entry in canonical string order,
//!             encode_string(x), gamma(e+1), gamma(k) for weight k/2^e in
//!             lowest terms (k odd);
//!   set:      gamma(m+1) then sorted encode_string entries (m may be 0).

use std::collections::BTreeSet;

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitString;
use crate::codec::{encode_string, gamma_encode, BitReader, CodecError};
use crate::dyadic::Dyadic;
use crate::enumerator::complexity_table;
use crate::interval::{log2_interval, log2_nat, neg_w_log2_w, Decision, RealInterval};
use crate::vm::{Budget, MachineKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("ensemble encoding is not canonical: {0}")]
    NotCanonical(&'static str),
    #[error("weights sum to {got} instead of 1")]
    BadSum { got: Dyadic },
    #[error("bit stream ended before the encoding was complete")]
    Truncated,
}

impl From<CodecError> for ParseError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Truncated => ParseError::Truncated,
            CodecError::Overflow => ParseError::NotCanonical("integer field overflows"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnsembleError {
    #[error("weight for {string} is not in (0, 1]")]
    BadWeight { string: BitString },
    #[error("weights sum to {got} instead of 1")]
    BadSum { got: Dyadic },
    #[error("mixture coefficient is not in (0, 1]")]
    BadCoefficient,
    #[error("mixture coefficients sum to {got} instead of 1")]
    BadCoefficientSum { got: Dyadic },
}

/// A probability distribution on finitely many binary strings, weights
/// exact dyadic, entries sorted canonically, weights summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ensemble {
    entries: Vec<(BitString, Dyadic)>,
}

impl Ensemble {
    /// Point mass on `x`.
    pub fn dirac(x: &BitString) -> Self {
        Self { entries: vec![(x.clone(), Dyadic::one())] }
    }

    /// Builds an ensemble from (string, weight) pairs: duplicates are
    /// merged additively, entries sorted canonically, and the result is
    /// rejected unless every weight lands in (0,1] and the total is 1.
    pub fn from_weights(
        weights: impl IntoIterator<Item = (BitString, Dyadic)>,
    ) -> Result<Self, EnsembleError> {
        let mut map: std::collections::BTreeMap<BitString, Dyadic> = Default::default();
        for (s, w) in weights {
            let slot = map.entry(s).or_insert_with(Dyadic::zero);
            *slot = slot.add(&w);
        }
        let mut total = Dyadic::zero();
        for (s, w) in &map {
            if !w.is_positive() || *w > Dyadic::one() {
                return Err(EnsembleError::BadWeight { string: s.clone() });
            }
            total = total.add(w);
        }
        if total != Dyadic::one() {
            return Err(EnsembleError::BadSum { got: total });
        }
        Ok(Self { entries: map.into_iter().collect() })
    }

    /// Uniform distribution on `set`, available exactly when the size is a
    /// power of two (otherwise 1/m is not dyadic; see [`UniformEnsemble`]).
    pub fn uniform_on(set: &BTreeSet<BitString>) -> Option<Self> {
        let m = set.len();
        if m == 0 || !m.is_power_of_two() {
            return None;
        }
        let e = m.trailing_zeros();
        let w = Dyadic::from_ratio(1, e);
        Some(Self { entries: set.iter().map(|s| (s.clone(), w.clone())).collect() })
    }

    /// Probability of `x` (zero off support).
    pub fn weight(&self, x: &BitString) -> Dyadic {
        match self.entries.binary_search_by(|(s, _)| s.cmp(x)) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => Dyadic::zero(),
        }
    }

    pub fn entries(&self) -> &[(BitString, Dyadic)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = &BitString> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Shannon entropy enclosed in an interval of width at most
    /// `2^(-precision+2)`.  Exact (a point) when every weight is a power of
    /// two, since then each term -w log w = e/2^e is itself dyadic.
    pub fn entropy(&self, precision: u32) -> RealInterval {
        let mut total = RealInterval::point(Dyadic::zero());
        for (_, w) in &self.entries {
            total = total.add(&neg_w_log2_w(w, precision));
        }
        total
    }

    /// Canonical bit encoding; see the module docs for the layout.
    pub fn serialize(&self) -> BitString {
        let mut out = gamma_encode(self.entries.len() as u64);
        for (s, w) in &self.entries {
            let (k, e) = w
                .to_ratio()
                .expect("canonical ensemble weights have word-sized numerators");
            out.extend_from(&encode_string(s));
            out.extend_from(&gamma_encode(u64::from(e) + 1));
            out.extend_from(&gamma_encode(k));
        }
        out
    }

    /// Strict inverse of [`serialize`]: rejects anything but the canonical
    /// encoding, including reordered entries, non-lowest-terms weights,
    /// weight sums other than 1, and trailing bits.
    pub fn parse(b: &BitString) -> Result<Self, ParseError> {
        let mut r = BitReader::new(b);
        let m = r.read_gamma()?;
        let mut entries = Vec::with_capacity(m as usize);
        let mut total = Dyadic::zero();
        let mut prev: Option<BitString> = None;
        for _ in 0..m {
            let s = r.read_string()?;
            if let Some(p) = &prev {
                if *p >= s {
                    return Err(ParseError::NotCanonical("entries out of order"));
                }
            }
            let e = r.read_gamma()? - 1;
            let k = r.read_gamma()?;
            if k % 2 == 0 {
                return Err(ParseError::NotCanonical("weight not in lowest terms"));
            }
            let e32 = u32::try_from(e)
                .map_err(|_| ParseError::NotCanonical("weight exponent overflows"))?;
            let w = Dyadic::from_ratio(k, e32);
            if w > Dyadic::one() {
                return Err(ParseError::NotCanonical("single weight exceeds 1"));
            }
            total = total.add(&w);
            prev = Some(s.clone());
            entries.push((s, w));
        }
        if !r.is_done() {
            return Err(ParseError::NotCanonical("trailing bits after entries"));
        }
        if total != Dyadic::one() {
            return Err(ParseError::BadSum { got: total });
        }
        Ok(Self { entries })
    }
}

impl Serialize for Ensemble {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Entry<'a>(&'a BitString, &'a Dyadic);
        impl Serialize for Entry<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let (num, exp) = self.1.to_ratio().ok_or_else(|| {
                    serde::ser::Error::custom("ensemble weight numerator exceeds word size")
                })?;
                let mut st = serializer.serialize_struct("Entry", 3)?;
                st.serialize_field("s", &self.0)?;
                st.serialize_field("num", &num)?;
                st.serialize_field("exp", &exp)?;
                st.end()
            }
        }
        struct Entries<'a>(&'a [(BitString, Dyadic)]);
        impl Serialize for Entries<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
                for (s, w) in self.0 {
                    seq.serialize_element(&Entry(s, w))?;
                }
                seq.end()
            }
        }
        let mut st = serializer.serialize_struct("Ensemble", 1)?;
        st.serialize_field("entries", &Entries(&self.entries))?;
        st.end()
    }
}

/// Prefix complexity of the ensemble's canonical encoding within budget.
pub fn ensemble_k(e: &Ensemble, budget: &Budget) -> Option<u32> {
    complexity_table(MachineKind::Prefix, &BitString::new(), budget).complexity(&e.serialize())
}

/// Total information: complexity plus entropy, as an interval shifted by
/// the integer complexity.  Point interval for point-entropy ensembles.
pub fn total_information(e: &Ensemble, budget: &Budget, precision: u32) -> Option<RealInterval> {
    let k = ensemble_k(e, budget)?;
    let k = RealInterval::point(Dyadic::from_int(i64::from(k)));
    Some(k.add(&e.entropy(precision)))
}

/// Outcome of a typicality decision, including whether interval refinement
/// had to give up and apply the inclusive tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypicalityResult {
    pub typical: bool,
    /// True when the comparison was still straddling at maximal precision
    /// and the inclusive rule decided it.
    pub ambiguous: bool,
    pub precision_used: u32,
}

// Decides log2 E(x) >= -(H(E))*(1+delta) - shift by interval refinement,
// doubling precision until the comparison resolves or 8x the starting
// precision is reached.
fn refine_weight_vs_entropy(
    w: &Dyadic,
    e: &Ensemble,
    delta: &Dyadic,
    shift: &Dyadic,
    precision: u32,
) -> (Decision, u32) {
    let scale = Dyadic::one().add(delta);
    let mut p = precision.max(16);
    loop {
        let lhs = log2_interval(w, p);
        let rhs = e
            .entropy(p)
            .scale_nonneg(&scale)
            .neg()
            .sub(&RealInterval::point(shift.clone()));
        let d = lhs.ge(&rhs);
        if d != Decision::Unknown || p >= precision.max(16) * 8 {
            return (d, p);
        }
        p *= 2;
    }
}

/// Is `x` δ-typical for `e`: does E(x) ≥ 2^(−H(E)(1+δ)) hold?  Decided by
/// exact interval refinement; a comparison still unresolved at maximal
/// precision counts as typical (inclusive tie-break) and is flagged.
pub fn is_typical_detailed(
    x: &BitString,
    e: &Ensemble,
    delta: &Dyadic,
    precision: u32,
) -> TypicalityResult {
    assert!(!delta.is_negative(), "delta must be non-negative");
    let w = e.weight(x);
    if w.is_zero() {
        // The threshold 2^(-H(1+delta)) is strictly positive.
        return TypicalityResult { typical: false, ambiguous: false, precision_used: precision };
    }
    let (d, used) = refine_weight_vs_entropy(&w, e, delta, &Dyadic::zero(), precision);
    match d {
        Decision::True => TypicalityResult { typical: true, ambiguous: false, precision_used: used },
        Decision::False => {
            TypicalityResult { typical: false, ambiguous: false, precision_used: used }
        }
        Decision::Unknown => {
            TypicalityResult { typical: true, ambiguous: true, precision_used: used }
        }
    }
}

pub fn is_typical(x: &BitString, e: &Ensemble, delta: &Dyadic, precision: u32) -> bool {
    is_typical_detailed(x, e, delta, precision).typical
}

/// Result of converting an ensemble to a set of sufficiently probable
/// members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetConversion {
    pub set: BTreeSet<BitString>,
    /// Members admitted through the ε slack: their weight was not certified
    /// against the main threshold, only against the floor.
    pub ambiguous_included: Vec<BitString>,
}

/// Converts an ensemble to the set of its δ-typical members (filtered by
/// the constraint), with two-sided guarantees: everything at or above the
/// main threshold 2^(−H(1+δ)) is included, and everything included is at or
/// above the floor 2^(−H(1+δ)−ε).  Comparisons unresolved against the main
/// threshold are included on the strength of the ε slack and reported.
pub fn ensemble_to_set(
    e: &Ensemble,
    delta: &Dyadic,
    epsilon: &Dyadic,
    constraint: &ConstraintSet,
    precision: u32,
) -> SetConversion {
    assert!(epsilon.is_positive(), "epsilon must be positive");
    assert!(!delta.is_negative(), "delta must be non-negative");
    let mut set = BTreeSet::new();
    let mut ambiguous_included = Vec::new();
    for (s, w) in e.entries() {
        if !constraint.dirac_member(s) {
            continue;
        }
        let (main, _) = refine_weight_vs_entropy(w, e, delta, &Dyadic::zero(), precision);
        match main {
            Decision::True => {
                set.insert(s.clone());
            }
            Decision::False => {}
            Decision::Unknown => {
                // The weight straddles the main threshold, so it is within
                // interval width of it and comfortably above the floor.
                set.insert(s.clone());
                ambiguous_included.push(s.clone());
            }
        }
    }
    SetConversion { set, ambiguous_included }
}

/// Convex mixture of ensembles with dyadic coefficients in (0,1] summing
/// to exactly 1.
pub fn mix(parts: &[(Ensemble, Dyadic)]) -> Result<Ensemble, EnsembleError> {
    let mut total = Dyadic::zero();
    for (_, lambda) in parts {
        if !lambda.is_positive() || *lambda > Dyadic::one() {
            return Err(EnsembleError::BadCoefficient);
        }
        total = total.add(lambda);
    }
    if total != Dyadic::one() {
        return Err(EnsembleError::BadCoefficientSum { got: total });
    }
    let mut weights: Vec<(BitString, Dyadic)> = Vec::new();
    for (e, lambda) in parts {
        for (s, w) in e.entries() {
            weights.push((s.clone(), w.mul(lambda)));
        }
    }
    Ensemble::from_weights(weights)
}

/// Canonical encoding of a finite set of strings.
pub fn serialize_set(set: &BTreeSet<BitString>) -> BitString {
    let mut out = gamma_encode(set.len() as u64 + 1);
    for s in set {
        out.extend_from(&encode_string(s));
    }
    out
}

/// Strict inverse of [`serialize_set`].
pub fn parse_set(b: &BitString) -> Result<BTreeSet<BitString>, ParseError> {
    let mut r = BitReader::new(b);
    let m = r.read_gamma()? - 1;
    let mut set = BTreeSet::new();
    let mut prev: Option<BitString> = None;
    for _ in 0..m {
        let s = r.read_string()?;
        if let Some(p) = &prev {
            if *p >= s {
                return Err(ParseError::NotCanonical("set entries out of order"));
            }
        }
        prev = Some(s.clone());
        set.insert(s);
    }
    if !r.is_done() {
        return Err(ParseError::NotCanonical("trailing bits after set entries"));
    }
    Ok(set)
}

/// Uniform distribution on an arbitrary nonempty finite set.  For sizes
/// that are not powers of two the member weight 1/m is not dyadic, so this
/// lives outside [`Ensemble`]; all its quantities are still exact or
/// exactly enclosed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniformEnsemble {
    set: BTreeSet<BitString>,
}

impl UniformEnsemble {
    pub fn new(set: BTreeSet<BitString>) -> Option<Self> {
        (!set.is_empty()).then_some(Self { set })
    }

    pub fn support(&self) -> &BTreeSet<BitString> {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.set.contains(x)
    }

    /// Entropy is exactly log2 of the size: a point for powers of two,
    /// otherwise a width-controlled enclosure.
    pub fn entropy(&self, precision: u32) -> RealInterval {
        log2_nat(self.set.len() as u64, precision)
    }

    /// Every member has weight 1/m = 2^(−log2 m) = 2^(−H), which meets the
    /// typicality threshold 2^(−H(1+δ)) for every δ ≥ 0 with exact
    /// equality at δ = 0; no interval refinement is needed.
    pub fn is_typical(&self, x: &BitString) -> bool {
        self.set.contains(x)
    }

    /// The canonical set encoding stands in for the ensemble encoding.
    pub fn serialize(&self) -> BitString {
        serialize_set(&self.set)
    }

    pub fn k(&self, budget: &Budget) -> Option<u32> {
        complexity_table(MachineKind::Prefix, &BitString::new(), budget)
            .complexity(&self.serialize())
    }

    /// Total information K + log2 m, an interval around the exact value.
    pub fn total_information(&self, budget: &Budget, precision: u32) -> Option<RealInterval> {
        let k = self.k(budget)?;
        Some(RealInterval::point(Dyadic::from_int(i64::from(k))).add(&self.entropy(precision)))
    }

    /// Exact dyadic form, available iff the size is a power of two.
    pub fn to_dyadic_ensemble(&self) -> Option<Ensemble> {
        Ensemble::uniform_on(&self.set)
    }
}

/// A dyadic-valued observable on strings, used by interval constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// Indicator of the strings of length `n`.
    LengthIndicator { n: u32 },
}

impl Observable {
    pub fn eval(&self, s: &BitString) -> Dyadic {
        match self {
            Observable::LengthIndicator { n } => {
                if s.len() as u32 == *n {
                    Dyadic::one()
                } else {
                    Dyadic::zero()
                }
            }
        }
    }

    fn id_bits(&self) -> BitString {
        match self {
            Observable::LengthIndicator { n } => {
                let mut b = gamma_encode(1);
                b.extend_from(&gamma_encode(u64::from(*n) + 1));
                b
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Observable::LengthIndicator { n } => format!("length-indicator({n})"),
        }
    }
}

/// How the per-ensemble interval around the expected observable value is
/// constructed.  Both rules contain the expectation by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IntervalRule {
    /// The interval is the single point {Σ E(s) f(s)}.
    ExactExpectation,
    /// The interval is [Σ E(s) f(s) − w, Σ E(s) f(s) + w].
    PlusMinus { halfwidth: Dyadic },
}

/// A decidable set of ensembles used to constrain effective-complexity
/// minimization.  Membership tests are exact dyadic arithmetic throughout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ConstraintSet {
    /// Every ensemble belongs.
    Unconstrained,
    /// All support strings have length exactly `n`.
    FixedLength { n: u32 },
    /// Anchored observable constraint: E belongs iff f(anchor) lies in the
    /// interval the rule builds around E's expectation of f.
    ObservableInterval {
        observable: Observable,
        rule: IntervalRule,
        anchor: BitString,
    },
}

impl ConstraintSet {
    pub fn unconstrained() -> Self {
        ConstraintSet::Unconstrained
    }

    pub fn fixed_length(n: u32) -> Self {
        ConstraintSet::FixedLength { n }
    }

    pub fn id(&self) -> String {
        match self {
            ConstraintSet::Unconstrained => "unconstrained".into(),
            ConstraintSet::FixedLength { n } => format!("fixed-length({n})"),
            ConstraintSet::ObservableInterval { observable, rule, anchor } => {
                let rule = match rule {
                    IntervalRule::ExactExpectation => "exact".to_string(),
                    IntervalRule::PlusMinus { halfwidth } => format!("±{halfwidth}"),
                };
                format!("observable({}, {rule}, anchor={anchor})", observable.describe())
            }
        }
    }

    fn expectation(observable: &Observable, e: &Ensemble) -> Dyadic {
        let mut total = Dyadic::zero();
        for (s, w) in e.entries() {
            total = total.add(&w.mul(&observable.eval(s)));
        }
        total
    }

    pub fn ensemble_member(&self, e: &Ensemble) -> bool {
        match self {
            ConstraintSet::Unconstrained => true,
            ConstraintSet::FixedLength { n } => e.support().all(|s| s.len() as u32 == *n),
            ConstraintSet::ObservableInterval { observable, rule, anchor } => {
                let expect = Self::expectation(observable, e);
                let at_anchor = observable.eval(anchor);
                match rule {
                    IntervalRule::ExactExpectation => at_anchor == expect,
                    IntervalRule::PlusMinus { halfwidth } => {
                        let diff = at_anchor.sub(&expect);
                        diff <= *halfwidth && diff >= halfwidth.neg()
                    }
                }
            }
        }
    }

    /// Exactly `ensemble_member(dirac(x))`, computed directly.
    pub fn dirac_member(&self, x: &BitString) -> bool {
        match self {
            ConstraintSet::Unconstrained => true,
            ConstraintSet::FixedLength { n } => x.len() as u32 == *n,
            ConstraintSet::ObservableInterval { observable, rule, anchor } => {
                let diff = observable.eval(anchor).sub(&observable.eval(x));
                match rule {
                    IntervalRule::ExactExpectation => diff.is_zero(),
                    IntervalRule::PlusMinus { halfwidth } => {
                        diff <= *halfwidth && diff >= halfwidth.neg()
                    }
                }
            }
        }
    }

    /// Membership for uniform distributions on arbitrary sets, where the
    /// member weight 1/m may be non-dyadic.  The observable comparison
    /// |f(anchor) − S/m| ≤ w is evaluated as |m·f(anchor) − S| ≤ m·w, which
    /// stays in exact dyadic arithmetic.
    pub fn uniform_member(&self, u: &UniformEnsemble) -> bool {
        match self {
            ConstraintSet::Unconstrained => true,
            ConstraintSet::FixedLength { n } => {
                u.support().iter().all(|s| s.len() as u32 == *n)
            }
            ConstraintSet::ObservableInterval { observable, rule, anchor } => {
                let m = u.len() as u64;
                let mut sum = Dyadic::zero();
                for s in u.support() {
                    sum = sum.add(&observable.eval(s));
                }
                let scaled_anchor = observable.eval(anchor).mul_int(m);
                let diff = scaled_anchor.sub(&sum);
                match rule {
                    IntervalRule::ExactExpectation => diff.is_zero(),
                    IntervalRule::PlusMinus { halfwidth } => {
                        let bound = halfwidth.mul_int(m);
                        diff <= bound && diff >= bound.neg()
                    }
                }
            }
        }
    }

    /// All shipped constraints are convex: unconstrained trivially, the
    /// others because membership is a linear condition on the weights.
    pub fn declared_convex(&self) -> bool {
        true
    }

    /// Canonical bit encoding of the constraint description, so that its
    /// own budgeted complexity can be measured (reported, never asserted).
    pub fn id_encoding(&self) -> BitString {
        match self {
            ConstraintSet::Unconstrained => gamma_encode(1),
            ConstraintSet::FixedLength { n } => {
                let mut b = gamma_encode(2);
                b.extend_from(&gamma_encode(u64::from(*n) + 1));
                b
            }
            ConstraintSet::ObservableInterval { observable, rule, anchor } => {
                let mut b = gamma_encode(3);
                b.extend_from(&observable.id_bits());
                match rule {
                    IntervalRule::ExactExpectation => b.extend_from(&gamma_encode(1)),
                    IntervalRule::PlusMinus { halfwidth } => {
                        b.extend_from(&gamma_encode(2));
                        let (k, e) = halfwidth
                            .to_ratio()
                            .expect("constraint halfwidth must be a small dyadic in [0,1]");
                        b.extend_from(&gamma_encode(u64::from(e) + 1));
                        b.extend_from(&gamma_encode(k.max(1)));
                    }
                }
                b.extend_from(&encode_string(anchor));
                b
            }
        }
    }

    /// Budgeted prefix complexity of the canonical description; None when
    /// the budget cannot produce it.
    pub fn description_complexity(&self, budget: &Budget) -> Option<u32> {
        complexity_table(MachineKind::Prefix, &BitString::new(), budget)
            .complexity(&self.id_encoding())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::dyadic::parse_dyadic;
    use crate::naive::{oracle_entropy, oracle_slack};
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        parse_dyadic(s).unwrap()
    }

    fn two_point() -> Ensemble {
        Ensemble::from_weights([(bits(""), d("3/2^2")), (bits("1"), d("1/2^2"))]).unwrap()
    }

    #[test]
    fn dirac_serialization_frozen() {
        assert_eq!(Ensemble::dirac(&bits("1")).serialize(), bits("1010111"));
        assert_eq!(Ensemble::dirac(&bits("")).serialize(), bits("1111"));
        assert_eq!(Ensemble::dirac(&bits("0")).serialize(), bits("1010011"));
    }

    #[test]
    fn roundtrip_on_small_ensembles() {
        let cases = [
            Ensemble::dirac(&bits("0110")),
            Ensemble::uniform_on(&[bits("0"), bits("1")].into_iter().collect()).unwrap(),
            two_point(),
            Ensemble::from_weights([
                (bits(""), d("1/2^1")),
                (bits("01"), d("1/2^2")),
                (bits("10"), d("1/2^3")),
                (bits("11"), d("1/2^3")),
            ])
            .unwrap(),
        ];
        for e in cases {
            assert_eq!(Ensemble::parse(&e.serialize()).unwrap(), e);
        }
    }

    #[test]
    fn parse_rejects_bad_sum() {
        // Single entry with weight 1/2: structurally canonical, wrong sum.
        let mut b = gamma_encode(1);
        b.extend_from(&encode_string(&bits("")));
        b.extend_from(&gamma_encode(2));
        b.extend_from(&gamma_encode(1));
        assert!(matches!(Ensemble::parse(&b), Err(ParseError::BadSum { .. })));
    }

    #[test]
    fn parse_rejects_non_canonical_forms() {
        // Out-of-order entries.
        let mut b = gamma_encode(2);
        for s in ["1", "0"] {
            b.extend_from(&encode_string(&bits(s)));
            b.extend_from(&gamma_encode(2));
            b.extend_from(&gamma_encode(1));
        }
        assert!(matches!(Ensemble::parse(&b), Err(ParseError::NotCanonical(_))));

        // Weight 2/2^2 not in lowest terms.
        let mut b = gamma_encode(2);
        b.extend_from(&encode_string(&bits("0")));
        b.extend_from(&gamma_encode(3));
        b.extend_from(&gamma_encode(2));
        b.extend_from(&encode_string(&bits("1")));
        b.extend_from(&gamma_encode(2));
        b.extend_from(&gamma_encode(1));
        assert!(matches!(Ensemble::parse(&b), Err(ParseError::NotCanonical(_))));

        // Trailing bit after a valid encoding.
        let mut b = Ensemble::dirac(&bits("")).serialize();
        b.push(false);
        assert!(matches!(Ensemble::parse(&b), Err(ParseError::NotCanonical(_))));

        // Truncation inside an entry.
        let full = Ensemble::dirac(&bits("1")).serialize();
        let cut: BitString = full.bits().take(full.len() - 2).collect();
        assert_eq!(Ensemble::parse(&cut), Err(ParseError::Truncated));
    }

    #[test]
    fn entropy_exact_cases() {
        let h = Ensemble::dirac(&bits("0110")).entropy(32);
        assert!(h.is_point());
        assert_eq!(h.lo(), &Dyadic::zero());

        let uniform2 = Ensemble::uniform_on(&[bits("0"), bits("1")].into_iter().collect()).unwrap();
        assert_eq!(uniform2.entropy(32), RealInterval::point(Dyadic::one()));

        let uniform4 =
            Ensemble::uniform_on(&(0..4).map(|v| BitString::from_uint(v, 2)).collect()).unwrap();
        assert_eq!(uniform4.entropy(32), RealInterval::point(Dyadic::from_int(2)));

        // All power-of-two weights: exact closed form sum e_i/2^e_i.
        let e = Ensemble::from_weights([
            (bits(""), d("1/2^1")),
            (bits("0"), d("1/2^2")),
            (bits("10"), d("1/2^3")),
            (bits("11"), d("1/2^3")),
        ])
        .unwrap();
        assert_eq!(e.entropy(32), RealInterval::point(d("7/2^2")));
    }

    #[test]
    fn entropy_interval_brackets_oracle() {
        let e = two_point();
        let h = e.entropy(32);
        assert!(h.width() <= d("1/2^30"));
        let oracle = oracle_entropy(&[d("3/2^2"), d("1/2^2")], 160);
        let slack = oracle_slack(2, 160);
        assert!(h.lo() <= &oracle.add(&slack));
        assert!(&oracle.sub(&slack) <= h.hi());
        // 0.8112781 to eight digits.
        assert!((h.lo().to_f64_lossy() - 0.811_278_124_459).abs() < 1e-8);
    }

    #[test]
    fn ensemble_k_frozen_values() {
        let b12 = Budget::new(12, 128);
        assert_eq!(ensemble_k(&Ensemble::dirac(&bits("")), &b12), Some(11));
        let b17 = Budget::new(17, 256);
        assert_eq!(ensemble_k(&Ensemble::dirac(&bits("0")), &b17), Some(17));
        assert_eq!(ensemble_k(&Ensemble::dirac(&bits("1")), &b17), Some(17));
    }

    #[test]
    fn total_information_point_for_dirac() {
        let b = Budget::new(12, 128);
        let sigma = total_information(&Ensemble::dirac(&bits("")), &b, 32).unwrap();
        assert_eq!(sigma, RealInterval::point(Dyadic::from_int(11)));
        // Off-budget ensembles propagate undefinedness.
        assert_eq!(total_information(&Ensemble::dirac(&bits("0")), &b, 32), None);
    }

    #[test]
    fn typicality_basics() {
        let zero = Dyadic::zero();
        // Off support: never typical.
        assert!(!is_typical(&bits("0"), &Ensemble::dirac(&bits("1")), &zero, 32));
        // Dirac: always typical for every delta.
        for delta in ["0", "1/2^1", "3", "7/2^2"] {
            assert!(is_typical(&bits("10"), &Ensemble::dirac(&bits("10")), &d(delta), 32));
        }
        // Uniform on {0,1}^2: every member exactly meets the threshold.
        let u4 = Ensemble::uniform_on(&(0..4).map(|v| BitString::from_uint(v, 2)).collect())
            .unwrap();
        for v in 0..4 {
            let r = is_typical_detailed(&BitString::from_uint(v, 2), &u4, &zero, 32);
            assert!(r.typical);
            assert!(!r.ambiguous, "exact power-of-two path never straddles");
        }
    }

    #[test]
    fn typicality_threshold_crossing() {
        let e = two_point();
        let zero = Dyadic::zero();
        // Threshold 2^-H ~ 0.57: the 3/4 mass passes, the 1/4 mass fails.
        assert!(is_typical(&bits(""), &e, &zero, 32));
        assert!(!is_typical(&bits("1"), &e, &zero, 32));
        // At delta = 3/2 the threshold drops to 2^(-2.028) ~ 0.245 < 1/4.
        assert!(is_typical(&bits("1"), &e, &d("3/2^1"), 32));
    }

    #[test]
    fn set_conversion_examples() {
        let zero = Dyadic::zero();
        let eps = d("1/2^3");
        let unc = ConstraintSet::unconstrained();

        let dirac = Ensemble::dirac(&bits("01"));
        let conv = ensemble_to_set(&dirac, &zero, &eps, &unc, 32);
        assert_eq!(conv.set, [bits("01")].into_iter().collect());
        assert!(conv.ambiguous_included.is_empty());

        let u8: BTreeSet<BitString> = (0..8).map(|v| BitString::from_uint(v, 3)).collect();
        let cube = Ensemble::uniform_on(&u8).unwrap();
        let conv = ensemble_to_set(&cube, &zero, &eps, &unc, 32);
        assert_eq!(conv.set, u8);

        // Weight 1/4 sits below 2^(-H-eps) ~ 0.52, so only the 3/4 mass
        // survives even with the slack.
        let conv = ensemble_to_set(&two_point(), &zero, &eps, &unc, 32);
        assert_eq!(conv.set, [bits("")].into_iter().collect());
        assert!(conv.ambiguous_included.is_empty());

        // Constraints filter members before thresholding.
        let fixed = ConstraintSet::fixed_length(1);
        let conv = ensemble_to_set(&two_point(), &d("3/2^1"), &eps, &fixed, 32);
        assert_eq!(conv.set, [bits("1")].into_iter().collect());
    }

    #[test]
    fn mixing_rules() {
        let a = Ensemble::dirac(&bits("0"));
        let b = Ensemble::dirac(&bits("1"));
        let half = d("1/2^1");
        let m = mix(&[(a.clone(), half.clone()), (b.clone(), half.clone())]).unwrap();
        assert_eq!(
            m,
            Ensemble::uniform_on(&[bits("0"), bits("1")].into_iter().collect()).unwrap()
        );
        assert_eq!(mix(&[(two_point(), Dyadic::one())]).unwrap(), two_point());

        let bad = mix(&[(a.clone(), half.clone()), (b.clone(), d("1/2^2"))]);
        assert!(matches!(bad, Err(EnsembleError::BadCoefficientSum { .. })));

        // Support of a mixture is the union of supports.
        let m = mix(&[(a, d("1/2^2")), (two_point(), d("3/2^2"))]).unwrap();
        let support: Vec<_> = m.support().cloned().collect();
        assert_eq!(support, vec![bits(""), bits("0"), bits("1")]);
    }

    #[test]
    fn set_codec_roundtrip_and_strictness() {
        let sets: [BTreeSet<BitString>; 3] = [
            BTreeSet::new(),
            [bits("")].into_iter().collect(),
            [bits(""), bits("0"), bits("1"), bits("00")].into_iter().collect(),
        ];
        for s in &sets {
            assert_eq!(parse_set(&serialize_set(s)).unwrap(), *s);
        }
        assert_eq!(serialize_set(&sets[0]), bits("1"));

        // Duplicate entry is out of order, hence non-canonical.
        let mut b = gamma_encode(3);
        b.extend_from(&encode_string(&bits("0")));
        b.extend_from(&encode_string(&bits("0")));
        assert!(matches!(parse_set(&b), Err(ParseError::NotCanonical(_))));
    }

    #[test]
    fn uniform_ensemble_on_non_power_of_two() {
        let tri: BTreeSet<BitString> = [bits(""), bits("0"), bits("1")].into_iter().collect();
        let u = UniformEnsemble::new(tri.clone()).unwrap();
        assert_eq!(u.to_dyadic_ensemble(), None);
        assert!(u.is_typical(&bits("0")));
        assert!(!u.is_typical(&bits("00")));
        let h = u.entropy(48);
        // log2 3 = 1.5849625...
        assert!(h.lo().to_f64_lossy() < 1.584_963 && h.hi().to_f64_lossy() > 1.584_962);

        let pair: BTreeSet<BitString> = [bits("0"), bits("1")].into_iter().collect();
        let u2 = UniformEnsemble::new(pair.clone()).unwrap();
        assert_eq!(u2.to_dyadic_ensemble(), Ensemble::uniform_on(&pair));
        assert_eq!(u2.entropy(32), RealInterval::point(Dyadic::one()));
    }

    #[test]
    fn constraint_membership() {
        let fl2 = ConstraintSet::fixed_length(2);
        assert!(fl2.dirac_member(&bits("01")));
        assert!(!fl2.dirac_member(&bits("0")));
        let u4 = Ensemble::uniform_on(&(0..4).map(|v| BitString::from_uint(v, 2)).collect())
            .unwrap();
        assert!(fl2.ensemble_member(&u4));
        assert!(!fl2.ensemble_member(&two_point()));
        assert!(ConstraintSet::unconstrained().ensemble_member(&two_point()));
    }

    #[test]
    fn anchored_length_observable_equals_fixed_length() {
        // The exact-expectation rule around the length indicator anchored
        // at a length-2 string admits precisely the fixed-length ensembles.
        let anchored = ConstraintSet::ObservableInterval {
            observable: Observable::LengthIndicator { n: 2 },
            rule: IntervalRule::ExactExpectation,
            anchor: bits("01"),
        };
        let fl2 = ConstraintSet::fixed_length(2);
        let u4 = Ensemble::uniform_on(&(0..4).map(|v| BitString::from_uint(v, 2)).collect())
            .unwrap();
        let candidates = [
            Ensemble::dirac(&bits("01")),
            Ensemble::dirac(&bits("0")),
            Ensemble::dirac(&bits("")),
            u4,
            two_point(),
            mix(&[
                (Ensemble::dirac(&bits("00")), d("1/2^1")),
                (Ensemble::dirac(&bits("11")), d("1/2^1")),
            ])
            .unwrap(),
            mix(&[
                (Ensemble::dirac(&bits("00")), d("1/2^1")),
                (Ensemble::dirac(&bits("1")), d("1/2^1")),
            ])
            .unwrap(),
        ];
        for e in &candidates {
            assert_eq!(
                anchored.ensemble_member(e),
                fl2.ensemble_member(e),
                "disagreement on {:?}",
                e.serialize()
            );
        }
        for x in ["", "0", "1", "00", "01", "111"] {
            assert_eq!(anchored.dirac_member(&bits(x)), fl2.dirac_member(&bits(x)), "{x}");
        }
    }

    #[test]
    fn constraint_uniform_membership_exact_rationals() {
        let fl1 = ConstraintSet::fixed_length(1);
        let pair = UniformEnsemble::new([bits("0"), bits("1")].into_iter().collect()).unwrap();
        assert!(fl1.uniform_member(&pair));
        let tri =
            UniformEnsemble::new([bits(""), bits("0"), bits("1")].into_iter().collect()).unwrap();
        assert!(!fl1.uniform_member(&tri));

        // Observable with slack 1/4 around expectation 2/3: the length-1
        // anchor value 1 differs by 1/3 > 1/4, checked without rounding.
        let anchored = ConstraintSet::ObservableInterval {
            observable: Observable::LengthIndicator { n: 1 },
            rule: IntervalRule::PlusMinus { halfwidth: d("1/2^2") },
            anchor: bits("0"),
        };
        assert!(!anchored.uniform_member(&tri));
        // With slack 1/2 it fits: |1 - 2/3| = 1/3 <= 1/2.
        let loose = ConstraintSet::ObservableInterval {
            observable: Observable::LengthIndicator { n: 1 },
            rule: IntervalRule::PlusMinus { halfwidth: d("1/2^1") },
            anchor: bits("0"),
        };
        assert!(loose.uniform_member(&tri));
    }

    #[test]
    fn constraint_description_has_measurable_complexity() {
        let b = Budget::new(12, 128);
        // gamma(1) = "1": a one-bit description, complexity 5 on this
        // machine (OUT1 then HALT).
        assert_eq!(ConstraintSet::unconstrained().description_complexity(&b), Some(5));
        assert!(ConstraintSet::fixed_length(2).id_encoding().len() > 1);
    }

    #[test]
    fn json_mirror_shape() {
        let v = serde_json::to_value(two_point()).unwrap();
        assert_eq!(v["entries"][0]["s"], "");
        assert_eq!(v["entries"][0]["num"], 3);
        assert_eq!(v["entries"][0]["exp"], 2);
        assert_eq!(v["entries"][1]["s"], "1");
    }

    fn arb_weights() -> impl Strategy<Value = Vec<Dyadic>> {
        // Random dyadic partitions of 1: repeatedly split the last part.
        proptest::collection::vec(1u32..4, 0..5).prop_map(|splits| {
            let mut parts = vec![Dyadic::one()];
            for s in splits {
                let last = parts.pop().unwrap();
                let mut piece = last.clone();
                for _ in 0..s {
                    piece = piece.half();
                }
                parts.push(last.sub(&piece));
                parts.push(piece);
                parts.retain(|p| p.is_positive());
            }
            parts
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn entropy_always_encloses_oracle(ws in arb_weights()) {
            let strings: Vec<BitString> = (0..ws.len() as u64)
                .map(|i| BitString::from_uint(i, 8))
                .collect();
            let e = Ensemble::from_weights(strings.into_iter().zip(ws.iter().cloned())).unwrap();
            let h = e.entropy(32);
            prop_assert!(h.width() <= d("1/2^30"));
            let oracle = oracle_entropy(&ws, 160);
            let slack = oracle_slack(ws.len() as u32, 160);
            prop_assert!(h.lo() <= &oracle.add(&slack));
            prop_assert!(&oracle.sub(&slack) <= h.hi());
        }

        #[test]
        fn typicality_monotone_in_delta(ws in arb_weights(), idx in 0usize..8, bump in 1u64..6) {
            let strings: Vec<BitString> = (0..ws.len() as u64)
                .map(|i| BitString::from_uint(i, 6))
                .collect();
            let e = Ensemble::from_weights(strings.clone().into_iter().zip(ws.iter().cloned())).unwrap();
            let x = &strings[idx % strings.len()];
            let small = Dyadic::from_ratio(1, 2);
            let large = small.add(&Dyadic::from_int(bump as i64));
            if is_typical(x, &e, &small, 32) {
                prop_assert!(is_typical(x, &e, &large, 32));
            }
        }

        #[test]
        fn mixture_members_stay_in_fixed_length(a in 0u64..4, c in 0u64..4, num in 1u64..3) {
            let lam = Dyadic::from_ratio(2 * num - 1, 2); // odd/4 in (0,1)
            let co = Dyadic::one().sub(&lam);
            let e1 = Ensemble::dirac(&BitString::from_uint(a, 2));
            let e2 = Ensemble::dirac(&BitString::from_uint(c, 2));
            let m = mix(&[(e1, lam), (e2, co)]).unwrap();
            prop_assert!(ConstraintSet::fixed_length(2).ensemble_member(&m));
        }
    }
}
