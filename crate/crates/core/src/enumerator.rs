//! Exhaustive program enumeration under explicit budgets.
//!
//! This is the engine behind every complexity figure: it walks the binary
//! program tree once, pruning subtrees that can no longer contribute, and
//! folds halting runs into per-output minima.  Pruning is sound because the
//! machine is fed incrementally: an invalid or fuel-exhausted prefix stays
//! that way under every extension, a prefix-machine halt ends the program,
//! and a plain-machine program extending an explicit halt reproduces the
//! same output and step count at a longer length, which can never improve
//! a minimum.
//!
//! The fold is commutative and associative (smaller length wins, ties go to
//! the lexicographically least witness, step minima combine by `min`), so
//! subtrees may be enumerated in any order or in parallel and the merged
//! table is bit-identical to the sequential one.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::codec::gamma_encode;
use crate::dyadic::Dyadic;
use crate::vm::{Budget, Exec, ExecState, MachineKind};

/// Per-output minima accumulated from halting runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableEntry {
    /// Length of the shortest program producing the output.
    pub min_len: u32,
    /// Canonical witness: lexicographically least among the shortest.
    pub witness: BitString,
    /// Fewest steps over programs of minimal length.
    pub min_steps_at_min_len: u64,
    /// Fewest steps over all programs within budget (any length).
    pub min_steps_any: u64,
}

impl TableEntry {
    fn first(len: u32, program: &BitString, steps: u64) -> Self {
        Self {
            min_len: len,
            witness: program.clone(),
            min_steps_at_min_len: steps,
            min_steps_any: steps,
        }
    }

    /// Folds one more halting run into the entry.  Commutative with respect
    /// to the runs seen, which is what makes parallel merging exact.
    fn absorb(&mut self, len: u32, program: &BitString, steps: u64) {
        if len < self.min_len {
            self.min_len = len;
            self.witness = program.clone();
            self.min_steps_at_min_len = steps;
        } else if len == self.min_len {
            if *program < self.witness {
                self.witness = program.clone();
            }
            self.min_steps_at_min_len = self.min_steps_at_min_len.min(steps);
        }
        self.min_steps_any = self.min_steps_any.min(steps);
    }

    fn merge(&mut self, other: &TableEntry) {
        self.absorb(other.min_len, &other.witness, other.min_steps_at_min_len);
        self.min_steps_any = self.min_steps_any.min(other.min_steps_any);
    }
}

/// Map from output to minimal-program statistics for one machine kind,
/// auxiliary string, and budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityTable {
    pub kind: MachineKind,
    pub aux: BitString,
    pub budget: Budget,
    entries: BTreeMap<BitString, TableEntry>,
}

impl ComplexityTable {
    pub(crate) fn from_parts(
        kind: MachineKind,
        aux: BitString,
        budget: Budget,
        entries: BTreeMap<BitString, TableEntry>,
    ) -> Self {
        Self { kind, aux, budget, entries }
    }

    pub fn get(&self, x: &BitString) -> Option<&TableEntry> {
        self.entries.get(x)
    }

    /// Budgeted complexity of `x`: length of its shortest program, if any
    /// program within budget produces it.
    pub fn complexity(&self, x: &BitString) -> Option<u32> {
        self.get(x).map(|e| e.min_len)
    }

    pub fn witness(&self, x: &BitString) -> Option<&BitString> {
        self.get(x).map(|e| &e.witness)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &TableEntry)> {
        self.entries.iter()
    }

    pub fn outputs(&self) -> impl Iterator<Item = &BitString> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn merge_map(into: &mut BTreeMap<BitString, TableEntry>, from: BTreeMap<BitString, TableEntry>) {
        for (k, v) in from {
            match into.get_mut(&k) {
                Some(e) => e.merge(&v),
                None => {
                    into.insert(k, v);
                }
            }
        }
    }
}

/// One halting run, as emitted by [`enumerate_halting`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HaltingRun {
    pub program: BitString,
    pub output: BitString,
    pub steps: u64,
}

/// Exact dyadic lower approximation of the prefix machine's halting
/// probability at a budget: the Kraft sum over the budgeted domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OmegaApprox {
    pub value: Dyadic,
    pub budget: Budget,
}

// Shared pruned walk over the live program tree.  `visit` is invoked with
// (program, output, steps, explicit_halt):
//   prefix: only for exact halts (explicit_halt always true);
//   plain:  for every live node (implicit end-of-input halt) and once more
//           is not needed for explicit halts, whose node itself is the
//           program; explicit_halt distinguishes the two for callers that
//           care (the stream generator expands suffixes of explicit halts).
fn walk<F: FnMut(&BitString, &BitString, u64, bool)>(
    kind: MachineKind,
    aux: &BitString,
    budget: &Budget,
    path: &mut BitString,
    exec: &Exec,
    visit: &mut F,
) {
    if kind == MachineKind::Plain && path.is_empty() {
        // The empty program is a plain-machine halt in its own right.
        visit(path, &exec.output, exec.steps, false);
    }
    if path.len() as u32 == budget.max_len {
        return;
    }
    for bit in [false, true] {
        let mut child = exec.clone();
        child.feed(bit, aux, budget.max_steps);
        path.push(bit);
        match child.state {
            ExecState::Running => {
                if kind == MachineKind::Plain {
                    visit(path, &child.output, child.steps, false);
                }
                walk(kind, aux, budget, path, &child, visit);
            }
            ExecState::Halted => {
                visit(path, &child.output, child.steps, true);
            }
            // Invalid and fuel-exhausted prefixes stay that way under every
            // extension; the whole subtree is dead.
            ExecState::Invalid | ExecState::Diverged => {}
        }
        path.pop();
    }
}

// Collects the live frontier at `depth` while folding everything shallower
// through `visit`, so a parallel run can continue each frontier node
// independently.
fn frontier(
    kind: MachineKind,
    aux: &BitString,
    budget: &Budget,
    depth: u32,
    path: &mut BitString,
    exec: &Exec,
    out: &mut Vec<(BitString, Exec)>,
    visit: &mut impl FnMut(&BitString, &BitString, u64, bool),
) {
    if path.len() as u32 == depth {
        out.push((path.clone(), exec.clone()));
        return;
    }
    if kind == MachineKind::Plain && path.is_empty() {
        visit(path, &exec.output, exec.steps, false);
    }
    for bit in [false, true] {
        let mut child = exec.clone();
        child.feed(bit, aux, budget.max_steps);
        path.push(bit);
        match child.state {
            ExecState::Running => {
                if kind == MachineKind::Plain {
                    visit(path, &child.output, child.steps, false);
                }
                frontier(kind, aux, budget, depth, path, &child, out, visit);
            }
            ExecState::Halted => visit(path, &child.output, child.steps, true),
            ExecState::Invalid | ExecState::Diverged => {}
        }
        path.pop();
    }
}

fn absorb_into(
    map: &mut BTreeMap<BitString, TableEntry>,
    program: &BitString,
    output: &BitString,
    steps: u64,
) {
    let len = program.len() as u32;
    match map.get_mut(output) {
        Some(e) => e.absorb(len, program, steps),
        None => {
            map.insert(output.clone(), TableEntry::first(len, program, steps));
        }
    }
}

// Subtree splitting kicks in above this depth; below it the walk is cheap
// enough that task overhead dominates.
const SPLIT_DEPTH: u32 = 12;

/// Builds the complexity table for one machine kind, auxiliary string, and
/// budget.  Work is partitioned across disjoint program-tree subtrees and
/// merged by the commutative fold, so the result is identical for any
/// thread count, including one.
pub fn complexity_table(kind: MachineKind, aux: &BitString, budget: &Budget) -> ComplexityTable {
    let mut shallow = BTreeMap::new();
    let exec = Exec::new();
    let mut path = BitString::new();
    if budget.max_len <= SPLIT_DEPTH {
        walk(kind, aux, budget, &mut path, &exec, &mut |p, o, s, _| {
            absorb_into(&mut shallow, p, o, s)
        });
        return ComplexityTable::from_parts(kind, aux.clone(), *budget, shallow);
    }

    let mut nodes = Vec::new();
    frontier(kind, aux, budget, SPLIT_DEPTH, &mut path, &exec, &mut nodes, &mut |p, o, s, _| {
        absorb_into(&mut shallow, p, o, s)
    });
    let merged = nodes
        .into_par_iter()
        .map(|(prefix, exec)| {
            let mut local = BTreeMap::new();
            let mut path = prefix.clone();
            // The frontier node itself is a live plain-machine program.
            if kind == MachineKind::Plain {
                absorb_into(&mut local, &path, &exec.output, exec.steps);
            }
            walk(kind, aux, budget, &mut path, &exec, &mut |p, o, s, _| {
                absorb_into(&mut local, p, o, s)
            });
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            ComplexityTable::merge_map(&mut a, b);
            a
        });
    ComplexityTable::merge_map(&mut shallow, merged);
    ComplexityTable::from_parts(kind, aux.clone(), *budget, shallow)
}

/// Emits every halting program within budget in canonical order (length,
/// then lexicographic).  For the plain machine this includes programs with
/// ignored trailing bits after an explicit halt, so the stream grows like
/// `2^max_len`; it exists for inspection and oracle duty at desk budgets.
pub fn enumerate_halting(kind: MachineKind, aux: &BitString, budget: &Budget) -> Vec<HaltingRun> {
    assert!(
        kind == MachineKind::Prefix || budget.max_len <= 22,
        "plain stream is exponential in max_len; keep it desk-scale"
    );
    let mut runs = Vec::new();
    let mut explicit: Vec<HaltingRun> = Vec::new();
    let mut path = BitString::new();
    walk(kind, aux, budget, &mut path, &Exec::new(), &mut |p, o, s, was_explicit| {
        let run = HaltingRun { program: p.clone(), output: o.clone(), steps: s };
        if kind == MachineKind::Plain && was_explicit {
            explicit.push(run.clone());
        }
        runs.push(run);
    });
    if kind == MachineKind::Plain {
        // Trailing bits after an explicit halt are ignored, so every suffix
        // extension is itself a halting program with identical behavior.
        for base in explicit {
            let free = budget.max_len - base.program.len() as u32;
            for extra in 1..=free {
                for suffix in BitString::strings_of_length(extra) {
                    runs.push(HaltingRun {
                        program: base.program.concat(&suffix),
                        output: base.output.clone(),
                        steps: base.steps,
                    });
                }
            }
        }
    }
    runs.sort_by(|a, b| a.program.cmp(&b.program));
    runs
}

/// Kraft sum over the budgeted prefix domain.  Monotone non-decreasing in
/// both budget components and bounded by 1 thanks to prefix-freeness.
pub fn omega_lower(budget: &Budget) -> OmegaApprox {
    let aux = BitString::new();
    let mut value = Dyadic::zero();
    let mut path = BitString::new();
    walk(MachineKind::Prefix, &aux, budget, &mut path, &Exec::new(), &mut |p, _, _, _| {
        value = value.add(&Dyadic::power_of_two(-(p.len() as i64)));
    });
    OmegaApprox { value, budget: *budget }
}

/// Plain (unrestricted-halting) complexity of `x` within budget.
pub fn plain_c(x: &BitString, budget: &Budget) -> Option<u32> {
    complexity_table(MachineKind::Plain, &BitString::new(), budget).complexity(x)
}

/// Prefix (self-delimiting) complexity of `x` within budget.
pub fn prefix_k(x: &BitString, budget: &Budget) -> Option<u32> {
    complexity_table(MachineKind::Prefix, &BitString::new(), budget).complexity(x)
}

/// Prefix complexity of the natural number `n`, encoded as gamma(n+1) so
/// that zero is representable.
pub fn prefix_k_nat(n: u64, budget: &Budget) -> Option<u32> {
    prefix_k(&gamma_encode(n + 1), budget)
}

/// Conditional prefix complexity with the condition supplied directly as
/// the auxiliary string.
pub fn cond_k(x: &BitString, y: &BitString, budget: &Budget) -> Option<u32> {
    complexity_table(MachineKind::Prefix, y, budget).complexity(x)
}

/// Conditional prefix complexity in the minimal-program form: the condition
/// is handed to the machine as a shortest program for `y`, not as `y`
/// itself.  Undefined when `y` has no program within budget.
pub fn chaitin_k(x: &BitString, y: &BitString, budget: &Budget) -> Option<u32> {
    let y_star = shortest_program(y, MachineKind::Prefix, budget)?;
    complexity_table(MachineKind::Prefix, &y_star, budget).complexity(x)
}

/// Canonical shortest program for `x`: minimal length, ties broken
/// lexicographically, so repeated calls agree bit for bit.
pub fn shortest_program(x: &BitString, kind: MachineKind, budget: &Budget) -> Option<BitString> {
    complexity_table(kind, &BitString::new(), budget)
        .witness(x)
        .cloned()
}

// Scans every halting run within budget without the explicit-halt suffix
// synthesis of `enumerate_halting`: a padded extension replays the same
// output and steps at greater length, so minima over (steps, length, lex)
// are unaffected while the scan stays near-linear in live nodes.
pub(crate) fn visit_halting(
    kind: MachineKind,
    aux: &BitString,
    budget: &Budget,
    visit: &mut impl FnMut(&BitString, &BitString, u64),
) {
    let mut path = BitString::new();
    walk(kind, aux, budget, &mut path, &Exec::new(), &mut |p, o, s, _| visit(p, o, s));
}

/// For each length `l` from the first that produces `x` up to the budget
/// cap, the fewest halting steps over programs of length at most `l`
/// producing `x`.  Non-increasing; empty when `x` is unproduced.
pub fn halting_time_profile(
    x: &BitString,
    kind: MachineKind,
    budget: &Budget,
) -> Vec<(u32, u64)> {
    let mut best_at: BTreeMap<u32, u64> = BTreeMap::new();
    let mut path = BitString::new();
    walk(kind, &BitString::new(), budget, &mut path, &Exec::new(), &mut |p, o, s, _| {
        if o == x {
            best_at
                .entry(p.len() as u32)
                .and_modify(|m| *m = (*m).min(s))
                .or_insert(s);
        }
    });
    let first = match best_at.keys().next() {
        Some(&l) => l,
        None => return Vec::new(),
    };
    let mut profile = Vec::with_capacity((budget.max_len - first + 1) as usize);
    let mut running = u64::MAX;
    for l in first..=budget.max_len {
        if let Some(&s) = best_at.get(&l) {
            running = running.min(s);
        }
        profile.push((l, running));
    }
    profile
}
