//! The fixed universal machine every quantity in this crate refers to.
//!
//! Programs are bit strings decoded left to right into prefix-free opcodes:
//!
//! | bits        | op   | effect                                   | step cost            |
//! |-------------|------|------------------------------------------|----------------------|
//! | `00`        | OUT0 | append `0` to the output                 | 1                    |
//! | `01`        | OUT1 | append `1` to the output                 | 1                    |
//! | `100`       | HALT | stop                                     | 1                    |
//! | `101 g(n)`  | SETR | register `R := n` (Elias gamma operand)   | 1 + len(g(n))        |
//! | `110`       | RPT  | append `R` copies of the last output bit  | R                    |
//! | `1110`      | CPA  | append the next unread auxiliary bit      | 1                    |
//! | `1111`      | DBL  | output := output ++ output                | prior output length  |
//!
//! `R` starts at 1.  RPT on an empty output and CPA past the end of the
//! auxiliary string are invalid (the run is excluded from every domain).
//! DBL on an empty output is a no-op costing 1.  A run diverges the moment
//! its charged steps would exceed the fuel bound.
//!
//! The plain machine treats end of input as a successful halt costing
//! nothing, even in the middle of an opcode; the prefix machine halts only
//! through an explicit HALT, and a halting run consumes exactly the bits it
//! read, which makes the set of exactly-consumed halting programs prefix
//! free by construction.  Every opcode charges at least one step per bit it
//! emits, so a halted run always satisfies `steps >= output length`.

use serde::Serialize;

use crate::bits::BitString;

/// Identifies the opcode table and cost model above; embedded in every
/// cache file and report so that stored results can never be replayed
/// against a different machine.
pub const MACHINE_VERSION: &str = "tinyvm-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Plain,
    Prefix,
}

impl MachineKind {
    pub fn name(self) -> &'static str {
        match self {
            MachineKind::Plain => "plain",
            MachineKind::Prefix => "prefix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Halted,
    /// The run would need more steps (or, for a finite prefix stream, more
    /// input bits) than the budget provides.
    Diverged,
    /// The run hit an undefined condition (RPT on empty output, CPA with the
    /// auxiliary input exhausted) and is excluded from every domain.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MachineResult {
    pub status: RunStatus,
    /// Output written so far (partial when the run did not halt).
    pub output: BitString,
    /// Steps charged so far.
    pub steps: u64,
    /// Program bits read before the run reached a terminal state.
    pub consumed: u64,
}

/// Resource bounds: `max_len` caps program length in bits, `max_steps` caps
/// charged steps, `precision` is the fraction-bit target for the interval
/// arithmetic attached to results computed under this budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Budget {
    pub max_len: u32,
    pub max_steps: u64,
    pub precision: u32,
}

impl Budget {
    pub const DEFAULT_PRECISION: u32 = 32;

    pub fn new(max_len: u32, max_steps: u64) -> Self {
        Self { max_len, max_steps, precision: Self::DEFAULT_PRECISION }
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        assert!(precision >= 16, "precision below 16 fraction bits");
        self.precision = precision;
        self
    }

    /// True when every resource bound is at least as large as `other`'s.
    pub fn dominates(&self, other: &Budget) -> bool {
        self.max_len >= other.max_len
            && self.max_steps >= other.max_steps
            && self.precision >= other.precision
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(len<={}, steps<={}, prec={})", self.max_len, self.max_steps, self.precision)
    }
}

/// Opcode decoder position between bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decode {
    Start,
    Saw0,
    Saw1,
    Saw10,
    Saw11,
    Saw111,
    /// Counting the leading zeros of SETR's gamma operand.
    GammaZeros(u32),
    /// Reading the payload bits of the gamma operand.
    GammaVal { left: u32, value: u64, zeros: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ExecState {
    Running,
    Halted,
    Invalid,
    Diverged,
}

/// Incremental interpreter state; the enumerator clones it at branch points
/// of the program tree, so everything here is cheap to copy.
#[derive(Debug, Clone)]
pub(crate) struct Exec {
    pub(crate) state: ExecState,
    pub(crate) output: BitString,
    pub(crate) steps: u64,
    pub(crate) consumed: u64,
    reg: u64,
    aux_pos: usize,
    decode: Decode,
}

impl Exec {
    pub(crate) fn new() -> Self {
        Self {
            state: ExecState::Running,
            output: BitString::new(),
            steps: 0,
            consumed: 0,
            reg: 1,
            aux_pos: 0,
            decode: Decode::Start,
        }
    }

    fn charge(&mut self, cost: u64, fuel: u64) -> bool {
        if self.steps.saturating_add(cost) > fuel {
            self.state = ExecState::Diverged;
            false
        } else {
            self.steps += cost;
            true
        }
    }

    fn out(&mut self, bit: bool, fuel: u64) {
        if self.charge(1, fuel) {
            self.output.push(bit);
        }
    }

    /// Consumes one program bit and advances the machine.  Only call while
    /// `state == Running`.
    pub(crate) fn feed(&mut self, bit: bool, aux: &BitString, fuel: u64) {
        debug_assert_eq!(self.state, ExecState::Running);
        self.consumed += 1;
        self.decode = match (self.decode, bit) {
            (Decode::Start, false) => Decode::Saw0,
            (Decode::Start, true) => Decode::Saw1,
            (Decode::Saw0, b) => {
                self.out(b, fuel);
                Decode::Start
            }
            (Decode::Saw1, false) => Decode::Saw10,
            (Decode::Saw1, true) => Decode::Saw11,
            (Decode::Saw10, false) => {
                // HALT
                if self.charge(1, fuel) {
                    self.state = ExecState::Halted;
                }
                Decode::Start
            }
            (Decode::Saw10, true) => Decode::GammaZeros(0),
            (Decode::GammaZeros(z), false) => Decode::GammaZeros(z + 1),
            (Decode::GammaZeros(0), true) => {
                self.setr(1, 0, fuel);
                Decode::Start
            }
            (Decode::GammaZeros(z), true) => Decode::GammaVal { left: z, value: 1, zeros: z },
            (Decode::GammaVal { left, value, zeros }, b) => {
                // Saturating keeps the operand well defined even for gamma
                // payloads past 64 bits; RPT with such an R always diverges
                // under any realistic fuel, so saturation is unobservable.
                let value = value.saturating_mul(2).saturating_add(u64::from(b));
                if left == 1 {
                    self.setr(value, zeros, fuel);
                    Decode::Start
                } else {
                    Decode::GammaVal { left: left - 1, value, zeros }
                }
            }
            (Decode::Saw11, false) => {
                // RPT
                match self.output.last() {
                    None => self.state = ExecState::Invalid,
                    Some(b) => {
                        let copies = self.reg;
                        if self.charge(copies, fuel) {
                            for _ in 0..copies {
                                self.output.push(b);
                            }
                        }
                    }
                }
                Decode::Start
            }
            (Decode::Saw11, true) => Decode::Saw111,
            (Decode::Saw111, false) => {
                // CPA
                if self.aux_pos >= aux.len() {
                    self.state = ExecState::Invalid;
                } else if self.charge(1, fuel) {
                    self.output.push(aux.get(self.aux_pos));
                    self.aux_pos += 1;
                }
                Decode::Start
            }
            (Decode::Saw111, true) => {
                // DBL
                if self.output.is_empty() {
                    self.charge(1, fuel);
                } else {
                    let prior = self.output.len() as u64;
                    if self.charge(prior, fuel) {
                        let copy = self.output.clone();
                        self.output.extend_from(&copy);
                    }
                }
                Decode::Start
            }
        };
    }

    fn setr(&mut self, value: u64, zeros: u32, fuel: u64) {
        let gamma_bits = u64::from(2 * zeros + 1);
        if self.charge(1 + gamma_bits, fuel) {
            self.reg = value;
        }
    }

    /// End of input on the plain machine: a successful halt costing nothing.
    pub(crate) fn finish_plain(&mut self) {
        if self.state == ExecState::Running {
            self.state = ExecState::Halted;
        }
    }

    pub(crate) fn into_result(self) -> MachineResult {
        let status = match self.state {
            ExecState::Halted => RunStatus::Halted,
            ExecState::Invalid => RunStatus::Invalid,
            // A still-running machine only surfaces here when a finite
            // prefix stream ran dry; the program needs more than it was
            // given, which the budgeted semantics reports as divergence.
            ExecState::Diverged | ExecState::Running => RunStatus::Diverged,
        };
        MachineResult { status, output: self.output, steps: self.steps, consumed: self.consumed }
    }
}

/// Runs the plain machine on `program` with an empty auxiliary string.
pub fn run_plain(program: &BitString, fuel: u64) -> MachineResult {
    run_plain_with_aux(program, &BitString::new(), fuel)
}

/// Plain machine with an auxiliary string available to CPA (the naive
/// conditional-complexity convention).
pub fn run_plain_with_aux(program: &BitString, aux: &BitString, fuel: u64) -> MachineResult {
    let mut exec = Exec::new();
    for b in program.bits() {
        exec.feed(b, aux, fuel);
        if exec.state != ExecState::Running {
            break;
        }
    }
    exec.finish_plain();
    exec.into_result()
}

/// Runs the prefix machine reading bits from `stream`.  The run halts only
/// through an explicit HALT; `consumed` reports exactly how many stream bits
/// were read.  A stream that runs dry first is reported as `Diverged`.
pub fn run_prefix(stream: &BitString, aux: &BitString, fuel: u64) -> MachineResult {
    let mut exec = Exec::new();
    for b in stream.bits() {
        exec.feed(b, aux, fuel);
        if exec.state != ExecState::Running {
            break;
        }
    }
    exec.into_result()
}

/// True when `program` is in the prefix machine's domain: it halts within
/// `fuel` consuming exactly its own length.
pub fn prefix_halts_exactly(program: &BitString, aux: &BitString, fuel: u64) -> Option<MachineResult> {
    let r = run_prefix(program, aux, fuel);
    (r.status == RunStatus::Halted && r.consumed == program.len() as u64).then_some(r)
}
