//! The redundant quantum parity code: encoding circuit, combinatorial
//! success condition, heralded-loss recovery with majority voting,
//! re-encoding, and bit/phase-flip error correction.
//!
//! A logical qubit `alpha |0> + beta |1>` is spread over `n` parity blocks
//! of `m` physical qubits as
//!
//! ```text
//! alpha |+>^(m) ... |+>^(m)  +  beta |->^(m) ... |->^(m)
//! ```
//!
//! with `|+->^(m) = (|0...0> +- |1...1>) / sqrt(2)`, one factor of
//! `1/sqrt(2)` per block. Note the basis convention this fixes: for
//! `(m, n) = (1, 1)` the encoded ket is `alpha |+> + beta |->`, i.e. the
//! bare qubit up to a Hadamard.
//!
//! Cells are addressed `(block b, position j)` and stored block-major,
//! cell index `b*m + j`.

use num_complex::Complex64;

use crate::analytic::CodeParams;
use crate::error::{Error, Result};
use crate::exec::{indexed_map, ExecMode};
use crate::statevec::{
    retarget_after_removal, Basis, Gate, PauliFrame, PureState, SiteKind, AMP_TOL,
};

/// Which physical qubits arrived, block-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossPattern {
    code: CodeParams,
    arrived: Vec<bool>,
}

impl LossPattern {
    pub fn new(code: CodeParams, arrived: Vec<bool>) -> Result<Self> {
        if arrived.len() != code.total_qubits() {
            return Err(Error::PatternShape {
                got: arrived.len(),
                expected: code.total_qubits(),
            });
        }
        Ok(LossPattern { code, arrived })
    }

    pub fn all_arrived(code: CodeParams) -> Self {
        LossPattern {
            code,
            arrived: vec![true; code.total_qubits()],
        }
    }

    /// Pattern from a bit mask; bit `b*m + j` set means cell `(b, j)` arrived.
    pub fn from_mask(code: CodeParams, mask: u64) -> Result<Self> {
        let total = code.total_qubits();
        if total > 63 {
            return Err(Error::EnumerationTooLarge {
                got: total,
                max: 63,
            });
        }
        Ok(LossPattern {
            code,
            arrived: (0..total).map(|c| mask >> c & 1 == 1).collect(),
        })
    }

    pub fn code(&self) -> CodeParams {
        self.code
    }

    pub fn arrived(&self, block: u32, pos: u32) -> bool {
        self.arrived[(block * self.code.m + pos) as usize]
    }

    pub fn mark_lost(&mut self, block: u32, pos: u32) {
        self.arrived[(block * self.code.m + pos) as usize] = false;
    }

    pub fn block_is_intact(&self, block: u32) -> bool {
        (0..self.code.m).all(|j| self.arrived(block, j))
    }

    pub fn block_is_empty(&self, block: u32) -> bool {
        (0..self.code.m).all(|j| !self.arrived(block, j))
    }

    /// Cells marked lost, in block-major order.
    pub fn lost_cells(&self) -> Vec<(u32, u32)> {
        (0..self.code.n)
            .flat_map(|b| (0..self.code.m).map(move |j| (b, j)))
            .filter(|&(b, j)| !self.arrived(b, j))
            .collect()
    }
}

/// True exactly when the state can be recovered: at least one block arrived
/// complete, and every block kept at least one qubit.
pub fn success_condition(pattern: &LossPattern) -> bool {
    let n = pattern.code.n;
    (0..n).any(|b| pattern.block_is_intact(b)) && (0..n).all(|b| !pattern.block_is_empty(b))
}

/// An encoded logical qubit: the register, the cell-to-site table (cells
/// lose their site when erased), and pending cell-indexed corrections.
#[derive(Debug, Clone)]
pub struct EncodedState {
    pub code: CodeParams,
    pub state: PureState,
    pub frame: PauliFrame,
    cells: Vec<Option<usize>>,
}

impl EncodedState {
    /// Current register site of a cell; `None` once erased.
    pub fn site_of(&self, block: u32, pos: u32) -> Option<usize> {
        self.cells[(block * self.code.m + pos) as usize]
    }

    /// Injects a Pauli/Hadamard on one cell, for error studies.
    pub fn apply_cell_gate(&mut self, block: u32, pos: u32, gate: Gate) -> Result<()> {
        let site = self
            .site_of(block, pos)
            .ok_or_else(|| Error::InvalidConfig(format!("cell ({block}, {pos}) already erased")))?;
        self.state.apply_1q(site, gate)
    }

    /// Both environment branches of losing cell `(block, pos)`.
    pub fn erase_cell_branches(&self, block: u32, pos: u32) -> Result<Vec<(f64, EncodedState)>> {
        let cell = (block * self.code.m + pos) as usize;
        let site = self.cells[cell].ok_or(Error::InvalidConfig(format!(
            "cell ({block}, {pos}) already erased"
        )))?;
        let mut out = Vec::with_capacity(2);
        for (p, state) in self.state.erase(site)? {
            let mut branch = EncodedState {
                code: self.code,
                state,
                frame: self.frame.clone(),
                cells: self.cells.clone(),
            };
            retarget_after_removal(&mut branch.cells, site);
            out.push((p, branch));
        }
        Ok(out)
    }

    /// Samples one environment branch of losing cell `(block, pos)`.
    pub fn erase_cell_sampled(
        &mut self,
        block: u32,
        pos: u32,
        rng: &mut impl rand::Rng,
    ) -> Result<(bool, f64)> {
        let cell = (block * self.code.m + pos) as usize;
        let site = self.cells[cell].ok_or(Error::InvalidConfig(format!(
            "cell ({block}, {pos}) already erased"
        )))?;
        let res = self.state.erase_sampled(site, rng)?;
        retarget_after_removal(&mut self.cells, site);
        Ok(res)
    }
}

/// Encodes `alpha |0> + beta |1>` into the `(m, n)` parity code.
pub fn encode(alpha: Complex64, beta: Complex64, code: CodeParams) -> Result<EncodedState> {
    let mut state = PureState::single_qubit(alpha, beta)?;
    let sites = encode_register(&mut state, 0, code)?;
    Ok(EncodedState {
        code,
        state,
        frame: PauliFrame::identity(code.total_qubits()),
        cells: sites.into_iter().map(Some).collect(),
    })
}

/// Encodes the qubit at `seed_site` of an existing register, appending
/// `m*n - 1` fresh matter sites. Returns the cell-to-site table; the seed
/// becomes cell `(0, 0)`.
///
/// The circuit fans the seed out across block leaders with CNOTs, rotates
/// each leader into the +- basis, then fans out within each block.
pub fn encode_register(
    state: &mut PureState,
    seed_site: usize,
    code: CodeParams,
) -> Result<Vec<usize>> {
    let m = code.m as usize;
    let n = code.n as usize;
    let mut sites = Vec::with_capacity(m * n);
    sites.push(seed_site);
    for _ in 1..m * n {
        sites.push(state.append_basis_site(SiteKind::Matter, false)?);
    }
    for b in 1..n {
        state.apply_cnot(sites[0], sites[b * m])?;
    }
    for b in 0..n {
        state.apply_1q(sites[b * m], Gate::H)?;
    }
    for b in 0..n {
        for j in 1..m {
            state.apply_cnot(sites[b * m], sites[b * m + j])?;
        }
    }
    Ok(sites)
}

/// Direct amplitude-level construction of the encoded ket, independent of
/// the encoding circuit. Serves as the oracle the circuit is tested against.
pub fn code_ket(alpha: Complex64, beta: Complex64, code: CodeParams) -> Result<PureState> {
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sqr - 1.0).abs() > AMP_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let m = code.m as usize;
    let n = code.n as usize;
    let mut amps = vec![Complex64::ZERO; 1usize << (m * n)];
    let scale = 2f64.powi(-(n as i32)).sqrt();
    let block_ones = (1usize << m) - 1;
    for config in 0..(1usize << n) {
        let mut index = 0usize;
        for b in 0..n {
            index <<= m;
            if config >> b & 1 == 1 {
                index |= block_ones;
            }
        }
        let sign = if (config as u32).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        amps[index] = (alpha + sign * beta) * scale;
    }
    PureState::from_amplitudes(vec![SiteKind::Matter; m * n], amps)
}

/// The decoded logical amplitudes returned by a successful recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovered {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Recovered {
    /// Squared overlap with another logical qubit, phase-insensitive.
    pub fn fidelity_to(&self, alpha: Complex64, beta: Complex64) -> f64 {
        (self.alpha.conj() * alpha + self.beta.conj() * beta).norm_sqr()
    }
}

/// Recovers the logical amplitudes from an encoded state whose erasures
/// (per `pattern`) have already been applied.
///
/// Loss-affected blocks are disentangled by Z-measuring every surviving
/// qubit; the majority of the outcomes decides the block's classical bit
/// (ties trust the first-indexed survivor) and contributes a pending
/// logical Z correction. Intact blocks are then contracted onto a single
/// site and the amplitudes read out with the accumulated frame applied.
pub fn recover(encoded: &EncodedState, pattern: &LossPattern) -> Result<Recovered> {
    if pattern.code != encoded.code {
        return Err(Error::PatternShape {
            got: pattern.code.total_qubits(),
            expected: encoded.code.total_qubits(),
        });
    }
    let mut state = encoded.state.clone();
    let mut cells = encoded.cells.clone();

    // Materialize pending per-cell corrections first.
    for (cell, slot) in cells.iter().enumerate() {
        let has_frame = encoded.frame.x(cell) || encoded.frame.z(cell);
        match *slot {
            Some(site) => {
                if encoded.frame.x(cell) {
                    state.apply_1q(site, Gate::X)?;
                }
                if encoded.frame.z(cell) {
                    state.apply_1q(site, Gate::Z)?;
                }
            }
            None if has_frame => {
                return Err(Error::InvalidConfig(
                    "pending frame correction on an erased cell".into(),
                ))
            }
            None => {}
        }
    }

    let mut removals = Vec::new();
    let logical_site = recover_register(
        &mut state,
        encoded.code,
        pattern,
        &mut cells,
        &mut DeterministicRecovery,
        &mut removals,
    )?;
    debug_assert_eq!(state.num_sites(), 1);
    debug_assert_eq!(logical_site, 0);
    Ok(Recovered {
        alpha: state.amplitudes()[0],
        beta: state.amplitudes()[1],
    })
}

/// How recovery resolves its survivor Z measurements.
///
/// When loss was applied as a computational-basis erasure of the cell
/// itself, survivors collapse to a definite product and their outcomes are
/// fixed. When the carried photon was erased rail by rail (the chain
/// engines), the first survivor of an affected block is genuinely random
/// and must be sampled; the vote-then-correct protocol recovers exactly
/// either way.
pub trait RecoveryOutcomes {
    /// Chooses the outcome of a survivor measurement whose probability of
    /// reading 1 is `p1`; `None` treats randomness as a usage error.
    fn survivor_outcome(&mut self, p1: f64) -> Option<bool>;

    /// Whether the classical record of the next survivor measurement is
    /// misread.
    fn record_flip(&mut self) -> bool;
}

/// Policy for the exhaustive verification paths: outcomes must be
/// determined by the state, records are faithful.
pub struct DeterministicRecovery;

impl RecoveryOutcomes for DeterministicRecovery {
    fn survivor_outcome(&mut self, _p1: f64) -> Option<bool> {
        None
    }
    fn record_flip(&mut self) -> bool {
        false
    }
}

/// Born-rule sampling of survivor outcomes with optional record errors.
pub struct SampledRecovery<'a, R: rand::Rng> {
    pub rng: &'a mut R,
    pub meas_error_rate: f64,
}

impl<R: rand::Rng> RecoveryOutcomes for SampledRecovery<'_, R> {
    fn survivor_outcome(&mut self, p1: f64) -> Option<bool> {
        Some(self.rng.random_bool(p1.clamp(0.0, 1.0)))
    }
    fn record_flip(&mut self) -> bool {
        self.meas_error_rate > 0.0 && self.rng.random_bool(self.meas_error_rate)
    }
}

/// Register-level recovery, usable when the code shares the register with
/// other systems (e.g. the second half of an entangled pair).
///
/// `cells` must hold the current site of every surviving cell and `None`
/// for erased ones, and is updated in place; every removed site index is
/// appended to `removals` (valid at its removal time) so callers can
/// retarget other site tables. `outcomes` resolves survivor measurements
/// and record errors. Returns the site now carrying the logical qubit.
pub fn recover_register(
    state: &mut PureState,
    code: CodeParams,
    pattern: &LossPattern,
    cells: &mut [Option<usize>],
    outcomes: &mut impl RecoveryOutcomes,
    removals: &mut Vec<usize>,
) -> Result<usize> {
    if !success_condition(pattern) {
        return Err(Error::HeraldedFailure);
    }
    let m = code.m;
    for (cell, slot) in cells.iter().enumerate() {
        let arrived = pattern.arrived(cell as u32 / m, cell as u32 % m);
        if arrived != slot.is_some() {
            return Err(Error::InvalidConfig(format!(
                "cell {cell}: loss pattern does not match the applied erasures"
            )));
        }
    }

    let mut remove = |cells: &mut [Option<usize>], site: usize| {
        retarget_after_removal(cells, site);
        removals.push(site);
    };

    // Disentangle loss-affected blocks: Z-measure all survivors, majority
    // vote on the records, accumulate the logical Z frame.
    let mut pending_z = false;
    for b in 0..code.n {
        if pattern.block_is_intact(b) {
            continue;
        }
        let mut records = Vec::new();
        for j in 0..m {
            if let Some(site) = cells[(b * m + j) as usize] {
                let (p0, p1) = state.outcome_probabilities(site, Basis::Z)?;
                let outcome = if p1 >= 1.0 - 1e-9 {
                    true
                } else if p0 >= 1.0 - 1e-9 {
                    false
                } else {
                    match outcomes.survivor_outcome(p1) {
                        Some(o) => o,
                        None => return Err(Error::AmbiguousOutcome { p0, p1 }),
                    }
                };
                state.measure_forced(site, Basis::Z, outcome)?;
                remove(cells, site);
                records.push(outcome ^ outcomes.record_flip());
            }
        }
        pending_z ^= majority_vote(&records);
    }

    // Contract each intact block to its leader.
    let intact: Vec<u32> = (0..code.n)
        .filter(|&b| pattern.block_is_intact(b))
        .collect();
    for &b in &intact {
        let leader = cells[(b * m) as usize].expect("intact leader present");
        for j in 1..m {
            let follower = cells[(b * m + j) as usize].expect("intact follower present");
            state.apply_cnot(leader, follower)?;
            state.measure_deterministic(follower, Basis::Z)?;
            remove(cells, follower);
        }
        let leader = cells[(b * m) as usize].expect("leader survives contraction");
        state.apply_1q(leader, Gate::H)?;
    }

    // Contract the intact leaders onto the first one.
    for &b in &intact[1..] {
        let head = cells[(intact[0] * m) as usize].expect("head leader present");
        let leader = cells[(b * m) as usize].expect("leader present");
        state.apply_cnot(head, leader)?;
        state.measure_deterministic(leader, Basis::Z)?;
        remove(cells, leader);
    }
    let logical = cells[(intact[0] * m) as usize].expect("logical site present");
    if pending_z {
        state.apply_1q(logical, Gate::Z)?;
    }
    Ok(logical)
}

/// How a majority vote resolves an exact tie (possible only for an even
/// number of records).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Trust the first-indexed record. The default convention.
    #[default]
    TrustFirst,
    /// Read a tie as 0.
    AssumeZero,
    /// Read a tie as 1.
    AssumeOne,
}

/// Majority of the recorded bits; a tie trusts the first-indexed record.
pub fn majority_vote(records: &[bool]) -> bool {
    majority_vote_with(records, TieBreak::TrustFirst)
}

/// Majority of the recorded bits under an explicit tie-break convention.
pub fn majority_vote_with(records: &[bool], tie_break: TieBreak) -> bool {
    let ones = records.iter().filter(|&&r| r).count();
    match (2 * ones).cmp(&records.len()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => match tie_break {
            TieBreak::TrustFirst => records[0],
            TieBreak::AssumeZero => false,
            TieBreak::AssumeOne => true,
        },
    }
}

/// Summary of the corrections applied by [`correct_errors`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrectionReport {
    /// Per block, the positions flipped back by the intra-block X stage.
    pub x_corrections: Vec<Vec<u32>>,
    /// Blocks given a Z correction by the inter-block stage.
    pub z_corrected_blocks: Vec<u32>,
}

/// Corrects bit flips within each block (up to `floor((m-1)/2)` per block)
/// and sign flips across blocks (up to `floor((q-1)/2)` of the `q` blocks),
/// the Shor-code-style capability of the parity code. Beyond those bounds
/// the majority repairs the wrong side and a logical error results.
pub fn correct_errors(encoded: &mut EncodedState) -> Result<CorrectionReport> {
    let m = encoded.code.m;
    let blocks: Vec<Vec<usize>> = (0..encoded.code.n)
        .map(|b| {
            (0..m)
                .map(|j| {
                    encoded.site_of(b, j).ok_or_else(|| {
                        Error::InvalidConfig("correct_errors needs intact blocks".into())
                    })
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    correct_errors_register(&mut encoded.state, &blocks)
}

/// Register-level error correction over the listed intact blocks
/// (`blocks[b]` = sites of block `b`'s qubits; `q = blocks.len()`).
///
/// Syndromes are non-destructive parity measurements, deterministic on any
/// Pauli-corrupted code state: within a block, ZZ parities anchored on the
/// first qubit locate bit flips; across blocks, joint X...X pair parities
/// anchored on the first block locate sign-flipped blocks.
pub fn correct_errors_register(
    state: &mut PureState,
    blocks: &[Vec<usize>],
) -> Result<CorrectionReport> {
    if blocks.is_empty() {
        return Err(Error::ZeroCount { name: "blocks" });
    }
    let mut report = CorrectionReport::default();

    // Intra-block bit-flip stage.
    for sites in blocks {
        let mut disagree = vec![false; sites.len()];
        for j in 1..sites.len() {
            disagree[j] = state.measure_parity_deterministic(&[sites[0], sites[j]], Basis::Z)?;
        }
        let flipped: Vec<u32> = (0..sites.len() as u32)
            .filter(|&j| disagree[j as usize])
            .collect();
        let complement: Vec<u32> = (0..sites.len() as u32)
            .filter(|&j| !disagree[j as usize])
            .collect();
        // Majority: flip the smaller consistent set; a tie trusts qubit 0.
        let fix = if flipped.len() <= complement.len() {
            flipped
        } else {
            complement
        };
        for &j in &fix {
            state.apply_1q(sites[j as usize], Gate::X)?;
        }
        report.x_corrections.push(fix);
    }

    // Inter-block sign-flip stage.
    let q = blocks.len();
    let mut disagree = vec![false; q];
    for b in 1..q {
        let joint: Vec<usize> = blocks[0].iter().chain(blocks[b].iter()).copied().collect();
        disagree[b] = state.measure_parity_deterministic(&joint, Basis::X)?;
    }
    let flipped: Vec<u32> = (0..q as u32).filter(|&b| disagree[b as usize]).collect();
    let complement: Vec<u32> = (0..q as u32).filter(|&b| !disagree[b as usize]).collect();
    let fix = if flipped.len() <= complement.len() {
        flipped
    } else {
        complement
    };
    for &b in &fix {
        state.apply_1q(blocks[b as usize][0], Gate::Z)?;
    }
    report.z_corrected_blocks = fix;
    Ok(report)
}

/// Re-encodes recovered logical amplitudes back to full code size, the
/// recover-then-encode composition used between hops.
pub fn reencode(recovered: &Recovered, code: CodeParams) -> Result<EncodedState> {
    encode(recovered.alpha, recovered.beta, code)
}

/// Exact failure probability by summing every loss pattern that violates
/// the success condition, each weighted `p^arrived (1-p)^lost`. The
/// enumeration oracle for the closed-form expression; limited to
/// `m*n <= 20` qubits.
pub fn brute_force_failure_prob(p: f64, code: CodeParams, mode: ExecMode) -> Result<f64> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::ProbabilityOutOfRange {
            name: "p",
            value: p,
        });
    }
    let total = code.total_qubits();
    if total > 20 {
        return Err(Error::EnumerationTooLarge {
            got: total,
            max: 20,
        });
    }
    let m = code.m as usize;
    let n = code.n as usize;
    let weights: Vec<f64> = (0..=total)
        .map(|a| p.powi(a as i32) * (1.0 - p).powi((total - a) as i32))
        .collect();
    let block_mask = (1u64 << m) - 1;

    // Deterministic chunked sum: per-chunk totals are reduced in order.
    let patterns = 1usize << total;
    let chunk = 1usize << total.min(14);
    let chunks = patterns / chunk;
    let partials = indexed_map(mode, chunks, |c| {
        let mut acc = 0.0;
        for mask in (c * chunk) as u64..((c + 1) * chunk) as u64 {
            let mut any_full = false;
            let mut any_empty = false;
            for b in 0..n {
                let bits = mask >> (b * m) & block_mask;
                any_full |= bits == block_mask;
                any_empty |= bits == 0;
            }
            if any_empty || !any_full {
                acc += weights[mask.count_ones() as usize];
            }
        }
        acc
    });
    Ok(partials.iter().sum::<f64>().clamp(0.0, 1.0))
}
