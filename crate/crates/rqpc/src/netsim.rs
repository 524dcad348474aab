//! Seeded Monte Carlo simulation of multi-hop transmission and butterfly
//! entanglement distribution.
//!
//! Two engines share one configuration:
//!
//! - The pattern-level engine ([`run_chain`], [`run_butterfly`]) samples
//!   photon arrivals per hop, applies the combinatorial success condition,
//!   and tracks gate and measurement errors classically against the
//!   correctable bounds of the code.
//! - The exact engine ([`run_chain_exact_small`], and [`run_butterfly`]
//!   with [`Engine::ExactSmall`]) executes every hop in the state-vector
//!   simulator: encode, per-qubit matter-photon transfer, erasure of lost
//!   photons, recovery, re-encode; fidelity is measured against the input.
//!
//! Gate errors are injected as independent X and Z flips at rate
//! `gate_error_rate` per two-qubit interface a cell passes through in one
//! hop: its encode fan-out, its sender transfer, and (when the photon
//! arrives) its receiver transfer. Measurement errors flip the classical
//! record of each survivor Z measurement at `meas_error_rate`. Both
//! engines use this same inventory.
//!
//! Every trial draws from its own counter-based random stream, so a seed
//! determines the statistics bit-for-bit at any thread count.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{chain_fidelity, link_probability, CodeParams, LinkBudget};
use crate::error::{Error, Result};
use crate::exec::{indexed_map, ExecMode};
use crate::paritycode::{
    correct_errors_register, encode_register, majority_vote, recover_register, success_condition,
    LossPattern, SampledRecovery,
};
use crate::rng::trial_rng;
use crate::statevec::{retarget_after_removal, Gate, PureState};
use crate::transfer::{
    default_assignment, matter_to_photon_sampled, photon_to_matter_sampled, PhotonAssignment,
};

/// Chain topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainMode {
    /// One-way transmission over `hops` links.
    Direct,
    /// A central node sends the halves of an encoded Bell pair in opposite
    /// directions, `hops` links each way.
    Butterfly,
}

/// Which simulation engine to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Pattern,
    ExactSmall,
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub hops: u32,
    pub budget: LinkBudget,
    pub code: CodeParams,
    pub qubits_per_photon: u32,
    pub gate_error_rate: f64,
    pub meas_error_rate: f64,
    pub per_hop_transfer_fidelity: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: ChainMode,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hops == 0 {
            return Err(Error::ZeroCount { name: "hops" });
        }
        if self.trials == 0 {
            return Err(Error::ZeroCount { name: "trials" });
        }
        for (name, value) in [
            ("gate_error_rate", self.gate_error_rate),
            ("meas_error_rate", self.meas_error_rate),
            ("per_hop_transfer_fidelity", self.per_hop_transfer_fidelity),
        ] {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(Error::ProbabilityOutOfRange { name, value });
            }
        }
        // Surface invalid budgets even if the struct was built directly.
        LinkBudget::new(
            self.budget.source_efficiency,
            self.budget.detector_efficiency,
            self.budget.coupling_efficiency,
            self.budget.distance_km,
            self.budget.attenuation_km,
        )?;
        Ok(())
    }
}

/// Aggregated outcome statistics of one experiment.
///
/// `successes`, `heralded_failures`, and `logical_errors` partition the
/// trials. The wall clock is measurement metadata and stays out of
/// serialized artifacts so that replays are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub successes: u64,
    pub heralded_failures: u64,
    pub logical_errors: u64,
    pub success_rate: f64,
    pub success_std_error: f64,
    pub estimated_fidelity: f64,
    #[serde(skip)]
    pub wall_clock: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TrialOutcome {
    Success,
    Heralded,
    /// Completed but corrupted; fidelity against the input when the engine
    /// measures it (exact engine), 0.0 placeholder otherwise.
    Logical(f64),
}

fn aggregate(
    outcomes: &[TrialOutcome],
    fidelity_scale: f64,
    exact: bool,
    elapsed: Duration,
) -> TrialStats {
    let trials = outcomes.len() as u64;
    let mut successes = 0u64;
    let mut heralded = 0u64;
    let mut logical = 0u64;
    let mut fidelity_sum = 0.0f64;
    for o in outcomes {
        match o {
            TrialOutcome::Success => {
                successes += 1;
                fidelity_sum += 1.0;
            }
            TrialOutcome::Heralded => heralded += 1,
            TrialOutcome::Logical(f) => {
                logical += 1;
                fidelity_sum += f;
            }
        }
    }
    let completed = successes + logical;
    let rate = successes as f64 / trials as f64;
    let estimated_fidelity = if completed == 0 {
        0.0
    } else if exact {
        fidelity_scale * fidelity_sum / completed as f64
    } else {
        fidelity_scale * successes as f64 / completed as f64
    };
    TrialStats {
        trials,
        successes,
        heralded_failures: heralded,
        logical_errors: logical,
        success_rate: rate,
        success_std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        estimated_fidelity,
        wall_clock: elapsed,
    }
}

/// Pattern-level Monte Carlo of a direct chain.
pub fn run_chain(config: &ChainConfig, mode: ExecMode) -> Result<TrialStats> {
    config.validate()?;
    if config.mode != ChainMode::Direct {
        return Err(Error::InvalidConfig(
            "run_chain expects mode = Direct".into(),
        ));
    }
    let start = Instant::now();
    let p = link_probability(&config.budget);
    let assignment = default_assignment(config.code, config.qubits_per_photon)?;
    let outcomes = indexed_map(mode, config.trials as usize, |trial| {
        let mut rng = trial_rng(config.seed, trial as u64);
        pattern_trial(config, &assignment, p, config.hops, &mut rng)
    });
    let scale = chain_fidelity(config.per_hop_transfer_fidelity, config.hops)?;
    Ok(aggregate(&outcomes, scale, false, start.elapsed()))
}

/// Pattern-level butterfly: both directions must succeed.
fn run_butterfly_pattern(config: &ChainConfig, mode: ExecMode) -> Result<TrialStats> {
    let start = Instant::now();
    let p = link_probability(&config.budget);
    let assignment = default_assignment(config.code, config.qubits_per_photon)?;
    let outcomes = indexed_map(mode, config.trials as usize, |trial| {
        let mut rng = trial_rng(config.seed, trial as u64);
        let left = pattern_trial(config, &assignment, p, config.hops, &mut rng);
        let right = pattern_trial(config, &assignment, p, config.hops, &mut rng);
        match (left, right) {
            (TrialOutcome::Heralded, _) | (_, TrialOutcome::Heralded) => TrialOutcome::Heralded,
            (TrialOutcome::Logical(_), _) | (_, TrialOutcome::Logical(_)) => {
                TrialOutcome::Logical(0.0)
            }
            _ => TrialOutcome::Success,
        }
    });
    let scale = chain_fidelity(config.per_hop_transfer_fidelity, 2 * config.hops)?;
    Ok(aggregate(&outcomes, scale, false, start.elapsed()))
}

/// One pattern-level traversal of `hops` links; the shared core of the
/// direct and butterfly engines.
fn pattern_trial(
    config: &ChainConfig,
    assignment: &PhotonAssignment,
    p: f64,
    hops: u32,
    rng: &mut impl Rng,
) -> TrialOutcome {
    let code = config.code;
    let m = code.m as usize;
    let n = code.n as usize;
    let total = code.total_qubits();
    let eps = config.gate_error_rate;
    let meas = config.meas_error_rate;

    let mut logical_x = false;
    let mut logical_z = false;
    let mut arrived = vec![false; total];
    let mut x_flip = vec![false; total];
    let mut z_flip = vec![false; total];

    for _hop in 0..hops {
        // Photon arrivals decide the loss pattern.
        arrived.fill(false);
        for t in 0..assignment.photon_count() {
            if rng.random_bool(p) {
                for &(b, j) in assignment.qubits_of_photon(t) {
                    arrived[b as usize * m + j as usize] = true;
                }
            }
        }
        let any_full = (0..n).any(|b| arrived[b * m..(b + 1) * m].iter().all(|&a| a));
        let any_empty = (0..n).any(|b| arrived[b * m..(b + 1) * m].iter().all(|&a| !a));
        if any_empty || !any_full {
            return TrialOutcome::Heralded;
        }

        // Per-cell X/Z flip parities from the gate-error inventory:
        // encode + sender interfaces always, receiver interface if arrived.
        if eps > 0.0 {
            x_flip.fill(false);
            z_flip.fill(false);
            for cell in 0..total {
                let interfaces = if arrived[cell] { 3 } else { 2 };
                for _ in 0..interfaces {
                    x_flip[cell] ^= rng.random_bool(eps);
                    z_flip[cell] ^= rng.random_bool(eps);
                }
            }
        }

        // Loss-affected blocks: majority vote over the survivors' records,
        // which are flipped by X errors and by measurement errors.
        let mut intact_blocks: Vec<usize> = Vec::with_capacity(n);
        for b in 0..n {
            let cells = b * m..(b + 1) * m;
            if arrived[cells.clone()].iter().all(|&a| a) {
                intact_blocks.push(b);
                continue;
            }
            let mut records = Vec::with_capacity(m);
            for cell in cells {
                if arrived[cell] {
                    let meas_flip = meas > 0.0 && rng.random_bool(meas);
                    records.push(x_flip[cell] ^ meas_flip);
                }
            }
            // A record bit set means that survivor's reading is wrong, so a
            // wrong majority is exactly a set majority vote.
            if majority_vote(&records) {
                logical_z = !logical_z;
            }
        }

        if eps > 0.0 {
            // Intact blocks: intra-block majority repairs up to
            // floor((m-1)/2) bit flips; past that it repairs the complement
            // and the net X on the whole block is a logical phase flip.
            let mut z_flagged = Vec::new();
            for (rank, &b) in intact_blocks.iter().enumerate() {
                let cells = b * m..(b + 1) * m;
                let flipped: Vec<usize> = cells
                    .clone()
                    .filter(|&c| x_flip[c])
                    .map(|c| c - b * m)
                    .collect();
                let t = flipped.len();
                if 2 * t > m || (2 * t == m && flipped.contains(&0)) {
                    logical_z = !logical_z;
                }
                if cells.filter(|&c| z_flip[c]).count() % 2 == 1 {
                    z_flagged.push(rank);
                }
            }
            // Across blocks: inter-block majority repairs up to
            // floor((q-1)/2) sign-flipped blocks; past that the repair
            // inverts every block, a logical bit flip.
            let q = intact_blocks.len();
            let u = z_flagged.len();
            if 2 * u > q || (2 * u == q && z_flagged.contains(&0)) {
                logical_x = !logical_x;
            }
        }
    }

    if logical_x || logical_z {
        TrialOutcome::Logical(0.0)
    } else {
        TrialOutcome::Success
    }
}

const EXACT_MAX_QUBITS: usize = 9;
const EXACT_MAX_HOPS: u32 = 3;
const FIDELITY_TOL: f64 = 1e-9;

fn validate_exact(config: &ChainConfig) -> Result<()> {
    config.validate()?;
    if config.code.total_qubits() > EXACT_MAX_QUBITS {
        return Err(Error::InvalidConfig(format!(
            "exact engine is limited to m*n <= {EXACT_MAX_QUBITS}, got {}",
            config.code.total_qubits()
        )));
    }
    if config.hops > EXACT_MAX_HOPS {
        return Err(Error::InvalidConfig(format!(
            "exact engine is limited to {EXACT_MAX_HOPS} hops, got {}",
            config.hops
        )));
    }
    if config.qubits_per_photon != 1 {
        return Err(Error::InvalidConfig(
            "exact engine transfers one qubit per photon".into(),
        ));
    }
    Ok(())
}

/// Full state-vector Monte Carlo of a direct chain: every hop runs
/// encode, transfer, loss, recovery, and re-encode on the simulator, and
/// the recovered state is compared against the (per-trial random) input.
pub fn run_chain_exact_small(config: &ChainConfig, mode: ExecMode) -> Result<TrialStats> {
    validate_exact(config)?;
    if config.mode != ChainMode::Direct {
        return Err(Error::InvalidConfig(
            "run_chain_exact_small expects mode = Direct".into(),
        ));
    }
    let start = Instant::now();
    let p = link_probability(&config.budget);
    let outcomes = indexed_map(mode, config.trials as usize, |trial| {
        let mut rng = trial_rng(config.seed, trial as u64);
        exact_chain_trial(config, p, &mut rng).expect("exact trial on validated config")
    });
    let scale = chain_fidelity(config.per_hop_transfer_fidelity, config.hops)?;
    Ok(aggregate(&outcomes, scale, true, start.elapsed()))
}

/// Butterfly entanglement distribution with either engine. `hops` counts
/// links per direction.
pub fn run_butterfly(config: &ChainConfig, engine: Engine, mode: ExecMode) -> Result<TrialStats> {
    config.validate()?;
    if config.mode != ChainMode::Butterfly {
        return Err(Error::InvalidConfig(
            "run_butterfly expects mode = Butterfly".into(),
        ));
    }
    match engine {
        Engine::Pattern => run_butterfly_pattern(config, mode),
        Engine::ExactSmall => {
            validate_exact(config)?;
            let start = Instant::now();
            let p = link_probability(&config.budget);
            let outcomes = indexed_map(mode, config.trials as usize, |trial| {
                let mut rng = trial_rng(config.seed, trial as u64);
                exact_butterfly_trial(config, p, &mut rng).expect("exact trial on validated config")
            });
            let scale = chain_fidelity(config.per_hop_transfer_fidelity, 2 * config.hops)?;
            Ok(aggregate(&outcomes, scale, true, start.elapsed()))
        }
    }
}

fn random_logical(rng: &mut impl Rng) -> (Complex64, Complex64) {
    let theta = rng.random::<f64>() * std::f64::consts::PI;
    let phi = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
    (
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    )
}

fn inject_pauli_noise(
    state: &mut PureState,
    site: usize,
    eps: f64,
    rng: &mut impl Rng,
) -> Result<()> {
    if eps > 0.0 {
        if rng.random_bool(eps) {
            state.apply_1q(site, Gate::X)?;
        }
        if rng.random_bool(eps) {
            state.apply_1q(site, Gate::Z)?;
        }
    }
    Ok(())
}

enum HopResult {
    Heralded,
    Done { logical_site: usize },
}

/// One exact hop: per-cell transfer onto photons, sampled loss, recovery.
/// `cells` maps this code's cells to sites and is rewritten; removals are
/// also applied to `spectators` (site tables of other register content).
fn exact_hop(
    state: &mut PureState,
    code: CodeParams,
    cells: &mut [Option<usize>],
    spectators: &mut [Option<usize>],
    p: f64,
    config: &ChainConfig,
    rng: &mut impl Rng,
) -> Result<HopResult> {
    let m = code.m;
    let eps = config.gate_error_rate;
    let mut pattern = LossPattern::all_arrived(code);

    let retarget = |cells: &mut [Option<usize>], spectators: &mut [Option<usize>], s: usize| {
        retarget_after_removal(cells, s);
        retarget_after_removal(spectators, s);
    };

    for cell in 0..code.total_qubits() {
        let (b, j) = (cell as u32 / m, cell as u32 % m);
        let site = cells[cell].expect("cell present before transfer");

        // Encode-stage and sender-interface error sites.
        inject_pauli_noise(state, site, eps, rng)?;
        inject_pauli_noise(state, site, eps, rng)?;

        let (rails, send_record) = matter_to_photon_sampled(state, site, rng)?;
        cells[cell] = None;
        retarget(cells, spectators, site);

        if rng.random_bool(p) {
            let (matter, recv_record) = photon_to_matter_sampled(state, rails, rng)?;
            retarget(cells, spectators, rails.rail0);
            retarget(cells, spectators, rails.rail1 - 1);
            // Fold both pending corrections eagerly.
            let c = send_record.corrections[0].compose(recv_record.corrections[0]);
            if c.x {
                state.apply_1q(matter, Gate::X)?;
            }
            if c.z {
                state.apply_1q(matter, Gate::Z)?;
            }
            inject_pauli_noise(state, matter, eps, rng)?;
            cells[cell] = Some(matter);
        } else {
            // Heralded loss: the environment absorbs both rails.
            state.erase_sampled(rails.rail0, rng)?;
            retarget(cells, spectators, rails.rail0);
            state.erase_sampled(rails.rail1 - 1, rng)?;
            retarget(cells, spectators, rails.rail1 - 1);
            pattern.mark_lost(b, j);
        }
    }

    if !success_condition(&pattern) {
        return Ok(HopResult::Heralded);
    }

    // Repair bit and phase flips on the intact blocks before recovery;
    // the loss-affected blocks are measured out anyway. At eps = 0 the
    // syndromes are all trivial, so the stage is skipped.
    if eps > 0.0 {
        let intact: Vec<Vec<usize>> = (0..code.n)
            .filter(|&b| pattern.block_is_intact(b))
            .map(|b| (0..m).map(|j| cells[(b * m + j) as usize].expect("intact cell")).collect())
            .collect();
        correct_errors_register(state, &intact)?;
    }

    let mut removals = Vec::new();
    let mut policy = SampledRecovery {
        rng,
        meas_error_rate: config.meas_error_rate,
    };
    let logical_site = recover_register(state, code, &pattern, cells, &mut policy, &mut removals)?;
    for s in removals {
        retarget_after_removal(spectators, s);
    }
    Ok(HopResult::Done { logical_site })
}

fn exact_chain_trial(config: &ChainConfig, p: f64, rng: &mut impl Rng) -> Result<TrialOutcome> {
    let (alpha, beta) = random_logical(rng);
    let mut state = PureState::single_qubit(alpha, beta)?;
    let mut cells: Vec<Option<usize>> = encode_register(&mut state, 0, config.code)?
        .into_iter()
        .map(Some)
        .collect();
    let mut none: [Option<usize>; 0] = [];

    for hop in 0..config.hops {
        match exact_hop(
            &mut state,
            config.code,
            &mut cells,
            &mut none,
            p,
            config,
            rng,
        )? {
            HopResult::Heralded => return Ok(TrialOutcome::Heralded),
            HopResult::Done { logical_site } => {
                if hop + 1 < config.hops {
                    debug_assert_eq!(logical_site, 0);
                    cells = encode_register(&mut state, logical_site, config.code)?
                        .into_iter()
                        .map(Some)
                        .collect();
                }
            }
        }
    }

    let reference = PureState::single_qubit(alpha, beta)?;
    let fidelity = state.fidelity(&reference)?;
    if fidelity >= 1.0 - FIDELITY_TOL {
        Ok(TrialOutcome::Success)
    } else {
        Ok(TrialOutcome::Logical(fidelity))
    }
}

fn exact_butterfly_trial(config: &ChainConfig, p: f64, rng: &mut impl Rng) -> Result<TrialOutcome> {
    // Parity-encoded Bell pair at the central node.
    let mut state = PureState::basis_state(2, "00")?;
    state.apply_1q(0, Gate::H)?;
    state.apply_cnot(0, 1)?;
    let mut left: Vec<Option<usize>> = encode_register(&mut state, 0, config.code)?
        .into_iter()
        .map(Some)
        .collect();
    let mut right: Vec<Option<usize>> = encode_register(&mut state, 1, config.code)?
        .into_iter()
        .map(Some)
        .collect();

    for hop in 0..config.hops {
        match exact_hop(
            &mut state,
            config.code,
            &mut left,
            &mut right,
            p,
            config,
            rng,
        )? {
            HopResult::Heralded => return Ok(TrialOutcome::Heralded),
            HopResult::Done { logical_site } => {
                if hop + 1 < config.hops {
                    left = encode_register(&mut state, logical_site, config.code)?
                        .into_iter()
                        .map(Some)
                        .collect();
                } else {
                    left = vec![Some(logical_site)];
                }
            }
        }
        match exact_hop(
            &mut state,
            config.code,
            &mut right,
            &mut left,
            p,
            config,
            rng,
        )? {
            HopResult::Heralded => return Ok(TrialOutcome::Heralded),
            HopResult::Done { logical_site } => {
                if hop + 1 < config.hops {
                    right = encode_register(&mut state, logical_site, config.code)?
                        .into_iter()
                        .map(Some)
                        .collect();
                } else {
                    right = vec![Some(logical_site)];
                }
            }
        }
    }

    // Two sites remain; compare against the Bell pair they should form.
    debug_assert_eq!(state.num_sites(), 2);
    let mut bell = PureState::basis_state(2, "00")?;
    bell.apply_1q(0, Gate::H)?;
    bell.apply_cnot(0, 1)?;
    // Recovery may have left the two logical sites in either register
    // order; the Bell pair is symmetric under swap, so order is moot.
    let fidelity = state.fidelity(&bell)?;
    if fidelity >= 1.0 - FIDELITY_TOL {
        Ok(TrialOutcome::Success)
    } else {
        Ok(TrialOutcome::Logical(fidelity))
    }
}

/// Closed-form probability that a majority vote over `survivors` Z
/// measurements, each independently misread at `meas_error_rate`, decides
/// wrongly. Ties (even counts) trust the first-indexed survivor.
pub fn majority_vote_logical_error(survivors: u32, meas_error_rate: f64) -> Result<f64> {
    if survivors == 0 {
        return Err(Error::ZeroCount { name: "survivors" });
    }
    let q = meas_error_rate;
    if !(q.is_finite() && (0.0..=1.0).contains(&q)) {
        return Err(Error::ProbabilityOutOfRange {
            name: "meas_error_rate",
            value: q,
        });
    }
    let s = survivors as usize;
    let mut wrong = 0.0f64;
    for f in 0..=s {
        let p_f = binomial(s, f) * q.powi(f as i32) * (1.0 - q).powi((s - f) as i32);
        if 2 * f > s {
            wrong += p_f;
        } else if 2 * f == s && f > 0 {
            // Tie: wrong exactly when the first record is among the flips.
            wrong += p_f * f as f64 / s as f64;
        }
    }
    Ok(wrong)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Monte Carlo estimate of the majority-vote logical error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorityVoteEstimate {
    pub trials: u64,
    pub wrong: u64,
    pub rate: f64,
    pub std_error: f64,
}

/// Simulates `trials` majority votes over `survivors` records flipped at
/// `meas_error_rate`, counting wrong decisions.
pub fn simulate_majority_vote_error(
    survivors: u32,
    meas_error_rate: f64,
    trials: u64,
    seed: u64,
    mode: ExecMode,
) -> Result<MajorityVoteEstimate> {
    if survivors == 0 {
        return Err(Error::ZeroCount { name: "survivors" });
    }
    if trials == 0 {
        return Err(Error::ZeroCount { name: "trials" });
    }
    if !(meas_error_rate.is_finite() && (0.0..=1.0).contains(&meas_error_rate)) {
        return Err(Error::ProbabilityOutOfRange {
            name: "meas_error_rate",
            value: meas_error_rate,
        });
    }
    let wrong_flags = indexed_map(mode, trials as usize, |trial| {
        let mut rng = trial_rng(seed, trial as u64);
        let records: Vec<bool> = (0..survivors)
            .map(|_| rng.random_bool(meas_error_rate))
            .collect();
        majority_vote(&records)
    });
    let wrong = wrong_flags.iter().filter(|&&w| w).count() as u64;
    let rate = wrong as f64 / trials as f64;
    Ok(MajorityVoteEstimate {
        trials,
        wrong,
        rate,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}

/// Convenience constructor for the cross-check tests: an ideal-efficiency
/// budget whose link probability is exactly `p`.
pub fn budget_with_probability(p: f64) -> Result<LinkBudget> {
    if !(p.is_finite() && 0.0 < p && p <= 1.0) {
        return Err(Error::ProbabilityOutOfRange {
            name: "p",
            value: p,
        });
    }
    LinkBudget::new(1.0, 1.0, 1.0, -25.0 * p.ln(), 25.0)
}
