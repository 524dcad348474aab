//! Closed-form loss, failure-probability, link-budget, rate, and
//! code-optimization computations for redundant quantum parity codes.
//!
//! A code with `n` parity blocks of `m` physical qubits each survives a
//! transmission round exactly when at least one block arrives complete and
//! every block keeps at least one qubit. With independent per-qubit arrival
//! probability `p` the failure probability is
//!
//! ```text
//! p_f = 1 - [1 - (1-p)^m]^n + [1 - p^m - (1-p)^m]^n
//! ```
//!
//! evaluated here with `ln_1p`/`exp_m1` so that small failure probabilities
//! keep full relative accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{indexed_fold, ExecMode};
use crate::rng::trial_rng;
use crate::transfer::PhotonAssignment;
use rand::Rng;

/// Shape of a redundant quantum parity code: `n` blocks of `m` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    /// Physical qubits per parity block.
    pub m: u32,
    /// Number of parity blocks.
    pub n: u32,
}

impl CodeParams {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroCount {
                name: "m (qubits per block)",
            });
        }
        if n == 0 {
            return Err(Error::ZeroCount {
                name: "n (number of blocks)",
            });
        }
        Ok(CodeParams { m, n })
    }

    pub fn total_qubits(&self) -> usize {
        self.m as usize * self.n as usize
    }
}

/// Physical parameters of one fiber link between adjacent nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Probability the source emits a single photon.
    pub source_efficiency: f64,
    /// Probability an arriving photon is detected.
    pub detector_efficiency: f64,
    /// Probability of coupling a photon to the cavity.
    pub coupling_efficiency: f64,
    /// Node spacing in km.
    pub distance_km: f64,
    /// Attenuation length of the channel in km (25 km for commercial fiber).
    pub attenuation_km: f64,
}

impl LinkBudget {
    pub fn new(
        source_efficiency: f64,
        detector_efficiency: f64,
        coupling_efficiency: f64,
        distance_km: f64,
        attenuation_km: f64,
    ) -> Result<Self> {
        check_probability("source_efficiency", source_efficiency)?;
        check_probability("detector_efficiency", detector_efficiency)?;
        check_probability("coupling_efficiency", coupling_efficiency)?;
        if !(distance_km.is_finite() && distance_km >= 0.0) {
            return Err(Error::NegativeDistance(distance_km));
        }
        if !(attenuation_km.is_finite() && attenuation_km > 0.0) {
            return Err(Error::NonPositiveAttenuation(attenuation_km));
        }
        Ok(LinkBudget {
            source_efficiency,
            detector_efficiency,
            coupling_efficiency,
            distance_km,
            attenuation_km,
        })
    }
}

/// Per-hop figures for an end-to-end chain estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainBudget {
    pub hops: u32,
    pub per_hop_failure: f64,
    pub per_hop_fidelity: f64,
    pub cycle_time_s: f64,
}

impl ChainBudget {
    pub fn new(
        hops: u32,
        per_hop_failure: f64,
        per_hop_fidelity: f64,
        cycle_time_s: f64,
    ) -> Result<Self> {
        if hops == 0 {
            return Err(Error::ZeroCount { name: "hops" });
        }
        check_probability("per_hop_failure", per_hop_failure)?;
        check_probability("per_hop_fidelity", per_hop_fidelity)?;
        if !(cycle_time_s.is_finite() && cycle_time_s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "cycle time must be positive, got {cycle_time_s}"
            )));
        }
        Ok(ChainBudget {
            hops,
            per_hop_failure,
            per_hop_fidelity,
            cycle_time_s,
        })
    }

    pub fn raw_rate_hz(&self) -> f64 {
        1.0 / self.cycle_time_s
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}

/// Probability that none of the `m` photons of one block arrives: `(1-p)^m`.
pub fn block_total_loss_prob(p: f64, m: u32) -> Result<f64> {
    check_probability("p", p)?;
    if m == 0 {
        return Err(Error::ZeroCount { name: "m" });
    }
    Ok((1.0 - p).powi(m as i32))
}

/// Probability that a transmission round fails for code `(m, n)` at
/// per-qubit arrival probability `p`.
pub fn failure_probability(p: f64, code: CodeParams) -> Result<f64> {
    check_probability("p", p)?;
    let n = code.n as f64;
    let q = (1.0 - p).powi(code.m as i32);
    // 1 - p^m - (1-p)^m can round slightly negative for m = 1.
    let some_lost = (1.0 - p.powi(code.m as i32) - q).max(0.0);
    let no_block_empty = -(n * (-q).ln_1p()).exp_m1();
    let none_full = if some_lost > 0.0 {
        (n * some_lost.ln()).exp()
    } else {
        0.0
    };
    Ok((no_block_empty + none_full).clamp(0.0, 1.0))
}

/// Per-photon probability of a successful single-link transfer.
///
/// Product of the source, detector, and coupling efficiencies, attenuated
/// over the node spacing: `eta_s * eta_d * eta_c * exp(-L/L0)`. With all
/// three efficiencies at 0.97 and L = 10 km on L0 = 25 km fiber this gives
/// p = 0.6118.
pub fn link_probability(budget: &LinkBudget) -> f64 {
    budget.source_efficiency
        * budget.detector_efficiency
        * budget.coupling_efficiency
        * (-budget.distance_km / budget.attenuation_km).exp()
}

/// Probability that every hop of an independent-hop chain succeeds.
pub fn chain_success(per_hop_failure: f64, hops: u32) -> Result<f64> {
    check_probability("per_hop_failure", per_hop_failure)?;
    if hops == 0 {
        return Err(Error::ZeroCount { name: "hops" });
    }
    Ok(((hops as f64) * (-per_hop_failure).ln_1p()).exp())
}

/// End-to-end fidelity under the multiplicative per-hop model: `F^hops`.
pub fn chain_fidelity(per_hop_fidelity: f64, hops: u32) -> Result<f64> {
    check_probability("per_hop_fidelity", per_hop_fidelity)?;
    if hops == 0 {
        return Err(Error::ZeroCount { name: "hops" });
    }
    Ok(per_hop_fidelity.powi(hops as i32))
}

/// Cost metric minimized by [`optimize_code`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostMetric {
    /// Minimize `m * n` (ties broken by smaller `m`). The default.
    TotalQubits,
    /// Minimize the number of blocks `n` (ties broken by smaller `m`).
    MinBlocks,
}

/// Search bounds for [`optimize_code`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub m_max: u32,
    pub n_max: u32,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            m_max: 64,
            n_max: 100_000,
        }
    }
}

/// A feasible code found by the optimizer, with its achieved failure rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedCode {
    pub code: CodeParams,
    pub failure_probability: f64,
}

/// Result of a code search: either the cheapest feasible code or a heralded
/// infeasibility. Infeasible is reported data, not an error; the code family
/// cannot beat 50% loss, so `p <= 0.5` is expected to land here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OptimizeOutcome {
    Found(OptimizedCode),
    Infeasible {
        m_max: u32,
        n_max: u32,
        /// True when `p <= 0.5`, i.e. beyond the loss the code can tolerate.
        below_loss_bound: bool,
    },
}

/// Finds the cheapest `(m, n)` with `failure_probability(p, code) <= pf_target`.
///
/// For fixed `m` the failure probability first falls and then rises with
/// `n` (the no-complete-block term decays while the empty-block term grows),
/// so the scan over `n` stops as soon as the value increases while still
/// above target, making per-`m` infeasibility decidable.
pub fn optimize_code(
    p: f64,
    pf_target: f64,
    cost: CostMetric,
    bounds: SearchBounds,
) -> Result<OptimizeOutcome> {
    if !(p.is_finite() && 0.0 < p && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange {
            name: "p",
            value: p,
        });
    }
    if !(pf_target.is_finite() && 0.0 < pf_target && pf_target < 1.0) {
        return Err(Error::ProbabilityOutOfRange {
            name: "pf_target",
            value: pf_target,
        });
    }

    let mut best: Option<(u64, OptimizedCode)> = None;
    for m in 1..=bounds.m_max {
        if let Some((best_cost, _)) = best {
            // Any feasible code at this m costs at least m qubits.
            if cost == CostMetric::TotalQubits && u64::from(m) >= best_cost {
                break;
            }
        }
        if let Some(found) = minimal_blocks_for(p, m, pf_target, bounds.n_max)? {
            let candidate_cost = match cost {
                CostMetric::TotalQubits => u64::from(m) * u64::from(found.code.n),
                CostMetric::MinBlocks => u64::from(found.code.n),
            };
            match best {
                Some((c, _)) if candidate_cost >= c => {}
                _ => best = Some((candidate_cost, found)),
            }
        }
    }

    Ok(match best {
        Some((_, found)) => OptimizeOutcome::Found(found),
        None => OptimizeOutcome::Infeasible {
            m_max: bounds.m_max,
            n_max: bounds.n_max,
            below_loss_bound: p <= 0.5,
        },
    })
}

/// Smallest feasible `n` for a fixed `m`, or `None` when no `n <= n_max` works.
fn minimal_blocks_for(p: f64, m: u32, pf_target: f64, n_max: u32) -> Result<Option<OptimizedCode>> {
    let mut prev = f64::INFINITY;
    for n in 1..=n_max {
        let code = CodeParams { m, n };
        let pf = failure_probability(p, code)?;
        if pf <= pf_target {
            return Ok(Some(OptimizedCode {
                code,
                failure_probability: pf,
            }));
        }
        if pf >= prev {
            // Past the minimum over n and still above target.
            return Ok(None);
        }
        prev = pf;
    }
    Ok(None)
}

/// Failure probability of a multiplexed transmission, where losing one
/// photon erases every qubit it carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplexedFailure {
    pub probability: f64,
    /// Binomial standard error when Monte Carlo estimated; `None` when exact.
    pub std_error: Option<f64>,
}

/// Photon counts up to this are resolved by exact subset enumeration.
pub const EXACT_ENUMERATION_MAX_PHOTONS: u32 = 24;

const MUX_MC_TRIALS: u64 = 1_000_000;
const MUX_MC_SEED: u64 = 0x6d75_7870;

/// Failure probability of the code under `assignment`, with photons lost
/// independently at probability `1 - p`.
///
/// Exact (all `2^K` photon-arrival subsets, weighted by
/// `p^arrived (1-p)^lost`) for `K <= 24`; Monte Carlo with a reported
/// standard error beyond that.
pub fn multiplexed_failure_probability(
    p: f64,
    assignment: &PhotonAssignment,
    mode: ExecMode,
) -> Result<MultiplexedFailure> {
    check_probability("p", p)?;
    if assignment.photon_count() <= EXACT_ENUMERATION_MAX_PHOTONS {
        Ok(MultiplexedFailure {
            probability: multiplexed_failure_exact(p, assignment, mode),
            std_error: None,
        })
    } else {
        Ok(multiplexed_failure_sampled(
            p,
            assignment,
            MUX_MC_TRIALS,
            MUX_MC_SEED,
            mode,
        ))
    }
}

fn multiplexed_failure_exact(p: f64, assignment: &PhotonAssignment, mode: ExecMode) -> f64 {
    let k = assignment.photon_count() as usize;
    let code = assignment.code();
    let m = code.m as u16;

    // Weight of a subset depends only on how many photons arrived.
    let weights: Vec<f64> = (0..=k)
        .map(|arrived| p.powi(arrived as i32) * (1.0 - p).powi((k - arrived) as i32))
        .collect();

    // Qubit block indices carried by each photon.
    let photon_blocks: Vec<Vec<u16>> = (0..k)
        .map(|t| {
            assignment
                .qubits_of_photon(t as u32)
                .iter()
                .map(|&(b, _)| b as u16)
                .collect()
        })
        .collect();

    // Split the subset space by the high photon bits; each chunk walks its
    // low bits in Gray-code order, updating per-block arrival counts one
    // toggled photon at a time.
    let low_bits = k.min(16);
    let high_bits = k - low_bits;
    let chunks = 1usize << high_bits;

    let partials: Vec<f64> = crate::exec::indexed_map(mode, chunks, |chunk| {
        let mut counts = vec![0u16; code.n as usize];
        let mut empty_blocks = code.n as usize;
        let mut full_blocks = 0usize;
        let mut arrived = 0usize;

        let toggle = |photon: usize,
                      counts: &mut [u16],
                      empty: &mut usize,
                      full: &mut usize,
                      arrived: &mut usize,
                      on: bool| {
            for &b in &photon_blocks[photon] {
                let c = &mut counts[b as usize];
                if on {
                    *c += 1;
                    if *c == 1 {
                        *empty -= 1;
                    }
                    if *c == m {
                        *full += 1;
                    }
                } else {
                    if *c == m {
                        *full -= 1;
                    }
                    *c -= 1;
                    if *c == 0 {
                        *empty += 1;
                    }
                }
            }
            *arrived = if on { *arrived + 1 } else { *arrived - 1 };
        };

        for photon in 0..high_bits {
            if chunk >> photon & 1 == 1 {
                toggle(
                    low_bits + photon,
                    &mut counts,
                    &mut empty_blocks,
                    &mut full_blocks,
                    &mut arrived,
                    true,
                );
            }
        }

        // Neumaier-compensated sum over the chunk.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let add = |sum: &mut f64, comp: &mut f64, x: f64| {
            let t = *sum + x;
            *comp += if sum.abs() >= x.abs() {
                (*sum - t) + x
            } else {
                (x - t) + *sum
            };
            *sum = t;
        };

        let mut gray = 0usize;
        for i in 0..(1usize << low_bits) {
            if i > 0 {
                let bit = i.trailing_zeros() as usize;
                let next = gray ^ (1 << bit);
                toggle(
                    bit,
                    &mut counts,
                    &mut empty_blocks,
                    &mut full_blocks,
                    &mut arrived,
                    next > gray,
                );
                gray = next;
            }
            if empty_blocks > 0 || full_blocks == 0 {
                add(&mut sum, &mut comp, weights[arrived]);
            }
        }
        sum + comp
    });

    partials.iter().sum::<f64>().clamp(0.0, 1.0)
}

/// Monte Carlo estimate of the multiplexed failure probability.
pub fn multiplexed_failure_sampled(
    p: f64,
    assignment: &PhotonAssignment,
    trials: u64,
    seed: u64,
    mode: ExecMode,
) -> MultiplexedFailure {
    let k = assignment.photon_count() as usize;
    let code = assignment.code();
    let photon_blocks: Vec<Vec<u16>> = (0..k)
        .map(|t| {
            assignment
                .qubits_of_photon(t as u32)
                .iter()
                .map(|&(b, _)| b as u16)
                .collect()
        })
        .collect();

    let failures: u64 = indexed_fold(
        mode,
        trials as usize,
        |trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let mut counts = vec![0u16; code.n as usize];
            for blocks in &photon_blocks {
                if rng.random_bool(p) {
                    for &b in blocks {
                        counts[b as usize] += 1;
                    }
                }
            }
            let full = counts.contains(&(code.m as u16));
            let empty = counts.contains(&0);
            u64::from(empty || !full)
        },
        0u64,
        |acc, x| acc + x,
    );

    let rate = failures as f64 / trials as f64;
    MultiplexedFailure {
        probability: rate,
        std_error: Some((rate * (1.0 - rate) / trials as f64).sqrt()),
    }
}

/// End-to-end planning figures for a repeater chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub link_probability: f64,
    pub per_hop_failure: f64,
    pub raw_rate_hz: f64,
    pub qubits_per_node: usize,
    pub total_qubits: usize,
    pub end_to_end_success: f64,
    pub end_to_end_fidelity: f64,
    pub rate_per_total_qubit: f64,
    pub annotations: Vec<String>,
}

/// Success rate this report compares the chain against when annotating.
const REFERENCE_SUCCESS_TARGET: f64 = 0.98;

/// Assembles the end-to-end report for transmitting over `hops` links with
/// the given code. `reencode_buffers` doubles the per-node qubit count to
/// account for a second register held during re-encoding.
pub fn rate_report(
    link: &LinkBudget,
    code: CodeParams,
    hops: u32,
    cycle_time_s: f64,
    per_hop_fidelity: f64,
    reencode_buffers: bool,
) -> Result<RateReport> {
    let p = link_probability(link);
    let per_hop_failure = failure_probability(p, code)?;
    let chain = ChainBudget::new(hops, per_hop_failure, per_hop_fidelity, cycle_time_s)?;

    let qubits_per_node = code.total_qubits() * if reencode_buffers { 2 } else { 1 };
    let total_qubits = qubits_per_node * hops as usize;
    let end_to_end_success = chain_success(per_hop_failure, hops)?;
    let end_to_end_fidelity = chain_fidelity(per_hop_fidelity, hops)?;

    let mut annotations = Vec::new();
    if hops > 1 && end_to_end_success < REFERENCE_SUCCESS_TARGET {
        // (1 - x)^hops >= target  <=>  x <= 1 - target^(1/hops)
        let required = -(REFERENCE_SUCCESS_TARGET.ln() / hops as f64).exp_m1();
        annotations.push(format!(
            "end-to-end success (1 - p_f)^hops = {end_to_end_success:.4} at per-hop failure \
             {per_hop_failure:.3e}; reaching {REFERENCE_SUCCESS_TARGET} over {hops} hops would \
             need per-hop failure <= {required:.3e}"
        ));
    }

    Ok(RateReport {
        link_probability: p,
        per_hop_failure,
        raw_rate_hz: chain.raw_rate_hz(),
        qubits_per_node,
        total_qubits,
        end_to_end_success,
        end_to_end_fidelity,
        rate_per_total_qubit: chain.raw_rate_hz() * end_to_end_success / total_qubits as f64,
        annotations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paritycode::brute_force_failure_prob;
    use crate::transfer::default_assignment;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn block_loss_examples() {
        assert_eq!(block_total_loss_prob(1.0, 3).unwrap(), 0.0);
        assert_eq!(block_total_loss_prob(0.5, 1).unwrap(), 0.5);
        assert_abs_diff_eq!(
            block_total_loss_prob(0.95, 3).unwrap(),
            1.25e-4,
            epsilon = 1e-18
        );
        assert!(block_total_loss_prob(1.2, 3).is_err());
        assert!(block_total_loss_prob(0.5, 0).is_err());
    }

    #[test]
    fn failure_probability_known_values() {
        let c11 = CodeParams::new(1, 1).unwrap();
        assert_abs_diff_eq!(failure_probability(0.5, c11).unwrap(), 0.5, epsilon = 1e-15);

        // 1 - (0.99^2 - 0.18^2) for (m, n) = (2, 2) at p = 0.9.
        let c22 = CodeParams::new(2, 2).unwrap();
        assert_abs_diff_eq!(
            failure_probability(0.9, c22).unwrap(),
            0.0523,
            epsilon = 1e-15
        );

        let c34 = CodeParams::new(3, 4).unwrap();
        assert_abs_diff_eq!(
            failure_probability(0.95, c34).unwrap(),
            9.122500468747582e-4,
            epsilon = 1e-15
        );
    }

    #[test]
    fn failure_probability_matches_brute_force() {
        // Frozen from the 2^12-pattern enumeration oracle.
        let c34 = CodeParams::new(3, 4).unwrap();
        let oracle = brute_force_failure_prob(0.95, c34, ExecMode::Sequential).unwrap();
        let formula = failure_probability(0.95, c34).unwrap();
        assert!((formula - oracle).abs() / oracle < 1e-9);

        let c22 = CodeParams::new(2, 2).unwrap();
        let oracle = brute_force_failure_prob(0.9, c22, ExecMode::Sequential).unwrap();
        assert_abs_diff_eq!(oracle, 0.0523, epsilon = 1e-15);
    }

    #[test]
    fn table_row_codes_stay_under_threshold() {
        for (p, m, n) in [(0.95, 3, 4), (0.90, 4, 8), (0.82, 6, 22), (0.67, 13, 1500)] {
            let pf = failure_probability(p, CodeParams::new(m, n).unwrap()).unwrap();
            assert!(pf <= 1.2e-3, "p={p}: pf={pf}");
            assert!(pf > 1e-4, "p={p}: pf={pf}");
        }
    }

    #[test]
    fn link_probability_examples() {
        let ideal = LinkBudget::new(1.0, 1.0, 1.0, 0.0, 25.0).unwrap();
        assert_eq!(link_probability(&ideal), 1.0);

        let worked = LinkBudget::new(0.97, 0.97, 0.97, 10.0, 25.0).unwrap();
        assert_abs_diff_eq!(
            link_probability(&worked),
            0.6117830073754851,
            epsilon = 1e-15
        );

        let one_attenuation = LinkBudget::new(1.0, 1.0, 1.0, 25.0, 25.0).unwrap();
        assert_abs_diff_eq!(
            link_probability(&one_attenuation),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn chain_examples() {
        assert_eq!(chain_success(0.0, 80).unwrap(), 1.0);
        assert_abs_diff_eq!(
            chain_success(1e-3, 80).unwrap(),
            0.9230793978373362,
            epsilon = 1e-12
        );
        assert_eq!(chain_success(0.5, 1).unwrap(), 0.5);

        assert_abs_diff_eq!(
            chain_fidelity(0.999, 80).unwrap(),
            0.9230793978373362,
            epsilon = 1e-12
        );
        assert_eq!(chain_fidelity(1.0, 1000).unwrap(), 1.0);
        assert_abs_diff_eq!(
            chain_fidelity(0.99, 10).unwrap(),
            0.9043820750088044,
            epsilon = 1e-15
        );
        assert!(chain_fidelity(0.99, 0).is_err());
    }

    #[test]
    fn optimizer_reproduces_resource_table() {
        let rows = [(0.95, 3, 4), (0.90, 4, 8), (0.82, 6, 22)];
        for (p, m, n) in rows {
            match optimize_code(p, 1.2e-3, CostMetric::TotalQubits, SearchBounds::default())
                .unwrap()
            {
                OptimizeOutcome::Found(found) => {
                    assert_eq!((found.code.m, found.code.n), (m, n), "p = {p}");
                    assert!(found.failure_probability <= 1.2e-3);
                }
                other => panic!("expected a feasible code at p = {p}, got {other:?}"),
            }
        }
    }

    #[test]
    fn optimizer_near_perfect_channel() {
        match optimize_code(0.999, 0.5, CostMetric::TotalQubits, SearchBounds::default()).unwrap() {
            OptimizeOutcome::Found(found) => assert_eq!((found.code.m, found.code.n), (1, 1)),
            other => panic!("got {other:?}"),
        }
    }

    #[test]
    fn optimizer_heralds_infeasible_below_half() {
        match optimize_code(
            0.4,
            1.2e-3,
            CostMetric::TotalQubits,
            SearchBounds::default(),
        )
        .unwrap()
        {
            OptimizeOutcome::Infeasible {
                below_loss_bound, ..
            } => assert!(below_loss_bound),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn optimizer_output_is_locally_minimal() {
        // Shrinking m or n from the optimum (re-optimizing the other
        // parameter) never yields a cheaper feasible code.
        for p in [0.95, 0.90, 0.82] {
            let found =
                match optimize_code(p, 1.2e-3, CostMetric::TotalQubits, SearchBounds::default())
                    .unwrap()
                {
                    OptimizeOutcome::Found(f) => f,
                    other => panic!("got {other:?}"),
                };
            let (m, n) = (found.code.m, found.code.n);
            let cost = found.code.total_qubits();
            if n > 1 {
                let pf = failure_probability(p, CodeParams::new(m, n - 1).unwrap()).unwrap();
                assert!(pf > 1.2e-3, "p={p}: (m, n-1) should be infeasible");
            }
            if m > 1 {
                if let Some(alt) = minimal_blocks_for(p, m - 1, 1.2e-3, 100_000).unwrap() {
                    assert!(alt.code.total_qubits() >= cost);
                }
            }
        }
    }

    #[test]
    fn min_blocks_metric_prefers_fewer_blocks() {
        // At p = 0.90, total-qubits gives (4, 8); allowing more qubits per
        // block strictly reduces the block count.
        let tq = optimize_code(
            0.90,
            1.2e-3,
            CostMetric::TotalQubits,
            SearchBounds::default(),
        )
        .unwrap();
        let mb =
            optimize_code(0.90, 1.2e-3, CostMetric::MinBlocks, SearchBounds::default()).unwrap();
        let (OptimizeOutcome::Found(tq), OptimizeOutcome::Found(mb)) = (tq, mb) else {
            panic!("both searches should be feasible");
        };
        assert!(mb.code.n <= tq.code.n);
        assert!(mb.failure_probability <= 1.2e-3);
    }

    #[test]
    fn multiplexed_identity_assignment_equals_formula() {
        for (p, m, n) in [(0.9, 2, 2), (0.95, 3, 4), (0.82, 2, 5)] {
            let code = CodeParams::new(m, n).unwrap();
            let assignment = default_assignment(code, 1).unwrap();
            let mux =
                multiplexed_failure_probability(p, &assignment, ExecMode::Sequential).unwrap();
            assert!(mux.std_error.is_none());
            let formula = failure_probability(p, code).unwrap();
            assert!(
                (mux.probability - formula).abs() <= 1e-12,
                "p={p} m={m} n={n}"
            );
        }
    }

    #[test]
    fn multiplexed_perfect_channel_never_fails() {
        let code = CodeParams::new(3, 5).unwrap();
        let assignment = default_assignment(code, 3).unwrap();
        let mux = multiplexed_failure_probability(1.0, &assignment, ExecMode::Sequential).unwrap();
        assert_eq!(mux.probability, 0.0);
    }

    #[test]
    fn multiplexed_matches_independent_subset_sum() {
        // Straightforward re-enumeration: for every photon subset rebuild
        // the full qubit grid and test the success condition directly.
        let code = CodeParams::new(3, 5).unwrap();
        let assignment = default_assignment(code, 3).unwrap();
        let p: f64 = 0.95;
        let k = assignment.photon_count();
        assert_eq!(k, 5);

        let mut expected = 0.0;
        for subset in 0u32..(1 << k) {
            let mut arrived = vec![false; code.total_qubits()];
            for t in 0..k {
                if subset >> t & 1 == 1 {
                    for &(b, j) in assignment.qubits_of_photon(t) {
                        arrived[(b * code.m + j) as usize] = true;
                    }
                }
            }
            let full = (0..code.n).any(|b| (0..code.m).all(|j| arrived[(b * code.m + j) as usize]));
            let empty =
                (0..code.n).any(|b| (0..code.m).all(|j| !arrived[(b * code.m + j) as usize]));
            if empty || !full {
                let ones = subset.count_ones();
                expected += p.powi(ones as i32) * (1.0 - p).powi((k - ones) as i32);
            }
        }

        let mux = multiplexed_failure_probability(p, &assignment, ExecMode::Sequential).unwrap();
        assert_abs_diff_eq!(mux.probability, expected, epsilon = 1e-14);
    }

    #[test]
    fn multiplexed_sampler_tracks_exact_value() {
        let code = CodeParams::new(2, 3).unwrap();
        let assignment = default_assignment(code, 2).unwrap();
        let exact = multiplexed_failure_probability(0.8, &assignment, ExecMode::Sequential)
            .unwrap()
            .probability;
        let mc = multiplexed_failure_sampled(0.8, &assignment, 200_000, 11, ExecMode::Sequential);
        let se = mc.std_error.unwrap();
        assert!(
            (mc.probability - exact).abs() <= 4.0 * se,
            "mc={} exact={exact}",
            mc.probability
        );
    }

    #[test]
    fn multiplexed_chunked_enumeration_matches_formula() {
        // K = 18 photons splits the subset walk over multiple chunks; the
        // identity assignment pins it to the closed form.
        let code = CodeParams::new(3, 6).unwrap();
        let assignment = default_assignment(code, 1).unwrap();
        assert_eq!(assignment.photon_count(), 18);
        let mux = multiplexed_failure_probability(0.9, &assignment, ExecMode::Sequential).unwrap();
        assert!(mux.std_error.is_none(), "K = 18 must be enumerated exactly");
        let formula = failure_probability(0.9, code).unwrap();
        assert!((mux.probability - formula).abs() <= 1e-12);
        #[cfg(feature = "parallel")]
        {
            let par = multiplexed_failure_probability(0.9, &assignment, ExecMode::Parallel).unwrap();
            assert_eq!(par.probability.to_bits(), mux.probability.to_bits());
        }
    }

    #[test]
    fn multiplexed_beyond_enumeration_falls_back_to_monte_carlo() {
        // 25 photons exceeds the exact-enumeration bound; the automatic
        // path must report a standard error and track the closed form.
        let code = CodeParams::new(5, 5).unwrap();
        let assignment = default_assignment(code, 1).unwrap();
        assert_eq!(assignment.photon_count(), 25);
        let mux = multiplexed_failure_probability(0.85, &assignment, ExecMode::Sequential).unwrap();
        let se = mux.std_error.expect("Monte Carlo fallback reports a standard error");
        let formula = failure_probability(0.85, code).unwrap();
        assert!(
            (mux.probability - formula).abs() <= 4.0 * se.max(1e-6),
            "mc={} formula={formula}",
            mux.probability
        );
    }

    #[test]
    fn rate_report_worked_example() {
        let link = LinkBudget::new(0.97, 0.97, 0.97, 10.0, 25.0).unwrap();
        let code = CodeParams::new(8, 25).unwrap();
        let report = rate_report(&link, code, 80, 100e-9, 0.999, false).unwrap();

        assert_abs_diff_eq!(report.raw_rate_hz, 1e7, epsilon = 1e-3);
        assert_eq!(report.qubits_per_node, 200);
        assert_eq!(report.total_qubits, 16_000);
        assert_abs_diff_eq!(
            report.end_to_end_fidelity,
            0.9230793978373362,
            epsilon = 1e-12
        );
        // rate / total qubits approaches 625 as success approaches 1
        assert_abs_diff_eq!(
            report.rate_per_total_qubit,
            625.0 * report.end_to_end_success,
            epsilon = 1e-9
        );
        assert!(!report.annotations.is_empty());

        assert!(rate_report(&link, code, 0, 100e-9, 0.999, false).is_err());

        let perfect = LinkBudget::new(1.0, 1.0, 1.0, 0.0, 25.0).unwrap();
        let one_hop = rate_report(&perfect, code, 1, 100e-9, 1.0, false).unwrap();
        assert_eq!(one_hop.end_to_end_success, 1.0);
    }

    #[test]
    fn reencode_buffers_double_node_qubits() {
        let link = LinkBudget::new(0.97, 0.97, 0.97, 10.0, 25.0).unwrap();
        let code = CodeParams::new(8, 25).unwrap();
        let report = rate_report(&link, code, 80, 100e-9, 0.999, true).unwrap();
        assert_eq!(report.qubits_per_node, 400);
    }

    proptest! {
        #[test]
        fn failure_probability_monotone_in_p(
            m in 1u32..5,
            n in 1u32..5,
            lo in 0.5f64..0.99,
            delta in 0.0f64..0.01,
        ) {
            let code = CodeParams::new(m, n).unwrap();
            let a = failure_probability(lo, code).unwrap();
            let b = failure_probability(lo + delta, code).unwrap();
            prop_assert!(b <= a + 1e-12);
        }

        #[test]
        fn bare_qubit_failure_is_one_minus_p(p in 0.0f64..=1.0) {
            let code = CodeParams::new(1, 1).unwrap();
            let pf = failure_probability(p, code).unwrap();
            prop_assert!((pf - (1.0 - p)).abs() < 1e-12);
        }

        #[test]
        fn link_probability_composes_over_distance(
            a in 0.0f64..50.0,
            b in 0.0f64..50.0,
        ) {
            let whole = LinkBudget::new(1.0, 1.0, 1.0, a + b, 25.0).unwrap();
            let first = LinkBudget::new(1.0, 1.0, 1.0, a, 25.0).unwrap();
            let second = LinkBudget::new(1.0, 1.0, 1.0, b, 25.0).unwrap();
            let lhs = link_probability(&whole);
            let rhs = link_probability(&first) * link_probability(&second);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn formula_matches_oracle_on_random_small_codes(
            m in 1u32..5,
            n in 1u32..5,
            p in 0.3f64..1.0,
        ) {
            prop_assume!(m * n <= 12);
            let code = CodeParams::new(m, n).unwrap();
            let formula = failure_probability(p, code).unwrap();
            let oracle = brute_force_failure_prob(p, code, ExecMode::Sequential).unwrap();
            if oracle > 0.0 {
                prop_assert!((formula - oracle).abs() / oracle <= 1e-9);
            } else {
                prop_assert!(formula.abs() <= 1e-15);
            }
        }
    }
}
