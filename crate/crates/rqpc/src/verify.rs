//! Verification suites aggregating the protocol invariants: exhaustive
//! transfer round trips, loss-recovery over every pattern and branch, the
//! formula-versus-enumeration oracle grid, and the error-correction
//! bounds. The CLI `verify` command runs these; the acceptance tests call
//! the same functions.

use num_complex::Complex64;

use crate::analytic::{failure_probability, multiplexed_failure_probability, CodeParams};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::paritycode::{
    brute_force_failure_prob, correct_errors, encode, recover, success_condition, EncodedState,
    LossPattern,
};
use crate::rng::trial_rng;
use crate::statevec::{Gate, PureState};
use crate::transfer::{
    default_assignment, four_mode_to_two_qubit, matter_to_photon_forced, photon_to_matter_forced,
    two_qubit_to_four_mode,
};
use rand::Rng;

/// A named battery of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Matter-photon and four-mode transfer round trips, all branches.
    Transfer,
    /// Exhaustive loss-pattern recovery on small codes.
    Recovery,
    /// Closed-form failure probability against the enumeration oracles.
    Oracle,
    /// Bit/phase-flip correction bounds, including the documented
    /// beyond-bound miscorrection.
    Ecc,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Transfer => "transfer",
            Suite::Recovery => "recovery",
            Suite::Oracle => "oracle",
            Suite::Ecc => "ecc",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transfer" => Ok(Suite::Transfer),
            "recovery" => Ok(Suite::Recovery),
            "oracle" => Ok(Suite::Oracle),
            "ecc" => Ok(Suite::Ecc),
            other => Err(Error::InvalidConfig(format!(
                "unknown verification suite {other:?}; expected transfer, recovery, oracle, or ecc"
            ))),
        }
    }
}

/// Outcome of one check: how many cases ran and how many failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// All checks of one suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn total_cases(&self) -> u64 {
        self.checks.iter().map(|c| c.cases).sum()
    }

    pub fn total_failures(&self) -> u64 {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

/// Runs one suite to completion.
pub fn run_suite(suite: Suite, mode: ExecMode) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Transfer => vec![
            check_single_qubit_roundtrips(100, 0x7472_616e)?,
            check_four_mode_roundtrips(100, 0x666f_7572)?,
        ],
        Suite::Recovery => {
            let codes = [(2, 2), (3, 2), (2, 3), (3, 3)];
            codes
                .iter()
                .map(|&(m, n)| check_recovery_exhaustive(CodeParams::new(m, n)?))
                .collect::<Result<Vec<_>>>()?
        }
        Suite::Oracle => vec![
            check_oracle_grid(16, &[0.5, 0.6, 0.82, 0.9, 0.95, 0.99], 1e-9, mode)?,
            check_multiplexed_identity(mode)?,
        ],
        Suite::Ecc => vec![check_ecc_bounds(CodeParams::new(3, 3)?)?],
    };
    Ok(SuiteReport {
        suite: suite.name(),
        checks,
    })
}

fn random_logical(rng: &mut impl Rng) -> (Complex64, Complex64) {
    let theta = rng.random::<f64>() * std::f64::consts::PI;
    let phi = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
    (
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    )
}

/// Matter-to-photon-to-matter round trips on seeded random states, every
/// forced measurement branch, fidelity 1 required after corrections.
pub fn check_single_qubit_roundtrips(num_states: usize, seed: u64) -> Result<CheckResult> {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst: f64 = 1.0;
    for i in 0..num_states {
        let (alpha, beta) = random_logical(&mut trial_rng(seed, i as u64));
        for send in [false, true] {
            for recv in [false, true] {
                let mut state = PureState::single_qubit(alpha, beta)?;
                let (rails, mut record) = matter_to_photon_forced(&mut state, 0, send)?;
                let (matter, recv_record) = photon_to_matter_forced(&mut state, rails, recv)?;
                record.compose(&recv_record);
                if record.corrections[0].x {
                    state.apply_1q(matter, Gate::X)?;
                }
                if record.corrections[0].z {
                    state.apply_1q(matter, Gate::Z)?;
                }
                let fidelity = state.fidelity(&PureState::single_qubit(alpha, beta)?)?;
                cases += 1;
                worst = worst.min(fidelity);
                if (fidelity - 1.0).abs() > 1e-10 {
                    failures += 1;
                }
            }
        }
    }
    Ok(CheckResult {
        name: "single-qubit transfer round trip".into(),
        cases,
        failures,
        detail: format!("{num_states} states x 4 branches, worst fidelity {worst:.3e}"),
    })
}

/// Two-qubit-to-four-mode round trips on seeded random states, all sixteen
/// outcome combinations.
pub fn check_four_mode_roundtrips(num_states: usize, seed: u64) -> Result<CheckResult> {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst: f64 = 1.0;
    for i in 0..num_states {
        let mut rng = trial_rng(seed, i as u64);
        let raw: [Complex64; 4] = std::array::from_fn(|_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let norm: f64 = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: [Complex64; 4] = std::array::from_fn(|k| raw[k] / norm);

        for o1 in [false, true] {
            for o2 in [false, true] {
                let (modes, record) = two_qubit_to_four_mode(&amps, o1, o2)?;
                for r1 in [false, true] {
                    for r2 in [false, true] {
                        let back = four_mode_to_two_qubit(&modes, &record, r1, r2)?;
                        let overlap: Complex64 =
                            back.iter().zip(&amps).map(|(b, a)| b.conj() * a).sum();
                        let fidelity = overlap.norm_sqr();
                        cases += 1;
                        worst = worst.min(fidelity);
                        if (fidelity - 1.0).abs() > 1e-10 {
                            failures += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(CheckResult {
        name: "four-mode transfer round trip".into(),
        cases,
        failures,
        detail: format!("{num_states} states x 16 branches, worst fidelity {worst:.3e}"),
    })
}

/// Every loss pattern of `code`, every erasure branch: recovery succeeds
/// with fidelity 1 exactly when the success condition holds.
pub fn check_recovery_exhaustive(code: CodeParams) -> Result<CheckResult> {
    let inputs = [
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)),
        (
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ),
    ];
    let total = code.total_qubits();
    let mut cases = 0;
    let mut failures = 0;
    for (alpha, beta) in inputs {
        let encoded = encode(alpha, beta, code)?;
        for mask in 0..(1u64 << total) {
            let pattern = LossPattern::from_mask(code, mask)?;
            let expect_success = success_condition(&pattern);

            let mut branches: Vec<(f64, EncodedState)> = vec![(1.0, encoded.clone())];
            for (b, j) in pattern.lost_cells() {
                let mut next = Vec::new();
                for (weight, state) in &branches {
                    for (p, branch) in state.erase_cell_branches(b, j)? {
                        next.push((weight * p, branch));
                    }
                }
                branches = next;
            }
            let weight_sum: f64 = branches.iter().map(|(w, _)| w).sum();
            if (weight_sum - 1.0).abs() > 1e-9 {
                failures += 1;
            }
            cases += 1;

            for (_, branch) in &branches {
                cases += 1;
                match recover(branch, &pattern) {
                    Ok(rec) => {
                        let ok =
                            expect_success && (rec.fidelity_to(alpha, beta) - 1.0).abs() <= 1e-10;
                        if !ok {
                            failures += 1;
                        }
                    }
                    Err(Error::HeraldedFailure) => {
                        if expect_success {
                            failures += 1;
                        }
                    }
                    Err(_) => failures += 1,
                }
            }
        }
    }
    Ok(CheckResult {
        name: format!("exhaustive recovery ({}, {})", code.m, code.n),
        cases,
        failures,
        detail: format!(
            "{} patterns x erasure branches x {} inputs",
            1u64 << total,
            inputs.len()
        ),
    })
}

/// Closed-form failure probability against the full pattern enumeration,
/// every code with `m*n <= max_total`, at relative tolerance `tol`.
pub fn check_oracle_grid(
    max_total: u32,
    ps: &[f64],
    tol: f64,
    mode: ExecMode,
) -> Result<CheckResult> {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for m in 1..=max_total {
        for n in 1..=(max_total / m) {
            let code = CodeParams::new(m, n)?;
            for &p in ps {
                let formula = failure_probability(p, code)?;
                let oracle = brute_force_failure_prob(p, code, mode)?;
                let err = if oracle > 0.0 {
                    (formula - oracle).abs() / oracle
                } else {
                    formula.abs()
                };
                cases += 1;
                worst = worst.max(err);
                if err > tol {
                    failures += 1;
                }
            }
        }
    }
    Ok(CheckResult {
        name: "failure probability vs enumeration".into(),
        cases,
        failures,
        detail: format!("worst relative error {worst:.3e} (tolerance {tol:.0e})"),
    })
}

/// The multiplexed enumerator with the one-qubit-per-photon identity
/// assignment must reproduce the closed form to 1e-12.
pub fn check_multiplexed_identity(mode: ExecMode) -> Result<CheckResult> {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (m, n) in [(1, 1), (2, 2), (3, 2), (2, 4), (3, 4), (4, 4)] {
        let code = CodeParams::new(m, n)?;
        let assignment = default_assignment(code, 1)?;
        for p in [0.5, 0.82, 0.9, 0.95, 0.99] {
            let mux = multiplexed_failure_probability(p, &assignment, mode)?;
            let formula = failure_probability(p, code)?;
            let err = (mux.probability - formula).abs();
            cases += 1;
            worst = worst.max(err);
            if err > 1e-12 || mux.std_error.is_some() {
                failures += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "multiplexed enumerator identity assignment".into(),
        cases,
        failures,
        detail: format!("worst absolute deviation {worst:.3e}"),
    })
}

/// The correction capability at `(m, n)`: every single bit flip and every
/// single sign flip is repaired to fidelity 1, and a same-block weight-2
/// bit-flip injection produces the documented logical error.
pub fn check_ecc_bounds(code: CodeParams) -> Result<CheckResult> {
    let (alpha, beta) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
    let all = LossPattern::all_arrived(code);
    let mut cases = 0;
    let mut failures = 0;

    for b in 0..code.n {
        for j in 0..code.m {
            for gate in [Gate::X, Gate::Z] {
                let mut enc = encode(alpha, beta, code)?;
                enc.apply_cell_gate(b, j, gate)?;
                correct_errors(&mut enc)?;
                let rec = recover(&enc, &all)?;
                cases += 1;
                if (rec.fidelity_to(alpha, beta) - 1.0).abs() > 1e-10 {
                    failures += 1;
                }
            }
        }
    }

    // Every combination of at most one bit flip per block lies within the
    // floor((m-1)/2) capability and must be repaired, X positions chosen
    // independently per block (0 = no flip in that block).
    let m = code.m;
    let combos = (m + 1).pow(code.n);
    for combo in 0..combos {
        let mut enc = encode(alpha, beta, code)?;
        let mut digits = combo;
        for b in 0..code.n {
            let choice = digits % (m + 1);
            digits /= m + 1;
            if choice > 0 {
                enc.apply_cell_gate(b, choice - 1, Gate::X)?;
            }
        }
        correct_errors(&mut enc)?;
        let rec = recover(&enc, &all)?;
        cases += 1;
        if (rec.fidelity_to(alpha, beta) - 1.0).abs() > 1e-10 {
            failures += 1;
        }
    }

    // One sign-flipped block combined with one bit flip per block.
    let mut enc = encode(alpha, beta, code)?;
    enc.apply_cell_gate(1, 2, Gate::Z)?;
    for b in 0..code.n {
        enc.apply_cell_gate(b, b % m, Gate::X)?;
    }
    correct_errors(&mut enc)?;
    let rec = recover(&enc, &all)?;
    cases += 1;
    if (rec.fidelity_to(alpha, beta) - 1.0).abs() > 1e-10 {
        failures += 1;
    }

    // Beyond the bound: two bit flips in one block miscorrect into a
    // logical phase flip.
    let mut enc = encode(alpha, beta, code)?;
    enc.apply_cell_gate(0, 0, Gate::X)?;
    enc.apply_cell_gate(0, 1, Gate::X)?;
    correct_errors(&mut enc)?;
    let rec = recover(&enc, &all)?;
    cases += 1;
    let miscorrected = rec.fidelity_to(alpha, beta) < 1.0 - 1e-6
        && (rec.fidelity_to(alpha, -beta) - 1.0).abs() <= 1e-10;
    if !miscorrected {
        failures += 1;
    }

    Ok(CheckResult {
        name: format!("error-correction bounds ({}, {})", code.m, code.n),
        cases,
        failures,
        detail: "X sets of weight <= 1 per block and single Z flips corrected; \
                 weight-2 X miscorrects as expected"
            .into(),
    })
}
