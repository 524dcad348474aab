//! Matter-photon state transfer and photon assignment layouts.
//!
//! A matter qubit moves onto a dual-rail photon by a controlled phase with
//! one rail followed by a +- basis measurement of the matter qubit; the
//! receiver reverses this with a controlled phase and a symmetric/
//! antisymmetric rail measurement (the beamsplitter-and-detectors step,
//! abstracted to the projective measurement it implements). Measurement
//! outcomes never destroy the state: each leaves a known Pauli correction,
//! tracked in a [`TransferRecord`].
//!
//! A single photon can carry two qubits across four spatial modes; the
//! four-mode transfer is the amplitude-level form of the same trick with
//! each matter qubit phase-coupled to the mode pattern that makes the four
//! measurement branches invertible.

use num_complex::Complex64;
use rand::Rng;

use crate::analytic::CodeParams;
use crate::error::{Error, Result};
use crate::statevec::{Basis, PureState, SiteKind, AMP_TOL};

/// Pending single-qubit Pauli correction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PauliCorrection {
    pub x: bool,
    pub z: bool,
}

impl PauliCorrection {
    pub fn compose(self, other: PauliCorrection) -> PauliCorrection {
        PauliCorrection {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        }
    }

    pub fn is_identity(self) -> bool {
        !self.x && !self.z
    }
}

/// Outcomes of a transfer step and the corrections they imply, one
/// correction per transferred logical qubit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferRecord {
    pub outcomes: Vec<bool>,
    pub corrections: Vec<PauliCorrection>,
}

impl TransferRecord {
    /// Folds a later step's record into this one, qubit by qubit.
    pub fn compose(&mut self, other: &TransferRecord) {
        self.outcomes.extend_from_slice(&other.outcomes);
        for (mine, theirs) in self.corrections.iter_mut().zip(&other.corrections) {
            *mine = mine.compose(*theirs);
        }
    }
}

/// Rail sites of one dual-rail photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhotonSites {
    pub rail0: usize,
    pub rail1: usize,
}

fn dual_rail_pair() -> PureState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_amplitudes(
        vec![SiteKind::PhotonRail; 2],
        vec![
            Complex64::ZERO,
            Complex64::new(r, 0.0),
            Complex64::new(r, 0.0),
            Complex64::ZERO,
        ],
    )
    .expect("dual-rail pair is normalized")
}

fn matter_to_photon_inner(
    state: &mut PureState,
    matter_site: usize,
    measure: impl FnOnce(&mut PureState, usize) -> Result<bool>,
) -> Result<(PhotonSites, TransferRecord)> {
    let rail0 = state.append(&dual_rail_pair())?;
    let rail1 = rail0 + 1;
    state.apply_cphase(matter_site, rail0)?;
    let o = measure(state, matter_site)?;
    // The matter site left the register; rails shift down by one.
    Ok((
        PhotonSites {
            rail0: rail0 - 1,
            rail1: rail1 - 1,
        },
        TransferRecord {
            outcomes: vec![o],
            corrections: vec![PauliCorrection { x: false, z: o }],
        },
    ))
}

/// Moves the qubit at `matter_site` onto a fresh dual-rail photon,
/// sampling the +- measurement of the matter qubit.
pub fn matter_to_photon_sampled(
    state: &mut PureState,
    matter_site: usize,
    rng: &mut impl Rng,
) -> Result<(PhotonSites, TransferRecord)> {
    matter_to_photon_inner(state, matter_site, |s, site| {
        Ok(s.measure_sampled(site, Basis::X, rng)?.0)
    })
}

/// Same as [`matter_to_photon_sampled`] with the measurement outcome forced,
/// for exhaustive branch verification. `false` is the + outcome.
pub fn matter_to_photon_forced(
    state: &mut PureState,
    matter_site: usize,
    outcome: bool,
) -> Result<(PhotonSites, TransferRecord)> {
    matter_to_photon_inner(state, matter_site, |s, site| {
        s.measure_forced(site, Basis::X, outcome)?;
        Ok(outcome)
    })
}

fn photon_to_matter_inner(
    state: &mut PureState,
    rails: PhotonSites,
    measure: impl FnOnce(&mut PureState, usize) -> Result<bool>,
) -> Result<(usize, TransferRecord)> {
    let matter = state.append_basis_site(SiteKind::Matter, false)?;
    state.apply_1q(matter, crate::statevec::Gate::H)?;
    state.apply_cphase(matter, rails.rail0)?;

    // Rotate the dual rail so rail0 carries the symmetric/antisymmetric
    // distinction and rail1 heralds the excitation.
    state.apply_cnot(rails.rail0, rails.rail1)?;
    let o = measure(state, rails.rail0)?;
    let shift = |s: usize, removed: usize| if s > removed { s - 1 } else { s };
    let rail1 = shift(rails.rail1, rails.rail0);
    let matter = shift(matter, rails.rail0);
    state.measure_deterministic(rail1, Basis::Z)?;
    let matter = shift(matter, rail1);

    Ok((
        matter,
        TransferRecord {
            outcomes: vec![o],
            corrections: vec![PauliCorrection { x: o, z: false }],
        },
    ))
}

/// Absorbs a dual-rail photon onto a fresh matter site, sampling the
/// which-detector outcome of the rail measurement.
pub fn photon_to_matter_sampled(
    state: &mut PureState,
    rails: PhotonSites,
    rng: &mut impl Rng,
) -> Result<(usize, TransferRecord)> {
    photon_to_matter_inner(state, rails, |s, site| {
        Ok(s.measure_sampled(site, Basis::X, rng)?.0)
    })
}

/// Same as [`photon_to_matter_sampled`] with the outcome forced; `false`
/// is the symmetric (no-correction) detector.
pub fn photon_to_matter_forced(
    state: &mut PureState,
    rails: PhotonSites,
    outcome: bool,
) -> Result<(usize, TransferRecord)> {
    photon_to_matter_inner(state, rails, |s, site| {
        s.measure_forced(site, Basis::X, outcome)?;
        Ok(outcome)
    })
}

/// Mode-coupling sign of four-mode transfer: mode `k` flips the amplitude
/// of two-qubit basis state `w` by `(-1)^(k0*w1 + k1*w0)`.
fn mode_sign(k: usize, w: usize) -> f64 {
    let exponent = (k & 1) * (w >> 1 & 1) + (k >> 1 & 1) * (w & 1);
    if exponent % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Transfers a general two-qubit state `sum_w alpha_w |w>`
/// (`w` over gg, ge, eg, ee) onto one photon across four spatial modes,
/// with the two +- matter measurements forced to `outcome1`, `outcome2`
/// (false = +). Every outcome pair occurs with probability 1/4; the
/// returned amplitudes are the normalized mode coefficients plus the
/// pending corrections.
pub fn two_qubit_to_four_mode(
    amps: &[Complex64; 4],
    outcome1: bool,
    outcome2: bool,
) -> Result<([Complex64; 4], TransferRecord)> {
    let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > AMP_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let s1 = if outcome1 { -1.0 } else { 1.0 };
    let s2 = if outcome2 { -1.0 } else { 1.0 };
    // Outcome signs attach to the excited components of each qubit.
    let v = [amps[0], s2 * amps[1], s1 * amps[2], s1 * s2 * amps[3]];
    let mut modes = [Complex64::ZERO; 4];
    for (k, slot) in modes.iter_mut().enumerate() {
        *slot = (0..4).map(|w| mode_sign(k, w) * v[w]).sum::<Complex64>() * 0.5;
    }
    Ok((
        modes,
        TransferRecord {
            outcomes: vec![outcome1, outcome2],
            corrections: vec![
                PauliCorrection {
                    x: false,
                    z: outcome1,
                },
                PauliCorrection {
                    x: false,
                    z: outcome2,
                },
            ],
        },
    ))
}

/// Inverse of [`two_qubit_to_four_mode`]: absorbs the four-mode photon back
/// onto two matter qubits given the sender record and the receiver's mode
/// measurement outcome pair. Exact inverse on every branch.
pub fn four_mode_to_two_qubit(
    modes: &[Complex64; 4],
    record: &TransferRecord,
    recv_outcome1: bool,
    recv_outcome2: bool,
) -> Result<[Complex64; 4]> {
    let norm_sqr: f64 = modes.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > AMP_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    if record.corrections.len() != 2 {
        return Err(Error::InvalidConfig(format!(
            "two-qubit transfer record expected, got {} corrections",
            record.corrections.len()
        )));
    }
    let t = (usize::from(recv_outcome1) << 1) | usize::from(recv_outcome2);

    // Project onto the receiver branch: out_w proportional to the photon
    // overlap pattern, then undo the branch permutation and phases.
    let mut out = [Complex64::ZERO; 4];
    for (uv, slot) in out.iter_mut().enumerate() {
        *slot = (0..4)
            .map(|k| mode_sign(k, t) * mode_sign(k, uv) * modes[k])
            .sum::<Complex64>()
            * 0.5;
    }
    // X correction: undo the XOR-by-t permutation.
    let mut permuted = [Complex64::ZERO; 4];
    for (w, slot) in permuted.iter_mut().enumerate() {
        *slot = out[w ^ t];
    }
    // Z corrections from the sender outcomes.
    let s1 = record.corrections[0].z;
    let s2 = record.corrections[1].z;
    for (w, amp) in permuted.iter_mut().enumerate() {
        let mut sign = 1.0;
        if s1 && w >> 1 & 1 == 1 {
            sign = -sign;
        }
        if s2 && w & 1 == 1 {
            sign = -sign;
        }
        *amp *= sign;
    }

    let branch_norm: f64 = permuted.iter().map(|a| a.norm_sqr()).sum();
    if branch_norm < 1e-12 {
        return Err(Error::ImpossibleOutcome { prob: branch_norm });
    }
    let scale = branch_norm.sqrt().recip();
    for amp in &mut permuted {
        *amp *= scale;
    }
    Ok(permuted)
}

/// How the code's qubits are spread over photons. No photon may carry two
/// qubits from the same parity block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhotonAssignment {
    code: CodeParams,
    qubits_per_photon: u32,
    /// Photon index per cell, block-major.
    photon_of: Vec<u32>,
    /// Cells carried by each photon.
    photons: Vec<Vec<(u32, u32)>>,
}

impl PhotonAssignment {
    /// Builds and validates an assignment from a cell-to-photon map.
    pub fn new(code: CodeParams, photon_of: Vec<u32>) -> Result<Self> {
        if photon_of.len() != code.total_qubits() {
            return Err(Error::InvalidAssignment(format!(
                "mapping covers {} cells, code has {}",
                photon_of.len(),
                code.total_qubits()
            )));
        }
        let photon_count = photon_of.iter().copied().max().map_or(0, |t| t + 1);
        let mut photons: Vec<Vec<(u32, u32)>> = vec![Vec::new(); photon_count as usize];
        for (cell, &t) in photon_of.iter().enumerate() {
            let (b, j) = (cell as u32 / code.m, cell as u32 % code.m);
            if photons[t as usize].iter().any(|&(ob, _)| ob == b) {
                return Err(Error::InvalidAssignment(format!(
                    "photon {t} carries two qubits of block {b}"
                )));
            }
            photons[t as usize].push((b, j));
        }
        if let Some(t) = photons.iter().position(|cells| cells.is_empty()) {
            return Err(Error::InvalidAssignment(format!(
                "photon {t} carries no qubit"
            )));
        }
        let qubits_per_photon = photons.iter().map(|c| c.len() as u32).max().unwrap_or(0);
        Ok(PhotonAssignment {
            code,
            qubits_per_photon,
            photon_of,
            photons,
        })
    }

    pub fn code(&self) -> CodeParams {
        self.code
    }

    pub fn photon_count(&self) -> u32 {
        self.photons.len() as u32
    }

    pub fn qubits_per_photon(&self) -> u32 {
        self.qubits_per_photon
    }

    /// Spatial modes each photon spans: 2 per carried qubit, multiplied.
    pub fn modes_per_photon(&self) -> u32 {
        1 << self.qubits_per_photon
    }

    pub fn photon_of(&self, block: u32, pos: u32) -> u32 {
        self.photon_of[(block * self.code.m + pos) as usize]
    }

    pub fn qubits_of_photon(&self, photon: u32) -> &[(u32, u32)] {
        &self.photons[photon as usize]
    }
}

/// Round-robin layout packing `k` qubits per photon: cells in block-major
/// order are dealt to `K = ceil(m*n / k)` photons with stride `K`. Since
/// `K >= m` whenever `k <= n`, two cells of one block can never land on the
/// same photon.
pub fn default_assignment(code: CodeParams, qubits_per_photon: u32) -> Result<PhotonAssignment> {
    if qubits_per_photon == 0 {
        return Err(Error::ZeroCount {
            name: "qubits_per_photon",
        });
    }
    if qubits_per_photon > code.n {
        return Err(Error::InvalidAssignment(format!(
            "{qubits_per_photon} qubits per photon but only {} blocks; the per-block \
             constraint would be violated",
            code.n
        )));
    }
    let total = code.total_qubits();
    let photon_count = total.div_ceil(qubits_per_photon as usize);
    let photon_of = (0..total)
        .map(|cell| (cell % photon_count) as u32)
        .collect();
    PhotonAssignment::new(code, photon_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::Gate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_qubit(theta: f64, phi: f64) -> (Complex64, Complex64) {
        (
            c((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        )
    }

    #[test]
    fn matter_to_photon_plus_state_has_no_phase_information() {
        // alpha = 1: both outcomes leave the photon in (|01> + |10>)/sqrt(2).
        for outcome in [false, true] {
            let mut state = PureState::single_qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
            let (rails, record) = matter_to_photon_forced(&mut state, 0, outcome).unwrap();
            assert_eq!((rails.rail0, rails.rail1), (0, 1));
            assert_eq!(record.outcomes, vec![outcome]);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            assert_abs_diff_eq!(state.amplitude("01").unwrap().re, r, epsilon = AMP_TOL);
            assert_abs_diff_eq!(state.amplitude("10").unwrap().re, r, epsilon = AMP_TOL);
        }
    }

    #[test]
    fn matter_to_photon_balanced_state_concentrates_on_one_rail() {
        // alpha = beta = 1/sqrt(2), outcome +: photon collapses onto |01>.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut state = PureState::single_qubit(c(r, 0.0), c(r, 0.0)).unwrap();
        matter_to_photon_forced(&mut state, 0, false).unwrap();
        assert_abs_diff_eq!(
            state.amplitude("01").unwrap().norm(),
            1.0,
            epsilon = AMP_TOL
        );
    }

    #[test]
    fn single_qubit_round_trip_all_branches() {
        let (alpha, beta) = (c(0.6, 0.0), c(0.48, 0.64));
        for send in [false, true] {
            for recv in [false, true] {
                let mut state = PureState::single_qubit(alpha, beta).unwrap();
                let (rails, mut record) = matter_to_photon_forced(&mut state, 0, send).unwrap();
                let (matter, recv_record) =
                    photon_to_matter_forced(&mut state, rails, recv).unwrap();
                record.compose(&recv_record);
                assert_eq!(matter, 0);
                assert_eq!(state.num_sites(), 1);

                let correction = record.corrections[0];
                if correction.x {
                    state.apply_1q(matter, Gate::X).unwrap();
                }
                if correction.z {
                    state.apply_1q(matter, Gate::Z).unwrap();
                }
                let reference = PureState::single_qubit(alpha, beta).unwrap();
                assert_abs_diff_eq!(state.fidelity(&reference).unwrap(), 1.0, epsilon = AMP_TOL);
            }
        }
    }

    #[test]
    fn corrections_square_to_identity() {
        let rec = PauliCorrection { x: true, z: true };
        assert!(rec.compose(rec).is_identity());
    }

    #[test]
    fn four_mode_sign_pattern_upper_signs() {
        // Outcome (+, +): modes carry the four sign combinations of the
        // input amplitudes, all branches equally likely.
        let amps = [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.5)];
        let (modes, _) = two_qubit_to_four_mode(&amps, false, false).unwrap();
        let expect = |signs: [f64; 4]| -> Complex64 {
            (0..4).map(|w| signs[w] * amps[w]).sum::<Complex64>() * 0.5
        };
        assert_abs_diff_eq!(
            (modes[0] - expect([1.0, 1.0, 1.0, 1.0])).norm(),
            0.0,
            epsilon = AMP_TOL
        );
        assert_abs_diff_eq!(
            (modes[1] - expect([1.0, 1.0, -1.0, -1.0])).norm(),
            0.0,
            epsilon = AMP_TOL
        );
        assert_abs_diff_eq!(
            (modes[2] - expect([1.0, -1.0, 1.0, -1.0])).norm(),
            0.0,
            epsilon = AMP_TOL
        );
        assert_abs_diff_eq!(
            (modes[3] - expect([1.0, -1.0, -1.0, 1.0])).norm(),
            0.0,
            epsilon = AMP_TOL
        );
    }

    #[test]
    fn four_mode_uniform_for_ground_input() {
        // alpha_0 = 1: equal-magnitude amplitudes on all four modes for
        // every outcome pair.
        let amps = [
            c(1.0, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ZERO,
        ];
        for o1 in [false, true] {
            for o2 in [false, true] {
                let (modes, _) = two_qubit_to_four_mode(&amps, o1, o2).unwrap();
                for m in modes {
                    assert_abs_diff_eq!(m.norm(), 0.5, epsilon = AMP_TOL);
                }
            }
        }
    }

    #[test]
    fn four_mode_round_trip_all_sixteen_branches() {
        let amps = [c(0.5, 0.1), c(-0.3, 0.4), c(0.2, -0.2), c(0.1, 0.0)];
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: [Complex64; 4] = std::array::from_fn(|i| amps[i] / norm);

        for o1 in [false, true] {
            for o2 in [false, true] {
                let (modes, record) = two_qubit_to_four_mode(&amps, o1, o2).unwrap();
                assert_abs_diff_eq!(
                    modes.iter().map(|m| m.norm_sqr()).sum::<f64>(),
                    1.0,
                    epsilon = AMP_TOL
                );
                for r1 in [false, true] {
                    for r2 in [false, true] {
                        let back = four_mode_to_two_qubit(&modes, &record, r1, r2).unwrap();
                        let overlap: Complex64 =
                            back.iter().zip(&amps).map(|(b, a)| b.conj() * a).sum();
                        assert_abs_diff_eq!(overlap.norm_sqr(), 1.0, epsilon = AMP_TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn four_mode_matches_register_level_protocol() {
        // Independent route: run the same protocol in the state-vector
        // simulator and compare mode amplitudes branch by branch.
        let amps = [c(0.48, 0.36), c(0.36, -0.48), c(0.2, 0.4), c(0.1, 0.35)];
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: [Complex64; 4] = std::array::from_fn(|i| amps[i] / norm);

        for o1 in [false, true] {
            for o2 in [false, true] {
                let (modes, _) = two_qubit_to_four_mode(&amps, o1, o2).unwrap();

                // Register: sites 0, 1 matter; sites 2..6 the four modes in
                // the single-excitation superposition.
                let mut reg =
                    PureState::from_amplitudes(vec![SiteKind::Matter; 2], amps.to_vec()).unwrap();
                let w_state = PureState::from_amplitudes(
                    vec![SiteKind::PhotonRail; 4],
                    (0..16)
                        .map(|i| match i {
                            0b1000 | 0b0100 | 0b0010 | 0b0001 => c(0.5, 0.0),
                            _ => Complex64::ZERO,
                        })
                        .collect(),
                )
                .unwrap();
                let base = reg.append(&w_state).unwrap();
                // Qubit 1 couples the modes with the low bit set (2nd, 4th),
                // qubit 2 those with the high bit set (3rd, 4th).
                reg.apply_cphase(0, base + 1).unwrap();
                reg.apply_cphase(0, base + 3).unwrap();
                reg.apply_cphase(1, base + 2).unwrap();
                reg.apply_cphase(1, base + 3).unwrap();
                reg.measure_forced(0, Basis::X, o1).unwrap();
                reg.measure_forced(0, Basis::X, o2).unwrap();

                let expected = [
                    reg.amplitude("1000").unwrap(),
                    reg.amplitude("0100").unwrap(),
                    reg.amplitude("0010").unwrap(),
                    reg.amplitude("0001").unwrap(),
                ];
                for (got, want) in modes.iter().zip(&expected) {
                    assert_abs_diff_eq!((got - want).norm(), 0.0, epsilon = AMP_TOL);
                }
            }
        }
    }

    #[test]
    fn four_mode_rejects_bad_input() {
        let zero = [Complex64::ZERO; 4];
        assert!(two_qubit_to_four_mode(&zero, false, false).is_err());
        let record = TransferRecord {
            outcomes: vec![false, false],
            corrections: vec![PauliCorrection::default(); 2],
        };
        assert!(four_mode_to_two_qubit(&zero, &record, false, false).is_err());
    }

    #[test]
    fn four_mode_single_mode_input_inverts_to_uniform() {
        let modes = [
            c(1.0, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ZERO,
        ];
        let record = TransferRecord {
            outcomes: vec![false, false],
            corrections: vec![PauliCorrection::default(); 2],
        };
        let back = four_mode_to_two_qubit(&modes, &record, false, false).unwrap();
        for amp in back {
            assert_abs_diff_eq!(amp.norm(), 0.5, epsilon = AMP_TOL);
        }
    }

    #[test]
    fn default_assignment_examples() {
        let code = CodeParams::new(2, 3).unwrap();
        let identity = default_assignment(code, 1).unwrap();
        assert_eq!(identity.photon_count(), 6);
        for cell in 0..6u32 {
            assert_eq!(identity.photon_of(cell / 2, cell % 2), cell);
        }

        // (m, n, k) = (3, 5, 3): five photons, each block spread over three.
        let code = CodeParams::new(3, 5).unwrap();
        let latin = default_assignment(code, 3).unwrap();
        assert_eq!(latin.photon_count(), 5);
        for b in 0..5 {
            let photons: std::collections::HashSet<u32> =
                (0..3).map(|j| latin.photon_of(b, j)).collect();
            assert_eq!(photons.len(), 3, "block {b} qubits share a photon");
        }

        // k = n boundary: m photons.
        let code = CodeParams::new(4, 3).unwrap();
        let packed = default_assignment(code, 3).unwrap();
        assert_eq!(packed.photon_count(), 4);
        assert_eq!(packed.modes_per_photon(), 8);

        assert!(default_assignment(code, 4).is_err());
        assert!(default_assignment(code, 0).is_err());
    }

    #[test]
    fn default_assignment_constraint_holds_everywhere() {
        for m in 1..=8u32 {
            for n in 1..=8u32 {
                let code = CodeParams::new(m, n).unwrap();
                for k in 1..=n {
                    let a = default_assignment(code, k).unwrap();
                    assert_eq!(
                        a.photon_count() as usize,
                        code.total_qubits().div_ceil(k as usize)
                    );
                    for t in 0..a.photon_count() {
                        let cells = a.qubits_of_photon(t);
                        let blocks: std::collections::HashSet<u32> =
                            cells.iter().map(|&(b, _)| b).collect();
                        assert_eq!(blocks.len(), cells.len(), "m={m} n={n} k={k} photon {t}");
                    }
                }
            }
        }
    }

    #[test]
    fn custom_assignment_validation() {
        let code = CodeParams::new(2, 2).unwrap();
        // Photon 0 carrying both qubits of block 0 is rejected.
        assert!(PhotonAssignment::new(code, vec![0, 0, 1, 2]).is_err());
        // Gap in photon indices is rejected.
        assert!(PhotonAssignment::new(code, vec![0, 2, 2, 0]).is_err());
        // A valid two-qubit-per-photon pairing.
        let ok = PhotonAssignment::new(code, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(ok.qubits_per_photon(), 2);
        assert_eq!(ok.modes_per_photon(), 4);
    }

    proptest! {
        #[test]
        fn round_trip_fidelity_on_random_states(
            theta in 0.0f64..std::f64::consts::PI,
            phi in 0.0f64..(2.0 * std::f64::consts::PI),
            send in proptest::bool::ANY,
            recv in proptest::bool::ANY,
        ) {
            let (alpha, beta) = random_qubit(theta, phi);
            let mut state = PureState::single_qubit(alpha, beta).unwrap();
            let (rails, mut record) = matter_to_photon_forced(&mut state, 0, send).unwrap();
            let (matter, recv_record) = photon_to_matter_forced(&mut state, rails, recv).unwrap();
            record.compose(&recv_record);
            if record.corrections[0].x {
                state.apply_1q(matter, Gate::X).unwrap();
            }
            if record.corrections[0].z {
                state.apply_1q(matter, Gate::Z).unwrap();
            }
            let reference = PureState::single_qubit(alpha, beta).unwrap();
            prop_assert!((state.fidelity(&reference).unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
