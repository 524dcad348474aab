//! Dense pure-state simulator for small registers of two-level systems.
//!
//! Sites are matter qubits or photonic rail modes; both are two-level, and
//! photonic multi-mode groups keep their single-excitation structure by
//! construction of the protocols, not by the vector space. Site 0 is the
//! most significant bit of the amplitude index, so `basis_state(2, "10")`
//! is the ket usually written |10>.
//!
//! Measurements collapse, renormalize, and remove the measured site from
//! the register. Loss is modeled as a Z measurement by an inaccessible
//! environment: [`PureState::erase`] returns every outcome branch so
//! callers can verify downstream recovery exhaustively.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Hard cap on register size; a 22-site state holds 2^22 amplitudes.
pub const MAX_SITES: usize = 22;

/// Tolerance for amplitude-level equality and norm checks.
pub const AMP_TOL: f64 = 1e-10;

/// Below this, a measurement outcome probability is treated as zero.
const ZERO_PROB: f64 = 1e-12;

/// Role tag of a register site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Matter,
    PhotonRail,
}

/// Single-qubit gates used by the protocols.
///
/// `PlusMinusRotation` is the basis change onto the (|g> +- |e>)/sqrt(2)
/// measurement basis; numerically it is the Hadamard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    X,
    Z,
    H,
    PlusMinusRotation,
}

/// Measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Z,
    X,
}

/// Dense normalized state over a register of two-level sites.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: Vec<Complex64>,
    kinds: Vec<SiteKind>,
}

impl PureState {
    /// Computational basis state from a bitstring, one char per site.
    pub fn basis_state(num_sites: usize, bits: &str) -> Result<Self> {
        if bits.len() != num_sites {
            return Err(Error::BitstringLength {
                got: bits.len(),
                expected: num_sites,
            });
        }
        check_capacity(num_sites)?;
        let mut index = 0usize;
        for c in bits.chars() {
            index = (index << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(Error::BadBitstring(other)),
                };
        }
        let mut amps = vec![Complex64::ZERO; 1 << num_sites];
        amps[index] = Complex64::ONE;
        Ok(PureState {
            amps,
            kinds: vec![SiteKind::Matter; num_sites],
        })
    }

    /// One matter qubit in `alpha |0> + beta |1>`.
    pub fn single_qubit(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_amplitudes(vec![SiteKind::Matter], vec![alpha, beta])
    }

    /// Builds a state from explicit amplitudes; must be normalized.
    pub fn from_amplitudes(kinds: Vec<SiteKind>, amps: Vec<Complex64>) -> Result<Self> {
        check_capacity(kinds.len())?;
        if amps.len() != 1 << kinds.len() {
            return Err(Error::BitstringLength {
                got: amps.len(),
                expected: 1 << kinds.len(),
            });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > AMP_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(PureState { amps, kinds })
    }

    pub fn num_sites(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, site: usize) -> SiteKind {
        self.kinds[site]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitude of one computational basis ket, addressed by bitstring.
    pub fn amplitude(&self, bits: &str) -> Result<Complex64> {
        if bits.len() != self.num_sites() {
            return Err(Error::BitstringLength {
                got: bits.len(),
                expected: self.num_sites(),
            });
        }
        let mut index = 0usize;
        for c in bits.chars() {
            index = (index << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(Error::BadBitstring(other)),
                };
        }
        Ok(self.amps[index])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn bit_mask(&self, site: usize) -> Result<usize> {
        let n = self.num_sites();
        if site >= n {
            return Err(Error::SiteOutOfRange { site, num_sites: n });
        }
        Ok(1usize << (n - 1 - site))
    }

    /// Appends `other` as new trailing sites; returns the index of the
    /// first appended site.
    pub fn append(&mut self, other: &PureState) -> Result<usize> {
        check_capacity(self.num_sites() + other.num_sites())?;
        let offset = self.num_sites();
        let block = other.amps.len();
        let mut amps = vec![Complex64::ZERO; self.amps.len() * block];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * block + j] = a * b;
            }
        }
        self.amps = amps;
        self.kinds.extend_from_slice(&other.kinds);
        Ok(offset)
    }

    /// Appends one site in a computational basis state.
    pub fn append_basis_site(&mut self, kind: SiteKind, bit: bool) -> Result<usize> {
        let mut single = PureState::basis_state(1, if bit { "1" } else { "0" })?;
        single.kinds[0] = kind;
        self.append(&single)
    }

    /// Applies a single-qubit gate in place.
    pub fn apply_1q(&mut self, site: usize, gate: Gate) -> Result<()> {
        let mask = self.bit_mask(site)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match gate {
            Gate::X => self.map_pairs(mask, |v0, v1| (v1, v0)),
            Gate::Z => self.map_pairs(mask, |v0, v1| (v0, -v1)),
            Gate::H | Gate::PlusMinusRotation => {
                self.map_pairs(mask, |v0, v1| (s * (v0 + v1), s * (v0 - v1)))
            }
        }
        debug_assert!((self.norm_sqr() - 1.0).abs() < AMP_TOL);
        Ok(())
    }

    fn map_pairs(
        &mut self,
        mask: usize,
        f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64),
    ) {
        for idx in 0..self.amps.len() {
            if idx & mask == 0 {
                let (v0, v1) = f(self.amps[idx], self.amps[idx | mask]);
                self.amps[idx] = v0;
                self.amps[idx | mask] = v1;
            }
        }
    }

    /// Controlled-phase: flips the sign of the |1>|1> component.
    pub fn apply_cphase(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::DuplicateSite(a));
        }
        let mask = self.bit_mask(a)? | self.bit_mask(b)?;
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Controlled-NOT with the given control and target sites.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::DuplicateSite(control));
        }
        let c = self.bit_mask(control)?;
        let t = self.bit_mask(target)?;
        for idx in 0..self.amps.len() {
            if idx & c == c && idx & t == 0 {
                self.amps.swap(idx, idx | t);
            }
        }
        Ok(())
    }

    /// Outcome probabilities `(p0, p1)` of measuring `site` in `basis`,
    /// without disturbing the state.
    pub fn outcome_probabilities(&self, site: usize, basis: Basis) -> Result<(f64, f64)> {
        match basis {
            Basis::Z => {
                let mask = self.bit_mask(site)?;
                let p1: f64 = self
                    .amps
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| idx & mask != 0)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                Ok(((1.0 - p1).max(0.0), p1.min(1.0)))
            }
            Basis::X => {
                let mut rotated = self.clone();
                rotated.apply_1q(site, Gate::H)?;
                rotated.outcome_probabilities(site, Basis::Z)
            }
        }
    }

    /// Measures `site` with the outcome drawn from the Born rule.
    ///
    /// Returns `(outcome, probability)`; the site is removed from the
    /// register and the state renormalized. For the X basis, outcome
    /// `false` is the +1 eigenstate (|+>).
    pub fn measure_sampled(
        &mut self,
        site: usize,
        basis: Basis,
        rng: &mut impl Rng,
    ) -> Result<(bool, f64)> {
        let (_, p1) = self.outcome_probabilities(site, basis)?;
        let outcome = rng.random_bool(p1.clamp(0.0, 1.0));
        let p = self.collapse_remove(site, basis, outcome)?;
        Ok((outcome, p))
    }

    /// Measures `site` forcing the given outcome, for exhaustive branch
    /// verification. Errs when the forced branch has zero probability.
    pub fn measure_forced(&mut self, site: usize, basis: Basis, outcome: bool) -> Result<f64> {
        self.collapse_remove(site, basis, outcome)
    }

    /// Measures a site whose outcome is determined by the state (up to
    /// `AMP_TOL`); errs if the outcome is genuinely random.
    pub fn measure_deterministic(&mut self, site: usize, basis: Basis) -> Result<(bool, f64)> {
        let (p0, p1) = self.outcome_probabilities(site, basis)?;
        if p1 >= 1.0 - 1e-9 {
            let p = self.collapse_remove(site, basis, true)?;
            Ok((true, p))
        } else if p0 >= 1.0 - 1e-9 {
            let p = self.collapse_remove(site, basis, false)?;
            Ok((false, p))
        } else {
            Err(Error::AmbiguousOutcome { p0, p1 })
        }
    }

    /// All measurement branches of `site` in `basis` with their
    /// probabilities; zero-probability branches are omitted.
    pub fn measure_branches(
        &self,
        site: usize,
        basis: Basis,
    ) -> Result<Vec<(bool, f64, PureState)>> {
        let mut branches = Vec::with_capacity(2);
        for outcome in [false, true] {
            let mut branch = self.clone();
            match branch.collapse_remove(site, basis, outcome) {
                Ok(p) => branches.push((outcome, p, branch)),
                Err(Error::ImpossibleOutcome { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(branches)
    }

    /// Photon loss at `site`: a Z measurement by the environment. Returns
    /// both surviving branches `(probability, collapsed state)`.
    pub fn erase(&self, site: usize) -> Result<Vec<(f64, PureState)>> {
        Ok(self
            .measure_branches(site, Basis::Z)?
            .into_iter()
            .map(|(_, p, state)| (p, state))
            .collect())
    }

    /// Samples one erasure branch; returns the environment's (hidden)
    /// outcome and its probability.
    pub fn erase_sampled(&mut self, site: usize, rng: &mut impl Rng) -> Result<(bool, f64)> {
        self.measure_sampled(site, Basis::Z, rng)
    }

    fn collapse_remove(&mut self, site: usize, basis: Basis, outcome: bool) -> Result<f64> {
        if basis == Basis::X {
            self.apply_1q(site, Gate::H)?;
        }
        let mask = self.bit_mask(site)?;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx & mask != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p < ZERO_PROB {
            if basis == Basis::X {
                // restore the rotated site before reporting
                self.apply_1q(site, Gate::H)?;
            }
            return Err(Error::ImpossibleOutcome { prob: p });
        }

        let scale = 1.0 / p.sqrt();
        let keep = if outcome { mask } else { 0 };
        let low = mask - 1;
        let mut amps = vec![Complex64::ZERO; self.amps.len() / 2];
        for (new_idx, slot) in amps.iter_mut().enumerate() {
            let old_idx = ((new_idx & !low) << 1) | keep | (new_idx & low);
            *slot = self.amps[old_idx] * scale;
        }
        self.amps = amps;
        self.kinds.remove(site);
        Ok(p)
    }

    /// Probabilities `(p_even, p_odd)` of a joint parity measurement of
    /// `sites` in `basis`.
    pub fn parity_probabilities(&self, sites: &[usize], basis: Basis) -> Result<(f64, f64)> {
        match basis {
            Basis::Z => {
                let mut mask = 0usize;
                for &s in sites {
                    let m = self.bit_mask(s)?;
                    if mask & m != 0 {
                        return Err(Error::DuplicateSite(s));
                    }
                    mask |= m;
                }
                let p_odd: f64 = self
                    .amps
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| (idx & mask).count_ones() % 2 == 1)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                Ok(((1.0 - p_odd).max(0.0), p_odd.min(1.0)))
            }
            Basis::X => {
                let mut rotated = self.clone();
                for &s in sites {
                    rotated.apply_1q(s, Gate::H)?;
                }
                rotated.parity_probabilities(sites, Basis::Z)
            }
        }
    }

    /// Non-destructive syndrome measurement: projects onto the given joint
    /// parity of `sites` in `basis` and renormalizes. Returns the branch
    /// probability; sites stay in the register.
    pub fn project_parity(&mut self, sites: &[usize], basis: Basis, odd: bool) -> Result<f64> {
        if basis == Basis::X {
            for &s in sites {
                self.apply_1q(s, Gate::H)?;
            }
        }
        let mut mask = 0usize;
        for &s in sites {
            let m = self.bit_mask(s)?;
            if mask & m != 0 {
                return Err(Error::DuplicateSite(s));
            }
            mask |= m;
        }
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| ((idx & mask).count_ones() % 2 == 1) == odd)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p < ZERO_PROB {
            return Err(Error::ImpossibleOutcome { prob: p });
        }
        let scale = 1.0 / p.sqrt();
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if ((idx & mask).count_ones() % 2 == 1) == odd {
                *amp *= scale;
            } else {
                *amp = Complex64::ZERO;
            }
        }
        if basis == Basis::X {
            for &s in sites {
                self.apply_1q(s, Gate::H)?;
            }
        }
        Ok(p)
    }

    /// Parity measurement whose outcome is fixed by the state, as syndrome
    /// measurements on a code state are. Errs if genuinely random.
    pub fn measure_parity_deterministic(&mut self, sites: &[usize], basis: Basis) -> Result<bool> {
        let (p_even, p_odd) = self.parity_probabilities(sites, basis)?;
        if p_odd >= 1.0 - 1e-9 {
            self.project_parity(sites, basis, true)?;
            Ok(true)
        } else if p_even >= 1.0 - 1e-9 {
            self.project_parity(sites, basis, false)?;
            Ok(false)
        } else {
            Err(Error::AmbiguousOutcome {
                p0: p_even,
                p1: p_odd,
            })
        }
    }

    /// Squared overlap |<self|other>|^2.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        if self.num_sites() != other.num_sites() {
            return Err(Error::BitstringLength {
                got: other.num_sites(),
                expected: self.num_sites(),
            });
        }
        let overlap: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr().min(1.0))
    }
}

fn check_capacity(num_sites: usize) -> Result<()> {
    if num_sites > MAX_SITES {
        Err(Error::CapacityExceeded {
            requested: num_sites,
            max: MAX_SITES,
        })
    } else {
        Ok(())
    }
}

/// Adjusts a table of tracked site indices after `removed` left the
/// register: larger indices shift down, the removed one becomes `None`.
pub fn retarget_after_removal(sites: &mut [Option<usize>], removed: usize) {
    for slot in sites.iter_mut() {
        if let Some(s) = slot {
            match (*s).cmp(&removed) {
                std::cmp::Ordering::Greater => *s -= 1,
                std::cmp::Ordering::Equal => *slot = None,
                std::cmp::Ordering::Less => {}
            }
        }
    }
}

/// Classical record of pending X/Z corrections, applied lazily.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PauliFrame {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl PauliFrame {
    pub fn identity(num_sites: usize) -> Self {
        PauliFrame {
            x: vec![false; num_sites],
            z: vec![false; num_sites],
        }
    }

    pub fn num_sites(&self) -> usize {
        self.x.len()
    }

    pub fn flip_x(&mut self, site: usize) {
        self.x[site] = !self.x[site];
    }

    pub fn flip_z(&mut self, site: usize) {
        self.z[site] = !self.z[site];
    }

    pub fn x(&self, site: usize) -> bool {
        self.x[site]
    }

    pub fn z(&self, site: usize) -> bool {
        self.z[site]
    }

    pub fn is_identity(&self) -> bool {
        !self.x.iter().chain(self.z.iter()).any(|&f| f)
    }

    /// Materializes the pending corrections on the state and clears them.
    pub fn apply_and_clear(&mut self, state: &mut PureState) -> Result<()> {
        for site in 0..self.x.len() {
            if self.x[site] {
                state.apply_1q(site, Gate::X)?;
            }
            if self.z[site] {
                state.apply_1q(site, Gate::Z)?;
            }
        }
        self.x.fill(false);
        self.z.fill(false);
        Ok(())
    }
}
