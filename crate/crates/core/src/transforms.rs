//! Passive optics on the two-mode space and the collective-mode picture.
//!
//! Sign convention: `beamsplitter_unitary(θ)` is `U = exp(θ(a†b − ab†))`,
//! whose Heisenberg action is `U†aU = c·a + s·b`, `U†bU = −s·a + c·b` with
//! `c = cos θ`, `s = sin θ`. A scheme is matched when `(c, s) = ±(g, f)/G`;
//! then `U†aU` is the collective mode `r = (g·a + f·b)/G` that couples to
//! the atoms and `U†bU = −τ` is the decoupled mode.

use serde::{Deserialize, Serialize};

use crate::fock::{self, FockCutoff, Mode, ModeLabel, ModeOperator};
use crate::linalg::{self, c, CMat, CVec, SectorUnitary, I};
use crate::{Error, Result, C64};

const UNIT_TOL: f64 = 1e-12;
const MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub g: f64,
    pub f: f64,
    pub c: f64,
    pub s: f64,
    pub theta: f64,
    pub matched: bool,
}

impl SchemeParams {
    /// Scheme whose beamsplitter angle is tuned to the couplings.
    pub fn matched(g: f64, f: f64) -> Result<Self> {
        check_couplings(g, f)?;
        Self::with_angle(g, f, f.atan2(g))
    }

    /// Scheme with an explicit beamsplitter angle; `matched` is derived.
    pub fn with_angle(g: f64, f: f64, theta: f64) -> Result<Self> {
        check_couplings(g, f)?;
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta = {theta}")));
        }
        let (s, c) = theta.sin_cos();
        let big_g = g.hypot(f);
        let (cg, sf) = (g / big_g, f / big_g);
        let matched = ((c - cg).abs() < MATCH_TOL && (s - sf).abs() < MATCH_TOL)
            || ((c + cg).abs() < MATCH_TOL && (s + sf).abs() < MATCH_TOL);
        Ok(Self {
            g,
            f,
            c,
            s,
            theta,
            matched,
        })
    }

    /// `G = √(g² + f²)`.
    pub fn big_g(&self) -> f64 {
        self.g.hypot(self.f)
    }

    /// Coefficients `(c, s)` of the beamsplitter the light actually crosses
    /// in front of the absorber. That element is `U(−θ)`, so the mixed state
    /// reaching the absorber is the `U(θ')` output of `|α⟩⊗|n⟩` with
    /// `(cos θ', sin θ') = (c, −s)`; in these coefficients `s·g = −c·f`.
    pub fn input_mixing(&self) -> (f64, f64) {
        (self.c, -self.s)
    }

    pub fn validate(&self) -> Result<()> {
        check_couplings(self.g, self.f)?;
        if (self.c * self.c + self.s * self.s - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!(
                "c² + s² = {} != 1",
                self.c * self.c + self.s * self.s
            )));
        }
        Ok(())
    }
}

fn check_couplings(g: f64, f: f64) -> Result<()> {
    if !(g.is_finite() && f.is_finite()) || g.hypot(f) == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "couplings g = {g}, f = {f} need G > 0"
        )));
    }
    Ok(())
}

/// Mode frequencies for the resonant (`ε = 0`) and Raman / two-photon
/// (`ε = ±1`) variants: `ω_a − ε·Ω = ω_b = ω_0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpec {
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_0: f64,
    pub big_omega: f64,
    pub epsilon: i8,
}

impl FrequencySpec {
    /// Frequencies satisfying the resonance condition for the given pump.
    pub fn resonant(omega_0: f64, big_omega: f64, epsilon: i8) -> Result<Self> {
        let spec = Self {
            omega_a: omega_0 + epsilon as f64 * big_omega,
            omega_b: omega_0,
            omega_0,
            big_omega,
            epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.epsilon, -1..=1) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} not in {{-1, 0, 1}}",
                self.epsilon
            )));
        }
        if self.big_omega < 0.0 || !self.big_omega.is_finite() {
            return Err(Error::InvalidParameter(format!("Omega = {}", self.big_omega)));
        }
        let shifted = self.omega_a - self.epsilon as f64 * self.big_omega;
        if (shifted - self.omega_b).abs() > UNIT_TOL || (self.omega_b - self.omega_0).abs() > UNIT_TOL {
            return Err(Error::Resonance(format!(
                "omega_a - eps*Omega = {shifted}, omega_b = {}, omega_0 = {}",
                self.omega_b, self.omega_0
            )));
        }
        Ok(())
    }
}

/// Generator `a†b − ab†` as a dense matrix.
pub fn beamsplitter_generator(cutoff: FockCutoff) -> CMat {
    let n = cutoff.n_max();
    let a = fock::annihilation(n);
    let ad = a.adjoint();
    linalg::kron(&ad, &a) - linalg::kron(&a, &ad)
}

/// `exp(θ(a†b − ab†))`, block diagonal over total photon number.
pub fn beamsplitter_unitary(theta: f64, cutoff: FockCutoff) -> SectorUnitary {
    // exp(θK) = exp(−i(iK)θ) with iK Hermitian
    let h = beamsplitter_generator(cutoff) * I;
    SectorUnitary::from_hermitian(&h, theta)
}

/// `exp(iμ n_mode)`; conjugation multiplies the mode's annihilator by `e^{iμ}`.
pub fn phase_shift(mode: Mode, mu: f64, cutoff: FockCutoff) -> SectorUnitary {
    let entries: Vec<C64> = (0..cutoff.dim())
        .map(|i| {
            let (j, k) = cutoff.split(i);
            let count = match mode {
                Mode::A => j,
                Mode::B => k,
            };
            C64::from_polar(1.0, mu * count as f64)
        })
        .collect();
    SectorUnitary::diagonal(&entries)
}

/// `(r, τ) = ((g·a + f·b)/G, (f·a − g·b)/G)`.
pub fn collective_modes(g: f64, f: f64, cutoff: FockCutoff) -> Result<(ModeOperator, ModeOperator)> {
    check_couplings(g, f)?;
    let big_g = g.hypot(f);
    let a = fock::mode_operator(ModeLabel::A, cutoff)?.matrix;
    let b = fock::mode_operator(ModeLabel::B, cutoff)?.matrix;
    let r = (&a * c(g) + &b * c(f)) / c(big_g);
    let tau = (&a * c(f) - &b * c(g)) / c(big_g);
    Ok((
        ModeOperator::custom(r, cutoff, "r")?,
        ModeOperator::custom(tau, cutoff, "tau")?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    /// Spectral norm of `[H, Z]` on the safe subspace.
    pub commutator_norm: f64,
    /// `max_t |⟨Z⟩(t) − ⟨Z⟩(0)|` over the time grid.
    pub dynamic_drift: f64,
}

/// Checks that `z` is conserved by the Hamiltonian `h`, statically through
/// the commutator and dynamically along `exp(−iHt)|probe⟩`.
///
/// The commutator is evaluated on columns whose field part has total photon
/// number `<= n_max − 2`, where truncation does not alter ladder algebra.
pub fn check_integral_of_motion(
    h: &ModeOperator,
    z: &ModeOperator,
    probe: &CVec,
    times: &[f64],
) -> Result<IntegralReport> {
    if h.dim() != z.dim() || h.dim() != probe.len() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: if h.dim() != z.dim() { z.dim() } else { probe.len() },
        });
    }
    let defect = linalg::hermiticity_defect(&h.matrix);
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let comm = linalg::commutator(&h.matrix, &z.matrix);
    let safe = h.safe_indices();
    let restricted = comm.select_columns(safe.iter());
    let commutator_norm = linalg::spectral_norm(&restricted);

    let propagator = linalg::SpectralPropagator::new(&h.matrix);
    let z0 = probe.dotc(&(&z.matrix * probe));
    let dynamic_drift = times
        .iter()
        .map(|&t| {
            let psi = propagator.at(t).apply(probe);
            (psi.dotc(&(&z.matrix * &psi)) - z0).norm()
        })
        .fold(0.0, f64::max);
    Ok(IntegralReport {
        commutator_norm,
        dynamic_drift,
    })
}

/// A scheme related to the resonant one by a phase rotation of mode a,
/// `R_a(μ) = exp(iμ n_a)` with `μ = ε·Ω·t`.
///
/// Every element `X` of the resonant scheme becomes `R_a† X R_a`: the
/// beamsplitter generator picks up `a†b·e^{−iεΩt} − ab†·e^{iεΩt}` and the
/// atom coupling `g·a·e^{iεΩt} + f·b`. In the rotating frame the pipeline is
/// the resonant one; the frequencies are kept for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalentScheme {
    pub base: SchemeParams,
    pub freq: FrequencySpec,
}

impl EquivalentScheme {
    pub fn frame_phase(&self, t: f64) -> f64 {
        self.freq.epsilon as f64 * self.freq.big_omega * t
    }

    /// True when the transformation is the identity (`ε = 0` or `Ω = 0`).
    pub fn is_trivial(&self) -> bool {
        self.freq.epsilon == 0 || self.freq.big_omega == 0.0
    }

    pub fn frame_rotation(&self, t: f64, cutoff: FockCutoff) -> SectorUnitary {
        phase_shift(Mode::A, self.frame_phase(t), cutoff)
    }

    fn conjugate_dense(&self, m: &CMat, t: f64, cutoff: FockCutoff) -> CMat {
        let r = self.frame_rotation(t, cutoff);
        // R† m R
        r.adjoint().conjugate(m)
    }

    /// Transformed beamsplitter generator `a†b·e^{−iεΩt} − ab†·e^{iεΩt}`.
    pub fn beamsplitter_generator(&self, t: f64, cutoff: FockCutoff) -> CMat {
        self.conjugate_dense(&beamsplitter_generator(cutoff), t, cutoff)
    }

    /// Transformed decoupled mode `τ' = (f·a·e^{iεΩt} − g·b)/G`.
    pub fn tau(&self, t: f64, cutoff: FockCutoff) -> Result<ModeOperator> {
        let (_, tau) = collective_modes(self.base.g, self.base.f, cutoff)?;
        ModeOperator::custom(self.conjugate_dense(&tau.matrix, t, cutoff), cutoff, "tau'")
    }

    /// Transformed collective mode `r' = (g·a·e^{iεΩt} + f·b)/G`.
    pub fn r(&self, t: f64, cutoff: FockCutoff) -> Result<ModeOperator> {
        let (r, _) = collective_modes(self.base.g, self.base.f, cutoff)?;
        ModeOperator::custom(self.conjugate_dense(&r.matrix, t, cutoff), cutoff, "r'")
    }
}

/// The phase-rotated family member of `scheme` selected by `freq`.
pub fn unitary_equivalent_scheme(scheme: SchemeParams, freq: FrequencySpec) -> Result<EquivalentScheme> {
    freq.validate()?;
    scheme.validate()?;
    Ok(EquivalentScheme { base: scheme, freq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorber::interaction_hamiltonian;
    use crate::fock::{build_input_state, coherent_vector, TwoModeState};
    use crate::linalg::ONE;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n, 2).unwrap()
    }

    /// Max entry of `m` over rows and columns restricted to total photon
    /// number <= limit.
    fn safe_norm(m: &CMat, cutoff: FockCutoff, limit: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..cutoff.dim() {
            let (j, k) = cutoff.split(i);
            if j + k > limit {
                continue;
            }
            for r in 0..cutoff.dim() {
                worst = worst.max(m[(r, i)].norm());
            }
        }
        worst
    }

    #[test]
    fn scheme_matching() {
        let s = SchemeParams::matched(1.0, 2.0).unwrap();
        assert!(s.matched);
        assert!((s.c - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        let flipped = SchemeParams::with_angle(1.0, 2.0, s.theta + PI).unwrap();
        assert!(flipped.matched);
        let off = SchemeParams::with_angle(1.0, 2.0, 0.1).unwrap();
        assert!(!off.matched);
        assert!(SchemeParams::matched(0.0, 0.0).is_err());
        let (c_in, s_in) = s.input_mixing();
        assert!((s_in * s.g + c_in * s.f).abs() < 1e-15);
    }

    #[test]
    fn frequency_resonance() {
        assert!(FrequencySpec::resonant(1.0, 0.3, 1).is_ok());
        let mut bad = FrequencySpec::resonant(1.0, 0.3, -1).unwrap();
        bad.omega_a += 0.01;
        assert!(matches!(bad.validate(), Err(Error::Resonance(_))));
        assert!(FrequencySpec::resonant(1.0, 0.3, 2).is_err());
    }

    #[test]
    fn beamsplitter_identity_and_unitarity() {
        let f = cut(6);
        let u0 = beamsplitter_unitary(0.0, f).to_dense();
        assert!((u0 - linalg::identity(36)).norm() < 1e-14);
        for theta in [0.3, 1.1, -2.4] {
            let u = beamsplitter_unitary(theta, f).to_dense();
            assert!((u.adjoint() * &u - linalg::identity(36)).norm() < 1e-12);
            let n_tot = fock::mode_operator(ModeLabel::NA, f).unwrap().matrix
                + fock::mode_operator(ModeLabel::NB, f).unwrap().matrix;
            assert!(linalg::commutator(&u, &n_tot).norm() < 1e-12);
        }
    }

    #[test]
    fn beamsplitter_heisenberg_action() {
        let f = cut(8);
        let theta = 0.83;
        let u = beamsplitter_unitary(theta, f).to_dense();
        let a = fock::mode_operator(ModeLabel::A, f).unwrap().matrix;
        let b = fock::mode_operator(ModeLabel::B, f).unwrap().matrix;
        let (s, cc) = theta.sin_cos();
        let ua = u.adjoint() * &a * &u - (&a * c(cc) + &b * c(s));
        let ub = u.adjoint() * &b * &u - (&b * c(cc) - &a * c(s));
        assert!(safe_norm(&ua, f, 6) < 1e-10);
        assert!(safe_norm(&ub, f, 6) < 1e-10);
    }

    #[test]
    fn beamsplitter_composition() {
        let f = cut(7);
        let u1 = beamsplitter_unitary(0.4, f);
        let u2 = beamsplitter_unitary(0.9, f);
        let u12 = beamsplitter_unitary(1.3, f).to_dense();
        let prod = u1.compose(&u2).to_dense();
        assert!(safe_norm(&(prod - u12), f, 5) < 1e-10);
    }

    #[test]
    fn beamsplitter_splits_coherent_state() {
        let f = FockCutoff::new(20, 2).unwrap();
        let input = build_input_state(ONE, 0, f).unwrap();
        let out = input.transformed(&beamsplitter_unitary(FRAC_PI_4, f));
        let s = FRAC_1_SQRT_2;
        let target = TwoModeState::product(&coherent_vector(c(s), 20), &coherent_vector(c(-s), 20), f).unwrap();
        let overlap = target.as_pure().unwrap().dotc(out.as_pure().unwrap()).norm();
        assert!((overlap - 1.0).abs() < 1e-8, "{overlap}");
    }

    #[test]
    fn collective_mode_cases() {
        let f = cut(6);
        let a = fock::mode_operator(ModeLabel::A, f).unwrap().matrix;
        let b = fock::mode_operator(ModeLabel::B, f).unwrap().matrix;
        let (r, tau) = collective_modes(1.0, 0.0, f).unwrap();
        assert!((r.matrix - &a).norm() < 1e-15);
        assert!((tau.matrix + &b).norm() < 1e-15);
        let (r, tau) = collective_modes(1.0, 1.0, f).unwrap();
        let h = c(FRAC_1_SQRT_2);
        assert!((r.matrix.clone() - (&a + &b) * h).norm() < 1e-14);
        assert!((tau.matrix.clone() - (&a - &b) * h).norm() < 1e-14);
        assert!(collective_modes(0.0, 0.0, f).is_err());

        let (r, tau) = collective_modes(0.6, -1.3, f).unwrap();
        let rr = linalg::commutator(&r.matrix, &r.matrix.adjoint()) - linalg::identity(36);
        let rt = linalg::commutator(&r.matrix, &tau.matrix.adjoint());
        assert!(safe_norm(&rr, f, 4) < 1e-12);
        assert!(safe_norm(&rt, f, 4) < 1e-12);
    }

    #[test]
    fn matched_beamsplitter_maps_a_to_r() {
        let f = cut(8);
        let scheme = SchemeParams::matched(0.8, 1.7).unwrap();
        let u = beamsplitter_unitary(scheme.theta, f).to_dense();
        let (r, tau) = collective_modes(scheme.g, scheme.f, f).unwrap();
        let a = fock::mode_operator(ModeLabel::A, f).unwrap().matrix;
        let b = fock::mode_operator(ModeLabel::B, f).unwrap().matrix;
        assert!(safe_norm(&(u.adjoint() * &a * &u - &r.matrix), f, 6) < 1e-10);
        assert!(safe_norm(&(u.adjoint() * &b * &u + &tau.matrix), f, 6) < 1e-10);
    }

    #[test]
    fn phase_shift_action() {
        let f = cut(6);
        assert!((phase_shift(Mode::A, 0.0, f).to_dense() - linalg::identity(36)).norm() < 1e-15);
        assert!((phase_shift(Mode::B, 2.0 * PI, f).to_dense() - linalg::identity(36)).norm() < 1e-12);
        let mu = 0.7;
        let r = phase_shift(Mode::A, mu, f).to_dense();
        let a = fock::mode_operator(ModeLabel::A, f).unwrap().matrix;
        let lhs = r.adjoint() * &a * &r;
        assert!((lhs - &a * C64::from_polar(1.0, mu)).norm() < 1e-12);
        assert!((r.adjoint() * &r - linalg::identity(36)).norm() < 1e-12);
    }

    fn probe(cutoff: FockCutoff, atoms: usize) -> CVec {
        // low-photon superposition so evolution stays inside the safe subspace
        let n = cutoff.n_max();
        let mut field = CVec::zeros(cutoff.dim());
        for j in 0..n {
            for k in 0..n {
                if j + k <= cutoff.safe_total() {
                    field[cutoff.index(j, k)] = C64::new(0.6f64.powi(j as i32), 0.3 * 0.5f64.powi(k as i32));
                }
            }
        }
        let field = &field / c(field.norm());
        // atoms in the ground state occupy the lowest index of each block
        let mut out = CVec::zeros(cutoff.dim() << atoms);
        for (i, v) in field.iter().enumerate() {
            out[i << atoms] = *v;
        }
        out
    }

    #[test]
    fn tau_is_integral_of_motion() {
        let f = cut(5);
        let g = FRAC_1_SQRT_2;
        for atoms in 1..=3 {
            let v = interaction_hamiltonian(g, g, atoms, f).unwrap();
            let (r, tau) = collective_modes(g, g, f).unwrap();
            let times: Vec<f64> = (0..20).map(|i| 0.37 * i as f64).collect();
            let p = probe(f, atoms);
            let rep = check_integral_of_motion(&v, &tau.with_atoms(atoms), &p, &times).unwrap();
            assert!(rep.commutator_norm <= 1e-10, "{rep:?}");
            assert!(rep.dynamic_drift <= 1e-8, "{rep:?}");
            let neg = check_integral_of_motion(&v, &r.with_atoms(atoms), &p, &times).unwrap();
            assert!(neg.commutator_norm > 0.1, "{neg:?}");
        }
    }

    #[test]
    fn identity_is_trivially_conserved() {
        let f = cut(4);
        let v = interaction_hamiltonian(0.3, 1.2, 1, f).unwrap();
        let id = ModeOperator::joint(linalg::identity(v.dim()), f, 1, "1");
        let rep = check_integral_of_motion(&v, &id, &probe(f, 1), &[0.5, 1.0]).unwrap();
        assert_eq!(rep.commutator_norm, 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let f = cut(4);
        let a = fock::mode_operator(ModeLabel::A, f).unwrap();
        let p = CVec::from_element(16, c(0.25));
        assert!(matches!(
            check_integral_of_motion(&a, &a, &p, &[1.0]),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn equivalent_scheme_phases() {
        let f = cut(6);
        let scheme = SchemeParams::matched(1.0, 1.0).unwrap();
        let trivial = unitary_equivalent_scheme(scheme, FrequencySpec::resonant(1.0, 0.0, 1).unwrap()).unwrap();
        assert!(trivial.is_trivial());
        assert_eq!(trivial.base, scheme);

        let freq = FrequencySpec::resonant(1.0, 0.3, 1).unwrap();
        let eq = unitary_equivalent_scheme(scheme, freq).unwrap();
        let t = 2.0;
        let phase = C64::from_polar(1.0, 0.3 * t);
        let a = fock::mode_operator(ModeLabel::A, f).unwrap().matrix;
        let b = fock::mode_operator(ModeLabel::B, f).unwrap().matrix;
        let expect = a.adjoint() * &b * phase.conj() - &a * b.adjoint() * phase;
        assert!((eq.beamsplitter_generator(t, f) - expect).norm() < 1e-12);
        let g = c(FRAC_1_SQRT_2);
        let tau_expect = (&a * phase - &b) * g;
        assert!((eq.tau(t, f).unwrap().matrix - tau_expect).norm() < 1e-12);

        // the transformed τ' is conserved by the transformed coupling
        let v = interaction_hamiltonian(scheme.g, scheme.f, 1, f).unwrap();
        let rot = eq.frame_rotation(t, f).to_dense();
        let rot_joint = linalg::kron(&rot, &linalg::identity(2));
        let v_prime = ModeOperator::joint(rot_joint.adjoint() * &v.matrix * &rot_joint, f, 1, "V'");
        let tau_p = eq.tau(t, f).unwrap().with_atoms(1);
        let rep = check_integral_of_motion(&v_prime, &tau_p, &probe(f, 1), &[0.7]).unwrap();
        assert!(rep.commutator_norm < 1e-10);

        let mut bad = freq;
        bad.omega_b = 1.2;
        assert!(unitary_equivalent_scheme(scheme, bad).is_err());
    }
}
