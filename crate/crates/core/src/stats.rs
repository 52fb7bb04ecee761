//! Photon-counting and quadrature statistics of the mixed coherent/Fock
//! state `A_{nα}`, the beamsplitter output of `|α⟩⊗|n⟩`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fock::{self, build_input_state, FockCutoff, TwoModeState};
use crate::linalg::{self, c, CMat, CVec};
use crate::transforms::beamsplitter_unitary;
use crate::{Error, Result, C64};

/// Phase points of the quadrature-variance scan over `[0, π)`.
pub const PHASE_SCAN: usize = 64;
const MEAN_FLOOR: f64 = 1e-14;
const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub mean_a: f64,
    pub mean_b: f64,
    /// `(⟨n²⟩ − ⟨n⟩² − ⟨n⟩)/⟨n⟩`, 0 when `⟨n⟩ = 0`.
    pub mandel_a: f64,
    pub mandel_b: f64,
    /// `⟨n_a n_b⟩ − ⟨n_a⟩⟨n_b⟩`.
    pub covariance: f64,
    /// `Var(n_a + n_b)`.
    pub sum_variance: f64,
    /// `Var(n_a − n_b)`.
    pub diff_variance: f64,
    /// `⟨n_a + n_b⟩`.
    pub shot_level: f64,
    /// Minimum of `Var(x_φ)` over both modes and the phase scan.
    pub min_quadrature_variance: f64,
    /// `Var(x_a + x_b) + Var(p_a − p_b)`.
    pub separability: f64,
}

fn check_mixing(c: f64, s: f64) -> Result<()> {
    if (c * c + s * s - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidParameter(format!("c² + s² = {} != 1", c * c + s * s)));
    }
    Ok(())
}

/// `A_{nα}`: `U(θ)` applied to `|α⟩⊗|n⟩` with `(cos θ, sin θ) = (c, s)`, so
/// that `A_{0α} = |cα⟩⊗|−sα⟩`.
#[allow(non_snake_case)]
pub fn build_A_state(alpha: C64, n: usize, c: f64, s: f64, cutoff: FockCutoff) -> Result<TwoModeState> {
    check_mixing(c, s)?;
    Ok(build_input_state(alpha, n, cutoff)?.transformed(&beamsplitter_unitary(s.atan2(c), cutoff)))
}

/// `A_{nα}` as `(s a† + c b†)^n A_{0α} / √n!`, normalized after truncation.
#[allow(non_snake_case)]
pub fn build_A_state_ladder(alpha: C64, n: usize, c: f64, s: f64, cutoff: FockCutoff) -> Result<TwoModeState> {
    check_mixing(c, s)?;
    // same tail check as the beamsplitter route
    build_input_state(alpha, n, cutoff)?;
    let nm = cutoff.n_max();
    let zero = TwoModeState::product(
        &fock::coherent_vector(alpha * c, nm),
        &fock::coherent_vector(-alpha * s, nm),
        cutoff,
    )?;
    let ad = fock::annihilation(nm).adjoint();
    let id = linalg::identity(nm);
    let creator =
        linalg::RowSparse::from_dense(&(linalg::kron(&ad, &id) * linalg::c(s) + linalg::kron(&id, &ad) * linalg::c(c)));
    let mut psi: CVec = zero.as_pure().expect("pure").clone();
    for _ in 0..n {
        psi = creator.mul_vec(&psi);
    }
    let norm = psi.norm();
    TwoModeState::pure(psi / linalg::c(norm), cutoff)
}

struct Moments {
    a: C64,
    b: C64,
    aa: C64,
    bb: C64,
    na: f64,
    nb: f64,
    na2: f64,
    nb2: f64,
    nanb: f64,
    ab: C64,
    adb: C64,
}

impl Moments {
    fn of(state: &TwoModeState) -> Self {
        let n = state.cutoff().n_max();
        let a = fock::annihilation(n);
        let a2 = &a * &a;
        let num = fock::number(n);
        let num2 = &num * &num;
        let ad = a.adjoint();
        let id = linalg::identity(n);
        let e = |x: &CMat, y: &CMat| state.expect_local(x, y);
        Self {
            a: e(&a, &id),
            b: e(&id, &a),
            aa: e(&a2, &id),
            bb: e(&id, &a2),
            na: e(&num, &id).re,
            nb: e(&id, &num).re,
            na2: e(&num2, &id).re,
            nb2: e(&id, &num2).re,
            nanb: e(&num, &num).re,
            ab: e(&a, &a),
            adb: e(&ad, &a),
        }
    }
}

/// `Var(x_φ)` with `x_φ = (a e^{−iφ} + a† e^{iφ})/√2`, from normally ordered
/// moments so the truncated `a a†` never enters.
fn quadrature_variance(mean: C64, mean_sq: C64, n: f64, phi: f64) -> f64 {
    let rot = C64::from_polar(1.0, -phi);
    let m = (mean * rot).re;
    (mean_sq * rot * rot).re + n + 0.5 - 2.0 * m * m
}

fn mandel(n: f64, n2: f64) -> f64 {
    if n.abs() < MEAN_FLOOR {
        0.0
    } else {
        (n2 - n * n - n) / n
    }
}

pub fn compute_stats(state: &TwoModeState) -> StatsReport {
    let m = Moments::of(state);
    let var_a = m.na2 - m.na * m.na;
    let var_b = m.nb2 - m.nb * m.nb;
    let covariance = m.nanb - m.na * m.nb;

    let min_quadrature_variance = (0..PHASE_SCAN)
        .map(|k| PI * k as f64 / PHASE_SCAN as f64)
        .flat_map(|phi| {
            [
                quadrature_variance(m.a, m.aa, m.na, phi),
                quadrature_variance(m.b, m.bb, m.nb, phi),
            ]
        })
        .fold(f64::INFINITY, f64::min);

    let half_pi = PI / 2.0;
    let (xa, xb) = (2f64.sqrt() * m.a.re, 2f64.sqrt() * m.b.re);
    let (pa, pb) = (2f64.sqrt() * m.a.im, 2f64.sqrt() * m.b.im);
    let cov_x = m.ab.re + m.adb.re - xa * xb;
    let cov_p = -m.ab.re + m.adb.re - pa * pb;
    let var_q = quadrature_variance(m.a, m.aa, m.na, 0.0) + quadrature_variance(m.b, m.bb, m.nb, 0.0) + 2.0 * cov_x;
    let var_p =
        quadrature_variance(m.a, m.aa, m.na, half_pi) + quadrature_variance(m.b, m.bb, m.nb, half_pi) - 2.0 * cov_p;

    StatsReport {
        mean_a: m.na,
        mean_b: m.nb,
        mandel_a: mandel(m.na, m.na2),
        mandel_b: mandel(m.nb, m.nb2),
        covariance,
        sum_variance: var_a + var_b + 2.0 * covariance,
        diff_variance: var_a + var_b - 2.0 * covariance,
        shot_level: m.na + m.nb,
        min_quadrature_variance,
        separability: var_q + var_p,
    }
}

/// Mandel parameters of `A_{nα}`:
/// `Q_a = s²n(2c²|α|² − s²)/(c²|α|² + s²n)` and the `c ↔ s` mirror for `Q_b`.
/// A vanishing mean photon number gives 0.
pub fn mandel_closed_form(alpha: C64, n: usize, c: f64, s: f64) -> (f64, f64) {
    let a2 = alpha.norm_sqr();
    let n = n as f64;
    let q = |c2: f64, s2: f64| {
        let den = c2 * a2 + s2 * n;
        if den.abs() < MEAN_FLOOR {
            0.0
        } else {
            s2 * n * (2.0 * c2 * a2 - s2) / den
        }
    };
    (q(c * c, s * s), q(s * s, c * c))
}

/// `⟨n_a n_b⟩ − ⟨n_a⟩⟨n_b⟩ = −c²s²n(2|α|² + 1)` for `A_{nα}`.
pub fn covariance_closed_form(alpha: C64, n: usize, c: f64, s: f64) -> f64 {
    -c * c * s * s * n as f64 * (2.0 * alpha.norm_sqr() + 1.0)
}

/// `|⟨A_{1α}|(|t₀t₁⟩ − |t₁t₀⟩)⟩|` at `c = s = 1/√2`, `t_m = a†^m|α/√2⟩`,
/// with the right-hand side normalized numerically.
///
/// The beamsplitter here leaves `|−α/√2⟩` in mode b; the right-hand side is
/// taken through the mode-b parity `exp(iπ n_b)` to match.
pub fn epr_form_check(alpha: C64, cutoff: FockCutoff) -> Result<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let lhs = build_A_state(alpha, 1, h, h, cutoff)?;
    let nm = cutoff.n_max();
    let beta = alpha * h;
    let t0 = fock::coherent_amplitudes(beta, nm);
    let t1 = fock::annihilation(nm).adjoint() * &t0;
    let parity = CVec::from_fn(nm, |k, _| c(if k % 2 == 0 { 1.0 } else { -1.0 }));
    let (t0b, t1b) = (t0.component_mul(&parity), t1.component_mul(&parity));
    let rhs = CVec::from_fn(nm * nm, |i, _| {
        let (j, k) = (i / nm, i % nm);
        t0[j] * t1b[k] - t1[j] * t0b[k]
    });
    let norm = rhs.norm();
    let rhs = rhs / c(norm);
    Ok(lhs.as_pure().expect("pure").dotc(&rhs).norm())
}
