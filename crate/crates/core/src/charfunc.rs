//! Normally ordered characteristic function
//! `C_N(β₁, β₂) = Tr{ρ D_N(β₁) D_N(β₂)}`, `D_N(β) = e^{β c†} e^{−β* c}`.
//!
//! On a truncated basis both exponentials are nilpotent series that stop at
//! `n_max − 1`, so the numeric value is exact for the truncated state.

use serde::{Deserialize, Serialize};

use crate::fock::TwoModeState;
use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

/// Largest `|β|` accepted by [`charfunc_numeric`].
pub const GRID_BOUND: f64 = 2.0;
const BOUND_SLACK: f64 = 1e-12;

/// `e^{β a†} e^{−β* a}` on `n` levels.
pub fn normal_displacement(beta: C64, n: usize) -> CMat {
    // e^{βa†}[i, j] = β^{i−j} √(i!/j!) / (i−j)!  for i >= j
    let mut up = CMat::zeros(n, n);
    for j in 0..n {
        let mut term = C64::new(1.0, 0.0);
        up[(j, j)] = term;
        for i in j + 1..n {
            let d = (i - j) as f64;
            term = term * beta * (i as f64).sqrt() / d;
            up[(i, j)] = term;
        }
    }
    // e^{−β* a} = (e^{−β a†})†
    let mut down = CMat::zeros(n, n);
    for j in 0..n {
        let mut term = C64::new(1.0, 0.0);
        down[(j, j)] = term;
        for i in j + 1..n {
            let d = (i - j) as f64;
            term = term * (-beta.conj()) * (i as f64).sqrt() / d;
            down[(j, i)] = term;
        }
    }
    up * down
}

fn check_bound(beta: C64) -> Result<()> {
    let modulus = beta.norm();
    if !(modulus <= GRID_BOUND + BOUND_SLACK) {
        return Err(Error::OutOfGrid {
            modulus,
            bound: GRID_BOUND,
        });
    }
    Ok(())
}

pub fn charfunc_numeric(state: &TwoModeState, beta1: C64, beta2: C64) -> Result<C64> {
    check_bound(beta1)?;
    check_bound(beta2)?;
    let n = state.cutoff().n_max();
    Ok(state.expect_local(&normal_displacement(beta1, n), &normal_displacement(beta2, n)))
}

/// `Σ_k C(n,k) (−x)^k / k!`; equals the Laguerre polynomial `L_n(x)`.
pub fn fock_factor(n: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        term *= -x * (n - k) as f64 / ((k + 1) * (k + 1)) as f64;
        sum += term;
    }
    sum
}

/// `exp(βα* − β*α)`, the coherent-state factor.
fn coherent_factor(beta: C64, alpha: C64, scale: f64) -> C64 {
    ((beta * alpha.conj() - beta.conj() * alpha) * scale).exp()
}

/// Derived variables `h = cβ₁ − sβ₂`, `e = sβ₁ + cβ₂`.
pub fn derived_variables(c: f64, s: f64, beta1: C64, beta2: C64) -> (C64, C64) {
    (beta1 * c - beta2 * s, beta1 * s + beta2 * c)
}

/// `C_N` of `|α⟩⊗|n⟩` after a beamsplitter with coefficients `(c, s)`:
/// `exp(hα* − h*α) · Σ_k C(n,k)(−1)^k |e|^{2k}/k!`.
pub fn charfunc_bs_closed_form(alpha: C64, n: usize, c: f64, s: f64, beta1: C64, beta2: C64) -> C64 {
    let (h, e) = derived_variables(c, s, beta1, beta2);
    coherent_factor(h, alpha, 1.0) * fock_factor(n, e.norm_sqr())
}

/// Where in the scheme a closed form is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharFrame {
    /// Directly behind the absorber, arguments refer to modes a and b.
    AbsorberOutput,
    /// Behind the second beamsplitter; the arguments are the output-port
    /// variables `β₁' = cβ₁ − sβ₂`, `β₂' = sβ₁ + cβ₂`.
    AfterSecondBeamsplitter,
}

/// `C_N` after the collective damping with transmissivity `q`:
/// the coherent exponent is scaled by `q`, the Fock factor is untouched.
#[allow(clippy::too_many_arguments)]
pub fn charfunc_absorbed_closed_form(
    alpha: C64,
    n: usize,
    c: f64,
    s: f64,
    q: f64,
    beta1: C64,
    beta2: C64,
    frame: CharFrame,
) -> C64 {
    let (h, e) = match frame {
        CharFrame::AbsorberOutput => derived_variables(c, s, beta1, beta2),
        CharFrame::AfterSecondBeamsplitter => (beta1, beta2),
    };
    coherent_factor(h, alpha, q) * fock_factor(n, e.norm_sqr())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharSample {
    pub beta1: C64,
    pub beta2: C64,
    pub value: C64,
}

impl CharSample {
    pub fn derived(&self, c: f64, s: f64) -> (C64, C64) {
        derived_variables(c, s, self.beta1, self.beta2)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CharGrid {
    pub samples: Vec<CharSample>,
}

impl CharGrid {
    /// Row-major grid: `β₁ = u_i e^{iφ₁}`, `β₂ = u_j e^{iφ₂}` with `u`
    /// spaced evenly over `[−bound, bound]`.
    pub fn points(bound: f64, count: usize, phase1: f64, phase2: f64) -> Result<Vec<(C64, C64)>> {
        if !(bound >= 0.0) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid needs bound >= 0 and count >= 1 (got {bound}, {count})"
            )));
        }
        if bound > GRID_BOUND + BOUND_SLACK {
            return Err(Error::OutOfGrid {
                modulus: bound,
                bound: GRID_BOUND,
            });
        }
        let axis: Vec<f64> = if count == 1 {
            vec![0.0]
        } else {
            (0..count)
                .map(|i| -bound + 2.0 * bound * i as f64 / (count - 1) as f64)
                .collect()
        };
        let (d1, d2) = (C64::from_polar(1.0, phase1), C64::from_polar(1.0, phase2));
        Ok(axis
            .iter()
            .flat_map(|&u| axis.iter().map(move |&v| (d1 * u, d2 * v)))
            .collect())
    }

    pub fn from_fn<F>(points: &[(C64, C64)], mut f: F) -> Result<Self>
    where
        F: FnMut(C64, C64) -> Result<C64>,
    {
        let samples = points
            .iter()
            .map(|&(beta1, beta2)| f(beta1, beta2).map(|value| CharSample { beta1, beta2, value }))
            .collect::<Result<_>>()?;
        Ok(Self { samples })
    }

    pub fn numeric(state: &TwoModeState, points: &[(C64, C64)]) -> Result<Self> {
        let n = state.cutoff().n_max();
        Self::from_fn(points, |b1, b2| {
            check_bound(b1)?;
            check_bound(b2)?;
            Ok(state.expect_local(&normal_displacement(b1, n), &normal_displacement(b2, n)))
        })
    }

    /// Largest `|value − other.value|`; the grids must share their points.
    pub fn max_abs_diff(&self, other: &CharGrid) -> Result<f64> {
        if self.samples.len() != other.samples.len() {
            return Err(Error::DimensionMismatch {
                expected: self.samples.len(),
                got: other.samples.len(),
            });
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a.value - b.value).norm())
            .fold(0.0, f64::max))
    }
}

/// Reference value at the origin, for normalization checks.
pub fn origin_value(state: &TwoModeState) -> C64 {
    let n = state.cutoff().n_max();
    let id = linalg::identity(n);
    state.expect_local(&id, &id)
}
