//! Truncated two-mode Fock space: cutoffs, states, ladder operators,
//! expectations, partial traces and fidelity.
//!
//! Basis `|j,k⟩` (mode a holds `j`, mode b holds `k`) sits at index
//! `j * n_max + k`. Quadratures use `x = (a + a†)/√2`, `p = (a − a†)/(i√2)`,
//! so `[x, p] = i` and the vacuum has `Var(x) = 1/2`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, CMat, CVec, I, ONE, ZERO};
use crate::{Error, Result, C64};

/// Largest per-mode dimension the truncation rule may choose on its own.
pub const DEFAULT_CUTOFF_CAP: usize = 40;
/// Levels at the top of each mode counted as leakage by default.
pub const DEFAULT_MARGIN: usize = 2;
/// Poisson tail allowed beyond the leakage margin when building inputs.
pub const INPUT_TAIL_BOUND: f64 = 1e-12;

const STATE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockCutoff {
    n_max: usize,
    margin: usize,
}

impl FockCutoff {
    pub fn new(n_max: usize, margin: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidCutoff(format!("n_max = {n_max} must be >= 2")));
        }
        if margin >= n_max {
            return Err(Error::InvalidCutoff(format!(
                "margin = {margin} must be < n_max = {n_max}"
            )));
        }
        Ok(Self { n_max, margin })
    }

    /// Cutoff for `|α⟩ ⊗ |n⟩`: `n + ceil(|α|² + 8|α|) + 10`, limited by `cap`.
    pub fn for_input(alpha: C64, n: usize, cap: usize, margin: usize) -> Result<Self> {
        let a = alpha.norm();
        let rule = n + (a * a + 8.0 * a).ceil() as usize + 10;
        Self::new(rule.min(cap).max(margin + 2), margin)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Two-mode Hilbert space dimension `n_max²`.
    pub fn dim(&self) -> usize {
        self.n_max * self.n_max
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_max + k
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_max, idx % self.n_max)
    }

    /// Whether `|j,k⟩` lies in the leakage band near the cutoff.
    pub fn is_edge(&self, j: usize, k: usize) -> bool {
        let edge = self.n_max - self.margin;
        j >= edge || k >= edge
    }

    /// Total photon number bound below which truncated ladder identities
    /// hold exactly.
    pub fn safe_total(&self) -> usize {
        self.n_max - 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
}

#[derive(Clone, Debug)]
enum Repr {
    Pure(CVec),
    Mixed(CMat),
}

/// Pure or mixed state on the truncated two-mode space.
#[derive(Clone, Debug)]
pub struct TwoModeState {
    repr: Repr,
    cutoff: FockCutoff,
}

impl TwoModeState {
    pub fn pure(psi: CVec, cutoff: FockCutoff) -> Result<Self> {
        check_dim(cutoff.dim(), psi.len())?;
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {norm} != 1")));
        }
        Ok(Self::from_pure_unchecked(psi, cutoff))
    }

    pub fn mixed(rho: CMat, cutoff: FockCutoff) -> Result<Self> {
        check_dim(cutoff.dim(), rho.nrows())?;
        validate_density(&rho)?;
        Ok(Self::from_density_unchecked(rho, cutoff))
    }

    pub(crate) fn from_pure_unchecked(psi: CVec, cutoff: FockCutoff) -> Self {
        Self {
            repr: Repr::Pure(psi),
            cutoff,
        }
    }

    pub(crate) fn from_density_unchecked(rho: CMat, cutoff: FockCutoff) -> Self {
        Self {
            repr: Repr::Mixed(rho),
            cutoff,
        }
    }

    /// `|ψ_a⟩ ⊗ |ψ_b⟩` from single-mode amplitude vectors of length `n_max`.
    pub fn product(psi_a: &CVec, psi_b: &CVec, cutoff: FockCutoff) -> Result<Self> {
        check_dim(cutoff.n_max(), psi_a.len())?;
        check_dim(cutoff.n_max(), psi_b.len())?;
        let n = cutoff.n_max();
        let psi = CVec::from_fn(n * n, |i, _| psi_a[i / n] * psi_b[i % n]);
        Self::pure(psi, cutoff)
    }

    /// Basis state `|j,k⟩`.
    pub fn basis(j: usize, k: usize, cutoff: FockCutoff) -> Result<Self> {
        if j >= cutoff.n_max() || k >= cutoff.n_max() {
            return Err(Error::InvalidState(format!(
                "|{j},{k}> outside cutoff {}",
                cutoff.n_max()
            )));
        }
        let mut psi = CVec::zeros(cutoff.dim());
        psi[cutoff.index(j, k)] = ONE;
        Ok(Self::from_pure_unchecked(psi, cutoff))
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.dim()
    }

    pub fn as_pure(&self) -> Option<&CVec> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn density(&self) -> CMat {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Mixed(m) => m.clone(),
        }
    }

    pub(crate) fn into_density(self) -> CMat {
        match self.repr {
            Repr::Pure(v) => &v * v.adjoint(),
            Repr::Mixed(m) => m,
        }
    }

    /// Diagonal of the density matrix in the Fock basis.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            Repr::Mixed(m) => m.diagonal().iter().map(|z| z.re).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    /// Probability carried by basis states in the cutoff margin band.
    pub fn leakage(&self) -> f64 {
        self.probabilities()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (j, k) = self.cutoff.split(*i);
                self.cutoff.is_edge(j, k)
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// `U ρ U†` (or `U|ψ⟩`) for a sector-structured unitary.
    pub fn transformed(&self, u: &linalg::SectorUnitary) -> Self {
        let repr = match &self.repr {
            Repr::Pure(v) => Repr::Pure(u.apply(v)),
            Repr::Mixed(m) => Repr::Mixed(u.conjugate(m)),
        };
        Self {
            repr,
            cutoff: self.cutoff,
        }
    }

    /// `⟨ψ|(A ⊗ B)|ψ⟩` or `Tr(ρ (A ⊗ B))` for single-mode factors.
    pub fn expect_local(&self, op_a: &CMat, op_b: &CMat) -> C64 {
        match &self.repr {
            Repr::Pure(v) => linalg::kron_sandwich(v, op_a, op_b),
            Repr::Mixed(m) => linalg::kron_trace(m, op_a, op_b),
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Checks Hermiticity, unit trace and positivity of a density matrix.
pub fn validate_density(rho: &CMat) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            got: rho.ncols(),
        });
    }
    let defect = linalg::hermiticity_defect(rho);
    if defect > STATE_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let tr = linalg::trace(rho).re;
    if (tr - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let min = linalg::hermitian_eigenvalues(&linalg::hermitize(rho))
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(())
}

/// Single-mode annihilation operator on `0..n`.
pub fn annihilation(n: usize) -> CMat {
    let mut a = CMat::zeros(n, n);
    for j in 1..n {
        a[(j - 1, j)] = c((j as f64).sqrt());
    }
    a
}

pub fn number(n: usize) -> CMat {
    CMat::from_diagonal(&CVec::from_fn(n, |j, _| c(j as f64)))
}

/// `|m⟩` as a length-`n` vector.
pub fn fock_vector(m: usize, n: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[m] = ONE;
    v
}

/// Coherent-state Fock amplitudes `e^{-|α|²/2} α^j / √j!` for `j < len`,
/// without renormalization.
pub fn coherent_amplitudes(alpha: C64, len: usize) -> CVec {
    let mut out = CVec::zeros(len);
    let mut term = c((-0.5 * alpha.norm_sqr()).exp());
    for j in 0..len {
        out[j] = term;
        term = term * alpha / c(((j + 1) as f64).sqrt());
    }
    out
}

/// Truncated and renormalized `|α⟩`.
pub fn coherent_vector(alpha: C64, len: usize) -> CVec {
    let v = coherent_amplitudes(alpha, len);
    let norm = v.norm();
    v / c(norm)
}

/// `P(N >= k)` for `N ~ Poisson(mean)`.
pub fn poisson_tail(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    // log p_k = k ln(mean) − mean − ln k!
    let mut log_p = -mean;
    for j in 1..=k {
        log_p += mean.ln() - (j as f64).ln();
    }
    let mut p = log_p.exp();
    let mut sum = 0.0;
    let mut j = k;
    while p > 0.0 && (p > sum * 1e-18 || (j as f64) < mean) {
        sum += p;
        j += 1;
        p *= mean / j as f64;
        if j > k + 10_000 {
            break;
        }
    }
    sum
}

/// `|α⟩_a ⊗ |n⟩_b`, truncated to `cutoff` and renormalized.
pub fn build_input_state(alpha: C64, n: usize, cutoff: FockCutoff) -> Result<TwoModeState> {
    let usable = cutoff.n_max() - cutoff.margin();
    if n >= usable {
        return Err(Error::CutoffTooSmall(format!(
            "Fock number {n} reaches the cutoff margin (n_max {} - margin {})",
            cutoff.n_max(),
            cutoff.margin()
        )));
    }
    let tail = poisson_tail(alpha.norm_sqr(), usable);
    if tail > INPUT_TAIL_BOUND {
        return Err(Error::CutoffTooSmall(format!(
            "coherent tail {tail:.3e} beyond level {usable} exceeds {INPUT_TAIL_BOUND:e}"
        )));
    }
    let n_max = cutoff.n_max();
    TwoModeState::product(&coherent_vector(alpha, n_max), &fock_vector(n, n_max), cutoff)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModeLabel {
    A,
    ADag,
    B,
    BDag,
    NA,
    NB,
    XA,
    PA,
    XB,
    PB,
    Custom(String),
}

/// Operator on the two-mode space, optionally tensored with `atoms` two-level
/// systems (field index major, atom bits minor).
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub matrix: CMat,
    pub label: ModeLabel,
    pub cutoff: FockCutoff,
    pub atoms: usize,
}

impl ModeOperator {
    pub fn custom(matrix: CMat, cutoff: FockCutoff, name: &str) -> Result<Self> {
        check_dim(cutoff.dim(), matrix.nrows())?;
        check_dim(cutoff.dim(), matrix.ncols())?;
        Ok(Self {
            matrix,
            label: ModeLabel::Custom(name.to_string()),
            cutoff,
            atoms: 0,
        })
    }

    pub(crate) fn joint(matrix: CMat, cutoff: FockCutoff, atoms: usize, name: &str) -> Self {
        debug_assert_eq!(matrix.nrows(), cutoff.dim() << atoms);
        Self {
            matrix,
            label: ModeLabel::Custom(name.to_string()),
            cutoff,
            atoms,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        let label = match &self.label {
            ModeLabel::A => ModeLabel::ADag,
            ModeLabel::ADag => ModeLabel::A,
            ModeLabel::B => ModeLabel::BDag,
            ModeLabel::BDag => ModeLabel::B,
            ModeLabel::Custom(s) => ModeLabel::Custom(format!("{s}^dag")),
            other => other.clone(),
        };
        Self {
            matrix: self.matrix.adjoint(),
            label,
            cutoff: self.cutoff,
            atoms: self.atoms,
        }
    }

    /// `self ⊗ 1` over `atoms` additional two-level systems.
    pub fn with_atoms(&self, atoms: usize) -> Self {
        let extra = 1usize << atoms;
        Self {
            matrix: linalg::kron(&self.matrix, &linalg::identity(extra)),
            label: self.label.clone(),
            cutoff: self.cutoff,
            atoms: self.atoms + atoms,
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermiticity_defect(&self.matrix) <= tol
    }

    /// Basis indices whose field part has total photon number within
    /// [`FockCutoff::safe_total`].
    pub fn safe_indices(&self) -> Vec<usize> {
        let safe = self.cutoff.safe_total();
        (0..self.dim())
            .filter(|&i| {
                let (j, k) = self.cutoff.split(i >> self.atoms);
                j + k <= safe
            })
            .collect()
    }
}

/// Single-mode matrix for a label, or `None` for custom labels.
pub fn single_mode_factor(label: &ModeLabel, n: usize) -> Option<(Mode, CMat)> {
    let a = annihilation(n);
    let s = c(1.0 / SQRT_2);
    let factor = match label {
        ModeLabel::A | ModeLabel::B => a,
        ModeLabel::ADag | ModeLabel::BDag => a.adjoint(),
        ModeLabel::NA | ModeLabel::NB => number(n),
        ModeLabel::XA | ModeLabel::XB => (&a + a.adjoint()) * s,
        ModeLabel::PA | ModeLabel::PB => (&a - a.adjoint()) * (s / I),
        ModeLabel::Custom(_) => return None,
    };
    let mode = match label {
        ModeLabel::A | ModeLabel::ADag | ModeLabel::NA | ModeLabel::XA | ModeLabel::PA => Mode::A,
        _ => Mode::B,
    };
    Some((mode, factor))
}

pub fn mode_operator(label: ModeLabel, cutoff: FockCutoff) -> Result<ModeOperator> {
    let n = cutoff.n_max();
    let (mode, factor) = single_mode_factor(&label, n)
        .ok_or_else(|| Error::InvalidParameter("custom operators are built with ModeOperator::custom".into()))?;
    let id = linalg::identity(n);
    let matrix = match mode {
        Mode::A => linalg::kron(&factor, &id),
        Mode::B => linalg::kron(&id, &factor),
    };
    Ok(ModeOperator {
        matrix,
        label,
        cutoff,
        atoms: 0,
    })
}

pub fn expectation(state: &TwoModeState, op: &ModeOperator) -> Result<C64> {
    check_dim(state.dim(), op.dim())?;
    Ok(match &state.repr {
        Repr::Pure(v) => v.dotc(&(&op.matrix * v)),
        Repr::Mixed(m) => {
            let mut s = ZERO;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    s += m[(i, j)] * op.matrix[(j, i)];
                }
            }
            s
        }
    })
}

/// Partial trace over the other mode.
pub fn reduced_mode_state(state: &TwoModeState, mode: Mode) -> CMat {
    let n = state.cutoff.n_max();
    let mut out = CMat::zeros(n, n);
    match &state.repr {
        Repr::Pure(v) => {
            let psi = CMat::from_fn(n, n, |j, k| v[j * n + k]);
            match mode {
                Mode::A => out = &psi * psi.adjoint(),
                Mode::B => out = (psi.adjoint() * &psi).transpose(),
            }
        }
        Repr::Mixed(m) => {
            for x in 0..n {
                for y in 0..n {
                    let mut s = ZERO;
                    for t in 0..n {
                        s += match mode {
                            Mode::A => m[(x * n + t, y * n + t)],
                            Mode::B => m[(t * n + x, t * n + y)],
                        };
                    }
                    out[(x, y)] = s;
                }
            }
        }
    }
    out
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_with_pure(rho: &CMat, psi: &CVec) -> f64 {
    psi.dotc(&(rho * psi)).re.clamp(0.0, 1.0)
}

/// Uhlmann fidelity in the squared convention, `(Tr √(√ρ σ √ρ))²`; equals
/// `⟨ψ|ρ|ψ⟩` when `σ = |ψ⟩⟨ψ|`.
pub fn fidelity(rho: &CMat, sigma: &CMat) -> Result<f64> {
    check_dim(rho.nrows(), sigma.nrows())?;
    for m in [rho, sigma] {
        let defect = linalg::hermiticity_defect(m);
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
    }
    let (vals, vecs) = linalg::hermitian_eigen(&linalg::hermitize(rho));
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    let root = CMat::from_fn(vecs.nrows(), vecs.ncols(), |i, j| {
        vecs[(i, j)] * vals[j].max(0.0).sqrt()
    }) * vecs.adjoint();
    let inner = linalg::hermitize(&(&root * sigma * &root));
    let inner_vals = linalg::hermitian_eigenvalues(&inner);
    if let Some(m) = inner_vals.iter().cloned().reduce(f64::min) {
        if m < -PSD_TOL {
            return Err(Error::NotPositive(m));
        }
    }
    let f: f64 = inner_vals.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((f * f).clamp(0.0, 1.0))
}
