//! The absorbing medium in three interchangeable forms.
//!
//! - [`collective_damping`]: atoms eliminated, the collective mode `r` goes
//!   through an amplitude-damping channel with amplitude transmissivity
//!   `q = exp(−Mz)`.
//! - [`lindblad_evolve`]: the same elimination written as a field master
//!   equation `dρ/dt = κ(LρL† − ½{L†L, ρ})`, integrated with fixed-step RK4.
//!   With `L = r`, `κT = 2Mz` reproduces the analytic channel.
//! - [`microscopic_evolve`]: one to three explicit two-level atoms coupled
//!   through `V = i(S₁₀(g·a + f·b) − S₀₁(g·a + f·b)†)`, with optional atomic
//!   decay standing in for the thermostat.

use serde::{Deserialize, Serialize};

use crate::fock::{self, FockCutoff, Mode, ModeOperator, TwoModeState};
use crate::linalg::{self, c, CMat, CVec, RowSparse, SectorUnitary, I, ONE, ZERO};
use crate::transforms::{self, SchemeParams};
use crate::{Error, Result, C64};

/// Default bound on probability in the cutoff margin after a rotation.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;
/// Trace drift that aborts an integration.
pub const TRACE_DRIFT_ABORT: f64 = 1e-6;
/// Largest field cutoff accepted by the few-atom model.
pub const MICRO_MAX_CUTOFF: usize = 12;
pub const MICRO_MAX_ATOMS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorberParams {
    /// Absorption coefficient `R = g²N/γ` (inverse length).
    pub r_coef: f64,
    /// Lower-level occupation `N`.
    pub n_occ: f64,
    /// Transversal decay rate `γ`.
    pub gamma: f64,
    /// Propagation length.
    pub z: f64,
    /// Propagation velocity; time in the medium is `z / v`.
    pub v: f64,
    /// `M = R·c²·(1 + (f/g)²)`.
    pub decay: f64,
    /// `q = exp(−M·z)`.
    pub transmissivity: f64,
}

impl AbsorberParams {
    /// From the microscopic quantities, `R = g²N/γ`.
    pub fn from_atoms(n_occ: f64, gamma: f64, z: f64, v: f64, scheme: &SchemeParams) -> Result<Self> {
        if !(n_occ >= 0.0) || !(gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need N_occ >= 0 and gamma > 0 (got {n_occ}, {gamma})"
            )));
        }
        let r_coef = scheme.g * scheme.g * n_occ / gamma;
        Self::build(r_coef, n_occ, gamma, z, v, scheme)
    }

    /// From the absorption coefficient; `γ = 1` and `N` follows from `R`.
    pub fn from_coefficient(r_coef: f64, z: f64, v: f64, scheme: &SchemeParams) -> Result<Self> {
        let gamma = 1.0;
        let n_occ = if scheme.g != 0.0 {
            r_coef * gamma / (scheme.g * scheme.g)
        } else {
            0.0
        };
        Self::build(r_coef, n_occ, gamma, z, v, scheme)
    }

    /// Medium of unit length and unit velocity with `M·z = mz`.
    pub fn from_optical_depth(mz: f64, scheme: &SchemeParams) -> Result<Self> {
        let k = geometry_factor(scheme)?;
        let r_coef = if k > 0.0 { mz / k } else { 0.0 };
        Self::from_coefficient(r_coef, 1.0, 1.0, scheme)
    }

    fn build(r_coef: f64, n_occ: f64, gamma: f64, z: f64, v: f64, scheme: &SchemeParams) -> Result<Self> {
        if !(r_coef >= 0.0) || !(z >= 0.0) || !(v > 0.0) || !r_coef.is_finite() || !z.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need R >= 0, z >= 0, v > 0 (got {r_coef}, {z}, {v})"
            )));
        }
        let decay = r_coef * geometry_factor(scheme)?;
        let transmissivity = (-decay * z).exp();
        if !(transmissivity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transmissivity underflows (Mz = {})",
                decay * z
            )));
        }
        Ok(Self {
            r_coef,
            n_occ,
            gamma,
            z,
            v,
            decay,
            transmissivity,
        })
    }

    pub fn optical_depth(&self) -> f64 {
        self.decay * self.z
    }

    /// Time spent in the medium.
    pub fn duration(&self) -> f64 {
        self.z / self.v
    }

    /// Lindblad rate for jump `r` over `duration`: `κT = 2Mz`.
    pub fn lindblad_rate(&self, duration: f64) -> f64 {
        if duration == 0.0 {
            0.0
        } else {
            2.0 * self.optical_depth() / duration
        }
    }
}

/// `c²·(1 + (f/g)²)`, taking the `g → 0` limit for the matched `c = 0`.
fn geometry_factor(scheme: &SchemeParams) -> Result<f64> {
    if scheme.g != 0.0 {
        let ratio = scheme.f / scheme.g;
        Ok(scheme.c * scheme.c * (1.0 + ratio * ratio))
    } else if scheme.c.abs() < 1e-12 {
        Ok(1.0)
    } else {
        Err(Error::InvalidParameter("g = 0 with c != 0 gives unbounded M".into()))
    }
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for l in 0..=n {
        t[l][0] = 1.0;
        for m in 1..=l {
            t[l][m] = t[l - 1][m - 1] + if m < l { t[l - 1][m] } else { 0.0 };
        }
    }
    t
}

/// Weights `√(C(x+m,m)·C(y+m,m))·q^{x+y}·(1−q²)^m` of the amplitude-damping
/// map `ρ'[x,y] = Σ_m w·ρ[x+m, y+m]`.
struct DampingWeights {
    n: usize,
    w: Vec<f64>,
}

impl DampingWeights {
    fn new(n: usize, q: f64) -> Self {
        let binom = binomial_table(n);
        let loss = 1.0 - q * q;
        let mut w = vec![0.0; n * n * n];
        for x in 0..n {
            for y in 0..n {
                let base = q.powi((x + y) as i32);
                for m in 0..n - x.max(y) {
                    w[(x * n + y) * n + m] = (binom[x + m][m] * binom[y + m][m]).sqrt() * base * loss.powi(m as i32);
                }
            }
        }
        Self { n, w }
    }

    #[inline]
    fn get(&self, x: usize, y: usize, m: usize) -> f64 {
        self.w[(x * self.n + y) * self.n + m]
    }
}

fn check_transmissivity(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("q = {q} outside [0, 1]")));
    }
    Ok(())
}

/// Amplitude damping of a single-mode density matrix; `⟨a⟩` scales by `q`,
/// `⟨n⟩` by `q²`.
pub fn damp_single_mode(rho: &CMat, q: f64) -> Result<CMat> {
    check_transmissivity(q)?;
    let n = rho.nrows();
    let w = DampingWeights::new(n, q);
    Ok(CMat::from_fn(n, n, |x, y| {
        (0..n - x.max(y)).map(|m| rho[(x + m, y + m)] * w.get(x, y, m)).sum()
    }))
}

/// Amplitude damping of one mode of a two-mode density matrix.
pub fn damp_mode(rho: &CMat, mode: Mode, q: f64, cutoff: FockCutoff) -> Result<CMat> {
    check_transmissivity(q)?;
    let n = cutoff.n_max();
    let w = DampingWeights::new(n, q);
    let mut out = CMat::zeros(rho.nrows(), rho.ncols());
    let idx = |damped: usize, other: usize| match mode {
        Mode::A => damped * n + other,
        Mode::B => other * n + damped,
    };
    for y in 0..n {
        for kp in 0..n {
            let col = idx(y, kp);
            for x in 0..n {
                for k in 0..n {
                    let mut s = ZERO;
                    for m in 0..n - x.max(y) {
                        s += rho[(idx(x + m, k), idx(y + m, kp))] * w.get(x, y, m);
                    }
                    out[(idx(x, k), col)] = s;
                }
            }
        }
    }
    Ok(out)
}

/// Damps the mode `W† a W` of `state`: rotate with `W`, damp mode a with
/// transmissivity `q`, rotate back.
pub fn damp_rotated_mode(
    state: &TwoModeState,
    rotation: &SectorUnitary,
    q: f64,
    leakage_threshold: f64,
) -> Result<TwoModeState> {
    let cutoff = state.cutoff();
    let rotated = state.transformed(rotation);
    let leakage = rotated.leakage();
    if leakage > leakage_threshold {
        return Err(Error::Leakage {
            leakage,
            threshold: leakage_threshold,
        });
    }
    let damped = damp_mode(&rotated.into_density(), Mode::A, q, cutoff)?;
    let back = rotation.adjoint().conjugate(&damped);
    Ok(TwoModeState::from_density_unchecked(back, cutoff))
}

/// Analytic channel: the collective mode `r = (g·a + f·b)/G` is attenuated
/// by `q = exp(−Mz)` and `τ` is left alone.
pub fn collective_damping(
    state: &TwoModeState,
    scheme: &SchemeParams,
    absorber: &AbsorberParams,
) -> Result<TwoModeState> {
    let matched = SchemeParams::matched(scheme.g, scheme.f)?;
    let rotation = transforms::beamsplitter_unitary(matched.theta, state.cutoff());
    damp_rotated_mode(state, &rotation, absorber.transmissivity, LEAKAGE_THRESHOLD)
}

/// Lindblad generator with an optional Hamiltonian part, applied through the
/// nonzero pattern of each operator.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    hamiltonian: Option<RowSparse>,
    jumps: Vec<(f64, RowSparse, RowSparse)>,
}

impl Liouvillian {
    pub fn new(hamiltonian: Option<&CMat>) -> Self {
        Self {
            hamiltonian: hamiltonian.map(RowSparse::from_dense),
            jumps: Vec::new(),
        }
    }

    pub fn with_jump(mut self, rate: f64, jump: &CMat) -> Self {
        if rate != 0.0 {
            let l = RowSparse::from_dense(jump);
            let ll = l.adjoint().mul_sparse(&l);
            self.jumps.push((rate, l, ll));
        }
        self
    }

    /// `dρ/dt`.
    pub fn rhs(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        if let Some(h) = &self.hamiltonian {
            h.mul_dense_acc(rho, -I, &mut out);
            h.mul_adjoint_right_acc(rho, I, &mut out);
        }
        for (rate, l, ll) in &self.jumps {
            let lr = l.mul_dense(rho);
            l.mul_adjoint_right_acc(&lr, c(*rate), &mut out);
            ll.mul_dense_acc(rho, c(-0.5 * rate), &mut out);
            ll.mul_adjoint_right_acc(rho, c(-0.5 * rate), &mut out);
        }
        out
    }

    /// Fixed-step RK4 over `duration`; the step is `duration / ceil(duration/dt)`.
    pub fn integrate(&self, rho: &CMat, duration: f64, dt: f64) -> Result<CMat> {
        if !(dt > 0.0) || !(duration >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and duration >= 0 (got {dt}, {duration})"
            )));
        }
        let steps = (duration / dt).ceil() as usize;
        if steps == 0 {
            return Ok(rho.clone());
        }
        let h = duration / steps as f64;
        let tr0 = linalg::trace(rho).re;
        let mut state = rho.clone();
        for step in 0..steps {
            let k1 = self.rhs(&state);
            let k2 = self.rhs(&(&state + &k1 * c(0.5 * h)));
            let k3 = self.rhs(&(&state + &k2 * c(0.5 * h)));
            let k4 = self.rhs(&(&state + &k3 * c(h)));
            state += (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0);
            let drift = (linalg::trace(&state).re - tr0).abs();
            if !drift.is_finite() || drift > TRACE_DRIFT_ABORT {
                return Err(Error::Unstable(format!(
                    "trace drift {drift:.3e} after step {} of {steps} (dt = {h})",
                    step + 1
                )));
            }
        }
        Ok(linalg::hermitize(&state))
    }
}

/// Integrates `dρ/dt = κ(LρL† − ½L†Lρ − ½ρL†L)`.
pub fn lindblad_evolve(
    state: &TwoModeState,
    jump: &ModeOperator,
    kappa: f64,
    duration: f64,
    dt: f64,
) -> Result<TwoModeState> {
    if jump.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: jump.dim(),
        });
    }
    if !(kappa >= 0.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} < 0")));
    }
    let generator = Liouvillian::new(None).with_jump(kappa, &jump.matrix);
    let rho = generator.integrate(&state.density(), duration, dt)?;
    Ok(TwoModeState::from_density_unchecked(rho, state.cutoff()))
}

/// Few-atom absorber.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicroModel {
    pub atom_count: usize,
    pub g: f64,
    pub f: f64,
    /// Atomic decay rate (thermostat stand-in); 0 gives unitary evolution.
    pub relaxation: f64,
    pub duration: f64,
    /// RK4 step, used only when `relaxation > 0`.
    pub dt: f64,
}

impl MicroModel {
    pub fn validate(&self, cutoff: FockCutoff) -> Result<()> {
        if !(1..=MICRO_MAX_ATOMS).contains(&self.atom_count) {
            return Err(Error::Budget(format!(
                "atom_count = {} not in 1..={MICRO_MAX_ATOMS}",
                self.atom_count
            )));
        }
        if cutoff.n_max() > MICRO_MAX_CUTOFF {
            return Err(Error::Budget(format!(
                "n_max = {} exceeds {MICRO_MAX_CUTOFF} for the atomic model",
                cutoff.n_max()
            )));
        }
        if !(self.relaxation >= 0.0) || !(self.duration >= 0.0) || !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need relaxation >= 0, duration >= 0, dt > 0 (got {}, {}, {})",
                self.relaxation, self.duration, self.dt
            )));
        }
        Ok(())
    }
}

/// Single-atom operator `|x⟩⟨y|` on atom `m` of `atoms`.
fn atomic_op(x: usize, y: usize, m: usize, atoms: usize) -> CMat {
    let mut s = CMat::zeros(2, 2);
    s[(x, y)] = ONE;
    let left = linalg::identity(1 << m);
    let right = linalg::identity(1 << (atoms - m - 1));
    linalg::kron(&linalg::kron(&left, &s), &right)
}

/// Collective atomic operator `S_xy = Σ_m |x⟩_m⟨y|`.
fn collective_atomic(x: usize, y: usize, atoms: usize) -> CMat {
    (0..atoms).fold(CMat::zeros(1 << atoms, 1 << atoms), |acc, m| {
        acc + atomic_op(x, y, m, atoms)
    })
}

/// `V = i(S₁₀(g·a + f·b) − S₀₁(g·a + f·b)†)` on field ⊗ atoms (ħ = 1,
/// interaction picture).
pub fn interaction_hamiltonian(g: f64, f: f64, atoms: usize, cutoff: FockCutoff) -> Result<ModeOperator> {
    if atoms == 0 {
        return Err(Error::InvalidParameter("need at least one atom".into()));
    }
    let n = cutoff.n_max();
    let a = fock::annihilation(n);
    let id = linalg::identity(n);
    let field = linalg::kron(&a, &id) * c(g) + linalg::kron(&id, &a) * c(f);
    let raise = linalg::kron(&field, &collective_atomic(1, 0, atoms));
    let v = (&raise - raise.adjoint()) * I;
    Ok(ModeOperator::joint(v, cutoff, atoms, "V"))
}

/// State of the field together with `atoms` two-level atoms.
#[derive(Clone, Debug)]
pub struct JointState {
    cutoff: FockCutoff,
    atoms: usize,
    pure: Option<CVec>,
    rho: Option<CMat>,
}

impl JointState {
    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn density(&self) -> CMat {
        match (&self.pure, &self.rho) {
            (Some(v), _) => v * v.adjoint(),
            (None, Some(m)) => m.clone(),
            _ => unreachable!(),
        }
    }

    /// Expectation of an operator on the joint space.
    pub fn expect(&self, op: &CMat) -> C64 {
        match (&self.pure, &self.rho) {
            (Some(v), _) => v.dotc(&(op * v)),
            (None, Some(m)) => RowSparse::from_dense(op).trace_with(m),
            _ => unreachable!(),
        }
    }

    /// Total atomic excitation `⟨Σ_m |1⟩_m⟨1|⟩`.
    pub fn excitation(&self) -> f64 {
        let n_exc = collective_atomic(1, 1, self.atoms);
        let op = linalg::kron(&linalg::identity(self.cutoff.dim()), &n_exc);
        self.expect(&op).re
    }

    /// Field marginal, tracing out the atoms.
    pub fn field_state(&self) -> TwoModeState {
        let rho = self.density();
        let k = 1usize << self.atoms;
        let d = self.cutoff.dim();
        let reduced = CMat::from_fn(d, d, |i, j| (0..k).map(|s| rho[(i * k + s, j * k + s)]).sum());
        TwoModeState::from_density_unchecked(reduced, self.cutoff)
    }
}

fn with_ground_atoms(state: &TwoModeState, atoms: usize) -> (Option<CVec>, Option<CMat>) {
    let k = 1usize << atoms;
    match state.as_pure() {
        Some(v) => {
            let mut out = CVec::zeros(v.len() * k);
            for (i, z) in v.iter().enumerate() {
                out[i * k] = *z;
            }
            (Some(out), None)
        }
        None => {
            let rho = state.density();
            let d = rho.nrows();
            let mut out = CMat::zeros(d * k, d * k);
            for i in 0..d {
                for j in 0..d {
                    out[(i * k, j * k)] = rho[(i, j)];
                }
            }
            (None, Some(out))
        }
    }
}

/// Joint states at each of `times` (sorted ascending), atoms starting in `|0⟩`.
pub fn microscopic_trajectory(state: &TwoModeState, model: &MicroModel, times: &[f64]) -> Result<Vec<JointState>> {
    let cutoff = state.cutoff();
    model.validate(cutoff)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("sample times must be sorted and >= 0".into()));
    }
    let atoms = model.atom_count;
    let v = interaction_hamiltonian(model.g, model.f, atoms, cutoff)?.matrix;
    let (pure0, rho0) = with_ground_atoms(state, atoms);
    let wrap = |pure: Option<CVec>, rho: Option<CMat>| JointState {
        cutoff,
        atoms,
        pure,
        rho,
    };

    if model.relaxation == 0.0 {
        let prop = linalg::SpectralPropagator::new(&v);
        return Ok(times
            .iter()
            .map(|&t| {
                let u = prop.at(t);
                match (&pure0, &rho0) {
                    (Some(p), _) => wrap(Some(u.apply(p)), None),
                    (None, Some(r)) => wrap(None, Some(u.conjugate(r))),
                    _ => unreachable!(),
                }
            })
            .collect());
    }

    let generator = (0..atoms).fold(Liouvillian::new(Some(&v)), |l, m| {
        let jump = linalg::kron(&linalg::identity(cutoff.dim()), &atomic_op(0, 1, m, atoms));
        l.with_jump(model.relaxation, &jump)
    });
    let mut rho = match (pure0, rho0) {
        (Some(p), _) => &p * p.adjoint(),
        (None, Some(r)) => r,
        _ => unreachable!(),
    };
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        rho = generator.integrate(&rho, t - now, model.dt)?;
        now = t;
        out.push(wrap(None, Some(rho.clone())));
    }
    Ok(out)
}

/// Evolves `state ⊗ |0…0⟩_atoms` for `model.duration`.
pub fn microscopic_evolve(state: &TwoModeState, model: &MicroModel) -> Result<JointState> {
    Ok(microscopic_trajectory(state, model, &[model.duration])?
        .pop()
        .expect("one sample"))
}
