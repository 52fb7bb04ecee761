//! Beamsplitter → absorber → beamsplitter, the unprotected control, and the
//! phase-rotated (Raman / two-photon) variant.
//!
//! The scheme angle `θ` fixes `W = U(θ)` with `W† a W = r`. Light meets `W†`
//! first, so the absorber sees `r` in mode a and `τ` in mode b; `W` behind
//! the absorber restores the input ports.

use serde::{Deserialize, Serialize};

use crate::absorber::{self, AbsorberParams, LEAKAGE_THRESHOLD};
use crate::fock::{self, build_input_state, FockCutoff, Mode, TwoModeState, DEFAULT_CUTOFF_CAP, DEFAULT_MARGIN};
use crate::linalg::{self, CMat, SectorUnitary};
use crate::stats::{compute_stats, StatsReport};
use crate::transforms::{self, beamsplitter_unitary, FrequencySpec, SchemeParams};
use crate::{Error, Result, C64};

/// Lindblad evolution time in the pipeline; the rate is `κ = 2Mz / T`.
pub const LINDBLAD_TIME: f64 = 1.0;
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AbsorberModel {
    Analytic,
    Lindblad { dt: f64 },
}

/// Orientation of the element behind the absorber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondBeamsplitter {
    /// `W`, undoing the first element.
    Inverse,
    /// `W†` again, a second copy of the first element.
    Repeat,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelOptions {
    pub cutoff_cap: usize,
    pub margin: usize,
    /// Overrides the truncation rule when set.
    pub n_max: Option<usize>,
    pub leakage_threshold: f64,
    pub second_bs: SecondBeamsplitter,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self {
            cutoff_cap: DEFAULT_CUTOFF_CAP,
            margin: DEFAULT_MARGIN,
            n_max: None,
            leakage_threshold: LEAKAGE_THRESHOLD,
            second_bs: SecondBeamsplitter::Inverse,
        }
    }
}

impl ChannelOptions {
    pub fn cutoff_for(&self, alpha: C64, n: usize) -> Result<FockCutoff> {
        match self.n_max {
            Some(n_max) => FockCutoff::new(n_max, self.margin),
            None => FockCutoff::for_input(alpha, n, self.cutoff_cap, self.margin),
        }
    }
}

/// Parameters a report was produced with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub alpha: C64,
    pub n: usize,
    pub scheme: Option<SchemeParams>,
    pub absorber: AbsorberParams,
    pub model: AbsorberModel,
    pub freq: Option<FrequencySpec>,
    pub n_max: usize,
    pub second_bs: SecondBeamsplitter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    /// `⟨n|ρ_b|n⟩` for the output mode-b reduced state.
    pub fidelity_b: f64,
    pub amplitude_a_out: C64,
    /// `q·α`.
    pub expected_amplitude: C64,
    pub mean_photons_a: f64,
    pub mean_photons_b: f64,
    pub transmissivity: f64,
    /// Largest probability in the cutoff margin over all stages.
    pub leakage: f64,
    /// Statistics of the state entering the absorber.
    pub stats: Option<StatsReport>,
    pub params: RunParams,
}

impl ChannelReport {
    /// Largest difference over the numeric fields.
    pub fn max_difference(&self, other: &ChannelReport) -> f64 {
        let mut d = [
            (self.fidelity_b - other.fidelity_b).abs(),
            (self.amplitude_a_out - other.amplitude_a_out).norm(),
            (self.mean_photons_a - other.mean_photons_a).abs(),
            (self.mean_photons_b - other.mean_photons_b).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if let (Some(x), Some(y)) = (&self.stats, &other.stats) {
            for (p, q) in [
                (x.mean_a, y.mean_a),
                (x.mean_b, y.mean_b),
                (x.mandel_a, y.mandel_a),
                (x.mandel_b, y.mandel_b),
                (x.covariance, y.covariance),
                (x.sum_variance, y.sum_variance),
                (x.diff_variance, y.diff_variance),
                (x.min_quadrature_variance, y.min_quadrature_variance),
                (x.separability, y.separability),
            ] {
                d = d.max((p - q).abs());
            }
        }
        d
    }
}

/// The optical elements of one run, all expressed in the simulation frame.
struct Elements {
    first: SectorUnitary,
    /// `V` with `V† a V` the damped mode.
    absorber_rotation: SectorUnitary,
    second: SectorUnitary,
}

impl Elements {
    fn resonant(scheme: &SchemeParams, second_bs: SecondBeamsplitter, cutoff: FockCutoff) -> Result<Self> {
        let w = beamsplitter_unitary(scheme.theta, cutoff);
        let matched = SchemeParams::matched(scheme.g, scheme.f)?;
        let absorber_rotation = beamsplitter_unitary(matched.theta, cutoff);
        let second = match second_bs {
            SecondBeamsplitter::Inverse => w.clone(),
            SecondBeamsplitter::Repeat => w.adjoint(),
        };
        Ok(Self {
            first: w.adjoint(),
            absorber_rotation,
            second,
        })
    }

    /// Every element `X` replaced by `R† X R`.
    fn conjugated(&self, r: &SectorUnitary) -> Self {
        let rd = r.adjoint();
        let conj = |x: &SectorUnitary| rd.compose(x).compose(r);
        Self {
            first: conj(&self.first),
            absorber_rotation: conj(&self.absorber_rotation),
            second: conj(&self.second),
        }
    }
}

fn check_leakage(leakage: f64, threshold: f64) -> Result<()> {
    if leakage > threshold {
        return Err(Error::Leakage { leakage, threshold });
    }
    Ok(())
}

struct Propagated {
    mid: TwoModeState,
    absorbed: TwoModeState,
    out: TwoModeState,
    leakage: f64,
}

fn propagate(
    input: &TwoModeState,
    elements: &Elements,
    absorber: &AbsorberParams,
    model: AbsorberModel,
    threshold: f64,
) -> Result<Propagated> {
    let mid = input.transformed(&elements.first);
    let mut leakage = input.leakage().max(mid.leakage());
    check_leakage(leakage, threshold)?;
    let absorbed = match model {
        AbsorberModel::Analytic => {
            absorber::damp_rotated_mode(&mid, &elements.absorber_rotation, absorber.transmissivity, threshold)?
        }
        AbsorberModel::Lindblad { dt } => {
            let cutoff = mid.cutoff();
            let n = cutoff.n_max();
            let a = linalg::kron(&fock::annihilation(n), &linalg::identity(n));
            // V† a V
            let v = &elements.absorber_rotation;
            let mut jump: CMat = v.adjoint().left_mul(&v.adjoint().left_mul(&a.adjoint()).adjoint());
            // rotation round-off would otherwise fill every sector block
            jump.iter_mut()
                .filter(|x| x.norm() < 1e-14)
                .for_each(|x| *x = C64::new(0.0, 0.0));
            let jump = fock::ModeOperator::custom(jump, cutoff, "r")?;
            let kappa = absorber.lindblad_rate(LINDBLAD_TIME);
            absorber::lindblad_evolve(&mid, &jump, kappa, LINDBLAD_TIME, dt)?
        }
    };
    let out = absorbed.transformed(&elements.second);
    leakage = leakage.max(absorbed.leakage()).max(out.leakage());
    check_leakage(leakage, threshold)?;
    Ok(Propagated {
        mid,
        absorbed,
        out,
        leakage,
    })
}

fn report(prop: &Propagated, alpha: C64, n: usize, absorber: &AbsorberParams, params: RunParams) -> ChannelReport {
    let out = &prop.out;
    let cutoff = out.cutoff();
    let nm = cutoff.n_max();
    let rho_b = fock::reduced_mode_state(out, Mode::B);
    let a = fock::annihilation(nm);
    let num = fock::number(nm);
    let id = linalg::identity(nm);
    ChannelReport {
        fidelity_b: fock::fidelity_with_pure(&rho_b, &fock::fock_vector(n, nm)),
        amplitude_a_out: out.expect_local(&a, &id),
        expected_amplitude: alpha * absorber.transmissivity,
        mean_photons_a: out.expect_local(&num, &id).re,
        mean_photons_b: out.expect_local(&id, &num).re,
        transmissivity: absorber.transmissivity,
        leakage: prop.leakage,
        stats: Some(compute_stats(&prop.mid)),
        params,
    }
}

fn require_matched(scheme: &SchemeParams) -> Result<()> {
    scheme.validate()?;
    if !scheme.matched {
        return Err(Error::Unmatched(format!(
            "theta = {} but atan2(f, g) = {} (mod π)",
            scheme.theta,
            scheme.f.atan2(scheme.g)
        )));
    }
    Ok(())
}

fn check_model(model: AbsorberModel) -> Result<()> {
    if let AbsorberModel::Lindblad { dt } = model {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
        }
    }
    Ok(())
}

/// States at each stage of the protected channel.
#[derive(Clone, Debug)]
pub struct ChannelStates {
    pub input: TwoModeState,
    pub absorber_in: TwoModeState,
    pub absorber_out: TwoModeState,
    pub output: TwoModeState,
}

pub fn channel_states(
    alpha: C64,
    n: usize,
    scheme: &SchemeParams,
    absorber: &AbsorberParams,
    model: AbsorberModel,
    opts: &ChannelOptions,
) -> Result<ChannelStates> {
    require_matched(scheme)?;
    check_model(model)?;
    let cutoff = opts.cutoff_for(alpha, n)?;
    let input = build_input_state(alpha, n, cutoff)?;
    let elements = Elements::resonant(scheme, opts.second_bs, cutoff)?;
    let prop = propagate(&input, &elements, absorber, model, opts.leakage_threshold)?;
    Ok(ChannelStates {
        input,
        absorber_out: prop.absorbed,
        absorber_in: prop.mid,
        output: prop.out,
    })
}

/// Runs `|α⟩⊗|n⟩` through the protected channel.
pub fn run_channel(
    alpha: C64,
    n: usize,
    scheme: &SchemeParams,
    absorber: &AbsorberParams,
    model: AbsorberModel,
    opts: &ChannelOptions,
) -> Result<ChannelReport> {
    require_matched(scheme)?;
    check_model(model)?;
    let cutoff = opts.cutoff_for(alpha, n)?;
    let input = build_input_state(alpha, n, cutoff)?;
    let elements = Elements::resonant(scheme, opts.second_bs, cutoff)?;
    let prop = propagate(&input, &elements, absorber, model, opts.leakage_threshold)?;
    let params = RunParams {
        alpha,
        n,
        scheme: Some(*scheme),
        absorber: *absorber,
        model,
        freq: None,
        n_max: cutoff.n_max(),
        second_bs: opts.second_bs,
    };
    Ok(report(&prop, alpha, n, absorber, params))
}

/// `|n⟩` alone through single-mode amplitude damping.
pub fn run_control(n: usize, absorber: &AbsorberParams, cutoff: FockCutoff) -> Result<ChannelReport> {
    let nm = cutoff.n_max();
    if n >= nm {
        return Err(Error::CutoffTooSmall(format!("|{n}> needs n_max > {n}, got {nm}")));
    }
    let psi = fock::fock_vector(n, nm);
    let rho = absorber::damp_single_mode(&(&psi * psi.adjoint()), absorber.transmissivity)?;
    let num = fock::number(nm);
    Ok(ChannelReport {
        fidelity_b: fock::fidelity_with_pure(&rho, &psi),
        amplitude_a_out: C64::new(0.0, 0.0),
        expected_amplitude: C64::new(0.0, 0.0),
        mean_photons_a: 0.0,
        mean_photons_b: linalg::trace(&(&rho * &num)).re,
        transmissivity: absorber.transmissivity,
        leakage: 0.0,
        stats: None,
        params: RunParams {
            alpha: C64::new(0.0, 0.0),
            n,
            scheme: None,
            absorber: *absorber,
            model: AbsorberModel::Analytic,
            freq: None,
            n_max: nm,
            second_bs: SecondBeamsplitter::Inverse,
        },
    })
}

/// The channel built from the phase-rotated elements `R† X R` of
/// [`transforms::unitary_equivalent_scheme`], `R = exp(iεΩt n_a)` with `t`
/// the transit time. The input enters that frame as `R†|ψ⟩`, the output
/// leaves it through `R`.
pub fn run_raman_variant(
    alpha: C64,
    n: usize,
    scheme: &SchemeParams,
    absorber: &AbsorberParams,
    freq: &FrequencySpec,
    model: AbsorberModel,
    opts: &ChannelOptions,
) -> Result<ChannelReport> {
    require_matched(scheme)?;
    check_model(model)?;
    let equivalent = transforms::unitary_equivalent_scheme(*scheme, *freq)?;
    let cutoff = opts.cutoff_for(alpha, n)?;
    let input = build_input_state(alpha, n, cutoff)?;
    let rotation = equivalent.frame_rotation(absorber.duration(), cutoff);
    let elements = Elements::resonant(scheme, opts.second_bs, cutoff)?.conjugated(&rotation);
    let framed = input.transformed(&rotation.adjoint());
    let prop = propagate(&framed, &elements, absorber, model, opts.leakage_threshold)?;
    let back = Propagated {
        mid: prop.mid.transformed(&rotation),
        absorbed: prop.absorbed.transformed(&rotation),
        out: prop.out.transformed(&rotation),
        leakage: prop.leakage,
    };
    let params = RunParams {
        alpha,
        n,
        scheme: Some(*scheme),
        absorber: *absorber,
        model,
        freq: Some(*freq),
        n_max: cutoff.n_max(),
        second_bs: opts.second_bs,
    };
    Ok(report(&back, alpha, n, absorber, params))
}
