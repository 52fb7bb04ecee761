use rayon::prelude::*;
use serde_json::{json, Value};

use dfchannel_core::absorber::interaction_hamiltonian;
use dfchannel_core::charfunc::CharGrid;
use dfchannel_core::fock::{coherent_vector, fock_vector, FockCutoff};
use dfchannel_core::linalg::CVec;
use dfchannel_core::pipeline::{channel_states, run_channel, run_control, run_raman_variant};
use dfchannel_core::stats::{build_A_state, compute_stats, covariance_closed_form, mandel_closed_form};
use dfchannel_core::transforms::{check_integral_of_motion, collective_modes};

use crate::config::{Command, Format, RunConfig, Stage};
use crate::output;
use crate::CliError;

/// Runs `cfg` and returns the rendered output document.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    let echo = serde_json::to_value(cfg).map_err(|e| CliError::io(e.to_string()))?;
    match cfg.command {
        Command::Charfunc => {
            let (stage, grid) = charfunc(cfg)?;
            match cfg.format {
                Format::Csv => Ok(output::charfunc_csv(&grid)),
                Format::Json => output::json(&json!({
                    "command": "charfunc",
                    "config": echo,
                    "stage": stage,
                    "samples": grid.samples,
                })),
            }
        }
        Command::Sweep => {
            let spec = cfg.sweep.as_ref().expect("resolved sweep");
            let values = spec.values();
            let points = values
                .par_iter()
                .map(|&x| {
                    let point = cfg.with_value(&spec.param, x)?;
                    single(&point).map(|r| (x, r))
                })
                .collect::<Result<Vec<(f64, Value)>, CliError>>()?;
            match cfg.format {
                Format::Csv => Ok(output::table_csv(&points)),
                Format::Json => {
                    let pts: Vec<Value> = points
                        .into_iter()
                        .map(|(x, r)| json!({"value": x, "report": r}))
                        .collect();
                    output::json(&json!({"command": "sweep", "config": echo, "points": pts}))
                }
            }
        }
        command => {
            let report = single(cfg)?;
            let doc = json!({
                "command": Command::NAMES[command as usize],
                "config": echo,
                "report": report,
            });
            match cfg.format {
                Format::Json => output::json(&doc),
                Format::Csv => output::key_value_csv(&doc),
            }
        }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::io(e.to_string()))
}

/// Report of one non-grid command.
fn single(cfg: &RunConfig) -> Result<Value, CliError> {
    let scheme = cfg.scheme()?;
    let absorber = cfg.absorber(&scheme)?;
    let opts = cfg.options();
    match cfg.command {
        Command::Channel => to_value(&run_channel(cfg.alpha, cfg.n, &scheme, &absorber, cfg.model, &opts)?),
        Command::Raman => {
            let freq = cfg.frequencies()?;
            to_value(&run_raman_variant(
                cfg.alpha, cfg.n, &scheme, &absorber, &freq, cfg.model, &opts,
            )?)
        }
        Command::Control => {
            let cutoff = FockCutoff::new(cfg.n_max.unwrap_or(cfg.n + cfg.margin + 2), cfg.margin)?;
            to_value(&run_control(cfg.n, &absorber, cutoff)?)
        }
        Command::Stats => {
            let (c, s) = scheme.input_mixing();
            let cutoff = opts.cutoff_for(cfg.alpha, cfg.n)?;
            let state = build_A_state(cfg.alpha, cfg.n, c, s, cutoff)?;
            let (qa, qb) = mandel_closed_form(cfg.alpha, cfg.n, c, s);
            Ok(json!({
                "c": c,
                "s": s,
                "n_max": cutoff.n_max(),
                "leakage": state.leakage(),
                "moments": compute_stats(&state),
                "closed_form": {
                    "mandel_a": qa,
                    "mandel_b": qb,
                    "covariance": covariance_closed_form(cfg.alpha, cfg.n, c, s),
                    "separability": 2.0 * (1.0 + cfg.n as f64),
                },
            }))
        }
        Command::Verify => verify(cfg),
        Command::Charfunc | Command::Sweep => unreachable!("handled by execute"),
    }
}

fn charfunc(cfg: &RunConfig) -> Result<(Stage, CharGrid), CliError> {
    let scheme = cfg.scheme()?;
    let absorber = cfg.absorber(&scheme)?;
    let states = channel_states(cfg.alpha, cfg.n, &scheme, &absorber, cfg.model, &cfg.options())?;
    let state = match cfg.stage {
        Stage::Input => &states.input,
        Stage::AbsorberIn => &states.absorber_in,
        Stage::AbsorberOut => &states.absorber_out,
        Stage::Output => &states.output,
    };
    let points = CharGrid::points(cfg.grid_bound, cfg.grid_count, cfg.phase1, cfg.phase2)?;
    Ok((cfg.stage, CharGrid::numeric(state, &points)?))
}

/// Integral-of-motion check of `τ` (and the coupled `r` as a control) under
/// the few-atom interaction.
fn verify(cfg: &RunConfig) -> Result<Value, CliError> {
    let cutoff = cfg.verify_cutoff()?;
    let atoms = cfg.atoms;
    let v = interaction_hamiltonian(cfg.g, cfg.f, atoms, cutoff)?;
    let (r, tau) = collective_modes(cfg.g, cfg.f, cutoff)?;
    let nm = cutoff.n_max();
    let field = coherent_vector(cfg.alpha, nm);
    let fock = fock_vector(cfg.n.min(nm - 1), nm);
    let mut probe = CVec::zeros(cutoff.dim() << atoms);
    for j in 0..nm {
        for k in 0..nm {
            probe[cutoff.index(j, k) << atoms] = field[j] * fock[k];
        }
    }
    let times: Vec<f64> = (1..=cfg.verify_steps)
        .map(|i| cfg.verify_time * i as f64 / cfg.verify_steps as f64)
        .collect();
    let tau_report = check_integral_of_motion(&v, &tau.with_atoms(atoms), &probe, &times)?;
    let r_report = check_integral_of_motion(&v, &r.with_atoms(atoms), &probe, &times)?;
    Ok(json!({
        "atoms": atoms,
        "n_max": nm,
        "tau": {"commutator_norm": tau_report.commutator_norm, "dynamic_drift": tau_report.dynamic_drift},
        "r": {"commutator_norm": r_report.commutator_norm, "dynamic_drift": r_report.dynamic_drift},
    }))
}
