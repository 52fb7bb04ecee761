//! Simulation of two-mode light crossing an absorbing atomic medium.
//!
//! A Fock state sent through an absorber is normally destroyed. Mixing it
//! with a coherent mode on a beamsplitter tuned to the atom couplings puts it
//! into the collective mode that the atoms cannot see; a second beamsplitter
//! behind the absorber separates it out again, unchanged, while the coherent
//! mode leaves attenuated by `q = exp(-Mz)`.
//!
//! Everything is computed on a truncated two-mode Fock basis `|j,k⟩`,
//! `0 <= j,k < n_max`, stored at index `j * n_max + k`.
//!
//! Modules:
//! - [`fock`]: states, ladder operators, expectations, partial traces, fidelity.
//! - [`transforms`]: beamsplitters, phase shifts, collective modes, integral-of-motion checks.
//! - [`absorber`]: analytic collective damping, Lindblad integration, few-atom model.
//! - [`charfunc`]: normally ordered characteristic functions, numeric and closed form.
//! - [`stats`]: photon-counting and quadrature statistics of the mixed coherent/Fock state.
//! - [`pipeline`]: the full beamsplitter / absorber / beamsplitter channel and its controls.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod absorber;
pub mod charfunc;
mod error;
pub mod fock;
pub mod linalg;
pub mod pipeline;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use absorber::{AbsorberParams, MicroModel};
pub use charfunc::{CharFrame, CharGrid, CharSample};
pub use fock::{FockCutoff, ModeLabel, ModeOperator, TwoModeState};
pub use linalg::SectorUnitary;
pub use pipeline::{AbsorberModel, ChannelOptions, ChannelReport, SecondBeamsplitter};
pub use stats::StatsReport;
pub use transforms::{EquivalentScheme, FrequencySpec, SchemeParams};
