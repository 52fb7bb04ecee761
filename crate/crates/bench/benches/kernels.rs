use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use dfchannel_core::absorber::{collective_damping, Liouvillian};
use dfchannel_core::charfunc::CharGrid;
use dfchannel_core::fock::build_input_state;
use dfchannel_core::pipeline::run_channel;
use dfchannel_core::transforms::{beamsplitter_unitary, collective_modes};
use dfchannel_core::{AbsorberModel, AbsorberParams, ChannelOptions, FockCutoff, SchemeParams, TwoModeState, C64};

fn setup(alpha: C64, n: usize) -> (SchemeParams, AbsorberParams, FockCutoff) {
    let scheme = SchemeParams::matched(0.8, 1.1).unwrap();
    let absorber = AbsorberParams::from_optical_depth(0.7, &scheme).unwrap();
    let cutoff = FockCutoff::for_input(alpha, n, 40, 2).unwrap();
    (scheme, absorber, cutoff)
}

fn beamsplitter(c: &mut Criterion) {
    let alpha = C64::new(1.5, 0.0);
    let (scheme, _, cutoff) = setup(alpha, 2);
    let state = build_input_state(alpha, 2, cutoff).unwrap();
    c.bench_function("beamsplitter_unitary n_max=27", |b| {
        b.iter(|| beamsplitter_unitary(black_box(scheme.theta), cutoff))
    });
    let w = beamsplitter_unitary(scheme.theta, cutoff);
    let mixed = state.transformed(&w);
    let rho = TwoModeState::mixed(mixed.density(), cutoff).unwrap();
    c.bench_function("beamsplitter conjugate density n_max=27", |b| {
        b.iter(|| rho.transformed(black_box(&w)))
    });
}

fn channel(c: &mut Criterion) {
    let alpha = C64::new(1.0, 0.5);
    let (scheme, absorber, _) = setup(alpha, 2);
    let opts = ChannelOptions::default();
    c.bench_function("analytic channel alpha=1+0.5i n=2", |b| {
        b.iter(|| run_channel(black_box(alpha), 2, &scheme, &absorber, AbsorberModel::Analytic, &opts).unwrap())
    });
    let (_, _, cutoff) = setup(alpha, 2);
    let mid = build_input_state(alpha, 2, cutoff)
        .unwrap()
        .transformed(&beamsplitter_unitary(scheme.theta, cutoff).adjoint());
    c.bench_function("collective damping alpha=1+0.5i n=2", |b| {
        b.iter(|| collective_damping(black_box(&mid), &scheme, &absorber).unwrap())
    });
}

fn lindblad(c: &mut Criterion) {
    let alpha = C64::new(0.5, 0.0);
    let (scheme, absorber, cutoff) = setup(alpha, 1);
    let (r, _) = collective_modes(scheme.g, scheme.f, cutoff).unwrap();
    let rho = build_input_state(alpha, 1, cutoff).unwrap().density();
    let generator = Liouvillian::new(None).with_jump(absorber.lindblad_rate(1.0), &r.matrix);
    c.bench_function("lindblad rhs n_max=16", |b| b.iter(|| generator.rhs(black_box(&rho))));
}

fn charfunc(c: &mut Criterion) {
    let alpha = C64::new(1.0, 0.5);
    let (_, _, cutoff) = setup(alpha, 2);
    let state = build_input_state(alpha, 2, cutoff).unwrap();
    let points = CharGrid::points(2.0, 11, 0.0, 0.0).unwrap();
    c.bench_function("charfunc 11x11 grid pure n_max=23", |b| {
        b.iter(|| CharGrid::numeric(black_box(&state), &points).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = beamsplitter, channel, lindblad, charfunc
}
criterion_main!(kernels);
