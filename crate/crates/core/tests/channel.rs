use dfchannel_core::fock::FockCutoff;
use dfchannel_core::pipeline::{run_channel, run_control, run_raman_variant};
use dfchannel_core::{
    AbsorberModel, AbsorberParams, ChannelOptions, FrequencySpec, SchemeParams, SecondBeamsplitter, C64,
};

fn setup(g: f64, f: f64, mz: f64) -> (SchemeParams, AbsorberParams) {
    let scheme = SchemeParams::matched(g, f).unwrap();
    let absorber = AbsorberParams::from_optical_depth(mz, &scheme).unwrap();
    (scheme, absorber)
}

fn analytic(alpha: C64, n: usize, scheme: &SchemeParams, absorber: &AbsorberParams) -> dfchannel_core::ChannelReport {
    run_channel(
        alpha,
        n,
        scheme,
        absorber,
        AbsorberModel::Analytic,
        &ChannelOptions::default(),
    )
    .unwrap()
}

#[test]
fn protected_while_control_decays() {
    for &mz in &[0.25, 1.0] {
        let (scheme, absorber) = setup(0.8, 1.3, mz);
        let q = (-mz).exp();
        for n in 0..=3 {
            for &a in &[0.0, 1.0, 2.0] {
                let r = analytic(C64::new(a, 0.3 * a), n, &scheme, &absorber);
                assert!(r.fidelity_b >= 1.0 - 1e-5, "n {n} a {a}: {}", r.fidelity_b);
                assert!((r.amplitude_a_out - r.expected_amplitude).norm() <= 1e-5);
            }
            let control = run_control(n, &absorber, FockCutoff::new(n + 3, 2).unwrap()).unwrap();
            assert!((control.fidelity_b - q.powi(2 * n as i32)).abs() < 1e-12);
            if n >= 1 {
                assert!(control.fidelity_b < 1.0 - 1e-3);
            }
        }
    }
}

#[test]
fn attenuation_is_monotone_in_length() {
    let scheme = SchemeParams::matched(1.0, 0.6).unwrap();
    let alpha = C64::new(0.9, -0.4);
    let mut last = f64::INFINITY;
    for i in 0..6 {
        let absorber = AbsorberParams::from_coefficient(0.7, 0.3 * i as f64, 1.0, &scheme).unwrap();
        let m = analytic(alpha, 1, &scheme, &absorber).amplitude_a_out.norm();
        assert!(m < last);
        last = m;
    }
}

#[test]
fn lindblad_large_amplitude() {
    let (scheme, absorber) = setup(1.0, 1.0, 0.5);
    let r = run_channel(
        C64::new(2.0, 0.0),
        3,
        &scheme,
        &absorber,
        AbsorberModel::Lindblad { dt: 0.05 },
        &ChannelOptions::default(),
    )
    .unwrap();
    assert!(r.fidelity_b >= 1.0 - 1e-5);
    assert!((r.amplitude_a_out - C64::new(1.213061, 0.0)).norm() < 1e-5);
}

#[test]
fn models_agree_on_every_field() {
    let (scheme, absorber) = setup(0.5, 0.9, 0.8);
    let alpha = C64::new(0.6, 0.2);
    let x = analytic(alpha, 2, &scheme, &absorber);
    let y = run_channel(
        alpha,
        2,
        &scheme,
        &absorber,
        AbsorberModel::Lindblad { dt: 0.02 },
        &ChannelOptions::default(),
    )
    .unwrap();
    assert!(x.max_difference(&y) < 1e-5, "{}", x.max_difference(&y));
}

#[test]
fn raman_variants_match_resonant_report() {
    let (scheme, absorber) = setup(1.0, 0.4, 1.0);
    let alpha = C64::new(1.0, 0.0);
    let base = analytic(alpha, 1, &scheme, &absorber);
    for eps in [-1i8, 1] {
        let freq = FrequencySpec::resonant(2.0, 0.6, eps).unwrap();
        let opts = ChannelOptions::default();
        let r = run_raman_variant(alpha, 1, &scheme, &absorber, &freq, AbsorberModel::Analytic, &opts).unwrap();
        assert!(r.max_difference(&base) < 1e-9);
        assert!((r.fidelity_b - base.fidelity_b).abs() < 1e-9);
    }
}

#[test]
fn repeated_orientation_breaks_protection() {
    let (scheme, absorber) = setup(1.0, 1.0, 1.0);
    let opts = ChannelOptions {
        second_bs: SecondBeamsplitter::Repeat,
        ..Default::default()
    };
    let r = run_channel(
        C64::new(1.0, 0.0),
        1,
        &scheme,
        &absorber,
        AbsorberModel::Analytic,
        &opts,
    )
    .unwrap();
    let inverse = analytic(C64::new(1.0, 0.0), 1, &scheme, &absorber);
    assert!(inverse.fidelity_b > 1.0 - 1e-9);
    assert!(r.fidelity_b < inverse.fidelity_b - 0.1);
}
