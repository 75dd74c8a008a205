use fput_core::circuit::{self, ScheduleMode, TrotterCircuitSpec};
use fput_core::correlator::{self, Estimator};
use fput_core::{
    Complex64, EncodingKind, Execution, GridSpec, LatticeState, ModelParams, Propagator,
    TrotterOrder,
};
use proptest::prelude::*;

fn order() -> impl Strategy<Value = TrotterOrder> {
    prop_oneof![
        Just(TrotterOrder::First),
        Just(TrotterOrder::Second),
        Just(TrotterOrder::Suzuki4)
    ]
}

fn random_state(n: usize, bits: u32, seed: u64) -> LatticeState {
    let dim = 1usize << (n * bits as usize);
    let amps = (0..dim as u64)
        .map(|i| {
            let a = correlator::derive_seed(seed, 2 * i) as f64 / u64::MAX as f64 - 0.5;
            let b = correlator::derive_seed(seed, 2 * i + 1) as f64 / u64::MAX as f64 - 0.5;
            Complex64::new(a, b)
        })
        .collect();
    let mut s = LatticeState::from_amplitudes(n, bits, amps).unwrap();
    s.normalize();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trotter_steps_are_unitary(
        n in 2usize..4,
        bits in 2u32..4,
        beta in 0.0f64..2.0,
        dt in 0.001f64..0.3,
        ord in order(),
        seed in any::<u64>(),
    ) {
        let params = ModelParams::units(n, beta).unwrap();
        let grid = GridSpec::with_default_q_max(&params, bits, EncodingKind::TwosComplement).unwrap();
        let prop = Propagator::new(&params, &grid).unwrap();
        let mut s = random_state(n, bits, seed);
        let other = random_state(n, bits, seed ^ 1);
        let before = s.inner(&other).unwrap();
        let mut o = other.clone();
        prop.evolve_steps(&mut s, dt, ord, 7).unwrap();
        prop.evolve_steps(&mut o, dt, ord, 7).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        prop_assert!((s.inner(&o).unwrap() - before).norm() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_are_bit_identical(
        n in 2usize..4,
        bits in 2u32..5,
        dt in 0.001f64..0.2,
        ord in order(),
        seed in any::<u64>(),
    ) {
        let params = ModelParams::units(n, 0.7).unwrap();
        let grid = GridSpec::with_default_q_max(&params, bits, EncodingKind::UnsignedOffset).unwrap();
        let seq = Propagator::with_options(&params, &grid, Execution::Sequential, Default::default()).unwrap();
        let par = Propagator::with_options(&params, &grid, Execution::Parallel, Default::default()).unwrap();
        let mut a = random_state(n, bits, seed);
        let mut b = a.clone();
        seq.evolve_steps(&mut a, dt, ord, 3).unwrap();
        par.evolve_steps(&mut b, dt, ord, 3).unwrap();
        prop_assert_eq!(a.amplitudes(), b.amplitudes());
        prop_assert_eq!(
            seq.kinetic_expectation(&a).unwrap().to_bits(),
            par.kinetic_expectation(&b).unwrap().to_bits()
        );
    }

    #[test]
    fn qubits_total_is_three_halves_nb(n in 2usize..2000, b in 2u32..13) {
        let q = circuit::qubits_total_formula(n, b);
        prop_assert_eq!(2 * q >= 3 * n * b as usize, true);
        prop_assert!(2 * q <= 3 * n * b as usize + 1);
    }

    #[test]
    fn ir_text_round_trips(n in 2usize..6, bits in 2u32..5, steps in 1usize..3, serial in any::<bool>()) {
        let mode = if serial { ScheduleMode::Serial } else { ScheduleMode::Parallel };
        let ir = circuit::build_trotter_circuit(&TrotterCircuitSpec {
            n_sites: n,
            bits,
            ancilla: 2 * bits as usize,
            order: TrotterOrder::Second,
            n_steps: steps,
            mode,
            merge_kinetic: false,
        }).unwrap();
        let text = circuit::export_ir_text(&ir);
        let back = circuit::parse_ir_text(&text).unwrap();
        prop_assert_eq!(back.gate_counts(), ir.gate_counts());
        prop_assert_eq!(back.depth(), ir.depth());
        prop_assert_eq!(circuit::export_ir_text(&back), text);
        prop_assert!(back.mirrors_consistent());
    }

    #[test]
    fn shot_sampler_is_deterministic_and_bounded(
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
        shots in 1u64..5000,
        seed in any::<u64>(),
    ) {
        let v = Complex64::new(re, im);
        let a = correlator::shot_sample(v, shots, seed).unwrap();
        let b = correlator::shot_sample(v, shots, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.re.abs() <= 1.0 && a.im.abs() <= 1.0);
        // outcomes are multiples of 2/M
        let k = (a.re + 1.0) * shots as f64 / 2.0;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn estimators_recover_bilinear_coefficient(c in -3.0f64..3.0, d in -1.0f64..1.0, h in 0.01f64..0.5) {
        for est in Estimator::ALL {
            let f = |a: f64, b: f64| Ok(Complex64::new(1.0 + d * (a - b) - c * a * b, 0.5 * d * a));
            let e = est.estimate(f, 0.0, h, 1.0).unwrap();
            prop_assert!((e.value.re - c).abs() < 1e-9, "{} {} vs {}", est, e.value.re, c);
        }
    }
}

#[test]
fn depth_scales_exactly_with_steps() {
    for (n, b) in [(2, 2), (5, 3)] {
        let spec = |steps| TrotterCircuitSpec {
            n_sites: n,
            bits: b,
            ancilla: 2 * b as usize,
            order: TrotterOrder::Second,
            n_steps: steps,
            mode: ScheduleMode::Serial,
            merge_kinetic: false,
        };
        let one = circuit::build_trotter_circuit(&spec(1)).unwrap().depth();
        assert_eq!(
            circuit::build_trotter_circuit(&spec(20)).unwrap().depth(),
            20 * one
        );
    }
}
