use std::f64::consts::PI;

use proptest::prelude::*;

use dirac_lab::gauge::{GaugeProfile, Ramp};
use dirac_lab::heisenberg::{closed_form_propagator, ode_propagators, OdeOptions};
use dirac_lab::lattice::{
    build_free_hamiltonian, mode_basis, spectral_gradient_real, spectral_laplacian, LatticeConfig, Scheme,
};
use dirac_lab::linalg::{max_abs, CMat, CVec, C64};
use dirac_lab::fock::{prepare_wave_packet, StateVector};
use dirac_lab::observables::h0_expectation_schrodinger;
use dirac_lab::schrodinger::{evolve_state, HamiltonianSchedule, SchrodingerOptions};
use dirac_lab::system::LatticeSystem;

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Spectral), Just(Scheme::GaugedHopping)]
}

/// Real samples with Fourier content only up to `|k| = k_max`.
fn band_limited(n: usize, length: f64, coeffs: &[(f64, f64)]) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = length * j as f64 / n as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (c, s))| {
                    let p = 2.0 * PI * k as f64 / length;
                    c * (p * x).cos() + s * (p * x).sin()
                })
                .sum()
        })
        .collect()
}

fn coeffs(k_max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), k_max + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn free_hamiltonian_is_rebuilt_from_its_modes(
        half in 1usize..5, length in 1.0..10.0f64, mass in 0.0..3.0f64, scheme in scheme(),
    ) {
        let config = LatticeConfig::new(2 * half, length, mass, 1.0, scheme).unwrap();
        let h0 = build_free_hamiltonian(&config).unwrap();
        let basis = mode_basis(&h0, &config).unwrap();
        prop_assert!(basis.reconstruction_error(&h0) <= 1e-10);
        let mut e = basis.signed_energies();
        e.sort_by(f64::total_cmp);
        for k in 0..e.len() {
            prop_assert!((e[k] + e[e.len() - 1 - k]).abs() <= 1e-12 * (1.0 + e[k].abs()));
        }
    }

    #[test]
    fn spectral_gradient_squared_is_the_laplacian(c in coeffs(3), length in 1.0..10.0f64) {
        let f = band_limited(8, length, &c);
        let g = spectral_gradient_real(&spectral_gradient_real(&f, length).unwrap(), length).unwrap();
        let fc: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        let lap = spectral_laplacian(&fc, length).unwrap();
        let scale = 1.0 + lap.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in g.iter().zip(&lap) {
            prop_assert!((a - b.re).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn periodic_integration_by_parts_is_exact(
        current in prop::collection::vec(-2.0..2.0f64, 6),
        chi in prop::collection::vec(-2.0..2.0f64, 6),
        scheme in scheme(),
    ) {
        let config = LatticeConfig::new(6, 3.0, 1.0, 1.0, scheme).unwrap();
        let lhs = -config.integrate_product(&current, &config.gradient(&chi).unwrap());
        let rhs = config.integrate_product(&chi, &config.gradient(&current).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn pulse_carries_no_field_strength(
        c in coeffs(2), f in -5.0..5.0f64, s in 0.01..0.99f64, scheme in scheme(),
        cosine in any::<bool>(),
    ) {
        let config = LatticeConfig::new(8, 4.0, 1.0, 1.0, scheme).unwrap();
        let ramp = if cosine { Ramp::Cosine } else { Ramp::Polynomial };
        let profile = GaugeProfile::with_band_limit(&config, band_limited(8, 4.0, &c), 0.7, ramp, f, Some(0.5)).unwrap();
        let e = profile.field_strength_at(s * 0.7).unwrap();
        let a = profile.potential_at(s * 0.7).unwrap();
        let scale = 1.0 + a.vector.iter().chain(&a.scalar).fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(e.iter().all(|v| v.abs() <= 1e-10 * scale));
        prop_assert!(profile.potential_at(0.71).unwrap().is_zero());
    }

    #[test]
    fn heisenberg_maps_stay_unitary(c in coeffs(1), f in -4.0..4.0f64, scheme in scheme()) {
        let config = LatticeConfig::new(4, 4.0, 1.0, 1.0, scheme).unwrap();
        let sys = LatticeSystem::build(&config, 4).unwrap();
        let profile = GaugeProfile::with_band_limit(&config, band_limited(4, 4.0, &c), 1.0, Ramp::Polynomial, f, Some(0.5)).unwrap();
        let id = CMat::identity(8, 8);
        let ode = ode_propagators(&config, &sys.h0, &profile, &[0.5, 1.0, 1.7], &OdeOptions::default()).unwrap();
        for (w, t) in ode.iter().zip([0.5, 1.0, 1.7]) {
            prop_assert!(max_abs(&(w.adjoint() * w - &id)) <= 1e-10);
            let cf = closed_form_propagator(&sys.basis, &profile, t).unwrap();
            prop_assert!(max_abs(&(cf.adjoint() * &cf - &id)) <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_expands_over_occupation_states(
        re in prop::collection::vec(-1.0..1.0f64, 16),
        im in prop::collection::vec(-1.0..1.0f64, 16),
        scheme in scheme(),
    ) {
        let config = LatticeConfig::new(2, 2.0, 0.5, 1.0, scheme).unwrap();
        let sys = LatticeSystem::build(&config, 2).unwrap();
        let amps = CVec::from_iterator(16, re.iter().zip(&im).map(|(&r, &i)| C64::new(r, i)));
        prop_assume!(amps.norm() > 1e-3);
        let state = StateVector::normalized(amps).unwrap();
        // bit j < N: electron in mode j + 1; bit N + j: positron in mode -(j + 1)
        let occupation_energy = |s: usize| -> f64 {
            (0..2).map(|j| {
                let e = if s >> j & 1 == 1 { sys.basis.mode(j as i64 + 1).unwrap().energy } else { 0.0 };
                let p = if s >> (2 + j) & 1 == 1 { sys.basis.mode(-(j as i64) - 1).unwrap().energy } else { 0.0 };
                e + p
            }).sum()
        };
        let expected: f64 = state.amplitudes().iter().enumerate().map(|(s, c)| c.norm_sqr() * occupation_energy(s)).sum();
        let got = h0_expectation_schrodinger(&sys, &state).unwrap();
        prop_assert!((got - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
    }

    #[test]
    fn schrodinger_evolution_is_unitary_and_nonnegative(
        c in (-1.0..1.0f64, -1.0..1.0f64), f in -3.0..3.0f64, scheme in scheme(),
        w in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        let config = LatticeConfig::new(2, 2.0, 1.0, 1.0, scheme).unwrap();
        let sys = LatticeSystem::build(&config, 2).unwrap();
        let weights: Vec<C64> = w.iter().map(|&x| C64::new(x, 0.0)).collect();
        prop_assume!(weights.iter().any(|z| z.norm() > 1e-2));
        let state0 = prepare_wave_packet(&sys.ladder, &weights).unwrap();
        let g = band_limited(2, 2.0, &[(c.0, 0.0), (c.1, 0.0)]);
        let profile = GaugeProfile::with_band_limit(&config, g, 0.5, Ramp::Polynomial, f, None).unwrap();
        let schedule = HamiltonianSchedule::new(&config, &sys.free, &sys.field, &profile).unwrap();
        let grid = [0.1, 0.25, 0.5, 0.9, 1.4];
        let states = evolve_state(&state0, &schedule, &grid, 0.5 / 32.0, &SchrodingerOptions::default()).unwrap();
        let energies: Vec<f64> = states.iter().map(|s| h0_expectation_schrodinger(&sys, s).unwrap()).collect();
        for s in &states {
            prop_assert!((s.norm() - 1.0).abs() <= 1e-10);
        }
        prop_assert!(energies.iter().all(|&e| e >= -1e-10));
        prop_assert!((energies[2] - energies[4]).abs() <= 1e-9 * (1.0 + energies[2].abs()));
    }
}
