use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fockline::evolution::{
    amplitude_oracle, apply, evolve_amplitudes, permanent, permanent_naive, TransitionQuery,
};
use fockline::fock::{Amplitudes, ModeRegistry, OccupationVector, PureState};
use fockline::optics::ModeUnitary;
use fockline::{Complex64, Exec};

fn eight_modes() -> Arc<ModeRegistry> {
    Arc::new(ModeRegistry::new(["a", "b", "c", "d"], &[0]).unwrap())
}

/// All occupation vectors of `n` photons over `modes` modes.
fn all_occupations(modes: usize, n: u32) -> Vec<OccupationVector> {
    fn rec(m: usize, modes: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<OccupationVector>) {
        if left == 0 {
            out.push(OccupationVector::from_photons(cur.iter().copied()));
            return;
        }
        for k in m..modes {
            cur.push(k);
            rec(k, modes, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, modes, n, &mut Vec::new(), &mut out);
    out
}

fn random_state(reg: &Arc<ModeRegistry>, n: u32, coeffs: &[(f64, f64)]) -> PureState {
    let basis = all_occupations(reg.len(), n);
    let terms: Amplitudes = basis
        .into_iter()
        .zip(coeffs.iter().cycle())
        .map(|(k, &(re, im))| (k, Complex64::new(re, im)))
        .collect();
    PureState::normalized(reg.clone(), terms).unwrap()
}

#[test]
fn oracle_matches_expansion_on_random_unitaries() {
    let reg = eight_modes();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0usize;
    for trial in 0..120 {
        let u = ModeUnitary::haar_random(reg.clone(), &mut rng);
        let n = 2 + (trial % 2) as u32;
        let inputs = all_occupations(reg.len(), n);
        let input = inputs[(trial * 7) % inputs.len()].clone();
        let mut terms = Amplitudes::new();
        terms.insert(input.clone(), Complex64::new(1.0, 0.0));
        let out = evolve_amplitudes(&terms, &u, Exec::Sequential);
        for output in all_occupations(reg.len(), n) {
            let oracle = amplitude_oracle(&TransitionQuery {
                unitary: &u,
                input: input.clone(),
                output: output.clone(),
            })
            .unwrap();
            let got = out.get(&output).copied().unwrap_or_default();
            assert!((got - oracle).norm() < 1e-10, "trial {trial}: {got} vs {oracle}");
            checked += 1;
        }
    }
    assert_eq!(checked, 60 * 36 + 60 * 120);
}

#[test]
fn four_photon_terms_match_oracle() {
    let reg = eight_modes();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = ModeUnitary::haar_random(reg.clone(), &mut rng);
    let input = OccupationVector::from_photons([0, 0, 3, 6]);
    let state = {
        let mut t = Amplitudes::new();
        t.insert(input.clone(), Complex64::new(1.0, 0.0));
        PureState::from_amplitudes(reg.clone(), t).unwrap()
    };
    let out = apply(&state, &u).unwrap();
    for (occ, amp) in out.amplitudes() {
        let oracle = amplitude_oracle(&TransitionQuery {
            unitary: &u,
            input: input.clone(),
            output: occ.clone(),
        })
        .unwrap();
        assert!((amp - oracle).norm() < 1e-10);
    }
}

fn complex_matrix(n: usize) -> impl Strategy<Value = nalgebra::DMatrix<Complex64>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n * n).prop_map(move |v| {
        nalgebra::DMatrix::from_iterator(n, n, v.into_iter().map(|(re, im)| Complex64::new(re, im)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permanent_implementations_agree(m in (1usize..=4).prop_flat_map(complex_matrix)) {
        let a = permanent(&m).unwrap();
        let b = permanent_naive(&m).unwrap();
        prop_assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn permanent_is_invariant_under_transpose(m in (1usize..=5).prop_flat_map(complex_matrix)) {
        let a = permanent(&m).unwrap();
        let b = permanent(&m.transpose()).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn evolution_preserves_norm_and_inverts(
        seed in any::<u64>(),
        n in 1u32..=3,
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..12),
    ) {
        prop_assume!(coeffs.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let reg = eight_modes();
        let u = ModeUnitary::haar_random(reg.clone(), &mut ChaCha8Rng::seed_from_u64(seed));
        let s = random_state(&reg, n, &coeffs);
        let out = apply(&s, &u).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-9);
        prop_assert!(out.amplitudes().keys().all(|k| k.n_total() == n));
        let back = apply(&out, &u.adjoint()).unwrap();
        for occ in all_occupations(reg.len(), n) {
            prop_assert!((back.amplitude(&occ) - s.amplitude(&occ)).norm() < 1e-9);
        }
        prop_assert!((s.inner(&back).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn evolution_is_linear(
        seed in any::<u64>(),
        c1 in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..10),
        c2 in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..10),
        alpha in (-2.0..2.0f64, -2.0..2.0f64),
        beta in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let reg = eight_modes();
        let u = ModeUnitary::haar_random(reg.clone(), &mut ChaCha8Rng::seed_from_u64(seed));
        let to_map = |c: &[(f64, f64)]| -> Amplitudes {
            all_occupations(reg.len(), 2)
                .into_iter()
                .zip(c.iter().cycle())
                .map(|(k, &(re, im))| (k, Complex64::new(re, im)))
                .collect()
        };
        let (s1, s2) = (to_map(&c1), to_map(&c2));
        let (alpha, beta) = (Complex64::new(alpha.0, alpha.1), Complex64::new(beta.0, beta.1));
        let mut mix = Amplitudes::new();
        for (k, a) in &s1 {
            *mix.entry(k.clone()).or_default() += alpha * a;
        }
        for (k, b) in &s2 {
            *mix.entry(k.clone()).or_default() += beta * b;
        }
        let lhs = evolve_amplitudes(&mix, &u, Exec::Sequential);
        let e1 = evolve_amplitudes(&s1, &u, Exec::Sequential);
        let e2 = evolve_amplitudes(&s2, &u, Exec::Parallel);
        for occ in all_occupations(reg.len(), 2) {
            let rhs = alpha * e1.get(&occ).copied().unwrap_or_default()
                + beta * e2.get(&occ).copied().unwrap_or_default();
            let got = lhs.get(&occ).copied().unwrap_or_default();
            prop_assert!((got - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn reduced_states_are_physical(
        seed in any::<u64>(),
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..20),
        keep_mask in 1u8..15,
    ) {
        prop_assume!(coeffs.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let reg = eight_modes();
        let u = ModeUnitary::haar_random(reg.clone(), &mut ChaCha8Rng::seed_from_u64(seed));
        let s = apply(&random_state(&reg, 2, &coeffs), &u).unwrap();
        let keep: BTreeSet<String> = ["a", "b", "c", "d"]
            .iter()
            .enumerate()
            .filter(|(i, _)| keep_mask & (1 << i) != 0)
            .map(|(_, p)| p.to_string())
            .collect();
        let rho = s.reduced_density_matrix(&keep).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        let p = rho.purity();
        prop_assert!(p <= 1.0 + 1e-9);
        prop_assert!(p >= 1.0 / rho.dim() as f64 - 1e-9);
        prop_assert!(rho.eigenvalues().iter().all(|&e| e >= -1e-10));
    }
}
