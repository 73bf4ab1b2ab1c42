use epr_cascade::{
    cascade_step, chi_square_gof, density_from_ensemble, exact_count_distribution,
    log_likelihood_ratio, run_cascade, step_zero_probability, total_variation, Amplitude,
    AncillaSpec, CascadeConfig, CountDistribution, DensityOperator, EmpiricalDistribution,
    GateMatrix, PureState,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn amplitude() -> impl Strategy<Value = Amplitude> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Amplitude::new(re, im))
}

fn state(num_qubits: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec(amplitude(), 1 << num_qubits)
        .prop_filter("non-zero", |v| {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3
        })
        .prop_map(|v| PureState::normalized(v).unwrap())
}

fn register() -> impl Strategy<Value = PureState> {
    (1usize..=4).prop_flat_map(state)
}

fn unitary() -> impl Strategy<Value = GateMatrix> {
    (0.0f64..6.3, 0.0f64..6.3, 0.0f64..6.3, 0.0f64..1.6).prop_map(|(alpha, beta, gamma, theta)| {
        let e = |phi: f64| Amplitude::from_polar(1.0, phi);
        let (c, s) = (theta.cos(), theta.sin());
        GateMatrix::new(
            2,
            vec![
                e(alpha + beta) * c,
                e(alpha + gamma) * s,
                -e(alpha - gamma) * s,
                e(alpha - beta) * c,
            ],
        )
        .unwrap()
    })
}

fn ancilla() -> impl Strategy<Value = AncillaSpec> {
    (amplitude(), amplitude())
        .prop_filter("non-zero", |(a, b)| a.norm_sqr() + b.norm_sqr() > 1e-3)
        .prop_map(|(a, b)| AncillaSpec::normalized(a, b).unwrap())
}

/// Random single-qubit mixed state: a weighted pair of random pure states.
fn density() -> impl Strategy<Value = DensityOperator> {
    (state(1), state(1), 0.0f64..=1.0)
        .prop_map(|(s, t, w)| density_from_ensemble(&[(w, s), (1.0 - w, t)]).unwrap())
}

fn distribution(rounds: usize) -> impl Strategy<Value = CountDistribution> {
    prop::collection::vec(0.0f64..1.0, rounds + 1)
        .prop_filter("non-zero", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(move |v| {
            let s: f64 = v.iter().sum();
            CountDistribution::new(rounds, v.iter().map(|x| x / s).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gates_preserve_norm(s in register(), g in unitary(), q in 0usize..4, t in 0usize..4) {
        let q = q % s.num_qubits();
        let out = s.apply_single_qubit(&g, q).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!(g.unitarity_deviation() < 1e-12);
        let t = t % s.num_qubits();
        if s.num_qubits() > 1 && q != t {
            let out = s.apply_cnot(q, t).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn cnot_is_an_involution(s in (2usize..=4).prop_flat_map(state), c in 0usize..4, t in 0usize..4) {
        let n = s.num_qubits();
        let (c, t) = (c % n, t % n);
        prop_assume!(c != t);
        let twice = s.apply_cnot(c, t).unwrap().apply_cnot(c, t).unwrap();
        prop_assert!(twice.approx_eq(&s, 1e-12));
    }

    #[test]
    fn pauli_x_is_an_involution(s in register(), q in 0usize..4) {
        let q = q % s.num_qubits();
        let x = GateMatrix::pauli_x();
        let twice = s.apply_single_qubit(&x, q).unwrap().apply_single_qubit(&x, q).unwrap();
        prop_assert!(twice.approx_eq(&s, 1e-12));
    }

    #[test]
    fn measurement_average_reconstructs_marginals(s in (2usize..=4).prop_flat_map(state), q in 0usize..4) {
        let n = s.num_qubits();
        let q = q % n;
        let (p0, p1) = s.outcome_probability(q).unwrap();
        let mut branches = Vec::new();
        for (o, p) in [(0u8, p0), (1u8, p1)] {
            if p > 1e-12 {
                branches.push((p, s.project(q, o).unwrap().1));
            }
        }
        for j in 0..n {
            let before = s.reduced_density(j).unwrap();
            let mut after = [Amplitude::new(0.0, 0.0); 4];
            for (p, post) in &branches {
                let r = post.reduced_density(j).unwrap();
                for (acc, x) in after.iter_mut().zip(r.entries()) {
                    *acc += x * *p;
                }
            }
            if j == q {
                // measured qubit: populations survive, coherences vanish
                prop_assert!((after[0] - before.entry(0, 0)).norm() <= 1e-12);
                prop_assert!((after[3] - before.entry(1, 1)).norm() <= 1e-12);
                prop_assert!(after[1].norm() <= 1e-12 && after[2].norm() <= 1e-12);
            } else {
                for (a, b) in after.iter().zip(before.entries()) {
                    prop_assert!((a - b).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn partial_trace_is_linear(
        s in state(3), t in state(3), w in 0.0f64..=1.0, q in 0usize..3
    ) {
        let mixed = density_from_ensemble(&[(w, s.clone()), (1.0 - w, t.clone())]).unwrap();
        let lhs = mixed.reduced(q).unwrap();
        let rs = s.reduced_density(q).unwrap();
        let rt = t.reduced_density(q).unwrap();
        let rhs = DensityOperator::convex_combination(w, &rs, &rt).unwrap();
        prop_assert!(lhs.max_abs_difference(&rhs) <= 1e-12);
    }

    #[test]
    fn oracle_is_affine(r1 in density(), r2 in density(), w in 0.0f64..=1.0, anc in ancilla(), k in 1usize..=6) {
        let cfg = CascadeConfig::new(k, anc).unwrap();
        let mixed = DensityOperator::convex_combination(w, &r1, &r2).unwrap();
        let lhs = exact_count_distribution(&mixed, &cfg).unwrap();
        let rhs = CountDistribution::mixture(
            w,
            &exact_count_distribution(&r1, &cfg).unwrap(),
            &exact_count_distribution(&r2, &cfg).unwrap(),
        ).unwrap();
        prop_assert!(lhs.max_abs_difference(&rhs) <= 1e-12);
    }

    #[test]
    fn oracle_ignores_control_phase(anc in ancilla(), k in 1usize..=8) {
        let cfg = CascadeConfig::new(k, anc).unwrap();
        let plus = exact_count_distribution(&DensityOperator::pure(&PureState::plus()), &cfg).unwrap();
        let minus = exact_count_distribution(&DensityOperator::pure(&PureState::minus()), &cfg).unwrap();
        prop_assert!(plus.max_abs_difference(&minus) <= 1e-12);
    }

    #[test]
    fn basis_inputs_reduce_to_binomials(anc in ancilla(), k in 1usize..=8) {
        let cfg = CascadeConfig::new(k, anc).unwrap();
        let zero = exact_count_distribution(&DensityOperator::pure(&PureState::zero()), &cfg).unwrap();
        let one = exact_count_distribution(&DensityOperator::pure(&PureState::one()), &cfg).unwrap();
        let bz = epr_cascade::binomial_distribution(k, anc.a().norm_sqr()).unwrap();
        let bo = epr_cascade::binomial_distribution(k, anc.b().norm_sqr()).unwrap();
        prop_assert!(zero.max_abs_difference(&bz) <= 1e-12);
        prop_assert!(one.max_abs_difference(&bo) <= 1e-12);
    }

    #[test]
    fn recorded_step_probabilities_follow_the_per_step_law(
        control in state(1), anc in ancilla(), seed in any::<u64>()
    ) {
        let cfg = CascadeConfig::new(6, anc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let run = run_cascade(&control, &cfg, &mut rng).unwrap();
        let mut c = control.clone();
        for (&o, &recorded) in run.outcomes.iter().zip(&run.step_probabilities) {
            let p0 = step_zero_probability(&c, &anc).unwrap();
            let want = if o == 0 { p0 } else { 1.0 - p0 };
            prop_assert!((recorded - want).abs() <= 1e-12);
            let (_, post) = cascade_step(&c, &anc).unwrap().project(1, o).unwrap();
            c = post.remove_measured_qubit(1).unwrap();
        }
        prop_assert!(c.approx_eq(&run.final_control, 1e-12));
    }

    #[test]
    fn total_variation_is_a_metric(a in distribution(5), b in distribution(5), c in distribution(5)) {
        let ab = total_variation(&a, &b).unwrap();
        prop_assert!((ab - total_variation(&b, &a).unwrap()).abs() <= 1e-15);
        prop_assert!(total_variation(&a, &a).unwrap() <= 1e-12);
        prop_assert!(ab <= total_variation(&a, &c).unwrap() + total_variation(&c, &b).unwrap() + 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        if ab <= 1e-12 {
            prop_assert!(a.max_abs_difference(&b) <= 2e-12);
        }
    }

    #[test]
    fn chi_square_ignores_bin_order(
        tallies in prop::collection::vec(50u64..500, 6),
        weights in prop::collection::vec(0.5f64..1.0, 6),
        perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let s: f64 = weights.iter().sum();
        let reference = CountDistribution::new(5, weights.iter().map(|w| w / s).collect()).unwrap();
        let emp = EmpiricalDistribution::from_tallies(5, tallies.clone()).unwrap();
        let base = chi_square_gof(&emp, &reference).unwrap();

        let p_tallies = perm.iter().map(|&i| tallies[i]).collect();
        let p_ref = CountDistribution::new(5, perm.iter().map(|&i| reference.get(i)).collect()).unwrap();
        let permuted = chi_square_gof(&EmpiricalDistribution::from_tallies(5, p_tallies).unwrap(), &p_ref).unwrap();
        prop_assert!((base.statistic - permuted.statistic).abs() <= 1e-9 * base.statistic.max(1.0));
        prop_assert_eq!(base.degrees_of_freedom, permuted.degrees_of_freedom);
    }

    #[test]
    fn llr_is_additive(
        xs in prop::collection::vec(0usize..=5, 0..20),
        ys in prop::collection::vec(0usize..=5, 0..20),
        a in distribution(5), b in distribution(5),
    ) {
        prop_assume!(a.mass().iter().chain(b.mass()).all(|&m| m > 1e-9));
        let joined: Vec<usize> = xs.iter().chain(&ys).copied().collect();
        let whole = log_likelihood_ratio(&joined, &a, &b).unwrap();
        let parts = log_likelihood_ratio(&xs, &a, &b).unwrap() + log_likelihood_ratio(&ys, &a, &b).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole.abs()));
    }
}
