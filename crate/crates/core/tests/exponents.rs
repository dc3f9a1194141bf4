mod common;

use channel_nts::baselines::bsc;
use channel_nts::exponents::{
    brute_force_update_exponent, constraint_value, divergence_from_channel, e0_hat, error_exponent, threshold_t0,
    u_rho, update_exponent, ExponentOptions,
};
use channel_nts::nts::init_phi_from_channel;
use channel_nts::prob::{compose, mutual_information, Distribution, Orientation, StochasticMatrix};
use proptest::prelude::*;

use common::{lagrangian_argmin_2x2, primal_error_exponent, random_instance};

fn opts() -> ExponentOptions {
    ExponentOptions::default()
}

#[test]
fn error_exponent_matches_primal_form() {
    for seed in 0..6 {
        let (q, _, p) = random_instance(seed, 2, 2);
        let i = mutual_information(&q, &p).unwrap();
        for frac in [0.0, 0.3, 0.7, 1.2] {
            let r = frac * i;
            let dual = error_exponent(r, &q, &p).unwrap().value;
            let primal = primal_error_exponent(r, &q, &p);
            assert!((dual - primal).abs() < 1e-6, "seed {seed} R {r}: {dual} vs {primal}");
        }
    }
}

#[test]
fn u_rho_is_lagrangian_argmin() {
    let p = bsc(0.1).unwrap();
    let q = Distribution::uniform(2).unwrap();
    let phi = init_phi_from_channel(&q, &p).unwrap();
    let u = u_rho(0.5, &q, &phi, &p).unwrap();
    let grid = lagrangian_argmin_2x2(0.5, &q, &phi, &p);
    let l1: f64 = u.probs().iter().zip(&grid).map(|(a, b)| (a - b).abs()).sum();
    assert!(l1 < 1e-3, "{l1}");
    for seed in 0..4 {
        let (q, phi, p) = random_instance(seed, 2, 2);
        let u = u_rho(0.8, &q, &phi, &p).unwrap();
        let grid = lagrangian_argmin_2x2(0.8, &q, &phi, &p);
        let l1: f64 = u.probs().iter().zip(&grid).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 < 1e-3, "seed {seed}: {l1}");
    }
}

#[test]
fn dual_matches_brute_force_on_3x3() {
    for seed in 0..5 {
        let (q, phi, p) = random_instance(100 + seed, 3, 3);
        let t = threshold_t0(&q, &phi, &p).unwrap() + 0.05;
        let dual = update_exponent(t, &q, &phi, &p, &opts()).unwrap();
        let brute = brute_force_update_exponent(t, &q, &phi, &p, 8).unwrap();
        assert_eq!(dual.feasible, brute.feasible);
        if dual.feasible {
            assert!(
                (dual.value - brute.value).abs() < 1e-3,
                "seed {seed}: {} vs {}",
                dual.value,
                brute.value
            );
        }
    }
}

#[test]
fn point_mass_input_keeps_its_row() {
    let p = bsc(0.2).unwrap();
    let q = Distribution::point_mass(2, 1).unwrap();
    let phi = StochasticMatrix::new(vec![vec![0.3, 0.7], vec![0.6, 0.4]], Orientation::XGivenY).unwrap();
    for rho in [0.0, 0.5, 3.0] {
        let u = u_rho(rho, &q, &phi, &p).unwrap();
        let ux = u.x_marginal();
        assert_eq!(ux.get(0), 0.0);
        assert!((ux.get(1) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn perturbed_stall_limit_breaks_identity() {
    use channel_nts::nts::{
        nts_run, stall_level_identity, stall_level_identity_at, RunOptions, StallIdentity, SystemState,
    };
    let p = bsc(0.1).unwrap();
    let start = SystemState::from_channel(Distribution::uniform(2).unwrap(), &p).unwrap();
    let out = nts_run(&start, 0.45, &p, &RunOptions::default()).unwrap();
    let StallIdentity::Report { rho_bar, gap, .. } = stall_level_identity(&out, &p).unwrap() else {
        panic!("expected a stalled run");
    };
    assert!(gap < 1e-4);
    let skewed = Distribution::new(vec![0.35, 0.65]).unwrap();
    let StallIdentity::Report { gap, .. } =
        stall_level_identity_at(rho_bar, &skewed, 0.45, out.final_e_hat, &p).unwrap()
    else {
        panic!("slope in range");
    };
    assert!(gap > 1e-4, "{gap}");
}

fn instance_strategy() -> impl Strategy<Value = (u64, usize, usize)> {
    (0u64..10_000, 2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exponent_monotone_and_convex_in_t((seed, nx, ny) in instance_strategy(), a in 0.0f64..0.4, b in 0.0f64..0.4) {
        let (q, phi, p) = random_instance(seed, nx, ny);
        let t0 = threshold_t0(&q, &phi, &p).unwrap();
        let (t1, t2) = (t0 - 0.05 + a.min(b), t0 - 0.05 + a.max(b));
        let e = |t: f64| update_exponent(t, &q, &phi, &p, &opts()).unwrap();
        let (s1, s2, sm) = (e(t1), e(t2), e(0.5 * (t1 + t2)));
        prop_assert!(s1.value <= s2.value + 1e-9);
        if s1.feasible && s2.feasible {
            prop_assert!(sm.value <= 0.5 * (s1.value + s2.value) + 1e-9);
        }
    }

    #[test]
    fn solution_is_consistent((seed, nx, ny) in instance_strategy(), dt in -0.2f64..0.5) {
        let (q, phi, p) = random_instance(seed, nx, ny);
        let t = threshold_t0(&q, &phi, &p).unwrap() + dt;
        let s = update_exponent(t, &q, &phi, &p, &opts()).unwrap();
        if s.feasible {
            let d = divergence_from_channel(&s.minimizer, &q, &p).unwrap();
            prop_assert!((d - s.value).abs() <= 1e-9, "D {d} vs value {}", s.value);
            prop_assert!(s.constraint_value >= t - 1e-9);
            prop_assert!((constraint_value(&s.minimizer, &phi).unwrap() - s.constraint_value).abs() < 1e-12);
            if s.value == 0.0 {
                let qp = compose(&q, &p).unwrap();
                prop_assert!(s.minimizer.l1_distance(&qp).unwrap() <= 1e-9);
            }
        }
    }

    #[test]
    fn zero_exactly_below_t0((seed, nx, ny) in instance_strategy(), dt in 1e-6f64..0.3) {
        let (q, phi, p) = random_instance(seed, nx, ny);
        let t0 = threshold_t0(&q, &phi, &p).unwrap();
        prop_assert_eq!(update_exponent(t0 - dt, &q, &phi, &p, &opts()).unwrap().value, 0.0);
        prop_assert!(update_exponent(t0 + dt, &q, &phi, &p, &opts()).unwrap().value > 0.0);
    }

    #[test]
    fn weak_duality((seed, nx, ny) in instance_strategy(), dt in 0.0f64..0.3, rho in 0.0f64..20.0) {
        let (q, phi, p) = random_instance(seed, nx, ny);
        let t = threshold_t0(&q, &phi, &p).unwrap() + dt;
        let s = update_exponent(t, &q, &phi, &p, &opts()).unwrap();
        let lower = e0_hat(rho, &q, &phi, &p).unwrap() + rho * t;
        prop_assert!(s.value >= lower - 1e-9);
    }

    #[test]
    fn tilted_constraint_grows_with_rho((seed, nx, ny) in instance_strategy()) {
        let (q, phi, p) = random_instance(seed, nx, ny);
        let mut last = f64::NEG_INFINITY;
        for k in 0..40 {
            let rho = 0.25 * k as f64;
            let c = constraint_value(&u_rho(rho, &q, &phi, &p).unwrap(), &phi).unwrap();
            prop_assert!(c >= last - 1e-12);
            last = c;
        }
    }

    #[test]
    fn error_exponent_vanishes_at_mutual_information((seed, nx, ny) in instance_strategy(), extra in 0.0f64..1.0) {
        let (q, _, p) = random_instance(seed, nx, ny);
        let i = mutual_information(&q, &p).unwrap();
        prop_assert_eq!(error_exponent(i + extra, &q, &p).unwrap().value, 0.0);
        if i > 1e-6 {
            let r = error_exponent(0.5 * i, &q, &p).unwrap();
            prop_assert!(r.value > 0.0);
            prop_assert!((0.0..=1.0).contains(&r.rho_star));
        }
    }
}
