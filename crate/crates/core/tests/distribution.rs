use ofjackson::quadrature::integrate_from_zero;
use ofjackson::*;
use proptest::prelude::*;

const MU_L: f64 = 1.0 / 9.8e-6;
const MU_C: f64 = 1.0 / 240e-6;

fn reference(lambda: f64, q: f64) -> SojournDistribution {
    let node = NodeParams::new(lambda, MU_L, q).unwrap();
    let ctrl = ControllerParams::new(MU_C).unwrap();
    build_distribution(&node, &ctrl, &solve_rates(&node, &ctrl)).unwrap()
}

// Frozen from high-precision quadrature of the convolution
// Exp(a_l) mixed with Erlang(2, a_l) * Exp(a_c), independent of the
// partial-fraction coefficients.
#[test]
fn frozen_deadline_probabilities() {
    for (lambda, q, expected) in [
        (15_000.0, 0.2, 0.885_228_541_195_340),
        (2000.0, 1.0, 0.646_063_706_509_428),
        (5000.0, 0.5, 0.774_831_864_800_698),
    ] {
        let p = reference(lambda, q).prob_within_deadline(0.5e-3).unwrap();
        assert!((p - expected).abs() < 1e-12, "λ={lambda} q={q}: {p}");
    }
}

#[test]
fn unstable_input_rejected() {
    let node = NodeParams::new(30_000.0, MU_L, 0.2).unwrap();
    let ctrl = ControllerParams::new(MU_C).unwrap();
    assert!(build_distribution(&node, &ctrl, &solve_rates(&node, &ctrl)).is_err());
}

#[test]
fn continuity_across_degeneracy() {
    for q in [0.1, 0.5, 1.0] {
        let a = 5e4;
        let near = SojournDistribution::from_rates(a, a * (1.0 + 1e-6), q);
        let exact = SojournDistribution::from_rates(a, a, q);
        assert!(exact.degenerate && !near.degenerate);
        let h = exact.integration_horizon();
        for k in 0..100 {
            let t = h * k as f64 / 99.0;
            assert!((near.ccdf(t).unwrap() - exact.ccdf(t).unwrap()).abs() <= 1e-5);
            assert!((near.pdf(t).unwrap() - exact.pdf(t).unwrap()).abs() / a <= 1e-5);
        }
    }
}

fn any_distribution() -> impl Strategy<Value = SojournDistribution> {
    (2.0..6.0f64, -3.0..3.0f64, 0.0..=1.0f64).prop_map(|(log_a, log_ratio, q)| {
        let a = 10f64.powf(log_a);
        SojournDistribution::from_rates(a, a * 10f64.powf(log_ratio), q)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn coefficients_sum_to_one(d in any_distribution()) {
        // the sum can be no more exact than its largest terms
        let scale = 1f64.max(d.b1.abs() + d.b2.abs() + d.d.abs());
        prop_assert!((d.b1 + d.b2 + d.d - 1.0).abs() <= 1e-12 * scale || d.degenerate);
    }

    #[test]
    fn density_integrates_to_one(d in any_distribution()) {
        let mass = integrate_from_zero(|t| d.pdf(t).unwrap(), d.integration_horizon(), 1e-12);
        prop_assert!((mass - 1.0).abs() <= 1e-9, "{}", mass);
    }

    #[test]
    fn ccdf_integrates_to_mean(d in any_distribution()) {
        let m = integrate_from_zero(|t| d.ccdf(t).unwrap(), d.integration_horizon(), 1e-10 * d.mean());
        prop_assert!((m - d.mean()).abs() <= 1e-6 * d.mean());
    }

    #[test]
    fn laplace_matches_density(d in any_distribution(), k in 0usize..3) {
        let s = [0.5, 1.0, 2.0][k] * d.a_switch;
        let numeric = integrate_from_zero(|t| (-s * t).exp() * d.pdf(t).unwrap(), d.integration_horizon(), 1e-12);
        prop_assert!((numeric - d.laplace(s)).abs() <= 1e-6);
    }

    #[test]
    fn density_is_derivative_of_ccdf(d in any_distribution(), u in 0.01..5.0f64) {
        let t = u * d.mean();
        let h = 1e-5 * t;
        let slope = (d.ccdf(t - h).unwrap() - d.ccdf(t + h).unwrap()) / (2.0 * h);
        let pdf = d.pdf(t).unwrap();
        prop_assert!((slope - pdf).abs() <= 1e-5 * d.a_switch.max(d.a_controller), "{} vs {}", slope, pdf);
    }

    #[test]
    fn ccdf_is_a_survival_function(d in any_distribution(), u in 0.0..10.0f64, v in 0.0..10.0f64) {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let (a, b) = (d.ccdf(lo * d.mean()).unwrap(), d.ccdf(hi * d.mean()).unwrap());
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b <= a + 1e-15);
        prop_assert!(d.pdf(lo * d.mean()).unwrap() >= -1e-9 * d.a_switch);
    }

    #[test]
    fn quantile_round_trip(d in any_distribution(), p in 0.001..0.999f64) {
        let t = d.quantile(p).unwrap();
        prop_assert!((1.0 - d.ccdf(t).unwrap() - p).abs() <= 1e-9);
    }
}
