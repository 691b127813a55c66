use proptest::prelude::*;

use turnover::families::{derive_intensity, IntensityParams, OvertConfig, SafeguardResponseConfig, Safeguards, VariantConfig};
use turnover::microsim::SimSpec;
use turnover::model::{pwf, pwf_k, total_failure, total_failure_max, Architecture, Model};
use turnover::thresholds::{intensity_cutoff, s_flip, s_flip_bisection, surface_check, x_crit, ThresholdTarget};

fn safeguards() -> impl Strategy<Value = Safeguards> {
    (0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0).prop_map(|(r_m, r_kappa, r_q)| Safeguards { r_m, r_kappa, r_q })
}

proptest! {
    #[test]
    fn x_crit_solves_the_threshold(p_bar in 0.05f64..0.95, frac in 0.0f64..0.9, eta in 0.1f64..5.0, s in 0.05f64..1.0) {
        let target = ThresholdTarget::new(p_bar).unwrap();
        let ip = IntensityParams { mu0: frac * intensity_cutoff(&target, 1), eta };
        let xc = x_crit(&target, &ip, s).unwrap();
        prop_assert!((pwf(ip.mu0 + eta * xc * s) - p_bar).abs() <= 1e-9);
        let v = VariantConfig::default();
        prop_assert!(!surface_check(&Architecture::new(xc - 1e-6, s), &ip, &v, &target).exploitable);
        prop_assert!(surface_check(&Architecture::new(xc + 1e-6, s), &ip, &v, &target).exploitable);
    }

    #[test]
    fn probabilities_rise_with_scale_and_codification(x in 0.01f64..0.98, s in 0.01f64..0.98, sg in safeguards()) {
        let m = Model::new(Default::default(), sg, None, Default::default(), 10.0).unwrap();
        let d = 1e-2;
        prop_assert!(m.pwf(x + d, s) > m.pwf(x, s));
        prop_assert!(m.pwf(x, s + d) > m.pwf(x, s));
        prop_assert!(m.search_pwf(x + d, s).unwrap() > m.search_pwf(x, s).unwrap());
        prop_assert!(m.search_pwf(x, s + d).unwrap() > m.search_pwf(x, s).unwrap());
    }

    #[test]
    fn safeguards_never_raise_probabilities(x in 0.01f64..1.0, s in 0.01f64..1.0, sg in safeguards(), j in 0usize..3) {
        let m = Model::new(Default::default(), sg, None, Default::default(), 10.0).unwrap();
        let more = m.with_safeguards(sg.with_component(j, sg.component(j) + 0.25)).unwrap();
        prop_assert!(more.pwf(x, s) <= m.pwf(x, s));
        prop_assert!(more.search_pwf(x, s).unwrap() <= m.search_pwf(x, s).unwrap());
    }

    #[test]
    fn max_aggregator_is_dominated(p in 0.0f64..=1.0, f in 0.0f64..=1.0) {
        let mx = total_failure_max(p, f);
        prop_assert!(mx <= total_failure(p, f));
        prop_assert!(mx >= p.max(f) - 1e-15);
    }

    #[test]
    fn flip_closed_form_matches_bisection(f0 in 0.01f64..0.99, b in 0.1f64..6.0, x in 0.001f64..1.0, sg in safeguards()) {
        let overt = OvertConfig { f0, b, c_m: 0.0, c_k: 0.0, c_q: 0.0, a_x: 0.0 };
        let ip = derive_intensity(&sg, &SafeguardResponseConfig::default()).unwrap();
        match (s_flip(x, &ip, &sg, &overt), s_flip_bisection(x, &ip, &sg, &overt)) {
            (Some(a), Some(r)) => prop_assert!((a - r.value).abs() <= 1e-8),
            (None, None) => {}
            (a, r) => prop_assert!(false, "closed {a:?} vs bisection {r:?}"),
        }
    }

    #[test]
    fn k_move_probability_falls_with_k(mu in 0.0f64..20.0, k in 1u32..6) {
        let a = pwf_k(mu, k);
        let b = pwf_k(mu, k + 1);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn simulation_closed_form_is_a_probability(n in 0u64..30, m in 1u64..6, p in 0.0f64..0.5, mu0 in 0.0f64..3.0, k in 1u32..4) {
        let spec = SimSpec { n_interfaces: n, attempts_per_interface: m, p_attempt: p, mu0, k_required: k, ..SimSpec::default() };
        let c = spec.closed_form();
        prop_assert!((0.0..=1.0).contains(&c));
        let more = SimSpec { p_attempt: p + 0.01, ..spec };
        prop_assert!(more.closed_form() >= c - 1e-12);
    }
}
