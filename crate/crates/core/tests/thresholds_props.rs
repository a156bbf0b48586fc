use fprcal::harness::{calibrate, ConstraintChoice};
use fprcal::model::{FitOptions, FittedModel, InterClassDistances};
use fprcal::specfun::{noncentral_chi2_cdf, SeriesConfig};
use fprcal::synth::{self, euclidean, EmbeddingConfig};
use fprcal::thresholds::{
    class_data_threshold, generic_data_threshold, model_threshold, verify, Decision,
    ThresholdMethod, ThresholdSpec,
};
use proptest::prelude::*;

fn attained(distances: &[f64], tau: f64) -> f64 {
    distances.iter().filter(|&&d| d < tau).count() as f64 / distances.len() as f64
}

fn distinct_distances() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..100.0, 1..120).prop_filter("distinct values", |v| {
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        s.windows(2).all(|w| w[0] < w[1])
    })
}

#[test]
fn model_threshold_matches_sampled_impostors() {
    // Calibrate on one synthetic population, then draw 10^4 fresh impostor
    // patterns (100 per class) from the same population distribution.
    let cfg = EmbeddingConfig {
        dim: 18,
        n_classes: 100,
        sigma_between: 1.0,
        sigma_within: 0.3,
        seed: 12,
    };
    let pop = synth::generate(&cfg, 0).unwrap();
    let classes = synth::interclass_distances(&pop).unwrap();
    let model = calibrate(
        &classes,
        ConstraintChoice::default(),
        &FitOptions::default(),
        &[0.01],
        &[ThresholdMethod::Model],
    )
    .unwrap();
    let fresh = synth::generate(
        &EmbeddingConfig {
            n_classes: 10_000,
            seed: 99,
            ..cfg
        },
        0,
    )
    .unwrap();
    let mut accepted = 0usize;
    for (c, entry) in model.classes.iter().enumerate() {
        let tau = entry.threshold(ThresholdMethod::Model, 0.01).unwrap();
        let spec = ThresholdSpec::new(0.01, ThresholdMethod::Model, tau).unwrap();
        for imp in &fresh.training_patterns[c * 100..(c + 1) * 100] {
            if verify(euclidean(imp, &pop.training_patterns[c]), &spec) == Decision::Accept {
                accepted += 1;
            }
        }
    }
    let fpr = accepted as f64 / 10_000.0;
    assert!((fpr - 0.01).abs() <= 0.005, "attained {fpr}");
}

#[test]
fn model_threshold_closed_form_and_scaling() {
    let cfg = SeriesConfig::default();
    let m = FittedModel {
        dim: 2,
        sigma: 1.0,
        lambda: 0.0,
        rho: 1.0,
    };
    for eps in [0.001, 0.01, 0.2, 0.7] {
        let tau = model_threshold(&m, eps, &cfg).unwrap();
        assert!((tau - (-2.0 * (1.0f64 - eps).ln()).sqrt()).abs() < 1e-8);
        let doubled = FittedModel { sigma: 2.0, ..m };
        assert_eq!(model_threshold(&doubled, eps, &cfg).unwrap(), 2.0 * tau);
    }
}

#[test]
fn spec_examples() {
    let four = [1.0, 2.0, 3.0, 4.0];
    assert!((generic_data_threshold(&four, 0.1).unwrap() - 0.4).abs() < 1e-15);
    assert!((generic_data_threshold(&four, 0.375).unwrap() - 1.5).abs() < 1e-15);
    assert_eq!(generic_data_threshold(&four, 0.5).unwrap(), 2.0);
    let two = InterClassDistances::new("c", vec![10.0, 20.0]).unwrap();
    assert_eq!(class_data_threshold(&two, 0.25).unwrap(), 5.0);
    assert_eq!(class_data_threshold(&two, 0.75).unwrap(), 15.0);
    assert!(class_data_threshold(&two, 1e-12).unwrap() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn data_thresholds_attain_target_within_one_sample(d in distinct_distances(), eps in 0.0001f64..0.9999) {
        let n = d.len() as f64;
        let tau = generic_data_threshold(&d, eps).unwrap();
        prop_assert!((attained(&d, tau) - eps).abs() <= 1.0 / n + 1e-12);
    }

    #[test]
    fn data_thresholds_monotone_in_epsilon(d in distinct_distances(), a in 0.0001f64..0.9999, b in 0.0001f64..0.9999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ic = InterClassDistances::new("c", d.clone()).unwrap();
        prop_assert!(generic_data_threshold(&d, lo).unwrap() <= generic_data_threshold(&d, hi).unwrap());
        prop_assert!(class_data_threshold(&ic, lo).unwrap() <= class_data_threshold(&ic, hi).unwrap());
    }

    #[test]
    fn model_threshold_monotone_and_inverts_cdf(
        dim in 1u32..30, sigma in 0.1f64..10.0, lambda in 0.0f64..60.0,
        a in 0.0001f64..0.9999, b in 0.0001f64..0.9999,
    ) {
        let cfg = SeriesConfig::default();
        let m = FittedModel { dim, sigma, lambda, rho: 1.0 };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t_lo = model_threshold(&m, lo, &cfg).unwrap();
        let t_hi = model_threshold(&m, hi, &cfg).unwrap();
        prop_assert!(t_lo <= t_hi);
        let back = noncentral_chi2_cdf((t_lo / sigma).powi(2), dim as f64, lambda, &cfg).unwrap();
        prop_assert!((back - lo).abs() <= 1e-6);
    }

    #[test]
    fn thresholds_ignore_input_order(d in distinct_distances(), eps in 0.0001f64..0.9999, seed in any::<u64>()) {
        let mut shuffled = d.clone();
        // Fisher-Yates with a simple LCG keeps the shuffle reproducible.
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(generic_data_threshold(&d, eps).unwrap(), generic_data_threshold(&shuffled, eps).unwrap());
    }

    #[test]
    fn class_threshold_on_pooled_list_equals_generic(d in distinct_distances(), eps in 0.0001f64..0.9999) {
        let ic = InterClassDistances::new("all", d.clone()).unwrap();
        prop_assert_eq!(class_data_threshold(&ic, eps).unwrap(), generic_data_threshold(&d, eps).unwrap());
    }

    #[test]
    fn verify_is_strict(tau in 0.001f64..100.0, q in 0.0f64..200.0) {
        let spec = ThresholdSpec::new(0.01, ThresholdMethod::GenericData, tau).unwrap();
        let want = if q < tau { Decision::Accept } else { Decision::Reject };
        prop_assert_eq!(verify(q, &spec), want);
        prop_assert_eq!(verify(tau, &spec), Decision::Reject);
    }
}
