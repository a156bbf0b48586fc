mod common;

use common::{ks_critical_001, ks_statistic, linspace};
use fprcal::specfun::{noncentral_chi2_cdf, SeriesConfig};
use fprcal::synth::{
    self, euclidean, interclass_distances, sample_noncentral_chi2, EmbeddingConfig,
};

fn config(dim: usize, seed: u64) -> EmbeddingConfig {
    EmbeddingConfig {
        dim,
        n_classes: 100,
        sigma_between: 1.0,
        sigma_within: 0.3,
        seed,
    }
}

#[test]
fn zero_scatter_puts_patterns_on_centres() {
    let cfg = EmbeddingConfig {
        sigma_within: 0.0,
        ..config(5, 2)
    };
    let pop = synth::generate(&cfg, 3).unwrap();
    for (c, centre) in pop.class_centers.iter().enumerate() {
        assert_eq!(&pop.training_patterns[c], centre);
        assert!(pop.query_patterns[c].iter().all(|q| q == centre));
    }
}

#[test]
fn two_classes_without_scatter_see_their_centre_distance() {
    let cfg = EmbeddingConfig {
        n_classes: 2,
        sigma_within: 0.0,
        ..config(7, 4)
    };
    let pop = synth::generate(&cfg, 0).unwrap();
    let d = euclidean(&pop.class_centers[0], &pop.class_centers[1]);
    let lists = interclass_distances(&pop).unwrap();
    assert_eq!(lists[0].distances, vec![d]);
    assert_eq!(lists[1].distances, vec![d]);
}

#[test]
fn same_seed_same_population() {
    let a = synth::generate(&config(18, 8), 6).unwrap();
    let b = synth::generate(&config(18, 8), 6).unwrap();
    assert_eq!(a, b);
    let c = synth::generate(&config(18, 9), 6).unwrap();
    assert_ne!(a, c);
}

#[test]
fn mean_squared_centre_distance() {
    for seed in 0..5 {
        let pop = synth::generate(&config(18, seed), 0).unwrap();
        let centres = &pop.class_centers;
        let mut sum = 0.0;
        let mut count = 0.0;
        for i in 0..centres.len() {
            for j in i + 1..centres.len() {
                sum += euclidean(&centres[i], &centres[j]).powi(2);
                count += 1.0;
            }
        }
        let mean = sum / count;
        assert!((mean / 36.0 - 1.0).abs() < 0.05, "seed {seed}: {mean}");
    }
}

#[test]
fn label_permutation_keeps_distance_multiset() {
    let pop = synth::generate(&config(10, 3), 0).unwrap();
    let mut permuted = pop.clone();
    permuted.training_patterns.reverse();
    permuted.class_centers.reverse();
    let collect = |p| {
        let mut all: Vec<f64> = interclass_distances(p)
            .unwrap()
            .into_iter()
            .flat_map(|c| c.distances)
            .collect();
        all.sort_by(f64::total_cmp);
        all
    };
    assert_eq!(collect(&pop), collect(&permuted));
}

#[test]
fn interclass_squares_follow_noncentral_chi2() {
    // Given class c's training pattern t_c, every other training pattern is
    // N(0, s^2 I) with s^2 = sigma_between^2 + sigma_within^2, so
    // (|t_c - t_j| / s)^2 ~ chi'^2(dim, |t_c|^2 / s^2).
    let series = SeriesConfig::default();
    for dim in [15, 18, 22] {
        let cfg = config(dim, 40 + dim as u64);
        let pop = synth::generate(&cfg, 0).unwrap();
        let s = cfg.pattern_scale();
        let lists = interclass_distances(&pop).unwrap();
        let mut rejections = 0;
        for (c, list) in lists.iter().enumerate() {
            let lambda = pop.training_patterns[c].iter().map(|v| v * v).sum::<f64>() / (s * s);
            let x: Vec<f64> = list.distances.iter().map(|d| (d / s).powi(2)).collect();
            let ks = ks_statistic(&x, |v| {
                noncentral_chi2_cdf(v, dim as f64, lambda, &series).unwrap()
            });
            if ks > ks_critical_001(x.len()) {
                rejections += 1;
            }
        }
        // 100 tests at 1% significance: more than 6 rejections has probability
        // below 0.001 under the null.
        assert!(
            rejections <= 6,
            "dim {dim}: {rejections} of 100 KS tests rejected"
        );
    }
}

#[test]
fn sampler_moments() {
    let n = 100_000;
    let x = sample_noncentral_chi2(1, 0.0, n, 1).unwrap();
    let mean = x.iter().sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt(), "{mean}");

    let n = 1_000_000;
    let x = sample_noncentral_chi2(18, 9.0, n, 2).unwrap();
    let mean = x.iter().sum::<f64>() / n as f64;
    assert!((mean - 27.0).abs() < 0.1, "{mean}");
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = 2.0 * (18.0 + 18.0);
    // Var of the sample variance uses the fourth central moment of chi'^2:
    // mu4 = 12 (k + 4 lambda) + 3 (2 (k + 2 lambda))^2.
    let mu4 = 12.0 * (18.0 + 36.0) + 3.0 * want * want;
    let se = ((mu4 - want * want) / n as f64).sqrt();
    assert!((var - want).abs() < 3.0 * se, "{var} vs {want} (se {se})");
}

#[test]
fn sampler_matches_series_cdf() {
    let n = 1_000_000;
    let series = SeriesConfig::default();
    let mut x = sample_noncentral_chi2(18, 9.0, n, 3).unwrap();
    x.sort_by(f64::total_cmp);
    let mut sup: f64 = 0.0;
    for g in linspace(1.0, 90.0, 400) {
        let emp = x.partition_point(|&v| v <= g) as f64 / n as f64;
        let model = noncentral_chi2_cdf(g, 18.0, 9.0, &series).unwrap();
        sup = sup.max((emp - model).abs());
    }
    assert!(sup < 0.002, "{sup}");
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(synth::generate(
        &EmbeddingConfig {
            dim: 0,
            ..config(3, 0)
        },
        0
    )
    .is_err());
    assert!(synth::generate(
        &EmbeddingConfig {
            n_classes: 1,
            ..config(3, 0)
        },
        0
    )
    .is_err());
    assert!(synth::generate(
        &EmbeddingConfig {
            sigma_between: 0.0,
            ..config(3, 0)
        },
        0
    )
    .is_err());
    assert!(synth::generate(
        &EmbeddingConfig {
            sigma_within: -1.0,
            ..config(3, 0)
        },
        0
    )
    .is_err());
    assert!(sample_noncentral_chi2(0, 1.0, 5, 0).is_err());
    assert!(sample_noncentral_chi2(3, -1.0, 5, 0).is_err());
}
