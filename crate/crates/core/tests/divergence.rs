mod common;

use common::{model_histogram, parameter_sets};
use volmodel::divergence::{generalized_kl, standard_distance, tail_distance};
use volmodel::empirical::build_empirical;
use volmodel::fitting::fit_cdf;
use volmodel::synth::sample;
use volmodel::{Model, ModelKind, ModelParams};

#[test]
fn hand_computed_two_bin_values() {
    let p = [0.6, 0.4];
    let q = [0.5, 0.5];
    let dx = [1.0, 1.0];
    let standard = generalized_kl(&p, &q, &dx, &p).unwrap();
    let inv = [1.0 / 0.6, 1.0 / 0.4];
    let tail = generalized_kl(&p, &q, &dx, &inv).unwrap();
    assert!((standard - 0.020136).abs() < 1e-5, "{standard}");
    assert!((tail + 0.25398).abs() < 1e-5, "{tail}");
}

#[test]
fn self_distance_vanishes_for_both_weightings() {
    for kind in ModelKind::ALL {
        for params in parameter_sets(kind) {
            let model = Model::new(kind, params).unwrap();
            let lo = model.quantile(1e-4).unwrap();
            let hi = model.quantile(1.0 - 1e-4).unwrap();
            let emp = model_histogram(&model, lo, hi, 40);
            let d = standard_distance(kind, params, &emp).unwrap();
            let t = tail_distance(kind, params, &emp).unwrap();
            assert!(
                d.value.abs() < 1e-6,
                "{kind} {params:?}: standard {}",
                d.value
            );
            assert!(t.value.abs() < 1e-6, "{kind} {params:?}: tail {}", t.value);
            assert_eq!(d.bins_used, 40);
            assert!(t.bins_used >= 1 && t.bins_used < 40);
        }
    }
}

#[test]
fn lognormal_beats_weibull_on_lognormal_data() {
    let truth = ModelParams::new(0.0, 1.0);
    let mut wins = 0;
    for seed in 0..100 {
        let emp = build_empirical(
            &sample(ModelKind::LogNormal, truth, 5000, 1000 + seed).unwrap(),
            8,
        )
        .unwrap();
        let distance = |kind| {
            let fit = fit_cdf(kind, &emp).unwrap();
            standard_distance(kind, fit.params, &emp)
                .unwrap()
                .value
                .abs()
        };
        if distance(ModelKind::LogNormal) < distance(ModelKind::Weibull) {
            wins += 1;
        }
    }
    assert!(wins >= 90, "{wins}/100");
}

#[test]
fn inverse_gamma_has_smallest_tail_distance_on_its_own_data() {
    let truth = ModelParams::new(3.0, 2.0);
    let mut wins = 0;
    for seed in 0..100 {
        let emp = build_empirical(
            &sample(ModelKind::InverseGamma, truth, 5000, 2000 + seed).unwrap(),
            8,
        )
        .unwrap();
        let d: Vec<f64> = ModelKind::ALL
            .iter()
            .map(|&kind| {
                let fit = fit_cdf(kind, &emp).unwrap();
                tail_distance(kind, fit.params, &emp).unwrap().value.abs()
            })
            .collect();
        let ig = d[ModelKind::InverseGamma.index()];
        if d.iter().all(|&x| ig <= x) {
            wins += 1;
        }
    }
    assert!(wins >= 70, "{wins}/100");
}

#[test]
fn tail_ignores_samples_below_median() {
    let params = ModelParams::new(3.0, 2.0);
    let mut samples = sample(ModelKind::InverseGamma, params, 501, 3).unwrap();
    let base = build_empirical(&samples, 8).unwrap();
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let (min, median) = (sorted[0], base.median);

    // move every interior sample below the median somewhere else below it
    for s in samples.iter_mut() {
        if *s > min && *s < median {
            *s = min + 0.5 * (median - min) * (*s - min) / (median - min);
        }
    }
    let moved = build_empirical(&samples, 8).unwrap();
    assert_eq!(moved.median, base.median);
    assert_ne!(moved.bins, base.bins);
    for kind in ModelKind::ALL {
        let p = if kind == ModelKind::LogNormal {
            ModelParams::new(0.3, 0.6)
        } else {
            params
        };
        let a = tail_distance(kind, p, &base).unwrap();
        let b = tail_distance(kind, p, &moved).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits(), "{kind}");
        assert_eq!(a.bins_used, b.bins_used);
    }
}
