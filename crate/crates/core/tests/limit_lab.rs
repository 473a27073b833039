use fpp_core::limit::{
    estimate_xi_moments, sample_d_array, sample_q, sample_xi, sample_xi_alpha, sample_xi_batch,
    tail_q_direct, tail_q_lower_bound, tail_q_product, TailMethod, DEFAULT_PAIR_CAP,
};
use fpp_core::rng::{RandomSource, RandomStream};
use fpp_core::stats::{mean, variance};

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let cov: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (x.len() - 1) as f64;
    cov / (variance(x) * variance(y)).sqrt()
}

#[test]
fn d_array_cdf_at_zero_matches_gumbel_oracle() {
    let mut s = RandomStream::new(1);
    let draws = 100_000;
    let below = (0..draws)
        .filter(|_| sample_d_array(&mut s, 2).unwrap()[0] < 0.0)
        .count() as f64
        / draws as f64;
    // independent oracle: three raw Gumbels from a separate stream
    let mut o = RandomStream::new(2);
    let big = 1_000_000;
    let oracle = (0..big)
        .filter(|_| {
            let (a, b, c) = (o.gumbel(), o.gumbel(), o.gumbel());
            a + b < c
        })
        .count() as f64
        / big as f64;
    let se = (oracle * (1.0 - oracle) * (1.0 / draws as f64 + 1.0 / big as f64)).sqrt();
    assert!((below - oracle).abs() <= 3.0 * se, "{below} vs {oracle}");
}

#[test]
fn d_array_correlations() {
    let mut s = RandomStream::new(3);
    let rows: Vec<Vec<f64>> = (0..100_000)
        .map(|_| sample_d_array(&mut s, 4).unwrap())
        .collect();
    // entries in row-major upper-triangle order: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let shared = correlation(&col(0), &col(1));
    let disjoint = correlation(&col(0), &col(5));
    assert!(shared > 0.1, "shared {shared}");
    assert!(
        disjoint.abs() <= 3.0 / (rows.len() as f64).sqrt(),
        "disjoint {disjoint}"
    );
}

#[test]
fn xi_alpha_fewer_than_two_points() {
    let root = RandomStream::new(4);
    let draws = 100_000;
    let degenerate = (0..draws)
        .filter(|&r| sample_xi_alpha(&root.derive(r), 0.0).unwrap() == f64::NEG_INFINITY)
        .count() as f64
        / draws as f64;
    let expected = 2.0 * (-1f64).exp();
    assert!((degenerate - expected).abs() <= 0.01, "{degenerate}");
}

#[test]
fn xi_is_stable_at_default_truncation() {
    let samples = sample_xi_batch(&RandomStream::new(5), 10_000, 4.0, 4.0).unwrap();
    let stable = samples.iter().filter(|x| x.stable).count() as f64 / samples.len() as f64;
    assert!(stable >= 0.99, "stable fraction {stable}");
    for x in &samples {
        assert!(x.value >= x.inner_value);
        if x.stable {
            assert_eq!(x.value, x.inner_value);
        }
    }
}

#[test]
fn xi_with_larger_gamma_shifts_up() {
    // gamma = e^c moves every point up by c, so Xi moves up by 2c
    let root = RandomStream::new(6);
    let plain: Vec<f64> = (0..4000)
        .map(|r| {
            sample_xi(&root.derive(0).derive(r), 1.0, 4.0, 4.0)
                .unwrap()
                .value
        })
        .collect();
    let scaled: Vec<f64> = (0..4000)
        .map(|r| {
            sample_xi(&root.derive(1).derive(r), std::f64::consts::E, 4.0, 4.0)
                .unwrap()
                .value
        })
        .collect();
    let shift = mean(&scaled) - mean(&plain);
    let se = ((variance(&plain) + variance(&scaled)) / 4000.0).sqrt();
    assert!((shift - 2.0).abs() <= 4.0 * se, "shift {shift}, se {se}");
}

#[test]
fn q_truncation_is_robust() {
    let root = RandomStream::new(7);
    let draws = 10_000;
    let same = (0..draws)
        .filter(|&r| {
            let s = root.derive(r);
            sample_q(&s, 1e-6).unwrap() == sample_q(&s, 1e-3).unwrap()
        })
        .count() as f64
        / draws as f64;
    assert!(same >= 0.998, "identical fraction {same}");
}

#[test]
fn q_tail_is_nonincreasing() {
    let root = RandomStream::new(8);
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let direct: Vec<_> = grid
        .iter()
        .map(|&x| tail_q_direct(&root.derive(0), x, 1e-6, 20_000).unwrap())
        .collect();
    let product: Vec<_> = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            tail_q_product(&root.derive(1 + i as u64), x, DEFAULT_PAIR_CAP, 20_000).unwrap()
        })
        .collect();
    for est in [&direct, &product] {
        for w in est.windows(2) {
            let slack = 2.0 * (w[0].std_error + w[1].std_error);
            assert!(w[1].estimate <= w[0].estimate + slack);
            assert!((0.0..=1.0).contains(&w[0].estimate));
        }
    }
    let bounds: Vec<f64> = grid
        .iter()
        .map(|&x| tail_q_lower_bound(x).unwrap())
        .collect();
    assert!(bounds.windows(2).all(|w| w[1] <= w[0]));
    for (b, p) in bounds.iter().zip(&product) {
        assert!(*b <= p.estimate + 3.0 * p.std_error);
    }
    assert_eq!(direct[0].method, TailMethod::Direct);
    assert_eq!(product[0].method, TailMethod::ProductFormula);
}

#[test]
fn moment_intervals_shrink_like_root_n() {
    let root = RandomStream::new(9);
    let small = estimate_xi_moments(&root.derive(0), 1000, 4.0, 4.0).unwrap();
    let large = estimate_xi_moments(&root.derive(1), 4000, 4.0, 4.0).unwrap();
    let width = |ci: (f64, f64)| ci.1 - ci.0;
    let ratio = width(small.mean_ci) / width(large.mean_ci);
    assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
    assert!(small.variance > 0.0 && large.variance > 0.0);
    assert_eq!(large.replicates, 4000);
    assert_eq!(large.stable + large.unstable, 4000);
}
