use fpp_core::rng::{
    sample_exponential, sample_gumbel, sample_ppp, EdgeWeightOracle, RandomSource, RandomStream,
};
use fpp_core::stats::{
    chi_square_critical, chi_square_gof, gumbel_cdf, ks_against_cdf, ks_critical_two_sample,
    ks_two_sample, poisson_pmf, EmpiricalDistribution, IntegerHistogram,
};

fn uniforms(mut s: RandomStream, count: usize) -> EmpiricalDistribution {
    EmpiricalDistribution::new((0..count).map(|_| s.uniform()).collect()).unwrap()
}

#[test]
fn sibling_streams_look_alike() {
    let root = RandomStream::new(2024);
    let a = uniforms(root.derive(0), 10_000);
    let b = uniforms(root.derive(1), 10_000);
    let ks = ks_two_sample(&a, &b);
    assert!(
        ks <= ks_critical_two_sample(10_000, 10_000, 0.01),
        "ks {ks}"
    );
    // and they are not the same sequence
    assert_ne!(a.samples(), b.samples());
}

#[test]
fn many_siblings_pass_pairwise_ks() {
    let root = RandomStream::new(77).derive(3);
    let streams: Vec<_> = (0..6).map(|i| uniforms(root.derive(i), 5_000)).collect();
    let limit = ks_critical_two_sample(5_000, 5_000, 0.01);
    let mut failures = 0;
    for i in 0..streams.len() {
        for j in i + 1..streams.len() {
            if ks_two_sample(&streams[i], &streams[j]) > limit {
                failures += 1;
            }
        }
    }
    // 15 pairs at level 0.01: one rejection is already unlikely
    assert!(failures <= 1, "{failures} rejections");
}

#[test]
fn stream_replay_is_bit_identical() {
    let s = RandomStream::new(5).derive(9).derive(2);
    let mut a = s.clone();
    let mut b = s.clone();
    for _ in 0..1000 {
        assert_eq!(a.next_u64(), b.next_u64());
    }
    assert_eq!(s.uniform_at(17), s.clone().uniform_at(17));
}

#[test]
fn gumbel_is_minus_log_exponential() {
    let root = RandomStream::new(11);
    let mut g = root.derive(0);
    let mut e = root.derive(1);
    let gumbels: Vec<f64> = (0..10_000).map(|_| sample_gumbel(&mut g)).collect();
    let transformed: Vec<f64> = (0..10_000)
        .map(|_| -sample_exponential(&mut e, 1.0).unwrap().ln())
        .collect();
    let ks = ks_two_sample(
        &EmpiricalDistribution::new(gumbels).unwrap(),
        &EmpiricalDistribution::new(transformed).unwrap(),
    );
    assert!(ks <= 0.02, "ks {ks}");
}

#[test]
fn oracle_weights_are_exponential_mean_n() {
    let n = 200;
    let oracle = EdgeWeightOracle::new(n, RandomStream::new(8)).unwrap();
    let mut weights = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            weights.push(oracle.edge_weight(i, j).unwrap());
        }
    }
    assert_eq!(weights.len(), 19_900);
    let ks = ks_against_cdf(&EmpiricalDistribution::new(weights).unwrap(), |x| {
        1.0 - (-x / n as f64).exp()
    })
    .unwrap();
    assert!(ks <= 0.02, "ks {ks}");
}

fn count_histogram(gamma: f64, a: f64, realizations: u64, seed: u64) -> IntegerHistogram {
    let root = RandomStream::new(seed);
    let mut h = IntegerHistogram::new();
    for r in 0..realizations {
        let mut s = root.derive(r);
        h.add(sample_ppp(&mut s, gamma, -a).unwrap().len() as i64);
    }
    h
}

#[test]
fn ppp_counts_are_poisson() {
    for (gamma, a) in [(1.0, 0.0), (1.0, 1.0), (2.0, 1.0)] {
        let mean = gamma * f64::exp(a);
        let h = count_histogram(gamma, a, 100_000, 40);
        let (stat, dof) = chi_square_gof(&h, |k| poisson_pmf(k, mean).unwrap());
        let critical = chi_square_critical(dof, 0.01);
        assert!(
            stat <= critical,
            "gamma {gamma}, A {a}: chi2 {stat} > {critical} on {dof} dof"
        );
    }
}

#[test]
fn ppp_maximum_shifts_with_gamma() {
    let root = RandomStream::new(42);
    let tops: Vec<f64> = (0..20_000)
        .map(|r| {
            let mut s = root.derive(r);
            sample_ppp(&mut s, 2.0, -6.0).unwrap()[0]
        })
        .collect();
    // the top point of intensity 2 e^{-y} is a Gumbel shifted by log 2
    let ks = ks_against_cdf(&EmpiricalDistribution::new(tops).unwrap(), |y| {
        gumbel_cdf(y - 2f64.ln())
    })
    .unwrap();
    assert!(ks <= 1.63 / (20_000f64).sqrt(), "ks {ks}");
}
