use qprobe::noise::{cdf_alpha, sample_rtn_trajectory, sample_switching_rate, trajectory_ensemble, ColoredParams, RtnParams};
use qprobe::rng::stream;

const SEED: u64 = 7_350_112;

/// Kolmogorov–Smirnov distance between a sample and a CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

// Critical value at significance 0.001.
fn ks_critical(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

#[test]
fn waiting_times_are_exponential() {
    let gamma = 4.0;
    let p = RtnParams::new(gamma).unwrap();
    let mut rng = stream(SEED, 0);
    let mut waits = Vec::new();
    while waits.len() < 20_000 {
        let traj = sample_rtn_trajectory(&p, 5.0, &mut rng).unwrap();
        // Waits starting in the first half are censored with probability e^{-10}.
        let mut last = 0.0;
        for &s in &traj.switch_times {
            if last < 2.5 {
                waits.push(s - last);
            }
            last = s;
        }
    }
    let n = waits.len();
    let d = ks_distance(waits, |x| -(-gamma * x).exp_m1());
    assert!(d < ks_critical(n), "KS distance {d} with n = {n}");
}

#[test]
fn switch_counts_are_poisson() {
    let (gamma, horizon) = (2.5, 3.0);
    let ens = trajectory_ensemble(&RtnParams::new(gamma).unwrap(), horizon, SEED, 40_000).unwrap();
    let counts: Vec<f64> = ens.iter().map(|r| r.switch_times.len() as f64).collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let lambda = gamma * horizon;
    assert!((mean - lambda).abs() < 4.0 * (lambda / n).sqrt(), "mean {mean}");
    // Var of the sample variance of a Poisson(λ) sample is about (λ + 2λ²)/n.
    assert!((var - lambda).abs() < 4.0 * ((lambda + 2.0 * lambda * lambda) / n).sqrt(), "variance {var}");
}

#[test]
fn autocorrelation_decays_at_twice_the_rate() {
    let gamma = 4.0;
    let p = RtnParams::new(gamma).unwrap();
    let origins: Vec<f64> = (0..7).map(|i| 0.25 * i as f64).collect();
    let lags: Vec<f64> = (0..=6).map(|k| 0.05 * k as f64).collect();
    let mut acc = vec![0.0; lags.len()];
    let trajectories = 60_000;
    let mut rng = stream(SEED, 1);
    for _ in 0..trajectories {
        let traj = sample_rtn_trajectory(&p, 2.0, &mut rng).unwrap();
        for &s in &origins {
            let c0 = f64::from(traj.value_at(s));
            for (a, &t) in acc.iter_mut().zip(&lags) {
                *a += c0 * f64::from(traj.value_at(s + t));
            }
        }
    }
    let norm = (trajectories * origins.len()) as f64;
    let pts: Vec<(f64, f64)> = lags.iter().zip(&acc).map(|(&t, &a)| (t, (a / norm).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 2.0 * gamma).abs() < 0.03 * 2.0 * gamma, "fitted decay rate {}", -slope);
    assert!((acc[0] / norm - 1.0).abs() < 1e-12);
}

#[test]
fn trajectories_start_symmetric() {
    let ens = trajectory_ensemble(&RtnParams::new(1.0).unwrap(), 1.0, SEED, 20_000).unwrap();
    let plus = ens.iter().filter(|r| r.initial_value == 1).count() as f64;
    assert!((plus / 20_000.0 - 0.5).abs() < 4.0 * (0.25 / 20_000.0f64).sqrt());
}

#[test]
fn switching_rates_follow_the_power_law() {
    for (k, &alpha) in [0.5, 1.0, 1.5, 2.0].iter().enumerate() {
        let p = ColoredParams::with_default_window(alpha, 1).unwrap();
        let mut rng = stream(SEED, 10 + k as u64);
        let xs: Vec<f64> = (0..20_000).map(|_| sample_switching_rate(&p, &mut rng).unwrap()).collect();
        let d = ks_distance(xs, |g| cdf_alpha(g, &p).unwrap());
        assert!(d < ks_critical(20_000), "alpha {alpha}: KS distance {d}");
    }
}
