//! Oracle-equivalence tests for the regression and correlation machinery.
//!
//! The oracle path is deliberately independent of the implementation: it
//! z-scores with its own code, solves the normal equations by Cholesky
//! factorization instead of Gauss-Jordan inversion, and takes t-tail
//! probabilities from statrs instead of the in-crate incomplete beta.

use econ_core::metrics::{
    agent_regression, pearson, student_t_two_sided_p, RegressionData, REGRESSOR_NAMES,
};
use econ_core::rng::derive_stream;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn oracle_zscore(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Cholesky factorization of a symmetric positive-definite matrix.
fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = l[i][..j].iter().zip(&l[j][..j]).map(|(x, y)| x * y).sum();
            let sum = a[i][j] - dot;
            if i == j {
                assert!(sum > 0.0, "matrix not positive definite");
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    l
}

/// Solve A x = b given the Cholesky factor L of A.
fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}

struct OracleFit {
    coefficients: Vec<f64>,
    std_errors: Vec<f64>,
    p_values: Vec<f64>,
}

/// Normal-equations OLS with intercept on z-scored data.
fn oracle_ols(columns: &[Vec<f64>], target: &[f64]) -> OracleFit {
    let n = target.len();
    let zcols: Vec<Vec<f64>> = columns.iter().map(|c| oracle_zscore(c)).collect();
    let y = oracle_zscore(target);
    let p = zcols.len() + 1;
    let design: Vec<Vec<f64>> = (0..n)
        .map(|row| {
            let mut x = vec![1.0];
            x.extend(zcols.iter().map(|c| c[row]));
            x
        })
        .collect();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, x) in design.iter().enumerate() {
        for i in 0..p {
            xty[i] += x[i] * y[row];
            for j in 0..p {
                xtx[i][j] += x[i] * x[j];
            }
        }
    }
    let l = cholesky(&xtx);
    let beta = chol_solve(&l, &xty);
    let mut rss = 0.0;
    for (row, x) in design.iter().enumerate() {
        let fit: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
        rss += (y[row] - fit).powi(2);
    }
    let df = (n - p) as f64;
    let sigma2 = rss / df;
    let t_dist = StudentsT::new(0.0, 1.0, df).unwrap();
    let mut std_errors = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        let inv_col = chol_solve(&l, &e);
        let se = (sigma2 * inv_col[j]).sqrt();
        let t = beta[j] / se;
        std_errors.push(se);
        p_values.push(2.0 * (1.0 - t_dist.cdf(t.abs())));
    }
    OracleFit { coefficients: beta, std_errors, p_values }
}

fn random_dataset(rng: &mut ChaCha12Rng, n: usize) -> RegressionData<f64> {
    let columns: Vec<Vec<f64>> =
        (0..7).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let weights: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
    let target: Vec<f64> = (0..n)
        .map(|row| {
            let signal: f64 = (0..7).map(|j| weights[j] * columns[j][row]).sum();
            signal + rng.random_range(-0.5..0.5)
        })
        .collect();
    RegressionData {
        agent_id: 0,
        names: REGRESSOR_NAMES.iter().map(|s| s.to_string()).collect(),
        columns,
        work_target: target.clone(),
        consumption_target: target,
    }
}

#[test]
fn regression_matches_cholesky_statrs_oracle() {
    let mut rng = derive_stream(11, "regression_oracle");
    for trial in 0..100 {
        let data = random_dataset(&mut rng, 240);
        let (work, _) = agent_regression(&data).unwrap();
        assert!(work.dropped.is_empty());
        let oracle = oracle_ols(&data.columns, &data.work_target);
        for j in 0..8 {
            assert!(
                (work.coefficients[j] - oracle.coefficients[j]).abs() <= 1e-8,
                "trial {trial} coef {j}: {} vs {}",
                work.coefficients[j],
                oracle.coefficients[j]
            );
            assert!(
                (work.std_errors[j] - oracle.std_errors[j]).abs() <= 1e-8,
                "trial {trial} se {j}"
            );
            assert!(
                (work.p_values[j] - oracle.p_values[j]).abs() <= 1e-8,
                "trial {trial} p {j}: {} vs {}",
                work.p_values[j],
                oracle.p_values[j]
            );
        }
    }
}

#[test]
fn t_tail_matches_statrs_across_grid() {
    for &df in &[1.0f64, 2.0, 5.0, 10.0, 50.0, 119.0, 232.0] {
        let dist = StudentsT::new(0.0, 1.0, df).unwrap();
        for &t in &[0.0f64, 0.17, 0.5, 1.0, 1.96, 2.5, 3.3, 5.0, 8.0] {
            let want = 2.0 * (1.0 - dist.cdf(t));
            let got = student_t_two_sided_p(t, df);
            assert!((got - want).abs() < 1e-12, "t={t} df={df}: {got} vs {want}");
        }
    }
}

#[test]
fn single_driver_target_is_detected() {
    let mut rng = derive_stream(13, "single_driver");
    let mut columns: Vec<Vec<f64>> =
        (0..7).map(|_| (0..240).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let driver: Vec<f64> = (0..240).map(|_| rng.random_range(-1.0..1.0)).collect();
    columns[2] = driver.clone();
    let target: Vec<f64> = driver.iter().map(|v| 2.0 * v).collect();
    let data = RegressionData {
        agent_id: 0,
        names: REGRESSOR_NAMES.iter().map(|s| s.to_string()).collect(),
        columns,
        work_target: target.clone(),
        consumption_target: target,
    };
    let (work, _) = agent_regression(&data).unwrap();
    // The target is exactly 2x column 2, so the standardized slope is the
    // correlation (1) and its p-value is indistinguishable from zero.
    assert!((work.coefficients[3] - 1.0).abs() < 1e-10, "{}", work.coefficients[3]);
    assert!(work.p_values[3] < 1e-10, "{}", work.p_values[3]);
    for j in 0..8 {
        if j != 3 {
            assert!(work.coefficients[j].abs() < 1e-8, "coef {j} = {}", work.coefficients[j]);
        }
    }
}

#[test]
fn regression_recovers_known_model_within_three_se() {
    let mut rng = derive_stream(17, "recovery");
    let mut checks = 0usize;
    let mut hits = 0usize;
    for _ in 0..40 {
        let n = 240;
        let columns: Vec<Vec<f64>> =
            (0..7).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let weights: Vec<f64> = (0..7).map(|_| rng.random_range(-1.5..1.5)).collect();
        // Gaussian noise via Box-Muller on the same stream.
        let mut noise = Vec::with_capacity(n);
        for _ in 0..n {
            let u1: f64 = rng.random_range(1e-12..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            noise.push((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos());
        }
        let target: Vec<f64> = (0..n)
            .map(|row| {
                let signal: f64 = (0..7).map(|j| weights[j] * columns[j][row]).sum();
                signal + 0.3 * noise[row]
            })
            .collect();
        let sd_y = {
            let m = target.iter().sum::<f64>() / n as f64;
            (target.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
        };
        let data = RegressionData {
            agent_id: 0,
            names: REGRESSOR_NAMES.iter().map(|s| s.to_string()).collect(),
            columns: columns.clone(),
            work_target: target.clone(),
            consumption_target: target,
        };
        let (fit, _) = agent_regression(&data).unwrap();
        for j in 0..7 {
            let sd_x = {
                let m = columns[j].iter().sum::<f64>() / n as f64;
                (columns[j].iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
            };
            let standardized_truth = weights[j] * sd_x / sd_y;
            checks += 1;
            if (fit.coefficients[j + 1] - standardized_truth).abs() <= 3.0 * fit.std_errors[j + 1] {
                hits += 1;
            }
        }
    }
    let coverage = hits as f64 / checks as f64;
    assert!(coverage >= 0.95, "3-SE coverage {coverage} over {checks} checks");
}

#[test]
fn pearson_matches_raw_moment_oracle() {
    let mut rng = derive_stream(19, "pearson_oracle");
    for _ in 0..1000 {
        let n = rng.random_range(3..60);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let syy: f64 = y.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let nf = n as f64;
        let denom = ((sxx - sx * sx / nf) * (syy - sy * sy / nf)).sqrt();
        if denom < 1e-9 {
            continue;
        }
        let want = (sxy - sx * sy / nf) / denom;
        let got = pearson(&x, &y).unwrap().r;
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn pearson_fixture_pairs_match_oracle() {
    // 20 (unemployment, wage inflation) style pairs.
    let u: Vec<f64> = (0..20).map(|i| 0.04 + 0.01 * ((i * 7 % 11) as f64) / 10.0).collect();
    let w: Vec<f64> = u.iter().map(|v| 0.05 - 0.8 * v).collect();
    let jitter: Vec<f64> = (0..20).map(|i| ((i * 13 % 17) as f64 - 8.0) / 1000.0).collect();
    let w: Vec<f64> = w.iter().zip(&jitter).map(|(a, b)| a + b).collect();
    let got = pearson(&u, &w).unwrap();
    let n = 20.0;
    let mx = u.iter().sum::<f64>() / n;
    let my = w.iter().sum::<f64>() / n;
    let cov: f64 = u.iter().zip(&w).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>();
    let vx: f64 = u.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    let vy: f64 = w.iter().map(|b| (b - my).powi(2)).sum::<f64>();
    let want = cov / (vx * vy).sqrt();
    assert!((got.r - want).abs() <= 1e-12);
    assert!(got.r < 0.0);
}

#[test]
fn pearson_affine_invariance() {
    let mut rng = derive_stream(23, "pearson_affine");
    let x: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
    let base = pearson(&x, &y).unwrap().r;
    for &(a, b) in &[(2.0, 5.0), (0.001, -3.0), (1e6, 0.0)] {
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let got = pearson(&xa, &y).unwrap().r;
        assert!((got - base).abs() <= 1e-12, "a={a} b={b}: {got} vs {base}");
    }
}
