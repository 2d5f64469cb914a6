//! Checks against independent oracles, shared by the integration tests and
//! the acceptance runner. Each check returns `Err` with a description of the
//! first mismatch.

#![allow(dead_code)]

use std::f64::consts::{E, FRAC_PI_2, PI};
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use rand::{Rng as _, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use evos::diagnostics::stats::{mean, pearson};
use evos::diagnostics::{
    angular_stats, cov_metrics, eigenframe_projection, lissajous_project, norm_growth_fit,
    pca_mean_trajectory, theoretical_expvar, welch_t_test, CovarianceRepr, EigenFrame,
    MeanTrajectory,
};
use evos::geometry::{decay_eval, exp_map, rank_weight, slerp, tangent_project, DecaySchedule};
use evos::linalg::mean_rows;
use evos::objectives::{
    noisy_wrap, ExternalObjective, LoopbackTransport, NoiseOnly, NoiseSpec, Objective, PeerMode,
    QuadricLandscape,
};
use evos::optimizers::ga::selection_probabilities;
use evos::optimizers::{
    AskTellOptimizer, CholeskyCma, CholeskyConfig, DiagonalCma, DiagonalConfig, RandomSearch,
    RandomSearchConfig, SphereCma, SphereConfig,
};
use evos::rng::Rng;

pub type Check = fn() -> Result<(), String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{what}: got {got}, want {want} (tol {tol})")
    })
}

fn close_vec(got: &[f64], want: &[f64], tol: f64, what: &str) -> Result<(), String> {
    ensure(got.len() == want.len(), || {
        format!("{what}: length {} vs {}", got.len(), want.len())
    })?;
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        close(*g, *w, tol, &format!("{what}[{i}]"))?;
    }
    Ok(())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn gaussian_vec(rng: &mut Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| gaussian(rng)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------- geometry

pub fn exp_map_hand_example() -> Result<(), String> {
    let q = exp_map(&[1.0, 0.0], &[0.0, 1.0], PI / 6.0).map_err(err)?;
    close_vec(&q, &[(PI / 6.0).cos(), (PI / 6.0).sin()], 1e-12, "exp_map")?;
    close_vec(&q, &[0.8660254, 0.5], 5e-8, "exp_map (printed digits)")
}

pub fn slerp_extrapolation_example() -> Result<(), String> {
    // theta = pi/2, t = 1.5: sin(-pi/4) m + sin(3pi/4) p
    let q = slerp(&[1.0, 0.0], &[0.0, 1.0], 1.5).map_err(err)?;
    let s = (3.0 * PI / 4.0).sin();
    close_vec(&q, &[(-PI / 4.0).sin(), s], 1e-12, "slerp")?;
    close_vec(&q, &[-0.7071068, 0.7071068], 5e-8, "slerp (printed digits)")
}

pub fn rank_weight_example() -> Result<(), String> {
    let w = rank_weight(&[0.1, 0.9, 0.5, 0.7], 2).map_err(err)?;
    let (a, b) = (2.5f64.ln(), 2.5f64.ln() - 2f64.ln());
    close_vec(
        &w,
        &[0.0, a / (a + b), 0.0, b / (a + b)],
        1e-12,
        "rank_weight",
    )?;
    close_vec(
        &w,
        &[0.0, 0.80417, 0.0, 0.19583],
        1e-5,
        "rank_weight (printed digits)",
    )
}

pub fn tangent_project_example() -> Result<(), String> {
    let v = tangent_project(&[1.0, 1.0, 0.0], &[2.0, 0.0, 0.0]).map_err(err)?;
    close_vec(&v, &[0.0, 1.0, 0.0], 1e-15, "tangent_project")
}

pub fn decay_at_tau() -> Result<(), String> {
    let s = DecaySchedule::exponential(0.4, 0.05, 25.0).map_err(err)?;
    close(
        decay_eval(&s, 25),
        0.05 + 0.35 / E,
        1e-15,
        "exponential decay at tau",
    )
}

/// Random `(m, v)` pairs with `v` tangent to `m`, over varied dimensions and
/// scales.
fn tangent_pair(rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let d = rng.random_range(2..48);
    let m: Vec<f64> = gaussian_vec(rng, d)
        .iter()
        .map(|x| x * 10f64.powf(rng.random_range(-2.0..3.0)))
        .collect();
    let u = gaussian_vec(rng, d);
    let c = dot(&m, &u) / dot(&m, &m);
    let v: Vec<f64> = u.iter().zip(&m).map(|(a, b)| a - c * b).collect();
    (m, v)
}

pub fn exp_map_norm_property(cases: usize) -> Result<(), String> {
    let mut rng = Rng::seed_from_u64(101);
    for i in 0..cases {
        let (m, v) = tangent_pair(&mut rng);
        let mu = rng.random_range(-PI..PI);
        let q = exp_map(&m, &v, mu).map_err(|e| format!("case {i}: {e}"))?;
        let rel = (norm(&q) - norm(&m)).abs() / norm(&m);
        ensure(rel <= 1e-10, || format!("case {i}: norm drift {rel:e}"))?;
    }
    Ok(())
}

pub fn slerp_properties(cases: usize) -> Result<(), String> {
    let mut rng = Rng::seed_from_u64(202);
    for i in 0..cases {
        let d = rng.random_range(2..48);
        let r = 10f64.powf(rng.random_range(-1.0..3.0));
        let m: Vec<f64> = {
            let g = gaussian_vec(&mut rng, d);
            g.iter().map(|x| x * r / norm(&g)).collect()
        };
        let p: Vec<f64> = {
            let g = gaussian_vec(&mut rng, d);
            g.iter().map(|x| x * r / norm(&g)).collect()
        };
        let theta = (dot(&m, &p) / (r * r)).clamp(-1.0, 1.0).acos();
        if theta > PI - 1e-3 {
            continue;
        }
        let t = rng.random_range(0.0..2.0);
        let q = slerp(&m, &p, t).map_err(|e| format!("case {i}: {e}"))?;
        let rel = (norm(&q) - r).abs() / r;
        ensure(rel <= 1e-10, || {
            format!("case {i}: slerp norm drift {rel:e}")
        })?;
        // residual after projecting onto span{m, p}
        let basis = DMatrix::from_columns(&[
            DVector::from_column_slice(&m),
            DVector::from_column_slice(&p),
        ]);
        let qv = DVector::from_column_slice(&q);
        let coef = (basis.transpose() * &basis)
            .lu()
            .solve(&(basis.transpose() * &qv))
            .ok_or("singular span")?;
        let resid = (&qv - &basis * coef).norm() / r;
        ensure(resid <= 1e-8, || {
            format!("case {i}: slerp leaves span by {resid:e}")
        })?;
        let v = tangent_project(&p, &m).map_err(err)?;
        if norm(&v) > 1e-9 * r {
            let e = exp_map(&m, &v, t * theta).map_err(err)?;
            let diff = norm(&q.iter().zip(&e).map(|(a, b)| a - b).collect::<Vec<_>>()) / r;
            ensure(diff <= 1e-8, || {
                format!("case {i}: slerp vs exp_map differ by {diff:e}")
            })?;
        }
    }
    Ok(())
}

pub fn tangent_project_property(cases: usize) -> Result<(), String> {
    let mut rng = Rng::seed_from_u64(303);
    for i in 0..cases {
        let d = rng.random_range(2..48);
        let m: Vec<f64> = gaussian_vec(&mut rng, d)
            .iter()
            .map(|x| x * 10f64.powf(rng.random_range(-2.0..3.0)))
            .collect();
        let u: Vec<f64> = gaussian_vec(&mut rng, d)
            .iter()
            .map(|x| x * 10f64.powf(rng.random_range(-2.0..3.0)))
            .collect();
        let v = tangent_project(&u, &m).map_err(err)?;
        let off = dot(&m, &v).abs();
        ensure(off <= 1e-9 * norm(&m) * norm(&u), || {
            format!("case {i}: m.v = {off:e}")
        })?;
        // round trip: exp_map along v lands in span{m, v} with its tangent part parallel to v
        if norm(&v) > 1e-6 * norm(&u) {
            let mu = rng.random_range(0.01..FRAC_PI_2 - 0.01);
            let q = exp_map(&m, &v, mu).map_err(err)?;
            let back = tangent_project(&q, &m).map_err(err)?;
            let cos = dot(&back, &v) / (norm(&back) * norm(&v));
            ensure(cos >= 1.0 - 1e-9, || {
                format!("case {i}: round trip not parallel, cos {cos}")
            })?;
        }
    }
    Ok(())
}

// --------------------------------------------------------------- optimizers

pub fn sphere_initial_angles() -> Result<(), String> {
    let cfg = SphereConfig {
        radius: Some(300.0),
        ..SphereConfig::exponential()
    };
    let mut opt = SphereCma::new(4096, &cfg, 17).map_err(err)?;
    let codes = opt.ask().map_err(err)?;
    ensure(codes.len() == 40, || format!("batch of {}", codes.len()))?;
    let s = angular_stats(&codes).map_err(err)?;
    close(s.mean_angle, FRAC_PI_2, 0.05, "mean pairwise angle at t=0")
}

/// Constant scores: ranks fall back to input order, so the top half by index
/// is recombined with log-rank weights and the center moves by the
/// extrapolated arc.
pub fn sphere_constant_scores_trace() -> Result<(), String> {
    let (d, b) = (12, 8);
    let cfg = SphereConfig {
        population: b,
        ..SphereConfig::exponential()
    };
    let mut opt = SphereCma::new(d, &cfg, 5).map_err(err)?;
    let r = opt.params().radius;
    let lr = opt.params().learning_ratio;
    let k = opt.params().cutoff;
    let center = opt.center().to_vec();
    let codes = opt.ask().map_err(err)?;
    opt.tell(&codes, &vec![1.0; b]).map_err(err)?;

    let raw: Vec<f64> = (1..=k)
        .map(|i| (k as f64 + 0.5).ln() - (i as f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let mut mw = vec![0.0; d];
    for (i, w) in raw.iter().enumerate() {
        for j in 0..d {
            mw[j] += w / total * codes[i][j];
        }
    }
    let s = r / norm(&mw);
    mw.iter_mut().for_each(|x| *x *= s);
    let theta = (dot(&center, &mw) / (r * r)).clamp(-1.0, 1.0).acos();
    let want: Vec<f64> = center
        .iter()
        .zip(&mw)
        .map(|(m, p)| (((1.0 - lr) * theta).sin() * m + (lr * theta).sin() * p) / theta.sin())
        .collect();
    close_vec(
        opt.center(),
        &want,
        1e-9 * r,
        "center after constant scores",
    )
}

/// One rank-one factor update against a dense oracle: form
/// `C' = (1 - c1) I + c1 pc pc^T` explicitly, factor it with a dense
/// Cholesky and compare covariances.
pub fn cholesky_rank_one_oracle() -> Result<(), String> {
    let d = 5;
    let cfg = CholeskyConfig {
        population: 10,
        a_update_freq: 1,
        ..Default::default()
    };
    let mut opt = CholeskyCma::new(d, &cfg, 9).map_err(err)?;
    let codes = opt.ask().map_err(err)?;
    let scores: Vec<f64> = codes.iter().map(|c| c[0] - 0.5 * c[1] * c[1]).collect();
    opt.tell(&codes, &scores).map_err(err)?;
    ensure(opt.factor_updates() == 1, || {
        format!("{} factor updates", opt.factor_updates())
    })?;
    let c1 = opt.rates().c1;
    let pc = DVector::from_column_slice(opt.evolution_path());
    let dense = DMatrix::<f64>::identity(d, d) * (1.0 - c1) + &pc * pc.transpose() * c1;
    let l = dense
        .clone()
        .cholesky()
        .ok_or("oracle covariance not positive definite")?
        .l();
    let a = opt.factor();
    let diff = (a * a.transpose() - &l * l.transpose()).norm();
    ensure(diff < 1e-8, || {
        format!("A A^T differs from oracle by {diff:e} (Frobenius)")
    })?;

    // and from a non-trivial starting factor
    let mut rng = Rng::seed_from_u64(4);
    let a0 = opt.factor().clone();
    let y = DVector::from_vec(gaussian_vec(&mut rng, d));
    let (alpha, beta) = (0.7, 0.2);
    let want = (&a0 * a0.transpose()) * alpha + &y * y.transpose() * beta;
    let l = want
        .clone()
        .cholesky()
        .ok_or("oracle covariance not positive definite")?
        .l();
    opt.rank_one_update(alpha, beta, &y);
    let a = opt.factor();
    let diff = (a * a.transpose() - &l * l.transpose()).norm();
    ensure(diff < 1e-8, || format!("second update differs by {diff:e}"))?;
    let inv_err = (a * opt.inverse_factor() - DMatrix::identity(d, d)).norm();
    ensure(inv_err < 1e-8, || {
        format!("inverse factor drift {inv_err:e}")
    })
}

/// Separable quadratic with curvatures spaced log-linearly over three
/// decades: the learned diagonal should track the inverse curvatures.
/// Returns the per-seed Pearson correlations.
pub fn diagonal_learns_inverse_curvature(
    seeds: u64,
    generations: usize,
) -> Result<Vec<f64>, String> {
    let d = 64;
    let curv: Vec<f64> = (0..d)
        .map(|i| 10f64.powf(3.0 * i as f64 / (d - 1) as f64))
        .collect();
    let inv: Vec<f64> = curv.iter().map(|c| 1.0 / c).collect();
    let mut out = Vec::new();
    for seed in 0..seeds {
        let mut opt = DiagonalCma::new(
            d,
            &DiagonalConfig {
                sigma0: 1.0,
                ..Default::default()
            },
            seed,
        )
        .map_err(err)?;
        for _ in 0..generations {
            let codes = opt.ask().map_err(err)?;
            let scores: Vec<f64> = codes
                .iter()
                .map(|z| -z.iter().zip(&curv).map(|(x, c)| c * x * x).sum::<f64>())
                .collect();
            opt.tell(&codes, &scores).map_err(err)?;
        }
        out.push(pearson(opt.diagonal(), &inv).ok_or("constant diagonal")?);
    }
    Ok(out)
}

pub fn diagonal_inverse_curvature_check() -> Result<(), String> {
    let rs = diagonal_learns_inverse_curvature(20, 300)?;
    let worst = rs.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(worst > 0.5, || {
        format!("Pearson(c, 1/curvature) per seed: min {worst:.3} (all {rs:.3?})")
    })
}

pub fn ga_infinite_temperature_uniform() -> Result<(), String> {
    // four candidates, so each expected count is 25000 and 2% is ~3.6 sd
    let scores = [3.0, -1.0, 10.0, 0.5];
    let mut rng = Rng::seed_from_u64(11);
    for t in [f64::INFINITY, 1e12] {
        let p = selection_probabilities(&scores, t);
        let dist = rand::distr::weighted::WeightedIndex::new(&p).map_err(err)?;
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[dist.sample(&mut rng)] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            let freq = *c as f64 / n as f64;
            ensure((freq - 0.25).abs() <= 0.02 * 0.25, || {
                format!("T={t}: candidate {i} drawn with frequency {freq}")
            })?;
        }
    }
    Ok(())
}

pub fn random_search_norm() -> Result<(), String> {
    let d = 4096;
    let cfg = RandomSearchConfig::default();
    let mut opt = RandomSearch::new(d, &cfg, 21).map_err(err)?;
    let mut norms = Vec::new();
    while norms.len() < 1000 {
        let codes = opt.ask().map_err(err)?;
        norms.extend(codes.iter().map(|c| norm(c)));
        let zeros = vec![0.0; codes.len()];
        opt.tell(&codes, &zeros).map_err(err)?;
    }
    norms.truncate(1000);
    let want = cfg.sigma0 * (d as f64).sqrt();
    let got = mean(&norms);
    ensure((got - want).abs() <= 0.02 * want, || {
        format!("mean norm {got} vs sigma0 sqrt(d) = {want}")
    })
}

// --------------------------------------------------------------- objectives

pub fn noise_hand_examples() -> Result<(), String> {
    close(noisy_wrap(10.0, 0.5, -3.0), 0.0, 0.0, "alpha 0.5, eps -3")?;
    close(noisy_wrap(10.0, 0.2, 1.0), 12.0, 1e-12, "alpha 0.2, eps 1")?;
    close(noisy_wrap(5.3, 0.0, 2.0), 5.3, 0.0, "alpha 0")
}

/// Standard normal cdf by Simpson integration of the density, independent
/// of the library's statistics code.
fn normal_cdf(x: f64) -> f64 {
    let n = 20_000;
    let h = x / n as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    let mut s = phi(0.0) + phi(x);
    for i in 1..n {
        s += phi(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

pub fn clipped_noise_mean() -> Result<(), String> {
    let (r, alpha): (f64, f64) = (10.0, 0.5);
    // E[max(0, (1 + a e) r)] = r (Phi(1/a) + a phi(1/a))
    let c = 1.0 / alpha;
    let phi = (-0.5 * c * c).exp() / (2.0 * PI).sqrt();
    let want = r * (normal_cdf(c) + alpha * phi);
    let spec = NoiseSpec::new(alpha, 99).map_err(err)?;
    let n = 1_000_000;
    let got = (0..n)
        .map(|i| spec.apply(r, i / 1000, i % 1000))
        .sum::<f64>()
        / n as f64;
    ensure((got - want).abs() <= 0.005 * want, || {
        format!("Monte-Carlo mean {got} vs clipped-normal mean {want}")
    })
}

pub fn quadric_hand_example() -> Result<(), String> {
    let frame = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let l = QuadricLandscape::new("hand", vec![0.0; 3], vec![1.0, 0.1, 0.0], frame, 10.0)
        .map_err(err)?;
    close(
        l.eval(&[1.0, 2.0, 0.0]).map_err(err)?,
        8.6,
        1e-12,
        "quadric",
    )
}

pub fn noise_only_moments() -> Result<(), String> {
    let d = 16;
    let mut obj = NoiseOnly::new(d, 5);
    let mut rng = Rng::seed_from_u64(6);
    let mut scores = Vec::new();
    let mut norms = Vec::new();
    for gen in 0..250 {
        let codes: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let s = rng.random_range(0.1..10.0);
                gaussian_vec(&mut rng, d).iter().map(|x| x * s).collect()
            })
            .collect();
        norms.extend(codes.iter().map(|c| norm(c)));
        scores.extend(
            obj.evaluate(gen, &codes)
                .map_err(err)?
                .iter()
                .map(|s| s.noisy),
        );
    }
    let m = mean(&scores);
    let sd = (scores.iter().map(|s| (s - m).powi(2)).sum::<f64>() / scores.len() as f64).sqrt();
    close(m, 0.0, 0.03, "noise-only mean")?;
    close(sd, 1.0, 0.03, "noise-only std")?;
    let r = pearson(&scores, &norms).ok_or("undefined correlation")?;
    ensure(r.abs() < 0.05, || format!("correlation with code norm {r}"))
}

/// Full run over the loopback peer; returns the number of eval requests.
pub fn loopback_run(
    generations: usize,
    population: usize,
    dim: usize,
) -> Result<(usize, usize), String> {
    let transport = LoopbackTransport::peer(PeerMode::Echo);
    let mut obj = ExternalObjective::connect(
        Box::new(transport),
        dim,
        Duration::from_secs(1),
        NoiseSpec::noiseless(),
    )
    .map_err(err)?;
    let cfg = CholeskyConfig {
        population,
        ..Default::default()
    };
    let mut opt = CholeskyCma::new(dim, &cfg, 3).map_err(err)?;
    let out = evos::harness::run_once(&mut opt, &mut obj, generations);
    if let Some(e) = out.error {
        return Err(e.to_string());
    }
    let evals = out.generations.iter().map(|g| g.raw.len()).sum();
    Ok((obj.requests(), evals))
}

pub fn loopback_budget() -> Result<(), String> {
    let (requests, evals) = loopback_run(3000 / 40, 40, 64)?;
    ensure(requests == 75 && evals == 3000, || {
        format!("{requests} requests for {evals} evaluations")
    })
}

// -------------------------------------------------------------- diagnostics

pub fn expvar_values() -> Result<(), String> {
    // rho(k) = csc^2(k pi / 2T) / sum_j csc^2(j pi / 2T), with the closed-form
    // sum (2T^2 - 2)/3
    for t in [10usize, 75, 300] {
        let tf = t as f64;
        let csc2 = |k: usize| 1.0 / (k as f64 * PI / (2.0 * tf)).sin().powi(2);
        let brute: f64 = (1..t).map(csc2).sum();
        close(
            brute,
            (2.0 * tf * tf - 2.0) / 3.0,
            1e-9 * brute,
            "cosecant identity",
        )?;
        let mut total = 0.0;
        for k in 1..t {
            let got = theoretical_expvar(k, t).map_err(err)?;
            close(got, csc2(k) / brute, 1e-12, &format!("rho({k}) at T={t}"))?;
            total += got;
        }
        close(total, 1.0, 1e-9, &format!("sum of rho at T={t}"))?;
    }
    close(
        theoretical_expvar(1, 75).map_err(err)?,
        0.60813,
        1e-5,
        "rho(1) at T=75",
    )
}

pub fn cov_metrics_hand_example() -> Result<(), String> {
    let c = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 1.0]));
    let m = cov_metrics(CovarianceRepr::Dense(&c)).map_err(err)?;
    close(m.kappa, 4.0, 1e-12, "kappa")?;
    close(m.delta, 0.5, 1e-12, "delta")
}

pub fn random_walk_slope() -> Result<(), String> {
    let (d, t, seeds) = (100, 75, 200);
    let mut slopes = Vec::new();
    for s in 0..seeds {
        let mut rng = Rng::seed_from_u64(1000 + s);
        let mut z = vec![0.0; d];
        let mut means = Vec::new();
        for _ in 0..t {
            means.push(z.clone());
            z.iter_mut().for_each(|x| *x += gaussian(&mut rng));
        }
        slopes.push(
            norm_growth_fit(&MeanTrajectory::new(means))
                .map_err(err)?
                .slope,
        );
    }
    let got = mean(&slopes);
    ensure((got - 100.0).abs() <= 10.0, || {
        format!("mean fitted slope {got}, want 100")
    })
}

pub fn high_dimensional_angles() -> Result<(), String> {
    let mut rng = Rng::seed_from_u64(8);
    let codes: Vec<Vec<f64>> = (0..40).map(|_| gaussian_vec(&mut rng, 4096)).collect();
    let s = angular_stats(&codes).map_err(err)?;
    close(s.mean_angle, FRAC_PI_2, 0.02, "mean angle")
}

pub fn isotropic_alignment_null() -> Result<(), String> {
    let d = 512;
    let mut rng = Rng::seed_from_u64(12);
    let frame = EigenFrame::synthetic(d, d, 6.0, &mut rng);
    let dirs: Vec<Vec<f64>> = (0..500).map(|_| gaussian_vec(&mut rng, d)).collect();
    let s = eigenframe_projection(&dirs, &frame, frame.default_cutoff()).map_err(err)?;
    ensure(s.pearson_r.abs() < 0.1, || {
        format!("null correlation {}", s.pearson_r)
    })
}

/// Noise-driven CholeskyCMA runs used by the trajectory checks.
pub fn noise_driven_trajectories(
    seeds: u64,
    d: usize,
    t: usize,
    b: usize,
) -> Result<Vec<MeanTrajectory>, String> {
    (0..seeds)
        .map(|s| {
            let mut opt = CholeskyCma::new(
                d,
                &CholeskyConfig {
                    population: b,
                    ..Default::default()
                },
                s,
            )
            .map_err(err)?;
            let mut obj = NoiseOnly::new(d, 1000 + s);
            let mut means = Vec::with_capacity(t);
            for g in 0..t {
                let codes = opt.ask().map_err(err)?;
                means.push(mean_rows(&codes));
                let scores: Vec<f64> = obj
                    .evaluate(g, &codes)
                    .map_err(err)?
                    .iter()
                    .map(|r| r.noisy)
                    .collect();
                opt.tell(&codes, &scores).map_err(err)?;
            }
            Ok(MeanTrajectory::new(means))
        })
        .collect()
}

pub fn lissajous_open_arc() -> Result<(), String> {
    for (i, traj) in noise_driven_trajectories(5, 256, 75, 40)?
        .iter()
        .enumerate()
    {
        let pca = pca_mean_trajectory(traj).map_err(err)?;
        let curve = lissajous_project(&pca, 1, 2).map_err(err)?;
        let amplitude = curve.iter().map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
        let (first, last) = (curve[0], curve[curve.len() - 1]);
        let gap = (last.0 - first.0).hypot(last.1 - first.1);
        ensure(gap > 0.1 * amplitude, || {
            format!("run {i}: end gap {gap} vs amplitude {amplitude}")
        })?;
    }
    Ok(())
}

pub fn welch_textbook() -> Result<(), String> {
    let w = welch_t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).ok_or("no result")?;
    // means 2 and 5, variances 1 and 1: t = -3 / sqrt(2/3), df = (2/3)^2 / (2 (1/3)^2 / 2) = 4
    close(w.t, -3.0 / (2.0f64 / 3.0).sqrt(), 1e-12, "Welch t")?;
    close(w.t, -3.674, 5e-4, "Welch t (printed digits)")?;
    close(w.df, 4.0, 1e-12, "Welch df")
}

/// Every hand- or brute-force-checked example, by name.
pub fn derived_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("exp_map hand example", exp_map_hand_example),
        ("slerp extrapolation example", slerp_extrapolation_example),
        ("rank_weight hand example", rank_weight_example),
        ("tangent_project hand example", tangent_project_example),
        ("exponential decay at tau", decay_at_tau),
        ("sphere t=0 angles near pi/2", sphere_initial_angles),
        ("sphere constant-score trace", sphere_constant_scores_trace),
        ("cholesky rank-one dense oracle", cholesky_rank_one_oracle),
        (
            "diagonal tracks inverse curvature",
            diagonal_inverse_curvature_check,
        ),
        (
            "ga infinite temperature uniform",
            ga_infinite_temperature_uniform,
        ),
        ("random search norm", random_search_norm),
        ("noise hand examples", noise_hand_examples),
        ("clipped noise mean", clipped_noise_mean),
        ("quadric hand example", quadric_hand_example),
        ("noise-only moments", noise_only_moments),
        ("loopback budget arithmetic", loopback_budget),
        ("explained-variance law", expvar_values),
        ("cov_metrics hand example", cov_metrics_hand_example),
        ("random-walk slope", random_walk_slope),
        ("high-dimensional angles", high_dimensional_angles),
        ("isotropic alignment null", isotropic_alignment_null),
        ("lissajous open arc", lissajous_open_arc),
        ("welch textbook example", welch_textbook),
    ]
}

pub const PROPERTY_CASES: usize = 10_000;

pub fn property_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("exp_map preserves norm", || {
            exp_map_norm_property(PROPERTY_CASES)
        }),
        ("slerp norm, span and exp_map agreement", || {
            slerp_properties(PROPERTY_CASES)
        }),
        ("tangent_project orthogonality and round trip", || {
            tangent_project_property(PROPERTY_CASES)
        }),
    ]
}
