//! Exact t-SNE down to two dimensions.
//!
//! Conditional affinities use a Gaussian kernel whose precision is found per
//! point by bisection until the row's perplexity matches the target. The
//! symmetrized joint distribution is matched by a Student-t kernel in the
//! plane through gradient descent with momentum, adaptive gains and early
//! exaggeration. Cost is `O(m^2)` per iteration, so inputs are capped.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use crate::clustering::sq_dist;
use crate::error::{Error, Result};
use crate::seed;

pub const MAX_POINTS: usize = 5_000;

/// Absolute tolerance on each row's perplexity.
pub const PERPLEXITY_TOL: f64 = 1e-5;

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated affinities and low momentum.
    pub exaggeration_iterations: usize,
    pub seed: u64,
    pub max_points: usize,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1_000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            seed: 0,
            max_points: MAX_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub coords: Vec<[f64; 2]>,
    /// KL(P || Q) at the final layout.
    pub kl_divergence: f64,
    /// `kl_history[t]` is the divergence after `t` updates.
    pub kl_history: Vec<f64>,
    pub config: TsneConfig,
}

/// Joint affinities and the perplexity each row actually reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities {
    pub m: usize,
    /// `m × m`, symmetric, zero diagonal, sums to one.
    pub p: Vec<f64>,
    pub row_perplexity: Vec<f64>,
}

fn check(data: &[f64], dim: usize, config: &TsneConfig) -> Result<usize> {
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return Err(Error::InvalidParameter("data length is not a multiple of dim".into()));
    }
    let m = data.len() / dim;
    if m > config.max_points {
        return Err(Error::Capacity(alloc::format!(
            "exact t-SNE is capped at {} points, got {m}; raise the cap with --max-points",
            config.max_points
        )));
    }
    if config.perplexity.is_nan() || config.perplexity <= 0.0 || (m as f64) < 3.0 * config.perplexity {
        return Err(Error::InvalidParameter(alloc::format!(
            "perplexity {} needs at least {} points, got {m}",
            config.perplexity,
            libm::ceil(3.0 * config.perplexity)
        )));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i / dim + 1 });
    }
    Ok(m)
}

/// Conditional distribution for one row at precision `beta`; returns the
/// row's perplexity `exp(H)`.
fn conditional_row(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for (j, (&d, o)) in dist.iter().zip(out.iter_mut()).enumerate() {
        if j == i {
            *o = 0.0;
            continue;
        }
        let shifted = d - dmin;
        let e = libm::exp(-beta * shifted);
        *o = e;
        sum += e;
        weighted += shifted * e;
    }
    out.iter_mut().for_each(|o| *o /= sum);
    libm::exp(libm::log(sum) + beta * weighted / sum)
}

pub fn joint_probabilities(data: &[f64], dim: usize, perplexity: f64) -> Result<Affinities> {
    let config = TsneConfig {
        perplexity,
        max_points: usize::MAX,
        ..TsneConfig::default()
    };
    let m = check(data, dim, &config)?;
    let point = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let d = sq_dist(point(i), point(j));
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }

    let mut cond = vec![0.0; m * m];
    let mut row_perplexity = vec![0.0; m];
    for i in 0..m {
        let row = &dist[i * m..(i + 1) * m];
        let out = &mut cond[i * m..(i + 1) * m];
        let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
        let mut beta = 1.0;
        let mut perp = conditional_row(row, i, beta, out);
        for _ in 0..BISECTION_STEPS {
            if (perp - perplexity).abs() < PERPLEXITY_TOL {
                break;
            }
            // perplexity falls as beta rises
            if perp > perplexity {
                lo = beta;
                beta = if hi.is_infinite() { beta * 2.0 } else { 0.5 * (beta + hi) };
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
            perp = conditional_row(row, i, beta, out);
        }
        row_perplexity[i] = perp;
    }

    let norm = 2.0 * m as f64;
    let mut p = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let v = (cond[i * m + j] + cond[j * m + i]) / norm;
            p[i * m + j] = v;
            p[j * m + i] = v;
        }
    }
    Ok(Affinities {
        m,
        p,
        row_perplexity,
    })
}

/// Initial layout: each point draws from N(0, 1e-4^2) on a stream keyed by
/// its own coordinates, so identical inputs start together and row order
/// does not matter.
fn initial_layout(data: &[f64], dim: usize, seed_value: u64) -> Vec<[f64; 2]> {
    let normal = Normal::new(0.0, 1e-4).expect("valid sigma");
    data.chunks_exact(dim)
        .map(|x| {
            let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
            let mut rng = seed::rng(seed::derive_seed(seed_value, &key));
            [normal.sample(&mut rng), normal.sample(&mut rng)]
        })
        .collect()
}

/// Student-t kernel values (zero diagonal) and their sum.
fn kernel(y: &[[f64; 2]], num: &mut [f64]) -> f64 {
    let m = y.len();
    let mut z = 0.0;
    for i in 0..m {
        num[i * m + i] = 0.0;
        for j in i + 1..m {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * m + j] = v;
            num[j * m + i] = v;
            z += 2.0 * v;
        }
    }
    z
}

fn kl(p: &[f64], num: &[f64], z: f64) -> f64 {
    p.iter()
        .zip(num)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &n)| pij * libm::log(pij / (n / z).max(1e-300)))
        .sum()
}

/// Runs t-SNE. Points are processed in a canonical order (lexicographic on
/// their coordinates) and mapped back, so every floating-point reduction is
/// the same whatever order the rows arrive in.
pub fn tsne(data: &[f64], dim: usize, config: &TsneConfig) -> Result<ProjectionResult> {
    let m = check(data, dim, config)?;
    let row = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        row(a)
            .iter()
            .zip(row(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let canonical: Vec<f64> = order.iter().flat_map(|&i| row(i).iter().copied()).collect();
    let mut result = tsne_canonical(&canonical, dim, m, config)?;
    let mut coords = vec![[0.0; 2]; m];
    for (k, &i) in order.iter().enumerate() {
        coords[i] = result.coords[k];
    }
    result.coords = coords;
    Ok(result)
}

fn tsne_canonical(data: &[f64], dim: usize, m: usize, config: &TsneConfig) -> Result<ProjectionResult> {
    let aff = joint_probabilities(data, dim, config.perplexity)?;
    let p = aff.p;
    let mut y = initial_layout(data, dim, config.seed);
    let mut update = vec![[0.0; 2]; m];
    let mut gains = vec![[1.0_f64; 2]; m];
    let mut num = vec![0.0; m * m];
    let mut kl_history = Vec::with_capacity(config.iterations + 1);

    for it in 0..config.iterations {
        let z = kernel(&y, &mut num);
        kl_history.push(kl(&p, &num, z));
        if it == config.exaggeration_iterations {
            // the second phase starts from rest so exaggerated steps do not carry over
            update.iter_mut().for_each(|u| *u = [0.0; 2]);
            gains.iter_mut().for_each(|g| *g = [1.0; 2]);
        }
        let exaggeration = if it < config.exaggeration_iterations {
            config.early_exaggeration
        } else {
            1.0
        };
        let momentum = if it < config.exaggeration_iterations { 0.5 } else { 0.8 };
        for i in 0..m {
            let mut g = [0.0; 2];
            for j in 0..m {
                if i == j {
                    continue;
                }
                let n = num[i * m + j];
                let f = (exaggeration * p[i * m + j] - n / z) * n;
                g[0] += f * (y[i][0] - y[j][0]);
                g[1] += f * (y[i][1] - y[j][1]);
            }
            for d in 0..2 {
                let grad = 4.0 * g[d];
                let gain = &mut gains[i][d];
                *gain = if (grad > 0.0) != (update[i][d] > 0.0) {
                    *gain + 0.2
                } else {
                    *gain * 0.8
                }
                .max(0.01);
                update[i][d] = momentum * update[i][d] - config.learning_rate * *gain * grad;
            }
        }
        let mut mean = [0.0; 2];
        for (yi, u) in y.iter_mut().zip(&update) {
            yi[0] += u[0];
            yi[1] += u[1];
            mean[0] += yi[0];
            mean[1] += yi[1];
        }
        mean[0] /= m as f64;
        mean[1] /= m as f64;
        for yi in &mut y {
            yi[0] -= mean[0];
            yi[1] -= mean[1];
        }
    }
    let z = kernel(&y, &mut num);
    let final_kl = kl(&p, &num, z);
    kl_history.push(final_kl);

    Ok(ProjectionResult {
        coords: y,
        kl_divergence: final_kl,
        kl_history,
        config: *config,
    })
}
