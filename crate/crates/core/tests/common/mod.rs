#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scweat_core::seed;

pub fn rng(s: u64) -> ChaCha8Rng {
    seed::rng(s)
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| gaussian(rng, dim)).collect()
}

pub fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Straight-from-definition effect size: naive cosines, arithmetic means,
/// population standard deviation over all `2n` cosines.
pub fn naive_effect_size(w: &[f64], a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn cos(u: &[f64], v: &[f64]) -> f64 {
        let mut uv = 0.0;
        let mut uu = 0.0;
        let mut vv = 0.0;
        for i in 0..u.len() {
            uv += u[i] * v[i];
            uu += u[i] * u[i];
            vv += v[i] * v[i];
        }
        uv / (uu.sqrt() * vv.sqrt())
    }
    let ca: Vec<f64> = a.iter().map(|x| cos(w, x)).collect();
    let cb: Vec<f64> = b.iter().map(|x| cos(w, x)).collect();
    let mean_a = ca.iter().sum::<f64>() / ca.len() as f64;
    let mean_b = cb.iter().sum::<f64>() / cb.len() as f64;
    let all: Vec<f64> = ca.iter().chain(&cb).copied().collect();
    let mu = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|c| (c - mu).powi(2)).sum::<f64>() / all.len() as f64;
    (mean_a - mean_b) / var.sqrt()
}

/// Average ranks by brute force: for each value, one plus the number of
/// strictly smaller values plus half the number of other equal values.
pub fn naive_average_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn naive_spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = naive_average_ranks(xs);
    let ry = naive_average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..xs.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx).powi(2);
        syy += (ry[i] - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Textbook Lloyd iteration from given centroids with the same stopping
/// rule as the library: stop when assignments stop changing or the
/// relative inertia change drops below `tol`.
pub fn naive_lloyd(
    data: &[Vec<f64>],
    init: &[Vec<f64>],
    max_iter: usize,
    tol: f64,
) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let d2 = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum() };
    let assign = |cs: &[Vec<f64>]| -> Vec<usize> {
        data.iter()
            .map(|x| {
                let mut best = 0;
                for c in 1..cs.len() {
                    if d2(x, &cs[c]) < d2(x, &cs[best]) {
                        best = c;
                    }
                }
                best
            })
            .collect()
    };
    let inertia = |cs: &[Vec<f64>], asg: &[usize]| -> f64 {
        data.iter().zip(asg).map(|(x, &a)| d2(x, &cs[a])).sum()
    };
    let k = init.len();
    let dim = data[0].len();
    let mut cs = init.to_vec();
    let mut asg = assign(&cs);
    let mut prev = inertia(&cs, &asg);
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &a) in data.iter().zip(&asg) {
            counts[a] += 1;
            for j in 0..dim {
                sums[a][j] += x[j];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                cs[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // empty clusters take the points farthest from their own centroid
        let mut far: Vec<(f64, usize)> =
            data.iter().zip(&asg).enumerate().map(|(i, (x, &a))| (d2(x, &cs[a]), i)).collect();
        far.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
        let mut donors = far.into_iter();
        for c in 0..k {
            if counts[c] == 0 {
                cs[c] = data[donors.next().unwrap().1].clone();
            }
        }
        let next = assign(&cs);
        let changed = next != asg;
        asg = next;
        let cur = inertia(&cs, &asg);
        if !changed || prev <= 0.0 || (prev - cur).abs() < tol * prev {
            prev = cur;
            break;
        }
        prev = cur;
    }
    (asg, cs, prev)
}
