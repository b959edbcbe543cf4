//! Selection of strongly associated words and k-means over their vectors.
//!
//! [`kmeans_elkan`] is an exact acceleration of Lloyd's iteration: from the
//! same initial centroids it produces the same assignments, centroids and
//! inertia. Triangle-inequality bounds only decide which distances can be
//! skipped; every assignment decision is made on an exactly computed squared
//! distance, with ties going to the lower cluster index.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::association::{AssociationRecord, Direction};
use crate::embedding::{normalized, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_K: usize = 11;
pub const DEFAULT_COUNT: usize = 1_000;
pub const DEFAULT_D_MIN: f64 = 0.50;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

/// The most frequent words associated with one side.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedWordSet {
    pub direction: Direction,
    pub records: Vec<AssociationRecord>,
    /// Requested size; `records` is shorter when the input ran out.
    pub requested: usize,
}

impl BiasedWordSet {
    pub fn words(&self) -> Vec<String> {
        self.records.iter().map(|r| r.word.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn exhausted(&self) -> bool {
        self.records.len() < self.requested
    }
}

/// First `count` records in rank order with the requested sign,
/// `|d| >= d_min` and `p < p_max`. Records without a p-value never qualify.
pub fn select_biased_words(
    records: &[AssociationRecord],
    direction: Direction,
    count: usize,
    d_min: f64,
    p_max: f64,
) -> BiasedWordSet {
    let sign_ok = |d: f64| match direction {
        Direction::A => d > 0.0,
        Direction::B => d < 0.0,
        Direction::None => false,
    };
    let records = records
        .iter()
        .filter(|r| sign_ok(r.effect_size) && r.effect_size.abs() >= d_min)
        .filter(|r| r.p_value.is_some_and(|p| p < p_max))
        .take(count)
        .cloned()
        .collect();
    BiasedWordSet {
        direction,
        records,
        requested: count,
    }
}

/// Rows for `words`, flattened, optionally scaled to unit length.
pub fn gather_rows<S: AsRef<str>>(
    space: &EmbeddingSpace,
    words: &[S],
    unit_length: bool,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(words.len() * space.dim());
    for w in words {
        let v = space.vector(w.as_ref())?.components;
        if unit_length {
            out.extend(normalized(v)?);
        } else {
            out.extend_from_slice(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub dim: usize,
    /// `k × dim`, row-major.
    pub centroids: Vec<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after the initial assignment and after every iteration.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl ClusterModel {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

pub fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn check_points(data: &[f64], dim: usize, k: usize) -> Result<usize> {
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return Err(Error::InvalidParameter("data length is not a multiple of dim".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let m = data.len() / dim;
    if m < k {
        return Err(Error::Capacity(alloc::format!(
            "{m} points cannot form {k} clusters"
        )));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i / dim + 1 });
    }
    Ok(m)
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance from the nearest chosen centre.
pub fn kmeans_pp_init(data: &[f64], dim: usize, k: usize, seed: u64) -> Result<Vec<f64>> {
    let m = check_points(data, dim, k)?;
    let mut rng = seed::rng(seed);
    let point = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..m);
    centroids.extend_from_slice(point(first));
    let mut d2: Vec<f64> = (0..m).map(|i| sq_dist(point(i), point(first))).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > r {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..m)
        };
        let c = point(pick);
        centroids.extend_from_slice(c);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(point(i), c));
        }
    }
    Ok(centroids)
}

/// Mean of each cluster's members. Clusters left empty are reseeded, in
/// ascending order, at the point farthest from its own (updated) centroid;
/// a point reseeds at most one cluster.
pub fn update_centroids(
    data: &[f64],
    dim: usize,
    k: usize,
    assignments: &[usize],
) -> Vec<f64> {
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (x, &a) in data.chunks_exact(dim).zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a * dim..(a + 1) * dim].iter_mut().zip(x) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            sums[c * dim..(c + 1) * dim].iter_mut().for_each(|s| *s /= n);
        }
    }
    if counts.contains(&0) {
        let mut far: Vec<(f64, usize)> = data
            .chunks_exact(dim)
            .zip(assignments)
            .enumerate()
            .map(|(i, (x, &a))| (sq_dist(x, &sums[a * dim..(a + 1) * dim]), i))
            .collect();
        // farthest first, lower index on ties
        far.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
        let mut donors = far.into_iter();
        for c in 0..k {
            if counts[c] == 0 {
                let (_, i) = donors.next().expect("m >= k");
                sums[c * dim..(c + 1) * dim].copy_from_slice(&data[i * dim..(i + 1) * dim]);
            }
        }
    }
    sums
}

/// Elkan k-means from k-means++ seeding.
pub fn kmeans_elkan(
    data: &[f64],
    dim: usize,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterModel> {
    let init = kmeans_pp_init(data, dim, k, seed)?;
    let mut model = kmeans_elkan_from(data, dim, init, max_iter, tol)?;
    model.seed = seed;
    Ok(model)
}

/// Elkan k-means from caller-supplied initial centroids.
pub fn kmeans_elkan_from(
    data: &[f64],
    dim: usize,
    init: Vec<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterModel> {
    if dim == 0 || !init.len().is_multiple_of(dim) {
        return Err(Error::InvalidParameter("centroid length is not a multiple of dim".into()));
    }
    let k = init.len() / dim;
    let m = check_points(data, dim, k)?;
    let point = |i: usize| &data[i * dim..(i + 1) * dim];

    // Bounds are only trusted when they clear the other side by this margin,
    // which dominates the rounding they accumulate.
    let scale = data
        .chunks_exact(dim)
        .map(|x| libm::sqrt(x.iter().map(|v| v * v).sum::<f64>()))
        .fold(0.0, f64::max);
    let slack = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let clears = |u: f64, bound: f64| u + slack < bound;

    let mut centroids = init;
    let mut assignments = vec![0usize; m];
    let mut upper = vec![0.0; m];
    let mut lower = vec![0.0; m * k];

    for i in 0..m {
        let x = point(i);
        let mut best = (f64::INFINITY, 0);
        for c in 0..k {
            let d2 = sq_dist(x, &centroids[c * dim..(c + 1) * dim]);
            lower[i * k + c] = libm::sqrt(d2);
            if d2 < best.0 {
                best = (d2, c);
            }
        }
        assignments[i] = best.1;
        upper[i] = libm::sqrt(best.0);
    }

    let mut inertia = inertia_of(data, dim, &centroids, &assignments);
    let mut history = vec![inertia];
    let mut iterations = 0;
    let mut center_dist = vec![0.0; k * k];
    let mut half_gap = vec![0.0; k];

    for it in 1..=max_iter {
        iterations = it;
        let next = update_centroids(data, dim, k, &assignments);
        for c in 0..k {
            let shift = libm::sqrt(sq_dist(
                &centroids[c * dim..(c + 1) * dim],
                &next[c * dim..(c + 1) * dim],
            ));
            if shift > 0.0 {
                for i in 0..m {
                    let l = &mut lower[i * k + c];
                    *l = (*l - shift).max(0.0);
                }
            }
            for i in 0..m {
                if assignments[i] == c {
                    upper[i] += shift;
                }
            }
        }
        centroids = next;

        for c in 0..k {
            for c2 in c + 1..k {
                let d = libm::sqrt(sq_dist(
                    &centroids[c * dim..(c + 1) * dim],
                    &centroids[c2 * dim..(c2 + 1) * dim],
                ));
                center_dist[c * k + c2] = d;
                center_dist[c2 * k + c] = d;
            }
        }
        for c in 0..k {
            half_gap[c] = 0.5
                * (0..k)
                    .filter(|&c2| c2 != c)
                    .map(|c2| center_dist[c * k + c2])
                    .fold(f64::INFINITY, f64::min);
        }

        let mut changed = false;
        for i in 0..m {
            let x = point(i);
            let mut a = assignments[i];
            if clears(upper[i], half_gap[a]) {
                continue;
            }
            let mut best_sq = None::<f64>;
            for c in 0..k {
                if c == a
                    || clears(upper[i], lower[i * k + c])
                    || clears(upper[i], 0.5 * center_dist[a * k + c])
                {
                    continue;
                }
                let ba = match best_sq {
                    Some(v) => v,
                    None => {
                        let v = sq_dist(x, &centroids[a * dim..(a + 1) * dim]);
                        upper[i] = libm::sqrt(v);
                        lower[i * k + a] = upper[i];
                        best_sq = Some(v);
                        if clears(upper[i], lower[i * k + c])
                            || clears(upper[i], 0.5 * center_dist[a * k + c])
                        {
                            continue;
                        }
                        v
                    }
                };
                let d2 = sq_dist(x, &centroids[c * dim..(c + 1) * dim]);
                let d = libm::sqrt(d2);
                lower[i * k + c] = d;
                if d2 < ba || (d2 == ba && c < a) {
                    a = c;
                    best_sq = Some(d2);
                    upper[i] = d;
                }
            }
            if a != assignments[i] {
                assignments[i] = a;
                changed = true;
            }
        }

        let prev = inertia;
        inertia = inertia_of(data, dim, &centroids, &assignments);
        history.push(inertia);
        if !changed || prev <= 0.0 || (prev - inertia).abs() < tol * prev {
            break;
        }
    }

    Ok(ClusterModel {
        k,
        dim,
        centroids,
        assignments,
        inertia,
        inertia_history: history,
        iterations,
        seed: 0,
    })
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn inertia_of(data: &[f64], dim: usize, centroids: &[f64], assignments: &[usize]) -> f64 {
    data.chunks_exact(dim)
        .zip(assignments)
        .map(|(x, &a)| sq_dist(x, &centroids[a * dim..(a + 1) * dim]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElbowPoint {
    pub k: usize,
    pub inertia: f64,
}

/// Best inertia over `restarts` seeds for each `k`. Restart `r` for `k`
/// uses seed `derive_seed(seed, [k, r])`.
pub fn elbow_curve(
    data: &[f64],
    dim: usize,
    ks: &[usize],
    restarts: usize,
    seed: u64,
) -> Result<Vec<ElbowPoint>> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("k range must be strictly ascending".into()));
    }
    ks.iter()
        .map(|&k| {
            let mut best = f64::INFINITY;
            for r in 0..restarts {
                let s = seed::derive_seed(seed, &[k as u64, r as u64]);
                let model = kmeans_elkan(data, dim, k, s, DEFAULT_MAX_ITER, DEFAULT_TOL)?;
                best = best.min(model.inertia);
            }
            Ok(ElbowPoint { k, inertia: best })
        })
        .collect()
}

/// Relative inertia drop into each point after the first:
/// `(I(prev) - I(k)) / I(prev)`.
pub fn relative_drops(curve: &[ElbowPoint]) -> Vec<(usize, f64)> {
    curve
        .windows(2)
        .map(|w| {
            let drop = if w[0].inertia > 0.0 {
                (w[0].inertia - w[1].inertia) / w[0].inertia
            } else {
                0.0
            };
            (w[1].k, drop)
        })
        .collect()
}

/// The `k` with the largest relative drop.
pub fn elbow_k(curve: &[ElbowPoint]) -> Option<usize> {
    relative_drops(curve)
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterListing {
    pub cluster: usize,
    pub label: Option<String>,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    /// Largest cluster first.
    pub listings: Vec<ClusterListing>,
    /// Clusters with no members, omitted from `listings`.
    pub empty: Vec<usize>,
}

impl ClusterReport {
    /// Attaches human-assigned labels by cluster id.
    pub fn with_labels(mut self, labels: &BTreeMap<usize, String>) -> Self {
        for l in &mut self.listings {
            l.label = labels.get(&l.cluster).cloned();
        }
        self
    }
}

/// Case-insensitive alphabetical order; lowercase before uppercase on ties.
pub fn alphabetical(a: &str, b: &str) -> Ordering {
    a.to_lowercase()
        .cmp(&b.to_lowercase())
        .then_with(|| b.cmp(a))
}

pub fn cluster_report<S: AsRef<str>>(model: &ClusterModel, words: &[S]) -> Result<ClusterReport> {
    if words.len() != model.assignments.len() {
        return Err(Error::DimensionMismatch {
            expected: model.assignments.len(),
            found: words.len(),
        });
    }
    let mut groups: Vec<Vec<String>> = vec![Vec::new(); model.k];
    for (w, &a) in words.iter().zip(&model.assignments) {
        groups[a].push(String::from(w.as_ref()));
    }
    let empty = (0..model.k).filter(|&c| groups[c].is_empty()).collect();
    let mut listings: Vec<ClusterListing> = groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(cluster, mut words)| {
            words.sort_by(|a, b| alphabetical(a, b));
            ClusterListing {
                cluster,
                label: None,
                words,
            }
        })
        .collect();
    listings.sort_by(|a, b| b.words.len().cmp(&a.words.len()).then(a.cluster.cmp(&b.cluster)));
    Ok(ClusterReport { listings, empty })
}

/// Mean silhouette coefficient over all points, `None` when undefined
/// (fewer than two non-empty clusters).
pub fn silhouette_score(data: &[f64], dim: usize, assignments: &[usize], k: usize) -> Option<f64> {
    let m = assignments.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return None;
    }
    let point = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..m {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..m {
            if i != j {
                sums[assignments[j]] += libm::sqrt(sq_dist(point(i), point(j)));
            }
        }
        let own = assignments[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Some(total / m as f64)
}
