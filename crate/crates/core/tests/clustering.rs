mod common;

use common::{gaussian, naive_lloyd, rng, uniform_in};
use proptest::prelude::*;
use scweat_core::clustering::{
    cluster_report, elbow_curve, elbow_k, kmeans_elkan, kmeans_elkan_from, kmeans_pp_init,
    select_biased_words, sq_dist, ClusterModel,
};
use scweat_core::{AssociationRecord, Direction, Error};

fn flatten(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

fn rows_of(flat: &[f64], dim: usize) -> Vec<Vec<f64>> {
    flat.chunks_exact(dim).map(<[f64]>::to_vec).collect()
}

#[test]
fn elkan_matches_lloyd_on_random_instances() {
    let mut r = rng(17);
    for case in 0..100 {
        let m = 10 + (uniform_in(&mut r, 0.0, 191.0) as usize);
        let dim = 1 + (uniform_in(&mut r, 0.0, 20.0) as usize);
        let k = 1 + (uniform_in(&mut r, 0.0, 8.0) as usize);
        let data: Vec<Vec<f64>> = (0..m).map(|_| gaussian(&mut r, dim)).collect();
        let flat = flatten(&data);
        let init = kmeans_pp_init(&flat, dim, k, case).unwrap();
        let model = kmeans_elkan_from(&flat, dim, init.clone(), 300, 1e-6).unwrap();
        let (asg, cs, inertia) = naive_lloyd(&data, &rows_of(&init, dim), 300, 1e-6);
        assert_eq!(model.assignments, asg, "case {case}");
        assert!((model.inertia - inertia).abs() <= 1e-9 * inertia.max(1e-300), "case {case}");
        for (c, oracle) in cs.iter().enumerate() {
            for (x, y) in model.centroid(c).iter().zip(oracle) {
                assert!((x - y).abs() <= 1e-9, "case {case}");
            }
        }
    }
}

fn check_model(data: &[f64], dim: usize, model: &ClusterModel) -> Result<(), TestCaseError> {
    for (x, &a) in data.chunks_exact(dim).zip(&model.assignments) {
        let own = sq_dist(x, model.centroid(a)).sqrt();
        for c in 0..model.k {
            prop_assert!(own <= sq_dist(x, model.centroid(c)).sqrt() + 1e-12);
        }
    }
    let recomputed: f64 = data
        .chunks_exact(dim)
        .zip(&model.assignments)
        .map(|(x, &a)| sq_dist(x, model.centroid(a)))
        .sum();
    prop_assert!((recomputed - model.inertia).abs() <= 1e-8 * recomputed.max(1e-300));
    for w in model.inertia_history.windows(2) {
        prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitted_models_are_locally_optimal(
        (dim, k, data) in (1usize..6, 1usize..6).prop_flat_map(|(dim, k)| {
            (Just(dim), Just(k), prop::collection::vec(-5.0f64..5.0, (k * dim)..(40 * dim))
                .prop_map(move |mut v| { v.truncate(v.len() / dim * dim); v }))
        }),
        seed in any::<u64>(),
    ) {
        prop_assume!(data.len() / dim >= k);
        let model = kmeans_elkan(&data, dim, k, seed, 300, 1e-6).unwrap();
        check_model(&data, dim, &model)?;
        let again = kmeans_elkan(&data, dim, k, seed, 300, 1e-6).unwrap();
        prop_assert_eq!(model, again);
    }
}

#[test]
fn duplicate_points_still_yield_k_clusters() {
    let data = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
    let model = kmeans_elkan(&data, 2, 3, 4, 300, 1e-6).unwrap();
    assert!(model.inertia.is_finite());
    assert_eq!(model.assignments.len(), 4);
}

#[test]
fn fewer_points_than_clusters_is_capacity_error() {
    assert!(matches!(
        kmeans_elkan(&[0.0, 1.0], 1, 3, 0, 300, 1e-6),
        Err(Error::Capacity(_))
    ));
}

#[test]
fn one_cluster_is_the_mean() {
    let mut r = rng(8);
    let data: Vec<f64> = (0..30).flat_map(|_| gaussian(&mut r, 3)).collect();
    let model = kmeans_elkan(&data, 3, 1, 0, 300, 1e-6).unwrap();
    let rows = rows_of(&data, 3);
    let mean: Vec<f64> = (0..3).map(|j| rows.iter().map(|x| x[j]).sum::<f64>() / 30.0).collect();
    for (x, y) in model.centroid(0).iter().zip(&mean) {
        assert!((x - y).abs() < 1e-12);
    }
    let tss: f64 = rows.iter().map(|x| sq_dist(x, &mean)).sum();
    assert!((model.inertia - tss).abs() < 1e-9 * tss);
}

fn blobs(r: &mut rand_chacha::ChaCha8Rng, centres: &[[f64; 2]], per: usize, spread: f64) -> Vec<f64> {
    centres
        .iter()
        .flat_map(|c| {
            (0..per)
                .flat_map(|_| {
                    let g = gaussian(r, 2);
                    [c[0] + spread * g[0], c[1] + spread * g[1]]
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn two_blobs_separate_for_any_seed() {
    let mut r = rng(1);
    let data = blobs(&mut r, &[[0.0, 0.0], [20.0, 20.0]], 20, 1.0);
    for seed in 0..20 {
        let model = kmeans_elkan(&data, 2, 2, seed, 300, 1e-6).unwrap();
        let first = model.assignments[0];
        assert!(model.assignments[..20].iter().all(|&a| a == first));
        assert!(model.assignments[20..].iter().all(|&a| a != first));
    }
}

#[test]
fn elbow_lands_on_three_blobs() {
    let mut hits = 0;
    for run in 0..20 {
        let mut r = rng(1000 + run);
        let data = blobs(&mut r, &[[0.0, 0.0], [12.0, 0.0], [6.0, 10.0]], 30, 1.0);
        let curve = elbow_curve(&data, 2, &[1, 2, 3, 4, 5, 6], 3, run).unwrap();
        assert!(curve[1].inertia <= curve[0].inertia);
        if elbow_k(&curve) == Some(3) {
            hits += 1;
        }
    }
    assert!(hits >= 19, "{hits}/20");
}

#[test]
fn one_point_per_cluster_has_zero_inertia() {
    let data = [0.0, 1.0, 5.0, 9.0];
    let curve = elbow_curve(&data, 1, &[4], 1, 0).unwrap();
    assert_eq!(curve[0].inertia, 0.0);
}

fn fixture(name: &str) -> Vec<String> {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn appendix_cluster_listing_echoes_back() {
    let words = fixture("cluster_cooking_kitchen.txt");
    assert_eq!(&words[..3], ["bake", "Bake", "baked"]);
    // feed the words in reverse so the listing has to reorder them
    let reversed: Vec<String> = words.iter().rev().cloned().collect();
    let model = ClusterModel {
        k: 1,
        dim: 1,
        centroids: vec![0.0],
        assignments: vec![0; reversed.len()],
        inertia: 0.0,
        inertia_history: vec![0.0],
        iterations: 0,
        seed: 0,
    };
    let report = cluster_report(&model, &reversed).unwrap();
    assert_eq!(report.listings.len(), 1);
    assert_eq!(report.listings[0].words, words);
}

#[test]
fn report_orders_by_size_and_notes_empty_clusters() {
    let model = ClusterModel {
        k: 3,
        dim: 1,
        centroids: vec![0.0, 1.0, 2.0],
        assignments: vec![2, 0, 2, 2, 0],
        inertia: 0.0,
        inertia_history: vec![0.0],
        iterations: 0,
        seed: 0,
    };
    let report = cluster_report(&model, &["e", "d", "c", "b", "a"]).unwrap();
    assert_eq!(report.listings[0].cluster, 2);
    assert_eq!(report.listings[0].words, ["b", "c", "e"]);
    assert_eq!(report.listings[1].words, ["a", "d"]);
    assert_eq!(report.empty, [1]);
}

#[test]
fn six_points_two_blobs() {
    let data = [0.0, 0.1, 0.2, 10.0, 10.1, 10.2];
    let model = kmeans_elkan(&data, 1, 2, 0, 300, 1e-6).unwrap();
    let report = cluster_report(&model, &["a", "b", "c", "x", "y", "z"]).unwrap();
    assert_eq!(report.listings.len(), 2);
    assert!(report.listings.iter().all(|l| l.words.len() == 3));
}

fn record(word: &str, rank: usize, d: f64, p: f64) -> AssociationRecord {
    AssociationRecord {
        word: word.into(),
        rank,
        effect_size: d,
        p_value: Some(p),
    }
}

#[test]
fn selection_filters() {
    let records: Vec<AssociationRecord> = (0..10)
        .map(|i| record(&format!("w{i}"), i + 1, if i % 2 == 0 { 0.6 } else { -0.6 }, 0.01))
        .collect();
    let set = select_biased_words(&records, Direction::A, 3, 0.5, 0.05);
    assert_eq!(set.words(), ["w0", "w2", "w4"]);
    assert!(!set.exhausted());
    let weak = [record("x", 1, 0.6, 0.2), record("y", 2, 0.6, 0.01)];
    let set = select_biased_words(&weak, Direction::A, 5, 0.5, 0.05);
    assert_eq!(set.words(), ["y"]);
    assert!(set.exhausted());
}
