mod common;

use common::{assert_ok, body, scweat, scweat_in, stderr, stdout, Planted};

#[test]
fn assoc_reads_words_from_stdin() {
    let p = Planted::new(20, 10, 1);
    let o = scweat(
        &["assoc", "--embeddings", p.path_str(), "--a", "gender-female", "--b", "gender-male", "--words", "-"],
        Some("fem1\nmal1\nnot-a-word\n"),
        &[],
    );
    assert_ok(&o);
    let out = stdout(&o);
    assert!(out.contains("# sign: positive effect_size = associated with gender-female"));
    assert!(out.contains("# seed: 0"));
    assert!(out.contains("# config_hash: sha256:"));
    let out = body(&out);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "word,rank,effect_size,p_value");
    assert_eq!(rows.len(), 3);
    let fem: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(fem[0], "fem1");
    assert!(fem[2].parse::<f64>().unwrap() > 1.0);
    assert!(fem[3].parse::<f64>().unwrap() < 0.05);
    assert!(rows[2].starts_with("mal1,"));
    assert!(stderr(&o).contains("not-a-word"));
}

#[test]
fn exit_codes_follow_error_class() {
    let p = Planted::new(10, 6, 2);
    let unknown = scweat(&["bogus"], None, &[]);
    assert_eq!(unknown.status.code(), Some(2));
    let e = stderr(&unknown);
    assert_eq!(e.lines().count(), 1);
    assert!(e.starts_with("error kind=config msg="));

    let bad_flag = scweat(&["assoc", "--embeddings", p.path_str(), "--k", "3"], None, &[]);
    assert_eq!(bad_flag.status.code(), Some(2));

    let missing = scweat(&["assoc", "--embeddings", "/nonexistent/file.txt"], None, &[]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = p.dir.path().join("bad.txt");
    std::fs::write(&bad, "a 1 2 3\nb 1 2\n").unwrap();
    let data = scweat(&["assoc", "--embeddings", bad.to_str().unwrap()], None, &[]);
    assert_eq!(data.status.code(), Some(3));
    assert!(stderr(&data).contains("bad.txt:2"));

    let cap = scweat(
        &["project", "--embeddings", p.path_str(), "--top", "30", "--max-points", "20"],
        None,
        &[],
    );
    assert_eq!(cap.status.code(), Some(4));
    assert!(stderr(&cap).starts_with("error kind=capacity"));

    assert_eq!(scweat(&["--help"], None, &[]).status.code(), Some(0));
    assert_eq!(scweat(&["--version"], None, &[]).status.code(), Some(0));
}

#[test]
fn config_file_values_yield_to_flags() {
    let p = Planted::new(10, 6, 3);
    let conf = p.dir.path().join("run.conf");
    std::fs::write(&conf, "# test run\np_mode = monte-carlo\nsamples = 500\nseed = 7\nreproducible = true\n").unwrap();
    let o = scweat(
        &["assoc", "--config", conf.to_str().unwrap(), "--embeddings", p.path_str(), "--seed", "11"],
        None,
        &[],
    );
    assert_ok(&o);
    let out = stdout(&o);
    assert!(out.contains("# seed: 11"));
    assert!(out.contains("# config: samples=500"));
    assert!(out.contains("# config: p_mode=monte-carlo"));
    assert!(!out.contains("generated_unix"));

    let broken = p.dir.path().join("broken.conf");
    std::fs::write(&broken, "samples\n").unwrap();
    let o = scweat(&["assoc", "--config", broken.to_str().unwrap(), "--embeddings", p.path_str()], None, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn header_hash_tracks_settings_not_destinations() {
    let p = Planted::new(10, 6, 4);
    let hash = |extra: &[&str]| {
        let mut args = vec!["assoc", "--embeddings", p.path_str(), "--p-mode", "none", "--reproducible"];
        args.extend_from_slice(extra);
        let o = scweat(&args, None, &[]);
        assert_ok(&o);
        stdout(&o).lines().find(|l| l.starts_with("# config_hash")).unwrap().to_string()
    };
    let base = hash(&[]);
    assert_eq!(base, hash(&["--workers", "3"]));
    assert_ne!(base, hash(&["--seed", "1"]));
    assert_ne!(base, hash(&["--samples", "5"]));
}

#[test]
fn freq_table_matches_the_planted_tally() {
    let p = Planted::new(150, 12, 5);
    let o = scweat(
        &["freq-table", "--embeddings", p.path_str(), "--ranges", "10,100,300,1000", "--thresholds", "0,0.5"],
        None,
        &[],
    );
    assert_ok(&o);
    let out = body(&stdout(&o));
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "range,zero,gender-female_0,gender-female_0_pct,gender-male_0,gender-male_0_pct,\
         gender-female_0.5,gender-female_0.5_pct,gender-male_0.5,gender-male_0.5_pct"
    );
    for n in [10, 100, 300] {
        let (a, b) = p.tally(n);
        let pa = format!("{:.2}", 100.0 * a as f64 / n as f64);
        let pb = format!("{:.2}", 100.0 * b as f64 / n as f64);
        assert_eq!(lines.next().unwrap(), format!("{n},0,{a},{pa},{b},{pb},{a},{pa},{b},{pb}"));
    }
    assert_eq!(lines.next().unwrap(), format!("1000{}", ",NA".repeat(9)));
    assert!(stderr(&o).contains("range-unavailable"));
}

#[test]
fn freq_table_from_saved_records_matches_direct_sweep() {
    let p = Planted::new(60, 8, 6);
    let records = p.dir.path().join("records.csv");
    let long = p.dir.path().join("long.tsv");
    assert_ok(&scweat(
        &["assoc", "--embeddings", p.path_str(), "--p-mode", "none", "--out", records.to_str().unwrap()],
        None,
        &[],
    ));
    let from_records = scweat(
        &["freq-table", "--records", records.to_str().unwrap(), "--ranges", "10,50,100", "--long", long.to_str().unwrap()],
        None,
        &[],
    );
    let direct = scweat(&["freq-table", "--embeddings", p.path_str(), "--ranges", "10,50,100"], None, &[]);
    assert_ok(&from_records);
    assert_ok(&direct);
    assert_eq!(body(&stdout(&from_records)), body(&stdout(&direct)));
    let long = std::fs::read_to_string(long).unwrap();
    let long = body(&long);
    assert!(long.starts_with("range\tthreshold\tdirection\tcount\tpct\n"));
    // 3 ranges x 4 thresholds x 2 directions
    assert_eq!(long.lines().count(), 1 + 3 * 4 * 2);
}

#[test]
fn cluster_writes_three_artifacts_per_side() {
    let p = Planted::new(60, 8, 7);
    let out = p.dir.path().join("clusters");
    let labels = p.dir.path().join("labels.tsv");
    std::fs::write(&labels, "0\tfirst\n").unwrap();
    let o = scweat(
        &[
            "cluster", "--embeddings", p.path_str(), "--k", "3", "--d-min", "0.5", "--p-max", "0.05", "--count", "40",
            "--perplexity", "5", "--labels-a", labels.to_str().unwrap(), "--out-dir", out.to_str().unwrap(),
        ],
        None,
        &[],
    );
    assert_ok(&o);
    for set in ["gender-female", "gender-male"] {
        let tsv = std::fs::read_to_string(out.join(format!("{set}_clusters.tsv"))).unwrap();
        let rows: Vec<String> = body(&tsv).lines().map(String::from).collect();
        assert_eq!(rows[0], "word\tcluster_id\teffect_size\tp_value");
        assert_eq!(rows.len(), 41);
        for r in &rows[1..] {
            let f: Vec<&str> = r.split('\t').collect();
            let d: f64 = f[2].parse().unwrap();
            let pv: f64 = f[3].parse().unwrap();
            assert!(d.abs() >= 0.5 && pv < 0.05);
            assert_eq!(d > 0.0, set == "gender-female");
            assert!(f[1].parse::<usize>().unwrap() < 3);
        }
        let report = std::fs::read_to_string(out.join(format!("{set}_report.txt"))).unwrap();
        assert!(report.contains("silhouette:"));
        let dat = std::fs::read_to_string(out.join(format!("{set}_projection.dat"))).unwrap();
        let dat = body(&dat);
        assert_eq!(dat.lines().next().unwrap(), "x y cluster");
        assert_eq!(dat.lines().count(), 41);
    }
    let report = std::fs::read_to_string(out.join("gender-female_report.txt")).unwrap();
    assert!(report.contains("): first"));
}

#[test]
fn failed_run_leaves_no_files() {
    let p = Planted::new(20, 6, 8);
    let out = p.dir.path().join("empty");
    // 20 words per side cannot fill 25 clusters
    let o = scweat(
        &["cluster", "--embeddings", p.path_str(), "--k", "25", "--count", "20", "--out-dir", out.to_str().unwrap()],
        None,
        &[],
    );
    assert_eq!(o.status.code(), Some(4));
    let left: Vec<_> = std::fs::read_dir(&out).map(|d| d.collect()).unwrap_or_default();
    assert!(left.is_empty(), "{left:?}");
}

#[test]
fn reproducible_runs_are_byte_identical() {
    let p = Planted::new(30, 8, 9);
    let args = ["assoc", "--embeddings", p.path_str(), "--p-mode", "monte-carlo", "--samples", "300", "--seed", "5", "--reproducible"];
    let a = scweat(&args, None, &[]);
    let b = scweat(&args, None, &[]);
    assert_ok(&a);
    assert_eq!(a.stdout, b.stdout);
    let timed = scweat(&args[..args.len() - 1], None, &[]);
    assert!(stdout(&timed).contains("# generated_unix: "));
    assert_eq!(body(&stdout(&timed)), body(&stdout(&a)));
}

#[test]
fn elbow_reports_curve_and_choice() {
    let p = Planted::new(40, 8, 10);
    let o = scweat(
        &["elbow", "--embeddings", p.path_str(), "--count", "30", "--k-max", "4", "--restarts", "2", "--direction", "a"],
        None,
        &[],
    );
    assert_ok(&o);
    let out = stdout(&o);
    assert!(out.contains("# elbow_k gender-female: "));
    let out = body(&out);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "direction,k,inertia,relative_drop");
    assert_eq!(rows.len(), 5);
    assert!(rows[1].ends_with(','));
    let inertia: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(inertia.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn pos_table_counts_selected_words() {
    let p = Planted::new(40, 8, 11);
    let lex = p.dir.path().join("tags.tsv");
    let mut tags = String::new();
    for (w, side) in &p.words {
        tags.push_str(&format!("{w}\t{}\n", if *side { "NN" } else { "VBD" }));
    }
    std::fs::write(&lex, tags).unwrap();
    let o = scweat(
        &["pos-table", "--embeddings", p.path_str(), "--pos-lexicon", lex.to_str().unwrap(), "--cutoffs", "10,20"],
        None,
        &[],
    );
    assert_ok(&o);
    let out = body(&stdout(&o));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "direction,cutoff,total,nouns,verbs,adjectives,adverbs,other,nn,nnp,nns,nnps");
    assert_eq!(rows[1], "gender-female,10,10,10,0,0,0,0,10,0,0,0");
    assert_eq!(rows[2], "gender-female,20,20,20,0,0,0,0,20,0,0,0");
    assert_eq!(rows[3], "gender-male,10,10,0,10,0,0,0,0,0,0,0");
}

#[test]
fn vad_corr_writes_strata_and_plot_data() {
    let p = Planted::new(40, 8, 12);
    let vad = p.dir.path().join("vad.tsv");
    let freq = p.dir.path().join("freq.tsv");
    let fig = p.dir.path().join("fig6.dat");
    // valence high for the A side, dominance high for the B side
    let mut v = String::from("word\tvalence\tarousal\tdominance\n");
    let mut f = String::new();
    for (i, (w, side)) in p.words.iter().enumerate() {
        let (val, dom) = if *side { (0.9, 0.1) } else { (0.1, 0.9) };
        v.push_str(&format!("{w}\t{val}\t0.5\t{dom}\n"));
        f.push_str(&format!("{w}\t{}\n", 1000 - i));
    }
    std::fs::write(&vad, v).unwrap();
    std::fs::write(&freq, f).unwrap();
    let o = scweat(
        &[
            "vad-corr", "--embeddings", p.path_str(), "--vad", vad.to_str().unwrap(), "--frequency",
            freq.to_str().unwrap(), "--ranges", "10,40", "--fig6", fig.to_str().unwrap(),
        ],
        None,
        &[],
    );
    assert_ok(&o);
    let out = stdout(&o);
    assert!(out.contains("# intersection: 80"));
    let rows: Vec<String> = body(&out).lines().map(String::from).collect();
    assert_eq!(rows[0], "stratum,n,rho_valence,rho_arousal,rho_dominance");
    let all = rows.iter().find(|r| r.starts_with("all,")).unwrap();
    let f: Vec<&str> = all.split(',').collect();
    assert_eq!(f[1], "80");
    assert!(f[2].parse::<f64>().unwrap() > 0.8);
    assert_eq!(f[3], "");
    assert!(f[4].parse::<f64>().unwrap() < -0.8);
    let fig = std::fs::read_to_string(fig).unwrap();
    let fig = body(&fig);
    assert_eq!(fig.lines().next().unwrap(), "threshold rho_valence rho_arousal rho_dominance");
    assert_eq!(fig.lines().count(), 5);
    assert!(fig.lines().nth(1).unwrap().contains("NA"));
}

#[test]
fn concept_pipeline_over_two_spaces() {
    let p = Planted::new(40, 8, 13);
    let q = Planted::new(40, 8, 13);
    let seeds = p.dir.path().join("seeds.txt");
    std::fs::write(&seeds, "fem1\nfem2\nfem3\n").unwrap();
    let out = p.dir.path().join("concept");
    let o = scweat(
        &[
            "concept", "--embeddings", p.path_str(), "--embeddings", q.path_str(), "--seeds",
            seeds.to_str().unwrap(), "--top-n", "30", "--out-dir", out.to_str().unwrap(),
        ],
        None,
        &[],
    );
    assert_ok(&o);
    for f in ["neighbors_1.tsv", "neighbors_2.tsv", "intersection.txt", "distribution.csv", "fig5_1.dat", "fig5_2.dat"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let words = body(&std::fs::read_to_string(out.join("intersection.txt")).unwrap());
    // identical spaces: the intersection is the whole list
    assert_eq!(words.lines().count(), 30);
    let dist = body(&std::fs::read_to_string(out.join("distribution.csv")).unwrap());
    let rows: Vec<&str> = dist.lines().collect();
    assert_eq!(rows[0], "space,threshold,total,gender-female,gender-female_pct,gender-male,gender-male_pct");
    assert_eq!(rows.len(), 1 + 2 * 4);

    // a seed absent from the space is a data error unless dropped
    std::fs::write(&seeds, "fem1\nnowhere\n").unwrap();
    let args = ["concept", "--embeddings", p.path_str(), "--seeds", seeds.to_str().unwrap(), "--top-n", "5"];
    let o = scweat_in(Some(p.dir.path()), &args, None, &[]);
    assert_eq!(o.status.code(), Some(3));
    let mut dropped = args.to_vec();
    dropped.push("--drop-missing");
    let o = scweat_in(Some(p.dir.path()), &dropped, None, &[]);
    assert_ok(&o);
    assert!(stderr(&o).contains("seeds-dropped"));
}

#[test]
fn project_emits_effect_sizes() {
    let p = Planted::new(30, 8, 14);
    let o = scweat(
        &["project", "--embeddings", p.path_str(), "--top", "60", "--perplexity", "10", "--iterations", "300"],
        None,
        &[],
    );
    assert_ok(&o);
    let out = stdout(&o);
    assert!(out.contains("# kl_divergence: "));
    let out = body(&out);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "x y effect_size");
    assert_eq!(rows.len(), 61);
    for (r, (_, side)) in rows[1..].iter().zip(&p.words) {
        let d: f64 = r.split(' ').nth(2).unwrap().parse().unwrap();
        assert_eq!(d > 0.0, *side);
    }
}
