#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const FEMALE: [&str; 8] = ["female", "she", "her", "hers", "woman", "girl", "daughter", "sister"];
pub const MALE: [&str; 8] = ["male", "he", "him", "his", "man", "boy", "son", "brother"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let n = Normal::new(0.0, 1.0).unwrap();
    (0..dim).map(|_| n.sample(r)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Point near `c`: each component gets noise with standard deviation
/// `0.1 * |c| / sqrt(dim)`, so the noise vector's length is about a tenth
/// of the centroid's.
pub fn near(r: &mut ChaCha8Rng, c: &[f64]) -> Vec<f64> {
    let s = 0.1 * norm(c) / (c.len() as f64).sqrt();
    let n = Normal::new(0.0, s).unwrap();
    c.iter().map(|x| x + n.sample(r)).collect()
}

/// Synthetic space with words planted near one of two centroids. Planted
/// words come first in frequency order; the 16 gender attribute words sit
/// at the bottom so frequency ranges only cover planted words.
pub struct Planted {
    pub dir: tempfile::TempDir,
    pub path: PathBuf,
    /// Planted words in rank order, with `true` for the A (female) side.
    pub words: Vec<(String, bool)>,
    pub dim: usize,
}

impl Planted {
    pub fn new(per_side: usize, dim: usize, seed: u64) -> Self {
        let mut r = rng(seed);
        let ca = gaussian(&mut r, dim);
        let cb = gaussian(&mut r, dim);
        // a fixed, seed-dependent interleaving of the two sides
        let mut sides: Vec<bool> = (0..2 * per_side).map(|i| i < per_side).collect();
        use rand::seq::SliceRandom;
        sides.shuffle(&mut r);
        let mut text = String::new();
        let mut words = Vec::new();
        let (mut na, mut nb) = (0, 0);
        for side in sides {
            let (name, c) = if side {
                na += 1;
                (format!("fem{na}"), &ca)
            } else {
                nb += 1;
                (format!("mal{nb}"), &cb)
            };
            line(&mut text, &name, &near(&mut r, c));
            words.push((name, side));
        }
        for w in FEMALE {
            line(&mut text, w, &near(&mut r, &ca));
        }
        for w in MALE {
            line(&mut text, w, &near(&mut r, &cb));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("planted.txt");
        std::fs::write(&path, text).unwrap();
        Self { dir, path, words, dim }
    }

    pub fn path_str(&self) -> &str {
        self.path.to_str().unwrap()
    }

    /// Planted A and B counts among the first `n` ranks.
    pub fn tally(&self, n: usize) -> (usize, usize) {
        let a = self.words.iter().take(n).filter(|w| w.1).count();
        (a, n.min(self.words.len()) - a)
    }
}

fn line(out: &mut String, word: &str, v: &[f64]) {
    out.push_str(word);
    for x in v {
        out.push(' ');
        out.push_str(&x.to_string());
    }
    out.push('\n');
}

/// Runs the binary with `SCWEAT_WORKERS` cleared unless given in `env`.
pub fn scweat(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    scweat_in(None, args, stdin, env)
}

pub fn scweat_in(cwd: Option<&Path>, args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scweat"));
    cmd.args(args).env_remove("SCWEAT_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    if let Some(d) = cwd {
        cmd.current_dir(d);
    }
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    }
    child.wait_with_output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Lines that are not `#` comments.
pub fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}\nstderr:\n{}", o.status.code(), stderr(o));
}
