use std::time::Instant;

use treedist::oracle::random_phylogeny;
use treedist::shared::{nonshared_bruteforce, nonshared_edges, Mode};
use treedist::Phylogeny;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub algorithm: &'static str,
    pub n: usize,
    pub seconds: f64,
}

pub struct BenchConfig {
    pub min_exp: u32,
    pub max_exp: u32,
    pub brute_min_exp: u32,
    pub brute_max_exp: u32,
    pub trials: usize,
    pub seed: u64,
}

/// Two independent binary trees on the same leaves. Binary unweighted
/// pairs always satisfy the full-mode preconditions.
pub fn bench_pair(n: usize, seed: u64) -> (Phylogeny, Phylogeny) {
    (random_phylogeny(n, 3, false, seed), random_phylogeny(n, 3, false, seed ^ 0x9e37_79b9))
}

fn best_of(trials: usize, mut f: impl FnMut()) -> f64 {
    (0..trials.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn run(cfg: &BenchConfig) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for k in cfg.min_exp..=cfg.max_exp {
        let n = 1usize << k;
        let (t, tp) = bench_pair(n, cfg.seed + k as u64);
        let seconds = best_of(cfg.trials, || {
            nonshared_edges(t.tree(), tp.tree(), Mode::Full).expect("bench pair satisfies preconditions");
        });
        rows.push(BenchRow {
            algorithm: "fast",
            n,
            seconds,
        });
    }
    for k in cfg.brute_min_exp..=cfg.brute_max_exp {
        let n = 1usize << k;
        let (t, tp) = bench_pair(n, cfg.seed + k as u64);
        let seconds = best_of(cfg.trials, || {
            nonshared_bruteforce(t.tree(), tp.tree(), Mode::Full);
        });
        rows.push(BenchRow {
            algorithm: "bruteforce",
            n,
            seconds,
        });
    }
    rows
}

/// Least-squares slope of `log seconds` against `log n`.
pub fn loglog_slope(points: &[(usize, f64)]) -> f64 {
    let xy: Vec<(f64, f64)> = points.iter().map(|&(n, s)| ((n as f64).ln(), s.max(1e-9).ln())).collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

pub fn csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("algorithm,n,seconds\n");
    for r in rows {
        s += &format!("{},{},{:.9}\n", r.algorithm, r.n, r.seconds);
    }
    s
}
