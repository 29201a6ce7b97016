#![allow(dead_code)]

use islp::catalog::{catalog, CatalogEntry};
use islp::merit::linear_model;
use islp::solver::{solve, SolveReport, SolverConfig};
use islp::{ConstraintKind, Evaluation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random linearization with `n <= 4`, `m <= 4` and entries in `[-2, 2]`.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Evaluation {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(0..=4);
    let mut entry = || rng.gen_range(-2.0..=2.0);
    let g = (0..n).map(|_| entry()).collect();
    let jacobian = (0..m).map(|_| (0..n).map(|_| entry()).collect()).collect();
    let b = (0..m).map(|_| entry()).collect();
    let kinds = (0..m)
        .map(|_| {
            if rng.gen_bool(0.5) {
                ConstraintKind::Equality
            } else {
                ConstraintKind::Inequality
            }
        })
        .collect();
    Evaluation {
        x: vec![0.0; n],
        f: 0.0,
        g,
        b,
        jacobian,
        kinds,
    }
}

/// Solves `A x = r` for square `A` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        r.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            r[i] -= f * r[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / a[i][i];
    }
    Some(x)
}

fn subsets(k: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(k, n, i + 1, cur, out);
        cur.pop();
    }
}

/// Minimum of `l(d; rho)` over `||d||_inf <= delta` by enumerating every point
/// where `n` of the kink and box hyperplanes meet.
pub fn vertex_oracle(eval: &Evaluation, rho: f64, delta: f64) -> f64 {
    let n = eval.dim();
    // hyperplanes (a, c) meaning <a, d> = c
    let mut planes: Vec<(Vec<f64>, f64)> = eval
        .jacobian
        .iter()
        .zip(&eval.b)
        .map(|(a, b)| (a.clone(), -b))
        .collect();
    for j in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e, s * delta));
        }
    }
    let mut combos = Vec::new();
    subsets(n, planes.len(), 0, &mut Vec::new(), &mut combos);
    let mut best = f64::INFINITY;
    for c in combos {
        let a = c.iter().map(|&i| planes[i].0.clone()).collect();
        let r = c.iter().map(|&i| planes[i].1).collect();
        if let Some(d) = solve_square(a, r) {
            if d.iter().all(|x| x.abs() <= delta * (1.0 + 1e-12)) {
                best = best.min(linear_model(eval, &d, rho));
            }
        }
    }
    best
}

pub struct CatalogRun {
    pub entry: CatalogEntry,
    pub report: SolveReport,
    pub seconds: f64,
}

/// Every catalog entry from its standard start, plus the infeasible entry from
/// the mirrored start.
pub fn run_catalog(config: &SolverConfig) -> Vec<CatalogRun> {
    let mut entries = catalog();
    let mirrored = islp::catalog::find("infeasible")
        .unwrap()
        .with_start(vec![-3.0]);
    entries.push(mirrored);
    entries
        .into_iter()
        .map(|entry| {
            let t = std::time::Instant::now();
            let report = solve(&entry.problem, &entry.x0, config).unwrap();
            CatalogRun {
                seconds: t.elapsed().as_secs_f64(),
                entry,
                report,
            }
        })
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
