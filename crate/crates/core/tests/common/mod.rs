//! Independent oracles and invariant checks shared by the oracle and
//! acceptance test targets. Each check returns the number of instances it
//! verified, or a description of the first failure.

#![allow(dead_code)]

use cs_adapt::coherence::{cross_coherence, mutual_coherence, welch_bound};
use cs_adapt::harness::{run_experiment, Algorithm, ExperimentConfig, MatrixVariant};
use cs_adapt::matrix::{gaussian_matrix, DenseMatrix};
use cs_adapt::recovery::{basis_pursuit, omp, BpConfig, SparseVector};
use cs_adapt::rng::{RngSeed, SeededRng};

pub type Check = Result<usize, String>;

/// Gaussian elimination with partial pivoting. `None` when singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

fn residual_norm(a: &DenseMatrix, support: &[usize], coef: &[f64], y: &[f64]) -> f64 {
    let mut r = y.to_vec();
    for (&j, &c) in support.iter().zip(coef) {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri -= a[(i, j)] * c;
        }
    }
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Least squares on a support through the normal equations.
fn support_fit(a: &DenseMatrix, support: &[usize], y: &[f64]) -> Option<Vec<f64>> {
    let g: Vec<Vec<f64>> = support
        .iter()
        .map(|&p| support.iter().map(|&q| (0..a.rows()).map(|i| a[(i, p)] * a[(i, q)]).sum()).collect())
        .collect();
    let rhs: Vec<f64> = support.iter().map(|&p| (0..a.rows()).map(|i| a[(i, p)] * y[i]).sum()).collect();
    solve_square(g, rhs)
}

fn combinations(l: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, l: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..l {
            cur.push(j);
            rec(j + 1, l, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, l, k, &mut Vec::new(), &mut out);
    out
}

/// Sparsest exact representation of `y` over the columns of `a` with at most
/// `k` atoms, found by trying every support.
pub fn exhaustive_sparsest(a: &DenseMatrix, y: &[f64], k: usize) -> Option<(Vec<usize>, Vec<f64>)> {
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    for size in 1..=k {
        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        for s in combinations(a.cols(), size) {
            if let Some(c) = support_fit(a, &s, y) {
                let r = residual_norm(a, &s, &c, y);
                if r <= 1e-9 * y_norm && best.as_ref().is_none_or(|b| r < b.0) {
                    best = Some((r, s, c));
                }
            }
        }
        if let Some((_, s, c)) = best {
            return Some((s, c));
        }
    }
    None
}

fn brute_mutual(a: &DenseMatrix) -> f64 {
    let mut best = 0.0f64;
    for i in 0..a.cols() {
        for j in i + 1..a.cols() {
            let (mut ip, mut ni, mut nj) = (0.0, 0.0, 0.0);
            for r in 0..a.rows() {
                ip += a[(r, i)] * a[(r, j)];
                ni += a[(r, i)] * a[(r, i)];
                nj += a[(r, j)] * a[(r, j)];
            }
            best = best.max(f64::abs(ip) / (f64::sqrt(ni) * f64::sqrt(nj)));
        }
    }
    best
}

fn brute_cross(phi: &DenseMatrix, psi: &DenseMatrix) -> f64 {
    let mut best = 0.0f64;
    for i in 0..phi.rows() {
        for j in 0..psi.cols() {
            let (mut ip, mut ni, mut nj) = (0.0, 0.0, 0.0);
            for r in 0..phi.cols() {
                ip += phi[(i, r)] * psi[(r, j)];
                ni += phi[(i, r)] * phi[(i, r)];
                nj += psi[(r, j)] * psi[(r, j)];
            }
            best = best.max(f64::abs(ip) / (f64::sqrt(ni) * f64::sqrt(nj)));
        }
    }
    best
}

fn random_sparse(rng: &mut SeededRng, l: usize, k: usize) -> SparseVector {
    let support = rng.sample_without_replacement(l, k);
    // Keep magnitudes away from zero so the planted support is unambiguous.
    let values = (0..k)
        .map(|_| {
            let v = rng.standard_normal();
            v.signum() * (0.5 + v.abs())
        })
        .collect();
    SparseVector::new(l, support, values).unwrap()
}

/// Column-normalized `I + εG` truncated to `l ≤ m` columns.
fn near_orthogonal(m: usize, l: usize, eps: f64, seed: RngSeed) -> DenseMatrix {
    let g = DenseMatrix::gaussian_raw(m, l, seed);
    let mut rows = vec![vec![0.0; l]; m];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 1.0 } else { 0.0 } + eps * g[(i, j)];
        }
    }
    cs_adapt::matrix::normalize_columns(&DenseMatrix::from_rows(&rows).unwrap()).unwrap()
}

fn compare_omp(a: &DenseMatrix, alpha: &SparseVector, k: usize, tag: &str) -> Result<(), String> {
    let mu = brute_mutual(a);
    if !((k as f64) < (1.0 + 1.0 / mu) / 2.0) {
        return Err(format!("{tag}: instance outside the guarantee regime (mu={mu})"));
    }
    let y = a.matvec(&alpha.to_dense()).unwrap();
    let (support, coef) = exhaustive_sparsest(a, &y, k).ok_or(format!("{tag}: oracle found no representation"))?;
    let sol = omp(a, &y, k, 1e-12).map_err(|e| format!("{tag}: {e}"))?;
    if sol.estimate.support() != support.as_slice() {
        return Err(format!("{tag}: omp support {:?}, oracle {:?}", sol.estimate.support(), support));
    }
    for (p, q) in sol.estimate.values().iter().zip(&coef) {
        if (p - q).abs() > 1e-8 * (1.0 + q.abs()) {
            return Err(format!("{tag}: omp value {p}, oracle {q}"));
        }
    }
    Ok(())
}

/// OMP against the exhaustive-support least-squares oracle on instances
/// inside the coherence guarantee `k < (1 + 1/μ)/2`, M ≤ 10, L ≤ 20, k ≤ 2.
pub fn omp_oracle_suite() -> Check {
    let mut rng = SeededRng::new(RngSeed(0x6f6d70));
    let mut count = 0;
    // 1-sparse on Gaussian matrices: always inside the guarantee.
    for t in 0..70u64 {
        let m = 2 + rng.below(9);
        let l = m + rng.below(21 - m);
        let a = gaussian_matrix(m, l, RngSeed(1000 + t)).unwrap();
        let alpha = random_sparse(&mut rng, l, 1);
        compare_omp(&a, &alpha, 1, &format!("k=1 instance {t} ({m}x{l})"))?;
        count += 1;
    }
    // 2-sparse on near-orthogonal matrices with μ < 1/3.
    let mut t = 0u64;
    while count < 140 {
        t += 1;
        let m = 3 + rng.below(8);
        let l = 2 + rng.below(m - 1);
        let a = near_orthogonal(m, l, 0.08, RngSeed(5000 + t));
        if brute_mutual(&a) >= 1.0 / 3.0 {
            continue;
        }
        let alpha = random_sparse(&mut rng, l, 2);
        compare_omp(&a, &alpha, 2, &format!("k=2 instance {t} ({m}x{l})"))?;
        count += 1;
    }
    Ok(count)
}

/// Minimum ℓ1 norm over `{x : Ax = y}` by enumerating every basic solution
/// (square nonsingular column subsets). Valid for full-row-rank `A`.
pub fn vertex_enumeration_l1(a: &DenseMatrix, y: &[f64]) -> Option<f64> {
    let m = a.rows();
    let mut best: Option<f64> = None;
    for s in combinations(a.cols(), m) {
        let sub: Vec<Vec<f64>> = (0..m).map(|i| s.iter().map(|&j| a[(i, j)]).collect()).collect();
        if let Some(x) = solve_square(sub, y.to_vec()) {
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            best = Some(best.map_or(l1, |b: f64| b.min(l1)));
        }
    }
    best
}

/// Basis Pursuit ℓ1 objective against vertex enumeration, M ≤ 4, L ≤ 8.
pub fn bp_oracle_suite() -> Check {
    let mut rng = SeededRng::new(RngSeed(0x6270));
    let cfg = BpConfig::default();
    for t in 0..120u64 {
        let m = 2 + rng.below(3);
        let l = m + 1 + rng.below(8 - m);
        let a = DenseMatrix::gaussian_raw(m, l, RngSeed(2000 + t));
        let y = if t % 2 == 0 {
            let k = 1 + rng.below(m);
            a.matvec(&random_sparse(&mut rng, l, k).to_dense()).unwrap()
        } else {
            (0..m).map(|_| rng.standard_normal()).collect()
        };
        let oracle = vertex_enumeration_l1(&a, &y).ok_or(format!("instance {t}: no basic solution"))?;
        let sol = basis_pursuit(&a, &y, &cfg).map_err(|e| format!("instance {t}: {e}"))?;
        let l1 = sol.estimate.l1_norm();
        if (l1 - oracle).abs() > 1e-6 {
            return Err(format!("instance {t} ({m}x{l}): bp l1 {l1}, oracle {oracle}"));
        }
    }
    Ok(120)
}

/// Library coherence equals a naive index loop bit for bit.
pub fn coherence_brute_force_suite() -> Check {
    let mut rng = SeededRng::new(RngSeed(0x636f68));
    for t in 0..150u64 {
        let rows = 1 + rng.below(10);
        let cols = 2 + rng.below(19);
        let a = DenseMatrix::gaussian_raw(rows, cols, RngSeed(3000 + t));
        let got = mutual_coherence(&a).map_err(|e| e.to_string())?;
        if got != brute_mutual(&a) {
            return Err(format!("mutual coherence differs on instance {t}: {got} vs {}", brute_mutual(&a)));
        }
        let psi = DenseMatrix::gaussian_raw(cols, 1 + rng.below(20), RngSeed(4000 + t));
        let phi = DenseMatrix::gaussian_raw(rows, cols, RngSeed(4500 + t));
        let got = cross_coherence(&phi, &psi).map_err(|e| e.to_string())?;
        if got != brute_cross(&phi, &psi) {
            return Err(format!("cross coherence differs on instance {t}"));
        }
    }
    Ok(150)
}

/// Column and row rescaling leave both coherences unchanged.
pub fn scale_invariance_suite() -> Check {
    let mut rng = SeededRng::new(RngSeed(0x7363));
    for t in 0..100u64 {
        let rows = 2 + rng.below(8);
        let cols = 2 + rng.below(15);
        let a = DenseMatrix::gaussian_raw(rows, cols, RngSeed(6000 + t));
        let scales: Vec<f64> = (0..cols).map(|_| 0.01 + 100.0 * rng.uniform()).collect();
        let mut scaled = a.clone();
        for i in 0..rows {
            for (j, s) in scales.iter().enumerate() {
                scaled.row_mut(i)[j] *= s;
            }
        }
        let (m0, m1) = (mutual_coherence(&a).unwrap(), mutual_coherence(&scaled).unwrap());
        if (m0 - m1).abs() > 1e-12 {
            return Err(format!("instance {t}: mutual coherence {m0} vs scaled {m1}"));
        }
        let psi = DenseMatrix::gaussian_raw(rows + 1, rows + 4, RngSeed(6500 + t));
        let phi = DenseMatrix::gaussian_raw(cols, rows + 1, RngSeed(6600 + t));
        let mut phi_scaled = phi.clone();
        for i in 0..phi.rows() {
            let s = if i % 2 == 0 { -1.0 } else { 1.0 } * (0.01 + 100.0 * rng.uniform());
            phi_scaled.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        let c0 = cross_coherence(&phi, &psi).unwrap();
        let c1 = cross_coherence(&phi_scaled, &psi.scale(0.3)).unwrap();
        if (c0 - c1).abs() > 1e-12 {
            return Err(format!("instance {t}: cross coherence {c0} vs scaled {c1}"));
        }
    }
    Ok(100)
}

/// `μ ≥ Welch bound` for random unit-norm frames with `L > M`.
pub fn welch_floor_suite() -> Check {
    let mut rng = SeededRng::new(RngSeed(0x77656c));
    for t in 0..100u64 {
        let m = 1 + rng.below(10);
        let l = m + 1 + rng.below(30);
        let a = gaussian_matrix(m, l, RngSeed(7000 + t)).unwrap();
        let mu = mutual_coherence(&a).unwrap();
        let w = welch_bound(m, l).unwrap();
        if mu < w - 1e-12 {
            return Err(format!("instance {t} ({m}x{l}): mu {mu} below Welch bound {w}"));
        }
    }
    Ok(100)
}

/// OMP residual norms never increase.
pub fn omp_monotonicity_suite() -> Check {
    let mut rng = SeededRng::new(RngSeed(0x6d6f6e));
    for t in 0..100u64 {
        let m = 5 + rng.below(26);
        let l = m + rng.below(60);
        let a = gaussian_matrix(m, l, RngSeed(8000 + t)).unwrap();
        let y: Vec<f64> = (0..m).map(|_| rng.standard_normal()).collect();
        let sol = omp(&a, &y, m, 0.0).map_err(|e| e.to_string())?;
        for w in sol.residual_norms.windows(2) {
            if w[1] > w[0] * (1.0 + 1e-12) + 1e-14 {
                return Err(format!("instance {t}: residual rose from {} to {}", w[0], w[1]));
            }
        }
    }
    Ok(100)
}

/// `‖Aα̂ − y‖ / ‖y‖ < 1e-5` for Basis Pursuit at experiment scale.
pub fn bp_feasibility_suite() -> Check {
    let mut rng = SeededRng::new(RngSeed(0x666561));
    let psi = cs_adapt::dictionary::build_dictionary(
        &cs_adapt::dictionary::DictionaryKind::IdentityDct,
        200,
        400,
        RngSeed(0),
    )
    .unwrap();
    let a = gaussian_matrix(30, 200, RngSeed(9000)).unwrap().matmul(&psi).unwrap();
    let bp = cs_adapt::recovery::BasisPursuit::new(&a, BpConfig::default()).unwrap();
    for t in 0..60 {
        let y: Vec<f64> = if t % 2 == 0 {
            let k = 1 + rng.below(15);
            a.matvec(&random_sparse(&mut rng, 400, k).to_dense()).unwrap()
        } else {
            (0..30).map(|_| rng.standard_normal()).collect()
        };
        let sol = bp.solve(&y).map_err(|e| e.to_string())?;
        let fit = a.matvec(&sol.estimate.to_dense()).unwrap();
        let r: f64 = fit.iter().zip(&y).map(|(f, v)| (f - v) * (f - v)).sum::<f64>().sqrt();
        let yn: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r / yn >= 1e-5 {
            return Err(format!("instance {t}: relative residual {}", r / yn));
        }
    }
    Ok(60)
}

fn small_experiment() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        m: 10,
        n: 24,
        l: 48,
        sparsity_levels: vec![0, 2, 5],
        trials_per_level: 60,
        master_seed: RngSeed(21),
        ..ExperimentConfig::default()
    };
    cfg.gram_shrink.iterations = 30;
    cfg.cross_coherence.iterations = 200;
    cfg
}

/// Every variant and algorithm recovers the zero signal in every trial.
pub fn zero_sparsity_suite() -> Check {
    let r = run_experiment(&small_experiment()).map_err(|e| e.to_string())?;
    let mut n = 0;
    for p in r.points.iter().filter(|p| p.sparsity == 0) {
        if p.frequency != 1.0 {
            return Err(format!("{} {} at k=0: frequency {}", p.variant, p.algorithm, p.frequency));
        }
        n += 1;
    }
    if n != MatrixVariant::ALL.len() * 2 {
        return Err(format!("expected 6 k=0 points, found {n}"));
    }
    Ok(n)
}

/// Identical results on 1, 2 and 5 worker threads.
pub fn thread_determinism_suite() -> Check {
    let cfg = small_experiment();
    let mut reference: Option<Vec<(MatrixVariant, Algorithm, usize, usize)>> = None;
    for threads in [1, 2, 5] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let r = pool.install(|| run_experiment(&cfg)).map_err(|e| e.to_string())?;
        let key: Vec<_> = r.points.iter().map(|p| (p.variant, p.algorithm, p.sparsity, p.successes)).collect();
        match &reference {
            None => reference = Some(key),
            Some(k) if *k != key => return Err(format!("results differ with {threads} threads")),
            Some(_) => {}
        }
    }
    Ok(3)
}

/// Exact two-sided Mann–Whitney U test p-value for samples without ties.
pub fn mann_whitney_p(x: &[f64], y: &[f64]) -> f64 {
    let (n1, n2) = (x.len(), y.len());
    let u: usize = x.iter().map(|a| y.iter().filter(|b| a > *b).count()).sum();
    // counts[i][j][u]: arrangements of i x's and j y's with statistic u.
    let max_u = n1 * n2;
    let mut prev: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; n2 + 1];
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for i in 1..=n1 {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; n2 + 1];
        cur[0][0] = 1.0;
        for j in 1..=n2 {
            for s in 0..=i * j {
                // Largest element is an x (beats all j y's) or a y (adds nothing).
                let from_x = if s >= j { prev[j][s - j] } else { 0.0 };
                cur[j][s] = from_x + cur[j - 1][s];
            }
        }
        prev = cur;
    }
    let dist = &prev[n2];
    let total: f64 = dist.iter().sum();
    let lower: f64 = dist[..=u].iter().sum::<f64>() / total;
    let upper: f64 = dist[u..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}
