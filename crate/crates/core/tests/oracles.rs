mod common;

use common::*;

fn run(check: Check) {
    match check {
        Ok(n) => assert!(n >= 100, "only {n} instances checked"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn omp_matches_exhaustive_support_search() {
    run(omp_oracle_suite());
}

#[test]
fn bp_matches_vertex_enumeration() {
    run(bp_oracle_suite());
}

#[test]
fn coherence_matches_brute_force() {
    run(coherence_brute_force_suite());
}

#[test]
fn coherence_is_scale_invariant() {
    run(scale_invariance_suite());
}

#[test]
fn coherence_respects_welch_bound() {
    run(welch_floor_suite());
}

#[test]
fn omp_residual_is_monotone() {
    run(omp_monotonicity_suite());
}

#[test]
fn bp_output_is_feasible() {
    assert!(bp_feasibility_suite().unwrap() > 0);
}

#[test]
fn zero_sparsity_always_recovered() {
    zero_sparsity_suite().unwrap();
}

#[test]
fn experiment_independent_of_thread_count() {
    thread_determinism_suite().unwrap();
}

#[test]
fn vertex_oracle_on_known_instance() {
    // x1 + x2 = 1, x2 + x3 = 1: the ℓ1 minimum is x2 = 1.
    let a = cs_adapt::DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
    assert_eq!(vertex_enumeration_l1(&a, &[1.0, 1.0]), Some(1.0));
}

#[test]
fn exhaustive_oracle_on_known_instance() {
    let a = cs_adapt::DenseMatrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]).unwrap();
    let (s, c) = exhaustive_sparsest(&a, &[2.0, 2.0], 2).unwrap();
    assert_eq!(s, vec![2]);
    assert!((c[0] - 2.0).abs() < 1e-12);
}

fn permutation_p(x: &[f64], y: &[f64]) -> f64 {
    // Enumerate every split of the pooled sample into groups of the original sizes.
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = pooled.len();
    let u_of = |mask: u32| -> usize {
        let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask & (1 << i) != 0);
        a.iter().map(|&i| b.iter().filter(|&&j| pooled[i] > pooled[j]).count()).sum()
    };
    let u_obs = u_of((1u32 << x.len()) - 1);
    let us: Vec<usize> = (0u32..1 << n).filter(|m| m.count_ones() as usize == x.len()).map(u_of).collect();
    let total = us.len() as f64;
    let lower = us.iter().filter(|&&u| u <= u_obs).count() as f64 / total;
    let upper = us.iter().filter(|&&u| u >= u_obs).count() as f64 / total;
    (2.0 * lower.min(upper)).min(1.0)
}

#[test]
fn mann_whitney_matches_full_enumeration() {
    let x = [0.3, 1.7, 2.2, 0.9, 4.1];
    let y = [1.1, 0.2, 3.3, 5.0, 2.8, 0.05];
    assert!((mann_whitney_p(&x, &y) - permutation_p(&x, &y)).abs() < 1e-12);
    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [5.0, 6.0, 7.0, 8.0, 9.0];
    // Complete separation: 2 / C(9, 4).
    assert!((mann_whitney_p(&x, &y) - 2.0 / 126.0).abs() < 1e-12);
    // Reference value from an exact two-sided implementation elsewhere.
    let x = [0.3, 1.7, 2.2, 0.9, 4.1, 7.7, 0.11, 2.5, 3.3];
    let y = [1.1, 0.2, 3.35, 5.0, 2.8, 0.05, 9.1, 6.2, 4.4, 8.8];
    assert!((mann_whitney_p(&x, &y) - 0.2775119617224881).abs() < 1e-12);
}
