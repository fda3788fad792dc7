//! Fixed problem sets shared by the criterion benchmarks.

use qve_core::{generate_random_mbt, random_mbt_critical_lambda, QveProblem};

/// Random instance at `frac · λ_crit` for the given size and seed.
pub fn random_at_fraction(n: usize, frac: f64, seed: u64) -> QveProblem {
    let crit = random_mbt_critical_lambda(n, seed).expect("critical lambda");
    generate_random_mbt(n, frac * crit, seed).expect("random instance")
}

/// The `(label, problem)` pairs benchmarked for every solver.
pub fn standard_cases(n: usize) -> Vec<(String, QveProblem)> {
    [0.5, 0.9, 0.99]
        .into_iter()
        .map(|f| (format!("n{n}_frac{f}"), random_at_fraction(n, f, 0)))
        .collect()
}
