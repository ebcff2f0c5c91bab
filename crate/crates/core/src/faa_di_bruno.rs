//! Higher-order chain rule.
//!
//! `(f∘g)^(j) = Σ_{i=1}^{j} f^(i)(g) Σ_{γ∈Γ(i,j)} c_γ Π_k g^(γ_k)` where
//! `Γ(i,j)` holds the ordered `i`-tuples of positive integers summing to `j`
//! and `c_γ = j! / (i! γ_1! ⋯ γ_i!)`.

use crate::scalar::factorial;

/// Ordered `i`-tuples of positive integers with sum `j`.
pub fn compositions(i: usize, j: usize) -> Vec<Vec<usize>> {
    if i == 0 {
        return if j == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if j < i {
        return Vec::new();
    }
    let mut out = Vec::new();
    for first in 1..=j - (i - 1) {
        for mut rest in compositions(i - 1, j - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `c_γ = j! / (i! γ!)` with `j = |γ|`, `i = len(γ)`.
pub fn coefficient(gamma: &[usize]) -> f64 {
    let j: usize = gamma.iter().sum();
    let denom: f64 = gamma.iter().map(|&g| factorial(g)).product::<f64>() * factorial(gamma.len());
    factorial(j) / denom
}

/// `(f∘g)^(j)(x)` from `outer[i] = f^(i)(g(x))` and `inner[k] = g^(k)(x)`.
pub fn compose_derivative(outer: &[f64], inner: &[f64], j: usize) -> f64 {
    assert!(outer.len() > j && inner.len() > j, "derivatives up to order {j} required");
    if j == 0 {
        return outer[0];
    }
    (1..=j)
        .map(|i| {
            let s: f64 = compositions(i, j)
                .iter()
                .map(|gamma| coefficient(gamma) * gamma.iter().map(|&g| inner[g]).product::<f64>())
                .sum();
            outer[i] * s
        })
        .sum()
}

/// All derivatives `(f∘g)^(0..=order)`.
pub fn compose_all(outer: &[f64], inner: &[f64], order: usize) -> Vec<f64> {
    (0..=order).map(|j| compose_derivative(outer, inner, j)).collect()
}
