//! Gauss rules on `[0, 1]` by Golub-Welsch.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::special::ln_gamma;

/// Nodes and weights on `[0, 1]` for `∫₀¹ u^p f(u) du`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Jacobi rule for the weight `u^p` on `[0, 1]`, `p > -1`.
/// `p = 0` is Gauss-Legendre.
pub fn gauss_jacobi_unit(n: usize, p: f64) -> GaussRule {
    assert!(n >= 1, "rule needs at least one node");
    assert!(p > -1.0, "weight exponent must exceed -1");
    // Jacobi polynomials on [-1,1] with weight (1-x)^a (1+x)^b, a = 0, b = p.
    let (a, b) = (0.0f64, p);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            let s = 2.0 * kf + a + b;
            (b * b - a * a) / (s * (s + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + a + b;
            let beta = 4.0 * m * (m + a) * (m + b) * (m + a + b) / (s * s * (s + 1.0) * (s - 1.0));
            let off = beta.sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let ln_mu0 = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(a + b + 2.0);
    let mu0 = ln_mu0.exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            (x, mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|l, r| l.0.total_cmp(&r.0));
    // map x in [-1,1] to u in [0,1]: (1+x)^p dx = 2^{p+1} u^p du
    let scale = 0.5f64.powf(p + 1.0);
    GaussRule {
        nodes: pairs.iter().map(|&(x, _)| 0.5 * (x + 1.0)).collect(),
        weights: pairs.iter().map(|&(_, w)| w * scale).collect(),
    }
}

fn legendre_cache() -> &'static Mutex<HashMap<usize, &'static GaussRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussRule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> &'static GaussRule {
    let mut cache = legendre_cache().lock().expect("rule cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(gauss_jacobi_unit(n, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre_unit(16);
        for deg in 0..32 {
            let approx: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(&u, &w)| w * u.powi(deg))
                .sum();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((approx - exact).abs() < 2e-15, "deg={deg}");
        }
    }

    #[test]
    fn jacobi_moments() {
        for p in [-0.75, -0.5, -0.1, 0.3, 1.5] {
            let r = gauss_jacobi_unit(12, p);
            for deg in 0..24 {
                let approx: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(&u, &w)| w * u.powi(deg))
                    .sum();
                let exact = 1.0 / (deg as f64 + p + 1.0);
                assert!(
                    (approx - exact).abs() < 1e-14 * exact.max(1.0),
                    "p={p}, deg={deg}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn nodes_sorted_and_interior() {
        let r = gauss_jacobi_unit(32, -0.5);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes[0] > 0.0 && *r.nodes.last().unwrap() < 1.0);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }
}
