//! Gauss-Hermite rules and an adaptive Gauss-Kronrod integrator for complex integrands.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

type Rule = (Vec<f64>, Vec<f64>);

/// Nodes and weights of the `n`-point Gauss-Hermite rule for the weight `exp(-x^2)`.
///
/// Nodes are seeded from the eigenvalues of the Jacobi matrix and polished by Newton
/// iteration on the orthonormal Hermite recurrence, which also yields the weights.
/// Rules are cached per order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Hermite order must be positive");
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = compute_gauss_hermite(n);
    cache.lock().expect("quadrature cache poisoned").insert(n, rule.clone());
    rule
}

/// Orthonormal Hermite value p_n(z) and derivative p_n'(z).
fn hermite_orthonormal(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

fn compute_gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut seeds: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    seeds.sort_by(|a, b| b.total_cmp(a));

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = seeds[i];
        let mut pp = hermite_orthonormal(n, z).1;
        for _ in 0..50 {
            let (p, dp) = hermite_orthonormal(n, z);
            pp = dp;
            let step = p / dp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                pp = hermite_orthonormal(n, z).1;
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
            pp = hermite_orthonormal(n, z).1;
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for (j, (&x, &wk)) in KRONROD_NODES.iter().zip(KRONROD_WEIGHTS.iter()).take(7).enumerate() {
        let pair = f(c - h * x) + f(c + h * x);
        kronrod += pair * wk;
        if j % 2 == 1 {
            gauss += pair * GAUSS_WEIGHTS[j / 2];
        }
    }
    let k = kronrod * h;
    let g = gauss * h;
    (k, (k - g).norm())
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of a complex function over `[a, b]`.
///
/// Returns the estimate and the summed error estimate; `None` if the error does not fall
/// below `tol` within `max_intervals` subdivisions.
pub fn adaptive_gk<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Option<(Complex64, f64)> {
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= tol.max(1e-15 * total.norm()) {
            return Some((total, err));
        }
        if intervals.len() >= max_intervals {
            return None;
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_rule_integrates_moments() {
        for n in [1, 2, 5, 16, 64, 256] {
            let (x, w) = gauss_hermite(n);
            let m0: f64 = w.iter().sum();
            assert!((m0 - PI.sqrt()).abs() < 1e-12, "n={n} m0={m0}");
            if n >= 2 {
                let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
                assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12, "n={n} m2={m2}");
            }
        }
    }

    #[test]
    fn hermite_nodes_are_roots_for_small_order() {
        let (x, w) = gauss_hermite(2);
        assert!((x[0] - 0.5_f64.sqrt()).abs() < 1e-14);
        assert!((w[0] - PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_handles_sharp_lorentzian() {
        let width = 1e-3;
        let f = |x: f64| Complex64::new(width / (x * x + width * width), 0.0);
        let (v, _) = adaptive_gk(f, -1.0, 1.0, 1e-12, 2000).unwrap();
        let exact = 2.0 * (1.0 / width).atan();
        assert!((v.re - exact).abs() < 1e-10);
    }
}
