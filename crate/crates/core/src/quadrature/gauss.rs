//! Gauss rules on `[-1, 1]` for the Jacobi weights `(1 + x)^β`, `β ∈ {0, 1}`.
//!
//! Nodes start from the Golub-Welsch eigenvalues of the Jacobi matrix and are
//! polished by Newton steps on the three-term recurrence; weights use the
//! closed form `2^{β+1} / ((1 - x²) P_n'(x)²)`.

use alloc::vec;
use alloc::vec::Vec;

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Clone, Debug, PartialEq)]
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

    /// Affine image on `[a, b]` (weights scaled by `(b - a)/2`).
    pub fn on_interval(&self, a: f64, b: f64) -> GaussRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GaussRule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`, exact through degree `2n - 1`.
///
/// # Panics
///
/// If `n == 0`.
pub fn gauss_legendre(n: usize) -> GaussRule {
    gauss_jacobi(n, 0)
}

/// `n`-point rule for `∫₀¹ f(r) r dr`, exact when `f` is a polynomial of
/// degree `≤ 2n - 1`.
pub fn gauss_radial(n: usize) -> GaussRule {
    let base = gauss_jacobi(n, 1);
    // r = (1 + x)/2, r dr = (1 + x) dx / 4
    GaussRule {
        nodes: base.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        weights: base.weights.iter().map(|w| 0.25 * w).collect(),
    }
}

/// Jacobi polynomial `P_n^{(0,β)}(x)` and `P_{n-1}^{(0,β)}(x)`.
fn jacobi_pair(n: usize, beta: f64, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    if n == 0 {
        return (prev, 0.0);
    }
    let mut cur = 0.5 * (-beta + (beta + 2.0) * x);
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + beta;
        let a1 = 2.0 * k * (k + beta) * (s - 2.0);
        let a2 = (s - 1.0) * (-beta * beta);
        let a3 = (s - 2.0) * (s - 1.0) * s;
        let a4 = 2.0 * (k - 1.0) * (k + beta - 1.0) * s;
        let next = ((a2 + a3 * x) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn jacobi_derivative(n: usize, beta: f64, x: f64, pn: f64, pn1: f64) -> f64 {
    let nf = n as f64;
    let s = 2.0 * nf + beta;
    (nf * (-beta - s * x) * pn + 2.0 * nf * (nf + beta) * pn1) / (s * (1.0 - x * x))
}

fn gauss_jacobi(n: usize, beta_int: u32) -> GaussRule {
    assert!(n > 0, "a Gauss rule needs at least one node");
    let beta = beta_int as f64;

    // Jacobi matrix of the monic recurrence for weight (1+x)^β.
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 { beta / (beta + 2.0) } else { beta * beta / ((2.0 * kf + beta) * (2.0 * kf + beta + 2.0)) };
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + beta;
        let num = 4.0 * kf * kf * (kf + beta) * (kf + beta);
        let den = s * s * (s + 1.0) * (s - 1.0);
        off[k - 1] = libm::sqrt(num / den);
    }
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first);

    let mut nodes = diag;
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let scale = libm::pow(2.0, beta + 1.0);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (pn, pn1) = jacobi_pair(n, beta, *x);
            let dp = jacobi_derivative(n, beta, *x, pn, pn1);
            let step = pn / dp;
            *x -= step;
            if step.abs() <= 1e-17 {
                break;
            }
        }
        let (pn, pn1) = jacobi_pair(n, beta, *x);
        let dp = jacobi_derivative(n, beta, *x, pn, pn1);
        weights.push(scale / ((1.0 - *x * *x) * dp * dp));
    }
    GaussRule { nodes, weights }
}

/// Implicit QL iteration for a symmetric tridiagonal matrix. On return `diag`
/// holds the eigenvalues; `first` (initially `e₀`) holds the first components
/// of the eigenvectors. `off[i]` couples rows `i` and `i + 1`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations < 100, "tridiagonal QL failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = libm::hypot(g, 1.0);
            g = diag[m] - diag[l] + off[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = libm::hypot(f, g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let t = first[i + 1];
                first[i + 1] = s * first[i] + c * t;
                first[i] = c * first[i] - s * t;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}
