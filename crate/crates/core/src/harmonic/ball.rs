//! Hyperbolic harmonic extension into the ball model of `H³`.
//!
//! `Φ(x) = ∫_{S²} P(x, ξ)² φ(ξ) dσ(ξ)` with `P = (1 - |x|²)/|x - ξ|²` and
//! `dσ` the normalized surface measure. The kernel concentrates in a cap of
//! angular radius `~ 1 - |x|` around `x/|x|`, so the sphere is parametrized
//! with its pole at `x/|x|`: Gauss-Legendre panels in the polar angle that
//! are geometrically refined towards the pole, times a uniform azimuthal rule.
//! Derivatives are taken under the integral. For the gradient and Hessian the
//! pole value `φ(x/|x|)` is subtracted first (the kernel derivatives integrate
//! to zero), which removes most of the cancellation near the rim.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{conformal_factor, log_gradient, DiskPoint};
use crate::quadrature::gauss::{gauss_legendre, GaussRule};

/// Boundary values on the unit sphere.
pub trait SphereFunction {
    fn eval(&self, xi: &[f64; 3]) -> f64;
}

impl<F: Fn(&[f64; 3]) -> f64> SphereFunction for F {
    fn eval(&self, xi: &[f64; 3]) -> f64 {
        self(xi)
    }
}

/// Orders of the kernel quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelRule {
    /// Gauss-Legendre nodes per polar panel.
    pub polar_order: usize,
    /// Uniform azimuthal nodes.
    pub azimuth: usize,
    /// Largest change of `Φ` at the probe points allowed under doubling.
    pub tolerance: f64,
}

impl Default for KernelRule {
    fn default() -> Self {
        KernelRule { polar_order: 10, azimuth: 12, tolerance: 1e-10 }
    }
}

impl KernelRule {
    pub fn doubled(&self) -> KernelRule {
        KernelRule { polar_order: 2 * self.polar_order, azimuth: 2 * self.azimuth, tolerance: self.tolerance }
    }
}

const PROBES: [[f64; 3]; 4] = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.5], [0.3, -0.4, 0.6], [0.0, 0.95, 0.0]];

/// Bounded hyperbolic-harmonic function on the ball `B³`.
pub struct BallPotential3D<F> {
    boundary: F,
    rule: KernelRule,
    polar: GaussRule,
    azimuth: Vec<(f64, f64)>,
}

/// Extends `φ` into the ball and checks self-convergence of the kernel
/// quadrature at fixed probe points.
pub fn ball_extend_3d<F: SphereFunction>(boundary: F, rule: KernelRule) -> Result<BallPotential3D<F>> {
    let pot = BallPotential3D::new(boundary, rule)?;
    let fine = BallPotential3D::new(|xi: &[f64; 3]| pot.boundary.eval(xi), rule.doubled())?;
    for c in PROBES {
        let p = DiskPoint::new(c)?;
        let change = (pot.value(&p) - fine.value(&p)).abs();
        if !(change <= rule.tolerance) {
            return Err(Error::NotConverged { what: "ball kernel quadrature", change, tolerance: rule.tolerance });
        }
    }
    Ok(pot)
}

/// Orthonormal frame `(e1, e2, pole)`.
fn frame(pole: [f64; 3]) -> [[f64; 3]; 3] {
    let helper = if pole[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&helper, &pole);
    let mut e1 = [helper[0] - d * pole[0], helper[1] - d * pole[1], helper[2] - d * pole[2]];
    let n1 = libm::sqrt(dot(&e1, &e1));
    e1 = e1.map(|c| c / n1);
    let e2 = cross(&pole, &e1);
    [e1, e2, pole]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Kernel `K = P²` with its gradient and Hessian in `x`.
struct KernelDerivs {
    k: f64,
    grad: [f64; 3],
    hess: [[f64; 3]; 3],
}

/// `a = 1 - |x|²` and `d = x - ξ` are passed in precomputed, since both lose
/// all relative accuracy near the rim if formed naively.
fn kernel(x: &[f64; 3], a: f64, d: &[f64; 3], second: bool) -> KernelDerivs {
    let b = dot(d, d);
    let ib = 1.0 / b;
    let ib2 = ib * ib;
    let ib3 = ib2 * ib;
    let k = a * a * ib2;
    let mut grad = [0.0; 3];
    for i in 0..3 {
        grad[i] = -4.0 * a * x[i] * ib2 - 4.0 * a * a * d[i] * ib3;
    }
    let mut hess = [[0.0; 3]; 3];
    if second {
        let ib4 = ib3 * ib;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let t1 = -2.0 * x[j] * x[i] * ib2 + a * delta * ib2 - 4.0 * a * x[i] * d[j] * ib3;
                let t2 = -4.0 * a * x[j] * d[i] * ib3 + a * a * delta * ib3 - 6.0 * a * a * d[i] * d[j] * ib4;
                hess[i][j] = -4.0 * (t1 + t2);
            }
        }
    }
    KernelDerivs { k, grad, hess }
}

/// Value, gradient and (optionally) Hessian of `Φ` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallJet {
    pub value: f64,
    pub gradient: [f64; 3],
    pub hessian: [[f64; 3]; 3],
}

impl<F: SphereFunction> BallPotential3D<F> {
    pub fn new(boundary: F, rule: KernelRule) -> Result<Self> {
        if rule.polar_order == 0 || rule.azimuth == 0 {
            return Err(Error::InvalidInput("kernel quadrature orders must be positive"));
        }
        let azimuth = (0..rule.azimuth)
            .map(|j| {
                let t = 2.0 * PI * (j as f64 + 0.5) / rule.azimuth as f64;
                (libm::cos(t), libm::sin(t))
            })
            .collect();
        Ok(BallPotential3D { boundary, rule, polar: gauss_legendre(rule.polar_order), azimuth })
    }

    pub fn rule(&self) -> KernelRule {
        self.rule
    }

    pub fn boundary(&self) -> &F {
        &self.boundary
    }

    /// Polar panels `[0, e_L], [e_L, e_{L-1}], …, [e_1, π]` with `e_m = π 2^{-m}`
    /// and `e_L ≤ 1 - |x|`.
    fn panels(radius: f64) -> Vec<(f64, f64)> {
        let scale = (1.0 - radius).max(1e-14);
        let mut edges = alloc::vec![PI];
        let mut e = PI;
        while e > scale {
            e *= 0.5;
            edges.push(e);
        }
        edges.push(0.0);
        edges.windows(2).map(|w| (w[1], w[0])).collect()
    }

    fn jet(&self, p: &DiskPoint<3>, second: bool) -> BallJet {
        let x = *p.coords();
        let radius = p.norm();
        let pole = if radius > 0.0 { x.map(|c| c / radius) } else { [0.0, 0.0, 1.0] };
        let [e1, e2, e3] = frame(pole);
        let pole_value = self.boundary.eval(&pole);
        let az_weight = 1.0 / (2.0 * self.azimuth.len() as f64);
        let gap = 1.0 - radius;
        let a = gap * (1.0 + radius);

        let mut value = 0.0;
        let mut grad = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for (lo, hi) in Self::panels(radius) {
            let rule = self.polar.on_interval(lo, hi);
            for (psi, wp) in rule.nodes.iter().zip(&rule.weights) {
                let (s, c) = (libm::sin(*psi), libm::cos(*psi));
                let half = libm::sin(0.5 * psi);
                // r - cos ψ without cancellation
                let along = 2.0 * half * half - gap;
                // normalized measure: sin ψ dψ dβ / 4π
                let w = wp * s * az_weight;
                for (cb, sb) in &self.azimuth {
                    let xi = [
                        c * e3[0] + s * (cb * e1[0] + sb * e2[0]),
                        c * e3[1] + s * (cb * e1[1] + sb * e2[1]),
                        c * e3[2] + s * (cb * e1[2] + sb * e2[2]),
                    ];
                    let d: [f64; 3] = core::array::from_fn(|i| along * e3[i] - s * (cb * e1[i] + sb * e2[i]));
                    let phi = self.boundary.eval(&xi);
                    let kd = kernel(&x, a, &d, second);
                    value += w * kd.k * phi;
                    let shifted = w * (phi - pole_value);
                    for i in 0..3 {
                        grad[i] += shifted * kd.grad[i];
                        if second {
                            for j in 0..3 {
                                hess[i][j] += shifted * kd.hess[i][j];
                            }
                        }
                    }
                }
            }
        }
        BallJet { value, gradient: grad, hessian: hess }
    }

    pub fn value(&self, p: &DiskPoint<3>) -> f64 {
        self.jet(p, false).value
    }

    pub fn gradient(&self, p: &DiskPoint<3>) -> [f64; 3] {
        self.jet(p, false).gradient
    }

    pub fn jet_with_hessian(&self, p: &DiskPoint<3>) -> BallJet {
        self.jet(p, true)
    }

    /// Quadrature mass of the kernel, `∫ P² dσ`, which is one exactly.
    pub fn kernel_mass(&self, p: &DiskPoint<3>) -> f64 {
        let one = |_: &[f64; 3]| 1.0;
        BallPotential3D { boundary: one, rule: self.rule, polar: self.polar.clone(), azimuth: self.azimuth.clone() }
            .value(p)
    }

    /// `Δ_h Φ = λ⁻² (Δ_e Φ + u·∇Φ)`, the hyperbolic Laplacian on `B³`.
    pub fn hyperbolic_laplacian(&self, p: &DiskPoint<3>) -> f64 {
        let jet = self.jet(p, true);
        let u = log_gradient(p);
        let lap = jet.hessian[0][0] + jet.hessian[1][1] + jet.hessian[2][2];
        let drift: f64 = (0..3).map(|i| u[i] * jet.gradient[i]).sum();
        let l = conformal_factor(p);
        (lap + drift) / (l * l)
    }
}
