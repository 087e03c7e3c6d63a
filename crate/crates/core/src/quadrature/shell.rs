//! Truncated Dirichlet energies over hyperbolic balls `B_R` of growing radius.
//!
//! `E(R) = ∫_{B_R} λ^{n-2} |dΦ|²_e dx`, the hyperbolic `L²` norm of `dΦ` over
//! the geodesic ball of radius `R`. With the Euclidean radius `ρ = tanh(R/2)`
//! one has `dρ = dR/λ`, so
//!
//! ```text
//! E(R) = ∫₀^R λ^{n-3} ρ^{n-1} ∫_{S^{n-1}} |dΦ|²_e(ρω) dω dR'
//! ```
//!
//! The integrand in `R'` is bounded for bounded `|dΦ|_e`, which makes linear
//! growth (`n = 3`) and saturation (`n = 2`) easy to tell apart.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::gauss::{gauss_legendre, GaussRule};
use super::CompensatedSum;
use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::harmonic::{BallPotential3D, HarmonicPotential, SphereFunction};

/// `|dΦ|²_e` at interior points.
pub trait GradientDensity<const N: usize> {
    fn grad_norm_sq(&self, p: &DiskPoint<N>) -> f64;
}

impl GradientDensity<2> for HarmonicPotential {
    fn grad_norm_sq(&self, p: &DiskPoint<2>) -> f64 {
        let [gx, gy] = self.gradient(p);
        gx * gx + gy * gy
    }
}

impl<F: SphereFunction> GradientDensity<3> for BallPotential3D<F> {
    fn grad_norm_sq(&self, p: &DiskPoint<3>) -> f64 {
        let g = self.gradient(p);
        g.iter().map(|c| c * c).sum()
    }
}

/// Largest supported hyperbolic radius; `tanh(R/2)` rounds to one soon after.
pub const MAX_RADIUS: f64 = 30.0;

/// Radial panels in hyperbolic radius plus a rule on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellRule<const N: usize> {
    edges: Vec<f64>,
    radial: GaussRule,
    angular_order: usize,
    directions: Vec<([f64; N], f64)>,
}

fn sphere_rule<const N: usize>(order: usize) -> Result<Vec<([f64; N], f64)>> {
    let mut out = Vec::new();
    match N {
        2 => {
            let m = 2 * order;
            for j in 0..m {
                let t = 2.0 * PI * j as f64 / m as f64;
                let mut d = [0.0; N];
                d[0] = libm::cos(t);
                d[1] = libm::sin(t);
                out.push((d, 2.0 * PI / m as f64));
            }
        }
        3 => {
            // Gauss-Legendre in cos(polar angle), uniform in azimuth.
            let gl = gauss_legendre(order);
            let m = 2 * order;
            for (z, w) in gl.nodes.iter().zip(&gl.weights) {
                let s = libm::sqrt(1.0 - z * z);
                for j in 0..m {
                    let t = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                    let mut d = [0.0; N];
                    d[0] = s * libm::cos(t);
                    d[1] = s * libm::sin(t);
                    d[2] = *z;
                    out.push((d, w * 2.0 * PI / m as f64));
                }
            }
        }
        n => return Err(Error::UnsupportedDimension(n)),
    }
    Ok(out)
}

impl<const N: usize> ShellRule<N> {
    /// `shells` equal panels on `[0, r_max]`, `radial_order` Gauss nodes per
    /// panel, and an angular rule of order `angular_order` (`2m` equispaced
    /// angles on the circle; `m` polar × `2m` azimuthal nodes on `S²`).
    pub fn new(r_max: f64, shells: usize, radial_order: usize, angular_order: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max <= MAX_RADIUS) {
            return Err(Error::InvalidInput("hyperbolic radius must lie in (0, 30]"));
        }
        if shells == 0 || radial_order == 0 || angular_order == 0 {
            return Err(Error::InvalidInput("shell rule sizes must be positive"));
        }
        let edges = (0..=shells).map(|j| r_max * j as f64 / shells as f64).collect();
        Ok(ShellRule {
            edges,
            radial: gauss_legendre(radial_order),
            angular_order,
            directions: sphere_rule::<N>(angular_order)?,
        })
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().expect("at least one shell")
    }

    pub fn shells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn radial_order(&self) -> usize {
        self.radial.len()
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    /// Same shells with twice the angular order.
    pub fn with_doubled_angular(&self) -> Result<Self> {
        ShellRule::new(self.r_max(), self.shells(), self.radial_order(), 2 * self.angular_order)
    }

    /// Twice as many shells of half the width.
    pub fn with_halved_shells(&self) -> Result<Self> {
        ShellRule::new(self.r_max(), 2 * self.shells(), self.radial_order(), self.angular_order)
    }
}

/// Truncated energies `E(R_j)` at the shell edges.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCurve {
    pub dimension: usize,
    /// Outer radii `R_1 < … < R_m`.
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    /// `E(R_j) - E(R_{j-1})`, with `E(R_0) = 0`.
    pub increments: Vec<f64>,
}

/// Least-squares line `E ≈ slope·R + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation from the line.
    pub residual: f64,
    pub points: usize,
}

impl GrowthCurve {
    pub fn last_energy(&self) -> f64 {
        self.energies.last().copied().unwrap_or(0.0)
    }

    /// Energy at the shell edge closest to `r`.
    pub fn energy_at(&self, r: f64) -> Option<f64> {
        self.radii
            .iter()
            .zip(&self.energies)
            .min_by(|a, b| (a.0 - r).abs().total_cmp(&(b.0 - r).abs()))
            .map(|(_, e)| *e)
    }

    /// Indices of shell edges with `lo ≤ R ≤ hi` (small slack for rounding).
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        let slack = 1e-9 * hi.abs().max(1.0);
        (0..self.radii.len()).filter(move |&j| self.radii[j] >= lo - slack && self.radii[j] <= hi + slack)
    }

    pub fn fit(&self, lo: f64, hi: f64) -> Option<LinearFit> {
        let idx: Vec<usize> = self.window(lo, hi).collect();
        let n = idx.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mx = idx.iter().map(|&j| self.radii[j]).sum::<f64>() / nf;
        let my = idx.iter().map(|&j| self.energies[j]).sum::<f64>() / nf;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for &j in &idx {
            let dx = self.radii[j] - mx;
            sxx += dx * dx;
            sxy += dx * (self.energies[j] - my);
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss: f64 = idx
            .iter()
            .map(|&j| {
                let r = self.energies[j] - (slope * self.radii[j] + intercept);
                r * r
            })
            .sum();
        Some(LinearFit { slope, intercept, residual: libm::sqrt(ss / nf), points: n })
    }
}

/// Accumulates `E(R)` shell by shell.
pub fn truncated_energy_growth<const N: usize, D: GradientDensity<N>>(
    density: &D,
    rule: &ShellRule<N>,
) -> Result<GrowthCurve> {
    let mut total = CompensatedSum::default();
    let mut radii = Vec::with_capacity(rule.shells());
    let mut energies = Vec::with_capacity(rule.shells());
    let mut increments = Vec::with_capacity(rule.shells());
    for w in rule.edges.windows(2) {
        let panel = rule.radial.on_interval(w[0], w[1]);
        let mut shell = CompensatedSum::default();
        for (big_r, wr) in panel.nodes.iter().zip(&panel.weights) {
            let half = 0.5 * big_r;
            let rho = libm::tanh(half);
            let cosh = libm::cosh(half);
            let lambda = 2.0 * cosh * cosh;
            let radial = libm::pow(lambda, N as f64 - 3.0) * libm::pow(rho, N as f64 - 1.0);
            let mut ang = CompensatedSum::default();
            for (dir, wd) in &rule.directions {
                let p = DiskPoint::new(dir.map(|c| rho * c))?;
                ang.add(wd * density.grad_norm_sq(&p));
            }
            let v = wr * radial * ang.value();
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "shell contribution" });
            }
            shell.add(v);
        }
        let inc = shell.value();
        total.add(inc);
        radii.push(w[1]);
        energies.push(total.value());
        increments.push(inc);
    }
    Ok(GrowthCurve { dimension: N, radii, energies, increments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{harmonic_extend, BoundaryData, KernelRule};
    use approx::assert_relative_eq;

    #[test]
    fn two_dimensional_energy_matches_closed_form() {
        // Φ = x: E(R) = π tanh²(R/2); cos 2θ: E(R) = 2π tanh⁴(R/2).
        let rule = ShellRule::<2>::new(10.0, 20, 8, 4).unwrap();
        let x = harmonic_extend(&BoundaryData::mode(1, 1.0, 0.0));
        let c = truncated_energy_growth(&x, &rule).unwrap();
        for (r, e) in c.radii.iter().zip(&c.energies) {
            assert_relative_eq!(*e, PI * libm::tanh(r / 2.0).powi(2), max_relative = 1e-12);
        }
        let s = harmonic_extend(&BoundaryData::mode(2, 1.0, 0.0));
        let c = truncated_energy_growth(&s, &rule).unwrap();
        for (r, e) in c.radii.iter().zip(&c.energies) {
            assert_relative_eq!(*e, 2.0 * PI * libm::tanh(r / 2.0).powi(4), max_relative = 1e-12);
        }
        assert!(c.increments.iter().all(|d| *d >= 0.0));
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn three_dimensional_energy_matches_oracle() {
        // mpmath quadrature of the closed-form profile of the ξ₃ extension.
        let frozen = [
            (4.0, 25.037_005_763_574_715),
            (6.0, 41.882_857_479_383_707),
            (8.0, 58.642_879_969_054_028),
            (10.0, 75.398_218_126_026_359),
        ];
        let pot = BallPotential3D::new(|xi: &[f64; 3]| xi[2], KernelRule::default()).unwrap();
        let rule = ShellRule::<3>::new(10.0, 20, 8, 3).unwrap();
        let c = truncated_energy_growth(&pot, &rule).unwrap();
        for (r, want) in frozen {
            assert_relative_eq!(c.energy_at(r).unwrap(), want, max_relative = 1e-9);
        }
        let fit = c.fit(4.0, 10.0).unwrap();
        // least-squares slope of the mpmath curve at the shell edges in [4, 10]
        assert_relative_eq!(fit.slope, 8.388_087_363_294_554, max_relative = 1e-9);
        // approaches 8π/3 from above
        assert!(fit.slope > 8.0 * PI / 3.0 && fit.slope < 1.01 * 8.0 * PI / 3.0);
    }

    #[test]
    fn constant_data_has_zero_energy() {
        let rule = ShellRule::<2>::new(6.0, 12, 4, 4).unwrap();
        let c = truncated_energy_growth(&harmonic_extend(&BoundaryData::constant(3.0)), &rule).unwrap();
        assert!(c.energies.iter().all(|e| *e == 0.0));
        let pot = BallPotential3D::new(|_: &[f64; 3]| 2.0, KernelRule::default()).unwrap();
        let rule = ShellRule::<3>::new(6.0, 12, 4, 2).unwrap();
        let c = truncated_energy_growth(&pot, &rule).unwrap();
        assert!(c.energies.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(matches!(ShellRule::<4>::new(5.0, 10, 4, 4), Err(Error::UnsupportedDimension(4))));
        assert!(ShellRule::<2>::new(40.0, 10, 4, 4).is_err());
        assert!(ShellRule::<2>::new(5.0, 0, 4, 4).is_err());
    }

    #[test]
    fn linear_fit_of_exact_line() {
        let c = GrowthCurve {
            dimension: 3,
            radii: alloc::vec![1.0, 2.0, 3.0, 4.0],
            energies: alloc::vec![3.0, 5.0, 7.0, 9.0],
            increments: alloc::vec![3.0, 2.0, 2.0, 2.0],
        };
        let f = c.fit(2.0, 4.0).unwrap();
        assert_relative_eq!(f.slope, 2.0);
        assert_relative_eq!(f.intercept, 1.0, epsilon = 1e-14);
        assert!(f.residual < 1e-14);
        assert_eq!(f.points, 3);
        assert!(c.fit(10.0, 11.0).is_none());
    }
}
