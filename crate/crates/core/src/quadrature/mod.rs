//! Integration over the disk and truncated hyperbolic balls.
//!
//! Disk rules are tensor products of a radial Gauss rule for `r dr` and the
//! trapezoid rule in `θ`. Integrands built from truncated Fourier potentials
//! are polynomials in `(x, y)`, so a rule of sufficient order integrates them
//! exactly. All sums are compensated and run in a fixed order, so results are
//! reproducible bit for bit.

pub mod gauss;
pub mod shell;

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{conformal_factor, deformation_tensor, pointwise_norms, DiskPoint};
use crate::harmonic::{harmonic_extend, spectral_dirichlet_energy, BoundaryData, HarmonicPotential};

pub use gauss::{gauss_legendre, gauss_radial, GaussRule};
pub use shell::{truncated_energy_growth, GradientDensity, GrowthCurve, LinearFit, ShellRule};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Tensor-product rule on the unit disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskRule {
    radii: Vec<f64>,
    /// Weights for `∫₀¹ f(r) r dr`.
    radial_weights: Vec<f64>,
    angular: usize,
}

impl DiskRule {
    /// `m_r` radial Gauss nodes for the weight `r dr` and `m_theta` equispaced
    /// angles. Exact for `r^a cos bθ` with `a ≤ 2 m_r - 1` and `b < m_theta`.
    pub fn gauss(m_r: usize, m_theta: usize) -> Self {
        assert!(m_r > 0 && m_theta > 0, "disk rule orders must be positive");
        let g = gauss_radial(m_r);
        DiskRule { radii: g.nodes, radial_weights: g.weights, angular: m_theta }
    }

    /// Smallest Gauss rule exact for polynomials in `(x, y)` of total degree `deg`.
    pub fn for_degree(deg: usize) -> Self {
        DiskRule::gauss(deg / 2 + 1, deg + 1)
    }

    /// Radial panels with edges `0, ½, ¾, …, 1 - 2^{-(panels-1)}, 1` and an
    /// `order`-point Gauss-Legendre rule on each panel.
    pub fn graded(panels: usize, order: usize, m_theta: usize) -> Result<Self> {
        if panels == 0 || order == 0 || m_theta == 0 {
            return Err(Error::InvalidInput("graded disk rule needs positive sizes"));
        }
        if panels > 48 {
            return Err(Error::InvalidInput("more than 48 rim panels exceeds f64 resolution near r = 1"));
        }
        let base = gauss_legendre(order);
        let mut radii = Vec::with_capacity(panels * order);
        let mut radial_weights = Vec::with_capacity(panels * order);
        let mut lo = 0.0;
        for k in 0..panels {
            let hi = if k + 1 == panels { 1.0 } else { 1.0 - libm::ldexp(1.0, -(k as i32 + 1)) };
            let g = base.on_interval(lo, hi);
            for (r, w) in g.nodes.iter().zip(&g.weights) {
                radii.push(*r);
                radial_weights.push(w * r);
            }
            lo = hi;
        }
        Ok(DiskRule { radii, radial_weights, angular: m_theta })
    }

    pub fn radial_len(&self) -> usize {
        self.radii.len()
    }

    pub fn angular_len(&self) -> usize {
        self.angular
    }

    /// `(point, weight)` pairs in a fixed order.
    pub fn nodes(&self) -> impl Iterator<Item = (DiskPoint<2>, f64)> + '_ {
        let dtheta = 2.0 * PI / self.angular as f64;
        self.radii.iter().zip(&self.radial_weights).flat_map(move |(r, wr)| {
            (0..self.angular).map(move |j| {
                let p = DiskPoint::polar(*r, dtheta * j as f64).expect("quadrature nodes lie inside the disk");
                (p, wr * dtheta)
            })
        })
    }

    pub fn total_weight(&self) -> f64 {
        let mut s = CompensatedSum::default();
        for (_, w) in self.nodes() {
            s.add(w);
        }
        s.value()
    }
}

/// `Σ w_i f(p_i)`; fails on the first non-finite integrand value.
pub fn integrate_disk(f: impl Fn(&DiskPoint<2>) -> f64, rule: &DiskRule) -> Result<f64> {
    let mut s = CompensatedSum::default();
    for (p, w) in rule.nodes() {
        let v = f(&p);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "disk integrand" });
        }
        s.add(w * v);
    }
    Ok(s.value())
}

/// `‖dΦ‖²` in the Euclidean and hyperbolic metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Norms {
    pub euclidean: f64,
    pub hyperbolic: f64,
}

/// Rule that integrates `|dΦ|⁴ (1 - r²)²` exactly for the given potential.
pub fn rule_for(pot: &HarmonicPotential) -> DiskRule {
    DiskRule::for_degree(4 * pot.order().max(1) + 4)
}

/// Euclidean `∫|dΦ|²_e dx` and hyperbolic `∫|dΦ|²_h dμ_h`, the latter formed
/// from the hyperbolic pointwise norm and volume density.
pub fn l2_norms(pot: &HarmonicPotential, rule: &DiskRule) -> Result<L2Norms> {
    let euclidean = integrate_disk(
        |p| {
            let [gx, gy] = pot.gradient(p);
            gx * gx + gy * gy
        },
        rule,
    )?;
    let hyperbolic = integrate_disk(
        |p| {
            let (_, h) = pointwise_norms(&pot.gradient(p), p);
            let l = conformal_factor(p);
            h * h * (l * l)
        },
        rule,
    )?;
    Ok(L2Norms { euclidean, hyperbolic })
}

/// `‖dΦ‖⁴_{L⁴(h)} = ∫ |dΦ|⁴_h dμ_h`.
pub fn l4_norm_hyperbolic(pot: &HarmonicPotential, rule: &DiskRule) -> Result<f64> {
    integrate_disk(
        |p| {
            let (_, h) = pointwise_norms(&pot.gradient(p), p);
            let l = conformal_factor(p);
            (h * h) * (h * h) * (l * l)
        },
        rule,
    )
}

/// `‖dΦ‖⁴_{L⁴(e)} = ∫ |dΦ|⁴_e dx`.
pub fn l4_norm_euclidean(pot: &HarmonicPotential, rule: &DiskRule) -> Result<f64> {
    integrate_disk(
        |p| {
            let [gx, gy] = pot.gradient(p);
            let s = gx * gx + gy * gy;
            s * s
        },
        rule,
    )
}

/// One line of a norm report; the relative error is against the oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NormRow {
    pub name: &'static str,
    pub euclidean: f64,
    pub hyperbolic: f64,
    pub spectral_oracle: Option<f64>,
    pub rel_err: Option<f64>,
}

/// Dirichlet energies against `π Σ k(a_k² + b_k²)` and the fourth powers of
/// the `L⁴` norms (no oracle).
pub fn norm_report(data: &BoundaryData) -> Result<Vec<NormRow>> {
    let pot = harmonic_extend(data);
    let rule = rule_for(&pot);
    let l2 = l2_norms(&pot, &rule)?;
    let oracle = spectral_dirichlet_energy(data);
    let rel = |v: f64| if oracle == 0.0 { v.abs() } else { (v - oracle).abs() / oracle };
    Ok(alloc::vec![
        NormRow {
            name: "dirichlet_l2",
            euclidean: l2.euclidean,
            hyperbolic: l2.hyperbolic,
            spectral_oracle: Some(oracle),
            rel_err: Some(rel(l2.euclidean).max(rel(l2.hyperbolic))),
        },
        NormRow {
            name: "l4_fourth_power",
            euclidean: l4_norm_euclidean(&pot, &rule)?,
            hyperbolic: l4_norm_hyperbolic(&pot, &rule)?,
            spectral_oracle: None,
            rel_err: None,
        },
    ])
}

/// Settings for the rim-graded deformation-energy integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationOptions {
    pub panels: usize,
    /// Gauss order per panel on the first level; doubled on every refinement.
    pub order: usize,
    /// Angular nodes on the first level; doubled on every refinement.
    pub angular: usize,
    /// Required relative agreement of two consecutive levels.
    pub tolerance: f64,
    pub max_levels: usize,
}

impl DeformationOptions {
    pub fn for_potential(pot: &HarmonicPotential) -> Self {
        DeformationOptions { panels: 40, order: 4, angular: 2 * pot.order() + 4, tolerance: 1e-7, max_levels: 5 }
    }
}

/// Converged deformation energy with its refinement history.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationEnergy {
    pub value: f64,
    /// Values of every level, coarsest first.
    pub levels: Vec<f64>,
    /// Relative change between the last two levels.
    pub relative_change: f64,
}

/// `∫ |Def v|²_h dμ_h` for `v = (dΦ)^♯`, refined until two consecutive levels
/// agree to `tolerance`.
pub fn deformation_energy(pot: &HarmonicPotential, opts: &DeformationOptions) -> Result<DeformationEnergy> {
    let form = pot.differential();
    let mut levels = Vec::new();
    let mut order = opts.order;
    let mut angular = opts.angular;
    let mut relative_change = f64::INFINITY;
    for _ in 0..opts.max_levels.max(2) {
        let rule = DiskRule::graded(opts.panels, order, angular)?;
        let mut s = CompensatedSum::default();
        for (p, w) in rule.nodes() {
            let d = deformation_tensor(&form, &p)?;
            let l = conformal_factor(&p);
            let v = d.norm_sq_h * (l * l);
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "deformation integrand" });
            }
            s.add(w * v);
        }
        let value = s.value();
        if let Some(prev) = levels.last().copied() {
            let prev: f64 = prev;
            relative_change = if value == 0.0 && prev == 0.0 { 0.0 } else { (value - prev).abs() / value.abs() };
            levels.push(value);
            if relative_change <= opts.tolerance {
                return Ok(DeformationEnergy { value, levels, relative_change });
            }
        } else {
            levels.push(value);
        }
        order *= 2;
        angular *= 2;
    }
    Err(Error::NotConverged { what: "deformation energy", change: relative_change, tolerance: opts.tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{harmonic_extend, spectral_dirichlet_energy, BoundaryData};
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(rng: &mut ChaCha8Rng, n: usize) -> BoundaryData {
        let a = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        BoundaryData::new(rng.gen_range(-1.0..1.0), a, b).unwrap()
    }

    #[test]
    fn area_and_weights() {
        for (mr, mt) in [(1, 1), (4, 9), (17, 40)] {
            let rule = DiskRule::gauss(mr, mt);
            assert!(rule.nodes().all(|(_, w)| w > 0.0));
            assert!((rule.total_weight() - PI).abs() <= 1e-13);
        }
        let graded = DiskRule::graded(40, 6, 8).unwrap();
        assert!((graded.total_weight() - PI).abs() <= 1e-13);
        assert!(DiskRule::graded(60, 6, 8).is_err());
    }

    #[test]
    fn monomial_exactness() {
        // ∫ r^a cos(bθ) r dr dθ = 2π/(a+2) for b = 0, else 0.
        let (mr, mt) = (6, 7);
        let rule = DiskRule::gauss(mr, mt);
        for a in 0..=(2 * mr - 1) {
            for b in 0..mt {
                let got = integrate_disk(
                    |p| {
                        let [x, y] = *p.coords();
                        let r = libm::sqrt(x * x + y * y);
                        libm::pow(r, a as f64) * libm::cos(b as f64 * libm::atan2(y, x))
                    },
                    &rule,
                )
                .unwrap();
                let exact = if b == 0 { 2.0 * PI / (a as f64 + 2.0) } else { 0.0 };
                assert!((got - exact).abs() <= 1e-13, "a={a} b={b}: {got}");
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let rule = DiskRule::gauss(8, 8);
        assert!((integrate_disk(|_| 1.0, &rule).unwrap() - PI).abs() <= 1e-13);
        let x = harmonic_extend(&BoundaryData::mode(1, 1.0, 0.0));
        let e = integrate_disk(
            |p| {
                let g = x.gradient(p);
                g[0] * g[0] + g[1] * g[1]
            },
            &rule,
        )
        .unwrap();
        assert_relative_eq!(e, spectral_dirichlet_energy(&BoundaryData::mode(1, 1.0, 0.0)), max_relative = 1e-14);
        let l4 = integrate_disk(|p| (1.0 - p.norm_sq()).powi(2) / 4.0, &rule).unwrap();
        assert_relative_eq!(l4, PI / 12.0, max_relative = 1e-14);
        assert!(matches!(integrate_disk(|_| f64::NAN, &rule), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn l2_examples() {
        let cases = [
            (BoundaryData::mode(1, 1.0, 0.0), PI),
            (BoundaryData::constant(2.0), 0.0),
            (BoundaryData::mode(2, 1.0, 0.0), 2.0 * PI),
        ];
        for (d, want) in cases {
            let pot = harmonic_extend(&d);
            let n = l2_norms(&pot, &rule_for(&pot)).unwrap();
            assert!((n.euclidean - want).abs() <= 1e-12 * want.max(1.0));
            assert!((n.hyperbolic - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn conformal_invariance_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let n = rng.gen_range(1..=16);
            let d = random_data(&mut rng, n);
            let pot = harmonic_extend(&d);
            let norms = l2_norms(&pot, &rule_for(&pot)).unwrap();
            let oracle = spectral_dirichlet_energy(&d);
            assert_relative_eq!(norms.euclidean, norms.hyperbolic, max_relative = 1e-12);
            assert_relative_eq!(norms.euclidean, oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn refinement_is_stable_past_exactness() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let d = random_data(&mut rng, 9);
        let pot = harmonic_extend(&d);
        let base = rule_for(&pot);
        let fine = DiskRule::gauss(2 * base.radial_len(), 2 * base.angular_len());
        let a = l4_norm_hyperbolic(&pot, &base).unwrap();
        let b = l4_norm_hyperbolic(&pot, &fine).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn l4_examples() {
        let x = harmonic_extend(&BoundaryData::mode(1, 1.0, 0.0));
        assert_relative_eq!(l4_norm_hyperbolic(&x, &rule_for(&x)).unwrap(), PI / 12.0, max_relative = 1e-13);
        let c = harmonic_extend(&BoundaryData::constant(-1.0));
        assert_eq!(l4_norm_hyperbolic(&c, &rule_for(&c)).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..10 {
            let n = rng.gen_range(1..=8);
            let d = random_data(&mut rng, n);
            let pot = harmonic_extend(&d);
            let rule = rule_for(&pot);
            let h = l4_norm_hyperbolic(&pot, &rule).unwrap();
            let e = l4_norm_euclidean(&pot, &rule).unwrap();
            assert!(h <= 0.25 * e);
        }
    }

    #[test]
    fn deformation_energy_examples() {
        for (d, want) in [(BoundaryData::mode(1, 1.0, 0.0), PI), (BoundaryData::mode(2, 1.0, 0.0), 2.0 * PI)] {
            let pot = harmonic_extend(&d);
            let e = deformation_energy(&pot, &DeformationOptions::for_potential(&pot)).unwrap();
            assert_relative_eq!(e.value, want, max_relative = 1e-6);
            assert!(e.relative_change <= 1e-7);
            assert!(e.levels.len() >= 2);
        }
        let c = harmonic_extend(&BoundaryData::constant(1.0));
        assert_eq!(deformation_energy(&c, &DeformationOptions::for_potential(&c)).unwrap().value, 0.0);
    }

    #[test]
    fn deformation_energy_reports_nonconvergence() {
        let pot = harmonic_extend(
            &BoundaryData::new(0.0, vec![0.0; 12], {
                let mut b = vec![0.0; 12];
                b[11] = 1.0;
                b
            })
            .unwrap(),
        );
        let opts = DeformationOptions { panels: 4, order: 1, angular: 2, tolerance: 1e-7, max_levels: 2 };
        assert!(matches!(deformation_energy(&pot, &opts), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn norm_report_rows() {
        let rows = norm_report(&BoundaryData::mode(2, 1.0, 0.0)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_relative_eq!(rows[0].hyperbolic, 2.0 * PI, max_relative = 1e-12);
        assert!(rows[0].rel_err.unwrap() <= 1e-12);
        assert!(rows[1].hyperbolic <= 0.25 * rows[1].euclidean);
    }
}
