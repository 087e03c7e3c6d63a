//! Truncated energies of bounded harmonic extensions on `H²` and `H³`, run
//! through one pipeline and classified as convergent or divergent.
//!
//! Only the extension operator and the weight `λ^{n-2}` depend on `n`; shell
//! accumulation, the refined rerun and the classification are shared.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::harmonic::{ball_extend_3d, harmonic_extend, BoundaryData, KernelRule, SphereFunction};
use crate::quadrature::{truncated_energy_growth, GradientDensity, GrowthCurve, LinearFit, ShellRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Classification {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Convergent => "CONVERGENT",
            Classification::Divergent => "DIVERGENT",
            Classification::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DichotomyOptions {
    pub r_max: f64,
    pub shells: usize,
    pub radial_order: usize,
    /// Circle rule order for `n = 2`; `None` picks one exact for the data.
    pub angular_order_2d: Option<usize>,
    pub angular_order_3d: usize,
    pub kernel: KernelRule,
    /// Window `[lo, hi]` of the linear fit.
    pub fit_window: (f64, f64),
    /// Largest estimated tail, relative to `E(R_max)`, for CONVERGENT.
    pub tail_tolerance: f64,
    /// Largest relative slope change under refinement for DIVERGENT.
    pub slope_tolerance: f64,
    /// Largest RMS fit residual, relative to `E(R_max)`, for DIVERGENT.
    pub residual_fraction: f64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions {
            r_max: 10.0,
            shells: 20,
            radial_order: 8,
            angular_order_2d: None,
            angular_order_3d: 4,
            kernel: KernelRule::default(),
            fit_window: (4.0, 10.0),
            tail_tolerance: 1e-3,
            slope_tolerance: 0.05,
            residual_fraction: 0.01,
        }
    }
}

/// Growth curve of one dimension, its refined rerun and the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    pub dimension: usize,
    pub curve: GrowthCurve,
    /// Rerun with half the shell width and twice the angular order.
    pub refined: GrowthCurve,
    pub fit: Option<LinearFit>,
    pub refined_fit: Option<LinearFit>,
    /// `|slope' - slope| / |slope|` between the two runs.
    pub slope_change: f64,
    /// Geometric-series estimate of `E(∞) - E(R_max)`, if increments decay.
    pub tail_estimate: Option<f64>,
    pub classification: Classification,
}

impl DimensionReport {
    /// `E(R_max)` plus the tail estimate.
    pub fn limit_estimate(&self) -> Option<f64> {
        self.tail_estimate.map(|t| self.curve.last_energy() + t)
    }
}

/// `Δ_m q/(1 - q)` with `q = Δ_m/Δ_{m-1}`, when the last increments shrink.
fn geometric_tail(curve: &GrowthCurve) -> Option<f64> {
    let inc = &curve.increments;
    let m = inc.len();
    if m < 3 {
        return None;
    }
    let (a, b, c) = (inc[m - 3], inc[m - 2], inc[m - 1]);
    if c == 0.0 && b == 0.0 {
        return Some(0.0);
    }
    if !(c < b && b < a) || b <= 0.0 {
        return None;
    }
    let q = c / b;
    Some(c * q / (1.0 - q))
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Verdict from a curve and its refined rerun.
pub fn classify(curve: &GrowthCurve, refined: &GrowthCurve, opts: &DichotomyOptions) -> Classification {
    let e = curve.last_energy();
    if e == 0.0 && refined.last_energy() == 0.0 {
        return Classification::Convergent;
    }
    if let (Some(t1), Some(t2)) = (geometric_tail(curve), geometric_tail(refined)) {
        if t1 <= opts.tail_tolerance * e && t2 <= opts.tail_tolerance * refined.last_energy() {
            return Classification::Convergent;
        }
    }
    let (lo, hi) = opts.fit_window;
    let (Some(fit), Some(fine)) = (curve.fit(lo, hi), refined.fit(lo, hi)) else {
        return Classification::Inconclusive;
    };
    // increments in the window must not die out
    let window: Vec<f64> = curve.window(lo, hi).map(|j| curve.increments[j]).collect();
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let sustained = window.last().is_some_and(|last| *last >= 0.5 * mean);
    if fit.slope > 0.0
        && sustained
        && fit.residual <= opts.residual_fraction * e
        && relative_change(fit.slope, fine.slope) <= opts.slope_tolerance
    {
        Classification::Divergent
    } else {
        Classification::Inconclusive
    }
}

/// Runs one dimension: base curve, refined curve, fits and verdict.
pub fn analyze_growth<const N: usize, D: GradientDensity<N>>(
    density: &D,
    rule: &ShellRule<N>,
    opts: &DichotomyOptions,
) -> Result<DimensionReport> {
    let curve = truncated_energy_growth(density, rule)?;
    let refined = truncated_energy_growth(density, &rule.with_halved_shells()?.with_doubled_angular()?)?;
    let (lo, hi) = opts.fit_window;
    let fit = curve.fit(lo, hi);
    let refined_fit = refined.fit(lo, hi);
    let slope_change = match (fit, refined_fit) {
        (Some(a), Some(b)) => relative_change(a.slope, b.slope),
        _ => f64::NAN,
    };
    let tail_estimate = geometric_tail(&curve);
    let classification = classify(&curve, &refined, opts);
    Ok(DimensionReport { dimension: N, curve, refined, fit, refined_fit, slope_change, tail_estimate, classification })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dichotomy {
    pub n2: DimensionReport,
    pub n3: DimensionReport,
}

pub fn dichotomy_experiment<F: SphereFunction>(
    data2d: &BoundaryData,
    data3d: F,
    opts: &DichotomyOptions,
) -> Result<Dichotomy> {
    if !(opts.r_max >= 6.0) {
        return Err(Error::InvalidInput("the dichotomy experiment needs R_max ≥ 6"));
    }
    if opts.shells < 20 {
        return Err(Error::InvalidInput("the dichotomy experiment needs at least 20 shells"));
    }
    let pot2 = harmonic_extend(data2d);
    let m2 = opts.angular_order_2d.unwrap_or(pot2.order() + 2);
    let rule2 = ShellRule::<2>::new(opts.r_max, opts.shells, opts.radial_order, m2)?;
    let n2 = analyze_growth(&pot2, &rule2, opts)?;
    let pot3 = ball_extend_3d(data3d, opts.kernel)?;
    let rule3 = ShellRule::<3>::new(opts.r_max, opts.shells, opts.radial_order, opts.angular_order_3d)?;
    let n3 = analyze_growth(&pot3, &rule3, opts)?;
    Ok(Dichotomy { n2, n3 })
}

/// One line of a growth report. The fit uses the shell edges in
/// `[R/2, R]`; it is absent while that window holds fewer than two edges.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GrowthRow {
    #[cfg_attr(feature = "serde", serde(rename = "R"))]
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E"))]
    pub e: f64,
    #[cfg_attr(feature = "serde", serde(rename = "delta_E"))]
    pub delta_e: f64,
    pub fit_slope: Option<f64>,
    pub fit_residual: Option<f64>,
}

pub fn growth_rows(curve: &GrowthCurve) -> Vec<GrowthRow> {
    (0..curve.radii.len())
        .map(|j| {
            let r = curve.radii[j];
            let fit = curve.fit(0.5 * r, r);
            GrowthRow {
                r,
                e: curve.energies[j],
                delta_e: curve.increments[j],
                fit_slope: fit.map(|f| f.slope),
                fit_residual: fit.map(|f| f.residual),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn xi3(xi: &[f64; 3]) -> f64 {
        xi[2]
    }

    #[test]
    fn cos_theta_against_xi3() {
        let d = dichotomy_experiment(&BoundaryData::mode(1, 1.0, 0.0), xi3, &DichotomyOptions::default()).unwrap();
        assert_eq!(d.n2.classification, Classification::Convergent);
        assert_eq!(d.n3.classification, Classification::Divergent);
        assert_relative_eq!(d.n2.limit_estimate().unwrap(), PI, max_relative = 1e-6);
        let fit = d.n3.fit.unwrap();
        assert!(fit.slope > 0.0);
        assert!(fit.residual < 0.01 * d.n3.curve.last_energy());
        assert!(d.n3.slope_change < 0.01);
        let e3 = d.n3.curve.last_energy();
        assert!(d.n3.tail_estimate.is_none_or(|t| t > e3));
    }

    #[test]
    fn constant_data_converges_in_both_dimensions() {
        let d = dichotomy_experiment(&BoundaryData::constant(2.0), |_: &[f64; 3]| 2.0, &DichotomyOptions::default())
            .unwrap();
        for r in [&d.n2, &d.n3] {
            assert_eq!(r.classification, Classification::Convergent);
            assert!(r.curve.energies.iter().all(|e| *e == 0.0));
        }
    }

    #[test]
    fn second_mode_limit() {
        let d = dichotomy_experiment(&BoundaryData::mode(2, 1.0, 0.0), xi3, &DichotomyOptions::default()).unwrap();
        assert_eq!(d.n2.classification, Classification::Convergent);
        assert_relative_eq!(d.n2.limit_estimate().unwrap(), 2.0 * PI, max_relative = 1e-5);
    }

    #[test]
    fn preconditions_are_enforced() {
        let data = BoundaryData::mode(1, 1.0, 0.0);
        let short = DichotomyOptions { r_max: 5.0, ..DichotomyOptions::default() };
        assert!(dichotomy_experiment(&data, xi3, &short).is_err());
        let coarse = DichotomyOptions { shells: 10, ..DichotomyOptions::default() };
        assert!(dichotomy_experiment(&data, xi3, &coarse).is_err());
    }

    #[test]
    fn unstable_slope_is_inconclusive() {
        let curve = GrowthCurve {
            dimension: 3,
            radii: (1..=10).map(|j| j as f64).collect(),
            energies: (1..=10).map(|j| 2.0 * j as f64).collect(),
            increments: alloc::vec![2.0; 10],
        };
        let mut refined = curve.clone();
        refined.energies = (1..=10).map(|j| 2.3 * j as f64).collect();
        refined.increments = alloc::vec![2.3; 10];
        let opts = DichotomyOptions { fit_window: (4.0, 10.0), ..DichotomyOptions::default() };
        assert_eq!(classify(&curve, &refined, &opts), Classification::Inconclusive);
        assert_eq!(classify(&curve, &curve, &opts), Classification::Divergent);
    }

    #[test]
    fn growth_rows_layout() {
        let rule = ShellRule::<2>::new(8.0, 16, 6, 3).unwrap();
        let c = truncated_energy_growth(&harmonic_extend(&BoundaryData::mode(1, 1.0, 0.0)), &rule).unwrap();
        let rows = growth_rows(&c);
        assert_eq!(rows.len(), 16);
        assert!(rows[0].fit_slope.is_none());
        assert!(rows[15].fit_slope.is_some());
        assert!(rows.windows(2).all(|w| w[1].e >= w[0].e && w[1].delta_e >= 0.0));
    }
}
