//! Steady Euler flows `v = (dΦ)^♯` on the hyperbolic plane with the
//! Bernoulli pressure `p = -½|dΦ|²_h`.
//!
//! For a closed and coclosed `α = dΦ` one has `∇_v v^♭ = ½ d|α|²_h`, so the
//! stationary equation `∇_v v^♭ + dp = 0` holds identically. The residual is
//! evaluated from analytic derivatives of `Φ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{
    codifferential_1form, conformal_factor, covariant_derivative_1form, Covector, DiskPoint, Sharp, Vector,
};
use crate::grid::PolarGrid;
use crate::harmonic::{harmonic_extend, BoundaryData, HarmonicPotential};
use crate::quadrature::{integrate_disk, l4_norm_hyperbolic, DiskRule};

/// Velocity, pressure and potential of a steady flow.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadySolution {
    potential: HarmonicPotential,
    pressure_scale: f64,
}

pub fn build_steady(data: &BoundaryData) -> SteadySolution {
    SteadySolution::from_potential(harmonic_extend(data))
}

/// `d|dΦ|²_h = d(λ⁻² |∇Φ|²)`, using `∂_j λ⁻² = -(1 - |x|²) x_j`.
pub fn energy_density_gradient(pot: &HarmonicPotential, p: &DiskPoint<2>) -> Covector<2> {
    let g = pot.gradient(p);
    let h = pot.hessian(p);
    let x = p.coords();
    let a = 1.0 - p.norm_sq();
    let il2 = 0.25 * a * a;
    let sq = g[0] * g[0] + g[1] * g[1];
    core::array::from_fn(|j| -a * x[j] * sq + 2.0 * il2 * (g[0] * h[0][j] + g[1] * h[1][j]))
}

impl SteadySolution {
    pub fn from_potential(potential: HarmonicPotential) -> Self {
        SteadySolution { potential, pressure_scale: 1.0 }
    }

    /// Negative-control hook: the pressure becomes `-s·½|dΦ|²_h`. Only
    /// `s = 1` gives a solution.
    pub fn with_pressure_scale(mut self, s: f64) -> Self {
        self.pressure_scale = s;
        self
    }

    pub fn pressure_scale(&self) -> f64 {
        self.pressure_scale
    }

    pub fn potential(&self) -> &HarmonicPotential {
        &self.potential
    }

    /// `v = λ⁻² ∇Φ`.
    pub fn velocity(&self, p: &DiskPoint<2>) -> Vector<2> {
        let l = conformal_factor(p);
        self.potential.gradient(p).map(|g| g / (l * l))
    }

    /// `|dΦ|²_h = λ⁻² |∇Φ|²`.
    pub fn speed_sq(&self, p: &DiskPoint<2>) -> f64 {
        let [gx, gy] = self.potential.gradient(p);
        let l = conformal_factor(p);
        (gx * gx + gy * gy) / (l * l)
    }

    pub fn pressure(&self, p: &DiskPoint<2>) -> f64 {
        -0.5 * self.pressure_scale * self.speed_sq(p)
    }

    pub fn pressure_gradient(&self, p: &DiskPoint<2>) -> Covector<2> {
        energy_density_gradient(&self.potential, p).map(|d| -0.5 * self.pressure_scale * d)
    }

    /// `div_h v = -δ(dΦ)`.
    pub fn divergence(&self, p: &DiskPoint<2>) -> Result<f64> {
        Ok(-codifferential_1form(&self.potential.differential(), p)?)
    }

    /// Residual expected for the current pressure scale `s`:
    /// `(1 - s)/2 · d|dΦ|²_h`.
    pub fn expected_defect(&self, p: &DiskPoint<2>) -> Covector<2> {
        let k = 0.5 * (1.0 - self.pressure_scale);
        energy_density_gradient(&self.potential, p).map(|d| k * d)
    }
}

/// `∇_v v^♭ + dp`.
pub fn euler_residual(sol: &SteadySolution, p: &DiskPoint<2>) -> Result<Covector<2>> {
    let form = sol.potential.differential();
    let adv = covariant_derivative_1form(&form, &Sharp(form), p)?;
    let dp = sol.pressure_gradient(p);
    Ok([adv[0] + dp[0], adv[1] + dp[1]])
}

/// Relative mismatch of `∫ (α(α^♯))² dμ_h` and `‖α‖⁴_{L⁴(h)}` for `α = dΦ`.
/// The left side is assembled from the vector field and the volume form, the
/// right side from the pointwise hyperbolic norm. Zero for `α = 0`.
pub fn coset_triviality_check(sol: &SteadySolution, rule: &DiskRule) -> Result<f64> {
    let lhs = integrate_disk(
        |p| {
            let a = sol.potential.gradient(p);
            let v = sol.velocity(p);
            let pairing = a[0] * v[0] + a[1] * v[1];
            let l = conformal_factor(p);
            pairing * pairing * (l * l)
        },
        rule,
    )?;
    let rhs = l4_norm_hyperbolic(&sol.potential, rule)?;
    if rhs == 0.0 {
        return Ok(if lhs == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((lhs - rhs).abs() / rhs)
}

/// One line of a residual report.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResidualRow {
    pub point_x: f64,
    pub point_y: f64,
    pub residual_x: f64,
    pub residual_y: f64,
    pub residual_norm: f64,
}

/// Residual at every grid point, in grid order.
pub fn residual_report(sol: &SteadySolution, grid: &PolarGrid) -> Result<Vec<ResidualRow>> {
    grid.points()
        .map(|p| {
            let r = euler_residual(sol, &p)?;
            let norm = libm::hypot(r[0], r[1]);
            if !norm.is_finite() {
                return Err(Error::NonFinite { what: "Euler residual" });
            }
            let [x, y] = *p.coords();
            Ok(ResidualRow { point_x: x, point_y: y, residual_x: r[0], residual_y: r[1], residual_norm: norm })
        })
        .collect()
}

/// Largest residual norm of a report, with its row.
pub fn worst_row(rows: &[ResidualRow]) -> Option<ResidualRow> {
    rows.iter().copied().max_by(|a, b| a.residual_norm.total_cmp(&b.residual_norm))
}
