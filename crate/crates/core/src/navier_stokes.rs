//! Time-rescaled Navier-Stokes flows `v = f(t) (dΦ)^♯` on the hyperbolic plane.
//!
//! With the pressure `p = (2f - f')Φ - ½f²|dΦ|²_h` the five terms of
//!
//! ```text
//! ∂_t v^♭ + ∇_v v^♭ - Δv^♭ + 2 Ric(v^♭) + dp = 0
//! ```
//!
//! cancel for every differentiable `f`: `∂_t v^♭ = f' dΦ`, `∇_v v^♭ = ½f² d|dΦ|²_h`,
//! `Δ dΦ = 0` and `Ric = -1`. Whether the flow is a Leray-Hopf solution is a
//! scalar condition on `f`, `f(t)² + 4∫₀ᵗ f² ≤ f(0)²`, because
//! `‖Def v‖² = f² ‖dΦ‖²` for these fields.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::euler::energy_density_gradient;
use crate::geometry::{
    conformal_factor, covariant_derivative_1form, hodge_laplacian_1form, ricci_action, Covector, DiskPoint, Jacobian,
    OneFormField, SecondDerivatives, Sharp, Vector,
};
use crate::harmonic::HarmonicPotential;
use crate::quadrature::{deformation_energy, l2_norms, rule_for, DeformationEnergy, DeformationOptions};

/// Default admissibility tolerance for closed-form `F₂`.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;
/// Default admissibility tolerance for sampled profiles.
pub const SAMPLED_TOLERANCE: f64 = 1e-8;

/// A time profile `f` with `f'` and `F₂(t) = ∫₀ᵗ f²`.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeProfile {
    /// `f = f₀ e^{-a t}`.
    Exponential {
        f0: f64,
        rate: f64,
    },
    Sampled(SampledProfile),
}

impl TimeProfile {
    pub fn exponential(f0: f64, rate: f64) -> Result<Self> {
        if !f0.is_finite() || !rate.is_finite() {
            return Err(Error::NonFinite { what: "profile parameters" });
        }
        Ok(TimeProfile::Exponential { f0, rate })
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(TimeProfile::Sampled(SampledProfile::new(times, values)?))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Exponential { f0, rate } => f0 * libm::exp(-rate * t),
            TimeProfile::Sampled(s) => s.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Exponential { f0, rate } => -rate * f0 * libm::exp(-rate * t),
            TimeProfile::Sampled(s) => s.derivative(t),
        }
    }

    /// `F₂(t) = ∫₀ᵗ f(s)² ds`.
    pub fn f2_integral(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Exponential { f0, rate } => {
                if *rate == 0.0 {
                    f0 * f0 * t
                } else {
                    -f0 * f0 * libm::expm1(-2.0 * rate * t) / (2.0 * rate)
                }
            }
            TimeProfile::Sampled(s) => s.f2_integral(t),
        }
    }

    pub fn initial_value(&self) -> f64 {
        self.value(0.0)
    }

    /// `f(0)² - f(t)² - 4F₂(t)`. For the exponential family this is
    /// `f₀² (1 - 2/a)(1 - e^{-2at})`, evaluated in that form.
    pub fn energy_margin(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Exponential { f0, rate } => {
                if *rate == 0.0 {
                    -4.0 * f0 * f0 * t
                } else {
                    -f0 * f0 * libm::expm1(-2.0 * rate * t) * (1.0 - 2.0 / rate)
                }
            }
            TimeProfile::Sampled(_) => {
                let f0 = self.initial_value();
                let f = self.value(t);
                f0 * f0 - f * f - 4.0 * self.f2_integral(t)
            }
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            TimeProfile::Exponential { .. } => CLOSED_FORM_TOLERANCE,
            TimeProfile::Sampled(_) => SAMPLED_TOLERANCE,
        }
    }

    /// Largest time the profile is defined at, if bounded.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            TimeProfile::Exponential { .. } => None,
            TimeProfile::Sampled(s) => s.times.last().copied(),
        }
    }
}

/// Samples `f(t_i)` on `0 = t_0 < … < t_n`, interpolated by a cubic spline
/// whose end slopes come from the cubic through the four nearest samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledProfile {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Spline second derivatives at the samples.
    moments: Vec<f64>,
    /// `F₂` at the samples (composite Simpson on the spline).
    cumulative: Vec<f64>,
}

/// Derivative at `x[0]` of the cubic through four points.
fn end_slope(x: [f64; 4], y: [f64; 4]) -> f64 {
    let mut s = 0.0;
    for j in 0..4 {
        let mut d = 0.0;
        if j == 0 {
            for m in 1..4 {
                d += 1.0 / (x[0] - x[m]);
            }
        } else {
            let mut num = 1.0;
            let mut den = 1.0;
            for m in 0..4 {
                if m == j {
                    continue;
                }
                den *= x[j] - x[m];
                if m != 0 {
                    num *= x[0] - x[m];
                }
            }
            d = num / den;
        }
        s += y[j] * d;
    }
    s
}

impl SampledProfile {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n < 4 || values.len() != n {
            return Err(Error::InvalidInput("a sampled profile needs at least four (t, f) pairs"));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "profile samples" });
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("sample times must increase strictly from t = 0"));
        }
        let h: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let slope = |i: usize| (values[i + 1] - values[i]) / h[i];
        let s0 = end_slope([times[0], times[1], times[2], times[3]], [values[0], values[1], values[2], values[3]]);
        let sn = end_slope(
            [times[n - 1], times[n - 2], times[n - 3], times[n - 4]],
            [values[n - 1], values[n - 2], values[n - 3], values[n - 4]],
        );
        // Clamped spline: tridiagonal system for the moments, Thomas algorithm.
        let mut sub = alloc::vec![0.0; n];
        let mut diag = alloc::vec![0.0; n];
        let mut sup = alloc::vec![0.0; n];
        let mut rhs = alloc::vec![0.0; n];
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * (slope(0) - s0);
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * (slope(i) - slope(i - 1));
        }
        sub[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = 6.0 * (sn - slope(n - 2));
        for i in 1..n {
            let m = sub[i] / diag[i - 1];
            diag[i] -= m * sup[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        let mut moments = alloc::vec![0.0; n];
        moments[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            moments[i] = (rhs[i] - sup[i] * moments[i + 1]) / diag[i];
        }
        let mut out = SampledProfile { times, values, moments, cumulative: Vec::new() };
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..n - 1 {
            acc += out.simpson_sq(i, out.times[i + 1]);
            cumulative.push(acc);
        }
        out.cumulative = cumulative;
        Ok(out)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interval index for `t`; times outside the samples use the end cubics.
    fn interval(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    fn eval(&self, i: usize, t: f64) -> (f64, f64) {
        let h = self.times[i + 1] - self.times[i];
        let a = (self.times[i + 1] - t) / h;
        let b = (t - self.times[i]) / h;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        (v, d)
    }

    /// Simpson's rule for `∫ f²` over `[t_i, t]`.
    fn simpson_sq(&self, i: usize, t: f64) -> f64 {
        let lo = self.times[i];
        let sq = |s: f64| {
            let v = self.eval(i, s).0;
            v * v
        };
        (t - lo) / 6.0 * (sq(lo) + 4.0 * sq(0.5 * (lo + t)) + sq(t))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(self.interval(t), t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(self.interval(t), t).1
    }

    pub fn f2_integral(&self, t: f64) -> f64 {
        let i = self.interval(t);
        self.cumulative[i] + self.simpson_sq(i, t)
    }
}

/// `v(t, x) = f(t) (dΦ)^♯(x)` with its pressure.
#[derive(Clone, Debug, PartialEq)]
pub struct NsSolution {
    potential: HarmonicPotential,
    profile: TimeProfile,
}

/// `f · dΦ` with analytic derivatives.
struct ScaledDifferential<'a> {
    pot: &'a HarmonicPotential,
    f: f64,
}

impl OneFormField<2> for ScaledDifferential<'_> {
    fn components(&self, p: &DiskPoint<2>) -> Covector<2> {
        self.pot.gradient(p).map(|g| self.f * g)
    }

    fn jacobian(&self, p: &DiskPoint<2>) -> Option<Jacobian<2>> {
        Some(self.pot.hessian(p).map(|row| row.map(|h| self.f * h)))
    }

    fn second_derivatives(&self, p: &DiskPoint<2>) -> Option<SecondDerivatives<2>> {
        Some(self.pot.third_derivatives(p).map(|s| s.map(|row| row.map(|h| self.f * h))))
    }
}

/// The five terms of the momentum equation and their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NsTerms {
    /// `∂_t v^♭ = f' dΦ`.
    pub time_derivative: Covector<2>,
    /// `∇_v v^♭`.
    pub advection: Covector<2>,
    /// `-Δv^♭ = (dδ + δd) v^♭`.
    pub viscous: Covector<2>,
    /// `2 Ric(v^♭) = -2f dΦ`.
    pub ricci: Covector<2>,
    /// `dp`.
    pub pressure: Covector<2>,
    pub sum: Covector<2>,
}

fn norm(c: &Covector<2>) -> f64 {
    libm::hypot(c[0], c[1])
}

impl NsSolution {
    pub fn new(potential: HarmonicPotential, profile: TimeProfile) -> Self {
        NsSolution { potential, profile }
    }

    pub fn potential(&self) -> &HarmonicPotential {
        &self.potential
    }

    pub fn profile(&self) -> &TimeProfile {
        &self.profile
    }

    pub fn velocity(&self, t: f64, p: &DiskPoint<2>) -> Vector<2> {
        let f = self.profile.value(t);
        let l = conformal_factor(p);
        self.potential.gradient(p).map(|g| f * g / (l * l))
    }

    pub fn pressure(&self, t: f64, p: &DiskPoint<2>) -> f64 {
        let f = self.profile.value(t);
        let fp = self.profile.derivative(t);
        let [gx, gy] = self.potential.gradient(p);
        let l = conformal_factor(p);
        (2.0 * f - fp) * self.potential.value(p) - 0.5 * f * f * (gx * gx + gy * gy) / (l * l)
    }

    /// `dp = (2f - f') dΦ - ½f² d|dΦ|²_h`.
    pub fn pressure_gradient(&self, t: f64, p: &DiskPoint<2>) -> Covector<2> {
        let f = self.profile.value(t);
        let fp = self.profile.derivative(t);
        let g = self.potential.gradient(p);
        let e = energy_density_gradient(&self.potential, p);
        core::array::from_fn(|j| (2.0 * f - fp) * g[j] - 0.5 * f * f * e[j])
    }

    /// `½ f² d|dΦ|²_h`, the closed form of the advection term.
    pub fn advection_closed_form(&self, t: f64, p: &DiskPoint<2>) -> Covector<2> {
        let f = self.profile.value(t);
        energy_density_gradient(&self.potential, p).map(|e| 0.5 * f * f * e)
    }
}

pub fn ns_residual_terms(sol: &NsSolution, t: f64, p: &DiskPoint<2>) -> Result<NsTerms> {
    let f = sol.profile.value(t);
    let fp = sol.profile.derivative(t);
    let g = sol.potential.gradient(p);
    let form = ScaledDifferential { pot: &sol.potential, f };
    let time_derivative = g.map(|c| fp * c);
    let advection = covariant_derivative_1form(&form, &Sharp(&form), p)?;
    let viscous = hodge_laplacian_1form(&form, p)?;
    let ricci = ricci_action(&form.components(p)).map(|c| 2.0 * c);
    let pressure = sol.pressure_gradient(t, p);
    let sum = core::array::from_fn(|j| time_derivative[j] + advection[j] + viscous[j] + ricci[j] + pressure[j]);
    Ok(NsTerms { time_derivative, advection, viscous, ricci, pressure, sum })
}

/// Maxima over a space-time probe set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ResidualSweep {
    pub max_residual: f64,
    /// Largest `|2 Ric(v^♭)|`; nonzero unless the field is trivial.
    pub max_ricci: f64,
    /// Largest `|∇_v v^♭ - ½f² d|dΦ|²_h|`.
    pub max_advection_defect: f64,
    pub max_viscous: f64,
    /// Probe with the largest residual.
    pub worst: Option<(f64, [f64; 2])>,
}

pub fn residual_sweep(sol: &NsSolution, times: &[f64], points: &[DiskPoint<2>]) -> Result<ResidualSweep> {
    let mut out = ResidualSweep::default();
    for &t in times {
        for p in points {
            let terms = ns_residual_terms(sol, t, p)?;
            let r = norm(&terms.sum);
            if !r.is_finite() {
                return Err(Error::NonFinite { what: "Navier-Stokes residual" });
            }
            if out.worst.is_none() || r > out.max_residual {
                out.max_residual = r;
                out.worst = Some((t, *p.coords()));
            }
            out.max_ricci = out.max_ricci.max(norm(&terms.ricci));
            out.max_viscous = out.max_viscous.max(norm(&terms.viscous));
            let closed = sol.advection_closed_form(t, p);
            let defect = [terms.advection[0] - closed[0], terms.advection[1] - closed[1]];
            out.max_advection_defect = out.max_advection_defect.max(norm(&defect));
        }
    }
    Ok(out)
}

/// `steps + 1` equally spaced times on `[0, horizon]`.
pub fn time_grid(horizon: f64, steps: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput("time horizon must be positive"));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("time grid needs at least one step"));
    }
    Ok((0..=steps).map(|k| horizon * k as f64 / steps as f64).collect())
}

/// Outcome of the energy-inequality check.
#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    pub pass: bool,
    pub min_margin: f64,
    /// Time of the smallest margin.
    pub worst_time: f64,
    pub tolerance: f64,
    /// `(t, f(0)² - f(t)² - 4F₂(t))` on the time grid.
    pub curve: Vec<(f64, f64)>,
}

/// Checks `f(t)² + 4F₂(t) ≤ f(0)²` on `steps + 1` times in `[0, horizon]`
/// with the profile's default tolerance.
pub fn leray_hopf_admissible(profile: &TimeProfile, horizon: f64, steps: usize) -> Result<Admissibility> {
    leray_hopf_admissible_with(profile, horizon, steps, profile.default_tolerance())
}

pub fn leray_hopf_admissible_with(
    profile: &TimeProfile,
    horizon: f64,
    steps: usize,
    tolerance: f64,
) -> Result<Admissibility> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive"));
    }
    if let Some(h) = profile.horizon() {
        if horizon > h {
            return Err(Error::InvalidInput("time horizon exceeds the sampled profile"));
        }
    }
    let curve: Vec<(f64, f64)> =
        time_grid(horizon, steps)?.into_iter().map(|t| (t, profile.energy_margin(t))).collect();
    let (worst_time, min_margin) =
        curve.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty time grid");
    if !min_margin.is_finite() {
        return Err(Error::NonFinite { what: "energy margin" });
    }
    Ok(Admissibility { pass: min_margin >= -tolerance, min_margin, worst_time, tolerance, curve })
}

/// One row of the energy report. `E = f²‖dΦ‖²`, `four_F2 = 4F₂‖dΦ‖²`,
/// `lhs = E + four_F2`, `rhs = f(0)²‖dΦ‖²`, `margin = rhs - lhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnergyRow {
    pub t: f64,
    pub f: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E"))]
    pub e: f64,
    #[cfg_attr(feature = "serde", serde(rename = "four_F2"))]
    pub four_f2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Energy row with the separation from a second solution.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SeparationRow {
    pub t: f64,
    pub f: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E"))]
    pub e: f64,
    #[cfg_attr(feature = "serde", serde(rename = "four_F2"))]
    pub four_f2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub sep: f64,
}

impl SeparationRow {
    fn from_energy(r: EnergyRow, sep: f64) -> Self {
        SeparationRow { t: r.t, f: r.f, e: r.e, four_f2: r.four_f2, lhs: r.lhs, rhs: r.rhs, margin: r.margin, sep }
    }
}

fn energy_row(profile: &TimeProfile, l2: f64, t: f64) -> EnergyRow {
    let f0 = profile.initial_value();
    let f = profile.value(t);
    let e = f * f * l2;
    let four_f2 = 4.0 * profile.f2_integral(t) * l2;
    EnergyRow { t, f, e, four_f2, lhs: e + four_f2, rhs: f0 * f0 * l2, margin: profile.energy_margin(t) * l2 }
}

/// `‖dΦ‖²_{L²(h)}`, exact for truncated series.
pub fn dirichlet_energy(pot: &HarmonicPotential) -> Result<f64> {
    Ok(l2_norms(pot, &rule_for(pot))?.hyperbolic)
}

/// Energy rows on `steps + 1` times in `[0, horizon]`. The dissipation
/// `∫₀ᵗ ‖Def v‖²` is taken as `F₂(t)‖dΦ‖²`; see [`dissipation_bridge`].
pub fn energy_report(sol: &NsSolution, horizon: f64, steps: usize) -> Result<Vec<EnergyRow>> {
    let l2 = dirichlet_energy(&sol.potential)?;
    Ok(time_grid(horizon, steps)?.into_iter().map(|t| energy_row(&sol.profile, l2, t)).collect())
}

/// `‖v(t) - v(0)‖_{L²(h)} = |f(t) - f(0)| ‖dΦ‖`.
pub fn initial_data_distance(sol: &NsSolution, t: f64) -> Result<f64> {
    let l2 = dirichlet_energy(&sol.potential)?;
    Ok((sol.profile.value(t) - sol.profile.initial_value()).abs() * libm::sqrt(l2))
}

/// The identity `‖Def (dΦ)^♯‖² = ‖dΦ‖²` that turns the energy inequality
/// into the scalar condition on `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct DissipationBridge {
    pub l2_hyperbolic: f64,
    pub deformation: DeformationEnergy,
    pub relative_gap: f64,
}

pub fn dissipation_bridge(pot: &HarmonicPotential, opts: &DeformationOptions) -> Result<DissipationBridge> {
    let l2 = dirichlet_energy(pot)?;
    let deformation = deformation_energy(pot, opts)?;
    let relative_gap = if l2 == 0.0 && deformation.value == 0.0 {
        0.0
    } else {
        (deformation.value - l2).abs() / l2.abs().max(deformation.value.abs())
    };
    Ok(DissipationBridge { l2_hyperbolic: l2, deformation, relative_gap })
}

/// Probe set and thresholds for [`nonuniqueness_demo`].
#[derive(Clone, Copy, Debug)]
pub struct NonuniquenessOptions<'a> {
    pub horizon: f64,
    pub steps: usize,
    pub probe_times: &'a [f64],
    pub probe_points: &'a [DiskPoint<2>],
    pub residual_tolerance: f64,
}

/// Two Leray-Hopf solutions with the same initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonuniqueness {
    pub dirichlet_energy: f64,
    pub initial_separation: f64,
    pub sweeps: [ResidualSweep; 2],
    pub admissibility: [Admissibility; 2],
    pub rows: [Vec<SeparationRow>; 2],
    pub max_separation: f64,
    /// Same initial data, both residuals within tolerance, and a positive
    /// separation at some time.
    pub certified: bool,
}

pub fn nonuniqueness_demo(
    pot: &HarmonicPotential,
    f1: &TimeProfile,
    f2: &TimeProfile,
    opts: &NonuniquenessOptions<'_>,
) -> Result<Nonuniqueness> {
    let (a, b) = (f1.initial_value(), f2.initial_value());
    if a != b {
        return Err(Error::InitialValueMismatch { f1: a, f2: b });
    }
    let adm1 = leray_hopf_admissible(f1, opts.horizon, opts.steps)?;
    let adm2 = leray_hopf_admissible(f2, opts.horizon, opts.steps)?;
    for adm in [&adm1, &adm2] {
        if !adm.pass {
            return Err(Error::Inadmissible { time: adm.worst_time, margin: adm.min_margin });
        }
    }
    let l2 = dirichlet_energy(pot)?;
    let norm = libm::sqrt(l2);
    let s1 = NsSolution::new(pot.clone(), f1.clone());
    let s2 = NsSolution::new(pot.clone(), f2.clone());
    let sweep1 = residual_sweep(&s1, opts.probe_times, opts.probe_points)?;
    let sweep2 = residual_sweep(&s2, opts.probe_times, opts.probe_points)?;
    let times = time_grid(opts.horizon, opts.steps)?;
    let sep = |t: f64| (f1.value(t) - f2.value(t)).abs() * norm;
    let rows1: Vec<SeparationRow> =
        times.iter().map(|&t| SeparationRow::from_energy(energy_row(f1, l2, t), sep(t))).collect();
    let rows2: Vec<SeparationRow> =
        times.iter().map(|&t| SeparationRow::from_energy(energy_row(f2, l2, t), sep(t))).collect();
    let initial_separation = sep(0.0);
    let max_separation = rows1.iter().map(|r| r.sep).fold(0.0, f64::max);
    let certified = initial_separation == 0.0
        && sweep1.max_residual <= opts.residual_tolerance
        && sweep2.max_residual <= opts.residual_tolerance
        && max_separation > 0.0;
    Ok(Nonuniqueness {
        dirichlet_energy: l2,
        initial_separation,
        sweeps: [sweep1, sweep2],
        admissibility: [adm1, adm2],
        rows: [rows1, rows2],
        max_separation,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{harmonic_extend, BoundaryData};
    use alloc::vec;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x_potential() -> HarmonicPotential {
        harmonic_extend(&BoundaryData::mode(1, 1.0, 0.0))
    }

    fn exp(rate: f64) -> TimeProfile {
        TimeProfile::exponential(1.0, rate).unwrap()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> Vec<DiskPoint<2>> {
        (0..n)
            .map(|_| {
                let r = rmax * rng.gen::<f64>().sqrt();
                DiskPoint::polar(r, rng.gen_range(0.0..2.0 * PI)).unwrap()
            })
            .collect()
    }

    #[test]
    fn exponential_closed_forms() {
        let p = TimeProfile::exponential(1.5, 0.7).unwrap();
        for t in [0.0, 0.3, 2.0] {
            assert_relative_eq!(p.f2_integral(t), 2.25 * (1.0 - (-1.4 * t).exp()) / 1.4, epsilon = 1e-15);
            let f = p.value(t);
            assert_relative_eq!(p.energy_margin(t), 2.25 - f * f - 4.0 * p.f2_integral(t), epsilon = 1e-14);
        }
        assert_eq!(exp(0.0).f2_integral(2.0), 2.0);
    }

    #[test]
    fn single_probe_example() {
        let sol = NsSolution::new(x_potential(), exp(2.0));
        let terms = ns_residual_terms(&sol, 0.5, &DiskPoint::new([0.3, 0.2]).unwrap()).unwrap();
        assert!(norm(&terms.sum) <= 1e-10);
        assert_relative_eq!(norm(&terms.ricci), 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert!(norm(&terms.time_derivative) > 0.1 && norm(&terms.pressure) > 0.1);
    }

    #[test]
    fn zero_profile_gives_zero_terms() {
        let sol = NsSolution::new(x_potential(), TimeProfile::exponential(0.0, 2.0).unwrap());
        let t = ns_residual_terms(&sol, 0.4, &DiskPoint::new([-0.2, 0.6]).unwrap()).unwrap();
        for c in [t.time_derivative, t.advection, t.viscous, t.ricci, t.pressure, t.sum] {
            assert_eq!(norm(&c), 0.0);
        }
    }

    #[test]
    fn residual_vanishes_and_advection_matches_closed_form() {
        let data = BoundaryData::new(0.0, vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.5]).unwrap();
        let sol = NsSolution::new(harmonic_extend(&data), exp(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let points = random_points(&mut rng, 100, 0.95);
        let times: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..3.0)).collect();
        let s = residual_sweep(&sol, &times, &points).unwrap();
        assert!(s.max_residual <= 1e-10);
        assert!(s.max_advection_defect <= 1e-10);
        assert!(s.max_viscous <= 1e-10);
        assert!(s.max_ricci >= 0.1);
    }

    #[test]
    fn pressure_gradient_matches_differences() {
        let sol = NsSolution::new(harmonic_extend(&BoundaryData::mode(3, 0.4, -0.8)), exp(3.0));
        let (p, t, h) = (DiskPoint::new([0.25, -0.4]).unwrap(), 0.7, 1e-6);
        let dp = sol.pressure_gradient(t, &p);
        for j in 0..2 {
            let mut c1 = *p.coords();
            let mut c2 = c1;
            c1[j] += h;
            c2[j] -= h;
            let fd = (sol.pressure(t, &DiskPoint::new(c1).unwrap()) - sol.pressure(t, &DiskPoint::new(c2).unwrap()))
                / (2.0 * h);
            assert_relative_eq!(dp[j], fd, max_relative = 1e-7, epsilon = 1e-9);
        }
    }

    #[test]
    fn admissibility_examples() {
        let a = leray_hopf_admissible(&exp(2.0), 5.0, 100).unwrap();
        assert!(a.pass);
        assert!(a.curve.iter().all(|(_, m)| *m == 0.0));
        let a = leray_hopf_admissible(&exp(1.0), 2.0, 20).unwrap();
        assert!(!a.pass);
        let at_one = a.curve.iter().find(|(t, _)| *t == 1.0).unwrap().1;
        assert_relative_eq!(at_one, -0.864_664_716_763_387_3, max_relative = 1e-14);
        let a = leray_hopf_admissible(&exp(3.0), 5.0, 100).unwrap();
        assert!(a.pass);
        for (t, m) in &a.curve {
            assert_relative_eq!(*m, 1.0 / 3.0 - (-6.0 * t).exp() / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn admissibility_boundary_in_rate() {
        for (rate, want) in [(1.0, false), (1.9, false), (2.0, true), (2.1, true), (3.0, true), (10.0, true)] {
            assert_eq!(leray_hopf_admissible(&exp(rate), 4.0, 80).unwrap().pass, want, "rate {rate}");
        }
    }

    fn sampled(rate: f64, n: usize, horizon: f64) -> TimeProfile {
        let times: Vec<f64> = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();
        let values = times.iter().map(|t| (-rate * t).exp()).collect();
        TimeProfile::sampled(times, values).unwrap()
    }

    #[test]
    fn sampled_profile_tracks_closed_form() {
        let s = sampled(2.0, 400, 2.0);
        let e = exp(2.0);
        for k in 0..=97 {
            let t = 2.0 * k as f64 / 97.0;
            assert!((s.value(t) - e.value(t)).abs() <= 1e-9);
            assert!((s.derivative(t) - e.derivative(t)).abs() <= 1e-6);
            assert!((s.f2_integral(t) - e.f2_integral(t)).abs() <= 1e-9);
        }
        // the equality case stays within the sampled tolerance
        assert!(leray_hopf_admissible(&s, 2.0, 40).unwrap().pass);
        assert!(leray_hopf_admissible(&sampled(3.0, 200, 2.0), 2.0, 40).unwrap().pass);
        assert!(!leray_hopf_admissible(&sampled(1.0, 200, 2.0), 2.0, 40).unwrap().pass);
        assert!(leray_hopf_admissible(&s, 3.0, 40).is_err());
    }

    #[test]
    fn sampled_profile_validation() {
        assert!(TimeProfile::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(TimeProfile::sampled(vec![0.1, 1.0, 2.0, 3.0], vec![1.0; 4]).is_err());
        assert!(TimeProfile::sampled(vec![0.0, 1.0, 1.0, 3.0], vec![1.0; 4]).is_err());
        // cubic data is reproduced exactly
        let times = vec![0.0, 0.3, 0.7, 1.2, 1.5, 2.0];
        let cubic = |t: f64| 1.0 - t + 0.5 * t * t - 0.1 * t * t * t;
        let s = TimeProfile::sampled(times.clone(), times.iter().map(|t| cubic(*t)).collect()).unwrap();
        for t in [0.05, 0.5, 1.33, 1.99] {
            assert_relative_eq!(s.value(t), cubic(t), epsilon = 1e-13);
        }
    }

    #[test]
    fn energy_report_examples() {
        let rows = energy_report(&NsSolution::new(x_potential(), exp(2.0)), 3.0, 30).unwrap();
        assert_eq!(rows[0].lhs, rows[0].rhs);
        for r in &rows {
            assert_relative_eq!(r.lhs, PI, max_relative = 1e-12);
            assert!(r.margin.abs() <= 1e-9);
        }
        let rows = energy_report(&NsSolution::new(x_potential(), exp(3.0)), 10.0, 10).unwrap();
        assert_relative_eq!(rows.last().unwrap().margin, PI / 3.0, max_relative = 1e-12);
        let sol = NsSolution::new(x_potential(), exp(3.0));
        let mut last = f64::INFINITY;
        for t in [1e-1, 1e-2, 1e-3, 1e-6] {
            let d = initial_data_distance(&sol, t).unwrap();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn deformation_bridge() {
        for k in [1, 2] {
            let pot = harmonic_extend(&BoundaryData::mode(k, 1.0, 0.0));
            let b = dissipation_bridge(&pot, &DeformationOptions::for_potential(&pot)).unwrap();
            assert_relative_eq!(b.l2_hyperbolic, k as f64 * PI, max_relative = 1e-12);
            assert!(b.relative_gap <= 1e-6, "{}", b.relative_gap);
        }
    }

    #[test]
    fn nonuniqueness_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points = random_points(&mut rng, 50, 0.95);
        let times = [0.0, 0.5, 1.0, 1.5];
        let opts = NonuniquenessOptions {
            horizon: 2.0,
            steps: 20,
            probe_times: &times,
            probe_points: &points,
            residual_tolerance: 1e-10,
        };
        let d = nonuniqueness_demo(&x_potential(), &exp(2.0), &exp(3.0), &opts).unwrap();
        assert!(d.certified);
        assert_eq!(d.initial_separation, 0.0);
        let at_one = d.rows[0].iter().find(|r| r.t == 1.0).unwrap().sep;
        assert_relative_eq!(at_one, 0.151_630_262_882_206_24, max_relative = 1e-8);
        let same = nonuniqueness_demo(&x_potential(), &exp(2.0), &exp(2.0), &opts).unwrap();
        assert!(same.rows[0].iter().all(|r| r.sep == 0.0));
        assert!(!same.certified);
        assert!(matches!(
            nonuniqueness_demo(&x_potential(), &exp(2.0), &exp(1.0), &opts),
            Err(Error::Inadmissible { .. })
        ));
        let shifted = TimeProfile::exponential(1.1, 3.0).unwrap();
        assert!(matches!(
            nonuniqueness_demo(&x_potential(), &exp(2.0), &shifted, &opts),
            Err(Error::InitialValueMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn scaling_the_potential_scales_energies(s in 0.1f64..5.0, rate in 0.5f64..6.0) {
            let base = BoundaryData::new(0.0, vec![0.3, -0.8], vec![0.5, 0.1]).unwrap();
            let p1 = NsSolution::new(harmonic_extend(&base), exp(rate));
            let p2 = NsSolution::new(harmonic_extend(&base.scaled(s)), exp(rate));
            let r1 = energy_report(&p1, 2.0, 8).unwrap();
            let r2 = energy_report(&p2, 2.0, 8).unwrap();
            for (a, b) in r1.iter().zip(&r2) {
                prop_assert!((b.lhs - s * s * a.lhs).abs() <= 1e-12 * b.lhs.abs().max(1.0));
                prop_assert!((b.margin - s * s * a.margin).abs() <= 1e-12 * b.rhs.abs().max(1.0));
            }
            let a1 = leray_hopf_admissible(p1.profile(), 2.0, 8).unwrap();
            let a2 = leray_hopf_admissible(p2.profile(), 2.0, 8).unwrap();
            prop_assert_eq!(a1.pass, a2.pass);
        }
    }
}
