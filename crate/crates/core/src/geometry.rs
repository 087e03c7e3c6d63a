//! Pointwise differential geometry of the Poincaré ball model.
//!
//! The metric is `g = λ² δ` with `λ(x) = 2 / (1 - |x|²)`, which has constant
//! sectional curvature -1. Every form and vector is expressed by its components
//! in the Euclidean chart of the unit ball; the dimension is the const
//! parameter `N` (the hyperbolic plane is `N = 2`).
//!
//! Index conventions:
//!
//! - [`Jacobian`]: `J[i][j] = ∂_i α_j`
//! - [`SecondDerivatives`]: `S[k][i][j] = ∂_k ∂_i α_j`
//! - [`Christoffel`]: `G[k][i][j] = Γ^k_{ij}`
//!
//! Analytic derivatives are used whenever a field supplies them. Otherwise
//! the operators fall back to central finite differences (see
//! [`FiniteDifference`]).

use crate::error::{Error, Result};

pub type Covector<const N: usize> = [f64; N];
pub type Vector<const N: usize> = [f64; N];
pub type Jacobian<const N: usize> = [[f64; N]; N];
pub type SecondDerivatives<const N: usize> = [[[f64; N]; N]; N];
pub type Christoffel<const N: usize> = [[[f64; N]; N]; N];

/// Radius beyond which results are flagged as rounding-sensitive.
pub const RIM_FLAG_RADIUS: f64 = 0.999;

/// A point of the open unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint<const N: usize>([f64; N]);

impl<const N: usize> DiskPoint<N> {
    pub fn new(coords: [f64; N]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "point coordinates" });
        }
        let p = DiskPoint(coords);
        let r2 = p.norm_sq();
        if r2 >= 1.0 {
            return Err(Error::OutsideChart { norm: libm::sqrt(r2) });
        }
        Ok(p)
    }

    /// The center of the ball.
    pub const fn origin() -> Self {
        DiskPoint([0.0; N])
    }

    pub fn coords(&self) -> &[f64; N] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    /// True when `|x| >= 0.999`, where `λ²` amplifies rounding noticeably.
    pub fn is_near_rim(&self) -> bool {
        self.norm() >= RIM_FLAG_RADIUS
    }

    pub(crate) fn offset(&self, axis: usize, h: f64) -> Self {
        let mut c = self.0;
        c[axis] += h;
        DiskPoint(c)
    }
}

impl DiskPoint<2> {
    pub fn polar(r: f64, theta: f64) -> Result<Self> {
        Self::new([r * libm::cos(theta), r * libm::sin(theta)])
    }
}

/// Conformal factor `λ(x) = 2 / (1 - |x|²)`.
pub fn conformal_factor<const N: usize>(p: &DiskPoint<N>) -> f64 {
    2.0 / (1.0 - p.norm_sq())
}

/// Gradient of `log λ`, i.e. `u(x) = 2x / (1 - |x|²)`.
pub fn log_gradient<const N: usize>(p: &DiskPoint<N>) -> [f64; N] {
    let s = 2.0 / (1.0 - p.norm_sq());
    p.0.map(|c| s * c)
}

/// Metric data at one point: the conformal factor and `∇ log λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricData<const N: usize> {
    pub lambda: f64,
    pub log_grad: [f64; N],
}

impl<const N: usize> MetricData<N> {
    pub fn at(p: &DiskPoint<N>) -> Self {
        MetricData { lambda: conformal_factor(p), log_grad: log_gradient(p) }
    }

    pub const fn dimension(&self) -> usize {
        N
    }

    /// `λ⁻²`, computed as `(1 - |x|²)² / 4`.
    pub fn inv_lambda_sq(&self) -> f64 {
        let l = self.lambda;
        1.0 / (l * l)
    }
}

/// Raise an index: `α^♯ = λ⁻² α`.
pub fn sharp<const N: usize>(alpha: &Covector<N>, p: &DiskPoint<N>) -> Vector<N> {
    let l = conformal_factor(p);
    let s = 1.0 / (l * l);
    alpha.map(|a| s * a)
}

/// Lower an index: `v^♭ = λ² v`.
pub fn flat<const N: usize>(v: &Vector<N>, p: &DiskPoint<N>) -> Covector<N> {
    let l = conformal_factor(p);
    let s = l * l;
    v.map(|a| s * a)
}

/// Euclidean and hyperbolic pointwise norms `(|α|_e, |α|_h)` of a covector.
pub fn pointwise_norms<const N: usize>(alpha: &Covector<N>, p: &DiskPoint<N>) -> (f64, f64) {
    let e = libm::sqrt(alpha.iter().map(|a| a * a).sum());
    (e, e / conformal_factor(p))
}

/// Christoffel symbols `Γ^k_{ij} = δ_{ki} u_j + δ_{kj} u_i - δ_{ij} u_k`.
pub fn christoffel<const N: usize>(p: &DiskPoint<N>) -> Christoffel<N> {
    christoffel_from(&log_gradient(p))
}

fn christoffel_from<const N: usize>(u: &[f64; N]) -> Christoffel<N> {
    let mut g = [[[0.0; N]; N]; N];
    for (k, gk) in g.iter_mut().enumerate() {
        for (i, gki) in gk.iter_mut().enumerate() {
            for (j, gkij) in gki.iter_mut().enumerate() {
                let mut v = 0.0;
                if k == i {
                    v += u[j];
                }
                if k == j {
                    v += u[i];
                }
                if i == j {
                    v -= u[k];
                }
                *gkij = v;
            }
        }
    }
    g
}

/// Action of the Ricci tensor of curvature -1 space on a covector: `-(N-1) α`.
pub fn ricci_action<const N: usize>(alpha: &Covector<N>) -> Covector<N> {
    let c = -((N - 1) as f64);
    alpha.map(|a| c * a)
}

/// A covector field on the ball, given by its Euclidean-chart components.
///
/// Derivative evaluators are optional; when absent, operators fall back to
/// central finite differences.
pub trait OneFormField<const N: usize> {
    fn components(&self, p: &DiskPoint<N>) -> Covector<N>;

    fn jacobian(&self, _p: &DiskPoint<N>) -> Option<Jacobian<N>> {
        None
    }

    fn second_derivatives(&self, _p: &DiskPoint<N>) -> Option<SecondDerivatives<N>> {
        None
    }
}

impl<const N: usize, T: OneFormField<N> + ?Sized> OneFormField<N> for &T {
    fn components(&self, p: &DiskPoint<N>) -> Covector<N> {
        (**self).components(p)
    }
    fn jacobian(&self, p: &DiskPoint<N>) -> Option<Jacobian<N>> {
        (**self).jacobian(p)
    }
    fn second_derivatives(&self, p: &DiskPoint<N>) -> Option<SecondDerivatives<N>> {
        (**self).second_derivatives(p)
    }
}

/// A one-form given only by a component closure; derivatives are numerical.
pub struct FnForm<F>(pub F);

impl<const N: usize, F: Fn(&[f64; N]) -> [f64; N]> OneFormField<N> for FnForm<F> {
    fn components(&self, p: &DiskPoint<N>) -> Covector<N> {
        (self.0)(p.coords())
    }
}

/// The zero one-form.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroForm;

impl<const N: usize> OneFormField<N> for ZeroForm {
    fn components(&self, _p: &DiskPoint<N>) -> Covector<N> {
        [0.0; N]
    }
    fn jacobian(&self, _p: &DiskPoint<N>) -> Option<Jacobian<N>> {
        Some([[0.0; N]; N])
    }
    fn second_derivatives(&self, _p: &DiskPoint<N>) -> Option<SecondDerivatives<N>> {
        Some([[[0.0; N]; N]; N])
    }
}

/// A vector field on the ball.
pub trait VectorField<const N: usize> {
    fn at(&self, p: &DiskPoint<N>) -> Vector<N>;
}

impl<const N: usize, F: Fn(&DiskPoint<N>) -> Vector<N>> VectorField<N> for F {
    fn at(&self, p: &DiskPoint<N>) -> Vector<N> {
        self(p)
    }
}

/// The vector field `α^♯` dual to a one-form.
pub struct Sharp<A>(pub A);

impl<const N: usize, A: OneFormField<N>> VectorField<N> for Sharp<A> {
    fn at(&self, p: &DiskPoint<N>) -> Vector<N> {
        sharp(&self.0.components(p), p)
    }
}

/// Central finite differences with a step that shrinks towards the rim:
/// the effective step at `p` is `step * (1 - |p|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteDifference {
    pub step: f64,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        FiniteDifference { step: 1e-4 }
    }
}

impl FiniteDifference {
    pub fn effective_step<const N: usize>(&self, p: &DiskPoint<N>) -> f64 {
        self.step * (1.0 - p.norm())
    }

    fn checked_step<const N: usize>(&self, p: &DiskPoint<N>, reach: usize) -> Result<f64> {
        let h = self.effective_step(p);
        let radius = p.norm();
        let span = h * (reach as f64) * libm::sqrt(N as f64);
        if !(h > 0.0) || radius + span >= 1.0 {
            return Err(Error::StencilOutsideBall { radius, reach: span });
        }
        Ok(h)
    }

    /// `J[i][j] ≈ ∂_i α_j` by central differences of the components.
    pub fn jacobian<const N: usize>(&self, field: &impl OneFormField<N>, p: &DiskPoint<N>) -> Result<Jacobian<N>> {
        let h = self.checked_step(p, 1)?;
        let mut jac = [[0.0; N]; N];
        for (i, row) in jac.iter_mut().enumerate() {
            let plus = field.components(&p.offset(i, h));
            let minus = field.components(&p.offset(i, -h));
            for j in 0..N {
                row[j] = (plus[j] - minus[j]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    /// `S[k][i][j] ≈ ∂_k ∂_i α_j`; differences the analytic Jacobian when the
    /// field has one, the components otherwise.
    pub fn second_derivatives<const N: usize>(
        &self,
        field: &impl OneFormField<N>,
        p: &DiskPoint<N>,
    ) -> Result<SecondDerivatives<N>> {
        let mut out = [[[0.0; N]; N]; N];
        if field.jacobian(p).is_some() {
            let h = self.checked_step(p, 1)?;
            for (k, slab) in out.iter_mut().enumerate() {
                let plus = field.jacobian(&p.offset(k, h)).unwrap_or([[0.0; N]; N]);
                let minus = field.jacobian(&p.offset(k, -h)).unwrap_or([[0.0; N]; N]);
                for i in 0..N {
                    for j in 0..N {
                        slab[i][j] = (plus[i][j] - minus[i][j]) / (2.0 * h);
                    }
                }
            }
            return Ok(out);
        }
        let h = self.checked_step(p, 2)?;
        let centre = field.components(p);
        for k in 0..N {
            for i in 0..N {
                let d = if k == i {
                    let a = field.components(&p.offset(k, h));
                    let b = field.components(&p.offset(k, -h));
                    let mut d = [0.0; N];
                    for j in 0..N {
                        d[j] = (a[j] - 2.0 * centre[j] + b[j]) / (h * h);
                    }
                    d
                } else {
                    let pp = field.components(&p.offset(k, h).offset(i, h));
                    let pm = field.components(&p.offset(k, h).offset(i, -h));
                    let mp = field.components(&p.offset(k, -h).offset(i, h));
                    let mm = field.components(&p.offset(k, -h).offset(i, -h));
                    let mut d = [0.0; N];
                    for j in 0..N {
                        d[j] = (pp[j] - pm[j] - mp[j] + mm[j]) / (4.0 * h * h);
                    }
                    d
                };
                out[k][i] = d;
            }
        }
        Ok(out)
    }
}

fn resolve_jacobian<const N: usize>(field: &impl OneFormField<N>, p: &DiskPoint<N>) -> Result<Jacobian<N>> {
    match field.jacobian(p) {
        Some(j) => Ok(j),
        None => FiniteDifference::default().jacobian(field, p),
    }
}

fn resolve_second<const N: usize>(field: &impl OneFormField<N>, p: &DiskPoint<N>) -> Result<SecondDerivatives<N>> {
    match field.second_derivatives(p) {
        Some(s) => Ok(s),
        None => FiniteDifference::default().second_derivatives(field, p),
    }
}

/// Covariant derivative matrix `∇_i α_j = ∂_i α_j - Γ^k_{ij} α_k`.
pub fn covariant_jacobian<const N: usize>(alpha: &Covector<N>, jac: &Jacobian<N>, p: &DiskPoint<N>) -> Jacobian<N> {
    let gamma = christoffel(p);
    let mut out = *jac;
    for i in 0..N {
        for j in 0..N {
            let mut s = 0.0;
            for k in 0..N {
                s += gamma[k][i][j] * alpha[k];
            }
            out[i][j] -= s;
        }
    }
    out
}

/// `(∇_v α)_j = v^i (∂_i α_j - Γ^k_{ij} α_k)`.
pub fn covariant_derivative_1form<const N: usize>(
    alpha: &impl OneFormField<N>,
    v: &impl VectorField<N>,
    p: &DiskPoint<N>,
) -> Result<Covector<N>> {
    let vp = v.at(p);
    if vp.iter().all(|c| *c == 0.0) {
        return Ok([0.0; N]);
    }
    let a = alpha.components(p);
    let jac = resolve_jacobian(alpha, p)?;
    let nab = covariant_jacobian(&a, &jac, p);
    let mut out = [0.0; N];
    for (j, o) in out.iter_mut().enumerate() {
        *o = (0..N).map(|i| vp[i] * nab[i][j]).sum();
    }
    Ok(out)
}

/// `δα = -λ⁻ᴺ ∂_i(λ^{N-2} α_i) = -λ⁻² (∂_i α_i + (N-2) u·α)`.
pub fn codifferential_1form<const N: usize>(alpha: &impl OneFormField<N>, p: &DiskPoint<N>) -> Result<f64> {
    let jac = resolve_jacobian(alpha, p)?;
    let m = MetricData::at(p);
    let mut s: f64 = (0..N).map(|i| jac[i][i]).sum();
    if N != 2 {
        let a = alpha.components(p);
        let ua: f64 = (0..N).map(|i| m.log_grad[i] * a[i]).sum();
        s += (N as f64 - 2.0) * ua;
    }
    Ok(-m.inv_lambda_sq() * s)
}

/// Hodge-de Rham Laplacian `(dδ + δd) α`.
pub fn hodge_laplacian_1form<const N: usize>(alpha: &impl OneFormField<N>, p: &DiskPoint<N>) -> Result<Covector<N>> {
    let a = alpha.components(p);
    let jac = resolve_jacobian(alpha, p)?;
    let sec = resolve_second(alpha, p)?;
    let m = MetricData::at(p);
    let u = m.log_grad;
    let il2 = m.inv_lambda_sq();
    let shift = N as f64 - 2.0;

    // dδα: derivative of -λ⁻² (div α + (N-2) u·α).
    let div: f64 = (0..N).map(|i| jac[i][i]).sum();
    let ua: f64 = (0..N).map(|i| u[i] * a[i]).sum();
    let inner = div + shift * ua;
    let mut out = [0.0; N];
    for (j, o) in out.iter_mut().enumerate() {
        let d_div: f64 = (0..N).map(|i| sec[j][i][i]).sum();
        // ∂_j u_i = λ δ_ij + u_i u_j
        let d_ua: f64 = (0..N)
            .map(|i| {
                let du = if i == j { m.lambda } else { 0.0 } + u[i] * u[j];
                du * a[i] + u[i] * jac[j][i]
            })
            .sum();
        *o = 2.0 * il2 * u[j] * inner - il2 * (d_div + shift * d_ua);
    }

    // δdα: -λ⁻² Σ_i ((N-4) u_i β_ij + ∂_i β_ij), β_ij = ∂_i α_j - ∂_j α_i.
    let weight = N as f64 - 4.0;
    for (j, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..N {
            let beta = jac[i][j] - jac[j][i];
            let dbeta = sec[i][i][j] - sec[i][j][i];
            s += weight * u[i] * beta + dbeta;
        }
        *o -= il2 * s;
    }
    Ok(out)
}

/// `L_{α^♯} α = d(α(α^♯)) = d(λ⁻² |α|²_e)` for a closed one-form.
///
/// Closedness is the caller's responsibility; it is what removes the
/// `ι_v dα` term of Cartan's formula.
pub fn lie_derivative_closed_1form<const N: usize>(
    alpha: &impl OneFormField<N>,
    p: &DiskPoint<N>,
) -> Result<Covector<N>> {
    let a = alpha.components(p);
    let jac = resolve_jacobian(alpha, p)?;
    let m = MetricData::at(p);
    let il2 = m.inv_lambda_sq();
    let sq: f64 = a.iter().map(|x| x * x).sum();
    let mut out = [0.0; N];
    for (j, o) in out.iter_mut().enumerate() {
        let d_sq: f64 = (0..N).map(|i| 2.0 * a[i] * jac[j][i]).sum();
        *o = il2 * (d_sq - 2.0 * m.log_grad[j] * sq);
    }
    Ok(out)
}

/// Deformation tensor of `v = α^♯` with lowered indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deformation<const N: usize> {
    /// `D_ij = ½(∇_i α_j + ∇_j α_i)`.
    pub matrix: [[f64; N]; N],
    /// `|Def v|²_h = λ⁻⁴ Σ D_ij²`.
    pub norm_sq_h: f64,
    /// `λ⁻² Σ D_ii`, which equals `-δα`.
    pub metric_trace: f64,
}

pub fn deformation_tensor<const N: usize>(alpha: &impl OneFormField<N>, p: &DiskPoint<N>) -> Result<Deformation<N>> {
    let a = alpha.components(p);
    let jac = resolve_jacobian(alpha, p)?;
    let nab = covariant_jacobian(&a, &jac, p);
    let il2 = MetricData::at(p).inv_lambda_sq();
    let mut d = [[0.0; N]; N];
    let mut sq = 0.0;
    let mut tr = 0.0;
    for i in 0..N {
        for j in 0..N {
            d[i][j] = 0.5 * (nab[i][j] + nab[j][i]);
            sq += d[i][j] * d[i][j];
        }
        tr += d[i][i];
    }
    Ok(Deformation { matrix: d, norm_sq_h: il2 * il2 * sq, metric_trace: il2 * tr })
}
