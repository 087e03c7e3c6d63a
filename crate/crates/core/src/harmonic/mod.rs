//! Harmonic extension of boundary data into the unit disk and ball.
//!
//! In two dimensions the extension of a truncated Fourier series is the real
//! part of a polynomial `F(z) = a₀/2 + Σ c_k z^k` with `c_k = a_k - i b_k`, so
//! the potential and all of its derivatives are available in closed form.
//! Because the Laplacian is conformally covariant in two dimensions, the same
//! function is harmonic for the hyperbolic metric.
//!
//! The three-dimensional extension lives in [`ball`].

pub mod ball;

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Covector, DiskPoint, Jacobian, OneFormField, SecondDerivatives};
use crate::grid::PolarGrid;

pub use ball::{ball_extend_3d, BallJet, BallPotential3D, KernelRule, SphereFunction};

/// Fourier coefficients of `φ(θ) = a₀/2 + Σ_{k=1}^{N} a_k cos kθ + b_k sin kθ`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawBoundaryData"))]
pub struct BoundaryData {
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawBoundaryData {
    a0: f64,
    #[serde(default)]
    a: Vec<f64>,
    #[serde(default)]
    b: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawBoundaryData> for BoundaryData {
    type Error = Error;
    fn try_from(raw: RawBoundaryData) -> Result<Self> {
        BoundaryData::new(raw.a0, raw.a, raw.b)
    }
}

impl BoundaryData {
    /// Builds boundary data; `a` and `b` must have equal length and all
    /// coefficients must be finite. Trailing zero modes are kept.
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidInput("cosine and sine coefficient lists differ in length"));
        }
        if !a0.is_finite() || a.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "boundary coefficients" });
        }
        Ok(BoundaryData { a0, a, b })
    }

    /// Constant boundary value `c`.
    pub fn constant(c: f64) -> Self {
        BoundaryData { a0: 2.0 * c, a: Vec::new(), b: Vec::new() }
    }

    /// `a cos kθ + b sin kθ`.
    pub fn mode(k: usize, a: f64, b: f64) -> Self {
        let mut d = BoundaryData { a0: 0.0, a: alloc::vec![0.0; k], b: alloc::vec![0.0; k] };
        if k == 0 {
            d.a0 = 2.0 * a;
        } else {
            d.a[k - 1] = a;
            d.b[k - 1] = b;
        }
        d
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Cosine coefficients `a_1..a_N`.
    pub fn cos_coeffs(&self) -> &[f64] {
        &self.a
    }

    /// Sine coefficients `b_1..b_N`.
    pub fn sin_coeffs(&self) -> &[f64] {
        &self.b
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.a.len()
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.a.iter().zip(&self.b).enumerate().map(|(i, (a, b))| ((i + 1) as f64, *a, *b))
    }

    /// `φ(θ)`.
    pub fn eval(&self, theta: f64) -> f64 {
        0.5 * self.a0 + self.modes().map(|(k, a, b)| a * libm::cos(k * theta) + b * libm::sin(k * theta)).sum::<f64>()
    }

    /// `Σ k^{1+s} (|a_k| + |b_k|)`, a finite stand-in for the `C^{1+s}` norm.
    pub fn smoothness_proxy(&self, s: f64) -> f64 {
        self.modes().map(|(k, a, b)| libm::pow(k, 1.0 + s) * (a.abs() + b.abs())).sum()
    }

    /// `Σ k (|a_k| + |b_k|)`, an upper bound for `sup |dΦ|_e` on the disk.
    pub fn gradient_majorant(&self) -> f64 {
        self.modes().map(|(k, a, b)| k * (a.abs() + b.abs())).sum()
    }

    /// `s₁ d₁ + s₂ d₂`, padding the shorter series with zeros.
    pub fn combine(s1: f64, d1: &BoundaryData, s2: f64, d2: &BoundaryData) -> BoundaryData {
        let n = d1.order().max(d2.order());
        let pick = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        BoundaryData {
            a0: s1 * d1.a0 + s2 * d2.a0,
            a: (0..n).map(|i| s1 * pick(&d1.a, i) + s2 * pick(&d2.a, i)).collect(),
            b: (0..n).map(|i| s1 * pick(&d1.b, i) + s2 * pick(&d2.b, i)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> BoundaryData {
        BoundaryData::combine(s, self, 0.0, self)
    }
}

/// `Φ = Re F(z)` for a polynomial `F`, with closed-form derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicPotential {
    /// `coeffs[k]` multiplies `z^k`.
    coeffs: Vec<Complex64>,
}

/// `F`, `F'`, `F''`, `F'''` at one point.
#[derive(Clone, Copy, Debug)]
struct Taylor {
    f: Complex64,
    d1: Complex64,
    d2: Complex64,
    d3: Complex64,
}

/// Harmonic extension of truncated Fourier boundary data.
pub fn harmonic_extend(data: &BoundaryData) -> HarmonicPotential {
    let mut coeffs = Vec::with_capacity(data.order() + 1);
    coeffs.push(Complex64::new(0.5 * data.a0, 0.0));
    coeffs.extend(data.a.iter().zip(&data.b).map(|(a, b)| Complex64::new(*a, -*b)));
    HarmonicPotential { coeffs }
}

/// `π Σ k (a_k² + b_k²)`, the Dirichlet energy `∫_𝔻 |∇Φ|² dx`.
pub fn spectral_dirichlet_energy(data: &BoundaryData) -> f64 {
    core::f64::consts::PI * data.modes().map(|(k, a, b)| k * (a * a + b * b)).sum::<f64>()
}

/// Largest `|dΦ|_e` over the grid points.
pub fn gradient_sup_bound(pot: &HarmonicPotential, grid: &PolarGrid) -> f64 {
    grid.points()
        .map(|p| {
            let [gx, gy] = pot.gradient(&p);
            libm::sqrt(gx * gx + gy * gy)
        })
        .fold(0.0, f64::max)
}

impl HarmonicPotential {
    /// Complex coefficients `c_0 = a₀/2, c_k = a_k - i b_k`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Highest mode.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn taylor(&self, p: &DiskPoint<2>) -> Taylor {
        let [x, y] = *p.coords();
        let z = Complex64::new(x, y);
        let zero = Complex64::new(0.0, 0.0);
        let mut it = self.coeffs.iter().rev();
        let mut f = *it.next().unwrap_or(&zero);
        let (mut d1, mut d2, mut d3) = (zero, zero, zero);
        for c in it {
            d3 = d3 * z + d2;
            d2 = d2 * z + d1;
            d1 = d1 * z + f;
            f = f * z + c;
        }
        Taylor { f, d1, d2: d2 * 2.0, d3: d3 * 6.0 }
    }

    pub fn value(&self, p: &DiskPoint<2>) -> f64 {
        self.taylor(p).f.re
    }

    /// `(Φ_x, Φ_y) = (Re F', -Im F')`.
    pub fn gradient(&self, p: &DiskPoint<2>) -> [f64; 2] {
        let t = self.taylor(p);
        [t.d1.re, -t.d1.im]
    }

    /// Hessian `[[Φ_xx, Φ_xy], [Φ_xy, Φ_yy]]`.
    pub fn hessian(&self, p: &DiskPoint<2>) -> [[f64; 2]; 2] {
        let t = self.taylor(p);
        [[t.d2.re, -t.d2.im], [-t.d2.im, -t.d2.re]]
    }

    /// Third derivatives `T[k][i][j] = ∂_k ∂_i ∂_j Φ`.
    pub fn third_derivatives(&self, p: &DiskPoint<2>) -> [[[f64; 2]; 2]; 2] {
        let t = self.taylor(p).d3;
        let (xxx, xxy, xyy, yyy) = (t.re, -t.im, -t.re, t.im);
        [[[xxx, xxy], [xxy, xyy]], [[xxy, xyy], [xyy, yyy]]]
    }

    /// Euclidean Laplacian `Φ_xx + Φ_yy`, which is zero up to rounding.
    pub fn laplacian(&self, p: &DiskPoint<2>) -> f64 {
        let h = self.hessian(p);
        h[0][0] + h[1][1]
    }

    /// The exact one-form `dΦ`.
    pub fn differential(&self) -> Differential<'_> {
        Differential(self)
    }
}

/// `dΦ` as a one-form field with analytic derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Differential<'a>(pub &'a HarmonicPotential);

impl OneFormField<2> for Differential<'_> {
    fn components(&self, p: &DiskPoint<2>) -> Covector<2> {
        self.0.gradient(p)
    }

    fn jacobian(&self, p: &DiskPoint<2>) -> Option<Jacobian<2>> {
        Some(self.0.hessian(p))
    }

    fn second_derivatives(&self, p: &DiskPoint<2>) -> Option<SecondDerivatives<2>> {
        Some(self.0.third_derivatives(p))
    }
}
