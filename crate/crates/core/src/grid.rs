//! Polar sampling grids used for pointwise verification.

use crate::geometry::DiskPoint;

/// `radial × angular` points with radii `r_max·i/radial` (`i = 1..=radial`)
/// and equispaced angles `2πj/angular`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
    pub r_max: f64,
}

impl PolarGrid {
    /// # Panics
    ///
    /// If `r_max` is not in `(0, 1)`.
    pub fn new(radial: usize, angular: usize, r_max: f64) -> Self {
        assert!(r_max > 0.0 && r_max < 1.0, "grid radius must lie in (0, 1)");
        PolarGrid { radial, angular, r_max }
    }

    pub fn len(&self) -> usize {
        self.radial * self.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = DiskPoint<2>> + '_ {
        (1..=self.radial).flat_map(move |i| {
            let r = self.r_max * i as f64 / self.radial as f64;
            (0..self.angular).map(move |j| {
                let t = core::f64::consts::TAU * j as f64 / self.angular as f64;
                DiskPoint::polar(r, t).expect("grid radius below one")
            })
        })
    }
}
