use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-polar grid on the annulus `B_a \ B_b`.
///
/// Nodes are uniform in `s = log r` on `[log b, log a]` (both endpoints
/// included) and uniform in `theta` on `[0, 2*pi)` with periodic wrap.
/// Storage everywhere is row-major with `s` outer and `theta` inner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub b: f64,
    pub a: f64,
    pub n_s: usize,
    pub n_theta: usize,
}

/// Builds a grid, validating the annulus and the resolution limits.
pub fn make_grid(b: f64, a: f64, n_s: usize, n_theta: usize) -> Result<GridSpec> {
    if !(b > 0.0 && a > b) || !b.is_finite() || !a.is_finite() {
        return Err(Error::InvalidDomain { b, a });
    }
    if n_s < 8 || n_theta < 8 || n_theta % 2 != 0 {
        return Err(Error::InvalidResolution { n_s, n_theta });
    }
    Ok(GridSpec { b, a, n_s, n_theta })
}

impl GridSpec {
    pub fn s_min(&self) -> f64 {
        self.b.ln()
    }

    pub fn s_max(&self) -> f64 {
        self.a.ln()
    }

    /// Uniform spacing in `s`.
    pub fn ds(&self) -> f64 {
        (self.s_max() - self.s_min()) / (self.n_s - 1) as f64
    }

    /// Uniform spacing in `theta`.
    pub fn dtheta(&self) -> f64 {
        std::f64::consts::TAU / self.n_theta as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s_min() + i as f64 * self.ds()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn r(&self, i: usize) -> f64 {
        self.s(i).exp()
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.n_s * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of node `(i, j)`; `j` may be any integer mod `n_theta`.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j % self.n_theta
    }

    /// Default verification tolerance for this resolution.
    ///
    /// Second-order stencils with a safety factor of 50; individual checks
    /// may override it.
    pub fn tau(&self) -> f64 {
        let ds = self.ds();
        let dt = self.dtheta();
        50.0 * (ds * ds + dt * dt)
    }

    /// Ratio of the two radii, the only scale the estimates depend on.
    pub fn radius_ratio(&self) -> f64 {
        self.a / self.b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spacing_matches_definition() {
        let g = make_grid(1.0, 2.0, 64, 128).unwrap();
        assert_relative_eq!(g.ds(), 2.0_f64.ln() / 63.0, max_relative = 1e-15);
        assert_relative_eq!(g.dtheta(), std::f64::consts::TAU / 128.0, max_relative = 1e-15);
    }

    #[test]
    fn catenoid_grid_is_symmetric_in_s() {
        let g = make_grid((-0.5_f64).exp(), 0.5_f64.exp(), 128, 256).unwrap();
        assert_relative_eq!(g.s_min(), -0.5, max_relative = 1e-14);
        assert_relative_eq!(g.s_max(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(g.s(64) + g.s(63), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_domains_and_resolutions() {
        assert!(matches!(make_grid(2.0, 1.0, 64, 128), Err(Error::InvalidDomain { .. })));
        assert!(matches!(make_grid(0.0, 1.0, 64, 128), Err(Error::InvalidDomain { .. })));
        assert!(matches!(make_grid(1.0, 2.0, 4, 128), Err(Error::InvalidResolution { .. })));
        assert!(matches!(make_grid(1.0, 2.0, 64, 127), Err(Error::InvalidResolution { .. })));
    }

    #[test]
    fn node_coordinates_are_reproducible() {
        let g = make_grid(1.0, 2.0, 64, 128).unwrap();
        let h = make_grid(1.0, 2.0, 64, 128).unwrap();
        for i in 0..g.n_s {
            assert_eq!(g.r(i).to_bits(), h.r(i).to_bits());
        }
    }
}
