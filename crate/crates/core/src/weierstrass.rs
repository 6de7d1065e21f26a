//! Weierstrass-Enneper generator: minimal immersions of the annulus from
//! Laurent data `(g, dh)`, with period and pole screening.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{AmbientField, ScalarField};
use crate::grid::GridSpec;
use crate::surface::Immersion;

/// Laurent data for a minimal immersion: Gauss map `g` and height
/// differential `dh = h'(z) dz`, both as Laurent coefficient lists
/// `(exponent, coefficient)`.
#[derive(Clone, Debug)]
pub struct WeierstrassData {
    pub g_coeffs: Vec<(i64, Complex64)>,
    pub dh_coeffs: Vec<(i64, Complex64)>,
    pub scale: f64,
}

impl WeierstrassData {
    /// `g = z, dh = dz/z`: the catenoid.
    pub fn catenoid() -> Self {
        Self {
            g_coeffs: vec![(1, Complex64::new(1.0, 0.0))],
            dh_coeffs: vec![(-1, Complex64::new(1.0, 0.0))],
            scale: 1.0,
        }
    }

    /// `g = z, dh = i dz/z`: the helicoid, multivalued on the annulus.
    pub fn helicoid() -> Self {
        Self {
            g_coeffs: vec![(1, Complex64::new(1.0, 0.0))],
            dh_coeffs: vec![(-1, Complex64::new(0.0, 1.0))],
            scale: 1.0,
        }
    }

    /// `g = z, dh = z dz`: an Enneper-type annulus.
    pub fn enneper() -> Self {
        Self {
            g_coeffs: vec![(1, Complex64::new(1.0, 0.0))],
            dh_coeffs: vec![(1, Complex64::new(1.0, 0.0))],
            scale: 1.0,
        }
    }
}

fn eval_laurent(coeffs: &[(i64, Complex64)], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .map(|&(k, c)| c * z.powi(k as i32))
        .sum()
}

/// The three Weierstrass integrands `(phi_1, phi_2, phi_3)(z)`.
fn integrand(data: &WeierstrassData, z: Complex64) -> [Complex64; 3] {
    let g = eval_laurent(&data.g_coeffs, z);
    let hp = eval_laurent(&data.dh_coeffs, z);
    let ginv = 1.0 / g;
    [
        0.5 * (ginv - g) * hp,
        Complex64::new(0.0, 0.5) * (ginv + g) * hp,
        hp,
    ]
}

/// Order in which the grid path walks from the base node `(s_min, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrationPath {
    /// Up the `theta = 0` ray first, then around each circle.
    RayFirst,
    /// Around the inner circle first, then up each ray.
    ArcFirst,
}

const PERIOD_TOL: f64 = 1e-6;

fn check_poles(data: &WeierstrassData, grid: GridSpec) -> Result<()> {
    // sample |g| on a refined grid, including both boundary circles; a zero
    // or pole between samples shows up as |g| below the sample spacing
    let n_s = 4 * grid.n_s;
    let n_t = 4 * grid.n_theta;
    let ds = (grid.s_max() - grid.s_min()) / (n_s - 1) as f64;
    let dt = std::f64::consts::TAU / n_t as f64;
    let floor = (ds * ds + dt * dt).sqrt().max(1e-8);
    let mut min_abs = f64::INFINITY;
    for i in 0..n_s {
        let s = grid.s_min() + ds * i as f64;
        let r = s.exp();
        for j in 0..n_t {
            let t = dt * j as f64;
            let z = Complex64::from_polar(r, t);
            min_abs = min_abs.min(eval_laurent(&data.g_coeffs, z).norm());
        }
    }
    if min_abs < floor {
        return Err(Error::PoleOnAnnulus { min_abs_g: min_abs });
    }
    Ok(())
}

fn check_periods(data: &WeierstrassData, grid: GridSpec) -> Result<()> {
    // loop integral around the core circle, rectangle rule (spectrally
    // accurate for the analytic integrand); oversample in theta
    let n_t = 4 * grid.n_theta;
    let dt = std::f64::consts::TAU / n_t as f64;
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for j in 0..n_t {
        let t = dt * j as f64;
        let z = Complex64::from_polar(grid.b, t);
        let dz = Complex64::i() * z * dt;
        let phi = integrand(data, z);
        for c in 0..3 {
            acc[c] += phi[c] * dz;
        }
    }
    let periods = [acc[0].re, acc[1].re, acc[2].re];
    if periods.iter().any(|p| p.abs() > PERIOD_TOL) {
        return Err(Error::NonvanishingRealPeriod { periods });
    }
    Ok(())
}

/// Generates the immersion along the default ray-then-arc path.
pub fn weierstrass_generate(data: &WeierstrassData, grid: GridSpec) -> Result<Immersion> {
    weierstrass_generate_along(data, grid, IntegrationPath::RayFirst)
}

/// Generates the immersion, choosing the grid path explicitly (the two
/// homotopic paths agree to quadrature error; exposed for that check).
pub fn weierstrass_generate_along(
    data: &WeierstrassData,
    grid: GridSpec,
    path: IntegrationPath,
) -> Result<Immersion> {
    check_poles(data, grid)?;
    check_periods(data, grid)?;

    let node_z = |i: usize, j: usize| Complex64::from_polar(grid.r(i), grid.theta(j));
    let mut acc = vec![[Complex64::new(0.0, 0.0); 3]; grid.len()];
    let ds = grid.ds();
    let dt = grid.dtheta();

    // trapezoid step of the line integral between two nodes
    let step = |z0: Complex64, z1: Complex64, dz0: Complex64, dz1: Complex64| {
        let p0 = integrand(data, z0);
        let p1 = integrand(data, z1);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for c in 0..3 {
            out[c] = 0.5 * (p0[c] * dz0 + p1[c] * dz1);
        }
        out
    };
    let add = |a: &mut [Complex64; 3], b: [Complex64; 3]| {
        for c in 0..3 {
            a[c] += b[c];
        }
    };

    let ray_step = |i: usize, j: usize| {
        // dz = z ds along a ray
        let (z0, z1) = (node_z(i - 1, j), node_z(i, j));
        step(z0, z1, z0 * ds, z1 * ds)
    };
    let arc_step = |i: usize, j: usize| {
        // dz = i z dtheta along an arc
        let (z0, z1) = (node_z(i, j - 1), node_z(i, j));
        step(z0, z1, Complex64::i() * z0 * dt, Complex64::i() * z1 * dt)
    };

    match path {
        IntegrationPath::RayFirst => {
            for i in 1..grid.n_s {
                let prev = acc[grid.idx(i - 1, 0)];
                let mut cur = prev;
                add(&mut cur, ray_step(i, 0));
                acc[grid.idx(i, 0)] = cur;
            }
            for i in 0..grid.n_s {
                for j in 1..grid.n_theta {
                    let mut cur = acc[grid.idx(i, j - 1)];
                    add(&mut cur, arc_step(i, j));
                    acc[grid.idx(i, j)] = cur;
                }
            }
        }
        IntegrationPath::ArcFirst => {
            for j in 1..grid.n_theta {
                let mut cur = acc[grid.idx(0, j - 1)];
                add(&mut cur, arc_step(0, j));
                acc[grid.idx(0, j)] = cur;
            }
            for j in 0..grid.n_theta {
                for i in 1..grid.n_s {
                    let mut cur = acc[grid.idx(i - 1, j)];
                    add(&mut cur, ray_step(i, j));
                    acc[grid.idx(i, j)] = cur;
                }
            }
        }
    }

    let mut f = AmbientField::zeros(grid, 3);
    for (n, a) in acc.iter().enumerate() {
        for c in 0..3 {
            f.values[n * 3 + c] = data.scale * a[c].re;
        }
    }
    // analytic conformal factor: e^u = scale * (|g| + 1/|g|)/2 * |h'|
    let u = ScalarField::from_fn(grid, |s, t| {
        let z = Complex64::from_polar(s.exp(), t);
        let ag = eval_laurent(&data.g_coeffs, z).norm();
        let ahp = eval_laurent(&data.dh_coeffs, z).norm();
        (data.scale * 0.5 * (ag + 1.0 / ag) * ahp).ln()
    });
    Ok(Immersion { grid, dim: 3, f, u, theta_jump: None, name: "weierstrass".into() })
}
