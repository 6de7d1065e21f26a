//! Discrete differential operators on the log-polar grid.
//!
//! All stencils are second order: centered three-point differences in the
//! interior, one-sided three/four-point stencils on the two boundary rows,
//! periodic wrap in `theta`. Radial derivatives come from `d_r = e^{-s} d_s`.

use crate::error::{Error, Result};
use crate::field::{AmbientField, OneForm, ScalarField};
use crate::grid::GridSpec;

fn diff_s_raw(values: &[f64], grid: GridSpec, dim: usize) -> Vec<f64> {
    let (ns, nt) = (grid.n_s, grid.n_theta);
    let ds = grid.ds();
    let mut out = vec![0.0; values.len()];
    let node = |i: usize, j: usize, c: usize| values[(i * nt + j) * dim + c];
    for j in 0..nt {
        for c in 0..dim {
            out[j * dim + c] =
                (-3.0 * node(0, j, c) + 4.0 * node(1, j, c) - node(2, j, c)) / (2.0 * ds);
            out[((ns - 1) * nt + j) * dim + c] = (3.0 * node(ns - 1, j, c)
                - 4.0 * node(ns - 2, j, c)
                + node(ns - 3, j, c))
                / (2.0 * ds);
            for i in 1..ns - 1 {
                out[(i * nt + j) * dim + c] = (node(i + 1, j, c) - node(i - 1, j, c)) / (2.0 * ds);
            }
        }
    }
    out
}

fn diff_ss_raw(values: &[f64], grid: GridSpec, dim: usize) -> Vec<f64> {
    let (ns, nt) = (grid.n_s, grid.n_theta);
    let ds2 = grid.ds() * grid.ds();
    let mut out = vec![0.0; values.len()];
    let node = |i: usize, j: usize, c: usize| values[(i * nt + j) * dim + c];
    for j in 0..nt {
        for c in 0..dim {
            out[j * dim + c] = (2.0 * node(0, j, c) - 5.0 * node(1, j, c) + 4.0 * node(2, j, c)
                - node(3, j, c))
                / ds2;
            out[((ns - 1) * nt + j) * dim + c] = (2.0 * node(ns - 1, j, c)
                - 5.0 * node(ns - 2, j, c)
                + 4.0 * node(ns - 3, j, c)
                - node(ns - 4, j, c))
                / ds2;
            for i in 1..ns - 1 {
                out[(i * nt + j) * dim + c] =
                    (node(i + 1, j, c) - 2.0 * node(i, j, c) + node(i - 1, j, c)) / ds2;
            }
        }
    }
    out
}

/// `jump[c]` is the increment of component `c` across a full turn:
/// `f(s, theta + 2*pi) = f(s, theta) + jump`. Used for immersions that are
/// single-valued only up to a deck transformation (the flat strip covering).
fn diff_theta_raw(values: &[f64], grid: GridSpec, dim: usize, jump: Option<&[f64]>) -> Vec<f64> {
    let (ns, nt) = (grid.n_s, grid.n_theta);
    let dt = grid.dtheta();
    let mut out = vec![0.0; values.len()];
    let node = |i: usize, j: usize, c: usize| values[(i * nt + j) * dim + c];
    let jump_at = |c: usize| jump.map_or(0.0, |v| v[c]);
    for i in 0..ns {
        for j in 0..nt {
            let (jm, jp) = ((j + nt - 1) % nt, (j + 1) % nt);
            for c in 0..dim {
                let mut prev = node(i, jm, c);
                let mut next = node(i, jp, c);
                if j == 0 {
                    prev -= jump_at(c);
                }
                if j == nt - 1 {
                    next += jump_at(c);
                }
                out[(i * nt + j) * dim + c] = (next - prev) / (2.0 * dt);
            }
        }
    }
    out
}

fn diff_thetatheta_raw(values: &[f64], grid: GridSpec, dim: usize, jump: Option<&[f64]>) -> Vec<f64> {
    let (ns, nt) = (grid.n_s, grid.n_theta);
    let dt2 = grid.dtheta() * grid.dtheta();
    let mut out = vec![0.0; values.len()];
    let node = |i: usize, j: usize, c: usize| values[(i * nt + j) * dim + c];
    let jump_at = |c: usize| jump.map_or(0.0, |v| v[c]);
    for i in 0..ns {
        for j in 0..nt {
            let (jm, jp) = ((j + nt - 1) % nt, (j + 1) % nt);
            for c in 0..dim {
                let mut prev = node(i, jm, c);
                let mut next = node(i, jp, c);
                if j == 0 {
                    prev -= jump_at(c);
                }
                if j == nt - 1 {
                    next += jump_at(c);
                }
                out[(i * nt + j) * dim + c] = (next - 2.0 * node(i, j, c) + prev) / dt2;
            }
        }
    }
    out
}

/// Multiplies each s-row by `e^{c * s}` in place.
fn scale_rows(values: &mut [f64], grid: GridSpec, dim: usize, c: f64) {
    for i in 0..grid.n_s {
        let factor = (c * grid.s(i)).exp();
        for v in &mut values[i * grid.n_theta * dim..(i + 1) * grid.n_theta * dim] {
            *v *= factor;
        }
    }
}

pub fn d_s(field: &ScalarField) -> ScalarField {
    ScalarField { grid: field.grid, values: diff_s_raw(&field.values, field.grid, 1) }
}

pub fn d_theta(field: &ScalarField) -> ScalarField {
    ScalarField { grid: field.grid, values: diff_theta_raw(&field.values, field.grid, 1, None) }
}

/// `d_r = e^{-s} d_s`.
pub fn d_r(field: &ScalarField) -> ScalarField {
    let mut values = diff_s_raw(&field.values, field.grid, 1);
    scale_rows(&mut values, field.grid, 1, -1.0);
    ScalarField { grid: field.grid, values }
}

pub fn d_s_ambient(field: &AmbientField) -> AmbientField {
    AmbientField {
        grid: field.grid,
        dim: field.dim,
        values: diff_s_raw(&field.values, field.grid, field.dim),
    }
}

pub fn d_theta_ambient(field: &AmbientField, jump: Option<&[f64]>) -> AmbientField {
    AmbientField {
        grid: field.grid,
        dim: field.dim,
        values: diff_theta_raw(&field.values, field.grid, field.dim, jump),
    }
}

pub fn d_r_ambient(field: &AmbientField) -> AmbientField {
    let mut values = diff_s_raw(&field.values, field.grid, field.dim);
    scale_rows(&mut values, field.grid, field.dim, -1.0);
    AmbientField { grid: field.grid, dim: field.dim, values }
}

/// Euclidean Laplacian, `e^{-2s} (d_ss + d_thetatheta)` on the cylinder chart.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let g = field.grid;
    let ss = diff_ss_raw(&field.values, g, 1);
    let tt = diff_thetatheta_raw(&field.values, g, 1, None);
    let mut values: Vec<f64> = ss.iter().zip(&tt).map(|(&x, &y)| x + y).collect();
    scale_rows(&mut values, g, 1, -2.0);
    ScalarField { grid: g, values }
}

/// Componentwise Euclidean Laplacian of an ambient field.
pub fn laplacian_ambient(field: &AmbientField, jump: Option<&[f64]>) -> AmbientField {
    let g = field.grid;
    let ss = diff_ss_raw(&field.values, g, field.dim);
    let tt = diff_thetatheta_raw(&field.values, g, field.dim, jump);
    let mut values: Vec<f64> = ss.iter().zip(&tt).map(|(&x, &y)| x + y).collect();
    scale_rows(&mut values, g, field.dim, -2.0);
    AmbientField { grid: g, dim: field.dim, values }
}

/// Hodge star with the convention forced by the canonical-frame law:
/// `star dtheta = r^{-1} dr` and `star dr = -r dtheta`, so `star star = -id`.
pub fn hodge_star(omega: &OneForm) -> OneForm {
    let g = omega.grid();
    let mut w_r = ScalarField::zeros(g);
    let mut w_theta = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let r = g.r(i);
        for j in 0..g.n_theta {
            *w_r.at_mut(i, j) = omega.w_theta.at(i, j) / r;
            *w_theta.at_mut(i, j) = -r * omega.w_r.at(i, j);
        }
    }
    OneForm { w_r, w_theta }
}

/// Coefficient `g` of `d omega = g dr ^ dtheta`.
pub fn exterior_derivative(omega: &OneForm) -> ScalarField {
    let dwt_dr = d_r(&omega.w_theta);
    let dwr_dt = d_theta(&omega.w_r);
    dwt_dr.zip(&dwr_dt, |x, y| x - y).expect("same grid")
}

/// Differential of a scalar field as a 1-form, `du = u_r dr + u_theta dtheta`.
pub fn differential(field: &ScalarField) -> OneForm {
    OneForm { w_r: d_r(field), w_theta: d_theta(field) }
}

/// Divergence of the vector field metrically dual to `p dr + q dtheta`:
/// `r^{-1} d_r(r p) + r^{-2} d_theta q`.
pub fn divergence(omega: &OneForm) -> ScalarField {
    let g = omega.grid();
    // r * p as a scalar field
    let mut rp = omega.w_r.clone();
    scale_rows(&mut rp.values, g, 1, 1.0);
    let mut term1 = d_r(&rp);
    scale_rows(&mut term1.values, g, 1, -1.0);
    let mut term2 = d_theta(&omega.w_theta);
    scale_rows(&mut term2.values, g, 1, -2.0);
    term1.zip(&term2, |x, y| x + y).expect("same grid")
}

/// Area integral with `dx = e^{2s} ds dtheta`: trapezoid in `s`, rectangle
/// (spectrally accurate) in the periodic `theta` direction.
pub fn integrate_area(field: &ScalarField) -> f64 {
    let g = field.grid;
    let (ds, dt) = (g.ds(), g.dtheta());
    let mut total = 0.0;
    for i in 0..g.n_s {
        let w = if i == 0 || i == g.n_s - 1 { 0.5 } else { 1.0 };
        let jac = (2.0 * g.s(i)).exp();
        let row: f64 = (0..g.n_theta).map(|j| field.at(i, j)).sum();
        total += w * jac * row;
    }
    total * ds * dt
}

/// Integral of a 1-form pulled back to the circle at s-level `i`
/// (the `dr` coefficient drops out).
pub fn loop_integral(omega: &OneForm, i: usize) -> Result<f64> {
    let g = omega.grid();
    if i >= g.n_s {
        return Err(Error::LevelOutOfRange { index: i, max: g.n_s - 1 });
    }
    let sum: f64 = (0..g.n_theta).map(|j| omega.w_theta.at(i, j)).sum();
    Ok(sum * g.dtheta())
}

/// `int field dr` along the ray `theta = theta_j`, trapezoid in `s` with
/// `dr = e^s ds`.
pub fn ray_integral(field: &ScalarField, j: usize) -> Result<f64> {
    let g = field.grid;
    if j >= g.n_theta {
        return Err(Error::LevelOutOfRange { index: j, max: g.n_theta - 1 });
    }
    let ds = g.ds();
    let mut total = 0.0;
    for i in 0..g.n_s {
        let w = if i == 0 || i == g.n_s - 1 { 0.5 } else { 1.0 };
        total += w * field.at(i, j) * g.r(i);
    }
    Ok(total * ds)
}

/// Pointwise `|grad f|^2 = |d_r f|^2 + r^{-2} |d_theta f|^2`.
pub fn grad_norm_sq(field: &ScalarField) -> ScalarField {
    let fr = d_r(field);
    let ft = d_theta(field);
    let g = field.grid;
    let mut out = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let rinv2 = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            let a = fr.at(i, j);
            let b = ft.at(i, j);
            *out.at_mut(i, j) = a * a + rinv2 * b * b;
        }
    }
    out
}

/// Pointwise `|grad f|^2` summed over ambient components.
pub fn grad_norm_sq_ambient(field: &AmbientField, jump: Option<&[f64]>) -> ScalarField {
    let fr = d_r_ambient(field);
    let ft = d_theta_ambient(field, jump);
    let g = field.grid;
    let mut out = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let rinv2 = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            let a: f64 = fr.at(i, j).iter().map(|v| v * v).sum();
            let b: f64 = ft.at(i, j).iter().map(|v| v * v).sum();
            *out.at_mut(i, j) = a + rinv2 * b;
        }
    }
    out
}

/// `int |grad f|^2 dx` (the Dirichlet energy).
pub fn dirichlet_energy(field: &AmbientField) -> f64 {
    integrate_area(&grad_norm_sq_ambient(field, None))
}

/// `L^2(dx)` norm of a scalar field.
pub fn l2_norm(field: &ScalarField) -> f64 {
    integrate_area(&field.map(|v| v * v)).max(0.0).sqrt()
}
