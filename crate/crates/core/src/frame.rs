//! Moving frames on immersed annuli: the canonical semi-Coulomb frame,
//! gauge rotations with winding, connection form, frame energies, Coulomb
//! minimization, and gauge-angle reconstruction.

use serde::Serialize;

use crate::calculus::{
    d_r, d_r_ambient, d_theta, d_theta_ambient, differential, exterior_derivative, grad_norm_sq_ambient,
    hodge_star, integrate_area,
};
use crate::error::{Error, Result};
use crate::field::{AmbientField, OneForm, ScalarField};
use crate::pde::least_squares_potential;
use crate::surface::{conformal_data, tangent_frame_fields, Immersion};

/// Orthonormal tangent frame. `winding` records the homotopy class
/// relative to the canonical polar frame.
#[derive(Clone, Debug)]
pub struct Frame {
    pub e1: AmbientField,
    pub e2: AmbientField,
    pub winding: i64,
}

/// Rotation gauge: total angle applied is `theta + winding * theta_c`
/// (`theta_c` the coordinate angle), with `theta` single-valued.
#[derive(Clone, Debug)]
pub struct GaugeAngle {
    pub theta: ScalarField,
    pub winding: i64,
}

impl GaugeAngle {
    pub fn zero(grid: crate::grid::GridSpec) -> Self {
        Self { theta: ScalarField::zeros(grid), winding: 0 }
    }
}

/// Frame energies and derived coefficients.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrameMetrics {
    /// `int |grad e1|^2 + |grad e2|^2 dx`
    #[serde(rename = "E")]
    pub e: f64,
    /// `int |w_2^1|^2 dx`
    #[serde(rename = "F")]
    pub f: f64,
    /// `sqrt(theta_energy / E)`; NaN for zero-energy (constant) frames.
    pub beta: f64,
    /// `int |K(e1, e2)| dx`
    pub gamma: f64,
    /// `int (|d_theta e1|^2 + |d_theta e2|^2) r^{-2} dx`
    pub theta_energy: f64,
    pub winding: i64,
}

/// Worst orthonormality defect of a frame.
pub fn orthonormality_defect(frame: &Frame) -> f64 {
    let n1 = frame.e1.norm_sq();
    let n2 = frame.e2.norm_sq();
    let cross = frame.e1.dot(&frame.e2).expect("same grid");
    let mut worst = 0.0_f64;
    for k in 0..n1.values.len() {
        worst = worst
            .max((n1.values[k].sqrt() - 1.0).abs())
            .max((n2.values[k].sqrt() - 1.0).abs())
            .max(cross.values[k].abs());
    }
    worst
}

/// Canonical semi-Coulomb frame `(e^{-u} f_r, r^{-1} e^{-u} f_theta)`,
/// orthonormalized, in the reference winding class 0.
pub fn canonical_frame(imm: &Immersion) -> Result<Frame> {
    let (_, residual) = conformal_data(imm)?;
    let limit = 10.0 * imm.grid.tau();
    if residual > limit {
        return Err(Error::NotConformal { residual, limit });
    }
    let (e1, e2) = tangent_frame_fields(imm)?;
    Ok(Frame { e1, e2, winding: 0 })
}

/// Pointwise rotation of the frame by `gauge.theta + gauge.winding * theta_c`.
pub fn gauge_rotate(frame: &Frame, gauge: &GaugeAngle) -> Result<Frame> {
    let g = frame.e1.grid;
    if gauge.theta.grid != g {
        return Err(Error::GridMismatch);
    }
    let k = gauge.winding as f64;
    let mut cos_phi = ScalarField::zeros(g);
    let mut sin_phi = ScalarField::zeros(g);
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            let phi = gauge.theta.at(i, j) + k * g.theta(j);
            *cos_phi.at_mut(i, j) = phi.cos();
            *sin_phi.at_mut(i, j) = phi.sin();
        }
    }
    let neg_sin = sin_phi.scale(-1.0);
    let e1 = frame.e1.rotate_comb(&cos_phi, &frame.e2, &sin_phi)?;
    let e2 = frame.e1.rotate_comb(&neg_sin, &frame.e2, &cos_phi)?;
    Ok(Frame { e1, e2, winding: frame.winding + gauge.winding })
}

/// Connection 1-form `w_2^1 = <d e1, e2>`.
pub fn connection_form(frame: &Frame) -> Result<OneForm> {
    let e1_r = d_r_ambient(&frame.e1);
    let e1_t = d_theta_ambient(&frame.e1, None);
    OneForm::new(e1_r.dot(&frame.e2)?, e1_t.dot(&frame.e2)?)
}

/// Curvature pairing `K(e1, e2) = <d_x e1, d_y e2> - <d_y e1, d_x e2>`.
///
/// In polar coordinates the Cartesian assembly collapses to
/// `r^{-1}(<e1_r, e2_theta> - <e1_theta, e2_r>)`: the rotation by the
/// coordinate angle cancels exactly.
pub fn k_bilinear(e1: &AmbientField, e2: &AmbientField) -> Result<ScalarField> {
    if e1.grid != e2.grid || e1.dim != e2.dim {
        return Err(Error::GridMismatch);
    }
    let g = e1.grid;
    let e1_r = d_r_ambient(e1);
    let e1_t = d_theta_ambient(e1, None);
    let e2_r = d_r_ambient(e2);
    let e2_t = d_theta_ambient(e2, None);
    let a = e1_r.dot(&e2_t)?;
    let b = e1_t.dot(&e2_r)?;
    let mut out = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let rinv = (-g.s(i)).exp();
        for j in 0..g.n_theta {
            *out.at_mut(i, j) = rinv * (a.at(i, j) - b.at(i, j));
        }
    }
    Ok(out)
}

/// Energy floor below which a frame counts as constant and `beta` is NaN.
const ZERO_ENERGY_FLOOR: f64 = 1e-10;

/// Frame energies: `E`, `F`, `gamma`, the theta-direction energy, and
/// `beta = sqrt(theta_energy / E)`.
pub fn frame_metrics(imm: &Immersion, frame: &Frame) -> Result<FrameMetrics> {
    let g = imm.grid;
    if frame.e1.grid != g {
        return Err(Error::GridMismatch);
    }
    let e = integrate_area(
        &grad_norm_sq_ambient(&frame.e1, None)
            .zip(&grad_norm_sq_ambient(&frame.e2, None), |x, y| x + y)?,
    );
    let omega = connection_form(frame)?;
    let f = integrate_area(&omega.norm_sq());
    let kappa = k_bilinear(&frame.e1, &frame.e2)?;
    let gamma = integrate_area(&kappa.map(f64::abs));
    let e1_t = d_theta_ambient(&frame.e1, None).norm_sq();
    let e2_t = d_theta_ambient(&frame.e2, None).norm_sq();
    let mut density = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let rinv2 = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            *density.at_mut(i, j) = rinv2 * (e1_t.at(i, j) + e2_t.at(i, j));
        }
    }
    let theta_energy = integrate_area(&density);
    let beta = if e > ZERO_ENERGY_FLOOR { (theta_energy / e).sqrt() } else { f64::NAN };
    Ok(FrameMetrics { e, f, beta, gamma, theta_energy, winding: frame.winding })
}

/// Semi-Coulomb diagnostics: worst interior value of `d(star w_2^1)` and
/// worst normal component `|w_r|` on the two boundary circles.
pub fn coulomb_residual(frame: &Frame) -> Result<(f64, f64)> {
    let omega = connection_form(frame)?;
    let g = omega.grid();
    let interior = exterior_derivative(&hodge_star(&omega)).max_abs_interior();
    let mut boundary = 0.0_f64;
    for j in 0..g.n_theta {
        boundary = boundary
            .max(omega.w_r.at(0, j).abs())
            .max(omega.w_r.at(g.n_s - 1, j).abs());
    }
    Ok((interior, boundary))
}

/// Minimizes `F(theta) = int |w + d theta|^2 dx` over single-valued gauges
/// in the frame's winding class and returns the rotated frame with the
/// minimizing gauge.
pub fn coulomb_minimize(imm: &Immersion, start: &Frame) -> Result<(Frame, GaugeAngle)> {
    let g = imm.grid;
    let omega = connection_form(start)?;
    // in the flat (s, theta) chart the functional is an unweighted
    // least-squares fit of d theta to -omega
    let eta_s = ScalarField {
        grid: g,
        values: (0..g.len())
            .map(|n| -omega.w_r.values[n] * g.r(n / g.n_theta))
            .collect(),
    };
    let eta_t = omega.w_theta.scale(-1.0);
    let theta = least_squares_potential(&eta_s, &eta_t)?;
    let gauge = GaugeAngle { theta, winding: 0 };
    let frame = gauge_rotate(start, &gauge)?;
    Ok((frame, gauge))
}

/// Tangency defect above which `reconstruct_gauge` refuses the frame.
const TANGENCY_LIMIT: f64 = 0.25;

fn wrap_to_pi(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x % tau;
    if y > std::f64::consts::PI {
        y -= tau;
    } else if y < -std::f64::consts::PI {
        y += tau;
    }
    y
}

/// Recovers the rotation angle from the frame to the polar tangent basis:
/// `theta = atan2(<f_x, e2>, <f_x, e1>)`, unwrapped over the grid, split
/// into a single-valued part plus `winding * theta_c`. Also returns the
/// worst residual of the compatibility system
/// `d theta = <d e2, e1> - star du`.
pub fn reconstruct_gauge(imm: &Immersion, frame: &Frame) -> Result<(GaugeAngle, f64)> {
    let g = imm.grid;
    let f_r = d_r_ambient(&imm.f);
    let f_t = d_theta_ambient(&imm.f, imm.jump());
    // f_x = cos(theta_c) f_r - sin(theta_c) r^{-1} f_theta
    let mut cos_raw = ScalarField::zeros(g);
    let mut sin_raw = ScalarField::zeros(g);
    let mut tangency = 0.0_f64;
    for i in 0..g.n_s {
        let rinv = (-g.s(i)).exp();
        for j in 0..g.n_theta {
            let tc = g.theta(j);
            let (ct, st) = (tc.cos(), tc.sin());
            let fr = f_r.at(i, j);
            let ft = f_t.at(i, j);
            let e1 = frame.e1.at(i, j);
            let e2 = frame.e2.at(i, j);
            let mut c = 0.0;
            let mut s = 0.0;
            for k in 0..imm.dim {
                let fx = ct * fr[k] - st * rinv * ft[k];
                c += fx * e1[k];
                s += fx * e2[k];
            }
            let e2u = (2.0 * imm.u.at(i, j)).exp();
            tangency = tangency.max(((c * c + s * s) / e2u - 1.0).abs());
            *cos_raw.at_mut(i, j) = c;
            *sin_raw.at_mut(i, j) = s;
        }
    }
    if tangency > TANGENCY_LIMIT {
        return Err(Error::FrameNotTangent { defect: tangency });
    }
    // pointwise angle, then 2-D unwrap: theta = 0 ray first, then each row
    let mut theta = ScalarField::zeros(g);
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            *theta.at_mut(i, j) = sin_raw.at(i, j).atan2(cos_raw.at(i, j));
        }
    }
    for i in 1..g.n_s {
        let prev = theta.at(i - 1, 0);
        let cur = theta.at(i, 0);
        *theta.at_mut(i, 0) = prev + wrap_to_pi(cur - prev);
    }
    for i in 0..g.n_s {
        for j in 1..g.n_theta {
            let prev = theta.at(i, j - 1);
            let cur = theta.at(i, j);
            *theta.at_mut(i, j) = prev + wrap_to_pi(cur - prev);
        }
    }
    // winding = loop increment / 2 pi, measured on the inner circle
    let mut total = wrap_to_pi(theta.at(0, 0) - theta.at(0, g.n_theta - 1));
    total += theta.at(0, g.n_theta - 1) - theta.at(0, 0);
    let winding = (total / std::f64::consts::TAU).round() as i64;

    // single-valued part
    let mut sv = theta.clone();
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            *sv.at_mut(i, j) -= winding as f64 * g.theta(j);
        }
    }

    // compatibility residual of d theta = <d e2, e1> - star du
    let d_sv_r = d_r(&sv);
    let d_sv_t = d_theta(&sv);
    let omega = connection_form(frame)?;
    let star_du = hodge_star(&differential(&imm.u));
    let mut worst = 0.0_f64;
    for i in 0..g.n_s {
        let rinv2 = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            let res_r = d_sv_r.at(i, j) + omega.w_r.at(i, j) + star_du.w_r.at(i, j);
            let res_t = d_sv_t.at(i, j) + winding as f64 + omega.w_theta.at(i, j)
                + star_du.w_theta.at(i, j);
            worst = worst.max((res_r * res_r + rinv2 * res_t * res_t).sqrt());
        }
    }
    Ok((GaugeAngle { theta: sv, winding }, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridSpec};
    use crate::surface::sample_catalog;
    use approx::assert_relative_eq;

    fn grid12() -> GridSpec {
        make_grid(1.0, 2.0, 64, 128).unwrap()
    }

    fn catenoid_grid() -> GridSpec {
        make_grid((-0.5_f64).exp(), 0.5_f64.exp(), 96, 192).unwrap()
    }

    #[test]
    fn canonical_frame_of_the_flat_annulus_is_polar() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        assert!(orthonormality_defect(&frame) < 1e-10);
        let mut worst = 0.0_f64;
        for i in 0..g.n_s {
            for j in 0..g.n_theta {
                let t = g.theta(j);
                let e1 = frame.e1.at(i, j);
                let e2 = frame.e2.at(i, j);
                worst = worst
                    .max((e1[0] - t.cos()).abs())
                    .max((e1[1] - t.sin()).abs())
                    .max((e2[0] + t.sin()).abs())
                    .max((e2[1] - t.cos()).abs());
            }
        }
        assert!(worst < g.tau(), "defect {worst:e}");
    }

    #[test]
    fn canonical_frame_of_the_log_cylinder_is_constant() {
        let g = grid12();
        let imm = sample_catalog("log_cylinder", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        for i in 0..g.n_s {
            for j in 0..g.n_theta {
                assert!((frame.e1.at(i, j)[0] - 1.0).abs() < 1e-9);
                assert!((frame.e2.at(i, j)[1] - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn canonical_frame_of_the_catenoid_matches_closed_form() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        assert!(orthonormality_defect(&frame) < 1e-10);
        let mut worst = 0.0_f64;
        for i in 0..g.n_s {
            let s = g.s(i);
            for j in 0..g.n_theta {
                let t = g.theta(j);
                let e1 = frame.e1.at(i, j);
                worst = worst
                    .max((e1[0] - s.tanh() * t.cos()).abs())
                    .max((e1[1] - s.tanh() * t.sin()).abs())
                    .max((e1[2] - 1.0 / s.cosh()).abs());
            }
        }
        assert!(worst < g.tau(), "defect {worst:e}");
    }

    #[test]
    fn winding_rotation_trivializes_the_flat_frame() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let gauge = GaugeAngle { theta: ScalarField::zeros(g), winding: -1 };
        let rotated = gauge_rotate(&frame, &gauge).unwrap();
        assert_eq!(rotated.winding, -1);
        for i in 0..g.n_s {
            for j in 0..g.n_theta {
                assert!((rotated.e1.at(i, j)[0] - 1.0).abs() < 1e-9);
                assert!((rotated.e2.at(i, j)[1] - 1.0).abs() < 1e-9);
            }
        }
        let m0 = frame_metrics(&imm, &frame).unwrap();
        let m1 = frame_metrics(&imm, &rotated).unwrap();
        assert_relative_eq!(m0.e, 4.0 * std::f64::consts::PI * 2.0_f64.ln(), max_relative = g.tau());
        assert!(m1.e < 1e-8);
        assert!(m1.beta.is_nan());
    }

    #[test]
    fn zero_and_constant_rotations() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let same = gauge_rotate(&frame, &GaugeAngle::zero(g)).unwrap();
        let d = frame.e1.linear_comb(1.0, &same.e1, -1.0).unwrap();
        assert!(d.norm_sq().max_abs() < 1e-30);
        // constant pi/2 swaps the legs
        let gauge = GaugeAngle {
            theta: ScalarField::from_fn(g, |_, _| std::f64::consts::FRAC_PI_2),
            winding: 0,
        };
        let quarter = gauge_rotate(&frame, &gauge).unwrap();
        let d1 = quarter.e1.linear_comb(1.0, &frame.e2, -1.0).unwrap();
        let d2 = quarter.e2.linear_comb(1.0, &frame.e1, 1.0).unwrap();
        assert!(d1.norm_sq().max_abs() < 1e-20);
        assert!(d2.norm_sq().max_abs() < 1e-20);
        let m0 = frame_metrics(&imm, &frame).unwrap();
        let m1 = frame_metrics(&imm, &quarter).unwrap();
        assert_relative_eq!(m0.e, m1.e, max_relative = 1e-10);
    }

    #[test]
    fn connection_form_closed_forms() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let omega = connection_form(&frame).unwrap();
        assert!(omega.w_r.max_abs() < g.tau());
        assert!(omega.w_theta.map(|w| w - 1.0).max_abs() < g.tau());
        // antisymmetry to round-off
        let e2_r = d_r_ambient(&frame.e2);
        let anti = e2_r.dot(&frame.e1).unwrap().zip(&omega.w_r, |x, y| x + y).unwrap();
        assert!(anti.max_abs() < 1e-9);

        let gc = catenoid_grid();
        let cat = sample_catalog("catenoid", 0.0, gc).unwrap();
        let cf = canonical_frame(&cat).unwrap();
        let om = connection_form(&cf).unwrap();
        assert!(om.w_r.max_abs() < gc.tau());
        let expect = ScalarField::from_fn(gc, |s, _| s.tanh());
        assert!(om.w_theta.zip(&expect, |x, y| x - y).unwrap().max_abs() < gc.tau());
    }

    #[test]
    fn connection_form_matches_the_lemma_formula() {
        // omega = (-u_theta / r) dr + (1 + r u_r) dtheta for any canonical frame
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let omega = connection_form(&frame).unwrap();
        let u_r = d_r(&imm.u);
        let u_t = d_theta(&imm.u);
        let mut worst = 0.0_f64;
        for i in 0..g.n_s {
            let r = g.r(i);
            for j in 0..g.n_theta {
                worst = worst
                    .max((omega.w_r.at(i, j) + u_t.at(i, j) / r).abs())
                    .max((omega.w_theta.at(i, j) - (1.0 + r * u_r.at(i, j))).abs());
            }
        }
        assert!(worst < g.tau(), "defect {worst:e}");
    }

    #[test]
    fn flat_frame_metrics_closed_forms() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let m = frame_metrics(&imm, &frame).unwrap();
        let l = 2.0_f64.ln();
        assert_relative_eq!(m.e, 4.0 * std::f64::consts::PI * l, max_relative = g.tau());
        assert_relative_eq!(m.f, 2.0 * std::f64::consts::PI * l, max_relative = g.tau());
        assert!(m.gamma < g.tau());
        // the full energy sits in the theta direction: beta = 1
        assert_relative_eq!(m.beta, 1.0, max_relative = 1e-8);
        assert_relative_eq!(m.theta_energy, m.beta * m.beta * m.e, max_relative = 1e-12);
    }

    #[test]
    fn catenoid_frame_metrics_closed_forms() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let m = frame_metrics(&imm, &frame).unwrap();
        let h = 0.5_f64;
        let pi = std::f64::consts::PI;
        assert_relative_eq!(m.e, 8.0 * pi * h, max_relative = g.tau());
        assert_relative_eq!(m.f, 4.0 * pi * (h - h.tanh()), max_relative = g.tau());
        assert_relative_eq!(m.beta, ((2.0 * h - h.tanh()) / (2.0 * h)).sqrt(), max_relative = g.tau());
        assert_relative_eq!(m.gamma, 4.0 * pi * h.tanh(), max_relative = g.tau());
    }

    #[test]
    fn energy_split_identity() {
        // E = 2F + int |grad X|^2 dx
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let m = frame_metrics(&imm, &frame).unwrap();
        let gm = crate::surface::gauss_map(&imm).unwrap();
        let x_energy = integrate_area(&gm.energy_density);
        assert!((m.e - 2.0 * m.f - x_energy).abs() < g.tau() * m.e);
    }

    #[test]
    fn k_bilinear_matches_curvature_and_is_gauge_invariant() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let k = k_bilinear(&frame.e1, &frame.e2).unwrap();
        // K e^{2u} = -sech^2 s e^{-2s}
        let expect = ScalarField::from_fn(g, |s, _| {
            -(1.0 / s.cosh().powi(2)) * (-2.0 * s).exp()
        });
        let d = k.zip(&expect, |x, y| x - y).unwrap();
        assert!(d.max_abs() < g.tau() * expect.max_abs(), "{:e}", d.max_abs());
        // gauge invariance under a smooth single-valued gauge with winding
        let gauge = GaugeAngle {
            theta: ScalarField::from_fn(g, |s, t| 0.4 * (s - g.s_min()) * t.sin()),
            winding: 1,
        };
        let rotated = gauge_rotate(&frame, &gauge).unwrap();
        let k2 = k_bilinear(&rotated.e1, &rotated.e2).unwrap();
        let dd = k.zip(&k2, |x, y| x - y).unwrap();
        assert!(dd.max_abs() < g.tau() * expect.max_abs(), "{:e}", dd.max_abs());
        // pointwise bound by half the Gauss-map energy density
        let gm = crate::surface::gauss_map(&imm).unwrap();
        for n in 0..g.len() {
            assert!(k.values[n] <= 0.5 * gm.energy_density.values[n] + g.tau());
        }
    }

    #[test]
    fn canonical_frames_are_semi_coulomb() {
        let g = catenoid_grid();
        for name in ["flat", "log_cylinder", "catenoid"] {
            let imm = sample_catalog(name, 0.0, g).unwrap();
            let frame = canonical_frame(&imm).unwrap();
            let (interior, _) = coulomb_residual(&frame).unwrap();
            assert!(interior < g.tau(), "{name}: interior {interior:e}");
        }
        // flat annulus is fully Coulomb: boundary term vanishes too
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let (_, boundary) = coulomb_residual(&frame).unwrap();
        assert!(boundary < g.tau(), "boundary {boundary:e}");
    }

    #[test]
    fn boundary_residual_detects_nonconstant_boundary_u() {
        // rotate the flat canonical frame by a gauge with theta-dependence on
        // the boundary: w_r picks up -phi_theta / r there
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let gauge = GaugeAngle {
            theta: ScalarField::from_fn(g, |s, t| 0.3 * s * t.sin()),
            winding: 0,
        };
        let rotated = gauge_rotate(&frame, &gauge).unwrap();
        let (_, boundary) = coulomb_residual(&rotated).unwrap();
        assert!(boundary > 0.1, "boundary {boundary}");
    }

    #[test]
    fn coulomb_minimize_keeps_coulomb_starts() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let m0 = frame_metrics(&imm, &frame).unwrap();
        let (min, gauge) = coulomb_minimize(&imm, &frame).unwrap();
        let m1 = frame_metrics(&imm, &min).unwrap();
        assert!(m1.f <= m0.f + 1e-12);
        assert_relative_eq!(m1.f, 2.0 * std::f64::consts::PI * 2.0_f64.ln(), max_relative = g.tau());
        // the gauge is essentially constant
        let dg = differential(&gauge.theta);
        assert!(dg.w_r.max_abs() < g.tau() && dg.w_theta.max_abs() < g.tau());
    }

    #[test]
    fn coulomb_minimize_undoes_a_smooth_gauge() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let theta0 = ScalarField::from_fn(g, |s, t| t.sin() * (s - g.s_min()));
        let start =
            gauge_rotate(&frame, &GaugeAngle { theta: theta0.clone(), winding: 0 }).unwrap();
        let m_start = frame_metrics(&imm, &start).unwrap();
        let (min, gauge) = coulomb_minimize(&imm, &start).unwrap();
        let m_min = frame_metrics(&imm, &min).unwrap();
        assert!(m_min.f <= m_start.f);
        assert_relative_eq!(
            m_min.f,
            2.0 * std::f64::consts::PI * 2.0_f64.ln(),
            max_relative = g.tau()
        );
        // recovered gauge is -theta0 up to a constant
        let shift = gauge.theta.at(0, 0) + theta0.at(0, 0);
        let d = gauge.theta.zip(&theta0, |x, y| x + y - shift).unwrap();
        assert!(d.max_abs() < g.tau(), "{:e}", d.max_abs());
        let (interior, boundary) = coulomb_residual(&min).unwrap();
        assert!(interior < g.tau(), "interior {interior:e}");
        assert!(boundary < g.tau(), "boundary {boundary:e}");
    }

    #[test]
    fn coulomb_minimize_on_the_catenoid() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let (min, gauge) = coulomb_minimize(&imm, &frame).unwrap();
        let m = frame_metrics(&imm, &min).unwrap();
        let h = 0.5_f64;
        assert_relative_eq!(
            m.f,
            4.0 * std::f64::consts::PI * (h - h.tanh()),
            max_relative = g.tau()
        );
        let dg = differential(&gauge.theta);
        assert!(dg.w_r.max_abs() < g.tau() && dg.w_theta.max_abs() < g.tau());
    }

    #[test]
    fn reconstruct_gauge_flat_cases() {
        let g = grid12();
        let imm = sample_catalog("flat", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let (gauge, residual) = reconstruct_gauge(&imm, &frame).unwrap();
        assert_eq!(gauge.winding, -1);
        assert!(residual < g.tau(), "residual {residual:e}");
        // single-valued part is constant
        let d = differential(&gauge.theta);
        assert!(d.w_r.max_abs() < g.tau() && d.w_theta.max_abs() < g.tau());

        let constant =
            gauge_rotate(&frame, &GaugeAngle { theta: ScalarField::zeros(g), winding: -1 })
                .unwrap();
        let (gauge0, res0) = reconstruct_gauge(&imm, &constant).unwrap();
        assert_eq!(gauge0.winding, 0);
        assert!(gauge0.theta.map(|t| wrap_to_pi(t)).max_abs() < g.tau());
        assert!(res0 < g.tau());
    }

    #[test]
    fn reconstruct_gauge_on_the_catenoid() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let (gauge, residual) = reconstruct_gauge(&imm, &frame).unwrap();
        assert_eq!(gauge.winding, -1);
        assert!(residual < g.tau(), "residual {residual:e}");
    }

    #[test]
    fn reconstruct_gauge_rejects_non_tangent_frames() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        // replace e2 by the surface normal: not tangent
        let mut bad = frame.clone();
        bad.e2 = AmbientField::from_fn(g, 3, |s, t, out| {
            // normal of the catenoid
            let sech = 1.0 / s.cosh();
            out[0] = -sech * t.cos();
            out[1] = -sech * t.sin();
            out[2] = s.tanh();
        });
        assert!(matches!(
            reconstruct_gauge(&imm, &bad),
            Err(Error::FrameNotTangent { .. })
        ));
    }

    #[test]
    fn reconstruct_inverts_gauge_rotation() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let applied = GaugeAngle {
            theta: ScalarField::from_fn(g, |s, t| 0.5 * (2.0 * t).cos() * (s + 1.0)),
            winding: 1,
        };
        let rotated = gauge_rotate(&frame, &applied).unwrap();
        let (gauge, residual) = reconstruct_gauge(&imm, &rotated).unwrap();
        // rotating the frame by phi shifts the reconstructed angle by -phi
        assert_eq!(gauge.winding, -2);
        assert!(residual < g.tau(), "residual {residual:e}");
        let mut worst = 0.0_f64;
        for i in 0..g.n_s {
            for j in 0..g.n_theta {
                let expect = -applied.theta.at(i, j);
                let got = gauge.theta.at(i, j);
                worst = worst.max(wrap_to_pi(got - expect).abs());
            }
        }
        assert!(worst < g.tau(), "angle defect {worst:e}");
    }
}
