//! Executable verification of the frame-energy estimates: each check
//! computes every quantity in the statement and its proof chain, tests the
//! hypotheses, and reports measured margins. Unsatisfied hypotheses yield a
//! not-applicable report, never a failure.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    d_r, d_r_ambient, d_theta, d_theta_ambient, grad_norm_sq_ambient, integrate_area,
    laplacian_ambient, ray_integral,
};
use crate::error::Result;
use crate::field::ScalarField;
use crate::frame::{
    canonical_frame, connection_form, coulomb_minimize, frame_metrics, gauge_rotate, k_bilinear,
    Frame, GaugeAngle,
};
use crate::grid::GridSpec;
use crate::pde::{harmonic_annulus, hodge_decompose, wente_solve};
use crate::surface::{fundamental_forms, gauss_map, wedge_field, Immersion};

/// One tested hypothesis: the check applies only when `measured <= threshold`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hypothesis {
    pub description: String,
    pub measured: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// Outcome of one verification: hypotheses, measured quantities, residuals,
/// and the verdict. When a hypothesis fails the conclusion is recorded as
/// not-applicable and `passed` stays true (the claim is simply not tested).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub grid: GridSpec,
    pub tolerance: f64,
    pub hypotheses: Vec<Hypothesis>,
    pub quantities: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub passed: bool,
    pub not_applicable: bool,
}

impl CheckReport {
    fn new(name: &str, grid: GridSpec, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            grid,
            tolerance,
            hypotheses: Vec::new(),
            quantities: BTreeMap::new(),
            residuals: BTreeMap::new(),
            passed: false,
            not_applicable: false,
        }
    }

    fn hypothesis(&mut self, description: &str, measured: f64, threshold: f64) -> bool {
        let satisfied = measured <= threshold;
        self.hypotheses.push(Hypothesis {
            description: description.to_string(),
            measured,
            threshold,
            satisfied,
        });
        satisfied
    }

    fn quantity(&mut self, name: &str, value: f64) {
        self.quantities.insert(name.to_string(), value);
    }

    fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), value);
    }

    /// Worst recorded residual (0 when there are none).
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0_f64, |m, v| m.max(*v))
    }

    fn finalize(mut self) -> Self {
        self.not_applicable = self.hypotheses.iter().any(|h| !h.satisfied);
        self.passed = self.not_applicable || self.max_residual() <= self.tolerance;
        self
    }

    /// Re-judges the residuals against a caller-supplied tolerance.
    /// Hypothesis thresholds are part of the check and stay fixed.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.passed = self.not_applicable || self.max_residual() <= tolerance;
        self
    }

    /// Pass margin for summaries: `tolerance - max_residual` when the check
    /// applies, NaN otherwise.
    pub fn margin(&self) -> f64 {
        if self.not_applicable {
            f64::NAN
        } else {
            self.tolerance - self.max_residual()
        }
    }
}

/// `max |lap f| e^{-2u}` over interior nodes: the mean-curvature magnitude.
pub fn minimality_residual(imm: &Immersion) -> f64 {
    let lap = laplacian_ambient(&imm.f, imm.jump());
    let g = imm.grid;
    let mut worst = 0.0_f64;
    for i in 1..g.n_s - 1 {
        for j in 0..g.n_theta {
            let n: f64 = lap.at(i, j).iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max(n * (-2.0 * imm.u.at(i, j)).exp());
        }
    }
    worst
}

/// The explicit constant assembled from the proof chain:
/// `C = [(1 + beta*kappa/((1 - sqrt(gamma/2pi))(1 - q))) / (1 - sqrt(gamma/2pi))]^2`
/// with `q = beta / (1 - sqrt(gamma/2pi))` and `kappa = 1`. NaN when the
/// smallness condition `q < 1` fails.
pub fn derived_constant(beta: f64, gamma: f64) -> f64 {
    let root = (gamma / std::f64::consts::TAU).sqrt();
    if root >= 1.0 {
        return f64::NAN;
    }
    let q = beta / (1.0 - root);
    if q >= 1.0 {
        return f64::NAN;
    }
    let kappa = 1.0;
    let inner = 1.0 + beta * kappa / ((1.0 - root) * (1.0 - q));
    (inner / (1.0 - root)).powi(2)
}

/// `I1 = int (1/r + u_r)^2 dx` and `I2 = int r^{-2} u_theta^2 dx`.
fn radial_angular_integrals(imm: &Immersion) -> (f64, f64) {
    let g = imm.grid;
    let u_r = d_r(&imm.u);
    let u_t = d_theta(&imm.u);
    let mut i1 = ScalarField::zeros(g);
    let mut i2 = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let rinv = (-g.s(i)).exp();
        for j in 0..g.n_theta {
            *i1.at_mut(i, j) = (rinv + u_r.at(i, j)).powi(2);
            *i2.at_mut(i, j) = (rinv * u_t.at(i, j)).powi(2);
        }
    }
    (integrate_area(&i1), integrate_area(&i2))
}

/// Max oscillation of `u` along each boundary circle.
fn boundary_oscillation(u: &ScalarField) -> f64 {
    let g = u.grid;
    let mut worst = 0.0_f64;
    for i in [0, g.n_s - 1] {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..g.n_theta {
            lo = lo.min(u.at(i, j));
            hi = hi.max(u.at(i, j));
        }
        worst = worst.max(hi - lo);
    }
    worst
}

/// Mean of `u` along a boundary row.
fn boundary_mean(u: &ScalarField, i: usize) -> f64 {
    let g = u.grid;
    (0..g.n_theta).map(|j| u.at(i, j)).sum::<f64>() / g.n_theta as f64
}

// ---------------------------------------------------------------------------

/// Verifies the four Gauss-map identities for the given frame:
/// the energy split, the curvature bound, the two curvature evaluations,
/// and the equality of Gauss-map and second-form energies.
pub fn check_appendix_identities(imm: &Immersion, frame: &Frame) -> Result<CheckReport> {
    let g = imm.grid;
    let mut report = CheckReport::new("appendix_identities", g, g.tau());

    let x = wedge_field(&frame.e1, &frame.e2)?;
    let x_density = grad_norm_sq_ambient(&x, None);
    let e_density = grad_norm_sq_ambient(&frame.e1, None)
        .zip(&grad_norm_sq_ambient(&frame.e2, None), |a, b| a + b)?;
    let omega = connection_form(frame)?;
    let omega_sq = omega.norm_sq();
    let kappa = k_bilinear(&frame.e1, &frame.e2)?;

    // energy split |grad X|^2 = |grad e1|^2 + |grad e2|^2 - 2|w|^2
    let split = x_density
        .zip(&e_density, |x, e| e - x)?
        .zip(&omega_sq, |d, w| d - 2.0 * w)?;
    let scale = e_density.max_abs() + 1.0;
    report.residual("energy_split_pointwise", split.max_abs() / scale);

    // curvature bound K <= |grad X|^2 / 2
    let mut bound_defect = 0.0_f64;
    for n in 0..g.len() {
        bound_defect = bound_defect.max(kappa.values[n] - 0.5 * x_density.values[n]);
    }
    report.residual("curvature_bound", bound_defect.max(0.0) / scale);

    // the two curvature evaluations agree: K(e1,e2) = K e^{2u}
    let ff = fundamental_forms(imm)?;
    let ke2u = ff.k.zip(&imm.conformal_weight(), |k, w| k * w)?;
    let k_scale = ke2u.max_abs() + 1.0;
    report.residual(
        "curvature_agreement",
        kappa.zip(&ke2u, |a, b| a - b)?.max_abs() / k_scale,
    );

    // integrated energies: int |grad X|^2 dx = int |A|^2 dmu
    let x_energy = integrate_area(&x_density);
    let a_energy = integrate_area(&ff.a.norm_sq.zip(&imm.conformal_weight(), |a, w| a * w)?);
    report.quantity("gauss_map_energy", x_energy);
    report.quantity("second_form_energy", a_energy);
    report.residual(
        "energy_equality",
        (x_energy - a_energy).abs() / (a_energy.abs() + 1.0),
    );
    Ok(report.finalize())
}

/// Verifies that the curvature pairing is unchanged under the supplied
/// gauge and `trials` further random smooth gauges (winding included).
pub fn check_gauge_invariance(
    imm: &Immersion,
    frame: &Frame,
    gauge: &GaugeAngle,
    trials: usize,
) -> Result<CheckReport> {
    let g = imm.grid;
    let mut report = CheckReport::new("gauge_invariance", g, g.tau());
    let base = k_bilinear(&frame.e1, &frame.e2)?;
    let scale = base.max_abs() + 1.0;

    let mut worst = 0.0_f64;
    let mut check = |gauge: &GaugeAngle| -> Result<()> {
        let rotated = gauge_rotate(frame, gauge)?;
        let k = k_bilinear(&rotated.e1, &rotated.e2)?;
        worst = worst.max(k.zip(&base, |a, b| a - b)?.max_abs());
        Ok(())
    };
    check(gauge)?;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE ^ trial as u64);
        let c1: f64 = rng.gen_range(-1.0..1.0);
        let c2: f64 = rng.gen_range(-1.0..1.0);
        let c3: f64 = rng.gen_range(-1.0..1.0);
        let winding = (trial as i64 % 5) - 2;
        let theta = ScalarField::from_fn(g, |s, t| {
            (s - g.s_min()) * (c1 * t.sin() + c2 * (2.0 * t).cos()) + c3 * s
        });
        check(&GaugeAngle { theta, winding })?;
    }
    report.quantity("trials", trials as f64 + 1.0);
    report.residual("curvature_drift", worst / scale);
    Ok(report.finalize())
}

/// Frame-energy estimate for conformal immersions: builds the Coulomb
/// frame, extracts the harmonic period, and verifies the whole proof chain
/// including the final `E <= C(beta, gamma, a/b) * ||A||^2` bound.
pub fn thm12_verify(imm: &Immersion) -> Result<CheckReport> {
    let g = imm.grid;
    let mut report = CheckReport::new("thm12", g, g.tau());
    let tau = std::f64::consts::TAU;

    let start = canonical_frame(imm)?;
    let (frame, _) = coulomb_minimize(imm, &start)?;
    let metrics = frame_metrics(imm, &frame)?;
    let gamma = metrics.gamma;
    let beta = metrics.beta;
    report.quantity("E", metrics.e);
    report.quantity("F", metrics.f);
    report.quantity("beta", beta);
    report.quantity("gamma", gamma);

    // gamma cross-check: int |K(X)| dx = int |K| dmu
    let ff = fundamental_forms(imm)?;
    let gamma_mu =
        integrate_area(&ff.k.zip(&imm.conformal_weight(), |k, w| (k * w).abs())?);
    report.quantity("gamma_mu", gamma_mu);
    report.residual("gamma_agreement", (gamma - gamma_mu).abs() / (gamma_mu + 1.0));

    // Hodge decomposition of star omega
    let omega = connection_form(&frame)?;
    let parts = hodge_decompose(&omega, g.tau())?;
    let c_a = parts.v.at(g.n_s - 1, 0);
    let c_b = parts.v.at(0, 0);
    report.quantity("alpha", parts.alpha);
    report.quantity("c_a", c_a);
    report.quantity("c_b", c_b);

    // inequality (2.7)
    let root = (gamma / tau).sqrt();
    let gm = gauss_map(imm)?;
    let x_norm = integrate_area(&gm.energy_density).max(0.0).sqrt();
    let log_ratio = (g.a / g.b).ln();
    let lhs = (1.0 - root) * metrics.e.sqrt();
    let rhs = (4.0 * std::f64::consts::PI).sqrt() * (c_a - c_b).abs() / log_ratio.sqrt() + x_norm;
    report.quantity("lhs_2_7", lhs);
    report.quantity("rhs_2_7", rhs);
    report.residual("inequality_2_7", (lhs - rhs).max(0.0) / (rhs + 1.0));

    // ray estimate: |c_a - c_b| <= min over rays of int |<e1, d_theta e2>| r^{-1} dr
    let e2_t = d_theta_ambient(&frame.e2, None);
    let pairing = e2_t.dot(&frame.e1)?;
    let integrand = ScalarField {
        grid: g,
        values: (0..g.len())
            .map(|n| pairing.values[n].abs() * (-g.s(n / g.n_theta)).exp())
            .collect(),
    };
    let ray_min = (0..g.n_theta)
        .map(|j| ray_integral(&integrand, j).unwrap())
        .fold(f64::INFINITY, f64::min);
    report.quantity("ray_bound", ray_min);
    report.residual(
        "ray_estimate",
        ((c_a - c_b).abs() - ray_min).max(0.0) / (ray_min + 1.0),
    );

    // hypotheses of the final bound
    let condition = beta / (1.0 - root);
    report.quantity("condition_1_5", condition);
    let gamma_ok = report.hypothesis("gamma < 2 pi", gamma, tau * (1.0 - 1e-12));
    let cond_ok = report.hypothesis("beta / (1 - sqrt(gamma/2pi)) < 1", condition, 1.0 - 1e-12);

    let a_energy = integrate_area(&ff.a.norm_sq.zip(&imm.conformal_weight(), |a, w| a * w)?);
    report.quantity("second_form_energy", a_energy);
    if gamma_ok && cond_ok {
        let c = derived_constant(beta, gamma);
        report.quantity("derived_C", c);
        report.residual(
            "energy_bound",
            (metrics.e - c * a_energy).max(0.0) / (metrics.e + 1.0),
        );
    }
    Ok(report.finalize())
}

/// Minimal-surface energy split: the half-energy identity holds exactly
/// when the two conformal-factor integrals agree. Also validates the
/// pointwise identities of the proof and the traceless relation.
pub fn thm17_check(imm: &Immersion) -> Result<CheckReport> {
    let g = imm.grid;
    let mut report = CheckReport::new("thm17", g, g.tau());

    let min_res = minimality_residual(imm);
    report.quantity("minimality_residual", min_res);
    report.hypothesis("immersion is minimal", min_res, g.tau());

    let frame = canonical_frame(imm)?;
    let metrics = frame_metrics(imm, &frame)?;
    let l = metrics.theta_energy;
    let r = 0.5 * metrics.e;
    let (i1, i2) = radial_angular_integrals(imm);
    report.quantity("L", l);
    report.quantity("half_E", r);
    report.quantity("I1", i1);
    report.quantity("I2", i2);

    // L - E/2 = (I1 - I2)/2 along the proof, so both equalities are decided
    // on the scale of the integrals themselves
    let equal_scale = g.tau() * (i1 + i2 + 1.0);
    let left_holds = (l - r).abs() <= 0.5 * equal_scale;
    let right_holds = (i1 - i2).abs() <= equal_scale;
    report.quantity("half_energy_holds", left_holds as u8 as f64);
    report.quantity("integrals_agree", right_holds as u8 as f64);
    report.residual(
        "equivalence",
        if left_holds == right_holds { 0.0 } else { 1.0 },
    );

    // pointwise identities (2.8)-(2.10) and the traceless relation
    let f_r = d_r_ambient(&imm.f);
    let f_t = d_theta_ambient(&imm.f, imm.jump());
    let f_rr = d_r_ambient(&f_r).norm_sq();
    let f_rt = d_r_ambient(&f_t).norm_sq();
    let f_tt = d_theta_ambient(&f_t, None).norm_sq();
    let e1_r = d_r_ambient(&frame.e1).norm_sq();
    let e1_t = d_theta_ambient(&frame.e1, None).norm_sq();
    let e2_r = d_r_ambient(&frame.e2).norm_sq();
    let e2_t = d_theta_ambient(&frame.e2, None).norm_sq();
    let u_r = d_r(&imm.u);
    let u_t = d_theta(&imm.u);

    let mut res_28 = 0.0_f64;
    let mut res_29 = 0.0_f64;
    let mut res_210 = 0.0_f64;
    let mut scale_28 = 1.0_f64;
    let mut scale_29 = 1.0_f64;
    let mut scale_210 = 1.0_f64;
    for i in 0..g.n_s {
        let rinv = (-g.s(i)).exp();
        let rinv2 = rinv * rinv;
        for j in 0..g.n_theta {
            let e2u = (2.0 * imm.u.at(i, j)).exp();
            let em2u = 1.0 / e2u;
            let ur = u_r.at(i, j);
            let ut = u_t.at(i, j);

            let lhs8 = rinv2 * (e2_t.at(i, j) + e1_t.at(i, j));
            let rhs8 = rinv2 * em2u * f_rt.at(i, j) + rinv2 * rinv2 * em2u * f_tt.at(i, j)
                - 2.0 * rinv2 * ut * ut;
            res_28 = res_28.max((lhs8 - rhs8).abs());
            scale_28 = scale_28.max(rhs8.abs());

            let lhs9 = e2_r.at(i, j) + e1_r.at(i, j);
            let rhs9 = em2u * f_rr.at(i, j) + rinv2 * em2u * f_rt.at(i, j)
                - ur * ur
                - (rinv + ur).powi(2);
            res_29 = res_29.max((lhs9 - rhs9).abs());
            scale_29 = scale_29.max(rhs9.abs());

            let lhs10 = f_rr.at(i, j) - ur * ur * e2u;
            let rhs10 = rinv2 * rinv2 * f_tt.at(i, j) - e2u * (rinv + ur).powi(2);
            res_210 = res_210.max((lhs10 - rhs10).abs());
            scale_210 = scale_210.max(lhs10.abs()).max(rhs10.abs());
        }
    }
    report.residual("identity_2_8", res_28 / scale_28);
    report.residual("identity_2_9", res_29 / scale_29);
    report.residual("identity_2_10", res_210 / scale_210);

    let ff = fundamental_forms(imm)?;
    let mut traceless = 0.0_f64;
    for i in 0..g.n_s {
        let rinv2 = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            let arr = ff.a.a_rr.at(i, j);
            let att = ff.a.a_thetatheta.at(i, j);
            for c in 0..imm.dim {
                traceless = traceless.max((arr[c] + rinv2 * att[c]).abs());
            }
        }
    }
    report.residual("traceless", traceless / (ff.a.norm_sq.max_abs().sqrt() + 1.0));
    Ok(report.finalize())
}

/// Rigidity of radially symmetric minimal annuli with the half-energy
/// property: `u = -log r + c`, vanishing second form, constant frame.
pub fn cor18_check(imm: &Immersion) -> Result<CheckReport> {
    let g = imm.grid;
    let mut report = CheckReport::new("cor18", g, g.tau());

    let osc = {
        let mut worst = 0.0_f64;
        for i in 0..g.n_s {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for j in 0..g.n_theta {
                lo = lo.min(imm.u.at(i, j));
                hi = hi.max(imm.u.at(i, j));
            }
            worst = worst.max(hi - lo);
        }
        worst
    };
    report.quantity("radial_oscillation", osc);
    report.hypothesis("u radially symmetric", osc, g.tau());

    let (i1, i2) = radial_angular_integrals(imm);
    report.quantity("I1", i1);
    report.quantity("I2", i2);
    report.hypothesis("I1 vanishes", i1, g.tau());
    report.hypothesis("I2 vanishes", i2, g.tau());

    // least-squares fit u(s) = -s + c
    let c = {
        let mut acc = 0.0;
        for n in 0..g.len() {
            acc += imm.u.values[n] + g.s(n / g.n_theta);
        }
        acc / g.len() as f64
    };
    report.quantity("fit_c", c);
    let mut fit = 0.0_f64;
    for n in 0..g.len() {
        fit = fit.max((imm.u.values[n] + g.s(n / g.n_theta) - c).abs());
    }
    report.residual("conformal_factor_fit", fit);

    let ff = fundamental_forms(imm)?;
    report.residual("second_form_sup", ff.a.norm_sq.max_abs().sqrt());

    let frame = canonical_frame(imm)?;
    let grad = grad_norm_sq_ambient(&frame.e1, None)
        .zip(&grad_norm_sq_ambient(&frame.e2, None), |a, b| a + b)?;
    report.residual("frame_gradient_sup", grad.max_abs().sqrt());
    Ok(report.finalize())
}

/// `(3 - 2 sqrt 2) pi` threshold.
pub const THM110_CURVATURE_LIMIT: f64 = (3.0 - 2.0 * std::f64::consts::SQRT_2) * std::f64::consts::PI;

/// Energy bound for minimal annuli with balanced conformal factor and small
/// total curvature: `E <= C * int |A|^2 dmu` at `beta = sqrt(1/2)`.
pub fn thm110_verify(imm: &Immersion) -> Result<CheckReport> {
    let g = imm.grid;
    let mut report = CheckReport::new("thm110", g, g.tau());

    let min_res = minimality_residual(imm);
    report.quantity("minimality_residual", min_res);
    report.hypothesis("immersion is minimal", min_res, g.tau());

    let (i1, i2) = radial_angular_integrals(imm);
    report.quantity("I1", i1);
    report.quantity("I2", i2);
    report.hypothesis("(1.6): I1 = I2", (i1 - i2).abs(), g.tau() * (i1 + i2 + 1.0));

    let osc = boundary_oscillation(&imm.u);
    report.quantity("boundary_oscillation", osc);
    report.hypothesis("(1.7): u constant on each boundary circle", osc, g.tau());

    let ff = fundamental_forms(imm)?;
    let total_k =
        integrate_area(&ff.k.zip(&imm.conformal_weight(), |k, w| (k * w).abs())?);
    report.quantity("total_curvature", total_k);
    report.quantity("curvature_limit", THM110_CURVATURE_LIMIT);
    report.hypothesis(
        "(1.8): int |K| dmu < (3 - 2 sqrt 2) pi",
        total_k,
        THM110_CURVATURE_LIMIT * (1.0 - 1e-12),
    );

    let start = canonical_frame(imm)?;
    let (frame, _) = coulomb_minimize(imm, &start)?;
    let metrics = frame_metrics(imm, &frame)?;
    let a_energy = integrate_area(&ff.a.norm_sq.zip(&imm.conformal_weight(), |a, w| a * w)?);
    let c = derived_constant(std::f64::consts::FRAC_1_SQRT_2, total_k);
    report.quantity("E", metrics.e);
    report.quantity("second_form_energy", a_energy);
    report.quantity("derived_C", c);
    report.residual(
        "energy_bound",
        (metrics.e - c * a_energy).max(0.0) / (metrics.e + 1.0),
    );
    Ok(report.finalize())
}

/// Conformal-factor control: `u` splits into a Wente part driven by the
/// frame curvature plus the explicit harmonic extension of its boundary
/// values, and the Wente part obeys the `1/2pi` bound.
pub fn conformal_factor_bound(imm: &Immersion) -> Result<CheckReport> {
    let g = imm.grid;
    let mut report = CheckReport::new("conformal_factor_bound", g, g.tau());

    let osc = boundary_oscillation(&imm.u);
    report.quantity("boundary_oscillation", osc);
    report.hypothesis("u constant on each boundary circle", osc, g.tau());

    let frame = canonical_frame(imm)?;
    let sol = wente_solve(&frame.e1, &frame.e2)?;
    let c_a = boundary_mean(&imm.u, g.n_s - 1);
    let c_b = boundary_mean(&imm.u, 0);
    report.quantity("c_a", c_a);
    report.quantity("c_b", c_b);
    let harmonic = harmonic_annulus(g, c_a, c_b);
    let recon = sol.v.zip(&harmonic, |v, h| v + h)?;
    let defect = imm.u.zip(&recon, |u, w| u - w)?.max_abs();
    report.residual("reconstruction_sup", defect / (imm.u.max_abs() + 1.0));

    report.quantity("wente_sup", sol.sup_norm);
    report.quantity("wente_bound", sol.bound_infty);
    let e1_norm = integrate_area(&grad_norm_sq_ambient(&frame.e1, None)).max(0.0).sqrt();
    let e2_norm = integrate_area(&grad_norm_sq_ambient(&frame.e2, None)).max(0.0).sqrt();
    let aggregate = e1_norm * e2_norm / std::f64::consts::TAU;
    report.quantity("aggregate_bound", aggregate);
    report.residual("wente_inequality", (sol.sup_norm - aggregate).max(0.0));
    Ok(report.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AmbientField;
    use crate::grid::make_grid;
    use crate::surface::sample_catalog;
    use approx::assert_relative_eq;

    fn grid12() -> GridSpec {
        make_grid(1.0, 2.0, 64, 128).unwrap()
    }

    fn catenoid_grid() -> GridSpec {
        make_grid((-0.5_f64).exp(), 0.5_f64.exp(), 96, 192).unwrap()
    }

    fn thin_catenoid_grid() -> GridSpec {
        make_grid((-0.01_f64).exp(), 0.01_f64.exp(), 64, 128).unwrap()
    }

    #[test]
    fn appendix_identities_on_the_catalog() {
        for (name, grid) in
            [("flat", grid12()), ("log_cylinder", grid12()), ("catenoid", catenoid_grid())]
        {
            let imm = sample_catalog(name, 0.0, grid).unwrap();
            let frame = canonical_frame(&imm).unwrap();
            let report = check_appendix_identities(&imm, &frame).unwrap();
            assert!(report.passed && !report.not_applicable, "{name}: {report:?}");
        }
        let imm = sample_catalog("catenoid", 0.0, catenoid_grid()).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let report = check_appendix_identities(&imm, &frame).unwrap();
        assert_relative_eq!(
            report.quantities["gauss_map_energy"],
            8.0 * std::f64::consts::PI * 0.5_f64.tanh(),
            max_relative = catenoid_grid().tau()
        );
    }

    #[test]
    fn gauge_invariance_report() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let frame = canonical_frame(&imm).unwrap();
        let gauge = GaugeAngle {
            theta: ScalarField::from_fn(g, |s, t| s * t.sin()),
            winding: 2,
        };
        let report = check_gauge_invariance(&imm, &frame, &gauge, 5).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn thm12_on_the_thin_catenoid() {
        let g = thin_catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let report = thm12_verify(&imm).unwrap();
        assert!(report.passed && !report.not_applicable, "{report:?}");
        let q = &report.quantities;
        assert_relative_eq!(q["gamma"], 4.0 * std::f64::consts::PI * 0.01_f64.tanh(), max_relative = 1e-3);
        assert_relative_eq!(q["beta"], 0.707120, max_relative = 1e-3);
        assert!(q["condition_1_5"] < 1.0 && q["condition_1_5"] > 0.8);
        // (2.7) closed forms: lhs 0.4304, rhs 0.5013
        assert_relative_eq!(q["lhs_2_7"], 0.430440, max_relative = 2e-3);
        assert_relative_eq!(q["rhs_2_7"], 0.501317, max_relative = 2e-3);
        // c_a = c_b by symmetry
        assert!((q["c_a"] - q["c_b"]).abs() < 1e-6);
    }

    #[test]
    fn thm12_on_the_flat_annulus_is_not_applicable() {
        // gamma = 0 but beta = 1: the smallness condition (1.5) fails, while
        // inequality (2.7) itself holds with equality
        let imm = sample_catalog("flat", 0.0, grid12()).unwrap();
        let report = thm12_verify(&imm).unwrap();
        assert!(report.not_applicable, "{report:?}");
        assert!(report.passed);
        let q = &report.quantities;
        assert_relative_eq!(q["beta"], 1.0, max_relative = 1e-6);
        assert!(q["gamma"] < grid12().tau());
        // |c_a - c_b| = log(a/b)
        assert_relative_eq!((q["c_a"] - q["c_b"]).abs(), 2.0_f64.ln(), max_relative = 1e-3);
        // equality in (2.7) within tolerance
        assert_relative_eq!(q["lhs_2_7"], q["rhs_2_7"], max_relative = 1e-3);
        assert!(report.residuals["inequality_2_7"] <= grid12().tau());
    }

    #[test]
    fn thm12_large_catenoid_is_not_applicable() {
        let h = 1.5_f64;
        let g = make_grid((-h).exp(), h.exp(), 96, 192).unwrap();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let report = thm12_verify(&imm).unwrap();
        assert!(report.not_applicable, "{report:?}");
        // gamma = 4 pi tanh 1.5 > 2 pi
        assert!(report.quantities["gamma"] > std::f64::consts::TAU);
    }

    #[test]
    fn thm17_on_the_catenoid() {
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let report = thm17_check(&imm).unwrap();
        assert!(report.passed && !report.not_applicable, "{report:?}");
        let q = &report.quantities;
        assert_relative_eq!(
            q["I1"],
            4.0 * std::f64::consts::PI * (0.5 - 0.5_f64.tanh()),
            max_relative = 1e-3
        );
        assert!(q["I2"] < 1e-10);
        // neither side of the equivalence holds: beta^2 = 0.5379 != 1/2
        assert_eq!(q["half_energy_holds"], 0.0);
        assert_eq!(q["integrals_agree"], 0.0);
    }

    #[test]
    fn thm17_on_the_log_cylinder_degenerate_case() {
        let imm = sample_catalog("log_cylinder", 0.0, grid12()).unwrap();
        let report = thm17_check(&imm).unwrap();
        assert!(report.passed && !report.not_applicable, "{report:?}");
        assert!(report.quantities["I1"] < 1e-8);
        assert!(report.quantities["I2"] < 1e-8);
        assert_eq!(report.quantities["half_energy_holds"], 1.0);
        assert_eq!(report.quantities["integrals_agree"], 1.0);
    }

    #[test]
    fn thm17_on_the_flat_annulus() {
        // the flat annulus is minimal with I1 > 0 = I2 and beta = 1; both
        // sides of the equivalence fail together and (2.10) reads 0 = 0
        let imm = sample_catalog("flat", 0.0, grid12()).unwrap();
        let report = thm17_check(&imm).unwrap();
        assert!(report.passed && !report.not_applicable, "{report:?}");
        assert_relative_eq!(
            report.quantities["I1"],
            std::f64::consts::TAU * 2.0_f64.ln(),
            max_relative = 1e-6
        );
        assert_eq!(report.quantities["half_energy_holds"], 0.0);
        assert_eq!(report.quantities["integrals_agree"], 0.0);
        assert!(report.residuals["identity_2_10"] <= grid12().tau());
    }

    #[test]
    fn cor18_accepts_the_log_cylinder() {
        let imm = sample_catalog("log_cylinder", 0.3, grid12()).unwrap();
        let report = cor18_check(&imm).unwrap();
        assert!(report.passed && !report.not_applicable, "{report:?}");
        assert_relative_eq!(report.quantities["fit_c"], 0.3, epsilon = 1e-10);
    }

    #[test]
    fn cor18_rejects_catenoid_and_flat() {
        let cat = sample_catalog("catenoid", 0.0, catenoid_grid()).unwrap();
        assert!(cor18_check(&cat).unwrap().not_applicable);
        let flat = sample_catalog("flat", 0.0, grid12()).unwrap();
        let report = cor18_check(&flat).unwrap();
        assert!(report.not_applicable);
        assert_relative_eq!(
            report.quantities["I1"],
            std::f64::consts::TAU * 2.0_f64.ln(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn thm110_on_the_log_cylinder() {
        let imm = sample_catalog("log_cylinder", 0.0, grid12()).unwrap();
        let report = thm110_verify(&imm).unwrap();
        assert!(report.passed && !report.not_applicable, "{report:?}");
        assert!(report.quantities["E"] < 1e-8);
    }

    #[test]
    fn thm110_on_the_flat_annulus_is_not_applicable() {
        let imm = sample_catalog("flat", 0.0, grid12()).unwrap();
        let report = thm110_verify(&imm).unwrap();
        assert!(report.not_applicable, "{report:?}");
        // (1.6) fails decisively
        let h = report
            .hypotheses
            .iter()
            .find(|h| h.description.contains("(1.6)"))
            .unwrap();
        assert!(!h.satisfied);
    }

    #[test]
    fn thm110_on_the_thin_catenoid() {
        let g = thin_catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let report = thm110_verify(&imm).unwrap();
        // borderline case: the (1.6) defect is O(h^3), far below tau here,
        // so the check applies and the bound holds
        assert!(!report.not_applicable, "{report:?}");
        assert!(report.passed, "{report:?}");
        assert!((report.quantities["I1"] - report.quantities["I2"]).abs() < 1e-4);
    }

    #[test]
    fn conformal_factor_bound_on_the_catalog() {
        let cases = [
            ("flat", grid12()),
            ("log_cylinder", grid12()),
            ("catenoid", catenoid_grid()),
        ];
        for (name, g) in cases {
            let imm = sample_catalog(name, 0.0, g).unwrap();
            let report = conformal_factor_bound(&imm).unwrap();
            assert!(report.passed && !report.not_applicable, "{name}: {report:?}");
        }
        // catenoid boundary constants
        let g = catenoid_grid();
        let imm = sample_catalog("catenoid", 0.0, g).unwrap();
        let report = conformal_factor_bound(&imm).unwrap();
        assert_relative_eq!(
            report.quantities["c_a"],
            0.5_f64.cosh().ln() - 0.5,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            report.quantities["c_b"],
            0.5_f64.cosh().ln() + 0.5,
            epsilon = 1e-10
        );
    }

    #[test]
    fn minimality_residual_cases() {
        let g = grid12();
        let flat = sample_catalog("flat", 0.0, g).unwrap();
        assert!(minimality_residual(&flat) < g.tau());
        let cat = sample_catalog("catenoid", 0.0, catenoid_grid()).unwrap();
        assert!(minimality_residual(&cat) < catenoid_grid().tau());
        // graph patch f = (x, y, eps (x^2 + y^2)): |lap f| = 4 eps
        let eps = 1e-3;
        let mut graph = sample_catalog("flat", 0.0, g).unwrap();
        graph.f = AmbientField::from_fn(g, 3, |s, t, out| {
            let r = s.exp();
            out[0] = r * t.cos();
            out[1] = r * t.sin();
            out[2] = eps * r * r;
        });
        let res = minimality_residual(&graph);
        assert_relative_eq!(res, 4.0 * eps, max_relative = 1e-2);
    }

    #[test]
    fn derived_constant_behavior() {
        // beta = 1/sqrt 2, gamma = 0: C = (1 + 1/(sqrt 2 - 1))^2
        let c = derived_constant(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let expect = (1.0 + 1.0 / (std::f64::consts::SQRT_2 - 1.0)).powi(2);
        assert_relative_eq!(c, expect, max_relative = 1e-12);
        assert!(derived_constant(1.0, 0.0).is_nan());
        assert!(derived_constant(0.5, 10.0 * std::f64::consts::TAU).is_nan());
    }

    #[test]
    fn reports_serialize_with_stable_keys() {
        let imm = sample_catalog("log_cylinder", 0.0, grid12()).unwrap();
        let report = cor18_check(&imm).unwrap();
        let a = serde_json::to_string(&report).unwrap();
        let b = serde_json::to_string(&cor18_check(&imm).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"quantities\""));
    }
}
