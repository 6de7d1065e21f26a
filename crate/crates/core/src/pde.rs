//! Elliptic solvers on the annulus.
//!
//! The log-polar Laplacian `e^{-2s}(d_ss + d_thetatheta)` decouples exactly
//! under a Fourier transform in `theta`, so every solve here is a direct
//! method: FFT across `theta`, then a banded solve in `s` per mode.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::calculus::{
    self, d_s, d_theta, grad_norm_sq, hodge_star, integrate_area, loop_integral,
};
use crate::error::{Error, Result};
use crate::field::{AmbientField, OneForm, ScalarField};
use crate::grid::GridSpec;

/// Residual threshold for the direct solves.
const SOLVER_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Fourier transform over theta, one spectrum row per s-level.

fn theta_fft(field: &ScalarField) -> Vec<Complex64> {
    let g = field.grid;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(g.n_theta);
    let mut data: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in data.chunks_mut(g.n_theta) {
        fft.process(row);
    }
    data
}

fn theta_ifft(mut data: Vec<Complex64>, grid: GridSpec) -> ScalarField {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(grid.n_theta);
    for row in data.chunks_mut(grid.n_theta) {
        fft.process(row);
    }
    let scale = 1.0 / grid.n_theta as f64;
    ScalarField { grid, values: data.iter().map(|c| c.re * scale).collect() }
}

/// Transform of a single theta-row (boundary data).
fn row_fft(n_theta: usize, row: &[f64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_theta);
    let mut data: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut data);
    data
}

/// Eigenvalue of the periodic three-point second difference for mode `k`.
fn lambda_theta(grid: GridSpec, k: usize) -> f64 {
    let x = std::f64::consts::PI * k as f64 / grid.n_theta as f64;
    let dt = grid.dtheta();
    -4.0 * x.sin().powi(2) / (dt * dt)
}

/// Symbol of the periodic centered first difference for mode `k` is
/// `i * sigma_k` with this `sigma_k`.
fn sigma_theta(grid: GridSpec, k: usize) -> f64 {
    let x = std::f64::consts::TAU * k as f64 / grid.n_theta as f64;
    x.sin() / grid.dtheta()
}

// ---------------------------------------------------------------------------
// Banded solvers in s.

/// Tridiagonal solve (Thomas algorithm) with real bands and complex rhs.
fn solve_tridiag(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = sup[i] / m;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
    }
    rhs[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = d[i] - c[i] * rhs[i + 1];
    }
}

/// Symmetric pentadiagonal LDL^T factorization and solve, real matrix,
/// complex right-hand side. `off1`/`off2` are the first and second
/// subdiagonals.
fn solve_penta(diag: &[f64], off1: &[f64], off2: &[f64], rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut d = vec![0.0; n];
    let mut l1 = vec![0.0; n.saturating_sub(1)];
    let mut l2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n {
        let mut di = diag[i];
        if i >= 1 {
            di -= l1[i - 1] * l1[i - 1] * d[i - 1];
        }
        if i >= 2 {
            di -= l2[i - 2] * l2[i - 2] * d[i - 2];
        }
        d[i] = di;
        if i + 1 < n {
            let mut v = off1[i];
            if i >= 1 {
                v -= l2[i - 1] * l1[i - 1] * d[i - 1];
            }
            l1[i] = v / d[i];
        }
        if i + 2 < n {
            l2[i] = off2[i] / d[i];
        }
    }
    // L z = b
    for i in 0..n {
        let mut z = rhs[i];
        if i >= 1 {
            z -= l1[i - 1] * rhs[i - 1];
        }
        if i >= 2 {
            z -= l2[i - 2] * rhs[i - 2];
        }
        rhs[i] = z;
    }
    // D y = z, L^T x = y
    for i in 0..n {
        rhs[i] /= d[i];
    }
    for i in (0..n).rev() {
        let mut x = rhs[i];
        if i + 1 < n {
            x -= l1[i] * rhs[i + 1];
        }
        if i + 2 < n {
            x -= l2[i] * rhs[i + 2];
        }
        rhs[i] = x;
    }
}

// ---------------------------------------------------------------------------
// Dirichlet Poisson: -lap v = rhs, v = g on the two circles.

/// Solves `-lap v = rhs` with `v = g_b` on `s = log b` and `v = g_a` on
/// `s = log a` (one value per theta-node each).
pub fn poisson_dirichlet(rhs: &ScalarField, g_a: &[f64], g_b: &[f64]) -> Result<ScalarField> {
    let g = rhs.grid;
    assert_eq!(g_a.len(), g.n_theta, "g_a must have one value per theta node");
    assert_eq!(g_b.len(), g.n_theta, "g_b must have one value per theta node");
    let ds = g.ds();
    let ds2 = ds * ds;

    let spectrum = theta_fft(rhs);
    let bc_a = row_fft(g.n_theta, g_a);
    let bc_b = row_fft(g.n_theta, g_b);

    let n_int = g.n_s - 2;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut col = vec![Complex64::new(0.0, 0.0); n_int];
    for k in 0..g.n_theta {
        let lam = lambda_theta(g, k);
        let vb = bc_b[k];
        let va = bc_a[k];
        // (v_{i-1} - 2 v_i + v_{i+1})/ds^2 + lam v_i = -e^{2 s_i} rhs_i
        for (m, c) in col.iter_mut().enumerate() {
            let i = m + 1;
            *c = -(2.0 * g.s(i)).exp() * spectrum[i * g.n_theta + k];
        }
        col[0] -= vb / ds2;
        col[n_int - 1] -= va / ds2;
        let sub = vec![1.0 / ds2; n_int - 1];
        let sup = sub.clone();
        let diag = vec![-2.0 / ds2 + lam; n_int];
        solve_tridiag(&sub, &diag, &sup, &mut col);
        out[k] = vb;
        out[(g.n_s - 1) * g.n_theta + k] = va;
        for (m, c) in col.iter().enumerate() {
            out[(m + 1) * g.n_theta + k] = *c;
        }
    }
    let v = theta_ifft(out, g);
    check_poisson_residual(&v, rhs, -1.0)?;
    Ok(v)
}

/// Interior residual of `sign * lap v - rhs` against the discrete operator.
fn check_poisson_residual(v: &ScalarField, rhs: &ScalarField, sign: f64) -> Result<()> {
    let lap = calculus::laplacian(v);
    let scale = rhs.max_abs().max(1.0);
    let mut res = 0.0_f64;
    for i in 1..v.grid.n_s - 1 {
        for j in 0..v.grid.n_theta {
            res = res.max((sign * lap.at(i, j) - rhs.at(i, j)).abs());
        }
    }
    if res > SOLVER_TOL * scale * 1e2 {
        return Err(Error::SolverDivergence { residual: res });
    }
    Ok(())
}

/// Diagnostics attached to a Neumann solve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NeumannDiagnostics {
    /// Solvability defect `int rhs dx - (flux integrals)`; it is subtracted
    /// uniformly from the right-hand side before solving.
    pub compatibility_defect: f64,
}

/// Solves `lap v = rhs` with `dv/dnu = flux_a` on the outer and `flux_b` on
/// the inner circle (`nu` the outward normal). Returns the mean-zero
/// representative together with the compatibility defect.
pub fn poisson_neumann(
    rhs: &ScalarField,
    flux_a: &[f64],
    flux_b: &[f64],
) -> Result<(ScalarField, NeumannDiagnostics)> {
    let g = rhs.grid;
    assert_eq!(flux_a.len(), g.n_theta);
    assert_eq!(flux_b.len(), g.n_theta);
    let ds = g.ds();
    let ds2 = ds * ds;
    let dt = g.dtheta();

    // Divergence theorem balance; the defect is spread uniformly.
    let flux_total: f64 =
        flux_a.iter().sum::<f64>() * g.a * dt + flux_b.iter().sum::<f64>() * g.b * dt;
    let area = integrate_area(&ScalarField::from_fn(g, |_, _| 1.0));
    let defect = integrate_area(rhs) - flux_total;
    let shift = defect / area;
    let rhs_adj = rhs.map(|v| v - shift);

    // d_s v at the two boundary rows, from the normal fluxes.
    let g0: Vec<f64> = flux_b.iter().map(|f| -g.b * f).collect();
    let g1: Vec<f64> = flux_a.iter().map(|f| g.a * f).collect();

    let spectrum = theta_fft(&rhs_adj);
    let g0_hat = row_fft(g.n_theta, &g0);
    let g1_hat = row_fft(g.n_theta, &g1);

    let n = g.n_s;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..g.n_theta {
        let lam = lambda_theta(g, k);
        for (i, c) in col.iter_mut().enumerate() {
            *c = (2.0 * g.s(i)).exp() * spectrum[i * g.n_theta + k];
        }
        // ghost-node Neumann rows (second order)
        col[0] += 2.0 * g0_hat[k] / ds;
        col[n - 1] -= 2.0 * g1_hat[k] / ds;
        let mut sub = vec![1.0 / ds2; n - 1];
        let mut sup = vec![1.0 / ds2; n - 1];
        let mut diag = vec![-2.0 / ds2 + lam; n];
        sup[0] = 2.0 / ds2;
        sub[n - 2] = 2.0 / ds2;
        if k == 0 {
            // singular mode: pin v(s_min) = 0, then shift to zero mean below
            diag[0] = 1.0;
            sup[0] = 0.0;
            col[0] = Complex64::new(0.0, 0.0);
        }
        solve_tridiag(&sub, &diag, &sup, &mut col);
        for (i, c) in col.iter().enumerate() {
            out[i * g.n_theta + k] = *c;
        }
    }
    let mut v = theta_ifft(out, g);
    let mean = integrate_area(&v) / area;
    for val in &mut v.values {
        *val -= mean;
    }
    check_poisson_residual(&v, &rhs_adj, 1.0)?;
    Ok((v, NeumannDiagnostics { compatibility_defect: defect }))
}

// ---------------------------------------------------------------------------
// Least-squares potential: argmin_v || dv - eta ||^2 in the flat (s, theta)
// chart, with trapezoid weights in s. Exact inverse of the discrete
// differential: if eta = dv* then v* is recovered up to a constant.

/// `eta` is given by its `ds` and `dtheta` coefficients.
pub fn least_squares_potential(eta_s: &ScalarField, eta_theta: &ScalarField) -> Result<ScalarField> {
    if eta_s.grid != eta_theta.grid {
        return Err(Error::GridMismatch);
    }
    let g = eta_s.grid;
    let n = g.n_s;
    let ds = g.ds();

    // s-derivative matrix rows as (col, coeff) triples
    let row_coeffs = |i: usize| -> Vec<(usize, f64)> {
        if i == 0 {
            vec![(0, -3.0 / (2.0 * ds)), (1, 4.0 / (2.0 * ds)), (2, -1.0 / (2.0 * ds))]
        } else if i == n - 1 {
            vec![
                (n - 3, 1.0 / (2.0 * ds)),
                (n - 2, -4.0 / (2.0 * ds)),
                (n - 1, 3.0 / (2.0 * ds)),
            ]
        } else {
            vec![(i - 1, -1.0 / (2.0 * ds)), (i + 1, 1.0 / (2.0 * ds))]
        }
    };
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };

    // A = D^T W D, pentadiagonal
    let mut diag = vec![0.0; n];
    let mut off1 = vec![0.0; n - 1];
    let mut off2 = vec![0.0; n - 2];
    for m in 0..n {
        let w = weight(m);
        let row = row_coeffs(m);
        for &(i, ci) in &row {
            for &(j, cj) in &row {
                if i == j {
                    diag[i] += w * ci * cj;
                } else if j == i + 1 {
                    off1[i] += w * ci * cj;
                } else if j == i + 2 {
                    off2[i] += w * ci * cj;
                }
            }
        }
    }

    let es_hat = theta_fft(eta_s);
    let et_hat = theta_fft(eta_theta);
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..g.n_theta {
        let sig = sigma_theta(g, k);
        // b = D^T W eta_s - i sigma W eta_theta
        for c in col.iter_mut() {
            *c = Complex64::new(0.0, 0.0);
        }
        for m in 0..n {
            let w = weight(m);
            let es = es_hat[m * g.n_theta + k];
            for &(i, ci) in &row_coeffs(m) {
                col[i] += w * ci * es;
            }
            col[m] -= Complex64::i() * sig * w * et_hat[m * g.n_theta + k];
        }
        if k == 0 {
            // kernel = constants; pin index 0 and solve the reduced system
            let mut red: Vec<Complex64> = col[1..].to_vec();
            let d: Vec<f64> = diag[1..].to_vec();
            let o1: Vec<f64> = off1[1..].to_vec();
            let o2: Vec<f64> = off2[1..].to_vec();
            solve_penta(&d, &o1, &o2, &mut red);
            col[0] = Complex64::new(0.0, 0.0);
            col[1..].copy_from_slice(&red);
        } else {
            // add sigma^2 W on the diagonal
            let d: Vec<f64> =
                diag.iter().enumerate().map(|(i, v)| v + sig * sig * weight(i)).collect();
            solve_penta(&d, &off1, &off2, &mut col);
        }
        for (i, c) in col.iter().enumerate() {
            out[i * g.n_theta + k] = *c;
        }
    }
    Ok(theta_ifft(out, g))
}

// ---------------------------------------------------------------------------
// Explicit harmonic extension.

/// The harmonic function on the annulus with constant boundary values
/// `c_a` on the outer and `c_b` on the inner circle:
/// `(c_a - c_b)/log(a/b) * log r + (c_b log a - c_a log b)/log(a/b)`.
pub fn harmonic_annulus(grid: GridSpec, c_a: f64, c_b: f64) -> ScalarField {
    let l = (grid.a / grid.b).ln();
    let slope = (c_a - c_b) / l;
    let offset = (c_b * grid.a.ln() - c_a * grid.b.ln()) / l;
    ScalarField::from_fn(grid, |s, _| slope * s + offset)
}

// ---------------------------------------------------------------------------
// Wente machinery.

/// Solution of the compensated-compactness problem
/// `-lap v = sum_k grad a^k . grad^perp b^k`, `v = 0` on the boundary,
/// together with the two constants under audit.
#[derive(Clone, Debug)]
pub struct WenteSolution {
    pub v: ScalarField,
    pub sup_norm: f64,
    pub grad_norm: f64,
    /// `(1/2pi) sum_k ||grad a^k|| ||grad b^k||`
    pub bound_infty: f64,
    /// `sqrt(3/(64 pi)) sum_k ||grad a^k|| ||grad b^k||`
    pub bound_l2: f64,
}

/// Pointwise Jacobian `grad a . grad^perp b = e^{-2s}(a_s b_theta - a_theta b_s)`.
pub fn jacobian_pairing(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let g = a.grid;
    let a_s = d_s(a);
    let a_t = d_theta(a);
    let b_s = d_s(b);
    let b_t = d_theta(b);
    let mut out = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let e = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            *out.at_mut(i, j) =
                e * (a_s.at(i, j) * b_t.at(i, j) - a_t.at(i, j) * b_s.at(i, j));
        }
    }
    Ok(out)
}

/// Componentwise Wente solve for two ambient fields; `v = sum_k v^k` with
/// each `v^k` a zero-boundary Dirichlet solution.
pub fn wente_solve(a: &AmbientField, b: &AmbientField) -> Result<WenteSolution> {
    if a.grid != b.grid || a.dim != b.dim {
        return Err(Error::GridMismatch);
    }
    let g = a.grid;
    let zero = vec![0.0; g.n_theta];
    let mut v = ScalarField::zeros(g);
    let mut cross = 0.0;
    for k in 0..a.dim {
        let ak = a.component(k);
        let bk = b.component(k);
        let rhs = jacobian_pairing(&ak, &bk)?;
        let vk = poisson_dirichlet(&rhs, &zero, &zero)?;
        v = v.zip(&vk, |x, y| x + y)?;
        let na = integrate_area(&grad_norm_sq(&ak)).max(0.0).sqrt();
        let nb = integrate_area(&grad_norm_sq(&bk)).max(0.0).sqrt();
        cross += na * nb;
    }
    let sup_norm = v.max_abs();
    let grad_norm = integrate_area(&grad_norm_sq(&v)).max(0.0).sqrt();
    Ok(WenteSolution {
        v,
        sup_norm,
        grad_norm,
        bound_infty: cross / std::f64::consts::TAU,
        bound_l2: (3.0 / (64.0 * std::f64::consts::PI)).sqrt() * cross,
    })
}

/// One sample of the Wente-constant audit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AuditRow {
    pub sample: usize,
    pub seed: u64,
    pub sup_ratio: f64,
    pub grad_ratio: f64,
    pub bound_inf: f64,
    pub bound_l2: f64,
}

/// Result of auditing the constants `1/2pi` and `sqrt(3/64pi)` on random
/// band-limited pairs.
#[derive(Clone, Debug)]
pub struct WenteAudit {
    pub rows: Vec<AuditRow>,
    pub max_sup_ratio: f64,
    pub max_grad_ratio: f64,
    /// Sample index attaining `max_sup_ratio`.
    pub worst_sample: usize,
}

/// Random smooth scalar field, band-limited to theta-modes `<= n_theta/4`
/// and s-modes vanishing at the boundary (so the field extends by zero).
fn random_band_limited(grid: GridSpec, rng: &mut impl Rng) -> ScalarField {
    let k_max = (grid.n_theta / 4).min(8);
    let m_max = (grid.n_s / 4).min(8);
    let l = grid.s_max() - grid.s_min();
    let mut terms = Vec::new();
    for m in 1..=m_max {
        for k in 0..=k_max {
            let decay = 1.0 / ((1 + k + m) as f64).powi(2);
            let c: f64 = rng.gen_range(-1.0..1.0) * decay;
            let d: f64 = rng.gen_range(-1.0..1.0) * decay;
            terms.push((m, k, c, d));
        }
    }
    ScalarField::from_fn(grid, |s, t| {
        let x = std::f64::consts::PI * (s - grid.s_min()) / l;
        terms
            .iter()
            .map(|&(m, k, c, d)| {
                (m as f64 * x).sin() * (c * (k as f64 * t).cos() + d * (k as f64 * t).sin())
            })
            .sum()
    })
}

/// Runs `n_samples` random Wente solves and reports the worst ratios of the
/// measured norms to `||grad a|| ||grad b||`.
pub fn wente_audit(grid: GridSpec, n_samples: usize, seed: u64) -> Result<WenteAudit> {
    assert!(n_samples >= 1);
    let mut rows = Vec::with_capacity(n_samples);
    let mut max_sup = 0.0_f64;
    let mut max_grad = 0.0_f64;
    let mut worst = 0;
    for sample in 0..n_samples {
        let sample_seed = seed.wrapping_add(sample as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let a = random_band_limited(grid, &mut rng);
        let b = random_band_limited(grid, &mut rng);
        let a_amb = AmbientField { grid, dim: 1, values: a.values };
        let b_amb = AmbientField { grid, dim: 1, values: b.values };
        let sol = wente_solve(&a_amb, &b_amb)?;
        let cross = sol.bound_infty * std::f64::consts::TAU;
        let (sup_ratio, grad_ratio) = if cross > 0.0 {
            (sol.sup_norm / cross, sol.grad_norm / cross)
        } else {
            (0.0, 0.0)
        };
        if sup_ratio > max_sup {
            max_sup = sup_ratio;
            worst = sample;
        }
        max_grad = max_grad.max(grad_ratio);
        rows.push(AuditRow {
            sample,
            seed: sample_seed,
            sup_ratio,
            grad_ratio,
            bound_inf: sol.bound_infty,
            bound_l2: sol.bound_l2,
        });
    }
    Ok(WenteAudit { rows, max_sup_ratio: max_sup, max_grad_ratio: max_grad, worst_sample: worst })
}

// ---------------------------------------------------------------------------
// Hodge decomposition with harmonic period.

/// Decomposition `star omega = dv + alpha dtheta` of a 1-form whose star is
/// closed; `alpha` is the period around the hole.
#[derive(Clone, Debug)]
pub struct HodgeParts {
    /// Single-valued potential, normalized `v(log a, 0) = 0`.
    pub v: ScalarField,
    pub alpha: f64,
    /// Standard deviation of the per-circle loop integrals of `star omega`,
    /// a closedness diagnostic.
    pub closedness_spread: f64,
}

/// Splits `star omega` into an exact part `dv` and the harmonic period
/// `alpha dtheta`. Errors with `NotClosed` when the loop integrals of
/// `star omega` disagree across s-levels by more than `tol`.
pub fn hodge_decompose(omega: &OneForm, tol: f64) -> Result<HodgeParts> {
    let g = omega.grid();
    let star = hodge_star(omega);
    let inv_tau = 1.0 / std::f64::consts::TAU;
    let loops: Vec<f64> =
        (0..g.n_s).map(|i| loop_integral(&star, i).unwrap() * inv_tau).collect();
    let alpha = loops.iter().sum::<f64>() / g.n_s as f64;
    let spread = (loops.iter().map(|l| (l - alpha).powi(2)).sum::<f64>() / g.n_s as f64).sqrt();
    if spread > tol {
        return Err(Error::NotClosed { spread, limit: tol });
    }
    // eta = star omega - alpha dtheta, expressed in the (ds, dtheta) basis
    let eta_s = ScalarField {
        grid: g,
        values: (0..g.len())
            .map(|n| star.w_r.values[n] * g.r(n / g.n_theta))
            .collect(),
    };
    let eta_t = star.w_theta.map(|w| w - alpha);
    let mut v = least_squares_potential(&eta_s, &eta_t)?;
    let anchor = v.at(g.n_s - 1, 0);
    for val in &mut v.values {
        *val -= anchor;
    }
    Ok(HodgeParts { v, alpha, closedness_spread: spread })
}
