//! Catalog of conformal immersions of the annulus and their derived
//! geometry: conformal factor, second fundamental form, curvatures, Gauss
//! map.

use crate::calculus::{
    d_r_ambient, d_theta_ambient, exterior_derivative, grad_norm_sq_ambient, laplacian,
    laplacian_ambient,
};
use crate::error::{Error, Result};
use crate::field::{AmbientField, OneForm, ScalarField};
use crate::grid::GridSpec;
use crate::weierstrass::{self, WeierstrassData};

/// Conformal immersion `f` of the annulus into `R^n`, together with its
/// analytic conformal factor `u` (so `|grad f|^2 = 2 e^{2u}`).
///
/// `theta_jump`, when present, is the deck transformation of a multivalued
/// immersion: `f(s, theta + 2pi) = f(s, theta) + theta_jump`. Derivatives in
/// `theta` account for it at the seam.
#[derive(Clone, Debug)]
pub struct Immersion {
    pub grid: GridSpec,
    pub dim: usize,
    pub f: AmbientField,
    pub u: ScalarField,
    pub theta_jump: Option<Vec<f64>>,
    pub name: String,
}

impl Immersion {
    pub fn jump(&self) -> Option<&[f64]> {
        self.theta_jump.as_deref()
    }

    /// `e^{2u}` sampled from the stored analytic conformal factor.
    pub fn conformal_weight(&self) -> ScalarField {
        self.u.map(|u| (2.0 * u).exp())
    }
}

/// Samples a catalog surface. Names: `flat`, `log_cylinder` (slope
/// parameter `c`), `catenoid`, `enneper`.
pub fn sample_catalog(name: &str, c: f64, grid: GridSpec) -> Result<Immersion> {
    match name {
        "flat" => Ok(Immersion {
            grid,
            dim: 3,
            f: AmbientField::from_fn(grid, 3, |s, t, out| {
                let r = s.exp();
                out[0] = r * t.cos();
                out[1] = r * t.sin();
                out[2] = 0.0;
            }),
            u: ScalarField::zeros(grid),
            theta_jump: None,
            name: "flat".into(),
        }),
        "log_cylinder" => {
            let ec = c.exp();
            Ok(Immersion {
                grid,
                dim: 3,
                f: AmbientField::from_fn(grid, 3, |s, t, out| {
                    out[0] = ec * s;
                    out[1] = ec * t;
                    out[2] = 0.0;
                }),
                u: ScalarField::from_fn(grid, |s, _| c - s),
                theta_jump: Some(vec![0.0, std::f64::consts::TAU * ec, 0.0]),
                name: "log_cylinder".into(),
            })
        }
        "catenoid" => Ok(Immersion {
            grid,
            dim: 3,
            f: AmbientField::from_fn(grid, 3, |s, t, out| {
                out[0] = s.cosh() * t.cos();
                out[1] = s.cosh() * t.sin();
                out[2] = s;
            }),
            u: ScalarField::from_fn(grid, |s, _| s.cosh().ln() - s),
            theta_jump: None,
            name: "catenoid".into(),
        }),
        "enneper" => {
            let mut imm = weierstrass::weierstrass_generate(&WeierstrassData::enneper(), grid)?;
            imm.name = "enneper".into();
            Ok(imm)
        }
        other => Err(Error::UnknownSurface(other.to_string())),
    }
}

/// Machine floor under which `|f_r|^2` counts as a branch point.
const DEGENERACY_FLOOR: f64 = 1e-30;

/// Recomputes the conformal factor `u = (1/2) log |f_r|^2` from finite
/// differences and measures the worst conformality defect, normalized by
/// `e^{2u}`.
pub fn conformal_data(imm: &Immersion) -> Result<(ScalarField, f64)> {
    let g = imm.grid;
    let f_r = d_r_ambient(&imm.f);
    let f_t = d_theta_ambient(&imm.f, imm.jump());
    let fr2 = f_r.norm_sq();
    let ft2 = f_t.norm_sq();
    let cross = f_r.dot(&f_t)?;
    let min_fr_sq = fr2.values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min_fr_sq < DEGENERACY_FLOOR {
        return Err(Error::DegenerateImmersion { min_fr_sq });
    }
    let u = fr2.map(|v| 0.5 * v.ln());
    let mut residual = 0.0_f64;
    for i in 0..g.n_s {
        let rinv2 = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            let e2u = fr2.at(i, j);
            let defect = (fr2.at(i, j) - rinv2 * ft2.at(i, j))
                .abs()
                .max(cross.at(i, j).abs());
            residual = residual.max(defect / e2u);
        }
    }
    Ok((u, residual))
}

/// Normal-valued second fundamental form in polar coordinates.
#[derive(Clone, Debug)]
pub struct SecondFundamentalForm {
    pub a_rr: AmbientField,
    pub a_rtheta: AmbientField,
    pub a_thetatheta: AmbientField,
    /// `|A|^2 = e^{-4u}(|A_rr|^2 + 2 r^{-2}|A_rtheta|^2 + r^{-4}|A_tt|^2)`
    pub norm_sq: ScalarField,
}

/// Second fundamental form, Gauss curvature (two evaluations), and mean
/// curvature vector.
#[derive(Clone, Debug)]
pub struct FundamentalForms {
    pub a: SecondFundamentalForm,
    /// Liouville evaluation `K = -e^{-2u} lap u`.
    pub k: ScalarField,
    /// Gauss-equation evaluation from `A`, for cross-checking.
    pub k_gauss: ScalarField,
    /// Mean curvature vector `H = e^{-2u} lap f`.
    pub h: AmbientField,
}

/// Removes the component of `f_xy` in the tangent plane spanned by the
/// orthonormalized pair `(e1, e2)`, leaving the normal part.
fn tangential_complement(
    f_xy: &AmbientField,
    e1: &AmbientField,
    e2: &AmbientField,
) -> Result<AmbientField> {
    let g = f_xy.grid;
    let p1 = f_xy.dot(e1)?;
    let p2 = f_xy.dot(e2)?;
    let mut out = f_xy.clone();
    for i in 0..g.n_s {
        for j in 0..g.n_theta {
            let c1 = p1.at(i, j);
            let c2 = p2.at(i, j);
            let node = out.at_mut(i, j);
            for c in 0..node.len() {
                node[c] -= c1 * e1.at(i, j)[c] + c2 * e2.at(i, j)[c];
            }
        }
    }
    Ok(out)
}

/// Computes `A`, `K`, and `H` by tangential projection of the second
/// derivatives of `f`. Requires the conformality residual to be within
/// `10 tau`.
pub fn fundamental_forms(imm: &Immersion) -> Result<FundamentalForms> {
    let g = imm.grid;
    let (_, residual) = conformal_data(imm)?;
    let limit = 10.0 * g.tau();
    if residual > limit {
        return Err(Error::NotConformal { residual, limit });
    }
    let f_r = d_r_ambient(&imm.f);
    let f_t = d_theta_ambient(&imm.f, imm.jump());
    let f_rr = d_r_ambient(&f_r);
    let f_rt = d_r_ambient(&f_t);
    let f_tt = d_theta_ambient(&f_t, None);

    let (e1, e2) = tangent_frame_fields(imm)?;
    let a_rr = tangential_complement(&f_rr, &e1, &e2)?;
    let a_rt = tangential_complement(&f_rt, &e1, &e2)?;
    let a_tt = tangential_complement(&f_tt, &e1, &e2)?;

    let nrr = a_rr.norm_sq();
    let nrt = a_rt.norm_sq();
    let ntt = a_tt.norm_sq();
    let dot_rr_tt = a_rr.dot(&a_tt)?;
    let mut norm_sq = ScalarField::zeros(g);
    let mut k_gauss = ScalarField::zeros(g);
    for i in 0..g.n_s {
        let rinv2 = (-2.0 * g.s(i)).exp();
        for j in 0..g.n_theta {
            let e4u = (4.0 * imm.u.at(i, j)).exp();
            *norm_sq.at_mut(i, j) = (nrr.at(i, j)
                + 2.0 * rinv2 * nrt.at(i, j)
                + rinv2 * rinv2 * ntt.at(i, j))
                / e4u;
            *k_gauss.at_mut(i, j) =
                rinv2 * (dot_rr_tt.at(i, j) - nrt.at(i, j)) / e4u;
        }
    }
    let k = laplacian(&imm.u)
        .zip(&imm.u, |lap, u| -(-2.0 * u).exp() * lap)?;
    let lap_f = laplacian_ambient(&imm.f, imm.jump());
    let e2u = imm.conformal_weight();
    let mut h = lap_f;
    for n in 0..g.len() {
        let w = 1.0 / e2u.values[n];
        for c in 0..h.dim {
            h.values[n * h.dim + c] *= w;
        }
    }
    Ok(FundamentalForms {
        a: SecondFundamentalForm { a_rr, a_rtheta: a_rt, a_thetatheta: a_tt, norm_sq },
        k,
        k_gauss,
        h,
    })
}

/// Pluecker image of the tangent plane and its Dirichlet energy density.
#[derive(Clone, Debug)]
pub struct GaussMapField {
    /// Unit bivector field, `n(n-1)/2` components in lexicographic `(i, j)`,
    /// `i < j`, order.
    pub x: AmbientField,
    /// `|grad X|^2` in the flat domain metric.
    pub energy_density: ScalarField,
    /// Curvature of the tangent-plane field, an independent evaluation of
    /// `K e^{2u}`.
    pub kappa: ScalarField,
}

/// Orthonormalized tangent pair `(e1, e2)` of an immersion (Gram-Schmidt
/// applied to `(f_r, r^{-1} f_theta)`).
pub fn tangent_frame_fields(imm: &Immersion) -> Result<(AmbientField, AmbientField)> {
    let g = imm.grid;
    let f_r = d_r_ambient(&imm.f);
    let f_t = d_theta_ambient(&imm.f, imm.jump());
    let mut e1 = f_r;
    let mut e2 = AmbientField::zeros(g, imm.dim);
    for i in 0..g.n_s {
        let rinv = (-g.s(i)).exp();
        for j in 0..g.n_theta {
            let v1 = e1.at_mut(i, j);
            let n1 = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n1 * n1 < DEGENERACY_FLOOR {
                return Err(Error::DegenerateImmersion { min_fr_sq: n1 * n1 });
            }
            for x in v1.iter_mut() {
                *x /= n1;
            }
            let v1 = e1.at(i, j).to_vec();
            let v2 = e2.at_mut(i, j);
            let ft = f_t.at(i, j);
            let proj: f64 = (0..ft.len()).map(|c| rinv * ft[c] * v1[c]).sum();
            for c in 0..ft.len() {
                v2[c] = rinv * ft[c] - proj * v1[c];
            }
            let n2 = v2.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n2 * n2 < DEGENERACY_FLOOR {
                return Err(Error::DegenerateImmersion { min_fr_sq: n2 * n2 });
            }
            for x in v2.iter_mut() {
                *x /= n2;
            }
        }
    }
    Ok((e1, e2))
}

/// Plucker wedge `e1 ^ e2`, components indexed lexicographically by pairs
/// `i < j` of ambient coordinates.
pub fn wedge_field(e1: &AmbientField, e2: &AmbientField) -> Result<AmbientField> {
    if e1.grid != e2.grid || e1.dim != e2.dim {
        return Err(Error::GridMismatch);
    }
    let g = e1.grid;
    let n = e1.dim;
    let wedge_dim = n * (n - 1) / 2;
    let mut x = AmbientField::zeros(g, wedge_dim);
    for node in 0..g.len() {
        let v1 = &e1.values[node * n..(node + 1) * n];
        let v2 = &e2.values[node * n..(node + 1) * n];
        let out = &mut x.values[node * wedge_dim..(node + 1) * wedge_dim];
        let mut c = 0;
        for i in 0..n {
            for j in i + 1..n {
                out[c] = v1[i] * v2[j] - v1[j] * v2[i];
                c += 1;
            }
        }
    }
    Ok(x)
}

/// Gauss map `X = e1 wedge e2` with energy density and curvature.
pub fn gauss_map(imm: &Immersion) -> Result<GaussMapField> {
    let g = imm.grid;
    let (_, residual) = conformal_data(imm)?;
    let limit = 10.0 * g.tau();
    if residual > limit {
        return Err(Error::NotConformal { residual, limit });
    }
    let (e1, e2) = tangent_frame_fields(imm)?;
    let x = wedge_field(&e1, &e2)?;
    let energy_density = grad_norm_sq_ambient(&x, None);
    // curvature 2-form of the tangent connection: d<de1, e2> = -K e^{2u} dx
    let e1_r = d_r_ambient(&e1);
    let e1_t = d_theta_ambient(&e1, None);
    let omega = OneForm::new(e1_r.dot(&e2)?, e1_t.dot(&e2)?)?;
    let ext = exterior_derivative(&omega);
    let kappa = ScalarField {
        grid: g,
        values: (0..g.len())
            .map(|m| -ext.values[m] * (-g.s(m / g.n_theta)).exp())
            .collect(),
    };
    Ok(GaussMapField { x, energy_density, kappa })
}
