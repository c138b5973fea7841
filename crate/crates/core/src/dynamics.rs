//! Right-hand sides of the coupled Q-tensor / velocity system in two
//! dimensions:
//!
//! ```text
//! Q_t = -w·∇Q + (Ω_w Q - Q Ω_w) + λ|Q| D_w + Γ H
//! u_t = μΔu + P[ -w·∇u + ∇·R_ε(QΔQ - ΔQQ - ∇Q⊙∇Q - λ|Q|H + κQ)
//!                - ε R_ε(∂_α Q : (w·∇Q) |w·∇Q|) + ε ∇·R_ε(∇w |∇w|^2) ]
//! ```
//!
//! with `w = R_ε u` (so `w = u` in direct mode), `(∇u)_{αβ} = ∂_β u_α`,
//! `D`, `Ω` its symmetric and antisymmetric parts, and
//! `(∇Q⊙∇Q)_{αβ} = ∂_α Q_{γδ} ∂_β Q_{γδ}`. In Friedrichs mode both right-hand
//! sides are further projected by `J_n`, and `H` is replaced by `J_n H`.
//!
//! Every product is formed on the grid and dealiased. The molecular field
//! used throughout is the dealiased one, the exact gradient of the grid
//! free energy on the dealiased state space.

use alloc::vec::Vec;

use crate::spectral::{
    check_grid, Grid2D, QTensorField, ScalarField, Spectral, Spectrum, VelocityField,
};
use crate::tensor::{molecular_field_full, Matrix, Mode, ModelParams, QTensor};
use crate::{Error, Result};

/// Physical-space state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFields {
    pub t: f64,
    pub q: QTensorField,
    pub u: VelocityField,
}

/// Physical-space tendencies.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsFields {
    pub dq: QTensorField,
    pub du: VelocityField,
}

/// Spectral state: `(q11, q12)` and `(ux, uy)` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub t: f64,
    pub q: [Spectrum; 2],
    pub u: [Spectrum; 2],
}

/// Spectral tendencies.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRhs {
    pub q: [Spectrum; 2],
    pub u: [Spectrum; 2],
}

/// Pointwise strain and vorticity of a 2D velocity field. `D` is
/// symmetric, `Ω` antisymmetric with `Ω12 = omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainVorticity {
    pub d11: ScalarField,
    pub d12: ScalarField,
    pub d22: ScalarField,
    pub omega: ScalarField,
}

impl StateFields {
    pub fn zeros(grid: Grid2D) -> Self {
        StateFields {
            t: 0.0,
            q: QTensorField::zeros(grid),
            u: VelocityField::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.q.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.u.is_finite() && self.t.is_finite()
    }
}

impl SpectralState {
    pub fn zeros(grid: Grid2D) -> Self {
        SpectralState {
            t: 0.0,
            q: [Spectrum::zeros(grid), Spectrum::zeros(grid)],
            u: [Spectrum::zeros(grid), Spectrum::zeros(grid)],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q
            .iter()
            .chain(self.u.iter())
            .all(|s| s.data.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}

/// `D = (∇u + ∇u^T)/2`, `Ω = (∇u - ∇u^T)/2` with `(∇u)_{αβ} = ∂_β u_α`.
pub fn strain_vorticity(sp: &Spectral, u: &VelocityField) -> Result<StrainVorticity> {
    check_grid(&sp.grid(), &u.grid())?;
    let [u1x, u1y] = sp.gradient(&u.ux)?;
    let [u2x, u2y] = sp.gradient(&u.uy)?;
    let n = u1x.data.len();
    let mut d12 = ScalarField::zeros(sp.grid());
    let mut omega = ScalarField::zeros(sp.grid());
    for i in 0..n {
        d12.data[i] = 0.5 * (u1y.data[i] + u2x.data[i]);
        omega.data[i] = 0.5 * (u1y.data[i] - u2x.data[i]);
    }
    Ok(StrainVorticity {
        d11: u1x,
        d12,
        d22: u2y,
        omega,
    })
}

/// Discrete model: a transform workspace plus the constants.
#[derive(Debug, Clone)]
pub struct Model {
    sp: Spectral,
    p: ModelParams,
}

/// Physical fields of the state and its derivatives, reused by the
/// right-hand side and the diagnostics.
pub(crate) struct Derived {
    pub q11: Vec<f64>,
    pub q12: Vec<f64>,
    pub q11x: Vec<f64>,
    pub q11y: Vec<f64>,
    pub q12x: Vec<f64>,
    pub q12y: Vec<f64>,
    pub l11: Vec<f64>,
    pub l12: Vec<f64>,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
    pub w1x: Vec<f64>,
    pub w1y: Vec<f64>,
    pub w2x: Vec<f64>,
    pub w2y: Vec<f64>,
    /// Molecular field (spectral and physical).
    pub h_spec: [Spectrum; 2],
    pub h11: Vec<f64>,
    pub h12: Vec<f64>,
    /// Mollified velocity `w = R_ε u` in spectral space.
    pub w_spec: [Spectrum; 2],
}

impl Model {
    /// Validates the constants; in Friedrichs mode `n_trunc` must lie in the
    /// grid's dyadic range.
    pub fn new(grid: Grid2D, p: ModelParams) -> Result<Self> {
        p.validate()?;
        if p.mode == Mode::Friedrichs {
            let (lo, hi) = grid.trunc_range();
            if p.n_trunc < lo || p.n_trunc > hi {
                return Err(Error::InvalidParameter(alloc::format!(
                    "n_trunc = {} outside the grid's dyadic range {lo}..={hi}",
                    p.n_trunc
                )));
            }
        }
        Ok(Model {
            sp: Spectral::new(grid),
            p,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.sp.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    fn friedrichs(&self) -> bool {
        self.p.mode == Mode::Friedrichs
    }

    /// Applies `J_n` in Friedrichs mode, nothing otherwise.
    pub fn outer_truncate(&self, s: &mut Spectrum) {
        if self.friedrichs() {
            self.sp.truncate_spec(s, self.p.n_trunc, self.p.keep_mean);
        }
    }

    /// Plain transform of a physical state.
    pub fn to_spectral(&self, s: &StateFields) -> Result<SpectralState> {
        check_grid(&self.grid(), &s.grid())?;
        let (q0, q1) = self.sp.forward_pair(&s.q.q11.data, &s.q.q12.data);
        let (u0, u1) = self.sp.forward_pair(&s.u.ux.data, &s.u.uy.data);
        Ok(SpectralState {
            t: s.t,
            q: [q0, q1],
            u: [u0, u1],
        })
    }

    pub fn to_fields(&self, s: &SpectralState) -> StateFields {
        let (q11, q12) = self.sp.inverse_pair(&s.q[0], &s.q[1]);
        let (ux, uy) = self.sp.inverse_pair(&s.u[0], &s.u[1]);
        StateFields {
            t: s.t,
            q: QTensorField { q11, q12 },
            u: VelocityField { ux, uy },
        }
    }

    /// Maps initial data onto the discrete state space: dealiasing, Leray
    /// projection, plus `R_ε` (mollified) or `J_n R_ε` (Friedrichs).
    pub fn prepare(&self, s: &StateFields) -> Result<SpectralState> {
        let mut st = self.to_spectral(s)?;
        let eps = self.p.effective_eps();
        for f in st.q.iter_mut().chain(st.u.iter_mut()) {
            self.sp.dealias_spec(f);
            self.sp.mollify_spec(f, eps);
            self.outer_truncate(f);
        }
        let [a, b] = &mut st.u;
        self.sp.leray_spec(a, b);
        Ok(st)
    }

    /// `w = R_ε u`.
    pub fn mollified_velocity(&self, u: &[Spectrum; 2]) -> [Spectrum; 2] {
        let eps = self.p.effective_eps();
        let mut w = u.clone();
        for f in w.iter_mut() {
            self.sp.mollify_spec(f, eps);
        }
        w
    }

    /// `bulk(Q) = (a + c|Q|^2) Q` on the grid (the 2D bulk gradient).
    fn bulk_grid(&self, q11: &[f64], q12: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (a, c) = (self.p.a, self.p.c);
        let mut b11 = Vec::with_capacity(q11.len());
        let mut b12 = Vec::with_capacity(q11.len());
        for (x, y) in q11.iter().zip(q12) {
            let f = a + c * 2.0 * (x * x + y * y);
            b11.push(f * x);
            b12.push(f * y);
        }
        (b11, b12)
    }

    /// Discrete molecular field `ΔQ - X P(bulk(Q))`, with `X = J_n` in
    /// Friedrichs mode.
    pub fn molecular_field_spec(&self, q: &[Spectrum; 2]) -> [Spectrum; 2] {
        let (q11, q12) = self.sp.inverse_pair(&q[0], &q[1]);
        self.molecular_from_grid(q, &q11.data, &q12.data)
    }

    fn molecular_from_grid(&self, q: &[Spectrum; 2], q11: &[f64], q12: &[f64]) -> [Spectrum; 2] {
        let (b11, b12) = self.bulk_grid(q11, q12);
        let (mut g0, mut g1) = self.sp.forward_pair(&b11, &b12);
        let mut out = [self.sp.laplacian_spec(&q[0]), self.sp.laplacian_spec(&q[1])];
        for (o, g) in out.iter_mut().zip([&mut g0, &mut g1]) {
            self.sp.dealias_spec(g);
            self.outer_truncate(g);
            o.axpy(-1.0, g);
        }
        out
    }

    pub(crate) fn derive(&self, s: &SpectralState) -> Derived {
        let sp = &self.sp;
        let (q11, q12) = sp.inverse_pair(&s.q[0], &s.q[1]);
        let (q11x, q11y) = sp.inverse_pair(&sp.deriv_spec(&s.q[0], 0), &sp.deriv_spec(&s.q[0], 1));
        let (q12x, q12y) = sp.inverse_pair(&sp.deriv_spec(&s.q[1], 0), &sp.deriv_spec(&s.q[1], 1));
        let (l11, l12) = sp.inverse_pair(&sp.laplacian_spec(&s.q[0]), &sp.laplacian_spec(&s.q[1]));
        let w_spec = self.mollified_velocity(&s.u);
        let (wx, wy) = sp.inverse_pair(&w_spec[0], &w_spec[1]);
        let (w1x, w1y) =
            sp.inverse_pair(&sp.deriv_spec(&w_spec[0], 0), &sp.deriv_spec(&w_spec[0], 1));
        let (w2x, w2y) =
            sp.inverse_pair(&sp.deriv_spec(&w_spec[1], 0), &sp.deriv_spec(&w_spec[1], 1));
        let h_spec = self.molecular_from_grid(&s.q, &q11.data, &q12.data);
        let (h11, h12) = sp.inverse_pair(&h_spec[0], &h_spec[1]);
        Derived {
            q11: q11.data,
            q12: q12.data,
            q11x: q11x.data,
            q11y: q11y.data,
            q12x: q12x.data,
            q12y: q12y.data,
            l11: l11.data,
            l12: l12.data,
            wx: wx.data,
            wy: wy.data,
            w1x: w1x.data,
            w1y: w1y.data,
            w2x: w2x.data,
            w2y: w2y.data,
            h_spec,
            h11: h11.data,
            h12: h12.data,
            w_spec,
        }
    }

    /// Everything except the linear parts `ΓΔQ` and `μΔu`.
    pub fn nonlinear(&self, s: &SpectralState) -> Result<SpectralRhs> {
        let d = self.derive(s);
        self.nonlinear_from(s, &d)
    }

    pub(crate) fn nonlinear_from(&self, s: &SpectralState, d: &Derived) -> Result<SpectralRhs> {
        let sp = &self.sp;
        let p = &self.p;
        let eps = p.effective_eps();
        let n = d.q11.len();
        let flip = if p.hooks.flip_antisymmetric_stress {
            -1.0
        } else {
            1.0
        };

        let (u1x, u1y, u2x, u2y);
        let owned;
        if eps == 0.0 {
            (u1x, u1y, u2x, u2y) = (&d.w1x, &d.w1y, &d.w2x, &d.w2y);
        } else {
            let (ax, ay) = sp.inverse_pair(&sp.deriv_spec(&s.u[0], 0), &sp.deriv_spec(&s.u[0], 1));
            let (bx, by) = sp.inverse_pair(&sp.deriv_spec(&s.u[1], 0), &sp.deriv_spec(&s.u[1], 1));
            owned = [ax.data, ay.data, bx.data, by.data];
            (u1x, u1y, u2x, u2y) = (&owned[0], &owned[1], &owned[2], &owned[3]);
        }

        let mut nq11 = Vec::with_capacity(n);
        let mut nq12 = Vec::with_capacity(n);
        let mut s11 = Vec::with_capacity(n);
        let mut s12 = Vec::with_capacity(n);
        let mut s21 = Vec::with_capacity(n);
        let mut s22 = Vec::with_capacity(n);
        let mut adv1 = Vec::with_capacity(n);
        let mut adv2 = Vec::with_capacity(n);
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        if eps > 0.0 {
            t1.reserve(n);
            t2.reserve(n);
        }
        for i in 0..n {
            let (q11, q12) = (d.q11[i], d.q12[i]);
            let absq = libm::sqrt(2.0 * (q11 * q11 + q12 * q12));
            let (wx, wy) = (d.wx[i], d.wy[i]);
            let (w1x, w1y, w2x, w2y) = (d.w1x[i], d.w1y[i], d.w2x[i], d.w2y[i]);
            let (q11x, q11y, q12x, q12y) = (d.q11x[i], d.q11y[i], d.q12x[i], d.q12y[i]);

            // Q equation
            let a11 = wx * q11x + wy * q11y;
            let a12 = wx * q12x + wy * q12y;
            let omega = 0.5 * (w1y - w2x);
            let d11 = w1x;
            let d12 = 0.5 * (w1y + w2x);
            nq11.push(-a11 + 2.0 * q12 * omega + p.lambda * absq * d11);
            nq12.push(-a12 - 2.0 * q11 * omega + p.lambda * absq * d12);

            // stresses
            let anti = flip * 2.0 * (q11 * d.l12[i] - q12 * d.l11[i]);
            let g11 = 2.0 * (q11x * q11x + q12x * q12x);
            let g12 = 2.0 * (q11x * q11y + q12x * q12y);
            let g22 = 2.0 * (q11y * q11y + q12y * q12y);
            let (h11, h12) = (p.lambda * absq * d.h11[i], p.lambda * absq * d.h12[i]);
            let mut e11 = -g11 - h11 + p.kappa * q11;
            let mut e22 = -g22 + h11 - p.kappa * q11;
            let mut e12 = anti - g12 - h12 + p.kappa * q12;
            let mut e21 = -anti - g12 - h12 + p.kappa * q12;
            if eps > 0.0 {
                let gw2 = w1x * w1x + w1y * w1y + w2x * w2x + w2y * w2y;
                e11 += eps * w1x * gw2;
                e12 += eps * w1y * gw2;
                e21 += eps * w2x * gw2;
                e22 += eps * w2y * gw2;
                let m = libm::sqrt(2.0 * (a11 * a11 + a12 * a12));
                t1.push(2.0 * (q11x * a11 + q12x * a12) * m);
                t2.push(2.0 * (q11y * a11 + q12y * a12) * m);
            }
            s11.push(e11);
            s12.push(e12);
            s21.push(e21);
            s22.push(e22);
            adv1.push(wx * u1x[i] + wy * u1y[i]);
            adv2.push(wx * u2x[i] + wy * u2y[i]);
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&nq11) || !finite(&nq12) {
            return Err(Error::NonFinite {
                what: "Q-equation nonlinearity",
            });
        }
        if !finite(&s11) || !finite(&s12) || !finite(&s21) || !finite(&s22) {
            return Err(Error::NonFinite {
                what: "stress tensor",
            });
        }
        if !finite(&adv1) || !finite(&adv2) || !finite(&t1) || !finite(&t2) {
            return Err(Error::NonFinite {
                what: "velocity nonlinearity",
            });
        }

        // Q: X P[grid terms] + Γ(H - ΔQ)
        let (mut rq0, mut rq1) = sp.forward_pair(&nq11, &nq12);
        for (r, (h, q)) in [&mut rq0, &mut rq1]
            .into_iter()
            .zip(d.h_spec.iter().zip(s.q.iter()))
        {
            sp.dealias_spec(r);
            self.outer_truncate(r);
            r.axpy(p.gamma, h);
            r.axpy(p.gamma, &sp.laplacian_spec(q).scaled(-1.0));
        }

        // u: P X [ R_ε ∇·σ - ε R_ε T - w·∇u ]
        let (f11, f12) = sp.forward_pair(&s11, &s12);
        let (f21, f22) = sp.forward_pair(&s21, &s22);
        let mut ru0 = sp.divergence_spec(&f11, &f12);
        let mut ru1 = sp.divergence_spec(&f21, &f22);
        if eps > 0.0 {
            let (tt1, tt2) = sp.forward_pair(&t1, &t2);
            ru0.axpy(-eps, &tt1);
            ru1.axpy(-eps, &tt2);
        }
        sp.mollify_spec(&mut ru0, eps);
        sp.mollify_spec(&mut ru1, eps);
        let (a1, a2) = sp.forward_pair(&adv1, &adv2);
        ru0.axpy(-1.0, &a1);
        ru1.axpy(-1.0, &a2);
        for r in [&mut ru0, &mut ru1] {
            sp.dealias_spec(r);
            self.outer_truncate(r);
        }
        sp.leray_spec(&mut ru0, &mut ru1);
        Ok(SpectralRhs {
            q: [rq0, rq1],
            u: [ru0, ru1],
        })
    }

    /// Full right-hand side: nonlinear part plus `ΓΔQ` and `μΔu`.
    pub fn rhs_spec(&self, s: &SpectralState) -> Result<SpectralRhs> {
        let mut r = self.nonlinear(s)?;
        for (rq, q) in r.q.iter_mut().zip(&s.q) {
            rq.axpy(self.p.gamma, &self.sp.laplacian_spec(q));
        }
        for (ru, u) in r.u.iter_mut().zip(&s.u) {
            ru.axpy(self.p.mu, &self.sp.laplacian_spec(u));
        }
        Ok(r)
    }

    fn rhs_fields(&self, s: &StateFields) -> Result<(SpectralRhs, Grid2D)> {
        let st = self.to_spectral(s)?;
        Ok((self.rhs_spec(&st)?, self.grid()))
    }

    /// `∂_t Q` at a physical state (taken as given; not re-projected).
    pub fn q_rhs(&self, s: &StateFields) -> Result<QTensorField> {
        let (r, _) = self.rhs_fields(s)?;
        let (q11, q12) = self.sp.inverse_pair(&r.q[0], &r.q[1]);
        Ok(QTensorField { q11, q12 })
    }

    /// `∂_t u` at a physical state, Leray projected.
    pub fn u_rhs(&self, s: &StateFields) -> Result<VelocityField> {
        let (r, _) = self.rhs_fields(s)?;
        let (ux, uy) = self.sp.inverse_pair(&r.u[0], &r.u[1]);
        Ok(VelocityField { ux, uy })
    }

    pub fn assemble_rhs(&self, s: &StateFields) -> Result<RhsFields> {
        let (r, _) = self.rhs_fields(s)?;
        let (q11, q12) = self.sp.inverse_pair(&r.q[0], &r.q[1]);
        let (ux, uy) = self.sp.inverse_pair(&r.u[0], &r.u[1]);
        Ok(RhsFields {
            dq: QTensorField { q11, q12 },
            du: VelocityField { ux, uy },
        })
    }

    /// The two regularizing terms of the mollified momentum equation,
    /// `-ε P R_ε(∂_α Q : (w·∇Q)|w·∇Q|) + ε P ∇·R_ε(∇w |∇w|^2)` (spectral,
    /// dealiased; also truncated in Friedrichs mode).
    pub fn eps_terms_spec(&self, s: &SpectralState) -> [Spectrum; 2] {
        let sp = &self.sp;
        let eps = self.p.effective_eps();
        let g = self.grid();
        if eps == 0.0 {
            return [Spectrum::zeros(g), Spectrum::zeros(g)];
        }
        let d = self.derive(s);
        let n = d.q11.len();
        let mut v = [
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        ];
        for i in 0..n {
            let a11 = d.wx[i] * d.q11x[i] + d.wy[i] * d.q11y[i];
            let a12 = d.wx[i] * d.q12x[i] + d.wy[i] * d.q12y[i];
            let m = libm::sqrt(2.0 * (a11 * a11 + a12 * a12));
            v[0].push(2.0 * (d.q11x[i] * a11 + d.q12x[i] * a12) * m);
            v[1].push(2.0 * (d.q11y[i] * a11 + d.q12y[i] * a12) * m);
            let gw2 = d.w1x[i] * d.w1x[i]
                + d.w1y[i] * d.w1y[i]
                + d.w2x[i] * d.w2x[i]
                + d.w2y[i] * d.w2y[i];
            v[2].push(d.w1x[i] * gw2);
            v[3].push(d.w1y[i] * gw2);
            v[4].push(d.w2x[i] * gw2);
            v[5].push(d.w2y[i] * gw2);
        }
        let (t1, t2) = sp.forward_pair(&v[0], &v[1]);
        let (e11, e12) = sp.forward_pair(&v[2], &v[3]);
        let (e21, e22) = sp.forward_pair(&v[4], &v[5]);
        let mut r0 = sp.divergence_spec(&e11, &e12).scaled(eps);
        let mut r1 = sp.divergence_spec(&e21, &e22).scaled(eps);
        r0.axpy(-eps, &t1);
        r1.axpy(-eps, &t2);
        for r in [&mut r0, &mut r1] {
            sp.mollify_spec(r, eps);
            sp.dealias_spec(r);
            self.outer_truncate(r);
        }
        sp.leray_spec(&mut r0, &mut r1);
        [r0, r1]
    }

    pub fn eps_terms(&self, s: &StateFields) -> Result<VelocityField> {
        let st = self.to_spectral(s)?;
        let [a, b] = self.eps_terms_spec(&st);
        let (ux, uy) = self.sp.inverse_pair(&a, &b);
        Ok(VelocityField { ux, uy })
    }

    /// `(ε‖w·∇Q‖^3_{L^3}, ε‖∇w‖^4_{L^4})` by grid quadrature.
    pub fn eps_dissipations(&self, s: &SpectralState) -> (f64, f64) {
        let eps = self.p.effective_eps();
        if eps == 0.0 {
            return (0.0, 0.0);
        }
        let d = self.derive(s);
        eps_dissipations_from(&d, eps, self.grid().cell_area())
    }

    /// Largest `|tr|` of the assembled Q tendency when every term is built
    /// from full 3x3-capable matrices (ignores dealiasing, which is linear and
    /// cannot create a trace).
    pub fn rhs_shadow_trace(&self, s: &SpectralState) -> f64 {
        let d = self.derive(s);
        let p = &self.p;
        let mut worst: f64 = 0.0;
        for i in 0..d.q11.len() {
            let q = QTensor::new2(d.q11[i], d.q12[i]).full_matrix();
            let lap = QTensor::new2(d.l11[i], d.l12[i]).full_matrix();
            let mut grad_w = Matrix::zero(2);
            grad_w.m[0][0] = d.w1x[i];
            grad_w.m[0][1] = d.w1y[i];
            grad_w.m[1][0] = d.w2x[i];
            grad_w.m[1][1] = d.w2y[i];
            let dmat = grad_w.add(&grad_w.transpose()).scale(0.5);
            let om = grad_w.sub(&grad_w.transpose()).scale(0.5);
            let mut adv = Matrix::zero(2);
            adv.m[0][0] = d.wx[i] * d.q11x[i] + d.wy[i] * d.q11y[i];
            adv.m[0][1] = d.wx[i] * d.q12x[i] + d.wy[i] * d.q12y[i];
            adv.m[1][0] = adv.m[0][1];
            adv.m[1][1] = -adv.m[0][0];
            let h = molecular_field_full(&q, &lap, p);
            let rhs = adv
                .scale(-1.0)
                .sub(&q.mul(&om).sub(&om.mul(&q)))
                .add(&dmat.scale(p.lambda * q.frobenius_norm()))
                .add(&h.scale(p.gamma));
            worst = worst.max(libm::fabs(rhs.trace()));
        }
        worst
    }
}

pub(crate) fn eps_dissipations_from(d: &Derived, eps: f64, cell: f64) -> (f64, f64) {
    let mut cubic = 0.0;
    let mut quartic = 0.0;
    for i in 0..d.q11.len() {
        let a11 = d.wx[i] * d.q11x[i] + d.wy[i] * d.q11y[i];
        let a12 = d.wx[i] * d.q12x[i] + d.wy[i] * d.q12y[i];
        let m2 = 2.0 * (a11 * a11 + a12 * a12);
        cubic += m2 * libm::sqrt(m2);
        let gw2 =
            d.w1x[i] * d.w1x[i] + d.w1y[i] * d.w1y[i] + d.w2x[i] * d.w2x[i] + d.w2y[i] * d.w2y[i];
        quartic += gw2 * gw2;
    }
    (eps * cubic * cell, eps * quartic * cell)
}

/// Antisymmetric stress `QΔQ - ΔQQ` as its 12-entry, `2(q11 Δq12 - q12 Δq11)`
/// (sign flipped when the test hook is set).
pub fn antisymmetric_stress_12(p: &ModelParams, q11: f64, q12: f64, l11: f64, l12: f64) -> f64 {
    let s = 2.0 * (q11 * l12 - q12 * l11);
    if p.hooks.flip_antisymmetric_stress {
        -s
    } else {
        s
    }
}

/// Both sides of the co-rotation / antisymmetric-stress cancellation for
/// symmetric traceless `Q`, `Q'` and divergence-free `u`:
/// `((ΩQ' - Q'Ω), ΔQ)` and `(∇·(Q'ΔQ - ΔQ Q'), u)`.
pub fn corotation_terms(
    sp: &Spectral,
    p: &ModelParams,
    q: &[Spectrum; 2],
    qp: &[Spectrum; 2],
    u: &[Spectrum; 2],
) -> (f64, f64) {
    let (qp11, qp12) = sp.inverse_pair(&qp[0], &qp[1]);
    let (l11, l12) = sp.inverse_pair(&sp.laplacian_spec(&q[0]), &sp.laplacian_spec(&q[1]));
    let (u1y, u2x) = sp.inverse_pair(&sp.deriv_spec(&u[0], 1), &sp.deriv_spec(&u[1], 0));
    let n = l11.data.len();
    let mut lhs = 0.0;
    let mut s12 = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (qp11.data[i], qp12.data[i]);
        let omega = 0.5 * (u1y.data[i] - u2x.data[i]);
        // ΩQ' - Q'Ω = -(Q'Ω - ΩQ') = [[2bω, -2aω], [-2aω, -2bω]]
        let m11 = 2.0 * b * omega;
        let m12 = -2.0 * a * omega;
        lhs += 2.0 * (m11 * l11.data[i] + m12 * l12.data[i]);
        s12.push(antisymmetric_stress_12(p, a, b, l11.data[i], l12.data[i]));
    }
    lhs *= sp.grid().cell_area();
    // ∇·σ with σ = [[0, s], [-s, 0]]: f1 = ∂_y s, f2 = -∂_x s
    let ss = sp.forward_slice(&s12);
    let f1 = sp.deriv_spec(&ss, 1);
    let f2 = sp.deriv_spec(&ss, 0).scaled(-1.0);
    let rhs = f1.inner(&u[0]) + f2.inner(&u[1]);
    (lhs, rhs)
}

/// Both sides of `λ(|Q|D, H) = λ(|Q|H, ∇u)` for the dealiased molecular
/// field of `model`.
pub fn lambda_pair_terms(model: &Model, s: &SpectralState) -> (f64, f64) {
    let d = model.derive(s);
    let lam = model.params().lambda;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..d.q11.len() {
        let absq = libm::sqrt(2.0 * (d.q11[i] * d.q11[i] + d.q12[i] * d.q12[i]));
        let d11 = d.w1x[i];
        let d12 = 0.5 * (d.w1y[i] + d.w2x[i]);
        lhs += absq * 2.0 * (d11 * d.h11[i] + d12 * d.h12[i]);
        // H : ∇w = h11 (w1x - w2y) + h12 (w1y + w2x)
        rhs += absq * (d.h11[i] * (d.w1x[i] - d.w2y[i]) + d.h12[i] * (d.w1y[i] + d.w2x[i]));
    }
    let cell = model.grid().cell_area();
    (lam * lhs * cell, lam * rhs * cell)
}

/// Both sides of `(u·∇Q, ΔQ) = (∇·(∇Q⊙∇Q), u)`.
pub fn advection_pair_terms(model: &Model, s: &SpectralState) -> (f64, f64) {
    let sp = model.spectral();
    let d = model.derive(s);
    let n = d.q11.len();
    let mut lhs = 0.0;
    let mut g = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for i in 0..n {
        let a11 = d.wx[i] * d.q11x[i] + d.wy[i] * d.q11y[i];
        let a12 = d.wx[i] * d.q12x[i] + d.wy[i] * d.q12y[i];
        lhs += 2.0 * (a11 * d.l11[i] + a12 * d.l12[i]);
        let g11 = 2.0 * (d.q11x[i] * d.q11x[i] + d.q12x[i] * d.q12x[i]);
        let g12 = 2.0 * (d.q11x[i] * d.q11y[i] + d.q12x[i] * d.q12y[i]);
        let g22 = 2.0 * (d.q11y[i] * d.q11y[i] + d.q12y[i] * d.q12y[i]);
        g[0].push(g11);
        g[1].push(g12);
        g[2].push(g12);
        g[3].push(g22);
    }
    lhs *= model.grid().cell_area();
    let (f11, f12) = sp.forward_pair(&g[0], &g[1]);
    let (f21, f22) = sp.forward_pair(&g[2], &g[3]);
    let rhs = sp.divergence_spec(&f11, &f12).inner(&d.w_spec[0])
        + sp.divergence_spec(&f21, &f22).inner(&d.w_spec[1]);
    (lhs, rhs)
}

/// `(w·∇Q, Q)`, `(w·∇u, u)` and `(QΩ_w - Ω_wQ, Q)` with `w = R_ε u`; all
/// vanish for divergence-free `u`.
pub fn neutral_terms(model: &Model, s: &SpectralState) -> (f64, f64, f64) {
    let sp = model.spectral();
    let d = model.derive(s);
    let mut tq = 0.0;
    let mut tu = 0.0;
    let mut co = 0.0;
    let (ux, uy) = sp.inverse_pair(&s.u[0], &s.u[1]);
    let (u1x, u1y) = sp.inverse_pair(&sp.deriv_spec(&s.u[0], 0), &sp.deriv_spec(&s.u[0], 1));
    let (u2x, u2y) = sp.inverse_pair(&sp.deriv_spec(&s.u[1], 0), &sp.deriv_spec(&s.u[1], 1));
    for i in 0..d.q11.len() {
        let a11 = d.wx[i] * d.q11x[i] + d.wy[i] * d.q11y[i];
        let a12 = d.wx[i] * d.q12x[i] + d.wy[i] * d.q12y[i];
        tq += 2.0 * (a11 * d.q11[i] + a12 * d.q12[i]);
        let v1 = d.wx[i] * u1x.data[i] + d.wy[i] * u1y.data[i];
        let v2 = d.wx[i] * u2x.data[i] + d.wy[i] * u2y.data[i];
        tu += v1 * ux.data[i] + v2 * uy.data[i];
        let omega = 0.5 * (d.w1y[i] - d.w2x[i]);
        // QΩ - ΩQ = [[-2 q12 ω, 2 q11 ω], [2 q11 ω, 2 q12 ω]]
        co += 2.0 * (-2.0 * d.q12[i] * omega * d.q11[i] + 2.0 * d.q11[i] * omega * d.q12[i]);
    }
    let cell = model.grid().cell_area();
    (tq * cell, tu * cell, co * cell)
}
