//! Pointwise algebra on symmetric traceless tensors (the space `S_0^d`),
//! the Landau-de Gennes bulk potential and the molecular field.
//!
//! Only the independent components are stored, so symmetry and
//! tracelessness hold by construction. The full-matrix form is rebuilt on
//! demand and doubles as a "shadow" path for cross-checks.

use alloc::format;

use crate::{Error, Result};

/// Spatial dimension of a tensor: 2 or 3.
pub type Dim = usize;

/// A symmetric traceless `d x d` tensor stored by its independent components.
///
/// - `d = 2`: `(q11, q12)`, with `q22 = -q11`.
/// - `d = 3`: `(q11, q12, q13, q22, q23)`, with `q33 = -q11 - q22`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTensor {
    dim: Dim,
    comps: [f64; 5],
}

/// A dense `d x d` matrix, `d <= 3`. Entries outside `d x d` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix {
    pub dim: Dim,
    pub m: [[f64; 3]; 3],
}

impl QTensor {
    pub fn zero(dim: Dim) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        QTensor {
            dim,
            comps: [0.0; 5],
        }
    }

    pub fn new2(q11: f64, q12: f64) -> Self {
        QTensor {
            dim: 2,
            comps: [q11, q12, 0.0, 0.0, 0.0],
        }
    }

    pub fn new3(q11: f64, q12: f64, q13: f64, q22: f64, q23: f64) -> Self {
        QTensor {
            dim: 3,
            comps: [q11, q12, q13, q22, q23],
        }
    }

    /// Builds a tensor from its independent components; `comps.len()` must
    /// be 2 (2D) or 5 (3D).
    pub fn from_components(comps: &[f64]) -> Result<Self> {
        match comps.len() {
            2 => Ok(Self::new2(comps[0], comps[1])),
            5 => Ok(Self::new3(comps[0], comps[1], comps[2], comps[3], comps[4])),
            n => Err(Error::InvalidParameter(format!(
                "a Q-tensor has 2 (2D) or 5 (3D) independent components, got {n}"
            ))),
        }
    }

    /// Projects an arbitrary matrix onto `S_0^d` (symmetric part minus the
    /// trace part) and keeps the independent components.
    pub fn from_matrix(a: &Matrix) -> Self {
        let m = &a.m;
        let sym = |i: usize, j: usize| 0.5 * (m[i][j] + m[j][i]);
        match a.dim {
            2 => {
                let tr = m[0][0] + m[1][1];
                QTensor::new2(m[0][0] - 0.5 * tr, sym(0, 1))
            }
            _ => {
                let tr = m[0][0] + m[1][1] + m[2][2];
                QTensor::new3(
                    m[0][0] - tr / 3.0,
                    sym(0, 1),
                    sym(0, 2),
                    m[1][1] - tr / 3.0,
                    sym(1, 2),
                )
            }
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.comps[..self.n_comps()]
    }

    pub fn n_comps(&self) -> usize {
        if self.dim == 2 {
            2
        } else {
            5
        }
    }

    /// Reconstructs the full matrix. The last diagonal entry is the negative
    /// sum of the others, so the trace is exactly zero.
    pub fn full_matrix(&self) -> Matrix {
        let c = &self.comps;
        let mut m = [[0.0; 3]; 3];
        if self.dim == 2 {
            m[0][0] = c[0];
            m[0][1] = c[1];
            m[1][0] = c[1];
            m[1][1] = -c[0];
        } else {
            m[0][0] = c[0];
            m[0][1] = c[1];
            m[1][0] = c[1];
            m[0][2] = c[2];
            m[2][0] = c[2];
            m[1][1] = c[3];
            m[1][2] = c[4];
            m[2][1] = c[4];
            m[2][2] = -(c[0] + c[3]);
        }
        Matrix { dim: self.dim, m }
    }

    /// `tr(Q^2) = |Q|^2`, the squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        let c = &self.comps;
        if self.dim == 2 {
            2.0 * (c[0] * c[0] + c[1] * c[1])
        } else {
            let q33 = -(c[0] + c[3]);
            c[0] * c[0] + c[3] * c[3] + q33 * q33 + 2.0 * (c[1] * c[1] + c[2] * c[2] + c[4] * c[4])
        }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    /// Frobenius inner product `A : B` (the same as `tr(AB)` for symmetric
    /// tensors).
    pub fn dot(&self, other: &QTensor) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let (a, b) = (&self.comps, &other.comps);
        if self.dim == 2 {
            2.0 * (a[0] * b[0] + a[1] * b[1])
        } else {
            let a33 = -(a[0] + a[3]);
            let b33 = -(b[0] + b[3]);
            a[0] * b[0] + a[3] * b[3] + a33 * b33 + 2.0 * (a[1] * b[1] + a[2] * b[2] + a[4] * b[4])
        }
    }

    pub fn scale(&self, s: f64) -> QTensor {
        let mut out = *self;
        for v in out.comps.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &QTensor) -> QTensor {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for (v, w) in out.comps.iter_mut().zip(other.comps.iter()) {
            *v += w;
        }
        out
    }

    /// Returns `(tr(Q^2), tr(Q^3), |Q|^4)`.
    ///
    /// In 2D the eigenvalues are `±x`, so `tr(Q^3)` is returned as exactly 0.
    pub fn trace_powers(&self) -> (f64, f64, f64) {
        let tr2 = self.norm_sq();
        let tr3 = if self.dim == 2 {
            0.0
        } else {
            self.full_matrix().cube_trace()
        };
        (tr2, tr3, tr2 * tr2)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|v| v.is_finite())
    }
}

impl Matrix {
    pub fn zero(dim: Dim) -> Self {
        Matrix {
            dim,
            m: [[0.0; 3]; 3],
        }
    }

    pub fn identity(dim: Dim) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(dim) {
            row[i] = 1.0;
        }
        Matrix { dim, m }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zero(d);
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += self.m[i][k] * other.m[k][j];
                }
                out.m[i][j] = s;
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] += other.m[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] *= s;
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.m[i][j] = self.m[j][i];
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.m[i][i]).sum()
    }

    pub fn cube_trace(&self) -> f64 {
        self.mul(self).mul(self).trace()
    }

    /// `A : B = sum_ij A_ij B_ij`.
    pub fn frobenius_dot(&self, other: &Matrix) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.m[i][j] * other.m[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_dot(self))
    }

    pub fn max_abs(&self) -> f64 {
        let mut s: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s = s.max(libm::fabs(self.m[i][j]));
            }
        }
        s
    }
}

/// How the regularized terms of the system are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The unregularized system.
    Direct,
    /// Mollified coefficients and forcing plus the two `eps`-terms.
    Mollified,
    /// Mollified system further projected by the truncation `J_n`.
    Friedrichs,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Mollified => "mollified",
            Mode::Friedrichs => "friedrichs",
        }
    }
}

/// Test-only switches that deliberately break the model, used to show that
/// the invariant checks can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Hooks {
    /// Flips the sign of the antisymmetric stress `Q ΔQ - ΔQ Q`.
    pub flip_antisymmetric_stress: bool,
}

/// Physical constants and regularization knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Activity.
    pub kappa: f64,
    /// Alignment parameter.
    pub lambda: f64,
    /// Rotational mobility `Γ`.
    pub gamma: f64,
    /// Viscosity.
    pub mu: f64,
    /// Mollifier scale.
    pub eps: f64,
    /// Truncation index `n` of `J_n`.
    pub n_trunc: u32,
    pub mode: Mode,
    /// Keep the mean mode under `J_n` (exploratory runs only).
    pub keep_mean: bool,
    pub hooks: Hooks,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            a: -0.5,
            b: 0.0,
            c: 1.0,
            kappa: 0.0,
            lambda: 0.1,
            gamma: 1.0,
            mu: 1.0,
            eps: 0.0,
            n_trunc: 4,
            mode: Mode::Direct,
            keep_mean: false,
            hooks: Hooks::default(),
        }
    }
}

impl ModelParams {
    /// Checks `μ > 0`, `Γ > 0`, `c > 0`, `eps >= 0` and `n >= 1`.
    ///
    /// `a = b = c = 0` (no bulk potential at all) is also accepted; it is the
    /// linear relaxation problem used to check the time stepper.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.a,
            self.b,
            self.c,
            self.kappa,
            self.lambda,
            self.gamma,
            self.mu,
            self.eps,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "model constants must be finite".into(),
            ));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParameter("mu must be > 0".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter("Gamma must be > 0".into()));
        }
        let no_bulk = self.a == 0.0 && self.b == 0.0 && self.c == 0.0;
        if self.c <= 0.0 && !no_bulk {
            return Err(Error::InvalidParameter("c must be > 0".into()));
        }
        if self.eps < 0.0 {
            return Err(Error::InvalidParameter("eps must be >= 0".into()));
        }
        if self.n_trunc < 1 {
            return Err(Error::InvalidParameter("n_trunc must be >= 1".into()));
        }
        Ok(())
    }

    /// Mollifier scale actually in effect (`0` in direct mode).
    pub fn effective_eps(&self) -> f64 {
        match self.mode {
            Mode::Direct => 0.0,
            _ => self.eps,
        }
    }
}

/// Derivative of the bulk potential without the Laplacian:
/// `aQ - b(Q^2 - tr(Q^2)/d I) + cQ tr(Q^2)`, so that `H = ΔQ - bulk_gradient`.
pub fn bulk_gradient(q: &QTensor, p: &ModelParams) -> QTensor {
    let tr2 = q.norm_sq();
    let mut out = q.scale(p.a + p.c * tr2);
    if q.dim == 3 && p.b != 0.0 {
        out = out.add(&biaxial_term(q).scale(-p.b));
    }
    // In 2D, Q^2 - tr(Q^2)/2 I vanishes identically.
    out
}

/// `Q^2 - tr(Q^2)/d I`, stored in components. Identically zero in 2D.
pub fn biaxial_term(q: &QTensor) -> QTensor {
    if q.dim == 2 {
        return QTensor::zero(2);
    }
    let m = q.full_matrix();
    QTensor::from_matrix(&m.mul(&m))
}

/// Molecular field `H = ΔQ - aQ + b(Q^2 - tr(Q^2)/d I) - cQ tr(Q^2)`.
pub fn molecular_field(q: &QTensor, lap_q: &QTensor, p: &ModelParams) -> Result<QTensor> {
    if q.dim != lap_q.dim {
        return Err(Error::DimensionMismatch {
            expected: q.dim,
            found: lap_q.dim,
        });
    }
    Ok(lap_q.add(&bulk_gradient(q, p).scale(-1.0)))
}

/// The same molecular field evaluated entirely with full matrices, without
/// using tracelessness of the inputs.
pub fn molecular_field_full(q: &Matrix, lap_q: &Matrix, p: &ModelParams) -> Matrix {
    let d = q.dim;
    let q2 = q.mul(q);
    let tr2 = q2.trace();
    let biax = q2.sub(&Matrix::identity(d).scale(tr2 / d as f64));
    lap_q
        .sub(&q.scale(p.a))
        .add(&biax.scale(p.b))
        .sub(&q.scale(p.c * tr2))
}

/// Bulk energy density `(a/2)|Q|^2 - (b/3)tr(Q^3) + (c/4)|Q|^4`.
pub fn bulk_energy_density(q: &QTensor, p: &ModelParams) -> f64 {
    let (tr2, tr3, tr2sq) = q.trace_powers();
    0.5 * p.a * tr2 - p.b / 3.0 * tr3 + 0.25 * p.c * tr2sq
}

/// Evaluates `tr(Q^3) <= (eps/4)|tr(Q^2)|^2 + (1/eps) tr(Q^2)` and returns
/// `(lhs, rhs, holds)`.
pub fn trace_cubic_bound_check(q: &QTensor, eps: f64) -> Result<(f64, f64, bool)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    let (tr2, tr3, _) = q.trace_powers();
    let lhs = tr3;
    let rhs = 0.25 * eps * tr2 * tr2 + tr2 / eps;
    let slack = 1e-12 * libm::fmax(libm::fabs(lhs), libm::fabs(rhs));
    Ok((lhs, rhs, lhs <= rhs + slack))
}

/// A constant `M(a, b, c) >= 0` such that
/// `(M + a/2)|Q|^2 - (b/3)tr(Q^3) + (c/4)|Q|^4 >= (M/2)|Q|^2 + (c/8)|Q|^4`
/// for every `Q`.
///
/// Minimizing the trace-cubic bound over its free parameter gives
/// `|tr(Q^3)| <= r^3` with `r = |Q|`. The requirement then reduces to
/// `(M + a)/2 - (|b|/3) r + (c/8) r^2 >= 0` for all `r >= 0`, whose
/// minimum over `r` yields `M = max(0, 4b^2/(9c) - a)`.
pub fn coercivity_shift(p: &ModelParams) -> Result<f64> {
    if !(p.c > 0.0) {
        return Err(Error::InvalidParameter("c must be > 0".into()));
    }
    let b = libm::fabs(p.b);
    // max over r >= 0 of (|b|/3) r - (c/8) r^2, attained at r = 4|b|/(3c)
    let r_star = 4.0 * b / (3.0 * p.c);
    let worst = b / 3.0 * r_star - p.c / 8.0 * r_star * r_star;
    Ok(libm::fmax(0.0, 2.0 * worst - p.a))
}
