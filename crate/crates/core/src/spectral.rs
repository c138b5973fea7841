//! Periodic grid, Fourier transforms and the spectral operators: derivatives,
//! the Leray projector `P`, the Friedrichs truncation `J_n`, the mollifier
//! `R_eps` and the two-thirds dealiasing rule.
//!
//! Conventions:
//!
//! - Fields are `N x N`, row-major, `idx = iy * N + ix`, `x = ix * L / N`.
//! - Index `i` carries the integer wavenumber `k = i` for `i <= N/2` and
//!   `k = i - N` otherwise; the physical wavenumber is `xi = 2 pi k / L`.
//! - The forward transform is scaled by `1/N^2`, so a spectrum holds Fourier
//!   series coefficients and `∫ f g = L^2 Σ f̂ conj(ĝ)`.
//! - First derivatives zero the Nyquist row/column (the only way to keep a
//!   real field real). The Leray projector uses the same wavenumbers, so
//!   `∇·P v` vanishes mode by mode.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::fft::FftPlan;
use crate::tensor::QTensor;
use crate::{Error, Result};

/// A periodic `N x N` grid on the square `[0, L)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n: usize,
    l: f64,
}

impl Grid2D {
    /// `n` must be a power of two, at least 8; `l > 0`.
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(alloc::format!(
                "N must be a power of two >= 8, got {n}"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "L must be > 0, got {l}"
            )));
        }
        Ok(Grid2D { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Number of grid points, `N^2`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Quadrature weight of one cell.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    pub fn area(&self) -> f64 {
        self.l * self.l
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Integer wavenumber of index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Smallest nonzero physical wavenumber, `2 pi / L`.
    pub fn xi_unit(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Largest dealiased integer wavenumber per axis, `floor(N/3)`.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Admissible truncation indices `n` for `J_n`: `1..=floor(log2(N/2 * 2 pi / L))`,
    /// i.e. annuli whose outer radius does not exceed the Nyquist wavenumber.
    pub fn trunc_range(&self) -> (u32, u32) {
        let kmax = (self.n / 2) as f64 * self.xi_unit();
        let hi = libm::floor(libm::log2(kmax));
        (1, if hi < 1.0 { 0 } else { hi as u32 })
    }
}

/// A real field sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2D,
    pub data: Vec<f64>,
}

/// Fourier coefficients of a field, in the grid's index layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Grid2D,
    pub data: Vec<Complex64>,
}

/// A 2D Q-tensor field stored as its two independent components.
#[derive(Debug, Clone, PartialEq)]
pub struct QTensorField {
    pub q11: ScalarField,
    pub q12: ScalarField,
}

/// A 2D velocity field.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub ux: ScalarField,
    pub uy: ScalarField,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, v: f64) -> Self {
        ScalarField {
            grid,
            data: vec![v; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.len());
        for iy in 0..n {
            for ix in 0..n {
                data.push(f(grid.coord(ix), grid.coord(iy)));
            }
        }
        ScalarField { grid, data }
    }

    pub fn from_vec(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: data.len(),
            });
        }
        Ok(ScalarField { grid, data })
    }

    /// `∫ f^2` by the trapezoidal rule.
    pub fn l2_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2(&self) -> f64 {
        libm::sqrt(self.l2_sq())
    }

    /// `(∫|f|^p)^{1/p}`; `p = f64::INFINITY` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.data.iter().map(|v| libm::pow(libm::fabs(*v), p)).sum();
        libm::pow(s * self.grid.cell_area(), 1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, v| libm::fmax(m, libm::fabs(*v)))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        check_grid(&self.grid, &other.grid)?;
        Ok(dot(&self.data, &other.data) * self.grid.cell_area())
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        check_grid(&self.grid, &other.grid)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            data,
        })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.add(&other.scaled(-1.0))
    }

    /// Plain pointwise product (aliased; see [`Spectral::product_dealiased`]).
    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        check_grid(&self.grid, &other.grid)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            data,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Spectrum {
    pub fn zeros(grid: Grid2D) -> Self {
        Spectrum {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn scaled(&self, s: f64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Spectrum) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| libm::fmax(m, v.norm()))
    }

    /// `∫ f^2` through Parseval.
    pub fn l2_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.area()
    }

    /// `∫ f g` through Parseval (real part; exact for real fields).
    pub fn inner(&self, other: &Spectrum) -> f64 {
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        s * self.grid.area()
    }
}

impl QTensorField {
    pub fn zeros(grid: Grid2D) -> Self {
        QTensorField {
            q11: ScalarField::zeros(grid),
            q12: ScalarField::zeros(grid),
        }
    }

    pub fn constant(grid: Grid2D, q: &QTensor) -> Self {
        let c = q.components();
        QTensorField {
            q11: ScalarField::constant(grid, c[0]),
            q12: ScalarField::constant(grid, c[1]),
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.q11.grid
    }

    pub fn at(&self, i: usize) -> QTensor {
        QTensor::new2(self.q11.data[i], self.q12.data[i])
    }

    /// `∫ |Q|^2 = 2 ∫ (q11^2 + q12^2)`.
    pub fn l2_sq(&self) -> f64 {
        2.0 * (self.q11.l2_sq() + self.q12.l2_sq())
    }

    /// Frobenius inner product `∫ Q : Q'`.
    pub fn inner(&self, other: &QTensorField) -> Result<f64> {
        Ok(2.0 * (self.q11.inner(&other.q11)? + self.q12.inner(&other.q12)?))
    }

    /// Largest `|tr Q|` over the grid when each point is rebuilt as a full
    /// matrix; zero by construction.
    pub fn shadow_trace_max(&self) -> f64 {
        (0..self.grid().len())
            .map(|i| libm::fabs(self.at(i).full_matrix().trace()))
            .fold(0.0, libm::fmax)
    }

    pub fn is_finite(&self) -> bool {
        self.q11.is_finite() && self.q12.is_finite()
    }
}

impl VelocityField {
    pub fn zeros(grid: Grid2D) -> Self {
        VelocityField {
            ux: ScalarField::zeros(grid),
            uy: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.ux.grid
    }

    pub fn l2_sq(&self) -> f64 {
        self.ux.l2_sq() + self.uy.l2_sq()
    }

    pub fn inner(&self, other: &VelocityField) -> Result<f64> {
        Ok(self.ux.inner(&other.ux)? + self.uy.inner(&other.uy)?)
    }

    /// Largest pointwise speed.
    pub fn max_speed(&self) -> f64 {
        self.ux
            .data
            .iter()
            .zip(&self.uy.data)
            .fold(0.0, |m, (a, b)| libm::fmax(m, libm::sqrt(a * a + b * b)))
    }

    pub fn is_finite(&self) -> bool {
        self.ux.is_finite() && self.uy.is_finite()
    }
}

pub(crate) fn check_grid(a: &Grid2D, b: &Grid2D) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Transform workspace for one grid: FFT plan and precomputed wavenumber
/// tables. Cheap to share read-only; every method allocates its outputs.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid2D,
    plan: FftPlan,
    /// Derivative wavenumbers (Nyquist zeroed), per spectral index.
    kx: Vec<f64>,
    ky: Vec<f64>,
    /// True `|xi|^2`, per spectral index.
    k2: Vec<f64>,
    /// Two-thirds rule: `true` where the mode is kept.
    keep: Vec<bool>,
}

impl Spectral {
    pub fn new(grid: Grid2D) -> Self {
        let n = grid.n();
        let unit = grid.xi_unit();
        let cut = grid.dealias_cutoff();
        let mut kx = Vec::with_capacity(grid.len());
        let mut ky = Vec::with_capacity(grid.len());
        let mut k2 = Vec::with_capacity(grid.len());
        let mut keep = Vec::with_capacity(grid.len());
        for iy in 0..n {
            let my = grid.wavenumber(iy);
            for ix in 0..n {
                let mx = grid.wavenumber(ix);
                let dx = if ix == n / 2 { 0.0 } else { mx as f64 * unit };
                let dy = if iy == n / 2 { 0.0 } else { my as f64 * unit };
                kx.push(dx);
                ky.push(dy);
                let (fx, fy) = (mx as f64 * unit, my as f64 * unit);
                k2.push(fx * fx + fy * fy);
                keep.push(mx.abs() <= cut && my.abs() <= cut);
            }
        }
        Spectral {
            grid,
            plan: FftPlan::new(n),
            kx,
            ky,
            k2,
            keep,
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// True `|xi|^2` of each spectral index.
    pub fn xi_sq(&self) -> &[f64] {
        &self.k2
    }

    /// Derivative wavenumbers along x and y (Nyquist zeroed).
    pub fn xi_deriv(&self) -> (&[f64], &[f64]) {
        (&self.kx, &self.ky)
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.keep
    }

    pub fn forward(&self, f: &ScalarField) -> Spectrum {
        self.forward_slice(&f.data)
    }

    pub fn forward_slice(&self, f: &[f64]) -> Spectrum {
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plan.run_2d(&mut data, false);
        Spectrum {
            grid: self.grid,
            data,
        }
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, s: &Spectrum) -> ScalarField {
        let mut data = s.data.clone();
        self.plan.run_2d(&mut data, true);
        ScalarField {
            grid: self.grid,
            data: data.iter().map(|c| c.re).collect(),
        }
    }

    /// Transforms two real fields with one complex FFT.
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Spectrum, Spectrum) {
        let n = self.grid.n();
        let mut z: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.plan.run_2d(&mut z, false);
        let mut sa = Spectrum::zeros(self.grid);
        let mut sb = Spectrum::zeros(self.grid);
        for iy in 0..n {
            let jy = (n - iy) % n;
            for ix in 0..n {
                let jx = (n - ix) % n;
                let zk = z[iy * n + ix];
                let zm = z[jy * n + jx].conj();
                sa.data[iy * n + ix] = (zk + zm) * 0.5;
                // (zk - zm) / (2i)
                let d = zk - zm;
                sb.data[iy * n + ix] = Complex64::new(d.im * 0.5, -d.re * 0.5);
            }
        }
        (sa, sb)
    }

    /// Inverse of two Hermitian spectra with one complex FFT.
    pub fn inverse_pair(&self, a: &Spectrum, b: &Spectrum) -> (ScalarField, ScalarField) {
        let mut z: Vec<Complex64> = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| x + Complex64::new(-y.im, y.re))
            .collect();
        self.plan.run_2d(&mut z, true);
        (
            ScalarField {
                grid: self.grid,
                data: z.iter().map(|c| c.re).collect(),
            },
            ScalarField {
                grid: self.grid,
                data: z.iter().map(|c| c.im).collect(),
            },
        )
    }

    /// `∂_x` (axis 0) or `∂_y` (axis 1) in spectral space.
    pub fn deriv_spec(&self, s: &Spectrum, axis: usize) -> Spectrum {
        let k = if axis == 0 { &self.kx } else { &self.ky };
        let data = s
            .data
            .iter()
            .zip(k)
            .map(|(c, &kk)| Complex64::new(-c.im * kk, c.re * kk))
            .collect();
        Spectrum {
            grid: self.grid,
            data,
        }
    }

    pub fn laplacian_spec(&self, s: &Spectrum) -> Spectrum {
        let data = s
            .data
            .iter()
            .zip(&self.k2)
            .map(|(c, &k2)| c * -k2)
            .collect();
        Spectrum {
            grid: self.grid,
            data,
        }
    }

    /// `∂_x a + ∂_y b` in spectral space.
    pub fn divergence_spec(&self, a: &Spectrum, b: &Spectrum) -> Spectrum {
        let mut out = self.deriv_spec(a, 0);
        out.axpy(1.0, &self.deriv_spec(b, 1));
        out
    }

    /// Applies `I - xi xi^T / |xi|^2` in place; modes with vanishing derivative
    /// wavenumber (the mean) pass through.
    pub fn leray_spec(&self, a: &mut Spectrum, b: &mut Spectrum) {
        for i in 0..a.data.len() {
            let (kx, ky) = (self.kx[i], self.ky[i]);
            let kk = kx * kx + ky * ky;
            if kk == 0.0 {
                continue;
            }
            let proj = (a.data[i] * kx + b.data[i] * ky) / kk;
            a.data[i] -= proj * kx;
            b.data[i] -= proj * ky;
        }
    }

    /// Zeroes modes with `|k_j| > N/3`.
    pub fn dealias_spec(&self, s: &mut Spectrum) {
        for (c, &k) in s.data.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Multiplies by `exp(-(eps |xi|)^2 / 2)`. `eps = 0` leaves the data
    /// untouched.
    pub fn mollify_spec(&self, s: &mut Spectrum, eps: f64) {
        if eps == 0.0 {
            return;
        }
        let e2 = eps * eps;
        for (c, &k2) in s.data.iter_mut().zip(&self.k2) {
            *c *= libm::exp(-0.5 * e2 * k2);
        }
    }

    /// Keeps modes with `2^-n <= |xi| <= 2^n`. With `keep_mean` the mean
    /// mode also survives.
    pub fn truncate_spec(&self, s: &mut Spectrum, n: u32, keep_mean: bool) {
        let lo = libm::ldexp(1.0, -(n as i32));
        let hi = libm::ldexp(1.0, n as i32);
        let (lo2, hi2) = (lo * lo, hi * hi);
        for (i, (c, &k2)) in s.data.iter_mut().zip(&self.k2).enumerate() {
            let inside = k2 >= lo2 && k2 <= hi2;
            if !inside && !(keep_mean && i == 0) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn gradient(&self, f: &ScalarField) -> Result<[ScalarField; 2]> {
        check_grid(&self.grid, &f.grid)?;
        let s = self.forward(f);
        let (gx, gy) = self.inverse_pair(&self.deriv_spec(&s, 0), &self.deriv_spec(&s, 1));
        Ok([gx, gy])
    }

    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        check_grid(&self.grid, &f.grid)?;
        Ok(self.inverse(&self.laplacian_spec(&self.forward(f))))
    }

    pub fn divergence(&self, v: &VelocityField) -> Result<ScalarField> {
        check_grid(&self.grid, &v.grid())?;
        let (a, b) = self.forward_pair(&v.ux.data, &v.uy.data);
        Ok(self.inverse(&self.divergence_spec(&a, &b)))
    }

    pub fn leray_project(&self, v: &VelocityField) -> Result<VelocityField> {
        check_grid(&self.grid, &v.grid())?;
        let (mut a, mut b) = self.forward_pair(&v.ux.data, &v.uy.data);
        self.leray_spec(&mut a, &mut b);
        let (ux, uy) = self.inverse_pair(&a, &b);
        Ok(VelocityField { ux, uy })
    }

    /// `max_k |xi · û(k)| <= tol * max |û|`.
    pub fn is_divergence_free(&self, v: &VelocityField, tol: f64) -> bool {
        let (a, b) = self.forward_pair(&v.ux.data, &v.uy.data);
        let scale = libm::fmax(a.max_abs(), b.max_abs());
        let worst = (0..a.data.len())
            .map(|i| (a.data[i] * self.kx[i] + b.data[i] * self.ky[i]).norm())
            .fold(0.0, libm::fmax);
        worst <= tol * scale
    }

    pub fn truncate_jn(&self, f: &ScalarField, n: u32) -> Result<ScalarField> {
        check_grid(&self.grid, &f.grid)?;
        if n < 1 {
            return Err(Error::InvalidParameter(
                "truncation index n must be >= 1".into(),
            ));
        }
        let mut s = self.forward(f);
        self.truncate_spec(&mut s, n, false);
        Ok(self.inverse(&s))
    }

    pub fn mollify(&self, f: &ScalarField, eps: f64) -> Result<ScalarField> {
        check_grid(&self.grid, &f.grid)?;
        if !(eps >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "eps must be >= 0, got {eps}"
            )));
        }
        if eps == 0.0 {
            return Ok(f.clone());
        }
        let mut s = self.forward(f);
        self.mollify_spec(&mut s, eps);
        Ok(self.inverse(&s))
    }

    pub fn dealias(&self, f: &ScalarField) -> Result<ScalarField> {
        check_grid(&self.grid, &f.grid)?;
        let mut s = self.forward(f);
        self.dealias_spec(&mut s);
        Ok(self.inverse(&s))
    }

    /// Pointwise product of two spectra, transformed back and dealiased.
    /// Exact (alias free) when both inputs are already dealiased.
    pub fn product_dealiased(&self, a: &Spectrum, b: &Spectrum) -> Spectrum {
        let (fa, fb) = self.inverse_pair(a, b);
        let prod: Vec<f64> = fa.data.iter().zip(&fb.data).map(|(x, y)| x * y).collect();
        let mut s = self.forward_slice(&prod);
        self.dealias_spec(&mut s);
        s
    }

    /// Fourier coefficients of the exact product `f g` for `|k_j| < N/2`,
    /// computed on a zero-padded `2N` grid (Nyquist coefficients of the
    /// inputs are split evenly between `±N/2`). Output Nyquist rows are zero.
    pub fn product_exact(&self, f: &Spectrum, g: &Spectrum) -> Spectrum {
        let n = self.grid.n();
        let m = 2 * n;
        let fine = Spectral::new(Grid2D {
            n: m,
            l: self.grid.l(),
        });
        let pad = |s: &Spectrum| -> Vec<f64> {
            let mut big = vec![Complex64::new(0.0, 0.0); m * m];
            for iy in 0..n {
                let ky = self.grid.wavenumber(iy);
                for ix in 0..n {
                    let kx = self.grid.wavenumber(ix);
                    let c = s.data[iy * n + ix];
                    let xs: &[i64] = if ix == n / 2 { &[kx, -kx] } else { &[kx] };
                    let ys: &[i64] = if iy == n / 2 { &[ky, -ky] } else { &[ky] };
                    let w = 1.0 / (xs.len() * ys.len()) as f64;
                    for &a in xs {
                        for &b in ys {
                            let jx = a.rem_euclid(m as i64) as usize;
                            let jy = b.rem_euclid(m as i64) as usize;
                            big[jy * m + jx] += c * w;
                        }
                    }
                }
            }
            fine.plan.run_2d(&mut big, true);
            big.iter().map(|c| c.re).collect()
        };
        let (pf, pg) = (pad(f), pad(g));
        let prod: Vec<f64> = pf.iter().zip(&pg).map(|(a, b)| a * b).collect();
        let big = fine.forward_slice(&prod);
        let mut out = Spectrum::zeros(self.grid);
        for iy in 0..n {
            let ky = self.grid.wavenumber(iy);
            for ix in 0..n {
                let kx = self.grid.wavenumber(ix);
                if ix == n / 2 || iy == n / 2 {
                    continue;
                }
                let jx = kx.rem_euclid(m as i64) as usize;
                let jy = ky.rem_euclid(m as i64) as usize;
                out.data[iy * n + ix] = big.data[jy * m + jx];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, 2.0 * PI).unwrap()
    }

    fn smooth(g: Grid2D) -> ScalarField {
        ScalarField::from_fn(g, |x, y| {
            libm::sin(x) * libm::cos(2.0 * y) + 0.3 * libm::cos(3.0 * x + y) + 0.1
        })
    }

    #[test]
    fn grid_validation() {
        assert!(Grid2D::new(4, 1.0).is_err());
        assert!(Grid2D::new(12, 1.0).is_err());
        assert!(Grid2D::new(16, 0.0).is_err());
        let g = grid(16);
        assert_eq!(g.wavenumber(8), 8);
        assert_eq!(g.wavenumber(9), -7);
        assert_eq!(g.dealias_cutoff(), 5);
        assert_eq!(grid(128).trunc_range(), (1, 6));
    }

    #[test]
    fn single_mode_derivatives() {
        let g = Grid2D::new(32, 3.0).unwrap();
        let sp = Spectral::new(g);
        let w = 2.0 * PI / 3.0;
        let f = ScalarField::from_fn(g, |x, _| libm::sin(w * x));
        let [gx, gy] = sp.gradient(&f).unwrap();
        let lap = sp.laplacian(&f).unwrap();
        for i in 0..g.len() {
            let x = g.coord(i % 32);
            assert!((gx.data[i] - w * libm::cos(w * x)).abs() < 1e-12);
            assert!(gy.data[i].abs() < 1e-12);
            assert!((lap.data[i] + w * w * libm::sin(w * x)).abs() < 1e-12);
        }
        let [cx, cy] = sp.gradient(&ScalarField::constant(g, 2.5)).unwrap();
        assert!(cx.max_abs() < 1e-14 && cy.max_abs() < 1e-14);
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = grid(16);
        let sp = Spectral::new(g);
        let a = smooth(g);
        let b = ScalarField::from_fn(g, |x, y| libm::cos(x - 2.0 * y));
        let (sa, sb) = sp.forward_pair(&a.data, &b.data);
        let (ra, rb) = (sp.forward(&a), sp.forward(&b));
        for i in 0..g.len() {
            assert!((sa.data[i] - ra.data[i]).norm() < 1e-14);
            assert!((sb.data[i] - rb.data[i]).norm() < 1e-14);
        }
        let (ia, ib) = sp.inverse_pair(&sa, &sb);
        for i in 0..g.len() {
            assert!((ia.data[i] - a.data[i]).abs() < 1e-13);
            assert!((ib.data[i] - b.data[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn parseval() {
        let g = grid(32);
        let sp = Spectral::new(g);
        let f = smooth(g);
        let s = sp.forward(&f);
        assert!((f.l2_sq() - s.l2_sq()).abs() <= 1e-10 * f.l2_sq());
    }

    #[test]
    fn leray_examples() {
        let g = grid(32);
        let sp = Spectral::new(g);
        let phi = ScalarField::from_fn(g, |x, y| libm::sin(x + y));
        let [gx, gy] = sp.gradient(&phi).unwrap();
        let p = sp.leray_project(&VelocityField { ux: gx, uy: gy }).unwrap();
        assert!(p.ux.max_abs() < 1e-13 && p.uy.max_abs() < 1e-13);
        let v = VelocityField {
            ux: ScalarField::from_fn(g, |_, y| libm::sin(y)),
            uy: ScalarField::zeros(g),
        };
        let pv = sp.leray_project(&v).unwrap();
        for i in 0..g.len() {
            assert!((pv.ux.data[i] - v.ux.data[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn jn_and_mollifier() {
        let g = grid(32);
        let sp = Spectral::new(g);
        assert!(
            sp.truncate_jn(&ScalarField::constant(g, 1.0), 2)
                .unwrap()
                .max_abs()
                < 1e-15
        );
        assert!(sp.truncate_jn(&ScalarField::constant(g, 1.0), 0).is_err());
        let m = ScalarField::from_fn(g, |x, _| libm::sin(x));
        let t = sp.truncate_jn(&m, 1).unwrap();
        assert!(t.sub(&m).unwrap().max_abs() < 1e-14);

        let f = smooth(g);
        assert_eq!(sp.mollify(&f, 0.0).unwrap(), f);
        assert!(sp.mollify(&f, -1.0).is_err());
        let c = sp.mollify(&ScalarField::constant(g, 3.0), 0.7).unwrap();
        assert!(c.data.iter().all(|v| (v - 3.0).abs() < 1e-14));
        let mode = ScalarField::from_fn(g, |x, y| libm::cos(3.0 * x + 4.0 * y));
        let r = sp.mollify(&mode, 0.2).unwrap();
        let factor = libm::exp(-0.5 * (0.2f64 * 5.0).powi(2));
        assert!(r.sub(&mode.scaled(factor)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn dealias_examples() {
        let g = grid(16);
        let sp = Spectral::new(g);
        let low = ScalarField::from_fn(g, |x, y| libm::sin(5.0 * x) * libm::cos(3.0 * y));
        assert!(sp.dealias(&low).unwrap().sub(&low).unwrap().max_abs() < 1e-14);
        let nyq = ScalarField::from_fn(g, |x, _| libm::cos(8.0 * x));
        assert!(sp.dealias(&nyq).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn dealiased_product_matches_double_resolution() {
        let g = grid(16);
        let sp = Spectral::new(g);
        // modes 5 and 4 are kept; their product reaches 9 (aliases onto -7 on
        // a 16 grid without dealiasing)
        let a = sp.forward(&ScalarField::from_fn(g, |x, _| libm::sin(5.0 * x)));
        let b = sp.forward(&ScalarField::from_fn(g, |x, _| libm::sin(4.0 * x)));
        let exact = sp.product_exact(&a, &b);
        let mut masked = exact.clone();
        sp.dealias_spec(&mut masked);
        let d = sp.product_dealiased(&a, &b);
        for i in 0..g.len() {
            assert!((d.data[i] - masked.data[i]).norm() < 1e-15);
        }
        // the raw pointwise product does put spurious energy at |k| = 7
        let raw = sp.forward(&sp.inverse(&a).mul(&sp.inverse(&b)).unwrap());
        assert!(raw.data[9].norm() > 0.1);
        assert!(exact.data[9].norm() < 1e-15);
    }
}
