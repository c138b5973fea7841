//! Littlewood-Paley theory on the periodic grid.
//!
//! The radial profile `θ` is a smooth step equal to 1 on `[0, 3/4]` and 0 on
//! `[4/3, ∞)`, glued with `exp(-1/x)`. Then `χ(ξ) = θ(|ξ|)` is supported in
//! the ball of radius 4/3 and `φ(ξ) = θ(|ξ|/2) - θ(|ξ|)` in the annulus
//! `3/4 <= |ξ| <= 8/3`. The sum `χ + Σ_{j>=0} φ(2^-j ξ)` telescopes to 1.
//!
//! Blocks are indexed `j = 0..=j_max` (`Δ_j` has multiplier `φ(2^-j ξ)`);
//! `S_0 = χ(D)` is the low part and `S_j = χ(2^-j D)`. In formulas that need
//! "block `-1`" (paraproducts), `S_0` plays that role.

use alloc::vec;
use alloc::vec::Vec;

use crate::spectral::{
    check_grid, Grid2D, QTensorField, ScalarField, Spectral, Spectrum, VelocityField,
};
use crate::{Error, Result};

const R_IN: f64 = 0.75;
const R_OUT: f64 = 4.0 / 3.0;

fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / x)
    }
}

/// Smooth radial step: 1 for `r <= 3/4`, 0 for `r >= 4/3`, `C^∞` and
/// nonincreasing in between.
pub fn theta(r: f64) -> f64 {
    if r <= R_IN {
        return 1.0;
    }
    if r >= R_OUT {
        return 0.0;
    }
    let t = (r - R_IN) / (R_OUT - R_IN);
    let (a, b) = (glue(1.0 - t), glue(t));
    a / (a + b)
}

/// Low-frequency profile `χ(r)`.
pub fn chi(r: f64) -> f64 {
    theta(r)
}

/// Annular profile `φ(r) = θ(r/2) - θ(r)`.
pub fn phi(r: f64) -> f64 {
    theta(0.5 * r) - theta(r)
}

/// Dyadic partition sampled on a grid's frequencies.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    spec: Spectral,
    /// `|ξ|` per spectral index.
    xi: Vec<f64>,
    chi: Vec<f64>,
    /// `phis[j][idx] = φ(2^-j ξ)` for `j = 0..=j_max`.
    phis: Vec<Vec<f64>>,
}

/// A field split into its `S_0` part and blocks `Δ_0 .. Δ_{j_max}`.
#[derive(Debug, Clone)]
pub struct DyadicBlocks {
    pub s0: ScalarField,
    pub blocks: Vec<ScalarField>,
}

impl DyadicBlocks {
    pub fn reconstruct(&self) -> ScalarField {
        let mut out = self.s0.clone();
        for b in &self.blocks {
            for (o, v) in out.data.iter_mut().zip(&b.data) {
                *o += v;
            }
        }
        out
    }
}

/// Builds the partition for `grid`. `j_max` is the smallest index for which
/// the telescoped sum `θ(2^{-j_max-1}|ξ|)` equals 1 at every grid frequency.
pub fn build_partition(grid: Grid2D) -> DyadicPartition {
    let spec = Spectral::new(grid);
    let xi: Vec<f64> = spec.xi_sq().iter().map(|&k2| libm::sqrt(k2)).collect();
    let xi_max = xi.iter().cloned().fold(0.0, libm::fmax);
    let mut j_max = 0usize;
    while libm::ldexp(xi_max, -(j_max as i32) - 1) > R_IN {
        j_max += 1;
    }
    let chi_v = xi.iter().map(|&r| chi(r)).collect();
    let phis = (0..=j_max)
        .map(|j| {
            xi.iter()
                .map(|&r| phi(libm::ldexp(r, -(j as i32))))
                .collect()
        })
        .collect();
    DyadicPartition {
        spec,
        xi,
        chi: chi_v,
        phis,
    }
}

impl DyadicPartition {
    pub fn grid(&self) -> Grid2D {
        self.spec.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spec
    }

    pub fn j_max(&self) -> usize {
        self.phis.len() - 1
    }

    pub fn chi_samples(&self) -> &[f64] {
        &self.chi
    }

    pub fn phi_samples(&self, j: usize) -> Option<&[f64]> {
        self.phis.get(j).map(|v| v.as_slice())
    }

    /// `max |χ + Σ_j φ_j - 1|` over grid frequencies.
    pub fn unity_error(&self) -> f64 {
        (0..self.xi.len())
            .map(|i| {
                let s: f64 = self.chi[i] + self.phis.iter().map(|p| p[i]).sum::<f64>();
                libm::fabs(s - 1.0)
            })
            .fold(0.0, libm::fmax)
    }

    /// Whether `φ_j φ_j' = 0` at every grid frequency for all `|j - j'| >= 2`.
    pub fn supports_disjoint(&self) -> bool {
        let nb = self.phis.len();
        for j in 0..nb {
            for jp in j + 2..nb {
                if self.phis[j]
                    .iter()
                    .zip(&self.phis[jp])
                    .any(|(a, b)| a * b != 0.0)
                {
                    return false;
                }
            }
        }
        true
    }

    fn multiplier_spec(&self, s: &Spectrum, m: &[f64]) -> Spectrum {
        Spectrum {
            grid: s.grid,
            data: s.data.iter().zip(m).map(|(c, &w)| c * w).collect(),
        }
    }

    fn s_multiplier(&self, j: usize) -> Vec<f64> {
        self.xi
            .iter()
            .map(|&r| chi(libm::ldexp(r, -(j as i32))))
            .collect()
    }

    /// `Δ_j f`; zero for `j > j_max`.
    pub fn delta_j(&self, f: &ScalarField, j: usize) -> Result<ScalarField> {
        check_grid(&self.grid(), &f.grid)?;
        match self.phis.get(j) {
            Some(m) => Ok(self
                .spec
                .inverse(&self.multiplier_spec(&self.spec.forward(f), m))),
            None => Ok(ScalarField::zeros(f.grid)),
        }
    }

    /// `S_j f = χ(2^-j D) f`.
    pub fn s_j(&self, f: &ScalarField, j: usize) -> Result<ScalarField> {
        check_grid(&self.grid(), &f.grid)?;
        let m = self.s_multiplier(j);
        Ok(self
            .spec
            .inverse(&self.multiplier_spec(&self.spec.forward(f), &m)))
    }

    pub fn blocks(&self, f: &ScalarField) -> Result<DyadicBlocks> {
        check_grid(&self.grid(), &f.grid)?;
        let s = self.spec.forward(f);
        let s0 = self.spec.inverse(&self.multiplier_spec(&s, &self.chi));
        let blocks = self
            .phis
            .iter()
            .map(|m| self.spec.inverse(&self.multiplier_spec(&s, m)))
            .collect();
        Ok(DyadicBlocks { s0, blocks })
    }

    /// Per-mode weight `χ^2 + Σ_j 2^{2js} φ_j^2` of the `H^s` norm.
    pub fn hs_weights(&self, s: f64) -> Vec<f64> {
        let mut w: Vec<f64> = self.chi.iter().map(|c| c * c).collect();
        for (j, p) in self.phis.iter().enumerate() {
            let f = libm::exp2(2.0 * j as f64 * s);
            for (wi, pi) in w.iter_mut().zip(p) {
                *wi += f * pi * pi;
            }
        }
        w
    }

    /// `Σ w(k) |f̂(k)|^2 · area`.
    pub fn weighted_sq(&self, s: &Spectrum, w: &[f64]) -> f64 {
        s.data
            .iter()
            .zip(w)
            .map(|(c, wi)| wi * c.norm_sqr())
            .sum::<f64>()
            * s.grid.area()
    }

    /// `(‖S_0 f‖^2 + Σ_j 2^{2js} ‖Δ_j f‖^2)^{1/2}`.
    pub fn hs_norm(&self, f: &ScalarField, s: f64) -> Result<f64> {
        check_grid(&self.grid(), &f.grid)?;
        let sp = self.spec.forward(f);
        Ok(libm::sqrt(self.weighted_sq(&sp, &self.hs_weights(s))))
    }

    /// Fourier-side norm `(Σ (1 + |ξ|^2)^s |f̂|^2 · area)^{1/2}`.
    pub fn fourier_hs_norm(&self, f: &ScalarField, s: f64) -> Result<f64> {
        check_grid(&self.grid(), &f.grid)?;
        let sp = self.spec.forward(f);
        let w: Vec<f64> = self.xi.iter().map(|r| libm::pow(1.0 + r * r, s)).collect();
        Ok(libm::sqrt(self.weighted_sq(&sp, &w)))
    }

    /// Bony decomposition `uv = T_u v + T_v u + R(u, v)`, with products taken
    /// pointwise on the grid.
    pub fn bony_decompose(
        &self,
        u: &ScalarField,
        v: &ScalarField,
    ) -> Result<(ScalarField, ScalarField, ScalarField)> {
        check_grid(&self.grid(), &u.grid)?;
        check_grid(&u.grid, &v.grid)?;
        // block -1 is S_0; shift indices by one
        let bu = self.blocks(u)?;
        let bv = self.blocks(v)?;
        let list = |b: DyadicBlocks| -> Vec<ScalarField> {
            let mut l = vec![b.s0];
            l.extend(b.blocks);
            l
        };
        let (du, dv) = (list(bu), list(bv));
        let nb = du.len();
        let grid = u.grid;
        let low = |d: &[ScalarField], upto: usize| -> ScalarField {
            // Σ_{i < upto} d_i
            let mut acc = ScalarField::zeros(grid);
            for f in &d[..upto] {
                for (a, b) in acc.data.iter_mut().zip(&f.data) {
                    *a += b;
                }
            }
            acc
        };
        let mut tuv = ScalarField::zeros(grid);
        let mut tvu = ScalarField::zeros(grid);
        let mut r = ScalarField::zeros(grid);
        for i in 0..nb {
            if i >= 2 {
                let su = low(&du, i - 1);
                let sv = low(&dv, i - 1);
                for p in 0..grid.len() {
                    tuv.data[p] += su.data[p] * dv[i].data[p];
                    tvu.data[p] += sv.data[p] * du[i].data[p];
                }
            }
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(nb - 1);
            for ip in lo..=hi {
                for p in 0..grid.len() {
                    r.data[p] += du[i].data[p] * dv[ip].data[p];
                }
            }
        }
        Ok((tuv, tvu, r))
    }

    /// Measures the Bernstein constants of block `j` for `p, q ∈ {2, 4, ∞}`.
    pub fn bernstein_check(
        &self,
        f: &ScalarField,
        j: usize,
        p: f64,
        q: f64,
    ) -> Result<BernsteinReport> {
        for e in [p, q] {
            if !(e == 2.0 || e == 4.0 || e.is_infinite()) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "exponent {e} not in {{2, 4, inf}}"
                )));
            }
        }
        if q < p {
            return Err(Error::InvalidParameter("need p <= q".into()));
        }
        let d = self.delta_j(f, j)?;
        let np = d.lp_norm(p);
        if np == 0.0 || np <= 1e-14 * f.max_abs() {
            return Err(Error::EmptyBlock { j });
        }
        let [gx, gy] = self.spec.gradient(&d)?;
        let grad_mag = ScalarField {
            grid: d.grid,
            data: gx
                .data
                .iter()
                .zip(&gy.data)
                .map(|(a, b)| libm::sqrt(a * a + b * b))
                .collect(),
        };
        let scale = libm::exp2(j as f64);
        let derivative_ratio = grad_mag.lp_norm(p) / np;
        let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
        let lq_factor = libm::exp2(2.0 * (inv(p) - inv(q)) * j as f64);
        let lq_ratio = d.lp_norm(q) / (lq_factor * np);
        Ok(BernsteinReport {
            j,
            derivative_ratio,
            derivative_constant: libm::fmax(derivative_ratio / scale, scale / derivative_ratio),
            lq_ratio,
        })
    }

    /// `‖[Δ_j, u] v‖_{L^2}` against `2^{-j} ‖∇u‖_{L^∞} ‖v‖_{L^2}`.
    pub fn commutator_check(
        &self,
        u: &ScalarField,
        v: &ScalarField,
        j: usize,
    ) -> Result<CommutatorReport> {
        check_grid(&u.grid, &v.grid)?;
        let uv = u.mul(v)?;
        let lhs_field = self.delta_j(&uv, j)?.sub(&u.mul(&self.delta_j(v, j)?)?)?;
        let lhs = lhs_field.l2();
        let [gx, gy] = self.spec.gradient(u)?;
        let grad_inf = gx
            .data
            .iter()
            .zip(&gy.data)
            .fold(0.0, |m, (a, b)| libm::fmax(m, libm::sqrt(a * a + b * b)));
        let bound_unit = libm::exp2(-(j as f64)) * grad_inf * v.l2();
        let constant = if lhs == 0.0 { 0.0 } else { lhs / bound_unit };
        Ok(CommutatorReport {
            j,
            lhs,
            bound_unit,
            constant,
        })
    }

    /// Block norms of `u^k` against `2^{-qs} ‖u‖^{k-1}_{L^{2(k-1)}} ‖∇u‖_{H^s}`
    /// (`p = 2`). Products are pointwise, so `u` should be band limited to
    /// `|k| < N/(2k)`.
    pub fn product_estimate_check(&self, u: &ScalarField, k: u32, s: f64) -> Result<ProductReport> {
        check_grid(&self.grid(), &u.grid)?;
        if !(2..=4).contains(&k) {
            return Err(Error::InvalidParameter(alloc::format!(
                "power k must be 2, 3 or 4, got {k}"
            )));
        }
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "s must be > 0, got {s}"
            )));
        }
        let mut uk = u.clone();
        for _ in 1..k {
            uk = uk.mul(u)?;
        }
        let bl = self.blocks(&uk)?;
        let mut block_norms = vec![bl.s0.l2()];
        block_norms.extend(bl.blocks.iter().map(|b| b.l2()));
        let [gx, gy] = self.spec.gradient(u)?;
        let (hx, hy) = (self.hs_norm(&gx, s)?, self.hs_norm(&gy, s)?);
        let grad_hs = libm::sqrt(hx * hx + hy * hy);
        let base = libm::pow(u.lp_norm(2.0 * (k - 1) as f64), (k - 1) as f64) * grad_hs;
        // b_q = 2^{qs} ‖Δ_q u^k‖ / base, with the S_0 part at q = 0
        let b: Vec<f64> = block_norms
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let q = i.saturating_sub(1) as f64;
                if base == 0.0 {
                    0.0
                } else {
                    libm::exp2(q * s) * n / base
                }
            })
            .collect();
        let total: f64 = b.iter().map(|x| x * x).sum();
        let constant = libm::sqrt(total);
        let a_seq: Vec<f64> = b
            .iter()
            .map(|x| if constant > 0.0 { x / constant } else { 0.0 })
            .collect();
        let a_l2 = libm::sqrt(a_seq.iter().map(|x| x * x).sum());
        // tail: blocks j > j_max - 2 (list index j + 1)
        let start = (self.j_max() as isize - 1).max(0) as usize + 1;
        let tail: f64 = a_seq.iter().skip(start).map(|x| x * x).sum();
        Ok(ProductReport {
            block_norms,
            constant,
            a_l2,
            tail_fraction: if a_l2 > 0.0 {
                tail / (a_l2 * a_l2)
            } else {
                0.0
            },
        })
    }

    /// `(φ₁, φ₂, φ)` with `φ = ‖∇Q‖²_{H^s} + ‖u‖²_{H^s}` and
    /// `φ₁ = ‖S₀∇Q‖² + ‖S₀u‖²`.
    pub fn split_low_high(
        &self,
        q: &QTensorField,
        u: &VelocityField,
        s: f64,
    ) -> Result<(f64, f64, f64)> {
        check_grid(&self.grid(), &q.grid())?;
        check_grid(&q.grid(), &u.grid())?;
        let sp = &self.spec;
        let (q11, q12) = sp.forward_pair(&q.q11.data, &q.q12.data);
        let (ux, uy) = sp.forward_pair(&u.ux.data, &u.uy.data);
        Ok(self.split_low_high_spec([&q11, &q12], [&ux, &uy], s))
    }

    /// Spectral-side version of [`Self::split_low_high`].
    pub fn split_low_high_spec(
        &self,
        q: [&Spectrum; 2],
        u: [&Spectrum; 2],
        s: f64,
    ) -> (f64, f64, f64) {
        let w = self.hs_weights(s);
        let low: Vec<f64> = self.chi.iter().map(|c| c * c).collect();
        let (kx, ky) = self.spec.xi_deriv();
        let mut phi = 0.0;
        let mut phi1 = 0.0;
        for i in 0..w.len() {
            let gq = (q[0].data[i].norm_sqr() + q[1].data[i].norm_sqr())
                * 2.0
                * (kx[i] * kx[i] + ky[i] * ky[i]);
            let uu = u[0].data[i].norm_sqr() + u[1].data[i].norm_sqr();
            phi += w[i] * (gq + uu);
            phi1 += low[i] * (gq + uu);
        }
        let area = self.grid().area();
        let (phi, phi1) = (phi * area, phi1 * area);
        (phi1, phi - phi1, phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinReport {
    pub j: usize,
    /// `‖∇Δ_j f‖_p / ‖Δ_j f‖_p`.
    pub derivative_ratio: f64,
    /// Smallest `C` with `C^-1 2^j <= ratio <= C 2^j`.
    pub derivative_constant: f64,
    /// `‖Δ_j f‖_q / (2^{2(1/p - 1/q) j} ‖Δ_j f‖_p)`.
    pub lq_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorReport {
    pub j: usize,
    pub lhs: f64,
    pub bound_unit: f64,
    /// `lhs / bound_unit` (0 when the commutator vanishes).
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductReport {
    /// `‖S_0 u^k‖, ‖Δ_0 u^k‖, ..., ‖Δ_{j_max} u^k‖`.
    pub block_norms: Vec<f64>,
    /// Smallest `C` for which the normalized sequence is in the unit ball of `l^2`.
    pub constant: f64,
    pub a_l2: f64,
    /// Share of `Σ a_q^2` carried by blocks above `j_max - 2`.
    pub tail_fraction: f64,
}
