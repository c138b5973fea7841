//! Energy ledger and the balance laws checked along trajectories.
//!
//! The total energy is `E = ½‖u‖² + ½‖∇Q‖² + ∫ bulk(Q)` and smooth solutions
//! satisfy
//!
//! ```text
//! dE/dt + μ‖∇u‖² + Γ∫tr(H²) + κ(Q, ∇u) = 0,
//! ```
//!
//! with `ε‖w·∇Q‖³_{L³} + ε‖∇w‖⁴_{L⁴}` added to the left side in the mollified
//! system (`w = R_ε u`, and `κ(Q, ∇w)` in place of `κ(Q, ∇u)`). Records store
//! `activity = -κ(Q, ∇w)`, so the identity reads
//! `dE/dt + diss_u + diss_H - activity + eps terms = 0`.

use alloc::vec::Vec;

use crate::dynamics::{eps_dissipations_from, Model, SpectralState, StateFields};
use crate::lp::{build_partition, DyadicPartition};
use crate::spectral::{check_grid, QTensorField, Spectral, Spectrum};
use crate::tensor::{bulk_energy_density, ModelParams, QTensor};
use crate::{Error, Result};

/// One row of the energy ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    /// `½‖u‖²`.
    pub kinetic: f64,
    /// `½‖∇Q‖²`.
    pub elastic: f64,
    /// `∫ (a/2)|Q|² - (b/3)tr(Q³) + (c/4)|Q|⁴`.
    pub bulk: f64,
    pub e: f64,
    /// `μ‖∇u‖²`.
    pub diss_u: f64,
    /// `Γ∫tr(H²)`.
    pub diss_h: f64,
    /// `-κ(Q, ∇w)`.
    pub activity: f64,
    /// Relative residual of the energy identity (NaN until known).
    pub residual: f64,
    /// `‖∇Q‖²_{H^s} + ‖u‖²_{H^s}`.
    pub hs_phi: f64,
    /// `‖Q‖²_{L²}`.
    pub l2_q: f64,
    /// `‖Q‖⁴_{L⁴}`.
    pub l4_q: f64,
    /// `‖Q‖⁶_{L⁶}`.
    pub l6_q: f64,
    /// `ε‖w·∇Q‖³_{L³}`.
    pub eps_u_grad_q: f64,
    /// `ε‖∇w‖⁴_{L⁴}`.
    pub eps_grad_u: f64,
    /// Finite-difference `dE/dt` used for the residual (NaN until known).
    pub de_dt: f64,
    /// `‖∇u‖²`.
    pub grad_u_sq: f64,
    /// `‖ΔQ‖²`.
    pub lap_q_sq: f64,
}

impl EnergyRecord {
    /// Column names of the CSV ledger, in order.
    pub const CSV_COLUMNS: [&'static str; 15] = [
        "t",
        "kinetic",
        "elastic",
        "bulk",
        "E",
        "diss_u",
        "diss_H",
        "activity",
        "residual",
        "hs_phi",
        "l2_Q",
        "l4_Q",
        "l6_Q",
        "eps_u_gradQ",
        "eps_grad_u",
    ];

    pub fn csv_values(&self) -> [f64; 15] {
        [
            self.t,
            self.kinetic,
            self.elastic,
            self.bulk,
            self.e,
            self.diss_u,
            self.diss_h,
            self.activity,
            self.residual,
            self.hs_phi,
            self.l2_q,
            self.l4_q,
            self.l6_q,
            self.eps_u_grad_q,
            self.eps_grad_u,
        ]
    }

    /// `‖Q‖²_{H¹} = ‖Q‖² + ‖∇Q‖²`.
    pub fn h1_q_sq(&self) -> f64 {
        self.l2_q + 2.0 * self.elastic
    }

    /// Total dissipation on the left of the identity.
    pub fn dissipation(&self) -> f64 {
        self.diss_u + self.diss_h + self.eps_u_grad_q + self.eps_grad_u
    }
}

/// Measures energy records for one model; owns the Littlewood-Paley
/// partition used by `hs_phi`.
#[derive(Debug, Clone)]
pub struct EnergyProbe {
    partition: DyadicPartition,
    s: f64,
}

fn grad_sq(sp: &Spectral, f: &Spectrum) -> f64 {
    let (kx, ky) = sp.xi_deriv();
    f.data
        .iter()
        .enumerate()
        .map(|(i, c)| (kx[i] * kx[i] + ky[i] * ky[i]) * c.norm_sqr())
        .sum::<f64>()
        * f.grid.area()
}

fn lap_sq(sp: &Spectral, f: &Spectrum) -> f64 {
    let k2 = sp.xi_sq();
    f.data
        .iter()
        .enumerate()
        .map(|(i, c)| k2[i] * k2[i] * c.norm_sqr())
        .sum::<f64>()
        * f.grid.area()
}

impl EnergyProbe {
    pub fn new(model: &Model, s_exponent: f64) -> Self {
        EnergyProbe {
            partition: build_partition(model.grid()),
            s: s_exponent,
        }
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    /// Instantaneous record; `residual` and `de_dt` are NaN.
    pub fn measure(&self, model: &Model, s: &SpectralState) -> EnergyRecord {
        let sp = model.spectral();
        let p = model.params();
        let d = model.derive(s);
        let cell = model.grid().cell_area();
        let kinetic = 0.5 * (s.u[0].l2_sq() + s.u[1].l2_sq());
        let grad_q_sq = 2.0 * (grad_sq(sp, &s.q[0]) + grad_sq(sp, &s.q[1]));
        let elastic = 0.5 * grad_q_sq;
        let mut bulk = 0.0;
        let mut l4 = 0.0;
        let mut l6 = 0.0;
        let mut qgw = 0.0;
        for i in 0..d.q11.len() {
            let q = QTensor::new2(d.q11[i], d.q12[i]);
            bulk += bulk_energy_density(&q, p);
            let n2 = q.norm_sq();
            l4 += n2 * n2;
            l6 += n2 * n2 * n2;
            qgw += d.q11[i] * (d.w1x[i] - d.w2y[i]) + d.q12[i] * (d.w1y[i] + d.w2x[i]);
        }
        let grad_u_sq = grad_sq(sp, &s.u[0]) + grad_sq(sp, &s.u[1]);
        let h_sq = 2.0 * (d.h_spec[0].l2_sq() + d.h_spec[1].l2_sq());
        let (eps_u_grad_q, eps_grad_u) = eps_dissipations_from(&d, p.effective_eps(), cell);
        let (_, _, hs_phi) =
            self.partition
                .split_low_high_spec([&s.q[0], &s.q[1]], [&s.u[0], &s.u[1]], self.s);
        EnergyRecord {
            t: s.t,
            kinetic,
            elastic,
            bulk: bulk * cell,
            e: kinetic + elastic + bulk * cell,
            diss_u: p.mu * grad_u_sq,
            diss_h: p.gamma * h_sq,
            activity: -p.kappa * qgw * cell,
            residual: f64::NAN,
            hs_phi,
            l2_q: 2.0 * (s.q[0].l2_sq() + s.q[1].l2_sq()),
            l4_q: l4 * cell,
            l6_q: l6 * cell,
            eps_u_grad_q,
            eps_grad_u,
            de_dt: f64::NAN,
            grad_u_sq,
            lap_q_sq: 2.0 * (lap_sq(sp, &s.q[0]) + lap_sq(sp, &s.q[1])),
        }
    }
}

/// Instantaneous energy record of a physical state (taken as given).
pub fn energy(model: &Model, state: &StateFields, s_exponent: f64) -> Result<EnergyRecord> {
    let st = model.to_spectral(state)?;
    Ok(EnergyProbe::new(model, s_exponent).measure(model, &st))
}

const RESIDUAL_FLOOR: f64 = 1e-300;

/// `|dE/dt + dissipation - activity| / max(|dE/dt|, dissipation, |activity|, floor)`.
pub fn identity_residual(rec: &EnergyRecord, de_dt: f64) -> f64 {
    let diss = rec.dissipation();
    let sum = de_dt + diss - rec.activity;
    let scale = libm::fabs(de_dt)
        .max(diss)
        .max(libm::fabs(rec.activity))
        .max(RESIDUAL_FLOOR);
    libm::fabs(sum) / scale
}

/// Three-point derivative at the middle sample (second order on any
/// spacing; the centered difference on uniform spacing).
pub fn three_point_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    if h1 == h2 {
        return (f[2] - f[0]) / (2.0 * h1);
    }
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

/// Residual of the energy identity at `cur` from three consecutive,
/// uniformly spaced records.
pub fn energy_identity(
    prev: &EnergyRecord,
    cur: &EnergyRecord,
    next: &EnergyRecord,
) -> Result<f64> {
    let h1 = cur.t - prev.t;
    let h2 = next.t - cur.t;
    if !(h1 > 0.0 && h2 > 0.0) || libm::fabs(h1 - h2) > 1e-9 * h1.max(h2) {
        return Err(Error::NonUniformSpacing);
    }
    let de = (next.e - prev.e) / (h1 + h2);
    Ok(identity_residual(cur, de))
}

/// Fills `residual` and `de_dt` of a stream of records one record late:
/// three-point differences inside, one-sided at the ends, NaN for a lone
/// record.
#[derive(Debug, Clone)]
pub struct ResidualTracker {
    before: Option<EnergyRecord>,
    pending: Option<EnergyRecord>,
}

impl ResidualTracker {
    pub fn new(_p: ModelParams) -> Self {
        ResidualTracker {
            before: None,
            pending: None,
        }
    }

    fn complete(mut rec: EnergyRecord, de: f64) -> EnergyRecord {
        rec.de_dt = de;
        rec.residual = identity_residual(&rec, de);
        rec
    }

    /// Adds a record; returns the previous one once its residual is known.
    pub fn push(&mut self, rec: EnergyRecord) -> Option<EnergyRecord> {
        let Some(p) = self.pending.replace(rec) else {
            return None;
        };
        let rec = self.pending.as_ref()?;
        let de = match &self.before {
            Some(b) => three_point_derivative([b.t, p.t, rec.t], [b.e, p.e, rec.e]),
            None => (rec.e - p.e) / (rec.t - p.t),
        };
        let done = Self::complete(p, de);
        self.before = Some(done.clone());
        Some(done)
    }

    /// Completes the last record with a backward difference.
    pub fn finish(&mut self) -> Option<EnergyRecord> {
        let p = self.pending.take()?;
        match &self.before {
            Some(b) => {
                let de = (p.e - b.e) / (p.t - b.t);
                Some(Self::complete(p, de))
            }
            None => Some(p),
        }
    }
}

/// Fills residuals of a complete series in place (same rules as
/// [`ResidualTracker`]).
pub fn fill_residuals(records: &mut [EnergyRecord]) {
    let mut tr = ResidualTracker::new(ModelParams::default());
    let mut out = Vec::with_capacity(records.len());
    for r in records.iter() {
        if let Some(done) = tr.push(r.clone()) {
            out.push(done);
        }
    }
    if let Some(done) = tr.finish() {
        out.push(done);
    }
    for (r, o) in records.iter_mut().zip(out) {
        *r = o;
    }
}

/// Margin of `dE/dt + (μ/2)‖∇u‖² + Γ∫tr(H²) <= (κ²/(2μ))‖Q‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    /// Right side minus left side.
    pub margin: f64,
    /// Largest magnitude among the terms, for relative tolerances.
    pub scale: f64,
}

/// Evaluates the energy inequality at a record whose `de_dt` is known.
pub fn energy_inequality(rec: &EnergyRecord, p: &ModelParams) -> InequalityReport {
    let rhs = p.kappa * p.kappa / (2.0 * p.mu) * rec.l2_q;
    let half_u = 0.5 * rec.diss_u;
    let lhs = rec.de_dt + half_u + rec.diss_h;
    let scale = libm::fabs(rec.de_dt)
        .max(half_u + rec.diss_h)
        .max(rhs)
        .max(RESIDUAL_FLOOR);
    InequalityReport {
        margin: rhs - lhs,
        scale,
    }
}

/// Fitted Gronwall envelopes for `‖Q‖_{H¹}` and the kinetic energy plus
/// integrated viscous dissipation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Unclamped least-squares slope of `ln ‖Q‖_{H¹}`.
    pub fitted_slope: f64,
    /// `‖Q̄‖²_{H¹} + ‖ū‖²`.
    pub initial_size: f64,
    pub holds: bool,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return (0.0, my, 1.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, my - slope * mx, r2)
}

/// Fits `‖Q(t)‖_{H¹} <= C1 e^{C2 t} Y0` and
/// `½‖u‖² + (μ/4)∫‖∇u‖² <= C3 Y0 e^{C2 t} + C4` with `Y0 = ‖Q̄‖²_{H¹} + ‖ū‖²`.
/// `C2` is the clamped log-linear slope; `C1`, `C3` are the smallest values
/// covering the series.
pub fn apriori_monitor(records: &[EnergyRecord], p: &ModelParams) -> Result<AprioriReport> {
    let first = records.first().ok_or(Error::EmptySeries)?;
    let y0 = first.h1_q_sq() + 2.0 * first.kinetic;
    let t0 = first.t;
    let ts: Vec<f64> = records.iter().map(|r| r.t - t0).collect();
    let h1: Vec<f64> = records.iter().map(|r| libm::sqrt(r.h1_q_sq())).collect();
    // kinetic plus (μ/4)∫‖∇u‖² by the trapezoidal rule
    let mut kin = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            let prev = &records[i - 1];
            acc += 0.5 * (r.t - prev.t) * (r.grad_u_sq + prev.grad_u_sq);
        }
        kin.push(r.kinetic + 0.25 * p.mu * acc);
    }
    if y0 == 0.0 {
        let zero = h1.iter().all(|v| *v == 0.0);
        let c4 = kin.iter().cloned().fold(0.0, f64::max);
        return Ok(AprioriReport {
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            c4,
            fitted_slope: 0.0,
            initial_size: 0.0,
            holds: zero,
        });
    }
    let positive: Vec<(f64, f64)> = ts
        .iter()
        .zip(&h1)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, libm::log(*v)))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
    let slope = if xs.len() >= 2 {
        linear_fit(&xs, &ys).0
    } else {
        0.0
    };
    let c2 = slope.max(0.0);
    let c1 = ts
        .iter()
        .zip(&h1)
        .map(|(t, v)| v * libm::exp(-c2 * t) / y0)
        .fold(0.0, f64::max);
    let c3 = ts
        .iter()
        .zip(&kin)
        .map(|(t, v)| v * libm::exp(-c2 * t) / y0)
        .fold(0.0, f64::max);
    let holds = ts.iter().zip(h1.iter().zip(&kin)).all(|(t, (h, k))| {
        let g = libm::exp(c2 * t) * y0;
        *h <= c1 * g * (1.0 + 1e-12) && *k <= c3 * g * (1.0 + 1e-12)
    });
    let ok = c1.is_finite() && c3.is_finite();
    Ok(AprioriReport {
        c1,
        c2,
        c3,
        c4: 0.0,
        fitted_slope: slope,
        initial_size: y0,
        holds: holds && ok,
    })
}

/// Linear cover `ln ln(e + φ(t)) <= α + β t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub alpha: f64,
    pub beta: f64,
    /// Unclamped least-squares slope.
    pub fitted_slope: f64,
    pub r_squared: f64,
    pub holds: bool,
}

/// Fits `g = ln ln(e + φ)` linearly in `t`; `β = max(slope, 0)` and `α` is
/// the smallest intercept covering every sample.
pub fn growth_bound_check(ts: &[f64], phi: &[f64]) -> Result<GrowthReport> {
    if ts.is_empty() {
        return Err(Error::EmptySeries);
    }
    if ts.len() != phi.len() {
        return Err(Error::MismatchedSeries);
    }
    if phi.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "phi series must be finite and nonnegative".into(),
        ));
    }
    let g: Vec<f64> = phi
        .iter()
        .map(|v| libm::log(libm::log(core::f64::consts::E + v)))
        .collect();
    let (slope, _, r2) = linear_fit(ts, &g);
    let beta = slope.max(0.0);
    let alpha = ts
        .iter()
        .zip(&g)
        .map(|(t, v)| v - beta * t)
        .fold(f64::NEG_INFINITY, f64::max);
    let holds = ts
        .iter()
        .zip(&g)
        .all(|(t, v)| *v <= alpha + beta * t + 1e-12 * (1.0 + libm::fabs(*v)));
    Ok(GrowthReport {
        alpha,
        beta,
        fitted_slope: slope,
        r_squared: r2,
        holds,
    })
}

/// Differences between two runs at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwinDelta {
    pub t: f64,
    /// `‖δQ‖²`.
    pub dq_l2: f64,
    /// `‖∇δQ‖² + ‖δQ‖²`.
    pub dq_h1: f64,
    /// `‖δu‖²`.
    pub du_l2: f64,
}

impl TwinDelta {
    /// `‖δQ‖²_{H¹} + ‖δu‖²`, the quantity controlled by the Gronwall bound.
    pub fn total(&self) -> f64 {
        self.dq_h1 + self.du_l2
    }
}

/// Grid-quadrature differences of two states on the same grid.
pub fn twin_delta(sp: &Spectral, a: &StateFields, b: &StateFields) -> Result<TwinDelta> {
    check_grid(&a.grid(), &b.grid())?;
    check_grid(&sp.grid(), &a.grid())?;
    let dq = QTensorField {
        q11: a.q.q11.sub(&b.q.q11)?,
        q12: a.q.q12.sub(&b.q.q12)?,
    };
    let dq_l2 = dq.l2_sq();
    let (s0, s1) = sp.forward_pair(&dq.q11.data, &dq.q12.data);
    let grad = 2.0 * (grad_sq(sp, &s0) + grad_sq(sp, &s1));
    let du_l2 = a.u.ux.sub(&b.u.ux)?.l2_sq() + a.u.uy.sub(&b.u.uy)?.l2_sq();
    Ok(TwinDelta {
        t: a.t,
        dq_l2,
        dq_h1: dq_l2 + grad,
        du_l2,
    })
}

/// Pointwise maxima of a state and its derivatives (Frobenius norms).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SupNorms {
    pub q: f64,
    pub grad_q: f64,
    pub lap_q: f64,
    pub u: f64,
    pub grad_u: f64,
}

pub fn sup_norms(model: &Model, s: &SpectralState) -> SupNorms {
    let sp = model.spectral();
    let (q11, q12) = sp.inverse_pair(&s.q[0], &s.q[1]);
    let (a, b) = sp.inverse_pair(&sp.deriv_spec(&s.q[0], 0), &sp.deriv_spec(&s.q[0], 1));
    let (c, d) = sp.inverse_pair(&sp.deriv_spec(&s.q[1], 0), &sp.deriv_spec(&s.q[1], 1));
    let (l1, l2) = sp.inverse_pair(&sp.laplacian_spec(&s.q[0]), &sp.laplacian_spec(&s.q[1]));
    let (ux, uy) = sp.inverse_pair(&s.u[0], &s.u[1]);
    let (e, f) = sp.inverse_pair(&sp.deriv_spec(&s.u[0], 0), &sp.deriv_spec(&s.u[0], 1));
    let (g, h) = sp.inverse_pair(&sp.deriv_spec(&s.u[1], 0), &sp.deriv_spec(&s.u[1], 1));
    let mut out = SupNorms::default();
    for i in 0..q11.data.len() {
        let sq = |x: f64| x * x;
        out.q = out
            .q
            .max(libm::sqrt(2.0 * (sq(q11.data[i]) + sq(q12.data[i]))));
        out.grad_q = out.grad_q.max(libm::sqrt(
            2.0 * (sq(a.data[i]) + sq(b.data[i]) + sq(c.data[i]) + sq(d.data[i])),
        ));
        out.lap_q = out
            .lap_q
            .max(libm::sqrt(2.0 * (sq(l1.data[i]) + sq(l2.data[i]))));
        out.u = out.u.max(libm::sqrt(sq(ux.data[i]) + sq(uy.data[i])));
        out.grad_u = out.grad_u.max(libm::sqrt(
            sq(e.data[i]) + sq(f.data[i]) + sq(g.data[i]) + sq(h.data[i]),
        ));
    }
    out
}

/// Growth rate for the twin-run Gronwall bound on `‖δQ‖²_{H¹} + ‖δu‖²`:
/// `2 C (1 + ‖∇Q₂‖² + ‖u₂‖² + ‖Q₁‖² + ‖Q₂‖² + ‖∇u₂‖² + ‖ΔQ₂‖² + ‖Q₁‖⁴ + ‖Q₂‖⁴)`
/// (sup norms) with `C = max(1, |a|Γ, κ²/μ, |λ|, cΓ, 1/μ, 1/Γ)`.
pub fn twin_growth_rate(p: &ModelParams, strong: &SupNorms, other_q_sup: f64) -> f64 {
    let c = [
        1.0,
        libm::fabs(p.a) * p.gamma,
        p.kappa * p.kappa / p.mu,
        libm::fabs(p.lambda),
        p.c * p.gamma,
        1.0 / p.mu,
        1.0 / p.gamma,
    ]
    .iter()
    .cloned()
    .fold(0.0, f64::max);
    let sq = |x: f64| x * x;
    2.0 * c
        * (1.0
            + sq(strong.grad_q)
            + sq(strong.u)
            + sq(other_q_sup)
            + sq(strong.q)
            + sq(strong.grad_u)
            + sq(strong.lap_q)
            + sq(sq(other_q_sup))
            + sq(sq(strong.q)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub envelope: Vec<f64>,
    /// `max Y / envelope` (0 when both vanish).
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Discrete check of `Y(t) <= Y(0) e^{∫₀ᵗα} + ∫₀ᵗ β(s) e^{∫ₛᵗα} ds` with
/// trapezoidal quadrature; `tol` is the allowed relative excess.
pub fn gronwall_envelope(
    ts: &[f64],
    y: &[f64],
    alpha: &[f64],
    beta: &[f64],
    tol: f64,
) -> Result<GronwallReport> {
    if ts.is_empty() {
        return Err(Error::EmptySeries);
    }
    if y.len() != ts.len() || alpha.len() != ts.len() || beta.len() != ts.len() {
        return Err(Error::MismatchedSeries);
    }
    if alpha.iter().chain(beta).any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParameter(
            "alpha and beta must be >= 0".into(),
        ));
    }
    let mut envelope = Vec::with_capacity(ts.len());
    let mut big_a = 0.0; // ∫₀ᵗ α
    let mut acc = 0.0; // ∫₀ᵗ β e^{-∫₀ˢα}
    envelope.push(y[0]);
    for i in 1..ts.len() {
        let h = ts[i] - ts[i - 1];
        let a_prev = big_a;
        big_a += 0.5 * h * (alpha[i] + alpha[i - 1]);
        acc += 0.5 * h * (beta[i] * libm::exp(-big_a) + beta[i - 1] * libm::exp(-a_prev));
        envelope.push(libm::exp(big_a) * (y[0] + acc));
    }
    let mut worst: f64 = 0.0;
    let mut holds = true;
    for (yi, ei) in y.iter().zip(&envelope) {
        if *ei > 0.0 {
            worst = worst.max(yi / ei);
        } else if *yi > 0.0 {
            worst = f64::INFINITY;
        }
        if *yi > ei * (1.0 + tol) + 1e-300 {
            holds = false;
        }
    }
    Ok(GronwallReport {
        envelope,
        worst_ratio: worst,
        holds,
    })
}

/// Observed constant in `‖∇Q‖_{L³} <= C ‖D²Q‖^{1/2}_{L²} ‖Q‖^{1/2}_{L⁶}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub grad_l3: f64,
    pub hess_l2: f64,
    pub q_l6: f64,
    pub constant: f64,
}

pub fn interpolation_check(sp: &Spectral, q: &QTensorField) -> Result<InterpolationReport> {
    check_grid(&sp.grid(), &q.grid())?;
    if q.q11.max_abs() == 0.0 && q.q12.max_abs() == 0.0 {
        return Err(Error::ZeroField);
    }
    let (s0, s1) = sp.forward_pair(&q.q11.data, &q.q12.data);
    let (a, b) = sp.inverse_pair(&sp.deriv_spec(&s0, 0), &sp.deriv_spec(&s0, 1));
    let (c, d) = sp.inverse_pair(&sp.deriv_spec(&s1, 0), &sp.deriv_spec(&s1, 1));
    let cell = sp.grid().cell_area();
    let mut g3 = 0.0;
    let mut q6 = 0.0;
    for i in 0..a.data.len() {
        let g2 = 2.0
            * (a.data[i] * a.data[i]
                + b.data[i] * b.data[i]
                + c.data[i] * c.data[i]
                + d.data[i] * d.data[i]);
        g3 += g2 * libm::sqrt(g2);
        let n2 = q.at(i).norm_sq();
        q6 += n2 * n2 * n2;
    }
    let grad_l3 = libm::cbrt(g3 * cell);
    let q_l6 = libm::pow(q6 * cell, 1.0 / 6.0);
    // ‖D²Q‖² = Σ_{γδ} ‖∂_γ∂_δ Q‖², which is Σ (ξ_x² + ξ_y²)² |Q̂|² with
    // derivative wavenumbers
    let (kx, ky) = sp.xi_deriv();
    let mut h2 = 0.0;
    for i in 0..s0.data.len() {
        let k2 = kx[i] * kx[i] + ky[i] * ky[i];
        h2 += k2 * k2 * (s0.data[i].norm_sqr() + s1.data[i].norm_sqr());
    }
    let hess_l2 = libm::sqrt(2.0 * h2 * sp.grid().area());
    let denom = libm::sqrt(hess_l2 * q_l6);
    let constant = if grad_l3 == 0.0 { 0.0 } else { grad_l3 / denom };
    Ok(InterpolationReport {
        grad_l3,
        hess_l2,
        q_l6,
        constant,
    })
}
