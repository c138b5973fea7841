//! Exponential time differencing (ETD) Runge-Kutta stepping.
//!
//! The stiff linear parts `ΓΔQ` and `μΔu` are propagated exactly mode by
//! mode; the rest is treated explicitly. Order 2 is the Cox-Matthews ETD2RK
//! scheme,
//!
//! ```text
//! a     = e^{z} x + dt φ1(z) N(x)
//! x_new = a + dt φ2(z) (N(a) - N(x)),      z = L dt,
//! ```
//!
//! and order 1 is exponential Euler (the first line alone).

use alloc::vec::Vec;

use crate::diagnostics::{EnergyProbe, EnergyRecord, ResidualTracker};
use crate::dynamics::{Model, SpectralRhs, SpectralState, StateFields};
use crate::spectral::Spectrum;
use crate::{Error, Result};

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSetup {
    pub dt: f64,
    pub t_end: f64,
    /// Used by [`cfl_dt`] and in adaptive mode.
    pub cfl_target: f64,
    pub dt_max: f64,
    /// Re-evaluate the step from [`cfl_dt`] every step (capped by `dt`).
    pub adaptive: bool,
    /// 1 (exponential Euler) or 2 (ETD2RK).
    pub order: u8,
    /// Energy records every this much time; 0 records every step.
    pub energy_every: f64,
    /// Snapshots every this much time; 0 every step, `None` never.
    pub snapshot_every: Option<f64>,
}

impl Default for TimeSetup {
    fn default() -> Self {
        TimeSetup {
            dt: 1e-3,
            t_end: 1.0,
            cfl_target: 0.5,
            dt_max: 1e-2,
            adaptive: false,
            order: 2,
            energy_every: 0.0,
            snapshot_every: None,
        }
    }
}

impl TimeSetup {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter("t_end must be >= 0".into()));
        }
        if !(self.cfl_target > 0.0 && self.cfl_target <= 1.0) {
            return Err(Error::InvalidParameter(
                "cfl_target must be in (0, 1]".into(),
            ));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::InvalidParameter("dt_max must be > 0".into()));
        }
        if self.order != 1 && self.order != 2 {
            return Err(Error::InvalidParameter(
                "scheme order must be 1 or 2".into(),
            ));
        }
        if !(self.energy_every >= 0.0) {
            return Err(Error::InvalidParameter("energy_every must be >= 0".into()));
        }
        if let Some(s) = self.snapshot_every {
            if !(s >= 0.0) {
                return Err(Error::InvalidParameter(
                    "snapshot_every must be >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `min(dt_max, cfl Δx / max|u|, cfl / (Γ(|a| + 3c max|Q|^2)))`; the
/// advective and reaction limits are skipped when they are unbounded.
pub fn cfl_dt(model: &Model, state: &StateFields, cfl_target: f64, dt_max: f64) -> Result<f64> {
    if !state.is_finite() {
        return Err(Error::NonFinite {
            what: "state passed to cfl_dt",
        });
    }
    let p = model.params();
    let mut dt = dt_max;
    let umax = state.u.max_speed();
    if umax > 0.0 {
        dt = dt.min(cfl_target * model.grid().dx() / umax);
    }
    let qmax2 = (0..state.q.grid().len())
        .map(|i| state.q.at(i).norm_sq())
        .fold(0.0, f64::max);
    let rate = p.gamma * (libm::fabs(p.a) + 3.0 * p.c * qmax2);
    if rate > 0.0 {
        dt = dt.min(cfl_target / rate);
    }
    Ok(dt)
}

/// `φ1(z) = (e^z - 1)/z` and `φ2(z) = (e^z - 1 - z)/z^2`, by Taylor series
/// for `|z| < 1`.
pub fn phi_functions(z: f64) -> (f64, f64) {
    if libm::fabs(z) < 1.0 {
        // Σ z^k/(k+1)! and Σ z^k/(k+2)!, 18 terms
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for k in (0..18).rev() {
            p1 = p1 * z + 1.0 / factorial(k + 1);
            p2 = p2 * z + 1.0 / factorial(k + 2);
        }
        (p1, p2)
    } else {
        let em1 = libm::expm1(z);
        (em1 / z, (em1 - z) / (z * z))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Per-mode exponential coefficients for one step size.
#[derive(Debug, Clone)]
struct Coefficients {
    dt: f64,
    e_q: Vec<f64>,
    p1_q: Vec<f64>,
    p2_q: Vec<f64>,
    e_u: Vec<f64>,
    p1_u: Vec<f64>,
    p2_u: Vec<f64>,
}

impl Coefficients {
    fn new(model: &Model, dt: f64) -> Self {
        let k2 = model.spectral().xi_sq();
        let p = model.params();
        let make = |rate: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
            let mut e = Vec::with_capacity(k2.len());
            let mut a = Vec::with_capacity(k2.len());
            let mut b = Vec::with_capacity(k2.len());
            for &k in k2 {
                let z = -rate * k * dt;
                let (p1, p2) = phi_functions(z);
                e.push(libm::exp(z));
                a.push(dt * p1);
                b.push(dt * p2);
            }
            (e, a, b)
        };
        let (e_q, p1_q, p2_q) = make(p.gamma);
        let (e_u, p1_u, p2_u) = make(p.mu);
        Coefficients {
            dt,
            e_q,
            p1_q,
            p2_q,
            e_u,
            p1_u,
            p2_u,
        }
    }
}

/// A reusable stepper that caches the exponential coefficients.
#[derive(Debug, Clone)]
pub struct Stepper<'m> {
    model: &'m Model,
    order: u8,
    coeffs: Option<Coefficients>,
}

fn combine(x: &Spectrum, e: &[f64], n: &Spectrum, p1: &[f64]) -> Spectrum {
    let data = x
        .data
        .iter()
        .zip(e)
        .zip(n.data.iter().zip(p1))
        .map(|((xv, ev), (nv, pv))| xv * *ev + nv * *pv)
        .collect();
    Spectrum { grid: x.grid, data }
}

fn correct(a: &mut Spectrum, na: &Spectrum, nx: &Spectrum, p2: &[f64]) {
    for (((av, nav), nxv), pv) in a.data.iter_mut().zip(&na.data).zip(&nx.data).zip(p2) {
        *av += (nav - nxv) * *pv;
    }
}

impl<'m> Stepper<'m> {
    pub fn new(model: &'m Model, order: u8) -> Self {
        Stepper {
            model,
            order,
            coeffs: None,
        }
    }

    fn coeffs(&mut self, dt: f64) -> &Coefficients {
        let stale = self.coeffs.as_ref().map_or(true, |c| c.dt != dt);
        if stale {
            self.coeffs = Some(Coefficients::new(self.model, dt));
        }
        self.coeffs.as_ref().unwrap()
    }

    fn euler(&self, c: &Coefficients, x: &SpectralState, nx: &SpectralRhs) -> SpectralState {
        SpectralState {
            t: x.t + c.dt,
            q: [
                combine(&x.q[0], &c.e_q, &nx.q[0], &c.p1_q),
                combine(&x.q[1], &c.e_q, &nx.q[1], &c.p1_q),
            ],
            u: [
                combine(&x.u[0], &c.e_u, &nx.u[0], &c.p1_u),
                combine(&x.u[1], &c.e_u, &nx.u[1], &c.p1_u),
            ],
        }
    }

    /// Advances `x` by `dt`.
    pub fn step(&mut self, x: &SpectralState, dt: f64) -> Result<SpectralState> {
        let model = self.model;
        let order = self.order;
        let nx = model.nonlinear(x)?;
        let c = self.coeffs(dt).clone();
        let mut a = self.euler(&c, x, &nx);
        self.reproject(&mut a);
        if order == 2 {
            let na = model.nonlinear(&a)?;
            for k in 0..2 {
                correct(&mut a.q[k], &na.q[k], &nx.q[k], &c.p2_q);
                correct(&mut a.u[k], &na.u[k], &nx.u[k], &c.p2_u);
            }
            self.reproject(&mut a);
        }
        if !a.is_finite() {
            return Err(Error::NonFinite {
                what: "state after step",
            });
        }
        Ok(a)
    }

    fn reproject(&self, s: &mut SpectralState) {
        let [u0, u1] = &mut s.u;
        self.model.spectral().leray_spec(u0, u1);
    }
}

/// Single step with a fresh stepper.
pub fn step(model: &Model, state: &SpectralState, dt: f64, order: u8) -> Result<SpectralState> {
    Stepper::new(model, order).step(state, dt)
}

/// Receives the outputs of [`run`].
pub trait Sink {
    fn record(&mut self, rec: &EnergyRecord) -> Result<()>;
    fn snapshot(&mut self, state: &StateFields) -> Result<()>;
}

/// Collects everything in memory.
#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub records: Vec<EnergyRecord>,
    pub snapshots: Vec<StateFields>,
}

impl Sink for MemorySink {
    fn record(&mut self, rec: &EnergyRecord) -> Result<()> {
        self.records.push(rec.clone());
        Ok(())
    }

    fn snapshot(&mut self, state: &StateFields) -> Result<()> {
        self.snapshots.push(state.clone());
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// A non-finite value appeared at time `t` while computing `what`.
    BlowUp {
        t: f64,
        what: &'static str,
    },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Last finite state.
    pub state: SpectralState,
    pub steps: usize,
    pub status: RunStatus,
}

/// Integrates from `state0` (already prepared with [`Model::prepare`]) to
/// `setup.t_end`, streaming energy records and snapshots to `sink`.
///
/// Record residuals are filled in one record late (they need the next
/// record's energy), so every record reaches the sink exactly once, in order.
/// On blow-up, pending records are flushed and the outcome says so.
pub fn run(
    model: &Model,
    state0: SpectralState,
    setup: &TimeSetup,
    s_exponent: f64,
    sink: &mut dyn Sink,
) -> Result<RunOutcome> {
    setup.validate()?;
    let probe = EnergyProbe::new(model, s_exponent);
    let mut tracker = ResidualTracker::new(*model.params());
    let mut stepper = Stepper::new(model, setup.order);
    let t0 = state0.t;
    let mut state = state0;
    let mut steps = 0usize;
    let mut next_energy = t0;
    let mut next_snap = setup.snapshot_every.map(|_| t0);
    let tiny = 1e-9 * setup.dt;

    let emit =
        |state: &SpectralState, tracker: &mut ResidualTracker, sink: &mut dyn Sink| -> Result<()> {
            if let Some(done) = tracker.push(probe.measure(model, state)) {
                sink.record(&done)?;
            }
            Ok(())
        };

    emit(&state, &mut tracker, sink)?;
    next_energy += setup.energy_every;
    if let (Some(every), Some(ns)) = (setup.snapshot_every, next_snap.as_mut()) {
        sink.snapshot(&model.to_fields(&state))?;
        *ns += every;
    }

    let status = loop {
        let remaining = setup.t_end - (state.t - t0);
        if remaining <= tiny {
            break RunStatus::Completed;
        }
        let mut dt = setup.dt;
        if setup.adaptive {
            let f = model.to_fields(&state);
            dt = dt.min(cfl_dt(model, &f, setup.cfl_target, setup.dt_max)?);
        }
        let last = remaining <= dt + tiny;
        if last {
            dt = remaining;
        }
        match stepper.step(&state, dt) {
            Ok(mut next) => {
                steps += 1;
                // fixed-step runs use t = t0 + k dt exactly
                next.t = if last {
                    t0 + setup.t_end
                } else if setup.adaptive {
                    state.t + dt
                } else {
                    t0 + steps as f64 * setup.dt
                };
                state = next;
            }
            Err(Error::NonFinite { what }) => {
                break RunStatus::BlowUp {
                    t: state.t + dt,
                    what,
                }
            }
            Err(e) => return Err(e),
        }
        let t = state.t;
        if last || setup.energy_every == 0.0 || t + tiny >= next_energy {
            emit(&state, &mut tracker, sink)?;
            if setup.energy_every > 0.0 {
                while next_energy <= t + tiny {
                    next_energy += setup.energy_every;
                }
            }
        }
        if let (Some(every), Some(ns)) = (setup.snapshot_every, next_snap.as_mut()) {
            if every == 0.0 || t + tiny >= *ns || last {
                sink.snapshot(&model.to_fields(&state))?;
                if every > 0.0 {
                    while *ns <= t + tiny {
                        *ns += every;
                    }
                }
            }
        }
    };
    if let Some(done) = tracker.finish() {
        sink.record(&done)?;
    }
    Ok(RunOutcome {
        state,
        steps,
        status,
    })
}
