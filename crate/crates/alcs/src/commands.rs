//! Subcommand implementations. Each returns a report; the binary maps it
//! to an exit code with [`ExitCode`].

use std::io::Write;
use std::path::{Path, PathBuf};

use alcs_core::diagnostics::{
    apriori_monitor, energy_inequality, gronwall_envelope, growth_bound_check, sup_norms,
    twin_delta, twin_growth_rate, EnergyRecord, TwinDelta,
};
use alcs_core::dynamics::{corotation_terms, Model, StateFields};
use alcs_core::integrator::{run, MemorySink, RunStatus, TimeSetup};
use alcs_core::lp::build_partition;
use alcs_core::spectral::{Grid2D, ScalarField, Spectral, VelocityField};
use alcs_core::tensor::{
    molecular_field_full, trace_cubic_bound_check, Mode, ModelParams, QTensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{IcKind, LoadError, RunConfig};
use crate::initial::{make_initial, random_q, random_velocity, InitError};
use crate::ledger::{write_csv, RunSink, SWEEP_COLUMNS, SWEEP_CSV, TWIN_COLUMNS, TWIN_CSV};
use crate::snapshot::{read_snapshot, write_state, SnapshotIoError};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitCode {
    Ok = 0,
    CheckFailed = 1,
    BlowUp = 2,
    Io = 3,
    TwinMismatch = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] LoadError),
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotIoError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] alcs_core::Error),
    #[error("twin runs are not comparable: {0}")]
    TwinMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::TwinMismatch(_) => ExitCode::TwinMismatch,
            _ => ExitCode::Io,
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn time_setup(cfg: &RunConfig) -> TimeSetup {
    TimeSetup {
        dt: cfg.dt,
        t_end: cfg.t_end,
        cfl_target: cfg.cfl_target,
        dt_max: cfg.dt_max,
        adaptive: cfg.adaptive,
        order: cfg.order,
        energy_every: cfg.energy_every,
        snapshot_every: cfg.snapshot_every,
    }
}

/// One line of a post-run or `check` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        CheckLine {
            name: name.into(),
            pass,
            detail,
        }
    }
}

pub fn format_table(lines: &[CheckLine]) -> String {
    let w = lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for l in lines {
        s.push_str(&format!(
            "{} {:w$}  {}\n",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        ));
    }
    s
}

#[derive(Debug)]
pub struct RunSummary {
    pub records: Vec<EnergyRecord>,
    pub steps: usize,
    pub status: RunStatus,
    pub final_state: StateFields,
    pub checks: Vec<CheckLine>,
    pub out_dir: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> ExitCode {
        match self.status {
            RunStatus::Completed => ExitCode::Ok,
            RunStatus::BlowUp { .. } => ExitCode::BlowUp,
        }
    }
}

/// Largest residual at interior records (the two end records use one-sided
/// differences and are left out). NaN with fewer than three records or when
/// any interior residual is NaN.
pub fn max_interior_residual(records: &[EnergyRecord]) -> f64 {
    if records.len() < 3 {
        return f64::NAN;
    }
    records[1..records.len() - 1]
        .iter()
        .map(|r| r.residual)
        .fold(0.0, |m, r| {
            if r.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(r)
            }
        })
}

fn post_checks(
    cfg: &RunConfig,
    model: &Model,
    records: &[EnergyRecord],
    final_state: &StateFields,
) -> Vec<CheckLine> {
    let p = model.params();
    let sparse = if cfg.energy_every > 0.0 {
        format!(
            "; records every {} use a coarse dE/dt, set energy_every = 0 for this check",
            cfg.energy_every
        )
    } else {
        String::new()
    };
    let mut out = Vec::new();
    for name in &cfg.checks {
        let line = match name.as_str() {
            "identity" if records.len() < 3 => {
                CheckLine::new("identity", true, "skipped: needs at least 3 records".into())
            }
            "identity" => {
                let r = max_interior_residual(records);
                CheckLine::new(
                    "identity",
                    r <= 1e-4,
                    format!("max interior residual {r:.3e} (tol 1e-4){sparse}"),
                )
            }
            "inequality" => {
                let worst = records.iter().map(|r| {
                    let rep = energy_inequality(r, p);
                    rep.margin / rep.scale
                });
                let worst = worst.filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
                if worst == f64::INFINITY {
                    CheckLine::new(
                        "inequality",
                        true,
                        "skipped: no record with a defined dE/dt".into(),
                    )
                } else {
                    CheckLine::new(
                        "inequality",
                        worst >= -1e-6,
                        format!("min margin/scale {worst:.3e} (tol -1e-6){sparse}"),
                    )
                }
            }
            "apriori" => match apriori_monitor(records, p) {
                Ok(a) => CheckLine::new(
                    "apriori",
                    a.holds,
                    format!("C1 {:.4e} C2 {:.4e} C3 {:.4e}", a.c1, a.c2, a.c3),
                ),
                Err(e) => CheckLine::new("apriori", false, e.to_string()),
            },
            "growth" => {
                let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
                let phi: Vec<f64> = records.iter().map(|r| r.hs_phi).collect();
                match growth_bound_check(&ts, &phi) {
                    Ok(g) => CheckLine::new(
                        "growth",
                        g.holds,
                        format!(
                            "alpha {:.4e} beta {:.4e} R^2 {:.4}",
                            g.alpha, g.beta, g.r_squared
                        ),
                    ),
                    Err(e) => CheckLine::new("growth", false, e.to_string()),
                }
            }
            "shadow_trace" => match model.to_spectral(final_state) {
                Ok(x) => {
                    let tr = model.rhs_shadow_trace(&x);
                    CheckLine::new(
                        "shadow_trace",
                        tr <= 1e-12,
                        format!("rhs trace {tr:.3e} (tol 1e-12)"),
                    )
                }
                Err(e) => CheckLine::new("shadow_trace", false, e.to_string()),
            },
            other => CheckLine::new(other, false, "unknown check".into()),
        };
        out.push(line);
    }
    out
}

/// Full simulation: `energy.csv`, optional snapshots, a final checkpoint
/// (`checkpoint.bin` plus `checkpoint.cfg`, a config that restarts from it)
/// and `report.txt`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let g = cfg.grid();
    let model = Model::new(g, cfg.params)?;
    let s0 = make_initial(cfg)?;
    let x0 = model.prepare(&s0)?;
    let t_start = x0.t;
    let mut sink = RunSink::create(&cfg.out_dir).map_err(io(&cfg.out_dir))?;
    let outcome = run(&model, x0, &time_setup(cfg), cfg.s_exponent, &mut sink);
    sink.flush().map_err(io(&cfg.out_dir))?;
    let outcome = outcome?;
    let final_state = model.to_fields(&outcome.state);

    let ck = cfg.out_dir.join("checkpoint.bin");
    write_state(&ck, &final_state)?;
    let mut restart = cfg.clone();
    restart.ic.kind = IcKind::File;
    restart.ic.path = Some(PathBuf::from("checkpoint.bin"));
    restart.ic.perturb = 0.0;
    restart.t_end = (t_start + cfg.t_end - final_state.t).max(0.0);
    restart.out_dir = PathBuf::from("restart");
    let echo = format!(
        "# restart point t = {:?}; initial data came from ic = {}, seed = {}, perturb_seed = {}\n{}",
        final_state.t,
        cfg.ic.kind.name(),
        cfg.ic.seed,
        cfg.ic.perturb_seed,
        restart.to_text()
    );
    let ck_cfg = cfg.out_dir.join("checkpoint.cfg");
    std::fs::write(&ck_cfg, echo).map_err(io(&ck_cfg))?;

    let checks = post_checks(cfg, &model, &sink.records, &final_state);
    let mut report = format!("steps {}\nstatus {:?}\n", outcome.steps, outcome.status);
    report.push_str(&format_table(&checks));
    let rp = cfg.out_dir.join("report.txt");
    std::fs::write(&rp, report).map_err(io(&rp))?;
    Ok(RunSummary {
        records: sink.records,
        steps: outcome.steps,
        status: outcome.status,
        final_state,
        checks,
        out_dir: cfg.out_dir.clone(),
    })
}

// ---------------------------------------------------------------- check

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub n: usize,
    pub params: ModelParams,
    pub seed: u64,
    pub inject_sign_flip: bool,
}

impl CheckOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        CheckOptions {
            n: cfg.n,
            params: cfg.params,
            seed: cfg.ic.seed,
            inject_sign_flip: false,
        }
    }
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// The invariant suite. Every line names its tolerance.
pub fn cmd_check(opts: &CheckOptions) -> Result<Vec<CheckLine>, CliError> {
    let mut p = opts.params;
    if opts.inject_sign_flip {
        p.hooks.flip_antisymmetric_stress = true;
    }
    let g = Grid2D::new(opts.n, 2.0 * std::f64::consts::PI)?;
    let sp = Spectral::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut lines = Vec::new();

    // 2D traceless algebra
    let (mut sq_err, mut cube_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let q = QTensor::new2(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let m = q.full_matrix();
        let m2 = m.mul(&m);
        let half = 0.5 * m2.trace();
        sq_err = sq_err.max(
            m2.sub(&alcs_core::tensor::Matrix::identity(q.dim()).scale(half))
                .frobenius_norm(),
        );
        cube_err = cube_err.max(m.cube_trace().abs());
    }
    lines.push(CheckLine::new(
        "2d-traceless-algebra",
        sq_err <= 1e-14 && cube_err <= 1e-15,
        format!(
            "|Q^2 - tr(Q^2)/2 I| {sq_err:.2e} (tol 1e-14), |tr Q^3| {cube_err:.2e} (tol 1e-15)"
        ),
    ));

    // 3D trace-cubic bound and molecular-field trace
    let mut violations = 0usize;
    let mut h_trace: f64 = 0.0;
    let eps_grid = [1e-2, 1e-1, 1.0, 1e1, 1e2];
    for _ in 0..5_000 {
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let q = QTensor::new3(c[0], c[1], c[2], c[3], c[4]);
        for &e in &eps_grid {
            let (_, _, ok) = trace_cubic_bound_check(&q, e)?;
            if !ok {
                violations += 1;
            }
        }
        let l: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lap = QTensor::new3(l[0], l[1], l[2], l[3], l[4]).full_matrix();
        let hp = ModelParams { b: 0.7, ..p };
        h_trace = h_trace.max(
            molecular_field_full(&q.full_matrix(), &lap, &hp)
                .trace()
                .abs(),
        );
    }
    lines.push(CheckLine::new(
        "trace-cubic-bound",
        violations == 0,
        format!(
            "{violations} violations over 5000 tensors x {} eps values",
            eps_grid.len()
        ),
    ));
    lines.push(CheckLine::new(
        "molecular-field-trace",
        h_trace <= 1e-13,
        format!("max |tr H| {h_trace:.2e} (tol 1e-13)"),
    ));

    // co-rotation / antisymmetric stress cancellation
    let k0 = (g.dealias_cutoff() as f64 / 2.0).max(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = random_q(&sp, &mut rng, k0, 1.0);
        let qp = random_q(&sp, &mut rng, k0, 1.0);
        let u = random_velocity(&sp, &mut rng, k0, 1.0);
        let qs = [sp.forward(&q.q11), sp.forward(&q.q12)];
        let qps = [sp.forward(&qp.q11), sp.forward(&qp.q12)];
        let us = [sp.forward(&u.ux), sp.forward(&u.uy)];
        let (l, r) = corotation_terms(&sp, &p, &qs, &qps, &us);
        let scale = l.abs().max(r.abs());
        if scale > 0.0 {
            worst = worst.max((l - r).abs() / scale);
        }
    }
    lines.push(CheckLine::new(
        "corotation-stress-cancellation",
        worst <= 1e-10,
        format!("max relative mismatch {worst:.2e} over 100 triples (tol 1e-10)"),
    ));

    // Leray projector
    let v = VelocityField {
        ux: sp.inverse(&sp.forward(&random_q(&sp, &mut rng, k0, 1.0).q11)),
        uy: sp.inverse(&sp.forward(&random_q(&sp, &mut rng, k0, 1.0).q12)),
    };
    let pv = sp.leray_project(&v)?;
    let ppv = sp.leray_project(&pv)?;
    let div = sp.divergence(&pv)?.max_abs();
    let idem = pv
        .ux
        .sub(&ppv.ux)?
        .max_abs()
        .max(pv.uy.sub(&ppv.uy)?.max_abs());
    lines.push(CheckLine::new(
        "leray",
        div <= 1e-12 && idem <= 1e-13,
        format!("max |div Pv| {div:.2e} (tol 1e-12), max |P^2 v - Pv| {idem:.2e} (tol 1e-13)"),
    ));

    // Littlewood-Paley partition
    let part = build_partition(g);
    let unity = part.unity_error();
    let f = random_q(&sp, &mut rng, k0, 1.0).q11;
    let h = random_q(&sp, &mut rng, k0, 1.0).q12;
    let rec = part.blocks(&f)?.reconstruct();
    let block_err = rel_diff(&rec.data, &f.data);
    let (t1, t2, rr) = part.bony_decompose(&f, &h)?;
    let sum = t1.add(&t2)?.add(&rr)?;
    let fh = f.mul(&h)?;
    let bony_err = rel_diff(&sum.data, &fh.data);
    lines.push(CheckLine::new(
        "littlewood-paley",
        unity <= 1e-12 && block_err <= 1e-10 && bony_err <= 1e-9,
        format!("unity {unity:.2e} (tol 1e-12), blocks {block_err:.2e} (tol 1e-10), Bony {bony_err:.2e} (tol 1e-9)"),
    ));

    // energy identity on a short run
    let ep = ModelParams {
        hooks: p.hooks,
        ..opts.params
    };
    let model = Model::new(g, ep)?;
    // smooth data: the centered-difference error grows like (Γ k0² dt)²
    let k_smooth = k0.min(2.0);
    let s0 = StateFields {
        t: 0.0,
        q: random_q(&sp, &mut rng, k_smooth, 0.05),
        u: random_velocity(&sp, &mut rng, k_smooth, 0.05),
    };
    let x0 = model.prepare(&s0)?;
    let setup = TimeSetup {
        dt: 1e-3,
        t_end: 0.02,
        ..TimeSetup::default()
    };
    let mut sink = MemorySink::default();
    let out = run(&model, x0, &setup, 1.0, &mut sink)?;
    let res = max_interior_residual(&sink.records);
    let completed = out.status == RunStatus::Completed;
    lines.push(CheckLine::new(
        "energy-identity",
        completed && res <= 1e-3,
        format!("max interior residual {res:.2e} over 20 steps (tol 1e-3)"),
    ));
    Ok(lines)
}

// ---------------------------------------------------------------- twin

#[derive(Debug)]
pub struct TwinReport {
    pub deltas: Vec<TwinDelta>,
    pub alpha: Vec<f64>,
    pub envelope: Vec<f64>,
    pub envelope_holds: bool,
    pub worst_ratio: f64,
    pub status: [RunStatus; 2],
}

impl TwinReport {
    pub fn exit_code(&self) -> ExitCode {
        if self.status.iter().any(|s| *s != RunStatus::Completed) {
            ExitCode::BlowUp
        } else {
            ExitCode::Ok
        }
    }
}

fn twin_run(cfg: &RunConfig, every: f64) -> Result<(Model, MemorySink, RunStatus), CliError> {
    let model = Model::new(cfg.grid(), cfg.params)?;
    let x0 = model.prepare(&make_initial(cfg)?)?;
    let mut setup = time_setup(cfg);
    setup.snapshot_every = Some(every);
    setup.energy_every = every;
    let mut sink = MemorySink::default();
    let out = run(&model, x0, &setup, cfg.s_exponent, &mut sink)?;
    Ok((model, sink, out.status))
}

/// Runs `a` and `b` from the same initial-data recipe and compares them at
/// common sample times. `b` plays the strong (reference) solution whose
/// norms build the Gronwall rate. `twin.csv` goes to `a.out_dir`.
pub fn cmd_twin(a: &RunConfig, b: &RunConfig) -> Result<TwinReport, CliError> {
    if a.n != b.n || a.l != b.l {
        return Err(CliError::TwinMismatch(format!(
            "grids differ: N = {}, L = {} vs N = {}, L = {}",
            a.n, a.l, b.n, b.l
        )));
    }
    if !a.ic.same_base(&b.ic) {
        return Err(CliError::TwinMismatch(
            "initial data specifications differ".into(),
        ));
    }
    if a.t_end != b.t_end {
        return Err(CliError::TwinMismatch(format!(
            "t_end differs: {} vs {}",
            a.t_end, b.t_end
        )));
    }
    let every = if a.energy_every > 0.0 {
        a.energy_every
    } else {
        a.dt.max(b.dt)
    };
    let (ma, sa, st_a) = twin_run(a, every)?;
    let (mb, sb, st_b) = twin_run(b, every)?;
    let n = sa.snapshots.len().min(sb.snapshots.len());
    let mut deltas = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y) = (&sa.snapshots[i], &sb.snapshots[i]);
        if (x.t - y.t).abs() > 1e-9 * every {
            return Err(CliError::TwinMismatch(format!(
                "sample {i} at t = {} vs t = {}; choose dt values dividing energy_every",
                x.t, y.t
            )));
        }
        deltas.push(twin_delta(ma.spectral(), x, y)?);
        let strong = sup_norms(&mb, &mb.to_spectral(y)?);
        let other = sup_norms(&ma, &ma.to_spectral(x)?);
        alpha.push(twin_growth_rate(&b.params, &strong, other.q));
    }
    let ts: Vec<f64> = deltas.iter().map(|d| d.t).collect();
    let ys: Vec<f64> = deltas.iter().map(|d| d.total()).collect();
    let zeros = vec![0.0; n];
    let env = gronwall_envelope(&ts, &ys, &alpha, &zeros, 1e-9)?;
    std::fs::create_dir_all(&a.out_dir).map_err(io(&a.out_dir))?;
    let rows: Vec<Vec<f64>> = deltas
        .iter()
        .zip(&alpha)
        .zip(&env.envelope)
        .map(|((d, al), e)| vec![d.t, d.dq_l2, d.dq_h1, d.du_l2, d.total(), *al, *e])
        .collect();
    let path = a.out_dir.join(TWIN_CSV);
    write_csv(&path, &TWIN_COLUMNS, &rows).map_err(io(&path))?;
    Ok(TwinReport {
        deltas,
        alpha,
        envelope: env.envelope,
        envelope_holds: env.holds,
        worst_ratio: env.worst_ratio,
        status: [st_a, st_b],
    })
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Kappa,
    NTrunc,
    Eps,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Option<SweepAxis> {
        match s {
            "kappa" => Some(SweepAxis::Kappa),
            "n_trunc" => Some(SweepAxis::NTrunc),
            "eps" => Some(SweepAxis::Eps),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Kappa => "kappa",
            SweepAxis::NTrunc => "n_trunc",
            SweepAxis::Eps => "eps",
        }
    }
}

/// Monitored quantities of one sweep member.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub exit: ExitCode,
    pub max_h1_q: f64,
    pub max_l2_u: f64,
    pub int_grad_u_sq: f64,
    pub int_lap_q_sq: f64,
    pub max_eps_u_grad_q: f64,
    pub max_eps_grad_u: f64,
    pub max_e: f64,
    pub max_residual: f64,
    pub steps: usize,
}

impl SweepRow {
    fn failed(value: f64, exit: ExitCode) -> Self {
        SweepRow {
            value,
            exit,
            max_h1_q: f64::NAN,
            max_l2_u: f64::NAN,
            int_grad_u_sq: f64::NAN,
            int_lap_q_sq: f64::NAN,
            max_eps_u_grad_q: f64::NAN,
            max_eps_grad_u: f64::NAN,
            max_e: f64::NAN,
            max_residual: f64::NAN,
            steps: 0,
        }
    }

    pub fn from_records(value: f64, exit: ExitCode, steps: usize, r: &[EnergyRecord]) -> Self {
        let max =
            |f: &dyn Fn(&EnergyRecord) -> f64| r.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let integral = |f: &dyn Fn(&EnergyRecord) -> f64| {
            r.windows(2)
                .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
                .sum::<f64>()
        };
        SweepRow {
            value,
            exit,
            max_h1_q: max(&|x| x.h1_q_sq().sqrt()),
            max_l2_u: max(&|x| (2.0 * x.kinetic).sqrt()),
            int_grad_u_sq: integral(&|x| x.grad_u_sq),
            int_lap_q_sq: integral(&|x| x.lap_q_sq),
            max_eps_u_grad_q: max(&|x| x.eps_u_grad_q),
            max_eps_grad_u: max(&|x| x.eps_grad_u),
            max_e: max(&|x| x.e),
            max_residual: max_interior_residual(r),
            steps,
        }
    }

    pub fn csv_values(&self) -> Vec<f64> {
        vec![
            self.value,
            self.exit as i32 as f64,
            self.max_h1_q,
            self.max_l2_u,
            self.int_grad_u_sq,
            self.int_lap_q_sq,
            self.max_eps_u_grad_q,
            self.max_eps_grad_u,
            self.max_e,
            self.max_residual,
            self.steps as f64,
        ]
    }
}

#[derive(Debug)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// Child error messages, by value.
    pub errors: Vec<(f64, String)>,
}

impl SweepReport {
    pub fn exit_code(&self) -> ExitCode {
        self.rows
            .iter()
            .map(|r| r.exit)
            .max()
            .unwrap_or(ExitCode::Ok)
    }

    /// `(max - min) / min` of a column over completed members.
    pub fn spread(&self, f: impl Fn(&SweepRow) -> f64) -> f64 {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.exit == ExitCode::Ok)
            .map(f)
            .collect();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo
    }
}

fn sweep_member(base: &RunConfig, axis: SweepAxis, value: f64) -> Result<RunConfig, String> {
    let mut c = base.clone();
    match axis {
        SweepAxis::Kappa => c.params.kappa = value,
        SweepAxis::Eps => {
            if !(value >= 0.0) {
                return Err(format!("eps = {value} must be >= 0"));
            }
            c.params.eps = value;
        }
        SweepAxis::NTrunc => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(format!("n_trunc = {value} is not a positive integer"));
            }
            c.params.n_trunc = value as u32;
            if c.params.mode == Mode::Friedrichs {
                let (lo, hi) = c.grid().trunc_range();
                if c.params.n_trunc < lo || c.params.n_trunc > hi {
                    return Err(format!(
                        "n_trunc = {} outside the grid's dyadic range {lo}..={hi}",
                        c.params.n_trunc
                    ));
                }
            }
        }
    }
    c.out_dir = base.out_dir.join(format!("{}_{}", axis.name(), value));
    Ok(c)
}

/// Runs one member per value into `out_dir/<axis>_<value>/` and writes
/// `sweep_summary.csv`. Failing members are recorded and the sweep goes on.
pub fn cmd_sweep(
    cfg: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    log: &mut dyn Write,
) -> Result<SweepReport, CliError> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &v in values {
        let member = match sweep_member(cfg, axis, v) {
            Ok(m) => m,
            Err(e) => {
                errors.push((v, e));
                rows.push(SweepRow::failed(v, ExitCode::Io));
                continue;
            }
        };
        match cmd_run(&member) {
            Ok(s) => {
                let _ = writeln!(
                    log,
                    "{} = {v}: {:?}, {} steps",
                    axis.name(),
                    s.status,
                    s.steps
                );
                rows.push(SweepRow::from_records(
                    v,
                    s.exit_code(),
                    s.steps,
                    &s.records,
                ));
            }
            Err(e) => {
                let _ = writeln!(log, "{} = {v}: {e}", axis.name());
                rows.push(SweepRow::failed(v, e.exit_code()));
                errors.push((v, e.to_string()));
            }
        }
    }
    std::fs::create_dir_all(&cfg.out_dir).map_err(io(&cfg.out_dir))?;
    let path = cfg.out_dir.join(SWEEP_CSV);
    let table: Vec<Vec<f64>> = rows.iter().map(|r| r.csv_values()).collect();
    write_csv(&path, &SWEEP_COLUMNS, &table).map_err(io(&path))?;
    Ok(SweepReport { axis, rows, errors })
}

// ---------------------------------------------------------------- lp-norm, info

#[derive(Debug, Clone, PartialEq)]
pub struct FieldNorm {
    pub name: String,
    pub lp: f64,
    pub fourier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpNormReport {
    pub s: f64,
    pub fields: Vec<FieldNorm>,
    /// `‖∇Q‖²_{H^s} + ‖u‖²_{H^s}` from dyadic blocks, when the snapshot
    /// holds a full state.
    pub phi: Option<f64>,
}

pub fn cmd_lp_norm(path: &Path, s: f64) -> Result<LpNormReport, CliError> {
    let snap = read_snapshot(path)?;
    let bad = |e: crate::snapshot::SnapshotError| {
        CliError::Snapshot(SnapshotIoError::Format {
            path: path.to_path_buf(),
            source: e,
        })
    };
    if snap.d != 2 {
        return Err(bad(crate::snapshot::SnapshotError::Dimension(snap.d)));
    }
    let g = snap.grid().map_err(bad)?;
    let part = build_partition(g);
    let mut fields = Vec::new();
    for (name, values) in &snap.fields {
        let f = ScalarField::from_vec(g, values.clone())?;
        fields.push(FieldNorm {
            name: name.clone(),
            lp: part.hs_norm(&f, s)?,
            fourier: part.fourier_hs_norm(&f, s)?,
        });
    }
    let phi = match snap.to_state() {
        Ok(st) => Some(part.split_low_high(&st.q, &st.u, s)?.2),
        Err(_) => None,
    };
    Ok(LpNormReport { s, fields, phi })
}

pub fn cmd_info(path: &Path) -> Result<String, CliError> {
    let snap = read_snapshot(path)?;
    let mut s = format!(
        "version {}\nd {}\nN {}\nL {:?}\nt {:?}\nnfields {}\n",
        crate::snapshot::VERSION,
        snap.d,
        snap.n,
        snap.l,
        snap.t,
        snap.fields.len()
    );
    for (name, v) in &snap.fields {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        s.push_str(&format!("field {name:<16} min {lo:.6e} max {hi:.6e}\n"));
    }
    Ok(s)
}
