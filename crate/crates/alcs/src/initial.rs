//! Initial data generators.

use alcs_core::dynamics::StateFields;
use alcs_core::spectral::{Grid2D, QTensorField, ScalarField, Spectral, Spectrum, VelocityField};
use alcs_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{IcKind, InitialSpec, RunConfig};
use crate::snapshot::{read_state, SnapshotIoError};

#[derive(Debug, thiserror::Error)]
pub enum InitError {
    #[error(transparent)]
    Snapshot(#[from] SnapshotIoError),
    #[error("initial snapshot grid N = {found_n}, L = {found_l} does not match the config (N = {n}, L = {l})")]
    GridMismatch {
        n: usize,
        l: f64,
        found_n: usize,
        found_l: f64,
    },
}

/// Shell amplitude `(k/k0)² e^{-(k/k0)²}`, largest at `k = k0`; zero at
/// `k = 0` and outside the dealiased box.
fn envelope(k: f64, k0: f64) -> f64 {
    let r = k / k0;
    r * r * (-r * r).exp()
}

/// Random band-limited spectrum with Gaussian coefficients. Only the real
/// part of the inverse transform is kept, so no symmetry is imposed here.
fn random_spectrum(
    sp: &Spectral,
    rng: &mut ChaCha8Rng,
    k0: f64,
    weight: impl Fn(f64) -> f64,
) -> Spectrum {
    let g = sp.grid();
    let n = g.n();
    let cut = g.dealias_cutoff();
    let mut s = Spectrum::zeros(g);
    for iy in 0..n {
        let ky = g.wavenumber(iy);
        for ix in 0..n {
            let kx = g.wavenumber(ix);
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            if kx.abs() > cut || ky.abs() > cut || (kx == 0 && ky == 0) {
                continue;
            }
            let k = ((kx * kx + ky * ky) as f64).sqrt();
            s.data[iy * n + ix] = Complex64::new(re, im) * (envelope(k, k0) * weight(k));
        }
    }
    s
}

fn rms(fields: &[&ScalarField], frob: f64) -> f64 {
    let len = fields[0].data.len() as f64;
    let sum: f64 = fields
        .iter()
        .map(|f| f.data.iter().map(|v| v * v).sum::<f64>())
        .sum();
    (frob * sum / len).sqrt()
}

/// Band-limited random Q with RMS `|Q|` equal to `amp`.
pub fn random_q(sp: &Spectral, rng: &mut ChaCha8Rng, k0: f64, amp: f64) -> QTensorField {
    let a = sp.inverse(&random_spectrum(sp, rng, k0, |_| 1.0));
    let b = sp.inverse(&random_spectrum(sp, rng, k0, |_| 1.0));
    let r = rms(&[&a, &b], 2.0);
    let s = if r > 0.0 { amp / r } else { 0.0 };
    QTensorField {
        q11: a.scaled(s),
        q12: b.scaled(s),
    }
}

/// Divergence-free random velocity `(∂_y ψ, -∂_x ψ)` whose shell
/// amplitudes follow the envelope, scaled to RMS speed `amp`.
pub fn random_velocity(sp: &Spectral, rng: &mut ChaCha8Rng, k0: f64, amp: f64) -> VelocityField {
    let psi = random_spectrum(sp, rng, k0, |k| 1.0 / k);
    let ux = sp.inverse(&sp.deriv_spec(&psi, 1));
    let uy = sp.inverse(&sp.deriv_spec(&psi, 0)).scaled(-1.0);
    let r = rms(&[&ux, &uy], 1.0);
    let s = if r > 0.0 { amp / r } else { 0.0 };
    VelocityField {
        ux: ux.scaled(s),
        uy: uy.scaled(s),
    }
}

fn add_q(a: &QTensorField, b: &QTensorField) -> QTensorField {
    QTensorField {
        q11: a.q11.add(&b.q11).unwrap(),
        q12: a.q12.add(&b.q12).unwrap(),
    }
}

/// `s (n⊗n - I/2)` with `n = (cos θ, sin θ)`.
pub fn director_q(g: Grid2D, s: f64, theta: f64) -> QTensorField {
    QTensorField {
        q11: ScalarField::constant(g, 0.5 * s * (2.0 * theta).cos()),
        q12: ScalarField::constant(g, 0.5 * s * (2.0 * theta).sin()),
    }
}

/// Builds the initial state (not yet dealiased or projected; the model's
/// `prepare` does that).
pub fn make_initial(cfg: &RunConfig) -> Result<StateFields, InitError> {
    let g = cfg.grid();
    let sp = Spectral::new(g);
    let ic: &InitialSpec = &cfg.ic;
    let mut rng = ChaCha8Rng::seed_from_u64(ic.seed);
    let mut state = match ic.kind {
        IcKind::TaylorGreen => {
            let k = 2.0 * std::f64::consts::PI / g.l();
            let a = ic.amplitude;
            StateFields {
                t: 0.0,
                q: QTensorField::zeros(g),
                u: VelocityField {
                    ux: ScalarField::from_fn(g, |x, y| a * (k * x).sin() * (k * y).cos()),
                    uy: ScalarField::from_fn(g, |x, y| -a * (k * x).cos() * (k * y).sin()),
                },
            }
        }
        IcKind::RandomSpectrum => {
            let u = random_velocity(&sp, &mut rng, ic.peak_wavenumber, ic.amplitude);
            let q = random_q(&sp, &mut rng, ic.peak_wavenumber, ic.q_amplitude);
            StateFields { t: 0.0, q, u }
        }
        IcKind::UniformDirector => {
            let mut q = director_q(g, ic.s_order, ic.director_angle);
            if ic.noise > 0.0 {
                q = add_q(&q, &random_q(&sp, &mut rng, ic.peak_wavenumber, ic.noise));
            }
            StateFields {
                t: 0.0,
                q,
                u: VelocityField::zeros(g),
            }
        }
        IcKind::File => {
            let path = ic.path.as_ref().expect("validated ic_path");
            let s = read_state(path)?;
            let fg = s.grid();
            if fg.n() != g.n() || (fg.l() - g.l()).abs() > 1e-12 * g.l() {
                return Err(InitError::GridMismatch {
                    n: g.n(),
                    l: g.l(),
                    found_n: fg.n(),
                    found_l: fg.l(),
                });
            }
            // keep the config's exact L
            let re = |f: &ScalarField| ScalarField {
                grid: g,
                data: f.data.clone(),
            };
            StateFields {
                t: s.t,
                q: QTensorField {
                    q11: re(&s.q.q11),
                    q12: re(&s.q.q12),
                },
                u: VelocityField {
                    ux: re(&s.u.ux),
                    uy: re(&s.u.uy),
                },
            }
        }
    };
    if ic.perturb > 0.0 {
        let mut prng = ChaCha8Rng::seed_from_u64(ic.perturb_seed);
        state.q = add_q(
            &state.q,
            &random_q(&sp, &mut prng, ic.peak_wavenumber, ic.perturb),
        );
    }
    Ok(state)
}
