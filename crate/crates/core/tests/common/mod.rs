#![allow(dead_code)]

use alcs_core::dynamics::StateFields;
use alcs_core::spectral::{Grid2D, QTensorField, ScalarField, VelocityField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn grid(n: usize) -> Grid2D {
    Grid2D::new(n, 2.0 * PI).unwrap()
}

/// Random trigonometric polynomial with integer wavenumbers `|k_j| <= kmax`
/// and Gaussian-decaying amplitudes, evaluated pointwise (no FFT).
pub fn trig_modes(rng: &mut ChaCha8Rng, amp: f64, kmax: i32) -> Vec<(f64, f64, f64, f64)> {
    let mut modes = Vec::new();
    for kx in -kmax..=kmax {
        for ky in 0..=kmax {
            if ky == 0 && kx <= 0 {
                continue;
            }
            let k2 = (kx * kx + ky * ky) as f64;
            let a = amp * (-k2 / (kmax as f64).powi(2)).exp() * rng.gen_range(-1.0..1.0);
            modes.push((kx as f64, ky as f64, a, rng.gen_range(0.0..2.0 * PI)));
        }
    }
    modes
}

/// Sums `a cos(k·x + ph)` (`deriv = None`) or its `x`/`y` derivative over
/// the modes, using separable complex exponentials.
fn eval_with(g: Grid2D, modes: &[(f64, f64, f64, f64)], deriv: Option<usize>) -> ScalarField {
    let n = g.n();
    let xs: Vec<f64> = (0..n).map(|i| g.coord(i)).collect();
    let mut out = ScalarField::zeros(g);
    for (kx, ky, a, ph) in modes {
        // Re[c e^{i(kx x + ky y)}] with c = a e^{i ph} (times i k for derivatives)
        let (mut cr, mut ci) = (a * ph.cos(), a * ph.sin());
        if let Some(ax) = deriv {
            let k = [*kx, *ky][ax];
            (cr, ci) = (-ci * k, cr * k);
        }
        let ex: Vec<(f64, f64)> = xs
            .iter()
            .map(|x| ((kx * x).cos(), (kx * x).sin()))
            .collect();
        for (iy, y) in xs.iter().enumerate() {
            let (cy, sy) = ((ky * y).cos(), (ky * y).sin());
            let (br, bi) = (cr * cy - ci * sy, cr * sy + ci * cy);
            let row = &mut out.data[iy * n..(iy + 1) * n];
            for (v, (c, s)) in row.iter_mut().zip(&ex) {
                *v += br * c - bi * s;
            }
        }
    }
    out
}

pub fn eval(g: Grid2D, modes: &[(f64, f64, f64, f64)]) -> ScalarField {
    eval_with(g, modes, None)
}

/// `∂_x` (axis 0) or `∂_y` (axis 1) of [`eval`], analytically.
pub fn eval_deriv(g: Grid2D, modes: &[(f64, f64, f64, f64)], axis: usize) -> ScalarField {
    eval_with(g, modes, Some(axis))
}

pub fn random_smooth(g: Grid2D, rng: &mut ChaCha8Rng, amp: f64, kmax: i32) -> ScalarField {
    eval(g, &trig_modes(rng, amp, kmax))
}

/// Divergence-free field `(∂_y ψ, -∂_x ψ)` from a random stream function.
pub fn random_div_free(g: Grid2D, rng: &mut ChaCha8Rng, amp: f64, kmax: i32) -> VelocityField {
    let m = trig_modes(rng, amp, kmax);
    VelocityField {
        ux: eval_deriv(g, &m, 1),
        uy: eval_deriv(g, &m, 0).scaled(-1.0),
    }
}

pub fn random_q(g: Grid2D, rng: &mut ChaCha8Rng, amp: f64, kmax: i32) -> QTensorField {
    QTensorField {
        q11: random_smooth(g, rng, amp, kmax),
        q12: random_smooth(g, rng, amp, kmax),
    }
}

pub fn random_state(g: Grid2D, rng: &mut ChaCha8Rng, amp: f64, kmax: i32) -> StateFields {
    StateFields {
        t: 0.0,
        q: random_q(g, rng, amp, kmax),
        u: random_div_free(g, rng, amp, kmax),
    }
}

pub fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
