use alcs_core::tensor::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a symmetric 3x3 matrix by the trigonometric formula.
fn sym3_eigen(m: &Matrix) -> [f64; 3] {
    let a = m.m;
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        return [a[0][0], a[1][1], a[2][2]];
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

fn random_q3(rng: &mut ChaCha8Rng, scale: f64) -> QTensor {
    let mut c = [0.0; 5];
    for v in c.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let q = QTensor::new3(c[0], c[1], c[2], c[3], c[4]);
    let r = rng.gen_range(0.0..scale);
    q.scale(r / q.norm().max(1e-300))
}

#[test]
fn full_matrix_examples() {
    assert_eq!(QTensor::new2(0.0, 0.0).full_matrix().max_abs(), 0.0);
    let m = QTensor::new2(0.25, 0.0).full_matrix();
    assert_eq!((m.m[0][0], m.m[1][1], m.m[0][1]), (0.25, -0.25, 0.0));
    let m = QTensor::new3(1.0, 0.0, 0.0, -1.0, 0.0).full_matrix();
    assert_eq!((m.m[0][0], m.m[1][1], m.m[2][2]), (1.0, -1.0, 0.0));
}

#[test]
fn trace_powers_examples_match_eigenvalues() {
    let (t2, t3, t4) = QTensor::new2(0.25, 0.0).trace_powers();
    assert!((t2 - 0.125).abs() < 1e-16 && t3 == 0.0 && (t4 - 0.015625).abs() < 1e-16);
    let q = QTensor::new3(2.0, 0.0, 0.0, -1.0, 0.0);
    let (t2, t3, t4) = q.trace_powers();
    let ev = sym3_eigen(&q.full_matrix());
    let e2: f64 = ev.iter().map(|e| e * e).sum();
    let e3: f64 = ev.iter().map(|e| e * e * e).sum();
    assert!((t2 - 6.0).abs() < 1e-13 && (t2 - e2).abs() < 1e-12);
    assert!((t3 - 6.0).abs() < 1e-13 && (t3 - e3).abs() < 1e-12);
    assert!((t4 - 36.0).abs() < 1e-12);
    assert_eq!(QTensor::zero(3).trace_powers(), (0.0, 0.0, 0.0));
}

#[test]
fn trace_powers_random_3d_vs_eigen() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let q = random_q3(&mut rng, 5.0);
        let (t2, t3, t4) = q.trace_powers();
        let ev = sym3_eigen(&q.full_matrix());
        let e2: f64 = ev.iter().map(|e| e * e).sum();
        let e3: f64 = ev.iter().map(|e| e * e * e).sum();
        assert!((t2 - e2).abs() <= 1e-10 * (1.0 + e2));
        assert!((t3 - e3).abs() <= 1e-9 * (1.0 + e2.powf(1.5)));
        assert!((t4 - t2 * t2).abs() <= 1e-12 * (1.0 + t4));
    }
}

#[test]
fn molecular_field_examples() {
    let p = ModelParams {
        a: -1.0,
        b: 7.0,
        c: 1.0,
        ..ModelParams::default()
    };
    let h = molecular_field(&QTensor::new2(0.25, 0.0), &QTensor::zero(2), &p).unwrap();
    assert!((h.components()[0] - 0.21875).abs() < 1e-15 && h.components()[1] == 0.0);
    let h = molecular_field(&QTensor::zero(2), &QTensor::zero(2), &p).unwrap();
    assert_eq!(h.norm(), 0.0);
    assert!(matches!(
        molecular_field(&QTensor::zero(2), &QTensor::zero(3), &p),
        Err(alcs_core::Error::DimensionMismatch { .. })
    ));
}

/// `H = ΔQ - aQ + b(Q² - tr(Q²)/d I) - cQ tr(Q²)` evaluated on full arrays.
fn h_oracle(
    q: &[[f64; 3]; 3],
    lap: &[[f64; 3]; 3],
    d: usize,
    a: f64,
    b: f64,
    c: f64,
) -> [[f64; 3]; 3] {
    let mut q2 = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                q2[i][j] += q[i][k] * q[k][j];
            }
        }
    }
    let tr2: f64 = (0..d).map(|i| q2[i][i]).sum();
    let mut h = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..d {
            let delta = if i == j { 1.0 } else { 0.0 };
            h[i][j] = lap[i][j] - a * q[i][j] + b * (q2[i][j] - tr2 / d as f64 * delta)
                - c * q[i][j] * tr2;
        }
    }
    h
}

#[test]
fn molecular_field_matches_brute_force_3d() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = QTensor::new3(2.0 / 3.0, 0.0, 0.0, -1.0 / 3.0, 0.0);
    for _ in 0..200 {
        let (a, b, c) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.1..3.0),
        );
        let p = ModelParams {
            a,
            b,
            c,
            ..ModelParams::default()
        };
        let lap = random_q3(&mut rng, 2.0);
        for qq in [q, random_q3(&mut rng, 2.0)] {
            let h = molecular_field(&qq, &lap, &p).unwrap().full_matrix();
            let o = h_oracle(&qq.full_matrix().m, &lap.full_matrix().m, 3, a, b, c);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((h.m[i][j] - o[i][j]).abs() < 1e-12, "{i}{j}");
                }
            }
            let shadow = molecular_field_full(&qq.full_matrix(), &lap.full_matrix(), &p);
            assert!(shadow.trace().abs() <= 1e-13);
            assert!(shadow.sub(&shadow.transpose()).max_abs() == 0.0);
        }
    }
}

#[test]
fn bulk_density_examples() {
    let p = ModelParams {
        a: -1.0,
        c: 1.0,
        ..ModelParams::default()
    };
    assert_eq!(bulk_energy_density(&QTensor::zero(2), &p), 0.0);
    assert!((bulk_energy_density(&QTensor::new2(0.25, 0.0), &p) + 0.05859375).abs() < 1e-16);
}

#[test]
fn two_d_biaxial_and_cubic_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_b: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for _ in 0..100_000 {
        let q = QTensor::new2(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let m = q.full_matrix();
        let q2 = m.mul(&m);
        let r = q2.sub(&Matrix::identity(2).scale(q2.trace() / 2.0));
        worst_b = worst_b.max(r.frobenius_norm());
        worst_c = worst_c
            .max(q.trace_powers().1.abs())
            .max(m.cube_trace().abs());
    }
    assert!(worst_b <= 1e-14, "{worst_b}");
    assert!(worst_c <= 1e-15, "{worst_c}");
}

#[test]
fn trace_cubic_bound_never_violated() {
    let (lhs, rhs, ok) =
        trace_cubic_bound_check(&QTensor::new3(2.0, 0.0, 0.0, -1.0, 0.0), 1.0).unwrap();
    assert!((lhs - 6.0).abs() < 1e-13 && (rhs - 15.0).abs() < 1e-12 && ok);
    assert_eq!(
        trace_cubic_bound_check(&QTensor::zero(3), 0.3).unwrap(),
        (0.0, 0.0, true)
    );
    assert!(trace_cubic_bound_check(&QTensor::zero(3), 0.0).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let eps = [1e-2, 1e-1, 1.0, 10.0, 100.0];
    for _ in 0..20_000 {
        let q = random_q3(&mut rng, 10.0);
        for &e in &eps {
            let (l, r, ok) = trace_cubic_bound_check(&q, e).unwrap();
            assert!(ok, "{l} > {r}");
        }
    }
}

#[test]
fn coercivity_shift_cases() {
    let p = ModelParams {
        a: 0.5,
        b: 0.0,
        c: 1.0,
        ..ModelParams::default()
    };
    assert_eq!(coercivity_shift(&p).unwrap(), 0.0);
    let p = ModelParams {
        a: -1.0,
        b: 0.0,
        c: 1.0,
        ..ModelParams::default()
    };
    let m = coercivity_shift(&p).unwrap();
    assert!(m >= 1.0 - 1e-12);
    // 1D oracle: min over r of (M + a/2)r² + (c/4)r⁴ - (M/2)r² - (c/8)r⁴ >= 0
    for i in 0..=10_000 {
        let r = i as f64 * 1e-3;
        let g = (m + p.a / 2.0) * r * r + p.c / 4.0 * r.powi(4)
            - (m / 2.0) * r * r
            - p.c / 8.0 * r.powi(4);
        assert!(g >= -1e-14);
    }
    assert!(coercivity_shift(&ModelParams {
        c: 0.0,
        ..ModelParams::default()
    })
    .is_err());
}

#[test]
fn coercivity_shift_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for &(a, b, c) in &[
        (-1.0, 0.0, 1.0),
        (0.0, 3.0, 1.0),
        (-0.5, -2.0, 0.5),
        (2.0, 5.0, 0.2),
    ] {
        let p = ModelParams {
            a,
            b,
            c,
            ..ModelParams::default()
        };
        let m = coercivity_shift(&p).unwrap();
        for _ in 0..250_000 {
            let q = random_q3(&mut rng, 10.0);
            let n2 = q.norm_sq();
            let lhs = m * n2 + bulk_energy_density(&q, &p);
            let mid = m / 2.0 * n2 + c / 8.0 * n2 * n2;
            assert!(lhs >= mid - 1e-10 * (1.0 + n2 * n2), "a={a} b={b} c={c}");
            assert!(mid >= 0.0);
        }
    }
}

#[test]
fn params_validation_messages() {
    let e = ModelParams {
        mu: 0.0,
        ..ModelParams::default()
    }
    .validate()
    .unwrap_err();
    assert_eq!(e.to_string(), "invalid parameter: mu must be > 0");
    assert!(ModelParams {
        gamma: 0.0,
        ..ModelParams::default()
    }
    .validate()
    .is_err());
    assert!(ModelParams {
        c: -1.0,
        ..ModelParams::default()
    }
    .validate()
    .is_err());
    assert!(ModelParams {
        eps: -0.1,
        ..ModelParams::default()
    }
    .validate()
    .is_err());
}

proptest! {
    #[test]
    fn full_matrix_is_traceless_and_symmetric(c in proptest::array::uniform5(-1e3f64..1e3)) {
        let q = QTensor::new3(c[0], c[1], c[2], c[3], c[4]);
        let m = q.full_matrix();
        prop_assert_eq!(m.trace(), 0.0);
        prop_assert_eq!(m.sub(&m.transpose()).max_abs(), 0.0);
        let q2 = QTensor::new2(c[0], c[1]).full_matrix();
        prop_assert_eq!(q2.trace(), 0.0);
        prop_assert_eq!(q2.m[0][1], q2.m[1][0]);
    }

    #[test]
    fn molecular_field_stays_traceless(c in proptest::array::uniform5(-3f64..3.0), l in proptest::array::uniform5(-3f64..3.0),
                                       a in -2f64..2.0, b in -2f64..2.0, cc in 0.1f64..2.0) {
        let p = ModelParams { a, b, c: cc, ..ModelParams::default() };
        let q = QTensor::new3(c[0], c[1], c[2], c[3], c[4]);
        let lap = QTensor::new3(l[0], l[1], l[2], l[3], l[4]);
        let shadow = molecular_field_full(&q.full_matrix(), &lap.full_matrix(), &p);
        prop_assert!(shadow.trace().abs() <= 1e-13 * (1.0 + shadow.max_abs()));
        let h = molecular_field(&q, &lap, &p).unwrap().full_matrix();
        prop_assert!(h.sub(&shadow).max_abs() <= 1e-12 * (1.0 + shadow.max_abs()));
    }

    #[test]
    fn b_term_vanishes_in_2d(q11 in -10f64..10.0, q12 in -10f64..10.0, b in -5f64..5.0) {
        let q = QTensor::new2(q11, q12);
        let p0 = ModelParams { b: 0.0, ..ModelParams::default() };
        let pb = ModelParams { b, ..ModelParams::default() };
        let lap = QTensor::new2(0.3, -0.1);
        let h0 = molecular_field(&q, &lap, &p0).unwrap();
        let hb = molecular_field(&q, &lap, &pb).unwrap();
        prop_assert!((h0.components()[0] - hb.components()[0]).abs() <= 1e-12 * (1.0 + q.norm_sq()));
        prop_assert!((h0.components()[1] - hb.components()[1]).abs() <= 1e-12 * (1.0 + q.norm_sq()));
    }
}
