mod common;

use alcs_core::lp::*;
use alcs_core::spectral::*;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Field with random coefficients on every mode below `kmax` and a random
/// power-law envelope `(1 + |k|^2)^(-decay)`.
fn broad_field(g: Grid2D, rng: &mut ChaCha8Rng, kmax: i32) -> ScalarField {
    let decay = rng.gen_range(0.0..2.5);
    let mut modes = trig_modes(rng, 1.0, kmax);
    for m in modes.iter_mut() {
        let k2 = m.0 * m.0 + m.1 * m.1;
        m.2 = rng.gen_range(-1.0..1.0) * (1.0 + k2).powf(-decay);
    }
    eval(g, &modes)
}

#[test]
fn partition_is_unity_and_supports_disjoint() {
    for n in [8usize, 16, 64, 128] {
        for l in [2.0 * std::f64::consts::PI, 1.0, 50.0] {
            let p = build_partition(Grid2D::new(n, l).unwrap());
            assert!(p.unity_error() <= 1e-12, "n={n} l={l}");
            assert!(p.supports_disjoint());
            assert!(p.chi_samples().iter().all(|c| (0.0..=1.0).contains(c)));
            for j in 0..=p.j_max() {
                assert!(p
                    .phi_samples(j)
                    .unwrap()
                    .iter()
                    .all(|c| (0.0..=1.0).contains(c)));
            }
        }
    }
    assert_eq!(chi(0.0), 1.0);
    assert_eq!(phi(0.0), 0.0);
    assert_eq!(phi(3.0), 0.0);
    assert_eq!(chi(4.0 / 3.0), 0.0);
}

#[test]
fn profiles_are_smooth_and_monotone() {
    let mut prev = 1.0;
    for i in 0..=2000 {
        let r = i as f64 / 1000.0;
        let t = theta(r);
        assert!(t <= prev + 1e-15);
        prev = t;
    }
    // finite differences of every order stay bounded near the glue points
    for r in [0.75, 4.0 / 3.0] {
        let h = 1e-4;
        assert!((theta(r + h) - theta(r - h)).abs() < 1e-6);
    }
}

#[test]
fn blocks_reconstruct_and_constant_field() {
    let g = grid(64);
    let p = build_partition(g);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let f = broad_field(g, &mut rng, 31);
        let b = p.blocks(&f).unwrap();
        let err = b.reconstruct().sub(&f).unwrap().l2();
        assert!(err <= 1e-10 * f.l2());
    }
    let c = ScalarField::constant(g, 1.5);
    let b = p.blocks(&c).unwrap();
    assert!(max_diff(&b.s0, &c) < 1e-14);
    assert!(b.blocks.iter().all(|x| x.max_abs() < 1e-14));
}

#[test]
fn single_mode_blocks() {
    let g = grid(64);
    let p = build_partition(g);
    for j in 1..5usize {
        let k = (1u32 << j) as f64;
        let f = ScalarField::from_fn(g, |x, _| (k * x).cos());
        let mut sum = p.s_j(&f, 0).unwrap();
        let mut hit = vec![];
        for jj in 0..=p.j_max() {
            let d = p.delta_j(&f, jj).unwrap();
            if d.max_abs() > 1e-14 {
                hit.push(jj);
            }
            sum = sum.add(&d).unwrap();
        }
        assert!(
            hit.iter().all(|&h| (h as i64 - j as i64).abs() <= 1),
            "{hit:?}"
        );
        assert!(max_diff(&sum, &f) < 1e-13);
    }
}

#[test]
fn blocks_far_apart_are_orthogonal_projections() {
    let g = grid(64);
    let p = build_partition(g);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = broad_field(g, &mut rng, 31);
    for j in 0..=p.j_max() {
        for jp in 0..=p.j_max() {
            if (j as i64 - jp as i64).abs() >= 2 {
                let dd = p.delta_j(&p.delta_j(&f, jp).unwrap(), j).unwrap();
                assert!(dd.max_abs() <= 1e-13 * f.max_abs());
            }
        }
    }
}

#[test]
fn hs_norm_basics() {
    let g = grid(64);
    let p = build_partition(g);
    assert_eq!(p.hs_norm(&ScalarField::zeros(g), 1.0).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = broad_field(g, &mut rng, 31);
    for s in [0.0, 0.5, 1.0, 2.0] {
        let a = p.hs_norm(&f, s).unwrap();
        assert!(rel(p.hs_norm(&f.scaled(-3.0), s).unwrap(), 3.0 * a) < 1e-12);
    }
    // single mode |ξ| = 8, s = 1, direct Fourier oracle
    let m = ScalarField::from_fn(g, |x, _| (8.0 * x).sin());
    let oracle = (1.0f64 + 64.0).sqrt() * m.l2();
    let r = p.hs_norm(&m, 1.0).unwrap() / oracle;
    assert!((0.25..=4.0).contains(&r), "{r}");
    assert!(rel(p.fourier_hs_norm(&m, 1.0).unwrap(), oracle) < 1e-12);
}

#[test]
fn hs_norm_equivalence_random_fields() {
    let g = grid(64);
    let p = build_partition(g);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..100 {
        let f = broad_field(g, &mut rng, 31);
        for s in [0.0, 0.5, 1.0, 2.0] {
            let r = p.hs_norm(&f, s).unwrap() / p.fourier_hs_norm(&f, s).unwrap();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    assert!(lo >= 0.25 && hi <= 4.0, "{lo} {hi}");
}

#[test]
fn bony_reconstruction() {
    let g = grid(64);
    let p = build_partition(g);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let check = |u: &ScalarField, v: &ScalarField| {
        let (a, b, r) = p.bony_decompose(u, v).unwrap();
        let uv = u.mul(v).unwrap();
        let s = a.add(&b).unwrap().add(&r).unwrap();
        assert!(s.sub(&uv).unwrap().l2() <= 1e-9 * uv.l2().max(1e-300));
        (a, b, r)
    };
    for _ in 0..10 {
        let u = random_smooth(g, &mut rng, 1.0, 10);
        let v = random_smooth(g, &mut rng, 1.0, 10);
        check(&u, &v);
    }
    let u = ScalarField::from_fn(g, |x, y| (5.0 * x + 2.0 * y).sin());
    check(&u, &u);
    // constant u: T_u v carries c times the part of v above the lowest shells
    let c = ScalarField::constant(g, 2.0);
    let v = random_smooth(g, &mut rng, 1.0, 10);
    let (tuv, tvu, r) = check(&c, &v);
    assert!(tvu.max_abs() < 1e-12);
    assert!(max_diff(&tuv.add(&r).unwrap(), &v.scaled(2.0)) < 1e-12);
    assert!(p.bony_decompose(&u, &ScalarField::zeros(grid(32))).is_err());
}

#[test]
fn bernstein_constants() {
    let g = grid(64);
    let p = build_partition(g);
    for j in 1..=4usize {
        let k = (1u32 << j) as f64;
        let f = ScalarField::from_fn(g, |_, y| (k * y + 0.3).cos());
        for (pe, qe) in [
            (2.0, 2.0),
            (2.0, 4.0),
            (2.0, f64::INFINITY),
            (4.0, f64::INFINITY),
        ] {
            let r = p.bernstein_check(&f, j, pe, qe).unwrap();
            assert!((r.derivative_ratio - k).abs() <= 1e-12 * k, "{j} {pe}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let f = broad_field(g, &mut rng, 31);
        for j in 2..p.j_max() {
            for (pe, qe) in [
                (2.0, 2.0),
                (2.0, 4.0),
                (4.0, f64::INFINITY),
                (2.0, f64::INFINITY),
            ] {
                let r = p.bernstein_check(&f, j, pe, qe).unwrap();
                let scale = (1u32 << j) as f64;
                assert!(r.derivative_ratio >= scale / 10.0 && r.derivative_ratio <= 10.0 * scale);
                assert!(r.lq_ratio.is_finite());
                worst = worst.max(r.derivative_constant);
            }
        }
    }
    assert!(worst <= 10.0, "{worst}");
    let low = ScalarField::from_fn(g, |x, _| x.cos());
    assert!(matches!(
        p.bernstein_check(&low, 4, 2.0, 2.0),
        Err(alcs_core::Error::EmptyBlock { j: 4 })
    ));
    assert!(p.bernstein_check(&low, 0, 3.0, 3.0).is_err());
}

#[test]
fn commutator_constants() {
    let g = grid(64);
    let p = build_partition(g);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v = broad_field(g, &mut rng, 20);
    let c = p
        .commutator_check(&ScalarField::constant(g, 3.0), &v, 2)
        .unwrap();
    assert!(c.lhs <= 1e-12 * v.l2());
    let u = ScalarField::from_fn(g, |x, _| x.sin());
    let hv = ScalarField::from_fn(g, |_, y| (12.0 * y).cos());
    let consts: Vec<f64> = (2..=4)
        .map(|j| p.commutator_check(&u, &hv, j).unwrap().constant)
        .collect();
    assert!(
        consts.iter().all(|c| c.is_finite() && *c < 50.0),
        "{consts:?}"
    );
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let u = random_smooth(g, &mut rng, 1.0, 6);
        let v = random_smooth(g, &mut rng, 1.0, 12);
        for j in 0..=p.j_max() {
            worst = worst.max(p.commutator_check(&u, &v, j).unwrap().constant);
        }
    }
    assert!(worst <= 50.0, "{worst}");
}

#[test]
fn product_estimate() {
    let g = grid(64);
    let p = build_partition(g);
    let z = p
        .product_estimate_check(&ScalarField::zeros(g), 2, 0.5)
        .unwrap();
    assert!(z.block_norms.iter().all(|b| *b == 0.0));
    // sin² = (1 - cos 2x)/2: mean plus one mode at |k| = 2
    let u = ScalarField::from_fn(g, |x, _| x.sin());
    let r = p.product_estimate_check(&u, 2, 0.5).unwrap();
    let s0 = p.s_j(&u.mul(&u).unwrap(), 0).unwrap().l2();
    assert!(rel(r.block_norms[0], s0) < 1e-12);
    for (i, b) in r.block_norms.iter().enumerate() {
        if i >= 4 {
            assert!(*b < 1e-13, "block {i}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let u = random_smooth(g, &mut rng, 1.0, 5);
        let r = p.product_estimate_check(&u, 3, 0.5).unwrap();
        assert!(r.constant.is_finite() && r.constant > 0.0);
        assert!((r.a_l2 - 1.0).abs() < 1e-12);
        assert!(r.tail_fraction <= 0.1, "{}", r.tail_fraction);
    }
    assert!(p.product_estimate_check(&u, 5, 0.5).is_err());
    assert!(p.product_estimate_check(&u, 2, 0.0).is_err());
}

#[test]
fn split_low_high_cases() {
    let g = grid(64);
    let p = build_partition(g);
    let z = p
        .split_low_high(&QTensorField::zeros(g), &VelocityField::zeros(g), 1.0)
        .unwrap();
    assert_eq!(z, (0.0, 0.0, 0.0));
    let q = QTensorField::constant(g, &alcs_core::tensor::QTensor::new2(0.2, 0.1));
    let u = VelocityField {
        ux: ScalarField::constant(g, 1.0),
        uy: ScalarField::constant(g, -0.5),
    };
    let (a, b, c) = p.split_low_high(&q, &u, 1.0).unwrap();
    assert!(b.abs() <= 1e-12 * c && rel(a, c) < 1e-12);
    let hq = QTensorField {
        q11: ScalarField::from_fn(g, |x, _| (16.0 * x).sin()),
        q12: ScalarField::zeros(g),
    };
    let (a, b, c) = p
        .split_low_high(&hq, &VelocityField::zeros(g), 0.5)
        .unwrap();
    assert!(a <= 1e-14 * c && rel(b, c) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn split_adds_up(seed in any::<u64>(), s in 0.1f64..2.0) {
        let g = grid(32);
        let p = build_partition(g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_q(g, &mut rng, 1.0, 10);
        let u = random_div_free(g, &mut rng, 1.0, 10);
        let (a, b, c) = p.split_low_high(&q, &u, s).unwrap();
        prop_assert!(a >= 0.0 && b >= 0.0);
        prop_assert!(rel(a + b, c) <= 1e-12);
        // φ against the component-wise H^s norms
        let sp = Spectral::new(g);
        let mut direct = 0.0;
        for f in [&q.q11, &q.q12] {
            for d in sp.gradient(f).unwrap() {
                direct += 2.0 * p.hs_norm(&d, s).unwrap().powi(2);
            }
        }
        direct += p.hs_norm(&u.ux, s).unwrap().powi(2) + p.hs_norm(&u.uy, s).unwrap().powi(2);
        prop_assert!(rel(c, direct) < 1e-10);
    }
}
