use alcs::config::{parse_config, RunConfig};
use alcs::initial::{make_initial, random_q, random_velocity};
use alcs_core::spectral::Spectral;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(text: &str) -> RunConfig {
    parse_config(text, None).unwrap()
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

#[test]
fn uniform_director_along_x() {
    let s = make_initial(&cfg(
        "N = 16\nic = uniform_director\ns_order = 0.5\ndirector_angle = 0\n",
    ))
    .unwrap();
    assert!(s.q.q11.data.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    assert!(s.q.q12.data.iter().all(|&v| v.abs() < 1e-15));
    assert!(s.u.ux.data.iter().chain(&s.u.uy.data).all(|&v| v == 0.0));
    // director at 45 degrees: off-diagonal only
    let d = make_initial(&cfg(
        "N = 16\nic = uniform_director\ns_order = 0.5\ndirector_angle = 0.7853981633974483\n",
    ))
    .unwrap();
    assert!(d.q.q11.data.iter().all(|&v| v.abs() < 1e-15));
    assert!(d.q.q12.data.iter().all(|&v| (v - 0.25).abs() < 1e-15));
}

#[test]
fn taylor_green_values() {
    let s = make_initial(&cfg("N = 16\nic = taylor_green\namplitude = 2\n")).unwrap();
    let h = 2.0 * std::f64::consts::PI / 16.0;
    for iy in 0..16 {
        for ix in 0..16 {
            let (x, y) = (ix as f64 * h, iy as f64 * h);
            assert!((s.u.ux.data[iy * 16 + ix] - 2.0 * x.sin() * y.cos()).abs() < 1e-14);
            assert!((s.u.uy.data[iy * 16 + ix] + 2.0 * x.cos() * y.sin()).abs() < 1e-14);
        }
    }
}

#[test]
fn random_spectrum_seeded_and_scaled() {
    let text = "N = 32\nic = random_spectrum\nseed = 5\namplitude = 0.3\nq_amplitude = 0.2\n";
    let a = make_initial(&cfg(text)).unwrap();
    let b = make_initial(&cfg(text)).unwrap();
    assert_eq!(a.q.q11.data, b.q.q11.data);
    assert_eq!(a.u.uy.data, b.u.uy.data);
    let c = make_initial(&cfg(&text.replace("seed = 5", "seed = 6"))).unwrap();
    assert_ne!(a.q.q11.data, c.q.q11.data);

    // RMS speed and RMS Frobenius norm of the full 2x2 tensor
    let speed: Vec<f64> =
        a.u.ux
            .data
            .iter()
            .zip(&a.u.uy.data)
            .map(|(x, y)| (x * x + y * y).sqrt())
            .collect();
    let qnorm: Vec<f64> =
        a.q.q11
            .data
            .iter()
            .zip(&a.q.q12.data)
            .map(|(p, q)| (2.0 * (p * p + q * q)).sqrt())
            .collect();
    assert!((rms(&speed) - 0.3).abs() < 1e-12);
    assert!((rms(&qnorm) - 0.2).abs() < 1e-12);
}

#[test]
fn kinetic_energy_scales_with_amplitude_squared() {
    let g = alcs_core::spectral::Grid2D::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let sp = Spectral::new(g);
    let ke = |amp: f64| {
        let u = random_velocity(&sp, &mut ChaCha8Rng::seed_from_u64(3), 2.0, amp);
        u.ux.data
            .iter()
            .chain(&u.uy.data)
            .map(|v| v * v)
            .sum::<f64>()
    };
    let r = ke(0.4) / ke(0.1);
    assert!((r - 16.0).abs() < 1e-10, "{r}");
}

#[test]
fn random_velocity_is_divergence_free_and_q_real() {
    let g = alcs_core::spectral::Grid2D::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let sp = Spectral::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_velocity(&sp, &mut rng, 3.0, 1.0);
    assert!(sp.divergence(&u).unwrap().max_abs() < 1e-12);
    let q = random_q(&sp, &mut rng, 3.0, 1.0);
    assert!(q.q11.data.iter().all(|v| v.is_finite()));
    let mean: f64 = q.q11.data.iter().sum::<f64>() / q.q11.data.len() as f64;
    assert!(mean.abs() < 1e-14);
}

#[test]
fn perturbation_changes_only_q() {
    let base = "N = 32\nseed = 5\n";
    let a = make_initial(&cfg(base)).unwrap();
    let b = make_initial(&cfg(&format!("{base}perturb = 0.01\nperturb_seed = 9\n"))).unwrap();
    assert_eq!(a.u.ux.data, b.u.ux.data);
    let d: Vec<f64> =
        a.q.q11
            .data
            .iter()
            .zip(&b.q.q11.data)
            .map(|(x, y)| x - y)
            .collect();
    assert!(rms(&d) > 1e-4 && rms(&d) < 0.02);
}

#[test]
fn file_grid_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.bin");
    let s = make_initial(&cfg("N = 16\n")).unwrap();
    alcs::snapshot::write_state(&p, &s).unwrap();
    let ok = make_initial(&cfg(&format!(
        "N = 16\nic = file\nic_path = {}\n",
        p.display()
    )))
    .unwrap();
    assert_eq!(ok.q.q12.data, s.q.q12.data);
    let e = make_initial(&cfg(&format!(
        "N = 32\nic = file\nic_path = {}\n",
        p.display()
    )))
    .unwrap_err();
    assert!(e.to_string().contains("16"), "{e}");
}
