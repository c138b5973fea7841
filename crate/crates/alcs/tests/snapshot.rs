use alcs::snapshot::{
    read_state, write_state, Snapshot, SnapshotError, SnapshotIoError, STATE_FIELDS,
};
use alcs_core::dynamics::StateFields;
use alcs_core::spectral::{Grid2D, QTensorField, ScalarField, VelocityField};

fn sample_state() -> StateFields {
    let g = Grid2D::new(8, 2.0 * std::f64::consts::PI).unwrap();
    StateFields {
        t: 0.375,
        q: QTensorField {
            q11: ScalarField::from_fn(g, |x, y| x.sin() * y.cos()),
            q12: ScalarField::from_fn(g, |x, _| 1e-300 * x),
        },
        u: VelocityField {
            ux: ScalarField::from_fn(g, |_, y| -y),
            uy: ScalarField::constant(g, f64::MAX),
        },
    }
}

/// Hand-built file: 36-byte header, then a 16-byte name and N^2 values.
fn hand_bytes(n: u32, values: &[f64]) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(b"ALCS");
    b.extend_from_slice(&1u32.to_le_bytes());
    b.extend_from_slice(&2u32.to_le_bytes());
    b.extend_from_slice(&n.to_le_bytes());
    b.extend_from_slice(&3.5f64.to_le_bytes());
    b.extend_from_slice(&0.25f64.to_le_bytes());
    b.extend_from_slice(&1u32.to_le_bytes());
    let mut name = [0u8; 16];
    name[..3].copy_from_slice(b"rho");
    b.extend_from_slice(&name);
    for v in values {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

#[test]
fn decodes_hand_built_bytes() {
    let values: Vec<f64> = (0..64).map(|i| i as f64 * 0.5 - 3.0).collect();
    let s = Snapshot::decode(&hand_bytes(8, &values)).unwrap();
    assert_eq!((s.d, s.n, s.l, s.t), (2, 8, 3.5, 0.25));
    assert_eq!(s.fields.len(), 1);
    assert_eq!(s.field("rho").unwrap(), &values[..]);
    assert_eq!(s.encode().unwrap(), hand_bytes(8, &values));
}

#[test]
fn state_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.bin");
    let s = sample_state();
    write_state(&p, &s).unwrap();
    assert_eq!(std::fs::metadata(&p).unwrap().len(), 36 + 4 * (16 + 8 * 64));
    let back = read_state(&p).unwrap();
    assert_eq!(back.t, s.t);
    for (a, b) in [
        (&back.q.q11, &s.q.q11),
        (&back.q.q12, &s.q.q12),
        (&back.u.ux, &s.u.ux),
        (&back.u.uy, &s.u.uy),
    ] {
        assert!(a
            .data
            .iter()
            .zip(&b.data)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    let snap = Snapshot::from_state(&s);
    let names: Vec<&str> = snap.fields.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, STATE_FIELDS);
}

#[test]
fn truncation_reports_expected_and_actual() {
    let bytes = hand_bytes(8, &[0.0; 64]);
    let cut = &bytes[..bytes.len() - 5];
    match Snapshot::decode(cut) {
        Err(SnapshotError::Truncated { expected, actual }) => {
            assert_eq!(expected, 36 + 16 + 512);
            assert_eq!(actual, 36 + 16 + 512 - 5);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        Snapshot::decode(&bytes[..10]),
        Err(SnapshotError::Truncated {
            expected: 36,
            actual: 10
        })
    ));
    let mut long = bytes.clone();
    long.push(0);
    assert!(matches!(
        Snapshot::decode(&long),
        Err(SnapshotError::TrailingBytes { .. })
    ));
}

#[test]
fn foreign_endian_and_version() {
    let bytes = hand_bytes(8, &[0.0; 64]);
    let mut swapped = bytes.clone();
    swapped[4..8].copy_from_slice(&1u32.to_be_bytes());
    assert!(matches!(
        Snapshot::decode(&swapped),
        Err(SnapshotError::ForeignEndian)
    ));
    let mut reversed = bytes.clone();
    reversed[..4].copy_from_slice(b"SCLA");
    assert!(matches!(
        Snapshot::decode(&reversed),
        Err(SnapshotError::ForeignEndian)
    ));
    let mut v9 = bytes.clone();
    v9[4..8].copy_from_slice(&9u32.to_le_bytes());
    assert!(matches!(
        Snapshot::decode(&v9),
        Err(SnapshotError::Version(9))
    ));
    let mut junk = bytes;
    junk[..4].copy_from_slice(b"JUNK");
    assert!(matches!(Snapshot::decode(&junk), Err(SnapshotError::BadMagic(m)) if &m == b"JUNK"));
}

#[test]
fn missing_state_field_and_bad_name() {
    let s = Snapshot::decode(&hand_bytes(8, &[0.0; 64])).unwrap();
    assert!(matches!(s.to_state(), Err(SnapshotError::MissingField(f)) if f == "q11"));
    let mut bad = hand_bytes(8, &[0.0; 64]);
    bad[36 + 5] = b'x';
    assert!(matches!(
        Snapshot::decode(&bad),
        Err(SnapshotError::BadName(_))
    ));
    let long = Snapshot {
        d: 2,
        n: 8,
        l: 1.0,
        t: 0.0,
        fields: vec![("a_name_longer_than_16".into(), vec![0.0; 64])],
    };
    assert!(matches!(long.encode(), Err(SnapshotError::BadName(_))));
}

#[test]
fn io_errors_carry_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("none.bin");
    match read_state(&p) {
        Err(e @ SnapshotIoError::Io { .. }) => assert!(e.to_string().contains("none.bin")),
        other => panic!("{other:?}"),
    }
}
