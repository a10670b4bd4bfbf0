use std::fs;

use latticefarm::comm::{launch_inprocess, launch_socket_threads, CommConfig, Communicator};
use latticefarm::field::{FieldMeta, GaugeField};
use latticefarm::io::{load_field, read_configuration, save_field, FieldIoError, MAGIC_LINE};
use latticefarm::lattice::Geometry;

fn meta() -> FieldMeta {
    FieldMeta {
        beta: 5.7,
        c0: 1.0,
        c1: 0.0,
        sweeps: 3,
        seed: 41,
    }
}

#[test]
fn distributed_save_loads_serially() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dist.lfc");
    let geom = Geometry::build([4; 4], [1, 2, 1, 2], 4).unwrap();
    launch_inprocess(4, &CommConfig::default(), |c| {
        let f = GaugeField::hot(geom.clone(), c.rank(), meta());
        save_field(&path, &f, &c).unwrap();
    })
    .unwrap();
    let serial = Geometry::serial([4; 4]).unwrap();
    let loaded = load_field(&path, &serial, 0).unwrap();
    let reference = GaugeField::hot(serial, 0, meta());
    assert_eq!(loaded.raw_links(), reference.raw_links());
    assert_eq!(loaded.meta, meta());
}

#[test]
fn socket_save_matches_inprocess_save() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.lfc"), dir.path().join("b.lfc"));
    let geom = Geometry::build([4; 4], [2, 1, 1, 1], 2).unwrap();
    launch_inprocess(2, &CommConfig::default(), |c| {
        save_field(&a, &GaugeField::hot(geom.clone(), c.rank(), meta()), &c).unwrap()
    })
    .unwrap();
    launch_socket_threads(2, &CommConfig::default(), |c| {
        save_field(&b, &GaugeField::hot(geom.clone(), c.rank(), meta()), &c).unwrap()
    })
    .unwrap();
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn file_starts_with_text_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.lfc");
    let f = GaugeField::cold(Geometry::serial([2, 2, 2, 2]).unwrap(), 0, meta());
    save_field(&path, &f, &Communicator::solo()).unwrap();
    let bytes = fs::read(&path).unwrap();
    let text = String::from_utf8_lossy(&bytes[..64]);
    assert!(text.starts_with(MAGIC_LINE));
    assert_eq!(bytes.len() - 8 - text_header_len(&bytes), 16 * 4 * 144);
}

fn text_header_len(bytes: &[u8]) -> usize {
    let mut lines = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'\n' {
            lines += 1;
            if lines == 8 {
                return i + 1;
            }
        }
    }
    panic!("header incomplete")
}

#[test]
fn corruption_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.lfc");
    let f = GaugeField::hot(Geometry::serial([2, 2, 2, 2]).unwrap(), 0, meta());
    save_field(&path, &f, &Communicator::solo()).unwrap();
    let good = fs::read(&path).unwrap();

    let mut flipped = good.clone();
    let k = text_header_len(&good) + 1000;
    flipped[k] ^= 0x01;
    assert!(matches!(
        read_configuration(&flipped[..]),
        Err(FieldIoError::ChecksumMismatch { .. })
    ));

    let truncated = &good[..good.len() - 100];
    assert!(matches!(read_configuration(truncated), Err(FieldIoError::Format(_))));

    let serial = Geometry::serial([4; 4]).unwrap();
    assert!(matches!(
        load_field(&path, &serial, 0),
        Err(FieldIoError::DimsMismatch { .. })
    ));
}
