use cmkv::output::{read_results, results_csv, OutputDir, ResultRow};
use cmkv::snapshot::{content_hash, decode, digest_bytes, encode, write_csv, Snapshot, HEADER_LEN};
use cmkv::CliError;
use cmkv_core::ParticleEnsemble;
use proptest::prelude::*;

fn snapshot(positions: Vec<f64>, n: usize, m: usize, d: usize) -> Snapshot {
    Snapshot {
        ensemble: ParticleEnsemble::new(positions, n, m, d, 0.75).unwrap(),
        seed: 0x0102_0304_0506_0708,
        config_digest: core::array::from_fn(|i| i as u8),
    }
}

#[test]
fn header_layout() {
    let s = snapshot(vec![1.5, -2.0, 0.25, 4.0, 5.0, 6.0], 3, 2, 1);
    let bytes = encode(&s);
    assert_eq!(bytes.len(), HEADER_LEN + 6 * 8);
    assert_eq!(&bytes[0..8], b"CMKVSNAP");
    assert_eq!(&bytes[8..12], &[1, 0, 0, 0]);
    assert_eq!(&bytes[12..16], &[0, 0, 0, 0]);
    assert_eq!(&bytes[16..24], &[3, 0, 0, 0, 0, 0, 0, 0]);
    assert_eq!(&bytes[24..32], &[2, 0, 0, 0, 0, 0, 0, 0]);
    assert_eq!(&bytes[32..40], &[1, 0, 0, 0, 0, 0, 0, 0]);
    // 0.75 = 0x3FE8000000000000
    assert_eq!(&bytes[40..48], &[0, 0, 0, 0, 0, 0, 0xe8, 0x3f]);
    assert_eq!(&bytes[48..56], &[8, 7, 6, 5, 4, 3, 2, 1]);
    assert_eq!(bytes[56], 0);
    assert_eq!(bytes[87], 31);
    // 1.5 = 0x3FF8000000000000
    assert_eq!(&bytes[88..96], &[0, 0, 0, 0, 0, 0, 0xf8, 0x3f]);
}

#[test]
fn rejects_damaged_files() {
    let bytes = encode(&snapshot(vec![1.0, 2.0], 2, 1, 1));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode(&bad), Err(CliError::Snapshot(_))));
    assert!(decode(&bytes[..bytes.len() - 1]).is_err());
    assert!(decode(&bytes[..40]).is_err());
    let mut version = bytes.clone();
    version[8] = 2;
    assert!(decode(&version).is_err());
    let mut shape = bytes;
    shape[16] = 3;
    assert!(decode(&shape).is_err());
}

#[test]
fn git_style_hash() {
    assert_eq!(content_hash(b"hello"), "8aec4e4876f854f688d0ebfc8f37598f38e5fd6903cccc850ca36591175aeb60");
}

#[test]
fn digest_parsing() {
    let hex = "00".repeat(31) + "ff";
    assert_eq!(digest_bytes(&hex).unwrap()[31], 255);
    assert!(digest_bytes("abc").is_err());
    assert!(digest_bytes(&"zz".repeat(32)).is_err());
}

#[test]
fn csv_export() {
    let s = snapshot(vec![1.0, 2.0, 3.0, 4.0], 1, 2, 2);
    let mut out = Vec::new();
    write_csv(&s.ensemble, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text, "particle,block,component,value\n0,0,0,1\n0,0,1,2\n0,1,0,3\n0,1,1,4\n");
}

proptest! {
    #[test]
    fn snapshot_round_trip(
        n in 1usize..20,
        m in 1usize..4,
        d in 1usize..3,
        seed in any::<u64>(),
        values in proptest::collection::vec(-1e300f64..1e300, 240),
    ) {
        let count = n * m * d;
        let mut positions = values[..count].to_vec();
        positions[0] = -0.0;
        if count > 1 {
            positions[1] = 5e-324;
        }
        let mut s = snapshot(positions, n, m, d);
        s.seed = seed;
        let back = decode(&encode(&s)).unwrap();
        prop_assert_eq!(back.ensemble.positions().len(), count);
        for (a, b) in back.ensemble.positions().iter().zip(s.ensemble.positions()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back, s);
    }
}

fn row(metric: &str, value: f64) -> ResultRow {
    ResultRow {
        run_id: "cell-00001".into(),
        model: "decoupled-oracle".into(),
        n: 100,
        m: 2,
        d: 1,
        h: 0.1 + 0.2,
        epsilon: 1e-7,
        dt: 0.01,
        t_end: 1.0,
        seed: 3,
        metric_name: metric.into(),
        metric_value: value,
        status: "ok".into(),
        config_digest: "ab".into(),
        snapshot_hash: "cd".into(),
        reference_hash: String::new(),
    }
}

#[test]
fn results_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![row("histogram_tv", 0.123456789012345), row("status", f64::NAN)];
    let bytes = results_csv(&rows).unwrap();
    let header = String::from_utf8(bytes.clone()).unwrap();
    assert!(header.starts_with(
        "run_id,model,n,m,d,h,epsilon,dt,T,seed,metric_name,metric_value,status,config_digest,snapshot_hash,reference_hash\n"
    ));
    let path = dir.path().join("r.csv");
    std::fs::write(&path, bytes).unwrap();
    let back = read_results(&path).unwrap();
    assert_eq!(back[0], rows[0]);
    assert!(back[1].metric_value.is_nan());
    assert!(String::from_utf8(results_csv(&[]).unwrap()).unwrap().starts_with("run_id,"));
}

#[test]
fn output_dir_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let out = OutputDir::create(dir.path().join("o"), false).unwrap();
    out.write("a/b.txt", b"one").unwrap();
    assert!(matches!(out.write("a/b.txt", b"two"), Err(CliError::Exists(_))));
    assert_eq!(std::fs::read(out.path("a/b.txt")).unwrap(), b"one");
    let forced = OutputDir::create(dir.path().join("o"), true).unwrap();
    forced.write("a/b.txt", b"two").unwrap();
    assert_eq!(std::fs::read(out.path("a/b.txt")).unwrap(), b"two");
}
