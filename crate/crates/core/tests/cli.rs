//! End-to-end tests of the `rismod` binary.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rismod::artifact::{read_constellation_csv, read_sweep_csv, Metric};
use rismod::config::{JobConfig, JobKind};
use tempfile::TempDir;

const APSK_128: &str = r#"{
  "link": {"elements": 128, "rx_antennas": 1, "kappa": 1.0, "phase_bits": 3},
  "scheme": {"kind": "apsk", "m": 128, "v": 8},
  "seed": 5
}"#;

const QAPSK_SWEEP: &str = r#"{
  "link": {"elements": 64, "rx_antennas": 2, "kappa": 1.0, "phase_bits": 3},
  "scheme": {"kind": "qapsk", "m": 16, "v": 4},
  "snr_db": [-30, -20, -10],
  "trials_per_point": 2000,
  "channels_per_point": 10,
  "seed": 11
}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn rismod(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rismod"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn apsk_constellation_has_sixteen_rings_of_eight() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        &APSK_128.replace("\"seed\"", "\"constellation\": \"mean\", \"seed\""),
    );
    let (header, rows) =
        read_constellation_csv(&stdout(&rismod(&["constellation"], &cfg))).unwrap();
    assert_eq!(header.job, "constellation");
    assert_eq!(rows.len(), 128);
    let pairs: BTreeSet<_> = rows.iter().map(|r| (r.l.unwrap(), r.v.unwrap())).collect();
    assert_eq!(pairs.len(), 128);
    assert_eq!(
        pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>(),
        (1..=16).collect()
    );
    assert_eq!(
        pairs.iter().map(|p| p.1).collect::<BTreeSet<_>>(),
        (0..8).collect()
    );
    let mut radii: Vec<f64> = rows.iter().map(|r| r.re.hypot(r.im)).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * b.abs());
    assert_eq!(radii.len(), 16);
}

#[test]
fn drawn_constellation_labels_follow_the_layer() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", APSK_128);
    let (_, rows) = read_constellation_csv(&stdout(&rismod(&["constellation"], &cfg))).unwrap();
    for l in 1..=16 {
        let r: Vec<f64> = rows
            .iter()
            .filter(|r| r.l == Some(l))
            .map(|r| r.re.hypot(r.im))
            .collect();
        assert_eq!(r.len(), 8);
        assert!(
            r.iter().all(|x| (x - r[0]).abs() < 1e-9 * r[0]),
            "layer {l} radii {r:?}"
        );
    }
}

#[test]
fn reruns_are_byte_identical_and_seed_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.json", QAPSK_SWEEP);
    let a = stdout(&rismod(&["sep", "--workers", "1"], &cfg));
    let b = stdout(&rismod(&["sep", "--workers", "3"], &cfg));
    assert_eq!(a, b);
    let c = stdout(&rismod(&["sep", "--seed", "12"], &cfg));
    assert_ne!(
        rismod::artifact::csv_body(&a),
        rismod::artifact::csv_body(&c)
    );
    let (header, _) = read_sweep_csv(&c).unwrap();
    assert_eq!(header.config["seed"], 12);
}

#[test]
fn header_records_the_resolved_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.json", QAPSK_SWEEP);
    let (header, rows) = read_sweep_csv(&stdout(&rismod(&["theory"], &cfg))).unwrap();
    let resolved = JobConfig::from_json(QAPSK_SWEEP)
        .unwrap()
        .resolved(JobKind::Theory);
    assert_eq!(header.config, resolved);
    assert_eq!(header.job, "theory");
    assert_eq!(rows.len(), 6);
    assert!(rows
        .iter()
        .all(|r| matches!(r.metric, Metric::SepTheory | Metric::CapacityUb)));
}

#[test]
fn capacity_job_writes_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.json", QAPSK_SWEEP);
    let out = dir.path().join("cap.csv");
    let o = rismod(&["capacity", "--out", out.to_str().unwrap()], &cfg);
    assert!(stdout(&o).is_empty());
    let (_, rows) = read_sweep_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let sim: Vec<_> = rows
        .iter()
        .filter(|r| r.metric == Metric::CapacitySim)
        .collect();
    let ub: Vec<_> = rows
        .iter()
        .filter(|r| r.metric == Metric::CapacityUb)
        .collect();
    assert_eq!((sim.len(), ub.len()), (3, 3));
    for r in sim.iter().chain(&ub) {
        assert!((0.0..=4.0).contains(&r.value));
    }
    assert!(sim
        .iter()
        .all(|r| r.trials == Some(2000) && r.channels == Some(10)));
}

#[test]
fn invalid_configs_exit_with_status_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("empty grid", QAPSK_SWEEP.replace("[-30, -20, -10]", "[]")),
        (
            "unknown field",
            QAPSK_SWEEP.replace("\"seed\"", "\"sed\": 1, \"seed\""),
        ),
        (
            "V does not divide 2^B",
            APSK_128.replace("\"v\": 8", "\"v\": 16"),
        ),
        (
            "decreasing grid",
            QAPSK_SWEEP.replace("[-30, -20, -10]", "[-10, -20]"),
        ),
    ];
    for (what, text) in cases {
        let cfg = write(&dir, "bad.json", &text);
        let o = rismod(&["sep"], &cfg);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{what}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
    let cfg = write(&dir, "ok.json", QAPSK_SWEEP);
    assert_eq!(
        rismod(&["sep", "--workers", "0"], &cfg).status.code(),
        Some(2)
    );
}

#[test]
fn missing_config_exits_with_status_one() {
    let o = rismod(&["sep"], Path::new("/nonexistent/rismod.json"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rismod.json"));
}
