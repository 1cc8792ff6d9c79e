use std::path::Path;
use std::process::Command;

use smrelay::cli::{cmd_diversity_fit, cmd_dmt_theory, parse_gain_list, SchemeConfig, SWEEP_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smrelay"))
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn dmt_theory_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dmt.csv");
    let cfg = SchemeConfig {
        r: parse_gain_list("0:0.05:1").unwrap(),
        ..SchemeConfig::default()
    };
    assert_eq!(cmd_dmt_theory(&cfg, &out).unwrap(), 84);
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "source,K,N,r,d");
    assert_eq!(lines.len(), 85);
    assert!(lines.contains(&"theorem1,2,2,0.5,0.5"));
    assert!(lines.contains(&"upper-bound,2,,1,0"));
    assert!(lines.contains(&"theorem2-lower,2,2,1,0"));
    assert!(lines.contains(&"lp-oracle,2,2,0,2"));
}

#[test]
fn sweep_is_byte_identical_across_reruns_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        "relays = 2\nsubblocks = 2\nregime = \"interference\"\nsnr_db = \"10:10:30\"\nr = [0.0, 0.5]\ntrials = 20000\nmin_outages = 100\nseed = 5\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "2", "4", "4"] {
        let out = dir.path().join(format!("s{}.csv", outputs.len()));
        let status = bin()
            .args(["outage-sweep", "--config"])
            .arg(&cfg)
            .args(["--workers", workers, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(read(&out));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let first = &outputs[0];
    assert_eq!(first.lines().next().unwrap(), SWEEP_HEADER.join(","));
    // r = 0 rows never see an outage
    for line in first.lines().skip(1).filter(|l| l.split(',').nth(3) == Some("0")) {
        assert_eq!(line.split(',').nth(6), Some("0"));
    }
}

#[test]
fn flags_override_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "snr_db = [10, 20, 30]\nr = [0.5]\ntrials = 5000\nseed = 1\n").unwrap();
    let run = |extra: &[&str], name: &str| {
        let out = dir.path().join(name);
        let ok = bin()
            .args(["outage-sweep", "--config"])
            .arg(&cfg)
            .args(extra)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .success();
        assert!(ok);
        read(&out)
    };
    let base = run(&[], "a.csv");
    assert_eq!(base, run(&["--seed", "1"], "b.csv"));
    assert_ne!(base, run(&["--seed", "2"], "c.csv"));
}

#[test]
fn diversity_fit_on_exact_power_law() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sweep.csv");
    let mut text = SWEEP_HEADER.join(",") + "\n";
    // p_hat = 1/P with P = 10^(dB/10)
    for (db, trials, outages) in [
        (20, 1_000_000u64, 10_000u64),
        (30, 1_000_000, 1_000),
        (40, 1_000_000, 100),
    ] {
        text += &format!("no-interference,2,2,0.5,{db},{trials},{outages},0,0,0\n");
    }
    text += "no-interference,2,2,0,20,1000,0,0,0,0\n";
    std::fs::write(&input, text).unwrap();
    let out = dir.path().join("fit.csv");
    let fits = cmd_diversity_fit(&input, &out).unwrap();
    assert_eq!(fits.len(), 1);
    assert!((fits[0].d_hat - 1.0).abs() < 1e-9);
    assert_eq!(fits[0].d_theory, Some(0.5));
    assert_eq!(fits[0].d_lower, None);
    let written = read(&out);
    assert_eq!(
        written.lines().next().unwrap(),
        "regime,K,N,r,d_hat,stderr,d_theory,d_lower"
    );
    assert!(written.lines().nth(1).unwrap().ends_with(",0.5,"));
}

#[test]
fn diversity_fit_rejects_foreign_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "a,b\n1,2\n").unwrap();
    assert!(cmd_diversity_fit(&input, &dir.path().join("o.csv")).is_err());
    let status = bin()
        .args(["diversity-fit", "--in"])
        .arg(&input)
        .arg("--out")
        .arg(dir.path().join("o.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_exit_codes_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("m.txt");
    let out = bin()
        .args([
            "verify",
            "--relays",
            "4",
            "--subblocks",
            "3",
            "--realizations",
            "30",
            "--dump-matrices",
        ])
        .arg(&dump)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("PASS signal-vs-matrix"));
    assert!(report.contains("bound 1.440000e2"));
    let dumped = read(&dump);
    assert!(dumped.starts_with("# F 12 12\n"));
    assert!(dumped.contains("# H_T 12 12\n") && dumped.contains("# P_N 12 12\n"));
    assert_eq!(dumped.lines().count(), 3 * 13);

    let faulty = bin()
        .args(["verify", "--realizations", "5", "--inject-fault"])
        .output()
        .unwrap();
    assert_eq!(faulty.status.code(), Some(1));
    assert!(String::from_utf8(faulty.stdout)
        .unwrap()
        .contains("FAIL signal-vs-matrix"));

    let bad = bin().args(["verify", "--subblocks", "1"]).status().unwrap();
    assert_eq!(bad.code(), Some(2));
}

#[test]
fn hamiltonian_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("star.toml");
    // every pair except those touching relay 1 interferes: star non-interference graph
    std::fs::write(&cfg, "relays = 4\ninterference_edges = [[2, 3], [2, 4], [3, 4]]\n").unwrap();
    let out = bin().args(["hamiltonian", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "none");

    let out = bin().args(["hamiltonian", "--relays", "5"]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1 2 3 4 5");
}
