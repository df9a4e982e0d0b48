use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sofft(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sofft"))
        .args(args)
        .current_dir(dir)
        .env_remove("SOFFT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn gen_then_recover_finds_the_sidecar_support() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = sofft(&["gen", "--dims", "1", "4096", "--k", "20", "--model", "pm-one", "--seed", "7", "--out", "s.bin"], d);
    assert!(g.status.success(), "{g:?}");
    let sidecar = fs::read_to_string(d.join("s.bin.support.json")).unwrap();
    let support: Vec<usize> = sidecar
        .split("\"support\":")
        .nth(1)
        .unwrap()
        .trim()
        .trim_start_matches('[')
        .split(']')
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.trim().parse().unwrap())
        .collect();
    assert_eq!(support.len(), 20);

    let r = sofft(&["recover", "--input", "s.bin", "--k", "20", "--r-max", "18", "--out", "r.csv", "--seed", "3"], d);
    assert!(r.status.success(), "{r:?}");
    let out = stdout(&r);
    assert!(field(&out, "samples_used").parse::<usize>().unwrap() < 4096);
    assert!(field(&out, "iterations").parse::<usize>().unwrap() > 0);
    assert!(field(&out, "residual_l2_relative").parse::<f64>().unwrap() < 0.05);

    let triples = fs::read_to_string(d.join("r.csv")).unwrap();
    let mut lines = triples.lines();
    assert_eq!(lines.next(), Some("index,re,im"));
    let recovered: Vec<usize> = lines
        .filter(|l| {
            let mut it = l.split(',').skip(1).map(|v| v.parse::<f64>().unwrap());
            it.next().unwrap().hypot(it.next().unwrap()) > 0.5
        })
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(recovered, support);
}

#[test]
fn gen_is_deterministic_and_the_environment_seed_wins() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["gen", "--dims", "2", "32", "--k", "5", "--seed", "7"];
    for name in ["a.bin", "b.bin"] {
        let mut a = args.to_vec();
        a.extend(["--out", name]);
        assert!(sofft(&a, d).status.success());
    }
    assert_eq!(fs::read(d.join("a.bin")).unwrap(), fs::read(d.join("b.bin")).unwrap());

    let env = Command::new(env!("CARGO_BIN_EXE_sofft"))
        .args(["gen", "--dims", "2", "32", "--k", "5", "--seed", "1", "--out", "c.bin"])
        .current_dir(d)
        .env("SOFFT_SEED", "7")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(fs::read(d.join("a.bin")).unwrap(), fs::read(d.join("c.bin")).unwrap());
}

#[test]
fn json_output_is_limited_to_small_grids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(sofft(&["gen", "--dims", "1", "64", "--k", "3", "--json", "--out", "s.json"], d).status.success());
    assert!(fs::read_to_string(d.join("s.json")).unwrap().starts_with('{'));
    let big = sofft(&["gen", "--dims", "1", "8192", "--k", "3", "--json", "--out", "b.json"], d);
    assert_eq!(big.status.code(), Some(2));
}

#[test]
fn exit_codes_distinguish_usage_io_and_check_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(sofft(&["bogus"], d).status.code(), Some(2));
    assert_eq!(sofft(&["gen", "--dims", "1", "100", "--k", "3", "--out", "x"], d).status.code(), Some(2));
    assert_eq!(sofft(&["gen", "--k", "3", "--model", "nope", "--out", "x"], d).status.code(), Some(2));
    assert_eq!(
        sofft(&["recover", "--input", "missing.bin", "--k", "3", "--out", "r.csv"], d).status.code(),
        Some(3)
    );
    fs::write(d.join("junk.bin"), b"not a signal").unwrap();
    assert_eq!(
        sofft(&["recover", "--input", "junk.bin", "--k", "3", "--out", "r.csv"], d).status.code(),
        Some(3)
    );
    let injected = sofft(&["selftest", "--quick", "--check", "det-parity", "--inject-even-det"], d);
    assert_eq!(injected.status.code(), Some(1));
    assert!(stdout(&injected).contains("FAIL det-parity"));
}

#[test]
fn theory_mode_requires_a_noise_level() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(sofft(&["gen", "--dims", "1", "1024", "--k", "4", "--out", "s.bin"], d).status.success());
    let r = sofft(&["recover", "--input", "s.bin", "--k", "4", "--mode", "theory", "--out", "r.csv"], d);
    assert_eq!(r.status.code(), Some(2));
    let ok = sofft(
        &["recover", "--input", "s.bin", "--k", "4", "--mode", "theory", "--mu", "0.01", "--eps", "0.5", "--alpha", "0.5", "--r-max", "8", "--out", "r.csv"],
        d,
    );
    assert!(ok.status.success(), "{ok:?}");
}

#[test]
fn experiment_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let e = sofft(
        &["experiment", "--k", "10", "--r-max", "5,16", "--trials", "4", "--out", "e.csv", "--svg", "e.svg", "--real-measurements", "--threads", "1"],
        d,
    );
    assert!(e.status.success(), "{e:?}");
    let csv = fs::read_to_string(d.join("e.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,k,r_max,samples,trials,successes,success_rate");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("sparse-fft,10,16,"));
    assert!(fs::read_to_string(d.join("e.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn selftest_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let s = sofft(&["selftest", "--quick"], dir.path());
    assert!(s.status.success(), "{}", stdout(&s));
    assert_eq!(stdout(&s).lines().filter(|l| l.starts_with("PASS")).count(), 8);
}
