use std::fs;
use std::path::{Path, PathBuf};

use axwave::config::{parse_config, GeometrySpec, RunConfig};
use axwave::io::{read_snapshot, snapshot_name, Manifest};
use axwave::runner::{cli_main, run_experiment, sweep};
use axwave::Error;
use tempfile::TempDir;

const MODEL: &str = "[model]
alpha = 0.01
eps = 0.0001
gamma = 7.0
cm = 1.0
r_int = 0.1
radius = 0.8
";

fn small(experiment: &str, geometry: &str, extra: &str) -> String {
    format!(
        "experiment = \"{experiment}\"

{MODEL}
[geometry]
{geometry}

[grid]
n = 300
m = 4

[time]
dt = 0.05
t_end = 10.0
snapshot_times = [5.0, 10.0]

[front]
z_min = -300.0
z_max = 100.0
n = 400

[spectrum]
modes = [0, 1]
samples = 20

{extra}
[output]
dir = \"out\"
"
    )
}

const CONSTANT: &str = "kind = \"constant\"\nlength = 300.0";

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("axwave").chain(args.iter().copied()))
}

fn run_with(cfg: &Path, sub: &str, out: &Path) -> i32 {
    run(&[sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn simulate_writes_verified_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sim.toml", &small("simulate2d", CONSTANT, ""));
    let out = tmp.path().join("sim");
    assert_eq!(run_with(&cfg, "simulate", &out), 0);
    let m = Manifest::read(&out).unwrap();
    assert!(m.verify(&out).unwrap().is_empty());
    let snap = snapshot_name(10.0);
    for name in [snapshot_name(5.0), snap.clone(), "diagnostics.csv".into(), "summary.toml".into(), "config.toml".into()] {
        assert!(m.files.iter().any(|f| f.path == name), "{name} missing from {:?}", m.files);
    }
    let (field, t) = read_snapshot(&out.join(&snap)).unwrap();
    assert_eq!((field.n(), field.m(), t), (300, 4, 10.0));
    assert_eq!(fs::metadata(out.join(&snap)).unwrap().len(), 48 + 2 * 300 * 4 * 8);

    // tampering is detected
    fs::write(out.join("diagnostics.csv"), "t\n").unwrap();
    assert_eq!(m.verify(&out).unwrap(), vec!["diagnostics.csv".to_string()]);
}

#[test]
fn full_size_snapshot_has_the_documented_length() {
    let tmp = TempDir::new().unwrap();
    let text = small("simulate2d", "kind = \"constant\"\nlength = 1000.0", "")
        .replace("n = 300\nm = 4", "n = 2000\nm = 32")
        .replace("t_end = 10.0", "t_end = 0.1")
        .replace("[5.0, 10.0]", "[0.1]");
    let cfg = write_config(tmp.path(), "big.toml", &text);
    let o = run_experiment(&parse_config(&cfg).unwrap()).unwrap();
    let path = o.dir.join(snapshot_name(0.1));
    assert_eq!(fs::metadata(&path).unwrap().len(), 48 + 2 * 2000 * 32 * 8);

    let bytes = fs::read(&path).unwrap();
    let cut = tmp.path().join("cut.bin");
    fs::write(&cut, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(read_snapshot(&cut), Err(Error::Format { .. })));
}

#[test]
fn front_and_spectrum_subcommands() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", &small("spectrum", CONSTANT, ""));
    let out = tmp.path().join("front");
    assert_eq!(run_with(&cfg, "front", &out), 0);
    let text = fs::read_to_string(out.join("front.csv")).unwrap();
    assert_eq!(text.lines().count(), 401);

    let out = tmp.path().join("spec");
    assert_eq!(
        run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--modes", "0,2", "--seed", "3"]),
        0
    );
    assert!(out.join("spectrum_n0.csv").exists() && out.join("spectrum_n2.csv").exists());
    assert!(!out.join("spectrum_n1.csv").exists());
    assert!(Manifest::read(&out).unwrap().verify(&out).unwrap().is_empty());
}

#[test]
fn dist_and_info_subcommands() {
    let tmp = TempDir::new().unwrap();
    let geom = "kind = \"pearls\"\nlength = 300.0\nbase = 0.8\namp = 0.05";
    let cfg = write_config(tmp.path(), "d.toml", &small("distance", geom, "[initial]\nkind = \"front\"\nx_f = 150.0\n"));
    let out = tmp.path().join("dist");
    assert_eq!(run_with(&cfg, "dist", &out), 0);
    let rows = fs::read_to_string(out.join("distances.csv")).unwrap();
    assert!(rows.lines().count() > 2);
    assert_eq!(run(&["info", "--config", cfg.to_str().unwrap()]), 0);
}

#[test]
fn exit_codes_separate_bad_input_from_runtime_failure() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(run(&["frobnicate"]), 1);
    assert_eq!(run(&["--help"]), 0);

    let good = small("simulate2d", CONSTANT, "");
    let cases = [
        ("missing.toml", good.replace("alpha = 0.01\n", "")),
        ("unknown.toml", good.replace("[grid]\n", "[grid]\nwidth = 3\n")),
        ("negdt.toml", good.replace("dt = 0.05", "dt = -0.05")),
        ("oddm.toml", good.replace("m = 4", "m = 3")),
        ("badgeom.toml", good.replace("kind = \"constant\"", "kind = \"spiral\"")),
    ];
    for (name, text) in &cases {
        let cfg = write_config(d, name, text);
        assert_eq!(run_with(&cfg, "simulate", &d.join("x")), 1, "{name}");
    }
    assert_eq!(run(&["simulate", "--config", d.join("absent.toml").to_str().unwrap()]), 1);

    let err = parse_config(&write_config(d, "m2.toml", &cases[0].1)).unwrap_err();
    assert!(matches!(&err, Error::Config { key, .. } if key == "model.alpha"), "{err}");

    // output path occupied by a file
    let cfg = write_config(d, "ok.toml", &good);
    let blocker = d.join("blocker");
    fs::write(&blocker, "").unwrap();
    assert_eq!(run_with(&cfg, "simulate", &blocker), 2);
}

fn member(dir: &Path, name: &str, geometry: GeometrySpec) -> RunConfig {
    let mut cfg = RunConfig::from_toml_str(&small("simulate2d", CONSTANT, ""), dir).unwrap();
    cfg.geometry = geometry;
    cfg.grid.m = 1;
    cfg.time.t_end = 40.0;
    cfg.time.snapshot_times = vec![40.0];
    cfg.output.dir = PathBuf::from(name);
    cfg.validate().unwrap();
    cfg
}

#[test]
fn sweep_runs_members_independently() {
    let tmp = TempDir::new().unwrap();
    assert!(sweep(&[], 2).unwrap().is_empty());

    let a = member(tmp.path(), "a", GeometrySpec::constant(300.0));
    let dup = member(tmp.path(), "./a", GeometrySpec::pearls(0.8, 0.1, 300.0));
    assert!(matches!(sweep(&[a.clone(), dup], 2), Err(Error::Config { .. })));
    assert!(!tmp.path().join("a").exists());

    let configs = vec![
        a,
        member(tmp.path(), "b", GeometrySpec::pearls(0.8, 0.1, 300.0)),
        member(tmp.path(), "c", GeometrySpec::swelling(0.8, 0.3, 0.4, 150.0, 40.0, 300.0)),
    ];
    let results = sweep(&configs, 3).unwrap();
    let mut positions = Vec::new();
    for r in &results {
        let o = r.as_ref().unwrap();
        assert!(o.dir.join("manifest.toml").exists());
        let (t, x) = o.summary.snapshot_positions[0];
        assert_eq!(t, 40.0);
        positions.push(x);
    }
    for i in 0..3 {
        for j in i + 1..3 {
            assert!((positions[i] - positions[j]).abs() > 1e-6, "{positions:?}");
        }
    }
}

#[test]
fn sweep_subcommand_writes_a_table() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write_config(d, "one.toml", &small("simulate2d", CONSTANT, "").replace("m = 4", "m = 1"));
    write_config(d, "two.toml", &small("simulate2d", "kind = \"pearls\"\nlength = 300.0\nbase = 0.8\namp = 0.1", "").replace("m = 4", "m = 1"));
    let cfg = write_config(
        d,
        "sweep.toml",
        &format!("experiment = \"sweep\"\n\n{MODEL}\n[sweep]\nconfigs = [\"one.toml\", \"two.toml\"]\n\n[output]\ndir = \"all\"\n"),
    );
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap(), "--threads", "2"]), 0);
    let table = fs::read_to_string(d.join("all/sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "name,geometry,status,speed,final_front_position,max_dist,error");
    assert!(lines[1].starts_with("one,constant,ok,") && lines[2].starts_with("two,pearls,ok,"), "{table}");
    assert!(d.join("all/one/manifest.toml").exists() && d.join("all/two/manifest.toml").exists());
}
