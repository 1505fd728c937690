//! Black-box tests of the windroute binary: exit codes, output files and
//! config overrides.

mod common;

use common::{finish_east, flat_polar, uniform_north_wind, varying_north_wind, wind_proportional_polar};
use std::path::PathBuf;
use std::process::Output;
use windroute::env::save_environment;
use windroute::perf::{save_polar, PolarTable};

struct Fixture {
    dir: tempfile::TempDir,
    config: PathBuf,
}

impl Fixture {
    /// Polar + environment + config for an equatorial 100 nm route.
    fn new(polar: &PolarTable, field: &windroute::env::EnvironmentField) -> Self {
        let dir = tempfile::tempdir().unwrap();
        save_polar(polar, &dir.path().join("polar.csv")).unwrap();
        let manifest = save_environment(field, &dir.path().join("env")).unwrap();
        let finish = finish_east(100.0);
        let config = serde_json::json!({
            "polar": dir.path().join("polar.csv"),
            "env_manifest": manifest,
            "out_dir": dir.path().join("out"),
            "start": [0.0, 0.0],
            "finish": [finish.lat(), finish.lon()],
            "dn": 10.0,
            "depart": "1970-01-01T00:00:00Z"
        });
        let path = dir.path().join("run.json");
        std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
        Self { dir, config: path }
    }

    fn patch(&self, edit: impl FnOnce(&mut serde_json::Value)) {
        let mut cfg: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&self.config).unwrap()).unwrap();
        edit(&mut cfg);
        std::fs::write(&self.config, cfg.to_string()).unwrap();
    }

    fn run(&self, args: &[&str]) -> Output {
        std::process::Command::new(env!("CARGO_BIN_EXE_windroute"))
            .arg("--config")
            .arg(&self.config)
            .args(args)
            .output()
            .unwrap()
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join("out").join(name)
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn route_writes_outputs_and_exits_zero() {
    let fx = Fixture::new(&flat_polar(5.0), &uniform_north_wind(10.0, 48.0));
    let out = fx.run(&["route"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("Vt = "));
    assert!(fx.out("route.geojson").exists());
    assert!(fx.out("route.csv").exists());
    let geojson: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fx.out("route.geojson")).unwrap()).unwrap();
    assert_eq!(geojson["geometry"]["type"], "LineString");
    assert_eq!(geojson["properties"]["feasible"], true);
}

#[test]
fn route_infeasible_exits_two() {
    let fx = Fixture::new(&flat_polar(0.0), &uniform_north_wind(10.0, 48.0));
    let out = fx.run(&["route"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("infeasible"));
    assert!(!fx.out("route.geojson").exists());
}

#[test]
fn missing_polar_exits_one() {
    let fx = Fixture::new(&flat_polar(5.0), &uniform_north_wind(10.0, 48.0));
    std::fs::remove_file(fx.dir.path().join("polar.csv")).unwrap();
    let out = fx.run(&["route"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn dn_flag_overrides_config() {
    let fx = Fixture::new(&flat_polar(5.0), &uniform_north_wind(10.0, 48.0));
    fx.patch(|cfg| {
        cfg.as_object_mut().unwrap().remove("dn");
    });
    // no spacing configured at all: error
    assert_eq!(fx.run(&["route"]).status.code(), Some(1));
    let out = fx.run(&["--dn", "20", "route"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // 100 nm at dn 20 gives 4 interior ranks, 6 route vertices
    assert!(stdout(&out).contains("6 vertices"), "{}", stdout(&out));
}

#[test]
fn gci_reports_convergence_study() {
    let fx = Fixture::new(&wind_proportional_polar(), &varying_north_wind(120.0));
    fx.patch(|cfg| {
        cfg["dn_list"] = serde_json::json!([5.0, 10.0, 20.0]);
    });
    let out = fx.run(&["gci"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("dn = 5 nm"), "{text}");
    assert!(fx.out("convergence.csv").exists());
    assert!(fx.out("convergence.json").exists());
}

#[test]
fn gci_requires_three_spacings() {
    let fx = Fixture::new(&flat_polar(5.0), &uniform_north_wind(10.0, 48.0));
    fx.patch(|cfg| {
        cfg["dn_list"] = serde_json::json!([5.0, 10.0]);
    });
    let out = fx.run(&["gci"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dn_list"));
}

#[test]
fn sweep_writes_tables() {
    let fx = Fixture::new(&wind_proportional_polar(), &varying_north_wind(300.0));
    fx.patch(|cfg| {
        cfg["start_times"] =
            serde_json::json!(["1970-01-01T00:00:00Z", "1970-01-01T06:00:00Z"]);
        cfg["unc_steps"] = serde_json::json!(3);
    });
    let out = fx.run(&["sweep"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["sweep_records.csv", "sweep_aggregates.csv", "sweep_summary.json"] {
        assert!(fx.out(f).exists(), "{f}");
    }
    // 2 starts x (50, 100, 150)%
    let records = std::fs::read_to_string(fx.out("sweep_records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 6);
}

#[test]
fn sweep_cadence_window_generates_starts() {
    let fx = Fixture::new(&wind_proportional_polar(), &varying_north_wind(300.0));
    fx.patch(|cfg| {
        cfg["start_window"] =
            serde_json::json!(["1970-01-01T00:00:00Z", "1970-01-01T12:00:00Z"]);
        cfg["unc_min"] = serde_json::json!(100.0);
        cfg["unc_max"] = serde_json::json!(100.0);
        cfg["unc_steps"] = serde_json::json!(1);
    });
    let out = fx.run(&["--cadence-hours", "6", "sweep"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(fx.out("sweep_records.csv")).unwrap();
    // starts at 0, 6 and 12 hours
    assert_eq!(records.lines().count(), 1 + 3);
}

#[test]
fn unknown_config_key_rejected() {
    let fx = Fixture::new(&flat_polar(5.0), &uniform_north_wind(10.0, 48.0));
    fx.patch(|cfg| {
        cfg["node_spacing"] = serde_json::json!(5.0);
    });
    let out = fx.run(&["route"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("node_spacing"));
}
