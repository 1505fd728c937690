//! End-to-end acceptance suite. Each test prints one PASS/FAIL line for its
//! criterion (run with --nocapture to see them on success).

mod common;

use common::{
    finish_east, flat_polar, pt, uniform_north_wind, varying_north_wind, wind_proportional_polar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::Instant;
use windroute::env::{load_environment, save_environment, EnvironmentField};
use windroute::gci::{analyze_convergence, batch_convergence, BatchEntry, GridTriplet};
use windroute::geo::EARTH_RADIUS_NM;
use windroute::grid::{build_grid, GridSpec};
use windroute::perf::{load_polar, save_polar, PerformanceModel, PolarTable};
use windroute::router::{shortest_path, solve_layered};
use windroute::sweep::{run_sweep, SweepPlan};

fn check(name: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("criterion {name}: PASS"),
        Err(e) => {
            println!("criterion {name}: FAIL");
            resume_unwind(e);
        }
    }
}

/// Minimum finish arrival over every path, by direct enumeration.
fn exhaustive_arrival(sizes: &[usize], depart: f64, cost: &dyn Fn(usize, usize, usize, f64) -> f64) -> f64 {
    fn rec(
        sizes: &[usize],
        k: usize,
        i: usize,
        t: f64,
        cost: &dyn Fn(usize, usize, usize, f64) -> f64,
    ) -> f64 {
        if k == sizes.len() - 1 {
            return t;
        }
        let mut best = f64::INFINITY;
        for j in 0..sizes[k + 1] {
            let arrival = t + cost(k, i, j, t);
            best = best.min(rec(sizes, k + 1, j, arrival, cost));
        }
        best
    }
    rec(sizes, 0, 0, depart, cost)
}

#[test]
fn criterion_1_dp_matches_exhaustive_oracle() {
    check("1 dp-vs-oracle equivalence", || {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for case in 0..60 {
            let interior = rng.gen_range(1..=5usize);
            let mut sizes = vec![1usize];
            for _ in 0..interior {
                sizes.push(rng.gen_range(1..=5usize));
            }
            sizes.push(1);

            // time-dependent positive costs with the FIFO property:
            // c = base * (1 + 0.3 sin(0.8 t + phase)) keeps t + c increasing
            // in t because base * 0.3 * 0.8 < 1 for base <= 3
            let mut base = Vec::new();
            let mut phase = Vec::new();
            for k in 0..sizes.len() - 1 {
                let b: Vec<Vec<f64>> = (0..sizes[k])
                    .map(|_| (0..sizes[k + 1]).map(|_| rng.gen_range(0.5..3.0)).collect())
                    .collect();
                let p: Vec<Vec<f64>> = (0..sizes[k])
                    .map(|_| {
                        (0..sizes[k + 1])
                            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                            .collect()
                    })
                    .collect();
                base.push(b);
                phase.push(p);
            }
            let cost = |k: usize, i: usize, j: usize, t: f64| {
                base[k][i][j] * (1.0 + 0.3 * (0.8 * t + phase[k][i][j]).sin())
            };

            let depart = rng.gen_range(0.0..20.0);
            let sol = solve_layered(&sizes, depart, |k, i, j, t| Ok(cost(k, i, j, t))).unwrap();
            let oracle = exhaustive_arrival(&sizes, depart, &cost);
            assert!(
                (sol.finish_arrival() - oracle).abs() <= 1e-12 * oracle.max(1.0),
                "case {case}: dp {} vs oracle {oracle}",
                sol.finish_arrival()
            );

            // the reported path reproduces its own arrival when replayed
            let positions = sol.path_positions();
            let mut t = depart;
            for k in 0..sizes.len() - 1 {
                t += cost(k, positions[k], positions[k + 1], t);
            }
            assert!((t - sol.finish_arrival()).abs() <= 1e-12 * t.max(1.0));
        }
        assert!(t0.elapsed().as_secs_f64() < 10.0);
    });
}

#[test]
fn criterion_2_uniform_field_analytic_route() {
    check("2 analytic uniform-field route", || {
        let t0 = Instant::now();
        let grid = build_grid(GridSpec {
            start: pt(0.0, 0.0),
            finish: finish_east(100.0),
            node_spacing_dn: 5.0,
        })
        .unwrap();
        let model = PerformanceModel::new(flat_polar(5.0), 0.0);
        let field = uniform_north_wind(10.0, 48.0);
        let route = shortest_path(&grid, &model, &field, 0.0).unwrap();
        assert!(route.feasible);
        assert!(
            (route.voyaging_time - 20.0).abs() / 20.0 < 0.02,
            "Vt = {}",
            route.voyaging_time
        );
        // on an equatorial route the cross-track distance is just |lat|
        for v in &route.path {
            let cross_nm = EARTH_RADIUS_NM * v.point.lat().to_radians().abs();
            assert!(cross_nm <= 1.5 * 5.0 + 1e-9, "cross-track {cross_nm} nm");
        }
        assert!(t0.elapsed().as_secs_f64() < 10.0);
    });
}

#[test]
fn criterion_3_static_scaling_law() {
    check("3 static-scaling law", || {
        let grid = build_grid(GridSpec {
            start: pt(0.0, 0.0),
            finish: finish_east(100.0),
            node_spacing_dn: 5.0,
        })
        .unwrap();
        let base = PerformanceModel::new(flat_polar(5.0), 0.0);
        let field = uniform_north_wind(10.0, 48.0);
        let reference = shortest_path(&grid, &base, &field, 0.0).unwrap();
        assert!(reference.feasible);
        for unc in [50.0, 75.0, 100.0, 125.0, 150.0] {
            let model = base.scale_performance(unc).unwrap();
            let route = shortest_path(&grid, &model, &field, 0.0).unwrap();
            assert!(route.feasible, "unc {unc}%");
            let rescaled = route.voyaging_time * unc / 100.0;
            assert!(
                (rescaled - reference.voyaging_time).abs() / reference.voyaging_time < 1e-9,
                "unc {unc}%: {rescaled} vs {}",
                reference.voyaging_time
            );
            let nodes: Vec<_> = route.path.iter().map(|v| v.node).collect();
            let ref_nodes: Vec<_> = reference.path.iter().map(|v| v.node).collect();
            assert_eq!(nodes, ref_nodes, "unc {unc}%: path differs");
        }
    });
}

#[test]
fn criterion_4_gci_recovery() {
    check("4 GCI recovery", || {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        // representative spacing patterns plus randomized ones
        let mut cases: Vec<[f64; 3]> = vec![[5.0, 10.0, 15.0], [10.0, 15.0, 20.0], [15.0, 20.0, 40.0]];
        while cases.len() < 100 {
            let h1 = rng.gen_range(1.0..10.0);
            let r21 = rng.gen_range(1.2..3.0);
            // every third case uses a constant refinement ratio
            let r32 = if cases.len().is_multiple_of(3) { r21 } else { rng.gen_range(1.2..3.0) };
            cases.push([h1, h1 * r21, h1 * r21 * r32]);
        }
        for h in cases {
            let p = rng.gen_range(1.05..4.0);
            let f_ext = rng.gen_range(50.0..500.0);
            let c = rng.gen_range(0.1..5.0);
            let f = h.map(|hi| f_ext + c * hi.powf(p));
            let t = GridTriplet::new(h, f).unwrap();
            let report = analyze_convergence(&t).unwrap();
            let got_p = report.order_p.unwrap();
            assert!((got_p - p).abs() / p < 1e-6, "h {h:?}: p {got_p} vs {p}");
            assert!(
                (report.f_extrapolated - f_ext).abs() / f_ext < 1e-6,
                "h {h:?}: f_ext {} vs {f_ext}",
                report.f_extrapolated
            );
            let r21 = h[1] / h[0];
            let r32 = h[2] / h[1];
            if (r21 - r32).abs() < 1e-12 {
                let closed = ((f[2] - f[1]) / (f[1] - f[0])).abs().ln() / r21.ln();
                assert!((got_p - closed).abs() < 1e-10, "constant ratio closed form");
            }
        }
        assert!(t0.elapsed().as_secs_f64() < 5.0);
    });
}

#[test]
fn criterion_5_batch_convergence_bookkeeping() {
    check("5 batch-convergence bookkeeping", || {
        let mut entries: Vec<BatchEntry> = (0..38)
            .map(|i| {
                let p = 1.5 + 0.05 * i as f64;
                let f_ext = 200.0 + 3.0 * i as f64;
                let h = [1.0f64, 2.0, 4.0];
                let f = h.map(|hi| f_ext + 2.0 * hi.powf(p));
                (format!("s{i:02}"), GridTriplet::new(h, f).unwrap())
            })
            .collect();
        entries.push((
            "osc0".into(),
            GridTriplet::new([1.0, 2.0, 4.0], [100.0, 104.0, 102.0]).unwrap(),
        ));
        entries.push((
            "osc1".into(),
            GridTriplet::new([1.0, 2.0, 4.0], [250.0, 247.0, 248.5]).unwrap(),
        ));
        let report = batch_convergence(&entries, 1.25);
        assert_eq!(report.summary.total_entries, 40);
        assert_eq!(report.summary.converged_entries, 38);
        assert!((report.summary.converged_fraction - 0.95).abs() < 1e-12);

        // flagged entries stay out of the means
        let mut sum_gci = 0.0;
        let mut sum_vt = 0.0;
        for (label, triplet) in &entries[..38] {
            let r = analyze_convergence(triplet).unwrap();
            assert!(r.converged && r.monotone, "{label}");
            sum_gci += r.gci_fine;
            sum_vt += triplet.fine_solution();
        }
        assert!((report.summary.mean_gci - sum_gci / 38.0).abs() < 1e-15);
        assert!((report.summary.mean_vt_hours - sum_vt / 38.0).abs() < 1e-9);
        assert_eq!(
            report.summary.mean_abs_error_hours,
            report.summary.mean_gci * report.summary.mean_vt_hours
        );
    });
}

#[test]
fn criterion_6_sweep_determinism_and_asymmetry() {
    check("6 sweep determinism and asymmetry", || {
        let t0 = Instant::now();
        let plan = SweepPlan {
            start: pt(0.0, 0.0),
            finish: finish_east(100.0),
            dn_list: vec![10.0],
            unc_range: (50.0, 150.0, 5),
            start_times: (0..10).map(|i| 6.0 * i as f64).collect(),
            wave_decrement_coeff: 0.0,
            heading_step_deg: 1.0,
        };
        let polar = wind_proportional_polar();
        let field = varying_north_wind(400.0);
        let serial = run_sweep(&plan, &polar, &field, false).unwrap();
        let parallel = run_sweep(&plan, &polar, &field, true).unwrap();
        assert_eq!(serial.records, parallel.records);
        assert_eq!(serial.records.len(), 50);

        let at_100 = serial
            .aggregates
            .iter()
            .find(|a| a.unc_percent == 100.0)
            .unwrap();
        assert_eq!(at_100.mean_normalized_vt, 1.0);
        assert_eq!(at_100.std_normalized_vt, 0.0);
        assert_eq!(at_100.paired_starts, 10);

        assert!(!serial.asymmetry.is_empty());
        for stat in &serial.asymmetry {
            assert!(
                stat.value_hours > 0.0,
                "delta {}%: {}",
                stat.delta_percent,
                stat.value_hours
            );
        }
        assert!(t0.elapsed().as_secs_f64() < 60.0);
    });
}

#[test]
fn criterion_7_infeasibility_handling() {
    check("7 infeasibility handling", || {
        // a polar with no positive speed anywhere
        let grid = build_grid(GridSpec {
            start: pt(0.0, 0.0),
            finish: finish_east(100.0),
            node_spacing_dn: 10.0,
        })
        .unwrap();
        let model = PerformanceModel::new(flat_polar(0.0), 0.0);
        let field = uniform_north_wind(10.0, 48.0);
        let route = shortest_path(&grid, &model, &field, 0.0).unwrap();
        assert!(!route.feasible);
        assert!(route.path.is_empty());

        // same situation through the CLI exits with code 2
        let dir = tempfile::tempdir().unwrap();
        save_polar(&flat_polar(0.0), &dir.path().join("polar.csv")).unwrap();
        let env_dir = dir.path().join("env");
        let manifest = save_environment(&field, &env_dir).unwrap();
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
        let cfg_path = dir.path().join("run.json");
        std::fs::write(&cfg_path, config.to_string()).unwrap();
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_windroute"))
            .args(["--config", cfg_path.to_str().unwrap(), "route"])
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(2));

        // a sweep with one becalmed start excludes it without aborting:
        // calm for the first 12 hours, steady north wind afterwards
        let nt = 40;
        let speeds: Vec<f64> = (0..nt).map(|i| if 3 * i < 12 { 0.0 } else { 10.0 }).collect();
        let calm_then_wind = EnvironmentField::from_parts(
            vec![-3.0, 3.0],
            vec![-1.0, 5.0],
            (0..nt).map(|i| 3.0 * i as f64).collect(),
            vec![vec![0.0; 4]; nt],
            speeds.iter().map(|s| vec![-s; 4]).collect(),
            vec![vec![0.0; 4]; nt],
            None,
            None,
        )
        .unwrap();
        let plan = SweepPlan {
            start: pt(0.0, 0.0),
            finish: finish_east(100.0),
            dn_list: vec![10.0],
            unc_range: (100.0, 100.0, 1),
            start_times: vec![0.0, 24.0],
            wave_decrement_coeff: 0.0,
            heading_step_deg: 1.0,
        };
        let report = run_sweep(&plan, &wind_proportional_polar(), &calm_then_wind, false).unwrap();
        let becalmed = report
            .records
            .iter()
            .find(|r| r.start_t == 0.0)
            .unwrap();
        assert!(!becalmed.feasible);
        let agg = &report.aggregates[0];
        assert_eq!(agg.paired_starts, 1);
        assert_eq!(agg.infeasible_starts, 1);
        assert!(agg.mean_vt_hours.is_finite());
    });
}

#[test]
fn criterion_8_format_round_trips() {
    check("8 format round-trips", || {
        let dir = tempfile::tempdir().unwrap();

        // awkward fractions exercise the shortest round-trip formatting
        let grid_vals = |seed: f64| -> Vec<Vec<f64>> {
            (0..3)
                .map(|t| {
                    (0..6)
                        .map(|c| seed + t as f64 / 3.0 + c as f64 * 0.1 + 1.0 / 7.0)
                        .collect()
                })
                .collect()
        };
        let field = EnvironmentField::from_parts(
            vec![0.0, 0.5 + 1.0 / 3.0, 2.0],
            vec![-1.0 / 3.0, 1.0],
            vec![0.25, 3.25, 6.25],
            grid_vals(1.0),
            grid_vals(-7.0),
            grid_vals(0.0),
            Some(grid_vals(0.123)),
            Some(grid_vals(-0.321)),
        )
        .unwrap();
        let manifest = save_environment(&field, &dir.path().join("env")).unwrap();
        let reloaded = load_environment(&manifest).unwrap();
        assert!(reloaded == field);

        let polar = PolarTable::new(
            vec![0.0, 10.0 / 3.0, 20.0],
            vec![0.0, 52.5, 112.5 + 1.0 / 7.0, 180.0],
            vec![
                vec![0.0, 0.1 + 0.2, 0.3],
                vec![1.0 / 3.0, 4.4, 5.5],
                vec![2.0 / 7.0, 6.6, 7.7],
                vec![1.1, 2.2, 3.3],
            ],
        )
        .unwrap();
        let path = dir.path().join("polar.csv");
        save_polar(&polar, &path).unwrap();
        assert_eq!(load_polar(&path).unwrap(), polar);
    });
}
