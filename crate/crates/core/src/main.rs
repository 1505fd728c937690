//! Command-line entry points: single route solve, grid-convergence study,
//! and performance-uncertainty sweep.
//!
//! Exit codes: 0 success, 1 error, 2 no feasible route.

mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use windroute::env::load_environment;
use windroute::gci::{
    analyze_convergence_with_safety, batch_convergence, write_batch_csv, GridTriplet,
};
use windroute::grid::{build_grid, GridSpec};
use windroute::perf::{load_polar, PerformanceModel};
use windroute::router::{route_geojson, shortest_path, write_route_csv};
use windroute::sweep::{run_sweep, write_aggregates_csv, write_records_csv, SweepPlan};
use windroute::time::iso_from_hours;

#[derive(Parser)]
#[command(name = "windroute", version, about)]
struct Cli {
    /// Run configuration JSON.
    #[arg(long, env = "WINDROUTE_CONFIG")]
    config: PathBuf,
    /// Override the grid spacing in nautical miles.
    #[arg(long)]
    dn: Option<f64>,
    /// Override the departure time (ISO-8601).
    #[arg(long)]
    depart: Option<String>,
    #[arg(long)]
    unc_min: Option<f64>,
    #[arg(long)]
    unc_max: Option<f64>,
    #[arg(long)]
    unc_steps: Option<usize>,
    /// Override the sweep start cadence in hours.
    #[arg(long)]
    cadence_hours: Option<f64>,
    /// Override the wave decrement coefficient per metre of wave height.
    #[arg(long)]
    kw: Option<f64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one minimum-time route and write GeoJSON + CSV.
    Route,
    /// Solve the route at three grid spacings and report convergence.
    Gci,
    /// Run the performance-uncertainty sweep and write plot-ready tables.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn apply_overrides(cli: &Cli, cfg: &mut RunConfig) {
    if let Some(dn) = cli.dn {
        cfg.dn = Some(dn);
    }
    if let Some(d) = &cli.depart {
        cfg.depart = Some(d.clone());
    }
    if let Some(v) = cli.unc_min {
        cfg.unc_min = v;
    }
    if let Some(v) = cli.unc_max {
        cfg.unc_max = v;
    }
    if let Some(v) = cli.unc_steps {
        cfg.unc_steps = v;
    }
    if let Some(v) = cli.cadence_hours {
        cfg.cadence_hours = Some(v);
    }
    if let Some(v) = cli.kw {
        cfg.k_w = v;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::load(&cli.config)?;
    apply_overrides(cli, &mut cfg);
    fs::create_dir_all(&cfg.out_dir)?;
    match cli.command {
        Command::Route => cmd_route(&cfg),
        Command::Gci => cmd_gci(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
    }
}

fn model_from(cfg: &RunConfig) -> Result<PerformanceModel, Box<dyn std::error::Error>> {
    let polar = load_polar(&cfg.polar)?;
    let mut m = PerformanceModel::new(polar, cfg.k_w);
    m.heading_step_deg = cfg.heading_step_deg;
    Ok(m)
}

fn cmd_route(cfg: &RunConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = model_from(cfg)?;
    let field = load_environment(&cfg.env_manifest)?;
    let depart = cfg.depart_hours()?;
    let grid = build_grid(GridSpec {
        start: cfg.start_point()?,
        finish: cfg.finish_point()?,
        node_spacing_dn: cfg.single_dn()?,
    })?;
    let route = shortest_path(&grid, &model, &field, depart)?;
    if !route.feasible {
        println!("infeasible: no positive-speed path for departure {}", iso_from_hours(depart));
        return Ok(ExitCode::from(2));
    }
    let geojson = route_geojson(&route);
    write_file(
        &cfg.out_dir.join("route.geojson"),
        &serde_json::to_string_pretty(&geojson)?,
    )?;
    let mut csv = Vec::new();
    write_route_csv(&route, &mut csv)?;
    write_file(&cfg.out_dir.join("route.csv"), &String::from_utf8(csv)?)?;
    println!(
        "Vt = {:.3} h for departure {} ({} vertices)",
        route.voyaging_time,
        iso_from_hours(depart),
        route.path.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_gci(cfg: &RunConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let model = model_from(cfg)?;
    let field = load_environment(&cfg.env_manifest)?;
    let depart = cfg.depart_hours()?;
    let dns = cfg.convergence_dns()?;
    let mut vts = [0.0f64; 3];
    for (i, &dn) in dns.iter().enumerate() {
        let grid = build_grid(GridSpec {
            start: cfg.start_point()?,
            finish: cfg.finish_point()?,
            node_spacing_dn: dn,
        })?;
        let route = shortest_path(&grid, &model, &field, depart)?;
        if !route.feasible {
            println!("infeasible at dn = {dn} nm");
            return Ok(ExitCode::from(2));
        }
        println!("dn = {dn} nm: Vt = {:.4} h", route.voyaging_time);
        vts[i] = route.voyaging_time;
    }
    let triplet = GridTriplet::new(dns, vts)?;
    let report = analyze_convergence_with_safety(&triplet, cfg.gci_safety_factor)?;
    if !report.converged {
        eprintln!("warning: order of convergence at or below 1; extrapolation is unreliable");
    }
    if !report.monotone {
        eprintln!("warning: oscillatory convergence (deltas change sign)");
    }
    let label = cfg.depart.clone().unwrap_or_default();
    let batch = batch_convergence(&[(label, triplet)], cfg.gci_safety_factor);
    let mut csv = Vec::new();
    write_batch_csv(&batch, &mut csv)?;
    write_file(&cfg.out_dir.join("convergence.csv"), &String::from_utf8(csv)?)?;
    write_file(
        &cfg.out_dir.join("convergence.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    match report.order_p {
        Some(p) => println!(
            "order p = {:.4}, extrapolated Vt = {:.4} h, GCI = {:.6}",
            p, report.f_extrapolated, report.gci_fine
        ),
        None => println!("exact convergence: all three grids agree"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let polar = load_polar(&cfg.polar)?;
    let field = load_environment(&cfg.env_manifest)?;
    let dn_list = match (&cfg.dn_list, cfg.dn) {
        (Some(list), _) => list.clone(),
        (None, Some(dn)) => vec![dn],
        (None, None) => return Err("config key dn/dn_list: required for the sweep command".into()),
    };
    let plan = SweepPlan {
        start: cfg.start_point()?,
        finish: cfg.finish_point()?,
        dn_list,
        unc_range: (cfg.unc_min, cfg.unc_max, cfg.unc_steps),
        start_times: cfg.sweep_start_times()?,
        wave_decrement_coeff: cfg.k_w,
        heading_step_deg: cfg.heading_step_deg,
    };
    let report = run_sweep(&plan, &polar, &field, cfg.parallel)?;

    let mut csv = Vec::new();
    write_records_csv(&report.records, &mut csv)?;
    write_file(&cfg.out_dir.join("sweep_records.csv"), &String::from_utf8(csv)?)?;
    let mut csv = Vec::new();
    write_aggregates_csv(&report.aggregates, &mut csv)?;
    write_file(&cfg.out_dir.join("sweep_aggregates.csv"), &String::from_utf8(csv)?)?;
    let summary = serde_json::json!({
        "records": report.records.len(),
        "aggregates": report.aggregates,
        "asymmetry": report.asymmetry,
    });
    write_file(
        &cfg.out_dir.join("sweep_summary.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;

    println!("dn      unc%    n    mean Vt (h)   std Vt (h)   mean Vt/Vt100");
    for a in &report.aggregates {
        println!(
            "{:<7} {:<7} {:<4} {:<13.4} {:<12.4} {:.6}",
            a.dn, a.unc_percent, a.paired_starts, a.mean_vt_hours, a.std_vt_hours,
            a.mean_normalized_vt
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, content: &str) -> Result<(), Box<dyn std::error::Error>> {
    fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(())
}
