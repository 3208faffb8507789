//! Command-line driver: every experiment is a subcommand reading a TOML
//! config and writing CSV, deterministic for a given config and seed.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use hw2f::exposure::{
    cva_flat_hazard, epe_profile, exposure_vs_rho_curve, LevelTarget, NettingSet,
};
use hw2f::monte_carlo::{simulate_swap_pair, McConfig};
use hw2f::sigfig::sig12;
use hw2f::swap_analytics::{
    calibrate_level, calibrate_rho, classify_region, correlation_curve, implied_normal_vol,
    maturity_sweep, swap_correlation, SwapSpec,
};

use config::{CalibrateConfig, VolConfig};

/// Two-factor Gaussian short-rate analytics: swap-rate correlation
/// structure, region classification, and netting-set exposure.
#[derive(Debug, Parser)]
#[command(name = "hw2f", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the model parameters against a co-initial swap pair.
    Region(CommonArgs),
    /// Analytic swap-rate correlation across a factor-correlation grid.
    CorrCurve(CommonArgs),
    /// Monte-Carlo scatter of a co-initial swap-rate pair.
    Scatter(CommonArgs),
    /// Swap-rate correlation as the long swap's maturity grows.
    MaturitySweep(CommonArgs),
    /// Netting-set expected positive exposure across a correlation grid.
    Exposure(CommonArgs),
    /// Solve the terminal correlation or the variance level and echo an
    /// updated config.
    Calibrate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (CSV, or TOML for calibrate).
    #[arg(long)]
    pub out: PathBuf,
    /// Override the experiment's Monte-Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the experiment's Monte-Carlo path count.
    #[arg(long)]
    pub paths: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 for configuration/validation problems, 3 for numerical
    /// degeneracies.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn missing_section(name: &str) -> CliError {
    CliError::config(format!(
        "config has no [{name}] section for this subcommand"
    ))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Region(args) => cmd_region(args),
        Command::CorrCurve(args) => cmd_corr_curve(args),
        Command::Scatter(args) => cmd_scatter(args),
        Command::MaturitySweep(args) => cmd_maturity_sweep(args),
        Command::Exposure(args) => cmd_exposure(args),
        Command::Calibrate(args) => cmd_calibrate(args),
    }
}

fn cmd_region(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = config::load(&args.config)?;
    let section = cfg
        .region
        .as_ref()
        .ok_or_else(|| missing_section("region"))?;
    let params = cfg.model.build(section.long_end)?;
    let report = classify_region(
        &params,
        section.observation,
        section.short_end,
        section.long_end,
    )?;
    let mut csv = String::from("ratio_vol,ratio_short,ratio_long,region,limit_sign\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{}",
        sig12(report.ratio_vol),
        sig12(report.ratio_short),
        sig12(report.ratio_long),
        report.region,
        report.limit_sign
    );
    write_out(&args.out, &csv)?;
    println!("region: {}", report.region);
    println!("ratio_vol = {}", sig12(report.ratio_vol));
    println!("ratio_short = {}", sig12(report.ratio_short));
    println!("ratio_long = {}", sig12(report.ratio_long));
    println!("limit_sign = {}", report.limit_sign);
    Ok(())
}

fn cmd_corr_curve(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = config::load(&args.config)?;
    let section = cfg
        .corr_curve
        .as_ref()
        .ok_or_else(|| missing_section("corr_curve"))?;
    let curve = cfg.curve.build()?;
    let params = cfg.model.build(section.short_end.max(section.long_end))?;
    let short = SwapSpec::co_initial(section.observation, section.short_end, section.delta)?;
    let long = SwapSpec::co_initial(section.observation, section.long_end, section.delta)?;
    let grid = section.rho_grid.points()?;
    let points = correlation_curve(&params, section.observation, &short, &long, &curve, &grid)?;
    let mut csv = String::from("rho_m,rho_swap\n");
    for (rho, corr) in &points {
        let _ = writeln!(csv, "{},{}", sig12(*rho), sig12(*corr));
    }
    write_out(&args.out, &csv)?;
    println!(
        "corr-curve: {} points written to {}",
        points.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_scatter(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = config::load(&args.config)?;
    let section = cfg
        .scatter
        .as_ref()
        .ok_or_else(|| missing_section("scatter"))?;
    let curve = cfg.curve.build()?;
    let params = cfg.model.build(section.short_end.max(section.long_end))?;
    let short = SwapSpec::co_initial(section.observation, section.short_end, section.delta)?;
    let long = SwapSpec::co_initial(section.observation, section.long_end, section.delta)?;
    let mc = McConfig::new(
        args.paths.unwrap_or(section.n_paths),
        args.seed.unwrap_or(section.seed),
        section.observation,
    )?;
    let result = simulate_swap_pair(&curve, &params, &short, &long, &mc)?;
    hw2f::monte_carlo::scatter_csv(&result, &args.out)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", args.out.display())))?;
    println!(
        "scatter: {} paths, empirical rho_swap = {} (std error {})",
        result.pairs.len(),
        sig12(result.correlation),
        sig12(result.std_error)
    );
    Ok(())
}

fn cmd_maturity_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = config::load(&args.config)?;
    let section = cfg
        .maturity_sweep
        .as_ref()
        .ok_or_else(|| missing_section("maturity_sweep"))?;
    let curve = cfg.curve.build()?;
    let grid = section.long_end_grid.points()?;
    let longest = grid.iter().copied().fold(section.short_end, f64::max);
    let params = cfg.model.build(longest)?;
    let sweep = maturity_sweep(
        &params,
        section.observation,
        section.short_end,
        &grid,
        section.delta,
        &curve,
    )?;
    let mut csv = String::from("t_long,rho_swap,region\n");
    for pt in &sweep {
        let _ = writeln!(
            csv,
            "{},{},{}",
            sig12(pt.t_long),
            sig12(pt.rho_swap),
            pt.region
        );
    }
    write_out(&args.out, &csv)?;
    println!(
        "maturity-sweep: {} points written to {}",
        sweep.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_exposure(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = config::load(&args.config)?;
    let section = cfg
        .exposure
        .as_ref()
        .ok_or_else(|| missing_section("exposure"))?;
    let curve = cfg.curve.build()?;
    let swaps: Vec<SwapSpec> = section
        .swaps
        .iter()
        .map(|s| s.build(&curve, section.observation))
        .collect::<Result<_, _>>()?;
    let longest = swaps
        .iter()
        .map(|s| s.end())
        .fold(section.observation, f64::max);
    let params = cfg.model.build(longest)?;
    let set = NettingSet::new(swaps)?;
    let mc = McConfig::new(
        args.paths.unwrap_or(section.n_paths),
        args.seed.unwrap_or(section.seed),
        section.observation,
    )?;
    let grid = section.rho_grid.points()?;

    let instrument = match &section.calibration {
        Some(c) => Some((
            SwapSpec::co_initial(c.expiry, c.expiry + c.tenor, c.delta)?,
            c.target_normal_vol,
        )),
        None => None,
    };
    let mut params_for_sweep = params.clone();
    if let Some((spec, vol)) = &instrument {
        // Calibrate once up front; with recalibrate_each_point the sweep
        // re-solves the level at every grid point as well.
        params_for_sweep =
            calibrate_level(&params_for_sweep, section.observation, spec, &curve, *vol)?.params;
    }
    let target = match (&instrument, section.recalibrate_each_point) {
        (Some((spec, vol)), true) => Some(LevelTarget {
            spec,
            target_normal_vol: *vol,
        }),
        (None, true) => {
            return Err(CliError::config(
                "recalibrate_each_point needs an [exposure.calibration] section",
            ))
        }
        _ => None,
    };
    let points = exposure_vs_rho_curve(
        &curve,
        &params_for_sweep,
        &set,
        section.observation,
        &grid,
        &mc,
        target,
    )?;
    let mut csv = String::from("rho_m,epe,stderr,closed_form\n");
    for pt in &points {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            sig12(pt.rho_m),
            sig12(pt.epe),
            sig12(pt.std_error),
            sig12(pt.closed_form)
        );
    }
    write_out(&args.out, &csv)?;
    println!(
        "exposure: {} grid points written to {}",
        points.len(),
        args.out.display()
    );

    if let Some(cva) = &section.cva {
        let times = cva.observation_grid.points()?;
        let profile = epe_profile(
            &curve,
            &params_for_sweep,
            &set,
            &times,
            cva.n_paths,
            cva.seed,
        )?;
        let value = cva_flat_hazard(&profile, cva.hazard_rate, cva.lgd)?;
        println!("cva_flat_hazard = {}", sig12(value));
    }
    Ok(())
}

fn cmd_calibrate(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, mut raw) = config::load(&args.config)?;
    let section = cfg
        .calibrate
        .as_ref()
        .ok_or_else(|| missing_section("calibrate"))?;
    let curve = cfg.curve.build()?;
    let new_vol: VolConfig = match section {
        CalibrateConfig::Rho {
            observation,
            short_end,
            long_end,
            delta,
            target_correlation,
        } => {
            let params = cfg.model.build(short_end.max(*long_end))?;
            let short = SwapSpec::co_initial(*observation, *short_end, *delta)?;
            let long = SwapSpec::co_initial(*observation, *long_end, *delta)?;
            let cal = calibrate_rho(
                &params,
                *observation,
                &short,
                &long,
                &curve,
                *target_correlation,
            )?;
            let updated = params
                .to_terminal(*observation)?
                .with_rho_m(*observation, cal.rho_m)?;
            let check = swap_correlation(&updated, *observation, &short, &long, &curve)?;
            println!("rho_m = {}", sig12(cal.rho_m));
            println!("roots_found = {}", cal.n_roots);
            println!("rho_swap_check = {}", sig12(check));
            VolConfig::from(updated.vol())
        }
        CalibrateConfig::Level {
            observation,
            swap_end,
            delta,
            target_normal_vol,
        } => {
            let params = cfg.model.build(*swap_end)?;
            let spec = SwapSpec::co_initial(*observation, *swap_end, *delta)?;
            let cal = calibrate_level(&params, *observation, &spec, &curve, *target_normal_vol)?;
            let check = implied_normal_vol(&cal.params, *observation, &spec, &curve)?;
            println!("lambda = {}", sig12(cal.lambda));
            println!("implied_normal_vol_check = {}", sig12(check));
            VolConfig::from(cal.params.vol())
        }
    };

    let vol_value = toml::Value::try_from(&new_vol)
        .map_err(|e| CliError::config(format!("cannot encode calibrated vol: {e}")))?;
    raw.get_mut("model")
        .and_then(|m| m.as_table_mut())
        .ok_or_else(|| CliError::config("config has no [model] table"))?
        .insert("vol".to_string(), vol_value);
    let text = toml::to_string(&raw)
        .map_err(|e| CliError::config(format!("cannot serialize updated config: {e}")))?;
    write_out(&args.out, &text)?;
    println!("updated config written to {}", args.out.display());
    Ok(())
}
