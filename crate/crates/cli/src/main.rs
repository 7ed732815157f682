mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use pdc_lhv::analytic::{
    analytic_report, zpf_element_intensity, zpf_element_quadrature, zpf_statistics, AnalyticOverrides, ZpfMethod,
};
use pdc_lhv::config::{load_config_with_overrides, parse_override, validate_config, ExperimentConfig};
use pdc_lhv::feasibility::{linear_taus, minimal_bounds, sweep_tau, DEFAULT_STRICTNESS};
use pdc_lhv::grid::build_mode_grid;
use pdc_lhv::mc::{compare, histogram_u, run_trials, with_workers, SamplerPath, Scenario, ScenarioKind};
use pdc_lhv::Error;

use output::{csv_float, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Verb {
    Analytic,
    Mc,
    Compare,
    Histogram,
    Feasibility,
    ZpfOracle,
}

impl Verb {
    fn name(self) -> &'static str {
        match self {
            Verb::Analytic => "analytic",
            Verb::Mc => "mc",
            Verb::Compare => "compare",
            Verb::Histogram => "histogram",
            Verb::Feasibility => "feasibility",
            Verb::ZpfOracle => "zpf-oracle",
        }
    }

    fn simulates(self) -> bool {
        matches!(self, Verb::Mc | Verb::Compare | Verb::Histogram)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    /// Human-readable table (feasibility only).
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Zpf,
    Single,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Fast,
    Mode,
}

/// Vacuum-field photodetection simulator: closed forms, Monte Carlo and
/// feasibility bounds.
#[derive(Debug, Parser)]
#[command(name = "pdc-lhv", version)]
struct Cli {
    verb: Verb,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file, written atomically. Default: stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Default: json for analytic and feasibility, csv otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum, default_value = "joint")]
    scenario: ScenarioArg,
    /// Number of windows; overrides n_trials in the config.
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Does not change results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// KEY=VALUE override, repeatable. The analytic verb also accepts m, x,
    /// gamma and rho_c.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Factor applied to every feasibility bound.
    #[arg(long)]
    strictness: Option<f64>,
    /// Histogram bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Amplitude sampler for Monte Carlo verbs.
    #[arg(long, value_enum, default_value = "fast")]
    sampler: SamplerArg,
    /// Coherence-time sweep of the feasibility verb, seconds.
    #[arg(long, default_value_t = 1e-13)]
    tau_min: f64,
    #[arg(long, default_value_t = 4e-12)]
    tau_max: f64,
    #[arg(long, default_value_t = 40)]
    tau_points: usize,
}

const EXIT_USAGE: u8 = 1;
const EXIT_NONCONVERGENCE: u8 = 2;
const EXIT_COMPARE_FAILED: u8 = 3;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun `pdc-lhv --help` for usage.");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Quadrature { .. } => ExitCode::from(EXIT_NONCONVERGENCE),
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

const ANALYTIC_KEYS: [&str; 4] = ["m", "x", "gamma", "rho_c"];

fn check_flags(cli: &Cli) -> Result<(), Failure> {
    let only = |present: bool, flag: &str, verbs: &[Verb]| {
        if present && !verbs.contains(&cli.verb) {
            Err(Failure::Usage(format!("{flag} is not accepted by `{}`", cli.verb.name())))
        } else {
            Ok(())
        }
    };
    only(cli.strictness.is_some(), "--strictness", &[Verb::Feasibility])?;
    only(cli.bins.is_some(), "--bins", &[Verb::Histogram])?;
    only(cli.format == Some(Format::Table), "--format table", &[Verb::Feasibility])?;
    Ok(())
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    check_flags(cli)?;
    let mut overrides = Vec::new();
    let mut analytic = AnalyticOverrides::default();
    for item in &cli.set {
        let (key, value) = parse_override(item)?;
        if cli.verb == Verb::Analytic && ANALYTIC_KEYS.contains(&key.as_str()) {
            let v: f64 = value.trim().parse().map_err(|_| Error::BadOverride(item.clone()))?;
            match key.as_str() {
                "m" => analytic.m = Some(v),
                "x" => analytic.x = Some(v),
                "gamma" => analytic.gamma = Some(v),
                _ => analytic.rho_c = Some(v),
            }
        } else {
            overrides.push((key, value));
        }
    }
    if let Some(t) = cli.trials {
        overrides.push(("n_trials".into(), t.to_string()));
    }
    if let Some(s) = cli.seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    let config = load_config_with_overrides(&cli.config, &overrides)?;
    for w in config.warnings() {
        eprintln!("warning: {w}");
    }
    for d in validate_config(&config) {
        eprintln!("warning: {d}");
    }

    let format = cli.format.unwrap_or(match cli.verb {
        Verb::Analytic | Verb::Feasibility => Format::Json,
        _ => Format::Csv,
    });
    let mut out = Output::new(cli.verb.name(), &config, format == Format::Json);
    let scenario = Scenario::new(match cli.scenario {
        ScenarioArg::Zpf => ScenarioKind::Zpf,
        ScenarioArg::Single => ScenarioKind::Single,
        ScenarioArg::Joint => ScenarioKind::Joint,
    })
    .with_path(match cli.sampler {
        SamplerArg::Fast => SamplerPath::Fast,
        SamplerArg::Mode => SamplerPath::Mode,
    });
    if cli.verb.simulates() {
        out.note("scenario", &format!("{:?}", scenario.kind).to_lowercase());
        out.note("sampler", &format!("{:?}", scenario.path).to_lowercase());
    }

    let mut code = 0;
    match cli.verb {
        Verb::Analytic => verb_analytic(&config, analytic, format, &mut out)?,
        Verb::Mc => {
            let rows = with_workers(cli.workers, || run_trials(&config, scenario, config.n_trials, config.seed))??;
            if format == Format::Json {
                out.set_result(serde_json::to_value(&rows).expect("serializable"));
            } else {
                out.line("quantity,mean,std_error,n,seed");
                for r in &rows {
                    out.line(&format!(
                        "{},{},{},{},{}",
                        r.quantity,
                        csv_float(r.mean),
                        csv_float(r.std_error),
                        r.n,
                        r.seed
                    ));
                }
            }
        }
        Verb::Compare => {
            let cmp = with_workers(cli.workers, || compare(&config, scenario, config.n_trials, config.seed))??;
            if !cmp.all_pass {
                code = EXIT_COMPARE_FAILED;
            }
            if format == Format::Json {
                out.set_result(serde_json::to_value(&cmp).expect("serializable"));
            } else {
                out.note("all_pass", &cmp.all_pass.to_string());
                out.line("quantity,mean,std_error,n,analytic,z,upper_bound,pass");
                for r in &cmp.rows {
                    out.line(&format!(
                        "{},{},{},{},{},{},{},{}",
                        r.quantity,
                        csv_float(r.mc.mean),
                        csv_float(r.mc.std_error),
                        r.mc.n,
                        csv_float(r.analytic),
                        r.z_score.map(csv_float).unwrap_or_default(),
                        r.upper_bound.map(csv_float).unwrap_or_default(),
                        r.pass
                    ));
                }
            }
        }
        Verb::Histogram => {
            let bins = cli.bins.unwrap_or(50);
            let h = with_workers(cli.workers, || histogram_u(&config, scenario, config.n_trials, config.seed, bins))??;
            if format == Format::Json {
                out.set_result(serde_json::to_value(&h).expect("serializable"));
            } else {
                for (k, v) in [
                    ("n", h.n as f64),
                    ("outside", h.outside as f64),
                    ("mean", h.mean),
                    ("se_mean", h.se_mean),
                    ("sd", h.sd),
                    ("skewness", h.skewness),
                    ("expected_mean", h.expected_mean),
                    ("expected_sd", h.expected_sd),
                    ("chi2", h.chi2),
                    ("dof", h.dof as f64),
                ] {
                    out.note(k, &csv_float(v));
                }
                out.line("bin_left,bin_right,density,expected_density");
                for b in &h.bins {
                    out.line(&format!(
                        "{},{},{},{}",
                        csv_float(b.bin_left),
                        csv_float(b.bin_right),
                        csv_float(b.density),
                        csv_float(b.expected_density)
                    ));
                }
            }
        }
        Verb::Feasibility => verb_feasibility(cli, &config, format, &mut out)?,
        Verb::ZpfOracle => verb_zpf_oracle(&config, format, &mut out)?,
    }
    out.finish(cli.output.as_deref())?;
    Ok(code)
}

fn verb_analytic(
    config: &ExperimentConfig,
    overrides: AnalyticOverrides,
    format: Format,
    out: &mut Output,
) -> Result<(), Failure> {
    let grid = build_mode_grid(config)?;
    let report = analytic_report(config, &grid, overrides)?;
    let value = serde_json::to_value(report).expect("serializable");
    if format == Format::Json {
        out.set_result(value);
    } else {
        out.line("quantity,value");
        if let Value::Object(map) = value {
            for (k, v) in map {
                let text = match v {
                    Value::Number(n) => csv_float(n.as_f64().unwrap_or(f64::NAN)),
                    other => other.to_string(),
                };
                out.line(&format!("{k},{text}"));
            }
        }
    }
    Ok(())
}

fn verb_feasibility(cli: &Cli, config: &ExperimentConfig, format: Format, out: &mut Output) -> Result<(), Failure> {
    let k = cli.strictness.unwrap_or(DEFAULT_STRICTNESS);
    let report = minimal_bounds(config, k)?;
    if cli.tau_points == 0 || !(cli.tau_min > 0.0 && cli.tau_max >= cli.tau_min) {
        return Err(Failure::Usage("the tau sweep needs 0 < --tau-min <= --tau-max and --tau-points >= 1".into()));
    }
    let sweep = sweep_tau(config, &linear_taus(cli.tau_min, cli.tau_max, cli.tau_points), k)?;
    match format {
        Format::Json => out.set_result(json!({ "report": report, "sweep": sweep })),
        Format::Csv => {
            out.note("strictness", &csv_float(k));
            out.line("tau,I_s_min,I_in_min,rate_min_lens,rate_min_coherence");
            for r in &sweep {
                out.line(&format!(
                    "{},{},{},{},{}",
                    csv_float(r.tau),
                    csv_float(r.i_s_min),
                    csv_float(r.i_in_min),
                    csv_float(r.rate_min_lens),
                    csv_float(r.rate_min_coherence)
                ));
            }
        }
        Format::Table => {
            let f = &report.constraint_flags;
            let rows: Vec<(&str, String, &str)> = vec![
                ("strictness k", format!("{k}"), ""),
                ("lens gain b²", format!("{:.4e}", report.lens.b_squared), ""),
                ("aperture ratio", format!("{:.4}", report.lens.aperture_ratio), ""),
                ("R first ring (84%)", format!("{:.4e}", report.lens.r_first), "m"),
                ("R second ring (91%)", format!("{:.4e}", report.lens.r_second), "m"),
                ("I_s min (k×)", format!("{:.4e}", report.i_s_min), "W/m²"),
                ("I_in min (k×)", format!("{:.4e}", report.i_in_min), "W/m²"),
                ("rate min, lens form (k×)", format!("{:.4e}", report.rate_min_lens), "1/s"),
                ("rate min, coherence form (k×)", format!("{:.4e}", report.rate_min_coherence), "1/s"),
                ("configured I_s", format!("{:.4e}", report.i_s), "W/m²"),
                ("configured signal rate", format!("{:.4e}", report.signal_rate), "1/s"),
                ("margin I_s", format!("{:.4e}", report.margin_intensity), ""),
                ("margin rate (lens)", format!("{:.4e}", report.margin_rate_lens), ""),
                ("margin rate (coherence)", format!("{:.4e}", report.margin_rate_coherence), ""),
                ("signal above noise", f.signal_above_noise.to_string(), ""),
                ("spatial coherence", f.spatial_coherence.to_string(), ""),
                ("small radius", f.small_radius.to_string(), ""),
            ];
            for (name, value, unit) in rows {
                out.line(&format!("{name:<32}{value:>14} {unit}").trim_end().to_string());
            }
            let lo = sweep.iter().map(|r| r.rate_min_lens).fold(f64::INFINITY, f64::min);
            let hi = sweep.iter().map(|r| r.rate_min_lens).fold(0.0, f64::max);
            out.line(&format!(
                "{:<32}{:>14} 1/s",
                "rate min (lens) over tau sweep",
                format!("{lo:.2e}–{hi:.2e}")
            ));
        }
    }
    Ok(())
}

/// Number of elements sampled by the oracle, spread over the band.
const ORACLE_ELEMENTS: usize = 11;

fn verb_zpf_oracle(config: &ExperimentConfig, format: Format, out: &mut Output) -> Result<(), Failure> {
    let grid = build_mode_grid(config)?;
    let n = grid.n_elements();
    let picks: Vec<usize> = if n <= ORACLE_ELEMENTS {
        (0..n).collect()
    } else {
        (0..ORACLE_ELEMENTS).map(|i| i * (n - 1) / (ORACLE_ELEMENTS - 1)).collect()
    };
    let mut rows = Vec::new();
    for j in picks {
        let omega = grid.frequencies[j];
        let closed = zpf_element_intensity(config, omega, ZpfMethod::Closed)?;
        let q = zpf_element_quadrature(config, omega)?;
        rows.push(json!({
            "element": j,
            "omega": omega,
            "closed": closed,
            "quadrature": q.value,
            "abs_error": q.abs_error,
            "relative_gap": (q.value / closed - 1.0).abs(),
        }));
    }
    let stats = zpf_statistics(config, &grid);
    if format == Format::Json {
        out.set_result(json!({ "statistics": stats, "elements": rows }));
    } else {
        out.note("I0_bar", &csv_float(stats.i0_bar));
        out.note("sigma0", &csv_float(stats.sigma0));
        out.note("grid_sum", &csv_float(stats.grid_sum));
        out.note("relative_gap", &csv_float(stats.relative_gap));
        out.line("element,omega,closed,quadrature,abs_error,relative_gap");
        for r in &rows {
            out.line(&format!(
                "{},{},{},{},{},{}",
                r["element"],
                csv_float(r["omega"].as_f64().unwrap_or(f64::NAN)),
                csv_float(r["closed"].as_f64().unwrap_or(f64::NAN)),
                csv_float(r["quadrature"].as_f64().unwrap_or(f64::NAN)),
                csv_float(r["abs_error"].as_f64().unwrap_or(f64::NAN)),
                csv_float(r["relative_gap"].as_f64().unwrap_or(f64::NAN))
            ));
        }
    }
    Ok(())
}
