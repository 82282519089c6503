#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use selfnorm_core::applications::{self_normalized_sum, student_t, t_from_self_normalized, t_identity_check};
use selfnorm_core::empirics::normal::std_normal_quantile;
use selfnorm_core::empirics::std_normal_cdf;
use selfnorm_core::{fit_rate, ratio_series, BaseDistribution, Substream};
use selfnorm_lab::config::{parse_seed, DEFAULT_SEED};
use selfnorm_lab::report::{self, sharpness_prediction};
use selfnorm_lab::{
    parse_config, run_experiment, selftest, ExperimentConfig, ExperimentReport, LabError, ModelChoice, Result, Runner,
};

#[derive(Parser)]
#[command(
    name = "selfnorm",
    version,
    about = "Monte Carlo checks of Berry–Esseen bounds for self-normalized martingales"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key=value config file.
    Run {
        config: PathBuf,
        /// Overrides the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sharpness construction over an α-grid at fixed n.
    Sharpness {
        #[arg(long, value_delimiter = ',', default_value = "0.04,0.01,0.0025")]
        alpha_grid: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        m: usize,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Pathwise check of the Student-t / self-normalized sum identity.
    TstatCheck {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
        x_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "5,30")]
        n_grid: Vec<usize>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// AR(1) least-squares estimator, self-normalized.
    Ar1 {
        #[arg(long)]
        theta: f64,
        #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value = "normal")]
        base: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        m: usize,
        #[arg(long)]
        plug_in_m: Option<usize>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Log-log fits of a report's Δ̂ and bound against n.
    RateFit { report: PathBuf },
    /// Run the built-in invariant checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(&e)
        }
    }
}

fn seed_or_default(s: Option<String>) -> Result<u64> {
    s.map_or(Ok(DEFAULT_SEED), |s| parse_seed(&s))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, output } => {
            let text = std::fs::read_to_string(&config).map_err(|e| LabError::io(&config, e))?;
            let mut cfg = parse_config(&text)?;
            if output.is_some() {
                cfg.output = output;
            }
            execute(&cfg)?;
        }
        Command::Sharpness {
            alpha_grid,
            n,
            p,
            m,
            seed,
            output,
        } => {
            let mut cfg = ExperimentConfig::new(ModelChoice::Sharpness, vec![n], p, m);
            cfg.experiment_id = "sharpness".into();
            cfg.alpha = alpha_grid;
            cfg.seed = seed_or_default(seed)?;
            cfg.output = output;
            let rep = execute(&cfg)?;
            eprintln!("alpha\tP(W<=0)\texact\t0.5+sqrt(alpha)/(4 sqrt(2 pi))");
            for c in &rep.cells {
                let a = c.cell.alpha.unwrap_or(f64::NAN);
                let exact = 0.5 + 0.5 * (std_normal_cdf(a.sqrt()) - std_normal_cdf(0.5 * a.sqrt()));
                eprintln!(
                    "{a}\t{:.6}\t{exact:.6}\t{:.6}",
                    c.p_nonpositive,
                    0.5 + sharpness_prediction(a)
                );
            }
        }
        Command::TstatCheck {
            samples,
            x_grid,
            n_grid,
            seed,
        } => tstat_check(samples, &x_grid, &n_grid, seed_or_default(seed)?)?,
        Command::Ar1 {
            theta,
            n_grid,
            sigma,
            base,
            p,
            m,
            plug_in_m,
            seed,
            output,
        } => {
            let base = match base.as_str() {
                "normal" => BaseDistribution::StandardNormal,
                "rademacher" => BaseDistribution::Rademacher,
                other => {
                    return Err(LabError::config(
                        "base",
                        format!("expected normal or rademacher, got `{other}`"),
                    ))
                }
            };
            let mut cfg = ExperimentConfig::new(ModelChoice::Ar1 { base, theta, sigma }, n_grid, p, m);
            cfg.experiment_id = "ar1".into();
            cfg.plug_in_m = plug_in_m.unwrap_or(m);
            cfg.seed = seed_or_default(seed)?;
            cfg.output = output;
            execute(&cfg)?;
        }
        Command::RateFit { report } => rate_fit(&report)?,
        Command::Selftest => {
            let runner = Runner::from_env()?;
            let checks = selftest::run(&runner);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(LabError::Check(format!("{failed} selftest check(s) failed")));
            }
        }
    }
    Ok(())
}

/// Runs a validated config, writes the CSV and companions, and prints a
/// ratio summary to stderr.
fn execute(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let runner = Runner::from_env()?;
    let rep = run_experiment(cfg, &runner)?;
    match &cfg.output {
        Some(path) => {
            report::write_csv_file(&rep, path)?;
            report::emit_plot_data(&rep, path)?;
            report::write_metadata(&rep, path)?;
        }
        None => {
            let bytes = report::csv_bytes(&rep)?;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| LabError::io("<stdout>", e))?;
        }
    }
    eprintln!(
        "{}: {} cells, {} workers, {:.2}s",
        cfg.experiment_id,
        rep.cells.len(),
        rep.workers,
        rep.elapsed.as_secs_f64()
    );
    let evals: Vec<_> = rep.cells.iter().map(|c| c.eval).collect();
    if let Ok(r) = ratio_series(&evals) {
        eprintln!(
            "ratio max {:.4} min {:.4} spread {:.3} (band-widened {:.3})",
            r.max_ratio, r.min_ratio, r.spread, r.widened_spread
        );
    }
    Ok(rep)
}

fn tstat_check(samples: usize, x_grid: &[f64], n_grid: &[usize], seed: u64) -> Result<()> {
    if let Some(&x) = x_grid.iter().find(|x| !(**x >= 0.0)) {
        return Err(LabError::config(
            "x-grid",
            format!("the identity is checked for x >= 0 only, got {x}"),
        ));
    }
    if n_grid.iter().any(|&n| n < 2) {
        return Err(LabError::config("n-grid", "needs n >= 2"));
    }
    let mut failures = 0usize;
    for &n in n_grid {
        let mut obs = vec![0.0; n];
        let mut degenerate = 0usize;
        let mut mismatches = vec![0usize; x_grid.len()];
        let mut worst = 0.0f64;
        for r in 0..samples as u64 {
            Substream::new(seed ^ n as u64, r).fill(0, &mut obs);
            obs.iter_mut().for_each(|u| *u = std_normal_quantile(*u));
            let Ok(t) = student_t(&obs) else {
                degenerate += 1;
                continue;
            };
            let w = self_normalized_sum(&obs)?;
            worst = worst.max((t - t_from_self_normalized(w, n)).abs() / t.abs().max(1.0));
            for (k, &x) in x_grid.iter().enumerate() {
                if !t_identity_check(&obs, x)? {
                    mismatches[k] += 1;
                }
            }
        }
        for (k, &x) in x_grid.iter().enumerate() {
            println!(
                "n={n} x={x}: {} of {} agree",
                samples - degenerate - mismatches[k],
                samples - degenerate
            );
        }
        println!("n={n}: max relative T-W identity error {worst:e}, degenerate {degenerate}");
        failures += mismatches.iter().sum::<usize>() + usize::from(worst > 1e-12);
    }
    if failures > 0 {
        return Err(LabError::Check(format!("{failures} identity violation(s)")));
    }
    Ok(())
}

fn rate_fit(path: &Path) -> Result<()> {
    let rows = report::read_report(path)?;
    let mut groups: BTreeMap<(String, String, String, String), Vec<&report::ReportRow>> = BTreeMap::new();
    for r in &rows {
        let family = r.model.split('(').next().unwrap_or(&r.model).to_string();
        groups
            .entry((
                r.experiment_id.clone(),
                family,
                r.statistic.clone(),
                format!("{:?}", r.p),
            ))
            .or_default()
            .push(r);
    }
    println!(
        "experiment_id\tmodel\tstatistic\tp\tpoints\tslope_delta\tresidual_max\tslope_bound\tpredicted_bound_slope"
    );
    for ((id, model, stat, p), g) in groups {
        let ns: Vec<f64> = g.iter().map(|r| r.n as f64).collect();
        let deltas: Vec<f64> = g.iter().map(|r| r.delta_hat).collect();
        let cores: Vec<f64> = g.iter().map(|r| r.bound_core).collect();
        let pf: f64 = p.parse().unwrap_or(f64::NAN);
        match (fit_rate(&ns, &deltas), fit_rate(&ns, &cores)) {
            (Ok(d), Ok(b)) => println!(
                "{id}\t{model}\t{stat}\t{p}\t{}\t{:.5}\t{:.5}\t{:.5}\t{:.5}",
                g.len(),
                d.slope,
                d.residual_max,
                b.slope,
                (1.0 - pf) / (2.0 * pf + 1.0)
            ),
            (Err(e), _) | (_, Err(e)) => println!("{id}\t{model}\t{stat}\t{p}\t{}\tskipped: {e}", g.len()),
        }
    }
    Ok(())
}
