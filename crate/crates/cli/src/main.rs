use clap::Parser;
use orthosphere_cli::config::{ExperimentConfig, EXPERIMENTS};
use orthosphere_cli::experiments;
use std::process::ExitCode;

/// Monte Carlo and quadrature experiments on sampling the sphere by a random
/// subspace and its orthogonal complement, plus the subspace-membership
/// protocol simulator and its acceptance suite.
#[derive(Parser, Debug)]
#[command(name = "orthosphere", version, about, long_about = None)]
struct Cli {
    /// spectra | coarea | theorem1 | conjecture | smallball | tailbound |
    /// vsp | rectangle | suite
    experiment: String,

    /// plain `key = value` config file; flags override its entries
    #[arg(long)]
    config: Option<String>,

    /// ambient dimension
    #[arg(long)]
    n: Option<usize>,

    /// coordinate count of the set family
    #[arg(long)]
    k: Option<usize>,

    /// independent trials (subspace draws / protocol instances)
    #[arg(long)]
    trials: Option<usize>,

    /// Monte Carlo samples per measure estimate
    #[arg(long)]
    samples: Option<usize>,

    /// master seed; identical seeds reproduce reports bit for bit
    #[arg(long)]
    seed: Option<u64>,

    /// set descriptor: cap:T=<real> | box:[a,b]x[c,d]... | measure-cap:sigma=<real>
    #[arg(long)]
    set: Option<String>,

    /// small-ball radius constant
    #[arg(long)]
    rho: Option<f64>,

    /// coordinate-budget constant (k <= alpha1 sqrt(n))
    #[arg(long)]
    alpha1: Option<f64>,

    /// sup-norm budget exponent (|f| <= e^{alpha2 sqrt(n)})
    #[arg(long)]
    alpha2: Option<f64>,

    /// report output path (stdout otherwise)
    #[arg(long)]
    out: Option<String>,

    /// json | csv
    #[arg(long)]
    format: Option<String>,

    /// worker threads (0 = library default); never affects results
    #[arg(long)]
    threads: Option<usize>,

    /// protocol: dimension of each shared subspace
    #[arg(long)]
    dim_e: Option<usize>,

    /// protocol: points per net
    #[arg(long)]
    net_size: Option<usize>,

    /// protocol: number of pre-sampled (E, N) pairs
    #[arg(long)]
    list_size: Option<usize>,

    /// protocol: stored-coordinate accuracy in bits
    #[arg(long)]
    quant_bits: Option<u32>,

    /// protocol: write one `instance_id,i_hat,j_hat,bits,label,answer,correct`
    /// line per instance to this path
    #[arg(long)]
    transcript: Option<String>,
}

fn build_config(cli: &Cli) -> orthosphere_cli::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_config_string(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = cli.experiment.clone();
    let mut apply = |key: &str, v: Option<String>| -> orthosphere_cli::Result<()> {
        if let Some(v) = v {
            cfg.apply(key, &v)?;
        }
        Ok(())
    };
    apply("n", cli.n.map(|v| v.to_string()))?;
    apply("k", cli.k.map(|v| v.to_string()))?;
    apply("trials", cli.trials.map(|v| v.to_string()))?;
    apply("samples", cli.samples.map(|v| v.to_string()))?;
    apply("seed", cli.seed.map(|v| v.to_string()))?;
    apply("set", cli.set.clone())?;
    apply("rho", cli.rho.map(|v| v.to_string()))?;
    apply("alpha1", cli.alpha1.map(|v| v.to_string()))?;
    apply("alpha2", cli.alpha2.map(|v| v.to_string()))?;
    apply("out", cli.out.clone())?;
    apply("format", cli.format.clone())?;
    apply("threads", cli.threads.map(|v| v.to_string()))?;
    apply("dim_e", cli.dim_e.map(|v| v.to_string()))?;
    apply("net_size", cli.net_size.map(|v| v.to_string()))?;
    apply("list_size", cli.list_size.map(|v| v.to_string()))?;
    apply("quant_bits", cli.quant_bits.map(|v| v.to_string()))?;
    apply("transcript", cli.transcript.clone())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !EXPERIMENTS.contains(&cli.experiment.as_str()) {
        eprintln!(
            "error: unknown experiment `{}`; expected one of {}",
            cli.experiment,
            EXPERIMENTS.join("|")
        );
        return ExitCode::from(2);
    }
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    // the suite prints its per-criterion lines as it reports
    if cfg.experiment == "suite" {
        return match orthosphere_cli::suite::run_full(cfg.seed, true) {
            Ok(outcome) => {
                for c in &outcome.criteria {
                    println!("{}", c.line());
                }
                println!("suite: {}", if outcome.all_pass { "PASS" } else { "FAIL" });
                if let Some(path) = &cfg.out {
                    match write_suite_report(&cfg, &outcome) {
                        Ok(text) => {
                            if let Err(e) = std::fs::write(path, text) {
                                eprintln!("error: {e}");
                                return ExitCode::from(2);
                            }
                        }
                        Err(e) => {
                            eprintln!("error: {e}");
                            return ExitCode::from(2);
                        }
                    }
                }
                if outcome.all_pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    match experiments::run(&cfg) {
        Ok(report) => {
            if cfg.out.is_none() {
                println!("{}", report.render(cfg.format));
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn write_suite_report(
    cfg: &ExperimentConfig,
    outcome: &orthosphere_cli::suite::SuiteOutcome,
) -> orthosphere_cli::Result<String> {
    use orthosphere_cli::report::{Estimate, ExperimentReport};
    let estimates = outcome
        .criteria
        .iter()
        .map(|c| Estimate::exact(format!("c{:02}_{}", c.id, c.slug), f64::from(u8::from(c.pass))))
        .collect();
    let report = ExperimentReport::new(cfg, estimates, outcome.all_pass, 0.0);
    Ok(report.render(cfg.format))
}
