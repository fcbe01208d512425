use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noma_hetnet::cluster_size::size_surface;
use noma_hetnet::noma::Cluster;
use noma_hetnet::orchestrator::{energy_metrics, run_with, RunOptions, SchemeKind};
use noma_hetnet::power_alloc::{case_table, SlaveProblem};
use noma_hetnet::scenario::{run_sweep, sweep_file_name, write_cases, write_surface, write_trace, SweepSpec, SweepVariable};
use noma_hetnet::{generate_topology, Error, NetworkConfig, Result};

/// Uplink NOMA HetNet simulator.
///
/// Without a subcommand, runs a Monte Carlo sweep and writes one CSV per
/// alpha into `--out`.
#[derive(Parser, Debug)]
#[command(name = "noma-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Flat `key = value` file; keys are the config field names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    /// fef, kbar, beta, num_sbs or num_ue.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    /// Comma-separated alpha values; a single value also sets `alpha` for
    /// the subcommands. Defaults to the configured `alpha`.
    #[arg(long = "alpha", value_delimiter = ',', global = true)]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "proposed,basic,oma")]
    schemes: Vec<String>,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One scenario, one scheme: prints a summary and writes the trace CSV.
    Run {
        #[arg(long, default_value = "proposed")]
        scheme: String,
        /// Force every cluster to this size and never re-form.
        #[arg(long = "cluster_size")]
        cluster_size: Option<usize>,
        /// Keep the initial equal bandwidth split.
        #[arg(long = "uniform_bandwidth")]
        uniform_bandwidth: bool,
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
    },
    /// Identical-demand cluster size over a (fef, rate) grid, CSV on stdout.
    SizeSurface {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-7, 1e-5, 1e-3, 1e-1])]
        fef: Vec<f64>,
        /// Per-UE rates (bps).
        #[arg(long, value_delimiter = ',', default_values_t = vec![2.5e5, 5e5, 1e6, 2e6])]
        rate: Vec<f64>,
        /// Bandwidth in RBs.
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
    /// Every power-allocation case of one cluster, CSV on stdout.
    Cases {
        /// Channel gains of the members.
        #[arg(long, value_delimiter = ',', required = true)]
        gains: Vec<f64>,
        /// Rate demands (bps), one per gain.
        #[arg(long, value_delimiter = ',', required = true)]
        qos: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
}

/// Config overrides; each flag has the name of its config key.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long = "area_side", global = true)]
    area_side: Option<f64>,
    #[arg(long = "num_sbs", global = true)]
    num_sbs: Option<usize>,
    #[arg(long = "num_ue", global = true)]
    num_ue: Option<usize>,
    #[arg(long = "pathloss_exponent", global = true)]
    pathloss_exponent: Option<f64>,
    #[arg(long = "shadowing_stddev", global = true)]
    shadowing_stddev: Option<f64>,
    #[arg(long = "antenna_constant", global = true)]
    antenna_constant: Option<f64>,
    #[arg(long = "noise_psd", global = true, allow_hyphen_values = true)]
    noise_psd: Option<f64>,
    #[arg(long = "rb_bandwidth", global = true)]
    rb_bandwidth: Option<f64>,
    #[arg(long = "num_rbs", global = true)]
    num_rbs: Option<f64>,
    #[arg(long = "p_ue_max", global = true, allow_hyphen_values = true)]
    p_ue_max: Option<f64>,
    #[arg(long = "p_sbs", global = true, allow_hyphen_values = true)]
    p_sbs: Option<f64>,
    #[arg(long = "p_mbs", global = true, allow_hyphen_values = true)]
    p_mbs: Option<f64>,
    #[arg(long = "bias", global = true)]
    bias: Option<f64>,
    #[arg(long = "fef", global = true)]
    fef: Option<f64>,
    #[arg(long = "max_cluster_size", global = true)]
    max_cluster_size: Option<usize>,
    #[arg(long = "qos_mean", global = true)]
    qos_mean: Option<f64>,
    #[arg(long = "qos_spread", global = true)]
    qos_spread: Option<f64>,
    #[arg(long = "sensitivity_db", global = true, allow_hyphen_values = true)]
    sensitivity_db: Option<f64>,
    #[arg(long = "rng_seed", global = true)]
    rng_seed: Option<u64>,
    #[arg(long = "max_iterations", global = true)]
    max_iterations: Option<usize>,
    #[arg(long = "tolerance", global = true)]
    tolerance: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut NetworkConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(
            area_side,
            num_sbs,
            num_ue,
            pathloss_exponent,
            shadowing_stddev,
            antenna_constant,
            noise_psd,
            rb_bandwidth,
            num_rbs,
            p_ue_max,
            p_sbs,
            p_mbs,
            bias,
            fef,
            max_cluster_size,
            qos_mean,
            qos_spread,
            rng_seed,
            max_iterations,
            tolerance
        );
        if self.sensitivity_db.is_some() {
            cfg.sensitivity_db = self.sensitivity_db;
        }
    }
}

fn load_config(cli: &Cli) -> Result<NetworkConfig> {
    let mut cfg = match &cli.config {
        Some(p) => NetworkConfig::from_file(p)?,
        None => NetworkConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    if let [a] = cli.alphas[..] {
        cfg.alpha = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_schemes(names: &[String]) -> Result<Vec<SchemeKind>> {
    names.iter().map(|s| SchemeKind::parse(s)).collect()
}

fn sweep(cli: &Cli, cfg: &NetworkConfig) -> Result<()> {
    let var = cli
        .sweep
        .as_deref()
        .ok_or_else(|| Error::Config("nothing to do: pass --sweep <var> --grid <list> or a subcommand".into()))?;
    let spec = SweepSpec {
        variable: SweepVariable::parse(var)?,
        grid: cli.grid.clone(),
        alphas: if cli.alphas.is_empty() { vec![cfg.alpha] } else { cli.alphas.clone() },
        schemes: parse_schemes(&cli.schemes)?,
        seeds: cli.seeds,
        out: Some(cli.out.clone()),
    };
    let result = run_sweep(&spec, cfg)?;
    for &alpha in &spec.alphas {
        println!("{}", cli.out.join(sweep_file_name(spec.variable, alpha)).display());
        for &g in &spec.grid {
            let line: Vec<String> = spec
                .schemes
                .iter()
                .filter_map(|&s| result.mean_objective(s, alpha, g).map(|m| format!("{s}={m:.6e}")))
                .collect();
            println!("  {}={g}: {}", spec.variable, line.join(" "));
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        None => sweep(cli, &cfg),
        Some(Command::Run { scheme, cluster_size, uniform_bandwidth, trace }) => {
            let scheme = SchemeKind::parse(scheme)?;
            let topo = generate_topology(&cfg)?;
            let opts = RunOptions { forced_cluster_size: *cluster_size, fixed_uniform_bandwidth: *uniform_bandwidth };
            let st = run_with(&topo, &cfg, scheme, &opts)?;
            let e = energy_metrics(&st);
            println!("scheme {scheme}");
            println!("ues {}", topo.num_ue());
            println!("objective {:.6e}", st.objective);
            println!("sum_rate {:.6e}", e.sum_rate);
            println!("total_power_w {:.6e}", e.total_power);
            println!("energy_efficiency {:.6e}", e.energy_efficiency);
            println!("clusters {}", st.clusters.len());
            println!("iterations {} converged {}", st.iterations, st.converged);
            println!("outage_ues {}", st.outage_ues().len());
            write_trace(&st, trace)?;
            Ok(())
        }
        Some(Command::SizeSurface { fef, rate, theta }) => {
            let pts = size_surface(fef, rate, *theta, cfg.rb_bandwidth)?;
            write_surface(&pts, std::io::stdout().lock())
        }
        Some(Command::Cases { gains, qos, theta }) => {
            if gains.len() != qos.len() {
                return Err(Error::Config("--gains and --qos need the same length".into()));
            }
            let members: Vec<(usize, f64, f64)> =
                gains.iter().zip(qos).enumerate().map(|(i, (&g, &q))| (i, g, q)).collect();
            let cluster = Cluster::new(0, &members, *theta);
            let radio = cfg.radio();
            let csc = radio.csc(&cluster.qos, *theta).composite;
            let problem = SlaveProblem {
                gains: &cluster.gains,
                csc: &csc,
                noise: radio.normalized_noise(*theta)?,
                fef: cfg.effective_fef(),
                bandwidth: *theta * cfg.rb_bandwidth,
                alpha: cfg.alpha,
            };
            write_cases(&case_table(&problem), std::io::stdout().lock())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(4),
            }
        }
    }
}
