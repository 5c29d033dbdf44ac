mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fil::interpolate::TestFunction;
use fil::nodes::EpsGenerator;
use fil::perturb_op::WeightScheme;
use fil::scalar::Precision;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "fil", version, about = "Fourier interpolation at perturbed square-root nodes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the basis table cache and check the interpolation deltas.
    Basis(Common),
    /// Assemble and invert the perturbed operator.
    Perturb(Common),
    /// Sample a test function at the nodes and rebuild it on a grid.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// zero | gaussian[:a] | hermite:c0,c1,...
        #[arg(long)]
        function: Option<TestFunction>,
    },
    /// Run the decay, growth and lower-bound claim suite.
    Bounds(Common),
    /// Classify a node sequence and match it to √n.
    Nodes {
        #[command(flatten)]
        common: Common,
        /// scaled:a (x_n = a√n) or file:PATH
        #[arg(long)]
        seq: Option<String>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    trunc: Option<usize>,
    /// s=K or exp=C
    #[arg(long)]
    weight: Option<WeightScheme>,
    /// zero | power:c,alpha | alt:c,alpha | exp:c,C | list:v,... | file:PATH
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<EpsGenerator>,
    /// Frequency-side perturbation; defaults to --eps.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<EpsGenerator>,
    /// a:b:step
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    precision: Option<Precision>,
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn resolve(&self, command: &str) -> fil::error::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        c.command = command.to_string();
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.nmax {
            c.n_max = v;
        }
        if let Some(v) = self.trunc {
            c.truncation = Some(v);
        }
        if let Some(v) = &self.weight {
            c.weight = v.clone();
        }
        if let Some(v) = &self.eps {
            c.eps = v.clone();
        }
        if let Some(v) = &self.delta {
            c.delta = Some(v.clone());
        }
        if let Some(v) = &self.grid {
            c.grid = v.clone();
        }
        if let Some(v) = self.precision {
            c.precision = v;
        }
        if let Some(v) = self.jobs {
            c.jobs = v;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<bool, commands::CmdError> {
    match cli.cmd {
        Cmd::Basis(c) => commands::basis(&c.resolve("basis")?),
        Cmd::Perturb(c) => commands::perturb(&c.resolve("perturb")?),
        Cmd::Reconstruct { common, function } => {
            let mut c = common.resolve("reconstruct")?;
            if let Some(f) = function {
                c.function = f;
            }
            commands::reconstruct(&c)
        }
        Cmd::Bounds(c) => commands::bounds(&c.resolve("bounds")?),
        Cmd::Nodes { common, seq, count, p, q } => {
            let mut c = common.resolve("nodes")?;
            if seq.is_some() {
                c.sequence = seq;
            }
            if let Some(v) = count {
                c.count = v;
            }
            if let Some(v) = p {
                c.p = v;
            }
            if let Some(v) = q {
                c.q = v;
            }
            commands::nodes(&c)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::CmdError::Fil(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
