use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use soaring::commands::{self, CommandOutcome, Overrides};
use soaring::dynamics::WindCouplingSign;
use soaring::scenario::{load_scenario, Scenario};
use soaring::Result;

/// Dynamic-soaring simulator and Lie-bracket controllability toolkit.
#[derive(Parser, Debug)]
#[command(name = "soaring", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (TOML). Defaults apply to anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step, s.
    #[arg(long)]
    h: Option<f64>,
    /// Final time, s.
    #[arg(long)]
    t_end: Option<f64>,
    /// Wind-coupling sign, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<WindCouplingSign>,
    /// Seed for randomized commands.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-loop simulation with phase detection.
    Simulate(Common),
    /// Rank test of the bracket distribution.
    Controllability(Common),
    /// Simulate and compare against a reference trajectory.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Reference CSV; overrides the scenario's.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Scalar extremum-seeking demonstration.
    DemoEsc {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Series output versus integration on random inputs.
    DemoChenfliess(Common),
}

fn scenario(c: &Common) -> Result<Scenario> {
    let mut s = match &c.config {
        Some(p) => load_scenario(p)?,
        None => Scenario::default(),
    };
    Overrides {
        out: c.out.clone(),
        h: c.h,
        t_end: c.t_end,
        sign: c.sign,
        seed: c.seed,
    }
    .apply(&mut s)?;
    Ok(s)
}

fn run(cli: Cli) -> Result<CommandOutcome> {
    match cli.command {
        Command::Simulate(c) => commands::cmd_simulate(&scenario(&c)?),
        Command::Controllability(c) => commands::cmd_controllability(&scenario(&c)?),
        Command::Compare { common, reference } => commands::cmd_compare(&scenario(&common)?, reference.as_deref()),
        Command::DemoEsc { common, x0, omega } => {
            let mut s = scenario(&common)?;
            if let Some(x0) = x0 {
                s.demo_esc.x0 = x0;
            }
            if let Some(w) = omega {
                s.demo_esc.omega = w;
            }
            if let Some(h) = common.h {
                s.demo_esc.h = h;
            }
            if let Some(t) = common.t_end {
                s.demo_esc.t_end = t;
            }
            s.validate()?;
            commands::cmd_demo_esc(&s)
        }
        Command::DemoChenfliess(c) => commands::cmd_demo_chenfliess(&scenario(&c)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
