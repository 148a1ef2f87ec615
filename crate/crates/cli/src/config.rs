use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use wsaw_core::{ChainGrowthConfig, Error, MetropolisConfig, ModelParams, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Enumerate,
    LaceCheck,
    Perm,
    Metropolis,
    Fdd,
    Tightness,
    DiluteRatio,
    Degenerate,
    Plateau,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::LaceCheck => "lace-check",
            Command::Perm => "perm",
            Command::Metropolis => "metropolis",
            Command::Fdd => "fdd",
            Command::Tightness => "tightness",
            Command::DiluteRatio => "dilute-ratio",
            Command::Degenerate => "degenerate",
            Command::Plateau => "plateau",
        }
    }

    /// Default (dim, beta, n, torus sides).
    fn defaults(self) -> (usize, f64, usize, Vec<u32>) {
        match self {
            Command::Enumerate => (5, 0.1, 6, vec![]),
            Command::LaceCheck => (2, 0.5, 5, vec![]),
            Command::Perm | Command::Metropolis | Command::Fdd | Command::Tightness => (5, 0.1, 100, vec![]),
            Command::DiluteRatio => (5, 0.1, 6, vec![5]),
            Command::Degenerate => (5, 0.1, 25, vec![20, 40, 80]),
            Command::Plateau => (3, 0.1, 6, vec![5]),
        }
    }

    fn needs_torus(self) -> bool {
        matches!(self, Command::DiluteRatio | Command::Degenerate | Command::Plateau)
    }

    fn forbids_torus(self) -> bool {
        matches!(self, Command::LaceCheck | Command::Fdd | Command::Tightness)
    }
}

/// Sample and node caps. Chosen by name so runs stay deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    Small,
    Medium,
    Large,
}

impl Budget {
    fn node_budget(self) -> u64 {
        match self {
            Budget::Small => 200_000_000,
            Budget::Medium => 20_000_000_000,
            Budget::Large => 2_000_000_000_000,
        }
    }

    fn tours(self) -> usize {
        match self {
            Budget::Small => 2_000,
            Budget::Medium => 20_000,
            Budget::Large => 200_000,
        }
    }

    fn sweeps(self) -> usize {
        match self {
            Budget::Small => 20_000,
            Budget::Medium => 100_000,
            Budget::Large => 1_000_000,
        }
    }

    fn samples(self) -> usize {
        match self {
            Budget::Small => 5_000,
            Budget::Medium => 50_000,
            Budget::Large => 500_000,
        }
    }
}

/// Flags shared by every subcommand. Unset values take per-command defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Torus side. Repeat or separate by commas to give several (degenerate).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<u32>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub budget: Option<Budget>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub tours: Option<usize>,
    /// Number of time blocks in the fdd frequency grid.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Activity for the series commands; defaults to 0.9 / mu_hat.
    #[arg(long)]
    pub z: Option<f64>,
    /// Average the fdd estimator over lattice symmetries.
    #[arg(long)]
    pub symmetrized: bool,
}

/// Fully resolved experiment description; this is what the manifest records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: ModelParams,
    /// Torus sides for commands that sweep several.
    pub radii: Vec<u32>,
    pub seed: u64,
    pub budget: Budget,
    pub node_budget: u64,
    pub perm: ChainGrowthConfig,
    pub metropolis: MetropolisConfig,
    pub samples: usize,
    pub grid_blocks: usize,
    pub epsilon: f64,
    pub z: Option<f64>,
    pub symmetrized: bool,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn resolve(command: Command, a: &CommonArgs) -> Result<Self> {
        let (dim, beta, n, radii) = command.defaults();
        let budget = a.budget.unwrap_or(Budget::Small);
        let seed = a.seed.unwrap_or(0);
        let radii = if a.r.is_empty() { radii } else { a.r.clone() };
        let torus = if command.needs_torus() || (!command.forbids_torus() && !a.r.is_empty()) {
            radii.first().copied()
        } else {
            None
        };
        if command.forbids_torus() && !a.r.is_empty() && command != Command::Tightness {
            return Err(Error::InvalidParameter(format!("{} runs on Z^d and takes no --r", command.name())));
        }
        let params = ModelParams {
            dim: a.dim.unwrap_or(dim),
            beta: a.beta.unwrap_or(beta),
            torus,
            n: a.n.unwrap_or(n),
        };
        let mut perm = ChainGrowthConfig::default().with_tours(a.tours.unwrap_or(budget.tours())).with_seed(seed);
        perm.pilot_tours = perm.pilot_tours.min(perm.tours.max(1));
        let sweeps = budget.sweeps();
        let metropolis = MetropolisConfig {
            sweeps,
            thermalization: sweeps / 10,
            seed,
            chains: a.chains.unwrap_or(1),
            ..Default::default()
        };
        let cfg = ExperimentConfig {
            command,
            params,
            radii: if command.needs_torus() || command == Command::Tightness {
                radii
            } else {
                vec![]
            },
            seed,
            budget,
            node_budget: budget.node_budget(),
            perm,
            metropolis,
            samples: a.samples.unwrap_or(budget.samples()),
            grid_blocks: a.grid.unwrap_or(2),
            epsilon: a.epsilon.unwrap_or(0.25),
            z: a.z,
            symmetrized: a.symmetrized,
            out: a.out.clone().unwrap_or_else(|| PathBuf::from("wsaw-out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every precondition the dispatched command relies on.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        p.validate()?;
        self.perm.validate()?;
        if self.command.needs_torus() && p.torus.is_none() {
            return Err(Error::InvalidParameter(format!("{} needs a torus side --r", self.command.name())));
        }
        if self.command.forbids_torus() && p.torus.is_some() {
            return Err(Error::InvalidParameter(format!("{} runs on Z^d", self.command.name())));
        }
        if self.radii.iter().any(|&r| r < 3) {
            return Err(Error::InvalidParameter("torus sides must be at least 3".into()));
        }
        if matches!(self.command, Command::Metropolis | Command::Fdd | Command::Tightness | Command::Degenerate) {
            self.metropolis.validate(p)?;
            if p.n == 0 {
                return Err(Error::InvalidParameter(format!("{} needs n >= 1", self.command.name())));
            }
        }
        if matches!(self.command, Command::Perm | Command::Fdd) && p.n == 0 {
            return Err(Error::InvalidParameter(format!("{} needs n >= 1", self.command.name())));
        }
        if matches!(self.command, Command::Fdd | Command::Tightness | Command::Degenerate) && self.samples == 0 {
            return Err(Error::InvalidParameter("--samples must be positive".into()));
        }
        if self.command == Command::Fdd && !(1..=3).contains(&self.grid_blocks) {
            return Err(Error::InvalidParameter(format!("--grid must be 1, 2 or 3, got {}", self.grid_blocks)));
        }
        if self.command == Command::Fdd && p.n < 2 * self.grid_blocks {
            return Err(Error::InvalidParameter("fdd needs n >= 2 * grid blocks".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("--epsilon must be positive, got {}", self.epsilon)));
        }
        if let Some(z) = self.z {
            if !(z >= 0.0 && z.is_finite()) {
                return Err(Error::InvalidParameter(format!("--z must be non-negative, got {z}")));
            }
        }
        Ok(())
    }
}
