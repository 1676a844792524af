//! Run configuration: defaults, an optional `key=value` file, then CLI flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use mastr::{ProblemKind, SolveConfig64, Variant};

use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantChoice {
    Rmtr,
    Mastr,
    Both,
}

impl VariantChoice {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantChoice::Rmtr => vec![Variant::Rmtr],
            VariantChoice::Mastr => vec![Variant::Mastr],
            VariantChoice::Both => vec![Variant::Rmtr, Variant::Mastr],
        }
    }
}

impl FromStr for VariantChoice {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| BenchError::Config(format!("unknown variant `{s}`")))
    }
}

/// Command-line flags. Every field is optional so that unset flags fall
/// through to the config file and then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `key=value` file keyed by the long flag names
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub problem: Option<ProblemKind>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantChoice>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub coarse_cells: Option<usize>,
    #[arg(long)]
    pub pre: Option<usize>,
    #[arg(long)]
    pub post: Option<usize>,
    #[arg(long)]
    pub coarse_its: Option<usize>,
    #[arg(long)]
    pub cd_sweeps: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_vcycles: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eta1: Option<f64>,
    #[arg(long)]
    pub eta2: Option<f64>,
    #[arg(long)]
    pub gamma_shrink: Option<f64>,
    #[arg(long)]
    pub gamma_grow: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub delta_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// `None` means "all three benchmarks" where a command supports that.
    pub problem: Option<ProblemKind>,
    pub variant: VariantChoice,
    pub levels: usize,
    pub coarse_cells: usize,
    pub solve: SolveConfig64,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: None,
            variant: VariantChoice::Both,
            levels: 6,
            coarse_cells: 4,
            solve: SolveConfig64::default(),
            out: None,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| BenchError::Config(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Sets one option by its flag name (`coarse-cells` and `coarse_cells` both work).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let tr = &mut self.solve.tr;
        match key.as_str() {
            "problem" => {
                self.problem = Some(value.parse().map_err(|e: mastr::Error| BenchError::Config(e.to_string()))?)
            }
            "variant" => self.variant = value.parse()?,
            "levels" => self.levels = parse(&key, value)?,
            "coarse-cells" => self.coarse_cells = parse(&key, value)?,
            "pre" => self.solve.pre = parse(&key, value)?,
            "post" => self.solve.post = parse(&key, value)?,
            "coarse-its" => self.solve.coarse_its = parse(&key, value)?,
            "cd-sweeps" => tr.cd_sweeps = parse(&key, value)?,
            "tol" => self.solve.tol = parse(&key, value)?,
            "max-vcycles" => self.solve.max_vcycles = parse(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => self.seed = parse(&key, value)?,
            "eta1" => tr.eta1 = parse(&key, value)?,
            "eta2" => tr.eta2 = parse(&key, value)?,
            "gamma-shrink" => tr.gamma_shrink = parse(&key, value)?,
            "gamma-grow" => tr.gamma_grow = parse(&key, value)?,
            "delta0" => tr.delta0 = parse(&key, value)?,
            "delta-max" => tr.delta_max = parse(&key, value)?,
            _ => return Err(BenchError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file_str(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BenchError::Config(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| BenchError::Io { path: path.display().to_string(), source })?;
        self.apply_file_str(&text)
    }

    /// `base`, then the config file named in `args`, then the flags.
    pub fn resolve(args: &ConfigArgs, base: RunConfig) -> Result<Self> {
        let mut cfg = base;
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        if let Some(p) = args.problem {
            cfg.problem = Some(p);
        }
        if let Some(v) = args.variant {
            cfg.variant = v;
        }
        macro_rules! take {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = args.$field.clone() { $target = v; })*
            };
        }
        take! {
            levels => cfg.levels,
            coarse_cells => cfg.coarse_cells,
            pre => cfg.solve.pre,
            post => cfg.solve.post,
            coarse_its => cfg.solve.coarse_its,
            cd_sweeps => cfg.solve.tr.cd_sweeps,
            tol => cfg.solve.tol,
            max_vcycles => cfg.solve.max_vcycles,
            seed => cfg.seed,
            eta1 => cfg.solve.tr.eta1,
            eta2 => cfg.solve.tr.eta2,
            gamma_shrink => cfg.solve.tr.gamma_shrink,
            gamma_grow => cfg.solve.tr.gamma_grow,
            delta0 => cfg.solve.tr.delta0,
            delta_max => cfg.solve.tr.delta_max,
        }
        if let Some(out) = &args.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.solve.validate()?;
        if self.levels < 2 || self.coarse_cells < 2 {
            return Err(BenchError::Config("need at least 2 levels and 2 coarse cells".into()));
        }
        Ok(())
    }

    pub fn problems(&self) -> Vec<ProblemKind> {
        match self.problem {
            Some(p) => vec![p],
            None => ProblemKind::ALL.to_vec(),
        }
    }
}
