use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use ssamt_core::{Procedure, RankRule};

use crate::config::{normalize_key, parse_bool, read_config};

#[derive(Debug, Parser)]
#[command(name = "ssamt", version, about = "SSA / MSSA denoising, imputation and multiple testing")]
pub struct Cli {
    /// File of key=value defaults for any flag of the chosen command
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise every numeric column; writes denoised.csv and diagnostics.json
    Denoise(DenoiseArgs),
    /// Fill missing values by iterative SSA; writes imputed.csv and imputation.json
    Impute(ImputeArgs),
    /// Denoise, then test each variable across groups; writes report.json
    Test(TestArgs),
    /// Monte Carlo study of SSA denoising on synthetic signals
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    None,
    Ssa,
    Mssa,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Ssa => "ssa",
            Method::Mssa => "mssa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestChoice {
    T,
    F,
}

/// `--rank`: a component count or `full`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankArg {
    Count(usize),
    Full,
}

impl FromStr for RankArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(RankArg::Full);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or \"full\", got {s:?}")),
            Ok(r) => Ok(RankArg::Count(r)),
        }
    }
}

/// `--rank-rule`: `noise-floor`, `share` (0.90) or `share:<fraction>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleArg(pub RankRule);

impl FromStr for RuleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "noise-floor" {
            return Ok(RuleArg(RankRule::NoiseFloor));
        }
        if s == "share" {
            return Ok(RuleArg(RankRule::CumulativeShare(0.90)));
        }
        if let Some(f) = s.strip_prefix("share:") {
            if let Ok(v) = f.parse::<f64>() {
                if v > 0.0 && v <= 1.0 {
                    return Ok(RuleArg(RankRule::CumulativeShare(v)));
                }
            }
        }
        Err(format!("expected noise-floor, share or share:<fraction in (0,1]>, got {s:?}"))
    }
}

pub fn rule_name(rule: RankRule) -> String {
    match rule {
        RankRule::Fixed(r) => format!("fixed:{r}"),
        RankRule::Full => "full".into(),
        RankRule::CumulativeShare(f) => format!("share:{f}"),
        RankRule::NoiseFloor => "noise-floor".into(),
    }
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    /// Number of leading components kept, or "full"; overrides --rank-rule
    #[arg(long)]
    pub rank: Option<RankArg>,
    /// Automatic rank choice when --rank is absent [default: noise-floor,
    /// or share for impute]
    #[arg(long)]
    pub rank_rule: Option<RuleArg>,
}

impl RankArgs {
    pub fn rule(&self) -> RankRule {
        self.rule_or(RankRule::default())
    }

    pub fn rule_or(&self, fallback: RankRule) -> RankRule {
        match self.rank {
            Some(RankArg::Count(r)) => RankRule::Fixed(r),
            Some(RankArg::Full) => RankRule::Full,
            None => self.rank_rule.map_or(fallback, |r| r.0),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input CSV; give it twice for a two-file (one file per group) design
    #[arg(long = "input", required = true, action = ArgAction::Append)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Treat the first column as an index and copy it through unchanged
    #[arg(long)]
    pub index_column: bool,
    /// Further non-numeric column copied through unchanged (repeatable)
    #[arg(long, action = ArgAction::Append)]
    pub label_column: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[arg(long, value_enum, default_value_t = Method::Ssa)]
    pub method: Method,
    /// Window length L (default floor(N/2))
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub rank: RankArgs,
    /// Column holding the group label of each row
    #[arg(long)]
    pub group_column: Option<String>,
    /// With --method mssa, stack the rows of each group separately
    #[arg(long)]
    pub per_group: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub pre: PreprocessArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub pre: PreprocessArgs,
    #[arg(long, value_enum, default_value_t = TestChoice::T)]
    pub test: TestChoice,
    /// Comma-separated subset of bonferroni, holm, sidak_ss, sidak_sd, hochberg
    #[arg(long, value_delimiter = ',', default_value = "bonferroni,holm,sidak_ss,sidak_sd,hochberg")]
    pub procedures: Vec<Procedure>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ImputeArgs {
    #[command(flatten)]
    pub io: InputArgs,
    /// Window length L (default floor(N/2))
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub rank: RankArgs,
    #[arg(long, default_value_t = ssamt_core::imputation::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = ssamt_core::imputation::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// "all" or a comma-separated list of sine_plus_exp, cosine_plus_linear,
    /// sine_times_exp, sine_linear_exp
    #[arg(long, default_value = "all")]
    pub model: String,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Series length N
    #[arg(long, default_value_t = 100)]
    pub length: usize,
    /// Window lengths, comma separated
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub window: Vec<usize>,
    #[command(flatten)]
    pub rank: RankArgs,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
}

fn has_flag(args: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_value = format!("--{long}=");
    args.iter().any(|a| a.to_str().is_some_and(|s| s == flag || s.starts_with(&with_value)))
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_str()?;
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Inserts the config file's settings as flags right after the subcommand
/// name, skipping any flag already given on the command line.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = read_config(&path)?;
    let cmd = Cli::command();
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| a.to_str().and_then(|s| cmd.find_subcommand(s)).map(|c| (i, c)))
    else {
        return Ok(args);
    };
    let known_anywhere = |key: &str| {
        cmd.get_subcommands()
            .flat_map(|c| c.get_arguments())
            .any(|a| a.get_long() == Some(key))
    };
    let mut injected: Vec<OsString> = Vec::new();
    for e in entries {
        let key = normalize_key(&e.key);
        if key == "config" || key == "help" || key == "version" {
            bail!("{}: line {}: {key:?} cannot be set from a config file", path.display(), e.line);
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            if known_anywhere(&key) {
                continue;
            }
            bail!("{}: line {}: unknown setting {key:?}", path.display(), e.line);
        };
        if has_flag(&args, &key) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            let on = parse_bool(&e.value)
                .with_context(|| format!("{}: line {}: {key} expects true or false", path.display(), e.line))?;
            if on {
                injected.push(format!("--{key}").into());
            }
        } else if matches!(arg.get_action(), ArgAction::Append) {
            for v in e.value.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                injected.push(format!("--{key}={v}").into());
            }
        } else {
            injected.push(format!("--{key}={}", e.value).into());
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn rank_and_rule_parsing() {
        assert_eq!("full".parse::<RankArg>(), Ok(RankArg::Full));
        assert_eq!("3".parse::<RankArg>(), Ok(RankArg::Count(3)));
        assert!("0".parse::<RankArg>().is_err());
        assert_eq!("share".parse::<RuleArg>().unwrap().0, RankRule::CumulativeShare(0.9));
        assert_eq!("share:0.75".parse::<RuleArg>().unwrap().0, RankRule::CumulativeShare(0.75));
        assert!("share:2".parse::<RuleArg>().is_err());
        let args = RankArgs {
            rank: Some(RankArg::Count(2)),
            rank_rule: None,
        };
        assert_eq!(args.rule(), RankRule::Fixed(2));
    }

    #[test]
    fn config_fills_unset_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "window = 20\nalpha=0.01\nper_group = true\nseed = 4\ninput = a.csv\n").unwrap();
        let argv: Vec<OsString> = ["ssamt", "--config", cfg.to_str().unwrap(), "test", "--alpha", "0.1", "--input", "b.csv"]
            .iter()
            .map(OsString::from)
            .collect();
        let merged = merge_config(argv).unwrap();
        let cli = Cli::try_parse_from(merged).unwrap();
        let Command::Test(t) = cli.command else { panic!() };
        assert_eq!(t.pre.window, Some(20));
        assert_eq!(t.alpha, 0.1);
        assert!(t.pre.per_group);
        assert_eq!(t.io.inputs, vec![PathBuf::from("b.csv")]);

        std::fs::write(&cfg, "windw = 20\n").unwrap();
        let argv: Vec<OsString> = ["ssamt", "--config", cfg.to_str().unwrap(), "denoise", "--input", "x"]
            .iter()
            .map(OsString::from)
            .collect();
        assert!(merge_config(argv).is_err());
    }
}
