use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use qsobolev::embedding::{BetaChoice, SetSelector};
use qsobolev::group::conjugate_exponent;
use qsobolev::qft::Direction;
use qsobolev::sobolev::{TestWeightSign, Weight};
use qsobolev::weyl::WeylConvention;

pub const OUT_DIR_ENV: &str = "QSOBOLEV_OUT_DIR";

#[derive(Debug)]
pub struct ConfigError(pub String);

impl<E: Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to per-command defaults.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// System sizes, comma separated.
    #[arg(long = "N", value_delimiter = ',', global = true)]
    pub n: Vec<usize>,
    /// standard | symmetric
    #[arg(long, global = true)]
    pub convention: Option<WeylConvention>,
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Exponent list for hausdorff-young; Sobolev p in (1,2) or pairing p > 2 elsewhere.
    #[arg(long, value_delimiter = ',', global = true)]
    pub p: Vec<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// euclidean | constant[:VALUE] | csv:PATH
    #[arg(long, global = true)]
    pub weight: Option<String>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub homogeneous: Option<bool>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// forward | inverse, comma separated
    #[arg(long, value_delimiter = ',', global = true)]
    pub direction: Vec<Direction>,
    /// +1 | -1, comma separated
    #[arg(long, value_delimiter = ',', global = true, allow_hyphen_values = true)]
    pub sign: Vec<TestWeightSign>,
    /// corrected | paper
    #[arg(long, global = true)]
    pub beta: Option<BetaChoice>,
    /// lex-first | frequency-localized | lattice
    #[arg(long, global = true)]
    pub selector: Option<SetSelector>,
    /// Counterexample sweep as N:k pairs, comma separated.
    #[arg(long, value_delimiter = ',', global = true)]
    pub sweep: Vec<String>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// key=value file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Axioms,
    Plancherel,
    HausdorffYoung,
    SobolevNorms,
    Pairing,
    Exponents,
    Embed,
    Counterexample,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Axioms => "axioms",
            CommandKind::Plancherel => "plancherel",
            CommandKind::HausdorffYoung => "hausdorff-young",
            CommandKind::SobolevNorms => "sobolev-norms",
            CommandKind::Pairing => "pairing",
            CommandKind::Exponents => "exponents",
            CommandKind::Embed => "embed",
            CommandKind::Counterexample => "counterexample",
        }
    }
}

/// Fully resolved configuration, echoed in every report. Fields a command
/// does not use stay `None` and are omitted.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(rename = "N", skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    pub convention: WeylConvention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub direction: Vec<Direction>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sign: Vec<TestWeightSign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selector: Option<SetSelector>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub config_file: Option<PathBuf>,
}

/// Parses a `key=value` file. Blank lines and lines starting with `#` are ignored.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        let key = k.trim().trim_start_matches("--").to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!("{}:{}: unknown key '{key}'", path.display(), lineno + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "N", "convention", "s", "p", "q", "alpha", "rho", "weight", "homogeneous", "trials", "seed",
    "direction", "sign", "beta", "selector", "sweep", "tolerance", "out", "format",
];

struct Layers<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layers<'_> {
    fn scalar<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.scalar_opt(key, flag)?.unwrap_or(default))
    }

    fn scalar_opt<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| ConfigError(format!("config key {key}: {e}"))))
            .transpose()
    }

    fn list<T>(&self, key: &str, flag: Vec<T>, default: &[T]) -> Result<Vec<T>, ConfigError>
    where
        T: FromStr + Clone,
        T::Err: Display,
    {
        if !flag.is_empty() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<T>().map_err(|e| ConfigError(format!("config key {key}: {e}"))))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }
}

fn parse_sweep(items: &[String]) -> Result<Vec<(usize, usize)>, ConfigError> {
    items
        .iter()
        .map(|item| {
            let (n, k) = item
                .split_once(':')
                .ok_or_else(|| ConfigError(format!("sweep entry '{item}' must be N:k")))?;
            Ok((n.trim().parse()?, k.trim().parse()?))
        })
        .collect()
}

/// Builds a weight on the phase space of size `n` from a `--weight` value.
pub fn build_weight(kind: &str, group: &qsobolev::group::FiniteAbelianGroup) -> Result<Weight, ConfigError> {
    if kind == "euclidean" {
        return Ok(Weight::euclidean(group));
    }
    if kind == "constant" {
        return Ok(Weight::constant(group, 1.0)?);
    }
    if let Some(v) = kind.strip_prefix("constant:") {
        return Ok(Weight::constant(group, v.parse()?)?);
    }
    if let Some(path) = kind.strip_prefix("csv:") {
        let file = fs::File::open(path).map_err(|e| ConfigError(format!("{path}: {e}")))?;
        return Ok(Weight::read_csv(group, file)?);
    }
    Err(ConfigError(format!("unknown weight '{kind}'")))
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Sobolev `q` from either `--q` or a single `--p`; `q` wins when both agree.
fn fourier_exponent(l: &Layers, flags: &Flags, default_q: f64) -> Result<f64, ConfigError> {
    let q = l.scalar_opt::<f64>("q", flags.q)?;
    let p = l.list::<f64>("p", flags.p.clone(), &[])?;
    if p.len() > 1 {
        return Err(ConfigError("expected a single p".into()));
    }
    match (q, p.first()) {
        (Some(q), Some(&p)) if (conjugate_exponent(p) - q).abs() > 1e-12 * q => {
            Err(ConfigError(format!("p = {p} and q = {q} are not conjugate")))
        }
        (Some(q), _) => Ok(q),
        (None, Some(&p)) => Ok(conjugate_exponent(p)),
        (None, None) => Ok(default_q),
    }
}

pub fn resolve(command: CommandKind, flags: Flags) -> Result<RunConfig, ConfigError> {
    let file = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let l = Layers { file: &file };
    use CommandKind::*;

    let default_n: &[usize] = match command {
        Axioms => &[4],
        Plancherel => &[2, 4, 8],
        HausdorffYoung => &[4, 8],
        SobolevNorms => &[4, 8],
        Pairing => &[8],
        Embed => &[8],
        Exponents | Counterexample => &[],
    };
    let n = if default_n.is_empty() {
        Vec::new()
    } else {
        l.list("N", flags.n.clone(), default_n)?
    };
    if n.contains(&0) {
        return Err(ConfigError("N must be positive".into()));
    }
    let uses = |cmds: &[CommandKind]| cmds.contains(&command);

    let default_trials = match command {
        Plancherel => 200,
        SobolevNorms => 1000,
        _ => 500,
    };
    let trials = if uses(&[Plancherel, HausdorffYoung, SobolevNorms, Pairing, Embed]) {
        let t = l.scalar("trials", flags.trials, default_trials)?;
        if t == 0 {
            return Err(ConfigError("trials must be at least 1".into()));
        }
        Some(t)
    } else {
        None
    };
    let seed = if trials.is_some() {
        Some(l.scalar("seed", flags.seed, 42)?)
    } else {
        None
    };

    let s = if uses(&[SobolevNorms, Pairing, Exponents, Embed]) {
        Some(positive("s", l.scalar("s", flags.s, 1.0)?)?)
    } else {
        None
    };

    let (p, q) = match command {
        HausdorffYoung => {
            let ps = l.list("p", flags.p.clone(), &[1.0, 8.0 / 7.0, 4.0 / 3.0, 8.0 / 5.0, 2.0])?;
            if let Some(bad) = ps.iter().find(|p| !(1.0..=2.0).contains(*p)) {
                return Err(ConfigError(format!("hausdorff-young needs 1 <= p <= 2, got {bad}")));
            }
            (ps, None)
        }
        Pairing => {
            let ps = l.list("p", flags.p.clone(), &[4.0])?;
            if ps.len() != 1 || !(ps[0] > 2.0 && ps[0].is_finite()) {
                return Err(ConfigError(format!("pairing needs a single finite p > 2, got {ps:?}")));
            }
            (ps, None)
        }
        SobolevNorms | Embed | Exponents => {
            let q = fourier_exponent(&l, &flags, 4.0)?;
            (vec![conjugate_exponent(q)], Some(q))
        }
        Counterexample => (Vec::new(), Some(l.scalar("q", flags.q, 4.0)?)),
        _ => (Vec::new(), None),
    };

    let alpha = if uses(&[Exponents, Embed]) {
        let a: f64 = l.scalar("alpha", flags.alpha, 4.0)?;
        if a.is_nan() || a <= 0.0 {
            return Err(ConfigError(format!("alpha must be positive, got {a}")));
        }
        Some(a)
    } else {
        None
    };
    let rho = if command == Counterexample {
        Some(l.scalar("rho", flags.rho, 8.0)?)
    } else {
        None
    };
    let weight = if uses(&[SobolevNorms, Pairing, Embed]) {
        Some(l.scalar("weight", flags.weight.clone(), "euclidean".to_string())?)
    } else {
        None
    };
    let homogeneous = if uses(&[SobolevNorms, Embed]) {
        Some(l.scalar("homogeneous", flags.homogeneous, false)?)
    } else {
        None
    };
    let direction = if command == HausdorffYoung {
        l.list("direction", flags.direction.clone(), &[Direction::Forward, Direction::Inverse])?
    } else {
        Vec::new()
    };
    let sign = if command == Pairing {
        l.list("sign", flags.sign.clone(), &[TestWeightSign::Minus])?
    } else {
        Vec::new()
    };
    let beta = if command == Embed {
        Some(l.scalar("beta", flags.beta, BetaChoice::Corrected)?)
    } else {
        None
    };
    let (selector, sweep) = if command == Counterexample {
        let raw = l.list("sweep", flags.sweep.clone(), &[])?;
        let sweep = if raw.is_empty() {
            vec![(32, 1), (16, 4), (8, 8), (32, 100)]
        } else {
            parse_sweep(&raw)?
        };
        (Some(l.scalar("selector", flags.selector, SetSelector::LexFirst)?), sweep)
    } else {
        (None, Vec::new())
    };
    let default_tol = match command {
        Axioms | Plancherel => Some(1e-11),
        HausdorffYoung | Pairing | Embed => Some(1e-10),
        SobolevNorms => Some(1e-12),
        Exponents | Counterexample => None,
    };
    let tolerance = match default_tol {
        Some(d) => Some(positive("tolerance", l.scalar("tolerance", flags.tolerance, d)?)?),
        None => None,
    };

    Ok(RunConfig {
        command,
        n,
        convention: l.scalar("convention", flags.convention, WeylConvention::Standard)?,
        s,
        p,
        q,
        alpha,
        rho,
        weight,
        homogeneous,
        trials,
        seed,
        direction,
        sign,
        beta,
        selector,
        sweep,
        tolerance,
        format: l.scalar("format", flags.format, Format::Json)?,
        out: l.scalar_opt("out", flags.out.clone())?,
        config_file: flags.config,
    })
}
