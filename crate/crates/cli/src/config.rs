use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use mpfgmres::fgmres::Mode;
use mpfgmres::precision::{Format, PrecisionConfig};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Keys accepted in a config file. Flags use the same names.
pub const KEYS: [&str; 12] =
    ["problem", "precond", "factor-format", "u", "uA", "uL", "uR", "tol", "maxit", "out", "uL-list", "uR-list"];

/// The formats swept by `grid` when no list is given.
pub const GRID_FORMATS: [Format; 4] = [Format::HALF, Format::SINGLE, Format::DOUBLE, Format::QUAD];

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Synthetic { n: usize, c: f64, seed: u64 },
    File { path: PathBuf, seed: u64 },
    /// `A = I` with a seeded uniform right-hand side.
    Identity { n: usize, seed: u64 },
}

fn parse_fields(body: &str) -> Result<BTreeMap<&str, &str>, CliError> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Usage(format!("expected key=value in problem spec, got `{kv}`")))
        })
        .collect()
}

fn field<T: FromStr>(fields: &BTreeMap<&str, &str>, key: &str, default: Option<T>) -> Result<T, CliError> {
    match fields.get(key) {
        Some(v) => v.parse().map_err(|_| CliError::Usage(format!("bad value `{v}` for `{key}`"))),
        None => default.ok_or_else(|| CliError::Usage(format!("problem spec needs `{key}`"))),
    }
}

impl FromStr for ProblemSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "synthetic" => {
                let f = parse_fields(body)?;
                if let Some(k) = f.keys().find(|k| !["n", "c", "seed"].contains(k)) {
                    return Err(CliError::Usage(format!("unknown synthetic field `{k}`")));
                }
                Ok(ProblemSpec::Synthetic { n: field(&f, "n", Some(200))?, c: field(&f, "c", None)?, seed: field(&f, "seed", Some(1))? })
            }
            "identity" => {
                let f = parse_fields(body)?;
                Ok(ProblemSpec::Identity { n: field(&f, "n", Some(10))?, seed: field(&f, "seed", Some(1))? })
            }
            "file" => {
                // an optional trailing ",seed=N"; anything before it is the path
                let (path, seed) = match body.rsplit_once(",seed=") {
                    Some((p, s)) => (p, s.parse().map_err(|_| CliError::Usage(format!("bad seed `{s}`")))?),
                    None => (body, 1),
                };
                if path.is_empty() {
                    return Err(CliError::Usage("file problem needs a path".into()));
                }
                Ok(ProblemSpec::File { path: PathBuf::from(path), seed })
            }
            other => Err(CliError::Usage(format!("unknown problem kind `{other}` (synthetic, file, identity)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// A multiple of the working unit roundoff.
    UnitRoundoffs(f64),
    Absolute(f64),
}

impl Tolerance {
    pub fn resolve(self, u: Format) -> f64 {
        match self {
            Tolerance::UnitRoundoffs(k) => k * u.unit_roundoff(),
            Tolerance::Absolute(t) => t,
        }
    }
}

impl FromStr for Tolerance {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        let bad = || CliError::Usage(format!("bad tolerance `{s}` (use e.g. 4u or 1e-12)"));
        let tol = match s.strip_suffix('u') {
            Some("") => Tolerance::UnitRoundoffs(1.0),
            Some(k) => Tolerance::UnitRoundoffs(k.parse().map_err(|_| bad())?),
            None => Tolerance::Absolute(s.parse().map_err(|_| bad())?),
        };
        let v = match tol {
            Tolerance::UnitRoundoffs(v) | Tolerance::Absolute(v) => v,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("tolerance must be positive, got `{s}`")));
        }
        Ok(tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub mode: Mode,
    /// `None` picks mp4 for synthetic `c < 6` and single otherwise.
    pub factor_format: Option<Format>,
    pub u: Format,
    pub u_a: Format,
    pub u_l: Format,
    pub u_r: Format,
    pub u_l_list: Vec<Format>,
    pub u_r_list: Vec<Format>,
    pub tol: Tolerance,
    pub maxit: usize,
    pub out: Option<PathBuf>,
    /// The merged key-value settings the config was built from.
    pub settings: BTreeMap<String, String>,
}

/// Parses the flat `key = value` format. `#` starts a comment.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .or_else(|| line.split_once(char::is_whitespace))
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let k = k.trim().trim_start_matches("--");
        if !KEYS.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{k}`", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn format_of(key: &str, v: &str) -> Result<Format, CliError> {
    Format::by_name(v).map_err(|_| CliError::Usage(format!("unknown format `{v}` for {key}")))
}

fn format_list(key: &str, v: &str) -> Result<Vec<Format>, CliError> {
    let list: Vec<Format> = v.split(',').filter(|s| !s.trim().is_empty()).map(|s| format_of(key, s)).collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(CliError::Usage(format!("{key} must not be empty")));
    }
    Ok(list)
}

impl ExperimentConfig {
    pub fn from_settings(settings: BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(k) = settings.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown setting `{k}`")));
        }
        let get = |k: &str| settings.get(k).map(String::as_str);
        let problem = get("problem").ok_or_else(|| CliError::Usage("missing --problem".into()))?.parse()?;
        let mode = match get("precond") {
            Some(m) => m.parse::<Mode>().map_err(|_| CliError::Usage(format!("unknown preconditioner mode `{m}`")))?,
            None => Mode::Split,
        };
        let fmt = |k: &str| get(k).map_or(Ok(Format::DOUBLE), |v| format_of(k, v));
        let factor_format = get("factor-format").map(|v| format_of("factor-format", v)).transpose()?;
        let (u, u_a, u_l, u_r) = (fmt("u")?, fmt("uA")?, fmt("uL")?, fmt("uR")?);
        let list = |k: &str| get(k).map_or(Ok(GRID_FORMATS.to_vec()), |v| format_list(k, v));
        let tol = get("tol").map_or(Ok(Tolerance::UnitRoundoffs(4.0)), str::parse)?;
        let maxit = match get("maxit") {
            Some(v) => v.parse().map_err(|_| CliError::Usage(format!("bad maxit `{v}`")))?,
            None => 200,
        };
        if maxit == 0 {
            return Err(CliError::Usage("maxit must be positive".into()));
        }
        Ok(ExperimentConfig {
            problem,
            mode,
            factor_format,
            u,
            u_a,
            u_l,
            u_r,
            u_l_list: list("uL-list")?,
            u_r_list: list("uR-list")?,
            tol,
            maxit,
            out: get("out").map(PathBuf::from),
            settings,
        })
    }

    /// The fixed-`u_L`, `u_R` configuration used by `solve`.
    pub fn precisions(&self) -> PrecisionConfig {
        self.precisions_with(self.u_l, self.u_r)
    }

    pub fn precisions_with(&self, u_l: Format, u_r: Format) -> PrecisionConfig {
        PrecisionConfig::new(self.u, self.u_a, u_l, u_r)
    }

    pub fn factor_format(&self) -> Format {
        match (self.factor_format, &self.problem) {
            (Some(f), _) => f,
            (None, ProblemSpec::Synthetic { c, .. }) if *c < 6.0 => Format::MP4,
            _ => Format::SINGLE,
        }
    }

    /// SHA-256 of the merged settings in canonical order. The output
    /// directory does not change results and is left out.
    pub fn hash(&self) -> String {
        let canonical: String =
            self.settings.iter().filter(|(k, _)| k.as_str() != "out").map(|(k, v)| format!("{k}={v}\n")).collect();
        Sha256::digest(canonical.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn problem_specs() {
        assert_eq!(
            "synthetic:c=5,n=200,seed=1".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Synthetic { n: 200, c: 5.0, seed: 1 }
        );
        assert_eq!("synthetic:c=2".parse::<ProblemSpec>().unwrap(), ProblemSpec::Synthetic { n: 200, c: 2.0, seed: 1 });
        assert_eq!(
            "file:/data/a,b.mtx,seed=4".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::File { path: "/data/a,b.mtx".into(), seed: 4 }
        );
        assert!("synthetic:n=20".parse::<ProblemSpec>().is_err());
        assert!("synthetic:c=1,k=2".parse::<ProblemSpec>().is_err());
        assert!("random:c=1".parse::<ProblemSpec>().is_err());
    }

    #[test]
    fn tolerances() {
        assert_eq!("4u".parse::<Tolerance>().unwrap().resolve(Format::DOUBLE), 4.0 * 2f64.powi(-53));
        assert_eq!("1e-10".parse::<Tolerance>().unwrap().resolve(Format::DOUBLE), 1e-10);
        assert!("0".parse::<Tolerance>().is_err());
        assert!("-4u".parse::<Tolerance>().is_err());
        assert!("fast".parse::<Tolerance>().is_err());
    }

    #[test]
    fn settings_file_parsing() {
        let s = parse_settings("# experiment\nproblem = synthetic:c=3\n\nuL single  # low\n--maxit=50\n").unwrap();
        assert_eq!(s["problem"], "synthetic:c=3");
        assert_eq!(s["uL"], "single");
        assert_eq!(s["maxit"], "50");
        assert!(parse_settings("speed = 3").is_err());
        assert!(parse_settings("problem").is_err());
    }

    #[test]
    fn defaults_and_factor_format() {
        let cfg = ExperimentConfig::from_settings(settings(&[("problem", "synthetic:c=5")])).unwrap();
        assert_eq!(cfg.mode, Mode::Split);
        assert_eq!(cfg.maxit, 200);
        assert_eq!(cfg.factor_format(), Format::MP4);
        assert_eq!(cfg.u_l_list.len(), 4);
        let cfg = ExperimentConfig::from_settings(settings(&[("problem", "synthetic:c=6")])).unwrap();
        assert_eq!(cfg.factor_format(), Format::SINGLE);
        assert!(ExperimentConfig::from_settings(settings(&[])).is_err());
        assert!(ExperimentConfig::from_settings(settings(&[("problem", "synthetic:c=1"), ("uL", "fp8")])).is_err());
    }

    #[test]
    fn hash_depends_only_on_settings() {
        let a = ExperimentConfig::from_settings(settings(&[("problem", "synthetic:c=1"), ("uL", "single")])).unwrap();
        let b = ExperimentConfig::from_settings(settings(&[("uL", "single"), ("problem", "synthetic:c=1")])).unwrap();
        let c = ExperimentConfig::from_settings(settings(&[("problem", "synthetic:c=1"), ("uL", "half")])).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
