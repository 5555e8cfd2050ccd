use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of sweep cells.
pub const DEFAULT_MAX_CELLS: usize = 10_000;
/// Output directory when neither the config, `--out` nor `MACRODEC_OUT` set one.
pub const DEFAULT_OUTPUT_DIR: &str = "macrodec-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    OverlapScan,
    DoubleSlit,
    BathSpin,
    BathGue,
    RecurrenceScan,
    Measure,
    Doublet,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::OverlapScan,
        ExperimentKind::DoubleSlit,
        ExperimentKind::BathSpin,
        ExperimentKind::BathGue,
        ExperimentKind::RecurrenceScan,
        ExperimentKind::Measure,
        ExperimentKind::Doublet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::OverlapScan => "overlap-scan",
            ExperimentKind::DoubleSlit => "double-slit",
            ExperimentKind::BathSpin => "bath-spin",
            ExperimentKind::BathGue => "bath-gue",
            ExperimentKind::RecurrenceScan => "recurrence-scan",
            ExperimentKind::Measure => "measure",
            ExperimentKind::Doublet => "doublet",
        }
    }

    /// Accepted parameters with their kinds and default values (TOML literals).
    pub fn schema(self) -> &'static [ParamDef] {
        use ParamKind::*;
        match self {
            ExperimentKind::OverlapScan => {
                const S: &[ParamDef] = &[
                    ParamDef::new("N", Counts, "[1, 10, 100]"),
                    ParamDef::new("epsilon", Float, "0.05"),
                    ParamDef::new("sigma", Float, "1.0"),
                ];
                S
            }
            ExperimentKind::DoubleSlit => {
                const S: &[ParamDef] = &[
                    ParamDef::new("N", Counts, "[0, 1, 2, 5, 10, 20, 40]"),
                    ParamDef::new("epsilon", Float, "0.05"),
                    ParamDef::new("separation", Float, "4.0"),
                    ParamDef::new("width", Float, "0.5"),
                    ParamDef::new("mass", Float, "1.0"),
                    ParamDef::new("t", Float, "0.0"),
                    ParamDef::new("screen_points", Count, "4096"),
                ];
                S
            }
            ExperimentKind::BathSpin => {
                const S: &[ParamDef] = &[
                    ParamDef::new("N", Count, "20"),
                    ParamDef::new("pattern", Text, "\"uniform\""),
                    ParamDef::new("delta", Float, "1.0"),
                    ParamDef::new("delta_min", Float, "0.5"),
                    ParamDef::new("delta_max", Float, "1.5"),
                    ParamDef::new("t_max", Float, "20.0"),
                    ParamDef::new("n_times", Count, "2001"),
                    ParamDef::new("threshold", Float, "0.7"),
                    ParamDef::new("fit_window", Float, "0.1"),
                ];
                S
            }
            ExperimentKind::BathGue => {
                const S: &[ParamDef] = &[
                    ParamDef::new("dim", Count, "64"),
                    ParamDef::new("perturbation_strength", Float, "0.5"),
                    ParamDef::new("t_max", Float, "200.0"),
                    ParamDef::new("n_times", Count, "4001"),
                    ParamDef::new("threshold", Float, "0.7"),
                ];
                S
            }
            ExperimentKind::RecurrenceScan => {
                const S: &[ParamDef] = &[
                    ParamDef::new("dims", Counts, "[4, 8, 16, 32, 64]"),
                    ParamDef::new("seeds", Count, "20"),
                    ParamDef::new("threshold", Float, "0.7"),
                    ParamDef::new("perturbation_strength", Float, "0.5"),
                    ParamDef::new("t_max", Float, "200.0"),
                    ParamDef::new("n_times", Count, "4001"),
                ];
                S
            }
            ExperimentKind::Measure => {
                const S: &[ParamDef] = &[
                    ParamDef::new("N", Counts, "[1, 10, 100, 1000]"),
                    ParamDef::new("epsilon", Float, "0.05"),
                    ParamDef::new("alpha", Float, "0.7071067811865476"),
                    ParamDef::new("beta", Float, "0.7071067811865476"),
                    ParamDef::new("separation", Float, "0.0"),
                    ParamDef::new("sigma", Float, "1.0"),
                    ParamDef::new("n_states", Count, "50"),
                    ParamDef::new("dim", Count, "1024"),
                ];
                S
            }
            ExperimentKind::Doublet => {
                const S: &[ParamDef] = &[
                    ParamDef::new("e0", Float, "0.0"),
                    ParamDef::new("delta", Float, "0.5"),
                ];
                S
            }
        }
    }

    pub fn param(self, name: &str) -> Option<&'static ParamDef> {
        self.schema().iter().find(|d| d.name == name)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Float,
    Count,
    Counts,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
}

impl ParamDef {
    const fn new(name: &'static str, kind: ParamKind, default: &'static str) -> Self {
        ParamDef { name, kind, default }
    }

    fn default_value(&self) -> ParamValue {
        parse_value(self.default).expect("schema defaults are valid literals")
    }

    /// Checks and normalizes a value for this parameter: integers are
    /// accepted where floats are expected and a scalar count is promoted to a
    /// one-element list.
    pub fn coerce(&self, v: &ParamValue) -> Result<ParamValue> {
        let bad = || {
            Error::invalid(format!(
                "parameter `{}`: expected {}, got {v}",
                self.name,
                match self.kind {
                    ParamKind::Float => "a number",
                    ParamKind::Count => "a non-negative integer",
                    ParamKind::Counts => "a list of non-negative integers",
                    ParamKind::Text => "a string",
                }
            ))
        };
        match (self.kind, v) {
            (ParamKind::Float, ParamValue::Float(x)) => Ok(ParamValue::Float(*x)),
            (ParamKind::Float, ParamValue::Int(i)) => Ok(ParamValue::Float(*i as f64)),
            (ParamKind::Count, ParamValue::Int(i)) if *i >= 0 => Ok(ParamValue::Int(*i)),
            (ParamKind::Counts, ParamValue::Int(i)) if *i >= 0 => {
                Ok(ParamValue::List(vec![ParamValue::Int(*i)]))
            }
            (ParamKind::Counts, ParamValue::List(xs)) => {
                if xs.is_empty() {
                    return Err(Error::invalid(format!("parameter `{}`: empty list", self.name)));
                }
                for x in xs {
                    match x {
                        ParamValue::Int(i) if *i >= 0 => {}
                        _ => return Err(bad()),
                    }
                }
                Ok(v.clone())
            }
            (ParamKind::Text, ParamValue::Text(s)) => Ok(ParamValue::Text(s.clone())),
            _ => Err(bad()),
        }
    }
}

/// A configuration value as written in TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
    List(Vec<ParamValue>),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x:?}"),
            ParamValue::Text(s) => write!(f, "{s:?}"),
            ParamValue::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Parses a TOML value literal; bare words become strings.
pub fn parse_value(s: &str) -> Result<ParamValue> {
    #[derive(Deserialize)]
    struct Wrap {
        v: ParamValue,
    }
    match toml::from_str::<Wrap>(&format!("v = {s}")) {
        Ok(w) => Ok(w.v),
        Err(_) if !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || "-_./".contains(c)) => {
            Ok(ParamValue::Text(s.to_string()))
        }
        Err(e) => Err(Error::invalid(format!("cannot parse value `{s}`: {e}"))),
    }
}

/// The configuration file as written: every field optional, unknown keys rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    /// Sweep axes: a list of values per parameter.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid: BTreeMap<String, ParamValue>,
    /// Independent seeds per grid point in a sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<usize>,
}

impl RawConfig {
    /// Reads TOML, or JSON when the content starts with `{`. A run record
    /// (`run.json`, `sweep.json`) is accepted and its embedded config used.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(trimmed)
                .map_err(|e| Error::invalid(format!("config JSON: {e}")))?;
            let inner = match v.get("config") {
                Some(c) if v.get("version").is_some() => c.clone(),
                _ => v,
            };
            serde_json::from_value(inner).map_err(|e| Error::invalid(format!("config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| Error::invalid(format!("config TOML: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override. Bare keys address `params`;
    /// `grid.KEY` addresses sweep axes.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("override `{assignment}` is not key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let parsed = parse_value(value)?;
        let as_count = |v: &ParamValue| match v {
            ParamValue::Int(i) if *i >= 0 => Ok(*i as u64),
            _ => Err(Error::invalid(format!("`{key}` must be a non-negative integer"))),
        };
        match key {
            "experiment" => self.experiment = Some(value.parse()?),
            "seed" => {
                self.seed = Some(
                    value
                        .parse()
                        .map_err(|_| Error::invalid(format!("seed `{value}` is not a u64")))?,
                )
            }
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "replicates" => self.replicates = Some(as_count(&parsed)? as usize),
            "max_cells" => self.max_cells = Some(as_count(&parsed)? as usize),
            _ => {
                if let Some(k) = key.strip_prefix("grid.") {
                    self.grid.insert(k.to_string(), parsed);
                } else {
                    let k = key.strip_prefix("params.").unwrap_or(key);
                    self.params.insert(k.to_string(), parsed);
                }
            }
        }
        Ok(())
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Every schema parameter, defaults filled in.
    pub params: BTreeMap<String, ParamValue>,
}

impl ExperimentConfig {
    /// Fills defaults and validates names and types against the schema.
    pub fn resolve(raw: &RawConfig, default_output: &Path) -> Result<Self> {
        let experiment = raw
            .experiment
            .ok_or_else(|| Error::invalid("no experiment selected"))?;
        let params = resolve_params(experiment, &raw.params)?;
        Ok(ExperimentConfig {
            experiment,
            seed: raw.seed.unwrap_or(0),
            output_dir: raw
                .output_dir
                .clone()
                .unwrap_or_else(|| default_output.to_path_buf()),
            params,
        })
    }

    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            seed: 0,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            params: resolve_params(experiment, &BTreeMap::new()).expect("defaults are valid"),
        }
    }

    /// Sets one parameter after checking it against the schema.
    pub fn set(&mut self, name: &str, value: ParamValue) -> Result<&mut Self> {
        let def = self
            .experiment
            .param(name)
            .ok_or_else(|| unknown_param(self.experiment, name))?;
        self.params.insert(name.to_string(), def.coerce(&value)?);
        Ok(self)
    }

    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            experiment: Some(self.experiment),
            seed: Some(self.seed),
            output_dir: Some(self.output_dir.clone()),
            params: self.params.clone(),
            ..RawConfig::default()
        }
    }

    pub(crate) fn view(&self) -> Params<'_> {
        Params(&self.params)
    }
}

fn unknown_param(kind: ExperimentKind, name: &str) -> Error {
    let known: Vec<&str> = kind.schema().iter().map(|d| d.name).collect();
    Error::invalid(format!(
        "unknown parameter `{name}` for {kind} (accepted: {})",
        known.join(", ")
    ))
}

pub(crate) fn resolve_params(
    kind: ExperimentKind,
    given: &BTreeMap<String, ParamValue>,
) -> Result<BTreeMap<String, ParamValue>> {
    for name in given.keys() {
        if kind.param(name).is_none() {
            return Err(unknown_param(kind, name));
        }
    }
    kind.schema()
        .iter()
        .map(|d| {
            let v = match given.get(d.name) {
                Some(v) => d.coerce(v)?,
                None => d.default_value(),
            };
            Ok((d.name.to_string(), v))
        })
        .collect()
}

/// Typed read access to resolved parameters.
pub(crate) struct Params<'a>(&'a BTreeMap<String, ParamValue>);

impl Params<'_> {
    fn get(&self, name: &str) -> &ParamValue {
        self.0
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` missing from resolved config"))
    }

    pub fn float(&self, name: &str) -> f64 {
        match self.get(name) {
            ParamValue::Float(x) => *x,
            ParamValue::Int(i) => *i as f64,
            v => panic!("parameter `{name}` is not numeric: {v}"),
        }
    }

    pub fn count(&self, name: &str) -> usize {
        match self.get(name) {
            ParamValue::Int(i) => *i as usize,
            v => panic!("parameter `{name}` is not a count: {v}"),
        }
    }

    pub fn counts(&self, name: &str) -> Vec<usize> {
        match self.get(name) {
            ParamValue::List(xs) => xs
                .iter()
                .map(|x| match x {
                    ParamValue::Int(i) => *i as usize,
                    v => panic!("parameter `{name}` holds a non-count: {v}"),
                })
                .collect(),
            v => panic!("parameter `{name}` is not a list: {v}"),
        }
    }

    pub fn text(&self, name: &str) -> &str {
        match self.get(name) {
            ParamValue::Text(s) => s,
            v => panic!("parameter `{name}` is not text: {v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_config_with_defaults() {
        let raw = RawConfig::parse(
            "experiment = \"overlap-scan\"\nseed = 9\n[params]\nepsilon = 0.1\nN = [1, 2]\n",
        )
        .unwrap();
        let c = ExperimentConfig::resolve(&raw, Path::new("o")).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.output_dir, PathBuf::from("o"));
        assert_eq!(c.view().float("epsilon"), 0.1);
        assert_eq!(c.view().float("sigma"), 1.0);
        assert_eq!(c.view().counts("N"), vec![1, 2]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RawConfig::parse("experiment = \"doublet\"\nbogus = 1\n").is_err());
        let raw = RawConfig::parse("experiment = \"doublet\"\n[params]\nsigma = 1.0\n").unwrap();
        assert!(ExperimentConfig::resolve(&raw, Path::new(".")).is_err());
        assert!(RawConfig::parse("experiment = \"nope\"\n").is_err());
    }

    #[test]
    fn type_errors_rejected() {
        let mut c = ExperimentConfig::new(ExperimentKind::DoubleSlit);
        assert!(c.set("N", ParamValue::Float(1.5)).is_err());
        assert!(c.set("N", ParamValue::Int(-1)).is_err());
        assert!(c.set("epsilon", ParamValue::Text("x".into())).is_err());
        c.set("N", ParamValue::Int(3)).unwrap();
        assert_eq!(c.view().counts("N"), vec![3]);
    }

    #[test]
    fn overrides_win() {
        let mut raw = RawConfig::parse("experiment = \"doublet\"\n[params]\ndelta = 0.5\n").unwrap();
        raw.apply_override("delta=0.25").unwrap();
        raw.apply_override("params.e0 = 2").unwrap();
        raw.apply_override("seed=18446744073709551615").unwrap();
        raw.apply_override("grid.delta=[0.1, 0.2]").unwrap();
        let c = ExperimentConfig::resolve(&raw, Path::new(".")).unwrap();
        assert_eq!(c.view().float("delta"), 0.25);
        assert_eq!(c.view().float("e0"), 2.0);
        assert_eq!(c.seed, u64::MAX);
        assert_eq!(raw.grid.len(), 1);
        assert!(raw.apply_override("novalue").is_err());
    }

    #[test]
    fn bare_words_are_text() {
        assert_eq!(parse_value("random-uniform").unwrap(), ParamValue::Text("random-uniform".into()));
        assert_eq!(parse_value("3").unwrap(), ParamValue::Int(3));
        assert_eq!(parse_value("3.0").unwrap(), ParamValue::Float(3.0));
    }

    #[test]
    fn json_round_trip() {
        let mut c = ExperimentConfig::new(ExperimentKind::Measure);
        c.seed = u64::MAX - 3;
        c.set("epsilon", ParamValue::Float(0.2)).unwrap();
        let json = serde_json::to_string(&c.to_raw()).unwrap();
        let back = ExperimentConfig::resolve(&RawConfig::parse(&json).unwrap(), Path::new("x")).unwrap();
        assert_eq!(back, c);
    }
}
