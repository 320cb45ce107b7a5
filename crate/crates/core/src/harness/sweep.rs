use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::table::CsvWriter;
use super::{run_trial, RegKind, TrialRecord};
use crate::{Error, ProblemConfig, Result};

/// A config field that a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepParam {
    N,
    D,
    C,
    R,
    Sigma,
    Lambda,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] =
        [SweepParam::N, SweepParam::D, SweepParam::C, SweepParam::R, SweepParam::Sigma, SweepParam::Lambda];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::D => "d",
            SweepParam::C => "c",
            SweepParam::R => "r",
            SweepParam::Sigma => "sigma",
            SweepParam::Lambda => "lambda",
        }
    }

    /// The swept value stored in a record. For `c` this is the nominal rate.
    pub fn value_of(self, rec: &TrialRecord) -> f64 {
        match self {
            SweepParam::N => rec.n as f64,
            SweepParam::D => rec.d as f64,
            SweepParam::C => rec.c_nominal,
            SweepParam::R => rec.r,
            SweepParam::Sigma => rec.sigma,
            SweepParam::Lambda => rec.lambda,
        }
    }

    pub fn apply(self, base: &ProblemConfig, value: f64) -> Result<ProblemConfig> {
        let mut cfg = *base;
        let count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::Parse(format!("`{}` values must be positive integers, got {v}", self.as_str())))
            }
        };
        match self {
            SweepParam::N => cfg.n = count(value)?,
            SweepParam::D => cfg.d = count(value)?,
            SweepParam::C => cfg.c = value,
            SweepParam::R => cfg.r = value,
            SweepParam::Sigma => cfg.sigma = value,
            SweepParam::Lambda => cfg.lambda = value,
        }
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("cannot sweep `{s}` (expected one of n, d, c, r, sigma, lambda)")))
    }
}

/// One experiment: a base config with exactly one field varied.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ProblemConfig,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub regularizers: Vec<RegKind>,
    pub output: PathBuf,
}

fn parse_list<V>(text: &str, item: impl Fn(&str) -> Result<V>) -> Result<Vec<V>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

/// `logspace(a, b, k)`: `k` points `10^a ..= 10^b`, evenly spaced in the exponent.
fn parse_values(text: &str) -> Result<Vec<f64>> {
    if let Some(args) = text.strip_prefix("logspace(").and_then(|s| s.strip_suffix(')')) {
        let parts = parse_list(args, parse_f64)?;
        let [a, b, k] = parts[..] else {
            return Err(Error::Parse("logspace takes (start, stop, count)".into()));
        };
        if !(k >= 1.0 && k.fract() == 0.0) {
            return Err(Error::Parse(format!("logspace count must be a positive integer, got {k}")));
        }
        let k = k as usize;
        return Ok((0..k)
            .map(|i| if k == 1 { 10f64.powf(a) } else { 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64) })
            .collect());
    }
    parse_list(text, parse_f64)
}

/// `a..b` (half-open) or a comma list.
fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad seed `{s}`")));
    if let Some((a, b)) = text.split_once("..") {
        return Ok((int(a)?..int(b)?).collect());
    }
    parse_list(text, int)
}

impl SweepSpec {
    /// Parses `key = value` lines: any config key sets the base config, plus
    /// `sweep`, `values`, `seeds`, `regularizers` and `output`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut base = ProblemConfig::default();
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_owned(), value.to_owned()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            match key {
                "sweep" | "values" | "seeds" | "regularizers" | "output" => {}
                _ if crate::datagen::CONFIG_KEYS.contains(&key) => base.set(key, value)?,
                _ => return Err(Error::Parse(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        let get = |k: &str| seen.get(k).ok_or_else(|| Error::Parse(format!("sweep spec needs `{k}`")));
        let param: SweepParam = get("sweep")?.parse()?;
        if seen.contains_key(param.as_str()) {
            return Err(Error::Parse(format!("`{param}` is swept and cannot also be fixed")));
        }
        let spec = Self {
            base,
            param,
            values: parse_values(get("values")?)?,
            seeds: seen.get("seeds").map(|s| parse_seeds(s)).transpose()?.unwrap_or_else(|| vec![0]),
            regularizers: parse_list(get("regularizers")?, str::parse)?,
            output: seen
                .get("output")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(format!("sweep_{param}.csv"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Every trial config, checked up front.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() || self.regularizers.is_empty() {
            return Err(Error::invalid("a sweep needs at least one value, seed and regularizer"));
        }
        for &v in &self.values {
            self.param.apply(&self.base, v)?.validate()?;
        }
        Ok(())
    }

    pub fn trial_count(&self) -> usize {
        self.values.len() * self.seeds.len() * self.regularizers.len()
    }

    /// Trial configs in canonical order: value, then seed, then regularizer.
    pub fn trials(&self) -> Result<Vec<(ProblemConfig, RegKind)>> {
        let mut out = Vec::with_capacity(self.trial_count());
        for &v in &self.values {
            let cfg = self.param.apply(&self.base, v)?;
            for &s in &self.seeds {
                for &reg in &self.regularizers {
                    out.push((ProblemConfig { seed: trial_seed(self.base.seed, v, s, reg), ..cfg }, reg));
                }
            }
        }
        Ok(out)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Sub-seed of one trial. It depends on the swept value itself rather than
/// its position in the list, so adding values leaves existing rows intact.
pub fn trial_seed(master: u64, value: f64, seed: u64, reg: RegKind) -> u64 {
    let code = match reg {
        RegKind::L2 => 1,
        RegKind::L1 => 2,
        RegKind::LInf => 3,
    };
    [value.to_bits(), seed, code].into_iter().fold(splitmix64(master), |h, x| splitmix64(h ^ x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub records: Vec<TrialRecord>,
    pub path: PathBuf,
    /// Records excluded from seed averages because the solver hit its cap.
    pub excluded: usize,
}

fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Runs every trial of `spec`, writing rows to `<output>.partial` as they
/// finish and renaming it over `output` at the end.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    run_sweep_with(spec, |_| {})
}

/// [`run_sweep`] with a callback after each row.
pub fn run_sweep_with(spec: &SweepSpec, mut on_row: impl FnMut(&TrialRecord)) -> Result<SweepReport> {
    spec.validate()?;
    let trials = spec.trials()?;
    let tmp = partial_path(&spec.output);
    let file = File::create(&tmp)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", tmp.display()))))?;
    let mut writer = CsvWriter::new(BufWriter::new(file))?;
    let mut records = Vec::with_capacity(trials.len());
    for (cfg, reg) in trials {
        let rec = run_trial(&cfg, reg)?;
        writer.write(&rec)?;
        on_row(&rec);
        records.push(rec);
    }
    drop(writer.into_inner()?);
    fs::rename(&tmp, &spec.output)?;
    let excluded = records.iter().filter(|r| !r.solver_converged).count();
    Ok(SweepReport { records, path: spec.output.clone(), excluded })
}

/// Mean of each column over the converged seeds of one (regularizer, value) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedAverage {
    pub regularizer: RegKind,
    pub value: f64,
    pub count: usize,
    pub excluded: usize,
    pub sim_error: f64,
    pub pred_error: f64,
    pub approx_error: Option<f64>,
    pub onebit_error: f64,
    pub sparsified_error: Option<f64>,
    pub nnz_empirical: Option<f64>,
    pub sparsity_pred: Option<f64>,
    pub bound_count_empirical: Option<f64>,
    pub bound_count_pred: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}

fn mean_opt(rows: &[&TrialRecord], f: impl Fn(&TrialRecord) -> Option<f64>) -> Option<f64> {
    let xs: Option<Vec<f64>> = rows.iter().map(|r| f(r)).collect();
    xs.filter(|v| !v.is_empty()).map(|v| mean(v.into_iter()))
}

/// Groups by regularizer and swept value (in order of first appearance) and
/// averages over seeds. Non-converged records are left out and counted in
/// `excluded`; a cell with no converged record has NaN means.
pub fn seed_averages(records: &[TrialRecord], param: SweepParam) -> Vec<SeedAverage> {
    let mut keys: Vec<(RegKind, u64)> = Vec::new();
    for r in records {
        let k = (r.regularizer, param.value_of(r).to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(reg, bits)| {
            let cell: Vec<&TrialRecord> =
                records.iter().filter(|r| r.regularizer == reg && param.value_of(r).to_bits() == bits).collect();
            let kept: Vec<&TrialRecord> = cell.iter().copied().filter(|r| r.solver_converged).collect();
            SeedAverage {
                regularizer: reg,
                value: f64::from_bits(bits),
                count: kept.len(),
                excluded: cell.len() - kept.len(),
                sim_error: mean(kept.iter().map(|r| r.sim_error)),
                pred_error: mean(kept.iter().map(|r| r.pred_error)),
                approx_error: mean_opt(&kept, |r| r.approx_error),
                onebit_error: mean(kept.iter().map(|r| r.onebit_error)),
                sparsified_error: mean_opt(&kept, |r| r.sparsified_error),
                nnz_empirical: mean_opt(&kept, |r| r.nnz_empirical.map(|v| v as f64)),
                sparsity_pred: mean_opt(&kept, |r| r.sparsity_pred.map(|v| v as f64)),
                bound_count_empirical: mean_opt(&kept, |r| r.bound_count_empirical.map(|v| v as f64)),
                bound_count_pred: mean_opt(&kept, |r| r.bound_count_pred.map(|v| v as f64)),
            }
        })
        .collect()
}
