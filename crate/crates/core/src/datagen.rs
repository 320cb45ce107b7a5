//! Sampling of the two-class Gaussian mixture with corrupted training labels.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::{Error, Real, Result};

/// Model and experiment parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConfig {
    pub n: usize,
    pub d: usize,
    pub c: f64,
    pub r: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for ProblemConfig {
    /// The nominal experiment: n = 200, d = 2000, c = 0.2, r = 0.8, σ = 2.
    fn default() -> Self {
        Self { n: 200, d: 2000, c: 0.2, r: 0.8, sigma: 2.0, lambda: 1.0, seed: 0 }
    }
}

pub const CONFIG_KEYS: [&str; 7] = ["n", "d", "c", "r", "sigma", "lambda", "seed"];

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::invalid(format!("n must be a positive even integer, got {}", self.n)));
        }
        if self.d <= self.n {
            return Err(Error::invalid(format!("need d > n, got d = {} and n = {}", self.d, self.n)));
        }
        if !(0.0..0.5).contains(&self.c) {
            return Err(Error::invalid(format!("c must lie in [0, 0.5), got {}", self.c)));
        }
        if !(-1.0..=1.0).contains(&self.r) {
            return Err(Error::invalid(format!("r must lie in [-1, 1], got {}", self.r)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if self.flips_per_class() >= self.n / 2 {
            return Err(Error::invalid("round(c n / 2) must be below n / 2"));
        }
        Ok(())
    }

    /// `round(c n / 2)`, the number of flipped labels in each class.
    pub fn flips_per_class(&self) -> usize {
        (self.c * self.n as f64 / 2.0).round() as usize
    }

    /// Corruption rate actually realized after rounding the flip count.
    pub fn realized_c(&self) -> f64 {
        self.flips_per_class() as f64 / (self.n as f64 / 2.0)
    }

    /// Copy of the config with `c` replaced by its realized value.
    pub fn with_realized_c(&self) -> Self {
        Self { c: self.realized_c(), ..*self }
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// unknown or repeated keys are rejected. Missing keys keep their
    /// nominal defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = [false; 7];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = CONFIG_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Parse(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::Parse(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one field from its decimal text.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
            value
                .parse()
                .map_err(|_| Error::Parse(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "n" => self.n = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "c" => self.c = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!(
            "n = {}\nd = {}\nc = {:?}\nr = {:?}\nsigma = {:?}\nlambda = {:?}\nseed = {}\n",
            self.n, self.d, self.c, self.r, self.sigma, self.lambda, self.seed
        )
    }
}

/// Purposes that each get their own ChaCha20 stream under a trial seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Means = 0,
    Noise = 1,
    Corruption = 2,
    Test = 3,
    Scores = 4,
}

/// ChaCha20 keyed by `seed` on the stream reserved for `purpose`. Streams
/// never overlap, so each purpose consumes randomness independently.
pub fn stream_rng(seed: u64, purpose: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Means<T> {
    pub mu1: Array1<T>,
    pub mu2: Array1<T>,
}

impl<T: Real> Means<T> {
    pub fn dim(&self) -> usize {
        self.mu1.len()
    }

    /// Sample correlation of the coordinate pairs.
    pub fn empirical_correlation(&self) -> f64 {
        let d = self.dim() as f64;
        let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (a, b) in self.mu1.iter().zip(&self.mu2) {
            let (a, b) = (a.as_f64(), b.as_f64());
            s1 += a;
            s2 += b;
            s11 += a * a;
            s22 += b * b;
            s12 += a * b;
        }
        let cov = s12 / d - s1 * s2 / (d * d);
        let v1 = s11 / d - s1 * s1 / (d * d);
        let v2 = s22 / d - s2 * s2 / (d * d);
        cov / (v1 * v2).sqrt()
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Coordinate pairs `(mu1_i, mu2_i)` iid bivariate normal, unit variances,
/// correlation `r`.
pub fn sample_means<T: Real>(d: usize, r: f64, rng: &mut impl Rng) -> Result<Means<T>> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("correlation must lie in [-1, 1], got {r}")));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let s = (1.0 - r * r).sqrt();
    let mut mu1 = Array1::zeros(d);
    let mut mu2 = Array1::zeros(d);
    for i in 0..d {
        let a = normal(rng);
        let b = normal(rng);
        mu1[i] = T::lit(a);
        mu2[i] = T::lit(r * a + s * b);
    }
    Ok(Means { mu1, mu2 })
}

/// One sampled training problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmInstance<T> {
    pub config: ProblemConfig,
    pub means: Means<T>,
    /// `n x d` design, rows `0..n/2` centered at `mu1`, the rest at `mu2`.
    pub x: Array2<T>,
    pub z_clean: Array1<T>,
    pub z: Array1<T>,
    pub corrupted: Vec<bool>,
}

/// Builds `X = A + M` with iid `N(0, sigma^2)` noise and flips exactly
/// `round(c n / 2)` labels, chosen uniformly without replacement, in each
/// class.
pub fn build_training_set<T: Real>(
    means: &Means<T>,
    config: &ProblemConfig,
    noise_rng: &mut impl Rng,
    corruption_rng: &mut impl Rng,
) -> Result<GmmInstance<T>> {
    config.validate()?;
    let (n, d) = (config.n, config.d);
    if means.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "means have length {} but config has d = {d}",
            means.dim()
        )));
    }
    let half = n / 2;
    let sigma = config.sigma;
    let mut x = Array2::zeros((n, d));
    for (i, mut row) in x.axis_iter_mut(Axis(0)).enumerate() {
        let mu = if i < half { &means.mu1 } else { &means.mu2 };
        for (xij, &m) in row.iter_mut().zip(mu) {
            *xij = m + T::lit(sigma * normal(noise_rng));
        }
    }
    let z_clean = Array1::from_shape_fn(n, |i| if i < half { T::one() } else { -T::one() });
    let k = config.flips_per_class();
    let mut corrupted = vec![false; n];
    for offset in [0, half] {
        for j in index::sample(corruption_rng, half, k) {
            corrupted[offset + j] = true;
        }
    }
    let z = Array1::from_shape_fn(n, |i| if corrupted[i] { -z_clean[i] } else { z_clean[i] });
    Ok(GmmInstance { config: *config, means: means.clone(), x, z_clean, z, corrupted })
}

/// `(x, label)` with the class drawn uniformly and `x ~ N(mu_class, sigma^2 I)`.
pub fn sample_test_point<T: Real>(means: &Means<T>, sigma: f64, rng: &mut impl Rng) -> (Array1<T>, T) {
    let first = rng.random_bool(0.5);
    let mu = if first { &means.mu1 } else { &means.mu2 };
    let x = mu.mapv(|m| m + T::lit(sigma * normal(rng)));
    (x, if first { T::one() } else { -T::one() })
}

impl<T: Real> GmmInstance<T> {
    /// Samples means and training set from `config.seed` using the
    /// per-purpose streams.
    pub fn sample(config: &ProblemConfig) -> Result<Self> {
        config.validate()?;
        let means = sample_means(config.d, config.r, &mut stream_rng(config.seed, Stream::Means))?;
        build_training_set(
            &means,
            config,
            &mut stream_rng(config.seed, Stream::Noise),
            &mut stream_rng(config.seed, Stream::Corruption),
        )
    }

    pub fn corruption_count(&self) -> usize {
        self.corrupted.iter().filter(|&&b| b).count()
    }

    pub fn realized_c(&self) -> f64 {
        self.corruption_count() as f64 / self.config.n as f64
    }

    /// Empirical means of the two row blocks.
    pub fn class_means(&self) -> (Array1<T>, Array1<T>) {
        let half = self.config.n / 2;
        let m1 = self.x.slice(ndarray::s![..half, ..]).mean_axis(Axis(0)).unwrap();
        let m2 = self.x.slice(ndarray::s![half.., ..]).mean_axis(Axis(0)).unwrap();
        (m1, m2)
    }

    /// Text dump: a header `n d c r sigma seed`, then one line per row with
    /// the entries of `X` followed by `z`.
    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        let c = &self.config;
        writeln!(out, "{} {} {:?} {:?} {:?} {}", c.n, c.d, c.c, c.r, c.sigma, c.seed)?;
        let mut line = String::new();
        for (row, zi) in self.x.axis_iter(Axis(0)).zip(&self.z) {
            line.clear();
            for v in row {
                write!(line, "{:?} ", v.as_f64()).unwrap();
            }
            writeln!(line, "{:?}", zi.as_f64()).unwrap();
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Reads the text dump back as `(header fields, X, z)`.
pub fn read_text_dump(input: impl BufRead) -> Result<(ProblemConfig, Array2<f64>, Array1<f64>)> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty dump".into()))??;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 {
        return Err(Error::Parse("dump header needs n d c r sigma seed".into()));
    }
    let bad = |what: &str| Error::Parse(format!("bad {what} in dump header"));
    let cfg = ProblemConfig {
        n: h[0].parse().map_err(|_| bad("n"))?,
        d: h[1].parse().map_err(|_| bad("d"))?,
        c: h[2].parse().map_err(|_| bad("c"))?,
        r: h[3].parse().map_err(|_| bad("r"))?,
        sigma: h[4].parse().map_err(|_| bad("sigma"))?,
        lambda: 0.0,
        seed: h[5].parse().map_err(|_| bad("seed"))?,
    };
    let mut x = Array2::zeros((cfg.n, cfg.d));
    let mut z = Array1::zeros(cfg.n);
    for i in 0..cfg.n {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number `{t}` in row {i}"))))
            .collect::<Result<_>>()?;
        if vals.len() != cfg.d + 1 {
            return Err(Error::Parse(format!("row {i} has {} fields, expected {}", vals.len(), cfg.d + 1)));
        }
        for j in 0..cfg.d {
            x[[i, j]] = vals[j];
        }
        z[i] = vals[cfg.d];
    }
    Ok((cfg, x, z))
}
