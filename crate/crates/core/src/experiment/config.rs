//! Flat `key = value` run configuration.
//!
//! Strengths (`sigma_e`, `sigma_w`, `sigma_n` and the grids) are variances,
//! the way the experiment tables quote them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fixed::FpParams;
use crate::lut::{Decoder, Strength, SystemParams};
use crate::media::STANDARD_IMAGES;
use crate::protocol::Scheme;

pub const SIGMA_W_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.3, 0.6];
pub const SIGMA_N_GRID: [f64; 2] = [0.1, 0.5];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub sys: SystemParams,
    pub fp: FpParams,
    pub decoder: Decoder,
    pub tau: u32,
    pub seeds: Vec<u64>,
    pub images: Vec<String>,
    pub image_dir: Option<PathBuf>,
    /// Side length of the square test images.
    pub size: usize,
    pub out_dir: PathBuf,
    pub sigma_w_grid: Vec<f64>,
    pub sigma_n_grid: Vec<f64>,
    /// Repetitions per tracking cell, each with fresh tables and users.
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: Scheme::One,
            sys: SystemParams {
                k: 100,
                ..SystemParams::default()
            },
            fp: FpParams::default(),
            decoder: Decoder::MatchedFilter,
            tau: 0,
            seeds: (1..=5).collect(),
            images: STANDARD_IMAGES.iter().map(|s| s.to_string()).collect(),
            image_dir: None,
            size: 512,
            out_dir: PathBuf::from("out"),
            sigma_w_grid: SIGMA_W_GRID.to_vec(),
            sigma_n_grid: SIGMA_N_GRID.to_vec(),
            trials: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse {value:?}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    /// Applies `key = value` lines on top of the current values. `#` starts
    /// a comment.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scheme" => self.scheme = value.parse()?,
            "t" => self.sys.t = parse(key, value)?,
            "l" => self.sys.l = parse(key, value)?,
            "s" => self.sys.s = parse(key, value)?,
            "k" => self.sys.k = parse(key, value)?,
            "sigma_e" => self.sys.sigma_e = Strength::from_variance(parse(key, value)?)?.amplitude(),
            "sigma_w" => self.sys.sigma_w = Strength::from_variance(parse(key, value)?)?,
            "sigma_n" => self.sys.sigma_n = Strength::from_variance(parse(key, value)?)?,
            "frac_bits" => self.fp.frac_bits = parse(key, value)?,
            "elut_bits" => self.fp.elut_bits = parse(key, value)?,
            "wlut_bits" => self.fp.wlut_bits = parse(key, value)?,
            "media_bits" => self.fp.media_bits = parse(key, value)?,
            "decoder" => self.decoder = value.parse()?,
            "tau" => self.tau = parse(key, value)?,
            "seeds" => self.seeds = list(key, value)?,
            "images" => self.images = list(key, value)?,
            "image_dir" => self.image_dir = (!value.is_empty()).then(|| PathBuf::from(value)),
            "size" => self.size = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "sigma_w_grid" => self.sigma_w_grid = list(key, value)?,
            "sigma_n_grid" => self.sigma_n_grid = list(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            other => return Err(Error::config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// System parameters with the media length implied by `size`.
    pub fn system(&self) -> SystemParams {
        self.sys.with_media_len(self.size * self.size)
    }

    pub fn validate(&self) -> Result<()> {
        self.system().validate()?;
        self.fp.validate()?;
        if self.size == 0 || !self.size.is_multiple_of(8) {
            return Err(Error::config(format!(
                "size must be a positive multiple of 8, got {}",
                self.size
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        if self.images.is_empty() {
            return Err(Error::config("at least one image is required"));
        }
        if self.trials == 0 || self.sys.k == 0 {
            return Err(Error::config("trials and k must be positive"));
        }
        for &v in self.sigma_w_grid.iter().chain(&self.sigma_n_grid) {
            Strength::from_variance(v)?;
        }
        Ok(())
    }

    /// The configuration as `key = value` text that parses back to itself.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a string");
        kv("scheme", self.scheme.to_string());
        kv("t", self.sys.t.to_string());
        kv("l", self.sys.l.to_string());
        kv("s", self.sys.s.to_string());
        kv("k", self.sys.k.to_string());
        kv("sigma_e", (self.sys.sigma_e * self.sys.sigma_e).to_string());
        kv("sigma_w", self.sys.sigma_w.variance().to_string());
        kv("sigma_n", self.sys.sigma_n.variance().to_string());
        kv("frac_bits", self.fp.frac_bits.to_string());
        kv("elut_bits", self.fp.elut_bits.to_string());
        kv("wlut_bits", self.fp.wlut_bits.to_string());
        kv("media_bits", self.fp.media_bits.to_string());
        kv("decoder", self.decoder.name().to_string());
        kv("tau", self.tau.to_string());
        kv("seeds", join(&self.seeds));
        kv("images", join(&self.images));
        kv(
            "image_dir",
            self.image_dir
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        kv("size", self.size.to_string());
        kv("out_dir", self.out_dir.display().to_string());
        kv("sigma_w_grid", join(&self.sigma_w_grid));
        kv("sigma_n_grid", join(&self.sigma_n_grid));
        kv("trials", self.trials.to_string());
        s
    }
}
