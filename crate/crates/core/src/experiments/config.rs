//! Run configuration: defaults, `key=value` config files, and the canonical
//! hash recorded in every output header.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// KL truncation / parameter dimension.
    pub parameter_dim: usize,
    /// PCE orders built and compared.
    pub orders: Vec<u32>,
    /// observation noise σ
    pub noise_sd: f64,
    /// θ₁ sweep bounds (inclusive); experiments fall back to their own
    /// defaults when unset.
    pub theta1_range: Option<(i64, i64)>,
    pub theta2: f64,
    pub theta3: f64,
    /// implicit-sampling particle count
    pub particles: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub cells_per_side: usize,
    /// gradient-norm tolerance passed to the mode search on elliptic
    /// posteriors (their F is only resolvable to CG accuracy)
    pub mode_tol: f64,
    pub metropolis_steps: usize,
    pub metropolis_step_sd: f64,
    /// burn-in fraction dropped from chains
    pub metropolis_burn_in: f64,
    /// small-noise toy: "linear" or "cubic"
    pub toy: String,
    pub toy_data: f64,
    pub toy_noise_sd: f64,
    pub toy_cubic_coeff: f64,
    /// truncation order for the claim-2 curve
    pub toy_order: u32,
    pub eps_list: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            parameter_dim: 3,
            orders: vec![4, 8],
            noise_sd: 0.05,
            theta1_range: None,
            theta2: -1.0,
            theta3: 1.0,
            particles: 20,
            seed: 2161,
            out_dir: PathBuf::from("out"),
            cells_per_side: 16,
            mode_tol: 1e-3,
            metropolis_steps: 50_000,
            metropolis_step_sd: 0.3,
            metropolis_burn_in: 0.2,
            toy: "cubic".into(),
            toy_data: 3.6,
            toy_noise_sd: 1.0,
            toy_cubic_coeff: 0.2,
            toy_order: 1,
            eps_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
        }
    }
}

impl ExperimentConfig {
    /// Reads `key=value` lines over the defaults. Lines starting with `#`
    /// and blank lines are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
            })?;
            cfg.apply_kv(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value for {what}: {value}"));
        match key {
            "m" | "parameter_dim" => self.parameter_dim = value.parse().map_err(|_| bad(key))?,
            "orders" => {
                self.orders = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad(key)))
                    .collect::<Result<_>>()?
            }
            "sigma" | "noise_sd" => self.noise_sd = value.parse().map_err(|_| bad(key))?,
            "theta1_range" => self.theta1_range = Some(parse_range(value)?),
            "theta2" => self.theta2 = value.parse().map_err(|_| bad(key))?,
            "theta3" => self.theta3 = value.parse().map_err(|_| bad(key))?,
            "particles" => self.particles = value.parse().map_err(|_| bad(key))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key))?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "cells_per_side" => self.cells_per_side = value.parse().map_err(|_| bad(key))?,
            "mode_tol" => self.mode_tol = value.parse().map_err(|_| bad(key))?,
            "metropolis_steps" => self.metropolis_steps = value.parse().map_err(|_| bad(key))?,
            "metropolis_step_sd" => {
                self.metropolis_step_sd = value.parse().map_err(|_| bad(key))?
            }
            "metropolis_burn_in" => {
                self.metropolis_burn_in = value.parse().map_err(|_| bad(key))?
            }
            "toy" => match value {
                "linear" | "cubic" => self.toy = value.into(),
                _ => return Err(bad(key)),
            },
            "toy_d" | "toy_data" => self.toy_data = value.parse().map_err(|_| bad(key))?,
            "toy_sigma" | "toy_noise_sd" => {
                self.toy_noise_sd = value.parse().map_err(|_| bad(key))?
            }
            "toy_c" | "toy_cubic_coeff" => {
                self.toy_cubic_coeff = value.parse().map_err(|_| bad(key))?
            }
            "toy_order" => self.toy_order = value.parse().map_err(|_| bad(key))?,
            "eps_list" => {
                self.eps_list = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad(key)))
                    .collect::<Result<_>>()?
            }
            _ => return Err(Error::Config(format!("unknown config key: {key}"))),
        }
        Ok(())
    }

    /// θ₁ sweep as a list of integers, falling back to `default`.
    pub fn theta1_values(&self, default: (i64, i64)) -> Vec<i64> {
        let (lo, hi) = self.theta1_range.unwrap_or(default);
        (lo..=hi).collect()
    }

    /// Canonical, sorted `key=value` rendering; the config hash is stable
    /// under field-order changes.
    pub fn canonical_string(&self) -> String {
        let orders: Vec<String> = self.orders.iter().map(u32::to_string).collect();
        let eps: Vec<String> = self.eps_list.iter().map(|e| format!("{e:e}")).collect();
        let range = match self.theta1_range {
            Some((a, b)) => format!("{a}:{b}"),
            None => "default".into(),
        };
        let mut lines = vec![
            format!("cells_per_side={}", self.cells_per_side),
            format!("eps_list={}", eps.join(",")),
            format!("metropolis_burn_in={}", self.metropolis_burn_in),
            format!("metropolis_step_sd={}", self.metropolis_step_sd),
            format!("metropolis_steps={}", self.metropolis_steps),
            format!("mode_tol={:e}", self.mode_tol),
            format!("noise_sd={}", self.noise_sd),
            format!("orders={}", orders.join(",")),
            format!("parameter_dim={}", self.parameter_dim),
            format!("particles={}", self.particles),
            format!("seed={}", self.seed),
            format!("theta1_range={range}"),
            format!("theta2={}", self.theta2),
            format!("theta3={}", self.theta3),
            format!("toy={}", self.toy),
            format!("toy_cubic_coeff={}", self.toy_cubic_coeff),
            format!("toy_data={}", self.toy_data),
            format!("toy_noise_sd={}", self.toy_noise_sd),
            format!("toy_order={}", self.toy_order),
        ];
        lines.sort();
        lines.join("\n")
    }

    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_string().as_bytes())
    }
}

fn parse_range(value: &str) -> Result<(i64, i64)> {
    let (a, b) = value
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("theta1 range must be a:b, got {value}")))?;
    let lo: i64 = a
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad range bound: {a}")))?;
    let hi: i64 = b
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad range bound: {b}")))?;
    if lo > hi {
        return Err(Error::Config(format!("empty theta1 range {lo}:{hi}")));
    }
    Ok((lo, hi))
}

/// FNV-1a, fixed here so config hashes are stable across toolchains.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Stream-splitting seed derivation: tasks get independent, reproducible
/// seeds from `(master, domain, index)` via a splitmix64 finalizer.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    let mut z = master
        ^ domain.wrapping_mul(0x9E3779B97F4A7C15)
        ^ index.wrapping_mul(0xD1B54A32D192ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
