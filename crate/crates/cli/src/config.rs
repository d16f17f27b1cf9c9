//! Flat key=value fit configuration and the JSON run manifest.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tetfit::fitting::FitConfig;
use tetfit::losses::LossReport;
use tetfit::GridScheme;

pub fn parse_scheme(token: &str) -> Result<GridScheme> {
    match token {
        "six" | "six-tet" | "sixtet" => Ok(GridScheme::SixTet),
        "bcc" => Ok(GridScheme::Bcc),
        other => bail!("unknown grid scheme '{other}' (expected six|bcc)"),
    }
}

pub fn scheme_name(scheme: GridScheme) -> &'static str {
    match scheme {
        GridScheme::SixTet => "six",
        GridScheme::Bcc => "bcc",
    }
}

/// Parses `key=value` lines into a config. Unknown keys are hard errors so
/// typos in weight names cannot pass silently.
pub fn parse_config(text: &str) -> Result<FitConfig<f64>> {
    let mut config = FitConfig::<f64>::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected key=value, found '{line}'", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut config, key, value)
            .with_context(|| format!("line {}: key '{key}'", lineno + 1))?;
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<FitConfig<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text)
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => bail!("expected boolean, found '{other}'"),
    }
}

fn apply_key(config: &mut FitConfig<f64>, key: &str, value: &str) -> Result<()> {
    match key {
        "base_resolution" => config.base_resolution = value.parse()?,
        "scheme" => config.scheme = parse_scheme(value)?,
        "iterations_per_level" => config.iterations_per_level = value.parse()?,
        "levels" => config.levels = value.parse()?,
        "surface_subdiv_iters" => config.surface_subdiv_iters = value.parse()?,
        "sample_count" => config.sample_count = value.parse()?,
        "step_size" => config.step_size = value.parse()?,
        "deform_step_size" => config.deform_step_size = value.parse()?,
        "step_decay" => config.step_decay = value.parse()?,
        "beta1" => config.beta1 = value.parse()?,
        "beta2" => config.beta2 = value.parse()?,
        "seed" => config.seed = value.parse()?,
        "workers" => config.workers = value.parse()?,
        "lambda_cd" => config.weights.cd = value.parse()?,
        "lambda_normal" => config.weights.normal = value.parse()?,
        "lambda_g" => config.weights.gan = value.parse()?,
        "lambda_sdf" => config.weights.sdf = value.parse()?,
        "lambda_def" => config.weights.def = value.parse()?,
        "freeze_deformation" => config.ablations.freeze_deformation = parse_bool(value)?,
        "disable_volume_subdiv" => config.ablations.disable_volume_subdiv = parse_bool(value)?,
        "disable_surface_subdiv" => config.ablations.disable_surface_subdiv = parse_bool(value)?,
        other => bail!("unknown configuration key '{other}'"),
    }
    Ok(())
}

/// Applies `--ablate` tokens onto the config.
pub fn apply_ablations(config: &mut FitConfig<f64>, list: &str) -> Result<()> {
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token {
            "no-deform" => config.ablations.freeze_deformation = true,
            "no-volume-subdiv" => config.ablations.disable_volume_subdiv = true,
            "no-surface-subdiv" => config.ablations.disable_surface_subdiv = true,
            other => bail!("unknown ablation '{other}'"),
        }
    }
    Ok(())
}

/// Structured echo of a resolved configuration; round-trips through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub base_resolution: u32,
    pub scheme: String,
    pub iterations_per_level: u32,
    pub levels: u32,
    pub surface_subdiv_iters: u32,
    pub sample_count: usize,
    pub step_size: f64,
    pub deform_step_size: f64,
    pub step_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub seed: u64,
    pub workers: usize,
    pub lambda_cd: f64,
    pub lambda_normal: f64,
    pub lambda_g: f64,
    pub lambda_sdf: f64,
    pub lambda_def: f64,
    pub freeze_deformation: bool,
    pub disable_volume_subdiv: bool,
    pub disable_surface_subdiv: bool,
}

impl From<&FitConfig<f64>> for ConfigEcho {
    fn from(c: &FitConfig<f64>) -> Self {
        ConfigEcho {
            base_resolution: c.base_resolution,
            scheme: scheme_name(c.scheme).to_string(),
            iterations_per_level: c.iterations_per_level,
            levels: c.levels,
            surface_subdiv_iters: c.surface_subdiv_iters,
            sample_count: c.sample_count,
            step_size: c.step_size,
            deform_step_size: c.deform_step_size,
            step_decay: c.step_decay,
            beta1: c.beta1,
            beta2: c.beta2,
            seed: c.seed,
            workers: c.workers,
            lambda_cd: c.weights.cd,
            lambda_normal: c.weights.normal,
            lambda_g: c.weights.gan,
            lambda_sdf: c.weights.sdf,
            lambda_def: c.weights.def,
            freeze_deformation: c.ablations.freeze_deformation,
            disable_volume_subdiv: c.ablations.disable_volume_subdiv,
            disable_surface_subdiv: c.ablations.disable_surface_subdiv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReportEcho {
    pub cd: f64,
    pub normal: f64,
    pub gan: f64,
    pub sdf: f64,
    pub def: f64,
    pub total: f64,
}

impl From<&LossReport<f64>> for LossReportEcho {
    fn from(r: &LossReport<f64>) -> Self {
        LossReportEcho {
            cd: r.terms.cd,
            normal: r.terms.normal,
            gan: r.terms.gan,
            sdf: r.terms.sdf,
            def: r.terms.def,
            total: r.total,
        }
    }
}

/// Everything a fit run leaves behind besides its data outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub config: ConfigEcho,
    pub timing_seconds: f64,
    pub outputs: BTreeMap<String, String>,
    pub final_loss: Option<LossReportEcho>,
}
