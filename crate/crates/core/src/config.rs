//! Flat `key = value` model configuration files.
//!
//! ```text
//! # lines starting with '#' are comments
//! size_factor = 1.0
//! theta_cmd_deg = 180
//! self_rotation = true
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::GaitParams;
use crate::sim::{HexapodGeometry, SimConfig};

/// Model constants as they appear in a config file. Angles are in degrees;
/// lengths are ratios of the size factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dt: f64,
    pub duration: f64,
    pub size_factor: f64,
    pub amplitude_ratio: f64,
    pub height_ratio: f64,
    pub hip_radius_ratio: f64,
    pub kappa_psi: f64,
    pub mu_drag: f64,
    pub speed_scale: f64,
    pub theta_cmd_deg: f64,
    pub self_rotation: bool,
    pub stance_torque: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        ModelConfig {
            dt: sim.dt,
            duration: sim.duration,
            size_factor: sim.params.size_factor,
            amplitude_ratio: GaitParams::AMPLITUDE_RATIO,
            height_ratio: GaitParams::HEIGHT_RATIO,
            hip_radius_ratio: SimConfig::HIP_RADIUS_RATIO,
            kappa_psi: sim.kappa_psi,
            mu_drag: sim.mu_drag,
            speed_scale: sim.speed_scale,
            theta_cmd_deg: sim.params.theta.to_degrees(),
            self_rotation: sim.self_rotation,
            stance_torque: sim.stance_torque,
        }
    }
}

const KEYS: [&str; 12] = [
    "dt",
    "duration",
    "size_factor",
    "amplitude_ratio",
    "height_ratio",
    "hip_radius_ratio",
    "kappa_psi",
    "mu_drag",
    "speed_scale",
    "theta_cmd_deg",
    "self_rotation",
    "stance_torque",
];

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(format!(
            "{key}: expected a boolean, got {value:?}"
        ))),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::config(format!("{key}: expected a finite number, got {value:?}")))
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    Error::config(format!("line {}: expected `key = value`", lineno + 1))
                })?;
            cfg.set(key, value)
                .map_err(|e| Error::config(format!("line {}: {}", lineno + 1, strip(e))))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let slot = match key {
            "dt" => &mut self.dt,
            "duration" => &mut self.duration,
            "size_factor" => &mut self.size_factor,
            "amplitude_ratio" => &mut self.amplitude_ratio,
            "height_ratio" => &mut self.height_ratio,
            "hip_radius_ratio" => &mut self.hip_radius_ratio,
            "kappa_psi" => &mut self.kappa_psi,
            "mu_drag" => &mut self.mu_drag,
            "speed_scale" => &mut self.speed_scale,
            "theta_cmd_deg" => &mut self.theta_cmd_deg,
            "self_rotation" => {
                self.self_rotation = parse_bool(key, value)?;
                return Ok(());
            }
            "stance_torque" => {
                self.stance_torque = parse_bool(key, value)?;
                return Ok(());
            }
            _ => {
                return Err(Error::config(format!(
                    "unknown key {key:?}; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        };
        *slot = parse_f64(key, value)?;
        Ok(())
    }

    /// Renders the configuration so that `parse` reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let numbers = [
            ("dt", self.dt),
            ("duration", self.duration),
            ("size_factor", self.size_factor),
            ("amplitude_ratio", self.amplitude_ratio),
            ("height_ratio", self.height_ratio),
            ("hip_radius_ratio", self.hip_radius_ratio),
            ("kappa_psi", self.kappa_psi),
            ("mu_drag", self.mu_drag),
            ("speed_scale", self.speed_scale),
            ("theta_cmd_deg", self.theta_cmd_deg),
        ];
        for (k, v) in numbers {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        let _ = writeln!(out, "self_rotation = {}", self.self_rotation);
        let _ = writeln!(out, "stance_torque = {}", self.stance_torque);
        out
    }

    pub fn to_sim(&self) -> Result<SimConfig> {
        let e = self.size_factor;
        let sim = SimConfig {
            dt: self.dt,
            duration: self.duration,
            params: GaitParams {
                amplitude: self.amplitude_ratio * e,
                height: self.height_ratio * e,
                size_factor: e,
                theta: self.theta_cmd_deg.to_radians(),
            },
            geometry: HexapodGeometry::regular(self.hip_radius_ratio * e),
            kappa_psi: self.kappa_psi,
            mu_drag: self.mu_drag,
            speed_scale: self.speed_scale,
            self_rotation: self.self_rotation,
            stance_torque: self.stance_torque,
        };
        sim.validate()?;
        Ok(sim)
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}
