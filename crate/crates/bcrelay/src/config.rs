//! JSON scenario files.
//!
//! Every field is optional and overrides the reference setup. Coordinates
//! are `[x, y]` arrays in meters; the noise density is given either as
//! `{"dbm_per_hz": -100}` or `{"w_per_hz": 1e-13}`.
//!
//! ```json
//! { "coord_r": [30, 10], "alpha1": 3.5, "Pmax": 30, "L": 40,
//!   "sigma2": { "dbm_per_hz": -100 } }
//! ```

use std::path::Path;

use anyhow::{Context, Result};
use bcrelay_core::model::dbm_per_hz_to_w;
use bcrelay_core::NetworkConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum NoiseDensity {
    #[serde(rename = "dbm_per_hz")]
    DbmPerHz(f64),
    #[serde(rename = "w_per_hz")]
    WPerHz(f64),
}

impl NoiseDensity {
    pub fn watts_per_hz(self) -> f64 {
        match self {
            NoiseDensity::DbmPerHz(v) => dbm_per_hz_to_w(v),
            NoiseDensity::WPerHz(v) => v,
        }
    }
}

/// Partial [`NetworkConfig`] as read from JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord_s: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord_r: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord_d: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_sr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_rd: Option<f64>,
    #[serde(default, rename = "Ts", skip_serializing_if = "Option::is_none")]
    pub ts: Option<f64>,
    #[serde(default, rename = "W", skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<NoiseDensity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, rename = "Pc", skip_serializing_if = "Option::is_none")]
    pub pc: Option<f64>,
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, rename = "Pmax", skip_serializing_if = "Option::is_none")]
    pub pmax: Option<f64>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
}

impl ConfigOverrides {
    pub fn apply(&self, base: &NetworkConfig) -> NetworkConfig {
        let mut c = base.clone();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(coord_s, coord_r, coord_d, alpha1, alpha2, alpha3, xi_sd, xi_sr, xi_rd, ts, w, eta, pc, p, pmax, l);
        if let Some(s) = self.sigma2 {
            c.sigma2 = s.watts_per_hz();
        }
        c
    }
}

pub fn parse_config(text: &str) -> Result<NetworkConfig> {
    let o: ConfigOverrides = serde_json::from_str(text).context("parsing scenario JSON")?;
    let cfg = o.apply(&NetworkConfig::baseline());
    cfg.validate().context("validating scenario")?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<NetworkConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_reference_setup() {
        assert_eq!(parse_config("{}").unwrap(), NetworkConfig::baseline());
    }

    #[test]
    fn noise_units() {
        let a = parse_config(r#"{"sigma2": {"dbm_per_hz": -100}}"#).unwrap();
        let b = parse_config(r#"{"sigma2": {"w_per_hz": 1e-13}}"#).unwrap();
        assert!((a.sigma2 - b.sigma2).abs() < 1e-27);
    }

    #[test]
    fn renamed_fields() {
        let c = parse_config(r#"{"Pmax": 30, "L": 40, "coord_r": [30, 10], "Ts": 0.02}"#).unwrap();
        assert_eq!((c.pmax, c.l, c.coord_r, c.ts), (30.0, 40, [30.0, 10.0], 0.02));
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(parse_config(r#"{"pmax": 30}"#).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_config(r#"{"L": 1}"#).is_err());
        assert!(parse_config(r#"{"P": 40}"#).is_err());
    }
}
