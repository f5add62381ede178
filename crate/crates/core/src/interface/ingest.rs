//! Reader for interface profile data.
//!
//! One file per inlet velocity:
//!
//! ```text
//! # u_in = 0.333
//! x_m,T_w_K,X_I
//! 0.0,310.2,4.01e-4
//! ...
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ProfileSample {
    pub x_m: f64,
    #[serde(rename = "T_w_K")]
    pub t_wall: f64,
    #[serde(rename = "X_I")]
    pub x_interface: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileData {
    pub u_in: f64,
    pub samples: Vec<ProfileSample>,
}

impl ProfileData {
    /// `(T_w, X_I)` pairs for the logistic fit.
    pub fn fit_samples(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t_wall, s.x_interface)).collect()
    }
}

pub fn read_profile_csv(path: &Path) -> Result<ProfileData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profile(&text).map_err(|message| Error::Ingest {
        path: path.to_path_buf(),
        message,
    })
}

fn parse_profile(text: &str) -> std::result::Result<ProfileData, String> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let u_in = first
        .trim()
        .strip_prefix('#')
        .and_then(|s| s.trim().strip_prefix("u_in"))
        .and_then(|s| s.trim().strip_prefix('='))
        .ok_or_else(|| "first line must be a `# u_in = <m/s>` comment".to_string())?
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad inlet velocity: {e}"))?;
    if !(u_in > 0.0) {
        return Err(format!("inlet velocity must be positive, got {u_in}"));
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rest.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x_m", "T_w_K", "X_I"] {
        return Err(format!("expected header x_m,T_w_K,X_I, found {:?}", headers.iter().collect::<Vec<_>>()));
    }
    let samples = reader
        .deserialize()
        .collect::<std::result::Result<Vec<ProfileSample>, _>>()
        .map_err(|e| e.to_string())?;
    if samples.is_empty() {
        return Err("no data rows".into());
    }
    Ok(ProfileData { u_in, samples })
}
