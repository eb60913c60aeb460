//! Flat binary field cache: `stem.bin` holds row-major little-endian
//! `(re, im)` f64 pairs, `stem.json` the header.

use std::fs;
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fields::{FrequencyField, SpatialField};
use super::grid::GridSpec;
use super::support::Support;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Spatial,
    Frequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub kind: FieldKind,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub support: Option<Support>,
    /// Storage order of the frequency axis; always "fft".
    pub order: String,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

fn write_pair(stem: &Path, header: &FieldHeader, values: &[Complex64]) -> Result<()> {
    let (jp, bp) = paths(stem);
    let mut bytes = Vec::with_capacity(values.len() * 16);
    for v in values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(&bp, bytes).map_err(|e| Error::io(&bp, e))?;
    let text = serde_json::to_string_pretty(header)?;
    fs::write(&jp, text).map_err(|e| Error::io(&jp, e))?;
    Ok(())
}

fn read_pair(stem: &Path) -> Result<(FieldHeader, GridSpec, Vec<Complex64>)> {
    let (jp, bp) = paths(stem);
    let text = fs::read_to_string(&jp).map_err(|e| Error::io(&jp, e))?;
    let header: FieldHeader = serde_json::from_str(&text)?;
    let grid = GridSpec::new(header.l, header.n)?;
    let bytes = fs::read(&bp).map_err(|e| Error::io(&bp, e))?;
    if bytes.len() != grid.len() * 16 {
        return Err(Error::Structural(format!(
            "{} holds {} bytes, expected {}",
            bp.display(),
            bytes.len(),
            grid.len() * 16
        )));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((header, grid, values))
}

pub fn save_spatial(f: &SpatialField, stem: &Path) -> Result<()> {
    let g = f.grid();
    let header = FieldHeader { kind: FieldKind::Spatial, l: g.l(), n: g.n(), support: None, order: "fft".into() };
    write_pair(stem, &header, f.values())
}

pub fn save_frequency(f: &FrequencyField, stem: &Path) -> Result<()> {
    let g = f.grid();
    let header = FieldHeader {
        kind: FieldKind::Frequency,
        l: g.l(),
        n: g.n(),
        support: f.support(),
        order: "fft".into(),
    };
    write_pair(stem, &header, f.values())
}

pub fn load_spatial(stem: &Path) -> Result<SpatialField> {
    let (h, grid, values) = read_pair(stem)?;
    if h.kind != FieldKind::Spatial {
        return Err(Error::Structural(format!("{} is not a spatial field", stem.display())));
    }
    SpatialField::new(grid, values)
}

pub fn load_frequency(stem: &Path) -> Result<FrequencyField> {
    let (h, grid, values) = read_pair(stem)?;
    if h.kind != FieldKind::Frequency {
        return Err(Error::Structural(format!("{} is not a frequency field", stem.display())));
    }
    FrequencyField::new(grid, values, h.support)
}
