use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

use super::evolve::{Frame, SolutionGrid};
use crate::{Error, Result};

/// Sidecar header of a checkpoint. The binary file holds the frames back to
/// back as little-endian `f64`, in the order listed here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub run_id: String,
    pub model: String,
    pub mass: f64,
    pub dr: f64,
    pub dt: f64,
    pub t_start: f64,
    pub r_star0: f64,
    pub lapse_convention: String,
    pub frames: Vec<FrameHeader>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameHeader {
    pub level: usize,
    pub t: f64,
    pub first_cell: usize,
    pub cells: usize,
}

fn payload(sol: &SolutionGrid) -> Vec<u8> {
    let n: usize = sol.frames.iter().map(|f| f.psi.len()).sum();
    let mut bytes = Vec::with_capacity(8 * n);
    for f in &sol.frames {
        for x in &f.psi {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    bytes
}

/// Content hash of the configuration text and the field data.
pub fn run_id(config_text: &str, data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(config_text.as_bytes());
    h.update(data);
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Write `<stem>.bin` and `<stem>.json`; returns the header.
pub fn write_checkpoint(sol: &SolutionGrid, dir: &Path, stem: &str, config_text: &str) -> Result<CheckpointHeader> {
    let data = payload(sol);
    let header = CheckpointHeader {
        format: "f64-le frames".into(),
        run_id: run_id(config_text, &data),
        model: sol.model.label(),
        mass: sol.model.mass,
        dr: sol.dr,
        dt: sol.dt,
        t_start: sol.t_start,
        r_star0: sol.r_star0,
        lapse_convention: "s = 2(t - r*)".into(),
        frames: sol
            .frames
            .iter()
            .map(|f| FrameHeader { level: f.level, t: f.t, first_cell: f.first_cell, cells: f.psi.len() })
            .collect(),
    };
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{stem}.bin")), &data)?;
    let json = serde_json::to_string_pretty(&header).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json)?;
    Ok(header)
}

/// Read back the frames of a checkpoint.
pub fn read_checkpoint(dir: &Path, stem: &str) -> Result<(CheckpointHeader, Vec<Frame>)> {
    let text = fs::read_to_string(dir.join(format!("{stem}.json")))?;
    let header: CheckpointHeader = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let data = fs::read(dir.join(format!("{stem}.bin")))?;
    let expected: usize = header.frames.iter().map(|f| f.cells).sum();
    if data.len() != 8 * expected {
        return Err(Error::Parse(format!("checkpoint holds {} bytes, header expects {}", data.len(), 8 * expected)));
    }
    let mut values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let frames = header
        .frames
        .iter()
        .map(|fh| Frame { level: fh.level, t: fh.t, first_cell: fh.first_cell, psi: values.by_ref().take(fh.cells).collect() })
        .collect();
    Ok((header, frames))
}
