//! Dataset files: JSON-lines with a header line, plus a packed
//! little-endian f64 binary for large runs.

use super::{MpcDataset, MpcSample, Provenance};
use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    kind: String,
    system: String,
    config_fingerprint: String,
    dt: f64,
    effective_horizon: f64,
    state_dim: usize,
    count: usize,
}

#[derive(Serialize, Deserialize)]
struct Line {
    t: f64,
    x: Vec<f64>,
    v: f64,
    prov: Provenance,
    pt: u32,
}

fn header_for<T: Real>(ds: &MpcDataset<T>, kind: &str) -> Header {
    Header {
        format_version: DATASET_FORMAT_VERSION,
        kind: kind.to_string(),
        system: ds.system_name.clone(),
        config_fingerprint: ds.config_fingerprint.clone(),
        dt: ds.dt,
        effective_horizon: ds.effective_horizon,
        state_dim: ds.samples.first().map_or(0, |s| s.x.len()),
        count: ds.samples.len(),
    }
}

fn check_header(header: &Header, kind: &str) -> Result<()> {
    if header.format_version != DATASET_FORMAT_VERSION {
        return Err(Error::format(format!(
            "dataset format version {} unsupported (expected {})",
            header.format_version, DATASET_FORMAT_VERSION
        )));
    }
    if header.kind != kind {
        return Err(Error::format(format!(
            "expected kind '{kind}', found '{}'",
            header.kind
        )));
    }
    Ok(())
}

pub fn save_dataset<T: Real>(ds: &MpcDataset<T>, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
        serde_json::to_writer(&mut w, &header_for(ds, "mpc_dataset"))
            .map_err(|e| Error::format(e.to_string()))?;
        w.write_all(b"\n")?;
        for s in &ds.samples {
            let line = Line {
                t: s.t.f64(),
                x: s.x.iter().map(|v| v.f64()).collect(),
                v: s.v_hat.f64(),
                prov: s.provenance,
                pt: s.point_index,
            };
            serde_json::to_writer(&mut w, &line).map_err(|e| Error::format(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn load_dataset<T: Real>(path: &Path) -> Result<MpcDataset<T>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = String::new();
    r.read_line(&mut header_line)?;
    let header: Header = serde_json::from_str(&header_line)
        .map_err(|e| Error::format(format!("bad dataset header: {e}")))?;
    check_header(&header, "mpc_dataset")?;
    let mut samples = Vec::with_capacity(header.count);
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: Line =
            serde_json::from_str(&line).map_err(|e| Error::format(format!("bad sample: {e}")))?;
        samples.push(MpcSample {
            t: T::c(l.t),
            x: l.x.iter().map(|&v| T::c(v)).collect(),
            v_hat: T::c(l.v),
            provenance: l.prov,
            point_index: l.pt,
        });
    }
    if samples.len() != header.count {
        return Err(Error::format(format!(
            "dataset has {} samples, header says {}",
            samples.len(),
            header.count
        )));
    }
    Ok(MpcDataset {
        system_name: header.system,
        config_fingerprint: header.config_fingerprint,
        dt: header.dt,
        effective_horizon: header.effective_horizon,
        samples,
    })
}

pub fn save_dataset_binary<T: Real>(ds: &MpcDataset<T>, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
        serde_json::to_writer(&mut w, &header_for(ds, "mpc_dataset_bin"))
            .map_err(|e| Error::format(e.to_string()))?;
        w.write_all(b"\n")?;
        for s in &ds.samples {
            w.write_all(&s.t.f64().to_le_bytes())?;
            for v in &s.x {
                w.write_all(&v.f64().to_le_bytes())?;
            }
            w.write_all(&s.v_hat.f64().to_le_bytes())?;
            let prov = match s.provenance {
                Provenance::Direct => 0.0f64,
                Provenance::Bootstrapped => 1.0,
                Provenance::Refined => 2.0,
            };
            w.write_all(&prov.to_le_bytes())?;
            w.write_all(&(s.point_index as f64).to_le_bytes())?;
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn load_dataset_binary<T: Real>(path: &Path) -> Result<MpcDataset<T>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)
            .map_err(|_| Error::format("missing dataset header"))?;
        if byte[0] == b'\n' {
            break;
        }
        header_line.push(byte[0]);
    }
    let header: Header = serde_json::from_slice(&header_line)
        .map_err(|e| Error::format(format!("bad dataset header: {e}")))?;
    check_header(&header, "mpc_dataset_bin")?;
    let record = header.state_dim + 4;
    let mut buf = vec![0u8; record * 8];
    let mut samples = Vec::with_capacity(header.count);
    for _ in 0..header.count {
        r.read_exact(&mut buf)
            .map_err(|_| Error::format("dataset payload truncated"))?;
        let vals: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let prov = match vals[header.state_dim + 2] as i64 {
            0 => Provenance::Direct,
            1 => Provenance::Bootstrapped,
            2 => Provenance::Refined,
            other => return Err(Error::format(format!("bad provenance code {other}"))),
        };
        samples.push(MpcSample {
            t: T::c(vals[0]),
            x: vals[1..=header.state_dim].iter().map(|&v| T::c(v)).collect(),
            v_hat: T::c(vals[header.state_dim + 1]),
            provenance: prov,
            point_index: vals[header.state_dim + 3] as u32,
        });
    }
    Ok(MpcDataset {
        system_name: header.system,
        config_fingerprint: header.config_fingerprint,
        dt: header.dt,
        effective_horizon: header.effective_horizon,
        samples,
    })
}
