//! On-disk value-function format: one JSON header line, then the dense
//! snapshots as little-endian f64 in row-major order, time-major.

use super::{GridAxis, GridValueFn};
use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const VALUE_FN_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    kind: String,
    system: String,
    axes: Vec<GridAxis>,
    times: Vec<f64>,
    tool_version: String,
}

pub fn save_value_fn<T: Real>(vf: &GridValueFn<T>, path: &Path) -> Result<()> {
    let header = Header {
        format_version: VALUE_FN_FORMAT_VERSION,
        kind: "grid_value_fn".to_string(),
        system: vf.system_name.clone(),
        axes: vf.axes.clone(),
        times: vf.times.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
        serde_json::to_writer(&mut w, &header).map_err(|e| Error::format(e.to_string()))?;
        w.write_all(b"\n")?;
        for snap in &vf.values {
            for v in snap {
                w.write_all(&v.f64().to_le_bytes())?;
            }
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn load_value_fn<T: Real>(path: &Path) -> Result<GridValueFn<T>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)
            .map_err(|_| Error::format("missing header line"))?;
        if byte[0] == b'\n' {
            break;
        }
        header_line.push(byte[0]);
    }
    let header: Header = serde_json::from_slice(&header_line)
        .map_err(|e| Error::format(format!("bad value-function header: {e}")))?;
    if header.format_version != VALUE_FN_FORMAT_VERSION {
        return Err(Error::format(format!(
            "value-function format version {} unsupported (expected {})",
            header.format_version, VALUE_FN_FORMAT_VERSION
        )));
    }
    if header.kind != "grid_value_fn" {
        return Err(Error::format(format!("unexpected kind '{}'", header.kind)));
    }
    let nodes: usize = header.axes.iter().map(|a| a.count).product();
    let mut values = Vec::with_capacity(header.times.len());
    let mut buf = vec![0u8; nodes * 8];
    for _ in 0..header.times.len() {
        r.read_exact(&mut buf)
            .map_err(|_| Error::format("value-function payload truncated"))?;
        values.push(
            buf.chunks_exact(8)
                .map(|c| T::c(f64::from_le_bytes(c.try_into().unwrap())))
                .collect(),
        );
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::format(
            "value-function payload has trailing bytes",
        ));
    }
    Ok(GridValueFn {
        system_name: header.system,
        axes: header.axes,
        times: header.times,
        values,
    })
}
