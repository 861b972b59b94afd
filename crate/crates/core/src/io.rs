//! File formats: raw little-endian f32 signals and CSV logs.

use crate::channel::GroundTruth;
use crate::codec::crc::{bits_to_bytes, bytes_to_bits};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Writes samples as raw little-endian f32.
pub fn write_f32_le(path: &Path, samples: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_f32_le_to(&mut w, samples)?;
    w.flush()?;
    Ok(())
}

pub fn write_f32_le_to<W: Write>(w: &mut W, samples: &[f64]) -> Result<()> {
    for &s in samples {
        w.write_all(&(s as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_f32_le(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    BufReader::new(std::fs::File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Config(format!(
            "{}: length {} is not a multiple of 4 bytes",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthRow {
    user: u32,
    t_tx: f64,
    t_rx: f64,
    payload_hex: String,
}

pub fn payload_to_hex(bits: &[u8]) -> String {
    hex::encode(bits_to_bytes(bits))
}

pub fn payload_from_hex(s: &str, n_bits: usize) -> Result<Vec<u8>> {
    let bytes = hex::decode(s).map_err(|e| Error::Config(format!("bad payload hex: {e}")))?;
    let mut bits = bytes_to_bits(&bytes);
    if bits.len() < n_bits {
        return Err(Error::Config("payload hex too short".into()));
    }
    bits.truncate(n_bits);
    Ok(bits)
}

pub fn write_truth_csv<W: Write>(w: W, truth: &[GroundTruth]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for t in truth {
        wr.serialize(TruthRow {
            user: t.user,
            t_tx: t.t_tx,
            t_rx: t.t_rx,
            payload_hex: payload_to_hex(&t.payload),
        })
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_truth_csv<R: Read>(r: R, payload_bits: usize) -> Result<Vec<GroundTruth>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rd.deserialize::<TruthRow>() {
        let row = row.map_err(csv_err)?;
        out.push(GroundTruth {
            user: row.user,
            t_tx: row.t_tx,
            t_rx: row.t_rx,
            payload: payload_from_hex(&row.payload_hex, payload_bits)?,
        });
    }
    Ok(out)
}

/// Serialises rows of any serde record type as CSV with a header.
pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f32_round_trip() {
        let dir = std::env::temp_dir().join(format!("icmodem-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.f32");
        let x = vec![0.0, 1.5, -2.25, 1e-3];
        write_f32_le(&p, &x).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 16);
        let y = read_f32_le(&p).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-7);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn truth_round_trip() {
        let payload: Vec<u8> = (0..176).map(|i| (i % 3 == 0) as u8).collect();
        let truth = vec![GroundTruth {
            user: 2,
            t_tx: 1.25,
            t_rx: 1.2573,
            payload: payload.clone(),
        }];
        let mut buf = Vec::new();
        write_truth_csv(&mut buf, &truth).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user,t_tx,t_rx,payload_hex"));
        assert_eq!(read_truth_csv(&buf[..], 176).unwrap(), truth);
    }
}
