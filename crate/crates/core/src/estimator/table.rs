//! Shadow tables and their NDJSON form.
//!
//! The first line is a header object; every further line is one row:
//! `{"p":[[i,j],...],"g":[gate,...],"b":"0110..."}`. Paths ending in `.gz` are
//! gzip-compressed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{GateEnsemble, SampledGate};
use crate::simulator::{Pairing, ShadowSample};

pub const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub version: u32,
    #[serde(rename = "V")]
    pub volume: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub ensemble: GateEnsemble,
    pub seed: u64,
    pub samples: usize,
    /// Run configuration and code version of the producer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl TableHeader {
    pub fn new(volume: usize, particles: usize, ensemble: GateEnsemble, seed: u64, samples: usize) -> Self {
        Self {
            version: TABLE_VERSION,
            volume,
            particles,
            ensemble,
            seed,
            samples,
            meta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowTable {
    pub header: TableHeader,
    pub rows: Vec<ShadowSample>,
}

#[derive(Serialize, Deserialize)]
struct RowRepr {
    p: Vec<[usize; 2]>,
    g: Vec<SampledGate>,
    b: String,
}

impl ShadowTable {
    /// Check every row against the header.
    pub fn new(header: TableHeader, rows: Vec<ShadowSample>) -> Result<Self> {
        if header.samples != rows.len() {
            return Err(Error::Parse(format!(
                "header announces {} samples, found {}",
                header.samples,
                rows.len()
            )));
        }
        for (k, row) in rows.iter().enumerate() {
            check_row(&header, row).map_err(|e| Error::Parse(format!("row {k}: {e}")))?;
        }
        Ok(Self { header, rows })
    }

    pub fn volume(&self) -> usize {
        self.header.volume
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.header.meta = Some(meta);
        self
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for row in &self.rows {
            let repr = RowRepr {
                p: row.pairing.pairs.iter().map(|&(i, j)| [i, j]).collect(),
                g: row.gates.clone(),
                b: row.bit_string(),
            };
            serde_json::to_writer(&mut w, &repr)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Parse("shadow table has no header line".into()))??;
        let header: TableHeader = serde_json::from_str(&first)
            .map_err(|e| Error::Parse(format!("header: {e}")))?;
        if header.version != TABLE_VERSION {
            return Err(Error::Parse(format!(
                "unsupported table version {}",
                header.version
            )));
        }
        let mut rows = Vec::with_capacity(header.samples);
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let repr: RowRepr =
                serde_json::from_str(&line).map_err(|e| Error::Parse(format!("row {k}: {e}")))?;
            rows.push(parse_row(&header, repr).map_err(|e| Error::Parse(format!("row {k}: {e}")))?);
        }
        Self::new(header, rows)
    }

    /// Write to `path`, gzip-compressed when it ends in `.gz`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = BufWriter::new(File::create(path)?);
        if is_gzip(path) {
            let mut enc = GzEncoder::new(file, Compression::default());
            self.write_ndjson(&mut enc)?;
            enc.finish()?.flush()?;
        } else {
            self.write_ndjson(file)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path)?;
        let reader: Box<dyn Read> = if is_gzip(path) {
            Box::new(GzDecoder::new(file))
        } else {
            Box::new(file)
        };
        Self::read_ndjson(BufReader::new(reader))
    }
}

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

fn parse_row(header: &TableHeader, repr: RowRepr) -> Result<ShadowSample> {
    let pairing = Pairing::new(
        header.volume,
        repr.p.iter().map(|p| (p[0], p[1])).collect(),
    )?;
    let bits = repr
        .b
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("bad outcome character `{other}`"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ShadowSample {
        pairing,
        gates: repr.g,
        bits,
    })
}

fn check_row(header: &TableHeader, row: &ShadowSample) -> Result<()> {
    if row.bits.len() != header.volume {
        return Err(Error::VolumeMismatch(row.bits.len(), header.volume));
    }
    if row.pairing.volume() != header.volume {
        return Err(Error::VolumeMismatch(row.pairing.volume(), header.volume));
    }
    if row.gates.len() != row.pairing.pairs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} gates for {} pairs",
            row.gates.len(),
            row.pairing.pairs.len()
        )));
    }
    if row.particles() != header.particles {
        return Err(Error::InvalidArgument(format!(
            "outcome has {} particles, header says {}",
            row.particles(),
            header.particles
        )));
    }
    let discrete = header.ensemble == GateEnsemble::Discrete3;
    if row
        .gates
        .iter()
        .any(|g| matches!(g, SampledGate::Discrete(_)) != discrete)
    {
        return Err(Error::InvalidArgument(format!(
            "gate kind does not match ensemble {}",
            header.ensemble
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{collect_shadow, FockBasis, FockState};
    use crate::C64;
    use std::sync::Arc;

    fn table(ensemble: GateEnsemble, n: usize) -> ShadowTable {
        let basis = Arc::new(FockBasis::new(6, 2).unwrap());
        let amps = (0..basis.dim()).map(|k| C64::new(1.0, k as f64)).collect();
        let psi = FockState::new(basis, amps).unwrap();
        collect_shadow(&psi, ensemble, n, 5).unwrap()
    }

    #[test]
    fn ndjson_roundtrip() {
        for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
            let t = table(ensemble, 20).with_meta(serde_json::json!({"note": "x"}));
            let mut buf = Vec::new();
            t.write_ndjson(&mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with("{\"version\":1,\"V\":6,\"N\":2,"));
            assert_eq!(text.lines().count(), 21);
            let back = ShadowTable::read_ndjson(&buf[..]).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn gzip_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let t = table(GateEnsemble::HaarBlock, 30);
        for name in ["t.ndjson", "t.ndjson.gz"] {
            let path = dir.path().join(name);
            t.save(&path).unwrap();
            assert_eq!(ShadowTable::load(&path).unwrap(), t);
        }
        let raw = std::fs::read(dir.path().join("t.ndjson.gz")).unwrap();
        assert_eq!(&raw[..2], &[0x1f, 0x8b]);
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let header = r#"{"version":1,"V":4,"N":1,"ensemble":"discrete3","seed":0,"samples":1}"#;
        let good = r#"{"p":[[0,1],[2,3]],"g":[0,2],"b":"0100"}"#;
        let ok = format!("{header}\n{good}\n");
        assert!(ShadowTable::read_ndjson(ok.as_bytes()).is_ok());
        for bad in [
            r#"{"p":[[0,1],[2,3]],"g":[0,2],"b":"0110"}"#,
            r#"{"p":[[0,1],[1,3]],"g":[0,2],"b":"0100"}"#,
            r#"{"p":[[0,1],[2,3]],"g":[0],"b":"0100"}"#,
            r#"{"p":[[0,1],[2,3]],"g":[0,2],"b":"01x0"}"#,
            r#"{"p":[[0,1],[2,3]],"g":[0,7],"b":"0100"}"#,
        ] {
            let text = format!("{header}\n{bad}\n");
            assert!(ShadowTable::read_ndjson(text.as_bytes()).is_err(), "{bad}");
        }
        let short = format!("{}\n{good}\n", header.replace("\"samples\":1", "\"samples\":2"));
        assert!(ShadowTable::read_ndjson(short.as_bytes()).is_err());
    }
}
