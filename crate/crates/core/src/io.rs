//! Binary containers: `FIOG` for grid samples or DFT coefficients, `FIOS` for
//! symbols. All integers and floats are little-endian.
//!
//! ```text
//! FIOG: "FIOG" u32 version u32 n u32 N u8 domain, N^n × (f64 re, f64 im)
//! FIOS: "FIOS" u32 version u32 n u32 N u8 rep u32 K, then
//!       rep 0 (dense):     N^n columns of N^n values, η-major
//!       rep 1 (separable): K × (FIOG block of b_m, FIOG block of e_m)
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Spectrum};
use crate::symbols::{DenseSymbol, EtaProfile, RoughSymbol, SeparableSymbol, SeparableTerm};

pub const FORMAT_VERSION: u32 = 1;
const GRID_MAGIC: &[u8; 4] = b"FIOG";
const SYMBOL_MAGIC: &[u8; 4] = b"FIOS";

/// Which side of the DFT a `FIOG` payload holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Space,
    Frequency,
}

impl Domain {
    fn tag(self) -> u8 {
        match self {
            Domain::Space => 0,
            Domain::Frequency => 1,
        }
    }
}

/// Decoded `FIOG` payload.
#[derive(Clone, Debug, PartialEq)]
pub enum GridData {
    Space(GridFunction),
    Frequency(Spectrum),
}

impl GridData {
    pub fn grid(&self) -> &Grid {
        match self {
            GridData::Space(f) => f.grid(),
            GridData::Frequency(s) => s.grid(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            GridData::Space(_) => Domain::Space,
            GridData::Frequency(_) => Domain::Frequency,
        }
    }

    /// Samples in space, transforming frequency payloads.
    pub fn into_function(self) -> GridFunction {
        match self {
            GridData::Space(f) => f,
            GridData::Frequency(s) => crate::grid::inverse_dft_owned(s),
        }
    }
}

/// JSON sidecar written next to every `FIOG` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub version: u32,
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    #[serde(rename = "L")]
    pub period: f64,
    pub domain: Domain,
    #[serde(default)]
    pub provenance: serde_json::Value,
}

impl Sidecar {
    pub fn new(grid: &Grid, domain: Domain, provenance: serde_json::Value) -> Self {
        Self {
            format: "FIOG".into(),
            version: FORMAT_VERSION,
            n: grid.dim(),
            size: grid.size(),
            period: grid.period(),
            domain,
            provenance,
        }
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_values(out: &mut Vec<u8>, values: &[Complex64]) {
    out.reserve(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
}

fn put_grid_header(out: &mut Vec<u8>, magic: &[u8; 4], grid: &Grid) {
    out.extend_from_slice(magic);
    put_u32(out, FORMAT_VERSION);
    put_u32(out, grid.dim() as u32);
    put_u32(out, grid.size() as u32);
}

fn encode_block(out: &mut Vec<u8>, grid: &Grid, domain: Domain, values: &[Complex64]) {
    put_grid_header(out, GRID_MAGIC, grid);
    out.push(domain.tag());
    put_values(out, values);
}

/// `FIOG` bytes for space samples.
pub fn encode_function(f: &GridFunction) -> Vec<u8> {
    let mut out = Vec::new();
    encode_block(&mut out, f.grid(), Domain::Space, f.values());
    out
}

/// `FIOG` bytes for DFT coefficients.
pub fn encode_spectrum(s: &Spectrum) -> Vec<u8> {
    let mut out = Vec::new();
    encode_block(&mut out, s.grid(), Domain::Frequency, s.coeffs());
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "truncated input: need {n} bytes at offset {}, have {}",
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn values(&mut self, count: usize) -> Result<Vec<Complex64>> {
        let raw = self.take(count.checked_mul(16).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect())
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<Grid> {
        let m = self.take(4)?;
        if m != magic {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(m),
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = self.u32()? as usize;
        let size = self.u32()? as usize;
        Grid::new(n, size)
    }

    fn block(&mut self, expect: Option<&Grid>) -> Result<GridData> {
        let grid = self.header(GRID_MAGIC)?;
        if let Some(g) = expect {
            g.ensure_same(&grid)?;
        }
        let domain = self.u8()?;
        let values = self.values(grid.len())?;
        match domain {
            0 => Ok(GridData::Space(GridFunction::new(&grid, values)?)),
            1 => Ok(GridData::Frequency(Spectrum::new(&grid, values)?)),
            d => Err(Error::Format(format!("unknown domain flag {d}"))),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn decode_grid(bytes: &[u8]) -> Result<GridData> {
    let mut c = Cursor { bytes, pos: 0 };
    let out = c.block(None)?;
    c.finish()?;
    Ok(out)
}

/// `FIOS` bytes. Separable profiles are stored as their lattice values.
pub fn encode_symbol(a: &RoughSymbol) -> Vec<u8> {
    let grid = a.grid();
    let mut out = Vec::new();
    put_grid_header(&mut out, SYMBOL_MAGIC, grid);
    match a {
        RoughSymbol::Dense(d) => {
            out.push(0);
            put_u32(&mut out, grid.len() as u32);
            put_values(&mut out, d.data());
        }
        RoughSymbol::Separable(s) => {
            out.push(1);
            put_u32(&mut out, s.rank() as u32);
            for (t, table) in s.terms().iter().zip(s.eta_tables()) {
                encode_block(&mut out, grid, Domain::Space, t.b.values());
                encode_block(&mut out, grid, Domain::Frequency, &table);
            }
        }
    }
    out
}

pub fn decode_symbol(bytes: &[u8]) -> Result<RoughSymbol> {
    let mut c = Cursor { bytes, pos: 0 };
    let grid = c.header(SYMBOL_MAGIC)?;
    let rep = c.u8()?;
    let rank = c.u32()? as usize;
    let sym = match rep {
        0 => {
            if rank != grid.len() {
                return Err(Error::Format(format!(
                    "dense symbol declares {rank} columns, grid has {}",
                    grid.len()
                )));
            }
            let count = grid
                .len()
                .checked_mul(grid.len())
                .ok_or_else(|| Error::Format("size overflow".into()))?;
            RoughSymbol::Dense(DenseSymbol::new(&grid, c.values(count)?)?)
        }
        1 => {
            let mut terms = Vec::with_capacity(rank.min(1 << 16));
            for m in 0..rank {
                let b = match c.block(Some(&grid))? {
                    GridData::Space(f) => f,
                    GridData::Frequency(_) => {
                        return Err(Error::Format(format!("term {m}: b block must be in the space domain")))
                    }
                };
                let e = match c.block(Some(&grid))? {
                    GridData::Frequency(s) => EtaProfile::from_table(&grid, s.into_coeffs())?,
                    GridData::Space(_) => {
                        return Err(Error::Format(format!("term {m}: e block must be in the frequency domain")))
                    }
                };
                terms.push(SeparableTerm { b, e });
            }
            RoughSymbol::Separable(SeparableSymbol::new(&grid, terms)?)
        }
        r => return Err(Error::Format(format!("unknown representation tag {r}"))),
    };
    c.finish()?;
    Ok(sym)
}

pub fn read_all(mut r: impl Read) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    Ok(buf)
}

pub fn write_all(mut w: impl Write, bytes: &[u8]) -> Result<()> {
    w.write_all(bytes)?;
    Ok(())
}
