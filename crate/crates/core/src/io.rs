//! Gauge configuration files.
//!
//! Layout:
//!
//! ```text
//! latticefarm-v1
//! dims Lx Ly Lz Lt
//! rank_grid Px Py Pz Pt
//! beta <f64>
//! c0 <f64>
//! c1 <f64>
//! sweeps <u64>
//! seed <u64>
//! <payload>
//! <footer>
//! ```
//!
//! Each header line ends in `\n`. The payload holds every link as 18
//! little-endian IEEE-754 doubles (row-major 3×3, re then im), four
//! directions per site, sites in global lexicographic order with `x`
//! fastest. The footer is the 64-bit FNV-1a hash of the payload bytes,
//! little-endian.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::comm::{gather_global_links, CommError, Communicator};
use crate::field::{decode_link, encode_link, FieldMeta, GaugeField, LINK_BYTES};
use crate::lattice::{Dims, Geometry, NDIM};
use crate::su3::{Su3Matrix, UNITARITY_TOL};

pub const MAGIC_LINE: &str = "latticefarm-v1";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Error)]
pub enum FieldIoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("checksum mismatch: file says {stored:#018x}, payload hashes to {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("link {index} violates the SU(3) invariants (deviation {deviation:e})")]
    Invariant { index: usize, deviation: f64 },
    #[error("configuration lattice {found:?} does not match the run lattice {expected:?}")]
    DimsMismatch { expected: Dims, found: Dims },
    #[error(transparent)]
    Comm(#[from] CommError),
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn encode_payload(links: &[Su3Matrix]) -> Vec<u8> {
    let mut out = Vec::with_capacity(links.len() * LINK_BYTES);
    for u in links {
        encode_link(u, &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigHeader {
    pub dims: Dims,
    pub rank_grid: Dims,
    pub meta: FieldMeta,
}

pub fn write_configuration<W: Write>(mut w: W, header: &ConfigHeader, links: &[Su3Matrix]) -> Result<(), FieldIoError> {
    let expected = header.dims.iter().product::<usize>() * NDIM;
    if links.len() != expected {
        return Err(FieldIoError::Format(format!(
            "{} links supplied for a lattice of {expected}",
            links.len()
        )));
    }
    let d = &header.dims;
    let g = &header.rank_grid;
    let m = &header.meta;
    writeln!(w, "{MAGIC_LINE}")?;
    writeln!(w, "dims {} {} {} {}", d[0], d[1], d[2], d[3])?;
    writeln!(w, "rank_grid {} {} {} {}", g[0], g[1], g[2], g[3])?;
    writeln!(w, "beta {:?}", m.beta)?;
    writeln!(w, "c0 {:?}", m.c0)?;
    writeln!(w, "c1 {:?}", m.c1)?;
    writeln!(w, "sweeps {}", m.sweeps)?;
    writeln!(w, "seed {}", m.seed)?;
    let payload = encode_payload(links);
    w.write_all(&payload)?;
    w.write_all(&fnv1a64(&payload).to_le_bytes())?;
    w.flush()?;
    Ok(())
}

fn header_line<R: BufRead>(r: &mut R, key: &str) -> Result<String, FieldIoError> {
    let mut buf = Vec::new();
    r.by_ref().take(256).read_until(b'\n', &mut buf)?;
    if buf.last() != Some(&b'\n') {
        return Err(FieldIoError::Format(format!("missing or overlong header line `{key}`")));
    }
    buf.pop();
    let line = String::from_utf8(buf).map_err(|_| FieldIoError::Format(format!("header line `{key}` is not text")))?;
    if key == MAGIC_LINE {
        return if line == MAGIC_LINE {
            Ok(line)
        } else {
            Err(FieldIoError::Format(format!("bad magic line {line:?}")))
        };
    }
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok(v.to_string()),
        _ => Err(FieldIoError::Format(format!(
            "expected `{key}` header line, found {line:?}"
        ))),
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, FieldIoError> {
    v.trim()
        .parse()
        .map_err(|_| FieldIoError::Format(format!("cannot parse `{key}` value {v:?}")))
}

fn parse_dims(key: &str, v: &str) -> Result<Dims, FieldIoError> {
    let parts: Vec<usize> = v.split_whitespace().map(|p| parse(key, p)).collect::<Result<_, _>>()?;
    let dims: Dims = parts
        .try_into()
        .map_err(|_| FieldIoError::Format(format!("`{key}` needs four integers")))?;
    if dims.contains(&0) {
        return Err(FieldIoError::Format(format!("`{key}` entries must be positive")));
    }
    Ok(dims)
}

/// Reads and fully validates a configuration: header, length, checksum and
/// per-link SU(3) invariants.
pub fn read_configuration<R: Read>(r: R) -> Result<(ConfigHeader, Vec<Su3Matrix>), FieldIoError> {
    let mut r = BufReader::new(r);
    header_line(&mut r, MAGIC_LINE)?;
    let dims = parse_dims("dims", &header_line(&mut r, "dims")?)?;
    let rank_grid = parse_dims("rank_grid", &header_line(&mut r, "rank_grid")?)?;
    let meta = FieldMeta {
        beta: parse("beta", &header_line(&mut r, "beta")?)?,
        c0: parse("c0", &header_line(&mut r, "c0")?)?,
        c1: parse("c1", &header_line(&mut r, "c1")?)?,
        sweeps: parse("sweeps", &header_line(&mut r, "sweeps")?)?,
        seed: parse("seed", &header_line(&mut r, "seed")?)?,
    };

    let n_links = dims
        .iter()
        .try_fold(NDIM, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| FieldIoError::Format("lattice too large".into()))?;
    let mut payload = vec![0u8; n_links * LINK_BYTES];
    r.read_exact(&mut payload)
        .map_err(|_| FieldIoError::Format("truncated payload".into()))?;
    let mut footer = [0u8; 8];
    r.read_exact(&mut footer)
        .map_err(|_| FieldIoError::Format("missing checksum footer".into()))?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(FieldIoError::Format("trailing bytes after checksum".into()));
    }
    let stored = u64::from_le_bytes(footer);
    let computed = fnv1a64(&payload);
    if stored != computed {
        return Err(FieldIoError::ChecksumMismatch { stored, computed });
    }

    let links: Vec<Su3Matrix> = payload.chunks_exact(LINK_BYTES).map(decode_link).collect();
    for (index, u) in links.iter().enumerate() {
        let deviation = if u.is_finite() {
            u.su3_deviation()
        } else {
            f64::INFINITY
        };
        if !(deviation <= UNITARITY_TOL) {
            return Err(FieldIoError::Invariant { index, deviation });
        }
    }
    Ok((ConfigHeader { dims, rank_grid, meta }, links))
}

/// Gathers the field to rank 0, which writes the file. Collective.
pub fn save_field(path: &Path, field: &GaugeField, comm: &Communicator) -> Result<(), FieldIoError> {
    let gathered = gather_global_links(field, comm)?;
    let mut result = Ok(());
    if let Some(links) = gathered {
        let header = ConfigHeader {
            dims: field.geometry().global_dims,
            rank_grid: field.geometry().rank_grid,
            meta: field.meta.clone(),
        };
        result = File::create(path)
            .map_err(FieldIoError::from)
            .and_then(|f| write_configuration(BufWriter::new(f), &header, &links));
    }
    let ok = comm.broadcast(vec![result.is_ok() as u8])?;
    match (result, ok.first()) {
        (Err(e), _) => Err(e),
        (Ok(()), Some(1)) => Ok(()),
        _ => Err(FieldIoError::Format(format!(
            "rank 0 failed to write {}",
            path.display()
        ))),
    }
}

/// Every rank reads the file and keeps its own slab, halos included.
pub fn load_field(path: &Path, geometry: &Geometry, rank: usize) -> Result<GaugeField, FieldIoError> {
    let (header, links) = read_configuration(File::open(path)?)?;
    if header.dims != geometry.global_dims {
        return Err(FieldIoError::DimsMismatch {
            expected: geometry.global_dims,
            found: header.dims,
        });
    }
    GaugeField::from_global(geometry.clone(), rank, header.meta, &links)
        .map_err(|e| FieldIoError::Format(e.to_string()))
}
