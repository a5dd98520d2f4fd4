//! Binary grid (`RSDG`) and mask (`RSDM`) files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! RSDG: "RSDG" u16 version=1  u32 rows  u32 cols  u8 dtype  payload
//!       dtype 0: rows·cols × (f32 re, f32 im)
//!       dtype 1: rows·cols × (f64 re, f64 im)
//! RSDM: "RSDM" u16 version=1  u32 rows  u32 cols  payload of rows·cols bytes (0 or 1)
//! ```
//!
//! Mask payloads are stored in centered (DC-in-the-middle) layout; readers
//! and writers convert to and from the in-memory DC-at-origin layout.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::operator::SamplingMask;

pub const GRID_MAGIC: &[u8; 4] = b"RSDG";
pub const MASK_MAGIC: &[u8; 4] = b"RSDM";
pub const FORMAT_VERSION: u16 = 1;
/// Bytes before the payload of a grid file.
pub const GRID_HEADER_LEN: usize = 15;
/// Bytes before the payload of a mask file.
pub const MASK_HEADER_LEN: usize = 14;

/// Sample encoding of a grid file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridDtype {
    /// Interleaved 32-bit floats.
    Complex64 = 0,
    /// Interleaved 64-bit floats.
    Complex128 = 1,
}

impl GridDtype {
    fn sample_bytes(self) -> u64 {
        match self {
            GridDtype::Complex64 => 8,
            GridDtype::Complex128 => 16,
        }
    }
}

/// Bounds-checked little-endian reader that reports byte offsets.
pub(crate) struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::format(
                self.offset(),
                format!(
                    "truncated: expected {} bytes, found {}",
                    self.pos + n,
                    self.bytes.len()
                ),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn expect_magic(&mut self, magic: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != magic {
            return Err(Error::format(
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(magic)
                ),
            ));
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    /// Requires exactly `payload` bytes to remain.
    pub fn expect_payload(&self, payload: u64) -> Result<()> {
        let expected = self.offset().saturating_add(payload);
        let actual = self.bytes.len() as u64;
        if expected != actual {
            let what = if actual < expected { "truncated" } else { "trailing bytes" };
            return Err(Error::format(
                self.offset().min(actual),
                format!("{what}: expected {expected} bytes, found {actual}"),
            ));
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::format(
                self.offset(),
                format!("trailing bytes: expected {} bytes, found {}", self.pos, self.bytes.len()),
            ));
        }
        Ok(())
    }
}

fn read_dims(cur: &mut Cursor<'_>) -> Result<(usize, usize)> {
    let at = cur.offset();
    let rows = cur.u32()?;
    let cols = cur.u32()?;
    if rows == 0 || cols == 0 {
        return Err(Error::format(at, format!("zero dimension {rows}x{cols}")));
    }
    Ok((rows as usize, cols as usize))
}

fn read_version(cur: &mut Cursor<'_>) -> Result<()> {
    let at = cur.offset();
    let v = cur.u16()?;
    if v != FORMAT_VERSION {
        return Err(Error::format(at, format!("unsupported version {v}")));
    }
    Ok(())
}

pub fn encode_grid(grid: &ComplexGrid, dtype: GridDtype) -> Vec<u8> {
    let mut out = Vec::with_capacity(GRID_HEADER_LEN + grid.len() * dtype.sample_bytes() as usize);
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.cols() as u32).to_le_bytes());
    out.push(dtype as u8);
    for z in grid.data() {
        match dtype {
            GridDtype::Complex64 => {
                out.extend_from_slice(&(z.re as f32).to_le_bytes());
                out.extend_from_slice(&(z.im as f32).to_le_bytes());
            }
            GridDtype::Complex128 => {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    out
}

/// Parses a grid file, returning the grid and the dtype it was stored with.
pub fn decode_grid(bytes: &[u8]) -> Result<(ComplexGrid, GridDtype)> {
    let mut cur = Cursor::new(bytes);
    cur.expect_magic(GRID_MAGIC)?;
    read_version(&mut cur)?;
    let (rows, cols) = read_dims(&mut cur)?;
    let at = cur.offset();
    let dtype = match cur.u8()? {
        0 => GridDtype::Complex64,
        1 => GridDtype::Complex128,
        d => return Err(Error::format(at, format!("unknown dtype {d}"))),
    };
    cur.expect_payload((rows as u64) * (cols as u64) * dtype.sample_bytes())?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let at = cur.offset();
        let z = match dtype {
            GridDtype::Complex64 => {
                let b = cur.take(8)?;
                Complex64::new(
                    f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
                    f32::from_le_bytes(b[4..].try_into().unwrap()) as f64,
                )
            }
            GridDtype::Complex128 => {
                let b = cur.take(16)?;
                Complex64::new(
                    f64::from_le_bytes(b[..8].try_into().unwrap()),
                    f64::from_le_bytes(b[8..].try_into().unwrap()),
                )
            }
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::format(at, "non-finite sample"));
        }
        data.push(z);
    }
    cur.finish()?;
    Ok((ComplexGrid::from_raw(rows, cols, data), dtype))
}

pub fn encode_mask(mask: &SamplingMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(MASK_HEADER_LEN + mask.rows() * mask.cols());
    out.extend_from_slice(MASK_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(mask.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(mask.cols() as u32).to_le_bytes());
    out.extend(mask.to_centered().into_iter().map(u8::from));
    out
}

pub fn decode_mask(bytes: &[u8]) -> Result<SamplingMask> {
    let mut cur = Cursor::new(bytes);
    cur.expect_magic(MASK_MAGIC)?;
    read_version(&mut cur)?;
    let (rows, cols) = read_dims(&mut cur)?;
    cur.expect_payload(rows as u64 * cols as u64)?;
    let start = cur.offset();
    let payload = cur.take(rows * cols)?;
    let mut centered = Vec::with_capacity(payload.len());
    for (i, &b) in payload.iter().enumerate() {
        match b {
            0 => centered.push(false),
            1 => centered.push(true),
            _ => return Err(Error::format(start + i as u64, format!("mask byte {b} is not 0 or 1"))),
        }
    }
    cur.finish()?;
    if !centered.contains(&true) {
        return Err(Error::format(start, "mask samples no k-space location"));
    }
    SamplingMask::from_centered(rows, cols, &centered)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut bytes = Vec::new();
    File::open(path).map_err(io)?.read_to_end(&mut bytes).map_err(io)?;
    Ok(bytes)
}

pub(crate) fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    body(&mut w).map_err(io)?;
    w.flush().map_err(io)
}

pub fn write_grid(path: &Path, grid: &ComplexGrid, dtype: GridDtype) -> Result<()> {
    let bytes = encode_grid(grid, dtype);
    write_file(path, |w| w.write_all(&bytes))
}

pub fn read_grid(path: &Path) -> Result<ComplexGrid> {
    Ok(decode_grid(&read_file(path)?)?.0)
}

pub fn write_mask(path: &Path, mask: &SamplingMask) -> Result<()> {
    let bytes = encode_mask(mask);
    write_file(path, |w| w.write_all(&bytes))
}

pub fn read_mask(path: &Path) -> Result<SamplingMask> {
    decode_mask(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rows: usize, cols: usize, seed: u64) -> ComplexGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexGrid::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1e3..1e3), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn complex128_round_trip_is_bit_exact() {
        let g = random_grid(7, 5, 1);
        let bytes = encode_grid(&g, GridDtype::Complex128);
        assert_eq!(bytes.len(), GRID_HEADER_LEN + 35 * 16);
        let (back, dtype) = decode_grid(&bytes).unwrap();
        assert_eq!(dtype, GridDtype::Complex128);
        for (a, b) in g.data().iter().zip(back.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn complex64_round_trip_loses_only_single_precision() {
        let g = random_grid(6, 6, 2);
        let (back, _) = decode_grid(&encode_grid(&g, GridDtype::Complex64)).unwrap();
        for (a, b) in g.data().iter().zip(back.data()) {
            assert!((a.re - b.re).abs() <= 1e-6 * a.re.abs().max(1e-30));
            assert!((a.im - b.im).abs() <= 1e-6 * a.im.abs().max(1e-30));
        }
        // A second trip through single precision is lossless.
        let (again, _) = decode_grid(&encode_grid(&back, GridDtype::Complex64)).unwrap();
        assert_eq!(again, back);
    }

    #[test]
    fn header_layout() {
        let bytes = encode_grid(&ComplexGrid::zeros(2, 3), GridDtype::Complex64);
        assert_eq!(&bytes[..4], b"RSDG");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..10], &[2, 0, 0, 0]);
        assert_eq!(&bytes[10..14], &[3, 0, 0, 0]);
        assert_eq!(bytes[14], 0);
        assert_eq!(bytes.len(), 15 + 6 * 8);
    }

    #[test]
    fn truncation_names_lengths() {
        let bytes = encode_grid(&random_grid(4, 4, 3), GridDtype::Complex128);
        let err = decode_grid(&bytes[..bytes.len() - 5]).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Format { .. }));
        assert!(msg.contains(&format!("expected {} bytes", bytes.len())), "{msg}");
        assert!(msg.contains(&format!("found {}", bytes.len() - 5)), "{msg}");
    }

    #[test]
    fn structural_corruptions_are_rejected() {
        let bytes = encode_grid(&random_grid(3, 3, 4), GridDtype::Complex128);
        let mut bad = bytes.clone();
        bad[1] = b'X';
        assert!(matches!(decode_grid(&bad), Err(Error::Format { offset: 0, .. })));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(decode_grid(&bad), Err(Error::Format { offset: 4, .. })));
        let mut bad = bytes.clone();
        bad[14] = 7;
        assert!(matches!(decode_grid(&bad), Err(Error::Format { offset: 14, .. })));
        let mut bad = bytes.clone();
        bad.push(0);
        assert!(decode_grid(&bad).is_err());
        let mut bad = bytes;
        bad[GRID_HEADER_LEN..GRID_HEADER_LEN + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_grid(&bad), Err(Error::Format { offset: 15, .. })));
    }

    #[test]
    fn mask_round_trip_uses_centered_layout() {
        let mut keep = vec![false; 20];
        keep[0] = true;
        keep[7] = true;
        let m = SamplingMask::new(4, 5, keep).unwrap();
        let bytes = encode_mask(&m);
        assert_eq!(bytes.len(), MASK_HEADER_LEN + 20);
        // DC (0,0) lands at centered position (2,2).
        assert_eq!(bytes[MASK_HEADER_LEN + 2 * 5 + 2], 1);
        assert_eq!(decode_mask(&bytes).unwrap(), m);
        let mut bad = bytes.clone();
        bad[MASK_HEADER_LEN + 3] = 2;
        assert!(decode_mask(&bad).is_err());
        let mut empty = bytes;
        empty[MASK_HEADER_LEN..].fill(0);
        assert!(decode_mask(&empty).is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = random_grid(5, 4, 5);
        let p = dir.path().join("g.rsdg");
        write_grid(&p, &g, GridDtype::Complex128).unwrap();
        assert_eq!(read_grid(&p).unwrap(), g);
        let m = SamplingMask::full(3, 3).unwrap();
        let q = dir.path().join("m.rsdm");
        write_mask(&q, &m).unwrap();
        assert_eq!(read_mask(&q).unwrap(), m);
        assert!(matches!(read_grid(&dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
