//! `RSDN` parameter checkpoints.
//!
//! Layout (little-endian): magic `RSDN`, `u16` version, then for each layer in
//! order its kernel and its bias as tensors. A tensor is a `u32` rank, `rank`
//! `u32` dimensions, and the raw `f32` values.

use std::path::Path;

use super::conv::Real;
use super::net::{layer_slots, DenoiserNet};
use crate::data::format::{read_file, write_file, Cursor};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RSDN";
const VERSION: u16 = 1;

fn tensor_dims() -> Vec<Vec<u32>> {
    let mut dims = Vec::new();
    for slot in layer_slots() {
        dims.push(vec![slot.cout as u32, slot.cin as u32, 3, 3]);
        dims.push(vec![slot.cout as u32]);
    }
    dims
}

pub fn encode_checkpoint<T: Real>(net: &DenoiserNet<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let mut offset = 0;
    for dims in tensor_dims() {
        out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in &dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        let n: usize = dims.iter().map(|&d| d as usize).product();
        for p in &net.params()[offset..offset + n] {
            out.extend_from_slice(&(p.as_f64() as f32).to_le_bytes());
        }
        offset += n;
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<DenoiserNet<f32>> {
    let mut cur = Cursor::new(bytes);
    cur.expect_magic(MAGIC)?;
    let version = cur.u16()?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported checkpoint version {version}")));
    }
    let mut params = Vec::new();
    for expect in tensor_dims() {
        let at = cur.offset();
        let rank = cur.u32()?;
        let mut dims = Vec::with_capacity(rank.min(8) as usize);
        if rank as usize != expect.len() {
            return Err(Error::format(at, format!("tensor rank {rank}, expected {}", expect.len())));
        }
        for _ in 0..rank {
            dims.push(cur.u32()?);
        }
        if dims != expect {
            return Err(Error::format(at, format!("tensor dims {dims:?}, expected {expect:?}")));
        }
        let n: usize = dims.iter().map(|&d| d as usize).product();
        for _ in 0..n {
            let at = cur.offset();
            let v = cur.f32()?;
            if !v.is_finite() {
                return Err(Error::format(at, "non-finite parameter"));
            }
            params.push(v);
        }
    }
    cur.finish()?;
    DenoiserNet::from_params(params)
}

pub fn write_checkpoint<T: Real>(path: &Path, net: &DenoiserNet<T>) -> Result<()> {
    write_file(path, |w| w.write_all(&encode_checkpoint(net)))
}

pub fn read_checkpoint(path: &Path) -> Result<DenoiserNet<f32>> {
    decode_checkpoint(&read_file(path)?)
}
