//! Shared header for the LUT-family files.
//!
//! ```text
//! tag:u8 | frac_bits:u8 | magnitude_bits:u8 | scale:u8 | d0:u32 | d1:u32 | d2:u32 | entries
//! ```
//!
//! Entries are i64 little-endian unless the type documents otherwise.

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Header {
    pub frac_bits: u8,
    pub magnitude_bits: u8,
    pub scale: u8,
    pub dims: [u32; 3],
}

impl Header {
    pub fn len(&self) -> Result<usize> {
        self.dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .ok_or_else(|| Error::format("array dimensions overflow"))
    }
}

pub(crate) fn write_header(w: &mut Writer, tag: u8, h: &Header) {
    w.u8(tag);
    w.u8(h.frac_bits);
    w.u8(h.magnitude_bits);
    w.u8(h.scale);
    for d in h.dims {
        w.u32(d);
    }
}

pub(crate) fn read_header(r: &mut Reader<'_>, tag: u8, what: &str) -> Result<Header> {
    r.expect_tag(tag, what)?;
    let frac_bits = r.u8()?;
    let magnitude_bits = r.u8()?;
    let scale = r.u8()?;
    let dims = [r.u32()?, r.u32()?, r.u32()?];
    Ok(Header {
        frac_bits,
        magnitude_bits,
        scale,
        dims,
    })
}

pub(crate) fn write_i64s(w: &mut Writer, values: &[i64]) {
    for &v in values {
        w.i64(v);
    }
}

pub(crate) fn read_i64s(r: &mut Reader<'_>, n: usize) -> Result<Vec<i64>> {
    if r.remaining() / 8 < n {
        return Err(Error::format(format!("array declares {n} entries, input is truncated")));
    }
    (0..n).map(|_| r.i64()).collect()
}
