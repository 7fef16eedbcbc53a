use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::array::{read_header, read_i64s, write_header, write_i64s, Header};
use super::{Strength, SystemParams};
use crate::codec::{tags, Decode, Encode, Reader, Writer};
use crate::error::{Error, Result};
use crate::fixed::{round_div, FpParams};

fn normal(std: f64) -> Normal<f64> {
    Normal::new(0.0, std).expect("standard deviation is finite and non-negative")
}

/// Encryption LUT `Ê`, entries at scale `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ELut {
    values: Vec<i64>,
    frac_bits: u8,
    magnitude_bits: u8,
}

impl ELut {
    pub fn from_values(values: Vec<i64>, fp: &FpParams) -> Self {
        ELut {
            values,
            frac_bits: fp.frac_bits as u8,
            magnitude_bits: fp.elut_bits as u8,
        }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitude_bits(&self) -> u32 {
        self.magnitude_bits as u32
    }
}

pub fn gen_elut<R: Rng + ?Sized>(sys: &SystemParams, fp: &FpParams, rng: &mut R) -> ELut {
    let dist = normal(sys.sigma_e);
    let values = (0..sys.t)
        .map(|_| fp.quantize(dist.sample(rng), fp.elut_bits))
        .collect();
    ELut::from_values(values, fp)
}

/// `T x L` encoding matrix `Ĝ`, row-major, entries at scale `Q`.
///
/// Entries are drawn from `N(0, 1/L)` before quantization, so a W-LUT entry
/// has unit variance per unit of embedding amplitude.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingMatrix {
    t: usize,
    l: usize,
    values: Vec<i64>,
    frac_bits: u8,
    magnitude_bits: u8,
}

impl EncodingMatrix {
    pub fn from_values(t: usize, l: usize, values: Vec<i64>, fp: &FpParams) -> Result<Self> {
        if values.len() != t * l {
            return Err(Error::config(format!(
                "encoding matrix needs {} entries for {t}x{l}, got {}",
                t * l,
                values.len()
            )));
        }
        Ok(EncodingMatrix {
            t,
            l,
            values,
            frac_bits: fp.frac_bits as u8,
            magnitude_bits: fp.wlut_bits as u8,
        })
    }

    pub fn rows(&self) -> usize {
        self.t
    }

    pub fn cols(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[i64] {
        &self.values[t * self.l..(t + 1) * self.l]
    }

    #[inline]
    pub fn get(&self, t: usize, l: usize) -> i64 {
        self.values[t * self.l + l]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits as u32
    }

    /// Largest `|Ĝ(t, l)|` in each column.
    pub fn column_max_abs(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.l];
        for row in self.values.chunks_exact(self.l) {
            for (m, &v) in out.iter_mut().zip(row) {
                *m = (*m).max(v.unsigned_abs());
            }
        }
        out
    }
}

pub fn gen_encoding_matrix<R: Rng + ?Sized>(sys: &SystemParams, fp: &FpParams, rng: &mut R) -> EncodingMatrix {
    let dist = normal((1.0 / sys.l as f64).sqrt());
    let values = (0..sys.t * sys.l)
        .map(|_| fp.quantize(dist.sample(rng), fp.wlut_bits))
        .collect();
    EncodingMatrix::from_values(sys.t, sys.l, values, fp).expect("dimensions match by construction")
}

/// A user's `L`-bit identity code.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    bits: Vec<u8>,
}

impl Fingerprint {
    pub fn random<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Self {
        Fingerprint {
            bits: (0..l).map(|_| rng.gen_range(0..=1u8)).collect(),
        }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::format(format!("fingerprint bit {b} is not 0 or 1")));
        }
        Ok(Fingerprint { bits })
    }

    pub fn zeros(l: usize) -> Self {
        Fingerprint { bits: vec![0; l] }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn flip(&mut self, l: usize) {
        self.bits[l] ^= 1;
    }

    pub fn hamming(&self, other: &Fingerprint) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count() + self.bits.len().abs_diff(other.bits.len())
    }
}

impl std::fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Watermark entries `ŵ_l = ±quantize(σ_W)` at scale `Q`.
pub fn wlut_entries(b: &Fingerprint, sigma_w: Strength, fp: &FpParams) -> Vec<i64> {
    let q = fp.quantize(sigma_w.amplitude(), fp.wlut_bits);
    b.bits.iter().map(|&bit| if bit == 1 { q } else { -q }).collect()
}

/// `Ŵ₂ = Ĝ ŵ` at scale `Q²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WLut {
    values: Vec<i64>,
    frac_bits: u8,
    magnitude_bits: u8,
}

impl WLut {
    pub fn values(&self) -> &[i64] {
        &self.values
    }
}

pub fn gen_wlut(g: &EncodingMatrix, w: &[i64]) -> WLut {
    assert_eq!(w.len(), g.cols(), "watermark length must equal the fingerprint length");
    let values = (0..g.rows())
        .map(|t| g.row(t).iter().zip(w).map(|(a, b)| a * b).sum())
        .collect();
    WLut {
        values,
        frac_bits: g.frac_bits,
        magnitude_bits: g.magnitude_bits,
    }
}

/// Decryption LUT. `scale` is 1 for `D̂` (the user-side table) and 2 for
/// the unrounded `D̂₂ = -Q Ê + Ŵ₂` produced in the ciphertext domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DLut {
    values: Vec<i64>,
    scale: u16,
    frac_bits: u8,
    magnitude_bits: u8,
}

impl DLut {
    pub fn from_values(values: Vec<i64>, scale: u16, fp: &FpParams) -> Result<Self> {
        if !(1..=2).contains(&scale) {
            return Err(Error::Homomorphism(format!(
                "D-LUT scale exponent must be 1 or 2, got {scale}"
            )));
        }
        Ok(DLut {
            values,
            scale,
            frac_bits: fp.frac_bits as u8,
            magnitude_bits: fp.elut_bits as u8,
        })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn scale(&self) -> u16 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Brings a scale-2 table to scale 1, rounding each entry half away
    /// from zero. Scale-1 tables are returned unchanged.
    pub fn rescale(&self) -> DLut {
        if self.scale == 1 {
            return self.clone();
        }
        let q = 1i64 << self.frac_bits;
        DLut {
            values: self.values.iter().map(|&v| round_div(v, q)).collect(),
            scale: 1,
            ..*self
        }
    }
}

fn check_dims(e: &ELut, g: &EncodingMatrix, b: &Fingerprint) {
    assert_eq!(e.len(), g.rows(), "E-LUT and encoding matrix disagree on T");
    assert_eq!(b.len(), g.cols(), "fingerprint and encoding matrix disagree on L");
}

/// `D̂₂(t) = -Q Ê(t) + Ŵ₂(t)` at scale `Q²`, before any rounding.
pub fn gen_dlut_wide(e: &ELut, g: &EncodingMatrix, b: &Fingerprint, sigma_w: Strength, fp: &FpParams) -> DLut {
    check_dims(e, g, b);
    let w = gen_wlut(g, &wlut_entries(b, sigma_w, fp));
    let q = fp.q();
    let values = e.values.iter().zip(&w.values).map(|(&e, &w)| -q * e + w).collect();
    DLut::from_values(values, 2, fp).expect("scale 2 is valid")
}

/// The user's D-LUT `D̂(t) = round((-Q Ê(t) + Ŵ₂(t)) / Q)` at scale `Q`.
pub fn gen_dlut(e: &ELut, g: &EncodingMatrix, b: &Fingerprint, sigma_w: Strength, fp: &FpParams) -> DLut {
    gen_dlut_wide(e, g, b, sigma_w, fp).rescale()
}

fn header(frac_bits: u8, magnitude_bits: u8, scale: u16, dims: [usize; 3]) -> Header {
    Header {
        frac_bits,
        magnitude_bits,
        scale: scale as u8,
        dims: dims.map(|d| d as u32),
    }
}

impl Encode for ELut {
    fn encode(&self, w: &mut Writer) {
        write_header(
            w,
            tags::ELUT,
            &header(self.frac_bits, self.magnitude_bits, 1, [self.len(), 1, 1]),
        );
        write_i64s(w, &self.values);
    }
}

impl Decode for ELut {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let h = read_header(r, tags::ELUT, "E-LUT")?;
        Ok(ELut {
            values: read_i64s(r, h.len()?)?,
            frac_bits: h.frac_bits,
            magnitude_bits: h.magnitude_bits,
        })
    }
}

impl Encode for EncodingMatrix {
    fn encode(&self, w: &mut Writer) {
        write_header(
            w,
            tags::ENCODING_MATRIX,
            &header(self.frac_bits, self.magnitude_bits, 1, [self.t, self.l, 1]),
        );
        write_i64s(w, &self.values);
    }
}

impl Decode for EncodingMatrix {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let h = read_header(r, tags::ENCODING_MATRIX, "encoding matrix")?;
        Ok(EncodingMatrix {
            t: h.dims[0] as usize,
            l: h.dims[1] as usize,
            values: read_i64s(r, h.len()?)?,
            frac_bits: h.frac_bits,
            magnitude_bits: h.magnitude_bits,
        })
    }
}

impl Encode for DLut {
    fn encode(&self, w: &mut Writer) {
        write_header(
            w,
            tags::DLUT,
            &header(self.frac_bits, self.magnitude_bits, self.scale, [self.len(), 1, 1]),
        );
        write_i64s(w, &self.values);
    }
}

impl Decode for DLut {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let h = read_header(r, tags::DLUT, "D-LUT")?;
        if !(1..=2).contains(&h.scale) {
            return Err(Error::format(format!("D-LUT scale exponent {} out of range", h.scale)));
        }
        Ok(DLut {
            values: read_i64s(r, h.len()?)?,
            scale: h.scale as u16,
            frac_bits: h.frac_bits,
            magnitude_bits: h.magnitude_bits,
        })
    }
}

impl Encode for WLut {
    fn encode(&self, w: &mut Writer) {
        write_header(
            w,
            tags::WLUT,
            &header(self.frac_bits, self.magnitude_bits, 2, [self.values.len(), 1, 1]),
        );
        write_i64s(w, &self.values);
    }
}

impl Decode for WLut {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let h = read_header(r, tags::WLUT, "W-LUT")?;
        Ok(WLut {
            values: read_i64s(r, h.len()?)?,
            frac_bits: h.frac_bits,
            magnitude_bits: h.magnitude_bits,
        })
    }
}

impl Encode for Fingerprint {
    fn encode(&self, w: &mut Writer) {
        w.u8(tags::FINGERPRINT);
        w.bytes(&self.bits);
    }
}

impl Decode for Fingerprint {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        r.expect_tag(tags::FINGERPRINT, "fingerprint")?;
        Fingerprint::from_bits(r.bytes()?.to_vec())
    }
}
