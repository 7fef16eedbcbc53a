use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::array::{read_header, read_i64s, write_header, write_i64s, Header};
use super::{DLut, ELut, EncodingMatrix, IndexTable, Strength};
use crate::codec::{tags, Decode, Encode, Reader, Writer};
use crate::error::{Error, Result};
use crate::fixed::{round_div, FpParams};

/// Fixed-point coefficient vector. `scale` is the exponent of `Q`; media
/// and LUT-encrypted media use 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MediaVector {
    values: Vec<i64>,
    scale: u16,
    frac_bits: u8,
    magnitude_bits: u8,
}

impl MediaVector {
    pub fn new(values: Vec<i64>, fp: &FpParams) -> Self {
        MediaVector::with_scale(values, 1, fp)
    }

    pub fn with_scale(values: Vec<i64>, scale: u16, fp: &FpParams) -> Self {
        MediaVector {
            values,
            scale,
            frac_bits: fp.frac_bits as u8,
            magnitude_bits: fp.media_bits as u8,
        }
    }

    pub fn zeros(m: usize, fp: &FpParams) -> Self {
        MediaVector::new(vec![0; m], fp)
    }

    /// Quantizes real coefficients to scale `Q`.
    pub fn quantize(coeffs: &[f64], fp: &FpParams) -> Self {
        MediaVector::new(coeffs.iter().map(|&x| fp.quantize(x, fp.media_bits)).collect(), fp)
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
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

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits as u32
    }

    /// Real-valued coefficients `v / Q^scale`.
    pub fn to_real(&self) -> Vec<f64> {
        let denom = ((1i64 << self.frac_bits) as f64).powi(self.scale as i32);
        self.values.iter().map(|&v| v as f64 / denom).collect()
    }

    /// Rounds to scale 1, half away from zero.
    pub fn rescale_to_unit(&self) -> MediaVector {
        let q = 1i64 << self.frac_bits;
        let d = q.pow(self.scale.saturating_sub(1) as u32);
        MediaVector {
            values: self.values.iter().map(|&v| round_div(v, d)).collect(),
            scale: 1,
            ..*self
        }
    }
}

fn headroom_bits(s: usize) -> u32 {
    usize::BITS - s.leading_zeros()
}

/// Single-value alteration: `ĉ_i = m̂_i + Σ_h Ê(t_ih)` over the distinct
/// indices of row `i`.
pub fn encrypt_media(m: &MediaVector, idx: &IndexTable, e: &ELut) -> Result<MediaVector> {
    if m.len() != idx.media_len() {
        return Err(Error::config(format!(
            "media length {} does not match the index table ({})",
            m.len(),
            idx.media_len()
        )));
    }
    if e.len() != idx.lut_len() {
        return Err(Error::config("E-LUT length does not match the index table"));
    }
    if m.scale != 1 {
        return Err(Error::Homomorphism(format!(
            "media must be at scale 1, got {}",
            m.scale
        )));
    }
    let bits = m.magnitude_bits.max(e.magnitude_bits() as u8) as u32
        + m.frac_bits as u32
        + headroom_bits(idx.per_coefficient());
    let limit = 1i64 << bits;
    let ev = e.values();
    let values = (0..m.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = m.values[i];
            idx.for_each_unique(i, |t| acc += ev[t]);
            if acc.abs() >= limit {
                return Err(Error::Overflow(format!(
                    "ciphertext coefficient {i} needs more than {bits} bits"
                )));
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MediaVector { values, ..*m })
}

/// Applies a D-LUT to LUT-encrypted media, removing the mask and embedding
/// the watermark.
///
/// A scale-1 table is added directly. A scale-2 table is applied to the
/// media lifted to `Q²` and the sum is rounded back to `Q` once per
/// coefficient, which is the order the ciphertext-domain path uses.
pub fn joint_decrypt_fingerprint(c: &MediaVector, idx: &IndexTable, d: &DLut) -> Result<MediaVector> {
    if c.len() != idx.media_len() || d.len() != idx.lut_len() {
        return Err(Error::config("media, index table and D-LUT dimensions disagree"));
    }
    if c.scale != 1 {
        return Err(Error::Homomorphism(format!(
            "encrypted media must be at scale 1, got {}",
            c.scale
        )));
    }
    let q = 1i64 << c.frac_bits;
    let dv = d.values();
    let wide = d.scale() == 2;
    let values = (0..c.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = if wide { q * c.values[i] } else { c.values[i] };
            idx.for_each_unique(i, |t| acc += dv[t]);
            if wide {
                round_div(acc, q)
            } else {
                acc
            }
        })
        .collect();
    Ok(MediaVector { values, ..*c })
}

/// Adds i.i.d. Gaussian noise of the given amplitude to every coefficient,
/// quantized to the media's scale.
pub fn add_noise<R: Rng + ?Sized>(m: &MediaVector, sigma_n: Strength, fp: &FpParams, rng: &mut R) -> MediaVector {
    if sigma_n.is_zero() {
        return m.clone();
    }
    let dist = Normal::new(0.0, sigma_n.amplitude()).expect("finite amplitude");
    let values = m
        .values
        .iter()
        .map(|&v| v + fp.quantize(dist.sample(rng), fp.media_bits))
        .collect();
    MediaVector { values, ..*m }
}

/// `Ḡ = B^m Ĝ`, an `M x L` integer matrix at scale `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretMatrix {
    m: usize,
    l: usize,
    values: Vec<i32>,
    frac_bits: u8,
}

impl SecretMatrix {
    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[i32] {
        &self.values[i * self.l..(i + 1) * self.l]
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits as u32
    }

    /// `Ḡ w` with exact integer arithmetic.
    pub fn mul_vec(&self, w: &[i64]) -> Vec<i64> {
        assert_eq!(w.len(), self.l);
        self.values
            .par_chunks_exact(self.l)
            .map(|row| row.iter().zip(w).map(|(&g, &w)| g as i64 * w).sum())
            .collect()
    }

    /// SHA-256 over the serialized matrix.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}

pub fn gbar(idx: &IndexTable, g: &EncodingMatrix) -> SecretMatrix {
    assert_eq!(idx.lut_len(), g.rows(), "index table and encoding matrix disagree on T");
    let l = g.cols();
    let mut values = vec![0i32; idx.media_len() * l];
    values.par_chunks_mut(l.max(1)).enumerate().for_each(|(i, row)| {
        idx.for_each_unique(i, |t| {
            for (acc, &v) in row.iter_mut().zip(g.row(t)) {
                *acc += v as i32;
            }
        });
    });
    SecretMatrix {
        m: idx.media_len(),
        l,
        values,
        frac_bits: g.frac_bits() as u8,
    }
}

impl Encode for MediaVector {
    fn encode(&self, w: &mut Writer) {
        write_header(
            w,
            tags::MEDIA_VECTOR,
            &Header {
                frac_bits: self.frac_bits,
                magnitude_bits: self.magnitude_bits,
                scale: self.scale as u8,
                dims: [self.values.len() as u32, 1, 1],
            },
        );
        write_i64s(w, &self.values);
    }
}

impl Decode for MediaVector {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let h = read_header(r, tags::MEDIA_VECTOR, "media vector")?;
        Ok(MediaVector {
            values: read_i64s(r, h.len()?)?,
            scale: h.scale as u16,
            frac_bits: h.frac_bits,
            magnitude_bits: h.magnitude_bits,
        })
    }
}

/// Entries are i32 little-endian.
impl Encode for SecretMatrix {
    fn encode(&self, w: &mut Writer) {
        write_header(
            w,
            tags::SECRET_MATRIX,
            &Header {
                frac_bits: self.frac_bits,
                magnitude_bits: 16,
                scale: 1,
                dims: [self.m as u32, self.l as u32, 1],
            },
        );
        for &v in &self.values {
            w.raw(&v.to_le_bytes());
        }
    }
}

impl Decode for SecretMatrix {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let h = read_header(r, tags::SECRET_MATRIX, "secret matrix")?;
        let n = h.len()?;
        if r.remaining() / 4 < n {
            return Err(Error::format("secret matrix is truncated"));
        }
        let raw = r.raw(n * 4)?;
        Ok(SecretMatrix {
            m: h.dims[0] as usize,
            l: h.dims[1] as usize,
            values: raw
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().expect("4-byte chunk")))
                .collect(),
            frac_bits: h.frac_bits,
        })
    }
}
