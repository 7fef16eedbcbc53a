//! Fingerprint decoders on `Δ = suspect - original`.
//!
//! Both work in floating point on the dequantized difference. The common
//! positive factor `1/Q` in `Ḡ` does not change any sign, so the integer
//! matrix is used as is.

use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Fingerprint, MediaVector, SecretMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decoder {
    /// `sgn(Ḡᵀ Δ)`
    MatchedFilter,
    /// `sgn((ḠᵀḠ)⁻¹ Ḡᵀ Δ)`
    PseudoInverse,
}

impl Decoder {
    pub fn name(self) -> &'static str {
        match self {
            Decoder::MatchedFilter => "mf",
            Decoder::PseudoInverse => "pinv",
        }
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mf" => Ok(Decoder::MatchedFilter),
            "pinv" => Ok(Decoder::PseudoInverse),
            other => Err(Error::config(format!("unknown decoder {other:?}, expected mf or pinv"))),
        }
    }
}

impl std::fmt::Display for Decoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `sgn`: strictly positive maps to 1, everything else to 0.
fn sgn(z: &[f64]) -> Fingerprint {
    Fingerprint::from_bits(z.iter().map(|&v| u8::from(v > 0.0)).collect()).expect("bits are 0 or 1")
}

fn delta(suspect: &MediaVector, original: &MediaVector, gbar: &SecretMatrix) -> Result<Vec<f64>> {
    if suspect.len() != original.len() || suspect.len() != gbar.rows() {
        return Err(Error::Decoder(format!(
            "length mismatch: suspect {}, original {}, secret matrix {} rows",
            suspect.len(),
            original.len(),
            gbar.rows()
        )));
    }
    if suspect.scale() != original.scale() {
        return Err(Error::Decoder("suspect and original are at different scales".into()));
    }
    let s = suspect.to_real();
    let o = original.to_real();
    Ok(s.iter().zip(&o).map(|(a, b)| a - b).collect())
}

/// `Ḡᵀ v`.
fn gbar_t_mul(gbar: &SecretMatrix, v: &[f64]) -> Vec<f64> {
    let l = gbar.cols();
    gbar.values()
        .par_chunks_exact(l)
        .zip(v.par_iter())
        .fold(
            || vec![0.0; l],
            |mut acc, (row, &d)| {
                for (a, &g) in acc.iter_mut().zip(row) {
                    *a += g as f64 * d;
                }
                acc
            },
        )
        .reduce(
            || vec![0.0; l],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Matched filter on a real-valued difference vector.
pub fn mf_from_delta(gbar: &SecretMatrix, delta: &[f64]) -> Fingerprint {
    assert_eq!(delta.len(), gbar.rows());
    sgn(&gbar_t_mul(gbar, delta))
}

pub fn detect_mf(suspect: &MediaVector, original: &MediaVector, gbar: &SecretMatrix) -> Result<Fingerprint> {
    Ok(mf_from_delta(gbar, &delta(suspect, original, gbar)?))
}

/// Pseudo-inverse decoder with the factorized Gram matrix, reusable across
/// suspects that share one `Ḡ`.
pub struct PinvDecoder {
    chol: Cholesky<f64, Dyn>,
}

impl PinvDecoder {
    pub fn new(gbar: &SecretMatrix) -> Result<Self> {
        let l = gbar.cols();
        // Integer entries keep the Gram matrix exact.
        let gram = gbar
            .values()
            .par_chunks_exact(l)
            .fold(
                || vec![0i64; l * l],
                |mut acc, row| {
                    for a in 0..l {
                        let ra = row[a] as i64;
                        if ra == 0 {
                            continue;
                        }
                        for b in a..l {
                            acc[a * l + b] += ra * row[b] as i64;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0i64; l * l],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let m = DMatrix::from_fn(l, l, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            gram[a * l + b] as f64
        });
        let max_diag = (0..l).map(|i| m[(i, i)]).fold(0.0f64, f64::max);
        let chol = Cholesky::new(m).ok_or_else(|| Error::Decoder("secret matrix is rank deficient".into()))?;
        // A pivot this small relative to the largest diagonal entry means
        // the columns are numerically dependent.
        let min_pivot = (0..l).map(|i| chol.l_dirty()[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot.is_nan() || min_pivot * min_pivot <= 1e-10 * max_diag {
            return Err(Error::Decoder(format!(
                "secret matrix is numerically rank deficient (pivot {min_pivot:e})"
            )));
        }
        Ok(PinvDecoder { chol })
    }

    /// Decodes a real-valued difference vector.
    pub fn decode_delta(&self, gbar: &SecretMatrix, delta: &[f64]) -> Fingerprint {
        assert_eq!(delta.len(), gbar.rows());
        let rhs = DVector::from_vec(gbar_t_mul(gbar, delta));
        sgn(self.chol.solve(&rhs).as_slice())
    }

    pub fn decode(&self, suspect: &MediaVector, original: &MediaVector, gbar: &SecretMatrix) -> Result<Fingerprint> {
        Ok(self.decode_delta(gbar, &delta(suspect, original, gbar)?))
    }
}

pub fn detect_pinv(suspect: &MediaVector, original: &MediaVector, gbar: &SecretMatrix) -> Result<Fingerprint> {
    PinvDecoder::new(gbar)?.decode(suspect, original, gbar)
}

pub fn detect(
    decoder: Decoder,
    suspect: &MediaVector,
    original: &MediaVector,
    gbar: &SecretMatrix,
) -> Result<Fingerprint> {
    match decoder {
        Decoder::MatchedFilter => detect_mf(suspect, original, gbar),
        Decoder::PseudoInverse => detect_pinv(suspect, original, gbar),
    }
}
