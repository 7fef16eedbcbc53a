//! Session-keyed index tables `t_ih`.
//!
//! Row `i` is drawn from HMAC-SHA256(SK_m, "idx" || i || ctr), read as eight
//! little-endian u32 candidates and reduced to `[0, T-1]` by rejection, so
//! every entity holding `SK_m` derives the same table.

use hmac::{Hmac, Mac};
use rand::RngCore;
use rayon::prelude::*;
use sha2::Sha256;

use super::array::{read_header, write_header, Header};
use super::SystemParams;
use crate::codec::{tags, Decode, Encode, Reader, Writer};
use crate::error::{Error, Result};

/// Per-media session key `SK_m`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionKey(pub [u8; 32]);

impl SessionKey {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; 32];
        rng.fill_bytes(&mut k);
        SessionKey(k)
    }
}

impl std::fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SessionKey(..)")
    }
}

impl Encode for SessionKey {
    fn encode(&self, w: &mut Writer) {
        w.raw(&self.0);
    }
}

impl Decode for SessionKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let mut k = [0u8; 32];
        k.copy_from_slice(r.raw(32)?);
        Ok(SessionKey(k))
    }
}

/// `M x S` indices into the LUTs; row `i` lists the entries added to
/// coefficient `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexTable {
    m: usize,
    s: usize,
    t: usize,
    idx: Vec<u32>,
}

impl IndexTable {
    pub fn generate(key: &SessionKey, m: usize, s: usize, t: usize) -> Self {
        assert!(t >= 1 && t <= u32::MAX as usize, "T must be in [1, 2^32)");
        let t32 = t as u64;
        // Largest multiple of T not above 2^32; candidates at or past it are
        // rejected so the reduction is unbiased.
        let zone = (1u64 << 32) - (1u64 << 32) % t32;
        let mac = Hmac::<Sha256>::new_from_slice(&key.0).expect("HMAC accepts any key length");
        let mut idx = vec![0u32; m * s];
        idx.par_chunks_mut(s.max(1)).enumerate().for_each(|(i, row)| {
            let mut filled = 0;
            let mut ctr = 0u32;
            while filled < s {
                let mut h = mac.clone();
                h.update(b"idx");
                h.update(&(i as u64).to_le_bytes());
                h.update(&ctr.to_le_bytes());
                let block = h.finalize().into_bytes();
                for chunk in block.chunks_exact(4) {
                    let c = u32::from_le_bytes(chunk.try_into().expect("4-byte chunk")) as u64;
                    if c < zone && filled < s {
                        row[filled] = (c % t32) as u32;
                        filled += 1;
                    }
                }
                ctr += 1;
            }
        });
        IndexTable { m, s, t, idx }
    }

    /// Builds a table from explicit indices, for tests and fixtures.
    pub fn from_indices(m: usize, s: usize, t: usize, idx: Vec<u32>) -> Result<Self> {
        if idx.len() != m * s {
            return Err(Error::config(format!(
                "index table needs {} entries, got {}",
                m * s,
                idx.len()
            )));
        }
        if let Some(&bad) = idx.iter().find(|&&x| x as usize >= t) {
            return Err(Error::config(format!("index {bad} out of range for T={t}")));
        }
        Ok(IndexTable { m, s, t, idx })
    }

    pub fn media_len(&self) -> usize {
        self.m
    }

    pub fn per_coefficient(&self) -> usize {
        self.s
    }

    pub fn lut_len(&self) -> usize {
        self.t
    }

    pub fn indices(&self) -> &[u32] {
        &self.idx
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.idx[i * self.s..(i + 1) * self.s]
    }

    /// Calls `f` once per distinct index of row `i`; a repeated draw
    /// collapses to a single 1 in the binary selection matrix.
    #[inline]
    pub fn for_each_unique(&self, i: usize, mut f: impl FnMut(usize)) {
        let row = self.row(i);
        for (h, &t) in row.iter().enumerate() {
            if !row[..h].contains(&t) {
                f(t as usize);
            }
        }
    }

    /// Number of distinct indices in row `i`.
    pub fn unique_count(&self, i: usize) -> usize {
        let mut n = 0;
        self.for_each_unique(i, |_| n += 1);
        n
    }
}

pub fn gen_index_table(key: &SessionKey, sys: &SystemParams) -> IndexTable {
    IndexTable::generate(key, sys.m, sys.s, sys.t)
}

impl Encode for IndexTable {
    fn encode(&self, w: &mut Writer) {
        write_header(
            w,
            tags::INDEX_TABLE,
            &Header {
                frac_bits: 0,
                magnitude_bits: 32,
                scale: 0,
                dims: [self.m as u32, self.s as u32, self.t as u32],
            },
        );
        for &i in &self.idx {
            w.u32(i);
        }
    }
}

impl Decode for IndexTable {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let h = read_header(r, tags::INDEX_TABLE, "index table")?;
        let [m, s, t] = h.dims.map(|d| d as usize);
        let n = m
            .checked_mul(s)
            .ok_or_else(|| Error::format("index table dimensions overflow"))?;
        if r.remaining() / 4 < n {
            return Err(Error::format("index table is truncated"));
        }
        let idx = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        IndexTable::from_indices(m, s, t, idx).map_err(|e| Error::format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn key(b: u8) -> SessionKey {
        SessionKey([b; 32])
    }

    #[test]
    fn single_entry_lut() {
        let t = IndexTable::generate(&key(1), 100, 4, 1);
        assert!(t.indices().iter().all(|&i| i == 0));
        assert_eq!(t.unique_count(0), 1);
    }

    #[test]
    fn deterministic_and_key_dependent() {
        let a = IndexTable::generate(&key(1), 1000, 4, 1000);
        let b = IndexTable::generate(&key(1), 1000, 4, 1000);
        let c = IndexTable::generate(&key(2), 1000, 4, 1000);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_stability() {
        // Row i depends only on (key, i), not on M.
        let a = IndexTable::generate(&key(3), 10, 4, 1000);
        let b = IndexTable::generate(&key(3), 20, 4, 1000);
        assert_eq!(a.indices(), &b.indices()[..40]);
    }

    #[test]
    fn chi_square_uniformity() {
        let t = 1000;
        let table = IndexTable::generate(&key(7), 250_000, 4, t);
        let mut counts = vec![0u64; t];
        for &i in table.indices() {
            counts[i as usize] += 1;
        }
        let n = table.indices().len() as f64;
        let expect = n / t as f64;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        let p = 1.0 - ChiSquared::new((t - 1) as f64).unwrap().cdf(stat);
        assert!(p > 0.01, "chi-square {stat}, p = {p}");
    }

    #[test]
    fn duplicates_collapse() {
        let table = IndexTable::from_indices(2, 4, 10, vec![3, 3, 5, 3, 1, 2, 3, 4]).unwrap();
        let mut seen = Vec::new();
        table.for_each_unique(0, |t| seen.push(t));
        assert_eq!(seen, vec![3, 5]);
        assert_eq!(table.unique_count(1), 4);
    }

    #[test]
    fn format_round_trip() {
        let table = IndexTable::generate(&key(4), 64, 4, 1000);
        assert_eq!(IndexTable::from_bytes(&table.to_bytes()).unwrap(), table);
    }
}
