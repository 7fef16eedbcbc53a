use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use ark_ec::pairing::Pairing;
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::PrimeField;
use sha2::{Digest, Sha256};

use super::dlog::BabyTable;
use super::{metrics, Curve, Fr, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt};
use crate::error::{Error, Result};

/// Default decryption bound, 2^26.
pub const DEFAULT_DLOG_BOUND: u64 = 1 << 26;

/// Identifies the pairing-friendly curve every serialized object is bound to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CurveId {
    Bls12_381 = 0x01,
}

impl CurveId {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0x01 => Ok(CurveId::Bls12_381),
            other => Err(Error::config(format!("unknown curve id {other:#04x}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveId::Bls12_381 => "bls12-381",
        }
    }
}

/// Bilinear-group context shared by every entity.
///
/// Ciphertext randomness lives in source group one, delegation material
/// (public-key second components and re-encryption keys) in source group
/// two, and `Z = e(g1, g2)` generates the target group used for lifted
/// plaintexts.
#[derive(Clone)]
pub struct PublicParams {
    inner: Arc<Inner>,
}

struct Inner {
    curve: CurveId,
    g1: G1Affine,
    g2: G2Affine,
    z: Gt,
    dlog_bound: u64,
    g2_prepared: OnceLock<G2Prepared>,
    tables: Mutex<HashMap<u64, Arc<BabyTable>>>,
}

impl PublicParams {
    pub(crate) fn from_parts(curve: CurveId, g1: G1Affine, g2: G2Affine, z: Gt, dlog_bound: u64) -> Self {
        PublicParams {
            inner: Arc::new(Inner {
                curve,
                g1,
                g2,
                z,
                dlog_bound,
                g2_prepared: OnceLock::new(),
                tables: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn curve(&self) -> CurveId {
        self.inner.curve
    }

    pub fn g1(&self) -> G1Affine {
        self.inner.g1
    }

    pub fn g2(&self) -> G2Affine {
        self.inner.g2
    }

    pub fn z(&self) -> Gt {
        self.inner.z
    }

    pub fn dlog_bound(&self) -> u64 {
        self.inner.dlog_bound
    }

    /// Group order q in decimal.
    pub fn order(&self) -> String {
        <Fr as PrimeField>::MODULUS.to_string()
    }

    pub fn pairing(&self, a: G1Affine, b: G2Affine) -> Gt {
        metrics::pairings(1);
        Curve::pairing(a, b)
    }

    pub(crate) fn g2_prepared(&self) -> &G2Prepared {
        self.inner.g2_prepared.get_or_init(|| G2Prepared::from(self.inner.g2))
    }

    /// Baby-step table for the given bound, built once and shared.
    pub fn baby_table(&self, bound: u64) -> Arc<BabyTable> {
        let mut tables = self.inner.tables.lock().expect("baby-step table cache poisoned");
        tables
            .entry(bound)
            .or_insert_with(|| Arc::new(BabyTable::build(self.inner.z, bound)))
            .clone()
    }
}

impl PartialEq for PublicParams {
    fn eq(&self, other: &Self) -> bool {
        self.inner.curve == other.inner.curve
            && self.inner.g1 == other.inner.g1
            && self.inner.g2 == other.inner.g2
            && self.inner.z == other.inner.z
            && self.inner.dlog_bound == other.inner.dlog_bound
    }
}

impl Eq for PublicParams {}

impl fmt::Debug for PublicParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicParams")
            .field("curve", &self.inner.curve.name())
            .field("dlog_bound", &self.inner.dlog_bound)
            .finish_non_exhaustive()
    }
}

/// Hashes `seed` under a domain label to a non-zero scalar.
pub(crate) fn hash_to_scalar(domain: &[u8], seed: &[u8]) -> Fr {
    let mut counter = 0u32;
    loop {
        let digest = Sha256::new()
            .chain_update(b"creams/v1/")
            .chain_update(domain)
            .chain_update(counter.to_le_bytes())
            .chain_update(seed)
            .finalize();
        let s = Fr::from_le_bytes_mod_order(&digest);
        if s != Fr::from(0u64) {
            return s;
        }
        counter += 1;
    }
}

/// Deterministic public parameters for the compiled-in curve.
///
/// The generators are seed-derived multiples of the standard BLS12-381
/// generators, so equal seeds give byte-identical parameters.
pub fn setup(seed: &[u8], dlog_bound: u64) -> Result<PublicParams> {
    if dlog_bound < 1 {
        return Err(Error::config("dlog bound must be at least 1"));
    }
    let g1 = (G1Projective::generator() * hash_to_scalar(b"g1", seed)).into_affine();
    let g2 = (G2Projective::generator() * hash_to_scalar(b"g2", seed)).into_affine();
    let z = Curve::pairing(g1, g2);
    Ok(PublicParams::from_parts(CurveId::Bls12_381, g1, g2, z, dlog_bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ec::AffineRepr;
    use ark_ff::Zero;

    #[test]
    fn non_degenerate() {
        let p = setup(b"seed", DEFAULT_DLOG_BOUND).unwrap();
        assert!(!p.z().is_zero(), "e(g1, g2) must not be the identity");
        assert!(!p.g1().is_zero() && !p.g2().is_zero());
    }

    #[test]
    fn deterministic() {
        let a = setup(b"s", 1000).unwrap();
        let b = setup(b"s", 1000).unwrap();
        assert_eq!(a, b);
        let c = setup(b"t", 1000).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bilinear_on_small_exponents() {
        let p = setup(b"bilinear", 1000).unwrap();
        let lhs = p.pairing(
            (p.g1() * Fr::from(3u64)).into_affine(),
            (p.g2() * Fr::from(5u64)).into_affine(),
        );
        assert_eq!(lhs, p.z() * Fr::from(15u64));
    }

    #[test]
    fn zero_bound_rejected() {
        assert!(matches!(setup(b"s", 0), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_curve_byte() {
        assert!(CurveId::from_byte(0x7f).is_err());
        assert_eq!(CurveId::from_byte(0x01).unwrap(), CurveId::Bls12_381);
    }
}
