use ark_ec::pairing::Pairing;
use ark_ec::CurveGroup;
use rand::RngCore;
use rayon::prelude::*;

use super::keys::random_scalar;
use super::{
    dlog_solve, g1_pow, gt_pow, metrics, Curve, Fr, G1Projective, Gt, KeyId, PreparedReKey, PublicKey, PublicParams,
    ReEncryptionKey, SecretKey, Slot,
};
use crate::error::{Error, Result};

/// Terminal ciphertext `(Z^(a r), Z^m Z^r)`, opened by one scalar of the
/// holder's key (see [`Slot`]).
///
/// `scale` is the fixed-point exponent of the plaintext: the encrypted
/// integer represents `m / Q^scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext1 {
    pub(crate) alpha: Gt,
    pub(crate) beta: Gt,
    pub(crate) key: KeyId,
    pub(crate) slot: Slot,
    pub(crate) scale: u16,
}

/// Re-encryptable ciphertext `(g1^r, Z^m Z^(a1 r))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext2 {
    pub(crate) alpha: G1Projective,
    pub(crate) beta: Gt,
    pub(crate) key: KeyId,
    pub(crate) scale: u16,
}

fn mismatch(what: &str, a: impl std::fmt::Debug, b: impl std::fmt::Debug) -> Error {
    Error::Homomorphism(format!("{what} mismatch: {a:?} vs {b:?}"))
}

impl Ciphertext1 {
    pub fn key(&self) -> KeyId {
        self.key
    }

    pub fn slot(&self) -> Slot {
        self.slot
    }

    pub fn scale(&self) -> u16 {
        self.scale
    }

    pub fn alpha(&self) -> Gt {
        self.alpha
    }

    /// Encrypts `m1 + m2`. Operands must share key, slot and scale.
    pub fn checked_add(&self, other: &Ciphertext1) -> Result<Ciphertext1> {
        self.compatible(other)?;
        metrics::additions(1);
        Ok(self.add_unchecked(other))
    }

    pub(crate) fn compatible(&self, other: &Ciphertext1) -> Result<()> {
        if self.key != other.key {
            return Err(mismatch("key", self.key, other.key));
        }
        if self.slot != other.slot {
            return Err(mismatch("decryption slot", self.slot, other.slot));
        }
        if self.scale != other.scale {
            return Err(mismatch("scale", self.scale, other.scale));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn add_unchecked(&self, other: &Ciphertext1) -> Ciphertext1 {
        Ciphertext1 {
            alpha: self.alpha + other.alpha,
            beta: self.beta + other.beta,
            ..self.clone()
        }
    }

    /// Encrypts `k * m` at the same scale.
    pub fn mul_int(&self, k: i64) -> Ciphertext1 {
        self.mul_fixed(k, 0)
    }

    /// Encrypts `k * m` where `k` is itself a fixed-point constant at scale
    /// exponent `k_scale`; the result's scale is the sum.
    pub fn mul_fixed(&self, k: i64, k_scale: u16) -> Ciphertext1 {
        metrics::exponentiations(1);
        Ciphertext1 {
            alpha: gt_pow(self.alpha, k),
            beta: gt_pow(self.beta, k),
            key: self.key,
            slot: self.slot,
            scale: self.scale + k_scale,
        }
    }

    /// Encrypts `-m`. Inversion in the target group is a conjugation, so
    /// this is not counted as an exponentiation.
    pub fn negate(&self) -> Ciphertext1 {
        Ciphertext1 {
            alpha: -self.alpha,
            beta: -self.beta,
            ..self.clone()
        }
    }
}

impl Ciphertext2 {
    pub fn key(&self) -> KeyId {
        self.key
    }

    pub fn scale(&self) -> u16 {
        self.scale
    }

    pub fn checked_add(&self, other: &Ciphertext2) -> Result<Ciphertext2> {
        self.compatible(other)?;
        metrics::additions(1);
        Ok(self.add_unchecked(other))
    }

    pub(crate) fn compatible(&self, other: &Ciphertext2) -> Result<()> {
        if self.key != other.key {
            return Err(mismatch("key", self.key, other.key));
        }
        if self.scale != other.scale {
            return Err(mismatch("scale", self.scale, other.scale));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn add_unchecked(&self, other: &Ciphertext2) -> Ciphertext2 {
        Ciphertext2 {
            alpha: self.alpha + other.alpha,
            beta: self.beta + other.beta,
            key: self.key,
            scale: self.scale,
        }
    }

    pub fn mul_int(&self, k: i64) -> Ciphertext2 {
        self.mul_fixed(k, 0)
    }

    pub fn mul_fixed(&self, k: i64, k_scale: u16) -> Ciphertext2 {
        metrics::exponentiations(1);
        Ciphertext2 {
            alpha: g1_pow(self.alpha, k),
            beta: gt_pow(self.beta, k),
            key: self.key,
            scale: self.scale + k_scale,
        }
    }

    pub fn negate(&self) -> Ciphertext2 {
        Ciphertext2 {
            alpha: -self.alpha,
            beta: -self.beta,
            key: self.key,
            scale: self.scale,
        }
    }
}

/// First-level encryption of `m` under `pk`, opened with `a1`.
///
/// Any `i64` is far below `q / 2`, so the centered encoding cannot wrap.
pub fn enc1<R: RngCore + ?Sized>(
    params: &PublicParams,
    pk: &PublicKey,
    m: i64,
    scale: u16,
    rng: &mut R,
) -> Ciphertext1 {
    enc1_with_id(params, pk, pk.id(), m, scale, rng)
}

pub(crate) fn enc1_with_id<R: RngCore + ?Sized>(
    params: &PublicParams,
    pk: &PublicKey,
    id: KeyId,
    m: i64,
    scale: u16,
    rng: &mut R,
) -> Ciphertext1 {
    metrics::exponentiations(1);
    let r = random_scalar(rng);
    Ciphertext1 {
        alpha: pk.z_a1 * r,
        beta: gt_pow(params.z(), m) + params.z() * r,
        key: id,
        slot: Slot::First,
        scale,
    }
}

/// Second-level (re-encryptable) encryption of `m` under `pk`.
pub fn enc2<R: RngCore + ?Sized>(
    params: &PublicParams,
    pk: &PublicKey,
    m: i64,
    scale: u16,
    rng: &mut R,
) -> Ciphertext2 {
    enc2_with_id(params, pk, pk.id(), m, scale, rng)
}

pub(crate) fn enc2_with_id<R: RngCore + ?Sized>(
    params: &PublicParams,
    pk: &PublicKey,
    id: KeyId,
    m: i64,
    scale: u16,
    rng: &mut R,
) -> Ciphertext2 {
    metrics::exponentiations(1);
    let r = random_scalar(rng);
    Ciphertext2 {
        alpha: params.g1() * r,
        beta: gt_pow(params.z(), m) + pk.z_a1 * r,
        key: id,
        scale,
    }
}

/// Turns a level-2 ciphertext for the delegator into a level-1 ciphertext
/// for the delegatee, opened with the delegatee's second scalar.
pub fn reencrypt(params: &PublicParams, ct: &Ciphertext2, rk: &ReEncryptionKey) -> Result<Ciphertext1> {
    if ct.key != rk.from {
        return Err(Error::Delegation(format!(
            "ciphertext is under key {} but the re-encryption key delegates from {}",
            ct.key, rk.from
        )));
    }
    Ok(Ciphertext1 {
        alpha: params.pairing(ct.alpha.into_affine(), rk.point),
        beta: ct.beta,
        key: rk.to,
        slot: Slot::Second,
        scale: ct.scale,
    })
}

/// Batch re-encryption with a prepared key; order is preserved.
pub fn reencrypt_many(cts: &[Ciphertext2], rk: &PreparedReKey) -> Result<Vec<Ciphertext1>> {
    if let Some(bad) = cts.iter().find(|ct| ct.key != rk.from) {
        return Err(Error::Delegation(format!(
            "ciphertext is under key {} but the re-encryption key delegates from {}",
            bad.key, rk.from
        )));
    }
    let alphas: Vec<_> = cts.iter().map(|ct| ct.alpha).collect();
    let alphas = G1Projective::normalize_batch(&alphas);
    metrics::pairings(cts.len() as u64);
    Ok(cts
        .par_iter()
        .zip(alphas.par_iter())
        .map(|(ct, a)| {
            let ml = Curve::multi_miller_loop([*a], [rk.prepared.clone()]);
            let alpha = Curve::final_exponentiation(ml).expect("final exponentiation of a Miller loop output");
            Ciphertext1 {
                alpha,
                beta: ct.beta,
                key: rk.to,
                slot: Slot::Second,
                scale: ct.scale,
            }
        })
        .collect())
}

fn check_key(sk: &SecretKey, key: KeyId) -> Result<()> {
    if sk.id != key {
        return Err(Error::Delegation(format!(
            "ciphertext is under key {key}, secret key is {}",
            sk.id
        )));
    }
    Ok(())
}

/// Recovers `Z^m` from a level-1 ciphertext without solving the logarithm.
pub(crate) fn unmask1(sk: &SecretKey, inv: Fr, ct: &Ciphertext1) -> Result<Gt> {
    check_key(sk, ct.key)?;
    metrics::exponentiations(1);
    Ok(ct.beta - ct.alpha * inv)
}

pub fn dec1(params: &PublicParams, sk: &SecretKey, ct: &Ciphertext1) -> Result<i64> {
    let lifted = unmask1(sk, sk.inverse(ct.slot), ct)?;
    dlog_solve(params, lifted, params.dlog_bound())
}

/// Decrypts a batch of level-1 ciphertexts sharing one decryption slot.
pub fn dec1_many(params: &PublicParams, sk: &SecretKey, cts: &[Ciphertext1]) -> Result<Vec<i64>> {
    let Some(first) = cts.first() else {
        return Ok(Vec::new());
    };
    let slot = first.slot;
    let inv = sk.inverse(slot);
    let bound = params.dlog_bound();
    // Build the shared table before fanning out.
    params.baby_table(bound);
    cts.par_iter()
        .map(|ct| {
            if ct.slot != slot {
                return Err(mismatch("decryption slot", slot, ct.slot));
            }
            let lifted = unmask1(sk, inv, ct)?;
            dlog_solve(params, lifted, bound)
        })
        .collect()
}

pub fn dec2(params: &PublicParams, sk: &SecretKey, ct: &Ciphertext2) -> Result<i64> {
    check_key(sk, ct.key)?;
    metrics::exponentiations(1);
    metrics::pairings(1);
    let masked = (ct.alpha * sk.a1).into_affine();
    let ml = Curve::multi_miller_loop([masked], [params.g2_prepared().clone()]);
    let mask = Curve::final_exponentiation(ml).expect("final exponentiation of a Miller loop output");
    dlog_solve(params, ct.beta - mask, params.dlog_bound())
}
