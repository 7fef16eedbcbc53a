use std::fmt;

use ark_ec::CurveGroup;
use ark_ff::{Field, UniformRand, Zero};
use ark_serialize::CanonicalSerialize;
use rand::RngCore;
use sha2::{Digest, Sha256};

use super::{metrics, Fr, G2Affine, G2Prepared, Gt, PublicParams};

/// Short identifier of a public key: the first 8 bytes of SHA-256 over its
/// compressed encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyId(pub [u8; 8]);

impl fmt::Debug for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyId({})", hex::encode(self.0))
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

/// Which half of a secret key opens a first-level ciphertext.
///
/// Direct first-level encryptions open with `a1`; every re-encrypted
/// ciphertext opens with the delegatee's `a2`, including self-delegation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Slot {
    First = 1,
    Second = 2,
}

#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub(crate) z_a1: Gt,
    pub(crate) g2_a2: G2Affine,
}

impl PublicKey {
    pub fn id(&self) -> KeyId {
        let mut bytes = Vec::with_capacity(576 + 96);
        self.z_a1
            .serialize_compressed(&mut bytes)
            .expect("serializing into a Vec cannot fail");
        self.g2_a2
            .serialize_compressed(&mut bytes)
            .expect("serializing into a Vec cannot fail");
        let digest = Sha256::digest(&bytes);
        let mut id = [0u8; 8];
        id.copy_from_slice(&digest[..8]);
        KeyId(id)
    }

    /// `Z^a1`, the encryption component.
    pub fn z_a1(&self) -> Gt {
        self.z_a1
    }

    /// `g2^a2`, the delegation component.
    pub fn g2_a2(&self) -> G2Affine {
        self.g2_a2
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", self.id())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub(crate) a1: Fr,
    pub(crate) a2: Fr,
    pub(crate) id: KeyId,
}

impl SecretKey {
    pub fn id(&self) -> KeyId {
        self.id
    }

    pub(crate) fn scalar(&self, slot: Slot) -> Fr {
        match slot {
            Slot::First => self.a1,
            Slot::Second => self.a2,
        }
    }

    /// Recomputes the public half.
    pub fn public_key(&self, params: &PublicParams) -> PublicKey {
        PublicKey {
            z_a1: params.z() * self.a1,
            g2_a2: (params.g2() * self.a2).into_affine(),
        }
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecretKey({}, ..)", self.id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub sk: SecretKey,
    pub pk: PublicKey,
}

impl KeyPair {
    pub fn id(&self) -> KeyId {
        self.sk.id
    }

    pub(crate) fn from_scalars(params: &PublicParams, a1: Fr, a2: Fr) -> Self {
        let mut sk = SecretKey {
            a1,
            a2,
            id: KeyId([0; 8]),
        };
        let pk = sk.public_key(params);
        sk.id = pk.id();
        KeyPair { sk, pk }
    }
}

fn nonzero_scalar<R: RngCore + ?Sized>(rng: &mut R) -> Fr {
    loop {
        let s = Fr::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

pub(crate) fn random_scalar<R: RngCore + ?Sized>(rng: &mut R) -> Fr {
    nonzero_scalar(rng)
}

/// Fresh key pair with both secret scalars uniform in `[1, q-1]`.
pub fn keygen<R: RngCore + ?Sized>(params: &PublicParams, rng: &mut R) -> KeyPair {
    let a1 = nonzero_scalar(rng);
    let a2 = nonzero_scalar(rng);
    KeyPair::from_scalars(params, a1, a2)
}

/// Delegation `g2^(a1 * b2)` from the holder of `sk` to the owner of `pk`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReEncryptionKey {
    pub(crate) point: G2Affine,
    pub(crate) from: KeyId,
    pub(crate) to: KeyId,
}

impl ReEncryptionKey {
    pub fn from(&self) -> KeyId {
        self.from
    }

    pub fn to(&self) -> KeyId {
        self.to
    }

    pub fn point(&self) -> G2Affine {
        self.point
    }

    pub fn is_self_delegation(&self) -> bool {
        self.from == self.to
    }

    /// Precomputes the Miller-loop lines for batch re-encryption.
    pub fn prepare(&self) -> PreparedReKey {
        PreparedReKey {
            prepared: G2Prepared::from(self.point),
            from: self.from,
            to: self.to,
        }
    }

    /// Audit-only check `e(g1^x, g2^y) = e(g1, rk)`, available when the
    /// delegator reveals `g1^x` for its first scalar.
    pub fn verify(&self, params: &PublicParams, g1_a1: super::G1Affine, delegatee: &PublicKey) -> bool {
        params.pairing(params.g1(), self.point) == params.pairing(g1_a1, delegatee.g2_a2)
    }
}

pub struct PreparedReKey {
    pub(crate) prepared: G2Prepared,
    pub(crate) from: KeyId,
    pub(crate) to: KeyId,
}

/// Re-encryption key from `sk`'s holder to `pk`'s owner; passing the
/// holder's own public key yields the level-2 to level-1 self-delegation.
pub fn rekey(sk: &SecretKey, pk: &PublicKey) -> ReEncryptionKey {
    metrics::exponentiations(1);
    ReEncryptionKey {
        point: (pk.g2_a2 * sk.a1).into_affine(),
        from: sk.id,
        to: pk.id(),
    }
}

impl SecretKey {
    /// `1 / a_i`, cached by callers that decrypt many ciphertexts.
    pub(crate) fn inverse(&self, slot: Slot) -> Fr {
        self.scalar(slot)
            .inverse()
            .expect("secret scalars are non-zero by construction")
    }
}
