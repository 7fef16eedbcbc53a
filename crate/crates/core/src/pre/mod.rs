//! Lifted-ElGamal proxy re-encryption over BLS12-381.
//!
//! Plaintexts are small signed integers carried in the exponent of
//! `Z = e(g1, g2)`, which makes both ciphertext levels additively
//! homomorphic and decryption a bounded discrete-log search.
//!
//! | object          | group placement                                  |
//! |-----------------|--------------------------------------------------|
//! | public key      | `(Z^a1 in GT, g2^a2 in G2)`                      |
//! | re-encryption   | `g2^(a1 * b2) in G2`                             |
//! | level-2 ct      | `(g1^r in G1, Z^m * Z^(a1 r) in GT)`             |
//! | level-1 ct      | `(Z^(a r) in GT, Z^m * Z^r in GT)`               |

mod cipher;
pub mod dlog;
mod keys;
pub mod metrics;
mod params;
pub mod wire;

use ark_bls12_381::Bls12_381;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::PrimeGroup;
use ark_ff::Zero;

pub use cipher::{dec1, dec1_many, dec2, enc1, enc2, reencrypt, reencrypt_many, Ciphertext1, Ciphertext2};
pub use dlog::dlog_solve;
pub use keys::{keygen, rekey, KeyId, KeyPair, PreparedReKey, PublicKey, ReEncryptionKey, SecretKey, Slot};
pub use params::{setup, CurveId, PublicParams, DEFAULT_DLOG_BOUND};

pub(crate) type Curve = Bls12_381;
pub type Fr = ark_bls12_381::Fr;
pub type G1Affine = ark_bls12_381::G1Affine;
pub type G1Projective = ark_bls12_381::G1Projective;
pub type G2Affine = ark_bls12_381::G2Affine;
pub type G2Projective = ark_bls12_381::G2Projective;
pub(crate) type G2Prepared = <Bls12_381 as Pairing>::G2Prepared;
/// Target group, written additively (`+` is the field multiplication).
pub type Gt = PairingOutput<Bls12_381>;

/// `x^k` in the target group for a signed machine-word exponent.
#[inline]
pub(crate) fn gt_pow(x: Gt, k: i64) -> Gt {
    match k {
        0 => Gt::zero(),
        1 => x,
        -1 => -x,
        _ => {
            let y = x.mul_bigint([k.unsigned_abs()]);
            if k < 0 {
                -y
            } else {
                y
            }
        }
    }
}

#[inline]
pub(crate) fn g1_pow(x: G1Projective, k: i64) -> G1Projective {
    match k {
        0 => G1Projective::zero(),
        1 => x,
        -1 => -x,
        _ => {
            let y = x.mul_bigint([k.unsigned_abs()]);
            if k < 0 {
                -y
            } else {
                y
            }
        }
    }
}
