//! Byte layouts for the PRE objects.
//!
//! Every object starts with its type tag and the curve id byte. Group
//! elements use the curve library's compressed encodings (G1: 48 bytes,
//! G2: 96 bytes). Target-group elements have no compressed form and take
//! 576 bytes. Integers are little-endian.
//!
//! ```text
//! params  01 | curve | g1 | g2 | Z | dlog_bound:u64
//! pk      02 | curve | Z^a1 | g2^a2
//! sk      03 | curve | a1:32 | a2:32 | key_id:8
//! rk      04 | curve | g2^(xy) | from:8 | to:8
//! ct1     05 | curve | alpha:GT | beta:GT | key_id:8 | slot:u8 | scale:u16
//! ct2     06 | curve | alpha:G1 | beta:GT | key_id:8 | scale:u16
//! ```
//!
//! Target-group elements inside ciphertexts are decoded without the
//! subgroup check, which costs a full exponentiation each; points in the
//! source groups and in keys are always validated.

use ark_ec::pairing::Pairing;
use ark_ec::CurveGroup;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};

use super::{
    Ciphertext1, Ciphertext2, Curve, CurveId, Fr, G1Affine, G2Affine, Gt, KeyId, PublicKey, PublicParams,
    ReEncryptionKey, SecretKey, Slot,
};
use crate::codec::{tags, Decode, Encode, Reader, Writer};
use crate::error::{Error, Result};

pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;
pub const GT_BYTES: usize = 576;
pub const FR_BYTES: usize = 32;

fn put<T: CanonicalSerialize>(w: &mut Writer, x: &T) {
    let mut buf = Vec::with_capacity(x.compressed_size());
    x.serialize_compressed(&mut buf)
        .expect("serializing into a Vec cannot fail");
    w.raw(&buf);
}

fn get<T: CanonicalDeserialize>(r: &mut Reader<'_>, n: usize, validate: Validate, what: &str) -> Result<T> {
    let bytes = r.raw(n)?;
    T::deserialize_with_mode(bytes, Compress::Yes, validate)
        .map_err(|e| Error::format(format!("invalid {what} encoding: {e}")))
}

fn header(w: &mut Writer, tag: u8) {
    w.u8(tag);
    w.u8(CurveId::Bls12_381 as u8);
}

fn read_header(r: &mut Reader<'_>, tag: u8, what: &str) -> Result<()> {
    r.expect_tag(tag, what)?;
    CurveId::from_byte(r.u8()?)?;
    Ok(())
}

fn key_id(r: &mut Reader<'_>) -> Result<KeyId> {
    let mut id = [0u8; 8];
    id.copy_from_slice(r.raw(8)?);
    Ok(KeyId(id))
}

impl Encode for PublicParams {
    fn encode(&self, w: &mut Writer) {
        header(w, tags::PARAMS);
        put(w, &self.g1());
        put(w, &self.g2());
        put(w, &self.z());
        w.u64(self.dlog_bound());
    }
}

impl Decode for PublicParams {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        read_header(r, tags::PARAMS, "params")?;
        let g1: G1Affine = get(r, G1_BYTES, Validate::Yes, "g1")?;
        let g2: G2Affine = get(r, G2_BYTES, Validate::Yes, "g2")?;
        let z: Gt = get(r, GT_BYTES, Validate::No, "Z")?;
        let dlog_bound = r.u64()?;
        if dlog_bound < 1 {
            return Err(Error::config("dlog bound must be at least 1"));
        }
        if Curve::pairing(g1, g2) != z {
            return Err(Error::format("params: Z does not equal e(g1, g2)"));
        }
        Ok(PublicParams::from_parts(CurveId::Bls12_381, g1, g2, z, dlog_bound))
    }
}

impl Encode for PublicKey {
    fn encode(&self, w: &mut Writer) {
        header(w, tags::PUBLIC_KEY);
        put(w, &self.z_a1);
        put(w, &self.g2_a2);
    }
}

impl Decode for PublicKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        read_header(r, tags::PUBLIC_KEY, "public key")?;
        Ok(PublicKey {
            z_a1: get(r, GT_BYTES, Validate::Yes, "public key")?,
            g2_a2: get(r, G2_BYTES, Validate::Yes, "public key")?,
        })
    }
}

impl Encode for SecretKey {
    fn encode(&self, w: &mut Writer) {
        header(w, tags::SECRET_KEY);
        put(w, &self.a1);
        put(w, &self.a2);
        w.raw(&self.id.0);
    }
}

impl Decode for SecretKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        read_header(r, tags::SECRET_KEY, "secret key")?;
        let a1: Fr = get(r, FR_BYTES, Validate::Yes, "scalar")?;
        let a2: Fr = get(r, FR_BYTES, Validate::Yes, "scalar")?;
        if a1 == Fr::from(0u64) || a2 == Fr::from(0u64) {
            return Err(Error::format("secret key scalar is zero"));
        }
        Ok(SecretKey { a1, a2, id: key_id(r)? })
    }
}

impl Encode for ReEncryptionKey {
    fn encode(&self, w: &mut Writer) {
        header(w, tags::REKEY);
        put(w, &self.point);
        w.raw(&self.from.0);
        w.raw(&self.to.0);
    }
}

impl Decode for ReEncryptionKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        read_header(r, tags::REKEY, "re-encryption key")?;
        Ok(ReEncryptionKey {
            point: get(r, G2_BYTES, Validate::Yes, "re-encryption key")?,
            from: key_id(r)?,
            to: key_id(r)?,
        })
    }
}

impl Encode for Ciphertext1 {
    fn encode(&self, w: &mut Writer) {
        header(w, tags::CIPHERTEXT1);
        put(w, &self.alpha);
        put(w, &self.beta);
        w.raw(&self.key.0);
        w.u8(self.slot as u8);
        w.u16(self.scale);
    }
}

impl Decode for Ciphertext1 {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        read_header(r, tags::CIPHERTEXT1, "level-1 ciphertext")?;
        let alpha = get(r, GT_BYTES, Validate::No, "ciphertext")?;
        let beta = get(r, GT_BYTES, Validate::No, "ciphertext")?;
        let key = key_id(r)?;
        let slot = match r.u8()? {
            1 => Slot::First,
            2 => Slot::Second,
            s => return Err(Error::format(format!("invalid decryption slot {s}"))),
        };
        Ok(Ciphertext1 {
            alpha,
            beta,
            key,
            slot,
            scale: r.u16()?,
        })
    }
}

impl Encode for Ciphertext2 {
    fn encode(&self, w: &mut Writer) {
        header(w, tags::CIPHERTEXT2);
        put(w, &self.alpha.into_affine());
        put(w, &self.beta);
        w.raw(&self.key.0);
        w.u16(self.scale);
    }
}

impl Decode for Ciphertext2 {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        read_header(r, tags::CIPHERTEXT2, "level-2 ciphertext")?;
        let alpha: G1Affine = get(r, G1_BYTES, Validate::Yes, "ciphertext")?;
        Ok(Ciphertext2 {
            alpha: alpha.into(),
            beta: get(r, GT_BYTES, Validate::No, "ciphertext")?,
            key: key_id(r)?,
            scale: r.u16()?,
        })
    }
}
