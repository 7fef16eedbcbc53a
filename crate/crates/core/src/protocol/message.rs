use serde::{Deserialize, Serialize};

use super::{MediaId, UserId};
use crate::afp::{EncDLut, EncELut, EncFingerprint};
use crate::codec::{Decode, Encode, Reader, Writer};
use crate::error::{Error, Result};
use crate::lut::{DLut, Decoder, EncodingMatrix, Fingerprint, MediaVector, SecretMatrix, SessionKey};
use crate::pre::{Ciphertext1, Ciphertext2, KeyId, PublicKey, ReEncryptionKey};

/// Opaque authorization the owner grants before sharing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub user: UserId,
    pub media_id: MediaId,
    pub nonce: [u8; 16],
}

/// One member of the cloud's fingerprint set: `E¹_{PK_J}(b_k)` and the
/// digest of the level-2 ciphertext it was re-encrypted from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FEntry {
    pub user: UserId,
    pub source: [u8; 32],
    pub cts: Vec<Ciphertext1>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArbitrationBundle {
    pub media_id: MediaId,
    pub original: MediaVector,
    pub suspect: MediaVector,
    pub gbar: SecretMatrix,
    /// Digest of `Ḡ` recorded by the owner at storage time.
    pub gbar_digest: [u8; 32],
    pub f: Vec<FEntry>,
    pub decoder: Decoder,
    pub tau: u32,
}

/// Judge's decision: every user within `tau` of the decoded fingerprint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub media_id: MediaId,
    pub tau: u32,
    pub distances: Vec<(UserId, u32)>,
    pub matches: Vec<UserId>,
}

impl Verdict {
    pub fn ambiguous(&self) -> bool {
        self.matches.len() > 1
    }

    /// The single accused user, if exactly one matched.
    pub fn accused(&self) -> Option<UserId> {
        match self.matches.as_slice() {
            [k] => Some(*k),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    EncodingMatrix(EncodingMatrix),
    EncELut(EncELut),
    StoreMedia {
        media_id: MediaId,
        session_key: SessionKey,
        c: MediaVector,
    },
    StoreEncryptedMedia {
        media_id: MediaId,
        session_key: SessionKey,
        enc_m: Vec<Ciphertext2>,
    },
    AccessRequest {
        media_id: MediaId,
        pk: PublicKey,
    },
    AccessGrant(Token),
    ShareRequest {
        token: Token,
        enc_b: EncFingerprint,
        rk_self: ReEncryptionKey,
        rk_judge: ReEncryptionKey,
    },
    Delegation {
        token: Token,
        rk: ReEncryptionKey,
    },
    SharePackage {
        media_id: MediaId,
        enc_dlut: EncDLut,
        c: MediaVector,
        session_key: SessionKey,
    },
    EncryptedCopy {
        media_id: MediaId,
        cts: Vec<Ciphertext1>,
    },
    ArbitrationRequest {
        media_id: MediaId,
    },
    ArbitrationMaterial {
        gbar: SecretMatrix,
        f: Vec<FEntry>,
    },
    ArbitrationBundle(Box<ArbitrationBundle>),
    Verdict(Verdict),
    FRecord(FEntry),
    DRecord {
        user: UserId,
        media_id: MediaId,
        source: [u8; 32],
        dlut_digest: [u8; 32],
    },
    /// Never sent by an honest entity; exists so audits can be exercised.
    PlainFingerprint {
        user: UserId,
        b: Fingerprint,
    },
    PlainDLut {
        user: UserId,
        d: DLut,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PayloadKind {
    EncodingMatrix,
    EncELut,
    StoreMedia,
    StoreEncryptedMedia,
    AccessRequest,
    AccessGrant,
    ShareRequest,
    Delegation,
    SharePackage,
    EncryptedCopy,
    ArbitrationRequest,
    ArbitrationMaterial,
    ArbitrationBundle,
    Verdict,
    FRecord,
    DRecord,
    PlainFingerprint,
    PlainDLut,
}

impl PayloadKind {
    const ALL: [PayloadKind; 18] = [
        PayloadKind::EncodingMatrix,
        PayloadKind::EncELut,
        PayloadKind::StoreMedia,
        PayloadKind::StoreEncryptedMedia,
        PayloadKind::AccessRequest,
        PayloadKind::AccessGrant,
        PayloadKind::ShareRequest,
        PayloadKind::Delegation,
        PayloadKind::SharePackage,
        PayloadKind::EncryptedCopy,
        PayloadKind::ArbitrationRequest,
        PayloadKind::ArbitrationMaterial,
        PayloadKind::ArbitrationBundle,
        PayloadKind::Verdict,
        PayloadKind::FRecord,
        PayloadKind::DRecord,
        PayloadKind::PlainFingerprint,
        PayloadKind::PlainDLut,
    ];

    fn code(self) -> u8 {
        self as u8 + 1
    }

    fn from_code(c: u8) -> Result<Self> {
        PayloadKind::ALL
            .get((c as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::format(format!("unknown payload type {c}")))
    }
}

/// What a payload reveals about a user's secrets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Secret {
    Fingerprint,
    DLut,
    Watermarked,
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::EncodingMatrix(_) => PayloadKind::EncodingMatrix,
            Payload::EncELut(_) => PayloadKind::EncELut,
            Payload::StoreMedia { .. } => PayloadKind::StoreMedia,
            Payload::StoreEncryptedMedia { .. } => PayloadKind::StoreEncryptedMedia,
            Payload::AccessRequest { .. } => PayloadKind::AccessRequest,
            Payload::AccessGrant(_) => PayloadKind::AccessGrant,
            Payload::ShareRequest { .. } => PayloadKind::ShareRequest,
            Payload::Delegation { .. } => PayloadKind::Delegation,
            Payload::SharePackage { .. } => PayloadKind::SharePackage,
            Payload::EncryptedCopy { .. } => PayloadKind::EncryptedCopy,
            Payload::ArbitrationRequest { .. } => PayloadKind::ArbitrationRequest,
            Payload::ArbitrationMaterial { .. } => PayloadKind::ArbitrationMaterial,
            Payload::ArbitrationBundle(_) => PayloadKind::ArbitrationBundle,
            Payload::Verdict(_) => PayloadKind::Verdict,
            Payload::FRecord(_) => PayloadKind::FRecord,
            Payload::DRecord { .. } => PayloadKind::DRecord,
            Payload::PlainFingerprint { .. } => PayloadKind::PlainFingerprint,
            Payload::PlainDLut { .. } => PayloadKind::PlainDLut,
        }
    }

    /// User secrets carried, each with the key it is encrypted under, or
    /// `None` when it travels in the clear.
    pub fn secrets(&self) -> Vec<(Secret, Option<KeyId>)> {
        let f_keys = |f: &[FEntry]| -> Vec<(Secret, Option<KeyId>)> {
            f.iter()
                .flat_map(|e| e.cts.iter().map(|c| (Secret::Fingerprint, Some(c.key()))))
                .collect()
        };
        match self {
            Payload::ShareRequest { enc_b, .. } => enc_b
                .entries()
                .iter()
                .map(|c| (Secret::Fingerprint, Some(c.key())))
                .collect(),
            Payload::SharePackage { enc_dlut, .. } => enc_dlut
                .entries()
                .iter()
                .map(|c| (Secret::DLut, Some(c.key())))
                .collect(),
            Payload::EncryptedCopy { cts, .. } => cts.iter().map(|c| (Secret::Watermarked, Some(c.key()))).collect(),
            Payload::ArbitrationMaterial { f, .. } => f_keys(f),
            Payload::ArbitrationBundle(b) => f_keys(&b.f),
            Payload::FRecord(e) => f_keys(std::slice::from_ref(e)),
            Payload::PlainFingerprint { .. } => vec![(Secret::Fingerprint, None)],
            Payload::PlainDLut { .. } => vec![(Secret::DLut, None)],
            _ => Vec::new(),
        }
    }
}

impl Encode for Token {
    fn encode(&self, w: &mut Writer) {
        w.u32(self.user);
        w.str(&self.media_id);
        w.raw(&self.nonce);
    }
}

impl Decode for Token {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let user = r.u32()?;
        let media_id = r.str()?;
        let mut nonce = [0u8; 16];
        nonce.copy_from_slice(r.raw(16)?);
        Ok(Token { user, media_id, nonce })
    }
}

fn read32(r: &mut Reader<'_>) -> Result<[u8; 32]> {
    let mut out = [0u8; 32];
    out.copy_from_slice(r.raw(32)?);
    Ok(out)
}

impl Encode for FEntry {
    fn encode(&self, w: &mut Writer) {
        w.u32(self.user);
        w.raw(&self.source);
        w.seq(&self.cts);
    }
}

impl Decode for FEntry {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(FEntry {
            user: r.u32()?,
            source: read32(r)?,
            cts: r.seq()?,
        })
    }
}

impl Encode for Verdict {
    fn encode(&self, w: &mut Writer) {
        w.str(&self.media_id);
        w.u32(self.tau);
        w.u32(self.distances.len() as u32);
        for &(k, d) in &self.distances {
            w.u32(k);
            w.u32(d);
        }
        w.seq(&self.matches);
    }
}

impl Decode for Verdict {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let media_id = r.str()?;
        let tau = r.u32()?;
        let n = r.u32()? as usize;
        let mut distances = Vec::with_capacity(n.min(r.remaining() / 8));
        for _ in 0..n {
            distances.push((r.u32()?, r.u32()?));
        }
        Ok(Verdict {
            media_id,
            tau,
            distances,
            matches: r.seq()?,
        })
    }
}

impl Encode for ArbitrationBundle {
    fn encode(&self, w: &mut Writer) {
        w.str(&self.media_id);
        w.put(&self.original);
        w.put(&self.suspect);
        w.put(&self.gbar);
        w.raw(&self.gbar_digest);
        w.seq(&self.f);
        w.str(self.decoder.name());
        w.u32(self.tau);
    }
}

impl Decode for ArbitrationBundle {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(ArbitrationBundle {
            media_id: r.str()?,
            original: r.get()?,
            suspect: r.get()?,
            gbar: r.get()?,
            gbar_digest: read32(r)?,
            f: r.seq()?,
            decoder: r.str()?.parse().map_err(|e: Error| Error::format(e.to_string()))?,
            tau: r.u32()?,
        })
    }
}

impl Encode for Payload {
    fn encode(&self, w: &mut Writer) {
        w.u8(self.kind().code());
        match self {
            Payload::EncodingMatrix(g) => w.put(g),
            Payload::EncELut(e) => w.put(e),
            Payload::StoreMedia {
                media_id,
                session_key,
                c,
            } => {
                w.str(media_id);
                w.put(session_key);
                w.put(c);
            }
            Payload::StoreEncryptedMedia {
                media_id,
                session_key,
                enc_m,
            } => {
                w.str(media_id);
                w.put(session_key);
                w.seq(enc_m);
            }
            Payload::AccessRequest { media_id, pk } => {
                w.str(media_id);
                w.put(pk);
            }
            Payload::AccessGrant(t) => w.put(t),
            Payload::ShareRequest {
                token,
                enc_b,
                rk_self,
                rk_judge,
            } => {
                w.put(token);
                w.put(enc_b);
                w.put(rk_self);
                w.put(rk_judge);
            }
            Payload::Delegation { token, rk } => {
                w.put(token);
                w.put(rk);
            }
            Payload::SharePackage {
                media_id,
                enc_dlut,
                c,
                session_key,
            } => {
                w.str(media_id);
                w.put(enc_dlut);
                w.put(c);
                w.put(session_key);
            }
            Payload::EncryptedCopy { media_id, cts } => {
                w.str(media_id);
                w.seq(cts);
            }
            Payload::ArbitrationRequest { media_id } => w.str(media_id),
            Payload::ArbitrationMaterial { gbar, f } => {
                w.put(gbar);
                w.seq(f);
            }
            Payload::ArbitrationBundle(b) => w.put(b.as_ref()),
            Payload::Verdict(v) => w.put(v),
            Payload::FRecord(e) => w.put(e),
            Payload::DRecord {
                user,
                media_id,
                source,
                dlut_digest,
            } => {
                w.u32(*user);
                w.str(media_id);
                w.raw(source);
                w.raw(dlut_digest);
            }
            Payload::PlainFingerprint { user, b } => {
                w.u32(*user);
                w.put(b);
            }
            Payload::PlainDLut { user, d } => {
                w.u32(*user);
                w.put(d);
            }
        }
    }
}

impl Decode for Payload {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(match PayloadKind::from_code(r.u8()?)? {
            PayloadKind::EncodingMatrix => Payload::EncodingMatrix(r.get()?),
            PayloadKind::EncELut => Payload::EncELut(r.get()?),
            PayloadKind::StoreMedia => Payload::StoreMedia {
                media_id: r.str()?,
                session_key: r.get()?,
                c: r.get()?,
            },
            PayloadKind::StoreEncryptedMedia => Payload::StoreEncryptedMedia {
                media_id: r.str()?,
                session_key: r.get()?,
                enc_m: r.seq()?,
            },
            PayloadKind::AccessRequest => Payload::AccessRequest {
                media_id: r.str()?,
                pk: r.get()?,
            },
            PayloadKind::AccessGrant => Payload::AccessGrant(r.get()?),
            PayloadKind::ShareRequest => Payload::ShareRequest {
                token: r.get()?,
                enc_b: r.get()?,
                rk_self: r.get()?,
                rk_judge: r.get()?,
            },
            PayloadKind::Delegation => Payload::Delegation {
                token: r.get()?,
                rk: r.get()?,
            },
            PayloadKind::SharePackage => Payload::SharePackage {
                media_id: r.str()?,
                enc_dlut: r.get()?,
                c: r.get()?,
                session_key: r.get()?,
            },
            PayloadKind::EncryptedCopy => Payload::EncryptedCopy {
                media_id: r.str()?,
                cts: r.seq()?,
            },
            PayloadKind::ArbitrationRequest => Payload::ArbitrationRequest { media_id: r.str()? },
            PayloadKind::ArbitrationMaterial => Payload::ArbitrationMaterial {
                gbar: r.get()?,
                f: r.seq()?,
            },
            PayloadKind::ArbitrationBundle => Payload::ArbitrationBundle(Box::new(r.get()?)),
            PayloadKind::Verdict => Payload::Verdict(r.get()?),
            PayloadKind::FRecord => Payload::FRecord(r.get()?),
            PayloadKind::DRecord => Payload::DRecord {
                user: r.u32()?,
                media_id: r.str()?,
                source: read32(r)?,
                dlut_digest: read32(r)?,
            },
            PayloadKind::PlainFingerprint => Payload::PlainFingerprint {
                user: r.u32()?,
                b: r.get()?,
            },
            PayloadKind::PlainDLut => Payload::PlainDLut {
                user: r.u32()?,
                d: r.get()?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_codes_round_trip() {
        for k in PayloadKind::ALL {
            assert_eq!(PayloadKind::from_code(k.code()).unwrap(), k);
        }
        assert!(PayloadKind::from_code(0).is_err());
        assert!(PayloadKind::from_code(200).is_err());
    }

    #[test]
    fn small_payloads_round_trip() {
        let t = Token {
            user: 3,
            media_id: "lena".into(),
            nonce: [9; 16],
        };
        for p in [
            Payload::AccessGrant(t),
            Payload::ArbitrationRequest { media_id: "x".into() },
            Payload::Verdict(Verdict {
                media_id: "x".into(),
                tau: 2,
                distances: vec![(1, 0), (2, 25)],
                matches: vec![1],
            }),
            Payload::PlainFingerprint {
                user: 1,
                b: Fingerprint::from_bits(vec![1, 0, 1]).unwrap(),
            },
        ] {
            assert_eq!(Payload::from_bytes(&p.to_bytes()).unwrap(), p);
        }
    }
}
