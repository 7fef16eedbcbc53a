use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::message::{ArbitrationBundle, FEntry, Payload, Token, Verdict};
use super::{Bus, MediaId, Part, Role, Scheme, UserId};
use crate::afp::{
    decrypt_media, enc_dlut, enc_elut, enc_fingerprint, enc_joint_decrypt_fingerprint, enc_media,
    enc_media_lut_encrypt, enc_wlut_entries, EncDLut, EncELut, EncFingerprint,
};
use crate::codec::{Decode, Encode, Reader, Writer};
use crate::error::{Error, Result};
use crate::fixed::FpParams;
use crate::lut::{
    detect, encrypt_media, gbar, gen_elut, gen_encoding_matrix, joint_decrypt_fingerprint, Decoder, ELut,
    EncodingMatrix, Fingerprint, IndexTable, MediaVector, SecretMatrix, SessionKey, SystemParams,
};
use crate::pre::{
    dec1_many, keygen, reencrypt_many, rekey, Ciphertext2, KeyPair, PublicKey, PublicParams, ReEncryptionKey, SecretKey,
};

fn sha256(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

fn rng_from(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn write_rng(w: &mut Writer, rng: &ChaCha20Rng) {
    w.raw(&rng.get_seed());
    w.raw(&rng.get_word_pos().to_le_bytes());
}

fn read_rng(r: &mut Reader<'_>) -> Result<ChaCha20Rng> {
    let mut seed = [0u8; 32];
    seed.copy_from_slice(r.raw(32)?);
    let mut pos = [0u8; 16];
    pos.copy_from_slice(r.raw(16)?);
    let mut rng = ChaCha20Rng::from_seed(seed);
    rng.set_word_pos(u128::from_le_bytes(pos));
    Ok(rng)
}

fn write_json<T: serde::Serialize>(w: &mut Writer, v: &T) {
    w.str(&serde_json::to_string(v).expect("parameter structs serialize"));
}

fn read_json<T: serde::de::DeserializeOwned>(r: &mut Reader<'_>) -> Result<T> {
    serde_json::from_str(&r.str()?).map_err(|e| Error::format(format!("bad parameter block: {e}")))
}

fn read_keys(r: &mut Reader<'_>, params: &PublicParams) -> Result<KeyPair> {
    let sk: SecretKey = r.get()?;
    let pk = sk.public_key(params);
    Ok(KeyPair { sk, pk })
}

fn write_map<K, V>(w: &mut Writer, map: &BTreeMap<K, V>, mut f: impl FnMut(&mut Writer, &K, &V)) {
    w.u32(map.len() as u32);
    for (k, v) in map {
        f(w, k, v);
    }
}

fn read_map<K: Ord, V>(
    r: &mut Reader<'_>,
    mut f: impl FnMut(&mut Reader<'_>) -> Result<(K, V)>,
) -> Result<BTreeMap<K, V>> {
    let n = r.u32()?;
    (0..n).map(|_| f(r)).collect()
}

fn read32(r: &mut Reader<'_>) -> Result<[u8; 32]> {
    let mut out = [0u8; 32];
    out.copy_from_slice(r.raw(32)?);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnerMedia {
    pub m: MediaVector,
    pub width: u32,
    pub height: u32,
    pub session_key: SessionKey,
    pub gbar_digest: [u8; 32],
}

pub struct Owner {
    params: PublicParams,
    sys: SystemParams,
    fp: FpParams,
    keys: KeyPair,
    e: ELut,
    g: EncodingMatrix,
    media: BTreeMap<MediaId, OwnerMedia>,
    users: BTreeMap<UserId, PublicKey>,
    grants: BTreeMap<(UserId, MediaId), Token>,
    rng: ChaCha20Rng,
}

impl Owner {
    pub fn new(params: &PublicParams, sys: SystemParams, fp: FpParams, seed: u64) -> Result<Self> {
        sys.validate()?;
        fp.validate()?;
        let mut rng = rng_from(seed);
        let keys = keygen(params, &mut rng);
        let e = gen_elut(&sys, &fp, &mut rng);
        let g = gen_encoding_matrix(&sys, &fp, &mut rng);
        Ok(Owner {
            params: params.clone(),
            sys,
            fp,
            keys,
            e,
            g,
            media: BTreeMap::new(),
            users: BTreeMap::new(),
            grants: BTreeMap::new(),
            rng,
        })
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.keys.pk
    }

    pub fn params(&self) -> &PublicParams {
        &self.params
    }

    pub fn sys(&self) -> &SystemParams {
        &self.sys
    }

    pub fn fp(&self) -> &FpParams {
        &self.fp
    }

    pub fn elut(&self) -> &ELut {
        &self.e
    }

    pub fn encoding_matrix(&self) -> &EncodingMatrix {
        &self.g
    }

    pub fn media(&self, id: &str) -> Option<&OwnerMedia> {
        self.media.get(id)
    }

    pub fn media_ids(&self) -> impl Iterator<Item = &MediaId> {
        self.media.keys()
    }

    /// Adds an item to the catalog and draws its session key.
    pub fn add_media(&mut self, id: &str, m: MediaVector, width: u32, height: u32) -> Result<()> {
        if self.media.contains_key(id) {
            return Err(Error::protocol(format!("duplicate media id {id:?}")));
        }
        if m.len() != self.sys.m {
            return Err(Error::config(format!(
                "media {id:?} has {} coefficients, system expects M={}",
                m.len(),
                self.sys.m
            )));
        }
        let session_key = SessionKey::random(&mut self.rng);
        let idx = IndexTable::generate(&session_key, self.sys.m, self.sys.s, self.sys.t);
        let gbar_digest = gbar(&idx, &self.g).digest();
        self.media.insert(
            id.to_string(),
            OwnerMedia {
                m,
                width,
                height,
                session_key,
                gbar_digest,
            },
        );
        Ok(())
    }

    /// Messages the owner uploads in the storage phase.
    pub fn storage_payloads(&mut self, scheme: Scheme) -> Result<Vec<Payload>> {
        let mut out = vec![
            Payload::EncodingMatrix(self.g.clone()),
            Payload::EncELut(enc_elut(&self.params, &self.keys.pk, &self.e, &mut self.rng)),
        ];
        for (id, item) in &self.media {
            out.push(match scheme {
                Scheme::One => {
                    let idx = IndexTable::generate(&item.session_key, self.sys.m, self.sys.s, self.sys.t);
                    Payload::StoreMedia {
                        media_id: id.clone(),
                        session_key: item.session_key,
                        c: encrypt_media(&item.m, &idx, &self.e)?,
                    }
                }
                Scheme::Two => Payload::StoreEncryptedMedia {
                    media_id: id.clone(),
                    session_key: item.session_key,
                    enc_m: enc_media(&self.params, &self.keys.pk, &item.m, &mut self.rng)?,
                },
            });
        }
        Ok(out)
    }

    pub fn grant(&mut self, user: UserId, request: &Payload) -> Result<Payload> {
        let Payload::AccessRequest { media_id, pk } = request else {
            return Err(Error::protocol(format!(
                "owner expected an access request, got {:?}",
                request.kind()
            )));
        };
        if !self.media.contains_key(media_id) {
            return Err(Error::protocol(format!("unknown media id {media_id:?}")));
        }
        let mut nonce = [0u8; 16];
        self.rng.fill_bytes(&mut nonce);
        let token = Token {
            user,
            media_id: media_id.clone(),
            nonce,
        };
        self.users.insert(user, pk.clone());
        self.grants.insert((user, media_id.clone()), token.clone());
        Ok(Payload::AccessGrant(token))
    }

    /// The owner's only sharing-phase message: `rk_{O→U}` with the grant.
    pub fn delegate(&self, user: UserId, media_id: &str) -> Result<Payload> {
        let token = self
            .grants
            .get(&(user, media_id.to_string()))
            .ok_or_else(|| Error::protocol(format!("user {user} is not authorized for {media_id:?}")))?;
        let pk = &self.users[&user];
        Ok(Payload::Delegation {
            token: token.clone(),
            rk: rekey(&self.keys.sk, pk),
        })
    }

    pub fn bundle(
        &self,
        media_id: &str,
        suspect: MediaVector,
        material: &Payload,
        decoder: Decoder,
        tau: u32,
    ) -> Result<Payload> {
        let Payload::ArbitrationMaterial { gbar, f } = material else {
            return Err(Error::protocol(format!(
                "owner expected arbitration material, got {:?}",
                material.kind()
            )));
        };
        let item = self
            .media
            .get(media_id)
            .ok_or_else(|| Error::protocol(format!("unknown media id {media_id:?}")))?;
        Ok(Payload::ArbitrationBundle(Box::new(ArbitrationBundle {
            media_id: media_id.to_string(),
            original: item.m.clone(),
            suspect,
            gbar: gbar.clone(),
            gbar_digest: item.gbar_digest,
            f: f.clone(),
            decoder,
            tau,
        })))
    }
}

impl Encode for Owner {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.params);
        write_json(w, &self.sys);
        write_json(w, &self.fp);
        w.put(&self.keys.sk);
        w.put(&self.e);
        w.put(&self.g);
        write_map(w, &self.media, |w, id, item| {
            w.str(id);
            w.put(&item.m);
            w.u32(item.width);
            w.u32(item.height);
            w.put(&item.session_key);
            w.raw(&item.gbar_digest);
        });
        write_map(w, &self.users, |w, k, pk| {
            w.u32(*k);
            w.put(pk);
        });
        write_map(w, &self.grants, |w, _, t| w.put(t));
        write_rng(w, &self.rng);
    }
}

impl Decode for Owner {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let params: PublicParams = r.get()?;
        let sys = read_json(r)?;
        let fp = read_json(r)?;
        let keys = read_keys(r, &params)?;
        let e = r.get()?;
        let g = r.get()?;
        let media = read_map(r, |r| {
            Ok((
                r.str()?,
                OwnerMedia {
                    m: r.get()?,
                    width: r.u32()?,
                    height: r.u32()?,
                    session_key: r.get()?,
                    gbar_digest: read32(r)?,
                },
            ))
        })?;
        let users = read_map(r, |r| Ok((r.u32()?, r.get()?)))?;
        let grants = read_map(r, |r| {
            let t: Token = r.get()?;
            Ok(((t.user, t.media_id.clone()), t))
        })?;
        Ok(Owner {
            params,
            sys,
            fp,
            keys,
            e,
            g,
            media,
            users,
            grants,
            rng: read_rng(r)?,
        })
    }
}

#[derive(Clone, Debug)]
struct CloudMedia {
    session_key: SessionKey,
    idx: IndexTable,
    gbar: SecretMatrix,
    c: Option<MediaVector>,
    enc_c: Option<Vec<Ciphertext2>>,
}

#[derive(Clone, Debug)]
struct ShareRequest {
    token: Token,
    enc_b: EncFingerprint,
    rk_self: ReEncryptionKey,
    rk_judge: ReEncryptionKey,
}

pub struct Cloud {
    params: PublicParams,
    sys: SystemParams,
    fp: FpParams,
    g: Option<EncodingMatrix>,
    enc_e: Option<EncELut>,
    media: BTreeMap<MediaId, CloudMedia>,
    f: BTreeMap<UserId, FEntry>,
    d: BTreeMap<(UserId, MediaId), EncDLut>,
    pending: BTreeMap<(UserId, MediaId), ShareRequest>,
    delegations: BTreeMap<UserId, ReEncryptionKey>,
}

impl Cloud {
    pub fn new(params: &PublicParams, sys: SystemParams, fp: FpParams) -> Self {
        Cloud {
            params: params.clone(),
            sys,
            fp,
            g: None,
            enc_e: None,
            media: BTreeMap::new(),
            f: BTreeMap::new(),
            d: BTreeMap::new(),
            pending: BTreeMap::new(),
            delegations: BTreeMap::new(),
        }
    }

    pub fn has_lut_material(&self) -> bool {
        self.g.is_some() && self.enc_e.is_some()
    }

    pub fn media_ids(&self) -> impl Iterator<Item = &MediaId> {
        self.media.keys()
    }

    pub fn stored_c(&self, id: &str) -> Option<&MediaVector> {
        self.media.get(id).and_then(|m| m.c.as_ref())
    }

    pub fn stored_enc_c(&self, id: &str) -> Option<&[Ciphertext2]> {
        self.media.get(id).and_then(|m| m.enc_c.as_deref())
    }

    pub fn gbar(&self, id: &str) -> Option<&SecretMatrix> {
        self.media.get(id).map(|m| &m.gbar)
    }

    pub fn fingerprint_set(&self) -> impl Iterator<Item = &FEntry> {
        self.f.values()
    }

    pub fn dlut_set_len(&self) -> usize {
        self.d.len()
    }

    fn add_media(&mut self, id: &str, session_key: SessionKey) -> Result<CloudMedia> {
        if self.media.contains_key(id) {
            return Err(Error::protocol(format!("duplicate media id {id:?}")));
        }
        let g = self
            .g
            .as_ref()
            .ok_or_else(|| Error::protocol("media arrived before the encoding matrix"))?;
        let idx = IndexTable::generate(&session_key, self.sys.m, self.sys.s, self.sys.t);
        let gbar = gbar(&idx, g);
        Ok(CloudMedia {
            session_key,
            idx,
            gbar,
            c: None,
            enc_c: None,
        })
    }

    pub fn receive_storage(&mut self, p: Payload) -> Result<()> {
        match p {
            Payload::EncodingMatrix(g) => {
                if g.rows() != self.sys.t || g.cols() != self.sys.l {
                    return Err(Error::protocol("encoding matrix does not match the system parameters"));
                }
                self.g = Some(g);
            }
            Payload::EncELut(e) => {
                if e.len() != self.sys.t {
                    return Err(Error::protocol("encrypted E-LUT does not match the system parameters"));
                }
                self.enc_e = Some(e);
            }
            Payload::StoreMedia {
                media_id,
                session_key,
                c,
            } => {
                let mut item = self.add_media(&media_id, session_key)?;
                if c.len() != self.sys.m {
                    return Err(Error::protocol("stored media has the wrong length"));
                }
                item.c = Some(c);
                self.media.insert(media_id, item);
            }
            Payload::StoreEncryptedMedia {
                media_id,
                session_key,
                enc_m,
            } => {
                let mut item = self.add_media(&media_id, session_key)?;
                let enc_e = self
                    .enc_e
                    .as_ref()
                    .ok_or_else(|| Error::protocol("media arrived before the encrypted E-LUT"))?;
                item.enc_c = Some(enc_media_lut_encrypt(&enc_m, enc_e, &item.idx, &self.fp)?);
                self.media.insert(media_id, item);
            }
            other => {
                return Err(Error::protocol(format!(
                    "unexpected {:?} in the storage phase",
                    other.kind()
                )));
            }
        }
        Ok(())
    }

    pub fn receive_share_request(&mut self, from: UserId, p: Payload) -> Result<()> {
        let Payload::ShareRequest {
            token,
            enc_b,
            rk_self,
            rk_judge,
        } = p
        else {
            return Err(Error::protocol(format!(
                "cloud expected a share request, got {:?}",
                p.kind()
            )));
        };
        if token.user != from {
            return Err(Error::protocol(format!(
                "token for user {} presented by user {from}",
                token.user
            )));
        }
        if !self.media.contains_key(&token.media_id) {
            return Err(Error::protocol(format!("unknown media id {:?}", token.media_id)));
        }
        if enc_b.len() != self.sys.l {
            return Err(Error::protocol("encrypted fingerprint has the wrong length"));
        }
        let key = enc_b.key();
        if key != Some(rk_self.from()) || rk_self.to() != rk_self.from() || key != Some(rk_judge.from()) {
            return Err(Error::protocol(
                "re-encryption keys do not match the encrypted fingerprint",
            ));
        }
        self.pending.insert(
            (from, token.media_id.clone()),
            ShareRequest {
                token,
                enc_b,
                rk_self,
                rk_judge,
            },
        );
        Ok(())
    }

    pub fn receive_delegation(&mut self, p: Payload) -> Result<UserId> {
        let Payload::Delegation { token, rk } = p else {
            return Err(Error::protocol(format!(
                "cloud expected a delegation, got {:?}",
                p.kind()
            )));
        };
        let req = self
            .pending
            .get(&(token.user, token.media_id.clone()))
            .ok_or_else(|| Error::protocol(format!("no share request from user {}", token.user)))?;
        if req.token != token {
            return Err(Error::protocol("authorization token does not match the owner's grant"));
        }
        if Some(rk.to()) != req.enc_b.key() {
            return Err(Error::protocol(
                "delegation targets a different key than the requester's",
            ));
        }
        self.delegations.insert(token.user, rk);
        Ok(token.user)
    }

    /// Runs the cloud's share computation and returns the user's response.
    pub fn share(&mut self, scheme: Scheme, user: UserId, media_id: &str, bus: &mut Bus) -> Result<Payload> {
        let req = self
            .pending
            .remove(&(user, media_id.to_string()))
            .ok_or_else(|| Error::protocol(format!("missing authorization token for user {user}")))?;
        let rk_owner = self
            .delegations
            .get(&user)
            .ok_or_else(|| Error::protocol(format!("missing authorization token for user {user}")))?
            .prepare();
        let (g, enc_e) = match (&self.g, &self.enc_e) {
            (Some(g), Some(e)) => (g, e),
            _ => return Err(Error::protocol("no LUT material stored")),
        };
        let item = self
            .media
            .get(media_id)
            .ok_or_else(|| Error::protocol(format!("unknown media id {media_id:?}")))?;

        // One stored level-2 fingerprint per user feeds both F and the D-LUT.
        let source = sha256(&req.enc_b.to_bytes());
        match self.f.get(&user) {
            Some(entry) if entry.source != source => {
                return Err(Error::protocol(format!(
                    "user {user} presented a different encrypted fingerprint than the one in F"
                )));
            }
            Some(_) => {}
            None => {
                let cts = req.enc_b.reencrypt(&req.rk_judge.prepare())?;
                let entry = FEntry { user, source, cts };
                bus.store(Part::Sharing, Role::Cloud, &Payload::FRecord(entry.clone()));
                self.f.insert(user, entry);
            }
        }

        let user_e = enc_e.reencrypt(&rk_owner)?;
        let enc_b1 = req.enc_b.reencrypt(&req.rk_self.prepare())?;
        let enc_w = enc_wlut_entries(&enc_b1, user_e.one(), self.sys.sigma_w, &self.fp)?;
        let enc_d = enc_dlut(&user_e, &enc_w, g, &self.fp)?;

        match scheme {
            Scheme::One => {
                let c = item
                    .c
                    .clone()
                    .ok_or_else(|| Error::protocol(format!("{media_id:?} was stored for the other scheme")))?;
                Ok(Payload::SharePackage {
                    media_id: media_id.to_string(),
                    enc_dlut: enc_d,
                    c,
                    session_key: item.session_key,
                })
            }
            Scheme::Two => {
                let enc_c = item
                    .enc_c
                    .as_ref()
                    .ok_or_else(|| Error::protocol(format!("{media_id:?} was stored for the other scheme")))?;
                bus.store(
                    Part::Sharing,
                    Role::Cloud,
                    &Payload::DRecord {
                        user,
                        media_id: media_id.to_string(),
                        source,
                        dlut_digest: sha256(&enc_d.to_bytes()),
                    },
                );
                let enc_c1 = reencrypt_many(enc_c, &rk_owner)?;
                let out = enc_joint_decrypt_fingerprint(&enc_c1, &enc_d, &item.idx)?;
                self.d.insert((user, media_id.to_string()), enc_d);
                Ok(Payload::EncryptedCopy {
                    media_id: media_id.to_string(),
                    cts: out,
                })
            }
        }
    }

    pub fn arbitration_material(&self, p: &Payload) -> Result<Payload> {
        let Payload::ArbitrationRequest { media_id } = p else {
            return Err(Error::protocol(format!(
                "cloud expected an arbitration request, got {:?}",
                p.kind()
            )));
        };
        let item = self
            .media
            .get(media_id)
            .ok_or_else(|| Error::protocol(format!("unknown media id {media_id:?}")))?;
        Ok(Payload::ArbitrationMaterial {
            gbar: item.gbar.clone(),
            f: self.f.values().cloned().collect(),
        })
    }
}

impl Encode for Cloud {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.params);
        write_json(w, &self.sys);
        write_json(w, &self.fp);
        match (&self.g, &self.enc_e) {
            (Some(g), Some(e)) => {
                w.u8(1);
                w.put(g);
                w.put(e);
            }
            _ => w.u8(0),
        }
        write_map(w, &self.media, |w, id, item| {
            w.str(id);
            w.put(&item.session_key);
            match (&item.c, &item.enc_c) {
                (Some(c), _) => {
                    w.u8(1);
                    w.put(c);
                }
                (None, Some(enc)) => {
                    w.u8(2);
                    w.seq(enc);
                }
                (None, None) => w.u8(0),
            }
        });
        write_map(w, &self.f, |w, _, e| w.put(e));
        write_map(w, &self.d, |w, (k, id), d| {
            w.u32(*k);
            w.str(id);
            w.put(d);
        });
    }
}

impl Decode for Cloud {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let params: PublicParams = r.get()?;
        let sys = read_json(r)?;
        let fp = read_json(r)?;
        let mut cloud = Cloud::new(&params, sys, fp);
        if r.u8()? == 1 {
            cloud.g = Some(r.get()?);
            cloud.enc_e = Some(r.get()?);
        }
        let n = r.u32()?;
        for _ in 0..n {
            let id = r.str()?;
            let session_key: SessionKey = r.get()?;
            let mut item = cloud.add_media(&id, session_key)?;
            match r.u8()? {
                1 => item.c = Some(r.get()?),
                2 => item.enc_c = Some(r.seq()?),
                _ => {}
            }
            cloud.media.insert(id, item);
        }
        cloud.f = read_map(r, |r| {
            let e: FEntry = r.get()?;
            Ok((e.user, e))
        })?;
        cloud.d = read_map(r, |r| Ok(((r.u32()?, r.str()?), r.get()?)))?;
        Ok(cloud)
    }
}

pub struct User {
    id: UserId,
    params: PublicParams,
    fp: FpParams,
    keys: KeyPair,
    b: Fingerprint,
    enc_b: EncFingerprint,
    judge: PublicKey,
    tokens: BTreeMap<MediaId, Token>,
    copies: BTreeMap<MediaId, MediaVector>,
}

impl User {
    pub fn new(id: UserId, params: &PublicParams, fp: FpParams, l: usize, judge: &PublicKey, seed: u64) -> Self {
        let mut rng = rng_from(seed);
        let keys = keygen(params, &mut rng);
        let b = Fingerprint::random(l, &mut rng);
        let enc_b = enc_fingerprint(params, &keys.pk, &b, &mut rng);
        User {
            id,
            params: params.clone(),
            fp,
            keys,
            b,
            enc_b,
            judge: judge.clone(),
            tokens: BTreeMap::new(),
            copies: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> UserId {
        self.id
    }

    pub fn role(&self) -> Role {
        Role::User(self.id)
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.keys.pk
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.b
    }

    pub fn copy(&self, media_id: &str) -> Option<&MediaVector> {
        self.copies.get(media_id)
    }

    pub fn access_request(&self, media_id: &str) -> Payload {
        Payload::AccessRequest {
            media_id: media_id.to_string(),
            pk: self.keys.pk.clone(),
        }
    }

    pub fn accept_grant(&mut self, p: Payload) -> Result<()> {
        let Payload::AccessGrant(token) = p else {
            return Err(Error::protocol(format!(
                "user expected an access grant, got {:?}",
                p.kind()
            )));
        };
        if token.user != self.id {
            return Err(Error::protocol("grant issued to another user"));
        }
        self.tokens.insert(token.media_id.clone(), token);
        Ok(())
    }

    pub fn share_request(&self, media_id: &str) -> Result<Payload> {
        let token = self
            .tokens
            .get(media_id)
            .ok_or_else(|| Error::protocol(format!("missing authorization token for {media_id:?}")))?;
        Ok(Payload::ShareRequest {
            token: token.clone(),
            enc_b: self.enc_b.clone(),
            rk_self: rekey(&self.keys.sk, &self.keys.pk),
            rk_judge: rekey(&self.keys.sk, &self.judge),
        })
    }

    /// Turns the cloud's response into the fingerprinted copy.
    pub fn receive(&mut self, p: Payload, sys: &SystemParams) -> Result<MediaVector> {
        let (media_id, mk) = match p {
            Payload::SharePackage {
                media_id,
                enc_dlut,
                c,
                session_key,
            } => {
                let wide = enc_dlut.decrypt(&self.params, &self.keys.sk, &self.fp)?;
                let idx = IndexTable::generate(&session_key, c.len(), sys.s, wide.len());
                let mk = joint_decrypt_fingerprint(&c, &idx, &wide)?;
                (media_id, mk)
            }
            Payload::EncryptedCopy { media_id, cts } => {
                let mk = decrypt_media(&self.params, &self.keys.sk, &cts, &self.fp)?;
                (media_id, mk)
            }
            other => {
                return Err(Error::protocol(format!(
                    "user expected shared media, got {:?}",
                    other.kind()
                )));
            }
        };
        self.copies.insert(media_id, mk.clone());
        Ok(mk)
    }
}

impl Encode for User {
    fn encode(&self, w: &mut Writer) {
        w.u32(self.id);
        w.put(&self.params);
        write_json(w, &self.fp);
        w.put(&self.keys.sk);
        w.put(&self.b);
        w.put(&self.enc_b);
        w.put(&self.judge);
        write_map(w, &self.tokens, |w, _, t| w.put(t));
        write_map(w, &self.copies, |w, id, m| {
            w.str(id);
            w.put(m);
        });
    }
}

impl Decode for User {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let id = r.u32()?;
        let params: PublicParams = r.get()?;
        let fp = read_json(r)?;
        let keys = read_keys(r, &params)?;
        Ok(User {
            id,
            params,
            fp,
            keys,
            b: r.get()?,
            enc_b: r.get()?,
            judge: r.get()?,
            tokens: read_map(r, |r| {
                let t: Token = r.get()?;
                Ok((t.media_id.clone(), t))
            })?,
            copies: read_map(r, |r| Ok((r.str()?, r.get()?)))?,
        })
    }
}

pub struct Judge {
    params: PublicParams,
    keys: KeyPair,
}

impl Judge {
    pub fn new(params: &PublicParams, seed: u64) -> Self {
        Judge {
            params: params.clone(),
            keys: keygen(params, &mut rng_from(seed)),
        }
    }

    pub fn from_keys(params: &PublicParams, keys: KeyPair) -> Self {
        Judge {
            params: params.clone(),
            keys,
        }
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.keys.pk
    }

    pub fn keys(&self) -> &KeyPair {
        &self.keys
    }

    pub fn arbitrate(&self, p: &Payload) -> Result<Verdict> {
        let Payload::ArbitrationBundle(b) = p else {
            return Err(Error::protocol(format!(
                "judge expected an arbitration bundle, got {:?}",
                p.kind()
            )));
        };
        if b.gbar.digest() != b.gbar_digest {
            return Err(Error::protocol(
                "secret matrix does not match the digest recorded at storage",
            ));
        }
        let decoded = detect(b.decoder, &b.suspect, &b.original, &b.gbar)?;
        let mut distances = Vec::with_capacity(b.f.len());
        for entry in &b.f {
            let bits = dec1_many(&self.params, &self.keys.sk, &entry.cts)?;
            let bits = bits
                .into_iter()
                .map(|v| u8::try_from(v).ok().filter(|&x| x <= 1))
                .collect::<Option<Vec<u8>>>()
                .ok_or_else(|| Error::protocol(format!("fingerprint of user {} is not binary", entry.user)))?;
            let fk = Fingerprint::from_bits(bits)?;
            distances.push((entry.user, decoded.hamming(&fk) as u32));
        }
        let matches = distances
            .iter()
            .filter(|&&(_, d)| d <= b.tau)
            .map(|&(k, _)| k)
            .collect();
        Ok(Verdict {
            media_id: b.media_id.clone(),
            tau: b.tau,
            distances,
            matches,
        })
    }
}

impl Encode for Judge {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.params);
        w.put(&self.keys.sk);
    }
}

impl Decode for Judge {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let params: PublicParams = r.get()?;
        let keys = read_keys(r, &params)?;
        Ok(Judge { params, keys })
    }
}
