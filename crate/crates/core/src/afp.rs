//! Fingerprinting arithmetic carried out on ciphertexts.
//!
//! Every quantity the cloud combines sits at scale `Q²`: encodings `Ĝ` and
//! watermark entries `ŵ` are each at scale `Q`, so the E-LUT is lifted by
//! the homomorphic exponent `Q` and media are multiplied by `Q` before
//! encryption. Decrypting and rounding by `Q` reproduces the plaintext
//! pipeline bit for bit.

use ark_ff::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::codec::{tags, Decode, Encode, Reader, Writer};
use crate::error::{Error, Result};
use crate::fixed::FpParams;
use crate::lut::{DLut, ELut, EncodingMatrix, Fingerprint, IndexTable, MediaVector, Strength};
use crate::pre::{
    dec1_many, enc2, metrics, reencrypt_many, Ciphertext1, Ciphertext2, Gt, KeyId, PreparedReKey, PublicKey,
    PublicParams, SecretKey,
};

/// `E²_{PK_U}(b_l)` for every bit, at scale 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncFingerprint {
    entries: Vec<Ciphertext2>,
}

impl EncFingerprint {
    pub fn entries(&self) -> &[Ciphertext2] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn key(&self) -> Option<KeyId> {
        self.entries.first().map(Ciphertext2::key)
    }

    pub fn reencrypt(&self, rk: &PreparedReKey) -> Result<Vec<Ciphertext1>> {
        reencrypt_many(&self.entries, rk)
    }
}

pub fn enc_fingerprint<R: RngCore + ?Sized>(
    params: &PublicParams,
    pk: &PublicKey,
    b: &Fingerprint,
    rng: &mut R,
) -> EncFingerprint {
    EncFingerprint {
        entries: b
            .bits()
            .iter()
            .map(|&bit| enc2(params, pk, bit as i64, 0, rng))
            .collect(),
    }
}

/// Owner's encrypted E-LUT: `E²_{PK_O}(Ê(t))` at scale 1, plus one public
/// encryption of 1 that the cloud re-encrypts for each user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncELut {
    entries: Vec<Ciphertext2>,
    one: Ciphertext2,
}

impl EncELut {
    pub fn entries(&self) -> &[Ciphertext2] {
        &self.entries
    }

    pub fn one(&self) -> &Ciphertext2 {
        &self.one
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn key(&self) -> KeyId {
        self.one.key()
    }

    pub fn reencrypt(&self, rk: &PreparedReKey) -> Result<UserELut> {
        let mut all = reencrypt_many(&self.entries, rk)?;
        all.extend(reencrypt_many(std::slice::from_ref(&self.one), rk)?);
        let one = all.pop().expect("one ciphertext was appended");
        Ok(UserELut { entries: all, one })
    }
}

pub fn enc_elut<R: RngCore + ?Sized>(params: &PublicParams, pk: &PublicKey, e: &ELut, rng: &mut R) -> EncELut {
    EncELut {
        entries: e.values().iter().map(|&v| enc2(params, pk, v, 1, rng)).collect(),
        one: enc2(params, pk, 1, 0, rng),
    }
}

/// The encrypted E-LUT after re-encryption to a user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserELut {
    entries: Vec<Ciphertext1>,
    one: Ciphertext1,
}

impl UserELut {
    pub fn entries(&self) -> &[Ciphertext1] {
        &self.entries
    }

    pub fn one(&self) -> &Ciphertext1 {
        &self.one
    }
}

/// `E¹_{PK_U}(D̂₂(t))` at scale 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncDLut {
    entries: Vec<Ciphertext1>,
}

impl EncDLut {
    pub fn entries(&self) -> &[Ciphertext1] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn key(&self) -> Option<KeyId> {
        self.entries.first().map(Ciphertext1::key)
    }

    /// Decrypts to the wide table; `.rescale()` gives the user's D-LUT.
    pub fn decrypt(&self, params: &PublicParams, sk: &SecretKey, fp: &FpParams) -> Result<DLut> {
        DLut::from_values(dec1_many(params, sk, &self.entries)?, 2, fp)
    }
}

fn all_compatible1(what: &str, cts: &[Ciphertext1], reference: &Ciphertext1, scale: u16) -> Result<()> {
    for ct in cts {
        reference.compatible(&Ciphertext1 {
            scale: reference.scale,
            ..ct.clone()
        })?;
        if ct.scale != scale {
            return Err(Error::Homomorphism(format!(
                "{what} must be at scale {scale}, found {}",
                ct.scale
            )));
        }
    }
    Ok(())
}

/// `E(ŵ_l) = E(b_l)^{2q} ⊕ E(1)^{-q}` with `q = quantize(σ_W)`, at scale 1.
pub fn enc_wlut_entries(
    enc_b: &[Ciphertext1],
    one: &Ciphertext1,
    sigma_w: Strength,
    fp: &FpParams,
) -> Result<Vec<Ciphertext1>> {
    if one.scale != 0 {
        return Err(Error::Homomorphism(format!(
            "encryption of 1 must be at scale 0, found {}",
            one.scale
        )));
    }
    all_compatible1("encrypted fingerprint", enc_b, one, 0)?;
    let q = fp.quantize(sigma_w.amplitude(), fp.wlut_bits);
    let offset = one.mul_fixed(-q, 1);
    let out: Vec<Ciphertext1> = enc_b
        .par_iter()
        .map(|b| b.mul_fixed(2 * q, 1).add_unchecked(&offset))
        .collect();
    metrics::additions(out.len() as u64);
    Ok(out)
}

/// `E(D̂₂(t)) = E(Ê(t))^{-Q} ⊕ Σ_l E(ŵ_l)^{Ĝ(t,l)}` at scale 2.
///
/// The sum is evaluated from per-column tables of `E(ŵ_l)^j`, `0 ≤ j ≤
/// max|Ĝ(·,l)|`, so each term costs one group multiplication. Counters
/// still record one exponentiation per logical term.
pub fn enc_dlut(enc_e: &UserELut, enc_w: &[Ciphertext1], g: &EncodingMatrix, fp: &FpParams) -> Result<EncDLut> {
    let (t, l) = (g.rows(), g.cols());
    if enc_e.entries.len() != t || enc_w.len() != l {
        return Err(Error::config(format!(
            "encoding matrix is {t}x{l} but got {} E-LUT and {} watermark ciphertexts",
            enc_e.entries.len(),
            enc_w.len()
        )));
    }
    if g.frac_bits() != fp.frac_bits {
        return Err(Error::Homomorphism(
            "encoding matrix and fixed-point parameters disagree on Q".into(),
        ));
    }
    let Some(first) = enc_w.first().or(enc_e.entries.first()) else {
        return Ok(EncDLut { entries: Vec::new() });
    };
    all_compatible1("E-LUT ciphertext", &enc_e.entries, first, 1)?;
    all_compatible1("watermark ciphertext", enc_w, first, 1)?;

    let zero = Ciphertext1 {
        alpha: Gt::zero(),
        beta: Gt::zero(),
        ..first.clone()
    };
    let maxes = g.column_max_abs();
    let powers: Vec<Vec<Ciphertext1>> = enc_w
        .par_iter()
        .zip(maxes.par_iter())
        .map(|(w, &max)| {
            let mut col = Vec::with_capacity(max as usize + 1);
            col.push(zero.clone());
            for j in 0..max as usize {
                col.push(col[j].add_unchecked(w));
            }
            col
        })
        .collect();

    let q = fp.q();
    let entries = enc_e
        .entries
        .par_iter()
        .enumerate()
        .map(|(row, e)| {
            let mut acc = e.mul_fixed(-q, 1);
            for (col, &coef) in powers.iter().zip(g.row(row)) {
                let term = &col[coef.unsigned_abs() as usize];
                acc = if coef < 0 {
                    acc.add_unchecked(&term.negate())
                } else {
                    acc.add_unchecked(term)
                };
            }
            acc.scale = 2;
            acc
        })
        .collect();
    metrics::exponentiations((t * l) as u64);
    metrics::additions((t * l) as u64);
    Ok(EncDLut { entries })
}

/// `E²_{PK_O}(Q m̂_i)` at scale 2, each with its own randomness.
pub fn enc_media<R: RngCore + ?Sized>(
    params: &PublicParams,
    pk: &PublicKey,
    m: &MediaVector,
    rng: &mut R,
) -> Result<Vec<Ciphertext2>> {
    if m.scale() != 1 {
        return Err(Error::Homomorphism(format!(
            "media must be at scale 1, found {}",
            m.scale()
        )));
    }
    let q = 1i64 << m.frac_bits();
    let seeds: Vec<u64> = (0..m.len()).map(|_| rng.next_u64()).collect();
    Ok(m.values()
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(&v, &seed)| {
            let mut r = ChaCha20Rng::seed_from_u64(seed);
            enc2(params, pk, q * v, 2, &mut r)
        })
        .collect())
}

/// `E(ĉ₂,i) = E(Q m̂_i) ⊕ Σ_h E(Ê(t_ih))^Q` over the distinct indices of row `i`.
pub fn enc_media_lut_encrypt(
    enc_m: &[Ciphertext2],
    enc_e: &EncELut,
    idx: &IndexTable,
    fp: &FpParams,
) -> Result<Vec<Ciphertext2>> {
    if enc_m.len() != idx.media_len() || enc_e.len() != idx.lut_len() {
        return Err(Error::config(format!(
            "index table is for M={}, T={} but got {} media and {} E-LUT ciphertexts",
            idx.media_len(),
            idx.lut_len(),
            enc_m.len(),
            enc_e.len()
        )));
    }
    for ct in enc_m {
        enc_e.one.compatible(&Ciphertext2 { scale: 0, ..ct.clone() })?;
        if ct.scale != 2 {
            return Err(Error::Homomorphism(format!(
                "encrypted media must be at scale 2, found {}",
                ct.scale
            )));
        }
    }
    for ct in &enc_e.entries {
        if ct.key != enc_e.one.key || ct.scale != 1 {
            return Err(Error::Homomorphism(
                "E-LUT ciphertexts must share one key at scale 1".into(),
            ));
        }
    }
    let q = fp.q();
    let lifted: Vec<Ciphertext2> = enc_e.entries.par_iter().map(|e| e.mul_fixed(q, 1)).collect();
    let out: Vec<Ciphertext2> = enc_m
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut acc = m.clone();
            idx.for_each_unique(i, |t| acc = acc.add_unchecked(&lifted[t]));
            acc
        })
        .collect();
    let adds: usize = (0..idx.media_len()).map(|i| idx.unique_count(i)).sum();
    metrics::additions(adds as u64);
    Ok(out)
}

/// `E(m̂₂^k_i) = E(ĉ₂,i) ⊕ Σ_h E(D̂₂(t_ih))`, all at scale 2.
pub fn enc_joint_decrypt_fingerprint(
    enc_c: &[Ciphertext1],
    enc_d: &EncDLut,
    idx: &IndexTable,
) -> Result<Vec<Ciphertext1>> {
    if enc_c.len() != idx.media_len() || enc_d.len() != idx.lut_len() {
        return Err(Error::config(format!(
            "index table is for M={}, T={} but got {} media and {} D-LUT ciphertexts",
            idx.media_len(),
            idx.lut_len(),
            enc_c.len(),
            enc_d.len()
        )));
    }
    if let Some(first) = enc_c.first().or(enc_d.entries.first()) {
        all_compatible1("encrypted media", enc_c, first, 2)?;
        all_compatible1("D-LUT ciphertext", &enc_d.entries, first, 2)?;
    }
    let out: Vec<Ciphertext1> = enc_c
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut acc = c.clone();
            idx.for_each_unique(i, |t| acc = acc.add_unchecked(&enc_d.entries[t]));
            acc
        })
        .collect();
    let adds: usize = (0..idx.media_len()).map(|i| idx.unique_count(i)).sum();
    metrics::additions(adds as u64);
    Ok(out)
}

/// User side of the encrypted path: decrypt at scale 2 and round to scale 1.
pub fn decrypt_media(params: &PublicParams, sk: &SecretKey, cts: &[Ciphertext1], fp: &FpParams) -> Result<MediaVector> {
    if let Some(bad) = cts.iter().find(|c| c.scale != 2) {
        return Err(Error::Homomorphism(format!("expected scale 2, found {}", bad.scale)));
    }
    let values = dec1_many(params, sk, cts)?;
    Ok(MediaVector::with_scale(values, 2, fp).rescale_to_unit())
}

fn write_key(w: &mut Writer, key: Option<KeyId>) {
    w.raw(&key.map(|k| k.0).unwrap_or_default());
}

fn read_key(r: &mut Reader<'_>) -> Result<KeyId> {
    let mut k = [0u8; 8];
    k.copy_from_slice(r.raw(8)?);
    Ok(KeyId(k))
}

fn check_entries<I>(what: &str, key: KeyId, scale: Option<u16>, entries: I) -> Result<()>
where
    I: IntoIterator<Item = (KeyId, u16)>,
{
    for (k, s) in entries {
        if k != key || scale.is_some_and(|sc| sc != s) {
            return Err(Error::format(format!(
                "{what} entry does not match the header key or scale"
            )));
        }
    }
    Ok(())
}

impl Encode for EncFingerprint {
    fn encode(&self, w: &mut Writer) {
        w.u8(tags::ENC_FINGERPRINT);
        write_key(w, self.key());
        w.seq(&self.entries);
    }
}

impl Decode for EncFingerprint {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        r.expect_tag(tags::ENC_FINGERPRINT, "encrypted fingerprint")?;
        let key = read_key(r)?;
        let entries: Vec<Ciphertext2> = r.seq()?;
        check_entries(
            "encrypted fingerprint",
            key,
            Some(0),
            entries.iter().map(|c| (c.key, c.scale)),
        )?;
        Ok(EncFingerprint { entries })
    }
}

impl Encode for EncELut {
    fn encode(&self, w: &mut Writer) {
        w.u8(tags::ENC_ELUT);
        write_key(w, Some(self.key()));
        w.put(&self.one);
        w.seq(&self.entries);
    }
}

impl Decode for EncELut {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        r.expect_tag(tags::ENC_ELUT, "encrypted E-LUT")?;
        let key = read_key(r)?;
        let one: Ciphertext2 = r.get()?;
        let entries: Vec<Ciphertext2> = r.seq()?;
        check_entries("encrypted E-LUT", key, Some(0), [(one.key, one.scale)])?;
        check_entries(
            "encrypted E-LUT",
            key,
            Some(1),
            entries.iter().map(|c| (c.key, c.scale)),
        )?;
        Ok(EncELut { entries, one })
    }
}

impl Encode for EncDLut {
    fn encode(&self, w: &mut Writer) {
        w.u8(tags::ENC_DLUT);
        write_key(w, self.key());
        w.u16(2);
        w.seq(&self.entries);
    }
}

impl Decode for EncDLut {
    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        r.expect_tag(tags::ENC_DLUT, "encrypted D-LUT")?;
        let key = read_key(r)?;
        let scale = r.u16()?;
        let entries: Vec<Ciphertext1> = r.seq()?;
        check_entries(
            "encrypted D-LUT",
            key,
            Some(scale),
            entries.iter().map(|c| (c.key, c.scale)),
        )?;
        Ok(EncDLut { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut::{
        encrypt_media, gen_dlut_wide, gen_elut, gen_encoding_matrix, joint_decrypt_fingerprint, SessionKey,
        SystemParams,
    };
    use crate::pre::{dec2, keygen, rekey, setup, KeyPair};

    struct World {
        params: PublicParams,
        owner: KeyPair,
        user: KeyPair,
        fp: FpParams,
        rng: ChaCha20Rng,
    }

    fn world(seed: u64) -> World {
        let params = setup(b"afp-tests", crate::pre::DEFAULT_DLOG_BOUND).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let owner = keygen(&params, &mut rng);
        let user = keygen(&params, &mut rng);
        World {
            params,
            owner,
            user,
            fp: FpParams::default(),
            rng,
        }
    }

    fn to_user(w: &mut World, e: &ELut, b: &Fingerprint) -> (UserELut, Vec<Ciphertext1>) {
        let enc_e = enc_elut(&w.params, &w.owner.pk, e, &mut w.rng);
        let user_e = enc_e.reencrypt(&rekey(&w.owner.sk, &w.user.pk).prepare()).unwrap();
        let enc_b = enc_fingerprint(&w.params, &w.user.pk, b, &mut w.rng);
        let self_rk = rekey(&w.user.sk, &w.user.pk).prepare();
        (user_e, enc_b.reencrypt(&self_rk).unwrap())
    }

    #[test]
    fn fingerprint_round_trip() {
        let mut w = world(1);
        let b = Fingerprint::from_bits(vec![1, 0, 1, 1, 0]).unwrap();
        let enc = enc_fingerprint(&w.params, &w.user.pk, &b, &mut w.rng);
        let back: Vec<u8> = enc
            .entries()
            .iter()
            .map(|c| dec2(&w.params, &w.user.sk, c).unwrap() as u8)
            .collect();
        assert_eq!(back, b.bits());
        let zeros = enc_fingerprint(&w.params, &w.user.pk, &Fingerprint::zeros(3), &mut w.rng);
        assert!(zeros
            .entries()
            .iter()
            .all(|c| dec2(&w.params, &w.user.sk, c).unwrap() == 0));
        assert_eq!(EncFingerprint::from_bytes(&enc.to_bytes()).unwrap(), enc);
    }

    #[test]
    fn wlut_entries_are_plus_minus_q() {
        let mut w = world(2);
        let e = ELut::from_values(vec![0], &w.fp);
        let b = Fingerprint::from_bits(vec![1, 0]).unwrap();
        let (user_e, enc_b) = to_user(&mut w, &e, &b);
        let sigma = Strength::from_amplitude(0.6).unwrap();
        let ws = enc_wlut_entries(&enc_b, user_e.one(), sigma, &w.fp).unwrap();
        let got = dec1_many(&w.params, &w.user.sk, &ws).unwrap();
        assert_eq!(got, vec![10, -10]);
        assert!(ws.iter().all(|c| c.scale() == 1));
        // Scale-1 input where scale 0 is required.
        let bad = vec![ws[0].clone()];
        assert!(matches!(
            enc_wlut_entries(&bad, user_e.one(), sigma, &w.fp),
            Err(Error::Homomorphism(_))
        ));
    }

    #[test]
    fn hand_worked_dlut() {
        let mut w = world(3);
        let e = ELut::from_values(vec![32, -16], &w.fp);
        let g = EncodingMatrix::from_values(2, 1, vec![16, -16], &w.fp).unwrap();
        let b = Fingerprint::from_bits(vec![1]).unwrap();
        let (user_e, enc_b) = to_user(&mut w, &e, &b);
        let ws = enc_wlut_entries(&enc_b, user_e.one(), Strength::from_amplitude(0.6).unwrap(), &w.fp).unwrap();
        let d = enc_dlut(&user_e, &ws, &g, &w.fp).unwrap();
        let wide = d.decrypt(&w.params, &w.user.sk, &w.fp).unwrap();
        assert_eq!(wide.values(), &[-352, 96]);
        assert_eq!(wide.rescale().values(), &[-22, 6]);
        assert_eq!(EncDLut::from_bytes(&d.to_bytes()).unwrap(), d);
    }

    #[test]
    fn zero_strength_dlut_is_negated_elut() {
        let mut w = world(4);
        let e = ELut::from_values(vec![5, -7, 0, 123], &w.fp);
        let g = EncodingMatrix::from_values(4, 2, vec![3, -1, 0, 2, -5, 4, 1, 1], &w.fp).unwrap();
        let b = Fingerprint::from_bits(vec![0, 1]).unwrap();
        let (user_e, enc_b) = to_user(&mut w, &e, &b);
        let ws = enc_wlut_entries(&enc_b, user_e.one(), Strength::ZERO, &w.fp).unwrap();
        let d = enc_dlut(&user_e, &ws, &g, &w.fp)
            .unwrap()
            .decrypt(&w.params, &w.user.sk, &w.fp)
            .unwrap();
        assert_eq!(d.values(), &[-80, 112, 0, -1968]);
    }

    #[test]
    fn dlut_matches_plaintext_generator() {
        let mut w = world(5);
        let sys = SystemParams {
            t: 64,
            l: 12,
            ..SystemParams::default()
        };
        let e = gen_elut(&sys, &w.fp, &mut w.rng);
        let g = gen_encoding_matrix(&sys, &w.fp, &mut w.rng);
        let b = Fingerprint::random(sys.l, &mut w.rng);
        let (user_e, enc_b) = to_user(&mut w, &e, &b);
        let ws = enc_wlut_entries(&enc_b, user_e.one(), sys.sigma_w, &w.fp).unwrap();
        let (d, ops) = metrics::measure(|| enc_dlut(&user_e, &ws, &g, &w.fp).unwrap());
        assert_eq!(ops.exponentiations, (sys.t * (sys.l + 1)) as u64);
        let wide = d.decrypt(&w.params, &w.user.sk, &w.fp).unwrap();
        assert_eq!(wide, gen_dlut_wide(&e, &g, &b, sys.sigma_w, &w.fp));
    }

    #[test]
    fn encrypted_path_matches_plaintext_path() {
        let mut w = world(6);
        let sys = SystemParams {
            t: 50,
            l: 8,
            ..SystemParams::default()
        }
        .with_media_len(128);
        let e = gen_elut(&sys, &w.fp, &mut w.rng);
        let g = gen_encoding_matrix(&sys, &w.fp, &mut w.rng);
        let b = Fingerprint::random(sys.l, &mut w.rng);
        let idx = IndexTable::generate(&SessionKey::random(&mut w.rng), sys.m, sys.s, sys.t);
        let m = MediaVector::new(
            (0..sys.m as i64).map(|i| (i * 37 % 401 - 200) * 16 + i % 16).collect(),
            &w.fp,
        );

        let enc_e = enc_elut(&w.params, &w.owner.pk, &e, &mut w.rng);
        let enc_m = enc_media(&w.params, &w.owner.pk, &m, &mut w.rng).unwrap();
        assert_eq!(dec2(&w.params, &w.owner.sk, &enc_m[3]).unwrap(), 16 * m.values()[3]);
        assert_ne!(enc_m[0].alpha, enc_m[1].alpha);
        let enc_c = enc_media_lut_encrypt(&enc_m, &enc_e, &idx, &w.fp).unwrap();
        let c = encrypt_media(&m, &idx, &e).unwrap();
        assert_eq!(dec2(&w.params, &w.owner.sk, &enc_c[7]).unwrap(), 16 * c.values()[7]);

        let rk = rekey(&w.owner.sk, &w.user.pk).prepare();
        let user_e = enc_e.reencrypt(&rk).unwrap();
        let enc_b = enc_fingerprint(&w.params, &w.user.pk, &b, &mut w.rng)
            .reencrypt(&rekey(&w.user.sk, &w.user.pk).prepare())
            .unwrap();
        let ws = enc_wlut_entries(&enc_b, user_e.one(), sys.sigma_w, &w.fp).unwrap();
        let d = enc_dlut(&user_e, &ws, &g, &w.fp).unwrap();
        let enc_c1 = reencrypt_many(&enc_c, &rk).unwrap();
        let out = enc_joint_decrypt_fingerprint(&enc_c1, &d, &idx).unwrap();
        let mk2 = decrypt_media(&w.params, &w.user.sk, &out, &w.fp).unwrap();

        let wide = gen_dlut_wide(&e, &g, &b, sys.sigma_w, &w.fp);
        let mk1 = joint_decrypt_fingerprint(&c, &idx, &wide).unwrap();
        assert_eq!(mk2, mk1);
    }

    #[test]
    fn default_parameters_fit_the_dlog_bound() {
        let fp = FpParams::default();
        let sys = SystemParams::default();
        let bound = crate::pre::DEFAULT_DLOG_BOUND as i64;
        let q = fp.q();
        // Integer magnitudes at scale Q.
        let top = |bits: u32| (1i64 << (bits + fp.frac_bits)) - 1;
        let (e_max, g_max, m_max) = (top(fp.elut_bits), top(fp.wlut_bits), top(fp.media_bits));
        let w_max = g_max;
        let s = sys.s as i64;
        let w2_max = sys.l as i64 * g_max * w_max;
        // Decrypted D-LUT entry, encrypted media, and the joint output.
        assert!(q * e_max + w2_max <= bound);
        assert!(q * m_max + s * q * e_max <= bound);
        assert!(q * m_max + s * w2_max <= bound);
    }

    #[test]
    fn mismatched_keys_are_rejected() {
        let mut w = world(7);
        let e = ELut::from_values(vec![1, 2], &w.fp);
        let b = Fingerprint::from_bits(vec![1]).unwrap();
        let (user_e, _) = to_user(&mut w, &e, &b);
        // Fingerprint re-encrypted under the owner's self key: wrong key.
        let foreign = enc_fingerprint(&w.params, &w.owner.pk, &b, &mut w.rng)
            .reencrypt(&rekey(&w.owner.sk, &w.owner.pk).prepare())
            .unwrap();
        assert!(matches!(
            enc_wlut_entries(&foreign, user_e.one(), Strength::ZERO, &w.fp),
            Err(Error::Homomorphism(_))
        ));
    }
}
