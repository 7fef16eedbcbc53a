//! In-browser walk through the lookup-table path: the owner encrypts an
//! image once, each user's copy is decrypted with their own D-LUT, and a
//! leaked copy is traced back by matched filtering.
//!
//! The public-key layer is left out; a pairing takes milliseconds natively
//! and far longer in wasm.

use creams_core::fixed::FpParams;
use creams_core::lut::{
    add_noise, detect_mf, encrypt_media, gbar, gen_dlut, gen_elut, gen_encoding_matrix, joint_decrypt_fingerprint,
    ELut, EncodingMatrix, Fingerprint, IndexTable, MediaVector, SecretMatrix, SessionKey, Strength, SystemParams,
};
use creams_core::media::{from_coefficients, psnr, psnr_real, reconstruct, synthetic, to_coefficients, GrayImage};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

struct Issued {
    user: u32,
    b: Fingerprint,
    img: GrayImage,
}

#[wasm_bindgen]
pub struct Demo {
    fp: FpParams,
    sys: SystemParams,
    seed: u64,
    img: GrayImage,
    m: MediaVector,
    e: ELut,
    g: EncodingMatrix,
    idx: IndexTable,
    c: MediaVector,
    gbar: SecretMatrix,
    copies: Vec<Issued>,
}

#[derive(Serialize)]
struct Shared {
    user: u32,
    psnr_db: f64,
    fingerprint: String,
}

#[derive(Serialize)]
struct Distance {
    user: u32,
    distance: usize,
}

#[derive(Serialize)]
struct Trace {
    leaker: u32,
    leak_psnr_db: f64,
    decoded: String,
    accused: Option<u32>,
    distances: Vec<Distance>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rng(seed: u64, label: &str) -> ChaCha20Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    for (i, b) in label.bytes().enumerate() {
        s[8 + i % 24] ^= b;
    }
    ChaCha20Rng::from_seed(s)
}

fn bits(b: &Fingerprint) -> String {
    b.bits().iter().map(|&x| if x == 1 { '1' } else { '0' }).collect()
}

#[wasm_bindgen]
impl Demo {
    /// Starts from one of the built-in textures (`baboon`, `pirate`, `lena`,
    /// `car`) at `size × size`.
    #[wasm_bindgen(constructor)]
    pub fn new(image: &str, size: usize, seed: u64) -> Result<Demo, String> {
        Demo::with_image(synthetic(image, size, size).map_err(err)?, seed)
    }

    /// Starts from an uploaded binary PGM.
    pub fn from_pgm(bytes: &[u8], seed: u64) -> Result<Demo, String> {
        Demo::with_image(GrayImage::from_pgm_bytes(bytes).map_err(err)?, seed)
    }

    fn with_image(img: GrayImage, seed: u64) -> Result<Demo, String> {
        let fp = FpParams::default();
        let sys = SystemParams::default().with_media_len(img.width() * img.height());
        sys.validate().map_err(err)?;
        let m = to_coefficients(&img, &fp);
        let mut r = rng(seed, "owner");
        let e = gen_elut(&sys, &fp, &mut r);
        let g = gen_encoding_matrix(&sys, &fp, &mut r);
        let idx = IndexTable::generate(&SessionKey::random(&mut r), m.len(), sys.s, sys.t);
        let c = encrypt_media(&m, &idx, &e).map_err(err)?;
        let gbar = gbar(&idx, &g);
        Ok(Demo {
            fp,
            sys,
            seed,
            img,
            m,
            e,
            g,
            idx,
            c,
            gbar,
            copies: Vec::new(),
        })
    }

    pub fn width(&self) -> usize {
        self.img.width()
    }

    pub fn height(&self) -> usize {
        self.img.height()
    }

    pub fn original(&self) -> Vec<u8> {
        self.img.pixels().to_vec()
    }

    /// What the cloud stores, viewed as an image.
    pub fn encrypted(&self) -> Result<Vec<u8>, String> {
        Ok(from_coefficients(&self.c, self.width(), self.height())
            .map_err(err)?
            .pixels()
            .to_vec())
    }

    pub fn encrypted_psnr(&self) -> Result<f64, String> {
        let enc = from_coefficients(&self.c, self.width(), self.height()).map_err(err)?;
        psnr(&self.img, &enc).map_err(err)
    }

    /// Gives `user` a fresh fingerprint and decrypts their copy with a D-LUT
    /// of watermark variance `sigma_w`. Returns JSON.
    pub fn share(&mut self, user: u32, sigma_w: f64) -> Result<String, String> {
        let sw = Strength::from_variance(sigma_w).map_err(err)?;
        let b = Fingerprint::random(self.sys.l, &mut rng(self.seed, &format!("user{user}")));
        let d = gen_dlut(&self.e, &self.g, &b, sw, &self.fp);
        let mk = joint_decrypt_fingerprint(&self.c, &self.idx, &d).map_err(err)?;
        let (w, h) = (self.width(), self.height());
        let psnr_db = psnr_real(&self.img, &reconstruct(&mk, w, h).map_err(err)?).map_err(err)?;
        let img = from_coefficients(&mk, w, h).map_err(err)?;
        let out = Shared {
            user,
            psnr_db,
            fingerprint: bits(&b),
        };
        self.copies.retain(|c| c.user != user);
        self.copies.push(Issued { user, b, img });
        serde_json::to_string(&out).map_err(err)
    }

    pub fn copy(&self, user: u32) -> Option<Vec<u8>> {
        self.copies
            .iter()
            .find(|c| c.user == user)
            .map(|c| c.img.pixels().to_vec())
    }

    /// Leaks `user`'s copy with added noise of variance `sigma_n`, decodes the
    /// fingerprint and compares it with every shared copy. Returns JSON.
    pub fn trace(&self, user: u32, sigma_n: f64) -> Result<String, String> {
        let leaked = self
            .copies
            .iter()
            .find(|c| c.user == user)
            .ok_or_else(|| format!("user {user} has no copy"))?;
        let sn = Strength::from_variance(sigma_n).map_err(err)?;
        let suspect = add_noise(
            &to_coefficients(&leaked.img, &self.fp),
            sn,
            &self.fp,
            &mut rng(self.seed, &format!("leak{user}")),
        );
        let leak_img = from_coefficients(&suspect, self.width(), self.height()).map_err(err)?;
        let decoded = detect_mf(&suspect, &self.m, &self.gbar).map_err(err)?;
        let distances: Vec<Distance> = self
            .copies
            .iter()
            .map(|c| Distance {
                user: c.user,
                distance: c.b.hamming(&decoded),
            })
            .collect();
        let best = distances.iter().map(|d| d.distance).min();
        let closest: Vec<u32> = distances
            .iter()
            .filter(|d| Some(d.distance) == best)
            .map(|d| d.user)
            .collect();
        let out = Trace {
            leaker: user,
            leak_psnr_db: psnr(&self.img, &leak_img).map_err(err)?,
            decoded: bits(&decoded),
            accused: match closest.as_slice() {
                [k] => Some(*k),
                _ => None,
            },
            distances,
        };
        serde_json::to_string(&out).map_err(err)
    }
}
