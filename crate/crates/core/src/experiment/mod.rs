//! Desk-scale reproductions: perceptual quality, tracking rate, encrypted
//! image opacity and per-role operation counts.
//!
//! Quality and tracking run on the plaintext path. The narrow D-LUT, rounded
//! entry by entry, is plain AFP. The unrounded scale-2 table gives the copy
//! both protocol schemes deliver, which the protocol tests check bit for bit.

mod bench;
mod config;
mod quality;
mod tracking;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub use bench::{bench, BenchReport, RoleCounts, SchemeBench};
pub use config::{RunConfig, SIGMA_N_GRID, SIGMA_W_GRID};
pub use quality::{encrypted_psnr, table2, Method, Table2Row, TABLE2_HEADER};
pub use tracking::{table3, Table3Row, TABLE3_HEADER};

use crate::error::Result;
use crate::fixed::FpParams;
use crate::lut::{
    encrypt_media, gen_elut, gen_encoding_matrix, ELut, EncodingMatrix, IndexTable, MediaVector, SessionKey,
    SystemParams,
};
use crate::media::{load_or_synthetic, to_coefficients, GrayImage, ImageSource};

/// Deterministic generator for one labelled piece of an experiment.
pub(crate) fn rng_for(label: &str) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(Sha256::digest(label.as_bytes()).into())
}

pub(crate) struct TestImage {
    pub name: String,
    pub img: GrayImage,
    pub source: ImageSource,
    pub m: MediaVector,
}

impl TestImage {
    pub fn source_name(&self) -> &'static str {
        match self.source {
            ImageSource::File(_) => "file",
            ImageSource::Synthetic => "synthetic",
        }
    }
}

pub(crate) fn load_images(cfg: &RunConfig) -> Result<Vec<TestImage>> {
    cfg.images
        .iter()
        .map(|name| {
            let (img, source) = load_or_synthetic(name, cfg.image_dir.as_deref(), cfg.size, cfg.size)?;
            let m = to_coefficients(&img, &cfg.fp);
            Ok(TestImage {
                name: name.clone(),
                img,
                source,
                m,
            })
        })
        .collect()
}

/// Owner-side material for one image under one seed.
pub(crate) struct Instance {
    pub e: ELut,
    pub g: EncodingMatrix,
    pub idx: IndexTable,
    pub c: MediaVector,
}

impl Instance {
    pub fn new(label: &str, m: &MediaVector, sys: &SystemParams, fp: &FpParams) -> Result<Self> {
        let mut rng = rng_for(label);
        let e = gen_elut(sys, fp, &mut rng);
        let g = gen_encoding_matrix(sys, fp, &mut rng);
        let idx = IndexTable::generate(&SessionKey::random(&mut rng), m.len(), sys.s, sys.t);
        let c = encrypt_media(m, &idx, &e)?;
        Ok(Instance { e, g, idx, c })
    }
}
