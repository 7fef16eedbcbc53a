//! Stand-in test images and the image-directory loader.
//!
//! When the standard test pictures are not on disk, each name maps to a
//! deterministic value-noise texture with natural-image-like first and
//! second moments (mean 128, standard deviation 45).

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{load_pgm, GrayImage};
use crate::error::Result;

/// Names of the four standard test images.
pub const STANDARD_IMAGES: [&str; 4] = ["baboon", "pirate", "lena", "car"];

/// Environment variable naming a directory of `<name>.pgm` files.
pub const IMAGE_DIR_ENV: &str = "CREAMS_IMAGE_DIR";

// Octave weights per texture, coarse to fine. Baboon is the busiest.
fn octaves(name: &str) -> [f64; 5] {
    match name {
        "baboon" => [0.6, 0.6, 0.8, 1.0, 1.0],
        "pirate" => [1.0, 0.8, 0.6, 0.5, 0.4],
        "lena" => [1.0, 0.7, 0.4, 0.25, 0.15],
        "car" => [0.8, 0.8, 0.7, 0.5, 0.3],
        _ => [1.0, 0.7, 0.5, 0.35, 0.25],
    }
}

fn seed_for(name: &str) -> [u8; 32] {
    Sha256::digest(format!("synthetic-texture:{name}").as_bytes()).into()
}

/// Value noise on a `cells x cells` lattice, smoothstep-interpolated.
fn value_noise(width: usize, height: usize, cells: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let g = cells + 1;
    let lattice: Vec<f64> = (0..g * g).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = y as f64 * cells as f64 / height as f64;
        let (iy, ty) = (fy.floor() as usize, smooth(fy.fract()));
        for x in 0..width {
            let fx = x as f64 * cells as f64 / width as f64;
            let (ix, tx) = (fx.floor() as usize, smooth(fx.fract()));
            let at = |a: usize, b: usize| lattice[b * g + a];
            let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
            let bot = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
            out.push(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

/// Deterministic texture for `name`; any name is accepted.
pub fn synthetic(name: &str, width: usize, height: usize) -> Result<GrayImage> {
    let mut rng = ChaCha20Rng::from_seed(seed_for(name));
    let mut acc = vec![0.0; width * height];
    for (o, &w) in octaves(name).iter().enumerate() {
        let cells = (4usize << o).min(width.max(height));
        for (a, v) in acc.iter_mut().zip(value_noise(width, height, cells, &mut rng)) {
            *a += w * v;
        }
    }
    // Light per-pixel grain so no block is perfectly smooth.
    for a in acc.iter_mut() {
        *a += 0.05 * rng.gen_range(-1.0..1.0);
    }
    let n = acc.len() as f64;
    let mean = acc.iter().sum::<f64>() / n;
    let sd = (acc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
        .sqrt()
        .max(1e-12);
    let px = acc
        .iter()
        .map(|v| (128.0 + 45.0 * (v - mean) / sd).round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(width, height, px)
}

/// Where an image came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImageSource {
    File(PathBuf),
    Synthetic,
}

/// Loads `<dir>/<name>.pgm` if present, otherwise the synthetic texture.
/// `dir` defaults to `$CREAMS_IMAGE_DIR`. A file whose size differs from
/// the requested one is still returned as is.
pub fn load_or_synthetic(
    name: &str,
    dir: Option<&Path>,
    width: usize,
    height: usize,
) -> Result<(GrayImage, ImageSource)> {
    let env_dir = std::env::var_os(IMAGE_DIR_ENV).map(PathBuf::from);
    if let Some(d) = dir.map(Path::to_path_buf).or(env_dir) {
        let path = d.join(format!("{name}.pgm"));
        if path.is_file() {
            return Ok((load_pgm(&path)?, ImageSource::File(path)));
        }
    }
    Ok((synthetic(name, width, height)?, ImageSource::Synthetic))
}
