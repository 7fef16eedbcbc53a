//! Grayscale images, block DCT and fidelity metrics.

mod dct;
mod pgm;
mod synthetic;

pub use dct::{
    forward, forward_block, from_coefficients, inverse, inverse_block, psnr, psnr_real, reconstruct, reconstruct_real,
    to_coefficients, ZIGZAG,
};
pub use pgm::{load_pgm, save_pgm, GrayImage};
pub use synthetic::{load_or_synthetic, synthetic, ImageSource, IMAGE_DIR_ENV, STANDARD_IMAGES};
