//! Orthonormal 8x8 DCT-II with JPEG zig-zag ordering.
//!
//! The coefficient vector lists blocks in raster order and, within each
//! block, its 64 coefficients in zig-zag order. No level shift is applied,
//! so a constant image has only DC terms.

use std::sync::OnceLock;

use rayon::prelude::*;

use super::GrayImage;
use crate::error::{Error, Result};
use crate::fixed::FpParams;
use crate::lut::MediaVector;

const N: usize = 8;

/// Zig-zag position `k` -> raster index `row * 8 + col` within a block.
pub const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21,
    28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54,
    47, 55, 62, 63,
];

/// `C[u][x] = a(u) cos((2x + 1) u pi / 16)`, rows orthonormal.
fn basis() -> &'static [[f64; N]; N] {
    static C: OnceLock<[[f64; N]; N]> = OnceLock::new();
    C.get_or_init(|| {
        let mut c = [[0.0; N]; N];
        for (u, row) in c.iter_mut().enumerate() {
            let a = if u == 0 {
                (1.0 / N as f64).sqrt()
            } else {
                (2.0 / N as f64).sqrt()
            };
            for (x, v) in row.iter_mut().enumerate() {
                *v = a * (((2 * x + 1) * u) as f64 * std::f64::consts::PI / (2 * N) as f64).cos();
            }
        }
        c
    })
}

/// `F = C B Cᵀ` on one block in raster order.
pub fn forward_block(block: &[f64; 64]) -> [f64; 64] {
    let c = basis();
    let mut tmp = [0.0; 64];
    for u in 0..N {
        for x in 0..N {
            tmp[u * N + x] = (0..N).map(|y| c[u][y] * block[y * N + x]).sum();
        }
    }
    let mut out = [0.0; 64];
    for u in 0..N {
        for v in 0..N {
            out[u * N + v] = (0..N).map(|x| tmp[u * N + x] * c[v][x]).sum();
        }
    }
    out
}

/// `B = Cᵀ F C`.
pub fn inverse_block(coeffs: &[f64; 64]) -> [f64; 64] {
    let c = basis();
    let mut tmp = [0.0; 64];
    for y in 0..N {
        for v in 0..N {
            tmp[y * N + v] = (0..N).map(|u| c[u][y] * coeffs[u * N + v]).sum();
        }
    }
    let mut out = [0.0; 64];
    for y in 0..N {
        for x in 0..N {
            out[y * N + x] = (0..N).map(|v| tmp[y * N + v] * c[v][x]).sum();
        }
    }
    out
}

/// Real-valued zig-zag DCT coefficients of the whole image.
pub fn forward(img: &GrayImage) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let bw = w / N;
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(64).enumerate().for_each(|(b, dst)| {
        let (bx, by) = (b % bw, b / bw);
        let mut block = [0.0; 64];
        for y in 0..N {
            for x in 0..N {
                block[y * N + x] = img.get(bx * N + x, by * N + y) as f64;
            }
        }
        let f = forward_block(&block);
        for (k, &pos) in ZIGZAG.iter().enumerate() {
            dst[k] = f[pos];
        }
    });
    out
}

/// Pixel values (unclamped, unrounded) from zig-zag coefficients.
pub fn inverse(coeffs: &[f64], width: usize, height: usize) -> Result<Vec<f64>> {
    if !width.is_multiple_of(N) || !height.is_multiple_of(N) || coeffs.len() != width * height {
        return Err(Error::format(format!(
            "{} coefficients cannot form a {width}x{height} image",
            coeffs.len()
        )));
    }
    let bw = width / N;
    let blocks: Vec<[f64; 64]> = coeffs
        .par_chunks_exact(64)
        .map(|src| {
            let mut f = [0.0; 64];
            for (k, &pos) in ZIGZAG.iter().enumerate() {
                f[pos] = src[k];
            }
            inverse_block(&f)
        })
        .collect();
    let mut out = vec![0.0; width * height];
    for (b, block) in blocks.iter().enumerate() {
        let (bx, by) = (b % bw, b / bw);
        for y in 0..N {
            let row = (by * N + y) * width + bx * N;
            out[row..row + N].copy_from_slice(&block[y * N..y * N + N]);
        }
    }
    Ok(out)
}

/// Image to quantized coefficient vector at scale `Q`.
pub fn to_coefficients(img: &GrayImage, fp: &FpParams) -> MediaVector {
    MediaVector::quantize(&forward(img), fp)
}

/// Real pixel values clamped to `[0, 255]` but not rounded.
pub fn reconstruct(v: &MediaVector, width: usize, height: usize) -> Result<Vec<f64>> {
    reconstruct_real(&v.to_real(), width, height)
}

pub fn reconstruct_real(coeffs: &[f64], width: usize, height: usize) -> Result<Vec<f64>> {
    Ok(inverse(coeffs, width, height)?
        .into_iter()
        .map(|p| p.clamp(0.0, 255.0))
        .collect())
}

/// Inverse transform, clamp, round half away from zero.
pub fn from_coefficients(v: &MediaVector, width: usize, height: usize) -> Result<GrayImage> {
    let px = reconstruct(v, width, height)?;
    GrayImage::new(width, height, px.into_iter().map(|p| p.round() as u8).collect())
}

/// `10 log10(255² / MSE)`; identical inputs give `+inf`.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::format("PSNR needs images of equal size"));
    }
    let fb: Vec<f64> = b.pixels().iter().map(|&p| p as f64).collect();
    psnr_real(a, &fb)
}

/// PSNR of a real-valued reconstruction against an 8-bit reference.
pub fn psnr_real(reference: &GrayImage, other: &[f64]) -> Result<f64> {
    if reference.pixels().len() != other.len() {
        return Err(Error::format("PSNR needs images of equal size"));
    }
    let mse = reference
        .pixels()
        .iter()
        .zip(other)
        .map(|(&a, &b)| (a as f64 - b).powi(2))
        .sum::<f64>()
        / other.len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn noise_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
    }

    #[test]
    fn zigzag_is_a_permutation_with_jpeg_prefix() {
        let mut seen = [false; 64];
        for &p in &ZIGZAG {
            assert!(!seen[p]);
            seen[p] = true;
        }
        assert_eq!(&ZIGZAG[..6], &[0, 1, 8, 16, 9, 2]);
        assert_eq!(ZIGZAG[63], 63);
    }

    #[test]
    fn constant_image_has_only_dc() {
        let img = GrayImage::filled(16, 16, 128).unwrap();
        let c = forward(&img);
        for (i, &v) in c.iter().enumerate() {
            if i % 64 == 0 {
                assert!((v - 1024.0).abs() < 1e-9);
            } else {
                assert!(v.abs() < 1e-9, "coefficient {i} = {v}");
            }
        }
    }

    #[test]
    fn parseval() {
        let img = noise_image(64, 32, 1);
        let c = forward(&img);
        let pe: f64 = img.pixels().iter().map(|&p| (p as f64).powi(2)).sum();
        let ce: f64 = c.iter().map(|v| v * v).sum();
        assert!(((pe - ce) / pe).abs() < 1e-6);
    }

    #[test]
    fn round_trip_through_quantization() {
        let fp = FpParams::default();
        let img = noise_image(64, 64, 2);
        let back = from_coefficients(&to_coefficients(&img, &fp), 64, 64).unwrap();
        assert!(psnr(&img, &back).unwrap() >= 58.0);
        // Unrounded reconstruction loses only the coefficient quantization.
        let real = reconstruct(&to_coefficients(&img, &fp), 64, 64).unwrap();
        assert!(psnr_real(&img, &real).unwrap() > 70.0);
    }

    #[test]
    fn zero_vector_is_black() {
        let fp = FpParams::default();
        let img = from_coefficients(&MediaVector::zeros(64 * 8, &fp), 64, 8).unwrap();
        assert!(img.pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn inverse_is_linear() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..128).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let b: Vec<f64> = (0..128).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x + y).collect();
        let (ia, ib, is) = (
            inverse(&a, 16, 8).unwrap(),
            inverse(&b, 16, 8).unwrap(),
            inverse(&sum, 16, 8).unwrap(),
        );
        for i in 0..128 {
            assert!((is[i] - (2.0 * ia[i] + ib[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn psnr_closed_forms() {
        let a = GrayImage::filled(8, 8, 0).unwrap();
        let b = GrayImage::filled(8, 8, 255).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert!(psnr(&a, &b).unwrap().abs() < 1e-12);
        let c = GrayImage::new(8, 8, (0..64).map(|i| if i % 2 == 0 { 101 } else { 99 }).collect()).unwrap();
        let d = GrayImage::filled(8, 8, 100).unwrap();
        assert!((psnr(&c, &d).unwrap() - 48.1308).abs() < 1e-3);
    }

    #[test]
    fn coefficient_mse_matches_pixel_mse() {
        let img = noise_image(32, 32, 4);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let c = forward(&img);
        let noisy: Vec<f64> = c.iter().map(|v| v + rng.gen_range(-2.0..2.0)).collect();
        let coef_mse = c.iter().zip(&noisy).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / c.len() as f64;
        let px = inverse(&noisy, 32, 32).unwrap();
        let pixel = psnr_real(&img, &px).unwrap();
        let implied = 10.0 * (255.0f64.powi(2) / coef_mse).log10();
        assert!((pixel - implied).abs() < 0.1);
    }
}
