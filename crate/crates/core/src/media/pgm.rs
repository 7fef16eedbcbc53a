//! Binary (P5) PGM, 8-bit only.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit grayscale image with both dimensions multiples of 8.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(8) || !height.is_multiple_of(8) {
            return Err(Error::format(format!(
                "image dimensions {width}x{height} must be non-zero multiples of 8"
            )));
        }
        if data.len() != width * height {
            return Err(Error::format(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = token(bytes, &mut pos)?;
        if magic != b"P5" {
            return Err(Error::format("not a binary PGM (P5) file"));
        }
        let width = number(bytes, &mut pos)?;
        let height = number(bytes, &mut pos)?;
        let maxval = number(bytes, &mut pos)?;
        if maxval != 255 {
            return Err(Error::format(format!(
                "unsupported maxval {maxval}, only 255 is accepted"
            )));
        }
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            _ => return Err(Error::format("missing whitespace after PGM header")),
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::format("PGM dimensions overflow"))?;
        let raster = bytes
            .get(pos..pos + n)
            .ok_or_else(|| Error::format("PGM raster is truncated"))?;
        GrayImage::new(width, height, raster.to_vec())
    }
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while let Some(&b) = bytes.get(*pos) {
        if b == b'#' {
            while let Some(&c) = bytes.get(*pos) {
                *pos += 1;
                if c == b'\n' {
                    break;
                }
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
}

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    skip_space_and_comments(bytes, pos);
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("truncated PGM header"));
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let t = token(bytes, pos)?;
    std::str::from_utf8(t)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(format!("invalid PGM header field {:?}", String::from_utf8_lossy(t))))
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    GrayImage::from_pgm_bytes(&fs::read(path)?)
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, img.to_pgm_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let img = GrayImage::new(16, 8, (0..128).map(|i| (i * 2) as u8).collect()).unwrap();
        let bytes = img.to_pgm_bytes();
        let back = GrayImage::from_pgm_bytes(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(back.to_pgm_bytes(), bytes);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        save_pgm(&img, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
        assert_eq!(load_pgm(&path).unwrap(), img);
    }

    #[test]
    fn comments_in_header() {
        let mut bytes = b"P5\n# made by hand\n8 8\n# max\n255\n".to_vec();
        bytes.extend(std::iter::repeat_n(7u8, 64));
        assert_eq!(GrayImage::from_pgm_bytes(&bytes).unwrap().get(3, 3), 7);
    }

    #[test]
    fn rejects_bad_dimensions_and_maxval() {
        let mut odd = b"P5 12 8 255\n".to_vec();
        odd.extend(vec![0u8; 96]);
        assert!(GrayImage::from_pgm_bytes(&odd).is_err());

        let mut deep = b"P5 8 8 65535\n".to_vec();
        deep.extend(vec![0u8; 128]);
        assert!(GrayImage::from_pgm_bytes(&deep).is_err());

        let mut ascii = b"P2 8 8 255\n".to_vec();
        ascii.extend(vec![b'0'; 64]);
        assert!(GrayImage::from_pgm_bytes(&ascii).is_err());

        assert!(GrayImage::from_pgm_bytes(b"P5 8 8 255\n\x00\x01").is_err());
    }
}
