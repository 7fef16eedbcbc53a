//! Signed fixed-point integers with `f` fractional bits (`Q = 2^f`).
//!
//! A value at scale exponent `s` stands for `v / Q^s`. Each quantity has its
//! own magnitude budget; quantizing clamps to it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpParams {
    pub frac_bits: u32,
    pub elut_bits: u32,
    pub wlut_bits: u32,
    pub media_bits: u32,
}

impl Default for FpParams {
    fn default() -> Self {
        FpParams {
            frac_bits: 4,
            elut_bits: 14,
            wlut_bits: 2,
            media_bits: 12,
        }
    }
}

impl FpParams {
    pub fn validate(&self) -> Result<()> {
        if self.frac_bits > 12 {
            return Err(Error::config(format!("fractional bits {} exceed 12", self.frac_bits)));
        }
        for (name, bits) in [
            ("E-LUT", self.elut_bits),
            ("W-LUT", self.wlut_bits),
            ("media", self.media_bits),
        ] {
            if bits + self.frac_bits > 30 {
                return Err(Error::config(format!("{name} magnitude bits {bits} too wide")));
            }
        }
        Ok(())
    }

    /// `Q = 2^f`.
    #[inline]
    pub fn q(&self) -> i64 {
        1 << self.frac_bits
    }

    pub fn qf(&self) -> f64 {
        self.q() as f64
    }

    /// `round(x * Q)`, clamped to `magnitude_bits` integer bits plus sign.
    pub fn quantize(&self, x: f64, magnitude_bits: u32) -> i64 {
        let limit = (1i64 << (magnitude_bits + self.frac_bits)) - 1;
        let v = (x * self.qf()).round();
        (v as i64).clamp(-limit, limit)
    }

    pub fn dequantize(&self, v: i64) -> f64 {
        v as f64 / self.qf()
    }

    /// Largest magnitude representable with `magnitude_bits`.
    pub fn max_value(&self, magnitude_bits: u32) -> f64 {
        ((1i64 << (magnitude_bits + self.frac_bits)) - 1) as f64 / self.qf()
    }
}

/// `n / d` rounded half away from zero; `d > 0`.
#[inline]
pub fn round_div(n: i64, d: i64) -> i64 {
    debug_assert!(d > 0);
    let half = d / 2;
    if n >= 0 {
        (n + half) / d
    } else {
        -((-n + half) / d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults() {
        let fp = FpParams::default();
        assert_eq!(fp.q(), 16);
        assert_eq!(fp.quantize(0.6, fp.wlut_bits), 10);
        assert_eq!(fp.quantize(-0.6, fp.wlut_bits), -10);
        assert_eq!(fp.max_value(2), 63.0 / 16.0);
        fp.validate().unwrap();
    }

    #[test]
    fn clamps() {
        let fp = FpParams::default();
        assert_eq!(fp.quantize(1e9, 2), 63);
        assert_eq!(fp.quantize(-1e9, 2), -63);
    }

    #[test]
    fn round_div_ties_go_away_from_zero() {
        assert_eq!(round_div(8, 16), 1);
        assert_eq!(round_div(-8, 16), -1);
        assert_eq!(round_div(7, 16), 0);
        assert_eq!(round_div(-7, 16), 0);
        assert_eq!(round_div(24, 16), 2);
        assert_eq!(round_div(-24, 16), -2);
        assert_eq!(round_div(-32, 16), -2);
    }

    proptest! {
        #[test]
        fn quantization_error_is_at_most_half_a_step(x in -5000.0f64..5000.0) {
            let fp = FpParams::default();
            let clamped = x.clamp(-fp.max_value(fp.elut_bits), fp.max_value(fp.elut_bits));
            let back = fp.dequantize(fp.quantize(x, fp.elut_bits));
            prop_assert!((back - clamped).abs() <= 0.5 / fp.qf() + 1e-12);
        }

        #[test]
        fn round_div_matches_float_rounding(n in -1_000_000i64..1_000_000, d in 1i64..1000) {
            let expect = (n as f64 / d as f64).round() as i64;
            prop_assert_eq!(round_div(n, d), expect);
        }
    }
}
