//! Plaintext-domain LUT fingerprinting over fixed-point integers.
//!
//! The owner masks every media coefficient with `S` pseudo-randomly chosen
//! entries of an encryption LUT `E`. A user's decryption LUT `D = -E + W`
//! removes the mask and leaves the watermark `W = G w`, which spreads the
//! user's `L` fingerprint bits over the `T` table entries. All coefficients,
//! including DC, are embedded.

mod array;
mod detect;
mod embed;
mod index;
mod tables;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use detect::{detect, detect_mf, detect_pinv, mf_from_delta, Decoder, PinvDecoder};
pub use embed::{add_noise, encrypt_media, gbar, joint_decrypt_fingerprint, MediaVector, SecretMatrix};
pub use index::{gen_index_table, IndexTable, SessionKey};
pub use tables::{
    gen_dlut, gen_dlut_wide, gen_elut, gen_encoding_matrix, gen_wlut, wlut_entries, DLut, ELut, EncodingMatrix,
    Fingerprint, WLut,
};

/// Embedding or noise strength, held as an amplitude (standard deviation).
///
/// Experiment tables quote strengths as variances; construct those with
/// [`Strength::from_variance`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Strength {
    amplitude: f64,
}

impl Strength {
    pub const ZERO: Strength = Strength { amplitude: 0.0 };

    pub fn from_amplitude(amplitude: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::config(format!(
                "strength must be finite and non-negative, got {amplitude}"
            )));
        }
        Ok(Strength { amplitude })
    }

    pub fn from_variance(variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::config(format!(
                "variance must be finite and non-negative, got {variance}"
            )));
        }
        Ok(Strength {
            amplitude: variance.sqrt(),
        })
    }

    pub fn amplitude(self) -> f64 {
        self.amplitude
    }

    pub fn variance(self) -> f64 {
        self.amplitude * self.amplitude
    }

    pub fn is_zero(self) -> bool {
        self.amplitude == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// LUT length.
    pub t: usize,
    /// Fingerprint length in bits.
    pub l: usize,
    /// E-LUT entries added to each coefficient.
    pub s: usize,
    /// Media vector length.
    pub m: usize,
    /// E-LUT standard deviation.
    pub sigma_e: f64,
    pub sigma_w: Strength,
    pub sigma_n: Strength,
    /// Number of users.
    pub k: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            t: 1000,
            l: 50,
            s: 4,
            m: 512 * 512,
            sigma_e: 1000.0,
            sigma_w: Strength {
                amplitude: 0.6f64.sqrt(),
            },
            sigma_n: Strength::ZERO,
            k: 500,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.s < 1 || self.t < self.s {
            return Err(Error::config(format!(
                "need T >= S >= 1, got T={} S={}",
                self.t, self.s
            )));
        }
        if self.t > u32::MAX as usize {
            return Err(Error::config("T does not fit 32-bit indices"));
        }
        if self.l < 1 {
            return Err(Error::config("fingerprint length L must be at least 1"));
        }
        if self.m < self.l {
            return Err(Error::config(format!(
                "media length M={} is shorter than the fingerprint L={}",
                self.m, self.l
            )));
        }
        if !(self.sigma_e >= 0.0 && self.sigma_e.is_finite()) {
            return Err(Error::config("sigma_e must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn with_media_len(mut self, m: usize) -> Self {
        self.m = m;
        self
    }
}
