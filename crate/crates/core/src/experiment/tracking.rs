use rayon::prelude::*;
use serde::Serialize;

use super::{load_images, rng_for, Instance, Method, RunConfig};
use crate::error::Result;
use crate::lut::{
    add_noise, gbar, gen_dlut, gen_dlut_wide, joint_decrypt_fingerprint, mf_from_delta, Decoder, Fingerprint,
    MediaVector, PinvDecoder, SecretMatrix, Strength,
};

pub const TABLE3_HEADER: &str = "image,source,method,sigma_n,sigma_w,decoder,k,trials,success_rate";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table3Row {
    pub image: String,
    pub source: &'static str,
    pub method: Method,
    pub sigma_n: f64,
    pub sigma_w: f64,
    pub decoder: &'static str,
    pub k: usize,
    pub trials: usize,
    pub success_rate: f64,
}

impl Table3Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.4}",
            self.image,
            self.source,
            self.method.name(),
            self.sigma_n,
            self.sigma_w,
            self.decoder,
            self.k,
            self.trials,
            self.success_rate
        )
    }
}

enum Dec {
    Mf,
    Pinv(PinvDecoder),
}

impl Dec {
    fn decode(&self, g: &SecretMatrix, delta: &[f64]) -> Fingerprint {
        match self {
            Dec::Mf => mf_from_delta(g, delta),
            Dec::Pinv(p) => p.decode_delta(g, delta),
        }
    }
}

fn delta(suspect: &MediaVector, original: &MediaVector) -> Vec<f64> {
    let q = (1i64 << original.frac_bits()) as f64;
    suspect
        .values()
        .iter()
        .zip(original.values())
        .map(|(&s, &m)| (s - m) as f64 / q)
        .collect()
}

/// Fraction of users whose fingerprint is recovered without a single bit
/// error from their noisy copy, per image, method, `σ_n` and `σ_W`.
/// Both methods see the same users and the same noise.
pub fn table3(cfg: &RunConfig) -> Result<Vec<Table3Row>> {
    cfg.validate()?;
    let images = load_images(cfg)?;
    let seed = cfg.seeds[0];
    let k = cfg.sys.k;
    let mut rows = Vec::new();
    for ti in &images {
        let sys = cfg.system().with_media_len(ti.m.len());
        // successes[n][w][method]
        let mut successes = vec![vec![[0usize; 2]; cfg.sigma_w_grid.len()]; cfg.sigma_n_grid.len()];
        for trial in 0..cfg.trials {
            let label = format!("table3:{}:{seed}:{trial}", ti.name);
            let inst = Instance::new(&label, &ti.m, &sys, &cfg.fp)?;
            let gb = gbar(&inst.idx, &inst.g);
            let dec = match cfg.decoder {
                Decoder::MatchedFilter => Dec::Mf,
                Decoder::PseudoInverse => Dec::Pinv(PinvDecoder::new(&gb)?),
            };
            for (ni, &vn) in cfg.sigma_n_grid.iter().enumerate() {
                let sn = Strength::from_variance(vn)?;
                for (wi, &vw) in cfg.sigma_w_grid.iter().enumerate() {
                    let sw = Strength::from_variance(vw)?;
                    let hits: Vec<[bool; 2]> = (0..k)
                        .into_par_iter()
                        .map(|u| {
                            let mut rng = rng_for(&format!("{label}:{ni}:{wi}:{u}"));
                            let b = Fingerprint::random(sys.l, &mut rng);
                            let noise_seed = rng_for(&format!("{label}:{ni}:{wi}:{u}:noise"));
                            let tables = [
                                gen_dlut(&inst.e, &inst.g, &b, sw, &cfg.fp),
                                gen_dlut_wide(&inst.e, &inst.g, &b, sw, &cfg.fp),
                            ];
                            let mut out = [false; 2];
                            for (o, d) in out.iter_mut().zip(&tables) {
                                let mk = joint_decrypt_fingerprint(&inst.c, &inst.idx, d)?;
                                let suspect = add_noise(&mk, sn, &cfg.fp, &mut noise_seed.clone());
                                *o = dec.decode(&gb, &delta(&suspect, &ti.m)) == b;
                            }
                            Ok(out)
                        })
                        .collect::<Result<_>>()?;
                    for h in hits {
                        for (s, hit) in successes[ni][wi].iter_mut().zip(h) {
                            *s += usize::from(hit);
                        }
                    }
                }
            }
        }
        let total = (k * cfg.trials) as f64;
        for (mi, method) in [Method::Afp, Method::Creams2].into_iter().enumerate() {
            for (ni, &vn) in cfg.sigma_n_grid.iter().enumerate() {
                for (wi, &vw) in cfg.sigma_w_grid.iter().enumerate() {
                    rows.push(Table3Row {
                        image: ti.name.clone(),
                        source: ti.source_name(),
                        method,
                        sigma_n: vn,
                        sigma_w: vw,
                        decoder: cfg.decoder.name(),
                        k,
                        trials: cfg.trials,
                        success_rate: successes[ni][wi][mi] as f64 / total,
                    });
                }
            }
        }
    }
    Ok(rows)
}
