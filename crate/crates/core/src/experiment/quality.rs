use rayon::prelude::*;
use serde::Serialize;

use super::{load_images, Instance, RunConfig};
use crate::error::Result;
use crate::lut::{gen_dlut, gen_dlut_wide, joint_decrypt_fingerprint, Fingerprint, Strength};
use crate::media::{from_coefficients, psnr, psnr_real, reconstruct};

pub const TABLE2_HEADER: &str = "image,source,method,sigma_w,psnr_db,runs";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Method {
    /// Narrow D-LUT, rounded per entry; plain AFP.
    #[serde(rename = "AFP")]
    Afp,
    /// Unrounded D-LUT; the copy either protocol scheme delivers.
    #[serde(rename = "CREAMS-II")]
    Creams2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Afp => "AFP",
            Method::Creams2 => "CREAMS-II",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Row {
    pub image: String,
    pub source: &'static str,
    pub method: Method,
    pub sigma_w: f64,
    pub psnr_db: f64,
    pub runs: usize,
}

impl Table2Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{}",
            self.image,
            self.source,
            self.method.name(),
            self.sigma_w,
            self.psnr_db,
            self.runs
        )
    }
}

/// Mean PSNR of the fingerprinted copy against the original, per image,
/// method and `σ_W`, over the configured seeds. PSNR is taken on the
/// unrounded reconstruction clamped to `[0, 255]`.
pub fn table2(cfg: &RunConfig) -> Result<Vec<Table2Row>> {
    cfg.validate()?;
    let sys = cfg.system();
    let images = load_images(cfg)?;
    let mut rows = Vec::new();
    for ti in &images {
        let (w, h) = (ti.img.width(), ti.img.height());
        let sys = sys.with_media_len(ti.m.len());
        let per_seed: Vec<Vec<(f64, f64)>> = cfg
            .seeds
            .par_iter()
            .map(|seed| {
                let label = format!("table2:{}:{seed}", ti.name);
                let inst = Instance::new(&label, &ti.m, &sys, &cfg.fp)?;
                let mut rng = super::rng_for(&format!("{label}:user"));
                let b = Fingerprint::random(sys.l, &mut rng);
                cfg.sigma_w_grid
                    .iter()
                    .map(|&v| {
                        let sw = Strength::from_variance(v)?;
                        let narrow = gen_dlut(&inst.e, &inst.g, &b, sw, &cfg.fp);
                        let wide = gen_dlut_wide(&inst.e, &inst.g, &b, sw, &cfg.fp);
                        let a = joint_decrypt_fingerprint(&inst.c, &inst.idx, &narrow)?;
                        let c2 = joint_decrypt_fingerprint(&inst.c, &inst.idx, &wide)?;
                        Ok((
                            psnr_real(&ti.img, &reconstruct(&a, w, h)?)?,
                            psnr_real(&ti.img, &reconstruct(&c2, w, h)?)?,
                        ))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let n = cfg.seeds.len();
        for method in [Method::Afp, Method::Creams2] {
            for (j, &v) in cfg.sigma_w_grid.iter().enumerate() {
                let sum: f64 = per_seed
                    .iter()
                    .map(|r| if method == Method::Afp { r[j].0 } else { r[j].1 })
                    .sum();
                rows.push(Table2Row {
                    image: ti.name.clone(),
                    source: ti.source_name(),
                    method,
                    sigma_w: v,
                    psnr_db: sum / n as f64,
                    runs: n,
                });
            }
        }
    }
    Ok(rows)
}

/// PSNR of the E-LUT-encrypted image (clamped and rounded to 8 bits)
/// against the original, averaged over the seeds.
pub fn encrypted_psnr(cfg: &RunConfig, image: &str) -> Result<f64> {
    let mut one = cfg.clone();
    one.images = vec![image.to_string()];
    one.validate()?;
    let ti = load_images(&one)?.remove(0);
    let sys = one.system().with_media_len(ti.m.len());
    let mut total = 0.0;
    for seed in &one.seeds {
        let inst = Instance::new(&format!("opacity:{image}:{seed}"), &ti.m, &sys, &one.fp)?;
        let enc = from_coefficients(&inst.c, ti.img.width(), ti.img.height())?;
        total += psnr(&ti.img, &enc)?;
    }
    Ok(total / one.seeds.len() as f64)
}
