//! Baby-step giant-step over a centered interval `[-bound, bound]`.
//!
//! Giant steps walk outward from zero in both directions, so the cost of a
//! solve grows with `|x| / step` rather than with the interval width.

use std::collections::HashMap;

use ark_ff::Zero;

use super::{gt_pow, metrics, Gt, PublicParams};
use crate::error::{Error, Result};

pub struct BabyTable {
    bound: u64,
    step: u64,
    index: HashMap<u64, u32>,
    babies: Vec<Gt>,
    giant: Gt,
}

#[inline]
fn fingerprint(g: &Gt) -> u64 {
    // Montgomery limbs of two coordinates; collisions are resolved by the
    // exact comparison against the stored baby element.
    let a = g.0.c0.c0.c0.0 .0[0];
    let b = g.0.c1.c2.c1.0 .0[1];
    a ^ b.rotate_left(29)
}

impl BabyTable {
    pub fn build(z: Gt, bound: u64) -> Self {
        let width = 2 * bound + 1;
        let step = (width as f64).sqrt().ceil() as u64;
        let step = step.max(1);
        let mut babies = Vec::with_capacity(step as usize);
        let mut index = HashMap::with_capacity(step as usize);
        let mut cur = Gt::zero();
        for j in 0..step {
            index.entry(fingerprint(&cur)).or_insert(j as u32);
            babies.push(cur);
            cur += z;
        }
        BabyTable {
            bound,
            step,
            index,
            babies,
            giant: cur,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    #[inline]
    fn lookup(&self, y: &Gt) -> Option<u64> {
        let j = *self.index.get(&fingerprint(y))?;
        (self.babies[j as usize] == *y).then_some(j as u64)
    }

    /// Returns `x` with `Z^x = target` and `|x| <= bound`.
    pub fn solve(&self, target: Gt) -> Result<i64> {
        let bound = self.bound as i64;
        let step = self.step as i64;
        let mut up = target;
        let mut down = target;
        let rounds = self.bound / self.step + 1;
        for i in 0..=rounds as i64 {
            // up = target * Z^{-i*step}: hits when x = i*step + j.
            if let Some(j) = self.lookup(&up) {
                let x = i * step + j as i64;
                if x <= bound {
                    return Ok(x);
                }
            }
            // down = target * Z^{i*step}: hits when x = -i*step + j.
            if i > 0 {
                if let Some(j) = self.lookup(&down) {
                    let x = -i * step + j as i64;
                    if x >= -bound {
                        return Ok(x);
                    }
                }
            }
            up -= self.giant;
            down += self.giant;
        }
        Err(Error::Range { bound: self.bound })
    }
}

/// Solves `Z^x = target` for `|x| <= bound`, using the table cached on `params`.
pub fn dlog_solve(params: &PublicParams, target: Gt, bound: u64) -> Result<i64> {
    metrics::dlogs(1);
    params.baby_table(bound).solve(target)
}

/// `Z^x` for a signed small exponent; exposed for tests and oracles.
pub fn lift(params: &PublicParams, x: i64) -> Gt {
    gt_pow(params.z(), x)
}
