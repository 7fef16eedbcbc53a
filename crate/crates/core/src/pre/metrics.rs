//! Process-wide operation counters used to instrument protocol runs.
//!
//! The exponentiation counter counts ciphertext-level exponentiations: one
//! per encryption, decryption, re-encryption-key derivation or homomorphic
//! scalar multiplication. Pairings and discrete-log solves are counted
//! individually, as are homomorphic additions (target-group
//! multiplications between ciphertexts).

use std::ops::Sub;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

static EXPONENTIATIONS: AtomicU64 = AtomicU64::new(0);
static PAIRINGS: AtomicU64 = AtomicU64::new(0);
static DLOGS: AtomicU64 = AtomicU64::new(0);
static ADDITIONS: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub exponentiations: u64,
    pub pairings: u64,
    pub dlogs: u64,
    pub additions: u64,
}

impl Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            exponentiations: self.exponentiations - rhs.exponentiations,
            pairings: self.pairings - rhs.pairings,
            dlogs: self.dlogs - rhs.dlogs,
            additions: self.additions - rhs.additions,
        }
    }
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: OpCounts) {
        self.exponentiations += rhs.exponentiations;
        self.pairings += rhs.pairings;
        self.dlogs += rhs.dlogs;
        self.additions += rhs.additions;
    }
}

pub fn snapshot() -> OpCounts {
    OpCounts {
        exponentiations: EXPONENTIATIONS.load(Ordering::Relaxed),
        pairings: PAIRINGS.load(Ordering::Relaxed),
        dlogs: DLOGS.load(Ordering::Relaxed),
        additions: ADDITIONS.load(Ordering::Relaxed),
    }
}

/// Runs `f` and returns its result with the operations it performed.
///
/// Counters are global, so concurrent work on other threads is attributed
/// too; callers wanting exact numbers must not overlap measurements.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}

#[inline]
pub(crate) fn exponentiations(n: u64) {
    EXPONENTIATIONS.fetch_add(n, Ordering::Relaxed);
}

#[inline]
pub(crate) fn pairings(n: u64) {
    PAIRINGS.fetch_add(n, Ordering::Relaxed);
}

#[inline]
pub(crate) fn dlogs(n: u64) {
    DLOGS.fetch_add(n, Ordering::Relaxed);
}

#[inline]
pub(crate) fn additions(n: u64) {
    ADDITIONS.fetch_add(n, Ordering::Relaxed);
}
