//! Transcript checks for the confidentiality and anti-cheating rules.
//!
//! * (a) fingerprint-bearing payloads reaching the owner or cloud are
//!   ciphertexts;
//! * (b) the owner receives nothing from which it could recover `b_k`,
//!   `D_k` or `m^k`: only material encrypted to the judge is allowed;
//! * (c) every `F` and `D` entry of a user traces to one encrypted
//!   fingerprint, byte-equal to the one the user sent;
//! * (s) every record matches a step of its scheme's script.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::message::{FEntry, Payload, PayloadKind, Secret};
use super::{Part, Record, RecordKind, Role, Scheme, Transcript, UserId};
use crate::codec::Encode;
use crate::pre::KeyId;

#[derive(Clone, Debug)]
pub struct AuditPolicy {
    pub judge_key: KeyId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: char,
    pub step: u32,
    pub part: Part,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AuditReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn violation(r: &Record, rule: char, detail: String) -> Violation {
    Violation {
        rule,
        step: r.step,
        part: r.part,
        detail,
    }
}

pub fn audit(t: &Transcript, policy: &AuditPolicy) -> AuditReport {
    let mut report = AuditReport::default();
    // user -> digests of the encrypted fingerprints they sent
    let mut sent: BTreeMap<UserId, Vec<[u8; 32]>> = BTreeMap::new();
    // user -> sources claimed by F and D records
    let mut claimed: BTreeMap<UserId, Vec<(&Record, [u8; 32])>> = BTreeMap::new();
    let mut f_store: BTreeMap<UserId, Vec<u8>> = BTreeMap::new();

    for r in t.records() {
        report.checked += 1;
        let p = match r.decode_payload() {
            Ok(p) => p,
            Err(e) => {
                report
                    .violations
                    .push(violation(r, '-', format!("undecodable payload: {e}")));
                continue;
            }
        };
        if !scripted(r) {
            report.violations.push(violation(
                r,
                's',
                format!(
                    "{:?} from {} to {} is not a {} step of scheme {}",
                    r.payload_type,
                    r.sender,
                    r.recipient,
                    part_name(r.part),
                    r.scheme
                ),
            ));
        }
        if r.kind == RecordKind::Send {
            for (secret, key) in p.secrets() {
                let label = match secret {
                    Secret::Fingerprint => "fingerprint",
                    Secret::DLut => "D-LUT",
                    Secret::Watermarked => "fingerprinted media",
                };
                if matches!(r.recipient, Role::Owner | Role::Cloud) && key.is_none() {
                    report.violations.push(violation(
                        r,
                        'a',
                        format!("{label} sent to {} in the clear by {}", r.recipient, r.sender),
                    ));
                    break;
                }
                if r.recipient == Role::Owner && key.is_some_and(|k| k != policy.judge_key) {
                    report.violations.push(violation(
                        r,
                        'b',
                        format!("owner received {label} encrypted to a key other than the judge's"),
                    ));
                    break;
                }
            }
        }
        match &p {
            Payload::ShareRequest { enc_b, .. } => {
                if let Role::User(k) = r.sender {
                    sent.entry(k).or_default().push(Sha256::digest(enc_b.to_bytes()).into());
                }
            }
            Payload::FRecord(e) if r.kind == RecordKind::Store => {
                claimed.entry(e.user).or_default().push((r, e.source));
                f_store.insert(e.user, e.to_bytes());
            }
            Payload::DRecord { user, source, .. } if r.kind == RecordKind::Store => {
                claimed.entry(*user).or_default().push((r, *source));
            }
            Payload::ArbitrationMaterial { f, .. } => check_f(r, f, &f_store, &mut report),
            Payload::ArbitrationBundle(b) => check_f(r, &b.f, &f_store, &mut report),
            _ => {}
        }
    }

    for (user, claims) in &claimed {
        let own = sent.get(user).map(Vec::as_slice).unwrap_or_default();
        let first = claims[0].1;
        for &(r, source) in claims {
            if !own.contains(&source) {
                report.violations.push(violation(
                    r,
                    'c',
                    format!("user {user}: stored entry derives from a fingerprint the user never sent"),
                ));
            } else if source != first {
                report.violations.push(violation(
                    r,
                    'c',
                    format!("user {user}: F and D derive from different encrypted fingerprints"),
                ));
            }
        }
    }
    report
}

fn check_f(r: &Record, f: &[FEntry], stored: &BTreeMap<UserId, Vec<u8>>, report: &mut AuditReport) {
    for e in f {
        if stored.get(&e.user).is_some_and(|s| *s != e.to_bytes()) {
            report.violations.push(violation(
                r,
                'c',
                format!("F entry for user {} differs from the one the cloud stored", e.user),
            ));
        }
    }
}

fn part_name(p: Part) -> &'static str {
    match p {
        Part::Authorization => "authorization",
        Part::Storage => "storage",
        Part::Sharing => "sharing",
        Part::Arbitration => "arbitration",
    }
}

fn scripted(r: &Record) -> bool {
    use PayloadKind as K;
    use Role::{Cloud, Judge, Owner, User};
    let two = r.scheme == Scheme::Two;
    let store = r.kind == RecordKind::Store;
    match (r.part, r.sender, r.recipient, r.payload_type) {
        (Part::Storage, Owner, Cloud, K::EncodingMatrix | K::EncELut) => !store,
        (Part::Storage, Owner, Cloud, K::StoreMedia) => !store && !two,
        (Part::Storage, Owner, Cloud, K::StoreEncryptedMedia) => !store && two,
        (Part::Authorization, User(_), Owner, K::AccessRequest) => !store,
        (Part::Authorization, Owner, User(_), K::AccessGrant) => !store,
        (Part::Sharing, User(_), Cloud, K::ShareRequest) => !store,
        (Part::Sharing, Owner, Cloud, K::Delegation) => !store,
        (Part::Sharing, Cloud, Cloud, K::FRecord) => store,
        (Part::Sharing, Cloud, Cloud, K::DRecord) => store && two,
        (Part::Sharing, Cloud, User(_), K::SharePackage) => !store && !two,
        (Part::Sharing, Cloud, User(_), K::EncryptedCopy) => !store && two,
        (Part::Arbitration, Owner, Cloud, K::ArbitrationRequest) => !store,
        (Part::Arbitration, Cloud, Owner, K::ArbitrationMaterial) => !store,
        (Part::Arbitration, Owner, Judge, K::ArbitrationBundle) => !store,
        (Part::Arbitration, Judge, Owner, K::Verdict) => !store,
        _ => false,
    }
}
