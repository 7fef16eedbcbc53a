//! Owner, cloud, user and judge as message-driven entities.
//!
//! Every message crosses a full encode/decode cycle on the [`Bus`], which
//! appends one [`Record`] per message to the transcript. Writes the cloud
//! makes to its fingerprint set `F` and D-LUT set `D` are logged as
//! `store` records so provenance can be audited from the transcript alone.

mod audit;
mod entities;
mod flows;
mod message;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

pub use audit::{audit, AuditPolicy, AuditReport, Violation};
pub use entities::{Cloud, Judge, Owner, OwnerMedia, User};
pub use flows::{authorize, creams1_part1, creams1_part2, creams1_part3, creams2_part1, creams2_part2};
pub use message::{ArbitrationBundle, FEntry, Payload, PayloadKind, Secret, Token, Verdict};

use crate::codec::{Decode, Encode};
use crate::error::{Error, Result};

pub type MediaId = String;
pub type UserId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Owner,
    Cloud,
    User(UserId),
    Judge,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Owner => f.write_str("owner"),
            Role::Cloud => f.write_str("cloud"),
            Role::User(k) => write!(f, "user:{k}"),
            Role::Judge => f.write_str("judge"),
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "owner" => Ok(Role::Owner),
            "cloud" => Ok(Role::Cloud),
            "judge" => Ok(Role::Judge),
            _ => s
                .strip_prefix("user:")
                .and_then(|k| k.parse().ok())
                .map(Role::User)
                .ok_or_else(|| Error::config(format!("unknown role {s:?}"))),
        }
    }
}

impl Serialize for Role {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "I")]
    One,
    #[serde(rename = "II")]
    Two,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" | "i" => Ok(Scheme::One),
            "II" | "2" | "ii" => Ok(Scheme::Two),
            other => Err(Error::config(format!("unknown scheme {other:?}, expected I or II"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::One => "I",
            Scheme::Two => "II",
        })
    }
}

/// Protocol phase. `Authorization` is the token grant that precedes sharing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Authorization,
    Storage,
    Sharing,
    Arbitration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Send,
    Store,
}

/// One transcript line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Record {
    pub session: u64,
    pub scheme: Scheme,
    pub part: Part,
    pub step: u32,
    pub kind: RecordKind,
    pub sender: Role,
    pub recipient: Role,
    pub payload_type: PayloadKind,
    pub digest: String,
    pub bytes: usize,
    #[serde(skip)]
    pub payload: Vec<u8>,
}

impl Record {
    pub fn decode_payload(&self) -> Result<Payload> {
        Payload::from_bytes(&self.payload)
    }
}

pub fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Append-only message log.
#[derive(Clone, Debug, Default)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn part(&self, part: Part) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.part == part)
    }

    /// `(sender, recipient, payload type)` per record, for script checks.
    pub fn script(&self, part: Part) -> Vec<(Role, Role, PayloadKind)> {
        self.part(part)
            .map(|r| (r.sender, r.recipient, r.payload_type))
            .collect()
    }

    pub fn bytes_sent_by(&self, role: Role) -> usize {
        self.records
            .iter()
            .filter(|r| r.kind == RecordKind::Send && r.sender == role)
            .map(|r| r.bytes)
            .sum()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.into()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    /// Reads records written by [`Transcript::write_jsonl`]. Payload bytes
    /// are fetched by digest and checked against it.
    pub fn from_jsonl(text: &str, mut payload: impl FnMut(&str) -> Result<Vec<u8>>) -> Result<Self> {
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut r: Record =
                serde_json::from_str(line).map_err(|e| Error::format(format!("transcript line {}: {e}", n + 1)))?;
            r.payload = payload(&r.digest)?;
            if digest_hex(&r.payload) != r.digest || r.payload.len() != r.bytes {
                return Err(Error::format(format!(
                    "transcript line {}: payload does not match its digest",
                    n + 1
                )));
            }
            records.push(r);
        }
        Ok(Transcript { records })
    }

    /// Appends a record directly, bypassing the bus. Used for audit fixtures.
    pub fn inject(&mut self, r: Record) {
        self.records.push(r);
    }
}

/// In-process transport with a serialization boundary.
#[derive(Debug)]
pub struct Bus {
    session: u64,
    scheme: Scheme,
    transcript: Transcript,
}

impl Bus {
    pub fn new(scheme: Scheme, session: u64) -> Self {
        Bus {
            session,
            scheme,
            transcript: Transcript::default(),
        }
    }

    /// Continues an existing transcript under a new session id.
    pub fn resume(scheme: Scheme, session: u64, transcript: Transcript) -> Self {
        Bus {
            session,
            scheme,
            transcript,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    fn next_step(&self, part: Part) -> u32 {
        let session = self.session;
        self.transcript.part(part).filter(|r| r.session == session).count() as u32 + 1
    }

    fn log(&mut self, part: Part, kind: RecordKind, from: Role, to: Role, bytes: Vec<u8>, kind_of: PayloadKind) {
        let step = self.next_step(part);
        self.transcript.records.push(Record {
            session: self.session,
            scheme: self.scheme,
            part,
            step,
            kind,
            sender: from,
            recipient: to,
            payload_type: kind_of,
            digest: digest_hex(&bytes),
            bytes: bytes.len(),
            payload: bytes,
        });
    }

    /// Serializes `payload`, logs it, and returns what the recipient decodes.
    pub fn send(&mut self, part: Part, from: Role, to: Role, payload: &Payload) -> Result<Payload> {
        let bytes = payload.to_bytes();
        let received = Payload::from_bytes(&bytes)?;
        self.log(part, RecordKind::Send, from, to, bytes, payload.kind());
        Ok(received)
    }

    /// Logs a write to one of the cloud's sets.
    pub fn store(&mut self, part: Part, who: Role, payload: &Payload) {
        self.log(part, RecordKind::Store, who, who, payload.to_bytes(), payload.kind());
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn grant(media: &str) -> Payload {
        Payload::AccessGrant(message::Token {
            user: 1,
            media_id: media.into(),
            nonce: [7; 16],
        })
    }

    #[test]
    fn roles_parse_back() {
        for r in [Role::Owner, Role::Cloud, Role::Judge, Role::User(12)] {
            assert_eq!(r.to_string().parse::<Role>().unwrap(), r);
        }
        assert!("user:x".parse::<Role>().is_err());
    }

    #[test]
    fn jsonl_round_trip_restores_payloads() {
        let mut bus = Bus::new(Scheme::One, 1);
        bus.send(Part::Authorization, Role::Owner, Role::User(1), &grant("a"))
            .unwrap();
        bus.store(
            Part::Sharing,
            Role::Cloud,
            &Payload::ArbitrationRequest { media_id: "a".into() },
        );
        let t = bus.into_transcript();
        let files: BTreeMap<_, _> = t
            .records()
            .iter()
            .map(|r| (r.digest.clone(), r.payload.clone()))
            .collect();
        let back = Transcript::from_jsonl(&t.to_jsonl(), |d| Ok(files[d].clone())).unwrap();
        assert_eq!(back.to_jsonl(), t.to_jsonl());
        assert_eq!(back.records()[0].decode_payload().unwrap(), grant("a"));

        let err = Transcript::from_jsonl(&t.to_jsonl(), |_| Ok(vec![1, 2, 3]));
        assert!(matches!(err, Err(Error::Format(_))));
        assert!(Transcript::from_jsonl("{not json", |_| Ok(vec![])).is_err());
    }

    #[test]
    fn resumed_sessions_number_their_own_steps() {
        let mut bus = Bus::new(Scheme::Two, 1);
        bus.send(Part::Authorization, Role::Owner, Role::User(1), &grant("a"))
            .unwrap();
        bus.send(Part::Authorization, Role::Owner, Role::User(1), &grant("b"))
            .unwrap();
        let mut bus = Bus::resume(Scheme::Two, 2, bus.into_transcript());
        bus.send(Part::Authorization, Role::Owner, Role::User(1), &grant("c"))
            .unwrap();
        let steps: Vec<_> = bus.transcript().records().iter().map(|r| (r.session, r.step)).collect();
        assert_eq!(steps, [(1, 1), (1, 2), (2, 1)]);
    }
}
