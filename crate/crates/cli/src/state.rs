//! On-disk layout of a run:
//!
//! ```text
//! state/
//!   config.txt        configuration the store was made with
//!   params.bin        public parameters
//!   owner.bin cloud.bin judge.bin
//!   users/<k>.bin
//!   transcript.jsonl  one record per line
//!   payloads/<digest>.bin
//!   copies/<media>.user<k>.{pgm,bin}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use creams_core::codec::{Decode, Encode};
use creams_core::protocol::{Bus, Cloud, Judge, Owner, Scheme, Transcript, User, UserId};
use creams_core::{Error, Result};

pub struct StateDir {
    root: PathBuf,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

impl StateDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        StateDir { root: root.into() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn exists(&self) -> bool {
        self.path("owner.bin").is_file()
    }

    pub fn require(&self) -> Result<()> {
        if self.exists() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "no stored state in {}; run `creams store` first",
                self.root.display()
            )))
        }
    }

    pub fn load<T: Decode>(&self, name: &str) -> Result<T> {
        T::from_bytes(&read(&self.path(name))?)
    }

    pub fn save<T: Encode>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, value.to_bytes())?;
        Ok(())
    }

    pub fn owner(&self) -> Result<Owner> {
        self.load("owner.bin")
    }

    pub fn cloud(&self) -> Result<Cloud> {
        self.load("cloud.bin")
    }

    pub fn judge(&self) -> Result<Judge> {
        self.load("judge.bin")
    }

    fn user_file(id: UserId) -> String {
        format!("users/{id}.bin")
    }

    pub fn user(&self, id: UserId) -> Result<Option<User>> {
        let name = Self::user_file(id);
        if self.path(&name).is_file() {
            self.load(&name).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn save_user(&self, user: &User) -> Result<()> {
        self.save(&Self::user_file(user.id()), user)
    }

    pub fn transcript(&self) -> Result<Transcript> {
        let path = self.path("transcript.jsonl");
        if !path.is_file() {
            return Ok(Transcript::default());
        }
        let text = fs::read_to_string(&path)?;
        Transcript::from_jsonl(&text, |digest| read(&self.path(&format!("payloads/{digest}.bin"))))
    }

    /// A bus that appends to the stored transcript under a fresh session id.
    pub fn bus(&self, scheme: Scheme) -> Result<Bus> {
        let t = self.transcript()?;
        let session = t.records().iter().map(|r| r.session).max().unwrap_or(0) + 1;
        Ok(Bus::resume(scheme, session, t))
    }

    pub fn save_transcript(&self, t: &Transcript) -> Result<()> {
        let dir = self.path("payloads");
        fs::create_dir_all(&dir)?;
        for r in t.records() {
            let p = dir.join(format!("{}.bin", r.digest));
            if !p.is_file() {
                fs::write(p, &r.payload)?;
            }
        }
        fs::write(self.path("transcript.jsonl"), t.to_jsonl())?;
        Ok(())
    }
}
