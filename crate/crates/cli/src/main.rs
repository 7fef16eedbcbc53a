//! `creams`: drive storage, sharing and arbitration from the shell, and
//! reproduce the quality, tracking and cost experiments as CSV.
//!
//! ```text
//! creams --state run --set size=64 --set images=lena,car store
//! creams --state run share --user 1 --media lena
//! creams --state run arbitrate --media lena --suspect run/copies/lena.user1.pgm
//! creams --state run audit
//! creams --set size=128 --set seeds=1,2 table2
//! creams --set size=32 --set t=200 --set l=20 bench
//! ```

mod state;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use creams_core::codec::{Decode, Encode};
use creams_core::experiment::{bench, table2, table3, RunConfig, TABLE2_HEADER, TABLE3_HEADER};
use creams_core::lut::MediaVector;
use creams_core::media::{from_coefficients, load_or_synthetic, load_pgm, save_pgm, to_coefficients};
use creams_core::pre::{keygen, setup, PublicParams, DEFAULT_DLOG_BOUND};
use creams_core::protocol::{
    audit, authorize, creams1_part1, creams1_part2, creams1_part3, creams2_part1, creams2_part2, AuditPolicy, Cloud,
    Judge, Owner, Role, Scheme, User, UserId,
};
use creams_core::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use state::StateDir;

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RANGE: u8 = 3;
const EXIT_DECODER: u8 = 4;
const EXIT_AUDIT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "creams",
    version,
    about = "Cloud media sharing with asymmetric fingerprinting"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set sigma_w=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Directory holding the entities, transcript and shared copies.
    #[arg(long, global = true, default_value = "state")]
    state: PathBuf,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write public parameters and a key pair for one role.
    Keygen {
        /// owner, cloud, judge, or user:K.
        #[arg(long)]
        role: Role,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Create the owner, cloud and judge and upload the configured images.
    Store,
    /// Authorize a user and deliver their fingerprinted copy.
    Share {
        #[arg(long)]
        user: UserId,
        #[arg(long)]
        media: String,
    },
    /// Trace a suspect copy (`.pgm` image or `.bin` media vector).
    Arbitrate {
        #[arg(long)]
        media: String,
        #[arg(long)]
        suspect: PathBuf,
    },
    /// Mean PSNR of fingerprinted copies per image, method and sigma_w.
    Table2,
    /// Tracking success rate per image, method, sigma_n and sigma_w.
    Table3 {
        /// Use 500 users per cell instead of `k`.
        #[arg(long)]
        full: bool,
    },
    /// Per-role operation counts for one sharing run of each scheme.
    Bench,
    /// Check the stored transcript against the protocol rules.
    Audit,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = exit_code(&e);
            eprintln!(
                "{}",
                json!({ "error": kind(&e), "message": e.to_string(), "exit": code })
            );
            ExitCode::from(code)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Range { .. } | Error::Overflow(_) => EXIT_RANGE,
        Error::Decoder(_) => EXIT_DECODER,
        _ => EXIT_OTHER,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Overflow(_) => "overflow",
        Error::Range { .. } => "range",
        Error::Homomorphism(_) => "homomorphism",
        Error::Delegation(_) => "delegation",
        Error::Decoder(_) => "decoder",
        Error::Format(_) => "format",
        Error::Config(_) => "config",
        Error::Protocol(_) => "protocol",
        Error::Io(_) => "io",
    }
}

/// Defaults, then the stored run's config, then `--config`, then `--set`.
fn config(cli: &Cli, st: &StateDir) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let stored = st.path("config.txt");
    if stored.is_file() {
        cfg.apply(&fs::read_to_string(stored)?)?;
    }
    if let Some(p) = &cli.config {
        let text =
            fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
        cfg.apply(&text)?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn params_for(seed: u64) -> Result<PublicParams> {
    setup(format!("creams:{seed}").as_bytes(), DEFAULT_DLOG_BOUND)
}

fn run(cli: &Cli) -> Result<u8> {
    let st = StateDir::new(&cli.state);
    match &cli.cmd {
        Cmd::Keygen { role, out, seed } => cmd_keygen(*role, out, *seed),
        Cmd::Store => cmd_store(&config(cli, &st)?, &st),
        Cmd::Share { user, media } => {
            st.require()?;
            cmd_share(&config(cli, &st)?, &st, *user, media)
        }
        Cmd::Arbitrate { media, suspect } => {
            st.require()?;
            cmd_arbitrate(&config(cli, &st)?, &st, media, suspect)
        }
        Cmd::Table2 => {
            let cfg = config(cli, &st)?;
            let rows = table2(&cfg)?;
            emit(&cfg, "table2.csv", TABLE2_HEADER, rows.iter().map(|r| r.csv()))
        }
        Cmd::Table3 { full } => {
            let mut cfg = config(cli, &st)?;
            if *full {
                cfg.sys.k = 500;
            }
            let rows = table3(&cfg)?;
            emit(&cfg, "table3.csv", TABLE3_HEADER, rows.iter().map(|r| r.csv()))
        }
        Cmd::Bench => {
            let cfg = config(cli, &st)?;
            let text = bench(&cfg)?.to_text();
            fs::create_dir_all(&cfg.out_dir)?;
            fs::write(cfg.out_dir.join("bench.csv"), &text)?;
            print!("{text}");
            Ok(0)
        }
        Cmd::Audit => {
            st.require()?;
            cmd_audit(&st)
        }
    }
}

fn emit(cfg: &RunConfig, file: &str, header: &str, rows: impl Iterator<Item = String>) -> Result<u8> {
    let mut text = format!("{header}\n");
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join(file), &text)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(0)
}

fn cmd_keygen(role: Role, out: &Path, seed: u64) -> Result<u8> {
    let params = params_for(seed)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ role_salt(role));
    let keys = keygen(&params, &mut rng);
    fs::create_dir_all(out)?;
    let stem = role.to_string().replace(':', "");
    let files = [
        (out.join("params.bin"), params.to_bytes()),
        (out.join(format!("{stem}.pk")), keys.pk.to_bytes()),
        (out.join(format!("{stem}.sk")), keys.sk.to_bytes()),
    ];
    for (p, bytes) in &files {
        fs::write(p, bytes)?;
        println!("{}", p.display());
    }
    Ok(0)
}

fn role_salt(role: Role) -> u64 {
    match role {
        Role::Owner => 1 << 40,
        Role::Cloud => 2 << 40,
        Role::Judge => 3 << 40,
        Role::User(k) => (4 << 40) | u64::from(k),
    }
}

fn cmd_store(cfg: &RunConfig, st: &StateDir) -> Result<u8> {
    let seed = cfg.seeds[0];
    let params = params_for(seed)?;
    let sys = cfg.system();
    let mut owner = Owner::new(&params, sys, cfg.fp, seed)?;
    for name in &cfg.images {
        let (img, _) = load_or_synthetic(name, cfg.image_dir.as_deref(), cfg.size, cfg.size)?;
        owner.add_media(
            name,
            to_coefficients(&img, &cfg.fp),
            img.width() as u32,
            img.height() as u32,
        )?;
    }
    let mut cloud = Cloud::new(&params, sys, cfg.fp);
    let judge = Judge::new(&params, seed.wrapping_add(1));
    let mut bus = st.bus(cfg.scheme)?;
    if !bus.transcript().is_empty() {
        return Err(Error::Config("state directory already holds a run".into()));
    }
    match cfg.scheme {
        Scheme::One => creams1_part1(&mut owner, &mut cloud, &mut bus)?,
        Scheme::Two => creams2_part1(&mut owner, &mut cloud, &mut bus)?,
    }
    fs::create_dir_all(st.path(""))?;
    fs::write(st.path("config.txt"), cfg.to_text())?;
    st.save("params.bin", &params)?;
    st.save("owner.bin", &owner)?;
    st.save("cloud.bin", &cloud)?;
    st.save("judge.bin", &judge)?;
    st.save_transcript(bus.transcript())?;
    for id in owner.media_ids() {
        println!("stored {id}");
    }
    Ok(0)
}

fn cmd_share(cfg: &RunConfig, st: &StateDir, id: UserId, media: &str) -> Result<u8> {
    let mut owner = st.owner()?;
    let mut cloud = st.cloud()?;
    let judge = st.judge()?;
    let params = owner.params().clone();
    let mut user = match st.user(id)? {
        Some(u) => u,
        None => User::new(
            id,
            &params,
            *owner.fp(),
            owner.sys().l,
            judge.public_key(),
            cfg.seeds[0].wrapping_add(1000 + u64::from(id)),
        ),
    };
    let mut bus = st.bus(cfg.scheme)?;
    authorize(&mut owner, &mut user, media, &mut bus)?;
    let mk = match cfg.scheme {
        Scheme::One => creams1_part2(&mut owner, &mut cloud, &mut user, media, &mut bus)?,
        Scheme::Two => creams2_part2(&mut owner, &mut cloud, &mut user, media, &mut bus)?,
    };
    let om = owner.media(media).expect("authorized media exists");
    let img = from_coefficients(&mk, om.width as usize, om.height as usize)?;
    let stem = format!("copies/{media}.user{id}");
    st.save(&format!("{stem}.bin"), &mk)?;
    save_pgm(&img, st.path(&format!("{stem}.pgm")))?;
    st.save("owner.bin", &owner)?;
    st.save("cloud.bin", &cloud)?;
    st.save_user(&user)?;
    st.save_transcript(bus.transcript())?;
    println!("{}", st.path(&format!("{stem}.pgm")).display());
    Ok(0)
}

fn load_suspect(path: &Path, owner: &Owner) -> Result<MediaVector> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => Ok(to_coefficients(&load_pgm(path)?, owner.fp())),
        Some("bin") => MediaVector::from_bytes(&fs::read(path)?),
        _ => Err(Error::Config(format!(
            "suspect must be a .pgm or .bin file: {}",
            path.display()
        ))),
    }
}

fn cmd_arbitrate(cfg: &RunConfig, st: &StateDir, media: &str, suspect: &Path) -> Result<u8> {
    let owner = st.owner()?;
    let cloud = st.cloud()?;
    let judge = st.judge()?;
    let suspect = load_suspect(suspect, &owner)?;
    let mut bus = st.bus(cfg.scheme)?;
    let v = creams1_part3(&owner, &cloud, &judge, media, suspect, cfg.decoder, cfg.tau, &mut bus)?;
    st.save_transcript(bus.transcript())?;
    let out = json!({
        "media_id": v.media_id,
        "tau": v.tau,
        "accused": v.accused(),
        "ambiguous": v.ambiguous(),
        "matches": v.matches,
        "distances": v.distances.iter().map(|(u, d)| json!({ "user": u, "distance": d })).collect::<Vec<_>>(),
    });
    println!("{out}");
    Ok(0)
}

fn cmd_audit(st: &StateDir) -> Result<u8> {
    let t = st.transcript()?;
    let judge = st.judge()?;
    let report = audit(
        &t,
        &AuditPolicy {
            judge_key: judge.keys().id(),
        },
    );
    println!(
        "{}",
        serde_json::to_string(&report).map_err(|e| Error::Format(e.to_string()))?
    );
    Ok(if report.passed() { 0 } else { EXIT_AUDIT })
}
