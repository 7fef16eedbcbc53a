use std::fmt::Write as _;

use serde::Serialize;

use super::{rng_for, RunConfig};
use crate::error::{Error, Result};
use crate::lut::{MediaVector, SystemParams};
use crate::pre::metrics::{measure, OpCounts};
use crate::pre::{setup, DEFAULT_DLOG_BOUND};
use crate::protocol::{
    authorize, creams1_part1, creams2_part1, Bus, Cloud, Judge, Owner, Part, RecordKind, Role, Scheme, User,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoleCounts {
    pub ops: OpCounts,
    pub messages: usize,
    pub bytes_sent: usize,
}

/// Counts for one sharing run (one user, one media item).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeBench {
    pub scheme: Scheme,
    pub t: usize,
    pub l: usize,
    pub m: usize,
    pub s: usize,
    pub owner: RoleCounts,
    pub cloud: RoleCounts,
    pub user: RoleCounts,
    /// Bytes the cloud adds to its `F` and `D` sets.
    pub bytes_stored: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BenchReport {
    pub runs: Vec<SchemeBench>,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from(
            "scheme,T,L,M,S,role,exponentiations,pairings,dlogs,additions,messages,bytes_sent,bytes_stored\n",
        );
        for r in &self.runs {
            for (role, c, stored) in [
                ("owner", r.owner, 0),
                ("cloud", r.cloud, r.bytes_stored),
                ("user", r.user, 0),
            ] {
                writeln!(
                    s,
                    "{},{},{},{},{},{role},{},{},{},{},{},{},{stored}",
                    r.scheme,
                    r.t,
                    r.l,
                    r.m,
                    r.s,
                    c.ops.exponentiations,
                    c.ops.pairings,
                    c.ops.dlogs,
                    c.ops.additions,
                    c.messages,
                    c.bytes_sent
                )
                .expect("writing to a string");
            }
        }
        s
    }
}

/// One sharing run per scheme on a random media vector of `size²`
/// coefficients. Work is attributed to whichever entity performs it; the
/// user's count includes encrypting its fingerprint.
pub fn bench(cfg: &RunConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let sys = cfg.system();
    let mut report = BenchReport::default();
    for scheme in [Scheme::One, Scheme::Two] {
        report.runs.push(run(cfg, &sys, scheme)?);
    }
    Ok(report)
}

fn run(cfg: &RunConfig, sys: &SystemParams, scheme: Scheme) -> Result<SchemeBench> {
    use rand::Rng;

    let seed = cfg.seeds[0];
    let params = setup(format!("bench:{seed}").as_bytes(), DEFAULT_DLOG_BOUND)?;
    let mut rng = rng_for(&format!("bench:{seed}:media"));
    let coeffs: Vec<f64> = (0..sys.m).map(|_| rng.gen_range(-200.0..200.0)).collect();
    let mut owner = Owner::new(&params, *sys, cfg.fp, seed)?;
    owner.add_media(
        "bench",
        MediaVector::quantize(&coeffs, &cfg.fp),
        cfg.size as u32,
        cfg.size as u32,
    )?;
    let mut cloud = Cloud::new(&params, *sys, cfg.fp);
    let judge = Judge::new(&params, seed.wrapping_add(1));
    let mut bus = Bus::new(scheme, seed);
    match scheme {
        Scheme::One => creams1_part1(&mut owner, &mut cloud, &mut bus)?,
        Scheme::Two => creams2_part1(&mut owner, &mut cloud, &mut bus)?,
    }

    let (mut user, mut u_ops) = measure(|| User::new(1, &params, cfg.fp, sys.l, judge.public_key(), seed + 2));
    authorize(&mut owner, &mut user, "bench", &mut bus)?;
    let (mut o_ops, mut c_ops) = (OpCounts::default(), OpCounts::default());

    let (req, ops) = measure(|| user.share_request("bench"));
    u_ops += ops;
    let req = bus.send(Part::Sharing, user.role(), Role::Cloud, &req?)?;
    let (r, ops) = measure(|| cloud.receive_share_request(1, req));
    c_ops += ops;
    r?;
    let (rk, ops) = measure(|| owner.delegate(1, "bench"));
    o_ops += ops;
    let rk = bus.send(Part::Sharing, Role::Owner, Role::Cloud, &rk?)?;
    let (response, ops) = measure(|| -> Result<_> {
        cloud.receive_delegation(rk)?;
        cloud.share(scheme, 1, "bench", &mut bus)
    });
    c_ops += ops;
    let response = bus.send(Part::Sharing, Role::Cloud, user.role(), &response?)?;
    let (mk, ops) = measure(|| user.receive(response, sys));
    u_ops += ops;
    if mk?.len() != sys.m {
        return Err(Error::protocol("shared copy has the wrong length"));
    }

    let t = bus.transcript();
    let sharing: Vec<_> = t.part(Part::Sharing).collect();
    let counts = |role: Role, ops: OpCounts| RoleCounts {
        ops,
        messages: sharing
            .iter()
            .filter(|r| r.kind == RecordKind::Send && r.sender == role)
            .count(),
        bytes_sent: sharing
            .iter()
            .filter(|r| r.kind == RecordKind::Send && r.sender == role)
            .map(|r| r.bytes)
            .sum(),
    };
    Ok(SchemeBench {
        scheme,
        t: sys.t,
        l: sys.l,
        m: sys.m,
        s: sys.s,
        owner: counts(Role::Owner, o_ops),
        cloud: counts(Role::Cloud, c_ops),
        user: counts(Role::User(1), u_ops),
        bytes_stored: sharing
            .iter()
            .filter(|r| r.kind == RecordKind::Store)
            .map(|r| r.bytes)
            .sum(),
    })
}
