use creams_core::codec::{Decode, Encode};
use creams_core::fixed::FpParams;
use creams_core::lut::{gen_dlut, MediaVector, SystemParams};
use creams_core::pre::{setup, DEFAULT_DLOG_BOUND};
use creams_core::protocol::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Run {
    owner: Owner,
    user: User,
    judge: Judge,
    bus: Bus,
}

fn honest(scheme: Scheme) -> Run {
    let params = setup(b"audit-tests", DEFAULT_DLOG_BOUND).unwrap();
    let fp = FpParams::default();
    let sys = SystemParams::default().with_media_len(256);
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let coeffs: Vec<f64> = (0..sys.m).map(|_| rng.gen_range(-500.0..500.0)).collect();
    let mut owner = Owner::new(&params, sys, fp, 1).unwrap();
    owner
        .add_media("m", MediaVector::quantize(&coeffs, &fp), 16, 16)
        .unwrap();
    let mut cloud = Cloud::new(&params, sys, fp);
    let judge = Judge::new(&params, 2);
    let mut user = User::new(4, &params, fp, sys.l, judge.public_key(), 3);
    let mut bus = Bus::new(scheme, 1);
    match scheme {
        Scheme::One => creams1_part1(&mut owner, &mut cloud, &mut bus).unwrap(),
        Scheme::Two => creams2_part1(&mut owner, &mut cloud, &mut bus).unwrap(),
    }
    authorize(&mut owner, &mut user, "m", &mut bus).unwrap();
    match scheme {
        Scheme::One => creams1_part2(&mut owner, &mut cloud, &mut user, "m", &mut bus).unwrap(),
        Scheme::Two => creams2_part2(&mut owner, &mut cloud, &mut user, "m", &mut bus).unwrap(),
    };
    Run {
        owner,
        user,
        judge,
        bus,
    }
}

fn policy(r: &Run) -> AuditPolicy {
    AuditPolicy {
        judge_key: r.judge.public_key().id(),
    }
}

fn rules(r: &AuditReport) -> Vec<char> {
    r.violations.iter().map(|v| v.rule).collect()
}

fn first(t: &Transcript, kind: PayloadKind) -> Record {
    t.records().iter().find(|r| r.payload_type == kind).unwrap().clone()
}

#[test]
fn honest_runs_pass() {
    for scheme in [Scheme::One, Scheme::Two] {
        let r = honest(scheme);
        let report = audit(r.bus.transcript(), &policy(&r));
        assert!(report.passed(), "{scheme}: {:?}", report.violations);
        assert_eq!(report.checked, r.bus.transcript().len());
        golden(scheme, r.bus.transcript());
    }
}

fn golden(scheme: Scheme, t: &Transcript) {
    let mut text = String::new();
    for rec in t.records() {
        text += &format!(
            "{:?} {} {:?} {} -> {} {:?}\n",
            rec.part, rec.step, rec.kind, rec.sender, rec.recipient, rec.payload_type
        );
    }
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/script_{scheme}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, want, "transcript script drifted from {}", path.display());
}

#[test]
fn plaintext_fingerprint_to_cloud() {
    let mut r = honest(Scheme::One);
    let leak = Payload::PlainFingerprint {
        user: 4,
        b: r.user.fingerprint().clone(),
    };
    r.bus.send(Part::Sharing, Role::User(4), Role::Cloud, &leak).unwrap();
    let report = audit(r.bus.transcript(), &policy(&r));
    assert_eq!(rules(&report), ['s', 'a']);
}

#[test]
fn plaintext_fingerprint_to_owner() {
    let mut r = honest(Scheme::Two);
    let leak = Payload::PlainFingerprint {
        user: 4,
        b: r.user.fingerprint().clone(),
    };
    r.bus
        .send(Part::Authorization, Role::User(4), Role::Owner, &leak)
        .unwrap();
    let report = audit(r.bus.transcript(), &policy(&r));
    assert_eq!(rules(&report), ['s', 'a']);
    assert!(report.violations[1].detail.contains("fingerprint sent to owner"));
}

#[test]
fn dlut_to_user_in_second_scheme() {
    let mut one = honest(Scheme::One);
    let package = first(one.bus.transcript(), PayloadKind::SharePackage)
        .decode_payload()
        .unwrap();
    let mut two = honest(Scheme::Two);
    two.bus
        .send(Part::Sharing, Role::Cloud, Role::User(4), &package)
        .unwrap();
    let report = audit(two.bus.transcript(), &policy(&two));
    assert_eq!(rules(&report), ['s']);
    assert!(report.violations[0].detail.contains("SharePackage"));
    // The same message is in the first scheme's script.
    one.bus
        .send(Part::Sharing, Role::Cloud, Role::User(4), &package)
        .unwrap();
    assert!(audit(one.bus.transcript(), &policy(&one)).passed());
}

#[test]
fn owner_receives_user_material() {
    let mut r = honest(Scheme::One);
    let sys = *r.owner.sys();
    let d = gen_dlut(
        r.owner.elut(),
        r.owner.encoding_matrix(),
        r.user.fingerprint(),
        sys.sigma_w,
        &FpParams::default(),
    );
    r.bus
        .send(
            Part::Sharing,
            Role::Cloud,
            Role::Owner,
            &Payload::PlainDLut { user: 4, d },
        )
        .unwrap();
    // A share package is encrypted, but to the user rather than the judge.
    let package = first(r.bus.transcript(), PayloadKind::SharePackage)
        .decode_payload()
        .unwrap();
    r.bus.send(Part::Sharing, Role::Cloud, Role::Owner, &package).unwrap();
    let report = audit(r.bus.transcript(), &policy(&r));
    assert_eq!(rules(&report), ['s', 'a', 's', 'b']);
}

#[test]
fn stored_entry_from_foreign_fingerprint() {
    let r = honest(Scheme::Two);
    let mut rec = first(r.bus.transcript(), PayloadKind::DRecord);
    let Payload::DRecord {
        user,
        media_id,
        dlut_digest,
        ..
    } = rec.decode_payload().unwrap()
    else {
        unreachable!()
    };
    let forged = Payload::DRecord {
        user,
        media_id,
        source: [7; 32],
        dlut_digest,
    };
    rec.payload = forged.to_bytes();
    rec.digest = digest_hex(&rec.payload);
    let mut t = r.bus.into_transcript();
    t.inject(rec);
    let report = audit(
        &t,
        &AuditPolicy {
            judge_key: r.judge.public_key().id(),
        },
    );
    assert_eq!(rules(&report), ['c']);
    assert!(report.violations[0].detail.contains("never sent"));
    assert!(Payload::from_bytes(&t.records().last().unwrap().payload).is_ok());
}
