use std::path::Path;
use std::process::{Command, Output};

use creams_core::experiment::{TABLE2_HEADER, TABLE3_HEADER};

fn creams(state: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_creams"))
        .arg("--state")
        .arg(state)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_record(out: &Output) -> serde_json::Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.lines().last().unwrap_or("")).expect("stderr ends with a JSON error record")
}

#[test]
fn keygen_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("keys");
    let o = creams(
        dir.path(),
        &["keygen", "--role", "judge", "--out", out.to_str().unwrap()],
    );
    ok(&o);
    let mut names: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["judge.pk", "judge.sk", "params.bin"]);

    let again = dir.path().join("again");
    ok(&creams(
        dir.path(),
        &["keygen", "--role", "judge", "--out", again.to_str().unwrap()],
    ));
    for n in &names {
        assert_eq!(
            std::fs::read(out.join(n)).unwrap(),
            std::fs::read(again.join(n)).unwrap()
        );
    }
}

fn round_trip(scheme: &str, size: &str, suspect_ext: &str) {
    let dir = tempfile::tempdir().unwrap();
    let st = dir.path().join("run");
    let set = |kv: &str| ["--set".to_string(), kv.to_string()];
    let mut args: Vec<String> = Vec::new();
    for kv in [format!("scheme={scheme}"), format!("size={size}"), "images=car".into()] {
        args.extend(set(&kv));
    }
    args.push("store".into());
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert!(ok(&creams(&st, &args)).contains("stored car"));

    for u in ["3", "5"] {
        ok(&creams(&st, &["share", "--user", u, "--media", "car"]));
    }
    let suspect = st.join(format!("copies/car.user5.{suspect_ext}"));
    let v: serde_json::Value = serde_json::from_str(&ok(&creams(
        &st,
        &["arbitrate", "--media", "car", "--suspect", suspect.to_str().unwrap()],
    )))
    .unwrap();
    assert_eq!(v["accused"], 5, "{v}");
    assert_eq!(v["ambiguous"], false);

    let report: serde_json::Value = serde_json::from_str(&ok(&creams(&st, &["audit"]))).unwrap();
    assert_eq!(report["violations"].as_array().unwrap().len(), 0, "{report}");
    let lines = std::fs::read_to_string(st.join("transcript.jsonl")).unwrap();
    let sessions: std::collections::BTreeSet<u64> = lines
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["session"]
                .as_u64()
                .unwrap()
        })
        .collect();
    assert_eq!(sessions.len(), 4, "store, two shares and one arbitration");
}

#[test]
fn first_scheme_traces_the_leaked_image() {
    round_trip("I", "64", "pgm");
}

#[test]
fn second_scheme_traces_the_leaked_vector() {
    round_trip("II", "32", "bin");
}

#[test]
fn unknown_media_fails_with_an_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let st = dir.path().join("run");
    ok(&creams(&st, &["--set", "size=32", "--set", "images=lena", "store"]));
    let o = creams(&st, &["share", "--user", "1", "--media", "mandrill"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_record(&o);
    assert_eq!(e["error"], "protocol");
    assert!(e["message"].as_str().unwrap().contains("mandrill"));
    assert!(!st.join("users/1.bin").exists());

    let o = creams(&st, &["store"]);
    assert_eq!(o.status.code(), Some(2), "a second store is refused");
}

#[test]
fn exit_codes_separate_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let st = dir.path().join("none");
    let o = creams(&st, &["share", "--user", "1", "--media", "lena"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"], "config");

    let o = creams(&st, &["--set", "decoder=ml", "table2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = creams(&st, &["--set", "sigma_w", "table2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = creams(&st, &["--config", "/nonexistent/run.conf", "bench"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tampered_payload_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let st = dir.path().join("run");
    ok(&creams(&st, &["--set", "size=32", "--set", "images=lena", "store"]));
    let p = std::fs::read_dir(st.join("payloads"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let mut bytes = std::fs::read(&p).unwrap();
    bytes[0] ^= 1;
    std::fs::write(&p, bytes).unwrap();
    let o = creams(&st, &["audit"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["error"], "format");
}

#[test]
fn csv_headers_are_pinned_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let common = [
        "--set",
        "size=32",
        "--set",
        "images=pirate",
        "--set",
        "seeds=1,2",
        "--set",
        "k=4",
        "--set",
    ];
    let out_kv = format!("out_dir={}", out.display());
    let run = |cmd: &str| {
        let mut a: Vec<&str> = common.to_vec();
        a.push(&out_kv);
        a.push(cmd);
        ok(&creams(dir.path(), &a))
    };

    let t2 = run("table2");
    assert_eq!(t2.lines().next(), Some("image,source,method,sigma_w,psnr_db,runs"));
    assert_eq!(t2.lines().next(), Some(TABLE2_HEADER));
    assert_eq!(t2.lines().count(), 1 + 2 * 5);
    assert_eq!(t2, run("table2"));
    assert_eq!(std::fs::read_to_string(out.join("table2.csv")).unwrap(), t2);

    let t3 = run("table3");
    assert_eq!(
        t3.lines().next(),
        Some("image,source,method,sigma_n,sigma_w,decoder,k,trials,success_rate")
    );
    assert_eq!(t3.lines().next(), Some(TABLE3_HEADER));
    assert_eq!(t3.lines().count(), 1 + 2 * 2 * 5);
    assert_eq!(t3, run("table3"));

    let b = run("bench");
    assert_eq!(
        b.lines().next(),
        Some("scheme,T,L,M,S,role,exponentiations,pairings,dlogs,additions,messages,bytes_sent,bytes_stored")
    );
    assert_eq!(b.lines().count(), 1 + 2 * 3);
    assert!(b.lines().any(|l| l.starts_with("I,") && l.contains(",owner,")));
}
