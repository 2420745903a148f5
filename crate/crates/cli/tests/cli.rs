use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polplace::linalg::eigenvalues;
use polplace::spectrum::format_complex;
use polplace::Spectrum;
use polplace_cli::files::SystemFile;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polplace"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gain(report: &str) -> Vec<f64> {
    let v: serde_json::Value = serde_json::from_str(report).unwrap();
    v["k"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn poles(s: &Spectrum) -> String {
    let items: Vec<String> = s.iter().map(|&z| format!("\"{}\"", format_complex(z))).collect();
    format!("[{}]", items.join(", "))
}

const DOUBLE_INTEGRATOR: &str = r#"{"n": 2, "A": [[0, 1], [0, 0]], "b": [0, 1]}"#;

#[test]
fn place_double_integrator_every_full_method() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", DOUBLE_INTEGRATOR);
    let plan = write(&dir, "plan.json", r#"{"poles": [-1, -2]}"#);
    for method in ["bass-gura", "ackermann"] {
        let out = run(&["place", "--system", s(&sys), "--plan", s(&plan), "--method", method]);
        assert_eq!(code(&out), 0, "{method}");
        assert_eq!(gain(&stdout(&out)), vec![-2.0, -3.0]);
    }
    let out = run(&[
        "place",
        "--system",
        s(&sys),
        "--plan",
        s(&plan),
        "--method",
        "general",
        "--pulled",
        "-1",
    ]);
    assert_eq!(code(&out), 0);
    let k = gain(&stdout(&out));
    assert!((k[0] + 2.0).abs() <= 1e-10 && (k[1] + 3.0).abs() <= 1e-10);
}

#[test]
fn place_sequential_reports_steps() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", r#"{"n": 2, "A": [[1, 0], [0, 2]], "b": [1, 1]}"#);
    let plan = write(
        &dir,
        "plan.json",
        r#"{"groups": [{"move": [1], "to": [-1]}, {"move": [2], "to": [-3]}]}"#,
    );
    let out = run(&[
        "place",
        "--system",
        s(&sys),
        "--plan",
        s(&plan),
        "--method",
        "sequential",
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let k = gain(&stdout(&out));
    assert!((k[0] - 8.0).abs() <= 1e-8 && (k[1] + 15.0).abs() <= 1e-8);
    assert_eq!(report["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", DOUBLE_INTEGRATOR);
    let plan = write(&dir, "plan.json", r#"{"poles": [-1, -2]}"#);
    let good = run(&["verify", "--system", s(&sys), "--plan", s(&plan), "--gain", "-2,-3"]);
    assert_eq!(code(&good), 0);
    assert!(stdout(&good).contains("PASS"));
    let bad = run(&["verify", "--system", s(&sys), "--plan", s(&plan), "--gain", "-2,-4"]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("FAIL"));
    let short = run(&["verify", "--system", s(&sys), "--plan", s(&plan), "--gain", "-2"]);
    assert_eq!(code(&short), 2);
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let plan = write(&dir, "plan.json", r#"{"poles": [-1, -2]}"#);
    let missing = run(&[
        "place",
        "--system",
        "/nonexistent/sys.json",
        "--plan",
        s(&plan),
        "--method",
        "ackermann",
    ]);
    assert_eq!(code(&missing), 2);
    let malformed = write(&dir, "bad.json", r#"{"n": 2, "A": [[0, 1]], "b": [0, 1]}"#);
    let out = run(&[
        "place",
        "--system",
        s(&malformed),
        "--plan",
        s(&plan),
        "--method",
        "ackermann",
    ]);
    assert_eq!(code(&out), 2);
    let uncontrollable = write(&dir, "unc.json", r#"{"n": 2, "A": [[1, 0], [0, 2]], "b": [1, 0]}"#);
    let out = run(&[
        "place",
        "--system",
        s(&uncontrollable),
        "--plan",
        s(&plan),
        "--method",
        "ackermann",
    ]);
    assert_eq!(code(&out), 3);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn gen_is_deterministic() {
    let a = run(&["gen", "--n", "5", "--seed", "42"]);
    let b = run(&["gen", "--n", "5", "--seed", "42"]);
    let c = run(&["gen", "--n", "5", "--seed", "43"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&c));
    let file = SystemFile::parse(&stdout(&a), "gen").unwrap();
    assert_eq!((file.n, file.a.len(), file.b.len()), (5, 5, 5));
}

#[test]
fn gen_place_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    for seed in 0..50u64 {
        let n = 2 + (seed % 7) as usize;
        let text = stdout(&run(&["gen", "--n", &n.to_string(), "--seed", &seed.to_string()]));
        let sys_path = write(&dir, "sys.json", &text);
        let sys = SystemFile::parse(&text, "gen").unwrap().to_system().unwrap();
        let open = eigenvalues(sys.a()).unwrap();
        let targets: Vec<f64> = (1..=n).map(|i| -0.5 * i as f64).collect();
        let full = write(&dir, "full.json", &format!("{{\"poles\": {targets:?}}}"));

        let groups = open.conjugate_groups();
        let mut entries = Vec::new();
        let mut used = 0;
        for g in &groups {
            let to = Spectrum::real(&targets[used..used + g.len()]);
            used += g.len();
            entries.push(format!(
                "{{\"move\": {}, \"to\": {}}}",
                poles(&Spectrum::new(g.clone()).unwrap()),
                poles(&to)
            ));
        }
        let seq = write(&dir, "seq.json", &format!("{{\"groups\": [{}]}}", entries.join(", ")));
        let one = write(&dir, "one.json", &format!("{{\"groups\": [{}]}}", entries[0]));

        let mut runs: Vec<(&str, &Path, Vec<String>)> = vec![
            ("bass-gura", &full, vec![]),
            ("ackermann", &full, vec![]),
            ("general", &full, vec!["--pulled".into(), format!("{}", targets[0])]),
            ("sequential", &seq, vec![]),
            ("partial", &one, vec![]),
        ];
        let real = open.iter().find(|z| z.im == 0.0).map(|z| z.re);
        let sm;
        if let Some(mu) = real {
            sm = write(
                &dir,
                "sm.json",
                &format!("{{\"groups\": [{{\"move\": [\"{mu}\"], \"to\": [-7]}}]}}"),
            );
            runs.push(("simon-mitter", &sm, vec![]));
        }
        for (method, plan, extra) in runs {
            let mut args = vec!["place", "--system", s(&sys_path), "--plan", s(plan), "--method", method];
            args.extend(extra.iter().map(String::as_str));
            let out = run(&args);
            assert_eq!(
                code(&out),
                0,
                "seed {seed} {method}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let report = write(&dir, "report.json", &stdout(&out));
            let check = run(&[
                "verify",
                "--system",
                s(&sys_path),
                "--plan",
                s(plan),
                "--gain",
                s(&report),
            ]);
            assert_eq!(code(&check), 0, "seed {seed} {method}: {}", stdout(&check));
        }
    }
}

#[test]
fn compare_emits_nine_column_csv() {
    let out = run(&["compare", "--n", "3,5", "--trials", "2", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let csv_part = text.split("\n\n").last().unwrap();
    let mut reader = csv::Reader::from_reader(csv_part.as_bytes());
    assert_eq!(reader.headers().unwrap().len(), 9);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert!(rows.iter().all(|r| r.len() == 9));
}
