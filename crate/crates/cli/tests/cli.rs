use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use layercode::codes;
use layercode::lattice::{build_layer_code, extract_syndrome, read_lattice, write_lattice};
use layercode::pauli::{PauliError, PauliKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layercode"))
        .args(args)
        .env("LAYERCODE_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a config next to the code fixture reference.
fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let code = fixture("four_two_two.code");
    fs::write(&path, format!("code = {:?}\n{body}", path_str(&code))).unwrap();
    path
}

fn built_lattice(out: &Path) -> PathBuf {
    let o = run(out, &["build", path_str(&fixture("crossing_string.toml"))]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    out.join("lattice.txt")
}

#[test]
fn build_reports_layer_counts_and_round_trips() {
    let tmp = TempDir::new().unwrap();
    let lattice = built_lattice(tmp.path());
    let o = run(
        tmp.path(),
        &["build", path_str(&fixture("crossing_string.toml"))],
    );
    assert!(stdout(&o).starts_with("grey=4 blue=1 red=1 k=2\n"));
    assert!(stdout(&o).contains("validation=ok"));
    let text = fs::read_to_string(&lattice).unwrap();
    let lat = read_lattice(&text).unwrap();
    assert_eq!(write_lattice(&lat), text);
    let rebuilt = build_layer_code(&codes::four_two_two(), 3, false).unwrap();
    assert_eq!(lat.hx(), rebuilt.hx());
    assert_eq!(lat.hz(), rebuilt.hz());
}

#[test]
fn malformed_code_exits_with_parse_code() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.code"), "n 4 xchecks 1\n1111\n").unwrap();
    fs::write(tmp.path().join("bad.toml"), "code = \"bad.code\"\n").unwrap();
    let o = run(
        tmp.path(),
        &["build", path_str(&tmp.path().join("bad.toml"))],
    );
    assert_eq!(o.status.code(), Some(2));
    fs::write(
        tmp.path().join("typo.toml"),
        "code = \"bad.code\"\nsurface_scal = 3\n",
    )
    .unwrap();
    assert_eq!(
        run(
            tmp.path(),
            &["build", path_str(&tmp.path().join("typo.toml"))]
        )
        .status
        .code(),
        Some(2)
    );
    fs::write(tmp.path().join("missing.toml"), "code = \"nope.code\"\n").unwrap();
    assert_eq!(
        run(
            tmp.path(),
            &["build", path_str(&tmp.path().join("missing.toml"))]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn crossing_string_fixture_transcript() {
    let tmp = TempDir::new().unwrap();
    let lattice = built_lattice(tmp.path());
    let o = run(
        tmp.path(),
        &[
            "decode",
            path_str(&lattice),
            path_str(&fixture("crossing_string.err")),
            "--audit",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let expected = "\
[x]
stage1 layer=blue:0 sites=2 weight=1
stage2 layer=grey:0 sites=1 weight=2
stage3 parity=1 input_correction=1000 flipped=grey:0
stage4 layer=red:0 sites=2 weight=1
final residual=0
[z]
stage1 layer=red:0 sites=2 weight=1
stage2 layer=grey:0 sites=1 weight=2
stage3 parity=1 input_correction=1000 flipped=grey:0
stage4 layer=blue:0 sites=2 weight=1
final residual=0
";
    assert!(stdout(&o).starts_with(expected), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("residual syndrome=0 logical=trivial\n"));
}

#[test]
fn empty_syndrome_gives_empty_correction() {
    let tmp = TempDir::new().unwrap();
    let lattice = built_lattice(tmp.path());
    let input = tmp.path().join("empty.syn");
    fs::write(&input, "# nothing lit\n").unwrap();
    let o = run(
        tmp.path(),
        &["decode", path_str(&lattice), path_str(&input)],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("correction x\ncorrection z\n"));
}

#[test]
fn random_valid_syndromes_decode_cleanly() {
    let tmp = TempDir::new().unwrap();
    let lattice = built_lattice(tmp.path());
    let lat = read_lattice(&fs::read_to_string(&lattice).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..8 {
        let mut e = PauliError::identity(lat.num_qubits());
        for q in 0..lat.num_qubits() {
            for kind in [PauliKind::X, PauliKind::Z] {
                if rng.gen_bool(0.02) {
                    e.flip(q, kind);
                }
            }
        }
        let s = extract_syndrome(&lat, &e);
        let line = |tag: &str, v: &layercode::gf2::BitVec| {
            format!(
                "{tag} {}\n",
                v.ones()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        };
        let input = tmp.path().join(format!("s{i}.syn"));
        fs::write(&input, line("m", &s.m_lit) + &line("e", &s.e_lit)).unwrap();
        let o = run(
            tmp.path(),
            &["decode", path_str(&lattice), path_str(&input)],
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let out = stdout(&o);
        let support = |tag: &str| -> Vec<usize> {
            let l = out.lines().find(|l| l.starts_with(tag)).unwrap();
            l[tag.len()..]
                .split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect()
        };
        let mut r = PauliError::identity(lat.num_qubits());
        support("correction x")
            .into_iter()
            .for_each(|q| r.flip(q, PauliKind::X));
        support("correction z")
            .into_iter()
            .for_each(|q| r.flip(q, PauliKind::Z));
        assert_eq!(extract_syndrome(&lat, &r), s);
    }
}

#[test]
fn meta_check_violation_exits_three() {
    let tmp = TempDir::new().unwrap();
    let lat = build_layer_code(&codes::toric(2), 2, false).unwrap();
    let lattice = tmp.path().join("toric.txt");
    fs::write(&lattice, write_lattice(&lat)).unwrap();
    // One lit face inside a red layer gives that layer odd parity on its own.
    let red = &lat.layers[lat.red(0)];
    let face = red.face(2, 2).unwrap();
    let input = tmp.path().join("bad.syn");
    fs::write(&input, format!("m {face}\n")).unwrap();
    let o = run(
        tmp.path(),
        &["decode", path_str(&lattice), path_str(&input)],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("meta-checks"));
}

#[test]
fn thermal_dry_run_and_smoke() {
    let tmp = TempDir::new().unwrap();
    let cfg = fixture("thermal_smoke.toml");
    let o = run(tmp.path(), &["thermal", path_str(&cfg), "--dry-run"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max_records=180"));
    assert!(!tmp.path().join("records.jsonl").exists());

    let o = run(tmp.path(), &["thermal", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    let first = fs::read_to_string(tmp.path().join("records.jsonl")).unwrap();
    assert_eq!(first.lines().count(), 2 * 30 * 3);
    for line in first.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["master_seed"], 11);
        assert!(v["config_hash"].as_str().unwrap().len() == 16);
        assert!(v.get("failed_logicals").is_some());
    }
    run(tmp.path(), &["thermal", path_str(&cfg), "--threads", "2"]);
    assert_eq!(
        fs::read_to_string(tmp.path().join("records.jsonl")).unwrap(),
        first
    );
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);

    let other = run(tmp.path(), &["thermal", path_str(&cfg), "--seed", "12"]);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(
        fs::read_to_string(tmp.path().join("records.jsonl")).unwrap(),
        first
    );
}

#[test]
fn thermal_rejects_too_few_trajectories() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        tmp.path(),
        "few.toml",
        "seed = 1\n[thermal]\nbetas = [1.0]\ntimes = [1.0]\ntrajectories = 10\n",
    );
    assert_eq!(
        run(tmp.path(), &["thermal", path_str(&cfg)]).status.code(),
        Some(2)
    );
}

fn bounds_rows(out: &str) -> Vec<&str> {
    out.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .collect()
}

#[test]
fn bounds_sweeps() {
    let tmp = TempDir::new().unwrap();
    let single = tmp.path().join("one.toml");
    fs::write(
        &single,
        "[bounds]\na=[0.5]\nbeta=[1.0]\nm=[4]\nL=[6]\nk=2\nN=30\nr=0.1\nc=0.5\nv=2.0\n",
    )
    .unwrap();
    let o = run(tmp.path(), &["bounds", path_str(&single)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.starts_with("a,beta,L,m,k,N,eps_bound_log,tmem_log,Lstar_conservative,Lstar_refined\n")
    );
    assert_eq!(bounds_rows(&out).len(), 1);

    let sweep = tmp.path().join("sweep.toml");
    fs::write(
        &sweep,
        "[bounds]\na=[0.3,0.5,0.7]\nbeta=[2.0]\nm=[4]\nL=[6]\nk=2\nN=30\nr=0.1\nc=0.5\nv=2.0\n",
    )
    .unwrap();
    let out = stdout(&run(tmp.path(), &["bounds", path_str(&sweep)]));
    assert_eq!(bounds_rows(&out).len(), 3);
    assert!(out.contains("# closed form >= exact tail: ok"));

    let zero = tmp.path().join("zero.toml");
    fs::write(
        &zero,
        "[bounds]\na=[0.5]\nbeta=[1.0]\nm=[4]\nL=[6]\nk=2\nN=30\nr=0.1\nc=0.5\nv=2.0\nt=0.0\n",
    )
    .unwrap();
    let file = tmp.path().join("zero.csv");
    run(
        tmp.path(),
        &["bounds", path_str(&zero), "--out", path_str(&file)],
    );
    let row = fs::read_to_string(&file).unwrap();
    assert_eq!(bounds_rows(&row)[0].split(',').nth(6), Some("-inf"));

    let bad = tmp.path().join("bad.toml");
    fs::write(
        &bad,
        "[bounds]\na=[1.5]\nbeta=[1.0]\nm=[4]\nL=[6]\nk=2\nN=30\nr=0.1\nc=0.5\nv=2.0\n",
    )
    .unwrap();
    assert_eq!(
        run(tmp.path(), &["bounds", path_str(&bad)]).status.code(),
        Some(2)
    );
}

#[test]
fn barrier_verb_and_budget_exit() {
    let tmp = TempDir::new().unwrap();
    let cfg = fixture("barrier.toml");
    let o = run(tmp.path(), &["barrier", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("barrier=1 exhaustive=true"));
    assert!(out.contains("witness max_penalty=1 decoded=fail"));
    assert!(out.contains("guaranteed_weight="));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("barrier.json")).unwrap())
            .unwrap();
    assert_eq!(record["barrier"], 1);
    assert!(!record["path"].as_array().unwrap().is_empty());
    assert_eq!(
        run(tmp.path(), &["--budget", "10", "barrier", path_str(&cfg)])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn sample_and_report() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["sample", path_str(&fixture("sample.toml"))]);
    assert_eq!(o.status.code(), Some(0));
    let lines = fs::read_to_string(tmp.path().join("samples.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 200);

    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    fs::write(&a, "beta,L\n2,5\n1,5\n").unwrap();
    fs::write(&b, "# note\nbeta,L\n1.5,5\n").unwrap();
    let o = run(tmp.path(), &["report", path_str(&a), path_str(&b)]);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "beta,L,source");
    assert!(
        rows[1].starts_with("1,5,") && rows[2].starts_with("1.5,5,") && rows[3].starts_with("2,5,")
    );
    assert_eq!(run(tmp.path(), &["report"]).status.code(), Some(2));
}
