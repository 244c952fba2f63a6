use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn henon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henon")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_map(dir: &Path, name: &str, factors: &[(&str, &str, &str)]) -> PathBuf {
    let body: Vec<String> = factors
        .iter()
        .map(|(b, d, p)| format!(r#"{{ "b": {b}, "delta": {d}, "p": "{p}" }}"#))
        .collect();
    let path = dir.join(name);
    std::fs::write(&path, format!(r#"{{ "factors": [ {} ] }}"#, body.join(", "))).unwrap();
    path
}

struct Maps {
    _dir: tempfile::TempDir,
    h: PathBuf,
    h2: PathBuf,
    cubic: PathBuf,
    root: PathBuf,
}

fn maps() -> Maps {
    let dir = tempfile::tempdir().unwrap();
    let one = ("[1, 0]", "[1, 0]", "y^2");
    Maps {
        h: write_map(dir.path(), "h.json", &[one]),
        h2: write_map(dir.path(), "h2.json", &[one, one]),
        cubic: write_map(dir.path(), "c.json", &[("[2, 0]", "[1, 0]", "y^3")]),
        root: dir.path().to_path_buf(),
        _dir: dir,
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn commute_prints_unit_witness() {
    let m = maps();
    let o = henon(&["commute", "--f", s(&m.h2), "--h", s(&m.h)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("delta_minus = 1, delta_plus = 1"), "{}", stdout(&o));
}

#[test]
fn commute_without_witness_exits_one() {
    let m = maps();
    let o = henon(&["commute", "--f", s(&m.cubic), "--h", s(&m.h)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn match_on_coprime_degrees() {
    let m = maps();
    let o = henon(&["match", "--f", s(&m.cubic), "--h", s(&m.h), "--max", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no (m,n) with d_F^m = d_H^n"));
}

#[test]
fn match_finds_square() {
    let m = maps();
    let o = henon(&["match", "--f", s(&m.h2), "--h", s(&m.h)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("m0: 1") && out.contains("n0: 2"), "{out}");
}

#[test]
fn green_grid_output() {
    let m = maps();
    let prefix = m.root.join("g");
    let o = henon(&[
        "green", "--map", s(&m.h), "--slice", "x=0", "--window", "-3,3,-3,3", "--res", "4", "--out", s(&prefix),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "i,j,c1_re,c1_im,c2_re,c2_im,value,error,class");
    assert_eq!(lines.len(), 17);
    assert!(lines.iter().any(|l| l.starts_with("3,3,0,0,3,3,") && l.ends_with(",escaping")));
    let pgm = std::fs::read(prefix.with_extension("pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n4 4\n255\n"));
    assert_eq!(pgm.len(), b"P5\n4 4\n255\n".len() + 16);
}

#[test]
fn green_is_deterministic_across_threads() {
    let m = maps();
    let run = |t: &str| henon(&["green", "--map", s(&m.h), "--res", "24", "--threads", t]).stdout;
    assert_eq!(run("1"), run("8"));
    assert_eq!(run("3"), run("3"));
}

#[test]
fn bounded_window_renders_black() {
    let m = maps();
    let prefix = m.root.join("b");
    let o = henon(&["green", "--map", s(&m.h), "--slice", "real", "--window", "-0.01,0.01,-0.01,0.01", "--res", "2", "--out", s(&prefix)]);
    assert_eq!(o.status.code(), Some(0));
    let pgm = std::fs::read(prefix.with_extension("pgm")).unwrap();
    assert_eq!(&pgm[pgm.len() - 4..], &[0, 0, 0, 0]);
}

#[test]
fn mask_with_large_threshold_is_all_inside() {
    let m = maps();
    let o = henon(&["mask", "--map", s(&m.h), "--window", "-1,1,-1,1", "--res", "16", "--c", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let body = &o.stdout[b"P5\n16 16\n255\n".len()..];
    assert_eq!(body.len(), 256);
    assert!(body.iter().all(|&b| b == 255));
    let bad = henon(&["mask", "--map", s(&m.h), "--c", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bottcher_command() {
    let m = maps();
    let o = henon(&["bottcher", "--map", s(&m.h), "--x", "0", "--y", "10", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("phi: 9.99749780976"), "{}", stdout(&o));
    let outside = henon(&["bottcher", "--map", s(&m.h), "--x", "0", "--y", "1"]);
    assert_eq!(outside.status.code(), Some(2));
}

#[test]
fn onedim_command() {
    let o = henon(&["onedim", "--p", "z^2 - 2", "--q", "z^3 - 3*z", "--z", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sigma: z -> 1*z + 0"), "{}", stdout(&o));
    let none = henon(&["onedim", "--p", "z^2", "--q", "z^2 + 1"]);
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn witness_command() {
    let m = maps();
    let o = henon(&["witness", "--map", s(&m.h)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("theta:"));
    let bad = henon(&["witness", "--map", s(&m.h), "--theta", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn invalid_inputs_exit_two() {
    let m = maps();
    let bad_factor = write_map(&m.root, "bad.json", &[("[0, 0]", "[1, 0]", "y^2")]);
    let o = henon(&["witness", "--map", s(&bad_factor)]);
    assert_eq!(o.status.code(), Some(2));

    let broken = m.root.join("broken.json");
    std::fs::write(&broken, "{\n  \"factors\": [ { \"b\": [1, 0] \"delta\": [1, 0], \"p\": \"y^2\" } ]\n}").unwrap();
    let o = henon(&["green", "--map", s(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column"));

    let bad_poly = write_map(&m.root, "poly.json", &[("[1, 0]", "[1, 0]", "y^-2")]);
    let o = henon(&["green", "--map", s(&bad_poly)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("column"));

    let o = henon(&["green", "--map", s(&m.root.join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn iterate_cap_exits_three() {
    let m = maps();
    let f = write_map(&m.root, "f9.json", &[("[1, 0]", "[1, 0]", "y^9 + y^8 + y^7 + y^5 + y^3 + y")]);
    let h = write_map(&m.root, "h9.json", &[("[1, 0]", "[1, 0]", "y^9 + 2*y^4 + y^2 + 1")]);
    let o = henon(&["match", "--f", s(&f), "--h", s(&h), "--max", "9", "--term-cap", "200"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("iterate pair"));
}
