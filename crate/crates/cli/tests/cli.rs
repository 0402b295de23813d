use std::path::Path;
use std::process::{Command, Output};

fn weylwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylwalk"))
        .args(args)
        .env_remove("WEYLWALK_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().skip(1).collect()
}

fn read_state(path: &Path) -> serde_like::State {
    serde_like::parse(&std::fs::read_to_string(path).unwrap())
}

/// Minimal reader for the state files, independent of the library.
mod serde_like {
    pub struct State {
        pub width: usize,
        pub height: usize,
        pub offset: [i64; 2],
        pub psi: Vec<[f64; 4]>,
    }

    fn field<'a>(text: &'a str, key: &str) -> &'a str {
        let start = text.find(&format!("\"{key}\":")).unwrap() + key.len() + 3;
        &text[start..]
    }

    fn numbers(s: &str) -> Vec<f64> {
        s.split(|c: char| !(c.is_ascii_digit() || "-+.eE".contains(c)))
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().unwrap())
            .collect()
    }

    pub fn parse(text: &str) -> State {
        let int = |k: &str| numbers(field(text, k).split([',', '}']).next().unwrap())[0];
        let offset = field(text, "offset");
        let offset = numbers(&offset[..offset.find(']').unwrap()]);
        let psi = field(text, "psi");
        let psi = numbers(&psi[..psi.find("]]").unwrap()]);
        State {
            width: int("width") as usize,
            height: int("height") as usize,
            offset: [offset[0] as i64, offset[1] as i64],
            psi: psi.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect(),
        }
    }
}

#[test]
fn propagate_t1_lists_the_four_directions() {
    let out = weylwalk(&["propagate", "--t", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("t,dx,dy,c00,c01,c10,c11"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    assert!(rows.contains(&"1,1,0,1,0,0,0"));
    assert!(rows.contains(&"1,0,1,0,0,1,0"));
    assert!(rows.contains(&"1,-1,0,0,0,0,1"));
    assert!(rows.contains(&"1,0,-1,0,1,0,0"));
}

#[test]
fn propagate_t2_return_row() {
    let out = weylwalk(&["propagate", "--t", "2", "--format", "csv"]);
    assert!(out.status.success());
    assert!(data_rows(&stdout(&out)).contains(&"2,0,0,-1,-1,-1,-1"));
}

#[test]
fn propagate_t3_row_count() {
    let out = weylwalk(&["propagate", "--t", "3"]);
    assert_eq!(data_rows(&stdout(&out)).len(), 16);
}

#[test]
fn propagate_numeric_columns() {
    let out = weylwalk(&["propagate", "--t", "2", "--numeric", "--nu-angle", "0.5"]);
    let text = stdout(&out);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 15);
    let origin = data_rows(&text)
        .into_iter()
        .find(|r| r.starts_with("2,0,0,"))
        .unwrap();
    let v: Vec<f64> = origin
        .split(',')
        .skip(7)
        .map(|x| x.parse().unwrap())
        .collect();
    // kernel (0,0) at t=2 is -I/2
    let expected = [-0.5, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5, 0.0];
    for (a, b) in v.iter().zip(expected) {
        assert!((a - b).abs() < 1e-15, "{origin}");
    }
}

#[test]
fn propagate_json_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    let out = weylwalk(&[
        "propagate",
        "--t",
        "2",
        "--format",
        "json",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"-1\""));
}

#[test]
fn propagate_unwritable_path_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("k.csv");
    let out = weylwalk(&["propagate", "--t", "2", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn evolve_zero_steps_returns_input() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    let out = weylwalk(&[
        "evolve",
        "--init",
        "delta",
        "--steps",
        "0",
        "-o",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for method in ["direct", "kernel", "fft"] {
        let out = weylwalk(&[
            "evolve",
            "--input",
            first.to_str().unwrap(),
            "--steps",
            "0",
            "--method",
            method,
            "-o",
            second.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert_eq!(
            std::fs::read_to_string(&first).unwrap(),
            std::fs::read_to_string(&second).unwrap(),
            "{method}"
        );
    }
    let s = read_state(&first);
    assert_eq!((s.width, s.height, s.offset), (3, 3, [-1, -1]));
    assert_eq!(s.psi[4], [1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn evolve_two_kernel_steps_returns_minus_half() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let out = weylwalk(&[
        "evolve",
        "--init",
        "delta",
        "--steps",
        "2",
        "--method",
        "kernel",
        "--nu-angle",
        "0.3",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let s = read_state(&path);
    let origin = ((0 - s.offset[1]) as usize) * s.width + (0 - s.offset[0]) as usize;
    assert_eq!(s.psi[origin], [-0.5, 0.0, 0.0, 0.0]);
}

#[test]
fn evolve_fft_64_steps_is_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let out = weylwalk(&[
        "evolve",
        "--init",
        "delta",
        "--steps",
        "64",
        "--method",
        "fft",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "norm 1.000000000");
}

#[test]
fn evolve_methods_agree_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut states = Vec::new();
    for method in ["direct", "kernel", "fft"] {
        let path = dir.path().join(format!("{method}.json"));
        let out = weylwalk(&[
            "evolve",
            "--init",
            "delta",
            "--steps",
            "9",
            "--method",
            method,
            "--nu-angle",
            "-1.1",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{method}");
        states.push(read_state(&path));
    }
    for s in &states[1..] {
        assert_eq!(s.psi.len(), states[0].psi.len());
        for (a, b) in s.psi.iter().zip(&states[0].psi) {
            for i in 0..4 {
                assert!((a[i] - b[i]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn evolve_heatmap_is_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("s.json");
    let pgm = dir.path().join("p.pgm");
    let out = weylwalk(&[
        "evolve",
        "--init",
        "delta",
        "--steps",
        "3",
        "-o",
        state.to_str().unwrap(),
        "--heatmap",
        pgm.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let bytes = std::fs::read(&pgm).unwrap();
    let header = b"P5\n9 9\n65535\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 2 * 81);
}

#[test]
fn evolve_window_too_small_exits_3() {
    for method in ["direct", "kernel"] {
        let out = weylwalk(&[
            "evolve", "--init", "delta", "--steps", "10", "--width", "9", "--height", "9",
            "--method", method,
        ]);
        assert_eq!(out.status.code(), Some(3), "{method}");
    }
}

#[test]
fn evolve_needs_a_source() {
    let out = weylwalk(&["evolve", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_t8_passes() {
    let out = weylwalk(&["validate", "--t-max", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().count() >= 9);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn validate_t1_passes() {
    let out = weylwalk(&["validate", "--t-max", "1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn validate_reports_cap_refusal() {
    let out = weylwalk(&["validate", "--t-max", "6", "--cap", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL coefficients"));
}

#[test]
fn dispersion_rows_satisfy_trace_identity() {
    let out = weylwalk(&["dispersion", "--grid", "21"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("kx,ky,omega"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 441);
    let mut saw_origin = false;
    for row in rows {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        if v[0] == 0.0 && v[1] == 0.0 {
            assert_eq!(v[2], 0.0);
            saw_origin = true;
        }
        assert!(
            (2.0 * v[2].cos() - v[0].cos() - v[1].cos()).abs() < 1e-12,
            "{row}"
        );
    }
    assert!(saw_origin);
}

#[test]
fn bench_checksums_agree() {
    let out = weylwalk(&["--threads", "2", "bench", "--window", "16", "--t", "1,5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("method,t,window,seconds,checksum")
    );
    let rows: Vec<Vec<&str>> = data_rows(&text)
        .iter()
        .map(|r| r.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for group in rows.chunks(3) {
        let sums: Vec<f64> = group.iter().map(|r| r[4].parse().unwrap()).collect();
        assert!((sums[0] - sums[1]).abs() < 1e-9 && (sums[0] - sums[2]).abs() < 1e-9);
    }
}

#[test]
fn cache_dir_is_populated_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = [
        "--cache-dir",
        cache.to_str().unwrap(),
        "propagate",
        "--t",
        "4",
    ];
    let first = weylwalk(&args);
    assert!(cache.join("kernel-t4.csv").exists());
    let second = weylwalk(&args);
    assert_eq!(first.stdout, second.stdout);
    let from_env = Command::new(env!("CARGO_BIN_EXE_weylwalk"))
        .args(["propagate", "--t", "4"])
        .env("WEYLWALK_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert_eq!(first.stdout, from_env.stdout);
}
