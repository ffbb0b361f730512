use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn kemeny(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kemeny"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_graph(dir: &Path, name: &str, edges: &[(usize, usize)]) -> PathBuf {
    let path = dir.join(name);
    let text: String = edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
    fs::write(&path, text).unwrap();
    path
}

fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i, i + 1)).collect()
}

/// Column `name` of a CSV body, parsed as floats.
fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
    }
}

#[test]
fn kemeny_small_graphs() {
    let dir = TempDir::new().unwrap();
    let p3 = write_graph(dir.path(), "p3.txt", &path_edges(3));
    let k2 = write_graph(dir.path(), "k2.txt", &path_edges(2));
    for route in ["auto", "banded", "dense", "eigen"] {
        let out = stdout(&kemeny(&[
            "kemeny",
            "--input",
            p3.to_str().unwrap(),
            "--route",
            route,
        ]));
        assert_close(&column(&out, "kappa"), &[1.5], 1e-12);
    }
    let out = stdout(&kemeny(&["kemeny", "--input", k2.to_str().unwrap()]));
    assert_close(&column(&out, "kappa"), &[0.5], 1e-12);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let split = write_graph(dir.path(), "split.txt", &[(1, 2), (3, 4)]);
    let out = kemeny(&["kemeny", "--input", split.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let missing = dir.path().join("absent.txt");
    assert_eq!(
        kemeny(&["kemeny", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 2 -1\n").unwrap();
    assert_eq!(
        kemeny(&["kemeny", "--input", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    assert_eq!(kemeny(&["kemeny"]).status.code(), Some(1));
    assert_eq!(kemeny(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(kemeny(&["--help"]).status.code(), Some(0));
}

#[test]
fn edges_on_a_path() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(dir.path(), "p6.txt", &path_edges(6));
    let input = g.to_str().unwrap();
    let out = stdout(&kemeny(&["edges", "--input", input]));
    assert_close(&column(&out, "mu"), &[0.9, 2.1, 2.5, 2.1, 0.9], 1e-12);
    assert!(out.lines().skip(1).all(|l| l.contains(",inf,true")));

    let out = stdout(&kemeny(&[
        "edges",
        "--input",
        input,
        "--normalize",
        "linear",
    ]));
    assert_close(
        &column(&out, "mu_display"),
        &[0.0, 0.75, 1.0, 0.75, 0.0],
        1e-12,
    );

    let out = stdout(&kemeny(&["edges", "--input", input, "--r", "0.001"]));
    let mu = column(&out, "mu");
    let mu_r = column(&out, "mu_r[0.001]");
    for (a, b) in mu_r.iter().zip(&mu) {
        assert!(a < b && (b - a) < 0.01 * b, "{a} {b}");
    }
}

#[test]
fn star_histogram_has_one_bin() {
    let dir = TempDir::new().unwrap();
    let edges: Vec<_> = (2..=9).map(|i| (1, i)).collect();
    let g = write_graph(dir.path(), "star.txt", &edges);
    let hist = dir.path().join("hist.csv");
    stdout(&kemeny(&[
        "edges",
        "--input",
        g.to_str().unwrap(),
        "--normalize",
        "linear",
        "--histogram",
        hist.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&hist).unwrap();
    let counts: Vec<f64> = column(&text, "count");
    assert_eq!(counts.len(), 50);
    assert_eq!(counts.iter().filter(|&&c| c > 0.0).count(), 1);
    assert_eq!(counts.iter().sum::<f64>(), 8.0);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let mut edges = Vec::new();
    let side = 12;
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c + 1;
            if c + 1 < side {
                edges.push((v, v + 1));
            }
            if r + 1 < side {
                edges.push((v, v + side));
            }
        }
    }
    let g = write_graph(dir.path(), "grid.txt", &edges);
    let input = g.to_str().unwrap();
    for cmd in ["edges", "pairs"] {
        let one = kemeny(&[cmd, "--input", input, "--jobs", "1"]);
        let many = kemeny(&[cmd, "--input", input, "--jobs", "8"]);
        assert_eq!(stdout(&one), stdout(&many), "{cmd}");
    }
}

#[test]
fn linkpred_all_measures() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(
        dir.path(),
        "g.txt",
        &[
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 1),
            (1, 4),
            (2, 5),
        ],
    );
    let out_dir = dir.path().join("lp");
    stdout(&kemeny(&[
        "linkpred",
        "--input",
        g.to_str().unwrap(),
        "--measure",
        "all",
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    let measures = [
        "kemeny-derivative",
        "jaccard",
        "adamic-adar",
        "resource-allocation",
        "common-neighbour-centrality",
    ];
    for m in measures {
        let text = fs::read_to_string(out_dir.join(format!("{m}.csv"))).unwrap();
        assert_eq!(column(&text, m).len(), 7, "{m}");
    }
    let corr = fs::read_to_string(out_dir.join("correlation.csv")).unwrap();
    let rows: Vec<Vec<f64>> = corr
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        assert!((row[i] - 1.0).abs() < 1e-12);
        for (j, x) in row.iter().enumerate() {
            assert_eq!(*x, rows[j][i]);
        }
    }
    // Low mu_bar marks likely links, so it runs against the baselines.
    assert!(rows[0][1..].iter().all(|&r| r < 0.0));
}

#[test]
fn linkpred_top_k() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(dir.path(), "p5.txt", &path_edges(5));
    let out = stdout(&kemeny(&[
        "linkpred",
        "--input",
        g.to_str().unwrap(),
        "--top",
        "2",
    ]));
    let scores = column(&out, "kemeny-derivative");
    assert_eq!(scores.len(), 2);
    assert!(scores[0] <= scores[1]);
}

#[test]
fn sensitivity_curve_csv() {
    let out = stdout(&kemeny(&[
        "sensitivity",
        "--family",
        "star,cycle",
        "--n",
        "10:20:10",
    ]));
    assert!(out.starts_with("family,n,zeta,zeta_pair_mean\n"));
    let zeta = column(&out, "zeta");
    assert_close(&zeta, &[0.805, 0.90125, 3.0525, 22.77625], 1e-9);
    let pair_mean = column(&out, "zeta_pair_mean");
    for (z, m) in zeta.iter().zip(&pair_mean) {
        assert!((2.0 * z - m).abs() < 1e-9 * m);
    }
}

#[test]
fn onepath_check_passes() {
    let out = kemeny(&["onepath-check", "--n", "40"]);
    let text = stdout(&out);
    assert!(column(&text, "max_rel_deviation")[0] < 1e-8);
}

#[test]
fn json_output() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(dir.path(), "p3.txt", &path_edges(3));
    let out = stdout(&kemeny(&[
        "solve",
        "--input",
        g.to_str().unwrap(),
        "--p",
        "1",
        "--q",
        "3",
        "--output-format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let x: Vec<f64> = v["x"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    // d^T x = 0 with d = (1, 2, 1).
    assert!((x[0] + 2.0 * x[1] + x[2]).abs() < 1e-12);
    assert_eq!(v["p"], 1);
}
