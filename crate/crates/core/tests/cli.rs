//! End-to-end checks of the `ldg-study` binary.

use std::process::{Command, Output};

use shishkin_ldg::study::CSV_HEADER;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldg-study"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn csv_study_matches_table_style() {
    let out = run(&["--eps", "1e-4", "--k", "0", "--N", "8", "--N", "16", "--format", "csv", "--no-timing", "--sigma-policy", "k_plus_1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.0000E-04,8,0,1.0000,2.1412E-01,,"));
    assert!(lines[2].contains(",1.1264E-01,1.5842,"));
}

#[test]
fn empty_grid_prints_header_only() {
    let out = run(&["--eps", "1e-4", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), format!("{CSV_HEADER}\n"));
}

#[test]
fn files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("run{i}.csv"))).collect();
    for p in &paths {
        let out = run(&[
            "--example", "example2", "--k", "1", "--eps", "1e-8", "--N", "8", "--N", "16",
            "--no-timing", "--out", p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    assert_eq!(a, b);
    let table = std::fs::read_to_string(paths[0].with_extension("txt")).unwrap();
    assert!(table.contains("---"));
}

#[test]
fn dumps_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--eps", "1e-4", "--k", "1", "--N", "8", "--format", "csv", "--dump", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn invalid_configurations_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["--eps", "1e-4", "--N", "10"],
        &["--eps", "1e-4", "--N", "4"],
        &["--eps", "-1", "--N", "8"],
        &["--eps", "1e-4", "--example", "nope", "--N", "8"],
        &["--eps", "1e-4", "--N", "512"],
        &["--eps", "1e-4", "--k", "5", "--N", "8"],
        &["--eps", "1e-4", "--N", "8", "--sigma-policy", "explicit"],
        &["--eps", "1e-4", "--N", "8", "--sigma", "2"],
        &["--eps", "1e-4", "--N", "8", "--beta", "0"],
        &["--example", "example2", "--eps", "1e-4", "--N", "8", "--mode", "exact-error"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn text_format_aligns_columns() {
    let out = run(&["--eps", "1e-8", "--k", "1", "--N", "8", "--format", "text", "--no-timing"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let widths: Vec<usize> = text.lines().map(str::len).collect();
    assert_eq!(widths.len(), 2);
    assert_eq!(widths[0], widths[1]);
}
