use std::path::Path;

use abc_cli::{main_with_args, EXIT_INVALID, EXIT_OK, EXIT_RESOURCE};
use tempfile::TempDir;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("abc").chain(args.iter().copied()))
}

/// Runs with `--output` pointing into `dir` and returns (exit code, output).
fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let path = dir.join(name);
    let p = path.to_str().unwrap();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--output", p]);
    let code = run(&full);
    (code, std::fs::read_to_string(&path).unwrap_or_default())
}

#[test]
fn search_json_single_record() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run_to(dir.path(), "s.json", &["search", "--n-max", "10", "--epsilon", "1/10", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["a"], 1);
    assert_eq!(rows[0]["b"], 8);
    assert_eq!(rows[0]["c"], 9);
    assert_eq!(rows[0]["rad_abc"], 6);
    assert_eq!(rows[0]["witness_pair"], "ab");
    assert_eq!(rows[0]["witness_radical"], 2);
}

#[test]
fn search_csv_columns() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run_to(dir.path(), "s.csv", &["search", "--n-max", "100", "--epsilon", "1/10"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("a,b,c,rad_abc,quality,witness_pair,witness_radical"));
    assert!(out.lines().any(|l| l.starts_with("1,80,81,30,") && l.ends_with(",ac,3")));
}

#[test]
fn count_lambda_pinned() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run_to(dir.path(), "c.csv", &["count-lambda", "--n-max", "100", "--lambda", "1/2", "--cross-check"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "N,lambda,cutoff,count\n100,1/2,10,30\n");
}

#[test]
fn invalid_arguments_exit_2() {
    assert_eq!(run(&["search", "--n-max", "10", "--epsilon", "5/4"]), EXIT_INVALID);
    assert_eq!(run(&["search", "--n-max", "10", "--epsilon", "0.1"]), EXIT_INVALID);
    assert_eq!(run(&["count-lambda", "--n-max", "10", "--lambda", "3/2"]), EXIT_INVALID);
    assert_eq!(run(&["radical-class", "--r", "4", "--n-max", "100"]), EXIT_INVALID);
    assert_eq!(run(&["search", "--n-max", "10", "--epsilon", "1/10", "--threads", "0"]), EXIT_INVALID);
    assert_eq!(run(&["search", "--n-max", "1", "--epsilon", "1/10"]), EXIT_INVALID);
    assert_eq!(run(&["bogus"]), EXIT_INVALID);
}

#[test]
fn resource_errors_exit_3() {
    assert_eq!(run(&["sieve", "--n-max", "1000", "--sieve-budget", "999"]), EXIT_RESOURCE);
    assert_eq!(run(&["search", "--n-max", "1000000000", "--epsilon", "1/10"]), EXIT_RESOURCE);
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    assert_eq!(
        run(&["search", "--n-max", "10", "--epsilon", "1/10", "--output", bad.to_str().unwrap()]),
        EXIT_RESOURCE
    );
}

#[test]
fn census_is_deterministic_across_threads() {
    let dir = TempDir::new().unwrap();
    for format in ["csv", "json", "tsv"] {
        let (c1, one) = run_to(dir.path(), "a", &["census", "--n-max", "10000", "--epsilon", "1/10", "--format", format, "--triples"]);
        let (c2, four) = run_to(
            dir.path(),
            "b",
            &["census", "--n-max", "10000", "--epsilon", "1/10", "--format", format, "--triples", "--threads", "4"],
        );
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
        assert_eq!(one, four, "format {format}");
    }
}

#[test]
fn census_csv_and_plot_data() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run_to(dir.path(), "c.csv", &["census", "--n-max", "10000", "--epsilon", "1/10"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "N,epsilon,count_canonical,count_ordered,fitted_exponent");
    assert!(lines[1].starts_with("100,1/10,4,8,"));
    assert!(lines[3].starts_with("10000,1/10,43,86,"));

    let (code, out) = run_to(dir.path(), "p.csv", &["census", "--n-max", "1000", "--grid", "100,1000", "--plot-data"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 3);
    assert!(out.starts_with("log_N,log_count\n"));
}

#[test]
fn sieve_uses_cache_file() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("rad.bin");
    let cache = cache.to_str().unwrap();
    let (code, first) = run_to(dir.path(), "a.csv", &["sieve", "--n-max", "30", "--cache", cache]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(std::fs::read(cache).unwrap().len(), 16 + 2 * 8 * 30);
    let (_, second) = run_to(dir.path(), "b.csv", &["sieve", "--n-max", "30", "--cache", cache]);
    assert_eq!(first, second);
    assert!(first.contains("\n12,6,6\n"));
}

#[test]
fn bounds_rows() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run_to(
        dir.path(),
        "b.csv",
        &["bounds", "--epsilon", "1/2", "--n-max", "1000000", "--r", "6", "--c", "100"],
    );
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("divisor-constant,1/2,,256,"));
    let rc: Vec<&str> = out.lines().find(|l| l.starts_with("radical-class")).unwrap().split(',').collect();
    assert!((rc[3].parse::<f64>().unwrap() - 3297.9).abs() < 0.05);
    assert!(out.lines().any(|l| l.starts_with("refined-threshold,1/1,100,")));
}

#[test]
fn fit_reads_grid_file() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("grid.csv");
    std::fs::write(&input, "N,count\n10,5\n100,5\n1000,5\n").unwrap();
    let (code, out) = run_to(dir.path(), "f.csv", &["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "points,fitted_exponent\n3,0\n");

    std::fs::write(&input, "N,count\n10,5\n100,0\n").unwrap();
    assert_eq!(run(&["fit", "--input", input.to_str().unwrap()]), EXIT_INVALID);
}
