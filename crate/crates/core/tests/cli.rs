use std::process::Command;

fn ridemodel(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ridemodel")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = ridemodel(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn column(table: &str, name: &str) -> Vec<f64> {
    let mut lines = table.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn critical_fleets() {
    assert_eq!(ok(&["mc", "--policy", "taxi", "--pi", "100"]), "92.92\n");
    assert_eq!(ok(&["mc", "--policy", "shared_b", "--pi", "100"]), "81.54\n");
    assert_eq!(ok(&["mc", "--policy", "dar", "--c", "3", "--pi", "100"]), "36.37 (infimum, not attained)\n");
}

#[test]
fn curve_csv_and_json_agree() {
    let csv = ok(&["curve", "--policy", "shared_a", "--pi", "100", "--points", "50"]);
    let n = column(&csv, "n");
    assert_eq!(n.len(), 50);
    assert!(n.windows(2).all(|w| w[0] < w[1]));

    let json: serde_json::Value =
        serde_json::from_str(&ok(&["curve", "--policy", "shared_a", "--pi", "100", "--points", "50", "--format", "json"])).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 50);
    for (row, f) in rows.iter().zip(column(&csv, "f_t")) {
        assert_eq!(row["f_t"].as_f64().unwrap(), f);
    }
}

#[test]
fn pareto_frontier_then_niches() {
    let out = ok(&["pareto", "--pi", "100"]);
    let (frontier, niches) = out.split_once("\n\n").unwrap();
    let m = column(frontier, "m");
    let f = column(frontier, "f");
    assert!(m.len() > 900 && m.len() <= 1000);
    assert!(m.windows(2).all(|w| w[0] < w[1]));
    assert!(f.windows(2).all(|w| w[1] < w[0]));
    assert!(!frontier.contains(",auto"));

    let transit = niches.lines().find(|l| l.starts_with("transit,")).unwrap();
    let width: f64 = transit.rsplit(',').next().unwrap().parse().unwrap();
    assert!((width - 43.93).abs() < 0.01, "{width}");
}

#[test]
fn figure_writes_svg() {
    let path = std::env::temp_dir().join(format!("ridemodel-fig8a-{}.svg", std::process::id()));
    let out = ok(&["figure", "--name", "fig8a", "--svg", path.to_str().unwrap()]);
    assert!(out.starts_with("figure,series,m,f\n"));
    let svg = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn simulate_is_reproducible_and_traces() {
    let path = std::env::temp_dir().join(format!("ridemodel-trace-{}.csv", std::process::id()));
    let args = ["simulate", "--policy", "taxi", "--pi", "100", "--m", "150", "--reps", "2", "--warmup", "100", "--sample", "1000"];
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    assert_eq!(first.lines().count(), 3);

    let mut traced = args.to_vec();
    traced.extend(["--trace", path.to_str().unwrap()]);
    assert_eq!(ok(&traced), first);
    let trace = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let calls = column(&trace, "call");
    assert!(calls.len() >= 1100);
    assert!(calls.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn compare_reports_a_shift() {
    let out = ok(&["compare", "--policy", "taxi", "--pi", "100", "--m-list", "120,150,200", "--reps", "2", "--sample", "2000"]);
    let (rows, shift) = out.split_once("\n\n").unwrap();
    assert_eq!(rows.lines().count(), 4);
    let shift = column(shift, "shift");
    assert_eq!(shift.len(), 1);
    assert!(shift[0] > 0.0 && shift[0] <= 120.0 - 92.93);
}

#[test]
fn exit_codes() {
    assert_eq!(ridemodel(&["--help"]).0, 0);
    let (code, _, err) = ridemodel(&["curve", "--pi", "100"]);
    assert_eq!(code, 2);
    assert!(err.contains("--policy"));
    assert_eq!(ridemodel(&["curve", "--policy", "bus", "--pi", "100"]).0, 2);

    let (code, out, err) = ridemodel(&["mc", "--policy", "taxi", "--pi=-5"]);
    assert_eq!(code, 1);
    assert!(out.is_empty() && err.starts_with("error: "));
    assert_eq!(ridemodel(&["mc", "--policy", "shared_a", "--c", "3", "--pi", "100"]).0, 1);
}
