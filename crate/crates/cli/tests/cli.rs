use std::path::PathBuf;
use std::process::{Command, Output};

fn ampshare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ampshare"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn last_line(text: &str) -> &str {
    text.lines().last().unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ampshare-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn rate_schemes_on_small_instances() {
    let out = stdout(&ampshare(&["rate", "--link", "2,2,4,4"]));
    assert_eq!(last_line(&out), "strong,0,0,2.80735");
    assert!(out.starts_with("# ampshare rate\n# resolved-config\n"));
    assert!(out.contains("\nmode,p1p,p2p,sum_rate\n"));

    let out = stdout(&ampshare(&["rate", "--link", "1,1,1,1", "--scheme", "tin"]));
    assert!(last_line(&out).ends_with(",1.16993"));

    let out = stdout(&ampshare(&[
        "rate",
        "--link",
        "3,3,7,9",
        "--scheme",
        "orthogonal",
    ]));
    assert!(last_line(&out).ends_with(",,,2"));

    let out = stdout(&ampshare(&[
        "rate", "--gains", "2,4,4,2", "--scheme", "oracle",
    ]));
    assert_eq!(last_line(&out), "strong,0,0,2.80735");
}

#[test]
fn rate_from_layout_file() {
    let layout = scratch(
        "pair.txt",
        "# one small cell\nmue 150 0\nsap 0 200\nsue 20 210\n",
    );
    let out = stdout(&ampshare(&["rate", "--layout", layout.to_str().unwrap()]));
    let row = last_line(&out);
    assert_eq!(row.split(',').count(), 4);
}

#[test]
fn sweep_csv_shape() {
    let out = stdout(&ampshare(&["sweep", "--steps", "20"]));
    assert!(out.contains("# direction = uplink\n"));
    assert!(out.contains("# steps = 20\n"));
    let rows: Vec<_> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "d,mode,r_hk,r_etw,r_tin,r_orth");
    assert_eq!(rows.len(), 21);
    assert!(rows[1].starts_with("35,"));
    assert!(rows[20].starts_with("500,"));
}

#[test]
fn mode_map_marks_invalid_cells() {
    let out = stdout(&ampshare(&[
        "mode-map",
        "--resolution",
        "11",
        "--direction",
        "uplink",
    ]));
    let rows: Vec<_> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,y,mode");
    assert_eq!(rows.len(), 1 + 121);
    // corner of the bounding square lies outside the cell
    assert_eq!(rows[1], "-500,-500,invalid");
    assert!(out.contains("# direction = uplink\n"));
}

#[test]
fn kcell_is_deterministic_across_workers() {
    let base = ["kcell", "--kmax", "4", "--trials", "20", "--seed", "9"];
    let one = stdout(&ampshare(&[&base[..], &["--workers", "1"]].concat()));
    let four = stdout(&ampshare(&[&base[..], &["--workers", "4"]].concat()));
    let again = stdout(&ampshare(&base));
    assert_eq!(one, four);
    assert_eq!(one, again);
    assert!(one.contains("\nK,r_ass_mean,r_orth_mean,r_tin_mean\n"));
    assert!(one.contains("# seed = 9\n"));
}

#[test]
fn config_file_and_flag_precedence() {
    let cfg = scratch(
        "exp.cfg",
        "# overrides\nsteps = 7\nseed = 3\nedge_snr_db = 0\n",
    );
    let out = stdout(&ampshare(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "5",
    ]));
    assert!(out.contains("# steps = 5\n"));
    assert!(out.contains("# seed = 3\n"));
    assert!(out.contains("# edge_snr_db = 0\n"));
}

#[test]
fn writes_to_out_file() {
    let path = scratch("placeholder", "").with_file_name("sweep.csv");
    let out = ampshare(&["sweep", "--steps", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("# ampshare sweep\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(ampshare(&["sweep", "--steps", "1"]).status.code(), Some(2));
    assert_eq!(ampshare(&["rate"]).status.code(), Some(2));
    assert_eq!(
        ampshare(&["rate", "--gains", "1,2,3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ampshare(&["rate", "--link", "1,1,-1,1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ampshare(&["kcell", "--direction", "sideways"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ampshare(&["frobnicate"]).status.code(), Some(2));
    let bad = scratch("bad.cfg", "no_such_key = 1\n");
    assert_eq!(
        ampshare(&["sweep", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    // more small cells than placement grid intersections
    let out = ampshare(&["kcell", "--kmax", "100", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid intersections"));
}
