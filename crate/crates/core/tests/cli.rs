use std::process::{Command, Output};

fn dfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfs"))
        .args(args)
        .env_remove("DFS_CAP_COMPOSITIONS")
        .env_remove("DFS_CAP_SECTOR_DIM")
        .output()
        .expect("binary runs")
}

fn dfs_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfs"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

#[test]
fn table_single_use_rows() {
    let out = dfs(&["table", "--n", "1", "--l-max", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n_uses,total_excitations,two_j,multiplicity,irrep_dimension");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows, vec!["1,0,0,1,1", "1,1,1,1,2", "1,2,2,1,3"]);
    assert!(!text.contains('\r'));
}

#[test]
fn table_csv_and_json_agree() {
    let csv = String::from_utf8(dfs(&["table", "--n", "4", "--l-max", "6"]).stdout).unwrap();
    let json = dfs(&["table", "--n", "4", "--l-max", "6", "--format", "json"]).stdout;
    let doc: serde_json::Value = serde_json::from_slice(&json).unwrap();
    let from_json: Vec<String> = doc["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r["n_uses"],
                r["total_excitations"],
                r["two_j"],
                r["multiplicity"].as_str().unwrap(),
                r["irrep_dimension"]
            )
        })
        .collect();
    let from_csv: Vec<String> = csv.lines().skip(1).map(str::to_string).collect();
    assert_eq!(from_csv, from_json);
}

#[test]
fn table_to_file() {
    let dir = std::env::temp_dir().join(format!("dfs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.csv");
    let out = dfs(&["table", "--n", "2", "--l-max", "3", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, String::from_utf8(dfs(&["table", "--n", "2", "--l-max", "3"]).stdout).unwrap());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_examples_pass() {
    let out = dfs(&["verify", "--n", "2", "--l", "2", "--oracle", "cg"]);
    assert_eq!(out.status.code(), Some(0));

    let out = dfs(&["verify", "--n", "3", "--l", "4", "--oracle", "character", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("residual "))
        .and_then(|r| r.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-8);

    let out = dfs(&["verify", "--n", "2", "--l", "2", "--oracle", "commutant"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("commutant dimension 10"));
}

#[test]
fn exit_codes() {
    assert_eq!(dfs(&["table", "--n", "0", "--l-max", "2"]).status.code(), Some(2));
    assert_eq!(dfs(&["grid", "--l", "2", "--two-j", "1"]).status.code(), Some(2));
    assert_eq!(dfs(&["grid", "--l", "2", "--two-j", "4"]).status.code(), Some(2));
    assert_eq!(dfs(&["verify", "--n", "2", "--l", "2", "--oracle", "nope"]).status.code(), Some(2));
    assert_eq!(dfs(&["frobnicate"]).status.code(), Some(2));

    let capped = dfs_env(&["verify", "--n", "4", "--l", "8", "--oracle", "cg"], "DFS_CAP_COMPOSITIONS", "10");
    assert_eq!(capped.status.code(), Some(3));
    assert!(String::from_utf8(capped.stderr).unwrap().contains("DFS_CAP_COMPOSITIONS"));

    let capped = dfs(&["verify", "--n", "3", "--l", "4", "--oracle", "commutant"]);
    assert_eq!(capped.status.code(), Some(3));
    let capped = dfs_env(&["verify", "--n", "3", "--l", "4", "--oracle", "character"], "DFS_CAP_SECTOR_DIM", "20");
    assert_eq!(capped.status.code(), Some(3));

    let bad_env = dfs_env(&["verify", "--n", "2", "--l", "2", "--oracle", "cg"], "DFS_CAP_SECTOR_DIM", "lots");
    assert_eq!(bad_env.status.code(), Some(2));
}
