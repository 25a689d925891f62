use std::process::{Command, Output};

use serde_json::Value;

fn ratsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratsurf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = ratsurf(&all);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn info_examples() {
    let (code, v) = json(&["info", "[7;2^7,1^10]"]);
    assert_eq!(code, 0);
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["command"]["name"], "info");
    let r = &v["payload"][0];
    assert_eq!((r["degree"].as_i64(), r["genus"].as_i64()), (Some(11), Some(8)));
    assert_eq!((r["k2"].as_i64(), r["chi"].as_i64()), (Some(-8), Some(5)));

    let (_, v) = json(&["info", "[(4,5-2e);2^4,1^13]", "--e", "1"]);
    let r = &v["payload"][0];
    assert_eq!(
        (r["degree"].as_i64(), r["genus"].as_i64(), r["k2"].as_i64()),
        (Some(11), Some(8), Some(-9))
    );

    let (_, v) = json(&["info", "[1]"]);
    assert_eq!(
        (v["payload"][0]["degree"].as_i64(), v["payload"][0]["genus"].as_i64()),
        (Some(1), Some(0))
    );
}

#[test]
fn e_range_sweeps() {
    let (code, v) = json(&["info", "[(4,6-2e);2^7,1^9]", "--e-range", "0..5"]);
    assert_eq!(code, 0);
    let rows = v["payload"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["degree"] == 11 && r["genus"] == 8));
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["info", "[7;2^7"],
        vec!["info", "[(4,5-2e);2^4,1^13]"],
        vec!["info", "[7;2^7,1^10]", "--e", "1"],
        vec!["info", "[(3,4-3/2e);2^4,1^8]", "--e", "1"],
        vec!["info", "[1]", "--e", "1", "--e-range", "0..2"],
        vec!["frobnicate"],
        vec!["verify", "nothing"],
        vec!["eliminate", "--corpus", "/nonexistent/part2.jsonl"],
    ] {
        let o = ratsurf(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn syntax_errors_name_the_column() {
    let o = ratsurf(&["info", "[7;2^7"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("column 7"));
}

#[test]
fn help_exits_0() {
    assert_eq!(ratsurf(&["--help"]).status.code(), Some(0));
}

#[test]
fn sequence_of_a_main_type() {
    let (code, v) = json(&["sequence", "[7;2^7,1^10]"]);
    assert_eq!(code, 0);
    let s = &v["payload"][0];
    assert_eq!(s["k_squares"], serde_json::json!([-8, 2, 9]));
    assert_eq!(s["stop"], "terminal");
}

#[test]
fn adjoin_table() {
    let o = ratsurf(&["adjoin", "[7;2^7,1^10]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[4;1^7]"));
}

#[test]
fn classify_ends_with_the_survivors() {
    let o = ratsurf(&["classify", "--degree", "11", "--genus", "8"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    let tail = &text[text.rfind("Survivors").unwrap()..];
    for t in [
        "[7;2^7,1^10]",
        "[9;3^6,2^2,1^8]",
        "[(4,4-2e);2^1,1^17]",
        "[(4,5-2e);2^4,1^13]",
        "[(4,6-2e);2^7,1^9]",
    ] {
        assert!(tail.contains(t), "{t}");
    }
    assert!(tail.contains("e <= 5 (computed 0..4)"));
    assert_eq!(tail.lines().count(), 7);

    let allowed = ratsurf(&["classify", "--degree", "11", "--genus", "8", "--allow-flags"]);
    assert_eq!(allowed.status.code(), Some(0));
    assert_eq!(allowed.stdout, o.stdout);
}

#[test]
fn classify_json_survivors() {
    let (code, v) = json(&["classify", "--degree", "11", "--genus", "8"]);
    assert_eq!(code, 2);
    let p = &v["payload"];
    let survivors: Vec<&str> = p["survivors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["candidate"]["type"].as_str().unwrap())
        .collect();
    assert_eq!(
        survivors,
        [
            "[7;2^7,1^10]",
            "[9;3^6,2^2,1^8]",
            "[(4,4-2e);2^1,1^17]",
            "[(4,5-2e);2^4,1^13]",
            "[(4,6-2e);2^7,1^9]"
        ]
    );
    let bounds: Vec<Value> = p["survivors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["main_type"]["e_max"].clone())
        .collect();
    assert_eq!(bounds, [Value::Null, Value::Null, 2.into(), 3.into(), 5.into()]);
    // Every eliminated candidate names what disposed of it.
    for e in p["eliminated"].as_array().unwrap() {
        for r in e["resolutions"].as_array().unwrap() {
            assert!(r["disposal"]["by"].is_string(), "{e}");
        }
    }
    assert_eq!(p["flagged"].as_array().unwrap().len(), 6);
}

#[test]
fn classify_csv() {
    let o = ratsurf(&[
        "classify",
        "--degree",
        "11",
        "--genus",
        "8",
        "--format",
        "csv",
        "--allow-flags",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("block,type,"));
    assert_eq!(text.lines().filter(|l| l.starts_with("survivor,")).count(), 5);
}

#[test]
fn eliminate_flags_three_rows() {
    let (code, v) = json(&["eliminate"]);
    assert_eq!(code, 2);
    let s = &v["payload"]["summary"];
    assert_eq!((s["rows"].as_u64(), s["eliminated"].as_u64()), (Some(33), Some(30)));
    assert_eq!((s["flagged"].as_u64(), s["survivors"].as_u64()), (Some(3), Some(0)));
    let rows = v["payload"]["rows"].as_array().unwrap();
    let first = &rows[1]["outcomes"][0]["derived"];
    assert_eq!(
        first,
        &serde_json::json!({"chi_a": 0, "pa_a": 1, "ha": 2, "chi_b": 3, "pa_b": 5, "hb": 9})
    );
}

#[test]
fn eliminate_reads_a_corpus_file() {
    let dir = std::env::temp_dir().join(format!("ratsurf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rows.jsonl");
    std::fs::write(
        &path,
        r#"{"H":"[24;8^5,7^5]","A":"[8;3^5,2^5]","subscripts":[],"expected":[0,1,2,3,5,9]}"#.to_string() + "\n",
    )
    .unwrap();
    let o = ratsurf(&["eliminate", "--corpus", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("low_genus,eliminated"));

    std::fs::write(&path, "{\"H\":\"[24;8^5,7^5]\"}\n").unwrap();
    assert_eq!(
        ratsurf(&["eliminate", "--corpus", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_exit_codes() {
    assert_eq!(ratsurf(&["verify", "lifting-1"]).status.code(), Some(0));
    assert_eq!(ratsurf(&["verify", "lifting-2"]).status.code(), Some(0));
    let o = ratsurf(&["verify", "construction"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL p_a of the O5 class"));
    assert_eq!(ratsurf(&["verify", "all", "--allow-flags"]).status.code(), Some(0));
}

#[test]
fn table_output_is_stable() {
    let a = ratsurf(&["eliminate"]);
    let b = ratsurf(&["eliminate"]);
    assert_eq!(a.stdout, b.stdout);
}
