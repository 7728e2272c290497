use multibump::pipeline::run::{assemble_stage, reduce_stage};
use multibump::pipeline::sweep::sweep_stage;
use multibump::pipeline::{parse_config, run_pipeline, RunConfig};
use multibump::Error;
use std::collections::BTreeMap;
use std::path::Path;

fn coarse(extra: &str) -> RunConfig {
    parse_config(&format!("[discretization]\nh = 0.1\n\n[sweep]\nr = [20, 30, 40]\n{extra}")).unwrap()
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (k, v) in read_dir(&path) {
                files.insert(format!("{}/{k}", path.file_name().unwrap().to_string_lossy()), v);
            }
        } else {
            files.insert(path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap());
        }
    }
    files
}

fn field_of(err: Error) -> (usize, String) {
    match err {
        Error::Config { line, field, .. } => (line, field),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn reduce_runs_are_byte_identical() {
    let cfg = coarse("");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    reduce_stage(&cfg, a.path()).unwrap();
    reduce_stage(&cfg, b.path()).unwrap();
    let (fa, fb) = (read_dir(a.path()), read_dir(b.path()));
    assert_eq!(
        fa.keys().cloned().collect::<Vec<_>>(),
        ["chain.csv", "energy_report.csv", "phi.csv", "reduction.csv", "v_u.csv"]
    );
    assert!(fa == fb);
}

#[test]
fn energy_report_is_well_formed_csv() {
    let cfg = coarse("");
    let dir = tempfile::tempdir().unwrap();
    let rep = assemble_stage(&cfg, dir.path()).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("energy_report.csv")).unwrap();
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers, ["R", "n", "E_n", "J_phi", "G_R", "remainder", "grad_norm"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let e_n: f64 = rows[0][2].parse().unwrap();
    assert!((e_n - rep.e_n).abs() <= 1e-8 * rep.e_n.abs());
    // two bumps on opposite sides of a circle barely interact
    assert!((rep.j_phi.value - rep.e_n).abs() < 1e-3 * rep.e_n);
}

#[test]
fn segment_pipeline_keeps_alternating_signs() {
    let cfg = coarse("\n[curve]\nkind = \"segment\"\nstart = [0, 0]\nend = [1, 0]\n\n[chain]\nn = 3\n");
    let dir = tempfile::tempdir().unwrap();
    let s = run_pipeline(&cfg, dir.path()).unwrap();
    assert_eq!(s.anchor_values.len(), 3);
    for (i, v) in s.anchor_values.iter().enumerate() {
        assert!(if i % 2 == 0 { *v > 0.0 } else { *v < 0.0 }, "anchor {i}: {v}");
    }
    let t = s.minimized.chain.params();
    assert!(t.windows(2).all(|w| w[0] < w[1]));
    assert!(s.minimized.admissibility.admissible);
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 2);
    for name in ["profile/profile_plus.csv", "profile/profile_minus.meta", "limit_report.csv", "v_u.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
}

#[test]
fn odd_chain_on_closed_curve_is_a_config_error() {
    let (line, field) = field_of(parse_config("[chain]\nn = 3\n").unwrap_err());
    assert_eq!((line, field.as_str()), (2, "chain.n"));
}

#[test]
fn non_coercive_lambda_is_a_config_error() {
    let err = parse_config("seed = 4\n\n[physics]\nlambda = -2.5\n").unwrap_err();
    assert!(err.is_config());
    let (line, field) = field_of(err);
    assert_eq!((line, field.as_str()), (4, "physics.lambda"));
}

#[test]
fn sweep_needs_three_radii() {
    let cfg = parse_config("[sweep]\nr = [20, 40]\n").unwrap();
    let err = sweep_stage(&cfg, tempfile::tempdir().unwrap().path()).unwrap_err();
    assert!(err.is_config(), "{err}");
    let (_, field) = field_of(err);
    assert_eq!(field, "sweep.r");
}

#[test]
fn unknown_keys_and_bad_syntax_report_lines() {
    let (line, _) = field_of(parse_config("seed = 1\n[chain]\nnn = 2\n").unwrap_err());
    assert_eq!(line, 3);
    let (line, _) = field_of(parse_config("seed = 1\n\n[physics\n").unwrap_err());
    assert_eq!(line, 3);
}

#[test]
fn fuzz_seed_corpora_replay() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    for (name, bytes) in read_dir(&root.join("config_parse")) {
        let text = String::from_utf8(bytes).unwrap();
        match parse_config(&text) {
            Ok(cfg) => assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg, "{name}"),
            Err(e) => assert!(name.starts_with("bad") || name.starts_with("odd"), "{name}: {e}"),
        }
    }
    for (name, bytes) in read_dir(&root.join("profile_meta")) {
        let text = String::from_utf8(bytes).unwrap();
        let parsed = multibump::profile::cache::parse_profile_meta(&text);
        assert_eq!(parsed.is_ok(), name != "partial.meta", "{name}");
    }
    let grid = multibump::pde::build_strip_grid(0.5, 0.125).unwrap();
    for (name, bytes) in read_dir(&root.join("field_csv")) {
        let text = String::from_utf8(bytes).unwrap();
        let table = multibump::pde::export::parse_field_csv(&text);
        if name == "strip.csv" {
            multibump::pde::export::field_from_table(&grid, &table.unwrap()).unwrap();
        } else if name == "bad.csv" {
            assert!(table.is_err());
        }
    }
}
