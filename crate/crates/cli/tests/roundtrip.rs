use migtopo::commands::analyze::PreorderReport;
use migtopo::config::ExperimentConfig;
use migtopo::output::{read_trace_csv, write_trace_csv, TraceHeader};
use migtopo_core::archipelago::TraceEntry;
use migtopo_core::stats::{validate_relation, Preorder};
use migtopo_core::{RunTrace, Topology, TopologyKind, TopologyMetrics};

fn sample_trace() -> RunTrace {
    let values = [
        [3.25, 1.0 / 3.0, 1e-300],
        [f64::MAX, 2.0f64.sqrt(), -0.0],
    ];
    RunTrace {
        run_id: 4,
        islands: values
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(p, &f)| TraceEntry {
                        period: p as u32 + 1,
                        evals: 20 + 2000 * (p as u64 + 1),
                        best_f: f,
                    })
                    .collect()
            })
            .collect(),
    }
}

#[test]
fn trace_csv_round_trip_is_exact() {
    let header = TraceHeader {
        config_hash: "ab".repeat(32),
        master_seed: u64::MAX,
        run_seed: 17,
    };
    let trace = sample_trace();
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &header, &trace).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# config_hash="));
    assert!(text.contains("run_id,island_id,period,evals,best_f\n"));
    let (h, back) = read_trace_csv(&text).unwrap();
    assert_eq!(h, header);
    assert_eq!(back.run_id, trace.run_id);
    for (a, b) in back.islands.iter().flatten().zip(trace.islands.iter().flatten()) {
        assert_eq!(a.best_f.to_bits(), b.best_f.to_bits());
        assert_eq!((a.period, a.evals), (b.period, b.evals));
    }
}

#[test]
fn corrupt_trace_is_rejected() {
    assert!(read_trace_csv("run_id,island_id,period,evals,best_f\n0,0,1,2,3\n").is_err());
    let bad = "# config_hash=x\n# master_seed=1\n# run_seed=2\nrun_id,island_id,period,evals,best_f\n0,0,1,2,oops\n";
    assert!(read_trace_csv(bad).is_err());
}

#[test]
fn preorder_and_metrics_json_round_trip() {
    let mut p = Preorder::new(vec!["a".into(), "b".into(), "c".into()]);
    p.set_better(0, 1);
    p.set_better(1, 2);
    p.set_better(2, 0);
    let text = serde_json::to_string(&p).unwrap();
    // Invalid relations survive the trip so their reports can be inspected.
    let back: Preorder = serde_json::from_str(&text).unwrap();
    assert_eq!(back, p);
    assert!(!validate_relation(&back).is_valid());

    let m = Topology::build(TopologyKind::Torus, 16, None).unwrap().metrics();
    let json = serde_json::to_value(&m).unwrap();
    for key in ["kind", "n", "edges", "diameter", "avg_path", "min_degree", "avg_degree", "max_degree", "clustering"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let back: TopologyMetrics = serde_json::from_value(json).unwrap();
    assert_eq!(back, m);
}

#[test]
fn report_schema_parses() {
    let text = r#"{
        "group": "g", "n_islands": 8, "method": "extended", "alpha": 0.01, "window": 0.5,
        "sidedness": "two-sided", "inputs": [],
        "preorder": {"elements": ["x", "y"], "relation": [["~", ">"], ["<", "~"]]},
        "validation": {"cycles": [], "transitivity_violations": []},
        "valid": true, "height": 2
    }"#;
    let r: PreorderReport = serde_json::from_str(text).unwrap();
    assert!(r.preorder.is_better(0, 1));
    let again: PreorderReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(again, r);
}

#[test]
fn config_hash_ignores_output_dir() {
    let a: ExperimentConfig = serde_json::from_str(
        r#"{"problem":"rastrigin:4","algorithm":"de","topology":"ring","n_islands":4,"budget_evals":4000,"output_dir":"x"}"#,
    )
    .unwrap();
    let mut b = a.clone();
    b.output_dir = Some("elsewhere".into());
    let base = std::path::Path::new(".");
    assert_eq!(a.expand(base).unwrap()[0].hash, b.expand(base).unwrap()[0].hash);
    b.master_seed += 1;
    assert_ne!(a.expand(base).unwrap()[0].hash, b.expand(base).unwrap()[0].hash);
}

#[test]
fn batch_expands_cross_product() {
    let c: ExperimentConfig = serde_json::from_str(
        r#"{"problems":["rastrigin:4","schwefel:4"],"algorithms":["de","sa-tuned"],
            "topologies":["ring","ba"],"ba_seeds":[1,2,3],"n_islands":[8,16],"budget_evals":20000}"#,
    )
    .unwrap();
    let setups = c.expand(std::path::Path::new(".")).unwrap();
    assert_eq!(setups.len(), 2 * 2 * 4 * 2);
    let groups: std::collections::HashSet<_> = setups.iter().map(|s| s.group.clone()).collect();
    assert_eq!(groups.len(), 8);
}

#[test]
fn unknown_fields_are_rejected() {
    let r: Result<ExperimentConfig, _> =
        serde_json::from_str(r#"{"problem":"rastrigin:4","algorithm":"de","topology":"ring","n_islands":4,"islands":3}"#);
    assert!(r.unwrap_err().to_string().contains("islands"));
}
