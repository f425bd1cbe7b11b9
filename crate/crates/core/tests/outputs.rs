use std::fs;

use kinetic_ar::bench::{build_problem, emit_outputs, OutputFlags, Snapshot};
use kinetic_ar::config::Overrides;

fn run_into(dir: &std::path::Path) {
    let p = build_problem("consistent_ic", &Overrides::default()).unwrap();
    let mut snaps = vec![Snapshot {
        t: 0.0,
        moments: p.initial_state().unwrap().moments().unwrap(),
    }];
    let result = p
        .solver
        .run(p.initial_state().unwrap(), p.spec.t_final, |_, s| {
            snaps.push(Snapshot {
                t: s.t,
                moments: s.moments().unwrap(),
            })
        })
        .unwrap();
    let flags = OutputFlags {
        plots: true,
        timings: true,
    };
    emit_outputs(dir, &p.spec, &p.grid, &result, &snaps, flags).unwrap();
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(a.path());
    run_into(b.path());
    for name in [
        "moments.csv",
        "diagnostics.csv",
        "jfnk.csv",
        "summary.json",
        "moments.svg",
        "ranks.svg",
    ] {
        let (x, y) = (
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
        );
        assert!(x == y, "{name} differs between runs");
    }
    assert!(a.path().join("timing.csv").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    let golden: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/golden/consistent_ic.json"
        ))
        .unwrap(),
    )
    .unwrap();
    assert_eq!(summary["problem"], golden);
    assert_eq!(summary["seed"], 42);
    let csv = fs::read_to_string(a.path().join("moments.csv")).unwrap();
    assert!(csv.starts_with("t,x,rho,u,T\n"));
    assert!(!csv.contains('\r'));
}
