use kinetic_ar::bench::{BenchmarkSpec, ProblemTag};
use kinetic_ar::config::Overrides;

fn golden(tag: ProblemTag) -> serde_json::Value {
    let path = format!(
        "{}/tests/golden/{}.json",
        env!("CARGO_MANIFEST_DIR"),
        tag.name()
    );
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    serde_json::from_str(&text).unwrap()
}

#[test]
fn defaults_match_checked_in_configs() {
    for tag in ProblemTag::ALL {
        let spec = BenchmarkSpec::new(tag, &Overrides::default()).unwrap();
        let value = serde_json::to_value(&spec).unwrap();
        if std::env::var_os("WRITE_GOLDEN").is_some() {
            let path = format!(
                "{}/tests/golden/{}.json",
                env!("CARGO_MANIFEST_DIR"),
                tag.name()
            );
            std::fs::write(path, serde_json::to_string_pretty(&value).unwrap() + "\n").unwrap();
        }
        assert_eq!(value, golden(tag), "{tag}");
    }
}
