use std::path::PathBuf;

use nc_ergodic::scenario::{gallery, load_scenario, parse_scenario};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

#[test]
fn shipped_scenarios_match_the_gallery() {
    for s in gallery() {
        let path = dir().join(format!("{}.scn", s.name));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(text, s.to_json() + "\n", "{} is stale; regenerate with `nc-ergodic gallery --scenarios`", s.name);
    }
}

#[test]
fn shipped_scenarios_load() {
    let mut count = 0;
    for entry in std::fs::read_dir(dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "scn") {
            let s = load_scenario(&path).unwrap();
            assert_eq!(Some(s.name.as_str()), path.file_stem().and_then(|n| n.to_str()));
            count += 1;
        }
    }
    assert_eq!(count, gallery().len());
}

#[test]
fn schema_lists_every_top_level_key() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir().join("scenario.schema.json")).unwrap()).unwrap();
    let props = schema["properties"].as_object().unwrap();
    let sample: serde_json::Value = serde_json::from_str(&gallery()[1].to_json()).unwrap();
    for key in sample.as_object().unwrap().keys() {
        assert!(props.contains_key(key), "schema lacks {key}");
    }
    assert_eq!(schema["additionalProperties"], false);
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v: serde_json::Value = serde_json::from_str(&gallery()[0].to_json()).unwrap();
    v["surprise"] = serde_json::json!(1);
    let err = parse_scenario(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("surprise"), "{err}");
}
