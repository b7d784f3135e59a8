#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::{json, Value};

const BASE: &str = "https://qmh.local/schema/v1/";
const FILES: [&str; 5] = [
    "common.schema.json",
    "strategy-spec.schema.json",
    "payoff-result.schema.json",
    "match-transcript.schema.json",
    "session-state.schema.json",
];

fn load(file: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/v1").join(file);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// Validator for `file`, or for one of its `$defs` when `def` is given.
pub fn validator(file: &str, def: Option<&str>) -> jsonschema::Validator {
    let mut opts = jsonschema::options();
    for f in FILES {
        opts = opts.with_resource(
            format!("{BASE}{f}"),
            jsonschema::Resource::from_contents(load(f)).unwrap(),
        );
    }
    let schema = match def {
        Some(d) => json!({ "$ref": format!("{BASE}{file}#/$defs/{d}") }),
        None => load(file),
    };
    opts.build(&schema).unwrap()
}

pub fn assert_valid(file: &str, def: Option<&str>, instance: &Value) {
    let v = validator(file, def);
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{file} {def:?}: {errors:?}\n{instance}");
}
