//! Loads the published JSON schemas and checks instances against them.

#![allow(dead_code)]

use std::path::PathBuf;

use jsonschema::{Resource, Validator};
use serde_json::Value;

const BASE: &str = "https://expedition.local/schemas/";

pub fn schema_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn read(name: &str) -> Value {
    let path = schema_dir().join(format!("{name}.schema.json"));
    let raw = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&raw).unwrap()
}

pub fn validator(name: &str) -> Validator {
    let defs = read("defs");
    jsonschema::options()
        .with_resource(format!("{BASE}defs.schema.json"), Resource::from_contents(defs).unwrap())
        .build(&read(name))
        .unwrap_or_else(|e| panic!("schema {name}: {e}"))
}

/// Error messages from validating `instance` against schema `name`.
pub fn violations(name: &str, instance: &Value) -> Vec<String> {
    validator(name)
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

pub fn assert_valid(name: &str, instance: &Value) {
    let errors = violations(name, instance);
    assert!(errors.is_empty(), "{name}: {errors:?}\n{instance:#}");
}
