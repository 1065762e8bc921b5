use mlptopo::config::{cardiotocography, circles};
use serde_json::Value;

fn schema() -> Value {
    let text = include_str!("../../../docs/run-config.schema.json");
    serde_json::from_str(text).unwrap()
}

fn keys(v: &Value) -> Vec<String> {
    v.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default()
}

/// Every key of the preset documents is described by the published schema.
#[test]
fn schema_covers_preset_keys() {
    let schema = schema();
    let props = &schema["properties"];
    for config in [circles(), cardiotocography()] {
        let doc: Value = serde_json::to_value(toml::from_str::<toml::Value>(&config.to_toml()).unwrap()).unwrap();
        for top in keys(&doc) {
            assert!(props.get(&top).is_some(), "schema lacks `{top}`");
            let section = &props[top.as_str()];
            let allowed: Vec<String> = match section.get("oneOf") {
                Some(Value::Array(alts)) => alts.iter().flat_map(|a| keys(&a["properties"])).collect(),
                _ => keys(&section["properties"]),
            };
            for key in keys(&doc[top.as_str()]) {
                assert!(allowed.contains(&key), "schema lacks `{top}.{key}`");
            }
        }
    }
}
