//! Stdout document helpers shared by the subcommands.

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Print a JSON value or its key/value CSV flattening, depending on the
/// selected format. Used by subcommands whose natural shape is a flat map.
pub fn emit_flat(format: Format, value: &serde_json::Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("valid json")),
        Format::Csv => {
            println!("key,value");
            if let Some(obj) = value.as_object() {
                for (k, v) in obj {
                    println!("{k},{}", csv_scalar(v));
                }
            }
        }
    }
}

/// Render a JSON scalar for a CSV cell (strings unquoted, arrays joined
/// with `;` so rows stay one line).
pub fn csv_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => items
            .iter()
            .map(csv_scalar)
            .collect::<Vec<_>>()
            .join(";"),
        other => other.to_string(),
    }
}
