//! Output conventions. JSON carries 15 significant digits (rounded before
//! serialization so a re-parse reproduces the emitted values bit for bit),
//! CSV prints floats in shortest round-trip form, plain tables use 5
//! decimals. All numeric output goes to stdout; timing and diagnostics go
//! to stderr so stdout stays byte-identical across thread counts.

use primecorr::util::round_sig;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Plain,
    Json,
    Csv,
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().expect("checked f64"), 15);
            if let Some(num) = serde_json::Number::from_f64(r) {
                *v = Value::Number(num);
            }
        }
        _ => {}
    }
}

pub fn emit_json<T: serde::Serialize>(value: &T) {
    let mut v = serde_json::to_value(value).expect("value serializes");
    round_floats(&mut v);
    println!("{}", serde_json::to_string_pretty(&v).expect("json renders"));
}

/// One CSV line. Cells never contain commas or quotes (numbers and bare
/// words only), so no quoting layer is needed.
pub fn csv_line(cells: &[String]) -> String {
    cells.join(",")
}

pub fn float_cell(v: f64) -> String {
    // Shortest representation that parses back to exactly v.
    format!("{v}")
}

pub fn opt_cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(t) => t.to_string(),
        None => String::new(),
    }
}
