//! Report envelopes, manifests and number formatting.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::{Serializer, Value};

use crate::CliError;

pub const SCHEMA: &str = "hardy-lab/v1";
/// Timestamp written under `--deterministic`.
pub const FIXED_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub timestamp: String,
    pub results_path: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value, seed: Option<u64>, deterministic: bool, results_path: Option<&Path>) -> Self {
        let parameters = match parameters {
            Value::Object(map) => map.into_iter().filter(|(_, v)| !v.is_null()).collect(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        let timestamp =
            if deterministic { FIXED_TIMESTAMP.to_string() } else { chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true) };
        RunManifest {
            command: command.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp,
            results_path: results_path.map(|p| p.display().to_string()).unwrap_or_default(),
        }
    }
}

/// `x` with 17 significant digits; infinities as `inf`/`-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// JSON formatter that writes floats with 17 significant digits.
struct FullPrecision<F>(F);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        })*
    };
}

impl<F: Formatter> Formatter for FullPrecision<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    delegate!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
}

fn write_with<T: Serialize, F: Formatter>(value: &T, formatter: F) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FullPrecision(formatter));
    value.serialize(&mut ser).map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(out).map_err(|e| CliError::Io(e.to_string()))
}

/// Single-line JSON with 17-digit floats.
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String, CliError> {
    write_with(value, CompactFormatter)
}

/// Serializes `result` inside the `{schema, manifest, result}` envelope.
pub fn envelope<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<String, CliError> {
    let v = serde_json::json!({
        "schema": SCHEMA,
        "manifest": manifest,
        "result": result,
    });
    write_with(&v, PrettyFormatter::new()).map(|s| s + "\n")
}

pub fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
