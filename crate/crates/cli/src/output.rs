use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Wrapper printed by every JSON-emitting command. Keys are sorted and no
/// timestamps are recorded, so identical invocations print identical bytes.
#[derive(Serialize)]
pub struct OutputEnvelope<P: Serialize> {
    pub command: &'static str,
    pub parameters: BTreeMap<&'static str, Value>,
    pub payload: P,
    pub version: &'static str,
}

pub fn emit<P: Serialize>(
    command: &'static str,
    parameters: BTreeMap<&'static str, Value>,
    payload: P,
) {
    let env = OutputEnvelope {
        command,
        parameters,
        payload,
        version: env!("CARGO_PKG_VERSION"),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&env).expect("payload serialises")
    );
}

/// Builds a parameter map from `(key, value)` pairs.
#[macro_export]
macro_rules! params {
    ($($k:literal => $v:expr),* $(,)?) => {{
        let mut map = std::collections::BTreeMap::new();
        $(map.insert($k, serde_json::json!($v));)*
        map
    }};
}

/// CSV text from a header and rows, LF line endings.
pub fn csv(header: &str, rows: impl IntoIterator<Item = (String, String)>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (a, b) in rows {
        out.push_str(&a);
        out.push(',');
        out.push_str(&b);
        out.push('\n');
    }
    out
}
