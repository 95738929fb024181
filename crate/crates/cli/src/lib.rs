//! Command-line driver and HTTP service around `cellmatch-core`.

pub mod commands;
pub mod server;

use serde::Serialize;

use cellmatch_core::session::SCHEMA_VERSION;

/// Serializes `body` with a leading `schema_version` field.
pub fn versioned<T: Serialize>(body: &T) -> serde_json::Value {
    #[derive(Serialize)]
    struct Versioned<'a, T: Serialize> {
        schema_version: u32,
        #[serde(flatten)]
        body: &'a T,
    }
    serde_json::to_value(Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })
    .expect("document serializes")
}
