//! The report envelope shared by every CLI command.

use std::collections::BTreeMap;

use serde::Serialize;

pub const ENGINE_NAME: &str = env!("CARGO_PKG_NAME");
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    /// Not stabilized, not certified, or a criterion that did not apply.
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Engine {
    pub name: &'static str,
    pub version: &'static str,
}

/// Echo of the inputs, after parsing.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Request {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub germ: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_vars: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_vars: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub options: BTreeMap<String, String>,
}

impl Request {
    pub fn option(mut self, key: &str, value: impl ToString) -> Self {
        self.options.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub engine: Engine,
    pub command: String,
    pub request: Request,
    pub status: Status,
    pub certified: bool,
    pub result: T,
    /// Wall-clock time; only present when asked for, so that identical
    /// invocations print identical JSON.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, request: Request, status: Status, certified: bool, result: T) -> Self {
        Report {
            engine: Engine { name: ENGINE_NAME, version: ENGINE_VERSION },
            command: command.to_string(),
            request,
            status,
            certified,
            result,
            timing_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
