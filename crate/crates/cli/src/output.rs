//! Output rendering. Text output is deterministic and golden-test stable;
//! JSON keys within maps are sorted by variable name.

use serde::Serialize;
use serde_json::Value;

use crate::scalar::CliScalar;
use crate::FormatTag;

#[derive(Clone, Copy)]
pub enum Format {
    Text,
    Json,
}

impl From<FormatTag> for Format {
    fn from(f: FormatTag) -> Format {
        match f {
            FormatTag::Text => Format::Text,
            FormatTag::Json => Format::Json,
        }
    }
}

/// A fully rendered result: text lines plus the serialized JSON. The JSON
/// is serialized from structs directly so top-level field order is
/// declaration order, while per-variable maps sort by name.
pub struct Rendered {
    text: String,
    json: String,
}

#[derive(Serialize)]
struct ValueOut {
    value: Value,
}

#[derive(Serialize)]
struct GradOut {
    value: Value,
    gradient: std::collections::BTreeMap<String, Value>,
}

#[derive(Serialize)]
struct DeriveOut {
    derivative: String,
}

#[derive(Serialize)]
struct DiagOut {
    diagonal: Vec<Value>,
}

#[derive(Serialize)]
struct HvpOut {
    value: Value,
    hv: std::collections::BTreeMap<String, Value>,
}

fn to_json_string<T: Serialize>(t: &T) -> String {
    serde_json::to_string(t).expect("output serialization cannot fail")
}

impl Rendered {
    pub fn value<D: CliScalar>(value: D) -> Rendered {
        Rendered {
            text: format!("value = {value}"),
            json: to_json_string(&ValueOut {
                value: value.to_json(),
            }),
        }
    }

    /// `components` holds one entry per free variable; text prints all of
    /// them (zeros included), JSON omits the zeros like the sparse
    /// representation does.
    pub fn gradient<D: CliScalar>(value: D, mut components: Vec<(String, D)>) -> Rendered {
        components.sort_by(|a, b| a.0.cmp(&b.0));
        let mut text = format!("value = {value}");
        for (name, d) in &components {
            text.push_str(&format!("\nd/d{name} = {d}"));
        }
        let zero = D::zero();
        let gradient = components
            .iter()
            .filter(|(_, d)| *d != zero)
            .map(|(name, d)| (name.clone(), d.to_json()))
            .collect();
        Rendered {
            text,
            json: to_json_string(&GradOut {
                value: value.to_json(),
                gradient,
            }),
        }
    }

    pub fn derivative(pretty: String) -> Rendered {
        Rendered {
            json: to_json_string(&DeriveOut {
                derivative: pretty.clone(),
            }),
            text: pretty,
        }
    }

    pub fn diagonal<D: CliScalar>(diag: Vec<D>) -> Rendered {
        let text = diag
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        Rendered {
            text,
            json: to_json_string(&DiagOut {
                diagonal: diag.iter().map(|d| d.to_json()).collect(),
            }),
        }
    }

    pub fn hessian_vector<D: CliScalar>(value: D, mut components: Vec<(String, D)>) -> Rendered {
        components.sort_by(|a, b| a.0.cmp(&b.0));
        let mut text = format!("value = {value}");
        for (name, d) in &components {
            text.push_str(&format!("\nHv[{name}] = {d}"));
        }
        let zero = D::zero();
        let hv = components
            .iter()
            .filter(|(_, d)| *d != zero)
            .map(|(name, d)| (name.clone(), d.to_json()))
            .collect();
        Rendered {
            text,
            json: to_json_string(&HvpOut {
                value: value.to_json(),
                hv,
            }),
        }
    }

    pub fn print(&self, format: Format) {
        match format {
            Format::Text => println!("{}", self.text),
            Format::Json => println!("{}", self.json),
        }
    }
}
