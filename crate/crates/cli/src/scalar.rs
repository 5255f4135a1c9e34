//! Scalar types usable from the command line: parsing and display.

use std::fmt::Display;

use adc_core::algebra::Rational;
use adc_core::Semiring;

/// A scalar selectable with `--scalar`: parseable from binding values and
/// printable in both output formats.
pub trait CliScalar:
    Semiring + PartialEq + Display + Send + Sync + 'static
{
    fn parse_scalar(s: &str) -> Result<Self, String>;

    fn to_json(&self) -> serde_json::Value;
}

impl CliScalar for i64 {
    fn parse_scalar(s: &str) -> Result<Self, String> {
        s.parse().map_err(|_| "expected a decimal integer".to_string())
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(*self)
    }
}

impl CliScalar for f64 {
    fn parse_scalar(s: &str) -> Result<Self, String> {
        s.parse().map_err(|_| "expected a decimal float".to_string())
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(*self)
    }
}

impl CliScalar for Rational {
    fn parse_scalar(s: &str) -> Result<Self, String> {
        s.parse()
    }

    /// Rationals serialize as `"p/q"` strings to stay exact.
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}
