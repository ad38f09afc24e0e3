//! Number parsing and rendering for files and command-line specs.

use num_bigint::BigInt;
use num_traits::Pow;
use surgeflow_core::{Rational, Scalar};

/// Accepts `"p/q"`, integers and plain decimals such as `"0.1"`, all exactly.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    let bad = || format!("{text:?} is not a rational number");
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{frac}", whole.trim_start_matches(['-', '+']));
        let numer: BigInt = digits.parse().map_err(|_| bad())?;
        let denom = BigInt::from(10u32).pow(frac.len());
        let r = Rational::new(numer, denom);
        return Ok(if negative { -r } else { r });
    }
    let r: Rational = t.parse().map_err(|_| bad())?;
    Ok(r)
}

pub fn render(x: &Rational) -> String {
    x.to_string()
}

/// Scalars that can be written to CSV and JSON outputs.
pub trait Emit: Scalar {
    fn cell(&self) -> String;
    fn json(&self) -> serde_json::Value;
}

impl Emit for f64 {
    fn cell(&self) -> String {
        format!("{self}")
    }

    fn json(&self) -> serde_json::Value {
        serde_json::Value::from(*self)
    }
}

impl Emit for Rational {
    fn cell(&self) -> String {
        render(self)
    }

    fn json(&self) -> serde_json::Value {
        serde_json::Value::from(render(self))
    }
}
