//! JSON helpers shared by the report types.
//!
//! Floating-point values are written with 17 significant digits so reports
//! are byte-for-byte reproducible and round-trip exactly.

use serde_json::{Number, Value};

/// Report schema version written into every top-level document.
pub const SCHEMA_VERSION: u64 = 1;

/// `v` as a JSON number with 17 significant digits, `null` when not finite.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let text = format!("{v:.16e}");
    match text.parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

pub fn point(p: Option<(f64, f64)>) -> Value {
    match p {
        Some((x, u)) => serde_json::json!({ "x": num(x), "u": num(u) }),
        None => Value::Null,
    }
}

pub fn region(r: &crate::Region) -> Value {
    serde_json::json!({
        "x_min": num(r.x_min),
        "x_max": num(r.x_max),
        "u_min": num(r.u_min),
        "u_max": num(r.u_max),
        "grid_n": r.grid_n,
        "seed": r.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(-24.0).to_string(), "-2.4000000000000000e+1");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = num(std::f64::consts::PI).to_string().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }
}
