//! Number formatting for every emitted JSON and CSV file: IEEE doubles with 17
//! significant digits, non-finite values as `null` (JSON) or `nan`/`inf` (CSV).

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Compact JSON formatter writing floats via [`fmt_f64`].
#[derive(Debug, Default, Clone, Copy)]
pub struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn write_json<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SciFormatter);
    value.serialize(&mut ser)
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 0.375, -2.5e-300, 1e300, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn json_uses_scientific_and_null() {
        let s = to_json_string(&serde_json::json!({"a": 0.5, "b": [1.0, 2]})).unwrap();
        assert_eq!(s, r#"{"a":5.0000000000000000e-1,"b":[1.0000000000000000e0,2]}"#);
        let s = to_json_string(&vec![f64::NAN, f64::INFINITY]).unwrap();
        assert_eq!(s, "[null,null]");
        let back: Vec<f64> = serde_json::from_str(&to_json_string(&vec![0.1, 1e-7]).unwrap()).unwrap();
        assert_eq!(back, vec![0.1, 1e-7]);
    }
}
