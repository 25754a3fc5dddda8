//! Verification reports and their deterministic serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::jets::Jet;

/// Outcome of a sampled or grid check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub n_samples: usize,
    /// Smallest margin seen. For failures this is the most negative one.
    pub worst_margin: f64,
    pub witness: Option<Jet>,
    pub seed: u64,
    /// Sampling starved before the check could say anything.
    #[serde(default, skip_serializing_if = "is_false")]
    pub inconclusive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_point: Option<Vec<f64>>,
    /// Descriptive name of the result a scenario reproduces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Per-point table for CSV output; not part of the JSON schema.
    #[serde(skip)]
    pub points: Vec<PointRecord>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub margin: f64,
    pub ok: bool,
}

impl VerificationReport {
    pub fn new(seed: u64) -> Self {
        VerificationReport {
            pass: true,
            n_samples: 0,
            worst_margin: f64::INFINITY,
            witness: None,
            seed,
            inconclusive: false,
            witness_point: None,
            anchor: None,
            verdict: None,
            details: BTreeMap::new(),
            notes: Vec::new(),
            points: Vec::new(),
        }
    }

    /// Folds one observation in. Keeps the first minimizer so merges are
    /// deterministic in sample order.
    pub fn observe(&mut self, margin: f64, jet: Option<&Jet>, point: Option<&[f64]>) {
        self.n_samples += 1;
        if margin < self.worst_margin || (margin.is_nan() && !self.worst_margin.is_nan()) {
            self.worst_margin = margin;
            self.witness = jet.cloned();
            self.witness_point = point.map(|p| p.to_vec());
        }
    }

    pub fn fail(&mut self) {
        self.pass = false;
    }

    pub fn detail(&mut self, key: &str, value: f64) -> &mut Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    pub fn inconclusive(seed: u64, n_samples: usize, why: &str) -> Self {
        let mut r = VerificationReport::new(seed);
        r.pass = false;
        r.inconclusive = true;
        r.n_samples = n_samples;
        r.notes.push(why.to_string());
        r
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// Per-point table (`x1,…,xn,margin,verdict`) for grid checks; a
    /// `key,value` summary for everything else.
    pub fn to_csv(&self) -> String {
        if self.points.is_empty() {
            return self.summary_csv();
        }
        let dims = self.points.first().map_or(0, |p| p.x.len());
        let mut s = String::new();
        for i in 0..dims {
            let _ = write!(s, "x{},", i + 1);
        }
        s.push_str("margin,verdict\n");
        for p in &self.points {
            for v in &p.x {
                s.push_str(&fmt_g(*v));
                s.push(',');
            }
            s.push_str(&fmt_g(p.margin));
            s.push_str(if p.ok { ",ok\n" } else { ",fail\n" });
        }
        s
    }
}

impl VerificationReport {
    fn summary_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let _ = writeln!(s, "pass,{}", self.pass);
        let _ = writeln!(s, "n_samples,{}", self.n_samples);
        let _ = writeln!(s, "worst_margin,{}", fmt_g(self.worst_margin));
        let _ = writeln!(s, "seed,{}", self.seed);
        if let Some(v) = &self.verdict {
            let _ = writeln!(s, "verdict,{v}");
        }
        for (k, v) in &self.details {
            let _ = writeln!(s, "{k},{}", fmt_g(*v));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Precondition(format!("unknown format '{s}' (json|csv)"))),
        }
    }
}

/// Writes `report` to `path`, or returns the text when `path` is None.
pub fn emit_report(report: &VerificationReport, format: Format, path: Option<&Path>) -> Result<String> {
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    if let Some(p) = path {
        std::fs::write(p, &text)?;
    }
    Ok(text)
}

/// Sorted keys, floats as `%.12g`, non-finite floats as null.
pub fn to_json_string<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).unwrap_or(Value::Null);
    let mut out = String::new();
    write_value(&value, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&fmt_g(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            // serde_json's default map is ordered by key
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(x, out);
            }
            out.push('}');
        }
    }
}

/// C's `%.12g`.
pub fn fmt_g(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    const P: i32 = 12;
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mant, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if exp < -4 || exp >= P {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::SymMatrix;

    #[test]
    fn g_format_matches_c() {
        assert_eq!(fmt_g(0.5), "0.5");
        assert_eq!(fmt_g(2.0), "2");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(1e-5), "1e-05");
        assert_eq!(fmt_g(-1.5e20), "-1.5e+20");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_g(0.0001), "0.0001");
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let mut r = VerificationReport::new(42);
        let j = Jet::from_slices(0.0, &[1.0], SymMatrix::diag(&[2.0])).unwrap();
        r.observe(-0.25, Some(&j), None);
        r.fail();
        let s = r.to_json();
        assert_eq!(
            s,
            "{\"n_samples\":1,\"pass\":false,\"seed\":42,\"witness\":{\"A\":[[2]],\"p\":[1],\"r\":0},\"worst_margin\":-0.25}\n"
        );
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.witness, r.witness);
        assert_eq!(back.to_json(), s);
    }

    #[test]
    fn csv_summary_without_points() {
        let mut r = VerificationReport::new(7);
        r.detail("gap", 0.5);
        assert_eq!(r.to_csv(), "key,value\npass,true\nn_samples,0\nworst_margin,null\nseed,7\ngap,0.5\n");
    }

    #[test]
    fn csv_header() {
        let mut r = VerificationReport::new(0);
        r.points.push(PointRecord { x: vec![0.1, 0.2], margin: 1.0, ok: true });
        assert!(r.to_csv().starts_with("x1,x2,margin,verdict\n0.1,0.2,1,ok\n"));
    }
}
