//! Shorthand for matrices, vectors, jets and cones on the command line.
//!
//! Matrices: `I`, `2.5I`, `diag(a,b,…)` or a JSON array of rows.
//! Jets: a JSON object `{"r":…,"p":[…],"A":[[…]]}` or the triple `r,p,A`
//! where p is `0` (zero vector) or a JSON array.

use jetpot::cones::{MonotonicityCone, Radius};
use jetpot::{Error, Jet, Result, SymMatrix, Vector};

fn bad(what: &str, s: &str) -> Error {
    Error::Precondition(format!("cannot parse {what} '{s}'"))
}

fn number(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| bad("number", s))
}

/// `n` is needed only for `I`-type input.
pub fn matrix(s: &str, n: Option<usize>) -> Result<SymMatrix> {
    let t = s.trim();
    if let Some(c) = t.strip_suffix('I') {
        let n = n.ok_or_else(|| Error::Precondition(format!("'{t}' needs a dimension (pass --n)")))?;
        let c = if c.is_empty() { 1.0 } else { number(c)? };
        return Ok(SymMatrix::scalar(n, c));
    }
    if let Some(body) = t.strip_prefix("diag(").and_then(|b| b.strip_suffix(')')) {
        let d: Vec<f64> = body.split(',').map(number).collect::<Result<_>>()?;
        if d.is_empty() {
            return Err(bad("matrix", s));
        }
        return Ok(SymMatrix::diag(&d));
    }
    let rows: Vec<Vec<f64>> = serde_json::from_str(t).map_err(|e| Error::Precondition(format!("matrix '{t}': {e}")))?;
    SymMatrix::from_rows(&rows)
}

fn vector(s: &str, n: Option<usize>) -> Result<Vector> {
    let t = s.trim();
    if t == "0" {
        let n = n.ok_or_else(|| Error::Precondition("a zero gradient needs a dimension (pass --n)".into()))?;
        return Ok(Vector::zeros(n));
    }
    let v: Vec<f64> = serde_json::from_str(t).map_err(|e| Error::Precondition(format!("vector '{t}': {e}")))?;
    Ok(Vector::from_vec(v))
}

/// Splits at commas outside brackets and parentheses.
fn top_level(s: &str) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' | '{' => depth += 1,
            ']' | ')' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

pub fn jet(s: &str, n: Option<usize>) -> Result<Jet> {
    let t = s.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| Error::Precondition(format!("jet '{t}': {e}")));
    }
    let parts = top_level(t);
    let [r, p, a] = parts[..] else {
        return Err(Error::Precondition(format!("jet '{t}' must be JSON or 'r,p,A'")));
    };
    let a = matrix(a, n.or_else(|| vector(p, None).ok().map(|v| v.len())))?;
    let n = a.dim();
    Jet::new(number(r)?, vector(p, Some(n))?, a)
}

/// `P`, `NxP`, `gamma:<γ>`, `R:<R>`, or the JSON form of a cone.
pub fn cone(s: &str) -> Result<MonotonicityCone> {
    let t = s.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| Error::Precondition(format!("cone '{t}': {e}")));
    }
    match t {
        "P" => return Ok(MonotonicityCone::m_p()),
        "NxP" => return Ok(MonotonicityCone::m_np()),
        _ => {}
    }
    if let Some(g) = t.strip_prefix("gamma:") {
        return Ok(MonotonicityCone::m_gamma(number(g)?));
    }
    if let Some(r) = t.strip_prefix("R:") {
        let r = number(r)?;
        if !(r > 0.0) {
            return Err(Error::Precondition("R must be positive".into()));
        }
        return Ok(MonotonicityCone::fundamental(None, Default::default(), Some(Radius::Finite(r))));
    }
    Err(Error::UnknownName(format!("unknown cone '{t}' (P | NxP | gamma:<γ> | R:<R> | JSON)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices() {
        assert_eq!(matrix("I", Some(2)).unwrap(), SymMatrix::identity(2));
        assert_eq!(matrix("0.5I", Some(3)).unwrap(), SymMatrix::scalar(3, 0.5));
        assert_eq!(matrix("diag(1, -2)", None).unwrap(), SymMatrix::diag(&[1.0, -2.0]));
        assert_eq!(matrix("[[1,0],[0,-3]]", None).unwrap(), SymMatrix::diag(&[1.0, -3.0]));
        assert!(matrix("I", None).is_err());
        assert!(matrix("[[1,2],[0,1]]", None).is_err());
    }

    #[test]
    fn jets() {
        let j = jet("0,0,I", Some(2)).unwrap();
        assert_eq!(j, Jet::from_parts(0.0, Vector::zeros(2), SymMatrix::identity(2)));
        let j = jet("-1,[1,2],diag(3,4)", None).unwrap();
        assert_eq!(j.p, Vector::from_vec(vec![1.0, 2.0]));
        let j = jet(r#"{"r":0,"p":[0,0],"A":[[2,0],[0,5]]}"#, None).unwrap();
        assert_eq!(j.a, SymMatrix::diag(&[2.0, 5.0]));
        assert!(jet(r#"{"r":0,"p":[0],"A":[[2,0],[0,5]]}"#, None).is_err());
        assert!(jet("1,2", None).is_err());
    }

    #[test]
    fn cones() {
        assert_eq!(cone("R:2").unwrap(), MonotonicityCone::m_r(2.0));
        assert_eq!(cone(r#"{"variant":"fundamental","R":2}"#).unwrap(), MonotonicityCone::m_r(2.0));
        assert!(cone("R:-1").is_err());
        assert!(cone("Q").is_err());
    }
}
