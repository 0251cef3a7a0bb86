//! Cell values, error kinds and the coercion rules shared by every module.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::stdlib::RenderDirective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    Div0,
    Value,
    Ref,
    Name,
    Num,
    NA,
    /// Circular reference. Only the recalc cycle rule produces this.
    Circ,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 7] = [
        ErrorKind::Div0,
        ErrorKind::Value,
        ErrorKind::Ref,
        ErrorKind::Name,
        ErrorKind::Num,
        ErrorKind::NA,
        ErrorKind::Circ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Div0 => "#DIV/0!",
            ErrorKind::Value => "#VALUE!",
            ErrorKind::Ref => "#REF!",
            ErrorKind::Name => "#NAME?",
            ErrorKind::Num => "#NUM!",
            ErrorKind::NA => "#N/A",
            ErrorKind::Circ => "#CIRC!",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ErrorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

impl Serialize for ErrorKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ErrorKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("unknown error kind {s}")))
    }
}

/// What a cell evaluates to.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Value {
    #[default]
    Blank,
    Number(f64),
    Text(String),
    Boolean(bool),
    Error(ErrorKind),
    Render(Box<RenderDirective>),
}

impl Value {
    /// Wraps a float, mapping NaN and infinities to `#NUM!`.
    pub fn number(n: f64) -> Value {
        if n.is_finite() {
            Value::Number(n)
        } else {
            Value::Error(ErrorKind::Num)
        }
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Value::Blank)
    }

    pub fn error(&self) -> Option<ErrorKind> {
        match self {
            Value::Error(k) => Some(*k),
            _ => None,
        }
    }

    /// Bitwise equality: unlike `==`, distinguishes `0.0` from `-0.0`.
    pub fn identical(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::number(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<ErrorKind> for Value {
    fn from(k: ErrorKind) -> Self {
        Value::Error(k)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Blank => Ok(()),
            Value::Number(n) => f.write_str(&format_number(*n)),
            Value::Text(s) => f.write_str(s),
            Value::Boolean(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            Value::Error(k) => f.write_str(k.as_str()),
            Value::Render(r) => write!(f, "{}", r.label()),
        }
    }
}

// Wire form: null | number | string | bool | {"error": "#N/A"} | {"render": {...}}
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            Value::Blank => s.serialize_unit(),
            Value::Number(n) => s.serialize_f64(*n),
            Value::Text(t) => s.serialize_str(t),
            Value::Boolean(b) => s.serialize_bool(*b),
            Value::Error(k) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("error", k)?;
                m.end()
            }
            Value::Render(r) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("render", r)?;
                m.end()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Blank,
    Number(f64),
    Text(String),
    Boolean(bool),
    Error { error: ErrorKind },
    Render { render: Box<RenderDirective> },
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match ValueRepr::deserialize(d)? {
            ValueRepr::Blank => Value::Blank,
            ValueRepr::Number(n) if n.is_finite() => Value::Number(n),
            ValueRepr::Number(_) => return Err(D::Error::custom("non-finite number")),
            ValueRepr::Text(t) => Value::Text(t),
            ValueRepr::Boolean(b) => Value::Boolean(b),
            ValueRepr::Error { error } => Value::Error(error),
            ValueRepr::Render { render } => Value::Render(render),
        })
    }
}

/// Shortest round-trip decimal; negative zero prints as `0`.
pub fn format_number(n: f64) -> String {
    if n == 0.0 {
        "0".to_string()
    } else {
        format!("{n}")
    }
}

/// Lexes `text` as a plain decimal number: optional sign, digits with an
/// optional fraction, optional exponent. Surrounding spaces are allowed.
pub fn parse_number_text(text: &str) -> Option<f64> {
    let t = text.trim_matches(' ');
    let b = t.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < b.len() && matches!(b[i], b'e' | b'E') {
        i += 1;
        if i < b.len() && matches!(b[i], b'+' | b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    t.parse::<f64>().ok().filter(|n| n.is_finite())
}

pub fn coerce_number(v: &Value) -> Result<f64, ErrorKind> {
    match v {
        Value::Blank => Ok(0.0),
        Value::Number(n) => Ok(*n),
        Value::Boolean(b) => Ok(if *b { 1.0 } else { 0.0 }),
        Value::Text(s) => parse_number_text(s).ok_or(ErrorKind::Value),
        Value::Error(k) => Err(*k),
        Value::Render(_) => Err(ErrorKind::Value),
    }
}

pub fn coerce_boolean(v: &Value) -> Result<bool, ErrorKind> {
    match v {
        Value::Blank => Ok(false),
        Value::Number(n) => Ok(*n != 0.0),
        Value::Boolean(b) => Ok(*b),
        Value::Text(s) if s.eq_ignore_ascii_case("true") => Ok(true),
        Value::Text(s) if s.eq_ignore_ascii_case("false") => Ok(false),
        Value::Text(_) | Value::Render(_) => Err(ErrorKind::Value),
        Value::Error(k) => Err(*k),
    }
}

pub fn coerce_text(v: &Value) -> Result<String, ErrorKind> {
    match v {
        Value::Error(k) => Err(*k),
        Value::Render(_) => Err(ErrorKind::Value),
        other => Ok(other.to_string()),
    }
}

/// Desktop-spreadsheet comparison: Number < Text < Boolean, text compared
/// case-insensitively, Blank taking the zero value of the other side's type.
pub fn compare(a: &Value, b: &Value) -> Result<Ordering, ErrorKind> {
    fn rank(v: &Value) -> u8 {
        match v {
            Value::Number(_) => 0,
            Value::Text(_) => 1,
            Value::Boolean(_) => 2,
            _ => 3,
        }
    }
    if let Value::Error(k) = a {
        return Err(*k);
    }
    if let Value::Error(k) = b {
        return Err(*k);
    }
    if matches!(a, Value::Render(_)) || matches!(b, Value::Render(_)) {
        return Err(ErrorKind::Value);
    }
    let blank_as = |other: &Value| match other {
        Value::Text(_) => Value::Text(String::new()),
        Value::Boolean(_) => Value::Boolean(false),
        _ => Value::Number(0.0),
    };
    let (a, b) = match (a, b) {
        (Value::Blank, Value::Blank) => return Ok(Ordering::Equal),
        (Value::Blank, other) => (blank_as(other), other.clone()),
        (other, Value::Blank) => (other.clone(), blank_as(other)),
        (x, y) => (x.clone(), y.clone()),
    };
    Ok(match (&a, &b) {
        (Value::Number(x), Value::Number(y)) => x.partial_cmp(y).unwrap_or(Ordering::Equal),
        (Value::Text(x), Value::Text(y)) => x.to_lowercase().cmp(&y.to_lowercase()),
        (Value::Boolean(x), Value::Boolean(y)) => x.cmp(y),
        _ => rank(&a).cmp(&rank(&b)),
    })
}

/// Interprets raw user input typed into a cell (not a formula): numbers,
/// TRUE/FALSE, a leading `'` forcing text, empty meaning blank.
pub fn parse_literal_input(raw: &str) -> Value {
    if raw.is_empty() {
        Value::Blank
    } else if let Some(rest) = raw.strip_prefix('\'') {
        Value::Text(rest.to_string())
    } else if let Some(n) = parse_number_text(raw) {
        Value::Number(n)
    } else if raw.eq_ignore_ascii_case("true") {
        Value::Boolean(true)
    } else if raw.eq_ignore_ascii_case("false") {
        Value::Boolean(false)
    } else {
        Value::Text(raw.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_coercions() {
        assert_eq!(coerce_number(&Value::Blank), Ok(0.0));
        assert_eq!(coerce_number(&Value::text("3.5")), Ok(3.5));
        assert_eq!(coerce_number(&Value::text("abc")), Err(ErrorKind::Value));
        assert_eq!(coerce_number(&Value::Boolean(true)), Ok(1.0));
        assert_eq!(coerce_number(&Value::text(" -1e3 ")), Ok(-1000.0));
        assert_eq!(coerce_number(&Value::text("inf")), Err(ErrorKind::Value));
        assert_eq!(coerce_number(&Value::text("NaN")), Err(ErrorKind::Value));
        assert_eq!(coerce_number(&Value::text(".5")), Ok(0.5));
        assert_eq!(coerce_number(&Value::text("5.")), Ok(5.0));
        assert_eq!(coerce_number(&Value::text("")), Err(ErrorKind::Value));
        assert_eq!(coerce_number(&Value::text("1e")), Err(ErrorKind::Value));
    }

    #[test]
    fn boolean_coercions() {
        assert_eq!(coerce_boolean(&Value::Number(0.0)), Ok(false));
        assert_eq!(coerce_boolean(&Value::text("TRUE")), Ok(true));
        assert_eq!(coerce_boolean(&Value::text("fAlSe")), Ok(false));
        assert_eq!(coerce_boolean(&Value::Error(ErrorKind::NA)), Err(ErrorKind::NA));
        assert_eq!(coerce_boolean(&Value::text("yes")), Err(ErrorKind::Value));
        assert_eq!(coerce_boolean(&Value::Blank), Ok(false));
    }

    #[test]
    fn errors_pass_through_every_coercion() {
        for k in ErrorKind::ALL {
            let v = Value::Error(k);
            assert_eq!(coerce_number(&v), Err(k));
            assert_eq!(coerce_boolean(&v), Err(k));
            assert_eq!(coerce_text(&v), Err(k));
        }
    }

    #[test]
    fn nan_is_never_stored() {
        assert_eq!(Value::number(f64::NAN), Value::Error(ErrorKind::Num));
        assert_eq!(Value::number(f64::INFINITY), Value::Error(ErrorKind::Num));
    }

    #[test]
    fn mixed_type_ordering() {
        use Ordering::*;
        assert_eq!(compare(&Value::Number(1e9), &Value::text("a")), Ok(Less));
        assert_eq!(compare(&Value::text("zzz"), &Value::Boolean(false)), Ok(Less));
        assert_eq!(compare(&Value::text("ABC"), &Value::text("abc")), Ok(Equal));
        assert_eq!(compare(&Value::Blank, &Value::Number(-1.0)), Ok(Greater));
        assert_eq!(compare(&Value::Blank, &Value::text("")), Ok(Equal));
        assert_eq!(compare(&Value::Number(1.0), &Value::Error(ErrorKind::NA)), Err(ErrorKind::NA));
    }

    #[test]
    fn number_display() {
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(format_number(2.5), "2.5");
    }

    #[test]
    fn literal_input() {
        assert_eq!(parse_literal_input("42"), Value::Number(42.0));
        assert_eq!(parse_literal_input("'42"), Value::text("42"));
        assert_eq!(parse_literal_input("True"), Value::Boolean(true));
        assert_eq!(parse_literal_input(" x "), Value::text(" x "));
        assert_eq!(parse_literal_input(""), Value::Blank);
    }

    #[test]
    fn wire_form_round_trips() {
        let vals = vec![
            Value::Blank,
            Value::Number(-0.0),
            Value::Number(0.1),
            Value::text("hi"),
            Value::Boolean(true),
            Value::Error(ErrorKind::Div0),
        ];
        for v in vals {
            let s = serde_json::to_string(&v).unwrap();
            let back: Value = serde_json::from_str(&s).unwrap();
            assert!(v.identical(&back), "{s}");
        }
        assert_eq!(serde_json::to_string(&Value::Error(ErrorKind::NA)).unwrap(), r##"{"error":"#N/A"}"##);
    }
}
