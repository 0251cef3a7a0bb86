use super::{int, opt_num, txt, wildcard_prefix, Registry};
use crate::engine::Arg;
use crate::value::{parse_number_text, ErrorKind, Value};

const MAX_TEXT: usize = 32767;

fn text(r: Result<String, ErrorKind>) -> Value {
    match r {
        Ok(s) if s.chars().count() > MAX_TEXT => Value::Error(ErrorKind::Value),
        Ok(s) => Value::Text(s),
        Err(k) => Value::Error(k),
    }
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// A count argument: truncated, must not be negative.
fn count_arg(args: &[Arg], i: usize, default: f64) -> Result<usize, ErrorKind> {
    let n = opt_num(args, i, default)?.trunc();
    if n < 0.0 {
        Err(ErrorKind::Value)
    } else {
        Ok(n.min(1e9) as usize)
    }
}

/// A 1-based position argument.
fn pos_arg(args: &[Arg], i: usize, default: f64) -> Result<usize, ErrorKind> {
    let n = opt_num(args, i, default)?.trunc();
    if n < 1.0 {
        Err(ErrorKind::Value)
    } else {
        Ok(n.min(1e9) as usize)
    }
}

pub(super) fn register(r: &mut Registry) {
    r.scalar("concatenate", 1, None, |_, a| text(a.iter().map(txt).collect::<Result<String, _>>()));
    r.fixed("exact", 2, |_, a| match (txt(&a[0]), txt(&a[1])) {
        (Ok(x), Ok(y)) => Value::Boolean(x == y),
        (Err(k), _) | (_, Err(k)) => Value::Error(k),
    });
    r.scalar("find", 2, Some(3), |_, a| number_pos(find(a, false)));
    r.scalar("search", 2, Some(3), |_, a| number_pos(find(a, true)));
    r.scalar("left", 1, Some(2), |_, a| {
        text((|| {
            let s = txt(&a[0])?;
            let n = count_arg(a, 1, 1.0)?;
            Ok(s.chars().take(n).collect())
        })())
    });
    r.scalar("right", 1, Some(2), |_, a| {
        text((|| {
            let s = chars(&txt(&a[0])?);
            let n = count_arg(a, 1, 1.0)?.min(s.len());
            Ok(s[s.len() - n..].iter().collect())
        })())
    });
    r.fixed("mid", 3, |_, a| {
        text((|| {
            let s = txt(&a[0])?;
            let start = pos_arg(a, 1, 1.0)?;
            let n = count_arg(a, 2, 0.0)?;
            Ok(s.chars().skip(start - 1).take(n).collect())
        })())
    });
    r.fixed("len", 1, |_, a| match txt(&a[0]) {
        Ok(s) => Value::Number(s.chars().count() as f64),
        Err(k) => Value::Error(k),
    });
    r.fixed("lower", 1, |_, a| text(txt(&a[0]).map(|s| s.to_lowercase())));
    r.fixed("upper", 1, |_, a| text(txt(&a[0]).map(|s| s.to_uppercase())));
    r.fixed("proper", 1, |_, a| text(txt(&a[0]).map(|s| proper(&s))));
    r.fixed("replace", 4, |_, a| {
        text((|| {
            let s = chars(&txt(&a[0])?);
            let start = pos_arg(a, 1, 1.0)?;
            let n = count_arg(a, 2, 0.0)?;
            let new = txt(&a[3])?;
            let from = (start - 1).min(s.len());
            let to = from.saturating_add(n).min(s.len());
            let mut out: String = s[..from].iter().collect();
            out.push_str(&new);
            out.extend(&s[to..]);
            Ok(out)
        })())
    });
    r.fixed("rept", 2, |_, a| {
        text((|| {
            let s = txt(&a[0])?;
            let n = count_arg(a, 1, 0.0)?;
            if s.chars().count().saturating_mul(n) > MAX_TEXT {
                return Err(ErrorKind::Value);
            }
            Ok(s.repeat(n))
        })())
    });
    r.scalar("substitute", 3, Some(4), |_, a| {
        text((|| {
            let s = txt(&a[0])?;
            let old = txt(&a[1])?;
            let new = txt(&a[2])?;
            if old.is_empty() {
                return Ok(s);
            }
            match a.get(3) {
                None => Ok(s.replace(&old, &new)),
                Some(arg) => {
                    let k = int(arg)?;
                    if k < 1.0 {
                        return Err(ErrorKind::Value);
                    }
                    Ok(match s.match_indices(&old).nth(k as usize - 1) {
                        Some((i, _)) => format!("{}{}{}", &s[..i], new, &s[i + old.len()..]),
                        None => s,
                    })
                }
            }
        })())
    });
    r.fixed("t", 1, |_, a| match a[0].scalar() {
        Value::Text(s) => Value::Text(s),
        Value::Error(k) => Value::Error(k),
        _ => Value::text(""),
    });
    r.fixed("trim", 1, |_, a| {
        text(txt(&a[0]).map(|s| s.split(' ').filter(|w| !w.is_empty()).collect::<Vec<_>>().join(" ")))
    });
    r.fixed("value", 1, |_, a| match a[0].scalar() {
        Value::Number(n) => Value::Number(n),
        Value::Blank => Value::Number(0.0),
        Value::Error(k) => Value::Error(k),
        Value::Text(s) => match parse_number_text(&s) {
            Some(n) => Value::Number(n),
            None => match s.trim_matches(' ').strip_suffix('%').and_then(parse_number_text) {
                Some(n) => Value::number(n / 100.0),
                None => Value::Error(ErrorKind::Value),
            },
        },
        _ => Value::Error(ErrorKind::Value),
    });
}

fn number_pos(r: Result<usize, ErrorKind>) -> Value {
    match r {
        Ok(p) => Value::Number(p as f64),
        Err(k) => Value::Error(k),
    }
}

/// FIND (case-sensitive, literal) and SEARCH (case-insensitive, wildcards).
fn find(a: &[Arg], search: bool) -> Result<usize, ErrorKind> {
    let needle = txt(&a[0])?;
    let hay = txt(&a[1])?;
    let start = pos_arg(a, 2, 1.0)?;
    let (needle, hay) = if search {
        (chars(&needle.to_lowercase()), chars(&hay.to_lowercase()))
    } else {
        (chars(&needle), chars(&hay))
    };
    if start > hay.len() + 1 {
        return Err(ErrorKind::Value);
    }
    for i in start - 1..=hay.len() {
        let hit = if search {
            !wildcard_prefix(&needle, &hay[i..]).is_empty()
        } else {
            hay[i..].starts_with(&needle)
        };
        if hit {
            return Ok(i + 1);
        }
    }
    Err(ErrorKind::Value)
}

/// Upper-cases letters that follow a non-letter, lower-cases the rest.
fn proper(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev_letter = false;
    for c in s.chars() {
        if c.is_alphabetic() {
            if prev_letter {
                out.extend(c.to_lowercase());
            } else {
                out.extend(c.to_uppercase());
            }
            prev_letter = true;
        } else {
            out.push(c);
            prev_letter = false;
        }
    }
    out
}
