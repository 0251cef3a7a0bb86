use super::{collect_numbers, number, Criterion, Registry};
use crate::engine::Arg;
use crate::value::{parse_number_text, ErrorKind, Value};

pub(super) fn register(r: &mut Registry) {
    r.scalar("average", 1, None, |_, a| {
        number(collect_numbers(a).and_then(|v| {
            if v.is_empty() {
                Err(ErrorKind::Div0)
            } else {
                Ok(v.iter().sum::<f64>() / v.len() as f64)
            }
        }))
    });
    r.scalar("count", 1, None, |_, a| Value::Number(count(a) as f64));
    r.scalar("counta", 1, None, |_, a| {
        let n: usize = a
            .iter()
            .map(|arg| match arg {
                Arg::Ref(arr) => arr.data.iter().filter(|v| !v.is_blank()).count(),
                Arg::Value(v) => usize::from(!v.is_blank()),
            })
            .sum();
        Value::Number(n as f64)
    });
    r.fixed("countblank", 1, |_, a| match &a[0] {
        Arg::Ref(arr) => Value::Number(
            arr.data.iter().filter(|v| matches!(v, Value::Blank) || matches!(v, Value::Text(s) if s.is_empty())).count()
                as f64,
        ),
        Arg::Value(Value::Error(k)) => Value::Error(*k),
        Arg::Value(_) => Value::Error(ErrorKind::Value),
    });
    r.fixed("countif", 2, |_, a| {
        let Arg::Ref(arr) = &a[0] else {
            return match &a[0] {
                Arg::Value(Value::Error(k)) => Value::Error(*k),
                _ => Value::Error(ErrorKind::Value),
            };
        };
        match Criterion::parse(&a[1].scalar()) {
            Ok(c) => Value::Number(arr.data.iter().filter(|v| c.matches(v)).count() as f64),
            Err(k) => Value::Error(k),
        }
    });
    r.scalar("max", 1, None, |_, a| {
        number(collect_numbers(a).map(|v| v.into_iter().reduce(f64::max).unwrap_or(0.0)))
    });
    r.scalar("min", 1, None, |_, a| {
        number(collect_numbers(a).map(|v| v.into_iter().reduce(f64::min).unwrap_or(0.0)))
    });
    r.scalar("median", 1, None, |_, a| number(collect_numbers(a).and_then(median)));
    r.scalar("mode", 1, None, |_, a| number(collect_numbers(a).and_then(mode)));
    r.scalar("var", 1, None, |_, a| number(collect_numbers(a).and_then(|v| variance(&v, true))));
    r.scalar("varp", 1, None, |_, a| number(collect_numbers(a).and_then(|v| variance(&v, false))));
    r.scalar("stdev", 1, None, |_, a| number(collect_numbers(a).and_then(|v| variance(&v, true)).map(f64::sqrt)));
    r.scalar("stdevp", 1, None, |_, a| {
        number(collect_numbers(a).and_then(|v| variance(&v, false)).map(f64::sqrt))
    });
}

/// Numbers in references; direct arguments that are numbers, booleans or
/// numeric text. Errors are skipped, never propagated.
fn count(args: &[Arg]) -> usize {
    args.iter()
        .map(|a| match a {
            Arg::Ref(arr) => arr.data.iter().filter(|v| matches!(v, Value::Number(_))).count(),
            Arg::Value(Value::Number(_) | Value::Boolean(_)) => 1,
            Arg::Value(Value::Text(s)) => usize::from(parse_number_text(s).is_some()),
            Arg::Value(_) => 0,
        })
        .sum()
}

fn median(mut v: Vec<f64>) -> Result<f64, ErrorKind> {
    if v.is_empty() {
        return Err(ErrorKind::Num);
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Most frequent value; ties go to the value seen first.
fn mode(v: Vec<f64>) -> Result<f64, ErrorKind> {
    let mut best: Option<(f64, usize)> = None;
    for (i, x) in v.iter().enumerate() {
        if v[..i].contains(x) {
            continue;
        }
        let c = v[i..].iter().filter(|y| *y == x).count();
        if c > 1 && best.is_none_or(|(_, bc)| c > bc) {
            best = Some((*x, c));
        }
    }
    best.map(|(x, _)| x).ok_or(ErrorKind::NA)
}

fn variance(v: &[f64], sample: bool) -> Result<f64, ErrorKind> {
    let n = v.len();
    if n == 0 || (sample && n == 1) {
        return Err(ErrorKind::Div0);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(ss / if sample { (n - 1) as f64 } else { n as f64 })
}
