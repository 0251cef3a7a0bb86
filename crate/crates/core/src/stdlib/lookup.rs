use std::cmp::Ordering;

use super::{int, opt_num, wildcard_match, Imp, Registry};
use crate::engine::{Arg, Array, EvalContext};
use crate::formula::Expr;
use crate::value::{coerce_boolean, compare, ErrorKind, Value};

pub(super) fn register(r: &mut Registry) {
    r.add("choose", 2, None, Imp::Lazy(choose));
    r.add("index", 2, Some(3), Imp::Ref(index));
    r.scalar("vlookup", 3, Some(4), |_, a| table_lookup(a, true));
    r.scalar("hlookup", 3, Some(4), |_, a| table_lookup(a, false));
    r.scalar("match", 2, Some(3), |_, a| {
        let needle = a[0].scalar();
        if let Value::Error(k) = needle {
            return Value::Error(k);
        }
        let Arg::Ref(arr) = &a[1] else {
            return Value::Error(ErrorKind::NA);
        };
        if arr.rows != 1 && arr.cols != 1 {
            return Value::Error(ErrorKind::NA);
        }
        let kind = match opt_num(a, 2, 1.0) {
            Ok(k) => k.trunc(),
            Err(k) => return Value::Error(k),
        };
        let found = if kind == 0.0 {
            exact(&arr.data, &needle)
        } else {
            approximate(&arr.data, &needle, if kind > 0.0 { Ordering::Less } else { Ordering::Greater })
        };
        match found {
            Some(i) => Value::Number((i + 1) as f64),
            None => Value::Error(ErrorKind::NA),
        }
    });
}

fn choose(ctx: &mut EvalContext<'_>, args: &[Expr]) -> Arg {
    match int(&Arg::Value(ctx.eval(&args[0]))) {
        Ok(i) if i >= 1.0 && (i as usize) < args.len() => ctx.eval_arg(&args[i as usize]),
        Ok(_) => Arg::Value(Value::Error(ErrorKind::Value)),
        Err(k) => Arg::Value(Value::Error(k)),
    }
}

/// INDEX(ref, row, [col]). A zero row or column selects the whole column
/// or row, which stays a reference.
fn index(_: &mut EvalContext<'_>, a: &[Arg]) -> Arg {
    let err = |k| Arg::Value(Value::Error(k));
    let arr = match &a[0] {
        Arg::Ref(arr) => arr.clone(),
        Arg::Value(Value::Error(k)) => return err(*k),
        Arg::Value(v) => Array::column(vec![v.clone()]),
    };
    let (mut row, mut col) = match (int(&a[1]), a.get(2).map(int).transpose()) {
        (Ok(r), Ok(c)) => (r, c),
        (Err(k), _) | (_, Err(k)) => return err(k),
    };
    // a single row indexed by one number indexes its columns
    if col.is_none() && arr.rows == 1 && arr.cols > 1 {
        col = Some(row);
        row = 0.0;
    }
    let col = col.unwrap_or(if arr.cols == 1 { 1.0 } else { 0.0 });
    if row < 0.0 || col < 0.0 || row as usize > arr.rows || col as usize > arr.cols {
        return err(ErrorKind::Ref);
    }
    let (row, col) = (row as usize, col as usize);
    match (row, col) {
        (0, 0) => Arg::Ref(arr),
        (0, c) => Arg::Ref(Array::column((0..arr.rows).map(|r| arr.get(r, c - 1).clone()).collect())),
        (r, 0) => Arg::Ref(Array { rows: 1, cols: arr.cols, data: (0..arr.cols).map(|c| arr.get(r - 1, c).clone()).collect() }),
        (r, c) => Arg::Ref(Array::column(vec![arr.get(r - 1, c - 1).clone()])),
    }
}

/// VLOOKUP (`vertical`) and HLOOKUP.
fn table_lookup(a: &[Arg], vertical: bool) -> Value {
    let needle = a[0].scalar();
    if let Value::Error(k) = needle {
        return Value::Error(k);
    }
    let Arg::Ref(table) = &a[1] else {
        return match &a[1] {
            Arg::Value(Value::Error(k)) => Value::Error(*k),
            _ => Value::Error(ErrorKind::NA),
        };
    };
    let idx = match int(&a[2]) {
        Ok(i) => i,
        Err(k) => return Value::Error(k),
    };
    let approx = match a.get(3).map(|x| coerce_boolean(&x.scalar())).transpose() {
        Ok(b) => b.unwrap_or(true),
        Err(k) => return Value::Error(k),
    };
    let (lines, width) = if vertical { (table.rows, table.cols) } else { (table.cols, table.rows) };
    if idx < 1.0 {
        return Value::Error(ErrorKind::Value);
    }
    if idx as usize > width {
        return Value::Error(ErrorKind::Ref);
    }
    let key = |i: usize| if vertical { table.get(i, 0).clone() } else { table.get(0, i).clone() };
    let keys: Vec<Value> = (0..lines).map(key).collect();
    let found = if approx { approximate(&keys, &needle, Ordering::Less) } else { exact(&keys, &needle) };
    match found {
        Some(i) => {
            let c = idx as usize - 1;
            if vertical {
                table.get(i, c).clone()
            } else {
                table.get(c, i).clone()
            }
        }
        None => Value::Error(ErrorKind::NA),
    }
}

fn same_kind(a: &Value, b: &Value) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

/// First position equal to `needle`; text matches case-insensitively with
/// wildcards.
fn exact(values: &[Value], needle: &Value) -> Option<usize> {
    values.iter().position(|v| match (needle, v) {
        (Value::Text(p), Value::Text(s)) => wildcard_match(p, s),
        _ => same_kind(needle, v) && compare(v, needle) == Ok(Ordering::Equal),
    })
}

/// Sorted lookup. With `Less`, the last value not greater than `needle`
/// before the first that exceeds it (ascending data); with `Greater`, the
/// mirror image for descending data. Values of another type are skipped.
fn approximate(values: &[Value], needle: &Value, keep: Ordering) -> Option<usize> {
    let mut best = None;
    for (i, v) in values.iter().enumerate() {
        if !same_kind(needle, v) {
            continue;
        }
        match compare(v, needle) {
            Ok(Ordering::Equal) => best = Some(i),
            Ok(o) if o == keep => best = Some(i),
            _ => break,
        }
    }
    best
}
