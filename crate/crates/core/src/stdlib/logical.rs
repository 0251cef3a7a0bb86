use super::{Imp, Registry};
use crate::engine::{Arg, EvalContext};
use crate::formula::Expr;
use crate::value::{coerce_boolean, ErrorKind, Value};

pub(super) fn register(r: &mut Registry) {
    r.add("and", 1, None, Imp::Lazy(and));
    r.add("or", 1, None, Imp::Lazy(or));
    r.add("if", 2, Some(3), Imp::Lazy(if_));
    r.fixed("not", 1, |_, a| match coerce_boolean(&a[0].scalar()) {
        Ok(b) => Value::Boolean(!b),
        Err(k) => Value::Error(k),
    });
    r.fixed("true", 0, |_, _| Value::Boolean(true));
    r.fixed("false", 0, |_, _| Value::Boolean(false));
}

/// Truth values of every argument. References contribute their numbers and
/// booleans only; all arguments are evaluated, so an error anywhere wins.
fn truths(ctx: &mut EvalContext<'_>, args: &[Expr]) -> Result<Vec<bool>, ErrorKind> {
    let mut out = Vec::new();
    let mut first_err = None;
    for e in args {
        match ctx.eval_arg(e) {
            Arg::Ref(arr) => {
                for v in &arr.data {
                    match v {
                        Value::Number(n) => out.push(*n != 0.0),
                        Value::Boolean(b) => out.push(*b),
                        Value::Error(k) => {
                            first_err.get_or_insert(*k);
                        }
                        _ => {}
                    }
                }
            }
            Arg::Value(v) => match coerce_boolean(&v) {
                Ok(b) => out.push(b),
                Err(k) => {
                    first_err.get_or_insert(k);
                }
            },
        }
    }
    match first_err {
        Some(k) => Err(k),
        None if out.is_empty() => Err(ErrorKind::Value),
        None => Ok(out),
    }
}

fn and(ctx: &mut EvalContext<'_>, args: &[Expr]) -> Arg {
    Arg::Value(match truths(ctx, args) {
        Ok(v) => Value::Boolean(v.iter().all(|b| *b)),
        Err(k) => Value::Error(k),
    })
}

fn or(ctx: &mut EvalContext<'_>, args: &[Expr]) -> Arg {
    Arg::Value(match truths(ctx, args) {
        Ok(v) => Value::Boolean(v.iter().any(|b| *b)),
        Err(k) => Value::Error(k),
    })
}

fn if_(ctx: &mut EvalContext<'_>, args: &[Expr]) -> Arg {
    let cond = ctx.eval(&args[0]);
    match coerce_boolean(&cond) {
        Err(k) => Arg::Value(Value::Error(k)),
        Ok(true) => ctx.eval_arg(&args[1]),
        Ok(false) => match args.get(2) {
            Some(e) => ctx.eval_arg(e),
            None => Arg::Value(Value::Boolean(false)),
        },
    }
}
