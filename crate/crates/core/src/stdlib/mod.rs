//! Built-in functions.
//!
//! Business-logic functions follow desktop-spreadsheet semantics; platform
//! functions (`html.*`, `form.*`, `create.button`) evaluate to render
//! directives and never touch the site.

mod datetime;
mod info;
mod logical;
mod lookup;
mod math;
mod platform;
mod stats;
mod text;

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::engine::{Arg, EvalContext};
use crate::formula::Expr;
use crate::value::{coerce_number, coerce_text, parse_number_text, ErrorKind, Value};

pub use datetime::{date_serial, datetime_serial, serial_to_datetime};
pub use platform::{ControlKind, MenuEntry, RenderDirective};

/// Arity and evaluation traits of a registered function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionInfo {
    pub min_args: usize,
    /// `None` for variadic.
    pub max_args: Option<usize>,
    /// Receives unevaluated arguments.
    pub lazy: bool,
    /// Reads the pass clock or seed.
    pub volatile: bool,
}

pub(crate) type ScalarFn = fn(&mut EvalContext<'_>, &[Arg]) -> Value;
pub(crate) type RefFn = fn(&mut EvalContext<'_>, &[Arg]) -> Arg;
pub(crate) type LazyFn = fn(&mut EvalContext<'_>, &[Expr]) -> Arg;

#[derive(Clone, Copy)]
pub(crate) enum Imp {
    Scalar(ScalarFn),
    /// May return a reference (INDEX).
    Ref(RefFn),
    Lazy(LazyFn),
}

pub(crate) struct Entry {
    info: FunctionInfo,
    imp: Imp,
}

pub(crate) struct Registry(HashMap<&'static str, Entry>);

impl Registry {
    pub(crate) fn add(&mut self, name: &'static str, min: usize, max: Option<usize>, imp: Imp) {
        let lazy = matches!(imp, Imp::Lazy(_));
        let info = FunctionInfo { min_args: min, max_args: max, lazy, volatile: false };
        self.0.insert(name, Entry { info, imp });
    }

    pub(crate) fn scalar(&mut self, name: &'static str, min: usize, max: Option<usize>, f: ScalarFn) {
        self.add(name, min, max, Imp::Scalar(f));
    }

    /// Fixed arity.
    pub(crate) fn fixed(&mut self, name: &'static str, n: usize, f: ScalarFn) {
        self.add(name, n, Some(n), Imp::Scalar(f));
    }

    fn volatile(&mut self, name: &'static str) {
        if let Some(e) = self.0.get_mut(name) {
            e.info.volatile = true;
        }
    }
}

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r = Registry(HashMap::new());
        logical::register(&mut r);
        math::register(&mut r);
        stats::register(&mut r);
        text::register(&mut r);
        datetime::register(&mut r);
        lookup::register(&mut r);
        info::register(&mut r);
        platform::register(&mut r);
        for name in ["now", "today", "rand"] {
            r.volatile(name);
        }
        r
    })
}

/// Traits of a registered function; `None` when unknown.
pub fn function_info(name: &str) -> Option<FunctionInfo> {
    registry().0.get(name).map(|e| e.info)
}

pub fn is_volatile(name: &str) -> bool {
    function_info(name).is_some_and(|i| i.volatile)
}

/// Every registered name, sorted.
pub fn function_names() -> Vec<&'static str> {
    let mut v: Vec<_> = registry().0.keys().copied().collect();
    v.sort_unstable();
    v
}

/// Calls `name` in value position.
pub fn call(name: &str, args: &[Expr], ctx: &mut EvalContext<'_>) -> Value {
    call_arg(name, args, ctx).scalar()
}

/// Calls `name` in argument position, where a reference result stays a
/// reference.
pub fn call_arg(name: &str, args: &[Expr], ctx: &mut EvalContext<'_>) -> Arg {
    let Some(entry) = registry().0.get(name) else {
        return Arg::Value(Value::Error(ErrorKind::Name));
    };
    let info = entry.info;
    if args.len() < info.min_args || info.max_args.is_some_and(|m| args.len() > m) {
        return Arg::Value(Value::Error(ErrorKind::Value));
    }
    match entry.imp {
        Imp::Lazy(f) => f(ctx, args),
        Imp::Scalar(f) => {
            let vals: Vec<Arg> = args.iter().map(|a| ctx.eval_arg(a)).collect();
            Arg::Value(f(ctx, &vals))
        }
        Imp::Ref(f) => {
            let vals: Vec<Arg> = args.iter().map(|a| ctx.eval_arg(a)).collect();
            f(ctx, &vals)
        }
    }
}

// Argument helpers shared by the function modules. Each returns the
// argument's error in `Err`.

pub(crate) fn num(a: &Arg) -> Result<f64, ErrorKind> {
    coerce_number(&a.scalar())
}

pub(crate) fn int(a: &Arg) -> Result<f64, ErrorKind> {
    num(a).map(f64::trunc)
}

pub(crate) fn txt(a: &Arg) -> Result<String, ErrorKind> {
    coerce_text(&a.scalar())
}

pub(crate) fn opt_num(args: &[Arg], i: usize, default: f64) -> Result<f64, ErrorKind> {
    args.get(i).map_or(Ok(default), num)
}

/// Numbers for an aggregate. Inside references only numbers count and
/// errors propagate; direct arguments are coerced.
pub(crate) fn collect_numbers(args: &[Arg]) -> Result<Vec<f64>, ErrorKind> {
    let mut out = Vec::new();
    for a in args {
        match a {
            Arg::Ref(arr) => {
                for v in &arr.data {
                    match v {
                        Value::Number(n) => out.push(*n),
                        Value::Error(k) => return Err(*k),
                        _ => {}
                    }
                }
            }
            Arg::Value(Value::Blank) => {}
            Arg::Value(v) => out.push(coerce_number(v)?),
        }
    }
    Ok(out)
}

/// Turns a numeric result into a value (`#NUM!` for non-finite).
pub(crate) fn number(r: Result<f64, ErrorKind>) -> Value {
    match r {
        Ok(n) => Value::number(n),
        Err(k) => Value::Error(k),
    }
}

/// Parses comparison criteria as used by COUNTIF and SUMIF.
#[derive(Debug, Clone)]
pub(crate) struct Criterion {
    op: CritOp,
    operand: Value,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CritOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Criterion {
    pub(crate) fn parse(v: &Value) -> Result<Criterion, ErrorKind> {
        let text = match v {
            Value::Error(k) => return Err(*k),
            Value::Text(s) => s.clone(),
            other => return Ok(Criterion { op: CritOp::Eq, operand: other.clone() }),
        };
        let (op, rest) = [
            ("<=", CritOp::Le),
            (">=", CritOp::Ge),
            ("<>", CritOp::Ne),
            ("<", CritOp::Lt),
            (">", CritOp::Gt),
            ("=", CritOp::Eq),
        ]
        .iter()
        .find_map(|(p, op)| text.strip_prefix(p).map(|r| (*op, r.to_string())))
        .unwrap_or((CritOp::Eq, text));
        let operand = if rest.is_empty() {
            Value::Blank
        } else if let Some(n) = parse_number_text(&rest) {
            Value::Number(n)
        } else if rest.eq_ignore_ascii_case("true") {
            Value::Boolean(true)
        } else if rest.eq_ignore_ascii_case("false") {
            Value::Boolean(false)
        } else {
            Value::Text(rest)
        };
        Ok(Criterion { op, operand })
    }

    pub(crate) fn matches(&self, v: &Value) -> bool {
        let eq = match (&self.operand, v) {
            (Value::Blank, Value::Blank) => true,
            (Value::Blank, Value::Text(s)) => s.is_empty(),
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Boolean(a), Value::Boolean(b)) => a == b,
            (Value::Text(p), Value::Text(s)) => wildcard_match(p, s),
            _ => false,
        };
        match self.op {
            CritOp::Eq => eq,
            CritOp::Ne => !eq,
            op => {
                let ord = match (&self.operand, v) {
                    (Value::Number(a), Value::Number(b)) => b.partial_cmp(a),
                    (Value::Text(a), Value::Text(b)) => Some(b.to_lowercase().cmp(&a.to_lowercase())),
                    _ => None,
                };
                match ord {
                    Some(o) => match op {
                        CritOp::Lt => o.is_lt(),
                        CritOp::Le => o.is_le(),
                        CritOp::Gt => o.is_gt(),
                        _ => o.is_ge(),
                    },
                    None => false,
                }
            }
        }
    }
}

/// Whole-string, case-insensitive match with `*`, `?` and `~` escapes.
pub(crate) fn wildcard_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.to_lowercase().chars().collect();
    let t: Vec<char> = text.to_lowercase().chars().collect();
    wildcard_prefix(&p, &t).contains(&t.len())
}

/// All lengths of prefixes of `t` that `p` matches.
pub(crate) fn wildcard_prefix(p: &[char], t: &[char]) -> Vec<usize> {
    // positions in t reachable after consuming the pattern so far
    let mut states = vec![0usize];
    let mut i = 0;
    while i < p.len() {
        let mut next = Vec::new();
        match p[i] {
            '*' => {
                let lo = states.iter().copied().min().unwrap_or(t.len() + 1);
                next.extend(lo..=t.len());
            }
            c => {
                let (lit, any) = if c == '~' && i + 1 < p.len() && matches!(p[i + 1], '*' | '?' | '~') {
                    i += 1;
                    (p[i], false)
                } else {
                    (c, c == '?')
                };
                for &s in &states {
                    if s < t.len() && (any || t[s] == lit) {
                        next.push(s + 1);
                    }
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        states = next;
        if states.is_empty() {
            break;
        }
        i += 1;
    }
    states
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn info_table() {
        let f = function_info("if").unwrap();
        assert_eq!((f.min_args, f.max_args, f.lazy, f.volatile), (2, Some(3), true, false));
        let f = function_info("rand").unwrap();
        assert_eq!((f.min_args, f.max_args, f.volatile), (0, Some(0), true));
        assert!(function_info("nosuchfn").is_none());
        assert!(function_info("html.box.4x8").is_some());
        assert!(function_info("html.box.2x2").is_none());
    }

    #[test]
    fn registered_set_is_exact() {
        let expected = "and false if not or true \
            abs acos asin atan atan2 cos degrees even exp fact int ln log log10 mod odd pi power product \
            radians rand round sign sin sqrt sum sumif tan trunc \
            average count counta countblank countif max median min mode stdev stdevp var varp \
            concatenate exact find left len lower mid proper replace rept right search substitute t trim upper value \
            date day hour minute month now second time today weekday year \
            choose hlookup index match vlookup \
            isblank iserr iserror islogical isna isnontext isnumber istext n na \
            html.box.4x8 html.menu form.input form.select form.radio create.button";
        let mut want: Vec<&str> = expected.split_whitespace().collect();
        want.sort_unstable();
        assert_eq!(function_names(), want);
    }

    #[test]
    fn wildcards() {
        assert!(wildcard_match("a*c", "ABBC"));
        assert!(wildcard_match("a?c", "abc"));
        assert!(!wildcard_match("a?c", "ac"));
        assert!(wildcard_match("*", ""));
        assert!(wildcard_match("a~*", "a*"));
        assert!(!wildcard_match("a~*", "ab"));
    }

    #[test]
    fn criteria() {
        let c = Criterion::parse(&Value::text(">3")).unwrap();
        assert!(c.matches(&Value::Number(4.0)));
        assert!(!c.matches(&Value::text("5")));
        let c = Criterion::parse(&Value::text("<>")).unwrap();
        assert!(c.matches(&Value::Number(0.0)));
        assert!(!c.matches(&Value::Blank));
        let c = Criterion::parse(&Value::text("ap*")).unwrap();
        assert!(c.matches(&Value::text("Apple")));
        let c = Criterion::parse(&Value::Number(1.0)).unwrap();
        assert!(c.matches(&Value::Number(1.0)) && !c.matches(&Value::Boolean(true)));
    }
}
