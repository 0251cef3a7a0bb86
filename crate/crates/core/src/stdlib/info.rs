use super::Registry;
use crate::value::{ErrorKind, Value};

pub(super) fn register(r: &mut Registry) {
    macro_rules! is {
        ($name:literal, $p:pat $(if $g:expr)?) => {
            r.fixed($name, 1, |_, a| Value::Boolean(matches!(a[0].scalar(), $p $(if $g)?)));
        };
    }
    is!("isblank", Value::Blank);
    is!("iserror", Value::Error(_));
    is!("iserr", Value::Error(k) if k != ErrorKind::NA);
    is!("isna", Value::Error(ErrorKind::NA));
    is!("islogical", Value::Boolean(_));
    is!("isnumber", Value::Number(_));
    is!("istext", Value::Text(_));
    r.fixed("isnontext", 1, |_, a| Value::Boolean(!matches!(a[0].scalar(), Value::Text(_))));
    r.fixed("n", 1, |_, a| match a[0].scalar() {
        Value::Number(n) => Value::Number(n),
        Value::Boolean(b) => Value::Number(if b { 1.0 } else { 0.0 }),
        Value::Error(k) => Value::Error(k),
        _ => Value::Number(0.0),
    });
    r.fixed("na", 0, |_, _| Value::Error(ErrorKind::NA));
}
