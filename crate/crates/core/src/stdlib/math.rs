use super::{collect_numbers, num, number, opt_num, Criterion, Registry};
use crate::engine::{power, Arg};
use crate::value::{ErrorKind, Value};

pub(super) fn register(r: &mut Registry) {
    macro_rules! un {
        ($name:literal, $f:expr) => {
            r.fixed($name, 1, |_, a| {
                let f: fn(f64) -> Result<f64, ErrorKind> = $f;
                number(num(&a[0]).and_then(f))
            });
        };
    }
    un!("abs", |x| Ok(x.abs()));
    un!("acos", |x| domain(x.acos()));
    un!("asin", |x| domain(x.asin()));
    un!("atan", |x| Ok(x.atan()));
    un!("cos", |x| Ok(x.cos()));
    un!("sin", |x| Ok(x.sin()));
    un!("tan", |x| Ok(x.tan()));
    un!("degrees", |x| Ok(x.to_degrees()));
    un!("radians", |x| Ok(x.to_radians()));
    un!("exp", |x| Ok(x.exp()));
    un!("int", |x| Ok(x.floor()));
    un!("sign", |x| Ok(if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 }));
    un!("sqrt", |x| if x < 0.0 { Err(ErrorKind::Num) } else { Ok(x.sqrt()) });
    un!("ln", |x| if x <= 0.0 { Err(ErrorKind::Num) } else { Ok(x.ln()) });
    un!("log10", |x| if x <= 0.0 { Err(ErrorKind::Num) } else { Ok(x.log10()) });
    un!("even", |x| {
        let m = (x.abs() / 2.0).ceil() * 2.0;
        Ok(m.copysign(x))
    });
    un!("odd", |x| {
        let m = ((x.abs() + 1.0) / 2.0).ceil() * 2.0 - 1.0;
        Ok(if x < 0.0 { -m } else { m })
    });
    un!("fact", |x| {
        let n = x.trunc();
        if n < 0.0 || n > 170.0 {
            return Err(ErrorKind::Num);
        }
        Ok((1..=n as u32).fold(1.0, |acc, k| acc * k as f64))
    });

    r.fixed("pi", 0, |_, _| Value::Number(std::f64::consts::PI));
    r.fixed("rand", 0, |ctx, _| Value::Number(ctx.random()));
    r.fixed("atan2", 2, |_, a| {
        number((|| {
            let (x, y) = (num(&a[0])?, num(&a[1])?);
            if x == 0.0 && y == 0.0 {
                return Err(ErrorKind::Div0);
            }
            Ok(y.atan2(x))
        })())
    });
    r.scalar("log", 1, Some(2), |_, a| {
        number((|| {
            let x = num(&a[0])?;
            let base = opt_num(a, 1, 10.0)?;
            if x <= 0.0 || base <= 0.0 {
                return Err(ErrorKind::Num);
            }
            if base == 1.0 {
                return Err(ErrorKind::Div0);
            }
            Ok(x.ln() / base.ln())
        })())
    });
    r.fixed("mod", 2, |_, a| {
        number((|| {
            let (n, d) = (num(&a[0])?, num(&a[1])?);
            if d == 0.0 {
                return Err(ErrorKind::Div0);
            }
            let m = n - d * (n / d).floor();
            // n/d rounding can leave m a hair outside [0, d)
            Ok(if m.abs() >= d.abs() { 0.0 } else { m })
        })())
    });
    r.fixed("power", 2, |_, a| match (num(&a[0]), num(&a[1])) {
        (Ok(x), Ok(y)) => power(x, y),
        (Err(k), _) | (_, Err(k)) => Value::Error(k),
    });
    r.scalar("product", 1, None, |_, a| {
        number(collect_numbers(a).map(|v| if v.is_empty() { 0.0 } else { v.iter().product() }))
    });
    r.scalar("sum", 1, None, |_, a| number(collect_numbers(a).map(|v| v.iter().sum())));
    r.scalar("round", 1, Some(2), |_, a| {
        number((|| Ok(round_half_away(num(&a[0])?, opt_num(a, 1, 0.0)?.trunc())))())
    });
    r.scalar("trunc", 1, Some(2), |_, a| {
        number((|| Ok(scaled(num(&a[0])?, opt_num(a, 1, 0.0)?.trunc(), f64::trunc)))())
    });
    r.scalar("sumif", 2, Some(3), |_, a| {
        let Arg::Ref(range) = &a[0] else {
            return Value::Error(ErrorKind::Value);
        };
        let crit = match Criterion::parse(&a[1].scalar()) {
            Ok(c) => c,
            Err(k) => return Value::Error(k),
        };
        let sum_range = match a.get(2) {
            None => range,
            Some(Arg::Ref(s)) => s,
            Some(_) => return Value::Error(ErrorKind::Value),
        };
        let mut total = 0.0;
        for r in 0..range.rows {
            for c in 0..range.cols {
                if !crit.matches(range.get(r, c)) || r >= sum_range.rows || c >= sum_range.cols {
                    continue;
                }
                match sum_range.get(r, c) {
                    Value::Number(n) => total += n,
                    Value::Error(k) => return Value::Error(*k),
                    _ => {}
                }
            }
        }
        Value::number(total)
    });
}

fn domain(x: f64) -> Result<f64, ErrorKind> {
    if x.is_nan() {
        Err(ErrorKind::Num)
    } else {
        Ok(x)
    }
}

/// Applies `f` at `digits` decimal places. The scaled value is first cut
/// to 15 significant digits so that decimal inputs like 2.675 behave as
/// written rather than as their binary approximation.
fn scaled(x: f64, digits: f64, f: fn(f64) -> f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let d = digits.clamp(-308.0, 308.0) as i32;
    let scale = 10f64.powi(d.abs());
    let y = if d >= 0 { x * scale } else { x / scale };
    let y = format!("{y:.14e}").parse::<f64>().unwrap_or(y);
    let r = f(y);
    if d >= 0 {
        r / scale
    } else {
        r * scale
    }
}

pub(crate) fn round_half_away(x: f64, digits: f64) -> f64 {
    scaled(x, digits, f64::round)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_half_away(2.5, 0.0), 3.0);
        assert_eq!(round_half_away(-2.5, 0.0), -3.0);
        assert_eq!(round_half_away(2.675, 2.0), 2.68);
        assert_eq!(round_half_away(1234.567, -2.0), 1200.0);
        assert_eq!(round_half_away(0.125, 2.0), 0.13);
        assert_eq!(scaled(-8.97, 1.0, f64::trunc), -8.9);
    }
}
