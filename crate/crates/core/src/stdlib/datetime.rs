//! Dates are serial numbers: days since 1899-12-30, time as the fraction.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use super::{int, num, number, opt_num, Registry};
use crate::value::{ErrorKind, Value};

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1899, 12, 30).expect("valid epoch")
}

/// Serial number of a calendar date, normalizing month and day overflow
/// like DATE does.
pub fn date_serial(year: i64, month: i64, day: i64) -> Option<f64> {
    let months = year.checked_mul(12)?.checked_add(month - 1)?;
    let (y, m) = (months.div_euclid(12), months.rem_euclid(12) + 1);
    let first = NaiveDate::from_ymd_opt(i32::try_from(y).ok()?, m as u32, 1)?;
    let date = first.checked_add_signed(Duration::try_days(day - 1)?)?;
    Some((date - epoch()).num_days() as f64)
}

/// Date-time of a serial number, rounded to the nearest second.
pub fn serial_to_datetime(serial: f64) -> Option<NaiveDateTime> {
    if !(0.0..3e6).contains(&serial) {
        return None;
    }
    let days = serial.floor();
    let secs = ((serial - days) * 86400.0).round() as i64;
    let date = epoch().checked_add_signed(Duration::try_days(days as i64)?)?;
    date.and_hms_opt(0, 0, 0)?.checked_add_signed(Duration::try_seconds(secs)?)
}

/// Serial number of a UTC date-time.
pub fn datetime_serial(t: NaiveDateTime) -> f64 {
    let d = t - epoch().and_hms_opt(0, 0, 0).expect("midnight");
    d.num_milliseconds() as f64 / 86_400_000.0
}

fn part(a: &crate::engine::Arg, f: fn(&NaiveDateTime) -> u32) -> Value {
    match num(a) {
        Ok(s) => match serial_to_datetime(s) {
            Some(t) => Value::Number(f(&t) as f64),
            None => Value::Error(ErrorKind::Num),
        },
        Err(k) => Value::Error(k),
    }
}

pub(super) fn register(r: &mut Registry) {
    r.fixed("date", 3, |_, a| {
        number((|| {
            let mut y = int(&a[0])?;
            let (m, d) = (int(&a[1])?, int(&a[2])?);
            if (0.0..1900.0).contains(&y) {
                y += 1900.0;
            }
            if !(0.0..10000.0).contains(&y) || m.abs() > 1e6 || d.abs() > 1e8 {
                return Err(ErrorKind::Num);
            }
            match date_serial(y as i64, m as i64, d as i64) {
                Some(s) if s >= 0.0 => Ok(s),
                _ => Err(ErrorKind::Num),
            }
        })())
    });
    r.fixed("time", 3, |_, a| {
        number((|| {
            let secs = int(&a[0])? * 3600.0 + int(&a[1])? * 60.0 + int(&a[2])?;
            if secs < 0.0 {
                return Err(ErrorKind::Num);
            }
            Ok(secs.rem_euclid(86400.0) / 86400.0)
        })())
    });
    r.fixed("year", 1, |_, a| part(&a[0], |t| t.year() as u32));
    r.fixed("month", 1, |_, a| part(&a[0], |t| t.month()));
    r.fixed("day", 1, |_, a| part(&a[0], |t| t.day()));
    r.fixed("hour", 1, |_, a| part(&a[0], |t| t.hour()));
    r.fixed("minute", 1, |_, a| part(&a[0], |t| t.minute()));
    r.fixed("second", 1, |_, a| part(&a[0], |t| t.second()));
    r.scalar("weekday", 1, Some(2), |_, a| {
        number((|| {
            let t = serial_to_datetime(num(&a[0])?).ok_or(ErrorKind::Num)?;
            let from_sunday = t.weekday().num_days_from_sunday() as f64;
            let from_monday = t.weekday().num_days_from_monday() as f64;
            match opt_num(a, 1, 1.0)?.trunc() as i64 {
                1 => Ok(from_sunday + 1.0),
                2 => Ok(from_monday + 1.0),
                3 => Ok(from_monday),
                _ => Err(ErrorKind::Num),
            }
        })())
    });
    r.fixed("now", 0, |ctx, _| Value::number(ctx.now));
    r.fixed("today", 0, |ctx, _| Value::number(ctx.now.floor()));
}
