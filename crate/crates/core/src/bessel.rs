//! Integer-order Bessel functions of the first kind by Miller's backward recurrence.

use crate::error::{Error, Result};

const MAX_ORDER: u64 = 100_000;
const MAX_ARG: f64 = 1.0e5;
const RESCALE_AT: f64 = 1.0e250;

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite, got {x}"
        )));
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside [0, {MAX_ARG}]"
        )));
    }
    Ok(())
}

/// Order at which the backward recurrence starts for orders up to `max_order`.
pub fn start_order(max_order: usize, x: f64) -> usize {
    let turning = max_order.max(x.ceil() as usize);
    let start = turning + 40 + 10 * (x.cbrt().ceil() as usize);
    start + (start & 1)
}

/// `J_0(x) ..= J_max_order(x)` in one recurrence sweep.
pub fn bessel_j_table(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if max_order as u64 > MAX_ORDER {
        return Err(Error::Domain(format!(
            "Bessel order {max_order} exceeds {MAX_ORDER}"
        )));
    }
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let start = start_order(max_order, x);
    let two_over_x = 2.0 / x;
    // j_{k+1} = 0, j_k = tiny; recur downward and normalize with J0 + 2 sum J_2k = 1.
    let mut above = 0.0_f64;
    let mut current = 1.0e-300_f64;
    let mut norm = 0.0_f64;
    for k in (0..=start).rev() {
        if k <= max_order {
            out[k] = current;
        }
        if k % 2 == 0 {
            norm += if k == 0 { current } else { 2.0 * current };
        }
        if k == 0 {
            break;
        }
        let below = (k as f64) * two_over_x * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_AT {
            above /= RESCALE_AT;
            current /= RESCALE_AT;
            norm /= RESCALE_AT;
            for v in out.iter_mut().skip(k) {
                *v /= RESCALE_AT;
            }
        }
    }
    for v in &mut out {
        *v /= norm;
    }
    Ok(out)
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(order: i64, x: f64) -> Result<f64> {
    let n = order.unsigned_abs();
    if n > MAX_ORDER {
        return Err(Error::Domain(format!(
            "Bessel order {order} exceeds {MAX_ORDER}"
        )));
    }
    let table = bessel_j_table(n as usize, x)?;
    let v = table[n as usize];
    Ok(if order < 0 && n % 2 == 1 { -v } else { v })
}

/// Lookup into a precomputed table with the negative-order reflection applied.
pub fn signed_order(table: &[f64], order: i64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let v = table.get(n).copied().unwrap_or(0.0);
    if order < 0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}
