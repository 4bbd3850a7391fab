//! Integer-order Bessel functions of the first kind.

/// Fills `out[n] = J_n(x)` for `n = 0..out.len()`, by Miller's backward
/// recurrence normalized with `J₀ + 2ΣJ₂ₖ = 1`.
pub fn bessel_j_orders(x: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    if out.is_empty() {
        return;
    }
    let x = x.abs();
    if x == 0.0 {
        out[0] = 1.0;
        return;
    }
    let top = (out.len() - 1).max(x.ceil() as usize) as f64;
    let mut start = (top + (60.0 * top).sqrt() + 20.0) as usize;
    start += start % 2;
    let mut next = 0.0;
    let mut current = 1e-30;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let previous = 2.0 * k as f64 / x * current - next;
        next = current;
        current = previous;
        let order = k - 1;
        if order < out.len() {
            out[order] = current;
        }
        if order % 2 == 0 {
            norm += if order == 0 { current } else { 2.0 * current };
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    out.iter_mut().for_each(|v| *v /= norm);
}

/// `J_n(x)` for a single, possibly negative, order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let mut buf = vec![0.0; n.unsigned_abs() as usize + 1];
    bessel_j_orders(x, &mut buf);
    let value = buf[n.unsigned_abs() as usize];
    let sign = if n < 0 && n % 2 != 0 { -1.0 } else { 1.0 };
    let sign = if x < 0.0 && n % 2 != 0 { -sign } else { sign };
    sign * value
}
