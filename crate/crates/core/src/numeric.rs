//! Bracketing root finder for monotone maps.

use crate::error::{Error, Result};

/// Finds `x` in `[lo, hi]` with `g(x) = target` for nondecreasing `g`.
///
/// Stops once the bracket is narrower than `rel_tol * max(|hi|, tiny)` or
/// after 400 halvings. The bracket must satisfy `g(lo) <= target <= g(hi)`.
pub fn bisect_increasing<F>(mut g: F, target: f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo <= hi) {
        return Err(Error::NoRootBracketed(format!("empty bracket [{lo}, {hi}]")));
    }
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo <= target && target <= ghi) {
        return Err(Error::NoRootBracketed(format!(
            "target {target} outside [{glo}, {ghi}] on [{lo}, {hi}]"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) || mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Same as [`bisect_increasing`] for a nonincreasing `g`.
pub fn bisect_decreasing<F>(mut g: F, target: f64, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    bisect_increasing(|x| -g(x), -target, lo, hi, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root() {
        let r = bisect_increasing(|x| x * x, 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn decreasing_map() {
        let r = bisect_decreasing(|x| (-x).exp(), 0.5, 0.0, 10.0, 1e-14).unwrap();
        assert!((r - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn unbracketed() {
        assert!(matches!(
            bisect_increasing(|x| x, 5.0, 0.0, 1.0, 1e-9),
            Err(Error::NoRootBracketed(_))
        ));
    }
}
