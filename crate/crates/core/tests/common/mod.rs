//! Independent reference computations for the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`. The interval
/// is first cut into panels so narrow peaks are not missed, and the
/// tolerance never drops below round-off of the total.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 512;
    struct Ctx<'a> {
        f: &'a dyn Fn(f64) -> f64,
        floor: f64,
    }
    fn rec(c: &Ctx, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = ((c.f)(lm), (c.f)(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol.max(c.floor) {
            left + right + delta / 15.0
        } else {
            rec(c, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(c, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let h = (b - a) / PANELS as f64;
    let panels: Vec<(f64, f64, f64, f64, f64, f64)> = (0..PANELS)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, if i + 1 == PANELS { b } else { a + (i + 1) as f64 * h });
            let (f0, f1, fm) = (f(x0), f(x1), f(0.5 * (x0 + x1)));
            (x0, x1, f0, fm, f1, (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1))
        })
        .collect();
    let scale: f64 = panels.iter().map(|p| p.5.abs()).sum();
    let ctx = Ctx { f, floor: 1e-16 * scale / PANELS as f64 };
    panels
        .iter()
        .map(|&(x0, x1, f0, fm, f1, whole)| rec(&ctx, x0, x1, f0, fm, f1, whole, tol / PANELS as f64, 30))
        .sum()
}

/// `∫_0^m s^k f(s) ds` for a Weibull density, integrated over
/// `u = ln(s/scale)` so the mass piled up near zero is resolved.
pub fn weibull_partial_moment(shape: f64, scale: f64, k: i32, m: f64) -> f64 {
    let g = |u: f64| {
        let zk = (shape * u).exp();
        scale.powi(k) * (k as f64 * u).exp() * shape * zk * (-zk).exp()
    };
    let lo = -50.0 / shape;
    let hi = (m / scale).ln().min(400f64.ln() / shape);
    if hi <= lo {
        return 0.0;
    }
    simpson(&g, lo, hi, 1e-14)
}

pub fn weibull_moment(shape: f64, scale: f64, k: i32) -> f64 {
    weibull_partial_moment(shape, scale, k, f64::INFINITY)
}

/// Plain bisection for an increasing `g` with `g(lo) < target < g(hi)`.
pub fn bisect(g: &dyn Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean response time of M/M/k with arrival rate `lambda` and per-server
/// service rate `mu` (Erlang C).
pub fn mmk_mean_response(k: usize, lambda: f64, mu: f64) -> f64 {
    let a = lambda / mu;
    let rho = a / k as f64;
    assert!(rho < 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..k {
        term *= a / i as f64;
        sum += term;
    }
    let last = term * a / k as f64 / (1.0 - rho);
    let c = last / (sum + last);
    c / (k as f64 * mu - lambda) + 1.0 / mu
}

/// Exponential(1) truncated moments by quadrature.
pub fn exp1_partial(k: i32, m: f64) -> f64 {
    simpson(&|t: f64| t.powi(k) * (-t).exp(), 0.0, m, 1e-13)
}

/// `m` with `E[S 1(S < m)] = f` for Exponential(1), via quadrature and
/// bisection.
pub fn exp1_threshold(f: f64) -> f64 {
    bisect(&|m| exp1_partial(1, m), f, 0.0, 60.0)
}
