//! Trend tests that stand in for limits as `ε → 0` or `T → ∞`.
//!
//! Two scale-free statistics are used:
//!
//! * the growth exponent `β`, the least-squares slope of `ln V` against
//!   `ln ln(e/ε)`; a sequence counts as bounded when `β ≤ 0.25`
//!   (a sequence growing like `log^p(1/ε)` has `β ≈ p`);
//! * the rate exponent `γ` of a cumulative integral `I(u)`, the slope of
//!   `ln(dI/d ln u)` against `ln u`; the integral counts as divergent when
//!   `γ ≥ −0.25` (for `∫ du/u^p` one gets `γ = 1 − p`).

/// Bounded iff the growth exponent is at most this.
pub const GROWTH_THRESHOLD: f64 = 0.25;
/// Divergent iff the rate exponent is at least this.
pub const RATE_THRESHOLD: f64 = -0.25;

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in 0..n {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `ln ln(e/ε)`.
pub fn loglog(eps: f64) -> f64 {
    (1.0 - eps.ln()).ln()
}

/// Growth exponent of `values[k]` sampled at shrinking `eps[k]`.
pub fn growth_exponent(eps: &[f64], values: &[f64]) -> f64 {
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * scale;
    let x: Vec<f64> = eps.iter().map(|&e| loglog(e)).collect();
    let y: Vec<f64> = values.iter().map(|&v| (v.abs() + floor).ln()).collect();
    least_squares_slope(&x, &y)
}

/// Growth exponent over the smaller half of the radii, which ignores the
/// transient while the disks still reach past the local structure.
pub fn tail_growth_exponent(eps: &[f64], values: &[f64]) -> f64 {
    let n = eps.len().min(values.len());
    let start = (n / 2).saturating_sub(1).min(n.saturating_sub(3));
    growth_exponent(&eps[start..n], &values[start..n])
}

/// Rate exponent of the cumulative integral `cumulative[k] = I(u[k])`
/// along increasing `u[k] > 1`.
pub fn rate_exponent(u: &[f64], cumulative: &[f64]) -> f64 {
    let n = u.len().min(cumulative.len());
    let mut x = Vec::new();
    let mut s = Vec::new();
    for k in 1..n {
        let (x0, x1) = (u[k - 1].ln(), u[k].ln());
        if x1 > x0 {
            x.push(0.5 * (x0 + x1));
            s.push((cumulative[k] - cumulative[k - 1]) / (x1 - x0));
        }
    }
    let top = s.iter().fold(0.0_f64, |m, v| m.max(*v));
    if !(top > 0.0) {
        return f64::NEG_INFINITY;
    }
    if top.is_infinite() {
        return f64::INFINITY;
    }
    let floor = 1e-12 * top;
    let y: Vec<f64> = s.iter().map(|&v| v.max(floor).ln()).collect();
    least_squares_slope(&x, &y)
}

/// Composite Simpson rule with `m` (rounded up to even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let m = (m.max(2) + 1) & !1;
    let h = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Geometric ladder from `start` to `end` with `levels` steps, both ends
/// included.
pub fn geometric_ladder(start: f64, end: f64, levels: usize) -> Vec<f64> {
    let levels = levels.max(1);
    (0..=levels)
        .map(|k| start * (end / start).powf(k as f64 / levels as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_integrals_have_rate_one_minus_p() {
        for p in [0.5, 1.0, 1.5, 2.0] {
            let u = geometric_ladder(2.0, 1e6, 40);
            let cum: Vec<f64> = u
                .iter()
                .map(|&v| simpson(|s: f64| s.exp().powf(1.0 - p), 2f64.ln(), v.ln(), 200))
                .collect();
            let g = rate_exponent(&u, &cum);
            assert!((g - (1.0 - p)).abs() < 1e-3, "p={p}: {g}");
        }
    }

    #[test]
    fn log_power_sequences_have_matching_growth() {
        let eps = geometric_ladder(0.1, 1e-12, 30);
        for p in [0.0, 1.0, 2.0] {
            let v: Vec<f64> = eps.iter().map(|&e| (1.0 - e.ln()).powf(p)).collect();
            assert!((growth_exponent(&eps, &v) - p).abs() < 1e-6);
        }
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - x, 0.0, 2.0, 2);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
