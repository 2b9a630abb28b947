//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{GgrError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to `|err| <= max(abs_tol, rel_tol*|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack = vec![(a, b, gk15(&f, a, b))];
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0usize;
    // Depth-first bisection; each piece must meet a share of the tolerance
    // proportional to its width.
    let width = (b - a).abs();
    let mut estimate = stack[0].2 .0;
    while let Some((lo, hi, (val, err))) = stack.pop() {
        evaluations += 1;
        let tol = abs_tol.max(rel_tol * estimate.abs()) * ((hi - lo).abs() / width);
        if err <= tol || (hi - lo).abs() < 1e-14 * width.max(1e-300) {
            total += val;
            total_err += err;
            continue;
        }
        if evaluations > 200_000 {
            return Err(GgrError::Accuracy {
                achieved: total_err + err,
                context: "adaptive quadrature subdivision limit".into(),
            });
        }
        let mid = 0.5 * (lo + hi);
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        estimate += left.0 + right.0 - val;
        stack.push((mid, hi, right));
        stack.push((lo, mid, left));
    }
    if !total.is_finite() {
        return Err(GgrError::Accuracy { achieved: f64::INFINITY, context: "non-finite integrand".into() });
    }
    Ok(total)
}

/// Composite Simpson rule on a non-uniform grid given by nodes `x`, values `y`.
/// Falls back to the trapezoid rule on a trailing odd interval.
pub fn simpson_nonuniform(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        s += hs / 6.0
            * (y[i] * (2.0 - h1 / h0) + y[i + 1] * hs * hs / (h0 * h1) + y[i + 2] * (2.0 - h0 / h1));
        i += 2;
    }
    if i + 1 < n {
        s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn sharp_step() {
        let v = integrate(|t| 1.0 / ((t - 30.0).exp() + 1.0), 0.0, 80.0, 1e-13, 1e-13).unwrap();
        // ∫₀^∞ 1/(e^{t-x}+1) = log(1+e^x)
        assert!((v - (30.0 + (-30.0f64).exp().ln_1p())).abs() < 1e-10);
    }

    #[test]
    fn simpson_on_geometric_grid() {
        let x: Vec<f64> = (0..=400).map(|i| (0.01f64).ln() + i as f64 * (100.0f64 / 0.01).ln() / 400.0).map(f64::exp).collect();
        let y: Vec<f64> = x.iter().map(|r| 1.0 / (r * r)).collect();
        let v = simpson_nonuniform(&x, &y);
        assert!((v - (100.0 - 0.01)).abs() / 100.0 < 1e-6);
    }
}
