//! Ideal Fermi gas thermodynamics in terms of −Li_s(−z).
//!
//! Units: ħ²/2m = 1, so the dispersion is |k|².

use std::f64::consts::PI;

use crate::error::{GgrError, Result};
use crate::quad;

/// Thermodynamic control knobs: dimension, inverse temperature and
/// chemical potential. The fugacity is stored as `log z` so that
/// `z = e^{200}` is representable without loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrandParams {
    d: usize,
    beta: f64,
    mu: f64,
    log_z: f64,
}

impl GrandParams {
    pub fn new(d: usize, beta: f64, mu: f64) -> Result<Self> {
        check_dim(d)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(GgrError::Domain(format!("beta must be positive, got {beta}")));
        }
        if !mu.is_finite() {
            return Err(GgrError::Domain(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { d, beta, mu, log_z: beta * mu })
    }

    pub fn from_log_fugacity(d: usize, beta: f64, log_z: f64) -> Result<Self> {
        check_dim(d)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(GgrError::Domain(format!("beta must be positive, got {beta}")));
        }
        if !log_z.is_finite() {
            return Err(GgrError::Domain(format!("log z must be finite, got {log_z}")));
        }
        Ok(Self { d, beta, mu: log_z / beta, log_z })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn log_z(&self) -> f64 {
        self.log_z
    }
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }
    /// ζ = 1 + |log z|.
    pub fn zeta(&self) -> f64 {
        1.0 + self.log_z.abs()
    }

    /// Same β, shifted chemical potential.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.d, self.beta, mu)
    }

    /// Same μ, different β (so z changes).
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.d, beta, self.mu)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(GgrError::Domain(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

/// Free-gas quantities at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeGasPoint {
    pub psi0: f64,
    pub rho0: f64,
    pub coeff: f64,
    /// Ground-state energy density at density `rho0`.
    pub e0: f64,
}

pub fn free_gas_point(params: &GrandParams) -> Result<FreeGasPoint> {
    let psi0 = free_pressure(params)?;
    let rho0 = free_density(params)?;
    let coeff = correction_coefficient(params)?;
    Ok(FreeGasPoint { psi0, rho0, coeff, e0: ground_state_energy_density(params.d, rho0) })
}

/// Γ(s). Integer and half-integer orders use exact recursion from
/// Γ(1) = 1 and Γ(1/2) = √π.
pub fn gamma(s: f64) -> f64 {
    let twice = 2.0 * s;
    if s > 0.0 && twice.fract() == 0.0 && twice <= 340.0 {
        let (mut g, mut t) = if twice as u64 % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
        while t < s - 0.25 {
            g *= t;
            t += 1.0;
        }
        g
    } else {
        statrs::function::gamma::gamma(s)
    }
}

/// Surface area |S^{d−1}| = 2π^{d/2}/Γ(d/2) of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// −Li_s(−e^x) for real x and order s > 0.
pub fn polylog_neg(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(GgrError::Domain(format!("polylog order must be positive, got {s}")));
    }
    if x.is_nan() {
        return Err(GgrError::Domain("polylog argument is NaN".into()));
    }
    if x <= 0.0 {
        Ok(polylog_neg_series(s, x))
    } else {
        polylog_neg_quadrature(s, x)
    }
}

/// Σ_{n≥1} (−1)^{n+1} e^{nx}/n^s for x ≤ 0, summed with the
/// Cohen–Rodriguez Villegas–Zagier acceleration (the terms form a totally
/// monotone sequence, so the error is below 5.8^{−N} of the first term).
pub fn polylog_neg_series(s: f64, x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x < -40.0 {
        // Plain summation converges geometrically with ratio e^x.
        let mut sum = 0.0;
        let mut sign = 1.0;
        for n in 1..=4 {
            let term = (n as f64 * x).exp() / (n as f64).powf(s);
            sum += sign * term;
            sign = -sign;
        }
        return sum;
    }
    const N: usize = 40;
    let mut d = (3.0 + 8f64.sqrt()).powi(N as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut acc = 0.0;
    for k in 0..N {
        c = b - c;
        let n = (k + 1) as f64;
        acc += c * (n * x).exp() / n.powf(s);
        let kf = k as f64;
        let nf = N as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    acc / d
}

/// (1/Γ(s))∫₀^∞ t^{s−1}/(e^{t−x}+1) dt by adaptive quadrature, split at
/// t = max(x, 1). Valid for every real x.
pub fn polylog_neg_quadrature(s: f64, x: f64) -> Result<f64> {
    let fermi = |t: f64| {
        let u = t - x;
        if u > 0.0 {
            let e = (-u).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + u.exp())
        }
    };
    let split = x.max(1.0);
    let upper = split + 60.0 + 4.0 * s;
    let scale = if x > 0.0 { x.powf(s) / gamma(s + 1.0) } else { x.exp() };
    let abs_tol = 1e-12f64.min(1e-13 * scale.max(1e-300));
    let rel_tol = 1e-13;
    // Near t = 0 the factor t^{s−1} is singular for s < 1; w = t^s removes it.
    let head = if s < 1.0 {
        quad::integrate(|w: f64| fermi(w.powf(1.0 / s)) / s, 0.0, split.powf(s), abs_tol, rel_tol)?
    } else {
        quad::integrate(|t: f64| t.powf(s - 1.0) * fermi(t), 0.0, split, abs_tol, rel_tol)?
    };
    let tail = quad::integrate(|t: f64| t.powf(s - 1.0) * fermi(t), split, upper, abs_tol, rel_tol)?;
    Ok((head + tail) / gamma(s))
}

/// Leading large-x asymptotics x^s/Γ(s+1).
pub fn polylog_neg_asymptotic(s: f64, x: f64) -> f64 {
    x.powf(s) / gamma(s + 1.0)
}

/// ψ₀ = β^{−1−d/2}·|S^{d−1}|Γ(d/2)/(2(2π)^d)·(−Li_{d/2+1}(−z)).
pub fn free_pressure(params: &GrandParams) -> Result<f64> {
    let d = params.d as f64;
    let pref = sphere_area(params.d) * gamma(d / 2.0) / (2.0 * (2.0 * PI).powf(d));
    Ok(params.beta.powf(-1.0 - d / 2.0) * pref * polylog_neg(d / 2.0 + 1.0, params.log_z)?)
}

/// ρ₀ = (4πβ)^{−d/2}·(−Li_{d/2}(−z)).
pub fn free_density(params: &GrandParams) -> Result<f64> {
    let d = params.d as f64;
    Ok((4.0 * PI * params.beta).powf(-d / 2.0) * polylog_neg(d / 2.0, params.log_z)?)
}

/// c_d = d·|S^{d−1}|: 12π, 4π, 2 for d = 3, 2, 1.
pub fn scattering_constant(d: usize) -> f64 {
    d as f64 * sphere_area(d)
}

/// Zero-temperature limits of the correction coefficient:
/// (12π/5)(6π²)^{2/3}, 4π², 2π²/3.
pub fn zero_temperature_constant(d: usize) -> f64 {
    match d {
        1 => 2.0 * PI * PI / 3.0,
        2 => 4.0 * PI * PI,
        3 => 12.0 * PI / 5.0 * (6.0 * PI * PI).powf(2.0 / 3.0),
        _ => f64::NAN,
    }
}

/// Ratio (−Li_{d/2+1}(−z))/(−Li_{d/2}(−z))^{1+2/d}.
pub fn polylog_ratio(params: &GrandParams) -> Result<f64> {
    let d = params.d as f64;
    let num = polylog_neg(d / 2.0 + 1.0, params.log_z)?;
    let den = polylog_neg(d / 2.0, params.log_z)?;
    Ok(num / den.powf(1.0 + 2.0 / d))
}

/// 2πc_d·(−Li_{d/2+1}(−z))/(−Li_{d/2}(−z))^{1+2/d}.
pub fn correction_coefficient(params: &GrandParams) -> Result<f64> {
    Ok(2.0 * PI * scattering_constant(params.d) * polylog_ratio(params)?)
}

/// Fermi momentum of the filled sea at density `rho`.
pub fn fermi_momentum(d: usize, rho: f64) -> f64 {
    let df = d as f64;
    (rho * df * (2.0 * PI).powf(df) / sphere_area(d)).powf(1.0 / df)
}

/// e₀(ρ) = (2π)^{−d}∫_{|k|<k_F}|k|²dk = |S^{d−1}|k_F^{d+2}/((d+2)(2π)^d).
pub fn ground_state_energy_density(d: usize, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let df = d as f64;
    sphere_area(d) * fermi_momentum(d, rho).powf(df + 2.0) / ((df + 2.0) * (2.0 * PI).powf(df))
}

/// The closed form 4πd^{2/d}/(d+2)·(d/2)^{2/d}Γ(d/2)^{2/d}ρ^{1+2/d} exactly as
/// printed in the source; it differs from the Fermi-sea value by the factor
/// d^{2/d}/d (equal to 1 only for d = 1, 2).
pub fn ground_state_energy_density_displayed(d: usize, rho: f64) -> f64 {
    let df = d as f64;
    4.0 * PI * df.powf(2.0 / df) / (df + 2.0)
        * (df / 2.0).powf(2.0 / df)
        * gamma(df / 2.0).powf(2.0 / df)
        * rho.powf(1.0 + 2.0 / df)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: usize, beta: f64, log_z: f64) -> GrandParams {
        GrandParams::from_log_fugacity(d, beta, log_z).unwrap()
    }

    // Radial quadrature of (1/(β(2π)^d))∫log(1+ze^{−β|k|²})dk, independent of the polylog.
    fn pressure_oracle(d: usize, beta: f64, log_z: f64) -> f64 {
        let log1p_z = |k: f64| {
            let y = log_z - beta * k * k;
            if y > 0.0 {
                y + (-y).exp().ln_1p()
            } else {
                y.exp().ln_1p()
            }
        };
        let kmax = ((log_z.max(0.0) + 80.0) / beta).sqrt();
        let kf = (log_z.max(0.0) / beta).sqrt();
        let f = |k: f64| k.powi(d as i32 - 1) * log1p_z(k);
        let mut v = quad::integrate(f, 0.0, kf.max(1e-3), 1e-15, 1e-14).unwrap();
        v += quad::integrate(f, kf.max(1e-3), kmax, 1e-15, 1e-14).unwrap();
        sphere_area(d) * v / (beta * (2.0 * PI).powi(d as i32))
    }

    // Plain partial sums with averaging of consecutive partial sums, to 1e-12.
    fn alternating_oracle(s: f64) -> f64 {
        let mut partial = Vec::new();
        let mut sum = 0.0;
        for n in 1..=200_000u64 {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign / (n as f64).powf(s);
            partial.push(sum);
        }
        // repeated averaging (Euler transform of the tail)
        let mut row: Vec<f64> = partial[partial.len() - 30..].to_vec();
        while row.len() > 1 {
            row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        row[0]
    }

    #[test]
    fn gamma_half_integers() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma(2.5) - 0.75 * PI.sqrt()).abs() < 1e-14);
        assert_eq!(gamma(4.0), 6.0);
        assert!((gamma(1.3) - 0.897_470_696_306_277_2).abs() < 1e-12);
    }

    #[test]
    fn log2_and_three_halves() {
        assert!((polylog_neg(1.0, 0.0).unwrap() - 2f64.ln()).abs() < 1e-14);
        let oracle = alternating_oracle(1.5);
        assert!((oracle - 0.765_147_024_625_408_4).abs() < 1e-12);
        assert!((polylog_neg(1.5, 0.0).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn series_matches_quadrature_for_negative_x() {
        for &s in &[0.5, 1.0, 1.5, 2.0, 2.5, 3.5] {
            for &x in &[-30.0, -5.0, -1.0, -0.1, 0.0] {
                let a = polylog_neg_series(s, x);
                let b = polylog_neg_quadrature(s, x).unwrap();
                assert!(((a - b) / a).abs() < 1e-10, "s={s} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn continuity_across_zero() {
        for &s in &[0.5, 1.5, 2.5] {
            let l = polylog_neg(s, -1e-9).unwrap();
            let r = polylog_neg(s, 1e-9).unwrap();
            assert!((l - r).abs() < 1e-8);
        }
    }

    #[test]
    fn s_equal_one_closed_form() {
        // −Li₁(−e^x) = log(1+e^x)
        for &x in &[-3.0, 0.5, 4.0, 40.0, 150.0] {
            let exact = if x > 0.0 { x + (-x as f64).exp().ln_1p() } else { (x as f64).exp().ln_1p() };
            let v = polylog_neg(1.0, x).unwrap();
            assert!(((v - exact) / exact).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn large_argument_asymptotics() {
        let mut k_fit: f64 = 0.0;
        for &s in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            for &x in &[20.0, 50.0, 100.0] {
                let rel = polylog_neg(s, x).unwrap() / polylog_neg_asymptotic(s, x) - 1.0;
                k_fit = k_fit.max(rel.abs() * x * x);
            }
        }
        assert!(k_fit < 10.0, "K = {k_fit}");
        let rel = polylog_neg(2.5, 50.0).unwrap() / polylog_neg_asymptotic(2.5, 50.0) - 1.0;
        assert!(rel.abs() <= 4e-3);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(matches!(polylog_neg(0.0, 1.0), Err(GgrError::Domain(_))));
        assert!(matches!(polylog_neg(-1.0, 1.0), Err(GgrError::Domain(_))));
    }

    #[test]
    fn pressure_closed_form_vs_quadrature() {
        for &(d, beta, lz) in &[(1, 1.0, 0.0), (2, 0.7, 2.0), (3, 1.0, -2.0), (3, 2.0, 10.0), (1, 0.3, 30.0)] {
            let a = free_pressure(&p(d, beta, lz)).unwrap();
            let b = pressure_oracle(d, beta, lz);
            assert!(((a - b) / b).abs() < 1e-8, "d={d}: {a} vs {b}");
        }
    }

    #[test]
    fn classical_tail() {
        let params = p(3, 1.0, -30.0);
        let z = params.z();
        let psi = free_pressure(&params).unwrap();
        assert!((psi / (z * (4.0 * PI).powf(-1.5)) - 1.0).abs() < 1e-12);
        let rho = free_density(&p(2, 1.5, -25.0)).unwrap();
        assert!((rho / ((-25f64).exp() / (4.0 * PI * 1.5)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn density_value_and_derivative() {
        let rho = free_density(&p(3, 1.0, 0.0)).unwrap();
        assert!((rho - (4.0 * PI).powf(-1.5) * 0.765_147_024_625_408_4).abs() < 1e-14);
        let base = GrandParams::from_log_fugacity(2, 2.0, 3f64.ln()).unwrap();
        let h = 1e-4;
        let up = free_pressure(&base.with_mu(base.mu() + h).unwrap()).unwrap();
        let dn = free_pressure(&base.with_mu(base.mu() - h).unwrap()).unwrap();
        let fd = (up - dn) / (2.0 * h);
        let rho = free_density(&base).unwrap();
        assert!(((fd - rho) / rho).abs() < 1e-6);
    }

    #[test]
    fn density_scaling() {
        for d in 1..=3 {
            for &beta in &[0.3, 1.0, 4.0] {
                for &bm in &[-3.0, 0.0, 2.0, 15.0] {
                    let a = free_density(&GrandParams::new(d, beta, bm / beta).unwrap()).unwrap();
                    let b = beta.powf(-(d as f64) / 2.0) * free_density(&GrandParams::new(d, 1.0, bm).unwrap()).unwrap();
                    assert!(((a - b) / b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn coefficient_limits() {
        for d in 1..=3 {
            let c = correction_coefficient(&p(d, 1.0, 100.0)).unwrap();
            let lim = zero_temperature_constant(d);
            assert!(((c - lim) / lim).abs() < 1e-3, "d={d}: {c} vs {lim}");
        }
    }

    #[test]
    fn coefficient_positive_and_decreasing() {
        for d in 1..=3 {
            let mut prev = f64::INFINITY;
            let mut lz = (1e-3f64).ln();
            while lz <= 200.0 {
                let c = correction_coefficient(&p(d, 1.0, lz)).unwrap();
                assert!(c.is_finite() && c > 0.0);
                assert!(c < prev * (1.0 + 1e-12), "d={d} log z={lz}");
                prev = c;
                lz += 0.5;
            }
            assert!(prev > zero_temperature_constant(d));
        }
    }

    #[test]
    fn ground_state_energy() {
        assert!((ground_state_energy_density(3, 1.0) - 0.6 * (6.0 * PI * PI).powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((ground_state_energy_density(1, 1.0) - PI * PI / 3.0).abs() < 1e-12);
        assert!((ground_state_energy_density(2, 1.0) - 2.0 * PI).abs() < 1e-12);
        assert_eq!(ground_state_energy_density(3, 0.0), 0.0);
        // The printed closed form agrees in d = 1, 2 and is off by 3^{1/3} in d = 3.
        for d in 1..=2 {
            let r = ground_state_energy_density_displayed(d, 0.7) / ground_state_energy_density(d, 0.7);
            assert!((r - 1.0).abs() < 1e-12);
        }
        let r = ground_state_energy_density_displayed(3, 0.7) / ground_state_energy_density(3, 0.7);
        assert!((r - 3f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn pressure_approaches_ground_state() {
        for &bm in &[20.0, 50.0] {
            let params = p(3, 1.0, bm);
            let psi = free_pressure(&params).unwrap();
            let rho = free_density(&params).unwrap();
            let rel = psi / (2.0 / 3.0 * ground_state_energy_density(3, rho)) - 1.0;
            assert!(rel.abs() <= 10.0 / (bm * bm), "βμ={bm}: {rel}");
        }
        let params = p(3, 1.0, 100.0);
        let rel = free_pressure(&params).unwrap()
            / (2.0 / 3.0 * ground_state_energy_density(3, free_density(&params).unwrap()))
            - 1.0;
        assert!(rel.abs() < 1e-3);
    }
}
