//! Error envelopes, the choice of Jastrow cutoff b, and the final pressure
//! lower bound with its two temperature regimes.
//!
//! Every envelope is a sum of `constant × structure` terms. Structures are
//! monomials in a, b, ρ₀, ζ, log(b/a), x = a^dρ₀ and |log x|, written out per
//! dimension below; constants come from the registry (default 1.0).

use crate::error::{GgrError, Result};
use crate::registry::ConstantRegistry;
use crate::thermo::{self, GrandParams};

/// Symbols a structure monomial can depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    A,
    B,
    Rho,
    Zeta,
    /// log(b/a)
    LogBa,
    /// x = a^dρ₀
    X,
    /// |log x|
    LogX,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vars {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub zeta: f64,
    pub d: usize,
}

impl Vars {
    fn get(&self, v: Var) -> f64 {
        let x = self.a.powi(self.d as i32) * self.rho;
        match v {
            Var::A => self.a,
            Var::B => self.b,
            Var::Rho => self.rho,
            Var::Zeta => self.zeta,
            Var::LogBa => (self.b / self.a).ln(),
            Var::X => x,
            Var::LogX => x.ln().abs(),
        }
    }
}

/// One `constant × structure` term.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub key: &'static str,
    pub factors: Vec<(Var, f64)>,
}

impl Term {
    fn new(key: &'static str, factors: &[(Var, f64)]) -> Self {
        Self { key, factors: factors.to_vec() }
    }

    pub fn structure(&self, v: &Vars) -> f64 {
        self.factors.iter().map(|&(s, p)| if p == 0.0 { 1.0 } else { v.get(s).powf(p) }).product()
    }

    pub fn value(&self, v: &Vars, reg: &ConstantRegistry) -> f64 {
        reg.get(self.key) * self.structure(v)
    }
}

pub fn evaluate(terms: &[Term], v: &Vars, reg: &ConstantRegistry) -> f64 {
    terms.iter().map(|t| t.value(v, reg)).sum()
}

use Var::*;

/// |ε_Z|/L^d: a^db²ρ₀^{2+4/d}ζ^{−1} + a^{2d}ρ₀^{3+2/d}ζ^{d/2−1}(log b/a)².
pub fn eps_z_terms(d: usize) -> Vec<Term> {
    let df = d as f64;
    vec![
        Term::new("eps.Z", &[(A, df), (B, 2.0), (Rho, 2.0 + 4.0 / df), (Zeta, -1.0)]),
        Term::new("eps.Z", &[(A, 2.0 * df), (Rho, 3.0 + 2.0 / df), (Zeta, df / 2.0 - 1.0), (LogBa, 2.0)]),
    ]
}

/// |ε_2|/L^d.
pub fn eps_2_terms(d: usize) -> Vec<Term> {
    let df = d as f64;
    if d == 1 {
        vec![
            Term::new("eps.2", &[(A, 1.0), (B, 1.0), (Rho, 5.0), (LogBa, 1.0)]),
            Term::new("eps.2", &[(A, 2.0), (Rho, 5.0), (Zeta, 1.5), (LogBa, 3.0)]),
        ]
    } else {
        vec![
            Term::new("eps.2", &[(A, 2.0 * df), (Rho, 3.0 + 2.0 / df), (LogBa, 1.0)]),
            Term::new("eps.2", &[(A, 4.0 * df - 2.0), (Rho, 5.0), (Zeta, 1.5 * df), (LogBa, 3.0)]),
        ]
    }
}

/// |ε_3|/L^d.
pub fn eps_3_terms(d: usize) -> Vec<Term> {
    let df = d as f64;
    if d == 1 {
        vec![Term::new("eps.3", &[(A, 2.0), (Rho, 5.0), (Zeta, 1.0), (LogBa, 2.0)])]
    } else {
        vec![
            Term::new("eps.3", &[(A, 2.0 * df), (B, 2.0), (Rho, 3.0 + 4.0 / df)]),
            Term::new("eps.3", &[(A, 3.0 * df - 2.0), (Rho, 4.0), (Zeta, df / 2.0), (LogBa, 1.0)]),
        ]
    }
}

/// The two-body truncation error a^{2d}b^{−d}ρ₀^{2+2/d} (the O(a^d/b^d)
/// relative correction to the leading term).
pub fn cutoff_terms(d: usize) -> Vec<Term> {
    let df = d as f64;
    vec![Term::new("leading.cutoff", &[(A, 2.0 * df), (B, -df), (Rho, 2.0 + 2.0 / df)])]
}

/// The combined per-volume display for ε_Z + ε_2 + ε_3 (dominant terms only).
pub fn combined_terms(d: usize) -> Vec<Term> {
    match d {
        3 => vec![
            Term::new("eps.total", &[(A, 3.0), (B, 2.0), (Rho, 10.0 / 3.0), (Zeta, -1.0)]),
            Term::new("eps.total", &[(A, 6.0), (Rho, 11.0 / 3.0), (Zeta, 0.5), (LogBa, 2.0)]),
            Term::new("eps.total", &[(A, 10.0), (Rho, 5.0), (Zeta, 4.5), (LogBa, 3.0)]),
        ],
        2 => vec![
            Term::new("eps.total", &[(A, 2.0), (B, 2.0), (Rho, 4.0), (Zeta, -1.0)]),
            Term::new("eps.total", &[(A, 4.0), (Rho, 4.0), (Zeta, 1.0), (LogBa, 1.0)]),
            Term::new("eps.total", &[(A, 6.0), (Rho, 5.0), (Zeta, 3.0), (LogBa, 3.0)]),
        ],
        _ => vec![
            Term::new("eps.total", &[(A, 1.0), (B, 1.0), (Rho, 5.0), (LogBa, 1.0)]),
            Term::new("eps.total", &[(A, 2.0), (Rho, 5.0), (Zeta, 1.5), (LogBa, 3.0)]),
        ],
    }
}

/// δ_d of the high-temperature regime.
pub fn delta_high_terms(d: usize) -> Vec<Term> {
    match d {
        3 => vec![
            Term::new("delta.high", &[(X, 6.0 / 15.0), (Zeta, -0.6)]),
            Term::new("delta.high", &[(X, 1.0), (Zeta, 0.5), (LogX, 2.0)]),
            Term::new("delta.high", &[(X, 7.0 / 3.0), (Zeta, 4.5), (LogX, 3.0)]),
        ],
        2 => vec![
            Term::new("delta.high", &[(X, 0.5), (Zeta, -0.5)]),
            Term::new("delta.high", &[(X, 1.0), (Zeta, 1.0), (LogX, 1.0)]),
            Term::new("delta.high", &[(X, 2.0), (Zeta, 3.0), (LogX, 3.0)]),
        ],
        _ => vec![
            Term::new("delta.high", &[(X, 0.5), (LogX, 0.5)]),
            Term::new("delta.high", &[(X, 1.0), (Zeta, 1.5), (LogX, 3.0)]),
        ],
    }
}

/// δ_d of the low-temperature regime (comparison with the ground state).
pub fn delta_low_terms(d: usize) -> Vec<Term> {
    match d {
        3 => vec![Term::new("delta.low", &[(X, 2.0 / 3.0)]), Term::new("delta.low", &[(X, -1.0), (Zeta, -2.0)])],
        2 => vec![
            Term::new("delta.low", &[(X, 1.0), (LogX, 2.0)]),
            Term::new("delta.low", &[(X, -1.0), (Zeta, -2.0)]),
        ],
        _ => vec![Term::new("delta.low", &[(X, 13.0 / 17.0)]), Term::new("delta.low", &[(X, -1.0), (Zeta, -2.0)])],
    }
}

/// The uniform-in-z δ_d of the main lower bound.
pub fn delta_theorem_terms(d: usize) -> Vec<Term> {
    match d {
        3 => vec![Term::new("delta.theorem", &[(X, 1.0 / 39.0), (LogX, 12.0 / 13.0)])],
        2 => vec![Term::new("delta.theorem", &[(X, 0.2), (LogX, 8.0 / 7.0)])],
        _ => vec![Term::new("delta.theorem", &[(X, 1.0 / 7.0), (LogX, 12.0 / 7.0)])],
    }
}

/// ζ above which the low-temperature bound is used.
pub fn zeta_threshold_terms(d: usize) -> Vec<Term> {
    match d {
        3 => vec![Term::new("threshold.zeta", &[(X, -20.0 / 39.0), (LogX, -6.0 / 13.0)])],
        2 => vec![Term::new("threshold.zeta", &[(X, -0.6), (LogX, -0.4)])],
        _ => vec![Term::new("threshold.zeta", &[(X, -4.0 / 7.0), (LogX, -6.0 / 7.0)])],
    }
}

/// Everything a bound evaluation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    pub a: f64,
    pub rho0: f64,
    pub params: GrandParams,
    /// a^dρ₀
    pub x: f64,
    pub registry: ConstantRegistry,
}

impl BoundInputs {
    pub fn new(a: f64, params: GrandParams, registry: ConstantRegistry) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(GgrError::Domain(format!("scattering length must be non-negative, got {a}")));
        }
        // the standing hypothesis z ≥ z₀ is only enforced when z₀ is set
        if let Some(z0) = registry.explicit("z0").filter(|&z0| params.z() < z0) {
            return Err(GgrError::Domain(format!("z = {:.3e} below z0 = {z0}", params.z())));
        }
        let rho0 = thermo::free_density(&params)?;
        let x = a.powi(params.d() as i32) * rho0;
        Ok(Self { a, rho0, params, x, registry })
    }

    /// Same temperature and fugacity, diluteness `x`.
    pub fn from_diluteness(x: f64, params: GrandParams, registry: ConstantRegistry) -> Result<Self> {
        let rho0 = thermo::free_density(&params)?;
        Self::new((x / rho0).powf(1.0 / params.d() as f64), params, registry)
    }

    fn require_interaction(&self) -> Result<()> {
        if self.a > 0.0 {
            Ok(())
        } else {
            Err(GgrError::Domain("a = 0: no interaction, nothing to bound".into()))
        }
    }

    pub fn d(&self) -> usize {
        self.params.d()
    }

    pub fn zeta(&self) -> f64 {
        self.params.zeta()
    }

    pub fn vars(&self, b: f64) -> Vars {
        Vars { a: self.a, b, rho: self.rho0, zeta: self.zeta(), d: self.d() }
    }

    /// x ζ^{d/2}|log x| < c (`validity.c`).
    pub fn is_valid(&self) -> bool {
        let d = self.d() as f64;
        self.x < 1.0 && self.x * self.zeta().powf(d / 2.0) * self.x.ln().abs() < self.registry.get("validity.c")
    }

    /// Upper end of the admissible cutoff range, C·ρ₀^{−1/d}.
    pub fn b_max(&self) -> f64 {
        self.registry.get("b.max") * self.rho0.powf(-1.0 / self.d() as f64)
    }

    /// Leading correction 2πc_d·ratio·a^dρ₀^{2+2/d} per volume.
    pub fn leading_term(&self) -> Result<f64> {
        let d = self.d() as f64;
        Ok(thermo::correction_coefficient(&self.params)? * self.x * self.rho0.powf(1.0 + 2.0 / d))
    }
}

/// Sub-envelopes of ε_2, by diagram size n_g + n_g* + k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiEnvelopes {
    pub eq1: f64,
    pub ge3: f64,
    pub i: f64,
    pub ii: f64,
    pub iii: f64,
}

/// Integrals feeding the ξ envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiIntegrals {
    pub i_g: f64,
    pub i_gamma: f64,
    /// ∫|x||g|
    pub i_x_g: f64,
    /// ∫(|∇f|² + ½vf²)
    pub energy0: f64,
    /// ∫(|∇f|² + ½vf²)|x|²
    pub energy2: f64,
}

impl XiIntegrals {
    /// The scaling bounds I_g ≲ a^d log b/a, I_γ ≲ ζ^{d/2}, I_{|x|g} ≲ a^db,
    /// ∫(|∇f|²+½vf²) ≲ a^{d−2}, ∫(|∇f|²+½vf²)|x|² ≲ a^d.
    pub fn scaling(v: &Vars) -> Self {
        let ad = v.a.powi(v.d as i32);
        Self {
            i_g: ad * (v.b / v.a).ln(),
            i_gamma: v.zeta.powf(v.d as f64 / 2.0),
            i_x_g: ad * v.b,
            energy0: ad / (v.a * v.a),
            energy2: ad,
        }
    }
}

/// The ξ envelopes (pointwise bounds integrated against the two-body energy
/// weight, whose support lies within |x| ≤ b).
pub fn xi_envelopes(v: &Vars, ints: &XiIntegrals, reg: &ConstantRegistry) -> XiEnvelopes {
    let d = v.d as f64;
    let r = v.rho;
    let XiIntegrals { i_g, i_gamma, i_x_g, energy0, energy2 } = *ints;
    XiEnvelopes {
        eq1: reg.get("xi.eq1") * i_g * r.powf(3.0 + 2.0 / d) * energy2,
        ge3: reg.get("xi.ge3") * r.powi(5) * i_g.powi(3) * (1.0 + i_gamma.powi(3)) * energy0,
        i: reg.get("xi.i") * i_g.powi(2) * r.powf(4.0 + 6.0 / d) * 4.0 * v.b.powi(4) * energy2,
        ii: reg.get("xi.ii") * r.powf(4.0 + 1.0 / d) * i_x_g * i_g * energy0,
        iii: reg.get("xi.iii")
            * (r.powf(4.0 + 1.0 / d) * i_x_g * i_g * energy0
                + r.powi(5) * i_g.powi(3) * i_gamma.powi(3) * energy0
                + r.powf(4.0 + 2.0 / d) * i_g.powi(2) * i_gamma.powi(2) * energy2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsEnvelopes {
    pub eps_z: f64,
    pub eps_2: f64,
    pub eps_3: f64,
    pub xi: XiEnvelopes,
}

impl EpsEnvelopes {
    pub fn total(&self) -> f64 {
        self.eps_z + self.eps_2 + self.eps_3
    }
}

/// Per-volume envelopes for ε_Z, ε_2, ε_3 at cutoff `b`.
pub fn eps_envelopes(inp: &BoundInputs, b: f64) -> Result<EpsEnvelopes> {
    if !(b > inp.a && b <= inp.b_max() * (1.0 + 1e-12)) {
        return Err(GgrError::Precondition(format!("b = {b:.6e} outside (a, C rho0^(-1/d)] = ({:.6e}, {:.6e}]", inp.a, inp.b_max())));
    }
    if !inp.is_valid() {
        return Err(GgrError::Precondition(format!("validity condition fails at x = {:.3e}, zeta = {:.3}", inp.x, inp.zeta())));
    }
    let v = inp.vars(b);
    let d = inp.d();
    let reg = &inp.registry;
    Ok(EpsEnvelopes {
        eps_z: evaluate(&eps_z_terms(d), &v, reg),
        eps_2: evaluate(&eps_2_terms(d), &v, reg),
        eps_3: evaluate(&eps_3_terms(d), &v, reg),
        xi: xi_envelopes(&v, &XiIntegrals::scaling(&v), reg),
    })
}

/// The quantity b is chosen to minimise: cutoff error plus the combined
/// error display, per volume.
pub fn total_envelope(inp: &BoundInputs, b: f64) -> f64 {
    let v = inp.vars(b);
    let d = inp.d();
    evaluate(&cutoff_terms(d), &v, &inp.registry) + evaluate(&combined_terms(d), &v, &inp.registry)
}

/// The closed-form cutoff choice.
pub fn choose_b(inp: &BoundInputs) -> f64 {
    let (a, x, zeta) = (inp.a, inp.x, inp.zeta());
    let cap = inp.b_max();
    match inp.d() {
        3 => (a * x.powf(-2.0 / 15.0) * zeta.powf(0.2)).min(cap),
        2 => (a * x.powf(-0.25) * zeta.powf(0.25)).min(cap),
        _ => (a * x.powf(-0.5) * x.ln().abs().powf(-0.5)).min(cap),
    }
}

/// Minimum of `total_envelope` over `points` log-spaced b in (2a, b_max].
pub fn grid_search_b(inp: &BoundInputs, points: usize) -> (f64, f64) {
    let (lo, hi) = ((2.0 * inp.a).ln(), inp.b_max().ln());
    (1..=points)
        .map(|i| {
            let b = (lo + (hi - lo) * i as f64 / points as f64).exp();
            (b, total_envelope(inp, b))
        })
        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    LowTemperature,
    HighTemperature,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::LowTemperature => "low_temperature",
            Regime::HighTemperature => "high_temperature",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub b_choice: f64,
    pub leading_term: f64,
    pub eps: Option<EpsEnvelopes>,
    pub delta_d: f64,
    pub regime: Regime,
    pub valid: bool,
}

impl BoundReport {
    /// ψ₀ − leading·(1 + δ_d).
    pub fn pressure_lower_bound(&self, psi0: f64) -> f64 {
        psi0 - self.leading_term * (1.0 + self.delta_d)
    }
}

pub fn high_temp_bound(inp: &BoundInputs) -> Result<BoundReport> {
    inp.require_interaction()?;
    if !inp.is_valid() {
        return Err(GgrError::Regime(format!(
            "x zeta^(d/2) |log x| too large (x = {:.3e}, zeta = {:.3}); use low_temp_bound or report no bound",
            inp.x,
            inp.zeta()
        )));
    }
    let b = choose_b(inp);
    let eps = eps_envelopes(inp, b)?;
    Ok(BoundReport {
        b_choice: b,
        leading_term: inp.leading_term()?,
        eps: Some(eps),
        delta_d: evaluate(&delta_high_terms(inp.d()), &inp.vars(b), &inp.registry),
        regime: Regime::HighTemperature,
        valid: true,
    })
}

pub fn low_temp_bound(inp: &BoundInputs) -> Result<BoundReport> {
    inp.require_interaction()?;
    let b = choose_b(inp);
    Ok(BoundReport {
        b_choice: b,
        leading_term: inp.leading_term()?,
        eps: None,
        delta_d: evaluate(&delta_low_terms(inp.d()), &inp.vars(b), &inp.registry),
        regime: Regime::LowTemperature,
        valid: true,
    })
}

pub fn zeta_threshold(inp: &BoundInputs) -> f64 {
    evaluate(&zeta_threshold_terms(inp.d()), &inp.vars(inp.a), &inp.registry)
}

/// Uniform-in-z envelope C x^α|log x|^β of the main bound.
pub fn theorem_delta(inp: &BoundInputs) -> f64 {
    evaluate(&delta_theorem_terms(inp.d()), &inp.vars(inp.a), &inp.registry)
}

/// Regime switch at the ζ threshold. Above it the low-temperature branch
/// is used; below it the high-temperature one, flagged invalid if its own
/// validity condition fails.
pub fn main_bound(inp: &BoundInputs) -> Result<BoundReport> {
    inp.require_interaction()?;
    let c = inp.registry.get("dilute.c");
    if !(inp.x < c) {
        return Err(GgrError::Domain(format!("a^d rho0 = {:.3e} is not below the diluteness constant {c}", inp.x)));
    }
    if inp.zeta() >= zeta_threshold(inp) {
        return low_temp_bound(inp);
    }
    match high_temp_bound(inp) {
        Ok(r) => Ok(r),
        Err(GgrError::Regime(_)) => Ok(BoundReport {
            b_choice: choose_b(inp),
            leading_term: inp.leading_term()?,
            eps: None,
            delta_d: f64::NAN,
            regime: Regime::HighTemperature,
            valid: false,
        }),
        Err(e) => Err(e),
    }
}

/// Free energy density φ₀(β, ρ) = sup_μ(ρμ − ψ₀(β, μ)), by solving
/// ρ₀(β, μ) = ρ for μ.
pub fn free_energy_density(d: usize, beta: f64, rho: f64) -> Result<f64> {
    let dens = |log_z: f64| thermo::free_density(&GrandParams::from_log_fugacity(d, beta, log_z)?);
    let (mut lo, mut hi) = (-40.0f64, 1.0f64);
    while dens(hi)? < rho {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(GgrError::Solver { residual: rho, context: "density out of reach".into() });
        }
    }
    while dens(lo)? > rho {
        lo *= 2.0;
        if lo < -1e4 {
            return Err(GgrError::Solver { residual: rho, context: "density below reach".into() });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dens(mid)? < rho {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let p = GrandParams::from_log_fugacity(d, beta, 0.5 * (lo + hi))?;
    Ok(rho * p.mu() - thermo::free_pressure(&p)?)
}

/// Relative mismatch |ψ₀ − (ρ₀μ − φ₀(β, ρ₀))|/ψ₀.
pub fn legendre_consistency(params: &GrandParams) -> Result<f64> {
    let psi0 = thermo::free_pressure(params)?;
    let rho0 = thermo::free_density(params)?;
    let phi0 = free_energy_density(params.d(), params.beta(), rho0)?;
    Ok((psi0 - (rho0 * params.mu() - phi0)).abs() / psi0)
}

/// Relative deviation of ψ₀ from its ground-state limit (2/d)e₀(ρ₀).
pub fn zero_temperature_pressure_deviation(params: &GrandParams) -> Result<f64> {
    let psi0 = thermo::free_pressure(params)?;
    let rho0 = thermo::free_density(params)?;
    let limit = 2.0 / params.d() as f64 * thermo::ground_state_energy_density(params.d(), rho0);
    Ok((psi0 - limit).abs() / limit)
}

/// Optimised difference-quotient bound on |ρ − ρ₀|/ρ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDeviation {
    pub deviation: f64,
    pub eps_up: f64,
    pub eps_down: f64,
}

/// Difference-quotient bound on ρ/ρ₀ − 1 for a step ε (either sign): the
/// curvature part (ψ₀(μ+ε) − ψ₀(μ))/ε − ρ₀ and the interaction part
/// C·a^dρ₀^{2+2/d}/|ε|, both relative to ρ₀.
pub fn quotient_terms(inp: &BoundInputs, eps: f64) -> Result<(f64, f64)> {
    let p = &inp.params;
    let psi = thermo::free_pressure(p)?;
    let shifted = thermo::free_pressure(&p.with_mu(p.mu() + eps)?)?;
    let curvature = ((shifted - psi) / eps - inp.rho0).abs() / inp.rho0;
    let c = inp.registry.get("rho.C") * thermo::correction_coefficient(p)?;
    let interaction = c * inp.x * inp.rho0.powf(1.0 + 2.0 / inp.d() as f64) / eps.abs() / inp.rho0;
    Ok((curvature, interaction))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-10 * (1.0 + lo.abs()) {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Minimises the difference-quotient bound over ε > 0 and ε < 0 (golden
/// section in log ε) and returns the larger of the two optimised values.
pub fn rho_vs_rho0(inp: &BoundInputs) -> Result<DensityDeviation> {
    if inp.a == 0.0 {
        return Ok(DensityDeviation { deviation: 0.0, eps_up: 0.0, eps_down: 0.0 });
    }
    let scale = inp.params.mu().abs().max(1.0 / inp.params.beta());
    let side = |sign: f64| -> Result<(f64, f64)> {
        let total = |le: f64| quotient_terms(inp, sign * le.exp()).map(|(a, b)| a + b).unwrap_or(f64::INFINITY);
        let le = golden_min(total, (scale * 1e-14).ln(), (scale * 0.5).ln());
        let eps = sign * le.exp();
        let (a, b) = quotient_terms(inp, eps)?;
        Ok((a + b, eps))
    };
    let (up, eps_up) = side(1.0)?;
    let (down, eps_down) = side(-1.0)?;
    Ok(DensityDeviation { deviation: up.max(down), eps_up, eps_down })
}

/// Leading term through the two-body route: ρ^(2) quadratic coefficient
/// times ∫(|∇f|² + ½vf²)|x|².
pub fn leading_term_two_body(energy_moment2: f64, rho2_coefficient: f64) -> f64 {
    energy_moment2 * rho2_coefficient
}

/// Seeded random inputs: x log-uniform in [1e−9, 1e−4], log z in
/// [−0.5, 4], β log-uniform in [0.1, 10].
pub fn random_inputs(d: usize, seed: u64, count: usize) -> Vec<BoundInputs> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = 10f64.powf(rng.gen_range(-9.0..-4.0));
            let lz = rng.gen_range(-0.5..4.0);
            let beta = 10f64.powf(rng.gen_range(-1.0..1.0));
            let p = GrandParams::from_log_fugacity(d, beta, lz).expect("valid parameters");
            BoundInputs::from_diluteness(x, p, ConstantRegistry::new()).expect("valid inputs")
        })
        .collect()
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Zero-temperature constant c_{0,d} (re-exported here for reports).
pub fn zero_temperature_constant(d: usize) -> f64 {
    thermo::zero_temperature_constant(d)
}
