//! p-wave scattering solutions and the cut-off Jastrow factor.
//!
//! The scattering function minimizes ∫(|∇f|² + ½vf²)|x|²dx with f → 1 at
//! infinity; radially this is −(r^{d+1}f′)′ + ½v r^{d+1} f = 0.

use std::sync::Arc;

use crate::error::{GgrError, Result};
use crate::quad;
use crate::thermo::{scattering_constant, sphere_area};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    HardCore { a0: f64 },
    SoftSphere { v0: f64, r: f64 },
    Tabulated { r: Vec<f64>, v: Vec<f64>, r0: f64 },
}

/// Radial repulsive potential of compact support in dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    d: usize,
    kind: PotentialKind,
    // monotone cubic slopes for tabulated data
    slopes: Vec<f64>,
}

impl Potential {
    pub fn hard_core(d: usize, a0: f64) -> Result<Self> {
        check_d(d)?;
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(GgrError::Domain(format!("hard-core radius must be positive, got {a0}")));
        }
        Ok(Self { d, kind: PotentialKind::HardCore { a0 }, slopes: Vec::new() })
    }

    pub fn soft_sphere(d: usize, v0: f64, r: f64) -> Result<Self> {
        check_d(d)?;
        if !(v0 >= 0.0) || !v0.is_finite() {
            return Err(GgrError::Domain(format!("soft-sphere height must be non-negative, got {v0}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(GgrError::Domain(format!("soft-sphere radius must be positive, got {r}")));
        }
        Ok(Self { d, kind: PotentialKind::SoftSphere { v0, r }, slopes: Vec::new() })
    }

    /// Tabulated radial potential, interpolated with monotone cubic pieces
    /// on the samples and zero beyond `r0`.
    pub fn tabulated(d: usize, samples: &[(f64, f64)], r0: f64) -> Result<Self> {
        check_d(d)?;
        if samples.len() < 2 {
            return Err(GgrError::Domain("tabulated potential needs at least two samples".into()));
        }
        let r: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let v: Vec<f64> = samples.iter().map(|s| s.1).collect();
        if let Some(bad) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(GgrError::Domain(format!("negative potential sample {bad}")));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] < 0.0 {
            return Err(GgrError::Domain("tabulated radii must be non-negative and strictly increasing".into()));
        }
        if !(r0 > 0.0) || r0 > *r.last().unwrap() + 1e-12 {
            return Err(GgrError::Domain(format!("support radius {r0} must lie inside the table")));
        }
        let slopes = pchip_slopes(&r, &v);
        Ok(Self { d, kind: PotentialKind::Tabulated { r, v, r0 }, slopes })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn support_radius(&self) -> f64 {
        match &self.kind {
            PotentialKind::HardCore { a0 } => *a0,
            PotentialKind::SoftSphere { r, .. } => *r,
            PotentialKind::Tabulated { r0, .. } => *r0,
        }
    }

    pub fn is_hard_core(&self) -> bool {
        matches!(self.kind, PotentialKind::HardCore { .. })
    }

    /// v(r); +∞ inside a hard core; zero at and beyond the support radius.
    pub fn value(&self, r: f64) -> f64 {
        if r >= self.support_radius() {
            return 0.0;
        }
        self.value_inside(r)
    }

    // Value with the support treated as closed (left limit at the edge).
    fn value_inside(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::HardCore { a0 } => {
                if r <= *a0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PotentialKind::SoftSphere { v0, r: rs } => {
                if r <= *rs {
                    *v0
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated { r: rt, v, r0 } => {
                if r > *r0 {
                    return 0.0;
                }
                pchip_eval(rt, v, &self.slopes, r).max(0.0)
            }
        }
    }

    fn max_value(&self) -> f64 {
        match &self.kind {
            PotentialKind::HardCore { .. } => 0.0,
            PotentialKind::SoftSphere { v0, .. } => *v0,
            PotentialKind::Tabulated { v, .. } => v.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Parses a potential description of `key = value` lines:
    /// `kind` (hard_core | soft_sphere | tabulated), `d`, then `a0`, or `V0` and
    /// `R`, or `table` (pairs `r:v` separated by commas/whitespace) with
    /// optional `R0` (defaults to the last table radius).
    pub fn parse_spec(text: &str) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('[') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GgrError::Domain(format!("line {}: expected `key = value`", lineno + 1)))?;
            map.insert(k.trim().to_string(), v.trim().trim_matches('"').to_string());
        }
        let get = |key: &str| map.get(key).ok_or_else(|| GgrError::Domain(format!("missing key `{key}`")));
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse::<f64>()
                .map_err(|_| GgrError::Domain(format!("key `{key}`: not a number")))
        };
        let d = get("d")?
            .parse::<usize>()
            .map_err(|_| GgrError::Domain("key `d`: not an integer".into()))?;
        match get("kind")?.as_str() {
            "hard_core" | "hardcore" => Self::hard_core(d, num("a0")?),
            "soft_sphere" | "softsphere" => Self::soft_sphere(d, num("V0")?, num("R")?),
            "tabulated" => {
                let mut samples = Vec::new();
                for tok in get("table")?.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                    let (a, b) = tok
                        .split_once(':')
                        .ok_or_else(|| GgrError::Domain(format!("key `table`: bad entry `{tok}`")))?;
                    let parse = |s: &str| {
                        s.parse::<f64>().map_err(|_| GgrError::Domain(format!("key `table`: bad number `{s}`")))
                    };
                    samples.push((parse(a)?, parse(b)?));
                }
                let r0 = match map.get("R0") {
                    Some(_) => num("R0")?,
                    None => samples.last().map(|s| s.0).unwrap_or(0.0),
                };
                Self::tabulated(d, &samples, r0)
            }
            other => Err(GgrError::Domain(format!("key `kind`: unknown potential kind `{other}`"))),
        }
    }
}

fn check_d(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(GgrError::Domain(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

// Fritsch–Carlson slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
            let w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
        }
    }
    m
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * m1
}

fn pchip_eval(x: &[f64], y: &[f64], m: &[f64], r: f64) -> f64 {
    if r <= x[0] {
        return y[0];
    }
    if r >= x[x.len() - 1] {
        return y[y.len() - 1];
    }
    let i = x.partition_point(|&xi| xi <= r) - 1;
    hermite(x[i], x[i + 1], y[i], y[i + 1], m[i], m[i + 1], r)
}

/// Step control for the radial integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Maximal step in log r.
    pub log_step: f64,
    /// Starting radius for soft potentials, relative to the support radius.
    pub soft_start: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { log_step: 2e-3, soft_start: 1e-5 }
    }
}

/// Solution of the p-wave scattering problem.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub potential: Potential,
    /// Scattering length from the asymptotic match f₀ ≈ 1 − a^d/r^d.
    pub a: f64,
    /// Scattering length from energy_integral/c_d.
    pub a_variational: f64,
    /// Radial nodes on [r_start, r_max]; node `support_index` is the support radius.
    pub r: Vec<f64>,
    pub f0: Vec<f64>,
    pub df0: Vec<f64>,
    pub support_index: usize,
    /// ∫(|∇f₀|² + ½vf₀²)|x|²dx.
    pub energy_integral: f64,
    /// ∫(|∇f₀|² + ½vf₀²)dx (the extra one-dimensional hypothesis).
    pub plain_energy_integral: f64,
}

fn geometric_piece(lo: f64, hi: f64, log_step: f64, max_step: f64) -> Vec<f64> {
    let mut nodes = vec![lo];
    if hi <= lo {
        return nodes;
    }
    let mut r = lo;
    loop {
        let step = (r * log_step).min(max_step);
        if r + step >= hi - 1e-12 * hi {
            break;
        }
        r += step;
        nodes.push(r);
    }
    nodes.push(hi);
    // an even number of intervals keeps Simpson's rule uniform in order
    if (nodes.len() - 1) % 2 == 1 {
        let k = nodes.len() - 2;
        let mid = 0.5 * (nodes[k] + nodes[k + 1]);
        nodes.insert(k + 1, mid);
    }
    nodes
}

pub fn solve_scattering(v: &Potential, r_max: f64) -> Result<ScatteringSolution> {
    solve_scattering_with(v, r_max, SolverOptions::default())
}

pub fn solve_scattering_with(v: &Potential, r_max: f64, opts: SolverOptions) -> Result<ScatteringSolution> {
    let d = v.d();
    let df = d as f64;
    let support = v.support_radius();
    if !(r_max > 2.0 * support) {
        return Err(GgrError::Precondition(format!(
            "r_max = {r_max} must exceed twice the support radius {support}"
        )));
    }
    let kappa_max = (0.5 * v.max_value()).sqrt();
    let inner_max_step = if kappa_max > 0.0 { 0.02 / kappa_max } else { f64::INFINITY };
    let (r_start, f_start, w_start) = if v.is_hard_core() {
        (support, 0.0, support.powf(df + 1.0))
    } else {
        let rs = opts.soft_start * support;
        let c = v.value_inside(0.0) / (4.0 * (df + 2.0));
        (rs, 1.0 + c * rs * rs, rs.powf(df + 1.0) * 2.0 * c * rs)
    };
    let mut r = geometric_piece(r_start, support, opts.log_step, inner_max_step);
    let support_index = r.len() - 1;
    let outer = geometric_piece(support, r_max, opts.log_step, f64::INFINITY);
    r.extend_from_slice(&outer[1..]);

    // y = (f, w) with w = r^{d+1} f'
    let rhs = |x: f64, f: f64, w: f64, inside: bool| -> (f64, f64) {
        let pot = if inside { v.value_inside(x) } else { v.value(x) };
        let pot = if pot.is_finite() { pot } else { 0.0 };
        (w / x.powf(df + 1.0), 0.5 * pot * x.powf(df + 1.0) * f)
    };
    let n = r.len();
    let mut f = vec![0.0; n];
    let mut w = vec![0.0; n];
    f[0] = f_start;
    w[0] = w_start;
    for i in 0..n - 1 {
        let inside = i < support_index;
        let (x, h) = (r[i], r[i + 1] - r[i]);
        let (k1f, k1w) = rhs(x, f[i], w[i], inside);
        let (k2f, k2w) = rhs(x + 0.5 * h, f[i] + 0.5 * h * k1f, w[i] + 0.5 * h * k1w, inside);
        let (k3f, k3w) = rhs(x + 0.5 * h, f[i] + 0.5 * h * k2f, w[i] + 0.5 * h * k2w, inside);
        let (k4f, k4w) = rhs(x + h, f[i] + h * k3f, w[i] + h * k3w, inside);
        f[i + 1] = f[i] + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        w[i + 1] = w[i] + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    }
    let (fe, we) = (f[n - 1], w[n - 1]);
    // outside: f = α(1 − A/r^d), w = α d A
    let alpha = fe + we / df / r_max.powf(df);
    if !alpha.is_finite() || !(alpha > 0.0) {
        return Err(GgrError::Solver { residual: alpha, context: "matching amplitude not positive".into() });
    }
    let a_d = we / df / alpha;
    if !(a_d >= -1e-14) {
        return Err(GgrError::Solver { residual: a_d, context: "negative scattering volume".into() });
    }
    let a_d = a_d.max(0.0);
    let f0: Vec<f64> = f.iter().map(|x| x / alpha).collect();
    let df0: Vec<f64> = w.iter().zip(&r).map(|(wi, ri)| wi / alpha / ri.powf(df + 1.0)).collect();

    let area = sphere_area(d);
    let moment = |weight: i32| -> f64 {
        let integrand = |i: usize, inside: bool| {
            let pot = if inside { v.value_inside(r[i]) } else { v.value(r[i]) };
            let pot = if pot.is_finite() { pot } else { 0.0 };
            (df0[i] * df0[i] + 0.5 * pot * f0[i] * f0[i]) * r[i].powi(weight)
        };
        let y_in: Vec<f64> = (0..=support_index).map(|i| integrand(i, true)).collect();
        let y_out: Vec<f64> = (support_index..n).map(|i| integrand(i, false)).collect();
        quad::simpson_nonuniform(&r[..=support_index], &y_in) + quad::simpson_nonuniform(&r[support_index..], &y_out)
    };
    // tails beyond r_max: f₀′ = d A r^{−d−1}
    let energy_integral =
        area * (moment(d as i32 + 1) + df * a_d * a_d * r_max.powf(-df));
    let plain_energy_integral =
        area * (moment(d as i32 - 1) + df * df * a_d * a_d * r_max.powf(-df - 2.0) / (df + 2.0));
    let a = a_d.powf(1.0 / df);
    let a_variational = (energy_integral / scattering_constant(d)).max(0.0).powf(1.0 / df);
    Ok(ScatteringSolution {
        potential: v.clone(),
        a,
        a_variational,
        r,
        f0,
        df0,
        support_index,
        energy_integral,
        plain_energy_integral,
    })
}

impl ScatteringSolution {
    pub fn d(&self) -> usize {
        self.potential.d()
    }

    /// a^d from the asymptotic match.
    pub fn scattering_volume(&self) -> f64 {
        self.a.powi(self.d() as i32)
    }

    /// f₀(r): interpolated inside the support, exact exterior form outside.
    pub fn f0_at(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// f₀′(r).
    pub fn df0_at(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let support = self.potential.support_radius();
        let df = self.d() as f64;
        if r >= support {
            let ad = self.scattering_volume();
            return (1.0 - ad / r.powf(df), df * ad / r.powf(df + 1.0));
        }
        if r <= self.r[0] {
            return if self.potential.is_hard_core() { (0.0, 0.0) } else { (self.f0[0], self.df0[0] * r / self.r[0]) };
        }
        let nodes = &self.r[..=self.support_index];
        let i = (nodes.partition_point(|&x| x <= r) - 1).min(self.support_index - 1);
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let f = hermite(x0, x1, self.f0[i], self.f0[i + 1], self.df0[i], self.df0[i + 1], r);
        // derivative by linear interpolation of the nodal slopes
        let t = (r - x0) / (x1 - x0);
        (f, (1.0 - t) * self.df0[i] + t * self.df0[i + 1])
    }
}

/// Cut-off, rescaled scattering function: f = f₀/(1 − a^d/b^d) for r ≤ b and
/// f = 1 beyond; g = f² − 1.
#[derive(Debug, Clone)]
pub struct JastrowFactor {
    sol: Arc<ScatteringSolution>,
    b: f64,
    scale: f64,
}

pub fn build_jastrow(sol: &ScatteringSolution, b: f64) -> Result<JastrowFactor> {
    let support = sol.potential.support_radius();
    if !(b > support) {
        return Err(GgrError::Precondition(format!("cutoff b = {b} must exceed the potential range {support}")));
    }
    if !(b > sol.a) {
        return Err(GgrError::Precondition(format!("cutoff b = {b} must exceed the scattering length {}", sol.a)));
    }
    let scale = 1.0 / (1.0 - sol.scattering_volume() / b.powi(sol.d() as i32));
    Ok(JastrowFactor { sol: Arc::new(sol.clone()), b, scale })
}

impl JastrowFactor {
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn d(&self) -> usize {
        self.sol.d()
    }
    pub fn solution(&self) -> &ScatteringSolution {
        &self.sol
    }
    pub fn potential(&self) -> &Potential {
        &self.sol.potential
    }

    pub fn f(&self, r: f64) -> f64 {
        if r >= self.b {
            1.0
        } else {
            (self.scale * self.sol.f0_at(r)).min(1.0)
        }
    }

    pub fn df(&self, r: f64) -> f64 {
        if r >= self.b {
            0.0
        } else {
            self.scale * self.sol.df0_at(r)
        }
    }

    pub fn g(&self, r: f64) -> f64 {
        let f = self.f(r);
        f * f - 1.0
    }

    // ∫₀^b F(r)·r^{n+d−1}dr·|S^{d−1}| split into core, interior grid and the
    // analytic exterior; `integrand(r, f, f′, v)`.
    fn radial_moment<F: Fn(f64, f64, f64) -> f64>(&self, n: u32, core_value: f64, integrand: F) -> f64 {
        let d = self.d();
        let sol = &*self.sol;
        let power = n as i32 + d as i32 - 1;
        let support = sol.potential.support_radius();
        let mut total = 0.0;
        // region below the first node: hard core (or negligible soft start)
        let r0 = sol.r[0];
        total += core_value * r0.powi(power + 1) / (power + 1) as f64;
        if sol.support_index > 0 {
            let nodes = &sol.r[..=sol.support_index];
            let y: Vec<f64> = (0..=sol.support_index)
                .map(|i| {
                    let pot = sol.potential.value_inside(nodes[i]);
                    integrand(self.scale * sol.f0[i], self.scale * sol.df0[i], pot) * nodes[i].powi(power)
                })
                .collect();
            total += quad::simpson_nonuniform(nodes, &y);
        }
        let (lo, hi) = (support.ln(), self.b.ln());
        if hi > lo {
            let ext = |t: f64| {
                let r = t.exp();
                integrand(self.f(r), self.df(r), 0.0) * r.powi(power + 1)
            };
            total += quad::integrate(ext, lo, hi, 1e-300, 1e-12).unwrap_or(f64::NAN);
        }
        sphere_area(d) * total
    }

    /// I_{|x|^n g} = ∫|g(x)||x|^n dx.
    pub fn g_moment(&self, n: u32) -> f64 {
        let core = if self.potential().is_hard_core() { 1.0 } else { (1.0 - (self.scale * self.sol.f0[0]).powi(2)).abs() };
        self.radial_moment(n, core, |f, _, _| (1.0 - f * f).abs())
    }

    /// ∫(|∇f|² + ½vf²)|x|^n dx; the hard core contributes nothing since f = 0 there.
    pub fn energy_moment(&self, n: u32) -> f64 {
        self.radial_moment(n, 0.0, |f, df, v| df * df + 0.5 * v * f * f)
    }

    /// ∫f|∇f||x|^n dx.
    pub fn f_gradf_moment(&self, n: u32) -> f64 {
        self.radial_moment(n, 0.0, |f, df, _| f * df.abs())
    }
}
