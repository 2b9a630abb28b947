//! Free Fermi gas in a periodic box: momentum lattice, one-particle kernel,
//! Wick determinants and kernel moments.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{GgrError, Result};
use crate::fft::fft_nd;
use crate::quad;
use crate::thermo::{sphere_area, GrandParams};

/// Index arithmetic on the periodic grid (Z_m)^d, row-major with the last
/// axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    pub d: usize,
    pub m: usize,
}

impl TorusGrid {
    pub fn new(d: usize, m: usize) -> Self {
        Self { d, m }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, mut idx: usize) -> [usize; 3] {
        let mut c = [0usize; 3];
        for axis in (0..self.d).rev() {
            c[axis] = idx % self.m;
            idx /= self.m;
        }
        c
    }

    pub fn index(&self, c: &[usize]) -> usize {
        c.iter().take(self.d).fold(0, |acc, &x| acc * self.m + x % self.m)
    }

    /// Index of a − b.
    pub fn sub(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let mut out = 0;
        for axis in 0..self.d {
            out = out * self.m + (ca[axis] + self.m - cb[axis]) % self.m;
        }
        out
    }

    /// Index of a + b.
    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let mut out = 0;
        for axis in 0..self.d {
            out = out * self.m + (ca[axis] + cb[axis]) % self.m;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        self.sub(0, a)
    }

    /// Integer combination Σ c_i·idx_i on the grid.
    pub fn combine(&self, terms: &[(i64, usize)]) -> usize {
        let m = self.m as i64;
        let mut acc = [0i64; 3];
        for &(c, idx) in terms {
            let co = self.coords(idx);
            for axis in 0..self.d {
                acc[axis] += c * co[axis] as i64;
            }
        }
        let mut out = 0usize;
        for axis in 0..self.d {
            out = out * self.m + acc[axis].rem_euclid(m) as usize;
        }
        out
    }

    /// Centered representative in [−m/2, m/2) per axis.
    pub fn signed(&self, idx: usize) -> [i64; 3] {
        let c = self.coords(idx);
        let mut s = [0i64; 3];
        let half = (self.m / 2) as i64;
        for axis in 0..self.d {
            let v = c[axis] as i64;
            s[axis] = if v >= half { v - self.m as i64 } else { v };
        }
        s
    }
}

/// Fermi factor ze^{−βk²}/(1+ze^{−βk²}) evaluated without overflow.
pub fn fermi_factor(beta: f64, log_z: f64, k2: f64) -> f64 {
    let u = log_z - beta * k2;
    if u > 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Translation-invariant one-particle kernel tabulated on a periodic grid:
/// γ̂ on the Brillouin zone and γ(x) = L^{−d}Σ_k γ̂(k)e^{−ik·x} on the grid.
/// Both diagram engines and the lattice oracle run on this.
#[derive(Debug, Clone)]
pub struct TorusKernel {
    pub grid: TorusGrid,
    pub spacing: f64,
    gamma_hat: Vec<f64>,
    gamma: Vec<f64>,
}

impl TorusKernel {
    /// Builds the kernel from γ̂ indexed by momentum grid index.
    pub fn from_gamma_hat(grid: TorusGrid, spacing: f64, gamma_hat: Vec<f64>) -> Self {
        assert_eq!(gamma_hat.len(), grid.len());
        let vol = (grid.m as f64 * spacing).powi(grid.d as i32);
        let mut buf: Vec<Complex64> = gamma_hat.iter().map(|&g| Complex64::new(g, 0.0)).collect();
        fft_nd(&mut buf, grid.m, grid.d, true);
        let gamma = buf.iter().map(|c| c.re / vol).collect();
        Self { grid, spacing, gamma_hat, gamma }
    }

    pub fn d(&self) -> usize {
        self.grid.d
    }
    pub fn m(&self) -> usize {
        self.grid.m
    }
    pub fn length(&self) -> f64 {
        self.grid.m as f64 * self.spacing
    }
    pub fn volume(&self) -> f64 {
        self.length().powi(self.grid.d as i32)
    }
    /// Volume element h^d of one grid cell.
    pub fn cell(&self) -> f64 {
        self.spacing.powi(self.grid.d as i32)
    }
    /// γ(displacement index).
    pub fn gamma(&self, disp: usize) -> f64 {
        self.gamma[disp]
    }
    pub fn gamma_table(&self) -> &[f64] {
        &self.gamma
    }
    /// γ̂(momentum index).
    pub fn gamma_hat(&self, k: usize) -> f64 {
        self.gamma_hat[k]
    }
    pub fn gamma_hat_table(&self) -> &[f64] {
        &self.gamma_hat
    }
    /// Finite-box density γ(0).
    pub fn rho0(&self) -> f64 {
        self.gamma[0]
    }
    /// Momentum vector of a grid index (centered Brillouin zone).
    pub fn momentum(&self, k: usize) -> [f64; 3] {
        let s = self.grid.signed(k);
        let unit = 2.0 * PI / self.length();
        [unit * s[0] as f64, unit * s[1] as f64, unit * s[2] as f64]
    }
    /// Position of a grid index.
    pub fn position(&self, x: usize) -> [f64; 3] {
        let c = self.grid.coords(x);
        [c[0] as f64 * self.spacing, c[1] as f64 * self.spacing, c[2] as f64 * self.spacing]
    }
    /// Minimal-image distance of a displacement index.
    pub fn distance(&self, disp: usize) -> f64 {
        let s = self.grid.signed(disp);
        (0..self.d()).map(|a| (s[a] as f64 * self.spacing).powi(2)).sum::<f64>().sqrt()
    }

    /// Samples a radial function at minimal-image distances.
    pub fn sample_radial<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.grid.len()).map(|x| f(self.distance(x))).collect()
    }

    /// Exact grid transform ĝ(k) = h^dΣ_x g(x)e^{−ik·x} of a grid function.
    pub fn transform(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, self.grid.m, self.grid.d, true);
        let cell = self.cell();
        buf.iter().map(|c| c * cell).collect()
    }

    /// ρ^(q)(X) = det[γ(x_i − x_j)] for grid points X.
    pub fn wick_density(&self, points: &[usize]) -> f64 {
        let q = points.len();
        if q == 0 {
            return 1.0;
        }
        let m = DMatrix::from_fn(q, q, |i, j| self.gamma[self.grid.sub(points[i], points[j])]);
        m.determinant()
    }
}

/// Free Fermi gas on a periodic box of side L with M grid points per side.
#[derive(Debug)]
pub struct DiscreteTorusModel {
    pub l: f64,
    pub d: usize,
    pub m: usize,
    pub params: GrandParams,
    kernel: OnceLock<TorusKernel>,
}

pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;
// Tables above this many points are only built on demand.
const EAGER_TABLE_LIMIT: usize = 1 << 22;

/// Builds the model, checking that γ̂ at the zone edge is below 1e−12.
pub fn build_model(l: f64, d: usize, m: usize, params: GrandParams) -> Result<DiscreteTorusModel> {
    build_model_with_tol(l, d, m, params, DEFAULT_TRUNC_TOL)
}

pub fn build_model_with_tol(l: f64, d: usize, m: usize, params: GrandParams, trunc_tol: f64) -> Result<DiscreteTorusModel> {
    if params.d() != d {
        return Err(GgrError::Precondition(format!("model dimension {d} differs from parameter dimension {}", params.d())));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(GgrError::Domain(format!("box side must be positive, got {l}")));
    }
    let needed = needed_grid_points(l, &params, trunc_tol);
    if m % 2 != 0 || m < 8 || m < needed {
        return Err(GgrError::Refinement {
            needed_m: needed.max(8),
            reason: format!("M = {m} must be even, at least 8, and resolve the Fermi factor to {trunc_tol:e} at the zone edge"),
        });
    }
    let model = DiscreteTorusModel { l, d, m, params, kernel: OnceLock::new() };
    if m.pow(d as u32) <= EAGER_TABLE_LIMIT {
        let k = model.kernel();
        let direct = model.rho0_box();
        if (k.rho0() - direct).abs() > 1e-12 * direct.max(1e-300) + 1e-300 {
            return Err(GgrError::Internal(format!("kernel self-test failed: γ(0) = {} vs {direct}", k.rho0())));
        }
    }
    Ok(model)
}

/// Smallest even M for which γ̂ at the zone edge (|k| = π/h) is below `tol`.
pub fn needed_grid_points(l: f64, params: &GrandParams, tol: f64) -> usize {
    // ze^{−βk²} ≤ tol/(1−tol) at k = πM/L
    let target = params.log_z() - (tol / (1.0 - tol)).ln();
    let kmin = (target.max(0.0) / params.beta()).sqrt();
    let mut m = (kmin * l / PI).ceil() as usize;
    m += m % 2;
    m.max(2)
}

impl DiscreteTorusModel {
    pub fn spacing(&self) -> f64 {
        self.l / self.m as f64
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    pub fn grid(&self) -> TorusGrid {
        TorusGrid::new(self.d, self.m)
    }

    /// γ̂ as a function of |k|².
    pub fn gamma_hat_of(&self, k2: f64) -> f64 {
        fermi_factor(self.params.beta(), self.params.log_z(), k2)
    }

    /// Tabulated kernel, built by FFT on first use.
    pub fn kernel(&self) -> &TorusKernel {
        self.kernel.get_or_init(|| {
            let grid = self.grid();
            let unit = 2.0 * PI / self.l;
            let gh: Vec<f64> = (0..grid.len())
                .map(|k| {
                    let s = grid.signed(k);
                    let k2: f64 = (0..self.d).map(|a| (unit * s[a] as f64).powi(2)).sum();
                    self.gamma_hat_of(k2)
                })
                .collect();
            TorusKernel::from_gamma_hat(grid, self.spacing(), gh)
        })
    }

    // Momenta in the zone whose γ̂ is not negligible against the largest one.
    fn significant_momenta(&self) -> Vec<([f64; 3], f64)> {
        let unit = 2.0 * PI / self.l;
        let cut2 = (self.params.log_z().max(0.0) + 60.0) / self.params.beta();
        let nmax = ((cut2.sqrt() / unit).ceil() as i64).min(self.m as i64 / 2);
        let half = (self.m / 2) as i64;
        let range: Vec<i64> = (-nmax..=nmax).filter(|n| *n >= -half && *n < half).collect();
        let mut out = Vec::new();
        let mut idx = [0usize; 3];
        loop {
            let mut k = [0.0; 3];
            for a in 0..self.d {
                k[a] = unit * range[idx[a]] as f64;
            }
            let k2 = k.iter().map(|x| x * x).sum::<f64>();
            if k2 <= cut2 {
                out.push((k, self.gamma_hat_of(k2)));
            }
            let mut a = 0;
            loop {
                if a == self.d {
                    return out;
                }
                idx[a] += 1;
                if idx[a] < range.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }

    /// L^{−d}Σ_k γ̂(k) over the zone.
    pub fn rho0_box(&self) -> f64 {
        self.significant_momenta().iter().map(|(_, g)| g).sum::<f64>() / self.volume()
    }

    /// γ(x) at an arbitrary point by direct momentum summation.
    pub fn gamma_at(&self, x: &[f64]) -> f64 {
        let moms = self.significant_momenta();
        let mut s = 0.0;
        for (k, g) in &moms {
            let phase: f64 = (0..self.d).map(|a| k[a] * x[a]).sum();
            s += g * phase.cos();
        }
        s / self.volume()
    }

    /// ρ^(q) at arbitrary points.
    pub fn wick_density_at(&self, points: &[[f64; 3]]) -> f64 {
        let q = points.len();
        let moms = self.significant_momenta();
        let vol = self.volume();
        let kernel = |x: &[f64; 3]| {
            let mut s = 0.0;
            for (k, g) in &moms {
                s += g * (0..self.d).map(|a| k[a] * x[a]).sum::<f64>().cos();
            }
            s / vol
        };
        let m = DMatrix::from_fn(q, q, |i, j| {
            let dx = [points[i][0] - points[j][0], points[i][1] - points[j][1], points[i][2] - points[j][2]];
            kernel(&dx)
        });
        m.determinant()
    }
}

/// ρ^(q)(X) on grid points of a model.
pub fn wick_density(model: &DiscreteTorusModel, points: &[usize]) -> f64 {
    model.kernel().wick_density(points)
}

/// Fitted small-separation coefficient c in ρ^(2)(0, r) ≈ c·r².
///
/// Samples r = h, 2h, … inside r ≤ 0.05ρ₀^{−1/d} along the first axis and
/// fits c r² + c₄ r⁴ by least squares.
pub fn rho2_quadratic_coefficient(model: &DiscreteTorusModel) -> Result<f64> {
    let rho0 = model.rho0_box();
    let window = 0.05 * rho0.powf(-1.0 / model.d as f64);
    let h = model.spacing();
    let count = (window / h + 1e-9).floor() as usize;
    if count < 4 {
        let mut needed = (4.0 * model.l / window).ceil() as usize;
        needed += needed % 2;
        return Err(GgrError::Refinement { needed_m: needed, reason: "fit window holds fewer than 4 grid points".into() });
    }
    let (mut s44, mut s46, mut s66, mut sy4, mut sy6) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 1..=count {
        let r = j as f64 * h;
        let g = model.gamma_at(&[r, 0.0, 0.0]);
        let y = rho0 * rho0 - g * g;
        let (r2, r4) = (r * r, r * r * r * r);
        s44 += r2 * r2;
        s46 += r2 * r4;
        s66 += r4 * r4;
        sy4 += y * r2;
        sy6 += y * r4;
    }
    let det = s44 * s66 - s46 * s46;
    Ok((sy4 * s66 - sy6 * s46) / det)
}

/// The predicted coefficient 2π(−Li_{d/2+1}(−z))/(−Li_{d/2}(−z))^{1+2/d}ρ₀^{2+2/d}.
pub fn rho2_coefficient_formula(params: &GrandParams, rho0: f64) -> Result<f64> {
    let d = params.d() as f64;
    Ok(2.0 * PI * crate::thermo::polylog_ratio(params)? * rho0.powf(2.0 + 2.0 / d))
}

// exp(n·u − m·log(1+e^u)) with u = log z − β|k|².
fn moment_weight(u: f64, n: u32, m: u32) -> f64 {
    let softplus = if u > 0.0 { u + (-u).exp().ln_1p() } else { u.exp().ln_1p() };
    (n as f64 * u - m as f64 * softplus).exp()
}

/// L^{−d}Σ_{k∈(2π/L)Z^d}|k|^p γ̂^n/(1+γ̂)^m with γ̂ = ze^{−β|k|²}.
pub fn momentum_moment(l: f64, params: &GrandParams, p: u32, n: u32, m: u32) -> Result<f64> {
    if n < 1 || n > m {
        return Err(GgrError::Precondition(format!("need 1 <= n <= m, got n={n}, m={m}")));
    }
    let d = params.d();
    let (beta, log_z) = (params.beta(), params.log_z());
    let unit = 2.0 * PI / l;
    // beyond this |k| every term is below e^{−80} of the largest
    let kcut = ((log_z.max(0.0) + 80.0 / n as f64 + p as f64) / beta).sqrt() + 1.0;
    let nmax = (kcut / unit).ceil() as i64;
    let line: Vec<i64> = (-nmax..=nmax).collect();
    let mut total = 0.0;
    let mut idx = [0usize; 3];
    loop {
        let k2: f64 = (0..d).map(|a| (unit * line[idx[a]] as f64).powi(2)).sum();
        let w = moment_weight(log_z - beta * k2, n, m);
        total += if p == 0 { w } else { k2.powf(p as f64 / 2.0) * w };
        let mut a = 0;
        loop {
            if a == d {
                return Ok(total / l.powi(d as i32));
            }
            idx[a] += 1;
            if idx[a] < line.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// (2π)^{−d}∫|k|^p γ̂^n/(1+γ̂)^m dk by radial quadrature.
pub fn momentum_moment_continuum(params: &GrandParams, p: u32, n: u32, m: u32) -> Result<f64> {
    let d = params.d();
    let (beta, log_z) = (params.beta(), params.log_z());
    let kf = (log_z.max(0.0) / beta).sqrt();
    let kmax = ((log_z.max(0.0) + 80.0 / n as f64 + p as f64) / beta).sqrt() + 1.0;
    let f = |k: f64| k.powi(p as i32 + d as i32 - 1) * moment_weight(log_z - beta * k * k, n, m);
    let mut v = 0.0;
    let split = kf.max(1e-6).min(kmax);
    v += quad::integrate(f, 0.0, split, 1e-300, 1e-14)?;
    v += quad::integrate(f, split, kmax, 1e-300, 1e-14)?;
    Ok(sphere_area(d) * v / (2.0 * PI).powi(d as i32))
}

/// I_γ and the first and second derivative analogues (max over components).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    pub i_gamma: f64,
    pub i_dgamma: f64,
    pub i_d2gamma: f64,
}

/// Grid integrals of |γ|, |∂_μγ| and |∂_μ∂_νγ| over the box; derivatives are
/// spectral (γ̂ multiplied by −ik components, the unpaired zone-edge mode dropped).
pub fn kernel_moments(kernel: &TorusKernel) -> KernelMoments {
    let grid = kernel.grid;
    let d = grid.d;
    let cell = kernel.cell();
    let i_gamma = cell * kernel.gamma.iter().map(|g| g.abs()).sum::<f64>();
    let vol = kernel.volume();
    let half = (grid.m / 2) as i64;
    let spectral = |factor: &dyn Fn(&[f64; 3], &[i64; 3]) -> Complex64| -> f64 {
        let mut buf: Vec<Complex64> = (0..grid.len())
            .map(|k| {
                let s = grid.signed(k);
                if (0..d).any(|a| s[a] == -half) {
                    return Complex64::new(0.0, 0.0);
                }
                kernel.gamma_hat[k] * factor(&kernel.momentum(k), &s)
            })
            .collect();
        fft_nd(&mut buf, grid.m, d, true);
        cell * buf.iter().map(|c| (c.re / vol).abs()).sum::<f64>()
    };
    let mut i_dgamma: f64 = 0.0;
    let mut i_d2gamma: f64 = 0.0;
    for mu in 0..d {
        i_dgamma = i_dgamma.max(spectral(&|k, _| Complex64::new(0.0, -k[mu])));
        for nu in mu..d {
            i_d2gamma = i_d2gamma.max(spectral(&|k, _| Complex64::new(-k[mu] * k[nu], 0.0)));
        }
    }
    KernelMoments { i_gamma, i_dgamma, i_d2gamma }
}

/// I_{|x|^n g} = h^dΣ_x|g(x)||x|^n for a grid function on the box.
pub fn grid_moment(kernel: &TorusKernel, g: &[f64], n: u32) -> f64 {
    kernel.cell() * (0..g.len()).map(|x| g[x].abs() * kernel.distance(x).powi(n as i32)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::free_density;

    fn params(d: usize, beta: f64, log_z: f64) -> GrandParams {
        GrandParams::from_log_fugacity(d, beta, log_z).unwrap()
    }

    #[test]
    fn refinement_error_names_grid() {
        let p = params(1, 1.0, 0.0);
        match build_model(20.0, 1, 8, p) {
            Err(GgrError::Refinement { needed_m, .. }) => {
                assert!(needed_m > 8);
                assert!(build_model(20.0, 1, needed_m, p).is_ok());
            }
            other => panic!("{other:?}"),
        }
        assert!(build_model(20.0, 1, 33, p).is_err());
    }

    #[test]
    fn kernel_symmetry_and_bounds() {
        for (d, l, m) in [(1usize, 20.0, 64usize), (2, 8.0, 32)] {
            let model = build_model(l, d, m, params(d, 1.0, 0.5)).unwrap();
            let k = model.kernel();
            let grid = k.grid;
            for x in 0..grid.len() {
                let a = k.gamma(x);
                assert!((a - k.gamma(grid.neg(x))).abs() <= 1e-12 * k.rho0());
                assert!(a.abs() <= k.rho0() * (1.0 + 1e-12));
            }
            for kk in 0..grid.len() {
                assert!(k.gamma_hat(kk) > 0.0 && k.gamma_hat(kk) < 1.0);
            }
            // direct sums agree with the table at grid points
            let x = 3;
            let pos = k.position(x);
            assert!((model.gamma_at(&pos) - k.gamma(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn classical_limit_is_heat_kernel() {
        let l = 10.0;
        let p = params(1, 1.0, (1e-6f64).ln());
        let model = build_model(l, 1, 64, p).unwrap();
        let k = model.kernel();
        for x in [0usize, 5, 17, 32] {
            let r = k.position(x)[0];
            // periodized heat kernel e^{−r²/4β}/√(4πβ)
            let heat: f64 = (-20..=20).map(|w| (-(r + w as f64 * l).powi(2) / 4.0).exp()).sum::<f64>() / (4.0 * PI).sqrt();
            let v = k.gamma(x) / p.z();
            assert!((v / heat - 1.0).abs() < 1e-4, "x={x}: {v} vs {heat}");
        }
    }

    #[test]
    fn density_matches_thermo() {
        let p = params(1, 1.0, 0.0);
        let model = build_model(20.0, 1, 256, p).unwrap();
        let rho = free_density(&p).unwrap();
        assert!((model.kernel().rho0() / rho - 1.0).abs() < 1.0 / 20.0);
        let mm = momentum_moment(20.0, &p, 0, 1, 1).unwrap();
        assert!((mm - model.rho0_box()).abs() < 1e-14);
    }

    #[test]
    fn wick_rules() {
        let model = build_model(6.0, 2, 16, params(2, 0.8, 1.0)).unwrap();
        let k = model.kernel();
        let rho0 = k.rho0();
        assert!(k.wick_density(&[5, 5]).abs() < 1e-16);
        for x in [0, 7, 100] {
            assert!((k.wick_density(&[x]) - rho0).abs() < 1e-15);
        }
        let (a, b) = (3usize, 77usize);
        let g = k.gamma(k.grid.sub(a, b));
        assert!((k.wick_density(&[a, b]) - (rho0 * rho0 - g * g)).abs() < 1e-14);
    }

    #[test]
    fn rho2_coefficient_1d() {
        let p = params(1, 1.0, 0.0);
        let rho0 = free_density(&p).unwrap();
        let l = (50.0 * p.zeta() / rho0).ceil();
        let w = 0.05 / rho0;
        let mut m = (5.0 * l / w).ceil() as usize;
        m += m % 2;
        let model = build_model(l, 1, m, p).unwrap();
        let fit = rho2_quadratic_coefficient(&model).unwrap();
        let formula = rho2_coefficient_formula(&p, model.rho0_box()).unwrap();
        assert!((fit / formula - 1.0).abs() < 0.05, "{fit} vs {formula}");
        let coarse = build_model(l, 1, needed_grid_points(l, &p, 1e-12), p).unwrap();
        assert!(matches!(rho2_quadratic_coefficient(&coarse), Err(GgrError::Refinement { .. })));
    }

    #[test]
    fn continuum_moment_oracle() {
        // (p,n,m) = (0,1,1) in the continuum is the density
        let p = params(2, 1.3, 0.7);
        let c = momentum_moment_continuum(&p, 0, 1, 1).unwrap();
        assert!((c / free_density(&p).unwrap() - 1.0).abs() < 1e-10);
        // (2,1,1) gives (d/2)ψ₀
        let c = momentum_moment_continuum(&p, 2, 1, 1).unwrap();
        let psi = crate::thermo::free_pressure(&p).unwrap();
        assert!((c / (psi) - 1.0).abs() < 1e-10);
        let lat = momentum_moment(40.0, &p, 2, 1, 1).unwrap();
        assert!((lat / c - 1.0).abs() < 1e-8);
    }

    #[test]
    fn spectral_derivatives_vs_finite_differences() {
        let model = build_model(12.0, 1, 64, params(1, 1.0, 2.0)).unwrap();
        let k = model.kernel();
        let km = kernel_moments(k);
        let h = k.spacing;
        let eps = 1e-3;
        let (mut i1, mut i2) = (0.0, 0.0);
        for x in 0..k.grid.len() {
            let r = k.position(x)[0];
            let gp = model.gamma_at(&[r + eps]);
            let gm = model.gamma_at(&[r - eps]);
            let g0 = model.gamma_at(&[r]);
            // fourth-order stencils
            let gpp = model.gamma_at(&[r + 2.0 * eps]);
            let gmm = model.gamma_at(&[r - 2.0 * eps]);
            i1 += ((-gpp + 8.0 * gp - 8.0 * gm + gmm) / (12.0 * eps)).abs();
            i2 += ((-gpp + 16.0 * gp - 30.0 * g0 + 16.0 * gm - gmm) / (12.0 * eps * eps)).abs();
        }
        assert!((i1 * h - km.i_dgamma).abs() < 1e-6 * km.i_dgamma.max(1.0));
        assert!((i2 * h - km.i_d2gamma).abs() < 1e-5 * km.i_d2gamma.max(1.0));
    }

    #[test]
    fn volume_uniform_i_gamma() {
        let p = params(1, 1.0, 3.0);
        let a = kernel_moments(build_model(40.0, 1, 128, p).unwrap().kernel()).i_gamma;
        let b = kernel_moments(build_model(80.0, 1, 256, p).unwrap().kernel()).i_gamma;
        assert!((a / b - 1.0).abs() < 0.01);
    }
}
