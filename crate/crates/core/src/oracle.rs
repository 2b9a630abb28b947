//! Exact Fock-space computations for a small lattice Fermi gas.
//!
//! Ground truth for the GGR identities: on a lattice the expansions of
//! Z_J and ρ_J^(q) hold exactly with the lattice one-particle kernel.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::diagrams::{zj_expansion, DiagramContext, Engine, TailInputs};
use crate::error::{GgrError, Result};
use crate::linalg::symmetric_eigen;
use crate::lattice::{kernel_moments, TorusGrid, TorusKernel};
use crate::registry::ConstantRegistry;

/// Largest number of sites (Fock dimension 2^14).
pub const MAX_SITES: usize = 14;

/// Fermions hopping on a ring (d = 1) or a square torus (d = 2) with unit
/// spacing, a pair potential and a Jastrow factor, both given per
/// displacement.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    grid: TorusGrid,
    h: DMatrix<f64>,
    v: Vec<f64>,
    f: Vec<f64>,
    pub beta: f64,
    pub mu: f64,
}

impl LatticeModel {
    /// Free model with hopping Laplacian, v = 0 and f = 1.
    pub fn new(d: usize, side: usize, beta: f64, mu: f64) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return Err(GgrError::Domain(format!("lattice oracle supports d = 1, 2, got {d}")));
        }
        let grid = TorusGrid::new(d, side);
        let sites = grid.len();
        if sites == 0 || sites > MAX_SITES {
            return Err(GgrError::SizeGuard(format!("{sites} sites, at most {MAX_SITES}")));
        }
        if !(beta > 0.0) || !mu.is_finite() {
            return Err(GgrError::Domain(format!("need beta > 0 and finite mu, got {beta}, {mu}")));
        }
        let mut h = DMatrix::zeros(sites, sites);
        for x in 0..sites {
            let c = grid.coords(x);
            for a in 0..d {
                h[(x, x)] += 2.0;
                for step in [1, side - 1] {
                    let mut nb = c;
                    nb[a] = (c[a] + step) % side;
                    h[(x, grid.index(&nb))] -= 1.0;
                }
            }
        }
        Ok(Self { grid, h, v: vec![0.0; sites], f: vec![1.0; sites], beta, mu })
    }

    /// Jastrow factor per displacement index; must be even and in [0, 1].
    pub fn with_jastrow(mut self, f: Vec<f64>) -> Result<Self> {
        self.check_even(&f, "f")?;
        if f.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(GgrError::Domain("Jastrow factor must lie in [0, 1]".into()));
        }
        self.f = f;
        Ok(self)
    }

    /// Pair potential per displacement index; must be even and ≥ 0.
    pub fn with_potential(mut self, v: Vec<f64>) -> Result<Self> {
        self.check_even(&v, "v")?;
        if v.iter().any(|&x| !(x >= 0.0)) {
            return Err(GgrError::Domain("pair potential must be nonnegative".into()));
        }
        self.v = v;
        Ok(self)
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..self.clone() }
    }

    fn check_even(&self, t: &[f64], name: &str) -> Result<()> {
        if t.len() != self.sites() {
            return Err(GgrError::Precondition(format!("{name} needs {} entries", self.sites())));
        }
        for x in 0..t.len() {
            if (t[x] - t[self.grid.neg(x)]).abs() > 1e-14 {
                return Err(GgrError::Domain(format!("{name} is not even")));
            }
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.grid.len()
    }
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }
    pub fn hopping(&self) -> &DMatrix<f64> {
        &self.h
    }
    pub fn f(&self, disp: usize) -> f64 {
        self.f[disp]
    }
    pub fn v(&self, disp: usize) -> f64 {
        self.v[disp]
    }

    /// Band energy 2Σ_a(1 − cos k_a) at a momentum index.
    pub fn dispersion(&self, k: usize) -> f64 {
        let s = self.grid.signed(k);
        (0..self.grid.d).map(|a| 2.0 - 2.0 * (2.0 * PI * s[a] as f64 / self.grid.m as f64).cos()).sum()
    }

    /// The free one-particle kernel on the common diagram substrate.
    pub fn kernel(&self) -> TorusKernel {
        let gh = (0..self.sites()).map(|k| fermi(self.beta * (self.dispersion(k) - self.mu))).collect();
        TorusKernel::from_gamma_hat(self.grid, 1.0, gh)
    }

    /// g = f² − 1 per displacement.
    pub fn g_table(&self) -> Vec<f64> {
        self.f.iter().map(|f| f * f - 1.0).collect()
    }

    // F(S)² for an occupation bitmask.
    fn f2(&self, s: u32) -> f64 {
        let occ = occupied(s);
        let mut w = 1.0;
        for (a, &i) in occ.iter().enumerate() {
            for &j in &occ[..a] {
                let fij = self.f[self.grid.sub(i, j)];
                w *= fij * fij;
            }
        }
        w
    }

    fn pair_energy(&self, s: u32) -> f64 {
        let occ = occupied(s);
        let mut e = 0.0;
        for (a, &i) in occ.iter().enumerate() {
            for &j in &occ[..a] {
                e += self.v[self.grid.sub(i, j)];
            }
        }
        e
    }

    // e^{−βh}
    fn boltzmann(&self) -> DMatrix<f64> {
        let eig = symmetric_eigen(self.h.clone());
        let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| (-self.beta * e).exp()));
        &eig.eigenvectors * diag * eig.eigenvectors.transpose()
    }

    /// Weights F(S)²e^{βμ|S|}det[(e^{−βh})_{SS}] over all occupations S.
    fn jastrow_weights(&self) -> Vec<f64> {
        let a = self.boltzmann();
        let m = self.sites();
        (0u32..1 << m)
            .map(|s| {
                let f2 = self.f2(s);
                if f2 == 0.0 {
                    return 0.0;
                }
                let occ = occupied(s);
                let sub = DMatrix::from_fn(occ.len(), occ.len(), |i, j| a[(occ[i], occ[j])]);
                f2 * (self.beta * self.mu * occ.len() as f64).exp() * sub.determinant()
            })
            .collect()
    }

    /// log Z_J = log Tr F²e^{−β(ℋ−μ𝒩)}.
    pub fn log_zj(&self) -> f64 {
        self.jastrow_weights().iter().sum::<f64>().ln()
    }

    /// ∂_β log Z_J at fixed μ: central differences with step 1e−4·β and one
    /// Richardson step.
    pub fn dbeta_log_zj(&self) -> f64 {
        let h = 1e-4 * self.beta;
        let central = |h: f64| (self.with_beta(self.beta + h).log_zj() - self.with_beta(self.beta - h).log_zj()) / (2.0 * h);
        (4.0 * central(h / 2.0) - central(h)) / 3.0
    }
}

fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

fn occupied(s: u32) -> Vec<usize> {
    (0..32).filter(|&i| s >> i & 1 == 1).collect()
}

/// Occupation basis of the n-particle sector and the hopping matrix on it.
fn sector_hopping(model: &LatticeModel, states: &[u32]) -> DMatrix<f64> {
    let dim = states.len();
    let m = model.sites();
    let mut index = std::collections::HashMap::with_capacity(dim);
    for (a, &s) in states.iter().enumerate() {
        index.insert(s, a);
    }
    let mut k = DMatrix::zeros(dim, dim);
    for (col, &s) in states.iter().enumerate() {
        for j in 0..m {
            if s >> j & 1 == 0 {
                continue;
            }
            for i in 0..m {
                let hij = model.h[(i, j)];
                if hij == 0.0 {
                    continue;
                }
                if i == j {
                    k[(col, col)] += hij;
                    continue;
                }
                if s >> i & 1 == 1 {
                    continue;
                }
                // c_i† c_j: sign from occupied sites strictly between i and j
                let (lo, hi) = (i.min(j), i.max(j));
                let between = (s >> (lo + 1)) & ((1u32 << (hi - lo - 1)) - 1);
                let sign = if between.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let t = (s & !(1 << j)) | (1 << i);
                k[(index[&t], col)] += sign * hij;
            }
        }
    }
    k
}

fn sector_states(m: usize, n: usize) -> Vec<u32> {
    (0u32..1 << m).filter(|s| s.count_ones() as usize == n).collect()
}

fn entropy_of(eigs: impl Iterator<Item = f64>) -> f64 {
    eigs.filter(|&l| l > 0.0).map(|l| -l * l.ln()).sum()
}

/// Free Gibbs state: log Z by the determinant identity and by an explicit
/// Fock-space trace, and the one-particle kernel.
#[derive(Debug, Clone)]
pub struct FreeState {
    pub log_z: f64,
    pub log_z_fock: f64,
    /// γ^(1) = (1 + e^{β(h−μ)})^{−1}.
    pub gamma: DMatrix<f64>,
    pub entropy: f64,
    /// Diagonal of the Gibbs state in the occupation basis.
    diag: Vec<f64>,
}

pub fn exact_free_state(model: &LatticeModel) -> Result<FreeState> {
    let m = model.sites();
    let eig = symmetric_eigen(model.h.clone());
    let log_z = eig.eigenvalues.iter().map(|e| (-model.beta * (e - model.mu)).exp().ln_1p()).sum();
    let occ = eig.eigenvalues.map(|e| fermi(model.beta * (e - model.mu)));
    let gamma = &eig.eigenvectors * DMatrix::from_diagonal(&occ) * eig.eigenvectors.transpose();
    let entropy = occ.iter().map(|&n| entropy_of([n, 1.0 - n].into_iter())).sum();

    let mut diag = vec![0.0; 1 << m];
    let mut z = 0.0;
    for n in 0..=m {
        let states = sector_states(m, n);
        let k = sector_hopping(model, &states);
        let se = symmetric_eigen(k);
        let w = se.eigenvalues.map(|e| (-model.beta * (e - model.mu * n as f64)).exp());
        z += w.sum();
        for (a, &s) in states.iter().enumerate() {
            diag[s as usize] = (0..states.len()).map(|b| se.eigenvectors[(a, b)].powi(2) * w[b]).sum();
        }
    }
    diag.iter_mut().for_each(|x| *x /= z);
    Ok(FreeState { log_z, log_z_fock: z.ln(), gamma, entropy, diag })
}

impl FreeState {
    /// ⟨Π n_{x_i}⟩ for distinct sites (zero if two coincide).
    pub fn rho(&self, points: &[usize]) -> f64 {
        reduced_density(&self.diag, points)
    }
}

fn reduced_density(diag: &[f64], points: &[usize]) -> f64 {
    let mut mask = 0u32;
    for &x in points {
        if mask >> x & 1 == 1 {
            return 0.0;
        }
        mask |= 1 << x;
    }
    diag.iter().enumerate().filter(|(s, _)| *s as u32 & mask == mask).map(|(_, w)| w).sum()
}

/// The Jastrow trial state Γ_J = F e^{−β(ℋ−μ𝒩)} F / Z_J.
#[derive(Debug, Clone)]
pub struct JastrowState {
    pub log_z: f64,
    pub log_zj: f64,
    pub entropy: f64,
    /// ⟨ℋ − μ𝒩⟩_J.
    pub kinetic: f64,
    /// ⟨𝒱⟩_J.
    pub interaction: f64,
    pub particles: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub sites: usize,
    pub beta: f64,
    diag: Vec<f64>,
}

pub fn exact_jastrow_state(model: &LatticeModel) -> Result<JastrowState> {
    let m = model.sites();
    let weights = model.jastrow_weights();
    let zj: f64 = weights.iter().sum();
    let log_z = exact_free_state(model)?.log_z;
    let mut entropy = 0.0;
    let (mut kinetic, mut interaction, mut trace) = (0.0, 0.0, 0.0);
    let mut min_eig = f64::INFINITY;
    for n in 0..=m {
        let states = sector_states(m, n);
        let k = sector_hopping(model, &states);
        let se = symmetric_eigen(k.clone());
        let w = se.eigenvalues.map(|e| (-model.beta * (e - model.mu * n as f64)).exp());
        let boltz = &se.eigenvectors * DMatrix::from_diagonal(&w) * se.eigenvectors.transpose();
        let fvec: Vec<f64> = states.iter().map(|&s| model.f2(s).sqrt()).collect();
        let dim = states.len();
        let rho = DMatrix::from_fn(dim, dim, |a, b| fvec[a] * boltz[(a, b)] * fvec[b] / zj);
        let kmu = &k - DMatrix::identity(dim, dim) * (model.mu * n as f64);
        kinetic += (&kmu * &rho).trace();
        interaction += states.iter().enumerate().map(|(a, &s)| model.pair_energy(s) * rho[(a, a)]).sum::<f64>();
        trace += rho.trace();
        let ev = symmetric_eigen(rho).eigenvalues;
        min_eig = ev.iter().copied().fold(min_eig, f64::min);
        entropy += entropy_of(ev.iter().copied());
    }
    let diag: Vec<f64> = weights.iter().map(|w| w / zj).collect();
    let particles = diag.iter().enumerate().map(|(s, w)| (s as u32).count_ones() as f64 * w).sum();
    Ok(JastrowState {
        log_z,
        log_zj: zj.ln(),
        entropy,
        kinetic,
        interaction,
        particles,
        trace,
        min_eigenvalue: min_eig,
        sites: m,
        beta: model.beta,
        diag,
    })
}

impl JastrowState {
    /// ρ_J^(q) at distinct lattice sites.
    pub fn rho(&self, points: &[usize]) -> f64 {
        reduced_density(&self.diag, points)
    }
}

/// P[Γ_J] per site: −M·P = ⟨ℋ−μ𝒩+𝒱⟩_J − S/β.
pub fn pressure_functional(state: &JastrowState) -> f64 {
    -(state.kinetic + state.interaction - state.entropy / state.beta) / state.sites as f64
}

/// Pressure of the interacting Gibbs state, (1/βM)log Tr e^{−β(ℋ−μ𝒩+𝒱)}.
pub fn interacting_pressure(model: &LatticeModel) -> Result<f64> {
    let m = model.sites();
    let mut z = 0.0;
    for n in 0..=m {
        let states = sector_states(m, n);
        let mut k = sector_hopping(model, &states);
        for (a, &s) in states.iter().enumerate() {
            k[(a, a)] += model.pair_energy(s);
        }
        z += symmetric_eigen(k).eigenvalues.iter().map(|e| (-model.beta * (e - model.mu * n as f64)).exp()).sum::<f64>();
    }
    Ok(z.ln() / (model.beta * m as f64))
}

/// Exact log(Z_J/Z) against the truncated linked-diagram series.
#[derive(Debug, Clone, PartialEq)]
pub struct GgrComparison {
    pub exact: f64,
    pub series: f64,
    pub residual: f64,
    pub tail_estimate: f64,
    /// ρ₀I_gI_γ on the lattice.
    pub coupling: f64,
    pub warning: Option<String>,
}

/// Regime bound on ρ₀I_gI_γ for the comparison.
pub const REGIME_LIMIT: f64 = 0.2;

pub fn compare_ggr(model: &LatticeModel, p_max: usize, reg: &ConstantRegistry) -> Result<GgrComparison> {
    let kernel = model.kernel();
    let ctx = DiagramContext::new(&kernel, model.g_table())?;
    let inp = TailInputs::from_context(&ctx);
    let coupling = inp.rho0 * inp.i_g * inp.i_gamma;
    let warning = (coupling >= REGIME_LIMIT).then(|| format!("rho0*I_g*I_gamma = {coupling:.3} is outside the weak-coupling regime"));
    // log Z through the same minor sum, so f ≡ 1 gives exactly zero
    let unit = LatticeModel { f: vec![1.0; model.sites()], ..model.clone() };
    let exact = model.log_zj() - unit.log_zj();
    let series = zj_expansion(&ctx, p_max, Engine::Position, reg)?;
    let s = series.value.re;
    Ok(GgrComparison { exact, series: s, residual: (exact - s).abs(), tail_estimate: series.tail_estimate, coupling, warning })
}

/// Lattice analogues of the moments entering the particle-number envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEnvelopeInputs {
    pub rho0: f64,
    pub i_g: f64,
    pub i_gamma: f64,
    /// Σ_x|x|²|g(x)|.
    pub i_x2_g: f64,
    pub d: usize,
}

impl DensityEnvelopeInputs {
    pub fn of(model: &LatticeModel) -> Self {
        let kernel = model.kernel();
        let g = model.g_table();
        let i_x2_g = (0..g.len()).map(|x| g[x].abs() * kernel.distance(x).powi(2)).sum();
        Self {
            rho0: kernel.rho0(),
            i_g: g.iter().map(|x| x.abs()).sum(),
            i_gamma: kernel_moments(&kernel).i_gamma,
            i_x2_g,
            d: model.grid.d,
        }
    }
}

/// Envelope for |⟨𝒩⟩_J/L^d − ρ₀|: C₁I_{|x|²g}ρ₀^{2+2/d} + C₂I_g²(1+I_γ²)ρ₀³,
/// constants `density.C1`, `density.C2`.
pub fn density_envelope(inp: &DensityEnvelopeInputs, reg: &ConstantRegistry) -> f64 {
    let d = inp.d as f64;
    reg.get("density.C1") * inp.i_x2_g * inp.rho0.powf(2.0 + 2.0 / d)
        + reg.get("density.C2") * inp.i_g.powi(2) * (1.0 + inp.i_gamma.powi(2)) * inp.rho0.powi(3)
}

/// Seeded random weak-coupling ring: M ∈ [6, 10] sites, a Jastrow factor
/// reduced on nearest and next-nearest neighbours, redrawn until
/// ρ₀I_gI_γ < `max_coupling`.
pub fn random_weak_model(seed: u64, max_coupling: f64) -> LatticeModel {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = rng.gen_range(6..=10);
        let beta = rng.gen_range(0.5..2.0);
        let mu = rng.gen_range(-1.0..1.5);
        let mut f = vec![1.0; m];
        let f1 = rng.gen_range(0.6..0.99);
        let f2 = rng.gen_range(0.85..1.0);
        for (x, v) in [(1, f1), (m - 1, f1), (2, f2), (m - 2, f2)] {
            f[x] = v;
        }
        let model = LatticeModel::new(1, m, beta, mu).and_then(|l| l.with_jastrow(f)).expect("valid random model");
        let inp = DensityEnvelopeInputs::of(&model);
        if inp.rho0 * inp.i_g * inp.i_gamma < max_coupling {
            return model;
        }
    }
}

/// Largest observed ratios over a set of random weak-coupling instances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Calibration {
    pub instances: usize,
    /// max residual(p_max) / tail estimate.
    pub tail_ratio: f64,
    /// max residual(p_max) / residual(2).
    pub residual_ratio: f64,
    /// max |⟨𝒩⟩_J/L^d − ρ₀| / envelope.
    pub density_ratio: f64,
}

/// Fit-and-report pass: runs `compare_ggr` and the exact particle number on
/// `random_weak_model(seed, max_coupling)` for every seed and records the
/// worst ratios against the envelopes built from `reg`.
pub fn calibrate(seeds: std::ops::Range<u64>, max_coupling: f64, p_max: usize, reg: &ConstantRegistry) -> Result<Calibration> {
    let rows: Vec<(f64, f64, f64)> = seeds
        .into_par_iter()
        .map(|seed| {
            let model = random_weak_model(seed, max_coupling);
            let low = compare_ggr(&model, 2, reg)?;
            let high = compare_ggr(&model, p_max, reg)?;
            let j = exact_jastrow_state(&model)?;
            let inp = DensityEnvelopeInputs::of(&model);
            let dev = (j.particles / model.sites() as f64 - inp.rho0).abs();
            Ok((high.residual / high.tail_estimate, high.residual / low.residual, dev / density_envelope(&inp, reg)))
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().fold(Calibration { instances: rows.len(), ..Default::default() }, |c, r| Calibration {
        tail_ratio: c.tail_ratio.max(r.0),
        residual_ratio: c.residual_ratio.max(r.1),
        density_ratio: c.density_ratio.max(r.2),
        ..c
    }))
}
