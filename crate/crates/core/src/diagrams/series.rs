//! Truncated expansions, the absolute-convergence sums and tail bounds.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{enumerate_diagrams_guarded, DiagramContext, DiagramFilter, DiagramValue, Engine};
use crate::error::{GgrError, Result};
use crate::lattice::kernel_moments;
use crate::registry::ConstantRegistry;

/// W_p^q = Σ_G Π_{e∈G} g_e at one configuration, by inclusion–exclusion over
/// internal vertices left without edges.
pub fn w_graph_sum(q: usize, p: usize, g: impl Fn(usize, usize) -> f64) -> f64 {
    let n = q + p;
    let mut total = 0.0;
    for s in 0u32..(1u32 << p) {
        let in_s = |v: usize| v >= q && s >> (v - q) & 1 == 1;
        let mut prod = 1.0;
        for j in q..n {
            if in_s(j) {
                continue;
            }
            for i in 0..j {
                if !in_s(i) {
                    prod *= 1.0 + g(i, j);
                }
            }
        }
        total += if s.count_ones() % 2 == 0 { prod } else { -prod };
    }
    total
}

/// Σ over set partitions into clusters of Π_clusters Σ_{spanning trees}Π|g_e|,
/// with no external–external edges and no isolated internal vertex.
pub fn tree_partition_bound(q: usize, p: usize, g: impl Fn(usize, usize) -> f64) -> f64 {
    let n = q + p;
    if n == 0 {
        return 1.0;
    }
    let weight = |i: usize, j: usize| if i < q && j < q { 0.0 } else { g(i, j).abs() };
    let tree_sum = |block: &[usize]| -> f64 {
        if block.len() == 1 {
            return if block[0] < q { 1.0 } else { 0.0 };
        }
        let s = block.len();
        let mut lap = DMatrix::<f64>::zeros(s, s);
        for a in 0..s {
            for b in 0..s {
                if a != b {
                    let w = weight(block[a], block[b]);
                    lap[(a, b)] = -w;
                    lap[(a, a)] += w;
                }
            }
        }
        lap.view((1, 1), (s - 1, s - 1)).into_owned().determinant()
    };
    // restricted growth strings enumerate set partitions
    let mut rgs = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut prod = 1.0;
        for b in 0..blocks {
            let members: Vec<usize> = (0..n).filter(|&v| rgs[v] == b).collect();
            prod *= tree_sum(&members);
            if prod == 0.0 {
                break;
            }
        }
        total += prod;
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return total;
            }
            let maxprev = *rgs[..i].iter().max().unwrap();
            if rgs[i] <= maxprev {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|x| x as f64).product()
}

/// Terms (1/p!)∫|W_p^q|ρ^(p+q) of the absolute-convergence sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTerms {
    /// Indexed by p; terms below the starting order are zero.
    pub terms: Vec<f64>,
    pub total: f64,
}

/// Σ_{p ≤ p_max}(1/p!)·h^{pd}Σ|W_p^q|ρ^(p+q) over internal grid points, with
/// p starting at 2 for q = 0 and at 0 otherwise.
pub fn convergence_lhs(ctx: &DiagramContext, q: usize, p_max: usize, external: &[usize]) -> Result<ConvergenceTerms> {
    if external.len() != q {
        return Err(GgrError::Precondition(format!("need {q} external points")));
    }
    ctx.guard.check_vertices(q, p_max)?;
    let npts = ctx.n;
    let cell = ctx.kernel.cell();
    let mut terms = vec![0.0; p_max + 1];
    let p_min = if q == 0 { 2 } else { 0 };
    for (p, term) in terms.iter_mut().enumerate().skip(p_min) {
        let n = q + p;
        let pinned = if q == 0 { 1 } else { q };
        let free = n - pinned;
        ctx.guard.check_terms((npts as f64).powi(free as i32), "convergence sum")?;
        let mut pos = vec![0usize; n];
        pos[..q].copy_from_slice(external);
        let mut acc = 0.0;
        for t in 0..npts.pow(free as u32) {
            let mut rem = t;
            for v in (pinned..n).rev() {
                pos[v] = rem % npts;
                rem /= npts;
            }
            let w = w_graph_sum(q, p, |i, j| ctx.g_between(pos[i], pos[j]));
            if w == 0.0 {
                continue;
            }
            acc += w.abs() * ctx.kernel.wick_density(&pos).max(0.0);
        }
        let mut measure = cell.powi(p as i32);
        if q == 0 {
            measure *= npts as f64;
        }
        *term = measure * acc / factorial(p);
    }
    let total = terms.iter().sum();
    Ok(ConvergenceTerms { terms, total })
}

/// Scalars entering the tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailInputs {
    pub rho0: f64,
    pub i_g: f64,
    pub i_gamma: f64,
    /// L^d.
    pub volume: f64,
}

impl TailInputs {
    pub fn from_context(ctx: &DiagramContext) -> Self {
        let k = ctx.kernel();
        Self { rho0: k.rho0(), i_g: ctx.i_g(), i_gamma: kernel_moments(k).i_gamma, volume: k.volume() }
    }
}

/// Bound on (1/p!)|Σ Γ| over the class k = k0, n_g + n_g* = n_g0 (p = 2k0 + n_g0):
/// P₀L^dρ₀(Cρ₀I_g)^{n_g0+k0}I_γ^{k0−1} for m = 0 and
/// P_mρ₀^m(Cρ₀I_g)^{n_g0+k0}I_γ^{k0} for m > 0, with C = `tail.C` and
/// P_m = `tail.prefactor.<m>` from the registry.
pub fn tail_bound(m: usize, k0: usize, n_g0: usize, inp: &TailInputs, reg: &ConstantRegistry) -> Result<f64> {
    if m == 0 && k0 == 0 {
        return Err(GgrError::Precondition("for m = 0 every diagram has k >= 1 (p = 2k0 + n_g0)".into()));
    }
    let c = reg.get("tail.C");
    let pref = reg.get(&format!("tail.prefactor.{m}"));
    let small = (c * inp.rho0 * inp.i_g).powi((n_g0 + k0) as i32);
    Ok(if m == 0 {
        pref * inp.volume * inp.rho0 * small * inp.i_gamma.powi(k0 as i32 - 1)
    } else {
        pref * inp.rho0.powi(m as i32) * small * inp.i_gamma.powi(k0 as i32)
    })
}

/// (1/p!)Σ Γ over one tail class, p = 2k0 + n_g0: linked diagrams for m = 0,
/// otherwise diagrams whose linked components all reach an external vertex.
pub fn class_sum(ctx: &DiagramContext, m: usize, k0: usize, n_g0: usize, external: &[usize], engine: Engine) -> Result<DiagramValue> {
    let p = 2 * k0 + n_g0;
    let pred = move |s: &super::ClusterStats| s.k == k0 && s.n_g + s.n_g_star == n_g0;
    let filter = if m == 0 { DiagramFilter::LinkedWith(&pred) } else { DiagramFilter::TildeLinkedWith(&pred) };
    let diags = enumerate_diagrams_guarded(m, p, filter, &ctx.guard)?;
    let v = ctx.sum_values(&diags, external, engine)?;
    let f = factorial(p);
    Ok(DiagramValue { value: v.value / f, scale: v.scale / f })
}

/// A truncated series with its terms and a tail estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    /// (1/p!)Σ Γ for p = 0..=p_max.
    pub terms: Vec<Complex64>,
    pub value: Complex64,
    /// Sum of tail bounds over the omitted orders.
    pub tail_estimate: f64,
}

// Orders beyond the truncation included in the tail estimate.
const TAIL_ORDERS: usize = 12;

/// log(Z_J/Z) ≈ Σ_{2≤p≤p_max}(1/p!)Σ_{linked}Γ.
pub fn zj_expansion(ctx: &DiagramContext, p_max: usize, engine: Engine, reg: &ConstantRegistry) -> Result<SeriesResult> {
    ctx.guard.check_vertices(0, p_max)?;
    let mut terms = vec![Complex64::new(0.0, 0.0); p_max + 1];
    for (p, term) in terms.iter_mut().enumerate().skip(2) {
        let diags = enumerate_diagrams_guarded(0, p, DiagramFilter::Linked, &ctx.guard)?;
        *term = ctx.sum_values(&diags, &[], engine)?.value / factorial(p);
    }
    let inp = TailInputs::from_context(ctx);
    let mut tail = 0.0;
    for p in p_max + 1..=p_max + TAIL_ORDERS {
        for k0 in 1..=p / 2 {
            tail += tail_bound(0, k0, p - 2 * k0, &inp, reg)?;
        }
    }
    Ok(SeriesResult { value: terms.iter().sum(), terms, tail_estimate: tail })
}

/// ρ_J^(q)(X) ≈ Π_{i<j}f_{ij}²·Σ_{p≤p_max}(1/p!)Σ Γ^q over diagrams whose
/// linked components all reach an external vertex.
pub fn rho_j_expansion(
    ctx: &DiagramContext,
    q: usize,
    external: &[usize],
    p_max: usize,
    engine: Engine,
    reg: &ConstantRegistry,
) -> Result<SeriesResult> {
    if q == 0 || q > 3 {
        return Err(GgrError::Precondition(format!("q must be 1, 2 or 3, got {q}")));
    }
    if external.len() != q {
        return Err(GgrError::Precondition(format!("need {q} external points")));
    }
    ctx.guard.check_vertices(q, p_max)?;
    // f² = 1 + g
    let mut pref = 1.0;
    for j in 0..q {
        for i in 0..j {
            pref *= 1.0 + ctx.g_between(external[i], external[j]);
        }
    }
    let mut terms = vec![Complex64::new(0.0, 0.0); p_max + 1];
    for (p, term) in terms.iter_mut().enumerate() {
        let diags = enumerate_diagrams_guarded(q, p, DiagramFilter::TildeLinked, &ctx.guard)?;
        *term = pref * ctx.sum_values(&diags, external, engine)?.value / factorial(p);
    }
    let inp = TailInputs::from_context(ctx);
    let mut tail = 0.0;
    for p in p_max + 1..=p_max + TAIL_ORDERS {
        for k0 in 0..=p / 2 {
            tail += pref * tail_bound(q, k0, p - 2 * k0, &inp, reg)?;
        }
    }
    Ok(SeriesResult { value: terms.iter().sum(), terms, tail_estimate: tail })
}
