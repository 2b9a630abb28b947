//! GGR diagrams: enumeration, linkedness, cluster statistics and the two
//! evaluation engines (position-space grid sums, momentum-space sums).

mod momentum;
mod position;
mod series;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{GgrError, Result};
use crate::lattice::{DiscreteTorusModel, TorusKernel};
use crate::scattering::JastrowFactor;

pub use series::{
    class_sum, convergence_lhs, rho_j_expansion, tail_bound, tree_partition_bound, w_graph_sum, zj_expansion,
    ConvergenceTerms, SeriesResult, TailInputs,
};

/// Limits on enumeration and evaluation size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeGuard {
    /// Largest allowed q + p.
    pub max_vertices: usize,
    /// Largest number of summand evaluations (or table entries) per diagram.
    pub max_terms: u64,
    /// Largest number of (graph, permutation) pairs an enumeration may visit.
    pub max_diagrams: u64,
}

impl Default for SizeGuard {
    fn default() -> Self {
        Self { max_vertices: 7, max_terms: 1 << 30, max_diagrams: 1 << 22 }
    }
}

impl SizeGuard {
    fn check_vertices(&self, q: usize, p: usize) -> Result<()> {
        if q + p > self.max_vertices {
            return Err(GgrError::SizeGuard(format!("q + p = {} exceeds the limit {}", q + p, self.max_vertices)));
        }
        Ok(())
    }

    fn check_terms(&self, terms: f64, what: &str) -> Result<()> {
        if terms > self.max_terms as f64 {
            return Err(GgrError::SizeGuard(format!("{what} needs {terms:.3e} terms, limit {}", self.max_terms)));
        }
        Ok(())
    }
}

/// A g-graph on q external vertices 0..q and p internal vertices q..q+p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiagramGraph {
    pub q: usize,
    pub p: usize,
    /// Edges (i, j) with i < j.
    pub edges: Vec<(usize, usize)>,
}

impl DiagramGraph {
    pub fn new(q: usize, p: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = q + p;
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            if e.1 >= n || e.0 == e.1 {
                return Err(GgrError::Domain(format!("bad edge {}-{}", e.0 + 1, e.1 + 1)));
            }
            if e.1 < q {
                return Err(GgrError::Domain(format!("edge {}-{} joins two external vertices", e.0 + 1, e.1 + 1)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let g = Self { q, p, edges };
        if g.degrees().iter().skip(q).any(|&d| d == 0) {
            return Err(GgrError::Domain("an internal vertex has no incident edge".into()));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.q + self.p
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn is_tree(&self) -> bool {
        let n = self.n();
        n >= 1 && self.edges.len() + 1 == n && components(n, self.edges.iter().copied()).1 == 1
    }

    pub fn is_connected(&self) -> bool {
        components(self.n(), self.edges.iter().copied()).1 == 1
    }

    /// Connected components of the g-graph (clusters), each sorted.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let (label, count) = components(self.n(), self.edges.iter().copied());
        let mut out = vec![Vec::new(); count];
        for v in 0..self.n() {
            out[label[v]].push(v);
        }
        out
    }
}

// Component labels (in order of first vertex) and the component count.
fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut root_label = vec![usize::MAX; n];
    let mut count = 0;
    for v in 0..n {
        let r = find(&mut parent, v);
        if root_label[r] == usize::MAX {
            root_label[r] = count;
            count += 1;
        }
        label[v] = root_label[r];
    }
    (label, count)
}

/// All graphs in the class: no external–external edges, every internal vertex
/// of degree ≥ 1.
pub fn enumerate_graphs(q: usize, p: usize) -> Result<Vec<DiagramGraph>> {
    enumerate_graphs_guarded(q, p, &SizeGuard::default())
}

pub fn enumerate_graphs_guarded(q: usize, p: usize, guard: &SizeGuard) -> Result<Vec<DiagramGraph>> {
    if q + p == 0 {
        return Err(GgrError::Domain("need q + p >= 1".into()));
    }
    guard.check_vertices(q, p)?;
    let n = q + p;
    let allowed: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(_, j)| j >= q).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << allowed.len()) {
        let mut deg = vec![0u8; n];
        for (bit, &(a, b)) in allowed.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        if deg[q..].contains(&0) {
            continue;
        }
        let edges = allowed.iter().enumerate().filter(|(bit, _)| mask >> bit & 1 == 1).map(|(_, &e)| e).collect();
        out.push(DiagramGraph { q, p, edges });
    }
    Ok(out)
}

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { return out };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Cycles of a permutation, each starting at its smallest element and listed
/// in the order j, π(j), π(π(j)), ….
pub fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut c = vec![s];
        seen[s] = true;
        let mut j = perm[s];
        while j != s {
            seen[j] = true;
            c.push(j);
            j = perm[j];
        }
        out.push(c);
    }
    out
}

pub fn perm_sign(perm: &[usize]) -> i8 {
    if (perm.len() - cycles(perm).len()) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Cluster statistics of a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClusterStats {
    /// Clusters made only of internal vertices.
    pub k: usize,
    /// Clusters containing external vertices.
    pub kappa: usize,
    /// Σ n_ℓ − 2k over internal clusters.
    pub n_g: usize,
    /// Internal vertices in clusters with external vertices.
    pub n_g_star: usize,
}

impl ClusterStats {
    pub fn of(graph: &DiagramGraph) -> Self {
        let mut s = ClusterStats { k: 0, kappa: 0, n_g: 0, n_g_star: 0 };
        let mut internal_vertices = 0;
        for c in graph.clusters() {
            let ext = c.iter().filter(|&&v| v < graph.q).count();
            if ext == 0 {
                s.k += 1;
                internal_vertices += c.len();
            } else {
                s.kappa += 1;
                s.n_g_star += c.len() - ext;
            }
        }
        s.n_g = internal_vertices - 2 * s.k;
        s
    }
}

/// A γ-graph (permutation) together with a g-graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagram {
    pub graph: DiagramGraph,
    /// perm[j] = π(j).
    pub perm: Vec<usize>,
    pub sign: i8,
    pub stats: ClusterStats,
}

impl Diagram {
    pub fn new(graph: DiagramGraph, perm: Vec<usize>) -> Result<Self> {
        let n = graph.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
            return Err(GgrError::Domain(format!("{perm:?} is not a permutation of {n} vertices")));
        }
        let stats = ClusterStats::of(&graph);
        Ok(Self { sign: perm_sign(&perm), graph, perm, stats })
    }

    pub fn q(&self) -> usize {
        self.graph.q
    }
    pub fn p(&self) -> usize {
        self.graph.p
    }

    fn linked_labels(&self) -> (Vec<usize>, usize) {
        let pe = self.perm.iter().enumerate().map(|(j, &pj)| (j, pj));
        components(self.graph.n(), self.graph.edges.iter().copied().chain(pe))
    }

    /// The union of π and G is connected.
    pub fn is_linked(&self) -> bool {
        self.linked_labels().1 == 1
    }

    /// Every linked component contains an external vertex.
    pub fn is_tilde_linked(&self) -> bool {
        let (label, count) = self.linked_labels();
        let mut has_ext = vec![false; count];
        for v in 0..self.graph.q {
            has_ext[label[v]] = true;
        }
        has_ext.iter().all(|&x| x)
    }

    /// Relabels internal vertices by σ (σ[i] is the new position of internal
    /// vertex q+i, counted from q).
    pub fn relabel_internal(&self, sigma: &[usize]) -> Result<Self> {
        let q = self.graph.q;
        let map = |v: usize| if v < q { v } else { q + sigma[v - q] };
        let edges = self.graph.edges.iter().map(|&(a, b)| (map(a), map(b))).collect();
        let graph = DiagramGraph::new(q, self.graph.p, edges)?;
        let mut perm = vec![0; self.perm.len()];
        for (j, &pj) in self.perm.iter().enumerate() {
            perm[map(j)] = map(pj);
        }
        Diagram::new(graph, perm)
    }

    /// One line of the dump format (1-based labels).
    pub fn dump_line(&self, value: Complex64) -> String {
        let mut s = String::new();
        let perm: Vec<String> = self.perm.iter().map(|x| (x + 1).to_string()).collect();
        let edges: Vec<String> = self.graph.edges.iter().map(|(a, b)| format!("{}-{}", a + 1, b + 1)).collect();
        let _ = write!(
            s,
            "{} {} | {} | {} | {} {} {} {} {} | {} {}",
            self.graph.q,
            self.graph.p,
            perm.join(","),
            if edges.is_empty() { "none".to_string() } else { edges.join(",") },
            self.sign,
            self.stats.k,
            self.stats.kappa,
            self.stats.n_g,
            self.stats.n_g_star,
            crate::numfmt::sci(value.re),
            crate::numfmt::sci(value.im)
        );
        s
    }
}

/// Which diagrams to keep.
#[derive(Clone, Copy)]
pub enum DiagramFilter<'a> {
    All,
    Linked,
    TildeLinked,
    /// Linked diagrams whose statistics satisfy the predicate.
    LinkedWith(&'a (dyn Fn(&ClusterStats) -> bool + Sync)),
    /// Tilde-linked diagrams whose statistics satisfy the predicate.
    TildeLinkedWith(&'a (dyn Fn(&ClusterStats) -> bool + Sync)),
}

impl DiagramFilter<'_> {
    fn accepts(&self, d: &Diagram) -> bool {
        match self {
            DiagramFilter::All => true,
            DiagramFilter::Linked => d.is_linked(),
            DiagramFilter::TildeLinked => d.is_tilde_linked(),
            DiagramFilter::LinkedWith(f) => d.is_linked() && f(&d.stats),
            DiagramFilter::TildeLinkedWith(f) => d.is_tilde_linked() && f(&d.stats),
        }
    }
}

pub fn enumerate_diagrams(q: usize, p: usize, filter: DiagramFilter) -> Result<Vec<Diagram>> {
    enumerate_diagrams_guarded(q, p, filter, &SizeGuard::default())
}

pub fn enumerate_diagrams_guarded(q: usize, p: usize, filter: DiagramFilter, guard: &SizeGuard) -> Result<Vec<Diagram>> {
    let n = q + p;
    let edges = n * n.saturating_sub(1) / 2 - q * q.saturating_sub(1) / 2;
    let visits = 2f64.powi(edges as i32) * (1..=n).map(|k| k as f64).product::<f64>();
    if visits > guard.max_diagrams as f64 {
        return Err(GgrError::SizeGuard(format!("enumerating q={q}, p={p} visits {visits:.3e} diagrams, limit {}", guard.max_diagrams)));
    }
    let graphs = enumerate_graphs_guarded(q, p, guard)?;
    let perms = permutations(q + p);
    let mut out = Vec::new();
    for g in &graphs {
        let stats = ClusterStats::of(g);
        for perm in &perms {
            let d = Diagram { graph: g.clone(), perm: perm.clone(), sign: perm_sign(perm), stats };
            if filter.accepts(&d) {
                out.push(d);
            }
        }
    }
    Ok(out)
}

/// Diagram value with the sum of absolute summands as a scale for
/// tolerance checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramValue {
    pub value: Complex64,
    pub scale: f64,
}

/// Kernel and sampled g on a common torus grid, shared by both engines.
pub struct DiagramContext<'a> {
    kernel: &'a TorusKernel,
    g: Vec<f64>,
    n: usize,
    sub: Option<Vec<u32>>,
    guard: SizeGuard,
    cycle_tables: Vec<OnceLock<Vec<f64>>>,
    cluster_cache: Mutex<HashMap<(Vec<(usize, usize)>, usize, usize, Vec<usize>), std::sync::Arc<Vec<Complex64>>>>,
}

// Difference tables are kept when they hold at most this many entries.
const SUB_TABLE_LIMIT: usize = 1 << 22;

impl<'a> DiagramContext<'a> {
    /// `g` holds g sampled at every displacement index of the grid.
    pub fn new(kernel: &'a TorusKernel, g: Vec<f64>) -> Result<Self> {
        let n = kernel.grid.len();
        if g.len() != n {
            return Err(GgrError::Precondition(format!("g has {} samples, grid has {n}", g.len())));
        }
        let sub = (n * n <= SUB_TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; n * n];
            for a in 0..n {
                for b in 0..n {
                    t[a * n + b] = kernel.grid.sub(a, b) as u32;
                }
            }
            t
        });
        Ok(Self {
            kernel,
            g,
            n,
            sub,
            guard: SizeGuard::default(),
            cycle_tables: (0..=16).map(|_| OnceLock::new()).collect(),
            cluster_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Samples g = f² − 1 of a Jastrow factor at minimal-image distances; the
    /// support radius must fit in half the box.
    pub fn from_jastrow(model: &'a DiscreteTorusModel, jastrow: &JastrowFactor) -> Result<Self> {
        if jastrow.d() != model.d {
            return Err(GgrError::Precondition("Jastrow factor and model differ in dimension".into()));
        }
        if 2.0 * jastrow.b() > model.l {
            return Err(GgrError::Precondition(format!("b = {} exceeds half the box side {}", jastrow.b(), model.l / 2.0)));
        }
        let kernel = model.kernel();
        Self::new(kernel, kernel.sample_radial(|r| jastrow.g(r)))
    }

    pub fn with_guard(mut self, guard: SizeGuard) -> Self {
        self.guard = guard;
        self
    }

    pub fn kernel(&self) -> &TorusKernel {
        self.kernel
    }
    pub fn guard(&self) -> &SizeGuard {
        &self.guard
    }
    pub fn g(&self, disp: usize) -> f64 {
        self.g[disp]
    }
    pub fn g_table(&self) -> &[f64] {
        &self.g
    }
    /// ĝ(k) = h^dΣ_x g(x)e^{−ik·x}.
    pub fn g_hat(&self) -> Vec<Complex64> {
        self.kernel.transform(&self.g)
    }
    /// I_g = ∫|g| on the grid.
    pub fn i_g(&self) -> f64 {
        self.kernel.cell() * self.g.iter().map(|x| x.abs()).sum::<f64>()
    }

    #[inline]
    fn sub(&self, a: usize, b: usize) -> usize {
        match &self.sub {
            Some(t) => t[a * self.n + b] as usize,
            None => self.kernel.grid.sub(a, b),
        }
    }

    /// g between two grid points.
    #[inline]
    pub fn g_between(&self, a: usize, b: usize) -> f64 {
        self.g[self.sub(a, b)]
    }

    /// γ^(1) between two grid points.
    #[inline]
    pub fn gamma_between(&self, a: usize, b: usize) -> f64 {
        self.kernel.gamma(self.sub(a, b))
    }

    fn check_external(&self, q: usize, external: &[usize]) -> Result<()> {
        if external.len() != q {
            return Err(GgrError::Precondition(format!("need {q} external points, got {}", external.len())));
        }
        if external.iter().any(|&x| x >= self.n) {
            return Err(GgrError::Precondition("external point outside the grid".into()));
        }
        Ok(())
    }

    /// Position-space value: exact grid sum over internal vertices.
    pub fn value_position(&self, diag: &Diagram, external: &[usize]) -> Result<DiagramValue> {
        self.check_external(diag.q(), external)?;
        position::evaluate(self, diag, external)
    }

    /// Momentum-space value: sums over the Brillouin lattice after
    /// eliminating conservation constraints.
    pub fn value_momentum(&self, diag: &Diagram, external: &[usize]) -> Result<DiagramValue> {
        self.check_external(diag.q(), external)?;
        momentum::evaluate(self, diag, external)
    }

    /// Ordered sum of values (parallel evaluation, fixed summation order).
    pub fn sum_values(&self, diagrams: &[Diagram], external: &[usize], engine: Engine) -> Result<DiagramValue> {
        use rayon::prelude::*;
        let vals: Vec<Result<DiagramValue>> = diagrams
            .par_iter()
            .map(|d| match engine {
                Engine::Position => self.value_position(d, external),
                Engine::Momentum => self.value_momentum(d, external),
            })
            .collect();
        let mut total = DiagramValue { value: Complex64::new(0.0, 0.0), scale: 0.0 };
        for v in vals {
            let v = v?;
            total.value += v.value;
            total.scale += v.scale;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Position,
    Momentum,
}
