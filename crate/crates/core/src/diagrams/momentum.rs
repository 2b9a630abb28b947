//! Momentum-space evaluation.
//!
//! Writing every γ^(1) as a momentum sum, each vertex v collects the phase
//! e^{ic_v·x_v} with c_v = k_{π⁻¹(v)} − k_v. The position integrals then
//! factorize over g-clusters: a cluster of internal vertices gives
//! L^d δ(Σc_v)·Ĝ_C, a cluster with external vertices gives its partial
//! transform Φ_C. The k-sum at fixed c factorizes over the cycles of π into
//! tables T_ℓ that depend only on the cycle length. What remains is a sum
//! over the c variables left free by the cycle and cluster constraints.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::{cycles, Diagram, DiagramContext, DiagramValue};
use crate::error::{GgrError, Result};
use crate::fft::fft_nd;

pub(super) fn evaluate(ctx: &DiagramContext, diag: &Diagram, external: &[usize]) -> Result<DiagramValue> {
    let q = diag.q();
    let n = diag.graph.n();
    let npts = ctx.n;
    let vol = ctx.kernel.volume();
    let d = ctx.kernel.d();

    let cyc = cycles(&diag.perm);
    let mut cycle_tables = Vec::with_capacity(cyc.len());
    for c in &cyc {
        cycle_tables.push(cycle_table(ctx, c.len())?);
    }

    let clusters = diag.graph.clusters();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for c in &cyc {
        rows.push(indicator(n, c));
    }
    let mut cluster_tables = Vec::with_capacity(clusters.len());
    // vertices whose c indexes the cluster table, in table order
    let mut cluster_vars = Vec::with_capacity(clusters.len());
    let mut internal_clusters = 0;
    for c in &clusters {
        let n_ext = c.iter().filter(|&&v| v < q).count();
        if n_ext == 0 {
            rows.push(indicator(n, c));
            internal_clusters += 1;
            cluster_vars.push(c[1..].to_vec());
        } else {
            cluster_vars.push(c[n_ext..].to_vec());
        }
        let ext_pos: Vec<usize> = c[..n_ext].iter().map(|&v| external[v]).collect();
        cluster_tables.push(cluster_table(ctx, diag, c, &ext_pos)?);
    }

    let (free, dependent) = eliminate(n, rows)?;
    ctx.guard.check_terms((npts as f64).powi(free.len() as i32), "momentum sum")?;

    // e^{ic·x_v} for external vertices
    let m = ctx.kernel.m();
    let phases: Vec<Vec<Complex64>> = (0..q)
        .map(|v| {
            let xc = ctx.kernel.grid.coords(external[v]);
            (0..npts)
                .map(|c| {
                    let cc = ctx.kernel.grid.coords(c);
                    let dot: usize = (0..d).map(|a| cc[a] * xc[a]).sum::<usize>() % m;
                    Complex64::from_polar(1.0, 2.0 * PI * dot as f64 / m as f64)
                })
                .collect()
        })
        .collect();

    let neg: Vec<usize> = (0..npts).map(|c| ctx.sub(0, c)).collect();
    let combine = |terms: &[(i64, usize)], cvals: &[usize]| -> usize {
        let mut acc = 0usize;
        for &(coef, var) in terms {
            let x = cvals[var];
            for _ in 0..coef.unsigned_abs() {
                acc = if coef > 0 { ctx.sub(acc, neg[x]) } else { ctx.sub(acc, x) };
            }
        }
        acc
    };
    let fold = |vars: &[usize], cvals: &[usize]| vars.iter().fold(0usize, |acc, &v| acc * npts + cvals[v]);
    // table index variables per cycle: all but the first vertex
    let cycle_vars: Vec<&[usize]> = cyc.iter().map(|c| &c[1..]).collect();

    let mut cvals = vec![0usize; n];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    let total = (npts as u64).pow(free.len() as u32);
    for t in 0..total {
        let mut rem = t;
        for &f in free.iter().rev() {
            cvals[f] = (rem % npts as u64) as usize;
            rem /= npts as u64;
        }
        for (var, terms) in &dependent {
            cvals[*var] = combine(terms, &cvals);
        }
        let mut w = 1.0;
        for (tab, vars) in cycle_tables.iter().zip(&cycle_vars) {
            w *= tab[fold(vars, &cvals)];
            if w == 0.0 {
                break;
            }
        }
        if w == 0.0 {
            continue;
        }
        let mut z = Complex64::new(w, 0.0);
        for (tab, vars) in cluster_tables.iter().zip(&cluster_vars) {
            z *= tab[fold(vars, &cvals)];
        }
        for (v, ph) in phases.iter().enumerate() {
            z *= ph[cvals[v]];
        }
        sum += z;
        abs += z.norm();
    }
    let pref = diag.sign as f64 * vol.powi(internal_clusters - n as i32);
    Ok(DiagramValue { value: sum * pref, scale: abs * pref.abs() })
}

fn indicator(n: usize, verts: &[usize]) -> Vec<i64> {
    let mut r = vec![0i64; n];
    for &v in verts {
        r[v] = 1;
    }
    r
}

type Dependent = Vec<(usize, Vec<(i64, usize)>)>;

/// Integer elimination with unit pivots. Returns the free variables and each
/// dependent variable as an integer combination of free ones.
pub(super) fn eliminate(n: usize, rows: Vec<Vec<i64>>) -> Result<(Vec<usize>, Dependent)> {
    let mut pivots: Vec<(usize, Vec<i64>)> = Vec::new();
    for mut r in rows {
        for (pv, prow) in &pivots {
            let f = r[*pv];
            if f != 0 {
                for (x, y) in r.iter_mut().zip(prow) {
                    *x -= f * y;
                }
            }
        }
        if r.iter().all(|&x| x == 0) {
            continue;
        }
        let Some(var) = (0..n).find(|&v| r[v].abs() == 1) else {
            return Err(GgrError::Internal(format!("constraint row {r:?} has no unit pivot")));
        };
        if r[var] < 0 {
            r.iter_mut().for_each(|x| *x = -*x);
        }
        for (_, prow) in pivots.iter_mut() {
            let f = prow[var];
            if f != 0 {
                for (x, y) in prow.iter_mut().zip(&r) {
                    *x -= f * y;
                }
            }
        }
        pivots.push((var, r));
    }
    let is_pivot = |v: usize| pivots.iter().any(|(p, _)| *p == v);
    let free: Vec<usize> = (0..n).filter(|&v| !is_pivot(v)).collect();
    let dependent = pivots
        .iter()
        .map(|(pv, row)| {
            let terms = free.iter().filter(|&&f| row[f] != 0).map(|&f| (-row[f], f)).collect();
            (*pv, terms)
        })
        .collect();
    Ok((free, dependent))
}

/// T_ℓ(c_1,…,c_{ℓ−1}) = Σ_{k_0} Π_i γ̂(k_i), k_i = k_{i−1} − c_i.
fn cycle_table<'c>(ctx: &'c DiagramContext, len: usize) -> Result<&'c Vec<f64>> {
    let npts = ctx.n;
    if len >= ctx.cycle_tables.len() {
        return Err(GgrError::SizeGuard(format!("cycle of length {len}")));
    }
    ctx.guard.check_terms((npts as f64).powi(len as i32), "cycle table")?;
    Ok(ctx.cycle_tables[len].get_or_init(|| {
        let mut table = vec![0.0; npts.pow(len as u32 - 1)];
        let gh = ctx.kernel.gamma_hat_table();
        fn fill(ctx: &DiagramContext, gh: &[f64], table: &mut [f64], left: usize, prev: usize, idx: usize, w: f64) {
            if left == 0 {
                table[idx] += w;
                return;
            }
            for k in 0..ctx.n {
                let c = ctx.sub(prev, k);
                fill(ctx, gh, table, left - 1, k, idx * ctx.n + c, w * gh[k]);
            }
        }
        for k0 in 0..npts {
            fill(ctx, gh, &mut table, len - 1, k0, 0, gh[k0]);
        }
        table
    }))
}

/// Transform of one g-cluster over its non-pinned vertices:
/// h^{sd}Σ_x e^{+iΣc_v·x_v}Π_e g_e, with the first vertex of an internal
/// cluster pinned at the origin and external vertices at their positions.
fn cluster_table(ctx: &DiagramContext, diag: &Diagram, verts: &[usize], ext_pos: &[usize]) -> Result<Arc<Vec<Complex64>>> {
    let n_ext = ext_pos.len();
    let local = |v: usize| verts.iter().position(|&u| u == v).unwrap();
    let edges: Vec<(usize, usize)> = diag
        .graph
        .edges
        .iter()
        .filter(|(a, _)| verts.contains(a))
        .map(|&(a, b)| (local(a), local(b)))
        .collect();
    let key = (edges.clone(), verts.len(), n_ext, ext_pos.to_vec());
    if let Some(t) = ctx.cluster_cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let pinned = if n_ext == 0 { 1 } else { n_ext };
    let free = verts.len() - pinned;
    let npts = ctx.n;
    ctx.guard.check_terms((npts as f64).powi(free as i32), "cluster transform")?;
    let total = npts.pow(free as u32);
    let mut pos = vec![0usize; verts.len()];
    pos[..n_ext].copy_from_slice(ext_pos);
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for (t, slot) in buf.iter_mut().enumerate() {
        let mut rem = t;
        for i in (pinned..verts.len()).rev() {
            pos[i] = rem % npts;
            rem /= npts;
        }
        let w: f64 = edges.iter().map(|&(a, b)| ctx.g_between(pos[a], pos[b])).product();
        *slot = Complex64::new(w, 0.0);
    }
    let d = ctx.kernel.d();
    if free > 0 {
        fft_nd(&mut buf, ctx.kernel.m(), free * d, false);
    }
    let cell = ctx.kernel.cell().powi(free as i32);
    buf.iter_mut().for_each(|z| *z *= cell);
    let table = Arc::new(buf);
    ctx.cluster_cache.lock().unwrap().insert(key, table.clone());
    Ok(table)
}
