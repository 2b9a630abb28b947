//! Direct grid summation over internal vertex positions.

use num_complex::Complex64;

use super::{Diagram, DiagramContext, DiagramValue};
use crate::error::Result;

// A factor between two vertices: γ (ordered) or g.
#[derive(Clone, Copy)]
enum Factor {
    Gamma(usize, usize),
    G(usize, usize),
}

pub(super) fn evaluate(ctx: &DiagramContext, diag: &Diagram, external: &[usize]) -> Result<DiagramValue> {
    let q = diag.q();
    let p = diag.p();
    let n = q + p;
    let npts = ctx.n;
    let cell = ctx.kernel.cell();

    // positions: externals fixed; for q = 0 the first internal vertex is
    // pinned at the origin and translation invariance supplies the volume
    let mut pos = vec![0usize; n];
    pos[..q].copy_from_slice(external);
    let first_free = if q == 0 { 1 } else { q };
    let free = n - first_free;
    ctx.guard.check_terms((npts as f64).powi(free as i32), "position sum")?;

    // level of a vertex = its position in the assignment order
    let level = |v: usize| if v < first_free { 0 } else { v - first_free + 1 };
    let mut factors: Vec<Vec<Factor>> = vec![Vec::new(); free + 1];
    for (j, &pj) in diag.perm.iter().enumerate() {
        factors[level(j).max(level(pj))].push(Factor::Gamma(j, pj));
    }
    for &(a, b) in &diag.graph.edges {
        factors[level(a).max(level(b))].push(Factor::G(a, b));
    }

    let eval = |f: &Factor, pos: &[usize]| match *f {
        Factor::Gamma(a, b) => ctx.gamma_between(pos[a], pos[b]),
        Factor::G(a, b) => ctx.g_between(pos[a], pos[b]),
    };
    let base: f64 = factors[0].iter().map(|f| eval(f, &pos)).product();

    let (mut sum, mut abs) = (0.0, 0.0);
    if free == 0 {
        sum = base;
        abs = base.abs();
    } else if base != 0.0 {
        recurse(ctx, &factors, &mut pos, first_free, 1, base, &mut sum, &mut abs, &eval);
    }
    let mut measure = cell.powi(p as i32);
    if q == 0 {
        measure *= npts as f64;
    }
    let sign = diag.sign as f64;
    Ok(DiagramValue { value: Complex64::new(sign * measure * sum, 0.0), scale: measure * abs })
}

#[allow(clippy::too_many_arguments)]
fn recurse<E: Fn(&Factor, &[usize]) -> f64>(
    ctx: &DiagramContext,
    factors: &[Vec<Factor>],
    pos: &mut [usize],
    first_free: usize,
    lvl: usize,
    partial: f64,
    sum: &mut f64,
    abs: &mut f64,
    eval: &E,
) {
    let v = first_free + lvl - 1;
    let last = lvl + 1 == factors.len();
    for x in 0..ctx.n {
        pos[v] = x;
        let mut w = partial;
        for f in &factors[lvl] {
            w *= eval(f, pos);
            if w == 0.0 {
                break;
            }
        }
        if w == 0.0 {
            continue;
        }
        if last {
            *sum += w;
            *abs += w.abs();
        } else {
            recurse(ctx, factors, pos, first_free, lvl + 1, w, sum, abs, eval);
        }
    }
}
