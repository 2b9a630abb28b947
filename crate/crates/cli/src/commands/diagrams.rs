//! `diagrams`: enumeration with values from both engines.

use ggr_core::diagrams::{enumerate_diagrams_guarded, enumerate_graphs_guarded, DiagramFilter, SizeGuard};
use ggr_core::lattice::build_model;
use ggr_core::numfmt::sci;
use ggr_core::{DiagramContext, GrandParams};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{Outcome, RunContext};
use crate::output::CliError;

const KEYS: &[&str] = &["d", "l", "m", "beta", "log_z", "q", "p", "external", "g_amplitude", "g_range", "filter", "max_vertices"];

pub fn run(ctx: &RunContext) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    cfg.check_keys("diagrams", KEYS)?;
    let d = cfg.usize("diagrams", "d", Some(1))?;
    let l = cfg.f64("diagrams", "l", Some(8.0))?;
    let m = cfg.usize("diagrams", "m", Some(8))?;
    let beta = cfg.f64("diagrams", "beta", Some(4.0))?;
    let log_z = cfg.f64("diagrams", "log_z", Some(0.3))?;
    let qs = cfg.usize_list("diagrams", "q", Some(&[0, 1]))?;
    let ps = cfg.usize_list("diagrams", "p", Some(&[1, 2]))?;
    let external = cfg.usize_list("diagrams", "external", Some(&[0, 3, 6]))?;
    let amp = cfg.f64("diagrams", "g_amplitude", Some(-0.7))?;
    let range = cfg.f64("diagrams", "g_range", Some(2.9))?;
    let guard = SizeGuard { max_vertices: cfg.usize("diagrams", "max_vertices", Some(SizeGuard::default().max_vertices))?, ..SizeGuard::default() };
    let linked = match cfg.str("diagrams", "filter").unwrap_or("linked") {
        "linked" => true,
        "all" => false,
        other => return Err(CliError::input(format!("key `diagrams.filter`: `{other}` is not `linked` or `all`"))),
    };

    let params = GrandParams::from_log_fugacity(d, beta, log_z).map_err(|e| CliError::input(format!("diagrams: {e}")))?;
    let model = build_model(l, d, m, params)?;
    let kernel = model.kernel();
    if let Some(&bad) = external.iter().find(|&&x| x >= kernel.grid.len()) {
        return Err(CliError::input(format!("key `diagrams.external`: site {bad} outside the {}-point grid", kernel.grid.len())));
    }
    let g = kernel.sample_radial(|r| if r < range { amp * (-r * r / 2.0).exp() } else { 0.0 });
    let dctx = DiagramContext::new(kernel, g)?.with_guard(guard);

    let mut out = Outcome::new(ctx.document("diagrams"));
    out.doc.meta(format!("d={d} L={} M={m} beta={} log_z={} g=amp*exp(-r^2/2) for r<range, amp={} range={}", sci(l), sci(beta), sci(log_z), sci(amp), sci(range)));
    out.doc.meta("q p | perm | edges | sign k kappa n_g n_g* | re(position) im(position) | re(momentum) im(momentum)");
    let mut mismatches = 0usize;
    let mut total = 0usize;
    for &q in &qs {
        if q > external.len() {
            return Err(CliError::input(format!("key `diagrams.external`: q = {q} needs {q} sites, {} given", external.len())));
        }
        let ext = &external[..q];
        for &p in &ps {
            let filter = match (linked, q) {
                (false, _) => DiagramFilter::All,
                (true, 0 | 1) => DiagramFilter::Linked,
                (true, _) => DiagramFilter::TildeLinked,
            };
            let diags = enumerate_diagrams_guarded(q, p, filter, &guard)?;
            let vals: Vec<Result<(Complex64, Complex64, f64), CliError>> = diags
                .par_iter()
                .map(|diag| {
                    let a = dctx.value_position(diag, ext)?;
                    let b = dctx.value_momentum(diag, ext)?;
                    Ok((a.value, b.value, a.scale))
                })
                .collect();
            for (diag, v) in diags.iter().zip(vals) {
                let (a, b, scale) = v?;
                total += 1;
                if (a - b).norm() > 1e-10 * a.norm().max(b.norm()).max(1e-6 * scale) + 1e-300 {
                    mismatches += 1;
                }
                out.doc.line(format!("{} | {} {}", diag.dump_line(a), sci(b.re), sci(b.im)));
            }
        }
    }
    if ctx.verify {
        out.check(mismatches == 0, || format!("{mismatches} of {total} diagrams differ between engines beyond 1e-10"));
        verify_counts(&mut out, &guard)?;
    }
    Ok(out)
}

fn verify_counts(out: &mut Outcome, guard: &SizeGuard) -> Result<(), CliError> {
    let l11 = enumerate_diagrams_guarded(1, 1, DiagramFilter::Linked, guard)?.len();
    out.check(l11 == 2, || format!("|L_1^1| = {l11}, expected 2"));
    let k1 = |s: &ggr_core::diagrams::ClusterStats| s.k == 1;
    let l21 = enumerate_diagrams_guarded(1, 2, DiagramFilter::LinkedWith(&k1), guard)?.len();
    out.check(l21 == 4, || format!("|L_2^1 with k=1| = {l21}, expected 4"));
    let g12 = enumerate_graphs_guarded(2, 1, guard)?.len();
    out.check(g12 == 3, || format!("|G_1^2| = {g12}, expected 3"));
    for n in 2..=guard.max_vertices.min(7) {
        let trees = enumerate_graphs_guarded(0, n, guard)?.into_iter().filter(|g| g.is_tree()).count();
        let expect = n.pow(n as u32 - 2);
        out.check(trees == expect, || format!("{trees} labelled trees on {n} vertices, expected {expect}"));
    }
    Ok(())
}
