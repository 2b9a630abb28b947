//! `bound`: pressure lower bound over a (a^dρ₀, log z) grid, with a
//! plot-data companion of δ_d against x at fixed z.

use std::path::PathBuf;

use ggr_core::bounds::main_bound;
use ggr_core::numfmt::sci;
use ggr_core::{BoundInputs, GgrError, GrandParams};
use rayon::prelude::*;

use super::{Outcome, RunContext};
use crate::output::{CliError, Cell};

const KEYS: &[&str] = &["d", "beta", "log_z", "x", "plot"];

struct Point {
    inp: BoundInputs,
    log_z: f64,
}

pub fn run(ctx: &RunContext) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    cfg.check_keys("bound", KEYS)?;
    let dims = cfg.usize_list("bound", "d", Some(&[3]))?;
    let beta = cfg.f64("bound", "beta", Some(1.0))?;
    let log_zs = cfg.list("bound", "log_z", Some(&[0.0]))?;
    let xs = cfg.list("bound", "x", None)?;
    if let Some(bad) = xs.iter().find(|&&x| !(x > 0.0)) {
        return Err(CliError::input(format!("key `bound.x`: a^d rho0 = {bad} is degenerate; need x > 0")));
    }
    let reg = cfg.registry()?;
    let mut points = Vec::new();
    for &d in &dims {
        for &lz in &log_zs {
            let params = GrandParams::from_log_fugacity(d, beta, lz).map_err(|e| CliError::input(format!("bound: {e}")))?;
            for &x in &xs {
                points.push(Point { inp: BoundInputs::from_diluteness(x, params, reg.clone())?, log_z: lz });
            }
        }
    }
    let rows: Vec<Result<(Vec<Cell>, f64), CliError>> = points
        .par_iter()
        .map(|pt| {
            let inp = &pt.inp;
            let (regime, b, lead, delta, valid) = match main_bound(inp) {
                Ok(r) => (r.regime.name(), r.b_choice, r.leading_term, r.delta_d, r.valid),
                Err(GgrError::Domain(_)) => ("none", f64::NAN, inp.leading_term()?, f64::NAN, false),
                Err(e) => return Err(e.into()),
            };
            let cells = vec![
                inp.d().into(),
                inp.a.into(),
                inp.rho0.into(),
                inp.x.into(),
                pt.log_z.into(),
                inp.zeta().into(),
                regime.into(),
                b.into(),
                lead.into(),
                delta.into(),
                valid.into(),
            ];
            Ok((cells, delta))
        })
        .collect();

    let mut out = Outcome::new(ctx.document("bound"));
    out.doc.meta(format!("beta={}", sci(beta)));
    out.doc.columns(&["d", "a", "rho0", "x=a^d_rho0", "log_z", "zeta", "regime", "b_choice", "leading_term", "delta_d", "valid"]);
    let mut plot = vec![crate::output::header_line(ctx.seed, &ctx.config.hash), "# delta_d against x = a^d rho0, one block per (d, log z)".to_string()];
    let mut deltas = Vec::with_capacity(rows.len());
    for r in rows {
        let (cells, delta) = r?;
        out.doc.row(cells);
        deltas.push(delta);
    }
    for (i, chunk) in points.chunks(xs.len()).enumerate() {
        let inp = &chunk[0].inp;
        if i > 0 {
            plot.push(String::new());
            plot.push(String::new());
        }
        plot.push(format!("# d={} log_z={}", inp.d(), sci(chunk[0].log_z)));
        for (j, pt) in chunk.iter().enumerate() {
            let delta = deltas[i * xs.len() + j];
            if delta.is_finite() {
                plot.push(format!("{} {}", sci(pt.inp.x), sci(delta)));
            }
        }
    }
    let plot_path = cfg.str("bound", "plot").map(PathBuf::from).or_else(|| ctx.out.as_ref().map(|p| p.with_extension("plot")));
    if let Some(path) = plot_path {
        out.extra.push((path, plot.join("\n") + "\n"));
    }
    if ctx.verify {
        for (pt, delta) in points.iter().zip(&deltas) {
            out.check(delta.is_nan() || *delta >= 0.0, || format!("negative delta at x = {}", pt.inp.x));
        }
    }
    Ok(out)
}
