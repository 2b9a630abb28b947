//! `oracle`: exact log(Z_J/Z) on small lattices against the truncated
//! linked-diagram series.

use ggr_core::oracle::{compare_ggr, exact_jastrow_state, random_weak_model, DensityEnvelopeInputs, LatticeModel};

use rayon::prelude::*;

use super::{Outcome, RunContext};
use crate::output::{CliError, Cell};

const KEYS: &[&str] = &["d", "side", "beta", "mu", "f1", "f2", "p_max", "random", "max_coupling"];

/// Jastrow factor f1 at distance 1 and f2 at distances in (1, 2].
fn profile_model(d: usize, side: usize, beta: f64, mu: f64, f1: f64, f2: f64) -> Result<LatticeModel, CliError> {
    let base = LatticeModel::new(d, side, beta, mu)?;
    let grid = base.grid();
    let f = (0..grid.len())
        .map(|x| {
            let s = grid.signed(x);
            let r = (0..d).map(|a| (s[a] * s[a]) as f64).sum::<f64>().sqrt();
            if r == 0.0 || r > 2.0 {
                1.0
            } else if r <= 1.0 {
                f1
            } else {
                f2
            }
        })
        .collect();
    Ok(base.with_jastrow(f)?)
}

struct Row {
    cells: Vec<Cell>,
    residual: f64,
    tail: f64,
    coupling: f64,
    entropy_margin: f64,
}

pub fn run(ctx: &RunContext) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    cfg.check_keys("oracle", KEYS)?;
    let d = cfg.usize("oracle", "d", Some(1))?;
    let sides = cfg.usize_list("oracle", "side", Some(&[8]))?;
    let betas = cfg.list("oracle", "beta", Some(&[1.0]))?;
    let mus = cfg.list("oracle", "mu", Some(&[0.0]))?;
    let f1 = cfg.f64("oracle", "f1", Some(0.9))?;
    let f2 = cfg.f64("oracle", "f2", Some(1.0))?;
    let p_max = cfg.usize_list("oracle", "p_max", Some(&[2, 3, 4]))?;
    let random = cfg.usize("oracle", "random", Some(0))?;
    let max_coupling = cfg.f64("oracle", "max_coupling", Some(0.1))?;
    let reg = cfg.registry()?;

    let mut models = Vec::new();
    for &side in &sides {
        for &beta in &betas {
            for &mu in &mus {
                models.push(profile_model(d, side, beta, mu, f1, f2)?);
            }
        }
    }
    models.extend((0..random as u64).map(|i| random_weak_model(ctx.seed.wrapping_add(i), max_coupling)));

    let rows: Vec<Result<Vec<Row>, CliError>> = models
        .par_iter()
        .map(|model| {
            let j = exact_jastrow_state(model)?;
            let entropy_margin = (-j.log_zj / model.beta + model.dbeta_log_zj()) + j.entropy / model.beta;
            let inp = DensityEnvelopeInputs::of(model);
            p_max
                .iter()
                .map(|&p| {
                    let c = compare_ggr(model, p, &reg)?;
                    let cells: Vec<Cell> = vec![
                        model.sites().into(),
                        model.beta.into(),
                        model.mu.into(),
                        (inp.rho0 * inp.i_g).into(),
                        c.coupling.into(),
                        p.into(),
                        c.exact.into(),
                        c.series.into(),
                        c.residual.into(),
                        c.tail_estimate.into(),
                        entropy_margin.into(),
                    ];
                    Ok(Row { cells, residual: c.residual, tail: c.tail_estimate, coupling: c.coupling, entropy_margin })
                })
                .collect()
        })
        .collect();

    let mut out = Outcome::new(ctx.document("oracle"));
    out.doc.meta(format!("random={random} max_coupling={}", ggr_core::numfmt::sci(max_coupling)));
    out.doc.columns(&["M", "beta", "mu", "rho0Ig", "rho0IgIgamma", "p_max", "exact_logZJ_over_Z", "truncated", "residual", "tail_estimate", "entropy_margin"]);
    for (mi, r) in rows.into_iter().enumerate() {
        let r = r?;
        // the highest order must improve on the lowest; intermediate odd
        // orders may overshoot
        let (first, last) = (r.first().map(|x| x.residual), r.last().map(|x| x.residual));
        let in_regime = r.first().is_some_and(|x| x.coupling < 0.1);
        for row in r {
            let Row { cells, residual, tail, coupling, entropy_margin } = row;
            out.doc.row(cells);
            if ctx.verify {
                out.check(entropy_margin >= -1e-8, || format!("model {mi}: entropy inequality violated by {entropy_margin}"));
                if coupling < 0.1 {
                    out.check(residual <= tail, || format!("model {mi}: residual {residual} exceeds tail estimate {tail}"));
                }
            }
        }
        if let (true, true, Some(r0), Some(r1)) = (ctx.verify, in_regime && p_max.len() > 1, first, last) {
            out.check(r1 < r0 || r0 == 0.0, || format!("model {mi}: residual {r1} at the highest order not below {r0}"));
        }
    }
    Ok(out)
}
