//! `thermo`: free-gas sweep over (d, β, log z).

use ggr_core::thermo::{correction_coefficient, free_density, free_pressure, polylog_neg, zero_temperature_constant};
use ggr_core::GrandParams;
use rayon::prelude::*;

use super::{Outcome, RunContext};
use crate::output::{CliError, Cell};

const KEYS: &[&str] = &["d", "beta", "log_z"];

pub fn run(ctx: &RunContext) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    cfg.check_keys("thermo", KEYS)?;
    let dims = cfg.usize_list("thermo", "d", Some(&[1, 2, 3]))?;
    let betas = cfg.list("thermo", "beta", Some(&[1.0]))?;
    let log_zs = cfg.list("thermo", "log_z", None)?;
    let mut points = Vec::new();
    for &d in &dims {
        for &beta in &betas {
            for &lz in &log_zs {
                points.push(GrandParams::from_log_fugacity(d, beta, lz).map_err(|e| CliError::input(format!("thermo: {e}")))?);
            }
        }
    }
    let rows: Vec<Result<Vec<Cell>, CliError>> = points
        .par_iter()
        .map(|p| {
            let coeff = correction_coefficient(p)?;
            Ok(vec![
                p.d().into(),
                p.beta().into(),
                p.log_z().into(),
                p.zeta().into(),
                free_pressure(p)?.into(),
                free_density(p)?.into(),
                coeff.into(),
                (coeff / zero_temperature_constant(p.d())).into(),
            ])
        })
        .collect();
    let mut out = Outcome::new(ctx.document("thermo"));
    if ctx.selftest {
        selftest(&mut out)?;
    }
    out.doc.columns(&["d", "beta", "log_z", "zeta", "psi0", "rho0", "coeff", "coeff_over_zeroT_limit"]);
    for r in rows {
        out.doc.row(r?);
    }
    Ok(out)
}

fn selftest(out: &mut Outcome) -> Result<(), CliError> {
    let log2 = polylog_neg(1.0, 0.0)?;
    out.check((log2 - std::f64::consts::LN_2).abs() < 1e-12, || format!("-Li_1(-1) = {log2}, expected log 2"));
    out.doc.meta(format!("selftest -Li_1(-1)={}", ggr_core::numfmt::sci(log2)));
    for d in 1..=3 {
        let p = GrandParams::from_log_fugacity(d, 1.0, 100.0)?;
        let ratio = correction_coefficient(&p)? / zero_temperature_constant(d);
        out.check((ratio - 1.0).abs() < 1e-3, || format!("d={d}: coefficient/limit = {ratio} at log z = 100"));
        out.doc.meta(format!("selftest d={d} coeff_over_zeroT_limit(log_z=100)={}", ggr_core::numfmt::sci(ratio)));
        // classical tail: ρ₀ → z(4πβ)^{−d/2}
        let p = GrandParams::from_log_fugacity(d, 1.0, -30.0)?;
        let classical = p.z() * (4.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
        let rho = free_density(&p)?;
        out.check(((rho - classical) / classical).abs() < 1e-10, || format!("d={d}: classical tail {rho} vs {classical}"));
    }
    Ok(())
}
