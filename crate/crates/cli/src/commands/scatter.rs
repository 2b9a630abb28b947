//! `scatter`: scattering length and energy integral of one potential.

use ggr_core::scattering::{solve_scattering, Potential, PotentialKind};
use ggr_core::thermo::scattering_constant;

use super::{Outcome, RunContext};
use crate::output::CliError;

const KEYS: &[&str] = &["file", "kind", "d", "a0", "V0", "R", "table", "R0", "r_max"];

pub fn run(ctx: &RunContext) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    cfg.check_keys("potential", KEYS)?;
    let text = match cfg.str("potential", "file") {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::input(format!("key `potential.file`: {path}: {e}")))?,
        None => cfg
            .section("potential")
            .iter()
            .filter(|(k, _)| k.as_str() != "r_max")
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect(),
    };
    let pot = Potential::parse_spec(&text).map_err(|e| CliError::input(format!("potential: {e}")))?;
    let r_max = cfg.f64("potential", "r_max", Some(20.0 * pot.support_radius()))?;
    let sol = solve_scattering(&pot, r_max)?;
    let d = pot.d();
    let (kind, size, v0) = match pot.kind() {
        PotentialKind::HardCore { a0 } => ("hard_core", *a0, f64::INFINITY),
        PotentialKind::SoftSphere { v0, r } => ("soft_sphere", *r, *v0),
        PotentialKind::Tabulated { v, r0, .. } => ("tabulated", *r0, v.iter().cloned().fold(0.0, f64::max)),
    };
    let cdad = scattering_constant(d) * sol.a.powi(d as i32);
    let residual = sol.energy_integral - cdad;

    let mut doc = ctx.document("scatter");
    doc.meta(format!("r_max={}", ggr_core::numfmt::sci(r_max)));
    doc.columns(&["d", "kind", "a0_or_R", "V0", "a", "energy_integral", "c_d_a_d_residual"]);
    doc.row(vec![d.into(), kind.into(), size.into(), v0.into(), sol.a.into(), sol.energy_integral.into(), residual.into()]);
    let mut out = Outcome::new(doc);
    if ctx.verify {
        out.check(residual.abs() <= 1e-6 * cdad + 1e-14, || format!("energy integral {} differs from c_d a^d = {cdad}", sol.energy_integral));
        if let PotentialKind::HardCore { a0 } = pot.kind() {
            out.check((sol.a - a0).abs() <= 1e-6 * a0, || format!("hard-core scattering length {} != a0 = {a0}", sol.a));
        }
    }
    Ok(out)
}
