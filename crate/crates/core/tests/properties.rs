use ggr_core::diagrams::{enumerate_diagrams, zj_expansion, TailInputs};
use ggr_core::lattice::needed_grid_points;
use ggr_core::linalg::symmetric_eigen;
use ggr_core::oracle::random_weak_model;
use ggr_core::thermo::free_density;
use ggr_core::{build_model, ConstantRegistry, DiagramContext, DiagramFilter, Engine, GgrError, GrandParams};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn torus(d: usize, beta: f64, log_z: f64) -> ggr_core::DiscreteTorusModel {
    let p = GrandParams::from_log_fugacity(d, beta, log_z).unwrap();
    let l = if d == 1 { 16.0 } else { 6.0 };
    let m = needed_grid_points(l, &p, 1e-12).max(8);
    build_model(l, d, m, p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_gram_matrices_are_psd_and_hadamard(
        d in 1usize..=2,
        beta in 0.3f64..3.0,
        log_z in -2.0f64..3.0,
        picks in prop::collection::vec(0usize..1_000_000, 1..=6),
    ) {
        let model = torus(d, beta, log_z);
        let k = model.kernel();
        let n = k.grid.len();
        let mut pts: Vec<usize> = picks.iter().map(|x| x % n).collect();
        pts.sort_unstable();
        pts.dedup();
        let q = pts.len();
        let gram = DMatrix::from_fn(q, q, |i, j| k.gamma(k.grid.sub(pts[i], pts[j])));
        let det = gram.determinant();
        prop_assert!(det >= -1e-10, "det {det}");
        let min = symmetric_eigen(gram).eigenvalues.min();
        prop_assert!(min >= -1e-10, "min eigenvalue {min}");
        let rho = k.wick_density(&pts);
        prop_assert!(rho <= k.rho0().powi(q as i32) * (1.0 + 1e-12) + 1e-300, "{rho} vs {}", k.rho0().powi(q as i32));
    }

    // β ∼ ζρ₀^{−2/d} for z ≥ 1; with kinetic energy −Δ the natural unit of
    // βρ₀^{2/d} is 1/(4π), and the ratio tends to zero as z → 0
    #[test]
    fn beta_rho_zeta_bracket(d in 1usize..=3, beta in 0.01f64..100.0, log_z in 0.0f64..200.0) {
        let p = GrandParams::from_log_fugacity(d, beta, log_z).unwrap();
        let rho = free_density(&p).unwrap();
        let r = 4.0 * std::f64::consts::PI * beta * rho.powf(2.0 / d as f64) / p.zeta();
        prop_assert!((0.1..=10.0).contains(&r), "d={d} log z={log_z}: {r}");
    }

    #[test]
    fn sums_over_linked_three_vertex_diagrams_are_real(beta in 0.5f64..4.0, log_z in -1.0f64..2.0, amp in -0.9f64..0.9) {
        let model = torus(1, beta, log_z);
        let k = model.kernel();
        let g = k.sample_radial(|r| if r < 2.0 { amp * (-r * r).exp() } else { 0.0 });
        let ctx = DiagramContext::new(k, g).unwrap();
        let diags = enumerate_diagrams(0, 3, DiagramFilter::Linked).unwrap();
        let v = ctx.sum_values(&diags, &[], Engine::Momentum).unwrap();
        prop_assert!(v.value.im.abs() <= 1e-10 * v.value.norm().max(1e-300) + 1e-16);
    }
}

#[test]
fn series_terms_decay_with_the_small_parameter() {
    // |t_{p+1}|/|t_p| ≤ C·ρ₀I_g·max(1, I_γ); the measured worst ratio is
    // about 10, from p = 3 to p = 4 where a second γ-cycle first appears
    let mut worst: f64 = 0.0;
    for seed in 1..=10u64 {
        let model = random_weak_model(seed, 0.1);
        let k = model.kernel();
        let ctx = DiagramContext::new(&k, model.g_table()).unwrap();
        let inp = TailInputs::from_context(&ctx);
        let small = inp.rho0 * inp.i_g * inp.i_gamma.max(1.0);
        let s = zj_expansion(&ctx, 5, Engine::Position, &ConstantRegistry::new()).unwrap();
        for p in 2..5 {
            worst = worst.max(s.terms[p + 1].norm() / s.terms[p].norm() / small);
        }
    }
    assert!(worst < 20.0, "{worst}");
}

#[test]
fn oversized_enumeration_hits_the_guard() {
    assert!(matches!(enumerate_diagrams(0, 6, DiagramFilter::Linked), Err(GgrError::SizeGuard(_))));
    assert!(enumerate_diagrams(0, 5, DiagramFilter::Linked).is_ok());
}
