//! Re-runs the constant fit behind `ConstantRegistry::fitted`.
//!
//! cargo run --release -p ggr-core --example calibrate [first_seed] [count]

use ggr_core::oracle::calibrate;
use ggr_core::ConstantRegistry;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let first = args.first().copied().unwrap_or(1000);
    let count = args.get(1).copied().unwrap_or(30);
    // only the relative prefactors are fixed a priori; everything else at 1
    let unit = ConstantRegistry::new().with("tail.prefactor.1", 3.0).with("tail.prefactor.2", 3.0);
    let c = calibrate(first..first + count, 0.1, 4, &unit).expect("calibration run");
    println!("instances        {}", c.instances);
    println!("residual / tail  {:.4}", c.tail_ratio);
    println!("res(4) / res(2)  {:.4}", c.residual_ratio);
    println!("density / env    {:.4}  -> density.C1 = density.C2 = {:.1}", c.density_ratio, 2.0 * c.density_ratio);
}
