//! Multi-dimensional discrete Fourier transforms on cubic grids.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place unnormalized DFT over a row-major `m^dims` array along every axis.
/// `forward` uses e^{−2πi jn/m}, otherwise e^{+2πi jn/m}.
pub fn fft_nd(data: &mut [Complex64], m: usize, dims: usize, forward: bool) {
    debug_assert_eq!(data.len(), m.pow(dims as u32));
    if dims == 0 {
        return;
    }
    let mut planner = FftPlanner::new();
    let plan = if forward { planner.plan_fft_forward(m) } else { planner.plan_fft_inverse(m) };
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for axis in 0..dims {
        // stride of this axis in row-major order (last axis fastest)
        let stride = m.pow((dims - 1 - axis) as u32);
        let block = stride * m;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum_2d() {
        let m = 6;
        let data: Vec<Complex64> = (0..m * m).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64).cos())).collect();
        let mut out = data.clone();
        fft_nd(&mut out, m, 2, true);
        for n0 in 0..m {
            for n1 in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for j0 in 0..m {
                    for j1 in 0..m {
                        let ph = -2.0 * std::f64::consts::PI * ((n0 * j0 + n1 * j1) as f64) / m as f64;
                        s += data[j0 * m + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - out[n0 * m + n1]).norm() < 1e-12);
            }
        }
    }
}
