//! Legendre-series analysis on quadrature grids.
//!
//! A grid function is expanded as f = Σ cₖ Pₖ; differentiation and
//! multiplication by x act on the coefficients exactly, which keeps
//! derived quantities (derivatives, Sturm-Liouville applications)
//! spectrally accurate for smooth f.

use num_complex::Complex64;

use super::Grid;

/// c_k = (2k+1)/2 · Σᵢ wᵢ P_k(xᵢ) f(xᵢ) for k < k_max.
pub fn values_to_coeffs(grid: &Grid, values: &[Complex64], k_max: usize) -> Vec<Complex64> {
    assert_eq!(values.len(), grid.len());
    let n = grid.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); k_max];
    // Column-wise P_k recurrence per node keeps memory at O(1) per node.
    let mut p_prev = vec![1.0; n];
    let mut p_cur: Vec<f64> = grid.nodes().to_vec();
    for (k, c) in coeffs.iter_mut().enumerate() {
        let pk: &[f64] = match k {
            0 => &p_prev,
            1 => &p_cur,
            _ => {
                let kf = (k - 1) as f64;
                for i in 0..n {
                    let next = ((2.0 * kf + 1.0) * grid.nodes()[i] * p_cur[i] - kf * p_prev[i])
                        / (kf + 1.0);
                    p_prev[i] = p_cur[i];
                    p_cur[i] = next;
                }
                &p_cur
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += grid.weights()[i] * pk[i] * values[i];
        }
        *c = acc * ((2 * k + 1) as f64 / 2.0);
    }
    coeffs
}

/// Drops trailing coefficients below `rel_floor` times the largest magnitude.
pub fn trim(coeffs: &mut Vec<Complex64>, rel_floor: f64) {
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        coeffs.truncate(1);
        return;
    }
    let floor = max * rel_floor;
    let mut keep = coeffs.len();
    while keep > 1 && coeffs[keep - 1].norm() < floor {
        keep -= 1;
    }
    coeffs.truncate(keep);
}

/// Evaluates Σ cₖ Pₖ(x) by the three-term recurrence.
pub fn eval_series(coeffs: &[Complex64], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut p0 = 1.0;
    let mut p1 = x;
    for (k, c) in coeffs.iter().enumerate() {
        let pk = match k {
            0 => 1.0,
            1 => x,
            _ => {
                let kf = (k - 1) as f64;
                let next = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = next;
                next
            }
        };
        acc += c * pk;
    }
    acc
}

/// Coefficients of f' from those of f:
/// bₖ = (2k+1) Σ_{j>k, j-k odd} c_j, by downward recurrence.
pub fn derivative_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); n - 1];
    for k in (0..n - 1).rev() {
        let above = if k + 2 < n - 1 {
            sums[k + 2]
        } else {
            Complex64::new(0.0, 0.0)
        };
        sums[k] = above + coeffs[k + 1];
    }
    sums.iter()
        .enumerate()
        .map(|(k, s)| s * (2 * k + 1) as f64)
        .collect()
}

/// Coefficients of x·f from those of f, via
/// x·Pₖ = ((k+1)P_{k+1} + k P_{k-1})/(2k+1).
pub fn multiply_by_x(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, &c) in coeffs.iter().enumerate() {
        let kf = k as f64;
        out[k + 1] += c * ((kf + 1.0) / (2.0 * kf + 1.0));
        if k > 0 {
            out[k - 1] += c * (kf / (2.0 * kf + 1.0));
        }
    }
    out
}

/// ∫₋₁¹ |f|² dx = Σ |cₖ|²·2/(2k+1), by orthogonality.
pub fn norm_sq(coeffs: &[Complex64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() * 2.0 / (2 * k + 1) as f64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
        grid.nodes()
            .iter()
            .map(|&x| Complex64::new(f(x), 0.0))
            .collect()
    }

    #[test]
    fn roundtrip_smooth_function() {
        let grid = Grid::gauss_legendre(64).unwrap();
        let vals = sample(&grid, |x| (2.0 * x).sin() + 0.3 * x * x);
        let coeffs = values_to_coeffs(&grid, &vals, 64);
        for &x in &[-0.9_f64, -0.31, 0.0, 0.5, 0.99] {
            let expect = (2.0 * x).sin() + 0.3 * x * x;
            assert_abs_diff_eq!(eval_series(&coeffs, x).re, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_matches_analytic() {
        let grid = Grid::gauss_legendre(64).unwrap();
        let vals = sample(&grid, |x| (PI * (x + 1.0) / 2.0).sin());
        let coeffs = values_to_coeffs(&grid, &vals, 64);
        let dcoeffs = derivative_coeffs(&coeffs);
        for &x in &[-0.7, 0.0, 0.42, 0.9] {
            let expect = PI / 2.0 * (PI * (x + 1.0) / 2.0).cos();
            assert_abs_diff_eq!(eval_series(&dcoeffs, x).re, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn derivative_of_p3() {
        // P3' = P0 + 5 P2.
        let coeffs = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let d = derivative_coeffs(&coeffs);
        assert_abs_diff_eq!(d[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2].re, 5.0, epsilon = 1e-15);
    }

    #[test]
    fn multiply_by_x_matches_pointwise() {
        let grid = Grid::gauss_legendre(48).unwrap();
        let vals = sample(&grid, |x| (1.5 * x).cos());
        let coeffs = values_to_coeffs(&grid, &vals, 48);
        let xc = multiply_by_x(&coeffs);
        for &x in &[-0.8, 0.1, 0.66] {
            assert_abs_diff_eq!(
                eval_series(&xc, x).re,
                x * (1.5 * x).cos(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn norm_sq_matches_quadrature() {
        let grid = Grid::gauss_legendre(48).unwrap();
        let vals = sample(&grid, |x| (x - 0.2) * (3.0 * x).sin());
        let coeffs = values_to_coeffs(&grid, &vals, 48);
        let direct: f64 = grid
            .weights()
            .iter()
            .zip(&vals)
            .map(|(w, v)| w * v.norm_sqr())
            .sum();
        assert_abs_diff_eq!(norm_sq(&coeffs), direct, epsilon = 1e-12);
    }
}
