//! Property tests for the invariants that hold across whole input families.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use phaselim_core::numerics::{find_root, Grid};
use phaselim_core::protocol::InputState;
use phaselim_core::wavefn::WaveFunction;

fn small_grid() -> Arc<Grid> {
    Arc::new(Grid::gauss_legendre(64).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// F(f)(-y) = conj(F(f)(y)) for real f.
    #[test]
    fn oscillatory_ft_conjugate_symmetry(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        c in -2.0..2.0f64,
        y in 0.01..20.0f64,
    ) {
        let grid = small_grid();
        let vals: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&x| Complex64::new(a + b * x + c * (2.0 * x).cos(), 0.0))
            .collect();
        let plus = grid.oscillatory_ft(&vals, y).unwrap();
        let minus = grid.oscillatory_ft(&vals, -y).unwrap();
        prop_assert!((plus.conj() - minus).norm() < 1e-12);
    }

    /// Modulation by e^{icx} shifts the density: P^{mod}(y) = P^f(y + c).
    #[test]
    fn modulation_shift_identity(c in -6.0..6.0f64, y in -5.0..5.0f64) {
        let grid = small_grid();
        let vals: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&x| Complex64::new(1.0 + 0.5 * (PI * x).sin(), 0.0))
            .collect();
        let f = WaveFunction::normalize(vals, grid, "probe").unwrap();
        let shifted = f.modulate(c).unwrap();
        let lhs = shifted.limiting_distribution().density(y).unwrap();
        let rhs = f.limiting_distribution().density(y + c).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
    }

    /// The outcome density is covariant: a common rotation of true value and
    /// estimate leaves it unchanged, and it integrates to 1.
    #[test]
    fn outcome_density_covariance(
        seeds in prop::collection::vec(-1.0..1.0f64, 8),
        theta in 0.0..std::f64::consts::TAU,
        delta in 0.0..std::f64::consts::TAU,
        theta_hat in 0.0..std::f64::consts::TAU,
    ) {
        let coeffs: Vec<Complex64> = seeds
            .chunks(2)
            .map(|p| Complex64::new(p[0] + 0.1, p.get(1).copied().unwrap_or(0.0)))
            .collect();
        prop_assume!(coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6);
        let state = InputState::new(coeffs).unwrap();
        let a = state.outcome_density(theta, theta_hat);
        let b = state.outcome_density(theta + delta, theta_hat + delta);
        prop_assert!((a - b).abs() < 1e-12);
    }

    /// Bisection/secant root finding lands on the target for monotone maps.
    #[test]
    fn find_root_monotone_cubic(shift in -1.0..1.0f64, target in -0.8..0.8f64) {
        let f = move |x: f64| Ok(x * x * x + 0.5 * x + shift);
        let root = find_root(f, target, (-3.0, 3.0), 1e-12).unwrap();
        let value = root * root * root + 0.5 * root + shift;
        prop_assert!((value - target).abs() <= 1e-10);
    }

    /// Collapse weights are invariant under arbitrary per-entry phases.
    #[test]
    fn multiplicity_phase_invariance(
        p0 in 0.0..std::f64::consts::TAU,
        p1 in 0.0..std::f64::consts::TAU,
        p2 in 0.0..std::f64::consts::TAU,
        p3 in 0.0..std::f64::consts::TAU,
    ) {
        use phaselim_core::protocol::{collapse_multiplicity, MultiplicityState};
        let blocks = |ph: [f64; 4]| {
            MultiplicityState::new(vec![
                vec![Complex64::from_polar(0.5, ph[0])],
                vec![
                    Complex64::from_polar(0.5, ph[1]),
                    Complex64::from_polar(0.5, ph[2]),
                ],
                vec![Complex64::from_polar(0.5, ph[3])],
            ])
            .unwrap()
        };
        let base = collapse_multiplicity(&blocks([0.0; 4])).unwrap();
        let twisted = collapse_multiplicity(&blocks([p0, p1, p2, p3])).unwrap();
        for (a, b) in base.coeffs().iter().zip(twisted.coeffs()) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }
}
