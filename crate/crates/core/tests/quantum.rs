use num_complex::Complex64;
use pathlab_core::quantum::{
    evolve_schrodinger, make_gaussian_packet, probability_density, propagate_density_matrix_pathintegral,
    to_relative_frame, wigner_transform, DensityMatrix, KernelKind,
};
use pathlab_core::stats::l1_distance;
use pathlab_core::{Potential1D, SpatialGrid, TimeGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn frame_change_round_trips_on_aligned_nodes(
        n in 8usize..40,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1600),
    ) {
        let g = SpatialGrid::new(-2.0, 2.0, n).unwrap();
        let values: Vec<Complex64> = raw[..n * n].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let rho = DensityMatrix::from_values(g, values, 1.0).unwrap();
        let back = rho.to_relative_frame((n - 1) / 2).unwrap().to_q_frame();
        for a in 0..n {
            for b in 0..n {
                let expect = if (a + b) % 2 == 0 { rho.get(a, b) } else { Complex64::new(0.0, 0.0) };
                prop_assert_eq!(back.get(a, b), expect);
            }
        }
    }

    #[test]
    fn gaussian_wigner_marginals(x0 in -1.5f64..1.5, p0 in -1.5f64..1.5, sigma in 0.6f64..1.2, hbar in 0.5f64..1.5) {
        let g = SpatialGrid::new(-14.0, 14.0, 281).unwrap();
        let psi = make_gaussian_packet(&g, x0, p0, sigma, hbar).unwrap();
        let rho = to_relative_frame(&psi, 140).unwrap();
        let pg = SpatialGrid::new(-10.0, 10.0, 201).unwrap();
        let w = wigner_transform(&rho, &pg).unwrap();
        prop_assert!(w.min() >= -1e-10);
        prop_assert!((w.total() - 1.0).abs() < 1e-6);
        for (a, b) in w.position_marginal().iter().zip(probability_density(&psi)) {
            prop_assert!((a - b).abs() < 1e-6);
        }
        let (mx, mp) = w.means();
        prop_assert!((mx - x0).abs() < 1e-6 && (mp - p0).abs() < 1e-6);
    }
}

#[test]
fn density_path_integral_tracks_split_step_in_an_anharmonic_well() {
    let g = SpatialGrid::new(-6.0, 6.0, 64).unwrap();
    let pot = Potential1D::polynomial(1.0, &[0.0, 0.0, 0.5, 0.0, 0.05]).unwrap();
    let psi = make_gaussian_packet(&g, 0.8, 0.0, 0.8, 1.0).unwrap();
    let time = TimeGrid::new(0.0, 1.0, 200).unwrap();
    let out = propagate_density_matrix_pathintegral(&DensityMatrix::from_pure(&psi), &pot, &time, KernelKind::BandLimited)
        .unwrap();
    let reference = evolve_schrodinger(&psi, &pot, time.epsilon(), time.n_slices()).unwrap();
    let d = l1_distance(&out.rho.diagonal(), &probability_density(&reference), g.dx()).unwrap();
    assert!(d < 1e-2, "{d}");
    assert!(out.rho.hermiticity_error() < 1e-10);
}
