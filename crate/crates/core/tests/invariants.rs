//! Structural properties of the discretisation and of the multiscale space.

use msflow::analysis::{coarse_average, dof_counts, error_velocity};
use msflow::dg::{Assembler, CellSet, DgState, IpdgTerms, ModelParameters, Preset};
use msflow::geometry::{generate_structured_mesh, CircleInclusion, CoarseGrid, DomainSpec, Rect, TriMesh};
use msflow::gmsfem::{generalized_eigen, BasisOptions, MultiscaleSpace, SnapshotProblem};
use msflow::parallel::Execution;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn domain_mesh(n: usize, nc: usize, center: [f64; 2], r: f64) -> (TriMesh, CoarseGrid) {
    let d = DomainSpec::new(Rect::symmetric_unit(), vec![CircleInclusion::new(center, r).unwrap()], 0.3).unwrap();
    generate_structured_mesh(&d, n, (nc, nc)).unwrap()
}

fn mesh_strategy() -> impl Strategy<Value = (usize, usize, [f64; 2], f64)> {
    (1usize..4, 1usize..4, prop::array::uniform2(-0.3..0.3f64), 0.2..0.6f64)
}

fn linear_field(mesh: &TriMesh, c: [f64; 6]) -> Vec<f64> {
    DgState::interpolate(mesh, |x| [c[0] + c[1] * x[0] + c[2] * x[1], c[3] + c[4] * x[0] + c[5] * x[1]], |_| 0.0).velocity
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn continuous_fields_carry_no_interior_energy((n, nc, c, r) in mesh_strategy(), coef in prop::array::uniform6(-2.0..2.0f64)) {
        let (m, _) = domain_mesh(n, nc, c, r);
        let set = CellSet::whole(&m);
        let asm = Assembler::new(&m, &set);
        let p = ModelParameters::preset(Preset::Test2, 1e-3).unwrap();
        let u = linear_field(&m, coef);
        let interior = IpdgTerms { diffusion: false, convection: false, interior: true, boundary: false };
        let jump = asm.ipdg(&p, interior, None).unwrap().quadratic_form(&u);
        let scale = asm.ipdg(&p, IpdgTerms::LINEAR, None).unwrap().max_abs() * u.iter().map(|v| v * v).sum::<f64>();
        prop_assert!(jump.abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn symmetric_blocks_and_parameter_free_divergence((n, nc, c, r) in mesh_strategy(), re in 0.5..50.0f64, da in 1e-5..1e-1f64) {
        let (m, _) = domain_mesh(n, nc, c, r);
        let set = CellSet::whole(&m);
        let asm = Assembler::new(&m, &set);
        let p = ModelParameters::new(re, da, 1.0, 0.4, 0.1, 10).unwrap();
        let lin = linear_field(&m, [1.0, 0.2, -0.3, 0.0, 0.5, 0.1]);
        for a in [asm.mass(&p), asm.darcy_forchheimer(&p, Some(&lin)).unwrap(), asm.ipdg(&p, IpdgTerms::ALL, None).unwrap()] {
            prop_assert!(a.symmetry_residual() <= 1e-10 * a.max_abs().max(1e-300));
        }
        let b1 = asm.divergence();
        let other = CellSet::whole(&m);
        prop_assert_eq!(b1, Assembler::new(&m, &other).with_execution(Execution::Sequential).divergence());
    }

    #[test]
    fn spectral_pairs_are_sorted_and_s_orthonormal(seed in 0u64..10_000, n in 2usize..14) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let h = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = &g * g.transpose();
        let s = &h * h.transpose() + 0.2 * DMatrix::identity(n, n);
        let e = generalized_eigen(&a, &s).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = e.vectors.transpose() * &s * &e.vectors;
        prop_assert!((gram - DMatrix::identity(n, n)).amax() <= 1e-9);
    }

    #[test]
    fn coarse_average_is_a_projection((n, nc, c, r) in mesh_strategy(), vals in prop::collection::vec(-5.0..5.0f64, 9)) {
        let (m, coarse) = domain_mesh(n, nc, c, r);
        let p_h: Vec<f64> = (0..coarse.len()).map(|i| vals[i % vals.len()]).collect();
        let fine: Vec<f64> = m.cells().iter().map(|cell| p_h[cell.coarse]).collect();
        let avg = coarse_average(&m, &coarse, &fine).unwrap();
        for (a, b) in avg.iter().zip(&p_h) {
            prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
        }
    }

    #[test]
    fn relative_error_is_non_negative((n, nc, c, r) in mesh_strategy(), a in prop::array::uniform6(-2.0..2.0f64), b in prop::array::uniform6(-2.0..2.0f64)) {
        let (m, _) = domain_mesh(n, nc, c, r);
        let ua = linear_field(&m, a);
        prop_assume!(ua.iter().any(|v| v.abs() > 1e-3));
        let e = error_velocity(&m, &ua, &linear_field(&m, b)).unwrap();
        prop_assert!(e.is_finite() && e >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn snapshots_scale_with_the_datum(alpha in prop_oneof![-4.0..-0.25f64, 0.25..4.0f64], facet in 0usize..8, g in prop::array::uniform2(-1.0..1.0f64)) {
        let (m, coarse) = domain_mesh(2, 2, [0.0, 0.0], 0.5);
        let p = ModelParameters::preset(Preset::Test1, 1e-3).unwrap();
        let lin = linear_field(&m, [1.0, 0.0, 0.3, 0.0, 0.2, 0.0]);
        let prob = SnapshotProblem::new(&m, &p, coarse.cells()[0].fine_cells.clone(), &lin, 0).unwrap();
        let (u1, _) = prob.solve_delta(facet, g).unwrap();
        let (u2, _) = prob.solve_delta(facet, [alpha * g[0], alpha * g[1]]).unwrap();
        let err: f64 = u1.iter().zip(&u2).map(|(a, b)| (alpha * a - b).powi(2)).sum::<f64>().sqrt();
        let nrm: f64 = u2.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-10 * nrm.max(1e-300));
    }

    #[test]
    fn projected_mass_is_psd_and_dofs_add_up(m_basis in 1usize..6, nc in 1usize..4, os in prop::bool::ANY) {
        let (mesh, coarse) = domain_mesh(2, nc, [0.1, -0.1], 0.45);
        let p = ModelParameters::preset(Preset::Test1, 1e-3).unwrap();
        let lin = linear_field(&mesh, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let opts = BasisOptions { oversampled: os, ..Default::default() };
        let space = MultiscaleSpace::build(&mesh, &coarse, &p, &lin, opts, Execution::default()).unwrap();
        let proj = space.projection(&mesh, &coarse, m_basis).unwrap();
        prop_assert_eq!(proj.dof(), dof_counts(mesh.n_cells(), coarse.len(), m_basis).1);
        prop_assert_eq!(proj.dof(), m_basis * coarse.len() + coarse.len());
        let set = CellSet::whole(&mesh);
        let mh = Assembler::new(&mesh, &set).mass(&p).project(&proj.r_u, &proj.r_u);
        let k = mh.nrows();
        let dense = DMatrix::from_fn(k, k, |i, j| mh.get(i, j));
        prop_assert!(mh.symmetry_residual() <= 1e-12 * mh.max_abs());
        let sym = 0.5 * (&dense + dense.transpose());
        prop_assert!(sym.symmetric_eigenvalues().min() >= -1e-10 * mh.max_abs());
    }
}
