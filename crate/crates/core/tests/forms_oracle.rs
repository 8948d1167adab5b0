//! Assembled blocks against forms evaluated by independent quadrature on
//! random two-cell meshes.

mod common;

use common::*;
use msflow::dg::{Assembler, BoundaryData, CellSet, IpdgTerms, ModelParameters};
use msflow::geometry::{Region, TriMesh};
use proptest::prelude::*;

#[derive(Debug)]
struct Case {
    mesh: TriMesh,
    params: ModelParameters,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    q: Vec<f64>,
}

fn case() -> impl Strategy<Value = Case> {
    let jitter = prop::array::uniform4(prop::array::uniform2(-0.2..0.2f64));
    let regions = prop::array::uniform2(prop::bool::ANY);
    let coefs = prop::collection::vec(-2.0..2.0f64, 36);
    let q = prop::collection::vec(-1.0..1.0f64, 2);
    let phys = (0.5..20.0f64, 1e-4..1e-1f64, 0.1..1.0f64, 1.0..10.0f64, 1e-3..1.0f64);
    (jitter, regions, coefs, q, phys).prop_map(|(j, r, c, q, (re, da, phi, gamma, tau))| {
        let regions = r.map(|p| if p { Region::Porous } else { Region::Fluid });
        let params = ModelParameters::new(re, da, 0.0, phi, tau, 1).unwrap().with_penalty(gamma).unwrap();
        Case {
            mesh: two_cell_mesh(j, regions),
            params,
            u: c[..12].to_vec(),
            v: c[12..24].to_vec(),
            w: c[24..].to_vec(),
            q,
        }
    })
}

fn close(got: f64, want: f64, scale: f64) -> Result<(), TestCaseError> {
    prop_assert!((got - want).abs() <= 1e-12 * scale.max(1.0), "{got} vs {want}");
    Ok(())
}

fn bilinear(m: &msflow::sparse::CsrMatrix, test: &[f64], trial: &[f64]) -> f64 {
    test.iter().zip(m.matvec(trial)).map(|(a, b)| a * b).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn mass_matches_oracle(c in case()) {
        let set = CellSet::whole(&c.mesh);
        let mass = Assembler::new(&c.mesh, &set).mass(&c.params);
        let want = mass_form(&c.mesh, &c.params, &c.u, &c.v);
        close(bilinear(&mass, &c.v, &c.u), want, want.abs())?;
    }

    #[test]
    fn darcy_matches_oracle(c in case()) {
        let set = CellSet::whole(&c.mesh);
        let d = Assembler::new(&c.mesh, &set).darcy_forchheimer(&c.params, None).unwrap();
        let want = darcy_form(&c.mesh, &c.params, &c.u, &c.v);
        close(bilinear(&d, &c.v, &c.u), want, want.abs())?;
    }

    #[test]
    fn ipdg_matches_oracle(c in case()) {
        let set = CellSet::whole(&c.mesh);
        let asm = Assembler::new(&c.mesh, &set);
        let a = asm.ipdg(&c.params, IpdgTerms::ALL, None).unwrap();
        let (want, scale) = a_dg(&c.mesh, &c.params, &c.u, &c.v, None);
        close(bilinear(&a, &c.v, &c.u), want, scale)?;
        let a = asm.ipdg(&c.params, IpdgTerms::ALL, Some(&c.w)).unwrap();
        let (want, scale) = a_dg(&c.mesh, &c.params, &c.u, &c.v, Some(&c.w));
        close(bilinear(&a, &c.v, &c.u), want, scale)?;
    }

    #[test]
    fn divergence_matches_oracle(c in case()) {
        let set = CellSet::whole(&c.mesh);
        let b = Assembler::new(&c.mesh, &set).divergence();
        let (want, scale) = b_form(&c.mesh, &c.q, &c.u);
        close(bilinear(&b, &c.q, &c.u), want, scale)?;
    }

    #[test]
    fn loads_match_oracle(c in case(), g0 in prop::array::uniform3(-1.0..1.0f64), g1 in prop::array::uniform3(-1.0..1.0f64)) {
        let gfun = move |x: [f64; 2]| [g0[0] + g0[1] * x[0] + g0[2] * x[1], g1[0] + g1[1] * x[0] + g1[2] * x[1]];
        let bc = BoundaryData::from_fn(gfun).with_gradient(move |_| [[g0[1], g0[2]], [g1[1], g1[2]]]);
        let set = CellSet::whole(&c.mesh);
        let (fu, fp) = Assembler::new(&c.mesh, &set).rhs(&c.params, &bc);
        let (want_u, scale, want_p) = load_forms(&c.mesh, &c.params, [g0, g1], &c.v, &c.q);
        let got_u: f64 = fu.iter().zip(&c.v).map(|(a, b)| a * b).sum();
        let got_p: f64 = fp.iter().zip(&c.q).map(|(a, b)| a * b).sum();
        close(got_u, want_u, scale)?;
        close(got_p, want_p, 1.0)?;
    }
}
