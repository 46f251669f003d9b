use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use weyllab::herglotz::{mobius_bc, stieltjes, DiscreteMeasure};
use weyllab::jacobi::{coefficient_stripping, max_relative_parameter_error, spectral_measure, JacobiOperator, StrippingRoute};
use weyllab::rankone::RankOneFamily;
use weyllab::xi::{counting_shift, xi_from_eigen_data, SpectralData};

fn jacobi_params() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=10).prop_flat_map(|n| {
        (
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(0.3f64..2.0, n - 1),
        )
    })
}

fn op_text(b: &[f64], a: &[f64]) -> String {
    b.iter()
        .enumerate()
        .map(|(k, bk)| match a.get(k) {
            Some(ak) => format!("{bk:.17e} {ak:.17e}\n"),
            None => format!("{bk:.17e}\n"),
        })
        .collect()
}

fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        (&m + m.transpose()) * 0.5
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_determines_the_operator((b, a) in jacobi_params()) {
        let j = JacobiOperator::from_text(&op_text(&b, &a), "prop").unwrap();
        let mu = spectral_measure(&j).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        let rec = coefficient_stripping(&mu, StrippingRoute::OpRecursion, b.len()).unwrap();
        prop_assert!(max_relative_parameter_error(&j, &rec) < 1e-8);
    }

    #[test]
    fn stieltjes_transform_maps_upper_half_plane_into_itself(
        atoms in prop::collection::vec((-5.0f64..5.0, 0.01f64..3.0), 1..20),
        re in -6.0f64..6.0,
        im in 1e-3f64..4.0,
    ) {
        let mu = DiscreteMeasure::new(atoms).unwrap();
        let f = stieltjes(&mu, Complex64::new(re, im)).unwrap();
        prop_assert!(f.im > 0.0);
    }

    #[test]
    fn boundary_rotations_compose(
        re in -3.0f64..3.0,
        im in 0.01f64..3.0,
        t1 in -1.5f64..1.5,
        t2 in -1.5f64..1.5,
    ) {
        let m = Complex64::new(re, im);
        let once = mobius_bc(m, t1).finite().unwrap();
        let Some(twice) = mobius_bc(once, t2).finite() else { return Ok(()) };
        let Some(direct) = mobius_bc(m, t1 + t2).finite() else { return Ok(()) };
        prop_assert!((twice - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
        prop_assert!(once.im > 0.0);
    }

    #[test]
    fn positive_rank_one_perturbation_interlaces(
        a in symmetric(6),
        phi in prop::collection::vec(-1.0f64..1.0, 6),
        alpha in 0.01f64..10.0,
    ) {
        let phi = DVector::from_vec(phi);
        prop_assume!(phi.norm() > 0.1);
        let fam = RankOneFamily::normalized(a.clone(), phi).unwrap();
        let mut ea: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        let mut eb: Vec<f64> = fam.perturbed(alpha).symmetric_eigenvalues().iter().copied().collect();
        ea.sort_by(f64::total_cmp);
        eb.sort_by(f64::total_cmp);
        let tol = 1e-10;
        for k in 0..6 {
            prop_assert!(ea[k] <= eb[k] + tol);
            if k + 1 < 6 {
                prop_assert!(eb[k] <= ea[k + 1] + tol);
            }
        }
        // Interlacing is exactly 0 <= xi <= 1 for the counting shift.
        let xi = counting_shift(&ea, &eb);
        prop_assert!(xi.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((xi.l1_norm() - alpha).abs() < 1e-8 * (1.0 + alpha));
    }

    #[test]
    fn interlacing_data_give_admissible_xi(gaps in prop::collection::vec((0.01f64..3.0, 0.0f64..1.0), 1..30)) {
        let mut e = vec![0.0];
        let mut mu = Vec::new();
        for (g, t) in &gaps {
            let last = *e.last().unwrap();
            mu.push(last + t * g);
            e.push(last + g);
        }
        let xi = xi_from_eigen_data(&SpectralData::Discrete { eigenvalues: e.clone(), dirichlet: mu }, 0.0).unwrap();
        prop_assert!(xi.is_admissible());
        prop_assert_eq!(xi.eval(-1e-12), 0.0);
        for w in e.windows(2) {
            let v = xi.eval(0.5 * (w[0] + w[1]));
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
