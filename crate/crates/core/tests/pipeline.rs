use birat_core::automap::{
    check_infinity_collapse, degree_sequence, elementary_builder, is_regular, is_submultiplicative,
    quadratic_henon, transposed_henon_builder, AffineAutomorphism, DEFAULT_TERM_BUDGET,
};
use birat_core::blowup::{canonical_resolution, Family, LiftCache, ResolutionConfig, Tower};
use birat_core::lattice::IntersectionLattice;
use birat_core::picard::{index_report, IndexConfig, Verdict};
use birat_core::scalar::{int, rat};
use birat_core::Error;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn table() -> Vec<(AffineAutomorphism, u32, birat_core::Scalar)> {
    vec![
        (quadratic_henon(&int(1), &int(1)).unwrap(), 2, rat(5, 2)),
        (transposed_henon_builder(3, &int(1)).unwrap(), 3, rat(10, 3)),
        (transposed_henon_builder(4, &int(1)).unwrap(), 4, rat(17, 4)),
    ]
}

#[test]
fn table_indices() {
    for (phi, d, eff) in table() {
        let report = index_report(&phi, &IndexConfig::default()).unwrap();
        assert_eq!(report.degree, d);
        assert_eq!(report.delta_estimate.exact, Some(int(i64::from(d))));
        assert_eq!(report.eff_exact, Some(eff));
        assert_eq!(report.ample_bound.bound, int(0));
        assert_eq!(report.cone_verdict, Verdict::NotPolyhedral);
        assert_eq!(report.eff_upper_closed_form, report.eff_upper);
        assert_eq!(report.delta_comparison.matches, Some(true));
        assert!(report.all_identities_pass());
    }
}

#[test]
fn table_indices_other_parameters() {
    let phi = quadratic_henon(&rat(7, 3), &int(-2)).unwrap();
    let report = index_report(&phi, &IndexConfig::default()).unwrap();
    assert_eq!(report.eff_exact, Some(rat(5, 2)));
    let phi = transposed_henon_builder(3, &rat(7, 3)).unwrap();
    let report = index_report(&phi, &IndexConfig::default()).unwrap();
    assert_eq!(report.eff_exact, Some(rat(10, 3)));
}

#[test]
fn degree_growth() {
    for (phi, d, _) in table() {
        let degrees = degree_sequence(&phi, 5, DEFAULT_TERM_BUDGET).unwrap();
        let expected: Vec<u32> = (1..=5).map(|k| d.pow(k)).collect();
        assert_eq!(degrees, expected);
        assert!(is_submultiplicative(&degrees));
    }
    let elementary = elementary_builder(2, &int(1)).unwrap();
    let degrees = degree_sequence(&elementary, 5, DEFAULT_TERM_BUDGET).unwrap();
    assert_eq!(degrees, vec![2; 5]);
    assert!(is_submultiplicative(&degrees));
}

#[test]
fn regularity() {
    for (phi, _, _) in table() {
        assert!(is_regular(&phi).unwrap());
        let res = canonical_resolution(&phi, &ResolutionConfig::default()).unwrap();
        assert_eq!(res.i0, 0);
    }
    let elementary = elementary_builder(2, &int(1)).unwrap();
    assert!(!is_regular(&elementary).unwrap());
    let res = canonical_resolution(&elementary, &ResolutionConfig::default()).unwrap();
    assert!(res.i0 >= 1);
    assert!(!res.regular);
}

#[test]
fn truncation_leaves_indeterminacy() {
    let mut maps: Vec<AffineAutomorphism> = table().into_iter().map(|t| t.0).collect();
    maps.push(elementary_builder(2, &int(1)).unwrap());
    for phi in maps {
        let res = canonical_resolution(&phi, &ResolutionConfig::default()).unwrap();
        assert!(res.is_resolved().unwrap());
        for family in [Family::E, Family::F] {
            let cut = res.truncated(family).unwrap();
            let fwd = LiftCache::for_lift(&res.forward_lift)
                .unresolved_base_points(&cut)
                .unwrap();
            let inv = LiftCache::for_lift(&res.inverse_lift)
                .unresolved_base_points(&cut)
                .unwrap();
            assert!(!(fwd.is_empty() && inv.is_empty()), "{phi} {family:?}");
        }
    }
}

#[test]
fn line_at_infinity_collapses() {
    let mut rng = StdRng::seed_from_u64(7);
    for (phi, _, _) in table() {
        assert_eq!(check_infinity_collapse(&phi, 20, &mut rng).unwrap(), 20);
        assert_eq!(
            check_infinity_collapse(&phi.inverted(), 20, &mut rng).unwrap(),
            20
        );
    }
}

#[test]
fn single_blow_up_fixture() {
    let mut tower = Tower::new();
    let p = tower.affine_point(int(0), int(0));
    tower.blow_up_at(&p).unwrap();
    let lattice = IntersectionLattice::for_tower(&tower);
    let negatives = lattice.negative_curves();
    assert!(!negatives.is_empty());
    assert!(negatives.iter().all(|c| c.self_intersection == int(-1)));
    let k = lattice.canonical_class();
    assert_eq!(lattice.intersect(&k, &k).unwrap(), int(8));
}

#[test]
fn low_degree_is_rejected() {
    let phi = AffineAutomorphism::parse("x; y; x; y").unwrap();
    assert!(matches!(
        index_report(&phi, &IndexConfig::default()),
        Err(Error::DegreeTooLow { degree: 1 })
    ));
}
