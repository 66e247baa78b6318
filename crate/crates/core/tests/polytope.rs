mod common;

use common::{fixture, STEMS};
use hitchin::invariants::{full_coordinates, lengths};
use hitchin::lamination::Side;
use hitchin::polytope::{
    affine_dimension, check_membership, global_relation_residual, sample_interior, side_length_product, RowKind,
};
use hitchin::scalar::Scalar;

#[test]
fn dimension_matches_hitchin_count() {
    for stem in STEMS {
        let f = fixture(stem);
        for (n, expected) in [(2, 6), (3, 16), (4, 30)] {
            let d = affine_dimension(&f.lam, n);
            assert_eq!(d.dimension, expected, "{stem} n={n}");
            assert_eq!(d.dimension, 2 * (n * n - 1));
        }
    }
    let pants = affine_dimension(&fixture("pants").lam, 3);
    assert_eq!((pants.free, pants.rank), (22, 6));
}

#[test]
fn eigenvalue_ratios_equal_side_products_on_fuchsian_lifts() {
    for stem in STEMS {
        let f = fixture(stem);
        for n in 2..=4 {
            let rep = f.fuchsian.symmetric_power(n).unwrap();
            let coords = full_coordinates(&rep, &f.lam, &f.atlas, 256).unwrap();
            for c in f.lam.closed_leaves() {
                let ell = lengths(&rep, &f.atlas.closed_leaf_words[&c.id], 256).unwrap();
                for a in 1..n {
                    for side in [Side::Left, Side::Right] {
                        let p = side_length_product(&coords, &f.lam, &c.id, side, a).unwrap();
                        assert_eq!(p, ell[a - 1], "{stem} n={n} {} a={a} {side}", c.id);
                    }
                }
            }
        }
    }
}

#[test]
fn fuchsian_pants_lengths_are_four() {
    let f = fixture("pants");
    let rep = f.fuchsian.symmetric_power(3).unwrap();
    for w in f.atlas.closed_leaf_words.values() {
        assert_eq!(lengths(&rep, w, 256).unwrap(), vec![Scalar::int(4), Scalar::int(4)]);
    }
}

#[test]
fn samples_are_members_with_trivial_residual() {
    for stem in STEMS {
        let f = fixture(stem);
        for n in 3..=5 {
            for seed in 0..4 {
                let c = sample_interior(&f.lam, n, seed).unwrap();
                assert!(c.is_exact());
                assert!(check_membership(&c, &f.lam, 256).pass, "{stem} n={n} seed={seed}");
                assert!(global_relation_residual(&c, &f.lam).unwrap().iter().all(Scalar::is_one));
            }
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let f = fixture("pants");
    assert_eq!(sample_interior(&f.lam, 3, 1).unwrap(), sample_interior(&f.lam, 3, 1).unwrap());
    assert_ne!(sample_interior(&f.lam, 3, 1).unwrap(), sample_interior(&f.lam, 3, 2).unwrap());
}

#[test]
fn perturbed_shear_breaks_an_equality() {
    let f = fixture("pants");
    let mut c = sample_interior(&f.lam, 3, 5).unwrap();
    let g = c.shears.get_mut("g0").unwrap();
    g[0] = &g[0] * &Scalar::int(2);
    let report = check_membership(&c, &f.lam, 256);
    assert!(!report.pass);
    assert!(report.violations.iter().any(|v| v.kind == RowKind::Equality));
}

#[test]
fn short_closed_leaf_breaks_the_inequality() {
    // Scale every shear by its inverse: all side products invert, so the
    // equalities survive and every length drops below one.
    let f = fixture("single-leaf");
    let mut c = f.shears.clone();
    for v in c.shears.values_mut() {
        for x in v.iter_mut() {
            *x = x.recip();
        }
    }
    let report = check_membership(&c, &f.lam, 256);
    assert!(!report.pass);
    assert!(report.violations.iter().all(|v| v.kind == RowKind::Inequality));
}
