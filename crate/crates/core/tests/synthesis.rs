mod common;

use common::{fixture, STEMS};
use hitchin::coords::CoordinateVector;
use hitchin::flag::double_ratio;
use hitchin::invariants::full_coordinates;
use hitchin::lamination::Side;
use hitchin::polytope::{sample_interior, RowKind};
use hitchin::representation::{Representation, Word};
use hitchin::synthesis::{
    glue_across_closed_leaf, reconstruct, reconstruct_with_frame, ClosedLeafSide, Decorator, SynthesisError,
};
use hitchin::{Matrix, Scalar};
use rug::Float;

fn strip_lengths(mut c: CoordinateVector) -> CoordinateVector {
    c.lengths.clear();
    c
}

fn projectively_equal(a: &Matrix, b: &Matrix) -> bool {
    a.mul(&b.inverse().unwrap()).is_scalar_multiple_of_identity(None)
}

#[test]
fn every_created_tuple_is_positive() {
    for stem in STEMS {
        let f = fixture(stem);
        for n in 2..=4 {
            let coords = sample_interior(&f.lam, n, 11).unwrap();
            let deco = Decorator::new(&f.lam, &coords).unwrap().verifying(true);
            let t0 = f.lam.triangle_index(&f.atlas.base_triangle).unwrap();
            let start = deco.fresh(t0).unwrap();
            for (g, path) in &f.atlas.generator_paths {
                let end = deco.follow(&start, path).unwrap_or_else(|e| panic!("{stem} n={n} {g}: {e}"));
                assert_eq!(end.triangle, t0);
            }
            for t in 0..f.lam.triangles().len() {
                let lift = deco.fresh(t).unwrap();
                for v in 0..3 {
                    deco.fan_monodromy(&lift, v).unwrap();
                }
            }
        }
    }
}

#[test]
fn changing_the_base_frame_conjugates_the_output() {
    let f = fixture("pants");
    let coords = sample_interior(&f.lam, 3, 5).unwrap();
    let t0 = f.lam.triangle_index(&f.atlas.base_triangle).unwrap();
    let base = Decorator::new(&f.lam, &coords).unwrap().fresh(t0).unwrap();
    let a = Matrix::from_i64(&[&[2, 1, 0], &[0, 1, -1], &[1, 0, 3]]);
    let moved = base.flags.clone().map(|fl| fl.transform(&a));
    let plain = reconstruct(&coords, &f.lam, &f.atlas, 256).unwrap();
    let shifted = reconstruct_with_frame(&coords, &f.lam, &f.atlas, Some(moved), 256).unwrap();
    let expected = plain.conjugate(&a).unwrap();
    for g in &f.atlas.generators {
        assert!(projectively_equal(shifted.matrix(g).unwrap(), expected.matrix(g).unwrap()), "{g}");
    }
    let back = full_coordinates(&shifted, &f.lam, &f.atlas, 256).unwrap();
    assert_eq!(strip_lengths(back), coords);
}

#[test]
fn a_base_frame_with_wrong_ratios_is_rejected() {
    let f = fixture("pants");
    let coords = sample_interior(&f.lam, 3, 5).unwrap();
    let n = 3;
    let bad = [
        hitchin::flag::Flag::standard(n),
        hitchin::flag::Flag::opposite(n),
        hitchin::flag::Flag::osculating(n, &Scalar::one()),
    ];
    let err = reconstruct_with_frame(&coords, &f.lam, &f.atlas, Some(bad), 256).unwrap_err();
    assert!(matches!(err, SynthesisError::RealizationFailed(_)), "{err}");
}

#[test]
fn fuchsian_coordinates_reconstruct_a_conjugate() {
    for stem in STEMS {
        let f = fixture(stem);
        for n in 2..=3 {
            let rep = f.fuchsian.symmetric_power(n).unwrap();
            let coords = strip_lengths(full_coordinates(&rep, &f.lam, &f.atlas, 256).unwrap());
            let rebuilt = reconstruct(&coords, &f.lam, &f.atlas, 256).unwrap();
            let back = full_coordinates(&rebuilt, &f.lam, &f.atlas, 256).unwrap();
            assert_eq!(strip_lengths(back), coords, "{stem} n={n}");
            // Conjugate representations have equal normalized traces.
            for g in &f.atlas.generators {
                let (m, r) = (rep.matrix(g).unwrap(), rebuilt.matrix(g).unwrap());
                let lhs = m.trace().powi(n as i32) / m.det();
                let rhs = r.trace().powi(n as i32) / r.det();
                assert_eq!(lhs, rhs, "{stem} n={n} {g}");
            }
        }
    }
}

#[test]
fn float_coordinates_round_trip_within_tolerance() {
    let f = fixture("single-leaf");
    let exact = sample_interior(&f.lam, 3, 2).unwrap();
    let coords = exact.to_float(256);
    let rep = reconstruct(&coords, &f.lam, &f.atlas, 256).unwrap();
    assert!(!rep.is_exact());
    let back = strip_lengths(full_coordinates(&rep, &f.lam, &f.atlas, 256).unwrap());
    let dev = back.max_deviation(&exact).unwrap();
    assert!(dev.is_negligible(&Float::with_val(256, Float::i_exp(1, -128))), "deviation {dev}");
}

#[test]
fn coordinates_off_the_polytope_are_rejected() {
    let f = fixture("pants");
    let mut coords = sample_interior(&f.lam, 3, 1).unwrap();
    let leaf = f.lam.infinite_leaves()[0].id.clone();
    coords.shears.get_mut(&leaf).unwrap()[0] = Scalar::ratio(12345, 7);
    match reconstruct(&coords, &f.lam, &f.atlas, 256).unwrap_err() {
        SynthesisError::MembershipFailed(report) => {
            assert!(report.violations.iter().any(|v| v.kind == RowKind::Equality));
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn swapped_generator_paths_break_the_relator() {
    let f = fixture("pants");
    let coords = sample_interior(&f.lam, 2, 0).unwrap();
    let mut atlas = f.atlas.clone();
    let p1 = atlas.generator_paths["x1"].clone();
    let p2 = atlas.generator_paths["x2"].clone();
    atlas.generator_paths.insert("x1".into(), p2);
    atlas.generator_paths.insert("x2".into(), p1);
    let err = reconstruct(&coords, &f.lam, &atlas, 256).unwrap_err();
    assert!(matches!(err, SynthesisError::RelatorViolation(_)), "{err}");
}

#[test]
fn truncated_paths_do_not_close_up() {
    for stem in STEMS {
        let f = fixture(stem);
        let coords = sample_interior(&f.lam, 2, 0).unwrap();
        let mut atlas = f.atlas.clone();
        let path = atlas.generator_paths.get_mut("x1").unwrap();
        path.pop();
        let err = reconstruct(&coords, &f.lam, &atlas, 256).unwrap_err();
        assert!(matches!(err, SynthesisError::BadPath(_)), "{stem}: {err}");
    }
}

#[test]
fn mismatched_lengths_are_rejected_when_gluing() {
    let sides = |d: [i64; 3]| ClosedLeafSide {
        monodromy: Matrix::diag(&d.map(Scalar::int)),
        spike: hitchin::flag::Flag::standard(3),
        far: hitchin::flag::Flag::osculating(3, &Scalar::one()),
    };
    let left = sides([8, 4, 1]);
    let right = sides([9, 3, 1]);
    let lengths = [Scalar::int(2), Scalar::int(4)];
    let sigma = [Scalar::one(), Scalar::one()];
    let err = glue_across_closed_leaf(&left, &right, &lengths, &sigma, Side::Left, "c").unwrap_err();
    match err {
        SynthesisError::EigenvalueMismatch { closed_leaf, .. } => assert_eq!(closed_leaf, "c"),
        e => panic!("unexpected {e}"),
    }
    // Matching spectra glue, and the arc double ratios come out as prescribed.
    let right = sides([16, 8, 2]);
    let sigma = [Scalar::ratio(3, 2), Scalar::int(5)];
    let a = glue_across_closed_leaf(&left, &right, &lengths, &sigma, Side::Left, "c").unwrap();
    let (x, y) = (hitchin::flag::Flag::standard(3), hitchin::flag::Flag::opposite(3));
    let z = left.far.clone();
    let zp = right.far.transform(&a);
    for k in 1..3 {
        assert_eq!(double_ratio(&x, &y, &z, &zp, k).unwrap(), sigma[k - 1], "D_{k}");
    }
}

#[test]
fn single_leaf_arc_gluing_in_rank_two_is_frozen() {
    let f = fixture("single-leaf");
    let deco = Decorator::new(&f.lam, &f.shears).unwrap().verifying(true);
    let tb = f.lam.triangle_index("Tb").unwrap();
    let start = deco.fresh(tb).unwrap();
    let rightward = deco.cross_arc(&start, 0, Side::Right).unwrap();
    let leftward = deco.cross_arc(&start, 0, Side::Left).unwrap();
    let a = deco.frame_between(&start, &rightward).unwrap();
    let b = deco.frame_between(&start, &leftward).unwrap();
    let frozen =
        Matrix::from_rows(vec![vec![Scalar::int(5), Scalar::int(-27)], vec![Scalar::int(6), Scalar::int(-30)]])
            .unwrap();
    assert_eq!(a, frozen);
    assert!(a.mul(&b).is_scalar_multiple_of_identity(None));
    // The arc is a generator path on its own, so the gluing is that generator.
    let rep: Representation = reconstruct(&f.shears, &f.lam, &f.atlas, 256).unwrap();
    let arc_only: Vec<_> =
        f.atlas.generator_paths.iter().filter(|(_, p)| p.len() == 1).map(|(g, _)| g.clone()).collect();
    assert_eq!(arc_only.len(), 1);
    assert!(projectively_equal(&rep.eval_word(&Word::letter(&arc_only[0], false)).unwrap(), &frozen));
}
