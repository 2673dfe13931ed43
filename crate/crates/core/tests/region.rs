use proptest::prelude::*;

use sphavg::region::{
    classify, classify_lattice, emit_figure, Classification, FigureFormat, OperatorKind,
    RegionSpec,
};

const OPS: [OperatorKind; 3] = [
    OperatorKind::Average,
    OperatorKind::Lacunary,
    OperatorKind::FullMaximal,
];

fn in_dirac_set(p: &[f64]) -> bool {
    p.iter().all(|&x| x == 0.0 || x == 1.0)
}

#[test]
fn strong_fraction_matches_cut_corner_volume() {
    let spec = RegionSpec::new(OperatorKind::FullMaximal, 3, 2).unwrap();
    let classes = classify_lattice(&spec, 64);
    let strong = classes
        .iter()
        .filter(|c| **c == Classification::Strong)
        .count() as f64;
    let fraction = strong / classes.len() as f64;
    // simplex {sum >= 5/2} inside the cube has legs 1/2
    let volume = 1.0 - 0.5f64.powi(3) / 6.0;
    assert!((fraction - volume).abs() < 0.02 * volume, "{fraction} vs {volume}");
}

#[test]
fn rays_toward_origin_stay_strong() {
    for (n, d) in [(2, 2), (2, 3), (3, 2)] {
        let spec = RegionSpec::new(OperatorKind::FullMaximal, n, d).unwrap();
        let m = 16usize;
        let side = m + 1;
        for idx in 0..side.pow(n as u32) {
            let mut p = vec![0.0; n];
            let mut r = idx;
            for c in p.iter_mut() {
                *c = (r % side) as f64 / m as f64;
                r /= side;
            }
            if in_dirac_set(&p) || classify(&p, &spec).unwrap() != Classification::Strong {
                continue;
            }
            for s in [0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
                let q: Vec<f64> = p.iter().map(|x| s * x).collect();
                assert_eq!(classify(&q, &spec).unwrap(), Classification::Strong, "{q:?}");
            }
        }
    }
}

#[test]
fn csv_tables() {
    let mut buf = Vec::new();
    let spec = RegionSpec::new(OperatorKind::Lacunary, 2, 2).unwrap();
    emit_figure(&spec, FigureFormat::Csv, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("coord_1,coord_2,classification"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 65 * 65);
    assert!(rows.contains(&"1,1,fails"));
    assert!(rows.contains(&"0.5,0.5,strong"));
    assert!(rows.contains(&"1,0,fails"));

    let mut buf = Vec::new();
    let spec = RegionSpec::new(OperatorKind::Average, 2, 3).unwrap();
    emit_figure(&spec, FigureFormat::Csv, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",strong")));
}

fn point_and_perm(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    // mix of generic coordinates and exact lattice values to hit faces
    let coord = prop_oneof![
        0.0..=1.0f64,
        (0u32..=8).prop_map(|k| k as f64 / 8.0),
        (0u32..=3).prop_map(|k| k as f64 / 3.0),
    ];
    (
        prop::collection::vec(coord, n),
        Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
    )
}

proptest! {
    #[test]
    fn permutation_invariant(
        (p, perm) in (2usize..=4).prop_flat_map(point_and_perm),
        d in 2usize..=4,
        op in 0usize..3,
    ) {
        let spec = RegionSpec::new(OPS[op], p.len(), d).unwrap();
        let q: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        prop_assert_eq!(classify(&p, &spec).unwrap(), classify(&q, &spec).unwrap());
    }

    #[test]
    fn average_strong_everywhere(p in prop::collection::vec(0.0..=1.0f64, 2..6), d in 2usize..6) {
        let spec = RegionSpec::new(OperatorKind::Average, p.len(), d).unwrap();
        prop_assert_eq!(classify(&p, &spec).unwrap(), Classification::Strong);
    }

    #[test]
    fn interior_of_cube_is_strong_for_lacunary(p in prop::collection::vec(0.0..0.999f64, 2..6), d in 2usize..6) {
        let spec = RegionSpec::new(OperatorKind::Lacunary, p.len(), d).unwrap();
        prop_assert_eq!(classify(&p, &spec).unwrap(), Classification::Strong);
    }
}

#[test]
fn strong_points_have_bounded_probe_ratios() {
    use sphavg::analysis::{bound_probe, FamilySpec, Operator, ProbeOptions};
    use sphavg::{ExponentTuple, FunctionTuple, TestFunction};

    let spec = RegionSpec::new(OperatorKind::FullMaximal, 2, 2).unwrap();
    let g = TestFunction::gaussian(2.0, vec![0.1, 0.0]).unwrap();
    let h = TestFunction::gaussian(3.0, vec![-0.2, 0.1]).unwrap();
    let family = FamilySpec::Dilates {
        count: 3,
        ratio: 2.0,
        base: FunctionTuple::new(vec![g, h]).unwrap(),
    };
    let op = Operator::FullMaximal { t_min: 0.5, t_max: 2.0, k: 4 };
    let opts = ProbeOptions {
        lambda_order: 16,
        base_order: 48,
        refine_tol: 1e-2,
        ..ProbeOptions::default()
    };
    let mut probed = 0;
    for i in 0..=4 {
        for j in 0..=4 {
            let p = [i as f64 / 4.0, j as f64 / 4.0];
            if classify(&p, &spec).unwrap() != Classification::Strong {
                continue;
            }
            let inputs: Vec<f64> = p.iter().map(|x| 1.0 / x).collect();
            let e = ExponentTuple::from_inputs(inputs).unwrap();
            let res = bound_probe(op, &e, &family, opts).unwrap();
            assert!(res.max_ratio.is_finite() && res.max_ratio < 1e3, "{p:?}: {:?}", res.ratios);
            probed += 1;
        }
    }
    // 17 below the cut (minus the two Dirac corners) plus (3/4, 3/4) on the facet
    assert_eq!(probed, 18);
}
