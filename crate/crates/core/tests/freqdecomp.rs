use sphavg::averages::SlicedAverager;
use sphavg::freqdecomp::{build_filterbank, Band, BPattern, Decomposition, Flag, Spectrum};
use sphavg::{sample_grid, TestFunction};

fn gauss(a: f64, c: [f64; 2]) -> TestFunction {
    TestFunction::gaussian(a, c.to_vec()).unwrap()
}

#[test]
fn reconstruction_from_pieces() {
    let (l, n, j) = (4.0, 512, 4);
    let bank = build_filterbank(2, j, l, n).unwrap();
    let fs = [gauss(20.0, [0.6, 0.0]), gauss(20.0, [0.0, 0.8])];
    let grids: Vec<_> = fs.iter().map(|f| sample_grid(f, l, n).unwrap()).collect();
    let dec = Decomposition::new(&bank, &grids).unwrap();
    let avg = SlicedAverager::new(2, 48, 128).unwrap();
    let xs = [0.0, 0.0, 0.1, -0.05, -0.2, 0.15];
    let rec = dec.reconstruction(1.0, &xs, &avg).unwrap();
    let exact = avg.eval_many(&[&fs[0], &fs[1]], 1.0, &xs).unwrap();
    for (r, e) in rec.iter().zip(&exact) {
        assert!(r.relative_error() < 1e-3, "{r:?}");
        let sum = r.b_pieces + r.localized;
        assert!((sum - e).abs() < 1e-3 * e.abs(), "{sum} vs {e}");
        assert!(*e > 1e-3);
    }
}

#[test]
fn high_level_piece_of_gaussians_is_negligible() {
    let (l, n) = (2.0, 2048);
    let bank = build_filterbank(2, 7, l, n).unwrap();
    let fs = [gauss(20.0, [0.6, 0.0]), gauss(20.0, [0.0, 0.8])];
    let grids: Vec<_> = fs.iter().map(|f| sample_grid(f, l, n).unwrap()).collect();
    let dec = Decomposition::new(&bank, &grids).unwrap();
    let avg = SlicedAverager::with_defaults(2).unwrap();
    let x = [0.0, 0.0];
    let piece = dec.localized_average(&[8, 8], 1.0, &x, &avg).unwrap()[0];
    let whole = avg.eval(&[&fs[0], &fs[1]], 1.0, &x).unwrap();
    // spectral tail: the level-8 band of each input carries almost nothing
    for g in &grids {
        let s = Spectrum::of(g, bank.plans());
        let band = s.apply_radial(|r| Band::Level(8).multiplier(1.0, r));
        assert!(band.l2_norm_squared() < 1e-20 * s.l2_norm_squared());
    }
    assert!(piece.abs() <= 1e-3 * whole.abs(), "{piece} vs {whole}");
}

#[test]
fn localized_pieces_are_scale_invariant() {
    let (l, n) = (4.0, 256);
    let fs = [gauss(4.0, [0.3, 0.0]), gauss(4.0, [0.0, 0.4])];
    let dilated: Vec<_> = fs.iter().map(|f| f.dilate(0.5).unwrap()).collect();
    let bank = build_filterbank(2, 2, l, n).unwrap();
    let wide = build_filterbank(2, 2, 2.0 * l, n).unwrap();
    let grids: Vec<_> = fs.iter().map(|f| sample_grid(f, l, n).unwrap()).collect();
    let wide_grids: Vec<_> = dilated.iter().map(|f| sample_grid(f, 2.0 * l, n).unwrap()).collect();
    let dec = Decomposition::new(&bank, &grids).unwrap();
    let dec_wide = Decomposition::new(&wide, &wide_grids).unwrap();
    let avg = SlicedAverager::with_defaults(2).unwrap();
    for levels in [[1u32, 1], [1, 2], [2, 2]] {
        for x in [[0.0, 0.0], [0.15, -0.1]] {
            let a = dec.localized_average(&levels, 0.5, &x, &avg).unwrap()[0];
            let b = dec_wide
                .localized_average(&levels, 1.0, &[2.0 * x[0], 2.0 * x[1]], &avg)
                .unwrap()[0];
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-6), "{levels:?}: {a} vs {b}");
        }
    }
}

#[test]
fn piece_arguments_are_validated() {
    let bank = build_filterbank(2, 1, 4.0, 64).unwrap();
    let g = sample_grid(&gauss(1.0, [0.0, 0.0]), 4.0, 64).unwrap();
    let dec = Decomposition::new(&bank, &[g.clone(), g]).unwrap();
    let avg = SlicedAverager::with_defaults(2).unwrap();
    assert!(dec.localized_average(&[0, 1], 1.0, &[0.0, 0.0], &avg).is_err());
    assert!(dec.localized_average(&[1], 1.0, &[0.0, 0.0], &avg).is_err());
    let p = BPattern::new(vec![Flag::Low]).unwrap();
    assert!(dec.b_piece_average(&p, 1.0, &[0.0, 0.0], &avg).is_err());
    assert_eq!(BPattern::with_low(2).len(), 3);
    assert!(BPattern::with_low(3).iter().all(|p| !p.is_all_high()));
    let other = sample_grid(&gauss(1.0, [0.0, 0.0]), 2.0, 64).unwrap();
    assert!(Decomposition::new(&bank, &[other]).is_err());
}

#[test]
fn low_high_pieces_are_dominated_by_maximal_functions() {
    use sphavg::analysis::random_bump_tuples;
    use sphavg::averages::DyadicScaleSet;
    use sphavg::freqdecomp::b_piece_domination;
    use sphavg::spherequad::surface_area;
    use sphavg::{GridFunction, Seed};

    let (l, n) = (16.0, 512);
    let bank = build_filterbank(2, 1, l, n).unwrap();
    let avg = SlicedAverager::new(2, 16, 96).unwrap();
    let pattern = BPattern::new(vec![Flag::Low, Flag::High]).unwrap();
    let mut probes = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            probes.extend([-1.5 + 0.75 * i as f64, -1.5 + 0.75 * j as f64]);
        }
    }
    let mut worst: f64 = 0.0;
    for tuple in random_bump_tuples(20, 2, 2, Seed(8)) {
        let grids: Vec<_> = tuple.entries().iter().map(|f| sample_grid(f, l, n).unwrap()).collect();
        let dec = Decomposition::new(&bank, &grids).unwrap();
        let r = b_piece_domination(&dec, &grids, &pattern, &probes, DyadicScaleSet::new(4), &avg).unwrap();
        assert!(r.max_ratio.is_finite());
        worst = worst.max(r.max_ratio);
    }
    println!("max ratio {worst}");
    assert!(worst <= 10.0 * surface_area(4).unwrap(), "{worst}");

    // a zero factor kills the numerator
    let f = sample_grid(&gauss(2.0, [0.0, 0.0]), l, n).unwrap();
    let zero = GridFunction::filled(f.shape(), 0.0);
    let grids = vec![f, zero];
    let dec = Decomposition::new(&bank, &grids).unwrap();
    let r = b_piece_domination(&dec, &grids, &pattern, &probes[..4], DyadicScaleSet::new(1), &avg).unwrap();
    assert!(r.numerators.iter().all(|&v| v == 0.0));
}
