use std::f64::consts::PI;

use sphavg::pushforward::{
    density, density_sup, histogram, histogram_agreement, integrate_against_density,
    pushforward_expectation, total_mass, PushforwardSpec,
};
use sphavg::spherequad::surface_area;
use sphavg::Seed;

fn spec(n: usize, d: usize) -> PushforwardSpec {
    PushforwardSpec::new(n, d).unwrap()
}

#[test]
fn masses_match_sphere_areas() {
    for ((n, d), res, exact) in [((2, 2), 256, 2.0 * PI * PI), ((2, 3), 96, PI.powi(3)), ((3, 2), 48, PI.powi(3))] {
        let m = total_mass(spec(n, d), res).unwrap();
        assert!((m - exact).abs() < 1e-2 * exact, "({n},{d}): {m} vs {exact}");
        let polar = integrate_against_density(spec(n, d), |_| 1.0, 16, 16).unwrap();
        assert!((polar - surface_area(n * d).unwrap()).abs() < 1e-10 * exact);
    }
}

#[test]
fn density_integrals_match_sphere_expectations() {
    // E over the sphere of F(y_1 - y_n, ...) equals the integral against ρ
    let cases: [(usize, usize, fn(&[f64]) -> f64); 4] = [
        (2, 2, |z| (-(z[0] * z[0] + z[1] * z[1])).exp()),
        (2, 3, |z| z[0] * z[0] + 0.5 * z[1] * z[2] + 1.0),
        (3, 2, |z| (z[0] + z[2]).cos() * (1.0 + z[1] * z[3])),
        (2, 4, |z| z.iter().map(|v| v * v).sum::<f64>().powi(2)),
    ];
    for (i, (n, d, f)) in cases.into_iter().enumerate() {
        let s = spec(n, d);
        let exact = integrate_against_density(s, f, 48, 48).unwrap();
        let e = pushforward_expectation(s, f, 400_000, Seed(30 + i as u64)).unwrap();
        assert!(
            (e.value - exact).abs() <= 3.0 * e.std_error + 1e-9,
            "({n},{d}): {} ± {} vs {exact}",
            e.value,
            e.std_error
        );
    }
}

#[test]
fn bilinear_planar_density_is_flat() {
    let s = spec(2, 2);
    assert!((density_sup(s) - PI).abs() < 1e-14);
    for z in [[0.0, 0.0], [0.5, -0.7], [1.0, 0.99]] {
        assert!((density(s, &z).unwrap() - PI).abs() < 1e-14);
    }
    assert_eq!(density(s, &[1.0, 1.0]).unwrap(), 0.0);
    let h = histogram(s, 2_000_000, 0.05, 1.5, Seed(12)).unwrap();
    let (hits, total) = histogram_agreement(s, &h, 1.3, 3.0);
    assert!(hits as f64 >= 0.95 * total as f64, "{hits}/{total}");
}
