use bienergy_core::finsler::{invariant_residuals, sample_points, xy_vars};
use bienergy_core::identity::{IdentityPoint, PerturbationSetup};
use bienergy_core::map::weitzenbock_residual;
use bienergy_core::{parse, Chart, FinslerStructure, Jet, MapPoint, RiemannStructure, SmoothMap};

fn randers() -> FinslerStructure {
    FinslerStructure::randers(
        Chart::torus(&[1.0, 1.0]),
        &[["1 + 0.2*sin(2*pi*x1)", "0.1"], ["0.1", "1.3"]],
        &["0.2*cos(2*pi*x2)", "0.1*sin(2*pi*x1)"],
    )
    .unwrap()
}

fn perturbed() -> PerturbationSetup {
    PerturbationSetup::new(
        Chart::unit_box(2),
        &[["1 + 0.3*x1^2", "0.1*x2"], ["0.1*x2", "1.2 + 0.2*sin(x1)"]],
        "0.05*(1 + x2)*y1^3*y2/(y1^2 + y2^2) + 0.02*x1*y2^2",
    )
    .unwrap()
}

const GENERIC_MAP: [&str; 2] = [
    "0.6*sin(2*pi*x1 + 0.4) + 0.3*cos(2*pi*x2) + 0.2",
    "0.5*sin(2*pi*(x1+x2)) + 0.2*cos(2*pi*x1) - 0.1",
];

fn sup(v: &[Jet]) -> f64 {
    v.iter().map(|j| j.value().abs()).fold(0.0, f64::max)
}

#[test]
fn randers_structural_identities_hold() {
    let fs = randers();
    let probe = parse("sin(x1 + 2*x2)*y1*y2 + cos(2*pi*x1)*y1^2", &xy_vars(2)).unwrap();
    for p in sample_points(fs.chart(), 20, 31, 0.0) {
        let r = invariant_residuals(&fs, &p, &probe).unwrap();
        assert!(r.worst() <= 1e-7, "{r:?} at {p:?}");
        assert!(r.homogeneity <= 1e-7 && r.euler <= 1e-7 && r.delta_f2 <= 1e-7);
        assert!(r.h_metricity <= 1e-7 && r.bracket <= 1e-7);
    }
}

#[test]
fn perturbed_structure_identities_hold() {
    let s = perturbed();
    let probe = parse("x1*x2*y1^2 + sin(x2)*y2^2", &xy_vars(2)).unwrap();
    for p in sample_points(s.finsler().chart(), 20, 32, 0.1) {
        let r = invariant_residuals(s.finsler(), &p, &probe).unwrap();
        assert!(r.worst() <= 1e-7, "{r:?}");
        let ip = IdentityPoint::new(&s, &p, 4).unwrap();
        let spray = ip.domain().spray();
        let split = sup(&ip.spray_split_residual()) / sup(spray).max(1.0);
        assert!(split <= 1e-7, "spray split {split:e}");
        let comm: f64 = ip.commutation_residual().iter().map(|r| sup(r)).fold(0.0, f64::max);
        let scale = ip.domain().f2().value().max(1.0);
        assert!(comm / scale <= 1e-7, "commutation residual {comm:e}");
    }
}

#[test]
fn randers_domain_is_not_landsberg() {
    let fs = randers();
    let probe = parse("y1", &xy_vars(2)).unwrap();
    let worst = sample_points(fs.chart(), 5, 1, 0.0)
        .iter()
        .map(|p| invariant_residuals(&fs, p, &probe).unwrap().torsion_trace)
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "P_i unexpectedly vanishes: {worst:e}");
}

#[test]
fn weitzenbock_identity_randers_to_sphere() {
    let fs = randers();
    let rs = RiemannStructure::sphere(2, 1.5).unwrap();
    let map = SmoothMap::new(2, &GENERIC_MAP).unwrap();
    for p in sample_points(fs.chart(), 20, 41, 0.0) {
        let (res, lhs, rhs) = weitzenbock_residual(&fs, &rs, &map, &p).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        assert!(res.abs() <= 1e-6 * scale, "residual {res:e}, sides {lhs:e} {rhs:e}");
    }
}

#[test]
fn sphere_bitension_matches_space_form_law() {
    let fs = randers();
    let radius = 1.5;
    let rs = RiemannStructure::sphere(2, radius).unwrap();
    assert_eq!(rs.space_form_curvature(), Some(1.0 / (radius * radius)));
    let map = SmoothMap::new(2, &GENERIC_MAP).unwrap();
    for p in sample_points(fs.chart(), 20, 43, 0.0) {
        let mp = MapPoint::new(&fs, &rs, &map, &p, 6).unwrap();
        let general: Vec<f64> = mp.bitension().iter().map(Jet::value).collect();
        let law: Vec<f64> = mp.bitension_space_form(1.0 / (radius * radius)).iter().map(Jet::value).collect();
        let scale = general.iter().chain(&law).fold(1e-12f64, |s, v| s.max(v.abs()));
        let gap = general.iter().zip(&law).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-8 * scale, "{general:?} vs {law:?}");
    }
}

#[test]
fn wrong_curvature_breaks_the_space_form_law() {
    let fs = randers();
    let rs = RiemannStructure::sphere(2, 1.5).unwrap();
    let map = SmoothMap::new(2, &GENERIC_MAP).unwrap();
    let p = &sample_points(fs.chart(), 1, 43, 0.0)[0];
    let mp = MapPoint::new(&fs, &rs, &map, p, 6).unwrap();
    let general: Vec<f64> = mp.bitension().iter().map(Jet::value).collect();
    let wrong: Vec<f64> = mp.bitension_space_form(1.0).iter().map(Jet::value).collect();
    let gap = general.iter().zip(&wrong).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-3, "the space-form check cannot tell curvatures apart");
}

fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(Jet::value).collect()
}

/// `D_ε S = d/dε S(f_ε) + γ̃(V, S)` at `ε = 0` from a five-point stencil.
fn covariant_fd(
    mp: &MapPoint<'_>,
    v: &[Jet],
    at: impl Fn(f64) -> Vec<f64>,
) -> Vec<f64> {
    let gam = mp.codomain_gamma();
    let s0 = at(0.0);
    let h = 1e-3;
    let (a, b, c, d) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
    (0..s0.len())
        .map(|al| {
            let mut r = (8.0 * (a[al] - b[al]) - (c[al] - d[al])) / (12.0 * h);
            for be in 0..s0.len() {
                for ga in 0..s0.len() {
                    r += gam[al][be][ga].value() * v[be].value() * s0[ga];
                }
            }
            r
        })
        .collect()
}

fn curved_codomain() -> RiemannStructure {
    RiemannStructure::custom(&[["1", "0"], ["0", "1 + x1^2"]]).unwrap()
}

const FAMILY: [&str; 2] = ["0.5*x1 + 0.3*sin(x2) + eps1*cos(x1 + x2)", "x2 + 0.2*x1^2 + eps1*x1*x2"];

#[test]
fn tension_derivative_along_a_variation_is_jacobi() {
    let fs = randers();
    let rs = curved_codomain();
    let fam = bienergy_core::VariationFamily::new(2, &FAMILY).unwrap();
    for p in sample_points(fs.chart(), 5, 51, 0.0) {
        let mp = MapPoint::new(&fs, &rs, &fam.base(), &p, 6).unwrap();
        let v = fam.deviation(0, mp.domain()).unwrap();
        let jv = values(&mp.jacobi(&v));
        let fd = covariant_fd(&mp, &v, |e| {
            values(&MapPoint::new(&fs, &rs, &fam.at(e, 0.0), &p, 4).unwrap().tension())
        });
        let scale = jv.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        let gap = jv.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-7 * scale, "JV {jv:?} vs fd {fd:?}");
    }
}

#[test]
fn bitension_derivative_matches_hessian_operator() {
    let fs = randers();
    let rs = curved_codomain();
    let fam = bienergy_core::VariationFamily::new(2, &FAMILY).unwrap();
    for p in sample_points(fs.chart(), 3, 52, 0.0) {
        let mp = MapPoint::new(&fs, &rs, &fam.base(), &p, 6).unwrap();
        let v = fam.deviation(0, mp.domain()).unwrap();
        let derived = values(&mp.bitension_variation(&v));
        let bracket = values(&mp.hessian_operator(&v));
        let fd = covariant_fd(&mp, &v, |e| {
            values(&MapPoint::new(&fs, &rs, &fam.at(e, 0.0), &p, 6).unwrap().bitension())
        });
        let scale = derived.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        for (name, got) in [("derived", &derived), ("bracket", &bracket)] {
            let gap = got.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap <= 1e-6 * scale, "{name} {got:?} vs fd {fd:?}");
        }
    }
}
