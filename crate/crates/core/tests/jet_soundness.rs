mod oracle;

use bienergy_core::expr::indexed_vars;
use bienergy_core::{eval_jet, parse, JetSpace};
use oracle::{random_expr, richardson, rng};
use rand::Rng;

#[test]
fn random_expression_jets_match_richardson_differences() {
    let mut r = rng(11);
    let n = 3;
    let vars = indexed_vars("x", n);
    let space = JetSpace::get(n, 4);
    let mut worst = (0.0f64, String::new());
    for _ in 0..100 {
        let src = random_expr(&mut r, n, 4);
        let e = parse(&src, &vars).unwrap();
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-0.5..0.5)).collect();
        let jet = eval_jet(&e, &x, 4).unwrap();
        let f = |p: &[f64]| e.eval(p).unwrap();
        for k in 0..space.len(4) {
            let mi = space.multi_index(k).to_vec();
            let fd = richardson(&f, &x, &mi, 0.05);
            let ad = jet.coeff(&mi).unwrap();
            let err = (fd - ad).abs() / ad.abs().max(1.0);
            if err > worst.0 {
                worst = (err, format!("{src} at {x:?}, index {mi:?}: ad {ad}, fd {fd}"));
            }
        }
    }
    assert!(worst.0 <= 1e-5, "worst relative error {:.3e}: {}", worst.0, worst.1);
}

#[test]
fn known_derivatives_of_a_product() {
    let vars = indexed_vars("x", 2);
    let e = parse("x1^2*sin(x2)", &vars).unwrap();
    let j = eval_jet(&e, &[1.5, 0.3], 4).unwrap();
    let (x, y) = (1.5f64, 0.3f64);
    let cases: [([u8; 2], f64); 6] = [
        ([0, 0], x * x * y.sin()),
        ([1, 0], 2.0 * x * y.sin()),
        ([0, 1], x * x * y.cos()),
        ([1, 1], 2.0 * x * y.cos()),
        ([2, 2], -2.0 * y.sin()),
        ([0, 4], x * x * y.sin()),
    ];
    for (mi, want) in cases {
        let got = j.coeff(&mi).unwrap();
        assert!((got - want).abs() < 1e-13, "{mi:?}: {got} vs {want}");
    }
    assert_eq!(j.coeff(&[3, 2]), None);
}

#[test]
fn order_above_the_cap_is_refused() {
    let vars = indexed_vars("x", 1);
    let e = parse("x1", &vars).unwrap();
    assert!(eval_jet(&e, &[0.0], 9).is_err());
}
