//! Verification suites behind `check <suite>` and `identity-analysis`.

use bienergy_core::finsler::{invariant_residuals, xy_vars, FinslerDefinition};
use bienergy_core::identity::{identity_tension, linearized_scaling, IdentityPoint, ScalingReport};
use bienergy_core::map::{weitzenbock_residual, ORDER_BITENSION};
use bienergy_core::quadrature::{
    divergence_theorem_check, first_variation_check, laplacian_vanishing_check, random_directions,
    second_variation_check, self_adjointness_check, stability_check, tension_laplacian_check,
};
use bienergy_core::{parse, Expr, Jet, MapPoint, PointState};

use crate::commands::yes_no;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Bound, CheckRecord, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    FirstVariation,
    SecondVariation,
    SelfAdjoint,
    Weitzenbock,
    Divergence,
    Invariants,
    Identity,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::FirstVariation => "first-variation",
            Suite::SecondVariation => "second-variation",
            Suite::SelfAdjoint => "self-adjoint",
            Suite::Weitzenbock => "weitzenbock",
            Suite::Divergence => "divergence",
            Suite::Invariants => "invariants",
            Suite::Identity => "identity",
        }
    }
}

pub fn run(suite: Suite, cfg: &RunConfig, point: Option<&PointState>, report: &mut Report) -> Result<(), CliError> {
    match suite {
        Suite::FirstVariation => first_variation(cfg, report),
        Suite::SecondVariation => second_variation(cfg, report),
        Suite::SelfAdjoint => self_adjoint(cfg, report),
        Suite::Weitzenbock => weitzenbock(cfg, point, report),
        Suite::Divergence => divergence(cfg, report),
        Suite::Invariants => invariants(cfg, point, report),
        Suite::Identity => identity(cfg, point, report),
    }
}

fn first_variation(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let rs = cfg.codomain()?;
    let fam = cfg.family()?;
    let tol = &cfg.tolerance;
    let r = first_variation_check(&fs, &rs, &fam, &cfg.quadrature, tol.fd_step, tol.relative)?;
    report.value("fd", r.fd);
    report.value("fd_central", r.fd_central);
    report.value("analytic", r.analytic);
    report.value("analytic.stderr", r.analytic_stderr);
    report.check(CheckRecord::assess("|fd - analytic|", r.gap, Bound::Le(r.bound), Some(r.gap_stderr)));
    Ok(())
}

fn second_variation(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let rs = cfg.codomain()?;
    let fam = cfg.family()?;
    let tol = &cfg.tolerance;
    let spec = &cfg.quadrature;
    let r = second_variation_check(&fs, &rs, &fam, spec, tol.fd_step, tol.relative, tol.biharmonic)?;
    report.value("base sup |tau2|", r.base_bitension);
    report.value("fd", r.fd);
    report.value("H(V1,V2)", r.h12);
    report.value("H(V2,V1)", r.h21);
    report.value("H(V1,V2).stderr", r.h12_stderr);
    report.check(CheckRecord::assess("|fd - H(V1,V2)|", r.gap, Bound::Le(r.bound), Some(r.gap_stderr)));
    report.check(CheckRecord::assess(
        "|H(V1,V2) - H(V2,V1)|",
        r.symmetry_gap,
        Bound::Le(r.bound),
        Some(r.symmetry_stderr),
    ));
    let count = cfg.variation.as_ref().map_or(0, |v| v.stability_directions);
    if count > 0 {
        let dirs = random_directions(&cfg.chart(), rs.dim(), count, spec.seed);
        let vars = bienergy_core::expr::indexed_vars("x", cfg.dimension);
        let exprs: Vec<Vec<Expr>> = dirs
            .iter()
            .map(|d| d.iter().map(|s| parse(s, &vars)).collect::<bienergy_core::Result<_>>())
            .collect::<bienergy_core::Result<_>>()?;
        let s = stability_check(&fs, &rs, &fam.base(), &exprs, spec)?;
        for (k, (v, se)) in s.values.iter().zip(&s.stderrs).enumerate() {
            report.check(CheckRecord::assess(
                format!("H(V,V) + 3 stderr, direction {}", k + 1),
                v + 3.0 * se,
                Bound::Ge(0.0),
                Some(*se),
            ));
        }
    }
    Ok(())
}

fn self_adjoint(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let rs = cfg.codomain()?;
    let map = cfg.map()?;
    let (x, y) = cfg.sections()?;
    let r = self_adjointness_check(&fs, &rs, &map, &x, &y, &cfg.quadrature)?;
    report.value("<Lap X, Y>", r.laplacian_xy);
    report.value("<X, Lap Y>", r.laplacian_yx);
    report.value("<J X, Y>", r.jacobi_xy);
    report.value("<X, J Y>", r.jacobi_yx);
    report.value("g(DX, DY)", r.gradient_pairing);
    report.check(CheckRecord::assess(
        "Laplacian gap",
        r.laplacian_gap,
        Bound::Le(r.laplacian_bound),
        Some(r.laplacian_gap_stderr),
    ));
    report.check(CheckRecord::assess("Jacobi gap", r.jacobi_gap, Bound::Le(r.jacobi_bound), Some(r.jacobi_gap_stderr)));
    report.check(CheckRecord::assess(
        "<Lap X, X>",
        r.positivity,
        Bound::Ge(-3.0 * r.positivity_stderr),
        Some(r.positivity_stderr),
    ));
    Ok(())
}

fn weitzenbock(cfg: &RunConfig, point: Option<&PointState>, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let rs = cfg.codomain()?;
    let map = cfg.map()?;
    let mut worst = 0.0f64;
    for (k, p) in cfg.points(point).iter().enumerate() {
        let (res, lhs, rhs) = weitzenbock_residual(&fs, &rs, &map, p).map_err(|e| CliError::at_point(p, e))?;
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        report.value(format!("p{}.lhs", k + 1), lhs);
        report.value(format!("p{}.rhs", k + 1), rhs);
        worst = worst.max(res.abs() / scale);
    }
    report.check(CheckRecord::assess(
        "Weitzenbock residual / scale",
        worst,
        Bound::Le(cfg.tolerance.weitzenbock),
        None,
    ));
    Ok(())
}

fn divergence(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let fields = cfg
        .fields
        .as_ref()
        .ok_or_else(|| CliError::Config("the divergence suite needs a `fields` block".into()))?;
    let vars = xy_vars(cfg.dimension);
    let parsed = |s: &str| parse(s, &vars).map_err(|e| CliError::in_block("fields", e));
    let mut any = false;
    if let Some(v) = &fields.vector {
        let xs: Vec<Expr> = v.iter().map(|s| parsed(s)).collect::<Result<_, _>>()?;
        let r = divergence_theorem_check(&fs, &xs, &cfg.quadrature)?;
        report.check(CheckRecord::assess("|int div X|", r.integral.abs(), Bound::Le(r.bound), Some(r.stderr)));
        any = true;
    }
    if let Some(f) = &fields.scalar {
        let r = laplacian_vanishing_check(&fs, &parsed(f)?, &cfg.quadrature)?;
        report.check(CheckRecord::assess("|int Lap f|", r.integral.abs(), Bound::Le(r.bound), Some(r.stderr)));
        any = true;
    }
    if fields.tension_norm {
        let r = tension_laplacian_check(&fs, &cfg.codomain()?, &cfg.map()?, &cfg.quadrature)?;
        report.check(CheckRecord::assess(
            "|int Lap |tau|^2|",
            r.integral.abs(),
            Bound::Le(r.bound),
            Some(r.stderr),
        ));
        any = true;
    }
    if !any {
        return Err(CliError::Config("the `fields` block names nothing to integrate".into()));
    }
    Ok(())
}

/// A generic smooth scalar field used to exercise the bracket identity.
fn probe_field(n: usize) -> String {
    let mut terms = Vec::new();
    for i in 1..=n {
        let j = i % n + 1;
        terms.push(format!("sin({i}*x{i} + 0.3*x{j} + 0.2)*y{i}*y{j}"));
        terms.push(format!("cos(x{j} - 0.4*x{i})*y{i}^3"));
    }
    terms.join(" + ")
}

fn max_norm(v: &[Jet]) -> f64 {
    v.iter().map(|j| j.value().abs()).fold(0.0, f64::max)
}

fn invariants(cfg: &RunConfig, point: Option<&PointState>, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let tol = cfg.tolerance.pointwise;
    let n = cfg.dimension;
    let probe = parse(&probe_field(n), &xy_vars(n)).expect("probe field parses");
    let points = cfg.points(point);
    let mut worst = [0.0f64; 6];
    for p in &points {
        let r = invariant_residuals(&fs, p, &probe).map_err(|e| CliError::at_point(p, e))?;
        for (w, v) in worst
            .iter_mut()
            .zip([r.homogeneity, r.euler, r.delta_f2, r.h_metricity, r.bracket, r.torsion_trace])
        {
            *w = w.max(v);
        }
    }
    let names = ["0-homogeneity of g", "g(y,y) = F^2", "delta_i F^2 = 0", "h-metricity", "bracket identity"];
    for (name, w) in names.iter().zip(worst) {
        report.check(CheckRecord::assess(*name, w, Bound::Le(tol), None));
    }
    let riemannian = matches!(
        fs.definition(),
        FinslerDefinition::Euclidean | FinslerDefinition::Riemannian { .. }
    );
    if riemannian {
        report.check(CheckRecord::assess("P_i = 0 (Riemannian)", worst[5], Bound::Le(tol), None));
    } else {
        report.check(CheckRecord::info("|P_i|", worst[5], Bound::Le(tol), None));
    }

    let rs = cfg.codomain()?;
    let map = match cfg.map() {
        Ok(m) => m,
        Err(_) => return Ok(()),
    };
    let d = rs.dim();
    let probe_s = |shift: f64| -> Vec<Expr> {
        (1..=d)
            .map(|a| {
                let s = format!("sin({a}*x1 + {shift}) * y1 + cos(x{} - {shift}) * y{}", n, n);
                parse(&s, &xy_vars(n)).expect("probe section parses")
            })
            .collect()
    };
    let (s1, s2) = (probe_s(0.3), probe_s(-0.7));
    let (a, b) = (1.7, -0.6);
    let mut lin = 0.0f64;
    let mut bil = 0.0f64;
    let mut hb = 0.0f64;
    let mut harmonic_points = 0usize;
    let mut space_form = 0.0f64;
    for p in &points {
        let mp = MapPoint::new(&fs, &rs, &map, p, ORDER_BITENSION).map_err(|e| CliError::at_point(p, e))?;
        let args: Vec<Jet> = mp.domain().x().iter().chain(mp.domain().y()).cloned().collect();
        let eval = |s: &[Expr]| -> Result<Vec<Jet>, CliError> {
            Ok(s.iter().map(|e| e.eval_jets(&args)).collect::<bienergy_core::Result<_>>()?)
        };
        let (u, v) = (eval(&s1)?, eval(&s2)?);
        let comb: Vec<Jet> = u.iter().zip(&v).map(|(x, y)| &x.scale(a) + &y.scale(b)).collect();
        let (ju, jv, jc) = (mp.jacobi(&u), mp.jacobi(&v), mp.jacobi(&comb));
        let scale = max_norm(&ju).max(max_norm(&jv)).max(1.0);
        for k in 0..d {
            let r = jc[k].value() - a * ju[k].value() - b * jv[k].value();
            lin = lin.max(r.abs() / scale);
        }
        let h = |x: &[Jet], y: &[Jet]| mp.hessian_integrand(x, y).value();
        let lhs = h(&comb, &v);
        let rhs = a * h(&u, &v) + b * h(&v, &v);
        bil = bil.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
        let tau = mp.tension();
        if max_norm(&tau) <= 1e-12 {
            harmonic_points += 1;
            hb = hb.max(max_norm(&mp.bitension()));
        }
        if let Some(c) = rs.space_form_curvature() {
            let g = mp.bitension();
            let s = mp.bitension_space_form(c);
            let sc = max_norm(&g).max(1.0);
            for k in 0..d {
                space_form = space_form.max((g[k].value() - s[k].value()).abs() / sc);
            }
        }
    }
    report.check(CheckRecord::assess("J linearity", lin, Bound::Le(tol), None));
    report.check(CheckRecord::assess("Hessian bilinearity", bil, Bound::Le(tol), None));
    if harmonic_points > 0 {
        report.check(CheckRecord::assess("harmonic => biharmonic", hb, Bound::Le(1e-8), None));
    } else {
        report.check(CheckRecord::info("harmonic => biharmonic (no harmonic sample)", hb, Bound::Le(1e-8), None));
    }
    if rs.space_form_curvature().is_some() {
        report.check(CheckRecord::assess("space-form bitension", space_form, Bound::Le(tol), None));
    }
    Ok(())
}

/// Residuals of the identity-map relations at the sample points.
fn identity(cfg: &RunConfig, point: Option<&PointState>, report: &mut Report) -> Result<(), CliError> {
    let setup = cfg.perturbation()?;
    let tol = cfg.tolerance.pointwise;
    let points = cfg.points(point);
    let mut routes = 0.0f64;
    let mut split = 0.0f64;
    let mut comm = 0.0f64;
    let mut deriv = 0.0f64;
    let mut tau_sup = 0.0f64;
    let mut cond = 0.0f64;
    let mut pred_gap = 0.0f64;
    for p in &points {
        let at = |e| CliError::at_point(p, e);
        let t = identity_tension(&setup, p).map_err(at)?;
        let scale = t.via_general.iter().map(|v| v.abs()).fold(1.0, f64::max);
        routes = routes
            .max(t.gap_b_connections / scale)
            .max(t.gap_b_general / scale)
            .max(t.gap_connections_general / scale);
        tau_sup = tau_sup.max(t.via_general.iter().map(|v| v.abs()).fold(0.0, f64::max));
        if let (Some(r), Some(pr)) = (&t.covector_condition_residual, &t.predicted) {
            cond = cond.max(r.iter().map(|v| v.abs()).fold(0.0, f64::max));
            let g: f64 = t.via_general.iter().zip(pr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            pred_gap = pred_gap.max(g / scale);
        }

        let ip = IdentityPoint::new(&setup, p, ORDER_BITENSION).map_err(at)?;
        let f2 = ip.domain().f2().value().abs().max(1e-300);
        split = split.max(max_norm(&ip.spray_split_residual()) / f2);
        for row in ip.commutation_residual() {
            comm = comm.max(max_norm(&row) / f2);
        }
        let id = bienergy_core::SmoothMap::identity(setup.dim());
        let mp = MapPoint::new(setup.finsler(), setup.codomain(), &id, p, ORDER_BITENSION).map_err(at)?;
        let tau = mp.tension();
        let s = max_norm(&tau).max(1.0);
        for row in ip.derivative_relation_residual(&mp, &tau) {
            deriv = deriv.max(max_norm(&row) / s);
        }
    }
    report.check(CheckRecord::assess("tension routes agree", routes, Bound::Le(tol), None));
    report.check(CheckRecord::assess("spray split G = G~ + B", split, Bound::Le(tol), None));
    report.check(CheckRecord::assess("2 y_h|j = F^2_|j.h", comm, Bound::Le(tol), None));
    report.check(CheckRecord::assess("D tau vs bar derivative of tau", deriv, Bound::Le(tol), None));
    report.value("sup |tau(id)|", tau_sup);
    if setup.covector().is_some() {
        report.check(CheckRecord::info("parallel-type condition residual", cond, Bound::Le(tol), None));
        report.check(CheckRecord::info("tau(id) vs -(n/2) a", pred_gap, Bound::Le(tol), None));
        report.note(format!("condition holds: {}", yes_no(cond <= tol)));
    }
    report.note(bienergy_core::identity::DIRECTION_NOTE);
    if let Some(id) = &cfg.identity {
        if id.scales.is_some() {
            scaling(cfg, &points, report)?;
        }
    }
    Ok(())
}

fn slope_or_nan(s: Option<f64>) -> f64 {
    s.unwrap_or(f64::NAN)
}

fn scaling_table(name: &str, r: &ScalingReport) -> Table {
    Table {
        name: name.into(),
        columns: vec!["c".into(), "sup|tau|".into(), "sup|tau2|".into()],
        rows: r
            .scales
            .iter()
            .zip(&r.tau_sup)
            .zip(&r.tau2_sup)
            .map(|((c, a), b)| vec![*c, *a, *b])
            .collect(),
    }
}

/// Log-log slopes of `sup‖τ‖` and `sup‖τ₂‖` against the perturbation scale.
fn scaling(cfg: &RunConfig, points: &[PointState], report: &mut Report) -> Result<(), CliError> {
    let id = cfg.identity.as_ref().expect("identity block present");
    let scales = id.scales.clone().unwrap_or_else(|| bienergy_core::identity::DEFAULT_SCALES.to_vec());
    let tol = &cfg.tolerance;
    let setup = cfg.perturbation()?;
    let r = linearized_scaling(&setup, &scales, points)?;
    let (st, st2) = (slope_or_nan(r.slope_tau), slope_or_nan(r.slope_tau2));
    report.tables.push(scaling_table("linearized scaling", &r));
    report.check(CheckRecord::assess("slope log|tau|", st, Bound::Within(tol.slope_tau), None));
    report.check(CheckRecord::info("slope log|tau2| (nominal band)", st2, Bound::Within(tol.slope_tau2), None));
    report.check(CheckRecord::assess(
        "slope log|tau2| (vanishes at linear order)",
        st2,
        Bound::Ge(tol.slope_tau2[0]),
        None,
    ));
    let harmonic = r.tau_sup.iter().all(|v| *v <= tol.harmonic);
    report.note(format!(
        "harmonic: {}, biharmonic(linear order): {}",
        yes_no(harmonic),
        yes_no(st2 >= tol.slope_tau2[0])
    ));
    if let Some(b) = &id.control {
        let ctl = cfg.perturbation_with(b)?;
        let rc = linearized_scaling(&ctl, &scales, points)?;
        let s2 = slope_or_nan(rc.slope_tau2);
        report.tables.push(scaling_table("control scaling", &rc));
        let outside = !Bound::Within(tol.slope_tau2).holds(s2);
        report.check(CheckRecord::assess(
            "control slope log|tau2| outside band",
            if outside { 1.0 } else { 0.0 },
            Bound::Ge(1.0),
            None,
        ));
        report.value("control slope log|tau2|", s2);
    }
    Ok(())
}

/// `identity-analysis`: the identity suite with the slope tables always computed.
pub fn identity_analysis(cfg: &RunConfig, point: Option<&PointState>, report: &mut Report) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    if let Some(id) = cfg.identity.as_mut() {
        if id.scales.is_none() {
            id.scales = Some(bienergy_core::identity::DEFAULT_SCALES.to_vec());
        }
    }
    identity(&cfg, point, report)
}
