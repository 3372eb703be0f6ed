//! Point and integral commands.

use bienergy_core::finsler::DomainJets;
use bienergy_core::map::tension_report;
use bienergy_core::quadrature::{bienergy, energy, FunctionalEstimate};
use bienergy_core::PointState;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Bound, CheckRecord, Report};

fn label(name: &str, idx: &[usize]) -> String {
    let idx: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("{name}[{}]", idx.join(","))
}

fn push_matrix(r: &mut Report, name: &str, m: &[Vec<f64>]) {
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            r.value(label(name, &[i, j]), *v);
        }
    }
}

fn push_tensor3(r: &mut Report, name: &str, t: &[Vec<Vec<f64>>]) {
    for (i, m) in t.iter().enumerate() {
        for (j, row) in m.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                r.value(label(name, &[i, j, k]), *v);
            }
        }
    }
}

fn push_tensor4(r: &mut Report, name: &str, t: &[Vec<Vec<Vec<f64>>>]) {
    for (i, c) in t.iter().enumerate() {
        for (j, m) in c.iter().enumerate() {
            for (k, row) in m.iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    r.value(label(name, &[i, j, k, l]), *v);
                }
            }
        }
    }
}

/// Metric, connection and curvature data at one point.
pub fn geom(cfg: &RunConfig, point: Option<&PointState>, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let p = cfg.points(point).remove(0);
    let dj = DomainJets::new(&fs, &p, 4).map_err(|e| CliError::at_point(&p, e))?;
    let m = dj.metric_data();
    let c = dj.connection_data();
    let k = dj.curvature_data();
    for (i, v) in p.x.iter().enumerate() {
        report.value(label("x", &[i]), *v);
    }
    for (i, v) in p.y.iter().enumerate() {
        report.value(label("y", &[i]), *v);
    }
    report.value("F2", m.f2);
    push_matrix(report, "g", &m.g);
    push_matrix(report, "g_inv", &m.g_inv);
    report.value("det_g", m.det);
    for (i, v) in m.y_lower.iter().enumerate() {
        report.value(label("y_lower", &[i]), *v);
    }
    for (i, v) in c.spray.iter().enumerate() {
        report.value(label("G", &[i]), *v);
    }
    push_matrix(report, "N", &c.nonlinear);
    push_tensor3(report, "Gamma", &c.chern_rund);
    push_tensor3(report, "Berwald", &c.berwald);
    push_tensor3(report, "P", &c.torsion);
    for (i, v) in c.torsion_trace.iter().enumerate() {
        report.value(label("P_trace", &[i]), *v);
    }
    push_tensor3(report, "R", &c.bracket);
    push_tensor4(report, "R_hh", &k.hh);
    push_tensor4(report, "P_hv", &k.hv);
    Ok(())
}

/// `τ` (and `τ₂` when `with_bitension`) over the sample set, with harmonic status.
pub fn tension(
    cfg: &RunConfig,
    point: Option<&PointState>,
    with_bitension: bool,
    report: &mut Report,
) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let rs = cfg.codomain()?;
    let map = cfg.map()?;
    let tol = &cfg.tolerance;
    let mut tau_sup = 0.0f64;
    let mut tau2_sup = 0.0f64;
    for (k, p) in cfg.points(point).iter().enumerate() {
        let t = tension_report(&fs, &rs, &map, p, with_bitension).map_err(|e| CliError::at_point(p, e))?;
        for (a, v) in t.tau.iter().enumerate() {
            report.value(format!("p{}.tau[{}]", k + 1, a + 1), *v);
        }
        report.value(format!("p{}.|tau|", k + 1), t.tau_norm);
        tau_sup = tau_sup.max(t.tau_norm);
        if let (Some(t2), Some(n2)) = (&t.tau2, t.tau2_norm) {
            for (a, v) in t2.iter().enumerate() {
                report.value(format!("p{}.tau2[{}]", k + 1, a + 1), *v);
            }
            report.value(format!("p{}.|tau2|", k + 1), n2);
            tau2_sup = tau2_sup.max(n2);
        }
    }
    report.check(CheckRecord::info("sup |tau|", tau_sup, Bound::Le(tol.harmonic), None));
    let harmonic = tau_sup <= tol.harmonic;
    report.note(format!("harmonic: {}", yes_no(harmonic)));
    if with_bitension {
        report.check(CheckRecord::info("sup |tau2|", tau2_sup, Bound::Le(tol.biharmonic), None));
        report.note(format!("biharmonic: {}", yes_no(tau2_sup <= tol.biharmonic)));
    }
    Ok(())
}

pub(crate) fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn push_estimate(report: &mut Report, name: &str, est: &FunctionalEstimate) {
    report.value(name, est.value());
    report.value(format!("{name}.stderr"), est.stderr());
    report.value(format!("{name}.samples"), est.samples as f64);
    report.value(format!("{name}.acceptance_rate"), est.acceptance_rate());
    report.check(CheckRecord::assess(
        format!("{name} >= 0"),
        est.value() + 3.0 * est.stderr(),
        Bound::Ge(0.0),
        Some(est.stderr()),
    ));
    report.note(format!("spec hash {}", est.spec_hash));
    report.note(format!("structure hash {}", est.structure_hash));
}

pub fn integral(cfg: &RunConfig, bi: bool, report: &mut Report) -> Result<(), CliError> {
    let fs = cfg.finsler()?;
    let rs = cfg.codomain()?;
    let map = cfg.map()?;
    let est = if bi {
        bienergy(&fs, &rs, &map, &cfg.quadrature)?
    } else {
        energy(&fs, &rs, &map, &cfg.quadrature)?
    };
    push_estimate(report, if bi { "E2" } else { "E" }, &est);
    Ok(())
}
