//! Energy functionals and the finite-difference variational checks.
//!
//! Each check integrates all its quantities as components of one estimate,
//! so every ε-evaluation sees the same fiber points (common random numbers).
//! The gap is itself integrated as a pointwise difference, and its standard
//! error is the paired one.

use serde::{Deserialize, Serialize};

use super::{integrate, FunctionalEstimate, QuadratureSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::finsler::{field_jet, sample_points, Chart, DomainJets, FinslerStructure, PointState};
use crate::jet::Jet;
use crate::map::{MapPoint, PullbackSection, SmoothMap, VariationFamily, ORDER_BITENSION, ORDER_TENSION};
use crate::riemann::RiemannStructure;

fn half_norm2(mp: &MapPoint<'_>, v: &[Jet]) -> f64 {
    0.5 * mp.inner(v, v).value()
}

/// `E(φ) = ∫_BM e(φ)`.
pub fn energy(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    spec: &QuadratureSpec,
) -> Result<FunctionalEstimate> {
    integrate(fs, spec, 1, |p| {
        Ok(vec![MapPoint::new(fs, rs, map, p, 2)?.energy_density().value()])
    })
}

/// `E₂(φ) = ½ ∫_BM ⟨τ, τ⟩`.
pub fn bienergy(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    spec: &QuadratureSpec,
) -> Result<FunctionalEstimate> {
    integrate(fs, spec, 1, |p| {
        let mp = MapPoint::new(fs, rs, map, p, ORDER_TENSION)?;
        Ok(vec![half_norm2(&mp, &mp.tension())])
    })
}

fn probe_points(chart: &Chart, seed: u64) -> Vec<PointState> {
    sample_points(chart, 8, seed ^ 0x5eed, 0.0)
}

/// Sections must be periodic on a torus, and must vanish with their first
/// derivatives on the faces of a box.
fn check_support<F>(fs: &FinslerStructure, seed: u64, what: &str, eval: F) -> Result<()>
where
    F: Fn(&DomainJets) -> Result<Vec<Jet>>,
{
    let chart = fs.chart();
    let n = fs.dim();
    for p in probe_points(chart, seed) {
        let inner = eval(&DomainJets::new(fs, &p, 2)?)?;
        let scale = inner.iter().map(|j| j.value().abs()).fold(1.0, f64::max);
        for i in 0..n {
            let (a, b) = chart.bounds(i);
            match chart {
                Chart::Torus { .. } => {
                    let mut q = p.clone();
                    q.x[i] += b - a;
                    let shifted = eval(&DomainJets::new(fs, &q, 2)?)?;
                    for (u, v) in inner.iter().zip(&shifted) {
                        if (u.value() - v.value()).abs() > 1e-9 * scale {
                            return Err(Error::SupportViolation(format!(
                                "{what} is not periodic along axis {} at x = {:?}",
                                i + 1,
                                p.x
                            )));
                        }
                    }
                }
                Chart::Box { .. } => {
                    for face in [a, b] {
                        let mut q = p.clone();
                        q.x[i] = face;
                        for s in eval(&DomainJets::new(fs, &q, 2)?)? {
                            let worst = s.coefficients()[..=n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
                            if worst > 1e-9 * scale {
                                return Err(Error::SupportViolation(format!(
                                    "{what} or its first derivatives do not vanish on the face x{} = {face} (size {worst:.2e})",
                                    i + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstVariationReport {
    pub h: f64,
    /// Richardson-extrapolated central difference of `E₂`.
    pub fd: f64,
    pub fd_central: f64,
    pub analytic: f64,
    pub analytic_stderr: f64,
    pub gap: f64,
    pub gap_stderr: f64,
    pub bound: f64,
    pub pass: bool,
    pub estimate: FunctionalEstimate,
}

/// `dE₂/dε|₀` by finite differences against `∫⟨τ₂(φ), V⟩`.
pub fn first_variation_check(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    family: &VariationFamily,
    spec: &QuadratureSpec,
    h: f64,
    rel: f64,
) -> Result<FirstVariationReport> {
    let base = family.base();
    check_support(fs, spec.seed, "deviation field", |dj| family.deviation(0, dj))?;
    let maps = [family.at(h, 0.0), family.at(-h, 0.0), family.at(2.0 * h, 0.0), family.at(-2.0 * h, 0.0)];
    let est = integrate(fs, spec, 7, |p| {
        let mut e = [0.0; 4];
        let dj = DomainJets::new(fs, p, ORDER_TENSION)?;
        for (k, m) in maps.iter().enumerate() {
            let mp = MapPoint::with_domain(dj.clone(), rs, m)?;
            e[k] = half_norm2(&mp, &mp.tension());
        }
        let mp = MapPoint::new(fs, rs, &base, p, ORDER_BITENSION)?;
        let v = family.deviation(0, mp.domain())?;
        let a = mp.inner(&mp.bitension(), &v).value();
        let fd = (8.0 * (e[0] - e[1]) - (e[2] - e[3])) / (12.0 * h);
        Ok(vec![e[0], e[1], e[2], e[3], a, fd, fd - a])
    })?;
    let v = &est.values;
    let fd = (8.0 * (v[0] - v[1]) - (v[2] - v[3])) / (12.0 * h);
    let gap = fd - v[4];
    let gap_stderr = est.stderrs[6];
    let bound = (rel * fd.abs()).max(3.0 * gap_stderr);
    Ok(FirstVariationReport {
        h,
        fd,
        fd_central: (v[0] - v[1]) / (2.0 * h),
        analytic: v[4],
        analytic_stderr: est.stderrs[4],
        gap: gap.abs(),
        gap_stderr,
        bound,
        pass: gap.abs() <= bound,
        estimate: est,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfAdjointnessReport {
    pub laplacian_xy: f64,
    pub laplacian_yx: f64,
    pub laplacian_gap: f64,
    pub laplacian_gap_stderr: f64,
    pub jacobi_xy: f64,
    pub jacobi_yx: f64,
    pub jacobi_gap: f64,
    pub jacobi_gap_stderr: f64,
    /// `∫⟨ΔX, X⟩`.
    pub positivity: f64,
    pub positivity_stderr: f64,
    /// `∫g^ij⟨D_iX, D_jY⟩`, which equals `+∫⟨ΔX, Y⟩`.
    pub gradient_pairing: f64,
    pub scale: f64,
    pub laplacian_bound: f64,
    pub jacobi_bound: f64,
    pub pass: bool,
    pub estimate: FunctionalEstimate,
}

pub fn self_adjointness_check(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    x: &PullbackSection,
    y: &PullbackSection,
    spec: &QuadratureSpec,
) -> Result<SelfAdjointnessReport> {
    check_support(fs, spec.seed, "section X", |dj| x.jets(dj))?;
    check_support(fs, spec.seed, "section Y", |dj| y.jets(dj))?;
    let est = integrate(fs, spec, 8, |p| {
        let mp = MapPoint::new(fs, rs, map, p, ORDER_TENSION)?;
        let xs = x.jets(mp.domain())?;
        let ys = y.jets(mp.domain())?;
        let (lx, ly) = (mp.rough_laplacian(&xs), mp.rough_laplacian(&ys));
        let (jx, jy) = (mp.jacobi(&xs), mp.jacobi(&ys));
        let a = mp.inner(&lx, &ys).value();
        let b = mp.inner(&xs, &ly).value();
        let c = mp.inner(&jx, &ys).value();
        let d = mp.inner(&xs, &jy).value();
        let pos = mp.inner(&lx, &xs).value();
        let n = fs.dim();
        let ginv = mp.domain().g_inv();
        let dx: Vec<Vec<Jet>> = (0..n).map(|i| mp.cov_deriv(&xs, i)).collect();
        let dy: Vec<Vec<Jet>> = (0..n).map(|i| mp.cov_deriv(&ys, i)).collect();
        let mut grad = 0.0;
        for i in 0..n {
            for j in 0..n {
                grad += ginv[i][j].value() * mp.inner(&dx[i], &dy[j]).value();
            }
        }
        Ok(vec![a, b, a - b, c, d, c - d, pos, grad])
    })?;
    let v = &est.values;
    let s = &est.stderrs;
    let scale = v[0].abs().max(v[1].abs()).max(v[3].abs()).max(v[4].abs());
    let laplacian_bound = 3.0 * s[2] + 1e-6 * scale;
    let jacobi_bound = 3.0 * s[5] + 1e-6 * scale;
    let pass = v[2].abs() <= laplacian_bound && v[5].abs() <= jacobi_bound && v[6] >= -3.0 * s[6];
    Ok(SelfAdjointnessReport {
        laplacian_xy: v[0],
        laplacian_yx: v[1],
        laplacian_gap: v[2].abs(),
        laplacian_gap_stderr: s[2],
        jacobi_xy: v[3],
        jacobi_yx: v[4],
        jacobi_gap: v[5].abs(),
        jacobi_gap_stderr: s[5],
        positivity: v[6],
        positivity_stderr: s[6],
        gradient_pairing: v[7],
        scale,
        laplacian_bound,
        jacobi_bound,
        pass,
        estimate: est,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariationReport {
    pub h: f64,
    /// Richardson-extrapolated mixed difference of `E₂` over `(ε₁, ε₂)`.
    pub fd: f64,
    pub h12: f64,
    pub h21: f64,
    pub h12_stderr: f64,
    pub gap: f64,
    pub gap_stderr: f64,
    pub symmetry_gap: f64,
    pub symmetry_stderr: f64,
    pub base_bitension: f64,
    pub bound: f64,
    pub pass: bool,
    pub estimate: FunctionalEstimate,
}

/// Largest `‖τ₂‖` of the base map over probe points.
fn base_bitension_sup(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    seed: u64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in sample_points(fs.chart(), 16, seed ^ 0xb1, 0.05) {
        let mp = MapPoint::new(fs, rs, map, &p, ORDER_BITENSION)?;
        let t2 = mp.bitension();
        worst = worst.max(mp.inner(&t2, &t2).value().max(0.0).sqrt());
    }
    Ok(worst)
}

pub fn second_variation_check(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    family: &VariationFamily,
    spec: &QuadratureSpec,
    h: f64,
    rel: f64,
    biharmonic_tol: f64,
) -> Result<SecondVariationReport> {
    let base = family.base();
    let t2 = base_bitension_sup(fs, rs, &base, spec.seed)?;
    if t2 > biharmonic_tol {
        return Err(Error::Prerequisite(format!(
            "base map is not biharmonic at tolerance {biharmonic_tol:.1e} (sup ‖τ₂‖ = {t2:.3e})"
        )));
    }
    check_support(fs, spec.seed, "deviation field V1", |dj| family.deviation(0, dj))?;
    check_support(fs, spec.seed, "deviation field V2", |dj| family.deviation(1, dj))?;
    let corners = |s: f64| {
        [
            family.at(s, s),
            family.at(s, -s),
            family.at(-s, s),
            family.at(-s, -s),
        ]
    };
    let maps: Vec<SmoothMap> = corners(h).into_iter().chain(corners(2.0 * h)).collect();
    let mixed = |e: &[f64]| (e[0] - e[1] - e[2] + e[3]) / 4.0;
    let est = integrate(fs, spec, 13, |p| {
        let mut e = [0.0; 8];
        let dj = DomainJets::new(fs, p, ORDER_TENSION)?;
        for (k, m) in maps.iter().enumerate() {
            let mp = MapPoint::with_domain(dj.clone(), rs, m)?;
            e[k] = half_norm2(&mp, &mp.tension());
        }
        let mp = MapPoint::new(fs, rs, &base, p, ORDER_BITENSION)?;
        let v1 = family.deviation(0, mp.domain())?;
        let v2 = family.deviation(1, mp.domain())?;
        let h12 = mp.hessian_integrand(&v1, &v2).value();
        let h21 = mp.hessian_integrand(&v2, &v1).value();
        let fd = (4.0 * mixed(&e[..4]) / (h * h) - mixed(&e[4..]) / (4.0 * h * h)) / 3.0;
        let mut out = e.to_vec();
        out.extend([h12, h21, fd, fd - h12, h12 - h21]);
        Ok(out)
    })?;
    let v = &est.values;
    let s = &est.stderrs;
    let fd = (4.0 * mixed(&v[..4]) / (h * h) - mixed(&v[4..8]) / (4.0 * h * h)) / 3.0;
    let (h12, h21) = (v[8], v[9]);
    let gap = (fd - h12).abs();
    let symmetry_gap = (h12 - h21).abs();
    let scale = fd.abs().max(h12.abs()).max(h21.abs());
    let bound = (rel * scale).max(3.0 * s[11].max(s[12]));
    Ok(SecondVariationReport {
        h,
        fd,
        h12,
        h21,
        h12_stderr: s[8],
        gap,
        gap_stderr: s[11],
        symmetry_gap,
        symmetry_stderr: s[12],
        base_bitension: t2,
        bound,
        pass: gap <= bound && symmetry_gap <= bound,
        estimate: est,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `H(V_k, V_k)` per direction.
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Smallest `H(V_k, V_k) + 3σ_k`.
    pub worst_margin: f64,
    pub pass: bool,
    pub estimate: FunctionalEstimate,
}

/// `H(V, V) ≥ −3σ` for each direction `V` (expressions over `x1..xn`).
pub fn stability_check(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    directions: &[Vec<Expr>],
    spec: &QuadratureSpec,
) -> Result<StabilityReport> {
    let fields = |dir: &[Expr], dj: &DomainJets| -> Result<Vec<Jet>> { dir.iter().map(|e| e.eval_jets(dj.x())).collect() };
    for (k, dir) in directions.iter().enumerate() {
        check_support(fs, spec.seed, &format!("direction {}", k + 1), |dj| fields(dir, dj))?;
    }
    let est = integrate(fs, spec, directions.len(), |p| {
        let mp = MapPoint::new(fs, rs, map, p, ORDER_BITENSION)?;
        directions
            .iter()
            .map(|dir| {
                let v = fields(dir, mp.domain())?;
                Ok(mp.hessian_integrand(&v, &v).value())
            })
            .collect()
    })?;
    let worst_margin = est
        .values
        .iter()
        .zip(&est.stderrs)
        .map(|(v, s)| v + 3.0 * s)
        .fold(f64::INFINITY, f64::min);
    Ok(StabilityReport {
        values: est.values.clone(),
        stderrs: est.stderrs.clone(),
        worst_margin,
        pass: worst_margin >= 0.0,
        estimate: est,
    })
}

/// Seeded smooth directions admissible on `chart`: low-mode trigonometric
/// sums, times a `sin²` bump per axis on a box.
pub fn random_directions(chart: &Chart, components: usize, count: usize, seed: u64) -> Vec<Vec<String>> {
    use rand::{Rng, SeedableRng};
    let n = chart.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bump: String = match chart {
        Chart::Torus { .. } => String::new(),
        Chart::Box { .. } => (0..n)
            .map(|i| {
                let (a, b) = chart.bounds(i);
                format!("*sin(pi*(x{} - ({a}))/({}))^2", i + 1, b - a)
            })
            .collect(),
    };
    (0..count)
        .map(|_| {
            (0..components)
                .map(|_| {
                    let mut terms = vec![format!("{:.6}", rng.random_range(-0.5..0.5))];
                    for _ in 0..3 {
                        let amp: f64 = rng.random_range(-1.0..1.0);
                        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                        let arg: Vec<String> = (0..n)
                            .map(|i| {
                                let k: i32 = rng.random_range(-2..=2);
                                let (a, b) = chart.bounds(i);
                                format!("{k}*x{}/({})", i + 1, b - a)
                            })
                            .collect();
                        terms.push(format!("{amp:.6}*cos(2*pi*({}) + {phase:.6})", arg.join(" + ")));
                    }
                    format!("({}){bump}", terms.join(" + "))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub integral: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
    pub estimate: FunctionalEstimate,
}

fn vanishing(est: FunctionalEstimate, slack: f64) -> DivergenceReport {
    let bound = 3.0 * est.stderr() + slack;
    DivergenceReport {
        integral: est.value(),
        stderr: est.stderr(),
        bound,
        pass: est.value().abs() <= bound,
        estimate: est,
    }
}

/// `∫_BM div X` for a horizontal field with components over `x, y`.
pub fn divergence_theorem_check(
    fs: &FinslerStructure,
    field: &[Expr],
    spec: &QuadratureSpec,
) -> Result<DivergenceReport> {
    check_support(fs, spec.seed, "vector field", |dj| {
        field.iter().map(|e| field_jet(e, dj)).collect()
    })?;
    let est = integrate(fs, spec, 1, |p| {
        let dj = DomainJets::new(fs, p, 4)?;
        let xs: Vec<Jet> = field.iter().map(|e| field_jet(e, &dj)).collect::<Result<_>>()?;
        Ok(vec![dj.divergence(&xs).value()])
    })?;
    Ok(vanishing(est, 1e-12))
}

/// `∫_BM Δ_h f` for a scalar `f(x, y)`.
pub fn laplacian_vanishing_check(
    fs: &FinslerStructure,
    f: &Expr,
    spec: &QuadratureSpec,
) -> Result<DivergenceReport> {
    check_support(fs, spec.seed, "scalar", |dj| Ok(vec![field_jet(f, dj)?]))?;
    let est = integrate(fs, spec, 1, |p| {
        let dj = DomainJets::new(fs, p, 4)?;
        Ok(vec![dj.horizontal_laplacian(&field_jet(f, &dj)?).value()])
    })?;
    Ok(vanishing(est, 1e-12))
}

/// `∫_BM Δ_h ‖τ(φ)‖²`.
pub fn tension_laplacian_check(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    spec: &QuadratureSpec,
) -> Result<DivergenceReport> {
    let est = integrate(fs, spec, 1, |p| {
        let mp = MapPoint::new(fs, rs, map, p, ORDER_BITENSION)?;
        let t = mp.tension();
        Ok(vec![mp.domain().horizontal_laplacian(&mp.inner(&t, &t)).value()])
    })?;
    Ok(vanishing(est, 1e-12))
}
