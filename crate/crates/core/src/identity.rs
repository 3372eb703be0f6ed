//! The identity map `id: (M, F) → (M, g̃)` for `F² = g̃_ij(x) y^i y^j + b(x, y)`.
//!
//! Double bars are horizontal covariant derivatives for the Levi-Civita
//! connection `γ̃` of the base metric, taken in the adapted frame
//! `δ̃_j = ∂_j − γ̃^k_jm y^m ∂̇_k`. With `y_h = ½ ∂̇_h F²`,
//! `2B^i = ½ g^ih (2 y_h‖j y^j − F²‖h)` and the spray splits as `G = G̃ + B`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{indexed_vars, parse, Expr, Node};
use crate::finsler::{
    parse_matrix, parse_vector, xy_vars, Chart, DomainJets, FinslerDefinition, FinslerStructure,
    PointState, ValidationSummary,
};
use crate::jet::Jet;
use crate::map::{MapPoint, SmoothMap};
use crate::riemann::{RiemannJets, RiemannStructure, T3};

/// Jet order that carries every identity-map quantity including `τ₂`.
pub const ORDER: usize = 6;

/// Orientation used for the identity map; the linearized analysis is often stated with the reverse arrow.
pub const DIRECTION_NOTE: &str =
    "id maps (M, F) to (M, g~); the linearized scaling result is often stated with the reverse arrow";

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSetup {
    chart: Chart,
    base: Vec<Vec<Expr>>,
    b0: Expr,
    scale: f64,
    a: Option<Vec<Expr>>,
    fs: FinslerStructure,
    codomain: RiemannStructure,
}

fn scaled(b0: &Expr, c: f64) -> Expr {
    if c == 1.0 {
        return b0.clone();
    }
    Expr::new(
        b0.vars().to_vec(),
        Node::Mul(Box::new(Node::Const(c)), Box::new(b0.root().clone())),
    )
}

impl PerturbationSetup {
    pub fn new<S: AsRef<str>, R: AsRef<[S]>>(
        chart: Chart,
        base: &[R],
        b: &str,
    ) -> Result<PerturbationSetup> {
        let n = chart.dim();
        let base = parse_matrix(base, &indexed_vars("x", n))?;
        let b0 = parse(b, &xy_vars(n))?;
        PerturbationSetup::build(chart, base, b0, 1.0, None)
    }

    /// Euclidean base metric.
    pub fn euclidean(chart: Chart, b: &str) -> Result<PerturbationSetup> {
        let n = chart.dim();
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { "1".into() } else { "0".into() }).collect())
            .collect();
        PerturbationSetup::new(chart, &rows, b)
    }

    fn build(
        chart: Chart,
        base: Vec<Vec<Expr>>,
        b0: Expr,
        scale: f64,
        a: Option<Vec<Expr>>,
    ) -> Result<PerturbationSetup> {
        let fs = FinslerStructure::from_definition(
            chart.clone(),
            FinslerDefinition::Perturbed {
                base: base.clone(),
                b: scaled(&b0, scale),
            },
        )?;
        let codomain = RiemannStructure::from_exprs(base.clone())?;
        Ok(PerturbationSetup {
            chart,
            base,
            b0,
            scale,
            a,
            fs,
            codomain,
        })
    }

    /// The same setup with `b = c·b₀`.
    pub fn with_scale(&self, c: f64) -> Result<PerturbationSetup> {
        PerturbationSetup::build(self.chart.clone(), self.base.clone(), self.b0.clone(), c, self.a.clone())
    }

    /// Attach the covector field `a^i(x)` in the condition `F²‖h = g_ij a^i y^j y_h`.
    pub fn with_covector<S: AsRef<str>>(&self, a: &[S]) -> Result<PerturbationSetup> {
        let n = self.chart.dim();
        if a.len() != n {
            return Err(Error::InvalidStructure(format!("covector has {} components, expected {n}", a.len())));
        }
        let a = parse_vector(a, &indexed_vars("x", n))?;
        PerturbationSetup::build(self.chart.clone(), self.base.clone(), self.b0.clone(), self.scale, Some(a))
    }

    pub fn finsler(&self) -> &FinslerStructure {
        &self.fs
    }

    pub fn codomain(&self) -> &RiemannStructure {
        &self.codomain
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn perturbation(&self) -> &Expr {
        &self.b0
    }

    pub fn covector(&self) -> Option<&[Expr]> {
        self.a.as_deref()
    }

    /// Homogeneity of `b` and positivity of `g`; in linearized use `λ_min(g) > 0.5`.
    pub fn validate(&self, samples: usize, seed: u64, linearized: bool) -> Result<ValidationSummary> {
        let s = self.fs.validate(samples, seed)?;
        if linearized && s.min_eigenvalue <= 0.5 {
            return Err(Error::InvalidStructure(format!(
                "scale {} too large for linearized use (λ_min = {:.3})",
                self.scale, s.min_eigenvalue
            )));
        }
        Ok(s)
    }
}

/// Jets of the double-bar calculus at one point.
pub struct IdentityPoint<'a> {
    setup: &'a PerturbationSetup,
    dj: DomainJets,
    gamma: T3,
    base_nl: Vec<Vec<Jet>>,
    y_lower: Vec<Jet>,
    b: Vec<Jet>,
}

impl<'a> IdentityPoint<'a> {
    pub fn new(setup: &'a PerturbationSetup, p: &PointState, order: usize) -> Result<IdentityPoint<'a>> {
        let dj = DomainJets::new(&setup.fs, p, order)?;
        let n = dj.dim();
        let rj = RiemannJets::new(&setup.codomain, &p.x, order)?;
        let map: Vec<Option<usize>> = (0..n).map(Some).collect();
        let gamma: T3 = rj
            .gamma()
            .iter()
            .map(|a| {
                a.iter()
                    .map(|r| r.iter().map(|j| j.reindex(dj.space(), &map)).collect())
                    .collect()
            })
            .collect();
        let base_nl: Vec<Vec<Jet>> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let mut acc = Jet::zero(dj.space());
                        for m in 0..n {
                            acc.add_product(&gamma[k][j][m], &dj.y()[m]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let y_lower: Vec<Jet> = (0..n).map(|h| dj.vertical(dj.f2(), h).scale(0.5)).collect();
        let mut ip = IdentityPoint {
            setup,
            dj,
            gamma,
            base_nl,
            y_lower,
            b: Vec::new(),
        };
        ip.b = ip.compute_b();
        Ok(ip)
    }

    pub fn domain(&self) -> &DomainJets {
        &self.dj
    }

    fn n(&self) -> usize {
        self.dj.dim()
    }

    /// `δ̃_j f`.
    pub fn base_delta(&self, f: &Jet, j: usize) -> Jet {
        let mut r = f.derivative(j);
        for k in 0..self.n() {
            let t = &self.base_nl[k][j] * &self.dj.vertical(f, k);
            r -= &t;
        }
        r
    }

    /// `F²‖h = δ̃_h F²`.
    pub fn f2_bar(&self, h: usize) -> Jet {
        self.base_delta(self.dj.f2(), h)
    }

    /// `y_h‖j = δ̃_j y_h − γ̃^m_hj y_m`.
    pub fn y_bar(&self, h: usize, j: usize) -> Jet {
        let mut r = self.base_delta(&self.y_lower[h], j);
        for m in 0..self.n() {
            let t = &self.gamma[m][h][j] * &self.y_lower[m];
            r -= &t;
        }
        r
    }

    fn compute_b(&self) -> Vec<Jet> {
        let n = self.n();
        let y = self.dj.y();
        let inner: Vec<Jet> = (0..n)
            .map(|h| {
                let mut s = -self.f2_bar(h);
                for j in 0..n {
                    let t = self.y_bar(h, j).scale(2.0);
                    s.add_product(&t, &y[j]);
                }
                s
            })
            .collect();
        let ginv = self.dj.g_inv();
        (0..n)
            .map(|i| {
                let mut acc = Jet::zero(self.dj.space());
                for h in 0..n {
                    acc.add_product(&ginv[i][h], &inner[h]);
                }
                acc.scale(0.25)
            })
            .collect()
    }

    /// `B^i`.
    pub fn b_field(&self) -> &[Jet] {
        &self.b
    }

    /// `2 y_h‖j − ∂̇_h F²‖j`, indexed `[h][j]`.
    pub fn commutation_residual(&self) -> Vec<Vec<Jet>> {
        let n = self.n();
        (0..n)
            .map(|h| {
                (0..n)
                    .map(|j| &self.y_bar(h, j).scale(2.0) - &self.dj.vertical(&self.f2_bar(j), h))
                    .collect()
            })
            .collect()
    }

    /// `G^i − G̃^i − B^i` with `G̃^i = ½ γ̃^i_jk y^j y^k`.
    pub fn spray_split_residual(&self) -> Vec<Jet> {
        let n = self.n();
        let y = self.dj.y();
        (0..n)
            .map(|i| {
                let mut g_base = Jet::zero(self.dj.space());
                for j in 0..n {
                    let t = self.base_nl[i][j].scale(0.5);
                    g_base.add_product(&t, &y[j]);
                }
                &(&self.dj.spray()[i] - &g_base) - &self.b[i]
            })
            .collect()
    }

    /// `−g^jk ∂̇_j ∂̇_k B^i`.
    pub fn tension_via_b(&self) -> Vec<Jet> {
        let n = self.n();
        let ginv = self.dj.g_inv();
        (0..n)
            .map(|i| {
                let mut acc = Jet::zero(self.dj.space());
                for j in 0..n {
                    let bj = self.dj.vertical(&self.b[i], j);
                    for k in 0..n {
                        acc.add_product(&ginv[j][k], &self.dj.vertical(&bj, k));
                    }
                }
                -acc
            })
            .collect()
    }

    /// `g^jk (γ̃^i_jk − G^i_jk)` with the Berwald coefficients of `F`.
    pub fn tension_via_connections(&self) -> Vec<Jet> {
        let n = self.n();
        let ginv = self.dj.g_inv();
        let bw = self.dj.berwald();
        (0..n)
            .map(|i| {
                let mut acc = Jet::zero(self.dj.space());
                for j in 0..n {
                    for k in 0..n {
                        let d = &self.gamma[i][j][k] - &bw[i][j][k];
                        acc.add_product(&ginv[j][k], &d);
                    }
                }
                acc
            })
            .collect()
    }

    /// `D_j τ^i − (τ^i‖j − B^k_·j τ^i_·k)` for a section `τ`, indexed `[i][j]`.
    pub fn derivative_relation_residual(&self, mp: &MapPoint<'_>, tau: &[Jet]) -> Vec<Vec<Jet>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = &mp.cov_deriv(tau, j)[i];
                        let mut bar = self.base_delta(&tau[i], j);
                        for m in 0..n {
                            bar.add_product(&self.gamma[i][m][j], &tau[m]);
                        }
                        for k in 0..n {
                            let bk = self.dj.vertical(&self.b[k], j);
                            let t = &bk * &self.dj.vertical(&tau[i], k);
                            bar -= &t;
                        }
                        d - &bar
                    })
                    .collect()
            })
            .collect()
    }

    /// `F²‖h − g_ij a^i y^j y_h` and `−(n/2) a(x)`.
    pub fn covector_condition(&self) -> Result<(Vec<Jet>, Vec<f64>)> {
        let a = self
            .setup
            .a
            .as_ref()
            .ok_or_else(|| Error::Prerequisite("the identity-map condition needs a covector field a".into()))?;
        let n = self.n();
        let xs = self.dj.x();
        let aj: Vec<Jet> = a.iter().map(|e| e.eval_jets(xs)).collect::<Result<_>>()?;
        let g = self.dj.g();
        let y = self.dj.y();
        let mut ay = Jet::zero(self.dj.space());
        for i in 0..n {
            for j in 0..n {
                let t = &aj[i] * &y[j];
                ay.add_product(&g[i][j], &t);
            }
        }
        let res = (0..n).map(|h| &self.f2_bar(h) - &(&ay * &self.y_lower[h])).collect();
        let pred = aj.iter().map(|v| -0.5 * n as f64 * v.value()).collect();
        Ok((res, pred))
    }
}

fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(Jet::value).collect()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

pub fn b_field(setup: &PerturbationSetup, p: &PointState) -> Result<Vec<f64>> {
    Ok(values(IdentityPoint::new(setup, p, 2)?.b_field()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTensionReport {
    pub via_b: Vec<f64>,
    pub via_connections: Vec<f64>,
    pub via_general: Vec<f64>,
    pub gap_b_connections: f64,
    pub gap_b_general: f64,
    pub gap_connections_general: f64,
    pub covector_condition_residual: Option<Vec<f64>>,
    pub predicted: Option<Vec<f64>>,
    pub direction: String,
}

pub fn identity_tension(setup: &PerturbationSetup, p: &PointState) -> Result<IdentityTensionReport> {
    let ip = IdentityPoint::new(setup, p, 4)?;
    let mp = MapPoint::new(&setup.fs, &setup.codomain, &SmoothMap::identity(setup.dim()), p, 4)?;
    let via_b = values(&ip.tension_via_b());
    let via_connections = values(&ip.tension_via_connections());
    let via_general = values(&mp.tension());
    let (res, pred) = match setup.a {
        Some(_) => {
            let (r, p) = ip.covector_condition()?;
            (Some(values(&r)), Some(p))
        }
        None => (None, None),
    };
    Ok(IdentityTensionReport {
        gap_b_connections: max_gap(&via_b, &via_connections),
        gap_b_general: max_gap(&via_b, &via_general),
        gap_connections_general: max_gap(&via_connections, &via_general),
        via_b,
        via_connections,
        via_general,
        covector_condition_residual: res,
        predicted: pred,
        direction: DIRECTION_NOTE.into(),
    })
}

/// Residual vector in the condition `F²‖h = g_ij a^i y^j y_h` and the predicted tension `−(n/2)a`.
pub fn covector_condition_residual(setup: &PerturbationSetup, p: &PointState) -> Result<(Vec<f64>, Vec<f64>)> {
    let ip = IdentityPoint::new(setup, p, 2)?;
    let (r, pred) = ip.covector_condition()?;
    Ok((values(&r), pred))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub scales: Vec<f64>,
    pub tau_sup: Vec<f64>,
    pub tau2_sup: Vec<f64>,
    /// `None` when a sup-norm vanishes, so no log-log fit exists.
    pub slope_tau: Option<f64>,
    pub slope_tau2: Option<f64>,
}

pub const DEFAULT_SCALES: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

/// Least-squares slope of `log v` against `log c`.
pub fn log_log_slope(c: &[f64], v: &[f64]) -> Option<f64> {
    if c.len() < 2 || v.iter().any(|x| !(*x > 1e-300)) {
        return None;
    }
    let lx: Vec<f64> = c.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

fn codomain_norm(mp: &MapPoint<'_>, v: &[Jet]) -> f64 {
    mp.inner(v, v).value().max(0.0).sqrt()
}

/// Sup-norms of `τ(id)` and `τ₂(id)` over `points` for `b = c·b₀`, `c ∈ scales`.
pub fn linearized_scaling(
    setup: &PerturbationSetup,
    scales: &[f64],
    points: &[PointState],
) -> Result<ScalingReport> {
    let rows: Vec<(f64, f64)> = scales
        .iter()
        .map(|&c| {
            let s = setup.with_scale(c)?;
            let id = SmoothMap::identity(s.dim());
            let per: Vec<(f64, f64)> = points
                .par_iter()
                .map(|p| {
                    let mp = MapPoint::new(&s.fs, &s.codomain, &id, p, ORDER)?;
                    let tau = mp.tension();
                    let tau2 = mp.jacobi(&tau);
                    Ok((codomain_norm(&mp, &tau), codomain_norm(&mp, &tau2)))
                })
                .collect::<Result<_>>()?;
            Ok(per.iter().fold((0.0, 0.0), |(a, b), (u, v)| (f64::max(a, *u), f64::max(b, *v))))
        })
        .collect::<Result<_>>()?;
    let tau_sup: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let tau2_sup: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(ScalingReport {
        scales: scales.to_vec(),
        slope_tau: log_log_slope(scales, &tau_sup),
        slope_tau2: log_log_slope(scales, &tau2_sup),
        tau_sup,
        tau2_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt() -> PointState {
        PointState::new(vec![0.4, 0.6], vec![0.9, -0.3])
    }

    #[test]
    fn zero_perturbation_gives_zero_b_and_tension() {
        let s = PerturbationSetup::new(Chart::unit_box(2), &[["1 + x1^2", "0"], ["0", "2"]], "0").unwrap();
        let b = b_field(&s, &pt()).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-14));
        let r = identity_tension(&s, &pt()).unwrap();
        assert!(r.via_b.iter().chain(&r.via_connections).chain(&r.via_general).all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn covector_prediction() {
        let s = PerturbationSetup::euclidean(Chart::unit_box(2), "0")
            .unwrap()
            .with_covector(&["0.3", "0"])
            .unwrap();
        let (_, pred) = covector_condition_residual(&s, &pt()).unwrap();
        assert_eq!(pred, vec![-0.3, 0.0]);
        let bare = PerturbationSetup::euclidean(Chart::unit_box(2), "0").unwrap();
        assert!(matches!(covector_condition_residual(&bare, &pt()), Err(Error::Prerequisite(_))));
    }

    #[test]
    fn slope_of_power_law() {
        let c = [1e-2, 5e-3, 2.5e-3];
        let v: Vec<f64> = c.iter().map(|x| 3.0 * x * x).collect();
        assert!((log_log_slope(&c, &v).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&c, &[1.0, 0.0, 1.0]), None);
    }
}
