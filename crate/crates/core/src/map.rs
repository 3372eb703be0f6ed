//! Maps from a Finsler domain into a Riemannian codomain.
//!
//! Sections of the pullback bundle are carried as jets `S^α(x, y)` in the
//! domain variables. The pullback connection is
//! `D_i S^α = δ_i S^α + γ̃^α_βγ(φ(x)) φ^β_{,i} S^γ`.
//!
//! Coordinate form of the tension used throughout:
//! `τ^α = g^ij (φ^α_{,ij} + γ̃^α_βγ φ^β_{,i} φ^γ_{,j} − Γ^k_ij φ^α_{,k} − P_i φ^α_{,j})`,
//! which is `g^ij (D_i dφ(δ_j) − dφ(D_{δ_i} δ_j) − P_i dφ(δ_j))` expanded with
//! `δ_i φ = ∂_i φ` (the map does not depend on `y`).
//!
//! Operators:
//! * `Δ S = g^ij (−D_i D_j S + Γ^k_ij D_k S + P_i D_j S)`
//! * `J S = −Δ S − g^ij R̃(dφ_i, S) dφ_j`
//! * `τ₂ = J τ`

use std::cell::OnceCell;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{indexed_vars, parse, Expr};
use crate::finsler::{xy_vars, DomainJets, FinslerStructure, PointState};
use crate::jet::{Composer, Jet, JetSpace};
use crate::riemann::{apply_curvature, RiemannJets, RiemannStructure, T3, T4, T5};

/// Jet order used for bitension-level quantities.
pub const ORDER_BITENSION: usize = 6;
/// Jet order used for tension-level quantities.
pub const ORDER_TENSION: usize = 4;

/// Variables of map and family expressions: `x1..xn, eps1, eps2`.
pub fn map_vars(n: usize) -> Vec<String> {
    let mut v = indexed_vars("x", n);
    v.push("eps1".into());
    v.push("eps2".into());
    v
}

/// `φ^α(x)`, possibly with the variation parameters frozen at fixed values.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    n: usize,
    components: Vec<Expr>,
    eps: [f64; 2],
}

impl SmoothMap {
    /// Components over `x1..xn` (the parameters `eps1`, `eps2` may appear and are 0).
    pub fn new<S: AsRef<str>>(n: usize, components: &[S]) -> Result<SmoothMap> {
        let vars = map_vars(n);
        let components = components
            .iter()
            .map(|s| parse(s.as_ref(), &vars))
            .collect::<Result<Vec<_>>>()?;
        if components.is_empty() {
            return Err(Error::InvalidStructure("a map needs at least one component".into()));
        }
        Ok(SmoothMap {
            n,
            components,
            eps: [0.0, 0.0],
        })
    }

    pub fn identity(n: usize) -> SmoothMap {
        let names = indexed_vars("x", n);
        SmoothMap::new(n, &names).unwrap()
    }

    pub fn domain_dim(&self) -> usize {
        self.n
    }

    pub fn codomain_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eps(&self) -> [f64; 2] {
        self.eps
    }

    pub fn with_eps(&self, e1: f64, e2: f64) -> SmoothMap {
        SmoothMap {
            eps: [e1, e2],
            ..self.clone()
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut args = x.to_vec();
        args.extend(self.eps);
        self.components.iter().map(|c| c.eval(&args)).collect()
    }

    /// Component jets, given jets of `x1..xn` in any space.
    pub fn jets(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let space = x[0].space();
        let mut args = x.to_vec();
        args.push(Jet::constant(space, self.eps[0]));
        args.push(Jet::constant(space, self.eps[1]));
        self.components.iter().map(|c| c.eval_jets(&args)).collect()
    }

    /// `φ^α_{,i}` at `x`, indexed `[α][i]`.
    pub fn differential(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let space = JetSpace::get(self.n, 1);
        let xs: Vec<Jet> = (0..self.n).map(|i| Jet::variable(&space, i, x[i])).collect();
        Ok(self
            .jets(&xs)?
            .iter()
            .map(|j| j.coefficients()[1..].to_vec())
            .collect())
    }
}

/// `f^α(eps1, eps2, x)` with `f(0, 0, ·)` the base map.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationFamily {
    family: SmoothMap,
}

impl VariationFamily {
    pub fn new<S: AsRef<str>>(n: usize, components: &[S]) -> Result<VariationFamily> {
        Ok(VariationFamily {
            family: SmoothMap::new(n, components)?,
        })
    }

    /// `φ + eps1·v1 + eps2·v2` in coordinates.
    pub fn linear(base: &SmoothMap, v1: &[&str], v2: &[&str]) -> Result<VariationFamily> {
        let n = base.domain_dim();
        let comps: Vec<String> = base
            .components()
            .iter()
            .enumerate()
            .map(|(a, c)| {
                let mut s = format!("({c})");
                if let Some(v) = v1.get(a) {
                    s.push_str(&format!(" + eps1*({v})"));
                }
                if let Some(v) = v2.get(a) {
                    s.push_str(&format!(" + eps2*({v})"));
                }
                s
            })
            .collect();
        VariationFamily::new(n, &comps)
    }

    pub fn at(&self, e1: f64, e2: f64) -> SmoothMap {
        self.family.with_eps(e1, e2)
    }

    pub fn base(&self) -> SmoothMap {
        self.at(0.0, 0.0)
    }

    /// Check `|f(0, 0, x) − φ(x)| ≤ 1e-12` at the given points.
    pub fn check_base(&self, base: &SmoothMap, points: &[Vec<f64>]) -> Result<f64> {
        let b = self.base();
        let mut worst: f64 = 0.0;
        for x in points {
            let (u, v) = (b.value(x)?, base.value(x)?);
            for (p, q) in u.iter().zip(&v) {
                worst = worst.max((p - q).abs());
            }
        }
        if worst > 1e-12 {
            return Err(Error::InvalidStructure(format!(
                "variation does not start at the base map (deviation {worst:.3e})"
            )));
        }
        Ok(worst)
    }

    /// Deviation field `V^α_k = ∂f^α/∂eps_k` at `eps = 0`, as jets in the domain space.
    pub fn deviation(&self, which: usize, dj: &DomainJets) -> Result<Vec<Jet>> {
        assert!(which < 2);
        let n = self.family.n;
        let order = dj.order();
        let space = JetSpace::get(n + 1, order + 1);
        let x0: Vec<f64> = dj.x().iter().map(Jet::value).collect();
        let mut args: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, i, x0[i])).collect();
        for k in 0..2 {
            args.push(if k == which {
                Jet::variable(&space, n, 0.0)
            } else {
                Jet::constant(&space, 0.0)
            });
        }
        let mut map: Vec<Option<usize>> = (0..n).map(Some).collect();
        map.push(None);
        self.family
            .components
            .iter()
            .map(|c| {
                let f = c.eval_jets(&args)?;
                Ok(f.derivative(n).reindex(dj.space(), &map))
            })
            .collect()
    }

    /// `∂²f^α/∂eps1∂eps2` at `eps = 0`, as jets in the domain space.
    pub fn mixed_deviation(&self, dj: &DomainJets) -> Result<Vec<Jet>> {
        let n = self.family.n;
        let order = dj.order();
        let space = JetSpace::get(n + 2, order + 2);
        let x0: Vec<f64> = dj.x().iter().map(Jet::value).collect();
        let mut args: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, i, x0[i])).collect();
        args.push(Jet::variable(&space, n, 0.0));
        args.push(Jet::variable(&space, n + 1, 0.0));
        let mut map: Vec<Option<usize>> = (0..n).map(Some).collect();
        map.push(None);
        map.push(None);
        self.family
            .components
            .iter()
            .map(|c| {
                let f = c.eval_jets(&args)?;
                Ok(f.derivative(n).derivative(n + 1).reindex(dj.space(), &map))
            })
            .collect()
    }
}

/// A section `S^α(x, y)` given by expressions over `x1..xn, y1..yn`.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackSection {
    components: Vec<Expr>,
}

impl PullbackSection {
    pub fn new<S: AsRef<str>>(n: usize, components: &[S]) -> Result<PullbackSection> {
        let vars = xy_vars(n);
        Ok(PullbackSection {
            components: components
                .iter()
                .map(|s| parse(s.as_ref(), &vars))
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn jets(&self, dj: &DomainJets) -> Result<Vec<Jet>> {
        let args: Vec<Jet> = dj.x().iter().chain(dj.y()).cloned().collect();
        self.components.iter().map(|c| c.eval_jets(&args)).collect()
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let args: Vec<f64> = x.iter().chain(y).copied().collect();
        self.components.iter().map(|c| c.eval(&args)).collect()
    }
}

/// Everything needed for map calculus at one point `(x, y)`.
pub struct MapPoint<'a> {
    dj: DomainJets,
    rs: &'a RiemannStructure,
    phi: Vec<Jet>,
    dphi: Vec<Vec<Jet>>,
    gt: Vec<Vec<Jet>>,
    gamma: T3,
    codomain: Option<(RiemannJets, Composer)>,
    curvature: OnceCell<T4>,
    nabla: OnceCell<T5>,
}

fn zeros(space: &Arc<JetSpace>, d: usize) -> Vec<Jet> {
    vec![Jet::zero(space); d]
}

impl<'a> MapPoint<'a> {
    pub fn new(
        fs: &FinslerStructure,
        rs: &'a RiemannStructure,
        map: &SmoothMap,
        p: &PointState,
        order: usize,
    ) -> Result<MapPoint<'a>> {
        if map.domain_dim() != fs.dim() || map.codomain_dim() != rs.dim() {
            return Err(Error::InvalidStructure(format!(
                "map {}→{} does not match structures {}→{}",
                map.domain_dim(),
                map.codomain_dim(),
                fs.dim(),
                rs.dim()
            )));
        }
        let dj = DomainJets::new(fs, p, order)?;
        MapPoint::with_domain(dj, rs, map)
    }

    pub fn with_domain(
        dj: DomainJets,
        rs: &'a RiemannStructure,
        map: &SmoothMap,
    ) -> Result<MapPoint<'a>> {
        let d = rs.dim();
        let n = dj.dim();
        let space = dj.space().clone();
        let phi = map.jets(dj.x())?;
        let dphi: Vec<Vec<Jet>> = phi
            .iter()
            .map(|f| (0..n).map(|i| f.derivative(i)).collect())
            .collect();
        let (gt, gamma, codomain) = if rs.is_flat_preset() {
            let gt = (0..d)
                .map(|a| {
                    (0..d)
                        .map(|b| Jet::constant(&space, if a == b { 1.0 } else { 0.0 }))
                        .collect()
                })
                .collect();
            let gamma = vec![vec![zeros(&space, d); d]; d];
            (gt, gamma, None)
        } else {
            let x0: Vec<f64> = phi.iter().map(Jet::value).collect();
            let rj = RiemannJets::new(rs, &x0, dj.order())?;
            let comp = Composer::new(&phi, dj.order());
            let gt = rj
                .g()
                .iter()
                .map(|r| r.iter().map(|j| comp.compose(j)).collect())
                .collect();
            let gamma = rj
                .gamma()
                .iter()
                .map(|a| a.iter().map(|b| b.iter().map(|j| comp.compose(j)).collect()).collect())
                .collect();
            (gt, gamma, Some((rj, comp)))
        };
        Ok(MapPoint {
            dj,
            rs,
            phi,
            dphi,
            gt,
            gamma,
            codomain,
            curvature: OnceCell::new(),
            nabla: OnceCell::new(),
        })
    }

    pub fn domain(&self) -> &DomainJets {
        &self.dj
    }

    pub fn codomain(&self) -> &RiemannStructure {
        self.rs
    }

    pub fn phi(&self) -> &[Jet] {
        &self.phi
    }

    fn n(&self) -> usize {
        self.dj.dim()
    }

    fn d(&self) -> usize {
        self.rs.dim()
    }

    fn space(&self) -> &Arc<JetSpace> {
        self.dj.space()
    }

    /// `dφ(δ_i)` as a section.
    pub fn dphi(&self, i: usize) -> Vec<Jet> {
        self.dphi.iter().map(|r| r[i].clone()).collect()
    }

    /// `g̃_αβ(φ(x))`.
    pub fn codomain_metric(&self) -> &[Vec<Jet>] {
        &self.gt
    }

    /// `γ̃^α_βγ(φ(x))`.
    pub fn codomain_gamma(&self) -> &T3 {
        &self.gamma
    }

    /// `R̃_β^α_γδ(φ(x))`.
    pub fn codomain_curvature(&self) -> &T4 {
        self.curvature.get_or_init(|| {
            let d = self.d();
            match &self.codomain {
                None => vec![vec![vec![zeros(self.space(), d); d]; d]; d],
                Some((rj, comp)) => rj
                    .curvature()
                    .iter()
                    .map(|a| {
                        a.iter()
                            .map(|b| b.iter().map(|c| c.iter().map(|j| comp.compose(j)).collect()).collect())
                            .collect()
                    })
                    .collect(),
            }
        })
    }

    /// `∇_μ R̃_β^α_γδ(φ(x))`.
    pub fn codomain_nabla_curvature(&self) -> &T5 {
        self.nabla.get_or_init(|| {
            let d = self.d();
            match &self.codomain {
                None => vec![vec![vec![vec![zeros(self.space(), d); d]; d]; d]; d],
                Some((rj, comp)) => rj
                    .nabla_curvature()
                    .iter()
                    .map(|m| {
                        m.iter()
                            .map(|a| {
                                a.iter()
                                    .map(|b| {
                                        b.iter().map(|c| c.iter().map(|j| comp.compose(j)).collect()).collect()
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            }
        })
    }

    /// `⟨A, B⟩ = g̃_αβ A^α B^β`.
    pub fn inner(&self, a: &[Jet], b: &[Jet]) -> Jet {
        let mut acc = Jet::zero(self.space());
        for al in 0..self.d() {
            for be in 0..self.d() {
                let t = &a[al] * &b[be];
                acc.add_product(&self.gt[al][be], &t);
            }
        }
        acc
    }

    /// `g^ij M_ij` for section-valued `M`.
    fn trace<F: FnMut(usize, usize) -> Vec<Jet>>(&self, mut f: F) -> Vec<Jet> {
        let ginv = self.dj.g_inv();
        let mut acc = zeros(self.space(), self.d());
        for i in 0..self.n() {
            for j in 0..self.n() {
                let m = f(i, j);
                for (a, v) in acc.iter_mut().zip(&m) {
                    a.add_product(&ginv[i][j], v);
                }
            }
        }
        acc
    }

    /// Pullback covariant derivative `D_i S`.
    pub fn cov_deriv(&self, s: &[Jet], i: usize) -> Vec<Jet> {
        let d = self.d();
        (0..d)
            .map(|a| {
                let mut r = self.dj.delta(&s[a], i);
                for b in 0..d {
                    for c in 0..d {
                        let t = &self.dphi[b][i] * &s[c];
                        r.add_product(&self.gamma[a][b][c], &t);
                    }
                }
                r
            })
            .collect()
    }

    /// Tension from the expanded coordinate formula.
    pub fn tension(&self) -> Vec<Jet> {
        let n = self.n();
        let d = self.d();
        let gam = self.dj.gamma();
        let p = self.dj.torsion_trace();
        self.trace(|i, j| {
            (0..d)
                .map(|a| {
                    let mut r = self.dphi[a][j].derivative(i);
                    for b in 0..d {
                        for c in 0..d {
                            let t = &self.dphi[b][i] * &self.dphi[c][j];
                            r.add_product(&self.gamma[a][b][c], &t);
                        }
                    }
                    for k in 0..n {
                        let t = &gam[k][i][j] * &self.dphi[a][k];
                        r -= &t;
                    }
                    let t = &p[i] * &self.dphi[a][j];
                    r -= &t;
                    r
                })
                .collect()
        })
    }

    /// Tension assembled from `D_i dφ(δ_j) − dφ(D_{δ_i} δ_j) − P_i dφ(δ_j)`.
    pub fn tension_structural(&self) -> Vec<Jet> {
        let n = self.n();
        let gam = self.dj.gamma();
        let p = self.dj.torsion_trace();
        let cols: Vec<Vec<Jet>> = (0..n).map(|j| self.dphi(j)).collect();
        self.trace(|i, j| {
            let mut r = self.cov_deriv(&cols[j], i);
            for k in 0..n {
                for (ra, ca) in r.iter_mut().zip(&cols[k]) {
                    let t = &gam[k][i][j] * ca;
                    *ra -= &t;
                }
            }
            for (ra, ca) in r.iter_mut().zip(&cols[j]) {
                let t = &p[i] * ca;
                *ra -= &t;
            }
            r
        })
    }

    /// `Δ S = g^ij (−D_i D_j S + Γ^k_ij D_k S + P_i D_j S)`.
    pub fn rough_laplacian(&self, s: &[Jet]) -> Vec<Jet> {
        let n = self.n();
        let gam = self.dj.gamma();
        let p = self.dj.torsion_trace();
        let ds: Vec<Vec<Jet>> = (0..n).map(|j| self.cov_deriv(s, j)).collect();
        self.trace(|i, j| {
            let mut r: Vec<Jet> = self.cov_deriv(&ds[j], i).into_iter().map(|v| -v).collect();
            for k in 0..n {
                for (ra, dk) in r.iter_mut().zip(&ds[k]) {
                    ra.add_product(&gam[k][i][j], dk);
                }
            }
            for (ra, dj) in r.iter_mut().zip(&ds[j]) {
                ra.add_product(&p[i], dj);
            }
            r
        })
    }

    /// `g^ij R̃(dφ_i, S) dφ_j`.
    pub fn curvature_trace(&self, s: &[Jet]) -> Vec<Jet> {
        let r = self.codomain_curvature();
        let cols: Vec<Vec<Jet>> = (0..self.n()).map(|j| self.dphi(j)).collect();
        self.trace(|i, j| apply_curvature(r, &cols[i], s, &cols[j]))
    }

    /// `J S = −Δ S − g^ij R̃(dφ_i, S) dφ_j`.
    pub fn jacobi(&self, s: &[Jet]) -> Vec<Jet> {
        let lap = self.rough_laplacian(s);
        if self.rs.is_flat_preset() {
            return lap.into_iter().map(|v| -v).collect();
        }
        let ct = self.curvature_trace(s);
        lap.iter().zip(&ct).map(|(a, b)| -(a + b)).collect()
    }

    pub fn bitension(&self) -> Vec<Jet> {
        self.jacobi(&self.tension())
    }

    /// Bitension through the space-form law `R̃(X, Y)Z = c(⟨Y, Z⟩X − ⟨X, Z⟩Y)`:
    /// `τ₂ = −Δτ + c(2e τ − g^ij ⟨dφ_i, τ⟩ dφ_j)`.
    pub fn bitension_space_form(&self, c: f64) -> Vec<Jet> {
        let tau = self.tension();
        let lap = self.rough_laplacian(&tau);
        let e = self.energy_density();
        let cols: Vec<Vec<Jet>> = (0..self.n()).map(|j| self.dphi(j)).collect();
        let proj = self.trace(|i, j| {
            let s = self.inner(&cols[i], &tau);
            cols[j].iter().map(|v| &s * v).collect()
        });
        (0..self.d())
            .map(|a| {
                let mut r = -&lap[a];
                let t = (&e * &tau[a]).scale(2.0);
                r += &(&t - &proj[a]).scale(c);
                r
            })
            .collect()
    }

    /// `e = ½ g^ij g̃_αβ φ^α_{,i} φ^β_{,j}`.
    pub fn energy_density(&self) -> Jet {
        let ginv = self.dj.g_inv();
        let cols: Vec<Vec<Jet>> = (0..self.n()).map(|j| self.dphi(j)).collect();
        let mut acc = Jet::zero(self.space());
        for i in 0..self.n() {
            for j in 0..self.n() {
                acc.add_product(&ginv[i][j], &self.inner(&cols[i], &cols[j]));
            }
        }
        acc.scale(0.5)
    }

    /// `(−½Δ‖τ‖², −⟨Δτ, τ⟩ + g^ij ⟨D_i τ, D_j τ⟩)`.
    pub fn weitzenbock(&self) -> (Jet, Jet) {
        let tau = self.tension();
        let norm2 = self.inner(&tau, &tau);
        let lhs = self.dj.horizontal_laplacian(&norm2).scale(-0.5);
        let lap = self.rough_laplacian(&tau);
        let dt: Vec<Vec<Jet>> = (0..self.n()).map(|j| self.cov_deriv(&tau, j)).collect();
        let ginv = self.dj.g_inv();
        let mut rhs = -self.inner(&lap, &tau);
        for i in 0..self.n() {
            for j in 0..self.n() {
                rhs.add_product(&ginv[i][j], &self.inner(&dt[i], &dt[j]));
            }
        }
        (lhs, rhs)
    }

    /// `X^μ ∇_μ R̃`.
    fn directional_nabla(&self, x: &[Jet]) -> T4 {
        let nr = self.codomain_nabla_curvature();
        let d = self.d();
        (0..d)
            .map(|b| {
                (0..d)
                    .map(|a| {
                        (0..d)
                            .map(|c| {
                                (0..d)
                                    .map(|e| {
                                        let mut acc = Jet::zero(self.space());
                                        for (mu, xm) in x.iter().enumerate() {
                                            acc.add_product(xm, &nr[mu][b][a][c][e]);
                                        }
                                        acc
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Bracket of the second-variation integrand applied to `V`:
    /// `J²V + R̃(V, τ)τ + g^ij{(D̃_τ R̃)(V, dφ_i)dφ_j − (D_i R̃)(dφ_j, τ)V
    ///  + 2R̃(V, dφ_i)D_j τ − 2R̃(dφ_i, τ)D_j V}`.
    pub fn hessian_operator(&self, v: &[Jet]) -> Vec<Jet> {
        let tau = self.tension();
        let mut out = self.jacobi(&self.jacobi(v));
        if self.rs.is_flat_preset() {
            return out;
        }
        let r = self.codomain_curvature();
        let n = self.n();
        let cols: Vec<Vec<Jet>> = (0..n).map(|j| self.dphi(j)).collect();
        let dtau: Vec<Vec<Jet>> = (0..n).map(|j| self.cov_deriv(&tau, j)).collect();
        let dv: Vec<Vec<Jet>> = (0..n).map(|j| self.cov_deriv(v, j)).collect();
        let nabla_tau = self.directional_nabla(&tau);
        let nabla_i: Vec<T4> = (0..n).map(|i| self.directional_nabla(&cols[i])).collect();
        let extra = self.trace(|i, j| {
            let a = apply_curvature(&nabla_tau, v, &cols[i], &cols[j]);
            let b = apply_curvature(&nabla_i[i], &cols[j], &tau, v);
            let c = apply_curvature(r, v, &cols[i], &dtau[j]);
            let e = apply_curvature(r, &cols[i], &tau, &dv[j]);
            (0..self.d())
                .map(|al| {
                    let mut s = &a[al] - &b[al];
                    s += &(&c[al] - &e[al]).scale(2.0);
                    s
                })
                .collect()
        });
        let rvt = apply_curvature(r, v, &tau, &tau);
        for al in 0..self.d() {
            out[al] += &rvt[al];
            out[al] += &extra[al];
        }
        out
    }

    /// `⟨V₁, hessian_operator(V₂)⟩`.
    pub fn hessian_integrand(&self, v1: &[Jet], v2: &[Jet]) -> Jet {
        self.inner(v1, &self.hessian_operator(v2))
    }

    /// Covariant derivative of the bitension along `f = φ + εV`:
    /// `D_ε τ₂ = J(JV) + R̃(V, τ)τ + g^ij{(D_i R̃)(V, dφ_j)τ + R̃(D_i V, dφ_j)τ
    ///  + 2R̃(V, dφ_i)D_j τ − (∇_V R̃)(dφ_i, τ)dφ_j − R̃(D_i V, τ)dφ_j − R̃(dφ_i, τ)D_j V}`.
    pub fn bitension_variation(&self, v: &[Jet]) -> Vec<Jet> {
        let tau = self.tension();
        let mut out = self.jacobi(&self.jacobi(v));
        if self.rs.is_flat_preset() {
            return out;
        }
        let r = self.codomain_curvature();
        let n = self.n();
        let cols: Vec<Vec<Jet>> = (0..n).map(|j| self.dphi(j)).collect();
        let dtau: Vec<Vec<Jet>> = (0..n).map(|j| self.cov_deriv(&tau, j)).collect();
        let dv: Vec<Vec<Jet>> = (0..n).map(|j| self.cov_deriv(v, j)).collect();
        let nabla_v = self.directional_nabla(v);
        let nabla_i: Vec<T4> = (0..n).map(|i| self.directional_nabla(&cols[i])).collect();
        let extra = self.trace(|i, j| {
            let t1 = apply_curvature(&nabla_i[i], v, &cols[j], &tau);
            let t2 = apply_curvature(r, &dv[i], &cols[j], &tau);
            let t3 = apply_curvature(r, v, &cols[i], &dtau[j]);
            let t4 = apply_curvature(&nabla_v, &cols[i], &tau, &cols[j]);
            let t5 = apply_curvature(r, &dv[i], &tau, &cols[j]);
            let t6 = apply_curvature(r, &cols[i], &tau, &dv[j]);
            (0..self.d())
                .map(|al| {
                    let mut s = &t1[al] + &t2[al];
                    s += &t3[al].scale(2.0);
                    s -= &t4[al];
                    s -= &t5[al];
                    s -= &t6[al];
                    s
                })
                .collect()
        });
        let rvt = apply_curvature(r, v, &tau, &tau);
        for al in 0..self.d() {
            out[al] += &rvt[al];
            out[al] += &extra[al];
        }
        out
    }
}

fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(Jet::value).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionReport {
    pub tau: Vec<f64>,
    pub tau_norm: f64,
    pub tau2: Option<Vec<f64>>,
    pub tau2_norm: Option<f64>,
    pub energy_density: f64,
}

fn norm_of(mp: &MapPoint<'_>, v: &[Jet]) -> f64 {
    mp.inner(v, v).value().max(0.0).sqrt()
}

pub fn differential(map: &SmoothMap, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    map.differential(x)
}

pub fn tension(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    p: &PointState,
) -> Result<Vec<f64>> {
    let mp = MapPoint::new(fs, rs, map, p, ORDER_TENSION)?;
    Ok(values(&mp.tension()))
}

pub fn bitension(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    p: &PointState,
) -> Result<Vec<f64>> {
    let mp = MapPoint::new(fs, rs, map, p, ORDER_BITENSION)?;
    Ok(values(&mp.bitension()))
}

pub fn energy_density(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    p: &PointState,
) -> Result<f64> {
    Ok(MapPoint::new(fs, rs, map, p, 2)?.energy_density().value())
}

/// `τ`, `τ₂` (when `with_bitension`), their norms and the energy density at `p`.
pub fn tension_report(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    p: &PointState,
    with_bitension: bool,
) -> Result<TensionReport> {
    let order = if with_bitension { ORDER_BITENSION } else { ORDER_TENSION };
    let mp = MapPoint::new(fs, rs, map, p, order)?;
    let tau = mp.tension();
    let (tau2, tau2_norm) = if with_bitension {
        let t2 = mp.jacobi(&tau);
        (Some(values(&t2)), Some(norm_of(&mp, &t2)))
    } else {
        (None, None)
    };
    Ok(TensionReport {
        tau_norm: norm_of(&mp, &tau),
        tau: values(&tau),
        tau2,
        tau2_norm,
        energy_density: mp.energy_density().value(),
    })
}

/// `−½Δ‖τ‖² − (−⟨Δτ, τ⟩ + g^ij⟨D_iτ, D_jτ⟩)` together with both sides.
pub fn weitzenbock_residual(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    p: &PointState,
) -> Result<(f64, f64, f64)> {
    let mp = MapPoint::new(fs, rs, map, p, ORDER_BITENSION)?;
    let (l, r) = mp.weitzenbock();
    Ok((l.value() - r.value(), l.value(), r.value()))
}

pub fn hessian_integrand(
    fs: &FinslerStructure,
    rs: &RiemannStructure,
    map: &SmoothMap,
    v1: &PullbackSection,
    v2: &PullbackSection,
    p: &PointState,
) -> Result<f64> {
    let mp = MapPoint::new(fs, rs, map, p, ORDER_BITENSION)?;
    let a = v1.jets(mp.domain())?;
    let b = v2.jets(mp.domain())?;
    Ok(mp.hessian_integrand(&a, &b).value())
}
