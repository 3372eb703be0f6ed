//! Riemannian codomain: Levi-Civita symbols, curvature and its covariant derivative.
//!
//! Curvature components use the layout
//! `R_β^α_γδ = ∂_δ γ^α_βγ − ∂_γ γ^α_βδ + γ^μ_βγ γ^α_μδ − γ^μ_βδ γ^α_μγ`,
//! stored `[β][α][γ][δ]`, and act on vectors as
//! `R(X, Y)Z^α = R_β^α_γδ Z^β Y^γ X^δ`. With this wiring
//! `R(X, Y) = ∇_X ∇_Y − ∇_Y ∇_X − ∇_[X,Y]`, so the unit sphere satisfies
//! `R(X, Y)Z = ⟨Y, Z⟩X − ⟨X, Z⟩Y` and has sectional curvature `+1`, and the
//! Ricci identity reads `D_ρ D_γ Z^α − D_γ D_ρ Z^α = R_β^α_γρ Z^β`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{indexed_vars, Expr, Node};
use crate::finsler::parse_matrix;
use crate::jet::{inverse_and_determinant, Jet, JetSpace, MAX_ORDER};

pub type Mat = Vec<Vec<Jet>>;
pub type T3 = Vec<Vec<Vec<Jet>>>;
pub type T4 = Vec<Vec<Vec<Vec<Jet>>>>;
pub type T5 = Vec<T4>;

#[derive(Debug, Clone, PartialEq)]
pub enum RiemannDefinition {
    Euclidean,
    /// Stereographic chart of the round sphere of radius `radius`.
    Sphere { radius: f64 },
    /// `g̃_αβ(x̃)` over `x1..xñ`.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannStructure {
    dim: usize,
    definition: RiemannDefinition,
    metric: Vec<Vec<Expr>>,
}

impl RiemannStructure {
    pub fn euclidean(dim: usize) -> RiemannStructure {
        let vars = indexed_vars("x", dim);
        let metric = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| Expr::constant(&vars, if a == b { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        RiemannStructure {
            dim,
            definition: RiemannDefinition::Euclidean,
            metric,
        }
    }

    /// `g̃_αβ = 4ρ⁴ δ_αβ / (ρ² + |x̃|²)²`.
    pub fn sphere(dim: usize, radius: f64) -> Result<RiemannStructure> {
        if !(radius > 0.0) {
            return Err(Error::InvalidStructure(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        let vars = indexed_vars("x", dim);
        let r2 = radius * radius;
        let mut sum = Node::Const(r2);
        for k in 0..dim {
            sum = Node::Add(
                Box::new(sum),
                Box::new(Node::PowI(Box::new(Node::Var(k)), 2)),
            );
        }
        let factor = Node::Div(
            Box::new(Node::Const(4.0 * r2 * r2)),
            Box::new(Node::PowI(Box::new(sum), 2)),
        );
        let metric = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| {
                        if a == b {
                            Expr::new(vars.clone(), factor.clone())
                        } else {
                            Expr::constant(&vars, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(RiemannStructure {
            dim,
            definition: RiemannDefinition::Sphere { radius },
            metric,
        })
    }

    /// A metric given by expressions in `x1..xñ` only.
    pub fn custom<S: AsRef<str>, R: AsRef<[S]>>(metric: &[R]) -> Result<RiemannStructure> {
        let dim = metric.len();
        if dim == 0 {
            return Err(Error::InvalidStructure("empty codomain metric".into()));
        }
        let metric = parse_matrix(metric, &indexed_vars("x", dim))?;
        RiemannStructure::from_exprs(metric)
    }

    pub fn from_exprs(metric: Vec<Vec<Expr>>) -> Result<RiemannStructure> {
        let dim = metric.len();
        if metric.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidStructure("codomain metric is not square".into()));
        }
        Ok(RiemannStructure {
            dim,
            definition: RiemannDefinition::Custom,
            metric,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn definition(&self) -> &RiemannDefinition {
        &self.definition
    }

    pub fn metric_exprs(&self) -> &[Vec<Expr>] {
        &self.metric
    }

    pub fn is_flat_preset(&self) -> bool {
        self.definition == RiemannDefinition::Euclidean
    }

    /// Constant sectional curvature of a space-form preset.
    pub fn space_form_curvature(&self) -> Option<f64> {
        match self.definition {
            RiemannDefinition::Euclidean => Some(0.0),
            RiemannDefinition::Sphere { radius } => Some(1.0 / (radius * radius)),
            RiemannDefinition::Custom => None,
        }
    }

    pub fn metric_value(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.metric
            .iter()
            .map(|r| r.iter().map(|e| e.eval(x)).collect())
            .collect()
    }

    /// Seeded symmetry and positive-definiteness checks.
    pub fn validate(&self, points: &[Vec<f64>]) -> Result<()> {
        for x in points {
            let g = self.metric_value(x)?;
            for a in 0..self.dim {
                for b in 0..a {
                    if (g[a][b] - g[b][a]).abs() > 1e-12 * (g[a][b].abs() + 1.0) {
                        return Err(Error::InvalidStructure(format!(
                            "codomain metric not symmetric at {x:?}"
                        )));
                    }
                }
            }
            crate::finsler::check_metric(&g)
                .map_err(|_| Error::InvalidStructure(format!("codomain metric not positive definite at {x:?}")))?;
        }
        Ok(())
    }
}

/// Jets of the codomain geometry at one point, in the variables `x1..xñ`.
pub struct RiemannJets {
    dim: usize,
    space: Arc<JetSpace>,
    g: Mat,
    ginv: Mat,
    gamma: T3,
    curvature: T4,
}

impl RiemannJets {
    pub fn new(rs: &RiemannStructure, x: &[f64], order: usize) -> Result<RiemannJets> {
        let d = rs.dim;
        assert_eq!(x.len(), d, "codomain point dimension");
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                requested: order,
                max: MAX_ORDER,
            });
        }
        let space = JetSpace::get(d, order);
        let vars: Vec<Jet> = (0..d).map(|a| Jet::variable(&space, a, x[a])).collect();
        let mut g: Mat = vec![Vec::with_capacity(d); d];
        for a in 0..d {
            for b in 0..d {
                let v = if b < a {
                    g[b][a].clone()
                } else {
                    rs.metric[a][b].eval_jets(&vars)?
                };
                g[a].push(v);
            }
        }
        let values: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(Jet::value).collect()).collect();
        crate::finsler::check_metric(&values)?;
        let (ginv, _) = inverse_and_determinant(&g)?;
        let mut rj = RiemannJets {
            dim: d,
            space,
            g,
            ginv,
            gamma: Vec::new(),
            curvature: Vec::new(),
        };
        if order >= 1 {
            let dg: T3 = (0..d)
                .map(|c| {
                    (0..d)
                        .map(|a| (0..d).map(|b| rj.g[a][b].derivative(c)).collect())
                        .collect()
                })
                .collect();
            let mut gamma: T3 = vec![vec![Vec::with_capacity(d); d]; d];
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let v = if c < b {
                            gamma[a][c][b].clone()
                        } else {
                            let mut acc = Jet::zero(&rj.space);
                            for m in 0..d {
                                let low = &(&dg[b][m][c] + &dg[c][m][b]) - &dg[m][b][c];
                                acc.add_product(&rj.ginv[a][m], &low);
                            }
                            acc.scale(0.5)
                        };
                        gamma[a][b].push(v);
                    }
                }
            }
            rj.gamma = gamma;
        }
        if order >= 2 {
            rj.curvature = curvature_from_gamma(&rj.gamma, &|j: &Jet, c| j.derivative(c));
        }
        Ok(rj)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn g(&self) -> &Mat {
        &self.g
    }

    pub fn g_inv(&self) -> &Mat {
        &self.ginv
    }

    /// `γ^α_βγ`, indexed `[α][β][γ]`.
    pub fn gamma(&self) -> &T3 {
        assert!(!self.gamma.is_empty(), "jet order exhausted: Christoffel symbols need order 1");
        &self.gamma
    }

    /// `R_β^α_γδ`, indexed `[β][α][γ][δ]`.
    pub fn curvature(&self) -> &T4 {
        assert!(!self.curvature.is_empty(), "jet order exhausted: curvature needs order 2");
        &self.curvature
    }

    /// `∇_μ R_β^α_γδ`, indexed `[μ][β][α][γ][δ]`.
    pub fn nabla_curvature(&self) -> T5 {
        let r = self.curvature();
        let gam = &self.gamma;
        nabla_from(r, gam, &|j: &Jet, c| j.derivative(c))
    }
}

/// Curvature from Christoffel jets, with `d(j, c)` the coordinate derivative.
pub(crate) fn curvature_from_gamma(gam: &T3, d: &dyn Fn(&Jet, usize) -> Jet) -> T4 {
    let n = gam.len();
    (0..n)
        .map(|b| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|c| {
                            (0..n)
                                .map(|e| {
                                    let mut r = &d(&gam[a][b][c], e) - &d(&gam[a][b][e], c);
                                    for m in 0..n {
                                        r.add_product(&gam[m][b][c], &gam[a][m][e]);
                                        let t = &gam[m][b][e] * &gam[a][m][c];
                                        r -= &t;
                                    }
                                    r
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub(crate) fn nabla_from(r: &T4, gam: &T3, d: &dyn Fn(&Jet, usize) -> Jet) -> T5 {
    let n = gam.len();
    (0..n)
        .map(|mu| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|a| {
                            (0..n)
                                .map(|c| {
                                    (0..n)
                                        .map(|e| {
                                            let mut v = d(&r[b][a][c][e], mu);
                                            for l in 0..n {
                                                v.add_product(&gam[a][mu][l], &r[b][l][c][e]);
                                                let t = &(&(&gam[l][mu][b] * &r[l][a][c][e])
                                                    + &(&gam[l][mu][c] * &r[b][a][l][e]))
                                                    + &(&gam[l][mu][e] * &r[b][a][c][l]);
                                                v -= &t;
                                            }
                                            v
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `R(X, Y)Z^α = R_β^α_γδ Z^β Y^γ X^δ` on jet-valued vectors.
pub fn apply_curvature(r: &T4, x: &[Jet], y: &[Jet], z: &[Jet]) -> Vec<Jet> {
    let n = r.len();
    let space = x[0].space().clone();
    (0..n)
        .map(|a| {
            let mut acc = Jet::zero(&space);
            for b in 0..n {
                for c in 0..n {
                    let zy = &z[b] * &y[c];
                    for e in 0..n {
                        let w = &zy * &x[e];
                        acc.add_product(&r[b][a][c][e], &w);
                    }
                }
            }
            acc
        })
        .collect()
}

/// `R(X, Y)Z` on plain vectors.
pub fn apply_curvature_values(r: &[Vec<Vec<Vec<f64>>>], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let n = r.len();
    (0..n)
        .map(|a| {
            let mut acc = 0.0;
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        acc += r[b][a][c][e] * z[b] * y[c] * x[e];
                    }
                }
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureField {
    /// `R_β^α_γδ`, indexed `[β][α][γ][δ]`.
    pub r: Vec<Vec<Vec<Vec<f64>>>>,
    /// `∇_μ R_β^α_γδ`, indexed `[μ][β][α][γ][δ]`.
    pub nabla_r: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

pub fn christoffel(rs: &RiemannStructure, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let rj = RiemannJets::new(rs, x, 1)?;
    Ok(rj
        .gamma()
        .iter()
        .map(|a| a.iter().map(|b| b.iter().map(Jet::value).collect()).collect())
        .collect())
}

pub fn curvature(rs: &RiemannStructure, x: &[f64]) -> Result<CurvatureField> {
    let rj = RiemannJets::new(rs, x, 3)?;
    let v4 = |t: &T4| -> Vec<Vec<Vec<Vec<f64>>>> {
        t.iter()
            .map(|a| {
                a.iter()
                    .map(|b| b.iter().map(|c| c.iter().map(Jet::value).collect()).collect())
                    .collect()
            })
            .collect()
    };
    Ok(CurvatureField {
        r: v4(rj.curvature()),
        nabla_r: rj.nabla_curvature().iter().map(v4).collect(),
    })
}

/// `K = ⟨R(X, Y)Y, X⟩ / (|X|²|Y|² − ⟨X, Y⟩²)`.
pub fn sectional_curvature(rs: &RiemannStructure, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let field = curvature(rs, x)?;
    let g = rs.metric_value(x)?;
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            for j in 0..b.len() {
                s += g[i][j] * a[i] * b[j];
            }
        }
        s
    };
    let area = ip(u, u) * ip(v, v) - ip(u, v).powi(2);
    if !(area > 1e-14 * ip(u, u) * ip(v, v)) {
        return Err(Error::DegeneratePlane);
    }
    let ruv = apply_curvature_values(&field.r, u, v, v);
    Ok(ip(&ruv, u) / area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_is_flat() {
        let rs = RiemannStructure::euclidean(2);
        let c = curvature(&rs, &[0.3, -0.2]).unwrap();
        assert!(c.r.iter().flatten().flatten().flatten().all(|v| *v == 0.0));
        assert!(christoffel(&rs, &[0.3, -0.2])
            .unwrap()
            .iter()
            .flatten()
            .flatten()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn sphere_symbols_vanish_at_origin() {
        let rs = RiemannStructure::sphere(2, 1.0).unwrap();
        let g = christoffel(&rs, &[0.0, 0.0]).unwrap();
        assert!(g.iter().flatten().flatten().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn hand_christoffel() {
        let rs = RiemannStructure::custom(&[["1", "0"], ["0", "1 + x1^2"]]).unwrap();
        let x1 = 0.7f64;
        let g = christoffel(&rs, &[x1, 0.4]).unwrap();
        let want = x1 / (1.0 + x1 * x1);
        assert!((g[1][0][1] - want).abs() < 1e-10 * want);
        assert!((g[1][1][0] - want).abs() < 1e-10 * want);
    }

    #[test]
    fn sphere_sectional_curvature() {
        let rs = RiemannStructure::sphere(2, 1.0).unwrap();
        let k = sectional_curvature(&rs, &[0.4, -0.9], &[1.0, 0.3], &[-0.2, 1.0]).unwrap();
        assert!((k - 1.0).abs() < 1e-10, "{k}");
        assert!(matches!(
            sectional_curvature(&rs, &[0.4, -0.9], &[1.0, 2.0], &[2.0, 4.0]),
            Err(Error::DegeneratePlane)
        ));
    }
}
