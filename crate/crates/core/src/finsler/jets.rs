use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FinslerStructure, PointState};
use crate::error::{Error, Result};
use crate::jet::{inverse_and_determinant, Jet, JetSpace, MAX_ORDER};

/// Largest accepted condition number of `g_ij`.
pub const MAX_CONDITION: f64 = 1e12;

type Mat = Vec<Vec<Jet>>;
type T3 = Vec<Vec<Vec<Jet>>>;
type T4 = Vec<Vec<Vec<Vec<Jet>>>>;

/// Jets of the domain geometry at one point `(x, y)`, in the variables
/// `(x1..xn, y1..yn)`.
///
/// Quantities that the requested order cannot support are left empty;
/// accessing them panics with "jet order exhausted".
#[derive(Clone)]
pub struct DomainJets {
    n: usize,
    order: usize,
    space: Arc<JetSpace>,
    x: Vec<Jet>,
    y: Vec<Jet>,
    f2: Jet,
    g: Mat,
    ginv: Mat,
    det: Jet,
    spray: Vec<Jet>,
    nonlinear: Mat,
    gamma: T3,
    berwald: T3,
    torsion: T3,
    torsion_trace: Vec<Jet>,
    bracket: T3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricData {
    pub g: Vec<Vec<f64>>,
    pub g_inv: Vec<Vec<f64>>,
    pub det: f64,
    pub y_lower: Vec<f64>,
    pub f2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionData {
    pub spray: Vec<f64>,
    /// `G^i_j`, indexed `[i][j]`.
    pub nonlinear: Vec<Vec<f64>>,
    /// `Γ^i_jk`, indexed `[i][j][k]`.
    pub chern_rund: Vec<Vec<Vec<f64>>>,
    pub berwald: Vec<Vec<Vec<f64>>>,
    pub torsion: Vec<Vec<Vec<f64>>>,
    pub torsion_trace: Vec<f64>,
    /// `R^i_jk`, indexed `[i][j][k]`.
    pub bracket: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    /// `R_j^i_kl`, indexed `[j][i][k][l]`.
    pub hh: Vec<Vec<Vec<Vec<f64>>>>,
    /// `P_j^i_kl = ∂Γ^i_jk/∂y^l`, indexed `[j][i][k][l]`.
    pub hv: Vec<Vec<Vec<Vec<f64>>>>,
}

fn values2(m: &Mat) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(Jet::value).collect()).collect()
}

fn values3(t: &T3) -> Vec<Vec<Vec<f64>>> {
    t.iter().map(values2).collect()
}

fn values4(t: &T4) -> Vec<Vec<Vec<Vec<f64>>>> {
    t.iter().map(values3).collect()
}

fn exhausted<T>(v: &[T], what: &str) {
    assert!(
        !v.is_empty(),
        "jet order exhausted: {what} is not available at this order"
    );
}

/// Condition number of a symmetric positive matrix of base values, or an error.
pub(crate) fn check_metric(g: &[Vec<f64>]) -> Result<f64> {
    let n = g.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| g[i][j]);
    let eig = m.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 0.0) {
        return Err(Error::SingularMetric {
            condition: f64::INFINITY,
        });
    }
    let cond = hi / lo;
    if cond > MAX_CONDITION {
        return Err(Error::SingularMetric { condition: cond });
    }
    Ok(cond)
}

impl DomainJets {
    /// Build the geometry from an order-`order` jet of `F²` at `p`.
    pub fn new(fs: &FinslerStructure, p: &PointState, order: usize) -> Result<DomainJets> {
        let n = fs.dim();
        if p.x.len() != n || p.y.len() != n {
            return Err(Error::Config(format!(
                "point has dimensions ({}, {}), expected ({n}, {n})",
                p.x.len(),
                p.y.len()
            )));
        }
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                requested: order,
                max: MAX_ORDER,
            });
        }
        assert!(order >= 2, "domain geometry needs jets of order at least 2");
        let norm = p.y_norm();
        if norm < fs.r_min() {
            return Err(Error::ZeroSection { norm });
        }
        let space = JetSpace::get(2 * n, order);
        let x: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, i, p.x[i])).collect();
        let y: Vec<Jet> = (0..n)
            .map(|i| Jet::variable(&space, n + i, p.y[i]))
            .collect();
        let f2 = fs.f2_jets(&x, &y)?;

        let f2_y: Vec<Jet> = (0..n).map(|i| f2.derivative(n + i)).collect();
        let mut g: Mat = vec![Vec::with_capacity(n); n];
        for i in 0..n {
            for j in 0..n {
                let gij = if j < i {
                    g[j][i].clone()
                } else {
                    f2_y[i].derivative(n + j).scale(0.5)
                };
                g[i].push(gij);
            }
        }
        check_metric(&values2(&g))?;
        let (ginv, det) = inverse_and_determinant(&g)?;

        let mut dj = DomainJets {
            n,
            order,
            space,
            x,
            y,
            f2,
            g,
            ginv,
            det,
            spray: Vec::new(),
            nonlinear: Vec::new(),
            gamma: Vec::new(),
            berwald: Vec::new(),
            torsion: Vec::new(),
            torsion_trace: Vec::new(),
            bracket: Vec::new(),
        };

        // G^i = ¼ g^ih ((F²)_{·h,k} y^k − (F²)_{,h})
        let w: Vec<Jet> = (0..n)
            .map(|h| {
                let mut acc = -dj.f2.derivative(h);
                for k in 0..n {
                    acc.add_product(&f2_y[h].derivative(k), &dj.y[k]);
                }
                acc
            })
            .collect();
        dj.spray = (0..n).map(|i| dj.raise(i, &w).scale(0.25)).collect();
        if order < 3 {
            return Ok(dj);
        }

        dj.nonlinear = (0..n)
            .map(|i| (0..n).map(|j| dj.spray[i].derivative(n + j)).collect())
            .collect();

        // δ_k g_hj
        let dg: T3 = (0..n)
            .map(|k| {
                (0..n)
                    .map(|h| (0..n).map(|j| dj.delta(&dj.g[h][j], k)).collect())
                    .collect()
            })
            .collect();
        let mut gamma: T3 = vec![vec![Vec::with_capacity(n); n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let gij = if k < j {
                        gamma[i][k][j].clone()
                    } else {
                        let lowered: Vec<Jet> = (0..n)
                            .map(|h| &(&dg[k][h][j] + &dg[j][h][k]) - &dg[h][j][k])
                            .collect();
                        dj.raise(i, &lowered).scale(0.5)
                    };
                    gamma[i][j].push(gij);
                }
            }
        }
        dj.gamma = gamma;
        if order < 4 {
            return Ok(dj);
        }

        dj.berwald = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| dj.nonlinear[i][j].derivative(n + k))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        dj.torsion = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| &dj.berwald[i][j][k] - &dj.gamma[i][j][k]).collect())
                    .collect()
            })
            .collect();
        dj.torsion_trace = (0..n)
            .map(|i| {
                let mut acc = dj.torsion[0][i][0].clone();
                for j in 1..n {
                    acc += &dj.torsion[j][i][j];
                }
                acc
            })
            .collect();
        dj.bracket = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| {
                                &dj.delta(&dj.nonlinear[i][j], k) - &dj.delta(&dj.nonlinear[i][k], j)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(dj)
    }

    /// `g^ih v_h`.
    fn raise(&self, i: usize, v: &[Jet]) -> Jet {
        let mut acc = Jet::zero(&self.space);
        for (h, vh) in v.iter().enumerate() {
            acc.add_product(&self.ginv[i][h], vh);
        }
        acc
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn x(&self) -> &[Jet] {
        &self.x
    }

    pub fn y(&self) -> &[Jet] {
        &self.y
    }

    pub fn f2(&self) -> &Jet {
        &self.f2
    }

    pub fn g(&self) -> &Mat {
        &self.g
    }

    pub fn g_inv(&self) -> &Mat {
        &self.ginv
    }

    pub fn det(&self) -> &Jet {
        &self.det
    }

    pub fn spray(&self) -> &[Jet] {
        &self.spray
    }

    /// `G^i_j = ∂G^i/∂y^j`, indexed `[i][j]`.
    pub fn nonlinear(&self) -> &Mat {
        exhausted(&self.nonlinear, "the nonlinear connection");
        &self.nonlinear
    }

    /// Chern–Rund `Γ^i_jk`, indexed `[i][j][k]`.
    pub fn gamma(&self) -> &T3 {
        exhausted(&self.gamma, "the Chern–Rund connection");
        &self.gamma
    }

    pub fn berwald(&self) -> &T3 {
        exhausted(&self.berwald, "the Berwald connection");
        &self.berwald
    }

    pub fn torsion(&self) -> &T3 {
        exhausted(&self.torsion, "the torsion");
        &self.torsion
    }

    /// `P_i = P^j_ij`.
    pub fn torsion_trace(&self) -> &[Jet] {
        exhausted(&self.torsion_trace, "the torsion trace");
        &self.torsion_trace
    }

    pub fn bracket(&self) -> &T3 {
        exhausted(&self.bracket, "the bracket components");
        &self.bracket
    }

    /// `∂/∂y^i`.
    pub fn vertical(&self, f: &Jet, i: usize) -> Jet {
        f.derivative(self.n + i)
    }

    /// `δ_i f = ∂_i f − G^j_i ∂̇_j f`.
    pub fn delta(&self, f: &Jet, i: usize) -> Jet {
        let nl = self.nonlinear();
        let mut r = f.derivative(i);
        for j in 0..self.n {
            let t = &nl[j][i] * &f.derivative(self.n + j);
            r -= &t;
        }
        r
    }

    /// `δ_i X^i + Γ^i_ki X^k − P_i X^i`.
    pub fn divergence(&self, xs: &[Jet]) -> Jet {
        let gam = self.gamma();
        let p = self.torsion_trace();
        let mut acc = Jet::zero(&self.space);
        for i in 0..self.n {
            acc += &self.delta(&xs[i], i);
            for k in 0..self.n {
                acc.add_product(&gam[i][k][i], &xs[k]);
            }
            let t = &p[i] * &xs[i];
            acc -= &t;
        }
        acc
    }

    /// `(1/det g) δ_i(X^i det g) − G^j_ij X^i`.
    pub fn divergence_density_form(&self, xs: &[Jet]) -> Result<Jet> {
        let bw = self.berwald();
        let mut flux = Jet::zero(&self.space);
        for i in 0..self.n {
            flux += &self.delta(&(&xs[i] * &self.det), i);
        }
        let mut acc = flux.div(&self.det)?;
        for i in 0..self.n {
            for j in 0..self.n {
                let t = &bw[j][i][j] * &xs[i];
                acc -= &t;
            }
        }
        Ok(acc)
    }

    /// Horizontal gradient `g^ij δ_j f`.
    pub fn horizontal_gradient(&self, f: &Jet) -> Vec<Jet> {
        let df: Vec<Jet> = (0..self.n).map(|j| self.delta(f, j)).collect();
        (0..self.n).map(|i| self.raise(i, &df)).collect()
    }

    /// `Δf = −g^ij (δ_i δ_j f − Γ^k_ij δ_k f − P_i δ_j f)`.
    pub fn horizontal_laplacian(&self, f: &Jet) -> Jet {
        let gam = self.gamma();
        let p = self.torsion_trace();
        let df: Vec<Jet> = (0..self.n).map(|j| self.delta(f, j)).collect();
        let mut acc = Jet::zero(&self.space);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut h = self.delta(&df[j], i);
                for k in 0..self.n {
                    let t = &gam[k][i][j] * &df[k];
                    h -= &t;
                }
                let t = &p[i] * &df[j];
                h -= &t;
                acc.add_product(&self.ginv[i][j], &h);
            }
        }
        -acc
    }

    /// hh-curvature `R_j^i_kl` (indexed `[j][i][k][l]`) as jets.
    pub fn hh_curvature(&self) -> T4 {
        let n = self.n;
        let gam = self.gamma();
        assert!(self.order >= 4, "jet order exhausted: curvature needs order 4");
        let dgam: Vec<T3> = (0..n)
            .map(|l| {
                gam.iter()
                    .map(|a| a.iter().map(|b| b.iter().map(|c| self.delta(c, l)).collect()).collect())
                    .collect()
            })
            .collect();
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|k| {
                                (0..n)
                                    .map(|l| {
                                        let mut r = &dgam[l][i][j][k] - &dgam[k][i][j][l];
                                        for h in 0..n {
                                            r.add_product(&gam[h][j][k], &gam[i][h][l]);
                                            let t = &gam[h][j][l] * &gam[i][h][k];
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

    /// hv-curvature `P_j^i_kl = ∂Γ^i_jk/∂y^l`.
    pub fn hv_curvature(&self) -> T4 {
        let n = self.n;
        let gam = self.gamma();
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|k| (0..n).map(|l| self.vertical(&gam[i][j][k], l)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn metric_data(&self) -> MetricData {
        let y_lower = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.g[i][j].value() * self.y[j].value())
                    .sum()
            })
            .collect();
        MetricData {
            g: values2(&self.g),
            g_inv: values2(&self.ginv),
            det: self.det.value(),
            y_lower,
            f2: self.f2.value(),
        }
    }

    pub fn connection_data(&self) -> ConnectionData {
        ConnectionData {
            spray: self.spray.iter().map(Jet::value).collect(),
            nonlinear: values2(self.nonlinear()),
            chern_rund: values3(self.gamma()),
            berwald: values3(self.berwald()),
            torsion: values3(self.torsion()),
            torsion_trace: self.torsion_trace().iter().map(Jet::value).collect(),
            bracket: values3(self.bracket()),
        }
    }

    pub fn curvature_data(&self) -> CurvatureData {
        CurvatureData {
            hh: values4(&self.hh_curvature()),
            hv: values4(&self.hv_curvature()),
        }
    }
}
