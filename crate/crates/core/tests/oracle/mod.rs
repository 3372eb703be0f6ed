//! Reference computations that share no code path with the geometry engine.
#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use bienergy_core::expr::indexed_vars;
use bienergy_core::jet::inverse_and_determinant;
use bienergy_core::{parse, Composer, Jet, JetSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn binomial(m: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Tensor-product central difference for `∂^mi f` at `x` with step `h`.
fn central(f: &dyn Fn(&[f64]) -> f64, x: &[f64], mi: &[u8], h: f64) -> f64 {
    fn rec(f: &dyn Fn(&[f64]) -> f64, x: &mut Vec<f64>, mi: &[u8], h: f64, var: usize) -> f64 {
        if var == mi.len() {
            return f(x);
        }
        let m = mi[var] as u32;
        if m == 0 {
            return rec(f, x, mi, h, var + 1);
        }
        let x0 = x[var];
        let mut acc = 0.0;
        for k in 0..=m {
            x[var] = x0 + (m as f64 / 2.0 - k as f64) * h;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial(m, k) * rec(f, x, mi, h, var + 1);
        }
        x[var] = x0;
        acc / h.powi(m as i32)
    }
    rec(f, &mut x.to_vec(), mi, h, 0)
}

/// `∂^mi f(x)` from central differences at `h, h/2, h/4`, extrapolated twice.
pub fn richardson(f: &dyn Fn(&[f64]) -> f64, x: &[f64], mi: &[u8], h: f64) -> f64 {
    let d: Vec<f64> = (0..3).map(|k| central(f, x, mi, h / 2f64.powi(k))).collect();
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// A random smooth expression in `x1..xn` whose singularities stay off `[-1, 1]^n`.
pub fn random_expr(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.75) {
            format!("x{}", rng.random_range(1..=n))
        } else {
            format!("{:.3}", rng.random_range(-2.0..2.0))
        };
    }
    let a = random_expr(rng, n, depth - 1);
    match rng.random_range(0..11) {
        0 | 1 => format!("({a} + {})", random_expr(rng, n, depth - 1)),
        2 => format!("({a} - {})", random_expr(rng, n, depth - 1)),
        3 | 4 => format!("({a})*({})", random_expr(rng, n, depth - 1)),
        5 => format!("({a})/(2 + ({})^2)", random_expr(rng, n, depth - 1)),
        6 => format!("sin({a})"),
        7 => format!("cos({a})"),
        8 => format!("exp(0.5*({a}))"),
        9 => format!("sqrt(1.5 + ({a})^2)"),
        _ => format!("atan({a})^{}", rng.random_range(1..=3)),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tension, rough Laplacian of the tension and bitension of `φ` between
/// Riemannian metrics, from the classical coordinate formulas.
#[derive(Debug, Clone)]
pub struct Classical {
    pub tau: Vec<f64>,
    pub lap_tau: Vec<f64>,
    pub tau2: Vec<f64>,
}

type M = Vec<Vec<Jet>>;
type T3 = Vec<Vec<Vec<Jet>>>;

fn christoffel(g: &M, dg: &T3) -> T3 {
    // dg[a][b][c] = ∂_a g_bc
    let n = g.len();
    let (ginv, _) = inverse_and_determinant(g).expect("metric is invertible");
    let sp = g[0][0].space().clone();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut acc = Jet::zero(&sp);
                            for l in 0..n {
                                let t = &(&dg[i][j][l] + &dg[j][i][l]) - &dg[l][i][j];
                                acc += &(&ginv[k][l] * &t);
                            }
                            acc.scale(0.5)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn metric_jets(rows: &[Vec<String>], inputs: &[Jet]) -> M {
    let vars = indexed_vars("x", rows.len());
    rows.iter()
        .map(|r| r.iter().map(|s| parse(s, &vars).unwrap().eval_jets(inputs).unwrap()).collect())
        .collect()
}

fn metric_derivatives(g: &M) -> T3 {
    let n = g.len();
    (0..n)
        .map(|a| (0..n).map(|b| (0..n).map(|c| g[b][c].derivative(a)).collect()).collect())
        .collect()
}

fn variables(sp: &Arc<JetSpace>, at: &[f64]) -> Vec<Jet> {
    at.iter().enumerate().map(|(k, v)| Jet::variable(sp, k, *v)).collect()
}

pub fn classical(domain: &[Vec<String>], codomain: &[Vec<String>], map: &[String], x: &[f64]) -> Classical {
    let n = domain.len();
    let m = codomain.len();
    let sx = JetSpace::get(n, 4);
    let xs = variables(&sx, x);
    let g = metric_jets(domain, &xs);
    let (ginv, _) = inverse_and_determinant(&g).unwrap();
    let gam = christoffel(&g, &metric_derivatives(&g));

    let vars = indexed_vars("x", n);
    let phi: Vec<Jet> = map.iter().map(|s| parse(s, &vars).unwrap().eval_jets(&xs).unwrap()).collect();
    let dphi: M = (0..m).map(|a| (0..n).map(|i| phi[a].derivative(i)).collect()).collect();

    let u0: Vec<f64> = phi.iter().map(Jet::value).collect();
    let su = JetSpace::get(m, 5);
    let us = variables(&su, &u0);
    let h = metric_jets(codomain, &us);
    let gt_u = christoffel(&h, &metric_derivatives(&h));
    let comp = Composer::new(&phi, 4);
    let gt: T3 = gt_u
        .iter()
        .map(|a| a.iter().map(|b| b.iter().map(|c| comp.compose(c)).collect()).collect())
        .collect();

    // R^a_{b c d} = ∂_c Γ^a_{d b} − ∂_d Γ^a_{c b} + Γ^a_{c e} Γ^e_{d b} − Γ^a_{d e} Γ^e_{c b}
    let mut rt = vec![vec![vec![vec![0.0; m]; m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let mut r = gt_u[a][d][b].derivative(c).value() - gt_u[a][c][b].derivative(d).value();
                    for e in 0..m {
                        r += gt_u[a][c][e].value() * gt_u[e][d][b].value()
                            - gt_u[a][d][e].value() * gt_u[e][c][b].value();
                    }
                    rt[a][b][c][d] = r;
                }
            }
        }
    }

    let cov = |s: &[Jet], i: usize| -> Vec<Jet> {
        (0..m)
            .map(|a| {
                let mut r = s[a].derivative(i);
                for b in 0..m {
                    for c in 0..m {
                        r += &(&gt[a][b][c] * &(&dphi[b][i] * &s[c]));
                    }
                }
                r
            })
            .collect()
    };

    let tau: Vec<Jet> = (0..m)
        .map(|a| {
            let mut acc = Jet::zero(&sx);
            for i in 0..n {
                for j in 0..n {
                    let mut hess = phi[a].derivative(i).derivative(j);
                    for k in 0..n {
                        hess -= &(&gam[k][i][j] * &dphi[a][k]);
                    }
                    for b in 0..m {
                        for c in 0..m {
                            hess += &(&gt[a][b][c] * &(&dphi[b][i] * &dphi[c][j]));
                        }
                    }
                    acc += &(&ginv[i][j] * &hess);
                }
            }
            acc
        })
        .collect();

    let dtau: Vec<Vec<Jet>> = (0..n).map(|j| cov(&tau, j)).collect();
    let mut lap = vec![0.0; m];
    for i in 0..n {
        for j in 0..n {
            let dij = cov(&dtau[j], i);
            for a in 0..m {
                let mut h2 = dij[a].value();
                for k in 0..n {
                    h2 -= gam[k][i][j].value() * dtau[k][a].value();
                }
                lap[a] -= ginv[i][j].value() * h2;
            }
        }
    }

    let tv: Vec<f64> = tau.iter().map(Jet::value).collect();
    let mut tau2: Vec<f64> = lap.iter().map(|v| -v).collect();
    for i in 0..n {
        for j in 0..n {
            let gij = ginv[i][j].value();
            for a in 0..m {
                let mut r = 0.0;
                for b in 0..m {
                    for c in 0..m {
                        for d in 0..m {
                            r += rt[a][b][c][d] * dphi[b][j].value() * dphi[c][i].value() * tv[d];
                        }
                    }
                }
                tau2[a] -= gij * r;
            }
        }
    }
    Classical { tau: tv, lap_tau: lap, tau2 }
}

/// `max |a − b| / max(max |a|, max |b|, floor)`.
pub fn rel_gap(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = a.iter().chain(b).fold(floor, |s, v| s.max(v.abs()));
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max) / scale
}

pub fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}
