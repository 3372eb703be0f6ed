//! Integration over the unit-ball bundle `BM = {(x, y) : F(x, y) ≤ 1}`.
//!
//! `∫_BM α dV = (1/VolBⁿ) ∫_M ∫_{B_x} α(x, y) det g(x, y) dy dx`, so that
//! `∫_BM 1 = Vol(M)` for a Riemannian metric. The fiber integral is Monte
//! Carlo by rejection from a Euclidean ball of radius
//! `R_x = safety / min_{|u|=1} F(x, u)`; the outer integral is a periodic
//! trapezoid rule on a torus and 4-point Gauss–Legendre panels on a box.
//!
//! Fiber draws are shared by all x-nodes: draw `j` is a point `u_j` of the
//! unit ball taken from ChaCha stream `j`, and node `x` uses `y = R_x u_j`.
//! Sharing correlates the nodes, so the x-sum can cancel exact divergences
//! draw by draw, and the error is estimated from per-draw replicates. Every
//! sample is a pure function of `(seed, draw)`, reductions run in a fixed
//! order, and estimates are bitwise reproducible for any thread count.

mod rules;
mod variational;

pub use rules::gauss_legendre;
pub use variational::{
    bienergy, divergence_theorem_check, energy, first_variation_check, laplacian_vanishing_check,
    random_directions, second_variation_check, self_adjointness_check, stability_check, tension_laplacian_check,
    DivergenceReport, FirstVariationReport, SecondVariationReport, SelfAdjointnessReport, StabilityReport,
};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::finsler::{scan_directions, Chart, FinslerStructure, PointState, DEFAULT_R_MIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Nodes per axis. On a box this is rounded up to whole 4-node panels.
    pub grid: usize,
    /// Fiber draws per x-node.
    pub y_samples: usize,
    pub seed: u64,
    pub r_min: f64,
    /// Bounding-radius safety factor.
    pub safety: f64,
    pub report_stderr: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            grid: 16,
            y_samples: 4096,
            seed: 0,
            r_min: DEFAULT_R_MIN,
            safety: 1.1,
            report_stderr: true,
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl QuadratureSpec {
    pub fn new(grid: usize, y_samples: usize, seed: u64) -> QuadratureSpec {
        QuadratureSpec {
            grid,
            y_samples,
            seed,
            ..QuadratureSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 || self.y_samples < 2 {
            return Err(Error::Config(format!(
                "quadrature resolutions must be at least 2 (grid {}, y_samples {})",
                self.grid, self.y_samples
            )));
        }
        if !(self.safety >= 1.0) || !(self.r_min >= 0.0) {
            return Err(Error::Config(format!(
                "need safety ≥ 1 and r_min ≥ 0 (got {} and {})",
                self.safety, self.r_min
            )));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).unwrap().as_bytes())
    }
}

/// Hash of a domain structure, recorded with every estimate.
pub fn structure_hash(fs: &FinslerStructure) -> String {
    sha256_hex(format!("{fs:?}").as_bytes())
}

/// Volume of the Euclidean unit ball in `ℝⁿ`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XNode {
    pub x: Vec<f64>,
    pub weight: f64,
}

/// Outer quadrature nodes for a chart.
pub fn x_grid(chart: &Chart, grid: usize) -> Vec<XNode> {
    let n = chart.dim();
    let axes: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|i| {
            let (a, b) = chart.bounds(i);
            match chart {
                Chart::Torus { .. } => {
                    let h = (b - a) / grid as f64;
                    (0..grid).map(|k| (a + k as f64 * h, h)).collect()
                }
                Chart::Box { .. } => {
                    let panels = grid.div_ceil(4);
                    let (t, w) = gauss_legendre(4);
                    let width = (b - a) / panels as f64;
                    (0..panels)
                        .flat_map(|p| {
                            let lo = a + p as f64 * width;
                            t.iter()
                                .zip(&w)
                                .map(move |(u, v)| (lo + 0.5 * width * (u + 1.0), 0.5 * width * v))
                                .collect::<Vec<_>>()
                        })
                        .collect()
                }
            }
        })
        .collect();
    let mut nodes = vec![XNode {
        x: Vec::new(),
        weight: 1.0,
    }];
    for axis in &axes {
        nodes = nodes
            .iter()
            .flat_map(|nd| {
                axis.iter().map(move |(x, w)| {
                    let mut v = nd.x.clone();
                    v.push(*x);
                    XNode {
                        x: v,
                        weight: nd.weight * w,
                    }
                })
            })
            .collect();
    }
    nodes
}

/// `safety / min_{|u|=1} F(x, u)` over `64·n` scan directions.
pub fn bounding_radius(fs: &FinslerStructure, x: &[f64], safety: f64) -> Result<f64> {
    let n = fs.dim();
    let mut min = f64::INFINITY;
    for u in scan_directions(n, 64 * n) {
        let f = fs.f(x, &u)?;
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::BoundingScan(format!("F(x, u) = {f} at x = {x:?}, u = {u:?}")));
        }
        min = min.min(f);
    }
    Ok(safety / min)
}

/// Vector-valued estimate sharing one sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEstimate {
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub samples: usize,
    pub accepted: usize,
    pub spec_hash: String,
    pub structure_hash: String,
}

impl FunctionalEstimate {
    pub fn value(&self) -> f64 {
        self.values[0]
    }

    pub fn stderr(&self) -> f64 {
        self.stderrs[0]
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.samples as f64
    }
}

fn unit_ball_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rad = rng.random::<f64>().powf(1.0 / n as f64);
        if norm > 1e-300 {
            return v.iter().map(|a| a * rad / norm).collect();
        }
    }
}

/// Draw `j` of the unit-ball sequence shared by all x-nodes.
pub fn shared_draw(seed: u64, j: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    unit_ball_point(&mut rng, n)
}

/// Fiber points of one x-node: `y_j = R_x u_j`, `None` where `F(x, y_j) > 1`.
///
/// A draw with `|y_j| < r_min` is replaced from a stream private to `(node, j)`.
pub fn fiber_points(
    fs: &FinslerStructure,
    spec: &QuadratureSpec,
    node: usize,
    x: &[f64],
    draws: &[Vec<f64>],
) -> Result<(f64, Vec<Option<Vec<f64>>>)> {
    let n = fs.dim();
    let r = bounding_radius(fs, x, spec.safety)?;
    let mut out = Vec::with_capacity(draws.len());
    for (j, u) in draws.iter().enumerate() {
        let mut y: Vec<f64> = u.iter().map(|a| a * r).collect();
        if y.iter().map(|a| a * a).sum::<f64>().sqrt() < spec.r_min {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (node as u64 + 1).rotate_left(32));
            rng.set_stream(j as u64);
            while y.iter().map(|a| a * a).sum::<f64>().sqrt() < spec.r_min {
                y = unit_ball_point(&mut rng, n).iter().map(|a| a * r).collect();
            }
        }
        out.push(if fs.f2(x, &y)? <= 1.0 { Some(y) } else { None });
    }
    Ok((r, out))
}

/// `∫_BM α dV` for each component of `α`, with Monte-Carlo standard errors.
///
/// Draw `j` contributes one full outer-grid replicate
/// `Z_j = Σ_k w_k R_kⁿ 1[F ≤ 1] α det g`; the estimate is the mean of the
/// `Z_j` and the standard error their standard deviation over `√N`.
pub fn integrate<F>(
    fs: &FinslerStructure,
    spec: &QuadratureSpec,
    components: usize,
    integrand: F,
) -> Result<FunctionalEstimate>
where
    F: Fn(&PointState) -> Result<Vec<f64>> + Sync,
{
    spec.validate()?;
    let n = fs.dim();
    let nodes = x_grid(fs.chart(), spec.grid);
    let draws: Vec<Vec<f64>> = (0..spec.y_samples).map(|j| shared_draw(spec.seed, j, n)).collect();
    let fibers: Vec<(f64, Vec<Option<Vec<f64>>>)> = nodes
        .par_iter()
        .enumerate()
        .map(|(k, nd)| fiber_points(fs, spec, k, &nd.x, &draws))
        .collect::<Result<_>>()?;
    let mut accepted = 0;
    for (_, ys) in &fibers {
        let acc = ys.iter().filter(|y| y.is_some()).count();
        let rate = acc as f64 / spec.y_samples as f64;
        if rate < 0.01 {
            return Err(Error::LowAcceptance { rate });
        }
        accepted += acc;
    }
    let scales: Vec<f64> = nodes
        .iter()
        .zip(&fibers)
        .map(|(nd, (r, _))| nd.weight * r.powi(n as i32))
        .collect();
    let replicates: Vec<Vec<f64>> = (0..spec.y_samples)
        .into_par_iter()
        .map(|j| {
            let mut z = vec![0.0; components];
            for (k, nd) in nodes.iter().enumerate() {
                if let Some(y) = &fibers[k].1[j] {
                    let det = fs.metric_det(&nd.x, y)?;
                    let v = integrand(&PointState::new(nd.x.clone(), y.clone()))?;
                    for c in 0..components {
                        z[c] += scales[k] * v[c] * det;
                    }
                }
            }
            Ok(z)
        })
        .collect::<Result<_>>()?;
    let m = spec.y_samples as f64;
    let mut values = vec![0.0; components];
    for z in &replicates {
        for c in 0..components {
            values[c] += z[c];
        }
    }
    values.iter_mut().for_each(|v| *v /= m);
    let mut var = vec![0.0; components];
    for z in &replicates {
        for c in 0..components {
            var[c] += (z[c] - values[c]).powi(2);
        }
    }
    Ok(FunctionalEstimate {
        values,
        stderrs: var.iter().map(|v| (v / ((m - 1.0) * m)).sqrt()).collect(),
        samples: nodes.len() * spec.y_samples,
        accepted,
        spec_hash: spec.hash(),
        structure_hash: structure_hash(fs),
    })
}
