//! Intrinsic geometry of a Finsler structure `F(x, y)`.
//!
//! Everything is computed pointwise from jets of `F²` in the `2n` variables
//! `(x1..xn, y1..yn)`. Each derived quantity consumes some derivatives of `F²`,
//! so it is available up to a lower order than the jet it came from:
//!
//! | quantity                         | order available (F² at order K) |
//! |----------------------------------|---------------------------------|
//! | `g_ij`, `g^ij`, `det g`, `G^i`   | K − 2                           |
//! | `G^i_j`, Chern–Rund `Γ^i_jk`     | K − 3                           |
//! | Berwald `G^i_jk`, `P^i_jk`, `P_i`, `R^i_jk` | K − 4                |
//! | hh- and hv-curvature             | K − 4                           |
//!
//! Tension needs `P_i`, so it is available at `K − 4`; bitension, the
//! Weitzenböck residual and the Hessian integrand take two more horizontal
//! derivatives and need `K = 6` for a pointwise value.

mod geodesic;
mod invariants;
mod jets;

pub use geodesic::{arc_length, integrate_geodesic, GeodesicState};
pub use invariants::{invariant_residuals, InvariantResiduals};
pub use jets::{ConnectionData, CurvatureData, DomainJets, MetricData};
pub(crate) use jets::check_metric;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::expr::{indexed_vars, parse, Expr};
use crate::jet::{Jet, JetSpace};

pub const DEFAULT_R_MIN: f64 = 1e-6;

/// Coordinate chart of the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// Periodic coordinates `x_i ∈ [0, period_i)`.
    Torus { periods: Vec<f64> },
    /// `lower_i ≤ x_i ≤ upper_i` with no identification.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Chart {
    pub fn torus(periods: &[f64]) -> Chart {
        Chart::Torus {
            periods: periods.to_vec(),
        }
    }

    pub fn unit_box(n: usize) -> Chart {
        Chart::Box {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Chart::Torus { periods } => periods.len(),
            Chart::Box { lower, .. } => lower.len(),
        }
    }

    /// Lower and upper bound of axis `i` (a torus axis is `[0, period)`).
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        match self {
            Chart::Torus { periods } => (0.0, periods[i]),
            Chart::Box { lower, upper } => (lower[i], upper[i]),
        }
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let (a, b) = self.bounds(i);
                b - a
            })
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Chart::Torus { .. } => x.iter().all(|v| v.is_finite()),
            Chart::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (a, b))| *v >= *a && *v <= *b),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Chart::Torus { periods } => periods.iter().all(|p| *p > 0.0 && p.is_finite()),
            Chart::Box { lower, upper } => {
                lower.len() == upper.len()
                    && lower.iter().zip(upper).all(|(a, b)| a < b && b.is_finite())
            }
        };
        if ok && self.dim() >= 1 {
            Ok(())
        } else {
            Err(Error::InvalidStructure(format!("malformed chart {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinslerDefinition {
    Euclidean,
    /// `F(x, y)` over `x1..xn, y1..yn`.
    Custom { f: Expr },
    /// `g_ij(x)` over `x1..xn`.
    Riemannian { metric: Vec<Vec<Expr>> },
    /// `F = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i`.
    Randers {
        alpha: Vec<Vec<Expr>>,
        beta: Vec<Expr>,
    },
    /// `F² = g̃_ij(x) y^i y^j + b(x, y)` with `b` 2-homogeneous in `y`.
    Perturbed { base: Vec<Vec<Expr>>, b: Expr },
}

/// A Finsler manifold in one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct FinslerStructure {
    n: usize,
    chart: Chart,
    definition: FinslerDefinition,
    r_min: f64,
}

/// Variable names `x1..xn, y1..yn`.
pub fn xy_vars(n: usize) -> Vec<String> {
    let mut v = indexed_vars("x", n);
    v.extend(indexed_vars("y", n));
    v
}

/// Parse a square matrix of expressions.
pub fn parse_matrix<S: AsRef<str>, R: AsRef<[S]>>(
    rows: &[R],
    vars: &[String],
) -> Result<Vec<Vec<Expr>>> {
    let n = rows.len();
    rows.iter()
        .map(|r| {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::InvalidStructure(format!(
                    "metric rows must have {n} entries, found {}",
                    r.len()
                )));
            }
            r.iter().map(|s| parse(s.as_ref(), vars)).collect()
        })
        .collect()
}

pub fn parse_vector<S: AsRef<str>>(items: &[S], vars: &[String]) -> Result<Vec<Expr>> {
    items.iter().map(|s| parse(s.as_ref(), vars)).collect()
}

impl FinslerStructure {
    fn build(chart: Chart, definition: FinslerDefinition) -> Result<FinslerStructure> {
        chart.validate()?;
        let n = chart.dim();
        if n < 2 {
            return Err(Error::InvalidStructure(
                "domain dimension must be at least 2".into(),
            ));
        }
        let square = |m: &Vec<Vec<Expr>>| m.len() == n && m.iter().all(|r| r.len() == n);
        let ok = match &definition {
            FinslerDefinition::Euclidean | FinslerDefinition::Custom { .. } => true,
            FinslerDefinition::Riemannian { metric } => square(metric),
            FinslerDefinition::Randers { alpha, beta } => square(alpha) && beta.len() == n,
            FinslerDefinition::Perturbed { base, .. } => square(base),
        };
        if !ok {
            return Err(Error::InvalidStructure(format!(
                "definition does not match dimension {n}"
            )));
        }
        Ok(FinslerStructure {
            n,
            chart,
            definition,
            r_min: DEFAULT_R_MIN,
        })
    }

    pub fn euclidean(chart: Chart) -> Result<FinslerStructure> {
        FinslerStructure::build(chart, FinslerDefinition::Euclidean)
    }

    pub fn custom(chart: Chart, f: &str) -> Result<FinslerStructure> {
        let f = parse(f, &xy_vars(chart.dim()))?;
        FinslerStructure::build(chart, FinslerDefinition::Custom { f })
    }

    pub fn riemannian<S: AsRef<str>, R: AsRef<[S]>>(
        chart: Chart,
        metric: &[R],
    ) -> Result<FinslerStructure> {
        let metric = parse_matrix(metric, &indexed_vars("x", chart.dim()))?;
        FinslerStructure::build(chart, FinslerDefinition::Riemannian { metric })
    }

    pub fn randers<S: AsRef<str>, R: AsRef<[S]>, T: AsRef<str>>(
        chart: Chart,
        alpha: &[R],
        beta: &[T],
    ) -> Result<FinslerStructure> {
        let xs = indexed_vars("x", chart.dim());
        let alpha = parse_matrix(alpha, &xs)?;
        let beta = parse_vector(beta, &xs)?;
        FinslerStructure::build(chart, FinslerDefinition::Randers { alpha, beta })
    }

    pub fn perturbed<S: AsRef<str>, R: AsRef<[S]>>(
        chart: Chart,
        base: &[R],
        b: &str,
    ) -> Result<FinslerStructure> {
        let n = chart.dim();
        let base = parse_matrix(base, &indexed_vars("x", n))?;
        let b = parse(b, &xy_vars(n))?;
        FinslerStructure::build(chart, FinslerDefinition::Perturbed { base, b })
    }

    pub fn from_definition(chart: Chart, definition: FinslerDefinition) -> Result<FinslerStructure> {
        FinslerStructure::build(chart, definition)
    }

    pub fn with_r_min(mut self, r_min: f64) -> FinslerStructure {
        self.r_min = r_min;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn definition(&self) -> &FinslerDefinition {
        &self.definition
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// `F²` as a jet, given jets for the coordinates.
    pub fn f2_jets(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let quad = |m: &Vec<Vec<Expr>>| -> Result<Jet> {
            let mut acc = Jet::zero(y[0].space());
            for i in 0..self.n {
                for j in i..self.n {
                    let gij = m[i][j].eval_jets(x)?;
                    let w = if i == j { 1.0 } else { 2.0 };
                    acc += &(&gij * &(&y[i] * &y[j])).scale(w);
                }
            }
            Ok(acc)
        };
        match &self.definition {
            FinslerDefinition::Euclidean => {
                let mut acc = Jet::zero(y[0].space());
                for yi in y {
                    acc.add_product(yi, yi);
                }
                Ok(acc)
            }
            FinslerDefinition::Custom { f } => {
                let args: Vec<Jet> = x.iter().chain(y).cloned().collect();
                let fj = f.eval_jets(&args)?;
                Ok(&fj * &fj)
            }
            FinslerDefinition::Riemannian { metric } => quad(metric),
            FinslerDefinition::Randers { alpha, beta } => {
                let a = quad(alpha)?.sqrt()?;
                let mut b = Jet::zero(y[0].space());
                for (bi, yi) in beta.iter().zip(y) {
                    b.add_product(&bi.eval_jets(x)?, yi);
                }
                let f = &a + &b;
                Ok(&f * &f)
            }
            FinslerDefinition::Perturbed { base, b } => {
                let args: Vec<Jet> = x.iter().chain(y).cloned().collect();
                Ok(&quad(base)? + &b.eval_jets(&args)?)
            }
        }
    }

    /// Plain value of `F²(x, y)`.
    pub fn f2(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let quad = |m: &Vec<Vec<Expr>>| -> Result<f64> {
            let mut acc = 0.0;
            for i in 0..self.n {
                for j in 0..self.n {
                    acc += m[i][j].eval(x)? * y[i] * y[j];
                }
            }
            Ok(acc)
        };
        match &self.definition {
            FinslerDefinition::Euclidean => Ok(y.iter().map(|v| v * v).sum()),
            FinslerDefinition::Custom { f } => {
                let args: Vec<f64> = x.iter().chain(y).copied().collect();
                let v = f.eval(&args)?;
                Ok(v * v)
            }
            FinslerDefinition::Riemannian { metric } => quad(metric),
            FinslerDefinition::Randers { alpha, beta } => {
                let a2 = quad(alpha)?;
                if !(a2 > 0.0) {
                    return Err(Error::Domain(format!(
                        "Randers alpha² = {a2} is not positive"
                    )));
                }
                let mut b = 0.0;
                for (bi, yi) in beta.iter().zip(y) {
                    b += bi.eval(x)? * yi;
                }
                let f = a2.sqrt() + b;
                Ok(f * f)
            }
            FinslerDefinition::Perturbed { base, b } => {
                let args: Vec<f64> = x.iter().chain(y).copied().collect();
                Ok(quad(base)? + b.eval(&args)?)
            }
        }
    }

    /// Plain value of `F(x, y)`; errors when `F ≤ 0` would be implied.
    pub fn f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.definition {
            FinslerDefinition::Custom { f } => {
                let args: Vec<f64> = x.iter().chain(y).copied().collect();
                f.eval(&args)
            }
            FinslerDefinition::Randers { alpha, beta } => {
                let mut a2 = 0.0;
                for i in 0..self.n {
                    for j in 0..self.n {
                        a2 += alpha[i][j].eval(x)? * y[i] * y[j];
                    }
                }
                let mut b = 0.0;
                for (bi, yi) in beta.iter().zip(y) {
                    b += bi.eval(x)? * yi;
                }
                Ok(a2.max(0.0).sqrt() + b)
            }
            _ => {
                let f2 = self.f2(x, y)?;
                if f2 < 0.0 {
                    return Err(Error::Domain(format!("F² = {f2} is negative")));
                }
                Ok(f2.sqrt())
            }
        }
    }

    /// `g_ij` and `det g` at `(x, y)` from an order-2 jet of `F²`.
    pub fn metric_det(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.n;
        let space = JetSpace::get(2 * n, 2);
        let xs: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, i, x[i])).collect();
        let ys: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, n + i, y[i])).collect();
        let f2 = self.f2_jets(&xs, &ys)?;
        let mut g = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut mi = vec![0u8; 2 * n];
        for i in 0..n {
            for j in 0..n {
                mi.iter_mut().for_each(|e| *e = 0);
                mi[n + i] += 1;
                mi[n + j] += 1;
                g[(i, j)] = 0.5 * f2.coeff(&mi).unwrap();
            }
        }
        Ok(g.determinant())
    }

    /// Seeded positivity, homogeneity and convexity checks.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<ValidationSummary> {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut summary = ValidationSummary {
            samples,
            min_eigenvalue: f64::INFINITY,
            max_homogeneity_error: 0.0,
        };
        for s in 0..samples {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    let (a, b) = self.chart.bounds(i);
                    a + (b - a) * rng.random::<f64>()
                })
                .collect();
            let mut y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = 0.5 + 1.5 * rng.random::<f64>();
            y.iter_mut().for_each(|v| *v *= r / norm);

            let f = self.f(&x, &y)?;
            if !(f > 0.0) {
                return Err(Error::InvalidStructure(format!(
                    "F = {f} is not positive at sample {s} (x = {x:?}, y = {y:?})"
                )));
            }
            for lam in [0.5, 2.0, 7.0] {
                let ly: Vec<f64> = y.iter().map(|v| lam * v).collect();
                let fl = self.f(&x, &ly)?;
                let err = (fl - lam * f).abs() / (lam * f);
                summary.max_homogeneity_error = summary.max_homogeneity_error.max(err);
                if err > 1e-10 {
                    return Err(Error::InvalidStructure(format!(
                        "F is not 1-homogeneous: F(x, {lam}y) − {lam}F(x, y) has relative size {err:.2e}"
                    )));
                }
                if let FinslerDefinition::Perturbed { b, .. } = &self.definition {
                    let a: Vec<f64> = x.iter().chain(&y).copied().collect();
                    let al: Vec<f64> = x.iter().chain(&ly).copied().collect();
                    let (b1, bl) = (b.eval(&a)?, b.eval(&al)?);
                    if (bl - lam * lam * b1).abs() > 1e-10 * (lam * lam * b1.abs()).max(1e-300) {
                        return Err(Error::InvalidStructure(
                            "perturbation b is not 2-homogeneous in y".into(),
                        ));
                    }
                }
            }
            let p = PointState::new(x, y);
            let dj = DomainJets::new(self, &p, 2)?;
            let md = dj.metric_data();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| md.g[i][j]);
            let eig = m.symmetric_eigenvalues().min();
            summary.min_eigenvalue = summary.min_eigenvalue.min(eig);
            if !(eig > 0.0) {
                return Err(Error::InvalidStructure(format!(
                    "metric tensor not positive definite at sample {s} (λ_min = {eig:.3e})"
                )));
            }
        }
        Ok(summary)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub max_homogeneity_error: f64,
}

/// A point `(x, y)` of the tangent bundle off the zero section.
#[derive(Debug, Clone, PartialEq)]
pub struct PointState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PointState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> PointState {
        PointState { x, y }
    }

    /// Split `x1..xn, y1..yn` into a point.
    pub fn from_flat(v: &[f64]) -> Result<PointState> {
        if !v.len().is_multiple_of(2) || v.is_empty() {
            return Err(Error::Config(format!(
                "a point needs 2n coordinates, got {}",
                v.len()
            )));
        }
        let n = v.len() / 2;
        Ok(PointState::new(v[..n].to_vec(), v[n..].to_vec()))
    }

    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Seeded sample points: `x` uniform in the chart (shrunk by `margin` on box
/// axes), `y` a random direction with `|y| ∈ [0.5, 1.5]`.
pub fn sample_points(chart: &Chart, count: usize, seed: u64, margin: f64) -> Vec<PointState> {
    let n = chart.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = (0..n)
                .map(|i| {
                    let (a, b) = chart.bounds(i);
                    let (a, b) = match chart {
                        Chart::Box { .. } => (a + margin * (b - a), b - margin * (b - a)),
                        Chart::Torus { .. } => (a, b),
                    };
                    a + (b - a) * rng.random::<f64>()
                })
                .collect();
            let mut y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let r = 0.5 + rng.random::<f64>();
            y.iter_mut().for_each(|v| *v *= r / norm);
            PointState::new(x, y)
        })
        .collect()
}

/// Unit vectors used by the bounding-radius scan: evenly spaced angles for
/// `n = 2`, seeded Gaussian directions plus the coordinate axes otherwise.
pub fn scan_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        return (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let mut dirs = Vec::with_capacity(count + 2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            dirs.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ca9);
    while dirs.len() < count.max(2 * n) {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            dirs.push(v.iter().map(|a| a / norm).collect());
        }
    }
    dirs
}

/// Evaluate a scalar field over `x1..xn, y1..yn` as a jet.
pub fn field_jet(field: &Expr, dj: &DomainJets) -> Result<Jet> {
    let args: Vec<Jet> = dj.x().iter().chain(dj.y()).cloned().collect();
    field.eval_jets(&args)
}

/// `δ_i f = ∂_i f − G^j_i ∂̇_j f` at a point.
pub fn delta_derivative(fs: &FinslerStructure, field: &Expr, p: &PointState, i: usize) -> Result<f64> {
    let dj = DomainJets::new(fs, p, 4)?;
    let f = field_jet(field, &dj)?;
    Ok(dj.delta(&f, i).value())
}

/// `div X = δ_i X^i + Γ^i_ki X^k − P_i X^i`.
pub fn divergence(fs: &FinslerStructure, field: &[Expr], p: &PointState) -> Result<f64> {
    let dj = DomainJets::new(fs, p, 4)?;
    let xs = field
        .iter()
        .map(|e| field_jet(e, &dj))
        .collect::<Result<Vec<_>>>()?;
    Ok(dj.divergence(&xs).value())
}

/// `Δf = −g^ij (δ_i δ_j f − Γ^k_ij δ_k f − P_i δ_j f)`.
pub fn horizontal_laplacian(fs: &FinslerStructure, f: &Expr, p: &PointState) -> Result<f64> {
    let dj = DomainJets::new(fs, p, 4)?;
    let fj = field_jet(f, &dj)?;
    Ok(dj.horizontal_laplacian(&fj).value())
}

pub fn metric(fs: &FinslerStructure, p: &PointState) -> Result<MetricData> {
    Ok(DomainJets::new(fs, p, 2)?.metric_data())
}

pub fn connection(fs: &FinslerStructure, p: &PointState) -> Result<ConnectionData> {
    Ok(DomainJets::new(fs, p, 4)?.connection_data())
}

pub fn curvature(fs: &FinslerStructure, p: &PointState) -> Result<CurvatureData> {
    Ok(DomainJets::new(fs, p, 4)?.curvature_data())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn randers() -> FinslerStructure {
        FinslerStructure::randers(
            Chart::torus(&[2.0 * PI, 2.0 * PI]),
            &[["1 + 0.2*sin(x1)", "0"], ["0", "1"]],
            &["0.3*cos(x2)", "0.1"],
        )
        .unwrap()
    }

    #[test]
    fn euclidean_metric_is_identity() {
        let fs = FinslerStructure::euclidean(Chart::unit_box(2)).unwrap();
        let m = metric(&fs, &PointState::new(vec![0.3, 0.4], vec![1.0, -2.0])).unwrap();
        assert_eq!(m.g, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(m.det, 1.0);
    }

    #[test]
    fn riemannian_metric_is_y_independent() {
        let fs = FinslerStructure::riemannian(Chart::unit_box(2), &[["1", "0"], ["0", "1 + x1^2"]])
            .unwrap();
        let m = metric(&fs, &PointState::new(vec![0.5, 0.0], vec![1.0, 2.0])).unwrap();
        assert!((m.g[0][0] - 1.0).abs() < 1e-15);
        assert!((m.g[1][1] - 1.25).abs() < 1e-15);
        assert!(m.g[0][1].abs() < 1e-15);
    }

    #[test]
    fn validation_accepts_randers_and_rejects_strong_drift() {
        let s = randers().validate(64, 1).unwrap();
        assert!(s.min_eigenvalue > 0.0);
        let bad = FinslerStructure::randers(
            Chart::unit_box(2),
            &[["1", "0"], ["0", "1"]],
            &["1.5", "0"],
        )
        .unwrap();
        assert!(bad.validate(64, 1).is_err());
    }

    #[test]
    fn non_homogeneous_f_is_rejected() {
        let fs = FinslerStructure::custom(Chart::unit_box(2), "y1^2 + y2^2 + 1").unwrap();
        assert!(matches!(fs.validate(8, 3), Err(Error::InvalidStructure(_))));
    }

    #[test]
    fn zero_section_is_rejected() {
        let fs = randers();
        let p = PointState::new(vec![0.1, 0.2], vec![1e-8, 0.0]);
        assert!(matches!(
            DomainJets::new(&fs, &p, 2),
            Err(Error::ZeroSection { .. })
        ));
    }

    #[test]
    fn delta_of_euclidean_product() {
        let fs = FinslerStructure::euclidean(Chart::unit_box(2)).unwrap();
        let f = parse("x1*y2", &xy_vars(2)).unwrap();
        let p = PointState::new(vec![0.3, 0.6], vec![0.7, -1.1]);
        assert!((delta_derivative(&fs, &f, &p, 0).unwrap() + 1.1).abs() < 1e-15);
    }

    #[test]
    fn divergence_and_laplacian_examples() {
        let fs = FinslerStructure::euclidean(Chart::unit_box(2)).unwrap();
        let v = xy_vars(2);
        let p = PointState::new(vec![0.3, 0.6], vec![0.7, -1.1]);
        let x = [parse("x1", &v).unwrap(), parse("x2", &v).unwrap()];
        assert!((divergence(&fs, &x, &p).unwrap() - 2.0).abs() < 1e-14);
        let c = [parse("3", &v).unwrap(), parse("-1", &v).unwrap()];
        assert_eq!(divergence(&fs, &c, &p).unwrap(), 0.0);
        let f = parse("x1^2", &v).unwrap();
        assert!((horizontal_laplacian(&fs, &f, &p).unwrap() + 2.0).abs() < 1e-14);
        let k = parse("5", &v).unwrap();
        assert_eq!(horizontal_laplacian(&fs, &k, &p).unwrap(), 0.0);
    }
}
