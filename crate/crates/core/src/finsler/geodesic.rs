use super::{Chart, DomainJets, FinslerStructure, PointState};
use crate::error::{Error, Result};
use crate::expr::{eval_jet, Expr};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn rhs(fs: &FinslerStructure, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    match fs.chart() {
        Chart::Box { .. } if !fs.chart().contains(x) => return Err(Error::LeftChart(x.to_vec())),
        _ => {}
    }
    let p = PointState::new(x.to_vec(), y.to_vec());
    let dj = DomainJets::new(fs, &p, 2)?;
    let acc = dj.spray().iter().map(|g| -2.0 * g.value()).collect();
    Ok((y.to_vec(), acc))
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u + s * v).collect()
}

/// Classical fourth-order Runge–Kutta for `ẋ = y`, `ẏ = −2G(x, y)`.
///
/// Returns `steps + 1` states including the start.
pub fn integrate_geodesic(
    fs: &FinslerStructure,
    p0: &PointState,
    steps: usize,
    h: f64,
) -> Result<Vec<GeodesicState>> {
    let mut x = p0.x.clone();
    let mut y = p0.y.clone();
    let mut out = vec![GeodesicState {
        t: 0.0,
        x: x.clone(),
        y: y.clone(),
    }];
    for s in 0..steps {
        let (k1x, k1y) = rhs(fs, &x, &y)?;
        let (k2x, k2y) = rhs(fs, &axpy(&x, h / 2.0, &k1x), &axpy(&y, h / 2.0, &k1y))?;
        let (k3x, k3y) = rhs(fs, &axpy(&x, h / 2.0, &k2x), &axpy(&y, h / 2.0, &k2y))?;
        let (k4x, k4y) = rhs(fs, &axpy(&x, h, &k3x), &axpy(&y, h, &k3y))?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
        if let Chart::Box { .. } = fs.chart() {
            if !fs.chart().contains(&x) {
                return Err(Error::LeftChart(x));
            }
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < fs.r_min() {
            return Err(Error::ZeroSection { norm });
        }
        out.push(GeodesicState {
            t: (s + 1) as f64 * h,
            x: x.clone(),
            y: y.clone(),
        });
    }
    Ok(out)
}

/// Length `∫ F(c(t), ċ(t)) dt` of a curve given by expressions in `t`, by
/// composite 4-point Gauss–Legendre over `samples` panels.
pub fn arc_length(
    fs: &FinslerStructure,
    curve: &[Expr],
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<f64> {
    assert_eq!(curve.len(), fs.dim());
    let (nodes, weights) = gauss_legendre(4);
    let panels = samples.max(1);
    let width = (t1 - t0) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = t0 + k as f64 * width;
        for (u, w) in nodes.iter().zip(&weights) {
            let t = a + 0.5 * width * (u + 1.0);
            let mut x = Vec::with_capacity(curve.len());
            let mut v = Vec::with_capacity(curve.len());
            for c in curve {
                let j = eval_jet(c, &[t], 1)?;
                x.push(j.value());
                v.push(j.coefficients()[1]);
            }
            let speed = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if speed < 1e-14 {
                return Err(Error::ZeroVelocity(t));
            }
            total += 0.5 * width * w * fs.f(&x, &v)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn euclidean_geodesic_is_a_line() {
        let fs = FinslerStructure::euclidean(Chart::unit_box(2)).unwrap();
        let p = PointState::new(vec![0.1, 0.2], vec![0.5, 0.25]);
        let tr = integrate_geodesic(&fs, &p, 100, 1e-2).unwrap();
        let last = tr.last().unwrap();
        assert!((last.x[0] - 0.6).abs() < 1e-14);
        assert!((last.x[1] - 0.45).abs() < 1e-14);
    }

    #[test]
    fn leaving_the_box_is_reported() {
        let fs = FinslerStructure::euclidean(Chart::unit_box(2)).unwrap();
        let p = PointState::new(vec![0.9, 0.5], vec![1.0, 0.0]);
        assert!(matches!(
            integrate_geodesic(&fs, &p, 100, 1e-2),
            Err(Error::LeftChart(_))
        ));
    }

    #[test]
    fn segment_length_and_zero_velocity() {
        let fs = FinslerStructure::euclidean(Chart::unit_box(2)).unwrap();
        let t = ["t".to_string()];
        let c = [parse("2*t", &t).unwrap(), parse("0", &t).unwrap()];
        assert!((arc_length(&fs, &c, 0.0, 1.0, 4).unwrap() - 2.0).abs() < 1e-12);
        let still = [parse("0.3", &t).unwrap(), parse("0.4", &t).unwrap()];
        assert!(matches!(
            arc_length(&fs, &still, 0.0, 1.0, 4),
            Err(Error::ZeroVelocity(_))
        ));
    }
}
