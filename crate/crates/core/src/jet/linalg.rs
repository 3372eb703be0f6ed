use super::Jet;
use crate::error::{Error, Result};

/// Square matrix of jets, row-major.
pub type JetMatrix = Vec<Vec<Jet>>;

/// Inverse and determinant of a jet-valued matrix by Gauss–Jordan elimination.
///
/// Pivots are chosen on base values; a pivot below `1e-14` times the largest
/// entry is reported as a singular metric.
pub fn inverse_and_determinant(a: &JetMatrix) -> Result<(JetMatrix, Jet)> {
    let n = a.len();
    assert!(n > 0 && a.iter().all(|r| r.len() == n));
    let space = a[0][0].space().clone();
    let order = a.iter().flatten().map(Jet::order).min().unwrap();
    let scale = a
        .iter()
        .flatten()
        .map(|j| j.value().abs())
        .fold(0.0, f64::max);
    let mut m: JetMatrix = a
        .iter()
        .map(|r| r.iter().map(|j| j.truncate(order)).collect())
        .collect();
    let one = Jet::constant(&space, 1.0).truncate(order);
    let zero = Jet::zero(&space).truncate(order);
    let mut inv: JetMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    let mut det = one.clone();

    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| {
                m[p][col]
                    .value()
                    .abs()
                    .total_cmp(&m[q][col].value().abs())
            })
            .unwrap();
        let pv = m[piv][col].value();
        if !(pv.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::SingularMetric {
                condition: f64::INFINITY,
            });
        }
        if piv != col {
            m.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        det = &det * &m[col][col];
        let r = m[col][col].recip()?;
        for j in 0..n {
            m[col][j] = &m[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[i][col].clone();
            if f.coefficients().iter().all(|&c| c == 0.0) {
                continue;
            }
            for j in 0..n {
                let t = &f * &m[col][j];
                m[i][j] -= &t;
                let t = &f * &inv[col][j];
                inv[i][j] -= &t;
            }
        }
    }
    Ok((inv, det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;

    #[test]
    fn inverse_of_variable_matrix() {
        let sp = JetSpace::get(2, 3);
        let x = Jet::variable(&sp, 0, 0.3);
        let y = Jet::variable(&sp, 1, -0.2);
        let a = vec![
            vec![x.add_scalar(2.0), &x * &y],
            vec![y.clone(), (&y * &y).add_scalar(1.0)],
        ];
        let (inv, det) = inverse_and_determinant(&a).unwrap();
        let direct_det = &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]);
        assert!(det.max_abs_diff(&direct_det) < 1e-13);
        for i in 0..2 {
            for j in 0..2 {
                let mut s = &a[i][0] * &inv[0][j];
                s.add_product(&a[i][1], &inv[1][j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s.value() - want).abs() < 1e-14);
                assert!(s.coefficients()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn singular_is_rejected() {
        let sp = JetSpace::get(1, 1);
        let z = Jet::zero(&sp);
        let o = Jet::constant(&sp, 1.0);
        let a = vec![vec![o.clone(), o.clone()], vec![o, z.add_scalar(1.0)]];
        assert!(matches!(
            inverse_and_determinant(&a),
            Err(Error::SingularMetric { .. })
        ));
    }
}
