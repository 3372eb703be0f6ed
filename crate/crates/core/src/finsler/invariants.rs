use serde::{Deserialize, Serialize};

use super::{field_jet, DomainJets, FinslerStructure, PointState};
use crate::error::Result;
use crate::expr::Expr;
use crate::jet::Jet;

/// Relative residuals of the structural identities of `F` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResiduals {
    /// `g(x, λy)` against `g(x, y)`.
    pub homogeneity: f64,
    /// `g_ij y^i y^j` against `F²`.
    pub euler: f64,
    /// `δ_i F²`.
    pub delta_f2: f64,
    /// `δ_k g_ij − Γ^m_ik g_mj − Γ^m_jk g_im`.
    pub h_metricity: f64,
    /// `[δ_j, δ_k] f − R^i_jk ∂̇_i f` for the probe field `f`.
    pub bracket: f64,
    /// `|P_i|`, which vanishes for Landsberg-type metrics.
    pub torsion_trace: f64,
}

impl InvariantResiduals {
    pub fn worst(&self) -> f64 {
        [self.homogeneity, self.euler, self.delta_f2, self.h_metricity, self.bracket]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

const LAMBDA: f64 = 2.7;

fn rel(res: f64, scale: f64) -> f64 {
    res / scale.max(f64::MIN_POSITIVE)
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a Jet>) -> f64 {
    it.into_iter().map(|j| j.value().abs()).fold(0.0, f64::max)
}

/// Structural residuals at `p`, with `probe` a scalar field over `x1..xn, y1..yn`.
pub fn invariant_residuals(fs: &FinslerStructure, p: &PointState, probe: &Expr) -> Result<InvariantResiduals> {
    let dj = DomainJets::new(fs, p, 4)?;
    let n = dj.dim();
    let g = dj.g();
    let y = dj.y();

    let scaled = PointState::new(p.x.clone(), p.y.iter().map(|v| LAMBDA * v).collect());
    let gs = DomainJets::new(fs, &scaled, 2)?.metric_data().g;
    let mut homog = 0.0f64;
    let mut gmax = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            homog = homog.max((gs[i][j] - g[i][j].value()).abs());
            gmax = gmax.max(g[i][j].value().abs());
        }
    }

    let f2 = dj.f2().value();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += g[i][j].value() * y[i].value() * y[j].value();
        }
    }

    let dx_scale = (0..n).map(|i| dj.f2().derivative(i).value().abs()).fold(f2.abs(), f64::max);
    let delta_f2 = (0..n).map(|i| dj.delta(dj.f2(), i).value().abs()).fold(0.0, f64::max);

    let gam = dj.gamma();
    let mut hm = 0.0f64;
    let mut hm_scale = gmax;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = dj.delta(&g[i][j], k).value();
                let mut r = d;
                for m in 0..n {
                    r -= gam[m][i][k].value() * g[m][j].value() + gam[m][j][k].value() * g[i][m].value();
                }
                hm = hm.max(r.abs());
                hm_scale = hm_scale.max(d.abs());
            }
        }
    }

    let f = field_jet(probe, &dj)?;
    let df: Vec<Jet> = (0..n).map(|k| dj.delta(&f, k)).collect();
    let br = dj.bracket();
    let mut bmax = 0.0f64;
    let mut bscale = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let jk = dj.delta(&df[k], j).value();
            let kj = dj.delta(&df[j], k).value();
            let mut r = jk - kj;
            for i in 0..n {
                r -= br[i][j][k].value() * dj.vertical(&f, i).value();
            }
            bmax = bmax.max(r.abs());
            bscale = bscale.max(jk.abs()).max(kj.abs());
        }
    }

    Ok(InvariantResiduals {
        homogeneity: rel(homog, gmax),
        euler: rel((quad - f2).abs(), f2.abs()),
        delta_f2: rel(delta_f2, dx_scale),
        h_metricity: rel(hm, hm_scale),
        bracket: rel(bmax, bscale.max(1.0)),
        torsion_trace: max_abs(dj.torsion_trace()),
    })
}
