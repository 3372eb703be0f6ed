use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// One entry of the truncated product table: `out += weight * a * b`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MulTerm {
    pub a: u32,
    pub b: u32,
    pub out: u32,
    pub weight: f64,
}

/// Multi-index bookkeeping for jets in `nvars` variables up to total order `order`.
///
/// Multi-indices are enumerated graded-lexicographically: by total degree first,
/// then lexicographically with larger exponents of earlier variables first
/// (`1, x1, x2, x1², x1x2, x2², ...`). The enumeration is deterministic, so
/// coefficient tables are comparable bit-for-bit between runs.
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<u8>,
    degree_end: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    pub(crate) mul: Vec<MulTerm>,
    pub(crate) mul_end: Vec<usize>,
    shift: Vec<Vec<u32>>,
    factorial: Vec<f64>,
}

type SpaceCache = Mutex<HashMap<(usize, usize), Arc<JetSpace>>>;

static CACHE: OnceLock<SpaceCache> = OnceLock::new();

fn push_degree(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == nvars {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=degree).rev() {
        prefix.push(e as u8);
        push_degree(nvars, degree - e, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for j in 0..k {
        r = r * (n - j) as f64 / (j + 1) as f64;
    }
    r
}

impl JetSpace {
    /// Shared space for `nvars` variables and total order `order`.
    ///
    /// Spaces are immutable once built; they are memoized process-wide.
    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(sp) = cache.lock().unwrap().get(&(nvars, order)) {
            return sp.clone();
        }
        let sp = Arc::new(JetSpace::build(nvars, order));
        cache
            .lock()
            .unwrap()
            .entry((nvars, order))
            .or_insert(sp)
            .clone()
    }

    fn build(nvars: usize, order: usize) -> JetSpace {
        assert!(nvars > 0, "a jet space needs at least one variable");
        let mut all = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            push_degree(nvars, d, &mut Vec::new(), &mut all);
            degree_end.push(all.len());
        }
        let lookup: HashMap<Vec<u8>, usize> =
            all.iter().enumerate().map(|(k, m)| (m.clone(), k)).collect();

        let mut mul = Vec::new();
        let mut mul_end = Vec::with_capacity(order + 1);
        let mut d = 0;
        for (out, lam) in all.iter().enumerate() {
            let deg: usize = lam.iter().map(|&e| e as usize).sum();
            while deg > d {
                mul_end.push(mul.len());
                d += 1;
            }
            // every mu <= lam componentwise
            let mut mu = vec![0u8; nvars];
            loop {
                let nu: Vec<u8> = lam.iter().zip(&mu).map(|(l, m)| l - m).collect();
                let weight: f64 = lam
                    .iter()
                    .zip(&mu)
                    .map(|(&l, &m)| binomial(l as usize, m as usize))
                    .product();
                mul.push(MulTerm {
                    a: lookup[&mu] as u32,
                    b: lookup[&nu] as u32,
                    out: out as u32,
                    weight,
                });
                let mut k = 0;
                loop {
                    if k == nvars {
                        break;
                    }
                    if mu[k] < lam[k] {
                        mu[k] += 1;
                        break;
                    }
                    mu[k] = 0;
                    k += 1;
                }
                if k == nvars {
                    break;
                }
            }
        }
        while mul_end.len() <= order {
            mul_end.push(mul.len());
        }

        let below = if order == 0 { 0 } else { degree_end[order - 1] };
        let shift = (0..nvars)
            .map(|i| {
                all[..below]
                    .iter()
                    .map(|m| {
                        let mut s = m.clone();
                        s[i] += 1;
                        lookup[&s] as u32
                    })
                    .collect()
            })
            .collect();

        let factorial = all
            .iter()
            .map(|m| {
                m.iter()
                    .map(|&e| (1..=e as usize).map(|j| j as f64).product::<f64>())
                    .product()
            })
            .collect();

        JetSpace {
            nvars,
            order,
            exps: all.concat(),
            degree_end,
            lookup,
            mul,
            mul_end,
            shift,
            factorial,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients of a jet truncated at `order`: binomial(m + order, m).
    pub fn len(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Exponents of the `k`-th multi-index.
    pub fn multi_index(&self, k: usize) -> &[u8] {
        &self.exps[k * self.nvars..(k + 1) * self.nvars]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.multi_index(k).iter().map(|&e| e as usize).sum()
    }

    /// Position of a multi-index, if it is within the space.
    pub fn index_of(&self, mi: &[u8]) -> Option<usize> {
        self.lookup.get(mi).copied()
    }

    /// mu! for the `k`-th multi-index.
    pub fn factorial(&self, k: usize) -> f64 {
        self.factorial[k]
    }

    pub(crate) fn shifted(&self, var: usize, k: usize) -> usize {
        self.shift[var][k] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomial() {
        for m in 1..=4 {
            for k in 0..=6 {
                let sp = JetSpace::get(m, k);
                assert_eq!(sp.len(k), binomial(m + k, m) as usize);
            }
        }
    }

    #[test]
    fn graded_lex_enumeration() {
        let sp = JetSpace::get(2, 2);
        let seen: Vec<&[u8]> = (0..sp.len(2)).map(|k| sp.multi_index(k)).collect();
        assert_eq!(
            seen,
            vec![&[0, 0][..], &[1, 0], &[0, 1], &[2, 0], &[1, 1], &[0, 2]]
        );
    }

    #[test]
    fn product_table_is_sorted_by_output_degree() {
        let sp = JetSpace::get(3, 4);
        for d in 0..=4 {
            for t in &sp.mul[..sp.mul_end[d]] {
                assert!(sp.degree(t.out as usize) <= d);
            }
        }
    }
}
