//! Monomial tables shared by all jets with the same variable count and order.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Graded monomial layout for `nvars` variables up to total degree `order`.
///
/// Monomials are sorted by degree and then lexicographically (descending in
/// the first exponent), so a table of lower order is a prefix of a higher one.
pub(crate) struct Table {
    pub nvars: usize,
    pub order: usize,
    pub exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, u32>,
    /// `up[k * nvars + i]`: index of monomial k times x_i, or `u32::MAX`.
    pub up: Vec<u32>,
    pub pair_start: Vec<u32>,
    pub pairs: Vec<(u32, u32)>,
}

pub(crate) const NONE: u32 = u32::MAX;

fn monomials_of_degree(nvars: usize, d: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, left: usize, nvars: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(prefix, left - e, nvars, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(nvars), d, nvars, out);
}

impl Table {
    fn build(nvars: usize, order: usize) -> Table {
        let mut exps = Vec::new();
        for d in 0..=order {
            monomials_of_degree(nvars, d, &mut exps);
        }
        let index: HashMap<Vec<u8>, u32> = exps
            .iter()
            .enumerate()
            .map(|(k, e)| (e.clone(), k as u32))
            .collect();
        let mut up = vec![NONE; exps.len() * nvars];
        for (k, e) in exps.iter().enumerate() {
            for i in 0..nvars {
                let mut f = e.clone();
                f[i] += 1;
                if let Some(&j) = index.get(&f) {
                    up[k * nvars + i] = j;
                }
            }
        }
        let mut pair_start = Vec::with_capacity(exps.len() + 1);
        let mut pairs = Vec::new();
        for e in &exps {
            pair_start.push(pairs.len() as u32);
            // every split e = a + b
            let mut a = vec![0u8; nvars];
            loop {
                let b: Vec<u8> = e.iter().zip(&a).map(|(x, y)| x - y).collect();
                pairs.push((index[&a], index[&b]));
                // odometer over 0..=e[i]
                let mut i = 0;
                loop {
                    if i == nvars {
                        break;
                    }
                    if a[i] < e[i] {
                        a[i] += 1;
                        break;
                    }
                    a[i] = 0;
                    i += 1;
                }
                if i == nvars {
                    break;
                }
            }
        }
        pair_start.push(pairs.len() as u32);
        Table {
            nvars,
            order,
            exps,
            index,
            up,
            pair_start,
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    /// Number of monomials of degree at most `k`.
    pub fn len_upto(&self, k: usize) -> usize {
        binomial(self.nvars + k, k)
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).map(|&k| k as usize)
    }

    #[inline]
    pub fn pairs_of(&self, o: usize) -> &[(u32, u32)] {
        &self.pairs[self.pair_start[o] as usize..self.pair_start[o + 1] as usize]
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

type Cache = RwLock<HashMap<(usize, usize), Arc<Table>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| RwLock::new(HashMap::new()))
}

pub(crate) fn table(nvars: usize, order: usize) -> Arc<Table> {
    if let Some(t) = cache().read().unwrap().get(&(nvars, order)) {
        return t.clone();
    }
    let t = Arc::new(Table::build(nvars, order));
    cache()
        .write()
        .unwrap()
        .entry((nvars, order))
        .or_insert(t)
        .clone()
}
