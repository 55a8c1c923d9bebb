//! Fincke–Pohst enumeration of integer vectors of bounded norm under a
//! positive definite integer Gram matrix.
//!
//! Floating-point Cholesky data only prunes the search tree; the bound is
//! inflated by a small relative margin and every leaf is re-checked exactly.
//! Vectors are produced in lexicographic order of their coordinates, where
//! each coordinate runs through 0, 1, -1, 2, -2, ... so the first vector
//! reported is the canonical minimum under that order.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

/// Default limit on search-tree nodes for one enumeration.
pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;

const MARGIN: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Clone, Debug)]
pub struct Enumerator {
    n: usize,
    /// Gram matrix with coordinates reversed, so original index 0 is the
    /// outermost search level.
    gram: Vec<Vec<i64>>,
    diag: Vec<f64>,
    /// `mu[i][j]` for `j > i`: Cholesky coefficients of the reversed Gram.
    mu: Vec<Vec<f64>>,
}

impl Enumerator {
    pub fn new(gram: &[Vec<i64>]) -> Result<Enumerator> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::NotSymmetric);
        }
        let rev: Vec<Vec<i64>> = (0..n)
            .map(|a| (0..n).map(|b| gram[n - 1 - a][n - 1 - b]).collect())
            .collect();
        for a in 0..n {
            for b in 0..a {
                if rev[a][b] != rev[b][a] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        // Q(x) = sum_i diag[i] * (x_i + sum_{j>i} mu[i][j] x_j)^2
        let mut a: Vec<Vec<f64>> =
            rev.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let mut diag = vec![0.0; n];
        let mut mu = vec![vec![0.0; n]; n];
        for i in 0..n {
            let d = a[i][i];
            if d.is_nan() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite);
            }
            diag[i] = d;
            for j in i + 1..n {
                mu[i][j] = a[i][j] / d;
            }
            for j in i + 1..n {
                for k in i + 1..n {
                    a[j][k] -= mu[i][j] * a[i][k];
                }
            }
        }
        Ok(Enumerator { n, gram: rev, diag, mu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Calls `visit(x, Q(x))` for every nonzero-or-zero integer vector with
    /// `Q(x) <= bound`, in canonical order. Returns `Ok(true)` when the
    /// visitor stopped the search.
    pub fn for_each<F>(&self, bound: i64, node_limit: u64, mut visit: F) -> Result<bool>
    where
        F: FnMut(&[i64], i64) -> ControlFlow<()>,
    {
        if bound < 0 {
            return Ok(false);
        }
        if self.n == 0 {
            return Ok(visit(&[], 0).is_break());
        }
        let mut st = State {
            e: self,
            bound,
            fbound: bound as f64 * (1.0 + MARGIN) + MARGIN,
            x: vec![0; self.n],
            out: vec![0; self.n],
            nodes: 0,
            limit: node_limit,
        };
        match st.level(self.n - 1, 0.0, &mut visit) {
            Ok(ControlFlow::Break(())) => Ok(true),
            Ok(ControlFlow::Continue(())) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// All vectors with `Q(x) <= bound`, each with its value.
    pub fn collect(&self, bound: i64, node_limit: u64) -> Result<Vec<(Vec<i64>, i64)>> {
        let mut out = Vec::new();
        self.for_each(bound, node_limit, |x, v| {
            out.push((x.to_vec(), v));
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }
}

struct State<'a> {
    e: &'a Enumerator,
    bound: i64,
    fbound: f64,
    x: Vec<i64>,
    out: Vec<i64>,
    nodes: u64,
    limit: u64,
}

impl State<'_> {
    fn level<F>(&mut self, i: usize, partial: f64, visit: &mut F) -> Result<ControlFlow<()>>
    where
        F: FnMut(&[i64], i64) -> ControlFlow<()>,
    {
        let e = self.e;
        let center: f64 = -(i + 1..e.n).map(|j| e.mu[i][j] * self.x[j] as f64).sum::<f64>();
        let rem = self.fbound - partial;
        if rem < 0.0 {
            return Ok(ControlFlow::Continue(()));
        }
        let r = (rem / e.diag[i]).sqrt() * (1.0 + MARGIN) + MARGIN;
        let lo = (center - r).ceil();
        let hi = (center + r).floor();
        if lo > hi || !lo.is_finite() || !hi.is_finite() {
            return Ok(ControlFlow::Continue(()));
        }
        for v in ZigZag::new(lo as i64, hi as i64) {
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::BudgetExceeded { limit: self.limit });
            }
            let dv = v as f64 - center;
            let p = partial + e.diag[i] * dv * dv;
            if p > self.fbound {
                continue;
            }
            self.x[i] = v;
            let flow = if i == 0 {
                self.leaf(visit)
            } else {
                self.level(i - 1, p, visit)?
            };
            if flow.is_break() {
                return Ok(flow);
            }
        }
        self.x[i] = 0;
        Ok(ControlFlow::Continue(()))
    }

    fn leaf<F>(&mut self, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[i64], i64) -> ControlFlow<()>,
    {
        let n = self.e.n;
        let mut val: i128 = 0;
        for a in 0..n {
            let xa = self.x[a] as i128;
            if xa == 0 {
                continue;
            }
            let row = &self.e.gram[a];
            let s: i128 = (0..n).map(|b| row[b] as i128 * self.x[b] as i128).sum();
            val += xa * s;
        }
        if val > self.bound as i128 {
            return ControlFlow::Continue(());
        }
        for a in 0..n {
            self.out[n - 1 - a] = self.x[a];
        }
        visit(&self.out, val as i64)
    }
}

/// Integers of `[lo, hi]` in the order 0, 1, -1, 2, -2, ...
#[derive(Clone, Debug)]
pub struct ZigZag {
    lo: i64,
    hi: i64,
    k: i64,
    neg_next: bool,
}

impl ZigZag {
    pub fn new(lo: i64, hi: i64) -> ZigZag {
        let k = if lo <= 0 && 0 <= hi {
            0
        } else if lo > 0 {
            lo
        } else {
            -hi
        };
        ZigZag { lo, hi, k, neg_next: false }
    }
}

impl Iterator for ZigZag {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        if self.lo > self.hi {
            return None;
        }
        let max_abs = self.lo.abs().max(self.hi.abs());
        while self.k <= max_abs {
            if !self.neg_next {
                self.neg_next = true;
                if self.k <= self.hi && self.k >= self.lo {
                    return Some(self.k);
                }
            } else {
                let cand = -self.k;
                self.neg_next = false;
                self.k += 1;
                if cand != 0 && cand >= self.lo && cand <= self.hi {
                    return Some(cand);
                }
            }
        }
        None
    }
}
