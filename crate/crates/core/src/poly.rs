//! Dense univariate polynomials over the rationals, Sturm sequences and
//! real root isolation with rational endpoints.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Q = BigRational;

/// Coefficients are stored constant term first, with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[BigInt]) -> Self {
        Poly::new(coeffs.iter().map(|c| Q::from_integer(c.clone())).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &Q) -> i8 {
        sign(&self.eval(x))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Q::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(vec![]);
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Remainder of division by a nonzero polynomial.
    pub fn rem(&self, divisor: &Poly) -> Poly {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut r = self.coeffs.clone();
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let q = &r[top] / &lead;
            if !q.is_zero() {
                let shift = top - dd;
                for (k, c) in divisor.coeffs.iter().enumerate() {
                    r[shift + k] -= &q * c;
                }
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    /// Naive interval Horner evaluation over `[lo, hi]`.
    pub fn eval_interval(&self, lo: &Q, hi: &Q) -> (Q, Q) {
        let mut acc = (Q::zero(), Q::zero());
        for c in self.coeffs.iter().rev() {
            let prods = [&acc.0 * lo, &acc.0 * hi, &acc.1 * lo, &acc.1 * hi];
            let mut mn = prods[0].clone();
            let mut mx = prods[0].clone();
            for p in &prods[1..] {
                if *p < mn {
                    mn = p.clone();
                }
                if *p > mx {
                    mx = p.clone();
                }
            }
            acc = (mn + c, mx + c);
        }
        acc
    }
}

pub(crate) fn sign(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn sturm_sequence(f: &Poly) -> Vec<Poly> {
    let mut seq = vec![f.clone()];
    let mut next = f.derivative();
    while !next.is_zero() {
        let r = seq.last().unwrap().rem(&next).neg();
        seq.push(next);
        next = r;
    }
    seq
}

fn count_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for s in signs.filter(|s| *s != 0) {
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

pub fn sign_changes_at(seq: &[Poly], x: &Q) -> usize {
    count_changes(seq.iter().map(|p| p.sign_at(x)))
}

/// Sign changes at `+inf` (`positive = true`) or `-inf`.
pub fn sign_changes_at_infinity(seq: &[Poly], positive: bool) -> usize {
    count_changes(seq.iter().map(|p| {
        let s = sign(p.leading().unwrap());
        let deg = p.degree().unwrap();
        if positive || deg % 2 == 0 {
            s
        } else {
            -s
        }
    }))
}

/// Number of distinct real roots.
pub fn count_real_roots(f: &Poly) -> usize {
    let seq = sturm_sequence(f);
    sign_changes_at_infinity(&seq, false) - sign_changes_at_infinity(&seq, true)
}

/// Isolating interval `(lo, hi]` for a simple real root; `lo == hi` marks an
/// exactly known rational root. Unless exact, `f(hi) != 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RootInterval {
    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// One bisection step.
    pub fn bisect(&mut self, f: &Poly) {
        if self.is_exact() {
            return;
        }
        let two = Q::from_integer(BigInt::from(2));
        let mid = (&self.lo + &self.hi) / two;
        let sm = f.sign_at(&mid);
        if sm == 0 {
            self.lo = mid.clone();
            self.hi = mid;
        } else if sm == f.sign_at(&self.hi) {
            self.hi = mid;
        } else {
            self.lo = mid;
        }
    }

    pub fn refine_to(&mut self, f: &Poly, width: &Q) {
        while !self.is_exact() && self.width() > *width {
            self.bisect(f);
        }
    }
}

/// Isolates all real roots of a squarefree polynomial, ascending.
pub fn isolate_real_roots(f: &Poly) -> Vec<RootInterval> {
    let seq = sturm_sequence(f);
    let lead = f.leading().unwrap().abs();
    let bound = f
        .coeffs()
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(Q::zero(), |a, b| if b > a { b } else { a })
        + Q::one();
    let mut out = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    let two = Q::from_integer(BigInt::from(2));
    while let Some((a, b)) = stack.pop() {
        let n = sign_changes_at(&seq, &a) - sign_changes_at(&seq, &b);
        match n {
            0 => {}
            1 => {
                if f.sign_at(&b) == 0 {
                    out.push(RootInterval { lo: b.clone(), hi: b });
                } else {
                    out.push(RootInterval { lo: a, hi: b });
                }
            }
            _ => {
                let m = (&a + &b) / &two;
                stack.push((a, m.clone()));
                stack.push((m, b));
            }
        }
    }
    out.sort_by(|x, y| x.hi.cmp(&y.hi));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(&c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    #[test]
    fn counts_real_roots() {
        assert_eq!(count_real_roots(&p(&[-1, -1, 1])), 2);
        assert_eq!(count_real_roots(&p(&[1, 0, 1])), 0);
        assert_eq!(count_real_roots(&p(&[5, 0, -5, 0, 1])), 4);
        assert_eq!(count_real_roots(&p(&[-1, -2, 1, 1])), 3);
        assert_eq!(count_real_roots(&p(&[0, 1])), 1);
    }

    #[test]
    fn isolates_and_refines() {
        let f = p(&[-2, 0, 1]);
        let mut roots = isolate_real_roots(&f);
        assert_eq!(roots.len(), 2);
        let w = Q::new(BigInt::from(1), BigInt::from(1u64 << 40));
        for r in roots.iter_mut() {
            r.refine_to(&f, &w);
        }
        let approx: Vec<f64> = roots
            .iter()
            .map(|r| num_traits::ToPrimitive::to_f64(&r.hi).unwrap())
            .collect();
        assert!((approx[0] + 2f64.sqrt()).abs() < 1e-9);
        assert!((approx[1] - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn exact_rational_root() {
        let f = p(&[0, 1]);
        let mut roots = isolate_real_roots(&f);
        assert_eq!(roots.len(), 1);
        roots[0].refine_to(&f, &Q::new(BigInt::from(1), BigInt::from(1024)));
        assert!(roots[0].is_exact());
        assert!(roots[0].lo.is_zero());
    }

    #[test]
    fn interval_eval_contains_value() {
        let f = p(&[1, -3, 0, 2]);
        let lo = Q::new(BigInt::from(1), BigInt::from(3));
        let hi = Q::new(BigInt::from(1), BigInt::from(2));
        let (a, b) = f.eval_interval(&lo, &hi);
        let v = f.eval(&Q::new(BigInt::from(2), BigInt::from(5)));
        assert!(a <= v && v <= b);
    }
}
