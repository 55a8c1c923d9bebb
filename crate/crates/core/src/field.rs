//! Exact arithmetic in a totally real number field given by a defining
//! polynomial and an explicit integral basis.
//!
//! Elements of the ring of integers are integer coordinate vectors over the
//! integral basis. Real embeddings are indexed by the ascending order of the
//! real roots of the defining polynomial. Signs are decided by a certified
//! floating-point filter with an exact interval-refinement fallback.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{self, Poly, RootInterval, Q};

/// Catalog description of a totally real field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub id: String,
    pub degree: usize,
    /// Monic defining polynomial, constant coefficient first.
    pub poly: Vec<BigInt>,
    /// Row `k` holds the power-basis coordinates of the `k`-th basis element.
    pub integral_basis: Vec<Vec<BigRational>>,
    /// Unit generators as element strings.
    pub units: Vec<String>,
    pub disc: BigInt,
    pub known_positive: Option<bool>,
}

/// An algebraic integer: coordinates over the integral basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Elem {
    coords: Vec<i64>,
}

impl Elem {
    pub fn new(coords: Vec<i64>) -> Self {
        Elem { coords }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// An element of the field with rational coordinates over the integral basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElemQ {
    coords: Vec<BigRational>,
}

impl ElemQ {
    pub fn new(coords: Vec<BigRational>) -> Self {
        ElemQ { coords }
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// The integral element, if all coordinates are integers fitting `i64`.
    pub fn to_elem(&self) -> Option<Elem> {
        self.coords
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect::<Option<Vec<_>>>()
            .map(Elem::new)
    }
}

impl From<&Elem> for ElemQ {
    fn from(e: &Elem) -> Self {
        ElemQ::new(e.coords.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }
}

/// Integer order used for canonical coordinate comparisons: 0, 1, -1, 2, -2, ...
fn zigzag_key(x: i64) -> (u64, bool) {
    (x.unsigned_abs(), x < 0)
}

/// Lexicographic comparison of coordinate vectors under the 0, 1, -1, 2, -2, ...
/// integer order.
pub fn zigzag_cmp(a: &[i64], b: &[i64]) -> Ordering {
    a.iter()
        .map(|&x| zigzag_key(x))
        .cmp(b.iter().map(|&x| zigzag_key(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Neg,
    Mul,
}

/// A loaded field: validated multiplication table, certified real roots and
/// precomputed floating-point embedding data for the sign filter.
pub struct Field {
    spec: FieldSpec,
    d: usize,
    poly: Poly,
    basis: Vec<Vec<Q>>,
    basis_inv: Vec<Vec<Q>>,
    /// `mult[(i * d + j) * d + k]`: coordinate `k` of `w_i * w_j`.
    mult: Vec<i64>,
    traces: Vec<i64>,
    trace_gram: Vec<Vec<i64>>,
    roots: Mutex<Vec<RootInterval>>,
    approx: Vec<Vec<f64>>,
    radius: Vec<Vec<f64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("id", &self.spec.id)
            .field("degree", &self.d)
            .finish()
    }
}

fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

impl Field {
    pub fn load(spec: FieldSpec) -> Result<Field> {
        let d = spec.degree;
        if d == 0 {
            return Err(Error::InvalidSpec("degree must be positive".into()));
        }
        if spec.poly.len() != d + 1 || !spec.poly[d].is_one() {
            return Err(Error::InvalidSpec(format!(
                "defining polynomial must be monic of degree {d}"
            )));
        }
        if spec.integral_basis.len() != d {
            return Err(Error::InvalidSpec(format!("integral basis needs {d} rows")));
        }
        let poly = Poly::from_ints(&spec.poly);
        if poly::count_real_roots(&poly) != d {
            return Err(Error::NotTotallyReal);
        }
        let mut basis = Vec::with_capacity(d);
        for row in &spec.integral_basis {
            if row.len() > d {
                return Err(Error::InvalidSpec("basis row longer than degree".into()));
            }
            let mut r = row.clone();
            r.resize(d, Q::zero());
            basis.push(r);
        }
        if !basis[0][0].is_one() || basis[0][1..].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidSpec("first basis element must be 1".into()));
        }
        let basis_inv = linalg::inverse_q(&basis)
            .ok_or_else(|| Error::InvalidSpec("basis is linearly dependent".into()))?;

        let basis_polys: Vec<Poly> = basis.iter().map(|r| Poly::new(r.clone())).collect();
        let mut mult = vec![0i64; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let prod = basis_polys[i].mul(&basis_polys[j]).rem(&poly);
                let mut p = prod.coeffs().to_vec();
                p.resize(d, Q::zero());
                let c = linalg::vec_mul_q(&p, &basis_inv);
                for (k, ck) in c.iter().enumerate() {
                    if !ck.is_integer() {
                        return Err(Error::BasisNotClosed);
                    }
                    mult[(i * d + j) * d + k] = ck
                        .to_integer()
                        .to_i64()
                        .ok_or_else(|| Error::InvalidSpec("structure constant too large".into()))?;
                }
            }
        }
        let traces: Vec<i64> = (0..d)
            .map(|k| (0..d).map(|j| mult[(k * d + j) * d + j]).sum())
            .collect();

        let mut roots = poly::isolate_real_roots(&poly);
        let width = Q::new(BigInt::one(), BigInt::one() << 64);
        for r in roots.iter_mut() {
            r.refine_to(&poly, &width);
        }

        let mut field = Field {
            spec,
            d,
            poly,
            basis,
            basis_inv,
            mult,
            traces,
            trace_gram: vec![],
            roots: Mutex::new(vec![]),
            approx: vec![],
            radius: vec![],
        };
        field.trace_gram = (0..d)
            .map(|k| {
                (0..d)
                    .map(|l| {
                        let mut e = vec![0; d];
                        e[k] = 1;
                        let mut f = vec![0; d];
                        f[l] = 1;
                        field.trace(&field.mul(&Elem::new(e), &Elem::new(f)))
                    })
                    .collect()
            })
            .collect();
        let disc = linalg::det_i64(&field.trace_gram);
        if disc != field.spec.disc {
            return Err(Error::DiscriminantMismatch {
                expected: field.spec.disc.to_string(),
                computed: disc.to_string(),
            });
        }

        let mut approx = vec![vec![0.0; d]; d];
        let mut radius = vec![vec![0.0; d]; d];
        for (i, r) in roots.iter().enumerate() {
            for k in 0..d {
                let (lo, hi) = basis_polys[k].eval_interval(&r.lo, &r.hi);
                let mid = (&lo + &hi) / q_int(2);
                let c = mid.to_f64().unwrap_or(0.0);
                let cq = BigRational::from_float(c).unwrap_or_else(Q::zero);
                let dev = std::cmp::max((&cq - &lo).abs(), (&hi - &cq).abs());
                approx[i][k] = c;
                radius[i][k] =
                    dev.to_f64().unwrap_or(f64::INFINITY) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
            }
        }
        field.approx = approx;
        field.radius = radius;
        field.roots = Mutex::new(roots);
        Ok(field)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn id(&self) -> &str {
        &self.spec.id
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn disc(&self) -> &BigInt {
        &self.spec.disc
    }

    pub fn known_positive(&self) -> bool {
        self.spec.known_positive.unwrap_or(false)
    }

    pub fn defining_poly(&self) -> &Poly {
        &self.poly
    }

    /// Structure constant: coordinate `k` of `w_i * w_j`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> i64 {
        self.mult[(i * self.d + j) * self.d + k]
    }

    /// Gram matrix of the integer trace form `Tr(w_k w_l)`.
    pub fn trace_gram(&self) -> &[Vec<i64>] {
        &self.trace_gram
    }

    pub fn basis_traces(&self) -> &[i64] {
        &self.traces
    }

    // ---- construction ------------------------------------------------------

    pub fn zero(&self) -> Elem {
        Elem::new(vec![0; self.d])
    }

    pub fn one(&self) -> Elem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Elem {
        let mut c = vec![0; self.d];
        c[0] = n;
        Elem::new(c)
    }

    pub fn basis_elem(&self, k: usize) -> Elem {
        let mut c = vec![0; self.d];
        c[k] = 1;
        Elem::new(c)
    }

    pub fn elem(&self, coords: Vec<i64>) -> Result<Elem> {
        if coords.len() != self.d {
            return Err(Error::FieldMismatch);
        }
        Ok(Elem::new(coords))
    }

    pub fn check(&self, a: &Elem) -> Result<()> {
        if a.coords.len() == self.d {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    // ---- ring arithmetic ----------------------------------------------------

    /// Checked ring operation; `b` is ignored for `Neg`.
    pub fn arith(&self, op: ArithOp, a: &Elem, b: &Elem) -> Result<Elem> {
        self.check(a)?;
        if op != ArithOp::Neg {
            self.check(b)?;
        }
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Neg => self.neg(a),
            ArithOp::Mul => self.mul(a, b),
        })
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        debug_assert_eq!(a.coords.len(), b.coords.len());
        Elem::new(
            a.coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| x.checked_add(*y).expect("coordinate overflow"))
                .collect(),
        )
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        debug_assert_eq!(a.coords.len(), b.coords.len());
        Elem::new(
            a.coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| x.checked_sub(*y).expect("coordinate overflow"))
                .collect(),
        )
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        Elem::new(a.coords.iter().map(|x| x.checked_neg().expect("coordinate overflow")).collect())
    }

    pub fn scale(&self, a: &Elem, s: i64) -> Elem {
        Elem::new(
            a.coords
                .iter()
                .map(|x| x.checked_mul(s).expect("coordinate overflow"))
                .collect(),
        )
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let d = self.d;
        assert!(a.coords.len() == d && b.coords.len() == d, "field mismatch");
        let mut acc = vec![0i128; d];
        for (i, &ai) in a.coords.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.coords.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let p = ai as i128 * bj as i128;
                let base = (i * d + j) * d;
                for (k, slot) in acc.iter_mut().enumerate() {
                    let c = self.mult[base + k];
                    if c != 0 {
                        *slot += p * c as i128;
                    }
                }
            }
        }
        Elem::new(
            acc.into_iter()
                .map(|x| i64::try_from(x).expect("coordinate overflow"))
                .collect(),
        )
    }

    pub fn square(&self, a: &Elem) -> Elem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &Elem, mut e: u32) -> Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn product<'a>(&self, items: impl IntoIterator<Item = &'a Elem>) -> Elem {
        items.into_iter().fold(self.one(), |acc, x| self.mul(&acc, x))
    }

    /// Matrix of multiplication by `a`: row `j` holds the coordinates of `a * w_j`.
    fn regular_rep(&self, a: &Elem) -> Vec<Vec<i64>> {
        (0..self.d).map(|j| self.mul(a, &self.basis_elem(j)).coords).collect()
    }

    pub fn trace(&self, a: &Elem) -> i64 {
        let t: i128 = a
            .coords
            .iter()
            .zip(&self.traces)
            .map(|(&x, &t)| x as i128 * t as i128)
            .sum();
        i64::try_from(t).expect("trace overflow")
    }

    pub fn norm(&self, a: &Elem) -> BigInt {
        linalg::det_i64(&self.regular_rep(a))
    }

    /// Absolute trace `Tr(a) / d`.
    pub fn trace_abs(&self, a: &Elem) -> BigRational {
        BigRational::new(BigInt::from(self.trace(a)), BigInt::from(self.d as u64))
    }

    /// Inverse in the field.
    pub fn inverse(&self, a: &Elem) -> Result<ElemQ> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        // a * x = 1  <=>  x * R = e_0 with R the regular representation.
        let r = self.regular_rep(a);
        let rq: Vec<Vec<Q>> = r
            .iter()
            .map(|row| row.iter().map(|&x| q_int(x)).collect())
            .collect();
        let inv = linalg::inverse_q(&rq).expect("nonzero element has invertible regular rep");
        let mut e0 = vec![Q::zero(); self.d];
        e0[0] = Q::one();
        Ok(ElemQ::new(linalg::vec_mul_q(&e0, &inv)))
    }

    /// `a / b` when the quotient is integral.
    pub fn div_exact(&self, a: &Elem, b: &Elem) -> Result<Option<Elem>> {
        let inv = self.inverse(b)?;
        let q = self.mul_q(&ElemQ::from(a), &inv);
        Ok(q.to_elem())
    }

    pub fn is_unit(&self, a: &Elem) -> bool {
        !a.is_zero() && self.norm(a).abs().is_one()
    }

    /// Inverse of a unit, `None` if `a` is not a unit.
    pub fn unit_inverse(&self, a: &Elem) -> Option<Elem> {
        if !self.is_unit(a) {
            return None;
        }
        self.inverse(a).ok().and_then(|q| q.to_elem())
    }

    pub fn mul_q(&self, a: &ElemQ, b: &ElemQ) -> ElemQ {
        let d = self.d;
        let mut acc = vec![Q::zero(); d];
        for (i, ai) in a.coords.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coords.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let p = ai * bj;
                for (k, slot) in acc.iter_mut().enumerate() {
                    let c = self.mult[(i * d + j) * d + k];
                    if c != 0 {
                        *slot += &p * q_int(c);
                    }
                }
            }
        }
        ElemQ::new(acc)
    }

    // ---- power basis ------------------------------------------------------

    pub fn to_power_basis(&self, a: &ElemQ) -> Vec<Q> {
        linalg::vec_mul_q(&a.coords, &self.basis)
    }

    pub fn from_power_basis(&self, p: &[Q]) -> ElemQ {
        let reduced = Poly::new(p.to_vec()).rem(&self.poly);
        let mut c = reduced.coeffs().to_vec();
        c.resize(self.d, Q::zero());
        ElemQ::new(linalg::vec_mul_q(&c, &self.basis_inv))
    }

    fn power_poly(&self, a: &Elem) -> Poly {
        Poly::new(self.to_power_basis(&ElemQ::from(a)))
    }

    // ---- embeddings and signs --------------------------------------------

    /// Certified floating-point sign; `None` when the error bound is too wide.
    fn approx_sign(&self, a: &[i64], i: usize) -> Option<i8> {
        const EXACT: i64 = 1 << 53;
        let (c, r) = (&self.approx[i], &self.radius[i]);
        let mut s = 0.0f64;
        let mut err = 0.0f64;
        let mut mag = 0.0f64;
        for k in 0..self.d {
            let ak = a[k];
            if ak == 0 {
                continue;
            }
            if !(-EXACT..=EXACT).contains(&ak) {
                return None;
            }
            let af = ak as f64;
            let term = af * c[k];
            s += term;
            err += af.abs() * r[k];
            mag += term.abs();
        }
        let bound = (err + mag * (2.0 * self.d as f64 + 4.0) * f64::EPSILON) * (1.0 + 1e-10)
            + f64::MIN_POSITIVE;
        if !bound.is_finite() {
            None
        } else if s > bound {
            Some(1)
        } else if s < -bound {
            Some(-1)
        } else {
            None
        }
    }

    fn exact_sign(&self, a: &Elem, i: usize) -> i8 {
        let p = self.power_poly(a);
        let mut roots = self.roots.lock().expect("root lock poisoned");
        loop {
            let r = &roots[i];
            let (lo, hi) = p.eval_interval(&r.lo, &r.hi);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            if r.is_exact() {
                return poly::sign(&lo);
            }
            // nonzero elements have nonzero images, so this terminates
            for _ in 0..8 {
                roots[i].bisect(&self.poly);
            }
        }
    }

    /// Exact sign of `sigma_i(a)`, embeddings ordered by ascending root.
    pub fn sign_at(&self, a: &Elem, i: usize) -> i8 {
        assert!(i < self.d, "embedding index out of range");
        if a.is_zero() {
            return 0;
        }
        self.approx_sign(&a.coords, i)
            .unwrap_or_else(|| self.exact_sign(a, i))
    }

    pub fn signs(&self, a: &Elem) -> Vec<i8> {
        (0..self.d).map(|i| self.sign_at(a, i)).collect()
    }

    pub fn is_totally_positive(&self, a: &Elem) -> bool {
        !a.is_zero() && (0..self.d).all(|i| self.sign_at(a, i) > 0)
    }

    pub fn is_totally_nonneg(&self, a: &Elem) -> bool {
        a.is_zero() || self.is_totally_positive(a)
    }

    /// `a > b` in every embedding.
    pub fn totally_greater(&self, a: &Elem, b: &Elem) -> bool {
        self.is_totally_positive(&self.sub(a, b))
    }

    /// Uncertified floating-point embeddings, for heuristics only.
    pub fn embeddings_f64(&self, a: &Elem) -> Vec<f64> {
        (0..self.d)
            .map(|i| {
                a.coords
                    .iter()
                    .zip(&self.approx[i])
                    .map(|(&x, c)| x as f64 * c)
                    .sum()
            })
            .collect()
    }

    /// Rational interval of width at most `prec` containing `max_i |sigma_i(a)|`.
    pub fn house(&self, a: &Elem, prec: &BigRational) -> (BigRational, BigRational) {
        assert!(prec.is_positive(), "precision must be positive");
        let p = self.power_poly(a);
        let mut roots = self.roots.lock().expect("root lock poisoned");
        loop {
            let mut lo = Q::zero();
            let mut hi = Q::zero();
            for r in roots.iter() {
                let (l, h) = p.eval_interval(&r.lo, &r.hi);
                let (al, ah) = if !l.is_negative() {
                    (l, h)
                } else if !h.is_positive() {
                    (-h, -l)
                } else {
                    (Q::zero(), std::cmp::max(-l, h))
                };
                if al > lo {
                    lo = al;
                }
                if ah > hi {
                    hi = ah;
                }
            }
            if &hi - &lo <= *prec {
                return (lo, hi);
            }
            for r in roots.iter_mut() {
                for _ in 0..4 {
                    r.bisect(&self.poly);
                }
            }
        }
    }

    pub fn two_is_ramified(&self) -> bool {
        self.spec.disc.is_even()
    }

    // ---- parsing and formatting -------------------------------------------

    pub fn parse_elem_q(&self, s: &str) -> Result<ElemQ> {
        let p = parse_power_expr(s)?;
        Ok(self.from_power_basis(&p))
    }

    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let q = self.parse_elem_q(s)?;
        if !q.is_integral() {
            return Err(Error::NotIntegral(s.trim().to_string()));
        }
        q.to_elem()
            .ok_or_else(|| Error::Syntax(format!("coordinates of `{}` too large", s.trim())))
    }

    pub fn format_elem_q(&self, a: &ElemQ) -> String {
        format_power(&self.to_power_basis(a))
    }

    pub fn format_elem(&self, a: &Elem) -> String {
        self.format_elem_q(&ElemQ::from(a))
    }

    /// Canonical order: ascending trace, then coordinates under 0, 1, -1, 2, ...
    pub fn canonical_cmp(&self, a: &Elem, b: &Elem) -> Ordering {
        self.trace(a)
            .cmp(&self.trace(b))
            .then_with(|| zigzag_cmp(&a.coords, &b.coords))
    }

    /// Canonical square-root sign: positive at the first embedding.
    pub fn normalize_sign(&self, a: &Elem) -> Elem {
        if !a.is_zero() && self.sign_at(a, 0) < 0 {
            self.neg(a)
        } else {
            a.clone()
        }
    }
}

// ---- element grammar ------------------------------------------------------

fn format_power(p: &[Q]) -> String {
    let mut out = String::new();
    for (deg, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push(if neg { '-' } else { '+' });
        }
        let a = c.abs();
        let coef = if a.is_integer() {
            a.to_integer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        };
        match deg {
            0 => out.push_str(&coef),
            _ => {
                if !a.is_one() {
                    out.push_str(&coef);
                    out.push('*');
                }
                out.push('t');
                if deg > 1 {
                    out.push('^');
                    out.push_str(&deg.to_string());
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.char_indices().peekable(), src }
    }

    fn skip_ws(&mut self) {
        while self.chars.peek().is_some_and(|(_, c)| c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.peek().map(|(_, c)| *c)
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.chars.next();
            true
        } else {
            false
        }
    }

    fn nat(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let mut digits = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return Err(self.error("expected a number"));
        }
        Ok(digits.parse().expect("digits parse"))
    }

    fn error(&mut self, msg: &str) -> Error {
        let pos = self.chars.peek().map_or(self.src.len(), |(i, _)| *i);
        Error::Syntax(format!("{msg} at offset {pos} in `{}`", self.src))
    }
}

/// Parses an element expression into power-basis coefficients.
pub fn parse_power_expr(s: &str) -> Result<Vec<Q>> {
    let mut lx = Lexer::new(s);
    let mut coeffs: Vec<Q> = Vec::new();
    let mut first = true;
    loop {
        let negative = if first {
            lx.eat('-')
        } else if lx.eat('+') {
            false
        } else if lx.eat('-') {
            true
        } else if lx.peek().is_none() {
            break;
        } else {
            return Err(lx.error("expected `+` or `-`"));
        };
        first = false;
        let (coef, deg) = parse_term(&mut lx)?;
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, Q::zero());
        }
        coeffs[deg] += if negative { -coef } else { coef };
    }
    if coeffs.is_empty() {
        return Err(Error::Syntax("empty expression".into()));
    }
    Ok(coeffs)
}

fn parse_term(lx: &mut Lexer<'_>) -> Result<(Q, usize)> {
    let coef = match lx.peek() {
        Some('t') => None,
        Some(c) if c.is_ascii_digit() => {
            let num = lx.nat()?;
            let den = if lx.eat('/') { lx.nat()? } else { BigInt::one() };
            if den.is_zero() {
                return Err(lx.error("zero denominator"));
            }
            Some(Q::new(num, den))
        }
        _ => return Err(lx.error("expected a coefficient or `t`")),
    };
    let has_t = match coef {
        None => true,
        Some(_) => lx.eat('*'),
    };
    let mut deg = 0usize;
    if has_t {
        if !lx.eat('t') {
            return Err(lx.error("expected `t`"));
        }
        deg = 1;
        if lx.eat('^') {
            deg = lx
                .nat()?
                .to_usize()
                .filter(|&n| n <= 4096)
                .ok_or_else(|| lx.error("exponent too large"))?;
        }
    }
    Ok((coef.unwrap_or_else(Q::one), deg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    fn field(id: &str) -> Field {
        Catalog::builtin().load(id).unwrap()
    }

    fn e(f: &Field, s: &str) -> Elem {
        f.parse_elem(s).unwrap()
    }

    #[test]
    fn golden_ratio_field_loads() {
        let f = field("qsqrt5");
        assert_eq!(f.degree(), 2);
        assert_eq!(*f.disc(), BigInt::from(5));
        assert!(!f.two_is_ramified());
    }

    #[test]
    fn complex_roots_rejected() {
        let spec = FieldSpec {
            id: "bad".into(),
            degree: 2,
            poly: vec![1.into(), 0.into(), 1.into()],
            integral_basis: vec![vec![q_int(1)], vec![q_int(0), q_int(1)]],
            units: vec![],
            disc: BigInt::from(-4),
            known_positive: None,
        };
        assert_eq!(Field::load(spec).unwrap_err(), Error::NotTotallyReal);
    }

    #[test]
    fn non_closed_basis_and_bad_discriminant() {
        let half = Q::new(1.into(), 2.into());
        let spec = FieldSpec {
            id: "bad".into(),
            degree: 2,
            poly: vec![(-2).into(), 0.into(), 1.into()],
            integral_basis: vec![vec![q_int(1)], vec![half.clone(), half]],
            units: vec![],
            disc: BigInt::from(2),
            known_positive: None,
        };
        assert_eq!(Field::load(spec).unwrap_err(), Error::BasisNotClosed);
        let spec = FieldSpec {
            id: "bad".into(),
            degree: 2,
            poly: vec![(-2).into(), 0.into(), 1.into()],
            integral_basis: vec![vec![q_int(1)], vec![q_int(0), q_int(1)]],
            units: vec![],
            disc: BigInt::from(7),
            known_positive: None,
        };
        assert!(matches!(Field::load(spec), Err(Error::DiscriminantMismatch { .. })));
    }

    #[test]
    fn zeta20_dyadic_identity() {
        let f = field("zeta20");
        let pi = e(&f, "t^3+t^2-3*t-2");
        let eps = e(&f, "t+2");
        assert_eq!(f.mul(&pi, &pi), f.scale(&eps, 2));
        assert_eq!(f.mul(&pi, &pi), e(&f, "2*t+4"));
        assert_eq!(f.norm(&e(&f, "t^2-t")), BigInt::from(5));
        assert!(f.is_totally_positive(&eps));
    }

    #[test]
    fn golden_squares_sum_to_three() {
        let f = field("qsqrt5");
        let t = e(&f, "t");
        let t1 = e(&f, "t-1");
        assert_eq!(f.add(&f.square(&t), &f.square(&t1)), f.from_int(3));
        assert_eq!(f.mul(&t, &f.one()), t);
    }

    #[test]
    fn signs_and_positivity() {
        let f5 = field("qsqrt5");
        let t = e(&f5, "t");
        assert_eq!(f5.sign_at(&t, 0), -1);
        assert_eq!(f5.sign_at(&t, 1), 1);
        assert_eq!(f5.sign_at(&f5.zero(), 0), 0);
        let f6 = field("qsqrt6");
        let a = e(&f6, "3+t");
        assert_eq!(f6.signs(&a), vec![1, 1]);
        let f2 = field("qsqrt2");
        assert!(!f2.is_totally_positive(&e(&f2, "t")));
        assert!(f2.is_totally_positive(&f2.one()));
    }

    #[test]
    fn exact_sign_fallback_agrees() {
        let f = field("zeta20");
        for s in ["t^2-t", "t+2", "t^3+t^2-3*t-2", "-t^3+5*t-1", "t^2-2"] {
            let a = e(&f, s);
            for i in 0..4 {
                assert_eq!(f.sign_at(&a, i), f.exact_sign(&a, i), "{s} at {i}");
            }
        }
    }

    #[test]
    fn trace_and_norm() {
        let f = field("zeta20");
        assert_eq!(f.trace(&f.one()), 4);
        assert_eq!(f.norm(&f.one()), BigInt::one());
        let f6 = field("qsqrt6");
        assert_eq!(f6.norm(&e(&f6, "3+t")), BigInt::from(3));
        assert_eq!(f6.trace_abs(&e(&f6, "3+t")), q_int(3));
    }

    #[test]
    fn house_intervals() {
        let prec = Q::new(1.into(), BigInt::from(1u64 << 30));
        let f2 = field("qsqrt2");
        let (lo, hi) = f2.house(&f2.one(), &prec);
        assert!(lo <= q_int(1) && q_int(1) <= hi);
        let (lo, hi) = f2.house(&e(&f2, "1+t"), &prec);
        let v = 1.0 + 2f64.sqrt();
        assert!(lo.to_f64().unwrap() <= v + 1e-9 && v - 1e-9 <= hi.to_f64().unwrap());
        assert!(&hi - &lo <= prec);
        let f5 = field("qsqrt5");
        let (lo, hi) = f5.house(&e(&f5, "t"), &prec);
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(lo.to_f64().unwrap() <= g + 1e-9 && g - 1e-9 <= hi.to_f64().unwrap());
    }

    #[test]
    fn ramification_of_two() {
        assert!(!field("qsqrt5").two_is_ramified());
        assert!(field("qsqrt2").two_is_ramified());
        assert!(field("zeta20").two_is_ramified());
        assert_eq!(*field("zeta20").disc(), BigInt::from(2000));
    }

    #[test]
    fn parse_and_format() {
        let f = field("zeta20");
        let pi = e(&f, "t^3+t^2-3*t-2");
        assert_eq!(f.format_elem(&pi), "t^3+t^2-3*t-2");
        assert_eq!(f.format_elem(&e(&f, " - t + t^2 ")), "t^2-t");
        assert_eq!(f.format_elem(&f.zero()), "0");
        assert!(matches!(f.parse_elem("t^"), Err(Error::Syntax(_))));
        assert!(matches!(f.parse_elem("2t"), Err(Error::Syntax(_))));
        assert!(matches!(f.parse_elem(""), Err(Error::Syntax(_))));

        let f5 = field("qsqrt5");
        assert!(matches!(f5.parse_elem("1/3*t"), Err(Error::NotIntegral(_))));
        let q = f5.parse_elem_q("1/3*t").unwrap();
        assert!(!q.is_integral());
        assert_eq!(f5.format_elem_q(&q), "1/3*t");
    }

    #[test]
    fn half_integral_power_basis_input() {
        // Q(sqrt 5) presented by x^2 - 5 with basis {1, (1+t)/2}
        let spec = FieldSpec {
            id: "sqrt5-alt".into(),
            degree: 2,
            poly: vec![(-5).into(), 0.into(), 1.into()],
            integral_basis: vec![
                vec![q_int(1)],
                vec![Q::new(1.into(), 2.into()), Q::new(1.into(), 2.into())],
            ],
            units: vec![],
            disc: BigInt::from(5),
            known_positive: None,
        };
        let f = Field::load(spec).unwrap();
        let g = f.parse_elem("1/2+1/2*t").unwrap();
        assert_eq!(g.coords(), &[0, 1]);
        assert_eq!(f.format_elem(&g), "1/2*t+1/2");
        assert!(matches!(f.parse_elem("1/3*t"), Err(Error::NotIntegral(_))));
    }

    #[test]
    fn inverse_and_division() {
        let f = field("qsqrt3");
        let u = e(&f, "2+t");
        let inv = f.unit_inverse(&u).unwrap();
        assert_eq!(f.mul(&u, &inv), f.one());
        assert_eq!(f.div_exact(&f.from_int(6), &f.from_int(3)).unwrap(), Some(f.from_int(2)));
        assert_eq!(f.div_exact(&f.from_int(3), &f.from_int(2)).unwrap(), None);
        assert!(f.unit_inverse(&f.from_int(2)).is_none());
    }

    #[test]
    fn arith_rejects_mismatched_degrees() {
        let f = field("qsqrt2");
        let bad = Elem::new(vec![1, 2, 3]);
        assert_eq!(f.arith(ArithOp::Add, &f.one(), &bad), Err(Error::FieldMismatch));
        assert_eq!(f.arith(ArithOp::Mul, &f.one(), &f.one()), Ok(f.one()));
    }

    #[test]
    fn zigzag_order() {
        let mut v = vec![vec![-1], vec![2], vec![0], vec![1], vec![-2]];
        v.sort_by(|a, b| zigzag_cmp(a, b));
        assert_eq!(v, vec![vec![0], vec![1], vec![-1], vec![2], vec![-2]]);
    }
}
