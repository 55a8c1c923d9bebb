//! Classical totally positive definite quadratic forms over the ring of
//! integers: validation, exact representation, unit splitting, diagonal
//! classification and coverage scans.

use std::ops::ControlFlow;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::cone;
use crate::enumerate::{Enumerator, DEFAULT_NODE_LIMIT};
use crate::error::{Error, Result};
use crate::field::{Elem, ElemQ, Field};
use crate::linalg::inverse_q;

/// Gram matrix of a quadratic form: entry `(i, j)` is `B(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramForm {
    gram: Vec<Vec<Elem>>,
}

impl GramForm {
    /// Validates symmetry and total positive definiteness.
    pub fn new(f: &Field, gram: Vec<Vec<Elem>>) -> Result<GramForm> {
        let r = gram.len();
        if r == 0 {
            return Err(Error::NotPositiveDefinite);
        }
        for row in &gram {
            if row.len() != r {
                return Err(Error::NotSymmetric);
            }
            for x in row {
                f.check(x)?;
            }
        }
        for i in 0..r {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        for minor in leading_minors(f, &gram) {
            if !f.is_totally_positive(&minor) {
                return Err(Error::NotPositiveDefinite);
            }
        }
        Ok(GramForm { gram })
    }

    /// The diagonal form `<a_1, ..., a_r>`.
    pub fn diag(f: &Field, entries: &[Elem]) -> Result<GramForm> {
        let r = entries.len();
        let gram = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| if i == j { entries[i].clone() } else { f.zero() })
                    .collect()
            })
            .collect();
        GramForm::new(f, gram)
    }

    /// Sum of `s` squares.
    pub fn sum_of_squares(f: &Field, s: usize) -> Result<GramForm> {
        GramForm::diag(f, &vec![f.one(); s])
    }

    /// Parses `<a1,...,ar>` or `[[g11,...],...]` with element entries.
    pub fn parse(f: &Field, s: &str) -> Result<GramForm> {
        let s = s.trim();
        let entry = |t: &str| {
            f.parse_elem(t).map_err(|e| match e {
                Error::NotIntegral(x) => Error::NotClassical(x),
                other => other,
            })
        };
        if let Some(inner) = s.strip_prefix('<').and_then(|x| x.strip_suffix('>')) {
            let entries = split_top(inner)?
                .iter()
                .map(|t| entry(t))
                .collect::<Result<Vec<_>>>()?;
            GramForm::diag(f, &entries)
        } else if let Some(inner) = s.strip_prefix('[').and_then(|x| x.strip_suffix(']')) {
            let mut gram = Vec::new();
            for row in split_top(inner)? {
                let row = row.trim();
                let body = row
                    .strip_prefix('[')
                    .and_then(|x| x.strip_suffix(']'))
                    .ok_or_else(|| Error::Syntax(format!("expected a row `[...]`, got `{row}`")))?;
                gram.push(
                    split_top(body)?
                        .iter()
                        .map(|t| entry(t))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            GramForm::new(f, gram)
        } else {
            Err(Error::Syntax(format!("expected `<...>` or `[[...]]`, got `{s}`")))
        }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<Elem>] {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> &Elem {
        &self.gram[i][j]
    }

    pub fn is_diagonal(&self) -> bool {
        let r = self.rank();
        (0..r).all(|i| (0..r).all(|j| i == j || self.gram[i][j].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<Elem> {
        (0..self.rank()).map(|i| self.gram[i][i].clone()).collect()
    }

    /// `B(x, y)`.
    pub fn bilinear(&self, f: &Field, x: &[Elem], y: &[Elem]) -> Elem {
        let mut acc = f.zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() || self.gram[i][j].is_zero() {
                    continue;
                }
                acc = f.add(&acc, &f.mul(&f.mul(xi, &self.gram[i][j]), yj));
            }
        }
        acc
    }

    /// `Q(x) = B(x, x)`.
    pub fn eval(&self, f: &Field, x: &[Elem]) -> Elem {
        self.bilinear(f, x, x)
    }

    pub fn format(&self, f: &Field) -> String {
        let fmt_row = |row: &[Elem]| {
            row.iter().map(|x| f.format_elem(x)).collect::<Vec<_>>().join(",")
        };
        if self.is_diagonal() {
            format!("<{}>", fmt_row(&self.diagonal()))
        } else {
            let rows: Vec<String> = self.gram.iter().map(|r| format!("[{}]", fmt_row(r))).collect();
            format!("[{}]", rows.join(","))
        }
    }
}

fn split_top(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Syntax(format!("unbalanced brackets in `{s}`")));
        }
    }
    if depth != 0 {
        return Err(Error::Syntax(format!("unbalanced brackets in `{s}`")));
    }
    out.push(&s[start..]);
    if out.iter().any(|t| t.trim().is_empty()) {
        return Err(Error::Syntax(format!("empty entry in `{s}`")));
    }
    Ok(out)
}

/// Leading principal minors via fraction-free elimination over the ring.
fn leading_minors(f: &Field, m: &[Vec<Elem>]) -> Vec<Elem> {
    let n = m.len();
    let mut a: Vec<Vec<Elem>> = m.to_vec();
    let mut prev = f.one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(a[k][k].clone());
        if a[k][k].is_zero() {
            // a zero leading minor: the remaining ones are irrelevant
            out.resize(n, f.zero());
            return out;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = f.sub(&f.mul(&a[i][j], &a[k][k]), &f.mul(&a[i][k], &a[k][j]));
                a[i][j] = f
                    .div_exact(&num, &prev)
                    .expect("nonzero pivot")
                    .expect("fraction-free elimination divides exactly");
            }
        }
        prev = a[k][k].clone();
    }
    out
}

/// Determinant over the ring.
pub fn det(f: &Field, m: &[Vec<Elem>]) -> Elem {
    let n = m.len();
    if n == 0 {
        return f.one();
    }
    let mut a: Vec<Vec<Elem>> = m.to_vec();
    let mut negate = false;
    let mut prev = f.one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return f.zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = f.sub(&f.mul(&a[i][j], &a[k][k]), &f.mul(&a[i][k], &a[k][j]));
                a[i][j] = f.div_exact(&num, &prev).expect("nonzero").expect("exact");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        f.neg(&d)
    } else {
        d
    }
}

/// Integer trace-form realization of a form: entry `((i,k),(j,l))` is
/// `Tr(g_ij w_k w_l)`, indexed `i * d + k`.
pub fn z_realization(f: &Field, form: &GramForm) -> Vec<Vec<i64>> {
    let d = f.degree();
    let r = form.rank();
    let mut z = vec![vec![0i64; r * d]; r * d];
    for i in 0..r {
        for j in 0..r {
            let g = form.entry(i, j);
            if g.is_zero() {
                continue;
            }
            for k in 0..d {
                let gk = f.mul(g, &f.basis_elem(k));
                for l in 0..d {
                    z[i * d + k][j * d + l] = f.trace(&f.mul(&gk, &f.basis_elem(l)));
                }
            }
        }
    }
    z
}

/// A vector `v` with `Q(v)` equal to the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub coords: Vec<Elem>,
}

/// Representation tester with a cached enumerator for one form.
#[derive(Clone, Debug)]
pub struct Representer<'f> {
    f: &'f Field,
    form: GramForm,
    enumerator: Enumerator,
}

impl<'f> Representer<'f> {
    pub fn new(f: &'f Field, form: &GramForm) -> Result<Representer<'f>> {
        let enumerator = Enumerator::new(&z_realization(f, form))?;
        Ok(Representer { f, form: form.clone(), enumerator })
    }

    pub fn form(&self) -> &GramForm {
        &self.form
    }

    /// Canonical witness for `alpha`, `None` when provably not represented.
    pub fn represents(&self, alpha: &Elem, node_limit: u64) -> Result<Option<Witness>> {
        let f = self.f;
        f.check(alpha)?;
        let (d, r) = (f.degree(), self.form.rank());
        if alpha.is_zero() {
            return Ok(Some(Witness { coords: vec![f.zero(); r] }));
        }
        if !f.is_totally_positive(alpha) {
            return Ok(None);
        }
        let level = f.trace(alpha);
        let mut found = None;
        self.enumerator.for_each(level, node_limit, |x, val| {
            if val != level {
                return ControlFlow::Continue(());
            }
            let v: Vec<Elem> = (0..r).map(|i| Elem::new(x[i * d..(i + 1) * d].to_vec())).collect();
            if self.form.eval(f, &v) == *alpha {
                found = Some(Witness { coords: v });
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        if let Some(w) = &found {
            assert_eq!(self.form.eval(f, &w.coords), *alpha);
        }
        Ok(found)
    }
}

pub fn represents(
    f: &Field,
    form: &GramForm,
    alpha: &Elem,
    node_limit: u64,
) -> Result<Option<Witness>> {
    Representer::new(f, form)?.represents(alpha, node_limit)
}

impl Field {
    /// Square root with positive first embedding, if `a` is a square.
    pub fn sqrt(&self, a: &Elem) -> Result<Option<Elem>> {
        if a.is_zero() {
            return Ok(Some(a.clone()));
        }
        if !self.is_totally_nonneg(a) {
            return Ok(None);
        }
        let n = self.norm(a);
        let root_n = n.sqrt();
        if &root_n * &root_n != n {
            return Ok(None);
        }
        if let Some(r) = self.sqrt_from_embeddings(a) {
            return Ok(Some(self.normalize_sign(&r)));
        }
        let unary = GramForm::diag(self, &[self.one()])?;
        Ok(represents(self, &unary, a, DEFAULT_NODE_LIMIT)?
            .map(|w| self.normalize_sign(&w.coords[0])))
    }

    /// Rounds the coordinates of every sign choice of the embedded square
    /// roots and keeps a candidate only if it squares to `a` exactly.
    fn sqrt_from_embeddings(&self, a: &Elem) -> Option<Elem> {
        let d = self.degree();
        let gram: Vec<Vec<BigRational>> = self
            .trace_gram()
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
            .collect();
        let ginv: Vec<Vec<f64>> = inverse_q(&gram)?
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        let basis: Vec<Vec<f64>> = (0..d).map(|k| self.embeddings_f64(&self.basis_elem(k))).collect();
        let roots: Vec<f64> = self.embeddings_f64(a).iter().map(|v| v.max(0.0).sqrt()).collect();
        for mask in 0u32..1 << (d - 1) {
            let s: Vec<f64> = (0..d)
                .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -roots[i] } else { roots[i] })
                .collect();
            // traces Tr(r w_j), then coordinates through the inverse trace form
            let y: Vec<f64> = (0..d).map(|j| (0..d).map(|i| s[i] * basis[j][i]).sum()).collect();
            let x: Vec<f64> = (0..d).map(|k| (0..d).map(|j| ginv[k][j] * y[j]).sum()).collect();
            if x.iter().any(|v| !v.is_finite() || v.abs() > 1e15) {
                continue;
            }
            let r = Elem::new(x.iter().map(|v| v.round() as i64).collect());
            if self.square(&r) == *a {
                return Some(r);
            }
        }
        None
    }

    pub fn is_square(&self, a: &Elem) -> Result<bool> {
        Ok(self.sqrt(a)?.is_some())
    }

    /// The square root of `n` that is positive at the last embedding, when
    /// it lies in the field.
    pub fn contains_sqrt(&self, n: i64) -> Result<Option<Elem>> {
        let last = self.degree() - 1;
        Ok(self.sqrt(&self.from_int(n))?.map(|r| {
            if self.sign_at(&r, last) < 0 {
                self.neg(&r)
            } else {
                r
            }
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Universality {
    AllRepresented { checked: usize },
    Counterexample(Elem),
}

/// Checks every totally positive element of trace at most `t`.
pub fn is_universal_up_to(
    f: &Field,
    form: &GramForm,
    t: i64,
    node_limit: u64,
) -> Result<Universality> {
    let rep = Representer::new(f, form)?;
    let targets = cone::enumerate_tp_by_trace(f, t, node_limit)?;
    for a in &targets {
        if rep.represents(a, node_limit)?.is_none() {
            return Ok(Universality::Counterexample(a.clone()));
        }
    }
    Ok(Universality::AllRepresented { checked: targets.len() })
}

/// Unimodular basis change splitting off a represented unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitSplit {
    /// Columns are the new basis vectors; column 0 represents the unit.
    pub transform: Vec<Vec<Elem>>,
    pub rest: Option<GramForm>,
}

fn column(m: &[Vec<Elem>], j: usize) -> Vec<Elem> {
    m.iter().map(|row| row[j].clone()).collect()
}

fn round_quotient(f: &Field, a: &Elem, b: &Elem) -> Result<Elem> {
    let q = f.mul_q(&ElemQ::from(a), &f.inverse(b)?);
    let d = f.degree();
    let floors: Vec<i64> = q
        .coords()
        .iter()
        .map(|c| c.floor().to_integer().to_i64().expect("quotient fits"))
        .collect();
    let mut best: Option<(num_bigint::BigInt, Elem)> = None;
    for mask in 0u32..(1 << d) {
        let cand = Elem::new((0..d).map(|k| floors[k] + i64::from(mask >> k & 1)).collect());
        let n = f.norm(&f.sub(a, &f.mul(&cand, b))).abs();
        if best.as_ref().is_none_or(|(bn, _)| n < *bn) {
            best = Some((n, cand));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

/// Splits `<eps>` off a form representing the totally positive unit `eps`.
pub fn split_off_unit(f: &Field, form: &GramForm, eps: &Elem, node_limit: u64) -> Result<UnitSplit> {
    if !f.is_unit(eps) {
        return Err(Error::NotAUnit);
    }
    let v = represents(f, form, eps, node_limit)?
        .ok_or(Error::NotRepresented)?
        .coords;
    let r = form.rank();
    let ident = |i: usize, j: usize| if i == j { f.one() } else { f.zero() };
    let mut a: Vec<Vec<Elem>> = (0..r).map(|i| (0..r).map(|j| ident(i, j)).collect()).collect();
    let mut w = v.clone();
    // reduce w to a single unit coordinate by elementary operations, keeping v = A w
    let m = loop {
        let nz: Vec<usize> = (0..r).filter(|&i| !w[i].is_zero()).collect();
        let j = *nz
            .iter()
            .min_by_key(|&&i| f.norm(&w[i]).abs())
            .ok_or(Error::NoUnimodularCompletion)?;
        let pivot_unit = f.is_unit(&w[j]);
        if nz.len() == 1 {
            if pivot_unit {
                break j;
            }
            return Err(Error::NoUnimodularCompletion);
        }
        let pn = f.norm(&w[j]).abs();
        let mut progress = false;
        for &i in nz.iter().filter(|&&i| i != j) {
            let q = round_quotient(f, &w[i], &w[j])?;
            let rem = f.sub(&w[i], &f.mul(&q, &w[j]));
            if pivot_unit || f.norm(&rem).abs() < pn {
                w[i] = rem;
                for row in a.iter_mut() {
                    row[j] = f.add(&row[j], &f.mul(&q, &row[i]));
                }
                progress = true;
                if !pivot_unit {
                    break;
                }
            }
        }
        if !progress {
            return Err(Error::NoUnimodularCompletion);
        }
    };
    let u = w[m].clone();
    let eps_inv = f.unit_inverse(eps).expect("unit");
    let mut cols: Vec<Vec<Elem>> = vec![column(&a, m).iter().map(|x| f.mul(x, &u)).collect()];
    debug_assert_eq!(cols[0], v);
    for k in (0..r).filter(|&k| k != m) {
        let b = column(&a, k);
        let c = f.mul(&form.bilinear(f, &b, &v), &eps_inv);
        cols.push(b.iter().zip(&v).map(|(bi, vi)| f.sub(bi, &f.mul(&c, vi))).collect());
    }
    let transform: Vec<Vec<Elem>> = (0..r).map(|i| (0..r).map(|j| cols[j][i].clone()).collect()).collect();
    // exact block identity U^T G U = diag(eps, G')
    let img: Vec<Vec<Elem>> = (0..r)
        .map(|x| (0..r).map(|y| form.bilinear(f, &cols[x], &cols[y])).collect())
        .collect();
    assert_eq!(img[0][0], *eps);
    for y in 1..r {
        assert!(img[0][y].is_zero() && img[y][0].is_zero());
    }
    assert!(f.is_unit(&det(f, &transform)));
    let rest = if r > 1 {
        Some(GramForm::new(f, img[1..].iter().map(|row| row[1..].to_vec()).collect())?)
    } else {
        None
    };
    Ok(UnitSplit { transform, rest })
}

/// Whether `alpha * beta` is a square, i.e. one unary lattice represents both.
pub fn unary_corepresent(f: &Field, alpha: &Elem, beta: &Elem) -> Result<bool> {
    for x in [alpha, beta] {
        if !f.is_totally_positive(x) {
            return Err(Error::NotTotallyPositive(f.format_elem(x)));
        }
    }
    f.is_square(&f.mul(alpha, beta))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagonalShape {
    /// `<1, 1, alpha>`.
    Shape11a { alpha: Elem },
    /// `<1, gamma, alpha>` with `2 = gamma t^2`.
    Shape1ga { gamma: Elem, t: Elem, alpha: Elem },
    NotApplicable,
}

/// Normal form of a diagonal ternary form representing 1 and 2 over a field
/// without `sqrt 2`.
pub fn classify_diagonal_ternary(f: &Field, form: &GramForm, node_limit: u64) -> Result<DiagonalShape> {
    if f.contains_sqrt(2)?.is_some() {
        return Err(Error::PreconditionFailed("sqrt 2 lies in the field".into()));
    }
    if form.rank() != 3 || !form.is_diagonal() {
        return Ok(DiagonalShape::NotApplicable);
    }
    let rep = Representer::new(f, form)?;
    for n in [1, 2] {
        if rep.represents(&f.from_int(n), node_limit)?.is_none() {
            return Err(Error::PreconditionFailed(format!("form does not represent {n}")));
        }
    }
    let diag = form.diagonal();
    let unary_rep = |a: &Elem, n: i64| -> Result<Option<Elem>> {
        let u = GramForm::diag(f, std::slice::from_ref(a))?;
        Ok(represents(f, &u, &f.from_int(n), node_limit)?.map(|w| f.normalize_sign(&w.coords[0])))
    };
    let ones: Vec<usize> = (0..3)
        .filter_map(|i| unary_rep(&diag[i], 1).map(|o| o.map(|_| i)).transpose())
        .collect::<Result<_>>()?;
    let Some(&first) = ones.first() else {
        return Ok(DiagonalShape::NotApplicable);
    };
    let others: Vec<usize> = (0..3).filter(|&i| i != first).collect();
    if let Some(&second) = ones.get(1) {
        let third = (0..3).find(|&i| i != first && i != second).expect("three entries");
        return Ok(DiagonalShape::Shape11a { alpha: diag[third].clone() });
    }
    for (g, a) in [(others[0], others[1]), (others[1], others[0])] {
        if let Some(t) = unary_rep(&diag[g], 2)? {
            return Ok(DiagonalShape::Shape1ga {
                gamma: diag[g].clone(),
                t,
                alpha: diag[a].clone(),
            });
        }
    }
    Ok(DiagonalShape::NotApplicable)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverage {
    AllCovered { checked: usize },
    Counterexample(Elem),
}

/// `<1, 1, 2, 2>`.
pub fn form_1122(f: &Field) -> Result<GramForm> {
    GramForm::diag(f, &[f.one(), f.one(), f.from_int(2), f.from_int(2)])
}

/// Witnesses for `2 alpha` by `<1,1,2,2>` for every `alpha` of trace at most `t`.
pub fn scan_1122(f: &Field, t: i64, node_limit: u64) -> Result<Vec<(Elem, Option<Witness>)>> {
    let rep = Representer::new(f, &form_1122(f)?)?;
    cone::enumerate_tp_by_trace(f, t, node_limit)?
        .into_iter()
        .map(|a| {
            let w = rep.represents(&f.scale(&a, 2), node_limit)?;
            Ok((a, w))
        })
        .collect()
}

/// Tests `2 alpha -> <1,1,2,2>` for every `alpha` with trace at most `t`.
pub fn check_1122_coverage(f: &Field, t: i64, node_limit: u64) -> Result<Coverage> {
    let rep = Representer::new(f, &form_1122(f)?)?;
    let targets = cone::enumerate_tp_by_trace(f, t, node_limit)?;
    for a in &targets {
        if rep.represents(&f.scale(a, 2), node_limit)?.is_none() {
            return Ok(Coverage::Counterexample(a.clone()));
        }
    }
    Ok(Coverage::AllCovered { checked: targets.len() })
}

/// Tests `lambda alpha -> <1,1,lambda,lambda>` for every `alpha` of trace at most `t`.
pub fn check_lambda_coverage(f: &Field, lambda: &Elem, t: i64, node_limit: u64) -> Result<Coverage> {
    if !f.is_totally_positive(lambda) {
        return Err(Error::PreconditionFailed(format!(
            "{} is not totally positive",
            f.format_elem(lambda)
        )));
    }
    if !cone::is_indecomposable(f, lambda, node_limit)?.is_indecomposable() {
        return Err(Error::PreconditionFailed(format!(
            "{} is decomposable",
            f.format_elem(lambda)
        )));
    }
    if f.is_square(lambda)? {
        return Err(Error::PreconditionFailed(format!("{} is a square", f.format_elem(lambda))));
    }
    let form = GramForm::diag(f, &[f.one(), f.one(), lambda.clone(), lambda.clone()])?;
    let rep = Representer::new(f, &form)?;
    let targets = cone::enumerate_tp_by_trace(f, t, node_limit)?;
    for a in &targets {
        if rep.represents(&f.mul(lambda, a), node_limit)?.is_none() {
            return Ok(Coverage::Counterexample(a.clone()));
        }
    }
    Ok(Coverage::AllCovered { checked: targets.len() })
}

/// `(x, y, z, w)` for `<1,1,2,2>` becomes `(x, y, z+w, z-w)` for `<1,1,1,1>`.
pub fn four_square_witness_from_1122(f: &Field, w: &Witness) -> Result<Witness> {
    let [x, y, z, u] = <[Elem; 4]>::try_from(w.coords.clone())
        .map_err(|_| Error::PreconditionFailed("witness must have 4 coordinates".into()))?;
    let target = form_1122(f)?.eval(f, &w.coords);
    let out = Witness { coords: vec![x, y, f.add(&z, &u), f.sub(&z, &u)] };
    assert_eq!(GramForm::sum_of_squares(f, 4)?.eval(f, &out.coords), target);
    Ok(out)
}

/// Halves a `<1,1,2,2>` witness for `2 alpha` into a four-square witness for
/// `alpha`, which requires 2 to be unramified.
pub fn halve_witness_unramified(f: &Field, alpha: &Elem, w: &Witness) -> Result<Witness> {
    if f.two_is_ramified() {
        return Err(Error::PreconditionFailed("2 is ramified".into()));
    }
    let form = form_1122(f)?;
    if w.coords.len() != 4 || form.eval(f, &w.coords) != f.scale(alpha, 2) {
        return Err(Error::PreconditionFailed("not a witness for 2 alpha".into()));
    }
    let (x, y) = (&w.coords[0], &w.coords[1]);
    let half = |e: Elem| -> Result<Elem> {
        if e.coords().iter().all(|c| c.is_even()) {
            Ok(Elem::new(e.coords().iter().map(|c| c / 2).collect()))
        } else {
            Err(Error::NotIntegralHalves)
        }
    };
    let out = Witness {
        coords: vec![
            half(f.add(x, y))?,
            half(f.sub(x, y))?,
            w.coords[2].clone(),
            w.coords[3].clone(),
        ],
    };
    assert_eq!(GramForm::sum_of_squares(f, 4)?.eval(f, &out.coords), *alpha);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    const N: u64 = DEFAULT_NODE_LIMIT;

    fn field(id: &str) -> Field {
        Catalog::builtin().load(id).unwrap()
    }

    fn e(f: &Field, s: &str) -> Elem {
        f.parse_elem(s).unwrap()
    }

    #[test]
    fn form_validation() {
        let f = field("qsqrt5");
        assert!(GramForm::parse(&f, "<1,1,2,2>").is_ok());
        assert_eq!(GramForm::parse(&f, "<1,-1>"), Err(Error::NotPositiveDefinite));
        assert!(matches!(GramForm::parse(&f, "[[1,1/2],[1/2,1]]"), Err(Error::NotClassical(_))));
        assert_eq!(GramForm::parse(&f, "[[1,1],[0,1]]"), Err(Error::NotSymmetric));
        assert_eq!(GramForm::parse(&f, "[[2,1],[1,1]]").unwrap().rank(), 2);
        assert_eq!(GramForm::parse(&f, "[[1,1],[1,1]]"), Err(Error::NotPositiveDefinite));
        assert!(matches!(GramForm::parse(&f, "<1,,2>"), Err(Error::Syntax(_))));
        let g = GramForm::parse(&f, "[[2,t],[t,2]]").unwrap();
        assert_eq!(g.format(&f), "[[2,t],[t,2]]");
    }

    #[test]
    fn square_roots() {
        let f2 = field("qsqrt2");
        assert_eq!(f2.contains_sqrt(2).unwrap().unwrap().coords(), &[0, 1]);
        let f5 = field("qsqrt5");
        assert_eq!(f5.contains_sqrt(2).unwrap(), None);
        assert_eq!(f5.contains_sqrt(5).unwrap(), Some(e(&f5, "2*t-1")));
        let z = field("zeta20");
        let r5 = z.contains_sqrt(5).unwrap().unwrap();
        assert_eq!(z.square(&r5), z.from_int(5));
    }

    #[test]
    fn representation_examples() {
        let f = field("qsqrt5");
        let w = represents(&f, &GramForm::parse(&f, "<1,1>").unwrap(), &f.from_int(3), N)
            .unwrap()
            .unwrap();
        assert_eq!(w.coords, vec![e(&f, "t"), e(&f, "1-t")]);
        let q = field("q");
        let w = represents(&q, &GramForm::parse(&q, "<1>").unwrap(), &q.one(), N).unwrap();
        assert_eq!(w.unwrap().coords, vec![q.one()]);
        let f2 = field("qsqrt2");
        let six = GramForm::sum_of_squares(&f2, 6).unwrap();
        assert_eq!(represents(&f2, &six, &e(&f2, "2+t"), N).unwrap(), None);
    }

    #[test]
    fn universality_scans() {
        let f2 = field("qsqrt2");
        let three = GramForm::sum_of_squares(&f2, 3).unwrap();
        assert_eq!(
            is_universal_up_to(&f2, &three, 10, N).unwrap(),
            Universality::Counterexample(e(&f2, "2+t"))
        );
        let q = field("q");
        let three = GramForm::sum_of_squares(&q, 3).unwrap();
        assert_eq!(
            is_universal_up_to(&q, &three, 7, N).unwrap(),
            Universality::Counterexample(q.from_int(7))
        );
    }

    #[test]
    fn unit_splitting() {
        let f = field("qsqrt5");
        let form = GramForm::parse(&f, "<1,1,2>").unwrap();
        let s = split_off_unit(&f, &form, &f.one(), N).unwrap();
        let rest = s.rest.unwrap();
        assert_eq!(rest.rank(), 2);
        assert_eq!(det(&f, rest.gram()), f.from_int(2));

        let f3 = field("qsqrt3");
        let eps = e(&f3, "2+t");
        let form = GramForm::parse(&f3, "<1,2+t>").unwrap();
        let s = split_off_unit(&f3, &form, &eps, N).unwrap();
        assert_eq!(s.rest.unwrap().gram()[0][0], f3.one());
        let three = GramForm::sum_of_squares(&f3, 3).unwrap();
        assert_eq!(split_off_unit(&f3, &three, &eps, N), Err(Error::NotRepresented));
        assert_eq!(split_off_unit(&f3, &three, &f3.from_int(2), N), Err(Error::NotAUnit));
        // a non-diagonal vector
        let form = GramForm::parse(&f3, "[[2,1],[1,2]]").unwrap();
        let s = split_off_unit(&f3, &form, &f3.from_int(2).clone(), N);
        assert_eq!(s, Err(Error::NotAUnit));
        let form = GramForm::parse(&f3, "[[2,1],[1,1]]").unwrap();
        let s = split_off_unit(&f3, &form, &f3.one(), N).unwrap();
        assert_eq!(s.rest.unwrap().gram()[0][0], f3.one());
    }

    #[test]
    fn corepresentation() {
        let f3 = field("qsqrt3");
        let a = e(&f3, "2+t");
        assert!(unary_corepresent(&f3, &a, &a).unwrap());
        assert!(!unary_corepresent(&f3, &f3.one(), &a).unwrap());
        let z = field("zeta20");
        assert!(unary_corepresent(&z, &z.from_int(2), &e(&z, "t+2")).unwrap());
    }

    #[test]
    fn diagonal_shapes() {
        let f5 = field("qsqrt5");
        let form = GramForm::parse(&f5, "<1,1,2>").unwrap();
        assert_eq!(
            classify_diagonal_ternary(&f5, &form, N).unwrap(),
            DiagonalShape::Shape11a { alpha: f5.from_int(2) }
        );
        let f13 = field("qsqrt13");
        let form = GramForm::parse(&f13, "<1,2,7>").unwrap();
        assert_eq!(
            classify_diagonal_ternary(&f13, &form, N).unwrap(),
            DiagonalShape::Shape1ga { gamma: f13.from_int(2), t: f13.one(), alpha: f13.from_int(7) }
        );
        let f2 = field("qsqrt2");
        let form = GramForm::parse(&f2, "<1,1,1>").unwrap();
        assert!(matches!(
            classify_diagonal_ternary(&f2, &form, N),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn witness_transforms() {
        let f = field("qsqrt5");
        let w = Witness { coords: vec![f.zero(), f.zero(), f.one(), f.zero()] };
        let four = four_square_witness_from_1122(&f, &w).unwrap();
        assert_eq!(four.coords, vec![f.zero(), f.zero(), f.one(), f.one()]);
        let w2 = Witness { coords: vec![f.one(), f.one(), f.zero(), f.zero()] };
        assert_eq!(four_square_witness_from_1122(&f, &w2).unwrap(), w2);
        let h = halve_witness_unramified(&f, &f.one(), &w).unwrap();
        assert_eq!(h.coords, vec![f.zero(), f.zero(), f.one(), f.zero()]);
        let f2 = field("qsqrt2");
        let w = Witness { coords: vec![f2.zero(), f2.zero(), f2.one(), f2.zero()] };
        assert!(matches!(
            halve_witness_unramified(&f2, &f2.one(), &w),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn lambda_coverage_preconditions() {
        let f5 = field("qsqrt5");
        assert!(matches!(
            check_lambda_coverage(&f5, &f5.one(), 5, N),
            Err(Error::PreconditionFailed(_))
        ));
        assert!(matches!(
            check_lambda_coverage(&f5, &f5.from_int(2), 5, N),
            Err(Error::PreconditionFailed(_))
        ));
        let q = field("q");
        assert_eq!(check_1122_coverage(&q, 10, N).unwrap(), Coverage::AllCovered { checked: 10 });
    }
}
