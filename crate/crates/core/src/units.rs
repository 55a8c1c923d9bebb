//! Unit groups, the signature homomorphism, totally positive units modulo
//! squares, the M+/M- classification and the dyadic descent map.

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UnitSource {
    /// Fundamental unit computed from a continued fraction.
    Computed,
    /// Generators taken from the field catalog.
    Catalog,
}

/// Generators of the unit group modulo torsion; `-1` is always implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGroup {
    pub generators: Vec<Elem>,
    pub source: UnitSource,
}

impl UnitGroup {
    /// Computed fundamental unit for quadratic fields, catalog generators otherwise.
    pub fn for_field(f: &Field) -> Result<UnitGroup> {
        if f.degree() == 2 {
            Ok(UnitGroup {
                generators: vec![fundamental_unit_quadratic(f)?],
                source: UnitSource::Computed,
            })
        } else {
            UnitGroup::from_catalog(f)
        }
    }

    pub fn from_catalog(f: &Field) -> Result<UnitGroup> {
        let mut generators = Vec::new();
        for s in &f.spec().units {
            let g = f.parse_elem(s)?;
            if !f.is_unit(&g) {
                return Err(Error::CatalogIncomplete(format!("generator `{s}` is not a unit")));
            }
            generators.push(g);
        }
        Ok(UnitGroup { generators, source: UnitSource::Catalog })
    }

    /// `-1` followed by the generators.
    pub fn with_torsion(&self, f: &Field) -> Vec<Elem> {
        std::iter::once(f.from_int(-1))
            .chain(self.generators.iter().cloned())
            .collect()
    }

    /// Exponents `e` with `u = ±prod g_j^{e_j}`, or `None` if `u` is not in
    /// the group generated. Exponents are found from logarithmic embeddings
    /// and then verified exactly.
    pub fn exponents_of(&self, f: &Field, u: &Elem) -> Option<Vec<i64>> {
        if !f.is_unit(u) {
            return None;
        }
        let g = self.generators.len();
        let logs = |x: &Elem| -> Vec<f64> {
            f.embeddings_f64(x).iter().map(|v| v.abs().ln()).collect()
        };
        let target = logs(u);
        let exps: Vec<i64> = if g == 0 {
            vec![]
        } else {
            // least squares on the log embeddings
            let cols: Vec<Vec<f64>> = self.generators.iter().map(logs).collect();
            let mut a = vec![vec![0.0; g + 1]; g];
            for r in 0..g {
                for c in 0..g {
                    a[r][c] = cols[r].iter().zip(&cols[c]).map(|(x, y)| x * y).sum();
                }
                a[r][g] = cols[r].iter().zip(&target).map(|(x, y)| x * y).sum();
            }
            let sol = solve_dense(a)?;
            sol.iter().map(|x| x.round() as i64).collect()
        };
        let mut rest = u.clone();
        for (gen, &e) in self.generators.iter().zip(&exps) {
            let p = f.pow(gen, e.unsigned_abs() as u32);
            rest = if e >= 0 {
                f.div_exact(&rest, &p).ok()??
            } else {
                f.mul(&rest, &p)
            };
        }
        if rest == f.one() || rest == f.from_int(-1) {
            Some(exps)
        } else {
            None
        }
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[piv][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, piv);
        for r in 0..n {
            if r != c {
                let k = a[r][c] / a[c][c];
                for j in c..=n {
                    a[r][j] -= k * a[c][j];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// All units with house at most `h`, found by bounded enumeration.
pub fn units_with_house_at_most(f: &Field, h: i64, node_limit: u64) -> Result<Vec<Elem>> {
    let d = f.degree() as i64;
    let e = crate::enumerate::Enumerator::new(f.trace_gram())?;
    let hh = f.from_int(h);
    let mut out = Vec::new();
    e.for_each(d * h * h, node_limit, |x, _| {
        let u = Elem::new(x.to_vec());
        if !u.is_zero()
            && f.is_unit(&u)
            && f.is_totally_nonneg(&f.sub(&hh, &u))
            && f.is_totally_nonneg(&f.add(&hh, &u))
        {
            out.push(u);
        }
        std::ops::ControlFlow::Continue(())
    })?;
    out.sort_by(|a, b| f.canonical_cmp(a, b));
    Ok(out)
}

// ---- quadratic fields --------------------------------------------------

/// The larger root of `x^2 - c1 x - c0`, where the second basis element
/// satisfies `w^2 = c0 + c1 w`, written as `(p + sqrt(disc)) / q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct QuadSurd {
    pub p: i64,
    pub q: i64,
    pub disc: i64,
}

impl QuadSurd {
    pub fn of_generator(f: &Field) -> Result<QuadSurd> {
        if f.degree() != 2 {
            return Err(Error::NotQuadratic);
        }
        let c0 = f.structure_constant(1, 1, 0);
        let c1 = f.structure_constant(1, 1, 1);
        Ok(QuadSurd { p: c1, q: 2, disc: c1 * c1 + 4 * c0 })
    }

    /// Partial quotients, `count` of them.
    pub fn partial_quotients(&self, count: usize) -> Vec<i64> {
        let s = self.disc.sqrt();
        let (mut p, mut q) = (self.p, self.q);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            // floor((p + sqrt(disc)) / q), valid for either sign of q
            let num = if q > 0 { p + s } else { p + s + 1 };
            let a = floor_div(num, q);
            out.push(a);
            let p2 = a * q - p;
            let q2 = (self.disc - p2 * p2) / q;
            p = p2;
            q = q2;
        }
        out
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    let (q, r) = (a / b, a % b);
    if r != 0 && ((r < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Convergents `(p_i, q_i)` of a continued fraction.
pub(crate) fn convergents(terms: &[i64]) -> Vec<(i64, i64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, terms[0], 1i64);
    let mut out = vec![(p1, q1)];
    for &a in &terms[1..] {
        let (Some(p2), Some(q2)) = (
            a.checked_mul(p1).and_then(|x| x.checked_add(p0)),
            a.checked_mul(q1).and_then(|x| x.checked_add(q0)),
        ) else {
            break;
        };
        out.push((p2, q2));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    out
}

/// The fundamental unit of a real quadratic field, normalized to exceed 1
/// at the larger embedding.
pub fn fundamental_unit_quadratic(f: &Field) -> Result<Elem> {
    let surd = QuadSurd::of_generator(f)?;
    let mut count = 8;
    loop {
        let terms = surd.partial_quotients(count);
        for &(p, q) in &convergents(&terms) {
            let cand = f.elem(vec![p, -q])?;
            if f.norm(&cand).abs().is_one() {
                return Ok(normalize_above_one(f, &cand));
            }
        }
        count *= 2;
        if count > 4096 {
            return Err(Error::IterationLimit(count));
        }
    }
}

/// The one of `±u, ±u^-1` whose image at the last embedding exceeds 1.
fn normalize_above_one(f: &Field, u: &Elem) -> Elem {
    let last = f.degree() - 1;
    let inv = f.unit_inverse(u).expect("unit");
    let cands = [u.clone(), f.neg(u), inv.clone(), f.neg(&inv)];
    cands
        .into_iter()
        .find(|c| f.sign_at(&f.sub(c, &f.one()), last) > 0)
        .expect("one associate exceeds 1")
}

/// A totally positive unit generating the totally positive units modulo
/// `{1}` (the fundamental unit or its square).
pub fn totally_positive_fundamental_unit(f: &Field) -> Result<Elem> {
    let e = fundamental_unit_quadratic(f)?;
    Ok(if f.is_totally_positive(&e) { e } else { f.square(&e) })
}

// ---- signatures --------------------------------------------------------

/// Sign vector of an element; entry `i` is the sign at embedding `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Signature(pub Vec<i8>);

impl Signature {
    /// Bit `i` set iff the sign at embedding `i` is negative.
    pub fn bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    pub fn mul(&self, other: &Signature) -> Signature {
        Signature(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }
}

pub fn signature(f: &Field, a: &Elem) -> Result<Signature> {
    if a.is_zero() {
        return Err(Error::ZeroElement);
    }
    Ok(Signature(f.signs(a)))
}

/// Row-echelon basis of an F2 span, with each row's combination of inputs.
#[derive(Clone, Debug)]
struct F2Echelon {
    rows: Vec<(u64, u64)>,
}

impl F2Echelon {
    fn new(vectors: &[u64]) -> (F2Echelon, Vec<u64>) {
        let mut rows: Vec<(u64, u64)> = Vec::new();
        let mut kernel = Vec::new();
        for (idx, &v) in vectors.iter().enumerate() {
            let (r, comb) = reduce(&rows, v, 1 << idx);
            if r == 0 {
                kernel.push(comb);
            } else {
                rows.push((r, comb));
            }
        }
        (F2Echelon { rows }, kernel)
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Combination of inputs producing `v`, if `v` lies in the span.
    fn solve(&self, v: u64) -> Option<u64> {
        let (r, comb) = reduce(&self.rows, v, 0);
        (r == 0).then_some(comb)
    }
}

fn reduce(rows: &[(u64, u64)], mut v: u64, mut comb: u64) -> (u64, u64) {
    for &(r, c) in rows {
        let top = 63 - r.leading_zeros();
        if v >> top & 1 == 1 {
            v ^= r;
            comb ^= c;
        }
    }
    (v, comb)
}

/// The image of the unit group under the signature map.
#[derive(Clone, Debug)]
pub struct SignatureSubgroup {
    /// Signatures of `-1` and the generators, in that order.
    pub generator_signatures: Vec<Signature>,
    pub rank: usize,
    /// `|U+ / U^2| = 2^k` with `k = d - rank`.
    pub k: usize,
    echelon: F2Echelon,
    kernel: Vec<u64>,
}

impl SignatureSubgroup {
    pub fn contains(&self, s: &Signature) -> bool {
        self.echelon.solve(s.bits()).is_some()
    }

    pub fn size(&self) -> u64 {
        1 << self.rank
    }
}

pub fn signature_subgroup(f: &Field, u: &UnitGroup) -> SignatureSubgroup {
    let gens = u.with_torsion(f);
    let sigs: Vec<Signature> = gens.iter().map(|g| Signature(f.signs(g))).collect();
    let bits: Vec<u64> = sigs.iter().map(Signature::bits).collect();
    let (echelon, kernel) = F2Echelon::new(&bits);
    let rank = echelon.rank();
    SignatureSubgroup {
        generator_signatures: sigs,
        rank,
        k: f.degree() - rank,
        echelon,
        kernel,
    }
}

/// `|U+/U^2| = 2^k` and a nonsquare totally positive unit when `k >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareClassData {
    pub k: usize,
    pub epsilon: Option<Elem>,
}

fn product_of_mask(f: &Field, gens: &[Elem], mask: u64) -> Elem {
    f.product(gens.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, g)| g))
}

pub fn tp_units_mod_squares(f: &Field, u: &UnitGroup) -> Result<SquareClassData> {
    let sub = signature_subgroup(f, u);
    let gens = u.with_torsion(f);
    if sub.kernel.len() != sub.k {
        return Err(Error::CatalogIncomplete(format!(
            "{} generators give {} totally positive classes, expected k = {}",
            u.generators.len(),
            sub.kernel.len(),
            sub.k
        )));
    }
    let mut reps = Vec::new();
    for &mask in &sub.kernel {
        let e = product_of_mask(f, &gens, mask);
        debug_assert!(f.is_totally_positive(&e));
        if f.is_square(&e)? {
            return Err(Error::CatalogIncomplete(format!(
                "totally positive unit {} is a square",
                f.format_elem(&e)
            )));
        }
        reps.push(e);
    }
    Ok(SquareClassData { k: sub.k, epsilon: reps.into_iter().next() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MClass {
    MPlus,
    MMinus,
}

pub fn classify_m(
    f: &Field,
    data: &SquareClassData,
    u: &UnitGroup,
    beta: &Elem,
) -> Result<MClass> {
    if data.k != 1 {
        return Err(Error::RequiresKOne { k: data.k });
    }
    let s = signature(f, beta)?;
    Ok(if signature_subgroup(f, u).contains(&s) {
        MClass::MPlus
    } else {
        MClass::MMinus
    })
}

/// A unit `eta` with `eta * alpha` totally positive, if one exists.
pub fn eta_for(f: &Field, u: &UnitGroup, alpha: &Elem) -> Result<Option<Elem>> {
    let s = signature(f, alpha)?;
    let sub = signature_subgroup(f, u);
    let gens = u.with_torsion(f);
    Ok(sub.echelon.solve(s.bits()).map(|mask| product_of_mask(f, &gens, mask)))
}

fn epsilon_of(data: &SquareClassData) -> Result<&Elem> {
    if data.k != 1 {
        return Err(Error::RequiresKOne { k: data.k });
    }
    Ok(data.epsilon.as_ref().expect("k = 1 has a representative"))
}

/// One step of the descent: the square root of `alpha` or of `eps * alpha`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentRoot {
    pub root: Elem,
    pub used_epsilon: bool,
}

pub fn descent_step(f: &Field, data: &SquareClassData, alpha: &Elem) -> Result<DescentRoot> {
    let eps = epsilon_of(data)?;
    if !f.is_totally_positive(alpha) {
        return Err(Error::NotTotallyPositive(f.format_elem(alpha)));
    }
    let out = if let Some(r) = f.sqrt(alpha)? {
        DescentRoot { root: r, used_epsilon: false }
    } else if let Some(r) = f.sqrt(&f.mul(eps, alpha))? {
        DescentRoot { root: r, used_epsilon: true }
    } else {
        return Err(Error::HypothesisFailed(format!(
            "neither {0} nor ({1})*({0}) is a square",
            f.format_elem(alpha),
            f.format_elem(eps)
        )));
    };
    let root = f.normalize_sign(&out.root);
    let sq = f.square(&root);
    debug_assert!(sq == *alpha || sq == f.mul(eps, alpha));
    debug_assert_eq!(f.norm(&root).pow(2), f.norm(alpha));
    Ok(DescentRoot { root, ..out })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentStepRecord {
    pub alpha: Elem,
    pub root: Elem,
    pub used_epsilon: bool,
    pub root_norm: BigInt,
    pub class: MClass,
    pub eta: Option<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentTrace {
    pub steps: Vec<DescentStepRecord>,
    /// Final element, of class M-.
    pub beta: Elem,
    /// `|N(beta)| = 2^j`.
    pub j: u32,
}

pub fn descent_run(
    f: &Field,
    data: &SquareClassData,
    u: &UnitGroup,
    max_iter: usize,
) -> Result<DescentTrace> {
    epsilon_of(data)?;
    let mut alpha = f.from_int(2);
    let mut steps = Vec::new();
    for _ in 0..max_iter {
        let DescentRoot { root, used_epsilon } = descent_step(f, data, &alpha)?;
        let root_norm = f.norm(&root);
        let class = classify_m(f, data, u, &root)?;
        let eta = match class {
            MClass::MMinus => None,
            MClass::MPlus => Some(eta_for(f, u, &root)?.expect("M+ elements have an eta")),
        };
        steps.push(DescentStepRecord {
            alpha: alpha.clone(),
            root: root.clone(),
            used_epsilon,
            root_norm: root_norm.clone(),
            class,
            eta: eta.clone(),
        });
        let abs_norm = root_norm.abs();
        match eta {
            None => {
                let j = power_of_two_exponent(&abs_norm).ok_or_else(|| {
                    Error::HypothesisFailed(format!("norm {abs_norm} is not a power of 2"))
                })?;
                return Ok(DescentTrace { steps, beta: root, j });
            }
            Some(eta) => {
                let next = f.mul(&eta, &root);
                if f.norm(&next).abs() >= f.norm(&alpha).abs() {
                    return Err(Error::HypothesisFailed(
                        "descent norms stopped decreasing".into(),
                    ));
                }
                alpha = next;
            }
        }
    }
    Err(Error::IterationLimit(max_iter))
}

pub fn power_of_two_exponent(n: &BigInt) -> Option<u32> {
    if !n.is_positive() {
        return None;
    }
    let tz = n.trailing_zeros()?;
    (n >> tz).is_one().then(|| tz.to_u32()).flatten()
}
