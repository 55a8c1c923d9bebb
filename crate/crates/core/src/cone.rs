//! The totally positive cone: bounded enumeration, indecomposability,
//! decompositions and small-norm scans.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::units::{self, QuadSurd};

/// All totally positive integers of trace at most `t`, in canonical order.
pub fn enumerate_tp_by_trace(f: &Field, t: i64, node_limit: u64) -> Result<Vec<Elem>> {
    if t <= 0 {
        return Ok(vec![]);
    }
    let bound = t.checked_mul(t).ok_or(Error::BudgetExceeded { limit: node_limit })?;
    enumerate_tp_with(f, bound, node_limit, |a| f.trace(a) <= t)
}

fn enumerate_tp_with(
    f: &Field,
    square_trace_bound: i64,
    node_limit: u64,
    keep: impl Fn(&Elem) -> bool,
) -> Result<Vec<Elem>> {
    let e = Enumerator::new(f.trace_gram())?;
    let mut out = Vec::new();
    e.for_each(square_trace_bound, node_limit, |x, _| {
        // positive trace is a cheap necessary condition
        let a = Elem::new(x.to_vec());
        if !a.is_zero() && f.trace(&a) > 0 && keep(&a) && f.is_totally_positive(&a) {
            out.push(a);
        }
        ControlFlow::Continue(())
    })?;
    out.sort_by(|a, b| f.canonical_cmp(a, b));
    Ok(out)
}

/// Totally positive `delta` with `alpha - delta` totally nonnegative, i.e.
/// candidate parts of `alpha`, in canonical order.
fn parts_below(f: &Field, alpha: &Elem, node_limit: u64) -> Result<Vec<Elem>> {
    // every embedding of a part lies in (0, sigma_i(alpha)]
    let bound = f.trace(&f.square(alpha));
    let ta = f.trace(alpha);
    enumerate_tp_with(f, bound, node_limit, |d| {
        f.trace(d) <= ta && f.is_totally_nonneg(&f.sub(alpha, d))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndecompVerdict {
    Indecomposable,
    /// `alpha = beta + gamma` with both parts totally positive.
    Decomposed { beta: Elem, gamma: Elem },
}

impl IndecompVerdict {
    pub fn is_indecomposable(&self) -> bool {
        matches!(self, IndecompVerdict::Indecomposable)
    }
}

fn require_tp(f: &Field, a: &Elem) -> Result<()> {
    f.check(a)?;
    if f.is_totally_positive(a) {
        Ok(())
    } else {
        Err(Error::NotTotallyPositive(f.format_elem(a)))
    }
}

/// Exhaustive indecomposability test; the witness is the canonically first
/// totally positive `beta` with `alpha - beta` totally positive.
pub fn is_indecomposable(f: &Field, alpha: &Elem, node_limit: u64) -> Result<IndecompVerdict> {
    require_tp(f, alpha)?;
    for beta in parts_below(f, alpha, node_limit)? {
        let gamma = f.sub(alpha, &beta);
        if !gamma.is_zero() {
            assert!(f.is_totally_positive(&gamma) && f.add(&beta, &gamma) == *alpha);
            return Ok(IndecompVerdict::Decomposed { beta, gamma });
        }
    }
    Ok(IndecompVerdict::Indecomposable)
}

/// Sufficient test: `N(alpha) < 2^d` forces indecomposability.
pub fn indecomposable_by_norm(f: &Field, alpha: &Elem) -> Result<bool> {
    require_tp(f, alpha)?;
    Ok(f.norm(alpha) < (BigInt::from(1) << f.degree()))
}

/// Indecomposables among a trace-bounded set, decided by membership tests
/// inside the set itself (every summand of an element has smaller trace).
pub fn indecomposables_up_to(f: &Field, t: i64, node_limit: u64) -> Result<Vec<Elem>> {
    let all = enumerate_tp_by_trace(f, t, node_limit)?;
    let set: HashSet<&Elem> = all.iter().collect();
    Ok(all
        .iter()
        .filter(|a| {
            let ta = f.trace(a);
            !all.iter()
                .take_while(|d| 2 * f.trace(d) <= ta)
                .any(|d| set.contains(&f.sub(a, d)))
        })
        .cloned()
        .collect())
}

/// A multiset of totally positive parts, stored in descending canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: Vec<Elem>,
}

/// All decompositions of `alpha` into at most `max_parts` totally positive parts.
pub fn decompositions(
    f: &Field,
    alpha: &Elem,
    max_parts: usize,
    node_limit: u64,
) -> Result<Vec<Decomposition>> {
    require_tp(f, alpha)?;
    if max_parts == 0 {
        return Err(Error::PreconditionFailed("max_parts must be at least 1".into()));
    }
    let cands = parts_below(f, alpha, node_limit)?;
    let mut out = Vec::new();
    let mut parts = Vec::new();
    decompose_rec(f, alpha, &cands, cands.len(), max_parts, &mut parts, &mut out);
    out.sort_by(|a: &Decomposition, b| {
        a.parts.len().cmp(&b.parts.len()).then_with(|| {
            a.parts
                .iter()
                .zip(&b.parts)
                .map(|(x, y)| f.canonical_cmp(x, y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    for d in &out {
        let total = d.parts.iter().fold(f.zero(), |acc, p| f.add(&acc, p));
        assert_eq!(total, *alpha);
    }
    Ok(out)
}

fn decompose_rec(
    f: &Field,
    rest: &Elem,
    cands: &[Elem],
    upto: usize,
    max_parts: usize,
    parts: &mut Vec<Elem>,
    out: &mut Vec<Decomposition>,
) {
    if rest.is_zero() {
        out.push(Decomposition { parts: parts.clone() });
        return;
    }
    if parts.len() == max_parts {
        return;
    }
    for idx in (0..upto).rev() {
        let d = &cands[idx];
        let next = f.sub(rest, d);
        if f.is_totally_nonneg(&next) {
            parts.push(d.clone());
            decompose_rec(f, &next, cands, idx + 1, max_parts, parts, out);
            parts.pop();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallNormEntry {
    pub elem: Elem,
    pub norm: BigInt,
    pub power_of_two: bool,
    /// Minimal-trace member of its orbit under totally positive units.
    /// Always true when no unit reduction is applied.
    pub orbit_rep: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallNormScan {
    /// Trace bound actually scanned.
    pub trace_bound: i64,
    /// True when every orbit of small-norm elements under totally positive
    /// units meets the scanned range.
    pub exhaustive: bool,
    pub entries: Vec<SmallNormEntry>,
}

impl SmallNormScan {
    pub fn non_power_of_two(&self) -> impl Iterator<Item = &SmallNormEntry> {
        self.entries.iter().filter(|e| !e.power_of_two)
    }
}

/// Trace bound covering a minimal-trace representative of every orbit of
/// elements of norm below `2^d` under totally positive units.
pub fn exhaustive_trace_bound(f: &Field) -> Result<i64> {
    match f.degree() {
        1 => Ok(1),
        2 => {
            // Tr <= sqrt(N) (sqrt(e) + 1/sqrt(e)) < 2 * 2 sqrt(e) for N < 4
            let e = units::totally_positive_fundamental_unit(f)?;
            let prec = BigRational::new(1.into(), 1024.into());
            let (_, hi) = f.house(&e, &prec);
            let up = hi.ceil().to_integer().to_i64().expect("small unit");
            Ok(4 * up.sqrt() + 4)
        }
        _ => Err(Error::UnitsUnavailable),
    }
}

/// Totally positive elements of norm below `2^d` up to a trace bound. In
/// exhaustive mode the bound is raised to cover every unit orbit.
pub fn small_norm_scan(
    f: &Field,
    trace_bound: i64,
    exhaustive: bool,
    node_limit: u64,
) -> Result<SmallNormScan> {
    let limit = BigInt::from(1) << f.degree();
    let (bound, unit) = if exhaustive {
        let b = exhaustive_trace_bound(f)?.max(trace_bound);
        let u = (f.degree() == 2)
            .then(|| units::totally_positive_fundamental_unit(f))
            .transpose()?;
        (b, u)
    } else {
        (trace_bound, None)
    };
    let mut entries = Vec::new();
    for a in enumerate_tp_by_trace(f, bound, node_limit)? {
        let n = f.norm(&a);
        if n >= limit {
            continue;
        }
        let orbit_rep = match &unit {
            None => true,
            Some(u) => {
                let inv = f.unit_inverse(u).expect("unit");
                [f.mul(&a, u), f.mul(&a, &inv)]
                    .iter()
                    .all(|b| f.canonical_cmp(&a, b) == Ordering::Less)
            }
        };
        entries.push(SmallNormEntry {
            power_of_two: units::power_of_two_exponent(&n).is_some(),
            elem: a,
            norm: n,
            orbit_rep,
        });
    }
    Ok(SmallNormScan { trace_bound: bound, exhaustive, entries })
}

/// Semiconvergent elements of the generator's continued fraction that are
/// totally positive and pass the exact indecomposability test.
pub fn cf_indecomposable_candidates(f: &Field, node_limit: u64) -> Result<Vec<Elem>> {
    let surd = QuadSurd::of_generator(f)?;
    // one full period ends at the fundamental unit; cover two periods
    let mut terms = surd.partial_quotients(8);
    let unit_index = loop {
        let conv = units::convergents(&terms);
        if let Some(i) = conv
            .iter()
            .position(|&(p, q)| f.norm(&Elem::new(vec![p, -q])).abs() == BigInt::from(1))
        {
            break i;
        }
        if terms.len() > 2048 {
            return Err(Error::IterationLimit(terms.len()));
        }
        terms = surd.partial_quotients(terms.len() * 2);
    };
    terms = surd.partial_quotients(2 * unit_index + 4);
    let mut conv = vec![(1, 0)];
    conv.extend(units::convergents(&terms));
    let mut seen = HashSet::new();
    let mut cands = vec![f.one()];
    // conv[i + 1] is the convergent ending with terms[i]
    for i in 0..terms.len() - 1 {
        let (p0, q0) = conv[i];
        let (p1, q1) = conv[i + 1];
        for r in 0..=terms[i + 1] {
            let p = p0 + r * p1;
            let q = q0 + r * q1;
            let a = Elem::new(vec![p, -q]);
            if f.is_totally_positive(&a) && seen.insert(a.clone()) {
                cands.push(a);
            }
        }
    }
    // indecomposability is preserved by totally positive units
    let u = units::totally_positive_fundamental_unit(f)?;
    let u_inv = f.unit_inverse(&u).expect("unit");
    let base = cands.clone();
    for c in &base {
        for m in [&u, &u_inv] {
            let a = f.mul(c, m);
            if seen.insert(a.clone()) {
                cands.push(a);
            }
        }
    }
    let mut out = Vec::new();
    for a in cands {
        if is_indecomposable(f, &a, node_limit)?.is_indecomposable() && !out.contains(&a) {
            out.push(a);
        }
    }
    out.sort_by(|a, b| f.canonical_cmp(a, b));
    Ok(out)
}
