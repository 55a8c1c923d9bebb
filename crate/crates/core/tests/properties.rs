mod common;

use std::sync::LazyLock;

use common::{all_fields, elem_from, field, tp_from};
use kitaoka::cone;
use kitaoka::criteria::{self, Budgets, Verdict};
use kitaoka::enumerate::DEFAULT_NODE_LIMIT;
use kitaoka::lattice::{self, GramForm};
use kitaoka::units::power_of_two_exponent;
use kitaoka::{ElemQ, Field};
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed};
use proptest::prelude::*;

static FIELDS: LazyLock<Vec<Field>> = LazyLock::new(all_fields);

fn any_field() -> impl Strategy<Value = usize> {
    0..FIELDS.len()
}

fn coords(r: i64) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-r..=r, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn trace_is_additive(i in any_field(), a in coords(50), b in coords(50)) {
        let f = &FIELDS[i];
        let (a, b) = (elem_from(f, &a), elem_from(f, &b));
        prop_assert_eq!(f.trace(&f.add(&a, &b)), f.trace(&a) + f.trace(&b));
    }

    #[test]
    fn norm_is_multiplicative(i in any_field(), a in coords(20), b in coords(20)) {
        let f = &FIELDS[i];
        let (a, b) = (elem_from(f, &a), elem_from(f, &b));
        prop_assert_eq!(f.norm(&f.mul(&a, &b)), f.norm(&a) * f.norm(&b));
    }

    #[test]
    fn ring_laws(i in any_field(), a in coords(9), b in coords(9), c in coords(9)) {
        let f = &FIELDS[i];
        let (a, b, c) = (elem_from(f, &a), elem_from(f, &b), elem_from(f, &c));
        prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
        prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
        prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
        prop_assert_eq!(f.sub(&f.add(&a, &b), &b), a);
    }

    #[test]
    fn signs_are_multiplicative(i in any_field(), a in coords(30), b in coords(30)) {
        let f = &FIELDS[i];
        let (a, b) = (elem_from(f, &a), elem_from(f, &b));
        let prod: Vec<i8> = f.signs(&a).iter().zip(f.signs(&b)).map(|(x, y)| x * y).collect();
        prop_assert_eq!(f.signs(&f.mul(&a, &b)), prod);
    }

    #[test]
    fn am_gm(i in any_field(), a in coords(20), extra in 0..5i64) {
        let f = &FIELDS[i];
        let a = tp_from(f, &a, extra);
        let d = f.degree() as u32;
        // (Tr/d)^d >= N
        let lhs = Pow::pow(BigInt::from(f.trace(&a)), d);
        prop_assert!(lhs >= Pow::pow(BigInt::from(d), d) * f.norm(&a));
    }

    #[test]
    fn format_parse_round_trip(i in any_field(), a in coords(40)) {
        let f = &FIELDS[i];
        let a = elem_from(f, &a);
        prop_assert_eq!(f.parse_elem(&f.format_elem(&a)).unwrap(), a);
    }

    #[test]
    fn inverse_is_inverse(i in any_field(), a in coords(12)) {
        let f = &FIELDS[i];
        let a = elem_from(f, &a);
        prop_assume!(!a.is_zero());
        let inv = f.inverse(&a).unwrap();
        prop_assert_eq!(f.mul_q(&ElemQ::from(&a), &inv), ElemQ::from(&f.one()));
        prop_assert_eq!(f.is_unit(&a), f.norm(&a).abs().is_one());
    }

    #[test]
    fn square_roots_of_squares(i in any_field(), a in coords(15)) {
        let f = &FIELDS[i];
        let a = elem_from(f, &a);
        let r = f.sqrt(&f.square(&a)).unwrap().expect("a square");
        prop_assert!(r == a || r == f.neg(&a));
    }
}

#[test]
fn four_square_chain_over_qsqrt5() {
    let f = field("qsqrt5");
    let four = GramForm::sum_of_squares(&f, 4).unwrap();
    let scan = lattice::scan_1122(&f, 20, DEFAULT_NODE_LIMIT).unwrap();
    assert!(!scan.is_empty());
    for (alpha, w) in scan {
        let w = w.expect("covered");
        let v = lattice::four_square_witness_from_1122(&f, &w).unwrap();
        assert_eq!(four.eval(&f, &v.coords), f.scale(&alpha, 2));
    }
}

#[test]
fn obstruction_verdicts_are_monotone_in_budget() {
    for f in FIELDS.iter() {
        let mut decided = false;
        for t in [4, 8, 14, 20] {
            let r = criteria::obstruct(f, &Budgets { trace_bound: t, ..Budgets::default() }).unwrap();
            let now = r.verdict == Verdict::NoUniversalTernary;
            assert!(now || !decided, "{}: verdict flipped at trace bound {t}", f.id());
            decided = now;
        }
    }
}

#[test]
fn catalog_verdicts() {
    let expect = [
        ("qsqrt2", Verdict::KnownPositive),
        ("qsqrt3", Verdict::KnownPositive),
        ("qsqrt5", Verdict::KnownPositive),
        ("qsqrt6", Verdict::NoUniversalTernary),
        ("qsqrt33", Verdict::NoUniversalTernary),
        ("zeta20", Verdict::NoUniversalTernary),
        ("qsqrt2sqrt3", Verdict::NoUniversalTernary),
        ("qsqrt13", Verdict::NoUniversalTernary),
    ];
    for (id, v) in expect {
        let r = criteria::obstruct(&field(id), &Budgets::default()).unwrap();
        assert_eq!(r.verdict, v, "{id}");
    }
}

#[test]
fn small_norm_certificates_replay() {
    for f in FIELDS.iter() {
        let r = criteria::obstruct(f, &Budgets::default()).unwrap();
        let Some(r6) = r.rule("R6").filter(|r| r.fired) else { continue };
        let bound = BigInt::from(1) << f.degree();
        for e in r6.certificate["elements"].as_array().unwrap() {
            let a = f.parse_elem(e["alpha"].as_str().unwrap()).unwrap();
            let n = f.norm(&a);
            assert!(f.is_totally_positive(&a));
            assert!(n < bound && power_of_two_exponent(&n).is_none(), "{}", f.id());
            assert_eq!(n.to_string(), e["norm"].as_str().unwrap());
        }
    }
}

#[test]
fn profile_matches_field_facts() {
    let f = field("zeta20");
    let p = criteria::theorem31_profile(&f, &Budgets::default()).unwrap();
    use criteria::ConditionStatus::*;
    assert_eq!(p.condition("5").unwrap().status, Pass);
    assert_eq!(p.condition("6").unwrap().status, Pass);
    assert_eq!(p.condition("3").unwrap().status, Fail);
    let failing = p.condition("3").unwrap().certificate["failing"].as_array().unwrap().clone();
    assert!(failing.iter().any(|x| x == "t^2-t"));

    let f = field("qsqrt3");
    let p = criteria::theorem31_profile(&f, &Budgets::default()).unwrap();
    for id in ["3", "5", "6", "8"] {
        assert_eq!(p.condition(id).unwrap().status, Pass, "condition {id}");
    }
    assert_eq!(p.condition("7").unwrap().status, Evidence);
}

#[test]
fn indecomposables_have_no_splitting() {
    for id in ["qsqrt2", "qsqrt5", "zeta7"] {
        let f = field(id);
        for a in cone::indecomposables_up_to(&f, 10, DEFAULT_NODE_LIMIT).unwrap() {
            assert!(cone::is_indecomposable(&f, &a, DEFAULT_NODE_LIMIT).unwrap().is_indecomposable());
        }
    }
}
