//! The obstruction pipeline: structural and enumerative rules that rule out
//! universal classical ternary forms, each with a re-checkable certificate.

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cone;
use crate::enumerate::DEFAULT_NODE_LIMIT;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::lattice::{self, Coverage, GramForm, Representer, Witness};
use crate::units::{self, SquareClassData, UnitGroup};

/// Search limits shared by all scans.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Budgets {
    pub trace_bound: i64,
    pub node_limit: u64,
    pub max_squares: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { trace_bound: 20, node_limit: DEFAULT_NODE_LIMIT, max_squares: 6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RuleKind {
    /// A fired theorem rule proves that no universal ternary form exists.
    Theorem,
    /// Bounded scans that never decide the verdict.
    Evidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RuleStatus {
    Fired,
    NotFired,
    NotApplicable,
    /// The search budget ran out before the rule could be decided.
    BudgetLimited,
    /// Evidence scans are skipped once the verdict is settled.
    Skipped,
    /// Evidence scan finished; see the certificate for its outcome.
    Completed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleResult {
    pub rule_id: String,
    pub kind: RuleKind,
    pub status: RuleStatus,
    pub fired: bool,
    pub certificate: Value,
    pub citation: String,
}

impl RuleResult {
    fn new(id: &str, kind: RuleKind, status: RuleStatus, certificate: Value, citation: &str) -> Self {
        RuleResult {
            rule_id: id.to_string(),
            kind,
            fired: status == RuleStatus::Fired,
            status,
            certificate,
            citation: citation.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NoUniversalTernary,
    Inconclusive,
    KnownPositive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub field_id: String,
    pub verdict: Verdict,
    pub rules: Vec<RuleResult>,
    pub budgets: Budgets,
}

impl ObstructionReport {
    pub fn rule(&self, id: &str) -> Option<&RuleResult> {
        self.rules.iter().find(|r| r.rule_id == id)
    }

    pub fn fired(&self) -> impl Iterator<Item = &RuleResult> {
        self.rules.iter().filter(|r| r.fired)
    }
}

/// Unit data and square tests shared by the rules.
struct Context<'f> {
    f: &'f Field,
    units: UnitGroup,
    data: SquareClassData,
    budgets: &'f Budgets,
}

impl<'f> Context<'f> {
    fn new(f: &'f Field, budgets: &'f Budgets) -> Result<Context<'f>> {
        let units = UnitGroup::for_field(f)?;
        let data = units::tp_units_mod_squares(f, &units)?;
        Ok(Context { f, units, data, budgets })
    }

    fn fmt(&self, a: &Elem) -> Value {
        Value::String(self.f.format_elem(a))
    }

    fn fmt_opt(&self, a: &Option<Elem>) -> Value {
        a.as_ref().map_or(Value::Null, |x| self.fmt(x))
    }

    fn epsilon(&self) -> Option<&Elem> {
        self.data.epsilon.as_ref().filter(|_| self.data.k == 1)
    }
}

fn status(fire: bool) -> RuleStatus {
    if fire {
        RuleStatus::Fired
    } else {
        RuleStatus::NotFired
    }
}

fn budget_limited(id: &str, kind: RuleKind, e: &Error, citation: &str) -> RuleResult {
    RuleResult::new(id, kind, RuleStatus::BudgetLimited, json!({ "error": e.to_string() }), citation)
}

fn not_applicable(id: &str, k: usize, citation: &str) -> RuleResult {
    RuleResult::new(
        id,
        RuleKind::Theorem,
        RuleStatus::NotApplicable,
        json!({ "requires_k": 1, "k": k }),
        citation,
    )
}

const C_R1: &str = "odd degree: a ternary form cannot be universal for local reasons";
const C_R2: &str = "a universal ternary form forces |U+/U^2| <= 2";
const C_R3: &str = "with 2 unramified only Q(sqrt 5) admits a universal ternary form";
const C_R4: &str = "with |U+/U^2| = 2 a universal ternary form forces 2*eps to be a square and sqrt 2 outside K";
const C_R5: &str = "with |U+/U^2| = 2 every indecomposable lambda has lambda or eps*lambda a square";
const C_R6: &str = "with |U+/U^2| = 2 every totally positive alpha with N(alpha) < 2^d has power-of-two norm";
const C_R7: &str = "no totally real field containing Q(sqrt 6) or Q(sqrt 33) admits a universal ternary form";
const C_R8: &str = "a quartic field with a universal ternary form has sqrt 2 in K and all totally positive units squares";
const C_E1: &str = "a universal ternary form forces 2*O+ to consist of sums of squares";
const C_E2: &str = "a universal ternary form with sqrt 2 outside K forces <1,1,2,2> to represent 2*O+";

fn rule_r1(cx: &Context) -> RuleResult {
    let d = cx.f.degree();
    RuleResult::new("R1", RuleKind::Theorem, status(d % 2 == 1), json!({ "degree": d }), C_R1)
}

fn rule_r2(cx: &Context) -> RuleResult {
    let sub = units::signature_subgroup(cx.f, &cx.units);
    let sigs: Vec<Value> = sub.generator_signatures.iter().map(|s| json!(s.0)).collect();
    RuleResult::new(
        "R2",
        RuleKind::Theorem,
        status(cx.data.k >= 2),
        json!({ "k": cx.data.k, "signature_rank": sub.rank, "generator_signatures": sigs }),
        C_R2,
    )
}

fn rule_r3(cx: &Context) -> RuleResult {
    let f = cx.f;
    let is_q_sqrt5 = f.degree() == 2 && *f.disc() == BigInt::from(5);
    let ramified = f.two_is_ramified();
    RuleResult::new(
        "R3",
        RuleKind::Theorem,
        status(!ramified && !is_q_sqrt5),
        json!({ "disc": f.disc().to_string(), "two_ramified": ramified, "is_q_sqrt5": is_q_sqrt5 }),
        C_R3,
    )
}

fn rule_r4(cx: &Context) -> Result<RuleResult> {
    let f = cx.f;
    let Some(eps) = cx.epsilon() else {
        return Ok(not_applicable("R4", cx.data.k, C_R4));
    };
    let sqrt2 = f.contains_sqrt(2)?;
    let two_eps = f.scale(eps, 2);
    let root = f.sqrt(&two_eps)?;
    let fire = sqrt2.is_some() || root.is_none();
    Ok(RuleResult::new(
        "R4",
        RuleKind::Theorem,
        status(fire),
        json!({
            "epsilon": cx.fmt(eps),
            "two_epsilon_root": cx.fmt_opt(&root),
            "two_epsilon_square": root.is_some(),
            "sqrt2": cx.fmt_opt(&sqrt2),
        }),
        C_R4,
    ))
}

/// Indecomposables up to the trace bound, by ascending trace, stopping at
/// the first trace level where some element fails `fails`.
fn scan_indecomposables(
    cx: &Context,
    mut fails: impl FnMut(&Elem) -> Result<bool>,
) -> Result<(usize, Vec<Elem>)> {
    let f = cx.f;
    let all = cone::enumerate_tp_by_trace(f, cx.budgets.trace_bound, cx.budgets.node_limit)?;
    let set: std::collections::HashSet<&Elem> = all.iter().collect();
    let mut checked = 0;
    let mut failing: Vec<Elem> = Vec::new();
    let mut level = None;
    for a in &all {
        let ta = f.trace(a);
        if level.is_some_and(|l| ta > l) {
            break;
        }
        let decomposable = all
            .iter()
            .take_while(|d| 2 * f.trace(d) <= ta)
            .any(|d| set.contains(&f.sub(a, d)));
        if decomposable {
            continue;
        }
        checked += 1;
        if fails(a)? {
            failing.push(a.clone());
            level = Some(ta);
        }
    }
    Ok((checked, failing))
}

fn rule_r5(cx: &Context) -> Result<RuleResult> {
    let f = cx.f;
    let Some(eps) = cx.epsilon() else {
        return Ok(not_applicable("R5", cx.data.k, C_R5));
    };
    let scan = scan_indecomposables(cx, |l| Ok(!f.is_square(l)? && !f.is_square(&f.mul(eps, l))?));
    let (checked, failing) = match scan {
        Ok(x) => x,
        Err(e @ Error::BudgetExceeded { .. }) => return Ok(budget_limited("R5", RuleKind::Theorem, &e, C_R5)),
        Err(e) => return Err(e),
    };
    let elements: Vec<Value> = failing
        .iter()
        .map(|l| {
            json!({
                "lambda": cx.fmt(l),
                "norm": f.norm(l).to_string(),
                "lambda_square": false,
                "epsilon_lambda_square": false,
            })
        })
        .collect();
    Ok(RuleResult::new(
        "R5",
        RuleKind::Theorem,
        status(!failing.is_empty()),
        json!({
            "epsilon": cx.fmt(eps),
            "trace_bound": cx.budgets.trace_bound,
            "indecomposables_checked": checked,
            "elements": elements,
        }),
        C_R5,
    ))
}

fn small_norm(cx: &Context) -> Result<cone::SmallNormScan> {
    let f = cx.f;
    cone::small_norm_scan(f, cx.budgets.trace_bound, f.degree() <= 2, cx.budgets.node_limit)
}

fn rule_r6(cx: &Context) -> Result<RuleResult> {
    let f = cx.f;
    if cx.epsilon().is_none() {
        return Ok(not_applicable("R6", cx.data.k, C_R6));
    }
    let scan = match small_norm(cx) {
        Ok(s) => s,
        Err(e @ Error::BudgetExceeded { .. }) => return Ok(budget_limited("R6", RuleKind::Theorem, &e, C_R6)),
        Err(e) => return Err(e),
    };
    let bad: Vec<&cone::SmallNormEntry> = scan.non_power_of_two().collect();
    let min_trace = bad.iter().map(|e| f.trace(&e.elem)).min();
    let elements: Vec<Value> = bad
        .iter()
        .filter(|e| Some(f.trace(&e.elem)) == min_trace)
        .map(|e| json!({ "alpha": cx.fmt(&e.elem), "norm": e.norm.to_string() }))
        .collect();
    Ok(RuleResult::new(
        "R6",
        RuleKind::Theorem,
        status(!bad.is_empty()),
        json!({
            "trace_bound": scan.trace_bound,
            "exhaustive": scan.exhaustive,
            "small_norm_elements": scan.entries.len(),
            "elements": elements,
        }),
        C_R6,
    ))
}

fn rule_r7(cx: &Context) -> Result<RuleResult> {
    let s6 = cx.f.contains_sqrt(6)?;
    let s33 = cx.f.contains_sqrt(33)?;
    Ok(RuleResult::new(
        "R7",
        RuleKind::Theorem,
        status(s6.is_some() || s33.is_some()),
        json!({ "sqrt6": cx.fmt_opt(&s6), "sqrt33": cx.fmt_opt(&s33) }),
        C_R7,
    ))
}

fn rule_r8(cx: &Context) -> Result<RuleResult> {
    let f = cx.f;
    let sqrt2 = f.contains_sqrt(2)?;
    let fire = f.degree() == 4 && (sqrt2.is_none() || cx.data.k >= 1);
    Ok(RuleResult::new(
        "R8",
        RuleKind::Theorem,
        status(fire),
        json!({ "degree": f.degree(), "sqrt2": cx.fmt_opt(&sqrt2), "k": cx.data.k }),
        C_R8,
    ))
}

/// Outcome of the sums-of-squares scan for one element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquaresEntry {
    pub alpha: Elem,
    /// Least number of squares representing `2 alpha`, if at most the maximum.
    pub min_squares: Option<usize>,
    pub witness: Option<Witness>,
    pub budget_limited: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquaresReport {
    pub trace_bound: i64,
    pub max_squares: usize,
    pub entries: Vec<SquaresEntry>,
}

impl SquaresReport {
    pub fn all_succeeded(&self) -> bool {
        self.entries.iter().all(|e| e.min_squares.is_some())
    }
}

/// For each `alpha` of trace at most `t`, the least `s <= s_max` with
/// `2 alpha` a sum of `s` squares.
pub fn check_sum_of_squares_2ok(
    f: &Field,
    t: i64,
    s_max: usize,
    node_limit: u64,
) -> Result<SquaresReport> {
    let reps: Vec<Representer> = (1..=s_max)
        .map(|s| Representer::new(f, &GramForm::sum_of_squares(f, s)?))
        .collect::<Result<_>>()?;
    let mut entries = Vec::new();
    for alpha in cone::enumerate_tp_by_trace(f, t, node_limit)? {
        let target = f.scale(&alpha, 2);
        let mut entry = SquaresEntry { alpha, min_squares: None, witness: None, budget_limited: false };
        for (i, rep) in reps.iter().enumerate() {
            match rep.represents(&target, node_limit) {
                Ok(Some(w)) => {
                    entry.min_squares = Some(i + 1);
                    entry.witness = Some(w);
                    break;
                }
                Ok(None) => {}
                Err(Error::BudgetExceeded { .. }) => {
                    entry.budget_limited = true;
                }
                Err(e) => return Err(e),
            }
        }
        entries.push(entry);
    }
    Ok(SquaresReport { trace_bound: t, max_squares: s_max, entries })
}

fn squares_summary(cx: &Context, rep: &SquaresReport) -> Value {
    let failures: Vec<Value> = rep
        .entries
        .iter()
        .filter(|e| e.min_squares.is_none())
        .map(|e| json!({ "alpha": cx.fmt(&e.alpha), "budget_limited": e.budget_limited }))
        .collect();
    let max_needed = rep.entries.iter().filter_map(|e| e.min_squares).max();
    json!({
        "trace_bound": rep.trace_bound,
        "max_squares": rep.max_squares,
        "checked": rep.entries.len(),
        "all_succeeded": rep.all_succeeded(),
        "max_squares_needed": max_needed,
        "failures": failures,
    })
}

fn rule_e1(cx: &Context) -> Result<RuleResult> {
    let b = cx.budgets;
    match check_sum_of_squares_2ok(cx.f, b.trace_bound, b.max_squares, b.node_limit) {
        Ok(rep) => Ok(RuleResult::new(
            "E1",
            RuleKind::Evidence,
            RuleStatus::Completed,
            squares_summary(cx, &rep),
            C_E1,
        )),
        Err(e @ Error::BudgetExceeded { .. }) => Ok(budget_limited("E1", RuleKind::Evidence, &e, C_E1)),
        Err(e) => Err(e),
    }
}

fn coverage_value(cx: &Context, c: &Coverage) -> Value {
    match c {
        Coverage::AllCovered { checked } => json!({ "all_covered": true, "checked": checked }),
        Coverage::Counterexample(a) => json!({ "all_covered": false, "counterexample": cx.fmt(a) }),
    }
}

fn rule_e2(cx: &Context) -> Result<RuleResult> {
    let b = cx.budgets;
    match lattice::check_1122_coverage(cx.f, b.trace_bound, b.node_limit) {
        Ok(c) => {
            let mut v = coverage_value(cx, &c);
            v["trace_bound"] = json!(b.trace_bound);
            Ok(RuleResult::new("E2", RuleKind::Evidence, RuleStatus::Completed, v, C_E2))
        }
        Err(e @ Error::BudgetExceeded { .. }) => Ok(budget_limited("E2", RuleKind::Evidence, &e, C_E2)),
        Err(e) => Err(e),
    }
}

/// Evaluates every rule and derives the verdict.
pub fn obstruct(f: &Field, budgets: &Budgets) -> Result<ObstructionReport> {
    let cx = Context::new(f, budgets)?;
    let mut rules = vec![
        rule_r1(&cx),
        rule_r2(&cx),
        rule_r3(&cx),
        rule_r4(&cx)?,
        rule_r5(&cx)?,
        rule_r6(&cx)?,
        rule_r7(&cx)?,
        rule_r8(&cx)?,
    ];
    let fired: Vec<String> = rules.iter().filter(|r| r.fired).map(|r| r.rule_id.clone()).collect();
    if fired.is_empty() {
        rules.push(rule_e1(&cx)?);
        rules.push(rule_e2(&cx)?);
    } else {
        for (id, c) in [("E1", C_E1), ("E2", C_E2)] {
            rules.push(RuleResult::new(
                id,
                RuleKind::Evidence,
                RuleStatus::Skipped,
                json!({ "reason": "verdict already decided" }),
                c,
            ));
        }
    }
    let verdict = if !fired.is_empty() {
        if f.known_positive() {
            return Err(Error::CatalogConflict(fired.join(",")));
        }
        Verdict::NoUniversalTernary
    } else if f.known_positive() {
        Verdict::KnownPositive
    } else {
        Verdict::Inconclusive
    };
    Ok(ObstructionReport { field_id: f.id().to_string(), verdict, rules, budgets: budgets.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConditionStatus {
    Pass,
    Fail,
    Evidence,
    BudgetLimited,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub condition: String,
    pub status: ConditionStatus,
    /// True when a `Pass` only covers a bounded search.
    pub bounded: bool,
    pub certificate: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem31Profile {
    pub field_id: String,
    pub epsilon: String,
    pub conditions: Vec<ConditionResult>,
}

impl Theorem31Profile {
    pub fn condition(&self, id: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition == id)
    }
}

fn condition(id: &str, status: ConditionStatus, bounded: bool, certificate: Value) -> ConditionResult {
    ConditionResult { condition: id.to_string(), status, bounded, certificate }
}

fn indecomposable_condition(
    cx: &Context,
    id: &str,
    mult: &Elem,
    label: &str,
) -> Result<ConditionResult> {
    let f = cx.f;
    match scan_indecomposables(cx, |l| Ok(!f.is_square(l)? && !f.is_square(&f.mul(mult, l))?)) {
        Ok((checked, failing)) => {
            let cert = json!({
                "trace_bound": cx.budgets.trace_bound,
                "indecomposables_checked": checked,
                "multiplier": label,
                "failing": failing.iter().map(|l| cx.fmt(l)).collect::<Vec<_>>(),
            });
            Ok(if failing.is_empty() {
                condition(id, ConditionStatus::Pass, true, cert)
            } else {
                condition(id, ConditionStatus::Fail, false, cert)
            })
        }
        Err(e @ Error::BudgetExceeded { .. }) => Ok(condition(
            id,
            ConditionStatus::BudgetLimited,
            true,
            json!({ "error": e.to_string() }),
        )),
        Err(e) => Err(e),
    }
}

/// Checks the computable necessary conditions that a universal ternary
/// lattice imposes on a field with `|U+/U^2| = 2`.
pub fn theorem31_profile(f: &Field, budgets: &Budgets) -> Result<Theorem31Profile> {
    let cx = Context::new(f, budgets)?;
    let eps = cx.epsilon().ok_or(Error::RequiresKOne { k: cx.data.k })?.clone();
    let mut conditions = Vec::new();

    conditions.push(indecomposable_condition(&cx, "3", &eps, "epsilon")?);
    conditions.push(indecomposable_condition(&cx, "4", &f.from_int(2), "2")?);

    let root = f.sqrt(&f.scale(&eps, 2))?;
    conditions.push(condition(
        "5",
        if root.is_some() { ConditionStatus::Pass } else { ConditionStatus::Fail },
        false,
        json!({ "two_epsilon_root": cx.fmt_opt(&root), "two_ramified": f.two_is_ramified() }),
    ));

    let sqrt2 = f.contains_sqrt(2)?;
    conditions.push(condition(
        "6",
        if sqrt2.is_none() { ConditionStatus::Pass } else { ConditionStatus::Fail },
        false,
        json!({ "sqrt2": cx.fmt_opt(&sqrt2) }),
    ));

    let e1 = check_sum_of_squares_2ok(f, budgets.trace_bound, budgets.max_squares, budgets.node_limit);
    conditions.push(match e1 {
        Ok(rep) => condition("7", ConditionStatus::Evidence, true, squares_summary(&cx, &rep)),
        Err(e @ Error::BudgetExceeded { .. }) => {
            condition("7", ConditionStatus::BudgetLimited, true, json!({ "error": e.to_string() }))
        }
        Err(e) => return Err(e),
    });

    conditions.push(match small_norm(&cx) {
        Ok(scan) => {
            let bad: Vec<Value> = scan
                .non_power_of_two()
                .map(|e| json!({ "alpha": cx.fmt(&e.elem), "norm": e.norm.to_string() }))
                .collect();
            let cert = json!({
                "trace_bound": scan.trace_bound,
                "exhaustive": scan.exhaustive,
                "failing": bad,
            });
            if bad.is_empty() {
                condition("8", ConditionStatus::Pass, !scan.exhaustive, cert)
            } else {
                condition("8", ConditionStatus::Fail, false, cert)
            }
        }
        Err(e @ Error::BudgetExceeded { .. }) => {
            condition("8", ConditionStatus::BudgetLimited, true, json!({ "error": e.to_string() }))
        }
        Err(e) => return Err(e),
    });

    Ok(Theorem31Profile { field_id: f.id().to_string(), epsilon: f.format_elem(&eps), conditions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    fn field(id: &str) -> Field {
        Catalog::builtin().load(id).unwrap()
    }

    fn small() -> Budgets {
        Budgets { trace_bound: 10, ..Budgets::default() }
    }

    #[test]
    fn structural_rules() {
        let r = obstruct(&field("qsqrt13"), &small()).unwrap();
        assert_eq!(r.verdict, Verdict::NoUniversalTernary);
        assert!(r.rule("R3").unwrap().fired);
        assert_eq!(r.rule("E1").unwrap().status, RuleStatus::Skipped);
        let r = obstruct(&field("zeta7"), &small()).unwrap();
        assert!(r.rule("R1").unwrap().fired && r.rule("R3").unwrap().fired);
    }

    #[test]
    fn known_positive_fields() {
        for id in ["qsqrt2", "qsqrt5"] {
            let r = obstruct(&field(id), &small()).unwrap();
            assert_eq!(r.verdict, Verdict::KnownPositive, "{id}");
            assert_eq!(r.fired().count(), 0);
        }
    }

    #[test]
    fn sqrt6_norm_three() {
        let f = field("qsqrt6");
        let r = obstruct(&f, &small()).unwrap();
        assert_eq!(r.verdict, Verdict::NoUniversalTernary);
        let r6 = r.rule("R6").unwrap();
        assert!(r6.fired);
        assert_eq!(r6.certificate["elements"][0]["alpha"], "t+3");
        assert!(r.rule("R7").unwrap().fired);
    }

    #[test]
    fn profile_requires_k_one() {
        assert_eq!(
            theorem31_profile(&field("qsqrt2"), &small()).unwrap_err(),
            Error::RequiresKOne { k: 0 }
        );
        let p = theorem31_profile(&field("qsqrt3"), &small()).unwrap();
        assert_eq!(p.condition("5").unwrap().status, ConditionStatus::Pass);
        assert_eq!(p.condition("6").unwrap().status, ConditionStatus::Pass);
        assert_eq!(p.condition("3").unwrap().status, ConditionStatus::Pass);
    }

    #[test]
    fn sums_of_squares_over_q() {
        let q = field("q");
        let rep = check_sum_of_squares_2ok(&q, 8, 4, DEFAULT_NODE_LIMIT).unwrap();
        assert!(rep.all_succeeded());
        assert_eq!(rep.entries.len(), 8);
    }
}
