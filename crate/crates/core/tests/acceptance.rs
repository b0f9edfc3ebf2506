//! Acceptance criteria 1-11, one PASS/FAIL line each. Exits nonzero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use latcoh_core::analysis::{classify_multiplicity, gorenstein_battery, multiplicity_formula, Instance, MultiplicityClass};
use latcoh_core::corpus::{full_corpus, numerical_semigroups, run_suites, Entry, Suite, SuiteOutcome, DEFAULT_MAX_GENUS};
use latcoh_core::ingest::{
    branch_valuation, extract_semigroup, hilbert_value, AmbientPolynomial, Branch, Certificate, ParamCurve, Polynomial,
    Valuation,
};
use latcoh_core::GoodSemigroup;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn numerical(gens: &[u64]) -> GoodSemigroup {
    GoodSemigroup::from_numerical_generators(gens).expect("gcd 1")
}

fn instance(s: GoodSemigroup) -> Result<Instance, String> {
    Instance::new(s).map_err(|e| e.to_string())
}

fn minima(inst: &Instance) -> Vec<(Vec<i64>, i64)> {
    inst.local_minima.iter().map(|m| (m.point.coords().to_vec(), m.weight)).collect()
}

fn sorted(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable();
    v
}

fn criterion_1() -> Check {
    struct Case {
        gens: &'static [u64],
        gorenstein: bool,
        mf: bool,
        minima: &'static [(i64, i64)],
    }
    let cases = [
        Case { gens: &[4, 5], gorenstein: true, mf: true, minima: &[(0, 0), (4, -2), (8, -2), (12, 0)] },
        Case { gens: &[4, 5, 6], gorenstein: true, mf: true, minima: &[(0, 0), (4, -2), (8, 0)] },
        Case { gens: &[4, 5, 7], gorenstein: false, mf: false, minima: &[(0, 0), (4, -2), (7, -1)] },
        Case { gens: &[4, 5, 6, 7], gorenstein: false, mf: true, minima: &[(0, 0), (4, -2)] },
    ];
    for c in cases {
        let inst = instance(numerical(c.gens))?;
        let g = gorenstein_battery(&inst).map_err(|e| e.to_string())?;
        let mf = multiplicity_formula(&inst);
        ensure(g.gorenstein == c.gorenstein, || format!("{:?}: Gorenstein {}", c.gens, g.gorenstein))?;
        ensure(mf.holds == c.mf, || format!("{:?}: MF {}", c.gens, mf.holds))?;
        let expected: Vec<(Vec<i64>, i64)> = c.minima.iter().map(|&(p, w)| (vec![p], w)).collect();
        ensure(minima(&inst) == expected, || format!("{:?}: minima {:?}", c.gens, minima(&inst)))?;
        let leaves = sorted(inst.cohomology.graded_root().leaves().iter().map(|l| l.0).collect());
        let expected_leaves = sorted(c.minima.iter().map(|m| m.1).collect());
        ensure(leaves == expected_leaves, || format!("{:?}: root leaves at {leaves:?}", c.gens))?;
    }
    Ok(())
}

fn criterion_2() -> Check {
    let s = GoodSemigroup::wedge(&numerical(&[3, 4]), &numerical(&[3, 4]));
    let inst = instance(s)?;
    let nonzero: Vec<i64> = inst.local_minima.iter().filter(|m| !m.point.is_zero()).map(|m| m.weight).collect();
    ensure(sorted(nonzero.clone()) == vec![-4, -3, -3, -2], || format!("nonzero minima weights {nonzero:?}"))?;
    let mf = multiplicity_formula(&inst);
    ensure(!mf.holds && mf.weight_of_m == -4 && mf.m_h0 == -2, || format!("MF {mf:?}"))
}

fn monomial_branch(x: u32, y: u32) -> Branch {
    let coords = vec![Polynomial::monomial(x), Polynomial::monomial(y)];
    let truncation = Branch::default_truncation(&coords);
    Branch { coords, truncation }
}

fn criterion_3() -> Check {
    let curve = ParamCurve::new(2, vec![monomial_branch(7, 2), monomial_branch(4, 5)]).map_err(|e| e.to_string())?;
    let e = extract_semigroup(&curve).map_err(|e| e.to_string())?;
    ensure(e.certificate == Certificate::Verified, || "conductor not verified".into())?;
    let c = e.semigroup.conductor().clone();
    ensure(c.coords() == [14, 20], || format!("conductor {c}"))?;
    let inst = instance(e.semigroup.clone())?;
    ensure(inst.total_multiplicity() == 6, || format!("multiplicity {}", inst.total_multiplicity()))?;
    let g = gorenstein_battery(&inst).map_err(|e| e.to_string())?;
    ensure(g.gorenstein, || "not Gorenstein".into())?;
    let mf = multiplicity_formula(&inst);
    ensure(mf.weight_of_m == -4 && 2 - mf.m_h0 == 6, || format!("MF {mf:?}"))?;
    ensure(classify_multiplicity(&inst).ok() == Some(MultiplicityClass::AtLeastThree), || "classification".into())?;
    let lc = &inst.cohomology;
    let h1: Vec<i64> = (lc.n_min()..=lc.n_max()).filter(|&n| lc.reduced_rank(1, n) > 0).collect();
    ensure(!h1.is_empty() && h1.iter().all(|&n| n <= 0), || format!("H^1_red support {h1:?}"))?;
    // δ from the grid, from a direct jet rank at c, and from δ1 + δ2 + (C1·C2)
    let h_c = hilbert_value(&curve, &c).map_err(|e| e.to_string())?;
    let x5_minus_y4 = AmbientPolynomial::from_int_terms(&[(&[5, 0], 1), (&[0, 4], -1)]);
    let meet = branch_valuation(&curve.branches()[0], &x5_minus_y4).map_err(|e| e.to_string())?;
    let delta1 = instance(numerical(&[2, 7]))?.delta();
    let delta2 = instance(numerical(&[4, 5]))?.delta();
    let eu = lc.euler_characteristic();
    ensure(meet == Valuation::Finite(8), || format!("intersection multiplicity {meet:?}"))?;
    ensure(e.delta == 17 && inst.delta() == 17 && eu == 17, || format!("δ {} / {} , eu {eu}", e.delta, inst.delta()))?;
    ensure(c.norm() - h_c == 17 && delta1 + delta2 + 8 == 17, || format!("jet rank h(c) = {h_c}, δ1 = {delta1}, δ2 = {delta2}"))
}

fn criterion_4() -> Check {
    let node = GoodSemigroup::wedge(&GoodSemigroup::smooth(), &GoodSemigroup::smooth());
    let inst = instance(GoodSemigroup::wedge(&node, &GoodSemigroup::smooth()))?;
    let c = inst.conductor().clone();
    ensure(c.coords() == [1, 1, 1], || format!("conductor {c}"))?;
    ensure(inst.w(&[1, 1, 1]) == -1, || format!("w(c) = {}", inst.w(&[1, 1, 1])))?;
    let g = gorenstein_battery(&inst).map_err(|e| e.to_string())?;
    ensure(!g.gorenstein, || "Gorenstein".into())?;
    let eu = inst.cohomology.euler_characteristic();
    ensure(inst.delta() == 2 && eu == 2, || format!("δ {}, eu {eu}", inst.delta()))
}

fn suite_check(outcomes: &[SuiteOutcome], suite: Suite) -> Check {
    let o = outcomes.iter().find(|o| o.suite == suite).expect("suite was run");
    match &o.first_failure {
        None => ensure(o.checked > 0, || format!("{suite}: nothing checked")),
        Some(w) => Err(format!("{suite}: {} of {} failed; first {} ({})", o.failures, o.checked, w.instance, w.detail)),
    }
}

/// The irreducible Gorenstein part of the MF scope, reported alongside
/// criterion 9.
fn gorenstein_dag2_scope() -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in numerical_semigroups(DEFAULT_MAX_GENUS) {
        if !n.at_most_one_between_m_and_2m() {
            continue;
        }
        let inst = Instance::new(n.to_good()).expect("pipeline");
        if !gorenstein_battery(&inst).expect("battery agrees").gorenstein {
            continue;
        }
        checked += 1;
        if !multiplicity_formula(&inst).holds {
            failures.push(n.to_string());
        }
    }
    (checked, failures)
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, elapsed: Duration, outcome: Check) {
        match outcome {
            Ok(()) => println!("criterion {id:>2} PASS  {name} ({:.2?})", elapsed),
            Err(e) => {
                self.failed += 1;
                println!("criterion {id:>2} FAIL  {name} ({:.2?}): {e}", elapsed);
            }
        }
    }

    fn timed(&mut self, id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Check) {
        let t = Instant::now();
        let outcome = f();
        let elapsed = t.elapsed();
        let outcome = outcome.and_then(|()| ensure(elapsed <= budget, || format!("took longer than {budget:?}")));
        self.line(id, name, elapsed, outcome);
    }
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    let second = Duration::from_secs(1);
    report.timed(1, "worked examples <4,5>, <4,5,6>, <4,5,7>, <4,5,6,7>", second, criterion_1);
    report.timed(2, "wedge of two (3,4) cusps", second, criterion_2);
    report.timed(3, "two-branch curve by ingestion", Duration::from_secs(60), criterion_3);
    report.timed(4, "wedge of three smooth branches", second, criterion_4);

    let t = Instant::now();
    let corpus: Vec<Entry> = full_corpus(DEFAULT_MAX_GENUS).expect("corpus builds");
    let suites = [
        Suite::Euler,
        Suite::KerU,
        Suite::Gorenstein,
        Suite::Nonpositivity,
        Suite::MfDag2,
        Suite::GoodDirection,
        Suite::Invariants,
    ];
    let outcomes = run_suites(&corpus, &suites);
    let elapsed = t.elapsed();
    println!("corpus: {} instances, all suites in {:.2?}", corpus.len(), elapsed);
    let budget = ensure(elapsed <= Duration::from_secs(300), || format!("corpus run took {elapsed:.2?}"));
    report.line(5, "nonpositivity over the corpus", elapsed, suite_check(&outcomes, Suite::Nonpositivity).and(budget.clone()));
    report.line(6, "eu = δ over the corpus", elapsed, suite_check(&outcomes, Suite::Euler).and(budget.clone()));
    report.line(7, "ker U rank = number of local minima", elapsed, suite_check(&outcomes, Suite::KerU).and(budget));
    report.line(8, "Gorenstein battery agreement", elapsed, suite_check(&outcomes, Suite::Gorenstein));
    report.line(9, "MF on r = 1 instances with at most one element in (m,2m) and plane curves", elapsed, suite_check(&outcomes, Suite::MfDag2));
    let (checked, failures) = gorenstein_dag2_scope();
    println!(
        "             note: restricted to Gorenstein r = 1 instances with at most one element in (m,2m): {checked} checked, {} failures{}",
        failures.len(),
        if failures.is_empty() { String::new() } else { format!(" {failures:?}") }
    );
    let points = outcomes.iter().find(|o| o.suite == Suite::GoodDirection).map_or(0, |o| o.items);
    report.line(
        10,
        &format!("good directions at every point of weight >= 2 ({points} points)"),
        elapsed,
        suite_check(&outcomes, Suite::GoodDirection),
    );
    report.line(11, "property invariants", elapsed, suite_check(&outcomes, Suite::Invariants));

    println!("{} of 11 criteria passed", 11 - report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

