//! Test corpus generation and property suites run over it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    gorenstein_battery, good_direction_sweep, killed_components_are_origin_and_conductor,
    multiplicity_formula, verify_nonpositivity, Instance,
};
use crate::error::{Error, Result};
use crate::ingest::{extract_semigroup, Branch, ParamCurve, Polynomial};
use crate::invariants::check_all;
use crate::semigroup::GoodSemigroup;

/// Default genus bound for the numerical semigroups of the corpus.
pub const DEFAULT_MAX_GENUS: usize = 8;

/// A numerical semigroup given by its gaps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Numerical {
    gaps: Vec<u64>,
}

impl Numerical {
    pub fn genus(&self) -> usize {
        self.gaps.len()
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    /// Largest gap, or `-1` for the natural numbers.
    pub fn frobenius(&self) -> i64 {
        self.gaps.last().map_or(-1, |&g| g as i64)
    }

    pub fn contains(&self, x: u64) -> bool {
        self.gaps.binary_search(&x).is_err()
    }

    pub fn multiplicity(&self) -> u64 {
        (1..).find(|&x| self.contains(x)).expect("cofinite")
    }

    pub fn minimal_generators(&self) -> Vec<u64> {
        let bound = (self.frobenius() + 1) as u64 + self.multiplicity();
        (1..=bound)
            .filter(|&s| self.contains(s) && !(1..s).any(|a| self.contains(a) && self.contains(s - a)))
            .collect()
    }

    /// Semigroups obtained by removing a minimal generator above the Frobenius number.
    fn children(&self) -> Vec<Numerical> {
        let f = self.frobenius();
        self.minimal_generators()
            .into_iter()
            .filter(|&g| g as i64 > f)
            .map(|g| {
                let mut gaps = self.gaps.clone();
                gaps.push(g);
                Numerical { gaps }
            })
            .collect()
    }

    pub fn to_good(&self) -> GoodSemigroup {
        GoodSemigroup::from_numerical_generators(&self.minimal_generators()).expect("gcd 1")
    }

    /// `S ∩ (m, 2m)` has at most one element.
    pub fn at_most_one_between_m_and_2m(&self) -> bool {
        let m = self.multiplicity();
        (m + 1..2 * m).filter(|&x| self.contains(x)).count() <= 1
    }

    /// Semigroup of a plane branch: minimal generators `b_0 < … < b_g` with
    /// `e_i = gcd(b_0..b_i)` strictly decreasing to 1 and `n_i b_i < b_{i+1}`
    /// where `n_i = e_{i-1} / e_i`.
    pub fn is_planar(&self) -> bool {
        let gens = self.minimal_generators();
        let mut e = gens[0];
        let mut prev: Option<(u64, u64)> = None;
        for &b in &gens[1..] {
            let next = e.gcd(&b);
            if next == e {
                return false;
            }
            if let Some((n, bp)) = prev {
                if n * bp >= b {
                    return false;
                }
            }
            prev = Some((e / next, b));
            e = next;
        }
        e == 1
    }
}

impl fmt::Display for Numerical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.minimal_generators().iter().map(ToString::to_string).collect();
        write!(f, "<{}>", gens.join(","))
    }
}

/// All numerical semigroups of genus at most `max_genus`, by genus and then gaps.
pub fn numerical_semigroups(max_genus: usize) -> Vec<Numerical> {
    let mut out = vec![Numerical { gaps: Vec::new() }];
    let mut layer = out.clone();
    for _ in 0..max_genus {
        let mut next: Vec<Numerical> = layer.iter().flat_map(Numerical::children).collect();
        next.sort();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// The fixed list of plane curve parametrizations.
pub fn plane_curves() -> Vec<(&'static str, ParamCurve)> {
    fn q(a: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(a))
    }
    fn poly(terms: &[(u32, i64)]) -> Polynomial {
        Polynomial::new(terms.iter().map(|&(e, a)| (e, q(a))))
    }
    fn branch(x: &[(u32, i64)], y: &[(u32, i64)]) -> Branch {
        let coords = vec![poly(x), poly(y)];
        let truncation = Branch::default_truncation(&coords);
        Branch { coords, truncation }
    }
    let list: Vec<(&'static str, Vec<Branch>)> = vec![
        ("cusp (t^2,t^3)", vec![branch(&[(2, 1)], &[(3, 1)])]),
        ("(t^3,t^4)", vec![branch(&[(3, 1)], &[(4, 1)])]),
        ("(t^3,t^5)", vec![branch(&[(3, 1)], &[(5, 1)])]),
        ("(t^4,t^5)", vec![branch(&[(4, 1)], &[(5, 1)])]),
        ("(t^2,t^5)", vec![branch(&[(2, 1)], &[(5, 1)])]),
        ("(t^4,t^6+t^7)", vec![branch(&[(4, 1)], &[(6, 1), (7, 1)])]),
        ("node", vec![branch(&[(1, 1)], &[]), branch(&[], &[(1, 1)])]),
        ("tacnode", vec![branch(&[(1, 1)], &[(2, 1)]), branch(&[(1, 1)], &[(2, -1)])]),
        ("three lines", vec![branch(&[(1, 1)], &[]), branch(&[], &[(1, 1)]), branch(&[(1, 1)], &[(1, 1)])]),
        ("(x^2-y^7)(x^5-y^4)", vec![branch(&[(7, 1)], &[(2, 1)]), branch(&[(4, 1)], &[(5, 1)])]),
    ];
    list.into_iter().map(|(name, b)| (name, ParamCurve::new(2, b).expect("well-formed parametrization"))).collect()
}

#[derive(Clone, Debug)]
pub enum Origin {
    Numerical(Numerical),
    Wedge(Numerical, Numerical),
    PlaneCurve(&'static str),
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub origin: Origin,
    pub semigroup: GoodSemigroup,
}

impl Entry {
    pub fn label(&self) -> String {
        match &self.origin {
            Origin::Numerical(n) => n.to_string(),
            Origin::Wedge(a, b) => format!("wedge({a},{b})"),
            Origin::PlaneCurve(name) => format!("plane curve {name}"),
        }
    }

    pub fn is_plane_curve(&self) -> bool {
        matches!(self.origin, Origin::PlaneCurve(_))
    }
}

/// Numerical semigroups up to `max_genus`, all unordered wedge pairs of them
/// (repetition allowed) and the ingested plane curves.
pub fn full_corpus(max_genus: usize) -> Result<Vec<Entry>> {
    let nums = numerical_semigroups(max_genus);
    let goods: Vec<GoodSemigroup> = nums.iter().map(Numerical::to_good).collect();
    let mut out: Vec<Entry> = nums
        .iter()
        .zip(&goods)
        .map(|(n, s)| Entry { origin: Origin::Numerical(n.clone()), semigroup: s.clone() })
        .collect();
    for i in 0..nums.len() {
        for j in i..nums.len() {
            out.push(Entry {
                origin: Origin::Wedge(nums[i].clone(), nums[j].clone()),
                semigroup: GoodSemigroup::wedge(&goods[i], &goods[j]),
            });
        }
    }
    for (name, curve) in plane_curves() {
        let e = extract_semigroup(&curve)?;
        out.push(Entry { origin: Origin::PlaneCurve(name), semigroup: e.semigroup });
    }
    Ok(out)
}

/// A seeded sample of `count` entries, kept in corpus order.
pub fn sample(entries: Vec<Entry>, seed: u64, count: usize) -> Vec<Entry> {
    if count >= entries.len() {
        return entries;
    }
    let mut idx: Vec<usize> = (0..entries.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut keep: Vec<usize> = idx[..count].to_vec();
    keep.sort_unstable();
    let mut slots: Vec<Option<Entry>> = entries.into_iter().map(Some).collect();
    keep.into_iter().map(|k| slots[k].take().expect("distinct indices")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Suite {
    Axioms,
    Euler,
    KerU,
    Gorenstein,
    Nonpositivity,
    MfPlanar,
    MfDag2,
    GoodDirection,
    Invariants,
    RootPairs,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Axioms,
        Suite::Euler,
        Suite::KerU,
        Suite::Gorenstein,
        Suite::Nonpositivity,
        Suite::MfPlanar,
        Suite::MfDag2,
        Suite::GoodDirection,
        Suite::Invariants,
        Suite::RootPairs,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Euler => "euler",
            Suite::KerU => "kerU",
            Suite::Gorenstein => "gorenstein",
            Suite::Nonpositivity => "nonpositivity",
            Suite::MfPlanar => "MF-planar",
            Suite::MfDag2 => "MF-dag2",
            Suite::GoodDirection => "good-direction",
            Suite::Invariants => "invariants",
            Suite::RootPairs => "root-pairs",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub instance: String,
    pub semigroup: serde_json::Value,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    /// Instances the suite applies to.
    pub checked: usize,
    pub failures: usize,
    /// Quantified items checked (points for `good-direction`, instances otherwise).
    pub items: usize,
    pub first_failure: Option<Witness>,
    pub notes: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

enum Verdict {
    Skip,
    /// Passed, with the number of quantified items checked.
    Pass(usize),
    Fail(String),
}

impl From<std::result::Result<(), String>> for Verdict {
    fn from(r: std::result::Result<(), String>) -> Self {
        match r {
            Ok(()) => Verdict::Pass(1),
            Err(e) => Verdict::Fail(e),
        }
    }
}

/// Per-instance data kept for the suites that aggregate across instances.
struct RootKey {
    root: String,
    multiplicity: i64,
    mf_holds: bool,
}

fn evaluate(entry: &Entry, suites: &[Suite]) -> (Vec<Verdict>, Option<RootKey>) {
    let report = entry.semigroup.validate();
    let wants_instance = suites.iter().any(|s| *s != Suite::Axioms);
    let inst = if wants_instance && report.passed() { Some(Instance::new(entry.semigroup.clone())) } else { None };
    let mut root_key = None;
    let verdicts = suites
        .iter()
        .map(|&suite| {
            if suite == Suite::Axioms {
                return if report.passed() {
                    Verdict::Pass(1)
                } else {
                    Verdict::Fail(format!("failed axioms {:?}", report.failed_axioms()))
                };
            }
            let inst = match &inst {
                None => return Verdict::Fail("not a good semigroup".into()),
                Some(Err(e)) => return Verdict::Fail(e.to_string()),
                Some(Ok(inst)) => inst,
            };
            run_suite(suite, entry, inst, &mut root_key)
        })
        .collect();
    (verdicts, root_key)
}

fn run_suite(suite: Suite, entry: &Entry, inst: &Instance, root_key: &mut Option<RootKey>) -> Verdict {
    let lc = &inst.cohomology;
    let r1 = match &entry.origin {
        Origin::Numerical(n) => Some(n),
        _ => None,
    };
    match suite {
        Suite::Axioms => unreachable!("handled before the pipeline"),
        Suite::Euler => {
            let (eu, delta) = (lc.euler_characteristic(), inst.delta());
            if eu == delta { Ok(()) } else { Err(format!("eu = {eu}, δ = {delta}")) }.into()
        }
        Suite::KerU => {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for m in &inst.local_minima {
                *counts.entry(m.weight).or_default() += 1;
            }
            for n in lc.n_min()..=lc.n_max() {
                let (minima, ker) = (counts.get(&n).copied().unwrap_or(0), lc.ker_u_rank(n));
                if minima != ker {
                    return Verdict::Fail(format!("n = {n}: {minima} local minima, ker U rank {ker}"));
                }
            }
            Verdict::Pass(1)
        }
        Suite::Gorenstein => match gorenstein_battery(inst) {
            Err(e) => Verdict::Fail(e.to_string()),
            Ok(v) if v.gorenstein && inst.total_multiplicity() >= 3 && !killed_components_are_origin_and_conductor(inst) => {
                Verdict::Fail(format!("ker U at 0 has rank {} with components {:?}", lc.ker_u_rank(0), lc.ker_u_components(0)))
            }
            Ok(_) => Verdict::Pass(1),
        },
        Suite::Nonpositivity => {
            let v = verify_nonpositivity(lc);
            if v.holds { Ok(()) } else { Err(format!("nonzero (q, n) = {:?}", v.witnesses)) }.into()
        }
        Suite::MfPlanar | Suite::MfDag2 => {
            let in_scope = entry.is_plane_curve()
                || r1.is_some_and(|n| if suite == Suite::MfPlanar { n.is_planar() } else { n.at_most_one_between_m_and_2m() });
            if !in_scope {
                return Verdict::Skip;
            }
            let mf = multiplicity_formula(inst);
            if mf.holds { Ok(()) } else { Err(format!("w(m) = {} but M(H^0) = {}", mf.weight_of_m, mf.m_h0)) }.into()
        }
        Suite::GoodDirection => match good_direction_sweep(inst) {
            Err(e) => Verdict::Fail(e.to_string()),
            Ok(s) if s.failures.is_empty() => Verdict::Pass(s.checked),
            Ok(s) => Verdict::Fail(format!("no good direction at {}", s.failures[0])),
        },
        Suite::Invariants => match check_all(inst).first() {
            None => Verdict::Pass(1),
            Some(f) => Verdict::Fail(format!("{}: {}", f.property, f.witness)),
        },
        Suite::RootPairs => {
            if r1.is_none() || !gorenstein_battery(inst).is_ok_and(|v| v.gorenstein) {
                return Verdict::Skip;
            }
            *root_key = Some(RootKey {
                root: lc.graded_root().to_json().to_string(),
                multiplicity: inst.total_multiplicity(),
                mf_holds: multiplicity_formula(inst).holds,
            });
            Verdict::Pass(1)
        }
    }
}

/// Runs `suites` over `entries`, evaluating each instance once. Outcomes are
/// independent of the thread count; the first failure is the earliest entry.
pub fn run_suites(entries: &[Entry], suites: &[Suite]) -> Vec<SuiteOutcome> {
    let results: Vec<(Vec<Verdict>, Option<RootKey>)> = entries.par_iter().map(|e| evaluate(e, suites)).collect();
    let mut outcomes: Vec<SuiteOutcome> = suites
        .iter()
        .map(|&suite| SuiteOutcome { suite, checked: 0, failures: 0, items: 0, first_failure: None, notes: Vec::new() })
        .collect();
    for (entry, (verdicts, _)) in entries.iter().zip(&results) {
        for (out, v) in outcomes.iter_mut().zip(verdicts) {
            match v {
                Verdict::Skip => {}
                Verdict::Pass(items) => {
                    out.checked += 1;
                    out.items += items;
                }
                Verdict::Fail(detail) => {
                    out.checked += 1;
                    out.items += 1;
                    out.failures += 1;
                    if out.first_failure.is_none() {
                        out.first_failure = Some(Witness {
                            instance: entry.label(),
                            semigroup: serde_json::to_value(crate::semigroup::SemigroupFile::from_semigroup(
                                &entry.semigroup,
                            ))
                            .expect("serializable"),
                            detail: detail.clone(),
                        });
                    }
                }
            }
        }
    }
    if let Some(out) = outcomes.iter_mut().find(|o| o.suite == Suite::RootPairs) {
        out.notes = root_pairs(entries, &results);
    }
    outcomes
}

/// Gorenstein numerical semigroups of different multiplicity sharing a graded root.
fn root_pairs(entries: &[Entry], results: &[(Vec<Verdict>, Option<RootKey>)]) -> Vec<String> {
    let mut by_root: BTreeMap<&str, Vec<(usize, &RootKey)>> = BTreeMap::new();
    for (k, (_, key)) in results.iter().enumerate() {
        if let Some(key) = key {
            by_root.entry(key.root.as_str()).or_default().push((k, key));
        }
    }
    let mut notes = Vec::new();
    for group in by_root.values() {
        for (a, &(i, ki)) in group.iter().enumerate() {
            for &(j, kj) in &group[a + 1..] {
                if ki.multiplicity != kj.multiplicity {
                    notes.push(format!(
                        "{} (m = {}, MF {}) and {} (m = {}, MF {}) share a graded root",
                        entries[i].label(),
                        ki.multiplicity,
                        if ki.mf_holds { "holds" } else { "fails" },
                        entries[j].label(),
                        kj.multiplicity,
                        if kj.mf_holds { "holds" } else { "fails" },
                    ));
                }
            }
        }
    }
    if notes.is_empty() {
        notes.push("no Gorenstein pair with different multiplicities shares a graded root".into());
    }
    notes
}

/// Builds a rayon pool sized by `LATCOH_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LATCOH_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("LATCOH_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_counts() {
        let all = numerical_semigroups(8);
        let mut counts = vec![0; 9];
        for n in &all {
            counts[n.genus()] += 1;
        }
        assert_eq!(counts, vec![1, 1, 2, 4, 7, 12, 23, 39, 67]);
        assert_eq!(all.len(), 156);
    }

    #[test]
    fn numerical_helpers() {
        let s = Numerical { gaps: vec![1, 2, 3, 6, 7, 11] };
        assert_eq!(s.minimal_generators(), vec![4, 5]);
        assert_eq!(s.to_good(), GoodSemigroup::from_numerical_generators(&[4, 5]).unwrap());
        assert!(s.is_planar());
        assert!(s.at_most_one_between_m_and_2m());
        let s = Numerical { gaps: vec![1, 2, 3, 5, 6, 10] };
        assert_eq!(s.to_string(), "<4,7,9>");
        assert!(!s.is_planar());
        assert!(s.at_most_one_between_m_and_2m());
        // <4,6,13> is the semigroup of (t^4, t^6 + t^7)
        let gens = [4u64, 6, 13];
        let good = GoodSemigroup::from_numerical_generators(&gens).unwrap();
        let c = good.conductor().coords()[0] as u64;
        let gaps: Vec<u64> = (0..c).filter(|&x| !good.contains_coords(&[x as i64])).collect();
        assert!(Numerical { gaps }.is_planar());
        assert!(!Numerical { gaps: vec![1, 2, 3, 7] }.is_planar());
    }

    #[test]
    fn corpus_size_and_sampling() {
        let c = full_corpus(3).unwrap();
        let nums = 1 + 1 + 2 + 4;
        assert_eq!(c.len(), nums + nums * (nums + 1) / 2 + plane_curves().len());
        let a: Vec<String> = sample(c.clone(), 7, 5).iter().map(Entry::label).collect();
        let b: Vec<String> = sample(c, 7, 5).iter().map(Entry::label).collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn plane_curve_semigroups() {
        let c = full_corpus(0).unwrap();
        let find = |name: &str| c.iter().find(|e| e.label() == format!("plane curve {name}")).unwrap().semigroup.clone();
        assert_eq!(find("(t^4,t^6+t^7)"), GoodSemigroup::from_numerical_generators(&[4, 6, 13]).unwrap());
        assert_eq!(find("three lines").conductor().coords(), &[2, 2, 2]);
        assert_eq!(find("tacnode").conductor().coords(), &[2, 2]);
    }

    #[test]
    fn suites_on_small_corpus() {
        let c = full_corpus(4).unwrap();
        let out = run_suites(&c, &Suite::ALL);
        for o in &out {
            if o.suite == Suite::MfDag2 {
                continue;
            }
            assert!(o.passed(), "{}: {:?}", o.suite, o.first_failure);
            assert!(o.checked > 0, "{}", o.suite);
        }
        assert_eq!("mf-planar".parse::<Suite>().unwrap(), Suite::MfPlanar);
        assert!("nope".parse::<Suite>().is_err());
    }
}
