//! Dominance relations over topologies built from significance tests.
//!
//! A [`Preorder`] stores, for every ordered pair of elements, whether the
//! first is significantly better, significantly worse, or incomparable.
//! Lower objective values are better.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::welch::{welch_test, Sidedness};
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Better,
    #[serde(rename = "<")]
    Worse,
    #[serde(rename = "~")]
    Incomparable,
}

impl Relation {
    fn flip(self) -> Self {
        match self {
            Relation::Better => Relation::Worse,
            Relation::Worse => Relation::Better,
            Relation::Incomparable => Relation::Incomparable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPreorder")]
pub struct Preorder {
    elements: Vec<String>,
    /// `relation[i][j] == Better` means element `i` beats element `j`.
    relation: Vec<Vec<Relation>>,
}

#[derive(Deserialize)]
struct RawPreorder {
    elements: Vec<String>,
    relation: Vec<Vec<Relation>>,
}

impl TryFrom<RawPreorder> for Preorder {
    type Error = StatsError;

    fn try_from(raw: RawPreorder) -> Result<Self, Self::Error> {
        Preorder::from_matrix(raw.elements, raw.relation)
    }
}

impl Preorder {
    /// All pairs incomparable.
    pub fn new(elements: Vec<String>) -> Self {
        let n = elements.len();
        Preorder {
            elements,
            relation: vec![vec![Relation::Incomparable; n]; n],
        }
    }

    /// Total order with `elements[0]` best.
    pub fn total_order(elements: Vec<String>) -> Self {
        let mut p = Preorder::new(elements);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                p.set_better(i, j);
            }
        }
        p
    }

    /// Checks shape, an incomparable diagonal and antisymmetry.
    pub fn from_matrix(elements: Vec<String>, relation: Vec<Vec<Relation>>) -> Result<Self, StatsError> {
        let n = elements.len();
        let malformed = |m: String| Err(StatsError::Malformed(m));
        if relation.len() != n || relation.iter().any(|row| row.len() != n) {
            return malformed(format!("relation must be a {n}x{n} matrix"));
        }
        for (i, row) in relation.iter().enumerate() {
            if row[i] != Relation::Incomparable {
                return malformed(format!("diagonal entry {i} must be '~'"));
            }
            for (j, &r) in row.iter().enumerate() {
                if r != relation[j][i].flip() {
                    return malformed(format!("entries ({i},{j}) and ({j},{i}) disagree"));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = elements.iter().find(|e| !seen.insert(*e)) {
            return malformed(format!("duplicate element '{dup}'"));
        }
        Ok(Preorder { elements, relation })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == label)
    }

    pub fn relation(&self, i: usize, j: usize) -> Relation {
        self.relation[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Relation>] {
        &self.relation
    }

    pub fn is_better(&self, i: usize, j: usize) -> bool {
        self.relation[i][j] == Relation::Better
    }

    /// Records `i` better than `j`.
    pub fn set_better(&mut self, i: usize, j: usize) {
        assert_ne!(i, j, "an element cannot dominate itself");
        self.relation[i][j] = Relation::Better;
        self.relation[j][i] = Relation::Worse;
    }

    pub fn set_incomparable(&mut self, i: usize, j: usize) {
        self.relation[i][j] = Relation::Incomparable;
        self.relation[j][i] = Relation::Incomparable;
    }

    /// Same elements, every strict pair flipped.
    pub fn reversed(&self) -> Self {
        Preorder {
            elements: self.elements.clone(),
            relation: self
                .relation
                .iter()
                .map(|row| row.iter().map(|r| r.flip()).collect())
                .collect(),
        }
    }

    /// Number of ordered pairs `(i, j)` with `i` better than `j`.
    pub fn strict_pairs(&self) -> usize {
        self.relation
            .iter()
            .flatten()
            .filter(|&&r| r == Relation::Better)
            .count()
    }

    pub fn dominated_count(&self, i: usize) -> usize {
        self.relation[i].iter().filter(|&&r| r == Relation::Better).count()
    }

    pub fn dominator_count(&self, i: usize) -> usize {
        self.relation[i].iter().filter(|&&r| r == Relation::Worse).count()
    }

    /// Whether every strict pair of `self` holds in `other` (matched by label).
    pub fn is_subrelation_of(&self, other: &Preorder) -> bool {
        let Some(map) = self.label_map(other) else {
            return false;
        };
        (0..self.len()).all(|i| {
            (0..self.len()).all(|j| !self.is_better(i, j) || other.is_better(map[i], map[j]))
        })
    }

    /// Index in `other` of each element of `self`, if both hold the same set.
    pub(crate) fn label_map(&self, other: &Preorder) -> Option<Vec<usize>> {
        if self.len() != other.len() {
            return None;
        }
        self.elements.iter().map(|e| other.index_of(e)).collect()
    }
}

/// Significance settings shared by both construction methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub alpha: f64,
    #[serde(default)]
    pub sidedness: Sidedness,
}

impl TestOptions {
    pub fn new(alpha: f64) -> Self {
        TestOptions {
            alpha,
            sidedness: Sidedness::TwoSided,
        }
    }

    fn check(&self) -> Result<(), StatsError> {
        if (0.0..1.0).contains(&self.alpha) {
            Ok(())
        } else {
            Err(StatsError::InvalidAlpha(self.alpha))
        }
    }
}

/// `Some(true)` when `a` is significantly lower than `b`, `Some(false)` when
/// significantly higher, `None` otherwise.
fn compare(a: &[f64], b: &[f64], opts: &TestOptions) -> Result<Option<bool>, StatsError> {
    let r = welch_test(a, b)?;
    if r.t_statistic != 0.0 && r.p_value(opts.sidedness) < opts.alpha {
        Ok(Some(r.t_statistic < 0.0))
    } else {
        Ok(None)
    }
}

fn finish(p: Preorder) -> Result<Preorder, StatsError> {
    let report = validate_relation(&p);
    if report.is_valid() {
        Ok(p)
    } else {
        Err(StatsError::RelationInvalid {
            preorder: Box::new(p),
            report,
        })
    }
}

/// Ranks elements by their final values: `i` beats `j` when Welch's test
/// rejects equal means at `alpha` and `i` has the lower mean.
pub fn build_preorder_basic(samples: &[(String, Vec<f64>)], opts: &TestOptions) -> Result<Preorder, StatsError> {
    opts.check()?;
    let mut p = Preorder::new(samples.iter().map(|(l, _)| l.clone()).collect());
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            match compare(&samples[i].1, &samples[j].1, opts)? {
                Some(true) => p.set_better(i, j),
                Some(false) => p.set_better(j, i),
                None => {}
            }
        }
    }
    finish(p)
}

/// Ranks elements by the latest migration period, within the trailing
/// `window` fraction of periods, at which their values differ
/// significantly. `traces[k].1` is a repetitions x periods matrix.
pub fn build_preorder_extended(
    traces: &[(String, Vec<Vec<f64>>)],
    opts: &TestOptions,
    window: f64,
) -> Result<Preorder, StatsError> {
    opts.check()?;
    if !(window > 0.0 && window <= 1.0) {
        return Err(StatsError::InvalidWindow(window));
    }
    let periods = traces
        .first()
        .and_then(|(_, reps)| reps.first())
        .map_or(0, Vec::len);
    for (label, reps) in traces {
        if let Some(bad) = reps.iter().find(|row| row.len() != periods) {
            return Err(StatsError::PeriodMismatch {
                label: label.clone(),
                expected: periods,
                got: bad.len(),
            });
        }
    }
    let span = ((window * periods as f64) - 1e-9).ceil().max(1.0) as usize;
    let first = periods.saturating_sub(span);
    let column = |k: usize, p: usize| -> Vec<f64> { traces[k].1.iter().map(|row| row[p]).collect() };

    let mut pre = Preorder::new(traces.iter().map(|(l, _)| l.clone()).collect());
    for i in 0..traces.len() {
        for j in i + 1..traces.len() {
            for p in (first..periods).rev() {
                match compare(&column(i, p), &column(j, p), opts)? {
                    Some(true) => pre.set_better(i, j),
                    Some(false) => pre.set_better(j, i),
                    None => continue,
                }
                break;
            }
        }
    }
    finish(pre)
}

/// Cycles and transitivity violations of a dominance relation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Elementary cycles, each starting at its first-listed element.
    pub cycles: Vec<Vec<String>>,
    /// Triples `(a, b, c)` with `a > b`, `b > c` but not `a > c`.
    pub transitivity_violations: Vec<[String; 3]>,
    /// Cycle enumeration stopped at [`ValidationReport::MAX_CYCLES`].
    #[serde(default)]
    pub truncated: bool,
}

impl ValidationReport {
    pub const MAX_CYCLES: usize = 1000;

    /// Empty report: the relation is a strict partial order.
    pub fn is_valid(&self) -> bool {
        self.cycles.is_empty() && self.transitivity_violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{} cycle(s), {} transitivity violation(s)",
            self.cycles.len(),
            if self.truncated { "+" } else { "" },
            self.transitivity_violations.len()
        )
    }
}

pub fn validate_relation(p: &Preorder) -> ValidationReport {
    let n = p.len();
    let label = |i: usize| p.elements[i].clone();
    let mut report = ValidationReport::default();

    for a in 0..n {
        for b in 0..n {
            if !p.is_better(a, b) {
                continue;
            }
            for c in 0..n {
                if c != a && p.is_better(b, c) && !p.is_better(a, c) {
                    report.transitivity_violations.push([label(a), label(b), label(c)]);
                }
            }
        }
    }

    // Each elementary cycle is found once, from its smallest member.
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for start in 0..n {
        path.push(start);
        on_path[start] = true;
        find_cycles(p, start, start, &mut path, &mut on_path, &mut report);
        on_path[start] = false;
        path.pop();
        if report.truncated {
            break;
        }
    }
    report
}

fn find_cycles(
    p: &Preorder,
    start: usize,
    node: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    report: &mut ValidationReport,
) {
    for next in 0..p.len() {
        if report.truncated {
            return;
        }
        if !p.is_better(node, next) {
            continue;
        }
        if next == start {
            if report.cycles.len() == ValidationReport::MAX_CYCLES {
                report.truncated = true;
                return;
            }
            report.cycles.push(path.iter().map(|&i| p.elements[i].clone()).collect());
        } else if next > start && !on_path[next] {
            on_path[next] = true;
            path.push(next);
            find_cycles(p, start, next, path, on_path, report);
            path.pop();
            on_path[next] = false;
        }
    }
}

/// Number of elements on the longest strictly ordered chain.
pub fn preorder_height(p: &Preorder) -> Result<usize, StatsError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done(usize),
    }
    fn visit(p: &Preorder, u: usize, marks: &mut [Mark]) -> Result<usize, StatsError> {
        match marks[u] {
            Mark::Done(h) => return Ok(h),
            Mark::Active => return Err(StatsError::CyclicRelation),
            Mark::New => {}
        }
        marks[u] = Mark::Active;
        let mut longest = 0;
        for v in 0..p.len() {
            if p.is_better(u, v) {
                longest = longest.max(visit(p, v, marks)?);
            }
        }
        marks[u] = Mark::Done(longest + 1);
        Ok(longest + 1)
    }

    let mut marks = vec![Mark::New; p.len()];
    let mut height = 0;
    for u in 0..p.len() {
        height = height.max(visit(p, u, &mut marks)?);
    }
    Ok(height)
}

/// The `k` elements beating the most others, and the `k` beaten by the
/// most others. Elements sharing the cut-off score are all kept, and an
/// element with a zero score never appears.
pub fn best_worst(p: &Preorder, k: usize) -> (Vec<String>, Vec<String>) {
    let pick = |score: &dyn Fn(usize) -> usize| -> Vec<String> {
        let mut ranked: Vec<(usize, usize)> =
            (0..p.len()).map(|i| (score(i), i)).filter(|&(s, _)| s > 0).collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        if k == 0 || ranked.is_empty() {
            return Vec::new();
        }
        let cutoff = ranked[k.min(ranked.len()) - 1].0;
        ranked
            .into_iter()
            .take_while(|&(s, _)| s >= cutoff)
            .map(|(_, i)| p.elements[i].clone())
            .collect()
    };
    (pick(&|i| p.dominated_count(i)), pick(&|i| p.dominator_count(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(s: &str) -> Vec<String> {
        s.chars().map(String::from).collect()
    }

    #[test]
    fn empty_relation_is_valid() {
        assert!(validate_relation(&Preorder::new(labels("abc"))).is_valid());
    }

    #[test]
    fn three_cycle_reported_once() {
        let mut p = Preorder::new(labels("abc"));
        p.set_better(0, 1);
        p.set_better(1, 2);
        p.set_better(2, 0);
        let r = validate_relation(&p);
        assert_eq!(r.cycles, vec![labels("abc")]);
        assert!(!r.is_valid());
        assert_eq!(preorder_height(&p), Err(StatsError::CyclicRelation));
    }

    #[test]
    fn missing_transitive_pair() {
        let mut p = Preorder::new(labels("abc"));
        p.set_better(0, 1);
        p.set_better(1, 2);
        let r = validate_relation(&p);
        assert!(r.cycles.is_empty());
        assert_eq!(r.transitivity_violations, vec![["a", "b", "c"].map(String::from)]);
    }

    #[test]
    fn heights() {
        assert_eq!(preorder_height(&Preorder::new(labels("abcd"))), Ok(1));
        let fourteen: Vec<String> = (0..14).map(|i| format!("t{i}")).collect();
        assert_eq!(preorder_height(&Preorder::total_order(fourteen)), Ok(14));
        assert_eq!(preorder_height(&Preorder::new(vec![])), Ok(0));
    }

    #[test]
    fn best_and_worst() {
        let total = Preorder::total_order(labels("abcd"));
        assert_eq!(best_worst(&total, 1), (labels("a"), labels("d")));
        let none = Preorder::new(labels("abcd"));
        assert_eq!(best_worst(&none, 3), (vec![], vec![]));
    }

    #[test]
    fn best_prefers_more_dominated() {
        // x beats five, y beats four.
        let mut p = Preorder::new(labels("xyabcde"));
        for j in 2..7 {
            p.set_better(0, j);
        }
        for j in 2..6 {
            p.set_better(1, j);
        }
        let (best, _) = best_worst(&p, 1);
        assert_eq!(best, labels("x"));
        let (best2, _) = best_worst(&p, 2);
        assert_eq!(best2, labels("xy"));
    }

    #[test]
    fn ties_at_cutoff_are_kept() {
        let mut p = Preorder::new(labels("abc"));
        p.set_better(0, 2);
        p.set_better(1, 2);
        assert_eq!(best_worst(&p, 1).0, labels("ab"));
    }

    #[test]
    fn basic_identical_samples_incomparable() {
        let s = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0]),
            ("b".to_string(), vec![1.0, 2.0, 3.0]),
        ];
        let p = build_preorder_basic(&s, &TestOptions::new(0.05)).unwrap();
        assert_eq!(p.strict_pairs(), 0);
    }

    #[test]
    fn basic_alpha_zero_orders_nothing() {
        let s = vec![
            ("a".to_string(), vec![0.0, 0.1, 0.2]),
            ("b".to_string(), vec![10.0, 10.1, 10.2]),
        ];
        let p = build_preorder_basic(&s, &TestOptions::new(0.0)).unwrap();
        assert_eq!(p.strict_pairs(), 0);
        assert_eq!(
            build_preorder_basic(&s, &TestOptions::new(1.5)),
            Err(StatsError::InvalidAlpha(1.5))
        );
    }

    #[test]
    fn json_shape() {
        let p = Preorder::total_order(labels("ab"));
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"elements":["a","b"],"relation":[["~",">"],["<","~"]]}"#);
        let back: Preorder = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let broken = r#"{"elements":["a","b"],"relation":[["~",">"],[">","~"]]}"#;
        assert!(serde_json::from_str::<Preorder>(broken).is_err());
    }
}
