//! Scoring solutions against test suites and aggregating pass rates.
//!
//! A problem passes only when every one of its tests passes. The test pass
//! rate is micro-averaged: total passed tests over total tests, so large
//! suites weigh more than small ones.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{Problem, SolutionRecord};
use crate::parser::parse_source;
use crate::runtime::{judge_program, Comparator, ExecLimits, RunStatus};

/// Label used for problems the grouping does not cover.
pub const UNLABELED: &str = "unlabeled";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreStatus {
    AllPass,
    Partial,
    AllFail,
    SyntaxError,
}

impl ScoreStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreStatus::AllPass => "all_pass",
            ScoreStatus::Partial => "partial",
            ScoreStatus::AllFail => "all_fail",
            ScoreStatus::SyntaxError => "syntax_error",
        }
    }
}

impl fmt::Display for ScoreStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemScore {
    pub problem_id: String,
    pub tests_total: usize,
    pub tests_passed: usize,
    pub status: ScoreStatus,
    pub per_test: Vec<(String, RunStatus)>,
    /// Why nothing ran: a syntax error, an empty extraction, a missing solution.
    pub note: Option<String>,
}

impl ProblemScore {
    pub fn from_results(problem_id: &str, per_test: Vec<(String, RunStatus)>) -> ProblemScore {
        let total = per_test.len();
        let passed = per_test.iter().filter(|(_, s)| *s == RunStatus::Pass).count();
        let status = if passed == total {
            ScoreStatus::AllPass
        } else if passed == 0 {
            ScoreStatus::AllFail
        } else {
            ScoreStatus::Partial
        };
        ProblemScore {
            problem_id: problem_id.to_string(),
            tests_total: total,
            tests_passed: passed,
            status,
            per_test,
            note: None,
        }
    }

    /// Every test marked with `status`; the problem scores zero.
    fn failed_outright(problem: &Problem, status: RunStatus, note: String) -> ProblemScore {
        let per_test = problem.tests.iter().map(|t| (t.id.clone(), status)).collect();
        ProblemScore {
            problem_id: problem.id.clone(),
            tests_total: problem.tests.len(),
            tests_passed: 0,
            status: if status == RunStatus::SyntaxError {
                ScoreStatus::SyntaxError
            } else {
                ScoreStatus::AllFail
            },
            per_test,
            note: Some(note),
        }
    }

    pub fn syntax_error(problem: &Problem, note: impl Into<String>) -> ProblemScore {
        Self::failed_outright(problem, RunStatus::SyntaxError, note.into())
    }

    pub fn missing(problem: &Problem) -> ProblemScore {
        Self::failed_outright(problem, RunStatus::WrongOutput, "no solution".into())
    }

    /// `tests_passed / tests_total`.
    pub fn reward(&self) -> f64 {
        if self.tests_total == 0 {
            0.0
        } else {
            self.tests_passed as f64 / self.tests_total as f64
        }
    }
}

/// Judges every test of `problem` against `source` with the default comparator.
pub fn score_solution(problem: &Problem, source: &str, limits: &ExecLimits) -> ProblemScore {
    score_solution_with(problem, source, limits, Comparator::Normalized)
}

/// Parses once, then runs each test on fresh interpreter state. Tests fan
/// out over the current rayon pool; result order follows the suite.
pub fn score_solution_with(problem: &Problem, source: &str, limits: &ExecLimits, comparator: Comparator) -> ProblemScore {
    let program = match parse_source(source) {
        Ok(p) => p,
        Err(e) => return ProblemScore::syntax_error(problem, e.to_string()),
    };
    let per_test = problem
        .tests
        .par_iter()
        .map(|t| (t.id.clone(), judge_program(&program, t, limits, comparator).status))
        .collect();
    ProblemScore::from_results(&problem.id, per_test)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupStats {
    pub problems: usize,
    pub all_pass: usize,
    pub syntax_errors: usize,
    pub tests_passed: usize,
    pub tests_total: usize,
}

impl GroupStats {
    fn add(&mut self, s: &ProblemScore) {
        self.problems += 1;
        self.all_pass += (s.status == ScoreStatus::AllPass) as usize;
        self.syntax_errors += (s.status == ScoreStatus::SyntaxError) as usize;
        self.tests_passed += s.tests_passed;
        self.tests_total += s.tests_total;
    }

    pub fn problem_pass_rate(&self) -> f64 {
        ratio(self.all_pass, self.problems)
    }

    pub fn test_pass_rate(&self) -> f64 {
        ratio(self.tests_passed, self.tests_total)
    }

    pub fn syntax_error_rate(&self) -> f64 {
        ratio(self.syntax_errors, self.problems)
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub overall: GroupStats,
    pub by_group: BTreeMap<String, GroupStats>,
    /// Sorted by problem id.
    pub per_problem: Vec<ProblemScore>,
}

impl MetricsReport {
    pub fn problem_pass_rate(&self) -> f64 {
        self.overall.problem_pass_rate()
    }

    pub fn test_pass_rate(&self) -> f64 {
        self.overall.test_pass_rate()
    }

    pub fn syntax_error_rate(&self) -> f64 {
        self.overall.syntax_error_rate()
    }

    /// Per-problem rewards averaged with equal weight per problem.
    pub fn mean_reward(&self) -> f64 {
        let sum: f64 = self.per_problem.iter().map(ProblemScore::reward).sum();
        sum / self.per_problem.len() as f64
    }

    /// `problems=N pass=P% testpass=T% syntax_err=S%`
    pub fn summary_line(&self) -> String {
        format!(
            "problems={} pass={} testpass={} syntax_err={}",
            self.overall.problems,
            percent(self.problem_pass_rate()),
            percent(self.test_pass_rate()),
            percent(self.syntax_error_rate()),
        )
    }

    /// Stable text rendering: same scores in, same bytes out.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let o = &self.overall;
        out.push_str("# pylang evaluation report\n");
        let _ = writeln!(out, "problems: {}", o.problems);
        let _ = writeln!(out, "tests: {}/{}", o.tests_passed, o.tests_total);
        let _ = writeln!(out, "problem_pass_rate: {}", rate(o.problem_pass_rate()));
        let _ = writeln!(out, "test_pass_rate: {}", rate(o.test_pass_rate()));
        let _ = writeln!(out, "syntax_error_rate: {}", rate(o.syntax_error_rate()));
        let _ = writeln!(out, "mean_reward: {:.4}", self.mean_reward());
        if !self.by_group.is_empty() {
            out.push_str("\n## groups\n");
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>8} {:>10} {:>11}",
                "group", "problems", "pass%", "testpass%", "syntax_err%"
            );
            for (label, g) in &self.by_group {
                let _ = writeln!(
                    out,
                    "{:<12} {:>8} {:>8} {:>10} {:>11}",
                    label,
                    g.problems,
                    pct_number(g.problem_pass_rate()),
                    pct_number(g.test_pass_rate()),
                    pct_number(g.syntax_error_rate()),
                );
            }
        }
        out.push_str("\n## problems\n");
        for s in &self.per_problem {
            let _ = writeln!(
                out,
                "{} {} {}/{} {:.4}",
                s.problem_id,
                s.status,
                s.tests_passed,
                s.tests_total,
                s.reward()
            );
            for (id, status) in &s.per_test {
                let _ = writeln!(out, "  {id} {status}");
            }
            if let Some(note) = &s.note {
                let first = note.lines().next().unwrap_or("");
                let _ = writeln!(out, "  note: {first}");
            }
        }
        out
    }
}

fn pct_number(fraction: f64) -> String {
    format!("{:.1}", fraction * 100.0)
}

fn percent(fraction: f64) -> String {
    format!("{}%", pct_number(fraction))
}

fn rate(fraction: f64) -> String {
    format!("{fraction:.4} ({})", percent(fraction))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty list of scores")]
    Empty,
    #[error("problem `{0}` scored more than once")]
    DuplicateProblem(String),
}

/// Rolls scores up into overall and per-label statistics. Problems missing
/// from `grouping` land in the `unlabeled` group.
pub fn aggregate(scores: &[ProblemScore], grouping: Option<&HashMap<String, String>>) -> Result<MetricsReport, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut per_problem = scores.to_vec();
    per_problem.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));
    if let Some(w) = per_problem.windows(2).find(|w| w[0].problem_id == w[1].problem_id) {
        return Err(MetricsError::DuplicateProblem(w[0].problem_id.clone()));
    }
    let mut overall = GroupStats::default();
    let mut by_group: BTreeMap<String, GroupStats> = BTreeMap::new();
    for s in &per_problem {
        overall.add(s);
        if let Some(labels) = grouping {
            let label = labels.get(&s.problem_id).map(String::as_str).unwrap_or(UNLABELED);
            by_group.entry(label.to_string()).or_default().add(s);
        }
    }
    Ok(MetricsReport {
        overall,
        by_group,
        per_problem,
    })
}

/// Signed `b - a` problem-pass-rate differences, in percentage points.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub overall: f64,
    pub by_group: BTreeMap<String, f64>,
}

impl GapReport {
    pub fn render(&self) -> String {
        let mut out = format!("overall {}\n", signed_points(self.overall));
        for (label, gap) in &self.by_group {
            let _ = writeln!(out, "{label} {}", signed_points(*gap));
        }
        out
    }
}

/// `+15.0`, `-2.5`, `0.0`.
pub fn signed_points(points: f64) -> String {
    let rounded = (points * 10.0).round() / 10.0;
    if rounded == 0.0 {
        "0.0".to_string()
    } else {
        format!("{rounded:+.1}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("reports cover different problems (first difference: `{0}`)")]
    ProblemSets(String),
    #[error("group `{0}` appears in only one report")]
    Group(String),
}

pub fn compare_reports(a: &MetricsReport, b: &MetricsReport) -> Result<GapReport, CompareError> {
    let ids = |r: &MetricsReport| r.per_problem.iter().map(|s| s.problem_id.clone()).collect::<BTreeSet<_>>();
    let (ia, ib) = (ids(a), ids(b));
    if let Some(id) = ia.symmetric_difference(&ib).next() {
        return Err(CompareError::ProblemSets(id.clone()));
    }
    let mut by_group = BTreeMap::new();
    for label in a.by_group.keys().chain(b.by_group.keys()) {
        match (a.by_group.get(label), b.by_group.get(label)) {
            (Some(ga), Some(gb)) => {
                by_group.insert(label.clone(), (gb.problem_pass_rate() - ga.problem_pass_rate()) * 100.0);
            }
            _ => return Err(CompareError::Group(label.clone())),
        }
    }
    Ok(GapReport {
        overall: (b.problem_pass_rate() - a.problem_pass_rate()) * 100.0,
        by_group,
    })
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub limits: ExecLimits,
    pub comparator: Comparator,
    /// Worker threads; `None` uses one per logical core.
    pub jobs: Option<usize>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("solution for unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("could not start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Scores every problem in corpus order. Problems without a solution score
/// as all-fail; output never depends on the number of workers.
pub fn evaluate(
    problems: &[Problem],
    solutions: &BTreeMap<String, SolutionRecord>,
    options: &EvalOptions,
) -> Result<Vec<ProblemScore>, EvalError> {
    let known: BTreeSet<&str> = problems.iter().map(|p| p.id.as_str()).collect();
    if let Some(id) = solutions.keys().find(|id| !known.contains(id.as_str())) {
        return Err(EvalError::UnknownProblem(id.clone()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build()?;
    let scores = pool.install(|| {
        problems
            .par_iter()
            .map(|p| match solutions.get(&p.id).map(SolutionRecord::source) {
                None => ProblemScore::missing(p),
                Some(Err(e)) => ProblemScore::syntax_error(p, e.to_string()),
                Some(Ok(src)) => score_solution_with(p, &src, &options.limits, options.comparator),
            })
            .collect()
    });
    Ok(scores)
}
