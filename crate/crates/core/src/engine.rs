//! Symbolic recursion over covers: each step races the uncovered entries,
//! charges the waiting time to every non-covering line of the k-assignment,
//! and recurses on the matrix left behind.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conjecture::{self, ConjectureError};
use crate::exact::{self, ExactError, Rat, RatFunc};
use crate::pattern::{self, CanonicalKey, CoverSet, PatternError, Pos, ZeroPattern};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("correlation hazard: every minimum cover leaves shared waiting-time stages on two live entries\n{0}")]
    Hazard(String),
    #[error("recursion revisited a case still being evaluated\n{0}")]
    Cycle(String),
    #[error("recursion depth exceeded the limit {0}")]
    DepthLimit(usize),
    #[error("alternative recursion inapplicable: {0}")]
    AltInapplicable(String),
    #[error("branch probabilities sum to {0}, not 1")]
    ProbabilityMismatch(String),
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Conjecture(#[from] ConjectureError),
}

/// A special entry: an independent sum of exponential stages with these rates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EntryStages {
    pub stages: Vec<RatFunc>,
}

impl EntryStages {
    pub fn new(stages: Vec<RatFunc>) -> Self {
        assert!(!stages.is_empty(), "a special entry needs at least one stage");
        EntryStages { stages }
    }

    pub fn signature(&self) -> String {
        let parts: Vec<String> = self.stages.iter().map(|s| s.to_string()).collect();
        parts.join(" ; ")
    }
}

/// Symbolic m and n, or fixed concrete sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dims {
    Symbolic,
    Concrete { m: i64, n: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseMatrix {
    pub k: usize,
    pub pattern: ZeroPattern,
    pub specials: BTreeMap<Pos, EntryStages>,
    pub depth: usize,
    pub dims: Dims,
    /// Entries that took on the last waiting time; tracked through reduction.
    marks: BTreeSet<Pos>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemoKey {
    pub k: usize,
    pub dims: Option<(i64, i64)>,
    pub shape: CanonicalKey,
}

impl fmt::Display for MemoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} {}x{}", self.k, self.shape.rows, self.shape.cols)?;
        if let Some((m, n)) = self.dims {
            write!(f, " at {m}x{n}")?;
        }
        let cells: Vec<String> = self.shape.cells.iter().map(|c| c.to_string()).collect();
        write!(f, " [{}]", cells.join(""))?;
        for (i, l) in self.shape.labels.iter().enumerate() {
            write!(f, " {}={{{l}}}", i + 2)?;
        }
        Ok(())
    }
}

impl CaseMatrix {
    pub fn new(k: usize, pattern: ZeroPattern) -> Self {
        CaseMatrix {
            k,
            pattern,
            specials: BTreeMap::new(),
            depth: 0,
            dims: Dims::Symbolic,
            marks: BTreeSet::new(),
        }
    }

    pub fn concrete(mut self, m: i64, n: i64) -> Self {
        self.dims = Dims::Concrete { m, n };
        self
    }

    pub fn with_special(mut self, pos: Pos, stages: Vec<RatFunc>) -> Self {
        assert!(!self.pattern.is_zero(pos.0, pos.1), "special entry on a zero");
        self.pattern.ensure_window(pos.0 + 1, pos.1 + 1);
        self.specials.insert(pos, EntryStages::new(stages));
        self
    }

    pub fn rows(&self) -> usize {
        self.pattern.rows()
    }

    pub fn cols(&self) -> usize {
        self.pattern.cols()
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        for (p, e) in &self.specials {
            if self.pattern.is_zero(p.0, p.1) {
                return Err(EngineError::InvalidCase(format!("special entry at zero ({}, {})", p.0 + 1, p.1 + 1)));
            }
            if e.stages.is_empty() || e.stages.iter().any(|s| s.is_zero()) {
                return Err(EngineError::InvalidCase("special entry needs nonzero stage rates".into()));
            }
        }
        if let Dims::Concrete { m, n } = self.dims {
            if (self.rows() as i64) > m || (self.cols() as i64) > n || self.k as i64 > m.min(n) {
                return Err(EngineError::InvalidCase(format!("window or k does not fit {m}x{n}")));
            }
        }
        Ok(())
    }

    fn fresh_rows(&self) -> RatFunc {
        let r = self.rows() as i64;
        match self.dims {
            Dims::Symbolic => &RatFunc::m() - &RatFunc::from_int(r),
            Dims::Concrete { m, .. } => RatFunc::from_int(m - r),
        }
    }

    fn fresh_cols(&self) -> RatFunc {
        let c = self.cols() as i64;
        match self.dims {
            Dims::Symbolic => &RatFunc::n() - &RatFunc::from_int(c),
            Dims::Concrete { n, .. } => RatFunc::from_int(n - c),
        }
    }

    pub fn memo_key(&self) -> MemoKey {
        let extras: Vec<(Pos, String)> = self.specials.iter().map(|(p, e)| (*p, e.signature())).collect();
        MemoKey {
            k: self.k,
            dims: match self.dims {
                Dims::Symbolic => None,
                Dims::Concrete { m, n } => Some((m, n)),
            },
            shape: pattern::canonical_key(&self.pattern, &extras),
        }
    }

    /// Pattern text with specials lettered `A`, `B`, ... in position order.
    pub fn describe(&self) -> String {
        let letters: Vec<(Pos, char)> = self
            .specials
            .keys()
            .enumerate()
            .map(|(i, p)| (*p, (b'A' + i as u8) as char))
            .collect();
        let mut s = format!("k = {}\n{}", self.k, pattern::render_text(&self.pattern, &letters));
        for ((_, e), (_, l)) in self.specials.iter().zip(&letters) {
            s.push_str(&format!("{l}: {}\n", e.signature()));
        }
        s
    }

    /// Keeps the listed window lines in order and renumbers everything.
    fn remap(&mut self, keep_rows: &[usize], keep_cols: &[usize]) {
        let row_of: HashMap<usize, usize> = keep_rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let col_of: HashMap<usize, usize> = keep_cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let mv = |p: &Pos| -> Option<Pos> { Some((*row_of.get(&p.0)?, *col_of.get(&p.1)?)) };
        self.pattern = self.pattern.restrict(keep_rows, keep_cols);
        self.specials = std::mem::take(&mut self.specials)
            .into_iter()
            .filter_map(|(p, e)| mv(&p).map(|q| (q, e)))
            .collect();
        self.marks = std::mem::take(&mut self.marks).iter().filter_map(mv).collect();
    }

    fn remove_row(&mut self, r: usize) {
        let rows: Vec<usize> = (0..self.rows()).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..self.cols()).collect();
        self.remap(&rows, &cols);
        self.k -= 1;
        match &mut self.dims {
            Dims::Symbolic => {
                for e in self.specials.values_mut() {
                    for s in e.stages.iter_mut() {
                        *s = s.shift(1, 0);
                    }
                }
            }
            Dims::Concrete { m, .. } => *m -= 1,
        }
    }

    fn remove_col(&mut self, c: usize) {
        let rows: Vec<usize> = (0..self.rows()).collect();
        let cols: Vec<usize> = (0..self.cols()).filter(|&j| j != c).collect();
        self.remap(&rows, &cols);
        self.k -= 1;
        match &mut self.dims {
            Dims::Symbolic => {
                for e in self.specials.values_mut() {
                    for s in e.stages.iter_mut() {
                        *s = s.shift(0, 1);
                    }
                }
            }
            Dims::Concrete { n, .. } => *n -= 1,
        }
    }

    fn set_zero(&mut self, p: Pos) {
        self.specials.remove(&p);
        self.marks.remove(&p);
        self.pattern.insert(p.0, p.1);
    }

    fn trim(&mut self) -> bool {
        let occupied = |r: usize, c: usize| self.pattern.is_zero(r, c) || self.specials.contains_key(&(r, c));
        let rows: Vec<usize> = (0..self.rows()).filter(|&r| (0..self.cols()).any(|c| occupied(r, c))).collect();
        let cols: Vec<usize> = (0..self.cols()).filter(|&c| (0..self.rows()).any(|r| occupied(r, c))).collect();
        if rows.len() == self.rows() && cols.len() == self.cols() {
            return false;
        }
        self.remap(&rows, &cols);
        true
    }
}

/// Result of reducing a case: `F(original)(m, n) = F(case)(m - dm, n - dn)`.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub case: CaseMatrix,
    pub dm: i64,
    pub dn: i64,
}

impl Reduced {
    fn lift(&self, v: RatFunc) -> RatFunc {
        match self.case.dims {
            Dims::Symbolic => v.shift(-self.dm, -self.dn),
            Dims::Concrete { .. } => v,
        }
    }
}

fn is_base(case: &CaseMatrix) -> bool {
    case.k == 0 || pattern::contains_assignment(&case.pattern, case.k)
}

/// Which simplifications `reduce` applies besides trimming.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReduceRules {
    pub superfluous: bool,
    pub forced: bool,
}

impl Default for ReduceRules {
    fn default() -> Self {
        ReduceRules {
            superfluous: true,
            forced: true,
        }
    }
}

/// Applies superfluous-cell conversion, forced-line deletion and trimming
/// until nothing changes.
pub fn reduce(case: &CaseMatrix) -> Reduced {
    reduce_with(case, ReduceRules::default())
}

pub fn reduce_with(case: &CaseMatrix, rules: ReduceRules) -> Reduced {
    let mut c = case.clone();
    c.pattern.ensure_window(
        c.specials.keys().map(|p| p.0 + 1).max().unwrap_or(0),
        c.specials.keys().map(|p| p.1 + 1).max().unwrap_or(0),
    );
    let (mut dm, mut dn) = (0i64, 0i64);
    loop {
        if is_base(&c) {
            break;
        }
        let mut changed = false;
        for r in 0..c.rows() {
            for col in 0..c.cols() {
                if rules.superfluous && !c.pattern.is_zero(r, col) && pattern::superfluous(&c.pattern, c.k, (r, col)) {
                    c.set_zero((r, col));
                    changed = true;
                }
            }
        }
        if changed {
            continue;
        }
        let forced = if rules.forced {
            pattern::forced_lines(&c.pattern, c.k)
        } else {
            CoverSet::default()
        };
        if let Some(r) = forced.row_list().first() {
            c.remove_row(*r);
            dm += 1;
            continue;
        }
        if let Some(col) = forced.col_list().first() {
            c.remove_col(*col);
            dn += 1;
            continue;
        }
        if !c.trim() {
            break;
        }
    }
    if is_base(&c) {
        c = CaseMatrix {
            k: 0,
            pattern: ZeroPattern::empty(),
            specials: BTreeMap::new(),
            depth: c.depth,
            dims: c.dims,
            marks: BTreeSet::new(),
        };
    }
    Reduced { case: c, dm, dn }
}

/// `Some(0)` when the zeros already hold a k-assignment; the closed form when
/// they hold a (k-1)-assignment and there are no special entries.
pub fn base_case(case: &CaseMatrix, fast_path: bool) -> Result<Option<RatFunc>, EngineError> {
    if is_base(case) {
        return Ok(Some(RatFunc::zero()));
    }
    if fast_path && case.specials.is_empty() && pattern::matching_number(&case.pattern) + 1 == case.k {
        let f = conjecture::main_theorem_f(&case.pattern, case.k)?;
        return Ok(Some(match case.dims {
            Dims::Symbolic => f,
            Dims::Concrete { m, n } => RatFunc::from_rat(f.eval_int(m, n)?),
        }));
    }
    Ok(None)
}

fn doubly_covered(cover: &CoverSet) -> Vec<Pos> {
    let mut out = Vec::new();
    for r in cover.row_list() {
        for c in cover.col_list() {
            out.push((r, c));
        }
    }
    out
}

/// Minimum covers ordered by: doubly covered specials, doubly covered cells,
/// then the canonical cover order.
pub fn ranked_covers(case: &CaseMatrix) -> Result<Vec<CoverSet>, EngineError> {
    let mut covers = pattern::all_min_covers(&case.pattern)?;
    covers.sort_by_key(|cv| {
        let dc = doubly_covered(cv);
        let sp = dc.iter().filter(|p| case.specials.contains_key(p)).count();
        (sp, dc.len(), cv.order_key())
    });
    Ok(covers)
}

pub fn choose_cover(case: &CaseMatrix) -> Result<CoverSet, EngineError> {
    ranked_covers(case)?
        .into_iter()
        .next()
        .ok_or_else(|| EngineError::InvalidCase("no cover available".into()))
}

/// Where the first clock to finish sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    /// A window cell, generic or special.
    Cell(Pos),
    /// A cell of this window row in a column outside the window.
    FreshCol(usize),
    /// A cell of this window column in a row outside the window.
    FreshRow(usize),
    /// A cell outside the window in both directions.
    FreshBoth,
}

#[derive(Clone, Debug)]
pub struct BranchOutcome {
    pub probability: RatFunc,
    pub conditional_eps_mean: RatFunc,
    pub child: CaseMatrix,
    pub eps_stage_rates: Vec<RatFunc>,
    pub winner: Winner,
}

struct GenericClass {
    winner: Winner,
    count: RatFunc,
}

fn generic_classes(case: &CaseMatrix, cover: &CoverSet) -> Vec<GenericClass> {
    let mut out = Vec::new();
    let urows: Vec<usize> = (0..case.rows()).filter(|r| !cover.has_row(*r)).collect();
    let ucols: Vec<usize> = (0..case.cols()).filter(|c| !cover.has_col(*c)).collect();
    for &r in &urows {
        for &c in &ucols {
            if !case.pattern.is_zero(r, c) && !case.specials.contains_key(&(r, c)) {
                out.push(GenericClass {
                    winner: Winner::Cell((r, c)),
                    count: RatFunc::one(),
                });
            }
        }
    }
    let fr = case.fresh_rows();
    let fc = case.fresh_cols();
    for &r in &urows {
        out.push(GenericClass {
            winner: Winner::FreshCol(r),
            count: fc.clone(),
        });
    }
    for &c in &ucols {
        out.push(GenericClass {
            winner: Winner::FreshRow(c),
            count: fr.clone(),
        });
    }
    out.push(GenericClass {
        winner: Winner::FreshBoth,
        count: &fr * &fc,
    });
    out.retain(|g| !g.count.is_zero());
    out
}

/// Expands the race among uncovered entries. Each terminal path yields the
/// child case, its probability and the stage rates of the waiting time.
pub fn race(case: &CaseMatrix, cover: &CoverSet) -> Result<Vec<BranchOutcome>, EngineError> {
    let classes = generic_classes(case, cover);
    let clocks: Vec<(Pos, &EntryStages)> = case
        .specials
        .iter()
        .filter(|(p, _)| !cover.covers(**p))
        .map(|(p, e)| (*p, e))
        .collect();
    if classes.is_empty() && clocks.is_empty() {
        return Err(EngineError::InvalidCase("no uncovered entry to race".into()));
    }
    let generic_total: RatFunc = classes.iter().map(|g| g.count.clone()).sum();

    struct Path {
        prob: RatFunc,
        lambdas: Vec<RatFunc>,
        progress: Vec<usize>,
        winner: Winner,
    }
    let mut paths: Vec<Path> = Vec::new();
    let mut stack: Vec<(Vec<usize>, RatFunc, Vec<RatFunc>)> = vec![(vec![0; clocks.len()], RatFunc::one(), Vec::new())];
    while let Some((progress, prob, mut lambdas)) = stack.pop() {
        let mut total = generic_total.clone();
        for (i, (_, e)) in clocks.iter().enumerate() {
            total = &total + &e.stages[progress[i]];
        }
        let inv = total.recip()?;
        lambdas.push(total);
        for g in &classes {
            paths.push(Path {
                prob: &(&prob * &g.count) * &inv,
                lambdas: lambdas.clone(),
                progress: progress.clone(),
                winner: g.winner,
            });
        }
        for (i, (pos, e)) in clocks.iter().enumerate() {
            let p = &(&prob * &e.stages[progress[i]]) * &inv;
            if progress[i] + 1 == e.stages.len() {
                paths.push(Path {
                    prob: p,
                    lambdas: lambdas.clone(),
                    progress: progress.clone(),
                    winner: Winner::Cell(*pos),
                });
            } else {
                let mut next = progress.clone();
                next[i] += 1;
                stack.push((next, p, lambdas.clone()));
            }
        }
    }

    let dcells = doubly_covered(cover);
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let mut child = case.clone();
        child.depth += 1;
        child.marks.clear();
        for (i, (pos, e)) in clocks.iter().enumerate() {
            if Winner::Cell(*pos) != path.winner && path.progress[i] > 0 {
                child.specials.insert(*pos, EntryStages::new(e.stages[path.progress[i]..].to_vec()));
            }
        }
        for &p in &dcells {
            let stages = if child.pattern.is_zero(p.0, p.1) {
                child.pattern.remove(p.0, p.1);
                path.lambdas.clone()
            } else if let Some(e) = child.specials.get(&p) {
                let mut s = e.stages.clone();
                s.extend(path.lambdas.iter().cloned());
                s
            } else {
                let mut s = vec![RatFunc::one()];
                s.extend(path.lambdas.iter().cloned());
                s
            };
            child.specials.insert(p, EntryStages::new(stages));
            child.marks.insert(p);
        }
        let (rows, cols) = (case.rows(), case.cols());
        match path.winner {
            Winner::Cell(p) => child.set_zero(p),
            Winner::FreshCol(r) => child.set_zero((r, cols)),
            Winner::FreshRow(c) => child.set_zero((rows, c)),
            Winner::FreshBoth => child.set_zero((rows, cols)),
        }
        let mean: RatFunc = path
            .lambdas
            .iter()
            .map(|l| l.recip())
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .sum();
        out.push(BranchOutcome {
            probability: path.prob,
            conditional_eps_mean: mean,
            child,
            eps_stage_rates: path.lambdas,
            winner: path.winner,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Race recursion, retrying other covers and then the alternative
    /// recursion when a cover is hazardous.
    Recurse,
    /// Alternative recursion at the root, race recursion below it.
    Alt,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub depth_limit: usize,
    pub fast_path: bool,
    pub trace: bool,
    pub rules: ReduceRules,
    /// Admits empty-pattern runs beyond k = 5.
    pub long_running: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            depth_limit: 64,
            fast_path: true,
            trace: false,
            rules: ReduceRules::default(),
            long_running: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceBranch {
    pub probability: String,
    pub eps_mean: String,
    pub child: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceNode {
    pub key: String,
    pub case: String,
    pub method: String,
    pub cover: Option<String>,
    pub value: String,
    pub branches: Vec<TraceBranch>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EngineStats {
    pub nodes: usize,
    pub races: usize,
    pub probability_checks: usize,
    pub hazard_retries: usize,
    pub alt_nodes: usize,
    pub memo_hits: usize,
}

/// Memoized evaluator; safe to share between threads.
pub struct Engine {
    pub config: EngineConfig,
    memo: Mutex<HashMap<MemoKey, RatFunc>>,
    stats: Mutex<EngineStats>,
    trace: Mutex<Vec<TraceNode>>,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(EngineConfig::default())
    }
}

enum Attempt {
    Done(RatFunc),
    Hazard,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Engine {
            config,
            memo: Mutex::new(HashMap::new()),
            stats: Mutex::new(EngineStats::default()),
            trace: Mutex::new(Vec::new()),
        }
    }

    pub fn stats(&self) -> EngineStats {
        self.stats.lock().unwrap().clone()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    pub fn memo_get(&self, key: &MemoKey) -> Option<RatFunc> {
        self.memo.lock().unwrap().get(key).cloned()
    }

    pub fn memo_entries(&self) -> Vec<(MemoKey, RatFunc)> {
        let mut v: Vec<_> = self.memo.lock().unwrap().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn take_trace(&self) -> Vec<TraceNode> {
        std::mem::take(&mut *self.trace.lock().unwrap())
    }

    fn memo_insert(&self, key: MemoKey, v: &RatFunc) {
        let mut memo = self.memo.lock().unwrap();
        if let Some(old) = memo.get(&key) {
            assert_eq!(old, v, "memo conflict for {key}");
        } else {
            memo.insert(key, v.clone());
        }
    }

    fn bump(&self, f: impl FnOnce(&mut EngineStats)) {
        f(&mut self.stats.lock().unwrap());
    }

    /// F for the case by race recursion.
    pub fn recurse(&self, case: &CaseMatrix) -> Result<RatFunc, EngineError> {
        case.validate()?;
        self.eval(case, &mut Vec::new())
    }

    pub fn evaluate(&self, case: &CaseMatrix, strategy: Strategy) -> Result<RatFunc, EngineError> {
        match strategy {
            Strategy::Recurse => self.recurse(case),
            Strategy::Alt => self.recurse_alt(case),
        }
    }

    /// F with the root expanded through the given cover of the reduced case.
    pub fn recurse_with_cover(&self, case: &CaseMatrix, cover: &CoverSet) -> Result<RatFunc, EngineError> {
        case.validate()?;
        let red = reduce_with(case, self.config.rules);
        if let Some(v) = base_case(&red.case, false)? {
            return Ok(red.lift(v));
        }
        let mut stack = vec![red.case.memo_key()];
        match self.try_race(&red.case, cover, &mut stack)? {
            Attempt::Done(v) => Ok(red.lift(v)),
            Attempt::Hazard => Err(EngineError::Hazard(red.case.describe())),
        }
    }

    /// F with the root expanded by the linear identity over single added
    /// zeros; only defined when the cover doubly covers generic cells only.
    pub fn recurse_alt(&self, case: &CaseMatrix) -> Result<RatFunc, EngineError> {
        case.validate()?;
        let red = reduce_with(case, self.config.rules);
        if let Some(v) = base_case(&red.case, false)? {
            return Ok(red.lift(v));
        }
        let mut stack = vec![red.case.memo_key()];
        let mut last = None;
        for cover in ranked_covers(&red.case)? {
            match self.alt_step(&red.case, &cover, &mut stack) {
                Ok(v) => return Ok(red.lift(v)),
                Err(e @ EngineError::AltInapplicable(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or_else(|| EngineError::AltInapplicable("no cover".into())))
    }

    fn eval(&self, case: &CaseMatrix, stack: &mut Vec<MemoKey>) -> Result<RatFunc, EngineError> {
        let red = reduce_with(case, self.config.rules);
        let v = self.eval_reduced(&red.case, stack)?;
        Ok(red.lift(v))
    }

    fn eval_reduced(&self, case: &CaseMatrix, stack: &mut Vec<MemoKey>) -> Result<RatFunc, EngineError> {
        if let Some(v) = base_case(case, self.config.fast_path)? {
            return Ok(v);
        }
        let key = case.memo_key();
        if let Some(v) = self.memo_get(&key) {
            self.bump(|s| s.memo_hits += 1);
            return Ok(v);
        }
        if stack.contains(&key) {
            return Err(EngineError::Cycle(case.describe()));
        }
        if stack.len() >= self.config.depth_limit {
            return Err(EngineError::DepthLimit(self.config.depth_limit));
        }
        stack.push(key.clone());
        let result = self.expand(case, stack);
        stack.pop();
        let v = result?;
        self.bump(|s| s.nodes += 1);
        self.memo_insert(key, &v);
        Ok(v)
    }

    fn expand(&self, case: &CaseMatrix, stack: &mut Vec<MemoKey>) -> Result<RatFunc, EngineError> {
        let covers = ranked_covers(case)?;
        for cover in &covers {
            match self.try_race(case, cover, stack)? {
                Attempt::Done(v) => return Ok(v),
                Attempt::Hazard => self.bump(|s| s.hazard_retries += 1),
            }
        }
        for cover in &covers {
            match self.alt_step(case, cover, stack) {
                Ok(v) => return Ok(v),
                Err(EngineError::AltInapplicable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Err(EngineError::Hazard(case.describe()))
    }

    fn try_race(&self, case: &CaseMatrix, cover: &CoverSet, stack: &mut Vec<MemoKey>) -> Result<Attempt, EngineError> {
        let branches = race(case, cover)?;
        let mut reduced = Vec::with_capacity(branches.len());
        for b in &branches {
            let red = reduce_with(&b.child, self.config.rules);
            if red.case.marks.len() >= 2 {
                return Ok(Attempt::Hazard);
            }
            reduced.push(red);
        }
        self.bump(|s| s.races += 1);
        let total: RatFunc = branches.iter().map(|b| b.probability.clone()).sum();
        if !total.is_one() {
            return Err(EngineError::ProbabilityMismatch(total.to_string()));
        }
        self.bump(|s| s.probability_checks += 1);
        let weight = RatFunc::from_int((case.k - cover.size()) as i64);
        let mut acc = RatFunc::zero();
        let mut trace = Vec::new();
        for (b, red) in branches.iter().zip(&reduced) {
            let mut child_case = red.case.clone();
            child_case.marks.clear();
            let child = red.lift(self.eval_reduced(&child_case, stack)?);
            let term = &(&weight * &b.conditional_eps_mean) + &child;
            acc = &acc + &(&b.probability * &term);
            if self.config.trace {
                trace.push(TraceBranch {
                    probability: b.probability.to_string(),
                    eps_mean: b.conditional_eps_mean.to_string(),
                    child: child_case.memo_key().to_string(),
                });
            }
        }
        if self.config.trace {
            self.record(case, "race", Some(cover), &acc, trace);
        }
        Ok(Attempt::Done(acc))
    }

    fn alt_step(&self, case: &CaseMatrix, cover: &CoverSet, stack: &mut Vec<MemoKey>) -> Result<RatFunc, EngineError> {
        let dcells = doubly_covered(cover);
        for p in &dcells {
            if case.pattern.is_zero(p.0, p.1) {
                return Err(EngineError::AltInapplicable(format!(
                    "doubly covered zero at ({}, {})",
                    p.0 + 1,
                    p.1 + 1
                )));
            }
            if case.specials.contains_key(p) {
                return Err(EngineError::AltInapplicable(format!(
                    "doubly covered special entry at ({}, {})",
                    p.0 + 1,
                    p.1 + 1
                )));
            }
        }
        if case.specials.keys().any(|p| !cover.covers(*p)) {
            return Err(EngineError::AltInapplicable("uncovered special entry".into()));
        }
        let k_minus = RatFunc::from_int((case.k - cover.size()) as i64);
        let fr = case.fresh_rows();
        let fc = case.fresh_cols();
        let urows = &fr + &RatFunc::from_int((case.rows() - cover.rows.count_ones() as usize) as i64);
        let ucols = &fc + &RatFunc::from_int((case.cols() - cover.cols.count_ones() as usize) as i64);
        let denom = &(&urows * &ucols) - &RatFunc::from_int(dcells.len() as i64);
        let mut acc = k_minus;
        let mut trace = Vec::new();
        let (rows, cols) = (case.rows(), case.cols());
        let with_zero = |p: Pos| {
            let mut c = case.clone();
            c.depth += 1;
            c.set_zero(p);
            c
        };
        for p in &dcells {
            let v = self.eval(&with_zero(*p), stack)?;
            acc = &acc - &v;
        }
        for g in generic_classes(case, cover) {
            let p = match g.winner {
                Winner::Cell(p) => p,
                Winner::FreshCol(r) => (r, cols),
                Winner::FreshRow(c) => (rows, c),
                Winner::FreshBoth => (rows, cols),
            };
            let child = with_zero(p);
            let v = self.eval(&child, stack)?;
            acc = &acc + &(&g.count * &v);
            if self.config.trace {
                trace.push(TraceBranch {
                    probability: g.count.to_string(),
                    eps_mean: String::new(),
                    child: reduce_with(&child, self.config.rules).case.memo_key().to_string(),
                });
            }
        }
        let v = acc.checked_div(&denom)?;
        self.bump(|s| s.alt_nodes += 1);
        if self.config.trace {
            self.record(case, "alt", Some(cover), &v, trace);
        }
        Ok(v)
    }

    fn record(&self, case: &CaseMatrix, method: &str, cover: Option<&CoverSet>, v: &RatFunc, branches: Vec<TraceBranch>) {
        self.trace.lock().unwrap().push(TraceNode {
            key: case.memo_key().to_string(),
            case: case.describe(),
            method: method.to_string(),
            cover: cover.map(|c| c.to_string()),
            value: v.to_string(),
            branches,
        });
    }

    /// `F_{k, {}}(m, n)` by recursion.
    pub fn f_empty(&self, k: usize) -> Result<RatFunc, EngineError> {
        if k == 0 || (k > 5 && !self.config.long_running) || k > 6 {
            return Err(EngineError::InvalidCase(format!(
                "empty-pattern recursion supports 1 <= k <= 5, or k = 6 with the long-running switch; got {k}"
            )));
        }
        self.recurse(&CaseMatrix::new(k, ZeroPattern::empty()))
    }

    /// `F_{n0}(n0, n0)` from the row-minima and column-minima reduction
    /// followed by concrete recursion over the resulting zero patterns.
    pub fn square_reduce(&self, n0: usize) -> Result<Rat, EngineError> {
        if !(2..=4).contains(&n0) {
            return Err(EngineError::InvalidCase(format!("square_reduce supports 2 <= n0 <= 4, got {n0}")));
        }
        let n = n0 as i64;
        let inv = Rat::new(1.into(), n.into());
        let mut total = Rat::one();
        let mut choice = vec![0usize; n0];
        loop {
            let mut z = ZeroPattern::new(n0, n0);
            for (r, &c) in choice.iter().enumerate() {
                z.insert(r, c);
            }
            let free: Vec<usize> = (0..n0).filter(|&c| z.col_mask(c) == 0).collect();
            let weight_rows = num_traits::pow(inv.clone(), n0);
            total += &weight_rows * Rat::from_integer(free.len().into()) * &inv;
            let mut pick = vec![0usize; free.len()];
            loop {
                let mut w = z.clone();
                for (i, &c) in free.iter().enumerate() {
                    w.insert(pick[i], c);
                }
                let case = CaseMatrix::new(n0, w).concrete(n, n);
                let f = self.recurse(&case)?;
                let weight = &weight_rows * num_traits::pow(inv.clone(), free.len());
                total += weight * f.as_constant().expect("concrete value");
                if !advance(&mut pick, n0) {
                    break;
                }
            }
            if !advance(&mut choice, n0) {
                break;
            }
        }
        Ok(total)
    }
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// JSON case description; cells are one-based.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CaseInput {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub zeros: Vec<[usize; 2]>,
    #[serde(default)]
    pub specials: Vec<SpecialInput>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SpecialInput {
    pub cell: [usize; 2],
    pub stages: Vec<String>,
}

impl CaseInput {
    pub fn to_case(&self) -> Result<CaseMatrix, EngineError> {
        let bad = |m: String| EngineError::InvalidCase(m);
        let cell = |c: &[usize; 2]| -> Result<Pos, EngineError> {
            if c[0] == 0 || c[1] == 0 || c[0] > self.rows || c[1] > self.cols {
                return Err(bad(format!("cell {c:?} outside the {}x{} window", self.rows, self.cols)));
            }
            Ok((c[0] - 1, c[1] - 1))
        };
        if self.cols > pattern::MAX_WINDOW {
            return Err(bad("window too wide".into()));
        }
        let mut z = ZeroPattern::new(self.rows, self.cols);
        for c in &self.zeros {
            let (r, col) = cell(c)?;
            z.insert(r, col);
        }
        let mut case = CaseMatrix::new(self.k, z);
        for s in &self.specials {
            let p = cell(&s.cell)?;
            if case.pattern.is_zero(p.0, p.1) || case.specials.contains_key(&p) {
                return Err(bad(format!("cell {:?} listed twice", s.cell)));
            }
            if s.stages.is_empty() {
                return Err(bad(format!("special at {:?} has no stages", s.cell)));
            }
            let stages = s.stages.iter().map(|e| exact::parse(e)).collect::<Result<Vec<_>, _>>()?;
            case = case.with_special(p, stages);
        }
        case.validate()?;
        Ok(case)
    }
}

/// Value at concrete dimensions, for spot checks.
pub fn eval_case_at(v: &RatFunc, m0: i64, n0: i64) -> Result<Rat, EngineError> {
    Ok(v.eval_int(m0, n0)?)
}
