//! Zero-pattern combinatorics: matchings, minimum covers, partial covers,
//! superfluous cells, forced lines, acyclicity and canonical forms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Zero-based `(row, col)`.
pub type Pos = (usize, usize);

pub const MAX_WINDOW: usize = 64;
pub const ENUM_WINDOW: usize = 8;
pub const ACYCLIC_MAX_ZEROS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("window {rows}x{cols} exceeds the enumeration bound {bound}x{bound}")]
    WindowTooLarge { rows: usize, cols: usize, bound: usize },
    #[error("pattern has {0} zeros; acyclicity search is limited to {ACYCLIC_MAX_ZEROS}")]
    TooManyZeros(usize),
    #[error("k = {0} exceeds the enumeration bound")]
    KTooLarge(usize),
    #[error("malformed pattern text: {0}")]
    Syntax(String),
}

/// Zeros inside an `rows x cols` window; bit `c` of `mask[r]` marks `(r, c)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Default)]
pub struct ZeroPattern {
    rows: usize,
    cols: usize,
    mask: Vec<u64>,
}

impl ZeroPattern {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(cols <= MAX_WINDOW, "window wider than {MAX_WINDOW}");
        ZeroPattern {
            rows,
            cols,
            mask: vec![0; rows],
        }
    }

    pub fn empty() -> Self {
        Self::new(0, 0)
    }

    /// Pattern over the given window containing `cells`.
    pub fn from_cells(rows: usize, cols: usize, cells: &[Pos]) -> Self {
        let mut z = Self::new(rows, cols);
        for &(r, c) in cells {
            z.insert(r, c);
        }
        z
    }

    /// Pattern over the smallest window holding `cells`.
    pub fn from_positions(cells: &[Pos]) -> Self {
        let rows = cells.iter().map(|p| p.0 + 1).max().unwrap_or(0);
        let cols = cells.iter().map(|p| p.1 + 1).max().unwrap_or(0);
        Self::from_cells(rows, cols, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_mask(&self, r: usize) -> u64 {
        self.mask.get(r).copied().unwrap_or(0)
    }

    pub fn masks(&self) -> &[u64] {
        &self.mask
    }

    pub fn is_zero(&self, r: usize, c: usize) -> bool {
        c < 64 && self.row_mask(r) >> c & 1 == 1
    }

    /// Marks a zero, growing the window if needed.
    pub fn insert(&mut self, r: usize, c: usize) {
        self.ensure_window(r + 1, c + 1);
        self.mask[r] |= 1 << c;
    }

    pub fn remove(&mut self, r: usize, c: usize) {
        if r < self.rows && c < self.cols {
            self.mask[r] &= !(1 << c);
        }
    }

    pub fn ensure_window(&mut self, rows: usize, cols: usize) {
        assert!(cols <= MAX_WINDOW, "window wider than {MAX_WINDOW}");
        if rows > self.rows {
            self.rows = rows;
            self.mask.resize(rows, 0);
        }
        self.cols = self.cols.max(cols);
    }

    pub fn len(&self) -> usize {
        self.mask.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.iter().all(|&m| m == 0)
    }

    pub fn cells(&self) -> Vec<Pos> {
        let mut out = Vec::new();
        for (r, &m) in self.mask.iter().enumerate() {
            for c in bits(m) {
                out.push((r, c));
            }
        }
        out
    }

    pub fn col_mask(&self, c: usize) -> u64 {
        let mut out = 0u64;
        for (r, &m) in self.mask.iter().enumerate() {
            if m >> c & 1 == 1 {
                out |= 1 << r;
            }
        }
        out
    }

    pub fn delete_row(&self, r: usize) -> Self {
        let mut z = self.clone();
        z.mask.remove(r);
        z.rows -= 1;
        z
    }

    pub fn delete_col(&self, c: usize) -> Self {
        let low = (1u64 << c) - 1;
        let mut z = self.clone();
        for m in z.mask.iter_mut() {
            *m = (*m & low) | ((*m >> 1) & !low);
        }
        z.cols -= 1;
        z
    }

    /// Keeps only the listed rows and columns, in the given order.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut z = Self::new(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if self.is_zero(r, c) {
                    z.insert(i, j);
                }
            }
        }
        z
    }

    /// Drops rows and columns that contain no zero.
    pub fn trimmed(&self) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| self.row_mask(r) != 0).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| self.col_mask(c) != 0).collect();
        self.restrict(&rows, &cols)
    }

    pub fn transpose(&self) -> Self {
        let mut z = Self::new(self.cols, self.rows);
        for (r, c) in self.cells() {
            z.insert(c, r);
        }
        z
    }

    /// Window as text: `R C` followed by rows of `0` and `.`.
    pub fn to_text(&self) -> String {
        render_text(self, &[])
    }
}

impl fmt::Display for ZeroPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Renders the window with optional lettered special entries.
pub fn render_text(z: &ZeroPattern, specials: &[(Pos, char)]) -> String {
    let mut s = format!("{} {}\n", z.rows, z.cols);
    for r in 0..z.rows {
        for c in 0..z.cols {
            let ch = if z.is_zero(r, c) {
                '0'
            } else {
                specials
                    .iter()
                    .find(|(p, _)| *p == (r, c))
                    .map(|(_, l)| *l)
                    .unwrap_or('.')
            };
            s.push(ch);
        }
        s.push('\n');
    }
    s
}

/// Parses the text format, returning the zeros and any lettered cells.
pub fn parse_text(src: &str) -> Result<(ZeroPattern, Vec<(Pos, char)>), PatternError> {
    let mut lines = src
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| PatternError::Syntax("missing header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| PatternError::Syntax(format!("bad header '{header}'")))?;
    let [rows, cols] = dims[..] else {
        return Err(PatternError::Syntax(format!("bad header '{header}'")));
    };
    if cols > MAX_WINDOW {
        return Err(PatternError::WindowTooLarge {
            rows,
            cols,
            bound: MAX_WINDOW,
        });
    }
    let mut z = ZeroPattern::new(rows, cols);
    let mut specials = Vec::new();
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| PatternError::Syntax(format!("missing row {}", r + 1)))?;
        let chars: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.len() != cols {
            return Err(PatternError::Syntax(format!(
                "row {} has {} cells, expected {cols}",
                r + 1,
                chars.len()
            )));
        }
        for (c, ch) in chars.into_iter().enumerate() {
            match ch {
                '0' => z.insert(r, c),
                '.' => {}
                'A'..='Z' => specials.push(((r, c), ch)),
                other => {
                    return Err(PatternError::Syntax(format!("unexpected '{other}'")));
                }
            }
        }
    }
    if let Some(extra) = lines.next() {
        return Err(PatternError::Syntax(format!("trailing line '{extra}'")));
    }
    Ok((z, specials))
}

pub(crate) fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub size: usize,
    pub pairs: Vec<Pos>,
}

/// Augmenting-path maximum matching on row masks; returns `col -> row`.
fn match_masks(rows: &[u64]) -> (usize, Vec<Option<usize>>) {
    fn augment(r: usize, rows: &[u64], seen: &mut u64, owner: &mut [Option<usize>]) -> bool {
        for c in bits(rows[r] & !*seen) {
            *seen |= 1 << c;
            if owner[c].is_none_or(|r2| augment(r2, rows, seen, owner)) {
                owner[c] = Some(r);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; 64];
    let mut size = 0;
    for r in 0..rows.len() {
        if rows[r] != 0 {
            let mut seen = 0u64;
            if augment(r, rows, &mut seen, &mut owner) {
                size += 1;
            }
        }
    }
    (size, owner)
}

pub(crate) fn matching_size(rows: &[u64]) -> usize {
    match_masks(rows).0
}

pub fn max_zero_matching(z: &ZeroPattern) -> Matching {
    let (size, owner) = match_masks(&z.mask);
    let mut pairs: Vec<Pos> = owner
        .iter()
        .enumerate()
        .filter_map(|(c, r)| r.map(|r| (r, c)))
        .collect();
    pairs.sort();
    Matching { size, pairs }
}

pub fn matching_number(z: &ZeroPattern) -> usize {
    matching_size(&z.mask)
}

pub fn contains_assignment(z: &ZeroPattern, k: usize) -> bool {
    matching_number(z) >= k
}

/// A set of window rows and columns.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct CoverSet {
    pub rows: u64,
    pub cols: u64,
}

impl CoverSet {
    pub fn from_lines(rows: &[usize], cols: &[usize]) -> Self {
        CoverSet {
            rows: rows.iter().fold(0, |a, r| a | 1 << r),
            cols: cols.iter().fold(0, |a, c| a | 1 << c),
        }
    }

    pub fn size(&self) -> usize {
        (self.rows.count_ones() + self.cols.count_ones()) as usize
    }

    pub fn has_row(&self, r: usize) -> bool {
        r < 64 && self.rows >> r & 1 == 1
    }

    pub fn has_col(&self, c: usize) -> bool {
        c < 64 && self.cols >> c & 1 == 1
    }

    pub fn covers(&self, (r, c): Pos) -> bool {
        self.has_row(r) || self.has_col(c)
    }

    pub fn row_list(&self) -> Vec<usize> {
        bits(self.rows).collect()
    }

    pub fn col_list(&self) -> Vec<usize> {
        bits(self.cols).collect()
    }

    pub fn covers_pattern(&self, z: &ZeroPattern) -> bool {
        z.cells().into_iter().all(|p| self.covers(p))
    }

    /// Sort key: fewer columns first, then rows and columns lexicographically.
    pub fn order_key(&self) -> (usize, Vec<usize>, Vec<usize>) {
        (self.cols.count_ones() as usize, self.row_list(), self.col_list())
    }
}

impl fmt::Display for CoverSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.row_list().iter().map(|r| (r + 1).to_string()).collect();
        let cols: Vec<String> = self.col_list().iter().map(|c| (c + 1).to_string()).collect();
        write!(f, "rows {{{}}} cols {{{}}}", rows.join(","), cols.join(","))
    }
}

/// König cover built from alternating reachability out of unmatched rows.
pub fn min_cover(z: &ZeroPattern) -> CoverSet {
    let (_, owner) = match_masks(&z.mask);
    let mut matched_rows = 0u64;
    let mut row_to_col = vec![None; z.rows];
    for (c, r) in owner.iter().enumerate() {
        if let Some(r) = r {
            matched_rows |= 1 << r;
            row_to_col[*r] = Some(c);
        }
    }
    let mut seen_rows = 0u64;
    let mut seen_cols = 0u64;
    let mut stack: Vec<usize> = (0..z.rows).filter(|r| matched_rows >> r & 1 == 0).collect();
    for &r in &stack {
        seen_rows |= 1 << r;
    }
    while let Some(r) = stack.pop() {
        for c in bits(z.mask[r] & !seen_cols) {
            seen_cols |= 1 << c;
            if let Some(r2) = owner[c] {
                if seen_rows >> r2 & 1 == 0 {
                    seen_rows |= 1 << r2;
                    stack.push(r2);
                }
            }
        }
    }
    CoverSet {
        rows: matched_rows & !seen_rows,
        cols: seen_cols,
    }
}

fn check_window(z: &ZeroPattern) -> Result<(), PatternError> {
    if z.rows > ENUM_WINDOW || z.cols > ENUM_WINDOW {
        return Err(PatternError::WindowTooLarge {
            rows: z.rows,
            cols: z.cols,
            bound: ENUM_WINDOW,
        });
    }
    Ok(())
}

/// Every minimum cover, in `CoverSet::order_key` order.
pub fn all_min_covers(z: &ZeroPattern) -> Result<Vec<CoverSet>, PatternError> {
    check_window(z)?;
    let nu = matching_number(z);
    let mut lines: Vec<(bool, usize)> = Vec::new();
    for r in 0..z.rows {
        if z.row_mask(r) != 0 {
            lines.push((true, r));
        }
    }
    for c in 0..z.cols {
        if z.col_mask(c) != 0 {
            lines.push((false, c));
        }
    }
    let mut out = Vec::new();
    let l = lines.len();
    for subset in 0u32..(1 << l) {
        if subset.count_ones() as usize != nu {
            continue;
        }
        let mut cs = CoverSet::default();
        for (i, &(is_row, idx)) in lines.iter().enumerate() {
            if subset >> i & 1 == 1 {
                if is_row {
                    cs.rows |= 1 << idx;
                } else {
                    cs.cols |= 1 << idx;
                }
            }
        }
        if cs.covers_pattern(z) {
            out.push(cs);
        }
    }
    out.sort_by_key(|c| c.order_key());
    Ok(out)
}

fn residual_masks(z: &ZeroPattern, sigma: &CoverSet) -> Vec<u64> {
    (0..z.rows)
        .map(|r| if sigma.has_row(r) { 0 } else { z.mask[r] & !sigma.cols })
        .collect()
}

/// Whether the zeros left uncovered by `sigma` can be covered with `budget` lines.
pub fn is_partial_cover(z: &ZeroPattern, sigma: &CoverSet, budget: usize) -> bool {
    matching_size(&residual_masks(z, sigma)) <= budget
}

/// `g[s][t][r]`: number of window subsets with `s` rows and `t` columns that
/// extend to a cover using at most `r` further lines, for `r < k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverCounts {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    g: Vec<u64>,
}

impl CoverCounts {
    fn idx(&self, s: usize, t: usize, r: usize) -> usize {
        (s * (self.cols + 1) + t) * self.k + r
    }

    /// Zero outside the stored range of `s` and `t`; saturates in `r`.
    pub fn g(&self, s: usize, t: usize, r: usize) -> u64 {
        if s > self.rows || t > self.cols || self.k == 0 {
            return 0;
        }
        self.g[self.idx(s, t, r.min(self.k - 1))]
    }
}

pub fn partial_cover_counts(z: &ZeroPattern, k: usize) -> Result<CoverCounts, PatternError> {
    check_window(z)?;
    if k > ENUM_WINDOW {
        return Err(PatternError::KTooLarge(k));
    }
    let mut out = CoverCounts {
        k,
        rows: z.rows,
        cols: z.cols,
        g: vec![0; (z.rows + 1) * (z.cols + 1) * k],
    };
    for rs in 0u64..(1 << z.rows) {
        for cs in 0u64..(1 << z.cols) {
            let sigma = CoverSet { rows: rs, cols: cs };
            let need = matching_size(&residual_masks(z, &sigma));
            let s = rs.count_ones() as usize;
            let t = cs.count_ones() as usize;
            for r in need..k {
                let i = out.idx(s, t, r);
                out.g[i] += 1;
            }
        }
    }
    Ok(out)
}

/// Minimum number of lines covering `z` when row `r` (if given) and column
/// `c` (if given) may not be used.
pub(crate) fn cover_avoiding(z: &ZeroPattern, row: Option<usize>, col: Option<usize>) -> usize {
    let mut forced_cols = row.map(|r| z.row_mask(r)).unwrap_or(0);
    let mut forced_rows = col.map(|c| z.col_mask(c)).unwrap_or(0);
    if let Some(c) = col {
        forced_cols &= !(1u64 << c);
    }
    if let Some(r) = row {
        forced_rows &= !(1u64 << r);
    }
    let rest: Vec<u64> = (0..z.rows)
        .map(|i| {
            if Some(i) == row || forced_rows >> i & 1 == 1 {
                0
            } else {
                z.mask[i] & !forced_cols
            }
        })
        .collect();
    (forced_cols.count_ones() + forced_rows.count_ones()) as usize + matching_size(&rest)
}

/// Whether every cover of `z` with at most `k-1` lines covers `cell`.
/// Cells outside the window are allowed.
pub fn superfluous(z: &ZeroPattern, k: usize, cell: Pos) -> bool {
    debug_assert!(!z.is_zero(cell.0, cell.1));
    k == 0 || cover_avoiding(z, Some(cell.0), Some(cell.1)) > k - 1
}

/// Window lines used by every cover with at most `k-1` lines. Empty when no
/// such cover exists.
pub fn forced_lines(z: &ZeroPattern, k: usize) -> CoverSet {
    let mut out = CoverSet::default();
    if k == 0 || matching_number(z) >= k {
        return out;
    }
    for r in 0..z.rows {
        if z.row_mask(r) != 0 && cover_avoiding(z, Some(r), None) > k - 1 {
            out.rows |= 1 << r;
        }
    }
    for c in 0..z.cols {
        if z.col_mask(c) != 0 && cover_avoiding(z, None, Some(c)) > k - 1 {
            out.cols |= 1 << c;
        }
    }
    out
}

/// Reverse search: some zero can be removed so that the rest is acyclic and
/// has an optimal all-rows or all-columns cover missing the removed zero.
pub fn is_acyclic(z: &ZeroPattern) -> Result<bool, PatternError> {
    let cells = z.cells();
    if cells.len() > ACYCLIC_MAX_ZEROS {
        return Err(PatternError::TooManyZeros(cells.len()));
    }
    fn go(set: u32, cells: &[Pos], memo: &mut HashMap<u32, bool>) -> bool {
        if set == 0 {
            return true;
        }
        if let Some(&v) = memo.get(&set) {
            return v;
        }
        let mut ok = false;
        for i in bits(set as u64) {
            let rest = set & !(1 << i);
            let members: Vec<Pos> = bits(rest as u64).map(|j| cells[j]).collect();
            let rows: BTreeSet<usize> = members.iter().map(|p| p.0).collect();
            let cols: BTreeSet<usize> = members.iter().map(|p| p.1).collect();
            let nu = matching_number(&ZeroPattern::from_positions(&members));
            let (r, c) = cells[i];
            let by_rows = rows.len() == nu && !rows.contains(&r);
            let by_cols = cols.len() == nu && !cols.contains(&c);
            if (by_rows || by_cols) && go(rest, cells, memo) {
                ok = true;
                break;
            }
        }
        memo.insert(set, ok);
        ok
    }
    let full = if cells.is_empty() { 0 } else { (1u32 << cells.len()) - 1 };
    Ok(go(full, &cells, &mut HashMap::new()))
}

/// Isomorphism-invariant key of an annotated window under independent row
/// and column permutations. Transposition is not a symmetry.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub rows: usize,
    pub cols: usize,
    pub labels: Vec<String>,
    pub cells: Vec<u16>,
}

/// Cell codes: 0 generic, 1 zero, 2 + i for the i-th sorted distinct label.
pub fn canonical_key(z: &ZeroPattern, extras: &[(Pos, String)]) -> CanonicalKey {
    let mut labels: Vec<String> = extras.iter().map(|(_, s)| s.clone()).collect();
    labels.sort();
    labels.dedup();
    let rows = z.rows.max(extras.iter().map(|e| e.0 .0 + 1).max().unwrap_or(0));
    let cols = z.cols.max(extras.iter().map(|e| e.0 .1 + 1).max().unwrap_or(0));
    let mut grid = vec![vec![0u16; cols]; rows];
    for (r, c) in z.cells() {
        grid[r][c] = 1;
    }
    for ((r, c), s) in extras {
        grid[*r][*c] = 2 + labels.binary_search(s).unwrap() as u16;
    }
    CanonicalKey {
        rows,
        cols,
        labels,
        cells: minimal_encoding(&grid, rows, cols),
    }
}

/// Lexicographically least row-major encoding over all row and column
/// permutations: permute the shorter side, sort the other.
fn minimal_encoding(grid: &[Vec<u16>], rows: usize, cols: usize) -> Vec<u16> {
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let mut best: Option<Vec<u16>> = None;
    if rows <= cols {
        for perm in permutations(rows) {
            let mut colv: Vec<Vec<u16>> = (0..cols)
                .map(|c| perm.iter().map(|&r| grid[r][c]).collect())
                .collect();
            colv.sort();
            let enc: Vec<u16> = (0..rows).flat_map(|i| colv.iter().map(move |v| v[i])).collect();
            if best.as_ref().is_none_or(|b| enc < *b) {
                best = Some(enc);
            }
        }
    } else {
        for perm in permutations(cols) {
            let mut rowv: Vec<Vec<u16>> = (0..rows)
                .map(|r| perm.iter().map(|&c| grid[r][c]).collect())
                .collect();
            rowv.sort();
            let enc: Vec<u16> = rowv.into_iter().flatten().collect();
            if best.as_ref().is_none_or(|b| enc < *b) {
                best = Some(enc);
            }
        }
    }
    best.unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// One-based cell list, as patterns are usually written.
    fn z1(cells: &[(usize, usize)]) -> ZeroPattern {
        let c: Vec<Pos> = cells.iter().map(|&(r, c)| (r - 1, c - 1)).collect();
        ZeroPattern::from_positions(&c)
    }

    fn brute_matching(z: &ZeroPattern) -> usize {
        let cells = z.cells();
        let mut best = 0;
        for s in 0u32..(1 << cells.len()) {
            let pick: Vec<Pos> = bits(s as u64).map(|i| cells[i]).collect();
            let rows: BTreeSet<_> = pick.iter().map(|p| p.0).collect();
            let cols: BTreeSet<_> = pick.iter().map(|p| p.1).collect();
            if rows.len() == pick.len() && cols.len() == pick.len() {
                best = best.max(pick.len());
            }
        }
        best
    }

    fn brute_min_cover(z: &ZeroPattern) -> usize {
        let mut best = usize::MAX;
        for rs in 0u64..(1 << z.rows()) {
            for cs in 0u64..(1 << z.cols()) {
                let c = CoverSet { rows: rs, cols: cs };
                if c.covers_pattern(z) {
                    best = best.min(c.size());
                }
            }
        }
        best
    }

    fn all_covers_upto(z: &ZeroPattern, b: usize, rows: usize, cols: usize) -> Vec<CoverSet> {
        let mut out = Vec::new();
        for rs in 0u64..(1 << rows) {
            for cs in 0u64..(1 << cols) {
                let c = CoverSet { rows: rs, cols: cs };
                if c.size() <= b && c.covers_pattern(z) {
                    out.push(c);
                }
            }
        }
        out
    }

    #[test]
    fn matching_examples() {
        assert_eq!(max_zero_matching(&ZeroPattern::empty()).size, 0);
        assert_eq!(max_zero_matching(&z1(&[(1, 1), (2, 2)])).size, 2);
        assert_eq!(max_zero_matching(&z1(&[(1, 2), (1, 3), (2, 1), (3, 1)])).size, 2);
    }

    #[test]
    fn min_cover_examples() {
        let c = min_cover(&z1(&[(1, 2), (1, 3), (2, 1), (3, 1)]));
        assert_eq!(c, CoverSet::from_lines(&[0], &[0]));
        assert_eq!(min_cover(&z1(&[(1, 1), (2, 1)])), CoverSet::from_lines(&[], &[0]));
        assert_eq!(min_cover(&ZeroPattern::empty()), CoverSet::default());
    }

    #[test]
    fn min_cover_prefers_rows() {
        assert_eq!(min_cover(&z1(&[(1, 1)])), CoverSet::from_lines(&[0], &[]));
    }

    #[test]
    fn all_min_covers_examples() {
        assert_eq!(
            all_min_covers(&z1(&[(1, 1)])).unwrap(),
            vec![CoverSet::from_lines(&[0], &[]), CoverSet::from_lines(&[], &[0])]
        );
        assert_eq!(
            all_min_covers(&z1(&[(1, 1), (1, 2), (2, 1)])).unwrap(),
            vec![
                CoverSet::from_lines(&[0, 1], &[]),
                CoverSet::from_lines(&[0], &[0]),
                CoverSet::from_lines(&[], &[0, 1]),
            ]
        );
        assert_eq!(
            all_min_covers(&z1(&[(1, 2), (1, 3), (2, 1), (3, 1)])).unwrap(),
            vec![CoverSet::from_lines(&[0], &[0])]
        );
        assert!(all_min_covers(&ZeroPattern::from_positions(&[(9, 0)])).is_err());
    }

    #[test]
    fn contains_assignment_examples() {
        assert!(contains_assignment(&z1(&[(1, 1), (2, 2)]), 2));
        assert!(!contains_assignment(&ZeroPattern::empty(), 1));
        assert!(!contains_assignment(&z1(&[(1, 2), (1, 3), (2, 1), (3, 1)]), 3));
    }

    #[test]
    fn partial_cover_examples() {
        let one = z1(&[(1, 1)]);
        assert!(is_partial_cover(&one, &CoverSet::default(), 1));
        assert!(!is_partial_cover(&one, &CoverSet::default(), 0));
        let diag = z1(&[(1, 1), (2, 2)]);
        assert!(is_partial_cover(&diag, &CoverSet::from_lines(&[0], &[]), 1));
    }

    #[test]
    fn partial_cover_count_examples() {
        let g = partial_cover_counts(&z1(&[(1, 1)]), 2).unwrap();
        assert_eq!(g.g(1, 0, 0), 1);
        assert_eq!(g.g(0, 0, 0), 0);
        assert_eq!(g.g(0, 0, 1), 1);
        let diag = partial_cover_counts(&z1(&[(1, 1), (2, 2)]), 3).unwrap();
        assert_eq!(diag.g(1, 1, 0), 2);
        let empty = partial_cover_counts(&ZeroPattern::new(2, 3), 3).unwrap();
        assert_eq!(empty.g(1, 2, 0), 6);
    }

    #[test]
    fn superfluous_examples() {
        assert!(superfluous(&z1(&[(1, 1), (2, 1)]), 2, (2, 0)));
        assert!(!superfluous(&z1(&[(1, 1)]), 3, (1, 1)));
        assert!(!superfluous(&ZeroPattern::empty(), 2, (0, 0)));
    }

    #[test]
    fn forced_line_examples() {
        assert_eq!(forced_lines(&z1(&[(1, 1), (1, 2)]), 2), CoverSet::from_lines(&[0], &[]));
        assert_eq!(forced_lines(&z1(&[(1, 1)]), 2), CoverSet::default());
        assert_eq!(forced_lines(&z1(&[(1, 2), (1, 3), (2, 1), (3, 1)]), 5), CoverSet::default());
    }

    #[test]
    fn acyclic_examples() {
        assert!(is_acyclic(&z1(&[(1, 1)])).unwrap());
        assert!(is_acyclic(&z1(&[(1, 1), (2, 2), (3, 3)])).unwrap());
        assert!(!is_acyclic(&z1(&[(1, 1), (1, 2), (2, 1), (2, 2)])).unwrap());
    }

    #[test]
    fn canonical_key_examples() {
        let a = ZeroPattern::from_cells(2, 2, &[(0, 1)]);
        let b = ZeroPattern::from_cells(2, 2, &[(1, 0)]);
        assert_eq!(canonical_key(&a, &[]), canonical_key(&ZeroPattern::from_cells(2, 2, &[(1, 1)]), &[]));
        let c = ZeroPattern::from_cells(1, 2, &[(0, 1)]);
        let d = ZeroPattern::from_cells(2, 1, &[(1, 0)]);
        assert_ne!(canonical_key(&c, &[]), canonical_key(&d, &[]));
        let _ = b;
        let diag = z1(&[(1, 1), (2, 2)]);
        let anti = z1(&[(2, 1), (1, 2)]);
        assert_eq!(canonical_key(&diag, &[]), canonical_key(&anti, &[]));
        let p = ZeroPattern::from_cells(3, 1, &[(0, 0), (1, 0)]);
        let q = ZeroPattern::from_cells(3, 1, &[(0, 0), (2, 0)]);
        assert_eq!(canonical_key(&p, &[]), canonical_key(&q, &[]));
    }

    #[test]
    fn canonical_key_respects_labels() {
        let z = ZeroPattern::from_cells(2, 2, &[(0, 0)]);
        let a = canonical_key(&z, &[((1, 1), "x".into())]);
        let b = canonical_key(&z, &[((1, 0), "x".into())]);
        let c = canonical_key(&z, &[((1, 1), "y".into())]);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn text_round_trip() {
        let (z, sp) = parse_text("3 2\n0.\n.A\n00\n").unwrap();
        assert_eq!(z.cells(), vec![(0, 0), (2, 0), (2, 1)]);
        assert_eq!(sp, vec![((1, 1), 'A')]);
        assert_eq!(render_text(&z, &sp), "3 2\n0.\n.A\n00\n");
        assert!(parse_text("2 2\n0.\n").is_err());
        assert!(parse_text("1 2\n0x\n").is_err());
    }

    #[test]
    fn delete_lines() {
        let z = z1(&[(1, 1), (2, 3), (3, 2)]);
        assert_eq!(z.delete_row(1).cells(), vec![(0, 0), (1, 1)]);
        assert_eq!(z.delete_col(1).cells(), vec![(0, 0), (1, 1)]);
    }

    fn all_patterns(rows: usize, cols: usize) -> impl Iterator<Item = ZeroPattern> {
        (0u32..(1 << (rows * cols))).map(move |bits_| {
            let mut z = ZeroPattern::new(rows, cols);
            for i in 0..rows * cols {
                if bits_ >> i & 1 == 1 {
                    z.insert(i / cols, i % cols);
                }
            }
            z
        })
    }

    #[test]
    fn konig_duality_exhaustive() {
        for rows in 1..=4 {
            for cols in 1..=4 {
                for z in all_patterns(rows, cols) {
                    let nu = matching_number(&z);
                    let c = min_cover(&z);
                    assert!(c.covers_pattern(&z));
                    assert_eq!(c.size(), nu);
                    if rows * cols <= 9 {
                        assert_eq!(brute_matching(&z), nu);
                    }
                    assert_eq!(brute_min_cover(&z), nu);
                }
            }
        }
    }

    #[test]
    fn superfluous_matches_enumeration() {
        for z in all_patterns(3, 3) {
            for k in 1..=4 {
                let covers = all_covers_upto(&z, k - 1, 4, 4);
                for r in 0..4 {
                    for c in 0..4 {
                        if z.is_zero(r, c) {
                            continue;
                        }
                        let expect = covers.iter().all(|cv| cv.covers((r, c)));
                        assert_eq!(superfluous(&z, k, (r, c)), expect, "{z:?} k={k} ({r},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn superfluous_cell_adds_no_new_covers() {
        for z in all_patterns(3, 3) {
            for k in 1..=3 {
                for r in 0..3 {
                    for c in 0..3 {
                        if z.is_zero(r, c) || !superfluous(&z, k, (r, c)) {
                            continue;
                        }
                        let mut z2 = z.clone();
                        z2.insert(r, c);
                        for cv in all_covers_upto(&z2, k - 1, 3, 3) {
                            assert!(cv.covers_pattern(&z));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn forced_lines_match_enumeration() {
        for z in all_patterns(3, 3) {
            for k in 1..=4 {
                let covers = all_covers_upto(&z, k - 1, 3, 3);
                let f = forced_lines(&z, k);
                if covers.is_empty() {
                    assert_eq!(f, CoverSet::default());
                    continue;
                }
                for r in 0..3 {
                    assert_eq!(f.has_row(r), covers.iter().all(|cv| cv.has_row(r)));
                }
                for c in 0..3 {
                    assert_eq!(f.has_col(c), covers.iter().all(|cv| cv.has_col(c)));
                }
            }
        }
    }

    #[test]
    fn partial_counts_consistency() {
        for z in all_patterns(2, 3) {
            let k = 4;
            let g = partial_cover_counts(&z, k).unwrap();
            let nu = matching_number(&z);
            for s in 0..=2 {
                for t in 0..=3 {
                    let full = crate::exact::binom(2, s as i64) * crate::exact::binom(3, t as i64);
                    for r in 0..k {
                        if r >= nu {
                            assert_eq!(num_bigint::BigInt::from(g.g(s, t, r)), full);
                        }
                        if r > 0 {
                            assert!(g.g(s, t, r) >= g.g(s, t, r - 1));
                        }
                    }
                }
            }
        }
    }

    fn brute_iso(a: &[Vec<u16>], b: &[Vec<u16>]) -> bool {
        let rows = a.len();
        let cols = a.first().map_or(0, |r| r.len());
        if b.len() != rows || b.first().map_or(0, |r| r.len()) != cols {
            return false;
        }
        for p in permutations(rows) {
            for q in permutations(cols) {
                if (0..rows).all(|r| (0..cols).all(|c| a[p[r]][q[c]] == b[r][c])) {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn canonical_key_matches_brute_force() {
        let shapes = [(2, 2), (2, 3), (3, 2), (3, 3)];
        for &(rows, cols) in &shapes {
            let pats: Vec<ZeroPattern> = all_patterns(rows, cols).filter(|z| z.len() <= 6).collect();
            let grids: Vec<Vec<Vec<u16>>> = pats
                .iter()
                .map(|z| (0..rows).map(|r| (0..cols).map(|c| z.is_zero(r, c) as u16).collect()).collect())
                .collect();
            let keys: Vec<CanonicalKey> = pats.iter().map(|z| canonical_key(z, &[])).collect();
            for i in 0..pats.len() {
                for j in (i..pats.len()).step_by(7) {
                    assert_eq!(keys[i] == keys[j], brute_iso(&grids[i], &grids[j]));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn canonical_key_invariant_under_permutation(
            cells in proptest::collection::vec((0usize..4, 0usize..4), 0..7),
            rp in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(),
            cp in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            let z = ZeroPattern::from_cells(4, 4, &cells);
            let moved: Vec<Pos> = cells.iter().map(|&(r, c)| (rp[r], cp[c])).collect();
            let w = ZeroPattern::from_cells(4, 4, &moved);
            prop_assert_eq!(canonical_key(&z, &[]), canonical_key(&w, &[]));
        }

        #[test]
        fn partial_cover_monotone(
            cells in proptest::collection::vec((0usize..4, 0usize..4), 0..8),
            small in (0u64..16, 0u64..16),
            extra in (0u64..16, 0u64..16),
            b in 0usize..4,
        ) {
            let z = ZeroPattern::from_cells(4, 4, &cells);
            let sigma = CoverSet { rows: small.0, cols: small.1 };
            let bigger = CoverSet { rows: small.0 | extra.0, cols: small.1 | extra.1 };
            let delta = bigger.size() - sigma.size();
            if is_partial_cover(&z, &bigger, b) {
                prop_assert!(is_partial_cover(&z, &sigma, b + delta));
            }
            if is_partial_cover(&z, &sigma, b) {
                prop_assert!(is_partial_cover(&z, &sigma, b + 1));
                prop_assert!(is_partial_cover(&z, &bigger, b));
            }
        }
    }
}
