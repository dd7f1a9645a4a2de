//! Named patterns, pattern files and case files.

use std::path::Path;

use assign_lab::conjecture::diag;
use assign_lab::engine::{CaseInput, CaseMatrix};
use assign_lab::golden;
use assign_lab::pattern::{self, Pos, ZeroPattern};

use crate::{usage, Failure};

/// One-based cells of the built-in patterns.
fn named(name: &str) -> Option<ZeroPattern> {
    let cells: &[(usize, usize)] = match name {
        "empty" => &[],
        "one-zero" => &[(1, 1)],
        "two-in-row" => &[(1, 1), (1, 2)],
        "two-in-col" => &[(1, 1), (2, 1)],
        "cross" => &[(1, 2), (1, 3), (2, 1), (3, 1)],
        "problem-case" => &[(1, 1), (1, 2), (1, 3), (2, 1), (3, 1)],
        _ => {
            let k: usize = name.strip_prefix("diag-")?.parse().ok()?;
            return (k <= 8).then(|| diag(k));
        }
    };
    let pos: Vec<Pos> = cells.iter().map(|&(r, c)| (r - 1, c - 1)).collect();
    Some(ZeroPattern::from_positions(&pos))
}

pub const NAMES: &str = "empty, one-zero, two-in-row, two-in-col, cross, problem-case, diag-N, case-N";

/// A case from a name, a JSON case file or a text pattern file. `k` may be
/// omitted only when the source carries one.
pub fn resolve_case(spec: &str, k: Option<usize>) -> Result<CaseMatrix, Failure> {
    let need_k = || k.ok_or_else(|| usage(format!("--k is required for pattern '{spec}'")));
    if let Some(num) = spec.strip_prefix("case-") {
        let n: usize = num.parse().map_err(|_| usage(format!("bad case name '{spec}'")))?;
        let cases = golden::appendix_cases();
        let c = cases
            .get(n.wrapping_sub(1))
            .ok_or_else(|| usage(format!("no tabulated case {n}")))?;
        let mut case = c.to_case();
        if let Some(k) = k {
            case.k = k;
        }
        return Ok(case);
    }
    if let Some(z) = named(spec) {
        return Ok(CaseMatrix::new(need_k()?, z));
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("'{spec}' is neither a known pattern ({NAMES}) nor a readable file: {e}")))?;
    if path.extension().is_some_and(|e| e == "json") {
        let input: CaseInput = serde_json::from_str(&text).map_err(|e| usage(format!("{spec}: {e}")))?;
        let mut case = input.to_case().map_err(usage)?;
        if let Some(k) = k {
            case.k = k;
        }
        return Ok(case);
    }
    let (z, specials) = pattern::parse_text(&text).map_err(|e| usage(format!("{spec}: {e}")))?;
    if !specials.is_empty() {
        return Err(usage(format!("{spec}: special entries need a JSON case file with stage rates")));
    }
    Ok(CaseMatrix::new(need_k()?, z))
}

/// A plain zero pattern: no special entries.
pub fn resolve_pattern(spec: &str) -> Result<ZeroPattern, Failure> {
    let case = resolve_case(spec, Some(0))?;
    if !case.specials.is_empty() {
        return Err(usage(format!("'{spec}' has special entries; a plain zero pattern is needed here")));
    }
    Ok(case.pattern)
}
