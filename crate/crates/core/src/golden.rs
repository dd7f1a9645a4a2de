//! The reference table of expected costs for k <= 5, stored as text.
//!
//! Each record lists the window pattern, the stage rates of its special
//! entries, the coefficient triangle, any residual term outside the
//! triangle's span, and the cover and earlier cases the derivation used.

use std::fmt::Write as _;

use crate::engine::CaseMatrix;
use crate::exact::{self, BTriangle, Rat, RatFunc};
use crate::pattern::{self, CoverSet, Pos, ZeroPattern};

pub const APPENDIX: &str = include_str!("../golden/appendix.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenSpecial {
    pub pos: Pos,
    pub label: char,
    pub stages: Vec<RatFunc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenCase {
    pub number: usize,
    pub k: usize,
    pub pattern: ZeroPattern,
    pub specials: Vec<GoldenSpecial>,
    pub triangle: Vec<Vec<i64>>,
    pub residual: Option<RatFunc>,
    pub cover: Option<CoverSet>,
    pub uses: Vec<usize>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct GoldenError {
    pub line: usize,
    pub msg: String,
}

impl GoldenCase {
    pub fn to_case(&self) -> CaseMatrix {
        let mut c = CaseMatrix::new(self.k, self.pattern.clone());
        for s in &self.specials {
            c = c.with_special(s.pos, s.stages.clone());
        }
        c
    }

    pub fn btriangle(&self) -> BTriangle {
        let mut t = BTriangle::zeros(self.k);
        for (i, row) in self.triangle.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if i + j < self.k && b != 0 {
                    t.coeffs.insert((i, j), Rat::from_integer(b.into()));
                }
            }
        }
        if let Some(r) = &self.residual {
            t.residual = r.clone();
        }
        t
    }

    /// The tabulated value: the triangle's basis sum plus the residual.
    pub fn value(&self) -> RatFunc {
        self.btriangle().reconstruct()
    }
}

/// All records of the embedded table, in file order.
pub fn appendix_cases() -> Vec<GoldenCase> {
    parse_golden(APPENDIX).expect("embedded table parses")
}

pub fn parse_golden(text: &str) -> Result<Vec<GoldenCase>, GoldenError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |line: usize, msg: &str| GoldenError {
        line,
        msg: msg.to_string(),
    };
    while i < lines.len() {
        let (ln, head) = lines[i];
        let number: usize = head
            .strip_prefix("case ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(ln, "expected `case N`"))?;
        i += 1;
        let mut next = |what: &str| -> Result<(usize, &str), GoldenError> {
            let l = lines.get(i).copied().ok_or_else(|| err(ln, &format!("missing {what}")))?;
            i += 1;
            Ok(l)
        };
        let (kl, kline) = next("k")?;
        let k: usize = kline
            .strip_prefix("k ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(kl, "expected `k K`"))?;
        let (wl, wline) = next("window")?;
        let dims: Vec<usize> = wline
            .strip_prefix("window ")
            .map(|s| s.split_whitespace().filter_map(|x| x.parse().ok()).collect())
            .unwrap_or_default();
        if dims.len() != 2 {
            return Err(err(wl, "expected `window R C`"));
        }
        let mut rows = Vec::new();
        for _ in 0..dims[0] {
            let (rl, row) = next("pattern row")?;
            if row.chars().count() != dims[1] {
                return Err(err(rl, "pattern row has the wrong width"));
            }
            rows.push(row.to_string());
        }
        let (z, letters) = pattern::parse_text(&format!("{} {}\n{}", dims[0], dims[1], rows.join("\n")))
            .map_err(|e| err(wl, &e.to_string()))?;
        let mut specials = Vec::new();
        let mut case = GoldenCase {
            number,
            k,
            pattern: z,
            specials: Vec::new(),
            triangle: Vec::new(),
            residual: None,
            cover: None,
            uses: Vec::new(),
        };
        loop {
            let (l, line) = next("`end`")?;
            if line == "end" {
                break;
            } else if let Some(rest) = line.strip_prefix("special ") {
                let mut parts = rest.splitn(2, ' ');
                let label = parts.next().and_then(|s| s.chars().next()).ok_or_else(|| err(l, "missing label"))?;
                let pos = letters
                    .iter()
                    .find(|(_, c)| *c == label)
                    .map(|(p, _)| *p)
                    .ok_or_else(|| err(l, "label not in pattern"))?;
                let stages = parts
                    .next()
                    .unwrap_or("")
                    .split(';')
                    .map(|s| exact::parse(s.trim()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| err(l, &e.to_string()))?;
                specials.push(GoldenSpecial { pos, label, stages });
            } else if line == "triangle" {
                for _ in 0..k {
                    let (tl, row) = next("triangle row")?;
                    let vals = row
                        .split_whitespace()
                        .map(|x| x.parse::<i64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| err(tl, "bad triangle entry"))?;
                    if vals.len() != k {
                        return Err(err(tl, "triangle row has the wrong width"));
                    }
                    case.triangle.push(vals);
                }
            } else if let Some(rest) = line.strip_prefix("residual ") {
                case.residual = Some(exact::parse(rest).map_err(|e| err(l, &e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("cover") {
                let (mut rs, mut cs) = (Vec::new(), Vec::new());
                let mut target = &mut rs;
                for tok in rest.split_whitespace() {
                    match tok {
                        "rows" => target = &mut rs,
                        "cols" => target = &mut cs,
                        _ => {
                            let v: usize = tok.parse().map_err(|_| err(l, "bad cover line"))?;
                            target.push(v.checked_sub(1).ok_or_else(|| err(l, "cover lines are one-based"))?);
                        }
                    }
                }
                case.cover = Some(CoverSet::from_lines(&rs, &cs));
            } else if let Some(rest) = line.strip_prefix("uses") {
                case.uses = rest
                    .split_whitespace()
                    .map(|x| x.parse())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err(l, "bad uses line"))?;
            } else {
                return Err(err(l, "unrecognized line"));
            }
        }
        if letters.len() != specials.len() {
            return Err(err(ln, "every special label needs stage rates"));
        }
        case.specials = specials;
        out.push(case);
    }
    Ok(out)
}

pub fn render_golden(cases: &[GoldenCase]) -> String {
    let mut s = String::new();
    for c in cases {
        let _ = writeln!(s, "case {}\nk {}", c.number, c.k);
        let letters: Vec<(Pos, char)> = c.specials.iter().map(|x| (x.pos, x.label)).collect();
        let text = pattern::render_text(&c.pattern, &letters);
        let _ = writeln!(s, "window {} {}", c.pattern.rows(), c.pattern.cols());
        for row in text.lines().skip(1) {
            let _ = writeln!(s, "{}", row.replace(' ', ""));
        }
        for sp in &c.specials {
            let st: Vec<String> = sp.stages.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "special {} {}", sp.label, st.join(" ; "));
        }
        s.push_str("triangle\n");
        for row in &c.triangle {
            let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", r.join(" "));
        }
        if let Some(r) = &c.residual {
            let _ = writeln!(s, "residual {r}");
        }
        if let Some(cv) = &c.cover {
            let rows: Vec<String> = cv.row_list().iter().map(|r| (r + 1).to_string()).collect();
            let cols: Vec<String> = cv.col_list().iter().map(|r| (r + 1).to_string()).collect();
            s.push_str("cover");
            if !rows.is_empty() {
                let _ = write!(s, " rows {}", rows.join(" "));
            }
            if !cols.is_empty() {
                let _ = write!(s, " cols {}", cols.join(" "));
            }
            s.push('\n');
        }
        if !c.uses.is_empty() {
            let u: Vec<String> = c.uses.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "uses {}", u.join(" "));
        }
        s.push_str("end\n\n");
    }
    s
}
