//! Text formats.
//!
//! * preferences: one per line, item ids separated by `>`, best first;
//!   blank lines and lines starting with `#` are skipped.
//! * ground truth: one item id per line, best first.
//! * scores: CSV with header `item,score,rank`, sorted by rank.
//! * DIC curve: CSV with header `alpha,f,g,dic`; `α = ∞` is written `inf`.
//!
//! Writers emit LF line endings; readers also accept CR-LF. Numbers are
//! written with 12 significant digits and always use `.` as the decimal
//! separator.

use std::fmt;

use thiserror::Error;

use crate::gibbs::DicPoint;
use crate::ranking::{
    scores_to_ranking, ItemIds, ItemScores, Preference, PreferenceDataset, Ranking,
};

pub const SCORES_HEADER: &str = "item,score,rank";
pub const DIC_HEADER: &str = "alpha,f,g,dic";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )?;
        if !self.token.is_empty() {
            write!(f, " (at {:?})", self.token)?;
        }
        Ok(())
    }
}

impl ParseError {
    fn new(
        line: usize,
        column: usize,
        message: impl Into<String>,
        token: impl Into<String>,
    ) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
            token: token.into(),
        }
    }
}

/// Splits text into `(line_number, line)` with any trailing `\r` removed.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Character column (1-based) of the byte offset `offset` in `line`.
fn column_of(line: &str, offset: usize) -> usize {
    line[..offset].chars().count() + 1
}

/// Trimmed pieces of `line` split on `sep`, each with its start offset.
fn fields(line: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for piece in line.split(sep) {
        let lead = piece.len() - piece.trim_start().len();
        out.push((start + lead, piece.trim()));
        start += piece.len() + sep.len_utf8();
    }
    out
}

pub fn parse_preferences(text: &str) -> Result<PreferenceDataset, ParseError> {
    let mut items = ItemIds::default();
    let mut prefs = Vec::new();
    let mut last_line = 0;
    for (lineno, line) in lines(text) {
        last_line = lineno;
        if is_skippable(line) {
            continue;
        }
        let mut order = Vec::new();
        for (offset, id) in fields(line, '>') {
            let col = column_of(line, offset);
            if id.is_empty() {
                return Err(ParseError::new(lineno, col, "empty item id", ""));
            }
            if id.contains(',') {
                return Err(ParseError::new(
                    lineno,
                    col,
                    "item id may not contain ','",
                    id,
                ));
            }
            let idx = items.intern(id);
            if order.contains(&idx) {
                return Err(ParseError::new(
                    lineno,
                    col,
                    "duplicate item in preference",
                    id,
                ));
            }
            order.push(idx);
        }
        if order.len() < 2 {
            return Err(ParseError::new(
                lineno,
                1,
                "a preference needs at least 2 items",
                line.trim(),
            ));
        }
        prefs.push(Preference::new(order).expect("validated above"));
    }
    if prefs.is_empty() {
        return Err(ParseError::new(
            last_line.max(1),
            1,
            "no preferences found",
            "",
        ));
    }
    Ok(PreferenceDataset::new(items, prefs).expect("indices come from interning"))
}

pub fn write_preferences(ds: &PreferenceDataset) -> String {
    let mut out = String::new();
    for pref in ds.preferences() {
        let ids: Vec<&str> = pref.items().iter().map(|&i| ds.items().id(i)).collect();
        out.push_str(&ids.join(">"));
        out.push('\n');
    }
    out
}

/// Reads a best-first list of ids that must cover exactly `items`.
pub fn parse_truth(text: &str, items: &ItemIds) -> Result<Ranking, ParseError> {
    let mut order = Vec::with_capacity(items.len());
    let mut seen = vec![false; items.len()];
    let mut last_line = 0;
    for (lineno, line) in lines(text) {
        last_line = lineno;
        if is_skippable(line) {
            continue;
        }
        let id = line.trim();
        let col = column_of(line, line.len() - line.trim_start().len());
        let idx = items
            .index_of(id)
            .ok_or_else(|| ParseError::new(lineno, col, "unknown item", id))?;
        if seen[idx] {
            return Err(ParseError::new(lineno, col, "duplicate item", id));
        }
        seen[idx] = true;
        order.push(idx);
    }
    let missing: Vec<&str> = seen
        .iter()
        .enumerate()
        .filter(|(_, s)| !**s)
        .map(|(i, _)| items.id(i))
        .collect();
    if !missing.is_empty() {
        return Err(ParseError::new(
            last_line.max(1),
            1,
            format!("missing items: {}", missing.join(", ")),
            "",
        ));
    }
    Ok(Ranking::new(order).expect("validated above"))
}

pub fn write_truth(ranking: &Ranking, items: &ItemIds) -> String {
    let mut out = String::new();
    for &i in ranking.as_slice() {
        out.push_str(items.id(i));
        out.push('\n');
    }
    out
}

/// `x` with 12 significant digits, in plain notation where that is short.
pub fn format_number(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn parse_number(token: &str, lineno: usize, col: usize, what: &str) -> Result<f64, ParseError> {
    match token {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => {
            let valid = !token.is_empty()
                && token
                    .chars()
                    .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
            token
                .parse::<f64>()
                .ok()
                .filter(|_| valid)
                .ok_or_else(|| ParseError::new(lineno, col, format!("invalid {what}"), token))
        }
    }
}

/// Parsed contents of a scores file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    /// Items in file order.
    pub items: ItemIds,
    pub scores: ItemScores,
    /// Order given by the `rank` column.
    pub ranking: Ranking,
}

pub fn write_scores(theta: &ItemScores, items: &ItemIds) -> String {
    let ranking = scores_to_ranking(theta);
    let mut out = String::from(SCORES_HEADER);
    out.push('\n');
    for (rank, &i) in ranking.as_slice().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            items.id(i),
            format_number(theta[i]),
            rank + 1
        ));
    }
    out
}

fn expect_header<'a>(
    text: &'a str,
    header: &str,
) -> Result<impl Iterator<Item = (usize, &'a str)>, ParseError> {
    let mut it = lines(text).filter(|(_, l)| !l.trim().is_empty());
    match it.next() {
        Some((_, l)) if l.trim() == header => Ok(it),
        Some((n, l)) => Err(ParseError::new(
            n,
            1,
            format!("expected header {header:?}"),
            l,
        )),
        None => Err(ParseError::new(1, 1, "empty file", "")),
    }
}

fn split_row(line: &str, lineno: usize, width: usize) -> Result<Vec<(usize, &str)>, ParseError> {
    let cols = fields(line, ',');
    if cols.len() != width {
        return Err(ParseError::new(
            lineno,
            1,
            format!("expected {width} fields, found {}", cols.len()),
            line,
        ));
    }
    Ok(cols
        .into_iter()
        .map(|(off, tok)| (column_of(line, off), tok))
        .collect())
}

pub fn parse_scores(text: &str) -> Result<ScoreTable, ParseError> {
    let rows = expect_header(text, SCORES_HEADER)?;
    let mut ids = ItemIds::default();
    let mut scores = Vec::new();
    let mut ranks: Vec<Option<usize>> = Vec::new();
    let mut rank_lines = Vec::new();
    for (lineno, line) in rows {
        let cols = split_row(line, lineno, 3)?;
        let (id_col, id) = cols[0];
        if id.is_empty() {
            return Err(ParseError::new(lineno, id_col, "empty item id", ""));
        }
        if ids.index_of(id).is_some() {
            return Err(ParseError::new(lineno, id_col, "duplicate item", id));
        }
        ids.intern(id);
        let (score_col, score) = cols[1];
        let value = parse_number(score, lineno, score_col, "score")?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(ParseError::new(
                lineno,
                score_col,
                "score must be finite and >= 0",
                score,
            ));
        }
        scores.push(value);
        let (rank_col, rank) = cols[2];
        let r: usize = rank
            .parse()
            .ok()
            .filter(|&r| r >= 1)
            .ok_or_else(|| ParseError::new(lineno, rank_col, "invalid rank", rank))?;
        ranks.push(Some(r));
        rank_lines.push((lineno, rank_col, rank.to_owned()));
    }
    let m = scores.len();
    if m == 0 {
        return Err(ParseError::new(1, 1, "no score rows", ""));
    }
    let mut order = vec![None; m];
    for (i, r) in ranks.into_iter().enumerate() {
        let r = r.expect("set above");
        let (lineno, col, tok) = &rank_lines[i];
        if r > m {
            return Err(ParseError::new(
                *lineno,
                *col,
                format!("rank exceeds item count {m}"),
                tok.clone(),
            ));
        }
        if order[r - 1].replace(i).is_some() {
            return Err(ParseError::new(
                *lineno,
                *col,
                "duplicate rank",
                tok.clone(),
            ));
        }
    }
    let ranking = Ranking::new(
        order
            .into_iter()
            .map(|o| o.expect("ranks form a permutation"))
            .collect(),
    )
    .expect("ranks form a permutation");
    let scores = ItemScores::new(scores).map_err(|e| ParseError::new(1, 1, e.to_string(), ""))?;
    Ok(ScoreTable {
        items: ids,
        scores,
        ranking,
    })
}

pub fn write_dic_curve(points: &[DicPoint]) -> String {
    let mut out = String::from(DIC_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_number(p.alpha),
            format_number(p.f),
            format_number(p.g),
            format_number(p.dic)
        ));
    }
    out
}

pub fn parse_dic_curve(text: &str) -> Result<Vec<DicPoint>, ParseError> {
    let rows = expect_header(text, DIC_HEADER)?;
    let mut points = Vec::new();
    for (lineno, line) in rows {
        let cols = split_row(line, lineno, 4)?;
        let mut vals = [0.0; 4];
        for (v, (name, &(col, tok))) in vals
            .iter_mut()
            .zip(["alpha", "f", "g", "dic"].iter().zip(cols.iter()))
        {
            *v = parse_number(tok, lineno, col, name)?;
        }
        points.push(DicPoint {
            alpha: vals[0],
            f: vals[1],
            g: vals[2],
            dic: vals[3],
        });
    }
    Ok(points)
}
