//! CSV and JSON emitters and parsers.
//!
//! Numbers use the shortest decimal that round-trips. Infinite thresholds
//! are written as `inf` in CSV and `null` in JSON.

use qnl_core::Regime;
use serde::{Deserialize, Serialize};

use crate::budget::{BudgetRow, BudgetTable, Metadata, Swept, Transition};
use crate::figure::{FigureRow, FigureTable};

pub const BUDGET_COLUMNS: [&str; 12] = [
    "omega",
    "sql",
    "dql",
    "s_thr",
    "s_sum_opt",
    "regime",
    "s_fdt",
    "s_total",
    "sigma_opt",
    "s_xx_opt",
    "re_s_xf_opt",
    "im_s_xf_opt",
];

pub const FIGURE_COLUMNS: [&str; 6] = ["s_ff", "full", "sigma_zero", "spin_matched", "dql", "s_thr"];

const INF_NOTE: &str = "# s_thr=inf marks a lossless probe (no threshold)";

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn perr(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn parse_num(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

fn budget_header(swept: Swept) -> Vec<&'static str> {
    let mut cols = BUDGET_COLUMNS.to_vec();
    if swept == Swept::SFf {
        cols.push("s_ff");
    }
    cols
}

pub fn budget_to_csv(t: &BudgetTable) -> String {
    let mut out = format!(
        "# qnl-budget version={} config_sha256={} swept={}\n{INF_NOTE}\n",
        t.meta.tool_version,
        t.meta.config_hash,
        t.meta.swept.as_str()
    );
    for tr in &t.meta.transitions {
        out += &format!(
            "# transition index={} at={} from={} to={}\n",
            tr.index,
            fmt_num(tr.at),
            tr.from.as_str(),
            tr.to.as_str()
        );
    }
    out += &budget_header(t.meta.swept).join(",");
    out.push('\n');
    for r in &t.rows {
        out += &budget_row_cells(r).join(",");
        out.push('\n');
    }
    out
}

pub fn budget_row_cells(r: &BudgetRow) -> Vec<String> {
    let mut cells: Vec<String> = [r.omega, r.sql, r.dql, r.s_thr, r.s_sum_opt].iter().map(|&x| fmt_num(x)).collect();
    cells.push(r.regime.as_str().to_string());
    cells.extend(
        [r.s_fdt, r.s_total, r.sigma_opt, r.s_xx_opt, r.re_s_xf_opt, r.im_s_xf_opt].iter().map(|&x| fmt_num(x)),
    );
    if let Some(s) = r.s_ff {
        cells.push(fmt_num(s));
    }
    cells
}

fn key_values(line: &str) -> impl Iterator<Item = (&str, &str)> {
    line.split_whitespace().filter_map(|tok| tok.split_once('='))
}

pub fn budget_from_csv(text: &str) -> Result<BudgetTable, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (n, first) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let first = first.strip_prefix("# qnl-budget ").ok_or_else(|| perr(n, "missing qnl-budget header"))?;
    let (mut version, mut hash, mut swept) = (None, None, None);
    for (k, v) in key_values(first) {
        match k {
            "version" => version = Some(v.to_string()),
            "config_sha256" => hash = Some(v.to_string()),
            "swept" => swept = Swept::parse(v),
            _ => {}
        }
    }
    let swept = swept.ok_or_else(|| perr(n, "missing or unknown swept variable"))?;
    let mut meta = Metadata {
        tool_version: version.ok_or_else(|| perr(n, "missing version"))?,
        config_hash: hash.ok_or_else(|| perr(n, "missing config hash"))?,
        swept,
        transitions: Vec::new(),
    };

    let header = budget_header(swept).join(",");
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("# transition ") {
            meta.transitions.push(parse_transition(n, rest)?);
        } else if line.starts_with('#') {
            continue;
        } else if !seen_header {
            if line != header {
                return Err(perr(n, format!("expected header `{header}`")));
            }
            seen_header = true;
        } else {
            rows.push(parse_budget_row(n, line, swept)?);
        }
    }
    if !seen_header {
        return Err(perr(text.lines().count(), "missing column header"));
    }
    Ok(BudgetTable { meta, rows })
}

fn parse_regime(n: usize, s: &str) -> Result<Regime, ParseError> {
    Regime::parse(s).ok_or_else(|| perr(n, format!("unknown regime `{s}`")))
}

fn parse_transition(n: usize, rest: &str) -> Result<Transition, ParseError> {
    let (mut index, mut at, mut from, mut to) = (None, None, None, None);
    for (k, v) in key_values(rest) {
        match k {
            "index" => index = v.parse().ok(),
            "at" => at = parse_num(v),
            "from" => from = Some(parse_regime(n, v)?),
            "to" => to = Some(parse_regime(n, v)?),
            _ => {}
        }
    }
    match (index, at, from, to) {
        (Some(index), Some(at), Some(from), Some(to)) => Ok(Transition { index, at, from, to }),
        _ => Err(perr(n, "incomplete transition record")),
    }
}

fn parse_budget_row(n: usize, line: &str, swept: Swept) -> Result<BudgetRow, ParseError> {
    let cells: Vec<&str> = line.split(',').collect();
    let want = budget_header(swept).len();
    if cells.len() != want {
        return Err(perr(n, format!("expected {want} columns, found {}", cells.len())));
    }
    let num = |i: usize| parse_num(cells[i]).ok_or_else(|| perr(n, format!("bad number `{}` in column {}", cells[i], i + 1)));
    Ok(BudgetRow {
        omega: num(0)?,
        sql: num(1)?,
        dql: num(2)?,
        s_thr: num(3)?,
        s_sum_opt: num(4)?,
        regime: parse_regime(n, cells[5])?,
        s_fdt: num(6)?,
        s_total: num(7)?,
        sigma_opt: num(8)?,
        s_xx_opt: num(9)?,
        re_s_xf_opt: num(10)?,
        im_s_xf_opt: num(11)?,
        s_ff: if swept == Swept::SFf { Some(num(12)?) } else { None },
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonBudget {
    version: String,
    config_sha256: String,
    swept: String,
    transitions: Vec<JsonTransition>,
    rows: Vec<JsonRow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonTransition {
    index: usize,
    at: f64,
    from: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    omega: f64,
    sql: f64,
    dql: f64,
    s_thr: Option<f64>,
    s_sum_opt: f64,
    regime: String,
    s_fdt: f64,
    s_total: f64,
    sigma_opt: f64,
    s_xx_opt: f64,
    re_s_xf_opt: f64,
    im_s_xf_opt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_ff: Option<f64>,
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn budget_to_json(t: &BudgetTable) -> String {
    let doc = JsonBudget {
        version: t.meta.tool_version.clone(),
        config_sha256: t.meta.config_hash.clone(),
        swept: t.meta.swept.as_str().to_string(),
        transitions: t
            .meta
            .transitions
            .iter()
            .map(|tr| JsonTransition {
                index: tr.index,
                at: tr.at,
                from: tr.from.as_str().to_string(),
                to: tr.to.as_str().to_string(),
            })
            .collect(),
        rows: t
            .rows
            .iter()
            .map(|r| JsonRow {
                omega: r.omega,
                sql: r.sql,
                dql: r.dql,
                s_thr: finite_or_null(r.s_thr),
                s_sum_opt: r.s_sum_opt,
                regime: r.regime.as_str().to_string(),
                s_fdt: r.s_fdt,
                s_total: r.s_total,
                sigma_opt: r.sigma_opt,
                s_xx_opt: r.s_xx_opt,
                re_s_xf_opt: r.re_s_xf_opt,
                im_s_xf_opt: r.im_s_xf_opt,
                s_ff: r.s_ff,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("budget serializes");
    s.push('\n');
    s
}

pub fn budget_from_json(text: &str) -> Result<BudgetTable, ParseError> {
    let doc: JsonBudget = serde_json::from_str(text).map_err(|e| perr(e.line(), e.to_string()))?;
    let swept = Swept::parse(&doc.swept).ok_or_else(|| perr(0, format!("unknown swept variable `{}`", doc.swept)))?;
    let transitions = doc
        .transitions
        .iter()
        .map(|t| {
            Ok(Transition { index: t.index, at: t.at, from: parse_regime(0, &t.from)?, to: parse_regime(0, &t.to)? })
        })
        .collect::<Result<_, ParseError>>()?;
    let rows = doc
        .rows
        .into_iter()
        .map(|r| {
            Ok(BudgetRow {
                omega: r.omega,
                sql: r.sql,
                dql: r.dql,
                s_thr: r.s_thr.unwrap_or(f64::INFINITY),
                s_sum_opt: r.s_sum_opt,
                regime: parse_regime(0, &r.regime)?,
                s_fdt: r.s_fdt,
                s_total: r.s_total,
                sigma_opt: r.sigma_opt,
                s_xx_opt: r.s_xx_opt,
                re_s_xf_opt: r.re_s_xf_opt,
                im_s_xf_opt: r.im_s_xf_opt,
                s_ff: r.s_ff,
            })
        })
        .collect::<Result<_, ParseError>>()?;
    Ok(BudgetTable {
        meta: Metadata { tool_version: doc.version, config_hash: doc.config_sha256, swept, transitions },
        rows,
    })
}

pub fn figure_to_csv(f: &FigureTable) -> String {
    let mut out = format!(
        "# qnl-spin-figure version={} config_sha256={} omega={} s_thr0={} dql={}\n",
        f.tool_version,
        f.config_hash,
        fmt_num(f.omega),
        fmt_num(f.s_thr0),
        fmt_num(f.dql)
    );
    out += &FIGURE_COLUMNS.join(",");
    out.push('\n');
    for r in &f.rows {
        let cells: Vec<String> =
            [r.s_ff, r.full, r.sigma_zero, r.spin_matched, r.dql, r.s_thr].iter().map(|&x| fmt_num(x)).collect();
        out += &cells.join(",");
        out.push('\n');
    }
    out
}

pub fn figure_to_json(f: &FigureTable) -> String {
    let mut s = serde_json::to_string_pretty(f).expect("figure serializes");
    s.push('\n');
    s
}

pub fn figure_from_csv(text: &str) -> Result<Vec<FigureRow>, ParseError> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != FIGURE_COLUMNS.join(",") {
                return Err(perr(n, "unexpected column header"));
            }
            seen_header = true;
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|c| parse_num(c).ok_or_else(|| perr(n, format!("bad number `{c}`"))))
            .collect::<Result<_, _>>()?;
        if v.len() != FIGURE_COLUMNS.len() {
            return Err(perr(n, "wrong column count"));
        }
        rows.push(FigureRow { s_ff: v[0], full: v[1], sigma_zero: v[2], spin_matched: v[3], dql: v[4], s_thr: v[5] });
    }
    Ok(rows)
}
