//! Text, CSV and JSON renderings. Risk ratios print to 4 decimals in text
//! and CSV; JSON carries full precision.

use std::fmt::Write;

use causalkit_core::estimate::EffectEstimate;
use causalkit_core::scenario::ResultTable;
use serde_json::json;

use crate::reproduce::ReproTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

fn adjustment(a: &[String]) -> String {
    if a.is_empty() {
        "-".into()
    } else {
        a.join(", ")
    }
}

fn interval(ci: Option<(f64, f64)>) -> String {
    match ci {
        Some((lo, hi)) => format!("({lo:.4}, {hi:.4})"),
        None => "-".into(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

/// Left-aligned columns separated by two spaces.
fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut l = String::new();
        for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
            if i + 1 == cells.len() {
                l.push_str(c);
            } else {
                write!(l, "{c:<w$}  ").unwrap();
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
    out
}

const RESULT_HEADER: [&str; 4] = ["MODEL", "ADJUSTMENT VARIABLE(S)", "RISK RATIO", "CONFIDENCE INTERVAL"];

pub fn estimate(e: &EffectEstimate, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(e).unwrap() + "\n",
        Format::Csv => {
            let mut s = csv_line(&[
                "method".into(),
                "treatment".into(),
                "outcome".into(),
                "adjustment".into(),
                "risk_ratio".into(),
                "ci_low".into(),
                "ci_high".into(),
                "ci_method".into(),
                "n".into(),
            ]);
            let (lo, hi) = e.ci.map_or((String::new(), String::new()), |(l, h)| (format!("{l:.4}"), format!("{h:.4}")));
            s += &csv_line(&[
                e.method.keyword().into(),
                e.treatment.clone(),
                e.outcome.clone(),
                e.adjustment.join(";"),
                format!("{:.4}", e.risk_ratio),
                lo,
                hi,
                e.ci_method.keyword().into(),
                e.n.to_string(),
            ]);
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "method      {}", e.method.label()).unwrap();
            writeln!(s, "effect      {} -> {}", e.treatment, e.outcome).unwrap();
            writeln!(s, "adjustment  {}", adjustment(&e.adjustment)).unwrap();
            writeln!(s, "risk ratio  {:.4}", e.risk_ratio).unwrap();
            writeln!(s, "interval    {} [{}]", interval(e.ci), e.ci_method.keyword()).unwrap();
            writeln!(s, "rows        {}", e.n).unwrap();
            let d = &e.diagnostics;
            if let Some((lo, hi)) = d.weight_range {
                writeln!(s, "weights     {lo:.4} .. {hi:.4}").unwrap();
            }
            if let (Some(b), Some(f)) = (d.bootstrap_replicates, d.bootstrap_failures) {
                writeln!(s, "bootstrap   {b} replicates, {f} failed").unwrap();
            }
            s
        }
    }
}

pub fn result_table(t: &ResultTable, format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<_> = t
                .rows
                .iter()
                .map(|r| match &r.result {
                    Ok(e) => json!({"index": r.index, "label": r.label, "estimate": e}),
                    Err(err) => json!({"index": r.index, "label": r.label, "adjustment": r.adjustment, "error": err.to_string()}),
                })
                .collect();
            serde_json::to_string_pretty(&json!({"title": t.title, "rows": rows})).unwrap() + "\n"
        }
        Format::Csv => {
            let mut s = csv_line(&[
                "model".into(),
                "adjustment".into(),
                "risk_ratio".into(),
                "ci_low".into(),
                "ci_high".into(),
                "error".into(),
            ]);
            for r in &t.rows {
                let fields = match &r.result {
                    Ok(e) => {
                        let (lo, hi) = e
                            .ci
                            .map_or((String::new(), String::new()), |(l, h)| (format!("{l:.4}"), format!("{h:.4}")));
                        vec![
                            r.label.clone(),
                            r.adjustment.join(";"),
                            format!("{:.4}", e.risk_ratio),
                            lo,
                            hi,
                            String::new(),
                        ]
                    }
                    Err(err) => vec![
                        r.label.clone(),
                        r.adjustment.join(";"),
                        String::new(),
                        String::new(),
                        String::new(),
                        err.to_string(),
                    ],
                };
                s += &csv_line(&fields);
            }
            s
        }
        Format::Text => {
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| match &r.result {
                    Ok(e) => {
                        vec![r.label.clone(), adjustment(&r.adjustment), format!("{:.4}", e.risk_ratio), interval(e.ci)]
                    }
                    Err(err) => vec![
                        r.label.clone(),
                        adjustment(&r.adjustment),
                        "error".into(),
                        format!("analysis {}: {err}", r.index),
                    ],
                })
                .collect();
            let mut s = String::new();
            if !t.title.is_empty() {
                writeln!(s, "{}", t.title).unwrap();
            }
            s + &aligned(&RESULT_HEADER, &rows)
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn repro_tables(tables: &[ReproTable], format: Format) -> String {
    match format {
        Format::Json => {
            let passed = tables.iter().all(ReproTable::passed);
            serde_json::to_string_pretty(&json!({"passed": passed, "tables": tables})).unwrap() + "\n"
        }
        Format::Csv => {
            let mut s = csv_line(
                &["table", "model", "adjustment", "risk_ratio", "ci_low", "ci_high", "paper_rr", "oracle", "result"]
                    .map(String::from),
            );
            for t in tables {
                for r in &t.rows {
                    let (rr, lo, hi) = match &r.estimate {
                        Some(e) => {
                            let (l, h) = e.ci.map_or((String::new(), String::new()), |(l, h)| {
                                (format!("{l:.4}"), format!("{h:.4}"))
                            });
                            (format!("{:.4}", e.risk_ratio), l, h)
                        }
                        None => Default::default(),
                    };
                    s += &csv_line(&[
                        t.target.name().into(),
                        r.label.clone(),
                        r.adjustment.join(";"),
                        rr,
                        lo,
                        hi,
                        format!("{:.4}", r.paper_rr),
                        r.oracle.map_or(String::new(), |o| format!("{o:.4}")),
                        pass(r.passed()).into(),
                    ]);
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for t in tables {
                s += &repro_text(t);
                s.push('\n');
            }
            let checks: Vec<bool> = tables.iter().flat_map(|t| t.all_checks().map(|c| c.pass)).collect();
            let ok = tables.iter().all(ReproTable::passed);
            writeln!(
                s,
                "overall: {} ({} of {} checks passed)",
                pass(ok),
                checks.iter().filter(|c| **c).count(),
                checks.len()
            )
            .unwrap();
            s
        }
    }
}

fn repro_text(t: &ReproTable) -> String {
    let mut s = String::new();
    writeln!(s, "{}: {}", t.target, t.title).unwrap();
    if t.rows_analysed == t.sample_size {
        writeln!(s, "n = {}, seed = {}", t.sample_size, t.seed).unwrap();
    } else {
        writeln!(s, "n = {} simulated, {} selected, seed = {}", t.sample_size, t.rows_analysed, t.seed).unwrap();
    }
    let appendix = t.rows.iter().any(|r| r.path.is_some());
    let mut header = vec!["MODEL"];
    if !appendix {
        header.push("ADJUSTMENT VARIABLE(S)");
    }
    header.extend(["RISK RATIO", "CONFIDENCE INTERVAL", "PAPER", "PAPER INTERVAL", "ORACLE"]);
    if appendix {
        header.push("PATH");
    }
    header.push("RESULT");
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![r.label.clone()];
            if !appendix {
                v.push(adjustment(&r.adjustment));
            }
            match &r.estimate {
                Some(e) => {
                    v.push(format!("{:.4}", e.risk_ratio));
                    v.push(interval(e.ci));
                }
                None => {
                    v.push("error".into());
                    v.push("-".into());
                }
            }
            v.push(format!("{:.4}", r.paper_rr));
            v.push(interval(Some(r.paper_ci)));
            v.push(r.oracle.map_or("-".into(), |o| format!("{o:.4}")));
            if let Some(p) = r.path {
                v.push(p.into());
            }
            v.push(pass(r.passed()).into());
            v
        })
        .collect();
    s += &aligned(&header, &rows);
    for r in &t.rows {
        if let Some(e) = &r.error {
            writeln!(s, "  FAIL  {}: {e}", r.label).unwrap();
        }
    }
    for c in t.all_checks() {
        writeln!(s, "  {}  {}", pass(c.pass), c.what).unwrap();
    }
    for n in &t.notes {
        writeln!(s, "  note: {n}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alignment_and_quoting() {
        let t = aligned(&["A", "BB"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "A    BB\nxyz  1\n");
        assert_eq!(csv_line(&["a,b".into(), "c".into()]), "\"a,b\",c\n");
    }
}
