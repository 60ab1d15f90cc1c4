//! Check records and their text and line-delimited renderings.

use crate::cohomlab::CharacterSeries;
use serde::Serialize;
use std::fmt::Write;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

/// One check outcome. `anchor` names the identity being checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check: String,
    pub anchor: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// A computed q,z character next to an optional prediction.
#[derive(Clone, PartialEq)]
pub struct CharacterTable {
    pub name: String,
    pub computed: CharacterSeries,
    pub predicted: Option<CharacterSeries>,
}

#[derive(Clone, Default, PartialEq)]
pub struct Report {
    pub seed: u64,
    records: Vec<CheckRecord>,
    notes: Vec<(String, String)>,
    tables: Vec<CharacterTable>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown report format `{0}` (expected `text` or `records`)")]
pub struct UnknownFormat(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Records,
}

impl std::str::FromStr for Format {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "records" => Ok(Format::Records),
            _ => Err(UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line<'a> {
    Check(&'a CheckRecord),
    Note {
        key: &'a str,
        value: &'a str,
    },
    Character {
        name: &'a str,
        order: u32,
        computed: Vec<(u32, i32, i64)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        predicted: Option<Vec<(u32, i32, i64)>>,
    },
    Summary {
        seed: u64,
        passed: usize,
        failed: usize,
        skipped: usize,
    },
}

fn series_terms(s: &CharacterSeries) -> Vec<(u32, i32, i64)> {
    s.terms().map(|((q, z), c)| (q, z, c)).collect()
}

impl Report {
    pub fn new(seed: u64) -> Self {
        Report {
            seed,
            ..Default::default()
        }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn check(&mut self, suite: &str, check: &str, anchor: &str, ok: bool, witness: Option<String>) {
        self.push(CheckRecord {
            suite: suite.into(),
            check: check.into(),
            anchor: anchor.into(),
            status: Status::from_bool(ok),
            witness: if ok { None } else { witness },
        });
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn table(&mut self, t: CharacterTable) {
        self.tables.push(t);
    }

    pub fn merge(&mut self, o: Report) {
        self.records.extend(o.records);
        self.notes.extend(o.notes);
        self.tables.extend(o.tables);
    }

    /// Records in emission order: sorted by suite, then check name.
    pub fn records(&self) -> Vec<&CheckRecord> {
        let mut v: Vec<&CheckRecord> = self.records.iter().collect();
        v.sort_by(|a, b| (&a.suite, &a.check).cmp(&(&b.suite, &b.check)));
        v
    }

    pub fn notes(&self) -> &[(String, String)] {
        &self.notes
    }

    pub fn tables(&self) -> &[CharacterTable] {
        &self.tables
    }

    pub fn count(&self, s: Status) -> usize {
        self.records.iter().filter(|r| r.status == s).count()
    }

    pub fn all_pass(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    pub fn summary_line(&self) -> String {
        let mut s = format!("{} passed, {} failed", self.count(Status::Pass), self.count(Status::Fail));
        let k = self.count(Status::Skip);
        if k > 0 {
            write!(s, ", {k} skipped").unwrap();
        }
        s
    }

    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Text => self.render_text(),
            Format::Records => self.render_records(),
        }
    }

    fn sorted_notes(&self) -> Vec<&(String, String)> {
        let mut v: Vec<_> = self.notes.iter().collect();
        v.sort();
        v
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "seed {}", self.seed).unwrap();
        let recs = self.records();
        let width = recs
            .iter()
            .map(|r| r.suite.len() + r.check.len() + 1)
            .max()
            .unwrap_or(0);
        for r in recs {
            let name = format!("{}/{}", r.suite, r.check);
            writeln!(out, "{}  {:width$}  {}", r.status.label(), name, r.anchor).unwrap();
            if let Some(w) = &r.witness {
                writeln!(out, "      witness: {w}").unwrap();
            }
        }
        for (k, v) in self.sorted_notes() {
            writeln!(out, "note  {k} = {v}").unwrap();
        }
        for t in &self.tables {
            out.push_str(&render_grid(&format!("{} (computed)", t.name), &t.computed));
            if let Some(p) = &t.predicted {
                out.push_str(&render_grid(&format!("{} (predicted)", t.name), p));
            }
        }
        writeln!(out, "{}", self.summary_line()).unwrap();
        out
    }

    pub fn render_records(&self) -> String {
        let mut lines: Vec<Line> = self.records().into_iter().map(Line::Check).collect();
        for (k, v) in self.sorted_notes() {
            lines.push(Line::Note { key: k, value: v });
        }
        for t in &self.tables {
            lines.push(Line::Character {
                name: &t.name,
                order: t.computed.order,
                computed: series_terms(&t.computed),
                predicted: t.predicted.as_ref().map(series_terms),
            });
        }
        lines.push(Line::Summary {
            seed: self.seed,
            passed: self.count(Status::Pass),
            failed: self.count(Status::Fail),
            skipped: self.count(Status::Skip),
        });
        let mut out = String::new();
        for l in lines {
            out.push_str(&serde_json::to_string(&l).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

/// An aligned grid: one row per power of z (highest first), one column per
/// power of q.
pub fn render_grid(title: &str, s: &CharacterSeries) -> String {
    let order = s.order;
    let zs: Vec<i32> = {
        let mut v: Vec<i32> = s.terms().map(|((_, z), _)| z).collect();
        v.sort_unstable();
        v.dedup();
        v.reverse();
        v
    };
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend((0..=order).map(|q| format!("q^{q}")));
    cells.push(header);
    for &z in &zs {
        let mut row = vec![format!("z^{z}")];
        row.extend((0..=order).map(|q| s.coeff(q, z).to_string()));
        cells.push(row);
    }
    let ncol = order as usize + 2;
    let widths: Vec<usize> = (0..ncol)
        .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = format!("character {title}\n");
    for r in cells {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, x)| {
                if c == 0 {
                    format!("{x:<w$}", w = widths[c])
                } else {
                    format!("{x:>w$}", w = widths[c])
                }
            })
            .collect();
        writeln!(out, "  {}", line.join("  ").trim_end()).unwrap();
    }
    out
}
