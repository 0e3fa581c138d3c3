//! Context file formats: Burmeister (`.cxt`) and a plain 0/1 CSV matrix.
//!
//! Burmeister grammar accepted here, line by line:
//!
//! ```text
//! # comment             zero or more, only before the `B` line
//! B
//! <context name>        may be empty
//! <object count>
//! <attribute count>
//!                       blank lines here are skipped
//! <object name>         one line each
//! <attribute name>      one line each
//! <row>                 one per object, one of X x . per attribute
//! ```
//!
//! Trailing whitespace on every line is ignored, as are blank lines after
//! the last row. Names may not be empty. The writer emits exactly one blank
//! line after the counts and uses `X` and `.`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::context::FormalContext;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unexpected end of input: {0}")]
    Eof(String),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .ok_or_else(|| ParseError::Eof(format!("expected {what}")))
    }

    fn next_nonblank(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        loop {
            let (no, line) = self.next_line(what)?;
            if !line.is_empty() {
                return Ok((no, line));
            }
        }
    }
}

fn parse_count(no: usize, line: &str, what: &str) -> Result<usize, ParseError> {
    line.trim()
        .parse()
        .map_err(|_| syntax(no, 1, format!("expected {what}, found {line:?}")))
}

/// Parses a Burmeister context. Leading `#` comment lines are returned
/// alongside the context.
pub fn parse_burmeister(text: &str) -> Result<(FormalContext, Vec<String>), ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let mut comments = Vec::new();
    let (no, first) = loop {
        let (no, line) = lines.next_line("`B` header")?;
        match line.strip_prefix('#') {
            Some(c) => comments.push(c.trim().to_string()),
            None => break (no, line),
        }
    };
    if first != "B" {
        return Err(syntax(
            no,
            1,
            format!("expected `B` header, found {first:?}"),
        ));
    }
    let (_, name) = lines.next_line("context name")?;
    let (no, line) = lines.next_nonblank("object count")?;
    let n_objects = parse_count(no, line, "object count")?;
    let (no, line) = lines.next_nonblank("attribute count")?;
    let n_attributes = parse_count(no, line, "attribute count")?;

    let mut names = Vec::with_capacity(n_objects + n_attributes);
    for k in 0..n_objects + n_attributes {
        let what = if k < n_objects {
            "object name"
        } else {
            "attribute name"
        };
        let (_, line) = if k == 0 {
            lines.next_nonblank(what)?
        } else {
            lines.next_line(what)?
        };
        names.push(line.trim().to_string());
    }
    let attribute_names = names.split_off(n_objects);
    let object_names = names;

    let mut rows = Vec::with_capacity(n_objects);
    for _ in 0..n_objects {
        let (no, line) = lines.next_line("incidence row")?;
        let mut row = Vec::with_capacity(n_attributes);
        for (col, ch) in line.chars().enumerate() {
            match ch {
                'X' | 'x' => row.push(true),
                '.' => row.push(false),
                other => {
                    return Err(syntax(
                        no,
                        col + 1,
                        format!("unexpected character {other:?} in incidence row"),
                    ))
                }
            }
        }
        if row.len() != n_attributes {
            return Err(syntax(
                no,
                row.len().min(n_attributes) + 1,
                format!("row has {} cells, expected {n_attributes}", row.len()),
            ));
        }
        rows.push(row);
    }
    for (no, line) in lines.inner {
        if !line.trim().is_empty() {
            return Err(syntax(no + 1, 1, "trailing content after last row"));
        }
    }
    let ctx = FormalContext::with_names(name.to_string(), object_names, attribute_names, &rows);
    Ok((ctx, comments))
}

/// Serializes a context in Burmeister format, preceded by `# ` comment lines.
pub fn write_burmeister(ctx: &FormalContext, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "B");
    let _ = writeln!(out, "{}", ctx.name());
    let _ = writeln!(out, "{}", ctx.n_objects());
    let _ = writeln!(out, "{}", ctx.n_attributes());
    out.push('\n');
    for n in ctx.object_names().iter().chain(ctx.attribute_names()) {
        let _ = writeln!(out, "{n}");
    }
    for o in 0..ctx.n_objects() {
        for a in 0..ctx.n_attributes() {
            out.push(if ctx.has(o, a) { 'X' } else { '.' });
        }
        out.push('\n');
    }
    out
}

/// Reads a comma-separated 0/1 matrix, one object per record.
///
/// Lines starting with `#` are skipped. If the first record contains a
/// field other than `0`/`1` it is taken as the attribute-name header.
pub fn parse_csv_matrix(text: &str) -> Result<FormalContext, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut width: Option<usize> = None;
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            syntax(line, 1, e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(k + 1);
        if k == 0 && record.iter().any(|f| f != "0" && f != "1") {
            header = Some(record.iter().map(str::to_string).collect());
            width = Some(record.len());
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            match field {
                "1" => row.push(true),
                "0" => row.push(false),
                other => {
                    return Err(syntax(
                        line,
                        col + 1,
                        format!("expected 0 or 1, found {other:?}"),
                    ))
                }
            }
        }
        match width {
            Some(w) if w != row.len() => {
                return Err(syntax(
                    line,
                    1,
                    format!("record has {} fields, expected {w}", row.len()),
                ))
            }
            _ => width = Some(row.len()),
        }
        rows.push(row);
    }
    let Some(width) = width else {
        return Err(ParseError::Eof("expected at least one record".into()));
    };
    let object_names = (1..=rows.len()).map(|i| format!("o{i}")).collect();
    let attribute_names = header.unwrap_or_else(|| (1..=width).map(|i| format!("a{i}")).collect());
    Ok(FormalContext::with_names(
        "",
        object_names,
        attribute_names,
        &rows,
    ))
}

/// Picks the parser from the content: Burmeister when the first
/// non-comment line is `B`, CSV otherwise.
pub fn parse_context(text: &str) -> Result<FormalContext, ParseError> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        None => Err(ParseError::Eof("empty context file".into())),
        Some("B") => parse_burmeister(text).map(|(ctx, _)| ctx),
        Some(_) => parse_csv_matrix(text),
    }
}
