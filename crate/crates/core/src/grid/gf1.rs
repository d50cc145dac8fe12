//! The `gf1` text format: a four-line header followed by one sample per line
//! in row-major node order, exterior nodes written as `nan`.

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::{Grid, GridError, GridFunction};
use crate::scalar::{fmt_real, Scalar};

#[derive(Debug, Error)]
pub enum Gf1Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> Gf1Error {
    Gf1Error::Syntax { line, msg: msg.into() }
}

pub fn write_gf1<T: Scalar>(f: &GridFunction<T>) -> String {
    let g = f.grid();
    let mut out = format!(
        "gf1\nbasedim {}\nradius {}\nh {}\n",
        g.base_dim(),
        fmt_real(g.radius()),
        fmt_real(g.h())
    );
    for &v in f.values() {
        out.push_str(&fmt_real(v));
        out.push('\n');
    }
    out
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str), Gf1Error> {
    let (no, line) = lines.next().ok_or_else(|| syntax(0, format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(syntax(no, format!("expected `{key} <value>`")));
    }
    let value = parts.next().ok_or_else(|| syntax(no, format!("missing value for `{key}`")))?;
    if parts.next().is_some() {
        return Err(syntax(no, "trailing tokens"));
    }
    Ok((no, value))
}

fn number<T: Scalar>(no: usize, s: &str) -> Result<T, Gf1Error> {
    match s {
        "nan" | "NaN" => Ok(T::nan()),
        _ => s.parse::<T>().map_err(|_| syntax(no, format!("bad number {s:?}"))),
    }
}

pub fn parse_gf1<T: Scalar>(text: &str) -> Result<GridFunction<T>, Gf1Error> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, "gf1")) => {}
        Some((no, _)) => return Err(syntax(no, "expected magic `gf1`")),
        None => return Err(syntax(1, "empty input")),
    }
    let (no, d) = header(&mut lines, "basedim")?;
    let d: usize = d.parse().map_err(|_| syntax(no, "bad basedim"))?;
    let (no, r) = header(&mut lines, "radius")?;
    let r: T = number(no, r)?;
    let (no, h) = header(&mut lines, "h")?;
    let h: T = number(no, h)?;
    let grid = Arc::new(Grid::new(d, r, h)?);
    let mut values = Vec::with_capacity(grid.len());
    for (no, line) in lines {
        let v: T = number(no, line)?;
        let idx = values.len();
        if idx < grid.len() && grid.in_domain(idx) && !v.is_finite() && !v.is_nan() {
            return Err(syntax(no, "infinite sample"));
        }
        values.push(v);
    }
    Ok(GridFunction::new(grid, values)?)
}

pub fn read_gf1<T: Scalar>(path: impl AsRef<Path>) -> Result<GridFunction<T>, Gf1Error> {
    parse_gf1(&std::fs::read_to_string(path)?)
}
