//! Deterministic JSON/CSV writers.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use semilinear_core::{FieldSet, Profile, RadialGrid};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

pub const SCHEMA: &str = "semilinear-report/1";

/// Formats every float with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty layout, fixed-precision floats.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(num(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(CliError::Json)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Writes through a temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn profile_csv(grid: &RadialGrid, fields: &FieldSet) -> String {
    let k = fields.components();
    let mut out = String::from("r");
    for i in 1..=k {
        out.push_str(&format!(",u_{i}"));
    }
    out.push('\n');
    for (j, r) in grid.nodes().iter().enumerate() {
        out.push_str(&num(*r));
        for c in fields.iter() {
            out.push(',');
            out.push_str(&num(c[j]));
        }
        out.push('\n');
    }
    out
}

/// Reads a `r,u_1,…,u_k` table and checks it against the grid nodes.
pub fn read_profile_csv(path: &Path, grid: &RadialGrid, k: usize) -> Result<FieldSet, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_profile_csv(&text, grid, k).map_err(|(line, message)| CliError::Csv {
        path: path.to_path_buf(),
        line,
        message,
    })
}

fn parse_profile_csv(text: &str, grid: &RadialGrid, k: usize) -> Result<FieldSet, (usize, String)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or((1, "empty file".to_string()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let expected: Vec<String> = std::iter::once("r".to_string())
        .chain((1..=k).map(|i| format!("u_{i}")))
        .collect();
    if cols != expected {
        return Err((1, format!("header must be '{}'", expected.join(","))));
    }
    let nodes = grid.nodes();
    let mut comps = vec![Vec::with_capacity(nodes.len()); k];
    let mut row = 0;
    for (idx, l) in lines {
        let line = idx + 1;
        let vals = l
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| (line, e.to_string()))?;
        if vals.len() != k + 1 {
            return Err((
                line,
                format!("expected {} columns, got {}", k + 1, vals.len()),
            ));
        }
        if row >= nodes.len() {
            return Err((line, format!("more than {} data rows", nodes.len())));
        }
        if (vals[0] - nodes[row]).abs() > 1e-9 * grid.r_max() {
            return Err((
                line,
                format!("r = {} does not match node {}", vals[0], nodes[row]),
            ));
        }
        for (c, v) in comps.iter_mut().zip(&vals[1..]) {
            c.push(*v);
        }
        row += 1;
    }
    if row != nodes.len() {
        return Err((
            text.lines().count(),
            format!("{row} data rows, grid has {}", nodes.len()),
        ));
    }
    FieldSet::new(comps.into_iter().map(Profile::new).collect()).map_err(|e| (0, e.to_string()))
}
