//! Text formats for patterns, diagrams, gridded functions and fitted models.
//!
//! Readers take the whole file contents and report failures as
//! [`Error::Parse`] with a 1-based line number. Writers produce strings;
//! floats use Rust's shortest round-trip representation, so a write/read
//! cycle is lossless and reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpca::PcaModel;
use crate::geometry::{PointPattern, Window};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::rankspace::{Grid, RankFunction, WeightFunction};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let token = token.trim();
    token.parse::<f64>().map_err(|_| parse_err(line, format!("'{token}' is not a number")))
}

/// Non-blank lines with their 1-based numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

/// Parses a point CSV: 2 or 3 float columns per line, an optional
/// `# window xmin xmax ymin ymax [zmin zmax]` header, other `#` lines ignored.
/// Without a header the window is the bounding box of the points.
pub fn read_points(text: &str) -> Result<PointPattern> {
    let mut window: Option<Window> = None;
    let mut dim: Option<usize> = None;
    let mut coords = Vec::new();
    for (line, content) in numbered_lines(text) {
        if let Some(comment) = content.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("window") {
                if window.is_some() || !coords.is_empty() {
                    return Err(parse_err(line, "window header must come once, before the points"));
                }
                let bounds = words.map(|w| parse_f64(w, line)).collect::<Result<Vec<_>>>()?;
                if bounds.len() != 4 && bounds.len() != 6 {
                    return Err(parse_err(line, format!("window header needs 4 or 6 bounds, got {}", bounds.len())));
                }
                let (min, max) = bounds.chunks(2).map(|c| (c[0], c[1])).unzip();
                let w = Window::new(min, max).map_err(|e| parse_err(line, e.to_string()))?;
                dim = Some(w.dim());
                window = Some(w);
            }
            continue;
        }
        let row = content.split(',').map(|t| parse_f64(t, line)).collect::<Result<Vec<_>>>()?;
        match dim {
            None if row.len() == 2 || row.len() == 3 => dim = Some(row.len()),
            None => return Err(parse_err(line, format!("expected 2 or 3 columns, got {}", row.len()))),
            Some(d) if d != row.len() => {
                return Err(parse_err(line, format!("expected {d} columns, got {}", row.len())))
            }
            Some(_) => {}
        }
        if let Some(w) = &window {
            if !w.contains(&row) {
                return Err(parse_err(line, "point lies outside the window"));
            }
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(parse_err(line, "non-finite coordinate"));
        }
        coords.extend(row);
    }
    match (window, dim) {
        (Some(w), Some(d)) => PointPattern::from_flat(d, coords, w),
        (None, Some(d)) => PointPattern::with_bounding_window(coords.chunks_exact(d).map(<[f64]>::to_vec).collect()),
        _ => Err(Error::EmptyInput),
    }
}

pub fn write_points(pattern: &PointPattern) -> String {
    let mut out = String::from("# window");
    let w = pattern.window();
    for (lo, hi) in w.min.iter().zip(&w.max) {
        write!(out, " {lo:?} {hi:?}").unwrap();
    }
    out.push('\n');
    for p in pattern.points() {
        let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

const DIAGRAM_HEADER: &str = "dim,birth,death";

/// Parses a diagram CSV with columns `dim,birth,death` (`inf` for essential
/// classes). The column header line is optional; `#` lines are ignored.
pub fn read_diagram(text: &str) -> Result<PersistenceDiagram> {
    let mut points = Vec::new();
    for (line, content) in numbered_lines(text) {
        if content.starts_with('#') || content.replace(' ', "") == DIAGRAM_HEADER {
            continue;
        }
        let cols: Vec<&str> = content.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(parse_err(line, format!("expected 3 columns, got {}", cols.len())));
        }
        let dim: usize = cols[0].parse().map_err(|_| parse_err(line, format!("'{}' is not a dimension", cols[0])))?;
        let birth = parse_f64(cols[1], line)?;
        let death = if cols[2] == "inf" { f64::INFINITY } else { parse_f64(cols[2], line)? };
        let p = DiagramPoint { dim, birth, death };
        PersistenceDiagram::new(vec![p]).map_err(|e| parse_err(line, e.to_string()))?;
        points.push(p);
    }
    PersistenceDiagram::new(points)
}

pub fn write_diagram(diagram: &PersistenceDiagram) -> String {
    let mut out = format!("{DIAGRAM_HEADER}\n");
    for p in diagram.points() {
        if p.is_essential() {
            writeln!(out, "{},{:?},inf", p.dim, p.birth).unwrap();
        } else {
            writeln!(out, "{},{:?},{:?}", p.dim, p.birth, p.death).unwrap();
        }
    }
    out
}

/// Contents of a gridded-function CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCsv {
    pub grid: Grid,
    pub dim: usize,
    pub phi: WeightFunction,
    /// Values in grid storage order.
    pub values: Vec<f64>,
}

impl GridCsv {
    pub fn into_rank_function(self) -> Result<RankFunction> {
        RankFunction::from_values(self.grid, self.dim, self.values)
    }
}

/// Writes values at the grid nodes as `x,y,value` rows under a header
/// recording the grid, homology dimension and weight, followed by any
/// `extra` `(key, value)` header lines.
pub fn write_grid_csv(
    grid: &Grid,
    dim: usize,
    phi: &WeightFunction,
    values: &[f64],
    extra: &[(&str, String)],
) -> String {
    let mut out = format!("# grid {grid}\n# dim {dim}\n# phi {phi}\n");
    for (key, value) in extra {
        writeln!(out, "# {key} {value}").unwrap();
    }
    out.push_str("x,y,value\n");
    for ((i, j), v) in grid.nodes().zip(values) {
        writeln!(out, "{:?},{:?},{v:?}", grid.coord(i), grid.coord(j)).unwrap();
    }
    out
}

pub fn write_rank_function(f: &RankFunction, phi: &WeightFunction, extra: &[(&str, String)]) -> String {
    write_grid_csv(f.grid(), f.dim(), phi, f.values(), extra)
}

/// Parses a gridded-function CSV. The `grid`, `dim` and `phi` header lines
/// are required; other `#` lines are ignored. Rows must list every node in
/// storage order.
pub fn read_grid_csv(text: &str) -> Result<GridCsv> {
    let mut grid: Option<Grid> = None;
    let mut dim: Option<usize> = None;
    let mut phi: Option<WeightFunction> = None;
    let mut values = Vec::new();
    let mut last_line = 0;
    for (line, content) in numbered_lines(text) {
        last_line = line;
        if let Some(comment) = content.strip_prefix('#') {
            let comment = comment.trim();
            let (key, value) = comment.split_once(char::is_whitespace).unwrap_or((comment, ""));
            let value = value.trim();
            let header_err = |e: Error| parse_err(line, e.to_string());
            match key {
                "grid" => grid = Some(value.parse().map_err(header_err)?),
                "phi" => phi = Some(value.parse().map_err(header_err)?),
                "dim" => {
                    dim = Some(value.parse().map_err(|_| parse_err(line, format!("'{value}' is not a dimension")))?)
                }
                _ => {}
            }
            continue;
        }
        if content.replace(' ', "") == "x,y,value" {
            continue;
        }
        let g = grid.ok_or_else(|| parse_err(line, "data row before '# grid' header"))?;
        let cols = content.split(',').map(|t| parse_f64(t, line)).collect::<Result<Vec<_>>>()?;
        if cols.len() != 3 {
            return Err(parse_err(line, format!("expected 3 columns, got {}", cols.len())));
        }
        let k = values.len();
        let (i, j) = g.nodes().nth(k).ok_or_else(|| parse_err(line, format!("more than {} rows", g.len())))?;
        let tol = 1e-9 * (g.a1 - g.a0);
        if (cols[0] - g.coord(i)).abs() > tol || (cols[1] - g.coord(j)).abs() > tol {
            return Err(parse_err(
                line,
                format!("node ({}, {}) does not match grid node ({}, {})", cols[0], cols[1], g.coord(i), g.coord(j)),
            ));
        }
        if !cols[2].is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        values.push(cols[2]);
    }
    let missing = |what: &str| parse_err(last_line.max(1), format!("missing '# {what}' header"));
    let grid = grid.ok_or_else(|| missing("grid"))?;
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let phi = phi.ok_or_else(|| missing("phi"))?;
    if values.len() != grid.len() {
        return Err(parse_err(last_line.max(1), format!("expected {} rows, got {}", grid.len(), values.len())));
    }
    Ok(GridCsv { grid, dim, phi, values })
}

/// Rank-function CSV reader; values must be nonnegative.
pub fn read_rank_function(text: &str) -> Result<(RankFunction, WeightFunction)> {
    let csv = read_grid_csv(text)?;
    let phi = csv.phi;
    Ok((csv.into_rank_function()?, phi))
}

/// Values as an `M x M` whitespace-separated matrix for gnuplot's
/// `matrix` mode: row `j` is `y_j`, column `i` is `x_i`, `NaN` below the diagonal.
pub fn write_gnuplot_matrix(grid: &Grid, values: &[f64]) -> String {
    let m = grid.m;
    let mut out = format!("# grid {grid}; rows y_j, columns x_i; NaN where x > y\n");
    for j in 0..m {
        let row: Vec<String> = (0..m)
            .map(|i| if i <= j { format!("{:?}", values[grid.index(i, j)]) } else { "NaN".to_string() })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// JSON header of a saved PCA model; components and scores live in
/// companion CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaModelHeader {
    pub grid: String,
    pub phi: String,
    pub dim: usize,
    pub n_functions: usize,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub total_variance: f64,
}

impl PcaModelHeader {
    pub fn of(model: &PcaModel) -> Self {
        Self {
            grid: model.grid.to_string(),
            phi: model.phi.to_string(),
            dim: model.dim,
            n_functions: model.scores.len(),
            eigenvalues: model.eigenvalues.clone(),
            explained_variance_ratio: model.explained_variance_ratio.clone(),
            total_variance: model.total_variance,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: Self = serde_json::from_str(text).map_err(json_err)?;
        header.grid.parse::<Grid>()?;
        header.phi.parse::<WeightFunction>()?;
        Ok(header)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("header serializes") + "\n"
    }
}

pub(crate) fn json_err(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), message: e.to_string() }
}

/// Scores as CSV: `pattern,s1,...,sr` with one row per function.
pub fn write_scores(ids: &[String], scores: &[Vec<f64>]) -> String {
    let r = scores.first().map_or(0, Vec::len);
    let mut out = String::from("pattern");
    for j in 1..=r {
        write!(out, ",s{j}").unwrap();
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(scores) {
        out.push_str(id);
        for s in row {
            write!(out, ",{s:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and a rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
