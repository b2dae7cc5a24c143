use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{PsdMatrix, WeightedGraph};
use crate::error::{GrothError, Result};

/// Relative asymmetry (against the largest entry) tolerated in dense input.
const ASYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// Matrix Market `coordinate real` (symmetric or general), 1-based.
    MatrixMarket,
    /// `m` lines of `m` comma-separated reals.
    DenseCsv,
}

impl MatrixFormat {
    /// `.csv` → dense CSV, anything else → Matrix Market.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::DenseCsv,
            _ => MatrixFormat::MatrixMarket,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = GrothError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mm" | "mtx" | "matrix-market" => Ok(MatrixFormat::MatrixMarket),
            "csv" | "dense-csv" => Ok(MatrixFormat::DenseCsv),
            other => Err(GrothError::invalid(format!("unknown matrix format '{other}'"))),
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: Option<MatrixFormat>) -> Result<PsdMatrix> {
    let path = path.as_ref();
    let format = format.unwrap_or_else(|| MatrixFormat::from_path(path));
    let reader = BufReader::new(File::open(path)?);
    match format {
        MatrixFormat::MatrixMarket => read_matrix_market(reader),
        MatrixFormat::DenseCsv => read_dense_csv(reader),
    }
}

pub fn save_matrix(a: &PsdMatrix, path: impl AsRef<Path>, format: Option<MatrixFormat>) -> Result<()> {
    let path = path.as_ref();
    let format = format.unwrap_or_else(|| MatrixFormat::from_path(path));
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        MatrixFormat::MatrixMarket => write_matrix_market(a, &mut w)?,
        MatrixFormat::DenseCsv => write_dense_csv(a, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(tok: &str, line_no: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| GrothError::format(format!("line {line_no}: cannot parse '{tok}' as a real")))?;
    if !v.is_finite() {
        return Err(GrothError::format(format!("line {line_no}: non-finite value '{tok}'")));
    }
    Ok(v)
}

fn parse_usize(tok: &str, line_no: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| GrothError::format(format!("line {line_no}: cannot parse '{tok}' as an index")))
}

fn check_symmetric(m: usize, e: &[f64]) -> Result<()> {
    let scale = e.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    for i in 0..m {
        for j in (i + 1)..m {
            let d = (e[i * m + j] - e[j * m + i]).abs();
            if d > ASYMMETRY_TOL * scale {
                return Err(GrothError::format(format!(
                    "matrix is not symmetric at ({i}, {j}): |a_ij - a_ji| = {d:e}"
                )));
            }
        }
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<PsdMatrix> {
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| GrothError::format("empty Matrix Market file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(GrothError::format(format!("bad Matrix Market header '{header}'")));
    }
    if tokens[2] != "coordinate" {
        return Err(GrothError::format("only the coordinate layout is supported"));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(GrothError::format(format!("unsupported field type '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(GrothError::format(format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut entries: Vec<f64> = Vec::new();
    let mut filled: Vec<bool> = Vec::new();
    let mut count = 0usize;

    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(GrothError::format(format!("line {line_no}: expected 'rows cols nnz'")));
                }
                let rows = parse_usize(toks[0], line_no)?;
                let cols = parse_usize(toks[1], line_no)?;
                let nnz = parse_usize(toks[2], line_no)?;
                if rows != cols || rows == 0 {
                    return Err(GrothError::format(format!("matrix must be square and nonempty, got {rows}×{cols}")));
                }
                entries = vec![0.0; rows * rows];
                filled = vec![false; rows * rows];
                size = Some((rows, nnz));
            }
            Some((m, _)) => {
                if toks.len() != 3 {
                    return Err(GrothError::format(format!("line {line_no}: expected 'i j value'")));
                }
                let i = parse_usize(toks[0], line_no)?;
                let j = parse_usize(toks[1], line_no)?;
                let v = parse_f64(toks[2], line_no)?;
                if i == 0 || j == 0 || i > m || j > m {
                    return Err(GrothError::format(format!("line {line_no}: index ({i}, {j}) out of range")));
                }
                let (i, j) = (i - 1, j - 1);
                if filled[i * m + j] {
                    return Err(GrothError::format(format!("line {line_no}: duplicate entry ({}, {})", i + 1, j + 1)));
                }
                filled[i * m + j] = true;
                entries[i * m + j] = v;
                if symmetric && i != j {
                    if filled[j * m + i] {
                        return Err(GrothError::format(format!("line {line_no}: both triangles given for ({}, {})", i + 1, j + 1)));
                    }
                    filled[j * m + i] = true;
                    entries[j * m + i] = v;
                }
                count += 1;
            }
        }
    }

    let (m, nnz) = size.ok_or_else(|| GrothError::format("missing size line"))?;
    if count != nnz {
        return Err(GrothError::format(format!("expected {nnz} entries, found {count}")));
    }
    if !symmetric {
        check_symmetric(m, &entries)?;
    }
    PsdMatrix::from_row_major(m, entries)
}

/// Writes the lower triangle in `coordinate real symmetric` layout with
/// shortest round-trip float formatting.
pub fn write_matrix_market<W: Write>(a: &PsdMatrix, mut w: W) -> Result<()> {
    let m = a.order();
    let lower: Vec<(usize, usize, f64)> = (0..m)
        .flat_map(|j| (j..m).map(move |i| (i, j)))
        .map(|(i, j)| (i, j, a.get(i, j)))
        .filter(|&(_, _, v)| v != 0.0)
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{m} {m} {}", lower.len())?;
    for (i, j, v) in lower {
        writeln!(w, "{} {} {v:e}", i + 1, j + 1)?;
    }
    Ok(())
}

pub fn read_dense_csv<R: BufRead>(reader: R) -> Result<PsdMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = trimmed
            .split(',')
            .map(|tok| parse_f64(tok.trim(), idx + 1))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let m = rows.len();
    if m == 0 {
        return Err(GrothError::format("empty CSV matrix"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(GrothError::format(format!("row {} has {} columns, expected {m}", i + 1, r.len())));
    }
    let entries = rows.concat();
    check_symmetric(m, &entries)?;
    PsdMatrix::from_row_major(m, entries)
}

pub fn write_dense_csv<W: Write>(a: &PsdMatrix, mut w: W) -> Result<()> {
    for i in 0..a.order() {
        let line: Vec<String> = a.row(i).iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Edge list: one `i j w` triple per line, 0-based vertices, `#` comments.
/// With `m = None` the order is one more than the largest vertex index.
pub fn read_edge_list<R: BufRead>(reader: R, m: Option<usize>) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(GrothError::format(format!("line {line_no}: expected 'i j w'")));
        }
        edges.push((
            parse_usize(toks[0], line_no)?,
            parse_usize(toks[1], line_no)?,
            parse_f64(toks[2], line_no)?,
        ));
    }
    let order = match m {
        Some(m) => m,
        None => edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0),
    };
    WeightedGraph::new(order, edges)
}

pub fn load_edge_list(path: impl AsRef<Path>, m: Option<usize>) -> Result<WeightedGraph> {
    read_edge_list(BufReader::new(File::open(path)?), m)
}
