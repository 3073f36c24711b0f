//! Reading graphs and event matrices, writing edge lists.
//!
//! Edge lists use 1-based vertex ids on disk and 0-based ids in memory.

use std::fs;
use std::io::Write;
use std::path::Path;

use grafield::{build_graph, EventMatrix, Graph64};
use ndarray::Array2;

use crate::error::{CliError, CliResult};

/// On-disk edge list layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// `u<TAB>v[<TAB>w]` lines with `#` comments.
    Tsv,
    /// MatrixMarket coordinate format, symmetric.
    MatrixMarket,
}

const MM_BANNER: &str = "%%MatrixMarket";

fn data_err(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("line {line}: {msg}"))
}

/// Reads an edge list, detecting MatrixMarket by its banner line.
pub fn parse_edgelist(path: &Path) -> CliResult<Graph64> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_edgelist_str(&text)
}

pub fn parse_edgelist_str(text: &str) -> CliResult<Graph64> {
    if text.trim_start().starts_with(MM_BANNER) {
        parse_matrix_market(text)
    } else {
        parse_tsv(text)
    }
}

fn parse_id(token: &str, line: usize) -> CliResult<usize> {
    match token.parse::<usize>() {
        Ok(0) => Err(data_err(line, "vertex ids are 1-based, got 0")),
        Ok(id) => Ok(id - 1),
        Err(_) => Err(data_err(line, format!("bad vertex id '{token}'"))),
    }
}

fn parse_weight(token: &str, line: usize) -> CliResult<f64> {
    match token.parse::<f64>() {
        Ok(w) if w.is_finite() => Ok(w),
        _ => Err(data_err(line, format!("bad weight '{token}'"))),
    }
}

fn finish(edges: Vec<(usize, usize, f64)>, n: usize) -> CliResult<Graph64> {
    Ok(build_graph(n, &edges)?)
}

fn parse_tsv(text: &str) -> CliResult<Graph64> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(data_err(line, format!("expected 'u v [w]', got '{content}'")));
        }
        let u = parse_id(fields[0], line)?;
        let v = parse_id(fields[1], line)?;
        let w = match fields.get(2) {
            Some(t) => parse_weight(t, line)?,
            None => 1.0,
        };
        if u == v {
            return Err(data_err(line, format!("self-loop on vertex {}", u + 1)));
        }
        if w < 0.0 {
            return Err(data_err(line, format!("negative weight {w}")));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    finish(edges, n)
}

fn parse_matrix_market(text: &str) -> CliResult<Graph64> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, banner) = lines.next().expect("caller checked the banner");
    let header: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if header.len() != 5 || header[1] != "matrix" || header[2] != "coordinate" {
        return Err(data_err(1, "only 'matrix coordinate' MatrixMarket files are supported"));
    }
    let pattern = match header[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(data_err(1, format!("unsupported field type '{other}'"))),
    };
    let symmetric = match header[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(data_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body.next().ok_or(CliError::Data("empty graph".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| data_err(size_line, format!("bad size line '{size}'"))))
        .collect::<CliResult<_>>()?;
    if dims.len() != 3 {
        return Err(data_err(size_line, format!("bad size line '{size}'")));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    if rows != cols {
        return Err(data_err(size_line, format!("matrix is {rows}x{cols}, not square")));
    }

    let mut entries: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(nnz);
    for (line, content) in body {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let expected = if pattern { 2 } else { 3 };
        if fields.len() != expected {
            return Err(data_err(line, format!("expected {expected} fields, got '{content}'")));
        }
        let i = parse_id(fields[0], line)?;
        let j = parse_id(fields[1], line)?;
        if i >= rows || j >= rows {
            return Err(data_err(line, format!("entry ({}, {}) outside a {rows}x{rows} matrix", i + 1, j + 1)));
        }
        let w = if pattern { 1.0 } else { parse_weight(fields[2], line)? };
        if i == j {
            return Err(data_err(line, format!("self-loop on vertex {}", i + 1)));
        }
        if w < 0.0 {
            return Err(data_err(line, format!("negative weight {w}")));
        }
        entries.push((line, i, j, w));
    }
    if entries.len() != nnz {
        return Err(CliError::Data(format!(
            "size line declares {nnz} entries but the file has {}",
            entries.len()
        )));
    }

    let edges = if symmetric {
        entries.into_iter().map(|(_, i, j, w)| (i, j, w)).collect()
    } else {
        symmetric_part(entries)?
    };
    finish(edges, rows)
}

/// A `general` MatrixMarket body is accepted only if it lists every entry
/// together with its mirror image; each pair becomes one edge.
fn symmetric_part(entries: Vec<(usize, usize, usize, f64)>) -> CliResult<Vec<(usize, usize, f64)>> {
    use std::collections::BTreeMap;
    let mut cells: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    for (line, i, j, w) in entries {
        cells.entry((i, j)).or_insert((line, 0.0)).1 += w;
    }
    let mut edges = Vec::new();
    for (&(i, j), &(line, w)) in &cells {
        let mirror = cells.get(&(j, i)).map(|c| c.1);
        if mirror != Some(w) {
            return Err(data_err(
                line,
                format!("asymmetric matrix: entry ({}, {}) = {w} has no matching ({}, {})", i + 1, j + 1, j + 1, i + 1),
            ));
        }
        if i < j {
            edges.push((i, j, w));
        }
    }
    Ok(edges)
}

/// Writes a graph so that [`parse_edgelist_str`] reads it back unchanged.
/// Weights use the shortest decimal form that round-trips. The TSV layout
/// cannot represent trailing isolated vertices; MatrixMarket can.
pub fn write_edgelist(g: &Graph64, format: EdgeListFormat, out: &mut impl Write) -> std::io::Result<()> {
    let entries: Vec<(usize, usize, f64)> = g.adjacency().upper_entries().into_iter().filter(|e| e.2 != 0.0).collect();
    match format {
        EdgeListFormat::Tsv => {
            writeln!(out, "# {} vertices, {} edges", g.n(), entries.len())?;
            for (u, v, w) in &entries {
                writeln!(out, "{}\t{}\t{w}", u + 1, v + 1)?;
            }
        }
        EdgeListFormat::MatrixMarket => {
            writeln!(out, "{MM_BANNER} matrix coordinate real symmetric")?;
            writeln!(out, "{} {} {}", g.n(), g.n(), entries.len())?;
            // Lower triangle, as the format expects for symmetric matrices.
            for (u, v, w) in &entries {
                writeln!(out, "{}\t{}\t{w}", v + 1, u + 1)?;
            }
        }
    }
    Ok(())
}

/// Reads a binary event matrix: a header row, then one record per line with
/// a timestamp (or index) in the first column and 0/1 cells after it.
pub fn parse_event_matrix(path: &Path) -> CliResult<EventMatrix> {
    let file = fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_event_matrix_reader(file)
}

pub fn parse_event_matrix_reader(input: impl std::io::Read) -> CliResult<EventMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| CliError::Data(e.to_string()))?.clone();
    if header.len() < 2 {
        return Err(CliError::Data("header needs a timestamp column and at least one feature".into()));
    }
    let d = header.len() - 1;
    let mut timestamps = Vec::new();
    let mut cells = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        if record.len() != header.len() {
            return Err(CliError::Data(format!(
                "row {row}: expected {} fields, got {}",
                header.len(),
                record.len()
            )));
        }
        timestamps.push(record[0].to_string());
        for c in 1..record.len() {
            let value = match &record[c] {
                "0" => 0u8,
                "1" => 1u8,
                other => {
                    return Err(CliError::Data(format!(
                        "row {row}, column {c} ('{}'): value '{other}' is not 0 or 1",
                        &header[c]
                    )))
                }
            };
            cells.push(value);
        }
    }
    let n = timestamps.len();
    let values = Array2::from_shape_vec((n, d), cells).expect("every row has d cells");
    Ok(EventMatrix::new(values, Some(timestamps))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_tsv() {
        let g = parse_edgelist_str("# toy\n1\t2\t2\n2\t3\t3\n2\t4\t3\n3\t4\t3\n").unwrap();
        assert_eq!(*g.volume(), 22.0);
        assert_eq!(g.degrees(), &[2.0, 8.0, 6.0, 6.0]);
    }

    #[test]
    fn weights_default_to_one_and_duplicates_add() {
        let g = parse_edgelist_str("1 2\n2 3 # trailing comment\n1 2 0.5\n").unwrap();
        assert_eq!(g.weight(0, 1), 1.5);
        assert_eq!(g.weight(1, 2), 1.0);
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let err = parse_edgelist_str("1 2\n\n2 x\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = parse_edgelist_str("1 2 3 4\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        let err = parse_edgelist_str("0 2\n").unwrap_err().to_string();
        assert!(err.contains("1-based"), "{err}");
    }

    #[test]
    fn empty_file() {
        let err = parse_edgelist_str("# nothing here\n").unwrap_err().to_string();
        assert!(err.contains("empty graph"), "{err}");
    }

    #[test]
    fn matrix_market_triangle() {
        let text = "%%MatrixMarket matrix coordinate pattern symmetric\n% triangle\n3 3 3\n2 1\n3 1\n3 2\n";
        let g = parse_edgelist_str(text).unwrap();
        assert_eq!(g.degrees(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn asymmetric_matrix_market_is_rejected() {
        let text = "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 2 1.0\n2 3 1.0\n";
        let err = parse_edgelist_str(text).unwrap_err().to_string();
        assert!(err.contains("asymmetric"), "{err}");
        let mirrored = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 4.0\n2 1 4.0\n";
        assert_eq!(parse_edgelist_str(mirrored).unwrap().weight(0, 1), 4.0);
    }

    #[test]
    fn event_matrix_shape_and_errors() {
        let z = parse_event_matrix_reader("t,a,b,c\n1995-01-04,1,0,1\n1995-01-05,0,0,1\n".as_bytes()).unwrap();
        assert_eq!((z.n(), z.d()), (2, 3));
        assert_eq!(z.timestamps().unwrap()[1], "1995-01-05");
        let err = parse_event_matrix_reader("t,a,b\n1,0,1\n2,1,2\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2, column 2"), "{err}");
    }
}
