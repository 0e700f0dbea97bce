//! Edge-list text format.
//!
//! The first data line is `n m`; it is followed by exactly `m` lines `u v`
//! with 0-based ids and `u < v`. Lines starting with `#` are comments and
//! blank lines are ignored. Writers emit edges sorted lexicographically, so
//! a graph always serializes to the same bytes.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads a graph from edge-list text.
pub fn read_edge_list<R: Read>(reader: R) -> Result<Graph> {
    let mut lines = BufReader::new(reader).lines();
    let mut line_no = 0usize;
    let mut next_data = |lines: &mut std::io::Lines<BufReader<R>>| -> Result<Option<(usize, String)>> {
        for line in lines.by_ref() {
            line_no += 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some((line_no, trimmed.to_string())));
        }
        Ok(None)
    };

    let (header_line, header) = next_data(&mut lines)?
        .ok_or_else(|| parse_err(1, "missing `n m` header"))?;
    let mut parts = header.split_whitespace();
    let n: u32 = parts
        .next()
        .ok_or_else(|| parse_err(header_line, "missing node count"))?
        .parse()
        .map_err(|_| parse_err(header_line, "node count is not an integer"))?;
    let m: u64 = parts
        .next()
        .ok_or_else(|| parse_err(header_line, "missing edge count"))?
        .parse()
        .map_err(|_| parse_err(header_line, "edge count is not an integer"))?;
    if parts.next().is_some() {
        return Err(parse_err(header_line, "header has trailing tokens"));
    }

    let mut edges = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let (no, line) = next_data(&mut lines)?.ok_or_else(|| {
            parse_err(
                header_line,
                format!("expected {m} edges, found {}", edges.len()),
            )
        })?;
        let mut parts = line.split_whitespace();
        let u: u32 = parts
            .next()
            .ok_or_else(|| parse_err(no, "missing first endpoint"))?
            .parse()
            .map_err(|_| parse_err(no, "endpoint is not an integer"))?;
        let v: u32 = parts
            .next()
            .ok_or_else(|| parse_err(no, "missing second endpoint"))?
            .parse()
            .map_err(|_| parse_err(no, "endpoint is not an integer"))?;
        if parts.next().is_some() {
            return Err(parse_err(no, "edge line has trailing tokens"));
        }
        if u >= v {
            return Err(parse_err(no, format!("edges must satisfy u < v, got {u} {v}")));
        }
        edges.push((u, v));
    }
    if let Some((no, _)) = next_data(&mut lines)? {
        return Err(parse_err(no, format!("more than {m} edge lines")));
    }

    Graph::from_edges(n, &edges).map_err(|e| match e {
        Error::InvalidGraph(msg) => parse_err(header_line, msg),
        other => other,
    })
}

pub fn read_edge_list_path(path: &Path) -> Result<Graph> {
    read_edge_list(std::fs::File::open(path)?)
}

/// Writes a graph in the edge-list format, edges sorted lexicographically.
pub fn write_edge_list<W: Write>(g: &Graph, mut writer: W) -> Result<()> {
    writeln!(writer, "{} {}", g.node_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(writer, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_edge_list_path(g: &Graph, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_edge_list(g, &mut file)?;
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_er;
    use crate::noise::RandomStream;

    #[test]
    fn round_trip_preserves_graph() {
        let mut rng = RandomStream::new(21);
        let g = sample_er(40, 0.25, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn writer_output_is_sorted_and_stable() {
        let g = Graph::from_edges(4, &[(2, 3), (0, 1), (0, 3)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "4 3\n0 1\n0 3\n2 3\n");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# generated\n\n3 2\n# edges follow\n0 1\n\n1 2\n";
        let g = read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_edge_list("3 2\n0 1\n2 1\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }

        let err = read_edge_list("3 5\n0 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));

        let err = read_edge_list("3 1\n0 x\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
