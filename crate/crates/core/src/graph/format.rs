//! Text formats.
//!
//! Graph file: first line `n m`, then `m` lines `u v` with 1-indexed endpoints.
//!
//! Scheme file: line 1 `l`; line 2 `l` thresholds as exact rationals `a/b`
//! (a bare integer is read as `a/1`); line 3 `l` probabilities as decimals.

use std::fmt::Write as _;

use super::{Bias, BiasThresholds, DirectedMultigraph, Edge, GraphError, ObliviousScheme};

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize, GraphError> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|e| parse_err(line, format!("bad {what}: {e}")))
}

pub fn parse_graph(text: &str) -> Result<DirectedMultigraph, GraphError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let mut toks = header.split_whitespace();
    let n = parse_usize(toks.next(), hline, "n")?;
    let m = parse_usize(toks.next(), hline, "m")?;
    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines {
        let mut toks = body.split_whitespace();
        let u = parse_usize(toks.next(), line, "source")?;
        let v = parse_usize(toks.next(), line, "target")?;
        if u == 0 || v == 0 {
            return Err(parse_err(line, "vertices are 1-indexed"));
        }
        edges.push(Edge::new((u - 1) as u32, (v - 1) as u32));
    }
    if edges.len() != m {
        return Err(parse_err(hline, format!("header says {m} edges, found {}", edges.len())));
    }
    DirectedMultigraph::new(n, edges)
}

pub fn write_graph(g: &DirectedMultigraph) -> String {
    let mut out = String::with_capacity(12 * (g.m() + 1));
    writeln!(out, "{} {}", g.n(), g.m()).unwrap();
    for e in g.edges() {
        writeln!(out, "{} {}", e.src + 1, e.dst + 1).unwrap();
    }
    out
}

fn parse_rational(tok: &str, line: usize) -> Result<Bias, GraphError> {
    let (a, b) = match tok.split_once('/') {
        Some((a, b)) => (a, b),
        None => (tok, "1"),
    };
    let a: i64 = a.parse().map_err(|e| parse_err(line, format!("bad numerator {a:?}: {e}")))?;
    let b: i64 = b.parse().map_err(|e| parse_err(line, format!("bad denominator {b:?}: {e}")))?;
    if b == 0 {
        return Err(parse_err(line, "zero denominator"));
    }
    Ok(Bias::new(a, b))
}

pub fn parse_scheme(text: &str) -> Result<ObliviousScheme, GraphError> {
    let mut lines = content_lines(text);
    let (l_line, l_text) = lines.next().ok_or_else(|| parse_err(1, "missing class count"))?;
    let l: usize = l_text.parse().map_err(|e| parse_err(l_line, format!("bad class count: {e}")))?;
    let (t_line, t_text) = lines.next().ok_or_else(|| parse_err(l_line + 1, "missing thresholds"))?;
    let t = t_text
        .split_whitespace()
        .map(|tok| parse_rational(tok, t_line))
        .collect::<Result<Vec<_>, _>>()?;
    let (p_line, p_text) = lines.next().ok_or_else(|| parse_err(t_line + 1, "missing probabilities"))?;
    let p = p_text
        .split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|e| parse_err(p_line, format!("bad probability: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if t.len() != l || p.len() != l {
        return Err(parse_err(
            l_line,
            format!("expected {l} thresholds and probabilities, got {} and {}", t.len(), p.len()),
        ));
    }
    ObliviousScheme::new(BiasThresholds::new(t)?, p)
}

pub fn write_scheme(s: &ObliviousScheme) -> String {
    let t: Vec<String> = s
        .thresholds()
        .values()
        .iter()
        .map(|b| format!("{}/{}", b.numer(), b.denom()))
        .collect();
    let p: Vec<String> = s.probs().iter().map(|p| format!("{p}")).collect();
    format!("{}\n{}\n{}\n", s.len(), t.join(" "), p.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = DirectedMultigraph::from_pairs(4, &[(0, 1), (3, 2), (0, 1)]).unwrap();
        let text = write_graph(&g);
        assert_eq!(text, "4 3\n1 2\n4 3\n1 2\n");
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn empty_graph_file() {
        let g = parse_graph("10 0\n").unwrap();
        assert_eq!((g.n(), g.m()), (10, 0));
    }

    #[test]
    fn graph_parse_errors() {
        assert!(parse_graph("").is_err());
        assert!(parse_graph("3 2\n1 2\n").is_err());
        assert!(parse_graph("3 1\n0 2\n").is_err());
        assert!(matches!(parse_graph("3 1\n2 2\n"), Err(GraphError::SelfLoop { .. })));
        assert!(parse_graph("3 1\n1 x\n").is_err());
    }

    #[test]
    fn scheme_round_trip() {
        let s = ObliviousScheme::default_scheme();
        let back = parse_scheme(&write_scheme(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn scheme_file() {
        let s = parse_scheme("3\n-1/1 0 1\n0 0.5 1\n").unwrap();
        assert_eq!(s.thresholds(), &BiasThresholds::three_way());
        assert_eq!(s.probs(), &[0.0, 0.5, 1.0]);
        assert!(parse_scheme("3\n-1/1 0 1\n0 0.5\n").is_err());
        assert!(parse_scheme("2\n-1/0 1\n0 1\n").is_err());
    }
}
