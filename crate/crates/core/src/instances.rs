//! Instance files, the edge-length scaling protocol and test polygon
//! generators.
//!
//! Text format, one item per line:
//!
//! ```text
//! # name: square
//! polygon 4 0
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! guards 1
//! 1/2 1/2
//! ```
//!
//! `polygon <n_outer> <n_holes>`, then the counterclockwise outer vertices,
//! then per hole `hole <n>` and its clockwise vertices, then optionally
//! `guards <m>`. Coordinates are integers, decimals or `p/q`. Leading
//! `# name:` and `# source:` lines carry metadata; other comments and blank
//! lines are ignored.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{input, Error, Result};
use crate::geom::{average_edge_length, scale, Point, PolygonWithHoles};
use crate::scalar::{format_rational, parse_rational};
use crate::{PointQ, PolygonQ, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub name: Option<String>,
    pub source: Option<String>,
    pub polygon: PolygonQ,
    /// Explicit guard candidates; `None` means the polygon's vertices.
    pub guards: Option<Vec<PointQ>>,
}

impl InstanceFile {
    pub fn new(polygon: PolygonQ, guards: Option<Vec<PointQ>>) -> Result<Self> {
        if let Some(gs) = &guards {
            if let Some(i) = gs.iter().position(|g| !polygon.contains(g)) {
                return Err(input(format!("guard {i} lies outside the polygon")));
            }
        }
        Ok(InstanceFile { name: None, source: None, polygon, guards })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn guard_candidates(&self) -> Vec<PointQ> {
        match &self.guards {
            Some(g) => g.clone(),
            None => self.polygon.vertices().cloned().collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    /// Canonical text form.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        if let Some(n) = &self.name {
            let _ = writeln!(s, "# name: {n}");
        }
        if let Some(src) = &self.source {
            let _ = writeln!(s, "# source: {src}");
        }
        let p = &self.polygon;
        let _ = writeln!(s, "polygon {} {}", p.outer().len(), p.holes().len());
        let pt = |s: &mut String, q: &PointQ| {
            let _ = writeln!(s, "{} {}", format_rational(&q.x), format_rational(&q.y));
        };
        for q in p.outer() {
            pt(&mut s, q);
        }
        for h in p.holes() {
            let _ = writeln!(s, "hole {}", h.len());
            for q in h {
                pt(&mut s, q);
            }
        }
        if let Some(gs) = &self.guards {
            let _ = writeln!(s, "guards {}", gs.len());
            for q in gs {
                pt(&mut s, q);
            }
        }
        s
    }
}

struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.items.get(self.pos) {
            Some(&item) => {
                self.pos += 1;
                Ok(item)
            }
            None => Err(Error::Parse {
                line: self.last_line + 1,
                column: 1,
                message: format!("unexpected end of file, missing {what}"),
            }),
        }
    }

    fn peek(&self) -> Option<&(usize, &'a str)> {
        self.items.get(self.pos)
    }
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn column_of(line: &str, token: &str) -> usize {
    // Tokens are subslices of the line.
    (token.as_ptr() as usize - line.as_ptr() as usize) + 1
}

fn header(lines: &mut Lines, keyword: &str, fields: usize, what: &str) -> Result<(usize, Vec<usize>)> {
    let (ln, line) = lines.next(what)?;
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.first() != Some(&keyword) {
        let col = tokens.first().map_or(1, |t| column_of(line, t));
        return Err(perr(ln, col, format!("expected '{keyword}'")));
    }
    if tokens.len() != fields + 1 {
        return Err(perr(ln, 1, format!("'{keyword}' takes {fields} count(s), found {}", tokens.len() - 1)));
    }
    let mut out = Vec::with_capacity(fields);
    for t in &tokens[1..] {
        let v = t.parse::<usize>().map_err(|_| perr(ln, column_of(line, t), format!("invalid count '{t}'")))?;
        out.push(v);
    }
    Ok((ln, out))
}

fn points(lines: &mut Lines, n: usize, what: &str) -> Result<Vec<PointQ>> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (ln, line) = lines.next(&format!("{what} (vertex {} of {n})", i + 1))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(perr(ln, 1, format!("{what}: expected 'x y', found {} field(s)", tokens.len())));
        }
        let coord = |t: &str| parse_rational(t).ok_or_else(|| perr(ln, column_of(line, t), format!("invalid number '{t}'")));
        out.push(Point::new(coord(tokens[0])?, coord(tokens[1])?));
    }
    Ok(out)
}

fn parse(text: &str) -> Result<InstanceFile> {
    let mut name = None;
    let mut source = None;
    let mut items = Vec::new();
    let mut seen_body = false;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        last_line = i + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if !seen_body {
                let c = c.trim();
                if let Some(v) = c.strip_prefix("name:") {
                    name = Some(v.trim().to_string());
                } else if let Some(v) = c.strip_prefix("source:") {
                    source = Some(v.trim().to_string());
                }
            }
            continue;
        }
        seen_body = true;
        items.push((i + 1, raw));
    }
    let mut lines = Lines { items, pos: 0, last_line };
    let (ln, counts) = header(&mut lines, "polygon", 2, "the 'polygon' header")?;
    let (n_outer, n_holes) = (counts[0], counts[1]);
    if n_outer < 3 {
        return Err(perr(ln, 1, format!("outer boundary needs at least 3 vertices, got {n_outer}")));
    }
    let outer = points(&mut lines, n_outer, "outer boundary")?;
    let mut holes = Vec::with_capacity(n_holes);
    for h in 0..n_holes {
        let what = format!("hole {} header", h + 1);
        let (_, c) = header(&mut lines, "hole", 1, &what)?;
        holes.push(points(&mut lines, c[0], &format!("hole {}", h + 1))?);
    }
    let mut guards = None;
    if lines.peek().is_some() {
        let (_, c) = header(&mut lines, "guards", 1, "guards header")?;
        guards = Some(points(&mut lines, c[0], "guards")?);
    }
    if let Some(&(ln, line)) = lines.peek() {
        return Err(perr(ln, 1, format!("unexpected trailing content '{}'", line.trim())));
    }
    let polygon = PolygonWithHoles::new(outer, holes).map_err(|e| match e {
        Error::Input(m) => perr(ln, 1, m),
        other => other,
    })?;
    let mut inst = InstanceFile::new(polygon, guards)?;
    inst.name = name;
    inst.source = source;
    Ok(inst)
}

/// Shortest decimal that reads back as `v`.
fn decimal(v: f64) -> Rational {
    parse_rational(&format!("{v:e}")).expect("finite value")
}

/// Scales polygon and guards by `1 / (lambda * mu)`, `mu` the average edge
/// length, so the result has average edge length `1 / lambda`.
pub fn scale_instance(inst: &InstanceFile, lambda: f64) -> Result<InstanceFile> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(input(format!("lambda must be positive, got {lambda}")));
    }
    let mu = average_edge_length(&inst.polygon);
    let factor = decimal(1.0 / (lambda * mu));
    Ok(InstanceFile {
        name: inst.name.clone(),
        source: inst.source.clone(),
        polygon: scale(&inst.polygon, &factor)?,
        guards: inst.guards.as_ref().map(|g| g.iter().map(|p| p.scale(&factor)).collect()),
    })
}

fn q(v: f64) -> Rational {
    decimal(v)
}

fn pq(x: f64, y: f64) -> PointQ {
    Point::new(q(x), q(y))
}

/// Default bend height for a spike: 1% of the spike width.
pub const SPIKE_BEND: f64 = 0.002;
pub const SPIKE_WIDTH: f64 = 0.2;

/// Unit-height body `[-1/2, 0] x [0, 1]` with a horizontal spike of length
/// `s` and width 0.2 at mid height. The lower spike edge rises by `bend` at
/// `x = s/2`, a reflex vertex. Guards: the upper spike corner at the body,
/// then the reflex vertex.
pub fn generate_spike(s: f64, bend: f64) -> Result<InstanceFile> {
    if !(s > 2.0) || !s.is_finite() {
        return Err(input(format!("spike length must exceed 2, got {s}")));
    }
    if !(bend > 0.0 && bend < SPIKE_WIDTH / 2.0) {
        return Err(input(format!("bend must lie in (0, {}), got {bend}", SPIKE_WIDTH / 2.0)));
    }
    let lo = 0.5 - SPIKE_WIDTH / 2.0;
    let hi = 0.5 + SPIKE_WIDTH / 2.0;
    let outer = vec![
        pq(-0.5, 0.0),
        pq(0.0, 0.0),
        pq(0.0, lo),
        pq(s / 2.0, lo + bend),
        pq(s, lo),
        pq(s, hi),
        pq(0.0, hi),
        pq(0.0, 1.0),
        pq(-0.5, 1.0),
    ];
    let guards = vec![pq(0.0, hi), pq(s / 2.0, lo + bend)];
    Ok(InstanceFile::new(PolygonWithHoles::simple(outer)?, Some(guards))?
        .with_name(format!("spike-{s}"))
        .with_source("generated"))
}

/// Regular `n`-gon around the origin with vertex guards. Coordinates are
/// rounded to a `1e-12` grid.
pub fn generate_convex(n: usize, radius: f64) -> Result<InstanceFile> {
    if n < 3 {
        return Err(input(format!("a convex polygon needs at least 3 vertices, got {n}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(input(format!("radius must be positive, got {radius}")));
    }
    let grid = |v: f64| Rational::new(((v * 1e12).round() as i64).into(), 1_000_000_000_000i64.into());
    let outer = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            Point::new(grid(radius * t.cos()), grid(radius * t.sin()))
        })
        .collect();
    Ok(InstanceFile::new(PolygonWithHoles::simple(outer)?, None)?
        .with_name(format!("convex-{n}"))
        .with_source("generated"))
}

/// Orthogonal comb: base `[0, 2k-1] x [0, 1]` with `k` teeth of width 1 and
/// height 3 separated by unit gaps; vertex guards.
pub fn generate_comb(teeth: usize) -> Result<InstanceFile> {
    if teeth == 0 {
        return Err(input("a comb needs at least one tooth"));
    }
    let w = 2.0 * teeth as f64 - 1.0;
    let mut outer = vec![pq(0.0, 0.0), pq(w, 0.0)];
    for i in (0..teeth).rev() {
        let x0 = 2.0 * i as f64;
        outer.push(pq(x0 + 1.0, 4.0));
        outer.push(pq(x0, 4.0));
        if i > 0 {
            outer.push(pq(x0, 1.0));
            outer.push(pq(x0 - 1.0, 1.0));
        }
    }
    Ok(InstanceFile::new(PolygonWithHoles::simple(outer)?, None)?
        .with_name(format!("comb-{teeth}"))
        .with_source("generated"))
}

/// Floating copy of an instance for the float kernel.
pub fn to_f64_instance(inst: &InstanceFile) -> (PolygonWithHoles<f64>, Vec<Point<f64>>) {
    (inst.polygon.cast(), inst.guard_candidates().iter().map(|g| g.cast::<f64>()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "polygon 4 0\n0 0\n1 0\n1 1\n0 1\n";

    #[test]
    fn square_defaults_to_vertex_guards() {
        let inst = InstanceFile::parse(SQUARE).unwrap();
        assert_eq!(inst.guard_candidates().len(), 4);
        assert_eq!(inst.serialize(), SQUARE);
    }

    #[test]
    fn hole_is_kept_clockwise() {
        let text = "# name: ring\npolygon 4 1\n0 0\n4 0\n4 4\n0 4\nhole 4\n1 1\n1 3\n3 3\n3 1\nguards 1\n1/2 0.5\n";
        let inst = InstanceFile::parse(text).unwrap();
        assert_eq!(inst.name.as_deref(), Some("ring"));
        assert!(crate::geom::signed_area(&inst.polygon.holes()[0]).unwrap() < Rational::from_integer(0.into()));
        assert!(inst.serialize().ends_with("guards 1\n0.5 0.5\n"));
    }

    #[test]
    fn truncated_file_names_section() {
        let err = InstanceFile::parse("polygon 4 1\n0 0\n4 0\n4 4\n0 4\n").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 6);
                assert!(message.contains("hole 1"), "{message}");
            }
            e => panic!("{e:?}"),
        }
        let err = InstanceFile::parse("polygon 4 0\n0 0\n1 x\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, column: 3, message: "invalid number 'x'".into() });
    }

    #[test]
    fn scaling_sets_average_edge() {
        let inst = InstanceFile::parse(SQUARE).unwrap();
        let s = scale_instance(&inst, 2.0).unwrap();
        assert_eq!(s.polygon.outer()[2], pq(0.5, 0.5));
        let comb = generate_comb(3).unwrap();
        for l in [0.2, 0.5, 1.0, 2.0] {
            let mu = average_edge_length(&scale_instance(&comb, l).unwrap().polygon);
            assert!((mu * l - 1.0).abs() < 1e-12);
        }
        assert!(scale_instance(&inst, 0.0).is_err());
    }

    #[test]
    fn generators_are_valid() {
        let comb = generate_comb(4).unwrap();
        assert_eq!(comb.polygon.vertex_count(), 16);
        assert_eq!(comb.polygon.area(), Rational::from_integer(19.into()));
        let conv = generate_convex(12, 0.5).unwrap();
        assert_eq!(conv.polygon.vertex_count(), 12);
        let spike = generate_spike(100.0, SPIKE_BEND).unwrap();
        assert_eq!(spike.guard_candidates().len(), 2);
        let back = InstanceFile::parse(&spike.serialize()).unwrap();
        assert_eq!(back, spike);
    }
}
