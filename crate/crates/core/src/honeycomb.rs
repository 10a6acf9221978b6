//! The toroidal honeycomb graph `H_{m,n}`.
//!
//! Each of the `m x n` cells carries four vertices `w1, w2, b1, b2` and six
//! edges. The cell wiring is fixed so that the Fourier block of the weighted
//! adjacency matrix (rows `w1, w2`, columns `b1, b2`) is
//!
//! ```text
//! | 1/b + b/w    a       |
//! | a z          b + w/b |
//! ```
//!
//! where `z` tracks translations in the `i` (horizontal, period `m`)
//! direction and `w` translations in the `j` (vertical, period `n`)
//! direction. Type I edges carry weight `a`, type II edges `1/b` and type
//! III edges `b`.
//!
//! The lattice is a brick wall: `w1/b1` and `w2/b2` form vertical zig-zag
//! chains, and type I edges are the rungs between consecutive chains.

use std::fmt::{self, Write as _};
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::Serialize;

use crate::enumeration::Matching;
use crate::error::{Error, Result};

/// Index of a vertex in a [`TorusGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId(pub usize);

/// Index of an edge in a [`TorusGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sublattice {
    W1,
    W2,
    B1,
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Color {
    White,
    Black,
}

impl Sublattice {
    const ALL: [Sublattice; 4] = [Sublattice::W1, Sublattice::W2, Sublattice::B1, Sublattice::B2];

    fn slot(self) -> usize {
        match self {
            Sublattice::W1 => 0,
            Sublattice::W2 => 1,
            Sublattice::B1 => 2,
            Sublattice::B2 => 3,
        }
    }

    pub fn color(self) -> Color {
        match self {
            Sublattice::W1 | Sublattice::W2 => Color::White,
            Sublattice::B1 | Sublattice::B2 => Color::Black,
        }
    }
}

/// Edge orientation class. Type I edges are the rungs between chains,
/// types II and III alternate along each chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EdgeType {
    I,
    II,
    III,
}

impl EdgeType {
    pub const ALL: [EdgeType; 3] = [EdgeType::I, EdgeType::II, EdgeType::III];

    pub fn label(self) -> &'static str {
        match self {
            EdgeType::I => "I",
            EdgeType::II => "II",
            EdgeType::III => "III",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        match label {
            "I" => Some(EdgeType::I),
            "II" => Some(EdgeType::II),
            "III" => Some(EdgeType::III),
            _ => None,
        }
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A class in `H_1(T) = Z^2`, in the basis of the horizontal and vertical
/// sides of the fundamental rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct HomologyClass {
    pub h: i64,
    pub v: i64,
}

impl HomologyClass {
    pub const ZERO: HomologyClass = HomologyClass { h: 0, v: 0 };

    pub fn new(h: i64, v: i64) -> Self {
        HomologyClass { h, v }
    }

    pub fn scale(self, s: i64) -> Self {
        HomologyClass { h: self.h * s, v: self.v * s }
    }
}

impl Add for HomologyClass {
    type Output = HomologyClass;
    fn add(self, rhs: Self) -> Self {
        HomologyClass { h: self.h + rhs.h, v: self.v + rhs.v }
    }
}

impl AddAssign for HomologyClass {
    fn add_assign(&mut self, rhs: Self) {
        self.h += rhs.h;
        self.v += rhs.v;
    }
}

impl Sub for HomologyClass {
    type Output = HomologyClass;
    fn sub(self, rhs: Self) -> Self {
        HomologyClass { h: self.h - rhs.h, v: self.v - rhs.v }
    }
}

impl Neg for HomologyClass {
    type Output = HomologyClass;
    fn neg(self) -> Self {
        HomologyClass { h: -self.h, v: -self.v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub cell: (usize, usize),
    pub sublattice: Sublattice,
}

impl Vertex {
    pub fn color(&self) -> Color {
        self.sublattice.color()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub white: VertexId,
    pub black: VertexId,
    pub kind: EdgeType,
    /// Signed crossings of the cut cycles when traversed white to black.
    pub offset: HomologyClass,
}

/// Modulus `i n / (sqrt(3) m)` of the torus, kept as the integer pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Modulus {
    pub n: usize,
    pub m: usize,
}

impl Modulus {
    /// The real number `rho` such that the modulus is `i rho`.
    pub fn rho(&self) -> f64 {
        self.n as f64 / (3f64.sqrt() * self.m as f64)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i*{}/(sqrt(3)*{})", self.n, self.m)
    }
}

// Per-cell edge slots. Endpoints are (white sublattice, black sublattice,
// cell displacement of the black end), the displacement being in the cover.
const SLOTS: [(Sublattice, Sublattice, (i64, i64), EdgeType); 6] = [
    (Sublattice::W1, Sublattice::B1, (0, 0), EdgeType::II),
    (Sublattice::W1, Sublattice::B1, (0, -1), EdgeType::III),
    (Sublattice::W1, Sublattice::B2, (0, 0), EdgeType::I),
    (Sublattice::W2, Sublattice::B1, (1, 0), EdgeType::I),
    (Sublattice::W2, Sublattice::B2, (0, 0), EdgeType::III),
    (Sublattice::W2, Sublattice::B2, (0, 1), EdgeType::II),
];

/// The quotient honeycomb graph on an `m x n` torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusGraph {
    m: usize,
    n: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incidence: Vec<[EdgeId; 3]>,
}

/// Oriented edge traversal inside a face: `+1` when walked white to black.
pub type FaceStep = (EdgeId, i64);

impl TorusGraph {
    /// Builds `H_{m,n}`. Labeling is deterministic.
    pub fn build(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSize { m, n });
        }
        let mut vertices = Vec::with_capacity(4 * m * n);
        for i in 0..m {
            for j in 0..n {
                for s in Sublattice::ALL {
                    vertices.push(Vertex { cell: (i, j), sublattice: s });
                }
            }
        }

        let mut edges = Vec::with_capacity(6 * m * n);
        for i in 0..m {
            for j in 0..n {
                for &(ws, bs, (di, dj), kind) in &SLOTS {
                    let bi = i as i64 + di;
                    let bj = j as i64 + dj;
                    let offset = HomologyClass::new(bi.div_euclid(m as i64), bj.div_euclid(n as i64));
                    let black = vertex_index(
                        m,
                        n,
                        bi.rem_euclid(m as i64) as usize,
                        bj.rem_euclid(n as i64) as usize,
                        bs,
                    );
                    edges.push(Edge {
                        white: vertex_index(m, n, i, j, ws),
                        black,
                        kind,
                        offset,
                    });
                }
            }
        }

        let mut incidence = vec![[EdgeId(usize::MAX); 3]; vertices.len()];
        for (id, e) in edges.iter().enumerate() {
            let t = e.kind as usize;
            for v in [e.white, e.black] {
                let slot = &mut incidence[v.0][t];
                assert_eq!(slot.0, usize::MAX, "vertex {} has two edges of type {}", v.0, e.kind);
                *slot = EdgeId(id);
            }
        }

        Ok(TorusGraph { m, n, vertices, edges, incidence })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Modulus {
        Modulus { n: self.n, m: self.m }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn vertex_id(&self, i: usize, j: usize, s: Sublattice) -> VertexId {
        vertex_index(self.m, self.n, i % self.m, j % self.n, s)
    }

    /// Incident edges of `v`, indexed by edge type (I, II, III).
    pub fn incident(&self, v: VertexId) -> [EdgeId; 3] {
        self.incidence[v.0]
    }

    /// The endpoint of `e` other than `v`.
    pub fn opposite(&self, e: EdgeId, v: VertexId) -> VertexId {
        let edge = &self.edges[e.0];
        if edge.white == v {
            edge.black
        } else {
            debug_assert_eq!(edge.black, v);
            edge.white
        }
    }

    /// Edge in cell `(i, j)` at per-cell slot `slot` (0..6).
    fn cell_edge(&self, i: i64, j: i64, slot: usize) -> EdgeId {
        let i = i.rem_euclid(self.m as i64) as usize;
        let j = j.rem_euclid(self.n as i64) as usize;
        EdgeId((i * self.n + j) * 6 + slot)
    }

    /// Displacement in the universal cover from the white to the black end.
    pub fn displacement(&self, e: EdgeId) -> (i64, i64) {
        SLOTS[e.0 % 6].2
    }

    /// Image of `e` under the cell translation `(di, dj)`.
    pub fn translate_edge(&self, e: EdgeId, di: i64, dj: i64) -> EdgeId {
        let cell = e.0 / 6;
        let (i, j) = (cell / self.n, cell % self.n);
        self.cell_edge(i as i64 + di, j as i64 + dj, e.0 % 6)
    }

    /// The `2mn` hexagonal faces as closed oriented walks.
    pub fn faces(&self) -> Vec<[FaceStep; 6]> {
        let mut faces = Vec::with_capacity(2 * self.m * self.n);
        for i in 0..self.m as i64 {
            for j in 0..self.n as i64 {
                // Between chain w1/b1 and chain w2/b2 of the same column.
                faces.push([
                    (self.cell_edge(i, j, 2), 1),
                    (self.cell_edge(i, j, 4), -1),
                    (self.cell_edge(i, j, 5), 1),
                    (self.cell_edge(i, j + 1, 2), -1),
                    (self.cell_edge(i, j + 1, 1), 1),
                    (self.cell_edge(i, j, 0), -1),
                ]);
                // Between chain w2/b2 and the next column's chain w1/b1.
                faces.push([
                    (self.cell_edge(i, j, 3), 1),
                    (self.cell_edge(i + 1, j + 1, 1), -1),
                    (self.cell_edge(i + 1, j + 1, 0), 1),
                    (self.cell_edge(i, j + 1, 3), -1),
                    (self.cell_edge(i, j + 1, 4), 1),
                    (self.cell_edge(i, j, 5), -1),
                ]);
            }
        }
        faces
    }

    /// Reference matching `M0`, generated by translating a fixed
    /// configuration of `H_{1,3}`: in a column of three cells, the first cell
    /// holds its two type I edges and the other two hold one type II and one
    /// type III edge each.
    pub fn reference_matching(&self) -> Result<Matching> {
        if self.n % 3 != 0 {
            return Err(Error::NotMultipleOfThree { n: self.n });
        }
        let mut edges = Vec::with_capacity(2 * self.m * self.n);
        for i in 0..self.m as i64 {
            for j in 0..self.n as i64 {
                let slots: [usize; 2] = if j % 3 == 0 { [2, 3] } else { [0, 4] };
                edges.extend(slots.iter().map(|&s| self.cell_edge(i, j, s)));
            }
        }
        Matching::from_edges(self, edges)
    }

    /// Dual cycles used to read winding numbers off edge counts.
    pub fn dual_paths(&self) -> DualPaths {
        let (m, n) = (self.m as i64, self.n as i64);
        let mut horizontal = Vec::with_capacity(2 * self.n);
        for j in 0..n {
            // Crosses the type II edges of the w1/b1 chains and the type III
            // edges of the w2/b2 chains at height j.
            let mut a = Vec::with_capacity(2 * self.m);
            // Crosses type III of w1/b1 between heights j and j+1 and type II
            // of w2/b2 at height j.
            let mut b = Vec::with_capacity(2 * self.m);
            for i in 0..m {
                a.push((self.cell_edge(i, j, 0), 1));
                a.push((self.cell_edge(i, j, 4), -1));
                b.push((self.cell_edge(i, j + 1, 1), -1));
                b.push((self.cell_edge(i, j, 5), 1));
            }
            horizontal.push(DualCycle { crossings: a });
            horizontal.push(DualCycle { crossings: b });
        }
        let mut vertical = Vec::with_capacity(2 * self.m);
        for i in 0..m {
            for slot in [2, 3] {
                vertical.push(DualCycle {
                    crossings: (0..n).map(|j| (self.cell_edge(i, j, slot), 1)).collect(),
                });
            }
        }
        DualPaths { horizontal, vertical }
    }

    /// Line-oriented serialization: `m n`, then `edge white black type h v`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.m, self.n).unwrap();
        for (id, e) in self.edges.iter().enumerate() {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                id, e.white.0, e.black.0, e.kind, e.offset.h, e.offset.v
            )
            .unwrap();
        }
        out
    }

    /// Parses the format written by [`TorusGraph::to_text`], checking every
    /// edge line against the canonical construction.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, detail: "empty input".into() })?;
        let dims: Vec<usize> = parse_fields(header, 1)?;
        if dims.len() != 2 {
            return Err(Error::Parse { line: 1, detail: "header must be `m n`".into() });
        }
        let graph = TorusGraph::build(dims[0], dims[1])?;
        let mut seen = 0;
        for (idx, line) in lines {
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(Error::Parse { line: lineno, detail: "expected 6 fields".into() });
            }
            let num = |s: &str| -> Result<i64> {
                s.parse().map_err(|_| Error::Parse { line: lineno, detail: format!("bad integer `{s}`") })
            };
            let id = num(fields[0])? as usize;
            let kind = EdgeType::parse(fields[3])
                .ok_or_else(|| Error::Parse { line: lineno, detail: format!("bad edge type `{}`", fields[3]) })?;
            let edge = graph
                .edges
                .get(id)
                .ok_or_else(|| Error::Parse { line: lineno, detail: format!("edge id {id} out of range") })?;
            let parsed = Edge {
                white: VertexId(num(fields[1])? as usize),
                black: VertexId(num(fields[2])? as usize),
                kind,
                offset: HomologyClass::new(num(fields[4])?, num(fields[5])?),
            };
            if parsed != *edge || id != seen {
                return Err(Error::Parse { line: lineno, detail: format!("edge {id} does not match H_{{{},{}}}", graph.m, graph.n) });
            }
            seen += 1;
        }
        if seen != graph.edges.len() {
            return Err(Error::Parse {
                line: seen + 2,
                detail: format!("expected {} edges, found {seen}", graph.edges.len()),
            });
        }
        Ok(graph)
    }
}

fn vertex_index(_m: usize, n: usize, i: usize, j: usize, s: Sublattice) -> VertexId {
    VertexId((i * n + j) * 4 + s.slot())
}

fn parse_fields(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Parse { line: lineno, detail: format!("bad integer `{s}`") }))
        .collect()
}

/// A closed cycle of the dual graph, given by the primal edges it crosses and
/// the sign of a white-to-black traversal of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCycle {
    pub crossings: Vec<(EdgeId, i64)>,
}

impl DualCycle {
    /// Signed flux of a matching through this cycle.
    pub fn flux(&self, matching: &Matching) -> i64 {
        self.crossings
            .iter()
            .filter(|(e, _)| matching.contains(*e))
            .map(|(_, s)| s)
            .sum()
    }
}

/// The `2n` left-to-right and `2m` top-to-bottom dual cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPaths {
    pub horizontal: Vec<DualCycle>,
    pub vertical: Vec<DualCycle>,
}
