//! Four-connected grid graphs.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Dense id of a passable cell.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Vertex(pub u32);

impl Vertex {
    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("grid of {width}x{height} needs {expected} cells, got {actual}")]
    SizeMismatch {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("row {row} has width {actual}, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("unknown glyph {glyph:?} at row {row}, column {col}")]
    UnknownGlyph { glyph: char, row: usize, col: usize },
}

const NO_VERTEX: u32 = u32::MAX;

/// A rectangular grid with its passable cells numbered densely in row-major order.
///
/// Adjacency is stored in compressed form. Each vertex lists its neighbors in
/// ascending cell index, i.e. up, left, right, down.
#[derive(Clone)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_to_vertex: Vec<u32>,
    vertex_to_cell: Vec<u32>,
    adj_offsets: Vec<u32>,
    adj: Vec<Vertex>,
    component: Vec<u32>,
}

impl fmt::Debug for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridMap")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("vertices", &self.num_vertices())
            .finish()
    }
}

impl GridMap {
    /// Builds a map from a row-major passability mask.
    pub fn new(width: usize, height: usize, passable: &[bool]) -> Result<Self, MapError> {
        if passable.len() != width * height {
            return Err(MapError::SizeMismatch {
                width,
                height,
                expected: width * height,
                actual: passable.len(),
            });
        }
        let mut cell_to_vertex = vec![NO_VERTEX; width * height];
        let mut vertex_to_cell = Vec::new();
        for (cell, &open) in passable.iter().enumerate() {
            if open {
                cell_to_vertex[cell] = vertex_to_cell.len() as u32;
                vertex_to_cell.push(cell as u32);
            }
        }

        let mut adj_offsets = Vec::with_capacity(vertex_to_cell.len() + 1);
        let mut adj = Vec::with_capacity(vertex_to_cell.len() * 4);
        adj_offsets.push(0);
        for &cell in &vertex_to_cell {
            let cell = cell as usize;
            let (x, y) = (cell % width, cell / width);
            let mut push = |c: usize| {
                let v = cell_to_vertex[c];
                if v != NO_VERTEX {
                    adj.push(Vertex(v));
                }
            };
            if y > 0 {
                push(cell - width);
            }
            if x > 0 {
                push(cell - 1);
            }
            if x + 1 < width {
                push(cell + 1);
            }
            if y + 1 < height {
                push(cell + width);
            }
            adj_offsets.push(adj.len() as u32);
        }

        let mut map = GridMap {
            width,
            height,
            cell_to_vertex,
            vertex_to_cell,
            adj_offsets,
            adj,
            component: Vec::new(),
        };
        map.component = map.label_components();
        Ok(map)
    }

    /// Builds a map from text rows where `.` is free and `@` is blocked.
    ///
    /// Meant for small hand-written grids; benchmark files have their own parser.
    pub fn from_rows(rows: &[&str]) -> Result<Self, MapError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut passable = Vec::with_capacity(width * height);
        for (row, line) in rows.iter().enumerate() {
            let len = line.chars().count();
            if len != width {
                return Err(MapError::RaggedRow {
                    row,
                    expected: width,
                    actual: len,
                });
            }
            for (col, glyph) in line.chars().enumerate() {
                match glyph {
                    '.' => passable.push(true),
                    '@' => passable.push(false),
                    _ => return Err(MapError::UnknownGlyph { glyph, row, col }),
                }
            }
        }
        Self::new(width, height, &passable)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_to_cell.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.num_vertices() as u32).map(Vertex)
    }

    pub fn is_vertex(&self, v: Vertex) -> bool {
        v.index() < self.num_vertices()
    }

    /// Vertex at column `x`, row `y`, if that cell is passable.
    pub fn vertex_at(&self, x: usize, y: usize) -> Option<Vertex> {
        if x >= self.width || y >= self.height {
            return None;
        }
        match self.cell_to_vertex[y * self.width + x] {
            NO_VERTEX => None,
            v => Some(Vertex(v)),
        }
    }

    /// `(x, y)` of a vertex.
    pub fn coords(&self, v: Vertex) -> (usize, usize) {
        let cell = self.vertex_to_cell[v.index()] as usize;
        (cell % self.width, cell / self.width)
    }

    /// Passable 4-adjacent vertices in canonical (ascending cell) order.
    ///
    /// Panics if `v` is not a vertex of this map.
    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let i = v.index();
        assert!(i < self.num_vertices(), "vertex {v:?} out of range");
        let lo = self.adj_offsets[i] as usize;
        let hi = self.adj_offsets[i + 1] as usize;
        &self.adj[lo..hi]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.neighbors(v).len()
    }

    #[inline]
    pub fn is_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.neighbors(u).contains(&v)
    }

    /// True if `u` and `v` lie in the same connected component.
    pub fn same_component(&self, u: Vertex, v: Vertex) -> bool {
        self.component[u.index()] == self.component[v.index()]
    }

    /// Hop distances from `source` to every vertex; `u32::MAX` where unreachable.
    pub fn bfs_from(&self, source: Vertex) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[source.index()] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()] + 1;
            for &w in self.neighbors(u) {
                if dist[w.index()] == u32::MAX {
                    dist[w.index()] = d;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn label_components(&self) -> Vec<u32> {
        let mut label = vec![u32::MAX; self.num_vertices()];
        let mut next = 0;
        let mut stack = Vec::new();
        for v in self.vertices() {
            if label[v.index()] != u32::MAX {
                continue;
            }
            label[v.index()] = next;
            stack.push(v);
            while let Some(u) = stack.pop() {
                for &w in self.neighbors(u) {
                    if label[w.index()] == u32::MAX {
                        label[w.index()] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(w: usize, h: usize) -> GridMap {
        GridMap::new(w, h, &vec![true; w * h]).unwrap()
    }

    #[test]
    fn interior_cell_has_four_neighbors() {
        let map = empty(8, 8);
        let v = map.vertex_at(3, 4).unwrap();
        assert_eq!(map.neighbors(v).len(), 4);
    }

    #[test]
    fn corner_cell_has_two_neighbors() {
        let map = empty(8, 8);
        assert_eq!(map.neighbors(map.vertex_at(0, 0).unwrap()).len(), 2);
        assert_eq!(map.neighbors(map.vertex_at(7, 7).unwrap()).len(), 2);
    }

    #[test]
    fn isolated_cell_has_no_neighbors() {
        let map = GridMap::from_rows(&["...", ".@@", "@.@", ".@."]).unwrap();
        let v = map.vertex_at(1, 2).unwrap();
        assert!(map.neighbors(v).is_empty());
        assert!(!map.same_component(v, map.vertex_at(0, 0).unwrap()));
    }

    #[test]
    fn neighbor_order_is_up_left_right_down() {
        let map = empty(3, 3);
        let c = map.vertex_at(1, 1).unwrap();
        let coords: Vec<_> = map.neighbors(c).iter().map(|&v| map.coords(v)).collect();
        assert_eq!(coords, vec![(1, 0), (0, 1), (2, 1), (1, 2)]);
    }

    #[test]
    fn vertex_ids_round_trip_through_cells() {
        let map = GridMap::from_rows(&[".@..", "..@.", "@..."]).unwrap();
        for v in map.vertices() {
            let (x, y) = map.coords(v);
            assert_eq!(map.vertex_at(x, y), Some(v));
        }
        assert_eq!(map.num_vertices(), 9);
        assert_eq!(map.vertex_at(1, 0), None);
    }

    #[test]
    fn two_by_two_counts() {
        let map = empty(2, 2);
        assert_eq!(map.num_vertices(), 4);
        assert_eq!(map.num_edges(), 4);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(matches!(
            GridMap::from_rows(&["...", ".."]),
            Err(MapError::RaggedRow { row: 1, .. })
        ));
    }

    #[test]
    #[should_panic]
    fn out_of_range_vertex_panics() {
        let map = empty(2, 2);
        let _ = map.neighbors(Vertex(4));
    }
}
