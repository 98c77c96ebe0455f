//! Incremental Delaunay triangulation in 2D and 3D.
//!
//! Bowyer-Watson insertion over a triangulation closed off by "ghost" cells
//! that join each convex-hull facet to a vertex at infinity. Point location
//! is a visibility walk from the most recently created cell. All geometric
//! decisions use Shewchuk's adaptive exact predicates, so the result is a
//! true Delaunay triangulation of the floating-point input.
//!
//! Points are inserted in index order and a cell is in conflict with a new
//! point only if the point lies strictly inside its circumsphere. Cocircular
//! and cospherical configurations are therefore resolved deterministically
//! by the vertex indices.

use std::collections::HashMap;

use robust::{Coord, Coord3D};

use super::{PointPattern, Simplex};
use crate::error::{Error, Result};

const GHOST: u32 = u32::MAX;
const NO_CELL: usize = usize::MAX;
const KEY_PAD: u32 = u32::MAX - 1;

#[derive(Clone, Debug)]
struct Cell {
    verts: [u32; 4],
    /// `nbrs[i]` is the cell across the facet opposite `verts[i]`.
    nbrs: [usize; 4],
    alive: bool,
}

struct Triangulation<'a> {
    pattern: &'a PointPattern,
    dim: usize,
    cells: Vec<Cell>,
    free: Vec<usize>,
    last: usize,
    marks: Vec<u32>,
    stamp: u32,
}

/// Top-dimensional simplices of the Delaunay triangulation of `pattern`,
/// sorted by vertex tuple.
pub fn delaunay(pattern: &PointPattern) -> Result<Vec<Simplex>> {
    let tri = Triangulation::build(pattern)?;
    let d = tri.dim;
    let mut out: Vec<Simplex> = tri
        .cells
        .iter()
        .filter(|c| c.alive && !c.verts[..=d].contains(&GHOST))
        .map(|c| Simplex::new(&c.verts[..=d]).expect("cell vertices are distinct"))
        .collect();
    out.sort_unstable();
    Ok(out)
}

fn check_duplicates(pattern: &PointPattern) -> Result<()> {
    let mut order: Vec<usize> = (0..pattern.len()).collect();
    let cmp = |a: &usize, b: &usize| {
        pattern
            .point(*a)
            .iter()
            .zip(pattern.point(*b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    order.sort_by(cmp);
    for w in order.windows(2) {
        if cmp(&w[0], &w[1]).is_eq() {
            return Err(Error::DuplicatePoints(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

impl<'a> Triangulation<'a> {
    fn build(pattern: &'a PointPattern) -> Result<Self> {
        let dim = pattern.dim();
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if pattern.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_duplicates(pattern)?;
        let mut tri = Self { pattern, dim, cells: Vec::new(), free: Vec::new(), last: 0, marks: Vec::new(), stamp: 0 };
        let seed = tri.initial_vertices().ok_or(Error::DegenerateInput)?;
        tri.init_simplex(&seed);
        for i in 0..pattern.len() as u32 {
            if !seed.contains(&i) {
                tri.insert(i);
            }
        }
        Ok(tri)
    }

    fn pt(&self, v: u32) -> &[f64] {
        self.pattern.point(v as usize)
    }

    /// First `dim + 1` affinely independent points in index order.
    fn initial_vertices(&self) -> Option<Vec<u32>> {
        let n = self.pattern.len() as u32;
        let mut chosen = vec![0u32];
        // Points are distinct, so any second point works.
        if n < 2 {
            return None;
        }
        chosen.push(1);
        let independent = |chosen: &[u32], c: u32| -> bool {
            let p = self.pt(c);
            match (self.dim, chosen.len()) {
                (2, 2) => orient2(self.pt(chosen[0]), self.pt(chosen[1]), p) != 0.0,
                (3, 2) => {
                    let (a, b) = (self.pt(chosen[0]), self.pt(chosen[1]));
                    // Collinear in 3D iff collinear in every coordinate projection.
                    [(0, 1), (1, 2), (0, 2)]
                        .iter()
                        .any(|&(i, j)| orient2(&[a[i], a[j]], &[b[i], b[j]], &[p[i], p[j]]) != 0.0)
                }
                (3, 3) => orient3(self.pt(chosen[0]), self.pt(chosen[1]), self.pt(chosen[2]), p) != 0.0,
                _ => unreachable!(),
            }
        };
        while chosen.len() <= self.dim {
            let next = (2..n).find(|&c| !chosen.contains(&c) && independent(&chosen, c))?;
            chosen.push(next);
        }
        Some(chosen)
    }

    fn init_simplex(&mut self, seed: &[u32]) {
        let d = self.dim;
        let mut verts = [0u32; 4];
        verts[..=d].copy_from_slice(seed);
        let real = self.alloc(verts);
        let ghosts: Vec<usize> = (0..=d)
            .map(|i| {
                let mut g = verts;
                g[i] = GHOST;
                self.alloc(g)
            })
            .collect();
        for i in 0..=d {
            self.cells[real].nbrs[i] = ghosts[i];
            for j in 0..=d {
                self.cells[ghosts[i]].nbrs[j] = if i == j { real } else { ghosts[j] };
            }
        }
        self.last = real;
    }

    fn alloc(&mut self, verts: [u32; 4]) -> usize {
        let cell = Cell { verts, nbrs: [NO_CELL; 4], alive: true };
        if let Some(slot) = self.free.pop() {
            self.cells[slot] = cell;
            slot
        } else {
            self.cells.push(cell);
            self.marks.push(0);
            self.cells.len() - 1
        }
    }

    /// Sign of the orientation of `facet` (dim vertices) followed by `p`.
    fn orient_facet(&self, facet: &[u32], p: &[f64]) -> f64 {
        match self.dim {
            2 => orient2(self.pt(facet[0]), self.pt(facet[1]), p),
            _ => orient3(self.pt(facet[0]), self.pt(facet[1]), self.pt(facet[2]), p),
        }
    }

    /// Whether `p` lies strictly inside the circumsphere of a finite cell.
    fn in_sphere(&self, verts: &[u32], p: &[f64]) -> bool {
        match self.dim {
            2 => {
                let (a, b, c) = (self.pt(verts[0]), self.pt(verts[1]), self.pt(verts[2]));
                let o = orient2(a, b, c);
                let s = robust::incircle(c2(a), c2(b), c2(c), c2(p));
                o * s > 0.0
            }
            _ => {
                let (a, b, c, d) = (self.pt(verts[0]), self.pt(verts[1]), self.pt(verts[2]), self.pt(verts[3]));
                let o = orient3(a, b, c, d);
                let s = robust::insphere(c3(a), c3(b), c3(c), c3(d), c3(p));
                o * s > 0.0
            }
        }
    }

    fn facet_without(&self, cell: usize, skip: usize) -> ([u32; 3], usize) {
        let mut f = [0u32; 3];
        let mut k = 0;
        for (i, v) in self.cells[cell].verts[..=self.dim].iter().enumerate() {
            if i != skip {
                f[k] = *v;
                k += 1;
            }
        }
        (f, k)
    }

    fn conflicts(&self, cell: usize, p: &[f64]) -> bool {
        let d = self.dim;
        let c = &self.cells[cell];
        match c.verts[..=d].iter().position(|&v| v == GHOST) {
            None => self.in_sphere(&c.verts[..=d], p),
            Some(g) => {
                let (facet, k) = self.facet_without(cell, g);
                let facet = &facet[..k];
                let real = c.nbrs[g];
                let apex = *self.cells[real].verts[..=d]
                    .iter()
                    .find(|v| !facet.contains(v))
                    .expect("real neighbour has an apex");
                let op = self.orient_facet(facet, p);
                if op != 0.0 {
                    op.signum() != self.orient_facet(facet, self.pt(apex)).signum()
                } else {
                    self.in_sphere(&self.cells[real].verts[..=d], p)
                }
            }
        }
    }

    /// Visibility walk to a cell in conflict with `p`.
    fn locate(&self, p: &[f64]) -> usize {
        let d = self.dim;
        let limit = 4 * self.cells.len() + 16;
        let mut cell = self.last;
        for step in 0..limit {
            let c = &self.cells[cell];
            if let Some(g) = c.verts[..=d].iter().position(|&v| v == GHOST) {
                if self.conflicts(cell, p) {
                    return cell;
                }
                cell = c.nbrs[g];
                continue;
            }
            let mut next = None;
            for t in 0..=d {
                let i = (t + step) % (d + 1);
                let (facet, k) = self.facet_without(cell, i);
                let op = self.orient_facet(&facet[..k], p);
                if op == 0.0 {
                    continue;
                }
                let ov = self.orient_facet(&facet[..k], self.pt(c.verts[i]));
                if op.signum() != ov.signum() {
                    next = Some(c.nbrs[i]);
                    break;
                }
            }
            match next {
                Some(n) => cell = n,
                None if self.conflicts(cell, p) => return cell,
                None => break,
            }
        }
        (0..self.cells.len())
            .find(|&c| self.cells[c].alive && self.conflicts(c, p))
            .expect("some cell conflicts with a new distinct point")
    }

    fn insert(&mut self, idx: u32) {
        let d = self.dim;
        let p = self.pattern.point(idx as usize);
        let start = self.locate(p);

        self.stamp += 1;
        let stamp = self.stamp;
        self.marks[start] = stamp;
        let mut cavity = vec![start];
        let mut head = 0;
        while head < cavity.len() {
            let c = cavity[head];
            head += 1;
            for i in 0..=d {
                let n = self.cells[c].nbrs[i];
                if self.marks[n] != stamp && self.conflicts(n, p) {
                    self.marks[n] = stamp;
                    cavity.push(n);
                }
            }
        }

        let mut created = Vec::new();
        for &c in &cavity {
            for i in 0..=d {
                let outside = self.cells[c].nbrs[i];
                if self.marks[outside] == stamp {
                    continue;
                }
                let mut verts = self.cells[c].verts;
                verts[i] = idx;
                let nc = self.alloc(verts);
                self.cells[nc].nbrs[i] = outside;
                let back = self.cells[outside].nbrs[..=d].iter().position(|&x| x == c).expect("adjacency is symmetric");
                self.cells[outside].nbrs[back] = nc;
                created.push(nc);
            }
        }

        let mut ridges: HashMap<[u32; 3], (usize, usize)> = HashMap::with_capacity(created.len() * d);
        for &nc in &created {
            for j in 0..=d {
                if self.cells[nc].verts[j] == idx {
                    continue;
                }
                let (facet, k) = self.facet_without(nc, j);
                let mut key = [KEY_PAD; 3];
                key[..k].copy_from_slice(&facet[..k]);
                key[..k].sort_unstable();
                if let Some((other, oj)) = ridges.remove(&key) {
                    self.cells[nc].nbrs[j] = other;
                    self.cells[other].nbrs[oj] = nc;
                } else {
                    ridges.insert(key, (nc, j));
                }
            }
        }
        debug_assert!(ridges.is_empty(), "cavity boundary is a closed surface");

        for &c in &cavity {
            self.cells[c].alive = false;
            self.free.push(c);
        }
        self.last =
            created.iter().copied().find(|&c| !self.cells[c].verts[..=d].contains(&GHOST)).unwrap_or(created[0]);
    }
}

fn c2(p: &[f64]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn c3(p: &[f64]) -> Coord3D<f64> {
    Coord3D { x: p[0], y: p[1], z: p[2] }
}

fn orient2(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    robust::orient2d(c2(a), c2(b), c2(c))
}

fn orient3(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    robust::orient3d(c3(a), c3(b), c3(c), c3(d))
}
