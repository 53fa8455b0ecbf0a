//! Online vertex enumeration of the dual outer approximation.
//!
//! The polyhedron lives in `(w̄_1, …, w̄_{d-1}, a)`-space. It is bounded by the
//! simplex constraints on `w̄` and by support inequalities
//! `a <= λ(w̄)ᵀy` from outcome points `y`; it is unbounded in the `-a`
//! direction. Vertices are kept together with their incident halfspaces
//! and adjacency, and each cut updates them incrementally: vertices violating
//! the cut are removed and new ones are created where the cut crosses an
//! edge or one of the vertical rays hanging from the simplex corners.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::linalg;

/// Absolute on-plane tolerance.
pub const TOL_GEOM: f64 = 1e-7;
/// Vertices closer than this (infinity norm) are merged.
pub const TOL_MERGE: f64 = 1e-9;

pub type VertexId = usize;
pub type HalfspaceId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("support halfspace must bound `a` from above (h > 0)")]
    DegenerateSupport,
    #[error("cut is redundant: no vertex violates it")]
    CutIsRedundant,
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("halfspace has dimension {got}, polyhedron has {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum HalfspaceOrigin {
    SimplexBound,
    SupportFromPoint(Vec<f64>),
}

/// `g·w̄ + h·a <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualHalfspace {
    pub g: Vec<f64>,
    pub h: f64,
    pub rhs: f64,
    pub origin: HalfspaceOrigin,
}

impl DualHalfspace {
    /// `a <= Σ_{i<d} w̄_i y_i + (1 - Σ_{i<d} w̄_i) y_d`, valid for every point of
    /// the lower image because `y` is attainable.
    pub fn support(y: &[f64]) -> Self {
        let d = y.len();
        let yd = y[d - 1];
        Self {
            g: y[..d - 1].iter().map(|&yi| -(yi - yd)).collect(),
            h: 1.0,
            rhs: yd,
            origin: HalfspaceOrigin::SupportFromPoint(y.to_vec()),
        }
    }

    /// The `d - 1` bounds `w̄_i >= 0` followed by `Σ w̄_i <= 1`.
    pub fn simplex_bounds(d: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (0..d - 1)
            .map(|i| {
                let mut g = vec![0.0; d - 1];
                g[i] = -1.0;
                Self {
                    g,
                    h: 0.0,
                    rhs: 0.0,
                    origin: HalfspaceOrigin::SimplexBound,
                }
            })
            .collect();
        out.push(Self {
            g: vec![1.0; d - 1],
            h: 0.0,
            rhs: 1.0,
            origin: HalfspaceOrigin::SimplexBound,
        });
        out
    }

    pub fn dim(&self) -> usize {
        self.g.len() + 1
    }

    /// Signed slack: positive means `coords` violates the halfspace.
    pub fn excess(&self, coords: &[f64]) -> f64 {
        let (wbar, a) = coords.split_at(self.g.len());
        linalg::dot(&self.g, wbar) + self.h * a[0] - self.rhs
    }

    pub fn normal(&self) -> Vec<f64> {
        let mut n = self.g.clone();
        n.push(self.h);
        n
    }

    pub fn is_vertical(&self) -> bool {
        self.h == 0.0
    }

    pub fn support_point(&self) -> Option<&[f64]> {
        match &self.origin {
            HalfspaceOrigin::SupportFromPoint(y) => Some(y),
            HalfspaceOrigin::SimplexBound => None,
        }
    }

    fn same_as(&self, other: &Self) -> bool {
        let n1 = self.normal();
        let n2 = other.normal();
        let s1 = n1.iter().fold(self.rhs.abs(), |m, v| m.max(v.abs()));
        let s2 = n2.iter().fold(other.rhs.abs(), |m, v| m.max(v.abs()));
        s1 > 0.0
            && s2 > 0.0
            && n1.iter().zip(&n2).all(|(a, b)| (a / s1 - b / s2).abs() <= 1e-12)
            && (self.rhs / s1 - other.rhs / s2).abs() <= 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualVertex {
    /// `(w̄, a)`.
    pub coords: Vec<f64>,
    pub visited: bool,
    pub incident: BTreeSet<HalfspaceId>,
    pub neighbors: BTreeSet<VertexId>,
    /// True when `w̄` is a corner of the simplex, so an unbounded edge hangs below.
    pub has_ray: bool,
}

impl DualVertex {
    pub fn wbar(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }

    pub fn a(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomTolerances {
    pub geom: f64,
    pub merge: f64,
}

impl Default for GeomTolerances {
    fn default() -> Self {
        Self {
            geom: TOL_GEOM,
            merge: TOL_MERGE,
        }
    }
}

/// H- and V-representation of the current outer approximation.
#[derive(Debug, Clone)]
pub struct DualPolyhedron {
    dim: usize,
    halfspaces: Vec<DualHalfspace>,
    vertices: BTreeMap<VertexId, DualVertex>,
    next_id: VertexId,
    tol: GeomTolerances,
    degeneracy_events: usize,
}

struct Pending {
    coords: Vec<f64>,
    incident: BTreeSet<HalfspaceId>,
    neighbors: BTreeSet<VertexId>,
    has_ray: bool,
}

impl DualPolyhedron {
    /// Simplex bounds plus one support halfspace; vertices sit above the
    /// `d` corners of the weight simplex.
    pub fn init(d: usize, first_support: DualHalfspace) -> Result<Self, GeometryError> {
        Self::init_with_tolerances(d, first_support, GeomTolerances::default())
    }

    pub fn init_with_tolerances(
        d: usize,
        first_support: DualHalfspace,
        tol: GeomTolerances,
    ) -> Result<Self, GeometryError> {
        if first_support.dim() != d || d < 2 {
            return Err(GeometryError::Dimension {
                expected: d,
                got: first_support.dim(),
            });
        }
        if first_support.h <= tol.geom || !matches!(first_support.origin, HalfspaceOrigin::SupportFromPoint(_)) {
            return Err(GeometryError::DegenerateSupport);
        }
        let mut halfspaces = DualHalfspace::simplex_bounds(d);
        let support_id = halfspaces.len();
        halfspaces.push(first_support);
        let mut poly = Self {
            dim: d,
            halfspaces,
            vertices: BTreeMap::new(),
            next_id: 0,
            tol,
            degeneracy_events: 0,
        };
        for corner in 0..d {
            let mut wbar = vec![0.0; d - 1];
            if corner > 0 {
                wbar[corner - 1] = 1.0;
            }
            let s = &poly.halfspaces[support_id];
            let a = (s.rhs - linalg::dot(&s.g, &wbar)) / s.h;
            let mut coords = wbar;
            coords.push(a);
            let incident: BTreeSet<_> = (0..=support_id)
                .filter(|&h| poly.halfspaces[h].excess(&coords).abs() <= tol.geom)
                .collect();
            poly.insert_vertex(Pending {
                coords,
                incident,
                neighbors: BTreeSet::new(),
                has_ray: true,
            });
        }
        let ids: Vec<_> = poly.vertices.keys().copied().collect();
        for (k, &p) in ids.iter().enumerate() {
            for &q in &ids[k + 1..] {
                if poly.adjacent(p, q) {
                    poly.link(p, q);
                }
            }
        }
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[DualHalfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &DualVertex)> {
        self.vertices.iter().map(|(&id, v)| (id, v))
    }

    pub fn vertex(&self, id: VertexId) -> Option<&DualVertex> {
        self.vertices.get(&id)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of vertex pairs stored as adjacent.
    pub fn num_edges(&self) -> usize {
        self.vertices.values().map(|v| v.neighbors.len()).sum::<usize>() / 2
    }

    /// Near-coincident vertex merges observed so far.
    pub fn degeneracy_events(&self) -> usize {
        self.degeneracy_events
    }

    pub fn tolerances(&self) -> GeomTolerances {
        self.tol
    }

    /// Highest unvisited vertex; ties in `a` go to the lexicographically
    /// smallest `w̄`.
    pub fn unvisited(&self) -> Option<(VertexId, &DualVertex)> {
        self.vertices
            .iter()
            .filter(|(_, v)| !v.visited)
            .min_by(|(_, u), (_, v)| {
                let (au, av) = (u.a(), v.a());
                if (au - av).abs() <= 1e-12 * (1.0 + au.abs().max(av.abs())) {
                    u.wbar()
                        .iter()
                        .zip(v.wbar())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                } else {
                    av.total_cmp(&au)
                }
            })
            .map(|(&id, v)| (id, v))
    }

    pub fn mark_visited(&mut self, id: VertexId) {
        if let Some(v) = self.vertices.get_mut(&id) {
            v.visited = true;
        }
    }

    /// Intersects the polyhedron with `hs`, returning the ids of the new vertices.
    ///
    /// The update is transactional: on error the polyhedron is unchanged.
    pub fn cut(&mut self, hs: DualHalfspace) -> Result<Vec<VertexId>, GeometryError> {
        if hs.dim() != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: hs.dim(),
            });
        }
        if self.halfspaces.iter().any(|h| h.same_as(&hs)) {
            return Err(GeometryError::CutIsRedundant);
        }
        let tol = self.tol.geom;
        let excess: BTreeMap<VertexId, f64> =
            self.vertices.iter().map(|(&id, v)| (id, hs.excess(&v.coords))).collect();
        let violated: BTreeSet<VertexId> = excess.iter().filter(|(_, &e)| e > tol).map(|(&id, _)| id).collect();
        if violated.is_empty() {
            return Err(GeometryError::CutIsRedundant);
        }
        let tight: BTreeSet<VertexId> = excess
            .iter()
            .filter(|(_, &e)| e.abs() <= tol)
            .map(|(&id, _)| id)
            .collect();
        let new_hs = self.halfspaces.len();

        let mut pending: Vec<Pending> = Vec::new();
        for &u in &violated {
            let vu = &self.vertices[&u];
            let eu = excess[&u];
            for &v in &vu.neighbors {
                let ev = excess[&v];
                if ev >= -tol {
                    continue;
                }
                let vv = &self.vertices[&v];
                let t = eu / (eu - ev);
                let coords: Vec<f64> = vu.coords.iter().zip(&vv.coords).map(|(a, b)| a + t * (b - a)).collect();
                let mut incident: BTreeSet<_> = vu.incident.intersection(&vv.incident).copied().collect();
                incident.insert(new_hs);
                pending.push(Pending {
                    coords,
                    incident,
                    neighbors: BTreeSet::from([v]),
                    has_ray: false,
                });
            }
            if vu.has_ray && hs.h > 0.0 {
                let mut coords = vu.coords.clone();
                *coords.last_mut().unwrap() -= eu / hs.h;
                let mut incident: BTreeSet<_> = vu
                    .incident
                    .iter()
                    .copied()
                    .filter(|&h| self.halfspaces[h].is_vertical())
                    .collect();
                incident.insert(new_hs);
                pending.push(Pending {
                    coords,
                    incident,
                    neighbors: BTreeSet::new(),
                    has_ray: true,
                });
            }
        }

        // Merge near-coincident new vertices.
        let mut merged: Vec<Pending> = Vec::with_capacity(pending.len());
        let mut merges = 0;
        for p in pending {
            if let Some(q) = merged
                .iter_mut()
                .find(|q| linalg::max_abs_diff(&q.coords, &p.coords) <= self.tol.merge)
            {
                q.incident.extend(p.incident);
                q.neighbors.extend(p.neighbors);
                q.has_ray |= p.has_ray;
                merges += 1;
            } else {
                merged.push(p);
            }
        }
        // A new vertex on top of a kept tight vertex collapses into it.
        let mut absorbed: Vec<(VertexId, Pending)> = Vec::new();
        let mut fresh: Vec<Pending> = Vec::with_capacity(merged.len());
        for p in merged {
            let host = tight
                .iter()
                .find(|&&t| linalg::max_abs_diff(&self.vertices[&t].coords, &p.coords) <= self.tol.merge);
            match host {
                Some(&t) => {
                    merges += 1;
                    absorbed.push((t, p));
                }
                None => fresh.push(p),
            }
        }
        let merged = fresh;

        // Certify before committing.
        let mut all = self.halfspaces.clone();
        all.push(hs);
        for p in &merged {
            if let Some(h) = all.iter().position(|h| h.excess(&p.coords) > tol) {
                return Err(GeometryError::NumericalDegeneracy(format!(
                    "new vertex {:?} violates halfspace {h}",
                    p.coords
                )));
            }
            let normals: Vec<Vec<f64>> = p.incident.iter().map(|&h| all[h].normal()).collect();
            if linalg::rank(&normals, 1e-9) < self.dim {
                return Err(GeometryError::NumericalDegeneracy(format!(
                    "new vertex {:?} is not determined by its incident halfspaces",
                    p.coords
                )));
            }
        }
        if merged.is_empty() && violated.len() == self.vertices.len() && tight.is_empty() {
            return Err(GeometryError::NumericalDegeneracy("cut empties the polyhedron".into()));
        }

        // Commit.
        self.halfspaces = all;
        self.degeneracy_events += merges;
        for &u in &violated {
            let vu = self.vertices.remove(&u).expect("violated vertex exists");
            for n in vu.neighbors {
                if let Some(v) = self.vertices.get_mut(&n) {
                    v.neighbors.remove(&u);
                }
            }
        }
        for &t in &tight {
            self.vertices.get_mut(&t).unwrap().incident.insert(new_hs);
        }
        for (t, p) in absorbed {
            let v = self.vertices.get_mut(&t).unwrap();
            v.incident.extend(p.incident);
            v.has_ray |= p.has_ray;
            let neighbors: Vec<_> = p.neighbors.into_iter().filter(|&n| n != t).collect();
            for n in neighbors {
                self.link(t, n);
            }
        }
        let mut new_ids = Vec::with_capacity(merged.len());
        for p in merged {
            let neighbors: Vec<_> = p.neighbors.iter().copied().collect();
            let id = self.insert_vertex(Pending {
                neighbors: BTreeSet::new(),
                ..p
            });
            for n in neighbors {
                self.link(id, n);
            }
            new_ids.push(id);
        }

        // Edges inside the new face.
        let face: Vec<VertexId> = new_ids.iter().chain(&tight).copied().collect();
        for (k, &p) in face.iter().enumerate() {
            for &q in &face[k + 1..] {
                if !self.vertices[&p].neighbors.contains(&q) && self.adjacent(p, q) {
                    self.link(p, q);
                }
            }
        }
        Ok(new_ids)
    }

    fn insert_vertex(&mut self, p: Pending) -> VertexId {
        let id = self.next_id;
        self.next_id += 1;
        self.vertices.insert(
            id,
            DualVertex {
                coords: p.coords,
                visited: false,
                incident: p.incident,
                neighbors: p.neighbors,
                has_ray: p.has_ray,
            },
        );
        id
    }

    fn link(&mut self, p: VertexId, q: VertexId) {
        self.vertices.get_mut(&p).unwrap().neighbors.insert(q);
        self.vertices.get_mut(&q).unwrap().neighbors.insert(p);
    }

    /// Combinatorial adjacency test: the common incident halfspaces have rank
    /// `d - 1` and no third vertex lies on all of them.
    fn adjacent(&self, p: VertexId, q: VertexId) -> bool {
        let vp = &self.vertices[&p];
        let vq = &self.vertices[&q];
        let common: BTreeSet<_> = vp.incident.intersection(&vq.incident).copied().collect();
        if common.len() + 1 < self.dim {
            return false;
        }
        let normals: Vec<Vec<f64>> = common.iter().map(|&h| self.halfspaces[h].normal()).collect();
        if linalg::rank(&normals, 1e-9) + 1 != self.dim {
            return false;
        }
        !self
            .vertices
            .iter()
            .any(|(&r, v)| r != p && r != q && common.is_subset(&v.incident))
    }

    /// Vertices whose incident set contains halfspace `h`.
    pub fn vertices_on(&self, h: HalfspaceId) -> impl Iterator<Item = (VertexId, &DualVertex)> {
        self.vertices
            .iter()
            .filter(move |(_, v)| v.incident.contains(&h))
            .map(|(&id, v)| (id, v))
    }

    /// True when halfspace `h` is a facet: its tight vertices span a
    /// `(d-1)`-dimensional affine set.
    pub fn is_facet(&self, h: HalfspaceId) -> bool {
        let pts: Vec<&[f64]> = self.vertices_on(h).map(|(_, v)| v.coords.as_slice()).collect();
        pts.len() >= self.dim && linalg::affine_rank(&pts, 1e-9) + 1 >= self.dim
    }

    /// Plain-text dump, one halfspace or vertex per line.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DualPolyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# dual polyhedron dim={} halfspaces={} vertices={}", self.dim, self.halfspaces.len(), self.vertices.len())?;
        for (i, h) in self.halfspaces.iter().enumerate() {
            let origin = match &h.origin {
                HalfspaceOrigin::SimplexBound => "simplex".to_string(),
                HalfspaceOrigin::SupportFromPoint(y) => format!("point {y:?}"),
            };
            writeln!(f, "H {i} g={:?} h={:?} rhs={:?} origin={origin}", h.g, h.h, h.rhs)?;
        }
        for (id, v) in &self.vertices {
            writeln!(
                f,
                "V {id} coords={:?} visited={} incident={:?} neighbors={:?} ray={}",
                v.coords, v.visited, v.incident, v.neighbors, v.has_ray
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(poly: &DualPolyhedron) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = poly.vertices().map(|(_, v)| v.coords.clone()).collect();
        out.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    fn close(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| linalg::max_abs_diff(x, y) <= 1e-12)
    }

    #[test]
    fn support_formula() {
        // a <= w1 from y = (1, 0)
        let h = DualHalfspace::support(&[1.0, 0.0]);
        assert_eq!((h.g.clone(), h.h, h.rhs), (vec![-1.0], 1.0, 0.0));
        let h = DualHalfspace::support(&[0.0, 1.0]);
        assert_eq!((h.g.clone(), h.h, h.rhs), (vec![1.0], 1.0, 1.0));
    }

    #[test]
    fn init_d2() {
        let poly = DualPolyhedron::init(2, DualHalfspace::support(&[1.0, 0.0])).unwrap();
        assert!(close(&coords(&poly), &[vec![0.0, 0.0], vec![1.0, 1.0]]));
        assert_eq!(poly.num_edges(), 1);
        assert!(poly.vertices().all(|(_, v)| !v.visited && v.has_ray && v.incident.len() == 2));
    }

    #[test]
    fn init_d3() {
        let poly = DualPolyhedron::init(3, DualHalfspace::support(&[1.0, 0.0, 0.0])).unwrap();
        assert!(close(
            &coords(&poly),
            &[vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]
        ));
        assert_eq!(poly.num_edges(), 3);
        assert!(poly.vertices().all(|(_, v)| v.incident.len() == 3));
    }

    #[test]
    fn init_rejects_vertical_support() {
        let mut h = DualHalfspace::support(&[1.0, 0.0]);
        h.h = 0.0;
        assert_eq!(DualPolyhedron::init(2, h).unwrap_err(), GeometryError::DegenerateSupport);
    }

    #[test]
    fn cut_d2() {
        let mut poly = DualPolyhedron::init(2, DualHalfspace::support(&[1.0, 0.0])).unwrap();
        let new = poly.cut(DualHalfspace::support(&[0.0, 1.0])).unwrap();
        assert_eq!(new.len(), 2);
        assert!(close(&coords(&poly), &[vec![0.0, 0.0], vec![0.5, 0.5], vec![1.0, 0.0]]));
        assert_eq!(poly.num_edges(), 2);
    }

    #[test]
    fn cut_identical_is_redundant() {
        let mut poly = DualPolyhedron::init(2, DualHalfspace::support(&[1.0, 0.0])).unwrap();
        let before = poly.dump();
        assert_eq!(poly.cut(DualHalfspace::support(&[1.0, 0.0])), Err(GeometryError::CutIsRedundant));
        assert_eq!(poly.cut(DualHalfspace::support(&[2.0, 1.0])), Err(GeometryError::CutIsRedundant));
        assert_eq!(poly.dump(), before);
    }

    #[test]
    fn cut_through_vertex_keeps_it() {
        // a <= 1 - w1 passes through... use y = (0, 0): a <= 0 is tight at (0, 0).
        let mut poly = DualPolyhedron::init(2, DualHalfspace::support(&[1.0, 0.0])).unwrap();
        let new = poly.cut(DualHalfspace::support(&[0.0, 0.0])).unwrap();
        assert_eq!(new.len(), 1);
        assert!(close(&coords(&poly), &[vec![0.0, 0.0], vec![1.0, 0.0]]));
        assert_eq!(poly.num_edges(), 1);
    }

    #[test]
    fn unvisited_rule() {
        let mut poly = DualPolyhedron::init(2, DualHalfspace::support(&[1.0, 0.0])).unwrap();
        let (id, v) = poly.unvisited().unwrap();
        assert_eq!(v.coords, vec![1.0, 1.0]);
        poly.mark_visited(id);
        let (id, v) = poly.unvisited().unwrap();
        assert_eq!(v.coords, vec![0.0, 0.0]);
        poly.mark_visited(id);
        assert!(poly.unvisited().is_none());

        let mut poly = DualPolyhedron::init(2, DualHalfspace::support(&[1.0, 0.0])).unwrap();
        poly.cut(DualHalfspace::support(&[0.0, 1.0])).unwrap();
        let (id, _) = poly.unvisited().unwrap();
        poly.mark_visited(id);
        // (0, 0) and (1, 0) tie on a; smaller w̄ wins.
        assert_eq!(poly.unvisited().unwrap().1.coords, vec![0.0, 0.0]);
    }

    #[test]
    fn facet_detection() {
        let mut poly = DualPolyhedron::init(2, DualHalfspace::support(&[1.0, 0.0])).unwrap();
        poly.cut(DualHalfspace::support(&[0.0, 1.0])).unwrap();
        assert!(poly.is_facet(2) && poly.is_facet(3));
        let mut poly = DualPolyhedron::init(2, DualHalfspace::support(&[0.0, 0.0])).unwrap();
        poly.cut(DualHalfspace::support(&[-1.0, 0.5])).unwrap();
        assert!(poly.is_facet(2));
    }

    #[test]
    fn dump_lists_everything() {
        let poly = DualPolyhedron::init(3, DualHalfspace::support(&[1.0, 0.0, 0.0])).unwrap();
        let dump = poly.dump();
        assert_eq!(dump.lines().filter(|l| l.starts_with("H ")).count(), 4);
        assert_eq!(dump.lines().filter(|l| l.starts_with("V ")).count(), 3);
    }
}
