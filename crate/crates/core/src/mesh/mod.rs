//! Conformal triangulations, face connectivity and degree-of-freedom maps.

mod dofmap;
pub mod io;
mod rect;

use std::collections::HashMap;

pub use dofmap::{Continuity, DofMap};
pub use rect::{build_rect_mesh, Diagonal, Rect};

use crate::geometry::{norm, outward_scaled_normal, signed_area, Vec2};
use crate::quadrature::EdgeRule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Left,
    Right,
    Bottom,
    Top,
    Other,
}

/// Face shared by two elements. Local face `i` is opposite local vertex `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorFace {
    pub elem_a: usize,
    pub face_a: usize,
    pub elem_b: usize,
    pub face_b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFace {
    pub elem: usize,
    pub face: usize,
    pub tag: BoundaryTag,
}

/// What lies across a local face of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceRef {
    /// Index into `interior_faces`; `side` is 0 when this element is `elem_a`.
    Interior { index: usize, side: usize },
    Boundary { index: usize },
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    pub elements: Vec<[usize; 3]>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_faces: Vec<BoundaryFace>,
    pub element_faces: Vec<[FaceRef; 3]>,
}

/// A face quadrature point as seen from one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacePoint {
    pub elem: usize,
    pub lambda: [f64; 3],
    pub x: Vec2,
    pub normal: Vec2,
}

/// Local vertices spanning local face `i`.
#[inline]
pub fn face_vertices(i: usize) -> [usize; 2] {
    [(i + 1) % 3, (i + 2) % 3]
}

impl Mesh {
    /// Builds a mesh from raw vertices and triangles. Clockwise triangles are
    /// reoriented; boundary faces are tagged against the bounding box.
    pub fn new(vertices: Vec<Vec2>, mut elements: Vec<[usize; 3]>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("mesh has no elements"));
        }
        for (e, t) in elements.iter_mut().enumerate() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::invalid(format!("element {e} references a missing vertex")));
            }
            let a = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if a == 0.0 || !a.is_finite() {
                return Err(Error::invalid(format!("element {e} is degenerate")));
            }
            if a < 0.0 {
                t.swap(1, 2);
            }
        }

        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &elements {
            for i in 0..3 {
                let [p, q] = face_vertices(i);
                let c = seen.entry((t[p].min(t[q]), t[p].max(t[q]))).or_default();
                *c += 1;
                if *c > 2 {
                    return Err(Error::invalid(format!(
                        "edge ({}, {}) is shared by more than two elements",
                        t[p], t[q]
                    )));
                }
            }
        }
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut interior_faces = Vec::new();
        for (e, t) in elements.iter().enumerate() {
            for i in 0..3 {
                let [p, q] = face_vertices(i);
                let key = (t[p].min(t[q]), t[p].max(t[q]));
                match owner.remove(&key) {
                    Some((ea, fa)) => interior_faces.push(InteriorFace {
                        elem_a: ea,
                        face_a: fa,
                        elem_b: e,
                        face_b: i,
                    }),
                    None => {
                        owner.insert(key, (e, i));
                    }
                }
            }
        }
        let (lo, hi) = bounding_box(&vertices);
        let tol = 1e-12 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let mut remaining: Vec<(usize, usize)> = owner.into_values().collect();
        remaining.sort_unstable();
        let boundary_faces = remaining
            .into_iter()
            .map(|(elem, face)| {
                let t = elements[elem];
                let [p, q] = face_vertices(face);
                let (a, b) = (vertices[t[p]], vertices[t[q]]);
                let on = |c: usize, v: f64| (a[c] - v).abs() <= tol && (b[c] - v).abs() <= tol;
                let tag = if on(0, lo[0]) {
                    BoundaryTag::Left
                } else if on(0, hi[0]) {
                    BoundaryTag::Right
                } else if on(1, lo[1]) {
                    BoundaryTag::Bottom
                } else if on(1, hi[1]) {
                    BoundaryTag::Top
                } else {
                    BoundaryTag::Other
                };
                BoundaryFace { elem, face, tag }
            })
            .collect::<Vec<_>>();

        let placeholder = FaceRef::Boundary { index: usize::MAX };
        let mut element_faces = vec![[placeholder; 3]; elements.len()];
        for (index, f) in interior_faces.iter().enumerate() {
            element_faces[f.elem_a][f.face_a] = FaceRef::Interior { index, side: 0 };
            element_faces[f.elem_b][f.face_b] = FaceRef::Interior { index, side: 1 };
        }
        for (index, f) in boundary_faces.iter().enumerate() {
            element_faces[f.elem][f.face] = FaceRef::Boundary { index };
        }

        Ok(Mesh {
            vertices,
            elements,
            interior_faces,
            boundary_faces,
            element_faces,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn corners(&self, e: usize) -> [Vec2; 3] {
        let t = self.elements[e];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn area(&self, e: usize) -> f64 {
        let [a, b, c] = self.corners(e);
        signed_area(a, b, c)
    }

    /// Element diameter (longest edge).
    pub fn diameter(&self, e: usize) -> f64 {
        (0..3).map(|i| self.face_length(e, i)).fold(0.0, f64::max)
    }

    /// Largest element diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.diameter(e)).fold(0.0, f64::max)
    }

    pub fn face_length(&self, e: usize, i: usize) -> f64 {
        let c = self.corners(e);
        let [p, q] = face_vertices(i);
        norm(outward_scaled_normal(c[p], c[q]))
    }

    /// Outward normal of local face `i` scaled by the face length.
    pub fn scaled_normal(&self, e: usize, i: usize) -> Vec2 {
        let c = self.corners(e);
        let [p, q] = face_vertices(i);
        outward_scaled_normal(c[p], c[q])
    }

    /// True when the face parameter runs from local vertex (i+2)%3 to (i+1)%3,
    /// i.e. against the element's own ordering. Both neighbours traverse a
    /// shared face from its lower global vertex id, so their quadrature
    /// points coincide.
    pub fn face_reversed(&self, e: usize, i: usize) -> bool {
        let t = self.elements[e];
        let [p, q] = face_vertices(i);
        t[p] > t[q]
    }

    /// Barycentric coordinates of the face point with parameter `s`.
    pub fn face_lambda(&self, e: usize, i: usize, s: f64) -> [f64; 3] {
        let [p, q] = face_vertices(i);
        let mut l = [0.0; 3];
        if self.face_reversed(e, i) {
            l[p] = s;
            l[q] = 1.0 - s;
        } else {
            l[p] = 1.0 - s;
            l[q] = s;
        }
        l
    }

    pub fn point(&self, e: usize, l: [f64; 3]) -> Vec2 {
        let c = self.corners(e);
        [
            l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
            l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
        ]
    }

    /// The quadrature points of an interior face as seen from both sides.
    pub fn face_pairing(&self, face: usize, rule: &EdgeRule) -> Result<Vec<(FacePoint, FacePoint)>> {
        let f = self
            .interior_faces
            .get(face)
            .ok_or_else(|| Error::invalid(format!("face {face} is not interior")))?;
        let side = |e: usize, i: usize, s: f64| {
            let lambda = self.face_lambda(e, i, s);
            let n = self.scaled_normal(e, i);
            let len = norm(n);
            FacePoint {
                elem: e,
                lambda,
                x: self.point(e, lambda),
                normal: [n[0] / len, n[1] / len],
            }
        };
        let pairs: Vec<_> = rule
            .points
            .iter()
            .map(|&s| (side(f.elem_a, f.face_a, s), side(f.elem_b, f.face_b, s)))
            .collect();
        for (a, b) in &pairs {
            let scale = 1.0 + norm(a.x);
            if norm([a.x[0] - b.x[0], a.x[1] - b.x[1]]) > 1e-13 * scale {
                return Err(Error::Internal(format!("face {face} quadrature points disagree")));
            }
        }
        Ok(pairs)
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        bounding_box(&self.vertices)
    }
}

fn bounding_box(v: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in v {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::edge_rule;

    fn square(n: usize) -> Mesh {
        build_rect_mesh(Rect::unit(), n, n, Diagonal::Alternating).unwrap()
    }

    #[test]
    fn normals_close_per_element() {
        let m = square(4);
        for e in 0..m.n_elements() {
            let mut s = [0.0; 2];
            let mut per = 0.0;
            for i in 0..3 {
                let n = m.scaled_normal(e, i);
                s[0] += n[0];
                s[1] += n[1];
                per += m.face_length(e, i);
            }
            assert!(norm(s) <= 1e-13 * per);
            assert!(m.area(e) > 0.0);
        }
    }

    #[test]
    fn every_face_counted_once_or_twice() {
        let m = square(3);
        let mut count = vec![[0usize; 3]; m.n_elements()];
        for f in &m.interior_faces {
            count[f.elem_a][f.face_a] += 1;
            count[f.elem_b][f.face_b] += 1;
        }
        for f in &m.boundary_faces {
            count[f.elem][f.face] += 1;
        }
        assert!(count.iter().flatten().all(|&c| c == 1));
        assert_eq!(m.boundary_faces.len(), 12);
    }

    #[test]
    fn boundary_tags_match_geometry() {
        let m = square(5);
        for f in &m.boundary_faces {
            let c = m.corners(f.elem);
            let [p, q] = face_vertices(f.face);
            let (a, b) = (c[p], c[q]);
            match f.tag {
                BoundaryTag::Left => assert!(a[0].abs() < 1e-12 && b[0].abs() < 1e-12),
                BoundaryTag::Right => assert!((a[0] - 1.0).abs() < 1e-12 && (b[0] - 1.0).abs() < 1e-12),
                BoundaryTag::Bottom => assert!(a[1].abs() < 1e-12 && b[1].abs() < 1e-12),
                BoundaryTag::Top => assert!((a[1] - 1.0).abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12),
                BoundaryTag::Other => panic!("untagged boundary face"),
            }
        }
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]).unwrap();
        assert!(m.area(0) > 0.0);
        assert!(Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]]).is_err());
        assert!(Mesh::new(vec![[0.0, 0.0]], vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn face_pairing_points_coincide() {
        let m = square(1);
        assert_eq!(m.interior_faces.len(), 1);
        let pairs = m.face_pairing(0, &edge_rule()).unwrap();
        assert_eq!(pairs.len(), 2);
        for (a, b) in pairs {
            assert!(norm([a.x[0] - b.x[0], a.x[1] - b.x[1]]) < 1e-15);
            assert!((a.normal[0] + b.normal[0]).abs() < 1e-15);
            assert!((a.normal[1] + b.normal[1]).abs() < 1e-15);
        }
        assert!(m.face_pairing(5, &edge_rule()).is_err());
    }

    #[test]
    fn bottom_face_gauss_points() {
        let m = square(1);
        let f = m.boundary_faces.iter().find(|f| f.tag == BoundaryTag::Bottom).unwrap();
        let mut xs: Vec<f64> = edge_rule()
            .points
            .iter()
            .map(|&s| m.point(f.elem, m.face_lambda(f.elem, f.face, s))[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        let d = 0.5 / 3f64.sqrt();
        assert!((xs[0] - (0.5 - d)).abs() < 1e-15);
        assert!((xs[1] - (0.5 + d)).abs() < 1e-15);
    }
}
