//! Triangle mesh container and watertightness / topology checks.

use std::collections::HashMap;

use crate::math::{triangle_area_normal, Vec3};
use crate::scalar::{c, Real};
use crate::tetgrid::VertexId;

/// Triangle surface mesh.
///
/// Meshes extracted by marching tetrahedra carry per-vertex provenance: the
/// grid edge each vertex was born on. Meshes from other sources (files,
/// subdivision output) have no provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T> {
    pub positions: Vec<Vec3<T>>,
    pub triangles: Vec<[u32; 3]>,
    pub provenance: Option<Vec<(VertexId, VertexId)>>,
}

impl<T: Real> TriangleMesh<T> {
    pub fn new(positions: Vec<Vec3<T>>, triangles: Vec<[u32; 3]>) -> Self {
        Self {
            positions,
            triangles,
            provenance: None,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_positions(&self, t: usize) -> [Vec3<T>; 3] {
        let [a, b, c_] = self.triangles[t];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c_ as usize],
        ]
    }

    /// Twice-area normal of a face (not normalized).
    pub fn face_area_normal(&self, t: usize) -> Vec3<T> {
        let [a, b, c_] = self.triangle_positions(t);
        triangle_area_normal(a, b, c_)
    }

    /// Unit face normal; zero vector for degenerate faces.
    pub fn face_normal(&self, t: usize) -> Vec3<T> {
        self.face_area_normal(t)
            .normalized()
            .unwrap_or(Vec3::zero())
    }

    pub fn face_area(&self, t: usize) -> T {
        self.face_area_normal(t).norm() / c(2.0)
    }

    pub fn total_area(&self) -> T {
        (0..self.triangle_count()).map(|t| self.face_area(t)).sum()
    }

    pub fn translate(&mut self, offset: Vec3<T>) {
        for p in &mut self.positions {
            *p += offset;
        }
    }

    /// Undirected edge -> (use count, orientation balance). A closed,
    /// consistently wound mesh has count 2 and balance 0 everywhere.
    fn edge_uses(&self) -> HashMap<(u32, u32), (u32, i32)> {
        let mut edges: HashMap<(u32, u32), (u32, i32)> = HashMap::new();
        for tri in &self.triangles {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (a.min(b), a.max(b));
                let entry = edges.entry(key).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += if a < b { 1 } else { -1 };
            }
        }
        edges
    }

    /// Every edge shared by exactly two triangles, with opposite directions.
    pub fn is_closed_manifold(&self) -> bool {
        !self.is_empty()
            && self
                .edge_uses()
                .values()
                .all(|&(count, balance)| count == 2 && balance == 0)
    }

    /// V - E + F over referenced vertices and distinct undirected edges.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertex_count()];
        for tri in &self.triangles {
            for &v in tri {
                used[v as usize] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        let e = self.edge_uses().len() as i64;
        let f = self.triangle_count() as i64;
        v - e + f
    }

    /// Copy with triangles of area `<= min_area` dropped. Vertices are kept
    /// as-is; indices stay valid.
    pub fn without_degenerate_triangles(&self, min_area: T) -> Self {
        let triangles = self
            .triangles
            .iter()
            .copied()
            .filter(|tri| {
                let area = triangle_area_normal(
                    self.positions[tri[0] as usize],
                    self.positions[tri[1] as usize],
                    self.positions[tri[2] as usize],
                )
                .norm()
                    / c::<T>(2.0);
                area > min_area
            })
            .collect();
        Self {
            positions: self.positions.clone(),
            triangles,
            provenance: self.provenance.clone(),
        }
    }

    /// Regular tetrahedron inscribed in the unit cube; smallest closed mesh.
    pub fn regular_tetrahedron() -> Self {
        let positions = vec![
            Vec3::new(T::zero(), T::zero(), T::zero()),
            Vec3::new(T::one(), T::one(), T::zero()),
            Vec3::new(T::one(), T::zero(), T::one()),
            Vec3::new(T::zero(), T::one(), T::one()),
        ];
        let triangles = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
        Self::new(positions, triangles)
    }

    /// Axis-aligned box mesh (two triangles per face, outward winding).
    pub fn axis_aligned_box(center: Vec3<T>, half_extents: Vec3<T>) -> Self {
        let h = half_extents;
        let corner = |m: usize| -> Vec3<T> {
            center
                + Vec3::new(
                    if m & 1 == 0 { -h.x } else { h.x },
                    if m & 2 == 0 { -h.y } else { h.y },
                    if m & 4 == 0 { -h.z } else { h.z },
                )
        };
        let positions = (0..8).map(corner).collect();
        // Faces as corner-index quads with outward winding.
        let quads: [[u32; 4]; 6] = [
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
        ];
        let mut triangles = Vec::with_capacity(12);
        for q in quads {
            triangles.push([q[0], q[1], q[2]]);
            triangles.push([q[0], q[2], q[3]]);
        }
        Self::new(positions, triangles)
    }

    /// Regular icosahedron centered at `center`, circumradius `radius`.
    pub fn icosahedron(center: Vec3<T>, radius: T) -> Self {
        let phi = c::<T>((1.0 + 5.0_f64.sqrt()) / 2.0);
        let raw = [
            (T::zero(), T::one(), phi),
            (T::zero(), -T::one(), phi),
            (T::zero(), T::one(), -phi),
            (T::zero(), -T::one(), -phi),
            (T::one(), phi, T::zero()),
            (-T::one(), phi, T::zero()),
            (T::one(), -phi, T::zero()),
            (-T::one(), -phi, T::zero()),
            (phi, T::zero(), T::one()),
            (-phi, T::zero(), T::one()),
            (phi, T::zero(), -T::one()),
            (-phi, T::zero(), -T::one()),
        ];
        let scale = radius / (T::one() + phi * phi).sqrt();
        let positions: Vec<Vec3<T>> = raw
            .iter()
            .map(|&(x, y, z)| center + Vec3::new(x, y, z) * scale)
            .collect();
        let triangles: Vec<[u32; 3]> = vec![
            [0, 1, 8],
            [0, 8, 4],
            [0, 4, 5],
            [0, 5, 9],
            [0, 9, 1],
            [1, 6, 8],
            [8, 6, 10],
            [8, 10, 4],
            [4, 10, 2],
            [4, 2, 5],
            [5, 2, 11],
            [5, 11, 9],
            [9, 11, 7],
            [9, 7, 1],
            [1, 7, 6],
            [3, 6, 7],
            [3, 7, 11],
            [3, 11, 2],
            [3, 2, 10],
            [3, 10, 6],
        ];
        let mut mesh = Self::new(positions, triangles);
        // Canonicalize winding outward from the center.
        for t in 0..mesh.triangle_count() {
            let [a, b, c_] = mesh.triangle_positions(t);
            let n = triangle_area_normal(a, b, c_);
            let mid = (a + b + c_) / c::<T>(3.0);
            if n.dot(mid - center) < T::zero() {
                mesh.triangles[t].swap(1, 2);
            }
        }
        mesh
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron_is_closed() {
        let m = TriangleMesh::<f64>::regular_tetrahedron();
        assert!(m.is_closed_manifold());
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn box_topology_and_area() {
        let m = TriangleMesh::<f64>::axis_aligned_box(
            Vec3::new(0.5, 0.5, 0.5),
            Vec3::new(0.5, 0.5, 0.5),
        );
        assert!(m.is_closed_manifold());
        assert_eq!(m.euler_characteristic(), 2);
        assert!((m.total_area() - 6.0).abs() < 1e-12);
        // Outward winding everywhere.
        for t in 0..m.triangle_count() {
            let [a, b, c_] = m.triangle_positions(t);
            let mid = (a + b + c_) / 3.0;
            assert!(m.face_normal(t).dot(mid - Vec3::splat(0.5)) > 0.0);
        }
    }

    #[test]
    fn icosahedron_topology() {
        let m = TriangleMesh::<f64>::icosahedron(Vec3::zero(), 1.0);
        assert!(m.is_closed_manifold());
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.triangle_count(), 20);
        for p in &m.positions {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn open_mesh_detected() {
        let mut m = TriangleMesh::<f64>::regular_tetrahedron();
        m.triangles.pop();
        assert!(!m.is_closed_manifold());
    }

    #[test]
    fn degenerate_filter_drops_slivers() {
        let positions = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.5, 0.0, 0.0),
        ];
        let m = TriangleMesh::new(positions, vec![[0, 1, 2], [0, 1, 3]]);
        let filtered = m.without_degenerate_triangles(1e-14);
        assert_eq!(filtered.triangle_count(), 1);
    }
}
