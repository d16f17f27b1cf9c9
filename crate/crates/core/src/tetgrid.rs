//! Deformable tetrahedral grid over the unit cube.
//!
//! The grid stores rest positions, per-vertex deformation offsets (clamped
//! componentwise so cells cannot invert) and per-vertex signed distance
//! values. Two deterministic tetrahedralization schemes are provided: six
//! tetrahedra per cubic cell, and a body-centered-cubic lattice.

use crate::error::{Error, Result};
use crate::math::{tet_signed_volume, Vec3};
use crate::scalar::{c, Real};

/// Index of a vertex within its owning grid or mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

/// Index of a tetrahedron within its owning grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TetId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How the unit cube is carved into tetrahedra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridScheme {
    /// Six tetrahedra per cubic cell, all sharing the cell's main diagonal.
    #[default]
    SixTet,
    /// Body-centered-cubic lattice: cell centers joined to face edges.
    Bcc,
}

impl GridScheme {
    /// Largest componentwise deformation (as a fraction of the cell size)
    /// that provably keeps every tetrahedron positively oriented. Verified
    /// by exhaustive corner enumeration: six-tet cells invert from 1/6 of a
    /// cell onward, BCC cells from 1/8.
    pub fn safe_clamp_fraction(self) -> f64 {
        match self {
            GridScheme::SixTet => 0.15,
            GridScheme::Bcc => 0.1125,
        }
    }
}

/// Deformable tetrahedral grid carrying a discretized signed distance field.
#[derive(Debug, Clone)]
pub struct TetGrid<T> {
    rest_positions: Vec<Vec3<T>>,
    deformations: Vec<Vec3<T>>,
    sdf: Vec<T>,
    tets: Vec<[u32; 4]>,
    level: u32,
    base_resolution: u32,
    clamp_radius: T,
    scheme: GridScheme,
}

/// Sign convention: zero counts as positive (outside), so the crossing
/// formula is only ever evaluated on edges with a strict sign change.
#[inline]
pub fn sdf_is_negative<T: Real>(s: T) -> bool {
    s < T::zero()
}

/// Builds a grid that fully tetrahedralizes `[0,1]^3`.
pub fn build_grid<T: Real>(resolution: u32, scheme: GridScheme) -> Result<TetGrid<T>> {
    if resolution == 0 {
        return Err(Error::invalid("grid resolution must be >= 1"));
    }
    let n = resolution as usize;
    let clamp_radius = c::<T>(scheme.safe_clamp_fraction()) / T::from_usize_lossy(n);

    let (rest_positions, tets) = match scheme {
        GridScheme::SixTet => six_tet_lattice(n),
        GridScheme::Bcc => bcc_lattice(n),
    };

    let count = rest_positions.len();
    let mut grid = TetGrid {
        rest_positions,
        deformations: vec![Vec3::zero(); count],
        sdf: vec![T::one(); count],
        tets,
        level: 0,
        base_resolution: resolution,
        clamp_radius,
        scheme,
    };
    orient_positive(&mut grid);
    Ok(grid)
}

/// Six tetrahedra per cell, one per monotone lattice path along the main diagonal.
fn six_tet_lattice<T: Real>(n: usize) -> (Vec<Vec3<T>>, Vec<[u32; 4]>) {
    let nodes = n + 1;
    let node_id = |x: usize, y: usize, z: usize| -> u32 { ((x * nodes + y) * nodes + z) as u32 };

    let mut positions = Vec::with_capacity(nodes * nodes * nodes);
    let inv = T::one() / T::from_usize_lossy(n);
    for x in 0..nodes {
        for y in 0..nodes {
            for z in 0..nodes {
                positions.push(Vec3::new(
                    T::from_usize_lossy(x) * inv,
                    T::from_usize_lossy(y) * inv,
                    T::from_usize_lossy(z) * inv,
                ));
            }
        }
    }

    // Monotone paths from corner (0,0,0) to (1,1,1); each path contributes
    // the tetrahedron (origin, step1, step2, far corner).
    const PATHS: [[(usize, usize, usize); 2]; 6] = [
        [(1, 0, 0), (1, 1, 0)],
        [(1, 0, 0), (1, 0, 1)],
        [(0, 1, 0), (1, 1, 0)],
        [(0, 1, 0), (0, 1, 1)],
        [(0, 0, 1), (1, 0, 1)],
        [(0, 0, 1), (0, 1, 1)],
    ];

    let mut tets = Vec::with_capacity(6 * n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let near = node_id(x, y, z);
                let far = node_id(x + 1, y + 1, z + 1);
                for path in PATHS {
                    let (ax, ay, az) = path[0];
                    let (bx, by, bz) = path[1];
                    tets.push([
                        near,
                        node_id(x + ax, y + ay, z + az),
                        node_id(x + bx, y + by, z + bz),
                        far,
                    ]);
                }
            }
        }
    }
    (positions, tets)
}

/// BCC lattice: grid nodes plus cell centers. Interior faces become four
/// tetrahedra around the center-center edge; boundary faces become two
/// tetrahedra capped at the single adjacent center.
fn bcc_lattice<T: Real>(n: usize) -> (Vec<Vec3<T>>, Vec<[u32; 4]>) {
    let nodes = n + 1;
    let node_id = |x: usize, y: usize, z: usize| -> u32 { ((x * nodes + y) * nodes + z) as u32 };
    let center_id = |x: usize, y: usize, z: usize| -> u32 {
        (nodes * nodes * nodes + (x * n + y) * n + z) as u32
    };

    let inv = T::one() / T::from_usize_lossy(n);
    let half = c::<T>(0.5) * inv;
    let mut positions = Vec::with_capacity(nodes * nodes * nodes + n * n * n);
    for x in 0..nodes {
        for y in 0..nodes {
            for z in 0..nodes {
                positions.push(Vec3::new(
                    T::from_usize_lossy(x) * inv,
                    T::from_usize_lossy(y) * inv,
                    T::from_usize_lossy(z) * inv,
                ));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                positions.push(Vec3::new(
                    T::from_usize_lossy(x) * inv + half,
                    T::from_usize_lossy(y) * inv + half,
                    T::from_usize_lossy(z) * inv + half,
                ));
            }
        }
    }

    let mut tets = Vec::with_capacity(12 * n * n * n);
    // Faces orthogonal to `axis` at plane index p in 0..=n between cells p-1 and p.
    for axis in 0..3usize {
        for p in 0..=n {
            for u in 0..n {
                for v in 0..n {
                    // Face corner nodes, walked in (u, v) order.
                    let corner = |du: usize, dv: usize| -> u32 {
                        let (x, y, z) = match axis {
                            0 => (p, u + du, v + dv),
                            1 => (u + du, p, v + dv),
                            _ => (u + du, v + dv, p),
                        };
                        node_id(x, y, z)
                    };
                    let cell = |side: usize| -> u32 {
                        let q = if side == 0 { p - 1 } else { p };
                        let (x, y, z) = match axis {
                            0 => (q, u, v),
                            1 => (u, q, v),
                            _ => (u, v, q),
                        };
                        center_id(x, y, z)
                    };
                    let f00 = corner(0, 0);
                    let f10 = corner(1, 0);
                    let f11 = corner(1, 1);
                    let f01 = corner(0, 1);
                    if p > 0 && p < n {
                        // Interior face: bipyramid over the face, four tets
                        // around the center-center spindle.
                        let lo = cell(0);
                        let hi = cell(1);
                        for (ea, eb) in [(f00, f10), (f10, f11), (f11, f01), (f01, f00)] {
                            tets.push([lo, hi, ea, eb]);
                        }
                    } else {
                        // Boundary face: single pyramid split along a diagonal.
                        let center = if p == 0 { cell(1) } else { cell(0) };
                        tets.push([center, f00, f10, f11]);
                        tets.push([center, f00, f11, f01]);
                    }
                }
            }
        }
    }
    (positions, tets)
}

/// Canonicalizes every tet to strictly positive signed volume at rest.
fn orient_positive<T: Real>(grid: &mut TetGrid<T>) {
    let positions = grid.rest_positions.clone();
    for tet in &mut grid.tets {
        let v = tet_signed_volume(
            positions[tet[0] as usize],
            positions[tet[1] as usize],
            positions[tet[2] as usize],
            positions[tet[3] as usize],
        );
        if v < T::zero() {
            tet.swap(2, 3);
        }
    }
}

impl<T: Real> TetGrid<T> {
    pub fn vertex_count(&self) -> usize {
        self.rest_positions.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn base_resolution(&self) -> u32 {
        self.base_resolution
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn clamp_radius(&self) -> T {
        self.clamp_radius
    }

    pub fn rest_positions(&self) -> &[Vec3<T>] {
        &self.rest_positions
    }

    pub fn deformations(&self) -> &[Vec3<T>] {
        &self.deformations
    }

    pub fn sdf(&self) -> &[T] {
        &self.sdf
    }

    pub fn sdf_mut(&mut self) -> &mut [T] {
        &mut self.sdf
    }

    pub fn tets(&self) -> &[[u32; 4]] {
        &self.tets
    }

    pub fn tet(&self, id: TetId) -> [u32; 4] {
        self.tets[id.index()]
    }

    /// Rest position plus deformation.
    #[inline]
    pub fn deformed_position(&self, v: usize) -> Vec3<T> {
        self.rest_positions[v] + self.deformations[v]
    }

    pub fn deformed_positions(&self) -> Vec<Vec3<T>> {
        (0..self.vertex_count())
            .map(|v| self.deformed_position(v))
            .collect()
    }

    /// Overwrites the SDF with values of `f` at the deformed vertex positions.
    pub fn set_sdf_from(&mut self, f: impl Fn(Vec3<T>) -> T) {
        for v in 0..self.vertex_count() {
            self.sdf[v] = f(self.deformed_position(v));
        }
    }

    pub fn set_sdf(&mut self, values: Vec<T>) -> Result<()> {
        if values.len() != self.vertex_count() {
            return Err(Error::invalid(format!(
                "sdf length {} does not match vertex count {}",
                values.len(),
                self.vertex_count()
            )));
        }
        self.sdf = values;
        Ok(())
    }

    /// Replaces the deformation field, clamping componentwise.
    pub fn set_deformations(&mut self, values: Vec<Vec3<T>>) -> Result<()> {
        if values.len() != self.vertex_count() {
            return Err(Error::invalid(format!(
                "deformation length {} does not match vertex count {}",
                values.len(),
                self.vertex_count()
            )));
        }
        let r = self.clamp_radius;
        self.deformations = values.into_iter().map(|d| d.clamp_symmetric(r)).collect();
        Ok(())
    }

    /// Adds `deltas` to the deformation field under the componentwise clamp.
    /// Rest positions are untouched.
    pub fn apply_deformation(&mut self, deltas: &[Vec3<T>]) -> Result<()> {
        if deltas.len() != self.vertex_count() {
            return Err(Error::invalid(format!(
                "delta length {} does not match vertex count {}",
                deltas.len(),
                self.vertex_count()
            )));
        }
        let r = self.clamp_radius;
        for (d, delta) in self.deformations.iter_mut().zip(deltas) {
            *d = (*d + *delta).clamp_symmetric(r);
        }
        Ok(())
    }

    /// Barycentric interpolation of the SDF inside a tetrahedron.
    pub fn interpolate(&self, tet: TetId, barycentric: [T; 4]) -> Result<T> {
        let tol = c::<T>(1e-9);
        let mut sum = T::zero();
        for w in barycentric {
            if w < -tol {
                return Err(Error::invalid(format!("barycentric weight {w} < 0")));
            }
            sum += w;
        }
        if (sum - T::one()).abs() > tol {
            return Err(Error::invalid(format!("barycentric weights sum to {sum}")));
        }
        let ids = self.tet(tet);
        let mut value = T::zero();
        for (k, &vid) in ids.iter().enumerate() {
            value += barycentric[k] * self.sdf[vid as usize];
        }
        Ok(value)
    }

    /// Tets whose four vertex signs are not all equal, in index order.
    pub fn surface_tets(&self) -> Vec<TetId> {
        let mut out = Vec::new();
        for (k, tet) in self.tets.iter().enumerate() {
            let first = sdf_is_negative(self.sdf[tet[0] as usize]);
            if tet[1..]
                .iter()
                .any(|&v| sdf_is_negative(self.sdf[v as usize]) != first)
            {
                out.push(TetId(k as u32));
            }
        }
        out
    }

    /// Signed volume of a tet at deformed positions.
    pub fn tet_volume(&self, id: TetId) -> T {
        let [a, b, c_, d] = self.tet(id);
        tet_signed_volume(
            self.deformed_position(a as usize),
            self.deformed_position(b as usize),
            self.deformed_position(c_ as usize),
            self.deformed_position(d as usize),
        )
    }

    pub fn total_volume(&self) -> T {
        (0..self.tet_count())
            .map(|k| self.tet_volume(TetId(k as u32)))
            .sum()
    }

    /// Shortest rest edge over all tets.
    pub fn min_rest_edge(&self) -> T {
        let mut best = T::infinity();
        for tet in &self.tets {
            for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                let e = (self.rest_positions[tet[i] as usize]
                    - self.rest_positions[tet[j] as usize])
                    .norm();
                best = best.min(e);
            }
        }
        best
    }

    /// Used by volume subdivision to assemble the refined grid.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        rest_positions: Vec<Vec3<T>>,
        deformations: Vec<Vec3<T>>,
        sdf: Vec<T>,
        tets: Vec<[u32; 4]>,
        level: u32,
        base_resolution: u32,
        clamp_radius: T,
        scheme: GridScheme,
    ) -> Self {
        TetGrid {
            rest_positions,
            deformations,
            sdf,
            tets,
            level,
            base_resolution,
            clamp_radius,
            scheme,
        }
    }
}
