//! Signed distance evaluation: analytic primitives for oracles, accelerated
//! point-to-mesh signed distance, discriminator-input patches with gradients
//! to the mesh vertices, and high-curvature vertex selection.

use crate::error::{Error, Result};
use crate::math::{closest_point_on_triangle, ray_triangle, Vec3};
use crate::mesh::TriangleMesh;
use crate::parallel::fill_slots;
use crate::rng::CounterRng;
use crate::scalar::{c, Real};
use crate::tetgrid::VertexId;

/// Analytic signed distance shapes. Distances are exact for the primitives;
/// union is the min and intersection the max of the operands, which bounds
/// but does not equal the true distance.
#[derive(Debug, Clone)]
pub enum AnalyticSdf<T> {
    Sphere {
        center: Vec3<T>,
        radius: T,
    },
    /// Major circle of radius `major` in the z = center.z plane.
    Torus {
        center: Vec3<T>,
        major: T,
        minor: T,
    },
    Box {
        center: Vec3<T>,
        half_extents: Vec3<T>,
    },
    Union(
        std::boxed::Box<AnalyticSdf<T>>,
        std::boxed::Box<AnalyticSdf<T>>,
    ),
    Intersection(
        std::boxed::Box<AnalyticSdf<T>>,
        std::boxed::Box<AnalyticSdf<T>>,
    ),
}

impl<T: Real> AnalyticSdf<T> {
    pub fn sphere(center: Vec3<T>, radius: T) -> Self {
        AnalyticSdf::Sphere { center, radius }
    }

    pub fn torus(center: Vec3<T>, major: T, minor: T) -> Self {
        AnalyticSdf::Torus {
            center,
            major,
            minor,
        }
    }

    pub fn cuboid(center: Vec3<T>, half_extents: Vec3<T>) -> Self {
        AnalyticSdf::Box {
            center,
            half_extents,
        }
    }

    pub fn eval(&self, p: Vec3<T>) -> T {
        eval_analytic(self, p)
    }
}

pub fn eval_analytic<T: Real>(sdf: &AnalyticSdf<T>, p: Vec3<T>) -> T {
    match sdf {
        AnalyticSdf::Sphere { center, radius } => (p - *center).norm() - *radius,
        AnalyticSdf::Torus {
            center,
            major,
            minor,
        } => {
            let d = p - *center;
            let ring = (d.x * d.x + d.y * d.y).sqrt() - *major;
            (ring * ring + d.z * d.z).sqrt() - *minor
        }
        AnalyticSdf::Box {
            center,
            half_extents,
        } => {
            let q = (p - *center).abs() - *half_extents;
            let outside = q.component_max(Vec3::zero()).norm();
            let inside = q.max_component().min(T::zero());
            outside + inside
        }
        AnalyticSdf::Union(a, b) => eval_analytic(a, p).min(eval_analytic(b, p)),
        AnalyticSdf::Intersection(a, b) => eval_analytic(a, p).max(eval_analytic(b, p)),
    }
}

/// Uniform surface samples with outward normals for the primitive shapes.
/// CSG combinations have no parametric surface here.
pub fn sample_analytic_surface<T: Real>(
    sdf: &AnalyticSdf<T>,
    n: usize,
    seed: u64,
) -> Result<crate::losses::PointSample<T>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    let rng = CounterRng::new(seed);
    let mut positions = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    match sdf {
        AnalyticSdf::Sphere { center, radius } => {
            for i in 0..n {
                let dir = loop {
                    let v = Vec3::new(
                        c::<T>(rng.normal(0, i as u64)),
                        c::<T>(rng.normal(1, i as u64)),
                        c::<T>(rng.normal(2, i as u64)),
                    );
                    if let Some(u) = v.normalized() {
                        break u;
                    }
                };
                positions.push(*center + dir * *radius);
                normals.push(dir);
            }
        }
        AnalyticSdf::Torus {
            center,
            major,
            minor,
        } => {
            let tau = c::<T>(std::f64::consts::TAU);
            for i in 0..n {
                let u = tau * c::<T>(rng.uniform(0, i as u64));
                // Tube angle with area weighting proportional to
                // (major + minor cos v); rejection sampling.
                let mut v = T::zero();
                for attempt in 0..64u64 {
                    let cand = tau * c::<T>(rng.uniform(1, i as u64 * 64 + attempt));
                    let accept = (*major + *minor * cand.cos()) / (*major + *minor);
                    if c::<T>(rng.uniform(2, i as u64 * 64 + attempt)) < accept {
                        v = cand;
                        break;
                    }
                }
                let ring = Vec3::new(u.cos(), u.sin(), T::zero());
                let normal = ring * v.cos() + Vec3::new(T::zero(), T::zero(), v.sin());
                positions.push(*center + ring * *major + normal * *minor);
                normals.push(normal);
            }
        }
        AnalyticSdf::Box {
            center,
            half_extents,
        } => {
            let h = *half_extents;
            let four = c::<T>(4.0);
            let face_areas = [
                four * h.y * h.z,
                four * h.y * h.z,
                four * h.x * h.z,
                four * h.x * h.z,
                four * h.x * h.y,
                four * h.x * h.y,
            ];
            let total: T = face_areas.iter().copied().sum();
            let mut cumulative = [T::zero(); 6];
            let mut acc = T::zero();
            for (k, a) in face_areas.iter().enumerate() {
                acc += *a;
                cumulative[k] = acc;
            }
            for i in 0..n {
                let u = c::<T>(rng.uniform(0, i as u64)) * total;
                let face = cumulative.iter().position(|&a| a > u).unwrap_or(5);
                let axis = face / 2;
                let sign = if face % 2 == 0 { T::one() } else { -T::one() };
                let (u1, u2) = (
                    c::<T>(rng.uniform(1, i as u64)) * c::<T>(2.0) - T::one(),
                    c::<T>(rng.uniform(2, i as u64)) * c::<T>(2.0) - T::one(),
                );
                let mut p = *center;
                let mut normal = Vec3::zero();
                p[axis] += sign * h[axis];
                normal[axis] = sign;
                let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
                p[a1] += u1 * h[a1];
                p[a2] += u2 * h[a2];
                positions.push(p);
                normals.push(normal);
            }
        }
        AnalyticSdf::Union(..) | AnalyticSdf::Intersection(..) => {
            return Err(Error::invalid(
                "surface sampling is only defined for primitive shapes",
            ));
        }
    }
    Ok(crate::losses::PointSample {
        positions,
        normals: Some(normals),
        provenance: None,
    })
}

/// Fixed ray directions for the parity votes; chosen irrational so lattice
/// queries do not graze edges.
const PARITY_RAYS: [[f64; 3]; 3] = [
    [0.5377216820, 0.3010789253, 0.7893125411],
    [-0.2971650931, 0.8641573786, 0.4050810519],
    [0.7118952471, -0.5043716871, 0.4891752310],
];

/// Signed distance queries against a watertight triangle mesh.
///
/// Magnitude is the exact point-to-triangle-set distance through a uniform
/// triangle-bucket grid; sign comes from the parity of three fixed jittered
/// rays, majority voted.
pub struct MeshSdf<T> {
    positions: Vec<Vec3<T>>,
    triangles: Vec<[u32; 3]>,
    origin: Vec3<T>,
    cell: Vec3<T>,
    dims: [usize; 3],
    buckets: Vec<Vec<u32>>,
}

impl<T: Real> MeshSdf<T> {
    pub fn new(mesh: &TriangleMesh<T>) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::OpenSurface("mesh has no triangles".into()));
        }
        if !mesh.is_closed_manifold() {
            return Err(Error::OpenSurface(
                "every edge must be shared by exactly two triangles".into(),
            ));
        }

        let mut lo = mesh.positions[0];
        let mut hi = mesh.positions[0];
        for p in &mesh.positions {
            lo = lo.component_min(*p);
            hi = hi.component_max(*p);
        }
        // Inflate slightly so boundary triangles bin cleanly.
        let pad = c::<T>(1e-9) + (hi - lo).norm() * c::<T>(1e-7);
        lo -= Vec3::splat(pad);
        hi += Vec3::splat(pad);

        let n_tris = mesh.triangle_count();
        let per_axis = ((n_tris as f64 / 4.0).cbrt().ceil() as usize).clamp(1, 64);
        let mut dims = [1usize; 3];
        let mut cell = Vec3::splat(T::one());
        for axis in 0..3 {
            let extent = hi[axis] - lo[axis];
            if extent > T::zero() {
                dims[axis] = per_axis;
                cell[axis] = extent / T::from_usize_lossy(per_axis);
            }
        }

        let mut this = MeshSdf {
            positions: mesh.positions.clone(),
            triangles: mesh.triangles.clone(),
            origin: lo,
            cell,
            dims,
            buckets: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
        };
        for (t, tri) in this.triangles.iter().enumerate() {
            let a = this.positions[tri[0] as usize];
            let b = this.positions[tri[1] as usize];
            let c_ = this.positions[tri[2] as usize];
            let t_lo = a.component_min(b).component_min(c_);
            let t_hi = a.component_max(b).component_max(c_);
            let lo_c = this.coords_of(t_lo);
            let hi_c = this.coords_of(t_hi);
            for x in lo_c[0]..=hi_c[0] {
                for y in lo_c[1]..=hi_c[1] {
                    for z in lo_c[2]..=hi_c[2] {
                        let idx = (x * dims[1] + y) * dims[2] + z;
                        this.buckets[idx].push(t as u32);
                    }
                }
            }
        }
        Ok(this)
    }

    fn coords_of(&self, p: Vec3<T>) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in 0..3 {
            let rel = (p[axis] - self.origin[axis]) / self.cell[axis];
            let i = rel.floor().to_f64_lossy() as i64;
            out[axis] = i.clamp(0, self.dims[axis] as i64 - 1) as usize;
        }
        out
    }

    fn tri_positions(&self, t: u32) -> [Vec3<T>; 3] {
        let tri = self.triangles[t as usize];
        [
            self.positions[tri[0] as usize],
            self.positions[tri[1] as usize],
            self.positions[tri[2] as usize],
        ]
    }

    /// Closest triangle: (triangle id, distance, closest point, barycentric).
    pub fn nearest_triangle(&self, q: Vec3<T>) -> (u32, T, Vec3<T>, [T; 3]) {
        let [cx, cy, cz] = self.coords_of(q);
        let min_cell = self.cell.min_component();
        let max_r = self.dims.iter().max().copied().unwrap_or(1);
        let mut best_d2 = T::infinity();
        let mut best = (0u32, Vec3::zero(), [T::zero(); 3]);
        for r in 0..=max_r {
            if r >= 2 {
                let bound = T::from_usize_lossy(r - 1) * min_cell;
                if bound * bound > best_d2 {
                    break;
                }
            }
            let ri = r as i64;
            for x in cx as i64 - ri..=cx as i64 + ri {
                if x < 0 || x >= self.dims[0] as i64 {
                    continue;
                }
                for y in cy as i64 - ri..=cy as i64 + ri {
                    if y < 0 || y >= self.dims[1] as i64 {
                        continue;
                    }
                    for z in cz as i64 - ri..=cz as i64 + ri {
                        if z < 0 || z >= self.dims[2] as i64 {
                            continue;
                        }
                        let shell = (x - cx as i64)
                            .abs()
                            .max((y - cy as i64).abs())
                            .max((z - cz as i64).abs());
                        if shell != ri {
                            continue;
                        }
                        let bucket =
                            (x as usize * self.dims[1] + y as usize) * self.dims[2] + z as usize;
                        for &t in &self.buckets[bucket] {
                            let [a, b, c_] = self.tri_positions(t);
                            let (point, bary) = closest_point_on_triangle(q, a, b, c_);
                            let d2 = (q - point).norm_squared();
                            if d2 < best_d2 {
                                best_d2 = d2;
                                best = (t, point, bary);
                            }
                        }
                    }
                }
            }
        }
        (best.0, best_d2.sqrt(), best.1, best.2)
    }

    /// Candidate triangles whose cells the ray visits, deduplicated.
    fn ray_candidates(&self, origin: Vec3<T>, dir: Vec3<T>) -> Vec<u32> {
        // Clip the ray to the grid box.
        let mut t_enter = T::zero();
        let mut t_exit = T::infinity();
        for axis in 0..3 {
            let extent = self.cell[axis] * T::from_usize_lossy(self.dims[axis]);
            let lo = self.origin[axis];
            let hi = lo + extent;
            let d = dir[axis];
            if d.abs() < c(1e-30) {
                if origin[axis] < lo || origin[axis] > hi {
                    return Vec::new();
                }
            } else {
                let t0 = (lo - origin[axis]) / d;
                let t1 = (hi - origin[axis]) / d;
                t_enter = t_enter.max(t0.min(t1));
                t_exit = t_exit.min(t0.max(t1));
            }
        }
        if t_enter > t_exit {
            return Vec::new();
        }

        // Voxel walk from the entry point.
        let start = origin + dir * t_enter;
        let mut coords = self.coords_of(start);
        let mut t_max = [T::infinity(); 3];
        let mut t_delta = [T::infinity(); 3];
        let mut step = [0i64; 3];
        for axis in 0..3 {
            let d = dir[axis];
            if d.abs() < c(1e-30) {
                continue;
            }
            step[axis] = if d > T::zero() { 1 } else { -1 };
            let cell_lo = self.origin[axis] + self.cell[axis] * T::from_usize_lossy(coords[axis]);
            let next_plane = if d > T::zero() {
                cell_lo + self.cell[axis]
            } else {
                cell_lo
            };
            t_max[axis] = t_enter + (next_plane - origin[axis] - dir[axis] * t_enter) / d;
            t_delta[axis] = self.cell[axis] / d.abs();
        }

        let mut seen: Vec<u32> = Vec::new();
        loop {
            let bucket = (coords[0] * self.dims[1] + coords[1]) * self.dims[2] + coords[2];
            seen.extend_from_slice(&self.buckets[bucket]);

            let axis = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            if t_max[axis] > t_exit {
                break;
            }
            let next = coords[axis] as i64 + step[axis];
            if next < 0 || next >= self.dims[axis] as i64 {
                break;
            }
            coords[axis] = next as usize;
            t_max[axis] += t_delta[axis];
        }
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    fn ray_parity(&self, q: Vec3<T>, dir: Vec3<T>) -> bool {
        let mut crossings = 0usize;
        for t in self.ray_candidates(q, dir) {
            let [a, b, c_] = self.tri_positions(t);
            if ray_triangle(q, dir, a, b, c_).is_some() {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }

    /// True when the majority of parity rays report an odd crossing count.
    pub fn is_inside(&self, q: Vec3<T>) -> bool {
        let mut votes = 0;
        for ray in PARITY_RAYS {
            let dir = Vec3::new(c::<T>(ray[0]), c::<T>(ray[1]), c::<T>(ray[2]));
            if self.ray_parity(q, dir) {
                votes += 1;
            }
        }
        votes >= 2
    }

    /// Signed distance: negative inside.
    pub fn eval(&self, q: Vec3<T>) -> T {
        let (_, dist, _, _) = self.nearest_triangle(q);
        if self.is_inside(q) {
            -dist
        } else {
            dist
        }
    }

    /// Signed distances for a batch of queries, deterministic for any
    /// worker count.
    pub fn eval_many(&self, queries: &[Vec3<T>], workers: usize) -> Vec<T> {
        let mut out = vec![T::zero(); queries.len()];
        fill_slots(&mut out, workers, |i| self.eval(queries[i]));
        out
    }
}

/// Signed distance from `p` to a watertight mesh. Builds the acceleration
/// structure per call; use [`MeshSdf`] for repeated queries.
pub fn mesh_sdf<T: Real>(mesh: &TriangleMesh<T>, p: Vec3<T>) -> Result<T> {
    Ok(MeshSdf::new(mesh)?.eval(p))
}

/// Dense cubic lattice of signed distances around a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPatch<T> {
    pub origin: Vec3<T>,
    pub spacing: T,
    pub n: usize,
    /// `n^3` values in x-major layout: `(ix * n + iy) * n + iz`.
    pub values: Vec<T>,
}

impl<T: Real> ScalarPatch<T> {
    pub fn lattice_point(&self, ix: usize, iy: usize, iz: usize) -> Vec3<T> {
        self.origin
            + Vec3::new(
                T::from_usize_lossy(ix),
                T::from_usize_lossy(iy),
                T::from_usize_lossy(iz),
            ) * self.spacing
    }

    pub fn value(&self, ix: usize, iy: usize, iz: usize) -> T {
        self.values[(ix * self.n + iy) * self.n + iz]
    }
}

fn patch_points<T: Real>(center: Vec3<T>, n: usize, extent: T) -> (Vec3<T>, T, Vec<Vec3<T>>) {
    let origin = center - Vec3::splat(extent);
    let spacing = (extent + extent) / T::from_usize_lossy(n - 1);
    let mut points = Vec::with_capacity(n * n * n);
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                points.push(
                    origin
                        + Vec3::new(
                            T::from_usize_lossy(ix),
                            T::from_usize_lossy(iy),
                            T::from_usize_lossy(iz),
                        ) * spacing,
                );
            }
        }
    }
    (origin, spacing, points)
}

/// Signed-distance lattice of the mesh on an `n^3` grid spanning
/// `[center - extent, center + extent]^3`.
pub fn sdf_patch<T: Real>(
    mesh: &TriangleMesh<T>,
    center: Vec3<T>,
    n: usize,
    extent: T,
) -> Result<ScalarPatch<T>> {
    sdf_patch_with(&MeshSdf::new(mesh)?, center, n, extent, 1)
}

/// As [`sdf_patch`] with a prebuilt field and worker count.
pub fn sdf_patch_with<T: Real>(
    field: &MeshSdf<T>,
    center: Vec3<T>,
    n: usize,
    extent: T,
    workers: usize,
) -> Result<ScalarPatch<T>> {
    if n < 2 {
        return Err(Error::invalid("patch resolution must be >= 2"));
    }
    if !(extent > T::zero()) {
        return Err(Error::invalid("patch extent must be positive"));
    }
    let (origin, spacing, points) = patch_points(center, n, extent);
    let values = field.eval_many(&points, workers);
    Ok(ScalarPatch {
        origin,
        spacing,
        n,
        values,
    })
}

/// Gradient of the patch values to the mesh vertex positions. The closest
/// triangle and the sign are held locally constant; the point-to-triangle
/// distance differentiates through the closest point's barycentric weights.
pub fn sdf_patch_vjp<T: Real>(
    mesh: &TriangleMesh<T>,
    center: Vec3<T>,
    n: usize,
    extent: T,
    d_values: &[T],
) -> Result<Vec<Vec3<T>>> {
    if n < 2 {
        return Err(Error::invalid("patch resolution must be >= 2"));
    }
    if d_values.len() != n * n * n {
        return Err(Error::invalid("cotangent length does not match patch size"));
    }
    let field = MeshSdf::new(mesh)?;
    let (_, _, points) = patch_points(center, n, extent);
    let mut d_mesh = vec![Vec3::zero(); mesh.vertex_count()];
    let tiny = c::<T>(1e-30);
    for (k, q) in points.iter().enumerate() {
        let g = d_values[k];
        if g == T::zero() {
            continue;
        }
        let (t, dist, point, bary) = field.nearest_triangle(*q);
        if dist < tiny {
            continue;
        }
        let sign = if field.is_inside(*q) {
            -T::one()
        } else {
            T::one()
        };
        // d|q - x*| / dx* = -(q - x*)/|q - x*|, distributed by the
        // barycentric weights of the closest point (envelope theorem).
        let u = (*q - point) / dist;
        let tri = mesh.triangles[t as usize];
        for (w, &v) in bary.iter().zip(tri.iter()) {
            d_mesh[v as usize] -= u * (*w * sign * g);
        }
    }
    Ok(d_mesh)
}

/// Vertices sampled with probability proportional to their absolute angle
/// deficit (discrete Gaussian curvature magnitude).
pub fn high_curvature_vertices<T: Real>(
    mesh: &TriangleMesh<T>,
    k: usize,
    seed: u64,
) -> Vec<VertexId> {
    let deficits = angle_deficits(mesh);
    let weights: Vec<T> = deficits.iter().map(|d| d.abs()).collect();
    let total: T = weights.iter().copied().sum();

    let rng = CounterRng::new(seed);
    let mut out = Vec::with_capacity(k);
    if !(total > T::zero()) {
        // Perfectly flat mesh: fall back to uniform selection.
        for i in 0..k {
            let u = rng.uniform(0, i as u64);
            let v = ((u * mesh.vertex_count() as f64) as usize).min(mesh.vertex_count() - 1);
            out.push(VertexId(v as u32));
        }
        return out;
    }
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = T::zero();
    for w in &weights {
        acc += *w;
        cumulative.push(acc);
    }
    for i in 0..k {
        let u = c::<T>(rng.uniform(0, i as u64)) * total;
        let v = cumulative
            .partition_point(|&a| a <= u)
            .min(weights.len() - 1);
        out.push(VertexId(v as u32));
    }
    out
}

/// `2*pi` minus the sum of incident triangle angles, per vertex.
pub fn angle_deficits<T: Real>(mesh: &TriangleMesh<T>) -> Vec<T> {
    let mut angle_sum = vec![T::zero(); mesh.vertex_count()];
    for tri in &mesh.triangles {
        let p = [
            mesh.positions[tri[0] as usize],
            mesh.positions[tri[1] as usize],
            mesh.positions[tri[2] as usize],
        ];
        for i in 0..3 {
            let e1 = p[(i + 1) % 3] - p[i];
            let e2 = p[(i + 2) % 3] - p[i];
            let (n1, n2) = (e1.norm(), e2.norm());
            if n1 > T::zero() && n2 > T::zero() {
                let cos = (e1.dot(e2) / (n1 * n2)).max(-T::one()).min(T::one());
                angle_sum[tri[i] as usize] += cos.acos();
            }
        }
    }
    let tau = c::<T>(std::f64::consts::TAU);
    angle_sum.into_iter().map(|a| tau - a).collect()
}
