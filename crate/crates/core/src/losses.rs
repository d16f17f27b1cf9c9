//! Differentiable surface sampling and the loss terms driving the fit:
//! chamfer distance, normal consistency, SDF regularization, deformation
//! regularization, the least-squares adversarial arithmetic, and the
//! weighted total.
//!
//! All losses are mean-normalized so the default weights are resolution
//! independent. Nearest-neighbor correspondences are treated as constants in
//! the gradients; only the distances differentiate.

use crate::error::{Error, Result};
use crate::math::{triangle_area_normal, Vec3};
use crate::mesh::TriangleMesh;
use crate::parallel::fill_slots;
use crate::rng::CounterRng;
use crate::scalar::{c, Real};
use crate::tetgrid::TetGrid;

/// Brute force below this target-set size, bucket grid above.
const BRUTE_FORCE_LIMIT: usize = 4096;

/// Surface sample set with unit normals and (when sampled from a mesh) the
/// triangle and barycentric coordinates each point was born at.
#[derive(Debug, Clone)]
pub struct PointSample<T> {
    pub positions: Vec<Vec3<T>>,
    pub normals: Option<Vec<Vec3<T>>>,
    pub provenance: Option<Vec<(u32, [T; 3])>>,
}

impl<T: Real> PointSample<T> {
    pub fn from_positions(positions: Vec<Vec3<T>>) -> Self {
        Self {
            positions,
            normals: None,
            provenance: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Area-weighted deterministic surface sampling. Positions are barycentric
/// combinations of the owning triangle's vertices, so they differentiate
/// through the fixed provenance; normals come from the face winding.
pub fn sample_surface<T: Real>(
    mesh: &TriangleMesh<T>,
    n: usize,
    seed: u64,
) -> Result<PointSample<T>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    if mesh.is_empty() {
        return Err(Error::EmptySurface);
    }
    let tri_count = mesh.triangle_count();
    let mut cumulative = Vec::with_capacity(tri_count);
    let mut total = T::zero();
    for t in 0..tri_count {
        total += mesh.face_area(t);
        cumulative.push(total);
    }
    if !(total > T::zero()) {
        return Err(Error::EmptySurface);
    }

    let rng = CounterRng::new(seed);
    let mut positions = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for i in 0..n {
        let u = c::<T>(rng.uniform(0, i as u64)) * total;
        let t = cumulative
            .partition_point(|&acc| acc <= u)
            .min(tri_count - 1);
        let mut r1 = c::<T>(rng.uniform(1, i as u64));
        let mut r2 = c::<T>(rng.uniform(2, i as u64));
        if r1 + r2 > T::one() {
            r1 = T::one() - r1;
            r2 = T::one() - r2;
        }
        let bary = [T::one() - r1 - r2, r1, r2];
        let [a, b, c_] = mesh.triangle_positions(t);
        positions.push(a * bary[0] + b * bary[1] + c_ * bary[2]);
        normals.push(mesh.face_normal(t));
        provenance.push((t as u32, bary));
    }
    Ok(PointSample {
        positions,
        normals: Some(normals),
        provenance: Some(provenance),
    })
}

/// Pushes cotangents on sampled positions and normals back to the mesh
/// vertices through the fixed provenance.
pub fn sample_surface_vjp<T: Real>(
    mesh: &TriangleMesh<T>,
    sample: &PointSample<T>,
    d_positions: &[Vec3<T>],
    d_normals: &[Vec3<T>],
) -> Result<Vec<Vec3<T>>> {
    let provenance = sample
        .provenance
        .as_ref()
        .ok_or_else(|| Error::invalid("sample carries no provenance"))?;
    if d_positions.len() != sample.len() || d_normals.len() != sample.len() {
        return Err(Error::invalid("cotangent length mismatch"));
    }
    let mut d_mesh = vec![Vec3::zero(); mesh.vertex_count()];
    for (k, &(t, bary)) in provenance.iter().enumerate() {
        let tri = mesh.triangles[t as usize];
        let g = d_positions[k];
        for (w, &v) in bary.iter().zip(tri.iter()) {
            d_mesh[v as usize] += g * *w;
        }

        let gn = d_normals[k];
        if gn.norm_squared() > T::zero() {
            let [a, b, c_] = mesh.triangle_positions(t as usize);
            let cvec = triangle_area_normal(a, b, c_);
            let len = cvec.norm();
            if len > T::zero() {
                let nrm = cvec / len;
                let g_c = (gn - nrm * nrm.dot(gn)) / len;
                let u = b - a;
                let v = c_ - a;
                let d_u = v.cross(g_c);
                let d_v = g_c.cross(u);
                d_mesh[tri[1] as usize] += d_u;
                d_mesh[tri[0] as usize] -= d_u;
                d_mesh[tri[2] as usize] += d_v;
                d_mesh[tri[0] as usize] -= d_v;
            }
        }
    }
    Ok(d_mesh)
}

/// Nearest-neighbor index over a fixed point set. Brute force for small
/// sets, uniform bucket grid with expanding-shell search above.
pub struct NearestNeighbors<T> {
    points: Vec<Vec3<T>>,
    grid: Option<BucketGrid<T>>,
}

struct BucketGrid<T> {
    origin: Vec3<T>,
    cell: Vec3<T>,
    dims: [usize; 3],
    buckets: Vec<Vec<u32>>,
}

impl<T: Real> BucketGrid<T> {
    fn build(points: &[Vec3<T>]) -> Self {
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo = lo.component_min(*p);
            hi = hi.component_max(*p);
        }
        let n = points.len();
        let per_axis = ((n as f64 / 2.0).cbrt().ceil() as usize).clamp(1, 64);
        let mut dims = [1usize; 3];
        let mut cell = Vec3::splat(T::one());
        for axis in 0..3 {
            let extent = hi[axis] - lo[axis];
            if extent > T::zero() {
                dims[axis] = per_axis;
                cell[axis] = extent / T::from_usize_lossy(per_axis);
            }
        }
        let mut buckets = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
        let mut grid = BucketGrid {
            origin: lo,
            cell,
            dims,
            buckets: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let idx = grid.bucket_of(*p);
            buckets[idx].push(i as u32);
        }
        grid.buckets = buckets;
        grid
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

    fn bucket_of(&self, p: Vec3<T>) -> usize {
        let [x, y, z] = self.coords_of(p);
        (x * self.dims[1] + y) * self.dims[2] + z
    }

    fn nearest(&self, points: &[Vec3<T>], q: Vec3<T>) -> (u32, T) {
        let [cx, cy, cz] = self.coords_of(q);
        let min_cell = self.cell.min_component();
        let max_r = self.dims.iter().max().copied().unwrap_or(1);
        let mut best = T::infinity();
        let mut best_idx = 0u32;
        for r in 0..=max_r {
            if r >= 2 {
                let bound = T::from_usize_lossy(r - 1) * min_cell;
                if bound * bound > best {
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
                        for &i in &self.buckets[bucket] {
                            let d = (points[i as usize] - q).norm_squared();
                            if d < best {
                                best = d;
                                best_idx = i;
                            }
                        }
                    }
                }
            }
        }
        (best_idx, best.sqrt())
    }
}

impl<T: Real> NearestNeighbors<T> {
    pub fn build(points: &[Vec3<T>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("nearest-neighbor set must be non-empty"));
        }
        let grid = if points.len() > BRUTE_FORCE_LIMIT {
            Some(BucketGrid::build(points))
        } else {
            None
        };
        Ok(Self {
            points: points.to_vec(),
            grid,
        })
    }

    /// Index of the closest point and its distance. Ties resolve to the
    /// first candidate in deterministic scan order.
    pub fn nearest(&self, q: Vec3<T>) -> (u32, T) {
        match &self.grid {
            Some(grid) => grid.nearest(&self.points, q),
            None => {
                let mut best = T::infinity();
                let mut best_idx = 0u32;
                for (i, p) in self.points.iter().enumerate() {
                    let d = (*p - q).norm_squared();
                    if d < best {
                        best = d;
                        best_idx = i as u32;
                    }
                }
                (best_idx, best.sqrt())
            }
        }
    }

    /// Nearest indices for a batch of queries, deterministic for any worker
    /// count.
    pub fn nearest_many(&self, queries: &[Vec3<T>], workers: usize) -> Vec<u32> {
        let mut out = vec![0u32; queries.len()];
        fill_slots(&mut out, workers, |i| self.nearest(queries[i]).0);
        out
    }
}

/// Gradients for the two position (or normal) sets of a paired loss.
pub type PairGradients<T> = (Vec<Vec3<T>>, Vec<Vec3<T>>);

/// Mutual nearest-neighbor indices between two samples.
#[derive(Debug, Clone)]
pub struct Correspondences {
    pub p_to_q: Vec<u32>,
    pub q_to_p: Vec<u32>,
}

pub fn correspondences<T: Real>(
    p: &PointSample<T>,
    q: &PointSample<T>,
    workers: usize,
) -> Result<Correspondences> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::invalid("chamfer needs two non-empty samples"));
    }
    let q_index = NearestNeighbors::build(&q.positions)?;
    let p_index = NearestNeighbors::build(&p.positions)?;
    Ok(Correspondences {
        p_to_q: q_index.nearest_many(&p.positions, workers),
        q_to_p: p_index.nearest_many(&q.positions, workers),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChamferOrder {
    /// Mean of nearest-neighbor distances, both directions.
    L1,
    /// Mean of squared nearest-neighbor distances, both directions.
    #[default]
    L2,
}

/// Symmetric chamfer distance under precomputed correspondences.
pub fn chamfer_with<T: Real>(
    p: &PointSample<T>,
    q: &PointSample<T>,
    order: ChamferOrder,
    corr: &Correspondences,
) -> T {
    let direction = |from: &PointSample<T>, to: &PointSample<T>, nn: &[u32]| -> T {
        let mut sum = T::zero();
        for (a, &j) in from.positions.iter().zip(nn) {
            let d2 = (*a - to.positions[j as usize]).norm_squared();
            sum += match order {
                ChamferOrder::L1 => d2.sqrt(),
                ChamferOrder::L2 => d2,
            };
        }
        sum / T::from_usize_lossy(from.len())
    };
    direction(p, q, &corr.p_to_q) + direction(q, p, &corr.q_to_p)
}

pub fn chamfer<T: Real>(p: &PointSample<T>, q: &PointSample<T>, order: ChamferOrder) -> Result<T> {
    let corr = correspondences(p, q, 1)?;
    Ok(chamfer_with(p, q, order, &corr))
}

/// Gradient of [`chamfer_with`] to both position sets. Correspondences are
/// held fixed (the argmin is piecewise constant).
pub fn chamfer_vjp_with<T: Real>(
    p: &PointSample<T>,
    q: &PointSample<T>,
    order: ChamferOrder,
    corr: &Correspondences,
    seed_cot: T,
) -> PairGradients<T> {
    let mut d_p = vec![Vec3::zero(); p.len()];
    let mut d_q = vec![Vec3::zero(); q.len()];
    let tiny = c::<T>(1e-30);

    {
        let scale = seed_cot / T::from_usize_lossy(p.len());
        for (i, &j) in corr.p_to_q.iter().enumerate() {
            let diff = p.positions[i] - q.positions[j as usize];
            let g = match order {
                ChamferOrder::L1 => {
                    let dist = diff.norm();
                    if dist < tiny {
                        continue;
                    }
                    diff * (scale / dist)
                }
                ChamferOrder::L2 => diff * (scale + scale),
            };
            d_p[i] += g;
            d_q[j as usize] -= g;
        }
    }
    {
        let scale = seed_cot / T::from_usize_lossy(q.len());
        for (j, &i) in corr.q_to_p.iter().enumerate() {
            let diff = q.positions[j] - p.positions[i as usize];
            let g = match order {
                ChamferOrder::L1 => {
                    let dist = diff.norm();
                    if dist < tiny {
                        continue;
                    }
                    diff * (scale / dist)
                }
                ChamferOrder::L2 => diff * (scale + scale),
            };
            d_q[j] += g;
            d_p[i as usize] -= g;
        }
    }
    (d_p, d_q)
}

/// Mean over p of `1 - |n_p . n_q|` with q the chamfer correspondent of p.
pub fn normal_consistency_with<T: Real>(
    p: &PointSample<T>,
    q: &PointSample<T>,
    corr: &Correspondences,
) -> Result<T> {
    let (np, nq) = match (&p.normals, &q.normals) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::invalid(
                "normal consistency needs normals on both samples",
            ))
        }
    };
    let mut sum = T::zero();
    for (i, &j) in corr.p_to_q.iter().enumerate() {
        sum += T::one() - np[i].dot(nq[j as usize]).abs();
    }
    Ok(sum / T::from_usize_lossy(p.len()))
}

pub fn normal_consistency<T: Real>(p: &PointSample<T>, q: &PointSample<T>) -> Result<T> {
    let corr = correspondences(p, q, 1)?;
    normal_consistency_with(p, q, &corr)
}

/// Gradient of [`normal_consistency_with`] to both normal sets.
pub fn normal_consistency_vjp_with<T: Real>(
    p: &PointSample<T>,
    q: &PointSample<T>,
    corr: &Correspondences,
    seed_cot: T,
) -> Result<PairGradients<T>> {
    let (np, nq) = match (&p.normals, &q.normals) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::invalid(
                "normal consistency needs normals on both samples",
            ))
        }
    };
    let mut d_np = vec![Vec3::zero(); p.len()];
    let mut d_nq = vec![Vec3::zero(); q.len()];
    let scale = seed_cot / T::from_usize_lossy(p.len());
    for (i, &j) in corr.p_to_q.iter().enumerate() {
        let dot = np[i].dot(nq[j as usize]);
        let s = if dot > T::zero() {
            -scale
        } else if dot < T::zero() {
            scale
        } else {
            continue;
        };
        d_np[i] += nq[j as usize] * s;
        d_nq[j as usize] += np[i] * s;
    }
    Ok((d_np, d_nq))
}

/// Mean squared difference between the grid SDF and target values.
pub fn sdf_regularization_from_values<T: Real>(sdf: &[T], targets: &[T]) -> T {
    let mut sum = T::zero();
    for (s, t) in sdf.iter().zip(targets) {
        let r = *s - *t;
        sum += r * r;
    }
    sum / T::from_usize_lossy(sdf.len())
}

pub fn sdf_regularization_vjp_from_values<T: Real>(
    sdf: &[T],
    targets: &[T],
    seed_cot: T,
) -> Vec<T> {
    let scale = (seed_cot + seed_cot) / T::from_usize_lossy(sdf.len());
    sdf.iter()
        .zip(targets)
        .map(|(s, t)| (*s - *t) * scale)
        .collect()
}

/// Mean squared difference between the grid SDF and `target` evaluated at
/// the deformed vertex positions.
pub fn sdf_regularization<T: Real>(grid: &TetGrid<T>, target: impl Fn(Vec3<T>) -> T) -> T {
    let targets: Vec<T> = (0..grid.vertex_count())
        .map(|v| target(grid.deformed_position(v)))
        .collect();
    sdf_regularization_from_values(grid.sdf(), &targets)
}

pub fn sdf_regularization_vjp<T: Real>(
    grid: &TetGrid<T>,
    target: impl Fn(Vec3<T>) -> T,
    seed_cot: T,
) -> Vec<T> {
    let targets: Vec<T> = (0..grid.vertex_count())
        .map(|v| target(grid.deformed_position(v)))
        .collect();
    sdf_regularization_vjp_from_values(grid.sdf(), &targets, seed_cot)
}

/// Smoothing epsilon for the deformation norm at zero.
fn def_eps<T: Real>() -> T {
    c(1e-12)
}

/// Mean deformation magnitude, smoothed at zero:
/// `sqrt(|d|^2 + eps^2) - eps` with `eps = 1e-12`.
pub fn deformation_regularization<T: Real>(grid: &TetGrid<T>) -> T {
    let eps = def_eps::<T>();
    let mut sum = T::zero();
    for d in grid.deformations() {
        sum += (d.norm_squared() + eps * eps).sqrt() - eps;
    }
    sum / T::from_usize_lossy(grid.vertex_count())
}

pub fn deformation_regularization_vjp<T: Real>(grid: &TetGrid<T>, seed_cot: T) -> Vec<Vec3<T>> {
    let eps = def_eps::<T>();
    let scale = seed_cot / T::from_usize_lossy(grid.vertex_count());
    grid.deformations()
        .iter()
        .map(|d| *d * (scale / (d.norm_squared() + eps * eps).sqrt()))
        .collect()
}

/// Least-squares adversarial terms: `(L_D, L_G)` from discriminator scores
/// on the real and predicted shapes.
pub fn lsgan_terms<T: Real>(d_real: T, d_fake: T) -> (T, T) {
    let half = c::<T>(0.5);
    let l_d = half * ((d_real - T::one()) * (d_real - T::one()) + d_fake * d_fake);
    let l_g = half * (d_fake - T::one()) * (d_fake - T::one());
    (l_d, l_g)
}

/// Weights of the five loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights<T> {
    pub cd: T,
    pub normal: T,
    pub gan: T,
    pub sdf: T,
    pub def: T,
}

impl<T: Real> Default for LossWeights<T> {
    fn default() -> Self {
        // Declared defaults: the published values live in an unavailable
        // supplement.
        Self {
            cd: T::one(),
            normal: c(0.1),
            gan: T::zero(),
            sdf: c(0.2),
            def: c(0.05),
        }
    }
}

impl<T: Real> LossWeights<T> {
    pub fn is_valid(&self) -> bool {
        [self.cd, self.normal, self.gan, self.sdf, self.def]
            .iter()
            .all(|w| w.is_finite() && *w >= T::zero())
    }
}

/// Unweighted values of the five loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms<T> {
    pub cd: T,
    pub normal: T,
    pub gan: T,
    pub sdf: T,
    pub def: T,
}

/// Per-term values plus the weighted total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport<T> {
    pub terms: LossTerms<T>,
    pub total: T,
}

impl<T: Real> LossReport<T> {
    pub fn is_finite(&self) -> bool {
        let t = &self.terms;
        [t.cd, t.normal, t.gan, t.sdf, t.def, self.total]
            .iter()
            .all(|v| v.is_finite())
    }
}

pub fn total_loss<T: Real>(terms: LossTerms<T>, weights: &LossWeights<T>) -> LossReport<T> {
    let total = weights.cd * terms.cd
        + weights.normal * terms.normal
        + weights.gan * terms.gan
        + weights.sdf * terms.sdf
        + weights.def * terms.def;
    LossReport { terms, total }
}
