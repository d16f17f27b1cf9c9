//! Selective volume subdivision of surface tetrahedra and differentiable
//! Loop surface subdivision with a per-vertex smoothness blend.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::scalar::{c, Real};
use crate::tetgrid::{TetGrid, TetId};

/// Which tets get split and where their edge midpoints go.
///
/// `selected` always covers the surface tets plus every tet sharing a vertex
/// with one; `edge_midpoints` assigns one new vertex id per distinct edge of
/// the selection, in deterministic first-seen order.
#[derive(Debug, Clone)]
pub struct SubdivisionPlan {
    selected: Vec<TetId>,
    edge_order: Vec<(u32, u32)>,
    edge_midpoints: HashMap<(u32, u32), u32>,
    base_vertex_count: usize,
}

impl SubdivisionPlan {
    /// Plans the split of all surface tets and their vertex-adjacent
    /// neighbors.
    pub fn for_surface<T: Real>(grid: &TetGrid<T>) -> Result<Self> {
        let surface = grid.surface_tets();
        if surface.is_empty() {
            return Err(Error::NoSurface);
        }
        let mut vertex_on_surface = vec![false; grid.vertex_count()];
        for id in &surface {
            for &v in &grid.tet(*id) {
                vertex_on_surface[v as usize] = true;
            }
        }
        let selected: Vec<TetId> = (0..grid.tet_count())
            .filter(|&k| {
                grid.tets()[k]
                    .iter()
                    .any(|&v| vertex_on_surface[v as usize])
            })
            .map(|k| TetId(k as u32))
            .collect();
        Ok(Self::for_selection(grid, selected))
    }

    /// Plans the split of an explicit tet selection.
    pub fn for_selection<T: Real>(grid: &TetGrid<T>, selected: Vec<TetId>) -> Self {
        let base_vertex_count = grid.vertex_count();
        let mut edge_order = Vec::new();
        let mut edge_midpoints = HashMap::new();
        for id in &selected {
            let tet = grid.tet(*id);
            for (la, lb) in crate::marching::TET_EDGES {
                let (a, b) = (tet[la], tet[lb]);
                let key = (a.min(b), a.max(b));
                edge_midpoints.entry(key).or_insert_with(|| {
                    let id = (base_vertex_count + edge_order.len()) as u32;
                    edge_order.push(key);
                    id
                });
            }
        }
        Self {
            selected,
            edge_order,
            edge_midpoints,
            base_vertex_count,
        }
    }

    pub fn selected(&self) -> &[TetId] {
        &self.selected
    }

    pub fn midpoint_count(&self) -> usize {
        self.edge_order.len()
    }

    /// Edges receiving midpoints, in new-vertex-id order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edge_order
    }

    pub fn midpoint_of(&self, a: u32, b: u32) -> Option<u32> {
        self.edge_midpoints.get(&(a.min(b), a.max(b))).copied()
    }
}

/// Splits every selected tet into 8 children through its edge midpoints and
/// drops the unselected tets. Midpoint SDF and deformation are the means of
/// the edge endpoints, so the extracted surface is unchanged: the children
/// interpolate the same piecewise-linear field.
pub fn subdivide_volume<T: Real>(grid: &TetGrid<T>, plan: &SubdivisionPlan) -> Result<TetGrid<T>> {
    if plan.selected.is_empty() {
        return Err(Error::NoSurface);
    }
    if plan.base_vertex_count != grid.vertex_count() {
        return Err(Error::invalid(
            "subdivision plan built for a different grid",
        ));
    }
    for id in &plan.selected {
        if id.index() >= grid.tet_count() {
            return Err(Error::invalid("plan selects a tet outside the grid"));
        }
    }

    let half = c::<T>(0.5);
    let mut rest = grid.rest_positions().to_vec();
    let mut deform = grid.deformations().to_vec();
    let mut sdf = grid.sdf().to_vec();
    rest.reserve(plan.midpoint_count());
    for &(a, b) in &plan.edge_order {
        let (a, b) = (a as usize, b as usize);
        rest.push((grid.rest_positions()[a] + grid.rest_positions()[b]) * half);
        deform.push((grid.deformations()[a] + grid.deformations()[b]) * half);
        sdf.push((grid.sdf()[a] + grid.sdf()[b]) * half);
    }

    let mut tets: Vec<[u32; 4]> = Vec::with_capacity(8 * plan.selected.len());
    for id in &plan.selected {
        let [a, b, c_, d] = grid.tet(*id);
        let m = |x: u32, y: u32| plan.midpoint_of(x, y).expect("plan covers selected edges");
        let (ab, ac, ad) = (m(a, b), m(a, c_), m(a, d));
        let (bc, bd, cd) = (m(b, c_), m(b, d), m(c_, d));
        // Four corner children, then the inner octahedron split around the
        // (ac, bd) diagonal.
        tets.push([a, ab, ac, ad]);
        tets.push([ab, b, bc, bd]);
        tets.push([ac, bc, c_, cd]);
        tets.push([ad, bd, cd, d]);
        tets.push([ac, bd, ab, ad]);
        tets.push([ac, bd, ad, cd]);
        tets.push([ac, bd, cd, bc]);
        tets.push([ac, bd, bc, ab]);
    }

    // Canonicalize children to positive rest volume.
    for tet in &mut tets {
        let v = crate::math::tet_signed_volume(
            rest[tet[0] as usize],
            rest[tet[1] as usize],
            rest[tet[2] as usize],
            rest[tet[3] as usize],
        );
        if v < T::zero() {
            tet.swap(2, 3);
        }
    }

    Ok(TetGrid::from_parts(
        rest,
        deform,
        sdf,
        tets,
        grid.level() + 1,
        grid.base_resolution(),
        grid.clamp_radius(),
        grid.scheme(),
    ))
}

/// Per-vertex smoothness blend for Loop subdivision, each in (0, 1).
#[derive(Debug, Clone)]
pub struct AlphaField<T> {
    alpha: Vec<T>,
}

impl<T: Real> AlphaField<T> {
    pub fn new(alpha: Vec<T>) -> Result<Self> {
        if alpha
            .iter()
            .any(|&a| !(a > T::zero() && a < T::one()) || !a.is_finite())
        {
            return Err(Error::invalid("alpha values must lie strictly in (0, 1)"));
        }
        Ok(Self { alpha })
    }

    /// Squashes unconstrained parameters through a sigmoid.
    pub fn from_unconstrained(raw: &[T]) -> Self {
        Self {
            alpha: raw.iter().map(|&r| sigmoid(r)).collect(),
        }
    }

    pub fn uniform(alpha: T, count: usize) -> Result<Self> {
        Self::new(vec![alpha; count])
    }

    pub fn values(&self) -> &[T] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Loop's even-vertex neighbor weight for valence `n`.
pub fn loop_beta<T: Real>(valence: usize) -> T {
    let n = T::from_usize_lossy(valence);
    let inner = c::<T>(0.375) + c::<T>(0.25) * (c::<T>(std::f64::consts::TAU) / n).cos();
    (c::<T>(0.625) - inner * inner) / n
}

/// The alpha at which the blended even-vertex update reproduces classic
/// Loop subdivision for valence `n`: `alpha = n * beta(n)`.
pub fn classic_loop_alpha<T: Real>(valence: usize) -> T {
    T::from_usize_lossy(valence) * loop_beta::<T>(valence)
}

/// Per-vertex alphas that make one subdivision step reproduce classic Loop
/// on this mesh, derived from each vertex's current valence.
pub fn classic_loop_alphas<T: Real>(mesh: &TriangleMesh<T>) -> Result<AlphaField<T>> {
    let topo = build_loop_topology(mesh)?;
    AlphaField::new(
        topo.rings
            .iter()
            .map(|ring| classic_loop_alpha(ring.len()))
            .collect(),
    )
}

/// Connectivity of one subdivision step.
struct LoopTopology {
    /// (a, b, opposite0, opposite1) per edge, a < b, discovery order.
    edges: Vec<[u32; 4]>,
    /// One-ring neighbors per even vertex, discovery order.
    rings: Vec<Vec<u32>>,
    triangles_out: Vec<[u32; 3]>,
    n_even: usize,
}

fn build_loop_topology<T: Real>(mesh: &TriangleMesh<T>) -> Result<LoopTopology> {
    if mesh.is_empty() {
        return Err(Error::invalid("cannot subdivide an empty mesh"));
    }
    let n_even = mesh.vertex_count();
    let mut edge_index: HashMap<(u32, u32), usize> = HashMap::new();
    let mut edges: Vec<[u32; 4]> = Vec::new();
    let mut use_count: Vec<u8> = Vec::new();

    for tri in &mesh.triangles {
        for (a, b, opposite) in [
            (tri[0], tri[1], tri[2]),
            (tri[1], tri[2], tri[0]),
            (tri[2], tri[0], tri[1]),
        ] {
            let key = (a.min(b), a.max(b));
            match edge_index.get(&key) {
                None => {
                    edge_index.insert(key, edges.len());
                    edges.push([key.0, key.1, opposite, u32::MAX]);
                    use_count.push(1);
                }
                Some(&e) => {
                    if use_count[e] == 2 {
                        return Err(Error::invalid(
                            "non-manifold input: edge shared by more than two triangles",
                        ));
                    }
                    edges[e][3] = opposite;
                    use_count[e] += 1;
                }
            }
        }
    }
    if use_count.iter().any(|&u| u != 2) {
        return Err(Error::invalid(
            "non-manifold input: mesh has boundary edges",
        ));
    }

    let mut rings: Vec<Vec<u32>> = vec![Vec::new(); n_even];
    for e in &edges {
        rings[e[0] as usize].push(e[1]);
        rings[e[1] as usize].push(e[0]);
    }

    let mut triangles_out = Vec::with_capacity(4 * mesh.triangle_count());
    let odd_id = |a: u32, b: u32| -> u32 {
        let key = (a.min(b), a.max(b));
        (n_even + edge_index[&key]) as u32
    };
    for tri in &mesh.triangles {
        let [i, j, k] = *tri;
        let (eij, ejk, eki) = (odd_id(i, j), odd_id(j, k), odd_id(k, i));
        triangles_out.push([i, eij, eki]);
        triangles_out.push([j, ejk, eij]);
        triangles_out.push([k, eki, ejk]);
        triangles_out.push([eij, ejk, eki]);
    }

    Ok(LoopTopology {
        edges,
        rings,
        triangles_out,
        n_even,
    })
}

fn loop_step_forward<T: Real>(
    topo: &LoopTopology,
    positions: &[Vec3<T>],
    alpha: &[T],
) -> (Vec<Vec3<T>>, Vec<T>) {
    let mut out_positions = Vec::with_capacity(topo.n_even + topo.edges.len());
    let mut out_alpha = Vec::with_capacity(topo.n_even + topo.edges.len());

    for v in 0..topo.n_even {
        let ring = &topo.rings[v];
        let mut mean = Vec3::zero();
        for &u in ring {
            mean += positions[u as usize];
        }
        let mean = mean / T::from_usize_lossy(ring.len());
        let a = alpha[v];
        out_positions.push(positions[v] * (T::one() - a) + mean * a);
        out_alpha.push(a);
    }

    let w_end = c::<T>(0.375);
    let w_opp = c::<T>(0.125);
    let half = c::<T>(0.5);
    for e in &topo.edges {
        let p = (positions[e[0] as usize] + positions[e[1] as usize]) * w_end
            + (positions[e[2] as usize] + positions[e[3] as usize]) * w_opp;
        out_positions.push(p);
        out_alpha.push((alpha[e[0] as usize] + alpha[e[1] as usize]) * half);
    }

    (out_positions, out_alpha)
}

/// Loop subdivision with learnable smoothness.
///
/// Odd (edge) vertices use the classic 3/8, 3/8, 1/8, 1/8 stencil. Each even
/// vertex blends toward the mean of its one-ring: `(1 - alpha) * v + alpha *
/// mean(ring)`, which reproduces classic Loop at `alpha = n * beta(n)`. Alpha
/// values carry over to later iterations; odd vertices inherit the mean of
/// their edge endpoints.
pub fn loop_subdivide<T: Real>(
    mesh: &TriangleMesh<T>,
    alphas: &AlphaField<T>,
    iterations: u32,
) -> Result<TriangleMesh<T>> {
    if alphas.len() != mesh.vertex_count() {
        return Err(Error::invalid(format!(
            "alpha count {} does not match vertex count {}",
            alphas.len(),
            mesh.vertex_count()
        )));
    }
    if iterations == 0 {
        return Ok(mesh.clone());
    }
    let mut positions = mesh.positions.clone();
    let mut alpha = alphas.values().to_vec();
    let mut triangles = mesh.triangles.clone();
    for _ in 0..iterations {
        let current = TriangleMesh::new(positions.clone(), triangles);
        let topo = build_loop_topology(&current)?;
        let (p, a) = loop_step_forward(&topo, &positions, &alpha);
        positions = p;
        alpha = a;
        triangles = topo.triangles_out;
    }
    Ok(TriangleMesh::new(positions, triangles))
}

/// Reverse-mode gradient of [`loop_subdivide`] with respect to the input
/// positions and alphas. `d_out_positions` must match the forward output.
pub fn loop_subdivide_vjp<T: Real>(
    mesh: &TriangleMesh<T>,
    alphas: &AlphaField<T>,
    iterations: u32,
    d_out_positions: &[Vec3<T>],
) -> Result<(Vec<Vec3<T>>, Vec<T>)> {
    if alphas.len() != mesh.vertex_count() {
        return Err(Error::invalid(format!(
            "alpha count {} does not match vertex count {}",
            alphas.len(),
            mesh.vertex_count()
        )));
    }
    if iterations == 0 {
        if d_out_positions.len() != mesh.vertex_count() {
            return Err(Error::invalid("cotangent length mismatch"));
        }
        return Ok((d_out_positions.to_vec(), vec![T::zero(); alphas.len()]));
    }

    // Forward replay, recording per-level topology and inputs.
    let mut levels: Vec<(LoopTopology, Vec<Vec3<T>>, Vec<T>)> = Vec::new();
    let mut positions = mesh.positions.clone();
    let mut alpha = alphas.values().to_vec();
    let mut triangles = mesh.triangles.clone();
    for _ in 0..iterations {
        let current = TriangleMesh::new(positions.clone(), triangles);
        let topo = build_loop_topology(&current)?;
        let (p, a) = loop_step_forward(&topo, &positions, &alpha);
        triangles = topo.triangles_out.clone();
        levels.push((topo, positions, alpha.clone()));
        positions = p;
        alpha = a;
    }
    if d_out_positions.len() != positions.len() {
        return Err(Error::invalid(
            "cotangent length does not match forward output",
        ));
    }

    let mut d_pos = d_out_positions.to_vec();
    let mut d_alpha = vec![T::zero(); positions.len()];
    let w_end = c::<T>(0.375);
    let w_opp = c::<T>(0.125);
    let half = c::<T>(0.5);

    for (topo, in_positions, in_alpha) in levels.iter().rev() {
        let n_in = in_positions.len();
        let mut d_pos_in = vec![Vec3::zero(); n_in];
        let mut d_alpha_in = vec![T::zero(); n_in];

        for v in 0..topo.n_even {
            let g = d_pos[v];
            let ring = &topo.rings[v];
            let n_ring = T::from_usize_lossy(ring.len());
            let a = in_alpha[v];
            d_pos_in[v] += g * (T::one() - a);
            let per_neighbor = a / n_ring;
            let mut mean = Vec3::zero();
            for &u in ring {
                d_pos_in[u as usize] += g * per_neighbor;
                mean += in_positions[u as usize];
            }
            let mean = mean / n_ring;
            d_alpha_in[v] += g.dot(mean - in_positions[v]);
            d_alpha_in[v] += d_alpha[v];
        }

        for (k, e) in topo.edges.iter().enumerate() {
            let idx = topo.n_even + k;
            let g = d_pos[idx];
            d_pos_in[e[0] as usize] += g * w_end;
            d_pos_in[e[1] as usize] += g * w_end;
            d_pos_in[e[2] as usize] += g * w_opp;
            d_pos_in[e[3] as usize] += g * w_opp;
            let ga = d_alpha[idx] * half;
            d_alpha_in[e[0] as usize] += ga;
            d_alpha_in[e[1] as usize] += ga;
        }

        d_pos = d_pos_in;
        d_alpha = d_alpha_in;
    }

    Ok((d_pos, d_alpha))
}
