//! Marching tetrahedra surface extraction, its reverse-mode gradient, and a
//! marching cubes baseline for the oracle benchmark.
//!
//! Extraction is fully deterministic: tets are processed in index order,
//! crossed edges in canonical order, and mesh vertices are deduplicated by
//! the sorted grid-edge pair they were born on. That provenance is what the
//! vector-Jacobian product consumes to push surface cotangents back onto
//! grid vertex positions and SDF values.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::scalar::Real;
use crate::tetgrid::{sdf_is_negative, TetGrid, VertexId};

/// Local edges of a tetrahedron in canonical order.
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Surface configuration of one tetrahedron. Triangles are listed as local
/// edge indices into [`TET_EDGES`], wound so normals point from negative
/// toward positive SDF (for positively oriented tets).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TetCase {
    Empty,
    OneTriangle([u8; 3]),
    TwoTriangles([[u8; 3]; 2]),
}

#[inline]
fn local_edge_id(a: usize, b: usize) -> u8 {
    const LOOKUP: [[i8; 4]; 4] = [[-1, 0, 1, 2], [0, -1, 3, 4], [1, 3, -1, 5], [2, 4, 5, -1]];
    let id = LOOKUP[a][b];
    debug_assert!(id >= 0);
    id as u8
}

/// True for odd permutations of (0, 1, 2, 3).
fn permutation_is_odd(perm: [usize; 4]) -> bool {
    let mut inversions = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Maps the 16 sign patterns onto the three unique surface configurations.
/// A pattern and its complement produce the same crossed edges with flipped
/// winding.
pub fn classify_tet(negative: [bool; 4]) -> TetCase {
    let negatives: Vec<usize> = (0..4).filter(|&i| negative[i]).collect();
    match negatives.len() {
        0 | 4 => TetCase::Empty,
        1 | 3 => {
            let apex_is_negative = negatives.len() == 1;
            let apex = if apex_is_negative {
                negatives[0]
            } else {
                (0..4).find(|i| !negative[*i]).unwrap()
            };
            let others: Vec<usize> = (0..4).filter(|&i| i != apex).collect();
            let odd = permutation_is_odd([apex, others[0], others[1], others[2]]);
            let mut tri = [
                local_edge_id(apex, others[0]),
                local_edge_id(apex, others[1]),
                local_edge_id(apex, others[2]),
            ];
            // With an even permutation the triangle faces away from the
            // apex; flip when that disagrees with negative-to-positive.
            if odd == apex_is_negative {
                tri.swap(1, 2);
            }
            TetCase::OneTriangle(tri)
        }
        _ => {
            let (a, b) = (negatives[0], negatives[1]);
            let positives: Vec<usize> = (0..4).filter(|&i| !negative[i]).collect();
            let (p, q) = (positives[0], positives[1]);
            let mut quad = [
                local_edge_id(a, p),
                local_edge_id(a, q),
                local_edge_id(b, q),
                local_edge_id(b, p),
            ];
            if permutation_is_odd([a, b, p, q]) {
                quad = [quad[0], quad[3], quad[2], quad[1]];
            }
            TetCase::TwoTriangles([[quad[0], quad[1], quad[2]], [quad[0], quad[2], quad[3]]])
        }
    }
}

/// Zero crossing of the linear interpolation along an edge with a strict
/// sign change. Symmetric under swapping the endpoints.
#[inline]
pub fn edge_crossing<T: Real>(p_a: Vec3<T>, p_b: Vec3<T>, s_a: T, s_b: T) -> Vec3<T> {
    debug_assert!(sdf_is_negative(s_a) != sdf_is_negative(s_b));
    (p_a * s_b - p_b * s_a) / (s_b - s_a)
}

/// Partial derivatives of [`edge_crossing`]:
/// weights `(w_a, w_b)` on the endpoint positions and the vectors
/// `d/ds_a`, `d/ds_b`.
#[inline]
pub fn edge_crossing_grads<T: Real>(
    p_a: Vec3<T>,
    p_b: Vec3<T>,
    s_a: T,
    s_b: T,
) -> (T, T, Vec3<T>, Vec3<T>) {
    let d = s_b - s_a;
    let diff = p_a - p_b;
    let w_a = s_b / d;
    let w_b = -s_a / d;
    let d_sa = diff * (s_b / (d * d));
    let d_sb = diff * (-s_a / (d * d));
    (w_a, w_b, d_sa, d_sb)
}

/// Gradient accumulators mirroring a grid's per-vertex parameters.
#[derive(Debug, Clone)]
pub struct Cotangents<T> {
    pub d_position: Vec<Vec3<T>>,
    pub d_sdf: Vec<T>,
}

impl<T: Real> Cotangents<T> {
    pub fn zeros(vertex_count: usize) -> Self {
        Self {
            d_position: vec![Vec3::zero(); vertex_count],
            d_sdf: vec![T::zero(); vertex_count],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_position.iter().all(|v| v.is_finite()) && self.d_sdf.iter().all(|s| s.is_finite())
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.d_position.iter_mut().zip(&other.d_position) {
            *a += *b;
        }
        for (a, b) in self.d_sdf.iter_mut().zip(&other.d_sdf) {
            *a += *b;
        }
    }
}

/// Extracts the zero level set of the grid's SDF as a triangle mesh.
pub fn marching_tetrahedra<T: Real>(grid: &TetGrid<T>) -> TriangleMesh<T> {
    let positions = grid.deformed_positions();
    let sdf = grid.sdf();
    let negative: Vec<bool> = sdf.iter().map(|&s| sdf_is_negative(s)).collect();

    let mut edge_to_vertex: HashMap<(u32, u32), u32> = HashMap::new();
    let mut out_positions: Vec<Vec3<T>> = Vec::new();
    let mut provenance: Vec<(VertexId, VertexId)> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    let mut resolve = |ga: u32, gb: u32| -> u32 {
        let key = (ga.min(gb), ga.max(gb));
        if let Some(&id) = edge_to_vertex.get(&key) {
            return id;
        }
        let id = out_positions.len() as u32;
        let crossing = edge_crossing(
            positions[key.0 as usize],
            positions[key.1 as usize],
            sdf[key.0 as usize],
            sdf[key.1 as usize],
        );
        out_positions.push(crossing);
        provenance.push((VertexId(key.0), VertexId(key.1)));
        edge_to_vertex.insert(key, id);
        id
    };

    for tet in grid.tets() {
        let signs = [
            negative[tet[0] as usize],
            negative[tet[1] as usize],
            negative[tet[2] as usize],
            negative[tet[3] as usize],
        ];
        let case = classify_tet(signs);
        if case == TetCase::Empty {
            continue;
        }
        // Resolve crossings in canonical edge order first so the vertex
        // numbering does not depend on triangle winding.
        let mut edge_vertex = [u32::MAX; 6];
        for (e, &(la, lb)) in TET_EDGES.iter().enumerate() {
            if signs[la] != signs[lb] {
                edge_vertex[e] = resolve(tet[la], tet[lb]);
            }
        }
        let mut emit = |tri: [u8; 3]| {
            triangles.push([
                edge_vertex[tri[0] as usize],
                edge_vertex[tri[1] as usize],
                edge_vertex[tri[2] as usize],
            ]);
        };
        match case {
            TetCase::Empty => unreachable!(),
            TetCase::OneTriangle(tri) => emit(tri),
            TetCase::TwoTriangles([t0, t1]) => {
                emit(t0);
                emit(t1);
            }
        }
    }

    TriangleMesh {
        positions: out_positions,
        triangles,
        provenance: Some(provenance),
    }
}

/// Reverse-mode gradient of [`marching_tetrahedra`]: pushes cotangents on
/// mesh vertex positions back to grid vertex positions and SDF values.
///
/// The mesh must be the unmodified output of `marching_tetrahedra` on this
/// exact grid (provenance intact, signs unchanged).
pub fn marching_tetrahedra_vjp<T: Real>(
    grid: &TetGrid<T>,
    mesh: &TriangleMesh<T>,
    d_mesh_positions: &[Vec3<T>],
) -> Result<Cotangents<T>> {
    let provenance = mesh
        .provenance
        .as_ref()
        .ok_or_else(|| Error::invalid("mesh carries no grid provenance"))?;
    if provenance.len() != mesh.vertex_count() || d_mesh_positions.len() != mesh.vertex_count() {
        return Err(Error::invalid("cotangent/provenance length mismatch"));
    }

    let sdf = grid.sdf();
    let mut cot = Cotangents::zeros(grid.vertex_count());
    for (v, &(VertexId(ga), VertexId(gb))) in provenance.iter().enumerate() {
        let (ga, gb) = (ga as usize, gb as usize);
        if ga >= grid.vertex_count() || gb >= grid.vertex_count() {
            return Err(Error::invalid("provenance references a foreign grid"));
        }
        let (s_a, s_b) = (sdf[ga], sdf[gb]);
        if sdf_is_negative(s_a) == sdf_is_negative(s_b) {
            return Err(Error::invalid(
                "provenance mismatch: edge no longer crosses the surface",
            ));
        }
        let g = d_mesh_positions[v];
        let p_a = grid.deformed_position(ga);
        let p_b = grid.deformed_position(gb);
        let (w_a, w_b, d_sa, d_sb) = edge_crossing_grads(p_a, p_b, s_a, s_b);
        cot.d_position[ga] += g * w_a;
        cot.d_position[gb] += g * w_b;
        cot.d_sdf[ga] += g.dot(d_sa);
        cot.d_sdf[gb] += g.dot(d_sb);
    }
    Ok(cot)
}

/// Samples `f` on the `(resolution + 1)^3` lattice over the unit cube, in
/// the layout [`marching_cubes`] expects.
pub fn sample_lattice<T: Real>(f: impl Fn(Vec3<T>) -> T, resolution: u32) -> Vec<T> {
    let nodes = resolution as usize + 1;
    let inv = T::one() / T::from_usize_lossy(resolution as usize);
    let mut values = Vec::with_capacity(nodes * nodes * nodes);
    for x in 0..nodes {
        for y in 0..nodes {
            for z in 0..nodes {
                values.push(f(Vec3::new(
                    T::from_usize_lossy(x) * inv,
                    T::from_usize_lossy(y) * inv,
                    T::from_usize_lossy(z) * inv,
                )));
            }
        }
    }
    values
}

#[inline]
fn lattice_index(x: usize, y: usize, z: usize, nodes: usize) -> usize {
    (x * nodes + y) * nodes + z
}

/// Marching cubes over a dense `(resolution + 1)^3` lattice spanning the
/// unit cube. Baseline for the oracle benchmark; no gradients. Uses the same
/// linear zero-crossing formula as marching tetrahedra.
pub fn marching_cubes<T: Real>(values: &[T], resolution: u32) -> TriangleMesh<T> {
    assert!(resolution >= 1, "resolution must be >= 1");
    let n = resolution as usize;
    let nodes = n + 1;
    assert_eq!(
        values.len(),
        nodes * nodes * nodes,
        "lattice size does not match resolution"
    );

    let inv = T::one() / T::from_usize_lossy(n);
    let node_pos = |x: usize, y: usize, z: usize| -> Vec3<T> {
        Vec3::new(
            T::from_usize_lossy(x) * inv,
            T::from_usize_lossy(y) * inv,
            T::from_usize_lossy(z) * inv,
        )
    };

    // Cell-local edges: (axis, node offset of the edge origin).
    const EDGE_ORIGIN: [(usize, [usize; 3]); 12] = [
        (0, [0, 0, 0]),
        (0, [0, 1, 0]),
        (0, [0, 0, 1]),
        (0, [0, 1, 1]),
        (1, [0, 0, 0]),
        (1, [1, 0, 0]),
        (1, [0, 0, 1]),
        (1, [1, 0, 1]),
        (2, [0, 0, 0]),
        (2, [1, 0, 0]),
        (2, [0, 1, 0]),
        (2, [1, 1, 0]),
    ];

    let mut edge_to_vertex: HashMap<(u8, u32, u32, u32), u32> = HashMap::new();
    let mut positions: Vec<Vec3<T>> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let corner = |dx: usize, dy: usize, dz: usize| -> T {
                    values[lattice_index(x + dx, y + dy, z + dz, nodes)]
                };
                let cs = [
                    corner(0, 0, 0),
                    corner(1, 0, 0),
                    corner(0, 1, 0),
                    corner(1, 1, 0),
                    corner(0, 0, 1),
                    corner(1, 0, 1),
                    corner(0, 1, 1),
                    corner(1, 1, 1),
                ];
                let mut config = 0usize;
                for (bit, &s) in cs.iter().enumerate() {
                    if sdf_is_negative(s) {
                        config |= 1 << bit;
                    }
                }
                if config == 0 || config == 255 {
                    continue;
                }

                let entry = MC_TRIS[config];
                let triangle_count = (entry & 0xF) as usize;
                let mut edge_vertex = [u32::MAX; 12];
                let mut offset = 4;
                let mut scratch = [0u32; 3];
                for _ in 0..triangle_count {
                    for slot in &mut scratch {
                        let e = ((entry >> offset) & 0xF) as usize;
                        offset += 4;
                        if edge_vertex[e] == u32::MAX {
                            let (axis, d) = EDGE_ORIGIN[e];
                            let (ox, oy, oz) = (x + d[0], y + d[1], z + d[2]);
                            let key = (axis as u8, ox as u32, oy as u32, oz as u32);
                            let id = if let Some(&id) = edge_to_vertex.get(&key) {
                                id
                            } else {
                                let mut bx = ox;
                                let mut by = oy;
                                let mut bz = oz;
                                match axis {
                                    0 => bx += 1,
                                    1 => by += 1,
                                    _ => bz += 1,
                                }
                                let s_a = values[lattice_index(ox, oy, oz, nodes)];
                                let s_b = values[lattice_index(bx, by, bz, nodes)];
                                let p = edge_crossing(
                                    node_pos(ox, oy, oz),
                                    node_pos(bx, by, bz),
                                    s_a,
                                    s_b,
                                );
                                let id = positions.len() as u32;
                                positions.push(p);
                                edge_to_vertex.insert(key, id);
                                id
                            };
                            edge_vertex[e] = id;
                        }
                        *slot = edge_vertex[e];
                    }
                    triangles.push(scratch);
                }
            }
        }
    }

    TriangleMesh::new(positions, triangles)
}

/// Triangle configurations per cube sign pattern. Bits [3:0] hold the
/// triangle count; each following 4-bit field is a cell edge index.
/// Ported from the public-domain `MarchingCubeCpp` tables.
#[rustfmt::skip]
static MC_TRIS: [u64; 256] = [
    0, 33793, 36945, 159668546,
    18961, 144771090, 5851666, 595283255635,
    20913, 67640146, 193993474, 655980856339,
    88782242, 736732689667, 797430812739, 194554754,
    26657, 104867330, 136709522, 298069416227,
    109224258, 8877909667, 318136408323, 1567994331701604,
    189884450, 350847647843, 559958167731, 3256298596865604,
    447393122899, 651646838401572, 2538311371089956, 737032694307,
    29329, 43484162, 91358498, 374810899075,
    158485010, 178117478419, 88675058979, 433581536604804,
    158486962, 649105605635, 4866906995, 3220959471609924,
    649165714851, 3184943915608436, 570691368417972, 595804498035,
    124295042, 431498018963, 508238522371, 91518530,
    318240155763, 291789778348404, 1830001131721892, 375363605923,
    777781811075, 1136111028516116, 3097834205243396, 508001629971,
    2663607373704004, 680242583802939237, 333380770766129845, 179746658,
    42545, 138437538, 93365810, 713842853011,
    73602098, 69575510115, 23964357683, 868078761575828,
    28681778, 713778574611, 250912709379, 2323825233181284,
    302080811955, 3184439127991172, 1694042660682596, 796909779811,
    176306722, 150327278147, 619854856867, 1005252473234484,
    211025400963, 36712706, 360743481544788, 150627258963,
    117482600995, 1024968212107700, 2535169275963444, 4734473194086550421,
    628107696687956, 9399128243, 5198438490361643573, 194220594,
    104474994, 566996932387, 427920028243, 2014821863433780,
    492093858627, 147361150235284, 2005882975110676, 9671606099636618005,
    777701008947, 3185463219618820, 482784926917540, 2900953068249785909,
    1754182023747364, 4274848857537943333, 13198752741767688709, 2015093490989156,
    591272318771, 2659758091419812, 1531044293118596, 298306479155,
    408509245114388, 210504348563, 9248164405801223541, 91321106,
    2660352816454484, 680170263324308757, 8333659837799955077, 482966828984116,
    4274926723105633605, 3184439197724820, 192104450, 15217,
    45937, 129205250, 129208402, 529245952323,
    169097138, 770695537027, 382310500883, 2838550742137652,
    122763026, 277045793139, 81608128403, 1991870397907988,
    362778151475, 2059003085103236, 2132572377842852, 655681091891,
    58419234, 239280858627, 529092143139, 1568257451898804,
    447235128115, 679678845236084, 2167161349491220, 1554184567314086709,
    165479003923, 1428768988226596, 977710670185060, 10550024711307499077,
    1305410032576132, 11779770265620358997, 333446212255967269, 978168444447012,
    162736434, 35596216627, 138295313843, 891861543990356,
    692616541075, 3151866750863876, 100103641866564, 6572336607016932133,
    215036012883, 726936420696196, 52433666, 82160664963,
    2588613720361524, 5802089162353039525, 214799000387, 144876322,
    668013605731, 110616894681956, 1601657732871812, 430945547955,
    3156382366321172, 7644494644932993285, 3928124806469601813, 3155990846772900,
    339991010498708, 10743689387941597493, 5103845475, 105070898,
    3928064910068824213, 156265010, 1305138421793636, 27185,
    195459938, 567044449971, 382447549283, 2175279159592324,
    443529919251, 195059004769796, 2165424908404116, 1554158691063110021,
    504228368803, 1436350466655236, 27584723588724, 1900945754488837749,
    122971970, 443829749251, 302601798803, 108558722,
    724700725875, 43570095105972, 2295263717447940, 2860446751369014181,
    2165106202149444, 69275726195, 2860543885641537797, 2165106320445780,
    2280890014640004, 11820349930268368933, 8721082628082003989, 127050770,
    503707084675, 122834978, 2538193642857604, 10129,
    801441490467, 2923200302876740, 1443359556281892, 2901063790822564949,
    2728339631923524, 7103874718248233397, 12775311047932294245, 95520290,
    2623783208098404, 1900908618382410757, 137742672547, 2323440239468964,
    362478212387, 727199575803140, 73425410, 34337,
    163101314, 668566030659, 801204361987, 73030562,
    591509145619, 162574594, 100608342969108, 5553,
    724147968595, 1436604830452292, 176259090, 42001,
    143955266, 2385, 18433, 0,
];
