//! Coarse-to-fine optimization: fits the grid's SDF values and vertex
//! deformations (and optionally the surface-subdivision alphas) to a target
//! point cloud or mesh by chaining the vector-Jacobian products of surface
//! extraction, sampling and the losses, with Adam updates on the raw
//! parameters. Also hosts the oracle benchmark comparing marching
//! tetrahedra against marching cubes at equal query budgets.

use crate::error::{Error, Result};
use crate::losses::{
    chamfer_vjp_with, chamfer_with, correspondences, deformation_regularization,
    deformation_regularization_vjp, normal_consistency_vjp_with, normal_consistency_with,
    sample_surface, sample_surface_vjp, sdf_regularization_from_values,
    sdf_regularization_vjp_from_values, total_loss, ChamferOrder, LossReport, LossTerms,
    LossWeights, NearestNeighbors, PointSample,
};
use crate::marching::{
    marching_cubes, marching_tetrahedra, marching_tetrahedra_vjp, sample_lattice,
};
use crate::mesh::TriangleMesh;
use crate::parallel::fill_slots;
use crate::rng::CounterRng;
use crate::scalar::{c, Real};
use crate::sdfield::{sample_analytic_surface, AnalyticSdf, MeshSdf};
use crate::subdivision::{
    loop_subdivide, loop_subdivide_vjp, sigmoid, subdivide_volume, AlphaField, SubdivisionPlan,
};
use crate::tetgrid::{build_grid, sdf_is_negative, GridScheme, TetGrid};
use crate::Vec3;

/// Switches that disable individual pipeline stages for comparison runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ablations {
    pub freeze_deformation: bool,
    pub disable_volume_subdiv: bool,
    pub disable_surface_subdiv: bool,
}

#[derive(Debug, Clone)]
pub struct FitConfig<T> {
    pub base_resolution: u32,
    pub scheme: GridScheme,
    /// Optimization steps per grid level.
    pub iterations_per_level: u32,
    /// Number of volume subdivisions (levels beyond the base grid).
    pub levels: u32,
    /// Loop-subdivision iterations applied to every extracted surface
    /// (0 disables surface subdivision and the alpha parameters).
    pub surface_subdiv_iters: u32,
    pub sample_count: usize,
    pub weights: LossWeights<T>,
    /// Adam step size for SDF values and alphas, as a fraction of the
    /// current cell size (SDF values are lengths; a unit step moves a
    /// crossing by about the same amount).
    pub step_size: T,
    /// Adam step size for vertex deformations, as a fraction of the
    /// current cell size.
    pub deform_step_size: T,
    /// Multiplicative step-size decay reached by the end of each level;
    /// settles the Adam jitter so the surface can approach the
    /// representation limit. 1 disables the schedule.
    pub step_decay: T,
    pub beta1: T,
    pub beta2: T,
    pub seed: u64,
    pub workers: usize,
    pub ablations: Ablations,
}

impl<T: Real> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            base_resolution: 32,
            scheme: GridScheme::SixTet,
            iterations_per_level: 150,
            levels: 1,
            surface_subdiv_iters: 0,
            sample_count: 5000,
            weights: LossWeights::default(),
            step_size: c(0.15),
            deform_step_size: c(0.02),
            step_decay: c(0.1),
            beta1: c(0.9),
            beta2: c(0.999),
            seed: 0,
            workers: 1,
            ablations: Ablations::default(),
        }
    }
}

impl<T: Real> FitConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.base_resolution == 0 {
            return Err(Error::invalid("base_resolution must be >= 1"));
        }
        if self.iterations_per_level == 0 {
            return Err(Error::invalid("iterations_per_level must be >= 1"));
        }
        if self.sample_count == 0 {
            return Err(Error::invalid("sample_count must be >= 1"));
        }
        if !(self.step_size > T::zero()) || !(self.deform_step_size > T::zero()) {
            return Err(Error::invalid("step sizes must be positive"));
        }
        if !(self.step_decay > T::zero() && self.step_decay <= T::one()) {
            return Err(Error::invalid("step_decay must lie in (0, 1]"));
        }
        for beta in [self.beta1, self.beta2] {
            if !(beta > T::zero() && beta < T::one()) {
                return Err(Error::invalid("momentum coefficients must lie in (0, 1)"));
            }
        }
        if !self.weights.is_valid() {
            return Err(Error::invalid(
                "loss weights must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

/// What the pipeline fits against.
#[derive(Debug, Clone)]
pub enum FitTarget<T> {
    Points(PointSample<T>),
    Mesh(TriangleMesh<T>),
}

/// Target preprocessed for repeated loss evaluation.
pub struct PreparedTarget<T> {
    samples: PointSample<T>,
    field: TargetField<T>,
}

enum TargetField<T> {
    /// Signed distance to the target mesh.
    Mesh(MeshSdf<T>),
    /// Nearest-point distance. With oriented points the sign comes from the
    /// nearest normal; otherwise it is inherited from the current iterate.
    Points {
        index: NearestNeighbors<T>,
        positions: Vec<Vec3<T>>,
        normals: Option<Vec<Vec3<T>>>,
    },
}

impl<T: Real> TargetField<T> {
    /// Signed distance estimate at `p` when the target orientation is
    /// known; unsigned distance otherwise.
    fn distance_estimate(&self, p: Vec3<T>) -> T {
        match self {
            TargetField::Mesh(field) => field.eval(p),
            TargetField::Points {
                index,
                positions,
                normals,
            } => {
                let (j, d) = index.nearest(p);
                match normals {
                    Some(normals) => {
                        let outward = (p - positions[j as usize]).dot(normals[j as usize]);
                        if outward < T::zero() {
                            -d
                        } else {
                            d
                        }
                    }
                    None => d,
                }
            }
        }
    }

    fn is_oriented(&self) -> bool {
        match self {
            TargetField::Mesh(_) => true,
            TargetField::Points { normals, .. } => normals.is_some(),
        }
    }
}

impl<T: Real> PreparedTarget<T> {
    pub fn prepare(target: &FitTarget<T>, config: &FitConfig<T>) -> Result<Self> {
        match target {
            FitTarget::Points(points) => {
                if points.is_empty() {
                    return Err(Error::invalid("target point cloud is empty"));
                }
                Ok(Self {
                    field: TargetField::Points {
                        index: NearestNeighbors::build(&points.positions)?,
                        positions: points.positions.clone(),
                        normals: points.normals.clone(),
                    },
                    samples: points.clone(),
                })
            }
            FitTarget::Mesh(mesh) => {
                if mesh.is_empty() {
                    return Err(Error::EmptySurface);
                }
                let samples = sample_surface(mesh, config.sample_count, config.seed ^ 0x74e7)?;
                Ok(Self {
                    samples,
                    field: TargetField::Mesh(MeshSdf::new(mesh)?),
                })
            }
        }
    }

    pub fn samples(&self) -> &PointSample<T> {
        &self.samples
    }

    /// Per-vertex SDF regression targets at the grid's deformed positions.
    /// Oriented targets (meshes, clouds with normals) give a signed
    /// estimate; unoriented clouds fall back to the unsigned distance with
    /// the sign inherited from the current iterate.
    fn sdf_targets(&self, grid: &TetGrid<T>, workers: usize) -> Vec<T> {
        let positions = grid.deformed_positions();
        let mut out = vec![T::zero(); positions.len()];
        if self.field.is_oriented() {
            fill_slots(&mut out, workers, |i| {
                self.field.distance_estimate(positions[i])
            });
        } else {
            let sdf = grid.sdf();
            fill_slots(&mut out, workers, |i| {
                let d = self.field.distance_estimate(positions[i]);
                if sdf_is_negative(sdf[i]) {
                    -d
                } else {
                    d
                }
            });
        }
        out
    }
}

/// Bias-corrected first/second moment accumulator for a scalar parameter
/// vector.
#[derive(Debug, Clone, Default)]
struct AdamScalar<T> {
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> AdamScalar<T> {
    fn zeros(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }

    fn extend_zeros(&mut self, n: usize) {
        self.m.resize(n, T::zero());
        self.v.resize(n, T::zero());
    }

    fn update(&mut self, params: &mut [T], grads: &[T], lr: T, b1: T, b2: T, t: u64) {
        let eps = c::<T>(1e-8);
        let bc1 = T::one() - b1.powi(t as i32);
        let bc2 = T::one() - b2.powi(t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.m[i] * b1 + g * (T::one() - b1);
            self.v[i] = self.v[i] * b2 + g * g * (T::one() - b2);
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// Optimizer state for all three parameter groups.
#[derive(Debug, Clone)]
struct Moments<T> {
    sdf: AdamScalar<T>,
    // Deformations flattened to x, y, z component vectors.
    def: [AdamScalar<T>; 3],
    alpha: AdamScalar<T>,
}

impl<T: Real> Moments<T> {
    fn zeros(n: usize) -> Self {
        Self {
            sdf: AdamScalar::zeros(n),
            def: [
                AdamScalar::zeros(n),
                AdamScalar::zeros(n),
                AdamScalar::zeros(n),
            ],
            alpha: AdamScalar::zeros(n),
        }
    }

    fn extend_zeros(&mut self, n: usize) {
        self.sdf.extend_zeros(n);
        for d in &mut self.def {
            d.extend_zeros(n);
        }
        self.alpha.extend_zeros(n);
    }
}

/// Unconstrained raw alpha initialized near the classic Loop weight for
/// valence six.
fn initial_raw_alpha<T: Real>() -> T {
    c(-0.5108256237659907)
}

pub struct FitState<T> {
    grid: TetGrid<T>,
    raw_alpha: Vec<T>,
    moments: Moments<T>,
    iteration: u64,
    level_start_iteration: u64,
    history: Vec<LossReport<T>>,
}

impl<T: Real> FitState<T> {
    pub fn grid(&self) -> &TetGrid<T> {
        &self.grid
    }

    pub fn history(&self) -> &[LossReport<T>] {
        &self.history
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn raw_alpha(&self) -> &[T] {
        &self.raw_alpha
    }

    /// Parameter vectors and moments all sized to the grid.
    pub fn is_aligned(&self) -> bool {
        let n = self.grid.vertex_count();
        self.raw_alpha.len() == n
            && self.moments.sdf.m.len() == n
            && self.moments.def.iter().all(|d| d.m.len() == n)
            && self.moments.alpha.m.len() == n
            && self.raw_alpha.iter().all(|a| a.is_finite())
    }
}

/// Builds the initial state: grid at base resolution, SDF seeded from a
/// coarse distance estimate so a surface exists at step zero, zero
/// deformations.
pub fn initialize<T: Real>(
    target: &PreparedTarget<T>,
    config: &FitConfig<T>,
) -> Result<FitState<T>> {
    config.validate()?;
    let mut grid = build_grid(config.base_resolution, config.scheme)?;
    let cell = T::one() / T::from_usize_lossy(config.base_resolution as usize);
    let offset = c::<T>(0.5) * cell;
    let sdf: Vec<T> = (0..grid.vertex_count())
        .map(|v| {
            let p = grid.deformed_position(v);
            if target.field.is_oriented() {
                // Signed estimate straight from the oriented target. An
                // unsigned crust here would have to dissolve its inner
                // sheet through a near-zero field, which shreds the
                // surface mid-run.
                target.field.distance_estimate(p)
            } else {
                // Crust estimate: negative within half a cell of the
                // points, so a surface exists at step zero.
                target.field.distance_estimate(p) - offset
            }
        })
        .collect();
    grid.set_sdf(sdf)?;
    let n = grid.vertex_count();
    Ok(FitState {
        grid,
        raw_alpha: vec![initial_raw_alpha(); n],
        moments: Moments::zeros(n),
        iteration: 0,
        level_start_iteration: 0,
        history: Vec::new(),
    })
}

fn surface_subdivision_active<T: Real>(config: &FitConfig<T>) -> bool {
    config.surface_subdiv_iters > 0 && !config.ablations.disable_surface_subdiv
}

/// Mesh-vertex alphas from the raw per-grid-vertex parameters: the sigmoid
/// of the mean of the two grid endpoints the vertex was born between.
fn mesh_alphas<T: Real>(mesh: &TriangleMesh<T>, raw_alpha: &[T]) -> Result<AlphaField<T>> {
    let provenance = mesh
        .provenance
        .as_ref()
        .ok_or_else(|| Error::invalid("mesh carries no grid provenance"))?;
    let half = c::<T>(0.5);
    AlphaField::new(
        provenance
            .iter()
            .map(|&(a, b)| sigmoid((raw_alpha[a.index()] + raw_alpha[b.index()]) * half))
            .collect(),
    )
}

/// One forward/backward/update pass. Returns the loss report it recorded.
pub fn step<T: Real>(
    state: &mut FitState<T>,
    target: &PreparedTarget<T>,
    config: &FitConfig<T>,
) -> Result<LossReport<T>> {
    let weights = &config.weights;
    let workers = config.workers.max(1);
    let use_surface_subdiv = surface_subdivision_active(config);

    // Forward.
    let mesh = marching_tetrahedra(&state.grid);
    if mesh.is_empty() {
        return Err(Error::Diverged(format!(
            "surface vanished at iteration {}",
            state.iteration
        )));
    }
    let alphas = if use_surface_subdiv {
        Some(mesh_alphas(&mesh, &state.raw_alpha)?)
    } else {
        None
    };
    let final_mesh = match &alphas {
        Some(a) => loop_subdivide(&mesh, a, config.surface_subdiv_iters)?,
        None => mesh.clone(),
    };

    let step_seed = CounterRng::new(config.seed).bits(0x5a17, state.iteration);
    let p_pred = sample_surface(&final_mesh, config.sample_count, step_seed)?;
    let p_gt = &target.samples;
    let corr = correspondences(&p_pred, p_gt, workers)?;

    let cd = chamfer_with(&p_pred, p_gt, ChamferOrder::L2, &corr);
    let use_normals = p_gt.normals.is_some();
    let normal = if use_normals {
        normal_consistency_with(&p_pred, p_gt, &corr)?
    } else {
        T::zero()
    };
    let sdf_targets = target.sdf_targets(&state.grid, workers);
    let sdf_term = sdf_regularization_from_values(state.grid.sdf(), &sdf_targets);
    let def_term = deformation_regularization(&state.grid);

    let report = total_loss(
        LossTerms {
            cd,
            normal,
            gan: T::zero(),
            sdf: sdf_term,
            def: def_term,
        },
        weights,
    );
    if !report.is_finite() {
        return Err(Error::Diverged(format!(
            "non-finite loss at iteration {}: {report:?}",
            state.iteration
        )));
    }

    // Backward: chained vector-Jacobian products.
    let (d_pred_positions, _) =
        chamfer_vjp_with(&p_pred, p_gt, ChamferOrder::L2, &corr, weights.cd);
    let d_pred_normals = if use_normals && weights.normal > T::zero() {
        normal_consistency_vjp_with(&p_pred, p_gt, &corr, weights.normal)?.0
    } else {
        vec![Vec3::zero(); p_pred.len()]
    };
    let d_final_mesh =
        sample_surface_vjp(&final_mesh, &p_pred, &d_pred_positions, &d_pred_normals)?;

    let (d_mesh_positions, d_alpha_mesh) = match &alphas {
        Some(a) => {
            let (d_pos, d_alpha) =
                loop_subdivide_vjp(&mesh, a, config.surface_subdiv_iters, &d_final_mesh)?;
            (d_pos, Some(d_alpha))
        }
        None => (d_final_mesh, None),
    };
    let cot = marching_tetrahedra_vjp(&state.grid, &mesh, &d_mesh_positions)?;

    let mut d_sdf = sdf_regularization_vjp_from_values(state.grid.sdf(), &sdf_targets, weights.sdf);
    for (g, extra) in d_sdf.iter_mut().zip(&cot.d_sdf) {
        *g += *extra;
    }
    let d_def_reg = deformation_regularization_vjp(&state.grid, weights.def);
    let d_def: Vec<Vec3<T>> = cot
        .d_position
        .iter()
        .zip(&d_def_reg)
        .map(|(a, b)| *a + *b)
        .collect();

    // Alpha chain: sigmoid of the mean of the two grid endpoints.
    let mut d_raw_alpha = vec![T::zero(); state.raw_alpha.len()];
    if let (Some(d_alpha_mesh), Some(_)) = (&d_alpha_mesh, &alphas) {
        let provenance = mesh
            .provenance
            .as_ref()
            .expect("extraction sets provenance");
        let half = c::<T>(0.5);
        for (m, &(a, b)) in provenance.iter().enumerate() {
            let pre = (state.raw_alpha[a.index()] + state.raw_alpha[b.index()]) * half;
            let s = sigmoid(pre);
            let g = d_alpha_mesh[m] * s * (T::one() - s) * half;
            d_raw_alpha[a.index()] += g;
            d_raw_alpha[b.index()] += g;
        }
    }

    // Adam updates on the raw parameters: step sizes are scaled by the
    // current cell size and annealed geometrically over each level.
    let cell = T::one()
        / (T::from_usize_lossy(config.base_resolution as usize)
            * c::<T>(2.0).powi(state.grid.level() as i32));
    let phase = ((state.iteration - state.level_start_iteration) as f64
        / config.iterations_per_level.max(1) as f64)
        .min(1.0);
    let anneal = config.step_decay.powf(c(phase));
    let lr_sdf = config.step_size * cell * anneal;
    let lr_def = config.deform_step_size * cell * anneal;
    state.iteration += 1;
    let t = state.iteration;
    {
        let grid = &mut state.grid;
        let n = grid.vertex_count();
        let mut sdf = grid.sdf().to_vec();
        state
            .moments
            .sdf
            .update(&mut sdf, &d_sdf, lr_sdf, config.beta1, config.beta2, t);
        grid.set_sdf(sdf)?;

        if !config.ablations.freeze_deformation {
            let mut def = grid.deformations().to_vec();
            for axis in 0..3 {
                let mut comp: Vec<T> = def.iter().map(|d| d[axis]).collect();
                let grad: Vec<T> = d_def.iter().map(|d| d[axis]).collect();
                state.moments.def[axis].update(
                    &mut comp,
                    &grad,
                    lr_def,
                    config.beta1,
                    config.beta2,
                    t,
                );
                for (d, c_) in def.iter_mut().zip(&comp) {
                    d[axis] = *c_;
                }
            }
            // The deformation clamp is reapplied on write.
            grid.set_deformations(def)?;
            debug_assert_eq!(grid.vertex_count(), n);
        }

        if use_surface_subdiv {
            state.moments.alpha.update(
                &mut state.raw_alpha,
                &d_raw_alpha,
                lr_sdf,
                config.beta1,
                config.beta2,
                t,
            );
        }
    }

    state.history.push(report);
    Ok(report)
}

/// Subdivides the surface tets (and vertex neighbors), seeding new-vertex
/// parameters from the parent means and zero moments for the new entries.
pub fn advance_level<T: Real>(state: &mut FitState<T>, _config: &FitConfig<T>) -> Result<()> {
    let plan = SubdivisionPlan::for_surface(&state.grid)?;
    let grid = subdivide_volume(&state.grid, &plan)?;
    let half = c::<T>(0.5);
    let inherited: Vec<T> = plan
        .edges()
        .iter()
        .map(|&(a, b)| (state.raw_alpha[a as usize] + state.raw_alpha[b as usize]) * half)
        .collect();
    state.raw_alpha.extend(inherited);
    state.moments.extend_zeros(grid.vertex_count());
    state.grid = grid;
    state.level_start_iteration = state.iteration;
    Ok(())
}

/// Runs the full coarse-to-fine pipeline and returns the final surface and
/// the per-step loss history.
pub fn fit<T: Real>(
    target: &FitTarget<T>,
    config: &FitConfig<T>,
) -> Result<(TriangleMesh<T>, Vec<LossReport<T>>)> {
    let prepared = PreparedTarget::prepare(target, config)?;
    let mut state = initialize(&prepared, config)?;
    for level in 0..=config.levels {
        for _ in 0..config.iterations_per_level {
            step(&mut state, &prepared, config)?;
        }
        if level < config.levels && !config.ablations.disable_volume_subdiv {
            advance_level(&mut state, config)?;
        }
    }
    let mesh = marching_tetrahedra(&state.grid);
    let final_mesh = if surface_subdivision_active(config) && !mesh.is_empty() {
        let alphas = mesh_alphas(&mesh, &state.raw_alpha)?;
        loop_subdivide(&mesh, &alphas, config.surface_subdiv_iters)?
    } else {
        mesh
    };
    Ok((final_mesh, state.history))
}

/// Chamfer-L1 between dense samples of a mesh and reference surface samples.
pub fn chamfer_l1_to_reference<T: Real>(
    mesh: &TriangleMesh<T>,
    reference: &PointSample<T>,
    eval_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<T> {
    let ours = sample_surface(mesh, eval_samples, seed)?;
    let corr = correspondences(&ours, reference, workers)?;
    Ok(chamfer_with(&ours, reference, ChamferOrder::L1, &corr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    MarchingCubes,
    MarchingTetrahedra,
    Fitted,
}

impl BenchMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchMethod::MarchingCubes => "mc",
            BenchMethod::MarchingTetrahedra => "mt",
            BenchMethod::Fitted => "fit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow<T> {
    pub method: BenchMethod,
    pub budget: usize,
    pub vertex_count: usize,
    pub chamfer_l1: T,
}

#[derive(Debug, Clone)]
pub struct BenchOptions<T> {
    /// Dense evaluation sample count per surface.
    pub eval_samples: usize,
    pub seed: u64,
    pub workers: usize,
    /// Also fit the representation at each budget (slow).
    pub include_fit: bool,
    /// Base config for the fitted rows; resolution is overridden per budget.
    pub fit_config: FitConfig<T>,
}

impl<T: Real> Default for BenchOptions<T> {
    fn default() -> Self {
        Self {
            eval_samples: 30_000,
            seed: 7,
            workers: 1,
            include_fit: false,
            fit_config: FitConfig {
                iterations_per_level: 120,
                levels: 0,
                sample_count: 5000,
                ..FitConfig::default()
            },
        }
    }
}

/// Lattice resolution whose node count is closest to the budget.
fn mc_resolution_for(budget: usize) -> u32 {
    let side = (budget as f64).cbrt().round() as u32;
    side.saturating_sub(1).max(1)
}

/// BCC grid resolution whose vertex count `(n+1)^3 + n^3` is closest to the
/// budget.
fn bcc_resolution_for(budget: usize) -> u32 {
    let mut best = 1u32;
    let mut best_diff = usize::MAX;
    for n in 1..=512u32 {
        let count = (n as usize + 1).pow(3) + (n as usize).pow(3);
        let diff = count.abs_diff(budget);
        if diff < best_diff {
            best_diff = diff;
            best = n;
        }
        if count > 2 * budget {
            break;
        }
    }
    best
}

/// Extracts the ground-truth SDF with marching cubes and marching
/// tetrahedra at matched query budgets and measures chamfer-L1 against
/// dense analytic surface samples. Optionally also fits the representation
/// at the same budget.
pub fn oracle_bench<T: Real>(
    shape: &AnalyticSdf<T>,
    budgets: &[usize],
    opts: &BenchOptions<T>,
) -> Result<Vec<BenchRow<T>>> {
    if budgets.is_empty() {
        return Err(Error::invalid("budget list is empty"));
    }
    let reference = sample_analytic_surface(shape, opts.eval_samples, opts.seed)?;
    let mut rows = Vec::new();
    for (bi, &budget) in budgets.iter().enumerate() {
        let eval_seed = opts.seed ^ (bi as u64 + 1) << 8;

        let mc_res = mc_resolution_for(budget);
        let values = sample_lattice(|p| shape.eval(p), mc_res);
        let mc_mesh = marching_cubes(&values, mc_res);
        let mc_chamfer = if mc_mesh.is_empty() {
            T::infinity()
        } else {
            chamfer_l1_to_reference(
                &mc_mesh,
                &reference,
                opts.eval_samples,
                eval_seed,
                opts.workers,
            )?
        };
        rows.push(BenchRow {
            method: BenchMethod::MarchingCubes,
            budget,
            vertex_count: (mc_res as usize + 1).pow(3),
            chamfer_l1: mc_chamfer,
        });

        let mt_res = bcc_resolution_for(budget);
        let mut grid = build_grid::<T>(mt_res, GridScheme::Bcc)?;
        grid.set_sdf_from(|p| shape.eval(p));
        let mt_mesh = marching_tetrahedra(&grid);
        let mt_chamfer = if mt_mesh.is_empty() {
            T::infinity()
        } else {
            chamfer_l1_to_reference(
                &mt_mesh,
                &reference,
                opts.eval_samples,
                eval_seed,
                opts.workers,
            )?
        };
        rows.push(BenchRow {
            method: BenchMethod::MarchingTetrahedra,
            budget,
            vertex_count: grid.vertex_count(),
            chamfer_l1: mt_chamfer,
        });

        if opts.include_fit {
            let mut config = opts.fit_config.clone();
            config.base_resolution = mc_resolution_for(budget);
            config.scheme = GridScheme::SixTet;
            config.workers = opts.workers;
            let target_cloud =
                sample_analytic_surface(shape, config.sample_count, opts.seed ^ 0xf17)?;
            let (mesh, _) = fit(&FitTarget::Points(target_cloud), &config)?;
            let fitted_chamfer = if mesh.is_empty() {
                T::infinity()
            } else {
                chamfer_l1_to_reference(
                    &mesh,
                    &reference,
                    opts.eval_samples,
                    eval_seed,
                    opts.workers,
                )?
            };
            rows.push(BenchRow {
                method: BenchMethod::Fitted,
                budget,
                vertex_count: (config.base_resolution as usize + 1).pow(3),
                chamfer_l1: fitted_chamfer,
            });
        }
    }
    Ok(rows)
}
