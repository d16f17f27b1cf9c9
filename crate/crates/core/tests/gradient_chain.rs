//! Full-chain gradient check: the chained vector-Jacobian products through
//! extraction, sampling and the losses against central finite differences,
//! restricted to perturbations that keep every SDF sign fixed (the map is
//! smooth on that branch; provenance and correspondences are frozen to stay
//! on it).

use tetfit::losses::{
    chamfer_vjp_with, chamfer_with, correspondences, deformation_regularization,
    deformation_regularization_vjp, normal_consistency_vjp_with, normal_consistency_with,
    sample_surface, sample_surface_vjp, sdf_regularization_from_values,
    sdf_regularization_vjp_from_values, ChamferOrder, Correspondences, LossWeights, PointSample,
};
use tetfit::marching::{marching_tetrahedra, marching_tetrahedra_vjp};
use tetfit::mesh::TriangleMesh;
use tetfit::rng::CounterRng;
use tetfit::sdfield::{sample_analytic_surface, AnalyticSdf};
use tetfit::tetgrid::{build_grid, GridScheme, TetGrid};
use tetfit::Vec3;

struct Chain {
    grid: TetGrid<f64>,
    target: PointSample<f64>,
    weights: LossWeights<f64>,
    sample_count: usize,
    sample_seed: u64,
    /// SDF regression targets, frozen at the base positions: the operator
    /// differentiates the residual, not the target field.
    sdf_targets: Vec<f64>,
}

/// Forward pass on the frozen smooth branch: fixed provenance for the
/// samples, fixed chamfer correspondences.
struct Frozen {
    provenance: Vec<(u32, [f64; 3])>,
    corr: Correspondences,
    triangles: Vec<[u32; 3]>,
}

impl Chain {
    fn forward_fresh(&self) -> (f64, Frozen, TriangleMesh<f64>, PointSample<f64>) {
        let mesh = marching_tetrahedra(&self.grid);
        let pred = sample_surface(&mesh, self.sample_count, self.sample_seed).unwrap();
        let corr = correspondences(&pred, &self.target, 1).unwrap();
        let value = self.loss_given(&mesh, &pred, &corr);
        let frozen = Frozen {
            provenance: pred.provenance.clone().unwrap(),
            corr,
            triangles: mesh.triangles.clone(),
        };
        (value, frozen, mesh, pred)
    }

    fn loss_given(
        &self,
        _mesh: &TriangleMesh<f64>,
        pred: &PointSample<f64>,
        corr: &Correspondences,
    ) -> f64 {
        let cd = chamfer_with(pred, &self.target, ChamferOrder::L2, corr);
        let normal = normal_consistency_with(pred, &self.target, corr).unwrap();
        let sdf = sdf_regularization_from_values(self.grid.sdf(), &self.sdf_targets);
        let def = deformation_regularization(&self.grid);
        self.weights.cd * cd
            + self.weights.normal * normal
            + self.weights.sdf * sdf
            + self.weights.def * def
    }

    /// Re-evaluates the loss on the frozen branch for perturbed parameters.
    fn forward_frozen(&self, frozen: &Frozen) -> f64 {
        let mesh = marching_tetrahedra(&self.grid);
        assert_eq!(mesh.triangles, frozen.triangles, "sign pattern changed");
        let mut positions = Vec::with_capacity(frozen.provenance.len());
        let mut normals = Vec::with_capacity(frozen.provenance.len());
        for &(t, bary) in &frozen.provenance {
            let [a, b, c] = mesh.triangle_positions(t as usize);
            positions.push(a * bary[0] + b * bary[1] + c * bary[2]);
            normals.push(mesh.face_normal(t as usize));
        }
        let pred = PointSample {
            positions,
            normals: Some(normals),
            provenance: Some(frozen.provenance.clone()),
        };
        self.loss_given(&mesh, &pred, &frozen.corr)
    }

    /// Analytic gradient via the chained VJPs.
    fn gradient(
        &self,
        frozen: &Frozen,
        mesh: &TriangleMesh<f64>,
        pred: &PointSample<f64>,
    ) -> (Vec<f64>, Vec<Vec3<f64>>) {
        let (d_pred_pos, _) = chamfer_vjp_with(
            pred,
            &self.target,
            ChamferOrder::L2,
            &frozen.corr,
            self.weights.cd,
        );
        let (d_pred_nrm, _) =
            normal_consistency_vjp_with(pred, &self.target, &frozen.corr, self.weights.normal)
                .unwrap();
        let d_mesh = sample_surface_vjp(mesh, pred, &d_pred_pos, &d_pred_nrm).unwrap();
        let cot = marching_tetrahedra_vjp(&self.grid, mesh, &d_mesh).unwrap();

        let mut d_sdf = sdf_regularization_vjp_from_values(
            self.grid.sdf(),
            &self.sdf_targets,
            self.weights.sdf,
        );
        for (g, extra) in d_sdf.iter_mut().zip(&cot.d_sdf) {
            *g += *extra;
        }
        let d_def_reg = deformation_regularization_vjp(&self.grid, self.weights.def);
        let d_def: Vec<Vec3<f64>> = cot
            .d_position
            .iter()
            .zip(&d_def_reg)
            .map(|(a, b)| *a + *b)
            .collect();
        (d_sdf, d_def)
    }
}

#[test]
fn chained_vjp_matches_finite_differences() {
    let mut grid = build_grid::<f64>(4, GridScheme::SixTet).unwrap();
    let shape = AnalyticSdf::sphere(Vec3::splat(0.5), 0.3);
    grid.set_sdf_from(|p| shape.eval(p));
    let rng = CounterRng::new(2024);
    // Small random perturbation of the exact field, no sign flips.
    let sdf: Vec<f64> = grid
        .sdf()
        .iter()
        .enumerate()
        .map(|(i, s)| s + 0.2 * s.abs() * (rng.uniform(50, i as u64) - 0.5))
        .collect();
    grid.set_sdf(sdf).unwrap();
    let deltas: Vec<Vec3<f64>> = (0..grid.vertex_count())
        .map(|i| {
            Vec3::new(
                rng.uniform(60, i as u64) - 0.5,
                rng.uniform(61, i as u64) - 0.5,
                rng.uniform(62, i as u64) - 0.5,
            ) * 0.01
        })
        .collect();
    grid.apply_deformation(&deltas).unwrap();

    let target = sample_analytic_surface(&shape, 300, 5).unwrap();
    let sdf_targets: Vec<f64> = (0..grid.vertex_count())
        .map(|v| shape.eval(grid.deformed_position(v)))
        .collect();
    let chain = Chain {
        grid,
        target,
        weights: LossWeights {
            cd: 1.0,
            normal: 0.1,
            gan: 0.0,
            sdf: 0.2,
            def: 0.05,
        },
        sample_count: 200,
        sample_seed: 11,
        sdf_targets,
    };

    let (base_value, frozen, mesh, pred) = chain.forward_fresh();
    assert!(base_value.is_finite());
    let (d_sdf, d_def) = chain.gradient(&frozen, &mesh, &pred);

    let h = 1e-5;
    let n = chain.grid.vertex_count();
    let started = std::time::Instant::now();
    let mut checked = 0;
    for dir_idx in 0..20u64 {
        // Random direction over (sdf, deformation), zeroed where a sign
        // could flip within the finite-difference stencil.
        let mut dir_sdf: Vec<f64> = (0..n)
            .map(|i| rng.uniform(100 + dir_idx, i as u64) - 0.5)
            .collect();
        let dir_def: Vec<Vec3<f64>> = (0..n)
            .map(|i| {
                Vec3::new(
                    rng.uniform(200 + dir_idx, i as u64) - 0.5,
                    rng.uniform(300 + dir_idx, i as u64) - 0.5,
                    rng.uniform(400 + dir_idx, i as u64) - 0.5,
                ) * 0.3
            })
            .collect();
        for (i, d) in dir_sdf.iter_mut().enumerate() {
            if chain.grid.sdf()[i].abs() < 20.0 * h {
                *d = 0.0;
            }
        }

        let eval = |t: f64| -> f64 {
            let mut probe_grid = chain.grid.clone();
            let sdf: Vec<f64> = probe_grid
                .sdf()
                .iter()
                .zip(&dir_sdf)
                .map(|(s, d)| s + t * d)
                .collect();
            probe_grid.set_sdf(sdf).unwrap();
            let deltas: Vec<Vec3<f64>> = dir_def.iter().map(|d| *d * t).collect();
            probe_grid.apply_deformation(&deltas).unwrap();
            let probe = Chain {
                grid: probe_grid,
                target: chain.target.clone(),
                weights: chain.weights,
                sample_count: chain.sample_count,
                sample_seed: chain.sample_seed,
                sdf_targets: chain.sdf_targets.clone(),
            };
            probe.forward_frozen(&frozen)
        };

        let fd = (eval(h) - eval(-h)) / (2.0 * h);
        let analytic: f64 = d_sdf.iter().zip(&dir_sdf).map(|(g, d)| g * d).sum::<f64>()
            + d_def
                .iter()
                .zip(&dir_def)
                .map(|(g, d)| g.dot(*d))
                .sum::<f64>();
        let scale = fd.abs().max(analytic.abs()).max(1e-9);
        assert!(
            (fd - analytic).abs() <= 1e-3 * scale,
            "direction {dir_idx}: fd {fd} vs analytic {analytic}"
        );
        checked += 1;
    }
    assert_eq!(checked, 20);
    assert!(
        started.elapsed().as_secs() < 60,
        "gradient suite exceeded its runtime budget"
    );
}
