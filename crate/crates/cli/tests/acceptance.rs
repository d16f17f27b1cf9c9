//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Run with `cargo test --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use tetfit::fitting::{
    chamfer_l1_to_reference, fit, oracle_bench, Ablations, BenchMethod, BenchOptions, FitConfig,
    FitTarget,
};
use tetfit::losses::{
    chamfer_vjp_with, chamfer_with, correspondences, deformation_regularization,
    deformation_regularization_vjp, lsgan_terms, normal_consistency_vjp_with,
    normal_consistency_with, sample_surface, sample_surface_vjp, sdf_regularization_from_values,
    sdf_regularization_vjp_from_values, ChamferOrder, PointSample,
};
use tetfit::marching::{marching_tetrahedra, marching_tetrahedra_vjp};
use tetfit::math::closest_point_on_triangle;
use tetfit::mesh::TriangleMesh;
use tetfit::rng::CounterRng;
use tetfit::sdfield::{sample_analytic_surface, AnalyticSdf};
use tetfit::subdivision::{classic_loop_alphas, loop_subdivide, subdivide_volume, SubdivisionPlan};
use tetfit::tetgrid::{build_grid, GridScheme, TetGrid};
use tetfit::Vec3;

/// Criterion 1: the chained vector-Jacobian product through extraction,
/// sampling, chamfer, normal consistency and the regularizers matches
/// central finite differences within 1e-3 relative on a res-4 grid, over 20
/// random sign-preserving directions (f64, h = 1e-5), in under a minute.
#[test]
fn acceptance_1_gradient_suite() {
    let started = Instant::now();
    let shape = AnalyticSdf::sphere(Vec3::splat(0.5_f64), 0.3);
    let mut grid = build_grid::<f64>(4, GridScheme::SixTet).unwrap();
    grid.set_sdf_from(|p| shape.eval(p));
    let rng = CounterRng::new(2024);
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
    let (w_cd, w_nrm, w_sdf, w_def) = (1.0, 0.1, 0.2, 0.05);
    let sdf_targets: Vec<f64> = (0..grid.vertex_count())
        .map(|v| shape.eval(grid.deformed_position(v)))
        .collect();

    // Base forward pass; provenance and correspondences freeze the smooth
    // branch the cotangents differentiate.
    let mesh = marching_tetrahedra(&grid);
    let pred = sample_surface(&mesh, 200, 11).unwrap();
    let corr = correspondences(&pred, &target, 1).unwrap();
    let provenance = pred.provenance.clone().unwrap();

    let loss_on_branch = |g: &TetGrid<f64>| -> f64 {
        let mesh = marching_tetrahedra(g);
        let mut positions = Vec::with_capacity(provenance.len());
        let mut normals = Vec::with_capacity(provenance.len());
        for &(t, bary) in &provenance {
            let [a, b, c] = mesh.triangle_positions(t as usize);
            positions.push(a * bary[0] + b * bary[1] + c * bary[2]);
            normals.push(mesh.face_normal(t as usize));
        }
        let pred = PointSample {
            positions,
            normals: Some(normals),
            provenance: Some(provenance.clone()),
        };
        let cd = chamfer_with(&pred, &target, ChamferOrder::L2, &corr);
        let nrm = normal_consistency_with(&pred, &target, &corr).unwrap();
        let sdf = sdf_regularization_from_values(g.sdf(), &sdf_targets);
        let def = deformation_regularization(g);
        w_cd * cd + w_nrm * nrm + w_sdf * sdf + w_def * def
    };

    // Analytic gradient by chaining the VJPs.
    let (d_pred_pos, _) = chamfer_vjp_with(&pred, &target, ChamferOrder::L2, &corr, w_cd);
    let (d_pred_nrm, _) = normal_consistency_vjp_with(&pred, &target, &corr, w_nrm).unwrap();
    let d_mesh = sample_surface_vjp(&mesh, &pred, &d_pred_pos, &d_pred_nrm).unwrap();
    let cot = marching_tetrahedra_vjp(&grid, &mesh, &d_mesh).unwrap();
    let mut d_sdf = sdf_regularization_vjp_from_values(grid.sdf(), &sdf_targets, w_sdf);
    for (g, extra) in d_sdf.iter_mut().zip(&cot.d_sdf) {
        *g += *extra;
    }
    let d_def_reg = deformation_regularization_vjp(&grid, w_def);
    let d_def: Vec<Vec3<f64>> = cot
        .d_position
        .iter()
        .zip(&d_def_reg)
        .map(|(a, b)| *a + *b)
        .collect();

    let h = 1e-5;
    let n = grid.vertex_count();
    for dir_idx in 0..20u64 {
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
        // Sign-preserving: zero the components that could flip within the
        // stencil.
        for (i, d) in dir_sdf.iter_mut().enumerate() {
            if grid.sdf()[i].abs() < 20.0 * h {
                *d = 0.0;
            }
        }
        let eval = |t: f64| -> f64 {
            let mut probe = grid.clone();
            let sdf: Vec<f64> = probe
                .sdf()
                .iter()
                .zip(&dir_sdf)
                .map(|(s, d)| s + t * d)
                .collect();
            probe.set_sdf(sdf).unwrap();
            let deltas: Vec<Vec3<f64>> = dir_def.iter().map(|d| *d * t).collect();
            probe.apply_deformation(&deltas).unwrap();
            loss_on_branch(&probe)
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
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "runtime budget exceeded: {elapsed:?}"
    );
    println!("acceptance 1 (gradient suite): PASS in {elapsed:?}");
}

/// Criterion 2: marching tetrahedra correctness on the half-space, sphere
/// and torus fixtures.
#[test]
fn acceptance_2_mt_correctness() {
    let started = Instant::now();

    // Half-space: odd resolution keeps lattice nodes off the plane.
    let mut grid = build_grid::<f64>(9, GridScheme::SixTet).unwrap();
    grid.set_sdf_from(|p| p.x - 0.5);
    let mesh = marching_tetrahedra(&grid);
    let mut max_off = 0.0_f64;
    for p in &mesh.positions {
        max_off = max_off.max((p.x - 0.5).abs());
    }
    assert!(max_off < 1e-12, "plane deviation {max_off}");
    let area = mesh.total_area();
    assert!((area - 1.0).abs() < 1e-9, "half-space area {area}");

    // Sphere: closed 2-manifold of genus 0.
    let mut grid = build_grid::<f64>(32, GridScheme::SixTet).unwrap();
    grid.set_sdf_from(|p| (p - Vec3::splat(0.5)).norm() - 0.3);
    let sphere = marching_tetrahedra(&grid);
    assert!(sphere.is_closed_manifold());
    assert_eq!(sphere.euler_characteristic(), 2);

    // Torus: genus 1.
    let torus_sdf = AnalyticSdf::torus(Vec3::splat(0.5_f64), 0.25, 0.1);
    let mut grid = build_grid::<f64>(32, GridScheme::SixTet).unwrap();
    grid.set_sdf_from(|p| torus_sdf.eval(p));
    let torus = marching_tetrahedra(&grid);
    assert!(torus.is_closed_manifold());
    assert_eq!(torus.euler_characteristic(), 0);

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 10,
        "runtime budget exceeded: {elapsed:?}"
    );
    println!(
        "acceptance 2 (MT correctness): PASS in {elapsed:?} (area {area}, sphere chi 2, torus chi 0)"
    );
}

fn point_to_mesh_distance(p: Vec3<f64>, mesh: &TriangleMesh<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle_positions(t);
        let (q, _) = closest_point_on_triangle(p, a, b, c);
        best = best.min((p - q).norm());
    }
    best
}

/// Criterion 3: volume subdivision leaves the extracted surface unchanged
/// on the sphere and torus fixtures at res 8.
#[test]
fn acceptance_3_volume_subdivision_invariance() {
    let shapes: Vec<(&str, AnalyticSdf<f64>)> = vec![
        ("sphere", AnalyticSdf::sphere(Vec3::splat(0.5), 0.3)),
        ("torus", AnalyticSdf::torus(Vec3::splat(0.5), 0.25, 0.1)),
    ];
    for (name, shape) in &shapes {
        let mut grid = build_grid::<f64>(8, GridScheme::SixTet).unwrap();
        grid.set_sdf_from(|p| shape.eval(p));
        let coarse = marching_tetrahedra(&grid);
        assert!(!coarse.is_empty());

        let plan = SubdivisionPlan::for_surface(&grid).unwrap();
        let fine_grid = subdivide_volume(&grid, &plan).unwrap();
        let fine = marching_tetrahedra(&fine_grid);

        let area_c = coarse.total_area();
        let area_f = fine.total_area();
        assert!(
            (area_c - area_f).abs() < 1e-9 * area_c,
            "{name}: area {area_c} vs {area_f}"
        );
        let mut worst = 0.0_f64;
        for p in &coarse.positions {
            worst = worst.max(point_to_mesh_distance(*p, &fine));
        }
        for p in &fine.positions {
            worst = worst.max(point_to_mesh_distance(*p, &coarse));
        }
        assert!(worst < 1e-9, "{name}: mutual surface distance {worst}");
        println!("acceptance 3 ({name}): surfaces agree to {worst:.2e}");
    }
    println!("acceptance 3 (volume-subdivision invariance): PASS");
}

/// Criterion 4: extraction from the exact SDF at matched query budgets:
/// marching tetrahedra beats marching cubes at every budget on the torus
/// and thin-box fixtures, and both improve monotonically with budget.
#[test]
fn acceptance_4_oracle_benchmark() {
    let started = Instant::now();
    let budgets = [17 * 17 * 17, 33 * 33 * 33, 65 * 65 * 65];
    let fixtures: Vec<(&str, AnalyticSdf<f64>)> = vec![
        ("torus", AnalyticSdf::torus(Vec3::splat(0.5), 0.25, 0.1)),
        (
            "thin-box",
            AnalyticSdf::cuboid(Vec3::new(0.5, 0.5, 0.515), Vec3::new(0.3, 0.3, 0.04)),
        ),
    ];
    let opts = BenchOptions {
        eval_samples: 30_000,
        workers: 2,
        ..BenchOptions::default()
    };
    for (name, shape) in &fixtures {
        let rows = oracle_bench(shape, &budgets, &opts).unwrap();
        let mc: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == BenchMethod::MarchingCubes)
            .map(|r| r.chamfer_l1)
            .collect();
        let mt: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == BenchMethod::MarchingTetrahedra)
            .map(|r| r.chamfer_l1)
            .collect();
        for (k, (a, b)) in mt.iter().zip(&mc).enumerate() {
            assert!(a <= b, "{name} budget {}: mt {a} > mc {b}", budgets[k]);
        }
        assert!(
            mc.windows(2).all(|w| w[1] < w[0]),
            "{name} mc not monotone: {mc:?}"
        );
        assert!(
            mt.windows(2).all(|w| w[1] < w[0]),
            "{name} mt not monotone: {mt:?}"
        );
        println!("acceptance 4 ({name}): mc={mc:?} mt={mt:?}");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 120,
        "runtime budget exceeded: {elapsed:?}"
    );
    println!("acceptance 4 (oracle benchmark): PASS in {elapsed:?}");
}

/// Brute-force symmetric chamfer-L1 oracle (mean-normalized), O(n^2).
fn brute_force_chamfer_l1(p: &[Vec3<f64>], q: &[Vec3<f64>]) -> f64 {
    let mut sum_p = 0.0;
    for a in p {
        sum_p += q
            .iter()
            .map(|b| (*a - *b).norm())
            .fold(f64::INFINITY, f64::min);
    }
    let mut sum_q = 0.0;
    for b in q {
        sum_q += p
            .iter()
            .map(|a| (*b - *a).norm())
            .fold(f64::INFINITY, f64::min);
    }
    sum_p / p.len() as f64 + sum_q / q.len() as f64
}

/// Criterion 5: fitting a noisy sphere cloud (sigma = 0.005, 5000 points)
/// at res 32 with the default config lands within 3x of the measured
/// sampling noise floor.
#[test]
fn acceptance_5_fitting_convergence() {
    let started = Instant::now();
    let shape = AnalyticSdf::sphere(Vec3::splat(0.5_f64), 0.3);
    let clean = sample_analytic_surface(&shape, 5000, 42).unwrap();
    let rng = CounterRng::new(4242);
    let noisy = PointSample {
        positions: clean
            .positions
            .iter()
            .enumerate()
            .map(|(i, p)| {
                *p + Vec3::new(
                    rng.normal(0, i as u64),
                    rng.normal(1, i as u64),
                    rng.normal(2, i as u64),
                ) * 0.005
            })
            .collect(),
        normals: clean.normals.clone(),
        provenance: None,
    };
    // Noise floor measured by the brute-force oracle before the run.
    let floor = brute_force_chamfer_l1(&noisy.positions, &clean.positions);

    let config = FitConfig {
        sample_count: 5000,
        workers: 2,
        ..FitConfig::default()
    };
    let (mesh, history) = fit(&FitTarget::Points(noisy.clone()), &config).unwrap();
    let final_chamfer = chamfer_l1_to_reference(&mesh, &noisy, 5000, 77, 2).unwrap();

    assert!(history.iter().all(|r| r.is_finite()));
    assert!(
        final_chamfer <= 3.0 * floor,
        "final chamfer {final_chamfer} exceeds 3x floor {}",
        3.0 * floor
    );
    // Reconstruction quality against the clean ground-truth surface.
    let reference = sample_analytic_surface(&shape, 20_000, 1234).unwrap();
    let vs_truth = chamfer_l1_to_reference(&mesh, &reference, 20_000, 78, 2).unwrap();
    assert!(
        vs_truth <= 0.015,
        "chamfer vs ground truth {vs_truth} > 0.015"
    );
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 300,
        "runtime budget exceeded: {elapsed:?}"
    );
    println!(
        "acceptance 5 (fitting convergence): PASS in {elapsed:?} (chamfer {final_chamfer:.4} vs 3x floor {:.4}; vs ground truth {vs_truth:.4})",
        3.0 * floor
    );
}

/// Criterion 6: ablation directionality on the thin-box fixture: enabling
/// deformation strictly reduces the final chamfer, and one volume
/// subdivision strictly beats none at an identical step budget.
#[test]
fn acceptance_6_ablation_trends() {
    let started = Instant::now();
    let shape = AnalyticSdf::cuboid(Vec3::new(0.5_f64, 0.5, 0.515), Vec3::new(0.3, 0.3, 0.04));
    let cloud = sample_analytic_surface(&shape, 5000, 13).unwrap();
    let reference = sample_analytic_surface(&shape, 30_000, 99).unwrap();

    let run = |levels: u32, iters: u32, ablations: Ablations| -> f64 {
        let config = FitConfig {
            base_resolution: 16,
            iterations_per_level: iters,
            levels,
            sample_count: 4000,
            workers: 2,
            ablations,
            ..FitConfig::default()
        };
        let (mesh, _) = fit(&FitTarget::Points(cloud.clone()), &config).unwrap();
        chamfer_l1_to_reference(&mesh, &reference, 30_000, 5, 2).unwrap()
    };

    let with_deform = run(0, 120, Ablations::default());
    let frozen = run(
        0,
        120,
        Ablations {
            freeze_deformation: true,
            ..Ablations::default()
        },
    );
    assert!(
        with_deform < frozen,
        "deformation did not help: {with_deform} vs {frozen}"
    );

    let with_vol = run(1, 80, Ablations::default());
    let no_vol = run(
        1,
        80,
        Ablations {
            disable_volume_subdiv: true,
            ..Ablations::default()
        },
    );
    assert!(
        with_vol < no_vol,
        "volume subdivision did not help: {with_vol} vs {no_vol}"
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 600,
        "runtime budget exceeded: {elapsed:?}"
    );
    println!(
        "acceptance 6 (ablation trends): PASS in {elapsed:?} (deform {with_deform:.4} < frozen {frozen:.4}; vol {with_vol:.4} < none {no_vol:.4})"
    );
}

/// Independent textbook Loop subdivision used as the oracle for criterion 7.
fn reference_loop(mesh: &TriangleMesh<f64>, iterations: u32) -> TriangleMesh<f64> {
    use std::collections::HashMap;
    let mut positions = mesh.positions.clone();
    let mut triangles = mesh.triangles.clone();
    for _ in 0..iterations {
        let mut edge_map: HashMap<(u32, u32), usize> = HashMap::new();
        let mut edge_list: Vec<[u32; 4]> = Vec::new();
        for tri in &triangles {
            for (a, b, opp) in [
                (tri[0], tri[1], tri[2]),
                (tri[1], tri[2], tri[0]),
                (tri[2], tri[0], tri[1]),
            ] {
                let key = (a.min(b), a.max(b));
                match edge_map.get(&key) {
                    None => {
                        edge_map.insert(key, edge_list.len());
                        edge_list.push([key.0, key.1, opp, u32::MAX]);
                    }
                    Some(&e) => edge_list[e][3] = opp,
                }
            }
        }
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); positions.len()];
        for e in &edge_list {
            neighbors[e[0] as usize].push(e[1]);
            neighbors[e[1] as usize].push(e[0]);
        }
        let mut new_positions = Vec::with_capacity(positions.len() + edge_list.len());
        for (v, ring) in neighbors.iter().enumerate() {
            let n = ring.len() as f64;
            let beta = (0.625 - (0.375 + 0.25 * (std::f64::consts::TAU / n).cos()).powi(2)) / n;
            let mut sum = Vec3::zero();
            for &u in ring {
                sum += positions[u as usize];
            }
            new_positions.push(positions[v] * (1.0 - n * beta) + sum * beta);
        }
        for e in &edge_list {
            new_positions.push(
                (positions[e[0] as usize] + positions[e[1] as usize]) * 0.375
                    + (positions[e[2] as usize] + positions[e[3] as usize]) * 0.125,
            );
        }
        let n_even = positions.len();
        let mut new_triangles = Vec::with_capacity(4 * triangles.len());
        let odd = |a: u32, b: u32| (n_even + edge_map[&(a.min(b), a.max(b))]) as u32;
        for tri in &triangles {
            let [i, j, k] = *tri;
            let (eij, ejk, eki) = (odd(i, j), odd(j, k), odd(k, i));
            new_triangles.push([i, eij, eki]);
            new_triangles.push([j, ejk, eij]);
            new_triangles.push([k, eki, ejk]);
            new_triangles.push([eij, ejk, eki]);
        }
        positions = new_positions;
        triangles = new_triangles;
    }
    TriangleMesh::new(positions, triangles)
}

/// Criterion 7: with alphas set to the classic Loop even-vertex weights
/// (per current valence, each iteration), the learnable subdivision
/// reproduces the textbook scheme to 1e-12 over two iterations.
#[test]
fn acceptance_7_loop_subdivision_oracle() {
    for (name, mesh) in [
        ("tetrahedron", TriangleMesh::<f64>::regular_tetrahedron()),
        (
            "icosahedron",
            TriangleMesh::<f64>::icosahedron(Vec3::zero(), 1.0),
        ),
    ] {
        let mut ours = mesh.clone();
        for _ in 0..2 {
            let alphas = classic_loop_alphas(&ours).unwrap();
            ours = loop_subdivide(&ours, &alphas, 1).unwrap();
        }
        let reference = reference_loop(&mesh, 2);
        assert_eq!(ours.triangles, reference.triangles);
        let mut worst = 0.0_f64;
        for (a, b) in ours.positions.iter().zip(&reference.positions) {
            worst = worst.max((*a - *b).norm());
        }
        assert!(worst < 1e-12, "{name}: deviation {worst}");
        println!("acceptance 7 ({name}): max deviation {worst:.2e}");
    }
    println!("acceptance 7 (Loop subdivision oracle): PASS");
}

/// Criterion 8: least-squares adversarial arithmetic, exact plug-in cases.
#[test]
fn acceptance_8_lsgan_arithmetic() {
    let (l_d, l_g) = lsgan_terms(1.0, 0.0);
    assert_eq!(l_d, 0.0);
    assert_eq!(l_g, 0.5);
    let (_, l_g) = lsgan_terms(0.7, 1.0);
    assert_eq!(l_g, 0.0);
    let (l_d, _) = lsgan_terms(0.0, 1.0);
    assert_eq!(l_d, 1.0);
    println!("acceptance 8 (LSGAN arithmetic): PASS");
}

/// Criterion 9: the fit subcommand is byte-identical across repeated runs
/// and across worker counts 1 and 4.
#[test]
fn acceptance_9_cli_determinism() {
    let dir = std::env::temp_dir().join(format!("tetfit-acc9-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();

    let shape = AnalyticSdf::sphere(Vec3::splat(0.5_f64), 0.3);
    let cloud = sample_analytic_surface(&shape, 1000, 5).unwrap();
    let cloud_path = dir.join("cloud.xyz");
    let normals = cloud.normals.as_ref().unwrap();
    let mut text = String::new();
    for (p, n) in cloud.positions.iter().zip(normals) {
        text.push_str(&format!(
            "{} {} {} {} {} {}\n",
            p.x, p.y, p.z, n.x, n.y, n.z
        ));
    }
    std::fs::write(&cloud_path, text).unwrap();

    let config_path = dir.join("fit.cfg");
    std::fs::write(
        &config_path,
        "base_resolution = 8\niterations_per_level = 6\nlevels = 1\nsample_count = 600\n",
    )
    .unwrap();

    let run = |out: &PathBuf, workers: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_tetfit"))
            .args(["fit", "--points"])
            .arg(&cloud_path)
            .args(["--config"])
            .arg(&config_path)
            .args(["--out"])
            .arg(out)
            .args(["--seed", "7", "--workers", workers])
            .status()
            .unwrap();
        assert!(status.success());
        (
            std::fs::read(out.join("mesh.obj")).unwrap(),
            std::fs::read(out.join("history.csv")).unwrap(),
        )
    };

    let (mesh_a, hist_a) = run(&dir.join("a"), "1");
    let (mesh_b, hist_b) = run(&dir.join("b"), "1");
    let (mesh_c, hist_c) = run(&dir.join("c"), "4");
    assert_eq!(mesh_a, mesh_b, "repeated runs differ");
    assert_eq!(hist_a, hist_b, "repeated histories differ");
    assert_eq!(mesh_a, mesh_c, "worker counts change the mesh");
    assert_eq!(hist_a, hist_c, "worker counts change the history");
    println!("acceptance 9 (CLI determinism): PASS");
}
