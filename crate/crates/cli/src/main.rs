//! Command-line front end: grid building, surface extraction, fitting,
//! the MC/MT oracle benchmark, and SDF patch extraction.

mod config;
mod io;
mod shapes;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use tetfit::fitting::{fit, oracle_bench, BenchOptions, FitConfig, FitTarget};
use tetfit::marching::{marching_cubes, marching_tetrahedra, sample_lattice};
use tetfit::sdfield::{sdf_patch_with, MeshSdf};
use tetfit::{build_grid, Vec3};

#[derive(Parser)]
#[command(
    name = "tetfit",
    version,
    about = "Differentiable iso-surfacing toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tetrahedral grid and report its statistics.
    Build {
        #[arg(long)]
        res: u32,
        #[arg(long, default_value = "six")]
        scheme: String,
        /// Optional JSON stats output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract an iso-surface from an analytic shape into an OBJ file.
    Extract {
        /// Shape spec, e.g. sphere:0.5,0.5,0.5,0.3
        #[arg(long)]
        shape: String,
        #[arg(long)]
        res: u32,
        /// mt (marching tetrahedra) or mc (marching cubes).
        #[arg(long, default_value = "mt")]
        method: String,
        /// Grid scheme for mt.
        #[arg(long, default_value = "six")]
        scheme: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the representation to a point cloud or mesh target.
    Fit {
        /// XYZ point cloud target (x y z [nx ny nz] per line).
        #[arg(long, conflicts_with = "mesh")]
        points: Option<PathBuf>,
        /// OBJ mesh target.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// key=value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for mesh.obj, history.csv and manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated ablations: no-deform, no-volume-subdiv,
        /// no-surface-subdiv.
        #[arg(long)]
        ablate: Option<String>,
    },
    /// Compare marching cubes and marching tetrahedra against the exact SDF
    /// at equal query budgets.
    Bench {
        #[arg(long)]
        shape: String,
        /// Comma-separated query budgets (vertex counts).
        #[arg(long, default_value = "4913,35937,274625")]
        budgets: String,
        #[arg(long)]
        out: PathBuf,
        /// Also fit the representation at each budget (slow).
        #[arg(long)]
        with_fit: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Sample the signed distance field of a mesh on a cubic lattice.
    Patch {
        #[arg(long)]
        mesh: PathBuf,
        /// Lattice center as x,y,z.
        #[arg(long)]
        center: String,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Half-width of the sampled cube.
        #[arg(long, default_value_t = 0.125)]
        extent: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Serialize, Deserialize)]
struct GridStats {
    resolution: u32,
    scheme: String,
    vertices: usize,
    tets: usize,
    level: u32,
    clamp_radius: f64,
    total_volume: f64,
}

#[derive(Serialize, Deserialize)]
struct PatchFile {
    origin: [f64; 3],
    spacing: f64,
    n: usize,
    values: Vec<f64>,
}

fn parse_vec3(token: &str) -> Result<Vec3<f64>> {
    let parts: Vec<f64> = token
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad coordinate '{t}'"))
        })
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        bail!("expected x,y,z (got {} values)", parts.len());
    }
    Ok(Vec3::new(parts[0], parts[1], parts[2]))
}

fn cmd_build(res: u32, scheme: &str, out: Option<&Path>) -> Result<()> {
    let scheme = config::parse_scheme(scheme)?;
    let grid = build_grid::<f64>(res, scheme)?;
    let stats = GridStats {
        resolution: res,
        scheme: config::scheme_name(scheme).to_string(),
        vertices: grid.vertex_count(),
        tets: grid.tet_count(),
        level: grid.level(),
        clamp_radius: grid.clamp_radius(),
        total_volume: grid.total_volume(),
    };
    let json = serde_json::to_string_pretty(&stats)?;
    println!("{json}");
    if let Some(path) = out {
        std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_extract(shape: &str, res: u32, method: &str, scheme: &str, out: &Path) -> Result<()> {
    let sdf = shapes::parse_shape(shape)?;
    let mesh = match method {
        "mt" => {
            let scheme = config::parse_scheme(scheme)?;
            let mut grid = build_grid::<f64>(res, scheme)?;
            grid.set_sdf_from(|p| sdf.eval(p));
            marching_tetrahedra(&grid)
        }
        "mc" => {
            let values = sample_lattice(|p| sdf.eval(p), res);
            marching_cubes(&values, res)
        }
        other => bail!("unknown method '{other}' (expected mt|mc)"),
    };
    io::write_obj(out, &mesh)?;
    println!(
        "extracted {} vertices, {} triangles -> {}",
        mesh.vertex_count(),
        mesh.triangle_count(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    points: Option<&Path>,
    mesh: Option<&Path>,
    config_path: Option<&Path>,
    out_dir: &Path,
    seed: Option<u64>,
    workers: Option<usize>,
    ablate: Option<&str>,
) -> Result<()> {
    let mut fit_config: FitConfig<f64> = match config_path {
        Some(path) => config::load_config(path)?,
        None => FitConfig::default(),
    };
    if let Some(seed) = seed {
        fit_config.seed = seed;
    }
    if let Some(workers) = workers {
        fit_config.workers = workers.max(1);
    }
    if let Some(list) = ablate {
        config::apply_ablations(&mut fit_config, list)?;
    }

    let target = match (points, mesh) {
        (Some(path), None) => FitTarget::Points(io::read_xyz(path)?),
        (None, Some(path)) => FitTarget::Mesh(io::read_obj(path)?),
        _ => bail!("exactly one of --points or --mesh is required"),
    };

    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let started = Instant::now();
    let (result_mesh, history) = fit(&target, &fit_config)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mesh_path = out_dir.join("mesh.obj");
    let history_path = out_dir.join("history.csv");
    let manifest_path = out_dir.join("manifest.json");
    io::write_obj(&mesh_path, &result_mesh)?;
    std::fs::write(&history_path, io::history_csv(&history))
        .with_context(|| format!("writing {}", history_path.display()))?;

    let mut outputs = BTreeMap::new();
    outputs.insert("mesh".to_string(), mesh_path.display().to_string());
    outputs.insert("history".to_string(), history_path.display().to_string());
    let manifest = config::RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: fit_config.seed,
        config: (&fit_config).into(),
        timing_seconds: elapsed,
        outputs,
        final_loss: history.last().map(|r| r.into()),
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", manifest_path.display()))?;

    println!(
        "fit finished in {elapsed:.1}s: {} steps, final loss {}",
        history.len(),
        history.last().map(|r| r.total).unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_bench(
    shape: &str,
    budgets: &str,
    out: &Path,
    with_fit: bool,
    workers: usize,
    seed: u64,
) -> Result<()> {
    let sdf = shapes::parse_shape(shape)?;
    let budgets: Vec<usize> = budgets
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .with_context(|| format!("bad budget '{t}'"))
        })
        .collect::<Result<_>>()?;
    let opts = BenchOptions {
        workers: workers.max(1),
        seed,
        include_fit: with_fit,
        ..BenchOptions::default()
    };
    let rows = oracle_bench(&sdf, &budgets, &opts)?;
    std::fs::write(out, io::bench_csv(&rows))
        .with_context(|| format!("writing {}", out.display()))?;
    for row in &rows {
        println!(
            "{:>4} budget {:>7} vertices {:>7} chamfer-L1 {}",
            row.method.as_str(),
            row.budget,
            row.vertex_count,
            row.chamfer_l1
        );
    }
    Ok(())
}

fn cmd_patch(
    mesh_path: &Path,
    center: &str,
    n: usize,
    extent: f64,
    out: &Path,
    workers: usize,
) -> Result<()> {
    let mesh = io::read_obj(mesh_path)?;
    let center = parse_vec3(center)?;
    let field = MeshSdf::new(&mesh)?;
    let patch = sdf_patch_with(&field, center, n, extent, workers.max(1))?;
    let file = PatchFile {
        origin: [patch.origin.x, patch.origin.y, patch.origin.z],
        spacing: patch.spacing,
        n: patch.n,
        values: patch.values,
    };
    std::fs::write(out, serde_json::to_string(&file)?)
        .with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {}^3 patch -> {}", n, out.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Build { res, scheme, out } => cmd_build(*res, scheme, out.as_deref()),
        Command::Extract {
            shape,
            res,
            method,
            scheme,
            out,
        } => cmd_extract(shape, *res, method, scheme, out),
        Command::Fit {
            points,
            mesh,
            config,
            out,
            seed,
            workers,
            ablate,
        } => cmd_fit(
            points.as_deref(),
            mesh.as_deref(),
            config.as_deref(),
            out,
            *seed,
            *workers,
            ablate.as_deref(),
        ),
        Command::Bench {
            shape,
            budgets,
            out,
            with_fit,
            workers,
            seed,
        } => cmd_bench(shape, budgets, out, *with_fit, *workers, *seed),
        Command::Patch {
            mesh,
            center,
            n,
            extent,
            out,
            workers,
        } => cmd_patch(mesh, center, *n, *extent, out, *workers),
    }
}
