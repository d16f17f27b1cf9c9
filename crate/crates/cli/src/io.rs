//! Mesh and point-cloud file formats: ASCII OBJ, XYZ clouds, CSV outputs.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tetfit::fitting::BenchRow;
use tetfit::losses::{LossReport, PointSample};
use tetfit::{TriangleMesh, Vec3};

/// Area threshold below which triangles are dropped at export.
pub const EXPORT_MIN_AREA: f64 = 1e-14;

/// Serializes a mesh as ASCII OBJ (`v`/`f` lines, 1-based indices).
/// Zero-area triangles are filtered here, at export only.
pub fn obj_string(mesh: &TriangleMesh<f64>, filter_degenerate: bool) -> String {
    let mesh = if filter_degenerate {
        mesh.without_degenerate_triangles(EXPORT_MIN_AREA)
    } else {
        mesh.clone()
    };
    let mut out = String::new();
    for p in &mesh.positions {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn write_obj(path: &Path, mesh: &TriangleMesh<f64>) -> Result<()> {
    std::fs::write(path, obj_string(mesh, true))
        .with_context(|| format!("writing {}", path.display()))
}

/// Reads an ASCII OBJ mesh. Faces must be triangles; texture/normal
/// references per vertex (`i/t/n`) are accepted and ignored.
pub fn read_obj(path: &Path) -> Result<TriangleMesh<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for slot in &mut coords {
                    let token = tokens.next().with_context(|| {
                        format!("line {}: vertex needs 3 coordinates", lineno + 1)
                    })?;
                    *slot = token.parse().with_context(|| {
                        format!("line {}: bad coordinate '{token}'", lineno + 1)
                    })?;
                }
                positions.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    bail!(
                        "line {}: unsupported face with {} vertices (triangles only)",
                        lineno + 1,
                        refs.len()
                    );
                }
                let mut tri = [0u32; 3];
                for (slot, token) in tri.iter_mut().zip(&refs) {
                    let index_part = token.split('/').next().unwrap_or("");
                    let idx: i64 = index_part.parse().with_context(|| {
                        format!("line {}: bad face index '{token}'", lineno + 1)
                    })?;
                    if idx < 1 || idx as usize > positions.len() {
                        bail!("line {}: face index {idx} out of range", lineno + 1);
                    }
                    *slot = (idx - 1) as u32;
                }
                triangles.push(tri);
            }
            _ => {}
        }
    }
    Ok(TriangleMesh::new(positions, triangles))
}

/// Reads an XYZ point cloud: one `x y z` per line, optionally
/// `x y z nx ny nz`. The column count must be consistent.
pub fn read_xyz(path: &Path) -> Result<PointSample<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut positions = Vec::new();
    let mut normals: Vec<Vec3<f64>> = Vec::new();
    let mut with_normals: Option<bool> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                let v: f64 = t
                    .parse()
                    .with_context(|| format!("line {}: bad number '{t}'", lineno + 1))?;
                if !v.is_finite() {
                    bail!("line {}: non-finite value '{t}'", lineno + 1);
                }
                Ok(v)
            })
            .collect::<Result<_>>()?;
        let has_normals = match values.len() {
            3 => false,
            6 => true,
            n => bail!("line {}: expected 3 or 6 columns, found {n}", lineno + 1),
        };
        match with_normals {
            None => with_normals = Some(has_normals),
            Some(expected) if expected != has_normals => {
                bail!("line {}: inconsistent column count", lineno + 1)
            }
            _ => {}
        }
        positions.push(Vec3::new(values[0], values[1], values[2]));
        if has_normals {
            let n = Vec3::new(values[3], values[4], values[5]);
            normals.push(n.normalized().unwrap_or(Vec3::new(0.0, 0.0, 1.0)));
        }
    }
    if positions.is_empty() {
        bail!("point cloud {} is empty", path.display());
    }
    Ok(PointSample {
        positions,
        normals: if with_normals == Some(true) {
            Some(normals)
        } else {
            None
        },
        provenance: None,
    })
}

pub fn history_csv(history: &[LossReport<f64>]) -> String {
    let mut out = String::from("iteration,cd,normal,gan,sdf,def,total\n");
    for (i, r) in history.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            i, r.terms.cd, r.terms.normal, r.terms.gan, r.terms.sdf, r.terms.def, r.total
        );
    }
    out
}

pub fn bench_csv(rows: &[BenchRow<f64>]) -> String {
    let mut out = String::from("method,budget,vertex_count,chamfer_l1\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.method.as_str(),
            r.budget,
            r.vertex_count,
            r.chamfer_l1
        );
    }
    out
}
