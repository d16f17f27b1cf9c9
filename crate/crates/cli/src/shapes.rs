//! Shape specification strings for the analytic SDF primitives.
//!
//! Grammar: `sphere:cx,cy,cz,r`, `torus:cx,cy,cz,R,r`,
//! `box:cx,cy,cz,hx,hy,hz`.

use anyhow::{bail, Context, Result};
use tetfit::sdfield::AnalyticSdf;
use tetfit::Vec3;

pub fn parse_shape(spec: &str) -> Result<AnalyticSdf<f64>> {
    let (name, params) = spec
        .split_once(':')
        .with_context(|| format!("shape spec '{spec}' is missing ':' parameters"))?;
    let values: Vec<f64> = params
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .with_context(|| format!("bad shape parameter '{t}'"))
        })
        .collect::<Result<_>>()?;
    match name {
        "sphere" => {
            if values.len() != 4 {
                bail!("sphere expects cx,cy,cz,r (got {} values)", values.len());
            }
            if values[3] <= 0.0 {
                bail!("sphere radius must be positive");
            }
            Ok(AnalyticSdf::sphere(
                Vec3::new(values[0], values[1], values[2]),
                values[3],
            ))
        }
        "torus" => {
            if values.len() != 5 {
                bail!("torus expects cx,cy,cz,R,r (got {} values)", values.len());
            }
            if values[3] <= 0.0 || values[4] <= 0.0 {
                bail!("torus radii must be positive");
            }
            Ok(AnalyticSdf::torus(
                Vec3::new(values[0], values[1], values[2]),
                values[3],
                values[4],
            ))
        }
        "box" => {
            if values.len() != 6 {
                bail!(
                    "box expects cx,cy,cz,hx,hy,hz (got {} values)",
                    values.len()
                );
            }
            if values[3..].iter().any(|&h| h <= 0.0) {
                bail!("box half-extents must be positive");
            }
            Ok(AnalyticSdf::cuboid(
                Vec3::new(values[0], values[1], values[2]),
                Vec3::new(values[3], values[4], values[5]),
            ))
        }
        other => bail!("unknown shape '{other}' (expected sphere|torus|box)"),
    }
}
