//! Resolution of the option groups shared by several subcommands.

use std::sync::Arc;

use anyhow::Result;
use gpe_core::grid::{axial_half_extent, DEFAULT_N_R, DEFAULT_N_RHO, DEFAULT_N_S_CYLINDRICAL, DEFAULT_N_S_LINE, DEFAULT_RHO_MAX, DEFAULT_R_MAX};
use gpe_core::groundstate::DescentConfig;
use gpe_core::potential::ExternalPotential;
use gpe_core::{Geometry, Grid, GridSpec};

use crate::config::Resolver;
use crate::{DescentArgs, GridArgs, PotentialArgs, UsageError};

fn reject_flag(set: bool, flag: &str, geometry: Geometry) -> Result<()> {
    if set {
        return Err(UsageError(format!("--{flag} does not apply to {geometry} grids")).into());
    }
    Ok(())
}

/// Grid for `geometry`; the axial half-extent defaults to the soliton or
/// trap scale at `(q, lambda_z)`.
pub fn grid(cfg: &mut Resolver, a: &GridArgs, geometry: Geometry, q: f64, lambda_z: f64) -> Result<Arc<Grid>> {
    let half = |cfg: &mut Resolver| -> Result<f64> {
        let default = axial_half_extent(q, lambda_z)?;
        cfg.get("s-half", a.s_half, default)
    };
    let spec = match geometry {
        Geometry::Cylindrical => {
            reject_flag(a.n_r.is_some() || a.r_max.is_some(), "n-r/--r-max", geometry)?;
            let n_rho = cfg.get("n-rho", a.n_rho, DEFAULT_N_RHO)?;
            let rho_max = cfg.get("rho-max", a.rho_max, DEFAULT_RHO_MAX)?;
            let n_s = cfg.get("n-s", a.n_s, DEFAULT_N_S_CYLINDRICAL)?;
            let h = half(cfg)?;
            GridSpec::Cylindrical {
                rho_max,
                n_rho,
                s_min: -h,
                s_max: h,
                n_s,
            }
        }
        Geometry::Line => {
            reject_flag(
                a.n_r.is_some() || a.r_max.is_some() || a.n_rho.is_some() || a.rho_max.is_some(),
                "n-r/--r-max/--n-rho/--rho-max",
                geometry,
            )?;
            let n_s = cfg.get("n-s", a.n_s, DEFAULT_N_S_LINE)?;
            let h = half(cfg)?;
            GridSpec::Line {
                s_min: -h,
                s_max: h,
                n_s,
            }
        }
        Geometry::SphericalRadial => {
            reject_flag(
                a.n_s.is_some() || a.s_half.is_some() || a.n_rho.is_some() || a.rho_max.is_some(),
                "n-s/--s-half/--n-rho/--rho-max",
                geometry,
            )?;
            GridSpec::SphericalRadial {
                r_max: cfg.get("r-max", a.r_max, DEFAULT_R_MAX)?,
                n_r: cfg.get("n-r", a.n_r, DEFAULT_N_R)?,
            }
        }
    };
    Ok(Arc::new(Grid::build(spec)?))
}

pub fn descent(cfg: &mut Resolver, a: &DescentArgs) -> Result<DescentConfig> {
    let d = DescentConfig::default();
    let c = DescentConfig {
        method: cfg.get("method", a.method, d.method)?,
        step_size: cfg.get("step-size", a.step_size, d.step_size)?,
        max_iters: cfg.get("max-iters", a.max_iters, d.max_iters)?,
        energy_tol: cfg.get("energy-tol", a.energy_tol, d.energy_tol)?,
        residual_tol: cfg.get("residual-tol", a.residual_tol, d.residual_tol)?,
        collapse_guard: cfg.get("collapse-guard", a.collapse_guard, d.collapse_guard)?,
    };
    c.validate()?;
    Ok(c)
}

pub fn potential(cfg: &mut Resolver, a: &PotentialArgs) -> Result<Option<ExternalPotential>> {
    let text: Option<String> = cfg.get_opt("potential", a.potential.clone())?;
    let params = cfg.params("param", &a.params)?;
    match text {
        Some(t) if !t.trim().is_empty() => Ok(Some(ExternalPotential::new(&t, &params)?)),
        _ if !params.is_empty() => Err(UsageError("--param given without --potential".into()).into()),
        _ => Ok(None),
    }
}
