//! Explicit monotone scheme for `u_t = F(u_x)`:
//!
//! ```text
//! u_j^{n+1} = u_j^n + dt F((u_{j+1}^n - u_j^n) / dx),   dt <= dx / C_F.
//! ```
//!
//! This is the delay-free micro equation at scale `dx`. Information only
//! travels from the right, so the right edge is closed by a ghost node at
//! a fixed slope (by default the initial edge slope) and the left edge
//! needs nothing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults::{MACRO_CFL_FRACTION, MACRO_DX, MACRO_ROWS};
use crate::error::{Error, Result};
pub use crate::field::{sup_error, FieldGrid, Region};
use crate::model::VelocityProfile;
use crate::scalar::{dyadic_floor, steps_to, Scalar};

const PARALLEL_NODES: usize = 4096;

/// Space-time grid of a macro run; rows are stored every `store_every` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HjGrid<T> {
    pub x0: T,
    pub dx: T,
    pub nx: usize,
    pub dt: T,
    pub steps: usize,
    pub store_every: usize,
    /// Slope of the ghost node beyond the right edge; the initial edge
    /// slope when unset. Runs compared node by node should share it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_slope: Option<T>,
}

impl<T: Scalar> HjGrid<T> {
    /// Grid with `dx = 2^-11` and a power-of-two `dt` at half the CFL limit,
    /// wide enough that `region` up to `horizon` never sees the right edge.
    pub fn for_region(region: &Region<T>, c_f: T, horizon: T) -> Self {
        let dx = T::lit(MACRO_DX);
        let dt = if c_f > T::zero() { dyadic_floor(T::lit(MACRO_CFL_FRACTION) * dx / c_f) } else { dx };
        let mut steps = steps_to(horizon, dt).max(1);
        let store_every = steps.div_ceil(MACRO_ROWS).max(1);
        steps = steps.div_ceil(store_every) * store_every;
        // each step reads one node to the right
        let reach = dx * T::of_usize(steps + 2);
        let x0 = (region.x0 / dx).floor() * dx - dx;
        let x1 = region.x1 + reach;
        let nx = ((x1 - x0) / dx).ceil().to_usize().unwrap_or(2).max(2) + 1;
        HjGrid { x0, dx, nx, dt, steps, store_every, edge_slope: None }
    }

    pub fn x(&self, j: usize) -> T {
        self.x0 + self.dx * T::of_usize(j)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    pub fn horizon(&self) -> T {
        self.dt * T::of_usize(self.steps)
    }
}

/// Runs the scheme from the slice `u0` (one value per node of `grid`).
pub fn solve_hj<T: Scalar>(velocity: &VelocityProfile<T>, u0: &[T], grid: &HjGrid<T>) -> Result<FieldGrid<T>> {
    let lip = velocity.lipschitz_data()?;
    if grid.nx < 2 || u0.len() != grid.nx {
        return Err(Error::Config(format!(
            "initial slice has {} values for a grid of {} nodes (need at least 2)",
            u0.len(),
            grid.nx
        )));
    }
    if !(grid.dx > T::zero() && grid.dt > T::zero()) {
        return Err(Error::Config("grid steps must be positive".into()));
    }
    if grid.store_every == 0 || !grid.steps.is_multiple_of(grid.store_every) {
        return Err(Error::Config(format!(
            "{} steps are not a multiple of the storage stride {}",
            grid.steps, grid.store_every
        )));
    }
    if grid.dt * lip.c_f > grid.dx {
        return Err(Error::Config(format!(
            "CFL condition violated: dt = {} exceeds dx / C_F = {}",
            grid.dt,
            grid.dx / lip.c_f
        )));
    }
    if let Some(j) = u0.iter().position(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("initial slice is not finite at x = {}", grid.x(j))));
    }
    let edge = grid.edge_slope.unwrap_or_else(|| (u0[grid.nx - 1] - u0[grid.nx - 2]) / grid.dx);
    if !edge.is_finite() {
        return Err(Error::Validation("initial slice is not Lipschitz at the right edge".into()));
    }

    let nt = grid.steps / grid.store_every + 1;
    let mut values = Vec::with_capacity(nt * grid.nx);
    values.extend_from_slice(u0);
    let mut cur = u0.to_vec();
    let mut next = vec![T::zero(); grid.nx];
    let ghost_step = edge * grid.dx;
    let update = |j: usize, out: &mut T, cur: &[T]| {
        let right = if j + 1 < cur.len() { cur[j + 1] } else { cur[j] + ghost_step };
        *out = cur[j] + grid.dt * velocity.speed((right - cur[j]) / grid.dx);
    };
    for n in 1..=grid.steps {
        if grid.nx >= PARALLEL_NODES {
            next.par_iter_mut().enumerate().for_each(|(j, out)| update(j, out, &cur));
        } else {
            next.iter_mut().enumerate().for_each(|(j, out)| update(j, out, &cur));
        }
        std::mem::swap(&mut cur, &mut next);
        if n % grid.store_every == 0 {
            if let Some(j) = cur.iter().position(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite value at x = {}, step {n}", grid.x(j))));
            }
            values.extend_from_slice(&cur);
        }
    }
    Ok(FieldGrid {
        x0: grid.x0,
        dx: grid.dx,
        nx: grid.nx,
        t0: T::zero(),
        dt: grid.dt * T::of_usize(grid.store_every),
        nt,
        values,
    })
}

/// Solves from a closed-form slice `u0(x)` on a grid sized for `region`.
pub fn solve_for_region<T: Scalar>(
    velocity: &VelocityProfile<T>,
    u0: impl Fn(T) -> T,
    region: &Region<T>,
) -> Result<FieldGrid<T>> {
    let lip = velocity.lipschitz_data()?;
    let grid = HjGrid::for_region(region, lip.c_f, region.t1);
    let slice: Vec<T> = grid.nodes().into_iter().map(u0).collect();
    solve_hj(velocity, &slice, &grid)
}
