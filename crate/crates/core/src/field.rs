//! Space-time fields sampled on a uniform grid.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Values `u(x0 + j dx, t0 + n dt)` stored row-major by time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid<T> {
    pub x0: T,
    pub dx: T,
    pub nx: usize,
    pub t0: T,
    pub dt: T,
    pub nt: usize,
    pub values: Vec<T>,
}

/// Compact rectangle `[x0, x1] x [t0, t1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub x0: T,
    pub x1: T,
    pub t0: T,
    pub t1: T,
}

impl<T: Scalar> Region<T> {
    pub fn new(x0: T, x1: T, t0: T, t1: T) -> Self {
        Region { x0, x1, t0, t1 }
    }

    pub fn default_region() -> Self {
        let [x0, x1, t0, t1] = crate::defaults::REGION.map(T::lit);
        Region { x0, x1, t0, t1 }
    }

    pub fn contains(&self, x: T, t: T) -> bool {
        let tol = T::lit(1e-12);
        x >= self.x0 - tol && x <= self.x1 + tol && t >= self.t0 - tol && t <= self.t1 + tol
    }
}

/// Fractional grid coordinate, snapped to the nearest node when within
/// rounding of it.
pub(crate) fn grid_pos<T: Scalar>(v: T, origin: T, step: T) -> T {
    let p = (v - origin) / step;
    let r = p.round();
    if (p - r).abs() <= T::lit(1e-9) * T::one().max(p.abs()) {
        r
    } else {
        p
    }
}

impl<T: Scalar> FieldGrid<T> {
    pub fn from_fn(x0: T, dx: T, nx: usize, t0: T, dt: T, nt: usize, f: impl Fn(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(nx * nt);
        for n in 0..nt {
            let t = t0 + dt * T::of_usize(n);
            values.extend((0..nx).map(|j| f(x0 + dx * T::of_usize(j), t)));
        }
        FieldGrid { x0, dx, nx, t0, dt, nt, values }
    }

    #[inline]
    pub fn x(&self, j: usize) -> T {
        self.x0 + self.dx * T::of_usize(j)
    }

    #[inline]
    pub fn t(&self, n: usize) -> T {
        self.t0 + self.dt * T::of_usize(n)
    }

    #[inline]
    pub fn at(&self, j: usize, n: usize) -> T {
        self.values[n * self.nx + j]
    }

    pub fn row(&self, n: usize) -> &[T] {
        &self.values[n * self.nx..(n + 1) * self.nx]
    }

    pub fn x_end(&self) -> T {
        self.x(self.nx.saturating_sub(1))
    }

    pub fn t_end(&self) -> T {
        self.t(self.nt.saturating_sub(1))
    }

    /// Same node layout as `other` (up to rounding of the steps).
    pub fn aligned_with(&self, other: &FieldGrid<T>) -> bool {
        let close = |a: T, b: T| (a - b).abs() <= T::lit(1e-9) * (T::one() + a.abs());
        self.nx == other.nx
            && self.nt == other.nt
            && close(self.x0, other.x0)
            && close(self.dx, other.dx)
            && close(self.t0, other.t0)
            && close(self.dt, other.dt)
    }

    /// Column `j` linearly interpolated in time.
    pub fn sample_time(&self, j: usize, t: T) -> Option<T> {
        if j >= self.nx || self.nt == 0 {
            return None;
        }
        let (n, w) = split(grid_pos(t, self.t0, self.dt), self.nt)?;
        let a = self.at(j, n);
        Some(if w == T::zero() { a } else { a + w * (self.at(j, n + 1) - a) })
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn sample(&self, x: T, t: T) -> Option<T> {
        if self.nx == 0 {
            return None;
        }
        let (j, wx) = split(grid_pos(x, self.x0, self.dx), self.nx)?;
        let lo = self.sample_time(j, t)?;
        if wx == T::zero() {
            return Some(lo);
        }
        let hi = self.sample_time(j + 1, t)?;
        Some(lo + wx * (hi - lo))
    }

    /// CSV `t,x,u`, row-major by time then space, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,u")?;
        for n in 0..self.nt {
            let t = self.t(n);
            for j in 0..self.nx {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", t, self.x(j), self.at(j, n))?;
            }
        }
        Ok(())
    }
}

/// Integer node and weight toward the next node for a fractional position
/// in `[0, len - 1]`.
fn split<T: Scalar>(pos: T, len: usize) -> Option<(usize, T)> {
    let last = T::of_usize(len - 1);
    if !(pos >= T::zero() && pos <= last) {
        return None;
    }
    let k = pos.floor().to_usize()?;
    if k + 1 >= len {
        return Some((len - 1, T::zero()));
    }
    Some((k, pos - T::of_usize(k)))
}

/// `max |a - b|` over the nodes of `a` inside `region`; `b` is sampled
/// bilinearly, so it may live on a different grid.
pub fn sup_error<T: Scalar>(a: &FieldGrid<T>, b: &FieldGrid<T>, region: &Region<T>) -> Result<T> {
    let mut worst: Option<T> = None;
    for n in 0..a.nt {
        let t = a.t(n);
        let tol = T::lit(1e-12);
        if t < region.t0 - tol || t > region.t1 + tol {
            continue;
        }
        for j in 0..a.nx {
            let x = a.x(j);
            if !region.contains(x, t) {
                continue;
            }
            let other = b
                .sample(x, t)
                .ok_or_else(|| Error::Config(format!("second field does not cover (x = {x}, t = {t})")))?;
            let d = (a.at(j, n) - other).abs();
            worst = Some(worst.map_or(d, |w: T| w.max(d)));
        }
    }
    worst.ok_or_else(|| Error::Config("region contains no node of the first field".into()))
}
