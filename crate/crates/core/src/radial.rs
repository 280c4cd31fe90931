//! Radial discretization of H¹(ℝᴺ): truncated grids, quadrature, the two
//! scaling maps, and symmetric-decreasing rearrangement.
//!
//! A profile stores samples `u(r_i)` at `r_i = i h` on `[0, R]` with a
//! Dirichlet zero at `R`. Integrals over ℝᴺ carry the surface measure
//! `omega_N r^{N-1}`; for N = 1 the profile represents an even function
//! on the line and `omega_1 = 2` doubles the half-line integral.
//!
//! The Dirichlet energy uses staggered midpoint differences,
//! `sum_i omega_N r_{i+1/2}^{N-1} (u_{i+1}-u_i)²/h`, which is the exact
//! quadratic form of the finite-volume radial Laplacian used by the flow
//! solver, so discrete integration by parts holds without remainder.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs at least 16 intervals, got {0}")]
    TooCoarse(usize),
    #[error("truncation radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("dimension must be at least 1")]
    BadDimension,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile and grid size mismatch: {values} values for {nodes} nodes")]
    SizeMismatch { values: usize, nodes: usize },
    #[error("profile contains a non-finite value at node {0}")]
    NonFinite(usize),
    #[error("rearrangement requires a nonnegative profile (node {node} is {value})")]
    Negative { node: usize, value: f64 },
    #[error("dilation factor must be positive, got {0}")]
    BadDilation(f64),
    #[error("profiles live on different grids")]
    GridMismatch,
    #[error("csv parse error: {0}")]
    Csv(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Surface measure of the unit sphere in dimension `n`:
/// `2 π^{n/2} / Γ(n/2)`, via the half-integer Gamma recursion.
pub fn unit_sphere_measure(n: usize) -> f64 {
    assert!(n >= 1);
    let pi = std::f64::consts::PI;
    // Γ(1/2) = √π, Γ(1) = 1, Γ(x+1) = x Γ(x)
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { pi.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * pi.powf(n as f64 / 2.0) / gamma
}

/// Uniform radial grid: `intervals` cells of width `h = r_max/intervals`
/// in dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T: Real> {
    dim: usize,
    r_max: T,
    intervals: usize,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(dim: usize, r_max: T, intervals: usize) -> Result<Self, GridError> {
        if dim < 1 {
            return Err(GridError::BadDimension);
        }
        if !(r_max > T::zero()) {
            return Err(GridError::BadRadius(r_max.to_f64().unwrap_or(f64::NAN)));
        }
        if intervals < 16 {
            return Err(GridError::TooCoarse(intervals));
        }
        Ok(Self { dim, r_max, intervals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `intervals + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.r_max / T::of_usize(self.intervals)
    }

    pub fn node(&self, i: usize) -> T {
        self.spacing() * T::of_usize(i)
    }

    pub fn omega(&self) -> T {
        T::of(unit_sphere_measure(self.dim))
    }

    /// Trapezoid quadrature weight at node `i` for integrals over ℝᴺ,
    /// `omega_N r_i^{N-1} h` with halved end weights.
    pub fn weight(&self, i: usize) -> T {
        let h = self.spacing();
        let r = self.node(i);
        let base = self.omega() * radial_power(r, self.dim) * h;
        if i == 0 || i == self.intervals {
            base / T::of(2.0)
        } else {
            base
        }
    }

    /// Face area at the midpoint `r_{i+1/2}`, `omega_N r_{i+1/2}^{N-1}`.
    pub fn face_area(&self, i: usize) -> T {
        let r = self.node(i) + self.spacing() / T::of(2.0);
        self.omega() * radial_power(r, self.dim)
    }

    /// Exact measure of the cell around node `i` (a centered shell,
    /// half-width at the ends). Used for discrete L² norms of residuals,
    /// where the trapezoid weight degenerates at the origin for N >= 2.
    pub fn cell_measure(&self, i: usize) -> T {
        let h = self.spacing();
        let half = h / T::of(2.0);
        let lo = if i == 0 { T::zero() } else { self.node(i) - half };
        let hi = if i == self.intervals { self.r_max } else { self.node(i) + half };
        let n = T::of_usize(self.dim);
        self.omega() * (hi.powf(n) - lo.powf(n)) / n
    }
}

fn radial_power<T: Real>(r: T, dim: usize) -> T {
    match dim {
        1 => T::one(),
        2 => r,
        3 => r * r,
        _ => r.powi(dim as i32 - 1),
    }
}

/// Sampled radial function on a [`RadialGrid`], Dirichlet-truncated at `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T: Real> {
    grid: RadialGrid<T>,
    values: Vec<T>,
}

impl<T: Real> RadialProfile<T> {
    /// Sample `f(r)` on the grid. The last node is forced to zero.
    pub fn from_fn(grid: RadialGrid<T>, f: impl Fn(T) -> T) -> Self {
        let mut values: Vec<T> = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        *values.last_mut().unwrap() = T::zero();
        Self { grid, values }
    }

    pub fn zero(grid: RadialGrid<T>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    /// Wrap existing samples. Values must be finite; the last node is
    /// forced to zero to keep the truncation invariant.
    pub fn from_values(grid: RadialGrid<T>, mut values: Vec<T>) -> Result<Self, ProfileError> {
        if values.len() != grid.len() {
            return Err(ProfileError::SizeMismatch { values: values.len(), nodes: grid.len() });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ProfileError::NonFinite(i));
            }
        }
        *values.last_mut().unwrap() = T::zero();
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Linear interpolation; zero outside `[0, R]`.
    pub fn sample(&self, r: T) -> T {
        if r < T::zero() || r >= self.grid.r_max {
            return T::zero();
        }
        let h = self.grid.spacing();
        let x = r / h;
        let i = x.floor().to_usize().unwrap_or(0).min(self.grid.intervals - 1);
        let frac = x - T::of_usize(i);
        self.values[i] * (T::one() - frac) + self.values[i + 1] * frac
    }

    /// `∫_{ℝᴺ} |u|² dx` by trapezoid quadrature.
    pub fn mass(&self) -> T {
        self.integral_of(|u| u.sq())
    }

    /// `∫_{ℝᴺ} phi(u) dx` by trapezoid quadrature.
    pub fn integral_of(&self, phi: impl Fn(T) -> T) -> T {
        let mut acc = T::zero();
        for i in 0..self.values.len() {
            acc += self.grid.weight(i) * phi(self.values[i]);
        }
        acc
    }

    /// `∫_{ℝᴺ} |∇u|² dx` (un-halved) via staggered midpoint differences.
    /// `u'(0) = 0` is automatic: no face sits at the origin.
    pub fn grad_norm_sq(&self) -> T {
        let h = self.grid.spacing();
        let mut acc = T::zero();
        for i in 0..self.grid.intervals {
            let du = self.values[i + 1] - self.values[i];
            acc += self.grid.face_area(i) * du * du / h;
        }
        acc
    }

    /// Mass-preserving scaling `(s ⋄ u)(r) = e^{Ns/2} u(e^s r)`, resampled
    /// onto the same grid by linear interpolation.
    pub fn l2_scaling(&self, s: T) -> Self {
        if s == T::zero() {
            return self.clone();
        }
        let n = T::of_usize(self.grid.dim);
        let amp = (n * s / T::of(2.0)).exp();
        let stretch = s.exp();
        let mut values: Vec<T> =
            (0..self.grid.len()).map(|i| amp * self.sample(stretch * self.grid.node(i))).collect();
        *values.last_mut().unwrap() = T::zero();
        Self { grid: self.grid.clone(), values }
    }

    /// Dilation `u(·/t)`: mass scales by `t^N`, the Dirichlet energy by
    /// `t^{N-2}`, and `∫F(u)` by `t^N`, up to interpolation error.
    pub fn dilate(&self, t: T) -> Result<Self, ProfileError> {
        if !(t > T::zero()) {
            return Err(ProfileError::BadDilation(t.to_f64().unwrap_or(f64::NAN)));
        }
        if t == T::one() {
            return Ok(self.clone());
        }
        let mut values: Vec<T> =
            (0..self.grid.len()).map(|i| self.sample(self.grid.node(i) / t)).collect();
        *values.last_mut().unwrap() = T::zero();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// Symmetric-decreasing rearrangement of a nonnegative profile.
    ///
    /// For N = 1 the cells all carry equal measure and the rearrangement
    /// is a descending sort of the samples. For N >= 2 the annular cells
    /// `[r_i, r_{i+1})` are sorted by value and replayed from the origin
    /// outward; each node takes the value of the sorted cell containing
    /// its ball volume, so superlevel-set measures are preserved up to
    /// cell quantization.
    pub fn schwarz_rearrange(&self) -> Result<Self, ProfileError> {
        for (i, v) in self.values.iter().enumerate() {
            if *v < T::zero() {
                return Err(ProfileError::Negative {
                    node: i,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        // a nonincreasing profile is its own rearrangement; returning it
        // directly also makes the operation exactly idempotent
        if self.values.windows(2).all(|w| w[0] >= w[1]) {
            return Ok(self.clone());
        }
        if self.grid.dim == 1 {
            let mut sorted = self.values.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return Ok(Self { grid: self.grid.clone(), values: sorted });
        }

        let m = self.grid.intervals;
        let n = T::of_usize(self.grid.dim);
        let omega = self.grid.omega();
        // annular cell [r_i, r_{i+1}) keyed by the left-node value
        let mut cells: Vec<(T, T)> = (0..m)
            .map(|i| {
                let lo = self.grid.node(i);
                let hi = self.grid.node(i + 1);
                (self.values[i], omega * (hi.powf(n) - lo.powf(n)) / n)
            })
            .collect();
        cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

        let cumulative: Vec<T> = cells
            .iter()
            .scan(T::zero(), |acc, (_, measure)| {
                let start = *acc;
                *acc += *measure;
                Some(start)
            })
            .collect();

        let mut values = Vec::with_capacity(self.grid.len());
        let mut k = 0usize;
        for i in 0..=m {
            let ball = omega * self.grid.node(i).powf(n) / n;
            while k + 1 < cells.len() && cumulative[k] + cells[k].1 <= ball {
                k += 1;
            }
            values.push(cells[k].0);
        }
        *values.last_mut().unwrap() = T::zero();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// Write the shared `r,u` CSV format.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<(), ProfileError> {
        writeln!(out, "r,u")?;
        for i in 0..self.grid.len() {
            writeln!(out, "{:.17e},{:.17e}", self.grid.node(i), self.values[i])?;
        }
        Ok(())
    }

    /// Read a profile from the `r,u` CSV format; the grid is reconstructed
    /// from the row count and final radius.
    pub fn read_csv<R: BufRead>(dim: usize, input: R) -> Result<Self, ProfileError> {
        let mut values = Vec::new();
        let mut last_r = 0.0f64;
        for (ln, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if ln == 0 || line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let r: f64 = parts
                .next()
                .ok_or_else(|| ProfileError::Csv(format!("line {ln}: missing r")))?
                .trim()
                .parse()
                .map_err(|e| ProfileError::Csv(format!("line {ln}: {e}")))?;
            let u: f64 = parts
                .next()
                .ok_or_else(|| ProfileError::Csv(format!("line {ln}: missing u")))?
                .trim()
                .parse()
                .map_err(|e| ProfileError::Csv(format!("line {ln}: {e}")))?;
            last_r = r;
            values.push(T::of(u));
        }
        if values.len() < 17 {
            return Err(ProfileError::Csv("too few rows".into()));
        }
        let grid = RadialGrid::new(dim, T::of(last_r), values.len() - 1)
            .map_err(|e| ProfileError::Csv(e.to_string()))?;
        Self::from_values(grid, values)
    }
}
