use crate::error::{Error, Result};

/// Behaviour of a [`SampledFunction`] outside its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    /// Zero outside the grid (source intensities).
    Zero,
    /// Hold the end values (trajectory coordinates).
    Clamp,
}

/// A scalar function of time stored as values on a strictly increasing grid,
/// linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    extrapolation: Extrapolation,
}

/// `n` equispaced points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            let mut g: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
            g[n - 1] = end;
            g
        }
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("grid contains non-finite values".into()));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "grid not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, extrapolation: Extrapolation) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "sampled function needs at least 2 grid points, got {}",
                grid.len()
            )));
        }
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        check_grid(&grid)?;
        Ok(Self {
            grid,
            values,
            extrapolation,
        })
    }

    pub fn from_fn(
        grid: Vec<f64>,
        f: impl Fn(f64) -> f64,
        extrapolation: Extrapolation,
    ) -> Result<Self> {
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values, extrapolation)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Index `k` of the segment `[grid[k], grid[k+1]]` containing `t`, for
    /// `t` inside the grid.
    fn segment(&self, t: f64) -> usize {
        let idx = self.grid.partition_point(|&g| g <= t);
        idx.saturating_sub(1).min(self.grid.len() - 2)
    }

    fn segment_slope(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / (self.grid[k + 1] - self.grid[k])
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.start() || t > self.end() {
            return match self.extrapolation {
                Extrapolation::Zero => 0.0,
                Extrapolation::Clamp if t < self.start() => self.values[0],
                Extrapolation::Clamp => self.values[self.values.len() - 1],
            };
        }
        let k = self.segment(t);
        let w = (t - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    /// Time derivative of the interpolant.
    ///
    /// Constant on each open segment. At an interior grid node the two
    /// adjacent segment slopes are averaged, at the end nodes the one-sided
    /// slope is used; outside the grid the derivative is zero.
    pub fn slope(&self, t: f64) -> f64 {
        if t < self.start() || t > self.end() {
            return 0.0;
        }
        let k = self.segment(t);
        if t == self.grid[k] && k > 0 {
            return 0.5 * (self.segment_slope(k - 1) + self.segment_slope(k));
        }
        self.segment_slope(k)
    }

    /// Slopes at every grid node, by the same rule as [`slope`](Self::slope).
    pub fn node_slopes(&self) -> Vec<f64> {
        let m = self.grid.len();
        let seg: Vec<f64> = (0..m - 1).map(|k| self.segment_slope(k)).collect();
        (0..m)
            .map(|i| match i {
                0 => seg[0],
                i if i == m - 1 => seg[m - 2],
                i => 0.5 * (seg[i - 1] + seg[i]),
            })
            .collect()
    }

    /// Largest absolute segment slope.
    pub fn max_abs_slope(&self) -> f64 {
        (0..self.grid.len() - 1)
            .map(|k| self.segment_slope(k).abs())
            .fold(0.0, f64::max)
    }
}
