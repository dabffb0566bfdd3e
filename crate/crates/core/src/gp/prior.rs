use nalgebra::{Cholesky, DMatrix, DVector};

use super::functional::GridFunctional;
use super::kernel::SeKernel;
use crate::error::{Error, Result};
use crate::wavefield::{check_grid, Extrapolation, SampledFunction};

/// Initial diagonal jitter relative to the reference variance.
pub const JITTER_START: f64 = 1e-10;
/// Largest jitter tried before giving up.
pub const JITTER_MAX: f64 = 1e-6;

/// Gaussian-process prior restricted to an emission grid.
///
/// Holds the mean vector `m`, the covariance `K` and a square-root factor `L`
/// with `L L^T = K + jitter I`. For an unconditioned prior `L` is the lower
/// Cholesky factor. Conditioning on exact constraints updates `L` by the
/// corresponding projection instead of refactorising, so `L` is then a
/// general (non-triangular) square root whose realizations satisfy the
/// constraint to round-off.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProcessPrior {
    grid: Vec<f64>,
    mean: DVector<f64>,
    gram: DMatrix<f64>,
    factor: DMatrix<f64>,
    jitter: f64,
    scale: f64,
}

/// Cholesky factor of `gram + jitter I`, escalating the jitter by 10x from
/// `JITTER_START * scale` up to `JITTER_MAX * scale`.
fn factorize(gram: &DMatrix<f64>, scale: f64) -> Result<(DMatrix<f64>, f64)> {
    let n = gram.nrows();
    let mut rel = JITTER_START;
    loop {
        let jitter = rel * scale;
        let shifted = gram + DMatrix::identity(n, n) * jitter;
        if let Some(ch) = Cholesky::new(shifted) {
            return Ok((ch.l(), jitter));
        }
        if rel >= JITTER_MAX * (1.0 - 1e-9) {
            return Err(Error::IllConditionedKernel { jitter });
        }
        rel *= 10.0;
    }
}

impl GaussianProcessPrior {
    /// Assembles the Gram matrix of `kernel` on `grid` and factorizes it once.
    pub fn build(grid: Vec<f64>, mean_fn: impl Fn(f64) -> f64, kernel: &SeKernel) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("prior grid is empty".into()));
        }
        check_grid(&grid)?;
        let n = grid.len();
        let mean = DVector::from_iterator(n, grid.iter().map(|&t| mean_fn(t)));
        let gram = DMatrix::from_fn(n, n, |i, j| kernel.eval(grid[i], grid[j]));
        Self::from_moments(grid, mean, gram, kernel.variance())
    }

    /// Prior with explicit mean and covariance; `scale` is the reference
    /// variance used for jitter and tolerances.
    pub fn from_moments(
        grid: Vec<f64>,
        mean: DVector<f64>,
        gram: DMatrix<f64>,
        scale: f64,
    ) -> Result<Self> {
        let n = grid.len();
        if mean.len() != n || gram.nrows() != n || gram.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mean.len(),
            });
        }
        let (factor, jitter) = factorize(&gram, scale)?;
        Ok(Self {
            grid,
            mean,
            gram,
            factor,
            jitter,
            scale,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Marginal variances (diagonal of the covariance).
    pub fn variance(&self) -> Vec<f64> {
        self.gram.diagonal().iter().copied().collect()
    }

    /// `m + L s`.
    pub fn realize(&self, s: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.realize_into(s, &mut out)?;
        Ok(out)
    }

    pub fn realize_into(&self, s: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.len();
        if s.len() != n || out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len().min(out.len()),
            });
        }
        out.copy_from_slice(self.mean.as_slice());
        // column-major walk over the factor
        for (j, &sj) in s.iter().enumerate() {
            if sj == 0.0 {
                continue;
            }
            let col = self.factor.column(j);
            for (o, l) in out.iter_mut().zip(col.iter()) {
                *o += l * sj;
            }
        }
        Ok(())
    }

    pub fn realize_function(&self, s: &[f64], extrapolation: Extrapolation) -> Result<SampledFunction> {
        SampledFunction::new(self.grid.clone(), self.realize(s)?, extrapolation)
    }

    /// Interpolation weights (rows of `A`) expressing `f(t_c)` through grid
    /// values, exact selection when `t_c` is a grid node.
    fn point_weights(&self, points: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.len();
        let (lo, hi) = (self.grid[0], self.grid[n - 1]);
        let mut a = DMatrix::zeros(points.len(), n);
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        for (r, &t) in points.iter().enumerate() {
            if !(t >= lo - tol && t <= hi + tol) {
                return Err(Error::InvalidArgument(format!(
                    "conditioning point {t} outside the prior grid [{lo}, {hi}]"
                )));
            }
            let k = self.grid.partition_point(|&g| g < t - tol);
            if k < n && (self.grid[k] - t).abs() <= tol {
                a[(r, k)] = 1.0;
            } else {
                let w = (t - self.grid[k - 1]) / (self.grid[k] - self.grid[k - 1]);
                a[(r, k - 1)] = 1.0 - w;
                a[(r, k)] = w;
            }
        }
        Ok(a)
    }

    /// Exact conditioning on `A f = targets` by projecting the square root:
    /// with `C = L L^T`, `G = C A^T (A C A^T)^-1`,
    /// `m' = m + G (targets - A m)` and `L' = L - G A L`.
    fn condition_exact(&self, a: &DMatrix<f64>, targets: &DVector<f64>) -> Result<Self> {
        let lt_at = self.factor.transpose() * a.transpose();
        let c_at = &self.factor * &lt_at;
        let s = a * &c_at;
        let ch = Cholesky::new(s.clone()).ok_or_else(|| {
            Error::Conditioning(
                "constraint covariance is singular; use a positive observation noise".into(),
            )
        })?;
        let gain = ch.solve(&c_at.transpose()).transpose();
        let mean = &self.mean + &gain * (targets - a * &self.mean);
        let factor = &self.factor - &gain * lt_at.transpose();
        let gram = &self.gram - &gain * c_at.transpose();
        Ok(Self {
            grid: self.grid.clone(),
            mean,
            gram,
            factor,
            jitter: self.jitter,
            scale: self.scale,
        })
    }

    /// Conditions on observed values `f(t_c) = f_c` with observation noise
    /// `sigma`.
    ///
    /// With `sigma = 0` realizations interpolate the observations exactly.
    /// For `sigma > 0` the conditioned moments
    /// `m + k (K_c + sigma^2 I)^-1 (f_c - m_c)` and
    /// `K - k (K_c + sigma^2 I)^-1 k^T` are refactorized.
    pub fn condition_on_points(&self, points: &[f64], values: &[f64], sigma: f64) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: values.len(),
            });
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")));
        }
        if points.is_empty() {
            return Ok(self.clone());
        }
        let a = self.point_weights(points)?;
        let targets = DVector::from_column_slice(values);
        if sigma == 0.0 {
            return self.condition_exact(&a, &targets);
        }
        let k_at = &self.gram * a.transpose();
        let n_c = points.len();
        let s = &a * &k_at + DMatrix::identity(n_c, n_c) * (sigma * sigma);
        let ch = Cholesky::new(s).ok_or_else(|| {
            Error::Conditioning("K_c + sigma^2 I is not positive definite".into())
        })?;
        let gain = ch.solve(&k_at.transpose()).transpose();
        let mean = &self.mean + &gain * (targets - &a * &self.mean);
        let mut gram = &self.gram - &gain * k_at.transpose();
        gram = (&gram + gram.transpose()) * 0.5;
        Self::from_moments(self.grid.clone(), mean, gram, self.scale)
    }

    /// Conditions on a linear functional of the grid values, `L[f] = target`.
    ///
    /// The conditioned moments are
    /// `m + L[k(., t)] / L^2[k] (target - L[m])` and
    /// `k(t, t') - L[k(., t)] L[k(., t')] / L^2[k]`; the square root is
    /// projected so that every realization satisfies the constraint.
    pub fn condition_on_functional(&self, functional: &GridFunctional, target: f64) -> Result<Self> {
        let w = functional.weights();
        if w.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: w.len(),
            });
        }
        let ev = functional.evaluate_on(self)?;
        if ev.l2_of_k <= 1e-12 * self.scale {
            return Err(Error::DegenerateFunctional(ev.l2_of_k));
        }
        let a = DMatrix::from_row_slice(1, w.len(), w);
        self.condition_exact(&a, &DVector::from_element(1, target))
    }

    /// Conditions on a functional supplied in evaluated form: `l_of_k[i]` is
    /// `L[k(., t_i)]` on the grid, `l2_of_k` is `L^2[k]` and `l_of_m` is
    /// `L[m]`. The conditioned covariance is refactorized.
    pub fn condition_on_functional_evaluated(
        &self,
        l_of_k: &[f64],
        l2_of_k: f64,
        l_of_m: f64,
        target: f64,
    ) -> Result<Self> {
        if l_of_k.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: l_of_k.len(),
            });
        }
        if !(l2_of_k > 1e-12 * self.scale) {
            return Err(Error::DegenerateFunctional(l2_of_k));
        }
        let g = DVector::from_column_slice(l_of_k);
        let mean = &self.mean + &g * ((target - l_of_m) / l2_of_k);
        let gram = &self.gram - (&g * g.transpose()) / l2_of_k;
        Self::from_moments(self.grid.clone(), mean, gram, self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::uniform_grid;
    use approx::assert_relative_eq;

    fn prior(m: usize, kappa: f64, l: f64) -> GaussianProcessPrior {
        let k = SeKernel::new(kappa, l).unwrap();
        GaussianProcessPrior::build(uniform_grid(0.0, 15.0, m), |_| 0.0, &k).unwrap()
    }

    fn frob_rel(p: &GaussianProcessPrior) -> f64 {
        let n = p.len();
        let recon = p.factor() * p.factor().transpose();
        let target = p.gram() + DMatrix::identity(n, n) * p.jitter();
        (recon - &target).norm() / target.norm()
    }

    #[test]
    fn single_point_prior() {
        let k = SeKernel::new(2.0, 1.0).unwrap();
        let p = GaussianProcessPrior::build(vec![0.5], |_| 0.0, &k).unwrap();
        assert_eq!(p.gram()[(0, 0)], 4.0);
        assert_relative_eq!(p.factor()[(0, 0)], 2.0, max_relative = 1e-9);
        assert_relative_eq!(p.realize(&[1.0]).unwrap()[0], 2.0, max_relative = 1e-9);
    }

    #[test]
    fn factor_reproduces_gram() {
        for l in [2.0, 4.0, 15.0] {
            let p = prior(100, 1.0, l);
            assert!(frob_rel(&p) < 1e-10, "l = {l}: {}", frob_rel(&p));
            assert!(p.jitter() <= JITTER_MAX);
        }
    }

    #[test]
    fn gram_is_psd_up_to_roundoff() {
        let p = prior(100, 1.0, 15.0);
        let eig = p.gram().clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-8));
    }

    #[test]
    fn zero_whitened_vector_gives_mean() {
        let k = SeKernel::new(1.0, 3.0).unwrap();
        let p = GaussianProcessPrior::build(uniform_grid(0.0, 15.0, 20), |t| 0.1 * t, &k).unwrap();
        let f = p.realize(&vec![0.0; 20]).unwrap();
        assert_eq!(f.as_slice(), p.mean().as_slice());
    }

    #[test]
    fn realize_is_affine() {
        let p = prior(30, 1.0, 4.0);
        let s1: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let s2: Vec<f64> = (0..30).map(|i| (i as f64 * 1.1).cos()).collect();
        let sum: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a + b).collect();
        let f0 = p.realize(&vec![0.0; 30]).unwrap();
        let f1 = p.realize(&s1).unwrap();
        let f2 = p.realize(&s2).unwrap();
        let f12 = p.realize(&sum).unwrap();
        for i in 0..30 {
            assert_relative_eq!(f12[i] - f0[i], (f1[i] - f0[i]) + (f2[i] - f0[i]), epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = prior(10, 1.0, 4.0);
        assert!(p.realize(&[0.0; 9]).is_err());
    }

    #[test]
    fn exact_point_conditioning_interpolates() {
        let p = prior(50, 1.0, 4.0);
        let t_c = [p.grid()[10], p.grid()[30]];
        let c = p.condition_on_points(&t_c, &[0.7, -0.2], 0.0).unwrap();
        assert!(c.variance()[10].abs() < 1e-9);
        assert!(c.variance()[30].abs() < 1e-9);
        let s: Vec<f64> = (0..50).map(|i| ((i * 7) as f64).sin() * 2.0).collect();
        let f = c.realize(&s).unwrap();
        assert!((f[10] - 0.7).abs() < 1e-8);
        assert!((f[30] + 0.2).abs() < 1e-8);
        assert!(frob_rel(&c) < 1e-10);
        for (a, b) in c.variance().iter().zip(p.variance()) {
            assert!(*a <= b + 1e-12);
        }
    }

    #[test]
    fn conditioning_on_mean_keeps_mean() {
        let p = prior(40, 1.0, 4.0);
        let t_c = p.grid()[17];
        let c = p.condition_on_points(&[t_c], &[0.0], 0.0).unwrap();
        assert!(c.mean().iter().all(|m| m.abs() < 1e-14));
        assert!(c.variance()[17].abs() < 1e-9);
    }

    #[test]
    fn single_grid_point_condition() {
        let k = SeKernel::new(1.0, 1.0).unwrap();
        let p = GaussianProcessPrior::build(vec![2.0], |_| 0.0, &k).unwrap();
        let c = p.condition_on_points(&[2.0], &[1.5], 0.0).unwrap();
        assert_relative_eq!(c.mean()[0], 1.5, max_relative = 1e-9);
        assert!(c.variance()[0].abs() < 1e-9);
    }

    #[test]
    fn noisy_conditioning_matches_formula() {
        let k = SeKernel::new(1.0, 2.0).unwrap();
        let grid = uniform_grid(0.0, 10.0, 11);
        let p = GaussianProcessPrior::build(grid.clone(), |_| 0.0, &k).unwrap();
        let sigma = 0.3;
        let c = p.condition_on_points(&[4.0], &[1.0], sigma).unwrap();
        let denom = 1.0 + sigma * sigma;
        for (i, &t) in grid.iter().enumerate() {
            assert_relative_eq!(c.mean()[i], k.eval(t, 4.0) / denom, epsilon = 1e-12);
            let var = 1.0 - k.eval(t, 4.0).powi(2) / denom;
            assert_relative_eq!(c.variance()[i], var, epsilon = 1e-12);
        }
    }

    #[test]
    fn off_grid_point_uses_interpolation() {
        let p = prior(16, 1.0, 3.0);
        let t = 0.5 * (p.grid()[4] + p.grid()[5]);
        let c = p.condition_on_points(&[t], &[1.0], 0.0).unwrap();
        let s: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
        let f = c.realize_function(&s, Extrapolation::Clamp).unwrap();
        assert!((f.eval(t) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn point_outside_grid_rejected() {
        let p = prior(16, 1.0, 3.0);
        assert!(p.condition_on_points(&[16.0], &[1.0], 0.0).is_err());
        assert!(p.condition_on_points(&[1.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn duplicate_exact_points_are_singular() {
        let p = prior(16, 1.0, 3.0);
        let t = p.grid()[3];
        let err = p.condition_on_points(&[t, t], &[1.0, 1.0], 0.0);
        assert!(matches!(err, Err(Error::Conditioning(_))));
        assert!(p.condition_on_points(&[t, t], &[1.0, 1.0], 0.1).is_ok());
    }
}
