//! Periodic grids, transforms and Fourier multipliers on the torus `[0, 2π)²`.
//!
//! Coefficients are stored in FFT order in an `n × n` array indexed
//! `[[i1, i2]]`, where axis 0 carries the `x` wavenumber `k₁` and axis 1 the
//! `y` wavenumber `k₂`. Index `i` maps to `k = i` for `i < n/2` and `k = i - n`
//! otherwise, so every wavenumber lies in `[-n/2, n/2)`. `coeff(k)` is the
//! coefficient of `e^{i k·x}`; physical samples live at `x_i = 2π i / n`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Axis, Zip};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative tolerance on the zero mode for operations that need mean-zero input.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// Largest imaginary residue (relative to the real part) discarded by
/// [`inverse_transform`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Uniform `n × n` grid on the `2π`-periodic square.
///
/// Holds the FFT plans for its size; clones share them. Plans from `rustfft`
/// are `Send + Sync` and take caller-provided scratch, so a grid may be used
/// from several threads at once.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Dimension(format!(
                "grid size must be even and at least 8, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    /// Points per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Side length of the domain.
    pub fn length(&self) -> f64 {
        2.0 * PI
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Physical coordinate of sample index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Signed wavenumber stored at array index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Array index holding wavenumber `k`, if `k ∈ [-n/2, n/2)`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = self.n as i64 / 2;
        if (-half..half).contains(&k) {
            Some(k.rem_euclid(self.n as i64) as usize)
        } else {
            None
        }
    }

    /// The unpaired Nyquist wavenumber `-n/2`.
    pub fn nyquist(&self) -> i64 {
        -(self.n as i64) / 2
    }

    /// Largest `max(|k₁|, |k₂|)` kept by [`dealias`].
    pub fn dealias_cutoff(&self) -> i64 {
        self.n as i64 / 3
    }

    /// Physical samples of `f(x, y)` indexed `[[ix, iy]]`.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(ix, iy)| {
            f(self.coordinate(ix), self.coordinate(iy))
        })
    }

    fn fft2(&self, data: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // Axis 1 is contiguous in standard layout: transform every row in one call.
        {
            let buf = data
                .as_slice_mut()
                .expect("coefficient arrays are kept in standard layout");
            plan.process_with_scratch(buf, &mut scratch);
        }
        let mut column = vec![Complex64::default(); n];
        for mut lane in data.lanes_mut(Axis(0)) {
            for (dst, src) in column.iter_mut().zip(lane.iter()) {
                *dst = *src;
            }
            plan.process_with_scratch(&mut column, &mut scratch);
            for (dst, src) in lane.iter_mut().zip(column.iter()) {
                *dst = *src;
            }
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

/// Fourier coefficients of a real scalar field on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array2<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: Array2::zeros((grid.n, grid.n)),
        }
    }

    /// Wraps a coefficient array, checking its shape and finiteness.
    pub fn from_coeffs(grid: &Grid, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.n, grid.n) {
            return Err(Error::Dimension(format!(
                "coefficient array has shape {:?}, grid expects ({n}, {n})",
                coeffs.dim(),
                n = grid.n
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite spectral coefficient".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs: coeffs.as_standard_layout().into_owned(),
        })
    }

    /// Builds a field from a list of `((k₁, k₂), coefficient)` pairs.
    /// Repeated wavenumbers accumulate.
    pub fn from_modes(grid: &Grid, modes: &[((i64, i64), Complex64)]) -> Result<Self> {
        let mut field = Self::zeros(grid);
        for &((k1, k2), c) in modes {
            let (i1, i2) = match (grid.index_of(k1), grid.index_of(k2)) {
                (Some(i1), Some(i2)) => (i1, i2),
                _ => {
                    return Err(Error::Dimension(format!(
                        "mode ({k1}, {k2}) outside [-{h}, {h})",
                        h = grid.n / 2
                    )))
                }
            };
            field.coeffs[[i1, i2]] += c;
        }
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    /// Coefficient of `e^{i(k₁x + k₂y)}`; zero for wavenumbers off the grid.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        match (self.grid.index_of(k1), self.grid.index_of(k2)) {
            (Some(i1), Some(i2)) => self.coeffs[[i1, i2]],
            _ => Complex64::default(),
        }
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[[0, 0]]
    }

    /// `sqrt(Σ |coeff|²)`, the plain ℓ² size of the coefficient array.
    pub fn coefficient_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Zero-mode magnitude relative to the coefficient norm (0 for the zero field).
    pub fn relative_mean(&self) -> f64 {
        let norm = self.coefficient_norm();
        if norm == 0.0 {
            0.0
        } else {
            self.zero_mode().norm() / norm
        }
    }

    pub fn ensure_mean_zero(&self) -> Result<()> {
        let rel = self.relative_mean();
        if rel > MEAN_ZERO_TOL {
            Err(Error::MeanZero { zero_mode: rel })
        } else {
            Ok(())
        }
    }

    /// Largest `max(|k₁|, |k₂|)` over coefficients above round-off
    /// (`|c| > 1e-13·max|c|`), or 0 for the zero field.
    pub fn max_mode(&self) -> i64 {
        let largest = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let floor = 1e-13 * largest;
        let mut max = 0;
        for ((i1, i2), c) in self.coeffs.indexed_iter() {
            if c.norm() > floor {
                let k = self.grid.wavenumber(i1).abs().max(self.grid.wavenumber(i2).abs());
                max = max.max(k);
            }
        }
        max
    }

    /// Multiplies every coefficient by `symbol(k₁, k₂)`.
    pub fn apply_symbol(&self, symbol: impl Fn(i64, i64) -> Complex64) -> Self {
        let grid = &self.grid;
        let mut coeffs = self.coeffs.clone();
        for ((i1, i2), c) in coeffs.indexed_iter_mut() {
            *c *= symbol(grid.wavenumber(i1), grid.wavenumber(i2));
        }
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Multiplies every coefficient by the real `symbol(k₁, k₂)`.
    pub fn apply_real_symbol(&self, symbol: impl Fn(i64, i64) -> f64) -> Self {
        self.apply_symbol(|k1, k2| Complex64::new(symbol(k1, k2), 0.0))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.mapv(|c| c * a),
        }
    }

    /// `self + a·other`.
    pub fn add_scaled(&self, a: f64, other: &SpectralField) -> Result<Self> {
        self.check_grid(other)?;
        let mut coeffs = self.coeffs.clone();
        Zip::from(&mut coeffs)
            .and(&other.coeffs)
            .for_each(|c, &o| *c += o * a);
        Ok(Self {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.add_scaled(1.0, other)
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            Err(Error::GridMismatch {
                left: self.grid.n,
                right: other.grid.n,
            })
        } else {
            Ok(())
        }
    }

    /// Pointwise product formed in physical space, then dealiased.
    pub fn dealiased_product(&self, other: &SpectralField) -> Result<Self> {
        self.check_grid(other)?;
        let a = inverse_transform(self)?;
        let b = inverse_transform(other)?;
        let product = forward_transform(&(a * b), &self.grid)?;
        Ok(dealias(&product))
    }
}

/// Divergence-free velocity `u = (u_x, u_y)`.
#[derive(Clone, Debug)]
pub struct VelocityField {
    pub u_x: SpectralField,
    pub u_y: SpectralField,
}

impl VelocityField {
    /// Largest spectral divergence `|i k₁ û_x + i k₂ û_y|` over all modes.
    pub fn divergence_residual(&self) -> f64 {
        let grid = self.u_x.grid();
        let mut max: f64 = 0.0;
        Zip::indexed(self.u_x.coeffs())
            .and(self.u_y.coeffs())
            .for_each(|(i1, i2), &ux, &uy| {
                let k1 = grid.wavenumber(i1) as f64;
                let k2 = grid.wavenumber(i2) as f64;
                let div = Complex64::i() * (ux * k1 + uy * k2);
                max = max.max(div.norm());
            });
        max
    }

    /// `max |u|` over the physical grid.
    pub fn max_speed(&self) -> Result<f64> {
        let ux = inverse_transform(&self.u_x)?;
        let uy = inverse_transform(&self.u_y)?;
        Ok(ux
            .iter()
            .zip(uy.iter())
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max))
    }

    /// `u·∇f` for a field given by its gradient, dealiased.
    pub fn dot(&self, grad: &(SpectralField, SpectralField)) -> Result<SpectralField> {
        let grid = self.u_x.grid();
        let ux = inverse_transform(&self.u_x)?;
        let uy = inverse_transform(&self.u_y)?;
        let gx = inverse_transform(&grad.0)?;
        let gy = inverse_transform(&grad.1)?;
        let product = ux * gx + uy * gy;
        Ok(dealias(&forward_transform(&product, grid)?))
    }
}

/// Coefficients of the samples `s[[ix, iy]] = f(x_ix, y_iy)`.
///
/// The zero mode is the sample mean.
pub fn forward_transform(samples: &Array2<f64>, grid: &Grid) -> Result<SpectralField> {
    if samples.dim() != (grid.n, grid.n) {
        return Err(Error::Dimension(format!(
            "sample array has shape {:?}, grid expects ({n}, {n})",
            samples.dim(),
            n = grid.n
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let scale = 1.0 / (grid.n * grid.n) as f64;
    let mut data = samples.mapv(|v| Complex64::new(v, 0.0));
    grid.fft2(&mut data, &grid.forward);
    data.mapv_inplace(|c| c * scale);
    Ok(SpectralField {
        grid: grid.clone(),
        coeffs: data,
    })
}

/// Physical samples of a real field.
///
/// Fails when the imaginary residue exceeds [`HERMITIAN_TOL`] relative to the
/// real part, i.e. when the coefficients are not Hermitian-symmetric.
pub fn inverse_transform(f: &SpectralField) -> Result<Array2<f64>> {
    let grid = &f.grid;
    let mut data = f.coeffs.clone();
    grid.fft2(&mut data, &grid.inverse);
    let max_re = data.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    let max_im = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if max_im > HERMITIAN_TOL * max_re.max(f64::MIN_POSITIVE) && max_im > 0.0 {
        let residue = if max_re > 0.0 { max_im / max_re } else { f64::INFINITY };
        return Err(Error::Symmetry {
            residue,
            tolerance: HERMITIAN_TOL,
        });
    }
    Ok(data.mapv(|c| c.re))
}

fn magnitude(k1: i64, k2: i64) -> f64 {
    ((k1 * k1 + k2 * k2) as f64).sqrt()
}

/// `Λ^s f`: multiplies `coeff(k)` by `|k|^s`.
///
/// The zero mode maps to zero for any nonzero exponent and is kept for
/// `s = 0`. Negative exponents require mean-zero input.
pub fn fractional_laplacian(f: &SpectralField, exponent: f64) -> Result<SpectralField> {
    if !(-2.0..=2.0).contains(&exponent) {
        return Err(Error::Domain(format!(
            "fractional Laplacian exponent {exponent} outside [-2, 2]"
        )));
    }
    if exponent < 0.0 {
        f.ensure_mean_zero()?;
    }
    Ok(f.apply_real_symbol(|k1, k2| laplacian_symbol(k1, k2, exponent)))
}

/// Symbol `|k|^s` of `Λ^s`, with the zero-mode convention of [`fractional_laplacian`].
pub fn laplacian_symbol(k1: i64, k2: i64, exponent: f64) -> f64 {
    if k1 == 0 && k2 == 0 {
        if exponent == 0.0 {
            1.0
        } else {
            0.0
        }
    } else if exponent == 0.0 {
        1.0
    } else {
        magnitude(k1, k2).powf(exponent)
    }
}

/// Symbol `i k` of `∂`. Zero at the unpaired Nyquist wavenumber, where `i k`
/// would break the Hermitian symmetry of a real field.
fn derivative_symbol(grid: &Grid, k: i64) -> Complex64 {
    if k == grid.nyquist() {
        Complex64::default()
    } else {
        Complex64::new(0.0, k as f64)
    }
}

/// `(∂_x f, ∂_y f)`.
pub fn gradient(f: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = f.grid.clone();
    (
        f.apply_symbol(|k1, _| derivative_symbol(&grid, k1)),
        f.apply_symbol(|_, k2| derivative_symbol(&grid, k2)),
    )
}

/// `u = curl Λ^{-β} θ` with `curl φ = (-∂_y φ, ∂_x φ)`.
pub fn velocity(theta: &SpectralField, beta: f64) -> Result<VelocityField> {
    let stream = fractional_laplacian(theta, -beta)?;
    let (dx, dy) = gradient(&stream);
    Ok(VelocityField {
        u_x: dy.scaled(-1.0),
        u_y: dx,
    })
}

/// Two-thirds rule: zeroes every mode with `max(|k₁|, |k₂|) > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let n = f.grid.n as i64;
    f.apply_real_symbol(|k1, k2| {
        if 3 * k1.abs().max(k2.abs()) > n {
            0.0
        } else {
            1.0
        }
    })
}

/// `H^s` norm with multiplier `(1 + |k|²)^{s/2}`, including the `(2π)²` area factor.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    weighted_norm(f, |k1, k2| (1.0 + (k1 * k1 + k2 * k2) as f64).powf(s))
}

/// `H^k` norm as the sum of `L²` norms of all partial derivatives of order `≤ k`.
pub fn derivative_sum_norm(f: &SpectralField, order: u32) -> f64 {
    weighted_norm(f, |k1, k2| {
        let (a, b) = ((k1 * k1) as f64, (k2 * k2) as f64);
        let mut weight = 0.0;
        for l1 in 0..=order {
            for l2 in 0..=(order - l1) {
                weight += a.powi(l1 as i32) * b.powi(l2 as i32);
            }
        }
        weight
    })
}

fn weighted_norm(f: &SpectralField, weight: impl Fn(i64, i64) -> f64) -> f64 {
    let grid = &f.grid;
    let mut sum = 0.0;
    for ((i1, i2), c) in f.coeffs.indexed_iter() {
        let sq = c.norm_sqr();
        if sq != 0.0 {
            sum += weight(grid.wavenumber(i1), grid.wavenumber(i2)) * sq;
        }
    }
    (sum * grid.length() * grid.length()).sqrt()
}
