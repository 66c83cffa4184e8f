use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Complex samples of a function on a [`Grid`], with a lazily cached spectrum.
///
/// Fields are immutable values; every operation returns a new field.
#[derive(Debug)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for ComplexField {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            grid: self.grid.clone(),
            values: self.values.clone(),
            spectrum,
        }
    }
}

impl PartialEq for ComplexField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ComplexField {
    pub fn new(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.nodes().iter().map(|&x| f(x)).collect())
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Builds a field from unnormalized DFT coefficients.
    pub fn from_spectrum(grid: &Grid, mut spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: spectrum.len(),
            });
        }
        let cached = spectrum.clone();
        grid.inverse(&mut spectrum);
        let field = Self::new(grid, spectrum)?;
        let _ = field.spectrum.set(cached);
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Unnormalized DFT of the samples (computed once, then cached).
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut buf = self.values.clone();
            self.grid.forward(&mut buf);
            buf
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(&self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    /// Pointwise `f(x_j, u_j)`.
    pub fn map_with_nodes(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        Self::new(
            &self.grid,
            self.grid
                .nodes()
                .iter()
                .zip(&self.values)
                .map(|(&x, &z)| f(x, z))
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&z| z * c).collect(),
            spectrum: OnceLock::new(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Self::new(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| a * u + b * v)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    /// Rectangle-rule `‖u‖₂`.
    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Rectangle-rule `‖u‖₂²`.
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum();
        Ok((self.grid.dx() * s).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::new(20.0, 256).unwrap()
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = grid();
        assert!(matches!(
            ComplexField::new(&g, vec![Complex64::new(0.0, 0.0); 3]),
            Err(Error::LengthMismatch { .. })
        ));
        let mut v = vec![Complex64::new(0.0, 0.0); g.n()];
        v[7].im = f64::INFINITY;
        assert_eq!(ComplexField::new(&g, v), Err(Error::NonFinite("field samples")));
    }

    #[test]
    fn combining_fields_on_different_grids_fails() {
        let a = ComplexField::zeros(&grid());
        let b = ComplexField::zeros(&Grid::new(21.0, 256).unwrap());
        assert!(matches!(a.sub(&b), Err(Error::GridMismatch { .. })));
    }

    proptest! {
        #[test]
        fn spectral_round_trip(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256)) {
            let g = grid();
            let vals: Vec<_> = seed.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let f = ComplexField::new(&g, vals).unwrap();
            let back = ComplexField::from_spectrum(&g, f.spectrum().to_vec()).unwrap();
            let err = f.l2_distance(&back).unwrap();
            prop_assert!(err <= 1e-12 * f.l2_norm().max(1e-300));
        }
    }
}
