//! Uniform periodic grid on `[-L/2, L/2)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest node count accepted by [`Grid::new`].
pub const MIN_NODES: usize = 16;

/// Periodic grid standing in for the real line.
///
/// Cheap to clone: nodes, frequencies and FFT plans are shared. The plans are
/// immutable and every transform allocates its own scratch, so a grid can be
/// used from many threads at once.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<Inner>,
}

struct Inner {
    length: f64,
    n: usize,
    dx: f64,
    nodes: Vec<f64>,
    freqs: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if n < MIN_NODES || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "node count must be a power of two >= {MIN_NODES}, got {n}"
            )));
        }
        let dx = length / n as f64;
        let nodes = (0..n).map(|j| -0.5 * length + j as f64 * dx).collect();
        let base = 2.0 * std::f64::consts::PI / length;
        let freqs = (0..n).map(|j| base * alias(j, n) as f64).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(Inner {
                length,
                n,
                dx,
                nodes,
                freqs,
                forward,
                inverse,
            }),
        })
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn dx(&self) -> f64 {
        self.inner.dx
    }

    /// Nodes `x_j = -L/2 + j dx`.
    pub fn nodes(&self) -> &[f64] {
        &self.inner.nodes
    }

    /// Angular frequencies `ξ_k = 2π k̃ / L` in FFT storage order.
    pub fn freqs(&self) -> &[f64] {
        &self.inner.freqs
    }

    /// Signed integer alias `k̃ ∈ {-n/2, …, n/2 - 1}` of storage index `k`.
    pub fn alias(&self, k: usize) -> i64 {
        alias(k, self.inner.n)
    }

    /// Storage index of the Nyquist mode.
    pub fn nyquist(&self) -> usize {
        self.inner.n / 2
    }

    /// Largest resolved |ξ|.
    pub fn max_freq(&self) -> f64 {
        std::f64::consts::PI * self.inner.n as f64 / self.inner.length
    }

    /// Unnormalized forward DFT, in place.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.inner.forward.process(buf);
    }

    /// Inverse DFT including the `1/n` normalization, in place.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inner.inverse.process(buf);
        let scale = 1.0 / self.inner.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }

    /// Storage indices of modes removed by the 2/3 rule (`|k̃| > n/3`).
    pub fn is_dealiased_out(&self, k: usize) -> bool {
        3 * alias(k, self.inner.n).unsigned_abs() as usize > self.inner.n
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length == other.inner.length)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_length: self.length(),
                left_n: self.n(),
                right_length: other.length(),
                right_n: other.n(),
            })
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.inner.length)
            .field("n", &self.inner.n)
            .finish()
    }
}

fn alias(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
