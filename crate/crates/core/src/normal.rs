//! Sources of standard normal draws for resampling.

use rand::Rng;
use rand_distr::StandardNormal;

pub trait NormalSource {
    fn next_normal(&mut self) -> f64;
}

/// Draws from an injected random generator.
#[derive(Clone, Debug)]
pub struct RngNormals<R>(pub R);

impl<R: Rng> NormalSource for RngNormals<R> {
    fn next_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }
}

/// A pre-generated list of standard normal samples, read cyclically.
#[derive(Clone, Debug)]
pub struct NormalTable {
    values: Vec<f64>,
    cursor: usize,
}

impl NormalTable {
    /// # Panics
    /// If `values` is empty.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "normal table must not be empty");
        NormalTable { values, cursor: 0 }
    }

    pub fn generate<R: Rng>(len: usize, rng: &mut R) -> Self {
        Self::new((0..len.max(1)).map(|_| rng.sample(StandardNormal)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl NormalSource for NormalTable {
    fn next_normal(&mut self) -> f64 {
        let v = self.values[self.cursor];
        self.cursor = (self.cursor + 1) % self.values.len();
        v
    }
}

impl<T: NormalSource + ?Sized> NormalSource for &mut T {
    fn next_normal(&mut self) -> f64 {
        (**self).next_normal()
    }
}
