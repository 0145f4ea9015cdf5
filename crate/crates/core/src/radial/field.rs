use crate::error::{Error, Result};

use super::grid::RadialGrid;

/// Radial pair (u, v) sampled on grid nodes, with u_n = v_n = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: f64,
    pub generation: u64,
}

impl FieldPair {
    /// Builds a pair, overwriting the last sample of each field with zero.
    pub fn new(grid: &RadialGrid, mut u: Vec<f64>, mut v: Vec<f64>, lambda: f64) -> Result<Self> {
        grid.check_len(&u)?;
        grid.check_len(&v)?;
        if let Some(x) = u.iter().chain(&v).find(|x| !x.is_finite()) {
            return Err(Error::NumericFault(format!("non-finite field sample {x}")));
        }
        enforce_dirichlet(&mut u);
        enforce_dirichlet(&mut v);
        Ok(FieldPair {
            u,
            v,
            lambda,
            generation: 0,
        })
    }

    /// Both components equal to `f`.
    pub fn symmetric(grid: &RadialGrid, f: Vec<f64>, lambda: f64) -> Result<Self> {
        Self::new(grid, f.clone(), f, lambda)
    }

    pub fn zeros(grid: &RadialGrid, lambda: f64) -> Self {
        FieldPair {
            u: vec![0.0; grid.len()],
            v: vec![0.0; grid.len()],
            lambda,
            generation: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x == 0.0)
    }

    /// Samples `f` at the grid nodes.
    pub fn sample(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        enforce_dirichlet(&mut out);
        out
    }
}

pub(crate) fn enforce_dirichlet(f: &mut [f64]) {
    if let Some(last) = f.last_mut() {
        *last = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::grid::Grading;

    #[test]
    fn dirichlet_is_enforced() {
        let g = RadialGrid::build(4, 1.0, 32, Grading::Uniform).unwrap();
        let p = FieldPair::new(&g, vec![1.0; 33], vec![2.0; 33], 0.0).unwrap();
        assert_eq!(p.u[32], 0.0);
        assert_eq!(p.v[32], 0.0);
        assert_eq!(p.u[31], 1.0);
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = RadialGrid::build(4, 1.0, 32, Grading::Uniform).unwrap();
        assert!(matches!(
            FieldPair::new(&g, vec![1.0; 10], vec![1.0; 33], 0.0),
            Err(Error::ShapeMismatch { .. })
        ));
        let mut bad = vec![1.0; 33];
        bad[3] = f64::NAN;
        assert!(matches!(
            FieldPair::new(&g, bad, vec![1.0; 33], 0.0),
            Err(Error::NumericFault(_))
        ));
    }
}
