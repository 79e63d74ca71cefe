//! Ground states by restarted Lanczos with full reorthogonalisation.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::simulator::hamiltonian::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Target residual `‖Hψ - Eψ‖`.
    pub tol: f64,
    /// Matrix-vector products allowed before giving up.
    pub max_iterations: usize,
    /// Krylov vectors kept before a restart.
    pub krylov_dim: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 2000,
            krylov_dim: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Unit-norm real eigenvector, sign fixed so the amplitudes sum to a positive value.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn lowest_eigenpair(h: &Hamiltonian, opts: &LanczosOptions) -> Result<GroundState> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    let s = norm(&start);
    start.iter_mut().for_each(|x| *x /= s);

    let m_max = opts.krylov_dim.max(2).min(n);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut w = vec![0.0; n];
    loop {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        loop {
            let v = basis.last().unwrap();
            h.apply(v, &mut w);
            iterations += 1;
            let a = dot(&w, v);
            alpha.push(a);
            // two passes of classical Gram-Schmidt against every stored vector
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    axpy(-c, q, &mut w);
                }
            }
            let b = norm(&w);
            if basis.len() == m_max || b < 1e-13 || iterations >= opts.max_iterations {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (low, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let theta = eig.eigenvalues[low];
        let y = eig.eigenvectors.column(low);
        let mut x = vec![0.0; n];
        for (k, q) in basis.iter().enumerate() {
            axpy(y[k], q, &mut x);
        }
        let s = norm(&x);
        x.iter_mut().for_each(|v| *v /= s);
        h.apply(&x, &mut w);
        iterations += 1;
        axpy(-theta, &x, &mut w);
        residual = residual.min(norm(&w));
        let r = norm(&w);
        if r < opts.tol {
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok(GroundState {
                energy: theta,
                vector: x,
                residual: r,
                iterations,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
        start = x;
    }
}
