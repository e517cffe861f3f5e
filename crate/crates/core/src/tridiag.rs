//! Dense eigensolver for real symmetric tridiagonal matrices.
//!
//! Implicit-shift QL iteration with Wilkinson shift, accumulating the
//! rotations into the eigenvector matrix. At the chain sizes this crate
//! targets (tens to a few hundred sites) this delivers the full decomposition
//! directly from the tridiagonal form; the `charpoly` module provides an
//! independent eigenvalue path for cross-checks.

use crate::chain::Chain;
use crate::error::Error;
use crate::Result;

/// Full eigendecomposition of a chain Hamiltonian.
///
/// Eigenvalues are ascending; `vector(i)` is the orthonormal eigenvector of
/// `eigenvalues()[i]`. The global sign of each eigenvector is fixed by making
/// its largest-magnitude component positive (ties broken by lowest site
/// index), so repeated runs are bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    // vectors[i][mu] = component of eigenvector i on site mu
    vectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vector(&self, state: usize) -> &[f64] {
        &self.vectors[state]
    }

    /// Component `s_{mu,i}` of eigenvector `i` on site `mu`.
    pub fn component(&self, site: usize, state: usize) -> f64 {
        self.vectors[state][site]
    }

    /// Smallest gap between consecutive eigenvalues (`+inf` for n = 1).
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Spread of the spectrum, used to scale degeneracy thresholds.
    pub fn diameter(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1] - self.eigenvalues[0]
    }
}

/// Full eigendecomposition of the chain's tridiagonal Hamiltonian.
pub fn eigh(chain: &Chain) -> Spectrum {
    let n = chain.len();
    let mut d = chain.onsite().to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(chain.couplings());

    // z[j] is the j-th column (eigenvector) being accumulated.
    let mut z: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut col = vec![0.0; n];
            col[j] = 1.0;
            col
        })
        .collect();

    ql_implicit(&mut d, &mut e, &mut z);

    // Sort ascending, carrying eigenvectors along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let mut vectors: Vec<Vec<f64>> = order
        .into_iter()
        .map(|j| std::mem::take(&mut z[j]))
        .collect();

    for v in &mut vectors {
        fix_sign(v);
    }

    Spectrum {
        eigenvalues,
        vectors,
    }
}

/// Per-state residual norms `|| H v_i - lambda_i v_i ||`.
pub fn residuals(chain: &Chain, spectrum: &Spectrum) -> Result<Vec<f64>> {
    let n = chain.len();
    if spectrum.len() != n {
        return Err(Error::DimensionMismatch {
            chain: n,
            spectrum: spectrum.len(),
        });
    }
    let a = chain.onsite();
    let eps = chain.couplings();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let v = spectrum.vector(i);
        let lambda = spectrum.eigenvalues()[i];
        let mut sq = 0.0;
        for mu in 0..n {
            let mut hv = a[mu] * v[mu];
            if mu > 0 {
                hv += eps[mu - 1] * v[mu - 1];
            }
            if mu + 1 < n {
                hv += eps[mu] * v[mu + 1];
            }
            let r = hv - lambda * v[mu];
            sq += r * r;
        }
        out.push(sq.sqrt());
    }
    Ok(out)
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = k;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Implicit QL with Wilkinson shift on (d, e), rotations accumulated into the
/// columns of `z`. `e[n-1]` is scratch. EISPACK tql2 lineage.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) {
    let n = d.len();
    if n <= 1 {
        return;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find the first negligible off-diagonal at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            // Converges in a handful of sweeps for finite input; the cap only
            // guards against NaN poisoning.
            assert!(iter <= 100, "QL iteration failed to converge");

            // Wilkinson shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Recover from underflow: deflate and restart the sweep.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let (left, right) = z.split_at_mut(i + 1);
                let zi = &mut left[i];
                let zi1 = &mut right[0];
                for k in 0..n {
                    f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}
