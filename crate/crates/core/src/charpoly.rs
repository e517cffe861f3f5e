//! Characteristic-polynomial machinery for chain Hamiltonians.
//!
//! All quantities here are built from the three-term recursion for principal
//! minors of `lambda*I - H`,
//!
//! ```text
//! chi_j(lambda) = (lambda - a_j) chi_{j-1}(lambda) - eps_{j-1,j}^2 chi_{j-2}(lambda)
//! ```
//!
//! evaluated numerically — the polynomials are never expanded into
//! coefficients. Products of many `(lambda - a_j)` factors overflow f64 well
//! below the sizes we care about, so every CP value is carried as a
//! [`ScaledValue`] (sign and natural log of the magnitude).
//!
//! The payoff is the closed-form squared eigenvector component
//!
//! ```text
//! s2(mu, i) = lead(mu) * trail(n-1-mu) / chi'(lambda_i)
//! ```
//!
//! with the derivative given exactly by `chi' = sum_mu lead(mu) * trail(n-1-mu)`.
//! The same recursion powers Sturm eigenvalue counting, bisection
//! eigenvalues, and sign recovery — an eigenvalue path entirely independent
//! of the QL iteration in [`crate::tridiag`].

use crate::chain::Chain;
use crate::error::Error;
use crate::Result;

/// Fraction of the spectral diameter below which an eigenvalue gap counts as
/// degenerate; the CP derivative vanishes there and the component formula
/// loses all precision.
pub const DEGENERACY_REL_GAP: f64 = 1e-9;

/// A real number stored as `sign * exp(log_magnitude)`.
///
/// `sign == 0` encodes exact zero (the log is ignored then). Keeps CP
/// products representable far beyond the ~40 sites at which raw f64
/// evaluation overflows.
#[derive(Debug, Clone, Copy)]
pub struct ScaledValue {
    sign: i8,
    log_mag: f64,
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
    };
    pub const ONE: ScaledValue = ScaledValue {
        sign: 1,
        log_mag: 0.0,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            ScaledValue::ZERO
        } else {
            ScaledValue {
                sign: if x > 0.0 { 1 } else { -1 },
                log_mag: x.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_mag.exp(),
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn log_magnitude(self) -> f64 {
        self.log_mag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// `self / other` as f64; computed as exp of the log difference so the
    /// ratio is finite even when both operands overflow f64.
    pub fn ratio(self, other: Self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        f64::from(self.sign * other.sign) * (self.log_mag - other.log_mag).exp()
    }
}

impl std::ops::Neg for ScaledValue {
    type Output = Self;

    fn neg(self) -> Self {
        ScaledValue {
            sign: -self.sign,
            log_mag: self.log_mag,
        }
    }
}

impl std::ops::Mul for ScaledValue {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return ScaledValue::ZERO;
        }
        ScaledValue {
            sign: self.sign * other.sign,
            log_mag: self.log_mag + other.log_mag,
        }
    }
}

impl std::ops::Add for ScaledValue {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let m = self.log_mag.max(other.log_mag);
        let s = f64::from(self.sign) * (self.log_mag - m).exp()
            + f64::from(other.sign) * (other.log_mag - m).exp();
        if s == 0.0 {
            ScaledValue::ZERO
        } else {
            ScaledValue {
                sign: if s > 0.0 { 1 } else { -1 },
                log_mag: m + s.abs().ln(),
            }
        }
    }
}

impl std::ops::Sub for ScaledValue {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

/// Leading principal CPs `chi_0 .. chi_n` at `lambda`; `out[j]` is the CP of
/// the first `j` sites, `out[0] = 1`.
pub(crate) fn leading_all(chain: &Chain, lambda: f64) -> Vec<ScaledValue> {
    let n = chain.len();
    let a = chain.onsite();
    let eps = chain.couplings();
    let mut out = Vec::with_capacity(n + 1);
    out.push(ScaledValue::ONE);
    out.push(ScaledValue::from_f64(lambda - a[0]));
    for j in 2..=n {
        let term1 = ScaledValue::from_f64(lambda - a[j - 1]) * out[j - 1];
        let term2 = ScaledValue::from_f64(eps[j - 2] * eps[j - 2]) * out[j - 2];
        out.push(term1 - term2);
    }
    out
}

/// Trailing CPs; `out[k]` is the CP of the last `k` sites, `out[0] = 1`.
pub(crate) fn trailing_all(chain: &Chain, lambda: f64) -> Vec<ScaledValue> {
    let n = chain.len();
    let a = chain.onsite();
    let eps = chain.couplings();
    let mut out = Vec::with_capacity(n + 1);
    out.push(ScaledValue::ONE);
    out.push(ScaledValue::from_f64(lambda - a[n - 1]));
    for k in 2..=n {
        let j = n - k; // leftmost site of the trailing block
        let term1 = ScaledValue::from_f64(lambda - a[j]) * out[k - 1];
        let term2 = ScaledValue::from_f64(eps[j] * eps[j]) * out[k - 2];
        out.push(term1 - term2);
    }
    out
}

/// CP of the leading principal submatrix spanning the first `count` sites.
/// `count = 0` gives the empty determinant 1.
pub fn cp_leading(chain: &Chain, lambda: f64, count: usize) -> ScaledValue {
    assert!(
        count <= chain.len(),
        "count {count} > {} sites",
        chain.len()
    );
    leading_all(chain, lambda)[count]
}

/// CP of the trailing submatrix spanning the last `count` sites.
pub fn cp_trailing(chain: &Chain, lambda: f64, count: usize) -> ScaledValue {
    assert!(
        count <= chain.len(),
        "count {count} > {} sites",
        chain.len()
    );
    trailing_all(chain, lambda)[count]
}

/// Derivative of the full CP at `lambda`, via the sum-of-products identity
/// `chi' = sum_mu lead(mu) * trail(n - 1 - mu)`.
pub fn cp_derivative(chain: &Chain, lambda: f64) -> ScaledValue {
    let n = chain.len();
    let lead = leading_all(chain, lambda);
    let trail = trailing_all(chain, lambda);
    let mut acc = ScaledValue::ZERO;
    for mu in 0..n {
        acc = acc + lead[mu] * trail[n - 1 - mu];
    }
    acc
}

/// Gershgorin bounds of the chain Hamiltonian: every eigenvalue lies in
/// `[lo, hi]`.
pub fn gershgorin_bounds(chain: &Chain) -> (f64, f64) {
    let n = chain.len();
    let a = chain.onsite();
    let eps = chain.couplings();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { eps[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { eps[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - left - right);
        hi = hi.max(a[i] + left + right);
    }
    (lo, hi)
}

/// Number of eigenvalues strictly below `x`, from the signs of the Sturm
/// sequence (LDLT pivots of `H - x`). A pivot that lands exactly on zero is
/// nudged by `1e-300 * scale`.
pub fn sturm_count(chain: &Chain, x: f64) -> usize {
    let n = chain.len();
    let a = chain.onsite();
    let eps = chain.couplings();
    let (lo, hi) = gershgorin_bounds(chain);
    let guard = 1e-300 * lo.abs().max(hi.abs()).max(1.0);

    let mut count = 0;
    let mut q = a[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (a[i] - x) - eps[i - 1] * eps[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues by Sturm bisection, each bracketed to width `tol`.
/// Multiplicities come out naturally from the count differences. Independent
/// of [`crate::tridiag::eigh`], which it cross-validates.
pub fn eigenvalues_bisection(chain: &Chain, tol: f64) -> Result<Vec<f64>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bisection tolerance must be > 0, got {tol}"
        )));
    }
    let n = chain.len();
    let (glo, ghi) = gershgorin_bounds(chain);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut a = glo - 1.0;
        let mut b = ghi + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if b - a <= tol || mid <= a || mid >= b {
                break;
            }
            if sturm_count(chain, mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

fn reject_if_degenerate(chain: &Chain, lambda: f64) -> Result<()> {
    let n = chain.len();
    if n == 1 {
        return Ok(());
    }
    let (lo, hi) = gershgorin_bounds(chain);
    let diameter = hi - lo;
    if diameter == 0.0 {
        // All sites equal with zero couplings: fully degenerate.
        return Err(Error::DegenerateEigenvalue { gap: 0.0 });
    }
    let window = DEGENERACY_REL_GAP * diameter;
    let inside = sturm_count(chain, lambda + window) - sturm_count(chain, lambda - window);
    if inside >= 2 {
        return Err(Error::DegenerateEigenvalue { gap: window });
    }
    Ok(())
}

/// Squared component `s2` of the normalized eigenvector with eigenvalue
/// `lambda` on `site`, from the CP ratio. `lambda` must be an eigenvalue that
/// is not degenerate (nearest gap above [`DEGENERACY_REL_GAP`] times the
/// spectral diameter); the CP derivative in the denominator vanishes on
/// degenerate eigenvalues.
pub fn squared_component(chain: &Chain, lambda: f64, site: usize) -> Result<f64> {
    let n = chain.len();
    if site >= n {
        return Err(Error::SiteOutOfRange { site, sites: n });
    }
    reject_if_degenerate(chain, lambda)?;
    let lead = leading_all(chain, lambda);
    let trail = trailing_all(chain, lambda);
    let mut deriv = ScaledValue::ZERO;
    for mu in 0..n {
        deriv = deriv + lead[mu] * trail[n - 1 - mu];
    }
    let num = lead[site] * trail[n - 1 - site];
    Ok(num.ratio(deriv).clamp(0.0, 1.0))
}

/// Reattaches signs to eigenvector magnitudes using the three-term
/// recurrence `eps_{mu,mu+1} s_{mu+1} = (lambda - a_mu) s_mu - eps_{mu-1,mu} s_{mu-1}`.
///
/// Where the chain of signs breaks (a zero coupling, or consecutive
/// magnitudes below 1e-14 carrying no sign information) the sign restarts as
/// positive on the next nonzero component; the first nonzero component is
/// always positive.
pub fn recover_signs(chain: &Chain, lambda: f64, magnitudes: &[f64]) -> Result<Vec<f64>> {
    let n = chain.len();
    if magnitudes.len() != n {
        return Err(Error::DimensionMismatch {
            chain: n,
            spectrum: magnitudes.len(),
        });
    }
    reject_if_degenerate(chain, lambda)?;
    const TINY: f64 = 1e-14;
    let a = chain.onsite();
    let eps = chain.couplings();
    let mut v = vec![0.0; n];
    v[0] = magnitudes[0].abs();
    for mu in 0..n - 1 {
        let next_mag = magnitudes[mu + 1].abs();
        if next_mag == 0.0 {
            v[mu + 1] = 0.0;
            continue;
        }
        let prev = if mu > 0 { eps[mu - 1] * v[mu - 1] } else { 0.0 };
        let rhs = (lambda - a[mu]) * v[mu] - prev;
        let broken = eps[mu] == 0.0
            || (magnitudes[mu].abs() < TINY && (mu == 0 || magnitudes[mu - 1].abs() < TINY));
        if broken || rhs == 0.0 {
            v[mu + 1] = next_mag;
        } else {
            v[mu + 1] = (rhs / eps[mu]).signum() * next_mag;
        }
    }
    Ok(v)
}
