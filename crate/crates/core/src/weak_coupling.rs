//! Second-order expansion of eigenvalues and squared eigenvector components
//! in a uniform coupling `eps` around the decoupled chain.
//!
//! The expansion coefficients depend only on the on-site energies, so every
//! function here takes the on-site sequence; evaluating a truncated series at
//! some `eps` refers to the chain with that uniform coupling on every bond.
//!
//! Two regimes are covered, matching what the underlying algebra supports:
//!
//! - **Nondegenerate site** `i`: `lambda = a_i + eps^2 * lambda2` with
//!   `lambda2 = 1/(a_i - a_{i-1}) + 1/(a_i - a_{i+1})` (missing neighbors
//!   drop out), and component series built from the D-term ratios. The
//!   parental site carries `1 - O(eps^2)`, the two neighbors carry
//!   `eps^2 / (a_i - a_mu)^2`.
//! - **Adjacent degenerate pair** `(p, p+1)`: the pair splits linearly,
//!   `lambda1 = +1 / -1`, with a shared `lambda2` from the second-order
//!   reduction over the outer neighbors `p-1` and `p+2`; both central sites
//!   carry squared components `1/2 + O(eps)`.
//!
//! On-site values equal at distance two invalidate the second order (the
//! sites couple at order `eps^2`) and are rejected. Equal values at distance
//! three or more only matter beyond second order and classify as
//! nondegenerate for the eigenvalue series; their component series is
//! rejected because the D-term denominator vanishes identically.
//!
//! Component coefficients at sites `mu <= 3` or `mu >= n - 4` (0-based) pick
//! up boundary corrections that the expansion does not include; those sites
//! are flagged invalid in the [`ComponentSeries`] mask rather than silently
//! reported.

use crate::charpoly::ScaledValue;
use crate::error::Error;
use crate::Result;

/// Two on-site energies within this tolerance count as equal.
pub const ONSITE_EQ_TOL: f64 = 1e-12;

/// Partition of the sites of a chain into nondegenerate sites and adjacent
/// degenerate pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteClasses {
    pub nondegenerate: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

/// Classifies every site by on-site degeneracy structure.
///
/// Rejects multiplicities above two and values repeating at distance two
/// (those mix at second order, outside this expansion). Values repeating at
/// distance three or more classify as nondegenerate.
pub fn classify_sites(onsite: &[f64]) -> Result<SiteClasses> {
    let n = onsite.len();
    let mut classes = SiteClasses {
        nondegenerate: Vec::new(),
        pairs: Vec::new(),
    };
    for i in 0..n {
        let matches: Vec<usize> = (0..n)
            .filter(|&j| j != i && (onsite[i] - onsite[j]).abs() <= ONSITE_EQ_TOL)
            .collect();
        if matches.len() > 1 {
            let mut sites = vec![i];
            sites.extend(&matches);
            sites.sort_unstable();
            return Err(Error::UnsupportedDegeneracy { sites });
        }
        match matches.first() {
            None => classes.nondegenerate.push(i),
            Some(&j) if j == i + 1 => classes.pairs.push((i, j)),
            Some(&j) if i == j + 1 => {} // recorded when the lower index was visited
            Some(&j) if i.abs_diff(j) == 2 => {
                return Err(Error::UnsupportedDegeneracy {
                    sites: vec![i.min(j), i.max(j)],
                });
            }
            Some(_) => classes.nondegenerate.push(i),
        }
    }
    Ok(classes)
}

/// Truncated eigenvalue series `lambda0 + eps*lambda1 + eps^2*lambda2` for
/// the state emerging from `state` at zero coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueSeries {
    pub state: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl EigenvalueSeries {
    pub fn eval(&self, eps: f64) -> f64 {
        self.lambda0 + eps * self.lambda1 + eps * eps * self.lambda2
    }
}

/// Second-order eigenvalue series for a nondegenerate site: `lambda1 = 0`,
/// `lambda2 = sum over existing neighbors of 1/(a_i - a_neighbor)`.
pub fn eigvalue_series_nondegenerate(onsite: &[f64], site: usize) -> Result<EigenvalueSeries> {
    let n = onsite.len();
    if site >= n {
        return Err(Error::SiteOutOfRange { site, sites: n });
    }
    let mut lambda2 = 0.0;
    for nb in [site.checked_sub(1), (site + 1 < n).then_some(site + 1)]
        .into_iter()
        .flatten()
    {
        let gap = onsite[site] - onsite[nb];
        if gap.abs() <= ONSITE_EQ_TOL {
            return Err(Error::DegenerateSite { site });
        }
        lambda2 += 1.0 / gap;
    }
    Ok(EigenvalueSeries {
        state: site,
        lambda0: onsite[site],
        lambda1: 0.0,
        lambda2,
    })
}

fn check_adjacent_pair(onsite: &[f64], pair: (usize, usize)) -> Result<f64> {
    let (p, q) = pair;
    let n = onsite.len();
    if p >= n || q >= n {
        return Err(Error::SiteOutOfRange {
            site: p.max(q),
            sites: n,
        });
    }
    if q != p + 1 || (onsite[p] - onsite[q]).abs() > ONSITE_EQ_TOL {
        return Err(Error::NotAdjacentDegenerate { a: p, b: q });
    }
    let a = onsite[p];
    // The pair value appearing anywhere else makes the reduction singular.
    let mut sites: Vec<usize> = (0..n)
        .filter(|&j| (onsite[j] - a).abs() <= ONSITE_EQ_TOL)
        .collect();
    if sites.len() > 2 {
        sites.sort_unstable();
        return Err(Error::UnsupportedDegeneracy { sites });
    }
    Ok(a)
}

/// Eigenvalue series of the two states emerging from an adjacent degenerate
/// pair. The pair splits linearly (`lambda1 = +1` and `-1`); the shared
/// second-order coefficient comes from the degenerate-subspace reduction
/// over the outer neighbors `p - 1` and `p + 2`:
/// `lambda2 = (1/(a - a_{p-1}) + 1/(a - a_{p+2})) / 2`, existing neighbors
/// only. The second-order block is diagonal for nearest-neighbor chains (no
/// single outside site couples to both pair sites), so the two branches
/// share it.
pub fn eigvalue_series_degenerate_pair(
    onsite: &[f64],
    pair: (usize, usize),
) -> Result<[EigenvalueSeries; 2]> {
    let a = check_adjacent_pair(onsite, pair)?;
    let (p, q) = pair;
    let n = onsite.len();
    let left = p.checked_sub(1).map_or(0.0, |j| 1.0 / (a - onsite[j]));
    let right = if q + 1 < n {
        1.0 / (a - onsite[q + 1])
    } else {
        0.0
    };
    let lambda2 = 0.5 * (left + right);
    Ok([
        EigenvalueSeries {
            state: p,
            lambda0: a,
            lambda1: 1.0,
            lambda2,
        },
        EigenvalueSeries {
            state: q,
            lambda0: a,
            lambda1: -1.0,
            lambda2,
        },
    ])
}

/// The three D-term coefficients for one `(state, site)` combination, built
/// from products of the zeroth-order gaps `X_j = a_state - a_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DTerms {
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

fn x_factors(onsite: &[f64], state: usize) -> Vec<ScaledValue> {
    onsite
        .iter()
        .map(|a| ScaledValue::from_f64(onsite[state] - a))
        .collect()
}

fn prod_excluding(xs: &[ScaledValue], skip: &[usize]) -> ScaledValue {
    let mut acc = ScaledValue::ONE;
    for (j, x) in xs.iter().enumerate() {
        if !skip.contains(&j) {
            acc = acc * *x;
        }
    }
    acc
}

/// `sum_{j != mu} prod_{k != j, mu} X_k`
fn single_deletion_sum(xs: &[ScaledValue], mu: usize) -> ScaledValue {
    let mut acc = ScaledValue::ZERO;
    for j in 0..xs.len() {
        if j != mu {
            acc = acc + prod_excluding(xs, &[j, mu]);
        }
    }
    acc
}

/// Product of the one-sided single-deletion sums left and right of `mu`;
/// each side's products run over that side only.
fn cross_term(xs: &[ScaledValue], mu: usize) -> ScaledValue {
    let n = xs.len();
    let mut left = ScaledValue::ZERO;
    for j in 0..mu {
        let mut prod = ScaledValue::ONE;
        for (k, x) in xs.iter().enumerate().take(mu) {
            if k != j {
                prod = prod * *x;
            }
        }
        left = left + prod;
    }
    let mut right = ScaledValue::ZERO;
    for j in mu + 1..n {
        let mut prod = ScaledValue::ONE;
        for (k, x) in xs.iter().enumerate().skip(mu + 1) {
            if k != j {
                prod = prod * *x;
            }
        }
        right = right + prod;
    }
    left * right
}

/// Double-deletion sums with both deleted indices on the same side of `mu`;
/// products run over all sites except `mu` and the two deletions.
fn same_side_double_sum(xs: &[ScaledValue], mu: usize) -> ScaledValue {
    let n = xs.len();
    let mut acc = ScaledValue::ZERO;
    for k in 0..mu {
        for l in k + 1..mu {
            acc = acc + prod_excluding(xs, &[mu, k, l]);
        }
    }
    for k in mu + 1..n {
        for l in k + 1..n {
            acc = acc + prod_excluding(xs, &[mu, k, l]);
        }
    }
    acc
}

/// `sum over bonds (b, b+1) not touching mu of prod_{k != mu, b, b+1} X_k`
fn adjacent_pair_sum(xs: &[ScaledValue], mu: usize) -> ScaledValue {
    let n = xs.len();
    let mut acc = ScaledValue::ZERO;
    for b in 0..n.saturating_sub(1) {
        if b == mu || b + 1 == mu {
            continue;
        }
        acc = acc + prod_excluding(xs, &[mu, b, b + 1]);
    }
    acc
}

fn d1_scaled(xs: &[ScaledValue], lambda1: f64, mu: usize) -> ScaledValue {
    ScaledValue::from_f64(lambda1) * single_deletion_sum(xs, mu)
}

fn d2_scaled(xs: &[ScaledValue], lambda1: f64, lambda2: f64, mu: usize) -> ScaledValue {
    let l1sq = ScaledValue::from_f64(lambda1 * lambda1);
    let l2 = ScaledValue::from_f64(lambda2);
    let quad = l1sq * (cross_term(xs, mu) + same_side_double_sum(xs, mu));
    quad + l2 * single_deletion_sum(xs, mu) - adjacent_pair_sum(xs, mu)
}

/// D-terms for the given state and site. `lambda1` and `lambda2` are the
/// already-computed eigenvalue series coefficients of the state.
pub fn d_terms(onsite: &[f64], state: usize, lambda1: f64, lambda2: f64, site: usize) -> DTerms {
    let xs = x_factors(onsite, state);
    DTerms {
        d0: prod_excluding(&xs, &[site]).to_f64(),
        d1: d1_scaled(&xs, lambda1, site).to_f64(),
        d2: d2_scaled(&xs, lambda1, lambda2, site).to_f64(),
    }
}

/// Truncated series for the squared components of one eigenstate:
/// `s2(mu) ~ order0[mu] + eps*order1[mu] + eps^2*order2[mu]`.
///
/// Sites where the expansion omits boundary corrections are flagged `false`
/// in `valid`; their coefficients are still the raw expansion values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSeries {
    pub state: usize,
    pub order0: Vec<f64>,
    pub order1: Vec<f64>,
    pub order2: Vec<f64>,
    pub valid: Vec<bool>,
}

impl ComponentSeries {
    /// Truncated evaluation, clipped into [0, 1].
    pub fn eval(&self, eps: f64) -> Vec<f64> {
        (0..self.order0.len())
            .map(|mu| {
                (self.order0[mu] + eps * self.order1[mu] + eps * eps * self.order2[mu])
                    .clamp(0.0, 1.0)
            })
            .collect()
    }
}

fn boundary_mask(n: usize) -> Vec<bool> {
    (0..n).map(|mu| mu >= 3 && mu + 4 <= n).collect()
}

/// Component series for a nondegenerate state: the parental site carries
/// `1 - eps^2 * sum`, every other site `eps^2 * D2_mu / D0_state`. Requires
/// the state's on-site value to be globally unique (a repeat anywhere makes
/// `D0_state` vanish identically).
pub fn component_series_nondegenerate(onsite: &[f64], state: usize) -> Result<ComponentSeries> {
    let n = onsite.len();
    if state >= n {
        return Err(Error::SiteOutOfRange {
            site: state,
            sites: n,
        });
    }
    for j in 0..n {
        if j != state && (onsite[j] - onsite[state]).abs() <= ONSITE_EQ_TOL {
            return Err(Error::DegenerateSite { site: state });
        }
    }
    let lambda2 = eigvalue_series_nondegenerate(onsite, state)?.lambda2;
    let xs = x_factors(onsite, state);
    let d0_state = prod_excluding(&xs, &[state]);

    let mut order0 = vec![0.0; n];
    order0[state] = 1.0;
    let order1 = vec![0.0; n];
    let mut order2 = vec![0.0; n];
    for (mu, c2) in order2.iter_mut().enumerate() {
        if mu != state {
            *c2 = d2_scaled(&xs, 0.0, lambda2, mu).ratio(d0_state);
        }
    }
    // Closing the normalization at this order fixes the parental-site
    // coefficient to minus the sum of the others.
    order2[state] = -order2.iter().sum::<f64>();
    Ok(ComponentSeries {
        state,
        order0,
        order1,
        order2,
        valid: boundary_mask(n),
    })
}

/// Component series for the two states of an adjacent degenerate pair. Both
/// central sites carry 1/2 at leading order; the linear correction comes
/// from the D-term ratios of the branch (the off-pair linear coefficients
/// vanish identically — off-pair weight only appears at second order, which
/// this expansion does not provide, so `order2` is zero and masked sites
/// aside, truncation errors are O(eps^2)).
pub fn component_series_degenerate(
    onsite: &[f64],
    pair: (usize, usize),
) -> Result<[ComponentSeries; 2]> {
    check_adjacent_pair(onsite, pair)?;
    let series = eigvalue_series_degenerate_pair(onsite, pair)?;
    let n = onsite.len();
    let (p, q) = pair;
    let out: Vec<ComponentSeries> = series
        .iter()
        .map(|ev| {
            let xs = x_factors(onsite, p);
            let lambda1 = ev.lambda1;
            let d1: Vec<ScaledValue> = (0..n).map(|mu| d1_scaled(&xs, lambda1, mu)).collect();
            let d2: Vec<ScaledValue> = (0..n)
                .map(|mu| d2_scaled(&xs, lambda1, ev.lambda2, mu))
                .collect();
            let sum_d1 = d1.iter().fold(ScaledValue::ZERO, |acc, v| acc + *v);
            let sum_d2 = d2.iter().fold(ScaledValue::ZERO, |acc, v| acc + *v);
            let sum_d1_sq = sum_d1 * sum_d1;

            let mut order0 = vec![0.0; n];
            let mut order1 = vec![0.0; n];
            for mu in 0..n {
                if mu == p || mu == q {
                    order0[mu] = 0.5;
                    order1[mu] = (d2[mu] * sum_d1 - d1[mu] * sum_d2).ratio(sum_d1_sq);
                } else {
                    order1[mu] = d2[mu].ratio(sum_d1);
                }
            }
            ComponentSeries {
                state: ev.state,
                order0,
                order1,
                order2: vec![0.0; n],
                valid: boundary_mask(n),
            }
        })
        .collect();
    let mut it = out.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap()])
}
