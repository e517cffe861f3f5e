//! Spectral consequences of local reflection symmetry: isospectrality of the
//! mirror subdomains, pairwise degeneracy at zero center coupling, linear
//! pair splitting under a center-coupling sweep, eigenstate maps, and
//! domain-weight localization counting.

use rayon::prelude::*;

use crate::chain::{Chain, LSDomain, DETECT_TOL};
use crate::error::Error;
use crate::tridiag::{eigh, Spectrum};
use crate::Result;

/// Two eigenvalue tracks closer than this away from the sweep origin make
/// the sorted-order continuation ambiguous.
pub const TRACK_COLLISION_TOL: f64 = 1e-12;

/// Relative eigenvalue gap below which states are treated as one degenerate
/// subspace for localization purposes.
pub const SUBSPACE_REL_GAP: f64 = 1e-9;

/// Minimum coefficient of determination for the linear-splitting prefix fit.
pub const LINEAR_FIT_R2: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsospectralCheck {
    pub equal: bool,
    pub max_dev: f64,
}

/// Compares the sorted spectra of two equal-sized chains.
pub fn isospectral(a: &Chain, b: &Chain, tol: f64) -> Result<IsospectralCheck> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let sa = eigh(a);
    let sb = eigh(b);
    let max_dev = sa
        .eigenvalues()
        .iter()
        .zip(sb.eigenvalues())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(IsospectralCheck {
        equal: max_dev <= tol,
        max_dev,
    })
}

/// Largest deviation `| |s_{j,i}| - |s_{n-1-j,i}| |` over all states and
/// sites. For a reflection-symmetric chain with a nondegenerate spectrum the
/// eigenvectors have definite parity and this vanishes; within a degenerate
/// subspace individual eigenvectors carry no such relation, so those spectra
/// are rejected (test subspace projectors instead).
pub fn subdomain_eigvec_relation(chain: &Chain, spectrum: &Spectrum) -> Result<f64> {
    let n = chain.len();
    if spectrum.len() != n {
        return Err(Error::DimensionMismatch {
            chain: n,
            spectrum: spectrum.len(),
        });
    }
    let gap = spectrum.min_gap();
    if gap <= 1e-9 {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dev =
                (spectrum.component(j, i).abs() - spectrum.component(n - 1 - j, i).abs()).abs();
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// One tracked eigenvalue pair across a center-coupling sweep. `lower` and
/// `upper` follow the sorted positions seeded at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTrack {
    pub id: usize,
    /// Sorted spectrum positions of the two branches.
    pub lower_index: usize,
    pub upper_index: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PairTrack {
    pub fn gaps(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .collect()
    }

    /// Gap remaining at the sweep origin.
    pub fn residual_gap(&self) -> f64 {
        self.upper[0] - self.lower[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    /// Ascending eigenvalues per grid point.
    pub spectra: Vec<Vec<f64>>,
    pub pair_tracks: Vec<PairTrack>,
    pub domain: LSDomain,
}

/// Diagonalizes the chain for every center-coupling value on `grid`
/// (`grid[0]` must be 0 and the grid strictly increasing), seeds one pair
/// track per two domain sites from the near-degenerate pairs at the origin,
/// and follows the sorted positions across the grid.
///
/// Grid points are independent and evaluated in parallel; the result does
/// not depend on the execution order. If two unrelated levels collide to
/// within [`TRACK_COLLISION_TOL`] away from the origin and a midpoint
/// refinement cannot separate them, the sweep reports
/// [`Error::TrackingAmbiguity`] rather than guessing the continuation.
pub fn sweep_center_coupling(
    chain: &Chain,
    domain: &LSDomain,
    grid: &[f64],
) -> Result<SweepResult> {
    let domain = LSDomain::reflection(chain, domain.start, domain.end, DETECT_TOL)?;
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::InvalidArgument(
            "sweep grid must start at 0".to_string(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "sweep grid must be strictly increasing".to_string(),
        ));
    }
    let center = domain.center_bond;
    let spectra: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&ec| {
            let c = chain.set_bond(center, ec).expect("validated bond");
            eigh(&c).eigenvalues().to_vec()
        })
        .collect();

    // Seed pairs among the states that actually live on the swept domain;
    // an exactly degenerate pair elsewhere in the chain (say a second
    // decoupled domain) must not capture a track.
    let origin = eigh(&chain.set_bond(center, 0.0).expect("validated bond"));
    let on_domain: Vec<bool> = (0..origin.len())
        .map(|i| domain_weight(&origin, &domain, i) >= 0.5)
        .collect();
    let pairs = seed_pairs(&spectra[0], &on_domain, domain.size() / 2);

    // Sorted eigenvalues are continuous in the sweep parameter, so tracks
    // follow sorted positions; a collision between branches of different
    // pairs would make that continuation ambiguous.
    let pair_of_index: Vec<Option<usize>> = {
        let mut map = vec![None; spectra[0].len()];
        for (id, &(lo, hi)) in pairs.iter().enumerate() {
            map[lo] = Some(id);
            map[hi] = Some(id);
        }
        map
    };
    for (t, row) in spectra.iter().enumerate().skip(1) {
        for j in 0..row.len() - 1 {
            let same_pair = pair_of_index[j].is_some() && pair_of_index[j] == pair_of_index[j + 1];
            // Only a collision involving a tracked branch threatens the
            // sorted-position continuation; two untracked levels may
            // coincide freely (an untouched degenerate pair elsewhere).
            let involves_track = pair_of_index[j].is_some() || pair_of_index[j + 1].is_some();
            if involves_track && !same_pair && row[j + 1] - row[j] < TRACK_COLLISION_TOL {
                let mid = 0.5 * (grid[t - 1] + grid[t]);
                let c = chain.set_bond(center, mid).expect("validated bond");
                let refined = eigh(&c);
                let sep = refined.eigenvalues()[j + 1] - refined.eigenvalues()[j];
                if sep < TRACK_COLLISION_TOL {
                    return Err(Error::TrackingAmbiguity { eps_c: grid[t] });
                }
            }
        }
    }

    let pair_tracks = pairs
        .iter()
        .enumerate()
        .map(|(id, &(lo, hi))| PairTrack {
            id,
            lower_index: lo,
            upper_index: hi,
            lower: spectra.iter().map(|row| row[lo]).collect(),
            upper: spectra.iter().map(|row| row[hi]).collect(),
        })
        .collect();

    Ok(SweepResult {
        grid: grid.to_vec(),
        spectra,
        pair_tracks,
        domain,
    })
}

/// Picks the `count` disjoint consecutive index pairs with the smallest
/// gaps, ordered by position. Pairs with both states flagged `on_domain`
/// are preferred; remaining slots (when weak contrast leaves too few
/// domain-carried states) fall back to the smallest gaps overall.
fn seed_pairs(spectrum: &[f64], on_domain: &[bool], count: usize) -> Vec<(usize, usize)> {
    let n = spectrum.len();
    let bonds_by_gap = |domain_only: bool| -> Vec<usize> {
        let mut gaps: Vec<(f64, usize)> = (0..n.saturating_sub(1))
            .filter(|&j| !domain_only || (on_domain[j] && on_domain[j + 1]))
            .map(|j| (spectrum[j + 1] - spectrum[j], j))
            .collect();
        gaps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        gaps.into_iter().map(|(_, j)| j).collect()
    };
    let mut used = vec![false; n];
    let mut picked = Vec::new();
    for domain_only in [true, false] {
        for j in bonds_by_gap(domain_only) {
            if picked.len() == count {
                break;
            }
            if !used[j] && !used[j + 1] {
                used[j] = true;
                used[j + 1] = true;
                picked.push((j, j + 1));
            }
        }
    }
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingFit {
    pub pair: usize,
    /// Finite-difference slope of the gap at the origin.
    pub origin_slope: f64,
    /// Slope of the least-squares line over the longest grid prefix with
    /// `R^2 >=` [`LINEAR_FIT_R2`].
    pub fit_slope: f64,
    pub r_squared: f64,
    /// Pair gap at zero center coupling.
    pub residual_gap: f64,
}

/// Linear-splitting diagnostics for one tracked pair of a sweep.
pub fn splitting_fit(sweep: &SweepResult, pair: usize) -> Result<SplittingFit> {
    let track = sweep
        .pair_tracks
        .get(pair)
        .ok_or(Error::InvalidArgument(format!("no pair track {pair}")))?;
    if sweep.grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "splitting fit needs at least two grid points".to_string(),
        ));
    }
    let gaps = track.gaps();
    let origin_slope = (gaps[1] - gaps[0]) / (sweep.grid[1] - sweep.grid[0]);

    let mut fit_slope = origin_slope;
    let mut r_squared = 1.0;
    for k in (1..sweep.grid.len()).rev() {
        let (slope, r2) = linear_fit(&sweep.grid[..=k], &gaps[..=k]);
        if r2 >= LINEAR_FIT_R2 {
            fit_slope = slope;
            r_squared = r2;
            break;
        }
    }

    Ok(SplittingFit {
        pair,
        origin_slope,
        fit_slope,
        r_squared,
        residual_gap: gaps[0],
    })
}

/// Least-squares affine fit `y ~ a + b x`; returns `(b, R^2)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_tot: f64 = y.iter().map(|yi| (yi - my) * (yi - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let pred = my + slope * (xi - mx);
            (yi - pred) * (yi - pred)
        })
        .sum();
    let r2 = if ss_tot < 1e-30 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    (slope, r2)
}

/// Predicted `d(gap)/d eps_c` at zero center coupling for the pair emerging
/// from subdomain state `k`: twice the squared subdomain eigenvector
/// component on the site adjacent to the center bond (the last site of the
/// subdomain as passed; by the reflection either edge gives the same value).
///
/// First-order degenerate coupling: the center bond couples the state to its
/// mirror image with matrix element `eps_c * s_edge^2`, so the degenerate
/// pair splits by twice that.
pub fn theoretical_slope(subdomain: &Chain, state: usize) -> Result<f64> {
    let n = subdomain.len();
    if state >= n {
        return Err(Error::SiteOutOfRange {
            site: state,
            sites: n,
        });
    }
    let sp = eigh(subdomain);
    let edge = sp.component(n - 1, state);
    Ok(2.0 * edge * edge)
}

/// Grid of absolute eigenvector components, one row per state in ascending
/// energy order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenstateMap {
    rows: Vec<Vec<f64>>,
}

impl EigenstateMap {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn eigenstate_map(spectrum: &Spectrum) -> EigenstateMap {
    EigenstateMap {
        rows: (0..spectrum.len())
            .map(|i| spectrum.vector(i).iter().map(|x| x.abs()).collect())
            .collect(),
    }
}

/// Fraction of state `i`'s norm captured on the domain's sites.
pub fn domain_weight(spectrum: &Spectrum, domain: &LSDomain, state: usize) -> f64 {
    domain
        .sites()
        .map(|mu| spectrum.component(mu, state).powi(2))
        .sum()
}

/// Per-state domain weights and threshold classification.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationReport {
    pub theta: f64,
    /// `weights[state][domain]`, subspace-averaged for degenerate groups.
    pub weights: Vec<Vec<f64>>,
    /// Domain index each state is classified to, if any weight reaches theta.
    pub assignment: Vec<Option<usize>>,
}

impl LocalizationReport {
    pub fn localized_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }
}

/// Classifies each state to the domain holding at least `theta` of its norm
/// (`theta` in (0.5, 1]; the argmax domain wins if several qualify through
/// overlap). Weights of states inside a degenerate subspace (relative gap
/// below [`SUBSPACE_REL_GAP`]) are averaged over the subspace — the
/// projector trace is basis-invariant where individual eigenvectors are not.
pub fn count_localized(
    spectrum: &Spectrum,
    domains: &[LSDomain],
    theta: f64,
) -> Result<LocalizationReport> {
    if theta.is_nan() || theta <= 0.5 || theta > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "localization threshold must lie in (0.5, 1], got {theta}"
        )));
    }
    let n = spectrum.len();
    let mut weights: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            domains
                .iter()
                .map(|d| domain_weight(spectrum, d, i))
                .collect()
        })
        .collect();

    // Average weights over degenerate subspaces.
    let threshold = SUBSPACE_REL_GAP * spectrum.diameter();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n
            && spectrum.eigenvalues()[end + 1] - spectrum.eigenvalues()[end] <= threshold
        {
            end += 1;
        }
        if end > start {
            let size = (end - start + 1) as f64;
            for d in 0..domains.len() {
                let avg = (start..=end).map(|i| weights[i][d]).sum::<f64>() / size;
                for row in &mut weights[start..=end] {
                    row[d] = avg;
                }
            }
        }
        start = end + 1;
    }

    let assignment = weights
        .iter()
        .map(|w| {
            let mut best: Option<usize> = None;
            for (d, &wd) in w.iter().enumerate() {
                if wd >= theta && best.is_none_or(|b| wd > w[b]) {
                    best = Some(d);
                }
            }
            best
        })
        .collect();

    Ok(LocalizationReport {
        theta,
        weights,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{detect_reflection_domains, Chain};

    fn single_domain_8(eps: f64) -> Chain {
        Chain::uniform(vec![1.9, 1.4, 1.1, 1.5, 1.5, 1.1, 1.4, 1.9], eps).unwrap()
    }

    fn embedded_10() -> Chain {
        Chain::uniform(
            vec![6.0, 13.0, 10.0, 5.0, 8.0, 8.0, 5.0, 10.0, 18.0, 9.0],
            0.5,
        )
        .unwrap()
    }

    fn domain_of(chain: &Chain, start: usize, end: usize) -> LSDomain {
        LSDomain::reflection(chain, start, end, DETECT_TOL).unwrap()
    }

    #[test]
    fn isospectral_reflection() {
        let chain = embedded_10();
        let check = isospectral(&chain, &chain.reflect(), 1e-12).unwrap();
        assert!(check.equal, "max_dev = {:.3e}", check.max_dev);
    }

    #[test]
    fn isospectral_mirror_subdomains() {
        let chain = single_domain_8(0.4);
        let left = chain.extract_subdomain(0, 3).unwrap();
        let right = chain.extract_subdomain(4, 7).unwrap();
        let check = isospectral(&left, &right, 1e-12).unwrap();
        assert!(check.equal, "max_dev = {:.3e}", check.max_dev);
    }

    #[test]
    fn isospectral_detects_difference() {
        let a = Chain::uniform(vec![1.0, 2.0], 0.0).unwrap();
        let b = Chain::uniform(vec![1.0, 3.0], 0.0).unwrap();
        let check = isospectral(&a, &b, 1e-12).unwrap();
        assert!(!check.equal);
        assert!((check.max_dev - 1.0).abs() < 1e-12);

        let c = Chain::uniform(vec![1.0, 2.0, 3.0], 0.1).unwrap();
        assert!(matches!(
            isospectral(&a, &c, 1e-12),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn eigvec_relation_symmetric_chain() {
        let chain = single_domain_8(0.4);
        let sp = eigh(&chain);
        let dev = subdomain_eigvec_relation(&chain, &sp).unwrap();
        assert!(dev < 1e-9, "deviation {dev:.3e}");
    }

    #[test]
    fn eigvec_relation_two_site() {
        let chain = Chain::uniform(vec![3.0, 3.0], 0.7).unwrap();
        let sp = eigh(&chain);
        let dev = subdomain_eigvec_relation(&chain, &sp).unwrap();
        assert!(dev < 1e-12);
    }

    #[test]
    fn eigvec_relation_asymmetric_chain_is_large() {
        let chain = Chain::uniform(vec![1.0, 2.0, 3.0], 0.2).unwrap();
        let sp = eigh(&chain);
        let dev = subdomain_eigvec_relation(&chain, &sp).unwrap();
        assert!(dev > 0.05, "deviation {dev:.3e}");
    }

    #[test]
    fn eigvec_relation_rejects_degenerate() {
        let chain = single_domain_8(0.4).set_bond(3, 0.0).unwrap();
        let sp = eigh(&chain);
        assert!(matches!(
            subdomain_eigvec_relation(&chain, &sp),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn sweep_isolated_domain() {
        let chain = single_domain_8(0.4);
        let domain = domain_of(&chain, 0, 7);
        let grid: Vec<f64> = (0..101).map(|k| 0.5 * k as f64 / 100.0).collect();
        let sweep = sweep_center_coupling(&chain, &domain, &grid).unwrap();
        assert_eq!(sweep.pair_tracks.len(), 4);
        for track in &sweep.pair_tracks {
            assert!(track.residual_gap() < 1e-12);
            let gaps = track.gaps();
            for w in gaps.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "pair {} gap not monotone", track.id);
            }
        }
    }

    #[test]
    fn sweep_single_point_grid() {
        let chain = single_domain_8(0.4);
        let domain = domain_of(&chain, 0, 7);
        let sweep = sweep_center_coupling(&chain, &domain, &[0.0]).unwrap();
        assert_eq!(sweep.spectra.len(), 1);
        assert_eq!(sweep.pair_tracks.len(), 4);
        assert!(splitting_fit(&sweep, 0).is_err());
    }

    #[test]
    fn sweep_embedded_domain_residual_gaps() {
        let chain = embedded_10();
        let domain = domain_of(&chain, 2, 7);
        let grid: Vec<f64> = (0..51).map(|k| 0.5 * k as f64 / 50.0).collect();
        let sweep = sweep_center_coupling(&chain, &domain, &grid).unwrap();
        assert_eq!(sweep.pair_tracks.len(), 3);
        for track in &sweep.pair_tracks {
            assert!(track.residual_gap() > 0.0);
        }
    }

    #[test]
    fn sweep_seeds_pairs_of_the_swept_domain() {
        // A second, fully decoupled mirror domain keeps exactly degenerate
        // pairs at every grid point; its zero gaps must not capture a track
        // and must not be reported as tracking ambiguity.
        let onsite = vec![2.0, 7.0, 7.0, 2.0, 1.0, 3.0, 3.0, 1.0];
        let chain = Chain::uniform(onsite, 0.3)
            .unwrap()
            .set_bond(1, 0.0) // bystander domain center stays cut
            .unwrap()
            .set_bond(3, 0.0) // and it is detached from the swept one
            .unwrap();
        let domain = domain_of(&chain, 4, 7);
        let grid = [0.0, 0.1, 0.2, 0.3];
        let sweep = sweep_center_coupling(&chain, &domain, &grid).unwrap();
        assert_eq!(sweep.pair_tracks.len(), 2);
        for track in &sweep.pair_tracks {
            let gaps = track.gaps();
            assert!(track.residual_gap() < 1e-12);
            // Tracks belong to the swept domain: the pairs split.
            assert!(gaps[3] > 1e-3, "track {} never splits: {gaps:?}", track.id);
        }
    }

    #[test]
    fn sweep_grid_validation() {
        let chain = single_domain_8(0.4);
        let domain = domain_of(&chain, 0, 7);
        assert!(sweep_center_coupling(&chain, &domain, &[]).is_err());
        assert!(sweep_center_coupling(&chain, &domain, &[0.1, 0.2]).is_err());
        assert!(sweep_center_coupling(&chain, &domain, &[0.0, 0.2, 0.2]).is_err());
    }

    #[test]
    fn splitting_fit_slopes_positive_and_ordered() {
        let chain = single_domain_8(0.4);
        let domain = domain_of(&chain, 0, 7);
        let grid: Vec<f64> = (0..101).map(|k| 0.5 * k as f64 / 100.0).collect();
        let sweep = sweep_center_coupling(&chain, &domain, &grid).unwrap();
        let fits: Vec<SplittingFit> = (0..4).map(|p| splitting_fit(&sweep, p).unwrap()).collect();
        for f in &fits {
            assert!(f.origin_slope > 0.0);
            assert!(f.r_squared >= LINEAR_FIT_R2 || f.r_squared == 1.0);
        }
        // The pair with the largest eigenvalues splits most slowly.
        let slopes: Vec<f64> = fits.iter().map(|f| f.origin_slope).collect();
        let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(slopes[3], min, "slopes {slopes:?}");
    }

    #[test]
    fn splitting_fit_two_point_grid() {
        let chain = single_domain_8(0.4);
        let domain = domain_of(&chain, 0, 7);
        let sweep = sweep_center_coupling(&chain, &domain, &[0.0, 1e-4]).unwrap();
        let fit = splitting_fit(&sweep, 1).unwrap();
        assert_eq!(fit.r_squared, 1.0);
        assert!((fit.fit_slope - fit.origin_slope).abs() < 1e-12);
    }

    #[test]
    fn origin_slopes_match_theory() {
        let chain = single_domain_8(0.4);
        let domain = domain_of(&chain, 0, 7);
        let sub = chain.extract_subdomain(0, 3).unwrap();
        let sweep = sweep_center_coupling(&chain, &domain, &[0.0, 1e-4]).unwrap();
        for k in 0..4 {
            let numeric = splitting_fit(&sweep, k).unwrap().origin_slope;
            let theory = theoretical_slope(&sub, k).unwrap();
            assert!(
                (numeric - theory).abs() <= 1e-6 * theory,
                "pair {k}: numeric {numeric:.9} vs theory {theory:.9}"
            );
        }
    }

    #[test]
    fn theoretical_slope_single_site_subdomain() {
        let sub = Chain::new(vec![3.0], vec![]).unwrap();
        assert!((theoretical_slope(&sub, 0).unwrap() - 2.0).abs() < 1e-15);
        // Exact two-site pair: gap is exactly 2 eps_c.
        let pair = Chain::uniform(vec![3.0, 3.0], 0.3).unwrap();
        let domain = domain_of(&pair, 0, 1);
        let sweep = sweep_center_coupling(&pair, &domain, &[0.0, 0.1, 0.2]).unwrap();
        let gaps = sweep.pair_tracks[0].gaps();
        assert!((gaps[1] - 0.2).abs() < 1e-14);
        assert!((gaps[2] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn theoretical_slope_mirror_equivalence() {
        let chain = single_domain_8(0.4);
        let left = chain.extract_subdomain(0, 3).unwrap();
        let right = chain.extract_subdomain(4, 7).unwrap();
        for k in 0..4 {
            let a = theoretical_slope(&left, k).unwrap();
            // The right subdomain's bond-adjacent site is its first; reflect
            // to move it to the last.
            let b = theoretical_slope(&right.reflect(), k).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn map_decoupled_is_permutation() {
        let chain = Chain::new(vec![3.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let map = eigenstate_map(&eigh(&chain));
        assert_eq!(map.rows()[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(map.rows()[1], vec![0.0, 0.0, 1.0]);
        assert_eq!(map.rows()[2], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn map_single_site_dominance_without_symmetry() {
        let chain = Chain::uniform(
            vec![0.8, 2.4, 2.9, 5.0, 1.9, 3.0, 2.5, 4.0, 1.8, 0.9, 3.1, 4.9],
            0.15,
        )
        .unwrap();
        let map = eigenstate_map(&eigh(&chain));
        for (i, row) in map.rows().iter().enumerate() {
            let peak = row.iter().cloned().fold(0.0, f64::max);
            assert!(peak > 0.95, "state {i}: peak {peak}");
            let norm: f64 = row.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn map_pair_states_have_two_comparable_peaks() {
        let onsite = vec![0.8, 2.4, 2.4, 0.8, 1.9, 3.0, 3.0, 1.9, 3.2, 0.9, 0.9, 3.2];
        let chain = Chain::uniform(onsite, 0.15).unwrap();
        let sp = eigh(&chain);
        let map = eigenstate_map(&sp);
        for (p, q) in [(1usize, 2usize), (5, 6), (9, 10)] {
            let core = domain_of(&chain, p, q);
            // The two states with the largest core weight are the pair states.
            let mut by_weight: Vec<usize> = (0..sp.len()).collect();
            by_weight.sort_by(|&a, &b| {
                domain_weight(&sp, &core, b).total_cmp(&domain_weight(&sp, &core, a))
            });
            for &i in &by_weight[..2] {
                let row = &map.rows()[i];
                assert!(row[p] > 0.6 && row[q] > 0.6, "state {i}: {row:?}");
                let others = row
                    .iter()
                    .enumerate()
                    .filter(|(mu, _)| *mu != p && *mu != q)
                    .map(|(_, v)| *v)
                    .fold(0.0, f64::max);
                assert!(others < 0.3, "state {i} has a third peak {others}");
            }
        }
    }

    #[test]
    fn domain_weight_whole_chain_and_decoupled() {
        let chain = Chain::new(vec![3.0, 1.0, 2.0, 4.0], vec![0.0, 0.0, 0.0]).unwrap();
        let sp = eigh(&chain);
        let whole = LSDomain::span(0, 3);
        for i in 0..4 {
            assert!((domain_weight(&sp, &whole, i) - 1.0).abs() < 1e-12);
        }
        // Sites 1, 2 hold values 1.0 and 2.0 -> states 0 and 1.
        let middle = LSDomain::span(1, 2);
        assert!((domain_weight(&sp, &middle, 0) - 1.0).abs() < 1e-12);
        assert!((domain_weight(&sp, &middle, 1) - 1.0).abs() < 1e-12);
        assert!(domain_weight(&sp, &middle, 2) < 1e-12);
        assert!(domain_weight(&sp, &middle, 3) < 1e-12);
    }

    #[test]
    fn count_localized_covering_decoupled() {
        let chain = Chain::new(vec![3.0, 1.0, 2.0, 4.0], vec![0.0, 0.3, 0.0]).unwrap();
        let sp = eigh(&chain);
        let domains = vec![LSDomain::span(0, 1), LSDomain::span(2, 3)];
        let report = count_localized(&sp, &domains, 0.75).unwrap();
        assert_eq!(report.localized_count(), 4);
        for w in &report.weights {
            let total: f64 = w.iter().sum();
            assert!((total - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn count_localized_rejects_bad_theta() {
        let chain = Chain::uniform(vec![1.0, 2.0], 0.1).unwrap();
        let sp = eigh(&chain);
        assert!(count_localized(&sp, &[], 0.5).is_err());
        assert!(count_localized(&sp, &[], 1.1).is_err());
    }

    #[test]
    fn count_localized_averages_degenerate_subspaces() {
        // Decoupled mirror halves: every pair is exactly degenerate and the
        // individual eigenvectors are a basis artifact; the averaged weight
        // must be exactly 1/2 per half.
        let chain = single_domain_8(0.4).set_bond(3, 0.0).unwrap();
        let sp = eigh(&chain);
        let left = LSDomain::span(0, 3);
        let right = LSDomain::span(4, 7);
        let report = count_localized(&sp, &[left, right], 0.75).unwrap();
        assert_eq!(report.localized_count(), 0);
        for w in &report.weights {
            assert!((w[0] - 0.5).abs() <= 1e-10, "weights {w:?}");
            assert!((w[1] - 0.5).abs() <= 1e-10);
        }
    }

    #[test]
    fn stronger_intradomain_coupling_does_not_reduce_localized_count() {
        let onsite = vec![0.8, 2.4, 2.4, 0.8, 1.9, 3.0, 3.0, 1.9, 3.2, 0.9, 0.9, 3.2];
        let uniform = Chain::uniform(onsite.clone(), 0.15).unwrap();
        let contrasted = Chain::new(
            onsite,
            vec![
                0.45, 0.45, 0.45, 0.1, 0.45, 0.45, 0.45, 0.1, 0.45, 0.45, 0.45,
            ],
        )
        .unwrap();
        let count = |chain: &Chain| {
            let sp = eigh(chain);
            let domains: Vec<LSDomain> = [(0usize, 3usize), (4, 7), (8, 11)]
                .iter()
                .map(|&(s, e)| domain_of(chain, s, e))
                .collect();
            count_localized(&sp, &domains, 0.75)
                .unwrap()
                .localized_count()
        };
        assert!(count(&contrasted) >= count(&uniform));
    }

    #[test]
    fn detect_feeds_sweep() {
        let chain = embedded_10();
        let domains = detect_reflection_domains(&chain, 2, DETECT_TOL, true).unwrap();
        assert_eq!(domains.len(), 1);
        assert_eq!((domains[0].start, domains[0].end), (2, 7));
        assert_eq!(domains[0].center_bond, 4);
    }
}
