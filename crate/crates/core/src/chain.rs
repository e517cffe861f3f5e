//! Chains, reflection-symmetric domains, and configuration parsing.
//!
//! A [`Chain`] stores the on-site energies `a_i` and the nearest-neighbor
//! couplings; bond `b` couples sites `b` and `b + 1`. Chains are immutable
//! after construction; every operation that "modifies" a chain returns a new
//! one. Site and bond indices are 0-based throughout.

use serde::Deserialize;

use crate::error::Error;
use crate::Result;

/// Default tolerance for the palindromic on-site check. The values in
/// practice are exact decimals; the tolerance only absorbs file round-trip
/// noise.
pub const DETECT_TOL: f64 = 1e-12;

/// A finite tight-binding chain: `n` on-site energies and `n - 1` couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    onsite: Vec<f64>,
    couplings: Vec<f64>,
}

impl Chain {
    pub fn new(onsite: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if onsite.is_empty() {
            return Err(Error::EmptyChain);
        }
        if couplings.len() != onsite.len() - 1 {
            return Err(Error::LengthMismatch {
                expected: onsite.len() - 1,
                got: couplings.len(),
                sites: onsite.len(),
            });
        }
        if let Some(i) = onsite.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "on-site energy",
                index: i,
            });
        }
        if let Some(i) = couplings.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "coupling",
                index: i,
            });
        }
        Ok(Chain { onsite, couplings })
    }

    /// Chain with the same coupling on every bond.
    pub fn uniform(onsite: Vec<f64>, coupling: f64) -> Result<Self> {
        let bonds = onsite.len().saturating_sub(1);
        Chain::new(onsite, vec![coupling; bonds])
    }

    pub fn len(&self) -> usize {
        self.onsite.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees n >= 1
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Smallest contrast `|a_i - a_{i+1}| / eps` over bonds whose end sites
    /// differ; bonds between equal on-site values do not contribute. Returns
    /// `+inf` when every adjacent pair is equal, and a zero coupling on a
    /// contributing bond likewise contributes `+inf`.
    pub fn contrast(&self) -> f64 {
        let mut best = f64::INFINITY;
        for b in 0..self.couplings.len() {
            let da = (self.onsite[b] - self.onsite[b + 1]).abs();
            if da == 0.0 {
                continue;
            }
            let c = if self.couplings[b] == 0.0 {
                f64::INFINITY
            } else {
                da / self.couplings[b].abs()
            };
            best = best.min(c);
        }
        best
    }

    /// Sub-chain over sites `start..=end`, keeping interior bonds only.
    pub fn extract_subdomain(&self, start: usize, end: usize) -> Result<Chain> {
        if end >= self.len() || start > end {
            return Err(Error::SiteOutOfRange {
                site: end.max(start),
                sites: self.len(),
            });
        }
        Chain::new(
            self.onsite[start..=end].to_vec(),
            self.couplings[start..end].to_vec(),
        )
    }

    /// Chain with site order reversed (on-site and coupling sequences both
    /// reversed). An involution: `c.reflect().reflect() == c` exactly.
    pub fn reflect(&self) -> Chain {
        let mut onsite = self.onsite.clone();
        let mut couplings = self.couplings.clone();
        onsite.reverse();
        couplings.reverse();
        Chain { onsite, couplings }
    }

    /// New chain with one coupling replaced.
    pub fn set_bond(&self, bond: usize, value: f64) -> Result<Chain> {
        if bond >= self.couplings.len() {
            return Err(Error::BondOutOfRange {
                bond,
                bonds: self.couplings.len(),
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFinite {
                what: "coupling",
                index: bond,
            });
        }
        let mut couplings = self.couplings.clone();
        couplings[bond] = value;
        Ok(Chain {
            onsite: self.onsite.clone(),
            couplings,
        })
    }
}

/// Kind of local symmetry a domain carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryKind {
    Reflection,
}

/// A contiguous, even-length site range whose on-site energies are
/// palindromic. The center bond joins the two mirror-image subdomains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LSDomain {
    pub start: usize,
    pub end: usize,
    pub kind: SymmetryKind,
    pub center_bond: usize,
}

impl LSDomain {
    /// Validates the range against the chain's on-site values and computes
    /// the center bond.
    pub fn reflection(chain: &Chain, start: usize, end: usize, tol: f64) -> Result<Self> {
        if end >= chain.len() || start > end {
            return Err(Error::SiteOutOfRange {
                site: end.max(start),
                sites: chain.len(),
            });
        }
        let size = end - start + 1;
        if size < 2 || !size.is_multiple_of(2) {
            return Err(Error::InvalidDomain {
                start,
                end,
                reason: format!("size {size} is not even and >= 2"),
            });
        }
        for k in 0..size / 2 {
            let a = chain.onsite[start + k];
            let b = chain.onsite[end - k];
            if (a - b).abs() > tol {
                return Err(Error::InvalidDomain {
                    start,
                    end,
                    reason: format!("onsite[{}] = {a} != onsite[{}] = {b}", start + k, end - k),
                });
            }
        }
        Ok(LSDomain {
            start,
            end,
            kind: SymmetryKind::Reflection,
            center_bond: start + size / 2 - 1,
        })
    }

    /// Unvalidated site range of at least two sites, for weight and map
    /// analyses over windows that need not be palindromic (halves of a
    /// domain, the whole chain). The center bond is the midpoint formula
    /// regardless.
    pub fn span(start: usize, end: usize) -> Self {
        assert!(end > start, "span needs at least two sites");
        LSDomain {
            start,
            end,
            kind: SymmetryKind::Reflection,
            center_bond: start + (end - start).div_ceil(2) - 1,
        }
    }

    pub fn size(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }

    pub fn contains(&self, site: usize) -> bool {
        site >= self.start && site <= self.end
    }

    fn overlaps(&self, other: &LSDomain) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// True if `self` and `other` share any site.
    pub fn overlapping(domains: &[LSDomain]) -> bool {
        for (i, d) in domains.iter().enumerate() {
            for other in &domains[i + 1..] {
                if d.overlaps(other) {
                    return true;
                }
            }
        }
        false
    }
}

/// All even-length palindromic on-site ranges of at least `min_size` sites.
///
/// With `maximal = true` (the default analysis mode) only ranges not
/// contained in a longer palindromic range are returned; nested ranges such
/// as the two-site core of a larger domain are reported only with
/// `maximal = false`. Overlapping maximal ranges are all reported, sorted by
/// `(start, end)`.
pub fn detect_reflection_domains(
    chain: &Chain,
    min_size: usize,
    tol: f64,
    maximal: bool,
) -> Result<Vec<LSDomain>> {
    if min_size < 2 || !min_size.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "min_size must be even and >= 2, got {min_size}"
        )));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    let n = chain.len();
    let a = chain.onsite();
    // Half-length of the longest palindrome centered on each bond.
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    for c in 0..n.saturating_sub(1) {
        let mut h = 0;
        while c + 1 + h < n && c >= h && (a[c - h] - a[c + 1 + h]).abs() <= tol {
            h += 1;
        }
        if maximal {
            if 2 * h >= min_size {
                ranges.push((c + 1 - h, c + h));
            }
        } else {
            for hh in min_size / 2..=h {
                ranges.push((c + 1 - hh, c + hh));
            }
        }
    }
    if maximal {
        // Drop any range strictly contained in another.
        let all = ranges.clone();
        ranges.retain(|&(s, e)| {
            !all.iter()
                .any(|&(s2, e2)| (s2, e2) != (s, e) && s2 <= s && e <= e2)
        });
    }
    ranges.sort_unstable();
    ranges
        .into_iter()
        .map(|(s, e)| LSDomain::reflection(chain, s, e, tol))
        .collect()
}

/// Coupling specification of a [`ChainConfig`]: one value for every bond, an
/// explicit per-bond list, or an intra/inter-domain pair.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CouplingSpec {
    Uniform(f64),
    PerBond(Vec<f64>),
    IntraInter { intra: f64, inter: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub start: usize,
    pub end: usize,
}

/// Declarative chain description, deserializable from JSON:
///
/// ```json
/// {
///   "onsite": [0.8, 2.4, 2.4, 0.8],
///   "coupling": 0.15,
///   "domains": [{"start": 0, "end": 3}]
/// }
/// ```
///
/// `coupling` may be a number, an array of `n - 1` numbers, or
/// `{"intra": x, "inter": y}`; the intra/inter form requires explicit
/// `domains` and assigns `intra` to bonds strictly inside a domain and
/// `inter` to all other bonds.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub onsite: Vec<f64>,
    pub coupling: CouplingSpec,
    #[serde(default)]
    pub domains: Option<Vec<DomainSpec>>,
}

impl ChainConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Expands a config into a chain, validating any declared domains.
pub fn build(config: &ChainConfig) -> Result<Chain> {
    let n = config.onsite.len();
    if n == 0 {
        return Err(Error::EmptyChain);
    }
    let couplings = match &config.coupling {
        CouplingSpec::Uniform(eps) => vec![*eps; n - 1],
        CouplingSpec::PerBond(list) => list.clone(),
        CouplingSpec::IntraInter { intra, inter } => {
            let domains = config.domains.as_deref().ok_or_else(|| {
                Error::Config("intra/inter coupling requires an explicit domain list".to_string())
            })?;
            let mut c = vec![*inter; n - 1];
            for d in domains {
                if d.end >= n || d.start >= d.end {
                    return Err(Error::Config(format!(
                        "domain [{}, {}] out of range for {n} sites",
                        d.start, d.end
                    )));
                }
                c[d.start..d.end].fill(*intra);
            }
            c
        }
    };
    let chain = Chain::new(config.onsite.clone(), couplings)?;
    if let Some(domains) = &config.domains {
        for d in domains {
            LSDomain::reflection(&chain, d.start, d.end, DETECT_TOL)?;
        }
    }
    Ok(chain)
}
