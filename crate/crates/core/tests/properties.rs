//! Property tests for the structural invariants of the chain machinery.

use proptest::prelude::*;

use locsym_core::chain::{detect_reflection_domains, DETECT_TOL};
use locsym_core::charpoly::{eigenvalues_bisection, squared_component, sturm_count};
use locsym_core::symmetry::isospectral;
use locsym_core::tridiag::eigh;
use locsym_core::{build, Chain, ChainConfig, CouplingSpec};

fn chain_strategy(max_n: usize) -> impl Strategy<Value = Chain> {
    (1..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(0.0..10.0f64, n),
            proptest::collection::vec(0.0..1.0f64, n.saturating_sub(1)),
        )
            .prop_map(|(onsite, couplings)| Chain::new(onsite, couplings).unwrap())
    })
}

/// On-site values spaced at least 0.3 apart, shuffled deterministically.
fn distinct_onsite_strategy(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (
        2..=max_n,
        proptest::collection::vec(0.0..0.19f64, max_n),
        any::<u64>(),
    )
        .prop_map(|(n, jitter, seed)| {
            let mut vals: Vec<f64> = (0..n).map(|k| 0.5 * k as f64 + jitter[k]).collect();
            // Fisher-Yates with a splitmix-style step, deterministic per seed.
            let mut state = seed;
            for i in (1..vals.len()).rev() {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                vals.swap(i, j);
            }
            vals
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflect_is_an_involution(chain in chain_strategy(24)) {
        prop_assert_eq!(chain.reflect().reflect(), chain);
    }

    #[test]
    fn detection_mirrors_under_reflection(chain in chain_strategy(16)) {
        let n = chain.len();
        let fwd = detect_reflection_domains(&chain, 2, DETECT_TOL, true).unwrap();
        let bwd = detect_reflection_domains(&chain.reflect(), 2, DETECT_TOL, true).unwrap();
        let mut mirrored: Vec<(usize, usize)> = fwd
            .iter()
            .map(|d| (n - 1 - d.end, n - 1 - d.start))
            .collect();
        mirrored.sort_unstable();
        let got: Vec<(usize, usize)> = bwd.iter().map(|d| (d.start, d.end)).collect();
        prop_assert_eq!(got, mirrored);
    }

    #[test]
    fn detected_domains_are_palindromic(chain in chain_strategy(16)) {
        let domains = detect_reflection_domains(&chain, 2, DETECT_TOL, false).unwrap();
        for d in domains {
            for k in 0..d.size() / 2 {
                let a = chain.onsite()[d.start + k];
                let b = chain.onsite()[d.end - k];
                prop_assert!((a - b).abs() <= DETECT_TOL);
            }
        }
    }

    #[test]
    fn reflected_chains_are_isospectral(chain in chain_strategy(20)) {
        let check = isospectral(&chain, &chain.reflect(), 1e-12).unwrap();
        prop_assert!(check.equal, "max_dev = {:.3e}", check.max_dev);
    }

    #[test]
    fn sturm_counts_are_monotone(chain in chain_strategy(16), x in -5.0..15.0f64, dx in 0.0..5.0f64) {
        prop_assert!(sturm_count(&chain, x) <= sturm_count(&chain, x + dx));
    }

    #[test]
    fn eigh_contract_holds(chain in chain_strategy(20)) {
        let sp = eigh(&chain);
        let res = locsym_core::tridiag::residuals(&chain, &sp).unwrap();
        for (i, r) in res.iter().enumerate() {
            let bound = 1e-10 * sp.eigenvalues()[i].abs().max(1.0);
            prop_assert!(*r <= bound, "state {i}: residual {r:.3e}");
        }
        for i in 0..sp.len() {
            for j in i..sp.len() {
                let dot: f64 = sp.vector(i).iter().zip(sp.vector(j)).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - expect).abs() <= 1e-10);
            }
        }
        // Gershgorin envelope.
        let (lo, hi) = locsym_core::charpoly::gershgorin_bounds(&chain);
        for &l in sp.eigenvalues() {
            prop_assert!(l >= lo - 1e-12 && l <= hi + 1e-12);
        }
    }

    #[test]
    fn trace_and_frobenius_match(chain in chain_strategy(20)) {
        let sp = eigh(&chain);
        let trace: f64 = sp.eigenvalues().iter().sum();
        let diag: f64 = chain.onsite().iter().sum();
        prop_assert!((trace - diag).abs() <= 1e-10 * diag.abs().max(1.0));

        let sq: f64 = sp.eigenvalues().iter().map(|l| l * l).sum();
        let frob: f64 = chain.onsite().iter().map(|a| a * a).sum::<f64>()
            + 2.0 * chain.couplings().iter().map(|e| e * e).sum::<f64>();
        prop_assert!((sq - frob).abs() <= 1e-10 * frob.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bisection_agrees_with_ql(chain in chain_strategy(12)) {
        let evs = eigenvalues_bisection(&chain, 1e-12).unwrap();
        let sp = eigh(&chain);
        for (b, q) in evs.iter().zip(sp.eigenvalues()) {
            prop_assert!((b - q).abs() <= 1e-10, "{b} vs {q}");
        }
    }

    #[test]
    fn component_formula_is_complete(onsite in distinct_onsite_strategy(10), eps in 0.01..0.2f64) {
        let chain = Chain::uniform(onsite, eps).unwrap();
        let sp = eigh(&chain);
        for i in 0..sp.len() {
            let mut total = 0.0;
            for mu in 0..chain.len() {
                total += squared_component(&chain, sp.eigenvalues()[i], mu).unwrap();
            }
            prop_assert!((total - 1.0).abs() <= 1e-8, "state {i}: sum {total}");
        }
    }

    #[test]
    fn declared_domains_roundtrip_through_build(
        prefix in proptest::collection::vec(0.0..10.0f64, 0..4),
        half in proptest::collection::vec(0.0..10.0f64, 1..4),
        suffix in proptest::collection::vec(0.0..10.0f64, 0..4),
        eps in 0.0..1.0f64,
    ) {
        let mut onsite = prefix.clone();
        onsite.extend(&half);
        onsite.extend(half.iter().rev());
        onsite.extend(&suffix);
        let start = prefix.len();
        let end = start + 2 * half.len() - 1;
        let cfg = ChainConfig {
            onsite: onsite.clone(),
            coupling: CouplingSpec::Uniform(eps),
            domains: Some(vec![locsym_core::chain::DomainSpec { start, end }]),
        };
        let chain = build(&cfg).unwrap();
        let sub = chain.extract_subdomain(start, end).unwrap();
        let mut expect = half.clone();
        expect.extend(half.iter().rev());
        prop_assert_eq!(sub.onsite(), &expect[..]);
    }
}
