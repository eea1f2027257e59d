use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rhostar::cover::{canonicalize_cover, four_term_expressions, search_covers, ConstantCover, LengthProfile, SearchOptions};
use rhostar::perm::{formal_density, FormalSum, Permutation, Symmetry};
use rhostar::permuton::h_hessian;
use rhostar::stat::rho_star_statistic;

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut w: Vec<u32> = (1..=n as u32).collect();
    w.shuffle(rng);
    Permutation::new(w).unwrap()
}

#[test]
fn statistic_agrees_with_subset_densities() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rho = FormalSum::rho_star();
    for n in 4..=12 {
        let pi = random_perm(n, &mut rng);
        let fast = rho_star_statistic(&pi).unwrap();
        assert_eq!(fast, formal_density(&rho, &pi), "{pi}");
        assert_eq!(fast, rho_star_statistic(&pi.reverse()).unwrap());
        assert_eq!(fast, rho_star_statistic(&pi.complement()).unwrap());
    }
}

#[test]
fn catalogue_expressions_are_constant_covers() {
    for rho in four_term_expressions() {
        let cover = ConstantCover::from_formal(&rho, rho.max_order());
        assert!(cover.verify().unwrap(), "{rho}");
        assert!(!cover.c.is_zero());
    }
}

#[test]
fn hessian_signature_is_invariant_under_symmetries() {
    let profile: LengthProfile = "4,4,3,3".parse().unwrap();
    let result = search_covers(&profile, &SearchOptions::default()).unwrap();
    for cover in &result.covers {
        let base = h_hessian(&cover.to_formal(), 4).unwrap().inertia;
        for s in [Symmetry::REVERSE, Symmetry::INVERSE, Symmetry::QUARTER_TURN] {
            let image = cover.apply_symmetry(s).to_formal();
            assert_eq!(h_hessian(&image, 4).unwrap().inertia, base, "{cover} under {s:?}");
        }
    }
}

#[test]
fn search_results_are_canonical_and_verified() {
    let profile: LengthProfile = "5,5,4,3".parse().unwrap();
    let result = search_covers(&profile, &SearchOptions::default()).unwrap();
    assert_eq!(result.covers.len(), 4);
    for cover in &result.covers {
        assert!(cover.verify().unwrap());
        assert_eq!(&canonicalize_cover(cover), cover);
        assert_eq!(cover.profile().unwrap(), profile);
    }
}
