use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rhostar::perm::{enumerate_sn, parse_permutation, FormalSum, Permutation};
use rhostar::permuton::{step_density, step_density_exact, step_density_formal, witness_search, Direction, StepPermuton, WitnessOptions};
use rhostar::scalar::{factorial, rat, rational_to_f64};
use rhostar::{Rational, RationalMatrix};

/// Labels the k sample points, enumerates every ordered tuple of cells and, for each,
/// every x-order and y-order compatible with the cells.
fn labelled_oracle(sigma: &Permutation, w: &RationalMatrix) -> Rational {
    let k = sigma.order();
    let g = w.rows();
    let orders = enumerate_sn(k).unwrap();
    let mut total = Rational::zero();
    let mut cells = vec![(0usize, 0usize); k];
    let count = g.pow(2 * k as u32);
    for code in 0..count {
        let mut c = code;
        let mut weight = Rational::from_integer(1.into());
        for cell in cells.iter_mut() {
            *cell = (c % g, (c / g) % g);
            c /= g * g;
            weight *= &w[*cell] * rat(1, g as i64);
        }
        if weight.is_zero() {
            continue;
        }
        let mult = |f: &dyn Fn(&(usize, usize)) -> usize| -> u128 {
            let mut m = vec![0u64; g];
            cells.iter().for_each(|c| m[f(c)] += 1);
            m.iter().map(|&v| factorial(v)).product()
        };
        let (x_orders, y_orders) = (mult(&|c| c.0), mult(&|c| c.1));
        let mut hits = 0u128;
        for ox in &orders {
            let labels: Vec<usize> = ox.word().iter().map(|&v| v as usize - 1).collect();
            if labels.windows(2).any(|p| cells[p[0]].0 > cells[p[1]].0) {
                continue;
            }
            let mut rank = vec![0; k];
            for (i, &l) in labels.iter().enumerate() {
                rank[l] = sigma.at(i + 1);
            }
            let ok = (0..k).all(|a| (0..k).all(|b| cells[a].1 >= cells[b].1 || rank[a] < rank[b]));
            hits += u128::from(ok);
        }
        total += weight * Rational::new(hits.into(), (x_orders * y_orders).into());
    }
    total
}

fn random_permuton(grid: usize, rng: &mut ChaCha8Rng) -> StepPermuton<Rational> {
    let mut m = RationalMatrix::zeros(grid, grid);
    let parts: Vec<i64> = (0..3).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = parts.iter().sum();
    for w in parts {
        let mut perm: Vec<usize> = (0..grid).collect();
        perm.shuffle(rng);
        for (x, &y) in perm.iter().enumerate() {
            m[(x, y)] += rat(w, total);
        }
    }
    StepPermuton::new(m).unwrap()
}

#[test]
fn exact_density_matches_labelled_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..12 {
        let grid = rng.gen_range(2..=3);
        let mu = random_permuton(grid, &mut rng);
        let k = rng.gen_range(2..=4);
        let mut w: Vec<u32> = (1..=k as u32).collect();
        w.shuffle(&mut rng);
        let sigma = Permutation::new(w).unwrap();
        assert_eq!(step_density_exact(&sigma, &mu).unwrap(), labelled_oracle(&sigma, mu.weights()), "{sigma}");
    }
}

#[test]
fn float_scalars_track_the_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mu = random_permuton(4, &mut rng);
    let sigma = parse_permutation("2413").unwrap();
    let exact = rational_to_f64(&step_density_exact(&sigma, &mu).unwrap());
    let f64_value = step_density(&sigma, &mu.to_f64()).unwrap();
    let mu32 = StepPermuton::new(mu.weights().map(|v| rational_to_f64(v) as f32)).unwrap();
    let f32_value = step_density(&sigma, &mu32).unwrap();
    assert!((exact - f64_value).abs() < 1e-12);
    assert!((exact - f32_value as f64).abs() < 1e-5);
}

#[test]
fn witness_is_confirmed_by_the_oracle() {
    let rho: FormalSum = "2143".parse().unwrap();
    let opts = WitnessOptions { seed: 5, grids: vec![2, 3], ..Default::default() };
    let w = witness_search(&rho, Direction::Gt, &opts).unwrap().expect("2143 is not minimized at λ");
    let sigma = parse_permutation("2143").unwrap();
    let value = labelled_oracle(&sigma, w.permuton.weights());
    assert_eq!(value, w.value);
    assert!(value > rat(1, 24));
    assert_eq!(step_density_formal(&rho, &w.permuton).unwrap(), value);
}
