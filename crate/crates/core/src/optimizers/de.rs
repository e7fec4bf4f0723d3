use rand::Rng as _;

use super::Rng;
use crate::error::{Error, Result};

/// `N` distinct indices in `0..n`, none equal to `exclude`.
pub(super) fn distinct_others<const N: usize>(
    rng: &mut Rng,
    n: usize,
    exclude: usize,
) -> [usize; N] {
    debug_assert!(n > N);
    let mut picked = [usize::MAX; N];
    for slot in 0..N {
        loop {
            let c = rng.gen_range(0..n);
            if c != exclude && !picked[..slot].contains(&c) {
                picked[slot] = c;
                break;
            }
        }
    }
    picked
}

/// `x_best + F (x_r1 - x_r2)`
pub fn mutant_best_1(best: f64, r1: f64, r2: f64, f_scale: f64) -> f64 {
    best + f_scale * (r1 - r2)
}

/// `x_r1 + F (x_r2 - x_r3)`
pub fn mutant_rand_1(r1: f64, r2: f64, r3: f64, f_scale: f64) -> f64 {
    r1 + f_scale * (r2 - r3)
}

/// best/1 mutant for `target`; the two difference members are distinct and
/// differ from the target.
pub fn de_mutation_best(
    population: &[f64],
    best: usize,
    target: usize,
    f_scale: f64,
    rng: &mut Rng,
) -> Result<f64> {
    if population.len() < 3 {
        return Err(Error::config(format!(
            "best/1 mutation needs at least 3 members, got {}",
            population.len()
        )));
    }
    let [r1, r2] = distinct_others(rng, population.len(), target);
    Ok(mutant_best_1(
        population[best],
        population[r1],
        population[r2],
        f_scale,
    ))
}

/// rand/1 mutant for `target`; three distinct members other than the target.
pub fn de_mutation_rand(
    population: &[f64],
    target: usize,
    f_scale: f64,
    rng: &mut Rng,
) -> Result<f64> {
    if population.len() < 4 {
        return Err(Error::config(format!(
            "rand/1 mutation needs at least 4 members, got {}",
            population.len()
        )));
    }
    let [r1, r2, r3] = distinct_others(rng, population.len(), target);
    Ok(mutant_rand_1(
        population[r1],
        population[r2],
        population[r3],
        f_scale,
    ))
}

/// Binomial crossover: each coordinate comes from the mutant with
/// probability `cr`, and one randomly chosen coordinate always does. For a
/// single decision variable the trial is therefore the mutant.
pub fn binomial_crossover(target: &[f64], mutant: &[f64], cr: f64, rng: &mut Rng) -> Vec<f64> {
    assert_eq!(target.len(), mutant.len());
    let forced = rng.gen_range(0..target.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| {
            let take = rng.gen::<f64>() < cr;
            if j == forced || take {
                m
            } else {
                t
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn best_examples() {
        assert_eq!(mutant_best_1(10.0, 20.0, 4.0, 0.0), 10.0);
        assert!((mutant_best_1(10.0, 20.0, 4.0, 0.7) - 21.2).abs() < 1e-12);
        assert_eq!(mutant_best_1(10.0, 33.0, 33.0, 0.7), 10.0);

        let mut rng = Rng::seed_from_u64(0);
        let pop = [5.0, 17.0, 40.0, 90.0];
        assert_eq!(de_mutation_best(&pop, 2, 0, 0.0, &mut rng).unwrap(), 40.0);
        assert!(de_mutation_best(&pop[..2], 0, 0, 0.7, &mut rng).is_err());
    }

    #[test]
    fn rand_examples() {
        assert_eq!(mutant_rand_1(50.0, 60.0, 40.0, 0.0), 50.0);
        assert!((mutant_rand_1(50.0, 60.0, 40.0, 0.7) - 64.0).abs() < 1e-12);
        assert_eq!(mutant_rand_1(50.0, 8.0, 8.0, 0.7), 50.0);

        let mut rng = Rng::seed_from_u64(0);
        let pop = [5.0, 17.0, 40.0, 90.0];
        let m = de_mutation_rand(&pop, 0, 0.0, &mut rng).unwrap();
        assert!([17.0, 40.0, 90.0].contains(&m));
        assert!(de_mutation_rand(&pop[..3], 0, 0.7, &mut rng).is_err());
    }

    #[test]
    fn difference_members_exclude_target() {
        let mut rng = Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let [a, b, c] = distinct_others::<3>(&mut rng, 4, 2);
            assert!(a != 2 && b != 2 && c != 2);
            assert!(a != b && b != c && a != c);
        }
    }

    #[test]
    fn crossover_examples() {
        let mut rng = Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert_eq!(
                binomial_crossover(&[1.0, 2.0, 3.0], &[7.0, 8.0, 9.0], 1.0, &mut rng),
                vec![7.0, 8.0, 9.0]
            );
            assert_eq!(binomial_crossover(&[3.0], &[9.0], 0.0, &mut rng), vec![9.0]);
            assert_eq!(binomial_crossover(&[4.0], &[4.0], 0.5, &mut rng), vec![4.0]);
        }
        // CR = 0 keeps exactly one mutant coordinate
        let t = binomial_crossover(&[0.0; 5], &[1.0; 5], 0.0, &mut rng);
        assert_eq!(t.iter().sum::<f64>(), 1.0);
    }
}
