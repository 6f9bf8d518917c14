use super::{Coalition, ExplainError, ValueFunction};
use crate::scalar::Scalar;

/// Largest game `exact_shapley` will enumerate.
pub const MAX_EXACT_PLAYERS: usize = 20;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact Shapley values by enumerating all `2^n` coalitions. A coalition
/// `S` not containing `i` has weight `|S|! (n - |S| - 1)! / n!`, written
/// here as `1 / (n * C(n - 1, |S|))`.
pub fn exact_shapley<T: Scalar, V: ValueFunction<T> + ?Sized>(v: &V) -> Result<Vec<T>, ExplainError> {
    let n = v.n_players();
    if n > MAX_EXACT_PLAYERS {
        return Err(ExplainError::TooManyPlayers {
            n,
            limit: MAX_EXACT_PLAYERS,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let table: Vec<T> = (0..1u64 << n)
        .map(|mask| v.value(&Coalition::from_mask(n, mask)))
        .collect::<Result<_, _>>()?;
    let weights: Vec<T> = (0..n)
        .map(|s| T::lit(1.0 / (n as f64 * binomial(n - 1, s).round())))
        .collect();
    let mut phi = vec![T::zero(); n];
    for (i, out) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = T::zero();
        for mask in (0..table.len()).filter(|m| m & bit == 0) {
            let s = mask.count_ones() as usize;
            acc += weights[s] * (table[mask | bit] - table[mask]);
        }
        *out = acc;
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::TabulatedGame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Average marginal contribution over all orderings.
    fn permutation_oracle(game: &TabulatedGame<f64>) -> Vec<f64> {
        let n = game.n_players();
        let mut phi = vec![0.0; n];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut count = 0.0;
        permute(&mut perm, 0, &mut |order| {
            let mut mask = 0usize;
            for &i in order {
                let before = game.values()[mask];
                mask |= 1 << i;
                phi[i] += game.values()[mask] - before;
            }
            count += 1.0;
        });
        phi.iter().map(|p| p / count).collect()
    }

    fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, f);
            items.swap(k, i);
        }
    }

    #[test]
    fn three_player_hand_case() {
        // v: {}=0 {0}=1 {1}=2 {0,1}=4 {2}=0 {0,2}=3 {1,2}=2 {0,1,2}=7
        let g = TabulatedGame::new(3, vec![0.0, 1.0, 2.0, 4.0, 0.0, 3.0, 2.0, 7.0]);
        let phi = exact_shapley(&g).unwrap();
        // player 0: (1/3)(1-0) + (1/6)(4-2) + (1/6)(3-0) + (1/3)(7-2)
        let p0: f64 = 1.0 / 3.0 + 2.0 / 6.0 + 3.0 / 6.0 + 5.0 / 3.0;
        assert!((phi[0] - p0).abs() < 1e-12);
        let oracle = permutation_oracle(&g);
        for (a, b) in phi.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn additive_and_dummy() {
        let c = [0.5, -1.25, 0.0, 2.0];
        let g = TabulatedGame::from_fn(4, |s| s.members().map(|i| c[i]).sum::<f64>());
        let phi = exact_shapley(&g).unwrap();
        for (p, e) in phi.iter().zip(c) {
            assert!((p - e).abs() < 1e-12);
        }
        // player 2 never matters in this multiplicative game
        let g = TabulatedGame::from_fn(4, |s| {
            (s.contains(0) as u8 as f64 + 1.0) * (s.contains(1) as u8 as f64 + s.contains(3) as u8 as f64)
        });
        assert!(exact_shapley(&g).unwrap()[2].abs() < 1e-12);
    }

    #[test]
    fn random_games_match_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.gen_range(1..=6);
            let values = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = TabulatedGame::new(n, values);
            let phi = exact_shapley(&g).unwrap();
            for (a, b) in phi.iter().zip(permutation_oracle(&g)) {
                assert!((a - b).abs() < 1e-12);
            }
            let total: f64 = phi.iter().sum();
            let expected = g.values()[(1 << n) - 1] - g.values()[0];
            assert!((total - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn guard_rejects_large_games() {
        let g = crate::explain::FnGame::new(21, |_: &Coalition| 0.0f64);
        assert!(matches!(
            exact_shapley(&g),
            Err(ExplainError::TooManyPlayers { n: 21, limit: 20 })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(19, 9), 92378.0);
        assert_eq!(binomial(5, 0), 1.0);
    }
}
