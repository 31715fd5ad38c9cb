use crate::data::ReferenceTable;
use crate::error::{Error, Result};
use crate::neighbors::euclidean;

/// Rejection-ABC localization around an observation.
#[derive(Debug, Clone)]
pub struct Localized {
    /// Retained rows, in their original order, with their original ids.
    pub table: ReferenceTable,
    /// Summary-space distance of each retained row to the observation.
    pub distances: Vec<f64>,
    /// Distance of the farthest retained row.
    pub epsilon: f64,
}

/// Keep the `n_post` rows whose summaries are closest to `y_obs`
/// (ties broken by row position).
pub fn localize(reference: &ReferenceTable, y_obs: &[f64], n_post: usize) -> Result<Localized> {
    if y_obs.len() != reference.n_stats() {
        return Err(Error::Dimension {
            expected: reference.n_stats(),
            found: y_obs.len(),
        });
    }
    if n_post == 0 || n_post > reference.len() {
        return Err(Error::Size(format!(
            "n_post = {n_post} must lie in 1..={}",
            reference.len()
        )));
    }
    let dist: Vec<f64> = reference.summaries().map(|s| euclidean(y_obs, s)).collect();
    let mut order: Vec<usize> = (0..dist.len()).collect();
    let key = |a: &usize, b: &usize| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b));
    if n_post < order.len() {
        order.select_nth_unstable_by(n_post - 1, key);
        order.truncate(n_post);
    }
    let epsilon = order.iter().map(|&i| dist[i]).fold(0.0, f64::max);
    order.sort_unstable();
    Ok(Localized {
        table: reference.select(&order)?,
        distances: order.iter().map(|&i| dist[i]).collect(),
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Particle;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> ReferenceTable {
        ReferenceTable::from_particles(
            xs.iter()
                .enumerate()
                .map(|(i, x)| Particle::new(vec![i as f64], vec![*x]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn keeps_nearest_rows() {
        let t = line(&[9.0, 1.0, 0.0, 2.0]);
        let l = localize(&t, &[0.0], 2).unwrap();
        assert_eq!(l.table.ids(), &[1, 2]);
        assert_eq!(l.epsilon, 1.0);
        let all = localize(&t, &[0.0], 4).unwrap();
        assert_eq!(all.table, t);
        assert!(localize(&t, &[0.0], 5).is_err());
    }

    proptest! {
        #[test]
        fn excluded_rows_are_farther(seed: u64, n in 2usize..200, frac in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..20))).collect();
            let t = line(&xs);
            let n_post = 1 + ((n - 1) as f64 * frac) as usize;
            let l = localize(&t, &[7.0], n_post).unwrap();
            prop_assert_eq!(l.table.len(), n_post);
            let kept: std::collections::HashSet<usize> = l.table.ids().iter().copied().collect();
            let worst_kept = l.table.ids().iter().map(|&i| ((xs[i] - 7.0).abs(), i)).fold((0.0, 0), |a, b| if (b.0, b.1) > a { b } else { a });
            for (i, x) in xs.iter().enumerate() {
                if !kept.contains(&i) {
                    let d = (x - 7.0).abs();
                    prop_assert!(d > worst_kept.0 || (d == worst_kept.0 && i > worst_kept.1));
                }
            }
        }
    }
}
