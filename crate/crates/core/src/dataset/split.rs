use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::seeding;

/// Train / validation / test / experiment partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    pub experiment: Dataset,
}

/// Part sizes by largest-remainder rounding; ties go to the earlier part.
pub(crate) fn part_sizes(n: usize, fractions: &[f64; 4]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..4).collect();
    // Stable sort keeps set order among equal remainders.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if fractions[i] > 0.0 {
            sizes[i] += 1;
            left -= 1;
        }
    }
    sizes
}

/// Shuffle rows with `seed` and cut them into four disjoint parts.
pub fn split(dataset: &Dataset, fractions: [f64; 4], seed: u64) -> Result<Partition> {
    if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(Error::invalid("split fractions must be non-negative"));
    }
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("split fractions must sum to 1"));
    }
    let nonzero = fractions.iter().filter(|f| **f > 0.0).count();
    let n = dataset.n_rows();
    if n < nonzero {
        return Err(Error::invalid(format!(
            "{n} rows cannot fill {nonzero} partitions"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeding::rng(seed));
    let sizes = part_sizes(n, &fractions);
    let mut parts = Vec::with_capacity(4);
    let mut start = 0;
    for s in sizes {
        parts.push(dataset.select_rows(&idx[start..start + s]));
        start += s;
    }
    let experiment = parts.pop().unwrap();
    let test = parts.pop().unwrap();
    let validation = parts.pop().unwrap();
    let train = parts.pop().unwrap();
    Ok(Partition {
        train,
        validation,
        test,
        experiment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Schema;

    fn numbered(n: usize) -> Dataset {
        // Row i carries i in the Age column so membership is traceable.
        let rows = (0..n)
            .map(|i| vec![Some(1), Some(i as i64), Some(0), Some(1), Some(0), Some(13), Some(0), Some(0), Some(0)])
            .collect();
        Dataset::new(Schema::survey(), rows).unwrap()
    }

    #[test]
    fn quarters_of_one_hundred() {
        let p = split(&numbered(100), [0.25; 4], 1).unwrap();
        let sizes = [p.train.n_rows(), p.validation.n_rows(), p.test.n_rows(), p.experiment.n_rows()];
        assert_eq!(sizes, [25; 4]);
    }

    #[test]
    fn degenerate_split() {
        let p = split(&numbered(7), [1.0, 0.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(p.train.n_rows(), 7);
        assert!(p.validation.is_empty() && p.test.is_empty() && p.experiment.is_empty());
    }

    #[test]
    fn largest_remainder_ties_follow_set_order() {
        assert_eq!(part_sizes(10, &[0.25; 4]), vec![3, 3, 2, 2]);
        assert_eq!(part_sizes(3, &[0.5, 0.5, 0.0, 0.0]), vec![2, 1, 0, 0]);
        assert_eq!(part_sizes(5000, &[0.4, 0.2, 0.2, 0.2]), vec![2000, 1000, 1000, 1000]);
    }

    #[test]
    fn errors() {
        assert!(split(&numbered(3), [0.25; 4], 1).is_err());
        assert!(split(&numbered(30), [0.5, 0.2, 0.2, 0.2], 1).is_err());
        assert!(split(&numbered(30), [1.2, -0.2, 0.0, 0.0], 1).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(split(&numbered(50), [0.4, 0.2, 0.2, 0.2], 3).unwrap(), split(&numbered(50), [0.4, 0.2, 0.2, 0.2], 3).unwrap());
    }

    proptest::proptest! {
        #[test]
        fn partitions_are_disjoint_and_exhaustive(n in 4usize..200, a in 0.01f64..1.0, b in 0.01f64..1.0, c in 0.01f64..1.0, d in 0.01f64..1.0, seed in 0u64..1000) {
            let s = a + b + c + d;
            let p = split(&numbered(n), [a / s, b / s, c / s, d / s], seed).unwrap();
            let mut ids: Vec<i64> = [&p.train, &p.validation, &p.test, &p.experiment]
                .iter()
                .flat_map(|part| part.rows.iter().map(|r| r[1].unwrap()))
                .collect();
            ids.sort();
            proptest::prop_assert_eq!(ids, (0..n as i64).collect::<Vec<_>>());
        }
    }
}
