use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Shuffled index partition with sizes `round(f_train·N)`, `round(f_dev·N)`
/// and the remainder for test.
pub fn split_indices(n: usize, fractions: [f64; 3], seed: u64) -> Result<[Vec<usize>; 3]> {
    if fractions.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "split fractions must be >= 0, got {fractions:?}"
        )));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split fractions must sum to 1, got {total}"
        )));
    }
    let n_train = ((fractions[0] * n as f64).round() as usize).min(n);
    let n_dev = ((fractions[1] * n as f64).round() as usize).min(n - n_train);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, Stream::Split));
    let test = idx.split_off(n_train + n_dev);
    let dev = idx.split_off(n_train);
    Ok([idx, dev, test])
}

/// Splits into (train, dev, test).
pub fn split(ds: &Dataset, fractions: [f64; 3], seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let [a, b, c] = split_indices(ds.len(), fractions, seed)?;
    Ok((ds.subset(&a), ds.subset(&b), ds.subset(&c)))
}

/// Keeps the protected label on exactly `round(keep·N)` instances chosen at
/// random and clears it elsewhere. Features and targets are untouched.
pub fn mask_protected(ds: &Dataset, keep_fraction: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&keep_fraction) {
        return Err(Error::InvalidArgument(format!(
            "keep fraction must lie in [0, 1], got {keep_fraction}"
        )));
    }
    let n = ds.len();
    let keep = (keep_fraction * n as f64).round() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, Stream::Mask));
    let mut out = ds.clone();
    for &i in &idx[keep..] {
        out.g[i] = None;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, JointSpec};

    fn ds(n: usize) -> Dataset {
        generate(&JointSpec::moji_default(), n, 0).unwrap()
    }

    #[test]
    fn sixty_five_ten_twenty_five() {
        let (a, b, c) = split(&ds(1000), [0.65, 0.10, 0.25], 1).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (650, 100, 250));
    }

    #[test]
    fn zero_fractions_allowed() {
        let (a, b, c) = split(&ds(10), [1.0, 0.0, 0.0], 1).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (10, 0, 0));
    }

    #[test]
    fn same_seed_same_assignment() {
        let d = ds(100);
        assert_eq!(
            split(&d, [0.5, 0.25, 0.25], 9).unwrap(),
            split(&d, [0.5, 0.25, 0.25], 9).unwrap()
        );
    }

    #[test]
    fn invalid_fractions() {
        assert!(split_indices(10, [0.5, 0.5, 0.5], 0).is_err());
        assert!(split_indices(10, [-0.5, 1.0, 0.5], 0).is_err());
    }

    #[test]
    fn masking_counts() {
        let d = ds(1000);
        assert_eq!(mask_protected(&d, 1.0, 0).unwrap(), d);
        assert_eq!(mask_protected(&d, 0.28, 0).unwrap().labeled_count(), 280);
        assert_eq!(mask_protected(&d, 0.0, 0).unwrap().labeled_count(), 0);
        assert!(mask_protected(&d, 1.5, 0).is_err());
    }
}
