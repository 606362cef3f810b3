use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream, SeededRng, Stream};

/// `w_i = N_{y_i} / (|G| · n_{g_i, y_i})`, so that every group carries the
/// same total weight within a class and the mean weight is 1.
pub fn balanced_weights(y: &[usize], g: &[usize]) -> Result<Vec<f64>> {
    if y.len() != g.len() {
        return Err(Error::shape("balanced_weights", y.len(), g.len()));
    }
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let n_groups = g.iter().max().map_or(0, |m| m + 1);
    let mut class_count = vec![0usize; n_classes];
    let mut cell = vec![vec![0usize; n_groups]; n_classes];
    for (&yi, &gi) in y.iter().zip(g) {
        class_count[yi] += 1;
        cell[yi][gi] += 1;
    }
    // Groups present anywhere in the data define |G|.
    let present = (0..n_groups)
        .filter(|&k| cell.iter().any(|row| row[k] > 0))
        .count();
    y.iter()
        .zip(g)
        .map(|(&yi, &gi)| {
            let n = cell[yi][gi];
            if n == 0 {
                return Err(Error::Internal("empty (class, group) cell".into()));
            }
            Ok(class_count[yi] as f64 / (present as f64 * n as f64))
        })
        .collect()
}

/// Shuffled index batches for one epoch. The main stream covers every row;
/// the discriminator stream covers only rows with a protected label and is
/// shuffled independently.
pub fn epoch_batches(
    ds: &Dataset,
    batch_size: usize,
    main_rng: &mut SeededRng,
    disc_rng: &mut SeededRng,
) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut all: Vec<usize> = (0..ds.len()).collect();
    all.shuffle(main_rng);
    let mut labeled = ds.labeled_indices();
    labeled.shuffle(disc_rng);
    let chunk = |v: Vec<usize>| v.chunks(batch_size).map(<[usize]>::to_vec).collect();
    (chunk(all), chunk(labeled))
}

/// Row indices per batch.
pub type BatchRows = Vec<Vec<usize>>;

/// First-epoch batches of the two decoupled streams for `seed`.
pub fn decoupled_batches(
    ds: &Dataset,
    batch_size: usize,
    seed: u64,
) -> Result<(BatchRows, BatchRows)> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
    }
    Ok(epoch_batches(
        ds,
        batch_size,
        &mut stream(seed, Stream::Shuffle),
        &mut stream(seed, Stream::DiscShuffle),
    ))
}
