//! Class-stratified sampling.
//!
//! Quotas are computed by water-filling: a class whose whole population fits
//! in an equal share of the remaining budget is taken entirely, the budget is
//! reduced and the test repeated; the classes left over split what remains
//! in proportion to their size (largest-remainder rounding, ties to the lower
//! class index). The train/test split then divides every class's sample in
//! proportion, so class counts depend only on the populations and the
//! requested sizes, never on the seed.
//!
//! Record selection uses ChaCha8 seeded from the 64-bit seed
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`) and a Fisher-Yates shuffle of
//! each class's record indices, classes visited in class-number order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::label::ClassLabel;
use super::schema::EncodedDataset;
use crate::error::{Error, Result};

/// Splits `amount` across `weights` proportionally with largest-remainder
/// rounding. Zero total weight yields all zeros.
fn proportional(weights: &[usize], amount: usize) -> Vec<usize> {
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    if total == 0 {
        return vec![0; weights.len()];
    }
    let mut shares: Vec<usize> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let scaled = amount as u128 * w as u128;
        shares.push((scaled / total) as usize);
        remainders.push((scaled % total, i));
    }
    let leftover = amount - shares.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(leftover) {
        shares[i] += 1;
    }
    shares
}

/// Per-class sample sizes for drawing `total` records from classes of the
/// given `populations`.
pub fn allocate_quotas(populations: &[usize], total: usize) -> Result<Vec<usize>> {
    let available: usize = populations.iter().sum();
    if total > available {
        return Err(Error::SampleTooLarge {
            requested: total,
            available,
        });
    }
    let mut quotas = vec![0; populations.len()];
    let mut active: Vec<usize> = (0..populations.len()).filter(|&k| populations[k] > 0).collect();
    let mut remaining = total;
    while !active.is_empty() && remaining > 0 {
        // pop <= remaining / |active|, kept in integers
        let (small, large): (Vec<usize>, Vec<usize>) = active
            .iter()
            .partition(|&&k| populations[k] * active.len() <= remaining);
        if small.is_empty() {
            let weights: Vec<usize> = large.iter().map(|&k| populations[k]).collect();
            for (&k, share) in large.iter().zip(proportional(&weights, remaining)) {
                quotas[k] = share;
            }
            break;
        }
        for &k in &small {
            quotas[k] = populations[k];
            remaining -= populations[k];
        }
        active = large;
    }
    Ok(quotas)
}

/// Train and test row indices (each ascending) for a stratified sample of
/// `total` rows of which `test_count` go to the test side.
pub fn stratified_indices(
    labels: &[ClassLabel],
    total: usize,
    test_count: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if test_count >= total {
        return Err(Error::InvalidConfig(format!(
            "test count {test_count} must be smaller than the sample total {total}"
        )));
    }
    let mut by_class: [Vec<usize>; 5] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }
    let populations: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let quotas = allocate_quotas(&populations, total)?;
    let test_quotas = proportional(&quotas, test_count);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(total - test_count);
    let mut test = Vec::with_capacity(test_count);
    for (k, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        let chosen = &members[..quotas[k]];
        test.extend_from_slice(&chosen[..test_quotas[k]]);
        train.extend_from_slice(&chosen[test_quotas[k]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified sample of an encoded dataset, split into train and test.
pub fn stratified_sample(
    data: &EncodedDataset,
    total: usize,
    test_count: usize,
    seed: u64,
) -> Result<(EncodedDataset, EncodedDataset)> {
    let (train, test) = stratified_indices(data.labels(), total, test_count, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}
