use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LabeledDataset, TaskKind};
use crate::error::{Error, Result};

/// Stratified, seeded split of instance indices by label.
///
/// The train size is `round(fraction * n)`; per-class quotas use
/// largest-remainder allocation so each class is within one instance of its
/// proportional share. Both index lists come back sorted.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::input("cannot split an empty dataset"));
    }
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::input(format!("train fraction {train_fraction} outside (0, 1]")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let total = (train_fraction * labels.len() as f64).round() as usize;
    let mut quotas: Vec<(usize, usize, f64)> = by_class
        .iter()
        .map(|(&c, members)| {
            let exact = train_fraction * members.len() as f64;
            (c, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut remaining = total.saturating_sub(quotas.iter().map(|q| q.1).sum());
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].2.partial_cmp(&quotas[a].2).unwrap().then(a.cmp(&b)));
    for idx in order {
        if remaining == 0 {
            break;
        }
        if quotas[idx].1 < by_class[&quotas[idx].0].len() {
            quotas[idx].1 += 1;
            remaining -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(total);
    let mut validation = Vec::with_capacity(labels.len() - total);
    for (class, quota, _) in quotas {
        let mut members = by_class[&class].clone();
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..quota]);
        validation.extend_from_slice(&members[quota..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok((train, validation))
}

/// Stratified train/validation split of a graph classification dataset.
pub fn split_dataset(ds: &LabeledDataset, train_fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if ds.task != TaskKind::Graph {
        return Err(Error::input("split_dataset expects a graph classification dataset"));
    }
    let (train, validation) = stratified_split(&ds.labels(), train_fraction, seed)?;
    Ok((ds.subset(&train)?, ds.subset(&validation)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_two_split() {
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let (t, v) = stratified_split(&labels, 0.8, 1).unwrap();
        assert_eq!((t.len(), v.len()), (8, 2));
    }

    #[test]
    fn full_fraction_leaves_validation_empty() {
        let (t, v) = stratified_split(&[0, 1, 1], 1.0, 1).unwrap();
        assert_eq!(t, vec![0, 1, 2]);
        assert!(v.is_empty());
    }

    #[test]
    fn stratification_keeps_proportions() {
        let labels = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        let (t, _) = stratified_split(&labels, 0.5, 7).unwrap();
        let zeros = t.iter().filter(|&&i| labels[i] == 0).count();
        assert_eq!((zeros, t.len() - zeros), (3, 2));
    }

    #[test]
    fn empty_is_an_error() {
        assert!(stratified_split(&[], 0.5, 0).is_err());
        assert!(stratified_split(&[0], 0.0, 0).is_err());
    }
}
