use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// One train/test split of a repeated stratified cross-validation plan.
/// `repetition` and `fold` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub repetition: usize,
    pub fold: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Deterministic Fisher-Yates, so fold plans do not depend on the rand
/// crate's shuffle internals.
fn shuffle<R: Rng>(rng: &mut R, v: &mut [usize]) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}

/// Build `repetitions` independent stratified `k`-fold partitions.
///
/// Each repetition shuffles rows with its own rng seeded `seed ^ repetition`
/// (repetition is 1-based). Within a repetition, every class's shuffled
/// members are dealt round-robin over the folds with a single running
/// counter, so per-class test counts differ by at most one across folds and
/// total fold sizes differ by at most one. Classes smaller than `k` land in
/// distinct consecutive folds.
pub fn stratified_folds(
    data: &Dataset,
    k: usize,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<FoldPlan>> {
    let n = data.n_rows();
    if k < 2 {
        return Err(Error::InvalidParam(format!("fold count {} < 2", k)));
    }
    if k > n {
        return Err(Error::TooManyFolds { k, n });
    }

    let n_classes = data.n_classes();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &y) in data.labels().iter().enumerate() {
        by_class[y as usize].push(i);
    }

    let mut plans = Vec::with_capacity(repetitions * k);
    for rep in 1..=repetitions {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ rep as u64);
        let mut fold_members: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut counter = 0usize;
        for members in &by_class {
            let mut shuffled = members.clone();
            shuffle(&mut rng, &mut shuffled);
            for idx in shuffled {
                fold_members[counter % k].push(idx);
                counter += 1;
            }
        }

        for (f, test) in fold_members.iter().enumerate() {
            let mut test_indices = test.clone();
            test_indices.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test_indices {
                in_test[i] = true;
            }
            let train_indices = (0..n).filter(|&i| !in_test[i]).collect();
            plans.push(FoldPlan {
                repetition: rep,
                fold: f + 1,
                train_indices,
                test_indices,
            });
        }
    }
    Ok(plans)
}
