use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FormatError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub test: Vec<String>,
    pub val: Vec<String>,
    pub train: Vec<String>,
}

/// Meal-level cross-validation plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    /// Checks per-fold disjointness and that the test sets partition all meals.
    pub fn validate(&self) -> Result<(), FormatError> {
        let mut all: HashSet<&str> = HashSet::new();
        for f in &self.folds {
            all.extend(f.test.iter().chain(&f.val).chain(&f.train).map(String::as_str));
        }
        let mut tested: HashSet<&str> = HashSet::new();
        for (i, f) in self.folds.iter().enumerate() {
            let mut seen = HashSet::new();
            for id in f.test.iter().chain(&f.val).chain(&f.train) {
                if !seen.insert(id.as_str()) {
                    return Err(FormatError::InvalidFolds(format!(
                        "fold {i}: meal {id:?} appears in more than one role"
                    )));
                }
            }
            for id in &f.test {
                if !tested.insert(id.as_str()) {
                    return Err(FormatError::InvalidFolds(format!("meal {id:?} is tested twice")));
                }
            }
        }
        if tested.len() != all.len() {
            return Err(FormatError::InvalidFolds(format!(
                "{} of {} meals are never tested",
                all.len() - tested.len(),
                all.len()
            )));
        }
        Ok(())
    }
}

/// Deterministic meal-level split. Meals are shuffled once with `seed` and
/// cut into `n_folds` equal test groups; each fold's validation meals are
/// the `val_size` meals that follow its test group in the shuffled order.
pub fn make_folds<S: AsRef<str>>(
    meal_ids: &[S],
    n_folds: u32,
    val_size: u32,
    seed: u64,
) -> Result<FoldPlan, FormatError> {
    let n = meal_ids.len();
    let k = n_folds as usize;
    if k == 0 || n == 0 || n % k != 0 {
        return Err(FormatError::Indivisible(n, n_folds));
    }
    let unique: HashSet<&str> = meal_ids.iter().map(AsRef::as_ref).collect();
    if unique.len() != n {
        return Err(FormatError::InvalidFolds("duplicate meal ids".into()));
    }
    let test_size = n / k;
    let val_size = val_size as usize;
    if val_size > n - test_size {
        return Err(FormatError::InvalidFolds(format!(
            "validation size {val_size} exceeds the {} meals left after testing",
            n - test_size
        )));
    }

    let mut order: Vec<String> = meal_ids.iter().map(|s| s.as_ref().to_string()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let folds = (0..k)
        .map(|f| {
            let start = f * test_size;
            let at = |offset: usize| order[(start + offset) % n].clone();
            let test = (0..test_size).map(at).collect();
            let val = (test_size..test_size + val_size).map(at).collect();
            let train = (test_size + val_size..n).map(at).collect();
            Fold { test, val, train }
        })
        .collect();
    Ok(FoldPlan { folds })
}

pub fn write_fold_plan(path: &Path, plan: &FoldPlan) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(plan)?;
    std::fs::write(path, text + "\n").map_err(|e| FormatError::io(path, e))
}

pub fn read_fold_plan(path: &Path) -> Result<FoldPlan, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let plan: FoldPlan = serde_json::from_str(&text)?;
    plan.validate()?;
    Ok(plan)
}
