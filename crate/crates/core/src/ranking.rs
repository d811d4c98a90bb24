//! Preference data, the Plackett-Luce choice model and ranking comparison.
//!
//! A [`Preference`] lists item indices from most to least preferred. Under
//! Plackett-Luce each position is a choice among the items that remain, made
//! with probability proportional to the item scores:
//!
//! ```text
//! P(a > b > c) = θa / (θa + θb + θc) · θb / (θb + θc)
//! ```

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};

/// One partial ranking: distinct item indices, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Preference(Vec<usize>);

impl Preference {
    pub fn new(items: Vec<usize>) -> Result<Self> {
        if items.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a preference needs at least 2 items, got {}",
                items.len()
            )));
        }
        for (pos, item) in items.iter().enumerate() {
            if items[..pos].contains(item) {
                return Err(Error::InvalidArgument(format!(
                    "item {item} appears twice in a preference"
                )));
            }
        }
        Ok(Preference(items))
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// External item identifiers and their dense indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ItemIds {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl ItemIds {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate item id {id:?}")));
            }
        }
        Ok(ItemIds { ids, index })
    }

    /// Ids `"0"`, `"1"`, … for `m` anonymous items.
    pub fn numbered(m: usize) -> Self {
        let ids = (0..m).map(|i| i.to_string()).collect();
        Self::new(ids).expect("numbered ids are unique")
    }

    /// Returns the index for `id`, assigning the next free one on first sight.
    pub(crate) fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        i
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.ids
    }
}

/// An immutable collection of preferences over a fixed item set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceDataset {
    items: ItemIds,
    preferences: Vec<Preference>,
}

impl PreferenceDataset {
    pub fn new(items: ItemIds, preferences: Vec<Preference>) -> Result<Self> {
        let m = items.len();
        for (n, pref) in preferences.iter().enumerate() {
            if let Some(&bad) = pref.items().iter().find(|&&i| i >= m) {
                return Err(Error::InvalidArgument(format!(
                    "preference {n} references item {bad} but only {m} items exist"
                )));
            }
        }
        Ok(PreferenceDataset { items, preferences })
    }

    /// Builds a dataset over `m` numbered items from raw index lists.
    pub fn from_indices(m: usize, preferences: Vec<Vec<usize>>) -> Result<Self> {
        let preferences = preferences
            .into_iter()
            .map(Preference::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(ItemIds::numbered(m), preferences)
    }

    /// Same item set, different preferences.
    pub fn with_preferences(&self, preferences: Vec<Preference>) -> Result<Self> {
        Self::new(self.items.clone(), preferences)
    }

    pub fn items(&self) -> &ItemIds {
        &self.items
    }

    pub fn preferences(&self) -> &[Preference] {
        &self.preferences
    }

    /// M
    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    /// N
    pub fn len(&self) -> usize {
        self.preferences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preferences.is_empty()
    }

    /// Total number of choice stages, Σ_n (k_n − 1).
    pub fn num_choices(&self) -> usize {
        self.preferences.iter().map(|p| p.len() - 1).sum()
    }
}

/// Non-negative Plackett-Luce support parameters, one per item.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemScores(Vec<f64>);

impl ItemScores {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = theta
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "score of item {i} must be finite and non-negative, got {v}"
            )));
        }
        if !theta.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidArgument(
                "at least one score must be positive".into(),
            ));
        }
        Ok(ItemScores(theta))
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_raw(theta: Vec<f64>) -> Self {
        debug_assert!(theta.iter().all(|v| v.is_finite() && *v >= 0.0));
        ItemScores(theta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
}

impl std::ops::Index<usize> for ItemScores {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A strict total order over items `0..M`, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &item in &order {
            match seen.get_mut(item) {
                Some(s) if !*s => *s = true,
                Some(_) => {
                    return Err(Error::InvalidArgument(format!(
                        "item {item} appears twice in ranking"
                    )))
                }
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "item {item} out of range for a ranking of {} items",
                        order.len()
                    )))
                }
            }
        }
        Ok(Ranking(order))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `positions()[item]` is the rank (0 = best) of `item`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (rank, &item) in self.0.iter().enumerate() {
            pos[item] = rank;
        }
        pos
    }

    pub fn reversed(&self) -> Ranking {
        Ranking(self.0.iter().rev().copied().collect())
    }
}

fn check_scores_on(pref: &Preference, theta: &ItemScores) -> Result<()> {
    for &item in pref.items() {
        match theta.as_slice().get(item) {
            None => {
                return Err(Error::InvalidArgument(format!(
                    "item {item} has no score (only {} scores)",
                    theta.len()
                )))
            }
            Some(&v) if v <= 0.0 => return Err(Error::ZeroScore { item }),
            Some(_) => {}
        }
    }
    Ok(())
}

/// Log-probability of `pref` under Plackett-Luce with scores `theta`.
///
/// Suffix sums of the scores are accumulated in one backward pass.
pub fn pl_log_probability(pref: &Preference, theta: &ItemScores) -> Result<f64> {
    check_scores_on(pref, theta)?;
    let items = pref.items();
    let k = items.len();
    let mut suffix = theta[items[k - 1]];
    let mut log_p = 0.0;
    for &item in items[..k - 1].iter().rev() {
        let t = theta[item];
        suffix += t;
        log_p += t.ln() - suffix.ln();
    }
    Ok(log_p)
}

/// Σ_n log P_θ(ρ_n), accumulated in dataset order.
pub fn dataset_log_likelihood(ds: &PreferenceDataset, theta: &ItemScores) -> Result<f64> {
    let mut total = 0.0;
    for pref in ds.preferences() {
        total += pl_log_probability(pref, theta)?;
    }
    Ok(total)
}

/// Draws `k` items of `subset` without replacement, each pick proportional
/// to the scores of the items still available.
pub fn sample_preference<R: Rng + ?Sized>(
    theta: &ItemScores,
    subset: &[usize],
    k: usize,
    rng: &mut R,
) -> Result<Preference> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot sample from an empty subset".into(),
        ));
    }
    if k > subset.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {k} items from a subset of {}",
            subset.len()
        )));
    }
    for &item in subset {
        match theta.as_slice().get(item) {
            None => {
                return Err(Error::InvalidArgument(format!(
                    "item {item} has no score (only {} scores)",
                    theta.len()
                )))
            }
            Some(&v) if v <= 0.0 => return Err(Error::ZeroScore { item }),
            Some(_) => {}
        }
    }

    let mut remaining = subset.to_vec();
    let mut order = Vec::with_capacity(k);
    while order.len() < k {
        let total: f64 = remaining.iter().map(|&i| theta[i]).sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = remaining.len() - 1;
        for (slot, &item) in remaining.iter().enumerate() {
            acc += theta[item];
            if target < acc {
                pick = slot;
                break;
            }
        }
        order.push(remaining.remove(pick));
    }
    Preference::new(order)
}

/// Items by descending score; equal scores keep ascending index order.
pub fn scores_to_ranking(theta: &ItemScores) -> Ranking {
    let scores = theta.as_slice();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps ascending index among ties
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ranking(order)
}

/// Fraction of unordered item pairs that `a` and `b` order the same way.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "rankings cover different item sets ({} vs {} items)",
            a.len(),
            b.len()
        )));
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "kendall tau needs at least 2 items".into(),
        ));
    }
    let pa = a.positions();
    let pb = b.positions();
    let mut agreements = 0u64;
    for i in 0..m {
        for j in i + 1..m {
            if (pa[i] < pa[j]) == (pb[i] < pb[j]) {
                agreements += 1;
            }
        }
    }
    let pairs = (m * (m - 1) / 2) as f64;
    Ok(agreements as f64 / pairs)
}
