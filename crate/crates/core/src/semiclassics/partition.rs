//! Partitions of eigenvalue sequences and semiclassical character families.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit (exclusive) of the growth rate `ϑ` for the one-dimensional
/// orbit theorems, `1/(2κ + 3)` with `κ = 1`.
pub const VARTHETA_LIMIT: f64 = 0.2;

/// Grouping of a nondecreasing sequence into blocks of relative width
/// `a^{-β/2}`. All indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionResult {
    pub beta: f64,
    /// Block starts `j_1 = 1 < j_2 < …`.
    pub jk: Vec<usize>,
    /// `p[j - 1] = P(j)`, the start of the block containing `j`.
    pub p: Vec<usize>,
}

impl PartitionResult {
    /// `P(j)` for a 1-based index.
    pub fn p_of(&self, j: usize) -> Option<usize> {
        j.checked_sub(1).and_then(|i| self.p.get(i)).copied()
    }

    /// Bracket property `a_{P(j)} ≤ a_j < a_{j_{k+1}}` for every `j` whose
    /// block is followed by another block in the prefix.
    pub fn bracket_holds(&self, a: &[f64]) -> bool {
        (1..=self.p.len()).all(|j| {
            let start = self.p[j - 1];
            let k = self.jk.binary_search(&start).expect("P(j) is a block start");
            let lower = a[start - 1] <= a[j - 1];
            let upper = self.jk.get(k + 1).is_none_or(|&next| a[j - 1] < a[next - 1]);
            lower && upper && start <= j
        })
    }
}

/// Partition of `a_1, a_2, …` of order `β`: `j_1 = 1` and `j_{k+1}` is the
/// least `j` with `a_{j_k}(1 + a_{j_k}^{-β/2}) < a_j`.
pub fn partition(a: &[f64], beta: f64) -> Result<PartitionResult> {
    if a.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
    }
    if let Some(i) = a.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("a", format!("entries must be positive, a_{} = {}", i + 1, a[i])));
    }
    if let Some(i) = a.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::invalid("a", format!("not nondecreasing at j = {}", i + 2)));
    }
    let mut jk = vec![1];
    let mut p = Vec::with_capacity(a.len());
    let mut start = 1usize;
    let mut threshold = a[0] * (1.0 + a[0].powf(-beta / 2.0));
    for (i, &v) in a.iter().enumerate() {
        let j = i + 1;
        if v > threshold {
            start = j;
            jk.push(j);
            threshold = v * (1.0 + v.powf(-beta / 2.0));
        }
        p.push(start);
    }
    Ok(PartitionResult { beta, jk, p })
}

/// A family `W_h` of SO(2) characters `χ_k(e^{iφ}) = e^{ikφ}`, labelled by `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterFamily {
    /// `{k : |k| ≤ h^{-ϑ}}`.
    Growing { vartheta: f64 },
    /// The same set for every `h`.
    Fixed { members: BTreeSet<i64> },
}

impl CharacterFamily {
    pub fn growing(vartheta: f64) -> Self {
        CharacterFamily::Growing { vartheta }
    }

    pub fn fixed(members: impl IntoIterator<Item = i64>) -> Self {
        CharacterFamily::Fixed { members: members.into_iter().collect() }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CharacterFamily::Growing { vartheta } if !(*vartheta >= 0.0 && vartheta.is_finite()) => {
                Err(Error::invalid("vartheta", format!("must be ≥ 0, got {vartheta}")))
            }
            CharacterFamily::Fixed { members } if members.is_empty() => Err(Error::Empty("character family")),
            _ => Ok(()),
        }
    }

    /// Members at `h`, in increasing order.
    pub fn members(&self, h: f64) -> Vec<i64> {
        match self {
            CharacterFamily::Growing { vartheta } => {
                let bound = growth_bound(*vartheta, h);
                (-bound..=bound).collect()
            }
            CharacterFamily::Fixed { members } => members.iter().copied().collect(),
        }
    }

    pub fn cardinality(&self, h: f64) -> usize {
        match self {
            CharacterFamily::Growing { vartheta } => 2 * growth_bound(*vartheta, h) as usize + 1,
            CharacterFamily::Fixed { members } => members.len(),
        }
    }

    pub fn contains(&self, h: f64, m: i64) -> bool {
        match self {
            CharacterFamily::Growing { vartheta } => m.abs() <= growth_bound(*vartheta, h),
            CharacterFamily::Fixed { members } => members.contains(&m),
        }
    }

    /// Largest `|k|` in the family at `h`.
    pub fn max_abs(&self, h: f64) -> i64 {
        match self {
            CharacterFamily::Growing { vartheta } => growth_bound(*vartheta, h),
            CharacterFamily::Fixed { members } => members.iter().map(|m| m.abs()).max().unwrap_or(0),
        }
    }
}

/// `⌊h^{-ϑ}⌋`, robust to the last-bit error of `powf` at exact integers.
fn growth_bound(vartheta: f64, h: f64) -> i64 {
    let x = h.powf(-vartheta);
    (x * (1.0 + 1e-12)).floor() as i64
}

/// The growing family evaluated at one `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySnapshot {
    pub vartheta: f64,
    pub h: f64,
    pub members: Vec<i64>,
    /// Whether `ϑ < 1/5`, the range covered by the orbit-reduced theorems.
    pub admissible: bool,
}

pub fn character_family(vartheta: f64, h: f64) -> Result<FamilySnapshot> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::invalid("h", format!("must lie in (0, 1], got {h}")));
    }
    let family = CharacterFamily::growing(vartheta);
    family.validate()?;
    Ok(FamilySnapshot { vartheta, h, members: family.members(h), admissible: vartheta < VARTHETA_LIMIT })
}

/// Open interval of admissible partition orders `β ∈ (0, (1 − 5ϑ)/6)`.
pub fn admissible_exponents(vartheta: f64) -> Result<(f64, f64)> {
    if !(0.0..VARTHETA_LIMIT).contains(&vartheta) {
        return Err(Error::invalid(
            "vartheta",
            format!("must lie in [0, 1/5) for a nonempty range of β, got {vartheta}"),
        ));
    }
    Ok((0.0, (1.0 - 5.0 * vartheta) / 6.0))
}

/// Errors unless `β` lies strictly inside [`admissible_exponents`].
pub fn check_admissible(vartheta: f64, beta: f64) -> Result<()> {
    let (lo, hi) = admissible_exponents(vartheta)?;
    if !(beta > lo && beta < hi) {
        return Err(Error::invalid("beta", format!("must lie in ({lo}, {hi}) for ϑ = {vartheta}, got {beta}")));
    }
    Ok(())
}
