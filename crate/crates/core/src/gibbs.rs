//! Finite-volume measures from boundary-law fields.
//!
//! A multiplier field turns into a tree-indexed Markov chain: the spin at a
//! vertex is 0 with probability 1/(1+α‖λ‖) given a zero parent, takes value
//! j with probability αλ_j/(1+α‖λ‖), and is forced to 0 under a nonzero
//! parent. This module provides the closed-form root/child marginals, exact
//! top-down sampling, the finite-volume configuration weight, and a
//! brute-force enumeration oracle that recomputes marginals from nothing
//! but the weight.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::activity::ActivitySpec;
use crate::bg::BoundaryLawField;
use crate::dynamics::solve_two_cycle;
use crate::path::{volume, Vertex};

/// Brute-force enumeration refuses above this many raw assignments.
pub const ENUMERATION_LIMIT: f64 = 1e8;

const MIN_SAMPLES: usize = 1_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GibbsError {
    #[error("enumeration over {states:.3e} assignments exceeds the {limit:.0e} guard")]
    VolumeTooLarge { states: f64, limit: f64 },
    #[error("brute-force enumeration needs a finite-support activity")]
    NeedsFiniteSupport,
    #[error("need at least {MIN_SAMPLES} samples, got {got}")]
    TooFewSamples { got: usize },
    #[error("target vertex `{0}` lies outside the enumerated volume")]
    TargetOutsideVolume(String),
    #[error("sample does not cover the target vertex `{0}`")]
    TargetNotCovered(String),
}

/// A finite single-site law: spins (0 plus the activity support, ascending)
/// and their probabilities. Geometric activities are truncated where the
/// remaining tail mass is below 1e−13 relative, so `total` can fall that
/// far short of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    pub support: Vec<i64>,
    pub p: Vec<f64>,
}

impl MarginalTable {
    fn from_pairs(pairs: Vec<(i64, f64)>) -> Self {
        let support = pairs.iter().map(|&(s, _)| s).collect();
        let p = pairs.iter().map(|&(_, w)| w).collect();
        MarginalTable { support, p }
    }

    pub fn prob(&self, spin: i64) -> f64 {
        match self.support.binary_search(&spin) {
            Ok(i) => self.p[i],
            Err(_) => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Total-variation distance, accounting for mass either table keeps
/// outside its listed support.
pub fn tv_distance(a: &MarginalTable, b: &MarginalTable) -> f64 {
    let mut spins: Vec<i64> = a.support.iter().chain(&b.support).copied().collect();
    spins.sort_unstable();
    spins.dedup();
    let mut tv: f64 = spins.iter().map(|&s| (a.prob(s) - b.prob(s)).abs()).sum();
    tv += ((1.0 - a.total()) - (1.0 - b.total())).abs();
    0.5 * tv
}

/// Spin law at a vertex with multiplier `alpha` whose parent carries
/// `parent_spin`: δ₀ under a nonzero parent, otherwise
/// P(0) = 1/(1+α‖λ‖) and P(j) = αλ_j/(1+α‖λ‖).
pub fn child_kernel(parent_spin: i64, alpha: f64, activity: &ActivitySpec) -> MarginalTable {
    assert!(alpha >= 0.0, "multiplier must be nonnegative");
    let mut spins = activity.table_spins();
    spins.push(0);
    spins.sort_unstable();
    let pairs = if parent_spin != 0 {
        spins
            .into_iter()
            .map(|s| (s, if s == 0 { 1.0 } else { 0.0 }))
            .collect()
    } else {
        let norm = activity.total_activity();
        let denom = 1.0 + alpha * norm;
        spins
            .into_iter()
            .map(|s| {
                (
                    s,
                    if s == 0 {
                        1.0 / denom
                    } else {
                        alpha * activity.weight(s) / denom
                    },
                )
            })
            .collect()
    };
    MarginalTable::from_pairs(pairs)
}

/// Law of the root spin: P(0) = 1/(1+α₀‖λ‖), P(j) = α₀λ_j/(1+α₀‖λ‖).
pub fn root_marginal(field: &BoundaryLawField, activity: &ActivitySpec) -> MarginalTable {
    child_kernel(0, field.value_at(&Vertex::root()), activity)
}

/// Exact law at any vertex, by the Markov chain along its ancestor line:
/// only P(ancestor = 0) needs tracking, since every nonzero parent forces
/// the same point mass.
pub fn site_marginal(
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    target: &Vertex,
) -> MarginalTable {
    let norm = activity.total_activity();
    let mut parent_zero = 1.0; // virtual ancestor of the root is 0
    for level in 0..target.level() {
        let alpha = field.value_at(&target.prefix(level));
        let stay = 1.0 / (1.0 + alpha * norm);
        parent_zero = (1.0 - parent_zero) + parent_zero * stay;
    }
    let alpha = field.value_at(target);
    let denom = 1.0 + alpha * norm;
    let mut spins = activity.table_spins();
    spins.push(0);
    spins.sort_unstable();
    let pairs = spins
        .into_iter()
        .map(|s| {
            let p = if s == 0 {
                1.0 - parent_zero * alpha * norm / denom
            } else {
                parent_zero * alpha * activity.weight(s) / denom
            };
            (s, p)
        })
        .collect();
    MarginalTable::from_pairs(pairs)
}

/// A spin assignment with the hard-core constraint satisfied on every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleConfiguration {
    pub spins: BTreeMap<Vertex, i64>,
}

impl AdmissibleConfiguration {
    pub fn spin(&self, v: &Vertex) -> Option<i64> {
        self.spins.get(v).copied()
    }

    /// Every covered edge satisfies σ(x)·σ(y) = 0.
    pub fn is_admissible(&self) -> bool {
        self.spins.iter().all(|(v, &s)| match v.parent() {
            None => true,
            Some(p) => match self.spins.get(&p) {
                None => true,
                Some(&ps) => ps == 0 || s == 0,
            },
        })
    }
}

/// Draw one configuration on V_m: root from [`root_marginal`], children
/// top-down from [`child_kernel`]. ChaCha8 keyed by `seed`, so the output
/// is a pure function of (field, activity, m, seed). Vertices blocked by a
/// nonzero parent consume no randomness.
pub fn sample_configuration(
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    k: u32,
    m: usize,
    seed: u64,
) -> AdmissibleConfiguration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spins: BTreeMap<Vertex, i64> = BTreeMap::new();
    for v in volume(k, m) {
        let parent_spin = v.parent().map(|p| spins[&p]).unwrap_or(0);
        let spin = if parent_spin != 0 {
            0
        } else {
            let alpha = field.value_at(&v);
            if alpha == 0.0 {
                0
            } else {
                activity.spin_from_uniform(1.0 / alpha, rng.gen::<f64>())
            }
        };
        spins.insert(v, spin);
    }
    AdmissibleConfiguration { spins }
}

/// Weight of a total configuration on V_m ∪ W_{m+1}: zero if any edge is
/// inadmissible, else Π_{x∈V_m} λ_{σ(x)} · Π_{y∈W_{m+1}} w_y with w_y = 1
/// for σ(y) = 0 and α_y·λ_{σ(y)} otherwise.
pub fn finite_volume_weight(
    config: &AdmissibleConfiguration,
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    k: u32,
    m: usize,
) -> f64 {
    let verts = volume(k, m + 1);
    let spins: Vec<i64> = verts
        .iter()
        .map(|v| {
            config
                .spin(v)
                .unwrap_or_else(|| panic!("configuration misses vertex `{v}`; it must be total"))
        })
        .collect();
    let parents = parent_indices(&verts);
    assignment_weight(&spins, &verts, &parents, field, activity, m)
}

fn parent_indices(verts: &[Vertex]) -> Vec<usize> {
    let index: BTreeMap<&Vertex, usize> = verts.iter().zip(0..).collect();
    verts
        .iter()
        .map(|v| match v.parent() {
            None => usize::MAX,
            Some(p) => index[&p],
        })
        .collect()
}

fn assignment_weight(
    spins: &[i64],
    verts: &[Vertex],
    parents: &[usize],
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    m: usize,
) -> f64 {
    let mut w = 1.0;
    for i in 0..spins.len() {
        let s = spins[i];
        if parents[i] != usize::MAX && spins[parents[i]] != 0 && s != 0 {
            return 0.0;
        }
        if verts[i].level() <= m {
            w *= activity.weight(s);
        } else if s != 0 {
            w *= field.value_at(&verts[i]) * activity.weight(s);
        }
    }
    w
}

/// Spin choices, volume vertices in level order, and per-vertex parent
/// indices for a brute-force pass.
type EnumerationSetup = (Vec<i64>, Vec<Vertex>, Vec<usize>);

fn enumeration_setup(
    activity: &ActivitySpec,
    k: u32,
    m: usize,
) -> Result<EnumerationSetup, GibbsError> {
    let ActivitySpec::FiniteSupport(table) = activity else {
        return Err(GibbsError::NeedsFiniteSupport);
    };
    let mut choices: Vec<i64> = table.keys().copied().collect();
    choices.push(0);
    choices.sort_unstable();
    let verts = volume(k, m + 1);
    let states = (choices.len() as f64).powi(verts.len() as i32);
    if states > ENUMERATION_LIMIT {
        return Err(GibbsError::VolumeTooLarge {
            states,
            limit: ENUMERATION_LIMIT,
        });
    }
    let parents = parent_indices(&verts);
    Ok((choices, verts, parents))
}

fn for_each_assignment(choices: usize, slots: usize, mut visit: impl FnMut(&[usize])) {
    let mut digits = vec![0usize; slots];
    loop {
        visit(&digits);
        let mut pos = slots;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < choices {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Exact single-site marginal on V_m ∪ W_{m+1} by full enumeration of
/// (support ∪ {0})^volume — the oracle the closed forms are tested against.
pub fn brute_force_marginal(
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    k: u32,
    m: usize,
    target: &Vertex,
) -> Result<MarginalTable, GibbsError> {
    let (choices, verts, parents) = enumeration_setup(activity, k, m)?;
    let target_idx = verts
        .iter()
        .position(|v| v == target)
        .ok_or_else(|| GibbsError::TargetOutsideVolume(target.to_string()))?;
    let mut mass = vec![0.0f64; choices.len()];
    let mut z = 0.0f64;
    let mut spins = vec![0i64; verts.len()];
    for_each_assignment(choices.len(), verts.len(), |digits| {
        for (slot, &c) in digits.iter().enumerate() {
            spins[slot] = choices[c];
        }
        let w = assignment_weight(&spins, &verts, &parents, field, activity, m);
        if w > 0.0 {
            mass[digits[target_idx]] += w;
            z += w;
        }
    });
    Ok(MarginalTable::from_pairs(
        choices
            .iter()
            .zip(&mass)
            .map(|(&s, &w)| (s, w / z))
            .collect(),
    ))
}

/// Joint law on a parent–child edge, by the same enumeration.
/// Entry `p[i][j]` is P(parent = support[i], child = support[j]).
#[derive(Debug, Clone)]
pub struct EdgeJointTable {
    pub support: Vec<i64>,
    pub p: Vec<Vec<f64>>,
}

pub fn brute_force_edge_joint(
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    k: u32,
    m: usize,
    parent: &Vertex,
    child: &Vertex,
) -> Result<EdgeJointTable, GibbsError> {
    assert_eq!(
        child.parent().as_ref(),
        Some(parent),
        "vertices must form an edge"
    );
    let (choices, verts, parents) = enumeration_setup(activity, k, m)?;
    let parent_idx = verts
        .iter()
        .position(|v| v == parent)
        .ok_or_else(|| GibbsError::TargetOutsideVolume(parent.to_string()))?;
    let child_idx = verts
        .iter()
        .position(|v| v == child)
        .ok_or_else(|| GibbsError::TargetOutsideVolume(child.to_string()))?;
    let mut mass = vec![vec![0.0f64; choices.len()]; choices.len()];
    let mut z = 0.0f64;
    let mut spins = vec![0i64; verts.len()];
    for_each_assignment(choices.len(), verts.len(), |digits| {
        for (slot, &c) in digits.iter().enumerate() {
            spins[slot] = choices[c];
        }
        let w = assignment_weight(&spins, &verts, &parents, field, activity, m);
        if w > 0.0 {
            mass[digits[parent_idx]][digits[child_idx]] += w;
            z += w;
        }
    });
    for row in &mut mass {
        for entry in row.iter_mut() {
            *entry /= z;
        }
    }
    Ok(EdgeJointTable {
        support: choices,
        p: mass,
    })
}

/// The edge double sum Σ_i Σ_j z_{y,j}·Q(i,j)·z_{x,i} with Q(i,j) = a_{ij}λ_i,
/// in closed form α_x·Σ_{i≠0}λ_i² + 1 + α_y·‖λ‖, against the band bound
/// with β* (or the universal α ≤ 1 bound when no 2-cycle exists).
#[derive(Debug, Clone, Copy)]
pub struct NormalisabilityCheck {
    pub double_sum: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn normalisability_check(
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    k: u32,
    x: &Vertex,
) -> NormalisabilityCheck {
    let y = x
        .parent()
        .expect("normalisability is an edge check; pass a non-root vertex");
    let alpha_x = field.value_at(x);
    let alpha_y = field.value_at(&y);
    let squared = activity.squared_activity_sum();
    let norm = activity.total_activity();
    let double_sum = alpha_x * squared + 1.0 + alpha_y * norm;
    let band_high = match field {
        BoundaryLawField::Path(f) => f.beta_star,
        _ => match solve_two_cycle(norm, k, 1e-12) {
            Ok(Some(cycle)) => cycle.beta_star,
            _ => 1.0,
        },
    };
    let bound = band_high * squared + 1.0 + band_high * norm;
    NormalisabilityCheck {
        double_sum,
        bound,
        ok: double_sum.is_finite() && double_sum <= bound,
    }
}

/// Empirical marginal at a vertex from a batch of sampled configurations.
pub fn empirical_marginal(
    samples: &[AdmissibleConfiguration],
    target: &Vertex,
) -> Result<MarginalTable, GibbsError> {
    if samples.len() < MIN_SAMPLES {
        return Err(GibbsError::TooFewSamples { got: samples.len() });
    }
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for sample in samples {
        let spin = sample
            .spin(target)
            .ok_or_else(|| GibbsError::TargetNotCovered(target.to_string()))?;
        *counts.entry(spin).or_default() += 1;
    }
    let n = samples.len() as f64;
    Ok(MarginalTable::from_pairs(
        counts.into_iter().map(|(s, c)| (s, c as f64 / n)).collect(),
    ))
}

/// Total-variation distance between the empirical law of `samples` at
/// `target` and the exact chain marginal.
pub fn empirical_vs_exact(
    samples: &[AdmissibleConfiguration],
    field: &BoundaryLawField,
    activity: &ActivitySpec,
    target: &Vertex,
) -> Result<f64, GibbsError> {
    let empirical = empirical_marginal(samples, target)?;
    let exact = site_marginal(field, activity, target);
    Ok(tv_distance(&empirical, &exact))
}
