//! Activity sequences λ and the critical threshold Λ_cr.
//!
//! An activity assigns a positive weight λ_j to every nonzero spin value
//! j ∈ ℤ∖{0}; the weight of spin 0 is fixed to 1 by normalization and is
//! never stored. Everything downstream depends on λ either through the
//! total activity ‖λ‖ = Σ_{j≠0} λ_j (field values) or through individual
//! weights (marginals), so two families cover the useful cases: explicit
//! finite tables and two-sided geometric tails λ_j = c·q^{|j|}.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Relative tail mass below which geometric supports are truncated when a
/// finite enumeration (e.g. a marginal table) is required.
const GEOMETRIC_TABLE_TAIL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActivityError {
    #[error("finite-support activity needs at least one entry")]
    EmptySupport,
    #[error("activity for spin {spin} must be positive, got {value}")]
    NonpositiveWeight { spin: i64, value: f64 },
    #[error("spin 0 carries the implicit weight 1 and cannot be listed")]
    ZeroIndex,
    #[error("geometric activity needs c > 0 and 0 < q < 1, got c={c}, q={q}")]
    BadGeometric { c: f64, q: f64 },
    #[error("cannot parse activity `{0}` (expected `geom:c=<f>,q=<f>` or `finite:<j>=<v>,...`)")]
    Parse(String),
}

/// Activity sequence λ = (λ_j)_{j≠0}, with λ₀ ≡ 1 implicit.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivitySpec {
    /// Explicit table on finitely many nonzero spins, sorted by index.
    FiniteSupport(BTreeMap<i64, f64>),
    /// λ_j = c·q^{|j|} for all j ≠ 0.
    TwoSidedGeometric { c: f64, q: f64 },
}

impl ActivitySpec {
    pub fn finite<I: IntoIterator<Item = (i64, f64)>>(entries: I) -> Result<Self, ActivityError> {
        let mut table = BTreeMap::new();
        for (spin, value) in entries {
            if spin == 0 {
                return Err(ActivityError::ZeroIndex);
            }
            if value <= 0.0 || !value.is_finite() {
                return Err(ActivityError::NonpositiveWeight { spin, value });
            }
            table.insert(spin, value);
        }
        if table.is_empty() {
            return Err(ActivityError::EmptySupport);
        }
        Ok(ActivitySpec::FiniteSupport(table))
    }

    pub fn geometric(c: f64, q: f64) -> Result<Self, ActivityError> {
        if !c.is_finite() || !q.is_finite() || c <= 0.0 || q <= 0.0 || q >= 1.0 {
            return Err(ActivityError::BadGeometric { c, q });
        }
        Ok(ActivitySpec::TwoSidedGeometric { c, q })
    }

    /// λ_j for any spin j; λ₀ ≡ 1, and 0 outside a finite support.
    pub fn weight(&self, spin: i64) -> f64 {
        if spin == 0 {
            return 1.0;
        }
        match self {
            ActivitySpec::FiniteSupport(table) => table.get(&spin).copied().unwrap_or(0.0),
            ActivitySpec::TwoSidedGeometric { c, q } => c * q.powi(spin.unsigned_abs() as i32),
        }
    }

    /// ‖λ‖ = Σ_{j≠0} λ_j. Geometric family in closed form: 2cq/(1−q).
    pub fn total_activity(&self) -> f64 {
        match self {
            ActivitySpec::FiniteSupport(table) => table.values().sum(),
            ActivitySpec::TwoSidedGeometric { c, q } => 2.0 * c * q / (1.0 - q),
        }
    }

    /// Σ_{j≠0} λ_j²; geometric closed form 2c²q²/(1−q²).
    pub fn squared_activity_sum(&self) -> f64 {
        match self {
            ActivitySpec::FiniteSupport(table) => table.values().map(|v| v * v).sum(),
            ActivitySpec::TwoSidedGeometric { c, q } => 2.0 * c * c * q * q / (1.0 - q * q),
        }
    }

    pub fn max_weight(&self) -> f64 {
        match self {
            ActivitySpec::FiniteSupport(table) => table.values().cloned().fold(0.0, f64::max),
            ActivitySpec::TwoSidedGeometric { c, q } => c * q,
        }
    }

    /// Spins to enumerate when a finite table of the law is needed: the whole
    /// support for finite activities, and for geometric activities all |j| up
    /// to the point where the remaining tail mass drops below
    /// `GEOMETRIC_TABLE_TAIL` relative to ‖λ‖.
    pub fn table_spins(&self) -> Vec<i64> {
        match self {
            ActivitySpec::FiniteSupport(table) => table.keys().copied().collect(),
            ActivitySpec::TwoSidedGeometric { q, .. } => {
                // tail beyond |j| ≤ m is 2cq^{m+1}/(1−q) = ‖λ‖·q^m
                let mut m = 1usize;
                let mut qm = *q;
                while qm > GEOMETRIC_TABLE_TAIL {
                    qm *= q;
                    m += 1;
                }
                let mut spins: Vec<i64> = (-(m as i64)..=m as i64).filter(|&j| j != 0).collect();
                spins.sort_unstable();
                spins
            }
        }
    }

    /// Inverse-CDF draw over the table P(0) ∝ `weight_of_zero`, P(j) ∝ λ_j.
    ///
    /// Deterministic in `u`. The unit interval is laid out with the zero
    /// bucket first; finite supports follow in ascending index order, the
    /// geometric family by increasing magnitude with −m before +m (which
    /// admits a closed-form inversion through log_q).
    pub fn spin_from_uniform(&self, weight_of_zero: f64, u: f64) -> i64 {
        assert!((0.0..1.0).contains(&u), "u must lie in [0,1), got {u}");
        assert!(weight_of_zero >= 0.0, "weight_of_zero must be nonnegative");
        let total = weight_of_zero + self.total_activity();
        let point = u * total;
        if point < weight_of_zero {
            return 0;
        }
        let v = point - weight_of_zero;
        match self {
            ActivitySpec::FiniteSupport(table) => {
                let mut acc = 0.0;
                let mut last = 0;
                for (&spin, &w) in table {
                    acc += w;
                    last = spin;
                    if v < acc {
                        return spin;
                    }
                }
                // rounding pushed v past the final accumulator
                last
            }
            ActivitySpec::TwoSidedGeometric { c, q } => {
                // mass of |j| ≤ m is M(m) = 2cq(1−q^m)/(1−q)
                let mass = |m: i64| 2.0 * c * q * (1.0 - q.powi(m as i32)) / (1.0 - q);
                let arg = (1.0 - v * (1.0 - q) / (2.0 * c * q)).max(f64::MIN_POSITIVE);
                let mut m = (arg.ln() / q.ln()).floor() as i64 + 1;
                // guard the float inversion against off-by-one rounding
                m = m.max(1);
                while m > 1 && mass(m - 1) > v {
                    m -= 1;
                }
                while mass(m) <= v {
                    m += 1;
                }
                let within = v - mass(m - 1);
                if within < c * q.powi(m as i32) {
                    -m
                } else {
                    m
                }
            }
        }
    }
}

impl fmt::Display for ActivitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivitySpec::FiniteSupport(table) => {
                write!(f, "finite:")?;
                for (i, (spin, v)) in table.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{spin}={v}")?;
                }
                Ok(())
            }
            ActivitySpec::TwoSidedGeometric { c, q } => write!(f, "geom:c={c},q={q}"),
        }
    }
}

impl FromStr for ActivitySpec {
    type Err = ActivityError;

    /// Grammar: `geom:c=<float>,q=<float>` or `finite:<j1>=<v1>,<j2>=<v2>,...`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ActivityError::Parse(s.to_string());
        if let Some(body) = s.strip_prefix("geom:") {
            let (mut c, mut q) = (None, None);
            for part in body.split(',') {
                let (key, value) = part.split_once('=').ok_or_else(bad)?;
                let value: f64 = value.trim().parse().map_err(|_| bad())?;
                match key.trim() {
                    "c" => c = Some(value),
                    "q" => q = Some(value),
                    _ => return Err(bad()),
                }
            }
            ActivitySpec::geometric(c.ok_or_else(bad)?, q.ok_or_else(bad)?)
        } else if let Some(body) = s.strip_prefix("finite:") {
            let mut entries = Vec::new();
            for part in body.split(',') {
                let (spin, value) = part.split_once('=').ok_or_else(bad)?;
                let spin: i64 = spin.trim().parse().map_err(|_| bad())?;
                let value: f64 = value.trim().parse().map_err(|_| bad())?;
                entries.push((spin, value));
            }
            ActivitySpec::finite(entries)
        } else {
            Err(bad())
        }
    }
}

/// Critical total activity Λ_cr(k) = k^k/(k−1)^{k+1}.
///
/// Panics for k < 2; the period-doubling analysis needs branching.
pub fn critical_activity(k: u32) -> f64 {
    assert!(k >= 2, "branching number k must be at least 2, got {k}");
    (k as f64).powi(k as i32) / ((k - 1) as f64).powi(k as i32 + 1)
}

/// Branching number plus activity: everything a model instance needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub k: u32,
    pub activity: ActivitySpec,
}

impl ModelParams {
    pub fn new(k: u32, activity: ActivitySpec) -> Self {
        assert!(k >= 2, "branching number k must be at least 2, got {k}");
        ModelParams { k, activity }
    }

    pub fn norm(&self) -> f64 {
        self.activity.total_activity()
    }
}
