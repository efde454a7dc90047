//! Path-interpolating boundary-law fields.
//!
//! For Λ ∈ (Λ_cr, 1/(β*−α*)) every infinite path π through the rooted tree
//! carries a boundary law z^π that equals the parity-keyed constants away
//! from the path and interpolates between the two period-two phases across
//! it. The root value z₀(t), as a function of the path code t ∈ [0,1], is
//! strictly decreasing and Hölder continuous with exponent −ln θ/ln k, so
//! distinct t give distinct laws — and distinct measures.
//!
//! Off the path the field is forced: a vertex left of the path carries α*
//! at even levels and β* at odd levels, mirrored on the right (the unique
//! completion consistent with the recursion, since f swaps α* and β*). On
//! the path the values follow a backward recursion contracting at rate
//! θ = Λβ*/(1+α*Λ) per level, which yields a certified truncation error:
//! seeding level N anywhere inside [α*, β*] moves the root value by at most
//! 2β*θᴺ.

use thiserror::Error;

use crate::activity::ModelParams;
use crate::dynamics::{DynamicsError, FixedPointData, Regime};
use crate::path::{branch_side, BranchSide, PathCode, Vertex};

#[derive(Debug, Error)]
pub enum BgError {
    #[error(
        "path fields need the supercritical contractive regime \
         (Λ_cr < Λ < 1/(β*−α*)); Λ = {norm} with k = {k} is {regime:?}"
    )]
    Regime { norm: f64, k: u32, regime: Regime },
    #[error(
        "depth cap {max_depth} cannot certify tolerance {tol} \
         (needs {required} levels; achieved error bound {achieved_bound:.3e})"
    )]
    DepthCapped {
        required: usize,
        max_depth: usize,
        tol: f64,
        achieved_bound: f64,
    },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Path(#[from] crate::path::PathError),
    #[error("scan grid must be strictly increasing within [0,1]")]
    GridNotSorted,
    #[error("z0 failed strict decrease between t = {t_lo} and t = {t_hi}: {z_lo} vs {z_hi}")]
    MonotonicityViolation {
        t_lo: String,
        t_hi: String,
        z_lo: f64,
        z_hi: f64,
    },
    #[error("Hölder bound violated between t = {t_lo} and t = {t_hi}: |Δz0| = {dz} > {bound}")]
    HolderViolation {
        t_lo: String,
        t_hi: String,
        dz: f64,
        bound: f64,
    },
}

/// Model, solved fixed-point data (must be contractive), target tolerance
/// for root values, and a cap on the recursion depth.
#[derive(Debug, Clone)]
pub struct BgParams {
    pub model: ModelParams,
    pub fp: FixedPointData,
    pub tol: f64,
    pub max_depth: usize,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: usize = 200_000;

impl BgParams {
    pub fn new(model: ModelParams, tol: f64, max_depth: usize) -> Result<Self, BgError> {
        assert!(tol > 0.0, "tolerance must be positive");
        let fp = FixedPointData::solve(model.k, model.norm(), 1e-12)?;
        if fp.regime != Regime::SupercriticalContractive {
            return Err(BgError::Regime {
                norm: model.norm(),
                k: model.k,
                regime: fp.regime,
            });
        }
        Ok(BgParams {
            model,
            fp,
            tol,
            max_depth,
        })
    }

    fn cycle(&self) -> (f64, f64) {
        (self.fp.alpha_star.unwrap(), self.fp.beta_star.unwrap())
    }

    fn theta(&self) -> f64 {
        self.fp.theta.unwrap()
    }

    /// Smallest N with 2β*θᴺ < tol, and that bound.
    fn certified_depth(&self) -> (usize, f64) {
        let theta = self.theta();
        let mut bound = 2.0 * self.cycle().1;
        let mut n = 0usize;
        while bound >= self.tol && n <= self.max_depth {
            bound *= theta;
            n += 1;
        }
        (n, bound)
    }
}

/// Off-path multiplier: left of the path α* at even levels and β* at odd
/// levels, mirrored on the right. The root is level 0.
pub fn offpath_value(side: BranchSide, level: usize, fp: &FixedPointData) -> f64 {
    let cycle = fp.cycle().expect("off-path values need the 2-cycle");
    let even = level % 2 == 0;
    match side {
        BranchSide::Left => {
            if even {
                cycle.alpha_star
            } else {
                cycle.beta_star
            }
        }
        BranchSide::Right => {
            if even {
                cycle.beta_star
            } else {
                cycle.alpha_star
            }
        }
        BranchSide::OnPath => panic!("off-path value queried on the path"),
    }
}

/// Backward pass of the on-path recursion from level `digits.len()` down to
/// the root, keeping u_0..=u_keep. Each level applies
/// u_{l−1} = (1+Λc_l)^{−i_l} (1+Λd_l)^{−(k−1−i_l)} (1+Λu_l)^{−1}
/// with c_l, d_l the off-path constants at level l.
fn backward_pass(digits: &[u8], params: &BgParams, keep: usize, seed: f64) -> Vec<f64> {
    let n = digits.len();
    assert!(n > keep, "need strictly more digits than kept levels");
    let k = params.model.k as i32;
    let norm = params.model.norm();
    let fp = &params.fp;
    let mut kept = vec![f64::NAN; keep + 1];
    let mut u = seed;
    for l in (1..=n).rev() {
        let i = i32::from(digits[l - 1]);
        let c = offpath_value(BranchSide::Left, l, fp);
        let d = offpath_value(BranchSide::Right, l, fp);
        u = (1.0 + norm * c).powi(-i)
            * (1.0 + norm * d).powi(-(k - 1 - i))
            * (1.0 + norm * u).powi(-1);
        if l - 1 <= keep {
            kept[l - 1] = u;
        }
    }
    kept
}

#[derive(Debug, Clone, Copy)]
pub struct BgRootValue {
    pub z0: f64,
    pub depth_used: usize,
    pub error_bound: f64,
}

/// Root multiplier z₀(t), by backward recursion from the certified depth
/// with the midpoint seed. The result is independent of the seed up to
/// `error_bound` = 2β*θᴺ.
pub fn bg_root_value(t: &PathCode, params: &BgParams) -> Result<BgRootValue, BgError> {
    let (alpha, beta) = params.cycle();
    bg_root_value_with_seed(t, params, 0.5 * (alpha + beta))
}

/// Same as [`bg_root_value`] with an explicit seed in [α*, β*].
pub fn bg_root_value_with_seed(
    t: &PathCode,
    params: &BgParams,
    seed: f64,
) -> Result<BgRootValue, BgError> {
    let (depth, bound) = params.certified_depth();
    if bound >= params.tol {
        return Err(BgError::DepthCapped {
            required: depth + 1,
            max_depth: params.max_depth,
            tol: params.tol,
            achieved_bound: bound,
        });
    }
    let digits = t.digits(depth.max(1));
    Ok(bg_root_value_from_digits(&digits, params, seed))
}

/// Root value from an explicit digit sequence (any representation of t);
/// the error bound is 2β*θᴺ for N = digits.len().
pub fn bg_root_value_from_digits(digits: &[u8], params: &BgParams, seed: f64) -> BgRootValue {
    let (_, beta) = params.cycle();
    let kept = backward_pass(digits, params, 0, seed);
    BgRootValue {
        z0: kept[0],
        depth_used: digits.len(),
        error_bound: 2.0 * beta * params.theta().powi(digits.len() as i32),
    }
}

/// The on-path portion of a field together with everything needed to
/// reconstruct any multiplier on V_m on demand.
#[derive(Debug, Clone)]
pub struct BgField {
    pub t: PathCode,
    /// Covered volume depth m: values are defined on V_m.
    pub depth: usize,
    /// First m digits of the path.
    pub path_digits: Vec<u8>,
    /// u_0..=u_m along the path.
    pub path_values: Vec<f64>,
    pub alpha_star: f64,
    pub beta_star: f64,
    /// Certified bound on every stored path value.
    pub error_bound: f64,
}

/// A per-vertex multiplier field α_x (z_x = α_x·λ).
///
/// `Constant` and `PeriodTwo` cover the translation-invariant and the two
/// period-two boundary laws; `Path` is the interpolating field. Off-path
/// values of a `Path` field are parity constants and are computed on
/// demand — only the m+1 on-path values are stored.
#[derive(Debug, Clone)]
pub enum BoundaryLawField {
    Constant { value: f64 },
    PeriodTwo { even: f64, odd: f64 },
    Path(BgField),
}

impl BoundaryLawField {
    pub fn constant(value: f64) -> Self {
        assert!(value >= 0.0);
        BoundaryLawField::Constant { value }
    }

    pub fn period_two(even: f64, odd: f64) -> Self {
        assert!(even > 0.0 && odd > 0.0);
        BoundaryLawField::PeriodTwo { even, odd }
    }

    /// Multiplier at a vertex. Path fields cover V_m only.
    pub fn value_at(&self, v: &Vertex) -> f64 {
        match self {
            BoundaryLawField::Constant { value } => *value,
            BoundaryLawField::PeriodTwo { even, odd } => {
                if v.level() % 2 == 0 {
                    *even
                } else {
                    *odd
                }
            }
            BoundaryLawField::Path(field) => {
                assert!(
                    v.level() <= field.depth,
                    "field covers V_{}, queried level {}",
                    field.depth,
                    v.level()
                );
                match branch_side(v, &field.path_digits) {
                    BranchSide::OnPath => field.path_values[v.level()],
                    side => {
                        let even = v.level() % 2 == 0;
                        let left = matches!(side, BranchSide::Left);
                        if left == even {
                            field.alpha_star
                        } else {
                            field.beta_star
                        }
                    }
                }
            }
        }
    }
}

/// Build the interpolating field on V_m for the path coded by t.
///
/// The backward recursion starts at depth N = m + N_tol so that every
/// stored on-path value carries the certified bound 2β*θ^{N−m} < tol.
pub fn bg_field(t: &PathCode, params: &BgParams, m: usize) -> Result<BoundaryLawField, BgError> {
    let (n_tol, bound) = params.certified_depth();
    let total = m + n_tol.max(1);
    if bound >= params.tol || total > params.max_depth {
        let reachable = params.max_depth.saturating_sub(m) as i32;
        return Err(BgError::DepthCapped {
            required: total,
            max_depth: params.max_depth,
            tol: params.tol,
            achieved_bound: 2.0 * params.cycle().1 * params.theta().powi(reachable),
        });
    }
    let digits = t.digits(total);
    let (alpha_star, beta_star) = params.cycle();
    let path_values = backward_pass(&digits, params, m, 0.5 * (alpha_star + beta_star));
    Ok(BoundaryLawField::Path(BgField {
        t: t.clone(),
        depth: m,
        path_digits: digits[..m].to_vec(),
        path_values,
        alpha_star,
        beta_star,
        error_bound: 2.0 * beta_star * params.theta().powi((total - m) as i32),
    }))
}

/// Worst violation of the consistency equation over the internal vertices
/// of V_depth: max |α_x · Π_{y∈S(x)} (1 + Λ α_y) − 1|.
pub fn verify_consistency(field: &BoundaryLawField, model: &ModelParams, depth: usize) -> f64 {
    assert!(depth >= 1, "consistency needs at least one internal level");
    let norm = model.norm();
    let mut worst: f64 = 0.0;
    for v in crate::path::volume(model.k, depth - 1) {
        let a = field.value_at(&v);
        let mut product = 1.0;
        for child in v.children(model.k) {
            product *= 1.0 + norm * field.value_at(&child);
        }
        worst = worst.max((a * product - 1.0).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy)]
pub struct TwoRepCheck {
    pub z0_terminating: f64,
    pub z0_trailing: f64,
    pub difference: f64,
}

/// Run the root recursion on both expansions of a t ∈ Q_k. The two results
/// must agree within 2·tol — the field does not depend on the coding.
pub fn two_representation_check(
    t: &PathCode,
    params: &BgParams,
    n_extra: usize,
) -> Result<TwoRepCheck, BgError> {
    let (n_tol, bound) = params.certified_depth();
    if bound >= params.tol {
        return Err(BgError::DepthCapped {
            required: n_tol + 1,
            max_depth: params.max_depth,
            tol: params.tol,
            achieved_bound: bound,
        });
    }
    let depth = (n_tol + n_extra).max(1);
    let seed = {
        let (a, b) = params.cycle();
        0.5 * (a + b)
    };
    let first = t.digits(depth);
    let second = t.second_representation(depth)?;
    let z1 = bg_root_value_from_digits(&first, params, seed).z0;
    let z2 = bg_root_value_from_digits(&second, params, seed).z0;
    Ok(TwoRepCheck {
        z0_terminating: z1,
        z0_trailing: z2,
        difference: (z1 - z2).abs(),
    })
}

#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub t: PathCode,
    pub z0: f64,
    pub error_bound: f64,
}

/// Evaluate z₀ on an ascending grid and enforce the two scan
/// postconditions: strict decrease, and the Hölder estimate
/// |Δz₀| ≤ 4β*θᴺ for every adjacent pair with |Δt| ≤ k^{−N−1}.
pub fn scan_t(params: &BgParams, grid: &[PathCode]) -> Result<Vec<ScanPoint>, BgError> {
    use num_bigint::BigInt;
    use num_rational::BigRational;

    for pair in grid.windows(2) {
        if pair[0].value() >= pair[1].value() {
            return Err(BgError::GridNotSorted);
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    for t in grid {
        let root = bg_root_value(t, params)?;
        points.push(ScanPoint {
            t: t.clone(),
            z0: root.z0,
            error_bound: root.error_bound,
        });
    }
    let (_, beta) = params.cycle();
    let theta = params.theta();
    let inv_k = BigRational::new(BigInt::from(1), BigInt::from(params.model.k));
    for pair in points.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        if hi.z0 >= lo.z0 {
            return Err(BgError::MonotonicityViolation {
                t_lo: lo.t.to_string(),
                t_hi: hi.t.to_string(),
                z_lo: lo.z0,
                z_hi: hi.z0,
            });
        }
        let dt = hi.t.value() - lo.t.value();
        if dt > inv_k {
            continue; // Hölder premise |Δt| ≤ k^{−1} not met
        }
        let mut n: i32 = 0;
        let mut next = &inv_k * &inv_k;
        while dt <= next {
            n += 1;
            next *= &inv_k;
        }
        let bound = 4.0 * beta * theta.powi(n);
        let dz = lo.z0 - hi.z0;
        if dz > bound {
            return Err(BgError::HolderViolation {
                t_lo: lo.t.to_string(),
                t_hi: hi.t.to_string(),
                dz,
                bound,
            });
        }
    }
    Ok(points)
}

/// The uniform rational grid {i/(count−1)} in [0,1].
pub fn uniform_grid(k: u32, count: usize) -> Vec<PathCode> {
    assert!(count >= 2);
    (0..count)
        .map(|i| {
            PathCode::from_ratio(i as i64, (count - 1) as i64, k).expect("grid point in [0,1]")
        })
        .collect()
}
