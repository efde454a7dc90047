//! The scalar boundary-law dynamics f(x) = (1 + xΛ)^{−k}.
//!
//! Consistent boundary laws proportional to λ reduce to orbits of the
//! one-dimensional map f. Below Λ_cr = k^k/(k−1)^{k+1} the unique fixed
//! point ξ attracts everything; above it a 2-cycle (α*, β*) appears around
//! ξ and carries the period-two phases. The contraction constant
//! θ = Λβ*/(1+α*Λ) decides whether backward recursions along a path
//! converge (θ < 1), which is what the interpolating construction in
//! [`crate::bg`] needs.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::activity::critical_activity;

/// Relative distance to Λ_cr below which the model is treated as critical:
/// the 2-cycle bracket is numerically invisible inside this window.
pub const NEAR_CRITICAL_REL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(
        "no 2-cycle bracket found on (0, ξ) although Λ = {norm} exceeds Λ_cr = {critical}; \
         near-tangency degeneracy"
    )]
    NearTangency { norm: f64, critical: f64 },
    #[error("orbit did not settle within {max_steps} steps (tolerance too tight for this Λ?)")]
    NotConverged { max_steps: u64 },
}

/// One application of f_Λ. Strictly decreasing in x; f(0) = 1.
pub fn f_map(x: f64, norm: f64, k: u32) -> f64 {
    assert!(x >= 0.0, "f is only defined for x ≥ 0, got {x}");
    assert!(norm > 0.0 && k >= 2);
    (1.0 + x * norm).powi(-(k as i32))
}

/// g = f∘f, strictly increasing in x.
pub fn g_map(x: f64, norm: f64, k: u32) -> f64 {
    f_map(f_map(x, norm, k), norm, k)
}

/// The unique root ξ ∈ (0,1) of φ(x) = x(1+xΛ)^k − 1, i.e. the fixed point
/// of f. φ(0) = −1, φ(1) > 0 and φ is strictly increasing, so bisection is
/// exact; it runs to floating-point resolution and `tol` only bounds the
/// accepted residual.
pub fn solve_fixed_point(norm: f64, k: u32, tol: f64) -> f64 {
    assert!(norm > 0.0 && k >= 2 && tol > 0.0);
    let phi = |x: f64| x * (1.0 + x * norm).powi(k as i32) - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    assert!(
        phi(root).abs() <= tol,
        "fixed-point residual {} exceeds tol {tol}",
        phi(root).abs()
    );
    root
}

/// A period-two orbit of f: f(α*) = β*, f(β*) = α*, with α* < ξ < β*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCycle {
    pub alpha_star: f64,
    pub beta_star: f64,
}

/// Find the 2-cycle of f when Λ > Λ_cr(k).
///
/// Returns `Ok(None)` for Λ ≤ Λ_cr (within the near-critical window, where
/// the equation has no positive solution with distinct components). Above
/// Λ_cr the root α* of g(x) = x on (0, ξ) is bracketed by scanning 1024
/// uniform points — g(0⁺) > 0 and g(ξ⁻) < ξ⁻ — and bisected to resolution;
/// β* = f(α*). A missing bracket despite a supercritical Λ is reported as
/// [`DynamicsError::NearTangency`].
pub fn solve_two_cycle(norm: f64, k: u32, tol: f64) -> Result<Option<TwoCycle>, DynamicsError> {
    assert!(norm > 0.0 && k >= 2 && tol > 0.0);
    let critical = critical_activity(k);
    if norm <= critical * (1.0 + NEAR_CRITICAL_REL) {
        return Ok(None);
    }
    let xi = solve_fixed_point(norm, k, tol.max(1e-12));
    let gap = |x: f64| g_map(x, norm, k) - x;

    // g(0) − 0 = f(1) > 0 anchors the scan: deep in the supercritical
    // regime α* can undercut even the first uniform grid point
    const SCAN_POINTS: usize = 1024;
    let mut bracket = None;
    let mut prev_x = 0.0;
    let mut prev_v = gap(0.0);
    for i in 1..SCAN_POINTS {
        let x = xi * i as f64 / SCAN_POINTS as f64;
        let v = gap(x);
        if prev_v > 0.0 && v <= 0.0 {
            bracket = Some((prev_x, x));
            break;
        }
        prev_x = x;
        prev_v = v;
    }
    let (mut lo, mut hi) = bracket.ok_or(DynamicsError::NearTangency { norm, critical })?;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha_star = 0.5 * (lo + hi);
    let beta_star = f_map(alpha_star, norm, k);
    let residual = (f_map(beta_star, norm, k) - alpha_star).abs();
    assert!(
        residual <= tol,
        "2-cycle residual {residual} exceeds tol {tol} at Λ={norm}, k={k}"
    );
    Ok(Some(TwoCycle {
        alpha_star,
        beta_star,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    SupercriticalContractive,
    SupercriticalNoncontractive,
}

/// Contraction data of a 2-cycle: θ = Λβ*/(1+α*Λ), and the Hölder exponent
/// −ln θ/ln k when θ < 1. θ < 1 is equivalent to Λ(β*−α*) < 1.
pub fn contraction_data(norm: f64, k: u32, cycle: &TwoCycle) -> (f64, Option<f64>, Regime) {
    let theta = norm * cycle.beta_star / (1.0 + cycle.alpha_star * norm);
    if theta < 1.0 {
        let holder = -theta.ln() / (k as f64).ln();
        (theta, Some(holder), Regime::SupercriticalContractive)
    } else {
        (theta, None, Regime::SupercriticalNoncontractive)
    }
}

/// Fixed point, optional 2-cycle and contraction data for one (k, Λ).
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointData {
    pub k: u32,
    pub norm: f64,
    pub xi: f64,
    pub alpha_star: Option<f64>,
    pub beta_star: Option<f64>,
    pub theta: Option<f64>,
    pub holder: Option<f64>,
    pub regime: Regime,
}

impl FixedPointData {
    pub fn solve(k: u32, norm: f64, tol: f64) -> Result<Self, DynamicsError> {
        let xi = solve_fixed_point(norm, k, tol);
        match solve_two_cycle(norm, k, tol)? {
            None => Ok(FixedPointData {
                k,
                norm,
                xi,
                alpha_star: None,
                beta_star: None,
                theta: None,
                holder: None,
                regime: Regime::Subcritical,
            }),
            Some(cycle) => {
                let (theta, holder, regime) = contraction_data(norm, k, &cycle);
                Ok(FixedPointData {
                    k,
                    norm,
                    xi,
                    alpha_star: Some(cycle.alpha_star),
                    beta_star: Some(cycle.beta_star),
                    theta: Some(theta),
                    holder,
                    regime,
                })
            }
        }
    }

    pub fn cycle(&self) -> Option<TwoCycle> {
        match (self.alpha_star, self.beta_star) {
            (Some(alpha_star), Some(beta_star)) => Some(TwoCycle {
                alpha_star,
                beta_star,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    ConvergesToXi,
    EvenToAlphaStarOddToBetaStar,
    EvenToBetaStarOddToAlphaStar,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitClassification {
    pub class: OrbitClass,
    pub even_limit: f64,
    pub odd_limit: f64,
    pub steps: u64,
}

/// Iterate α_{n+1} = f(α_n) from `alpha0` and classify the limit behaviour.
///
/// Convergence of the even/odd subsequences is declared once
/// max(|α_{2n}−α_{2n−2}|, |α_{2n+1}−α_{2n−1}|) < tol holds for three
/// consecutive double-steps. Subcritical Λ always converges to ξ; above
/// Λ_cr the two subsequences settle on the 2-cycle, even ↦ α* exactly when
/// alpha0 < ξ. Seeds within `tol` of ξ classify as converging to ξ.
pub fn classify_orbit(
    alpha0: f64,
    norm: f64,
    k: u32,
    tol: f64,
    max_steps: u64,
) -> Result<OrbitClassification, DynamicsError> {
    assert!(
        alpha0 > 0.0 && alpha0 <= 1.0,
        "alpha0 must lie in (0,1], got {alpha0}"
    );
    let xi = solve_fixed_point(norm, k, tol.max(1e-12));
    if (alpha0 - xi).abs() <= tol {
        return Ok(OrbitClassification {
            class: OrbitClass::ConvergesToXi,
            even_limit: xi,
            odd_limit: xi,
            steps: 0,
        });
    }
    // near-tangency Λ behave as critical at this resolution
    let cycle = solve_two_cycle(norm, k, tol.max(1e-12)).unwrap_or(None);

    let mut even = alpha0;
    let mut odd = f_map(alpha0, norm, k);
    let mut steps: u64 = 1;
    let mut streak = 0u32;
    let converged = loop {
        if steps + 2 > max_steps {
            break false;
        }
        let next_even = f_map(odd, norm, k);
        let next_odd = f_map(next_even, norm, k);
        steps += 2;
        let delta = (next_even - even).abs().max((next_odd - odd).abs());
        even = next_even;
        odd = next_odd;
        if delta < tol {
            streak += 1;
            if streak >= 3 {
                break true;
            }
        } else {
            streak = 0;
        }
    };
    if !converged {
        return Err(DynamicsError::NotConverged { max_steps });
    }

    let class = match cycle {
        None => OrbitClass::ConvergesToXi,
        Some(c) => {
            let cycle_gap = c.beta_star - c.alpha_star;
            if (even - odd).abs() <= 0.5 * cycle_gap {
                // both subsequences collapsed onto ξ: seed was on the fixed point
                OrbitClass::ConvergesToXi
            } else if (even - c.alpha_star).abs() < (even - c.beta_star).abs() {
                OrbitClass::EvenToAlphaStarOddToBetaStar
            } else {
                OrbitClass::EvenToBetaStarOddToAlphaStar
            }
        }
    };
    Ok(OrbitClassification {
        class,
        even_limit: even,
        odd_limit: odd,
        steps,
    })
}

/// Iterate f from `grid_size` uniform seeds in (0,1) and collect the
/// eventual periods observed, up to `max_period`.
///
/// A period p is recorded once |x_n − x_{n−p}| and |x_{n−1} − x_{n−1−p}|
/// both drop below 1e−8 with p minimal, and — for p > 1 — the p candidate
/// cycle points are pairwise separated by more than 1e−6. The separation
/// rule matters: f′(ξ) < 0 makes subcritical orbits spiral into ξ, so the
/// ghost period-2 difference vanishes before the period-1 difference does.
/// Since f is strictly decreasing only p ∈ {1, 2} can occur; seeds that
/// fail to settle within the step budget contribute nothing. Exactly at
/// Λ_cr the even/odd subsequences approach ξ only algebraically and the
/// scan may resolve the asymptotic pair as a tight 2-cycle — the period
/// split is reliable only away from the tangency.
pub fn cycle_scan(norm: f64, k: u32, max_period: usize, grid_size: usize) -> BTreeSet<usize> {
    assert!(max_period >= 2 && grid_size >= 1);
    const DETECT_EPS: f64 = 1e-8;
    const SEPARATION_EPS: f64 = 1e-6;
    const MAX_STEPS: usize = 1_000_000;

    let window = max_period + 2;
    let mut periods = BTreeSet::new();
    for s in 1..=grid_size {
        let mut history = Vec::with_capacity(window);
        let mut x = s as f64 / (grid_size + 1) as f64;
        history.push(x);
        'steps: for step in 0..MAX_STEPS {
            x = f_map(x, norm, k);
            if history.len() == window {
                history.remove(0);
            }
            history.push(x);
            if history.len() == window && step % 16 == 0 {
                let last = window - 1;
                'candidates: for p in 1..=max_period {
                    if (history[last] - history[last - p]).abs() > DETECT_EPS
                        || (history[last - 1] - history[last - 1 - p]).abs() > DETECT_EPS
                    {
                        continue;
                    }
                    let points = &history[last + 1 - p..=last];
                    for i in 0..p {
                        for j in i + 1..p {
                            if (points[i] - points[j]).abs() <= SEPARATION_EPS {
                                // unresolved: could still be relaxing onto a
                                // shorter cycle
                                continue 'candidates;
                            }
                        }
                    }
                    periods.insert(p);
                    break 'steps;
                }
            }
        }
    }
    periods
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent closed-form oracle: for k = 2 the 2-cycle components are
    // the roots of x² − (1 − 2/Λ)x + 1/Λ² = 0, which follows from
    // eliminating the cycle relations algebraically.
    fn k2_cycle_oracle(norm: f64) -> (f64, f64) {
        let s = 1.0 - 2.0 / norm;
        let d = (s * s - 4.0 / (norm * norm)).sqrt();
        (0.5 * (s - d), 0.5 * (s + d))
    }

    #[test]
    fn f_map_examples() {
        assert_eq!(f_map(0.0, 4.2, 2), 1.0);
        assert_eq!(f_map(0.25, 4.0, 2), 0.25);
        assert_eq!(f_map(0.5, 2.0, 3), 0.125);
    }

    #[test]
    #[should_panic(expected = "x ≥ 0")]
    fn f_map_rejects_negative() {
        f_map(-0.1, 4.0, 2);
    }

    #[test]
    fn g_map_examples() {
        assert_eq!(g_map(0.25, 4.0, 2), 0.25);
        assert_eq!(g_map(0.0, 4.0, 2), 0.04);
    }

    #[test]
    fn fixed_point_examples() {
        assert!((solve_fixed_point(4.0, 2, 1e-12) - 0.25).abs() < 1e-12);
        // brute oracle values (50-digit scan refinement)
        assert!((solve_fixed_point(4.2, 2, 1e-12) - 0.24395697989512932).abs() < 1e-12);
        assert!((solve_fixed_point(5.0, 2, 1e-12) - 0.22326865972484233).abs() < 1e-12);
        assert!((solve_fixed_point(3.0, 2, 1e-12) - 0.2879021759397297).abs() < 1e-12);
    }

    #[test]
    fn two_cycle_absent_at_criticality() {
        assert_eq!(solve_two_cycle(4.0, 2, 1e-12).unwrap(), None);
        assert_eq!(solve_two_cycle(3.0, 2, 1e-12).unwrap(), None);
        assert_eq!(solve_two_cycle(1.6875, 3, 1e-12).unwrap(), None);
    }

    #[test]
    fn two_cycle_matches_quadratic_oracle() {
        for norm in [4.2, 4.5, 5.0, 8.0] {
            let cycle = solve_two_cycle(norm, 2, 1e-12).unwrap().unwrap();
            let (a, b) = k2_cycle_oracle(norm);
            assert!((cycle.alpha_star - a).abs() < 1e-12, "alpha at Λ={norm}");
            assert!((cycle.beta_star - b).abs() < 1e-12, "beta at Λ={norm}");
        }
    }

    #[test]
    fn two_cycle_frozen_values() {
        let c = solve_two_cycle(4.2, 2, 1e-12).unwrap().unwrap();
        assert!((c.alpha_star - 0.1527958167867657).abs() < 1e-12);
        assert!((c.beta_star - 0.3710137070227581).abs() < 1e-12);
        let c = solve_two_cycle(5.0, 2, 1e-12).unwrap().unwrap();
        assert!((c.alpha_star - 0.07639320225002103).abs() < 1e-12);
        assert!((c.beta_star - 0.523606797749979).abs() < 1e-12);
        let c = solve_two_cycle(1.8, 3, 1e-12).unwrap().unwrap();
        assert!((c.alpha_star - 0.15873379898915305).abs() < 1e-12);
        assert!((c.beta_star - 0.4705003510237923).abs() < 1e-12);
    }

    #[test]
    fn cycle_brackets_fixed_point() {
        for (norm, k) in [(4.2, 2), (5.0, 2), (1.8, 3), (2.0, 3), (1.2, 4)] {
            let xi = solve_fixed_point(norm, k, 1e-12);
            let c = solve_two_cycle(norm, k, 1e-12).unwrap().unwrap();
            assert!(c.alpha_star < xi && xi < c.beta_star);
            assert!((f_map(c.alpha_star, norm, k) - c.beta_star).abs() <= 1e-10);
            assert!((f_map(c.beta_star, norm, k) - c.alpha_star).abs() <= 1e-10);
        }
    }

    #[test]
    fn contraction_examples() {
        let c = solve_two_cycle(4.2, 2, 1e-12).unwrap().unwrap();
        let (theta, holder, regime) = contraction_data(4.2, 2, &c);
        assert!((theta - 0.9491486243775878).abs() < 1e-12);
        assert!((holder.unwrap() - 0.07529408259992915).abs() < 1e-12);
        assert_eq!(regime, Regime::SupercriticalContractive);

        let c = solve_two_cycle(5.0, 2, 1e-12).unwrap().unwrap();
        let (theta, holder, regime) = contraction_data(5.0, 2, &c);
        assert!((theta - 1.894427190999916).abs() < 1e-12);
        assert!(holder.is_none());
        assert_eq!(regime, Regime::SupercriticalNoncontractive);

        // (θ < 1) ⇔ (Λ(β*−α*) < 1) on both cases
        for norm in [4.2, 5.0] {
            let c = solve_two_cycle(norm, 2, 1e-12).unwrap().unwrap();
            let (theta, _, _) = contraction_data(norm, 2, &c);
            assert_eq!(theta < 1.0, norm * (c.beta_star - c.alpha_star) < 1.0);
        }
    }

    #[test]
    fn orbit_classification_examples() {
        let r = classify_orbit(0.9, 3.0, 2, 1e-10, 1_000_000).unwrap();
        assert_eq!(r.class, OrbitClass::ConvergesToXi);
        assert!((r.even_limit - 0.2879021759397297).abs() < 1e-8);

        let c = solve_two_cycle(4.2, 2, 1e-12).unwrap().unwrap();
        let r = classify_orbit(0.1, 4.2, 2, 1e-10, 1_000_000).unwrap();
        assert_eq!(r.class, OrbitClass::EvenToAlphaStarOddToBetaStar);
        assert!((r.even_limit - c.alpha_star).abs() < 1e-8);
        assert!((r.odd_limit - c.beta_star).abs() < 1e-8);

        let r = classify_orbit(0.3, 4.2, 2, 1e-10, 1_000_000).unwrap();
        assert_eq!(r.class, OrbitClass::EvenToBetaStarOddToAlphaStar);
        assert!((r.even_limit - c.beta_star).abs() < 1e-8);
    }

    #[test]
    fn orbit_not_converged_error() {
        let err = classify_orbit(0.9, 4.0, 2, 1e-13, 100).unwrap_err();
        assert!(matches!(err, DynamicsError::NotConverged { .. }));
    }

    #[test]
    fn orbit_at_fixed_point_stays() {
        let xi = solve_fixed_point(4.2, 2, 1e-12);
        let r = classify_orbit(xi, 4.2, 2, 1e-10, 1_000_000).unwrap();
        assert_eq!(r.class, OrbitClass::ConvergesToXi);
    }

    #[test]
    fn cycle_scan_examples() {
        let periods = cycle_scan(3.0, 2, 8, 32);
        assert_eq!(periods, BTreeSet::from([1]));
        let periods = cycle_scan(4.2, 2, 8, 32);
        assert_eq!(periods, BTreeSet::from([2]));
        for (norm, k) in [(2.0, 2), (5.0, 2), (2.0, 3), (4.0, 3)] {
            let periods = cycle_scan(norm, k, 8, 16);
            assert!(
                periods.iter().all(|&p| p <= 2),
                "period > 2 at Λ={norm}, k={k}"
            );
        }
    }

    #[test]
    fn fixed_point_data_serializes_with_exact_keys() {
        let fp = FixedPointData::solve(2, 4.2, 1e-12).unwrap();
        let text = serde_json::to_string(&fp).unwrap();
        // declaration order is the documented order
        assert!(text.starts_with("{\"k\":"), "{text}");
        let json: serde_json::Value = text.parse().unwrap();
        let mut keys: Vec<&str> = json
            .as_object()
            .unwrap()
            .keys()
            .map(|k| k.as_str())
            .collect();
        keys.sort_unstable();
        let mut expected = vec![
            "k",
            "norm",
            "xi",
            "alpha_star",
            "beta_star",
            "theta",
            "holder",
            "regime",
        ];
        expected.sort_unstable();
        assert_eq!(keys, expected);
        assert_eq!(json["regime"], "supercritical_contractive");

        let fp = FixedPointData::solve(2, 3.0, 1e-12).unwrap();
        let json = serde_json::to_value(&fp).unwrap();
        assert_eq!(json["regime"], "subcritical");
        assert!(json["alpha_star"].is_null());

        let fp = FixedPointData::solve(2, 5.0, 1e-12).unwrap();
        let json = serde_json::to_value(&fp).unwrap();
        assert_eq!(json["regime"], "supercritical_noncontractive");
        assert!(json["holder"].is_null());
    }
}
