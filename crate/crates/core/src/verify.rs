//! Batch invariant suites for the `verify` command.
//!
//! Each suite re-measures the module invariants at desk scale and reports
//! one line per check with the measured values, so a failed run says what
//! broke and by how much.

use std::collections::BTreeSet;
use std::str::FromStr;

use serde::Serialize;

use crate::activity::{critical_activity, ActivitySpec, ModelParams};
use crate::bg::{
    bg_field, bg_root_value, bg_root_value_from_digits, bg_root_value_with_seed, scan_t,
    two_representation_check, uniform_grid, BgParams, BoundaryLawField,
};
use crate::dynamics::{
    classify_orbit, cycle_scan, f_map, g_map, solve_fixed_point, solve_two_cycle,
};
use crate::gibbs::{
    brute_force_edge_joint, brute_force_marginal, child_kernel, empirical_vs_exact,
    normalisability_check, root_marginal, sample_configuration, site_marginal, tv_distance,
};
use crate::path::{volume, PathCode, Vertex};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        pass,
        detail,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Dynamics,
    Bg,
    Gibbs,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamics" => Ok(Suite::Dynamics),
            "bg" => Ok(Suite::Bg),
            "gibbs" => Ok(Suite::Gibbs),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite `{other}` (expected dynamics|bg|gibbs|all)"
            )),
        }
    }
}

/// Test hooks. `inject_theta_fault` corrupts the measured contraction
/// constant before the θ-limit check, to prove the harness actually fails.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub inject_theta_fault: bool,
}

pub fn run_suite(suite: Suite, opts: VerifyOptions) -> Vec<CheckResult> {
    match suite {
        Suite::Dynamics => dynamics_suite(opts),
        Suite::Bg => bg_suite(),
        Suite::Gibbs => gibbs_suite(),
        Suite::All => {
            let mut all = dynamics_suite(opts);
            all.extend(bg_suite());
            all.extend(gibbs_suite());
            all
        }
    }
}

/// Derivative by Richardson-extrapolated central differences.
fn fd_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let central = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}

fn params_42(tol: f64) -> BgParams {
    let activity = ActivitySpec::finite([(1, 2.1), (-1, 2.1)]).unwrap();
    BgParams::new(ModelParams::new(2, activity), tol, 1_000_000).unwrap()
}

fn params_k3(tol: f64) -> BgParams {
    let activity = ActivitySpec::finite([(1, 0.9), (-1, 0.9)]).unwrap();
    BgParams::new(ModelParams::new(3, activity), tol, 1_000_000).unwrap()
}

fn code(num: i64, den: i64, k: u32) -> PathCode {
    PathCode::from_ratio(num, den, k).unwrap()
}

fn dynamics_suite(opts: VerifyOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();

    {
        let mut ok = true;
        for &(norm, k) in &[(4.2, 2u32), (1.8, 3)] {
            for i in 0..50 {
                let x = i as f64 / 50.0;
                let y = x + 0.013;
                ok &= f_map(x, norm, k) > f_map(y, norm, k);
                ok &= g_map(x, norm, k) < g_map(y, norm, k);
            }
        }
        out.push(check(
            "dynamics::monotonicity",
            ok,
            "f strictly falls, g strictly rises".into(),
        ));
    }

    {
        let mut worst = 0.0f64;
        for k in [2u32, 3, 4] {
            for norm in [0.5, 1.0, critical_activity(k), 4.2, 5.0, 10.0] {
                let xi = solve_fixed_point(norm, k, 1e-12);
                let residual = (xi * (1.0 + xi * norm).powi(k as i32) - 1.0).abs();
                worst = worst.max(residual);
            }
        }
        out.push(check(
            "dynamics::fixed_point_residuals",
            worst <= 1e-12,
            format!("max |φ(ξ)| = {worst:.3e} over the Λ×k grid (limit 1e-12)"),
        ));
    }

    {
        let mut ok = true;
        let mut worst = 0.0f64;
        for &(norm, k) in &[(4.2, 2u32), (5.0, 2), (8.0, 2), (2.0, 3), (1.2, 4)] {
            let xi = solve_fixed_point(norm, k, 1e-12);
            let cycle = solve_two_cycle(norm, k, 1e-12).unwrap().unwrap();
            ok &= cycle.alpha_star < xi && xi < cycle.beta_star;
            let r1 = (f_map(cycle.alpha_star, norm, k) - cycle.beta_star).abs();
            let r2 = (f_map(cycle.beta_star, norm, k) - cycle.alpha_star).abs();
            worst = worst.max(r1).max(r2);
        }
        out.push(check(
            "dynamics::cycle_bracketing",
            ok && worst <= 1e-10,
            format!("α* < ξ < β* everywhere, max cycle residual {worst:.3e} (limit 1e-10)"),
        ));
    }

    {
        let mut worst_d = 0.0f64;
        let mut worst_xi = 0.0f64;
        for k in [2u32, 3, 4] {
            let norm = critical_activity(k);
            let xi = solve_fixed_point(norm, k, 1e-12);
            let deriv = fd_derivative(|x| f_map(x, norm, k), xi, 1e-3);
            worst_d = worst_d.max((deriv + 1.0).abs());
            worst_xi = worst_xi.max((xi - 1.0 / (norm * (k as f64 - 1.0))).abs());
        }
        out.push(check(
            "dynamics::tangency",
            worst_d <= 1e-8 && worst_xi <= 1e-10,
            format!("|f'(ξ)+1| ≤ {worst_d:.3e} (limit 1e-8), |ξ − 1/(Λ(k−1))| ≤ {worst_xi:.3e}"),
        ));
    }

    {
        let mut ok = true;
        let mut report = String::new();
        for k in [2u32, 3, 4] {
            let norm = critical_activity(k) * 1.001;
            let cycle = solve_two_cycle(norm, k, 1e-12).unwrap().unwrap();
            let mut theta = norm * cycle.beta_star / (1.0 + cycle.alpha_star * norm);
            if opts.inject_theta_fault {
                theta *= 1.5;
            }
            let gap = (theta - 1.0 / k as f64).abs();
            ok &= gap <= 0.05;
            report.push_str(&format!("k={k}: |θ−1/k| = {gap:.4}; "));
        }
        out.push(check(
            "dynamics::theta_limit",
            ok,
            format!("{report}limit 0.05"),
        ));
    }

    {
        let mut ok = true;
        for &(norm, k) in &[(4.2, 2u32), (3.0, 2)] {
            for alpha0 in [0.1, 0.3, 0.7] {
                let direct = classify_orbit(alpha0, norm, k, 1e-10, 1_000_000).unwrap();
                let shifted =
                    classify_orbit(g_map(alpha0, norm, k), norm, k, 1e-10, 1_000_000).unwrap();
                ok &= direct.class == shifted.class;
            }
        }
        out.push(check(
            "dynamics::orbit_invariance",
            ok,
            "classification is stable under α₀ ↦ g(α₀)".into(),
        ));
    }

    {
        let sub = cycle_scan(3.0, 2, 8, 32);
        let sup = cycle_scan(4.2, 2, 8, 32);
        let mut union: BTreeSet<usize> = sub.union(&sup).copied().collect();
        for &(norm, k) in &[(2.0, 2u32), (5.0, 2), (2.0, 3), (4.0, 3)] {
            union.extend(cycle_scan(norm, k, 8, 16));
        }
        let pass = sub == BTreeSet::from([1])
            && sup == BTreeSet::from([2])
            && union.iter().all(|&p| p <= 2);
        out.push(check(
            "dynamics::cycle_scan",
            pass,
            format!("Λ=3 → {sub:?}, Λ=4.2 → {sup:?}, all observed periods {union:?}"),
        ));
    }

    out
}

fn bg_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let params = params_42(1e-10);
    let (alpha, beta) = (params.fp.alpha_star.unwrap(), params.fp.beta_star.unwrap());

    {
        let t = code(1, 3, 2);
        let mid = bg_root_value(&t, &params).unwrap();
        let mut worst = 0.0f64;
        for seed in [alpha, beta] {
            let other = bg_root_value_with_seed(&t, &params, seed).unwrap();
            worst = worst.max((other.z0 - mid.z0).abs());
        }
        out.push(check(
            "bg::seed_independence",
            worst <= 2.0 * mid.error_bound,
            format!(
                "seed spread {worst:.3e} ≤ 2·bound = {:.3e}",
                2.0 * mid.error_bound
            ),
        ));
    }

    {
        let mut ok = true;
        let mut low = f64::INFINITY;
        let mut high = f64::NEG_INFINITY;
        for t in [
            code(0, 1, 2),
            code(1, 4, 2),
            code(1, 3, 2),
            code(1, 2, 2),
            code(1, 1, 2),
        ] {
            let field = bg_field(&t, &params, 4).unwrap();
            for v in volume(2, 4) {
                let value = field.value_at(&v);
                low = low.min(value);
                high = high.max(value);
                ok &= value >= alpha - 1e-12 && value <= beta + 1e-12 && value <= 1.0;
            }
        }
        out.push(check(
            "bg::band",
            ok,
            format!("all multipliers in [{low:.6}, {high:.6}] ⊂ [α*−1e−12, β*+1e−12], ≤ 1"),
        ));
    }

    {
        let mut worst = 0.0f64;
        for (t, base_even) in [(code(0, 1, 2), beta), (code(1, 1, 2), alpha)] {
            if let BoundaryLawField::Path(field) = bg_field(&t, &params, 4).unwrap() {
                for (level, &u) in field.path_values.iter().enumerate() {
                    let want = if level % 2 == 0 {
                        base_even
                    } else {
                        f_map(base_even, 4.2, 2)
                    };
                    worst = worst.max((u - want).abs());
                }
            }
        }
        out.push(check(
            "bg::endpoint_exactness",
            worst <= 1e-10,
            format!("t∈{{0,1}} path values match the parity constants within {worst:.3e}"),
        ));
    }

    {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let seed_value = 0.5 * (alpha + beta);
        let base = code(1, 3, 2).digits(400);
        let z_base = bg_root_value_from_digits(&base, &params, seed_value).z0;
        let mut ok = true;
        let mut flips = 0;
        while flips < 20 {
            let pos = rng.gen_range(0..12);
            if base[pos] == 1 {
                continue;
            }
            flips += 1;
            let mut flipped = base.clone();
            flipped[pos] = 1;
            ok &= bg_root_value_from_digits(&flipped, &params, seed_value).z0 < z_base;
        }
        out.push(check(
            "bg::digit_monotonicity",
            ok,
            "raising any single digit lowers z₀ (20 random flips)".into(),
        ));
    }

    {
        let mut worst_ratio = 0.0f64;
        for t in [code(0, 1, 2), code(1, 3, 2), code(1, 2, 2), code(1, 1, 2)] {
            let field = bg_field(&t, &params, 4).unwrap();
            let bound = match &field {
                BoundaryLawField::Path(f) => f.error_bound,
                _ => unreachable!(),
            };
            let residual = crate::bg::verify_consistency(&field, &params.model, 4);
            worst_ratio = worst_ratio.max(residual / bound);
        }
        out.push(check(
            "bg::consistency_residual",
            worst_ratio <= 100.0,
            format!("max residual / error bound = {worst_ratio:.2} (limit 100)"),
        ));
    }

    {
        let mut worst = 0.0f64;
        for t in [code(1, 2, 2), code(3, 8, 2)] {
            worst = worst.max(two_representation_check(&t, &params, 0).unwrap().difference);
        }
        let p3 = params_k3(1e-10);
        for t in [code(1, 3, 3), code(2, 9, 3)] {
            worst = worst.max(two_representation_check(&t, &p3, 0).unwrap().difference);
        }
        out.push(check(
            "bg::two_representations",
            worst <= 2.0 * params.tol,
            format!("max |Δz₀| across Q_k codings = {worst:.3e} ≤ 2·tol"),
        ));
    }

    {
        // slope of ln max|Δz0| against ln |Δt| on dyadic offsets
        let holder = params.fp.holder.unwrap();
        let bases = [code(0, 1, 2), code(1, 7, 2), code(1, 3, 2), code(9, 13, 2)];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for n in 3..=9u32 {
            let mut delta = 0.0f64;
            for base in &bases {
                let t1 = bg_root_value(base, &params).unwrap().z0;
                let shifted = PathCode::new(
                    base.value() + num_rational::BigRational::new(1.into(), (1i64 << n).into()),
                    2,
                )
                .unwrap();
                let t2 = bg_root_value(&shifted, &params).unwrap().z0;
                delta = delta.max((t1 - t2).abs());
            }
            xs.push(-(n as f64) * 2.0f64.ln());
            ys.push(delta.ln());
        }
        let xm = xs.iter().sum::<f64>() / xs.len() as f64;
        let ym = ys.iter().sum::<f64>() / ys.len() as f64;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        out.push(check(
            "bg::holder_exponent",
            slope >= holder - 0.02,
            format!(
                "measured exponent {slope:.4} vs lower bound {:.4}",
                holder - 0.02
            ),
        ));
    }

    {
        let points = scan_t(&params, &uniform_grid(2, 33));
        let pass = match &points {
            Ok(points) => {
                (points[0].z0 - beta).abs() <= params.tol
                    && (points[32].z0 - alpha).abs() <= params.tol
            }
            Err(_) => false,
        };
        out.push(check(
            "bg::scan_monotone",
            pass,
            "33-point scan strictly decreasing with matching endpoints".into(),
        ));
    }

    out
}

fn gibbs_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let activity2 = ActivitySpec::finite([(1, 2.1), (-1, 2.1)]).unwrap();
    let activity4 = ActivitySpec::finite([(1, 1.05), (-1, 1.05), (2, 1.05), (-2, 1.05)]).unwrap();
    let params = params_42(1e-12);
    let (alpha, beta) = (params.fp.alpha_star.unwrap(), params.fp.beta_star.unwrap());
    let xi = params.fp.xi;
    let fields: Vec<(&str, BoundaryLawField)> = vec![
        ("constant_xi", BoundaryLawField::constant(xi)),
        ("period_two", BoundaryLawField::period_two(beta, alpha)),
        ("bg_half", bg_field(&code(1, 2, 2), &params, 3).unwrap()),
    ];

    {
        let field = BoundaryLawField::period_two(beta, alpha);
        let mut ok = true;
        for seed in 0..20_000u64 {
            let config = sample_configuration(&field, &activity2, 2, 3, seed);
            ok &= config.is_admissible();
        }
        out.push(check(
            "gibbs::admissibility",
            ok,
            "20000 samples on V₃ without a single constraint violation".into(),
        ));
    }

    {
        let mut worst = 0.0f64;
        for (_, field) in &fields {
            for activity in [&activity2, &activity4] {
                for m in [0usize, 1] {
                    let brute =
                        brute_force_marginal(field, activity, 2, m, &Vertex::root()).unwrap();
                    let closed = root_marginal(field, activity);
                    for &s in &brute.support {
                        worst = worst.max((brute.prob(s) - closed.prob(s)).abs());
                    }
                }
            }
        }
        // one deeper volume on the small support
        let brute = brute_force_marginal(&fields[0].1, &activity2, 2, 2, &Vertex::root()).unwrap();
        let closed = root_marginal(&fields[0].1, &activity2);
        for &s in &brute.support {
            worst = worst.max((brute.prob(s) - closed.prob(s)).abs());
        }
        out.push(check(
            "gibbs::oracle_equivalence",
            worst <= 1e-10,
            format!(
                "max |brute − closed| = {worst:.3e} over fields × activities × m (limit 1e-10)"
            ),
        ));
    }

    {
        let field = BoundaryLawField::constant(xi);
        let root = Vertex::root();
        let child = root.child(0);
        let joint = brute_force_edge_joint(&field, &activity2, 2, 1, &root, &child).unwrap();
        let root_law = root_marginal(&field, &activity2);
        let mut worst = 0.0f64;
        for (i, &sp) in joint.support.iter().enumerate() {
            let kernel = child_kernel(sp, field.value_at(&child), &activity2);
            for (j, &sc) in joint.support.iter().enumerate() {
                worst = worst.max((joint.p[i][j] - root_law.prob(sp) * kernel.prob(sc)).abs());
            }
        }
        out.push(check(
            "gibbs::edge_factorization",
            worst <= 1e-12,
            format!("max |joint − root×kernel| = {worst:.3e} (limit 1e-12)"),
        ));
    }

    {
        let geom = ActivitySpec::geometric(1.0, 0.5).unwrap();
        let mut worst = 0.0f64;
        for activity in [&activity2, &geom] {
            for (_, field) in &fields {
                let table = root_marginal(field, activity);
                worst = worst.max((table.total() - 1.0).abs());
                let site = site_marginal(field, activity, &Vertex::root().child(1).child(0));
                worst = worst.max((site.total() - 1.0).abs());
            }
        }
        out.push(check(
            "gibbs::normalization",
            worst <= 1e-12,
            format!("max |Σp − 1| = {worst:.3e} (limit 1e-12)"),
        ));
    }

    {
        let mut ok = true;
        for (_, field) in &fields {
            for v in volume(2, 3) {
                let value = field.value_at(&v);
                ok &= value <= 1.0 && value > 0.0;
            }
        }
        out.push(check(
            "gibbs::lemma_n1",
            ok,
            "every multiplier lies in (0, 1]".into(),
        ));
    }

    {
        let single = ActivitySpec::finite([(1, 4.2)]).unwrap();
        let split = ActivitySpec::finite([(1, 2.1), (-1, 2.1)]).unwrap();
        let p_single = root_marginal(&BoundaryLawField::constant(xi), &single).prob(0);
        let p_split = root_marginal(&BoundaryLawField::constant(xi), &split).prob(0);
        out.push(check(
            "gibbs::norm_sufficiency",
            p_single == p_split,
            format!("P(σ=0) = {p_single} for both activities with equal ‖λ‖"),
        ));
    }

    {
        let field = BoundaryLawField::period_two(beta, alpha);
        let swapped = BoundaryLawField::period_two(alpha, beta);
        let samples: Vec<_> = (0..30_000u64)
            .map(|s| sample_configuration(&field, &activity2, 2, 3, s))
            .collect();
        let matched = empirical_vs_exact(&samples, &field, &activity2, &Vertex::root()).unwrap();
        let crossed = empirical_vs_exact(&samples, &swapped, &activity2, &Vertex::root()).unwrap();
        out.push(check(
            "gibbs::sampler_tv",
            matched <= 0.015 && crossed >= 0.05,
            format!("TV matched = {matched:.4} (≤ 0.015), swapped phases = {crossed:.4} (≥ 0.05)"),
        ));
    }

    {
        let geom = ActivitySpec::geometric(1.0, 0.5).unwrap();
        let child = Vertex::root().child(0);
        let mut ok = true;
        for (_, field) in &fields {
            ok &= normalisability_check(field, &activity2, 2, &child).ok;
            ok &= normalisability_check(field, &activity4, 2, &child).ok;
        }
        let xi2 = solve_fixed_point(2.0, 2, 1e-12);
        ok &= normalisability_check(&BoundaryLawField::constant(xi2), &geom, 2, &child).ok;
        out.push(check(
            "gibbs::normalisability",
            ok,
            "double sums finite and below the band bound for all field/activity pairs".into(),
        ));
    }

    {
        let scan_params = params_42(1e-10);
        let points = scan_t(&scan_params, &uniform_grid(2, 17)).unwrap();
        let p0: Vec<f64> = points
            .iter()
            .map(|p| 1.0 / (1.0 + p.z0 * scan_params.model.norm()))
            .collect();
        let distinct = p0.windows(2).all(|w| w[1] > w[0]);
        out.push(check(
            "gibbs::distinct_marginals",
            distinct,
            "root P(σ=0) strictly increases along the 17-point t-grid".into(),
        ));
    }

    {
        let exact_a = root_marginal(&BoundaryLawField::period_two(beta, alpha), &activity2);
        let exact_b = root_marginal(&BoundaryLawField::period_two(alpha, beta), &activity2);
        let gap = tv_distance(&exact_a, &exact_b);
        out.push(check(
            "gibbs::phase_gap",
            gap >= 0.05,
            format!("exact TV between the period-two phases at the root = {gap:.4}"),
        ));
    }

    out
}
