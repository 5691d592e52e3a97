use phasetour_core::costspace::{build_cost_matrix, CostKind, CostMatrix};
use phasetour_core::grid::{make_random_grid, make_rect_grid, PhasePoint};
use phasetour_core::rng;
use phasetour_core::search::{
    exhaustive_search, multi_nn, nn_search, path_cost, random_sample, validate_permutation, Starts,
};
use phasetour_core::stats::{normal_cdf, normal_quantile, p_lower_n, qq_data, z_scores, Moments};
use phasetour_core::trajectory::{scale_duration, solve_coeffs, AccelBound};
use proptest::prelude::*;

/// Adaptive Simpson quadrature, independent of any closed form.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, eps / 2.0, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, eps / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, eps, 50)
}

fn point(dim: usize) -> impl Strategy<Value = PhasePoint> {
    prop::collection::vec(-1.0f64..=1.0, dim).prop_map(|c| PhasePoint::new(c).unwrap())
}

fn pair() -> impl Strategy<Value = (PhasePoint, PhasePoint)> {
    prop_oneof![Just(2usize), Just(4usize), Just(6usize)].prop_flat_map(|m| (point(m), point(m)))
}

fn quadrature_energy(traj: &phasetour_core::CubicTraj) -> f64 {
    let dt = traj.dt();
    traj.axes()
        .iter()
        .map(|c| {
            let f = |t: f64| c.acceleration(t).powi(2);
            adaptive_simpson(&f, 0.0, dt, 1e-13)
        })
        .sum()
}

fn bound() -> AccelBound {
    AccelBound::with_default_tol(2.0).unwrap()
}

proptest! {
    #[test]
    fn boundary_residuals((from, to) in pair(), dt in 0.1f64..10.0) {
        let traj = solve_coeffs(&from, &to, dt).unwrap();
        let start = traj.eval(0.0).unwrap();
        let end = traj.eval(dt).unwrap();
        for k in 0..from.axes() {
            prop_assert!((start.positions[k] - from.positions()[k]).abs() < 1e-9);
            prop_assert!((start.velocities[k] - from.velocities()[k]).abs() < 1e-9);
            prop_assert!((end.positions[k] - to.positions()[k]).abs() < 1e-9);
            prop_assert!((end.velocities[k] - to.velocities()[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_matches_quadrature((from, to) in pair(), dt in 0.1f64..10.0) {
        let traj = solve_coeffs(&from, &to, dt).unwrap();
        let closed = traj.energy_cost();
        let numeric = quadrature_energy(&traj);
        prop_assert!((closed - numeric).abs() <= 1e-6 * numeric.max(1e-12), "{closed} vs {numeric}");
    }

    #[test]
    fn scaled_peak_within_tolerance((from, to) in pair()) {
        prop_assume!(from != to);
        let traj = scale_duration(&from, &to, bound()).unwrap();
        let peak = traj.peak_acceleration();
        prop_assert!((1.96..=2.04).contains(&peak), "peak {peak}");
    }

    #[test]
    fn peak_is_at_an_endpoint((from, to) in pair(), dt in 0.1f64..10.0) {
        let traj = solve_coeffs(&from, &to, dt).unwrap();
        let peak = traj.peak_acceleration();
        for i in 0..=200 {
            let t = (dt * i as f64 / 200.0).min(dt);
            let k = traj.eval(t).unwrap();
            for a in k.accelerations {
                prop_assert!(a.abs() <= peak * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    #[test]
    fn shared_duration_binding_axis((from, to) in prop::collection::vec(-1.0f64..=1.0, 6)
        .prop_flat_map(|a| (Just(a), prop::collection::vec(-1.0f64..=1.0, 6))))
    {
        let from = PhasePoint::new(from).unwrap();
        let to = PhasePoint::new(to).unwrap();
        let traj = scale_duration(&from, &to, bound()).unwrap();
        let peaks: Vec<f64> = traj.axes().iter().map(|c| c.peak_acceleration(traj.dt())).collect();
        let top = peaks.iter().cloned().fold(0.0, f64::max);
        prop_assert_eq!(top, traj.peak_acceleration());
        prop_assert!(peaks.iter().all(|&p| p <= top));
    }

    #[test]
    fn cdf_is_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(normal_cdf(lo) <= normal_cdf(hi));
    }

    #[test]
    fn p_ln_monotone(z in -9.0f64..3.0, dz in 0.0f64..2.0, n in 1u64..100_000, dn in 0u64..100_000) {
        let (p_c, p1) = p_lower_n(z, n).unwrap();
        let (_, p2) = p_lower_n(z, n + dn).unwrap();
        let (_, p3) = p_lower_n(z + dz, n).unwrap();
        prop_assert!(p2 >= p1);
        prop_assert!(p3 >= p1);
        prop_assert!(p1 >= p_c);
        prop_assert_eq!(p_lower_n(z, 1).unwrap().1, normal_cdf(z));
    }

    #[test]
    fn qq_affine_invariance(scale in 0.01f64..100.0, shift in -1e3f64..1e3, n in 3usize..300) {
        let data: Vec<f64> = (0..n)
            .map(|i| shift + scale * normal_quantile((i as f64 + 0.5) / n as f64).unwrap())
            .collect();
        let qq = qq_data(&data).unwrap();
        prop_assert!((qq.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_shift_and_scale(shift in -1e3f64..1e3, s in 0.5f64..50.0) {
        let nn = Moments { n: 10, mean: 100.0, std: 1.0, min: 98.0, max: 103.0 };
        let sample = Moments { n: 1000, mean: 180.0, std: s, min: 150.0, max: 210.0 };
        let base = z_scores(&nn, &sample).unwrap();
        let moved = |m: &Moments| Moments { mean: m.mean + shift, min: m.min + shift, max: m.max + shift, ..*m };
        let shifted = z_scores(&moved(&nn), &moved(&sample)).unwrap();
        prop_assert!((base.z - shifted.z).abs() < 1e-9);
        prop_assert!((base.z_prime - shifted.z_prime).abs() < 1e-9);
        prop_assert!((base.z_double_prime - shifted.z_double_prime).abs() < 1e-9);
        prop_assert!((base.z * s - (nn.mean - sample.mean)).abs() < 1e-9);
    }
}

fn small_matrix(kind: CostKind, seed: u64, count: usize) -> CostMatrix {
    let g = make_random_grid(2, count, seed).unwrap();
    build_cost_matrix(&g, kind, bound()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn searches_emit_valid_paths(seed in any::<u64>(), count in 4usize..8, energy in any::<bool>()) {
        let kind = if energy { CostKind::Energy } else { CostKind::Time };
        let m = small_matrix(kind, seed, count);
        let n = m.len();
        let exact = exhaustive_search(&m, 10).unwrap();
        validate_permutation(&exact.best.order, n).unwrap();
        let min = exact.all_costs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(exact.best.total_cost, min);

        let nn = multi_nn(&m, &Starts::All, 3, 0.02, seed).unwrap();
        prop_assert_eq!(nn.all_costs.len(), 3 * n);
        validate_permutation(&nn.best.order, n).unwrap();
        prop_assert_eq!(path_cost(&m, &nn.best.order).unwrap(), nn.best.total_cost);
        for &c in &nn.all_costs {
            prop_assert!(c >= exact.best.total_cost);
        }
        for log in &nn.tie_logs {
            prop_assert_eq!(log.multiplicities.len(), n - 1);
            for (k, &t) in log.multiplicities.iter().enumerate() {
                prop_assert!(t >= 1 && t as usize <= n - 1 - k);
            }
        }

        let sample = random_sample(&m, 50, &mut rng::seeded(seed)).unwrap();
        validate_permutation(&sample.best.order, n).unwrap();
        prop_assert_eq!(path_cost(&m, &sample.best.order).unwrap(), sample.best.total_cost);
        prop_assert!(sample.best.total_cost >= exact.best.total_cost);
    }
}

#[test]
fn nn_paths_are_permutations_on_rect_grid() {
    let g = make_rect_grid(2, 4).unwrap();
    let m = build_cost_matrix(&g, CostKind::Time, bound()).unwrap();
    for seed in 0..50 {
        let (p, ties) = nn_search(&m, (seed % 16) as usize, 0.02, &mut rng::seeded(seed)).unwrap();
        validate_permutation(&p.order, 16).unwrap();
        assert_eq!(ties.multiplicities.len(), 15);
    }
}
