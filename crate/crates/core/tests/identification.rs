use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel, Normal};
use roysim_core::identification::*;
use roysim_core::model::AdvantageSpec;
use roysim_core::{Composition, TypeId};

fn truth() -> CandidateParams {
    CandidateParams { re_w: 0.4, re_m: 0.6, c_w: 0.1, c_m: 0.1, big_c_w: 1.0, big_c_m: 1.0, beta: 1.0 }
}

fn truth_comp() -> Composition {
    Composition::new(0.375, 0.625).unwrap()
}

fn draw_noise(noise: &NoiseSpec, rng: &mut ChaCha8Rng) -> f64 {
    match noise.family {
        NoiseFamily::Degenerate => 0.0,
        NoiseFamily::Gaussian => Normal::new(0.0, noise.scale).unwrap().sample(rng),
        // The difference of two standard Gumbels is standard logistic.
        NoiseFamily::Logistic => {
            let g = Gumbel::new(0.0, noise.scale).unwrap();
            g.sample(rng) - g.sample(rng)
        }
    }
}

#[test]
fn quadrature_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 20 {
        let c = CandidateParams {
            re_w: rng.random_range(0.2..0.8),
            re_m: rng.random_range(0.2..0.8),
            c_w: rng.random_range(0.0..0.5),
            c_m: rng.random_range(0.0..0.5),
            big_c_w: rng.random_range(0.5..2.0),
            big_c_m: rng.random_range(0.5..2.0),
            beta: rng.random_range(0.5..1.5),
        };
        let pop_ratio = rng.random_range(0.5..2.0);
        let Ok(params) = c.to_params(pop_ratio) else { continue };
        let comp = Composition::new(rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)).unwrap();
        let min_wage = 1.0;
        let data = ObservedData::new(vec![], comp, pop_ratio, min_wage).unwrap();
        let noise = match checked % 3 {
            0 => NoiseSpec::DEGENERATE,
            1 => NoiseSpec::new(NoiseFamily::Logistic, rng.random_range(0.1..1.0)).unwrap(),
            _ => NoiseSpec::new(NoiseFamily::Gaussian, rng.random_range(0.1..1.0)).unwrap(),
        };
        let t = if checked % 2 == 0 { TypeId::W } else { TypeId::M };
        let g = g_star(&c, &data).unwrap()[t];
        let adv: AdvantageSpec = params.adv[t];
        let ys = [1.0, 1.5, 3.0, 10.0];
        let draws = 1_000_000;
        let mut hits = [[0u32; 4]; 2];
        for _ in 0..draws {
            let delta = adv.quantile(rng.sample(rand::distr::Open01)).unwrap();
            let cut = g + draw_noise(&noise, &mut rng);
            for (k, &y) in ys.iter().enumerate() {
                let d = y - min_wage;
                hits[0][k] += u32::from(cut < delta && delta <= d);
                hits[1][k] += u32::from(-d <= delta && delta <= cut);
            }
        }
        let share = data.population_share(t);
        for side in [1u8, 2] {
            for (k, &y) in ys.iter().enumerate() {
                let mc = share * hits[side as usize - 1][k] as f64 / draws as f64;
                let q = lhs_moment(&c, t, y, side, &noise, &data).unwrap();
                assert!((q - mc).abs() < 2e-3, "{c:?} {noise:?} side {side} y {y}: quadrature {q} vs MC {mc}");
            }
        }
        checked += 1;
    }
}

#[test]
fn truth_never_rejected_in_replications() {
    let noises = [
        NoiseSpec::DEGENERATE,
        NoiseSpec::new(NoiseFamily::Logistic, 0.3).unwrap(),
        NoiseSpec::new(NoiseFamily::Gaussian, 0.5).unwrap(),
    ];
    for rep in 0..50u64 {
        let noise = noises[rep as usize % 3];
        let d = simulate_data(&truth(), truth_comp(), 1.0, 0.5, &noise, 100_000, rep).unwrap();
        let y = default_y_grid(&d, DEFAULT_Y_POINTS).unwrap();
        let v = check_inequalities(&truth(), &d, &y, &noise).unwrap();
        assert!(v.is_empty(), "replication {rep}: {:?}", &v[..v.len().min(3)]);
    }
}

#[test]
fn monotone_sides_on_simulated_data() {
    let d = simulate_data(&truth(), truth_comp(), 1.0, 0.0, &NoiseSpec::DEGENERATE, 10_000, 1).unwrap();
    let y = default_y_grid(&d, DEFAULT_Y_POINTS).unwrap();
    for t in TypeId::ALL {
        for side in [1u8, 2] {
            let lhs: Vec<f64> = y.iter().map(|&v| lhs_moment(&truth(), t, v, side, &NoiseSpec::DEGENERATE, &d).unwrap()).collect();
            let rhs: Vec<f64> = y.iter().map(|&v| empirical_joint_cdf(&d, v, side, t).unwrap()).collect();
            assert!(lhs.windows(2).all(|p| p[0] <= p[1] + 1e-15));
            assert!(rhs.windows(2).all(|p| p[0] <= p[1]));
        }
    }
}

fn small_grid() -> GridSpec {
    GridSpec {
        re_w: Axis { min: 0.1, max: 0.7, count: 7 },
        re_m: Axis::point(0.6),
        c_w: Axis { min: 0.0, max: 0.2, count: 3 },
        c_m: Axis::point(0.1),
        big_c_w: Axis { min: 0.5, max: 1.5, count: 3 },
        big_c_m: Axis::point(1.0),
        beta: 1.0,
        consistency_tol: 1e-3,
    }
}

#[test]
fn single_point_grid_accepts_truth() {
    let d = simulate_data(&truth(), truth_comp(), 1.0, 0.5, &NoiseSpec::DEGENERATE, 50_000, 4).unwrap();
    let y = default_y_grid(&d, DEFAULT_Y_POINTS).unwrap();
    let grid = GridSpec {
        re_w: Axis::point(0.4),
        re_m: Axis::point(0.6),
        c_w: Axis::point(0.1),
        c_m: Axis::point(0.1),
        big_c_w: Axis::point(1.0),
        big_c_m: Axis::point(1.0),
        beta: 1.0,
        consistency_tol: 1e-3,
    };
    let set = identified_set(&grid, &d, &NoiseSpec::DEGENERATE, &y).unwrap();
    assert_eq!(set.accepted, vec![truth()]);

    let far = GridSpec { re_w: Axis { min: 0.75, max: 0.85, count: 3 }, ..grid };
    let set = identified_set(&far, &d, &NoiseSpec::DEGENERATE, &y).unwrap();
    assert!(set.accepted.is_empty());
    assert!(set.diagnostics.iter().all(|x| !x.consistent || x.violations > 0 || x.invalid.is_some()));
}

#[test]
fn accepted_set_contains_truth_and_is_deterministic() {
    let d = simulate_data(&truth(), truth_comp(), 1.0, 0.5, &NoiseSpec::DEGENERATE, 50_000, 5).unwrap();
    let y = default_y_grid(&d, DEFAULT_Y_POINTS).unwrap();
    let set = identified_set(&small_grid(), &d, &NoiseSpec::DEGENERATE, &y).unwrap();
    assert_eq!(set.diagnostics.len(), 63);
    assert!(set.accepted.iter().any(|c| (c.re_w - 0.4).abs() < 1e-12 && c.c_w == 0.1 && c.big_c_w == 1.0));
    assert!(set.accepted.iter().all(|c| (c.re_w - 0.4).abs() < 0.2));
    for x in &set.diagnostics {
        assert_eq!(x.accepted, x.consistent && x.violations == 0 && x.invalid.is_none());
    }
    assert_eq!(set, identified_set(&small_grid(), &d, &NoiseSpec::DEGENERATE, &y).unwrap());
    let mut buf = Vec::new();
    write_identified_csv(&set, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), set.accepted.len() + 1);
}

fn bounding_box(set: &IdentifiedSet) -> Option<[(f64, f64); 3]> {
    let first = set.accepted.first()?;
    let mut b = [(first.re_w, first.re_w), (first.c_w, first.c_w), (first.big_c_w, first.big_c_w)];
    for c in &set.accepted {
        for (k, v) in [c.re_w, c.c_w, c.big_c_w].into_iter().enumerate() {
            b[k] = (b[k].0.min(v), b[k].1.max(v));
        }
    }
    Some(b)
}

#[test]
fn larger_samples_do_not_widen_the_set() {
    let noise = NoiseSpec::DEGENERATE;
    let mut prev: Option<[(f64, f64); 3]> = None;
    for n in [25_000, 50_000, 100_000] {
        let d = simulate_data(&truth(), truth_comp(), 1.0, 0.5, &noise, n, 17).unwrap();
        let y = default_y_grid(&d, DEFAULT_Y_POINTS).unwrap();
        let b = bounding_box(&identified_set(&small_grid(), &d, &noise, &y).unwrap()).expect("truth accepted");
        if let Some(p) = prev {
            for k in 0..3 {
                assert!(b[k].0 >= p[k].0 - 1e-12 && b[k].1 <= p[k].1 + 1e-12, "n = {n}: {b:?} vs {p:?}");
            }
        }
        prev = Some(b);
    }
}
