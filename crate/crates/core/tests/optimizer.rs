use chirpsync::optimize::{feasible, optimize_alpha, s1_feasible, ConstraintSet, Constraint};
use chirpsync::profile::Profile;
use chirpsync::spectral::{mask_check, occupied_bandwidth, ALPHA_TOLERANCE};
use chirpsync::units::{from_us, khz_per_us};

fn constraints(t_us: f64) -> ConstraintSet {
    ConstraintSet::from_profile(&Profile::nbiot(), from_us(t_us)).unwrap()
}

#[test]
fn optimum_is_feasible_and_locally_maximal() {
    for (t_us, expected) in [(780.0, 0.251), (390.0, 0.481)] {
        let cs = constraints(t_us);
        let best = optimize_alpha(&cs).unwrap();
        let a = khz_per_us(best.alpha_hat);
        assert!((a - expected).abs() / expected < 0.02, "T={t_us}: {a}");
        assert_eq!(best.beta_hat, 0.0);
        assert_eq!(best.binding_constraint, Constraint::S2);
        assert!(feasible(best.alpha_hat, best.beta_hat, &cs).unwrap());
        assert!(!feasible(best.alpha_hat + 2.0 * ALPHA_TOLERANCE, best.beta_hat, &cs).unwrap());
        assert!(s1_feasible(best.alpha_hat, &cs));
    }
}

#[test]
fn mirrored_optimum_has_identical_bandwidth_and_margin() {
    let cs = constraints(780.0);
    let best = optimize_alpha(&cs).unwrap();
    let [up, down] = best.pair;
    assert_eq!(down.alpha, -up.alpha);
    assert!(feasible(down.alpha, down.beta, &cs).unwrap());
    let w_up = occupied_bandwidth(&up, cs.sigma, cs.sample_rate).unwrap();
    let w_down = occupied_bandwidth(&down, cs.sigma, cs.sample_rate).unwrap();
    assert!((w_up - w_down).abs() <= 1e-9 * w_up);
    let m_up = mask_check(&up, &cs.mask, cs.sample_rate).unwrap().worst_margin_db;
    let m_down = mask_check(&down, &cs.mask, cs.sample_rate).unwrap().worst_margin_db;
    assert!((m_up - m_down).abs() <= 1e-9 * m_up.abs());
}

#[test]
fn reflected_beta_gives_the_same_edge() {
    let cs = constraints(780.0);
    let best = optimize_alpha(&cs).unwrap();
    for beta in [best.beta_hat, -best.beta_hat] {
        assert!(feasible(best.alpha_hat, beta, &cs).unwrap());
        assert!(!feasible(best.alpha_hat + 2.0 * ALPHA_TOLERANCE, beta, &cs).unwrap());
    }
    let region = chirpsync::optimize::feasible_region(&cs).unwrap();
    for &(a, b) in &region.points {
        assert!(region.contains(a, -b) && region.contains(-a, b));
    }
}

#[test]
fn report_uses_display_units() {
    let best = optimize_alpha(&constraints(390.0)).unwrap();
    let r = best.report();
    assert_eq!(r.binding_constraint, "S2");
    assert!((r.alpha_hat_khz_per_us - 0.481).abs() < 0.01);
    assert_eq!(r.grid_spec.alpha_points, 121);
    assert!(serde_json::to_string(&r).unwrap().contains("alpha_hat_khz_per_us"));
}
