use mediv_core::{
    draw_bank, grid_quadrature, log_zeta_at_zero, posterior_means, zeta_at, PriorSpec,
    SpeciesCounts, TiltedBank,
};

fn counts(c: &[u64]) -> SpeciesCounts {
    SpeciesCounts::from_counts(c.to_vec()).unwrap()
}

/// `log[n!/(n+k−1)!]` by summing logs of integers.
fn flat_log_zeta0(m: &[u64]) -> f64 {
    let n: u64 = m.iter().sum();
    let k = m.len() as u64;
    -((n + 1)..=(n + k - 1)).map(|i| (i as f64).ln()).sum::<f64>()
}

#[test]
fn closed_form_anchor() {
    for m in [vec![1, 1], vec![0, 0, 0], vec![4, 8, 2, 3, 3], vec![30, 0, 1, 2, 0, 7]] {
        let c = counts(&m);
        let lz = log_zeta_at_zero(&c, &PriorSpec::flat(m.len())).unwrap();
        assert!((lz - flat_log_zeta0(&m)).abs() < 1e-12, "{m:?}");
    }
}

#[test]
fn dirichlet_prior_closed_form_matches_quadrature() {
    let c = counts(&[3, 0, 2]);
    // integer exponents keep the integrand smooth at the simplex boundary
    let prior = PriorSpec::new(vec![2.0, 3.0, 1.0]).unwrap();
    let q = grid_quadrature(&c, &prior, &[0.0; 3], 0.0, 1000).unwrap();
    assert!((q.zeta.log_zeta - log_zeta_at_zero(&c, &prior).unwrap()).abs() < 1e-6);
    // Dirichlet(5, 3, 3) means
    let total = 11.0;
    for (m, a) in q.means.iter().zip([5.0, 3.0, 3.0]) {
        assert!((m - a / total).abs() < 1e-5);
    }
}

#[test]
fn dirichlet_posterior_mean_k3() {
    let c = counts(&[2, 1, 0]);
    let bank = draw_bank(&c, &PriorSpec::flat(3), 1_000_000, 2024).unwrap();
    let pm = posterior_means(&bank, &c, &[0.0; 3], 0.0).unwrap();
    for ((m, se), expect) in pm.means.iter().zip(&pm.stderrs).zip([3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0]) {
        assert!((m - expect).abs() <= 4.0 * se, "{m} vs {expect} (se {se})");
    }
    assert!((pm.means.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn symmetric_counts_give_symmetric_means() {
    let c = counts(&[5, 5]);
    let bank = draw_bank(&c, &PriorSpec::flat(2), 200_000, 1).unwrap();
    let pm = posterior_means(&bank, &c, &[1.0, -1.0], 0.0).unwrap();
    for (m, se) in pm.means.iter().zip(&pm.stderrs) {
        assert!((m - 0.5).abs() <= 4.0 * se);
    }
}

#[test]
fn monte_carlo_matches_quadrature_k3() {
    let c = counts(&[2, 1, 1]);
    let prior = PriorSpec::flat(3);
    let f = [1.0, 0.0, -1.0];
    let beta = 0.7;
    let bank = draw_bank(&c, &prior, 1_000_000, 99).unwrap();
    let mc = zeta_at(&bank, &c, &f, beta).unwrap();
    let grid = grid_quadrature(&c, &prior, &f, beta, 2000).unwrap();
    let tol = (3.0 * mc.stderr_log_zeta).max(1e-3);
    assert!((mc.log_zeta - grid.zeta.log_zeta).abs() <= tol);
    let tol = (3.0 * mc.stderr_dlog_dbeta).max(1e-3);
    assert!((mc.dlog_dbeta - grid.zeta.dlog_dbeta).abs() <= tol);
}

#[test]
fn monte_carlo_matches_quadrature_k2_across_beta() {
    let c = counts(&[3, 6]);
    let prior = PriorSpec::flat(2);
    let f = [2.0, -1.0];
    let bank = draw_bank(&c, &prior, 1_000_000, 5).unwrap();
    let tilted = TiltedBank::new(&bank, &c, &f).unwrap();
    for beta in [-5.0, -2.0, -0.5, 0.0, 1.0, 3.0, 5.0] {
        let mc = tilted.zeta(beta).unwrap();
        let grid = grid_quadrature(&c, &prior, &f, beta, 4000).unwrap();
        let tol = (3.0 * mc.stderr_log_zeta).max(1e-3);
        assert!((mc.log_zeta - grid.zeta.log_zeta).abs() <= tol, "beta {beta}");
    }
}

#[test]
fn derivative_matches_finite_difference() {
    let c = counts(&[4, 8, 2, 3, 3]);
    let f = [0.0, 1.0, 0.0, 0.0, -2.0];
    let bank = draw_bank(&c, &PriorSpec::flat(5), 100_000, 17).unwrap();
    let tilted = TiltedBank::new(&bank, &c, &f).unwrap();
    let h = 1e-4;
    for i in -10..=10 {
        let beta = i as f64 * 0.5;
        let z = tilted.zeta(beta).unwrap();
        let fd = (tilted.zeta(beta + h).unwrap().log_zeta - tilted.zeta(beta - h).unwrap().log_zeta)
            / (2.0 * h);
        let scale = z.dlog_dbeta.abs().max(1e-3);
        assert!((fd - z.dlog_dbeta).abs() / scale < 1e-6, "beta {beta}: fd {fd} vs {}", z.dlog_dbeta);
        let fd2 = (tilted.zeta(beta + h).unwrap().dlog_dbeta - tilted.zeta(beta - h).unwrap().dlog_dbeta)
            / (2.0 * h);
        assert!((fd2 - z.d2log_dbeta2).abs() / z.d2log_dbeta2 < 1e-5);
    }
}

#[test]
fn log_zeta_is_convex_on_fixed_bank() {
    let c = counts(&[1, 0, 6, 2]);
    let f = [1.0, -1.0, 0.5, 0.0];
    let bank = draw_bank(&c, &PriorSpec::flat(4), 50_000, 3).unwrap();
    let tilted = TiltedBank::new(&bank, &c, &f).unwrap();
    let values: Vec<f64> = (0..=40).map(|i| tilted.zeta(-4.0 + 0.2 * i as f64).unwrap().log_zeta).collect();
    let slopes: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / 0.2).collect();
    for s in slopes.windows(2) {
        assert!(s[1] - s[0] >= -1e-9);
    }
}

#[test]
fn zeta_estimates_are_deterministic() {
    let c = counts(&[4, 8, 2, 3, 3]);
    let f = [0.0, 1.0, 0.0, 0.0, -2.0];
    let a = draw_bank(&c, &PriorSpec::flat(5), 20_000, 77).unwrap();
    let b = draw_bank(&c, &PriorSpec::flat(5), 20_000, 77).unwrap();
    let za = zeta_at(&a, &c, &f, -0.8).unwrap();
    let zb = zeta_at(&b, &c, &f, -0.8).unwrap();
    assert_eq!(za.log_zeta.to_bits(), zb.log_zeta.to_bits());
    assert_eq!(za.dlog_dbeta.to_bits(), zb.dlog_dbeta.to_bits());
    assert_eq!(za, zb);
}

#[test]
fn zero_count_species_are_allowed() {
    let c = counts(&[0, 0, 5]);
    let bank = draw_bank(&c, &PriorSpec::flat(3), 10_000, 0).unwrap();
    let z = zeta_at(&bank, &c, &[1.0, 0.0, 0.0], 1.0).unwrap();
    assert!(z.log_zeta.is_finite());
    assert!(z.ess > 0.5 * 10_000.0);
}
