use mediv_core::{
    log_zeta_at_zero, me_diversity, shannon, simpson, MomentConstraint, PriorSpec, SamplingConfig,
    SpeciesCounts,
};
use proptest::prelude::*;

fn counts(c: &[u64]) -> SpeciesCounts {
    SpeciesCounts::from_counts(c.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn shannon_permutation_and_scale_invariant(
        mut m in prop::collection::vec(0u64..50, 2..12),
        scale in 1u64..20,
        seed in any::<u64>(),
    ) {
        prop_assume!(m.iter().sum::<u64>() > 0);
        let base = shannon(&counts(&m)).unwrap();
        let scaled = shannon(&counts(&m).scaled(scale)).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12);
        // rotation as a cheap permutation
        let r = (seed as usize) % m.len();
        m.rotate_left(r);
        prop_assert!((shannon(&counts(&m)).unwrap() - base).abs() <= 1e-12);
        let k = m.len() as f64;
        prop_assert!(base >= 0.0 && base <= k.ln() + 1e-12);
        let s = simpson(&counts(&m)).unwrap();
        prop_assert!(s >= 1.0 / k - 1e-12 && s <= 1.0 + 1e-12);
    }

    #[test]
    fn zero_count_species_is_ignored(m in prop::collection::vec(0u64..50, 2..12)) {
        prop_assume!(m.iter().sum::<u64>() > 0);
        let mut extended = m.clone();
        extended.push(0);
        prop_assert_eq!(shannon(&counts(&m)).unwrap(), shannon(&counts(&extended)).unwrap());
    }
}

#[test]
fn uniform_counts_reach_log_k() {
    for k in 2..=64usize {
        let c = counts(&vec![3; k]);
        assert!((shannon(&c).unwrap() - (k as f64).ln()).abs() <= 1e-12, "k={k}");
        assert!((simpson(&c).unwrap() - 1.0 / k as f64).abs() <= 1e-12);
    }
}

#[test]
fn me_diversity_reflects_abundance() {
    let m = counts(&[4, 8, 2, 3, 3]);
    let m10 = m.scaled(10);
    let flat = PriorSpec::flat(5);
    assert_eq!(shannon(&m).unwrap(), shannon(&m10).unwrap());
    let a = log_zeta_at_zero(&m, &flat).unwrap();
    let b = log_zeta_at_zero(&m10, &flat).unwrap();
    assert!((a - b).abs() > 1.0, "{a} vs {b}");

    let cfg = SamplingConfig { n_samples: 10_000, ..SamplingConfig::default() };
    let ra = me_diversity(&m, &flat, None, &cfg).unwrap();
    let rb = me_diversity(&m10, &flat, None, &cfg).unwrap();
    assert_eq!(ra.s_traditional, rb.s_traditional);
    assert_ne!(ra.s_me, rb.s_me);
}

#[test]
fn tilted_bound_by_unconstrained_log_zeta() {
    let m = counts(&[4, 8, 2, 3, 3]);
    let flat = PriorSpec::flat(5);
    let cfg = SamplingConfig { n_samples: 100_000, seed: 12, ..SamplingConfig::default() };
    for (f, target) in [
        (vec![0.0, 1.0, 0.0, 0.0, -2.0], 0.0),
        (vec![1.0, 0.0, 0.0, 0.0, 0.0], 0.5),
        (vec![0.0, 0.0, 1.0, -1.0, 0.0], 0.1),
    ] {
        let con = MomentConstraint::new(f, target).unwrap();
        let r = me_diversity(&m, &flat, Some(&con), &cfg).unwrap();
        assert!(r.diagnostics.converged);
        assert!(r.log_zeta - r.beta * target <= r.log_zeta_at_zero + 3.0 * r.diagnostics.stderr_log_zeta);
        assert_eq!(r.s_me, r.log_zeta - r.beta * r.target_f);
    }
}

#[test]
fn thread_count_does_not_change_report() {
    let m = counts(&[4, 8, 2, 3, 3]);
    let con = MomentConstraint::new(vec![0.0, 1.0, 0.0, 0.0, -2.0], 0.0).unwrap();
    let run = |threads| {
        let cfg = SamplingConfig { n_samples: 50_000, seed: 3, threads: Some(threads), ..SamplingConfig::default() };
        me_diversity(&m, &PriorSpec::flat(5), Some(&con), &cfg).unwrap()
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn tight_tolerance_is_clamped_to_noise_floor() {
    let m = counts(&[4, 8, 2, 3, 3]);
    let con = MomentConstraint::new(vec![0.0, 1.0, 0.0, 0.0, -2.0], 0.0).unwrap();
    let mut cfg = SamplingConfig { n_samples: 1_000, ..SamplingConfig::default() };
    cfg.solver.tolerance = 1e-12;
    let r = me_diversity(&m, &PriorSpec::flat(5), Some(&con), &cfg).unwrap();
    assert!(r.diagnostics.effective_tolerance > 1e-12);
    assert!(r.diagnostics.residual <= r.diagnostics.effective_tolerance);
}
