mod common;

use hpbp::bp::{bp_apply, psi_tilde_apply, subordinated_apply, SubordinationRoute};
use hpbp::ensemble::{contraction_member, stable_member};
use hpbp::symbols::{log_shift, neg_frac_power_bernstein, BernsteinSymbol};
use hpbp::{QuadratureSpec, C64};
use proptest::prelude::*;

use common::{dist, ln1m};

fn pick_psi(log: bool, beta: f64) -> (BernsteinSymbol, Box<dyn Fn(C64) -> C64>) {
    if log {
        (log_shift(), Box::new(|l: C64| -ln1m(l)))
    } else {
        (neg_frac_power_bernstein(beta).unwrap(), Box::new(move |l: C64| -(-l).powf(beta)))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn factorization(seed in 0u64..10_000, dim in 2usize..=16, beta in 0.1f64..0.9, log in any::<bool>()) {
        let m = stable_member(seed, dim).unwrap();
        let spec = QuadratureSpec::default();
        let (psi, _) = pick_psi(log, beta);
        let t = psi_tilde_apply(&psi, &m.gen, &m.x, &spec).unwrap().vector();
        let d = bp_apply(&psi, &m.gen, &m.x, &spec).unwrap().vector();
        prop_assert!(dist(&(m.gen.matrix() * t), &d) <= 1e-7 * (1.0 + m.x.norm()));
    }

    #[test]
    fn oracle_equivalence(seed in 0u64..10_000, dim in 2usize..=16, beta in 0.1f64..0.9, log in any::<bool>()) {
        let m = stable_member(seed, dim).unwrap();
        let (psi, f) = pick_psi(log, beta);
        let r = bp_apply(&psi, &m.gen, &m.x, &QuadratureSpec::default()).unwrap();
        let want = m.exact(|l| Some(f(l)), &m.x).unwrap();
        let tol = (1e-7 * want.norm()).max(10.0 * r.error_estimate);
        prop_assert!(dist(&r.vector(), &want) <= tol);
    }

    #[test]
    fn subordinated_law(seed in 0u64..10_000, dim in 2usize..=16, beta in 0.1f64..0.9, s in 0.1f64..2.0, t in 0.1f64..2.0) {
        let m = stable_member(seed, dim).unwrap();
        let spec = QuadratureSpec::default();
        let psi = neg_frac_power_bernstein(beta).unwrap();
        let direct = SubordinationRoute::Direct;
        let full = subordinated_apply(&psi, s + t, &m.gen, &m.x, &spec, direct).unwrap().vector();
        let inner = subordinated_apply(&psi, t, &m.gen, &m.x, &spec, direct).unwrap().vector();
        let outer = subordinated_apply(&psi, s, &m.gen, &inner, &spec, direct).unwrap().vector();
        prop_assert!(dist(&full, &outer) <= 1e-8 * (1.0 + m.x.norm()));
    }

    #[test]
    fn contractivity(seed in 0u64..10_000, dim in 2usize..=16, beta in 0.1f64..0.9, t in 0.1f64..3.0, log in any::<bool>()) {
        let m = contraction_member(seed, dim, 0.9).unwrap();
        prop_assume!(m.gen.growth_m() == 1.0);
        let (psi, _) = pick_psi(log, beta);
        let r = subordinated_apply(&psi, t, &m.gen, &m.x, &QuadratureSpec::default(), SubordinationRoute::Direct).unwrap();
        prop_assert!(r.vector().norm() <= m.x.norm() + 10.0 * r.error_estimate + 1e-14);
    }
}
