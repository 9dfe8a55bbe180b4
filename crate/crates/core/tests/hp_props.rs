mod common;

use hpbp::ensemble::stable_member;
use hpbp::hp::{hp_apply, hp_apply_by_parts};
use hpbp::linalg::expm_action;
use hpbp::symbols::{exp_tpsi, frac_power, identity, inverse, log_shift, neg_frac_power_bernstein, recip_log, LaplaceSymbol};
use hpbp::{QuadratureSpec, C64};
use proptest::prelude::*;

use common::{dist, ln1m};

fn catalog(pick: usize, alpha: f64) -> (LaplaceSymbol, Box<dyn Fn(C64) -> C64>) {
    match pick {
        0 => (inverse(), Box::new(|l: C64| 1.0 / l)),
        1 => (frac_power(alpha).unwrap(), Box::new(move |l: C64| (-l).powf(-alpha))),
        2 => (recip_log(), Box::new(|l: C64| -1.0 / ln1m(l))),
        3 => (
            exp_tpsi(alpha, &neg_frac_power_bernstein(0.5).unwrap()).unwrap(),
            Box::new(move |l: C64| (-alpha * (-l).sqrt()).exp()),
        ),
        4 => (exp_tpsi(alpha, &log_shift()).unwrap(), Box::new(move |l: C64| (-alpha * ln1m(l)).exp())),
        _ => (exp_tpsi(alpha, &identity()).unwrap(), Box::new(move |l: C64| (alpha * l).exp())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn commutation(seed in 0u64..10_000, dim in 2usize..=16, pick in 0usize..6, alpha in 0.2f64..2.0) {
        let m = stable_member(seed, dim).unwrap();
        let spec = QuadratureSpec::default();
        let (g, _) = catalog(pick, alpha);
        let gx = hp_apply(&g, &m.gen, &m.x, &spec).unwrap().vector();
        let ax = m.gen.matrix() * &m.x;
        let gax = hp_apply(&g, &m.gen, &ax, &spec).unwrap().vector();
        prop_assert!(dist(&(m.gen.matrix() * gx), &gax) <= 1e-8 * m.x.norm());
    }

    #[test]
    fn oracle_equivalence(seed in 0u64..10_000, dim in 2usize..=16, pick in 0usize..6, alpha in 0.2f64..2.0) {
        let m = stable_member(seed, dim).unwrap();
        let (g, f) = catalog(pick, alpha);
        let r = hp_apply(&g, &m.gen, &m.x, &QuadratureSpec::default()).unwrap();
        let want = m.exact(|l| Some(f(l)), &m.x).unwrap();
        let tol = (1e-8 * want.norm()).max(10.0 * r.error_estimate);
        prop_assert!(dist(&r.vector(), &want) <= tol, "{}: {} > {tol}", g.name, dist(&r.vector(), &want));
    }

    #[test]
    fn by_parts_route(seed in 0u64..10_000, dim in 2usize..=16, alpha in 0.2f64..2.0, stable in any::<bool>()) {
        let m = stable_member(seed, dim).unwrap();
        let spec = QuadratureSpec::default();
        let g = if stable {
            exp_tpsi(alpha, &neg_frac_power_bernstein(0.5).unwrap()).unwrap()
        } else {
            frac_power(alpha).unwrap()
        };
        let a = hp_apply_by_parts(&g, &m.gen, &m.x, &spec).unwrap().vector();
        let b = hp_apply(&g, &m.gen, &m.x, &spec).unwrap().vector();
        prop_assert!(dist(&a, &b) <= 1e-8 * m.x.norm());
    }

    #[test]
    fn semigroup_commutes(seed in 0u64..10_000, dim in 2usize..=16, pick in 0usize..6, u in 0.0f64..5.0) {
        let m = stable_member(seed, dim).unwrap();
        let spec = QuadratureSpec::default();
        let (g, _) = catalog(pick, 0.6);
        let gx = hp_apply(&g, &m.gen, &m.x, &spec).unwrap().vector();
        let lhs = expm_action(&m.gen, u, &gx).unwrap();
        let tx = expm_action(&m.gen, u, &m.x).unwrap();
        let rhs = hp_apply(&g, &m.gen, &tx, &spec).unwrap().vector();
        prop_assert!(dist(&lhs, &rhs) <= 1e-8 * m.x.norm());
    }
}
