mod common;

use hpbp::ensemble::stable_member;
use hpbp::rules::{
    compose_apply, log_inverse, multiply_apply, product_distribution_closed, LogRoute, ProductSymbol,
};
use hpbp::symbols::{frac_power, neg_frac_power_bernstein};
use hpbp::QuadratureSpec;
use proptest::prelude::*;

use common::{dist, ln1m};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn product_routes_agree(seed in 0u64..10_000, dim in 2usize..=16, beta in 0.1f64..0.8, gap in 0.05f64..1.0) {
        let alpha = beta + gap;
        let m = stable_member(seed, dim).unwrap();
        let r = multiply_apply(&frac_power(alpha).unwrap(), &neg_frac_power_bernstein(beta).unwrap(), &m.gen, &m.x, &QuadratureSpec::default()).unwrap();
        let tol = 1e-6 * (1.0 + m.x.norm());
        prop_assert!(dist(&r.h_direct.vector(), &r.psi_after_g.vector()) <= tol);
        prop_assert!(dist(&r.psi_after_g.vector(), &r.g_after_psi.vector()) <= tol);
        let want = m.exact(|l| Some(-(-l).powf(beta - alpha)), &m.x).unwrap();
        prop_assert!(dist(&r.h_direct.vector(), &want) <= tol);
    }

    #[test]
    fn product_distribution_pointwise(beta in 0.1f64..0.8, gap in 0.05f64..1.0, lt in -3.0f64..1.5) {
        let alpha = beta + gap;
        let t = 10f64.powf(lt);
        let p = ProductSymbol::new(&frac_power(alpha).unwrap(), &neg_frac_power_bernstein(beta).unwrap()).unwrap();
        let want = product_distribution_closed(alpha, beta, t);
        let got = p.b(t).unwrap();
        prop_assert!((got - want).abs() <= 1e-7 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn composition_routes_agree(seed in 0u64..10_000, dim in 2usize..=16, alpha in 0.2f64..1.5) {
        let m = stable_member(seed, dim).unwrap();
        let r = compose_apply(&frac_power(alpha).unwrap(), &neg_frac_power_bernstein(0.5).unwrap(), &m.gen, &m.x, &QuadratureSpec::default()).unwrap();
        let tol = 1e-6 * (1.0 + m.x.norm());
        prop_assert!(dist(&r.outer_direct.vector(), &r.nested.vector()) <= tol);
        let want = m.exact(|l| Some((-l).powf(-0.5 * alpha)), &m.x).unwrap();
        prop_assert!(dist(&r.nested.vector(), &want) <= tol);
    }

    #[test]
    fn log_routes_agree(seed in 0u64..10_000, dim in 2usize..=16) {
        let m = stable_member(seed, dim).unwrap();
        let spec = QuadratureSpec::default();
        let v = log_inverse(&m.gen, &m.x, &spec, LogRoute::Volterra).unwrap().vector();
        let r = log_inverse(&m.gen, &m.x, &spec, LogRoute::Resolvent).unwrap().vector();
        let want = m.exact(|l| Some(1.0 / ln1m(l)), &m.x).unwrap();
        let tol = 1e-5 * (1.0 + m.x.norm());
        prop_assert!(dist(&v, &r) <= tol);
        prop_assert!(dist(&v, &want) <= tol);
        prop_assert!(dist(&r, &want) <= tol);
    }
}
