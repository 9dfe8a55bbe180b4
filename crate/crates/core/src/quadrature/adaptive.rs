//! Globally adaptive panel quadrature.
//!
//! Every panel is evaluated with an `n`-point and an `n/2`-point Gauss rule; the
//! difference is the panel's error estimate and the panel with the largest
//! estimate is bisected until the sum drops below the target. The panel that
//! touches `t = 0` carries the endpoint behavior of the density (Jacobi weight,
//! power substitution, or distribution-function subtraction) and bisects into a
//! smaller origin panel plus a regular one.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::density::{Density, Origin};
use super::rules::{gauss_jacobi_unit, gauss_legendre_unit, GaussRule};
use super::{EndpointHandling, QuadratureSpec};
use crate::{CMat, C64};

/// Values the engine can integrate.
pub trait QuadValue: Clone {
    fn zeros_like(&self) -> Self;
    fn axpy(&mut self, w: f64, x: &Self);
    fn axpy_complex(&mut self, w: C64, x: &Self);
    fn norm(&self) -> f64;
    fn dist(&self, other: &Self) -> f64;
}

impl QuadValue for f64 {
    fn zeros_like(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        *self += w * x;
    }
    fn axpy_complex(&mut self, w: C64, x: &Self) {
        debug_assert!(w.im == 0.0, "complex weight on a real integral");
        *self += w.re * x;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl QuadValue for C64 {
    fn zeros_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        *self += x * w;
    }
    fn axpy_complex(&mut self, w: C64, x: &Self) {
        *self += x * w;
    }
    fn norm(&self) -> f64 {
        C64::norm(*self)
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl QuadValue for CMat {
    fn zeros_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x.iter()) {
            *s += v * w;
        }
    }
    fn axpy_complex(&mut self, w: C64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x.iter()) {
            *s += v * w;
        }
    }
    fn norm(&self) -> f64 {
        CMat::norm(self)
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// A set of relative node positions in `[0, 1]` with an identifier that is
/// stable for the lifetime of one integration (integrands may cache on it).
#[derive(Clone, Copy)]
pub struct NodeSet<'a> {
    pub id: u32,
    pub rel: &'a [f64],
}

/// Integrand evaluated a panel at a time at `t = a + width · rel[i]`.
pub trait PanelIntegrand<V> {
    fn eval(&mut self, a: f64, width: f64, nodes: NodeSet<'_>) -> Vec<V>;

    /// Size of the input the integrand acts on; scales absolute tolerances and
    /// tail bounds.
    fn scale(&self) -> f64 {
        1.0
    }

    fn at(&mut self, t: f64) -> V {
        self.eval(t, 0.0, NodeSet { id: u32::MAX, rel: &[0.0] })
            .pop()
            .expect("integrand returned no value")
    }
}

/// Adapter for plain closures.
pub struct Pointwise<F>(pub F);

impl<V, F: FnMut(f64) -> V> PanelIntegrand<V> for Pointwise<F> {
    fn eval(&mut self, a: f64, width: f64, nodes: NodeSet<'_>) -> Vec<V> {
        nodes.rel.iter().map(|r| (self.0)(a + width * r)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Outcome<V> {
    pub value: V,
    pub error_estimate: f64,
    pub target: f64,
    pub panels: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Regular,
    Origin { depth: u32 },
}

#[derive(Clone)]
struct Panel<V> {
    a: f64,
    b: f64,
    kind: Kind,
    value: V,
    error: f64,
}

struct HeapEntry {
    error: f64,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by index for deterministic refinement order
        self.error
            .total_cmp(&other.error)
            .then(other.index.cmp(&self.index))
    }
}

/// Dyadic refinement levels allowed below the initial origin panel.
pub const MAX_ORIGIN_DEPTH: u32 = 60;

enum OriginRule {
    Jacobi { p: f64, high: GaussRule, low: GaussRule },
    Substitution { p: f64, high: GaussRule, low: GaussRule },
    Subtraction,
}

const ID_HIGH: u32 = 1;
const ID_LOW: u32 = 2;
const ID_ORIGIN_HIGH: u32 = 3;
const ID_ORIGIN_LOW: u32 = 4;

struct Engine<'w, V> {
    weight: &'w dyn Fn(f64) -> f64,
    cdf: Option<&'w dyn Fn(f64) -> f64>,
    origin: OriginRule,
    high: &'static GaussRule,
    low: &'static GaussRule,
    phi0: Option<V>,
}

impl<'w, V: QuadValue> Engine<'w, V> {
    fn weighted_sum(
        &self,
        vals: &[V],
        ts: impl Iterator<Item = f64>,
        weights: &[f64],
        scale: f64,
        weight_fn: impl Fn(f64) -> f64,
        shift: Option<&V>,
    ) -> V {
        let mut acc = vals[0].zeros_like();
        for ((v, t), &w) in vals.iter().zip(ts).zip(weights) {
            let c = scale * w * weight_fn(t);
            if c == 0.0 {
                continue;
            }
            acc.axpy(c, v);
            if let Some(s) = shift {
                acc.axpy(-c, s);
            }
        }
        acc
    }

    fn regular<I: PanelIntegrand<V>>(&self, phi: &mut I, a: f64, b: f64) -> (V, f64) {
        let h = b - a;
        let vh = phi.eval(a, h, NodeSet { id: ID_HIGH, rel: &self.high.nodes });
        let vl = phi.eval(a, h, NodeSet { id: ID_LOW, rel: &self.low.nodes });
        let w = self.weight;
        let ih = self.weighted_sum(
            &vh,
            self.high.nodes.iter().map(|r| a + h * r),
            &self.high.weights,
            h,
            w,
            None,
        );
        let il = self.weighted_sum(
            &vl,
            self.low.nodes.iter().map(|r| a + h * r),
            &self.low.weights,
            h,
            w,
            None,
        );
        let err = ih.dist(&il);
        (ih, err)
    }

    fn origin<I: PanelIntegrand<V>>(&mut self, phi: &mut I, h: f64) -> (V, f64) {
        let w = self.weight;
        match &self.origin {
            OriginRule::Jacobi { p, high, low } | OriginRule::Substitution { p, high, low } => {
                let p = *p;
                let subst = matches!(self.origin, OriginRule::Substitution { .. });
                let q = p + 1.0;
                // relative node positions in t
                let rel_of = |r: &GaussRule| -> Vec<f64> {
                    if subst {
                        r.nodes.iter().map(|v| v.powf(1.0 / q)).collect()
                    } else {
                        r.nodes.clone()
                    }
                };
                let (rh, rl) = (rel_of(high), rel_of(low));
                let vh = phi.eval(0.0, h, NodeSet { id: ID_ORIGIN_HIGH, rel: &rh });
                let vl = phi.eval(0.0, h, NodeSet { id: ID_ORIGIN_LOW, rel: &rl });
                let factor = if subst { h.powf(q) / q } else { h.powf(q) };
                let smooth = |t: f64| w(t) / t.powf(p);
                let ih = self.weighted_sum(
                    &vh,
                    rh.iter().map(|r| h * r),
                    &high.weights,
                    factor,
                    smooth,
                    None,
                );
                let il = self.weighted_sum(
                    &vl,
                    rl.iter().map(|r| h * r),
                    &low.weights,
                    factor,
                    smooth,
                    None,
                );
                let err = ih.dist(&il);
                (ih, err)
            }
            OriginRule::Subtraction => {
                if self.phi0.is_none() {
                    self.phi0 = Some(phi.at(0.0));
                }
                let phi0 = self.phi0.clone().expect("phi0 set above");
                let cdf = self.cdf.expect("subtraction origin requires a cdf");
                let vh = phi.eval(0.0, h, NodeSet { id: ID_HIGH, rel: &self.high.nodes });
                let vl = phi.eval(0.0, h, NodeSet { id: ID_LOW, rel: &self.low.nodes });
                let rem_h = self.weighted_sum(
                    &vh,
                    self.high.nodes.iter().map(|r| h * r),
                    &self.high.weights,
                    h,
                    w,
                    Some(&phi0),
                );
                let rem_l = self.weighted_sum(
                    &vl,
                    self.low.nodes.iter().map(|r| h * r),
                    &self.low.weights,
                    h,
                    w,
                    Some(&phi0),
                );
                let err = rem_h.dist(&rem_l);
                let mut total = rem_h;
                total.axpy(cdf(h), &phi0);
                (total, err)
            }
        }
    }

    fn eval<I: PanelIntegrand<V>>(&mut self, phi: &mut I, a: f64, b: f64, kind: Kind) -> (V, f64) {
        match kind {
            Kind::Regular => self.regular(phi, a, b),
            Kind::Origin { .. } => self.origin(phi, b),
        }
    }
}

fn run<V: QuadValue, I: PanelIntegrand<V>>(
    engine: &mut Engine<'_, V>,
    phi: &mut I,
    initial: Vec<(f64, f64, Kind)>,
    spec: &QuadratureSpec,
) -> Outcome<V> {
    let scale = phi.scale();
    let mut panels: Vec<Panel<V>> = Vec::with_capacity(initial.len() * 2);
    let mut heap = BinaryHeap::new();
    for (a, b, kind) in initial {
        let (value, error) = engine.eval(phi, a, b, kind);
        heap.push(HeapEntry { error, index: panels.len() });
        panels.push(Panel { a, b, kind, value, error });
    }
    let mut alive: Vec<bool> = vec![true; panels.len()];
    let mut total = panels[0].value.zeros_like();
    for p in &panels {
        total.axpy(1.0, &p.value);
    }
    let mut err_sum: f64 = panels.iter().map(|p| p.error).sum();
    let target = |total: &V| (spec.abs_tol * scale).max(spec.rel_tol * total.norm());
    let mut live = panels.len();

    while err_sum > target(&total) && live < spec.max_panels {
        let Some(entry) = heap.pop() else { break };
        let idx = entry.index;
        let p = panels[idx].clone();
        let mid = 0.5 * (p.a + p.b);
        let splittable = match p.kind {
            Kind::Origin { depth } => depth < MAX_ORIGIN_DEPTH && p.b > f64::MIN_POSITIVE * 4.0,
            Kind::Regular => mid > p.a && mid < p.b && (p.b - p.a) > 1e-13 * p.b.abs().max(p.a.abs()),
        };
        if !splittable {
            continue;
        }
        alive[idx] = false;
        total.axpy(-1.0, &p.value);
        err_sum -= p.error;
        live -= 1;
        let left_kind = match p.kind {
            Kind::Origin { depth } => Kind::Origin { depth: depth + 1 },
            Kind::Regular => Kind::Regular,
        };
        for (a, b, kind) in [(p.a, mid, left_kind), (mid, p.b, Kind::Regular)] {
            let (value, error) = engine.eval(phi, a, b, kind);
            total.axpy(1.0, &value);
            err_sum += error;
            heap.push(HeapEntry { error, index: panels.len() });
            panels.push(Panel { a, b, kind, value, error });
            alive.push(true);
            live += 1;
        }
    }

    // Fixed left-to-right summation for reproducible results.
    let mut order: Vec<usize> = (0..panels.len()).filter(|&i| alive[i]).collect();
    order.sort_by(|&i, &j| panels[i].a.total_cmp(&panels[j].a));
    let mut value = panels[order[0]].value.zeros_like();
    let mut error_estimate = 0.0;
    for &i in &order {
        value.axpy(1.0, &panels[i].value);
        error_estimate += panels[i].error;
    }
    let target = target(&value);
    Outcome {
        converged: error_estimate <= target,
        value,
        error_estimate,
        target,
        panels: order.len(),
    }
}

fn make_engine<'w, V>(
    weight: &'w dyn Fn(f64) -> f64,
    cdf: Option<&'w dyn Fn(f64) -> f64>,
    origin: Option<Origin>,
    spec: &QuadratureSpec,
) -> Engine<'w, V> {
    let n = spec.panel_order.max(2);
    let high = gauss_legendre_unit(n);
    let low = gauss_legendre_unit((n / 2).max(1));
    let origin = match origin {
        Some(Origin::Power(p)) => match spec.endpoint_handling {
            EndpointHandling::JacobiWeights => OriginRule::Jacobi {
                p,
                high: gauss_jacobi_unit(n, p),
                low: gauss_jacobi_unit((n / 2).max(1), p),
            },
            EndpointHandling::Substitution => OriginRule::Substitution {
                p,
                high: high.clone(),
                low: low.clone(),
            },
        },
        Some(Origin::Distribution) => OriginRule::Subtraction,
        None => OriginRule::Jacobi {
            p: 0.0,
            high: high.clone(),
            low: low.clone(),
        },
    };
    Engine {
        weight,
        cdf,
        origin,
        high,
        low,
        phi0: None,
    }
}

/// Initial panels for `[lo, hi]`: an origin panel `[0, min(1, hi)]` when
/// `lo = 0`, then doubling panels, split at breakpoints.
fn initial_panels(lo: f64, hi: f64, breakpoints: &[f64]) -> Vec<(f64, f64, Kind)> {
    let mut cuts = Vec::new();
    let mut x = if lo == 0.0 {
        cuts.push(0.0);
        hi.min(1.0)
    } else {
        lo
    };
    cuts.push(x);
    while x < hi {
        x = (2.0 * x).min(hi);
        cuts.push(x);
    }
    for &bp in breakpoints {
        if bp > lo && bp < hi && !cuts.contains(&bp) {
            cuts.push(bp);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let kind = if w[0] == 0.0 {
                Kind::Origin { depth: 0 }
            } else {
                Kind::Regular
            };
            (w[0], w[1], kind)
        })
        .collect()
}

/// `∫_lo^hi Φ(t) density(t) dt` with `0 ≤ lo < hi < ∞`.
pub fn integrate_density<V: QuadValue, I: PanelIntegrand<V>>(
    phi: &mut I,
    density: &Density,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Outcome<V> {
    assert!(lo >= 0.0 && hi > lo, "bad interval [{lo}, {hi}]");
    let f = density.f.clone();
    let weight = move |t: f64| f(t);
    let cdf_arc = density.cdf.clone();
    let cdf_fn = cdf_arc.as_ref().map(|c| {
        let c = c.clone();
        move |t: f64| c(t)
    });
    let cdf_ref: Option<&dyn Fn(f64) -> f64> = cdf_fn.as_ref().map(|c| c as &dyn Fn(f64) -> f64);
    let origin = if lo == 0.0 {
        match density.origin {
            Origin::Distribution if cdf_ref.is_none() => Some(Origin::Power(0.0)),
            o => Some(o),
        }
    } else {
        None
    };
    let mut engine = make_engine(&weight, cdf_ref, origin, spec);
    run(&mut engine, phi, initial_panels(lo, hi, &density.breakpoints), spec)
}

/// `∫_a^b Φ(t) w(t) dt` on a finite interval with a smooth weight, starting
/// from `pieces` equal panels.
pub fn integrate_finite<V: QuadValue, I: PanelIntegrand<V>>(
    phi: &mut I,
    weight: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    pieces: usize,
    spec: &QuadratureSpec,
) -> Outcome<V> {
    assert!(b > a, "bad interval [{a}, {b}]");
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let initial = (0..pieces)
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == pieces { b } else { a + h * (k + 1) as f64 };
            (lo, hi, Kind::Regular)
        })
        .collect();
    let mut engine = make_engine(weight, None, None, spec);
    run(&mut engine, phi, initial, spec)
}

/// `∫_0^b Φ(t) t^p s(t) dt` where the caller passes the full weight
/// `w(t) = t^p s(t)`.
pub fn integrate_singular_left<V: QuadValue, I: PanelIntegrand<V>>(
    phi: &mut I,
    weight: &dyn Fn(f64) -> f64,
    p: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Outcome<V> {
    assert!(b > 0.0);
    let mut engine = make_engine(weight, None, Some(Origin::Power(p)), spec);
    run(&mut engine, phi, vec![(0.0, b, Kind::Origin { depth: 0 })], spec)
}
