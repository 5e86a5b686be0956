//! Seeded random smooth functions and the operator identities checked on them.

use conformable::calculus::{
    chain_rule_residual, fundamental_theorem_residual, inverse_residual, left_deriv,
    left_deriv_quotient, multivar_chain_residual, parts_residual, right_deriv, Anchor, ChainCase,
    Order, PartsMode,
};
use conformable::{FunctionHandle, MultiFunction, QuadratureSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `c0 + c1·u + c2·u² + c3·sin(k0·u + k1) + c4·exp(k2·u)`.
#[derive(Debug, Clone, Copy)]
pub struct Smooth {
    pub c: [f64; 5],
    pub k: [f64; 3],
}

impl Smooth {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut c = [0.0; 5];
        for ci in &mut c {
            *ci = rng.gen_range(-1.0..1.0);
        }
        Self {
            c,
            k: [rng.gen_range(0.5..3.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        let [c0, c1, c2, c3, c4] = self.c;
        let [k0, k1, k2] = self.k;
        c0 + c1 * u + c2 * u * u + c3 * (k0 * u + k1).sin() + c4 * (k2 * u).exp()
    }

    pub fn deriv(&self, u: f64) -> f64 {
        let [_, c1, c2, c3, c4] = self.c;
        let [k0, k1, k2] = self.k;
        c1 + 2.0 * c2 * u + c3 * k0 * (k0 * u + k1).cos() + c4 * k2 * (k2 * u).exp()
    }

    /// The same function moved up so that it is at least `floor` on `[lo, hi]`.
    pub fn lifted(mut self, floor: f64, lo: f64, hi: f64) -> Self {
        let min = (0..=400)
            .map(|i| self.value(lo + (hi - lo) * i as f64 / 400.0))
            .fold(f64::INFINITY, f64::min);
        if min < floor {
            self.c[0] += floor - min + 0.1;
        }
        self
    }

    /// Value-only handle: derivatives come from the limit quotient.
    pub fn bare(self) -> FunctionHandle {
        FunctionHandle::new(move |u| self.value(u))
    }

    /// Handle carrying the analytic first derivative.
    pub fn handle(self) -> FunctionHandle {
        FunctionHandle::new(move |u| self.value(u)).with_deriv1(move |u| self.deriv(u))
    }
}

pub fn corpus(seed: u64, n: usize) -> Vec<Smooth> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Smooth::random(&mut rng)).collect()
}

pub const CORPUS_ALPHAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
const POINTS: [f64; 3] = [0.25, 0.6, 1.0];

fn map(s: Smooth, f: impl Fn(f64) -> f64 + Copy + Send + Sync + 'static, df: f64) -> FunctionHandle {
    FunctionHandle::new(move |u| f(s.value(u))).with_deriv1(move |u| df * s.deriv(u))
}

/// Worst residual of every identity on `[0, 1]` for the pair `(f, g)`, by
/// identity name. Derivative identities are checked at three interior points.
pub fn identity_residuals(f: Smooth, g: Smooth, alpha: f64) -> Vec<(&'static str, f64)> {
    let order = Order::new(alpha).unwrap();
    let q = QuadratureSettings::default();
    let (a, b) = (0.0, 1.0);
    let (fh, gh) = (f.handle(), g.handle());
    let mut out = Vec::new();
    let worst = |r: &dyn Fn(f64) -> f64| POINTS.iter().map(|&x| r(x)).fold(0.0, f64::max);

    out.push(("inverse", inverse_residual(&f.bare(), order, a, &POINTS, &q).unwrap()));
    out.push(("fundamental", fundamental_theorem_residual(&fh, order, a, b, &q).unwrap()));
    for (name, mode) in [
        ("parts_left", PartsMode::Left),
        ("parts_right", PartsMode::Right),
        ("parts_mixed", PartsMode::Mixed),
    ] {
        out.push((name, parts_residual(&fh, &gh, order, a, b, &q, mode).unwrap()));
    }

    // left sides from the limit quotient of the combination, right sides from
    // the derivatives of the factors
    let (c1, c2) = (f.c[4] + 1.5, g.c[3] - 0.7);
    let combo = FunctionHandle::new(move |u| c1 * f.value(u) + c2 * g.value(u));
    let product = FunctionHandle::new(move |u| f.value(u) * g.value(u));
    let gl = g.lifted(0.5, -1.0, 2.0);
    let glh = gl.handle();
    let quotient = FunctionHandle::new(move |u| f.value(u) / gl.value(u));
    let dl = |h: &FunctionHandle, x: f64| left_deriv(h, order, a, x).unwrap();
    let dr = |h: &FunctionHandle, x: f64| right_deriv(h, order, b, x).unwrap();
    let ql = |h: &FunctionHandle, x: f64| left_deriv_quotient(h, order, a, x).unwrap();
    out.push((
        "linearity",
        worst(&|x| {
            let l = (ql(&combo, x) - c1 * dl(&fh, x) - c2 * dl(&gh, x)).abs();
            let r = (dr(&combo, x) - c1 * dr(&fh, x) - c2 * dr(&gh, x)).abs();
            l.max(r)
        }),
    ));
    out.push((
        "product",
        worst(&|x| {
            let (fx, gx) = (f.value(x), g.value(x));
            let l = (ql(&product, x) - dl(&fh, x) * gx - fx * dl(&gh, x)).abs();
            let r = (dr(&product, x) - dr(&fh, x) * gx - fx * dr(&gh, x)).abs();
            l.max(r)
        }),
    ));
    out.push((
        "quotient",
        worst(&|x| {
            let (fx, gx) = (f.value(x), gl.value(x));
            let l = (ql(&quotient, x) - (dl(&fh, x) * gx - fx * dl(&glh, x)) / (gx * gx)).abs();
            let r = (dr(&quotient, x) - (dr(&fh, x) * gx - fx * dr(&glh, x)) / (gx * gx)).abs();
            l.max(r)
        }),
    ));

    // inner functions placed on the side each composite rule requires
    let lift = g.lifted(0.2, -0.5, 1.5);
    let inners = [
        (ChainCase::InnerAboveLeft, Anchor::left(a), map(lift, move |v| a + v, 1.0)),
        (ChainCase::InnerBelowRight, Anchor::right(b), map(lift, move |v| b - v, -1.0)),
        (ChainCase::InnerBelowLeft, Anchor::left(a), map(lift, move |v| a - v, -1.0)),
        (ChainCase::InnerAboveRight, Anchor::right(b), map(lift, move |v| b + v, 1.0)),
    ];
    let mut chain = 0.0f64;
    for (case, anchor, inner) in &inners {
        for x in POINTS {
            let x = if anchor.point == b { 1.0 - x } else { x };
            let r = chain_rule_residual(&fh, inner, order, *anchor, x, *case).unwrap();
            chain = chain.max(r);
        }
    }
    out.push(("chain", chain));

    let big_f = MultiFunction::new(2, |z| z[0] * z[1] + z[0].sin()).with_gradient(|z, grad| {
        grad[0] = z[1] + z[0].cos();
        grad[1] = z[0];
    });
    out.push((
        "multivariate_chain",
        worst(&|x| multivar_chain_residual(&big_f, &[fh.clone(), gh.clone()], order, a, x).unwrap()),
    ));
    out
}
