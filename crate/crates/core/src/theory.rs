//! Constants, special functions and closed-form bounds.
//!
//! All logarithms are natural. Bounds that can overflow are evaluated in log
//! space and exponentiated at the end.

use serde::Serialize;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{domain, Error, Result};

pub const ZETA3: f64 = 1.202_056_903_159_594_285_4;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

pub fn zeta2() -> f64 {
    std::f64::consts::PI * std::f64::consts::PI / 6.0
}

/// `max(ln ln x, 1)`, with the value 1 wherever `ln ln x` is undefined.
pub fn loglog(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    x.ln().ln().max(1.0)
}

/// Root of an increasing function on `[lo, hi]`: safeguarded Newton with a
/// bisection fallback. The returned point has `|f| <= tol`.
fn increasing_root<F, D>(what: &'static str, f: F, df: D, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::NoConvergence(what));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = x - fx / df(x);
        x = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * hi {
            break;
        }
    }
    if f(x).abs() <= tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence(what))
    }
}

/// Unique root of `a ln a - a = 1`, about 3.5911.
pub fn alpha_star() -> f64 {
    alpha_star_with_tolerance(DEFAULT_TOLERANCE).expect("alpha* bracket is fixed")
}

pub fn alpha_star_with_tolerance(tol: f64) -> Result<f64> {
    increasing_root(
        "alpha*",
        |a| a * a.ln() - a - 1.0,
        |a| a.ln(),
        std::f64::consts::E,
        5.0,
        tol,
    )
}

/// `alpha_eps`, `beta_eps` and the path length `k_eps(n)` they define.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonFamily {
    pub eps: f64,
    pub alpha_eps: f64,
    pub beta_eps: f64,
}

impl EpsilonFamily {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(domain("eps", format!("{eps} not in (0, 1/2)")));
        }
        let alpha_eps = alpha_eps(eps)?;
        let beta_eps = 1.0 / (2.0 * (1.0 + alpha_eps.ln() - (1.0 - eps).ln()));
        Ok(Self {
            eps,
            alpha_eps,
            beta_eps,
        })
    }

    /// `alpha_eps ln n - beta_eps loglog n`.
    pub fn k_eps(&self, n: f64) -> f64 {
        self.alpha_eps * n.ln() - self.beta_eps * loglog(n)
    }
}

/// Root of `a ln a - a (1 + ln(1 - eps)) = 1`. Accepts `eps = 0` (giving
/// `alpha*`) and any `eps < 1`.
pub fn alpha_eps(eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(domain("eps", format!("{eps} not in [0, 1)")));
    }
    let shift = 1.0 + (1.0 - eps).ln();
    let log_floor = (1.0 - eps).ln();
    // Minimum of the left side sits at a = 1 - eps, where it is negative.
    increasing_root(
        "alpha_eps",
        |a| a * a.ln() - a * shift - 1.0,
        |a| a.ln() - log_floor,
        1.0 - eps,
        10.0,
        DEFAULT_TOLERANCE,
    )
}

pub fn beta_eps(eps: f64) -> Result<f64> {
    Ok(EpsilonFamily::new(eps)?.beta_eps)
}

pub fn k_eps(n: f64, eps: f64) -> Result<f64> {
    if n < 2.0 {
        return Err(domain("n", format!("{n} < 2")));
    }
    Ok(EpsilonFamily::new(eps)?.k_eps(n))
}

/// `3 sqrt(c) e^{-c}` with `c = m / e^t`; 1 (vacuous) when `m < e^t`.
pub fn spt_tail_bound(t: f64, m: f64) -> f64 {
    let c = m * (-t).exp();
    if !(c >= 1.0) {
        return 1.0;
    }
    3.0 * c.sqrt() * (-c).exp()
}

/// `e^{x-1} m^{x - x ln x}`, bounding the chance that a random recursive
/// tree on `m` nodes has height at least `x ln m`.
pub fn rrt_height_bound(m: f64, x: f64) -> Result<f64> {
    if !(x > 1.0) || m < 2.0 {
        return Err(domain("rrt height bound", format!("m = {m}, x = {x}")));
    }
    Ok(((x - 1.0) + (x - x * x.ln()) * m.ln()).exp())
}

/// `e^{alpha* + t/ln n} e^{-t}` for the all-pairs hop tail beyond
/// `alpha* ln n + t`.
pub fn max_hops_tail_bound(n: f64, t: f64) -> Result<f64> {
    if n < 3.0 || !(t >= 0.0) {
        return Err(domain("max hops bound", format!("n = {n}, t = {t}")));
    }
    Ok((alpha_star() + t / n.ln() - t).exp())
}

/// `13 k^2 / n^eps`.
pub fn lightest_path_bound(n: f64, k: f64, eps: f64) -> f64 {
    13.0 * k * k * (-eps * n.ln()).exp()
}

/// `864 (ln n)^3 / n^2`: `12 ln n` edges, each off by at most
/// `(12 ln n / n)^2 / 2`.
pub fn coupling_bound(n: f64) -> f64 {
    864.0 * n.ln().powi(3) / (n * n)
}

/// `P(Po(w) >= k)` by direct summation of whichever tail is shorter.
pub fn poisson_upper_tail(w: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if w <= 0.0 {
        return 0.0;
    }
    let kf = k as f64;
    if w < kf {
        // Terms decrease from j = k on.
        let mut term = (-w + kf * w.ln() - ln_gamma(kf + 1.0)).exp();
        let mut sum = 0.0;
        let mut j = kf;
        while term > sum * 1e-18 && j < kf + 10_000.0 {
            sum += term;
            j += 1.0;
            term *= w / j;
        }
        sum
    } else {
        let mut term = (-w).exp();
        let mut lower = 0.0;
        for j in 0..k {
            lower += term;
            term *= w / (j as f64 + 1.0);
        }
        (1.0 - lower).max(0.0)
    }
}

/// `ln P(Gamma(k, 1) <= s)`, accurate far into the lower tail.
pub fn ln_gamma_cdf(k: u32, s: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if s <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let kf = k as f64;
    if s > kf + 40.0 * kf.sqrt() + 40.0 {
        return gamma_lr(kf, s).ln();
    }
    // e^{-s} s^k / k! * sum_m s^m k! / (k+m)!
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut m = 0.0;
    while term > sum * 1e-17 {
        sum += term;
        m += 1.0;
        term *= s / (kf + m);
    }
    -s + kf * s.ln() - ln_gamma(kf + 1.0) + sum.ln()
}

pub fn gamma_cdf(k: u32, s: f64) -> f64 {
    ln_gamma_cdf(k, s).exp()
}

pub fn gamma_pdf(k: u32, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        return if k == 1 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    ((kf - 1.0) * t.ln() - t - ln_gamma(kf)).exp()
}

/// `(P(Po(w) >= k), P(Gamma(k) <= w))`: the first by summation, the second
/// by the regularized incomplete gamma function.
pub fn poisson_gamma_identity(w: f64, k: u32) -> Result<(f64, f64)> {
    if !(w >= 0.0) || k == 0 {
        return Err(domain("poisson/gamma", format!("w = {w}, k = {k}")));
    }
    let gamma_side = if w == 0.0 { 0.0 } else { gamma_lr(k as f64, w) };
    Ok((poisson_upper_tail(w, k), gamma_side))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightPathExpectation {
    /// `(n)_{k+1} / 2 * P(Gamma(k) <= s)`, `s = (1-eps) ln n / n`.
    pub exact: f64,
    pub ln_exact: f64,
    /// `n ((1-eps) ln n)^k / k!`.
    pub asymptotic: f64,
}

/// Expected number of undirected `k`-edge paths of n-scale weight at
/// most `(1-eps) ln n`.
pub fn expected_light_paths_exact(n: usize, k: usize, eps: f64) -> Result<LightPathExpectation> {
    if k < 1 || k >= n {
        return Err(domain("k", format!("need 1 <= k <= n-1, got k = {k}, n = {n}")));
    }
    if !(eps >= 0.0 && eps < 1.0) {
        return Err(domain("eps", format!("{eps} not in [0, 1)")));
    }
    let nf = n as f64;
    let s = (1.0 - eps) * nf.ln() / nf;
    let ln_paths: f64 = (0..=k).map(|r| ((n - r) as f64).ln()).sum::<f64>() - 2f64.ln();
    let ln_exact = ln_paths + ln_gamma_cdf(k as u32, s);
    let kf = k as f64;
    let ln_asym = nf.ln() + kf * ((1.0 - eps) * nf.ln()).ln() - ln_gamma(kf + 1.0);
    Ok(LightPathExpectation {
        exact: ln_exact.exp(),
        ln_exact,
        asymptotic: ln_asym.exp(),
    })
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]`; `tol` is absolute.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `P(w(P) <= s, w(Q) <= s)` for two `k`-edge paths sharing `i` edges:
/// `int_0^s f_i(t) F_{k-i}(s-t)^2 dt` with Gamma(., 1) density/CDF.
pub fn joint_weight_exact(k: u32, i: u32, s: f64) -> Result<f64> {
    if !(1 <= i && i < k) {
        return Err(domain("joint weight", format!("need 1 <= i < k, got i = {i}, k = {k}")));
    }
    if !(s >= 0.0) {
        return Err(domain("joint weight", format!("s = {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let r = k - i;
    let integrand = |t: f64| {
        let tail = gamma_cdf(r, s - t);
        gamma_pdf(i, t) * tail * tail
    };
    // Relative accuracy: the value can be far below 1 for small s.
    let panels = 64;
    let h = s / panels as f64;
    let rough = (0..panels)
        .map(|p| {
            let a = p as f64 * h;
            simpson(a, a + h, integrand(a), integrand(a + 0.5 * h), integrand(a + h))
        })
        .sum::<f64>()
        .abs();
    let tol = (1e-13 * rough).max(1e-300);
    Ok(integrate(integrand, 0.0, s, tol))
}

/// `ln(4^{k-i} s^{2k-i} / (2k-i)!)`.
pub fn ln_joint_weight_bound(k: u32, i: u32, s: f64) -> Result<f64> {
    if !(1 <= i && i < k) {
        return Err(domain("joint weight bound", format!("need 1 <= i < k, got i = {i}, k = {k}")));
    }
    if !(s >= 0.0) {
        return Err(domain("joint weight bound", format!("s = {s}")));
    }
    let e = (2 * k - i) as f64;
    Ok(((k - i) as f64) * 4f64.ln() + e * s.ln() - ln_gamma(e + 1.0))
}

pub fn joint_weight_bound(k: u32, i: u32, s: f64) -> Result<f64> {
    Ok(ln_joint_weight_bound(k, i, s)?.exp())
}

/// `ln(n^{2k+2-i-j} (2k^3)^j)`.
pub fn ln_pair_count_bound(n: u64, k: u32, i: u32, j: u32) -> Result<f64> {
    if !(1 <= j && j <= i && i <= k) || n < 2 {
        return Err(domain(
            "pair count bound",
            format!("need 1 <= j <= i <= k, got n = {n}, k = {k}, i = {i}, j = {j}"),
        ));
    }
    let kf = k as f64;
    let exponent = (2 * k + 2 - i - j) as f64;
    Ok(exponent * (n as f64).ln() + (j as f64) * (2.0 * kf * kf * kf).ln())
}

pub fn pair_count_bound(n: u64, k: u32, i: u32, j: u32) -> Result<f64> {
    Ok(ln_pair_count_bound(n, k, i, j)?.exp())
}

/// `g(beta) = beta ln((2g - beta) / (4e(1-eps))) + 2g ln(2g / (2g - beta))`.
pub fn g_function(beta: f64, gamma: f64, eps: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta < 2.0 * gamma) {
        return Err(domain("g", format!("beta = {beta} outside [0, 2 gamma = {})", 2.0 * gamma)));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(domain("g", format!("eps = {eps}")));
    }
    let two_g = 2.0 * gamma;
    let first = if beta == 0.0 {
        0.0
    } else {
        beta * ((two_g - beta) / (4.0 * std::f64::consts::E * (1.0 - eps))).ln()
    };
    Ok(first + two_g * (two_g / (two_g - beta)).ln())
}

pub fn g_star(beta: f64) -> Result<f64> {
    g_function(beta, alpha_star(), 0.0)
}

/// `(g(beta; gamma, eps), g*(beta))`.
pub fn g_functions(beta: f64, gamma: f64, eps: f64) -> Result<(f64, f64)> {
    Ok((g_function(beta, gamma, eps)?, g_star(beta)?))
}

/// Maximizer of a unimodal function on `[a, b]` by golden-section search.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Maximizer and maximum of `g*` on `[0, alpha*]`: a grid scan brackets the
/// peak, golden-section search refines it.
pub fn g_star_argmax(tol: f64) -> (f64, f64) {
    let a = alpha_star();
    let f = |b: f64| g_star(b).unwrap_or(f64::NEG_INFINITY);
    let steps = 1000;
    let h = a / steps as f64;
    let best = (0..=steps)
        .map(|s| s as f64 * h)
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(0.0);
    let beta = golden_section_max(f, (best - h).max(0.0), (best + h).min(a), tol);
    (beta, f(beta))
}

/// `max |g(beta; gamma, eps) - g*(beta)|` over `points` equally spaced betas
/// in `[0, gamma]`.
pub fn g_max_deviation(gamma: f64, eps: f64, points: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in 0..=points {
        let beta = gamma * p as f64 / points as f64;
        let (g, gs) = g_functions(beta, gamma, eps)?;
        worst = worst.max((g - gs).abs());
    }
    Ok(worst)
}

/// `1/E + Delta/E^2`, an upper bound on `P(|S| = 0)`.
pub fn second_moment_defect(delta: f64, expectation: f64) -> Result<f64> {
    if !(expectation > 0.0) || !(delta >= 0.0) {
        return Err(domain("second moment", format!("E = {expectation}, Delta = {delta}")));
    }
    Ok(1.0 / expectation + delta / (expectation * expectation))
}

/// `H(x) = x - 1 - ln x`.
pub fn large_dev_rate(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("H", format!("x = {x}")));
    }
    Ok(x - 1.0 - x.ln())
}

/// `sqrt(2 pi c) (c/e)^c e^{1/12}`, at least `Gamma(c + 1)`.
pub fn stirling_upper(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(domain("stirling", format!("c = {c}")));
    }
    let ln = 0.5 * (2.0 * std::f64::consts::PI * c).ln() + c * (c.ln() - 1.0) + 1.0 / 12.0;
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryTable {
    pub alpha_star: f64,
    pub zeta2: f64,
    pub zeta3: f64,
    pub tolerance: f64,
    pub g_star_argmax: f64,
    pub g_star_max: f64,
}

impl TheoryTable {
    pub fn compute() -> Self {
        let (beta, value) = g_star_argmax(1e-10);
        Self {
            alpha_star: alpha_star(),
            zeta2: zeta2(),
            zeta3: ZETA3,
            tolerance: DEFAULT_TOLERANCE,
            g_star_argmax: beta,
            g_star_max: value,
        }
    }
}
