//! Composite Gauss-Legendre quadrature for spectral integrals.
//!
//! Every spectral integral in this crate has a smooth integrand with a single
//! narrow feature (the Gauss-Markov spectrum peaks at `w = 0` with a width of
//! roughly `1 - alpha`). The integration range is first cut into dyadic panels
//! that shrink geometrically toward the feature, then each panel is refined by
//! bisection until a 64-node rule on the panel agrees with the sum of the rules
//! on its two halves.
//!
//! Integrands may be vector valued so that several integrals sharing the same
//! mesh (for instance all pilot offsets of one training period) are computed in
//! a single pass.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per panel of the composite rule.
pub const NODES_PER_PANEL: usize = 64;

/// Absolute tolerance applied to every spectral integral by default.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

const MAX_DEPTH: u32 = 48;
const MAX_DYADIC_LEVELS: u32 = 52;
const UNRESOLVABLE_ULPS: f64 = 1024.0;
/// Bisections allowed per integral before giving up.
const MAX_BISECTIONS: usize = 1 << 16;

/// A fixed Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to `f` on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    fn integrate_vec<F: FnMut(f64, &mut [f64])>(
        &self,
        a: f64,
        b: f64,
        f: &mut F,
        scratch: &mut [f64],
        out: &mut [f64],
    ) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            f(mid + half * x, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += w * s;
            }
        }
        out.iter_mut().for_each(|v| *v *= half);
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// The shared 64-node rule.
pub fn gauss_legendre_64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NODES_PER_PANEL))
}

/// Adaptive composite integrator with dyadic refinement toward a peak.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    tolerance: f64,
    peak: f64,
    feature_width: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(DEFAULT_TOLERANCE)
    }
}

impl Quadrature {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            peak: 0.0,
            feature_width: f64::INFINITY,
        }
    }

    /// Concentrates the initial panels around `center`, down to panels of
    /// roughly `width`.
    pub fn peaked_at(mut self, center: f64, width: f64) -> Self {
        self.peak = center;
        self.feature_width = width.abs().max(f64::MIN_POSITIVE);
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> Result<f64> {
        let v = self.integrate_vec(lo, hi, 1, |w, out| out[0] = f(w))?;
        Ok(v[0])
    }

    /// Integrates a `dim`-component integrand. Each component is held to the
    /// absolute tolerance independently.
    pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
        &self,
        lo: f64,
        hi: f64,
        dim: usize,
        mut f: F,
    ) -> Result<Vec<f64>> {
        let mut total = vec![0.0; dim];
        if hi == lo || dim == 0 {
            return Ok(total);
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(
                "integration range",
                format!("[{lo}, {hi}] is not a finite increasing interval"),
            ));
        }
        let breaks = self.breakpoints(lo, hi);
        let rule = gauss_legendre_64();
        let mut state = Workspace {
            rule,
            scratch: vec![0.0; dim],
            dim,
            bisections: 0,
        };
        let span = hi - lo;
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let tol = self.tolerance * (b - a) / span;
            let mut whole = vec![0.0; dim];
            rule.integrate_vec(a, b, &mut f, &mut state.scratch, &mut whole);
            state.refine(a, b, whole, tol, 0, &mut f, &mut total)?;
        }
        Ok(total)
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo, hi];
        let c = self.peak;
        if c >= lo && c <= hi && self.feature_width.is_finite() {
            pts.push(c);
            for len in [c - lo, hi - c] {
                if len <= 0.0 {
                    continue;
                }
                let levels = (len / self.feature_width)
                    .log2()
                    .ceil()
                    .clamp(0.0, MAX_DYADIC_LEVELS as f64) as i32;
                let mut step = len;
                for _ in 0..levels {
                    step *= 0.5;
                    if c - step > lo {
                        pts.push(c - step);
                    }
                    if c + step < hi {
                        pts.push(c + step);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }
}

struct Workspace {
    rule: &'static GaussLegendre,
    scratch: Vec<f64>,
    dim: usize,
    bisections: usize,
}

impl Workspace {
    #[allow(clippy::too_many_arguments)]
    fn refine<F: FnMut(f64, &mut [f64])>(
        &mut self,
        a: f64,
        b: f64,
        whole: Vec<f64>,
        tol: f64,
        depth: u32,
        f: &mut F,
        total: &mut [f64],
    ) -> Result<()> {
        let mid = 0.5 * (a + b);
        let mut left = vec![0.0; self.dim];
        let mut right = vec![0.0; self.dim];
        self.rule
            .integrate_vec(a, mid, f, &mut self.scratch, &mut left);
        self.rule
            .integrate_vec(mid, b, f, &mut self.scratch, &mut right);

        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..self.dim {
            let halves = left[i] + right[i];
            let d = (halves - whole[i]).abs();
            if !d.is_finite() {
                return Err(Error::QuadratureFailure {
                    lo: a,
                    hi: b,
                    tolerance: tol,
                    estimate: d,
                });
            }
            err = err.max(d);
            scale = scale.max(left[i].abs() + right[i].abs());
        }
        // Below this the comparison is dominated by rounding.
        let floor = 64.0 * f64::EPSILON * scale;
        // A panel this narrow has too few representable abscissas for further
        // bisection to say anything; what remains is evaluation noise.
        let unresolvable = b - a <= UNRESOLVABLE_ULPS * f64::EPSILON * a.abs().max(b.abs());
        if err <= tol.max(floor) || unresolvable {
            if unresolvable && err > tol.max(floor) {
                log::debug!("quadrature panel [{a:e}, {b:e}] limited by rounding, difference {err:e}");
            }
            for i in 0..self.dim {
                total[i] += left[i] + right[i];
            }
            return Ok(());
        }
        self.bisections += 1;
        if depth >= MAX_DEPTH || self.bisections > MAX_BISECTIONS {
            return Err(Error::QuadratureFailure {
                lo: a,
                hi: b,
                tolerance: tol,
                estimate: err,
            });
        }
        self.refine(a, mid, left, 0.5 * tol, depth + 1, f, total)?;
        self.refine(mid, b, right, 0.5 * tol, depth + 1, f, total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = gauss_legendre_64();
        let s: f64 = rule.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 127 is the exactness limit; check a high even power
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(100));
        assert!((v - 2.0 / 101.0).abs() < 1e-14);
    }

    #[test]
    fn small_rules_match_tables() {
        let r = GaussLegendre::new(2);
        assert!((r.nodes()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let r = GaussLegendre::new(3);
        assert!((r.nodes()[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((r.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn lorentzian_peak_is_resolved() {
        // (1/2pi) * integral of a normalised AR(1) spectrum is one.
        for alpha in [0.5, 0.99, 0.9999] {
            let q = Quadrature::default().peaked_at(0.0, 1.0 - alpha);
            let v = q
                .integrate(-PI, PI, |w| {
                    let s = (0.5 * w).sin();
                    (1.0 - alpha * alpha) / ((1.0 - alpha).powi(2) + 4.0 * alpha * s * s)
                })
                .unwrap();
            assert!((v / (2.0 * PI) - 1.0).abs() < 1e-10, "alpha={alpha}: {v}");
        }
    }

    #[test]
    fn vector_components_share_the_mesh() {
        let q = Quadrature::default();
        let v = q
            .integrate_vec(0.0, 1.0, 3, |x, out| {
                out[0] = 1.0;
                out[1] = x;
                out[2] = (10.0 * x).exp();
            })
            .unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14);
        assert!((v[1] - 0.5).abs() < 1e-14);
        assert!((v[2] - ((10f64).exp() - 1.0) / 10.0).abs() < 1e-9);
    }

    #[test]
    fn nonfinite_integrand_is_reported() {
        let q = Quadrature::default();
        let r = q.integrate(0.0, 1.0, |x| if x > 0.3 { f64::NAN } else { 1.0 });
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn reversed_range_is_rejected() {
        assert!(Quadrature::default().integrate(1.0, 0.0, |x| x).is_err());
    }
}
