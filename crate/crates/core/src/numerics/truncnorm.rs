use rand::Rng;
use serde::{Deserialize, Serialize};

use super::normal;
use super::NumericsError;

/// Smallest scale a maximum-likelihood fit may return.
pub const SIGMA_MIN: f64 = 1e-3;
const MLE_MAX_ITERS: usize = 500;
const MLE_TOL: f64 = 1e-6;
/// Standardized distance beyond which CDF inversion works in log-tail space.
const TAIL_SWITCH: f64 = 8.0;

/// Normal(μ, σ²) restricted and renormalized to [lower, upper].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncGauss {
    pub mu: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncGauss {
    pub fn new(mu: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self, NumericsError> {
        let p = TruncGauss {
            mu,
            sigma,
            lower,
            upper,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let ok = self.mu.is_finite()
            && self.sigma.is_finite()
            && self.sigma > 0.0
            && !self.lower.is_nan()
            && !self.upper.is_nan()
            && self.lower < self.upper;
        if ok {
            Ok(())
        } else {
            Err(NumericsError::InvalidParams(format!(
                "mu={}, sigma={}, bounds=[{}, {}]",
                self.mu, self.sigma, self.lower, self.upper
            )))
        }
    }

    fn alpha(&self) -> f64 {
        (self.lower - self.mu) / self.sigma
    }

    fn beta(&self) -> f64 {
        (self.upper - self.mu) / self.sigma
    }

    /// ln Z, with Z = Φ(β) − Φ(α) the retained probability mass.
    pub fn log_normalizer(&self) -> f64 {
        normal::log_prob_between(self.alpha(), self.beta())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if !self.contains(x) {
            return f64::NEG_INFINITY;
        }
        let z = (x - self.mu) / self.sigma;
        normal::log_pdf(z) - self.sigma.ln() - self.log_normalizer()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        let z = (x - self.mu) / self.sigma;
        (normal::log_prob_between(self.alpha(), z) - self.log_normalizer())
            .exp()
            .min(1.0)
    }

    /// Inverse CDF. `u` is clamped into [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let (alpha, beta) = (self.alpha(), self.beta());
        if beta < -TAIL_SWITCH {
            let mirrored = TruncGauss {
                mu: -self.mu,
                sigma: self.sigma,
                lower: -self.upper,
                upper: -self.lower,
            };
            return -mirrored.quantile(1.0 - u);
        }
        let z = if alpha > TAIL_SWITCH {
            // Q(α) underflows: solve ln Q(z) = ln(Q(α) − u (Q(α) − Q(β))) directly
            let (lqa, lqb) = (normal::log_upper_tail(alpha), normal::log_upper_tail(beta));
            let target = lqa + (u * (lqb - lqa).exp_m1()).ln_1p();
            invert_log_upper_tail(target, alpha).min(beta)
        } else if alpha > 0.0 {
            // both bounds in the upper half: invert through upper tails
            let (qa, qb) = (normal::upper_tail(alpha), normal::upper_tail(beta));
            -normal::quantile(qa - u * (qa - qb))
        } else {
            let (pa, pb) = (normal::cdf(alpha), normal::cdf(beta));
            normal::quantile(pa + u * (pb - pa))
        };
        (self.mu + self.sigma * z).clamp(self.lower, self.upper)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Analytic mean μ + σ(φ(α) − φ(β))/Z.
    pub fn mean(&self) -> f64 {
        let (ra, rb) = self.density_ratios();
        self.mu + self.sigma * (ra - rb)
    }

    /// (φ(α)/Z, φ(β)/Z), zero for infinite bounds.
    fn density_ratios(&self) -> (f64, f64) {
        let log_z = self.log_normalizer();
        let ratio = |t: f64| {
            if t.is_finite() {
                (normal::log_pdf(t) - log_z).exp()
            } else {
                0.0
            }
        };
        (ratio(self.alpha()), ratio(self.beta()))
    }

    /// Gradient of the average log-likelihood in (μ, ln σ), given the first two
    /// sample moments about the origin.
    fn moment_grad(&self, m1: f64, m2: f64) -> (f64, f64) {
        let (alpha, beta) = (self.alpha(), self.beta());
        let (ra, rb) = self.density_ratios();
        let s2 = self.sigma * self.sigma;
        let sq = m2 - 2.0 * self.mu * m1 + self.mu * self.mu;
        let a_term = if alpha.is_finite() { alpha * ra } else { 0.0 };
        let b_term = if beta.is_finite() { beta * rb } else { 0.0 };
        let d_mu = (m1 - self.mu) / s2 - (ra - rb) / self.sigma;
        let d_log_sigma = -1.0 + sq / s2 - (a_term - b_term);
        (d_mu, d_log_sigma)
    }

    fn moment_loglik(&self, m1: f64, m2: f64) -> f64 {
        let sq = m2 - 2.0 * self.mu * m1 + self.mu * self.mu;
        -self.sigma.ln()
            - self.log_normalizer()
            - sq / (2.0 * self.sigma * self.sigma)
            - normal::LN_SQRT_2PI
    }

    /// ∂ ln f(x) / ∂μ and ∂ ln f(x) / ∂ ln σ, including the normalizer terms.
    pub fn log_pdf_grad(&self, x: f64) -> Result<(f64, f64), NumericsError> {
        if !self.contains(x) {
            return Err(NumericsError::OutOfSupport {
                x,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(self.moment_grad(x, x * x))
    }

    pub fn with_log_sigma(mut self, log_sigma: f64) -> Self {
        self.sigma = log_sigma.exp();
        self
    }
}

/// Solves ln Q(z) = target by Newton iteration from `start`.
fn invert_log_upper_tail(target: f64, start: f64) -> f64 {
    let mut z = start;
    for _ in 0..100 {
        let lq = normal::log_upper_tail(z);
        let slope = -(normal::log_pdf(z) - lq).exp();
        let step = (lq - target) / slope;
        z -= step;
        if step.abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

/// Maximum-likelihood fit of a truncated Gaussian with known bounds.
///
/// Newton ascent in (μ, ln σ) on the average log-likelihood, which depends on
/// the data only through its first two moments. Starts from the sample
/// mean/std, backtracks on every step and stops when neither parameter moves
/// by more than 1e-6 (or after 500 iterations). σ is floored at
/// [`SIGMA_MIN`]; μ and σ are kept within ten interval widths of the bounds so
/// near-uniform data cannot drive them to infinity.
pub fn fit_mle(samples: &[f64], lower: f64, upper: f64) -> Result<TruncGauss, NumericsError> {
    if samples.len() < 10 {
        return Err(NumericsError::TooFewSamples {
            got: samples.len(),
            min: 10,
        });
    }
    if !(lower < upper) {
        return Err(NumericsError::InvalidParams(format!(
            "bounds [{lower}, {upper}]"
        )));
    }
    if let Some(&x) = samples.iter().find(|&&x| !(x >= lower && x <= upper)) {
        return Err(NumericsError::OutOfSupport { x, lower, upper });
    }
    let n = samples.len() as f64;
    let m1 = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|x| x * x).sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - m1) * (x - m1)).sum::<f64>() / n;
    fit_mle_moments(m1, m2, var.sqrt(), lower, upper)
}

fn fit_mle_moments(
    m1: f64,
    m2: f64,
    std0: f64,
    lower: f64,
    upper: f64,
) -> Result<TruncGauss, NumericsError> {
    let width = upper - lower;
    let (mu_lo, mu_hi, ls_hi) = if width.is_finite() {
        (
            lower - 10.0 * width,
            upper + 10.0 * width,
            (10.0 * width).ln(),
        )
    } else {
        (f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY)
    };
    let ls_lo = SIGMA_MIN.ln();
    let project = |mu: f64, ls: f64| (mu.clamp(mu_lo, mu_hi), ls.clamp(ls_lo, ls_hi));

    let (mut mu, mut ls) = project(m1, std0.max(SIGMA_MIN).ln());
    let point = |mu: f64, ls: f64| TruncGauss {
        mu,
        sigma: ls.exp(),
        lower,
        upper,
    };
    let mut current = point(mu, ls).moment_loglik(m1, m2);

    for _ in 0..MLE_MAX_ITERS {
        let g = point(mu, ls).moment_grad(m1, m2);
        // Hessian by central differences of the analytic gradient
        let h = 1e-5;
        let gmp = point(mu + h, ls).moment_grad(m1, m2);
        let gmm = point(mu - h, ls).moment_grad(m1, m2);
        let gsp = point(mu, ls + h).moment_grad(m1, m2);
        let gsm = point(mu, ls - h).moment_grad(m1, m2);
        let h11 = (gmp.0 - gmm.0) / (2.0 * h);
        let h22 = (gsp.1 - gsm.1) / (2.0 * h);
        let h12 = 0.5 * ((gmp.1 - gmm.1) + (gsp.0 - gsm.0)) / (2.0 * h);
        let det = h11 * h22 - h12 * h12;
        let mut dir = if h11 < 0.0 && det > 0.0 {
            (
                -(h22 * g.0 - h12 * g.1) / det,
                -(h11 * g.1 - h12 * g.0) / det,
            )
        } else {
            // not concave here: scaled gradient step
            let scale = 1.0 / (1.0 + h11.abs().max(h22.abs()));
            (g.0 * scale, g.1 * scale)
        };
        if !(dir.0.is_finite() && dir.1.is_finite()) {
            dir = (g.0 * 1e-3, g.1 * 1e-3);
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let (cmu, cls) = project(mu + t * dir.0, ls + t * dir.1);
            let cand = point(cmu, cls).moment_loglik(m1, m2);
            if cand.is_finite() && cand >= current {
                accepted = Some((cmu, cls, cand));
                break;
            }
            t *= 0.5;
        }
        let Some((nmu, nls, val)) = accepted else {
            break;
        };
        let moved = (nmu - mu).abs().max((nls.exp() - ls.exp()).abs());
        mu = nmu;
        ls = nls;
        current = val;
        if moved < MLE_TOL {
            break;
        }
    }
    Ok(TruncGauss {
        mu,
        sigma: if ls <= ls_lo {
            SIGMA_MIN
        } else {
            ls.exp().max(SIGMA_MIN)
        },
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(mu: f64, sigma: f64) -> TruncGauss {
        TruncGauss::new(mu, sigma, 0.0, 1.0).unwrap()
    }

    #[test]
    fn pdf_reference_value() {
        // φ(0) / (σ (Φ(2.5) − Φ(−2.5)))
        let p = unit(0.5, 0.2);
        let expected = 0.398_942_280_401_432_7 / (0.2 * 0.987_580_669_348_447_7);
        assert!((p.pdf(0.5) - expected).abs() < 1e-12);
        assert!((p.pdf(0.5) - 2.0198).abs() < 1e-4);
        assert_eq!(p.pdf(-0.1), 0.0);
        assert_eq!(p.pdf(1.1), 0.0);
    }

    #[test]
    fn cdf_endpoints_and_symmetry() {
        let p = unit(0.5, 0.3);
        assert_eq!(p.cdf(0.0), 0.0);
        assert_eq!(p.cdf(1.0), 1.0);
        assert!((p.cdf(0.5) - 0.5).abs() < 1e-14);
        let q = TruncGauss::new(2.0, 0.7, -1.0, 5.0).unwrap();
        assert!((q.cdf(2.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(TruncGauss::new(0.5, 0.0, 0.0, 1.0).is_err());
        assert!(TruncGauss::new(0.5, -1.0, 0.0, 1.0).is_err());
        assert!(TruncGauss::new(0.5, 0.1, 1.0, 1.0).is_err());
        assert!(TruncGauss::new(0.5, 0.1, 2.0, 1.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf_including_far_tails() {
        let params = [
            unit(0.5, 0.2),
            unit(-3.0, 0.1),
            unit(4.0, 0.05),
            unit(0.0, 1e-3),
            TruncGauss::new(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY).unwrap(),
        ];
        for p in params {
            for i in 1..200 {
                let u = i as f64 / 200.0;
                let x = p.quantile(u);
                assert!(p.contains(x));
                assert!((p.cdf(x) - u).abs() < 1e-8, "{p:?} u={u} x={x}");
            }
        }
    }

    #[test]
    fn samples_stay_in_support_and_are_reproducible() {
        let p = TruncGauss::new(0.9, 0.5, 0.0, 0.7).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x = p.sample(&mut a);
            assert!((0.0..=0.7).contains(&x));
            assert_eq!(x, p.sample(&mut b));
        }
    }

    #[test]
    fn gradient_limits() {
        let wide = TruncGauss::new(0.3, 0.5, -1e6, 1e6).unwrap();
        let (dmu, _) = wide.log_pdf_grad(0.8).unwrap();
        assert!((dmu - 0.5 / 0.25).abs() < 1e-12);
        let sym = unit(0.5, 0.2);
        assert!(sym.log_pdf_grad(0.5).unwrap().0.abs() < 1e-12);
        assert!(matches!(
            sym.log_pdf_grad(1.5),
            Err(NumericsError::OutOfSupport { .. })
        ));
    }

    #[test]
    fn mle_degenerate_and_symmetric() {
        let flat = vec![0.42; 50];
        let fit = fit_mle(&flat, 0.0, 1.0).unwrap();
        assert_eq!(fit.sigma, SIGMA_MIN);
        assert!((fit.mu - 0.42).abs() < 1e-6);

        let sym: Vec<f64> = (0..200)
            .map(|i| 0.5 + 0.3 * ((i as f64 * 0.37).sin()))
            .collect();
        let mirrored: Vec<f64> = sym
            .iter()
            .chain(sym.iter().map(|x| 1.0 - x).collect::<Vec<_>>().iter())
            .copied()
            .collect();
        let fit = fit_mle(&mirrored, 0.0, 1.0).unwrap();
        assert!((fit.mu - 0.5).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn mle_rejects_bad_input() {
        assert!(matches!(
            fit_mle(&[0.5; 9], 0.0, 1.0),
            Err(NumericsError::TooFewSamples { got: 9, min: 10 })
        ));
        let mut xs = vec![0.5; 20];
        xs[3] = 1.5;
        assert!(matches!(
            fit_mle(&xs, 0.0, 1.0),
            Err(NumericsError::OutOfSupport { .. })
        ));
    }

    #[test]
    fn mle_handles_near_uniform_data() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let fit = fit_mle(&xs, 0.0, 1.0).unwrap();
        assert!(fit.validate().is_ok());
        // a wide σ makes the fitted CDF close to the uniform one
        assert!((fit.cdf(0.25) - 0.25).abs() < 0.02, "{fit:?}");
    }

    #[test]
    fn log_pdf_grad_matches_central_differences() {
        let h = 1e-6;
        for (mu, sigma, x) in [(0.4, 0.1, 0.35), (1.3, 0.05, 0.98), (-0.2, 0.6, 0.1)] {
            let tg = unit(mu, sigma);
            let (dmu, dls) = tg.log_pdf_grad(x).unwrap();
            let at = |m: f64, ls: f64| TruncGauss { mu: m, ..tg }.with_log_sigma(ls).log_pdf(x);
            let ls = sigma.ln();
            let fd_mu = (at(mu + h, ls) - at(mu - h, ls)) / (2.0 * h);
            let fd_ls = (at(mu, ls + h) - at(mu, ls - h)) / (2.0 * h);
            assert!(
                (dmu - fd_mu).abs() <= 1e-6 * dmu.abs().max(1.0),
                "{dmu} vs {fd_mu}"
            );
            assert!(
                (dls - fd_ls).abs() <= 1e-6 * dls.abs().max(1.0),
                "{dls} vs {fd_ls}"
            );
        }
    }
}
