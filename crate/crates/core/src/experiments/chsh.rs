//! CHSH correlations of the entangled pair, measured with two-channel
//! polarizers and the ordinary pattern machinery.

use std::sync::Arc;

use crate::evolution::apply;
use crate::fock::{ModeRegistry, PureState};
use crate::measurement::{pattern_probability, sample_events_with, DetectionPattern};
use crate::optics::{Circuit, Element};
use crate::par::Exec;
use crate::{Error, Result};

const L_T: &str = "lt";
const L_R: &str = "lr";
const M_T: &str = "mt";
const M_R: &str = "mr";

/// Analyzer angles in degrees: `a1, a2` on `l`, `b1, b2` on `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ChshSettings {
    pub const TSIRELSON: ChshSettings = ChshSettings {
        a1: 0.0,
        a2: 45.0,
        b1: 22.5,
        b2: 67.5,
    };

    /// `(α, β, sign)` for each term of `S`.
    pub fn terms(&self) -> [(f64, f64, f64); 4] {
        [
            (self.a1, self.b1, 1.0),
            (self.a1, self.b2, -1.0),
            (self.a2, self.b1, 1.0),
            (self.a2, self.b2, 1.0),
        ]
    }

    fn validate(&self) -> Result<()> {
        for v in [self.a1, self.a2, self.b1, self.b2] {
            if !v.is_finite() {
                return Err(Error::config(format!("CHSH angle must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Joint outcome probabilities for one analyzer setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub p_tt: f64,
    pub p_tr: f64,
    pub p_rt: f64,
    pub p_rr: f64,
    /// `P_tt + P_rr − P_tr − P_rt`.
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshResult {
    pub settings: ChshSettings,
    pub correlations: [Correlation; 4],
    /// `E(a1,b1) − E(a1,b2) + E(a2,b1) + E(a2,b2)`.
    pub s: f64,
}

fn analyzed_pair(alpha_deg: f64, beta_deg: f64) -> Result<PureState> {
    let reg = Arc::new(ModeRegistry::new(["l", "m", L_T, L_R, M_T, M_R], &[0])?);
    let u = Circuit::new(reg.clone(), ["l", "m"])?
        .with(Element::pbs("l", alpha_deg.to_radians(), L_T, L_R))
        .with(Element::pbs("m", beta_deg.to_radians(), M_T, M_R))
        .compile()?;
    apply(&PureState::epr_pair(reg, "l", "m", 0.0)?, &u)
}

/// Exact correlation for analyzers at `alpha_deg` on `l` and `beta_deg` on `m`.
pub fn correlation(alpha_deg: f64, beta_deg: f64) -> Result<Correlation> {
    let out = analyzed_pair(alpha_deg, beta_deg)?;
    let p = |x: &str, y: &str| pattern_probability(&out, &DetectionPattern::coincidence(&[x, y], &[]));
    let (p_tt, p_tr, p_rt, p_rr) = (p(L_T, M_T)?, p(L_T, M_R)?, p(L_R, M_T)?, p(L_R, M_R)?);
    Ok(Correlation {
        alpha_deg,
        beta_deg,
        p_tt,
        p_tr,
        p_rt,
        p_rr,
        e: p_tt + p_rr - p_tr - p_rt,
    })
}

pub fn chsh(settings: &ChshSettings) -> Result<ChshResult> {
    settings.validate()?;
    let mut correlations = Vec::with_capacity(4);
    let mut s = 0.0;
    for (alpha, beta, sign) in settings.terms() {
        let c = correlation(alpha, beta)?;
        s += sign * c.e;
        correlations.push(c);
    }
    Ok(ChshResult {
        settings: *settings,
        correlations: correlations.try_into().expect("four settings"),
        s,
    })
}

/// Monte Carlo estimate of one correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledCorrelation {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub shots: u64,
    pub seed: u64,
    pub n_tt: u64,
    pub n_tr: u64,
    pub n_rt: u64,
    pub n_rr: u64,
    pub e_estimate: f64,
    pub e_exact: f64,
    /// Binomial standard error `√((1 − E²)/n)` of a ±1 outcome.
    pub sigma: f64,
}

impl SampledCorrelation {
    /// `|Ê − E|` in units of `sigma`; zero-width intervals demand equality.
    pub fn deviation_sigmas(&self) -> f64 {
        let d = (self.e_estimate - self.e_exact).abs();
        if self.sigma > 0.0 {
            d / self.sigma
        } else if d <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledChsh {
    pub settings: ChshSettings,
    pub correlations: [SampledCorrelation; 4],
    pub s_estimate: f64,
    pub s_exact: f64,
}

/// Samples every setting with `shots` events; setting `k` uses seed
/// `seed + k` (wrapping).
pub fn chsh_sampled(settings: &ChshSettings, shots: u64, seed: u64, exec: Exec) -> Result<SampledChsh> {
    settings.validate()?;
    if shots == 0 {
        return Err(Error::config("CHSH sampling needs at least one shot"));
    }
    let mut correlations = Vec::with_capacity(4);
    let (mut s_estimate, mut s_exact) = (0.0, 0.0);
    for (k, (alpha, beta, sign)) in settings.terms().into_iter().enumerate() {
        let exact = correlation(alpha, beta)?;
        let out = analyzed_pair(alpha, beta)?;
        let setting_seed = seed.wrapping_add(k as u64);
        let counts = sample_events_with(&out, shots, setting_seed, exec);
        let n = |x: &str, y: &str| counts.count_where(|o| o.path_count(x) == 1 && o.path_count(y) == 1);
        let (n_tt, n_tr, n_rt, n_rr) = (n(L_T, M_T), n(L_T, M_R), n(L_R, M_T), n(L_R, M_R));
        let e_estimate = (n_tt + n_rr) as f64 / shots as f64 - (n_tr + n_rt) as f64 / shots as f64;
        let sigma = ((1.0 - exact.e * exact.e).max(0.0) / shots as f64).sqrt();
        s_estimate += sign * e_estimate;
        s_exact += sign * exact.e;
        correlations.push(SampledCorrelation {
            alpha_deg: alpha,
            beta_deg: beta,
            shots,
            seed: setting_seed,
            n_tt,
            n_tr,
            n_rt,
            n_rr,
            e_estimate,
            e_exact: exact.e,
            sigma,
        });
    }
    Ok(SampledChsh {
        settings: *settings,
        correlations: correlations.try_into().expect("four settings"),
        s_estimate,
        s_exact,
    })
}
