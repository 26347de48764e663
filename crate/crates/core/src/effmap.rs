//! Flight-efficiency map η(s, AR): simulated peak power over the ideal
//! steady estimate, fitted by a bivariate polynomial.

use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// One simulated efficiency measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffSample {
    pub s: f64,
    #[serde(rename = "AR")]
    pub ar: f64,
    pub eta: f64,
    #[serde(rename = "P_star")]
    pub p_star: f64,
    #[serde(rename = "P_ideal")]
    pub p_ideal: f64,
}

impl EffSample {
    pub fn new(s: f64, ar: f64, p_star: f64, p_ideal: f64) -> Result<Self> {
        ensure(p_ideal > 0.0, || format!("ideal power must be positive, got {p_ideal}"))?;
        Ok(Self { s, ar, eta: p_star / p_ideal, p_star, p_ideal })
    }
}

/// Fit and evaluation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffmapConfig {
    pub degree: usize,
    pub eta_floor: f64,
    pub eta_cap: f64,
}

impl Default for EffmapConfig {
    fn default() -> Self {
        Self { degree: 2, eta_floor: 0.01, eta_cap: 1.0 }
    }
}

impl EffmapConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.degree <= 6, || format!("surface degree {} is above 6", self.degree))?;
        ensure(self.eta_floor > 0.0 && self.eta_floor < self.eta_cap, || {
            format!("need 0 < eta_floor < eta_cap, got {} and {}", self.eta_floor, self.eta_cap)
        })
    }
}

/// Exponent pairs (i, j) of sⁱ·ARʲ in graded-lex order.
pub fn monomials(degree: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for k in 0..=degree as u32 {
        for i in (0..=k).rev() {
            out.push((i, k - i));
        }
    }
    out
}

fn term_name((i, j): (u32, u32)) -> String {
    let part = |v: &str, e: u32| match e {
        0 => None,
        1 => Some(v.to_string()),
        e => Some(format!("{v}^{e}")),
    };
    let parts: Vec<String> = [part("s", i), part("AR", j)].into_iter().flatten().collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Fitted η(s, AR) polynomial with its fit domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffSurface {
    pub degree: usize,
    /// Monomial labels, in coefficient order.
    pub terms: Vec<String>,
    pub coeffs: Vec<f64>,
    pub domain_s: [f64; 2],
    pub domain_ar: [f64; 2],
    pub rms_residual: f64,
    pub n_samples: usize,
    pub eta_floor: f64,
    pub eta_cap: f64,
}

/// Result of a surface query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaEval {
    pub eta: f64,
    /// The query was outside the fit domain and was clamped onto it.
    pub outside_domain: bool,
}

impl EffSurface {
    /// η ≡ `eta` everywhere.
    pub fn constant(eta: f64, domain_s: [f64; 2], domain_ar: [f64; 2]) -> Self {
        Self {
            degree: 0,
            terms: vec!["1".into()],
            coeffs: vec![eta],
            domain_s,
            domain_ar,
            rms_residual: 0.0,
            n_samples: 0,
            eta_floor: EffmapConfig::default().eta_floor,
            eta_cap: EffmapConfig::default().eta_cap.max(eta),
        }
    }

    /// Synthetic reference map used when no fitted surface is supplied:
    /// η = 1 − 0.05·(AR − 4.7)² − 0.005·(s − 8.5)² over the design box.
    /// Power therefore peaks near AR = 4.7 for every span. It is a stand-in
    /// for a simulator-derived map, not a fit.
    pub fn reference() -> Self {
        let (a, ar0, b, s0) = (0.05, 4.7, 0.005, 8.5);
        Self {
            degree: 2,
            terms: monomials(2).into_iter().map(term_name).collect(),
            coeffs: vec![1.0 - a * ar0 * ar0 - b * s0 * s0, 2.0 * b * s0, 2.0 * a * ar0, -b, 0.0, -a],
            domain_s: [7.0, 10.0],
            domain_ar: [4.0, 12.0],
            rms_residual: 0.0,
            n_samples: 0,
            eta_floor: EffmapConfig::default().eta_floor,
            eta_cap: EffmapConfig::default().eta_cap,
        }
    }

    pub fn with_limits(mut self, cfg: &EffmapConfig) -> Self {
        self.eta_floor = cfg.eta_floor;
        self.eta_cap = cfg.eta_cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mono = monomials(self.degree);
        ensure(self.coeffs.len() == mono.len(), || {
            format!("degree {} needs {} coefficients, found {}", self.degree, mono.len(), self.coeffs.len())
        })?;
        let names: Vec<String> = mono.into_iter().map(term_name).collect();
        ensure(self.terms == names, || format!("term labels {:?} do not match {:?}", self.terms, names))?;
        ensure(self.domain_s[0] <= self.domain_s[1] && self.domain_ar[0] <= self.domain_ar[1], || {
            "surface domain is empty".into()
        })?;
        ensure(self.eta_floor > 0.0 && self.eta_floor <= self.eta_cap, || "invalid eta limits".into())
    }

    /// Raw polynomial value, no clamping.
    pub fn polynomial(&self, s: f64, ar: f64) -> f64 {
        monomials(self.degree)
            .into_iter()
            .zip(&self.coeffs)
            .map(|((i, j), c)| c * s.powi(i as i32) * ar.powi(j as i32))
            .sum()
    }

    /// Clamped query: the point is projected onto the fit domain and the
    /// value onto [eta_floor, eta_cap].
    pub fn eval(&self, s: f64, ar: f64) -> EtaEval {
        let sc = s.clamp(self.domain_s[0], self.domain_s[1]);
        let ac = ar.clamp(self.domain_ar[0], self.domain_ar[1]);
        let outside_domain = sc != s || ac != ar;
        if outside_domain {
            warn!("efficiency query (s = {s}, AR = {ar}) outside fit domain; clamped");
        }
        EtaEval { eta: self.polynomial(sc, ac).clamp(self.eta_floor, self.eta_cap), outside_domain }
    }

    pub fn eta(&self, s: f64, ar: f64) -> f64 {
        self.eval(s, ar).eta
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse { what: "efficiency surface".into(), msg: e.to_string() })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self =
            toml::from_str(text).map_err(|e| Error::Parse { what: "efficiency surface".into(), msg: e.to_string() })?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Least-squares polynomial fit of the sample efficiencies.
pub fn fit_surface(samples: &[EffSample], cfg: &EffmapConfig) -> Result<EffSurface> {
    cfg.validate()?;
    let mono = monomials(cfg.degree);
    let (n, k) = (samples.len(), mono.len());
    if n < k {
        return Err(Error::RankDeficient { rank: n, terms: k });
    }
    let a = DMatrix::from_fn(n, k, |r, c| {
        let (i, j) = mono[c];
        samples[r].s.powi(i as i32) * samples[r].ar.powi(j as i32)
    });
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.eta));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12 * n.max(k) as f64;
    let rank = svd.singular_values.iter().filter(|&&v| v > tol).count();
    if rank < k {
        return Err(Error::RankDeficient { rank, terms: k });
    }
    let coeffs = svd.solve(&y, tol).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let resid = &a * &coeffs - &y;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    let span = |f: fn(&EffSample) -> f64| {
        samples.iter().map(f).fold([f64::INFINITY, f64::NEG_INFINITY], |acc, v| [acc[0].min(v), acc[1].max(v)])
    };
    Ok(EffSurface {
        degree: cfg.degree,
        terms: mono.into_iter().map(term_name).collect(),
        coeffs: coeffs.iter().copied().collect(),
        domain_s: span(|e| e.s),
        domain_ar: span(|e| e.ar),
        rms_residual: rms,
        n_samples: n,
        eta_floor: cfg.eta_floor,
        eta_cap: cfg.eta_cap,
    })
}

/// Source of converged peak power for a wing geometry; the production
/// implementation runs the closed-loop simulator under path learning.
pub trait PeakPowerSource: Sync {
    fn peak_power(&self, s: f64, ar: f64) -> Result<f64>;
    fn ideal_power(&self, s: f64, ar: f64) -> Result<f64>;
}

/// Samples from every grid point that succeeds, plus the failures.
#[derive(Debug, Default)]
pub struct SampleRun {
    pub samples: Vec<EffSample>,
    pub skipped: Vec<((f64, f64), Error)>,
}

/// Evaluates the grid in parallel; order of the output follows the grid.
pub fn generate_samples<P: PeakPowerSource>(grid: &[(f64, f64)], source: &P) -> SampleRun {
    let results: Vec<Result<EffSample>> = grid
        .par_iter()
        .map(|&(s, ar)| EffSample::new(s, ar, source.peak_power(s, ar)?, source.ideal_power(s, ar)?))
        .collect();
    let mut run = SampleRun::default();
    for (pt, r) in grid.iter().zip(results) {
        match r {
            Ok(sample) => run.samples.push(sample),
            Err(e) => {
                warn!("efficiency sample at s = {}, AR = {} skipped: {e}", pt.0, pt.1);
                run.skipped.push((*pt, e));
            }
        }
    }
    run
}

/// Writes samples as `s,AR,eta,P_star,P_ideal` rows.
pub fn write_samples<W: Write>(samples: &[EffSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(s).map_err(|e| Error::Parse { what: "samples".into(), msg: e.to_string() })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(input: R) -> Result<Vec<EffSample>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(|e| Error::Parse { what: "samples".into(), msg: e.to_string() })).collect()
}
