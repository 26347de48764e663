//! Economic iterative learning of the figure-8 path shape: a recursive
//! least-squares quadratic meta-model of the lap objective drives a perturbed
//! gradient update of the path parameters.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Figure-8 path parameters: (b1, b2) shape, b3 mean azimuth, b4 mean
/// elevation, all in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisParams {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

impl BasisParams {
    pub const fn new(b1: f64, b2: f64, b3: f64, b4: f64) -> Self {
        Self { b1, b2, b3, b4 }
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.b1, self.b2, self.b3, self.b4)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_vector();
        ensure(v.iter().all(|x| x.is_finite()), || format!("path parameters not finite: {v:?}"))?;
        ensure(self.b2 != 0.0, || "path shape parameter b2 must be nonzero".into())
    }
}

impl Default for BasisParams {
    fn default() -> Self {
        Self::new(0.4, 0.3, 0.0, 0.35)
    }
}

/// Admissible box for the path parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl Default for BasisBox {
    fn default() -> Self {
        Self { lo: [0.2, 0.15, -0.3, 0.2], hi: [0.8, 0.6, 0.3, 0.7] }
    }
}

impl BasisBox {
    pub fn validate(&self) -> Result<()> {
        ensure((0..4).all(|i| self.lo[i] <= self.hi[i]), || "basis box is empty".into())?;
        ensure(self.lo[1] > 0.0 || self.hi[1] < 0.0, || "basis box must exclude b2 = 0".into())
    }

    pub fn clamp(&self, v: &Vector4<f64>) -> Vector4<f64> {
        Vector4::from_fn(|i, _| v[i].clamp(self.lo[i], self.hi[i]))
    }

    pub fn contains(&self, b: &BasisParams) -> bool {
        let v = b.to_vector();
        (0..4).all(|i| v[i] >= self.lo[i] && v[i] <= self.hi[i])
    }
}

/// Lap-mean of P_gen − k_w·γ_c by the trapezoid rule.
pub fn lap_objective(t: &[f64], p_gen: &[f64], gamma_c: &[f64], k_w: f64) -> Result<f64> {
    ensure(t.len() == p_gen.len() && t.len() == gamma_c.len(), || "lap series lengths differ".into())?;
    if t.len() < 2 || t[t.len() - 1] <= t[0] {
        return Err(Error::EmptyLap);
    }
    let f = |i: usize| p_gen[i] - k_w * gamma_c[i];
    let integral: f64 = (1..t.len()).map(|i| 0.5 * (f(i) + f(i - 1)) * (t[i] - t[i - 1])).sum();
    Ok(integral / (t[t.len() - 1] - t[0]))
}

/// Number of terms of a full quadratic in four variables.
pub const N_FEATURES: usize = 15;

type Features = SMatrix<f64, N_FEATURES, 1>;

fn features(d: &Vector4<f64>) -> Features {
    let mut f = Features::zeros();
    f[0] = 1.0;
    for i in 0..4 {
        f[1 + i] = d[i];
    }
    let mut k = 5;
    for i in 0..4 {
        for j in i..4 {
            f[k] = d[i] * d[j];
            k += 1;
        }
    }
    f
}

/// Recursive least-squares estimate of a quadratic J̃(b), expanded about a
/// fixed center for conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsModel {
    pub center: Vector4<f64>,
    /// Coefficients in objective units divided by `j_scale`.
    pub theta: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub forgetting: f64,
    pub cov_floor: f64,
    pub cov_ceiling: f64,
    /// Objective normalization, fixed at the first observation.
    pub j_scale: Option<f64>,
    pub n_updates: usize,
}

impl RlsModel {
    pub fn new(center: BasisParams, p0: f64, forgetting: f64, cov_floor: f64) -> Self {
        Self {
            center: center.to_vector(),
            theta: DVector::zeros(N_FEATURES),
            cov: DMatrix::identity(N_FEATURES, N_FEATURES) * p0,
            forgetting,
            cov_floor,
            cov_ceiling: p0,
            j_scale: None,
            n_updates: 0,
        }
    }

    fn phi(&self, b: &BasisParams) -> DVector<f64> {
        DVector::from_column_slice(features(&(b.to_vector() - self.center)).as_slice())
    }

    pub fn predict(&self, b: &BasisParams) -> f64 {
        self.phi(b).dot(&self.theta) * self.j_scale.unwrap_or(1.0)
    }

    /// Analytic ∇J̃ at b.
    pub fn gradient(&self, b: &BasisParams) -> Vector4<f64> {
        let d = b.to_vector() - self.center;
        let th = &self.theta;
        let mut g = Vector4::from_fn(|i, _| th[1 + i]);
        let mut k = 5;
        for i in 0..4 {
            for j in i..4 {
                if i == j {
                    g[i] += 2.0 * th[k] * d[i];
                } else {
                    g[i] += th[k] * d[j];
                    g[j] += th[k] * d[i];
                }
                k += 1;
            }
        }
        g * self.j_scale.unwrap_or(1.0)
    }

    /// Coefficients in objective units.
    pub fn coefficients(&self) -> DVector<f64> {
        &self.theta * self.j_scale.unwrap_or(1.0)
    }
}

/// One RLS step on the quadratic features of `b`.
pub fn rls_update(model: &RlsModel, b: &BasisParams, j_observed: f64) -> RlsModel {
    let mut m = model.clone();
    let scale = *m.j_scale.get_or_insert(if j_observed.abs() > 0.0 { j_observed.abs() } else { 1.0 });
    let phi = m.phi(b);
    let y = j_observed / scale;
    let p_phi = &m.cov * &phi;
    let denom = m.forgetting + phi.dot(&p_phi);
    let gain = &p_phi / denom;
    let err = y - phi.dot(&m.theta);
    m.theta += &gain * err;
    m.cov = (&m.cov - &gain * p_phi.transpose()) / m.forgetting;
    m.cov = (&m.cov + m.cov.transpose()) * 0.5;
    let min_diag = m.cov.diagonal().min();
    if min_diag < m.cov_floor {
        for i in 0..N_FEATURES {
            m.cov[(i, i)] += m.cov_floor - min_diag;
        }
    }
    let max_diag = m.cov.diagonal().max();
    if max_diag > m.cov_ceiling {
        m.cov *= m.cov_ceiling / max_diag;
    }
    m.n_updates += 1;
    m
}

/// Zero-mean uniform excitation with amplitude a/(1 + k/τ) per component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSchedule {
    pub amplitude: [f64; 4],
    pub decay_tau: f64,
    pub seed: u64,
}

impl Default for PerturbationSchedule {
    fn default() -> Self {
        Self { amplitude: [0.05, 0.04, 0.04, 0.04], decay_tau: 40.0, seed: 17 }
    }
}

impl PerturbationSchedule {
    pub fn draw(&self, rng: &mut ChaCha8Rng, k: usize) -> Vector4<f64> {
        let decay = 1.0 / (1.0 + k as f64 / self.decay_tau);
        Vector4::from_fn(|i, _| {
            let a = self.amplitude[i] * decay;
            if a > 0.0 {
                rng.random_range(-a..=a)
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlcConfig {
    /// Learning gain K_L (row-major 4×4).
    pub gain: [[f64; 4]; 4],
    /// Cap on ‖K_L·∇J̃‖ per lap (rad); None leaves the step unbounded.
    pub max_step: Option<f64>,
    pub perturbation: PerturbationSchedule,
    /// Tracking penalty weight (W/rad).
    pub k_w: f64,
    pub max_iter: usize,
    /// Stop when ‖b_{k+1} − b_k‖ falls below this after warm-up.
    pub tol: f64,
    pub warmup: usize,
    pub forgetting: f64,
    pub p0: f64,
    pub cov_floor: f64,
    pub b0: BasisParams,
    pub bounds: BasisBox,
}

impl Default for IlcConfig {
    fn default() -> Self {
        // Lap objectives are in watts with slopes near 1e5 W/rad.
        let g = 1.0e-7;
        Self {
            gain: [[g, 0.0, 0.0, 0.0], [0.0, g, 0.0, 0.0], [0.0, 0.0, g, 0.0], [0.0, 0.0, 0.0, g]],
            max_step: Some(0.02),
            perturbation: PerturbationSchedule::default(),
            k_w: 1.5e5,
            max_iter: 60,
            tol: 1e-4,
            warmup: 20,
            forgetting: 0.99,
            p0: 1e8,
            cov_floor: 1e-8,
            b0: BasisParams::default(),
            bounds: BasisBox::default(),
        }
    }
}

impl IlcConfig {
    pub fn gain_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.gain[i][j])
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        ensure(self.perturbation.amplitude.iter().all(|a| *a >= 0.0), || "perturbation amplitude must be >= 0".into())?;
        ensure(self.perturbation.decay_tau > 0.0, || "perturbation decay must be positive".into())?;
        ensure(self.forgetting > 0.0 && self.forgetting <= 1.0, || "forgetting factor must lie in (0, 1]".into())?;
        ensure(self.p0 > 0.0 && self.cov_floor >= 0.0 && self.cov_floor < self.p0, || {
            "invalid RLS covariance limits".into()
        })?;
        let k = self.gain_matrix();
        let sym = (k + k.transpose()) * 0.5;
        ensure(sym.symmetric_eigenvalues().min() >= -1e-12, || "learning gain must be positive semidefinite".into())?;
        ensure(self.max_step.is_none_or(|m| m > 0.0), || "max_step must be positive".into())?;
        ensure(self.bounds.contains(&self.b0), || format!("b0 {:?} is outside the basis box", self.b0))
    }
}

/// b_{k+1} = clamp(b_k + K_L·∇J̃(b_k) + P_n), the learning step capped at
/// `max_step` in norm.
pub fn ilc_update(model: &RlsModel, b_k: &BasisParams, cfg: &IlcConfig, perturbation: &Vector4<f64>) -> BasisParams {
    let mut step = cfg.gain_matrix() * model.gradient(b_k);
    if let Some(cap) = cfg.max_step {
        let n = step.norm();
        if n > cap {
            step *= cap / n;
        }
    }
    BasisParams::from_vector(&cfg.bounds.clamp(&(b_k.to_vector() + step + perturbation)))
}

/// Result of one lap flown with fixed path parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LapOutcome {
    pub j: f64,
    pub p_avg: f64,
    pub p_peak: f64,
}

/// Flies one lap per call; state may carry over between laps.
pub trait LapEvaluator {
    fn run_lap(&mut self, b: &BasisParams) -> Result<LapOutcome>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlcRecord {
    pub k: usize,
    pub b: BasisParams,
    pub j: f64,
    pub p_avg: f64,
    pub p_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlcResult {
    pub best_b: BasisParams,
    pub best_j: f64,
    /// Peak instantaneous power of the best lap.
    pub p_peak: f64,
    pub p_avg: f64,
    pub history: Vec<IlcRecord>,
    pub converged: bool,
}

/// Alternates lap evaluation, meta-model update and path update until the
/// step falls below tolerance or the iteration cap is hit.
pub fn optimize_path<E: LapEvaluator>(eval: &mut E, cfg: &IlcConfig) -> Result<IlcResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.perturbation.seed);
    let mut model = RlsModel::new(cfg.b0, cfg.p0, cfg.forgetting, cfg.cov_floor);
    let mut b = cfg.b0;
    let mut history = Vec::with_capacity(cfg.max_iter);
    let mut best: Option<IlcRecord> = None;
    let mut converged = false;
    for k in 0..cfg.max_iter {
        let lap = eval.run_lap(&b)?;
        let rec = IlcRecord { k, b, j: lap.j, p_avg: lap.p_avg, p_peak: lap.p_peak };
        history.push(rec);
        if best.as_ref().is_none_or(|r| rec.j > r.j) {
            best = Some(rec);
        }
        model = rls_update(&model, &b, lap.j);
        let pn = cfg.perturbation.draw(&mut rng, k);
        let next = if k + 1 < cfg.warmup {
            BasisParams::from_vector(&cfg.bounds.clamp(&(cfg.b0.to_vector() + pn)))
        } else {
            ilc_update(&model, &b, cfg, &pn)
        };
        if k + 1 >= cfg.warmup && (next.to_vector() - b.to_vector()).norm() < cfg.tol {
            converged = true;
            break;
        }
        b = next;
    }
    let best = best.ok_or(Error::EmptyLap)?;
    Ok(IlcResult { best_b: best.b, best_j: best.j, p_peak: best.p_peak, p_avg: best.p_avg, history, converged })
}

/// Writes `k,b1,b2,b3,b4,J,P_avg,P_peak` rows.
pub fn write_history<W: Write>(history: &[IlcRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse { what: "ILC history".into(), msg: e.to_string() };
    w.write_record(["k", "b1", "b2", "b3", "b4", "J", "P_avg", "P_peak"]).map_err(err)?;
    for r in history {
        w.serialize((r.k, r.b.b1, r.b.b2, r.b.b3, r.b.b4, r.j, r.p_avg, r.p_peak)).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
