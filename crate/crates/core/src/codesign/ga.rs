//! Dual-objective formulation w·ln(P_gen) − ln(m_wing), solved over the full
//! mixed-integer decision vector by a seeded genetic algorithm with a
//! deterministic local polish.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nested::{ErrorRecord, NestedSolver, SweepEntry};
use super::problem::{DesignVars, KiteDesign, PowerRequirement, Problem};
use crate::error::{ensure, Error, Result};
use crate::hydro::WingPlanform;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub elite: usize,
    pub generations: usize,
    pub seed: u64,
    pub crossover_prob: f64,
    /// SBX distribution index.
    pub eta_c: f64,
    /// Polynomial-mutation distribution index.
    pub eta_m: f64,
    /// Per-gene mutation probability; 1/8 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_prob: Option<f64>,
    pub tournament: usize,
    /// Refine the GA winner with nested wing sizing and a pattern search on
    /// (s, AR).
    pub polish: bool,
    /// Final pattern-search step, relative to the (s, AR) box.
    pub polish_tol: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 200,
            elite: 20,
            generations: 60,
            seed: 7,
            crossover_prob: 0.9,
            eta_c: 15.0,
            eta_m: 20.0,
            mutation_prob: None,
            tournament: 2,
            polish: true,
            polish_tol: 1e-6,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.population >= 2 && self.elite < self.population, || {
            format!("need population >= 2 and elite < population, got {} / {}", self.population, self.elite)
        })?;
        ensure((0.0..=1.0).contains(&self.crossover_prob), || "crossover_prob must lie in [0, 1]".into())?;
        ensure(self.mutation_prob.is_none_or(|p| (0.0..=1.0).contains(&p)), || {
            "mutation_prob must lie in [0, 1]".into()
        })?;
        ensure(self.eta_c >= 0.0 && self.eta_m >= 0.0, || "distribution indices must be non-negative".into())?;
        ensure(self.tournament >= 1, || "tournament size must be at least 1".into())?;
        ensure(self.polish_tol > 0.0, || "polish_tol must be positive".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub w: f64,
    pub p_min: f64,
    /// w·ln(P_gen) − ln(m_wing).
    pub objective: f64,
    pub design: KiteDesign,
    /// Objective of the raw GA winner, before polishing.
    pub ga_objective: f64,
    /// Feasible individuals in the final population.
    pub feasible_count: usize,
}

const N_REAL: usize = 7;

/// Real genes (s, AR, t_sp, t_sw, D, L, t_sf) plus the spar count.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Genome {
    x: [f64; N_REAL],
    n_sp: u8,
}

impl Genome {
    fn vars(&self) -> DesignVars {
        let x = &self.x;
        DesignVars { s: x[0], ar: x[1], n_sp: self.n_sp, t_sp: x[2], t_sw: x[3], d: x[4], l: x[5], t_sf: x[6] }
    }
}

/// Death-penalty fitness: −∞ unless every constraint margin is above −tol.
pub fn dual_fitness(problem: &Problem, u: &DesignVars, w: f64, p_min: f64, tol: f64) -> f64 {
    match problem.audit(u, PowerRequirement::AtLeast(p_min)) {
        Ok((d, m)) if m.feasible(tol) && d.m_wing > 0.0 => w * d.p_gen.ln() - d.m_wing.ln(),
        _ => f64::NEG_INFINITY,
    }
}

pub struct DualSolver<'a> {
    pub nested: &'a NestedSolver<'a>,
    pub ga: GaConfig,
    /// Constraint tolerance of the fitness audit.
    pub tol: f64,
    lo: [f64; N_REAL],
    hi: [f64; N_REAL],
}

impl<'a> DualSolver<'a> {
    pub fn new(nested: &'a NestedSolver<'a>, ga: GaConfig, tol: f64) -> Result<Self> {
        ga.validate()?;
        ensure(tol >= 0.0, || format!("audit tolerance must be non-negative, got {tol}"))?;
        let b = &nested.problem.bounds;
        Ok(Self {
            nested,
            ga,
            tol,
            lo: [b.s[0], b.ar[0], b.t_sp[0], b.t_sw[0], b.d[0], b.l[0], b.t_sf[0]],
            hi: [b.s[1], b.ar[1], b.t_sp[1], b.t_sw[1], b.d[1], b.l[1], b.t_sf[1]],
        })
    }

    fn problem(&self) -> &Problem {
        self.nested.problem
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Genome {
        let mut x = [0.0; N_REAL];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if self.hi[i] > self.lo[i] { rng.random_range(self.lo[i]..=self.hi[i]) } else { self.lo[i] };
        }
        let n = self.problem().bounds.n_sp;
        Genome { x, n_sp: rng.random_range(n[0]..=n[1]) }
    }

    fn tournament(&self, rng: &mut ChaCha8Rng, fit: &[f64]) -> usize {
        let mut best = rng.random_range(0..fit.len());
        for _ in 1..self.ga.tournament {
            let c = rng.random_range(0..fit.len());
            if fit[c] > fit[best] {
                best = c;
            }
        }
        best
    }

    /// Simulated binary crossover, gene by gene with probability 1/2.
    fn sbx(&self, rng: &mut ChaCha8Rng, a: &Genome, b: &Genome) -> (Genome, Genome) {
        let (mut c1, mut c2) = (*a, *b);
        if rng.random::<f64>() < self.ga.crossover_prob {
            for i in 0..N_REAL {
                if rng.random::<f64>() >= 0.5 || (a.x[i] - b.x[i]).abs() < 1e-14 {
                    continue;
                }
                let u: f64 = rng.random();
                let beta = if u <= 0.5 {
                    (2.0 * u).powf(1.0 / (self.ga.eta_c + 1.0))
                } else {
                    (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (self.ga.eta_c + 1.0))
                };
                let (x1, x2) = (a.x[i], b.x[i]);
                c1.x[i] = (0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)).clamp(self.lo[i], self.hi[i]);
                c2.x[i] = (0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)).clamp(self.lo[i], self.hi[i]);
            }
            if rng.random::<f64>() < 0.5 {
                std::mem::swap(&mut c1.n_sp, &mut c2.n_sp);
            }
        }
        (c1, c2)
    }

    /// Polynomial mutation of real genes; uniform reset of the spar count.
    fn mutate(&self, rng: &mut ChaCha8Rng, g: &mut Genome) {
        let pm = self.ga.mutation_prob.unwrap_or(1.0 / (N_REAL + 1) as f64);
        for i in 0..N_REAL {
            let span = self.hi[i] - self.lo[i];
            if span <= 0.0 || rng.random::<f64>() >= pm {
                continue;
            }
            let u: f64 = rng.random();
            let e = 1.0 / (self.ga.eta_m + 1.0);
            let delta = if u < 0.5 { (2.0 * u).powf(e) - 1.0 } else { 1.0 - (2.0 * (1.0 - u)).powf(e) };
            g.x[i] = (g.x[i] + delta * span).clamp(self.lo[i], self.hi[i]);
        }
        if rng.random::<f64>() < pm {
            let n = self.problem().bounds.n_sp;
            g.n_sp = rng.random_range(n[0]..=n[1]);
        }
    }

    fn evaluate(&self, pop: &[Genome], w: f64, p_min: f64) -> Vec<f64> {
        pop.par_iter().map(|g| dual_fitness(self.problem(), &g.vars(), w, p_min, self.tol)).collect()
    }

    /// Best feasible individual after the generation cap, optionally
    /// polished.
    pub fn simultaneous_ga(&self, w: f64, p_min: f64) -> Result<DualPoint> {
        ensure(w > 0.0 && w.is_finite(), || format!("weight w must be positive, got {w}"))?;
        ensure(p_min > 0.0, || format!("P_min must be positive, got {p_min}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.ga.seed);
        let n = self.ga.population;
        let mut pop: Vec<Genome> = (0..n).map(|_| self.random(&mut rng)).collect();
        let mut fit = self.evaluate(&pop, w, p_min);
        for _ in 0..self.ga.generations {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]).then(a.cmp(&b)));
            let mut next: Vec<Genome> = order[..self.ga.elite].iter().map(|&i| pop[i]).collect();
            while next.len() < n {
                let a = pop[self.tournament(&mut rng, &fit)];
                let b = pop[self.tournament(&mut rng, &fit)];
                let (mut c1, mut c2) = self.sbx(&mut rng, &a, &b);
                self.mutate(&mut rng, &mut c1);
                self.mutate(&mut rng, &mut c2);
                next.push(c1);
                if next.len() < n {
                    next.push(c2);
                }
            }
            pop = next;
            fit = self.evaluate(&pop, w, p_min);
        }
        let feasible_count = fit.iter().filter(|f| f.is_finite()).count();
        let best = (0..n)
            .filter(|&i| fit[i].is_finite())
            .max_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(b.cmp(&a)))
            .ok_or(Error::NoFeasibleIndividual)?;
        let ga_objective = fit[best];
        let mut u = pop[best].vars();
        let mut objective = ga_objective;
        if self.ga.polish {
            if let Some((pu, po)) = self.polish(&u, w, p_min)? {
                if po > objective {
                    (u, objective) = (pu, po);
                }
            }
        }
        let design = self.problem().evaluate(&u)?;
        Ok(DualPoint { w, p_min, objective, design, ga_objective, feasible_count })
    }

    /// Fully sized design at (s, AR): SWDT wing and lightest grid fuselage.
    fn sized(&self, s: f64, ar: f64) -> Option<DesignVars> {
        let problem = self.problem();
        let planform = WingPlanform::new(s, ar).ok()?;
        let (wing, rated) = problem.wing_structure(&planform).ok()?;
        let fuse = problem.lightest_fuselage(&planform, &rated, wing.m_wing, self.nested.dl_grid()).ok()?;
        Some(DesignVars {
            s,
            ar,
            n_sp: wing.design.n_sp,
            t_sp: wing.design.t_sp,
            t_sw: wing.design.t_sw,
            d: fuse.design.d,
            l: fuse.design.l,
            t_sf: fuse.design.t_sf,
        })
    }

    /// Moves AR toward higher power until P(s, AR) ≥ P_min, landing on the
    /// power boundary; None if no AR at this span is powerful enough.
    fn project(&self, s: f64, ar: f64, p_min: f64) -> Option<f64> {
        let problem = self.problem();
        let p = |a: f64| problem.power(s, a).ok();
        if p(ar)? >= p_min {
            return Some(ar);
        }
        let [lo, hi] = problem.bounds.ar;
        let h = 1e-6 * (hi - lo);
        let toward = if p((ar + h).min(hi))? > p((ar - h).max(lo))? { hi } else { lo };
        // Coarse march to bracket, then bisect on the power boundary.
        let steps = 64;
        let mut inside = ar;
        for k in 1..=steps {
            let a = ar + (toward - ar) * k as f64 / steps as f64;
            if p(a)? >= p_min {
                let mut out = a;
                for _ in 0..60 {
                    let m = 0.5 * (inside + out);
                    if p(m)? >= p_min {
                        out = m;
                    } else {
                        inside = m;
                    }
                }
                return Some(out);
            }
            inside = a;
        }
        None
    }

    fn nested_objective(&self, s: f64, ar: f64, w: f64, p_min: f64) -> Option<(DesignVars, f64)> {
        let ar = self.project(s, ar, p_min)?;
        let u = self.sized(s, ar)?;
        let f = dual_fitness(self.problem(), &u, w, p_min, self.tol);
        f.is_finite().then_some((u, f))
    }

    /// Compass search on (s, AR) with the wing re-sized by SWDT at every
    /// trial and infeasible-power trials projected onto P = P_min.
    fn polish(&self, start: &DesignVars, w: f64, p_min: f64) -> Result<Option<(DesignVars, f64)>> {
        let b = self.problem().bounds;
        let Some((mut u, mut f)) = self.nested_objective(start.s, start.ar, w, p_min) else {
            return Ok(None);
        };
        let scale = [b.s[1] - b.s[0], b.ar[1] - b.ar[0]];
        let mut step = 0.05;
        let dirs =
            [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
        while step > self.ga.polish_tol {
            let mut improved = false;
            for (ds, dar) in dirs {
                let s = (u.s + ds * step * scale[0]).clamp(b.s[0], b.s[1]);
                let ar = (u.ar + dar * step * scale[1]).clamp(b.ar[0], b.ar[1]);
                if let Some((cu, cf)) = self.nested_objective(s, ar, w, p_min) {
                    if cf > f + 1e-15 {
                        (u, f) = (cu, cf);
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok(Some((u, f)))
    }
}

/// Runs the dual solver for every weight; failures are recorded.
pub fn dual_sweep(solver: &DualSolver, weights: &[f64], p_min: f64) -> Result<Vec<SweepEntry<DualPoint>>> {
    ensure(!weights.is_empty(), || "weight list is empty".into())?;
    Ok(weights
        .iter()
        .map(|&w| match solver.simultaneous_ga(w, p_min) {
            Ok(p) => SweepEntry { input: w, point: Some(p), error: None },
            Err(e) => SweepEntry { input: w, point: None, error: Some(ErrorRecord::from(&e)) },
        })
        .collect())
}
