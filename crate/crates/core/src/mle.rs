//! Single-signal maximum-likelihood fit of the correlation function.
//!
//! For a candidate code phase `τ` the model is `ξ = h(τ) · a e^{jφ}` with
//! `h_i(τ) = R(δ_i − τ)`. The complex amplitude is the generalized least
//! squares solution under the lag-domain covariance `Q`, and the fit cost is
//! the `Q⁻¹`-weighted residual energy. Everything is evaluated in whitened
//! coordinates (`L⁻¹ξ`, `L⁻¹h`), which is algebraically the same solve.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::corrsim::{autocorr, NoiseCovariance, TapGrid, TapVector};
use crate::error::{Error, Result};

const DEGENERATE_EPS: f64 = 1e-12;

/// Bisection and normalization settings for the ML fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlConfig {
    pub rel_tol: f64,
    pub max_iter: u32,
    pub normalize: bool,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iter: 60,
            normalize: true,
        }
    }
}

impl MlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    pub fn unnormalized() -> Self {
        Self {
            normalize: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalEstimate {
    pub amp: f64,
    pub phase: f64,
    pub code_phase: f64,
    pub cost: f64,
    pub iterations: u32,
}

/// One evaluated code-phase hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub code_phase: f64,
    pub amplitude: Complex64,
    pub cost: f64,
}

impl Candidate {
    fn estimate(&self, iterations: u32) -> SignalEstimate {
        SignalEstimate {
            amp: self.amplitude.norm(),
            phase: self.amplitude.arg(),
            code_phase: self.code_phase,
            cost: self.cost,
            iterations,
        }
    }
}

/// Column of the observation matrix: `R(δ_i − τ)` for every tap.
pub fn observation_vector(tau_cand: f64, grid: &TapGrid) -> Vec<f64> {
    grid.offsets().iter().map(|&d| autocorr(d - tau_cand)).collect()
}

/// Taps mapped to white coordinates once, reused across candidate code phases.
struct WhitenedFit<'a> {
    grid: &'a TapGrid,
    cov: &'a NoiseCovariance,
    w: Vec<Complex64>,
    scale: f64,
}

impl<'a> WhitenedFit<'a> {
    fn new(
        taps: &TapVector,
        grid: &'a TapGrid,
        cov: &'a NoiseCovariance,
        config: &MlConfig,
    ) -> Result<Self> {
        taps.check(grid.len())?;
        taps.check(cov.len())?;
        let mut w = taps.values.clone();
        cov.whiten_complex(&mut w);
        Ok(Self {
            grid,
            cov,
            w,
            scale: cost_scale(taps, config),
        })
    }

    fn eval(&self, tau: f64) -> Result<Candidate> {
        let mut g = observation_vector(tau, self.grid);
        self.cov.whiten_real(&mut g);
        let gg: f64 = g.iter().map(|x| x * x).sum();
        if !(gg > DEGENERATE_EPS) {
            return Err(Error::DegenerateGeometry { code_phase: tau });
        }
        let gw: Complex64 = g.iter().zip(&self.w).map(|(a, b)| b * *a).sum();
        let amplitude = gw / gg;
        let raw: f64 = g
            .iter()
            .zip(&self.w)
            .map(|(a, b)| (b - amplitude * *a).norm_sqr())
            .sum();
        Ok(Candidate {
            code_phase: tau,
            amplitude,
            cost: raw * self.scale,
        })
    }
}

fn cost_scale(taps: &TapVector, config: &MlConfig) -> f64 {
    if config.normalize && taps.noise_var > 0.0 {
        1.0 / taps.noise_var
    } else {
        1.0
    }
}

/// Generalized least-squares complex amplitude `(hᵀQ⁻¹h)⁻¹ hᵀQ⁻¹ ξ` at `tau_cand`.
pub fn wls_solve(taps: &TapVector, tau_cand: f64, cov: &NoiseCovariance) -> Result<Complex64> {
    taps.check(cov.len())?;
    let fit = WhitenedFit::new(taps, cov.grid(), cov, &MlConfig::unnormalized())?;
    fit.eval(tau_cand).map(|c| c.amplitude)
}

/// Residual cost `rᴴQ⁻¹r` for `r = ξ − h(τ)·amp`, divided by the per-component
/// tap noise variance when `config.normalize` is set and that variance is positive.
pub fn fit_cost(
    taps: &TapVector,
    tau_cand: f64,
    amp_complex: Complex64,
    cov: &NoiseCovariance,
    config: &MlConfig,
) -> Result<f64> {
    taps.check(cov.len())?;
    let h = observation_vector(tau_cand, cov.grid());
    let mut r: Vec<Complex64> = taps
        .values
        .iter()
        .zip(&h)
        .map(|(x, hi)| x - amp_complex * *hi)
        .collect();
    cov.whiten_complex(&mut r);
    let raw: f64 = r.iter().map(|z| z.norm_sqr()).sum();
    Ok(raw * cost_scale(taps, config))
}

fn costs_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Evaluates the fit at every tap offset and returns the two lowest-cost
/// candidates, best first. Ties go to the smaller `|δ|`, then to the negative lag.
pub fn coarse_search(
    taps: &TapVector,
    grid: &TapGrid,
    cov: &NoiseCovariance,
    config: &MlConfig,
) -> Result<[Candidate; 2]> {
    let fit = WhitenedFit::new(taps, grid, cov, config)?;
    coarse_with(&fit)
}

fn coarse_with(fit: &WhitenedFit<'_>) -> Result<[Candidate; 2]> {
    let mut cands = fit
        .grid
        .offsets()
        .iter()
        .map(|&d| fit.eval(d))
        .collect::<Result<Vec<_>>>()?;
    cands.sort_by(|a, b| {
        if costs_tie(a.cost, b.cost) {
            a.code_phase
                .abs()
                .total_cmp(&b.code_phase.abs())
                .then(a.code_phase.total_cmp(&b.code_phase))
        } else {
            a.cost.total_cmp(&b.cost)
        }
    });
    Ok([cands[0], cands[1]])
}

/// Refines the code phase between two coarse candidates by bisection.
///
/// The search keeps a bracket `[lo, hi]` around the best point found so far.
/// Each iteration evaluates the midpoint of the longer side of the best
/// point, re-solving the amplitude there, and shrinks the bracket around
/// whichever point is now best. It stops once the best point is strictly
/// inside the bracket and both end costs are within `rel_tol` (relative) of
/// it, or after `max_iter` midpoint evaluations. The bracket is never widened.
///
/// When the candidates are not adjacent grid taps the cost between them is
/// usually two-humped, so a search runs on the tap interval next to each
/// candidate and the lower result wins. The two searches share `max_iter`.
pub fn refine_bisect(
    taps: &TapVector,
    bracket: [Candidate; 2],
    cov: &NoiseCovariance,
    config: &MlConfig,
) -> Result<SignalEstimate> {
    config.validate()?;
    let fit = WhitenedFit::new(taps, cov.grid(), cov, config)?;
    refine_with(&fit, bracket, config)
}

fn refine_with(
    fit: &WhitenedFit<'_>,
    bracket: [Candidate; 2],
    config: &MlConfig,
) -> Result<SignalEstimate> {
    let [a, b] = bracket;
    if a.code_phase == b.code_phase {
        return Err(Error::InvalidParameter(
            "bisection bracket endpoints must be distinct".into(),
        ));
    }
    let (lo, hi) = if a.code_phase < b.code_phase { (a, b) } else { (b, a) };
    let step = fit.grid.spacing();
    let mut searches = if hi.code_phase - lo.code_phase <= step * (1.0 + 1e-9) {
        vec![Search::new(lo, hi)]
    } else {
        let lo_in = fit.eval(lo.code_phase + step)?;
        let hi_in = fit.eval(hi.code_phase - step)?;
        vec![Search::new(lo, lo_in), Search::new(hi_in, hi)]
    };

    // Searches advance in turn so the iteration cap bounds their total.
    let mut iterations = 0;
    while iterations < config.max_iter {
        let mut stepped = false;
        for s in searches.iter_mut().filter(|s| !s.done) {
            if iterations == config.max_iter {
                break;
            }
            s.step(fit, config)?;
            iterations += 1;
            stepped = true;
        }
        if !stepped {
            break;
        }
    }
    let best = searches
        .iter()
        .map(|s| s.best)
        .reduce(|x, y| if y.cost < x.cost { y } else { x })
        .expect("at least one search");
    Ok(best.estimate(iterations))
}

/// Three-point search state: `best` lies in `[lo, hi]`.
struct Search {
    lo: Candidate,
    best: Candidate,
    hi: Candidate,
    done: bool,
}

impl Search {
    fn new(lo: Candidate, hi: Candidate) -> Self {
        let best = if hi.cost < lo.cost { hi } else { lo };
        Self { lo, best, hi, done: false }
    }

    fn step(&mut self, fit: &WhitenedFit<'_>, config: &MlConfig) -> Result<()> {
        let left = self.best.code_phase - self.lo.code_phase;
        let right = self.hi.code_phase - self.best.code_phase;
        let go_left = left >= right;
        let t = if go_left {
            0.5 * (self.lo.code_phase + self.best.code_phase)
        } else {
            0.5 * (self.best.code_phase + self.hi.code_phase)
        };
        let mid = fit.eval(t)?;

        if mid.cost < self.best.cost {
            if go_left {
                self.hi = self.best;
            } else {
                self.lo = self.best;
            }
            self.best = mid;
        } else if go_left {
            self.lo = mid;
        } else {
            self.hi = mid;
        }

        let (lo, best, hi) = (self.lo, self.best, self.hi);
        // A best point on the bracket edge says nothing about the interior.
        let interior = lo.code_phase < best.code_phase && best.code_phase < hi.code_phase;
        let edge = lo.cost.max(hi.cost);
        self.done = best.cost <= f64::MIN_POSITIVE
            || (interior && (edge - best.cost) / best.cost < config.rel_tol)
            || (best.code_phase - lo.code_phase).max(hi.code_phase - best.code_phase) <= f64::EPSILON;
        Ok(())
    }
}

/// Full distortion pipeline: coarse search, bisection refinement, and the
/// final (normalized) cost as the distortion measurement.
pub fn distortion(
    taps: &TapVector,
    grid: &TapGrid,
    cov: &NoiseCovariance,
    config: &MlConfig,
) -> Result<(SignalEstimate, f64)> {
    config.validate()?;
    if config.normalize && !(taps.noise_var > 0.0) {
        return Err(Error::InvalidParameter(
            "normalized distortion requires a positive tap noise variance".into(),
        ));
    }
    let fit = WhitenedFit::new(taps, grid, cov, config)?;
    let bracket = coarse_with(&fit)?;
    let est = refine_with(&fit, bracket, config)?;
    Ok((est, est.cost))
}
