//! Correlation-domain signal simulation.
//!
//! The receiver correlation function at lag `δ` (in chips) is modeled as
//!
//! ```text
//! ξ(δ) = β [ √P_A R(δ − Δτ_A) e^{jΔθ_A} + √(η P_A) R(δ − Δτ_I) e^{jΔθ_I} + ξ_N(δ) ]
//! ```
//!
//! with `R` the ideal triangular C/A autocorrelation and `ξ_N` complex
//! Gaussian noise whose in-phase and quadrature parts each have covariance
//! `σ² Q`, `Q[a][b] = R(|a − b| Δδ)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

/// Chip width. All lags and code offsets are expressed in chips.
pub const CHIP: f64 = 1.0;

/// Ideal (infinite-bandwidth) normalized C/A-code autocorrelation.
#[inline]
pub fn autocorr(tau: f64) -> f64 {
    (1.0 - tau.abs() / CHIP).max(0.0)
}

/// Uniform grid of `l` correlator taps spanning `[−τ_c, +τ_c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TapGrid {
    offsets: Vec<f64>,
    spacing: f64,
}

impl TapGrid {
    pub fn new(l: usize) -> Result<Self> {
        if l < 3 || l % 2 == 0 {
            return Err(Error::InvalidTapCount(l));
        }
        let half = (l - 1) / 2;
        let spacing = 2.0 * CHIP / (l - 1) as f64;
        // Built from signed integer multiples so the prompt is exactly zero
        // and the end taps are exactly ±τ_c.
        let offsets = (0..l)
            .map(|i| (i as f64 - half as f64) * CHIP / half as f64)
            .collect();
        Ok(Self { offsets, spacing })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn prompt_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    /// Index of the tap located at `lag`, if any (tolerance 1e−9 chips).
    pub fn index_of(&self, lag: f64) -> Option<usize> {
        let k = lag / self.spacing;
        let rounded = k.round();
        if (k - rounded).abs() > 1e-9 {
            return None;
        }
        let idx = rounded as i64 + self.prompt_index() as i64;
        (0..self.len() as i64).contains(&idx).then_some(idx as usize)
    }
}

/// Thermal plus multi-access noise description for one accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub n0: f64,
    pub m0: f64,
    pub t_accum: f64,
}

impl NoiseModel {
    pub fn new(n0: f64, m0: f64, t_accum: f64) -> Result<Self> {
        let model = Self { n0, m0, t_accum };
        model.validate()?;
        Ok(model)
    }

    /// Noise model giving the requested carrier-to-noise density for an
    /// authentic signal of power `p_auth` (multi-access noise folded into `n0`).
    pub fn from_cn0(cn0_dbhz: f64, p_auth: f64, t_accum: f64) -> Result<Self> {
        if !cn0_dbhz.is_finite() {
            return Err(Error::InvalidParameter(format!("C/N0 {cn0_dbhz} dB-Hz")));
        }
        Self::new(p_auth / 10f64.powf(cn0_dbhz / 10.0), 0.0, t_accum)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n0 > 0.0 && self.n0.is_finite()) {
            return Err(Error::InvalidParameter(format!("n0 must be > 0, got {}", self.n0)));
        }
        if !(self.m0 >= 0.0 && self.m0.is_finite()) {
            return Err(Error::InvalidParameter(format!("m0 must be >= 0, got {}", self.m0)));
        }
        if !(self.t_accum > 0.0 && self.t_accum.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "accumulation interval must be > 0, got {}",
                self.t_accum
            )));
        }
        Ok(())
    }

    /// Per-component noise variance `(N0 + M0) / 2T`.
    pub fn sigma_n_sq(&self) -> f64 {
        (self.n0 + self.m0) / (2.0 * self.t_accum)
    }

    /// Carrier-to-noise density in dB-Hz for authentic power `p_auth`.
    pub fn cn0_dbhz(&self, p_auth: f64) -> f64 {
        10.0 * (p_auth / (self.n0 + self.m0)).log10()
    }
}

/// Lag-domain noise covariance `Q` and its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCovariance {
    grid: TapGrid,
    l: usize,
    q: Vec<f64>,
    chol: Vec<f64>,
}

impl NoiseCovariance {
    pub fn new(grid: &TapGrid) -> Result<Self> {
        let l = grid.len();
        let half = grid.prompt_index() as f64;
        let mut q = vec![0.0; l * l];
        for a in 0..l {
            for b in 0..l {
                // Lag as k/half so that lags of exactly one chip give R = 0.
                q[a * l + b] = autocorr(a.abs_diff(b) as f64 * CHIP / half);
            }
        }
        let chol = cholesky(&q, l)?;
        Ok(Self {
            grid: grid.clone(),
            l,
            q,
            chol,
        })
    }

    /// Grid this covariance was built for.
    pub fn grid(&self) -> &TapGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    pub fn q(&self, a: usize, b: usize) -> f64 {
        self.q[a * self.l + b]
    }

    /// Row-major `Q`.
    pub fn q_matrix(&self) -> &[f64] {
        &self.q
    }

    /// Row-major lower-triangular factor `L` with `L Lᵀ = Q`.
    pub fn chol(&self) -> &[f64] {
        &self.chol
    }

    /// Solves `L y = x` in place, mapping a lag-correlated vector to white coordinates.
    pub fn whiten_real(&self, x: &mut [f64]) {
        let l = self.l;
        for i in 0..l {
            let row = &self.chol[i * l..i * l + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.chol[i * l + i];
        }
    }

    pub fn whiten_complex(&self, x: &mut [Complex64]) {
        let l = self.l;
        for i in 0..l {
            let row = &self.chol[i * l..i * l + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(a, b)| b * *a).sum();
            x[i] = (x[i] - s) / self.chol[i * l + i];
        }
    }

    /// Computes `L z`.
    pub fn color(&self, z: &[f64], out: &mut [f64]) {
        let l = self.l;
        for (i, o) in out.iter_mut().enumerate().take(l) {
            *o = self.chol[i * l..i * l + i + 1]
                .iter()
                .zip(z)
                .map(|(a, b)| a * b)
                .sum();
        }
    }
}

fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 1e-12) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// Draws lag-correlated complex noise whose in-phase and quadrature parts are
/// independent with covariance `sigma_n_sq · Q` each.
pub fn sample_noise<R: Rng + ?Sized>(
    cov: &NoiseCovariance,
    sigma_n_sq: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let l = cov.len();
    let scale = sigma_n_sq.max(0.0).sqrt();
    let mut z = vec![0.0; 2 * l];
    for v in z.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let mut re = vec![0.0; l];
    let mut im = vec![0.0; l];
    cov.color(&z[..l], &mut re);
    cov.color(&z[l..], &mut im);
    re.iter()
        .zip(&im)
        .map(|(&r, &i)| Complex64::new(scale * r, scale * i))
        .collect()
}

/// Ideal constant-output-power AGC scale `1/√(1 + η P_A + J/N)`.
pub fn agc_gain(eta: f64, p_auth: f64, jnr: f64) -> f64 {
    1.0 / (1.0 + eta * p_auth + jnr).sqrt()
}

/// Physical parameters driving one simulated correlation epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub hypothesis: Hypothesis,
    pub p_auth: f64,
    pub eta: f64,
    pub dtau_a: f64,
    pub dtheta_a: f64,
    pub dtau_i: f64,
    pub dtheta_i: f64,
    pub jnr: f64,
    pub beta: f64,
    pub noise: NoiseModel,
}

impl ScenarioParams {
    /// Interference-free scenario with the AGC gain set by [`agc_gain`].
    pub fn nominal(noise: NoiseModel) -> Self {
        Self {
            hypothesis: Hypothesis::H0,
            p_auth: 1.0,
            eta: 0.0,
            dtau_a: 0.0,
            dtheta_a: 0.0,
            dtau_i: 0.0,
            dtheta_i: 0.0,
            jnr: 0.0,
            beta: 1.0,
            noise,
        }
        .with_ideal_agc()
    }

    pub fn with_ideal_agc(mut self) -> Self {
        self.beta = agc_gain(self.eta, self.p_auth, self.jnr);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.p_auth > 0.0 && self.p_auth.is_finite()) {
            return bad(format!("p_auth must be > 0, got {}", self.p_auth));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be >= 0, got {}", self.eta));
        }
        if !(self.jnr >= 0.0 && self.jnr.is_finite()) {
            return bad(format!("jnr must be >= 0, got {}", self.jnr));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be > 0, got {}", self.beta));
        }
        for (name, v) in [
            ("dtau_a", self.dtau_a),
            ("dtheta_a", self.dtheta_a),
            ("dtau_i", self.dtau_i),
            ("dtheta_i", self.dtheta_i),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        match self.hypothesis {
            Hypothesis::H0 if self.eta != 0.0 || self.jnr != 0.0 => {
                return bad("H0 requires eta = 0 and jnr = 0".into());
            }
            Hypothesis::H3 if self.eta != 0.0 => return bad("H3 requires eta = 0".into()),
            _ => {}
        }
        self.noise.validate()
    }

    /// Per-component noise variance after jammer inflation, before AGC.
    pub fn effective_noise_var(&self) -> f64 {
        self.noise.sigma_n_sq() * (1.0 + self.jnr)
    }
}

/// Complex correlator outputs at the taps of a [`TapGrid`].
///
/// `noise_var` is the per-component noise variance `β² σ² (1 + J/N)` seen in
/// these taps; the distortion monitor normalizes residuals by it.
#[derive(Debug, Clone, PartialEq)]
pub struct TapVector {
    pub values: Vec<Complex64>,
    pub noise_var: f64,
}

impl TapVector {
    pub fn new(values: Vec<Complex64>, noise_var: f64) -> Self {
        Self { values, noise_var }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check(&self, grid_len: usize) -> Result<()> {
        if self.values.len() != grid_len {
            return Err(Error::TapCountMismatch {
                expected: grid_len,
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

fn signal_taps(params: &ScenarioParams, grid: &TapGrid) -> Vec<Complex64> {
    let a_auth = params.p_auth.sqrt();
    let a_int = (params.eta * params.p_auth).sqrt();
    let rot_a = Complex64::from_polar(1.0, params.dtheta_a);
    let rot_i = Complex64::from_polar(1.0, params.dtheta_i);
    grid.offsets()
        .iter()
        .map(|&d| {
            let s = rot_a * (a_auth * autocorr(d - params.dtau_a))
                + rot_i * (a_int * autocorr(d - params.dtau_i));
            s * params.beta
        })
        .collect()
}

/// Simulates one epoch of correlator taps.
pub fn simulate_taps<R: Rng + ?Sized>(
    params: &ScenarioParams,
    grid: &TapGrid,
    cov: &NoiseCovariance,
    rng: &mut R,
) -> Result<TapVector> {
    params.validate()?;
    if cov.len() != grid.len() {
        return Err(Error::TapCountMismatch {
            expected: grid.len(),
            got: cov.len(),
        });
    }
    let mut values = signal_taps(params, grid);
    let sigma_eff = params.effective_noise_var();
    let noise = sample_noise(cov, sigma_eff, rng);
    for (v, n) in values.iter_mut().zip(noise) {
        *v += n * params.beta;
    }
    Ok(TapVector::new(values, params.beta * params.beta * sigma_eff))
}

/// Signal-only taps. `noise_var` still reports the variance the noisy
/// simulation would carry so that normalized costs remain defined.
pub fn noiseless_taps(params: &ScenarioParams, grid: &TapGrid) -> Result<TapVector> {
    params.validate()?;
    Ok(TapVector::new(
        signal_taps(params, grid),
        params.beta * params.beta * params.effective_noise_var(),
    ))
}
