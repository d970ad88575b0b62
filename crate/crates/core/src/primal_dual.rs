//! Primal-dual reconstruction of a patch from a real-valued descriptor.
//!
//! Solves `min_x λ‖Lx − p̄‖₁ + ‖Wx‖₁ + ι_S(x)` in the product space
//! `(y, z)` with block operator `K = diag(L, W)`, alternating proximal steps
//! on the duals `r ∈ B∞(λ)` and `s ∈ B∞(1)` with a projected primal step and
//! over-relaxation.
//!
//! The two primal blocks are kept as one field: the prox of `G` returns the
//! same value for `y` and `z` at every iteration, so the pair is always on
//! the bisector `y = z`.

use crate::error::{LbdError, Result};
use crate::field::{Field, Patch};
use crate::proxops::{prox_f1_star_in_place, prox_f2_star_in_place, ValidityDomain};
use crate::sensing::{operator_norm, Descriptor, Pattern, SensingOperator};
use crate::wavelet;

#[derive(Clone, Debug, PartialEq)]
pub struct PdConfig {
    /// Weight of the data term.
    pub lambda: f64,
    pub iterations: usize,
    /// Over-relaxation in `[0, 1]`.
    pub theta: f64,
    /// Dual step; `1/Γ` when unset.
    pub sigma: Option<f64>,
    /// Primal step; `1/Γ` when unset.
    pub tau: Option<f64>,
    /// Bound on `‖K‖`; estimated as `sqrt(‖L‖² + 1)` when unset.
    pub gamma: Option<f64>,
    /// Power iterations used to estimate `‖L‖` when `gamma` is unset.
    pub norm_iterations: usize,
    pub norm_seed: u64,
    /// Accept binary descriptors, read as `±1` reals.
    pub allow_binary: bool,
    pub domain: ValidityDomain,
}

impl Default for PdConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            iterations: 1000,
            theta: 1.0,
            sigma: None,
            tau: None,
            gamma: None,
            norm_iterations: 100,
            norm_seed: 0,
            allow_binary: false,
            domain: ValidityDomain::default(),
        }
    }
}

/// Iterates of the solver. `x` stands for both primal blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct PdState {
    pub x: Field,
    pub x_relaxed: Field,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

/// Step sizes after defaults have been resolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdSteps {
    pub gamma: f64,
    pub sigma: f64,
    pub tau: f64,
    pub theta: f64,
}

pub struct PrimalDual {
    op: SensingOperator,
    pbar: Vec<f64>,
    lambda: f64,
    steps: PdSteps,
    domain: ValidityDomain,
    state: PdState,
    iteration: usize,
    // scratch
    lx: Vec<f64>,
    back: Vec<f64>,
}

impl PrimalDual {
    pub fn new(descriptor: &Descriptor, pattern: &Pattern, config: &PdConfig) -> Result<Self> {
        descriptor.check_pattern(pattern)?;
        if descriptor.is_binary() && !config.allow_binary {
            return Err(LbdError::PayloadType(
                "the primal-dual solver expects a real-valued descriptor; use BIHT for binary ones"
                    .into(),
            ));
        }
        if !(config.lambda > 0.0) {
            return Err(LbdError::Parameter(format!("lambda must be positive, got {}", config.lambda)));
        }
        if !(0.0..=1.0).contains(&config.theta) {
            return Err(LbdError::Parameter(format!("theta must lie in [0, 1], got {}", config.theta)));
        }
        let gamma = match config.gamma {
            Some(g) => g,
            None => {
                let l = operator_norm(pattern, config.norm_iterations.max(1), config.norm_seed)?;
                (l * l + 1.0).sqrt()
            }
        };
        let sigma = config.sigma.unwrap_or(1.0 / gamma);
        let tau = config.tau.unwrap_or(1.0 / gamma);
        if !(gamma > 0.0 && sigma > 0.0 && tau > 0.0) || gamma * gamma * sigma * tau > 1.0 + 1e-12 {
            return Err(LbdError::Parameter(format!(
                "step sizes violate Γ²στ <= 1 (Γ={gamma}, σ={sigma}, τ={tau})"
            )));
        }

        let side = pattern.patch_side();
        let m = pattern.len();
        let state = PdState {
            x: Field::zeros(side),
            x_relaxed: Field::zeros(side),
            r: vec![0.0; m],
            s: vec![0.0; side * side],
        };
        Ok(Self {
            op: pattern.operator(),
            pbar: descriptor.payload().to_real(),
            lambda: config.lambda,
            steps: PdSteps {
                gamma,
                sigma,
                tau,
                theta: config.theta,
            },
            domain: config.domain,
            state,
            iteration: 0,
            lx: vec![0.0; m],
            back: vec![0.0; side * side],
        })
    }

    pub fn steps(&self) -> PdSteps {
        self.steps
    }

    pub fn state(&self) -> &PdState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn step(&mut self) {
        let PdSteps { sigma, tau, theta, .. } = self.steps;
        let side = self.op.side();
        let st = &mut self.state;

        // dual ascent on the data term
        self.op.forward_into(st.x_relaxed.values(), &mut self.lx);
        for (r, l) in st.r.iter_mut().zip(&self.lx) {
            *r += sigma * l;
        }
        prox_f1_star_in_place(&mut st.r, sigma, self.lambda, &self.pbar);

        // dual ascent on the sparsity term
        let mut wx = st.x_relaxed.values().to_vec();
        wavelet::forward_in_place(&mut wx, side);
        for (s, w) in st.s.iter_mut().zip(&wx) {
            *s += sigma * w;
        }
        prox_f2_star_in_place(&mut st.s);

        // primal descent, averaged over both blocks, then projection onto S
        self.op.adjoint_into(&st.r, &mut self.back);
        let mut wts = st.s.clone();
        wavelet::inverse_in_place(&mut wts, side);
        let prev = st.x.clone();
        for ((x, lt), wt) in st.x.values_mut().iter_mut().zip(&self.back).zip(&wts) {
            *x -= 0.5 * tau * (lt + wt);
        }
        self.domain.project(st.x.values_mut());

        for ((xr, x), p) in st
            .x_relaxed
            .values_mut()
            .iter_mut()
            .zip(st.x.values())
            .zip(prev.values())
        {
            *xr = x + theta * (x - p);
        }
        self.iteration += 1;
    }

    pub fn run(&mut self, iterations: usize) {
        for _ in 0..iterations {
            self.step();
        }
    }

    /// Current primal iterate as a patch.
    pub fn estimate(&self) -> Patch {
        // the projection already clipped to [0, h_pix]; clamping only guards h_pix > 1
        Patch::clamped(self.state.x.clone())
    }
}

/// Runs `config.iterations` primal-dual iterations from zero and returns the
/// final primal iterate.
pub fn reconstruct_real(descriptor: &Descriptor, pattern: &Pattern, config: &PdConfig) -> Result<Patch> {
    let mut solver = PrimalDual::new(descriptor, pattern, config)?;
    solver.run(config.iterations);
    Ok(solver.estimate())
}

/// `λ‖Lx − p̄‖₁ + ‖Wx‖₁`, without the indicator of `S`.
pub fn objective_real(x: &Field, descriptor: &Descriptor, pattern: &Pattern, lambda: f64) -> Result<f64> {
    descriptor.check_pattern(pattern)?;
    let pbar = descriptor.payload().to_real();
    let lx = pattern.forward(x)?;
    let data: f64 = lx.iter().zip(&pbar).map(|(a, b)| (a - b).abs()).sum();
    let sparsity: f64 = wavelet::analyze(x)?.values().iter().map(|v| v.abs()).sum();
    Ok(lambda * data + sparsity)
}
