//! Multistart Nelder–Mead maximization of facet functionals over the twelve
//! measurement angles, and bisection for violation thresholds.

use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // unused when dev-dependencies turn on num-traits/std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bellineq::FacetInequality;
use crate::error::{Error, Result};
use crate::measure::{CorrelationTensor, MeasurementSetting, Monomial};
use crate::qlin::DensityMatrix;
use crate::tol::VIOLATION_MARGIN;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub starts: usize,
    /// Budget of simplex iterations per start.
    pub max_iterations: usize,
    pub step_tol: f64,
    pub f_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            max_iterations: 2000,
            step_tol: 1e-8,
            f_tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidConfig("optimizer needs at least one start"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("optimizer needs a positive iteration budget"));
        }
        if !(self.step_tol > 0.0 && self.f_tol > 0.0) {
            return Err(Error::InvalidConfig("optimizer tolerances must be positive"));
        }
        Ok(())
    }
}

/// Result of a local simplex search (minimization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMinimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Adaptive Nelder–Mead (dimension-dependent coefficients) minimizing `f`
/// from `x0` with an axis-aligned initial simplex of edge `step`.
///
/// Converges when both the simplex spread in `x` (max-norm) and in `f` fall
/// below the configured tolerances; the search is then restarted once from
/// the best vertex with a smaller simplex to guard against collapse.
pub fn nelder_mead<const N: usize>(
    mut f: impl FnMut(&[f64; N]) -> f64,
    x0: [f64; N],
    step: f64,
    max_iterations: usize,
    step_tol: f64,
    f_tol: f64,
) -> LocalMinimum<N> {
    let n = N as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n);
    let mut eval = |x: &[f64; N]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best = (x0, eval(&x0));
    let mut iterations = 0;
    let mut converged = false;
    let mut edge = step;
    for round in 0..2 {
        let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
        simplex.push(best);
        for i in 0..N {
            let mut x = best.0;
            x[i] += edge;
            let v = eval(&x);
            simplex.push((x, v));
        }
        converged = false;
        while iterations < max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread_f = simplex[N].1 - simplex[0].1;
            let spread_x = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread_x < step_tol && spread_f.abs() < f_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = [0.0; N];
            for (x, _) in &simplex[..N] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n;
                }
            }
            let toward = |t: f64| -> [f64; N] {
                let worst = &simplex[N].0;
                core::array::from_fn(|i| centroid[i] + t * (centroid[i] - worst[i]))
            };
            let xr = toward(alpha);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = toward(alpha * beta);
                let fe = eval(&xe);
                simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[N - 1].1 {
                simplex[N] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[N].1 {
                    let xc = toward(alpha * gamma);
                    (xc, eval(&xc))
                } else {
                    let xc = toward(-gamma);
                    (xc, eval(&xc))
                };
                if fc < simplex[N].1.min(fr) {
                    simplex[N] = (xc, fc);
                } else {
                    let x_best = simplex[0].0;
                    for vertex in simplex[1..].iter_mut() {
                        let x: [f64; N] = core::array::from_fn(|i| x_best[i] + delta * (vertex.0[i] - x_best[i]));
                        *vertex = (x, eval(&x));
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        best = simplex[0];
        if round == 1 || !converged {
            break;
        }
        edge = (step * 0.05).max(step_tol * 100.0);
    }
    LocalMinimum {
        x: best.0,
        value: best.1,
        converged,
        iterations,
    }
}

/// A facet functional contracted with the Pauli tensor of a fixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetObjective {
    tensor: CorrelationTensor,
    coefs: [f64; Monomial::COUNT],
    bound: f64,
}

impl FacetObjective {
    pub fn new(rho: &DensityMatrix, f: &FacetInequality) -> Result<Self> {
        Ok(Self {
            tensor: CorrelationTensor::new(rho)?,
            coefs: f.coefficients(),
            bound: f.bound(),
        })
    }

    pub fn value(&self, angles: &[f64; 12]) -> f64 {
        let t = self.tensor.correlators_from_angles(angles);
        self.coefs.iter().zip(t.values()).map(|(c, v)| c * v).sum()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// One local run, reported as a maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartOutcome {
    pub value: f64,
    pub angles: [f64; 12],
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub value: f64,
    pub setting: MeasurementSetting,
    pub starts_converged: usize,
    pub violated: bool,
}

const HALTON_BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as f64;
    let (mut inv, mut out) = (1.0 / b, 0.0);
    while k > 0 {
        out += (k % base as u64) as f64 * inv;
        k /= base as u64;
        inv /= b;
    }
    out
}

/// Seed-dependent Cranley–Patterson shift of the Halton sequence.
fn halton_shift(seed: u64) -> [f64; 12] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    core::array::from_fn(|_| rng.random::<f64>())
}

/// The `k`-th quasi-random start in `[0, 2π)¹²`.
pub fn start_point(cfg: &OptimizerConfig, k: usize) -> [f64; 12] {
    let shift = halton_shift(cfg.seed);
    core::array::from_fn(|d| {
        let u = radical_inverse(k as u64 + 1, HALTON_BASES[d]) + shift[d];
        TAU * (u - u.floor())
    })
}

pub fn start_points(cfg: &OptimizerConfig) -> Vec<[f64; 12]> {
    let shift = halton_shift(cfg.seed);
    (0..cfg.starts)
        .map(|k| {
            core::array::from_fn(|d| {
                let u = radical_inverse(k as u64 + 1, HALTON_BASES[d]) + shift[d];
                TAU * (u - u.floor())
            })
        })
        .collect()
}

/// Initial simplex edge in radians.
const ANGLE_STEP: f64 = 0.6;

pub fn run_start(obj: &FacetObjective, start: &[f64; 12], cfg: &OptimizerConfig) -> StartOutcome {
    let r = nelder_mead(|x| -obj.value(x), *start, ANGLE_STEP, cfg.max_iterations, cfg.step_tol, cfg.f_tol);
    StartOutcome {
        value: -r.value,
        angles: r.x,
        converged: r.converged,
    }
}

/// Best outcome in iteration order; a later start wins only if strictly better.
pub fn reduce(outcomes: impl IntoIterator<Item = StartOutcome>, bound: f64) -> Result<OptResult> {
    let mut best: Option<StartOutcome> = None;
    let mut converged = 0;
    for o in outcomes {
        converged += o.converged as usize;
        if o.value.is_finite() && best.is_none_or(|b| o.value > b.value) {
            best = Some(o);
        }
    }
    let best = best.ok_or(Error::NonFinite("objective at every start"))?;
    Ok(OptResult {
        value: best.value,
        setting: MeasurementSetting::new(best.angles)?,
        starts_converged: converged,
        violated: best.value > bound + VIOLATION_MARGIN,
    })
}

/// Maximizes `f` on `rho` from the configured quasi-random starts.
pub fn maximize_facet(rho: &DensityMatrix, f: &FacetInequality, cfg: &OptimizerConfig) -> Result<OptResult> {
    maximize_with_starts(&FacetObjective::new(rho, f)?, &[], cfg)
}

/// As [`maximize_facet`], with `extra` starts (e.g. warm starts) tried first.
pub fn maximize_with_starts(obj: &FacetObjective, extra: &[[f64; 12]], cfg: &OptimizerConfig) -> Result<OptResult> {
    cfg.validate()?;
    let starts = extra.iter().copied().chain(start_points(cfg));
    reduce(starts.map(|s| run_start(obj, &s, cfg)), obj.bound())
}

/// A midpoint whose value falls outside the bracket's endpoint values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonMonotone {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    /// Midpoint of the final bracket.
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// True when the violating side is the upper end of the bracket.
    pub violating_above: bool,
    pub warnings: Vec<NonMonotone>,
}

/// Bisects `[lo, hi]` down to `width` for the point where `max_value(t)`
/// crosses `bound + margin`.
///
/// Exactly one endpoint must violate; either orientation is accepted.
pub fn violation_threshold(mut max_value: impl FnMut(f64) -> Result<f64>, bound: f64, lo: f64, hi: f64, width: f64) -> Result<Threshold> {
    if !(lo < hi) || !(width > 0.0) {
        return Err(Error::InvalidConfig("threshold bracket must satisfy lo < hi and width > 0"));
    }
    let violates = |v: f64| v > bound + VIOLATION_MARGIN;
    let (mut a, mut b) = (lo, hi);
    let (mut va, mut vb) = (max_value(a)?, max_value(b)?);
    if violates(va) == violates(vb) {
        return Err(Error::Bracket {
            lo,
            hi,
            value_lo: va,
            value_hi: vb,
        });
    }
    let violating_above = violates(vb);
    let mut warnings = Vec::new();
    while b - a > width {
        let m = 0.5 * (a + b);
        let vm = max_value(m)?;
        if vm < va.min(vb) || vm > va.max(vb) {
            warnings.push(NonMonotone { t: m, value: vm });
        }
        if violates(vm) == violates(va) {
            a = m;
            va = vm;
        } else {
            b = m;
            vb = vm;
        }
    }
    Ok(Threshold {
        value: 0.5 * (a + b),
        lo: a,
        hi: b,
        violating_above,
        warnings,
    })
}

/// Maximal runs of consecutive violating grid points, as `(first, last)`
/// grid values. The fallback when a single crossing cannot be assumed.
pub fn violation_intervals(mut max_value: impl FnMut(f64) -> Result<f64>, bound: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for &t in grid {
        if max_value(t)? > bound + VIOLATION_MARGIN {
            run = Some(run.map_or((t, t), |(s, _)| (s, t)));
        } else if let Some(r) = run.take() {
            out.push(r);
        }
    }
    out.extend(run);
    Ok(out)
}

/// Supremum of `objective(ε)` over `ε ∈ [0,1]³`: an `n³` grid, then a simplex
/// search clamped to the cube from the best grid point. `None` from the
/// objective marks an inadmissible filter (e.g. zero success probability).
pub fn sup_over_filters(mut objective: impl FnMut([f64; 3]) -> Option<f64>, n: usize, max_iterations: usize) -> Option<([f64; 3], f64)> {
    let n = n.max(2);
    let mut best: Option<([f64; 3], f64)> = None;
    let consider = |best: &mut Option<([f64; 3], f64)>, e: [f64; 3], v: Option<f64>| {
        if let Some(v) = v.filter(|v| v.is_finite()) {
            if best.is_none_or(|(_, b)| v > b) {
                *best = Some((e, v));
            }
        }
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let e = [i, j, k].map(|q| q as f64 / (n - 1) as f64);
                consider(&mut best, e, objective(e));
            }
        }
    }
    let clamp = |x: &[f64; 3]| x.map(|v| v.clamp(0.0, 1.0));
    // the maximum often sits on a curved ridge, so restart from the
    // incumbent with shrinking simplices until a pass stops helping
    let mut step = -0.5 / (n - 1) as f64;
    for _ in 0..4 {
        let (start, before) = best?;
        let r = nelder_mead(
            |x| objective(clamp(x)).map_or(f64::INFINITY, |v| -v),
            start,
            step,
            max_iterations,
            1e-10,
            1e-13,
        );
        consider(&mut best, clamp(&r.x), Some(-r.value));
        if best.is_some_and(|(_, b)| b - before <= 1e-12) {
            break;
        }
        step *= 0.25;
    }
    best
}
