//! Explicit environment coupling.
//!
//! Every arm owns a two-level environment starting in `|χ⟩`. A photon
//! passing the arm maps it to `η|χ⟩ + ε|χ⊥⟩` with `η = √(1-ε²)`. The joint
//! state is a sum of terms `(where the photon ended, which environments
//! flipped)`. Terms flipping more than `K` environments are dropped; the
//! kept terms are exact because flips only accumulate.

use num_complex::Complex;

use crate::engine::{marked_propagate, ConcreteNetwork, EngineError, Loc};
use crate::scalar::{czero, Scalar};
use crate::tsvf::DARK_AMPLITUDE;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("coupling ε = {0} outside (0, 1)")]
    EpsilonRange(f64),
    #[error("truncation order must be at least 1")]
    Order,
    #[error("impossible post-selection: `{0}` is dark")]
    ImpossiblePostSelection(String),
    #[error("grid needs at least 3 values in (0, 0.05]")]
    Grid,
    #[error("quantity is exactly zero on the grid")]
    ExactZero,
    #[error("quantity vanishes on part of the grid")]
    PartialZero,
}

/// Coupling strength and truncation order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvModel<T = f64> {
    pub eps: T,
    pub eta: T,
    pub order: usize,
}

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 3;

impl<T: Scalar> EnvModel<T> {
    pub fn new(eps: T, order: usize) -> Result<Self, EnvError> {
        if !(eps > T::zero() && eps < T::one()) {
            return Err(EnvError::EpsilonRange(eps.as_f64()));
        }
        if order < 1 {
            return Err(EnvError::Order);
        }
        Ok(EnvModel { eps, eta: (T::one() - eps * eps).sqrt(), order })
    }
}

/// One branch of the joint photon and environment state.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<T = f64> {
    pub loc: Loc,
    /// Bit `k` set means the environment of arm `k` flipped.
    pub flips: u128,
    pub amp: Complex<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvState<T = f64> {
    pub model: EnvModel<T>,
    /// Sorted by location then flip set.
    pub terms: Vec<Term<T>>,
}

impl<T: Scalar> EnvState<T> {
    pub fn amp(&self, loc: Loc, flips: u128) -> Complex<T> {
        self.terms
            .binary_search_by(|t| (t.loc, t.flips).cmp(&(loc, flips)))
            .map(|i| self.terms[i].amp)
            .unwrap_or_else(|_| czero())
    }

    pub fn norm_sqr(&self) -> T {
        self.terms.iter().map(|t| t.amp.norm_sqr()).sum()
    }

    /// Terms ending at `loc`.
    pub fn at(&self, loc: Loc) -> impl Iterator<Item = &Term<T>> {
        self.terms.iter().filter(move |t| t.loc == loc)
    }
}

pub fn evolve_env<T: Scalar>(net: &ConcreteNetwork<T>, model: EnvModel<T>) -> Result<EnvState<T>, EnvError> {
    let marks = vec![Some((model.eta, model.eps)); net.arms.len()];
    let st = marked_propagate(net, &marks, model.order)?;
    let mut terms: Vec<Term<T>> = st
        .terms
        .into_iter()
        .filter(|(_, a)| *a != czero())
        .map(|((loc, flips), amp)| Term { loc, flips, amp })
        .collect();
    terms.sort_by_key(|a| (a.loc, a.flips));
    Ok(EnvState { model, terms })
}

fn reference<T: Scalar>(net: &ConcreteNetwork<T>, st: &EnvState<T>, detector: usize) -> Result<Complex<T>, EnvError> {
    let a0 = st.amp(Loc::Terminal(detector), 0);
    if a0.norm() < T::of(DARK_AMPLITUDE) {
        return Err(EnvError::ImpossiblePostSelection(net.nodes[detector].name.clone()));
    }
    Ok(a0)
}

fn arm_bits<T: Scalar>(net: &ConcreteNetwork<T>, arms: &[&str]) -> Result<u128, EnvError> {
    let mut set = 0u128;
    for a in arms {
        let k = net.arm_index(a).ok_or_else(|| EngineError::UnknownArm(a.to_string()))?;
        set |= 1u128 << k;
    }
    Ok(set)
}

/// Coefficient of the detector term with only `arm` flipped, relative to the
/// detector term with nothing flipped.
pub fn local_trace<T: Scalar>(
    net: &ConcreteNetwork<T>,
    st: &EnvState<T>,
    detector: &str,
    arm: &str,
) -> Result<Complex<T>, EnvError> {
    let d = net.detector(detector)?;
    let a0 = reference(net, st, d)?;
    Ok(st.amp(Loc::Terminal(d), arm_bits(net, &[arm])?) / a0)
}

/// Same as [`local_trace`] for the term with exactly two arms flipped.
pub fn joint_trace<T: Scalar>(
    net: &ConcreteNetwork<T>,
    st: &EnvState<T>,
    detector: &str,
    pair: (&str, &str),
) -> Result<Complex<T>, EnvError> {
    let d = net.detector(detector)?;
    let a0 = reference(net, st, d)?;
    Ok(st.amp(Loc::Terminal(d), arm_bits(net, &[pair.0, pair.1])?) / a0)
}

/// Largest relative detector term that flips at least one environment in
/// the region, with the flip set that attains it.
pub fn region_env_trace<T: Scalar>(
    net: &ConcreteNetwork<T>,
    st: &EnvState<T>,
    detector: &str,
    region: &[String],
) -> Result<(T, u128), EnvError> {
    let d = net.detector(detector)?;
    let a0 = reference(net, st, d)?;
    let sites = net.region(region)?;
    let mut mask = 0u128;
    for (k, arm) in net.arms.iter().enumerate() {
        if sites.contains(&arm.site) {
            mask |= 1u128 << k;
        }
    }
    let mut best = (T::zero(), 0u128);
    for t in st.at(Loc::Terminal(d)) {
        if t.flips & mask != 0 {
            let r = (t.amp / a0).norm();
            if r > best.0 {
                best = (r, t.flips);
            }
        }
    }
    Ok(best)
}

/// Names of the arms in a flip set.
pub fn flip_names<T: Scalar>(net: &ConcreteNetwork<T>, flips: u128) -> Vec<String> {
    (0..net.arms.len())
        .filter(|&k| flips & (1u128 << k) != 0)
        .map(|k| net.arms[k].name.clone())
        .collect()
}

/// Log-log least-squares slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderFit {
    pub exponent: f64,
    /// Root mean square of the fit residuals in `ln` units.
    pub residual: f64,
}

/// Magnitudes at or below this count as zero.
pub const ZERO_QUANTITY: f64 = 1e-300;

/// Fit `|q(ε)| ≈ c·ε^p` over the grid.
pub fn order_fit<F>(mut quantity: F, grid: &[f64]) -> Result<OrderFit, EnvError>
where
    F: FnMut(f64) -> Result<f64, EnvError>,
{
    if grid.len() < 3 || grid.iter().any(|&e| !(e > 0.0 && e <= 0.05)) {
        return Err(EnvError::Grid);
    }
    let mut pts = Vec::with_capacity(grid.len());
    let mut zeros = 0;
    for &e in grid {
        let q = quantity(e)?.abs();
        if q <= ZERO_QUANTITY {
            zeros += 1;
        } else {
            pts.push((e.ln(), q.ln()));
        }
    }
    if zeros == grid.len() {
        return Err(EnvError::ExactZero);
    }
    if zeros > 0 {
        return Err(EnvError::PartialZero);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Ok(OrderFit { exponent: slope, residual: (rss / n).sqrt() })
}

/// Default ε grid for order fits.
pub fn default_grid() -> Vec<f64> {
    vec![0.002, 0.004, 0.008, 0.016, 0.032]
}
