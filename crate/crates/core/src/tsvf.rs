//! Backward states, weak values and strong presence measurements.
//!
//! The backward state is seeded with unit amplitude at the post-selected
//! detector and carried through adjoint element actions. The weak value of
//! the projector on arm `s` is `w = conj(φ_s)·ψ_s / A`, with `A` the forward
//! amplitude at the detector. Over any cut of the arm graph the weak values
//! add up to one.

use num_complex::Complex;

use crate::engine::{
    marked_propagate, propagate, scatter_adjoint, ConcreteNetwork, EngineError, ForwardState, Loc,
};
use crate::scalar::{czero, Scalar};

/// Default presence threshold on `|w|`.
pub const PRESENCE_THRESHOLD: f64 = 1e-9;

/// Overlaps below this magnitude count as impossible post-selection.
pub const DARK_AMPLITUDE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TsvfError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("impossible post-selection: `{0}` is dark")]
    ImpossiblePostSelection(String),
    #[error("arm `{0}` listed twice")]
    RepeatedArm(String),
    #[error("region is empty")]
    EmptyRegion,
}

/// Backward amplitude per arm, seeded at one detector.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardState<T = f64> {
    pub amp: Vec<Complex<T>>,
    pub detector: usize,
}

/// Backward propagation without the dark-port check. Useful for transfer
/// amplitudes: `conj(φ_s)` is the amplitude for going from arm `s` to the
/// detector.
pub fn backward_unchecked<T: Scalar>(net: &ConcreteNetwork<T>, detector: usize) -> BackwardState<T> {
    let mut st = match net.nodes[detector].inputs[0] {
        Some(k) => backward_from_arm(net, k),
        None => BackwardState { amp: vec![czero(); net.arms.len()], detector },
    };
    st.detector = detector;
    st
}

/// Backward state seeded with unit amplitude on arm `seed`. The `detector`
/// field holds the node the arm feeds.
pub fn backward_from_arm<T: Scalar>(net: &ConcreteNetwork<T>, seed: usize) -> BackwardState<T> {
    let z = czero::<T>();
    let mut amp = vec![z; net.arms.len()];
    amp[seed] = Complex::new(T::one(), T::zero());
    let stop = net.arms[seed].to;
    for &i in net.order.iter().rev() {
        let node = &net.nodes[i];
        // Nodes downstream of the seed only ever see zeros; the consumer of
        // the seed itself must not overwrite it.
        if node.op.is_terminal() || i == stop {
            continue;
        }
        let c = node.outputs[0].map_or(z, |k| amp[k]);
        let d = node.outputs[1].map_or(z, |k| amp[k]);
        let back = scatter_adjoint(&node.op, c, d);
        for (slot, v) in node.inputs.iter().zip(back) {
            if let Some(k) = slot {
                amp[*k] = v;
            }
        }
    }
    BackwardState { amp, detector: stop }
}

/// Backward state for post-selection on `detector`.
pub fn backward<T: Scalar>(net: &ConcreteNetwork<T>, detector: &str) -> Result<BackwardState<T>, TsvfError> {
    let d = net.detector(detector)?;
    let fwd = propagate(net);
    if fwd.terminal[d].norm() < T::of(DARK_AMPLITUDE) {
        return Err(TsvfError::ImpossiblePostSelection(detector.to_string()));
    }
    Ok(backward_unchecked(net, d))
}

/// Per-arm weak values of the arm projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceMap<T = f64> {
    pub w: Vec<Complex<T>>,
    pub present: Vec<bool>,
    pub threshold: T,
    /// Largest `|w|` per site.
    pub site_max: Vec<T>,
    pub overlap: Complex<T>,
}

pub fn weak_values<T: Scalar>(
    net: &ConcreteNetwork<T>,
    fwd: &ForwardState<T>,
    bwd: &BackwardState<T>,
) -> Result<TraceMap<T>, TsvfError> {
    weak_values_with(net, fwd, bwd, T::of(PRESENCE_THRESHOLD))
}

pub fn weak_values_with<T: Scalar>(
    net: &ConcreteNetwork<T>,
    fwd: &ForwardState<T>,
    bwd: &BackwardState<T>,
    threshold: T,
) -> Result<TraceMap<T>, TsvfError> {
    let overlap = fwd.terminal[bwd.detector];
    if overlap.norm() < T::of(DARK_AMPLITUDE) {
        return Err(TsvfError::ImpossiblePostSelection(net.nodes[bwd.detector].name.clone()));
    }
    let w: Vec<Complex<T>> = fwd.amp.iter().zip(&bwd.amp).map(|(p, f)| f.conj() * p / overlap).collect();
    let present: Vec<bool> = w.iter().map(|x| x.norm() > threshold).collect();
    let mut site_max = vec![T::zero(); net.sites.len()];
    for (k, arm) in net.arms.iter().enumerate() {
        site_max[arm.site] = site_max[arm.site].max(w[k].norm());
    }
    Ok(TraceMap { w, present, threshold, site_max, overlap })
}

/// Forward, backward and weak values in one call.
pub fn trace_map<T: Scalar>(net: &ConcreteNetwork<T>, detector: &str) -> Result<TraceMap<T>, TsvfError> {
    let bwd = backward(net, detector)?;
    weak_values(net, &propagate(net), &bwd)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionVerdict<T = f64> {
    pub present: bool,
    pub max: T,
    /// Arms in the region with a trace.
    pub arms: Vec<String>,
}

pub fn region_trace<T: Scalar>(
    net: &ConcreteNetwork<T>,
    tm: &TraceMap<T>,
    region: &[String],
) -> Result<RegionVerdict<T>, TsvfError> {
    if region.is_empty() {
        return Err(TsvfError::EmptyRegion);
    }
    let sites = net.region(region)?;
    let mut max = T::zero();
    let mut arms = Vec::new();
    for (k, arm) in net.arms.iter().enumerate() {
        if sites.contains(&arm.site) {
            max = max.max(tm.w[k].norm());
            if tm.present[k] {
                arms.push(arm.name.clone());
            }
        }
    }
    Ok(RegionVerdict { present: !arms.is_empty(), max, arms })
}

/// Outcome of ideal measurements inserted on a list of arms.
#[derive(Clone, Debug, PartialEq)]
pub struct Presence<T = f64> {
    /// `(found on each listed arm, P(pattern | detector))`.
    pub patterns: Vec<(Vec<bool>, T)>,
    /// `P(found on at least one listed arm | detector)`.
    pub found_any: T,
    /// Unconditional probability that the detector clicks with the
    /// measurements in place.
    pub click: T,
}

/// Insert ideal nondemolition which-path measurements on `arms` and
/// condition on `detector`. Every arm is passed at most once, so each
/// pattern of found/not-found is its own branch; the branches do not
/// interfere.
pub fn presence_probability<T: Scalar>(
    net: &ConcreteNetwork<T>,
    arms: &[String],
    detector: &str,
) -> Result<Presence<T>, TsvfError> {
    let d = net.detector(detector)?;
    let mut idx = Vec::with_capacity(arms.len());
    for a in arms {
        let k = net.arm_index(a).ok_or_else(|| EngineError::UnknownArm(a.clone()))?;
        if idx.contains(&k) {
            return Err(TsvfError::RepeatedArm(a.clone()));
        }
        idx.push(k);
    }
    let mut marks = vec![None; net.arms.len()];
    for &k in &idx {
        marks[k] = Some((T::zero(), T::one()));
    }
    let st = marked_propagate(net, &marks, usize::MAX)?;
    let mut click = T::zero();
    let mut raw = Vec::new();
    for (&(loc, set), a) in &st.terms {
        if loc == Loc::Terminal(d) {
            let p = a.norm_sqr();
            click += p;
            raw.push((set, p));
        }
    }
    if click <= T::zero() {
        return Err(TsvfError::ImpossiblePostSelection(detector.to_string()));
    }
    raw.sort_by_key(|x| x.0);
    let mut patterns = Vec::with_capacity(raw.len());
    let mut found_any = T::zero();
    for (set, p) in raw {
        let pattern: Vec<bool> = idx.iter().map(|&k| set & (1u128 << k) != 0).collect();
        if set != 0 {
            found_any += p / click;
        }
        patterns.push((pattern, p / click));
    }
    Ok(Presence { patterns, found_any, click })
}
