//! Phase tuning.
//!
//! Free parameters are solved so that the declared dark constraints hold:
//! every listed terminal or arm has zero amplitude under its configuration.
//! The solver is Levenberg-Marquardt on the stacked real and imaginary parts
//! of the constrained amplitudes, restarted from seeded random points.
//!
//! Damping schedule: start at `λ = 1e-3`, solve
//! `(JᵀJ + λ·diag(JᵀJ) + λ·1e-9·I) δ = -Jᵀr`; accept the step and divide
//! `λ` by 3 if the cost drops, otherwise multiply `λ` by 4. A start ends when
//! the residual norm falls below `tol / 10`, the step stalls, or
//! `max_iter` is reached.
//!
//! Phase derivatives are analytic: a phase `θ` on the output arm `k` of an
//! element contributes `i·ψ_k·t_k` to the derivative of the target amplitude,
//! with `t_k` the transfer amplitude from arm `k` to the target. Ratio
//! parameters are searched in log space with central differences.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{propagate, ConcreteNetwork};
use crate::netlist::{Kind, NetlistError, Network, Value};
use crate::tsvf::backward_from_arm;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TunerError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("no dark constraints declared")]
    NoConstraints,
    #[error("no free parameters to tune")]
    NoFreeParams,
    #[error("`{0}` is a ratio parameter; free ratios must be enabled")]
    RatioNotFreed(String),
    #[error("dark target `{0}` is neither a terminal nor an arm")]
    UnknownTarget(String),
    #[error("assignment is missing `{0}`")]
    MissingParam(String),
    #[error("`{name}` = {value} is out of bounds")]
    OutOfBounds { name: String, value: f64 },
    #[error("constraint unsatisfiable: best residual norm {best:.3e} after {starts} starts")]
    Unsatisfiable { best: f64, starts: usize, assignment: Vec<(String, f64)> },
    #[error("tolerance must be positive")]
    Tolerance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    /// Radians in `[0, 2π)`.
    Phase,
    /// A positive ratio component.
    Ratio,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeParam {
    pub name: String,
    pub kind: ParamKind,
}

/// One dark target under one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub config: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    pub params: Vec<FreeParam>,
}

fn is_ratio_param(net: &Network, name: &str) -> bool {
    let uses = |v: &Value| matches!(v, Value::Param(p) if p == name);
    net.elements.iter().any(|e| matches!(&e.kind, Kind::BeamSplitter { m, n, .. } if uses(m) || uses(n)))
        || net.configs.iter().flat_map(|c| &c.settings).any(|s| {
            s.key == "ratio" && matches!(&s.value, crate::netlist::SettingValue::Ratio(m, n) if uses(m) || uses(n))
        })
}

impl ConstraintSet {
    /// Constraints from the network's `dark` declarations over its unvalued
    /// parameters.
    pub fn from_network(net: &Network, free_ratios: bool) -> Result<Self, TunerError> {
        let constraints: Vec<Constraint> = net
            .darks
            .iter()
            .flat_map(|d| d.targets.iter().map(|t| Constraint { config: d.config.clone(), target: t.clone() }))
            .collect();
        let mut params = Vec::new();
        for name in net.free_params() {
            let kind = if is_ratio_param(net, &name) { ParamKind::Ratio } else { ParamKind::Phase };
            if kind == ParamKind::Ratio && !free_ratios {
                return Err(TunerError::RatioNotFreed(name));
            }
            params.push(FreeParam { name, kind });
        }
        let cs = ConstraintSet { constraints, params };
        cs.check(net)?;
        Ok(cs)
    }

    fn check(&self, net: &Network) -> Result<(), TunerError> {
        if self.constraints.is_empty() {
            return Err(TunerError::NoConstraints);
        }
        if self.params.is_empty() {
            return Err(TunerError::NoFreeParams);
        }
        for c in &self.constraints {
            if net.config(&c.config).is_none() {
                return Err(NetlistError::UnknownConfig(c.config.clone()).into());
            }
            let terminal = net.element(&c.target).is_some_and(|e| e.kind.is_terminal());
            if !terminal && net.arm(&c.target).is_none() {
                return Err(TunerError::UnknownTarget(c.target.clone()));
            }
        }
        Ok(())
    }
}

/// Arm whose amplitude a target refers to: the arm itself, or the arm
/// feeding a terminal.
fn target_arm(net: &ConcreteNetwork, target: &str) -> Result<usize, TunerError> {
    if let Some(k) = net.arm_index(target) {
        return Ok(k);
    }
    net.node_index(target)
        .and_then(|i| net.nodes[i].inputs[0])
        .ok_or_else(|| TunerError::UnknownTarget(target.to_string()))
}

fn bind(net: &Network, cs: &ConstraintSet, x: &[f64]) -> Result<Network, TunerError> {
    let vals: Vec<(String, f64)> = cs.params.iter().zip(x).map(|(p, v)| (p.name.clone(), *v)).collect();
    Ok(net.with_params(&vals)?)
}

fn amplitudes(net: &Network, cs: &ConstraintSet, x: &[f64]) -> Result<Vec<Complex64>, TunerError> {
    let bound = bind(net, cs, x)?;
    let mut out = Vec::with_capacity(cs.constraints.len());
    let mut cache: Vec<(&str, ConcreteNetwork, Vec<Complex64>)> = Vec::new();
    for c in &cs.constraints {
        if !cache.iter().any(|e| e.0 == c.config) {
            let cn: ConcreteNetwork = bound.apply_config(&c.config)?;
            let amp = propagate(&cn).amp;
            cache.push((&c.config, cn, amp));
        }
        let (_, cn, amp) = cache.iter().find(|e| e.0 == c.config).unwrap();
        out.push(amp[target_arm(cn, &c.target)?]);
    }
    Ok(out)
}

/// Amplitudes at the constrained targets for a full assignment, in
/// constraint order.
pub fn residual(net: &Network, cs: &ConstraintSet, assignment: &[(String, f64)]) -> Result<Vec<Complex64>, TunerError> {
    let mut x = Vec::with_capacity(cs.params.len());
    for p in &cs.params {
        let v = assignment
            .iter()
            .find(|(n, _)| n == &p.name)
            .map(|(_, v)| *v)
            .ok_or_else(|| TunerError::MissingParam(p.name.clone()))?;
        let ok = match p.kind {
            ParamKind::Phase => (0.0..TAU).contains(&v),
            ParamKind::Ratio => v > 0.0 && v.is_finite(),
        };
        if !ok {
            return Err(TunerError::OutOfBounds { name: p.name.clone(), value: v });
        }
        x.push(v);
    }
    amplitudes(net, cs, &x)
}

/// Derivatives of the constrained amplitudes: one column per free
/// parameter, taken with respect to the phase in radians or the ratio
/// component itself.
pub fn jacobian(net: &Network, cs: &ConstraintSet, x: &[f64]) -> Result<Vec<Vec<Complex64>>, TunerError> {
    let bound = bind(net, cs, x)?;
    let i = Complex64::i();
    let mut cols = vec![vec![Complex64::default(); cs.constraints.len()]; cs.params.len()];
    for (row, c) in cs.constraints.iter().enumerate() {
        let cn: ConcreteNetwork = bound.apply_config(&c.config)?;
        let psi = propagate(&cn).amp;
        let phi = backward_from_arm(&cn, target_arm(&cn, &c.target)?).amp;
        for (j, p) in cs.params.iter().enumerate() {
            if p.kind != ParamKind::Phase {
                continue;
            }
            let mut d = Complex64::default();
            for name in bound.phase_users(Some(&c.config), &p.name)? {
                let node = &cn.nodes[cn.node_index(&name).unwrap()];
                if let Some(k) = node.outputs[0] {
                    d += i * psi[k] * phi[k].conj();
                }
            }
            cols[j][row] = d;
        }
    }
    for (j, p) in cs.params.iter().enumerate() {
        if p.kind == ParamKind::Ratio {
            let h = 1e-6 * x[j].abs().max(1e-3);
            let (mut lo, mut hi) = (x.to_vec(), x.to_vec());
            lo[j] -= h;
            hi[j] += h;
            let (a, b) = (amplitudes(net, cs, &lo)?, amplitudes(net, cs, &hi)?);
            cols[j] = a.iter().zip(&b).map(|(a, b)| (b - a) / (2.0 * h)).collect();
        }
    }
    Ok(cols)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneOptions {
    pub tol: f64,
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Tried as start 0 when given.
    pub init: Option<Vec<(String, f64)>>,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions { tol: 1e-10, starts: 16, seed: 0, max_iter: 200, init: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub assignment: Vec<(String, f64)>,
    /// Euclidean norm of the constrained amplitudes.
    pub residual: f64,
    /// Index of the start that produced it.
    pub start: usize,
    pub iterations: usize,
}

impl Solution {
    /// The network with the solved values written into its parameters.
    pub fn apply(&self, net: &Network) -> Result<Network, NetlistError> {
        net.with_params(&self.assignment)
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

// Search coordinates: phases as is, ratios as their logarithm.
fn to_value(cs: &ConstraintSet, u: &[f64]) -> Vec<f64> {
    cs.params
        .iter()
        .zip(u)
        .map(|(p, &v)| if p.kind == ParamKind::Ratio { v.exp() } else { v })
        .collect()
}

fn stack(amps: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * amps.len(), amps.iter().flat_map(|a| [a.re, a.im]))
}

fn levenberg(net: &Network, cs: &ConstraintSet, mut u: Vec<f64>, opts: &TuneOptions) -> Result<(Vec<f64>, f64, usize), TunerError> {
    let mut r = amplitudes(net, cs, &to_value(cs, &u))?;
    let mut cost = norm(&r);
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < opts.max_iter && cost >= opts.tol / 10.0 {
        it += 1;
        let x = to_value(cs, &u);
        let cols = jacobian(net, cs, &x)?;
        let p = cs.params.len();
        let mut jm = DMatrix::<f64>::zeros(2 * r.len(), p);
        for (j, col) in cols.iter().enumerate() {
            // chain rule for log-space ratios
            let scale = if cs.params[j].kind == ParamKind::Ratio { x[j] } else { 1.0 };
            for (row, a) in col.iter().enumerate() {
                jm[(2 * row, j)] = a.re * scale;
                jm[(2 * row + 1, j)] = a.im * scale;
            }
        }
        let g = jm.transpose() * stack(&r);
        let h = jm.transpose() * &jm;
        let mut moved = false;
        while lambda < 1e12 {
            let mut a = h.clone();
            for k in 0..p {
                a[(k, k)] += lambda * h[(k, k)] + lambda * 1e-9;
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = amplitudes(net, cs, &to_value(cs, &trial))?;
            let ct = norm(&rt);
            if ct < cost {
                let small = step.norm() < 1e-15 * (1.0 + DVector::from_vec(u.clone()).norm());
                u = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-15);
                moved = !small;
                break;
            }
            lambda *= 4.0;
        }
        if !moved {
            break;
        }
    }
    Ok((u, cost, it))
}

fn wrap(cs: &ConstraintSet, x: &[f64]) -> Vec<f64> {
    cs.params
        .iter()
        .zip(x)
        .map(|(p, &v)| if p.kind == ParamKind::Phase { v.rem_euclid(TAU) % TAU + 0.0 } else { v })
        .collect()
}

/// Multistart damped least squares. Starts are drawn from a ChaCha stream
/// seeded with `opts.seed`; the best start wins, ties going to the lower
/// index.
pub fn solve(net: &Network, cs: &ConstraintSet, opts: &TuneOptions) -> Result<Solution, TunerError> {
    if !(opts.tol > 0.0) {
        return Err(TunerError::Tolerance);
    }
    cs.check(net)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Solution> = None;
    let starts = opts.starts.max(1);
    for s in 0..starts {
        let mut u: Vec<f64> = cs
            .params
            .iter()
            .map(|p| match p.kind {
                ParamKind::Phase => rng.random_range(0.0..TAU),
                ParamKind::Ratio => rng.random_range(-4.6..4.6),
            })
            .collect();
        if s == 0 {
            if let Some(init) = &opts.init {
                for (p, slot) in cs.params.iter().zip(u.iter_mut()) {
                    if let Some((_, v)) = init.iter().find(|(n, _)| n == &p.name) {
                        *slot = if p.kind == ParamKind::Ratio { v.ln() } else { *v };
                    }
                }
            }
        }
        let (u, _, iterations) = levenberg(net, cs, u, opts)?;
        let x = wrap(cs, &to_value(cs, &u));
        let residual = norm(&amplitudes(net, cs, &x)?);
        let assignment = cs.params.iter().map(|p| p.name.clone()).zip(x).collect();
        let cand = Solution { assignment, residual, start: s, iterations };
        if best.as_ref().is_none_or(|b| cand.residual < b.residual) {
            best = Some(cand);
        }
    }
    let best = best.unwrap();
    if best.residual < opts.tol {
        Ok(best)
    } else {
        Err(TunerError::Unsatisfiable { best: best.residual, starts, assignment: best.assignment })
    }
}

/// Tune the network's own `dark` declarations and return it with the
/// solved parameters filled in.
pub fn tune(net: &Network, free_ratios: bool, opts: &TuneOptions) -> Result<(Network, Solution), TunerError> {
    let cs = ConstraintSet::from_network(net, free_ratios)?;
    let sol = solve(net, &cs, opts)?;
    Ok((sol.apply(net)?, sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MZI: &str = "network m\nsite L\nparam phi\nelem S : source @ L\nelem X : bs(ratio=1:1) @ L\n\
        elem P : phase(phi) @ L\nelem Y : bs(ratio=1:1) @ L\nelem DL : detector @ L\nelem DR : detector @ L\n\
        arm i : S.c -> X.a @ L\narm A : X.c -> P.a @ L\narm A2 : P.c -> Y.a @ L\narm B : X.d -> Y.b @ L\n\
        arm l : Y.c -> DL.a @ L\narm r : Y.d -> DR.a @ L\nconfig base { }\ndark base : DL\n";

    #[test]
    fn balanced_mzi_residual_is_half_of_one_minus_phase() {
        let net = Network::parse(MZI).unwrap();
        let cs = ConstraintSet::from_network(&net, false).unwrap();
        let r0 = residual(&net, &cs, &[("phi".into(), 0.0)]).unwrap();
        let rpi = residual(&net, &cs, &[("phi".into(), std::f64::consts::PI)]).unwrap();
        assert!(r0[0].norm() < 1e-15);
        assert!((rpi[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_phase_is_rejected() {
        let net = Network::parse(MZI).unwrap();
        let cs = ConstraintSet::from_network(&net, false).unwrap();
        assert!(matches!(residual(&net, &cs, &[("phi".into(), 7.0)]), Err(TunerError::OutOfBounds { .. })));
    }

    #[test]
    fn balanced_mzi_solves_to_zero_phase() {
        let net = Network::parse(MZI).unwrap();
        let (_, sol) = tune(&net, false, &TuneOptions::default()).unwrap();
        let phi = sol.assignment[0].1;
        assert!(phi.min(TAU - phi) < 1e-9, "phi = {phi}");
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn unequal_arms_cannot_cancel() {
        let text = MZI.replace("elem X : bs(ratio=1:1)", "elem X : bs(ratio=1:2)");
        let net = Network::parse(&text).unwrap();
        let err = tune(&net, false, &TuneOptions::default()).unwrap_err();
        let TunerError::Unsatisfiable { best, .. } = err else { panic!("{err:?}") };
        // |√(1/3) - √(2/3)| / √2
        let floor = ((2.0f64 / 3.0).sqrt() - (1.0f64 / 3.0).sqrt()) / 2.0f64.sqrt();
        assert!((best - floor).abs() < 1e-9, "{best} vs {floor}");
    }
}
