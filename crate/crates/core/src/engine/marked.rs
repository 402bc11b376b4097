//! Propagation with which-path records.
//!
//! Each marked arm carries a two-level record. Passing the arm keeps the
//! branch with weight `keep` and spawns a sibling with the arm's record
//! flipped, weight `flip`. Branches are keyed by the set of flipped records,
//! so branches with different keys never interfere again. With
//! `(keep, flip) = (η, ε)` this is a weakly coupled environment; with
//! `(0, 1)` it is an ideal nondemolition detector on the arm.

use std::collections::HashMap;

use num_complex::Complex;

use super::{scatter, ConcreteNetwork, EngineError};
use crate::scalar::{czero, Scalar};

/// Arms are recorded in a `u128` bit set.
pub const MAX_MARKED_ARMS: usize = 128;

/// Where a branch ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Loc {
    /// Detector or dump node.
    Terminal(usize),
    /// Absorbed in the shutter node.
    Absorbed(usize),
}

/// Final branches: `(location, flipped set) -> amplitude`.
#[derive(Clone, Debug)]
pub struct MarkedState<T = f64> {
    pub terms: HashMap<(Loc, u128), Complex<T>>,
}

impl<T: Scalar> MarkedState<T> {
    pub fn amp(&self, loc: Loc, set: u128) -> Complex<T> {
        self.terms.get(&(loc, set)).copied().unwrap_or_else(czero)
    }

    pub fn norm_sqr(&self) -> T {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }
}

type Branches<T> = Vec<(u128, Complex<T>)>;

fn merge<T: Scalar>(into: &mut HashMap<u128, Complex<T>>, set: u128, a: Complex<T>) {
    *into.entry(set).or_insert_with(czero) += a;
}

/// Propagate with records on the arms where `marks[arm]` is set. Branches
/// whose set would exceed `max_flips` are dropped.
pub fn marked_propagate<T: Scalar>(
    net: &ConcreteNetwork<T>,
    marks: &[Option<(T, T)>],
    max_flips: usize,
) -> Result<MarkedState<T>, EngineError> {
    if net.arms.len() > MAX_MARKED_ARMS && marks.iter().skip(MAX_MARKED_ARMS).any(|m| m.is_some()) {
        return Err(EngineError::TooManyArms(net.arms.len()));
    }
    let z = czero::<T>();
    let mut on_arm: Vec<Branches<T>> = vec![Vec::new(); net.arms.len()];
    let mut terms: HashMap<(Loc, u128), Complex<T>> = HashMap::new();

    for &i in &net.order {
        let node = &net.nodes[i];
        let mut by_set: HashMap<u128, [Complex<T>; 2]> = HashMap::new();
        for (port, slot) in node.inputs.iter().enumerate() {
            if let Some(k) = slot {
                for &(set, a) in &on_arm[*k] {
                    by_set.entry(set).or_insert([z, z])[port] += a;
                }
            }
        }
        if node.inputs.iter().all(|s| s.is_none()) {
            by_set.insert(0, [z, z]);
        }
        if node.op.is_terminal() {
            for (set, [a, _]) in by_set {
                *terms.entry((Loc::Terminal(i), set)).or_insert(z) += a;
            }
            continue;
        }
        let mut outs: [HashMap<u128, Complex<T>>; 2] = [HashMap::new(), HashMap::new()];
        for (set, [a, b]) in by_set {
            let (out, absorbed) = scatter(&node.op, a, b);
            if absorbed > T::zero() {
                // amplitude of the absorbed branch; its phase is irrelevant
                let amp = Complex::new(absorbed.sqrt(), T::zero());
                *terms.entry((Loc::Absorbed(i), set)).or_insert(z) += amp;
            }
            for p in 0..2 {
                if node.outputs[p].is_some() && out[p] != z {
                    merge(&mut outs[p], set, out[p]);
                }
            }
        }
        for p in 0..2 {
            let Some(k) = node.outputs[p] else { continue };
            let mut list = Vec::with_capacity(outs[p].len());
            match marks.get(k).copied().flatten() {
                None => list.extend(outs[p].drain()),
                Some((keep, flip)) => {
                    let bit = 1u128 << k;
                    let mut next: HashMap<u128, Complex<T>> = HashMap::new();
                    for (set, a) in outs[p].drain() {
                        if keep != T::zero() {
                            merge(&mut next, set, a * keep);
                        }
                        if (set.count_ones() as usize) < max_flips && flip != T::zero() {
                            merge(&mut next, set | bit, a * flip);
                        }
                    }
                    list.extend(next);
                }
            }
            list.sort_by_key(|x| x.0);
            on_arm[k] = list;
        }
    }
    Ok(MarkedState { terms })
}
