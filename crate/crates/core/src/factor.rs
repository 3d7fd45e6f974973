//! Table factors and sum-product variable elimination.

use crate::dataset::Observation;
use crate::network::DiscreteNetwork;
use crate::scalar::Scalar;

/// A non-negative table over a sorted set of variables.
///
/// Values are row-major with the first (lowest-index) variable most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor<T> {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<T>,
}

fn strides_for(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    let mut acc = 1;
    for (s, &c) in strides.iter_mut().zip(cards).rev() {
        *s = acc;
        acc *= c;
    }
    strides
}

/// Advances a mixed-radix counter (last digit fastest); returns false after wrapping.
fn advance(states: &mut [usize], cards: &[usize]) -> bool {
    for pos in (0..states.len()).rev() {
        states[pos] += 1;
        if states[pos] < cards[pos] {
            return true;
        }
        states[pos] = 0;
    }
    false
}

impl<T: Scalar> Factor<T> {
    pub fn scalar(value: T) -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// CPT of node `i` with every observed variable in its family fixed to its value.
    pub fn from_cpt(net: &DiscreteNetwork<T>, i: usize, evidence: &[Observation]) -> Self {
        let s = net.structure();
        let mut family: Vec<usize> = s.parents(i).to_vec();
        family.push(i);
        let mut vars: Vec<usize> = family
            .iter()
            .copied()
            .filter(|&v| evidence[v].is_none())
            .collect();
        vars.sort_unstable();
        let cards: Vec<usize> = vars.iter().map(|&v| s.cardinality(v)).collect();
        let size: usize = cards.iter().product();
        let mut full: Vec<usize> = evidence.iter().map(|o| o.unwrap_or(0)).collect();
        let mut local = vec![0usize; vars.len()];
        let mut values = Vec::with_capacity(size);
        for _ in 0..size {
            for (&v, &st) in vars.iter().zip(&local) {
                full[v] = st;
            }
            let k = s.parent_config(i, &full);
            values.push(net.prob(i, full[i], k));
            advance(&mut local, &cards);
        }
        Factor { vars, cards, values }
    }

    pub fn product(&self, other: &Factor<T>) -> Factor<T> {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.card_of(*v)
                    .or_else(|| other.card_of(*v))
                    .expect("variable belongs to one operand")
            })
            .collect();
        let map_strides = |f: &Factor<T>| -> Vec<usize> {
            let own = strides_for(&f.cards);
            vars.iter()
                .map(|v| f.vars.iter().position(|u| u == v).map_or(0, |p| own[p]))
                .collect()
        };
        let sa = map_strides(self);
        let sb = map_strides(other);
        let size: usize = cards.iter().product();
        let mut states = vec![0usize; vars.len()];
        let mut values = Vec::with_capacity(size);
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            // incremental index update mirrors `advance`
            for pos in (0..states.len()).rev() {
                states[pos] += 1;
                ia += sa[pos];
                ib += sb[pos];
                if states[pos] < cards[pos] {
                    break;
                }
                ia -= sa[pos] * cards[pos];
                ib -= sb[pos] * cards[pos];
                states[pos] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn sum_out(&self, var: usize) -> Factor<T> {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let strides = strides_for(&self.cards);
        let card = self.cards[pos];
        let stride = strides[pos];
        let outer = self.values.len() / (card * stride);
        let mut values = Vec::with_capacity(outer * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * card * stride + inner;
                values.push((0..card).map(|c| self.values[base + c * stride]).sum());
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, values }
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Value at an assignment given over the full variable index space.
    pub fn value_at(&self, full: &[usize]) -> T {
        let strides = strides_for(&self.cards);
        let idx: usize = self
            .vars
            .iter()
            .zip(&strides)
            .map(|(&v, &s)| full[v] * s)
            .sum();
        self.values[idx]
    }

    fn card_of(&self, var: usize) -> Option<usize> {
        self.vars
            .iter()
            .position(|&v| v == var)
            .map(|p| self.cards[p])
    }
}

/// Sums out `hidden` from the product of `factors`, greedily picking the
/// variable whose elimination creates the smallest intermediate table.
/// Returns the product of what remains.
pub fn eliminate<T: Scalar>(mut factors: Vec<Factor<T>>, hidden: &[usize]) -> Factor<T> {
    let mut pending: Vec<usize> = hidden.to_vec();
    while !pending.is_empty() {
        let (best, _) = pending
            .iter()
            .enumerate()
            .map(|(slot, &v)| {
                let mut scope: Vec<(usize, usize)> = factors
                    .iter()
                    .filter(|f| f.vars.contains(&v))
                    .flat_map(|f| f.vars.iter().copied().zip(f.cards.iter().copied()))
                    .collect();
                scope.sort_unstable();
                scope.dedup();
                let cost: u128 = scope.iter().map(|&(_, c)| c as u128).product();
                (slot, cost)
            })
            .min_by_key(|&(slot, cost)| (cost, pending[slot]))
            .expect("pending is non-empty");
        let var = pending.swap_remove(best);
        let (touching, rest): (Vec<_>, Vec<_>) =
            factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = rest;
        if let Some(joined) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(joined.sum_out(var));
        }
    }
    factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or_else(|| Factor::scalar(T::one()))
}
