//! Dense factors over discrete variables with arbitrary finite state counts.
//!
//! Values are stored row-major: the first scope variable is the most
//! significant position, the last one varies fastest.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != cards.len() {
            return Err(Error::usage(
                "factor scope and cardinalities differ in length",
            ));
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(Error::usage(format!(
                    "variable {v} appears twice in factor scope"
                )));
            }
        }
        if cards.contains(&0) {
            return Err(Error::usage("factor variable with zero states"));
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::usage(format!(
                "factor table has {} entries, scope requires {size}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::usage("factor values must be finite and nonnegative"));
        }
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    /// The constant factor over the empty scope.
    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value at a full assignment given as states in scope order.
    pub fn get(&self, states: &[usize]) -> f64 {
        self.values[self.offset(states)]
    }

    fn offset(&self, states: &[usize]) -> usize {
        states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![0; self.scope.len()];
        let mut stride = 1;
        for i in (0..self.scope.len()).rev() {
            strides[i] = stride;
            stride *= self.cards[i];
        }
        strides
    }

    /// Pointwise product over the ordered union of both scopes (`self`'s
    /// variables first, then the new ones from `other`).
    pub fn product(&self, other: &Factor) -> Result<Factor> {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.scope.iter().zip(&other.cards) {
            match self.scope.iter().position(|&s| s == v) {
                Some(i) if self.cards[i] != c => {
                    return Err(Error::usage(format!(
                        "variable {v} has {} states in one factor and {c} in the other",
                        self.cards[i]
                    )))
                }
                Some(_) => {}
                None => {
                    scope.push(v);
                    cards.push(c);
                }
            }
        }

        // Stride of each output position inside each input (0 when absent).
        let left_strides = self.strides();
        let right_strides = other.strides();
        let left_map: Vec<usize> = scope
            .iter()
            .map(|v| {
                self.scope
                    .iter()
                    .position(|s| s == v)
                    .map_or(0, |i| left_strides[i])
            })
            .collect();
        let right_map: Vec<usize> = scope
            .iter()
            .map(|v| {
                other
                    .scope
                    .iter()
                    .position(|s| s == v)
                    .map_or(0, |i| right_strides[i])
            })
            .collect();

        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut states = vec![0usize; scope.len()];
        let (mut li, mut ri) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[li] * other.values[ri]);
            // odometer increment, last position fastest
            for pos in (0..states.len()).rev() {
                states[pos] += 1;
                li += left_map[pos];
                ri += right_map[pos];
                if states[pos] < cards[pos] {
                    break;
                }
                li -= left_map[pos] * cards[pos];
                ri -= right_map[pos] * cards[pos];
                states[pos] = 0;
            }
        }
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    /// Marginalizes `var` out of the factor.
    pub fn sum_out(&self, var: usize) -> Result<Factor> {
        let pos =
            self.scope.iter().position(|&v| v == var).ok_or_else(|| {
                Error::usage(format!("variable {var} is not in the factor scope"))
            })?;
        let card = self.cards[pos];
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    /// Conditions on `var = state`, dropping `var` from the scope. Returns the
    /// factor unchanged if `var` is not in scope.
    pub fn restrict(&self, var: usize, state: usize) -> Result<Factor> {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return Ok(self.clone());
        };
        let card = self.cards[pos];
        if state >= card {
            return Err(Error::usage(format!(
                "state {state} out of range for variable {var}"
            )));
        }
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * card + state) * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    /// Same factor with its scope permuted into `order` (which must be a permutation of the scope).
    pub fn reorder(&self, order: &[usize]) -> Result<Factor> {
        if order.len() != self.scope.len() || order.iter().any(|v| !self.scope.contains(v)) {
            return Err(Error::usage(
                "reorder target is not a permutation of the scope",
            ));
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|v| self.scope.iter().position(|s| s == v).unwrap())
            .collect();
        let cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let size = self.values.len();
        let mut values = Vec::with_capacity(size);
        let mut states = vec![0usize; order.len()];
        let mut source = vec![0usize; order.len()];
        for _ in 0..size {
            for (i, &p) in positions.iter().enumerate() {
                source[p] = states[i];
            }
            values.push(self.get(&source));
            for pos in (0..states.len()).rev() {
                states[pos] += 1;
                if states[pos] < cards[pos] {
                    break;
                }
                states[pos] = 0;
            }
        }
        Ok(Factor {
            scope: order.to_vec(),
            cards,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: usize = 0;
    const B: usize = 1;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn pointwise_product_on_shared_scope() {
        let f1 = Factor::new(vec![A], vec![2], vec![0.7, 0.3]).unwrap();
        let f2 = Factor::new(vec![A], vec![2], vec![0.2, 0.9]).unwrap();
        let p = f1.product(&f2).unwrap();
        assert_eq!(p.scope(), &[A]);
        assert!(close(p.values(), &[0.14, 0.27]));
    }

    #[test]
    fn scalar_one_is_identity() {
        let f1 = Factor::new(vec![A], vec![2], vec![0.7, 0.3]).unwrap();
        assert_eq!(f1.product(&Factor::scalar(1.0)).unwrap(), f1);
        assert_eq!(Factor::scalar(1.0).product(&f1).unwrap(), f1);
    }

    #[test]
    fn outer_product_and_sum_out() {
        let f1 = Factor::new(vec![A], vec![2], vec![0.7, 0.3]).unwrap();
        let f2 = Factor::new(vec![B], vec![2], vec![0.2, 0.8]).unwrap();
        let p = f1.product(&f2).unwrap();
        assert_eq!(p.scope(), &[A, B]);
        // (A=L,B=L), (A=L,B=H), (A=H,B=L), (A=H,B=H)
        assert!(close(p.values(), &[0.14, 0.56, 0.06, 0.24]));

        let over_b = p.sum_out(A).unwrap();
        assert_eq!(over_b.scope(), &[B]);
        assert!(close(over_b.values(), &[0.2, 0.8]));

        let over_a = p.sum_out(B).unwrap();
        assert!(close(over_a.values(), &[0.7, 0.3]));

        let full = over_b.sum_out(B).unwrap();
        assert!(full.scope().is_empty());
        assert!((full.values()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sum_out_missing_variable_is_usage_error() {
        let f = Factor::new(vec![A], vec![2], vec![0.5, 0.5]).unwrap();
        assert!(f.sum_out(B).unwrap_err().is_usage());
    }

    #[test]
    fn mismatched_cardinality_is_rejected() {
        let f1 = Factor::new(vec![A], vec![2], vec![0.5, 0.5]).unwrap();
        let f2 = Factor::new(vec![A], vec![3], vec![0.2, 0.3, 0.5]).unwrap();
        assert!(f1.product(&f2).is_err());
        assert!(Factor::new(vec![A], vec![2], vec![-0.1, 1.0]).is_err());
        assert!(Factor::new(vec![A, A], vec![2, 2], vec![0.0; 4]).is_err());
    }

    #[test]
    fn restrict_selects_a_slice() {
        let f = Factor::new(vec![A, B], vec![2, 3], vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let r = f.restrict(A, 1).unwrap();
        assert_eq!(r.scope(), &[B]);
        assert_eq!(r.values(), &[4., 5., 6.]);
        let r = f.restrict(B, 2).unwrap();
        assert_eq!(r.values(), &[3., 6.]);
    }

    fn factor_strategy(vars: Vec<usize>) -> impl Strategy<Value = Factor> {
        // Cardinality of variable v is 2 + v % 2 so shared variables agree.
        let cards: Vec<usize> = vars.iter().map(|v| 2 + v % 2).collect();
        let size: usize = cards.iter().product();
        prop::collection::vec(0.0f64..1.0, size)
            .prop_map(move |values| Factor::new(vars.clone(), cards.clone(), values).unwrap())
    }

    fn scope_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::sample::subsequence(vec![0usize, 1, 2, 3], 0..=3).prop_shuffle()
    }

    fn arb_factor() -> impl Strategy<Value = Factor> {
        scope_strategy().prop_flat_map(factor_strategy)
    }

    fn assert_same(x: &Factor, y: &Factor) {
        let y = y.reorder(x.scope()).unwrap();
        assert!(
            x.values()
                .iter()
                .zip(y.values())
                .all(|(a, b)| (a - b).abs() <= 1e-12),
            "{x:?} vs {y:?}"
        );
    }

    proptest! {
        #[test]
        fn product_is_commutative(f in arb_factor(), g in arb_factor()) {
            assert_same(&f.product(&g).unwrap(), &g.product(&f).unwrap());
        }

        #[test]
        fn product_is_associative(f in arb_factor(), g in arb_factor(), h in arb_factor()) {
            let left = f.product(&g).unwrap().product(&h).unwrap();
            let right = f.product(&g.product(&h).unwrap()).unwrap();
            assert_same(&left, &right);
        }

        #[test]
        fn sum_outs_commute(f in arb_factor(), g in arb_factor()) {
            let p = f.product(&g).unwrap();
            if p.scope().len() >= 2 {
                let (x, y) = (p.scope()[0], p.scope()[p.scope().len() - 1]);
                let xy = p.sum_out(x).unwrap().sum_out(y).unwrap();
                let yx = p.sum_out(y).unwrap().sum_out(x).unwrap();
                assert_same(&xy, &yx);
            }
        }

        #[test]
        fn sum_out_preserves_total(f in arb_factor()) {
            if let Some(&v) = f.scope().first() {
                prop_assert!((f.sum_out(v).unwrap().total() - f.total()).abs() < 1e-12);
            }
        }
    }
}
