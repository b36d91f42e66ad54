//! Absorbing Markov chain for the CSMA/ECA transient.
//!
//! Slots are grouped into steps of `C` slots and the chain state is the
//! number of stations that succeeded in the last step. From state `S_k`, the
//! `k` previously successful stations keep distinct slots of the next step
//! while the remaining `σ - k` stations each pick one of the `C` slots
//! uniformly at random. A deterministic station succeeds unless a random
//! station lands on its slot; a random station succeeds when it is alone in
//! an unreserved slot. `S_σ` is absorbing.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{solve, Matrix};
use crate::scalar::Scalar;

/// Largest number of placements `brute_force_row` agrees to enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Row-stochastic `(σ+1) x (σ+1)` matrix over success-count states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    pub sigma: usize,
    pub capacity: usize,
    pub probs: Matrix<T>,
}

/// Expected steps to absorption from every transient state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionResult<T> {
    /// `t[i]`: expected steps starting from `S_i`, for `i < σ`.
    pub steps: Vec<T>,
    /// `C * t[0]`, all stations joining at once.
    pub expected_slots: T,
}

fn check_row_args(k: usize, sigma: usize, capacity: usize) -> Result<()> {
    if sigma == 0 || capacity == 0 {
        return invalid("sigma and capacity must be positive");
    }
    if k > sigma || k > capacity {
        return invalid(format!("state S_{k} impossible with sigma={sigma}, C={capacity}"));
    }
    Ok(())
}

fn binomial<T: Scalar>(n: usize, r: usize) -> T {
    let r = r.min(n - r);
    let mut acc = T::one();
    for i in 0..r {
        acc = acc * T::from_count((n - i) as u64) / T::from_count((i + 1) as u64);
    }
    acc
}

/// Distribution of the number of successes in the next step, starting from `S_k`.
///
/// Slot-by-slot dynamic program over (random stations placed, successes), each
/// slot receiving `m` of the still unplaced random stations with weight
/// `binom(unplaced, m) / C^m`.
pub fn transition_row<T: Scalar>(k: usize, sigma: usize, capacity: usize) -> Result<Vec<T>> {
    check_row_args(k, sigma, capacity)?;
    let random = sigma - k;
    let inv_c = T::one() / T::from_count(capacity as u64);
    let mut inv_c_pow = vec![T::one()];
    for m in 1..=random {
        inv_c_pow.push(inv_c_pow[m - 1].clone() * inv_c.clone());
    }
    let choose: Vec<Vec<T>> = (0..=random).map(|n| (0..=n).map(|r| binomial(n, r)).collect()).collect();

    // dp[placed][successes]
    let mut dp = vec![vec![T::zero(); sigma + 1]; random + 1];
    dp[0][0] = T::one();
    for slot in 0..capacity {
        let reserved = slot < k;
        let mut next = vec![vec![T::zero(); sigma + 1]; random + 1];
        for placed in 0..=random {
            for succ in 0..=sigma {
                let w = &dp[placed][succ];
                if w.is_zero() {
                    continue;
                }
                let left = random - placed;
                for m in 0..=left {
                    let gained = match (reserved, m) {
                        (true, 0) | (false, 1) => 1,
                        _ => 0,
                    };
                    let weight = w.clone() * choose[left][m].clone() * inv_c_pow[m].clone();
                    let cell = &mut next[placed + m][succ + gained];
                    *cell = cell.clone() + weight;
                }
            }
        }
        dp = next;
    }
    Ok(dp.swap_remove(random))
}

/// Same distribution as [`transition_row`], by enumerating every placement.
pub fn brute_force_row<T: Scalar>(k: usize, sigma: usize, capacity: usize) -> Result<Vec<T>> {
    check_row_args(k, sigma, capacity)?;
    let random = sigma - k;
    let total = (capacity as u64)
        .checked_pow(random as u32)
        .filter(|&n| n <= BRUTE_FORCE_LIMIT)
        .ok_or_else(|| Error::TooLarge(format!("{capacity}^{random} placements")))?;

    let mut counts = vec![0u64; sigma + 1];
    let mut choice = vec![0usize; random];
    let mut occupancy = vec![0u32; capacity];
    for _ in 0..total {
        occupancy.iter_mut().for_each(|o| *o = 0);
        for &c in &choice {
            occupancy[c] += 1;
        }
        let det = occupancy[..k].iter().filter(|&&o| o == 0).count();
        let rnd = occupancy[k..].iter().filter(|&&o| o == 1).count();
        counts[det + rnd] += 1;
        // odometer
        for digit in choice.iter_mut() {
            *digit += 1;
            if *digit < capacity {
                break;
            }
            *digit = 0;
        }
    }
    let denom = T::from_count(total);
    Ok(counts.into_iter().map(|n| T::from_count(n) / denom.clone()).collect())
}

/// Full transition matrix; requires `σ ≤ C` so that `S_σ` is reachable.
pub fn build_matrix<T: Scalar>(sigma: usize, capacity: usize) -> Result<TransitionMatrix<T>> {
    if sigma == 0 {
        return invalid("sigma must be positive");
    }
    if sigma > capacity {
        return invalid(format!("sigma={sigma} exceeds capacity C={capacity}; absorption unreachable"));
    }
    let rows = (0..=sigma).map(|k| transition_row(k, sigma, capacity)).collect::<Result<Vec<_>>>()?;
    Ok(TransitionMatrix { sigma, capacity, probs: Matrix::from_rows(rows)? })
}

impl<T: Scalar> TransitionMatrix<T> {
    /// Transient block `Q` of the canonical form.
    pub fn transient_block(&self) -> Matrix<T> {
        self.probs.leading_block(self.sigma)
    }

    /// `N = (I - Q)^{-1}`.
    pub fn fundamental_matrix(&self) -> Result<Matrix<T>> {
        let n = self.sigma;
        let i_minus_q = Matrix::identity(n).sub(&self.transient_block());
        solve(&i_minus_q, &Matrix::identity(n))
    }

    /// Largest deviation of a row sum from one.
    pub fn max_row_defect(&self) -> T {
        (0..self.probs.rows())
            .map(|i| {
                let s = self.probs.row(i).iter().fold(T::zero(), |a, b| a + b.clone());
                (s - T::one()).abs()
            })
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// `P^n` by repeated squaring.
    pub fn power(&self, mut n: u32) -> Matrix<T> {
        let mut base = self.probs.clone();
        let mut acc = Matrix::identity(self.probs.rows());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }
}

/// Solves `(I - Q) t = 1` and scales the `S_0` entry by `C`.
pub fn expected_steps<T: Scalar>(p: &TransitionMatrix<T>) -> Result<AbsorptionResult<T>> {
    let n = p.sigma;
    let i_minus_q = Matrix::identity(n).sub(&p.transient_block());
    let ones = Matrix::from_rows(vec![vec![T::one()]; n])?;
    let t = solve(&i_minus_q, &ones).map_err(|e| match e {
        Error::Singular(m) => Error::Singular(format!("I - Q not invertible ({m}); matrix is not absorbing")),
        other => other,
    })?;
    let steps: Vec<T> = (0..n).map(|i| t[(i, 0)].clone()).collect();
    let expected_slots = steps[0].clone() * T::from_count(p.capacity as u64);
    Ok(AbsorptionResult { steps, expected_slots })
}

/// Expected slots to collision-free operation for `σ` stations joining at once.
pub fn expected_slots<T: Scalar>(sigma: usize, capacity: usize) -> Result<T> {
    Ok(expected_steps(&build_matrix::<T>(sigma, capacity)?)?.expected_slots)
}
