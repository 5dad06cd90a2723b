//! Three-parameter exponential decay fit, `y(n) = a·e^(−n/b) + c`.
//!
//! Levenberg–Marquardt on the Gauss–Newton normal equations with the
//! diagonal scaled damping `(JᵀJ + λ·diag(JᵀJ)) δ = Jᵀr`. A step is kept only
//! when it lowers the residual sum of squares and leaves `b > 0`; otherwise
//! the damping grows tenfold and the step is retried.

use alloc::vec::Vec;

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub amplitude: f64,
    pub decay: f64,
    pub offset: f64,
    pub rss: f64,
    pub iterations: usize,
    /// Constant input; the fit is `a = 0, b = 1, c = mean`.
    pub degenerate: bool,
}

impl DecayFit {
    pub fn eval(&self, n: f64) -> f64 {
        model(self.amplitude, self.decay, self.offset, n)
    }
}

#[inline]
fn model(a: f64, b: f64, c: f64, n: f64) -> f64 {
    a * libm::exp(-n / b) + c
}

fn rss(means: &[f64], a: f64, b: f64, c: f64) -> f64 {
    means
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let r = y - model(a, b, c, (i + 1) as f64);
            r * r
        })
        .sum()
}

/// Solves the 3×3 system `m·x = v` by Gaussian elimination with partial
/// pivoting. `None` when singular.
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| libm::fabs(m[i][col]).total_cmp(&libm::fabs(m[j][col])))?;
        if m[pivot][col] == 0.0 || !m[pivot][col].is_finite() {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = v[row];
        for k in row + 1..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x.iter().all(|x| x.is_finite()).then_some(x)
}

/// Fits per-trial means (trial `n = 1..N`), starting from
/// `a = y₁ − y_N`, `b = 1`, `c = y_N`.
pub fn fit_exp_decay(means: &[f64]) -> Result<DecayFit> {
    fit_exp_decay_traced(means, |_| {})
}

/// As [`fit_exp_decay`], reporting the RSS after every accepted step.
pub fn fit_exp_decay_traced(means: &[f64], mut on_accept: impl FnMut(f64)) -> Result<DecayFit> {
    if means.len() < 3 {
        return Err(Error::InvalidInput("exponential fit needs at least 3 points".into()));
    }
    if means.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidInput("exponential fit needs finite values".into()));
    }
    let first = means[0];
    if means.iter().all(|&y| y == first) {
        return Ok(DecayFit {
            amplitude: 0.0,
            decay: 1.0,
            offset: first,
            rss: 0.0,
            iterations: 0,
            degenerate: true,
        });
    }

    let last = means[means.len() - 1];
    let (mut a, mut b, mut c) = (first - last, 1.0, last);
    let mut cost = rss(means, a, b, c);
    let mut lambda = 1e-3;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS && cost > 0.0 {
        iterations += 1;
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (i, &y) in means.iter().enumerate() {
            let n = (i + 1) as f64;
            let e = libm::exp(-n / b);
            let r = y - (a * e + c);
            let j = [e, a * e * n / (b * b), 1.0];
            for p in 0..3 {
                jtr[p] += j[p] * r;
                for q in 0..3 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }

        let mut accepted = None;
        while lambda < 1e16 {
            let mut damped = jtj;
            for (p, row) in damped.iter_mut().enumerate() {
                row[p] += lambda * jtj[p][p].max(1e-300);
            }
            if let Some(step) = solve3(damped, jtr) {
                let (na, nb, nc) = (a + step[0], b + step[1], c + step[2]);
                if nb > 0.0 {
                    let new_cost = rss(means, na, nb, nc);
                    if new_cost.is_finite() && new_cost < cost {
                        accepted = Some((na, nb, nc, new_cost));
                        lambda = (lambda / 10.0).max(1e-12);
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }

        let Some((na, nb, nc, new_cost)) = accepted else {
            break;
        };
        let relative = (cost - new_cost) / cost;
        a = na;
        b = nb;
        c = nc;
        cost = new_cost;
        on_accept(cost);
        if relative < RELATIVE_TOLERANCE {
            break;
        }
    }

    Ok(DecayFit {
        amplitude: a,
        decay: b,
        offset: c,
        rss: cost,
        iterations,
        degenerate: false,
    })
}

/// Samples the model at `n = 1..=count`.
pub fn decay_series(amplitude: f64, decay: f64, offset: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|n| model(amplitude, decay, offset, n as f64)).collect()
}
