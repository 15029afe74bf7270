//! Exact Blotto best response against sampled opposing allocations.
//!
//! The target is `max_a sum_j v_j (1/K) sum_k [a_j >= h_jk]` subject to
//! `a >= 0`, `sum_j a_j = b`. Since the objective is a monotone step function
//! of each `a_j`, some optimum sits at a threshold vector drawn from
//! `{0} ∪ {h_jk}` per battlefield, with leftover budget dumped anywhere.

use crate::error::{Error, Result};

/// Objective value of allocation `a` against opposing maxima `h[j][k]`.
pub fn blotto_value(a: &[f64], h: &[Vec<f64>], values: &[f64]) -> f64 {
    h.iter()
        .zip(a)
        .zip(values)
        .map(|((hj, &aj), &vj)| {
            if hj.is_empty() {
                return 0.0;
            }
            let wins = hj.iter().filter(|&&x| aj >= x).count();
            vj * wins as f64 / hj.len() as f64
        })
        .sum()
}

/// Returns an optimal allocation and its value. `h[j]` holds the highest
/// opposing allocation on battlefield `j` in each of `K` sampled batches.
pub fn blotto_best_response_enum(h: &[Vec<f64>], budget: f64, values: &[f64]) -> Result<(Vec<f64>, f64)> {
    if budget < 0.0 || budget.is_nan() {
        return Err(Error::NegativeBudget(budget));
    }
    if values.len() != h.len() {
        return Err(Error::DimensionMismatch {
            what: "battlefield values",
            expected: h.len(),
            got: values.len(),
        });
    }
    let j_count = h.len();
    if j_count == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let thresholds: Vec<Vec<f64>> = h
        .iter()
        .map(|hj| {
            let mut t: Vec<f64> = std::iter::once(0.0).chain(hj.iter().map(|&x| x.max(0.0))).collect();
            t.sort_by(f64::total_cmp);
            t.dedup();
            t
        })
        .collect();

    let mut best = (vec![0.0; j_count], f64::NEG_INFINITY);
    let mut idx = vec![0usize; j_count];
    let mut alloc = vec![0.0; j_count];
    loop {
        for (j, &i) in idx.iter().enumerate() {
            alloc[j] = thresholds[j][i];
        }
        let spent: f64 = alloc.iter().sum();
        if spent <= budget {
            let mut a = alloc.clone();
            a[0] += budget - spent;
            let v = blotto_value(&a, h, values);
            if v > best.1 {
                best = (a, v);
            }
        }
        // Odometer increment; skip the rest of a digit once it overspends.
        let mut j = 0;
        loop {
            if j == j_count {
                return Ok(best);
            }
            idx[j] += 1;
            let over = idx[j] < thresholds[j].len() && {
                let partial: f64 = (0..j_count).map(|q| thresholds[q][if q == j { idx[j] } else { idx[q] }]).sum();
                partial > budget
            };
            if idx[j] < thresholds[j].len() && !over {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}
