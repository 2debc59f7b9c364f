//! Reference implementations shared by the integration tests. Nothing here
//! calls into the planner: values come from a hand-rolled Gaussian
//! elimination and optimality from enumerating every deterministic policy.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type Matrix = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Plain-vector MDP: `t[a][s][s']`, `r[s][a]`.
#[derive(Debug, Clone)]
pub struct Model {
    pub t: Vec<Matrix>,
    pub r: Matrix,
    pub gamma: f64,
}

impl Model {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn na(&self) -> usize {
        self.t.len()
    }
}

/// Row drawn by normalizing uniforms, with roughly a third of the entries
/// forced to zero (at least one entry stays positive).
pub fn stochastic_row(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let keep = rng.random_range(0..n);
    let mut row: Vec<f64> = (0..n)
        .map(|j| {
            if j != keep && rng.random_bool(1.0 / 3.0) {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= total);
    row
}

pub fn random_model(rng: &mut impl Rng, n: usize, na: usize, gamma: f64) -> Model {
    let t = (0..na)
        .map(|_| (0..n).map(|_| stochastic_row(rng, n)).collect())
        .collect();
    let r = (0..n)
        .map(|_| (0..na).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Model { t, r, gamma }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Matrix, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Exact values of the deterministic policy `pi`.
pub fn evaluate(m: &Model, pi: &[usize]) -> Vec<f64> {
    let n = m.n();
    let a = (0..n)
        .map(|s| {
            (0..n)
                .map(|j| f64::from(u8::from(s == j)) - m.gamma * m.t[pi[s]][s][j])
                .collect()
        })
        .collect();
    let b = (0..n).map(|s| m.r[s][pi[s]]).collect();
    solve(a, b)
}

pub fn q_values(m: &Model, v: &[f64]) -> Matrix {
    (0..m.n())
        .map(|s| {
            (0..m.na())
                .map(|a| m.r[s][a] + m.gamma * (0..m.n()).map(|j| m.t[a][s][j] * v[j]).sum::<f64>())
                .collect()
        })
        .collect()
}

/// Every deterministic policy, in lexicographic order.
pub fn all_policies(n: usize, na: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..na).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Optimal values (state-wise maximum over all deterministic policies) and
/// the matching Q-function.
pub fn brute_force(m: &Model) -> (Vec<f64>, Matrix) {
    let mut best = vec![f64::NEG_INFINITY; m.n()];
    for pi in all_policies(m.n(), m.na()) {
        for (b, v) in best.iter_mut().zip(evaluate(m, &pi)) {
            *b = b.max(v);
        }
    }
    let q = q_values(m, &best);
    (best, q)
}

/// Best-minus-second-best action value at each state.
pub fn gaps(q: &Matrix) -> Vec<f64> {
    q.iter()
        .map(|row| {
            let mut sorted = row.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if sorted.len() < 2 {
                f64::INFINITY
            } else {
                sorted[0] - sorted[1]
            }
        })
        .collect()
}

pub fn argmax(row: &[f64]) -> usize {
    (0..row.len()).fold(0, |best, a| if row[a] > row[best] { a } else { best })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub mod convert {
    use super::{Matrix, Model};
    use batchreg::planning::PlanningProblem;
    use batchreg::TabularMdp;
    use nalgebra::{DMatrix, DVector};

    pub fn matrix(m: &Matrix) -> DMatrix<f64> {
        DMatrix::from_fn(m.len(), m[0].len(), |i, j| m[i][j])
    }

    pub fn rows(m: &DMatrix<f64>) -> Matrix {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    }

    pub fn problem(m: &Model) -> PlanningProblem {
        PlanningProblem::new(m.t.iter().map(matrix).collect(), matrix(&m.r), m.gamma).unwrap()
    }

    pub fn model(p: &PlanningProblem) -> Model {
        Model {
            t: p.transition.iter().map(rows).collect(),
            r: rows(&p.reward),
            gamma: p.gamma,
        }
    }

    pub fn mdp(m: &Model) -> TabularMdp {
        let n = m.n();
        TabularMdp::new(
            m.t.iter().map(matrix).collect(),
            matrix(&m.r),
            DMatrix::zeros(n, m.na()),
            m.gamma,
            DVector::from_element(n, 1.0 / n as f64),
            vec![],
        )
        .unwrap()
    }
}
