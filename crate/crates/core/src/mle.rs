//! Reciprocal maximum likelihood: maximize `log det Sigma - tr(S^{-1} Sigma)`
//! over positive-definite `Sigma` in the tree's covariance space.
//!
//! Parameters are one value `t_v` per non-root vertex, stored in vertex order
//! `1, 2, ...`, with `sigma_ij = t_{lca(i,j)}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::MleError;
use crate::model::{design_a, p_coords_f64, CovariancePattern};
use crate::tree::RootedTree;

type Mat = Vec<Vec<f64>>;

/// Lower Cholesky factor, or `None` unless `a` is positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Mat> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let dj = libm::sqrt(d);
        l[j][j] = dj;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / dj;
        }
    }
    Some(l)
}

fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i][k] * y[k];
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k][i] * y[k];
        }
        y[i] /= l[i][i];
    }
    y
}

fn chol_inverse(l: &[Vec<f64>]) -> Mat {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = chol_solve(l, &e);
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = m;
            inv[j][i] = m;
        }
    }
    inv
}

fn chol_logdet(l: &[Vec<f64>]) -> f64 {
    2.0 * l.iter().enumerate().map(|(i, r)| libm::log(r[i])).sum::<f64>()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Validated sample covariance with its cached inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleCovariance {
    s: Mat,
    s_inv: Mat,
}

impl SampleCovariance {
    /// Accepts matrices symmetric to `1e-12` relative; the stored copy is
    /// exactly symmetrized.
    pub fn new(s: Vec<Vec<f64>>) -> Result<Self, MleError> {
        let n = s.len();
        for row in &s {
            if row.len() != n {
                return Err(MleError::Shape { expected: n, found: row.len() });
            }
        }
        let scale = s.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut sym = s;
        for i in 0..n {
            for j in 0..i {
                if !((sym[i][j] - sym[j][i]).abs() <= 1e-12 * scale) {
                    return Err(MleError::NotSymmetric);
                }
                let m = 0.5 * (sym[i][j] + sym[j][i]);
                sym[i][j] = m;
                sym[j][i] = m;
            }
        }
        let l = cholesky(&sym).ok_or(MleError::NotPositiveDefinite)?;
        let s_inv = chol_inverse(&l);
        Ok(SampleCovariance { s: sym, s_inv })
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn s(&self) -> &[Vec<f64>] {
        &self.s
    }

    pub fn s_inv(&self) -> &[Vec<f64>] {
        &self.s_inv
    }
}

/// Result of [`newton_fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFit {
    /// One parameter per non-root vertex, in vertex order.
    pub t: Vec<f64>,
    pub sigma: Mat,
    pub k: Mat,
    pub objective: f64,
    /// Gradient infinity norm at `t`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

fn check_dims(t: &RootedTree, params: &[f64], s: &SampleCovariance) -> Result<(), MleError> {
    if s.dim() != t.n() {
        return Err(MleError::DimensionMismatch { expected: t.n(), found: s.dim() });
    }
    let m = t.num_vertices() - 1;
    if params.len() != m {
        return Err(MleError::ParamLength { expected: m, found: params.len() });
    }
    Ok(())
}

struct Eval {
    value: f64,
    grad: Vec<f64>,
    k: Mat,
    sigma: Mat,
}

fn evaluate(pat: &CovariancePattern, params: &[f64], s: &SampleCovariance) -> Result<Eval, MleError> {
    let n = pat.dim();
    let sigma = pat.sigma(params);
    let l = cholesky(&sigma).ok_or(MleError::NotPositiveDefinite)?;
    let k = chol_inverse(&l);
    let w = s.s_inv();
    let mut tr = 0.0;
    let mut grad = vec![0.0; params.len()];
    for i in 0..n {
        for j in 0..n {
            tr += w[i][j] * sigma[j][i];
            grad[pat.class_of(i + 1, j + 1) - 1] += k[i][j] - w[i][j];
        }
    }
    Ok(Eval { value: chol_logdet(&l) - tr, grad, k, sigma })
}

/// Objective value and its gradient `tr((Sigma^{-1} - S^{-1}) E_v)`.
pub fn rloglik_and_grad(t: &RootedTree, params: &[f64], s: &SampleCovariance) -> Result<(f64, Vec<f64>), MleError> {
    check_dims(t, params, s)?;
    let e = evaluate(&CovariancePattern::new(t), params, s)?;
    Ok((e.value, e.grad))
}

/// Negated Hessian `tr(K E_v K E_w)`, positive definite on the PD cone.
fn neg_hessian(pat: &CovariancePattern, k: &[Vec<f64>], m: usize) -> Mat {
    let n = pat.dim();
    // (K E_v)_{ij} = sum_{c in class v, row j} K_{i c}
    let mut ke = vec![vec![vec![0.0; n]; n]; m];
    for i in 0..n {
        for c in 0..n {
            for j in 0..n {
                ke[pat.class_of(c + 1, j + 1) - 1][i][j] += k[i][c];
            }
        }
    }
    let mut h = vec![vec![0.0; m]; m];
    for v in 0..m {
        for w in v..m {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += ke[v][i][j] * ke[w][j][i];
                }
            }
            h[v][w] = acc;
            h[w][v] = acc;
        }
    }
    h
}

/// Average of `S` over each lca class.
pub fn projected_init(t: &RootedTree, s: &SampleCovariance) -> Vec<f64> {
    let pat = CovariancePattern::new(t);
    let n = t.n();
    let m = t.num_vertices() - 1;
    let mut sum = vec![0.0; m];
    let mut cnt = vec![0usize; m];
    for i in 0..n {
        for j in 0..n {
            let v = pat.class_of(i + 1, j + 1) - 1;
            sum[v] += s.s()[i][j];
            cnt[v] += 1;
        }
    }
    sum.iter().zip(&cnt).map(|(x, c)| x / *c as f64).collect()
}

fn initial_params(t: &RootedTree, s: &SampleCovariance) -> Vec<f64> {
    let pat = CovariancePattern::new(t);
    let proj = projected_init(t, s);
    if cholesky(&pat.sigma(&proj)).is_some() {
        return proj;
    }
    let n = t.n();
    let m = t.num_vertices() - 1;
    let mut diag = vec![0.0; m];
    for i in 0..n {
        diag[i] = s.s()[i][i];
    }
    if cholesky(&pat.sigma(&diag)).is_some() {
        return diag;
    }
    let mean = (0..n).map(|i| s.s()[i][i].abs()).sum::<f64>() / n as f64;
    let mut id = vec![0.0; m];
    for x in id.iter_mut().take(n) {
        *x = if mean > 0.0 { mean } else { 1.0 };
    }
    id
}

/// Relative slack below which two objective values count as equal; near the
/// optimum the Armijo test is decided by rounding noise.
pub const ROUNDING_SLACK: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 100 }
    }
}

/// Damped Newton ascent from the projection of `S` onto the model.
pub fn newton_fit(t: &RootedTree, s: &SampleCovariance, opts: &NewtonOptions) -> Result<ModelFit, MleError> {
    newton_fit_with_init(t, s, &initial_params(t, s), opts)
}

/// Damped Newton ascent from `init`, which must give a PD `Sigma`.
pub fn newton_fit_with_init(
    t: &RootedTree,
    s: &SampleCovariance,
    init: &[f64],
    opts: &NewtonOptions,
) -> Result<ModelFit, MleError> {
    if !(opts.tol > 0.0) {
        return Err(MleError::BadTolerance);
    }
    check_dims(t, init, s)?;
    let pat = CovariancePattern::new(t);
    let m = init.len();
    let mut params = init.to_vec();
    let mut cur = evaluate(&pat, &params, s)?;
    let mut trace = vec![cur.value];
    let mut iterations = 0;
    while inf_norm(&cur.grad) > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let h = neg_hessian(&pat, &cur.k, m);
        let dir = match cholesky(&h) {
            Some(l) => chol_solve(&l, &cur.grad),
            None => cur.grad.clone(),
        };
        let slope: f64 = dir.iter().zip(&cur.grad).map(|(a, b)| a * b).sum();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&dir).map(|(p, d)| p + step * d).collect();
            if let Ok(e) = evaluate(&pat, &trial, s) {
                let armijo = e.value >= cur.value + 1e-4 * step * slope;
                let level = e.value >= cur.value - ROUNDING_SLACK * cur.value.abs().max(1.0);
                if armijo || (level && inf_norm(&e.grad) < inf_norm(&cur.grad)) {
                    accepted = Some((trial, e));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((p, e)) = accepted else { break };
        params = p;
        cur = e;
        trace.push(cur.value);
    }
    let residual = inf_norm(&cur.grad);
    Ok(ModelFit {
        t: params,
        sigma: cur.sigma,
        k: cur.k,
        objective: cur.value,
        residual,
        iterations,
        converged: residual <= opts.tol,
        trace,
    })
}

/// Both forms of the stationarity residual, per non-root vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// `tr((K - S^{-1}) E_v)`.
    pub trace_form: Vec<f64>,
    /// Rows of `A_T (p(K) - p(S^{-1}))`.
    pub design_form: Vec<f64>,
    /// `max_v |trace_form_v|`.
    pub max_abs: f64,
}

/// Agreement tolerance between the two residual forms.
pub const RESIDUAL_AGREEMENT_TOL: f64 = 1e-9;

/// Evaluate the stationarity residual of `fit` in trace form and in design
/// form. A leaf row of the design form equals the trace form; an internal
/// row equals `-1/2` times it, since `E_v` counts both `(i,j)` and `(j,i)`.
pub fn stationarity_residual(t: &RootedTree, fit: &ModelFit, s: &SampleCovariance) -> Result<ResidualReport, MleError> {
    let n = t.n();
    if fit.k.len() != n || s.dim() != n {
        return Err(MleError::DimensionMismatch { expected: n, found: s.dim().min(fit.k.len()) });
    }
    let pat = CovariancePattern::new(t);
    let m = t.num_vertices() - 1;
    let mut trace_form = vec![0.0; m];
    for i in 0..n {
        for j in 0..n {
            trace_form[pat.class_of(i + 1, j + 1) - 1] += fit.k[i][j] - s.s_inv()[i][j];
        }
    }
    let pk = p_coords_f64(&fit.k);
    let pw = p_coords_f64(s.s_inv());
    let a = design_a(t);
    let mut design_form = vec![0.0; m];
    for (r, out) in design_form.iter_mut().enumerate() {
        for c in 0..a.cols() {
            if *a.get(r, c) != num_bigint::BigInt::from(0) {
                *out += pk[c] - pw[c];
            }
        }
    }
    for v in 0..m {
        let scale = if t.is_leaf(v + 1) { 1.0 } else { -2.0 };
        let (x, y) = (trace_form[v], scale * design_form[v]);
        if (x - y).abs() > RESIDUAL_AGREEMENT_TOL * x.abs().max(1.0) {
            return Err(MleError::ResidualMismatch { trace: x, design: y });
        }
    }
    let max_abs = inf_norm(&trace_form);
    Ok(ResidualReport { trace_form, design_form, max_abs })
}

/// Parameters of a Brownian motion along the tree with the given positive
/// edge lengths (indexed like the parameters): `t_v` is the length of the
/// path from the top of the root edge down to `v`. The resulting `Sigma` is
/// positive definite.
pub fn brownian_params(t: &RootedTree, edge_lengths: &[f64]) -> Vec<f64> {
    let m = t.num_vertices() - 1;
    let mut out = vec![0.0; m];
    let mut stack = vec![t.top()];
    out[t.top() - 1] = edge_lengths[t.top() - 1];
    while let Some(v) = stack.pop() {
        for &c in t.children(v) {
            out[c - 1] = out[v - 1] + edge_lengths[c - 1];
            stack.push(c);
        }
    }
    out
}

/// `Sigma(t)` for a parameter vector.
pub fn sigma_of(t: &RootedTree, params: &[f64]) -> Mat {
    CovariancePattern::new(t).sigma(params)
}
