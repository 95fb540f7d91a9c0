//! Truncated SVD of matrix-free operators by Golub-Kahan-Lanczos
//! bidiagonalization.
//!
//! One Lanczos step costs one product with `A` and one with `A^T`; with full
//! reorthogonalization it adds `O(j (L + K))` Gram-Schmidt work at step `j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm, scale, DenseMatrix};

/// Relative threshold below which `alpha_j` or `beta_{j+1}` counts as a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// A real linear map `R^ncols -> R^nrows` available only through products.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A x`, `x` of length `ncols`.
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// `A^T x`, `x` of length `nrows`.
    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.mul_vec(x)
    }

    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.mul_vec_transpose(x)
    }
}

impl<O: LinearOperator + ?Sized> LinearOperator for &O {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }

    fn ncols(&self) -> usize {
        (**self).ncols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).apply(x)
    }

    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).apply_transpose(x)
    }
}

/// `A^T` viewed as an operator.
struct Transposed<'a, O: ?Sized>(&'a O);

impl<O: LinearOperator + ?Sized> LinearOperator for Transposed<'_, O> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }

    fn ncols(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.apply_transpose(x)
    }

    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.apply(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reorth {
    /// Two-pass modified Gram-Schmidt against every stored Lanczos vector.
    #[default]
    Full,
    /// Plain three-term recurrence.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartVector {
    Given(Vec<f64>),
    /// Uniform(-1, 1) entries from a ChaCha8 stream with this seed.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownKind {
    /// `A^T u_j` fell into `span(v_1..v_{j-1})`.
    Alpha,
    /// `A v_j` fell into `span(u_1..u_j)`.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Breakdown {
    /// 1-based Lanczos step at which the breakdown happened.
    pub step: usize,
    pub kind: BreakdownKind,
}

/// Output of `k` Lanczos bidiagonalization steps:
/// `A V_k = U_{k+1} B_k` with `B_k` lower bidiagonal, `(k+1) x k`.
#[derive(Debug, Clone)]
pub struct BidiagonalFactorization {
    /// `alpha_1..alpha_k`, the diagonal of `B_k`.
    pub alphas: Vec<f64>,
    /// `beta_1..beta_{k+1}`; `beta_1` is the norm of the starting vector.
    pub betas: Vec<f64>,
    /// Left Lanczos vectors. `k + 1` of them, or `k` after a beta breakdown
    /// (in which case `beta_{k+1}` is stored as zero).
    pub u: Vec<Vec<f64>>,
    /// Right Lanczos vectors, `k` of them.
    pub v: Vec<Vec<f64>>,
    /// Largest off-diagonal entry of `U^T U` and `V^T V`.
    pub ortho_level: f64,
    pub breakdown: Option<Breakdown>,
}

impl BidiagonalFactorization {
    pub fn steps(&self) -> usize {
        self.alphas.len()
    }

    /// Dense `(k+1) x k` lower bidiagonal `B_k`.
    pub fn b_matrix(&self) -> DenseMatrix {
        let k = self.steps();
        let mut b = DenseMatrix::zeros(k + 1, k.max(1));
        for (j, &a) in self.alphas.iter().enumerate() {
            b.set(j, j, a);
            b.set(j + 1, j, self.betas[j + 1]);
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Estimate of `||A v - sigma u||`; `A^T u = sigma v` holds up to rounding.
    pub residual: f64,
}

/// Thin SVD of a small lower bidiagonal matrix, singular values descending.
#[derive(Debug, Clone)]
pub struct BidiagSvd {
    pub sigma: Vec<f64>,
    /// `k` left singular vectors of length `k + 1`.
    pub left: Vec<Vec<f64>>,
    /// `k` right singular vectors of length `k`.
    pub right: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SvdOptions {
    /// Upper bound on Lanczos steps; `None` means `min(L, K)`.
    pub max_steps: Option<usize>,
    /// Convergence threshold on the residual estimate, relative to `sigma_1`.
    pub tol: f64,
    pub seed: u64,
    pub reorth: Reorth,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            max_steps: None,
            tol: 1e-10,
            seed: 42,
            reorth: Reorth::Full,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SvdReport {
    pub steps: usize,
    pub matvecs: usize,
    pub tmatvecs: usize,
    /// Breakdowns resolved by injecting a fresh random orthogonal vector.
    pub restarts: usize,
    pub ortho_level: f64,
    /// Residual estimates of the leading Ritz triples at exit.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub triples: Vec<SingularTriple>,
    pub report: SvdReport,
}

/// What a truncated SVD managed before running out of steps.
#[derive(Debug, Clone)]
pub struct PartialSvd {
    pub converged: Vec<SingularTriple>,
    pub requested: usize,
    pub steps: usize,
    pub report: SvdReport,
}

enum StepOutcome {
    Continue,
    Breakdown(BreakdownKind),
}

struct Lanczos<'a, O: LinearOperator + ?Sized> {
    op: &'a O,
    reorth: Reorth,
    restart: bool,
    rng: ChaCha8Rng,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    scale: f64,
    exhausted: bool,
    report: SvdReport,
}

impl<'a, O: LinearOperator + ?Sized> Lanczos<'a, O> {
    fn new(op: &'a O, start: StartVector, reorth: Reorth, restart: bool) -> Result<Self> {
        let rows = op.nrows();
        let (p0, seed) = match start {
            StartVector::Given(p) => (p, 0),
            StartVector::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (
                    (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    seed,
                )
            }
        };
        if p0.len() != rows {
            return Err(invalid(format!(
                "start vector has length {}, expected {rows}",
                p0.len()
            )));
        }
        if p0.iter().any(|x| !x.is_finite()) {
            return Err(invalid("start vector has non-finite entries"));
        }
        let beta1 = norm(&p0);
        if beta1 == 0.0 {
            return Err(invalid("start vector is zero"));
        }
        let mut u1 = p0;
        scale(1.0 / beta1, &mut u1);
        Ok(Self {
            op,
            reorth,
            restart,
            // separate stream so restart vectors never repeat the start vector
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x0005_EED0_F1A2_C205),
            u: vec![u1],
            v: Vec::new(),
            alphas: Vec::new(),
            betas: vec![beta1],
            scale: 0.0,
            exhausted: false,
            report: SvdReport::default(),
        })
    }

    fn steps(&self) -> usize {
        self.alphas.len()
    }

    fn is_breakdown(&mut self, value: f64, raw: f64) -> bool {
        self.scale = self.scale.max(raw).max(value);
        value <= BREAKDOWN_TOL * self.scale
    }

    fn step(&mut self) -> Result<StepOutcome> {
        let j = self.steps() + 1;
        let op = self.op;

        let mut r = op.apply_transpose(&self.u[j - 1])?;
        self.report.tmatvecs += 1;
        let raw = norm(&r);
        if j > 1 {
            axpy(-self.betas[j - 1], &self.v[j - 2], &mut r);
        }
        if self.reorth == Reorth::Full {
            reorthogonalize(&mut r, &self.v);
        }
        let mut alpha = norm(&r);
        if self.is_breakdown(alpha, raw) {
            if !self.restart || self.v.len() >= op.ncols() {
                return Ok(StepOutcome::Breakdown(BreakdownKind::Alpha));
            }
            r = random_orthogonal(&mut self.rng, &self.v, op.ncols());
            alpha = 0.0;
            self.report.restarts += 1;
        } else {
            scale(1.0 / alpha, &mut r);
        }
        self.alphas.push(alpha);
        self.v.push(r);

        let mut p = op.apply(&self.v[j - 1])?;
        self.report.matvecs += 1;
        let raw = norm(&p);
        axpy(-alpha, &self.u[j - 1], &mut p);
        if self.reorth == Reorth::Full {
            reorthogonalize(&mut p, &self.u);
        }
        let beta = norm(&p);
        self.report.steps = self.steps();
        if self.is_breakdown(beta, raw) {
            self.betas.push(0.0);
            if !self.restart || self.u.len() >= op.nrows() {
                self.exhausted = true;
                return Ok(StepOutcome::Breakdown(BreakdownKind::Beta));
            }
            let fresh = random_orthogonal(&mut self.rng, &self.u, op.nrows());
            self.u.push(fresh);
            self.report.restarts += 1;
        } else {
            scale(1.0 / beta, &mut p);
            self.betas.push(beta);
            self.u.push(p);
        }
        Ok(StepOutcome::Continue)
    }

    fn ortho_level(&self) -> f64 {
        max_off_diagonal_gram(&self.u).max(max_off_diagonal_gram(&self.v))
    }

    fn into_factorization(self, breakdown: Option<Breakdown>) -> BidiagonalFactorization {
        let ortho_level = self.ortho_level();
        BidiagonalFactorization {
            alphas: self.alphas,
            betas: self.betas,
            u: self.u,
            v: self.v,
            ortho_level,
            breakdown,
        }
    }
}

fn mgs(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(x, b);
        axpy(-c, b, x);
    }
}

/// Modified Gram-Schmidt, repeated once when the first pass removes more
/// than half of the norm.
fn reorthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    let before = norm(x);
    mgs(x, basis);
    if norm(x) < 0.5 * before {
        mgs(x, basis);
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let before = norm(&x);
        mgs(&mut x, basis);
        mgs(&mut x, basis);
        let after = norm(&x);
        if after > 1e-8 * before {
            scale(1.0 / after, &mut x);
            return x;
        }
    }
}

fn max_off_diagonal_gram(vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..vectors.len() {
        for j in 0..i {
            worst = worst.max(dot(&vectors[i], &vectors[j]).abs());
        }
    }
    worst
}

/// Runs up to `steps` Lanczos bidiagonalization steps and stops at the first
/// breakdown, which is reported in the result rather than as an error.
pub fn lanczos_bidiag<O: LinearOperator + ?Sized>(
    op: &O,
    steps: usize,
    start: StartVector,
    reorth: Reorth,
) -> Result<BidiagonalFactorization> {
    let max = op.nrows().min(op.ncols());
    if steps == 0 || steps > max {
        return Err(invalid(format!("steps must lie in 1..={max}, got {steps}")));
    }
    let mut lanczos = Lanczos::new(op, start, reorth, false)?;
    while lanczos.steps() < steps {
        let step = lanczos.steps() + 1;
        if let StepOutcome::Breakdown(kind) = lanczos.step()? {
            return Ok(lanczos.into_factorization(Some(Breakdown { step, kind })));
        }
    }
    Ok(lanczos.into_factorization(None))
}

/// Thin SVD of the `(k+1) x k` lower bidiagonal matrix with diagonal `alphas`
/// and subdiagonal `betas[1..]` (`betas[0]` is ignored).
pub fn bidiag_svd(alphas: &[f64], betas: &[f64]) -> Result<BidiagSvd> {
    let k = alphas.len();
    if k == 0 {
        return Err(invalid("bidiagonal matrix needs at least one column"));
    }
    if betas.len() != k + 1 {
        return Err(invalid(format!(
            "expected {} betas, got {}",
            k + 1,
            betas.len()
        )));
    }
    if alphas.iter().chain(&betas[1..]).any(|x| !x.is_finite()) {
        return Err(invalid("bidiagonal matrix has non-finite entries"));
    }
    let mut cols = vec![vec![0.0; k + 1]; k];
    for j in 0..k {
        cols[j][j] = alphas[j];
        cols[j][j + 1] = betas[j + 1];
    }
    Ok(jacobi_svd(cols, k + 1))
}

/// One-sided (Hestenes) Jacobi SVD of a tall matrix given by its columns.
/// Computes small singular values to high relative accuracy.
fn jacobi_svd(mut cols: Vec<Vec<f64>>, rows: usize) -> BidiagSvd {
    let n = cols.len();
    let mut vmat: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let a = dot(&cols[p], &cols[p]);
                let b = dot(&cols[q], &cols[q]);
                let g = dot(&cols[p], &cols[q]);
                if g == 0.0 || g.abs() <= f64::EPSILON * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vmat, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let top = order.first().map_or(0.0, |o| o.0);

    let mut sigma = Vec::with_capacity(n);
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for &(s, j) in &order {
        if s > 1e-150 * top && s > 0.0 {
            let mut u = cols[j].clone();
            scale(1.0 / s, &mut u);
            sigma.push(s);
            left.push(u);
        } else {
            sigma.push(0.0);
            missing.push(left.len());
            left.push(Vec::new());
        }
        right.push(vmat[j].clone());
    }
    // Null directions: complete the left basis from the standard basis.
    for slot in missing {
        let known: Vec<Vec<f64>> = left.iter().filter(|u| !u.is_empty()).cloned().collect();
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = 0.0;
        for i in 0..rows {
            let mut e = vec![0.0; rows];
            e[i] = 1.0;
            mgs(&mut e, &known);
            mgs(&mut e, &known);
            let nrm = norm(&e);
            if nrm > best_norm {
                best_norm = nrm;
                best = Some(e);
            }
        }
        let mut e = best.expect("rows >= columns leaves room for completion");
        scale(1.0 / best_norm, &mut e);
        left[slot] = e;
    }
    BidiagSvd { sigma, left, right }
}

fn rotate(vecs: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = vecs.split_at_mut(q);
    let (xp, xq) = (&mut head[p], &mut tail[0]);
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Flips signs so the first nonzero component of `u` is nonnegative.
fn canonicalize(triple: &mut SingularTriple) {
    if let Some(&first) = triple.u.iter().find(|x| **x != 0.0) {
        if first < 0.0 {
            triple.u.iter_mut().for_each(|x| *x = -*x);
            triple.v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

struct Ritz {
    sigma: Vec<f64>,
    residual: Vec<f64>,
    svd: BidiagSvd,
}

/// Ritz values from the square `k x k` part of `B_k`. For a right singular
/// vector `q`, `||A V q - sigma U p|| = |beta_{k+1} q_k|` while `A^T U p = sigma V q`.
fn ritz<O: LinearOperator + ?Sized>(lanczos: &Lanczos<'_, O>) -> Ritz {
    let k = lanczos.steps();
    let beta_next = lanczos.betas[k];
    let mut square_betas = lanczos.betas[..k].to_vec();
    square_betas.push(0.0);
    let mut cols = vec![vec![0.0; k]; k];
    for j in 0..k {
        cols[j][j] = lanczos.alphas[j];
        if j + 1 < k {
            cols[j][j + 1] = square_betas[j + 1];
        }
    }
    let svd = jacobi_svd(cols, k);
    let residual = svd
        .right
        .iter()
        .map(|q| (beta_next * q[k - 1]).abs())
        .collect();
    Ritz {
        sigma: svd.sigma.clone(),
        residual,
        svd,
    }
}

fn assemble<O: LinearOperator + ?Sized>(
    lanczos: &Lanczos<'_, O>,
    ritz: &Ritz,
    count: usize,
) -> Vec<SingularTriple> {
    let k = lanczos.steps();
    (0..count.min(k))
        .map(|i| {
            let mut u = vec![0.0; lanczos.op.nrows()];
            let mut v = vec![0.0; lanczos.op.ncols()];
            for j in 0..k {
                axpy(ritz.svd.left[i][j], &lanczos.u[j], &mut u);
                axpy(ritz.svd.right[i][j], &lanczos.v[j], &mut v);
            }
            let (nu, nv) = (norm(&u), norm(&v));
            if nu > 0.0 {
                scale(1.0 / nu, &mut u);
            }
            if nv > 0.0 {
                scale(1.0 / nv, &mut v);
            }
            SingularTriple {
                sigma: ritz.sigma[i],
                u,
                v,
                residual: ritz.residual[i],
            }
        })
        .collect()
}

/// Leading `nev` singular triples of `op`, largest first.
///
/// Lanczos runs for `max(2 nev, nev + 8)` steps and the step budget doubles
/// (continuing the same recurrence) until the leading `nev` Ritz triples have
/// residual estimates below `tol * sigma_1` or `max_steps` is reached.
pub fn trunc_svd<O: LinearOperator + ?Sized>(
    op: &O,
    nev: usize,
    opts: &SvdOptions,
) -> Result<TruncatedSvd> {
    if op.nrows() > op.ncols() {
        let mut out = trunc_svd_wide(&Transposed(op), nev, opts);
        let swap = |t: &mut SingularTriple| {
            std::mem::swap(&mut t.u, &mut t.v);
            canonicalize(t);
        };
        match &mut out {
            Ok(res) => res.triples.iter_mut().for_each(swap),
            Err(Error::NotConverged(partial)) => partial.converged.iter_mut().for_each(swap),
            Err(_) => {}
        }
        return out;
    }
    trunc_svd_wide(op, nev, opts)
}

fn trunc_svd_wide<O: LinearOperator + ?Sized>(
    op: &O,
    nev: usize,
    opts: &SvdOptions,
) -> Result<TruncatedSvd> {
    let full = op.nrows().min(op.ncols());
    if nev == 0 || nev > full {
        return Err(invalid(format!("nev must lie in 1..={full}, got {nev}")));
    }
    let max_steps = opts.max_steps.unwrap_or(full).min(full);
    if max_steps < nev {
        return Err(invalid(format!(
            "max_steps ({max_steps}) must be at least nev ({nev})"
        )));
    }
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(invalid("tolerance must be nonnegative"));
    }

    let mut lanczos = Lanczos::new(op, StartVector::Seeded(opts.seed), opts.reorth, true)?;
    let mut target = (2 * nev).max(nev + 8).min(max_steps);
    loop {
        while lanczos.steps() < target && !lanczos.exhausted {
            lanczos.step()?;
        }
        let ritz = ritz(&lanczos);
        let top = ritz.sigma.first().copied().unwrap_or(0.0);
        let threshold = opts.tol * top;
        let leading_ok = ritz
            .residual
            .iter()
            .take_while(|r| **r <= threshold)
            .count();
        let done = lanczos.exhausted || leading_ok >= nev.min(lanczos.steps());
        if done || target >= max_steps {
            lanczos.report.ortho_level = lanczos.ortho_level();
            lanczos.report.residuals = ritz.residual.iter().take(nev).copied().collect();
            let available = if lanczos.exhausted {
                lanczos.steps()
            } else {
                leading_ok
            };
            let mut triples = assemble(&lanczos, &ritz, nev.min(available));
            triples.iter_mut().for_each(canonicalize);
            if triples.len() >= nev {
                return Ok(TruncatedSvd {
                    triples,
                    report: lanczos.report,
                });
            }
            return Err(Error::NotConverged(Box::new(PartialSvd {
                converged: triples,
                requested: nev,
                steps: lanczos.steps(),
                report: lanczos.report,
            })));
        }
        target = (2 * target).min(max_steps);
    }
}
