//! Residual suite: operator identities as named checks with tolerances.
//!
//! Analytic checks act on seeded Gaussian test functions through jets, so the
//! only error left is floating point and quadrature. Matrix checks reuse the
//! dense pipeline from [`crate::metric`].

use crate::error::Result;
use crate::grid::{gauss_legendre_8, sample, HalfLineGrid};
use crate::jet::Jet;
use crate::metric::{self, Space};
use crate::operators::{
    build_eta, build_eta0, build_h, build_h_dagger, build_h0, LadderFlavor, LadderOperator,
    SchrodingerOperator,
};
use crate::spectral::{eta_state, rho_apply_spectral, KGrid};
use crate::transformation::{
    catalogue, CatalogueEntry, CatalogueParams, ExponentialModulus, Modulus, PhaseSeed,
    PoschlTellerModulus, Superpotential, TransformationFunction,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Parameters a check was run with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckContext {
    pub entry: String,
    pub d: f64,
    pub b: f64,
    pub a: f64,
    pub c: f64,
    pub n: usize,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    #[serde(rename = "check")]
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub context: CheckContext,
}

impl CheckResult {
    pub fn new(name: &str, residual: f64, tolerance: f64, context: CheckContext) -> Self {
        CheckResult {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            context,
        }
    }
}

/// Per-check tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// floating point in 4th-order jet compositions
    pub quasi_hermiticity: f64,
    /// Gauss-Legendre quadrature of smooth Gaussians
    pub eta_selfadjoint: f64,
    /// floating point
    pub interh0h: f64,
    /// floating point; the phase solver's ODE residual for custom seeds
    pub h0_eigen_u: f64,
    /// floating point
    pub eta_intertwinings: f64,
    /// floating point
    pub factorization: f64,
    /// floating point; reality of `h0`
    pub ld_la: f64,
    /// 4th-order finite differences of the stored derivative
    pub eta_state: f64,
    /// rounding in `L L^dagger`
    pub eta_hermitian: f64,
    /// eigensolver rounding
    pub sqrt_reconstruction: f64,
    /// 2nd-order boundary rows and truncation at `X`
    pub r_h: f64,
    /// same as `r_h`, amplified by the resolvent condition
    pub resolvent: f64,
    /// staggered quadrature
    pub isometry: f64,
    /// rounding
    pub weighted_adjoint: f64,
    /// k-grid truncation and trapezoid rule against the matrix root
    pub rho_spectral: f64,
    /// relative size of injected errors in negative controls
    pub control_size: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quasi_hermiticity: 1e-8,
            eta_selfadjoint: 1e-8,
            interh0h: 1e-8,
            h0_eigen_u: 1e-8,
            eta_intertwinings: 1e-8,
            factorization: 1e-9,
            ld_la: 1e-9,
            eta_state: 1e-5,
            eta_hermitian: 1e-13,
            sqrt_reconstruction: 1e-10,
            r_h: 1e-5,
            resolvent: 1e-3,
            isometry: 1e-4,
            weighted_adjoint: 1e-10,
            rho_spectral: 5e-2,
            control_size: 1e-3,
        }
    }
}

// ---------------------------------------------------------------------------
// test functions and quadrature

/// `x e^{-(x-mu)^2/sigma^2} - e^{-mu^2/sigma^2} (1 + (1 - w0) x) e^{-x^2}`:
/// satisfies `psi'(0) + w0 psi(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub mu: f64,
    pub sigma: f64,
    pub w0: Complex64,
}

impl TestFunction {
    pub fn jet(&self, x: f64) -> Jet {
        let t = Jet::variable(x);
        let s = t + Complex64::new(-self.mu, 0.0);
        let bump = t * (s * s * (-1.0 / (self.sigma * self.sigma))).exp();
        let g1 = (-(self.mu * self.mu) / (self.sigma * self.sigma)).exp();
        let corr = (t * (Complex64::new(1.0, 0.0) - self.w0) + Complex64::new(1.0, 0.0))
            * (t * t * -1.0).exp()
            * (-g1);
        bump + corr
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.jet(x).value()
    }
}

/// `count` seeded test functions with `mu in [2, X/2]`, `sigma in [0.5, 2]`.
pub fn test_functions(seed: u64, count: usize, w0: Complex64, x_max: f64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = (0.5 * x_max).max(2.5);
    (0..count)
        .map(|_| TestFunction {
            mu: rng.random_range(2.0..hi),
            sigma: rng.random_range(0.5..2.0),
            w0,
        })
        .collect()
}

/// Gauss-Legendre points on `[0, X]` in cells of width about 0.25.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(x_max: f64) -> Self {
        let cells = (x_max / 0.25).ceil().max(1.0) as usize;
        let h = x_max / cells as f64;
        let mut points = Vec::with_capacity(8 * cells);
        let mut weights = Vec::with_capacity(8 * cells);
        for j in 0..cells {
            for (x, w) in gauss_legendre_8(j as f64 * h, (j + 1) as f64 * h) {
                points.push(x);
                weights.push(w);
            }
        }
        Quadrature { points, weights }
    }

    pub fn norm(&self, f: impl Fn(f64) -> Complex64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<f|g>`, conjugate-linear in `f`.
    pub fn inner(&self, f: impl Fn(f64) -> Complex64, g: impl Fn(f64) -> Complex64) -> Complex64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x).conj() * g(x) * w)
            .sum()
    }
}

type JetFn<'a> = dyn Fn(f64) -> Jet + Sync + 'a;

fn so(op: &SchrodingerOperator, psi: Jet, x: f64) -> Jet {
    op.apply_jet(psi, x)
}

fn lad(w: &Superpotential, f: LadderFlavor) -> LadderOperator {
    LadderOperator::new(f, w)
}

/// `max_tests ||lhs psi - rhs psi|| / ||psi||`.
fn max_relative(q: &Quadrature, tests: &[TestFunction], diff: &(dyn Fn(&JetFn, f64) -> Complex64 + Sync)) -> f64 {
    tests
        .iter()
        .map(|t| {
            let psi = |x: f64| t.jet(x);
            let num = q.norm(|x| diff(&psi, x));
            num / q.norm(|x| t.value(x))
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// analytic checks

/// `eta H psi = H^dagger eta psi`.
pub fn check_quasi_hermiticity(w: &Superpotential, q: &Quadrature, tests: &[TestFunction]) -> f64 {
    let eta = build_eta(w);
    let h = build_h(w);
    let hd = build_h_dagger(w);
    max_relative(q, tests, &|psi, x| {
        let p = psi(x);
        (so(&eta, so(&h, p, x), x) - so(&hd, so(&eta, p, x), x)).value()
    })
}

/// `max |<psi2|eta psi1> - <eta psi2|psi1>| / (||psi1|| ||psi2||)` over consecutive pairs.
pub fn check_eta_selfadjoint(w: &Superpotential, q: &Quadrature, tests: &[TestFunction]) -> f64 {
    let eta = build_eta(w);
    let mut worst = 0.0f64;
    for i in 0..tests.len() {
        let (t1, t2) = (tests[i], tests[(i + 1) % tests.len()]);
        let a = q.inner(|x| t2.value(x), |x| so(&eta, t1.jet(x), x).value());
        let b = q.inner(|x| so(&eta, t2.jet(x), x).value(), |x| t1.value(x));
        let scale = q.norm(|x| t1.value(x)) * q.norm(|x| t2.value(x));
        worst = worst.max((a - b).norm() / scale);
    }
    worst
}

/// `L* h0 = H L*` and its adjoint `h0 (L*)^dagger = (L*)^dagger H^dagger`; `h0` has the real potential.
pub fn check_interh0h(w: &Superpotential, grid: &HalfLineGrid, q: &Quadrature, tests: &[TestFunction]) -> Result<f64> {
    let h0 = build_h0(w, grid)?;
    Ok(interh0h_with(w, &h0, q, tests))
}

fn interh0h_with(w: &Superpotential, h0: &SchrodingerOperator, q: &Quadrature, tests: &[TestFunction]) -> f64 {
    let h = build_h(w);
    let hd = build_h_dagger(w);
    let ls = lad(w, LadderFlavor::LStar);
    let lsd = lad(w, LadderFlavor::LStarDagger);
    let a = max_relative(q, tests, &|psi, x| {
        let p = psi(x);
        (ls.apply_jet(so(h0, p, x), x) - so(&h, ls.apply_jet(p, x), x)).value()
    });
    let b = max_relative(q, tests, &|psi, x| {
        let p = psi(x);
        (so(h0, lsd.apply_jet(p, x), x) - lsd.apply_jet(so(&hd, p, x), x)).value()
    });
    a.max(b)
}

/// `max |(-u'' + v0 u) - lambda u| / max |u|` over the nodes, `v0 = Re(w' + w^2 + alpha)`;
/// `lambda = alpha` for the identity itself.
pub fn check_h0_eigen_u(w: &Superpotential, grid: &HalfLineGrid, lambda: Complex64) -> f64 {
    let alpha = w.alpha();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for &x in grid.nodes() {
        let lu = w.log_u(x);
        let u = lu.exp();
        let v0 = (w.w_prime(x) + w.w(x) * w.w(x) + alpha).re;
        let r = -u.get(2) + u.value() * v0 - u.value() * lambda;
        num = num.max(r.norm());
        den = den.max(u.value().norm());
    }
    num / den
}

/// `eta0 L^dagger = L^dagger eta` and `L eta0 = eta L`.
pub fn check_eta_intertwinings(w: &Superpotential, q: &Quadrature, tests: &[TestFunction]) -> f64 {
    let eta = build_eta(w);
    let eta0 = build_eta0(w);
    let l = lad(w, LadderFlavor::L);
    let ld = lad(w, LadderFlavor::LDagger);
    let a = max_relative(q, tests, &|psi, x| {
        let p = psi(x);
        (so(&eta0, ld.apply_jet(p, x), x) - ld.apply_jet(so(&eta, p, x), x)).value()
    });
    let b = max_relative(q, tests, &|psi, x| {
        let p = psi(x);
        (l.apply_jet(so(&eta0, p, x), x) - so(&eta, l.apply_jet(p, x), x)).value()
    });
    a.max(b)
}

/// `eta = L L^dagger`, `eta0 = L^dagger L`, `H = L* L^dagger + alpha`, `h0 = L^dagger L* + alpha`.
pub fn check_factorizations(w: &Superpotential, grid: &HalfLineGrid, q: &Quadrature, tests: &[TestFunction]) -> Result<f64> {
    let eta = build_eta(w);
    let eta0 = build_eta0(w);
    let h = build_h(w);
    let h0 = build_h0(w, grid)?;
    let alpha = w.alpha();
    let l = lad(w, LadderFlavor::L);
    let ld = lad(w, LadderFlavor::LDagger);
    let ls = lad(w, LadderFlavor::LStar);
    let r = [
        max_relative(q, tests, &|psi, x| {
            let p = psi(x);
            (so(&eta, p, x) - l.apply_jet(ld.apply_jet(p, x), x)).value()
        }),
        max_relative(q, tests, &|psi, x| {
            let p = psi(x);
            (so(&eta0, p, x) - ld.apply_jet(l.apply_jet(p, x), x)).value()
        }),
        max_relative(q, tests, &|psi, x| {
            let p = psi(x);
            (so(&h, p, x) - ls.apply_jet(ld.apply_jet(p, x), x) - p * alpha).value()
        }),
        max_relative(q, tests, &|psi, x| {
            let p = psi(x);
            (so(&h0, p, x) - ld.apply_jet(ls.apply_jet(p, x), x) - p * alpha).value()
        }),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// `(L^dagger L* + alpha) psi = ((L*)^dagger L + conj(alpha)) psi`.
pub fn check_ld_la(w: &Superpotential, q: &Quadrature, tests: &[TestFunction]) -> f64 {
    let alpha = w.alpha();
    let l = lad(w, LadderFlavor::L);
    let ld = lad(w, LadderFlavor::LDagger);
    let ls = lad(w, LadderFlavor::LStar);
    let lsd = lad(w, LadderFlavor::LStarDagger);
    max_relative(q, tests, &|psi, x| {
        let p = psi(x);
        (ld.apply_jet(ls.apply_jet(p, x), x) + p * alpha
            - lsd.apply_jet(l.apply_jet(p, x), x)
            - p * alpha.conj())
        .value()
    })
}

// ---------------------------------------------------------------------------
// suite

/// Settings for [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub n_tests: usize,
    /// Also run the dense matrix checks.
    pub matrix: bool,
    /// Also compare the spectral-integral `rho` with the matrix `rho`.
    pub rho_spectral: bool,
    pub k_grid: KGrid,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            n_tests: 20,
            matrix: true,
            rho_spectral: false,
            k_grid: KGrid::default(),
            tolerances: Tolerances::default(),
        }
    }
}

fn context(entry: &str, p: CatalogueParams, grid: &HalfLineGrid) -> CheckContext {
    CheckContext {
        entry: entry.replace('-', "_"),
        d: p.d,
        b: p.b,
        a: p.a,
        c: p.c,
        n: grid.len(),
        x_max: grid.x_max(),
    }
}

/// Negative control: passes iff the wrapped check fails by at least its tolerance.
fn control(name: &str, measured: f64, tol: f64, ctx: &CheckContext) -> CheckResult {
    let r = if measured > 0.0 { tol / measured } else { f64::INFINITY };
    CheckResult::new(name, r, 1.0, ctx.clone())
}

/// Seed with the same modulus and a phase from a wrong `gamma`.
fn wrong_gamma_seed(entry: &CatalogueEntry, p: CatalogueParams, factor: f64, grid: &HalfLineGrid) -> Result<TransformationFunction> {
    let params = crate::transformation::AsymptoticParams::new(p.d, p.b)?;
    let modulus: Arc<dyn Modulus> = match entry {
        CatalogueEntry::PoschlTeller { a, c } => Arc::new(PoschlTellerModulus::new(*a, *c, p.d, p.b)),
        _ => Arc::new(ExponentialModulus { d: p.d }),
    };
    let gamma = if params.gamma() == 0.0 { factor - 1.0 } else { params.gamma() * factor };
    let seed = PhaseSeed::new(modulus, gamma, p.d, grid)?;
    Ok(TransformationFunction::from_seed(
        Arc::new(seed),
        params,
        CatalogueEntry::Custom("wrong_gamma".into()),
    ))
}

/// Analytic identity checks and their negative controls.
pub fn run_analytic(entry: &str, p: CatalogueParams, grid: &Arc<HalfLineGrid>, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let tol = cfg.tolerances;
    let u = catalogue(entry, p)?;
    let q = Quadrature::new(grid.x_max());
    let w = Superpotential::from_transformation(&u, grid)?.tabulated(&q.points);
    let ctx = context(entry, p, grid);
    let tests = test_functions(cfg.seed, cfg.n_tests, w.w(0.0), grid.x_max());
    let mut out = vec![
        CheckResult::new("quasi_hermiticity", check_quasi_hermiticity(&w, &q, &tests), tol.quasi_hermiticity, ctx.clone()),
        CheckResult::new("eta_selfadjoint", check_eta_selfadjoint(&w, &q, &tests), tol.eta_selfadjoint, ctx.clone()),
        CheckResult::new("interh0h", check_interh0h(&w, grid, &q, &tests)?, tol.interh0h, ctx.clone()),
        CheckResult::new("h0_eigen_u", check_h0_eigen_u(&w, grid, w.alpha()), tol.h0_eigen_u, ctx.clone()),
        CheckResult::new("eta_intertwinings", check_eta_intertwinings(&w, &q, &tests), tol.eta_intertwinings, ctx.clone()),
        CheckResult::new("factorizations", check_factorizations(&w, grid, &q, &tests)?, tol.factorization, ctx.clone()),
        CheckResult::new("ld_la", check_ld_la(&w, &q, &tests), tol.ld_la, ctx.clone()),
    ];

    // negative controls
    let eps = tol.control_size;
    // psi2(0) perturbed: breaks the Robin condition. The boundary term is
    // proportional to psi1(0) psi2(0), so sigma = mu keeps both of order one.
    let mut mixed = Vec::with_capacity(2 * tests.len());
    for t in &tests {
        let g = TestFunction { sigma: t.mu, ..*t };
        mixed.push(g);
        mixed.push(TestFunction {
            w0: t.w0 + eps * (1.0 + t.w0.norm()),
            ..g
        });
    }
    out.push(control("control_eta_selfadjoint_boundary", check_eta_selfadjoint(&w, &q, &mixed), tol.eta_selfadjoint, &ctx));
    // wrong alpha: as eigenvalue of h0, and inside H (an imaginary shift, since a
    // real one leaves eta H - H^dagger eta unchanged)
    let da = eps * w.alpha().norm().max(1.0);
    out.push(control("control_h0_eigen_u_alpha", check_h0_eigen_u(&w, grid, w.alpha() + da), tol.h0_eigen_u, &ctx));
    let w_bad = w.with_alpha(w.alpha() + Complex64::new(0.0, da));
    out.push(control("control_quasi_hermiticity_alpha", check_quasi_hermiticity(&w_bad, &q, &tests), tol.quasi_hermiticity, &ctx));
    // wrong gamma in the phase
    let ug = wrong_gamma_seed(u.entry(), p, 1.0 + eps, grid)?;
    let wg = Superpotential::from_transformation(&ug, grid)?.tabulated(&q.points);
    out.push(control("control_h0_eigen_u_gamma", check_h0_eigen_u(&wg, grid, wg.alpha()), tol.h0_eigen_u, &ctx));
    out.push(control("control_quasi_hermiticity_gamma", check_quasi_hermiticity(&wg, &q, &tests), tol.quasi_hermiticity, &ctx));
    Ok(out)
}

/// Dense-matrix checks.
pub fn run_matrix(entry: &str, p: CatalogueParams, grid: &Arc<HalfLineGrid>, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let tol = cfg.tolerances;
    let u = catalogue(entry, p)?;
    let w = Superpotential::from_transformation(&u, grid)?;
    let ctx = context(entry, p, grid);
    let pl = metric::run_pipeline(&w, grid)?;
    let r = &pl.report;
    let mut out = vec![
        CheckResult::new("eta_matrix_hermitian", r.eta_hermiticity, tol.eta_hermitian, ctx.clone()),
        CheckResult::new("sqrt_reconstruction", r.sqrt_reconstruction, tol.sqrt_reconstruction, ctx.clone()),
        CheckResult::new("h_hermitian", r.r_h, tol.r_h, ctx.clone()),
        CheckResult::new("h_similarity_gap", r.similarity_gap, tol.r_h, ctx.clone()),
        CheckResult::new("isometry_eta0", r.isometry_defect_eta0, tol.isometry, ctx.clone()),
    ];
    match (r.resolvent_agreement, r.isometry_defect_resolvent) {
        (Some(a), Some(dfct)) => {
            out.push(CheckResult::new("h_resolvent", a, tol.resolvent, ctx.clone()));
            out.push(CheckResult::new("isometry_resolvent", dfct, tol.isometry, ctx.clone()));
        }
        _ => out.push(CheckResult::new("h_resolvent", f64::INFINITY, tol.resolvent, ctx.clone())),
    }
    // lambda_min(eta) >= d^2 / 2 (broken SUSY floor); residual d^2 / (2 lambda_min)
    out.push(CheckResult::new("eta_floor", 0.5 * p.d * p.d / r.lambda_min, 1.0, ctx.clone()));
    // discrete integration by parts
    let m = pl.eta.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = nalgebra::DVector::from_fn(m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let g = nalgebra::DVector::from_fn(m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let e = pl.eta.entries();
    let adj = (f.dotc(&(e * &g)) - (e * &f).dotc(&g)).norm() / (f.norm() * g.norm() * e.norm());
    out.push(CheckResult::new("eta_weighted_adjoint", adj, tol.weighted_adjoint, ctx.clone()));
    // eta eigenstate at k = 1
    let st = eta_state(&u, &w, 1.0, grid)?;
    out.push(CheckResult::new("eta_state", st.eigen_residual(&build_eta(&w))?, tol.eta_state, ctx.clone()));
    if cfg.rho_spectral {
        let t = test_functions(cfg.seed, 1, w.w(0.0), grid.x_max())[0];
        let psi = sample(|x| t.value(x), grid)?;
        let spectral = rho_apply_spectral(&u, &w, &psi, &cfg.k_grid)?;
        let coords = metric::to_coords(|x| t.value(x), grid, Space::Nodes);
        let mat = metric::from_coords(&(pl.sqrt.rho() * coords), grid, Space::Nodes);
        // compare on the node space (the last node is the truncation point)
        let s = spectral.values();
        let num: f64 = mat.iter().zip(s).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = mat.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        out.push(CheckResult::new("rho_spectral", num / den, tol.rho_spectral, ctx.clone()));
    }
    Ok(out)
}

/// Every check for one catalogue entry; deterministic for a fixed seed.
pub fn run_suite(entry: &str, p: CatalogueParams, grid: &Arc<HalfLineGrid>, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = run_analytic(entry, p, grid, cfg)?;
    if cfg.matrix {
        out.extend(run_matrix(entry, p, grid, cfg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn grid(x: f64, n: usize) -> Arc<HalfLineGrid> {
        Arc::new(HalfLineGrid::new(x, n).unwrap())
    }

    fn p(d: f64, b: f64) -> CatalogueParams {
        CatalogueParams { d, b, a: 1.0, c: 1.0 }
    }

    fn setup(entry: &str, d: f64, b: f64) -> (Superpotential, Quadrature, Vec<TestFunction>, Arc<HalfLineGrid>) {
        let g = grid(20.0, 401);
        let u = catalogue(entry, p(d, b)).unwrap();
        let w = Superpotential::from_transformation(&u, &g).unwrap();
        let tests = test_functions(3, 20, w.w(0.0), 20.0);
        (w, Quadrature::new(20.0), tests, g)
    }

    #[test]
    fn controls_fail_their_checks_for_every_seed() {
        let g = grid(10.0, 201);
        for entry in ["constant", "poschl_teller"] {
            for seed in 0..12 {
                let cfg = SuiteConfig {
                    seed,
                    n_tests: 2,
                    matrix: false,
                    ..SuiteConfig::default()
                };
                for r in run_analytic(entry, p(-1.0, 0.5), &g, &cfg).unwrap() {
                    assert!(r.passed, "{entry} seed {seed}: {} {:e}", r.name, r.residual);
                }
            }
        }
    }

    #[test]
    fn test_functions_satisfy_robin() {
        let w0 = Complex64::new(-1.0, 0.7);
        for t in test_functions(1, 10, w0, 20.0) {
            let j = t.jet(0.0);
            assert!((j.get(1) + w0 * j.value()).norm() < 1e-15);
            assert!((2.0..=10.0).contains(&t.mu) && (0.5..=2.0).contains(&t.sigma));
        }
        assert_eq!(test_functions(5, 3, w0, 20.0), test_functions(5, 3, w0, 20.0));
    }

    #[test]
    fn quadrature_integrates_gaussian() {
        let q = Quadrature::new(20.0);
        let n2 = q.norm(|x| Complex64::new((-x * x).exp(), 0.0)).powi(2);
        assert!((n2 - 0.5 * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn constant_entry_identities() {
        let (w, q, t, g) = setup("constant", -1.0, 1.0);
        assert!(check_quasi_hermiticity(&w, &q, &t) < 1e-9);
        assert!(check_eta_selfadjoint(&w, &q, &t) < 1e-9);
        assert!(check_interh0h(&w, &g, &q, &t).unwrap() < 1e-9);
        assert!(check_h0_eigen_u(&w, &g, w.alpha()) < 1e-12);
        assert!(check_eta_intertwinings(&w, &q, &t) < 1e-9);
    }

    #[test]
    fn real_seed_identities_are_trivial() {
        let (w, q, t, g) = setup("poschl_teller", -1.0, 0.0);
        assert!(check_quasi_hermiticity(&w, &q, &t) < 1e-10);
        assert!(check_interh0h(&w, &g, &q, &t).unwrap() < 1e-10);
        assert!(check_eta_intertwinings(&w, &q, &t) < 1e-10);
    }

    #[test]
    fn poschl_teller_identities() {
        let (w, q, t, g) = setup("poschl_teller", -1.0, 1.0);
        assert!(check_quasi_hermiticity(&w, &q, &t) < 1e-8);
        assert!(check_interh0h(&w, &g, &q, &t).unwrap() < 1e-8);
        assert!(check_h0_eigen_u(&w, &g, w.alpha()) < 1e-9);
        assert!(check_eta_intertwinings(&w, &q, &t) < 1e-8);
    }

    #[test]
    fn diagonal_pairing_is_real() {
        let (w, q, t, _) = setup("poschl_teller", -1.0, 1.0);
        let eta = build_eta(&w);
        let v = q.inner(|x| t[0].value(x), |x| eta.apply_jet(t[0].jet(x), x).value());
        assert!(v.im.abs() < 1e-10 * v.norm());
    }

    #[test]
    fn wrong_alpha_residual_is_linear() {
        let (w, _, _, g) = setup("constant", -1.0, 1.0);
        let r = check_h0_eigen_u(&w, &g, w.alpha() + 1e-3);
        assert!((r - 1e-3).abs() < 1e-9, "{r}");
    }

    #[test]
    fn analytic_suite_passes_with_controls() {
        let g = grid(20.0, 401);
        let cfg = SuiteConfig { matrix: false, ..Default::default() };
        for entry in ["constant", "poschl_teller"] {
            let rs = run_analytic(entry, CatalogueParams::default(), &g, &cfg).unwrap();
            for r in &rs {
                assert!(r.passed, "{entry} {}: {:e} > {:e}", r.name, r.residual, r.tolerance);
            }
            assert!(rs.iter().filter(|r| r.name.starts_with("control_")).count() >= 5);
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let g = grid(10.0, 101);
        let cfg = SuiteConfig { n_tests: 4, ..Default::default() };
        let a = run_suite("poschl_teller", p(-1.0, 0.5), &g, &cfg).unwrap();
        let b = run_suite("poschl_teller", p(-1.0, 0.5), &g, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_d_is_rejected() {
        let g = grid(10.0, 101);
        assert!(matches!(run_suite("constant", p(0.0, 1.0), &g, &SuiteConfig::default()), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn matrix_suite_constant_entry() {
        let g = grid(20.0, 401);
        let cfg = SuiteConfig { rho_spectral: true, ..Default::default() };
        let rs = run_matrix("constant", p(-1.0, 0.5), &g, &cfg).unwrap();
        for r in &rs {
            eprintln!("{} {:e}", r.name, r.residual);
            assert!(r.passed, "{}: {:e} > {:e}", r.name, r.residual, r.tolerance);
        }
    }
}
