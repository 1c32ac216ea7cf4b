//! Dense matrices for the ladder operators, the metric `eta`, its square root,
//! the equivalent Hermitian `h`, the isometry `U` and the resolvent cross-check.
//!
//! Discretization. A grid with `N` nodes gives two `m = N - 1` dimensional spaces:
//!
//! * `Nodes`: values at `x_0 .. x_{N-2}` (the last node is the truncation point,
//!   where functions are closed off), weights `h/2, h, h, ...`;
//! * `Midpoints`: values at `x_{j+1/2}`, weights `h`.
//!
//! `L^dagger = D + w` maps `Nodes -> Midpoints` with the staggered row
//! `(A psi)_{j+1/2} = [e^{l(x_{j+1}) - l(x_{j+1/2})} psi_{j+1} - e^{l(x_j) - l(x_{j+1/2})} psi_j] / h`,
//! `l = log u`. It kills `1/u` exactly, like the continuum operator, and
//! needs no boundary row at 0 (the Robin condition is natural for it).
//! `L* = -D + w` is the conjugate of the weighted adjoint of `A`.
//!
//! Any phase can replace `Im l(x_{j+1/2})` without changing `eta = A^dagger A`
//! or the kernel; it is chosen row by row so that the diagonal of
//! `h0 = L^dagger L* + alpha` is real. Two one-entry closures do the same at
//! the ends: the corner entry of `A` at `X` (only when `Im alpha != 0`;
//! otherwise plain truncation) and `L*[0][0]`.
//!
//! All matrices are returned in symmetric coordinates (`sqrt(g_j) psi_j`), so
//! the discrete inner product is the Euclidean one and adjoints are
//! conjugate transposes.

use crate::error::{Error, Result};
use crate::grid::HalfLineGrid;
use crate::operators::{BoundaryCondition, LadderFlavor, LadderOperator};
use crate::transformation::{AsymptoticParams, CatalogueParams, Superpotential};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Space {
    Nodes,
    Midpoints,
}

/// Sample points of a discrete space.
pub fn space_points(grid: &HalfLineGrid, space: Space) -> Vec<f64> {
    let m = grid.len() - 1;
    match space {
        Space::Nodes => grid.nodes()[..m].to_vec(),
        Space::Midpoints => grid.midpoints(),
    }
}

/// Quadrature weights of a discrete space.
pub fn space_weights(grid: &HalfLineGrid, space: Space) -> Vec<f64> {
    let m = grid.len() - 1;
    let h = grid.spacing();
    let mut w = vec![h; m];
    if space == Space::Nodes {
        w[0] = 0.5 * h;
    }
    w
}

/// Symmetric coordinates `sqrt(g_j) f(x_j)`.
pub fn to_coords(f: impl Fn(f64) -> Complex64, grid: &HalfLineGrid, space: Space) -> DVector<Complex64> {
    let p = space_points(grid, space);
    let g = space_weights(grid, space);
    DVector::from_iterator(p.len(), p.iter().zip(&g).map(|(&x, &w)| w.sqrt() * f(x)))
}

/// Inverse of [`to_coords`]: values at the sample points.
pub fn from_coords(v: &DVector<Complex64>, grid: &HalfLineGrid, space: Space) -> Vec<Complex64> {
    let g = space_weights(grid, space);
    v.iter().zip(&g).map(|(c, w)| c / w.sqrt()).collect()
}

/// Dense matrix between two discrete spaces.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: CMatrix,
    grid: Arc<HalfLineGrid>,
    domain: Space,
    codomain: Space,
    boundary: Option<BoundaryCondition>,
    hermitian_hint: bool,
}

impl OperatorMatrix {
    pub fn new(
        entries: CMatrix,
        grid: Arc<HalfLineGrid>,
        domain: Space,
        codomain: Space,
        boundary: Option<BoundaryCondition>,
        hermitian_hint: bool,
    ) -> Result<Self> {
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NotPositiveDefinite("non-finite matrix entry".into()));
        }
        Ok(OperatorMatrix {
            entries,
            grid,
            domain,
            codomain,
            boundary,
            hermitian_hint,
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn grid(&self) -> &Arc<HalfLineGrid> {
        &self.grid
    }

    pub fn domain(&self) -> Space {
        self.domain
    }

    pub fn codomain(&self) -> Space {
        self.codomain
    }

    pub fn boundary(&self) -> Option<BoundaryCondition> {
        self.boundary
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `||M - M^dagger||_F / ||M||_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.entries)
    }

    /// Conjugate transpose (the discrete adjoint in symmetric coordinates).
    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            entries: self.entries.adjoint(),
            grid: self.grid.clone(),
            domain: self.codomain,
            codomain: self.domain,
            boundary: None,
            hermitian_hint: self.hermitian_hint,
        }
    }
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        (m - m.adjoint()).norm() / n
    }
}

fn check_same(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<()> {
    if a.dim() != b.dim() || !(Arc::ptr_eq(&a.grid, &b.grid) || *a.grid == *b.grid) {
        return Err(Error::ShapeMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ladder discretization

/// Staggered ladder matrices for one superpotential on one grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Arc<HalfLineGrid>,
    alpha: Complex64,
    robin: Complex64,
    /// `L^dagger`, Nodes -> Midpoints, symmetric coordinates.
    b: CMatrix,
    /// `L*`, Midpoints -> Nodes, symmetric coordinates.
    c: CMatrix,
    far_closure: bool,
}

impl Discretization {
    pub fn new(w: &Superpotential, grid: &Arc<HalfLineGrid>) -> Result<Self> {
        let n = grid.len();
        let m = n - 1;
        let h = grid.spacing();
        let x = grid.nodes();
        let mids = grid.midpoints();
        let l_nodes: Vec<Complex64> = x.iter().map(|&t| w.log_u(t).value()).collect();
        let mut l_mid: Vec<Complex64> = mids.iter().map(|&t| w.log_u(t).value()).collect();
        let alpha = w.alpha();
        // row phases: Im l_mid is a free gauge (eta does not see it); pick it so
        // that every diagonal entry of h0 is real
        for j in 0..m {
            let s = (2.0 * (l_nodes[j] - l_mid[j].re)).exp() + (2.0 * (l_nodes[j + 1] - l_mid[j].re)).exp();
            let r = alpha.im * h * h / s.norm();
            if r.abs() <= 1.0 {
                let mut psi = 0.5 * (s.arg() + r.asin());
                psi += PI * ((l_mid[j].im - psi) / PI).round();
                l_mid[j].im = psi;
            }
        }
        let mut a = CMatrix::zeros(m, m);
        for j in 0..m {
            a[(j, j)] = -(l_nodes[j] - l_mid[j]).exp() / h;
            if j + 1 < m {
                a[(j, j + 1)] = (l_nodes[j + 1] - l_mid[j]).exp() / h;
            }
        }
        // far corner: Im h0[m-1][m-1] = 0 given |A[m-1][m-1]|^2 + alpha on the diagonal
        let mut far_closure = false;
        if m >= 2 && alpha.im != 0.0 {
            let theta = -2.0 * a[(m - 2, m - 1)].arg();
            let r2 = -alpha.im / theta.sin();
            if theta.sin().abs() > 1e-12 && r2.is_finite() && r2 > 0.0 {
                a[(m - 1, m - 1)] = -r2.sqrt() * Complex64::from_polar(1.0, 0.5 * theta);
                far_closure = true;
            }
        }
        let gh = space_weights(grid, Space::Nodes);
        let gl = space_weights(grid, Space::Midpoints);
        // raw L* = conj of the weighted adjoint: C = G_H^{-1} A^T G_L
        let mut c = CMatrix::from_fn(m, m, |i, j| a[(j, i)] * gl[j] / gh[i]);
        let t = a[(0, 1)] * c[(1, 0)] + alpha;
        let diag = 2.0 * a[(0, 0)] * a[(0, 0)];
        c[(0, 0)] = Complex64::new(diag.re, -t.im) / a[(0, 0)];
        let b = CMatrix::from_fn(m, m, |i, j| a[(i, j)] * (gl[i] / gh[j]).sqrt());
        let cs = CMatrix::from_fn(m, m, |i, j| c[(i, j)] * (gh[i] / gl[j]).sqrt());
        Ok(Discretization {
            grid: grid.clone(),
            alpha,
            robin: w.w(0.0),
            b,
            c: cs,
            far_closure,
        })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn grid(&self) -> &Arc<HalfLineGrid> {
        &self.grid
    }

    /// Whether the far-corner closure was applied.
    pub fn far_closure(&self) -> bool {
        self.far_closure
    }

    fn op(&self, entries: CMatrix, domain: Space, codomain: Space, bc: Option<BoundaryCondition>, herm: bool) -> OperatorMatrix {
        OperatorMatrix {
            entries,
            grid: self.grid.clone(),
            domain,
            codomain,
            boundary: bc,
            hermitian_hint: herm,
        }
    }

    pub fn l_dagger(&self) -> OperatorMatrix {
        self.op(self.b.clone(), Space::Nodes, Space::Midpoints, Some(BoundaryCondition::Robin(self.robin)), false)
    }

    pub fn l(&self) -> OperatorMatrix {
        self.op(self.b.adjoint(), Space::Midpoints, Space::Nodes, Some(BoundaryCondition::Dirichlet), false)
    }

    pub fn l_star(&self) -> OperatorMatrix {
        self.op(self.c.clone(), Space::Midpoints, Space::Nodes, Some(BoundaryCondition::Dirichlet), false)
    }

    pub fn l_star_dagger(&self) -> OperatorMatrix {
        self.op(self.c.adjoint(), Space::Nodes, Space::Midpoints, Some(BoundaryCondition::Robin(self.robin.conj())), false)
    }

    /// `eta = L L^dagger` on `Nodes`.
    pub fn eta(&self) -> OperatorMatrix {
        self.op(self.b.adjoint() * &self.b, Space::Nodes, Space::Nodes, Some(BoundaryCondition::Robin(self.robin)), true)
    }

    /// `eta0 = L^dagger L` on `Midpoints`.
    pub fn eta0(&self) -> OperatorMatrix {
        self.op(&self.b * self.b.adjoint(), Space::Midpoints, Space::Midpoints, Some(BoundaryCondition::Dirichlet), true)
    }

    /// `H = L* L^dagger + alpha` on `Nodes`.
    pub fn h(&self) -> OperatorMatrix {
        let mut e = &self.c * &self.b;
        for i in 0..e.nrows() {
            e[(i, i)] += self.alpha;
        }
        self.op(e, Space::Nodes, Space::Nodes, Some(BoundaryCondition::Robin(self.robin)), false)
    }

    /// `h0 = L^dagger L* + alpha` on `Midpoints`.
    pub fn h0(&self) -> OperatorMatrix {
        let mut e = &self.b * &self.c;
        for i in 0..e.nrows() {
            e[(i, i)] += self.alpha;
        }
        self.op(e, Space::Midpoints, Space::Midpoints, Some(BoundaryCondition::Dirichlet), false)
    }
}

/// Matrix of one ladder operator.
pub fn discretize_ladder(op: &LadderOperator, grid: &Arc<HalfLineGrid>) -> Result<OperatorMatrix> {
    let d = Discretization::new(op.superpotential(), grid)?;
    Ok(match op.flavor() {
        LadderFlavor::L => d.l(),
        LadderFlavor::LDagger => d.l_dagger(),
        LadderFlavor::LStar => d.l_star(),
        LadderFlavor::LStarDagger => d.l_star_dagger(),
    })
}

/// Ratio `lambda_min / lambda_max` below which `eta` counts as singular.
pub const KERNEL_RATIO: f64 = 1e-10;

/// Factorized `eta = L L^dagger`; fails on a near kernel.
pub fn assemble_eta_matrix(w: &Superpotential, grid: &Arc<HalfLineGrid>) -> Result<OperatorMatrix> {
    let eta = Discretization::new(w, grid)?.eta();
    let ev = eta.entries.symmetric_eigenvalues();
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if lo < KERNEL_RATIO * hi {
        return Err(Error::KernelDetected { ratio: lo / hi });
    }
    Ok(eta)
}

// ---------------------------------------------------------------------------
// square root, h, U

/// `rho = eta^{1/2}` and friends.
#[derive(Debug, Clone)]
pub struct MetricSqrt {
    rho: CMatrix,
    rho_inverse: CMatrix,
    /// Eigenvalues of `eta`, ascending.
    eta_eigenvalues: Vec<f64>,
    /// `||rho rho - eta||_F / ||eta||_F`.
    reconstruction_error: f64,
    grid: Arc<HalfLineGrid>,
}

impl MetricSqrt {
    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn rho_inverse(&self) -> &CMatrix {
        &self.rho_inverse
    }

    pub fn eta_eigenvalues(&self) -> &[f64] {
        &self.eta_eigenvalues
    }

    /// Smallest eigenvalue of `eta`.
    pub fn eigen_floor(&self) -> f64 {
        self.eta_eigenvalues[0]
    }

    /// `cond(rho) = sqrt(lambda_max / lambda_min)` of `eta`.
    pub fn condition_number(&self) -> f64 {
        (self.eta_eigenvalues[self.eta_eigenvalues.len() - 1] / self.eta_eigenvalues[0]).sqrt()
    }

    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    pub fn grid(&self) -> &Arc<HalfLineGrid> {
        &self.grid
    }
}

/// Sorted eigenpairs of a Hermitian matrix.
fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// `Q f(Lambda) Q^dagger`.
fn spectral_function(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = vecs.clone();
    for (c, &v) in vals.iter().enumerate() {
        let s = f(v);
        scaled.column_mut(c).scale_mut(s);
    }
    scaled * vecs.adjoint()
}

/// Hermitian positive square root by eigendecomposition.
pub fn hermitian_sqrt(eta: &OperatorMatrix) -> Result<MetricSqrt> {
    let e = &eta.entries;
    if e.nrows() != e.ncols() {
        return Err(Error::ShapeMismatch("metric must be square".into()));
    }
    let res = hermiticity_residual(e);
    if res > 1e-12 {
        return Err(Error::NotPositiveDefinite(format!("not Hermitian (residual {res:e})")));
    }
    let (vals, vecs) = hermitian_eigen(e);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {}", vals[0])));
    }
    let rho = spectral_function(&vals, &vecs, f64::sqrt);
    let rho_inverse = spectral_function(&vals, &vecs, |v| 1.0 / v.sqrt());
    let reconstruction_error = (&rho * &rho - e).norm() / e.norm();
    Ok(MetricSqrt {
        rho,
        rho_inverse,
        eta_eigenvalues: vals,
        reconstruction_error,
        grid: eta.grid.clone(),
    })
}

/// `h = rho H rho^{-1}` with its diagnostics.
#[derive(Debug, Clone)]
pub struct EquivalentHamiltonian {
    pub h: OperatorMatrix,
    /// `||h - h^dagger|| / ||h||`.
    pub hermiticity_residual: f64,
    /// `||rho H rho^{-1} - rho^{-1} H^dagger rho|| / ||h||`.
    pub similarity_gap: f64,
}

pub fn equivalent_h(rho: &MetricSqrt, h_mat: &OperatorMatrix) -> Result<EquivalentHamiltonian> {
    if rho.rho.nrows() != h_mat.dim() {
        return Err(Error::ShapeMismatch("rho and H differ in size".into()));
    }
    let h = &rho.rho * &h_mat.entries * &rho.rho_inverse;
    let other = &rho.rho_inverse * h_mat.entries.adjoint() * &rho.rho;
    let nh = h.norm();
    let similarity_gap = (&h - other).norm() / nh;
    let hermiticity_residual = hermiticity_residual(&h);
    Ok(EquivalentHamiltonian {
        h: OperatorMatrix {
            entries: h,
            grid: h_mat.grid.clone(),
            domain: Space::Nodes,
            codomain: Space::Nodes,
            boundary: None,
            hermitian_hint: false,
        },
        hermiticity_residual,
        similarity_gap,
    })
}

/// Isometry with its defect `||U^dagger U - I||_F / ||I||_F`.
#[derive(Debug, Clone)]
pub struct Isometry {
    pub u: OperatorMatrix,
    pub defect: f64,
}

fn isometry_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u - CMatrix::identity(n, n);
    g.norm() / (n as f64).sqrt()
}

/// `U = L eta0^{-1/2}`.
pub fn isometry_from_eta0(l_mat: &OperatorMatrix, eta0: &OperatorMatrix) -> Result<Isometry> {
    check_same(l_mat, eta0)?;
    let (vals, vecs) = hermitian_eigen(&eta0.entries);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("eta0 smallest eigenvalue {}", vals[0])));
    }
    let inv_sqrt = spectral_function(&vals, &vecs, |v| 1.0 / v.sqrt());
    let u = &l_mat.entries * inv_sqrt;
    let defect = isometry_defect(&u);
    Ok(Isometry {
        u: OperatorMatrix {
            entries: u,
            grid: l_mat.grid.clone(),
            domain: Space::Midpoints,
            codomain: Space::Nodes,
            boundary: None,
            hermitian_hint: false,
        },
        defect,
    })
}

fn shifted_inverse(h0: &CMatrix, z: Complex64) -> Result<CMatrix> {
    let mut s = h0.clone();
    for i in 0..s.nrows() {
        s[(i, i)] -= z;
    }
    s.try_inverse()
        .ok_or(Error::AlphaOnSpectrum {
            alpha_re: z.re,
            alpha_im: z.im,
            distance: 0.0,
        })
}

/// `U = rho L* (h0 - alpha)^{-1}`.
pub fn isometry_from_resolvent(
    rho: &MetricSqrt,
    l_star: &OperatorMatrix,
    h0: &OperatorMatrix,
    alpha: Complex64,
) -> Result<Isometry> {
    check_same(l_star, h0)?;
    let r = shifted_inverse(&h0.entries, alpha)?;
    let u = &rho.rho * &l_star.entries * r;
    let defect = isometry_defect(&u);
    Ok(Isometry {
        u: OperatorMatrix {
            entries: u,
            grid: h0.grid.clone(),
            domain: Space::Midpoints,
            codomain: Space::Nodes,
            boundary: None,
            hermitian_hint: false,
        },
        defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ResolventBranch {
    Complex,
    LHospital,
}

/// `h` rebuilt from the resolvent of `h0`.
#[derive(Debug, Clone)]
pub struct ResolventHamiltonian {
    pub h: OperatorMatrix,
    pub branch: ResolventBranch,
    /// `||h0 - alpha||_F ||(h0 - alpha)^{-1}||_F`.
    pub condition: f64,
}

/// Tolerance for treating `alpha` as real.
const REAL_ALPHA_TOL: f64 = 1e-14;

/// Eigenvalues of the Hermitian part of `h0`, ascending.
pub fn h0_spectrum(h0: &OperatorMatrix) -> Vec<f64> {
    let herm = (&h0.entries + h0.entries.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `h = rho L* [alpha (h0-alpha)^{-1} - conj(alpha) (h0-conj(alpha))^{-1}] / (alpha - conj(alpha)) (L*)^dagger rho`
/// for complex `alpha`; `rho L* h0 (h0 - alpha)^{-2} (L*)^dagger rho` for real `alpha`.
/// A real `alpha` on (or above the bottom of) the `h0` spectrum is rejected.
pub fn h_via_resolvent(
    rho: &MetricSqrt,
    l_star: &OperatorMatrix,
    h0: &OperatorMatrix,
    alpha: Complex64,
) -> Result<ResolventHamiltonian> {
    check_same(l_star, h0)?;
    let n = h0.dim();
    let real = alpha.im.abs() <= REAL_ALPHA_TOL * alpha.norm().max(1.0);
    let (mid, branch, condition) = if real {
        let a = alpha.re;
        let eigs = h0_spectrum(h0);
        let distance = eigs.iter().map(|l| (l - a).abs()).fold(f64::INFINITY, f64::min);
        let gap = 1e-10 * eigs.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(1.0);
        // the continuum of h0 is [0, inf): any real alpha >= min(0, lambda_min) sits on it
        if a >= eigs[0].min(0.0) - gap || distance <= gap {
            return Err(Error::AlphaOnSpectrum {
                alpha_re: a,
                alpha_im: alpha.im,
                distance,
            });
        }
        let r = shifted_inverse(&h0.entries, Complex64::new(a, 0.0))?;
        let cond = shifted_norm(&h0.entries, Complex64::new(a, 0.0)) * r.norm();
        (&h0.entries * &r * &r, ResolventBranch::LHospital, cond)
    } else {
        let r1 = shifted_inverse(&h0.entries, alpha)?;
        let r2 = shifted_inverse(&h0.entries, alpha.conj())?;
        let cond = shifted_norm(&h0.entries, alpha) * r1.norm();
        let m = (r1 * alpha - r2 * alpha.conj()) / (alpha - alpha.conj());
        (m, ResolventBranch::Complex, cond)
    };
    let ls = &l_star.entries;
    let h = &rho.rho * ls * mid * ls.adjoint() * &rho.rho;
    debug_assert_eq!(h.nrows(), n);
    Ok(ResolventHamiltonian {
        h: OperatorMatrix {
            entries: h,
            grid: h0.grid.clone(),
            domain: Space::Nodes,
            codomain: Space::Nodes,
            boundary: None,
            hermitian_hint: false,
        },
        branch,
        condition,
    })
}

fn shifted_norm(m: &CMatrix, z: Complex64) -> f64 {
    let mut s = m.clone();
    for i in 0..s.nrows() {
        s[(i, i)] -= z;
    }
    s.norm()
}

// ---------------------------------------------------------------------------
// full pipeline and probe

/// Summary numbers of one metric pipeline run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub x_max: f64,
    pub eta_hermiticity: f64,
    pub sqrt_reconstruction: f64,
    pub lambda_min: f64,
    pub cond_rho: f64,
    pub r_h: f64,
    pub similarity_gap: f64,
    /// `None` when the resolvent branch refused `alpha`.
    pub resolvent_agreement: Option<f64>,
    pub resolvent_branch: Option<ResolventBranch>,
    pub resolvent_condition: Option<f64>,
    pub isometry_defect_eta0: f64,
    pub isometry_defect_resolvent: Option<f64>,
    /// `||U_eta0 - U_resolvent||_F / ||U_eta0||_F`.
    pub isometry_agreement: Option<f64>,
}

/// Matrices kept from a pipeline run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub disc: Discretization,
    pub eta: OperatorMatrix,
    pub sqrt: MetricSqrt,
    pub h_mat: OperatorMatrix,
    pub h0_mat: OperatorMatrix,
    pub equivalent: EquivalentHamiltonian,
    pub resolvent: Result<ResolventHamiltonian>,
    pub report: PipelineReport,
}

/// Assemble everything for one superpotential.
pub fn run_pipeline(w: &Superpotential, grid: &Arc<HalfLineGrid>) -> Result<Pipeline> {
    let disc = Discretization::new(w, grid)?;
    let eta = disc.eta();
    let sqrt = hermitian_sqrt(&eta)?;
    let lo = sqrt.eigen_floor();
    let hi = sqrt.eta_eigenvalues()[sqrt.eta_eigenvalues().len() - 1];
    if lo < KERNEL_RATIO * hi {
        return Err(Error::KernelDetected { ratio: lo / hi });
    }
    let h_mat = disc.h();
    let h0_mat = disc.h0();
    let equivalent = equivalent_h(&sqrt, &h_mat)?;
    let l_star = disc.l_star();
    let resolvent = h_via_resolvent(&sqrt, &l_star, &h0_mat, disc.alpha());
    let nh = equivalent.h.entries.norm();
    let u_eta0 = isometry_from_eta0(&disc.l(), &disc.eta0())?;
    let u_res = isometry_from_resolvent(&sqrt, &l_star, &h0_mat, disc.alpha()).ok();
    let report = PipelineReport {
        n: grid.len(),
        x_max: grid.x_max(),
        eta_hermiticity: eta.hermiticity_residual(),
        sqrt_reconstruction: sqrt.reconstruction_error(),
        lambda_min: lo,
        cond_rho: sqrt.condition_number(),
        r_h: equivalent.hermiticity_residual,
        similarity_gap: equivalent.similarity_gap,
        resolvent_agreement: resolvent
            .as_ref()
            .ok()
            .map(|r| (&r.h.entries - &equivalent.h.entries).norm() / nh),
        resolvent_branch: resolvent.as_ref().ok().map(|r| r.branch),
        resolvent_condition: resolvent.as_ref().ok().map(|r| r.condition),
        isometry_defect_eta0: u_eta0.defect,
        isometry_defect_resolvent: u_res.as_ref().map(|u| u.defect),
        isometry_agreement: u_res
            .as_ref()
            .map(|u| (&u.u.entries - &u_eta0.u.entries).norm() / u_eta0.u.entries.norm()),
    };
    Ok(Pipeline {
        disc,
        eta,
        sqrt,
        h_mat,
        h0_mat,
        equivalent,
        resolvent,
        report,
    })
}

/// Factor over the first probe point's `cond(rho)` that flags a row as near-singular.
pub const NEAR_SINGULAR_FACTOR: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ProbeRow {
    pub d: f64,
    pub cond_rho: f64,
    pub r_h: f64,
    pub resolvent_agreement: Option<f64>,
    pub resolvent_condition: Option<f64>,
    pub near_singular: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ProbeReport {
    pub b: f64,
    pub rows: Vec<ProbeRow>,
    pub cond_increasing: bool,
    pub r_h_increasing: bool,
    pub agreement_increasing: bool,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] > p[0])
}

/// Run the pipeline for each `d` (strictly negative, `|d|` decreasing) at fixed `b`.
pub fn spectral_singularity_probe(
    entry: &str,
    base: CatalogueParams,
    d_sequence: &[f64],
    grid: &Arc<HalfLineGrid>,
) -> Result<ProbeReport> {
    if d_sequence.is_empty() {
        return Err(Error::InvalidParams("empty d sequence".into()));
    }
    for d in d_sequence {
        AsymptoticParams::new(*d, base.b)?;
    }
    if !d_sequence.windows(2).all(|p| p[1] > p[0]) {
        return Err(Error::InvalidParams("d sequence must approach 0 from below".into()));
    }
    let rows: Vec<Result<ProbeRow>> = d_sequence
        .par_iter()
        .map(|&d| {
            let u = crate::transformation::catalogue(entry, CatalogueParams { d, ..base })?;
            let w = Superpotential::from_transformation(&u, grid)?;
            let p = run_pipeline(&w, grid)?;
            Ok(ProbeRow {
                d,
                cond_rho: p.report.cond_rho,
                r_h: p.report.r_h,
                resolvent_agreement: p.report.resolvent_agreement,
                resolvent_condition: p.report.resolvent_condition,
                near_singular: false,
            })
        })
        .collect();
    let mut rows: Vec<ProbeRow> = rows.into_iter().collect::<Result<_>>()?;
    let reference = rows[0].cond_rho;
    for r in rows.iter_mut() {
        r.near_singular = r.cond_rho >= NEAR_SINGULAR_FACTOR * reference;
    }
    let cond: Vec<f64> = rows.iter().map(|r| r.cond_rho).collect();
    let rh: Vec<f64> = rows.iter().map(|r| r.r_h).collect();
    let agree: Option<Vec<f64>> = rows.iter().map(|r| r.resolvent_agreement).collect();
    Ok(ProbeReport {
        b: base.b,
        cond_increasing: strictly_increasing(&cond),
        r_h_increasing: strictly_increasing(&rh),
        agreement_increasing: agree.map(|a| strictly_increasing(&a)).unwrap_or(false),
        rows,
    })
}
