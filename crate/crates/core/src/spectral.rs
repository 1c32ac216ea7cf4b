//! Continuum eigenfunctions: closed forms for the constant seed, an inward
//! scattering solver, Darboux maps between `eta_bar0` and `eta_bar`, and the
//! phase map `e^{-i omega}` onto `eta`.
//!
//! States keep values and first derivatives at the nodes; second derivatives
//! follow from the eigen-equation, so the Darboux maps involve no differencing.
//!
//! Normalization: tail amplitude `sqrt(2/pi)`, i.e. `c1^2 + c2^2 = 2/pi` for
//! `psi ~ c1 cos kx + c2 sin kx`. With complex coefficients (complex `H`) the
//! same complex-square rule reproduces the `(k^2 - alpha)^{-1/2}` factors.

use crate::error::{Error, Result};
use crate::grid::{derivative, inner_product, GridFunction, HalfLineGrid};
use crate::operators::{OperatorKind, SchrodingerOperator};
use crate::transformation::{CatalogueEntry, Superpotential, TransformationFunction};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Normalization {
    DeltaNormalized,
    Box,
    Raw,
}

/// Continuum eigenfunction on the grid.
#[derive(Debug, Clone)]
pub struct ScatteringState {
    kind: OperatorKind,
    k: f64,
    eigenvalue: Complex64,
    values: GridFunction,
    derivs: GridFunction,
    normalization: Normalization,
}

impl ScatteringState {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn eigenvalue(&self) -> Complex64 {
        self.eigenvalue
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn derivs(&self) -> &GridFunction {
        &self.derivs
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn grid(&self) -> &Arc<HalfLineGrid> {
        self.values.grid()
    }

    /// `|B(psi)| / max |psi|` for the boundary functional of `op`.
    pub fn boundary_residual(&self, op: &SchrodingerOperator) -> f64 {
        let b = op
            .boundary()
            .functional(self.values.values()[0], self.derivs.values()[0]);
        b.norm() / self.values.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Discrete `||(op - lambda) psi|| / ||psi||` over interior nodes; `psi''`
    /// comes from differencing the stored `psi'`.
    pub fn eigen_residual(&self, op: &SchrodingerOperator) -> Result<f64> {
        let dd = derivative(&self.derivs, 1)?;
        let x = self.grid().nodes();
        let n = x.len();
        let (mut num, mut den) = (0.0, 0.0);
        for (j, &xj) in x.iter().enumerate().take(n - 3).skip(3) {
            let psi = [self.values.values()[j], self.derivs.values()[j], dd.values()[j]];
            let r = op.apply_values(xj, psi) - self.eigenvalue * psi[0];
            num += r.norm_sqr();
            den += psi[0].norm_sqr();
        }
        Ok((num / den.max(f64::MIN_POSITIVE)).sqrt())
    }
}

/// Uniform momentum grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid {
            k_min: 0.01,
            k_max: 10.0,
            n_k: 400,
        }
    }
}

impl KGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_min > 0.0 && self.k_max > self.k_min && self.n_k >= 2) {
            return Err(Error::InvalidParams(format!(
                "k grid needs 0 < k_min < k_max and n_k >= 2, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let dk = (self.k_max - self.k_min) / (self.n_k - 1) as f64;
        (0..self.n_k).map(|i| self.k_min + i as f64 * dk).collect()
    }

    /// Trapezoid weights over the points.
    pub fn weights(&self) -> Vec<f64> {
        let dk = (self.k_max - self.k_min) / (self.n_k - 1) as f64;
        (0..self.n_k)
            .map(|i| if i == 0 || i == self.n_k - 1 { 0.5 * dk } else { dk })
            .collect()
    }
}

fn make_state(
    kind: OperatorKind,
    k: f64,
    eigenvalue: Complex64,
    grid: &Arc<HalfLineGrid>,
    f: impl Fn(f64) -> (Complex64, Complex64),
    normalization: Normalization,
) -> Result<ScatteringState> {
    let (v, d): (Vec<_>, Vec<_>) = grid.nodes().iter().map(|&x| f(x)).unzip();
    Ok(ScatteringState {
        kind,
        k,
        eigenvalue,
        values: GridFunction::new(grid.clone(), v)?,
        derivs: GridFunction::new(grid.clone(), d)?,
        normalization,
    })
}

/// Closed-form states of the constant seed `u = e^{(d+ib)x}`.
///
/// `kind` is one of `Eta0Bar`, `EtaBar`, `Eta`, `H0`, `H`.
pub fn analytic_states_constant(
    kind: OperatorKind,
    k: f64,
    u: &TransformationFunction,
    grid: &Arc<HalfLineGrid>,
) -> Result<ScatteringState> {
    if *u.entry() != CatalogueEntry::Constant {
        return Err(Error::WrongEntry(u.entry().name().to_string()));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::InvalidParams(format!("k must be >= 0, got {k}")));
    }
    let p = u.params();
    let (d, b) = (p.d(), p.b());
    let n = (2.0 / PI).sqrt();
    let lam = k * k + d * d;
    let c = |v: f64| Complex64::new(v, 0.0);
    let sine = move |x: f64| (c(n * (k * x).sin()), c(n * k * (k * x).cos()));
    let bar = move |x: f64| {
        let s = n / lam.sqrt();
        let (sn, cs) = ((k * x).sin(), (k * x).cos());
        (
            c(s * (d * sn - k * cs)),
            c(s * (d * k * cs + k * k * sn)),
        )
    };
    match kind {
        OperatorKind::Eta0Bar => make_state(kind, k, c(lam), grid, sine, Normalization::DeltaNormalized),
        OperatorKind::H0 => make_state(kind, k, c(k * k), grid, sine, Normalization::DeltaNormalized),
        OperatorKind::EtaBar => make_state(kind, k, c(lam), grid, bar, Normalization::DeltaNormalized),
        OperatorKind::Eta => make_state(
            kind,
            k,
            c(lam),
            grid,
            move |x| {
                let (v, dv) = bar(x);
                let ph = (-I * b * x).exp();
                (ph * v, ph * (dv - I * b * v))
            },
            Normalization::DeltaNormalized,
        ),
        OperatorKind::H => {
            // phi = (k^2 - alpha)^{-1/2} L* psi_k with psi_k = sqrt(2/pi) sin kx
            let kappa = p.kappa();
            let s = n / (k * k - p.alpha()).sqrt();
            make_state(
                kind,
                k,
                c(k * k),
                grid,
                move |x| {
                    let (sn, cs) = ((k * x).sin(), (k * x).cos());
                    (
                        s * (kappa * sn - k * cs),
                        s * (kappa * k * cs + k * k * sn),
                    )
                },
                Normalization::DeltaNormalized,
            )
        }
        other => Err(Error::InvalidParams(format!("no closed form for {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// inward integration

type State4 = [Complex64; 4];

fn axpy(y: &State4, h: f64, ks: &[(&State4, f64)]) -> State4 {
    let mut out = *y;
    for (k, c) in ks {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Dormand-Prince 5(4) from `x0` to `x1` for `y'' = q(x) y`, two solutions at once.
fn dp45(q: &dyn Fn(f64) -> Complex64, x0: f64, y0: State4, x1: f64, tol: f64) -> State4 {
    let rhs = |x: f64, y: &State4| -> State4 {
        let qx = q(x);
        [y[1], qx * y[0], y[3], qx * y[2]]
    };
    let span = x1 - x0;
    let dir = span.signum();
    let mut h = span / 4.0;
    let mut x = x0;
    let mut y = y0;
    while (x1 - x) * dir > 1e-15 * span.abs().max(1.0) {
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        let k1 = rhs(x, &y);
        let k2 = rhs(x + h / 5.0, &axpy(&y, h, &[(&k1, 1.0 / 5.0)]));
        let k3 = rhs(
            x + 3.0 * h / 10.0,
            &axpy(&y, h, &[(&k1, 3.0 / 40.0), (&k2, 9.0 / 40.0)]),
        );
        let k4 = rhs(
            x + 4.0 * h / 5.0,
            &axpy(&y, h, &[(&k1, 44.0 / 45.0), (&k2, -56.0 / 15.0), (&k3, 32.0 / 9.0)]),
        );
        let k5 = rhs(
            x + 8.0 * h / 9.0,
            &axpy(
                &y,
                h,
                &[
                    (&k1, 19372.0 / 6561.0),
                    (&k2, -25360.0 / 2187.0),
                    (&k3, 64448.0 / 6561.0),
                    (&k4, -212.0 / 729.0),
                ],
            ),
        );
        let k6 = rhs(
            x + h,
            &axpy(
                &y,
                h,
                &[
                    (&k1, 9017.0 / 3168.0),
                    (&k2, -355.0 / 33.0),
                    (&k3, 46732.0 / 5247.0),
                    (&k4, 49.0 / 176.0),
                    (&k5, -5103.0 / 18656.0),
                ],
            ),
        );
        let y5 = axpy(
            &y,
            h,
            &[
                (&k1, 35.0 / 384.0),
                (&k3, 500.0 / 1113.0),
                (&k4, 125.0 / 192.0),
                (&k5, -2187.0 / 6784.0),
                (&k6, 11.0 / 84.0),
            ],
        );
        let k7 = rhs(x + h, &y5);
        let e = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let mut ei = Complex64::new(0.0, 0.0);
            for (c, k) in e.iter().zip(ks.iter()) {
                ei += h * c * k[i];
            }
            let sc = tol * (1.0 + y[i].norm().max(y5[i].norm()));
            err = err.max(ei.norm() / sc);
        }
        if err <= 1.0 {
            x += h;
            y = y5;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    y
}

/// Relative tail spread tolerated before declaring `NoDecay`.
pub const TAIL_FLATNESS_TOL: f64 = 1e-6;

/// Integrate `(op - lambda) psi = 0` inward from `X` with `lambda = k^2 + V(X)`,
/// then combine the `cos` / `sin` tail solutions to meet the boundary condition.
pub fn solve_scattering(
    op: &SchrodingerOperator,
    k: f64,
    grid: &Arc<HalfLineGrid>,
) -> Result<ScatteringState> {
    if op.has_drift() {
        return Err(Error::DriftUnsupported);
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParams(format!("k must be positive, got {k}")));
    }
    let x = grid.nodes();
    let n = x.len();
    let xmax = x[n - 1];
    let v_inf = op.total_potential(xmax);
    let spread = grid
        .tail_range()
        .map(|j| (op.total_potential(x[j]) - v_inf).norm())
        .fold(0.0, f64::max);
    if spread > TAIL_FLATNESS_TOL * v_inf.norm().max(1.0) {
        return Err(Error::NoDecay { spread });
    }
    let lambda = v_inf + k * k;
    let q = |t: f64| op.total_potential(t) - lambda;
    let c = |v: f64| Complex64::new(v, 0.0);
    let mut ys = vec![[Complex64::new(0.0, 0.0); 4]; n];
    ys[n - 1] = [
        c((k * xmax).cos()),
        c(-k * (k * xmax).sin()),
        c((k * xmax).sin()),
        c(k * (k * xmax).cos()),
    ];
    for j in (0..n - 1).rev() {
        ys[j] = dp45(&q, x[j + 1], ys[j + 1], x[j], 1e-12);
    }
    let bc = op.boundary();
    let b1 = bc.functional(ys[0][0], ys[0][1]);
    let b2 = bc.functional(ys[0][2], ys[0][3]);
    let norm2 = b1 * b1 + b2 * b2;
    let scale = b1.norm_sqr() + b2.norm_sqr();
    if scale == 0.0 || norm2.norm() < 1e-12 * scale {
        return Err(Error::MatchFailure(format!(
            "boundary functionals ({b1}, {b2}) give no normalizable combination"
        )));
    }
    // psi = c1 y1 + c2 y2 with c ~ (b2, -b1), c1^2 + c2^2 = 2/pi
    let s = (2.0 / PI / norm2).sqrt();
    let (mut c1, mut c2) = (s * b2, -s * b1);
    let flip = if c2.re.abs() > 1e-12 * c2.norm().max(c1.norm()) {
        c2.re < 0.0
    } else {
        c1.re < 0.0
    };
    if flip {
        c1 = -c1;
        c2 = -c2;
    }
    let values = ys.iter().map(|y| c1 * y[0] + c2 * y[2]).collect();
    let derivs = ys.iter().map(|y| c1 * y[1] + c2 * y[3]).collect();
    Ok(ScatteringState {
        kind: op.kind(),
        k,
        eigenvalue: lambda,
        values: GridFunction::new(grid.clone(), values)?,
        derivs: GridFunction::new(grid.clone(), derivs)?,
        normalization: Normalization::DeltaNormalized,
    })
}

// ---------------------------------------------------------------------------
// maps between partners

fn real_lambda(state: &ScatteringState) -> Result<f64> {
    let lam = state.eigenvalue;
    if lam.norm() < 1e-12 {
        return Err(Error::ZeroMode { lambda: lam.norm() });
    }
    if lam.im.abs() > 1e-12 * lam.norm() {
        return Err(Error::InvalidParams(format!("Darboux map needs a real eigenvalue, got {lam}")));
    }
    Ok(lam.re)
}

/// `Psi = lambda^{-1/2} (-D + W) Psi0`: `eta_bar0` state to `eta_bar` state.
pub fn darboux_map_forward(state: &ScatteringState, w: &Superpotential) -> Result<ScatteringState> {
    if state.kind != OperatorKind::Eta0Bar {
        return Err(Error::InvalidParams(format!("expected an eta_bar0 state, got {:?}", state.kind)));
    }
    let lam = real_lambda(state)?;
    let s = 1.0 / lam.sqrt();
    let grid = state.grid().clone();
    let (v, d): (Vec<_>, Vec<_>) = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let (p, dp) = (state.values.values()[j], state.derivs.values()[j]);
            let big_w = w.big_w(x);
            (s * (-dp + big_w * p), s * ((lam - big_w * big_w) * p + big_w * dp))
        })
        .unzip();
    Ok(ScatteringState {
        kind: OperatorKind::EtaBar,
        k: state.k,
        eigenvalue: state.eigenvalue,
        values: GridFunction::new(grid.clone(), v)?,
        derivs: GridFunction::new(grid, d)?,
        normalization: state.normalization,
    })
}

/// `Psi0 = lambda^{-1/2} (D + W) Psi`: `eta_bar` state to `eta_bar0` state.
pub fn darboux_map_backward(state: &ScatteringState, w: &Superpotential) -> Result<ScatteringState> {
    if state.kind != OperatorKind::EtaBar {
        return Err(Error::InvalidParams(format!("expected an eta_bar state, got {:?}", state.kind)));
    }
    let lam = real_lambda(state)?;
    let s = 1.0 / lam.sqrt();
    let grid = state.grid().clone();
    let (v, d): (Vec<_>, Vec<_>) = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let (p, dp) = (state.values.values()[j], state.derivs.values()[j]);
            let big_w = w.big_w(x);
            (s * (dp + big_w * p), s * ((big_w * big_w - lam) * p + big_w * dp))
        })
        .unzip();
    Ok(ScatteringState {
        kind: OperatorKind::Eta0Bar,
        k: state.k,
        eigenvalue: state.eigenvalue,
        values: GridFunction::new(grid.clone(), v)?,
        derivs: GridFunction::new(grid, d)?,
        normalization: state.normalization,
    })
}

/// Multiply by `e^{-i omega}`: `eta_bar -> eta`, `eta_bar0 -> eta0`.
pub fn phase_map(state: &ScatteringState, w: &Superpotential) -> Result<ScatteringState> {
    let kind = match state.kind {
        OperatorKind::EtaBar => OperatorKind::Eta,
        OperatorKind::Eta0Bar => OperatorKind::Eta0,
        other => {
            return Err(Error::InvalidParams(format!("phase map expects a barred state, got {other:?}")))
        }
    };
    let grid = state.grid().clone();
    let (v, d): (Vec<_>, Vec<_>) = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let l = w.log_u(x);
            let (om, om1) = (l.value().im, l.get(1).im);
            let ph = (-I * om).exp();
            let (p, dp) = (state.values.values()[j], state.derivs.values()[j]);
            (ph * p, ph * (dp - I * om1 * p))
        })
        .unzip();
    Ok(ScatteringState {
        kind,
        k: state.k,
        eigenvalue: state.eigenvalue,
        values: GridFunction::new(grid.clone(), v)?,
        derivs: GridFunction::new(grid, d)?,
        normalization: state.normalization,
    })
}

/// `eta` eigenstate at momentum `k`: closed form for the constant seed,
/// otherwise `eta_bar0` solve, forward Darboux map, phase map.
pub fn eta_state(u: &TransformationFunction, w: &Superpotential, k: f64, grid: &Arc<HalfLineGrid>) -> Result<ScatteringState> {
    if *u.entry() == CatalogueEntry::Constant {
        return analytic_states_constant(OperatorKind::Eta, k, u, grid);
    }
    let bar0 = crate::operators::build_eta_bar0(w);
    let s0 = solve_scattering(&bar0, k, grid)?;
    phase_map(&darboux_map_forward(&s0, w)?, w)
}

/// `(rho psi)(x) = int dk lambda(k)^{1/2} Psi_k(x) <Psi_k|psi>` by the trapezoid rule in `k`.
pub fn rho_apply_spectral(
    u: &TransformationFunction,
    w: &Superpotential,
    psi: &GridFunction,
    kgrid: &KGrid,
) -> Result<GridFunction> {
    kgrid.validate()?;
    let grid = psi.grid().clone();
    let ks = kgrid.points();
    let wk = kgrid.weights();
    let parts: Vec<Result<Vec<Complex64>>> = ks
        .par_iter()
        .zip(wk.par_iter())
        .map(|(&k, &wt)| {
            let st = eta_state(u, w, k, &grid)?;
            let amp = inner_product(st.values(), psi)?;
            let lam = st.eigenvalue().re.max(0.0).sqrt();
            Ok(st.values().values().iter().map(|v| wt * lam * amp * v).collect())
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for p in parts {
        for (a, v) in acc.iter_mut().zip(p?) {
            *a += v;
        }
    }
    GridFunction::new(grid, acc)
}

/// `||1/rho||` on `[0, X]` (Simpson).
pub fn inverse_rho_norm(u: &TransformationFunction, grid: &Arc<HalfLineGrid>) -> Result<f64> {
    let f = crate::grid::sample(|x| Complex64::new((-u.log_u(x).value().re).exp(), 0.0), grid)?;
    Ok(f.norm())
}
