//! Seeds `u = rho e^{i omega}`, their superpotentials `w = u'/u`, and the
//! phase equation `omega'' + 2 (rho'/rho) omega' + gamma = 0`.
//!
//! Everything is carried through `l = log u`, so `w = l'` and `w' = l''`
//! come out of one jet without dividing by small moduli.

use crate::error::{Error, Result};
use crate::grid::{gauss_legendre_8, HalfLineGrid};
use crate::jet::{Jet, MAX_ORDER};
use num_complex::Complex64;
use std::fmt::Debug;
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(d, b)` with the derived `alpha = -(d + ib)^2`, `beta = b^2 - d^2`, `gamma = -2db`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AsymptoticParams {
    d: f64,
    b: f64,
}

impl AsymptoticParams {
    /// Broken supersymmetry needs `d < 0`.
    pub fn new(d: f64, b: f64) -> Result<Self> {
        if !(d.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite (d, b) = ({d}, {b})")));
        }
        if d >= 0.0 {
            return Err(Error::InvalidParams(format!("d must be negative, got {d}")));
        }
        Ok(AsymptoticParams { d, b })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `d + ib`, the asymptotic value of `w`.
    pub fn kappa(&self) -> Complex64 {
        Complex64::new(self.d, self.b)
    }

    pub fn alpha(&self) -> Complex64 {
        -self.kappa() * self.kappa()
    }

    pub fn beta(&self) -> f64 {
        self.b * self.b - self.d * self.d
    }

    pub fn gamma(&self) -> f64 {
        -2.0 * self.d * self.b
    }
}

/// Which family a seed came from.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum CatalogueEntry {
    Constant,
    PoschlTeller { a: f64, c: f64 },
    Custom(String),
}

impl CatalogueEntry {
    pub fn name(&self) -> &str {
        match self {
            CatalogueEntry::Constant => "constant",
            CatalogueEntry::PoschlTeller { .. } => "poschl_teller",
            CatalogueEntry::Custom(s) => s,
        }
    }
}

/// Source of `log u` as a jet.
pub trait Seed: Send + Sync + Debug {
    /// Jet of `log u = log rho + i omega` at `x`.
    fn log_u(&self, x: f64) -> Jet;
}

/// Source of `log rho` as a real jet.
pub trait Modulus: Send + Sync + Debug {
    fn log_rho(&self, x: f64) -> Jet;
}

// ---------------------------------------------------------------------------
// catalogue seeds

/// `u = e^{(d+ib) x}`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSeed {
    kappa: Complex64,
}

impl Seed for ConstantSeed {
    fn log_u(&self, x: f64) -> Jet {
        Jet::variable(x) * self.kappa
    }
}

/// `u = e^{(d+ib)x} [a tanh(ax+c) - d - ib] / (a - d - ib)`.
#[derive(Debug, Clone, Copy)]
pub struct PoschlTellerSeed {
    a: f64,
    c: f64,
    kappa: Complex64,
}

/// Derivatives of `tanh` at `z`, accurate in the tail (uses `sech^2` directly).
fn tanh_derivs(z: f64) -> [f64; MAX_ORDER + 1] {
    let t = z.tanh();
    let s = 1.0 / z.cosh().powi(2);
    // d^k tanh = s * Q_k(t) for k >= 1, Q_{k+1} = -2 t Q_k + (1 - t^2) Q_k'
    let mut q = vec![1.0f64]; // Q_1 coefficients in powers of t
    let mut out = [0.0; MAX_ORDER + 1];
    out[0] = t;
    for slot in out.iter_mut().skip(1) {
        let val: f64 = q.iter().rev().fold(0.0, |acc, &cf| acc * t + cf);
        *slot = s * val;
        let mut next = vec![0.0; q.len() + 2];
        for (p, &cf) in q.iter().enumerate() {
            next[p + 1] += -2.0 * cf;
            if p >= 1 {
                next[p - 1] += p as f64 * cf;
                next[p + 1] -= p as f64 * cf;
            }
        }
        q = next;
    }
    out
}

impl PoschlTellerSeed {
    fn g(&self, x: f64) -> Jet {
        let td = tanh_derivs(self.a * x + self.c);
        let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        let mut ak = self.a;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = Complex64::new(ak * td[k], 0.0);
            ak *= self.a;
        }
        d[0] -= self.kappa;
        Jet::new(&d)
    }
}

impl Seed for PoschlTellerSeed {
    fn log_u(&self, x: f64) -> Jet {
        let norm = (self.a - self.kappa).ln();
        Jet::variable(x) * self.kappa + self.g(x).ln() + (-norm)
    }
}

/// `log rho` of the Poschl-Teller seed, for feeding the phase solver.
#[derive(Debug, Clone, Copy)]
pub struct PoschlTellerModulus(PoschlTellerSeed);

impl PoschlTellerModulus {
    pub fn new(a: f64, c: f64, d: f64, b: f64) -> Self {
        PoschlTellerModulus(PoschlTellerSeed {
            a,
            c,
            kappa: Complex64::new(d, b),
        })
    }
}

impl Modulus for PoschlTellerModulus {
    fn log_rho(&self, x: f64) -> Jet {
        self.0.log_u(x).re()
    }
}

/// `rho = e^{d x}`.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialModulus {
    pub d: f64,
}

impl Modulus for ExponentialModulus {
    fn log_rho(&self, x: f64) -> Jet {
        Jet::variable(x) * self.d
    }
}

/// Seed with `log u` jets stored at fixed points; other points fall through.
#[derive(Debug, Clone)]
struct TabulatedSeed {
    inner: Arc<dyn Seed>,
    table: Arc<std::collections::HashMap<u64, Jet>>,
}

impl Seed for TabulatedSeed {
    fn log_u(&self, x: f64) -> Jet {
        match self.table.get(&x.to_bits()) {
            Some(j) => *j,
            None => self.inner.log_u(x),
        }
    }
}

/// Modulus with identically zero phase.
#[derive(Debug, Clone)]
struct ModulusOnly(Arc<dyn Modulus>);

impl Seed for ModulusOnly {
    fn log_u(&self, x: f64) -> Jet {
        self.0.log_rho(x)
    }
}

// ---------------------------------------------------------------------------
// phase from the modulus

/// Phase obtained by integrating the first integral of the phase equation,
/// `rho^2 omega' = gamma int_x^inf rho^2`, with an exponential tail past `X`.
#[derive(Debug, Clone)]
pub struct PhaseSeed {
    modulus: Arc<dyn Modulus>,
    gamma: f64,
    d: f64,
    h: f64,
    n: usize,
    // F_j = int_{x_j}^inf rho^2 / rho^2(x_j), at nodes
    f_nodes: Vec<f64>,
    // omega at nodes
    omega_nodes: Vec<f64>,
}

impl PhaseSeed {
    /// Build the phase for an arbitrary `gamma` (no tail check).
    pub fn new(modulus: Arc<dyn Modulus>, gamma: f64, d: f64, grid: &HalfLineGrid) -> Result<Self> {
        if d >= 0.0 {
            return Err(Error::InvalidParams(format!("d must be negative, got {d}")));
        }
        let n = grid.len();
        let h = grid.spacing();
        let x = grid.nodes();
        let lr: Vec<f64> = x.iter().map(|&t| modulus.log_rho(t).value().re).collect();
        if let Some(j) = lr.iter().position(|v| !v.is_finite()) {
            return Err(Error::PoleDetected { x: x[j] });
        }
        let mut f_nodes = vec![0.0; n];
        f_nodes[n - 1] = 1.0 / (-2.0 * d);
        for j in (0..n - 1).rev() {
            let cell: f64 = gauss_legendre_8(x[j], x[j + 1])
                .iter()
                .map(|&(t, wt)| wt * (2.0 * (modulus.log_rho(t).value().re - lr[j])).exp())
                .sum();
            f_nodes[j] = cell + (2.0 * (lr[j + 1] - lr[j])).exp() * f_nodes[j + 1];
        }
        let mut seed = PhaseSeed {
            modulus,
            gamma,
            d,
            h,
            n,
            f_nodes,
            omega_nodes: vec![0.0; n],
        };
        for j in 0..n - 1 {
            let inc: f64 = gauss_legendre_8(x[j], x[j + 1])
                .iter()
                .map(|&(t, wt)| wt * seed.omega_prime(t))
                .sum();
            seed.omega_nodes[j + 1] = seed.omega_nodes[j] + inc;
        }
        Ok(seed)
    }

    fn cell(&self, x: f64) -> usize {
        let j = (x / self.h).floor();
        if j < 0.0 {
            0
        } else {
            (j as usize).min(self.n - 2)
        }
    }

    /// `omega'(x)`, valid on `[0, X]` and past it (pure exponential tail).
    pub fn omega_prime(&self, x: f64) -> f64 {
        let xmax = (self.n - 1) as f64 * self.h;
        if x >= xmax {
            // beyond the grid the modulus is treated as e^{d x}
            return self.gamma / (-2.0 * self.d);
        }
        let j = self.cell(x);
        let right = (j + 1) as f64 * self.h;
        let lx = self.modulus.log_rho(x).value().re;
        let lr = self.modulus.log_rho(right).value().re;
        let part: f64 = gauss_legendre_8(x, right)
            .iter()
            .map(|&(t, wt)| wt * (2.0 * (self.modulus.log_rho(t).value().re - lx)).exp())
            .sum();
        self.gamma * (part + (2.0 * (lr - lx)).exp() * self.f_nodes[j + 1])
    }

    pub fn omega(&self, x: f64) -> f64 {
        let j = self.cell(x);
        let left = j as f64 * self.h;
        if x == left {
            return self.omega_nodes[j];
        }
        let inc: f64 = gauss_legendre_8(left, x)
            .iter()
            .map(|&(t, wt)| wt * self.omega_prime(t))
            .sum();
        self.omega_nodes[j] + inc
    }
}

impl Seed for PhaseSeed {
    fn log_u(&self, x: f64) -> Jet {
        let lr = self.modulus.log_rho(x);
        let wj = lr.diff(); // W and its derivatives
        let n = lr.order();
        let mut om = [0.0f64; MAX_ORDER + 1];
        om[0] = self.omega(x);
        if n >= 1 {
            om[1] = self.omega_prime(x);
        }
        // omega^{(k+2)} = -gamma [k = 0] - 2 sum_j C(k, j) W^{(j)} omega^{(k+1-j)}
        for k in 0..n.saturating_sub(1) {
            let mut s = if k == 0 { -self.gamma } else { 0.0 };
            let mut binom = 1.0;
            for j in 0..=k {
                s -= 2.0 * binom * wj.get(j).re * om[k + 1 - j];
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            om[k + 2] = s;
        }
        let phase = Jet::from_real(&om[..=n]);
        lr + phase * I
    }
}

// ---------------------------------------------------------------------------
// transformation function

/// A seed `u` together with its asymptotic parameters.
#[derive(Debug, Clone)]
pub struct TransformationFunction {
    seed: Arc<dyn Seed>,
    params: AsymptoticParams,
    entry: CatalogueEntry,
}

impl TransformationFunction {
    /// Wrap a seed without any consistency check.
    pub fn from_seed(seed: Arc<dyn Seed>, params: AsymptoticParams, entry: CatalogueEntry) -> Self {
        TransformationFunction { seed, params, entry }
    }

    /// Seed with the given modulus and zero phase (only consistent when `b = 0`).
    pub fn from_modulus_without_phase(
        modulus: Arc<dyn Modulus>,
        params: AsymptoticParams,
        name: &str,
    ) -> Self {
        TransformationFunction {
            seed: Arc::new(ModulusOnly(modulus)),
            params,
            entry: CatalogueEntry::Custom(name.to_string()),
        }
    }

    pub fn params(&self) -> AsymptoticParams {
        self.params
    }

    pub fn entry(&self) -> &CatalogueEntry {
        &self.entry
    }

    pub fn seed(&self) -> &Arc<dyn Seed> {
        &self.seed
    }

    pub fn log_u(&self, x: f64) -> Jet {
        self.seed.log_u(x)
    }

    /// `u(x)`.
    pub fn u(&self, x: f64) -> Complex64 {
        self.log_u(x).value().exp()
    }

    pub fn rho(&self, x: f64) -> f64 {
        self.log_u(x).value().re.exp()
    }

    /// `(rho, rho', rho'')`.
    pub fn rho_derivs(&self, x: f64) -> [f64; 3] {
        let j = self.log_u(x).re().truncate(2).exp();
        [j.get(0).re, j.get(1).re, j.get(2).re]
    }

    /// `(omega, omega', omega'')`.
    pub fn omega_derivs(&self, x: f64) -> [f64; 3] {
        let j = self.log_u(x);
        [j.get(0).im, j.get(1).im, j.get(2).im]
    }

    /// `omega'' + 2 W omega' + gamma`, zero for a consistent phase.
    pub fn phase_equation_residual(&self, x: f64) -> f64 {
        let j = self.log_u(x);
        j.get(2).im + 2.0 * j.get(1).re * j.get(1).im + self.params.gamma()
    }

    /// Check for poles on the grid and, when `tail_tolerance` is given, that
    /// `omega' -> b` over the last tenth of the nodes.
    pub fn validate(&self, grid: &HalfLineGrid, tail_tolerance: Option<f64>) -> Result<()> {
        for &x in grid.nodes() {
            let j = self.log_u(x);
            let ok = j.derivs().iter().take(3).all(|v| v.re.is_finite() && v.im.is_finite());
            if !ok || j.value().re < -700.0 || j.value().re > 700.0 {
                return Err(Error::PoleDetected { x });
            }
        }
        if let Some(tol) = tail_tolerance {
            let nodes = grid.nodes();
            let deviation = grid
                .tail_range()
                .map(|k| (self.log_u(nodes[k]).get(1).im - self.params.b()).abs())
                .fold(0.0, f64::max);
            if deviation > tol {
                return Err(Error::TailMismatch {
                    deviation,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }
}

/// Parameters accepted by [`catalogue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogueParams {
    pub d: f64,
    pub b: f64,
    pub a: f64,
    pub c: f64,
}

impl Default for CatalogueParams {
    fn default() -> Self {
        CatalogueParams {
            d: -1.0,
            b: 1.0,
            a: 1.0,
            c: 1.0,
        }
    }
}

/// Closed-form seeds: `"constant"` and `"poschl_teller"`.
pub fn catalogue(name: &str, p: CatalogueParams) -> Result<TransformationFunction> {
    let params = AsymptoticParams::new(p.d, p.b)?;
    match name.replace('-', "_").as_str() {
        "constant" => Ok(TransformationFunction {
            seed: Arc::new(ConstantSeed {
                kappa: params.kappa(),
            }),
            params,
            entry: CatalogueEntry::Constant,
        }),
        "poschl_teller" => {
            if !(p.a.is_finite() && p.a > 0.0) {
                return Err(Error::InvalidParams(format!("a must be positive, got {}", p.a)));
            }
            if !(p.c.is_finite() && p.c > 0.0) {
                return Err(Error::InvalidParams(format!("c must be positive, got {}", p.c)));
            }
            Ok(TransformationFunction {
                seed: Arc::new(PoschlTellerSeed {
                    a: p.a,
                    c: p.c,
                    kappa: params.kappa(),
                }),
                params,
                entry: CatalogueEntry::PoschlTeller { a: p.a, c: p.c },
            })
        }
        other => Err(Error::UnknownEntry(other.to_string())),
    }
}

/// Phase from the modulus for `gamma = -2db`; fails if `omega'` misses `b` in the tail.
pub fn solve_phase(
    modulus: Arc<dyn Modulus>,
    params: AsymptoticParams,
    grid: &HalfLineGrid,
    tail_tolerance: f64,
) -> Result<TransformationFunction> {
    let seed = PhaseSeed::new(modulus, params.gamma(), params.d(), grid)?;
    let tf = TransformationFunction {
        seed: Arc::new(seed),
        params,
        entry: CatalogueEntry::Custom("phase_integral".into()),
    };
    tf.validate(grid, Some(tail_tolerance))?;
    Ok(tf)
}

// ---------------------------------------------------------------------------
// superpotential

/// `w = u'/u` with `alpha` attached; `W = Re w = rho'/rho`.
#[derive(Debug, Clone)]
pub struct Superpotential {
    seed: Arc<dyn Seed>,
    alpha: Complex64,
    real: bool,
    entry: CatalogueEntry,
    params: Option<AsymptoticParams>,
}

impl Superpotential {
    /// From a seed; rejects grids where the seed has a pole.
    pub fn from_transformation(u: &TransformationFunction, grid: &HalfLineGrid) -> Result<Self> {
        u.validate(grid, None)?;
        Ok(Superpotential {
            seed: u.seed.clone(),
            alpha: u.params.alpha(),
            real: u.params.b() == 0.0 && u.log_u(0.0).value().im == 0.0,
            entry: u.entry.clone(),
            params: Some(u.params),
        })
    }

    /// Constant `w = w0`, `alpha = -w0^2`. Allows `Re w0 = 0`.
    pub fn constant(w0: Complex64) -> Self {
        Superpotential {
            seed: Arc::new(ConstantSeed { kappa: w0 }),
            alpha: -w0 * w0,
            real: w0.im == 0.0,
            entry: CatalogueEntry::Constant,
            params: None,
        }
    }

    /// Same `w` with its jets cached at `points` (bitwise match).
    pub fn tabulated(&self, points: &[f64]) -> Self {
        let table = points.iter().map(|&x| (x.to_bits(), self.seed.log_u(x))).collect();
        Superpotential {
            seed: Arc::new(TabulatedSeed {
                inner: self.seed.clone(),
                table: Arc::new(table),
            }),
            ..self.clone()
        }
    }

    /// Same `w`, different `alpha` (negative controls).
    pub fn with_alpha(&self, alpha: Complex64) -> Self {
        Superpotential {
            alpha,
            ..self.clone()
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn params(&self) -> Option<AsymptoticParams> {
        self.params
    }

    pub fn entry(&self) -> &CatalogueEntry {
        &self.entry
    }

    /// True when the phase vanishes identically.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn log_u(&self, x: f64) -> Jet {
        self.seed.log_u(x)
    }

    /// Jet of `w`.
    pub fn w_jet(&self, x: f64) -> Jet {
        self.seed.log_u(x).diff()
    }

    pub fn w(&self, x: f64) -> Complex64 {
        self.w_jet(x).value()
    }

    pub fn w_prime(&self, x: f64) -> Complex64 {
        self.w_jet(x).get(1)
    }

    /// `W = rho'/rho`.
    pub fn big_w(&self, x: f64) -> f64 {
        self.w(x).re
    }

    pub fn big_w_prime(&self, x: f64) -> f64 {
        self.w_prime(x).re
    }

    /// `V = w^2 - w' + alpha`.
    pub fn v(&self, x: f64) -> Complex64 {
        let j = self.w_jet(x);
        j.value() * j.value() - j.get(1) + self.alpha
    }

    /// `u''/u + alpha = w' + w^2 + alpha`.
    pub fn v0(&self, x: f64) -> Complex64 {
        let j = self.w_jet(x);
        j.get(1) + j.value() * j.value() + self.alpha
    }

    /// `W^2 - W'`.
    pub fn v_bar(&self, x: f64) -> f64 {
        let j = self.w_jet(x);
        j.value().re * j.value().re - j.get(1).re
    }

    /// `W^2 + W' = rho''/rho`.
    pub fn v_bar0(&self, x: f64) -> f64 {
        let j = self.w_jet(x);
        j.value().re * j.value().re + j.get(1).re
    }
}

/// Closed-form `V_bar` of the Poschl-Teller seed.
pub fn poschl_teller_v_bar(a: f64, c: f64, d: f64, b: f64, x: f64) -> f64 {
    let z = 2.0 * a * x + 2.0 * c;
    let wt = b * b + d * d - a * a + (a * a + b * b + d * d) * z.cosh() - 2.0 * a * d * z.sinh();
    d * d + 4.0 * a * a * (a * a - d * d) / wt - 12.0 * a.powi(4) * b * b / (wt * wt)
}

// ---------------------------------------------------------------------------
// scattering diagnostics

/// Decay summary of a potential on the grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScatteringDiagnostic {
    /// `int (1 + x) |V|`.
    pub weighted_integral: f64,
    /// Fitted slope of `log |V|` in the tail; `None` if `V` vanishes there.
    pub tail_rate: Option<f64>,
    pub scattering: bool,
}

/// Slope of `log |V|` fitted over the last tenth of the nodes where `|V|`
/// stays above `floor` (rounding noise below that is ignored).
pub fn fit_tail_rate(x: &[f64], v: &[f64], floor: f64) -> Option<f64> {
    let last = v.iter().rposition(|a| a.abs() > floor)?;
    let len = ((last + 1) / 10).max(3);
    if last + 1 < len {
        return None;
    }
    let idx = last + 1 - len..=last;
    let pts: Vec<(f64, f64)> = idx.map(|k| (x[k], v[k].abs().ln())).collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let den = m * sxx - sx * sx;
    if den <= 0.0 {
        return None;
    }
    Some((m * sxy - sx * sy) / den)
}

/// Decay check for a potential that should vanish at infinity.
pub fn check_scattering_condition(v: impl Fn(f64) -> Complex64, grid: &HalfLineGrid) -> ScatteringDiagnostic {
    let x = grid.nodes();
    let vals: Vec<f64> = x.iter().map(|&t| v(t).norm()).collect();
    let weighted_integral: f64 = grid
        .weights()
        .iter()
        .zip(x.iter().zip(&vals))
        .map(|(w, (t, a))| w * (1.0 + t) * a)
        .sum();
    let scale = vals.iter().cloned().fold(0.0, f64::max);
    let tail_rate = if scale == 0.0 {
        None
    } else {
        fit_tail_rate(x, &vals, 1e-13 * scale.max(1.0))
    };
    let tail_max = grid.tail_range().map(|k| vals[k]).fold(0.0, f64::max);
    let scattering = weighted_integral.is_finite()
        && match tail_rate {
            None => true,
            Some(r) => r < -1e-2 || tail_max <= 1e-13 * scale.max(1.0),
        };
    ScatteringDiagnostic {
        weighted_integral,
        tail_rate,
        scattering,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(d: f64, b: f64) -> TransformationFunction {
        catalogue("poschl_teller", CatalogueParams { d, b, a: 1.0, c: 1.0 }).unwrap()
    }

    #[test]
    fn params_derive_alpha_beta_gamma() {
        let p = AsymptoticParams::new(-1.0, 0.5).unwrap();
        assert_eq!(p.alpha(), Complex64::new(-0.75, 1.0));
        assert_eq!(p.beta(), -0.75);
        assert_eq!(p.gamma(), 1.0);
        assert_eq!(p.alpha(), Complex64::new(p.beta(), p.gamma()));
        assert!(AsymptoticParams::new(0.0, 1.0).is_err());
        assert!(AsymptoticParams::new(0.5, 0.0).is_err());
    }

    #[test]
    fn unknown_entry_is_rejected() {
        let e = catalogue("woods_saxon", CatalogueParams::default()).unwrap_err();
        assert_eq!(e, Error::UnknownEntry("woods_saxon".into()));
    }

    #[test]
    fn constant_entry_quantities() {
        let u = catalogue("constant", CatalogueParams { d: -1.0, b: 0.5, ..Default::default() }).unwrap();
        let g = HalfLineGrid::new(20.0, 101).unwrap();
        let w = Superpotential::from_transformation(&u, &g).unwrap();
        for x in [0.0, 1.3, 7.0] {
            assert_eq!(w.w(x), Complex64::new(-1.0, 0.5));
            assert_eq!(w.w_prime(x), Complex64::new(0.0, 0.0));
            assert!((w.v(x)).norm() < 1e-15);
            assert!((w.v_bar(x) - 1.0).abs() < 1e-15);
            let [r, r1, r2] = u.rho_derivs(x);
            assert!((r - (-x).exp()).abs() < 1e-15);
            assert!((r1 + r).abs() < 1e-15 && (r2 - r).abs() < 1e-15);
            assert!((u.omega_derivs(x)[0] - 0.5 * x).abs() < 1e-15);
        }
    }

    #[test]
    fn poschl_teller_w_at_origin() {
        let u = pt(-1.0, 0.0);
        let g = HalfLineGrid::new(20.0, 101).unwrap();
        let w = Superpotential::from_transformation(&u, &g).unwrap();
        assert!((w.w(0.0) - Complex64::new(-(1f64.tanh()), 0.0)).norm() < 1e-14);
        // u'/u against the closed form d + ib + 2a^2 / (a sinh(2ax+2c) - 2(d+ib) cosh^2(ax+c))
        let u2 = pt(-0.7, 0.4);
        let w2 = Superpotential::from_transformation(&u2, &g).unwrap();
        for x in [0.0f64, 0.5, 2.0, 6.0] {
            let k = Complex64::new(-0.7, 0.4);
            let cf = k + 2.0 / ((2.0 * x + 2.0).sinh() - 2.0 * k * (x + 1.0).cosh().powi(2));
            assert!((w2.w(x) - cf).norm() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn poschl_teller_h0_potential() {
        // v0 = u''/u + alpha = -2 a^2 sech^2(ax + c)
        let u = pt(-0.8, 1.3);
        let g = HalfLineGrid::new(20.0, 101).unwrap();
        let w = Superpotential::from_transformation(&u, &g).unwrap();
        for x in [0.0, 0.3, 1.7, 9.0] {
            let expect = -2.0 / (x + 1.0f64).cosh().powi(2);
            assert!((w.v0(x) - Complex64::new(expect, 0.0)).norm() < 1e-14, "x = {x}");
            assert!(u.phase_equation_residual(x).abs() < 1e-14);
        }
    }

    #[test]
    fn poschl_teller_v_bar_matches_closed_form() {
        let u = pt(-1.0, 1.0);
        let g = HalfLineGrid::new(20.0, 401).unwrap();
        let w = Superpotential::from_transformation(&u, &g).unwrap();
        for &x in g.nodes() {
            assert!((w.v_bar(x) - poschl_teller_v_bar(1.0, 1.0, -1.0, 1.0, x)).abs() < 1e-13);
        }
    }

    #[test]
    fn tanh_derivatives() {
        let z = 0.37f64;
        let t = z.tanh();
        let s = 1.0 - t * t;
        let td = tanh_derivs(z);
        assert!((td[1] - s).abs() < 1e-15);
        assert!((td[2] + 2.0 * t * s).abs() < 1e-15);
        assert!((td[3] - (-2.0 * s * s + 4.0 * t * t * s)).abs() < 1e-15);
        // tail stays accurate where 1 - t^2 underflows
        let far = tanh_derivs(25.0);
        assert!((far[1] / (4.0 * (-50f64).exp()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_solver_reproduces_poschl_teller_phase() {
        let g = HalfLineGrid::new(20.0, 201).unwrap();
        let (d, b) = (-1.0, 1.0);
        let modulus = Arc::new(PoschlTellerModulus::new(1.0, 1.0, d, b));
        let params = AsymptoticParams::new(d, b).unwrap();
        let tf = solve_phase(modulus, params, &g, 1e-8).unwrap();
        let exact = pt(d, b);
        let w0 = exact.omega_derivs(0.0)[0];
        for x in [0.0, 0.05, 0.5, 1.0, 3.3, 10.0, 19.9] {
            let got = tf.omega_derivs(x);
            let want = exact.omega_derivs(x);
            assert!((got[1] - want[1]).abs() < 1e-12, "omega' at {x}");
            assert!((got[2] - want[2]).abs() < 1e-12, "omega'' at {x}");
            assert!((got[0] - (want[0] - w0)).abs() < 1e-11, "omega at {x}");
            assert!(tf.phase_equation_residual(x).abs() < 1e-13);
        }
        // higher derivatives through the ODE agree as well
        let (j1, j2) = (tf.log_u(2.0), exact.log_u(2.0));
        for k in 3..=6 {
            assert!((j1.get(k).im - j2.get(k).im).abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn phase_solver_flags_wrong_asymptote() {
        let g = HalfLineGrid::new(20.0, 201).unwrap();
        let modulus = Arc::new(ExponentialModulus { d: -1.0 });
        let params = AsymptoticParams::new(-1.0, 1.0).unwrap();
        let seed = PhaseSeed::new(modulus, 2.0 * params.gamma(), -1.0, &g).unwrap();
        let tf = TransformationFunction::from_seed(Arc::new(seed), params, CatalogueEntry::Custom("bad".into()));
        assert!(matches!(tf.validate(&g, Some(1e-6)), Err(Error::TailMismatch { .. })));
    }

    #[test]
    fn pole_is_detected() {
        #[derive(Debug)]
        struct Vanishing;
        impl Seed for Vanishing {
            fn log_u(&self, x: f64) -> Jet {
                // u = x - 1 has a zero on the grid
                (Jet::variable(x) + Complex64::new(-1.0, 0.0)).ln()
            }
        }
        let params = AsymptoticParams::new(-1.0, 0.0).unwrap();
        let tf = TransformationFunction::from_seed(Arc::new(Vanishing), params, CatalogueEntry::Custom("v".into()));
        let g = HalfLineGrid::new(2.0, 17).unwrap();
        assert!(matches!(
            Superpotential::from_transformation(&tf, &g),
            Err(Error::PoleDetected { x }) if (x - 1.0).abs() < 1e-12
        ));
    }

    #[test]
    fn scattering_diagnostics() {
        let g = HalfLineGrid::new(20.0, 401).unwrap();
        let pt_v = check_scattering_condition(|x| Complex64::new(-2.0 / (x + 1.0f64).cosh().powi(2), 0.0), &g);
        assert!(pt_v.scattering);
        let r = pt_v.tail_rate.unwrap();
        assert!((r + 2.0).abs() < 0.02, "rate {r}");
        let zero = check_scattering_condition(|_| Complex64::new(0.0, 0.0), &g);
        assert!(zero.scattering && zero.tail_rate.is_none() && zero.weighted_integral == 0.0);
        let flat = check_scattering_condition(|_| Complex64::new(0.3, 0.0), &g);
        assert!(!flat.scattering);
    }

    proptest! {
        #[test]
        fn w_is_log_derivative_of_u(d in -2.0f64..-0.1, b in -2.0f64..2.0, x in 0.0f64..8.0) {
            let u = pt(d, b);
            let h = 1e-4;
            let fd = (u.log_u(x + h).value() - u.log_u(x - h).value()) / (2.0 * h);
            let w = u.log_u(x).get(1);
            prop_assert!((fd - w).norm() < 1e-6);
            // W = Re w = rho'/rho
            let [r, r1, _] = u.rho_derivs(x);
            prop_assert!((w.re - r1 / r).abs() < 1e-12 * (1.0 + w.re.abs()));
        }

        #[test]
        fn catalogue_phase_solves_phase_equation(d in -2.0f64..-0.1, b in -2.0f64..2.0, x in 0.0f64..15.0) {
            let u = pt(d, b);
            prop_assert!(u.phase_equation_residual(x).abs() < 1e-12);
            let c = catalogue("constant", CatalogueParams { d, b, ..Default::default() }).unwrap();
            prop_assert!(c.phase_equation_residual(x).abs() < 1e-14);
        }

        #[test]
        fn v_bar_plus_v_bar0_is_twice_w_squared(d in -2.0f64..-0.1, b in -2.0f64..2.0, x in 0.0f64..10.0) {
            let g = HalfLineGrid::new(20.0, 33).unwrap();
            let w = Superpotential::from_transformation(&pt(d, b), &g).unwrap();
            let big_w = w.big_w(x);
            prop_assert!((w.v_bar(x) + w.v_bar0(x) - 2.0 * big_w * big_w).abs() < 1e-12);
            prop_assert!((w.v_bar0(x) - w.v_bar(x) - 2.0 * w.big_w_prime(x)).abs() < 1e-12);
        }
    }
}
