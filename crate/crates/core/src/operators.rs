//! First-order ladder operators and the second-order operators built from them.
//!
//! With `w = u'/u`:
//!
//! * `L = -D + conj(w)`, `L^dagger = D + w`, `L* = -D + w`, `(L*)^dagger = D + conj(w)`
//! * `eta = L L^dagger = -D^2 + (conj(w) - w) D + |w|^2 - w'`, Robin `psi'(0) + w(0) psi(0) = 0`
//! * `eta0 = L^dagger L`. Expanding `(D + w)(-D + conj(w))` gives
//!   `-psi'' + conj(w) psi' + conj(w)' psi - w psi' + |w|^2 psi`, i.e.
//!   `eta0 = -D^2 + (conj(w) - w) D + |w|^2 + conj(w)'`: the same drift as `eta`.
//!   Dirichlet at 0 (range of `L^dagger`).
//! * `H = L* L^dagger + alpha = -D^2 + w^2 - w' + alpha`, Robin with `w(0)`
//! * `h0 = L^dagger L* + alpha = -D^2 + w' + w^2 + alpha`, Dirichlet
//! * `eta_bar = -D^2 + W^2 - W'` (Robin `W(0)`), `eta_bar0 = -D^2 + W^2 + W'` (Dirichlet)
//!
//! Test functions are jets (`Fn(f64) -> Jet`), so operator products are exact.

use crate::error::{Error, Result};
use crate::grid::HalfLineGrid;
use crate::jet::Jet;
use crate::transformation::Superpotential;
use num_complex::Complex64;
use std::sync::Arc;

/// Coefficient function returning a jet.
pub type Coefficient = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LadderFlavor {
    L,
    LDagger,
    LStar,
    LStarDagger,
}

/// `sign * D + f`.
#[derive(Clone)]
pub struct LadderOperator {
    flavor: LadderFlavor,
    w: Superpotential,
}

impl std::fmt::Debug for LadderOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LadderOperator").field("flavor", &self.flavor).finish()
    }
}

impl LadderOperator {
    pub fn new(flavor: LadderFlavor, w: &Superpotential) -> Self {
        LadderOperator {
            flavor,
            w: w.clone(),
        }
    }

    pub fn flavor(&self) -> LadderFlavor {
        self.flavor
    }

    pub fn superpotential(&self) -> &Superpotential {
        &self.w
    }

    pub fn sign(&self) -> f64 {
        match self.flavor {
            LadderFlavor::L | LadderFlavor::LStar => -1.0,
            LadderFlavor::LDagger | LadderFlavor::LStarDagger => 1.0,
        }
    }

    /// True when the coefficient is `conj(w)` rather than `w`.
    pub fn conjugated(&self) -> bool {
        matches!(self.flavor, LadderFlavor::L | LadderFlavor::LStarDagger)
    }

    pub fn coefficient_jet(&self, x: f64) -> Jet {
        let j = self.w.w_jet(x);
        if self.conjugated() {
            j.conj()
        } else {
            j
        }
    }

    pub fn coefficient(&self, x: f64) -> Complex64 {
        self.coefficient_jet(x).value()
    }

    /// Formal adjoint: `L <-> L^dagger`, `L* <-> (L*)^dagger`.
    pub fn adjoint(&self) -> Self {
        let flavor = match self.flavor {
            LadderFlavor::L => LadderFlavor::LDagger,
            LadderFlavor::LDagger => LadderFlavor::L,
            LadderFlavor::LStar => LadderFlavor::LStarDagger,
            LadderFlavor::LStarDagger => LadderFlavor::LStar,
        };
        LadderOperator {
            flavor,
            w: self.w.clone(),
        }
    }

    /// Action on one jet at `x`; the result is one order shorter.
    pub fn apply_jet(&self, psi: Jet, x: f64) -> Jet {
        let f = self.coefficient_jet(x);
        psi.diff() * self.sign() + f * psi
    }
}

/// `sign * psi' + f psi` as a new test function.
pub fn apply_ladder<'a>(
    op: &'a LadderOperator,
    psi: &'a (dyn Fn(f64) -> Jet + Sync),
) -> impl Fn(f64) -> Jet + Sync + 'a {
    move |x| op.apply_jet(psi(x), x)
}

/// `psi'(0) + c psi(0) = 0` or `psi(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum BoundaryCondition {
    Robin(Complex64),
    Dirichlet,
}

impl BoundaryCondition {
    /// The boundary functional evaluated on `(psi(0), psi'(0))`.
    pub fn functional(&self, value: Complex64, slope: Complex64) -> Complex64 {
        match *self {
            BoundaryCondition::Robin(c) => slope + c * value,
            BoundaryCondition::Dirichlet => value,
        }
    }

    pub fn conj(&self) -> Self {
        match *self {
            BoundaryCondition::Robin(c) => BoundaryCondition::Robin(c.conj()),
            BoundaryCondition::Dirichlet => BoundaryCondition::Dirichlet,
        }
    }
}

/// Which operator a [`SchrodingerOperator`] stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum OperatorKind {
    Eta,
    Eta0,
    H,
    HDagger,
    H0,
    EtaBar,
    Eta0Bar,
    Other,
}

/// `-psi'' + drift psi' + (potential + shift) psi` with a boundary condition at 0.
#[derive(Clone)]
pub struct SchrodingerOperator {
    kind: OperatorKind,
    potential: Coefficient,
    drift: Option<Coefficient>,
    shift: Complex64,
    boundary: BoundaryCondition,
    hermitian: bool,
}

impl std::fmt::Debug for SchrodingerOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchrodingerOperator")
            .field("kind", &self.kind)
            .field("shift", &self.shift)
            .field("boundary", &self.boundary)
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

impl SchrodingerOperator {
    /// General constructor; `hermitian` must be true only for a real potential,
    /// no drift, real shift and a real boundary coefficient.
    pub fn new(
        kind: OperatorKind,
        potential: Coefficient,
        drift: Option<Coefficient>,
        shift: Complex64,
        boundary: BoundaryCondition,
        hermitian: bool,
    ) -> Self {
        let real_bc = match boundary {
            BoundaryCondition::Robin(c) => c.im == 0.0,
            BoundaryCondition::Dirichlet => true,
        };
        SchrodingerOperator {
            kind,
            potential,
            drift,
            shift,
            boundary,
            hermitian: hermitian && shift.im == 0.0 && real_bc,
        }
    }

    /// `-D^2 + c` with the given boundary condition.
    pub fn free(c: f64, boundary: BoundaryCondition) -> Self {
        SchrodingerOperator::new(
            OperatorKind::Other,
            Arc::new(|_| Jet::constant(Complex64::new(0.0, 0.0))),
            None,
            Complex64::new(c, 0.0),
            boundary,
            true,
        )
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    pub fn potential_jet(&self, x: f64) -> Jet {
        (self.potential)(x)
    }

    pub fn potential(&self, x: f64) -> Complex64 {
        (self.potential)(x).value()
    }

    /// Potential including the constant shift.
    pub fn total_potential(&self, x: f64) -> Complex64 {
        self.potential(x) + self.shift
    }

    pub fn drift(&self, x: f64) -> Complex64 {
        self.drift
            .as_ref()
            .map(|d| d(x).value())
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Action on one jet at `x`; the result is two orders shorter.
    pub fn apply_jet(&self, psi: Jet, x: f64) -> Jet {
        let d1 = psi.diff();
        let d2 = d1.diff();
        let mut out = -d2 + (self.potential)(x) * psi + psi * self.shift;
        if let Some(p) = &self.drift {
            out = out + p(x) * d1;
        }
        out
    }

    /// Pointwise action from `(psi, psi', psi'')`.
    pub fn apply_values(&self, x: f64, psi: [Complex64; 3]) -> Complex64 {
        -psi[2] + self.drift(x) * psi[1] + self.total_potential(x) * psi[0]
    }

    /// Formal adjoint for drift-free operators: conjugate potential, shift and boundary.
    pub fn conj(&self) -> Result<Self> {
        if self.drift.is_some() {
            return Err(Error::DriftUnsupported);
        }
        let v = self.potential.clone();
        let kind = match self.kind {
            OperatorKind::H => OperatorKind::HDagger,
            OperatorKind::HDagger => OperatorKind::H,
            k => k,
        };
        Ok(SchrodingerOperator {
            kind,
            potential: Arc::new(move |x| v(x).conj()),
            drift: None,
            shift: self.shift.conj(),
            boundary: self.boundary.conj(),
            hermitian: self.hermitian,
        })
    }
}

/// Apply a second-order operator to a test function.
pub fn apply_operator<'a>(
    op: &'a SchrodingerOperator,
    psi: &'a (dyn Fn(f64) -> Jet + Sync),
) -> impl Fn(f64) -> Jet + Sync + 'a {
    move |x| op.apply_jet(psi(x), x)
}

fn w_coeff(w: &Superpotential, f: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> Coefficient {
    let w = w.clone();
    Arc::new(move |x| f(w.w_jet(x)))
}

fn drift_of(w: &Superpotential) -> Option<Coefficient> {
    if w.is_real() {
        None
    } else {
        // conj(w) - w = -2i omega'
        Some(w_coeff(w, |j| j.conj() - j))
    }
}

/// `eta = L L^dagger`.
pub fn build_eta(w: &Superpotential) -> SchrodingerOperator {
    SchrodingerOperator::new(
        OperatorKind::Eta,
        w_coeff(w, |j| j.conj() * j - j.diff()),
        drift_of(w),
        Complex64::new(0.0, 0.0),
        BoundaryCondition::Robin(w.w(0.0)),
        w.is_real(),
    )
}

/// `eta0 = L^dagger L`.
pub fn build_eta0(w: &Superpotential) -> SchrodingerOperator {
    SchrodingerOperator::new(
        OperatorKind::Eta0,
        w_coeff(w, |j| j.conj() * j + j.conj().diff()),
        drift_of(w),
        Complex64::new(0.0, 0.0),
        BoundaryCondition::Dirichlet,
        w.is_real(),
    )
}

/// `H = L* L^dagger + alpha`, potential `w^2 - w'`, shift `alpha`.
pub fn build_h(w: &Superpotential) -> SchrodingerOperator {
    let alpha = w.alpha();
    SchrodingerOperator::new(
        OperatorKind::H,
        w_coeff(w, |j| j * j - j.diff()),
        None,
        alpha,
        BoundaryCondition::Robin(w.w(0.0)),
        w.is_real() && alpha.im == 0.0,
    )
}

/// `H^dagger = L (L*)^dagger + conj(alpha)`.
pub fn build_h_dagger(w: &Superpotential) -> SchrodingerOperator {
    build_h(w).conj().expect("H carries no drift")
}

/// Largest `|Im(u''/u + alpha)|` over the nodes, and where.
pub fn h0_imaginary_part(w: &Superpotential, grid: &HalfLineGrid) -> (f64, f64) {
    grid.nodes()
        .iter()
        .map(|&x| (w.v0(x).im.abs(), x))
        .fold((0.0, 0.0), |m, p| if p.0 > m.0 { p } else { m })
}

/// Default bound on `|Im v0|` accepted by [`build_h0`].
pub const H0_REALITY_TOL: f64 = 1e-9;

/// `h0 = L^dagger L* + alpha = -D^2 + u''/u + alpha`; the potential must be real on the grid.
pub fn build_h0(w: &Superpotential, grid: &HalfLineGrid) -> Result<SchrodingerOperator> {
    let (max_imag, x) = h0_imaginary_part(w, grid);
    let scale = 1.0 + w.alpha().norm();
    if max_imag > H0_REALITY_TOL * scale {
        return Err(Error::NotReal { max_imag, x });
    }
    let alpha = w.alpha();
    Ok(SchrodingerOperator::new(
        OperatorKind::H0,
        w_coeff(w, move |j| (j.diff() + j * j + alpha).re()),
        None,
        Complex64::new(0.0, 0.0),
        BoundaryCondition::Dirichlet,
        true,
    ))
}

/// `h0` with the complex potential kept as is (no reality check).
pub fn build_h0_unchecked(w: &Superpotential) -> SchrodingerOperator {
    SchrodingerOperator::new(
        OperatorKind::H0,
        w_coeff(w, |j| j.diff() + j * j),
        None,
        w.alpha(),
        BoundaryCondition::Dirichlet,
        false,
    )
}

/// `eta_bar = -D^2 + W^2 - W'`, Robin with `W(0)`.
pub fn build_eta_bar(w: &Superpotential) -> SchrodingerOperator {
    SchrodingerOperator::new(
        OperatorKind::EtaBar,
        w_coeff(w, |j| {
            let r = j.re();
            r * r - r.diff()
        }),
        None,
        Complex64::new(0.0, 0.0),
        BoundaryCondition::Robin(Complex64::new(w.big_w(0.0), 0.0)),
        true,
    )
}

/// `eta_bar0 = -D^2 + W^2 + W' = -D^2 + rho''/rho`, Dirichlet.
pub fn build_eta_bar0(w: &Superpotential) -> SchrodingerOperator {
    SchrodingerOperator::new(
        OperatorKind::Eta0Bar,
        w_coeff(w, |j| {
            let r = j.re();
            r * r + r.diff()
        }),
        None,
        Complex64::new(0.0, 0.0),
        BoundaryCondition::Dirichlet,
        true,
    )
}

/// `L_rho = -D + W` (the real ladder).
pub fn apply_l_rho(w: &Superpotential, psi: Jet, x: f64) -> Jet {
    -psi.diff() + w.w_jet(x).re() * psi
}

/// `L_rho^dagger = D + W`.
pub fn apply_l_rho_dagger(w: &Superpotential, psi: Jet, x: f64) -> Jet {
    psi.diff() + w.w_jet(x).re() * psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::MAX_ORDER;
    use crate::transformation::{catalogue, CatalogueParams};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sp(entry: &str, d: f64, b: f64) -> Superpotential {
        let u = catalogue(entry, CatalogueParams { d, b, a: 1.0, c: 1.0 }).unwrap();
        Superpotential::from_transformation(&u, &HalfLineGrid::new(20.0, 65).unwrap()).unwrap()
    }

    /// Jet of `x e^{-(x - mu)^2 / s^2}` times a complex constant.
    fn bump(mu: f64, s: f64, amp: Complex64) -> impl Fn(f64) -> Jet + Sync {
        move |x| {
            let t = Jet::variable(x) + c(-mu, 0.0);
            let e = (t * t * (-1.0 / (s * s))).exp();
            Jet::variable(x) * e * amp
        }
    }

    fn exp_jet(k: Complex64) -> impl Fn(f64) -> Jet + Sync {
        move |x| (Jet::variable(x) * k).exp()
    }

    #[test]
    fn flavor_sign_coefficient_table() {
        let w = sp("constant", -1.0, 0.5);
        let k = c(-1.0, 0.5);
        let cases = [
            (LadderFlavor::L, -1.0, k.conj()),
            (LadderFlavor::LDagger, 1.0, k),
            (LadderFlavor::LStar, -1.0, k),
            (LadderFlavor::LStarDagger, 1.0, k.conj()),
        ];
        for (f, s, coef) in cases {
            let op = LadderOperator::new(f, &w);
            assert_eq!(op.sign(), s);
            assert_eq!(op.coefficient(0.3), coef);
            assert_eq!(op.adjoint().adjoint().flavor(), f);
        }
    }

    #[test]
    fn l_dagger_on_decaying_exponential() {
        let w = sp("constant", -1.0, 0.0);
        let op = LadderOperator::new(LadderFlavor::LDagger, &w);
        let psi = exp_jet(c(-1.0, 0.0));
        let out = apply_ladder(&op, &psi);
        for x in [0.0, 0.7, 2.0] {
            assert!((out(x).value() - c(-2.0 * (-x).exp(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn l_rho_on_sine_state() {
        let w = sp("constant", -1.0, 0.0);
        let n = (2.0 / std::f64::consts::PI).sqrt();
        let k = 1.3;
        for x in [0.0, 0.5, 4.0] {
            let psi = (Jet::variable(x) * k).compose(&sin_derivs(k * x)) * n;
            let got = apply_l_rho(&w, psi, x).value().re;
            let want = n * (-(k * x).sin() - k * (k * x).cos());
            assert!((got - want).abs() < 1e-14);
        }
    }

    fn sin_derivs(z: f64) -> Vec<Complex64> {
        (0..=MAX_ORDER)
            .map(|k| c((z + k as f64 * std::f64::consts::FRAC_PI_2).sin(), 0.0))
            .collect()
    }

    #[test]
    fn l_star_dagger_on_conjugate_seed() {
        let w = sp("constant", -1.0, 1.0);
        let op = LadderOperator::new(LadderFlavor::LStarDagger, &w);
        let k = c(-1.0, -1.0);
        let psi = exp_jet(k);
        let out = apply_ladder(&op, &psi);
        for x in [0.0, 1.0, 3.0] {
            let want = 2.0 * k * (k * x).exp();
            assert!((out(x).value() - want).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_entry_coefficients() {
        let (d, b) = (-1.0, 0.5);
        let w = sp("constant", d, b);
        let eta = build_eta(&w);
        assert_eq!(eta.drift(1.0), c(0.0, -2.0 * b));
        assert_eq!(eta.potential(1.0), c(b * b + d * d, 0.0));
        assert_eq!(eta.boundary(), BoundaryCondition::Robin(c(d, b)));
        assert!(!eta.is_hermitian());
        let eta0 = build_eta0(&w);
        assert_eq!(eta0.drift(1.0), c(0.0, -2.0 * b));
        assert_eq!(eta0.potential(1.0), c(b * b + d * d, 0.0));
        assert_eq!(eta0.boundary(), BoundaryCondition::Dirichlet);
        let h = build_h(&w);
        assert!(h.total_potential(2.0).norm() < 1e-15);
        let g = HalfLineGrid::new(20.0, 65).unwrap();
        let h0 = build_h0(&w, &g).unwrap();
        assert!(h0.total_potential(2.0).norm() < 1e-15);
        assert!(h0.is_hermitian());
        let hd = build_h_dagger(&w);
        assert_eq!(hd.boundary(), BoundaryCondition::Robin(c(d, -b)));
        assert_eq!(hd.kind(), OperatorKind::HDagger);
    }

    #[test]
    fn real_seed_collapses_onto_bar_operators() {
        let w = sp("poschl_teller", -1.0, 0.0);
        let eta = build_eta(&w);
        let bar = build_eta_bar(&w);
        assert!(eta.is_hermitian() && !eta.has_drift());
        assert!(build_h(&w).is_hermitian());
        for x in [0.0, 0.4, 3.0] {
            assert!((eta.potential(x) - bar.potential(x)).norm() < 1e-15);
            assert!((build_eta0(&w).potential(x) - build_eta_bar0(&w).potential(x)).norm() < 1e-15);
        }
        // potential(0) = W(0)^2 - W'(0) against the closed form with b = 0
        let v0 = crate::transformation::poschl_teller_v_bar(1.0, 1.0, -1.0, 0.0, 0.0);
        assert!((eta.potential(0.0).re - v0).abs() < 1e-14);
        let t = 1f64.tanh();
        assert!((w.big_w(0.0) + t).abs() < 1e-15);
        assert!((w.big_w(0.0).powi(2) - 0.580_025_658_385_973_9).abs() < 1e-15);
    }

    #[test]
    fn wrong_phase_is_not_real() {
        use crate::transformation::{AsymptoticParams, ExponentialModulus, TransformationFunction};
        let params = AsymptoticParams::new(-1.0, 1.0).unwrap();
        let u = TransformationFunction::from_modulus_without_phase(
            Arc::new(ExponentialModulus { d: -1.0 }),
            params,
            "no_phase",
        );
        let g = HalfLineGrid::new(20.0, 65).unwrap();
        let w = Superpotential::from_transformation(&u, &g).unwrap();
        assert!(matches!(build_h0(&w, &g), Err(Error::NotReal { .. })));
    }

    #[test]
    fn poschl_teller_h_matches_ladder_product() {
        let w = sp("poschl_teller", -1.0, 1.0);
        let h = build_h(&w);
        let ls = LadderOperator::new(LadderFlavor::LStar, &w);
        let ld = LadderOperator::new(LadderFlavor::LDagger, &w);
        for (mu, s) in [(2.0, 0.5), (3.0, 1.0), (5.0, 2.0), (4.0, 0.7), (6.5, 1.5)] {
            let psi = bump(mu, s, c(1.0, 0.3));
            for x in [0.0, 0.5, mu, 2.0 * mu] {
                let composed = ls.apply_jet(ld.apply_jet(psi(x), x), x) + psi(x).truncate(6) * w.alpha();
                let direct = h.apply_jet(psi(x), x);
                let scale = psi(x).value().norm().max(1e-3);
                assert!((composed.value() - direct.value()).norm() < 1e-10 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn bar_operators_annihilate_rho_and_its_inverse() {
        let w = sp("poschl_teller", -0.6, 1.2);
        let bar0 = build_eta_bar0(&w);
        let bar = build_eta_bar(&w);
        for x in [0.0, 0.3, 1.0, 5.0] {
            let lr = w.log_u(x).re();
            let rho = lr.exp();
            let inv = (-lr).exp();
            assert!(bar0.apply_jet(rho, x).value().norm() < 1e-12 * rho.value().norm());
            assert!(bar.apply_jet(inv, x).value().norm() < 1e-12 * inv.value().norm());
            // V_bar = V_bar0 - 2 (log rho)''
            let lhs = bar.potential(x) - bar0.potential(x) + 2.0 * lr.get(2);
            assert!(lhs.norm() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn factorizations_hold(d in -2.0f64..-0.2, b in -2.0f64..2.0, mu in 2.0f64..8.0, s in 0.5f64..2.0, x in 0.0f64..12.0) {
            let w = sp("poschl_teller", d, b);
            let l = LadderOperator::new(LadderFlavor::L, &w);
            let ld = l.adjoint();
            let ls = LadderOperator::new(LadderFlavor::LStar, &w);
            let g = HalfLineGrid::new(20.0, 65).unwrap();
            let psi = bump(mu, s, c(0.8, -0.4));
            let p = psi(x);
            let scale = 1.0 + p.value().norm();
            let a = w.alpha();
            let pairs = [
                (l.apply_jet(ld.apply_jet(p, x), x), build_eta(&w).apply_jet(p, x)),
                (ld.apply_jet(l.apply_jet(p, x), x), build_eta0(&w).apply_jet(p, x)),
                (ls.apply_jet(ld.apply_jet(p, x), x) + p.truncate(6) * a, build_h(&w).apply_jet(p, x)),
                (ld.apply_jet(ls.apply_jet(p, x), x) + p.truncate(6) * a, build_h0(&w, &g).unwrap().apply_jet(p, x)),
            ];
            for (lhs, rhs) in pairs {
                prop_assert!((lhs.value() - rhs.value()).norm() < 1e-9 * scale);
            }
            // (L*)^dagger L + conj(alpha) = L^dagger L* + alpha once omega solves its equation
            let lsd = ls.adjoint();
            let left = ld.apply_jet(ls.apply_jet(p, x), x) + p.truncate(6) * a;
            let right = lsd.apply_jet(l.apply_jet(p, x), x) + p.truncate(6) * a.conj();
            prop_assert!((left.value() - right.value()).norm() < 1e-9 * scale);
        }
    }
}
