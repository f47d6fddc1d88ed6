//! Generalized fractional Taylor basis `e_{alpha_m}(lambda) = (lambda - lambda0)^{alpha_m} / Gamma(alpha_m + 1)`
//! with `alpha_m = m + alpha`, and its distributional dual `e^{alpha_m} = D^{alpha_m} delta(lambda - lambda0)`.
//!
//! The dual family is never sampled. Pairings are computed through the RL power
//! rule: `<e^{alpha_m}, e_{alpha_m'}> = [D^{alpha_m} e_{alpha_m'}](lambda0)`, which
//! reduces to `(lambda - lambda0)^{m'-m} / Gamma(m' - m + 1)` at `lambda0`.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fracops::FracOrder;
use crate::special::recip_gamma;

/// Largest |m| accepted by [`dual_pairing`].
pub const PAIRING_WINDOW: i32 = 12;

/// Exponents closer than this to a ladder rung are snapped onto it.
const LADDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisElement {
    pub order: FracOrder,
    pub center: f64,
}

impl BasisElement {
    pub fn new(order: FracOrder, center: f64) -> Self {
        Self { order, center }
    }
}

/// Inclusive range of series indices `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationWindow {
    pub min: i32,
    pub max: i32,
}

impl Default for TruncationWindow {
    fn default() -> Self {
        Self { min: -4, max: 12 }
    }
}

impl TruncationWindow {
    pub fn contains(&self, m: i32) -> bool {
        (self.min..=self.max).contains(&m)
    }
}

/// Truncated series `sum_m c_m e_{alpha_m}(lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracSeries {
    alpha: f64,
    center: f64,
    window: TruncationWindow,
    coeffs: BTreeMap<i32, Complex64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!("ladder offset alpha must lie in [0, 1), got {alpha}")))
    }
}

impl FracSeries {
    pub fn new(alpha: f64, center: f64, window: TruncationWindow) -> Result<Self> {
        check_alpha(alpha)?;
        if window.min > window.max {
            return Err(Error::Domain("empty truncation window".into()));
        }
        Ok(Self { alpha, center, window, coeffs: BTreeMap::new() })
    }

    /// Series centered at 0 with the default window.
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, TruncationWindow::default())
    }

    pub fn insert(&mut self, m: i32, c: Complex64) -> Result<()> {
        if !self.window.contains(m) {
            return Err(Error::IndexOutOfRange(format!(
                "index {m} outside truncation window [{}, {}]",
                self.window.min, self.window.max
            )));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Domain(format!("coefficient for m = {m} is not finite")));
        }
        self.coeffs.insert(m, c);
        Ok(())
    }

    pub fn set(mut self, m: i32, c: Complex64) -> Result<Self> {
        self.insert(m, c)?;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn window(&self) -> TruncationWindow {
        self.window
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, m: i32) -> Option<Complex64> {
        self.coeffs.get(&m).copied()
    }

    /// `alpha_m = m + alpha`.
    pub fn ladder_order(&self, m: i32) -> f64 {
        m as f64 + self.alpha
    }
}

pub fn eval_basis(elem: BasisElement, lambda: f64) -> Result<Complex64> {
    if lambda < elem.center {
        return Err(Error::Domain(format!(
            "basis evaluated left of its center ({lambda} < {})",
            elem.center
        )));
    }
    let order = elem.order.total();
    if order == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let s = lambda - elem.center;
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::new(s.powf(order) * recip_gamma(order + 1.0), 0.0))
}

/// `<e^{alpha_m}, e_{alpha_m'}>`; equals the Kronecker delta.
pub fn dual_pairing(m: i32, m_prime: i32, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if m.abs() > PAIRING_WINDOW || m_prime.abs() > PAIRING_WINDOW {
        return Err(Error::IndexOutOfRange(format!(
            "pairing indices ({m}, {m_prime}) outside |m| <= {PAIRING_WINDOW}"
        )));
    }
    // D^{alpha_m} (s^{alpha_m'} / Gamma(alpha_m' + 1)) = s^{m'-m} / Gamma(m' - m + 1);
    // the Gamma(alpha_m' + 1) factors cancel exactly.
    let shift = m_prime - m;
    let inv = recip_gamma(shift as f64 + 1.0);
    if inv == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // evaluated at s = 0: s^0 = 1, s^k = 0 for k > 0
    let at_center = if shift == 0 { 1.0 } else { 0.0 };
    Ok(Complex64::new(inv * at_center, 0.0))
}

/// `sum_{m >= 0} c_m e_{alpha_m}(lambda)`.
///
/// Terms with negative `m` are skipped: they are singular at the center and
/// only enter through [`dual_pairing`].
pub fn reconstruct(series: &FracSeries, lambda: f64) -> Result<Complex64> {
    if lambda < series.center {
        return Err(Error::Domain(format!(
            "series evaluated left of its center ({lambda} < {})",
            series.center
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (&m, &c) in series.coeffs.range(0..) {
        let elem = BasisElement::new(FracOrder::new(series.ladder_order(m))?, series.center);
        acc += c * eval_basis(elem, lambda)?;
    }
    Ok(acc)
}

/// Inverse of [`reconstruct`] on fractional polynomials `sum_j c_j (lambda - lambda0)^{e_j}`.
pub fn project(f_powers: &[(f64, Complex64)], alpha: f64, window: TruncationWindow) -> Result<FracSeries> {
    let mut series = FracSeries::new(alpha, 0.0, window)?;
    for &(exponent, c) in f_powers {
        let m_real = exponent - alpha;
        let m = m_real.round();
        if (m_real - m).abs() > LADDER_TOL {
            return Err(Error::OffLadder { exponent, alpha });
        }
        let m = m as i32;
        if !window.contains(m) {
            return Err(Error::IndexOutOfRange(format!(
                "exponent {exponent} maps to m = {m}, outside the truncation window"
            )));
        }
        let inv = recip_gamma(series.ladder_order(m) + 1.0);
        if inv == 0.0 {
            return Err(Error::OffLadder { exponent, alpha });
        }
        let prev = series.coeff(m).unwrap_or_default();
        series.insert(m, prev + c / inv)?;
    }
    Ok(series)
}

/// Coordinate and momentum series whose coefficient slots are paired one-to-one.
///
/// The pairing carries the canonical bracket `{q^{(alpha_m)}, p_{(alpha_m')}} = delta_{m m'}`
/// as bookkeeping on the slot keys.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSeries {
    q: FracSeries,
    p: FracSeries,
}

impl CanonicalSeries {
    pub fn new(q: FracSeries, p: FracSeries) -> Result<Self> {
        if q.alpha != p.alpha || q.center != p.center {
            return Err(Error::Domain("q and p series live on different ladders".into()));
        }
        if !q.coeffs.keys().eq(p.coeffs.keys()) {
            return Err(Error::Domain("q and p coefficient slots do not match one-to-one".into()));
        }
        Ok(Self { q, p })
    }

    pub fn q(&self) -> &FracSeries {
        &self.q
    }

    pub fn p(&self) -> &FracSeries {
        &self.p
    }

    /// Bracket of q-slot `m` with p-slot `m_prime`.
    pub fn bracket(&self, m: i32, m_prime: i32) -> Result<f64> {
        if !self.q.coeffs.contains_key(&m) || !self.p.coeffs.contains_key(&m_prime) {
            return Err(Error::IndexOutOfRange(format!("no slot pair ({m}, {m_prime})")));
        }
        Ok(if m == m_prime { 1.0 } else { 0.0 })
    }

    /// Every (q-slot, p-slot) pair with a non-zero bracket.
    pub fn canonical_pairs(&self) -> Vec<(i32, i32)> {
        self.q.coeffs.keys().map(|&m| (m, m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn elem(order: f64, center: f64) -> BasisElement {
        BasisElement::new(FracOrder::new(order).unwrap(), center)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_basis(elem(0.0, 1.0), 7.3).unwrap(), c(1.0));
        assert_eq!(eval_basis(elem(0.0, 1.0), 1.0).unwrap(), c(1.0));
        assert_eq!(eval_basis(elem(1.0, 0.5), 2.5).unwrap(), c(2.0));
        let v = eval_basis(elem(0.5, 0.0), 1.0).unwrap();
        assert!((v.re - 1.128_379_167_095_512_6).abs() < 1e-13);
        assert_eq!(eval_basis(elem(0.5, 2.0), 2.0).unwrap(), c(0.0));
        assert!(eval_basis(elem(0.5, 2.0), 1.9).is_err());
    }

    #[test]
    fn classical_limit() {
        for m in 0..8 {
            for &lam in &[0.3, 1.0, 2.7] {
                let v = eval_basis(elem(m as f64, 0.0), lam).unwrap().re;
                let expect = lam.powi(m) / gamma(m as f64 + 1.0);
                assert!((v - expect).abs() <= 1e-15 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(dual_pairing(2, 2, 0.5).unwrap(), c(1.0));
        assert_eq!(dual_pairing(1, 3, 0.5).unwrap(), c(0.0));
        assert_eq!(dual_pairing(3, 1, 0.5).unwrap(), c(0.0));
        assert_eq!(dual_pairing(-3, -3, 0.25).unwrap(), c(1.0));
        assert!(dual_pairing(13, 0, 0.5).is_err());
        assert!(dual_pairing(0, 0, 1.0).is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let s = FracSeries::with_alpha(0.5).unwrap().set(0, c(2.5)).unwrap();
        // alpha = 0.5 so m = 0 is e_{0.5}; use alpha = 0 for the constant case
        let k = FracSeries::with_alpha(0.0).unwrap().set(0, c(2.5)).unwrap();
        assert_eq!(reconstruct(&k, 3.0).unwrap(), c(2.5));
        assert!(reconstruct(&s, -1.0).is_err());

        let taylor = FracSeries::with_alpha(0.0).unwrap().set(0, c(1.0)).unwrap().set(1, c(1.0)).unwrap();
        assert!((reconstruct(&taylor, 0.75).unwrap() - c(1.75)).norm() < 1e-15);

        let frac = FracSeries::with_alpha(0.5)
            .unwrap()
            .set(0, c(1.0))
            .unwrap()
            .set(1, c(2.0))
            .unwrap()
            .set(2, c(3.0))
            .unwrap();
        let expect = 1.0 / gamma(1.5) + 2.0 / gamma(2.5) + 3.0 / gamma(3.5);
        assert!((reconstruct(&frac, 1.0).unwrap().re - expect).abs() < 1e-14);
    }

    #[test]
    fn negative_indices_skipped_in_reconstruction() {
        let s = FracSeries::with_alpha(0.5).unwrap().set(-2, c(10.0)).unwrap().set(1, c(1.0)).unwrap();
        let v = reconstruct(&s, 1.0).unwrap().re;
        assert!((v - 1.0 / gamma(2.5)).abs() < 1e-14);
    }

    #[test]
    fn project_examples() {
        let s = project(&[(0.0, c(1.0))], 0.0, TruncationWindow::default()).unwrap();
        assert_eq!(s.coeffs().len(), 1);
        assert_eq!(s.coeff(0), Some(c(1.0)));

        let s = project(&[(1.5, c(1.0))], 0.5, TruncationWindow::default()).unwrap();
        assert!((s.coeff(1).unwrap().re - gamma(2.5)).abs() < 1e-14);

        assert!(matches!(
            project(&[(0.3, c(1.0))], 0.5, TruncationWindow::default()),
            Err(Error::OffLadder { .. })
        ));
    }

    #[test]
    fn canonical_slots() {
        let q = FracSeries::with_alpha(0.5).unwrap().set(0, c(1.0)).unwrap().set(2, c(3.0)).unwrap();
        let p = FracSeries::with_alpha(0.5).unwrap().set(0, c(-1.0)).unwrap().set(2, c(0.1)).unwrap();
        let cs = CanonicalSeries::new(q.clone(), p).unwrap();
        assert_eq!(cs.bracket(2, 2).unwrap(), 1.0);
        assert_eq!(cs.bracket(0, 2).unwrap(), 0.0);
        assert!(cs.bracket(1, 1).is_err());
        assert_eq!(cs.canonical_pairs(), vec![(0, 0), (2, 2)]);

        let bad = FracSeries::with_alpha(0.5).unwrap().set(1, c(1.0)).unwrap();
        assert!(CanonicalSeries::new(q, bad).is_err());
    }
}
