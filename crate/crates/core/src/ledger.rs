//! The explicit constant chain of the improvement-of-flatness step, derived
//! from the Harnack parameters `(n, ε₁, η)` and kept in base-2 log form.
//!
//! Every constant is a product of powers of 2, `n` and `ε₁`, so its `log2` is
//! an affine expression in `α`, `log2 n` and `log2 ε₁`. Storing logs avoids
//! the underflow of `ε₀`, which sits around `2^(-10⁴)` for typical inputs.

use num_rational::Ratio;
use serde_json::{json, Value};
use thiserror::Error;

use crate::hp::LogReal;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("dimension n = {0} must be at least 2")]
    Dimension(u32),
    #[error("eps1 must lie in (0, 1/4], got {0}")]
    Eps1Range(f64),
    #[error("eta must lie in (0, 1/5], got {0}")]
    EtaRange(f64),
    #[error("alpha = -log2(1 - eta) = {0} must lie in (0, 1)")]
    AlphaRange(f64),
    #[error("flatness eps = {eps} outside (0, eps1/8 = {cap}]")]
    EpsRange { eps: f64, cap: f64 },
    #[error("closed-form identity for eps0 violated: relative gap {0:e}")]
    Identity(f64),
    #[error("could not parse {0:?} as a decimal number")]
    Parse(String),
}

/// Input triple of the Harnack inequality: dimension, flatness threshold ε₁
/// and improvement factor η.
#[derive(Debug, Clone)]
pub struct HarnackParams<R> {
    pub n: u32,
    pub eps1: R,
    pub eta: R,
    /// Set when α was supplied as an exact rational; η is then derived from it.
    pub exact_alpha: Option<Ratio<i64>>,
}

impl<R: LogReal> HarnackParams<R> {
    pub fn new(n: u32, eps1: R, eta: R) -> Result<Self, LedgerError> {
        let p = HarnackParams {
            n,
            eps1,
            eta,
            exact_alpha: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with η chosen so that `α = -log2(1-η)` equals `alpha` exactly.
    pub fn with_alpha(n: u32, eps1: R, alpha: Ratio<i64>) -> Result<Self, LedgerError> {
        let a = R::from_ratio(*alpha.numer(), *alpha.denom());
        if !(a > R::from_i64(0)) || a >= R::from_i64(1) {
            return Err(LedgerError::AlphaRange(a.to_f64()));
        }
        let eta = R::from_i64(1) - (-a).exp2();
        let p = HarnackParams {
            n,
            eps1,
            eta,
            exact_alpha: Some(alpha),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_decimal(n: u32, eps1: &str, eta: &str) -> Result<Self, LedgerError> {
        let e1 = R::parse_decimal(eps1).ok_or_else(|| LedgerError::Parse(eps1.into()))?;
        let et = R::parse_decimal(eta).ok_or_else(|| LedgerError::Parse(eta.into()))?;
        Self::new(n, e1, et)
    }

    fn validate(&self) -> Result<(), LedgerError> {
        let zero = R::from_i64(0);
        if self.n < 2 {
            return Err(LedgerError::Dimension(self.n));
        }
        if !(self.eps1 > zero) || self.eps1 > R::from_ratio(1, 4) {
            return Err(LedgerError::Eps1Range(self.eps1.to_f64()));
        }
        // Derived η may carry a rounding error in its last bit.
        let eta_cap = R::from_ratio(1, 5) + R::from_f64(R::unit_roundoff() * 16.0);
        if !(self.eta > zero) || self.eta > eta_cap {
            return Err(LedgerError::EtaRange(self.eta.to_f64()));
        }
        let a = self.alpha();
        if !(a > zero) || a >= R::from_i64(1) {
            return Err(LedgerError::AlphaRange(a.to_f64()));
        }
        Ok(())
    }

    /// `α = -log2(1 - η)`.
    pub fn alpha(&self) -> R {
        match self.exact_alpha {
            Some(a) => R::from_ratio(*a.numer(), *a.denom()),
            None => -(R::from_i64(1) - self.eta.clone()).log2(),
        }
    }
}

/// A positive constant represented by its base-2 logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct LogValue<R> {
    pub log2: R,
}

impl<R: LogReal> LogValue<R> {
    pub fn new(log2: R) -> Self {
        LogValue { log2 }
    }

    /// `2^log2` as an `f64`, or `None` when it leaves the finite normal range.
    pub fn approx(&self) -> Option<f64> {
        let l = self.log2.to_f64();
        if l.is_finite() && l > -1022.0 && l < 1023.0 {
            Some(l.exp2())
        } else {
            None
        }
    }

    pub fn json(&self) -> Value {
        let approx = match self.approx() {
            Some(v) => json!(v),
            None if self.log2.to_f64() < 0.0 => json!("underflow"),
            None => json!("overflow"),
        };
        json!({ "log2": self.log2.to_decimal(), "approx": approx })
    }
}

/// The ε-thresholds appearing in the hypotheses of the pipeline stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// `ε₁/8`, hypothesis of the Harnack iteration.
    Harnack,
    /// `(2^(-6-5α) ε₁^(γα))^(2/(1+γα))`, touching step.
    Touch,
    /// `(2^(-6-5α) ε₁^(γα))^(4/(2+3γα))`, gradient bound inside the touching step.
    Grad,
    /// `(2^(-18-5α) n^(-5) ε₁^(γα))^(2/(1-γα))`, barrier construction.
    Barrier,
    /// `(r₀/(8C₃))^(1/(γα))`, final inclusion.
    Final,
}

impl ThresholdKind {
    pub const ALL: [ThresholdKind; 5] = [
        ThresholdKind::Harnack,
        ThresholdKind::Touch,
        ThresholdKind::Grad,
        ThresholdKind::Barrier,
        ThresholdKind::Final,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::Harnack => "T_harnack",
            ThresholdKind::Touch => "T_touch",
            ThresholdKind::Grad => "T_grad",
            ThresholdKind::Barrier => "T_barrier",
            ThresholdKind::Final => "T_final",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold<R> {
    pub kind: ThresholdKind,
    pub value: LogValue<R>,
}

/// Exact rational exponents, available when α was given as a rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactExponents {
    pub alpha: Ratio<i64>,
    pub gamma: Ratio<i64>,
    pub gamma_alpha: Ratio<i64>,
    /// `8/(γα²)`, the outer exponent of ε₀.
    pub eps0_exponent: Ratio<i64>,
}

impl ExactExponents {
    fn from_alpha(alpha: Ratio<i64>) -> Self {
        let one = Ratio::from_integer(1);
        let gamma = one / (one - alpha);
        ExactExponents {
            alpha,
            gamma,
            gamma_alpha: gamma * alpha,
            eps0_exponent: Ratio::from_integer(8) / (gamma * alpha * alpha),
        }
    }
}

/// Every derived constant and threshold, in log₂ form.
#[derive(Debug, Clone)]
pub struct ConstantLedger<R> {
    pub params: HarnackParams<R>,
    pub alpha: R,
    pub gamma: R,
    pub exact: Option<ExactExponents>,
    pub c1: LogValue<R>,
    pub c2: LogValue<R>,
    pub c3: LogValue<R>,
    pub c4: LogValue<R>,
    pub c5: LogValue<R>,
    pub c6: LogValue<R>,
    pub r0: LogValue<R>,
    pub eps0: LogValue<R>,
    /// ε₀ evaluated through the stated closed form, kept for the identity check.
    pub eps0_closed_form: LogValue<R>,
    pub thresholds: Vec<Threshold<R>>,
    /// Set when α > 1/4, where the simplifications that assume α ≤ 1/4 lapse.
    pub alpha_warning: bool,
}

fn int<R: LogReal>(k: i64) -> R {
    R::from_i64(k)
}

/// Derives the full ledger and checks the closed-form identity for ε₀.
pub fn derive_ledger<R: LogReal>(params: &HarnackParams<R>) -> Result<ConstantLedger<R>, LedgerError> {
    params.validate()?;
    let exact = params.exact_alpha.map(ExactExponents::from_alpha);
    let from_ratio = |r: Ratio<i64>| R::from_ratio(*r.numer(), *r.denom());

    let alpha = params.alpha();
    let gamma = match exact {
        Some(e) => from_ratio(e.gamma),
        None => int::<R>(1) / (int::<R>(1) - alpha.clone()),
    };
    let ga = match exact {
        Some(e) => from_ratio(e.gamma_alpha),
        None => gamma.clone() * alpha.clone(),
    };
    let l_eps1 = params.eps1.log2();
    let l_n = int::<R>(params.n as i64).log2();
    let five_a = int::<R>(5) * alpha.clone();

    let c1 = int::<R>(4) + int::<R>(4) * alpha.clone();
    let c2 = int::<R>(3) * alpha.clone() / (int::<R>(1) - alpha.clone()) - int(1) - gamma.clone() * l_eps1.clone();
    let c3 = int::<R>(4) + five_a.clone() - ga.clone() * l_eps1.clone();
    let c4 = int::<R>(8) + five_a.clone() + l_n.clone() - ga.clone() * l_eps1.clone();
    let c5 = int::<R>(10) + five_a.clone() + l_n.clone() - ga.clone() * l_eps1.clone() / int(2);
    let c6 = int::<R>(14) + five_a.clone() + l_n.clone() - ga.clone() * l_eps1.clone();
    let r0 = int::<R>(-16) - int::<R>(2) * l_n.clone();

    let eps0_exp = match exact {
        Some(e) => from_ratio(e.eps0_exponent),
        None => int::<R>(8) / (gamma.clone() * alpha.clone() * alpha.clone()),
    };
    // (r₀ / (8 C₆))^(8/(γα²))
    let eps0 = eps0_exp.clone() * (r0.clone() - int(3) - c6.clone());
    // (ε₁^(γα) / (2^(33+5α) n³))^(8/(γα²))
    let closed =
        eps0_exp * (ga.clone() * l_eps1.clone() - int(33) - five_a.clone() - int::<R>(3) * l_n.clone());

    let gap = (eps0.clone() - closed.clone()).abs().to_f64();
    let scale = eps0.abs().to_f64().max(1.0);
    if gap > R::tolerance(&eps0) || !(gap / scale).is_finite() {
        return Err(LedgerError::Identity(gap / scale));
    }

    let touch_base = ga.clone() * l_eps1.clone() - int(6) - five_a.clone();
    let t_harnack = l_eps1.clone() - int(3);
    let t_touch = int::<R>(2) / (int::<R>(1) + ga.clone()) * touch_base.clone();
    let t_grad = int::<R>(4) / (int::<R>(2) + int::<R>(3) * ga.clone()) * touch_base;
    let t_barrier = int::<R>(2) / (int::<R>(1) - ga.clone())
        * (ga.clone() * l_eps1.clone() - int(18) - five_a.clone() - int::<R>(5) * l_n);
    let t_final = (r0.clone() - int(3) - c3.clone()) / ga;

    let thresholds = vec![
        Threshold { kind: ThresholdKind::Harnack, value: LogValue::new(t_harnack) },
        Threshold { kind: ThresholdKind::Touch, value: LogValue::new(t_touch) },
        Threshold { kind: ThresholdKind::Grad, value: LogValue::new(t_grad) },
        Threshold { kind: ThresholdKind::Barrier, value: LogValue::new(t_barrier) },
        Threshold { kind: ThresholdKind::Final, value: LogValue::new(t_final) },
    ];

    let alpha_warning = match exact {
        Some(e) => e.alpha > Ratio::new(1, 4),
        None => alpha > R::from_ratio(1, 4),
    };

    Ok(ConstantLedger {
        params: params.clone(),
        alpha,
        gamma,
        exact,
        c1: LogValue::new(c1),
        c2: LogValue::new(c2),
        c3: LogValue::new(c3),
        c4: LogValue::new(c4),
        c5: LogValue::new(c5),
        c6: LogValue::new(c6),
        r0: LogValue::new(r0),
        eps0: LogValue::new(eps0),
        eps0_closed_form: LogValue::new(closed),
        thresholds,
        alpha_warning,
    })
}

impl<R: LogReal> ConstantLedger<R> {
    pub fn threshold(&self, kind: ThresholdKind) -> &LogValue<R> {
        &self
            .thresholds
            .iter()
            .find(|t| t.kind == kind)
            .expect("every threshold kind is populated")
            .value
    }

    /// Relative gap between the two routes to log₂ ε₀.
    pub fn identity_gap(&self) -> f64 {
        let d = (self.eps0.log2.clone() - self.eps0_closed_form.log2.clone()).abs().to_f64();
        d / self.eps0.log2.abs().to_f64().max(f64::MIN_POSITIVE)
    }

    /// Floating-point view of the constants for the grid modules.
    pub fn constants<T: Scalar>(&self) -> Constants<T> {
        let t = |x: &R| T::cst(x.to_f64());
        let pow2 = |v: &LogValue<R>| T::cst(v.log2.to_f64().exp2());
        let mut thresholds = [0.0; 5];
        for (slot, kind) in thresholds.iter_mut().zip(ThresholdKind::ALL) {
            *slot = self.threshold(kind).log2.to_f64();
        }
        Constants {
            n: self.params.n as usize,
            eps1: t(&self.params.eps1),
            eta: t(&self.params.eta),
            alpha: t(&self.alpha),
            gamma: t(&self.gamma),
            c1: pow2(&self.c1),
            c2: pow2(&self.c2),
            c3: pow2(&self.c3),
            c4: pow2(&self.c4),
            c5: pow2(&self.c5),
            c6: pow2(&self.c6),
            r0: pow2(&self.r0),
            log2_eps0: self.eps0.log2.to_f64(),
            threshold_log2: thresholds,
        }
    }
}

/// One link `lhs ≤ rhs` of the threshold chain, compared in log space.
#[derive(Debug, Clone)]
pub struct ChainLink<R> {
    pub name: &'static str,
    pub lhs_log2: R,
    pub rhs_log2: R,
    /// `rhs - lhs` in log₂; non-negative when the link holds.
    pub margin_log2: R,
    pub holds: bool,
}

/// A side condition that only applies when α ≤ 1/4.
#[derive(Debug, Clone)]
pub struct SideCondition {
    pub name: &'static str,
    pub applicable: bool,
    /// `rhs - lhs`; non-negative when the condition holds.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct ChainReport<R> {
    pub links: Vec<ChainLink<R>>,
    pub side_conditions: Vec<SideCondition>,
    pub alpha_warning: bool,
    /// Conjunction of all links.
    pub holds: bool,
}

fn link<R: LogReal>(name: &'static str, lhs: &LogValue<R>, rhs: &LogValue<R>) -> ChainLink<R> {
    let margin = rhs.log2.clone() - lhs.log2.clone();
    let tol = R::tolerance(&lhs.log2).max(R::tolerance(&rhs.log2));
    let holds = margin.to_f64() >= -tol;
    ChainLink {
        name,
        lhs_log2: lhs.log2.clone(),
        rhs_log2: rhs.log2.clone(),
        margin_log2: margin,
        holds,
    }
}

/// Evaluates every inequality of the threshold chain. Violations are reported,
/// never raised.
pub fn check_threshold_chain<R: LogReal>(ledger: &ConstantLedger<R>) -> ChainReport<R> {
    use ThresholdKind::*;
    let th = |k| ledger.threshold(k);
    let links = vec![
        link("eps0 <= T_barrier", &ledger.eps0, th(Barrier)),
        link("T_barrier <= T_touch", th(Barrier), th(Touch)),
        link("T_touch <= T_grad", th(Touch), th(Grad)),
        link("eps0 <= T_final", &ledger.eps0, th(Final)),
        link("eps0 <= T_harnack", &ledger.eps0, th(Harnack)),
    ];

    let applicable = !ledger.alpha_warning;
    let (c2_margin, ga_margin) = match ledger.exact {
        Some(e) => {
            // log2 C₂ + γ log2 ε₁ = 3α/(1-α) - 1 exactly.
            let c2m = Ratio::from_integer(1) - Ratio::from_integer(3) * e.alpha / (Ratio::from_integer(1) - e.alpha);
            let gam = Ratio::new(1, 12) - e.gamma_alpha / 4;
            (ratio_f64(c2m), ratio_f64(gam))
        }
        None => {
            let eps1_neg_gamma = -(ledger.gamma.clone() * ledger.params.eps1.log2());
            let c2m = (eps1_neg_gamma - ledger.c2.log2.clone()).to_f64();
            let gam = (R::from_ratio(1, 12) - ledger.gamma.clone() * ledger.alpha.clone() / R::from_i64(4)).to_f64();
            (c2m, gam)
        }
    };
    let tol = R::unit_roundoff() * 1024.0;
    let side_conditions = vec![
        SideCondition {
            name: "C2 <= eps1^(-gamma)",
            applicable,
            margin: c2_margin,
            holds: c2_margin >= -tol,
        },
        SideCondition {
            name: "gamma*alpha/4 <= 1/12",
            applicable,
            margin: ga_margin,
            holds: ga_margin >= -tol,
        },
    ];

    let holds = links.iter().all(|l| l.holds);
    ChainReport {
        links,
        side_conditions,
        alpha_warning: ledger.alpha_warning,
        holds,
    }
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Scale bound attached to the maximal Harnack depth.
#[derive(Debug, Clone)]
pub struct ScaleBound<R> {
    /// `log2 2^(-M̃-1)`.
    pub lhs_log2: R,
    /// `log2 (C₂ ε^γ)`, the bound as stated.
    pub stated_rhs_log2: R,
    pub stated_holds: bool,
    /// `log2 (2 C₂ ε^γ) = -M`, which always dominates `2^(-M̃-1)`.
    pub corrected_rhs_log2: R,
    pub corrected_holds: bool,
}

#[derive(Debug, Clone)]
pub struct HarnackDepth<R> {
    /// Real solution of `2^M ε (1-η)^(M-3) = ε₁`.
    pub m: R,
    pub m_tilde: i64,
    pub scale_bound: ScaleBound<R>,
}

/// Solves `2^M ε (1-η)^(M-3) = ε₁` for the largest admissible iteration depth.
pub fn max_harnack_depth<R: LogReal>(eps: &R, params: &HarnackParams<R>) -> Result<HarnackDepth<R>, LedgerError> {
    let zero = R::from_i64(0);
    let cap = params.eps1.clone() / R::from_i64(8);
    let cap_tol = R::from_f64(cap.to_f64() * R::unit_roundoff() * 16.0);
    if !(*eps > zero) || *eps > cap.clone() + cap_tol {
        return Err(LedgerError::EpsRange {
            eps: eps.to_f64(),
            cap: cap.to_f64(),
        });
    }
    let alpha = params.alpha();
    let gamma = match params.exact_alpha {
        Some(a) => {
            let g = Ratio::from_integer(1) / (Ratio::from_integer(1) - a);
            R::from_ratio(*g.numer(), *g.denom())
        }
        None => R::from_i64(1) / (R::from_i64(1) - alpha.clone()),
    };
    let l_ratio = (params.eps1.clone() / eps.clone()).log2();
    let m = gamma.clone() * (l_ratio - R::from_i64(3) * alpha.clone());

    // Snap to an integer when M lands on one up to rounding.
    let mut m_floor = m.floor();
    let next = m_floor.clone() + R::from_i64(1);
    if (next.clone() - m.clone()).to_f64() <= R::tolerance(&m) {
        m_floor = next;
    }
    let m_tilde = m_floor.to_f64() as i64;

    let l_eps1 = params.eps1.log2();
    let c2 = R::from_i64(3) * alpha.clone() / (R::from_i64(1) - alpha.clone()) - R::from_i64(1) - gamma.clone() * l_eps1;
    let stated = c2 + gamma * eps.log2();
    let lhs = R::from_i64(-m_tilde - 1);
    let tol = R::tolerance(&m);
    let corrected = stated.clone() + R::from_i64(1);
    let stated_holds = (stated.clone() - lhs.clone()).to_f64() >= -tol;
    let corrected_holds = (corrected.clone() - lhs.clone()).to_f64() >= -tol;
    Ok(HarnackDepth {
        m,
        m_tilde,
        scale_bound: ScaleBound {
            lhs_log2: lhs,
            stated_rhs_log2: stated,
            stated_holds,
            corrected_rhs_log2: corrected,
            corrected_holds,
        },
    })
}

/// Floating-point constants handed to the grid modules.
#[derive(Debug, Clone, Copy)]
pub struct Constants<T> {
    pub n: usize,
    pub eps1: T,
    pub eta: T,
    pub alpha: T,
    pub gamma: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
    pub c5: T,
    pub c6: T,
    pub r0: T,
    pub log2_eps0: f64,
    /// log₂ of the thresholds, indexed like [`ThresholdKind::ALL`].
    pub threshold_log2: [f64; 5],
}

impl<T: Scalar> Constants<T> {
    pub fn gamma_alpha(&self) -> T {
        self.gamma * self.alpha
    }

    /// Hölder modulus of the regularized graph, `2^α C₁ = 2^(4+5α)`.
    pub fn holder_cone(&self) -> T {
        T::cst(2.0).powf(self.alpha) * self.c1
    }

    /// Cap on `‖u‖_{C^{0,α}(B'_{1/2})}`, `2^(6+5α)`.
    pub fn holder_norm_cap(&self) -> T {
        T::cst(2.0).powf(T::cst(6.0) + T::cst(5.0) * self.alpha)
    }

    /// `r = ε^(γα/4)`.
    pub fn regularization_scale(&self, eps: T) -> T {
        eps.powf(self.gamma_alpha() / T::cst(4.0))
    }

    /// `δ = 4 C₃ ε^(1+γα/2)`.
    pub fn slide_opening(&self, eps: T) -> T {
        T::cst(4.0) * self.c3 * eps.powf(T::one() + self.gamma_alpha() / T::cst(2.0))
    }

    /// `C₄ ε^(γα/2)`, the lower bound on `Δφ` at the touching point.
    pub fn touch_floor(&self, eps: T) -> T {
        self.c4 * eps.powf(self.gamma_alpha() / T::cst(2.0))
    }

    /// `4 C₅ r^(α/2)`, the boundary lift of the barriers.
    pub fn barrier_lift(&self, eps: T) -> T {
        T::cst(4.0) * self.c5 * self.regularization_scale(eps).powf(self.alpha / T::cst(2.0))
    }

    /// `C₆ ε^(γα²/8)`.
    pub fn closeness_bound(&self, eps: T) -> T {
        self.c6 * eps.powf(self.gamma_alpha() * self.alpha / T::cst(8.0))
    }

    /// `C₃ ε^(1+γα)`, the sandwich gap in height units.
    pub fn sandwich_gap(&self, eps: T) -> T {
        self.c3 * eps.powf(T::one() + self.gamma_alpha())
    }

    /// `C₃ ε^(γα)`, the sandwich gap in stretched units.
    pub fn stretched_gap(&self, eps: T) -> T {
        self.c3 * eps.powf(self.gamma_alpha())
    }

    /// `ε^(-1/2)`.
    pub fn derivative_cap(&self, eps: T) -> T {
        eps.powf(T::cst(-0.5))
    }

    pub fn threshold_log2(&self, kind: ThresholdKind) -> f64 {
        let i = ThresholdKind::ALL.iter().position(|k| *k == kind).unwrap();
        self.threshold_log2[i]
    }

    /// Whether `eps` is at most the given threshold.
    pub fn below_threshold(&self, eps: T, kind: ThresholdKind) -> bool {
        eps.as_f64().log2() <= self.threshold_log2(kind)
    }
}

/// JSON export of a ledger together with its chain report.
pub fn ledger_json<R: LogReal>(ledger: &ConstantLedger<R>, chain: &ChainReport<R>) -> Value {
    let thresholds: Vec<Value> = ledger
        .thresholds
        .iter()
        .map(|t| {
            let mut v = t.value.json();
            v["name"] = json!(t.kind.name());
            v
        })
        .collect();
    let links: Vec<Value> = chain
        .links
        .iter()
        .map(|l| {
            json!({
                "link": l.name,
                "lhsLog2": l.lhs_log2.to_decimal(),
                "rhsLog2": l.rhs_log2.to_decimal(),
                "marginLog2": l.margin_log2.to_decimal(),
                "holds": l.holds,
            })
        })
        .collect();
    let sides: Vec<Value> = chain
        .side_conditions
        .iter()
        .map(|s| json!({ "name": s.name, "applicable": s.applicable, "margin": s.margin, "holds": s.holds }))
        .collect();
    json!({
        "n": ledger.params.n,
        "eps1": ledger.params.eps1.to_f64(),
        "eta": ledger.params.eta.to_f64(),
        "alpha": ledger.alpha.to_f64(),
        "gamma": ledger.gamma.to_f64(),
        "alphaExact": ledger.exact.map(|e| e.alpha.to_string()),
        "eps0Exponent": ledger.exact.map(|e| e.eps0_exponent.to_string()),
        "precisionDigits": R::digits(),
        "C1": ledger.c1.json(),
        "C2": ledger.c2.json(),
        "C3": ledger.c3.json(),
        "C4": ledger.c4.json(),
        "C5": ledger.c5.json(),
        "C6": ledger.c6.json(),
        "r0": ledger.r0.json(),
        "eps0": ledger.eps0.json(),
        "thresholds": thresholds,
        "chain": links,
        "chainHolds": chain.holds,
        "sideConditions": sides,
        "alphaWarning": ledger.alpha_warning,
    })
}
