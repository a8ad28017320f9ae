//! Closed-form error and memory-time bounds, all in natural-log domain.
//!
//! Every `O(.)` and `Omega(.)` prefactor is taken as 1.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::code::CssCode;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Fraction of the barrier credited to the Boltzmann suppression, in (0, 1).
    pub a: f64,
    pub beta: f64,
    /// Decoder energy barrier.
    pub m: u64,
    pub k: u64,
    /// Number of checks.
    #[serde(rename = "N")]
    pub n_checks: u64,
    #[serde(rename = "L")]
    pub l: u64,
    /// k >= r L.
    pub r: f64,
    /// m >= c L.
    pub c: f64,
    /// N <= v L^3.
    pub v: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(format!("a = {} must lie in (0, 1)", self.a));
        }
        if !(self.beta >= 0.0) {
            return Err(format!("beta = {} must be non-negative", self.beta));
        }
        if self.n_checks == 0 || self.l == 0 {
            return Err("N and L must be positive".into());
        }
        if !(self.c > 0.0 && self.v > 0.0 && self.r >= 0.0) {
            return Err("c and v must be positive, r non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBound {
    /// ln of tN 2^k e^{-a beta m} (1 + e^{-(1-a) beta})^N.
    pub log_closed_form: f64,
    /// ln of t e^{-(a c beta - r ln 2) L + 3 ln L}.
    pub log_family_form: f64,
    pub up_to_constant: bool,
}

fn ln_prefactor(t: f64) -> f64 {
    if t <= 0.0 {
        f64::NEG_INFINITY
    } else {
        t.ln()
    }
}

/// Logical error bound after time `t`.
pub fn epsilon_bound(p: &BoundParams, t: f64) -> EpsilonBound {
    let n = p.n_checks as f64;
    let l = p.l as f64;
    let log_closed_form = ln_prefactor(t) + n.ln() + p.k as f64 * LN_2 - p.a * p.beta * p.m as f64
        + n * (-(1.0 - p.a) * p.beta).exp().ln_1p();
    let log_family_form = ln_prefactor(t) - (p.a * p.c * p.beta - p.r * LN_2) * l + 3.0 * l.ln();
    EpsilonBound {
        log_closed_form,
        log_family_form,
        up_to_constant: true,
    }
}

/// ln of tN 2^k sum_{n >= m} C(N, n) e^{-beta n}, the tail before any relaxation.
pub fn exact_tail_log(p: &BoundParams, t: f64) -> f64 {
    let n = p.n_checks;
    let mut ln_binom = 0.0;
    let mut terms = Vec::new();
    for j in 0..=n {
        if j >= p.m {
            terms.push(ln_binom - p.beta * j as f64);
        }
        ln_binom += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = if top == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        top + terms.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
    };
    ln_prefactor(t) + (n as f64).ln() + p.k as f64 * LN_2 + tail
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmemBound {
    /// a beta m - k ln 2 - 3 ln L.
    pub log_tmem: f64,
    /// (a c beta - r ln 2) L - 3 ln L.
    pub log_tmem_family: f64,
    /// e^{(1-a) beta / 3}.
    pub l_star_conservative: f64,
    /// sqrt(a c beta / v) e^{(1-a) beta / 2}.
    pub l_star_refined: f64,
    /// a c beta e^{(1-a) beta / 3}.
    pub log_tmem_star_conservative: f64,
    /// sqrt((a c)^3 / v) beta^{3/2} e^{(1-a) beta / 2}.
    pub log_tmem_star_refined: f64,
    /// The starred forms drop the r ln 2 and 3 ln L terms, which is only sensible when this holds.
    pub large_beta: bool,
}

/// Memory-time lower bounds and the size cutoffs beyond which the bounds stop growing.
pub fn tmem_bound(p: &BoundParams) -> TmemBound {
    let l = p.l as f64;
    let ac = p.a * p.c;
    let gap = (1.0 - p.a) * p.beta;
    TmemBound {
        log_tmem: p.a * p.beta * p.m as f64 - p.k as f64 * LN_2 - 3.0 * l.ln(),
        log_tmem_family: (ac * p.beta - p.r * LN_2) * l - 3.0 * l.ln(),
        l_star_conservative: (gap / 3.0).exp(),
        l_star_refined: (ac * p.beta / p.v).sqrt() * (gap / 2.0).exp(),
        log_tmem_star_conservative: ac * p.beta * (gap / 3.0).exp(),
        log_tmem_star_refined: (ac.powi(3) / p.v).sqrt() * p.beta.powf(1.5) * (gap / 2.0).exp(),
        large_beta: gap >= 1.0 && ac * p.beta > p.r * LN_2,
    }
}

/// One line of a bound sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub a: f64,
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub m: u64,
    pub k: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub eps_bound_log: f64,
    pub tmem_log: f64,
    #[serde(rename = "Lstar_conservative")]
    pub lstar_conservative: f64,
    #[serde(rename = "Lstar_refined")]
    pub lstar_refined: f64,
}

impl BoundRow {
    pub const CSV_HEADER: &'static str =
        "a,beta,L,m,k,N,eps_bound_log,tmem_log,Lstar_conservative,Lstar_refined";

    pub fn new(p: &BoundParams, t: f64) -> Self {
        let eps = epsilon_bound(p, t);
        let tm = tmem_bound(p);
        BoundRow {
            a: p.a,
            beta: p.beta,
            l: p.l,
            m: p.m,
            k: p.k,
            n: p.n_checks,
            eps_bound_log: eps.log_closed_form,
            tmem_log: tm.log_tmem,
            lstar_conservative: tm.l_star_conservative,
            lstar_refined: tm.l_star_refined,
        }
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.a,
            self.beta,
            self.l,
            self.m,
            self.k,
            self.n,
            self.eps_bound_log,
            self.tmem_log,
            self.lstar_conservative,
            self.lstar_refined
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierConstantReport {
    /// Largest check weight.
    pub w: usize,
    /// Largest number of checks on one qubit.
    pub w_prime: usize,
    /// 4 / (w w').
    pub fraction: f64,
    /// The barrier statement with the confinement constant left symbolic.
    pub statement: String,
}

pub fn barrier_constant_report(code: &CssCode) -> BarrierConstantReport {
    let (w, w_prime) = (code.w, code.w_prime);
    let fraction = 4.0 / (w * w_prime).max(1) as f64;
    BarrierConstantReport {
        w,
        w_prime,
        fraction,
        statement: format!("m >= (4 mu / {}) L = {fraction} mu L", w * w_prime),
    }
}
