//! Parameter types, derived dimensionless quantities, and the weak-driving
//! validity checker.
//!
//! All rates are expressed in units of the atomic decay rate of cavity 1
//! (Gamma_1 = 1 internally); the input amplitude alpha carries units of
//! sqrt(photons/time) in the same system. The physics depends only on the
//! dimensionless combinations C = 2g^2/(kappa Gamma), D = 2 Delta/Gamma and
//! on |alpha|^2/Gamma, so absolute optical frequencies never appear: the
//! light-atom detuning Delta and the cavity-light detuning delta carry all
//! frequency information.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::steady_state;

/// Tolerance for unitarity/normalization identities such as r^2 + t^2 = 1.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Which algebra produces the cavity reflection coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Full mirror algebra F = (f - r)/(1 - r f) with the exponential
    /// round-trip factor f.
    ExactMirrorAlgebra,
    /// First-order expansion of f and r in the high-finesse limit
    /// t^2 -> 0 at fixed C and D.
    HighFinesseFirstOrder,
}

/// How the cavity-light detuning is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CavityDetuning {
    /// 2 delta/kappa = D C/(1 + D^2), which centers the empty-cavity and
    /// atom-loaded phase shifts symmetrically in the expanded regime.
    Auto,
    /// Explicit detuning delta = omega_c - omega.
    Fixed(f64),
}

/// Constants of one atom-cavity system: coupling g, atomic decay Gamma,
/// light-atom detuning Delta, round-trip time tau, input coupler (r, t),
/// per-round-trip intracavity survival eta, and cavity-light detuning delta.
///
/// kappa = t^2/tau is the cavity decay rate. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityQubitParams {
    g: f64,
    gamma: f64,
    delta: f64,
    kappa: f64,
    tau: f64,
    r_mirror: f64,
    t_mirror: f64,
    eta_cav: f64,
    delta_cav: f64,
    auto_detuning: bool,
}

impl CavityQubitParams {
    /// Build from physical constants. kappa and r_mirror are derived from
    /// (t_mirror, tau); the detuning choice fixes delta_cav.
    pub fn new(
        g: f64,
        gamma: f64,
        delta: f64,
        tau: f64,
        t_mirror: f64,
        eta_cav: f64,
        detuning: CavityDetuning,
    ) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidParameter(format!("coupling g = {g} must be >= 0")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("decay rate Gamma = {gamma} must be > 0")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("detuning Delta = {delta} must be finite")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("round-trip time tau = {tau} must be > 0")));
        }
        if !(t_mirror.is_finite() && t_mirror > 0.0 && t_mirror <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "coupler transmission t = {t_mirror} must lie in (0, 1]"
            )));
        }
        if !(eta_cav > 0.0 && eta_cav <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "intracavity survival eta = {eta_cav} must lie in (0, 1]"
            )));
        }
        let kappa = t_mirror * t_mirror / tau;
        let r_mirror = (1.0 - t_mirror * t_mirror).max(0.0).sqrt();
        let cooperativity = 2.0 * g * g / (kappa * gamma);
        let d_ratio = 2.0 * delta / gamma;
        if !cooperativity.is_finite() || !d_ratio.is_finite() {
            return Err(Error::InvalidParameter(
                "derived C or D is not finite".to_string(),
            ));
        }
        let (delta_cav, auto_detuning) = match detuning {
            CavityDetuning::Auto => {
                let d = 0.5 * kappa * d_ratio * cooperativity / (1.0 + d_ratio * d_ratio);
                (d, true)
            }
            CavityDetuning::Fixed(d) => {
                if !d.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "cavity detuning delta_cav = {d} must be finite"
                    )));
                }
                (d, false)
            }
        };
        Ok(Self {
            g,
            gamma,
            delta,
            kappa,
            tau,
            r_mirror,
            t_mirror,
            eta_cav,
            delta_cav,
            auto_detuning,
        })
    }

    /// Build from the dimensionless pair (C, D) in Gamma = 1 units, realizing
    /// g = sqrt(C kappa Gamma / 2), Delta = D Gamma / 2, t = sqrt(kappa tau).
    pub fn from_cooperativity(
        cooperativity: f64,
        d_ratio: f64,
        kappa: f64,
        tau: f64,
        eta_cav: f64,
        detuning: CavityDetuning,
    ) -> Result<Self> {
        if !(cooperativity.is_finite() && cooperativity >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cooperativity C = {cooperativity} must be >= 0"
            )));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} must be > 0")));
        }
        let t_sq = kappa * tau;
        if t_sq > 1.0 + UNITARITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "kappa tau = {t_sq} exceeds 1: no physical coupler transmission"
            )));
        }
        let gamma = 1.0;
        Self::new(
            (0.5 * cooperativity * kappa * gamma).sqrt(),
            gamma,
            0.5 * d_ratio * gamma,
            tau,
            t_sq.min(1.0).sqrt(),
            eta_cav,
            detuning,
        )
    }

    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn r_mirror(&self) -> f64 {
        self.r_mirror
    }
    pub fn t_mirror(&self) -> f64 {
        self.t_mirror
    }
    pub fn eta_cav(&self) -> f64 {
        self.eta_cav
    }
    pub fn delta_cav(&self) -> f64 {
        self.delta_cav
    }
    pub fn auto_detuning(&self) -> bool {
        self.auto_detuning
    }

    /// Cooperativity C = 2 g^2 / (kappa Gamma).
    pub fn cooperativity(&self) -> f64 {
        2.0 * self.g * self.g / (self.kappa * self.gamma)
    }

    /// Scaled light-atom detuning D = 2 Delta / Gamma.
    pub fn detuning_ratio(&self) -> f64 {
        2.0 * self.delta / self.gamma
    }
}

/// Derived dimensionless pair (C, D) of one cavity.
pub fn derived_params(c: &CavityQubitParams) -> (f64, f64) {
    (c.cooperativity(), c.detuning_ratio())
}

/// Loop-level constants: input beam splitter (r3, t3), loop survival eta3,
/// phase shifter P = exp(i psi), and drive amplitude alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    r3: f64,
    t3: f64,
    eta3: f64,
    psi: f64,
    alpha: Complex64,
}

impl LoopParams {
    pub fn new(r3: f64, eta3: f64, psi: f64, alpha: Complex64) -> Result<Self> {
        if !(r3.is_finite() && (0.0..1.0).contains(&r3)) {
            return Err(Error::InvalidParameter(format!("r3 = {r3} must lie in [0, 1)")));
        }
        if !(eta3 > 0.0 && eta3 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "loop survival eta3 = {eta3} must lie in (0, 1]"
            )));
        }
        if !psi.is_finite() {
            return Err(Error::InvalidParameter(format!("loop phase psi = {psi} must be finite")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".to_string()));
        }
        Ok(Self {
            r3,
            t3: (1.0 - r3 * r3).sqrt(),
            eta3,
            psi,
            alpha,
        })
    }

    /// Same loop with a different input amplitude.
    pub fn with_alpha(&self, alpha: Complex64) -> Self {
        Self { alpha, ..*self }
    }

    /// Same loop with a different beam-splitter reflectivity.
    pub fn with_r3(&self, r3: f64) -> Result<Self> {
        Self::new(r3, self.eta3, self.psi, self.alpha)
    }

    pub fn r3(&self) -> f64 {
        self.r3
    }
    pub fn t3(&self) -> f64 {
        self.t3
    }
    pub fn eta3(&self) -> f64 {
        self.eta3
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// Phase factor P = exp(i psi).
    pub fn phase_factor(&self) -> Complex64 {
        Complex64::new(0.0, self.psi).exp()
    }

    pub fn sqrt_eta3(&self) -> f64 {
        self.eta3.sqrt()
    }
}

/// Default bound below which the three-factor weak-driving product counts
/// as "much less than one".
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.1;
/// Default multiplier M in the interference constraint
/// |1 - r3 P F1 F2 sqrt(eta3)| > M / C.
pub const DEFAULT_CONSTRAINT_MARGIN: f64 = 10.0;

/// Complete description of one closed-loop setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub cavity1: CavityQubitParams,
    pub cavity2: CavityQubitParams,
    pub loop_params: LoopParams,
    pub backend: Backend,
    pub validity_threshold: f64,
    pub constraint_margin: f64,
}

impl SystemConfig {
    pub fn new(
        cavity1: CavityQubitParams,
        cavity2: CavityQubitParams,
        loop_params: LoopParams,
        backend: Backend,
        validity_threshold: f64,
        constraint_margin: f64,
    ) -> Result<Self> {
        if !(validity_threshold > 0.0 && validity_threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "validity threshold {validity_threshold} must lie in (0, 1)"
            )));
        }
        if !(constraint_margin >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "constraint margin {constraint_margin} must be >= 1"
            )));
        }
        Ok(Self {
            cavity1,
            cavity2,
            loop_params,
            backend,
            validity_threshold,
            constraint_margin,
        })
    }

    /// Two identical cavities described by (C, D) with kappa = 1, tau = 0.01
    /// in Gamma = 1 units, auto-detuned, first-order backend.
    pub fn symmetric_first_order(
        cooperativity: f64,
        d_ratio: f64,
        loop_params: LoopParams,
    ) -> Result<Self> {
        let cav = CavityQubitParams::from_cooperativity(
            cooperativity,
            d_ratio,
            1.0,
            0.01,
            1.0,
            CavityDetuning::Auto,
        )?;
        Self::new(
            cav,
            cav,
            loop_params,
            Backend::HighFinesseFirstOrder,
            DEFAULT_VALIDITY_THRESHOLD,
            DEFAULT_CONSTRAINT_MARGIN,
        )
    }

    pub fn cavity(&self, q: usize) -> &CavityQubitParams {
        match q {
            0 => &self.cavity1,
            1 => &self.cavity2,
            _ => panic!("cavity index must be 0 or 1"),
        }
    }

    pub fn with_backend(&self, backend: Backend) -> Self {
        Self { backend, ..*self }
    }

    pub fn with_loop(&self, loop_params: LoopParams) -> Self {
        Self { loop_params, ..*self }
    }
}

/// The three factors of the weak-driving product for one cavity and one
/// partner-atom state, together with the interference-constraint check.
#[derive(Debug, Clone, Copy)]
pub struct ValidityFactors {
    /// Cavity index (0 or 1).
    pub cavity: usize,
    /// State of the other atom.
    pub partner_state: u8,
    /// 2 |alpha|^2 / Gamma_q: input photon flux relative to the saturated
    /// spontaneous-emission rate.
    pub drive_factor: f64,
    /// 4 C (1 + D^2) / ((1 + D^2 + 2C)^2 + C^2 D^2): atomic response, of
    /// order 1/C for large C.
    pub response_factor: f64,
    /// t3^2 / |1 - r3 P F1 F2 sqrt(eta3)|^2: loop buildup toward cavity q.
    pub loop_factor: f64,
    /// Product of the three factors; must stay below the threshold.
    pub product: f64,
    pub pass: bool,
    /// |1 - r3 P F1 F2 sqrt(eta3)| for this conditional state.
    pub loop_denominator: f64,
    /// margin / C_q.
    pub constraint_bound: f64,
    pub constraint_ok: bool,
}

/// Outcome of the weak-driving check for all four (cavity, partner-state)
/// combinations.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub entries: Vec<ValidityFactors>,
    pub threshold: f64,
    pub margin: f64,
}

impl ValidityReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass && e.constraint_ok)
    }

    pub fn worst_product(&self) -> f64 {
        self.entries.iter().map(|e| e.product).fold(0.0, f64::max)
    }
}

/// Evaluate the weak-driving condition behind the adiabatic elimination:
/// the effective drive of the atom in cavity q, conditioned on that atom
/// being in state |1> and the partner atom in state |i>, must be small.
/// The product factorizes into drive, atomic-response, and loop-buildup
/// factors; separately, the loop denominator must stay well above 1/C_q or
/// the intracavity field ceases to be perturbative.
pub fn check_weak_driving(
    cfg: &SystemConfig,
    amplitudes: &steady_state::ConditionalAmplitudes,
) -> Result<ValidityReport> {
    let model = steady_state::NetworkModel::from_config(cfg)?;
    let lp = &cfg.loop_params;
    let alpha_sq = lp.alpha().norm_sqr();
    debug_assert!(
        (amplitudes.alpha() - lp.alpha()).norm() <= 1e-12 * (1.0 + lp.alpha().norm()),
        "amplitudes were not computed for this configuration"
    );

    let mut entries = Vec::with_capacity(4);
    for q in 0..2 {
        let cav = cfg.cavity(q);
        let (c, d) = derived_params(cav);
        let response =
            4.0 * c * (1.0 + d * d) / ((1.0 + d * d + 2.0 * c).powi(2) + c * c * d * d);
        for partner in 0..2u8 {
            // Atom q in |1>, partner atom in |partner>.
            let (i1, i2) = if q == 0 { (1, partner) } else { (partner, 1) };
            let denom =
                (Complex64::new(1.0, 0.0) - lp.r3() * model.loop_gain(i1, i2)).norm();
            let drive = 2.0 * alpha_sq / cav.gamma();
            let loop_factor = lp.t3() * lp.t3() / (denom * denom);
            let product = drive * response * loop_factor;
            let bound = cfg.constraint_margin / c;
            entries.push(ValidityFactors {
                cavity: q,
                partner_state: partner,
                drive_factor: drive,
                response_factor: response,
                loop_factor,
                product,
                pass: product < cfg.validity_threshold,
                loop_denominator: denom,
                constraint_bound: bound,
                constraint_ok: denom > bound,
            });
        }
    }
    Ok(ValidityReport {
        entries,
        threshold: cfg.validity_threshold,
        margin: cfg.constraint_margin,
    })
}
