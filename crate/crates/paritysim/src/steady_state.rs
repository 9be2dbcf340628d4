//! State-dependent cavity response and the conditional steady-state
//! amplitudes of the closed loop.
//!
//! Each cavity, seen from outside, multiplies the incident flux amplitude by
//! a reflection coefficient F that depends on the state of its atom. The
//! loop beam splitter, phase shifter, and lossy mirror then fix all labeled
//! amplitudes once the self-consistent loop equation is solved:
//!
//!   zeta2 = P t3 alpha / (1 - r3 P F1 F2 sqrt(eta3)),
//!   beta  = i (r3 - P F1 F2 sqrt(eta3)) / (1 - r3 P F1 F2 sqrt(eta3)) alpha.
//!
//! Two backends produce F: the exact mirror algebra (Moebius map of the
//! round-trip factor f) and the first-order high-finesse expansion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{Backend, CavityQubitParams, LoopParams, SystemConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Guard below which the loop denominator counts as singular.
pub const SINGULARITY_GUARD: f64 = 1e-15;

/// Round-trip factor f of one cavity for a given atom state: atom
/// interaction, cavity-light detuning, and intracavity loss folded into a
/// single multiplicative factor per round trip,
///
///   f = sqrt(eta) exp(-(Gamma/2 - i Delta) g^2 delta_{1,i} tau /
///                      (Gamma^2/4 + Delta^2) - i delta_c tau).
pub fn round_trip_factor(c: &CavityQubitParams, atom_state: u8) -> Complex64 {
    let mut exponent = Complex64::new(0.0, -c.delta_cav() * c.tau());
    if atom_state == 1 {
        let denom = c.gamma() * c.gamma() / 4.0 + c.delta() * c.delta();
        exponent -= Complex64::new(c.gamma() / 2.0, -c.delta()) * (c.g() * c.g() / denom)
            * c.tau();
    }
    c.eta_cav().sqrt() * exponent.exp()
}

/// Moebius map from the round-trip factor to the cavity reflection
/// coefficient, F = (f - r)/(1 - r f). Maps the closed unit disc into
/// itself for r in [0, 1).
pub fn mobius_reflection(f: Complex64, r_mirror: f64) -> Result<Complex64> {
    let denom = ONE - r_mirror * f;
    if denom.norm() < SINGULARITY_GUARD {
        return Err(Error::InvalidParameter(format!(
            "degenerate mirror response: |1 - r f| = {:.3e}",
            denom.norm()
        )));
    }
    Ok((f - r_mirror) / denom)
}

/// Exact-backend reflection coefficient of one cavity.
pub fn reflection_coefficient_exact(c: &CavityQubitParams, atom_state: u8) -> Result<Complex64> {
    mobius_reflection(round_trip_factor(c, atom_state), c.r_mirror())
}

/// First-order (high-finesse) reflection coefficient, valid with the
/// auto-detuning convention:
///
///   F = (1 + D^2 - 2C d1 + 2iDC(d1 - 1/2)) / (1 + D^2 + 2C d1 - 2iDC(d1 - 1/2)),
///
/// with d1 = 1 if the atom is in |1> and 0 otherwise.
pub fn reflection_coefficient_expanded(
    cooperativity: f64,
    d_ratio: f64,
    atom_state: u8,
) -> Complex64 {
    let d1 = if atom_state == 1 { 1.0 } else { 0.0 };
    let re = 1.0 + d_ratio * d_ratio;
    let im = 2.0 * d_ratio * cooperativity * (d1 - 0.5);
    let num = Complex64::new(re - 2.0 * cooperativity * d1, im);
    let den = Complex64::new(re + 2.0 * cooperativity * d1, -im);
    num / den
}

/// Reflection and round-trip factors for both cavities and both atom
/// states, indexed `[cavity][state]`.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionCoefficients {
    pub backend: Backend,
    pub round_trip: [[Complex64; 2]; 2],
    pub refl: [[Complex64; 2]; 2],
}

/// Per-cavity response used by the loop solver: reflection coefficient and
/// intracavity amplitude coefficient per atom state (xi = xi_coeff * input
/// flux amplitude), plus the constants needed for photon numbers.
#[derive(Debug, Clone, Copy)]
pub struct CavityResponse {
    pub refl: [Complex64; 2],
    pub xi_coeff: [Complex64; 2],
    pub round_trip: [Complex64; 2],
    pub tau: f64,
    pub eta_cav: f64,
}

impl CavityResponse {
    pub fn from_params(c: &CavityQubitParams, backend: Backend) -> Result<Self> {
        let f = [round_trip_factor(c, 0), round_trip_factor(c, 1)];
        match backend {
            Backend::ExactMirrorAlgebra => {
                let refl = [
                    mobius_reflection(f[0], c.r_mirror())?,
                    mobius_reflection(f[1], c.r_mirror())?,
                ];
                let xi = [
                    c.t_mirror() / (ONE - c.r_mirror() * f[0]),
                    c.t_mirror() / (ONE - c.r_mirror() * f[1]),
                ];
                Ok(Self {
                    refl,
                    xi_coeff: xi,
                    round_trip: f,
                    tau: c.tau(),
                    eta_cav: c.eta_cav(),
                })
            }
            Backend::HighFinesseFirstOrder => {
                let (coop, d) = (c.cooperativity(), c.detuning_ratio());
                let refl = [
                    reflection_coefficient_expanded(coop, d, 0),
                    reflection_coefficient_expanded(coop, d, 1),
                ];
                let pre = 2.0 / (c.kappa() * c.tau()).sqrt();
                let mut xi = [Complex64::default(); 2];
                for (state, slot) in xi.iter_mut().enumerate() {
                    let d1 = state as f64;
                    *slot = pre * (1.0 + d * d)
                        / Complex64::new(
                            1.0 + d * d + 2.0 * coop * d1,
                            -2.0 * coop * d * (d1 - 0.5),
                        );
                }
                Ok(Self {
                    refl,
                    xi_coeff: xi,
                    round_trip: f,
                    tau: c.tau(),
                    eta_cav: c.eta_cav(),
                })
            }
        }
    }

    /// Cavity response in the strongly nonresonant regime D ~ C >> 1:
    /// F^1 = (D + iC)/(D - iC), F^0 = conj(F^1), with the intracavity
    /// coefficients expanded to the same order. Used to reproduce the
    /// nonresonant closed forms exactly through the generic pipeline.
    pub fn nonresonant_approximation(
        cooperativity: f64,
        d_ratio: f64,
        kappa: f64,
        tau: f64,
        eta_cav: f64,
    ) -> Self {
        let f1 = Complex64::new(d_ratio, cooperativity) / Complex64::new(d_ratio, -cooperativity);
        let pre = 2.0 / (kappa * tau).sqrt() * (1.0 + d_ratio * d_ratio).sqrt();
        let x1 = pre / Complex64::new(d_ratio, -cooperativity);
        Self {
            refl: [f1.conj(), f1],
            xi_coeff: [x1.conj(), x1],
            round_trip: [ONE, ONE],
            tau,
            eta_cav,
        }
    }
}

/// Both cavity responses plus the loop constants; everything the loop
/// solver needs.
#[derive(Debug, Clone, Copy)]
pub struct NetworkModel {
    pub cavities: [CavityResponse; 2],
    pub loop_params: LoopParams,
}

impl NetworkModel {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        Ok(Self {
            cavities: [
                CavityResponse::from_params(&cfg.cavity1, cfg.backend)?,
                CavityResponse::from_params(&cfg.cavity2, cfg.backend)?,
            ],
            loop_params: cfg.loop_params,
        })
    }

    /// Round-trip gain of the loop for one conditional state:
    /// W = P F1 F2 sqrt(eta3). The steady state exists iff |1 - r3 W| > 0.
    pub fn loop_gain(&self, i1: u8, i2: u8) -> Complex64 {
        self.loop_params.phase_factor()
            * (self.cavities[0].refl[i1 as usize] * self.cavities[1].refl[i2 as usize])
            * self.loop_params.sqrt_eta3()
    }

    pub fn reflection_coefficients(&self, backend: Backend) -> ReflectionCoefficients {
        ReflectionCoefficients {
            backend,
            round_trip: [self.cavities[0].round_trip, self.cavities[1].round_trip],
            refl: [self.cavities[0].refl, self.cavities[1].refl],
        }
    }

    /// Solve the loop for all four conditional amplitude sets.
    pub fn solve(&self) -> Result<ConditionalAmplitudes> {
        let lp = &self.loop_params;
        let alpha = lp.alpha();
        let p = lp.phase_factor();
        let (r3, t3) = (lp.r3(), lp.t3());
        let s3 = lp.sqrt_eta3();

        let mut states = [[StateAmplitudes::default(); 2]; 2];
        for i1 in 0..2u8 {
            for i2 in 0..2u8 {
                let f1 = self.cavities[0].refl[i1 as usize];
                let f2 = self.cavities[1].refl[i2 as usize];
                // Grouping (f1 f2) first keeps every downstream quantity
                // bitwise invariant under (i1, i2) -> (i2, i1) for identical
                // cavities.
                let gain = p * (f1 * f2) * s3;
                let denom = ONE - r3 * gain;
                if denom.norm() < SINGULARITY_GUARD {
                    return Err(Error::SingularLoop {
                        i1,
                        i2,
                        denom: denom.norm(),
                    });
                }
                let zeta2 = p * t3 * alpha / denom;
                let zeta3 = -I * f1 * zeta2;
                let zeta4 = I * s3 * zeta3;
                let zeta5 = -I * gain * t3 * alpha / denom;
                let zeta1 = t3 * alpha + I * r3 * zeta5;
                let beta = I * (r3 - gain) * alpha / denom;
                states[i1 as usize][i2 as usize] = StateAmplitudes {
                    zeta: [zeta1, zeta2, zeta3, zeta4, zeta5],
                    xi1: self.cavities[0].xi_coeff[i1 as usize] * zeta2,
                    xi2: self.cavities[1].xi_coeff[i2 as usize] * zeta4,
                    beta,
                };
            }
        }
        Ok(ConditionalAmplitudes {
            states,
            alpha,
            tau: [self.cavities[0].tau, self.cavities[1].tau],
        })
    }
}

/// Flux amplitudes zeta_1..zeta_5 around the loop, intracavity amplitudes
/// xi_1, xi_2, and the output amplitude beta for one two-qubit state.
#[derive(Debug, Clone, Copy, Default)]
pub struct StateAmplitudes {
    pub zeta: [Complex64; 5],
    pub xi1: Complex64,
    pub xi2: Complex64,
    pub beta: Complex64,
}

/// The four conditional amplitude sets, indexed by the two atom states.
#[derive(Debug, Clone)]
pub struct ConditionalAmplitudes {
    states: [[StateAmplitudes; 2]; 2],
    alpha: Complex64,
    tau: [f64; 2],
}

impl ConditionalAmplitudes {
    pub fn get(&self, i1: u8, i2: u8) -> &StateAmplitudes {
        &self.states[i1 as usize][i2 as usize]
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn tau(&self, q: usize) -> f64 {
        self.tau[q]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, u8, &StateAmplitudes)> {
        (0..2u8).flat_map(move |i1| {
            (0..2u8).map(move |i2| (i1, i2, &self.states[i1 as usize][i2 as usize]))
        })
    }
}

/// Solve the loop for the given configuration.
pub fn solve_loop(cfg: &SystemConfig) -> Result<ConditionalAmplitudes> {
    NetworkModel::from_config(cfg)?.solve()
}

/// Reflection and round-trip factors for the given configuration.
pub fn reflection_coefficients(cfg: &SystemConfig) -> Result<ReflectionCoefficients> {
    Ok(NetworkModel::from_config(cfg)?.reflection_coefficients(cfg.backend))
}

/// Conditional mean photon number |xi_q|^2 tau_q in cavity q.
pub fn conditional_cavity_photon_number(
    amps: &ConditionalAmplitudes,
    q: usize,
    i1: u8,
    i2: u8,
) -> f64 {
    let xi = match q {
        0 => amps.get(i1, i2).xi1,
        1 => amps.get(i1, i2).xi2,
        _ => panic!("cavity index must be 0 or 1"),
    };
    xi.norm_sqr() * amps.tau(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CavityDetuning;
    use approx::assert_relative_eq;

    fn loop_with(r3: f64, eta3: f64, psi: f64, alpha: f64) -> LoopParams {
        LoopParams::new(r3, eta3, psi, Complex64::new(alpha, 0.0)).unwrap()
    }

    #[test]
    fn round_trip_factor_uncoupled_undetuned() {
        let c = CavityQubitParams::new(1.0, 1.0, 0.0, 0.01, 0.1, 1.0, CavityDetuning::Fixed(0.0))
            .unwrap();
        assert_eq!(round_trip_factor(&c, 0), ONE);
    }

    #[test]
    fn round_trip_factor_resonant_decay() {
        // Gamma=1, g=1, Delta=0, tau=0.01, delta=0, eta=1 -> f = e^{-0.02}.
        let c = CavityQubitParams::new(1.0, 1.0, 0.0, 0.01, 0.1, 1.0, CavityDetuning::Fixed(0.0))
            .unwrap();
        let f = round_trip_factor(&c, 1);
        assert_relative_eq!(f.re, (-0.02_f64).exp(), max_relative = 1e-12);
        assert_eq!(f.im, 0.0);
    }

    #[test]
    fn round_trip_factor_detuned() {
        // Gamma=1, g=1, Delta=5, tau=0.01: exponent -(0.5 - 5i)(1/25.25)(0.01).
        let c = CavityQubitParams::new(1.0, 1.0, 5.0, 0.01, 0.1, 1.0, CavityDetuning::Fixed(0.0))
            .unwrap();
        let f = round_trip_factor(&c, 1);
        let expected = (Complex64::new(-0.5, 5.0) * (0.01 / 25.25)).exp();
        assert_relative_eq!(f.re, expected.re, max_relative = 1e-12);
        assert_relative_eq!(f.im, expected.im, max_relative = 1e-12);
        assert_relative_eq!(f.norm(), (-0.5 * 0.01 / 25.25_f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn mobius_identity_and_arithmetic() {
        // f = 1 is a fixed point for any r.
        for r in [0.0, 0.5, 0.99] {
            assert_relative_eq!(
                mobius_reflection(ONE, r).unwrap().re,
                1.0,
                max_relative = 1e-12
            );
        }
        // f = 0.9802, r = 0.99.
        let f = mobius_reflection(Complex64::new(0.9802, 0.0), 0.99).unwrap();
        let expected = (0.9802 - 0.99) / (1.0 - 0.99 * 0.9802);
        assert_relative_eq!(f.re, expected, max_relative = 1e-12);
        assert_eq!(f.im, 0.0);
    }

    #[test]
    fn mobius_pure_phase_stays_on_circle() {
        for k in 0..16 {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
            let f = Complex64::new(0.0, phi).exp();
            let refl = mobius_reflection(f, 0.9).unwrap();
            assert_relative_eq!(refl.norm(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn expanded_reflection_limits() {
        // D=0, state 1: (1-2C)/(1+2C); C=100 -> -199/201.
        let f = reflection_coefficient_expanded(100.0, 0.0, 1);
        assert_relative_eq!(f.re, -199.0 / 201.0, max_relative = 1e-12);
        assert_eq!(f.im, 0.0);
        // State 0 at D=0 is unity.
        assert_eq!(reflection_coefficient_expanded(100.0, 0.0, 0), ONE);
        // D=C large: F -> (D+iC)/(D-iC) = i at D=C.
        let f = reflection_coefficient_expanded(1e8, 1e8, 1);
        let target = Complex64::new(0.0, 1.0);
        assert!((f - target).norm() < 1e-6);
    }

    #[test]
    fn solve_loop_resonant_strong_coupling_limit() {
        // F^1 = -1, F^0 = 1, psi = 0, eta3 = 1: beta^00 = -i alpha,
        // beta^10 = beta^01 = i alpha, beta^11 = -i alpha.
        for r3 in [0.0, 0.3, 0.9] {
            let cfg = SystemConfig::symmetric_first_order(1e12, 0.0, loop_with(r3, 1.0, 0.0, 1.0))
                .unwrap();
            let amps = solve_loop(&cfg).unwrap();
            let a = amps.alpha();
            assert!((amps.get(0, 0).beta + I * a).norm() < 1e-9);
            assert!((amps.get(1, 0).beta - I * a).norm() < 1e-9);
            assert!((amps.get(0, 1).beta - I * a).norm() < 1e-9);
            assert!((amps.get(1, 1).beta + I * a).norm() < 1e-9);
        }
    }

    #[test]
    fn solve_loop_open_empty() {
        // r3=0, empty cavities, resonant: zeta2 = alpha, beta = -i alpha.
        let cfg = SystemConfig::symmetric_first_order(0.0, 0.0, loop_with(0.0, 1.0, 0.0, 2.0))
            .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let s = amps.get(0, 0);
        assert!((s.zeta[1] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((s.beta + Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn solve_loop_linear_relations() {
        let cfg = SystemConfig::symmetric_first_order(
            80.0,
            80.0,
            loop_with(0.6, 0.9, std::f64::consts::PI, 1.3),
        )
        .unwrap();
        let model = NetworkModel::from_config(&cfg).unwrap();
        let amps = model.solve().unwrap();
        let lp = &cfg.loop_params;
        let p = lp.phase_factor();
        for (i1, i2, s) in amps.iter() {
            let f1 = model.cavities[0].refl[i1 as usize];
            let f2 = model.cavities[1].refl[i2 as usize];
            let scale = amps.alpha().norm().max(1.0);
            assert!((s.zeta[0] - (lp.t3() * amps.alpha() + I * lp.r3() * s.zeta[4])).norm()
                < 1e-12 * scale);
            assert!((s.zeta[1] - p * s.zeta[0]).norm() < 1e-12 * scale);
            assert!((s.zeta[2] + I * f1 * s.zeta[1]).norm() < 1e-12 * scale);
            assert!((s.zeta[3] - I * lp.sqrt_eta3() * s.zeta[2]).norm() < 1e-12 * scale);
            assert!((s.zeta[4] + I * f2 * s.zeta[3]).norm() < 1e-12 * scale);
            assert!((s.beta - (lp.t3() * s.zeta[4] + I * lp.r3() * amps.alpha())).norm()
                < 1e-12 * scale);
        }
    }

    #[test]
    fn odd_states_identical_for_identical_cavities() {
        for (c, d, r3, eta3, psi) in [
            (100.0, 100.0, 0.5, 1.0, std::f64::consts::PI),
            (10.0, 0.0, 0.8, 0.7, 0.0),
            (37.0, -12.0, 0.2, 0.95, 1.1),
        ] {
            let cfg =
                SystemConfig::symmetric_first_order(c, d, loop_with(r3, eta3, psi, 1.0)).unwrap();
            let amps = solve_loop(&cfg).unwrap();
            // Bitwise equality: identical inputs, symmetric evaluation.
            assert_eq!(amps.get(1, 0).beta, amps.get(0, 1).beta);
            assert_eq!(amps.get(1, 0).zeta[1], amps.get(0, 1).zeta[1]);
        }
    }

    #[test]
    fn unitary_loop_preserves_flux() {
        // Pure-phase round-trip factors, eta3 = eta_q = 1: |beta| = |alpha|.
        let cav = CavityQubitParams::new(1.0, 1.0, 5.0, 0.01, 0.3, 1.0, CavityDetuning::Auto)
            .unwrap();
        // Delta != 0 gives |f^1| < 1; instead force pure phases by zero coupling
        // with fixed detunings on both states.
        let cav0 =
            CavityQubitParams::new(0.0, 1.0, 0.0, 0.01, 0.3, 1.0, CavityDetuning::Fixed(7.0))
                .unwrap();
        let _ = cav;
        let lp = loop_with(0.7, 1.0, 0.4, 1.5);
        let cfg = SystemConfig::new(
            cav0,
            cav0,
            lp,
            Backend::ExactMirrorAlgebra,
            0.1,
            10.0,
        )
        .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        for (_, _, s) in amps.iter() {
            assert_relative_eq!(s.beta.norm(), 1.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn conjugation_symmetry() {
        // F^1 = (F^0)*, P = -1, alpha real: beta^11 = -(beta^00)* and
        // beta^10 = -(beta^01)*. The strongly nonresonant response has that
        // F pattern exactly.
        let cav = CavityResponse::nonresonant_approximation(50.0, 40.0, 1.0, 0.01, 1.0);
        let cav_b = CavityResponse::nonresonant_approximation(30.0, 45.0, 1.0, 0.01, 1.0);
        for second in [cav, cav_b] {
            let model = NetworkModel {
                cavities: [cav, second],
                loop_params: loop_with(0.5, 1.0, std::f64::consts::PI, 1.0),
            };
            let amps = model.solve().unwrap();
            let b00 = amps.get(0, 0).beta;
            let b11 = amps.get(1, 1).beta;
            let b10 = amps.get(1, 0).beta;
            let b01 = amps.get(0, 1).beta;
            assert!((b11 + b00.conj()).norm() < 1e-12);
            assert!((b10 + b01.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_loop_reported_with_state() {
        // Empty cavities (F = 1), psi = 0, eta3 = 1, r3 -> denominator 1 - r3;
        // force exact singularity with r3 extremely close to 1 via direct model.
        let cav = CavityQubitParams::new(0.0, 1.0, 0.0, 0.01, 0.1, 1.0, CavityDetuning::Fixed(0.0))
            .unwrap();
        let lp = LoopParams::new(1.0 - 1e-16, 1.0, 0.0, Complex64::new(1.0, 0.0));
        // r3 = 1 - 1e-16 rounds to 1.0 and is rejected by LoopParams; use a
        // representable value and check the guard through the model instead.
        assert!(lp.is_err() || lp.is_ok());
        let lp = LoopParams::new(0.9999999999999999, 1.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let cfg =
            SystemConfig::new(cav, cav, lp, Backend::ExactMirrorAlgebra, 0.1, 10.0).unwrap();
        match solve_loop(&cfg) {
            Err(Error::SingularLoop { i1, i2, .. }) => {
                assert_eq!((i1, i2), (0, 0));
            }
            other => panic!("expected singular loop, got {other:?}"),
        }
    }

    #[test]
    fn photon_number_formulas() {
        // Empty cavity, exact backend, delta = 0: |t1 zeta2 / (1 - r1)|^2 tau.
        let cav = CavityQubitParams::new(0.0, 1.0, 0.0, 0.01, 0.1, 1.0, CavityDetuning::Fixed(0.0))
            .unwrap();
        let lp = loop_with(0.0, 1.0, 0.0, 1.0);
        let cfg = SystemConfig::new(cav, cav, lp, Backend::ExactMirrorAlgebra, 0.1, 10.0).unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let zeta2 = amps.get(0, 0).zeta[1];
        let expected =
            (cav.t_mirror() * zeta2 / (1.0 - cav.r_mirror())).norm_sqr() * cav.tau();
        assert_relative_eq!(
            conditional_cavity_photon_number(&amps, 0, 0, 0),
            expected,
            max_relative = 1e-12
        );

        // First-order backend, i = 0, D = 0: 4 |zeta2|^2 / kappa.
        let cfg = SystemConfig::symmetric_first_order(25.0, 0.0, lp).unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let zeta2 = amps.get(0, 1).zeta[1];
        assert_relative_eq!(
            conditional_cavity_photon_number(&amps, 0, 0, 1),
            4.0 * zeta2.norm_sqr() / cfg.cavity1.kappa(),
            max_relative = 1e-12
        );

        // Strong resonant coupling expels the field from a |1> cavity.
        let cfg = SystemConfig::symmetric_first_order(1e10, 0.0, lp).unwrap();
        let amps = solve_loop(&cfg).unwrap();
        assert!(conditional_cavity_photon_number(&amps, 0, 1, 0) < 1e-15);
    }

    #[test]
    fn exact_backend_converges_to_first_order() {
        // Fixed C and D, shrinking coupler transmission: relative difference
        // in beta is O(t^2). Halving t^2 should halve the error (ratio about
        // the t^2 ratio, within 20%).
        let lp = loop_with(0.5, 0.9, std::f64::consts::PI, 1.0);
        let (coop, d) = (60.0, 60.0);
        let beta_first = {
            let cfg = SystemConfig::symmetric_first_order(coop, d, lp).unwrap();
            solve_loop(&cfg).unwrap().get(1, 1).beta
        };
        let beta_exact = |t_sq: f64| -> Complex64 {
            let tau = 0.01;
            let cav = CavityQubitParams::from_cooperativity(
                coop,
                d,
                t_sq / tau,
                tau,
                1.0,
                CavityDetuning::Auto,
            )
            .unwrap();
            let cfg =
                SystemConfig::new(cav, cav, lp, Backend::ExactMirrorAlgebra, 0.1, 10.0).unwrap();
            solve_loop(&cfg).unwrap().get(1, 1).beta
        };
        let err1 = (beta_exact(2e-3) - beta_first).norm();
        let err2 = (beta_exact(1e-3) - beta_first).norm();
        let ratio = err1 / err2;
        assert!(
            (1.6..=2.4).contains(&ratio),
            "expected first-order convergence, got error ratio {ratio}"
        );
    }
}
