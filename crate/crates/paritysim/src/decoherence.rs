//! Measurement times, spontaneous-emission and loss decoherence rates,
//! purity bounds, and the closed-form decoherence budgets for the resonant
//! and nonresonant coupling regimes.
//!
//! The generic amplitude pipeline (loop solution -> measurement time ->
//! rates) is the single source of truth; the closed forms are a validated
//! fast path used for figure generation and optimization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{derived_params, SystemConfig};
use crate::steady_state::{ConditionalAmplitudes, SINGULARITY_GUARD};

/// Which parity subspace a rate or state refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    Odd,
    Even,
}

/// Discrimination times extracted from the conditional output amplitudes:
/// t_m^{ii} = |Im(beta^10) - Im(beta^{ii})|^{-2}, t_m = max of the two.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementTime {
    pub tm00: f64,
    pub tm11: f64,
    pub tm: f64,
    /// |Im(beta^00) - Im(beta^11)|^2 when the even subspace is imbalanced
    /// beyond tolerance; projection within the even subspace then happens at
    /// this (second-order) rate, which is reported but not folded into the
    /// purity bound.
    pub even_imbalance: Option<f64>,
}

/// Absolute tolerance on quadrature coincidences, in units of |alpha|.
const QUADRATURE_TOL: f64 = 1e-9;
/// Below this separation the subspaces count as indistinguishable.
const DEGENERATE_SEPARATION: f64 = 1e-12;

/// Measurement time from the p-quadrature separations of the conditional
/// output amplitudes. Requires a real drive amplitude and matching odd-state
/// quadratures Im(beta^10) = Im(beta^01).
pub fn measurement_time(amps: &ConditionalAmplitudes) -> Result<MeasurementTime> {
    let alpha = amps.alpha();
    if alpha.im.abs() > QUADRATURE_TOL * alpha.norm() {
        return Err(Error::InvalidParameter(format!(
            "measurement time requires a real drive amplitude, got alpha = {alpha}"
        )));
    }
    let scale = alpha.norm();
    let b10 = amps.get(1, 0).beta.im;
    let b01 = amps.get(0, 1).beta.im;
    if (b10 - b01).abs() > QUADRATURE_TOL * scale {
        return Err(Error::AsymmetricOddSubspace((b10 - b01).abs()));
    }
    let sep00 = (b10 - amps.get(0, 0).beta.im).abs();
    let sep11 = (b10 - amps.get(1, 1).beta.im).abs();
    if sep00 < DEGENERATE_SEPARATION && sep11 < DEGENERATE_SEPARATION {
        return Err(Error::DegenerateMeasurement);
    }
    let tm00 = sep00.powi(-2);
    let tm11 = sep11.powi(-2);
    let even_gap = (amps.get(0, 0).beta.im - amps.get(1, 1).beta.im).abs();
    Ok(MeasurementTime {
        tm00,
        tm11,
        tm: tm00.max(tm11),
        even_imbalance: (even_gap > QUADRATURE_TOL * scale).then(|| even_gap * even_gap),
    })
}

/// Spontaneous-emission rates of the two atoms for one subspace:
/// nu_q = 2 C_q kappa_q |xi_q|^2 tau_q / (1 + D_q^2), with the intracavity
/// amplitude taken at the subspace state that couples atom q (atom q in |1>).
#[derive(Debug, Clone, Copy)]
pub struct SeRates {
    pub cavity1: f64,
    pub cavity2: f64,
}

pub fn se_rates(amps: &ConditionalAmplitudes, cfg: &SystemConfig, subspace: Subspace) -> SeRates {
    let (xi1, xi2) = match subspace {
        Subspace::Odd => (amps.get(1, 0).xi1, amps.get(0, 1).xi2),
        Subspace::Even => (amps.get(1, 1).xi1, amps.get(1, 1).xi2),
    };
    let rate = |q: usize, xi: Complex64| -> f64 {
        let cav = cfg.cavity(q);
        let (c, d) = derived_params(cav);
        2.0 * c * cav.kappa() * xi.norm_sqr() * cav.tau() / (1.0 + d * d)
    };
    SeRates {
        cavity1: rate(0, xi1),
        cavity2: rate(1, xi2),
    }
}

/// Rates at which lost light would distinguish the two states of one
/// subspace: loop-mirror loss (1 - eta3)|zeta3^a - zeta3^b|^2 plus the
/// intracavity analogs (1 - eta_q)|xi_q^a - xi_q^b|^2.
#[derive(Debug, Clone, Copy)]
pub struct LossRates {
    pub loop_mirror: f64,
    pub cavity1: f64,
    pub cavity2: f64,
}

pub fn loss_rates(
    amps: &ConditionalAmplitudes,
    cfg: &SystemConfig,
    subspace: Subspace,
) -> LossRates {
    let (a, b) = match subspace {
        Subspace::Odd => (amps.get(1, 0), amps.get(0, 1)),
        Subspace::Even => (amps.get(1, 1), amps.get(0, 0)),
    };
    LossRates {
        loop_mirror: (1.0 - cfg.loop_params.eta3()) * (a.zeta[2] - b.zeta[2]).norm_sqr(),
        cavity1: (1.0 - cfg.cavity1.eta_cav()) * (a.xi1 - b.xi1).norm_sqr(),
        cavity2: (1.0 - cfg.cavity2.eta_cav()) * (a.xi2 - b.xi2).norm_sqr(),
    }
}

/// Decoherence rates of one subspace, by channel.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChannelRates {
    pub se_1: f64,
    pub se_2: f64,
    pub loop_loss: f64,
    pub cav_loss_1: f64,
    pub cav_loss_2: f64,
}

impl ChannelRates {
    pub fn total(&self) -> f64 {
        self.se_1 + self.se_2 + self.loop_loss + self.cav_loss_1 + self.cav_loss_2
    }

    pub fn scaled(&self, s: f64) -> ChannelRates {
        ChannelRates {
            se_1: self.se_1 * s,
            se_2: self.se_2 * s,
            loop_loss: self.loop_loss * s,
            cav_loss_1: self.cav_loss_1 * s,
            cav_loss_2: self.cav_loss_2 * s,
        }
    }
}

/// Full decoherence budget: measurement times, per-channel rates nu, the
/// dimensionless products nu * t_m, and the subspace purity exponents.
#[derive(Debug, Clone)]
pub struct DecoherenceReport {
    pub tm: f64,
    pub tm00: f64,
    pub tm11: f64,
    pub odd: ChannelRates,
    pub even: ChannelRates,
    pub odd_products: ChannelRates,
    pub even_products: ChannelRates,
    /// Sum of all odd-channel nu * t_m products.
    pub exponent_odd: f64,
    /// Sum of all even-channel nu * t_m products.
    pub exponent_even: f64,
    pub even_imbalance: Option<f64>,
    pub warnings: Vec<String>,
}

impl DecoherenceReport {
    fn from_parts(
        mt: MeasurementTime,
        odd: ChannelRates,
        even: ChannelRates,
        warnings: Vec<String>,
    ) -> Self {
        let odd_products = odd.scaled(mt.tm);
        let even_products = even.scaled(mt.tm);
        DecoherenceReport {
            tm: mt.tm,
            tm00: mt.tm00,
            tm11: mt.tm11,
            exponent_odd: odd_products.total(),
            exponent_even: even_products.total(),
            odd,
            even,
            odd_products,
            even_products,
            even_imbalance: mt.even_imbalance,
            warnings,
        }
    }
}

/// Assemble the decoherence budget from solved amplitudes through the
/// generic pipeline.
pub fn pipeline_report(
    cfg: &SystemConfig,
    amps: &ConditionalAmplitudes,
) -> Result<DecoherenceReport> {
    let mt = measurement_time(amps)?;
    let build = |subspace| {
        let se = se_rates(amps, cfg, subspace);
        let loss = loss_rates(amps, cfg, subspace);
        ChannelRates {
            se_1: se.cavity1,
            se_2: se.cavity2,
            loop_loss: loss.loop_mirror,
            cav_loss_1: loss.cavity1,
            cav_loss_2: loss.cavity2,
        }
    };
    Ok(DecoherenceReport::from_parts(
        mt,
        build(Subspace::Odd),
        build(Subspace::Even),
        Vec::new(),
    ))
}

fn check_closed_form_poles(gains: &[(u8, u8, Complex64)], r3: f64) -> Result<()> {
    for &(i1, i2, w) in gains {
        let denom = (Complex64::new(1.0, 0.0) - r3 * w).norm();
        if denom < SINGULARITY_GUARD {
            return Err(Error::SingularLoop { i1, i2, denom });
        }
    }
    Ok(())
}

/// Closed-form decoherence budget for the nonresonant regime D ~ C >> 1
/// with identical cavities, F = (D + iC)/(D - iC), and P = -1.
pub fn closed_form_nonresonant(
    cooperativity: f64,
    d_ratio: f64,
    r3: f64,
    eta3: f64,
    alpha_sq: f64,
) -> Result<DecoherenceReport> {
    if cooperativity <= 0.0 {
        return Err(Error::InvalidParameter(
            "nonresonant closed form requires C > 0".to_string(),
        ));
    }
    let mut warnings = Vec::new();
    if cooperativity < 10.0 || d_ratio.abs() < 0.1 * cooperativity
        || d_ratio.abs() > 10.0 * cooperativity
    {
        warnings.push(format!(
            "closed form assumes |D| ~ C >> 1; got C = {cooperativity}, D = {d_ratio}"
        ));
    }
    let f = Complex64::new(d_ratio, cooperativity) / Complex64::new(d_ratio, -cooperativity);
    let f2 = f * f;
    let s = eta3.sqrt();
    // P = -1: loop gains are -s F^2 (11), -s (odd), -s conj(F^2) (00).
    check_closed_form_poles(
        &[
            (0, 0, -s * f2.conj()),
            (1, 0, Complex64::new(-s, 0.0)),
            (0, 1, Complex64::new(-s, 0.0)),
            (1, 1, -s * f2),
        ],
        r3,
    )?;
    let u = f2.re;
    let v = f.im;
    let c2d2 = cooperativity * cooperativity + d_ratio * d_ratio;
    let one_m_r2 = 1.0 - r3 * r3;
    let one_m_sr = 1.0 - s * r3;
    let one_p_sr = 1.0 + s * r3;
    let ring = 1.0 + 2.0 * s * r3 * u + eta3 * r3 * r3; // |1 + s r3 F^2|^2
    let one_m_u = 1.0 - u;

    let tm_inv = eta3 * one_m_r2.powi(2) * one_m_sr.powi(2) * one_m_u.powi(2) * alpha_sq
        / (one_p_sr.powi(2) * ring.powi(2));
    let tm = tm_inv.recip();

    let se_odd_1 = 8.0 * cooperativity * ring.powi(2)
        / (eta3 * c2d2 * one_m_r2 * one_m_sr.powi(2) * one_m_u.powi(2));
    let se_even_1 = 8.0 * cooperativity * one_p_sr.powi(2) * ring
        / (eta3 * c2d2 * one_m_r2 * one_m_sr.powi(2) * one_m_u.powi(2));
    let loss_odd = 4.0 * v * v * (1.0 - eta3) * ring.powi(2)
        / (eta3 * one_m_u.powi(2) * one_m_r2 * one_m_sr.powi(2));
    let loss_even =
        4.0 * v * v * (1.0 - eta3) * one_p_sr.powi(2) / (eta3 * one_m_u.powi(2) * one_m_r2);

    let odd_products = ChannelRates {
        se_1: se_odd_1,
        se_2: eta3 * se_odd_1,
        loop_loss: loss_odd,
        ..Default::default()
    };
    let even_products = ChannelRates {
        se_1: se_even_1,
        se_2: eta3 * se_even_1,
        loop_loss: loss_even,
        ..Default::default()
    };

    Ok(DecoherenceReport {
        tm,
        tm00: tm,
        tm11: tm,
        odd: odd_products.scaled(tm_inv),
        even: even_products.scaled(tm_inv),
        exponent_odd: odd_products.total(),
        exponent_even: even_products.total(),
        odd_products,
        even_products,
        even_imbalance: None,
        warnings,
    })
}

/// Closed-form decoherence budget for the resonant regime D = 0 with
/// identical cavities, F^1 = G = (1 - 2C)/(1 + 2C), F^0 = 1, and P = +1.
pub fn closed_form_resonant(
    cooperativity: f64,
    r3: f64,
    eta3: f64,
    alpha_sq: f64,
) -> Result<DecoherenceReport> {
    if cooperativity <= 0.0 {
        return Err(Error::InvalidParameter(
            "resonant closed form requires C > 0".to_string(),
        ));
    }
    let g = (1.0 - 2.0 * cooperativity) / (1.0 + 2.0 * cooperativity);
    let s = eta3.sqrt();
    check_closed_form_poles(
        &[
            (0, 0, Complex64::new(s, 0.0)),
            (1, 0, Complex64::new(s * g, 0.0)),
            (0, 1, Complex64::new(s * g, 0.0)),
            (1, 1, Complex64::new(s * g * g, 0.0)),
        ],
        r3,
    )?;
    let one_m_r2 = 1.0 - r3 * r3;
    let d_g = 1.0 - s * r3 * g;
    let d_g2 = 1.0 - s * r3 * g * g;
    let d_1 = 1.0 - s * r3;
    let gm1 = g - 1.0;

    let tm11_inv =
        eta3 * g * g * gm1 * gm1 * one_m_r2.powi(2) * alpha_sq / (d_g.powi(2) * d_g2.powi(2));
    let tm00_inv = eta3 * gm1 * gm1 * one_m_r2.powi(2) * alpha_sq / (d_g.powi(2) * d_1.powi(2));
    let tm = tm11_inv.recip();

    let pre_se = 8.0 * cooperativity
        / ((1.0 + 2.0 * cooperativity).powi(2) * eta3 * g * g * gm1 * gm1 * one_m_r2);
    let se_odd_1 = pre_se * d_g2.powi(2);
    let se_even_1 = pre_se * d_g.powi(2);
    let loss_odd = (1.0 - eta3) * d_g2.powi(2) / (eta3 * g * g * one_m_r2);
    let loss_even =
        (1.0 - eta3) * (1.0 - eta3 * r3 * r3 * g * g).powi(2) / (eta3 * g * g * one_m_r2 * d_1.powi(2));

    let odd_products = ChannelRates {
        se_1: se_odd_1,
        se_2: eta3 * se_odd_1,
        loop_loss: loss_odd,
        ..Default::default()
    };
    let even_products = ChannelRates {
        se_1: se_even_1,
        se_2: eta3 * g * g * se_even_1,
        loop_loss: loss_even,
        ..Default::default()
    };

    Ok(DecoherenceReport {
        tm,
        tm00: tm00_inv.recip(),
        tm11: tm,
        odd: odd_products.scaled(tm11_inv),
        even: even_products.scaled(tm11_inv),
        exponent_odd: odd_products.total(),
        exponent_even: even_products.total(),
        odd_products,
        even_products,
        even_imbalance: None,
        warnings: Vec::new(),
    })
}

/// One row of the figure curves: spontaneous-emission products in units of
/// 1/C and loss products in units of (1 - eta3), the latter evaluated in the
/// eta3 -> 1 normalized sense so the eta3 = 1 rows are well defined.
#[derive(Debug, Clone, Copy)]
pub struct FigureRow {
    pub odd_se_tm_c: f64,
    pub even_se_tm_c: f64,
    pub odd_loss_tm_norm: f64,
    pub even_loss_tm_norm: f64,
}

pub fn figure_row_nonresonant(
    cooperativity: f64,
    d_over_c: f64,
    r3: f64,
    eta3: f64,
) -> Result<FigureRow> {
    let d_ratio = d_over_c * cooperativity;
    let report = closed_form_nonresonant(cooperativity, d_ratio, r3, eta3, 1.0)?;
    // Loss products carry an explicit (1 - eta3) factor; strip it.
    let f = Complex64::new(d_over_c, 1.0) / Complex64::new(d_over_c, -1.0);
    let (u, v) = ((f * f).re, f.im);
    let s = eta3.sqrt();
    let ring = 1.0 + 2.0 * s * r3 * u + eta3 * r3 * r3;
    let loss_odd = 4.0 * v * v * ring.powi(2)
        / (eta3 * (1.0 - u).powi(2) * (1.0 - r3 * r3) * (1.0 - s * r3).powi(2));
    let loss_even =
        4.0 * v * v * (1.0 + s * r3).powi(2) / (eta3 * (1.0 - u).powi(2) * (1.0 - r3 * r3));
    Ok(FigureRow {
        odd_se_tm_c: report.odd_products.se_1 * cooperativity,
        even_se_tm_c: report.even_products.se_1 * cooperativity,
        odd_loss_tm_norm: loss_odd,
        even_loss_tm_norm: loss_even,
    })
}

pub fn figure_row_resonant(cooperativity: f64, r3: f64, eta3: f64) -> Result<FigureRow> {
    let report = closed_form_resonant(cooperativity, r3, eta3, 1.0)?;
    let g = (1.0 - 2.0 * cooperativity) / (1.0 + 2.0 * cooperativity);
    let s = eta3.sqrt();
    let loss_odd = (1.0 - s * r3 * g * g).powi(2) / (eta3 * g * g * (1.0 - r3 * r3));
    let loss_even = (1.0 - eta3 * r3 * r3 * g * g).powi(2)
        / (eta3 * g * g * (1.0 - r3 * r3) * (1.0 - s * r3).powi(2));
    Ok(FigureRow {
        odd_se_tm_c: report.odd_products.se_1 * cooperativity,
        even_se_tm_c: report.even_products.se_1 * cooperativity,
        odd_loss_tm_norm: loss_odd,
        even_loss_tm_norm: loss_even,
    })
}

/// A normalized pure state restricted to one parity subspace:
/// a|10> + b|01> (odd) or a|11> + b|00> (even).
#[derive(Debug, Clone, Copy)]
pub struct SubspaceState {
    parity: Subspace,
    a: Complex64,
    b: Complex64,
}

impl SubspaceState {
    pub fn new(parity: Subspace, a: Complex64, b: Complex64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "subspace state must be normalized: |a|^2 + |b|^2 = {norm}"
            )));
        }
        Ok(Self { parity, a, b })
    }

    pub fn odd(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(Subspace::Odd, a, b)
    }

    pub fn even(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(Subspace::Even, a, b)
    }

    pub fn parity(&self) -> Subspace {
        self.parity
    }

    /// Density-matrix coefficients (population a, population b, coherence).
    pub fn coefficients(&self) -> (f64, f64, Complex64) {
        (self.a.norm_sqr(), self.b.norm_sqr(), self.a * self.b.conj())
    }
}

/// Purity bound together with the unsupported-case flag.
#[derive(Debug, Clone, Copy)]
pub struct PurityBound {
    pub value: f64,
    /// Present when the report carries an even-subspace quadrature
    /// imbalance: the formula value then omits the measurement-induced
    /// projection within the even subspace.
    pub even_imbalance: Option<f64>,
}

/// Final purity of an initially pure subspace state after one measurement:
/// Tr(rho^2) = caa^2 + cbb^2 + 2|cab|^2 exp(-sum of nu t_m).
pub fn purity_bound(state: &SubspaceState, report: &DecoherenceReport) -> PurityBound {
    let (caa, cbb, cab) = state.coefficients();
    let exponent = match state.parity() {
        Subspace::Odd => report.exponent_odd,
        Subspace::Even => report.exponent_even,
    };
    let value = caa * caa + cbb * cbb + 2.0 * cab.norm_sqr() * (-exponent).exp();
    PurityBound {
        value,
        even_imbalance: match state.parity() {
            Subspace::Even => report.even_imbalance,
            Subspace::Odd => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::LoopParams;
    use crate::steady_state::solve_loop;
    use approx::assert_relative_eq;

    fn loop_with(r3: f64, eta3: f64, psi: f64, alpha: f64) -> LoopParams {
        LoopParams::new(r3, eta3, psi, Complex64::new(alpha, 0.0)).unwrap()
    }

    #[test]
    fn measurement_time_strong_coupling_limit() {
        // beta^10 = i alpha, beta^00 = beta^11 = -i alpha -> t_m = 1/(4 alpha^2).
        let alpha = 0.7;
        let cfg = SystemConfig::symmetric_first_order(1e12, 0.0, loop_with(0.0, 1.0, 0.0, alpha))
            .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let mt = measurement_time(&amps).unwrap();
        assert_relative_eq!(mt.tm, 1.0 / (4.0 * alpha * alpha), max_relative = 1e-6);
        assert!(mt.even_imbalance.is_none());
    }

    #[test]
    fn measurement_time_degenerate() {
        // Empty cavities: all four amplitudes coincide.
        let cfg = SystemConfig::symmetric_first_order(0.0, 0.0, loop_with(0.0, 1.0, 0.0, 1.0))
            .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        assert!(matches!(
            measurement_time(&amps),
            Err(Error::DegenerateMeasurement)
        ));
    }

    #[test]
    fn measurement_time_nonresonant_independent_of_r3() {
        // D = C, eta3 = 1: 1/t_m = 4 |alpha|^2 for any r3 in [0, 0.9].
        for r3 in [0.0, 0.3, 0.6, 0.9] {
            let cfg = SystemConfig::symmetric_first_order(
                2e7,
                2e7,
                loop_with(r3, 1.0, std::f64::consts::PI, 1.0),
            )
            .unwrap();
            let amps = solve_loop(&cfg).unwrap();
            let mt = measurement_time(&amps).unwrap();
            assert_relative_eq!(1.0 / mt.tm, 4.0, max_relative = 1e-5);
        }
    }

    #[test]
    fn se_rates_vanish_without_coupling() {
        let cfg = SystemConfig::symmetric_first_order(0.0, 0.0, loop_with(0.2, 1.0, 0.0, 1.0))
            .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let r = se_rates(&amps, &cfg, Subspace::Odd);
        assert_eq!(r.cavity1, 0.0);
        assert_eq!(r.cavity2, 0.0);
    }

    #[test]
    fn se_rate_second_cavity_attenuated_by_loop_loss() {
        for eta3 in [1.0, 0.9, 0.6] {
            let cfg = SystemConfig::symmetric_first_order(
                40.0,
                40.0,
                loop_with(0.4, eta3, std::f64::consts::PI, 1.0),
            )
            .unwrap();
            let amps = solve_loop(&cfg).unwrap();
            let r = se_rates(&amps, &cfg, Subspace::Odd);
            assert_relative_eq!(r.cavity2, eta3 * r.cavity1, max_relative = 1e-12);
        }
    }

    #[test]
    fn resonant_se_product_open_loop() {
        // r3 = 0, eta3 = 1, first-order, C = 100:
        // nu_odd,1 t_m = 8C / ((1+2C)^2 G^2 (G-1)^2).
        let c = 100.0;
        let cfg = SystemConfig::symmetric_first_order(c, 0.0, loop_with(0.0, 1.0, 0.0, 1.0))
            .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let report = pipeline_report(&cfg, &amps).unwrap();
        let g = (1.0 - 2.0 * c) / (1.0 + 2.0 * c);
        let expected = 8.0 * c / ((1.0 + 2.0 * c).powi(2) * g * g * (g - 1.0) * (g - 1.0));
        assert_relative_eq!(report.odd_products.se_1, expected, max_relative = 1e-10);
        // Direct arithmetic: 800 * 201^2 / (199 * 400)^2 = 1/(2C) (1 + O(1/C)).
        assert_relative_eq!(expected, 32_320_800.0 / 6_336_160_000.0, max_relative = 1e-12);
        assert_relative_eq!(expected, 5.101007550e-3, max_relative = 1e-9);
    }

    #[test]
    fn loss_rates_lossless_vanish() {
        let cfg = SystemConfig::symmetric_first_order(30.0, 30.0, loop_with(0.5, 1.0, 0.0, 1.0))
            .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let l = loss_rates(&amps, &cfg, Subspace::Odd);
        assert_eq!(l.loop_mirror, 0.0);
        assert_eq!(l.cavity1, 0.0);
        assert_eq!(l.cavity2, 0.0);
    }

    #[test]
    fn loop_loss_product_limit() {
        // D = C, eta3 -> 1, r3 = 0: nu_odd^(L) t_m / (1 - eta3) = 1.
        let eta3 = 1.0 - 1e-6;
        let cfg = SystemConfig::symmetric_first_order(
            3e7,
            3e7,
            loop_with(0.0, eta3, std::f64::consts::PI, 1.0),
        )
        .unwrap();
        let amps = solve_loop(&cfg).unwrap();
        let report = pipeline_report(&cfg, &amps).unwrap();
        assert_relative_eq!(
            report.odd_products.loop_loss / (1.0 - eta3),
            1.0,
            max_relative = 1e-4
        );
    }

    #[test]
    fn closed_form_nonresonant_spot_values() {
        // D = C, eta3 = 1, r3 = 0: odd and even SE products both equal 1/C.
        let c = 500.0;
        let report = closed_form_nonresonant(c, c, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(report.odd_products.se_1, 1.0 / c, max_relative = 1e-12);
        assert_relative_eq!(report.even_products.se_1, 1.0 / c, max_relative = 1e-12);

        // D = C, eta3 = 1: odd SE product * C = (1 - r3)/(1 + r3).
        for r3 in [0.0, 0.25, 0.5, 0.75] {
            let report = closed_form_nonresonant(c, c, r3, 1.0, 1.0).unwrap();
            assert_relative_eq!(
                report.odd_products.se_1 * c,
                (1.0 - r3) / (1.0 + r3),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn closed_form_loss_importance_scales_with_c() {
        // Relative importance of loop loss vs spontaneous emission is
        // C (1 - eta3): their exponent ratio, with nu_se summed over both
        // atoms, equals C (1 - eta3) / 2 up to the F-dependent factor, so
        // doubling C doubles the ratio.
        let ratio_at = |c: f64, eta3: f64| {
            let report = closed_form_nonresonant(c, c, 0.3, eta3, 1.0).unwrap();
            report.odd_products.loop_loss / (report.odd_products.se_1 + report.odd_products.se_2)
        };
        let r1 = ratio_at(1000.0, 0.99);
        let r2 = ratio_at(2000.0, 0.99);
        assert_relative_eq!(r2 / r1, 2.0, max_relative = 1e-3);
        // And proportional to (1 - eta3).
        let r3 = ratio_at(1000.0, 0.995);
        assert_relative_eq!(r1 / r3, 2.0, max_relative = 2e-2);
    }

    #[test]
    fn closed_form_resonant_spot_values() {
        // C=10, eta3=1, r3=0: 1/t_m = G^2 (G-1)^2 |alpha|^2 = 2.9701 |alpha|^2.
        let report = closed_form_resonant(10.0, 0.0, 1.0, 1.0).unwrap();
        let g: f64 = -19.0 / 21.0;
        let expected_tm_inv = g * g * (g - 1.0) * (g - 1.0);
        assert_relative_eq!(1.0 / report.tm, expected_tm_inv, max_relative = 1e-12);
        // 361/441 * 1600/441 = 577600/194481.
        assert_relative_eq!(expected_tm_inv, 577_600.0 / 194_481.0, max_relative = 1e-12);
        assert_relative_eq!(expected_tm_inv, 2.9699559, max_relative = 1e-7);
        // Lossless: loop-loss products vanish.
        assert_eq!(report.odd_products.loop_loss, 0.0);
        assert_eq!(report.even_products.loop_loss, 0.0);
    }

    #[test]
    fn resonant_factor_of_two_vs_nonresonant() {
        // C -> infinity, r3 = 0: resonant odd SE product tends to half the
        // nonresonant (D = C) value.
        let c = 1e7;
        let res = closed_form_resonant(c, 0.0, 1.0, 1.0).unwrap();
        let non = closed_form_nonresonant(c, c, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            res.odd_products.se_1 / non.odd_products.se_1,
            0.5,
            max_relative = 1e-5
        );
    }

    #[test]
    fn figure_rows_match_closed_forms_at_eta_one() {
        let row = figure_row_nonresonant(100.0, 1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(row.odd_se_tm_c, (1.0 - 0.5) / 1.5, max_relative = 1e-12);
        assert_relative_eq!(row.odd_loss_tm_norm, (1.0 - 0.5) / 1.5, max_relative = 1e-12);
        assert_relative_eq!(row.even_se_tm_c, 1.5 / 0.5, max_relative = 1e-12);
        assert_relative_eq!(row.even_loss_tm_norm, 1.5 / 0.5, max_relative = 1e-12);
    }

    #[test]
    fn purity_bound_formula() {
        let report = |exp_odd: f64| DecoherenceReport {
            tm: 1.0,
            tm00: 1.0,
            tm11: 1.0,
            odd: ChannelRates::default(),
            even: ChannelRates::default(),
            odd_products: ChannelRates::default(),
            even_products: ChannelRates::default(),
            exponent_odd: exp_odd,
            exponent_even: 0.0,
            even_imbalance: None,
            warnings: Vec::new(),
        };
        // Basis state: purity 1 regardless of rates.
        let basis = SubspaceState::odd(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            .unwrap();
        assert_relative_eq!(purity_bound(&basis, &report(37.0)).value, 1.0);
        // Zero exponent: purity 1 for any normalized state.
        let s = SubspaceState::odd(
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        )
        .unwrap();
        assert_relative_eq!(purity_bound(&s, &report(0.0)).value, 1.0, epsilon = 1e-12);
        // Balanced state with exponent ln 2: purity 3/4.
        let inv = 1.0 / 2.0_f64.sqrt();
        let s = SubspaceState::odd(Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)).unwrap();
        assert_relative_eq!(
            purity_bound(&s, &report(std::f64::consts::LN_2)).value,
            0.75,
            epsilon = 1e-12
        );
    }

    #[test]
    fn purity_even_imbalance_flagged() {
        let mut report = closed_form_resonant(10.0, 0.2, 1.0, 1.0).unwrap();
        report.even_imbalance = Some(3e-4);
        let inv = 1.0 / 2.0_f64.sqrt();
        let s = SubspaceState::even(Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)).unwrap();
        let p = purity_bound(&s, &report);
        assert_eq!(p.even_imbalance, Some(3e-4));
        let odd = SubspaceState::odd(Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)).unwrap();
        assert_eq!(purity_bound(&odd, &report).even_imbalance, None);
    }
}
