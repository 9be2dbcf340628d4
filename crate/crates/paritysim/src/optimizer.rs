//! Loop-reflectivity optimization and parameter sweeps.
//!
//! The objective is the total odd-subspace decoherence per unit of
//! measurement information, (nu_se,1 + nu_se,2 + nu_loss) t_m. All odd
//! channels share the same r3 dependence, so at eta3 = 1 the optimum is
//! channel-independent and closed forms exist; the numeric minimizer covers
//! eta3 < 1 and enforces the interference constraint
//! |1 - r3 P F1 F2 sqrt(eta3)| >= margin / C.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::decoherence::{
    closed_form_nonresonant, closed_form_resonant, figure_row_nonresonant, figure_row_resonant,
    FigureRow,
};
use crate::error::{Error, Result};

/// Upper end of the search domain; the objective diverges at r3 -> 1.
const R3_DOMAIN_END: f64 = 1.0 - 1e-9;
/// Absolute tolerance of the scalar minimizer in r3.
const R3_TOL: f64 = 1e-6;

/// Closed-form optimum candidate.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormOptimum {
    pub r3: f64,
    /// True when the closed form does not apply (eta3 < 1) and the value is
    /// only a starting guess for the numeric minimizer.
    pub needs_numeric: bool,
}

/// Optimal reflectivity for the nonresonant coupling at eta3 = 1:
///
///   r3_opt = (sqrt(3 - 3 Re(F^2)^2) - 2 - Re(F^2)) / (1 + 2 Re(F^2)),
///
/// valid for Re(F^2) in [-1, -1/2], i.e. |D|/C between 1/sqrt(3) and
/// sqrt(3); outside that interval the optimum is r3 = 0.
pub fn r3_opt_nonresonant(re_f2: f64, eta3: f64) -> ClosedFormOptimum {
    assert!(
        (-1.0..=1.0).contains(&re_f2),
        "Re(F^2) must lie in [-1, 1], got {re_f2}"
    );
    let u = re_f2;
    let r3 = if u >= -0.5 {
        // Interval endpoint is a 0/0 limit with value 0.
        0.0
    } else {
        let value = ((3.0 - 3.0 * u * u).sqrt() - 2.0 - u) / (1.0 + 2.0 * u);
        value.clamp(0.0, R3_DOMAIN_END)
    };
    ClosedFormOptimum {
        r3,
        needs_numeric: eta3 < 1.0 && r3 > 0.0,
    }
}

/// Optimal reflectivity for the resonant coupling:
/// r3_opt = sqrt(eta3) G^2 with G = (1 - 2C)/(1 + 2C).
pub fn r3_opt_resonant(cooperativity: f64, eta3: f64) -> f64 {
    assert!(cooperativity > 0.0, "resonant optimum requires C > 0");
    let g = (1.0 - 2.0 * cooperativity) / (1.0 + 2.0 * cooperativity);
    eta3.sqrt() * g * g
}

/// Coupling regime for objective and constraint construction.
#[derive(Debug, Clone, Copy)]
pub enum OptimizeCase {
    Resonant { cooperativity: f64 },
    Nonresonant { cooperativity: f64, d_over_c: f64 },
}

impl OptimizeCase {
    pub fn cooperativity(&self) -> f64 {
        match *self {
            OptimizeCase::Resonant { cooperativity } => cooperativity,
            OptimizeCase::Nonresonant { cooperativity, .. } => cooperativity,
        }
    }

    /// Conditional reflection products F1^1 F2^{i} (equal to F1^{i} F2^1 for
    /// identical cavities) entering the interference constraint, with the
    /// loop phase folded in: the constrained quantity is |1 - r3 P F1 F2 s|.
    fn constrained_gains(&self, eta3: f64) -> [Complex64; 2] {
        let s = eta3.sqrt();
        match *self {
            OptimizeCase::Resonant { cooperativity } => {
                let g = (1.0 - 2.0 * cooperativity) / (1.0 + 2.0 * cooperativity);
                // P = +1: products G * 1 and G * G.
                [Complex64::new(s * g, 0.0), Complex64::new(s * g * g, 0.0)]
            }
            OptimizeCase::Nonresonant { d_over_c, .. } => {
                let f = Complex64::new(d_over_c, 1.0) / Complex64::new(d_over_c, -1.0);
                // P = -1: products -F conj(F) = -1 and -F^2.
                [Complex64::new(-s, 0.0), -s * f * f]
            }
        }
    }
}

/// Total odd-subspace exponent (nu_se,1 + nu_se,2 + nu_loss) t_m as a
/// function of r3.
pub fn odd_exponent_objective(case: OptimizeCase, eta3: f64) -> impl Fn(f64) -> Result<f64> {
    move |r3: f64| {
        let report = match case {
            OptimizeCase::Resonant { cooperativity } => {
                closed_form_resonant(cooperativity, r3, eta3, 1.0)?
            }
            OptimizeCase::Nonresonant {
                cooperativity,
                d_over_c,
            } => closed_form_nonresonant(cooperativity, d_over_c * cooperativity, r3, eta3, 1.0)?,
        };
        Ok(report.exponent_odd)
    }
}

/// Slack of the interference constraint at a given r3: the minimum over
/// conditional states of |1 - r3 P F1 F2 sqrt(eta3)| - margin/C. Negative
/// slack means the weak-driving analysis has broken down.
pub fn interference_constraint(
    case: OptimizeCase,
    eta3: f64,
    margin: f64,
) -> impl Fn(f64) -> f64 {
    let gains = case.constrained_gains(eta3);
    let bound = if margin > 0.0 {
        margin / case.cooperativity()
    } else {
        0.0
    };
    move |r3: f64| {
        gains
            .iter()
            .map(|w| (Complex64::new(1.0, 0.0) - r3 * w).norm() - bound)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Result of the constrained scalar minimization.
#[derive(Debug, Clone, Copy)]
pub struct R3Optimum {
    pub r3: f64,
    pub value: f64,
    /// True when the unconstrained optimum was clipped at the feasible
    /// boundary.
    pub constraint_active: bool,
    /// False when the coarse bracketing scan found no single-valley shape
    /// and the minimizer fell back to a fine grid search.
    pub unimodal: bool,
    /// Largest feasible reflectivity.
    pub r3_max: f64,
}

/// Golden-section search on [a, b] to absolute tolerance `tol`; f returns
/// +infinity at poles.
fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Minimize the objective over the feasible reflectivity interval
/// [0, r3_max], where r3_max is the largest r3 whose whole prefix satisfies
/// the interference constraint. `margin = 0` disables the constraint.
///
/// Unimodality is asserted by a coarse bracketing scan; when it fails, a
/// 1e-3-resolution grid search picks the bracket instead and the result is
/// flagged.
pub fn minimize_r3_numeric(
    objective: impl Fn(f64) -> Result<f64>,
    constraint: impl Fn(f64) -> f64,
    margin: f64,
) -> Result<R3Optimum> {
    if constraint(0.0) < 0.0 {
        return Err(Error::EmptyFeasibleInterval { margin });
    }
    // First constraint crossing along a scan from 0, refined by bisection.
    let mut r3_max = R3_DOMAIN_END;
    let scan = 1000;
    for k in 1..=scan {
        let r = R3_DOMAIN_END * k as f64 / scan as f64;
        if constraint(r) < 0.0 {
            let (mut lo, mut hi) = (R3_DOMAIN_END * (k - 1) as f64 / scan as f64, r);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if constraint(mid) < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            r3_max = lo;
            break;
        }
    }
    let constrained = r3_max < R3_DOMAIN_END;

    let eval = |r: f64| objective(r).unwrap_or(f64::INFINITY);

    // Coarse scan for bracketing and a unimodality check.
    let coarse_n = 64;
    let coarse: Vec<f64> = (0..=coarse_n)
        .map(|k| eval(r3_max * k as f64 / coarse_n as f64))
        .collect();
    let min_idx = coarse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let slack = 1e-12;
    let unimodal = coarse.windows(2).enumerate().all(|(i, w)| {
        if i < min_idx {
            w[1] <= w[0] + slack * w[0].abs().max(1.0)
        } else {
            w[1] >= w[0] - slack * w[0].abs().max(1.0)
        }
    });

    let (lo, hi) = if unimodal {
        let lo = if min_idx == 0 { 0 } else { min_idx - 1 };
        let hi = (min_idx + 1).min(coarse_n);
        (
            r3_max * lo as f64 / coarse_n as f64,
            r3_max * hi as f64 / coarse_n as f64,
        )
    } else {
        // Fine grid at 1e-3 resolution, then polish around the best cell.
        let n = (r3_max / 1e-3).ceil().max(2.0) as usize;
        let best = (0..=n)
            .map(|k| (k, eval(r3_max * k as f64 / n as f64)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(k, _)| k)
            .unwrap();
        (
            r3_max * best.saturating_sub(1) as f64 / n as f64,
            r3_max * (best + 1).min(n) as f64 / n as f64,
        )
    };

    let interior = golden_section(&eval, lo, hi, R3_TOL);
    // Endpoints compete with the interior candidate; boundary minima matter
    // when the objective is monotone on the feasible interval.
    let mut best = (interior, eval(interior));
    for r in [0.0, r3_max] {
        let v = eval(r);
        if v < best.1 {
            best = (r, v);
        }
    }
    Ok(R3Optimum {
        r3: best.0,
        value: best.1,
        constraint_active: constrained && best.0 >= r3_max - 10.0 * R3_TOL,
        unimodal,
        r3_max,
    })
}

/// Convenience wrapper building objective and constraint from the case.
pub fn optimize_reflectivity(case: OptimizeCase, eta3: f64, margin: f64) -> Result<R3Optimum> {
    minimize_r3_numeric(
        odd_exponent_objective(case, eta3),
        interference_constraint(case, eta3, margin),
        margin,
    )
}

/// Swept variable of a figure-reproduction run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    R3,
    DOverC,
    Cooperativity,
    Eta3,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::R3 => "r3",
            SweepVariable::DOverC => "doc",
            SweepVariable::Cooperativity => "C",
            SweepVariable::Eta3 => "eta3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepCase {
    Resonant,
    Nonresonant,
}

/// Output column of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepColumn {
    /// nu_odd_se,1 t_m in units of 1/C.
    OddSeTmC,
    /// nu_even_se,1 t_m in units of 1/C.
    EvenSeTmC,
    /// nu_odd^(L) t_m in units of (1 - eta3).
    OddLossTm,
    /// nu_even^(L) t_m in units of (1 - eta3).
    EvenLossTm,
}

impl SweepColumn {
    pub const ALL: [SweepColumn; 4] = [
        SweepColumn::OddSeTmC,
        SweepColumn::EvenSeTmC,
        SweepColumn::OddLossTm,
        SweepColumn::EvenLossTm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepColumn::OddSeTmC => "nu_odd_se_tm_C",
            SweepColumn::EvenSeTmC => "nu_even_se_tm_C",
            SweepColumn::OddLossTm => "nu_odd_loss_tm",
            SweepColumn::EvenLossTm => "nu_even_loss_tm",
        }
    }

    fn pull(&self, row: &FigureRow) -> f64 {
        match self {
            SweepColumn::OddSeTmC => row.odd_se_tm_c,
            SweepColumn::EvenSeTmC => row.even_se_tm_c,
            SweepColumn::OddLossTm => row.odd_loss_tm_norm,
            SweepColumn::EvenLossTm => row.even_loss_tm_norm,
        }
    }
}

/// Grid specification for one sweep: the swept variable and range, the
/// coupling case, and the values held fixed.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub case: SweepCase,
    pub cooperativity: f64,
    pub d_over_c: f64,
    pub r3: f64,
    pub eta3: f64,
    pub columns: Vec<SweepColumn>,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(Error::InvalidParameter(format!(
                "sweep range [{}, {}] must satisfy lo < hi",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter(
                "sweep needs at least 2 steps".to_string(),
            ));
        }
        if self.variable == SweepVariable::R3 && !(self.lo >= 0.0 && self.hi < 1.0) {
            return Err(Error::InvalidParameter(
                "r3 sweep range must lie within [0, 1)".to_string(),
            ));
        }
        if self.variable == SweepVariable::Eta3 && !(self.lo > 0.0 && self.hi <= 1.0) {
            return Err(Error::InvalidParameter(
                "eta3 sweep range must lie within (0, 1]".to_string(),
            ));
        }
        if self.columns.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep must select at least one column".to_string(),
            ));
        }
        Ok(())
    }
}

/// One grid point: the variable value, the selected column values, and a
/// pole flag (values are absent at flagged rows).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub entries: Vec<f64>,
    pub pole: bool,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub columns: Vec<SweepColumn>,
    pub rows: Vec<SweepRow>,
}

/// Evaluate the figure curves over the grid. Rows are independent and
/// evaluated in parallel; the table order is the grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let n = spec.steps;
    let rows: Vec<SweepRow> = (0..n)
        .into_par_iter()
        .map(|k| {
            let value = spec.lo + (spec.hi - spec.lo) * k as f64 / (n - 1) as f64;
            let (c, doc, r3, eta3) = match spec.variable {
                SweepVariable::R3 => (spec.cooperativity, spec.d_over_c, value, spec.eta3),
                SweepVariable::DOverC => (spec.cooperativity, value, spec.r3, spec.eta3),
                SweepVariable::Cooperativity => (value, spec.d_over_c, spec.r3, spec.eta3),
                SweepVariable::Eta3 => (spec.cooperativity, spec.d_over_c, spec.r3, value),
            };
            let row = match spec.case {
                SweepCase::Resonant => figure_row_resonant(c, r3, eta3),
                SweepCase::Nonresonant => figure_row_nonresonant(c, doc, r3, eta3),
            };
            match row {
                Ok(r) => SweepRow {
                    value,
                    entries: spec.columns.iter().map(|col| col.pull(&r)).collect(),
                    pole: false,
                },
                Err(_) => SweepRow {
                    value,
                    entries: Vec::new(),
                    pole: true,
                },
            }
        })
        .collect();
    Ok(SweepTable {
        variable: spec.variable,
        columns: spec.columns.clone(),
        rows,
    })
}
