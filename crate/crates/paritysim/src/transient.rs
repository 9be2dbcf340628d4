//! Time-domain propagation of the loop fields on the round-trip grid.
//!
//! The field leaving cavity 2 decomposes into paths classified by how many
//! round trips they spent inside each cavity: two single-cavity geometric
//! series, a mixed double series, and the promptly reflected component.
//! With both round-trip times equal this yields a causal recursion for
//! zeta5 in terms of the zeta2 history; closing the loop through the beam
//! splitter then fixes the whole trace. An independent propagator that
//! literally hops field samples along the network edges, keeping the two
//! intracavity fields as state, serves as the oracle for that bookkeeping.
//!
//! Sub-round-trip offsets evolve independently, so one sample per round
//! trip represents the full dynamics; the cavity-1-to-cavity-2 travel time
//! is a labeling offset only. The input is piecewise constant over tau.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemConfig;
use crate::steady_state::round_trip_factor;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mirror and round-trip constants of both cavities plus the loop constants.
/// Transient propagation always uses the exact mirror algebra.
#[derive(Debug, Clone, Copy)]
pub struct TransientParams {
    pub r_mirror: [f64; 2],
    pub t_mirror: [f64; 2],
    /// Round-trip factors indexed `[cavity][atom state]`.
    pub round_trip: [[Complex64; 2]; 2],
    pub tau: f64,
    pub r3: f64,
    pub t3: f64,
    pub sqrt_eta3: f64,
    pub phase: Complex64,
}

impl TransientParams {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        if (cfg.cavity1.tau() - cfg.cavity2.tau()).abs()
            > 1e-12 * cfg.cavity1.tau().max(cfg.cavity2.tau())
        {
            return Err(Error::ConfigMismatch(format!(
                "transient propagation requires tau1 = tau2, got {} and {}",
                cfg.cavity1.tau(),
                cfg.cavity2.tau()
            )));
        }
        let lp = &cfg.loop_params;
        Ok(Self {
            r_mirror: [cfg.cavity1.r_mirror(), cfg.cavity2.r_mirror()],
            t_mirror: [cfg.cavity1.t_mirror(), cfg.cavity2.t_mirror()],
            round_trip: [
                [round_trip_factor(&cfg.cavity1, 0), round_trip_factor(&cfg.cavity1, 1)],
                [round_trip_factor(&cfg.cavity2, 0), round_trip_factor(&cfg.cavity2, 1)],
            ],
            tau: cfg.cavity1.tau(),
            r3: lp.r3(),
            t3: lp.t3(),
            sqrt_eta3: lp.sqrt_eta3(),
            phase: lp.phase_factor(),
        })
    }

    fn state_factors(&self, i1: u8, i2: u8) -> (Complex64, Complex64) {
        (
            self.round_trip[0][i1 as usize],
            self.round_trip[1][i2 as usize],
        )
    }
}

/// Per-state time series on the common round-trip grid. Index n labels the
/// sample at t = n tau (zeta5 and beta carry the travel-time offset as pure
/// labeling). All sequences share one length; zeta2 vanishes before t = 0.
#[derive(Debug, Clone)]
pub struct TransientTrace {
    pub tau: f64,
    pub input: Vec<Complex64>,
    pub zeta2: [[Vec<Complex64>; 2]; 2],
    pub zeta5: [[Vec<Complex64>; 2]; 2],
    pub beta: [[Vec<Complex64>; 2]; 2],
}

impl TransientTrace {
    fn empty(tau: f64, input: &[Complex64]) -> Self {
        let n = input.len();
        let grid = || {
            [
                [Vec::with_capacity(n), Vec::with_capacity(n)],
                [Vec::with_capacity(n), Vec::with_capacity(n)],
            ]
        };
        Self {
            tau,
            input: input.to_vec(),
            zeta2: grid(),
            zeta5: grid(),
            beta: grid(),
        }
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    pub fn beta_of(&self, i1: u8, i2: u8) -> &[Complex64] {
        &self.beta[i1 as usize][i2 as usize]
    }

    pub fn zeta5_of(&self, i1: u8, i2: u8) -> &[Complex64] {
        &self.zeta5[i1 as usize][i2 as usize]
    }

    pub fn zeta2_of(&self, i1: u8, i2: u8) -> &[Complex64] {
        &self.zeta2[i1 as usize][i2 as usize]
    }
}

/// Literal evaluation of the path sum for zeta5 at round-trip index
/// n = history.len() - 1, given the zeta2 history of one conditional state:
/// single-cavity-1 paths, single-cavity-2 paths, the mixed double sum, and
/// the zero-round-trip reflection.
pub fn recursion_step(
    history: &[Complex64],
    params: &TransientParams,
    i1: u8,
    i2: u8,
) -> Complex64 {
    assert!(!history.is_empty(), "zeta2 history must contain the current sample");
    let n = history.len() - 1;
    let (f1, f2) = params.state_factors(i1, i2);
    let [r1, r2] = params.r_mirror;
    let [t1, t2] = params.t_mirror;
    let s = params.sqrt_eta3;
    let x = r1 * f1;
    let y = r2 * f2;
    let c_a = I * (t1 * t1 * r2) * f1 * s;
    let c_b = I * (t2 * t2 * r1) * f2 * s;
    let c_m = I * (t1 * t1) * (t2 * t2) * (f1 * f2) * s;

    let mut total = Complex64::default();
    for q in 0..n {
        let mut term = c_a * x.powu((n - q - 1) as u32) + c_b * y.powu((n - q - 1) as u32);
        if n - q >= 2 {
            let mut mixed = Complex64::default();
            for k in 0..=(n - q - 2) {
                mixed += x.powu(k as u32) * y.powu((n - q - 2 - k) as u32);
            }
            term -= c_m * mixed;
        }
        total += term * history[q];
    }
    total - I * (r1 * r2) * s * history[n]
}

/// Running geometric accumulators equivalent to the literal path sum, O(1)
/// per step. The mixed sum is symmetric in the two cavity factors; its
/// recurrence is driven by the canonically smaller factor so that swapping
/// the atom states reproduces bitwise-identical results for identical
/// cavities.
struct LoopRecursion {
    x: Complex64,
    y: Complex64,
    c_a: Complex64,
    c_b: Complex64,
    c_m: Complex64,
    c_prompt: f64,
    a: Complex64,
    b: Complex64,
    m: Complex64,
    drive_from_a: bool,
}

fn canonical_le(p: Complex64, q: Complex64) -> bool {
    (p.re, p.im) <= (q.re, q.im)
}

impl LoopRecursion {
    fn new(params: &TransientParams, i1: u8, i2: u8) -> Self {
        let (f1, f2) = params.state_factors(i1, i2);
        let [r1, r2] = params.r_mirror;
        let [t1, t2] = params.t_mirror;
        let s = params.sqrt_eta3;
        let x = r1 * f1;
        let y = r2 * f2;
        Self {
            x,
            y,
            c_a: I * (t1 * t1 * r2) * f1 * s,
            c_b: I * (t2 * t2 * r1) * f2 * s,
            c_m: I * (t1 * t1) * (t2 * t2) * (f1 * f2) * s,
            c_prompt: (r1 * r2) * s,
            a: Complex64::default(),
            b: Complex64::default(),
            m: Complex64::default(),
            drive_from_a: canonical_le(x, y),
        }
    }

    /// History part of zeta5 at the current step (everything except the
    /// prompt reflection of the current zeta2 sample).
    fn history_part(&self) -> Complex64 {
        (self.c_a * self.a + self.c_b * self.b) - self.c_m * self.m
    }

    fn push(&mut self, zeta2: Complex64) {
        // m first: it consumes the pre-update driving series.
        let (driver, follower) = if self.drive_from_a {
            (self.a, self.y)
        } else {
            (self.b, self.x)
        };
        self.m = follower * self.m + driver;
        self.a = self.x * self.a + zeta2;
        self.b = self.y * self.b + zeta2;
    }
}

/// Propagate the closed loop: at each step the prompt reflections traverse
/// the loop within the sample, so zeta2 and zeta5 solve a 2x2 linear system
/// driven by the input and the accumulated cavity memory.
pub fn propagate_closed_loop(params: &TransientParams, input: &[Complex64]) -> TransientTrace {
    let mut trace = TransientTrace::empty(params.tau, input);
    let p = params.phase;
    let closure_denom = Complex64::new(1.0, 0.0)
        - p * (params.r3 * (params.r_mirror[0] * params.r_mirror[1]) * params.sqrt_eta3);
    for i1 in 0..2u8 {
        for i2 in 0..2u8 {
            let mut rec = LoopRecursion::new(params, i1, i2);
            let z2 = &mut trace.zeta2[i1 as usize][i2 as usize];
            let z5 = &mut trace.zeta5[i1 as usize][i2 as usize];
            let bet = &mut trace.beta[i1 as usize][i2 as usize];
            for &alpha in input {
                let hist = rec.history_part();
                let zeta2 =
                    p * (params.t3 * alpha + I * params.r3 * hist) / closure_denom;
                let zeta5 = hist - I * rec.c_prompt * zeta2;
                z2.push(zeta2);
                z5.push(zeta5);
                bet.push(params.t3 * zeta5 + I * params.r3 * alpha);
                rec.push(zeta2);
            }
        }
    }
    trace
}

/// Independent oracle: hop field samples along the network edges, keeping
/// the circulating field of each cavity as explicit state. Each coupler
/// acts as the beam splitter (out = -r in + t v, v' = f (t in + r v)); the
/// segment phases match the labeled steady-state relations.
pub fn propagate_naive_network(params: &TransientParams, input: &[Complex64]) -> TransientTrace {
    let mut trace = TransientTrace::empty(params.tau, input);
    let p = params.phase;
    let [r1, r2] = params.r_mirror;
    let [t1, t2] = params.t_mirror;
    let s = params.sqrt_eta3;
    for i1 in 0..2u8 {
        for i2 in 0..2u8 {
            let (f1, f2) = params.state_factors(i1, i2);
            let mut v1 = Complex64::default();
            let mut v2 = Complex64::default();
            let z2 = &mut trace.zeta2[i1 as usize][i2 as usize];
            let z5 = &mut trace.zeta5[i1 as usize][i2 as usize];
            let bet = &mut trace.beta[i1 as usize][i2 as usize];
            for &alpha in input {
                // Prompt paths couple zeta2 and zeta5 within one sample:
                // zeta5 = -i r1 r2 s zeta2 + h with h from the cavity state.
                let h = I * s * r2 * t1 * v1 - I * t2 * v2;
                let zeta2 = p * (params.t3 * alpha + I * params.r3 * h)
                    / (Complex64::new(1.0, 0.0) - p * params.r3 * r1 * r2 * s);
                let zeta3 = -I * (-r1 * zeta2 + t1 * v1);
                let zeta4 = I * s * zeta3;
                let zeta5 = -I * (-r2 * zeta4 + t2 * v2);
                z2.push(zeta2);
                z5.push(zeta5);
                bet.push(params.t3 * zeta5 + I * params.r3 * alpha);
                v1 = f1 * (t1 * zeta2 + r1 * v1);
                v2 = f2 * (t2 * zeta4 + r2 * v2);
            }
        }
    }
    trace
}
