//! Two-time conditional probabilities with the inaccessible coordinate time
//! averaged away.
//!
//! After the first time measurement keeps the clock's H path, the global
//! state is `|H⟩c|V⟩r`. A known delay `δ_B = ωτ` is added to the clock
//! photon, both photons then rotate by the unknown phase `φ = ωT`, and the
//! final readings are averaged over `φ ∈ [0, 2π)`. With `a = ωτ`:
//!
//! | pair | integrand              | average          |
//! |------|------------------------|------------------|
//! | P31  | cos²(φ+a)·cos²φ        | (1 + 2cos²a)/8   |
//! | P32  | sin²(φ+a)·cos²φ        | (1 + 2sin²a)/8   |
//! | P41  | cos²(φ+a)·sin²φ        | (1 + 2sin²a)/8   |
//! | P42  | sin²(φ+a)·sin²φ        | (1 + 2cos²a)/8   |
//!
//! The `|V⟩c|V⟩r` component (P32) averages to `(1 + 2sin²a)/8`; the form
//! `(1 + 2cos²a)/8` sometimes quoted for it is the value of P31 and P42. The
//! conditionals `p(3|t1) = (1 + 2cos²a)/4` and `p(3|t2) = (1 + 2sin²a)/4`
//! follow from the table either way, since `P3k + P4k = 1/2`.
//!
//! Averages use the equispaced trapezoid rule on the full period, which is
//! exact for these degree-4 trigonometric polynomials once there are more
//! than eight nodes.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::paw::{singlet_ket, ClockParams};
use crate::qcore::{rotation_unitary, DensityMatrix, Ket, Operator, QError, Tensor, C64};

pub const DEFAULT_NODES: usize = 256;
pub const MIN_NODES: usize = 64;
/// Agreement required between quadrature and closed forms.
pub const QUAD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpptError {
    #[error("quadrature needs at least {MIN_NODES} nodes, got {0}")]
    TooFewNodes(usize),
    #[error(
        "invalid detector pair ({j}, {k}): system detector must be 3 or 4, clock detector 1 or 2"
    )]
    InvalidDetector { j: u8, k: u8 },
    #[error("conditioning event has zero probability")]
    ZeroDenominator,
    #[error(transparent)]
    Algebra(#[from] QError),
}

/// Detector on the clock photon after the final splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockDetector {
    /// H, clock reads `t1`.
    D1,
    /// V, clock reads `t2`.
    D2,
}

/// Detector on the system photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemDetector {
    /// V.
    D3,
    /// H.
    D4,
}

/// A joint click of one system and one clock detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub system: SystemDetector,
    pub clock: ClockDetector,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome {
            system: SystemDetector::D3,
            clock: ClockDetector::D1,
        },
        Outcome {
            system: SystemDetector::D3,
            clock: ClockDetector::D2,
        },
        Outcome {
            system: SystemDetector::D4,
            clock: ClockDetector::D1,
        },
        Outcome {
            system: SystemDetector::D4,
            clock: ClockDetector::D2,
        },
    ];

    /// From detector labels `j ∈ {3, 4}`, `k ∈ {1, 2}`.
    pub fn new(j: u8, k: u8) -> Result<Self, GpptError> {
        let system = match j {
            3 => SystemDetector::D3,
            4 => SystemDetector::D4,
            _ => return Err(GpptError::InvalidDetector { j, k }),
        };
        let clock = match k {
            1 => ClockDetector::D1,
            2 => ClockDetector::D2,
            _ => return Err(GpptError::InvalidDetector { j, k }),
        };
        Ok(Self { system, clock })
    }

    /// Index in the `|HH⟩, |HV⟩, |VH⟩, |VV⟩` basis.
    pub fn basis_index(&self) -> usize {
        let c = match self.clock {
            ClockDetector::D1 => 0,
            ClockDetector::D2 => 1,
        };
        let r = match self.system {
            SystemDetector::D4 => 0,
            SystemDetector::D3 => 1,
        };
        2 * c + r
    }

    /// `|k⟩c⟨k| ⊗ |j⟩r⟨j|`.
    pub fn projector(&self) -> Operator {
        Operator::projector(&Ket::basis(4, self.basis_index()).expect("index < 4"))
            .expect("basis ket")
    }
}

/// Known clock delay, stored as the plate phase `δ_B = ωτ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySetting {
    delta_b: f64,
}

impl DelaySetting {
    pub fn from_phase(delta_b: f64) -> Self {
        Self { delta_b }
    }

    pub fn from_tau(tau: f64, omega: f64) -> Self {
        Self {
            delta_b: omega * tau,
        }
    }

    pub fn phase(&self) -> f64 {
        self.delta_b
    }

    pub fn tau(&self, omega: f64) -> f64 {
        self.delta_b / omega
    }
}

/// `|H⟩c|V⟩r`, the state kept by the first time measurement.
pub fn projected_initial_state() -> Ket {
    Ket::basis(4, 1).expect("static basis ket")
}

/// `[cos(ω(T+τ))|H⟩c − sin(ω(T+τ))|V⟩c] ⊗ [cos(ωT)|V⟩r + sin(ωT)|H⟩r]`.
pub fn global_state(omega: f64, t: f64, delay: DelaySetting) -> Ket {
    state_at_phase(omega * t, delay.phase())
}

fn state_at_phase(phi: f64, delta_b: f64) -> Ket {
    let (sc, cc) = (phi + delta_b).sin_cos();
    let (sr, cr) = phi.sin_cos();
    let clock = [cc, -sc];
    let rest = [sr, cr];
    Ket::from_real(&[
        clock[0] * rest[0],
        clock[0] * rest[1],
        clock[1] * rest[0],
        clock[1] * rest[1],
    ])
    .expect("finite")
}

/// Neumaier-compensated accumulator; summation order is fixed by the caller.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_nodes(n: usize) -> Result<(), GpptError> {
    if n < MIN_NODES {
        return Err(GpptError::TooFewNodes(n));
    }
    Ok(())
}

/// Trapezoid average of a `2π`-periodic function on `n` equispaced nodes.
pub(crate) fn periodic_mean(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        acc.add(f(TAU * i as f64 / n as f64));
    }
    acc.value() / n as f64
}

/// `(1/2π)∫₀^{2π} |⟨jk|Ψ(φ/ω, τ)⟩|² dφ` by the trapezoid rule.
pub fn joint_prob_quadrature(
    outcome: Outcome,
    delay: DelaySetting,
    n_nodes: usize,
) -> Result<f64, GpptError> {
    check_nodes(n_nodes)?;
    let idx = outcome.basis_index();
    Ok(periodic_mean(n_nodes, |phi| {
        state_at_phase(phi, delay.phase()).amplitude(idx).norm_sqr()
    }))
}

pub fn joint_prob_closed(outcome: Outcome, delay: DelaySetting) -> f64 {
    let (s, c) = delay.phase().sin_cos();
    let same = (1.0 + 2.0 * c * c) / 8.0;
    let crossed = (1.0 + 2.0 * s * s) / 8.0;
    match (outcome.system, outcome.clock) {
        (SystemDetector::D3, ClockDetector::D1) | (SystemDetector::D4, ClockDetector::D2) => same,
        (SystemDetector::D3, ClockDetector::D2) | (SystemDetector::D4, ClockDetector::D1) => {
            crossed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbTable {
    pub p31: f64,
    pub p32: f64,
    pub p41: f64,
    pub p42: f64,
}

impl JointProbTable {
    pub fn closed(delay: DelaySetting) -> Self {
        Self::build(|o| Ok(joint_prob_closed(o, delay))).expect("infallible")
    }

    pub fn quadrature(delay: DelaySetting, n_nodes: usize) -> Result<Self, GpptError> {
        Self::build(|o| joint_prob_quadrature(o, delay, n_nodes))
    }

    /// `Tr[P_jk ρ̄]` for each pair.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self, GpptError> {
        Self::build(|o| Ok(rho.expectation(&o.projector())?))
    }

    fn build(f: impl Fn(Outcome) -> Result<f64, GpptError>) -> Result<Self, GpptError> {
        let [o31, o32, o41, o42] = Outcome::ALL;
        Ok(Self {
            p31: f(o31)?,
            p32: f(o32)?,
            p41: f(o41)?,
            p42: f(o42)?,
        })
    }

    pub fn get(&self, outcome: Outcome) -> f64 {
        match (outcome.system, outcome.clock) {
            (SystemDetector::D3, ClockDetector::D1) => self.p31,
            (SystemDetector::D3, ClockDetector::D2) => self.p32,
            (SystemDetector::D4, ClockDetector::D1) => self.p41,
            (SystemDetector::D4, ClockDetector::D2) => self.p42,
        }
    }

    pub fn total(&self) -> f64 {
        self.p31 + self.p32 + self.p41 + self.p42
    }

    /// `P(clock reads k)`, i.e. `P3k + P4k`.
    pub fn clock_marginal(&self, k: ClockDetector) -> f64 {
        match k {
            ClockDetector::D1 => self.p31 + self.p41,
            ClockDetector::D2 => self.p32 + self.p42,
        }
    }

    /// `P3k / (P3k + P4k)`.
    pub fn conditional(&self, k: ClockDetector) -> Result<f64, GpptError> {
        let den = self.clock_marginal(k);
        if den < crate::qcore::NULL_PROB {
            return Err(GpptError::ZeroDenominator);
        }
        let num = match k {
            ClockDetector::D1 => self.p31,
            ClockDetector::D2 => self.p32,
        };
        Ok(num / den)
    }
}

/// `ρ̄ ∝ ∫dT U_T ρ U_T†` for the delayed projected state, normalized.
pub fn time_averaged_state(
    delay: DelaySetting,
    n_nodes: usize,
) -> Result<DensityMatrix, GpptError> {
    check_nodes(n_nodes)?;
    let mut acc = [CompensatedSum::default(); 32];
    for i in 0..n_nodes {
        let psi = state_at_phase(TAU * i as f64 / n_nodes as f64, delay.phase());
        let a = psi.amplitudes();
        for r in 0..4 {
            for c in 0..4 {
                let z = a[r] * a[c].conj();
                acc[2 * (4 * r + c)].add(z.re);
                acc[2 * (4 * r + c) + 1].add(z.im);
            }
        }
    }
    let m = DMatrix::from_fn(4, 4, |r, c| {
        C64::new(
            acc[2 * (4 * r + c)].value(),
            acc[2 * (4 * r + c) + 1].value(),
        )
    });
    let tr = m.trace().re;
    Ok(DensityMatrix::new(m.unscale(tr))?)
}

/// How to evaluate the two-time conditional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Closed,
    /// Trapezoid average of the joint probabilities.
    Quadrature {
        nodes: usize,
    },
    /// `Tr[P_{3k} ρ̄] / Tr[P_k ρ̄]` with `ρ̄` from [`time_averaged_state`].
    AveragedState {
        nodes: usize,
    },
    /// Both coordinate-time integrals kept, starting from the static singlet.
    /// Quadratic in `nodes`; a slow cross-check.
    DoubleIntegral {
        nodes: usize,
    },
}

impl Default for Route {
    fn default() -> Self {
        Route::Quadrature {
            nodes: DEFAULT_NODES,
        }
    }
}

/// `p(d = 3 | t_f = t_k)` given the initial reading `t_i` and delay `τ`.
pub fn two_time_conditional(
    k: ClockDetector,
    delay: DelaySetting,
    route: Route,
) -> Result<f64, GpptError> {
    match route {
        Route::Closed => JointProbTable::closed(delay).conditional(k),
        Route::Quadrature { nodes } => JointProbTable::quadrature(delay, nodes)?.conditional(k),
        Route::AveragedState { nodes } => {
            let rho = time_averaged_state(delay, nodes)?;
            let num = rho.expectation(
                &Outcome {
                    system: SystemDetector::D3,
                    clock: k,
                }
                .projector(),
            )?;
            let den = rho.expectation(&clock_projector(k))?;
            if den < crate::qcore::NULL_PROB {
                return Err(GpptError::ZeroDenominator);
            }
            Ok(num / den)
        }
        Route::DoubleIntegral { nodes } => double_integral_conditional(k, delay, nodes),
    }
}

/// `|k⟩c⟨k| ⊗ 1r`.
pub fn clock_projector(k: ClockDetector) -> Operator {
    let ket = match k {
        ClockDetector::D1 => Ket::h(),
        ClockDetector::D2 => Ket::v(),
    };
    Operator::projector(&ket)
        .and_then(|p| p.tensor(&Operator::identity(2)?))
        .expect("dimension-2 factors")
}

fn double_integral_conditional(
    k: ClockDetector,
    delay: DelaySetting,
    n: usize,
) -> Result<f64, GpptError> {
    check_nodes(n)?;
    let p_init = clock_projector(ClockDetector::D1);
    let id = Operator::identity(2)?;
    let delay_op = rotation_unitary(delay.phase()).tensor(&id)?;
    let rest_v = Outcome {
        system: SystemDetector::D3,
        clock: k,
    }
    .basis_index();
    let rest_h = Outcome {
        system: SystemDetector::D4,
        clock: k,
    }
    .basis_index();
    let singlet = singlet_ket();
    let step = |phi: f64| {
        rotation_unitary(phi)
            .tensor(&rotation_unitary(phi))
            .expect("dim 2")
    };
    let mut num = CompensatedSum::default();
    let mut den = CompensatedSum::default();
    for i in 0..n {
        let phi_first = TAU * i as f64 / n as f64;
        // The singlet is static, so U(φ')|Ψ⟩ is evaluated rather than assumed.
        let first = p_init.apply(&step(phi_first).apply(&singlet)?)?;
        let delayed = delay_op.apply(&first)?;
        for j in 0..n {
            let phi = TAU * j as f64 / n as f64;
            let out = step(phi - phi_first).apply(&delayed)?;
            let pv = out.amplitude(rest_v).norm_sqr();
            num.add(pv);
            den.add(pv + out.amplitude(rest_h).norm_sqr());
        }
    }
    if den.value() < crate::qcore::NULL_PROB {
        return Err(GpptError::ZeroDenominator);
    }
    Ok(num.value() / den.value())
}

/// Single-reading conditional `∫Tr[P_{d,t}(T)ρ] / ∫Tr[P_t(T)ρ]` with the
/// projectors in the Heisenberg picture with respect to `T`.
pub fn one_time_conditional(
    outcome: Outcome,
    rho: &DensityMatrix,
    n_nodes: usize,
) -> Result<f64, GpptError> {
    check_nodes(n_nodes)?;
    let joint = outcome.projector();
    let marginal = clock_projector(outcome.clock);
    let heisenberg = |p: &Operator, phi: f64| -> Operator {
        let u = rotation_unitary(phi)
            .tensor(&rotation_unitary(phi))
            .expect("dim 2");
        u.adjoint()
            .compose(p)
            .and_then(|a| a.compose(&u))
            .expect("dim 4")
    };
    let num = periodic_mean(n_nodes, |phi| {
        rho.expectation(&heisenberg(&joint, phi)).expect("dim 4")
    });
    let den = periodic_mean(n_nodes, |phi| {
        rho.expectation(&heisenberg(&marginal, phi)).expect("dim 4")
    });
    if den < crate::qcore::NULL_PROB {
        return Err(GpptError::ZeroDenominator);
    }
    Ok(num / den)
}

/// A point of the clock-time curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub delay: DelaySetting,
    pub branch: ClockDetector,
    /// `t1 + τ` or `t2 + τ`.
    pub clock_time: f64,
    pub p: f64,
}

/// Closed-form curve points. The `t2` branch is placed at `t2 + τ` so both
/// branches fall on one sinusoid of mean 1/2 and amplitude 1/4.
pub fn theory_curve(delays: &[DelaySetting], clock: &ClockParams) -> Vec<CurvePoint> {
    let mut out = Vec::with_capacity(2 * delays.len());
    for &delay in delays {
        let tau = delay.tau(clock.omega());
        for (branch, t) in [
            (ClockDetector::D1, clock.t1()),
            (ClockDetector::D2, clock.t2()),
        ] {
            let p = two_time_conditional(branch, delay, Route::Closed)
                .expect("closed-form marginal is 1/2");
            out.push(CurvePoint {
                delay,
                branch,
                clock_time: t + tau,
                p,
            });
        }
    }
    out
}

/// `(max − min)/(max + min)` of the curve values.
pub fn visibility(points: &[CurvePoint]) -> f64 {
    let max = points.iter().map(|p| p.p).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.p).fold(f64::INFINITY, f64::min);
    (max - min) / (max + min)
}
