//! Static two-photon universe seen from inside: zero-energy constraint,
//! relational evolution of the rest conditioned on clock readings,
//! observer-mode conditionals and the super-observer erasure test.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use thiserror::Error;

use crate::qcore::{
    fidelity_pure, rotation_unitary, DensityMatrix, Ket, Operator, QError, Tensor, C64, I,
    NULL_PROB, ZERO,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PawError {
    #[error("omega must be finite and positive, got {0}")]
    InvalidOmega(f64),
    #[error("global state must be a normalized dimension-4 ket")]
    InvalidState,
    #[error(transparent)]
    Algebra(#[from] QError),
}

/// Rotation rate of the plates and the two readings of the two-valued clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockParams {
    omega: f64,
    t1: f64,
    t2: f64,
}

impl ClockParams {
    /// `t2` is derived as `t1 + π/(2ω)`: a quarter turn flips the polarization.
    pub fn new(omega: f64, t1: f64) -> Result<Self, PawError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(PawError::InvalidOmega(omega));
        }
        Ok(Self {
            omega,
            t1,
            t2: t1 + FRAC_PI_2 / omega,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }
}

impl Default for ClockParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            t1: 0.0,
            t2: FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PawState {
    psi: Ket,
    clock: ClockParams,
}

impl PawState {
    pub fn new(psi: Ket, clock: ClockParams) -> Result<Self, PawError> {
        if psi.dim() != 4 || !psi.is_normalized() {
            return Err(PawError::InvalidState);
        }
        Ok(Self { psi, clock })
    }

    pub fn psi(&self) -> &Ket {
        &self.psi
    }

    pub fn clock(&self) -> &ClockParams {
        &self.clock
    }

    pub fn with_clock(self, clock: ClockParams) -> Self {
        Self { clock, ..self }
    }
}

/// `(|HV⟩ − |VH⟩)/√2`.
pub fn singlet_ket() -> Ket {
    Ket::from_real(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]).expect("static ket")
}

pub fn make_singlet() -> PawState {
    PawState {
        psi: singlet_ket(),
        clock: ClockParams::default(),
    }
}

/// `cosθ|HH⟩ + e^{iφ} sinθ|VV⟩`, optionally followed by an H↔V swap on the
/// rest photon (a half-wave plate at 45°).
pub fn prepare_state(theta: f64, phi: f64, swap_rest: bool) -> PawState {
    let (s, c) = theta.sin_cos();
    let vv = C64::from_polar(s, phi);
    let cc = C64::new(c, 0.0);
    let amps = if swap_rest {
        vec![ZERO, cc, vv, ZERO]
    } else {
        vec![cc, ZERO, ZERO, vv]
    };
    let psi = Ket::new(amps).expect("finite amplitudes");
    PawState {
        psi,
        clock: ClockParams::default(),
    }
}

/// Local generator `iω(|H⟩⟨V| − |V⟩⟨H|)` with ħ = 1.
pub fn local_hamiltonian(omega: f64) -> Operator {
    let w = I * omega;
    Operator::from_rows(2, &[ZERO, w, -w, ZERO]).expect("static operator")
}

/// `ℋc ⊗ 1 + 1 ⊗ ℋr`, no interaction term.
pub fn total_hamiltonian(omega: f64) -> Operator {
    let h = local_hamiltonian(omega);
    let id = Operator::identity(2).expect("dim 2");
    h.tensor(&id)
        .and_then(|a| a.add(&id.tensor(&h)?))
        .expect("dim 2 factors")
}

/// `‖ℋ|Ψ⟩‖`; zero exactly when the global state solves the constraint.
pub fn constraint_residual(state: &PawState) -> f64 {
    total_hamiltonian(state.clock.omega)
        .apply(&state.psi)
        .map(|k| k.norm_squared().sqrt())
        .expect("dimension checked at construction")
}

/// `⟨φ(t)|Ψ⟩` with `|φ(t)⟩ = exp(−iℋc t)|φ(0)⟩`: the (subnormalized) state
/// of the rest when the clock reads `t`.
pub fn relational_state(state: &PawState, clock_initial: &Ket, t: f64) -> Result<Ket, PawError> {
    if clock_initial.dim() != 2 || !clock_initial.is_normalized() {
        return Err(QError::NotNormalized(clock_initial.norm_squared()).into());
    }
    let phi_t = rotation_unitary(state.clock.omega * t).apply(clock_initial)?;
    Ok(contract_clock(&phi_t, &state.psi))
}

/// `⟨φ|_c Ψ⟩` for a clock bra and a global ket.
pub(crate) fn contract_clock(phi: &Ket, psi: &Ket) -> Ket {
    let a = psi.amplitudes();
    let f = phi.amplitudes();
    let amps = (0..2)
        .map(|r| f[0].conj() * a[r] + f[1].conj() * a[2 + r])
        .collect();
    Ket::new(amps).expect("finite")
}

/// `U_rot(ωT + δ_extra) ⊗ U_rot(ωT)` applied to the global state. The extra
/// clock-only phase models a known delay plate.
pub fn evolve_global(state: &PawState, t: f64, delta_clock_extra: f64) -> Ket {
    let wt = state.clock.omega * t;
    rotation_unitary(wt + delta_clock_extra)
        .tensor(&rotation_unitary(wt))
        .and_then(|u| u.apply(&state.psi))
        .expect("dimension checked at construction")
}

/// Observer-mode conditionals. Detector 1/2 is the clock reading H (`t1`) or
/// V (`t2`); detector 3/4 is the system photon found V or H. `None` marks
/// conditioning on a clock reading that cannot occur.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalTable {
    pub p31: Option<f64>,
    pub p32: Option<f64>,
    pub p41: Option<f64>,
    pub p42: Option<f64>,
    /// Probability of the clock reading `t1` (detector 1).
    pub clock_t1: f64,
    /// Probability of the clock reading `t2` (detector 2).
    pub clock_t2: f64,
}

impl ConditionalTable {
    /// Builds the table from joint probabilities in basis order
    /// `[HH, HV, VH, VV]` (clock first).
    pub fn from_joint(joint: [f64; 4]) -> Self {
        let joint = joint.map(|p| if p < NULL_PROB { 0.0 } else { p });
        let [hh, hv, vh, vv] = joint;
        let clock_t1 = hh + hv;
        let clock_t2 = vh + vv;
        let cond = |num: f64, den: f64| (den >= NULL_PROB).then(|| num / den);
        Self {
            p31: cond(hv, clock_t1),
            p41: cond(hh, clock_t1),
            p32: cond(vv, clock_t2),
            p42: cond(vh, clock_t2),
            clock_t1,
            clock_t2,
        }
    }
}

pub fn observer_conditionals(state: &PawState, t: f64) -> ConditionalTable {
    let evolved = evolve_global(state, t, 0.0);
    let joint = [0, 1, 2, 3].map(|i| evolved.amplitude(i).norm_sqr());
    ConditionalTable::from_joint(joint)
}

/// Conditional state after coherent erasure of the clock's which-path
/// information, and the probability of the post-selected port.
#[derive(Debug, Clone, PartialEq)]
pub struct Erasure {
    pub rho: DensityMatrix,
    pub postselect_prob: f64,
}

/// Polarizing splitter on the clock photon, 50/50 recombination with
/// relative path phase `chi`, post-selection on one output port.
pub fn erase_density(rho: &DensityMatrix, chi: f64) -> Result<Erasure, PawError> {
    if rho.dim() != 4 {
        return Err(QError::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        }
        .into());
    }
    let amp = C64::new(FRAC_1_SQRT_2, 0.0);
    let port = Operator::from_rows(2, &[amp, ZERO, ZERO, amp * C64::from_polar(1.0, chi)])?;
    let kraus = port.tensor(&Operator::identity(2)?)?;
    let unnorm = kraus.matrix() * rho.matrix() * kraus.matrix().adjoint();
    let postselect_prob = unnorm.trace().re;
    let rho = DensityMatrix::new(unnorm.unscale(postselect_prob))?;
    Ok(Erasure {
        rho,
        postselect_prob,
    })
}

pub fn superobserver_erased_state_with_phase(
    state: &PawState,
    t: f64,
    chi: f64,
) -> Result<Erasure, PawError> {
    let evolved = DensityMatrix::from_ket(&evolve_global(state, t, 0.0))?;
    erase_density(&evolved, chi)
}

/// Erasure with the calibrated zero path phase.
pub fn superobserver_erased_state(state: &PawState, t: f64) -> Result<Erasure, PawError> {
    superobserver_erased_state_with_phase(state, t, 0.0)
}

/// `(T, ⟨Ψ|ρ_out(T)|Ψ⟩)` against the singlet target.
pub fn superobserver_fidelity_sweep(
    state: &PawState,
    ts: &[f64],
) -> Result<Vec<(f64, f64)>, PawError> {
    let target = singlet_ket();
    ts.iter()
        .map(|&t| {
            let erased = superobserver_erased_state(state, t)?;
            Ok((t, fidelity_pure(&erased.rho, &target)?))
        })
        .collect()
}

/// Convenience: ket of `|clock⟩|rest⟩`.
pub fn product(clock: &Ket, rest: &Ket) -> Ket {
    clock.tensor(rest).expect("dimension-2 factors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{EXACT_TOL, ONE};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn hv_state() -> PawState {
        PawState::new(product(&Ket::h(), &Ket::v()), ClockParams::default()).unwrap()
    }

    #[test]
    fn clock_params_validation() {
        assert!(ClockParams::new(0.0, 0.0).is_err());
        assert!(ClockParams::new(f64::NAN, 0.0).is_err());
        let c = ClockParams::new(2.0, 0.3).unwrap();
        assert!((c.t2() - c.t1() - PI / 4.0).abs() < EXACT_TOL);
    }

    #[test]
    fn singlet_amplitudes() {
        let s = make_singlet();
        assert!((s.psi().norm_squared() - 1.0).abs() < EXACT_TOL);
        assert!((s.psi().amplitude(1).re - FRAC_1_SQRT_2).abs() < EXACT_TOL);
        assert_eq!(s.psi().amplitude(0), ZERO);
    }

    #[test]
    fn prepare_state_family() {
        let s = prepare_state(0.0, 0.0, false);
        assert!(s.psi().distance(&Ket::basis(4, 0).unwrap()).unwrap() < EXACT_TOL);
        let triplet = Ket::from_real(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]).unwrap();
        let s = prepare_state(FRAC_PI_4, 0.0, true);
        assert!(s.psi().distance_up_to_phase(&triplet).unwrap() < EXACT_TOL);
        let s = prepare_state(FRAC_PI_4, PI, true);
        assert!(s.psi().distance_up_to_phase(&singlet_ket()).unwrap() < EXACT_TOL);
    }

    #[test]
    fn hamiltonian_properties() {
        let h = total_hamiltonian(1.0);
        assert!(h.hermiticity_residual() < EXACT_TOL);
        let out = h.apply(&product(&Ket::h(), &Ket::v())).unwrap();
        let expected = Ket::new(vec![I, ZERO, ZERO, -I]).unwrap();
        assert!(out.distance(&expected).unwrap() < EXACT_TOL);
        let ev = total_hamiltonian(1.5).hermitian_eigenvalues();
        for (got, want) in ev.iter().zip([-3.0, 0.0, 0.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constraint_residual_cases() {
        assert!(constraint_residual(&make_singlet()) < EXACT_TOL);
        let hv = hv_state().with_clock(ClockParams::new(2.0, 0.0).unwrap());
        assert!((constraint_residual(&hv) - 2.0 * 2f64.sqrt()).abs() < EXACT_TOL);
        let triplet = prepare_state(FRAC_PI_4, 0.0, true);
        assert!((constraint_residual(&triplet) - 2.0).abs() < EXACT_TOL);
    }

    #[test]
    fn relational_state_examples() {
        let s = make_singlet();
        let r0 = relational_state(&s, &Ket::h(), 0.0).unwrap();
        assert!(
            r0.distance(&Ket::v().scale(C64::new(FRAC_1_SQRT_2, 0.0)))
                .unwrap()
                < EXACT_TOL
        );
        let r = relational_state(&s, &Ket::h(), FRAC_PI_2).unwrap();
        assert!(
            r.distance_up_to_phase(&Ket::h().scale(C64::new(FRAC_1_SQRT_2, 0.0)))
                .unwrap()
                < EXACT_TOL
        );
        let r = relational_state(&s, &Ket::h(), FRAC_PI_4).unwrap();
        let want = Ket::from_real(&[0.5, 0.5]).unwrap();
        assert!(r.distance_up_to_phase(&want).unwrap() < EXACT_TOL);
        assert!(!r.is_normalized());
        assert!(relational_state(&s, &Ket::from_real(&[1.0, 1.0]).unwrap(), 0.0).is_err());
    }

    #[test]
    fn evolve_global_examples() {
        let s = make_singlet();
        for t in [0.0, 0.4, 2.0, -7.0] {
            assert!(
                evolve_global(&s, t, 0.0)
                    .distance_up_to_phase(s.psi())
                    .unwrap()
                    < EXACT_TOL
            );
        }
        let vh = Ket::basis(4, 2).unwrap().scale(-ONE);
        assert!(
            evolve_global(&hv_state(), FRAC_PI_2, 0.0)
                .distance(&vh)
                .unwrap()
                < EXACT_TOL
        );
        let vv = Ket::basis(4, 3).unwrap().scale(-ONE);
        assert!(
            evolve_global(&hv_state(), 0.0, FRAC_PI_2)
                .distance(&vv)
                .unwrap()
                < EXACT_TOL
        );
    }

    #[test]
    fn observer_examples() {
        let s = make_singlet();
        let reference = observer_conditionals(&s, 0.0);
        assert_eq!(reference.p31, Some(1.0));
        assert_eq!(reference.p32, Some(0.0));
        assert_eq!(reference.p41, Some(0.0));
        assert_eq!(reference.p42, Some(1.0));
        for k in 0..15 {
            let t = 2.0 * PI * k as f64 / 15.0;
            let table = observer_conditionals(&s, t);
            assert_eq!(
                (table.p31, table.p32, table.p41, table.p42),
                (reference.p31, reference.p32, reference.p41, reference.p42)
            );
        }
        let hh = PawState::new(Ket::basis(4, 0).unwrap(), ClockParams::default()).unwrap();
        let table = observer_conditionals(&hh, 0.0);
        assert_eq!(
            (table.p31, table.p41, table.p32, table.p42),
            (Some(0.0), Some(1.0), None, None)
        );
        let d = Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let hd = PawState::new(product(&Ket::h(), &d), ClockParams::default()).unwrap();
        assert!((observer_conditionals(&hd, 0.0).p31.unwrap() - 0.5).abs() < EXACT_TOL);
    }

    #[test]
    fn erasure_examples() {
        let s = make_singlet();
        let target = DensityMatrix::from_ket(s.psi()).unwrap();
        for t in [0.0, 0.3, 1.7, 4.0] {
            let e = superobserver_erased_state(&s, t).unwrap();
            assert!((e.rho.matrix() - target.matrix()).norm() < EXACT_TOL);
            assert!((e.postselect_prob - 0.5).abs() < EXACT_TOL);
        }
        let e = superobserver_erased_state(&hv_state(), 0.0).unwrap();
        let hv = DensityMatrix::from_ket(hv_state().psi()).unwrap();
        assert!((e.rho.matrix() - hv.matrix()).norm() < EXACT_TOL);
        assert!((e.postselect_prob - 0.5).abs() < EXACT_TOL);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let e = erase_density(&mixed, 0.0).unwrap();
        assert!((e.rho.matrix() - mixed.matrix()).norm() < EXACT_TOL);
        assert!((e.postselect_prob - 0.5).abs() < EXACT_TOL);
    }

    #[test]
    fn erasure_phase_degrades_fidelity() {
        let s = make_singlet();
        let e = superobserver_erased_state_with_phase(&s, 0.0, PI).unwrap();
        // χ = π maps the singlet onto the orthogonal triplet
        assert!(fidelity_pure(&e.rho, s.psi()).unwrap() < EXACT_TOL);
        let e = superobserver_erased_state_with_phase(&s, 0.0, FRAC_PI_2).unwrap();
        assert!((fidelity_pure(&e.rho, s.psi()).unwrap() - 0.5).abs() < EXACT_TOL);
    }

    #[test]
    fn fidelity_sweep_examples() {
        let ts: Vec<f64> = (0..15).map(|k| k as f64 * 0.4).collect();
        for (_, f) in superobserver_fidelity_sweep(&make_singlet(), &ts).unwrap() {
            assert!((f - 1.0).abs() < EXACT_TOL);
        }
        let sweep = superobserver_fidelity_sweep(&hv_state(), &[0.0]).unwrap();
        assert!((sweep[0].1 - 0.5).abs() < EXACT_TOL);
        assert!(superobserver_fidelity_sweep(&make_singlet(), &[])
            .unwrap()
            .is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ket4() -> impl Strategy<Value = Ket> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4).prop_filter_map(
                "nonzero",
                |v| {
                    Ket::new(v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
                        .ok()?
                        .normalize()
                        .ok()
                },
            )
        }

        proptest! {
            #[test]
            fn erasure_postselects_half(psi in ket4(), t in -5.0f64..5.0) {
                let st = PawState::new(psi, ClockParams::default()).unwrap();
                let e = superobserver_erased_state(&st, t).unwrap();
                prop_assert!((e.postselect_prob - 0.5).abs() < 1e-12);
            }

            #[test]
            fn defined_rows_sum_to_one(psi in ket4(), t in -5.0f64..5.0) {
                let st = PawState::new(psi, ClockParams::default()).unwrap();
                let tab = observer_conditionals(&st, t);
                if let (Some(a), Some(b)) = (tab.p31, tab.p41) { prop_assert!((a + b - 1.0).abs() < 1e-12); }
                if let (Some(a), Some(b)) = (tab.p32, tab.p42) { prop_assert!((a + b - 1.0).abs() < 1e-12); }
            }

            #[test]
            fn static_iff_constraint_holds(psi in ket4()) {
                let st = PawState::new(psi, ClockParams::default()).unwrap();
                let moves = (0..32).map(|k| k as f64 * 0.2)
                    .map(|t| evolve_global(&st, t, 0.0).distance_up_to_phase(st.psi()).unwrap())
                    .fold(0.0, f64::max);
                if constraint_residual(&st) < 1e-12 {
                    prop_assert!(moves < 1e-12);
                } else {
                    prop_assert!(moves > 0.0);
                }
            }
        }
    }
}
