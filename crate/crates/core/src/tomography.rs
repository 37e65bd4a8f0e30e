//! Two-photon polarization tomography with sixteen product projections.
//!
//! Each arm sets a quarter-wave plate, then a half-wave plate, in front of an
//! analyzer that transmits V. The arm measures the projector onto
//! `(HWP·QWP)†|V⟩`; the angle table below selects H, V, D = (H+V)/√2 and
//! L = (H+iV)/√2. The sixteen products are informationally complete.
//!
//! Reconstruction is either linear inversion of the 16×16 design matrix
//! (may be unphysical) or binomial maximum likelihood by a diluted
//! `RρR` iteration, which stays positive semidefinite by construction and
//! only accepts steps that raise the likelihood.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{
    fidelity_pure, DensityMatrix, Ket, Operator, QError, Tensor, C64, I, ONE, ZERO,
};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TomographyError {
    #[error("{settings} settings but {counts} counts")]
    LengthMismatch { settings: usize, counts: usize },
    #[error("count {count} exceeds exposure {exposure} for setting {label}")]
    CountExceedsExposure {
        label: String,
        count: u64,
        exposure: u64,
    },
    #[error("exposure must be at least 1")]
    ZeroExposure,
    #[error("design matrix is singular")]
    Singular,
    #[error("data carry no signal (reconstructed trace {0})")]
    NoSignal(f64),
    #[error(
        "MLE did not converge after {iterations} iterations (gradient norm {gradient_norm:e})"
    )]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error(transparent)]
    Algebra(#[from] QError),
}

/// Wave-plate angles for both arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSetting {
    pub clock_qwp: f64,
    pub clock_hwp: f64,
    pub rest_qwp: f64,
    pub rest_hwp: f64,
    pub label: String,
}

/// Linear retarder with fast axis at `angle`, up to global phase.
fn retarder(angle: f64, retardance: f64) -> Operator {
    let (s, c) = angle.sin_cos();
    let e = C64::from_polar(1.0, retardance);
    let cc = C64::new(c, 0.0);
    let ss = C64::new(s, 0.0);
    // R(−θ) · diag(1, e^{iΓ}) · R(θ)
    let m = [
        cc * cc + ss * ss * e,
        cc * ss - ss * cc * e,
        ss * cc - cc * ss * e,
        ss * ss + cc * cc * e,
    ];
    Operator::from_rows(2, &m).expect("finite")
}

pub fn quarter_wave_plate(angle: f64) -> Operator {
    retarder(angle, std::f64::consts::FRAC_PI_2)
}

pub fn half_wave_plate(angle: f64) -> Operator {
    retarder(angle, std::f64::consts::PI)
}

/// The polarization transmitted by QWP → HWP → V analyzer.
pub fn analyzer_ket(qwp: f64, hwp: f64) -> Ket {
    let plates = half_wave_plate(hwp)
        .compose(&quarter_wave_plate(qwp))
        .expect("dim 2");
    plates.adjoint().apply(&Ket::v()).expect("dim 2")
}

impl ProjectionSetting {
    pub fn projector(&self) -> Operator {
        let c = Operator::projector(&analyzer_ket(self.clock_qwp, self.clock_hwp))
            .expect("unitary image");
        let r = Operator::projector(&analyzer_ket(self.rest_qwp, self.rest_hwp))
            .expect("unitary image");
        c.tensor(&r).expect("dim 2")
    }

    fn ket(&self) -> Ket {
        analyzer_ket(self.clock_qwp, self.clock_hwp)
            .tensor(&analyzer_ket(self.rest_qwp, self.rest_hwp))
            .expect("dim 2")
    }
}

/// `(label, qwp, hwp)` for each single-arm projection.
pub const ARM_SETTINGS: [(char, f64, f64); 4] = [
    ('H', 0.0, FRAC_PI_4),
    ('V', 0.0, 0.0),
    ('D', FRAC_PI_4, 3.0 * FRAC_PI_8),
    ('L', 0.0, FRAC_PI_8),
];

/// Clock letter first: `HH, HV, HD, HL, VH, …, LL`.
pub fn standard_16_settings() -> Vec<ProjectionSetting> {
    let mut out = Vec::with_capacity(16);
    for (lc, qc, hc) in ARM_SETTINGS {
        for (lr, qr, hr) in ARM_SETTINGS {
            out.push(ProjectionSetting {
                clock_qwp: qc,
                clock_hwp: hc,
                rest_qwp: qr,
                rest_hwp: hr,
                label: format!("{lc}{lr}"),
            });
        }
    }
    out
}

fn pauli(i: usize) -> DMatrix<C64> {
    let m = match i {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        _ => [ONE, ZERO, ZERO, -ONE],
    };
    DMatrix::from_row_slice(2, 2, &m)
}

/// `σa ⊗ σb` for `k = 4a + b`.
fn pauli_pair(k: usize) -> DMatrix<C64> {
    crate::qcore::kron(&pauli(k / 4), &pauli(k % 4))
}

/// Real linear map from Pauli coordinates `r` of `ρ = Σ r_k σ_k/4` to the
/// setting probabilities.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    condition_number: f64,
}

impl DesignMatrix {
    pub fn new(settings: &[ProjectionSetting]) -> Result<Self, TomographyError> {
        if settings.len() != 16 {
            return Err(TomographyError::Singular);
        }
        let projectors: Vec<Operator> = settings.iter().map(ProjectionSetting::projector).collect();
        let basis: Vec<DMatrix<C64>> = (0..16).map(pauli_pair).collect();
        let matrix = DMatrix::from_fn(16, 16, |i, k| {
            (projectors[i].matrix() * &basis[k]).trace().re / 4.0
        });
        let sv = matrix.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if min <= 1e-12 * max {
            return Err(TomographyError::Singular);
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or(TomographyError::Singular)?;
        Ok(Self {
            matrix,
            inverse,
            condition_number: max / min,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Hermitian matrix whose setting probabilities equal `freqs`. Trace is
    /// whatever the data imply.
    pub fn invert(&self, freqs: &[f64]) -> DMatrix<C64> {
        let r = &self.inverse * DVector::from_column_slice(freqs);
        let mut m = DMatrix::from_element(4, 4, ZERO);
        for (k, &rk) in r.iter().enumerate() {
            m += pauli_pair(k) * C64::new(rk / 4.0, 0.0);
        }
        m
    }
}

/// `Tr[Π_i ρ]`, clipped to `[0, 1]`.
pub fn born_probabilities(
    rho: &DensityMatrix,
    settings: &[ProjectionSetting],
) -> Result<Vec<f64>, TomographyError> {
    settings
        .iter()
        .map(|s| Ok(rho.expectation(&s.projector())?.clamp(0.0, 1.0)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountModel {
    /// Fixed number of trials per setting.
    #[default]
    Binomial,
    /// Poisson counts of mean `exposure·p`, capped at `exposure`.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyData {
    pub settings: Vec<ProjectionSetting>,
    pub counts: Vec<u64>,
    /// Trials per setting.
    pub exposure: u64,
}

impl TomographyData {
    pub fn new(
        settings: Vec<ProjectionSetting>,
        counts: Vec<u64>,
        exposure: u64,
    ) -> Result<Self, TomographyError> {
        let data = Self {
            settings,
            counts,
            exposure,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<(), TomographyError> {
        if self.exposure == 0 {
            return Err(TomographyError::ZeroExposure);
        }
        if self.settings.len() != self.counts.len() {
            return Err(TomographyError::LengthMismatch {
                settings: self.settings.len(),
                counts: self.counts.len(),
            });
        }
        for (s, &c) in self.settings.iter().zip(&self.counts) {
            if c > self.exposure {
                return Err(TomographyError::CountExceedsExposure {
                    label: s.label.clone(),
                    count: c,
                    exposure: self.exposure,
                });
            }
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.exposure as f64)
            .collect()
    }
}

/// Setting `i` draws from stream `(seed, i)`.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[ProjectionSetting],
    exposure: u64,
    seed: u64,
    model: CountModel,
) -> Result<TomographyData, TomographyError> {
    if exposure == 0 {
        return Err(TomographyError::ZeroExposure);
    }
    let probs = born_probabilities(rho, settings)?;
    let counts = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p <= 0.0 {
                return 0;
            }
            let mut r = rng::stream(seed, i as u64);
            match model {
                CountModel::Binomial => Binomial::new(exposure, p)
                    .expect("p in [0, 1]")
                    .sample(&mut r),
                CountModel::Poisson => {
                    let draw: f64 = Poisson::new(exposure as f64 * p)
                        .expect("positive mean")
                        .sample(&mut r);
                    (draw as u64).min(exposure)
                }
            }
        })
        .collect();
    TomographyData::new(settings.to_vec(), counts, exposure)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Mle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub method: Method,
    /// False when a linear estimate has an eigenvalue below `−1e−8`.
    pub physical: bool,
    pub log_likelihood: Option<f64>,
    pub iterations: Option<usize>,
    pub gradient_norm: Option<f64>,
    /// Log-likelihood after every accepted MLE step, when requested.
    pub history: Vec<f64>,
}

pub fn reconstruct_linear(data: &TomographyData) -> Result<ReconstructionResult, TomographyError> {
    data.validate()?;
    let design = DesignMatrix::new(&data.settings)?;
    let m = design.invert(&data.frequencies());
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = herm.trace().re;
    if tr < 1e-12 {
        return Err(TomographyError::NoSignal(tr));
    }
    let rho = DensityMatrix::from_hermitian(herm.unscale(tr))?;
    let physical = rho.is_physical();
    Ok(ReconstructionResult {
        rho,
        method: Method::Linear,
        physical,
        log_likelihood: None,
        iterations: None,
        gradient_norm: None,
        history: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Stop once an accepted step improves the log-likelihood by less.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub record_history: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            record_history: false,
        }
    }
}

/// Rank-one projector kets and counts in fixed-size form for the inner loop.
struct Likelihood {
    kets: Vec<Vector4<C64>>,
    counts: Vec<f64>,
    exposure: f64,
}

impl Likelihood {
    fn new(data: &TomographyData) -> Self {
        let kets = data
            .settings
            .iter()
            .map(|s| {
                let k = s.ket();
                Vector4::from_iterator(k.amplitudes().iter().copied())
            })
            .collect();
        Self {
            kets,
            counts: data.counts.iter().map(|&c| c as f64).collect(),
            exposure: data.exposure as f64,
        }
    }

    fn probability(&self, i: usize, rho: &Matrix4<C64>) -> f64 {
        let v = &self.kets[i];
        v.dotc(&(rho * v)).re
    }

    fn log_likelihood(&self, rho: &Matrix4<C64>) -> f64 {
        let mut total = 0.0;
        for i in 0..self.kets.len() {
            let p = self.probability(i, rho);
            let n = self.counts[i];
            let miss = self.exposure - n;
            if n > 0.0 {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                total += n * p.ln();
            }
            if miss > 0.0 {
                if p >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                total += miss * (1.0 - p).ln();
            }
        }
        total
    }

    /// `∂L/∂ρ = Σ (n/p − (N−n)/(1−p)) |v⟩⟨v|`.
    fn gradient(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        let mut g = Matrix4::zeros();
        for i in 0..self.kets.len() {
            let p = self.probability(i, rho);
            let n = self.counts[i];
            let miss = self.exposure - n;
            let mut w = 0.0;
            if n > 0.0 {
                w += n / p;
            }
            if miss > 0.0 {
                w -= miss / (1.0 - p);
            }
            let v = &self.kets[i];
            g += v * v.adjoint() * C64::new(w, 0.0);
        }
        g
    }
}

fn to_fixed(m: &DMatrix<C64>) -> Matrix4<C64> {
    Matrix4::from_iterator(m.iter().copied())
}

fn normalize_trace(m: Matrix4<C64>) -> Matrix4<C64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = herm.trace().re;
    herm.unscale(tr)
}

/// Log-likelihood of `rho` under the binomial count model of `data`.
pub fn log_likelihood(rho: &DensityMatrix, data: &TomographyData) -> Result<f64, TomographyError> {
    data.validate()?;
    if rho.dim() != 4 {
        return Err(QError::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        }
        .into());
    }
    Ok(Likelihood::new(data).log_likelihood(&to_fixed(rho.matrix())))
}

pub fn reconstruct_mle(data: &TomographyData) -> Result<ReconstructionResult, TomographyError> {
    reconstruct_mle_with(data, &MleOptions::default())
}

pub fn reconstruct_mle_with(
    data: &TomographyData,
    opts: &MleOptions,
) -> Result<ReconstructionResult, TomographyError> {
    data.validate()?;
    let lik = Likelihood::new(data);
    let mixed = Matrix4::<C64>::identity().unscale(4.0);

    // Warm start near the clipped linear estimate, kept full rank so that
    // every direction can still grow.
    let mut rho = match reconstruct_linear(data).and_then(|r| Ok(r.rho.project_to_physical()?)) {
        Ok(lin) => to_fixed(lin.matrix()) * C64::new(0.999, 0.0) + mixed * C64::new(0.001, 0.0),
        Err(_) => mixed,
    };
    let mut ll = lik.log_likelihood(&rho);
    if !ll.is_finite() {
        rho = mixed;
        ll = lik.log_likelihood(&rho);
    }
    let mut history = Vec::new();
    if opts.record_history {
        history.push(ll);
    }

    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let g = lik.gradient(&rho);
        let scale = g.norm();
        if scale == 0.0 {
            converged = true;
            break;
        }
        let g = g.unscale(scale);
        let mut accepted = false;
        while step > 1e-14 {
            let a = Matrix4::identity() + g * C64::new(step, 0.0);
            let cand = normalize_trace(a * rho * a.adjoint());
            let cand_ll = lik.log_likelihood(&cand);
            if cand_ll > ll {
                let gain = cand_ll - ll;
                rho = cand;
                ll = cand_ll;
                accepted = true;
                if opts.record_history {
                    history.push(ll);
                }
                step = (step * 2.0).min(1e3);
                if gain < opts.tolerance {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }

    let gradient_norm = stationarity(&lik, &rho) / lik.exposure;
    if !converged {
        return Err(TomographyError::NotConverged {
            iterations,
            gradient_norm,
        });
    }
    let m = DMatrix::from_iterator(4, 4, rho.iter().copied());
    let rho = DensityMatrix::new(m)?;
    Ok(ReconstructionResult {
        rho,
        method: Method::Mle,
        physical: true,
        log_likelihood: Some(ll),
        iterations: Some(iterations),
        gradient_norm: Some(gradient_norm),
        history,
    })
}

/// `‖Gρ − Tr[Gρ]ρ‖`, zero at an interior or boundary optimum.
fn stationarity(lik: &Likelihood, rho: &Matrix4<C64>) -> f64 {
    let g = lik.gradient(rho);
    let gr = g * rho;
    (gr - rho * gr.trace()).norm()
}

pub fn fidelity_report(
    result: &ReconstructionResult,
    target: &Ket,
) -> Result<f64, TomographyError> {
    Ok(fidelity_pure(&result.rho, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paw::singlet_ket;
    use crate::qcore::EXACT_TOL;

    fn singlet_rho() -> DensityMatrix {
        DensityMatrix::from_ket(&singlet_ket()).unwrap()
    }

    fn label_ket(c: char) -> Ket {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match c {
            'H' => Ket::h(),
            'V' => Ket::v(),
            'D' => Ket::from_real(&[h, h]).unwrap(),
            _ => Ket::new(vec![C64::new(h, 0.0), C64::new(0.0, h)]).unwrap(),
        }
    }

    #[test]
    fn plates_are_unitary() {
        for a in [0.0, 0.3, 1.2] {
            assert!(quarter_wave_plate(a).is_unitary());
            assert!(half_wave_plate(a).is_unitary());
        }
        // two quarter waves make a half wave
        let q = quarter_wave_plate(0.4);
        let qq = q.compose(&q).unwrap();
        let h = half_wave_plate(0.4);
        let overlap = (qq.adjoint().compose(&h).unwrap().matrix().trace() / 2.0).norm();
        assert!((overlap - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn arm_angles_select_intended_states() {
        for (label, q, h) in ARM_SETTINGS {
            let got = analyzer_ket(q, h);
            let want = label_ket(label);
            assert!(
                got.distance_up_to_phase(&want).unwrap() < EXACT_TOL,
                "{label}"
            );
        }
    }

    #[test]
    fn sixteen_settings_are_complete() {
        let settings = standard_16_settings();
        assert_eq!(settings.len(), 16);
        for s in &settings {
            assert!(s.projector().is_projector());
        }
        let design = DesignMatrix::new(&settings).unwrap();
        assert!(design.condition_number() < 20.0);
    }

    #[test]
    fn born_examples() {
        let settings = standard_16_settings();
        let idx = |l: &str| settings.iter().position(|s| s.label == l).unwrap();
        let p = born_probabilities(&singlet_rho(), &settings).unwrap();
        assert!(p[idx("VV")].abs() < EXACT_TOL);
        assert!((p[idx("HV")] - 0.5).abs() < EXACT_TOL);
        assert!(p[idx("DD")].abs() < EXACT_TOL);
        let mixed =
            born_probabilities(&DensityMatrix::maximally_mixed(4).unwrap(), &settings).unwrap();
        assert!(mixed.iter().all(|x| (x - 0.25).abs() < EXACT_TOL));
    }

    #[test]
    fn simulate_counts_behaviour() {
        let settings = standard_16_settings();
        let a =
            simulate_counts(&singlet_rho(), &settings, 10_000, 3, CountModel::Binomial).unwrap();
        let b =
            simulate_counts(&singlet_rho(), &settings, 10_000, 3, CountModel::Binomial).unwrap();
        assert_eq!(a, b);
        let hv = settings.iter().position(|s| s.label == "HV").unwrap();
        assert!((a.counts[hv] as f64 - 5000.0).abs() < 5.0 * 50.0);
        let vv = settings.iter().position(|s| s.label == "VV").unwrap();
        assert_eq!(a.counts[vv], 0);
        let p = simulate_counts(&singlet_rho(), &settings, 10_000, 3, CountModel::Poisson).unwrap();
        assert_eq!(p.counts[vv], 0);
        assert!(p.counts.iter().all(|&c| c <= 10_000));
        assert_eq!(
            simulate_counts(&singlet_rho(), &settings, 0, 3, CountModel::Binomial).unwrap_err(),
            TomographyError::ZeroExposure
        );
    }

    fn exact_data(rho: &DensityMatrix) -> TomographyData {
        // Probabilities of the states used here are multiples of 1/8, so a
        // power-of-two exposure gives exact counts.
        let settings = standard_16_settings();
        let exposure = 1u64 << 20;
        let counts = born_probabilities(rho, &settings)
            .unwrap()
            .iter()
            .map(|p| (p * exposure as f64).round() as u64)
            .collect();
        TomographyData::new(settings, counts, exposure).unwrap()
    }

    #[test]
    fn linear_noiseless_round_trips() {
        let r = reconstruct_linear(&exact_data(&singlet_rho())).unwrap();
        assert!(fidelity_report(&r, &singlet_ket()).unwrap() >= 1.0 - 1e-9);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let r = reconstruct_linear(&exact_data(&mixed)).unwrap();
        assert!((r.rho.matrix() - mixed.matrix()).norm() < 1e-9);
        assert!(r.physical);
    }

    #[test]
    fn linear_can_be_unphysical_on_noisy_data() {
        let settings = standard_16_settings();
        let flagged = (0..20).any(|seed| {
            let d = simulate_counts(&singlet_rho(), &settings, 1000, seed, CountModel::Binomial)
                .unwrap();
            !reconstruct_linear(&d).unwrap().physical
        });
        assert!(flagged);
    }

    #[test]
    fn mle_noiseless_singlet() {
        let r = reconstruct_mle(&exact_data(&singlet_rho())).unwrap();
        assert!(fidelity_report(&r, &singlet_ket()).unwrap() >= 1.0 - 1e-6);
        assert!(r.rho.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn mle_history_is_monotone() {
        let settings = standard_16_settings();
        let d = simulate_counts(&singlet_rho(), &settings, 500, 11, CountModel::Binomial).unwrap();
        let opts = MleOptions {
            record_history: true,
            ..Default::default()
        };
        let r = reconstruct_mle_with(&d, &opts).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(r.history.last().copied(), r.log_likelihood);
    }

    #[test]
    fn mle_beats_projected_linear() {
        let settings = standard_16_settings();
        for seed in 0..20 {
            let d = simulate_counts(&singlet_rho(), &settings, 2000, seed, CountModel::Binomial)
                .unwrap();
            let mle = reconstruct_mle(&d).unwrap();
            let lin = reconstruct_linear(&d)
                .unwrap()
                .rho
                .project_to_physical()
                .unwrap();
            assert!(mle.log_likelihood.unwrap() >= log_likelihood(&lin, &d).unwrap());
        }
    }

    #[test]
    fn mle_survives_adversarial_counts() {
        let settings = standard_16_settings();
        let cases: Vec<Vec<u64>> = vec![
            vec![0; 16],
            vec![100; 16],
            (0..16).map(|i| if i % 4 == 0 { 0 } else { 100 }).collect(),
            (0..16).map(|i| if i < 4 { 100 } else { 0 }).collect(),
            (0..16).map(|i| (i * 7 % 101) as u64).collect(),
        ];
        for counts in cases {
            let d = TomographyData::new(settings.clone(), counts, 100).unwrap();
            let r = reconstruct_mle(&d).unwrap();
            assert!(r.rho.min_eigenvalue() >= -1e-10);
            assert!((r.rho.trace().re - 1.0).abs() < 1e-10);
            assert!(r
                .rho
                .matrix()
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite()));
        }
    }

    #[test]
    fn data_validation() {
        let settings = standard_16_settings();
        assert!(matches!(
            TomographyData::new(settings.clone(), vec![0; 15], 10),
            Err(TomographyError::LengthMismatch { .. })
        ));
        assert!(matches!(
            TomographyData::new(settings, vec![11; 16], 10),
            Err(TomographyError::CountExceedsExposure { .. })
        ));
    }

    #[test]
    fn fidelity_report_examples() {
        let mixed = ReconstructionResult {
            rho: DensityMatrix::maximally_mixed(4).unwrap(),
            method: Method::Linear,
            physical: true,
            log_likelihood: None,
            iterations: None,
            gradient_norm: None,
            history: vec![],
        };
        assert!((fidelity_report(&mixed, &singlet_ket()).unwrap() - 0.25).abs() < EXACT_TOL);
        let hv = ReconstructionResult {
            rho: DensityMatrix::from_ket(&Ket::basis(4, 1).unwrap()).unwrap(),
            ..mixed
        };
        assert!((fidelity_report(&hv, &singlet_ket()).unwrap() - 0.5).abs() < EXACT_TOL);
    }
}
