//! Coherence witnesses built from intervened and unintervened runs.
//!
//! A run prepares ρ, optionally applies an intervention, evolves through a
//! unitary Φ, and reads out one projective outcome b. Two interventions are
//! supported:
//!
//! - a blind measurement in the preferred basis (realized exactly as
//!   dephasing, possibly coarse-grained onto M ≤ N outcome groups), giving
//!   the witness `w = P(b) - P'(b)`;
//! - an arbitrary extra unitary U₀, giving `v = P(b) - P''(b)`.
//!
//! Basis states are fixed points of both interventions, so they serve as
//! classical controls: a value outside the control range certifies that the
//! preparation was a coherent superposition and not a mixture.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{complete_orthonormal, norm_sqr, outer, ComplexMatrix};
use crate::qudit::{
    apply_unitary, born_probability, make_superposition, OrthonormalBasis, Projector, PureState,
    QuantumState, UnitaryChannel, RENORMALIZE_BAND,
};

/// What happens between preparation and evolution on the intervened arm.
#[derive(Debug, Clone)]
pub enum Intervention {
    /// Measure-and-forget in the preferred basis. `groups` partitions the
    /// basis indices into M ≤ N outcomes; coherence survives inside a group
    /// and dies between groups. Singletons give the fully dephasing case.
    BlindMeasurement { groups: Vec<Vec<usize>> },
    /// An extra unitary channel U₀.
    Channel(UnitaryChannel),
}

impl Intervention {
    /// Fully dephasing blind measurement with one outcome per basis state.
    pub fn von_neumann(dim: usize) -> Self {
        Intervention::BlindMeasurement {
            groups: (0..dim).map(|i| vec![i]).collect(),
        }
    }

    pub fn outcome_count(&self) -> Option<usize> {
        match self {
            Intervention::BlindMeasurement { groups } => Some(groups.len()),
            Intervention::Channel(_) => None,
        }
    }
}

/// Full description of one witness experiment.
#[derive(Debug, Clone)]
pub struct WitnessConfig {
    basis: OrthonormalBasis,
    coefficients: Vec<Complex64>,
    intervention: Intervention,
    evolution: UnitaryChannel,
    outcome: Projector,
}

impl WitnessConfig {
    pub fn new(
        basis: OrthonormalBasis,
        coefficients: Vec<Complex64>,
        intervention: Intervention,
        evolution: UnitaryChannel,
        outcome: Projector,
    ) -> Result<Self> {
        let dim = basis.dim();
        if coefficients.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: coefficients.len(),
            });
        }
        let n2 = norm_sqr(&coefficients);
        if (n2 - 1.0).abs() > RENORMALIZE_BAND {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
        if evolution.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: evolution.dim(),
            });
        }
        if outcome.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: outcome.dim(),
            });
        }
        match &intervention {
            Intervention::BlindMeasurement { groups } => validate_partition(groups, dim)?,
            Intervention::Channel(u0) => {
                if u0.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: u0.dim(),
                    });
                }
            }
        }
        Ok(WitnessConfig {
            basis,
            coefficients,
            intervention,
            evolution,
            outcome,
        })
    }

    /// Blind-measurement experiment with one outcome per basis state.
    pub fn blind(
        basis: OrthonormalBasis,
        coefficients: Vec<Complex64>,
        evolution: UnitaryChannel,
        outcome: Projector,
    ) -> Result<Self> {
        let dim = basis.dim();
        WitnessConfig::new(
            basis,
            coefficients,
            Intervention::von_neumann(dim),
            evolution,
            outcome,
        )
    }

    /// Channel experiment with intervention U₀.
    pub fn channel(
        basis: OrthonormalBasis,
        coefficients: Vec<Complex64>,
        u0: UnitaryChannel,
        evolution: UnitaryChannel,
        outcome: Projector,
    ) -> Result<Self> {
        WitnessConfig::new(
            basis,
            coefficients,
            Intervention::Channel(u0),
            evolution,
            outcome,
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn intervention(&self) -> &Intervention {
        &self.intervention
    }

    pub fn evolution(&self) -> &UnitaryChannel {
        &self.evolution
    }

    pub fn outcome(&self) -> &Projector {
        &self.outcome
    }

    /// The coherent preparation under test.
    pub fn superposition(&self) -> Result<PureState> {
        make_superposition(&self.basis, &self.coefficients)
    }

    /// The two states reaching the detectors: evolution alone, and
    /// intervention followed by evolution.
    pub fn evolved_states(
        &self,
        preparation: &QuantumState,
    ) -> Result<(QuantumState, QuantumState)> {
        if preparation.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: preparation.dim(),
            });
        }
        let direct = apply_unitary(preparation, &self.evolution)?;
        let intervened = match &self.intervention {
            Intervention::BlindMeasurement { groups } => {
                apply_block_dephasing(preparation, &self.basis, groups)?
            }
            Intervention::Channel(u0) => apply_unitary(preparation, u0)?,
        };
        let after = apply_unitary(&intervened, &self.evolution)?;
        Ok((direct, after))
    }

    /// P(b) and the intervened P'(b)/P''(b) for an arbitrary preparation.
    pub fn probabilities(&self, preparation: &QuantumState) -> Result<(f64, f64)> {
        let (direct, after) = self.evolved_states(preparation)?;
        let p_b = born_probability(&direct, &self.outcome)?;
        let p_after = born_probability(&after, &self.outcome)?;
        Ok((p_b, p_after))
    }

    /// Witness value `P(b) - P_after(b)` for an arbitrary preparation.
    pub fn witness_value(&self, preparation: &QuantumState) -> Result<f64> {
        let (p_b, p_after) = self.probabilities(preparation)?;
        Ok(p_b - p_after)
    }
}

fn validate_partition(groups: &[Vec<usize>], dim: usize) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::BadPartition {
            reason: "no outcome groups".into(),
        });
    }
    let mut seen = vec![false; dim];
    for g in groups {
        if g.is_empty() {
            return Err(Error::BadPartition {
                reason: "empty outcome group".into(),
            });
        }
        for &i in g {
            if i >= dim {
                return Err(Error::BadPartition {
                    reason: format!("index {i} out of range for dimension {dim}"),
                });
            }
            if seen[i] {
                return Err(Error::BadPartition {
                    reason: format!("index {i} appears twice"),
                });
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::BadPartition {
            reason: "groups do not cover every basis index".into(),
        });
    }
    Ok(())
}

/// Dephase between outcome groups while preserving coherence inside each:
/// ρ ↦ Σ_g P_g ρ P_g with P_g the projector onto group g of `basis`.
pub fn apply_block_dephasing(
    state: &QuantumState,
    basis: &OrthonormalBasis,
    groups: &[Vec<usize>],
) -> Result<QuantumState> {
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            actual: basis.dim(),
        });
    }
    validate_partition(groups, basis.dim())?;
    let dim = state.dim();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for g in groups {
        let mut proj = ComplexMatrix::zeros(dim, dim);
        for &i in g {
            let amps = basis.state(i).amplitudes();
            proj = proj.add(&outer(amps, amps))?;
        }
        rho = rho.add(&proj.mul(state.rho())?.mul(&proj)?)?;
    }
    QuantumState::new(rho)
}

/// Everything one experiment tells you: the witness for each basis-state
/// control, the witness for the superposition, and how far the latter falls
/// outside the control range.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub control_values: Vec<f64>,
    pub superposition_value: f64,
    pub p_b: f64,
    pub p_after: f64,
    pub violation_margin: f64,
    pub lower_margin: f64,
    pub violated: bool,
}

/// Witness of the blind-measurement family; the configured intervention must
/// be a blind measurement.
pub fn compute_witness_w(config: &WitnessConfig, preparation: &QuantumState) -> Result<f64> {
    match config.intervention() {
        Intervention::BlindMeasurement { .. } => config.witness_value(preparation),
        Intervention::Channel(_) => Err(Error::InvalidArgument(
            "witness w requires a blind-measurement intervention".into(),
        )),
    }
}

/// Witness of the channel family; the configured intervention must be a
/// unitary channel.
pub fn compute_witness_v(config: &WitnessConfig, preparation: &QuantumState) -> Result<f64> {
    match config.intervention() {
        Intervention::Channel(_) => config.witness_value(preparation),
        Intervention::BlindMeasurement { .. } => Err(Error::InvalidArgument(
            "witness v requires a channel intervention".into(),
        )),
    }
}

/// Closed form for a pure preparation when the outcome projects onto the
/// evolved preparation itself: v = 1 - |⟨ψ|U₀|ψ⟩|².
pub fn analytic_v(preparation: &PureState, u0: &UnitaryChannel) -> Result<f64> {
    if preparation.dim() != u0.dim() {
        return Err(Error::DimensionMismatch {
            expected: preparation.dim(),
            actual: u0.dim(),
        });
    }
    let rotated = u0.apply_to_vector(preparation)?;
    Ok(1.0 - preparation.inner(&rotated).norm_sqr())
}

/// Run the configured superposition and all basis-state controls.
pub fn full_report(config: &WitnessConfig) -> Result<WitnessReport> {
    let sup = QuantumState::from_pure(&config.superposition()?);
    let (p_b, p_after) = config.probabilities(&sup)?;
    let superposition_value = p_b - p_after;
    let mut control_values = Vec::with_capacity(config.dim());
    for i in 0..config.dim() {
        let prep = QuantumState::from_pure(config.basis().state(i));
        control_values.push(config.witness_value(&prep)?);
    }
    let max_c = control_values.iter().cloned().fold(f64::MIN, f64::max);
    let min_c = control_values.iter().cloned().fold(f64::MAX, f64::min);
    let violation_margin = superposition_value - max_c;
    let lower_margin = min_c - superposition_value;
    // strict inequality: sitting exactly on the control range is no violation
    let violated = superposition_value > max_c || superposition_value < min_c;
    Ok(WitnessReport {
        control_values,
        superposition_value,
        p_b,
        p_after,
        violation_margin,
        lower_margin,
        violated,
    })
}

/// Largest witness value a blind measurement with `m` outcomes can produce.
pub fn theoretical_wmax(m: usize) -> f64 {
    assert!(m >= 1, "outcome count must be positive");
    1.0 - 1.0 / m as f64
}

/// A ready-made experiment in dimension `dim` together with its predicted
/// witness values.
#[derive(Debug, Clone)]
pub struct OptimalConfigSpec {
    pub dim: usize,
    pub coefficients: Vec<Complex64>,
    pub u0: UnitaryChannel,
    pub evolution: UnitaryChannel,
    pub outcome: Projector,
    pub predicted_w: f64,
    pub predicted_v: f64,
}

impl OptimalConfigSpec {
    /// The blind-measurement experiment this configuration describes.
    pub fn blind_config(&self) -> WitnessConfig {
        WitnessConfig::blind(
            OrthonormalBasis::computational(self.dim),
            self.coefficients.clone(),
            self.evolution.clone(),
            self.outcome.clone(),
        )
        .expect("construction validated")
    }

    /// The channel experiment this configuration describes.
    pub fn channel_config(&self) -> WitnessConfig {
        WitnessConfig::channel(
            OrthonormalBasis::computational(self.dim),
            self.coefficients.clone(),
            self.u0.clone(),
            self.evolution.clone(),
            self.outcome.clone(),
        )
        .expect("construction validated")
    }
}

/// Configuration that saturates both witnesses in dimension `n`: an equal
/// superposition, intervention phases at the n-th roots of unity, and an
/// evolution that maps the superposition onto the last basis state.
pub fn optimal_config(n: usize) -> Result<OptimalConfigSpec> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: n });
    }
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let coefficients = vec![amp; n];

    let phases: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let u0 = UnitaryChannel::from_phases(&phases)?;

    // complete the superposition to a unitary, then move its row to the
    // bottom so that evolution sends the superposition to |n-1⟩
    let completed = complete_orthonormal(&coefficients)?; // columns: [ψ_σ, w₁, …]
    let mut rows = Vec::with_capacity(n);
    for j in 1..n {
        rows.push(
            completed
                .column(j)
                .iter()
                .map(Complex64::conj)
                .collect::<Vec<_>>(),
        );
    }
    rows.push(coefficients.iter().map(Complex64::conj).collect());
    let evolution = UnitaryChannel::new(ComplexMatrix::from_rows(&rows)?)?;
    let outcome = Projector::onto_basis_state(n, n - 1);

    Ok(OptimalConfigSpec {
        dim: n,
        coefficients,
        u0,
        evolution,
        outcome,
        predicted_w: 1.0 - 1.0 / n as f64,
        predicted_v: 1.0,
    })
}

/// The qubit experiment with the published settings: superposition
/// (|0⟩-|1⟩)/√2, phase flip intervention, symmetric mixer evolution, outcome
/// on |1⟩.
pub fn paper_qubit() -> OptimalConfigSpec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64| Complex64::new(re, 0.0);
    let u0 = UnitaryChannel::from_phases(&[c(1.0), c(-1.0)]).expect("phases");
    let evolution = UnitaryChannel::new(
        ComplexMatrix::from_rows(&[vec![c(s), c(s)], vec![c(s), c(-s)]]).expect("2x2"),
    )
    .expect("unitary");
    OptimalConfigSpec {
        dim: 2,
        coefficients: vec![c(s), c(-s)],
        u0,
        evolution,
        outcome: Projector::onto_basis_state(2, 1),
        predicted_w: 0.5,
        predicted_v: 1.0,
    }
}

/// The qutrit experiment with the published settings: superposition
/// (|0⟩-|1⟩+|2⟩)/√3, cube-root-of-unity phases, a real three-mode mixer, and
/// outcome on |2⟩.
pub fn paper_qutrit() -> OptimalConfigSpec {
    let c = |re: f64| Complex64::new(re, 0.0);
    let s3 = 1.0 / 3f64.sqrt();
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let u0 = UnitaryChannel::from_phases(&[Complex64::ONE, w, w * w]).expect("phases");
    let a = (2.0f64 / 3.0).sqrt();
    let b = 6f64.sqrt() / 6.0;
    let d = 2f64.sqrt() / 2.0;
    let evolution = UnitaryChannel::new(
        ComplexMatrix::from_rows(&[
            vec![c(a), c(b), c(-b)],
            vec![c(0.0), c(d), c(d)],
            vec![c(s3), c(-s3), c(s3)],
        ])
        .expect("3x3"),
    )
    .expect("unitary");
    OptimalConfigSpec {
        dim: 3,
        coefficients: vec![c(s3), c(-s3), c(s3)],
        u0,
        evolution,
        outcome: Projector::onto_basis_state(3, 2),
        predicted_w: 2.0 / 3.0,
        predicted_v: 1.0,
    }
}

/// Look up a named built-in configuration.
pub fn builtin(name: &str) -> Option<OptimalConfigSpec> {
    match name {
        "paper-qubit" => Some(paper_qubit()),
        "paper-qutrit" => Some(paper_qutrit()),
        _ => None,
    }
}

pub const BUILTIN_NAMES: &[&str] = &["paper-qubit", "paper-qutrit"];

/// Sum of the witness over all basis-state controls. Trace preservation of
/// the intervention forces this to vanish, which makes it a useful
/// consistency probe for both witness families.
pub fn control_sum(config: &WitnessConfig) -> Result<f64> {
    let mut sum = 0.0;
    for i in 0..config.dim() {
        let prep = QuantumState::from_pure(config.basis().state(i));
        sum += config.witness_value(&prep)?;
    }
    Ok(sum)
}
