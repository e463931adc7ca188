//! Translation of a two-level factorization into a polarization/path
//! interferometer.
//!
//! States are encoded two per spatial mode in the H and V polarizations of
//! one beam. A beam displacer shifts every H component one mode to the
//! right while V stays put, so a displacer followed by waveplates realizes
//! one layer of two-level rotations: for rotation (i,j) the "host" state i
//! waits in V at its fixed working mode while the "guest" state j rides H
//! displacer by displacer until the meeting, after which the guest parks and
//! becomes a host itself. Half-wave plates at 45° swap a mode's H and V to
//! reseat states between displacements.
//!
//! With working mode p_i = rails + dim - i, rotation (i,j) fires in layer
//! 2·dim - i - j and every layer's rotations sit at distinct modes, which
//! yields exactly 2·dim - 4 displacers for even dim and 2·dim - 3 for odd
//! dim (none for dim = 2). Output states leave ordered opposite to the
//! input for dim > 2.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::reck::DecompositionPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    H,
    V,
}

impl std::fmt::Display for Pol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pol::H => write!(f, "H"),
            Pol::V => write!(f, "V"),
        }
    }
}

/// One polarization component of one spatial mode; modes are one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub mode: usize,
    pub pol: Pol,
}

#[derive(Debug, Clone)]
pub enum LayoutElement {
    /// Arbitrary 2x2 unitary on (H, V) of one mode; `block[0][..]` is the H
    /// row.
    WavePlateSet {
        mode: usize,
        block: [[Complex64; 2]; 2],
    },
    /// Swap H and V of one mode.
    HalfWavePlate45 { mode: usize },
    /// Shift the H component of every mode one step right.
    BeamDisplacer,
    /// Birefringent delay on one mode, in millimetres of quartz.
    QuartzCrystal { mode: usize, thickness_mm: f64 },
}

#[derive(Debug, Clone)]
pub struct OpticalLayout {
    pub dim: usize,
    /// Number of occupied input modes.
    pub rails: usize,
    /// Input slot of each basis state (index = state).
    pub encoding: Vec<Slot>,
    /// Final slot of each basis state.
    pub output: Vec<Slot>,
    /// Output modes carry the states in reverse order relative to the input.
    pub labels_reversed: bool,
    pub elements: Vec<LayoutElement>,
    pub bd_count: usize,
}

impl OpticalLayout {
    /// Propagate the element sequence over the slot space and restrict to
    /// the encoded input and output slots. For a layout emitted from a
    /// factorization of U this reproduces U. Quartz crystals act as the
    /// identity here: they delay, they do not mix slots.
    pub fn transfer_matrix(&self) -> Result<ComplexMatrix> {
        let window = self.rails + self.dim + 2;
        let nslots = 2 * window;
        let slot_index = |s: &Slot| 2 * (s.mode - 1) + if s.pol == Pol::H { 0 } else { 1 };
        let mut total = ComplexMatrix::identity(nslots);
        for el in &self.elements {
            let mut op = ComplexMatrix::identity(nslots);
            match el {
                LayoutElement::WavePlateSet { mode, block } => {
                    let h = 2 * (mode - 1);
                    let v = h + 1;
                    op.set(h, h, block[0][0]);
                    op.set(h, v, block[0][1]);
                    op.set(v, h, block[1][0]);
                    op.set(v, v, block[1][1]);
                }
                LayoutElement::HalfWavePlate45 { mode } => {
                    let h = 2 * (mode - 1);
                    let v = h + 1;
                    op.set(h, h, Complex64::new(0.0, 0.0));
                    op.set(v, v, Complex64::new(0.0, 0.0));
                    op.set(h, v, Complex64::new(1.0, 0.0));
                    op.set(v, h, Complex64::new(1.0, 0.0));
                }
                LayoutElement::BeamDisplacer => {
                    for m in 0..window {
                        let h = 2 * m;
                        op.set(h, h, Complex64::new(0.0, 0.0));
                        if m + 1 < window {
                            op.set(2 * (m + 1), h, Complex64::new(1.0, 0.0));
                        }
                    }
                }
                LayoutElement::QuartzCrystal { .. } => {}
            }
            total = op.mul(&total)?;
        }
        let mut u = ComplexMatrix::zeros(self.dim, self.dim);
        for col in 0..self.dim {
            for row in 0..self.dim {
                u.set(
                    row,
                    col,
                    total.get(
                        slot_index(&self.output[row]),
                        slot_index(&self.encoding[col]),
                    ),
                );
            }
        }
        Ok(u)
    }

    /// Human-readable schematic, one element per line.
    pub fn to_text(&self) -> String {
        let fmt_c = |z: Complex64| format!("{:+.4}{:+.4}i", z.re, z.im);
        let fmt_slots = |slots: &[Slot]| {
            slots
                .iter()
                .enumerate()
                .map(|(i, s)| format!("{}={}{}", i + 1, s.pol, s.mode))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dim {} on {} input rails, {} beam displacers{}",
            self.dim,
            self.rails,
            self.bd_count,
            if self.labels_reversed {
                ", output order reversed"
            } else {
                ""
            }
        );
        let _ = writeln!(out, "in:  {}", fmt_slots(&self.encoding));
        let _ = writeln!(out, "out: {}", fmt_slots(&self.output));
        for (idx, el) in self.elements.iter().enumerate() {
            let line = match el {
                LayoutElement::WavePlateSet { mode, block } => format!(
                    "waveplates @{mode} [{} {}; {} {}]",
                    fmt_c(block[0][0]),
                    fmt_c(block[0][1]),
                    fmt_c(block[1][0]),
                    fmt_c(block[1][1])
                ),
                LayoutElement::HalfWavePlate45 { mode } => format!("hwp45 @{mode}"),
                LayoutElement::BeamDisplacer => "displacer >>".to_string(),
                LayoutElement::QuartzCrystal { mode, thickness_mm } => {
                    format!("quartz @{mode} {thickness_mm:.4} mm")
                }
            };
            let _ = writeln!(out, "{:3}| {line}", idx + 1);
        }
        out
    }
}

/// Input slot of every basis state: states fill rails pairwise, and for odd
/// dim state 1 takes a lone H rail on the left.
fn input_encoding(dim: usize) -> Vec<Slot> {
    let rails = dim.div_ceil(2);
    let mut enc = vec![
        Slot {
            mode: 0,
            pol: Pol::H,
        };
        dim
    ];
    if dim % 2 == 0 {
        for m in 1..=rails {
            enc[2 * m - 2] = Slot {
                mode: m,
                pol: Pol::H,
            };
            enc[2 * m - 1] = Slot {
                mode: m,
                pol: Pol::V,
            };
        }
    } else {
        enc[0] = Slot {
            mode: 1,
            pol: Pol::H,
        };
        for m in 2..=rails {
            enc[2 * m - 3] = Slot {
                mode: m,
                pol: Pol::H,
            };
            enc[2 * m - 2] = Slot {
                mode: m,
                pol: Pol::V,
            };
        }
    }
    enc
}

/// Choreograph a factorization into an ordered element sequence.
///
/// Between layers exactly one displacer fires; half-wave plates reseat
/// states so that everything due at the next layer rides H and everything
/// else waits in V. A final diagonal waveplate layer applies the output
/// phases of the plan.
pub fn emit_layout(plan: &DecompositionPlan) -> Result<OpticalLayout> {
    let dim = plan.dim();
    if dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: dim });
    }
    let rails = dim.div_ceil(2);
    let p = |i: usize| rails + dim - i; // working mode of host i
    let encoding = input_encoding(dim);

    // guest appointments per state: (layer, mode), layer-ascending
    let appointments: Vec<Vec<(usize, usize)>> = (1..=dim)
        .map(|x| {
            ((x + 1)..=dim)
                .rev()
                .map(|i| (2 * dim - i - x, p(i)))
                .collect()
        })
        .collect();

    let total_layers = plan.layer_count();
    let transitions = if dim == 2 {
        0
    } else if dim % 2 == 0 {
        total_layers - 1
    } else {
        total_layers
    };
    let merges = |x: usize| {
        if dim % 2 == 0 {
            x % 2 == 0 && x >= 4
        } else {
            x % 2 == 1 && x >= 3
        }
    };

    let mut mode: Vec<usize> = encoding.iter().map(|s| s.mode).collect();
    let mut pol: Vec<Pol> = encoding.iter().map(|s| s.pol).collect();
    let mut next_appt = vec![0usize; dim];
    let mut arrived = vec![false; dim]; // host reached its working mode
    arrived[dim - 1] = true; // state dim starts parked at p(dim) = rails

    let mut elements: Vec<LayoutElement> = Vec::new();
    let mut bd_count = 0usize;
    let layers = plan.layers();
    let rotations = plan.rotations();

    for layer in 1..=total_layers {
        for &ri in &layers[layer - 1] {
            let rot = &rotations[ri];
            let m = p(rot.i);
            assert_eq!(mode[rot.i - 1], m, "host {} off its working mode", rot.i);
            assert_eq!(pol[rot.i - 1], Pol::V, "host {} not parked in V", rot.i);
            assert_eq!(mode[rot.j - 1], m, "guest {} missed layer {layer}", rot.j);
            assert_eq!(pol[rot.j - 1], Pol::H, "guest {} not riding H", rot.j);
            let g = &rot.block;
            // the photon traverses the inverse factorization, so each set of
            // plates realizes the conjugate transpose of the stored block,
            // expressed on (H, V) = (guest j, host i)
            let block = [
                [g[0][0].conj(), g[1][0].conj()],
                [g[0][1].conj(), g[1][1].conj()],
            ];
            elements.push(LayoutElement::WavePlateSet { mode: m, block });
            next_appt[rot.j - 1] += 1;
        }
        let k = layer;
        if k > transitions {
            continue;
        }

        // who must ride this displacer
        let mut mover = vec![false; dim];
        for x in 1..=dim {
            let xi = x - 1;
            if next_appt[xi] < appointments[xi].len() {
                let (l_star, m_star) = appointments[xi][next_appt[xi]];
                let dist = m_star as i64 - mode[xi] as i64;
                let slack = l_star as i64 - k as i64;
                assert!(
                    dist >= 0 && dist <= slack,
                    "state {x} cannot reach mode {m_star} by layer {l_star}"
                );
                mover[xi] = dist >= slack;
            } else if x >= 2 && x < dim && !arrived[xi] {
                // one step past the last meeting onto the own working mode
                assert_eq!(k, 2 * dim - 2 * x - 1);
                mover[xi] = true;
                arrived[xi] = true;
            } else if k == transitions && merges(x) {
                mover[xi] = true;
            } else if k == transitions && x == 1 && dim % 2 == 1 {
                mover[xi] = true; // lone state steps clear of the merge
            }
        }

        // when two waiting states share a mode, someone still holds H and
        // will be dragged along; give H to whichever moves again soonest
        let next_move_time = |xi: usize| -> usize {
            let x = xi + 1;
            if next_appt[xi] < appointments[xi].len() {
                let (l_star, m_star) = appointments[xi][next_appt[xi]];
                l_star - (m_star - mode[xi])
            } else if x >= 2 && x < dim && !arrived[xi] {
                2 * dim - 2 * x - 1
            } else if merges(x) || (x == 1 && dim % 2 == 1) {
                transitions
            } else {
                usize::MAX
            }
        };

        let window = rails + dim + 2;
        let mut occupants: Vec<Vec<usize>> = vec![Vec::new(); window + 1];
        for xi in 0..dim {
            occupants[mode[xi]].push(xi);
        }
        let mut swap_modes = Vec::new();
        for m in 1..=window {
            let occ = &occupants[m];
            match occ.len() {
                0 => {}
                1 => {
                    let xi = occ[0];
                    let want = if mover[xi] { Pol::H } else { Pol::V };
                    if pol[xi] != want {
                        pol[xi] = want;
                        swap_modes.push(m);
                    }
                }
                2 => {
                    let (a, b) = (occ[0], occ[1]);
                    assert!(
                        !(mover[a] && mover[b]),
                        "two states moving out of mode {m} at once"
                    );
                    let h_seat = if mover[a] || mover[b] {
                        if mover[a] {
                            a
                        } else {
                            b
                        }
                    } else {
                        // both waiting: bump the earlier mover a step ahead
                        let (ta, tb) = (next_move_time(a), next_move_time(b));
                        assert_ne!(ta, tb, "cannot arbitrate mode {m}");
                        if ta < tb {
                            a
                        } else {
                            b
                        }
                    };
                    let v_seat = if h_seat == a { b } else { a };
                    if pol[h_seat] != Pol::H {
                        assert_eq!(pol[v_seat], Pol::H);
                        pol[h_seat] = Pol::H;
                        pol[v_seat] = Pol::V;
                        swap_modes.push(m);
                    }
                }
                _ => unreachable!("three states in mode {m}"),
            }
        }
        for m in swap_modes {
            elements.push(LayoutElement::HalfWavePlate45 { mode: m });
        }
        elements.push(LayoutElement::BeamDisplacer);
        bd_count += 1;
        for xi in 0..dim {
            if pol[xi] == Pol::H {
                mode[xi] += 1;
            }
        }
        for m in 1..=window {
            let here: Vec<usize> = (0..dim).filter(|&xi| mode[xi] == m).collect();
            assert!(here.len() <= 2, "mode {m} overfull after displacer");
            if here.len() == 2 {
                assert_ne!(pol[here[0]], pol[here[1]], "collision in mode {m}");
            }
        }
    }

    // output phases, one diagonal plate per occupied mode that needs one
    let phases = plan.phases();
    let window = rails + dim + 2;
    for m in 1..=window {
        let mut d = [Complex64::new(1.0, 0.0); 2];
        let mut needed = false;
        for xi in 0..dim {
            if mode[xi] == m {
                let ph = phases[xi].conj();
                d[if pol[xi] == Pol::H { 0 } else { 1 }] = ph;
                if (ph - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                    needed = true;
                }
            }
        }
        if needed {
            elements.push(LayoutElement::WavePlateSet {
                mode: m,
                block: [
                    [d[0], Complex64::new(0.0, 0.0)],
                    [Complex64::new(0.0, 0.0), d[1]],
                ],
            });
        }
    }

    let output: Vec<Slot> = (0..dim)
        .map(|xi| Slot {
            mode: mode[xi],
            pol: pol[xi],
        })
        .collect();
    Ok(OpticalLayout {
        dim,
        rails,
        encoding,
        output,
        labels_reversed: dim > 2,
        elements,
        bd_count,
    })
}

/// Source coherence data fixing how much quartz a blind-measurement stage
/// needs: a delay is complete once it exceeds the coherence length λ²/Δλ
/// divided by the group birefringence of the crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceSpec {
    pub wavelength_nm: f64,
    pub bandwidth_nm: f64,
    pub birefringence: f64,
}

impl Default for CoherenceSpec {
    fn default() -> Self {
        CoherenceSpec {
            wavelength_nm: 801.6,
            bandwidth_nm: 3.0,
            birefringence: 0.00894,
        }
    }
}

impl CoherenceSpec {
    pub fn new(wavelength_nm: f64, bandwidth_nm: f64, birefringence: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(wavelength_nm) || !ok(bandwidth_nm) || !ok(birefringence) {
            return Err(Error::InvalidArgument(
                "wavelength, bandwidth and birefringence must be positive and finite".into(),
            ));
        }
        if bandwidth_nm > wavelength_nm {
            return Err(Error::InvalidArgument(
                "bandwidth cannot exceed the central wavelength".into(),
            ));
        }
        Ok(CoherenceSpec {
            wavelength_nm,
            bandwidth_nm,
            birefringence,
        })
    }

    /// Minimum quartz thickness, in mm, that walks two polarizations out of
    /// coherence: (λ²/Δλ) / Δn.
    pub fn min_quartz_thickness(&self) -> f64 {
        (self.wavelength_nm * self.wavelength_nm / self.bandwidth_nm) / self.birefringence * 1e-6
    }
}

/// Delay-lane stage realizing a blind measurement on `dim` single-rail
/// states: state x+1 passes x units of quartz, so every pair of states is
/// walked apart by at least one coherence length. `base_thickness_mm`
/// overrides the per-unit thickness and must not fall below the coherence
/// budget of `spec`.
pub fn blind_measurement_layout(
    dim: usize,
    spec: &CoherenceSpec,
    base_thickness_mm: Option<f64>,
) -> Result<OpticalLayout> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, actual: dim });
    }
    let min = spec.min_quartz_thickness();
    let unit = match base_thickness_mm {
        Some(t) => {
            if !t.is_finite() || t + 1e-12 < min {
                return Err(Error::InvalidArgument(format!(
                    "base thickness {t} mm is below the {min:.4} mm needed to break coherence"
                )));
            }
            t
        }
        None => min,
    };
    let slots: Vec<Slot> = (1..=dim)
        .map(|m| Slot {
            mode: m,
            pol: Pol::H,
        })
        .collect();
    let elements: Vec<LayoutElement> = (1..dim)
        .map(|k| LayoutElement::QuartzCrystal {
            mode: k + 1,
            thickness_mm: k as f64 * unit,
        })
        .collect();
    Ok(OpticalLayout {
        dim,
        rails: dim,
        encoding: slots.clone(),
        output: slots,
        labels_reversed: false,
        elements,
        bd_count: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{random_unitary, UnitaryChannel};
    use crate::reck::decompose;
    use crate::witness::{paper_qubit, paper_qutrit};

    fn layout_of(u: &UnitaryChannel) -> OpticalLayout {
        emit_layout(&decompose(u).unwrap()).unwrap()
    }

    #[test]
    fn displacer_counts_follow_parity() {
        for dim in 2..=9 {
            let layout = layout_of(&random_unitary(dim, 50 + dim as u64).unwrap());
            let expected = match dim {
                2 => 0,
                d if d % 2 == 0 => 2 * d - 4,
                d => 2 * d - 3,
            };
            assert_eq!(layout.bd_count, expected, "dim {dim}");
            let counted = layout
                .elements
                .iter()
                .filter(|e| matches!(e, LayoutElement::BeamDisplacer))
                .count();
            assert_eq!(counted, expected);
        }
    }

    #[test]
    fn input_encoding_packs_rails_pairwise() {
        let enc = input_encoding(4);
        assert_eq!(enc[0], Slot { mode: 1, pol: Pol::H });
        assert_eq!(enc[1], Slot { mode: 1, pol: Pol::V });
        assert_eq!(enc[2], Slot { mode: 2, pol: Pol::H });
        assert_eq!(enc[3], Slot { mode: 2, pol: Pol::V });
        let enc = input_encoding(5);
        assert_eq!(enc[0], Slot { mode: 1, pol: Pol::H });
        assert_eq!(enc[1], Slot { mode: 2, pol: Pol::H });
        assert_eq!(enc[2], Slot { mode: 2, pol: Pol::V });
        assert_eq!(enc[3], Slot { mode: 3, pol: Pol::H });
        assert_eq!(enc[4], Slot { mode: 3, pol: Pol::V });
    }

    #[test]
    fn qutrit_layout_lands_on_known_slots() {
        let layout = layout_of(&paper_qutrit().evolution);
        assert_eq!(layout.output[0], Slot { mode: 4, pol: Pol::H });
        assert_eq!(layout.output[1], Slot { mode: 3, pol: Pol::V });
        assert_eq!(layout.output[2], Slot { mode: 3, pol: Pol::H });
        assert!(layout.labels_reversed);
        assert_eq!(layout.bd_count, 3);
    }

    #[test]
    fn four_mode_layout_lands_on_known_slots() {
        let layout = layout_of(&random_unitary(4, 4).unwrap());
        assert_eq!(layout.output[0], Slot { mode: 4, pol: Pol::H });
        assert_eq!(layout.output[1], Slot { mode: 4, pol: Pol::V });
        assert_eq!(layout.output[2], Slot { mode: 3, pol: Pol::V });
        assert_eq!(layout.output[3], Slot { mode: 3, pol: Pol::H });
    }

    #[test]
    fn qubit_layout_is_plates_only() {
        let layout = layout_of(&paper_qubit().evolution);
        assert_eq!(layout.bd_count, 0);
        assert!(!layout.labels_reversed);
        assert!(layout
            .elements
            .iter()
            .all(|e| matches!(e, LayoutElement::WavePlateSet { .. })));
    }

    #[test]
    fn transfer_matrix_reproduces_the_compiled_unitary() {
        let mut cases: Vec<UnitaryChannel> = vec![
            paper_qubit().evolution,
            paper_qutrit().evolution,
            UnitaryChannel::identity(5),
        ];
        for dim in 2..=7 {
            for seed in 0..3u64 {
                cases.push(random_unitary(dim, 10 * dim as u64 + seed).unwrap());
            }
        }
        for u in &cases {
            let layout = layout_of(u);
            let got = layout.transfer_matrix().unwrap();
            let err = got.max_abs_diff(u.matrix());
            assert!(err < 1e-12, "dim {} err {err:e}", u.dim());
            for col in 0..u.dim() {
                let norm: f64 = (0..u.dim()).map(|r| got.get(r, col).norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12, "leakage in column {col}");
            }
        }
    }

    #[test]
    fn rotation_plate_count_matches_factorization() {
        for dim in 2..=7 {
            let layout = layout_of(&random_unitary(dim, 600 + dim as u64).unwrap());
            let plates = layout
                .elements
                .iter()
                .filter(|e| matches!(e, LayoutElement::WavePlateSet { .. }))
                .count();
            let mesh = dim * (dim - 1) / 2;
            assert!(plates >= mesh, "dim {dim}");
            // at most one extra phase plate per occupied output mode
            assert!(plates <= mesh + dim.div_ceil(2) + 1, "dim {dim}");
        }
    }

    #[test]
    fn text_schematic_mentions_every_element() {
        let layout = layout_of(&paper_qutrit().evolution);
        let text = layout.to_text();
        assert!(text.contains("dim 3"));
        assert!(text.contains("displacer"));
        assert!(text.contains("waveplates @2"));
        assert!(text.lines().count() >= layout.elements.len() + 3);
    }

    #[test]
    fn default_coherence_budget_is_about_24_mm() {
        let spec = CoherenceSpec::default();
        assert!((spec.min_quartz_thickness() - 23.9583355704698).abs() < 1e-9);
    }

    #[test]
    fn thickness_scales_with_coherence_length_and_birefringence() {
        let unit_dn = CoherenceSpec::new(801.6, 3.0, 1.0).unwrap();
        assert!((unit_dn.min_quartz_thickness() - 0.21418752).abs() < 1e-12);
        let degenerate = CoherenceSpec::new(801.6, 801.6, 1.0).unwrap();
        assert!((degenerate.min_quartz_thickness() - 0.0008016).abs() < 1e-15);
    }

    #[test]
    fn coherence_spec_rejects_nonphysical_inputs() {
        assert!(CoherenceSpec::new(0.0, 3.0, 0.01).is_err());
        assert!(CoherenceSpec::new(800.0, -1.0, 0.01).is_err());
        assert!(CoherenceSpec::new(800.0, 3.0, 0.0).is_err());
        assert!(CoherenceSpec::new(800.0, 900.0, 0.01).is_err());
    }

    #[test]
    fn blind_stage_stacks_quartz_linearly() {
        let spec = CoherenceSpec::default();
        let layout = blind_measurement_layout(3, &spec, Some(28.77)).unwrap();
        assert_eq!(layout.bd_count, 0);
        let crystals: Vec<(usize, f64)> = layout
            .elements
            .iter()
            .filter_map(|e| match e {
                LayoutElement::QuartzCrystal { mode, thickness_mm } => {
                    Some((*mode, *thickness_mm))
                }
                _ => None,
            })
            .collect();
        assert_eq!(crystals.len(), 2);
        assert_eq!(crystals[0].0, 2);
        assert!((crystals[0].1 - 28.77).abs() < 1e-12);
        assert_eq!(crystals[1].0, 3);
        assert!((crystals[1].1 - 57.54).abs() < 1e-12);
    }

    #[test]
    fn blind_stage_defaults_to_the_coherence_budget() {
        let spec = CoherenceSpec::default();
        let layout = blind_measurement_layout(2, &spec, None).unwrap();
        match layout.elements[0] {
            LayoutElement::QuartzCrystal { thickness_mm, .. } => {
                assert!((thickness_mm - spec.min_quartz_thickness()).abs() < 1e-12)
            }
            _ => panic!("expected quartz"),
        }
    }

    #[test]
    fn blind_stage_rejects_thin_quartz() {
        let spec = CoherenceSpec::default();
        assert!(blind_measurement_layout(3, &spec, Some(10.0)).is_err());
        assert!(blind_measurement_layout(1, &spec, None).is_err());
    }

    #[test]
    fn larger_meshes_still_choreograph() {
        for dim in 10..=12 {
            let u = random_unitary(dim, 7000 + dim as u64).unwrap();
            let layout = layout_of(&u);
            let err = layout.transfer_matrix().unwrap().max_abs_diff(u.matrix());
            assert!(err < 1e-11, "dim {dim} err {err:e}");
        }
    }
}
