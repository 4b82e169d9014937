//! Consistency diagnostics for the symmetric geodesic operators.
//!
//! Each diagnostic measures, as an RMS vertex distance, how far a property
//! that would hold exactly for true Riemannian midpoints and geodesic
//! symmetries is violated by the numerical operators:
//!
//! * **midpoint distance** — `midpoint(T, S)` vs `midpoint(S, T)`;
//! * **centrality** — reflecting `T` through `midpoint(T, S)` should give `S`;
//! * **involutivity** — a symmetry applied twice should be the identity;
//! * **transvectivity** — reflecting through the midpoint then through the
//!   segment's start should equal transporting the other way around;
//! * **inverse consistency** — composing the registrations `T → S` and
//!   `S → T` should be the identity.
//!
//! [`run_suite`] evaluates all of them over a population of subjects across a
//! grid of regularization weights and both operator variants, sharing the
//! underlying registrations within each cell, and never aborts on a single
//! failed cell.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geodesics::shoot_with_points;
use crate::kernel::PointSet;
use crate::mesh::Mesh;
use crate::registration::{register, RegistrationConfig, RegistrationResult};
use crate::symmetric_ops::{midpoint, midpoint_from_registration, symmetry, Variant};

/// Root-mean-square distance between corresponding vertices.
pub fn shape_rms<const D: usize>(a: &Mesh<D>, b: &Mesh<D>) -> Result<f64> {
    if a.vertex_count() != b.vertex_count() {
        return Err(Error::ShapeMismatch {
            expected: a.vertex_count(),
            found: b.vertex_count(),
        });
    }
    let mut acc = 0.0;
    for (p, q) in a.vertices().iter().zip(b.vertices()) {
        acc += crate::geom::sq_dist(*p, *q);
    }
    Ok((acc / a.vertex_count() as f64).sqrt())
}

/// RMS distance between `midpoint(template, subject)` and
/// `midpoint(subject, template)`.
pub fn midpoint_distance_error<const D: usize>(
    template: &Mesh<D>,
    subject: &Mesh<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<f64> {
    let (m_ts, _) = midpoint(template, subject, cfg, variant)?;
    let (m_st, _) = midpoint(subject, template, cfg, variant)?;
    shape_rms(&m_ts, &m_st)
}

/// RMS distance between `symmetry(midpoint(template, subject), template)` and
/// `subject`: the midpoint should be the center of the segment.
pub fn centrality_error<const D: usize>(
    template: &Mesh<D>,
    subject: &Mesh<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<f64> {
    let (m, _) = midpoint(template, subject, cfg, variant)?;
    let reflected = symmetry(&m, template, cfg, variant)?;
    shape_rms(&reflected.result, subject)
}

/// RMS distance between a double reflection of `probe` through
/// `midpoint(template, subject)` and `probe` itself.
pub fn involutivity_error<const D: usize>(
    template: &Mesh<D>,
    subject: &Mesh<D>,
    probe: &Mesh<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<f64> {
    let (m, _) = midpoint(template, subject, cfg, variant)?;
    let once = symmetry(&m, probe, cfg, variant)?;
    let twice = symmetry(&m, &once.result, cfg, variant)?;
    shape_rms(&twice.result, probe)
}

/// RMS distance between the two transport routes of `probe` along the
/// segment: `s_template(s_midpoint(probe))` vs `s_midpoint(s_subject(probe))`.
pub fn transvectivity_error<const D: usize>(
    template: &Mesh<D>,
    subject: &Mesh<D>,
    probe: &Mesh<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<f64> {
    let (m, _) = midpoint(template, subject, cfg, variant)?;
    let via_mid = symmetry(&m, probe, cfg, variant)?;
    let left = symmetry(template, &via_mid.result, cfg, variant)?;
    let via_subj = symmetry(subject, probe, cfg, variant)?;
    let right = symmetry(&m, &via_subj.result, cfg, variant)?;
    shape_rms(&left.result, &right.result)
}

/// Flows `shape`'s vertices through the registered deformation (no residual
/// correction).
fn apply_registration<const D: usize>(
    shape: &Mesh<D>,
    reg: &RegistrationResult<D>,
    cfg: &RegistrationConfig,
) -> Result<Mesh<D>> {
    let x0 = PointSet::new(shape.vertices().to_vec())?;
    let traj = shoot_with_points(&reg.system, &x0, cfg.n_steps, 1.0, cfg.scheme)?;
    shape.with_vertices(traj.final_points().expect("points were attached").to_vec())
}

/// RMS distance between `ψ(φ(template))` and `template`, where `φ` registers
/// `template → subject` and `ψ` registers `subject → template`. Residual
/// corrections are not applied, so this isolates the raw deformations.
pub fn inverse_consistency_error<const D: usize>(
    template: &Mesh<D>,
    subject: &Mesh<D>,
    cfg: &RegistrationConfig,
) -> Result<f64> {
    let fwd = register(template, subject, cfg)?;
    let bwd = register(subject, template, cfg)?;
    let round_trip = apply_registration(&fwd.deformed, &bwd, cfg)?;
    shape_rms(&round_trip, template)
}

/// All diagnostics for one (subject, regularization, variant) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellValues {
    pub midpoint_distance: f64,
    pub centrality: f64,
    pub involutivity: f64,
    pub transvectivity: f64,
    /// Independent of the operator variant; repeated on both variant rows.
    pub inverse_consistency: f64,
    /// RMS of the template→subject registration residual (variant-independent).
    pub registration_error: f64,
    /// Kernel-space norm of the template→subject initial velocity
    /// (variant-independent).
    pub registration_norm: f64,
    /// Whether every registration behind this cell converged.
    pub converged: bool,
}

/// One row of an [`ErrorReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    /// Index of the subject in the population passed to [`run_suite`].
    pub subject: usize,
    pub alpha_squared: f64,
    pub variant: Variant,
    pub values: CellValues,
}

/// A cell that could not be evaluated; the suite records it and moves on.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub subject: usize,
    pub alpha_squared: f64,
    pub message: String,
}

/// The error kinds reported by the suite, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    MidpointDistance,
    Centrality,
    Involutivity,
    Transvectivity,
    InverseConsistency,
    RegistrationError,
    RegistrationNorm,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 7] = [
        ErrorKind::MidpointDistance,
        ErrorKind::Centrality,
        ErrorKind::Involutivity,
        ErrorKind::Transvectivity,
        ErrorKind::InverseConsistency,
        ErrorKind::RegistrationError,
        ErrorKind::RegistrationNorm,
    ];

    /// Stable snake_case identifier used in reports and files.
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::MidpointDistance => "midpoint_distance",
            ErrorKind::Centrality => "centrality",
            ErrorKind::Involutivity => "involutivity",
            ErrorKind::Transvectivity => "transvectivity",
            ErrorKind::InverseConsistency => "inverse_consistency",
            ErrorKind::RegistrationError => "registration_error",
            ErrorKind::RegistrationNorm => "registration_norm",
        }
    }

    pub fn value_of(self, v: &CellValues) -> f64 {
        match self {
            ErrorKind::MidpointDistance => v.midpoint_distance,
            ErrorKind::Centrality => v.centrality,
            ErrorKind::Involutivity => v.involutivity,
            ErrorKind::Transvectivity => v.transvectivity,
            ErrorKind::InverseConsistency => v.inverse_consistency,
            ErrorKind::RegistrationError => v.registration_error,
            ErrorKind::RegistrationNorm => v.registration_norm,
        }
    }
}

/// Distribution summary of one error kind over the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub alpha_squared: f64,
    pub variant: Variant,
    pub kind: ErrorKind,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Full output of [`run_suite`]: one row per evaluated
/// (subject, regularization, variant) cell plus the recorded failures.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<CellFailure>,
}

/// Linearly interpolated quantile of an already sorted, non-empty slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}

impl ErrorReport {
    /// Values of one error kind over all subjects in a
    /// (regularization, variant) group, in subject order.
    pub fn values_of(&self, alpha_squared: f64, variant: Variant, kind: ErrorKind) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.alpha_squared == alpha_squared && r.variant == variant)
            .map(|r| kind.value_of(&r.values))
            .collect()
    }

    /// Population mean of one error kind, or `None` when the group is empty.
    pub fn mean_of(&self, alpha_squared: f64, variant: Variant, kind: ErrorKind) -> Option<f64> {
        let vals = self.values_of(alpha_squared, variant, kind);
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// Mean, median, and quartiles of every error kind per
    /// (regularization, variant) group, in row-discovery order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut groups: Vec<(f64, Variant)> = Vec::new();
        for row in &self.rows {
            if !groups
                .iter()
                .any(|(a, v)| *a == row.alpha_squared && *v == row.variant)
            {
                groups.push((row.alpha_squared, row.variant));
            }
        }
        let mut out = Vec::new();
        for (alpha, variant) in groups {
            for kind in ErrorKind::ALL {
                let mut vals = self.values_of(alpha, variant, kind);
                if vals.is_empty() {
                    continue;
                }
                vals.sort_by(f64::total_cmp);
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                out.push(SummaryRow {
                    alpha_squared: alpha,
                    variant,
                    kind,
                    count: vals.len(),
                    mean,
                    median: quantile_sorted(&vals, 0.5),
                    q1: quantile_sorted(&vals, 0.25),
                    q3: quantile_sorted(&vals, 0.75),
                });
            }
        }
        out
    }
}

/// Evaluates every diagnostic for one subject at one regularization weight,
/// for each requested variant.
///
/// The template→subject and subject→template registrations — the dominant
/// cost — are performed once and shared by all diagnostics and variants;
/// per-variant operators reuse them through the `*_from_registration` hooks,
/// so the values are identical to running each standalone diagnostic.
pub fn evaluate_cell<const D: usize>(
    template: &Mesh<D>,
    subject: &Mesh<D>,
    probe: &Mesh<D>,
    cfg: &RegistrationConfig,
    variants: &[Variant],
) -> Result<Vec<(Variant, CellValues)>> {
    let reg_ts = register(template, subject, cfg)?;
    let reg_st = register(subject, template, cfg)?;

    let registration_error = reg_ts.residual_rms();
    let registration_norm = reg_ts.deformation_norm();
    let round_trip = apply_registration(&reg_ts.deformed, &reg_st, cfg)?;
    let inverse_consistency = shape_rms(&round_trip, template)?;

    let mut out = Vec::with_capacity(variants.len());
    for &variant in variants {
        let m = midpoint_from_registration(template, &reg_ts, cfg, variant)?;
        let m_rev = midpoint_from_registration(subject, &reg_st, cfg, variant)?;
        let midpoint_distance = shape_rms(&m, &m_rev)?;

        let centered = symmetry(&m, template, cfg, variant)?;
        let centrality = shape_rms(&centered.result, subject)?;

        let once = symmetry(&m, probe, cfg, variant)?;
        let twice = symmetry(&m, &once.result, cfg, variant)?;
        let involutivity = shape_rms(&twice.result, probe)?;

        let left = symmetry(template, &once.result, cfg, variant)?;
        let via_subj = symmetry(subject, probe, cfg, variant)?;
        let right = symmetry(&m, &via_subj.result, cfg, variant)?;
        let transvectivity = shape_rms(&left.result, &right.result)?;

        let converged = reg_ts.converged
            && reg_st.converged
            && centered.registration.converged
            && once.registration.converged
            && twice.registration.converged
            && left.registration.converged
            && via_subj.registration.converged
            && right.registration.converged;

        out.push((
            variant,
            CellValues {
                midpoint_distance,
                centrality,
                involutivity,
                transvectivity,
                inverse_consistency,
                registration_error,
                registration_norm,
                converged,
            },
        ));
    }
    Ok(out)
}

/// Runs the full diagnostic suite: every subject × regularization weight ×
/// variant.
///
/// `population` pairs each subject shape with its probe (follow-up) shape.
/// Cells are evaluated sequentially in deterministic order (subject-major,
/// then `alphas` order, then `variants` order). A failing cell is recorded in
/// [`ErrorReport::failures`] and the suite continues.
pub fn run_suite<const D: usize>(
    template: &Mesh<D>,
    population: &[(Mesh<D>, Mesh<D>)],
    alphas: &[f64],
    variants: &[Variant],
    base_cfg: &RegistrationConfig,
) -> ErrorReport {
    let mut report = ErrorReport::default();
    for (subject_idx, (subject, probe)) in population.iter().enumerate() {
        for &alpha in alphas {
            let cfg = base_cfg.clone().with_alpha_squared(alpha);
            match evaluate_cell(template, subject, probe, &cfg, variants) {
                Ok(cells) => {
                    for (variant, values) in cells {
                        report.rows.push(ReportRow {
                            subject: subject_idx,
                            alpha_squared: alpha,
                            variant,
                            values,
                        });
                    }
                }
                Err(e) => report.failures.push(CellFailure {
                    subject: subject_idx,
                    alpha_squared: alpha,
                    message: alloc::format!("{e}"),
                }),
            }
        }
    }
    report
}
