//! Synthetic test populations.
//!
//! The template is a triangulated ellipsoid (subdivided icosahedron projected
//! to the sphere, then scaled per axis). Each subject is the template pushed
//! through a random geodesic deformation plus small vertex noise; the paired
//! follow-up shape applies a second, independent deformation dominated by a
//! radial contraction toward the centroid. Everything is driven by a single
//! seeded generator, so a given seed reproduces the population bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use transvect_core::geodesics::exponential;
use transvect_core::registration::init_control_grid;
use transvect_core::{ControlSystem, Mesh, MomentaSet};

use crate::config::ExperimentConfig;
use crate::off::{format_off, load_mesh};
use crate::CliError;

/// Scales of the generated deformations, in mesh units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    /// Ellipsoid semi-axes of the template.
    pub radii: [f64; 3],
    /// Icosphere subdivision level (2 gives 162 vertices, 320 faces).
    pub subdivisions: u32,
    /// Standard deviation of the random subject momenta.
    pub subject_amplitude: f64,
    /// Standard deviation of the per-vertex noise added to each subject.
    /// The noise is not reachable by a smooth velocity field, so it controls
    /// how much a tightly regularized registration overfits; with too little
    /// of it the population is unrealistically easy to register.
    pub noise_amplitude: f64,
    /// Strength of the radial contraction in the follow-up deformation.
    pub systolic_amplitude: f64,
    /// Standard deviation of the random part of the follow-up momenta.
    pub systolic_randomness: f64,
}

impl Default for PopulationParams {
    fn default() -> Self {
        PopulationParams {
            radii: [1.0, 0.75, 0.55],
            subdivisions: 2,
            subject_amplitude: 0.10,
            noise_amplitude: 0.06,
            systolic_amplitude: 0.03,
            systolic_randomness: 0.01,
        }
    }
}

/// One subject: baseline shape and its follow-up.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectPair {
    pub baseline: Mesh<3>,
    pub followup: Mesh<3>,
}

/// A template with paired subject shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub template: Mesh<3>,
    pub subjects: Vec<SubjectPair>,
}

/// Triangulated unit sphere: a regular icosahedron with each face split into
/// four `subdivisions` times, every vertex projected back to the sphere.
pub fn icosphere(subdivisions: u32) -> Mesh<3> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for v in &mut vertices {
        normalize(v);
    }

    for _ in 0..subdivisions {
        let mut midpoint_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[e] = *midpoint_of.entry(key).or_insert_with(|| {
                    let m = [
                        0.5 * (vertices[a][0] + vertices[b][0]),
                        0.5 * (vertices[a][1] + vertices[b][1]),
                        0.5 * (vertices[a][2] + vertices[b][2]),
                    ];
                    let mut m = m;
                    normalize(&mut m);
                    vertices.push(m);
                    vertices.len() - 1
                });
            }
            next_faces.push([f[0], mid[0], mid[2]]);
            next_faces.push([f[1], mid[1], mid[0]]);
            next_faces.push([f[2], mid[2], mid[1]]);
            next_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = next_faces;
    }

    Mesh::new(vertices, faces).expect("icosphere construction is well-formed")
}

fn normalize(v: &mut [f64; 3]) {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v[0] /= n;
    v[1] /= n;
    v[2] /= n;
}

/// An icosphere scaled per axis by `radii`.
pub fn ellipsoid(radii: [f64; 3], subdivisions: u32) -> Mesh<3> {
    let sphere = icosphere(subdivisions);
    let vertices = sphere
        .vertices()
        .iter()
        .map(|v| [v[0] * radii[0], v[1] * radii[1], v[2] * radii[2]])
        .collect();
    sphere.with_vertices(vertices).expect("scaling keeps the mesh well-formed")
}

fn draw_momenta(
    rng: &mut ChaCha8Rng,
    n: usize,
    std_dev: f64,
) -> Result<Vec<[f64; 3]>, CliError> {
    let normal = Normal::new(0.0, std_dev)
        .map_err(|_| CliError::Message(format!("invalid deformation scale {std_dev}")))?;
    Ok((0..n)
        .map(|_| [normal.sample(rng), normal.sample(rng), normal.sample(rng)])
        .collect())
}

/// Generates a deterministic population: same seed, same bits, independent of
/// how many subjects earlier calls asked for (each subject re-seeds from the
/// base seed and its index).
pub fn generate_population(
    seed: u64,
    n_subjects: usize,
    cfg: &ExperimentConfig,
    params: &PopulationParams,
) -> Result<Population, CliError> {
    let template = ellipsoid(params.radii, params.subdivisions);
    let reg_cfg = cfg.registration(cfg.alpha_squared[0]);
    let kernel = transvect_core::KernelParams::new(cfg.sigma).map_err(CliError::Core)?;
    let grid = init_control_grid(&template, &reg_cfg).map_err(CliError::Core)?;

    let mut subjects = Vec::with_capacity(n_subjects);
    for s in 0..n_subjects {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(s as u64 + 1)));

        // random smooth deformation of the template
        let mu = draw_momenta(&mut rng, grid.len(), params.subject_amplitude)?;
        let sys = ControlSystem::new(
            grid.clone(),
            MomentaSet::new(mu).map_err(CliError::Core)?,
            kernel,
        )
        .map_err(CliError::Core)?;
        let deformed =
            exponential(&template, &sys, cfg.n_steps, 1.0, cfg.scheme).map_err(CliError::Core)?;

        // small vertex noise
        let noise = Normal::new(0.0, params.noise_amplitude)
            .map_err(|_| CliError::Message(format!("invalid noise scale {}", params.noise_amplitude)))?;
        let baseline_vertices: Vec<[f64; 3]> = deformed
            .vertices()
            .iter()
            .map(|v| {
                [
                    v[0] + noise.sample(&mut rng),
                    v[1] + noise.sample(&mut rng),
                    v[2] + noise.sample(&mut rng),
                ]
            })
            .collect();
        let baseline = deformed.with_vertices(baseline_vertices).map_err(CliError::Core)?;

        // follow-up: radial contraction toward the centroid plus a random part
        let grid_s = init_control_grid(&baseline, &reg_cfg).map_err(CliError::Core)?;
        let centroid = baseline.centroid();
        let random_part = draw_momenta(&mut rng, grid_s.len(), params.systolic_randomness)?;
        let mu_systole: Vec<[f64; 3]> = grid_s
            .as_slice()
            .iter()
            .zip(&random_part)
            .map(|(c, r)| {
                [
                    -params.systolic_amplitude * (c[0] - centroid[0]) + r[0],
                    -params.systolic_amplitude * (c[1] - centroid[1]) + r[1],
                    -params.systolic_amplitude * (c[2] - centroid[2]) + r[2],
                ]
            })
            .collect();
        let sys_systole = ControlSystem::new(
            grid_s,
            MomentaSet::new(mu_systole).map_err(CliError::Core)?,
            kernel,
        )
        .map_err(CliError::Core)?;
        let followup =
            exponential(&baseline, &sys_systole, cfg.n_steps, 1.0, cfg.scheme).map_err(CliError::Core)?;

        subjects.push(SubjectPair { baseline, followup });
    }

    Ok(Population { template, subjects })
}

/// Index of the files a population directory holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationManifest {
    pub seed: u64,
    pub template: String,
    pub subjects: Vec<ManifestEntry>,
    pub params: PopulationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: usize,
    pub baseline: String,
    pub followup: String,
}

/// Writes template, subject meshes, and a `population.json` manifest.
pub fn write_population(
    dir: impl AsRef<Path>,
    population: &Population,
    seed: u64,
    params: &PopulationParams,
) -> Result<(), CliError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(CliError::Io)?;
    fs::write(dir.join("template.off"), format_off(&population.template)).map_err(CliError::Io)?;

    let mut entries = Vec::with_capacity(population.subjects.len());
    for (id, pair) in population.subjects.iter().enumerate() {
        let baseline = format!("subject_{id:03}_baseline.off");
        let followup = format!("subject_{id:03}_followup.off");
        fs::write(dir.join(&baseline), format_off(&pair.baseline)).map_err(CliError::Io)?;
        fs::write(dir.join(&followup), format_off(&pair.followup)).map_err(CliError::Io)?;
        entries.push(ManifestEntry { id, baseline, followup });
    }

    let manifest = PopulationManifest {
        seed,
        template: String::from("template.off"),
        subjects: entries,
        params: *params,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(CliError::Json)?;
    fs::write(dir.join("population.json"), json + "\n").map_err(CliError::Io)?;
    Ok(())
}

/// Reads a population directory written by [`write_population`].
pub fn load_population(dir: impl AsRef<Path>) -> Result<Population, CliError> {
    let dir = dir.as_ref();
    let manifest_text =
        fs::read_to_string(dir.join("population.json")).map_err(CliError::Io)?;
    let manifest: PopulationManifest =
        serde_json::from_str(&manifest_text).map_err(CliError::Json)?;
    let template = load_mesh(dir.join(&manifest.template)).map_err(CliError::Off)?;
    let mut subjects = Vec::with_capacity(manifest.subjects.len());
    for entry in &manifest.subjects {
        subjects.push(SubjectPair {
            baseline: load_mesh(dir.join(&entry.baseline)).map_err(CliError::Off)?,
            followup: load_mesh(dir.join(&entry.followup)).map_err(CliError::Off)?,
        });
    }
    Ok(Population { template, subjects })
}
