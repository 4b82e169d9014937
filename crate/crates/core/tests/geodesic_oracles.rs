//! The geodesic integrator against an independently written reference
//! integrator and against structural invariants of the Hamiltonian flow.

mod common;

use common::{max_dist, random_vectors, ref_rk4, rng, RefState};
use rand_chacha::ChaCha8Rng;
use transvect_core::geodesics::{hamiltonian_energy, shoot, shoot_with_points};
use transvect_core::{ControlSystem, KernelParams, MomentaSet, PointSet, Scheme};

fn random_system(r: &mut ChaCha8Rng, n: usize, amp: f64, sigma: f64) -> ControlSystem<3> {
    ControlSystem::new(
        PointSet::new(random_vectors(r, n, 1.0)).unwrap(),
        MomentaSet::new(random_vectors(r, n, amp)).unwrap(),
        KernelParams::new(sigma).unwrap(),
    )
    .unwrap()
}

fn ref_state(sys: &ControlSystem<3>, x: Vec<[f64; 3]>) -> RefState<3> {
    RefState {
        c: sys.control_points().as_slice().to_vec(),
        mu: sys.momenta().as_slice().to_vec(),
        x,
    }
}

#[test]
fn endpoints_match_an_independent_rk4_reference() {
    let mut r = rng(21);
    for _ in 0..5 {
        let sys = random_system(&mut r, 4, 0.8, 1.0);
        let x0: Vec<[f64; 3]> = random_vectors(&mut r, 3, 1.0);
        let truth = ref_rk4(&ref_state(&sys, x0.clone()), 1.0, 10_000, 1.0);

        let traj = shoot_with_points(
            &sys,
            &PointSet::new(x0).unwrap(),
            800,
            1.0,
            Scheme::Rk2,
        )
        .unwrap();
        assert!(max_dist(traj.final_control_points(), &truth.c) <= 1e-4);
        assert!(max_dist(traj.final_momenta(), &truth.mu) <= 1e-4);
        assert!(max_dist(traj.final_points().unwrap(), &truth.x) <= 1e-4);
    }
}

#[test]
fn schemes_converge_at_their_nominal_orders() {
    let mut r = rng(22);
    let mut rk2_ratios = Vec::new();
    let mut euler_ratios = Vec::new();
    for _ in 0..5 {
        let sys = random_system(&mut r, 4, 0.9, 0.8);
        let truth = ref_rk4(&ref_state(&sys, Vec::new()), 0.8, 10_000, 1.0);
        let err = |n_steps: usize, scheme: Scheme| {
            let traj = shoot(&sys, n_steps, 1.0, scheme).unwrap();
            max_dist(traj.final_control_points(), &truth.c)
        };
        rk2_ratios.push(err(50, Scheme::Rk2) / err(100, Scheme::Rk2));
        euler_ratios.push(err(400, Scheme::Euler) / err(800, Scheme::Euler));
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let rk2 = avg(&rk2_ratios);
    let euler = avg(&euler_ratios);
    // halving h divides the error by ~4 for the midpoint scheme, ~2 for Euler
    assert!((2.8..=5.5).contains(&rk2), "second-order ratio {rk2}");
    assert!((1.6..=2.5).contains(&euler), "first-order ratio {euler}");
}

/// Worst relative energy deviation along a trajectory.
fn energy_drift(sys: &ControlSystem<3>, n_steps: usize) -> f64 {
    let traj = shoot(sys, n_steps, 1.0, Scheme::Rk2).unwrap();
    let h0 = hamiltonian_energy(sys);
    let mut worst = 0.0f64;
    for k in 0..=traj.n_steps() {
        let hk = traj.energy_at(k);
        worst = worst.max((hk - h0).abs() / h0.max(1e-300));
    }
    worst
}

#[test]
fn energy_is_conserved_and_improves_with_resolution() {
    let mut r = rng(23);
    let mut drift_20 = 0.0;
    let mut drift_40 = 0.0;
    for _ in 0..20 {
        // unit-scale systems: points in a unit box, momenta bounded by 1
        let sys = random_system(&mut r, 4, 0.5, 1.0);
        let d20 = energy_drift(&sys, 20);
        assert!(d20 <= 1e-3, "drift {d20} at 20 steps");
        drift_20 += d20;
        drift_40 += energy_drift(&sys, 40);
    }
    assert!(
        drift_40 / drift_20 <= 1.0 / 3.0,
        "expected at least a 3x drift reduction when doubling steps: {}",
        drift_40 / drift_20
    );
}

#[test]
fn reversing_final_momenta_flows_back_to_the_start() {
    let mut r = rng(24);
    for _ in 0..5 {
        let sys = random_system(&mut r, 4, 0.6, 1.0);
        let fwd = shoot(&sys, 200, 1.0, Scheme::Rk2).unwrap();
        let back_sys = fwd.system_at(fwd.n_steps()).reversed();
        let back = shoot(&back_sys, 200, 1.0, Scheme::Rk2).unwrap();
        assert!(
            max_dist(back.final_control_points(), sys.control_points().as_slice()) <= 1e-5,
            "round trip did not return to the start"
        );
    }
}

#[test]
fn doubling_momenta_and_halving_time_is_exact() {
    // The flow is 2-homogeneous, and because doubling momenta and halving the
    // step are both exact floating-point scalings, the two integrations agree
    // bit for bit, state by state.
    let mut r = rng(25);
    let sys = random_system(&mut r, 5, 0.7, 0.9);
    let doubled = ControlSystem::new(
        sys.control_points().clone(),
        MomentaSet::new(sys.momenta().as_slice().iter().map(|m| {
            let mut o = *m;
            for a in o.iter_mut() {
                *a *= 2.0;
            }
            o
        }).collect())
        .unwrap(),
        sys.params(),
    )
    .unwrap();
    for scheme in [Scheme::Euler, Scheme::Rk2] {
        let full = shoot(&sys, 100, 1.0, scheme).unwrap();
        let half = shoot(&doubled, 100, 0.5, scheme).unwrap();
        for k in 0..=100 {
            assert_eq!(full.control_points_at(k), half.control_points_at(k), "step {k}");
            let m_full = full.momenta_at(k);
            let m_half = half.momenta_at(k);
            for (a, b) in m_full.iter().zip(m_half) {
                for d in 0..3 {
                    assert_eq!(2.0 * a[d], b[d]);
                }
            }
        }
    }
}

#[test]
fn a_distant_spectator_point_barely_moves() {
    let mut r = rng(26);
    let sys = random_system(&mut r, 4, 0.8, 0.5);
    // 40σ away from every control point: the kernel is ~e^{-1600}
    let spectator = PointSet::new(vec![[20.0, 20.0, 20.0]]).unwrap();
    let traj = shoot_with_points(&sys, &spectator, 10, 1.0, Scheme::Rk2).unwrap();
    assert!(max_dist(traj.final_points().unwrap(), spectator.as_slice()) <= 1e-12);
}
