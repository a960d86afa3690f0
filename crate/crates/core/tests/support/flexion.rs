//! Exhaustive-search oracles for the flexion solver.
#![allow(dead_code)]

use handsmith_core::kinematics::{
    cumulative_excursion, elastic_energy, FingerConfig, JointState, StageId, TendonStage,
    DEFAULT_JOINT_LIMITS,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_config(rng: &mut ChaCha8Rng, id: usize) -> FingerConfig {
    let ids = [StageId::Proximal, StageId::Intermediate, StageId::Distal];
    FingerConfig {
        design_id: format!("random_{id}"),
        lengths: [45.0, 25.0, 20.0],
        stages: ids.map(|s| TendonStage::new(rng.random_range(1.0..12.0), rng.random_range(0.0..3.0), s).unwrap()),
        springs: std::array::from_fn(|_| rng.random_range(5.0..100.0)),
        joint_limits: DEFAULT_JOINT_LIMITS,
    }
}

pub fn cable(cfg: &FingerConfig, p: f64, i: f64, d: f64) -> f64 {
    cumulative_excursion(cfg, &JointState::new(p, i, d)).2
}

/// Least energy over an `n`^3 lattice of the joint box among points whose
/// cable excursion reaches `target`.
pub fn lattice_minimum(cfg: &FingerConfig, target: f64, n: usize) -> f64 {
    let axis = |j: usize| -> Vec<f64> {
        (0..n).map(|k| cfg.joint_limits[j] * k as f64 / (n - 1) as f64).collect()
    };
    let (ap, ai, ad) = (axis(0), axis(1), axis(2));
    let mut best = f64::INFINITY;
    for &p in &ap {
        for &i in &ai {
            // Energy and excursion both grow with the distal angle, so the
            // first lattice value that reaches the target is the best one.
            let first = ad.partition_point(|&d| cable(cfg, p, i, d) < target);
            if let Some(&d) = ad.get(first) {
                best = best.min(elastic_energy(cfg, &JointState::new(p, i, d)));
            }
        }
    }
    best
}

/// Angle of joint `s` that brings the cable to `target` with the other two
/// joints at `phi`, if it lies inside the joint range.
pub fn solve_joint(cfg: &FingerConfig, mut phi: [f64; 3], s: usize, target: f64) -> Option<[f64; 3]> {
    phi[s] = 0.0;
    let weight = if s == 0 { 2.0 } else { 1.0 };
    let rest = (target - cable(cfg, phi[0], phi[1], phi[2])) / weight;
    if rest < 0.0 {
        return None;
    }
    let TendonStage { b, h, .. } = cfg.stages[s];
    let x = if h > 0.0 { (-b + (b * b + 4.0 * h * rest).sqrt()) / (2.0 * h) } else { rest / b };
    (x <= cfg.joint_limits[s]).then(|| {
        phi[s] = x;
        phi
    })
}

pub fn energy_of(cfg: &FingerConfig, phi: Option<[f64; 3]>) -> f64 {
    phi.map_or(f64::INFINITY, |p| elastic_energy(cfg, &JointState::from_array(p)))
}

/// Least energy on one face of the joint box: joints in `fixed` are pinned,
/// joint `s` is solved from the cable, the rest are scanned on an `n`-point
/// lattice and every lattice local minimum is zoomed in on.
pub fn face_minimum(cfg: &FingerConfig, target: f64, fixed: [Option<f64>; 3], s: usize, n: usize) -> f64 {
    let free: Vec<usize> = (0..3).filter(|&j| j != s && fixed[j].is_none()).collect();
    let base: [f64; 3] = std::array::from_fn(|j| fixed[j].unwrap_or(0.0));
    let eval = |x: &[f64]| {
        let mut phi = base;
        for (k, &j) in free.iter().enumerate() {
            phi[j] = x[k];
        }
        energy_of(cfg, solve_joint(cfg, phi, s, target))
    };
    if free.is_empty() {
        return eval(&[]);
    }
    let max: Vec<f64> = free.iter().map(|&j| cfg.joint_limits[j]).collect();
    let dims = free.len();
    let index = |flat: usize| -> Vec<usize> { (0..dims).map(|k| flat / n.pow(k as u32) % n).collect() };
    let at = |idx: &[usize], lo: &[f64], step: &[f64]| -> Vec<f64> {
        idx.iter().enumerate().map(|(k, &i)| lo[k] + step[k] * i as f64).collect()
    };
    let step0: Vec<f64> = max.iter().map(|m| m / (n - 1) as f64).collect();
    let zero = vec![0.0; dims];
    let total = n.pow(dims as u32);
    let grid: Vec<f64> = (0..total).map(|f| eval(&at(&index(f), &zero, &step0))).collect();
    let mut overall = f64::INFINITY;
    for flat in 0..total {
        let e = grid[flat];
        if !e.is_finite() {
            continue;
        }
        let idx = index(flat);
        let is_local_min = (0..3usize.pow(dims as u32)).all(|o| {
            let mut g = 0;
            for k in (0..dims).rev() {
                let off = (o / 3usize.pow(k as u32) % 3) as isize - 1;
                let v = idx[k] as isize + off;
                if v < 0 || v >= n as isize {
                    return true;
                }
                g = g * n + v as usize;
            }
            grid[g] >= e
        });
        if !is_local_min {
            continue;
        }
        let mut best = (e, at(&idx, &zero, &step0));
        let mut step = step0.clone();
        let m: usize = 25;
        for _ in 0..10 {
            let lo: Vec<f64> = (0..dims).map(|k| (best.1[k] - 3.0 * step[k]).max(0.0)).collect();
            let hi: Vec<f64> = (0..dims).map(|k| (best.1[k] + 3.0 * step[k]).min(max[k])).collect();
            step = (0..dims).map(|k| (hi[k] - lo[k]) / (m - 1) as f64).collect();
            for f in 0..m.pow(dims as u32) {
                let idx: Vec<usize> = (0..dims).map(|k| f / m.pow(k as u32) % m).collect();
                let x = at(&idx, &lo, &step);
                let e = eval(&x);
                if e < best.0 {
                    best = (e, x);
                }
            }
        }
        overall = overall.min(best.0);
    }
    overall
}

/// Least energy on the constraint surface over every face of the joint box.
pub fn refined_minimum(cfg: &FingerConfig, target: f64, n: usize) -> f64 {
    let mut best = f64::INFINITY;
    for s in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&j| j != s).collect();
        for a in 0..3 {
            for b in 0..3 {
                let mut fixed = [None; 3];
                for (j, choice) in others.iter().zip([a, b]) {
                    fixed[*j] = match choice {
                        0 => None,
                        1 => Some(0.0),
                        _ => Some(cfg.joint_limits[*j]),
                    };
                }
                best = best.min(face_minimum(cfg, target, fixed, s, n));
            }
        }
    }
    best
}
