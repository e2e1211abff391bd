//! Ground truth for small instances: exhaustive enumeration of every
//! assignment, and weighted Lloyd iterations as a classical baseline.
//!
//! The objective is recomputed here from the membership-matrix form
//! `J = sum_i sum_j u_ij f_j |X_j - C_i|^2` without touching
//! [`crate::objective`], so the two can check each other.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::objective::{Assignment, ProblemInstance};

/// Largest number of assignments [`exhaustive_min_j`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub optimal_j: f64,
    pub optimal_assignment: Assignment,
    pub assignments_evaluated: u64,
}

/// Objective from an explicit c×n membership matrix.
pub fn membership_j(inst: &ProblemInstance, cluster_of: &[usize]) -> f64 {
    let c = inst.clusters();
    let pts = inst.points();
    let u = |i: usize, j: usize| if cluster_of[j] == i { 1.0 } else { 0.0 };
    let mut j_total = 0.0;
    for i in 0..c {
        let mut f_sum = 0.0;
        let mut fx = [0.0f64; 3];
        for (j, p) in pts.iter().enumerate() {
            let w = u(i, j) * p.weight;
            f_sum += w;
            for d in 0..3 {
                fx[d] += w * p.coords[d];
            }
        }
        if f_sum == 0.0 {
            continue;
        }
        let centre = [fx[0] / f_sum, fx[1] / f_sum, fx[2] / f_sum];
        for (j, p) in pts.iter().enumerate() {
            let dx = p.coords[0] - centre[0];
            let dy = p.coords[1] - centre[1];
            let dz = p.coords[2] - centre[2];
            j_total += u(i, j) * p.weight * (dx * dx + dy * dy + dz * dz);
        }
    }
    j_total
}

/// Number of assignments of `n` points to `c` clusters, if within the limit.
pub fn assignment_count(n: usize, c: usize) -> Result<u64> {
    let too_large = || Error::TooLarge {
        points: n,
        clusters: c,
        limit: EXHAUSTIVE_LIMIT,
    };
    let mut total: u64 = 1;
    for _ in 0..n {
        total = total.checked_mul(c as u64).ok_or_else(too_large)?;
        if total > EXHAUSTIVE_LIMIT {
            return Err(too_large());
        }
    }
    Ok(total)
}

/// Visits every assignment in lexicographic order (point 0 most significant).
pub fn for_each_assignment(n: usize, c: usize, mut visit: impl FnMut(&[usize])) -> Result<u64> {
    let total = assignment_count(n, c)?;
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        visit(&digits);
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < c {
                break;
            }
            *d = 0;
        }
    }
    Ok(total)
}

/// Minimum J over all `c^n` assignments; ties go to the lexicographically
/// smallest assignment.
pub fn exhaustive_min_j(inst: &ProblemInstance) -> Result<OracleResult> {
    let mut best_j = f64::INFINITY;
    let mut best = Vec::new();
    let evaluated = for_each_assignment(inst.n_points(), inst.clusters(), |a| {
        let j = membership_j(inst, a);
        if j < best_j {
            best_j = j;
            best = a.to_vec();
        }
    })?;
    Ok(OracleResult {
        optimal_j: best_j,
        optimal_assignment: Assignment { cluster_of: best },
        assignments_evaluated: evaluated,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LloydRun {
    /// J after each assignment step.
    pub history: Vec<f64>,
    pub assignment: Assignment,
}

impl LloydRun {
    pub fn final_j(&self) -> f64 {
        *self.history.last().expect("at least one iteration")
    }
}

fn nearest(x: &[f64; 3], centres: &[[f64; 3]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, c) in centres.iter().enumerate() {
        let d = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>();
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

/// One weighted Lloyd descent from `c` randomly chosen points as seeds.
pub fn lloyd_once(inst: &ProblemInstance, rng: &mut crate::Rng) -> LloydRun {
    let pts = inst.points();
    let k = inst.clusters().min(pts.len());
    let mut centres: Vec<[f64; 3]> = sample(rng, pts.len(), k).iter().map(|i| pts[i].coords).collect();
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    loop {
        let next: Vec<usize> = pts.iter().map(|p| nearest(&p.coords, &centres)).collect();
        if next == labels {
            break;
        }
        labels = next;
        // Recompute weighted means; clusters that lost every point are dropped.
        let mut mass = vec![0.0; centres.len()];
        let mut moment = vec![[0.0; 3]; centres.len()];
        for (p, &l) in pts.iter().zip(&labels) {
            mass[l] += p.weight;
            for d in 0..3 {
                moment[l][d] += p.weight * p.coords[d];
            }
        }
        let mut remap = vec![usize::MAX; centres.len()];
        let mut kept = Vec::with_capacity(centres.len());
        for (old, (m, s)) in mass.iter().zip(&moment).enumerate() {
            if *m > 0.0 {
                remap[old] = kept.len();
                kept.push(s.map(|v| v / m));
            }
        }
        for l in labels.iter_mut() {
            *l = remap[*l];
        }
        centres = kept;
        history.push(membership_j(inst, &labels));
    }
    LloydRun {
        history,
        assignment: Assignment { cluster_of: labels },
    }
}

/// Best J over `restarts` independent Lloyd descents.
pub fn lloyd_kmeans(inst: &ProblemInstance, rng: &mut crate::Rng, restarts: usize) -> Result<f64> {
    if restarts == 0 {
        return Err(Error::arg("Lloyd baseline needs at least one restart"));
    }
    Ok((0..restarts)
        .map(|_| lloyd_once(inst, rng).final_j())
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{objective_j, WeightedPoint};

    fn axis(xs: &[f64], c: usize) -> ProblemInstance {
        ProblemInstance::on_axis(xs, &vec![1.0; xs.len()], c).unwrap()
    }

    #[test]
    fn single_point() {
        for c in 1..=8 {
            let r = exhaustive_min_j(&axis(&[42.0], c)).unwrap();
            assert_eq!(r.optimal_j, 0.0);
            assert_eq!(r.optimal_assignment.cluster_of, vec![0]);
            assert_eq!(r.assignments_evaluated, c as u64);
        }
    }

    #[test]
    fn two_points_split() {
        let r = exhaustive_min_j(&axis(&[0.0, 10.0], 2)).unwrap();
        assert_eq!(r.optimal_j, 0.0);
        assert_eq!(r.optimal_assignment.cluster_of, vec![0, 1]);
    }

    #[test]
    fn four_points_two_pairs() {
        let r = exhaustive_min_j(&axis(&[0.0, 1.0, 9.0, 10.0], 2)).unwrap();
        assert_eq!(r.optimal_j, 1.0);
        assert_eq!(r.optimal_assignment.cluster_of, vec![0, 0, 1, 1]);
        assert_eq!(r.assignments_evaluated, 16);
    }

    #[test]
    fn refuses_huge_instances() {
        let inst = axis(&[0.0; 24], 2);
        assert!(matches!(exhaustive_min_j(&inst), Err(Error::TooLarge { .. })));
        assert!(assignment_count(23, 2).is_ok());
        assert!(assignment_count(200, 8).is_err());
    }

    #[test]
    fn enumeration_order() {
        let mut seen = Vec::new();
        for_each_assignment(2, 3, |a| seen.push(a.to_vec())).unwrap();
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[3], vec![1, 0]);
        assert_eq!(seen[8], vec![2, 2]);
    }

    #[test]
    fn membership_matches_objective() {
        let inst = ProblemInstance::new(
            vec![
                WeightedPoint { coords: [1.0, 2.0, 3.0], weight: 2.0 },
                WeightedPoint { coords: [200.0, 7.0, 30.0], weight: 5.0 },
                WeightedPoint { coords: [15.5, 47.5, 79.5], weight: 1.0 },
                WeightedPoint { coords: [100.0, 100.0, 100.0], weight: 9.0 },
            ],
            3,
        )
        .unwrap();
        for_each_assignment(4, 3, |a| {
            let ours = membership_j(&inst, a);
            let theirs = objective_j(&Assignment { cluster_of: a.to_vec() }, &inst).unwrap();
            assert!((ours - theirs).abs() <= 1e-9 * ours.max(theirs).max(1e-12));
        })
        .unwrap();
    }

    #[test]
    fn lloyd_separable_and_monotone() {
        let inst = axis(&[0.0, 50.0, 200.0], 3);
        let mut rng = crate::rng_from_seed(1);
        assert_eq!(lloyd_kmeans(&inst, &mut rng, 3).unwrap(), 0.0);
        assert!(lloyd_kmeans(&inst, &mut rng, 0).is_err());

        let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 101) as f64).collect();
        let inst = axis(&xs, 4);
        for seed in 0..20 {
            let run = lloyd_once(&inst, &mut crate::rng_from_seed(seed));
            for w in run.history.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", run.history);
            }
        }
    }

    #[test]
    fn lloyd_finds_small_optimum() {
        let inst = ProblemInstance::on_axis(&[0.0, 1.0, 9.0, 10.0, 30.0, 31.0, 33.0, 60.0], &[1.0, 3.0, 2.0, 1.0, 5.0, 1.0, 2.0, 4.0], 2).unwrap();
        let exact = exhaustive_min_j(&inst).unwrap().optimal_j;
        let lloyd = lloyd_kmeans(&inst, &mut crate::rng_from_seed(3), 10).unwrap();
        assert!((lloyd - exact).abs() <= 1e-9 * exact);
    }
}
