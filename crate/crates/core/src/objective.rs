//! Chromosome decoding and the frequency-weighted K-means objective.
//!
//! A chromosome carries 3 bits per point, most significant bit first. The
//! 3-bit code of point `j` selects its cluster as `code mod c`, so every bit
//! string is a feasible assignment. The objective is
//!
//! ```text
//! J = sum_i sum_{j in cluster i} f_j * |X_j - C_i|^2
//! ```
//!
//! with `C_i` the `f`-weighted mean of the cluster's points. With unit
//! weights this is the plain K-means criterion.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::prepartition::WeightedCell;

pub const BITS_PER_POINT: usize = 3;
pub const MAX_CLUSTERS: usize = 1 << BITS_PER_POINT;

/// GA fitness numerator: fitness = 10⁹ / J.
pub const FITNESS_SCALE: f64 = 1e9;
/// Floor applied to J before inversion.
pub const FITNESS_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedPoint {
    pub coords: [f64; 3],
    pub weight: f64,
}

/// Points to cluster and the number of clusters sought.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    points: Vec<WeightedPoint>,
    clusters: usize,
}

impl ProblemInstance {
    pub fn new(points: Vec<WeightedPoint>, clusters: usize) -> Result<Self> {
        if !(1..=MAX_CLUSTERS).contains(&clusters) {
            return Err(Error::arg(format!(
                "cluster count {clusters} outside [1, {MAX_CLUSTERS}]"
            )));
        }
        if points.is_empty() {
            return Err(Error::arg("problem instance has no points"));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.weight > 0.0 && p.weight.is_finite()) || p.coords.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::arg(format!("invalid point {p:?}")));
        }
        Ok(Self { points, clusters })
    }

    pub fn from_cells(cells: &[WeightedCell], clusters: usize) -> Result<Self> {
        Self::new(
            cells
                .iter()
                .map(|c| WeightedPoint {
                    coords: c.center,
                    weight: c.weight as f64,
                })
                .collect(),
            clusters,
        )
    }

    /// Points laid out on the first color axis, the other two coordinates 0.
    pub fn on_axis(xs: &[f64], weights: &[f64], clusters: usize) -> Result<Self> {
        if xs.len() != weights.len() {
            return Err(Error::arg("coordinate and weight counts differ"));
        }
        Self::new(
            xs.iter()
                .zip(weights)
                .map(|(&x, &weight)| WeightedPoint {
                    coords: [x, 0.0, 0.0],
                    weight,
                })
                .collect(),
            clusters,
        )
    }

    pub fn points(&self) -> &[WeightedPoint] {
        &self.points
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_bits(&self) -> usize {
        self.points.len() * BITS_PER_POINT
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome {
    bits: Vec<bool>,
}

impl Chromosome {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Parses a string of `0`/`1` characters; anything else is ignored.
    pub fn from_str01(s: &str) -> Self {
        Self {
            bits: s
                .chars()
                .filter_map(|c| match c {
                    '0' => Some(false),
                    '1' => Some(true),
                    _ => None,
                })
                .collect(),
        }
    }

    /// Uniform random bits, one `bool` draw per position in index order.
    pub fn random(n_bits: usize, rng: &mut crate::Rng) -> Self {
        Self {
            bits: (0..n_bits).map(|_| rng.random::<bool>()).collect(),
        }
    }

    /// Encodes an assignment with each cluster's plain 3-bit code.
    pub fn encode(assign: &Assignment) -> Self {
        let mut bits = Vec::with_capacity(assign.cluster_of.len() * BITS_PER_POINT);
        for &c in &assign.cluster_of {
            for shift in (0..BITS_PER_POINT).rev() {
                bits.push((c >> shift) & 1 == 1);
            }
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn to_str01(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Cluster index of every point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub cluster_of: Vec<usize>,
}

fn check_length(chrom: &Chromosome, inst: &ProblemInstance) -> Result<()> {
    if chrom.len() != inst.n_bits() {
        return Err(Error::arg(format!(
            "chromosome has {} bits, instance needs {}",
            chrom.len(),
            inst.n_bits()
        )));
    }
    Ok(())
}

#[inline]
fn decode_into(bits: &[bool], clusters: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend(bits.chunks_exact(BITS_PER_POINT).map(|code| {
        let v = code.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        v % clusters
    }));
}

pub fn decode(chrom: &Chromosome, inst: &ProblemInstance) -> Result<Assignment> {
    check_length(chrom, inst)?;
    let mut cluster_of = Vec::with_capacity(inst.n_points());
    decode_into(&chrom.bits, inst.clusters, &mut cluster_of);
    Ok(Assignment { cluster_of })
}

fn check_assignment(assign: &Assignment, inst: &ProblemInstance) -> Result<()> {
    if assign.cluster_of.len() != inst.n_points() {
        return Err(Error::arg(format!(
            "assignment covers {} points, instance has {}",
            assign.cluster_of.len(),
            inst.n_points()
        )));
    }
    if let Some(c) = assign.cluster_of.iter().find(|&&c| c >= inst.clusters) {
        return Err(Error::arg(format!(
            "cluster {c} out of range for {} clusters",
            inst.clusters
        )));
    }
    Ok(())
}

fn centroids_of(labels: &[usize], inst: &ProblemInstance) -> Vec<Option<[f64; 3]>> {
    let mut mass = vec![0.0; inst.clusters];
    let mut moment = vec![[0.0; 3]; inst.clusters];
    for (p, &c) in inst.points.iter().zip(labels) {
        mass[c] += p.weight;
        for (m, x) in moment[c].iter_mut().zip(p.coords) {
            *m += p.weight * x;
        }
    }
    mass.iter()
        .zip(&moment)
        .map(|(&m, s)| (m > 0.0).then(|| s.map(|v| v / m)))
        .collect()
}

fn j_of(labels: &[usize], inst: &ProblemInstance) -> f64 {
    let centers = centroids_of(labels, inst);
    inst.points
        .iter()
        .zip(labels)
        .map(|(p, &c)| {
            // every labelled cluster is non-empty
            let center = centers[c].unwrap_or(p.coords);
            p.weight * squared_distance(&p.coords, &center)
        })
        .sum()
}

#[inline]
pub fn squared_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Weighted centroid of each cluster, `None` for empty clusters.
pub fn centroids(assign: &Assignment, inst: &ProblemInstance) -> Result<Vec<Option<[f64; 3]>>> {
    check_assignment(assign, inst)?;
    Ok(centroids_of(&assign.cluster_of, inst))
}

pub fn objective_j(assign: &Assignment, inst: &ProblemInstance) -> Result<f64> {
    check_assignment(assign, inst)?;
    Ok(j_of(&assign.cluster_of, inst))
}

pub fn fitness(j: f64) -> f64 {
    FITNESS_SCALE / j.max(FITNESS_EPSILON)
}

/// Evaluates chromosomes against one instance, reusing a decode buffer.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    inst: &'a ProblemInstance,
    labels: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Self {
        Self {
            inst,
            labels: Vec::with_capacity(inst.n_points()),
        }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.inst
    }

    pub fn j(&mut self, chrom: &Chromosome) -> Result<f64> {
        check_length(chrom, self.inst)?;
        decode_into(&chrom.bits, self.inst.clusters, &mut self.labels);
        Ok(j_of(&self.labels, self.inst))
    }

    pub fn fitness(&mut self, chrom: &Chromosome) -> Result<f64> {
        self.j(chrom).map(fitness)
    }
}
