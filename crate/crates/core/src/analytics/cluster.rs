use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance(&self, other: &Point2) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Shifts each axis to zero mean and scales it to unit population variance.
pub fn standardize(points: &[Point2]) -> Result<Vec<Point2>> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("standardizing needs at least 2 points".into()));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::InvalidInput("points must be finite".into()));
    }
    let n = points.len() as f64;
    let axis = |get: fn(&Point2) -> f64, index: usize| -> Result<(f64, f64)> {
        let mean = points.iter().map(get).sum::<f64>() / n;
        let var = points.iter().map(|p| (get(p) - mean) * (get(p) - mean)).sum::<f64>() / n;
        if var == 0.0 {
            return Err(Error::ZeroVariance { axis: index });
        }
        Ok((mean, libm::sqrt(var)))
    };
    let (mx, sx) = axis(|p| p.x, 0)?;
    let (my, sy) = axis(|p| p.y, 1)?;
    Ok(points
        .iter()
        .map(|p| Point2::new((p.x - mx) / sx, (p.y - my) / sy))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    /// Neighbourhood radius (inclusive), in the units of the input points.
    pub eps: f64,
    /// Neighbours a point needs, itself excluded, to be a core point.
    pub min_neighbours: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_neighbours: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidInput("eps must be positive".into()));
        }
        if min_neighbours == 0 {
            return Err(Error::InvalidInput("min_neighbours must be at least 1".into()));
        }
        Ok(Self { eps, min_neighbours })
    }

    /// `eps = 0.8` on standardized data, 5 neighbours.
    pub fn standardized() -> Self {
        Self {
            eps: 0.8,
            min_neighbours: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Cluster(usize),
    Noise,
}

impl Label {
    pub fn cluster(self) -> Option<usize> {
        match self {
            Label::Cluster(c) => Some(c),
            Label::Noise => None,
        }
    }
}

/// Density-based clustering.
///
/// A point is core when at least `min_neighbours` other points lie within
/// `eps`. Clusters are the connected components of core points together
/// with the non-core points inside some core point's neighbourhood. Points
/// are visited in index order and clusters numbered as they are found, so a
/// border point reachable from several clusters joins the lowest-numbered
/// one.
pub fn dbscan(points: &[Point2], params: &DbscanParams) -> Vec<Label> {
    let n = points.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && points[i].distance(&points[j]) <= params.eps)
                .collect()
        })
        .collect();
    let is_core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= params.min_neighbours).collect();

    let mut labels = vec![Label::Noise; n];
    let mut assigned = vec![false; n];
    let mut next_cluster = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if assigned[seed] || !is_core[seed] {
            continue;
        }
        let id = next_cluster;
        next_cluster += 1;
        assigned[seed] = true;
        labels[seed] = Label::Cluster(id);
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbours[p] {
                if assigned[q] {
                    continue;
                }
                assigned[q] = true;
                labels[q] = Label::Cluster(id);
                if is_core[q] {
                    queue.push_back(q);
                }
            }
        }
    }
    labels
}

/// Number of clusters and noise points in a labeling.
pub fn summarize(labels: &[Label]) -> (usize, usize) {
    let clusters = labels.iter().filter_map(|l| l.cluster()).max().map_or(0, |m| m + 1);
    let noise = labels.iter().filter(|l| **l == Label::Noise).count();
    (clusters, noise)
}
