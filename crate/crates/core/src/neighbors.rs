//! Exact nearest-neighbor search over 3D points and inverse-distance
//! weighting.
//!
//! The index is a balanced k-d tree with median splits on the widest axis.
//! Queries are exact (branch-and-bound, no approximation) and deterministic:
//! ties in distance resolve to the lower owner id. Each stored point carries
//! the id of the curve or particle that owns it.

use crate::{Error, Result, Vec3};

/// Default neighbor count for tracing; exposed as a CLI flag.
pub const DEFAULT_NEIGHBORS: usize = 8;
/// Default inverse-distance power.
pub const DEFAULT_IDW_POWER: f64 = 2.0;

/// Fraction of the dataset diameter below which a query is considered to
/// coincide with a stored point and snaps to it.
const SNAP_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Node {
    point: Vec3,
    owner: u32,
    axis: u8,
    left: i32,
    right: i32,
}

/// Balanced k-d tree over owned 3D points. Immutable after construction;
/// concurrent queries are safe.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    nodes: Vec<Node>,
    root: i32,
    diameter: f64,
}

/// One search result: owning id and Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub owner: usize,
    pub distance: f64,
}

/// Sorted query result (non-decreasing distance, ties by lower owner id)
/// plus the context the weighting step needs.
#[derive(Debug, Clone)]
pub struct NeighborList {
    pub neighbors: Vec<Neighbor>,
    pub query_point: Vec3,
    /// Distances below this snap to the stored point (weight one).
    pub snap_threshold: f64,
}

impl NeighborList {
    pub fn new(neighbors: Vec<Neighbor>, query_point: Vec3, snap_threshold: f64) -> Self {
        NeighborList {
            neighbors,
            query_point,
            snap_threshold,
        }
    }
}

/// Normalized interpolation weights over distinct owners.
#[derive(Debug, Clone)]
pub struct NeighborWeights {
    pub owners: Vec<usize>,
    pub weights: Vec<f64>,
    pub query_point: Vec3,
}

/// Build an index over `(point, owner)` pairs.
pub fn build_index(points: &[(Vec3, usize)]) -> Result<NeighborIndex> {
    NeighborIndex::build(points)
}

impl NeighborIndex {
    pub fn build(points: &[(Vec3, usize)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidNeighborQuery(
                "cannot build an index over zero points".into(),
            ));
        }
        for (i, (p, _)) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteNeighborPoint(i));
            }
        }
        let bbox = crate::Aabb::from_points(points.iter().map(|(p, _)| *p));
        let mut entries: Vec<(Vec3, u32)> = points.iter().map(|&(p, o)| (p, o as u32)).collect();
        let mut nodes = Vec::with_capacity(entries.len());
        let root = build_recursive(&mut entries, &mut nodes);
        Ok(NeighborIndex {
            nodes,
            root,
            diameter: bbox.diagonal(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Diameter of the stored point cloud (bounding-box diagonal).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Exact K nearest neighbors of `q`; returns `min(k, len)` entries.
    pub fn knn(&self, q: Vec3, k: usize) -> NeighborList {
        let k = k.max(1).min(self.nodes.len());
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.search(self.root, q, k, &mut best);
        let neighbors = best
            .into_iter()
            .map(|(d2, owner)| Neighbor {
                owner: owner as usize,
                distance: d2.sqrt(),
            })
            .collect();
        NeighborList {
            neighbors,
            query_point: q,
            snap_threshold: (SNAP_FRACTION * self.diameter).max(f64::MIN_POSITIVE),
        }
    }

    fn search(&self, at: i32, q: Vec3, k: usize, best: &mut Vec<(f64, u32)>) {
        if at < 0 {
            return;
        }
        let node = &self.nodes[at as usize];
        consider(best, k, q.dist_sq(node.point), node.owner);

        let delta = q.axis(node.axis as usize) - node.point.axis(node.axis as usize);
        let (near, far) = if delta < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, q, k, best);
        // A far-side point can still tie the current worst and win on owner
        // id, so the cut uses <= rather than <.
        if best.len() < k || delta * delta <= best[best.len() - 1].0 {
            self.search(far, q, k, best);
        }
    }
}

/// Keep the k best candidates under the total order (distance², owner id).
fn consider(best: &mut Vec<(f64, u32)>, k: usize, d2: f64, owner: u32) {
    let key = (d2, owner);
    if best.len() == k {
        let worst = best[k - 1];
        if (key.0, key.1) >= (worst.0, worst.1) {
            return;
        }
    }
    let pos = best.partition_point(|&(bd, bo)| (bd, bo) < (key.0, key.1));
    best.insert(pos, key);
    best.truncate(k);
}

fn build_recursive(entries: &mut [(Vec3, u32)], nodes: &mut Vec<Node>) -> i32 {
    if entries.is_empty() {
        return -1;
    }
    let bbox = crate::Aabb::from_points(entries.iter().map(|(p, _)| *p));
    let extent = bbox.max - bbox.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0u8
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = entries.len() / 2;
    entries.select_nth_unstable_by(mid, |a, b| {
        a.0.axis(axis as usize)
            .total_cmp(&b.0.axis(axis as usize))
            .then(a.1.cmp(&b.1))
    });
    let (point, owner) = entries[mid];
    let idx = nodes.len() as i32;
    nodes.push(Node {
        point,
        owner,
        axis,
        left: -1,
        right: -1,
    });
    let (lo, rest) = entries.split_at_mut(mid);
    let hi = &mut rest[1..];
    let left = build_recursive(lo, nodes);
    let right = build_recursive(hi, nodes);
    nodes[idx as usize].left = left;
    nodes[idx as usize].right = right;
    idx
}

/// Inverse-distance weights `w_i = d_i^-p / Σ d_j^-p` over a neighbor list.
///
/// A neighbor closer than the snap threshold takes the whole weight; this
/// makes tracing from a point that lies exactly on a stored pathline
/// reproduce that pathline.
pub fn idw_weights(neighbors: &NeighborList, power: f64) -> Result<NeighborWeights> {
    if neighbors.neighbors.is_empty() {
        return Err(Error::InvalidNeighborQuery(
            "cannot weight an empty neighbor list".into(),
        ));
    }
    if !(power > 0.0) {
        return Err(Error::InvalidNeighborQuery(format!(
            "IDW power must be positive, got {power}"
        )));
    }
    let owners: Vec<usize> = neighbors.neighbors.iter().map(|n| n.owner).collect();
    let mut weights = vec![0.0; owners.len()];

    // The list is sorted, so a snapped neighbor is the first entry and the
    // lowest-owner tie by construction.
    if let Some(hit) = neighbors
        .neighbors
        .iter()
        .position(|n| n.distance < neighbors.snap_threshold)
    {
        weights[hit] = 1.0;
        return Ok(NeighborWeights {
            owners,
            weights,
            query_point: neighbors.query_point,
        });
    }

    let mut sum = 0.0;
    for (w, n) in weights.iter_mut().zip(&neighbors.neighbors) {
        *w = n.distance.powf(-power);
        sum += *w;
    }
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::InvalidNeighborQuery(format!(
            "IDW weight sum degenerate ({sum})"
        )));
    }
    for w in &mut weights {
        *w /= sum;
    }
    Ok(NeighborWeights {
        owners,
        weights,
        query_point: neighbors.query_point,
    })
}
