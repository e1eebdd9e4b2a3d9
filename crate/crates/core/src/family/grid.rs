use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a discretized base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridSpec {
    /// `n` equally spaced angles `2πk/n`.
    Circle { n: usize },
    /// `n` points `k/(n−1)` of `[0, 1]`.
    Interval { n: usize },
    /// `n1 × n2` angle pairs.
    Torus { n1: usize, n2: usize },
}

/// Sample points with their coordinates and neighbours.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseGrid {
    pub spec: GridSpec,
    points: Vec<Vec<f64>>,
    neighbours: Vec<Vec<usize>>,
}

impl BaseGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let (points, neighbours) = match spec {
            GridSpec::Circle { n } => {
                if n < 3 {
                    return Err(Error::Invalid("a circle grid needs at least 3 samples".into()));
                }
                let pts = (0..n).map(|k| vec![TAU * k as f64 / n as f64]).collect();
                let nb = (0..n).map(|k| vec![(k + n - 1) % n, (k + 1) % n]).collect();
                (pts, nb)
            }
            GridSpec::Interval { n } => {
                if n < 2 {
                    return Err(Error::Invalid("an interval grid needs at least 2 samples".into()));
                }
                let pts = (0..n).map(|k| vec![k as f64 / (n - 1) as f64]).collect();
                let nb = (0..n)
                    .map(|k| {
                        let mut v = Vec::new();
                        if k > 0 {
                            v.push(k - 1);
                        }
                        if k + 1 < n {
                            v.push(k + 1);
                        }
                        v
                    })
                    .collect();
                (pts, nb)
            }
            GridSpec::Torus { n1, n2 } => {
                if n1 < 3 || n2 < 3 {
                    return Err(Error::Invalid("a torus grid needs at least 3 samples per direction".into()));
                }
                let idx = |i: usize, j: usize| i * n2 + j;
                let mut pts = Vec::with_capacity(n1 * n2);
                let mut nb = Vec::with_capacity(n1 * n2);
                for i in 0..n1 {
                    for j in 0..n2 {
                        pts.push(vec![TAU * i as f64 / n1 as f64, TAU * j as f64 / n2 as f64]);
                        nb.push(vec![
                            idx((i + n1 - 1) % n1, j),
                            idx((i + 1) % n1, j),
                            idx(i, (j + n2 - 1) % n2),
                            idx(i, (j + 1) % n2),
                        ]);
                    }
                }
                (pts, nb)
            }
        };
        Ok(Self { spec, points, neighbours })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, b: usize) -> &[f64] {
        &self.points[b]
    }

    pub fn neighbours(&self, b: usize) -> &[usize] {
        &self.neighbours[b]
    }

    /// Connected components of the samples where `member` holds, using only
    /// edges accepted by `linked`, each in breadth-first order from its
    /// smallest sample, with the parent each sample was reached from.
    pub fn components(&self, member: &[bool], linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<(usize, Option<usize>)>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if !member[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut order = vec![(start, None)];
            let mut head = 0;
            while head < order.len() {
                let (b, _) = order[head];
                head += 1;
                for &nb in &self.neighbours[b] {
                    if member[nb] && !seen[nb] && linked(b, nb) {
                        seen[nb] = true;
                        order.push((nb, Some(b)));
                    }
                }
            }
            out.push(order);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_wraps() {
        let g = BaseGrid::new(GridSpec::Circle { n: 8 }).unwrap();
        assert_eq!(g.neighbours(0), &[7, 1]);
        assert!((g.point(2)[0] - TAU / 4.0).abs() < 1e-15);
    }

    #[test]
    fn components_split_on_gaps() {
        let g = BaseGrid::new(GridSpec::Circle { n: 8 }).unwrap();
        let member = [true, true, false, true, true, true, false, true];
        let comps = g.components(&member, |_, _| true);
        assert_eq!(comps.len(), 2);
        let mut first: Vec<usize> = comps[0].iter().map(|c| c.0).collect();
        first.sort();
        assert_eq!(first, vec![0, 1, 7]);
        assert_eq!(comps[1].len(), 3);
    }

    #[test]
    fn torus_has_four_neighbours() {
        let g = BaseGrid::new(GridSpec::Torus { n1: 3, n2: 4 }).unwrap();
        assert_eq!(g.len(), 12);
        assert!(g.neighbours(5).len() == 4);
        assert_eq!(g.components(&[true; 12], |_, _| true).len(), 1);
    }
}
