//! Lattice discretization of a convex polygon with Shortley–Weller boundary data.

use super::band::BandLu;
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::vec2::Vec2;

/// Arms shorter than this fraction of `h` count as lying on the boundary.
pub const MIN_ARM: f64 = 1e-6;

/// Axis directions in stencil order: east, west, north, south.
pub const DIRECTIONS: [Vec2; 4] = [
    Vec2 { x: 1.0, y: 0.0 },
    Vec2 { x: -1.0, y: 0.0 },
    Vec2 { x: 0.0, y: 1.0 },
    Vec2 { x: 0.0, y: -1.0 },
];

/// Where the stencil arm of `node` in direction `dir` hits the polygon edge `edge`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryLink {
    pub node: usize,
    pub dir: usize,
    /// Arm length as a fraction of `h`, in `(0, 1]`.
    pub arm: f64,
    pub edge: usize,
}

/// Chord of the polygon along one lattice line: endpoints and the edges they lie on.
#[derive(Clone, Copy, Debug)]
struct Chord {
    lo: f64,
    lo_edge: usize,
    hi: f64,
    hi_edge: usize,
}

#[derive(Clone, Debug)]
pub struct GridDiscretization {
    polygon: ConvexPolygon,
    h: f64,
    lattice: Vec<(i64, i64)>,
    /// Arms (fractions of h) in stencil order; 1 for a full step.
    arms: Vec<[f64; 4]>,
    neighbors: Vec<[Option<usize>; 4]>,
    links: Vec<BoundaryLink>,
    bandwidth: (usize, usize),
}

/// Chord of `p` along the line `coord(axis) = level`, `axis` 0 for rows (y fixed).
fn chord(p: &ConvexPolygon, axis: usize, level: f64) -> Option<Chord> {
    let v = p.vertices();
    let n = v.len();
    let (mut lo, mut hi): (Option<(f64, usize)>, Option<(f64, usize)>) = (None, None);
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        // Fixed coordinate `f` and free coordinate `g`.
        let (fa, fb, ga, gb) = if axis == 0 { (a.y, b.y, a.x, b.x) } else { (a.x, b.x, a.y, b.y) };
        if fa == fb || (fa - level) * (fb - level) > 0.0 {
            continue;
        }
        let t = (level - fa) / (fb - fa);
        let g = ga + t * (gb - ga);
        // Counterclockwise: for rows, descending edges bound the left; for columns,
        // edges heading in +x bound the bottom.
        let lower_side = if axis == 0 { fb < fa } else { fb > fa };
        let slot = if lower_side { &mut lo } else { &mut hi };
        match slot {
            Some((best, _)) if (lower_side && *best <= g) || (!lower_side && *best >= g) => {}
            _ => *slot = Some((g, i)),
        }
    }
    match (lo, hi) {
        (Some((lo, lo_edge)), Some((hi, hi_edge))) if hi > lo => Some(Chord { lo, lo_edge, hi, hi_edge }),
        _ => None,
    }
}

fn nearest_edge(p: &ConvexPolygon, x: Vec2) -> usize {
    (0..p.len())
        .map(|e| (p.edge_normal(e).dot(x - p.vertices()[e]).abs(), e))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(0, |m| m.1)
}

impl GridDiscretization {
    /// Interior lattice nodes of `p` on the origin-anchored grid of spacing `h`.
    pub fn new(p: &ConvexPolygon, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        let limit = p.inradius() / 4.0;
        if h >= limit {
            return Err(Error::GridTooCoarse { spacing: h, limit });
        }
        let (lo, hi) = p.bounding_box();
        let (i0, i1) = ((lo.x / h).ceil() as i64, (hi.x / h).floor() as i64);
        let (j0, j1) = ((lo.y / h).ceil() as i64, (hi.y / h).floor() as i64);
        let rows: Vec<Option<Chord>> = (j0..=j1).map(|j| chord(p, 0, j as f64 * h)).collect();
        let cols: Vec<Option<Chord>> = (i0..=i1).map(|i| chord(p, 1, i as f64 * h)).collect();

        let inside = |i: i64, j: i64| -> Option<[f64; 4]> {
            if i < i0 || i > i1 || j < j0 || j > j1 {
                return None;
            }
            let r = rows[(j - j0) as usize]?;
            let c = cols[(i - i0) as usize]?;
            let (x, y) = (i as f64 * h, j as f64 * h);
            let arms = [(r.hi - x) / h, (x - r.lo) / h, (c.hi - y) / h, (y - c.lo) / h];
            arms.iter().all(|&a| a >= MIN_ARM).then_some(arms)
        };

        // Fast index along the shorter side keeps the band narrow.
        let x_fast = (i1 - i0) <= (j1 - j0);
        let (s0, s1, f0, f1) = if x_fast { (j0, j1, i0, i1) } else { (i0, i1, j0, j1) };
        let to_ij = |s: i64, f: i64| if x_fast { (f, s) } else { (s, f) };
        let mut lattice = Vec::new();
        let mut raw_arms = Vec::new();
        for s in s0..=s1 {
            for f in f0..=f1 {
                let (i, j) = to_ij(s, f);
                if let Some(a) = inside(i, j) {
                    lattice.push((i, j));
                    raw_arms.push(a);
                }
            }
        }
        if lattice.len() < 9 {
            return Err(Error::EmptyInterior(lattice.len()));
        }
        let index_of = |i: i64, j: i64| -> Option<usize> {
            lattice.binary_search_by(|&(a, b)| {
                let key = |(x, y): (i64, i64)| if x_fast { (y, x) } else { (x, y) };
                key((a, b)).cmp(&key((i, j)))
            }).ok()
        };
        let steps = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        let mut arms = Vec::with_capacity(lattice.len());
        let mut neighbors = Vec::with_capacity(lattice.len());
        let mut links = Vec::new();
        let (mut bl, mut bu) = (0usize, 0usize);
        for (node, (&(i, j), raw)) in lattice.iter().zip(&raw_arms).enumerate() {
            let r = rows[(j - j0) as usize].unwrap();
            let c = cols[(i - i0) as usize].unwrap();
            let edges = [r.hi_edge, r.lo_edge, c.hi_edge, c.lo_edge];
            let mut a = [1.0; 4];
            let mut nb = [None; 4];
            for d in 0..4 {
                if raw[d] < 1.0 {
                    a[d] = raw[d];
                    links.push(BoundaryLink { node, dir: d, arm: raw[d], edge: edges[d] });
                } else {
                    nb[d] = index_of(i + steps[d].0, j + steps[d].1);
                    match nb[d] {
                        Some(m) if m > node => bu = bu.max(m - node),
                        Some(m) => bl = bl.max(node - m),
                        None => {
                            // The neighbor sits on the boundary (or within MIN_ARM
                            // of it) and is treated as a Dirichlet point.
                            let x = Vec2::new((i + steps[d].0) as f64 * h, (j + steps[d].1) as f64 * h);
                            let edge = if raw[d] < 1.0 + MIN_ARM { edges[d] } else { nearest_edge(p, x) };
                            links.push(BoundaryLink { node, dir: d, arm: 1.0, edge });
                        }
                    }
                }
            }
            arms.push(a);
            neighbors.push(nb);
        }
        Ok(GridDiscretization {
            polygon: p.clone(),
            h,
            lattice,
            arms,
            neighbors,
            links,
            bandwidth: (bl, bu),
        })
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn polygon(&self) -> &ConvexPolygon {
        &self.polygon
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn lattice_index(&self, node: usize) -> (i64, i64) {
        self.lattice[node]
    }

    pub fn position(&self, node: usize) -> Vec2 {
        let (i, j) = self.lattice[node];
        Vec2::new(i as f64 * self.h, j as f64 * self.h)
    }

    pub fn arms(&self, node: usize) -> [f64; 4] {
        self.arms[node]
    }

    pub fn neighbors(&self, node: usize) -> [Option<usize>; 4] {
        self.neighbors[node]
    }

    pub fn boundary_links(&self) -> &[BoundaryLink] {
        &self.links
    }

    /// Stencil of the negative Laplacian at `node`: diagonal and neighbor weights.
    pub fn stencil(&self, node: usize) -> (f64, [f64; 4]) {
        let a = self.arms[node];
        let h2 = self.h * self.h;
        let mut w = [0.0; 4];
        let mut diag = 0.0;
        for (p, q) in [(0, 1), (2, 3)] {
            let s = a[p] + a[q];
            diag += 2.0 / (h2 * a[p] * a[q]);
            w[p] = -2.0 / (h2 * a[p] * s);
            w[q] = -2.0 / (h2 * a[q] * s);
        }
        (diag, w)
    }

    /// `y = A x` for the Shortley–Weller operator.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for node in 0..self.len() {
            let (diag, w) = self.stencil(node);
            let mut s = diag * x[node];
            for d in 0..4 {
                if let Some(m) = self.neighbors[node][d] {
                    s += w[d] * x[m];
                }
            }
            y[node] = s;
        }
    }

    pub(crate) fn band_matrix(&self, shift: f64) -> BandLu {
        let (bl, bu) = self.bandwidth;
        let mut m = BandLu::zeros(self.len(), bl, bu);
        for node in 0..self.len() {
            let (diag, w) = self.stencil(node);
            m.add(node, node, diag - shift);
            for d in 0..4 {
                if let Some(nb) = self.neighbors[node][d] {
                    m.add(node, nb, w[d]);
                }
            }
        }
        m
    }
}
