//! Topology-preserving thinning and centerline graph decomposition.
//!
//! Thinning peels border pixels in four directional sub-iterations (north,
//! south, east, west) until nothing changes. A pixel is deleted only if it is
//! simple for the (8, 4) topology, i.e. its 8-connectivity number is 1, and
//! it is not an end point. Candidates for one sub-iteration are collected
//! first and then deleted in raster order, re-checking simplicity against the
//! partially updated raster; each single deletion of a simple pixel preserves
//! topology, so the whole sequence does too.

use serde::{Deserialize, Serialize};

use crate::raster::{BinaryMask, Pixel, Spacing};

/// Ring of 8 neighbors starting east and turning towards north (y grows down).
const RING: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Sub-iteration schedule: north, south, east, west border pixels.
const DIRECTIONS: [(isize, isize); 4] = [(0, -1), (0, 1), (1, 0), (-1, 0)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    mask: BinaryMask,
    points: Vec<Pixel>,
}

impl Skeleton {
    fn from_mask(mask: BinaryMask) -> Self {
        let points = mask.pixels().collect();
        Self { mask, points }
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    /// Centerline pixels in raster order.
    pub fn points(&self) -> &[Pixel] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.mask.spacing()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

struct Grid<'a> {
    bits: &'a [bool],
    w: isize,
    h: isize,
}

impl Grid<'_> {
    fn at(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && x < self.w && y < self.h && self.bits[(y * self.w + x) as usize]
    }

    fn ring(&self, x: isize, y: isize) -> [bool; 8] {
        let mut r = [false; 8];
        for (k, &(dx, dy)) in RING.iter().enumerate() {
            r[k] = self.at(x + dx, y + dy);
        }
        r
    }
}

/// Yokoi 8-connectivity number of a neighborhood ring.
fn connectivity_number(ring: &[bool; 8]) -> u32 {
    let off = |k: usize| u32::from(!ring[k % 8]);
    [0usize, 2, 4, 6]
        .iter()
        .map(|&k| off(k) - off(k) * off(k + 1) * off(k + 2))
        .sum()
}

fn neighbor_count(ring: &[bool; 8]) -> usize {
    ring.iter().filter(|&&b| b).count()
}

/// Whether deleting the pixel with this neighborhood preserves topology.
pub fn is_simple(ring: &[bool; 8]) -> bool {
    connectivity_number(ring) == 1
}

fn deletable(grid: &Grid<'_>, x: isize, y: isize) -> bool {
    let ring = grid.ring(x, y);
    neighbor_count(&ring) >= 2 && is_simple(&ring)
}

fn thin_in_place(bits: &mut [bool], w: usize, h: usize) {
    let (wi, hi) = (w as isize, h as isize);
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for &(dx, dy) in &DIRECTIONS {
            candidates.clear();
            {
                let grid = Grid { bits, w: wi, h: hi };
                for y in 0..hi {
                    for x in 0..wi {
                        if grid.at(x, y) && !grid.at(x + dx, y + dy) && deletable(&grid, x, y) {
                            candidates.push((x, y));
                        }
                    }
                }
            }
            for &(x, y) in &candidates {
                let ok = deletable(&Grid { bits, w: wi, h: hi }, x, y);
                if ok {
                    bits[(y * wi + x) as usize] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Thins `mask` to a one-pixel-wide centerline.
pub fn skeletonize(mask: &BinaryMask) -> Skeleton {
    let mut bits = mask.bits().to_vec();
    thin_in_place(&mut bits, mask.width(), mask.height());
    Skeleton::from_mask(BinaryMask::from_raw(mask.width(), mask.height(), bits, mask.spacing()))
}

/// Thins `mask` and removes terminal branches shorter than `prune_spurs_um`.
pub fn skeletonize_pruned(mask: &BinaryMask, prune_spurs_um: f64) -> Skeleton {
    let skel = skeletonize(mask);
    if prune_spurs_um > 0.0 {
        prune_spurs(&skel, prune_spurs_um)
    } else {
        skel
    }
}

/// An ordered 8-connected centerline path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub pixels: Vec<Pixel>,
    pub length_um: f64,
    #[serde(default)]
    pub closed: bool,
}

impl Segment {
    pub fn new(pixels: Vec<Pixel>, spacing: Spacing, closed: bool) -> Self {
        let length_um = path_length(&pixels, spacing);
        Self {
            pixels,
            length_um,
            closed,
        }
    }

    /// Pixels without the repeated closing pixel of a loop.
    pub fn unique_pixels(&self) -> &[Pixel] {
        if self.closed && self.pixels.len() > 1 {
            &self.pixels[..self.pixels.len() - 1]
        } else {
            &self.pixels
        }
    }
}

fn step_um(a: Pixel, b: Pixel, spacing: Spacing) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64) * spacing.x;
    let dy = (a.1 as f64 - b.1 as f64) * spacing.y;
    dx.hypot(dy)
}

fn path_length(pixels: &[Pixel], spacing: Spacing) -> f64 {
    pixels.windows(2).map(|p| step_um(p[0], p[1], spacing)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonGraph {
    pub segments: Vec<Segment>,
    pub branch_points: Vec<Pixel>,
    pub end_points: Vec<Pixel>,
    pub spacing: Spacing,
}

/// On-disk shape of a graph: `{segments: [[[x,y],...]], branch_points, end_points}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub segments: Vec<Vec<[usize; 2]>>,
    pub branch_points: Vec<[usize; 2]>,
    pub end_points: Vec<[usize; 2]>,
}

impl SkeletonGraph {
    pub fn empty(spacing: Spacing) -> Self {
        Self {
            segments: Vec::new(),
            branch_points: Vec::new(),
            end_points: Vec::new(),
            spacing,
        }
    }

    /// Distinct pixels covered by segments.
    pub fn segment_pixel_count(&self) -> usize {
        self.segments.iter().map(|s| s.unique_pixels().len()).sum()
    }

    pub fn to_file(&self) -> GraphFile {
        let conv = |p: &Pixel| [p.0, p.1];
        GraphFile {
            segments: self
                .segments
                .iter()
                .map(|s| s.pixels.iter().map(conv).collect())
                .collect(),
            branch_points: self.branch_points.iter().map(conv).collect(),
            end_points: self.end_points.iter().map(conv).collect(),
        }
    }
}

/// Splits a skeleton into segments between end and branch points.
///
/// Pixels with one skeleton neighbor are end points, two are interior, three
/// or more are branch points. Segments are maximal runs of non-branch pixels;
/// end points belong to their segment, branch points to none. A loop without
/// end or branch points becomes one closed segment whose last pixel repeats
/// the first. An isolated pixel is a zero-length segment.
pub fn decompose(skel: &Skeleton) -> SkeletonGraph {
    let mask = skel.mask();
    let (w, h) = mask.dims();
    let grid = &Grid {
        bits: mask.bits(),
        w: w as isize,
        h: h as isize,
    };
    let idx = |p: Pixel| p.1 * w + p.0;
    let mut degree = vec![0u8; w * h];
    for &p in skel.points() {
        degree[idx(p)] = neighbor_count(&grid.ring(p.0 as isize, p.1 as isize)) as u8;
    }
    let degree = &degree;
    let is_branch = move |p: Pixel| degree[idx(p)] >= 3;

    // 4-neighbors first so diagonal shortcuts are never taken over a direct step
    const ORDER: [usize; 8] = [0, 2, 4, 6, 1, 3, 5, 7];
    let neighbors = move |p: Pixel| {
        ORDER.iter().filter_map(move |&k| {
            let (dx, dy) = RING[k];
            let (nx, ny) = (p.0 as isize + dx, p.1 as isize + dy);
            grid.at(nx, ny).then_some((nx as usize, ny as usize))
        })
    };

    let mut graph = SkeletonGraph::empty(skel.spacing());
    let mut visited = vec![false; w * h];

    let walk = |start: Pixel, visited: &mut Vec<bool>| -> Vec<Pixel> {
        let mut path = vec![start];
        visited[idx(start)] = true;
        let mut cur = start;
        while let Some(next) = neighbors(cur).find(|&n| !is_branch(n) && !visited[idx(n)]) {
            visited[idx(next)] = true;
            path.push(next);
            cur = next;
        }
        path
    };

    for &p in skel.points() {
        match degree[idx(p)] {
            1 => graph.end_points.push(p),
            d if d >= 3 => graph.branch_points.push(p),
            _ => {}
        }
    }

    for &p in skel.points() {
        if is_branch(p) || visited[idx(p)] {
            continue;
        }
        let touches_branch = neighbors(p).any(is_branch);
        if degree[idx(p)] <= 1 || touches_branch {
            let path = walk(p, &mut visited);
            graph.segments.push(Segment::new(path, skel.spacing(), false));
        }
    }

    // whatever remains lies on loops free of end and branch points
    for &p in skel.points() {
        if is_branch(p) || visited[idx(p)] {
            continue;
        }
        let mut path = walk(p, &mut visited);
        let closes = path.len() >= 3 && {
            let last = *path.last().expect("non-empty");
            last.0.abs_diff(p.0) <= 1 && last.1.abs_diff(p.1) <= 1
        };
        if closes {
            path.push(p);
        }
        graph.segments.push(Segment::new(path, skel.spacing(), closes));
    }
    graph
}

/// Removes terminal segments (an end point on one side, a branch point on the
/// other) shorter than `min_length_um`, then re-thins, until none remain.
/// Segment length counts the step onto the branch point.
pub fn prune_spurs(skel: &Skeleton, min_length_um: f64) -> Skeleton {
    let mut current = skel.clone();
    loop {
        let graph = decompose(&current);
        let mask = current.mask();
        let branch_neighbor = |p: Pixel| -> Option<Pixel> {
            graph
                .branch_points
                .iter()
                .copied()
                .filter(|b| b.0.abs_diff(p.0) <= 1 && b.1.abs_diff(p.1) <= 1 && *b != p)
                .min_by(|a, b| {
                    step_um(*a, p, mask.spacing()).total_cmp(&step_um(*b, p, mask.spacing()))
                })
        };
        let is_end = |p: Pixel| graph.end_points.binary_search_by_key(&(p.1, p.0), |e| (e.1, e.0)).is_ok();
        let mut bits = mask.bits().to_vec();
        let mut removed = false;
        for seg in graph.segments.iter().filter(|s| !s.closed) {
            let first = seg.pixels[0];
            let last = *seg.pixels.last().expect("segments are non-empty");
            let attach = if is_end(first) {
                branch_neighbor(last)
            } else if is_end(last) {
                branch_neighbor(first)
            } else {
                None
            };
            let Some(b) = attach else { continue };
            let tip = if is_end(first) { last } else { first };
            let length = seg.length_um + step_um(tip, b, mask.spacing());
            if length < min_length_um {
                for &(x, y) in &seg.pixels {
                    bits[y * mask.width() + x] = false;
                }
                removed = true;
            }
        }
        if !removed {
            return current;
        }
        thin_in_place(&mut bits, mask.width(), mask.height());
        current = Skeleton::from_mask(BinaryMask::from_raw(mask.width(), mask.height(), bits, mask.spacing()));
    }
}

/// True when no 2x2 block of the skeleton is fully set.
pub fn is_thin(mask: &BinaryMask) -> bool {
    let (w, h) = mask.dims();
    for y in 0..h.saturating_sub(1) {
        for x in 0..w.saturating_sub(1) {
            if mask.get(x, y) && mask.get(x + 1, y) && mask.get(x, y + 1) && mask.get(x + 1, y + 1) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{count_components, count_holes};

    fn sp() -> Spacing {
        Spacing::isotropic(1.0)
    }

    #[test]
    fn thin_line_is_unchanged() {
        let m = BinaryMask::from_fn(30, 5, sp(), |x, y| y == 2 && (5..25).contains(&x));
        assert_eq!(skeletonize(&m).mask(), &m);
    }

    #[test]
    fn empty_mask_gives_empty_skeleton() {
        let m = BinaryMask::empty(10, 10, sp());
        assert!(skeletonize(&m).is_empty());
        let g = decompose(&skeletonize(&m));
        assert!(g.segments.is_empty() && g.branch_points.is_empty());
    }

    #[test]
    fn filled_rectangle_collapses_to_middle_row() {
        let m = BinaryMask::from_fn(25, 7, sp(), |x, y| (2..23).contains(&x) && (2..5).contains(&y));
        let s = skeletonize(&m);
        assert!(s.points().iter().all(|&(_, y)| y == 3), "{:?}", s.points());
        assert!(s.len() >= 19 && s.len() <= 21);
    }

    #[test]
    fn annulus_becomes_single_loop() {
        let (c, ro, ri) = (20.0, 15.0, 8.0);
        let m = BinaryMask::from_fn(41, 41, sp(), |x, y| {
            let d = ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt();
            d < ro && d >= ri
        });
        let s = skeletonize(&m);
        assert_eq!(count_components(s.mask()), 1);
        assert_eq!(count_holes(s.mask()), 1);
        assert_eq!(count_holes(&m), 1);
        assert!(is_thin(s.mask()));
        let g = decompose(&s);
        assert_eq!(g.segments.len(), 1);
        assert!(g.end_points.is_empty() && g.branch_points.is_empty());
        let seg = &g.segments[0];
        assert!(seg.closed);
        assert_eq!(seg.pixels.first(), seg.pixels.last());
    }

    #[test]
    fn straight_line_decomposes_to_one_segment() {
        let m = BinaryMask::from_fn(20, 3, sp(), |x, y| y == 1 && (2..18).contains(&x));
        let g = decompose(&skeletonize(&m));
        assert_eq!(g.segments.len(), 1);
        assert_eq!(g.end_points.len(), 2);
        assert!(g.branch_points.is_empty());
        assert_eq!(g.segments[0].pixels.len(), 16);
        assert!((g.segments[0].length_um - 15.0).abs() < 1e-12);
    }

    fn y_shape() -> BinaryMask {
        let mut m = BinaryMask::empty(41, 41, sp());
        m.set(20, 20, true);
        for i in 1..=10 {
            m.set(20, 20 - i, true);
            m.set(20 - i, 20 + i, true);
            m.set(20 + i, 20 + i, true);
        }
        m
    }

    #[test]
    fn y_shape_has_three_arms() {
        let m = y_shape();
        let s = skeletonize(&m);
        assert_eq!(s.mask(), &m);
        let g = decompose(&s);
        assert_eq!(g.segments.len(), 3);
        assert_eq!(g.end_points.len(), 3);
        assert_eq!(g.branch_points, vec![(20, 20)]);
        for seg in &g.segments {
            assert_eq!(seg.pixels.len(), 10);
        }
        assert_eq!(g.segment_pixel_count() + g.branch_points.len(), s.len());
    }

    #[test]
    fn isolated_pixel_is_zero_length_segment() {
        let mut m = BinaryMask::empty(5, 5, sp());
        m.set(2, 2, true);
        let g = decompose(&skeletonize(&m));
        assert_eq!(g.segments.len(), 1);
        assert_eq!(g.segments[0].length_um, 0.0);
    }

    #[test]
    fn short_spurs_are_pruned() {
        let mut m = BinaryMask::from_fn(40, 12, sp(), |x, y| y == 6 && (3..37).contains(&x));
        m.set(20, 5, true);
        m.set(20, 4, true);
        let s = skeletonize(&m);
        assert_eq!(decompose(&s).segments.len(), 3);
        let pruned = prune_spurs(&s, 4.0);
        let g = decompose(&pruned);
        assert_eq!(g.segments.len(), 1);
        assert_eq!(g.end_points, vec![(3, 6), (36, 6)]);
        assert!(!pruned.mask().get(20, 4));
        assert_eq!(prune_spurs(&s, 0.5).len(), s.len());
        // the two long arms are terminal too, but far above the threshold
        assert!(prune_spurs(&s, 10.0).len() >= 30);
    }

    #[test]
    fn connectivity_number_cases() {
        // isolated, end, interior line, interior of blob
        assert_eq!(connectivity_number(&[false; 8]), 0);
        assert_eq!(connectivity_number(&[true, false, false, false, false, false, false, false]), 1);
        assert_eq!(connectivity_number(&[true, false, false, false, true, false, false, false]), 2);
        assert_eq!(connectivity_number(&[true; 8]), 0);
    }

    #[test]
    fn graph_file_shape() {
        let g = decompose(&skeletonize(&y_shape()));
        let json = serde_json::to_value(g.to_file()).unwrap();
        assert_eq!(json["branch_points"], serde_json::json!([[20, 20]]));
        assert_eq!(json["segments"].as_array().unwrap().len(), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Unions of ellipses with optional round holes on a 40x40 canvas.
        fn blob() -> impl Strategy<Value = BinaryMask> {
            let ellipse = (6.0..34.0f64, 6.0..34.0f64, 2.0..9.0f64, 0.4..1.0f64);
            let hole = (6.0..34.0f64, 6.0..34.0f64, 1.0..3.0f64);
            (prop::collection::vec(ellipse, 1..5), prop::collection::vec(hole, 0..3)).prop_map(|(es, hs)| {
                BinaryMask::from_fn(40, 40, sp(), |x, y| {
                    let (x, y) = (x as f64, y as f64);
                    es.iter().any(|&(cx, cy, r, e)| ((x - cx) / r).powi(2) + ((y - cy) / (r * e)).powi(2) <= 1.0)
                        && !hs.iter().any(|&(cx, cy, r)| (x - cx).powi(2) + (y - cy).powi(2) <= r * r)
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn skeleton_invariants(m in blob()) {
                let s = skeletonize(&m);
                prop_assert!(s.points().iter().all(|&(x, y)| m.get(x, y)));
                prop_assert!(is_thin(s.mask()));
                prop_assert_eq!(count_components(s.mask()), count_components(&m));
                prop_assert_eq!(count_holes(s.mask()), count_holes(&m));
            }

            #[test]
            fn skeletonize_is_idempotent(m in blob()) {
                let s = skeletonize(&m);
                let again = skeletonize(s.mask());
                prop_assert_eq!(again.mask(), s.mask());
            }

            // The N, S, E, W schedule is not symmetric under rotation: a blob
            // may collapse to a point one way and a short line the other. The
            // topology of the result is what survives.
            #[test]
            fn rotation_preserves_skeleton_topology(m in blob()) {
                let a = skeletonize(&m.rotate90());
                let b = skeletonize(&m);
                let b = b.mask().rotate90();
                prop_assert_eq!(count_components(a.mask()), count_components(&b));
                prop_assert_eq!(count_holes(a.mask()), count_holes(&b));
            }
        }
    }
}
