//! Common refinement of two triangulations of the same planar domain,
//! point location and segment clipping.
//!
//! The overlay is built by an advancing front over the facets of the first
//! mesh. Each facet inherits candidate facets of the second mesh from an
//! already processed neighbour and grows its intersecting set through the
//! adjacency of the second mesh, so every facet pair that is examined lies
//! near the front and the total work stays proportional to the overlay size.

pub mod quadrature;

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::{orient2d, Point, SurfaceMesh};

/// Relative tolerance for incidence decisions (times a local length).
pub const REL_TOL: f64 = 1e-12;
/// Relative tolerance for area conservation of the overlay.
pub const AREA_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlayCell {
    /// Counterclockwise triangle.
    pub points: [Point; 3],
    pub parent_a: usize,
    pub parent_b: usize,
}

impl OverlayCell {
    pub fn area(&self) -> f64 {
        0.5 * orient2d(&self.points[0], &self.points[1], &self.points[2])
    }

    pub fn centroid(&self) -> Point {
        Point::from((self.points[0].coords + self.points[1].coords + self.points[2].coords) / 3.0)
    }
}

#[derive(Clone, Debug)]
pub struct Overlay {
    cells: Vec<OverlayCell>,
    tolerance: f64,
    discarded_area: f64,
    candidate_tests: usize,
}

impl Overlay {
    /// Intersects two triangulations of the same domain.
    pub fn intersect(a: &SurfaceMesh, b: &SurfaceMesh) -> Result<Self> {
        intersect_meshes(a, b)
    }

    pub fn cells(&self) -> &[OverlayCell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Relative geometric tolerance used for the construction.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(OverlayCell::area).sum()
    }

    /// Area of the sliver triangles dropped during construction.
    pub fn discarded_area(&self) -> f64 {
        self.discarded_area
    }

    /// Number of facet pairs tested for intersection, a deterministic
    /// measure of the construction work.
    pub fn candidate_tests(&self) -> usize {
        self.candidate_tests
    }

    /// One line per cell: `xA yA xB yB xC yC parentA parentB`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.cells {
            let [p, q, r] = c.points;
            let _ = writeln!(
                s,
                "{:?} {:?} {:?} {:?} {:?} {:?} {} {}",
                p.x, p.y, q.x, q.y, r.x, r.y, c.parent_a, c.parent_b
            );
        }
        s
    }
}

fn scale_of(tri: &[Point; 3]) -> f64 {
    (0..3)
        .map(|k| (tri[(k + 1) % 3] - tri[k]).norm())
        .fold(0.0, f64::max)
}

/// Closed triangles intersect, up to `tol`, by the separating axis test.
fn triangles_touch(s: &[Point; 3], t: &[Point; 3], tol: f64) -> bool {
    for (tri, other) in [(s, t), (t, s)] {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let len = (b - a).norm();
            // other triangle entirely on the outer side of edge (a, b)
            if other.iter().all(|p| orient2d(&a, &b, p) < -tol * len) {
                return false;
            }
        }
    }
    true
}

/// Convex polygon `s ∩ t` for counterclockwise triangles (Sutherland-Hodgman).
fn clip_triangles(s: &[Point; 3], t: &[Point; 3], tol: f64) -> Vec<Point> {
    let mut poly: Vec<Point> = s.to_vec();
    for k in 0..3 {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        let len = (b - a).norm();
        let dist = |p: &Point| orient2d(&a, &b, p) / len;
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (dp, dq) = (dist(&p), dist(&q));
            let (p_in, q_in) = (dp >= -tol, dq >= -tol);
            if p_in {
                out.push(p);
            }
            if p_in != q_in && (dp.abs() > tol || dq.abs() > tol) {
                let s = dp / (dp - dq);
                out.push(p + (q - p) * s);
            }
        }
        poly = out;
        if poly.len() < 3 {
            return Vec::new();
        }
    }
    poly
}

/// Snaps polygon vertices onto nearby triangle vertices and edges, then
/// removes duplicate and collinear vertices.
fn clean_polygon(poly: Vec<Point>, s: &[Point; 3], t: &[Point; 3], tol: f64) -> Vec<Point> {
    let corners: Vec<Point> = s.iter().chain(t.iter()).copied().collect();
    let snapped = poly.into_iter().map(|p| {
        if let Some(c) = corners.iter().find(|c| (*c - p).norm() <= tol) {
            return *c;
        }
        for tri in [s, t] {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let d = b - a;
                let u = (p - a).dot(&d) / d.norm_squared();
                let foot = a + d * u;
                if (0.0..=1.0).contains(&u) && (foot - p).norm() <= tol {
                    return foot;
                }
            }
        }
        p
    });
    let mut out: Vec<Point> = Vec::new();
    for p in snapped {
        if out.last().is_none_or(|q| (q - p).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= tol {
        out.pop();
    }
    // drop vertices on the line through their neighbours
    let mut changed = true;
    while changed && out.len() >= 3 {
        changed = false;
        let n = out.len();
        for i in 0..n {
            let (p, q, r) = (out[(i + n - 1) % n], out[i], out[(i + 1) % n]);
            if orient2d(&p, &q, &r).abs() <= tol * (r - p).norm() {
                out.remove(i);
                changed = true;
                break;
            }
        }
    }
    out
}

fn facet_neighbors(mesh: &SurfaceMesh, f: usize) -> impl Iterator<Item = usize> + '_ {
    mesh.facet_edges(f).into_iter().flat_map(move |(e, _)| {
        mesh.edge_facets(e)
            .iter()
            .map(|&(g, _)| g)
            .filter(move |&g| g != f)
            .collect::<Vec<_>>()
    })
}

/// Builds the overlay of `a` and `b` by an advancing front over the facets of `a`.
pub fn intersect_meshes(a: &SurfaceMesh, b: &SurfaceMesh) -> Result<Overlay> {
    let area_a = a.total_area();
    let area_b = b.total_area();
    if (area_a - area_b).abs() > AREA_TOL * area_a.max(area_b) {
        return Err(Error::DomainMismatch {
            area_a,
            area_b,
            overlay: f64::NAN,
        });
    }
    let locator_b = Locator::new(b);
    let mut touching: Vec<Option<Vec<usize>>> = vec![None; a.n_facets()];
    let mut cells = Vec::new();
    let mut discarded_area = 0.0;
    let mut tests = 0usize;
    let mut mark = vec![usize::MAX; b.n_facets()];

    let mut front: VecDeque<usize> = VecDeque::new();
    let mut queued = vec![false; a.n_facets()];
    for start in 0..a.n_facets() {
        if queued[start] {
            continue;
        }
        queued[start] = true;
        front.push_back(start);
        while let Some(fa) = front.pop_front() {
            let ta = a.facet_points(fa);
            let tol = REL_TOL * scale_of(&ta);

            // seeds: facets of b touching an already processed neighbour
            let mut seeds: Vec<usize> = Vec::new();
            for g in facet_neighbors(a, fa) {
                if let Some(list) = &touching[g] {
                    seeds.extend(list.iter().copied());
                }
                if !queued[g] {
                    queued[g] = true;
                    front.push_back(g);
                }
            }
            if seeds.is_empty() {
                if let Ok((fb, _)) = locator_b.locate(&a.facet_centroid(fa)) {
                    seeds.push(fb);
                }
            }

            let mut found = Vec::new();
            let mut queue: VecDeque<usize> = VecDeque::new();
            for s in seeds {
                if mark[s] != fa {
                    mark[s] = fa;
                    queue.push_back(s);
                }
            }
            while let Some(fb) = queue.pop_front() {
                let tb = b.facet_points(fb);
                tests += 1;
                let tol_pair = tol.max(REL_TOL * scale_of(&tb));
                if !triangles_touch(&ta, &tb, tol_pair) {
                    continue;
                }
                found.push(fb);
                for g in facet_neighbors(b, fb) {
                    if mark[g] != fa {
                        mark[g] = fa;
                        queue.push_back(g);
                    }
                }
            }
            found.sort_unstable();

            for &fb in &found {
                let tb = b.facet_points(fb);
                let tol_pair = tol.max(REL_TOL * scale_of(&tb));
                let poly = clean_polygon(clip_triangles(&ta, &tb, tol_pair), &ta, &tb, tol_pair);
                if poly.len() < 3 {
                    continue;
                }
                let min_parent = a.facet_area(fa).min(b.facet_area(fb));
                for k in 1..poly.len() - 1 {
                    let cell = OverlayCell {
                        points: [poly[0], poly[k], poly[k + 1]],
                        parent_a: fa,
                        parent_b: fb,
                    };
                    let area = cell.area();
                    if area <= REL_TOL * min_parent {
                        discarded_area += area.abs();
                    } else {
                        cells.push(cell);
                    }
                }
            }
            touching[fa] = Some(found);
        }
    }

    if cells.is_empty() {
        return Err(Error::EmptyOverlay);
    }
    let overlay = Overlay {
        cells,
        tolerance: REL_TOL,
        discarded_area,
        candidate_tests: tests,
    };
    let total = overlay.total_area();
    if (total - area_a).abs() > AREA_TOL * area_a {
        return Err(Error::DomainMismatch {
            area_a,
            area_b,
            overlay: total,
        });
    }
    Ok(overlay)
}

/// Uniform bucket grid over facet bounding boxes for point location.
#[derive(Clone, Debug)]
pub struct Locator<'a> {
    mesh: &'a SurfaceMesh,
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a SurfaceMesh) -> Self {
        let (mut lo, mut hi) = (mesh.node(0), mesh.node(0));
        for p in mesh.coords() {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let per_side = ((mesh.n_facets() as f64).sqrt().ceil() as usize).max(1);
        let cell = span / per_side as f64;
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut loc = Self {
            mesh,
            lo,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for f in 0..mesh.n_facets() {
            let pts = mesh.facet_points(f);
            let (bl, bh) = bbox(&pts);
            let (i0, j0) = loc.bucket(&bl);
            let (i1, j1) = loc.bucket(&bh);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(f);
                }
            }
        }
        loc.buckets = buckets;
        loc
    }

    fn bucket(&self, p: &Point) -> (usize, usize) {
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        (
            clamp((p.x - self.lo.x) / self.cell, self.nx),
            clamp((p.y - self.lo.y) / self.cell, self.ny),
        )
    }

    /// Facet whose closure contains `p`, with barycentric coordinates.
    pub fn locate(&self, p: &Point) -> Result<(usize, [f64; 3])> {
        let (i, j) = self.bucket(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &f in &self.buckets[j * self.nx + i] {
            let b = self.mesh.barycentric(f, p);
            let m = b[0].min(b[1]).min(b[2]);
            if best.is_none_or(|(_, _, bm)| m > bm) {
                best = Some((f, b, m));
            }
        }
        match best {
            Some((f, b, m)) if m >= -1e-10 => Ok((f, b)),
            _ => Err(Error::PointOutsideDomain { x: p.x, y: p.y }),
        }
    }

    /// Facets whose bounding box meets the bounding box of `pts`.
    fn candidates(&self, pts: &[Point]) -> Vec<usize> {
        let (bl, bh) = bbox(pts);
        let (i0, j0) = self.bucket(&bl);
        let (i1, j1) = self.bucket(&bh);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend(self.buckets[j * self.nx + i].iter().copied());
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// See [`clip_segment`].
    pub fn clip_segment(&self, p0: &Point, p1: &Point) -> Result<Vec<SegmentPiece>> {
        let d = p1 - p0;
        let len = d.norm();
        if len == 0.0 {
            let (f, _) = self.locate(p0)?;
            return Ok(vec![SegmentPiece {
                t0: 0.0,
                t1: 1.0,
                start: *p0,
                end: *p1,
                facet: f,
            }]);
        }
        let mut intervals: Vec<(f64, f64, usize)> = Vec::new();
        for f in self.candidates(&[*p0, *p1]) {
            let tri = self.mesh.facet_points(f);
            let tol = REL_TOL * scale_of(&tri).max(len);
            if let Some((t0, t1)) = segment_in_triangle(&tri, p0, p1, tol) {
                if (t1 - t0) * len > tol {
                    intervals.push((t0, t1, f));
                }
            }
        }
        let mut breaks: Vec<f64> = vec![0.0, 1.0];
        for &(t0, t1, _) in &intervals {
            breaks.push(t0);
            breaks.push(t1);
        }
        breaks.sort_by(f64::total_cmp);
        let ttol = REL_TOL * 10.0;
        breaks.dedup_by(|x, y| (*x - *y).abs() <= ttol);
        *breaks.last_mut().expect("nonempty") = 1.0;

        let mut pieces: Vec<SegmentPiece> = Vec::new();
        for w in breaks.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let mid = 0.5 * (s0 + s1);
            let facet = intervals
                .iter()
                .filter(|&&(t0, t1, _)| t0 <= mid && mid <= t1)
                .map(|&(_, _, f)| f)
                .min()
                .ok_or(Error::SegmentExitsDomain { t: mid })?;
            match pieces.last_mut() {
                Some(last) if last.facet == facet => {
                    last.t1 = s1;
                    last.end = p0 + d * s1;
                }
                _ => pieces.push(SegmentPiece {
                    t0: s0,
                    t1: s1,
                    start: p0 + d * s0,
                    end: p0 + d * s1,
                    facet,
                }),
            }
        }
        if let Some(last) = pieces.last_mut() {
            last.end = *p1;
        }
        if let Some(first) = pieces.first_mut() {
            first.start = *p0;
        }
        Ok(pieces)
    }
}

fn bbox(pts: &[Point]) -> (Point, Point) {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

/// Parameter interval of `p0 + t (p1 - p0)`, `t ∈ [0, 1]`, inside the closed
/// counterclockwise triangle (Cyrus-Beck).
fn segment_in_triangle(tri: &[Point; 3], p0: &Point, p1: &Point, tol: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let len = (b - a).norm();
        // signed distance to the edge line, inside positive
        let g0 = orient2d(&a, &b, p0) / len + tol;
        let g1 = orient2d(&a, &b, p1) / len + tol;
        if g0 < 0.0 && g1 < 0.0 {
            return None;
        }
        if g0 < 0.0 {
            lo = lo.max(g0 / (g0 - g1));
        } else if g1 < 0.0 {
            hi = hi.min(g0 / (g0 - g1));
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// A piece of a clipped segment lying in one facet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentPiece {
    pub t0: f64,
    pub t1: f64,
    pub start: Point,
    pub end: Point,
    pub facet: usize,
}

impl SegmentPiece {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// Facet whose closure contains `p` plus barycentric coordinates; on shared
/// edges and vertices any incident facet may be returned.
pub fn locate_point(mesh: &SurfaceMesh, p: &Point) -> Result<(usize, [f64; 3])> {
    Locator::new(mesh).locate(p)
}

/// Splits the segment `[p0, p1]` into ordered pieces, each inside one facet.
/// A segment running along an edge is assigned to the lower-numbered facet.
pub fn clip_segment(mesh: &SurfaceMesh, p0: &Point, p1: &Point) -> Result<Vec<SegmentPiece>> {
    Locator::new(mesh).clip_segment(p0, p1)
}
