//! Lattice polytopes: exact convex hulls, faces, volumes and lattice points.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use crate::error::{input, internal, Error, Result};
use crate::lattice::{
    affine_lattice_basis, coordinates_in_basis, cross, det, fdiv, floor_rat, for_each_combination, rank, IntVector,
    Rational,
};

/// A facet of a full-dimensional polytope.
#[derive(Clone, Debug)]
pub struct Facet {
    /// Primitive outer normal.
    pub normal: IntVector,
    /// `max <normal, x>` over the polytope.
    pub offset: i64,
    /// Vertex indices; in cyclic order for 3-polytopes.
    pub vertices: Vec<usize>,
    /// Normalized volume of the facet in its own lattice.
    pub volume: i64,
}

#[derive(Debug)]
struct Embedding {
    base: IntVector,
    basis: Vec<IntVector>,
    image: LatticePolytope,
}

#[derive(Debug, Default)]
struct Geometry {
    facets: Vec<Facet>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

/// Convex hull of finitely many integer points, stored by its lexicographically
/// sorted vertex list.
pub struct LatticePolytope {
    vertices: Vec<IntVector>,
    ambient: usize,
    dim: usize,
    geom: OnceLock<Arc<Geometry>>,
    embed: OnceLock<Arc<Embedding>>,
}

impl Clone for LatticePolytope {
    fn clone(&self) -> Self {
        let geom = OnceLock::new();
        if let Some(g) = self.geom.get() {
            let _ = geom.set(g.clone());
        }
        let embed = OnceLock::new();
        if let Some(e) = self.embed.get() {
            let _ = embed.set(e.clone());
        }
        LatticePolytope { vertices: self.vertices.clone(), ambient: self.ambient, dim: self.dim, geom, embed }
    }
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl Eq for LatticePolytope {}

impl Hash for LatticePolytope {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vertices.hash(state);
    }
}

impl PartialOrd for LatticePolytope {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LatticePolytope {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.vertices.cmp(&other.vertices)
    }
}

impl fmt::Debug for LatticePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conv{:?}", self.vertices)
    }
}

/// Convex hull of the given integer points. Degenerate sets are hulled inside
/// their affine span.
pub fn hull(points: &[IntVector]) -> Result<LatticePolytope> {
    let Some(first) = points.first() else {
        return input("hull of an empty point set");
    };
    let d = first.dim();
    if points.iter().any(|p| p.dim() != d) {
        return input("points of mixed dimension");
    }
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let diffs: Vec<IntVector> = pts.iter().map(|p| *p - pts[0]).collect();
    let k = rank(&diffs);
    if k == 0 {
        return Ok(LatticePolytope::raw(vec![pts[0]], d, 0));
    }
    if k == d {
        return full_hull(&pts);
    }
    if k == 1 {
        let dir = diffs.iter().find(|v| !v.is_zero()).unwrap();
        let lo = pts.iter().min_by_key(|p| p.dot(dir)).unwrap();
        let hi = pts.iter().max_by_key(|p| p.dot(dir)).unwrap();
        let mut vs = vec![*lo, *hi];
        vs.sort_unstable();
        return Ok(LatticePolytope::raw(vs, d, 1));
    }
    let (base, basis) = affine_lattice_basis(&pts)?;
    let mut local = Vec::with_capacity(pts.len());
    for p in &pts {
        match coordinates_in_basis(&basis, &base, p) {
            Some(c) => local.push(c),
            None => return internal("point outside its own affine lattice"),
        }
    }
    let image = full_hull(&local)?;
    let mut vs: Vec<IntVector> = image.vertices.iter().map(|c| lift(&base, &basis, c)).collect();
    vs.sort_unstable();
    let p = LatticePolytope::raw(vs, d, k);
    let _ = p.embed.set(Arc::new(Embedding { base, basis, image }));
    Ok(p)
}

fn lift(base: &IntVector, basis: &[IntVector], c: &IntVector) -> IntVector {
    let mut x = *base;
    for (i, b) in basis.iter().enumerate() {
        x = x + *b * c[i];
    }
    x
}

fn full_hull(pts: &[IntVector]) -> Result<LatticePolytope> {
    let d = pts[0].dim();
    match d {
        1 => {
            let lo = *pts.iter().min().unwrap();
            let hi = *pts.iter().max().unwrap();
            let p = LatticePolytope::raw(vec![lo, hi], 1, 1);
            let facets = vec![
                Facet { normal: IntVector::new(&[-1]), offset: -lo[0], vertices: vec![0], volume: 1 },
                Facet { normal: IntVector::new(&[1]), offset: hi[0], vertices: vec![1], volume: 1 },
            ];
            let _ = p.geom.set(Arc::new(Geometry { facets, edges: vec![], neighbors: vec![vec![1], vec![0]] }));
            Ok(p)
        }
        2 => Ok(polygon_from_cycle(&convex_cycle_2d(pts))),
        3 => hull3(pts),
        _ => input(format!("full-dimensional hulls in dimension {d} are not supported")),
    }
}

/// Counter-clockwise cycle of the vertices of a planar point set (monotone chain;
/// collinear boundary points are dropped).
fn convex_cycle_2d(pts: &[IntVector]) -> Vec<IntVector> {
    let mut p = pts.to_vec();
    p.sort_unstable();
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let turn = |o: &IntVector, a: &IntVector, b: &IntVector| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<IntVector> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(*q);
    }
    let mut upper: Vec<IntVector> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(*q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Twice the signed area of a planar cycle.
fn shoelace(cycle: &[IntVector], i: usize, j: usize) -> i64 {
    let n = cycle.len();
    let mut s = 0;
    for k in 0..n {
        let a = &cycle[k];
        let b = &cycle[(k + 1) % n];
        s += a[i] * b[j] - a[j] * b[i];
    }
    s
}

fn polygon_from_cycle(cycle: &[IntVector]) -> LatticePolytope {
    let mut vs = cycle.to_vec();
    vs.sort_unstable();
    let index = |v: &IntVector| vs.binary_search(v).unwrap();
    let n = cycle.len();
    let mut facets = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    let mut neighbors = vec![Vec::new(); n];
    for k in 0..n {
        let a = cycle[k];
        let b = cycle[(k + 1) % n];
        let e = b - a;
        let len = e.content();
        let normal = IntVector::new(&[e[1], -e[0]]).primitive();
        let (ia, ib) = (index(&a), index(&b));
        facets.push(Facet { normal, offset: normal.dot(&a), vertices: vec![ia, ib], volume: len });
        edges.push((ia.min(ib), ia.max(ib)));
        neighbors[ia].push(ib);
        neighbors[ib].push(ia);
    }
    facets.sort_by(|x, y| x.normal.cmp(&y.normal));
    edges.sort_unstable();
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    let p = LatticePolytope::raw(vs, 2, 2);
    let _ = p.geom.set(Arc::new(Geometry { facets, edges, neighbors }));
    p
}

struct Tri {
    v: [usize; 3],
    n: IntVector,
    off: i64,
    alive: bool,
}

fn make_tri(pts: &[IntVector], a: usize, b: usize, c: usize) -> Tri {
    let n = cross(&(pts[b] - pts[a]), &(pts[c] - pts[a]));
    Tri { v: [a, b, c], n, off: n.dot(&pts[a]), alive: true }
}

fn hull3(input_pts: &[IntVector]) -> Result<LatticePolytope> {
    // Extreme points first keeps the intermediate hulls large.
    let mut pts = input_pts.to_vec();
    let n = pts.len();
    let mut centroid = [0i64; 3];
    for p in &pts {
        for i in 0..3 {
            centroid[i] += p[i];
        }
    }
    let key = |p: &IntVector| -> i64 { (0..3).map(|i| (p[i] * n as i64 - centroid[i]).pow(2)).sum() };
    pts.sort_by_key(|p| std::cmp::Reverse(key(p)));

    let a = 0;
    let b = (1..n).find(|&i| pts[i] != pts[a]).ok_or_else(|| Error::Internal("hull3: degenerate".into()))?;
    let c = (1..n)
        .find(|&i| !cross(&(pts[b] - pts[a]), &(pts[i] - pts[a])).is_zero())
        .ok_or_else(|| Error::Internal("hull3: degenerate".into()))?;
    let nabc = cross(&(pts[b] - pts[a]), &(pts[c] - pts[a]));
    let dd = (1..n)
        .find(|&i| nabc.dot(&(pts[i] - pts[a])) != 0)
        .ok_or_else(|| Error::Internal("hull3: degenerate".into()))?;
    let mut tris: Vec<Tri> = Vec::new();
    let init = [[a, b, c], [a, b, dd], [a, c, dd], [b, c, dd]];
    let opposite = [dd, c, b, a];
    for (f, &o) in init.iter().zip(opposite.iter()) {
        let mut t = make_tri(&pts, f[0], f[1], f[2]);
        if t.n.dot(&pts[o]) > t.off {
            t = make_tri(&pts, f[0], f[2], f[1]);
        }
        tris.push(t);
    }
    let mut visible: Vec<usize> = Vec::new();
    let mut dir_edges: HashSet<(usize, usize)> = HashSet::new();
    for p in 0..n {
        if p == a || p == b || p == c || p == dd {
            continue;
        }
        let x = pts[p];
        visible.clear();
        for (i, t) in tris.iter().enumerate() {
            if t.alive && t.n.dot(&x) > t.off {
                visible.push(i);
            }
        }
        if visible.is_empty() {
            continue;
        }
        dir_edges.clear();
        for &i in &visible {
            let v = tris[i].v;
            dir_edges.insert((v[0], v[1]));
            dir_edges.insert((v[1], v[2]));
            dir_edges.insert((v[2], v[0]));
            tris[i].alive = false;
        }
        let horizon: Vec<(usize, usize)> =
            dir_edges.iter().filter(|(u, w)| !dir_edges.contains(&(*w, *u))).copied().collect();
        for (u, w) in horizon {
            tris.push(make_tri(&pts, u, w, p));
        }
        if tris.len() > 64 && tris.iter().filter(|t| !t.alive).count() * 2 > tris.len() {
            tris.retain(|t| t.alive);
        }
    }
    // Distinct facet planes.
    let mut planes: Vec<(IntVector, i64)> = Vec::new();
    let mut cand: Vec<usize> = Vec::new();
    for t in tris.iter().filter(|t| t.alive) {
        let u = t.n.primitive();
        planes.push((u, u.dot(&pts[t.v[0]])));
        cand.extend_from_slice(&t.v);
    }
    planes.sort_unstable();
    planes.dedup();
    cand.sort_unstable();
    cand.dedup();
    let mut verts: Vec<IntVector> = Vec::new();
    for &ci in &cand {
        let x = pts[ci];
        let normals: Vec<IntVector> =
            planes.iter().filter(|(u, h)| u.dot(&x) == *h).map(|(u, _)| *u).collect();
        if normals.len() >= 3 && rank(&normals) == 3 {
            verts.push(x);
        }
    }
    verts.sort_unstable();
    Ok(polytope3_from_parts(verts, &planes))
}

fn polytope3_from_parts(verts: Vec<IntVector>, planes: &[(IntVector, i64)]) -> LatticePolytope {
    let mut facets = Vec::with_capacity(planes.len());
    let mut edge_set: Vec<(usize, usize)> = Vec::new();
    for (u, h) in planes {
        let on: Vec<usize> = (0..verts.len()).filter(|&i| u.dot(&verts[i]) == *h).collect();
        // Project away the coordinate with the largest normal component.
        let j = (0..3).max_by_key(|&j| u[j].abs()).unwrap();
        let keep: Vec<usize> = (0..3).filter(|&i| i != j).collect();
        let proj: Vec<IntVector> = on.iter().map(|&i| verts[i].select(&keep)).collect();
        let cyc = convex_cycle_2d(&proj);
        let order: Vec<usize> = cyc.iter().map(|q| on[proj.iter().position(|r| r == q).unwrap()]).collect();
        let area2 = shoelace(&cyc, 0, 1).abs();
        let volume = area2 / u[j].abs();
        for k in 0..order.len() {
            let x = order[k];
            let y = order[(k + 1) % order.len()];
            edge_set.push((x.min(y), x.max(y)));
        }
        facets.push(Facet { normal: *u, offset: *h, vertices: order, volume });
    }
    edge_set.sort_unstable();
    edge_set.dedup();
    let mut neighbors = vec![Vec::new(); verts.len()];
    for &(x, y) in &edge_set {
        neighbors[x].push(y);
        neighbors[y].push(x);
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    let p = LatticePolytope::raw(verts, 3, 3);
    let _ = p.geom.set(Arc::new(Geometry { facets, edges: edge_set, neighbors }));
    p
}

impl LatticePolytope {
    fn raw(vertices: Vec<IntVector>, ambient: usize, dim: usize) -> Self {
        LatticePolytope { vertices, ambient, dim, geom: OnceLock::new(), embed: OnceLock::new() }
    }

    /// Convex hull of the given points.
    pub fn from_points(points: &[IntVector]) -> Result<Self> {
        hull(points)
    }

    /// Convenience constructor from coordinate slices.
    pub fn from_coords(points: &[&[i64]]) -> Result<Self> {
        let pts: Vec<IntVector> = points.iter().map(|c| IntVector::new(c)).collect();
        hull(&pts)
    }

    /// The standard simplex `conv(0, e_1, ..., e_d)`.
    pub fn standard_simplex(d: usize) -> Self {
        let mut pts = vec![IntVector::zero(d)];
        pts.extend((0..d).map(|i| IntVector::unit(d, i)));
        hull(&pts).expect("standard simplex")
    }

    pub fn vertices(&self) -> &[IntVector] {
        &self.vertices
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full_dim(&self) -> bool {
        self.dim == self.ambient
    }

    fn geometry(&self) -> &Geometry {
        self.geom.get_or_init(|| {
            if !self.is_full_dim() {
                return Arc::new(Geometry::default());
            }
            let h = hull(&self.vertices).expect("rehull of a valid vertex set");
            h.geom.get().cloned().unwrap_or_default()
        })
    }

    fn embedding(&self) -> Option<&Embedding> {
        if self.is_full_dim() || self.dim == 0 {
            return None;
        }
        Some(self.embed.get_or_init(|| {
            let (base, basis) = affine_lattice_basis(&self.vertices).expect("nonempty");
            let local: Vec<IntVector> = self
                .vertices
                .iter()
                .map(|p| coordinates_in_basis(&basis, &base, p).expect("vertex in its lattice"))
                .collect();
            let image = hull(&local).expect("embedded hull");
            Arc::new(Embedding { base, basis, image })
        }))
    }

    /// Facets of a full-dimensional polytope, sorted by normal.
    pub fn facets(&self) -> Result<&[Facet]> {
        if !self.is_full_dim() {
            return input("facets requested for a lower-dimensional polytope");
        }
        Ok(&self.geometry().facets)
    }

    /// Primitive outer facet normals with their offsets.
    pub fn facet_normals(&self) -> Result<Vec<(IntVector, i64)>> {
        Ok(self.facets()?.iter().map(|f| (f.normal, f.offset)).collect())
    }

    /// Edges as pairs of vertex indices (full-dimensional polytopes only).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.geometry().edges
    }

    /// Indices of the vertices adjacent to vertex `i` (full-dimensional polytopes only).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.geometry().neighbors[i]
    }

    /// Support function `h_P(u) = max <u, x>`.
    pub fn support(&self, u: &IntVector) -> i64 {
        self.vertices.iter().map(|v| v.dot(u)).max().unwrap()
    }

    /// Face maximizing `<u, x>`.
    pub fn face(&self, u: &IntVector) -> LatticePolytope {
        let h = self.support(u);
        let vs: Vec<IntVector> = self.vertices.iter().filter(|v| v.dot(u) == h).copied().collect();
        if vs.len() == 1 {
            return LatticePolytope::raw(vs, self.ambient, 0);
        }
        hull(&vs).expect("face of a polytope")
    }

    /// Lattice width in direction `u`.
    pub fn width(&self, u: &IntVector) -> i64 {
        self.support(u) + self.support(&-*u)
    }

    /// Normalized volume `d! vol` in the ambient space (zero when not full-dimensional).
    pub fn volume(&self) -> i64 {
        if !self.is_full_dim() {
            return 0;
        }
        self.full_volume()
    }

    fn full_volume(&self) -> i64 {
        match self.ambient {
            1 => self.vertices[1][0] - self.vertices[0][0],
            _ => {
                let p0 = self.vertices[0];
                self.geometry().facets.iter().map(|f| (f.offset - f.normal.dot(&p0)) * f.volume).sum()
            }
        }
    }

    /// Normalized volume relative to the lattice of the affine span (1 for a point).
    pub fn relative_volume(&self) -> i64 {
        if self.dim == 0 {
            return 1;
        }
        if self.is_full_dim() {
            return self.full_volume();
        }
        if self.dim == 1 {
            return (self.vertices[1] - self.vertices[0]).content();
        }
        self.embedding().unwrap().image.full_volume()
    }

    /// Whether `x` lies in the polytope.
    pub fn contains(&self, x: &IntVector) -> bool {
        if self.is_full_dim() {
            return self.geometry().facets.iter().all(|f| f.normal.dot(x) <= f.offset);
        }
        match self.dim {
            0 => self.vertices[0] == *x,
            1 => {
                let a = self.vertices[0];
                let b = self.vertices[1];
                let e = b - a;
                let y = *x - a;
                if rank(&[e, y]) > 1 {
                    return false;
                }
                let t = y.dot(&e);
                t >= 0 && t <= e.dot(&e)
            }
            _ => {
                let emb = self.embedding().unwrap();
                match coordinates_in_basis(&emb.basis, &emb.base, x) {
                    Some(c) => emb.image.contains(&c),
                    None => false,
                }
            }
        }
    }

    /// All lattice points, sorted.
    pub fn lattice_points(&self) -> Vec<IntVector> {
        if self.dim == 0 {
            return self.vertices.clone();
        }
        if !self.is_full_dim() {
            if self.dim == 1 {
                let a = self.vertices[0];
                let e = self.vertices[1] - a;
                let g = e.content();
                let step = e.primitive();
                return (0..=g).map(|k| a + step * k).collect();
            }
            let emb = self.embedding().unwrap();
            let mut pts: Vec<IntVector> =
                emb.image.lattice_points().iter().map(|c| lift(&emb.base, &emb.basis, c)).collect();
            pts.sort_unstable();
            return pts;
        }
        let d = self.ambient;
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            for i in 0..d {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        let facets = &self.geometry().facets;
        let normals: Vec<IntVector> = facets.iter().map(|f| f.normal).collect();
        let bounds: Vec<i64> = facets.iter().map(|f| f.offset).collect();
        scan_box(&lo, &hi, &normals, &bounds)
    }

    /// Number of lattice points.
    pub fn num_lattice_points(&self) -> usize {
        self.lattice_points().len()
    }

    pub fn translate(&self, t: &IntVector) -> LatticePolytope {
        let vs: Vec<IntVector> = self.vertices.iter().map(|v| *v + *t).collect();
        self.with_vertices(vs)
    }

    /// Dilation `k P` for `k >= 1`.
    pub fn dilate(&self, k: i64) -> LatticePolytope {
        assert!(k >= 1, "dilation factor must be positive");
        let vs: Vec<IntVector> = self.vertices.iter().map(|v| *v * k).collect();
        self.with_vertices(vs)
    }

    fn with_vertices(&self, vs: Vec<IntVector>) -> LatticePolytope {
        hull(&vs).expect("image of a polytope")
    }

    /// Image under an integer linear map given by matrix rows.
    pub fn map_linear(&self, rows: &[IntVector]) -> Result<LatticePolytope> {
        let vs: Vec<IntVector> = self.vertices.iter().map(|v| crate::lattice::mat_vec(rows, v)).collect();
        hull(&vs)
    }

    /// The polytope shifted so that its lexicographically smallest vertex is the origin.
    pub fn normalize_translation(&self) -> LatticePolytope {
        self.translate(&-self.vertices[0])
    }

    pub fn minkowski_sum(&self, other: &LatticePolytope) -> Result<LatticePolytope> {
        minkowski_sum(&[self, other])
    }
}

/// Lattice points in a box satisfying `<n_i, x> <= b_i`.
pub(crate) fn scan_box(lo: &IntVector, hi: &IntVector, normals: &[IntVector], bounds: &[i64]) -> Vec<IntVector> {
    let d = lo.dim();
    let mut out = Vec::new();
    if (0..d).any(|i| lo[i] > hi[i]) {
        return out;
    }
    match d {
        2 => {
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    let p = IntVector::new(&[x, y]);
                    if normals.iter().zip(bounds).all(|(n, b)| n.dot(&p) <= *b) {
                        out.push(p);
                    }
                }
            }
        }
        3 => {
            // Restrict z by the constraints that only involve the last coordinate
            // after fixing x, y.
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    let mut zlo = lo[2];
                    let mut zhi = hi[2];
                    for (n, b) in normals.iter().zip(bounds) {
                        let rest = b - n[0] * x - n[1] * y;
                        let c = n[2];
                        if c > 0 {
                            zhi = zhi.min(fdiv(rest, c));
                        } else if c < 0 {
                            zlo = zlo.max(-fdiv(rest, -c));
                        } else if rest < 0 {
                            zhi = zlo - 1;
                            break;
                        }
                    }
                    for z in zlo..=zhi {
                        out.push(IntVector::new(&[x, y, z]));
                    }
                }
            }
        }
        _ => {
            let mut cur = *lo;
            loop {
                if normals.iter().zip(bounds).all(|(n, b)| n.dot(&cur) <= *b) {
                    out.push(cur);
                }
                let mut i = d;
                loop {
                    if i == 0 {
                        return out;
                    }
                    i -= 1;
                    if cur[i] < hi[i] {
                        cur[i] += 1;
                        for j in i + 1..d {
                            cur[j] = lo[j];
                        }
                        break;
                    }
                }
            }
        }
    }
    out
}

/// Minkowski sum of several polytopes of the same ambient dimension.
pub fn minkowski_sum(polys: &[&LatticePolytope]) -> Result<LatticePolytope> {
    let Some(first) = polys.first() else {
        return input("Minkowski sum of an empty family");
    };
    let d = first.ambient;
    if polys.iter().any(|p| p.ambient != d) {
        return input("Minkowski sum of polytopes in different dimensions");
    }
    let mut acc: Vec<IntVector> = first.vertices.clone();
    for p in &polys[1..] {
        let mut next = Vec::with_capacity(acc.len() * p.vertices.len());
        for a in &acc {
            for b in &p.vertices {
                next.push(*a + *b);
            }
        }
        let h = hull(&next)?;
        acc = h.vertices;
    }
    hull(&acc)
}

/// Halfspace system `<n_i, x> <= b_i` with integer normals and rational bounds.
#[derive(Clone, Debug)]
pub struct RationalHalfspaceSystem {
    pub normals: Vec<IntVector>,
    pub bounds: Vec<Rational>,
}

impl RationalHalfspaceSystem {
    pub fn new(normals: Vec<IntVector>, bounds: Vec<Rational>) -> Self {
        RationalHalfspaceSystem { normals, bounds }
    }

    pub fn from_integer(normals: Vec<IntVector>, bounds: Vec<i64>) -> Self {
        let bounds = bounds.into_iter().map(Rational::from_integer).collect();
        RationalHalfspaceSystem { normals, bounds }
    }
}

/// Bounding boxes for halfspace systems with fixed normals and varying bounds.
///
/// For each coordinate direction the box bound is the minimum over all
/// simplicial cones of normals containing that direction, which is the exact
/// linear programming bound.
#[derive(Clone, Debug)]
pub struct BoxBounder {
    d: usize,
    // For direction index k (2*i for +e_i, 2*i+1 for -e_i): list of (normal indices, numerators, denominator).
    cones: Vec<Vec<(Vec<usize>, Vec<i64>, i64)>>,
}

impl BoxBounder {
    /// Fails when the normals do not positively span (the region would be unbounded).
    pub fn new(normals: &[IntVector]) -> Result<Self> {
        let Some(first) = normals.first() else {
            return input("halfspace system without constraints is unbounded");
        };
        let d = first.dim();
        let mut cones = vec![Vec::new(); 2 * d];
        for_each_combination(normals.len(), d, &mut |idx| {
            let cols: Vec<IntVector> = idx.iter().map(|&i| normals[i]).collect();
            // Rows of the matrix whose columns are the chosen normals.
            let rows: Vec<IntVector> =
                (0..d).map(|r| IntVector::new(&cols.iter().map(|c| c[r]).collect::<Vec<_>>())).collect();
            let dt = det(&rows);
            if dt == 0 {
                return;
            }
            let adj = crate::lattice::adjugate(&rows);
            for k in 0..2 * d {
                let i = k / 2;
                let s = if k % 2 == 0 { 1 } else { -1 };
                // lambda = M^{-1} (s e_i) = s * adj[:, i] / det
                let mut nums: Vec<i64> = (0..d).map(|r| s * adj[r][i]).collect();
                let mut den = dt;
                if den < 0 {
                    den = -den;
                    for x in &mut nums {
                        *x = -*x;
                    }
                }
                if nums.iter().all(|&x| x >= 0) {
                    cones[k].push((idx.to_vec(), nums, den));
                }
            }
        });
        if cones.iter().any(|c| c.is_empty()) {
            return input("halfspace system is unbounded");
        }
        Ok(BoxBounder { d, cones })
    }

    /// Integer box containing all lattice points of `<n_i, x> <= b_i`.
    pub fn bounds(&self, b: &[i64]) -> (IntVector, IntVector) {
        let mut lo = IntVector::zero(self.d);
        let mut hi = IntVector::zero(self.d);
        for k in 0..2 * self.d {
            let best = self.cones[k]
                .iter()
                .map(|(idx, nums, den)| {
                    let s: i64 = idx.iter().zip(nums).map(|(&i, &l)| l * b[i]).sum();
                    fdiv(s, *den)
                })
                .min()
                .unwrap();
            let i = k / 2;
            if k % 2 == 0 {
                hi[i] = best;
            } else {
                lo[i] = -best;
            }
        }
        (lo, hi)
    }

    /// Lattice points of `<n_i, x> <= b_i`.
    pub fn lattice_points(&self, normals: &[IntVector], b: &[i64]) -> Vec<IntVector> {
        let (lo, hi) = self.bounds(b);
        scan_box(&lo, &hi, normals, b)
    }
}

/// Lattice points of a bounded rational halfspace system.
pub fn halfspace_lattice_points(sys: &RationalHalfspaceSystem) -> Result<Vec<IntVector>> {
    let b: Vec<i64> = sys.bounds.iter().map(floor_rat).collect();
    let bounder = BoxBounder::new(&sys.normals)?;
    Ok(bounder.lattice_points(&sys.normals, &b))
}

/// Convex hull of the lattice points of a bounded halfspace system; `None` when
/// there are no lattice points.
pub fn integral_hull(sys: &RationalHalfspaceSystem) -> Result<Option<LatticePolytope>> {
    let pts = halfspace_lattice_points(sys)?;
    if pts.is_empty() {
        return Ok(None);
    }
    hull(&pts).map(Some)
}

/// The polar `(P - P)^*` of the difference body of a full-dimensional polytope,
/// as the system `<v, y> <= 1` over the vertices `v` of `P - P`.
pub fn difference_polar(p: &LatticePolytope) -> Result<RationalHalfspaceSystem> {
    if !p.is_full_dim() {
        return input("difference polar of a lower-dimensional polytope");
    }
    let neg: Vec<IntVector> = p.vertices.iter().map(|v| -*v).collect();
    let mp = hull(&neg)?;
    let diff = minkowski_sum(&[p, &mp])?;
    let normals = diff.vertices.clone();
    let bounds = vec![Rational::from_integer(1); normals.len()];
    Ok(RationalHalfspaceSystem { normals, bounds })
}

/// The lattice segment `[0, w]`.
pub fn segment(w: &IntVector) -> LatticePolytope {
    hull(&[IntVector::zero(w.dim()), *w]).expect("segment")
}

/// If `P = Q + [0, w]` for a lattice polytope `Q`, returns `Q`.
pub fn erode_by_segment(p: &LatticePolytope, w: &IntVector) -> Result<Option<LatticePolytope>> {
    if !p.is_full_dim() {
        return input("segment erosion of a lower-dimensional polytope");
    }
    if w.is_zero() {
        return Ok(Some(p.clone()));
    }
    let mut normals = Vec::new();
    let mut bounds = Vec::new();
    for f in p.facets()? {
        normals.push(f.normal);
        bounds.push(f.offset);
        normals.push(f.normal);
        bounds.push(f.offset - f.normal.dot(w));
    }
    let sys = RationalHalfspaceSystem::from_integer(normals, bounds);
    let Some(q) = integral_hull(&sys)? else {
        return Ok(None);
    };
    let back = minkowski_sum(&[&q, &segment(w)])?;
    Ok((back == *p).then_some(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> IntVector {
        IntVector::new(c)
    }

    fn poly(pts: &[&[i64]]) -> LatticePolytope {
        LatticePolytope::from_coords(pts).unwrap()
    }

    #[test]
    fn unit_cube_hull() {
        let mut pts = Vec::new();
        for x in 0..=1 {
            for y in 0..=1 {
                for z in 0..=1 {
                    pts.push(v(&[x, y, z]));
                }
            }
        }
        pts.push(v(&[0, 0, 0]));
        let c = hull(&pts).unwrap();
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.facets().unwrap().len(), 6);
        assert_eq!(c.edges().len(), 12);
        assert_eq!(c.volume(), 6);
        assert_eq!(c.num_lattice_points(), 8);
    }

    #[test]
    fn interior_and_boundary_points_are_dropped() {
        // 2 * cube with all 27 lattice points.
        let mut pts = Vec::new();
        for x in 0..=2 {
            for y in 0..=2 {
                for z in 0..=2 {
                    pts.push(v(&[x, y, z]));
                }
            }
        }
        let c = hull(&pts).unwrap();
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.volume(), 48);
        for f in c.facets().unwrap() {
            assert_eq!(f.vertices.len(), 4);
            assert_eq!(f.volume, 8);
        }
    }

    #[test]
    fn simplex_volume_and_faces() {
        let s = LatticePolytope::standard_simplex(3);
        assert_eq!(s.volume(), 1);
        assert_eq!(s.facets().unwrap().len(), 4);
        let t = poly(&[&[0, 0, 0], &[1, 0, 0], &[0, 0, 1], &[2, 3, 1]]);
        assert_eq!(t.volume(), 3);
        assert_eq!(t.num_lattice_points(), 4);
    }

    #[test]
    fn polygon_surface_example() {
        // conv(0, 2e1, 2e2): edges of lattice length 2 with normals (1,1), (0,-1), (-1,0).
        let p = poly(&[&[0, 0], &[2, 0], &[0, 2]]);
        let mut got: Vec<(IntVector, i64)> = p.facets().unwrap().iter().map(|f| (f.normal, f.volume)).collect();
        got.sort();
        assert_eq!(got, vec![(v(&[-1, 0]), 2), (v(&[0, -1]), 2), (v(&[1, 1]), 2)]);
        assert_eq!(p.volume(), 4);
    }

    #[test]
    fn degenerate_hulls() {
        let seg = poly(&[&[0, 0, 0], &[2, 2, 2], &[1, 1, 1]]);
        assert_eq!(seg.dim(), 1);
        assert_eq!(seg.vertices().len(), 2);
        assert_eq!(seg.relative_volume(), 2);
        assert_eq!(seg.num_lattice_points(), 3);
        let tri = poly(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2]]);
        assert_eq!(tri.dim(), 2);
        assert_eq!(tri.volume(), 0);
        assert_eq!(tri.relative_volume(), 4);
        assert_eq!(tri.num_lattice_points(), 6);
        assert!(tri.contains(&v(&[1, 1, 0])));
        assert!(!tri.contains(&v(&[1, 0, 0])));
        let pt = poly(&[&[3, 4]]);
        assert_eq!(pt.dim(), 0);
        assert_eq!(pt.relative_volume(), 1);
    }

    #[test]
    fn support_and_face() {
        let s = LatticePolytope::standard_simplex(3);
        assert_eq!(s.support(&v(&[1, 1, 1])), 1);
        assert_eq!(s.face(&v(&[1, 1, 1])).dim(), 2);
        assert_eq!(s.face(&v(&[1, 0, 0])).vertices(), &[v(&[1, 0, 0])]);
        assert_eq!(s.width(&v(&[1, 1, 1])), 1);
    }

    #[test]
    fn integral_hull_of_simplex_system() {
        // 3 * standard simplex as halfspaces.
        let sys = RationalHalfspaceSystem::from_integer(
            vec![v(&[-1, 0, 0]), v(&[0, -1, 0]), v(&[0, 0, -1]), v(&[1, 1, 1])],
            vec![0, 0, 0, 3],
        );
        let p = integral_hull(&sys).unwrap().unwrap();
        assert_eq!(p.volume(), 27);
        let unbounded = RationalHalfspaceSystem::from_integer(vec![v(&[1, 0]), v(&[0, 1])], vec![1, 1]);
        assert!(integral_hull(&unbounded).is_err());
        let empty = RationalHalfspaceSystem::new(
            vec![v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])],
            vec![Rational::new(1, 3), Rational::new(-1, 3), Rational::from_integer(0), Rational::from_integer(0)],
        );
        assert!(integral_hull(&empty).unwrap().is_none());
    }

    #[test]
    fn minkowski_sum_and_erosion() {
        let tri = poly(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let w = v(&[0, 0, 1]);
        let sum = minkowski_sum(&[&tri, &segment(&w)]).unwrap();
        assert_eq!(sum.volume(), 4);
        let q = erode_by_segment(&sum, &w).unwrap().unwrap();
        assert_eq!(q, tri);
        assert!(erode_by_segment(&tri, &w).unwrap().is_none());
    }

    #[test]
    fn difference_polar_of_triangle() {
        let p = poly(&[&[0, 0], &[1, 0], &[0, 1]]);
        let sys = difference_polar(&p).unwrap();
        assert_eq!(sys.normals.len(), 6);
    }
}
