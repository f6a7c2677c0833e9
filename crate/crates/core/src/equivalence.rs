//! Canonical forms under unimodular maps, translations and permutations.
//!
//! All canonical forms are computed by the same frame method. A *frame* is an
//! ordered basis of `R^d` built from covariant data of the input (edge vectors
//! at a vertex, or vertices themselves). Expressing the input in a frame gives
//! coordinates that do not depend on the unimodular map applied to it; together
//! with the Hermite form of the image of `Z^d` they determine the input up to
//! equivalence. The canonical form is the lexicographically smallest such
//! description over all frames of minimal determinant, and the representative
//! is the input rewritten in the Hermite basis of that frame's lattice.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, internal, Result};
use crate::lattice::{
    adjugate, affine_lattice_basis, coordinates_in_basis, det, hermite_rows, integer_kernel, mat_vec, IntVector,
};
use crate::mixed::{sum_dim, PolytopeTuple};
use crate::polytope::{hull, minkowski_sum, LatticePolytope};

/// Opaque canonical form; equal forms mean equivalent inputs.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        match hex::decode(s) {
            Ok(b) => Ok(CanonicalForm(b)),
            Err(e) => input(format!("invalid hex key: {e}")),
        }
    }

    fn from_ints(xs: &[i64]) -> Self {
        let mut out = Vec::with_capacity(xs.len() * 2);
        for &x in xs {
            let mut z = ((x << 1) ^ (x >> 63)) as u64;
            loop {
                let b = (z & 0x7f) as u8;
                z >>= 7;
                if z == 0 {
                    out.push(b);
                    break;
                }
                out.push(b | 0x80);
            }
        }
        CanonicalForm(out)
    }
}

impl fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalForm({})", self.to_hex())
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CanonicalForm::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Translation {
    /// Linear maps only.
    Linear,
    /// One common translation, fixed by the frame origin.
    Common,
    /// Each group is translated independently.
    PerGroup,
}

struct Frame {
    origin: IntVector,
    vectors: Vec<IntVector>,
}

struct Canonizer<'a> {
    d: usize,
    groups: &'a [Vec<IntVector>],
    translation: Translation,
    sort_groups: bool,
}

struct Best {
    key: Vec<i64>,
    hnf: Vec<IntVector>,
    coords: Vec<Vec<IntVector>>,
}

impl Canonizer<'_> {
    fn run(&self, frames: &[Frame]) -> Result<Best> {
        let d = self.d;
        let mut dets: Vec<i64> = Vec::with_capacity(frames.len());
        for f in frames {
            let rows: Vec<IntVector> =
                (0..d).map(|r| IntVector::new(&f.vectors.iter().map(|w| w[r]).collect::<Vec<_>>())).collect();
            dets.push(det(&rows).abs());
        }
        let Some(&dmin) = dets.iter().filter(|&&x| x != 0).min() else {
            return internal("no frame spans the space");
        };
        let mut best: Option<Best> = None;
        let mut key: Vec<i64> = Vec::new();
        for (f, &fd) in frames.iter().zip(&dets) {
            if fd != dmin {
                continue;
            }
            let rows: Vec<IntVector> =
                (0..d).map(|r| IntVector::new(&f.vectors.iter().map(|w| w[r]).collect::<Vec<_>>())).collect();
            let mut adj = adjugate(&rows);
            if det(&rows) < 0 {
                for r in &mut adj {
                    *r = -*r;
                }
            }
            // Image of Z^d (scaled by the determinant) is spanned by the columns of adj.
            let mut hnf: Vec<IntVector> =
                (0..d).map(|c| IntVector::new(&adj.iter().map(|r| r[c]).collect::<Vec<_>>())).collect();
            hermite_rows(&mut hnf);
            let mut coords: Vec<Vec<IntVector>> = Vec::with_capacity(self.groups.len());
            for g in self.groups {
                let mut ys: Vec<IntVector> = g
                    .iter()
                    .map(|x| match self.translation {
                        Translation::Common => mat_vec(&adj, &(*x - f.origin)),
                        _ => mat_vec(&adj, x),
                    })
                    .collect();
                if self.translation == Translation::PerGroup {
                    let m = *ys.iter().min().unwrap();
                    for y in &mut ys {
                        *y = *y - m;
                    }
                }
                ys.sort_unstable();
                coords.push(ys);
            }
            if self.sort_groups {
                coords.sort();
            }
            key.clear();
            key.push(fd);
            for h in &hnf {
                key.extend_from_slice(h.as_slice());
            }
            for g in &coords {
                key.push(g.len() as i64);
                for y in g {
                    key.extend_from_slice(y.as_slice());
                }
            }
            if best.as_ref().map_or(true, |b| key < b.key) {
                best = Some(Best { key: key.clone(), hnf, coords });
            }
        }
        Ok(best.unwrap())
    }
}

/// Solves `y = sum_i z_i h_i` for an upper-triangular Hermite basis.
fn solve_hermite(hnf: &[IntVector], y: &IntVector) -> Result<IntVector> {
    let d = hnf.len();
    let mut z = IntVector::zero(d);
    for j in 0..d {
        let mut r = y[j];
        for i in 0..j {
            r -= z[i] * hnf[i][j];
        }
        let p = hnf[j][j];
        if p == 0 || r % p != 0 {
            return internal("frame coordinates outside the frame lattice");
        }
        z[j] = r / p;
    }
    Ok(z)
}

fn representative(best: &Best) -> Result<Vec<Vec<IntVector>>> {
    best.coords
        .iter()
        .map(|g| g.iter().map(|y| solve_hermite(&best.hnf, y)).collect::<Result<Vec<_>>>())
        .collect()
}

/// Frames `(v, e_1, ..., e_d)` made of a vertex and `d` independent incident edges.
fn edge_frames(p: &LatticePolytope) -> Vec<Frame> {
    let d = p.ambient_dim();
    let vs = p.vertices();
    let mut frames = Vec::new();
    for (i, v) in vs.iter().enumerate() {
        let nb: Vec<IntVector> = p.neighbors(i).iter().map(|&j| vs[j] - *v).collect();
        let mut cur: Vec<usize> = Vec::with_capacity(d);
        ordered_tuples(nb.len(), d, &mut cur, &mut |idx| {
            let vectors: Vec<IntVector> = idx.iter().map(|&k| nb[k]).collect();
            frames.push(Frame { origin: *v, vectors });
        });
    }
    frames
}

fn ordered_tuples(n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in 0..n {
        if !cur.contains(&i) {
            cur.push(i);
            ordered_tuples(n, k, cur, f);
            cur.pop();
        }
    }
}

/// Frames made of `d` vertices (for linear equivalence).
fn vertex_frames(points: &[IntVector], d: usize) -> Vec<Frame> {
    let mut frames = Vec::new();
    let mut cur = Vec::with_capacity(d);
    ordered_tuples(points.len(), d, &mut cur, &mut |idx| {
        frames.push(Frame { origin: IntVector::zero(d), vectors: idx.iter().map(|&k| points[k]).collect() });
    });
    frames
}

/// Rewrites points in a lattice basis of the saturated linear span.
fn linear_span_coordinates(points: &[IntVector]) -> (usize, Vec<IntVector>) {
    let d = points[0].dim();
    let normals = integer_kernel(points, d);
    let basis = integer_kernel(&normals, d);
    let r = basis.len();
    if r == d {
        return (d, points.to_vec());
    }
    let zero = IntVector::zero(d);
    let coords = points.iter().map(|p| coordinates_in_basis(&basis, &zero, p).expect("point in its span")).collect();
    (r, coords)
}

fn pad(v: &IntVector, d: usize) -> IntVector {
    let mut w = IntVector::zero(d);
    for i in 0..v.dim() {
        w[i] = v[i];
    }
    w
}

/// Canonical representative of `P` modulo `GL(Z^d)` and its canonical form.
///
/// The representative is `GL`-equivalent to `P` and depends only on the class.
pub fn gl_normal_form(p: &LatticePolytope) -> Result<(LatticePolytope, CanonicalForm)> {
    let d = p.ambient_dim();
    let verts = p.vertices();
    if verts.iter().all(|v| v.is_zero()) {
        return Ok((p.clone(), CanonicalForm::from_ints(&[0, d as i64])));
    }
    let (r, coords) = linear_span_coordinates(verts);
    let groups = vec![coords.clone()];
    let canon = Canonizer { d: r, groups: &groups, translation: Translation::Linear, sort_groups: false };
    let best = canon.run(&vertex_frames(&coords, r))?;
    let rep = representative(&best)?;
    let pts: Vec<IntVector> = rep[0].iter().map(|z| pad(z, d)).collect();
    let mut key = vec![d as i64, r as i64];
    key.extend_from_slice(&best.key);
    Ok((hull(&pts)?, CanonicalForm::from_ints(&key)))
}

/// Deterministic representative of the affine unimodular class of `P`:
/// `(P' - lexmin P') / N`, where `N` is the number of vertices and `P'` is the
/// `GL` normal form of `N (P - c_P)` for the vertex barycenter `c_P`.
pub fn affine_normal_position(p: &LatticePolytope) -> Result<LatticePolytope> {
    let n = p.vertices().len() as i64;
    let d = p.ambient_dim();
    let sum = p.vertices().iter().fold(IntVector::zero(d), |a, v| a + *v);
    let scaled: Vec<IntVector> = p.vertices().iter().map(|v| *v * n - sum).collect();
    let (gl, _) = gl_normal_form(&hull(&scaled)?)?;
    let m = gl.vertices()[0];
    let mut pts = Vec::with_capacity(gl.vertices().len());
    for v in gl.vertices() {
        match (*v - m).div_exact(n) {
            Some(w) => pts.push(w),
            None => return internal("affine normal position is not integral"),
        }
    }
    hull(&pts)
}

/// Full-dimensional image of a polytope in the lattice of its affine span.
fn embed_full(p: &LatticePolytope) -> Result<LatticePolytope> {
    if p.is_full_dim() {
        return Ok(p.clone());
    }
    let (base, basis) = affine_lattice_basis(p.vertices())?;
    let mut local = Vec::with_capacity(p.vertices().len());
    for v in p.vertices() {
        match coordinates_in_basis(&basis, &base, v) {
            Some(c) => local.push(c),
            None => return internal("vertex outside its affine lattice"),
        }
    }
    hull(&local)
}

/// Canonical form of `P` modulo affine unimodular maps.
pub fn affine_key(p: &LatticePolytope) -> Result<CanonicalForm> {
    let q = embed_full(p)?;
    if q.dim() == 0 {
        return Ok(CanonicalForm::from_ints(&[0]));
    }
    let groups = vec![q.vertices().to_vec()];
    let canon = Canonizer { d: q.dim(), groups: &groups, translation: Translation::Common, sort_groups: false };
    let best = canon.run(&edge_frames(&q))?;
    let mut key = vec![q.dim() as i64];
    key.extend_from_slice(&best.key);
    Ok(CanonicalForm::from_ints(&key))
}

/// Whether two polytopes are equal up to an affine unimodular map.
pub fn affinely_equivalent(p: &LatticePolytope, q: &LatticePolytope) -> Result<bool> {
    Ok(p.ambient_dim() == q.ambient_dim() && affine_key(p)? == affine_key(q)?)
}

/// Canonical form of `P` up to translation: the vertices shifted so the
/// lexicographically smallest one is the origin.
pub fn translation_key(p: &LatticePolytope) -> CanonicalForm {
    let m = p.vertices()[0];
    let mut key = vec![p.ambient_dim() as i64, p.vertices().len() as i64];
    for v in p.vertices() {
        key.extend_from_slice((*v - m).as_slice());
    }
    CanonicalForm::from_ints(&key)
}

fn tuple_frames(members: &[LatticePolytope]) -> Result<Vec<Frame>> {
    let full: Vec<&LatticePolytope> = members.iter().filter(|p| p.is_full_dim()).collect();
    if !full.is_empty() {
        return Ok(full.iter().flat_map(|p| edge_frames(p)).collect());
    }
    let refs: Vec<&LatticePolytope> = members.iter().collect();
    let sum = minkowski_sum(&refs)?;
    Ok(edge_frames(&sum))
}

fn tuple_canonical(t: &PolytopeTuple) -> Result<Best> {
    let d = t.ambient_dim();
    let members = t.members();
    let refs: Vec<&LatticePolytope> = members.iter().collect();
    if sum_dim(&refs) != d {
        return input("tuple canonical form needs a full-dimensional Minkowski sum");
    }
    let groups: Vec<Vec<IntVector>> = members.iter().map(|p| p.vertices().to_vec()).collect();
    let canon = Canonizer { d, groups: &groups, translation: Translation::PerGroup, sort_groups: true };
    canon.run(&tuple_frames(members)?)
}

/// Canonical form of a tuple modulo a common unimodular map, independent
/// lattice translations of the members and permutations of the members.
pub fn tuple_canonical_key(t: &PolytopeTuple) -> Result<CanonicalForm> {
    let best = tuple_canonical(t)?;
    let mut key = vec![t.ambient_dim() as i64, t.len() as i64];
    key.extend_from_slice(&best.key);
    Ok(CanonicalForm::from_ints(&key))
}

/// Canonical representative of a tuple's class together with its canonical form.
/// Members of the representative are sorted by vertex list.
pub fn tuple_normal_form(t: &PolytopeTuple) -> Result<(PolytopeTuple, CanonicalForm)> {
    let best = tuple_canonical(t)?;
    let rep = representative(&best)?;
    let mut members = rep.iter().map(|g| hull(g)).collect::<Result<Vec<_>>>()?;
    members.sort();
    let mut key = vec![t.ambient_dim() as i64, t.len() as i64];
    key.extend_from_slice(&best.key);
    Ok((PolytopeTuple::new(members)?, CanonicalForm::from_ints(&key)))
}

pub fn tuples_equivalent(a: &PolytopeTuple, b: &PolytopeTuple) -> Result<bool> {
    if a.ambient_dim() != b.ambient_dim() || a.len() != b.len() {
        return Ok(false);
    }
    Ok(tuple_canonical_key(a)? == tuple_canonical_key(b)?)
}

/// Canonical form of a sandwich `A ⊆ B` modulo affine unimodular maps applied
/// to both polytopes simultaneously.
pub fn sandwich_key(a: &LatticePolytope, b: &LatticePolytope) -> Result<CanonicalForm> {
    let d = a.ambient_dim();
    let (a, b) = if b.is_full_dim() {
        (a.clone(), b.clone())
    } else {
        let (base, basis) = affine_lattice_basis(b.vertices())?;
        let conv = |p: &LatticePolytope| -> Result<LatticePolytope> {
            let mut pts = Vec::new();
            for v in p.vertices() {
                match coordinates_in_basis(&basis, &base, v) {
                    Some(c) => pts.push(c),
                    None => return input("sandwich member outside the affine span of the outer polytope"),
                }
            }
            hull(&pts)
        };
        (conv(a)?, conv(b)?)
    };
    let k = b.dim();
    if k == 0 {
        return Ok(CanonicalForm::from_ints(&[d as i64, 0]));
    }
    let frames = if a.is_full_dim() { edge_frames(&a) } else { edge_frames(&b) };
    let groups = vec![a.vertices().to_vec(), b.vertices().to_vec()];
    let canon = Canonizer { d: k, groups: &groups, translation: Translation::Common, sort_groups: false };
    let best = canon.run(&frames)?;
    let mut key = vec![d as i64, k as i64];
    key.extend_from_slice(&best.key);
    Ok(CanonicalForm::from_ints(&key))
}
