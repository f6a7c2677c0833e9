//! Mixed volumes, (mixed) area measures and tuple nondegeneracy tests.

use serde::{Deserialize, Serialize};

use crate::error::{input, internal, Result};
use crate::lattice::{rank, IntVector};
use crate::polytope::{minkowski_sum, BoxBounder, LatticePolytope};

/// Ordered tuple of lattice polytopes in a common ambient space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolytopeTuple {
    members: Vec<LatticePolytope>,
}

impl PolytopeTuple {
    pub fn new(members: Vec<LatticePolytope>) -> Result<Self> {
        let Some(first) = members.first() else {
            return input("empty polytope tuple");
        };
        let d = first.ambient_dim();
        if members.iter().any(|p| p.ambient_dim() != d) {
            return input("tuple members live in different dimensions");
        }
        Ok(PolytopeTuple { members })
    }

    pub fn members(&self) -> &[LatticePolytope] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.members[0].ambient_dim()
    }

    pub fn into_members(self) -> Vec<LatticePolytope> {
        self.members
    }
}

/// Finitely supported measure on primitive directions with positive integer values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaMeasure {
    /// `(primitive normal, value)`, sorted by normal; values are positive.
    pub entries: Vec<(IntVector, i64)>,
}

impl AreaMeasure {
    pub fn support(&self) -> Vec<IntVector> {
        self.entries.iter().map(|(u, _)| *u).collect()
    }

    pub fn value(&self, u: &IntVector) -> i64 {
        self.entries.binary_search_by(|(w, _)| w.cmp(u)).map(|i| self.entries[i].1).unwrap_or(0)
    }

    /// `sum_u h_P(u) S(u)`.
    pub fn pair_with(&self, p: &LatticePolytope) -> i64 {
        self.entries.iter().map(|(u, a)| p.support(u) * a).sum()
    }

    /// `sum_u S(u) u`; zero for every measure produced here.
    pub fn centroid(&self, d: usize) -> IntVector {
        self.entries.iter().fold(IntVector::zero(d), |acc, (u, a)| acc + *u * *a)
    }
}

/// Affine dimension of a Minkowski sum, from the ranks of the members' difference vectors.
pub fn sum_dim(members: &[&LatticePolytope]) -> usize {
    let mut diffs = Vec::new();
    for p in members {
        let v0 = p.vertices()[0];
        diffs.extend(p.vertices()[1..].iter().map(|v| *v - v0));
    }
    if diffs.is_empty() {
        return 0;
    }
    rank(&diffs)
}

fn normalized_relative_mixed_2(f1: &LatticePolytope, f2: &LatticePolytope, sum_rel_vol: i64) -> Result<i64> {
    let v1 = if f1.dim() == 2 { f1.relative_volume() } else { 0 };
    let v2 = if f2.dim() == 2 { f2.relative_volume() } else { 0 };
    let twice = sum_rel_vol - v1 - v2;
    if twice % 2 != 0 {
        return internal("odd value in a planar mixed volume");
    }
    Ok(twice / 2)
}

/// Mixed area measure `S_{P_1,...,P_{d-1}}` of `d - 1` polytopes in `R^d`
/// (`d` is 2 or 3). For `d = 2` this is the surface area measure of the single
/// member, for `d = 3` the mixed area measure of the two members.
pub fn area_measure(members: &[&LatticePolytope]) -> Result<AreaMeasure> {
    let Some(first) = members.first() else {
        return input("area measure of an empty family");
    };
    let d = first.ambient_dim();
    if members.len() + 1 != d || !(2..=3).contains(&d) {
        return input(format!("area measure needs d - 1 members in dimension 2 or 3 (got {} in {d})", members.len()));
    }
    let sdim = sum_dim(members);
    let mut entries = Vec::new();
    if sdim == d {
        let sum = if members.len() == 1 { members[0].clone() } else { minkowski_sum(members)? };
        for f in sum.facets()? {
            let value = if d == 2 {
                // Lattice length of the face of the single member.
                members[0].face(&f.normal).relative_volume_if_dim(1)
            } else {
                let f1 = members[0].face(&f.normal);
                let f2 = members[1].face(&f.normal);
                normalized_relative_mixed_2(&f1, &f2, f.volume)?
            };
            if value > 0 {
                entries.push((f.normal, value));
            }
        }
    } else if sdim == d - 1 {
        let sum = if members.len() == 1 { members[0].clone() } else { minkowski_sum(members)? };
        let value = if d == 2 {
            members[0].relative_volume_if_dim(1)
        } else {
            normalized_relative_mixed_2(members[0], members[1], sum.relative_volume())?
        };
        if value > 0 {
            let u = hyperplane_normal(&sum);
            entries.push((u, value));
            entries.push((-u, value));
        }
    }
    entries.sort();
    Ok(AreaMeasure { entries })
}

/// Primitive normal of the hyperplane spanned by a polytope of codimension one.
fn hyperplane_normal(p: &LatticePolytope) -> IntVector {
    let d = p.ambient_dim();
    let v0 = p.vertices()[0];
    let diffs: Vec<IntVector> = p.vertices()[1..].iter().map(|v| *v - v0).collect();
    let ker = crate::lattice::integer_kernel(&diffs, d);
    debug_assert_eq!(ker.len(), 1);
    let u = ker[0].primitive();
    // Deterministic sign: lexicographically positive.
    if u < -u {
        -u
    } else {
        u
    }
}

trait RelVolIfDim {
    fn relative_volume_if_dim(&self, k: usize) -> i64;
}

impl RelVolIfDim for LatticePolytope {
    fn relative_volume_if_dim(&self, k: usize) -> i64 {
        if self.dim() == k {
            self.relative_volume()
        } else {
            0
        }
    }
}

/// `V(A, ..., A, P)` with `A` repeated `d - 1` times: the pairing of the surface
/// area measure of `A` with `h_P`; for `dim A = d - 1` this is `Vol_r(A)` times
/// the lattice width of `P` normal to `A`, and zero in lower dimension.
pub fn v_aap(a: &LatticePolytope, p: &LatticePolytope) -> i64 {
    let d = a.ambient_dim();
    if a.is_full_dim() {
        return a.facets().expect("full-dimensional").iter().map(|f| p.support(&f.normal) * f.volume).sum();
    }
    if a.dim() + 1 == d {
        let n = hyperplane_normal(a);
        return a.relative_volume() * p.width(&n);
    }
    0
}

/// Surface area measure of a full-dimensional polytope: facet normals with
/// the normalized facet volumes.
pub fn surface_area_measure(p: &LatticePolytope) -> Result<AreaMeasure> {
    if !p.is_full_dim() {
        return input("surface area measure of a lower-dimensional polytope");
    }
    let mut entries: Vec<(IntVector, i64)> = p.facets()?.iter().map(|f| (f.normal, f.volume)).collect();
    entries.sort();
    Ok(AreaMeasure { entries })
}

/// Mixed area measure `S_{P1,P2}` of two polytopes in `R^3`.
pub fn mixed_area_measure(p1: &LatticePolytope, p2: &LatticePolytope) -> Result<AreaMeasure> {
    if p1.ambient_dim() != 3 || p2.ambient_dim() != 3 {
        return input("mixed area measure is defined here for polytopes in R^3");
    }
    area_measure(&[p1, p2])
}

/// Normalized mixed volume by inclusion-exclusion over Minkowski sums:
/// `V = (1/d!) sum_k (-1)^(d+k) sum_{|I| = k} Vol(sum_{i in I} P_i)`.
pub fn mixed_volume(t: &PolytopeTuple) -> Result<i64> {
    let d = t.ambient_dim();
    if t.len() != d {
        return input(format!("mixed volume needs {d} polytopes in dimension {d}, got {}", t.len()));
    }
    let mut total: i64 = 0;
    for mask in 1u32..(1 << d) {
        let chosen: Vec<&LatticePolytope> = (0..d).filter(|i| mask & (1 << i) != 0).map(|i| &t.members()[i]).collect();
        let k = chosen.len();
        let vol = if sum_dim(&chosen) < d { 0 } else { minkowski_sum(&chosen)?.volume() };
        if (d + k) % 2 == 0 {
            total += vol;
        } else {
            total -= vol;
        }
    }
    let fact: i64 = (1..=d as i64).product();
    if total % fact != 0 {
        return internal(format!("inclusion-exclusion sum {total} not divisible by {fact}"));
    }
    Ok(total / fact)
}

/// Mixed volume from an area measure: `V(P_1, ..., P_d) = sum_u h_{P_d}(u) S_{P_1..P_{d-1}}(u)`.
pub fn mixed_volume_by_measure(t: &PolytopeTuple) -> Result<i64> {
    let d = t.ambient_dim();
    if t.len() != d || !(2..=3).contains(&d) {
        return input("mixed volume by measure needs d polytopes with d in {2, 3}");
    }
    let ms = t.members();
    let head: Vec<&LatticePolytope> = ms[..d - 1].iter().collect();
    let m = area_measure(&head)?;
    Ok(m.pair_with(&ms[d - 1]))
}

/// Mixed volume of two polygons: `(Vol(P+Q) - Vol(P) - Vol(Q)) / 2`.
pub fn mixed_volume_2d(p: &LatticePolytope, q: &LatticePolytope) -> Result<i64> {
    mixed_volume(&PolytopeTuple::new(vec![p.clone(), q.clone()])?)
}

/// Mixed volume of three polytopes in `R^3`, computed from the mixed area measure.
pub fn mixed_volume_3(p1: &LatticePolytope, p2: &LatticePolytope, p3: &LatticePolytope) -> Result<i64> {
    Ok(mixed_area_measure(p1, p2)?.pair_with(p3))
}

/// `V(P, P, Q)` in `R^3` (or `V(P, Q)` in `R^2` when `P` and `Q` are planar).
pub fn mixed_volume_ppq(p: &LatticePolytope, q: &LatticePolytope) -> Result<i64> {
    match p.ambient_dim() {
        2 => Ok(area_measure(&[p])?.pair_with(q)),
        3 => mixed_volume_3(p, p, q),
        d => input(format!("unsupported dimension {d}")),
    }
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

/// `dim(sum_{i in I} P_i) >= |I|` for every nonempty `I`.
pub fn is_nondegenerate(t: &PolytopeTuple) -> bool {
    let ms = t.members();
    subsets(ms.len()).all(|idx| {
        let chosen: Vec<&LatticePolytope> = idx.iter().map(|&i| &ms[i]).collect();
        sum_dim(&chosen) >= idx.len()
    })
}

/// `dim(sum_{i in I} P_i) >= |I| + 1` for every nonempty `I` with `|I| < d`,
/// and nondegeneracy for `|I| >= d`.
pub fn is_irreducible(t: &PolytopeTuple) -> bool {
    let d = t.ambient_dim();
    let ms = t.members();
    subsets(ms.len()).all(|idx| {
        let chosen: Vec<&LatticePolytope> = idx.iter().map(|&i| &ms[i]).collect();
        let need = if idx.len() < d { idx.len() + 1 } else { idx.len().min(d) };
        sum_dim(&chosen) >= need
    })
}

/// Whether the vectors positively span `R^d`.
pub fn positively_spans(vectors: &[IntVector]) -> bool {
    let Some(first) = vectors.first() else {
        return false;
    };
    rank(vectors) == first.dim() && BoxBounder::new(vectors).is_ok()
}
