//! Sandwich enumeration: lattice polytopes of bounded volume up to affine
//! unimodular equivalence, and lattice subpolytopes subject to monotone
//! volume constraints.
//!
//! A sandwich is a pair `A ⊆ B`; it stands for every lattice polytope `P` with
//! `A ⊆ P ⊆ B`. Splitting at a vertex `v` of `B` outside `A` gives the two
//! sandwiches `(conv(A ∪ v), B)` and `(A, conv(B ∩ Z^d \ v))`, after which `B` is
//! shrunk to the lattice points that can still occur in a solution.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::equivalence::{affine_key, affine_normal_position, sandwich_key, translation_key, CanonicalForm};
use crate::error::{input, Result};
use crate::exec::par_map;
use crate::lattice::{for_each_combination, IntVector, Rational};
use crate::mixed::v_aap;
use crate::polytope::{hull, integral_hull, LatticePolytope, RationalHalfspaceSystem};

/// A pair of lattice polytopes `A ⊆ B`, stored by vertex lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sandwich {
    pub inner: Vec<IntVector>,
    pub outer: Vec<IntVector>,
}

impl Sandwich {
    pub fn new(a: &LatticePolytope, b: &LatticePolytope) -> Self {
        Sandwich { inner: a.vertices().to_vec(), outer: b.vertices().to_vec() }
    }

    pub fn polytopes(&self) -> Result<(LatticePolytope, LatticePolytope)> {
        Ok((hull(&self.inner)?, hull(&self.outer)?))
    }
}

/// Empty lattice simplices that seed the volume enumeration: the unimodular
/// simplex, and in dimension three also `conv(0, e1, e3, e3 + a e1 + b e2)` for
/// coprime `1 <= a < b <= m`, up to affine equivalence.
pub fn empty_simplices(d: usize, m: i64) -> Result<Vec<LatticePolytope>> {
    match d {
        2 => Ok(vec![LatticePolytope::standard_simplex(2)]),
        3 => {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            let s = LatticePolytope::standard_simplex(3);
            seen.insert(affine_key(&s)?);
            out.push(s);
            for b in 2..=m {
                for a in 1..b {
                    if a.gcd(&b) != 1 {
                        continue;
                    }
                    let t = LatticePolytope::from_coords(&[&[0, 0, 0], &[1, 0, 0], &[0, 0, 1], &[a, b, 1]])?;
                    if seen.insert(affine_key(&t)?) {
                        out.push(t);
                    }
                }
            }
            Ok(out)
        }
        _ => input(format!("volume enumeration is implemented for d in {{2, 3}}, got {d}")),
    }
}

/// Integral hull of `λ A + (1 - λ) c_A` with `λ = (d + 1)(m / Vol(A) - 1) + 1`,
/// for a full-dimensional simplex `A` with barycenter `c_A`. Every lattice
/// polytope of volume at most `m` containing `A` lies inside.
pub fn container(a: &LatticePolytope, m: i64) -> Result<LatticePolytope> {
    let d = a.ambient_dim();
    if !a.is_full_dim() || a.vertices().len() != d + 1 {
        return input("container needs a full-dimensional simplex");
    }
    let vol = a.volume();
    if vol > m {
        return input("simplex volume exceeds the bound");
    }
    let dd = (d + 1) as i64;
    let lambda = Rational::new(dd * m, vol) - Rational::from_integer(dd) + Rational::from_integer(1);
    let sum = a.vertices().iter().fold(IntVector::zero(d), |s, v| s + *v);
    let mut normals = Vec::new();
    let mut bounds = Vec::new();
    for f in a.facets()? {
        // <u, c_A> = <u, sum> / (d + 1)
        let uc = Rational::new(f.normal.dot(&sum), dd);
        normals.push(f.normal);
        bounds.push(lambda * Rational::from_integer(f.offset) + (Rational::from_integer(1) - lambda) * uc);
    }
    integral_hull(&RationalHalfspaceSystem::new(normals, bounds))?
        .ok_or_else(|| crate::Error::Internal("empty container".into()))
}

/// `Vol(conv(A ∪ {x}))` for a full-dimensional `A`, from the pyramids over the
/// facets of `A` visible from `x`.
pub fn volume_with_point(a: &LatticePolytope, x: &IntVector) -> i64 {
    let facets = a.facets().expect("full-dimensional");
    let mut vol = a.volume();
    for f in facets {
        let h = f.normal.dot(x) - f.offset;
        if h > 0 {
            vol += h * f.volume;
        }
    }
    vol
}

/// Shrinks `B` to the convex hull of its lattice points `x` with
/// `Vol(conv(A ∪ {x})) <= m`. As this volume is convex in `x`, the result is
/// the fixpoint of repeatedly deleting offending vertices.
pub fn reduce(b_points: &[IntVector], a: &LatticePolytope, m: i64) -> Result<(LatticePolytope, Vec<IntVector>)> {
    let keep: Vec<IntVector> = b_points.iter().filter(|x| volume_with_point(a, x) <= m).copied().collect();
    Ok((hull(&keep)?, keep))
}

fn split_vertex(a: &LatticePolytope, b: &LatticePolytope) -> Option<IntVector> {
    b.vertices().iter().find(|v| !a.contains(v)).copied()
}

fn with_point(a: &LatticePolytope, v: &IntVector) -> Result<LatticePolytope> {
    let mut pts = a.vertices().to_vec();
    pts.push(*v);
    hull(&pts)
}

/// Checkpointable state of the volume enumeration.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FactoryState {
    pub d: usize,
    pub m: i64,
    /// Current family of sandwiches (including finished ones with `A = B`).
    pub queue: Vec<Sandwich>,
    /// Canonical forms of every sandwich ever added.
    pub registry: Vec<CanonicalForm>,
}

struct Item {
    sw: Sandwich,
    gap: i64,
}

/// Lattice polytopes of dimension `d` with normalized volume at most `m`, one
/// per affine unimodular class, in affine normal position and sorted.
pub fn enumerate_by_volume(d: usize, m: i64) -> Result<Vec<LatticePolytope>> {
    enumerate_by_volume_resumable(d, m, None, &mut |_| Ok(()))
}

/// Volume enumeration with optional resume state and a checkpoint callback
/// invoked after every processed batch.
pub fn enumerate_by_volume_resumable(
    d: usize,
    m: i64,
    resume: Option<FactoryState>,
    checkpoint: &mut dyn FnMut(&FactoryState) -> Result<()>,
) -> Result<Vec<LatticePolytope>> {
    if m < 1 {
        return input("volume bound must be positive");
    }
    let mut registry: HashSet<CanonicalForm> = HashSet::new();
    let mut items: Vec<Item> = Vec::new();
    match resume {
        Some(state) => {
            if state.d != d || state.m != m {
                return input("checkpoint belongs to a different run");
            }
            registry.extend(state.registry);
            for sw in state.queue {
                let (a, b) = sw.polytopes()?;
                items.push(Item { gap: b.volume() - a.volume(), sw });
            }
        }
        None => {
            let seeds: Vec<LatticePolytope> =
                empty_simplices(d, m)?.into_iter().filter(|s| s.volume() <= m).collect();
            let made = par_map(&seeds, |s| -> Result<(Sandwich, CanonicalForm, i64)> {
                let c = container(s, m)?;
                let (b, _) = reduce(&c.lattice_points(), s, m)?;
                Ok((Sandwich::new(s, &b), sandwich_key(s, &b)?, b.volume() - s.volume()))
            });
            for r in made {
                let (sw, key, gap) = r?;
                if registry.insert(key) {
                    items.push(Item { sw, gap });
                }
            }
        }
    }
    loop {
        let max_gap = items.iter().map(|i| i.gap).max().unwrap_or(0);
        if max_gap == 0 {
            break;
        }
        let (batch, rest): (Vec<Item>, Vec<Item>) = items.into_iter().partition(|i| i.gap == max_gap);
        items = rest;
        let children = par_map(&batch, |it| -> Result<Vec<(CanonicalForm, Sandwich, i64)>> {
            let (a, b) = it.sw.polytopes()?;
            let pts = b.lattice_points();
            let v = split_vertex(&a, &b).expect("positive gap leaves a vertex outside A");
            let a1 = with_point(&a, &v)?;
            let (b1, _) = reduce(&pts, &a1, m)?;
            let rest: Vec<IntVector> = pts.iter().filter(|x| **x != v).copied().collect();
            let b2 = hull(&rest)?;
            let mut out = Vec::with_capacity(2);
            for (x, y) in [(a1, b1), (a, b2)] {
                let key = sandwich_key(&x, &y)?;
                out.push((key, Sandwich::new(&x, &y), y.volume() - x.volume()));
            }
            Ok(out)
        });
        let mut fresh: Vec<(CanonicalForm, Sandwich, i64)> = Vec::new();
        for c in children {
            fresh.extend(c?);
        }
        fresh.sort_by(|x, y| x.0.cmp(&y.0));
        for (key, sw, gap) in fresh {
            if registry.insert(key) {
                items.push(Item { sw, gap });
            }
        }
        let state = FactoryState {
            d,
            m,
            queue: items.iter().map(|i| i.sw.clone()).collect(),
            registry: {
                let mut r: Vec<CanonicalForm> = registry.iter().cloned().collect();
                r.sort();
                r
            },
        };
        checkpoint(&state)?;
    }
    let finals: Vec<Vec<IntVector>> = items.into_iter().map(|i| i.sw.inner).collect();
    let classes = par_map(&finals, |vs| -> Result<(CanonicalForm, LatticePolytope)> {
        let p = hull(vs)?;
        Ok((affine_key(&p)?, p))
    });
    let mut by_key: BTreeMap<CanonicalForm, LatticePolytope> = BTreeMap::new();
    for c in classes {
        let (k, p) = c?;
        by_key.entry(k).or_insert(p);
    }
    let reps: Vec<LatticePolytope> = by_key.into_values().collect();
    let mut out = par_map(&reps, affine_normal_position).into_iter().collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| x.volume().cmp(&y.volume()).then_with(|| x.cmp(y)));
    Ok(out)
}

/// Monotone bounds for the subpolytope search: `Vol_r(A) <= max_rel_volume`
/// and `V(A, A, P1) <= max_mixed`.
#[derive(Clone, Debug)]
pub struct SearchConstraints {
    pub p1: LatticePolytope,
    pub max_rel_volume: i64,
    pub max_mixed: i64,
}

impl SearchConstraints {
    pub fn admits(&self, a: &LatticePolytope) -> bool {
        a.relative_volume() <= self.max_rel_volume && v_aap(a, &self.p1) <= self.max_mixed
    }
}

/// Search variants: seeds by empty simplices (full-dimensional targets), or by a
/// fixed segment with full-dimensional or two-dimensional targets.
#[derive(Clone, Debug)]
pub enum SearchVariant {
    EmptySimplexSeeds,
    SegmentFullDim(LatticePolytope),
    SegmentPlanar(LatticePolytope),
}

impl SearchVariant {
    fn target_dim(&self) -> usize {
        match self {
            SearchVariant::SegmentPlanar(_) => 2,
            _ => 3,
        }
    }
}

/// Constrained reduction: the convex hull of the lattice points `x` of `B` for
/// which `conv(A ∪ {x})` satisfies the constraints, with its lattice points.
/// Any polytope between `A` and `B` that satisfies the (monotone) constraints
/// lies inside the result.
pub fn reduce_constrained(
    b_points: &[IntVector],
    a: &LatticePolytope,
    c: &SearchConstraints,
) -> Result<Option<(LatticePolytope, Vec<IntVector>)>> {
    let mut keep = Vec::with_capacity(b_points.len());
    for x in b_points {
        if a.contains(x) {
            keep.push(*x);
            continue;
        }
        let ax = with_point(a, x)?;
        if c.admits(&ax) {
            keep.push(*x);
        }
    }
    if keep.is_empty() {
        return Ok(None);
    }
    let b = hull(&keep)?;
    let pts: Vec<IntVector> = b_points.iter().filter(|x| b.contains(x)).copied().collect();
    Ok(Some((b, pts)))
}

struct SearchItem {
    a: LatticePolytope,
    b: LatticePolytope,
    b_pts: Vec<IntVector>,
    gap: usize,
}

fn translation_pair_key(a: &LatticePolytope, b: &LatticePolytope) -> Vec<i64> {
    let o = a.vertices()[0];
    let mut k = vec![a.vertices().len() as i64];
    for v in a.vertices().iter().chain(b.vertices()) {
        k.extend_from_slice((*v - o).as_slice());
    }
    k
}

fn make_item(a: LatticePolytope, b: LatticePolytope, b_pts: Vec<IntVector>) -> SearchItem {
    let inner = a.num_lattice_points();
    SearchItem { gap: b_pts.len() - inner, a, b, b_pts }
}

/// All lattice subpolytopes `P ⊆ M` satisfying the constraints, up to
/// translation, with `dim P` equal to the variant's target dimension. Segment
/// variants only return polytopes containing the segment.
pub fn subpolytope_search(
    m_poly: &LatticePolytope,
    variant: &SearchVariant,
    c: &SearchConstraints,
) -> Result<Vec<LatticePolytope>> {
    let m_pts = m_poly.lattice_points();
    let target = variant.target_dim();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut items: Vec<SearchItem> = Vec::new();
    let push = |items: &mut Vec<SearchItem>, seen: &mut HashSet<Vec<i64>>, it: SearchItem| {
        if seen.insert(translation_pair_key(&it.a, &it.b)) {
            items.push(it);
        }
    };
    match variant {
        SearchVariant::EmptySimplexSeeds => {
            for s in seed_simplices(&m_pts, c)? {
                if let Some((b, pts)) = reduce_constrained(&m_pts, &s, c)? {
                    push(&mut items, &mut seen, make_item(s, b, pts));
                }
            }
        }
        SearchVariant::SegmentFullDim(seg) | SearchVariant::SegmentPlanar(seg) => {
            if !seg.vertices().iter().all(|v| m_poly.contains(v)) {
                return input("segment is not contained in the search region");
            }
            if let Some((b, pts)) = reduce_constrained(&m_pts, seg, c)? {
                push(&mut items, &mut seen, make_item(seg.clone(), b, pts));
            }
        }
    }
    let planar = matches!(variant, SearchVariant::SegmentPlanar(_));
    let mut results: HashMap<CanonicalForm, LatticePolytope> = HashMap::new();
    loop {
        let (done, open): (Vec<SearchItem>, Vec<SearchItem>) = items.into_iter().partition(|i| i.gap == 0);
        for it in done {
            if it.a.dim() == target {
                results.entry(translation_key(&it.a)).or_insert(it.a);
            }
        }
        if open.is_empty() {
            break;
        }
        let max_gap = open.iter().map(|i| i.gap).max().unwrap();
        let (batch, rest): (Vec<SearchItem>, Vec<SearchItem>) = open.into_iter().partition(|i| i.gap == max_gap);
        items = rest;
        let children = par_map(&batch, |it| split_search_item(it, c, planar, target));
        let mut fresh: Vec<SearchItem> = Vec::new();
        for ch in children {
            fresh.extend(ch?);
        }
        fresh.sort_by(|x, y| translation_pair_key(&x.a, &x.b).cmp(&translation_pair_key(&y.a, &y.b)));
        for it in fresh {
            push(&mut items, &mut seen, it);
        }
    }
    let mut out: Vec<(CanonicalForm, LatticePolytope)> = results.into_iter().collect();
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out.into_iter().map(|(_, p)| p).collect())
}

fn split_search_item(it: &SearchItem, c: &SearchConstraints, planar: bool, target: usize) -> Result<Vec<SearchItem>> {
    let mut out = Vec::with_capacity(2);
    let v = split_vertex(&it.a, &it.b).expect("positive gap leaves a vertex outside A");
    let a1 = with_point(&it.a, &v)?;
    let mut pts1: Vec<IntVector> = it.b_pts.clone();
    if planar && a1.dim() == 2 && it.b.dim() == 3 {
        let n = plane_normal(&a1);
        let h = n.dot(&a1.vertices()[0]);
        pts1.retain(|x| n.dot(x) == h);
    }
    if let Some((b1, p1)) = reduce_constrained(&pts1, &a1, c)? {
        if b1.dim() >= target && a1.dim() <= target {
            out.push(make_item(a1, b1, p1));
        }
    }
    let rest: Vec<IntVector> = it.b_pts.iter().filter(|x| **x != v).copied().collect();
    if let Some((b2, p2)) = reduce_constrained(&rest, &it.a, c)? {
        if b2.dim() >= target {
            out.push(make_item(it.a.clone(), b2, p2));
        }
    }
    Ok(out)
}

fn plane_normal(p: &LatticePolytope) -> IntVector {
    let v0 = p.vertices()[0];
    let diffs: Vec<IntVector> = p.vertices()[1..].iter().map(|v| *v - v0).collect();
    crate::lattice::integer_kernel(&diffs, 3)[0]
}

/// Empty lattice simplices inside the point set satisfying the constraints, up
/// to translation.
fn seed_simplices(m_pts: &[IntVector], c: &SearchConstraints) -> Result<Vec<LatticePolytope>> {
    let d = m_pts.first().map_or(3, |p| p.dim());
    let n = m_pts.len();
    let mut keys: HashSet<CanonicalForm> = HashSet::new();
    let mut out = Vec::new();
    let mut err = None;
    for_each_combination(n, d + 1, &mut |idx| {
        if err.is_some() {
            return;
        }
        let o = m_pts[idx[0]];
        let rows: Vec<IntVector> = idx[1..].iter().map(|&i| m_pts[i] - o).collect();
        let vol = crate::lattice::det(&rows).abs();
        if vol == 0 || vol > c.max_rel_volume {
            return;
        }
        let pts: Vec<IntVector> = idx.iter().map(|&i| m_pts[i]).collect();
        let s = match hull(&pts) {
            Ok(s) => s,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let inside = m_pts.iter().filter(|x| s.contains(x)).count();
        if inside != d + 1 || v_aap(&s, &c.p1) > c.max_mixed {
            return;
        }
        if keys.insert(translation_key(&s)) {
            out.push(s);
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(out)
}
