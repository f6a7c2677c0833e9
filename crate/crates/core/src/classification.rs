//! Enumeration of maximal irreducible triples in `R^3` by mixed volume, and
//! their structural types.
//!
//! A triple `(P1, P2, P3)` with `V = m` is found by completing a pair `(P1, P2)`
//! maximally in the third slot. Candidate pairs come from three sources:
//!
//! * pairs with `V(P1, P1, P2) = m' < m`, obtained by peeling vertices off the
//!   maximal triples of mixed volume `m'`;
//! * full-dimensional pairs with `V(P1, P1, P2) = V(P2, P2, P1) = m`;
//! * pairs with a planar `P1`, searched inside explicit bounding regions.

use std::collections::{BTreeMap, HashSet};

use crate::equivalence::{translation_key, tuple_canonical_key, tuple_normal_form, CanonicalForm};
use crate::error::{input, internal, Error, Result};
use crate::exec::par_map;
use crate::lattice::{cross, gcd_all, integer_kernel, IntVector};
use crate::maximality::{complete_maximal, is_r_maximal_in, is_z_maximal_in};
use crate::mixed::{mixed_volume, surface_area_measure, v_aap, PolytopeTuple};
use crate::polytope::{
    erode_by_segment, halfspace_lattice_points, hull, integral_hull, minkowski_sum, segment, LatticePolytope,
    RationalHalfspaceSystem,
};
use crate::sandwich::{enumerate_by_volume, subpolytope_search, SearchConstraints, SearchVariant};

/// Which triples an enumeration covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Triples of three-dimensional polytopes only.
    FullDim,
    /// All irreducible triples.
    Irreducible,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::FullDim => "full-dim",
            Mode::Irreducible => "irreducible",
        }
    }

    fn min_second_dim(self) -> usize {
        match self {
            Mode::FullDim => 3,
            Mode::Irreducible => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MaximalKind {
    RMaximal,
    ZMaximalOnly,
}

impl MaximalKind {
    pub fn name(self) -> &'static str {
        match self {
            MaximalKind::RMaximal => "R-maximal",
            MaximalKind::ZMaximalOnly => "Z-maximal-only",
        }
    }
}

/// Structural type of a maximal triple of three-dimensional polytopes, with
/// the data that witnesses it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructuralType {
    /// `(P, P, P)`.
    Equal { base: LatticePolytope },
    /// `(aP, bP, cP)` with `a, b, c` not all equal.
    Homothetic { base: LatticePolytope, factors: [i64; 3] },
    /// `(P + aI, P + bI, P + cI)` with at most one of `a, b, c` zero; `I = [0, w]`.
    SegmentSum { base: LatticePolytope, direction: IntVector, multiples: [i64; 3] },
    /// `(P, P, P + aI)` with `P` a pyramid whose base has two edges parallel to `I = [0, w]`.
    Pyramid { base: LatticePolytope, direction: IntVector, multiple: i64 },
    /// One of the three exceptional triples, by index.
    Exceptional(usize),
}

impl StructuralType {
    pub fn code(&self) -> u8 {
        match self {
            StructuralType::Equal { .. } => 0,
            StructuralType::Homothetic { .. } => 1,
            StructuralType::SegmentSum { .. } => 2,
            StructuralType::Pyramid { .. } => 3,
            StructuralType::Exceptional(_) => 4,
        }
    }
}

/// The type of a triple together with every other type it also matches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Typing {
    pub kind: StructuralType,
    pub also_matches: Vec<u8>,
}

impl Typing {
    pub fn is_ambiguous(&self) -> bool {
        !self.also_matches.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ClassRecord {
    pub key: CanonicalForm,
    pub representative: PolytopeTuple,
    pub mixed_volume: i64,
    pub dims: Vec<usize>,
    pub maximal_kind: MaximalKind,
    /// `None` for triples with a lower-dimensional member or matching no type.
    pub structural_type: Option<Typing>,
}

impl ClassRecord {
    pub fn from_tuple(t: &PolytopeTuple) -> Result<Self> {
        let (rep, key) = tuple_normal_form(t)?;
        let mv = mixed_volume(&rep)?;
        let dims = rep.members().iter().map(|p| p.dim()).collect();
        let mut r_max = true;
        for i in 0..rep.len() {
            r_max &= is_r_maximal_in(&rep, i)?;
        }
        let full = rep.members().iter().all(|p| p.is_full_dim());
        let structural_type = if full { classify_structural_type(&rep)? } else { None };
        Ok(ClassRecord {
            key,
            representative: rep,
            mixed_volume: mv,
            dims,
            maximal_kind: if r_max { MaximalKind::RMaximal } else { MaximalKind::ZMaximalOnly },
            structural_type,
        })
    }

    pub fn is_full_dim(&self) -> bool {
        self.dims.iter().all(|&k| k == 3)
    }
}

fn poly(pts: &[[i64; 3]]) -> LatticePolytope {
    let vs: Vec<IntVector> = pts.iter().map(|p| IntVector::new(p)).collect();
    hull(&vs).expect("fixed polytope")
}

/// The three exceptional maximal triples of mixed volume at most 4.
pub fn exceptional_triples() -> Vec<PolytopeTuple> {
    let e1 = IntVector::new(&[1, 0, 0]);
    let e13 = IntVector::new(&[1, 0, 1]);
    let a = poly(&[[0, 0, 0], [2, 0, 0], [0, 1, 0], [0, 0, 1]]);
    let b = poly(&[[0, 0, 0], [3, 0, 0], [0, 1, 0], [0, 0, 1]]);
    let c = poly(&[[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 2]]);
    [(a, e1), (b, e1), (c, e13)]
        .into_iter()
        .map(|(p, w)| {
            let p3 = minkowski_sum(&[&p, &segment(&w)]).expect("sum");
            PolytopeTuple::new(vec![p.clone(), p, p3]).expect("triple")
        })
        .collect()
}

fn lattice_primitive_direction(e: &IntVector) -> IntVector {
    let u = e.primitive();
    if u < -u {
        -u
    } else {
        u
    }
}

fn edge_directions(members: &[LatticePolytope]) -> Vec<IntVector> {
    let mut dirs: Vec<IntVector> = Vec::new();
    for p in members {
        for &(i, j) in p.edges() {
            dirs.push(lattice_primitive_direction(&(p.vertices()[j] - p.vertices()[i])));
        }
    }
    dirs.sort();
    dirs.dedup();
    dirs
}

/// Repeatedly erodes `P` by `[0, w]`: returns `(E, k)` with `P = E + k[0, w]`
/// and `k` maximal.
fn erode_fully(p: &LatticePolytope, w: &IntVector) -> Result<(LatticePolytope, i64)> {
    let mut cur = p.clone();
    let mut k = 0;
    loop {
        let next = if cur.is_full_dim() { erode_by_segment(&cur, w)? } else { erode_lower(&cur, w)? };
        match next {
            Some(q) => {
                cur = q;
                k += 1;
            }
            None => return Ok((cur, k)),
        }
    }
}

/// Erosion of a lower-dimensional polytope by `[0, w]`: the hull of the lattice
/// points `x` with `x + w` in `P`, if adding the segment back recovers `P`.
fn erode_lower(p: &LatticePolytope, w: &IntVector) -> Result<Option<LatticePolytope>> {
    let pts: Vec<IntVector> = p.lattice_points().into_iter().filter(|x| p.contains(&(*x + *w))).collect();
    if pts.is_empty() {
        return Ok(None);
    }
    let q = hull(&pts)?;
    let back = minkowski_sum(&[&q, &segment(w)])?;
    Ok((back == *p).then_some(q))
}

fn is_pyramid_with_parallel_base_edges(p: &LatticePolytope, w: &IntVector) -> Result<bool> {
    let n = p.vertices().len();
    for f in p.facets()? {
        if f.vertices.len() + 1 != n {
            continue;
        }
        let k = f.vertices.len();
        let parallel = (0..k)
            .filter(|&i| {
                let a = p.vertices()[f.vertices[i]];
                let b = p.vertices()[f.vertices[(i + 1) % k]];
                cross(&(b - a), w).is_zero()
            })
            .count();
        if parallel >= 2 {
            return Ok(true);
        }
    }
    Ok(false)
}

fn detect_equal(ms: &[LatticePolytope]) -> Option<StructuralType> {
    let k0 = translation_key(&ms[0]);
    ms.iter()
        .all(|p| translation_key(p) == k0)
        .then(|| StructuralType::Equal { base: ms[0].normalize_translation() })
}

fn detect_homothetic(ms: &[LatticePolytope]) -> Option<StructuralType> {
    let mut reduced = Vec::new();
    let mut factors = [0i64; 3];
    for (i, p) in ms.iter().enumerate() {
        let q = p.normalize_translation();
        let coords: Vec<i64> = q.vertices().iter().flat_map(|v| v.to_vec()).collect();
        let g = gcd_all(&coords);
        let vs: Vec<IntVector> = q.vertices().iter().map(|v| v.div_exact(g).expect("divisible")).collect();
        reduced.push(hull(&vs).expect("reduced"));
        factors[i] = g;
    }
    let same = reduced.iter().all(|r| *r == reduced[0]);
    let distinct = factors.iter().any(|&f| f != factors[0]);
    (same && distinct).then(|| StructuralType::Homothetic { base: reduced[0].clone(), factors })
}

fn detect_segment_sum(ms: &[LatticePolytope], dirs: &[IntVector]) -> Result<Option<StructuralType>> {
    for w in dirs {
        let mut cores = Vec::new();
        let mut ks = [0i64; 3];
        for (i, p) in ms.iter().enumerate() {
            let (e, k) = erode_fully(p, w)?;
            cores.push(e);
            ks[i] = k;
        }
        let k0 = translation_key(&cores[0]);
        if !cores.iter().all(|c| translation_key(c) == k0) {
            continue;
        }
        let kmin = *ks.iter().min().unwrap();
        let at_min = ks.iter().filter(|&&k| k == kmin).count();
        let s = if at_min == 1 { kmin } else { kmin - 1 };
        if s < 0 || cores[0].dim() < 2 {
            continue;
        }
        let e = cores[0].normalize_translation();
        let base = minkowski_sum(&[&e, &segment(&(*w * s))])?;
        let base = if s == 0 { e } else { base };
        let multiples = [ks[0] - s, ks[1] - s, ks[2] - s];
        return Ok(Some(StructuralType::SegmentSum { base, direction: *w, multiples }));
    }
    Ok(None)
}

fn detect_pyramid(ms: &[LatticePolytope], dirs: &[IntVector]) -> Result<Option<StructuralType>> {
    for c in 0..3 {
        let (a, b) = match c {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let kp = translation_key(&ms[a]);
        if translation_key(&ms[b]) != kp {
            continue;
        }
        for w in dirs {
            let (e, k) = erode_fully(&ms[c], w)?;
            if k < 1 || translation_key(&e) != kp {
                continue;
            }
            let base = ms[a].normalize_translation();
            if is_pyramid_with_parallel_base_edges(&base, w)? {
                return Ok(Some(StructuralType::Pyramid { base, direction: *w, multiple: k }));
            }
        }
    }
    Ok(None)
}

/// Structural type of a maximal triple of three-dimensional polytopes. When
/// several types match, the smallest type code wins and the others are
/// recorded in `also_matches`.
pub fn classify_structural_type(t: &PolytopeTuple) -> Result<Option<Typing>> {
    if t.len() != 3 || t.ambient_dim() != 3 || !t.members().iter().all(|p| p.is_full_dim()) {
        return input("structural types are defined for triples of three-dimensional polytopes");
    }
    let ms = t.members();
    let dirs = edge_directions(ms);
    let mut found: Vec<StructuralType> = Vec::new();
    found.extend(detect_equal(ms));
    found.extend(detect_homothetic(ms));
    found.extend(detect_segment_sum(ms, &dirs)?);
    found.extend(detect_pyramid(ms, &dirs)?);
    let key = tuple_canonical_key(t)?;
    for (i, e) in exceptional_triples().iter().enumerate() {
        if tuple_canonical_key(e)? == key {
            found.push(StructuralType::Exceptional(i));
        }
    }
    if found.is_empty() {
        return Ok(None);
    }
    let kind = found.remove(0);
    let also_matches = found.iter().map(|f| f.code()).collect();
    Ok(Some(Typing { kind, also_matches }))
}

/// Normalized area of the projection of `P` along the primitive direction `w`.
pub fn projected_volume(p: &LatticePolytope, w: &IntVector) -> Result<i64> {
    let rows = integer_kernel(&[*w], 3);
    let pts: Vec<IntVector> = p.vertices().iter().map(|v| IntVector::new(&[rows[0].dot(v), rows[1].dot(v)])).collect();
    let q = hull(&pts)?;
    Ok(if q.is_full_dim() { q.volume() } else { 0 })
}

/// Mixed volume predicted by the closed-form expression of a structural type.
pub fn mixed_volume_formula_check(t: &PolytopeTuple, ty: &StructuralType) -> Result<i64> {
    let value = match ty {
        StructuralType::Equal { base } => base.volume(),
        StructuralType::Homothetic { base, factors } => factors.iter().product::<i64>() * base.volume(),
        StructuralType::SegmentSum { base, direction, multiples } => {
            base.volume() + multiples.iter().sum::<i64>() * projected_volume(base, direction)?
        }
        StructuralType::Pyramid { base, direction, multiple } => {
            base.volume() + multiple * projected_volume(base, direction)?
        }
        StructuralType::Exceptional(_) => return input("exceptional triples have no closed-form witness"),
    };
    let direct = mixed_volume(t)?;
    if direct != value {
        return internal(format!("witness formula gives {value}, direct mixed volume is {direct}"));
    }
    Ok(value)
}

/// All lattice subpolytopes reachable from `starts` by repeatedly removing a
/// vertex (replacing `P` by the hull of its other lattice points) while `keep`
/// holds, one per translation class. `keep` must be inherited by subpolytopes
/// of failing polytopes, i.e. failing once means failing below.
pub fn peel_closure(
    starts: Vec<LatticePolytope>,
    keep: &(dyn Fn(&LatticePolytope) -> bool + Sync),
) -> Result<Vec<LatticePolytope>> {
    let mut seen: HashSet<CanonicalForm> = HashSet::new();
    let mut frontier: Vec<(LatticePolytope, Vec<IntVector>)> = Vec::new();
    for s in starts {
        if keep(&s) && seen.insert(translation_key(&s)) {
            let pts = s.lattice_points();
            frontier.push((s, pts));
        }
    }
    let mut out = Vec::new();
    while !frontier.is_empty() {
        let children = par_map(&frontier, |(p, pts)| -> Result<Vec<(LatticePolytope, Vec<IntVector>)>> {
            let mut ch = Vec::new();
            for v in p.vertices() {
                let rest: Vec<IntVector> = pts.iter().filter(|x| *x != v).copied().collect();
                if rest.is_empty() {
                    continue;
                }
                let c = hull(&rest)?;
                if keep(&c) {
                    ch.push((c, rest));
                }
            }
            Ok(ch)
        });
        out.extend(frontier.into_iter().map(|(p, _)| p));
        let mut next = Vec::new();
        for ch in children {
            for (c, pts) in ch? {
                if seen.insert(translation_key(&c)) {
                    next.push((c, pts));
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

fn negate(p: &LatticePolytope) -> LatticePolytope {
    let vs: Vec<IntVector> = p.vertices().iter().map(|v| -*v).collect();
    hull(&vs).expect("negation")
}

/// Integral hull of `Q_i ∩ (Q_j - t)`.
fn intersection_hull(qi: &LatticePolytope, qj: &LatticePolytope, t: &IntVector) -> Result<Option<LatticePolytope>> {
    let mut normals = Vec::new();
    let mut bounds = Vec::new();
    for f in qi.facets()? {
        normals.push(f.normal);
        bounds.push(f.offset);
    }
    for f in qj.facets()? {
        normals.push(f.normal);
        bounds.push(f.offset - f.normal.dot(t));
    }
    integral_hull(&RationalHalfspaceSystem::from_integer(normals, bounds))
}

/// Pair `(P1, P2)` as a key: the class of `(P1, P1, P2)`.
fn pair_key(p1: &LatticePolytope, p2: &LatticePolytope) -> Result<CanonicalForm> {
    tuple_canonical_key(&PolytopeTuple::new(vec![p1.clone(), p1.clone(), p2.clone()])?)
}

type Pair = (LatticePolytope, LatticePolytope);

fn demaximize_triple(t: &PolytopeTuple, m: i64, mode: Mode) -> Result<Vec<Pair>> {
    let ms = t.members();
    let lo = mode.min_second_dim();
    let mut out = Vec::new();
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let (qi, qj, qk) = (&ms[i], &ms[j], &ms[k]);
        if !qi.is_full_dim() || !qj.is_full_dim() || qk.dim() < lo {
            continue;
        }
        let diff = minkowski_sum(&[qj, &negate(qi)])?;
        let mut starts = Vec::new();
        for tv in diff.lattice_points() {
            if let Some(c) = intersection_hull(qi, qj, &tv)? {
                starts.push(c);
            }
        }
        let keep1 = |p: &LatticePolytope| p.is_full_dim() && v_aap(p, qk) == m;
        for p1 in peel_closure(starts, &keep1)? {
            let s = surface_area_measure(&p1)?;
            let keep2 = |p: &LatticePolytope| p.dim() >= lo && s.pair_with(p) == m;
            for p2 in peel_closure(vec![qk.clone()], &keep2)? {
                out.push((p1.clone(), p2));
            }
        }
    }
    Ok(out)
}

fn dedup_pairs(pairs: Vec<Pair>) -> Result<Vec<Pair>> {
    let keyed = par_map(&pairs, |(a, b)| pair_key(a, b));
    let mut by_key: BTreeMap<CanonicalForm, Pair> = BTreeMap::new();
    for (k, p) in keyed.into_iter().zip(pairs) {
        by_key.entry(k?).or_insert(p);
    }
    Ok(by_key.into_values().collect())
}

/// Pairs `(P1, P2)` with `V(P1, P1, P2) = m` contained (after a translation of
/// each) in some maximal triple of mixed volume `m`: `P1` three-dimensional and
/// `P2` of dimension at least 3 (`FullDim`) or 2 (`Irreducible`). One pair per
/// class of `(P1, P1, P2)`.
pub fn demaximize_pairs(max_triples: &[PolytopeTuple], m: i64, mode: Mode) -> Result<Vec<Pair>> {
    let parts = par_map(max_triples, |t| demaximize_triple(t, m, mode));
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    dedup_pairs(all)
}

/// Pairs of three-dimensional polytopes with `V(P1, P1, P2) = V(P2, P2, P1) = m`,
/// one per class of `(P1, P1, P2)`.
pub fn enumerate_equal_mixed_pairs(m: i64) -> Result<Vec<Pair>> {
    let firsts = enumerate_by_volume(3, m)?;
    let parts = par_map(&firsts, |p1| -> Result<Vec<Pair>> {
        let mut out = Vec::new();
        let c = SearchConstraints { p1: p1.clone(), max_rel_volume: m, max_mixed: m };
        for q in complete_maximal(p1, p1, m)? {
            if !q.is_full_dim() {
                continue;
            }
            for p2 in subpolytope_search(&q, &SearchVariant::EmptySimplexSeeds, &c)? {
                if v_aap(p1, &p2) == m && v_aap(&p2, p1) == m {
                    out.push((p1.clone(), p2));
                }
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    dedup_pairs(all)
}

/// Search region for `P2` given a planar `P1 = P' x {0}` and a width `w` of
/// `P2` in direction `e3`.
#[derive(Clone, Debug)]
pub struct BoundingBoxSpec {
    pub w: i64,
    pub q1: i64,
    pub q2: i64,
    pub region: LatticePolytope,
    pub segment: LatticePolytope,
}

fn planar_base(p1: &LatticePolytope) -> Result<LatticePolytope> {
    if p1.ambient_dim() != 3 || p1.dim() != 2 || p1.vertices().iter().any(|v| v[2] != 0) {
        return input("expected a two-dimensional polytope in the plane x3 = 0");
    }
    let vs: Vec<IntVector> = p1.vertices().iter().map(|v| IntVector::new(&[v[0], v[1]])).collect();
    hull(&vs)
}

/// Regions containing, up to a shear fixing the plane `x3 = 0` and a
/// translation, every `P2` of width `w` in direction `e3` with
/// `V(P1, P1, P2) = w Vol_2(P') <= m1` and `V(P2, P2, P1) <= m2`. Each `P2`
/// lies in the region of its `(w, q1, q2)` and contains the segment
/// `[0, (q1, q2, w)]`.
pub fn bounding_boxes_lower_dim(p1: &LatticePolytope, m1: i64, m2: i64) -> Result<Vec<BoundingBoxSpec>> {
    let base = planar_base(p1)?;
    let vol = base.volume();
    let diffs: Vec<IntVector> = {
        let vs = base.vertices();
        let mut d = Vec::new();
        for a in vs {
            for b in vs {
                if a != b {
                    d.push(*a - *b);
                }
            }
        }
        d
    };
    let mut out = Vec::new();
    for w in 1..=m1 / vol {
        for q1 in 0..w {
            for q2 in 0..w {
                let mut normals = Vec::new();
                let mut bounds = Vec::new();
                for v in &diffs {
                    normals.push(IntVector::new(&[w * v[1], -w * v[0], v[0] * q2 - v[1] * q1]));
                    bounds.push(m2);
                }
                normals.push(IntVector::new(&[0, 0, 1]));
                bounds.push(w);
                normals.push(IntVector::new(&[0, 0, -1]));
                bounds.push(0);
                let pts = halfspace_lattice_points(&RationalHalfspaceSystem::from_integer(normals, bounds))?;
                let region = hull(&pts)?;
                let seg = hull(&[IntVector::zero(3), IntVector::new(&[q1, q2, w])])?;
                out.push(BoundingBoxSpec { w, q1, q2, region, segment: seg });
            }
        }
    }
    Ok(out)
}

fn lift_planar(p: &LatticePolytope) -> LatticePolytope {
    let vs: Vec<IntVector> = p.vertices().iter().map(|v| v.extend(0)).collect();
    hull(&vs).expect("lift")
}

/// Pairs `(P1, P2)` with `P1` planar and `V(P1, P1, P2) <= m`, where either `P2`
/// is three-dimensional with `V(P2, P2, P1) = m`, or `P2` is planar with
/// `V(P2, P2, P1) <= m^2`.
pub fn enumerate_lower_dim_pairs(m: i64) -> Result<Vec<Pair>> {
    let bases = enumerate_by_volume(2, m)?;
    let mut jobs: Vec<(LatticePolytope, BoundingBoxSpec, bool)> = Vec::new();
    for b in &bases {
        let p1 = lift_planar(b);
        for spec in bounding_boxes_lower_dim(&p1, m, m)? {
            jobs.push((p1.clone(), spec, true));
        }
        for spec in bounding_boxes_lower_dim(&p1, m, m * m)? {
            jobs.push((p1.clone(), spec, false));
        }
    }
    let parts = par_map(&jobs, |(p1, spec, full)| -> Result<Vec<Pair>> {
        let m1 = planar_base(p1)?.volume() * spec.w;
        let (variant, c) = if *full {
            // Aleksandrov-Fenchel: V(P2,P2,P1)^2 >= Vol(P2) V(P1,P1,P2).
            let c = SearchConstraints { p1: p1.clone(), max_rel_volume: m * m / m1, max_mixed: m };
            (SearchVariant::SegmentFullDim(spec.segment.clone()), c)
        } else {
            let c = SearchConstraints { p1: p1.clone(), max_rel_volume: m * m, max_mixed: m * m };
            (SearchVariant::SegmentPlanar(spec.segment.clone()), c)
        };
        let found = subpolytope_search(&spec.region, &variant, &c)?;
        Ok(found
            .into_iter()
            .filter(|p2| if *full { p2.is_full_dim() && v_aap(p2, p1) == m } else { p2.dim() == 2 })
            .map(|p2| (p1.clone(), p2))
            .collect())
    });
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    dedup_pairs(all)
}

/// Completes a pair maximally and keeps the triples that are maximal in every
/// slot and match the mode.
fn complete_pair(p1: &LatticePolytope, p2: &LatticePolytope, m: i64, mode: Mode) -> Result<Vec<PolytopeTuple>> {
    let mut out = Vec::new();
    for p3 in complete_maximal(p1, p2, m)? {
        if mode == Mode::FullDim && !p3.is_full_dim() {
            continue;
        }
        let t = PolytopeTuple::new(vec![p1.clone(), p2.clone(), p3])?;
        if is_z_maximal_in(&t, 0)? && is_z_maximal_in(&t, 1)? {
            out.push(t);
        }
    }
    Ok(out)
}

/// Pending work of one mixed-volume level: pairs still to complete and the
/// triples found so far.
#[derive(Clone, Debug, Default)]
pub struct LevelProgress {
    pub queue: Vec<PolytopeTuple>,
    pub found: Vec<PolytopeTuple>,
}

/// Persistence for finished levels and in-progress work. The default methods
/// store nothing.
pub trait LevelStore: Sync {
    fn load_level(&self, _mode: Mode, _m: i64) -> Result<Option<Vec<PolytopeTuple>>> {
        Ok(None)
    }
    fn save_level(&self, _mode: Mode, _m: i64, _triples: &[PolytopeTuple]) -> Result<()> {
        Ok(())
    }
    fn load_progress(&self, _mode: Mode, _m: i64) -> Result<Option<LevelProgress>> {
        Ok(None)
    }
    fn save_progress(&self, _mode: Mode, _m: i64, _p: &LevelProgress) -> Result<()> {
        Ok(())
    }
    /// Checked after every saved progress step; returning true stops the run
    /// with [`Error::Interrupted`].
    fn should_stop(&self) -> bool {
        false
    }
}

pub struct NoStore;

impl LevelStore for NoStore {}

/// Recursive triple enumeration with per-level caching.
pub struct TripleEnumerator<'a> {
    mode: Mode,
    store: &'a dyn LevelStore,
    levels: BTreeMap<i64, Vec<PolytopeTuple>>,
    /// Number of completion jobs between progress saves.
    pub chunk: usize,
}

impl<'a> TripleEnumerator<'a> {
    pub fn new(mode: Mode, store: &'a dyn LevelStore) -> Self {
        TripleEnumerator { mode, store, levels: BTreeMap::new(), chunk: 512 }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Maximal triples of mixed volume `m` in canonical representation, sorted
    /// by canonical key.
    pub fn level(&mut self, m: i64) -> Result<Vec<PolytopeTuple>> {
        if m < 1 {
            return input("mixed volume must be positive");
        }
        if let Some(l) = self.levels.get(&m) {
            return Ok(l.clone());
        }
        let triples = match self.store.load_level(self.mode, m)? {
            Some(l) => l,
            None => {
                let l = self.compute_level(m)?;
                self.store.save_level(self.mode, m, &l)?;
                l
            }
        };
        self.levels.insert(m, triples.clone());
        Ok(triples)
    }

    fn candidate_pairs(&mut self, m: i64) -> Result<Vec<PolytopeTuple>> {
        let mut pairs = Vec::new();
        for mp in 1..m {
            let lower = self.level(mp)?;
            log::info!("level {m}: peeling {} maximal triples of mixed volume {mp}", lower.len());
            pairs.extend(demaximize_pairs(&lower, mp, self.mode)?);
        }
        log::info!("level {m}: {} pairs from lower levels", pairs.len());
        let eq = enumerate_equal_mixed_pairs(m)?;
        log::info!("level {m}: {} pairs with equal mixed volumes", eq.len());
        pairs.extend(eq);
        if self.mode == Mode::Irreducible {
            let low = enumerate_lower_dim_pairs(m)?;
            log::info!("level {m}: {} pairs with a planar member", low.len());
            pairs.extend(low);
        }
        pairs.into_iter().map(|(a, b)| PolytopeTuple::new(vec![a, b])).collect()
    }

    fn compute_level(&mut self, m: i64) -> Result<Vec<PolytopeTuple>> {
        let mut progress = match self.store.load_progress(self.mode, m)? {
            Some(p) => p,
            None => {
                let queue = self.candidate_pairs(m)?;
                let p = LevelProgress { queue, found: Vec::new() };
                self.store.save_progress(self.mode, m, &p)?;
                p
            }
        };
        let mut registry: BTreeMap<CanonicalForm, PolytopeTuple> = BTreeMap::new();
        for t in progress.found.drain(..) {
            registry.insert(tuple_canonical_key(&t)?, t);
        }
        let mode = self.mode;
        while !progress.queue.is_empty() {
            if self.store.should_stop() {
                return Err(Error::Interrupted);
            }
            let n = self.chunk.min(progress.queue.len());
            let batch: Vec<PolytopeTuple> = progress.queue.drain(..n).collect();
            let results = par_map(&batch, |pair| {
                let ms = pair.members();
                complete_pair(&ms[0], &ms[1], m, mode)
                    .and_then(|ts| ts.into_iter().map(|t| Ok((tuple_canonical_key(&t)?, t))).collect::<Result<Vec<_>>>())
            });
            for r in results {
                for (k, t) in r? {
                    registry.entry(k).or_insert(t);
                }
            }
            progress.found = registry.values().cloned().collect();
            self.store.save_progress(self.mode, m, &progress)?;
            progress.found.clear();
        }
        let reps = registry.into_values().collect::<Vec<_>>();
        let mut normal: Vec<(CanonicalForm, PolytopeTuple)> =
            par_map(&reps, tuple_normal_form).into_iter().map(|r| r.map(|(t, k)| (k, t))).collect::<Result<_>>()?;
        normal.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(normal.into_iter().map(|(_, t)| t).collect())
    }

    /// Class records of the maximal triples of mixed volume `m`.
    pub fn records(&mut self, m: i64) -> Result<Vec<ClassRecord>> {
        let triples = self.level(m)?;
        par_map(&triples, ClassRecord::from_tuple).into_iter().collect()
    }
}

/// Maximal triples of three-dimensional lattice polytopes with mixed volume `m`.
pub fn enumerate_full_dim_triples(m: i64) -> Result<Vec<ClassRecord>> {
    TripleEnumerator::new(Mode::FullDim, &NoStore).records(m)
}

/// Maximal irreducible triples with mixed volume `m` and at least one
/// two-dimensional member.
pub fn enumerate_lower_dim_triples(m: i64) -> Result<Vec<ClassRecord>> {
    let all = TripleEnumerator::new(Mode::Irreducible, &NoStore).records(m)?;
    Ok(all.into_iter().filter(|r| !r.is_full_dim()).collect())
}

/// Per-type counts `[type 0, ..., type 4, untyped]` of full-dimensional records.
pub fn type_counts(records: &[ClassRecord]) -> [usize; 6] {
    let mut c = [0usize; 6];
    for r in records.iter().filter(|r| r.is_full_dim()) {
        match &r.structural_type {
            Some(t) => c[t.kind.code() as usize] += 1,
            None => c[5] += 1,
        }
    }
    c
}
