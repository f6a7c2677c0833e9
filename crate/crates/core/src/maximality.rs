//! Maximal completions of tuples and maximality tests.
//!
//! For polytopes `P_1, ..., P_{d-1}` with mixed area measure `S` supported on
//! `u_1, ..., u_r` with values `a_i`, a polytope `Q` satisfies
//! `V(P_1, ..., P_{d-1}, Q) = sum_i h_Q(u_i) a_i`. The largest lattice polytope
//! with prescribed support values `h_i` on the `u_i` is the integral hull of
//! `{x : <u_i, x> <= h_i}`; completions are these hulls for all `h >= 0` with
//! `sum_i h_i a_i = m` whose support values are attained.

use std::collections::BTreeMap;

use crate::equivalence::{translation_key, tuple_canonical_key, tuple_normal_form, CanonicalForm};
use crate::error::{input, Result};
use crate::exec::{par_flat_map, par_map};
use crate::lattice::IntVector;
use crate::mixed::{area_measure, is_irreducible, positively_spans, AreaMeasure, PolytopeTuple};
use crate::polytope::{hull, BoxBounder, LatticePolytope};
use crate::sandwich::enumerate_by_volume;

/// All `h in Z_{>=0}^r` with `sum_i h_i a_i = m`, in lexicographic order.
pub fn height_vectors(a: &[i64], m: i64) -> Vec<Vec<i64>> {
    fn rec(a: &[i64], i: usize, rest: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == a.len() - 1 {
            if rest % a[i] == 0 {
                cur.push(rest / a[i]);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let mut h = 0;
        while h * a[i] <= rest {
            cur.push(h);
            rec(a, i + 1, rest - h * a[i], cur, out);
            cur.pop();
            h += 1;
        }
    }
    let mut out = Vec::new();
    if a.is_empty() || m < 0 {
        return out;
    }
    rec(a, 0, m, &mut Vec::with_capacity(a.len()), &mut out);
    out
}

/// Completion engine for a fixed mixed area measure.
pub struct Completer {
    normals: Vec<IntVector>,
    values: Vec<i64>,
    bounder: BoxBounder,
}

impl Completer {
    pub fn new(measure: &AreaMeasure) -> Result<Self> {
        let normals = measure.support();
        if !positively_spans(&normals) {
            return input("the area measure does not positively span; completions are unbounded");
        }
        let values = measure.entries.iter().map(|(_, a)| *a).collect();
        let bounder = BoxBounder::new(&normals)?;
        Ok(Completer { normals, values, bounder })
    }

    /// Integral hull of `<u_i, x> <= h_i` when every `h_i` is attained.
    pub fn tight_hull(&self, h: &[i64]) -> Result<Option<LatticePolytope>> {
        let pts = self.bounder.lattice_points(&self.normals, h);
        if pts.is_empty() {
            return Ok(None);
        }
        for (u, &hi) in self.normals.iter().zip(h) {
            if pts.iter().map(|x| u.dot(x)).max().unwrap() != hi {
                return Ok(None);
            }
        }
        hull(&pts).map(Some)
    }

    /// Lattice points of `<u_i, x> <= h_i`.
    pub fn lattice_points(&self, h: &[i64]) -> Vec<IntVector> {
        self.bounder.lattice_points(&self.normals, h)
    }

    /// Every lattice polytope `Q`, up to translation, that is maximal with
    /// `sum_i h_Q(u_i) a_i = m` and passes `keep`.
    pub fn complete(&self, m: i64, keep: &(dyn Fn(&LatticePolytope) -> bool + Sync)) -> Result<Vec<LatticePolytope>> {
        let hs = height_vectors(&self.values, m);
        let found = par_flat_map(&hs, |h| match self.tight_hull(h) {
            Ok(Some(q)) if keep(&q) => vec![Ok(q)],
            Ok(_) => vec![],
            Err(e) => vec![Err(e)],
        });
        let mut by_key: BTreeMap<CanonicalForm, LatticePolytope> = BTreeMap::new();
        for q in found {
            let q = q?;
            by_key.entry(translation_key(&q)).or_insert(q);
        }
        Ok(by_key.into_values().collect())
    }
}

/// All `P_d` (up to translation) such that `(P_1, ..., P_{d-1}, P_d)` is
/// irreducible, has mixed volume `m` and is maximal in the last slot.
pub fn complete_maximal_tuple(members: &[&LatticePolytope], m: i64) -> Result<Vec<LatticePolytope>> {
    let measure = area_measure(members)?;
    let completer = Completer::new(&measure)?;
    let keep = |q: &LatticePolytope| {
        let mut ms: Vec<LatticePolytope> = members.iter().map(|p| (*p).clone()).collect();
        ms.push(q.clone());
        PolytopeTuple::new(ms).map(|t| is_irreducible(&t)).unwrap_or(false)
    };
    completer.complete(m, &keep)
}

/// Maximal completions `P3` of a pair in `R^3`: `V(P1, P2, P3) = m`, the triple
/// is irreducible and maximal in the third slot.
pub fn complete_maximal(p1: &LatticePolytope, p2: &LatticePolytope, m: i64) -> Result<Vec<LatticePolytope>> {
    if p1.ambient_dim() != 3 || p2.ambient_dim() != 3 {
        return input("complete_maximal expects polytopes in R^3");
    }
    complete_maximal_tuple(&[p1, p2], m)
}

/// Maximal completions `P2` of a polygon: `V(P1, P2) = m`, both two-dimensional,
/// maximal in the second slot.
pub fn complete_maximal_2d(p1: &LatticePolytope, m: i64) -> Result<Vec<LatticePolytope>> {
    if p1.ambient_dim() != 2 || !p1.is_full_dim() {
        return input("complete_maximal_2d expects a two-dimensional polygon");
    }
    complete_maximal_tuple(&[p1], m)
}

fn others(t: &PolytopeTuple, i: usize) -> Vec<&LatticePolytope> {
    t.members().iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p).collect()
}

/// `P_i` cannot be enlarged to a larger lattice polytope without changing the
/// mixed volume: it equals the integral hull of `<u, x> <= h_{P_i}(u)` over the
/// support of the mixed area measure of the other members.
pub fn is_z_maximal_in(t: &PolytopeTuple, i: usize) -> Result<bool> {
    if t.len() != t.ambient_dim() || i >= t.len() {
        return input("maximality needs a d-tuple in R^d and a valid slot");
    }
    let measure = area_measure(&others(t, i))?;
    let normals = measure.support();
    if !positively_spans(&normals) {
        return Ok(false);
    }
    let p = &t.members()[i];
    let h: Vec<i64> = normals.iter().map(|u| p.support(u)).collect();
    let bounder = BoxBounder::new(&normals)?;
    let pts = bounder.lattice_points(&normals, &h);
    Ok(pts.iter().all(|x| p.contains(x)))
}

/// `P_i` cannot be enlarged to any larger real polytope without changing the
/// mixed volume: `P_i` is full-dimensional and its facet normals lie in the
/// support of the mixed area measure of the other members.
pub fn is_r_maximal_in(t: &PolytopeTuple, i: usize) -> Result<bool> {
    if t.len() != t.ambient_dim() || i >= t.len() {
        return input("maximality needs a d-tuple in R^d and a valid slot");
    }
    let p = &t.members()[i];
    if !p.is_full_dim() {
        return Ok(false);
    }
    let measure = area_measure(&others(t, i))?;
    Ok(p.facets()?.iter().all(|f| measure.value(&f.normal) > 0))
}

/// Z-maximal in every slot.
pub fn is_maximal(t: &PolytopeTuple) -> Result<bool> {
    for i in 0..t.len() {
        if !is_z_maximal_in(t, i)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Maximal pairs of lattice polygons with mixed volume `m`, one per class
/// modulo a common unimodular map, independent translations and swapping,
/// in canonical representation.
pub fn enumerate_max_pairs_2d(m: i64) -> Result<Vec<PolytopeTuple>> {
    let firsts = enumerate_by_volume(2, m)?;
    let found = par_map(&firsts, |p1| -> Result<Vec<(CanonicalForm, PolytopeTuple)>> {
        let mut out = Vec::new();
        for p2 in complete_maximal_2d(p1, m)? {
            let t = PolytopeTuple::new(vec![p1.clone(), p2])?;
            if is_z_maximal_in(&t, 0)? {
                out.push((tuple_canonical_key(&t)?, t));
            }
        }
        Ok(out)
    });
    let mut by_key: BTreeMap<CanonicalForm, PolytopeTuple> = BTreeMap::new();
    for f in found {
        for (k, t) in f? {
            by_key.entry(k).or_insert(t);
        }
    }
    let reps: Vec<PolytopeTuple> = by_key.into_values().collect();
    par_map(&reps, |t| tuple_normal_form(t).map(|(r, _)| r)).into_iter().collect()
}
