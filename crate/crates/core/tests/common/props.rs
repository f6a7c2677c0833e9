//! Mixed-volume properties as plain checks on point sets, shared by the
//! proptest suite and the acceptance report.

use mixvol::mixed::{
    is_nondegenerate, mixed_area_measure, mixed_volume, mixed_volume_2d, mixed_volume_by_measure, surface_area_measure,
    PolytopeTuple,
};
use mixvol::polytope::segment;
use mixvol::{IntVector, LatticePolytope};

use super::*;

pub type Check = std::result::Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn mv(a: &LatticePolytope, b: &LatticePolytope, c: &LatticePolytope) -> i64 {
    mixed_volume(&PolytopeTuple::new(vec![a.clone(), b.clone(), c.clone()]).unwrap()).unwrap()
}

pub fn symmetric(a: &[P3], b: &[P3], c: &[P3]) -> Check {
    let ps = [poly(a), poly(b), poly(c)];
    let v = mv(&ps[0], &ps[1], &ps[2]);
    for [i, j, k] in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let w = mv(&ps[i], &ps[j], &ps[k]);
        ensure(w == v, || format!("order {i}{j}{k} gives {w}, identity order {v}: {a:?} {b:?} {c:?}"))?;
    }
    Ok(())
}

pub fn matches_oracle(a: &[P3], b: &[P3], c: &[P3]) -> Check {
    let ps = [poly(a), poly(b), poly(c)];
    let v = mv(&ps[0], &ps[1], &ps[2]);
    let vs = [points_of(&ps[0]), points_of(&ps[1]), points_of(&ps[2])];
    let o = oracle_mixed_volume([&vs[0], &vs[1], &vs[2]]);
    ensure(v == o, || format!("library {v}, oracle {o}: {a:?} {b:?} {c:?}"))
}

pub fn linear(p: &[P3], q: &[P3], b: &[P3], c: &[P3]) -> Check {
    let (p, q, b, c) = (poly(p), poly(q), poly(b), poly(c));
    let lhs = mv(&p.minkowski_sum(&q).unwrap(), &b, &c);
    let rhs = mv(&p, &b, &c) + mv(&q, &b, &c);
    ensure(lhs == rhs, || format!("V(P+Q,B,C) = {lhs} but V(P,B,C) + V(Q,B,C) = {rhs}"))
}

pub fn monotone(a: &[P3], extra: &[P3], b: &[P3], c: &[P3]) -> Check {
    let small = poly(a);
    let big = poly(&[a, extra].concat());
    let (b, c) = (poly(b), poly(c));
    let (x, y) = (mv(&small, &b, &c), mv(&big, &b, &c));
    ensure(x <= y, || format!("enlarging the first member lowered {x} to {y}"))
}

pub fn invariant(a: &[P3], b: &[P3], c: &[P3], u: &[[i64; 3]; 3], t: [P3; 3]) -> Check {
    let (a, b, c) = (poly(a), poly(b), poly(c));
    let v = mv(&a, &b, &c);
    let w = mv(&apply(u, &a), &apply(u, &b), &apply(u, &c));
    ensure(w == v, || format!("unimodular image {u:?} changed {v} to {w}"))?;
    let tr = |p: &LatticePolytope, x: P3| p.translate(&IntVector::new(&x));
    let w = mv(&tr(&c, t[2]), &tr(&a, t[0]), &tr(&b, t[1]));
    ensure(w == v, || format!("translated and permuted triple changed {v} to {w}"))
}

pub fn aleksandrov_fenchel(a: &[P3], b: &[P3], c: &[P3]) -> Check {
    let (a, b, c) = (poly(a), poly(b), poly(c));
    let v = mv(&a, &b, &c);
    let (x, y) = (mv(&a, &a, &c), mv(&b, &b, &c));
    ensure(v * v >= x * y, || format!("{v}^2 < {x} * {y}"))
}

pub fn positive_iff_nondegenerate(a: &[P3], b: &[P3], c: &[P3]) -> Check {
    let sets = [a, b, c];
    let mut oracle = true;
    for mask in 1u32..8 {
        let chosen: Vec<&[P3]> = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| sets[i]).collect();
        oracle &= oracle_dim(&oracle_sum(&chosen)) >= chosen.len();
    }
    let t = PolytopeTuple::new(sets.iter().map(|s| poly(s)).collect()).unwrap();
    ensure(is_nondegenerate(&t) == oracle, || format!("nondegeneracy predicate disagrees with dimensions: {sets:?}"))?;
    let v = mixed_volume(&t).unwrap();
    ensure((v > 0) == oracle, || format!("mixed volume {v} but nondegenerate = {oracle}: {sets:?}"))
}

pub fn decomposes(a: &[[i64; 2]], b: &[[i64; 2]], c: &[P3]) -> Check {
    let lift = |s: &[[i64; 2]]| poly(&s.iter().map(|p| [p[0], p[1], 0]).collect::<Vec<_>>());
    let flat = |s: &[[i64; 2]]| {
        let vs: Vec<IntVector> = s.iter().map(|p| IntVector::new(p)).collect();
        mixvol::polytope::hull(&vs).unwrap()
    };
    let planar = oracle_mixed_area(a, b);
    let lib = mixed_volume_2d(&flat(a), &flat(b)).unwrap();
    ensure(lib == planar, || format!("planar mixed volume {lib}, oracle {planar}"))?;
    let p3 = poly(c);
    let width = p3.width(&IntVector::new(&[0, 0, 1]));
    let v = mv(&lift(a), &lift(b), &p3);
    ensure(v == planar * width, || format!("V = {v} but V2 * width = {planar} * {width}"))
}

pub fn measure_formula(a: &[P3], b: &[P3], c: &[P3]) -> Check {
    let t = PolytopeTuple::new(vec![poly(a), poly(b), poly(c)]).unwrap();
    let (x, y) = (mixed_volume_by_measure(&t).unwrap(), mixed_volume(&t).unwrap());
    ensure(x == y, || format!("measure formula {x}, inclusion-exclusion {y}"))
}

/// `None` unless both polytopes are three-dimensional.
pub fn polarized_measure(a: &[P3], b: &[P3]) -> Option<Check> {
    let (p, q) = (poly(a), poly(b));
    if !p.is_full_dim() || !q.is_full_dim() {
        return None;
    }
    let mixed = mixed_area_measure(&p, &q).unwrap();
    let sp = surface_area_measure(&p).unwrap();
    let sq = surface_area_measure(&q).unwrap();
    let spq = surface_area_measure(&p.minkowski_sum(&q).unwrap()).unwrap();
    let check = || -> Check {
        for (u, total) in &spq.entries {
            let twice = total - sp.value(u) - sq.value(u);
            ensure(twice == 2 * mixed.value(u), || format!("direction {u:?}: 2 S(P,Q) = {} vs {twice}", 2 * mixed.value(u)))?;
        }
        for (u, _) in &mixed.entries {
            ensure(spq.value(u) > 0, || format!("direction {u:?} is not a facet normal of P + Q"))?;
        }
        Ok(())
    };
    Some(check())
}

/// `None` when a direction is zero.
pub fn segment_determinant(u: P3, v: P3, w: P3) -> Option<Check> {
    if u == [0, 0, 0] || v == [0, 0, 0] || w == [0, 0, 0] {
        return None;
    }
    let s = |x: P3| segment(&IntVector::new(&x));
    let got = mv(&s(u), &s(v), &s(w));
    let want = det3(u, v, w).abs();
    Some(ensure(got == want, || format!("segments {u:?} {v:?} {w:?}: {got} vs |det| {want}")))
}

pub fn diagonal_is_volume(a: &[P3]) -> Check {
    let p = poly(a);
    let vol = oracle_volume(a);
    ensure(p.volume() == vol, || format!("volume {} vs oracle {vol}: {a:?}", p.volume()))?;
    let v = mv(&p, &p, &p);
    ensure(v == vol, || format!("V(P,P,P) = {v} vs oracle volume {vol}: {a:?}"))
}
