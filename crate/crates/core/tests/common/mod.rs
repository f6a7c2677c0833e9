//! Helpers shared by the integration tests: random instances, independent
//! oracles written without the library's geometry, and fixture loading.
#![allow(dead_code)]

pub mod brute;
pub mod constructions;
pub mod props;

use std::path::PathBuf;

use mixvol::io::parse_conv_expr;
use mixvol::mixed::PolytopeTuple;
use mixvol::{IntVector, LatticePolytope};
use rand::Rng;

pub type P3 = [i64; 3];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// The appendix fixture file.
pub fn appendix() -> serde_json::Value {
    let text = std::fs::read_to_string(fixture_path("appendix.json")).expect("fixture file");
    serde_json::from_str(&text).expect("fixture JSON")
}

pub fn fixture_polytopes(key: &str, d: usize) -> Vec<LatticePolytope> {
    appendix()[key]
        .as_array()
        .unwrap_or_else(|| panic!("fixture {key}"))
        .iter()
        .map(|s| parse_conv_expr(s.as_str().unwrap(), d).unwrap())
        .collect()
}

pub fn fixture_tuples(key: &str, d: usize) -> Vec<PolytopeTuple> {
    appendix()[key]
        .as_array()
        .unwrap_or_else(|| panic!("fixture {key}"))
        .iter()
        .map(|t| {
            let ms = t.as_array().unwrap().iter().map(|s| parse_conv_expr(s.as_str().unwrap(), d).unwrap()).collect();
            PolytopeTuple::new(ms).unwrap()
        })
        .collect()
}

pub fn points_of(p: &LatticePolytope) -> Vec<P3> {
    p.vertices().iter().map(|v| [v[0], v[1], v[2]]).collect()
}

pub fn poly(pts: &[P3]) -> LatticePolytope {
    let vs: Vec<IntVector> = pts.iter().map(|p| IntVector::new(p)).collect();
    mixvol::polytope::hull(&vs).unwrap()
}

pub fn random_points<R: Rng>(rng: &mut R, min: usize, max: usize) -> Vec<P3> {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)]).collect()
}

pub fn random_polytope<R: Rng>(rng: &mut R, min: usize, max: usize) -> LatticePolytope {
    poly(&random_points(rng, min, max))
}

/// Product of random elementary integer row operations.
pub fn random_unimodular<R: Rng>(rng: &mut R) -> [[i64; 3]; 3] {
    let mut a = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    for _ in 0..6 {
        let i = rng.gen_range(0..3);
        let j = (i + rng.gen_range(1..3)) % 3;
        match rng.gen_range(0..3) {
            0 => {
                let s = if rng.gen_bool(0.5) { 1 } else { -1 };
                for k in 0..3 {
                    a[i][k] += s * a[j][k];
                }
            }
            1 => a.swap(i, j),
            _ => {
                for k in 0..3 {
                    a[i][k] = -a[i][k];
                }
            }
        }
    }
    a
}

pub fn apply(a: &[[i64; 3]; 3], p: &LatticePolytope) -> LatticePolytope {
    let rows: Vec<IntVector> = a.iter().map(|r| IntVector::new(r)).collect();
    p.map_linear(&rows).unwrap()
}

pub fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: P3, b: P3) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn det3(a: P3, b: P3, c: P3) -> i64 {
    dot(a, cross(b, c))
}

fn dedup(mut pts: Vec<P3>) -> Vec<P3> {
    pts.sort();
    pts.dedup();
    pts
}

/// Normalized volume (`6 vol`) of the convex hull of a point set in `Z^3`:
/// supporting planes are found by testing every triple of points, and each
/// facet is fanned out from a fixed apex.
pub fn oracle_volume(pts: &[P3]) -> i64 {
    let pts = dedup(pts.to_vec());
    let n = pts.len();
    let mut normals: Vec<P3> = Vec::new();
    let mut full = false;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nv = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                if nv == [0, 0, 0] {
                    continue;
                }
                let side: Vec<i64> = pts.iter().map(|x| dot(nv, sub(*x, pts[i]))).collect();
                if side.iter().any(|&s| s != 0) {
                    full = true;
                }
                let nv = if side.iter().all(|&s| s <= 0) {
                    nv
                } else if side.iter().all(|&s| s >= 0) {
                    [-nv[0], -nv[1], -nv[2]]
                } else {
                    continue;
                };
                let g = gcd(gcd(nv[0].abs(), nv[1].abs()), nv[2].abs());
                let nv = [nv[0] / g, nv[1] / g, nv[2] / g];
                if !normals.contains(&nv) {
                    normals.push(nv);
                }
            }
        }
    }
    if !full {
        return 0;
    }
    let apex = pts[0];
    let mut total = 0;
    for nv in normals {
        let h = pts.iter().map(|x| dot(nv, *x)).max().unwrap();
        if dot(nv, apex) == h {
            continue;
        }
        let face: Vec<P3> = pts.iter().filter(|x| dot(nv, **x) == h).copied().collect();
        for tri in fan(&face, nv) {
            total += det3(sub(tri[0], apex), sub(tri[1], apex), sub(tri[2], apex)).abs();
        }
    }
    total
}

/// Fan triangulation of the convex hull of a planar point set with normal `nv`,
/// using a monotone chain in the coordinate plane where the projection is injective.
fn fan(face: &[P3], nv: P3) -> Vec<[P3; 3]> {
    let drop = (0..3).max_by_key(|&i| nv[i].abs()).unwrap();
    let keep: Vec<usize> = (0..3).filter(|&i| i != drop).collect();
    let mut pts: Vec<P3> = face.to_vec();
    pts.sort_by_key(|p| (p[keep[0]], p[keep[1]]));
    pts.dedup();
    if pts.len() < 3 {
        return vec![];
    }
    let turn = |o: P3, a: P3, b: P3| {
        (a[keep[0]] - o[keep[0]]) * (b[keep[1]] - o[keep[1]]) - (a[keep[1]] - o[keep[1]]) * (b[keep[0]] - o[keep[0]])
    };
    let mut hull: Vec<P3> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P3>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    (1..hull.len().saturating_sub(1)).map(|i| [hull[0], hull[i], hull[i + 1]]).collect()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn oracle_sum(sets: &[&[P3]]) -> Vec<P3> {
    let mut acc = vec![[0, 0, 0]];
    for s in sets {
        acc = dedup(acc.iter().flat_map(|a| s.iter().map(move |b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])).collect());
    }
    acc
}

/// Mixed volume by inclusion-exclusion over the oracle volume of point-set sums.
pub fn oracle_mixed_volume(sets: [&[P3]; 3]) -> i64 {
    let mut total = 0;
    for mask in 1u32..8 {
        let chosen: Vec<&[P3]> = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| sets[i]).collect();
        let sign = if (3 - chosen.len()) % 2 == 0 { 1 } else { -1 };
        total += sign * oracle_volume(&oracle_sum(&chosen));
    }
    assert_eq!(total % 6, 0, "inclusion-exclusion must be divisible by 3!");
    total / 6
}

/// Affine dimension of a point set.
pub fn oracle_dim(pts: &[P3]) -> usize {
    let diffs: Vec<P3> = pts.iter().map(|p| sub(*p, pts[0])).collect();
    if diffs.iter().all(|d| *d == [0, 0, 0]) {
        return 0;
    }
    let mut two = false;
    for a in &diffs {
        for b in &diffs {
            if cross(*a, *b) != [0, 0, 0] {
                two = true;
                for c in &diffs {
                    if det3(*a, *b, *c) != 0 {
                        return 3;
                    }
                }
            }
        }
    }
    if two {
        2
    } else {
        1
    }
}

/// Normalized area of a planar point set in `Z^2` via the shoelace formula.
pub fn oracle_area_2d(pts: &[[i64; 2]]) -> i64 {
    let lifted: Vec<P3> = pts.iter().map(|p| [p[0], p[1], 0]).collect();
    let face = dedup(lifted);
    if oracle_dim(&face) < 2 {
        return 0;
    }
    fan(&face, [0, 0, 1]).iter().map(|t| det3(sub(t[1], t[0]), sub(t[2], t[0]), [0, 0, 1]).abs()).sum()
}

/// Planar mixed volume `Vol(A+B) - Vol(A) - Vol(B)` of normalized areas, halved.
pub fn oracle_mixed_area(a: &[[i64; 2]], b: &[[i64; 2]]) -> i64 {
    let sum: Vec<[i64; 2]> = a.iter().flat_map(|x| b.iter().map(move |y| [x[0] + y[0], x[1] + y[1]])).collect();
    let v = oracle_area_2d(&sum) - oracle_area_2d(a) - oracle_area_2d(b);
    assert_eq!(v % 2, 0);
    v / 2
}

/// Lattice points of `[lo, hi]^d`.
pub fn cube(d: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out.into_iter().flat_map(|p| (lo..=hi).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out
}
