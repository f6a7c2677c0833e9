//! Brute-force enumeration of lattice polytopes of small volume.
//!
//! Every full-dimensional lattice polytope contains a simplex spanned by its
//! vertices, and a unimodular map takes that simplex to `conv(0, columns of H)`
//! with `H` upper triangular in Hermite normal form. All lattice points `x` of
//! a polytope `P` of volume at most `m` containing such a simplex `S` satisfy
//! `Vol(conv(S, x)) <= m`; writing `x` in barycentric coordinates with respect
//! to `S` shows `|x_i| <= d m^2`. The search grows point sets inside that box,
//! keeping only sets that are the full lattice point set of their hull.

use std::collections::{BTreeSet, HashSet};

use mixvol::equivalence::affine_key;
use mixvol::IntVector;

use super::{cube, oracle_area_2d, oracle_volume};

fn volume(d: usize, pts: &[Vec<i64>]) -> i64 {
    match d {
        2 => oracle_area_2d(&pts.iter().map(|p| [p[0], p[1]]).collect::<Vec<_>>()),
        3 => oracle_volume(&pts.iter().map(|p| [p[0], p[1], p[2]]).collect::<Vec<_>>()),
        _ => unreachable!(),
    }
}

/// Upper triangular Hermite normal forms with determinant at most `m`.
pub fn hermite_matrices(d: usize, m: i64) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let mut diag = vec![1i64; d];
    fn diags(i: usize, d: usize, rest: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == d {
            out.push(cur.clone());
            return;
        }
        for a in 1..=rest {
            cur[i] = a;
            diags(i + 1, d, rest / a, cur, out);
        }
    }
    let mut ds = Vec::new();
    diags(0, d, m, &mut diag, &mut ds);
    for dg in ds {
        // Entries above the diagonal in column j range over 0..dg[j].
        let slots: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let mut idx = vec![0i64; slots.len()];
        loop {
            let mut h = vec![vec![0i64; d]; d];
            for i in 0..d {
                h[i][i] = dg[i];
            }
            for (s, &(i, j)) in slots.iter().enumerate() {
                h[i][j] = idx[s];
            }
            out.push(h);
            let mut s = 0;
            while s < slots.len() {
                idx[s] += 1;
                if idx[s] < dg[slots[s].1] {
                    break;
                }
                idx[s] = 0;
                s += 1;
            }
            if s == slots.len() {
                break;
            }
        }
    }
    out
}

fn closure(d: usize, set: &[Vec<i64>], candidates: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let v = volume(d, set);
    let mut out: Vec<Vec<i64>> = candidates
        .iter()
        .filter(|c| {
            let mut s = set.to_vec();
            s.push((*c).clone());
            volume(d, &s) == v
        })
        .cloned()
        .collect();
    out.sort();
    out
}

/// Affine classes of `d`-polytopes with volume at most `m`, by exhaustive search.
pub fn brute_force_keys(d: usize, m: i64) -> BTreeSet<Vec<u8>> {
    let mut keys = BTreeSet::new();
    let r = d as i64 * m * m;
    for h in hermite_matrices(d, m) {
        let mut simplex = vec![vec![0i64; d]];
        for j in 0..d {
            simplex.push((0..d).map(|i| h[i][j]).collect());
        }
        let candidates: Vec<Vec<i64>> = cube(d, -r, r)
            .into_iter()
            .filter(|x| {
                let mut s = simplex.clone();
                s.push(x.clone());
                volume(d, &s) <= m
            })
            .collect();
        let start = closure(d, &simplex, &candidates);
        let mut seen: HashSet<Vec<Vec<i64>>> = HashSet::new();
        let mut stack = vec![start.clone()];
        seen.insert(start);
        while let Some(set) = stack.pop() {
            let vs: Vec<IntVector> = set.iter().map(|p| IntVector::new(p)).collect();
            let p = mixvol::polytope::hull(&vs).unwrap();
            keys.insert(affine_key(&p).unwrap().as_bytes().to_vec());
            for x in &candidates {
                if set.contains(x) {
                    continue;
                }
                let mut grown = set.clone();
                grown.push(x.clone());
                if volume(d, &grown) > m {
                    continue;
                }
                let next = closure(d, &grown, &candidates);
                if seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
    }
    keys
}

