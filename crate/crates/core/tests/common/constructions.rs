//! Random instances of the triples known to be R-maximal: segment sums
//! `(P + aI, P + bI, P + cI)` and pyramids over bases with two edges parallel
//! to the added segment.

use mixvol::mixed::PolytopeTuple;
use mixvol::polytope::segment;
use mixvol::{IntVector, LatticePolytope};
use rand::Rng;

use super::*;

fn scale(v: P3, k: i64) -> P3 {
    [v[0] * k, v[1] * k, v[2] * k]
}

/// `None` when the draw does not satisfy the hypotheses.
pub fn segment_sum<R: Rng>(rng: &mut R) -> Option<PolytopeTuple> {
    let base = random_polytope(rng, 3, 6);
    let w = random_points(rng, 1, 1)[0];
    if base.dim() < 2 || w == [0, 0, 0] {
        return None;
    }
    let mut k = [rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2)];
    if k.iter().filter(|&&x| x == 0).count() > 1 {
        k[rng.gen_range(0..3)] = 1;
    }
    if k.iter().filter(|&&x| x == 0).count() > 1 {
        return None;
    }
    let members: Vec<LatticePolytope> =
        k.iter().map(|&a| base.minkowski_sum(&segment(&IntVector::new(&scale(w, a)))).unwrap()).collect();
    if !members.iter().all(|p| p.is_full_dim()) {
        return None;
    }
    Some(PolytopeTuple::new(members).unwrap())
}

/// `(P', P', P' + kI)` for a pyramid `P'` over a trapezoid with two edges
/// parallel to `I`, moved by a random unimodular map.
pub fn trapezoid_pyramid<R: Rng>(rng: &mut R) -> Option<PolytopeTuple> {
    let w = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), 0];
    let p = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), 0];
    if cross(w, p) == [0, 0, 0] {
        return None;
    }
    let (a, b) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
    let apex = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(1..=2)];
    let top = [p[0] + b * w[0], p[1] + b * w[1], 0];
    let pyramid = poly(&[[0, 0, 0], scale(w, a), p, top, apex]);
    let k = rng.gen_range(1..=3);
    let u = random_unimodular(rng);
    let big = pyramid.minkowski_sum(&segment(&IntVector::new(&scale(w, k)))).unwrap();
    Some(PolytopeTuple::new(vec![apply(&u, &pyramid), apply(&u, &pyramid), apply(&u, &big)]).unwrap())
}
