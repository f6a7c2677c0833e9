//! Exact integer vectors, small matrices and lattice bases.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension handled by [`IntVector`].
pub const MAX_DIM: usize = 4;

pub type Rational = num_rational::Ratio<i64>;

/// Integer vector of length at most [`MAX_DIM`], stored inline.
///
/// Ordering is lexicographic on the coordinates (vectors of different
/// lengths compare by length first).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntVector {
    len: u8,
    c: [i64; MAX_DIM],
}

impl IntVector {
    pub fn zero(d: usize) -> Self {
        assert!(d <= MAX_DIM, "dimension {d} exceeds {MAX_DIM}");
        IntVector { len: d as u8, c: [0; MAX_DIM] }
    }

    pub fn new(coords: &[i64]) -> Self {
        let mut v = Self::zero(coords.len());
        v.c[..coords.len()].copy_from_slice(coords);
        v
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = Self::zero(d);
        v.c[i] = 1;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[i64] {
        &self.c[..self.len as usize]
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.as_slice().to_vec()
    }

    #[inline]
    pub fn dot(&self, other: &IntVector) -> i64 {
        debug_assert_eq!(self.len, other.len);
        let mut s = 0i64;
        for i in 0..self.len as usize {
            s += self.c[i] * other.c[i];
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.as_slice().iter().all(|&x| x == 0)
    }

    /// Greatest common divisor of the coordinates (0 for the zero vector).
    pub fn content(&self) -> i64 {
        self.as_slice().iter().fold(0i64, |g, &x| g.gcd(&x))
    }

    /// Divides by the content. The zero vector is returned unchanged.
    pub fn primitive(&self) -> IntVector {
        let g = self.content();
        if g <= 1 {
            return *self;
        }
        let mut v = *self;
        for x in &mut v.c[..self.len as usize] {
            *x /= g;
        }
        v
    }

    /// Exact division of every coordinate; `None` if some coordinate is not divisible.
    pub fn div_exact(&self, k: i64) -> Option<IntVector> {
        let mut v = *self;
        for x in &mut v.c[..self.len as usize] {
            if *x % k != 0 {
                return None;
            }
            *x /= k;
        }
        Some(v)
    }

    /// Appends a coordinate.
    pub fn extend(&self, x: i64) -> IntVector {
        let mut v = *self;
        assert!((self.len as usize) < MAX_DIM);
        v.c[self.len as usize] = x;
        v.len += 1;
        v
    }

    /// Keeps only the listed coordinates, in the given order.
    pub fn select(&self, coords: &[usize]) -> IntVector {
        let mut v = IntVector::zero(coords.len());
        for (k, &i) in coords.iter().enumerate() {
            v.c[k] = self.c[i];
        }
        v
    }
}

/// 3D cross product.
pub fn cross(a: &IntVector, b: &IntVector) -> IntVector {
    debug_assert!(a.dim() == 3 && b.dim() == 3);
    IntVector::new(&[
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

impl Index<usize> for IntVector {
    type Output = i64;
    #[inline]
    fn index(&self, i: usize) -> &i64 {
        debug_assert!(i < self.len as usize);
        &self.c[i]
    }
}

impl IndexMut<usize> for IntVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut i64 {
        debug_assert!(i < self.len as usize);
        &mut self.c[i]
    }
}

impl Ord for IntVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| self.as_slice().cmp(other.as_slice()))
    }
}

impl PartialOrd for IntVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for IntVector {
    type Output = IntVector;
    #[inline]
    fn add(mut self, o: IntVector) -> IntVector {
        debug_assert_eq!(self.len, o.len);
        for i in 0..self.len as usize {
            self.c[i] += o.c[i];
        }
        self
    }
}

impl Sub for IntVector {
    type Output = IntVector;
    #[inline]
    fn sub(mut self, o: IntVector) -> IntVector {
        debug_assert_eq!(self.len, o.len);
        for i in 0..self.len as usize {
            self.c[i] -= o.c[i];
        }
        self
    }
}

impl Neg for IntVector {
    type Output = IntVector;
    fn neg(mut self) -> IntVector {
        for i in 0..self.len as usize {
            self.c[i] = -self.c[i];
        }
        self
    }
}

impl Mul<i64> for IntVector {
    type Output = IntVector;
    fn mul(mut self, k: i64) -> IntVector {
        for i in 0..self.len as usize {
            self.c[i] *= k;
        }
        self
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.as_slice().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for IntVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<i64> = Vec::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "vector length {} outside 1..={MAX_DIM}",
                v.len()
            )));
        }
        Ok(IntVector::new(&v))
    }
}

/// Nonzero integer vector with coprime coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PrimitiveVector(IntVector);

impl PrimitiveVector {
    pub fn new(v: IntVector) -> Result<Self> {
        if v.is_zero() {
            return Err(Error::Input("primitive vector must be nonzero".into()));
        }
        Ok(PrimitiveVector(v.primitive()))
    }

    pub fn get(&self) -> &IntVector {
        &self.0
    }
}

/// Lexicographically smallest point.
pub fn lexmin(points: &[IntVector]) -> Option<IntVector> {
    points.iter().min().copied()
}

/// Determinant of a square integer matrix given by its rows (Bareiss elimination).
pub fn det(rows: &[IntVector]) -> i64 {
    let n = rows.len();
    match n {
        0 => 1,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => cross(&rows[0], &rows[1]).dot(&rows[2]),
        _ => {
            let mut m: Vec<Vec<i128>> =
                rows.iter().map(|r| r.as_slice().iter().map(|&x| x as i128).collect()).collect();
            let mut sign = 1i128;
            let mut prev = 1i128;
            for k in 0..n - 1 {
                if m[k][k] == 0 {
                    let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                        return 0;
                    };
                    m.swap(k, p);
                    sign = -sign;
                }
                for i in k + 1..n {
                    for j in k + 1..n {
                        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
                    }
                }
                prev = m[k][k];
            }
            i64::try_from(sign * m[n - 1][n - 1]).expect("determinant overflows i64")
        }
    }
}

/// Rank of a list of vectors over the rationals.
pub fn rank(vectors: &[IntVector]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let d = first.dim();
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.as_slice().iter().map(|&x| x as i128).collect())
        .collect();
    let mut r = 0;
    for col in 0..d {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if rows[i][col] != 0 {
                let a = rows[r][col];
                let b = rows[i][col];
                for j in col..d {
                    rows[i][j] = rows[i][j] * a - rows[r][j] * b;
                }
                let g = rows[i].iter().fold(0i128, |g, &x| g.gcd(&x));
                if g > 1 {
                    for x in &mut rows[i] {
                        *x /= g;
                    }
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Basis of the integer kernel `{x in Z^d : <r, x> = 0 for all rows r}`.
///
/// Uses unimodular column operations, so the result is a basis of the
/// saturated lattice.
pub fn integer_kernel(rows: &[IntVector], d: usize) -> Vec<IntVector> {
    // Work on the transpose: columns of the row matrix become d vectors,
    // U tracks the unimodular transformation.
    let k = rows.len();
    let mut cols: Vec<Vec<i64>> = (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut u: Vec<IntVector> = (0..d).map(|j| IntVector::unit(d, j)).collect();
    let mut pivot_col = 0usize;
    for row in 0..k {
        if pivot_col == d {
            break;
        }
        // Euclid on entries cols[j][row] for j >= pivot_col.
        loop {
            let nz: Vec<usize> = (pivot_col..d).filter(|&j| cols[j][row] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let &jmin = nz.iter().min_by_key(|&&j| cols[j][row].abs()).unwrap();
            cols.swap(pivot_col, jmin);
            u.swap(pivot_col, jmin);
            let mut done = true;
            for j in pivot_col + 1..d {
                let q = fdiv(cols[j][row], cols[pivot_col][row]);
                if q != 0 {
                    for i in 0..k {
                        cols[j][i] -= q * cols[pivot_col][i];
                    }
                    u[j] = u[j] - u[pivot_col] * q;
                }
                if cols[j][row] != 0 {
                    done = false;
                }
            }
            if done {
                pivot_col += 1;
                break;
            }
        }
    }
    u[pivot_col..].to_vec()
}

/// Lattice basis of `aff(points) ∩ Z^d`, returned as `(base point, basis)`.
///
/// The base point is the lexicographically smallest input point.
pub fn affine_lattice_basis(points: &[IntVector]) -> Result<(IntVector, Vec<IntVector>)> {
    let base = lexmin(points).ok_or_else(|| Error::Input("empty point set".into()))?;
    let d = base.dim();
    let diffs: Vec<IntVector> = points.iter().map(|p| *p - base).filter(|v| !v.is_zero()).collect();
    let normals = integer_kernel(&diffs, d);
    let mut basis = integer_kernel(&normals, d);
    // Deterministic orientation: Hermite-like reduction of the basis rows.
    hermite_rows(&mut basis);
    Ok((base, basis))
}

/// Row-style Hermite normal form in place (rows span the same lattice).
pub fn hermite_rows(rows: &mut Vec<IntVector>) {
    if rows.is_empty() {
        return;
    }
    let d = rows[0].dim();
    let mut r = 0;
    for col in 0..d {
        if r == rows.len() {
            break;
        }
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let &imin = nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            rows.swap(r, imin);
            let mut done = true;
            for i in r + 1..rows.len() {
                let q = fdiv(rows[i][col], rows[r][col]);
                if q != 0 {
                    rows[i] = rows[i] - rows[r] * q;
                }
                if rows[i][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < rows.len() && rows[r][col] != 0 {
            if rows[r][col] < 0 {
                rows[r] = -rows[r];
            }
            for i in 0..r {
                let q = fdiv(rows[i][col], rows[r][col]);
                if q != 0 {
                    rows[i] = rows[i] - rows[r] * q;
                }
            }
            r += 1;
        }
    }
    rows.retain(|v| !v.is_zero());
}

/// Coordinates of `x - base` in the given lattice basis, if `x - base` lies in
/// the rational span and the coefficients are integers.
pub fn coordinates_in_basis(basis: &[IntVector], base: &IntVector, x: &IntVector) -> Option<IntVector> {
    let k = basis.len();
    let d = base.dim();
    let y = *x - *base;
    if k == 0 {
        return if y.is_zero() { Some(IntVector::zero(0)) } else { None };
    }
    // Pick k coordinates with a nonzero minor.
    let coords = independent_coordinates(basis, d)?;
    let m: Vec<IntVector> = basis.iter().map(|b| b.select(&coords)).collect();
    // Solve sum_i c_i m_i = y|coords by Cramer's rule on the transposed system.
    let mt: Vec<IntVector> = (0..k).map(|r| IntVector::new(&m.iter().map(|b| b[r]).collect::<Vec<_>>())).collect();
    let dt = det(&mt);
    let ys = y.select(&coords);
    let mut c = IntVector::zero(k);
    for i in 0..k {
        let mut mi = mt.clone();
        for r in 0..k {
            mi[r][i] = ys[r];
        }
        let num = det(&mi);
        if num % dt != 0 {
            return None;
        }
        c[i] = num / dt;
    }
    let mut back = *base;
    for (i, b) in basis.iter().enumerate() {
        back = back + *b * c[i];
    }
    (back == *x).then_some(c)
}

/// Indices of `basis.len()` coordinates on which the basis restricts to an
/// invertible matrix.
pub fn independent_coordinates(basis: &[IntVector], d: usize) -> Option<Vec<usize>> {
    let k = basis.len();
    let mut best = None;
    for_each_combination(d, k, &mut |cs| {
        if best.is_some() {
            return;
        }
        let m: Vec<IntVector> = basis.iter().map(|b| b.select(cs)).collect();
        if det(&m) != 0 {
            best = Some(cs.to_vec());
        }
    });
    best
}

/// Calls `f` on every increasing `k`-subset of `0..n`.
pub fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Adjugate of a square matrix given by rows: `adj(M) * M = det(M) * I`.
pub fn adjugate(rows: &[IntVector]) -> Vec<IntVector> {
    let n = rows.len();
    match n {
        1 => vec![IntVector::new(&[1])],
        2 => vec![
            IntVector::new(&[rows[1][1], -rows[0][1]]),
            IntVector::new(&[-rows[1][0], rows[0][0]]),
        ],
        3 => {
            // Columns of adj are cross products of rows.
            let c0 = cross(&rows[1], &rows[2]);
            let c1 = cross(&rows[2], &rows[0]);
            let c2 = cross(&rows[0], &rows[1]);
            (0..3).map(|i| IntVector::new(&[c0[i], c1[i], c2[i]])).collect()
        }
        _ => {
            let mut adj = vec![IntVector::zero(n); n];
            for i in 0..n {
                for j in 0..n {
                    let minor: Vec<IntVector> = (0..n)
                        .filter(|&r| r != j)
                        .map(|r| {
                            IntVector::new(
                                &(0..n).filter(|&c| c != i).map(|c| rows[r][c]).collect::<Vec<_>>(),
                            )
                        })
                        .collect();
                    let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                    adj[i][j] = s * det(&minor);
                }
            }
            adj
        }
    }
}

/// Multiplies a matrix (rows) by a vector.
pub fn mat_vec(rows: &[IntVector], x: &IntVector) -> IntVector {
    let mut v = IntVector::zero(rows.len());
    for (i, r) in rows.iter().enumerate() {
        v[i] = r.dot(x);
    }
    v
}

/// Nonnegative gcd of a list of integers (0 for an empty or all-zero list).
pub fn gcd_all(xs: &[i64]) -> i64 {
    xs.iter().fold(0, |g, &x| g.gcd(&x))
}

/// Floor division.
#[inline]
pub fn fdiv(a: i64, b: i64) -> i64 {
    Integer::div_floor(&a, &b)
}

/// Floor of a rational.
pub fn floor_rat(r: &Rational) -> i64 {
    fdiv(*r.numer(), *r.denom())
}

/// Ceiling of a rational.
pub fn ceil_rat(r: &Rational) -> i64 {
    -fdiv(-r.numer(), *r.denom())
}
