//! Dense linear algebra over GF(2) and affine subspaces.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest subspace dimension [`AffineSubspace::enumerate`] accepts by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// The low `len` bits of `value`, bit `i` at position `i`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len.min(64) {
            v.set(i, value >> i & 1 == 1);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut v = self.clone();
        v.xor_assign(other);
        v
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::circuit::parse_bits(s).map(|b| BitVec::from_bools(&b))
    }
}

/// Row-major GF(2) matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

/// Reduced row echelon form with leftmost pivots.
struct Rref {
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::input("row length does not match column count"));
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_columns(rows: usize, columns: &[BitVec]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::input("column length does not match row count"));
        }
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for i in col.ones() {
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    /// The `1 x n` indicator row of a 1-based index set.
    pub fn indicator(n: usize, indices: &[usize]) -> Result<Self> {
        let mut row = BitVec::zeros(n);
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::input(format!("index {i} outside [1, {n}]")));
            }
            row.set(i - 1, true);
        }
        Self::from_rows(n, vec![row])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.data[r].set(c, b);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    pub fn column(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            v.set(r, self.get(r, c));
        }
        v
    }

    pub fn columns(&self) -> Vec<BitVec> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.cols {
            return Err(Error::input(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = BitVec::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            out.set(r, row.dot(v));
        }
        Ok(out)
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let cols: Vec<BitVec> = other
            .columns()
            .iter()
            .map(|c| self.mul_vec(c))
            .collect::<Result<_>>()?;
        Self::from_columns(self.rows, &cols)
    }

    /// `[self | other]`.
    pub fn hconcat(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows {
            return Err(Error::input("hconcat of matrices with different row counts"));
        }
        let mut cols = self.columns();
        cols.extend(other.columns());
        Self::from_columns(self.rows, &cols)
    }

    fn rref_of(mut rows: Vec<BitVec>, cols: usize) -> Rref {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { rows, pivots }
    }

    pub fn rank(&self) -> usize {
        Self::rref_of(self.data.clone(), self.cols).pivots.len()
    }

    /// Some `x` with `self * x = v`, free variables set to zero.
    pub fn solve(&self, v: &BitVec) -> Result<Option<BitVec>> {
        if v.len() != self.rows {
            return Err(Error::input(format!(
                "right-hand side of length {} for {} rows",
                v.len(),
                self.rows
            )));
        }
        let aug: Vec<BitVec> = self
            .data
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut a = BitVec::zeros(self.cols + 1);
                for c in row.ones() {
                    a.set(c, true);
                }
                a.set(self.cols, v.get(r));
                a
            })
            .collect();
        let rref = Self::rref_of(aug, self.cols);
        let rank = rref.pivots.len();
        if rref.rows[rank..].iter().any(|row| row.get(self.cols)) {
            return Ok(None);
        }
        let mut x = BitVec::zeros(self.cols);
        for (row, &p) in rref.rows.iter().zip(&rref.pivots) {
            x.set(p, row.get(self.cols));
        }
        Ok(Some(x))
    }

    /// A basis of `{x : self * x = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let rref = Self::rref_of(self.data.clone(), self.cols);
        let mut is_pivot = vec![false; self.cols];
        for &p in &rref.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = BitVec::unit(self.cols, f);
                for (row, &p) in rref.rows.iter().zip(&rref.pivots) {
                    if row.get(f) {
                        x.set(p, true);
                    }
                }
                x
            })
            .collect()
    }
}

/// `{direction * z + offset}` with `direction` of full column rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSubspace {
    direction: BitMatrix,
    offset: BitVec,
}

impl AffineSubspace {
    pub fn new(direction: BitMatrix, offset: BitVec) -> Result<Self> {
        if direction.rows() != offset.len() {
            return Err(Error::input(format!(
                "direction has {} rows but offset has length {}",
                direction.rows(),
                offset.len()
            )));
        }
        if direction.rank() != direction.cols() {
            return Err(Error::input("direction matrix is not of full column rank"));
        }
        Ok(AffineSubspace { direction, offset })
    }

    pub fn full(n: usize) -> Self {
        AffineSubspace {
            direction: BitMatrix::identity(n),
            offset: BitVec::zeros(n),
        }
    }

    pub fn ambient(&self) -> usize {
        self.offset.len()
    }

    pub fn dim(&self) -> usize {
        self.direction.cols()
    }

    pub fn direction(&self) -> &BitMatrix {
        &self.direction
    }

    pub fn offset(&self) -> &BitVec {
        &self.offset
    }

    /// The point `direction * z + offset`.
    pub fn point(&self, z: &BitVec) -> Result<BitVec> {
        let mut p = self.direction.mul_vec(z)?;
        p.xor_assign(&self.offset);
        Ok(p)
    }

    pub fn contains(&self, p: &BitVec) -> Result<bool> {
        if p.len() != self.ambient() {
            return Err(Error::input("point dimension differs from ambient dimension"));
        }
        Ok(self.direction.solve(&p.xor(&self.offset))?.is_some())
    }

    pub fn is_subset_of(&self, other: &AffineSubspace) -> Result<bool> {
        if self.ambient() != other.ambient() {
            return Err(Error::input("subspaces live in different ambient spaces"));
        }
        for col in self.direction.columns() {
            if other.direction.solve(&col)?.is_none() {
                return Ok(false);
            }
        }
        other.contains(&self.offset)
    }

    /// All `2^dim` points, each exactly once.
    pub fn enumerate(&self, cap: usize) -> Result<impl Iterator<Item = BitVec> + '_> {
        let d = self.dim();
        if d > cap || d >= 64 {
            return Err(Error::Resource(format!(
                "enumerating a dimension-{d} subspace exceeds the cap of {cap}"
            )));
        }
        let cols = self.direction.columns();
        // Gray-code walk: one column XOR per point.
        let mut current = self.offset.clone();
        let mut k = 0u64;
        Ok(std::iter::from_fn(move || {
            if k == 1u64 << d {
                return None;
            }
            if k > 0 {
                current.xor_assign(&cols[k.trailing_zeros() as usize]);
            }
            k += 1;
            Some(current.clone())
        }))
    }
}

/// The hyperplane `{x : XOR_{i in I} x_i = c}` in GF(2)^n, `I` 1-based.
pub fn constraint_to_affine(indices: &[usize], c: bool, n: usize) -> Result<AffineSubspace> {
    if indices.is_empty() {
        return Err(Error::input("parity constraint over an empty index set"));
    }
    let row = BitMatrix::indicator(n, indices)?;
    let mut rhs = BitVec::zeros(1);
    rhs.set(0, c);
    let z0 = row
        .solve(&rhs)?
        .expect("non-zero indicator row is always solvable");
    let kernel = row.kernel_basis();
    debug_assert_eq!(kernel.len(), n - 1);
    Ok(AffineSubspace {
        direction: BitMatrix::from_columns(n, &kernel)?,
        offset: z0,
    })
}

/// The intersection of `s1` with the hyperplane `s2`.
pub fn affine_intersect(s1: &AffineSubspace, s2: &AffineSubspace) -> Result<AffineSubspace> {
    let n = s1.ambient();
    if s2.ambient() != n {
        return Err(Error::input("subspaces live in different ambient spaces"));
    }
    if n == 0 || s2.dim() != n - 1 {
        return Err(Error::precondition(format!(
            "second subspace must be a hyperplane, has dimension {} in GF(2)^{n}",
            s2.dim()
        )));
    }
    let u = &s1.direction;
    let uv = u.hconcat(&s2.direction)?;
    let rhs = s1.offset.xor(&s2.offset);
    let Some(sol) = uv.solve(&rhs)? else {
        return Err(Error::precondition("the subspaces do not intersect"));
    };
    let d1 = s1.dim();
    let top = |v: &BitVec| BitVec::from_bools(&v.to_bools()[..d1]);
    let kernel = uv.kernel_basis();
    let xs: Vec<BitVec> = kernel.iter().map(top).collect();
    let x = BitMatrix::from_columns(d1, &xs)?;
    let direction = u.mul(&x)?;
    let mut offset = u.mul_vec(&top(&sol))?;
    offset.xor_assign(&s1.offset);
    let delta = direction.cols();
    debug_assert_eq!(delta + uv.rank(), d1 + n - 1);
    debug_assert!(delta == d1 || delta + 1 == d1);
    Ok(AffineSubspace { direction, offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn points(s: &AffineSubspace) -> BTreeSet<BitVec> {
        s.enumerate(DEFAULT_ENUMERATION_CAP).unwrap().collect()
    }

    #[test]
    fn solve_examples() {
        let i3 = BitMatrix::identity(3);
        assert_eq!(i3.solve(&bv("101")).unwrap(), Some(bv("101")));
        let ind = BitMatrix::indicator(2, &[1, 2]).unwrap();
        assert_eq!(ind.solve(&bv("1")).unwrap(), Some(bv("10")));
        let z = BitMatrix::zeros(2, 2);
        assert_eq!(z.solve(&bv("10")).unwrap(), None);
        assert!(z.solve(&bv("1")).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert!(BitMatrix::identity(5).kernel_basis().is_empty());
        let ind = BitMatrix::indicator(6, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(ind.kernel_basis().len(), 5);
    }

    #[test]
    fn intersect_examples() {
        let full = AffineSubspace::full(2);
        let eq = constraint_to_affine(&[1, 2], false, 2).unwrap();
        let r = affine_intersect(&full, &eq).unwrap();
        assert_eq!(r.dim(), 1);
        assert_eq!(points(&r), [bv("00"), bv("11")].into_iter().collect());

        let sub = constraint_to_affine(&[1], false, 2).unwrap();
        let hyper = constraint_to_affine(&[1], false, 2).unwrap();
        let r = affine_intersect(&sub, &hyper).unwrap();
        assert_eq!((r.dim(), points(&r)), (1, points(&sub)));

        let s1 = constraint_to_affine(&[1], false, 3).unwrap();
        let s2 = constraint_to_affine(&[2], true, 3).unwrap();
        let r = affine_intersect(&s1, &s2).unwrap();
        assert_eq!(points(&r), [bv("010"), bv("011")].into_iter().collect());

        let s1 = constraint_to_affine(&[1], false, 3).unwrap();
        let s2 = constraint_to_affine(&[1], true, 3).unwrap();
        assert!(matches!(affine_intersect(&s1, &s2), Err(Error::Precondition(_))));
    }

    #[test]
    fn constraint_examples() {
        let s = constraint_to_affine(&[1], true, 2).unwrap();
        assert_eq!(points(&s), [bv("10"), bv("11")].into_iter().collect());
        let s = constraint_to_affine(&[1, 2], false, 2).unwrap();
        assert_eq!(points(&s), [bv("00"), bv("11")].into_iter().collect());
        let s = constraint_to_affine(&[1, 2, 3], true, 3).unwrap();
        let expect: BTreeSet<BitVec> = ["100", "010", "001", "111"].iter().map(|s| bv(s)).collect();
        assert_eq!(points(&s), expect);
        assert!(constraint_to_affine(&[], true, 3).is_err());
        assert!(constraint_to_affine(&[4], true, 3).is_err());
    }

    #[test]
    fn containment_examples() {
        let full = AffineSubspace::full(3);
        assert!(full.contains(&bv("101")).unwrap());
        assert!(full.is_subset_of(&full).unwrap());
        let s1 = constraint_to_affine(&[1], false, 3).unwrap();
        let s2 = constraint_to_affine(&[2], true, 3).unwrap();
        let both = affine_intersect(&s1, &s2).unwrap();
        assert!(both.is_subset_of(&s1).unwrap());
        assert!(!s1.is_subset_of(&both).unwrap());
    }

    #[test]
    fn enumerate_respects_cap() {
        let s = AffineSubspace::full(5);
        assert!(matches!(s.enumerate(4), Err(Error::Resource(_))));
        assert_eq!(s.enumerate(5).unwrap().count(), 32);
    }

    #[test]
    fn new_rejects_dependent_columns() {
        let m = BitMatrix::from_columns(2, &[bv("11"), bv("11")]).unwrap();
        assert!(AffineSubspace::new(m, bv("00")).is_err());
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
        proptest::collection::vec(any::<bool>(), rows * cols).prop_map(move |bits| {
            let rows_v = bits.chunks(cols.max(1)).take(rows).map(BitVec::from_bools).collect();
            BitMatrix::from_rows(cols, rows_v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_independent_and_annihilated(m in (1usize..12, 1usize..12).prop_flat_map(|(r, c)| matrix(r, c))) {
            let k = m.kernel_basis();
            prop_assert_eq!(k.len(), m.cols() - m.rank());
            for v in &k {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
            }
            if !k.is_empty() {
                prop_assert_eq!(BitMatrix::from_columns(m.cols(), &k).unwrap().rank(), k.len());
            }
        }

        #[test]
        fn solve_agrees_with_brute_force(m in (1usize..6, 1usize..7).prop_flat_map(|(r, c)| matrix(r, c)), rhs in any::<u64>()) {
            let v = BitVec::from_u64(m.rows(), rhs);
            let brute = (0..1u64 << m.cols()).any(|x| m.mul_vec(&BitVec::from_u64(m.cols(), x)).unwrap() == v);
            match m.solve(&v).unwrap() {
                Some(x) => prop_assert_eq!(m.mul_vec(&x).unwrap(), v),
                None => prop_assert!(!brute),
            }
        }
    }
}
