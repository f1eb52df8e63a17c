//! The lattice H²(CP² # N C̄P²) with basis H, E₁..E_N and form diag(1, −1, …, −1).
//!
//! A class is stored as `(a; b₁..b_N)` and means `aH − Σ bᵢEᵢ`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

use crate::Error;

/// Number of blow-ups, kept around mostly for validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlowupLattice {
    pub n: usize,
}

impl BlowupLattice {
    pub fn new(n: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Invalid("lattice needs n >= 1".into()));
        }
        Ok(BlowupLattice { n })
    }

    pub fn h(&self) -> HClass {
        HClass::h(self.n)
    }

    pub fn e(&self, i: usize) -> HClass {
        HClass::e(self.n, i)
    }

    pub fn canonical(&self) -> HClass {
        HClass::canonical(self.n)
    }

    /// Gram matrix of the basis H, E₁..E_N.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let mut g = vec![vec![0; self.n + 1]; self.n + 1];
        g[0][0] = 1;
        for i in 1..=self.n {
            g[i][i] = -1;
        }
        g
    }
}

/// `aH − Σ bᵢEᵢ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HClass {
    pub a: i64,
    pub b: Vec<i64>,
}

impl HClass {
    pub fn new(a: i64, b: Vec<i64>) -> Self {
        HClass { a, b }
    }

    pub fn zero(n: usize) -> Self {
        HClass { a: 0, b: vec![0; n] }
    }

    pub fn h(n: usize) -> Self {
        HClass { a: 1, b: vec![0; n] }
    }

    /// E_i with 1-based index. Stored with b_i = −1.
    pub fn e(n: usize, i: usize) -> Self {
        let mut b = vec![0; n];
        b[i - 1] = -1;
        HClass { a: 0, b }
    }

    /// K = −3H + ΣEᵢ.
    pub fn canonical(n: usize) -> Self {
        HClass { a: -3, b: vec![-1; n] }
    }

    /// `aH − Σ_{i∈idx} Eᵢ` with 1-based indices.
    pub fn line_like(n: usize, a: i64, idx: &[usize]) -> Self {
        let mut b = vec![0; n];
        for &i in idx {
            b[i - 1] += 1;
        }
        HClass { a, b }
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn add(&self, o: &HClass) -> HClass {
        HClass {
            a: self.a + o.a,
            b: self.b.iter().zip(&o.b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, o: &HClass) -> HClass {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, c: i64) -> HClass {
        HClass { a: self.a * c, b: self.b.iter().map(|x| x * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b.iter().all(|&x| x == 0)
    }

    pub fn square(&self) -> i64 {
        pair_unchecked(self, self)
    }

    pub fn k_dot(&self) -> i64 {
        // K·A = −3a + Σbᵢ
        -3 * self.a + self.b.iter().sum::<i64>()
    }

    pub fn support(&self) -> usize {
        self.b.iter().filter(|&&x| x != 0).count()
    }

    /// Apply a permutation of indices: new position j takes old index perm[j].
    pub fn permuted(&self, perm: &[usize]) -> HClass {
        HClass { a: self.a, b: perm.iter().map(|&j| self.b[j]).collect() }
    }

    pub fn to_vec(&self) -> Vec<i64> {
        let mut v = Vec::with_capacity(self.b.len() + 1);
        v.push(self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn from_slice(v: &[i64]) -> Result<Self, Error> {
        if v.len() < 2 {
            return Err(Error::Invalid("class needs [a, b1, ...]".into()));
        }
        Ok(HClass { a: v[0], b: v[1..].to_vec() })
    }
}

impl Ord for HClass {
    fn cmp(&self, o: &Self) -> Ordering {
        self.a.cmp(&o.a).then_with(|| self.b.cmp(&o.b))
    }
}

impl PartialOrd for HClass {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Serialize for HClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        HClass::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for HClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if self.a != 0 {
            match self.a {
                1 => out.push('H'),
                -1 => out.push_str("-H"),
                a => out.push_str(&format!("{a}H")),
            }
        }
        for (i, &bi) in self.b.iter().enumerate() {
            if bi == 0 {
                continue;
            }
            let c = -bi;
            let sign = if c < 0 { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = c.abs();
            if mag == 1 {
                out.push_str(&format!("{sign}E{}", i + 1));
            } else {
                out.push_str(&format!("{sign}{mag}E{}", i + 1));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

fn pair_unchecked(x: &HClass, y: &HClass) -> i64 {
    x.a * y.a - x.b.iter().zip(&y.b).map(|(p, q)| p * q).sum::<i64>()
}

/// Intersection pairing `a·a′ − Σ bᵢbᵢ′`.
pub fn pair(x: &HClass, y: &HClass) -> Result<i64, Error> {
    if x.b.len() != y.b.len() {
        return Err(Error::Invalid(format!(
            "lattice mismatch: {} vs {}",
            x.b.len(),
            y.b.len()
        )));
    }
    Ok(pair_unchecked(x, y))
}

/// Same as [`pair`] for callers that already know the dimensions agree.
#[inline]
pub fn dot(x: &HClass, y: &HClass) -> i64 {
    debug_assert_eq!(x.b.len(), y.b.len());
    pair_unchecked(x, y)
}

/// `(A² + K·A)/2 + 1`.
pub fn adjunction_genus(x: &HClass) -> Ratio<i64> {
    Ratio::new(x.square() + x.k_dot(), 2) + 1
}

/// `A + 2(A·E_k)E_k`, i.e. flip the sign of b_k. `k` is 1-based.
pub fn reflect_exceptional(x: &HClass, k: usize) -> Result<HClass, Error> {
    if k == 0 || k > x.n() {
        return Err(Error::Invalid(format!("index {k} out of range 1..={}", x.n())));
    }
    let mut y = x.clone();
    y.b[k - 1] = -y.b[k - 1];
    Ok(y)
}

/// `A + (A·H_ijk)H_ijk` with `H_ijk = H − Eᵢ − Eⱼ − E_k`. Indices are 1-based.
pub fn reflect_cremona(x: &HClass, i: usize, j: usize, k: usize) -> Result<HClass, Error> {
    let n = x.n();
    if i == j || j == k || i == k {
        return Err(Error::Invalid("cremona indices must be distinct".into()));
    }
    for &t in &[i, j, k] {
        if t == 0 || t > n {
            return Err(Error::Invalid(format!("index {t} out of range 1..={n}")));
        }
    }
    let d = x.a - x.b[i - 1] - x.b[j - 1] - x.b[k - 1];
    let mut y = x.clone();
    y.a += d;
    y.b[i - 1] += d;
    y.b[j - 1] += d;
    y.b[k - 1] += d;
    Ok(y)
}

/// Canonical form of a list of rows under simultaneous permutation of the
/// columns `fixed..` and reordering of the rows. Returns the sorted rows and the
/// column permutation (new column j takes old column `fixed + perm[j]`).
///
/// Rows are chosen greedily: the next output row is the least image any unused
/// row can take given the column cells fixed so far, and ties branch.
pub fn canonical_rows(rows: &[Vec<i64>], fixed: usize) -> (Vec<Vec<i64>>, Vec<usize>) {
    if rows.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let width = rows[0].len() - fixed;
    let cells = vec![(0..width).collect::<Vec<_>>()];
    let used = vec![false; rows.len()];
    let mut best: Option<(Vec<Vec<i64>>, Vec<usize>)> = None;
    let mut out = Vec::with_capacity(rows.len());
    canon_rec(rows, fixed, &cells, &used, &mut out, &mut best);
    best.expect("at least one branch completes")
}

fn image(row: &[i64], fixed: usize, cells: &[Vec<usize>]) -> Vec<i64> {
    let mut v = Vec::with_capacity(row.len());
    v.extend_from_slice(&row[..fixed]);
    let mut buf = Vec::new();
    for c in cells {
        buf.clear();
        buf.extend(c.iter().map(|&j| row[fixed + j]));
        buf.sort_unstable();
        v.extend_from_slice(&buf);
    }
    v
}

fn canon_rec(
    rows: &[Vec<i64>],
    fixed: usize,
    cells: &[Vec<usize>],
    used: &[bool],
    out: &mut Vec<Vec<i64>>,
    best: &mut Option<(Vec<Vec<i64>>, Vec<usize>)>,
) {
    let depth = out.len();
    if depth == rows.len() {
        let perm: Vec<usize> = cells.iter().flatten().copied().collect();
        let better = match best {
            None => true,
            Some((b, _)) => out.as_slice() < b.as_slice(),
        };
        if better {
            *best = Some((out.clone(), perm));
        }
        return;
    }
    let mut min_img: Option<Vec<i64>> = None;
    let mut cands: Vec<usize> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        if used[r] {
            continue;
        }
        let img = image(row, fixed, cells);
        match &min_img {
            None => {
                min_img = Some(img);
                cands.push(r);
            }
            Some(m) => match img.cmp(m) {
                Ordering::Less => {
                    min_img = Some(img);
                    cands.clear();
                    cands.push(r);
                }
                Ordering::Equal => cands.push(r),
                Ordering::Greater => {}
            },
        }
    }
    let img = min_img.unwrap();
    if let Some((b, _)) = best {
        // prefix comparison: everything before `depth` already agrees or is smaller
        match out.as_slice().cmp(&b[..depth]) {
            Ordering::Greater => return,
            Ordering::Equal if img > b[depth] => return,
            _ => {}
        }
    }
    let mut seen: Vec<&Vec<i64>> = Vec::new();
    for &r in &cands {
        if seen.contains(&&rows[r]) {
            continue;
        }
        seen.push(&rows[r]);
        let row = &rows[r];
        let mut next = Vec::with_capacity(cells.len() + 2);
        for c in cells {
            let mut c2 = c.clone();
            c2.sort_by_key(|&j| row[fixed + j]);
            let mut start = 0;
            for t in 1..=c2.len() {
                if t == c2.len() || row[fixed + c2[t]] != row[fixed + c2[start]] {
                    next.push(c2[start..t].to_vec());
                    start = t;
                }
            }
        }
        let mut used2 = used.to_vec();
        used2[r] = true;
        out.push(img.clone());
        canon_rec(rows, fixed, &next, &used2, out, best);
        out.pop();
    }
}

/// Lexicographically least representative of a tuple under index permutations
/// and reordering of the tuple.
pub fn canonical_tuple(t: &[HClass]) -> Vec<HClass> {
    canonical_tuple_with_perm(t).0
}

/// As [`canonical_tuple`], also returning the index permutation used
/// (new index j takes old index perm[j], 0-based).
pub fn canonical_tuple_with_perm(t: &[HClass]) -> (Vec<HClass>, Vec<usize>) {
    if t.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let rows: Vec<Vec<i64>> = t.iter().map(|c| c.to_vec()).collect();
    let (canon, perm) = canonical_rows(&rows, 1);
    (canon.iter().map(|r| HClass::from_slice(r).unwrap()).collect(), perm)
}

/// All A with A² = −2, K·A = 0 for N = 9, one representative per coset of ZK.
///
/// The search window is a ∈ [−4, 4], bᵢ ∈ [−4, 5]; each coset is reduced to
/// its member with a ∈ {−1, 0, 1}.
pub fn minus2_classes_mod_k(n: usize) -> Result<Vec<HClass>, Error> {
    if n != 9 {
        return Err(Error::Invalid("minus2_classes_mod_k is defined for N = 9 only".into()));
    }
    let k = HClass::canonical(9);
    let mut reps = std::collections::BTreeSet::new();
    for a in -4i64..=4 {
        let target_sq = a * a + 2;
        let target_sum = 3 * a;
        let mut b = vec![0i64; 9];
        window_rec(&mut b, 0, target_sq, target_sum, &mut |b| {
            let mut c = HClass::new(a, b.to_vec());
            // a − 3t ∈ {−1, 0, 1}
            let t = (c.a + 1).div_euclid(3);
            c = c.add(&k.scale(t));
            reps.insert(c);
        });
    }
    Ok(reps.into_iter().collect())
}

fn window_rec(b: &mut [i64], i: usize, sq: i64, sum: i64, f: &mut dyn FnMut(&[i64])) {
    let n = b.len();
    if i == n {
        if sq == 0 && sum == 0 {
            f(b);
        }
        return;
    }
    let left = (n - i) as i64;
    // Cauchy–Schwarz: sum² ≤ left·sq
    if sq < 0 || sum * sum > left * sq {
        return;
    }
    for v in -4i64..=5 {
        if v * v > sq {
            continue;
        }
        b[i] = v;
        window_rec(b, i + 1, sq - v * v, sum - v, f);
    }
    b[i] = 0;
}
