//! Homology classes of embedded symplectic surfaces, mostly (−α)-spheres:
//! A² = −α and K·A = α − 2.
//!
//! For a class `aH − Σ bᵢEᵢ` of genus g the two equations combine into
//! Σ bᵢ(bᵢ − 1) = (a − 1)(a − 2) − 2g and Σ bᵢ = 3a + K·A, and the
//! enumerator works with that pair directly.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::lattice::{adjunction_genus, reflect_cremona, HClass};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterOutcome {
    Pass,
    Fail(String),
}

impl FilterOutcome {
    pub fn passed(&self) -> bool {
        *self == FilterOutcome::Pass
    }
}

/// Necessary conditions on the class of an embedded symplectic surface of genus g.
pub fn surface_class_filter(x: &HClass, g: i64) -> Result<FilterOutcome, Error> {
    let gen = adjunction_genus(x);
    if !gen.is_integer() || gen.to_integer() != g {
        return Err(Error::Invalid(format!("adjunction genus of {x} is {gen}, not {g}")));
    }
    let a = x.a;
    if a > 0 {
        if let Some(i) = x.b.iter().position(|&b| b < 0) {
            return Ok(FilterOutcome::Fail(format!("a > 0 but b{} < 0", i + 1)));
        }
        let lhs = (a - 1) * (a - 2);
        if lhs < 2 * g {
            return Ok(FilterOutcome::Fail(format!("(a-1)(a-2) = {lhs} < 2g = {}", 2 * g)));
        }
        let all01 = x.b.iter().all(|&b| b == 0 || b == 1);
        if (lhs == 2 * g) != all01 {
            return Ok(FilterOutcome::Fail("equality (a-1)(a-2) = 2g must match b in {0,1}".into()));
        }
    } else if a < 0 {
        if g != 0 {
            return Ok(FilterOutcome::Fail("a < 0 forces a sphere".into()));
        }
        let sq = x.square();
        if sq >= -2 {
            return Ok(FilterOutcome::Fail(format!("a < 0 needs A^2 < -2, got {sq}")));
        }
        if negative_form_anchor(x).is_none() {
            return Ok(FilterOutcome::Fail("a < 0 class is not aH + (|a|+1)E_j - E_... ".into()));
        }
    }
    Ok(FilterOutcome::Pass)
}

/// For a < 0: the index j₁ (0-based) when the class is
/// `aH + (|a|+1)E_{j₁} − E_{j₂} − ⋯ − E_{j_s}` with s = −A² − 2|a| ≥ 1.
pub fn negative_form_anchor(x: &HClass) -> Option<usize> {
    if x.a >= 0 {
        return None;
    }
    let m = -x.a;
    let s = -x.square() - 2 * m;
    if s < 1 {
        return None;
    }
    let mut anchor = None;
    let mut ones = 0;
    for (i, &b) in x.b.iter().enumerate() {
        if b == -(m + 1) {
            if anchor.is_some() {
                return None;
            }
            anchor = Some(i);
        } else if b == 1 {
            ones += 1;
        } else if b != 0 {
            return None;
        }
    }
    if ones == s - 1 {
        anchor
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereClassQuery {
    pub n: usize,
    pub alpha: i64,
    pub a_min: i64,
    pub a_max: i64,
    /// Restrict to the forms allowed when ω(A) < −K·[ω].
    #[serde(default)]
    pub area_condition: bool,
    /// Emit negative-a classes (which additionally need ω(E_{j₁}) to be the
    /// strictly largest exceptional area).
    #[serde(default)]
    pub allow_negative: bool,
}

/// Nonincreasing sequences of length `len` with Σ v(v−1) = q and Σ v = s,
/// entries in [lo, hi].
pub fn b_multisets(len: usize, q: i64, s: i64, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    ms_rec(len, q, s, lo, hi, &mut cur, &mut out);
    out
}

fn ms_rec(len: usize, q: i64, s: i64, lo: i64, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    let left = (len - cur.len()) as i64;
    if left == 0 {
        if q == 0 && s == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if q < 0 {
        return;
    }
    // every v satisfies v ≤ 1 + (v(v−1))/2 for v ≥ 1 and |v| ≤ v(v−1)/2 for v ≤ −1,
    // so the remaining sum lies in [−q/2, left + q/2]
    if 2 * s > 2 * left + q || -2 * s > q {
        return;
    }
    let mut v = cap;
    while v >= lo {
        let c = v * (v - 1);
        if c <= q {
            cur.push(v);
            ms_rec(len, q - c, s - v, lo, v, cur, out);
            cur.pop();
        }
        v -= 1;
    }
}

/// All distinct arrangements of a multiset, lexicographic.
pub fn arrangements(sorted_desc: &[i64]) -> Vec<Vec<i64>> {
    let mut v = sorted_desc.to_vec();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    while next_permutation(&mut v) {
        out.push(v.clone());
    }
    out
}

fn next_permutation(v: &mut [i64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Σ bᵢ(bᵢ−1) and Σ bᵢ prescribed by a class of genus g, square `sq`, fixed a.
fn b_targets(a: i64, sq: i64, g: i64) -> (i64, i64) {
    // K·A = 2g − 2 − A²;  Σb = K·A + 3a;  Σb² = a² − A²
    let k_dot = 2 * g - 2 - sq;
    let s = k_dot + 3 * a;
    let q = a * a - sq - s;
    (q, s)
}

/// Solutions of A² = sq with genus g at fixed a (no filter), as b-multisets.
pub fn class_multisets(n: usize, a: i64, sq: i64, g: i64, nonneg: bool) -> Vec<Vec<i64>> {
    let (q, s) = b_targets(a, sq, g);
    if q < 0 {
        return Vec::new();
    }
    // v(v−1) ≤ q bounds |v|
    let mut hi = 1;
    while (hi + 1) * hi <= q {
        hi += 1;
    }
    let mut lo = 0;
    while !nonneg && (lo - 1) * (lo - 2) <= q {
        lo -= 1;
    }
    b_multisets(n, q, s, lo, hi)
}

/// All classes with A² = −α, K·A = α − 2, a in range, passing
/// [`surface_class_filter`] with g = 0. Sorted.
pub fn enumerate_sphere_classes(q: &SphereClassQuery) -> Vec<HClass> {
    let mut out = BTreeSet::new();
    let amax = if q.area_condition { q.a_max.min((q.n as i64 - q.alpha).div_euclid(2)) } else { q.a_max };
    for a in q.a_min..=amax {
        if a < 0 {
            if q.allow_negative {
                out.extend(negative_forms(q.n, q.alpha, a));
            }
            continue;
        }
        for ms in class_multisets(q.n, a, -q.alpha, 0, a > 0) {
            for b in arrangements(&ms) {
                let c = HClass::new(a, b);
                if surface_class_filter(&c, 0).map(|f| f.passed()).unwrap_or(false) {
                    out.insert(c);
                }
            }
        }
    }
    let mut v: Vec<HClass> = out.into_iter().collect();
    if q.area_condition {
        let forms: BTreeSet<HClass> = area_bounded_forms(q.n, q.alpha).into_iter().collect();
        v.retain(|c| c.a < 0 || forms.contains(c));
    }
    v
}

/// `aH + (|a|+1)E_{j₁} − E_{j₂} − ⋯ − E_{j_s}` for a < 0, every anchor j₁.
pub fn negative_forms(n: usize, alpha: i64, a: i64) -> Vec<HClass> {
    let m = -a;
    let s = alpha - 2 * m;
    if a >= 0 || s < 1 || (s as usize) > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    for j in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        for comb in combinations(&rest, (s - 1) as usize) {
            let mut b = vec![0; n];
            b[j] = -(m + 1);
            for &i in &comb {
                b[i] = 1;
            }
            out.push(HClass::new(a, b));
        }
    }
    out.sort();
    out
}

pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    comb_rec(items, k, 0, &mut cur, &mut out);
    out
}

fn comb_rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        if items.len() - i < k - cur.len() {
            break;
        }
        cur.push(items[i]);
        comb_rec(items, k, i + 1, cur, out);
        cur.pop();
    }
}

/// `aH − (a−1)E_{j₁} − E_{j₂} − ⋯ − E_{j_{2a+α}}` for one value of a ≥ 0.
pub fn special_forms(n: usize, alpha: i64, a: i64) -> Vec<HClass> {
    let mut out = BTreeSet::new();
    let all: Vec<usize> = (0..n).collect();
    if a < 0 {
        return Vec::new();
    }
    let total = 2 * a + alpha; // j₁ .. j_{2a+α}
    if a == 1 {
        // the j₁ coefficient vanishes, leaving H minus 2 + α exceptional classes
        if total - 1 > n as i64 {
            return Vec::new();
        }
        for comb in combinations(&all, (total - 1) as usize) {
            let mut b = vec![0; n];
            for &i in &comb {
                b[i] = 1;
            }
            out.insert(HClass::new(a, b));
        }
        return out.into_iter().collect();
    }
    if total < 1 || total as usize > n {
        return Vec::new();
    }
    for j in 0..n {
        let rest: Vec<usize> = all.iter().copied().filter(|&i| i != j).collect();
        for comb in combinations(&rest, (total - 1) as usize) {
            let mut b = vec![0; n];
            b[j] = a - 1;
            for &i in &comb {
                b[i] = 1;
            }
            out.insert(HClass::new(a, b));
        }
    }
    out.into_iter().collect()
}

/// Candidate pool under the area condition ω(A) < −K·[ω]: the special forms
/// with 0 ≤ a ≤ (N − α)/2.
pub fn area_bounded_forms(n: usize, alpha: i64) -> Vec<HClass> {
    let amax = (n as i64 - alpha).div_euclid(2);
    let mut v = Vec::new();
    for a in 0..=amax {
        v.extend(special_forms(n, alpha, a));
    }
    v.sort();
    v
}

/// Apply Cremona reflections at the three largest positive coefficients
/// while a > 3 and the reflection lowers a. Returns the last class and the
/// 1-based index triples used.
pub fn reduce_by_cremona(x: &HClass) -> (HClass, Vec<(usize, usize, usize)>) {
    let mut cur = x.clone();
    let mut trail = Vec::new();
    while cur.a > 3 {
        let mut idx: Vec<usize> = (0..cur.n()).filter(|&i| cur.b[i] > 0).collect();
        if idx.len() < 3 {
            break;
        }
        idx.sort_by(|&i, &j| cur.b[j].cmp(&cur.b[i]).then(i.cmp(&j)));
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        if cur.a - cur.b[i] - cur.b[j] - cur.b[k] >= 0 {
            break;
        }
        cur = reflect_cremona(&cur, i + 1, j + 1, k + 1).expect("distinct indices");
        trail.push((i + 1, j + 1, k + 1));
    }
    (cur, trail)
}

/// `3H − E_{j₁} − ⋯ − E_{j₉}` over all 9-subsets.
pub fn zero_square_forms(n: usize) -> Vec<HClass> {
    if n < 9 {
        return Vec::new();
    }
    let all: Vec<usize> = (1..=n).collect();
    let mut v: Vec<HClass> = combinations(&all, 9).iter().map(|c| HClass::line_like(n, 3, c)).collect();
    v.sort();
    v
}

/// For a nonzero B with B² = K·B = 0: a ≥ 3 or a < 0.
pub fn zero_square_a_ok(b: &HClass) -> bool {
    b.a >= 3 || b.a < 0
}

/// All nonzero B with B² = K·B = 0 in the window |a| ≤ amax, |bᵢ| ≤ bmax.
pub fn zero_square_window(n: usize, amax: i64, bmax: i64) -> Vec<HClass> {
    let mut out = Vec::new();
    for a in -amax..=amax {
        for ms in b_multisets(n, a * a - 3 * a, 3 * a, -bmax, bmax) {
            for b in arrangements(&ms) {
                let c = HClass::new(a, b);
                if !c.is_zero() {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Smallest support over (−α)-sphere classes at fixed a, for b ≥ 0 only
/// (`nonneg`) or all integer solutions. `None` when there are no classes.
pub fn min_support(n: usize, alpha: i64, a: i64, nonneg: bool) -> Option<usize> {
    class_multisets(n, a, -alpha, 0, nonneg)
        .iter()
        .map(|m| m.iter().filter(|&&v| v != 0).count())
        .min()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportRow {
    pub n: usize,
    pub alpha: i64,
    pub a: i64,
    /// Number of coefficient multisets (classes up to relabeling).
    pub shapes: usize,
    pub min_support: Option<usize>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportReport {
    pub rows: Vec<SupportRow>,
    pub passed: bool,
}

/// Every (−α)-sphere class with 4 ≤ a ≤ 6 and bᵢ ≥ 0 has at least α + 7
/// nonzero bᵢ, for 9 ≤ N ≤ 13 and α ∈ {2, 3}.
pub fn verify_support_size() -> SupportReport {
    let mut rows = Vec::new();
    for n in 9..=13 {
        for alpha in 2..=3 {
            for a in 4..=6 {
                let shapes = class_multisets(n, a, -alpha, 0, true);
                let min_support = min_support(n, alpha, a, true);
                let ok = min_support.is_none_or(|m| m as i64 >= alpha + 7);
                rows.push(SupportRow { n, alpha, a, shapes: shapes.len(), min_support, ok });
            }
        }
    }
    let passed = rows.iter().all(|r| r.ok);
    SupportReport { rows, passed }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroSquareReport {
    pub n: usize,
    pub window: (i64, i64),
    pub solutions: usize,
    /// Nonzero solutions with 0 ≤ a < 3.
    pub small_a: Vec<HClass>,
    /// Solutions with a = 3 that are not of the form 3H − E_{j₁} − ⋯ − E_{j₉}.
    pub irregular_a3: Vec<HClass>,
    /// Pairs of negative-a forms sharing the anchor E₁ that fail to meet negatively.
    pub negative_pairs_checked: usize,
    pub negative_pair_failures: Vec<(HClass, HClass)>,
    pub passed: bool,
}

/// Exhaustive windows for square-zero classes (N = 10, |a|, |bᵢ| ≤ 6) and
/// for pairs of negative-a sphere forms anchored at E₁ (N ≤ 8, 3 ≤ α ≤ 8).
pub fn verify_zero_square() -> ZeroSquareReport {
    let (n, amax, bmax) = (10, 6, 6);
    let w = zero_square_window(n, amax, bmax);
    let small_a: Vec<HClass> = w.iter().filter(|c| !zero_square_a_ok(c)).cloned().collect();
    let forms: BTreeSet<HClass> = zero_square_forms(n).into_iter().collect();
    let irregular_a3: Vec<HClass> = w.iter().filter(|c| c.a == 3 && !forms.contains(*c)).cloned().collect();
    let mut checked = 0;
    let mut failures = Vec::new();
    for m in 2..=8 {
        let mut all = Vec::new();
        for alpha in 3..=8 {
            for a in -(alpha / 2)..0 {
                all.extend(negative_forms(m, alpha, a).into_iter().filter(|c| negative_form_anchor(c) == Some(0)));
            }
        }
        for (i, x) in all.iter().enumerate() {
            for y in &all[i..] {
                checked += 1;
                if crate::lattice::dot(x, y) >= 0 {
                    failures.push((x.clone(), y.clone()));
                }
            }
        }
    }
    let passed = small_a.is_empty() && irregular_a3.is_empty() && failures.is_empty() && !w.is_empty();
    ZeroSquareReport { n, window: (amax, bmax), solutions: w.len(), small_a, irregular_a3, negative_pairs_checked: checked, negative_pair_failures: failures, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::dot;

    fn query(n: usize, alpha: i64, a: i64) -> SphereClassQuery {
        SphereClassQuery { n, alpha, a_min: a, a_max: a, area_condition: false, allow_negative: false }
    }

    #[test]
    fn filter_examples() {
        let l = HClass::line_like(3, 1, &[1, 2, 3]);
        assert!(surface_class_filter(&l, 0).unwrap().passed());
        let bad = HClass::new(2, vec![2, -1]);
        let g = adjunction_genus(&bad).to_integer();
        assert!(!surface_class_filter(&bad, g).unwrap().passed());
        let neg = HClass::new(-1, vec![-2, 0, 0]);
        assert_eq!(neg.square(), -3);
        assert!(surface_class_filter(&neg, 0).unwrap().passed());
        assert!(surface_class_filter(&l, 1).is_err());
    }

    #[test]
    fn counts_n9() {
        let z = enumerate_sphere_classes(&query(9, 2, 0));
        assert_eq!(z.len(), 72);
        assert!(z.iter().all(|c| c.support() == 2 && c.b.iter().sum::<i64>() == 0));
        let t = enumerate_sphere_classes(&query(9, 2, 3));
        assert_eq!(t.len(), 72);
        assert!(enumerate_sphere_classes(&query(8, 2, 4)).is_empty());
    }

    #[test]
    fn observation_forms_match() {
        for n in 3..=10 {
            for alpha in 2..=3 {
                for a in 0..=3 {
                    let e: BTreeSet<_> = enumerate_sphere_classes(&query(n, alpha, a)).into_iter().collect();
                    let f: BTreeSet<_> = special_forms(n, alpha, a).into_iter().collect();
                    assert_eq!(e, f, "n={n} alpha={alpha} a={a}");
                }
            }
        }
    }

    #[test]
    fn defining_equations() {
        let q = SphereClassQuery { n: 10, alpha: 3, a_min: -1, a_max: 5, area_condition: false, allow_negative: true };
        for c in enumerate_sphere_classes(&q) {
            assert_eq!(c.square(), -3);
            assert_eq!(c.k_dot(), 1);
        }
    }

    #[test]
    fn area_bounded_pool() {
        let p = area_bounded_forms(9, 2);
        let strata: BTreeSet<i64> = p.iter().map(|c| c.a).collect();
        assert_eq!(strata.into_iter().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(p.len(), 72 + 84 + 84 + 72);
        assert_eq!(area_bounded_forms(8, 2).iter().map(|c| c.a).max(), Some(3));
        let p12 = area_bounded_forms(12, 3);
        assert_eq!(p12.iter().map(|c| c.a).max(), Some(4));
        assert!(p12.iter().filter(|c| c.a == 4).all(|c| c.support() == 11));
    }

    #[test]
    fn cremona_example() {
        let mut b = vec![2, 2, 2];
        b.extend(vec![1; 6]);
        let x = HClass::new(4, b);
        assert_eq!(x.square(), -2);
        let (y, trail) = reduce_by_cremona(&x);
        assert_eq!(y.a, 2);
        assert_eq!(trail.len(), 1);
        assert_eq!(y.square(), -2);
        assert_eq!(y.k_dot(), 0);
        let small = HClass::line_like(9, 1, &[1, 2, 3]);
        assert_eq!(reduce_by_cremona(&small).0, small);
    }

    #[test]
    fn zero_square() {
        assert_eq!(zero_square_forms(9), vec![HClass::canonical(9).scale(-1)]);
        assert_eq!(zero_square_forms(10).len(), 10);
        let w = zero_square_window(10, 6, 6);
        assert!(!w.is_empty());
        assert!(w.iter().all(|c| c.square() == 0 && c.k_dot() == 0));
        assert!(w.iter().all(zero_square_a_ok));
    }

    #[test]
    fn support_and_zero_square_reports() {
        let s = verify_support_size();
        assert!(s.passed);
        assert_eq!(s.rows.len(), 30);
        assert!(s.rows.iter().any(|r| r.min_support.is_some()));
        let z = verify_zero_square();
        assert!(z.passed, "{:?} {:?}", z.small_a, z.irregular_a3);
        assert!(z.negative_pairs_checked > 100);
    }

    #[test]
    fn negative_pairs_meet_negatively() {
        for n in 2..=7 {
            let mut all = Vec::new();
            for alpha in 3..=8 {
                for a in -(alpha / 2)..0 {
                    all.extend(negative_forms(n, alpha, a).into_iter().filter(|c| negative_form_anchor(c) == Some(0)));
                }
            }
            assert!(!all.is_empty());
            for x in &all {
                for y in &all {
                    assert!(dot(x, y) < 0, "{x} . {y}");
                }
            }
        }
    }
}
