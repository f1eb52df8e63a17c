//! Exact feasibility of mixed strict / non-strict rational linear systems over
//! the symbolic areas ω(H), ω(E₁..E_N), δ₁, δ₂.
//!
//! Strict rows are handled by maximizing a slack `t` with every strict row
//! required to be ≥ t and t ≤ 1; the system is feasible iff the optimum is
//! positive. Constants are homogenized with an extra variable τ ≥ t, so the
//! origin is always a basic feasible point and a single simplex phase suffices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::lattice::HClass;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    WH,
    /// 1-based exceptional index.
    WE(usize),
    Delta1,
    Delta2,
}

impl Var {
    fn index(self, n: usize) -> usize {
        match self {
            Var::WH => 0,
            Var::WE(i) => i,
            Var::Delta1 => n + 1,
            Var::Delta2 => n + 2,
        }
    }

    fn from_index(i: usize, n: usize) -> Var {
        match i {
            0 => Var::WH,
            i if i <= n => Var::WE(i),
            i if i == n + 1 => Var::Delta1,
            _ => Var::Delta2,
        }
    }

    pub fn name(self) -> String {
        match self {
            Var::WH => "w_H".into(),
            Var::WE(i) => format!("w_E{i}"),
            Var::Delta1 => "delta1".into(),
            Var::Delta2 => "delta2".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Var, Error> {
        match s {
            "w_H" => Ok(Var::WH),
            "delta1" => Ok(Var::Delta1),
            "delta2" => Ok(Var::Delta2),
            _ => s
                .strip_prefix("w_E")
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&i| i >= 1)
                .map(Var::WE)
                .ok_or_else(|| Error::Invalid(format!("unknown area variable {s}"))),
        }
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Σ cᵥ·v + constant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm {
    pub coeffs: BTreeMap<Var, BigRational>,
    pub constant: BigRational,
}

impl LinearForm {
    pub fn var(v: Var) -> Self {
        let mut f = LinearForm::default();
        f.coeffs.insert(v, BigRational::one());
        f
    }

    pub fn add_term(&mut self, v: Var, c: BigRational) {
        let e = self.coeffs.entry(v).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn plus(&self, o: &LinearForm) -> LinearForm {
        let mut r = self.clone();
        for (v, c) in &o.coeffs {
            r.add_term(*v, c.clone());
        }
        r.constant += &o.constant;
        r
    }

    pub fn scaled(&self, s: &BigRational) -> LinearForm {
        LinearForm {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * s)).filter(|(_, c)| !c.is_zero()).collect(),
            constant: &self.constant * s,
        }
    }

    pub fn minus(&self, o: &LinearForm) -> LinearForm {
        self.plus(&o.scaled(&rat(-1)))
    }

    pub fn eval(&self, w: &Witness) -> BigRational {
        let mut s = self.constant.clone();
        for (v, c) in &self.coeffs {
            if let Some(x) = w.get(v) {
                s += c * x;
            }
        }
        s
    }

    pub fn max_e_index(&self) -> usize {
        self.coeffs
            .keys()
            .filter_map(|v| if let Var::WE(i) = v { Some(*i) } else { None })
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let mag = c.abs();
            let sign = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            first = false;
            if mag.is_one() {
                write!(f, "{sign}{}", v.name())?;
            } else {
                write!(f, "{sign}{mag}*{}", v.name())?;
            }
        }
        if !self.constant.is_zero() || first {
            if first {
                write!(f, "{}", self.constant)?;
            } else if self.constant.is_negative() {
                write!(f, " - {}", self.constant.abs())?;
            } else {
                write!(f, " + {}", self.constant)?;
            }
        }
        Ok(())
    }
}

/// ω(A) = a·w_H − Σ bᵢ·w_Eᵢ.
pub fn area_of(x: &HClass) -> LinearForm {
    let mut f = LinearForm::default();
    if x.a != 0 {
        f.add_term(Var::WH, rat(x.a));
    }
    for (i, &b) in x.b.iter().enumerate() {
        if b != 0 {
            f.add_term(Var::WE(i + 1), rat(-b));
        }
    }
    f
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Gt => "> 0",
            Rel::Ge => ">= 0",
            Rel::Eq => "= 0",
        })
    }
}

/// `form rel 0`. Rows marked `lazy` start outside the working set of the
/// solver and are only added when a candidate point violates them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub form: LinearForm,
    pub rel: Rel,
    pub lazy: bool,
    pub label: String,
}

impl Row {
    pub fn new(form: LinearForm, rel: Rel, label: impl Into<String>) -> Self {
        Row { form, rel, lazy: false, label: label.into() }
    }

    pub fn gt(form: LinearForm, label: impl Into<String>) -> Self {
        Row::new(form, Rel::Gt, label)
    }

    pub fn ge(form: LinearForm, label: impl Into<String>) -> Self {
        Row::new(form, Rel::Ge, label)
    }

    pub fn eq(form: LinearForm, label: impl Into<String>) -> Self {
        Row::new(form, Rel::Eq, label)
    }

    fn lazy(mut self) -> Self {
        self.lazy = true;
        self
    }

    pub fn holds(&self, w: &Witness) -> bool {
        let v = self.form.eval(w);
        match self.rel {
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
            Rel::Eq => v.is_zero(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AreaSystem {
    pub n: usize,
    pub rows: Vec<Row>,
}

pub type Witness = BTreeMap<Var, BigRational>;

impl AreaSystem {
    pub fn new(n: usize) -> Self {
        AreaSystem { n, rows: Vec::new() }
    }

    pub fn push(&mut self, r: Row) {
        self.rows.push(r);
    }

    pub fn extend(&mut self, o: &AreaSystem) {
        self.rows.extend(o.rows.iter().cloned());
    }

    pub fn with(&self, extra: &[Row]) -> AreaSystem {
        let mut s = self.clone();
        s.rows.extend_from_slice(extra);
        s
    }

    pub fn satisfied_by(&self, w: &Witness) -> bool {
        self.rows.iter().all(|r| r.holds(w))
    }
}

/// The finite consequences of a reduced basis: ω(H) > 0, ω(Eᵢ) > 0,
/// ω(Eᵢ) ≥ ω(Eᵢ₊₁), ω(H − Eᵢ − Eⱼ) > 0 and ω(H − Eᵢ − Eⱼ − E_k) ≥ 0.
pub fn reduced_basis_system(n: usize) -> AreaSystem {
    let mut s = AreaSystem::new(n);
    add_basis_rows(&mut s, n, true);
    s
}

/// The same rows without the ordering of the ω(Eᵢ). A tuple of classes is
/// feasible here iff some relabeling of its indices is feasible in
/// [`reduced_basis_system`]: sort a witness by decreasing ω(Eᵢ).
pub fn unordered_basis_system(n: usize) -> AreaSystem {
    let mut s = AreaSystem::new(n);
    add_basis_rows(&mut s, n, false);
    s
}

fn add_basis_rows(s: &mut AreaSystem, n: usize, ordered: bool) {
    s.push(Row::gt(LinearForm::var(Var::WH), "w(H) > 0"));
    for i in 1..=n {
        s.push(Row::gt(LinearForm::var(Var::WE(i)), format!("w(E{i}) > 0")));
    }
    if ordered {
        for i in 1..n {
            let f = LinearForm::var(Var::WE(i)).minus(&LinearForm::var(Var::WE(i + 1)));
            s.push(Row::ge(f, format!("w(E{i}) >= w(E{})", i + 1)));
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            let c = HClass::line_like(n, 1, &[i, j]);
            s.push(Row::gt(area_of(&c), format!("w(H-E{i}-E{j}) > 0")).lazy());
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                let c = HClass::line_like(n, 1, &[i, j, k]);
                s.push(Row::ge(area_of(&c), format!("w(H-E{i}-E{j}-E{k}) >= 0")).lazy());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Witness),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible => None,
        }
    }
}

/// Exact decision of the system, with a witness when feasible. The witness
/// satisfies every row (checked before returning).
pub fn feasible(s: &AreaSystem) -> Feasibility {
    let nvars = s.n + 3;
    let mut active: Vec<usize> = (0..s.rows.len()).filter(|&i| !s.rows[i].lazy).collect();
    let mut in_active = vec![false; s.rows.len()];
    for &i in &active {
        in_active[i] = true;
    }
    loop {
        let rows: Vec<&Row> = active.iter().map(|&i| &s.rows[i]).collect();
        let Some(w) = solve_slack(&rows, s.n, nvars) else {
            return Feasibility::Infeasible;
        };
        let mut added = false;
        for (i, r) in s.rows.iter().enumerate() {
            if !in_active[i] && !r.holds(&w) {
                in_active[i] = true;
                active.push(i);
                added = true;
            }
        }
        if !added {
            assert!(s.satisfied_by(&w), "witness must satisfy every row");
            return Feasibility::Feasible(w);
        }
    }
}

/// Maximize t subject to the given rows, with every variable free.
/// Returns a witness iff the optimum is positive.
fn solve_slack(rows: &[&Row], n: usize, nvars: usize) -> Option<Witness> {
    // columns: x⁺ (nvars), x⁻ (nvars), τ, t
    let ncols = 2 * nvars + 2;
    let tau = 2 * nvars;
    let t = tau + 1;
    // every constraint is written as  Σ a·y ≤ b
    let mut cons: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    let mut push_le = |coef: Vec<BigRational>, b: BigRational| cons.push((coef, b));
    for r in rows {
        // g(y) = L(x) + c·τ
        let mut g = vec![BigRational::zero(); ncols];
        for (v, c) in &r.form.coeffs {
            let j = v.index(n);
            g[j] += c;
            g[nvars + j] -= c;
        }
        g[tau] += &r.form.constant;
        match r.rel {
            Rel::Gt => {
                // g ≥ t  ⇔  −g + t ≤ 0
                let mut a: Vec<BigRational> = g.iter().map(|x| -x).collect();
                a[t] += BigRational::one();
                push_le(a, BigRational::zero());
            }
            Rel::Ge => {
                push_le(g.iter().map(|x| -x).collect(), BigRational::zero());
            }
            Rel::Eq => {
                push_le(g.iter().map(|x| -x).collect(), BigRational::zero());
                push_le(g, BigRational::zero());
            }
        }
    }
    // τ ≥ t
    let mut a = vec![BigRational::zero(); ncols];
    a[tau] = rat(-1);
    a[t] = rat(1);
    push_le(a, BigRational::zero());
    // t ≤ 1
    let mut a = vec![BigRational::zero(); ncols];
    a[t] = rat(1);
    push_le(a, rat(1));

    let m = cons.len();
    let width = ncols + m + 1; // structural, slacks, rhs
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    for (i, (a, b)) in cons.into_iter().enumerate() {
        let mut row = a;
        row.resize(width, BigRational::zero());
        row[ncols + i] = BigRational::one();
        row[width - 1] = b;
        tab.push(row);
    }
    // objective row holds reduced costs of "maximize t": z − t = 0
    let mut obj = vec![BigRational::zero(); width];
    obj[t] = rat(-1);
    tab.push(obj);
    let mut basis: Vec<usize> = (0..m).map(|i| ncols + i).collect();

    loop {
        // Bland: smallest column with negative reduced cost enters
        let Some(enter) = (0..width - 1).find(|&j| tab[m][j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            let a = &tab[i][enter];
            if a.is_positive() {
                let ratio = &tab[i][width - 1] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (li, _) = leave.expect("slack objective is bounded by t <= 1");
        pivot(&mut tab, li, enter);
        basis[li] = enter;
    }

    let mut y = vec![BigRational::zero(); ncols];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < ncols {
            y[bv] = tab[i][width - 1].clone();
        }
    }
    if !y[t].is_positive() {
        return None;
    }
    let tau_v = y[tau].clone();
    let mut w = Witness::new();
    for j in 0..nvars {
        let x = (&y[j] - &y[nvars + j]) / &tau_v;
        w.insert(Var::from_index(j, n), x);
    }
    Some(w)
}

fn pivot(tab: &mut [Vec<BigRational>], r: usize, c: usize) {
    let p = tab[r][c].clone();
    for x in tab[r].iter_mut() {
        *x /= &p;
    }
    let prow = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (x, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *x -= &f * pv;
            }
        }
    }
}

// ---- JSON ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowJson {
    form: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<String>,
    rel: Rel,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemJson {
    n: usize,
    #[serde(default)]
    include_reduced_basis: bool,
    rows: Vec<RowJson>,
}

fn parse_rat(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::Invalid(format!("bad rational {s}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Parse `{ "n": N, "include_reduced_basis": bool, "rows": [ {form, constant?, rel, label?} ] }`.
pub fn system_from_json(text: &str) -> Result<AreaSystem, Error> {
    let j: SystemJson = serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut s = if j.include_reduced_basis { reduced_basis_system(j.n) } else { AreaSystem::new(j.n) };
    for r in j.rows {
        let mut f = LinearForm::default();
        for (k, v) in &r.form {
            let var = Var::parse(k)?;
            if let Var::WE(i) = var {
                if i > j.n {
                    return Err(Error::Invalid(format!("{k} exceeds n = {}", j.n)));
                }
            }
            f.add_term(var, parse_rat(v)?);
        }
        if let Some(c) = &r.constant {
            f.constant = parse_rat(c)?;
        }
        s.push(Row { form: f, rel: r.rel, lazy: false, label: r.label });
    }
    Ok(s)
}

pub fn system_to_json(s: &AreaSystem) -> serde_json::Value {
    let rows: Vec<RowJson> = s
        .rows
        .iter()
        .map(|r| RowJson {
            form: r.form.coeffs.iter().map(|(v, c)| (v.name(), c.to_string())).collect(),
            constant: if r.form.constant.is_zero() { None } else { Some(r.form.constant.to_string()) },
            rel: r.rel,
            label: r.label.clone(),
        })
        .collect();
    serde_json::to_value(SystemJson { n: s.n, include_reduced_basis: false, rows }).unwrap()
}

pub fn witness_to_json(w: &Witness) -> serde_json::Value {
    let m: BTreeMap<String, String> = w.iter().map(|(v, x)| (v.name(), x.to_string())).collect();
    serde_json::to_value(m).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn n3_row_counts() {
        let s = reduced_basis_system(3);
        assert_eq!(s.rows.len(), 1 + 3 + 2 + 3 + 1);
        let strict = s.rows.iter().filter(|r| r.rel == Rel::Gt).count();
        assert_eq!(strict, 1 + 3 + 3);
    }

    #[test]
    fn uniform_vector() {
        let s = reduced_basis_system(9);
        let mut w = Witness::new();
        w.insert(Var::WH, rat(3));
        for i in 1..=9 {
            w.insert(Var::WE(i), rat(1));
        }
        assert!(s.satisfied_by(&w));
        let last = s.rows.last().unwrap();
        assert!(last.form.eval(&w).is_zero());
        w.insert(Var::WH, rat(1));
        assert!(!s.satisfied_by(&w));
    }

    #[test]
    fn area_forms() {
        let k = area_of(&HClass::canonical(9));
        assert_eq!(k.coeffs[&Var::WH], rat(-3));
        assert_eq!(k.coeffs[&Var::WE(4)], rat(1));
        let d = area_of(&HClass::e(9, 1).sub(&HClass::e(9, 2)));
        assert_eq!(d.to_string(), "w_E1 - w_E2");
        assert_eq!(area_of(&HClass::h(9)).to_string(), "w_H");
    }

    #[test]
    fn reduced_system_feasible() {
        let s = reduced_basis_system(9);
        let f = feasible(&s);
        assert!(f.is_feasible());
    }

    #[test]
    fn contradiction_rows() {
        // w(F + A) >= -K·w with w(F) = w(A) = δ₂, 7δ₂ < -K·w, δ₂ > 0
        let n = 9;
        let mut s = reduced_basis_system(n);
        let mk = area_of(&HClass::canonical(n)).scaled(&rat(-1));
        let f = HClass::e(n, 1).sub(&HClass::e(n, 2));
        let a = HClass::e(n, 3).sub(&HClass::e(n, 4));
        let d2 = LinearForm::var(Var::Delta2);
        s.push(Row::ge(area_of(&f).plus(&area_of(&a)).minus(&mk), "w(F+A) >= -K.w"));
        s.push(Row::eq(area_of(&f).minus(&d2), "w(F) = d2"));
        s.push(Row::eq(area_of(&a).minus(&d2), "w(A) = d2"));
        s.push(Row::gt(mk.minus(&d2.scaled(&rat(7))), "7 d2 < -K.w"));
        s.push(Row::gt(d2.clone(), "d2 > 0"));
        assert_eq!(feasible(&s), Feasibility::Infeasible);
    }

    #[test]
    fn constants_and_empty() {
        let mut s = AreaSystem::new(1);
        assert!(feasible(&s).is_feasible());
        // w_H − 2 = 0 and w_H > 1
        let mut f = LinearForm::var(Var::WH);
        f.constant = rat(-2);
        s.push(Row::eq(f, ""));
        let mut g = LinearForm::var(Var::WH);
        g.constant = rat(-1);
        s.push(Row::gt(g.clone(), ""));
        let w = feasible(&s);
        assert_eq!(w.witness().unwrap()[&Var::WH], rat(2));
        let mut h = LinearForm::var(Var::WH);
        h.constant = q(-5, 2);
        s.push(Row::gt(h, ""));
        assert!(!feasible(&s).is_feasible());
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"n": 3, "include_reduced_basis": true,
            "rows": [{"form": {"w_E1": "1", "w_E2": "-1"}, "rel": ">", "label": "gap"}]}"#;
        let s = system_from_json(text).unwrap();
        assert_eq!(s.rows.len(), 11);
        let w = feasible(&s);
        assert!(w.is_feasible());
        let back = system_from_json(&system_to_json(&s).to_string()).unwrap();
        assert_eq!(back.rows.len(), s.rows.len());
        assert!(system_from_json(r#"{"n": 2, "rows": [{"form": {"w_E3": "1"}, "rel": ">"}]}"#).is_err());
    }
}
