//! Exterior calculus on the (v, t) coordinate chart, with scalar
//! coefficients that carry analytic partial-derivative oracles, and the
//! truncated jet algebra modelling the logarithm-sheaf fiber.
//!
//! A [`ScalarField`] bundles an evaluation closure with a constructor for
//! each partial derivative, so sums, products and powers differentiate
//! analytically; finite differences appear only as cross-checks in tests.
//! Jet values truncated at degree 0 are plain complex scalars.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormsError {
    /// Inverting a jet whose constant term vanishes.
    SingularInverse,
    /// Contracting a 0-form.
    DegreeZeroContraction,
}

impl core::fmt::Display for FormsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FormsError::SingularInverse => write!(f, "jet inverse with zero constant term"),
            FormsError::DegreeZeroContraction => write!(f, "cannot contract a 0-form"),
        }
    }
}

const ZERO_C: Complex64 = Complex64::new(0.0, 0.0);

/// Truncated power series in the jet generators e_1..e_vars with total
/// degree <= trunc. Dense storage in lexicographic monomial order
/// (first exponent major).
#[derive(Clone, Debug, PartialEq)]
pub struct JetSeries {
    vars: usize,
    trunc: u32,
    coeff: Vec<Complex64>,
}

fn jet_len(vars: usize, trunc: u32) -> usize {
    let k = trunc as usize;
    match vars {
        1 => k + 1,
        2 => (k + 1) * (k + 2) / 2,
        _ => panic!("jet algebra supports one or two generators"),
    }
}

impl JetSeries {
    pub fn zero(vars: usize, trunc: u32) -> Self {
        JetSeries { vars, trunc, coeff: vec![ZERO_C; jet_len(vars, trunc)] }
    }

    pub fn constant(vars: usize, trunc: u32, z: Complex64) -> Self {
        let mut s = Self::zero(vars, trunc);
        s.coeff[0] = z;
        s
    }

    pub fn one(vars: usize, trunc: u32) -> Self {
        Self::constant(vars, trunc, Complex64::new(1.0, 0.0))
    }

    /// The generator e_{i+1}. Truncation degree 0 collapses it to zero.
    pub fn generator(vars: usize, trunc: u32, i: usize) -> Self {
        assert!(i < vars);
        let mut s = Self::zero(vars, trunc);
        if trunc >= 1 {
            let mut m = [0u32; 2];
            m[i] = 1;
            let idx = s.index(&m[..vars]).unwrap();
            s.coeff[idx] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    fn index(&self, m: &[u32]) -> Option<usize> {
        let total: u32 = m.iter().sum();
        if total > self.trunc {
            return None;
        }
        Some(match self.vars {
            1 => m[0] as usize,
            _ => {
                let k = self.trunc as usize;
                let m1 = m[0] as usize;
                m1 * (k + 1) - m1 * m1.saturating_sub(1) / 2 + m[1] as usize
            }
        })
    }

    /// Monomial exponents in storage order (second entry 0 for one variable).
    pub fn monomials(&self) -> Vec<[u32; 2]> {
        let mut out = Vec::with_capacity(self.coeff.len());
        if self.vars == 1 {
            for m in 0..=self.trunc {
                out.push([m, 0]);
            }
        } else {
            for m1 in 0..=self.trunc {
                for m2 in 0..=(self.trunc - m1) {
                    out.push([m1, m2]);
                }
            }
        }
        out
    }

    pub fn coeff(&self, m: &[u32]) -> Complex64 {
        self.index(m).map_or(ZERO_C, |i| self.coeff[i])
    }

    pub fn set_coeff(&mut self, m: &[u32], z: Complex64) {
        let i = self.index(m).expect("monomial beyond truncation");
        self.coeff[i] = z;
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff[0]
    }

    fn compat(&self, o: &Self) {
        assert!(self.vars == o.vars && self.trunc == o.trunc, "jet shape mismatch");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.compat(o);
        let mut out = self.clone();
        for (c, d) in out.coeff.iter_mut().zip(o.coeff.iter()) {
            *c += d;
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.compat(o);
        let mut out = self.clone();
        for (c, d) in out.coeff.iter_mut().zip(o.coeff.iter()) {
            *c -= d;
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.coeff.iter_mut() {
            *c *= z;
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.compat(o);
        let mons = self.monomials();
        let mut out = Self::zero(self.vars, self.trunc);
        for (i, a) in mons.iter().enumerate() {
            let ca = self.coeff[i];
            if ca == ZERO_C {
                continue;
            }
            for (j, b) in mons.iter().enumerate() {
                let cb = o.coeff[j];
                if cb == ZERO_C {
                    continue;
                }
                let m = [a[0] + b[0], a[1] + b[1]];
                if let Some(t) = out.index(&m[..self.vars]) {
                    out.coeff[t] += ca * cb;
                }
            }
        }
        out
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn recip(&self) -> Self {
        let c = self.coeff[0];
        assert!(c != ZERO_C, "jet inverse of series with zero constant term");
        // f = c(1 + u) with u nilpotent: 1/f = (1/c) sum (-u)^j
        let u = self.scale(c.finv()).sub(&Self::one(self.vars, self.trunc));
        let mut out = Self::one(self.vars, self.trunc);
        let mut up = Self::one(self.vars, self.trunc);
        let mut sign = -1.0;
        for _ in 1..=self.trunc {
            up = up.mul(&u);
            out = out.add(&up.scale(Complex64::new(sign, 0.0)));
            sign = -sign;
        }
        out.scale(c.finv())
    }

    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut out = Self::one(self.vars, self.trunc);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// exp(f) = e^{f(0)} sum (f - f(0))^j / j!.
    pub fn exp(&self) -> Self {
        let c = self.coeff[0];
        let u = self.sub(&Self::constant(self.vars, self.trunc, c));
        let mut out = Self::one(self.vars, self.trunc);
        let mut up = Self::one(self.vars, self.trunc);
        let mut fact = 1.0;
        for j in 1..=self.trunc {
            up = up.mul(&u);
            fact *= j as f64;
            out = out.add(&up.scale(Complex64::new(1.0 / fact, 0.0)));
        }
        out.scale(c.exp())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

fn fbinom(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for j in 1..=k {
        v = v * ((n - k + j) as f64) / (j as f64);
    }
    v
}

/// Degree-trunc expansion of (a - b)^{-(m+1)} as the binomial series
/// sum_k (k+m choose k) b^k / a^{k+m+1}; b must have zero constant term.
pub fn jet_geometric_inverse(a: Complex64, b: &JetSeries, m: u32) -> Result<JetSeries, FormsError> {
    if a == ZERO_C {
        return Err(FormsError::SingularInverse);
    }
    assert!(b.constant_term() == ZERO_C, "expansion point must be the constant term");
    let mut apow = Complex64::new(1.0, 0.0);
    for _ in 0..=m {
        apow *= a;
    }
    let mut out = JetSeries::zero(b.vars, b.trunc);
    let mut bp = JetSeries::one(b.vars, b.trunc);
    for k in 0..=b.trunc {
        if k > 0 {
            bp = bp.mul(b);
            apow *= a;
        }
        out = out.add(&bp.scale(Complex64::new(fbinom(k + m, k), 0.0) * apow.finv()));
    }
    Ok(out)
}

struct FieldNode {
    eval: Box<dyn Fn(&[f64]) -> JetSeries>,
    diff: Box<dyn Fn(usize) -> ScalarField>,
}

/// Scalar coefficient on a chart with `coords` real coordinates, valued in
/// jets. Carries its own partial-derivative constructors, so derived
/// fields differentiate exactly.
#[derive(Clone)]
pub struct ScalarField {
    coords: usize,
    vars: usize,
    trunc: u32,
    node: Rc<FieldNode>,
}

impl ScalarField {
    pub fn constant(coords: usize, value: JetSeries) -> Self {
        let (vars, trunc) = (value.vars(), value.trunc());
        ScalarField {
            coords,
            vars,
            trunc,
            node: Rc::new(FieldNode {
                eval: Box::new(move |_| value.clone()),
                diff: Box::new(move |_| {
                    ScalarField::constant(coords, JetSeries::zero(vars, trunc))
                }),
            }),
        }
    }

    pub fn scalar(coords: usize, vars: usize, trunc: u32, z: Complex64) -> Self {
        Self::constant(coords, JetSeries::constant(vars, trunc, z))
    }

    /// The i-th coordinate function.
    pub fn coordinate(coords: usize, i: usize, vars: usize, trunc: u32) -> Self {
        assert!(i < coords);
        ScalarField {
            coords,
            vars,
            trunc,
            node: Rc::new(FieldNode {
                eval: Box::new(move |p| {
                    JetSeries::constant(vars, trunc, Complex64::new(p[i], 0.0))
                }),
                diff: Box::new(move |j| {
                    let z = if j == i { 1.0 } else { 0.0 };
                    ScalarField::scalar(coords, vars, trunc, Complex64::new(z, 0.0))
                }),
            }),
        }
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn eval(&self, p: &[f64]) -> JetSeries {
        assert_eq!(p.len(), self.coords);
        (self.node.eval)(p)
    }

    pub fn partial(&self, i: usize) -> ScalarField {
        assert!(i < self.coords);
        (self.node.diff)(i)
    }

    fn compat(&self, o: &Self) {
        assert!(
            self.coords == o.coords && self.vars == o.vars && self.trunc == o.trunc,
            "scalar field shape mismatch"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.compat(o);
        let (a, b) = (self.clone(), o.clone());
        let (a2, b2) = (self.clone(), o.clone());
        ScalarField {
            coords: self.coords,
            vars: self.vars,
            trunc: self.trunc,
            node: Rc::new(FieldNode {
                eval: Box::new(move |p| a.eval(p).add(&b.eval(p))),
                diff: Box::new(move |i| a2.partial(i).add(&b2.partial(i))),
            }),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.compat(o);
        let (a, b) = (self.clone(), o.clone());
        let (a2, b2) = (self.clone(), o.clone());
        ScalarField {
            coords: self.coords,
            vars: self.vars,
            trunc: self.trunc,
            node: Rc::new(FieldNode {
                eval: Box::new(move |p| a.eval(p).mul(&b.eval(p))),
                diff: Box::new(move |i| {
                    a2.partial(i).mul(&b2).add(&a2.mul(&b2.partial(i)))
                }),
            }),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.scale_jet(JetSeries::constant(self.vars, self.trunc, z))
    }

    pub fn scale_jet(&self, j: JetSeries) -> Self {
        self.mul(&ScalarField::constant(self.coords, j))
    }

    /// f^n; the derivative node is n f^{n-1} f', valid for negative n away
    /// from zeros of the constant term.
    pub fn powi(&self, n: i64) -> Self {
        let a = self.clone();
        let a2 = self.clone();
        ScalarField {
            coords: self.coords,
            vars: self.vars,
            trunc: self.trunc,
            node: Rc::new(FieldNode {
                eval: Box::new(move |p| a.eval(p).powi(n)),
                diff: Box::new(move |i| {
                    a2.powi(n - 1)
                        .mul(&a2.partial(i))
                        .scale(Complex64::new(n as f64, 0.0))
                }),
            }),
        }
    }

    /// Substitute: self(images[0](q), ..., images[coords-1](q)). Point maps
    /// must be real-valued; the constant term's real part is used.
    pub fn compose(&self, images: &[ScalarField]) -> ScalarField {
        assert_eq!(images.len(), self.coords);
        let target = images[0].coords;
        let f = self.clone();
        let ims: Vec<ScalarField> = images.to_vec();
        let f2 = self.clone();
        let ims2: Vec<ScalarField> = images.to_vec();
        ScalarField {
            coords: target,
            vars: self.vars,
            trunc: self.trunc,
            node: Rc::new(FieldNode {
                eval: Box::new(move |p| {
                    let q: Vec<f64> =
                        ims.iter().map(|m| m.eval(p).constant_term().re).collect();
                    f.eval(&q)
                }),
                diff: Box::new(move |i| {
                    let mut acc =
                        ScalarField::scalar(ims2[0].coords, f2.vars, f2.trunc, ZERO_C);
                    for (j, m) in ims2.iter().enumerate() {
                        acc = acc.add(&m.partial(i).mul(&f2.partial(j).compose(&ims2)));
                    }
                    acc
                }),
            }),
        }
    }

    /// Max deviation between analytic partials and central finite
    /// differences at p (cross-check; step ~1e-5).
    pub fn finite_difference_residual(&self, p: &[f64], step: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.coords {
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[i] += step;
            lo[i] -= step;
            let fd = self
                .eval(&hi)
                .sub(&self.eval(&lo))
                .scale(Complex64::new(0.5 / step, 0.0));
            worst = worst.max(fd.sub(&self.partial(i).eval(p)).max_abs());
        }
        worst
    }
}

/// Vector field on the chart; one component per coordinate.
#[derive(Clone)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Self {
        assert!(!components.is_empty());
        assert!(components.iter().all(|c| c.coords == components[0].coords));
        VectorField { components }
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn coords(&self) -> usize {
        self.components[0].coords
    }
}

/// Exterior form; terms keyed by strictly increasing coordinate-index
/// tuples.
#[derive(Clone)]
pub struct DifferentialForm {
    coords: usize,
    vars: usize,
    trunc: u32,
    degree: usize,
    terms: BTreeMap<Vec<u8>, ScalarField>,
}

impl DifferentialForm {
    pub fn zero(coords: usize, vars: usize, trunc: u32, degree: usize) -> Self {
        DifferentialForm { coords, vars, trunc, degree, terms: BTreeMap::new() }
    }

    pub fn function(c: ScalarField) -> Self {
        let mut f = Self::zero(c.coords, c.vars, c.trunc, 0);
        f.add_term(&[], c);
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &ScalarField)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, idx: &[u8], c: ScalarField) {
        assert_eq!(idx.len(), self.degree);
        assert!(idx.windows(2).all(|w| w[0] < w[1]), "indices must be strictly increasing");
        assert!(idx.iter().all(|&i| (i as usize) < self.coords));
        assert!(c.coords == self.coords && c.vars == self.vars && c.trunc == self.trunc);
        match self.terms.remove(idx) {
            Some(prev) => {
                self.terms.insert(idx.to_vec(), prev.add(&c));
            }
            None => {
                self.terms.insert(idx.to_vec(), c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.degree, o.degree);
        let mut out = self.clone();
        for (idx, c) in &o.terms {
            out.add_term(idx, c.clone());
        }
        out
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(z);
        }
        out
    }

    pub fn scale_field(&self, f: &ScalarField) -> Self {
        let mut out = Self::zero(self.coords, self.vars, self.trunc, self.degree);
        for (idx, c) in &self.terms {
            out.add_term(idx, c.mul(f));
        }
        out
    }

    pub fn wedge(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.coords, self.vars, self.trunc, self.degree + o.degree);
        for (ia, ca) in &self.terms {
            for (ib, cb) in &o.terms {
                if ia.iter().any(|x| ib.contains(x)) {
                    continue;
                }
                let mut joined: Vec<u8> = ia.iter().chain(ib.iter()).copied().collect();
                // sign of the sort permutation = parity of inversions
                let mut inversions = 0usize;
                for x in 0..joined.len() {
                    for y in (x + 1)..joined.len() {
                        if joined[x] > joined[y] {
                            inversions += 1;
                        }
                    }
                }
                joined.sort_unstable();
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                out.add_term(&joined, ca.mul(cb).scale(Complex64::new(sign, 0.0)));
            }
        }
        out
    }

    /// Keep only the terms whose every index lies in [lo, hi).
    pub fn restrict_indices(&self, lo: u8, hi: u8) -> Self {
        let mut out = Self::zero(self.coords, self.vars, self.trunc, self.degree);
        for (idx, c) in &self.terms {
            if idx.iter().all(|&i| i >= lo && i < hi) {
                out.add_term(idx, c.clone());
            }
        }
        out
    }

    pub fn eval(&self, p: &[f64]) -> EvaluatedForm {
        let mut terms = BTreeMap::new();
        for (idx, c) in &self.terms {
            terms.insert(idx.clone(), c.eval(p));
        }
        EvaluatedForm { vars: self.vars, trunc: self.trunc, terms }
    }
}

/// A form with its coefficients evaluated at a point.
#[derive(Clone, Debug)]
pub struct EvaluatedForm {
    vars: usize,
    trunc: u32,
    terms: BTreeMap<Vec<u8>, JetSeries>,
}

impl EvaluatedForm {
    pub fn empty(vars: usize, trunc: u32) -> Self {
        EvaluatedForm { vars, trunc, terms: BTreeMap::new() }
    }

    pub fn coeff(&self, idx: &[u8]) -> JetSeries {
        self.terms.get(idx).cloned().unwrap_or_else(|| JetSeries::zero(self.vars, self.trunc))
    }

    pub fn insert_add(&mut self, idx: &[u8], j: JetSeries) {
        let cur = self.coeff(idx);
        self.terms.insert(idx.to_vec(), cur.add(&j));
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &JetSeries)> {
        self.terms.iter()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(z);
        }
        out
    }

    pub fn scale_jet(&self, j: &JetSeries) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.mul(j);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (idx, c) in &o.terms {
            out.insert_add(idx, c.clone());
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn difference_norm(&self, o: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, c) in &self.terms {
            worst = worst.max(c.sub(&o.coeff(idx)).max_abs());
        }
        for (idx, c) in &o.terms {
            worst = worst.max(c.sub(&self.coeff(idx)).max_abs());
        }
        worst
    }
}

pub fn exterior_d(form: &DifferentialForm) -> DifferentialForm {
    let mut out =
        DifferentialForm::zero(form.coords, form.vars, form.trunc, form.degree + 1);
    for (idx, c) in &form.terms {
        for i in 0..form.coords as u8 {
            if idx.contains(&i) {
                continue;
            }
            let pos = idx.iter().filter(|&&x| x < i).count();
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let mut nidx = idx.clone();
            nidx.insert(pos, i);
            out.add_term(&nidx, c.partial(i as usize).scale(Complex64::new(sign, 0.0)));
        }
    }
    out
}

pub fn contract(form: &DifferentialForm, v: &VectorField) -> Result<DifferentialForm, FormsError> {
    if form.degree == 0 {
        return Err(FormsError::DegreeZeroContraction);
    }
    assert_eq!(form.coords, v.coords());
    let mut out =
        DifferentialForm::zero(form.coords, form.vars, form.trunc, form.degree - 1);
    for (idx, c) in &form.terms {
        for (pos, &i) in idx.iter().enumerate() {
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let mut nidx = idx.clone();
            nidx.remove(pos);
            out.add_term(
                &nidx,
                c.mul(v.component(i as usize)).scale(Complex64::new(sign, 0.0)),
            );
        }
    }
    Ok(out)
}

/// Lie derivative via the Cartan formula d(iota) + iota(d).
pub fn lie_derivative(form: &DifferentialForm, v: &VectorField) -> DifferentialForm {
    let part2 = contract(&exterior_d(form), v).expect("d raises degree above zero");
    match contract(form, v) {
        Ok(inner) => exterior_d(&inner).add(&part2),
        Err(_) => part2, // 0-form: L_X f = X(f)
    }
}

/// Lie derivative from the coordinate formula
/// (L_X w)_I = X^j d_j w_I + sum_a w_{I[a -> j]} d_{I_a} X^j,
/// an independent route used to cross-check the Cartan formula. Output
/// components are gathered key by key; w_{I[a -> j]} is read off from the
/// sorted storage with the sort sign.
pub fn lie_derivative_direct(form: &DifferentialForm, v: &VectorField) -> DifferentialForm {
    let mut out = DifferentialForm::zero(form.coords, form.vars, form.trunc, form.degree);
    let keys: Vec<Vec<u8>> = index_tuples(form.coords, form.degree);
    for idx in &keys {
        let mut acc = ScalarField::scalar(form.coords, form.vars, form.trunc, ZERO_C);
        // transport of the coefficient at this key
        if let Some(c) = form.terms.get(idx) {
            for j in 0..form.coords {
                acc = acc.add(&c.partial(j).mul(v.component(j)));
            }
        }
        // frame response
        for (pos, &ia) in idx.iter().enumerate() {
            for j in 0..form.coords as u8 {
                let mut nidx = idx.clone();
                nidx[pos] = j;
                if nidx.iter().filter(|&&x| x == j).count() > 1 {
                    continue;
                }
                let mut inversions = 0usize;
                for x in 0..nidx.len() {
                    for y in (x + 1)..nidx.len() {
                        if nidx[x] > nidx[y] {
                            inversions += 1;
                        }
                    }
                }
                let mut sorted = nidx;
                sorted.sort_unstable();
                let Some(c) = form.terms.get(&sorted) else {
                    continue;
                };
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                acc = acc.add(
                    &c.mul(&v.component(j as usize).partial(ia as usize))
                        .scale(Complex64::new(sign, 0.0)),
                );
            }
        }
        out.add_term(idx, acc);
    }
    out
}

/// All strictly increasing index tuples of the given length.
fn index_tuples(coords: usize, degree: usize) -> Vec<Vec<u8>> {
    if degree == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<u8>, u8)> = vec![(Vec::new(), 0)];
    while let Some((cur, start)) = stack.pop() {
        if cur.len() == degree {
            out.push(cur);
            continue;
        }
        for i in (start..coords as u8).rev() {
            let mut next = cur.clone();
            next.push(i);
            stack.push((next, i + 1));
        }
    }
    out
}

/// Pullback along the map whose i-th component is images[i] (fields on the
/// target chart): coefficients compose, dx_i maps to d(images[i]).
pub fn pullback(form: &DifferentialForm, images: &[ScalarField]) -> DifferentialForm {
    assert_eq!(images.len(), form.coords);
    let target = images[0].coords;
    let mut out = DifferentialForm::zero(target, form.vars, form.trunc, form.degree);
    for (idx, c) in &form.terms {
        let mut w = DifferentialForm::function(c.compose(images));
        for &i in idx {
            w = w.wedge(&exterior_d(&DifferentialForm::function(images[i as usize].clone())));
        }
        out = out.add(&w);
    }
    out
}

/// Coordinate chart for the torus formulas: x_1..x_g then t_1..t_g.
/// Builds vol = volconst dx_1^...^dx_g and the transported vector field
/// with x-components t_i^2 rho_i.
fn torus_chart(
    g: usize,
    rho: &[f64],
    volconst: f64,
    vars: usize,
    trunc: u32,
) -> (DifferentialForm, VectorField, Vec<ScalarField>) {
    let coords = 2 * g;
    let mut vol = DifferentialForm::zero(coords, vars, trunc, g);
    let volidx: Vec<u8> = (0..g as u8).collect();
    vol.add_term(&volidx, ScalarField::scalar(coords, vars, trunc, Complex64::new(volconst, 0.0)));
    let zero = ScalarField::scalar(coords, vars, trunc, ZERO_C);
    let mut qt = Vec::new();
    let mut comps = Vec::new();
    for i in 0..g {
        let ti = ScalarField::coordinate(coords, g + i, vars, trunc);
        let q = ti.mul(&ti).scale(Complex64::new(rho[i], 0.0));
        qt.push(q.clone());
        comps.push(q);
    }
    for _ in 0..g {
        comps.push(zero.clone());
    }
    (vol, VectorField::new(comps), qt)
}

/// iota_rho (d iota_rho)^m vol on the (x, t) chart.
pub fn transported_volume_chain(
    g: usize,
    rho: &[f64],
    volconst: f64,
    m: usize,
) -> DifferentialForm {
    let (vol, x, _) = torus_chart(g, rho, volconst, g, 0);
    let mut form = contract(&vol, &x).expect("vol has positive degree");
    for _ in 0..m {
        form = contract(&exterior_d(&form), &x).expect("degree g after d");
    }
    form
}

/// Residual of iota_rho (d iota_rho)^{g-1} vol = (g-1)! q_t(rho)^* iota_E vol
/// after pulling back to the t-coordinates, evaluated at the sample point
/// (x arbitrary, t as given).
pub fn euler_identity_check(g: usize, rho: &[f64], t: &[f64], volconst: f64) -> f64 {
    let coords = 2 * g;
    let (vol, _, qt) = torus_chart(g, rho, volconst, g, 0);
    let lhs = transported_volume_chain(g, rho, volconst, g - 1);
    // e^*: only the pure-dt part survives
    let lhs_dt = lhs.restrict_indices(g as u8, coords as u8);

    let mut euler_comps = Vec::new();
    for i in 0..g {
        euler_comps.push(ScalarField::coordinate(coords, i, g, 0));
    }
    for _ in 0..g {
        euler_comps.push(ScalarField::scalar(coords, g, 0, ZERO_C));
    }
    let euler = VectorField::new(euler_comps);
    let iev = contract(&vol, &euler).expect("vol has positive degree");
    // pullback along (x, t) -> (q_t(rho), t)
    let mut images = qt;
    for i in 0..g {
        images.push(ScalarField::coordinate(coords, g + i, g, 0));
    }
    let mut fact = 1.0;
    for j in 1..g {
        fact *= j as f64;
    }
    let rhs = pullback(&iev, &images).scale(Complex64::new(fact, 0.0));

    let mut p = vec![0.3; coords];
    p[..g].copy_from_slice(&rho[..g.min(rho.len())]);
    for i in 0..g {
        p[i] = 0.37 + 0.11 * i as f64; // x-slot values; both sides are x-free
        p[g + i] = t[i];
    }
    lhs_dt.eval(&p).difference_norm(&rhs.eval(&p))
}

/// Pure-dt part of iota_rho (d iota_rho)^m vol for m < g-1; vanishes
/// identically after pulling back along the unit section.
pub fn euler_pullback_vanishing(g: usize, rho: &[f64], t: &[f64], volconst: f64, m: usize) -> f64 {
    assert!(m + 1 < g);
    let coords = 2 * g;
    let chain = transported_volume_chain(g, rho, volconst, m);
    let dt_part = chain.restrict_indices(g as u8, coords as u8);
    let mut p = vec![0.0; coords];
    for i in 0..g {
        p[i] = 0.21 + 0.13 * i as f64;
        p[g + i] = t[i];
    }
    dt_part.eval(&p).max_abs()
}
