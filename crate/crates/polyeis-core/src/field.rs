//! Exact arithmetic in totally real fields of degree 1 and 2.
//!
//! A degree-2 field is presented by a monic integer polynomial
//! `y^2 - t*y - s`; the generator `w` satisfies `w^2 = s + t*w` and the
//! ring of integers is assumed to be `Z[w]` (true for the shipped
//! configurations; a config with a non-maximal order would silently compute
//! with that order). Elements are exact rational vectors over the basis
//! `(1, w)`. Real embeddings are ordered by ascending root, so
//! `tau_1(w) = (t - sqrt(disc))/2`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Element of the field, coordinates over the basis `(1, w)`.
/// For degree-1 fields the second coordinate is identically zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub c0: Rat,
    pub c1: Rat,
}

impl FieldElement {
    pub fn new(c0: Rat, c1: Rat) -> Self {
        FieldElement { c0, c1 }
    }

    pub fn from_int(n: i64) -> Self {
        FieldElement { c0: rat_i(n), c1: Rat::zero() }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }

    /// Least common denominator of the two coordinates.
    pub fn denominator(&self) -> BigInt {
        self.c0.denom().lcm(self.c1.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    NotTotallyReal,
    NotAField,
    UnsupportedDegree,
    DivisionByZero,
    InvalidIdeal,
    NoUnitFound,
}

/// A totally real field of degree 1 or 2 with its embedding data and unit
/// generators, immutable after construction.
#[derive(Clone, Debug)]
pub struct TotallyRealField {
    pub name: String,
    g: usize,
    /// `w^2 = s + t*w`; zero for degree 1.
    s: i64,
    t: i64,
    disc: i64,
    prec_digits: u32,
    /// sqrt(disc) to `prec_digits` decimal digits (degree 2 only).
    sqrt_disc: Rat,
    sqrt_disc_f64: f64,
    fund_unit: FieldElement,
    tot_pos_unit: FieldElement,
}

impl TotallyRealField {
    /// The rational field, degree 1.
    pub fn rational() -> Self {
        TotallyRealField {
            name: String::from("Q"),
            g: 1,
            s: 0,
            t: 0,
            disc: 1,
            prec_digits: 50,
            sqrt_disc: Rat::one(),
            sqrt_disc_f64: 1.0,
            fund_unit: FieldElement::from_int(-1),
            tot_pos_unit: FieldElement::one(),
        }
    }

    /// Real quadratic field from the monic polynomial `y^2 + c1*y + c0`.
    pub fn from_poly(name: &str, c0: i64, c1: i64, prec_digits: u32) -> Result<Self, FieldError> {
        let s = -c0;
        let t = -c1;
        let disc = t * t + 4 * s;
        if disc <= 0 {
            return Err(FieldError::NotTotallyReal);
        }
        let r = (disc as f64).sqrt() as i64;
        for c in [r - 1, r, r + 1] {
            if c >= 0 && c * c == disc {
                return Err(FieldError::NotAField);
            }
        }
        let sqrt_disc = rational_sqrt(disc, prec_digits);
        let mut f = TotallyRealField {
            name: String::from(name),
            g: 2,
            s,
            t,
            disc,
            prec_digits,
            sqrt_disc_f64: sqrt_disc.to_f64().unwrap(),
            sqrt_disc,
            fund_unit: FieldElement::one(),
            tot_pos_unit: FieldElement::one(),
        };
        let u = f.search_fundamental_unit()?;
        f.tot_pos_unit = f.make_totally_positive(&u);
        f.fund_unit = u;
        Ok(f)
    }

    /// Q(sqrt 2): w = sqrt 2, disc 8.
    pub fn qsqrt2() -> Self {
        Self::from_poly("Q(sqrt2)", -2, 0, 50).unwrap()
    }

    /// Q(sqrt 5): w = (1+sqrt5)/2, disc 5.
    pub fn qsqrt5() -> Self {
        Self::from_poly("Q(sqrt5)", -1, -1, 50).unwrap()
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "Q" | "q" | "rational" => Some(Self::rational()),
            "Q(sqrt2)" | "qsqrt2" | "sqrt2" => Some(Self::qsqrt2()),
            "Q(sqrt5)" | "qsqrt5" | "sqrt5" => Some(Self::qsqrt5()),
            _ => None,
        }
    }

    pub fn degree(&self) -> usize {
        self.g
    }

    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    pub fn precision_digits(&self) -> u32 {
        self.prec_digits
    }

    /// Coefficients (s, t) of `w^2 = s + t*w`.
    pub fn generator_relation(&self) -> (i64, i64) {
        (self.s, self.t)
    }

    pub fn el(&self, c0: Rat, c1: Rat) -> FieldElement {
        if self.g == 1 {
            assert!(c1.is_zero(), "degree-1 field has no second coordinate");
        }
        FieldElement::new(c0, c1)
    }

    pub fn gen(&self) -> FieldElement {
        assert_eq!(self.g, 2);
        FieldElement::new(Rat::zero(), Rat::one())
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement::new(&a.c0 + &b.c0, &a.c1 + &b.c1)
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement::new(&a.c0 - &b.c0, &a.c1 - &b.c1)
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement::new(-a.c0.clone(), -a.c1.clone())
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        // (a0 + a1 w)(b0 + b1 w) = a0 b0 + s a1 b1 + (a0 b1 + a1 b0 + t a1 b1) w
        let s = rat_i(self.s);
        let t = rat_i(self.t);
        let cross = &a.c1 * &b.c1;
        FieldElement::new(
            &a.c0 * &b.c0 + &s * &cross,
            &a.c0 * &b.c1 + &a.c1 * &b.c0 + &t * &cross,
        )
    }

    pub fn scale(&self, a: &FieldElement, r: &Rat) -> FieldElement {
        FieldElement::new(&a.c0 * r, &a.c1 * r)
    }

    /// Galois conjugate; identity in degree 1.
    pub fn conj(&self, a: &FieldElement) -> FieldElement {
        if self.g == 1 {
            return a.clone();
        }
        // conj(w) = t - w
        FieldElement::new(&a.c0 + rat_i(self.t) * &a.c1, -a.c1.clone())
    }

    pub fn norm(&self, a: &FieldElement) -> Rat {
        if self.g == 1 {
            return a.c0.clone();
        }
        &a.c0 * &a.c0 + rat_i(self.t) * &a.c0 * &a.c1 - rat_i(self.s) * &a.c1 * &a.c1
    }

    pub fn trace(&self, a: &FieldElement) -> Rat {
        if self.g == 1 {
            return a.c0.clone();
        }
        rat_i(2) * &a.c0 + rat_i(self.t) * &a.c1
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        let n = self.norm(a);
        if n.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.g == 1 {
            return Ok(FieldElement::new(a.c0.recip(), Rat::zero()));
        }
        // degree 2: a * conj(a) = N(a)
        let c = self.conj(a);
        Ok(self.scale(&c, &n.recip()))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, n: i64) -> FieldElement {
        if n < 0 {
            return self.pow(&self.inv(a).expect("negative power of zero"), -n);
        }
        let mut acc = FieldElement::one();
        let mut base = a.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// Real embeddings in ascending-root order, f64 precision.
    pub fn embed_f64(&self, a: &FieldElement) -> Vec<f64> {
        let c0 = self.rat_f64(&a.c0);
        if self.g == 1 {
            return vec![c0];
        }
        let c1 = self.rat_f64(&a.c1);
        let w1 = (self.t as f64 - self.sqrt_disc_f64) / 2.0;
        let w2 = (self.t as f64 + self.sqrt_disc_f64) / 2.0;
        vec![c0 + c1 * w1, c0 + c1 * w2]
    }

    /// Real embeddings as rationals accurate to the configured precision.
    pub fn embed_prec(&self, a: &FieldElement) -> Vec<Rat> {
        if self.g == 1 {
            return vec![a.c0.clone()];
        }
        let half = rat(1, 2);
        let t = rat_i(self.t);
        let w1 = (&t - &self.sqrt_disc) * &half;
        let w2 = (&t + &self.sqrt_disc) * &half;
        vec![&a.c0 + &a.c1 * w1, &a.c0 + &a.c1 * w2]
    }

    fn rat_f64(&self, r: &Rat) -> f64 {
        r.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact signs of the embeddings: sign(a + b*w_i) without rounding.
    pub fn embed_signs(&self, a: &FieldElement) -> Vec<i8> {
        if self.g == 1 {
            return vec![rat_sign(&a.c0)];
        }
        // a + b (t -+ sqrt(disc))/2 = [u -+ b sqrt(disc)]/2 with u = 2a + bt
        let u = rat_i(2) * &a.c0 + rat_i(self.t) * &a.c1;
        let b = &a.c1;
        vec![
            sign_u_plus_v_sqrt(&u, &-b.clone(), self.disc),
            sign_u_plus_v_sqrt(&u, b, self.disc),
        ]
    }

    pub fn is_totally_positive(&self, a: &FieldElement) -> bool {
        self.embed_signs(a).iter().all(|&s| s > 0)
    }

    /// Fundamental unit of Z[w] (degree 2), smallest > 1 in the upper
    /// embedding; brute-force Pell search.
    fn search_fundamental_unit(&self) -> Result<FieldElement, FieldError> {
        for b in 1i64..200_000 {
            // all unit candidates at this second coordinate; keep the
            // smallest one exceeding 1 in the upper embedding
            let mut best: Option<(f64, FieldElement)> = None;
            for pm in [1i64, -1] {
                // a^2 + t a b - s b^2 = pm  =>  a = (-tb +- sqrt(t^2 b^2 + 4(s b^2 + pm)))/2
                let rad = self.t * self.t * b * b + 4 * (self.s * b * b + pm);
                if rad < 0 {
                    continue;
                }
                let r = isqrt(rad);
                if r * r != rad {
                    continue;
                }
                for sgn in [1i64, -1] {
                    let num = -self.t * b + sgn * r;
                    if num % 2 != 0 {
                        continue;
                    }
                    let a = num / 2;
                    let u = FieldElement::new(rat_i(a), rat_i(b));
                    if self.norm(&u).abs() != Rat::one() {
                        continue;
                    }
                    for cand in [u.clone(), self.neg(&u)] {
                        let e = self.embed_f64(&cand)[1];
                        if e > 1.0 && best.as_ref().map_or(true, |(be, _)| e < *be) {
                            best = Some((e, cand));
                        }
                    }
                }
            }
            if let Some((_, u)) = best {
                return Ok(u);
            }
        }
        Err(FieldError::NoUnitFound)
    }

    fn make_totally_positive(&self, u: &FieldElement) -> FieldElement {
        if self.is_totally_positive(u) {
            return u.clone();
        }
        let u2 = self.mul(u, u);
        if self.is_totally_positive(&u2) {
            return u2;
        }
        let nu = self.neg(u);
        assert!(self.is_totally_positive(&nu));
        nu
    }

    /// Fundamental unit (possibly of norm -1).
    pub fn fundamental_unit(&self) -> FieldElement {
        self.fund_unit.clone()
    }

    /// Generator of the totally positive units.
    pub fn totally_positive_unit(&self) -> FieldElement {
        self.tot_pos_unit.clone()
    }

    /// Generators of the full unit group O^*.
    pub fn unit_generators(&self) -> Vec<FieldElement> {
        if self.g == 1 {
            vec![FieldElement::from_int(-1)]
        } else {
            vec![FieldElement::from_int(-1), self.fund_unit.clone()]
        }
    }

    /// Ray units: totally positive units congruent to 1 mod n.
    pub fn ray_units(&self, n: u64) -> RayUnitGroup {
        if self.g == 1 {
            return RayUnitGroup { level: n, generators: vec![], power: 1 };
        }
        let eps = self.tot_pos_unit.clone();
        let mut p = eps.clone();
        let mut m = 1u64;
        loop {
            if congruent_one_mod(self, &p, n) {
                break;
            }
            p = self.mul(&p, &eps);
            m += 1;
            assert!(m < 10_000, "ray-unit order search runaway");
        }
        RayUnitGroup { level: n, generators: vec![p], power: m }
    }

    /// The different ideal; for quadratic Z[w] it is (f'(w)) = (2w - t).
    pub fn different(&self) -> FractionalIdeal {
        if self.g == 1 {
            return FractionalIdeal::principal_rational(self, Rat::one());
        }
        let d = FieldElement::new(rat_i(-self.t), rat_i(2));
        FractionalIdeal::principal(self, &d)
    }

    /// The ring of integers as a lattice.
    pub fn maximal_order(&self) -> FractionalIdeal {
        if self.g == 1 {
            return FractionalIdeal::principal_rational(self, Rat::one());
        }
        FractionalIdeal::from_basis(self, &[FieldElement::one(), self.gen()]).unwrap()
    }
}

/// sign(u + v*sqrt(D)) for rationals u, v and a positive nonsquare D.
fn sign_u_plus_v_sqrt(u: &Rat, v: &Rat, d: i64) -> i8 {
    let su = rat_sign(u);
    let sv = rat_sign(v);
    if sv == 0 {
        return su;
    }
    if su == sv || su == 0 {
        return sv;
    }
    // opposite signs: compare u^2 vs v^2 D
    let lhs = u * u;
    let rhs = v * v * rat_i(d);
    match lhs.cmp(&rhs) {
        Ordering::Greater => su,
        Ordering::Less => sv,
        Ordering::Equal => 0,
    }
}

fn rat_sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn congruent_one_mod(_f: &TotallyRealField, u: &FieldElement, n: u64) -> bool {
    let n = BigInt::from(n);
    let a = &u.c0 - Rat::one();
    let b = &u.c1;
    a.denom().is_one()
        && b.denom().is_one()
        && (a.numer() % &n).is_zero()
        && (b.numer() % &n).is_zero()
}

/// Newton iteration for sqrt(d) as a rational with `digits` correct decimals.
fn rational_sqrt(d: i64, digits: u32) -> Rat {
    let target: Rat = Rat::new(BigInt::one(), BigInt::from(10u32).pow(digits + 2));
    let d = rat_i(d);
    let mut x = Rat::from_float((d.to_f64().unwrap()).sqrt()).unwrap();
    loop {
        let next = (&x + &d / &x) * rat(1, 2);
        let delta = (&next - &x).abs();
        x = next;
        if delta < target {
            break;
        }
    }
    // trim the representation so later arithmetic stays cheap
    truncate_rat(&x, digits + 10)
}

fn truncate_rat(x: &Rat, digits: u32) -> Rat {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (x * Rat::from_integer(scale.clone())).floor();
    Rat::new(scaled.to_integer(), scale)
}

/// Sign character on the embeddings: a vector of signs, one per embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignCharacter {
    pub signs: Vec<i8>,
}

impl SignCharacter {
    pub fn trivial(g: usize) -> Self {
        SignCharacter { signs: vec![1; g] }
    }

    pub fn all_signs(g: usize) -> Self {
        SignCharacter { signs: vec![-1; g] }
    }

    /// The parity-matching character for weight k: trivial for even k,
    /// all-signs for odd k.
    pub fn for_weight(g: usize, k: i64) -> Self {
        if k % 2 == 0 {
            Self::trivial(g)
        } else {
            Self::all_signs(g)
        }
    }

    /// Number of nontrivial sign factors.
    pub fn weight(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count()
    }

    /// epsilon(x) in {+1, -1}; panics on an embedding that is exactly zero.
    pub fn eval(&self, f: &TotallyRealField, x: &FieldElement) -> i8 {
        let signs = f.embed_signs(x);
        let mut out = 1i8;
        for (chi, s) in self.signs.iter().zip(signs.iter()) {
            assert!(*s != 0, "sign character evaluated at an element with a zero embedding");
            if *chi < 0 && *s < 0 {
                out = -out;
            }
        }
        out
    }
}

/// Totally positive units congruent to 1 mod the level. Rank g-1; for the
/// quadratic fields a single generator eps_+^power.
#[derive(Clone, Debug)]
pub struct RayUnitGroup {
    pub level: u64,
    pub generators: Vec<FieldElement>,
    /// The exponent m with generator = eps_+^m (1 for the trivial level).
    pub power: u64,
}

impl RayUnitGroup {
    /// Log-embedding row per generator.
    pub fn log_embedding(&self, f: &TotallyRealField) -> Vec<Vec<f64>> {
        self.generators
            .iter()
            .map(|u| f.embed_f64(u).iter().map(|x| libm::log(libm::fabs(*x))).collect())
            .collect()
    }
}

/// A fractional ideal (rank-g lattice) with exact rational basis rows kept
/// in a lower-triangular Hermite-style normal form, unique per lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalIdeal {
    /// Basis elements; for g=2 the normal form is rows (a, 0), (b, c) over
    /// (1, w) with a, c > 0, 0 <= b < a... scaled by a common denominator.
    pub basis: Vec<FieldElement>,
    norm: Rat,
}

impl FractionalIdeal {
    pub fn principal_rational(_f: &TotallyRealField, q: Rat) -> Self {
        let n = q.abs();
        FractionalIdeal {
            basis: vec![FieldElement::new(n.clone(), Rat::zero())],
            norm: n,
        }
    }

    pub fn principal(f: &TotallyRealField, x: &FieldElement) -> Self {
        if f.degree() == 1 {
            return Self::principal_rational(f, x.c0.clone());
        }
        Self::from_basis(f, &[x.clone(), f.mul(x, &f.gen())]).unwrap()
    }

    /// Lattice spanned by the given elements (any number >= g).
    pub fn from_basis(f: &TotallyRealField, gens: &[FieldElement]) -> Result<Self, FieldError> {
        if f.degree() == 1 {
            let mut d = BigInt::one();
            for g in gens {
                d = d.lcm(g.c0.denom());
            }
            let mut acc = BigInt::zero();
            for g in gens {
                let n = (&g.c0 * Rat::from_integer(d.clone())).to_integer();
                acc = acc.gcd(&n);
            }
            if acc.is_zero() {
                return Err(FieldError::InvalidIdeal);
            }
            return Ok(Self::principal_rational(f, Rat::new(acc, d)));
        }
        // common denominator, integer 2-column HNF
        let mut den = BigInt::one();
        for g in gens {
            den = den.lcm(&g.denominator());
        }
        let denr = Rat::from_integer(den.clone());
        let mut rows: Vec<(BigInt, BigInt)> = gens
            .iter()
            .map(|g| ((&g.c0 * &denr).to_integer(), (&g.c1 * &denr).to_integer()))
            .collect();
        hnf_2col(&mut rows);
        if rows.len() < 2 {
            return Err(FieldError::InvalidIdeal);
        }
        let b0 = FieldElement::new(Rat::new(rows[0].0.clone(), den.clone()), Rat::zero());
        let b1 = FieldElement::new(
            Rat::new(rows[1].0.clone(), den.clone()),
            Rat::new(rows[1].1.clone(), den.clone()),
        );
        // covolume relative to O = Z[w]: |det| of coordinate matrix
        let norm = (&b0.c0 * &b1.c1).abs();
        Ok(FractionalIdeal { basis: vec![b0, b1], norm })
    }

    /// Ideal norm (covolume relative to the maximal order).
    pub fn norm(&self) -> Rat {
        self.norm.clone()
    }

    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }

    /// Product lattice (correct for products of fractional ideals).
    pub fn mul(&self, f: &TotallyRealField, other: &Self) -> Self {
        let mut gens = Vec::new();
        for a in &self.basis {
            for b in &other.basis {
                gens.push(f.mul(a, b));
            }
        }
        Self::from_basis(f, &gens).expect("product of ideals")
    }

    /// Inverse fractional ideal via the conjugate: a^{-1} = conj(a)/N(a).
    pub fn inverse(&self, f: &TotallyRealField) -> Self {
        if f.degree() == 1 {
            return Self::principal_rational(f, self.norm.recip());
        }
        let ninv = self.norm.recip();
        let gens: Vec<FieldElement> =
            self.basis.iter().map(|b| f.scale(&f.conj(b), &ninv)).collect();
        Self::from_basis(f, &gens).expect("inverse ideal")
    }

    /// Trace-dual lattice: { rho : Tr(rho * a) in Z for all a in self }.
    pub fn trace_dual(&self, f: &TotallyRealField) -> Self {
        if f.degree() == 1 {
            return Self::principal_rational(f, self.norm.recip());
        }
        // Solve Tr(rho_i b_j) = delta_ij: rho_i = sum_k M^{-T}_{ik} w_k^dual
        // where the dual basis of (1, w) under Tr is computed from the Gram
        // matrix G_kl = Tr(w_k w_l).
        let w = f.gen();
        let b = [FieldElement::one(), w];
        let gram = [
            [f.trace(&f.mul(&b[0], &b[0])), f.trace(&f.mul(&b[0], &b[1]))],
            [f.trace(&f.mul(&b[1], &b[0])), f.trace(&f.mul(&b[1], &b[1]))],
        ];
        let det = &gram[0][0] * &gram[1][1] - &gram[0][1] * &gram[1][0];
        let inv = [
            [&gram[1][1] / &det, -&gram[0][1] / &det],
            [-&gram[1][0] / &det, &gram[0][0] / &det],
        ];
        // dual basis d_k of (1,w): d_k = sum_l inv[k][l] w_l
        let dual = [
            f.add(&f.scale(&b[0], &inv[0][0]), &f.scale(&b[1], &inv[0][1])),
            f.add(&f.scale(&b[0], &inv[1][0]), &f.scale(&b[1], &inv[1][1])),
        ];
        // coordinate matrix of self's basis over (1,w); dual lattice basis =
        // (M^{-T}) applied to the dual basis of (1,w)
        let m = [
            [self.basis[0].c0.clone(), self.basis[0].c1.clone()],
            [self.basis[1].c0.clone(), self.basis[1].c1.clone()],
        ];
        let dm = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        let minv_t = [
            [&m[1][1] / &dm, -&m[1][0] / &dm],
            [-&m[0][1] / &dm, &m[0][0] / &dm],
        ];
        let gens = [
            f.add(&f.scale(&dual[0], &minv_t[0][0]), &f.scale(&dual[1], &minv_t[0][1])),
            f.add(&f.scale(&dual[0], &minv_t[1][0]), &f.scale(&dual[1], &minv_t[1][1])),
        ];
        Self::from_basis(f, &gens).expect("trace dual")
    }

    /// Coordinates of x over the lattice basis (rational, not necessarily
    /// integral).
    pub fn coordinates(&self, f: &TotallyRealField, x: &FieldElement) -> Vec<Rat> {
        if f.degree() == 1 {
            return vec![&x.c0 / &self.basis[0].c0];
        }
        let b0 = &self.basis[0];
        let b1 = &self.basis[1];
        let det = &b0.c0 * &b1.c1 - &b1.c0 * &b0.c1;
        let n0 = (&x.c0 * &b1.c1 - &b1.c0 * &x.c1) / &det;
        let n1 = (&b0.c0 * &x.c1 - &x.c0 * &b0.c1) / &det;
        vec![n0, n1]
    }

    /// Does the lattice contain x?
    pub fn contains(&self, f: &TotallyRealField, x: &FieldElement) -> bool {
        self.coordinates(f, x).iter().all(|c| c.is_integer())
    }

    /// Canonical representative of x modulo the lattice: coordinates reduced
    /// into [0, 1).
    pub fn reduce_mod(&self, f: &TotallyRealField, x: &FieldElement) -> FieldElement {
        let co = self.coordinates(f, x);
        let mut out = FieldElement::zero();
        for (c, b) in co.iter().zip(self.basis.iter()) {
            let frac = c - c.floor();
            out = f.add(&out, &f.scale(b, &frac));
        }
        out
    }

    /// Scale the lattice by a nonzero field element.
    pub fn scale_by(&self, f: &TotallyRealField, x: &FieldElement) -> Self {
        let gens: Vec<FieldElement> = self.basis.iter().map(|b| f.mul(b, x)).collect();
        Self::from_basis(f, &gens).expect("scaled lattice")
    }
}

/// In-place 2-column integer HNF (row-style, lower triangular);
/// rows spanning the same lattice produce identical output.
fn hnf_2col(rows: &mut Vec<(BigInt, BigInt)>) {
    rows.retain(|r| !(r.0.is_zero() && r.1.is_zero()));
    // eliminate the second column down to one pivot via gcd steps
    loop {
        let mut idx: Vec<usize> =
            (0..rows.len()).filter(|&i| !rows[i].1.is_zero()).collect();
        if idx.len() <= 1 {
            break;
        }
        idx.sort_by_key(|&i| rows[i].1.abs());
        let (pi, qi) = (idx[0], idx[1]);
        let q = (&rows[qi].1 / &rows[pi].1).clone();
        let (p0, p1) = rows[pi].clone();
        rows[qi].0 -= &q * &p0;
        rows[qi].1 -= &q * &p1;
    }
    let pivot2 = (0..rows.len()).find(|&i| !rows[i].1.is_zero());
    // gcd of the remaining first-column entries
    let mut g = BigInt::zero();
    for (i, r) in rows.iter().enumerate() {
        if Some(i) != pivot2 {
            g = g.gcd(&r.0);
        }
    }
    let mut out: Vec<(BigInt, BigInt)> = Vec::new();
    if !g.is_zero() {
        out.push((g.clone(), BigInt::zero()));
    }
    if let Some(i) = pivot2 {
        let mut a = rows[i].0.clone();
        let mut b = rows[i].1.clone();
        if b.sign() == Sign::Minus {
            a = -a;
            b = -b;
        }
        if !g.is_zero() {
            a = a.mod_floor(&g);
        }
        out.push((a, b));
    }
    *rows = out;
}

/// Normalize a nonzero element into the half-open unit-flow fundamental
/// domain [1, gen) measured by |y1/y2|: the representative r of the orbit
/// r * gen^Z with |y1(r)| >= |y2(r)| and |y1(r gen)| < |y2(r gen)|.
/// The comparisons are exact: |y1| >= |y2| iff the w-coordinate of r^2 is
/// <= 0 (the embedding difference is -sqrt(disc) times that coordinate).
pub fn unit_flow_normalize(
    f: &TotallyRealField,
    gen: &FieldElement,
    x: &FieldElement,
) -> FieldElement {
    let e = f.embed_f64(x);
    let loggen = libm::log(f.embed_f64(gen)[1]);
    let tpar = libm::log((e[0] / e[1]).abs()) / (2.0 * loggen);
    let mut r = f.mul(x, &f.pow(gen, tpar.floor() as i64));
    let geninv = f.inv(gen).expect("unit inverse");
    // exact adjustment of the float seed
    while f.mul(&r, &r).c1.is_positive() {
        r = f.mul(&r, &geninv);
    }
    loop {
        let up = f.mul(&r, gen);
        if f.mul(&up, &up).c1.is_positive() {
            break;
        }
        r = up;
    }
    r
}

/// One representative per unit orbit of the nonzero lattice points with
/// |N| <= bound. Representatives are normalized into the half-open unit-log
/// fundamental domain; deterministic order (sorted by coordinates).
pub fn enumerate_orbit_reps(
    f: &TotallyRealField,
    lattice: &FractionalIdeal,
    units: &RayUnitGroup,
    bound: f64,
) -> Vec<FieldElement> {
    if f.degree() == 1 {
        let step = lattice.basis[0].c0.clone();
        let sf = step.to_f64().unwrap();
        let mut out = Vec::new();
        let mut m = 1i64;
        while (m as f64) * sf <= bound + 1e-12 {
            let v = Rat::from_integer(BigInt::from(m)) * &step;
            out.push(FieldElement::new(v.clone(), Rat::zero()));
            out.push(FieldElement::new(-v, Rat::zero()));
            m += 1;
        }
        out.sort_by(|a, b| a.c0.cmp(&b.c0));
        return out;
    }
    let gen = &units.generators[0];
    let ge = f.embed_f64(gen);
    let loggen = libm::log(ge[1]); // > 0 by construction
    let b0 = f.embed_f64(&lattice.basis[0]);
    let b1 = f.embed_f64(&lattice.basis[1]);
    // enumerate the sliver |log|y1/y2|| <= loggen + margin, |N| <= bound,
    // then normalize each point by a unit power into t in [0,1).
    let ymax = libm::sqrt(bound * libm::exp(loggen)) * 1.001;
    let det = b0[0] * b1[1] - b1[0] * b0[1];
    let mut out: Vec<FieldElement> = Vec::new();
    let mut seen: alloc::collections::BTreeSet<(String, String)> = Default::default();
    // scan over the coefficient box implied by |y_i| <= ymax
    let corners = [
        (ymax, ymax),
        (ymax, -ymax),
        (-ymax, ymax),
        (-ymax, -ymax),
    ];
    let mut n1lo = f64::INFINITY;
    let mut n1hi = f64::NEG_INFINITY;
    let mut n2lo = f64::INFINITY;
    let mut n2hi = f64::NEG_INFINITY;
    for (y1, y2) in corners {
        let n1 = (y1 * b1[1] - b1[0] * y2) / det;
        let n2 = (b0[0] * y2 - y1 * b0[1]) / det;
        n1lo = n1lo.min(n1);
        n1hi = n1hi.max(n1);
        n2lo = n2lo.min(n2);
        n2hi = n2hi.max(n2);
    }
    let bigbound = Rat::from_float(bound).unwrap();
    for n1 in (n1lo.floor() as i64 - 1)..=(n1hi.ceil() as i64 + 1) {
        for n2 in (n2lo.floor() as i64 - 1)..=(n2hi.ceil() as i64 + 1) {
            if n1 == 0 && n2 == 0 {
                continue;
            }
            let y1 = n1 as f64 * b0[0] + n2 as f64 * b1[0];
            let y2 = n1 as f64 * b0[1] + n2 as f64 * b1[1];
            let nn = (y1 * y2).abs();
            if nn > bound * (1.0 + 1e-9) || nn == 0.0 {
                continue;
            }
            let lam = f.add(
                &f.scale(&lattice.basis[0], &rat_i(n1)),
                &f.scale(&lattice.basis[1], &rat_i(n2)),
            );
            let rep = unit_flow_normalize(f, gen, &lam);
            // exact norm check (the f64 prefilter can over/under-shoot)
            let nexact = f.norm(&rep).abs();
            if nexact > bigbound {
                continue;
            }
            let key = (format_rat(&rep.c0), format_rat(&rep.c1));
            if seen.insert(key) {
                out.push(rep);
            }
        }
    }
    out.sort_by(|a, b| a.c0.cmp(&b.c0).then(a.c1.cmp(&b.c1)));
    out
}

fn format_rat(r: &Rat) -> String {
    use alloc::string::ToString;
    r.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_ascending_and_exact() {
        let f = TotallyRealField::qsqrt2();
        let w = f.gen();
        let e = f.embed_f64(&w);
        assert!((e[0] + core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((e[1] - core::f64::consts::SQRT_2).abs() < 1e-12);
        let one = FieldElement::one();
        assert_eq!(f.embed_f64(&one), vec![1.0, 1.0]);

        let f5 = TotallyRealField::qsqrt5();
        let phi = f5.gen();
        let e = f5.embed_f64(&phi);
        // roots of y^2 - y - 1
        assert!((e[0] - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((e[1] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_precision_tracks_discriminant() {
        for f in [TotallyRealField::qsqrt2(), TotallyRealField::qsqrt5()] {
            let b = [FieldElement::one(), f.gen()];
            let e0 = f.embed_prec(&b[0]);
            let e1 = f.embed_prec(&b[1]);
            let det = &e0[0] * &e1[1] - &e1[0] * &e0[1];
            let d2 = &det * &det - rat_i(f.discriminant());
            let tol = Rat::new(BigInt::one(), BigInt::from(10u32).pow(45));
            assert!(d2.abs() < tol, "det^2 far from disc: {:?}", d2.to_f64());
        }
    }

    #[test]
    fn norm_trace_values() {
        let f = TotallyRealField::qsqrt2();
        let x = f.add(&FieldElement::one(), &f.gen()); // 1 + sqrt2
        assert_eq!(f.norm(&x), rat_i(-1));
        assert_eq!(f.trace(&x), rat_i(2));

        let f5 = TotallyRealField::qsqrt5();
        // (3+sqrt5)/2 = 1 + phi
        let x = f5.add(&FieldElement::one(), &f5.gen());
        assert_eq!(f5.norm(&x), rat_i(1));
        assert_eq!(f5.trace(&x), rat_i(3));
    }

    #[test]
    fn norm_multiplicative_battery() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for f in [TotallyRealField::qsqrt2(), TotallyRealField::qsqrt5()] {
            for _ in 0..200 {
                let a = f.el(rat_i(rng.gen_range(-9..9)), rat_i(rng.gen_range(-9..9)));
                let b = f.el(rat_i(rng.gen_range(-9..9)), rat_i(rng.gen_range(-9..9)));
                assert_eq!(f.norm(&f.mul(&a, &b)), f.norm(&a) * f.norm(&b));
                let tr = f.trace(&f.add(&a, &b));
                assert_eq!(tr, f.trace(&a) + f.trace(&b));
            }
        }
    }

    #[test]
    fn embeddings_multiplicative() {
        let f = TotallyRealField::qsqrt5();
        let a = f.el(rat_i(3), rat_i(-2));
        let b = f.el(rat(1, 2), rat_i(5));
        let ab = f.mul(&a, &b);
        let (ea, eb, eab) = (f.embed_f64(&a), f.embed_f64(&b), f.embed_f64(&ab));
        for i in 0..2 {
            assert!((ea[i] * eb[i] - eab[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_embedding_signs() {
        let f = TotallyRealField::qsqrt2();
        // 1 + sqrt2: signs (-,+) at (1-1.41, 1+1.41)? No: 1-1.41<0 -> (-1, 1)
        let x = f.add(&FieldElement::one(), &f.gen());
        assert_eq!(f.embed_signs(&x), vec![-1, 1]);
        // 3 + 2 sqrt2 totally positive
        let u = f.el(rat_i(3), rat_i(2));
        assert!(f.is_totally_positive(&u));
        // borderline exactness: 7 - 5 sqrt2 ~ 7 - 7.071 < 0 in both? embeds
        // to 7+5*1.414=14.07 and 7-7.07=-0.07: signs (+, -) in ascending
        // order embed1 = 7 - 5*(-1.41) no... w embeds to (-s2, s2):
        // 7 + 5w -> (7 - 7.07, 7 + 7.07) = (-, +)
        let y = f.el(rat_i(7), rat_i(5));
        assert_eq!(f.embed_signs(&y), vec![-1, 1]);
    }

    #[test]
    fn fundamental_units() {
        let f = TotallyRealField::qsqrt2();
        assert_eq!(f.fundamental_unit(), f.el(rat_i(1), rat_i(1))); // 1 + sqrt2
        assert_eq!(f.totally_positive_unit(), f.el(rat_i(3), rat_i(2)));
        let f5 = TotallyRealField::qsqrt5();
        assert_eq!(f5.fundamental_unit(), f5.el(rat_i(0), rat_i(1))); // phi
        assert_eq!(f5.totally_positive_unit(), f5.el(rat_i(1), rat_i(1))); // phi^2
        for f in [f, f5] {
            for u in f.unit_generators() {
                assert_eq!(f.norm(&u).abs(), Rat::one());
            }
        }
    }

    #[test]
    fn ray_unit_levels() {
        let f = TotallyRealField::qsqrt2();
        let r1 = f.ray_units(1);
        assert_eq!(r1.power, 1);
        assert_eq!(r1.generators[0], f.el(rat_i(3), rat_i(2)));
        let r3 = f.ray_units(3);
        assert_eq!(r3.power, 4);
        assert_eq!(r3.generators[0], f.el(rat_i(577), rat_i(408)));
        let r4 = f.ray_units(4);
        assert_eq!(r4.power, 2);
        assert_eq!(r4.generators[0], f.el(rat_i(17), rat_i(12)));

        let f5 = TotallyRealField::qsqrt5();
        let r3 = f5.ray_units(3);
        assert_eq!(r3.power, 4);
        assert_eq!(r3.generators[0], f5.el(rat_i(13), rat_i(21))); // phi^8
        let r4 = f5.ray_units(4);
        assert_eq!(r4.power, 3);
        assert_eq!(r4.generators[0], f5.el(rat_i(5), rat_i(8))); // phi^6

        // rationals: trivial group
        let q = TotallyRealField::rational();
        assert!(q.ray_units(7).generators.is_empty());
    }

    #[test]
    fn different_and_dual() {
        let f = TotallyRealField::qsqrt2();
        let o = f.maximal_order();
        let dual = o.trace_dual(&f);
        // O^dual = D^{-1} = (1/(2 sqrt2)) O
        let dinv = f.different().inverse(&f);
        assert_eq!(dual, dinv);
        assert_eq!(dual.norm(), rat(1, 8));
        // dual pairing integral
        for a in dual.basis() {
            for b in o.basis() {
                assert!(f.trace(&f.mul(a, b)).is_integer());
            }
        }
        // double dual is the identity
        assert_eq!(dual.trace_dual(&f), o);

        let f5 = TotallyRealField::qsqrt5();
        let o5 = f5.maximal_order();
        let dual5 = o5.trace_dual(&f5);
        assert_eq!(dual5.norm(), rat(1, 5));
        assert_eq!(dual5.trace_dual(&f5), o5);

        let q = TotallyRealField::rational();
        let z = q.maximal_order();
        assert_eq!(z.trace_dual(&q), z);
    }

    #[test]
    fn ideal_norm_multiplicative() {
        let f = TotallyRealField::qsqrt2();
        let a = FractionalIdeal::principal(&f, &f.el(rat_i(1), rat_i(2))); // (1+2sqrt2), N=-7
        let b = FractionalIdeal::principal(&f, &f.el(rat_i(3), rat_i(1)));
        assert_eq!(a.norm(), rat_i(7));
        let ab = a.mul(&f, &b);
        assert_eq!(ab.norm(), a.norm() * b.norm());
        let ainv = a.inverse(&f);
        let prod = a.mul(&f, &ainv);
        assert_eq!(prod, f.maximal_order());
    }

    #[test]
    fn hnf_independent_of_generators() {
        let f = TotallyRealField::qsqrt5();
        let x = f.el(rat_i(2), rat_i(1));
        let a = FractionalIdeal::principal(&f, &x);
        // same ideal from redundant generators
        let gens = [
            f.mul(&x, &f.el(rat_i(1), rat_i(0))),
            f.mul(&x, &f.el(rat_i(0), rat_i(1))),
            f.mul(&x, &f.el(rat_i(3), rat_i(-2))),
        ];
        let b = FractionalIdeal::from_basis(&f, &gens).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orbit_reps_rational() {
        let q = TotallyRealField::rational();
        let z = q.maximal_order();
        let reps = enumerate_orbit_reps(&q, &z, &q.ray_units(1), 3.0);
        let values: Vec<i64> =
            reps.iter().map(|r| r.c0.to_integer().to_i64().unwrap()).collect();
        assert_eq!(values, vec![-3, -2, -1, 1, 2, 3]);
    }

    #[test]
    fn orbit_reps_soundness_qsqrt2() {
        let f = TotallyRealField::qsqrt2();
        let o = f.maximal_order();
        let units = f.ray_units(1);
        let reps = enumerate_orbit_reps(&f, &o, &units, 50.0);
        // uniqueness: u * rep is never in the list
        let u = &units.generators[0];
        use alloc::collections::BTreeSet;
        let keyset: BTreeSet<(String, String)> =
            reps.iter().map(|r| (format_rat(&r.c0), format_rat(&r.c1))).collect();
        for r in &reps {
            let ur = f.mul(u, r);
            assert_eq!(f.norm(&ur).abs(), f.norm(r).abs());
            assert!(!keyset.contains(&(format_rat(&ur.c0), format_rat(&ur.c1))));
            assert!(f.norm(r).abs() <= rat_i(50));
        }
        // brute-force box count of orbits: dedupe all |N|<=50 points by
        // normalizing the unit flow coordinate
        let mut brute: BTreeSet<(String, String)> = BTreeSet::new();
        for n1 in -60i64..=60 {
            for n2 in -60i64..=60 {
                if (n1, n2) == (0, 0) {
                    continue;
                }
                let x = f.el(rat_i(n1), rat_i(n2));
                let nn = f.norm(&x).abs();
                if nn > rat_i(50) || nn.is_zero() {
                    continue;
                }
                let rep = unit_flow_normalize(&f, u, &x);
                brute.insert((format_rat(&rep.c0), format_rat(&rep.c1)));
            }
        }
        // every brute rep must appear among ours
        for k in &brute {
            assert!(keyset.contains(k), "missing orbit rep {:?}", k);
        }
    }

    #[test]
    fn orbit_reps_empty_below_min_norm() {
        let f = TotallyRealField::qsqrt5();
        let o = f.maximal_order();
        let reps = enumerate_orbit_reps(&f, &o, &f.ray_units(1), 0.5);
        assert!(reps.is_empty());
    }

    #[test]
    fn lattice_membership() {
        let f = TotallyRealField::qsqrt2();
        let o = f.maximal_order();
        assert!(o.contains(&f, &f.el(rat_i(3), rat_i(-5))));
        assert!(!o.contains(&f, &f.el(rat(1, 2), rat_i(0))));
        let dinv = f.different().inverse(&f);
        assert!(dinv.contains(&f, &f.el(rat_i(0), rat(1, 4)))); // sqrt2/4 = 1/(2 sqrt2)
    }

    #[test]
    fn rejects_bad_polynomials() {
        assert_eq!(
            TotallyRealField::from_poly("x", 2, 0, 30).unwrap_err(),
            FieldError::NotTotallyReal
        );
        assert_eq!(
            TotallyRealField::from_poly("x", -4, 0, 30).unwrap_err(),
            FieldError::NotAField
        );
    }
}
