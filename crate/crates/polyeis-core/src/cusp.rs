//! Level-n combinatorics at the boundary: the determinant-one group over
//! O/n and its Borel orbits (the cusp set), determinant-one lifts and the
//! cusp ideal, torsion projections, and unit coinvariants.
//!
//! The residue ring O/n is represented by coordinate pairs in the (1, w)
//! basis with w^2 = s + t w; for the rational field the second coordinate
//! is identically zero.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, ToPrimitive};

use crate::field::{rat_i, FieldElement, FractionalIdeal, Rat, TotallyRealField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuspError {
    /// Levels below 3 leave nontrivial unit stabilizers.
    LevelTooSmall,
    /// |O/nO| beyond the supported cap.
    ResidueRingTooLarge,
    /// The group would not fit the enumeration budget.
    GroupTooLarge,
    /// Determinant not an invertible rational residue.
    BadDeterminant,
    /// No determinant-one lift found in the search box.
    LiftSearchExhausted,
}

impl core::fmt::Display for CuspError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CuspError::LevelTooSmall => write!(f, "level must be at least 3"),
            CuspError::ResidueRingTooLarge => write!(f, "residue ring exceeds the size cap"),
            CuspError::GroupTooLarge => write!(f, "level group exceeds the enumeration budget"),
            CuspError::BadDeterminant => {
                write!(f, "determinant is not an invertible rational residue")
            }
            CuspError::LiftSearchExhausted => write!(f, "no unimodular lift in the search box"),
        }
    }
}

/// Residue x + y w with 0 <= x, y < n.
pub type Res = (i64, i64);

/// Arithmetic in O/nO through the generator relation.
#[derive(Clone, Copy, Debug)]
pub struct ResidueRing {
    pub n: i64,
    s: i64,
    t: i64,
    g: usize,
}

impl ResidueRing {
    pub fn new(f: &TotallyRealField, n: u32) -> Self {
        let (s, t) = f.generator_relation();
        ResidueRing { n: n as i64, s, t, g: f.degree() }
    }

    pub fn reduce(&self, a: Res) -> Res {
        (a.0.rem_euclid(self.n), a.1.rem_euclid(self.n))
    }

    pub fn add(&self, a: Res, b: Res) -> Res {
        self.reduce((a.0 + b.0, a.1 + b.1))
    }

    pub fn neg(&self, a: Res) -> Res {
        self.reduce((-a.0, -a.1))
    }

    pub fn mul(&self, a: Res, b: Res) -> Res {
        self.reduce((a.0 * b.0 + a.1 * b.1 * self.s, a.0 * b.1 + a.1 * b.0 + a.1 * b.1 * self.t))
    }

    pub fn size(&self) -> u64 {
        if self.g == 1 {
            self.n as u64
        } else {
            (self.n * self.n) as u64
        }
    }

    fn elements(&self) -> Vec<Res> {
        let mut out = Vec::new();
        let yr = if self.g == 1 { 1 } else { self.n };
        for x in 0..self.n {
            for y in 0..yr {
                out.push((x, y));
            }
        }
        out
    }
}

/// 2x2 matrix over O/n with determinant an invertible rational residue;
/// entries row-major a, b, c, d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelGroupElement {
    pub n: u32,
    pub entries: [Res; 4],
}

impl LevelGroupElement {
    pub fn new(f: &TotallyRealField, n: u32, entries: [Res; 4]) -> Result<Self, CuspError> {
        let ring = ResidueRing::new(f, n);
        let entries = entries.map(|e| ring.reduce(e));
        if f.degree() == 1 {
            assert!(entries.iter().all(|e| e.1 == 0), "rational residues have no w part");
        }
        let h = LevelGroupElement { n, entries };
        let det = h.det(&ring);
        if det.1 != 0 || gcd_i64(det.0, n as i64) != 1 {
            return Err(CuspError::BadDeterminant);
        }
        Ok(h)
    }

    pub fn identity(n: u32) -> Self {
        LevelGroupElement { n, entries: [(1, 0), (0, 0), (0, 0), (1, 0)] }
    }

    pub fn det(&self, ring: &ResidueRing) -> Res {
        ring.add(
            ring.mul(self.entries[0], self.entries[3]),
            ring.neg(ring.mul(self.entries[1], self.entries[2])),
        )
    }

    pub fn is_special(&self, ring: &ResidueRing) -> bool {
        self.det(ring) == (1, 0)
    }

    pub fn mul(&self, ring: &ResidueRing, o: &Self) -> Self {
        let a = &self.entries;
        let b = &o.entries;
        LevelGroupElement {
            n: self.n,
            entries: [
                ring.add(ring.mul(a[0], b[0]), ring.mul(a[1], b[2])),
                ring.add(ring.mul(a[0], b[1]), ring.mul(a[1], b[3])),
                ring.add(ring.mul(a[2], b[0]), ring.mul(a[3], b[2])),
                ring.add(ring.mul(a[2], b[1]), ring.mul(a[3], b[3])),
            ],
        }
    }

    /// Adjugate; inverse when the determinant is one.
    pub fn inverse_special(&self, ring: &ResidueRing) -> Self {
        LevelGroupElement {
            n: self.n,
            entries: [
                self.entries[3],
                ring.neg(self.entries[1]),
                ring.neg(self.entries[2]),
                self.entries[0],
            ],
        }
    }

    /// Lexicographic packing of (a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y).
    pub fn key(&self) -> u128 {
        let n = self.n as u128;
        let mut k = 0u128;
        for e in &self.entries {
            k = k * n + e.0 as u128;
            k = k * n + e.1 as u128;
        }
        k
    }

    fn from_key(n: u32, mut k: u128) -> Self {
        let nn = n as u128;
        let mut coords = [0i64; 8];
        for i in (0..8).rev() {
            coords[i] = (k % nn) as i64;
            k /= nn;
        }
        LevelGroupElement {
            n,
            entries: [
                (coords[0], coords[1]),
                (coords[2], coords[3]),
                (coords[4], coords[5]),
                (coords[6], coords[7]),
            ],
        }
    }

    /// Canonical integral lift of the entries, coordinates in [0, n).
    pub fn lift(&self, _f: &TotallyRealField) -> [FieldElement; 4] {
        self.entries.map(|e| FieldElement::new(rat_i(e.0), rat_i(e.1)))
    }
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// One Borel orbit in the determinant-one group: the lexicographically
/// minimal representative and the orbit size.
#[derive(Clone, Debug)]
pub struct Cusp {
    pub rep: LevelGroupElement,
    pub orbit_size: usize,
}

/// The full partition: cusps in representative order plus the membership
/// map element-key -> cusp index.
pub struct CuspPartition {
    pub cusps: Vec<Cusp>,
    pub membership: BTreeMap<u128, usize>,
    pub group_order: usize,
}

const RING_CAP: u64 = 10_000;
const GROUP_BUDGET: u64 = 3_000_000;

/// Enumerate the determinant-one group over O/n by closure under the
/// elementary generators.
fn special_group(f: &TotallyRealField, ring: &ResidueRing, n: u32) -> Vec<u128> {
    let mut gens: Vec<LevelGroupElement> = Vec::new();
    let mut basis = vec![(1i64, 0i64)];
    if f.degree() == 2 {
        basis.push((0, 1));
    }
    for &b in &basis {
        gens.push(LevelGroupElement { n, entries: [(1, 0), b, (0, 0), (1, 0)] });
        gens.push(LevelGroupElement { n, entries: [(1, 0), (0, 0), b, (1, 0)] });
    }
    let mut seen: BTreeSet<u128> = BTreeSet::new();
    let mut queue: Vec<LevelGroupElement> = vec![LevelGroupElement::identity(n)];
    seen.insert(queue[0].key());
    while let Some(h) = queue.pop() {
        for gen in &gens {
            let next = gen.mul(ring, &h);
            if seen.insert(next.key()) {
                queue.push(next);
            }
        }
    }
    seen.into_iter().collect()
}

/// Generators of the image of the integral Borel subgroup: unipotents over
/// the integral basis and unit diagonals.
fn borel_generators(f: &TotallyRealField, ring: &ResidueRing, n: u32) -> Vec<LevelGroupElement> {
    let mut gens: Vec<LevelGroupElement> = Vec::new();
    let mut basis = vec![(1i64, 0i64)];
    if f.degree() == 2 {
        basis.push((0, 1));
    }
    for &b in &basis {
        gens.push(LevelGroupElement { n, entries: [(1, 0), b, (0, 0), (1, 0)] });
    }
    let mut units: Vec<Res> = vec![(-1, 0)];
    if f.degree() == 2 {
        let eps = f.fundamental_unit();
        units.push((
            eps.c0.to_integer().to_i64().expect("unit coordinate"),
            eps.c1.to_integer().to_i64().expect("unit coordinate"),
        ));
    }
    for u in units {
        let ur = ring.reduce(u);
        // diag(u, u^-1): invert by solving u * v = 1 in the ring
        let mut vinv = None;
        for cand in ring.elements() {
            if ring.mul(ur, cand) == (1, 0) {
                vinv = Some(cand);
                break;
            }
        }
        let v = vinv.expect("unit residue must be invertible");
        gens.push(LevelGroupElement { n, entries: [ur, (0, 0), (0, 0), v] });
    }
    gens
}

pub fn cusp_partition(f: &TotallyRealField, n: u32) -> Result<CuspPartition, CuspError> {
    if n < 3 {
        return Err(CuspError::LevelTooSmall);
    }
    let ring = ResidueRing::new(f, n);
    let size = ring.size();
    if size > RING_CAP {
        return Err(CuspError::ResidueRingTooLarge);
    }
    if size.saturating_mul(size).saturating_mul(size) > GROUP_BUDGET {
        return Err(CuspError::GroupTooLarge);
    }
    let group = special_group(f, &ring, n);
    let borel = borel_generators(f, &ring, n);

    let all: BTreeSet<u128> = group.iter().copied().collect();
    let mut membership: BTreeMap<u128, usize> = BTreeMap::new();
    let mut cusps: Vec<Cusp> = Vec::new();
    for &start in &group {
        if membership.contains_key(&start) {
            continue;
        }
        let idx = cusps.len();
        let mut orbit: Vec<u128> = Vec::new();
        let mut queue = vec![start];
        membership.insert(start, idx);
        let mut min_key = start;
        while let Some(k) = queue.pop() {
            orbit.push(k);
            min_key = min_key.min(k);
            let h = LevelGroupElement::from_key(n, k);
            for gen in &borel {
                let next = gen.mul(&ring, &h);
                let nk = next.key();
                debug_assert!(all.contains(&nk), "Borel action must preserve the group");
                if let alloc::collections::btree_map::Entry::Vacant(e) = membership.entry(nk) {
                    e.insert(idx);
                    queue.push(nk);
                }
            }
        }
        cusps.push(Cusp {
            rep: LevelGroupElement::from_key(n, min_key),
            orbit_size: orbit.len(),
        });
    }
    // orbits partition the group
    let total: usize = cusps.iter().map(|c| c.orbit_size).sum();
    assert_eq!(total, group.len());
    cusps.sort_by_key(|c| c.rep.key());
    // remap membership to the sorted order
    let order: BTreeMap<u128, usize> =
        cusps.iter().enumerate().map(|(i, c)| (c.rep.key(), i)).collect();
    let mut old_to_new = vec![0usize; cusps.len()];
    // for each old index find its representative's new position
    {
        let mut rep_of_old: Vec<u128> = vec![u128::MAX; cusps.len()];
        for (&k, &idx) in membership.iter() {
            if k < rep_of_old[idx] {
                rep_of_old[idx] = k;
            }
        }
        for (old, rep) in rep_of_old.iter().enumerate() {
            old_to_new[old] = order[rep];
        }
    }
    let membership: BTreeMap<u128, usize> =
        membership.into_iter().map(|(k, v)| (k, old_to_new[v])).collect();
    Ok(CuspPartition { cusps, membership, group_order: group.len() })
}

/// The cusp set: Borel orbits of the determinant-one group over O/n.
pub fn cusp_set(f: &TotallyRealField, n: u32) -> Result<Vec<Cusp>, CuspError> {
    Ok(cusp_partition(f, n)?.cusps)
}

fn frac_rat(r: &Rat) -> Rat {
    r - r.floor()
}

/// Reduce an element of F modulo the integral lattice O: coordinates into
/// [0, 1).
pub fn reduce_mod_order(x: &FieldElement) -> FieldElement {
    FieldElement::new(frac_rat(&x.c0), frac_rat(&x.c1))
}

/// A level-n torsion pair (sigma^1, sigma^2), each a coset of (1/n)O / O
/// with coordinates in [0, 1).
pub type TorsionPair = [FieldElement; 2];

/// Left action of h on a torsion pair, exact; the result only depends on h
/// modulo n because n sigma is integral.
pub fn act(f: &TotallyRealField, h: &LevelGroupElement, sigma: &TorsionPair) -> TorsionPair {
    let e = h.lift(f);
    let y1 = f.add(&f.mul(&e[0], &sigma[0]), &f.mul(&e[1], &sigma[1]));
    let y2 = f.add(&f.mul(&e[2], &sigma[0]), &f.mul(&e[3], &sigma[1]));
    [reduce_mod_order(&y1), reduce_mod_order(&y2)]
}

/// The boundary projection p(h sigma): second coordinate of the acted pair.
pub fn project(f: &TotallyRealField, h: &LevelGroupElement, sigma: &TorsionPair) -> FieldElement {
    act(f, h, sigma)[1].clone()
}

/// Cusp ideal data: the ideal generated by the bottom row of a
/// determinant-one integral lift, together with that lift.
#[derive(Clone, Debug)]
pub struct CuspIdeal {
    pub ideal: FractionalIdeal,
    pub lift: [FieldElement; 4],
}

fn rat_round(r: &Rat) -> Rat {
    (r + Rat::new(1.into(), 2.into())).floor()
}

/// Extended gcd in the norm-Euclidean integer ring: returns (a, b, gamma)
/// with a c + b d = gamma and gamma the gcd.
fn euclid_bezout(
    f: &TotallyRealField,
    c: &FieldElement,
    d: &FieldElement,
) -> (FieldElement, FieldElement, FieldElement) {
    let mut r0 = c.clone();
    let mut r1 = d.clone();
    let mut x0 = FieldElement::one();
    let mut y0 = FieldElement::zero();
    let mut x1 = FieldElement::zero();
    let mut y1 = FieldElement::one();
    while !r1.is_zero() {
        let z = f.div(&r0, &r1).expect("nonzero divisor");
        let q = FieldElement::new(rat_round(&z.c0), rat_round(&z.c1));
        let r2 = f.sub(&r0, &f.mul(&q, &r1));
        let x2 = f.sub(&x0, &f.mul(&q, &x1));
        let y2 = f.sub(&y0, &f.mul(&q, &y1));
        r0 = r1;
        r1 = r2;
        x0 = x1;
        x1 = x2;
        y0 = y1;
        y1 = y2;
    }
    (x0, y0, r0)
}

fn ideal_of_row(
    f: &TotallyRealField,
    c: &FieldElement,
    d: &FieldElement,
) -> Option<FractionalIdeal> {
    let w = f.gen();
    let mut gens: Vec<FieldElement> = Vec::new();
    for v in [c, d] {
        if !v.is_zero() {
            gens.push(v.clone());
            if f.degree() == 2 {
                gens.push(f.mul(v, &w));
            }
        }
    }
    if gens.is_empty() {
        return None;
    }
    FractionalIdeal::from_basis(f, &gens).ok()
}

/// Determinant-one integral lift of h (congruent to h entrywise mod n) and
/// the ideal generated by the lifted bottom row. The bottom-row lift is
/// adjusted by multiples of n until it is unimodular, then completed by the
/// Euclidean Bezout identity and corrected by an upper unipotent so the top
/// row matches as well.
pub fn cusp_ideal(f: &TotallyRealField, h: &LevelGroupElement) -> Result<CuspIdeal, CuspError> {
    let ring = ResidueRing::new(f, h.n);
    assert!(h.is_special(&ring), "cusp ideal needs a determinant-one class");
    let e = h.lift(f);
    let n = rat_i(h.n as i64);
    // deterministic search box of integral adjustments
    let mut box_elems: Vec<FieldElement> = Vec::new();
    let yr: Vec<i64> = if f.degree() == 1 { vec![0] } else { vec![0, 1, -1, 2, -2] };
    for x in [0i64, 1, -1, 2, -2] {
        for &y in &yr {
            box_elems.push(FieldElement::new(rat_i(x), rat_i(y)));
        }
    }
    for p in &box_elems {
        for q in &box_elems {
            let c = f.add(&e[2], &f.scale(p, &n));
            let d = f.add(&e[3], &f.scale(q, &n));
            if c.is_zero() && d.is_zero() {
                continue;
            }
            let Some(ideal) = ideal_of_row(f, &c, &d) else {
                continue;
            };
            if ideal != f.maximal_order() {
                continue;
            }
            let (x, y, gamma) = euclid_bezout(f, &c, &d);
            // gamma is a unit; rescale the Bezout pair so x c + y d = 1
            let ginv = f.inv(&gamma).expect("gcd of a unimodular row is a unit");
            debug_assert_eq!(f.norm(&gamma).abs(), rat_i(1).abs());
            let x = f.mul(&x, &ginv);
            let y = f.mul(&y, &ginv);
            // bottom row (c, d), top row (y, -x): det = y d + x c = 1
            let a0 = y;
            let b0 = f.neg(&x);
            // correct the top row by a unipotent: h * M^-1 = (1, m; 0, 1) mod n
            let m0 = LevelGroupElement::new(
                f,
                h.n,
                [
                    res_of(&a0, h.n),
                    res_of(&b0, h.n),
                    res_of(&c, h.n),
                    res_of(&d, h.n),
                ],
            )
            .expect("lift has determinant one");
            let gamma_corr = h.mul(&ring, &m0.inverse_special(&ring));
            debug_assert_eq!(gamma_corr.entries[2], (0, 0));
            debug_assert_eq!(gamma_corr.entries[0], (1, 0));
            debug_assert_eq!(gamma_corr.entries[3], (1, 0));
            let m = FieldElement::new(
                rat_i(gamma_corr.entries[1].0),
                rat_i(gamma_corr.entries[1].1),
            );
            let a = f.add(&a0, &f.mul(&m, &c));
            let b = f.add(&b0, &f.mul(&m, &d));
            return Ok(CuspIdeal { ideal, lift: [a, b, c, d] });
        }
    }
    Err(CuspError::LiftSearchExhausted)
}

fn res_of(x: &FieldElement, n: u32) -> Res {
    let c0 = x.c0.to_integer().to_i64().expect("integral coordinate");
    let c1 = x.c1.to_integer().to_i64().expect("integral coordinate");
    (c0.rem_euclid(n as i64), c1.rem_euclid(n as i64))
}

/// Projection through the determinant-one lift: c sigma^1 + d sigma^2
/// reduced modulo the cusp ideal.
pub fn project_normalized(
    f: &TotallyRealField,
    data: &CuspIdeal,
    sigma: &TorsionPair,
) -> FieldElement {
    let v = f.add(&f.mul(&data.lift[2], &sigma[0]), &f.mul(&data.lift[3], &sigma[1]));
    data.ideal.reduce_mod(f, &v)
}

// ---------------------------------------------------------------------------
// Unit coinvariants
// ---------------------------------------------------------------------------

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    if m == 0 {
        return Vec::new();
    }
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..m {
            for q in (p + 1)..m {
                off = off.max(a[p][q].abs());
            }
        }
        if off < 1e-30 * scale {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i][i]).collect()
}

/// Dimension of the coinvariants of Sym^k(O tensor R) under the totally
/// positive unit action: numeric rank of the stacked rows of
/// Sym^k(action) - I, singular values below 1e-10 counting as zero.
pub fn coinvariant_dimension(f: &TotallyRealField, k: u32) -> usize {
    let g = f.degree();
    let dim = if g == 1 { 1 } else { k as usize + 1 };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    if g == 2 {
        let eps = f.totally_positive_unit();
        let emb = f.embed_f64(&eps);
        // Sym^k of diag(u1, u2) on the monomial basis is diagonal
        for a in 0..=k {
            let lam = libm::pow(emb[0], a as f64) * libm::pow(emb[1], (k - a) as f64);
            let mut row = vec![0.0; dim];
            row[a as usize] = lam - 1.0;
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return dim;
    }
    // Gram matrix of the row span
    let mut gram = vec![vec![0.0f64; dim]; dim];
    for r in &rows {
        for i in 0..dim {
            for j in 0..dim {
                gram[i][j] += r[i] * r[j];
            }
        }
    }
    let eig = jacobi_eigenvalues(gram);
    let rank = eig.iter().filter(|&&l| l.max(0.0).sqrt() >= 1e-10).count();
    dim - rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn determinant_validation() {
        let f = TotallyRealField::qsqrt2();
        // det = -w^2 = -2 = 1 mod 3: fine
        let h = LevelGroupElement::new(&f, 3, [(0, 0), (0, 1), (0, 1), (0, 0)]).unwrap();
        let ring = ResidueRing::new(&f, 3);
        assert!(h.is_special(&ring));
        assert_eq!(h.mul(&ring, &h.inverse_special(&ring)), LevelGroupElement::identity(3));
        // det = 0: rejected
        assert_eq!(
            LevelGroupElement::new(&f, 3, [(1, 0), (1, 0), (1, 0), (1, 0)]),
            Err(CuspError::BadDeterminant)
        );
        // det = w: invertible in F_9 but not a rational residue
        let bad = LevelGroupElement::new(&f, 3, [(0, 1), (0, 0), (0, 0), (1, 0)]);
        assert_eq!(bad, Err(CuspError::BadDeterminant));
    }

    #[test]
    fn cusp_counts_level_three() {
        let q = TotallyRealField::rational();
        let part = cusp_partition(&q, 3).unwrap();
        assert_eq!(part.group_order, 24);
        assert_eq!(part.cusps.len(), 4);
        assert!(part.cusps.iter().all(|c| c.orbit_size == 6));

        for f in [TotallyRealField::qsqrt2(), TotallyRealField::qsqrt5()] {
            let part = cusp_partition(&f, 3).unwrap();
            assert_eq!(part.group_order, 720, "{}", f.degree());
            assert_eq!(part.cusps.len(), 10);
            assert!(part.cusps.iter().all(|c| c.orbit_size == 72));
        }
    }

    #[test]
    fn cusp_set_guards() {
        let f = TotallyRealField::qsqrt2();
        assert!(matches!(cusp_set(&f, 2), Err(CuspError::LevelTooSmall)));
        assert!(matches!(cusp_set(&f, 200), Err(CuspError::ResidueRingTooLarge)));
        // ring fits the cap but the group does not
        assert!(matches!(cusp_set(&f, 60), Err(CuspError::GroupTooLarge)));
    }

    #[test]
    fn frozen_battery_representatives() {
        let f = TotallyRealField::qsqrt2();
        let cusps = cusp_set(&f, 3).unwrap();
        let keys: Vec<[Res; 4]> = cusps.iter().map(|c| c.rep.entries).collect();
        for want in [
            [(0, 0), (0, 1), (0, 1), (0, 0)],
            [(0, 0), (0, 1), (0, 1), (0, 1)],
            [(0, 0), (0, 1), (0, 1), (0, 2)],
        ] {
            assert!(keys.contains(&want), "missing representative {:?}", want);
        }
        // identity cusp is the first in lexicographic order? the all-zero
        // prefix reps come first; the identity lies in some orbit
        let ring = ResidueRing::new(&f, 3);
        let id = LevelGroupElement::identity(3);
        assert!(cusps.iter().all(|c| c.rep.is_special(&ring)));
        let part = cusp_partition(&f, 3).unwrap();
        assert!(part.membership.contains_key(&id.key()));
    }

    #[test]
    fn extra_borel_elements_preserve_the_partition() {
        // adjoining deeper Borel-image elements must not merge orbits
        let f = TotallyRealField::qsqrt2();
        let part = cusp_partition(&f, 3).unwrap();
        let ring = ResidueRing::new(&f, 3);
        let eps = f.fundamental_unit();
        let e2 = f.mul(&eps, &eps);
        let extras = [
            // diag(eps^2, eps^-2)
            {
                let u = res_of(&e2, 3);
                let mut vinv = None;
                for x in 0..3 {
                    for y in 0..3 {
                        if ring.mul(u, (x, y)) == (1, 0) {
                            vinv = Some((x, y));
                        }
                    }
                }
                LevelGroupElement { n: 3, entries: [u, (0, 0), (0, 0), vinv.unwrap()] }
            },
            // unipotent with mixed entry 2 + w
            LevelGroupElement { n: 3, entries: [(1, 0), (2, 1), (0, 0), (1, 0)] },
            // diag(-eps, -eps^-1)
            {
                let u = res_of(&f.neg(&eps), 3);
                let mut vinv = None;
                for x in 0..3 {
                    for y in 0..3 {
                        if ring.mul(u, (x, y)) == (1, 0) {
                            vinv = Some((x, y));
                        }
                    }
                }
                LevelGroupElement { n: 3, entries: [u, (0, 0), (0, 0), vinv.unwrap()] }
            },
        ];
        for (k, &idx) in part.membership.iter() {
            let h = LevelGroupElement::from_key(3, *k as u128);
            for b in &extras {
                let moved = b.mul(&ring, &h);
                assert_eq!(part.membership[&moved.key()], idx, "orbit not closed");
            }
        }
    }

    #[test]
    fn cusp_ideal_trivial_class_and_lift_congruence() {
        for f in [TotallyRealField::qsqrt2(), TotallyRealField::qsqrt5()] {
            let cusps = cusp_set(&f, 3).unwrap();
            for c in &cusps {
                let data = cusp_ideal(&f, &c.rep).unwrap();
                assert_eq!(data.ideal, f.maximal_order());
                assert_eq!(data.ideal.norm(), rat_i(1));
                // determinant of the lift is exactly one
                let det = f.sub(
                    &f.mul(&data.lift[0], &data.lift[3]),
                    &f.mul(&data.lift[1], &data.lift[2]),
                );
                assert_eq!(det, FieldElement::one());
                // entrywise congruence with the representative
                for (l, r) in data.lift.iter().zip(c.rep.entries.iter()) {
                    assert_eq!(res_of(l, 3), *r);
                }
            }
        }
    }

    #[test]
    fn cusp_ideal_independent_of_lift() {
        let f = TotallyRealField::qsqrt2();
        let cusps = cusp_set(&f, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let data = cusp_ideal(&f, &cusps[4].rep).unwrap();
        for _ in 0..5 {
            // another determinant-one lift: left-multiply by elementary
            // matrices congruent to the identity mod 3
            let mu = FieldElement::new(
                rat_i(3 * rng.gen_range(-2..3i64)),
                rat_i(3 * rng.gen_range(-2..3i64)),
            );
            let nu = FieldElement::new(
                rat_i(3 * rng.gen_range(-2..3i64)),
                rat_i(3 * rng.gen_range(-2..3i64)),
            );
            // E21(nu) E12(mu) applied to the lift
            let [a, b, c, d] = data.lift.clone();
            let (a1, b1) = (f.add(&a, &f.mul(&mu, &c)), f.add(&b, &f.mul(&mu, &d)));
            let (c1, d1) = (f.add(&c, &f.mul(&nu, &a1)), f.add(&d, &f.mul(&nu, &b1)));
            let det = f.sub(&f.mul(&a1, &d1), &f.mul(&b1, &c1));
            assert_eq!(det, FieldElement::one());
            let other = ideal_of_row(&f, &c1, &d1).unwrap();
            assert_eq!(other, data.ideal);
        }
    }

    #[test]
    fn action_is_associative_and_projection_compatible() {
        let f = TotallyRealField::qsqrt5();
        let cusps = cusp_set(&f, 3).unwrap();
        let ring = ResidueRing::new(&f, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5151);
        for _ in 0..25 {
            let h1 = &cusps[rng.gen_range(0..cusps.len())].rep;
            let h2 = &cusps[rng.gen_range(0..cusps.len())].rep;
            let sigma: TorsionPair = [
                FieldElement::new(rat(rng.gen_range(0..3), 3), rat(rng.gen_range(0..3), 3)),
                FieldElement::new(rat(rng.gen_range(0..3), 3), rat(rng.gen_range(0..3), 3)),
            ];
            let lhs = act(&f, &h1.mul(&ring, h2), &sigma);
            let rhs = act(&f, h1, &act(&f, h2, &sigma));
            assert_eq!(lhs, rhs);
            // normalized projection through the lift agrees with the plain one
            let data = cusp_ideal(&f, h1).unwrap();
            let p1 = project(&f, h1, &sigma);
            let p2 = project_normalized(&f, &data, &sigma);
            assert_eq!(p1, reduce_mod_order(&p2));
        }
    }

    #[test]
    fn frozen_projection_values() {
        let f = TotallyRealField::qsqrt2();
        let h0 = LevelGroupElement::new(&f, 3, [(0, 0), (0, 1), (0, 1), (0, 0)]).unwrap();
        let sigma_a: TorsionPair =
            [FieldElement::new(rat(1, 3), rat_i(0)), FieldElement::zero()];
        // p(h0 sigma_a) = w/3
        assert_eq!(project(&f, &h0, &sigma_a), FieldElement::new(rat_i(0), rat(1, 3)));
        let h2 = LevelGroupElement::new(&f, 3, [(0, 0), (0, 1), (0, 1), (0, 2)]).unwrap();
        let sigma_b: TorsionPair =
            [FieldElement::new(rat(1, 3), rat_i(0)), FieldElement::new(rat(2, 3), rat_i(0))];
        // p(h2 sigma_b) = w/3 + (4w/3 mod O) = w/3 + w/3 = 2w/3
        assert_eq!(project(&f, &h2, &sigma_b), FieldElement::new(rat_i(0), rat(2, 3)));
    }

    #[test]
    fn coinvariant_dimensions() {
        let q = TotallyRealField::rational();
        for k in 0..=12 {
            assert_eq!(coinvariant_dimension(&q, k), 1, "g=1 k={}", k);
        }
        for f in [TotallyRealField::qsqrt2(), TotallyRealField::qsqrt5()] {
            for k in 0..=12 {
                let want = if k % 2 == 0 { 1 } else { 0 };
                assert_eq!(coinvariant_dimension(&f, k), want, "g=2 k={}", k);
            }
        }
    }

    #[test]
    fn jacobi_eigenvalues_on_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let eig = jacobi_eigenvalues(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut eig = eig;
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }
}
