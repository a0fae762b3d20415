//! Prime-power fields at desk scale. An element of F_{p^n} is its index in
//! 0..p^n, read as base-p digits, least significant first: index
//! c0 + c1*p + ... encodes the coset c0 + c1*x + ... of the modulus.
//! Everything that matters fits in 64 elements, so scans replace algorithms
//! throughout: irreducibility is trial division, roots come from trying
//! every element, and linear algebra is Gaussian elimination mod p.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::algebra::{subgroups, FiniteGroup};
use crate::correspondence::Lattice;
use crate::kernel::FinMap;
use crate::{Error, Result};

/// Largest field handled; every operation scans all elements at least once.
pub const MAX_FIELD_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FieldSchema", into = "FieldSchema")]
pub struct FiniteField {
    pub p: usize,
    pub n: usize,
    /// Monic irreducible of degree n, little-endian coefficients, length n+1.
    pub modulus: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct FieldSchema {
    p: usize,
    n: usize,
    modulus: Vec<usize>,
}

impl TryFrom<FieldSchema> for FiniteField {
    type Error = Error;
    fn try_from(s: FieldSchema) -> Result<Self> {
        FiniteField::new(s.p, s.n, s.modulus)
    }
}

impl From<FiniteField> for FieldSchema {
    fn from(f: FiniteField) -> Self {
        FieldSchema { p: f.p, n: f.n, modulus: f.modulus }
    }
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Remainder of a by b over F_p, b monic. Little-endian, same length as a.
fn poly_rem(a: &[usize], b: &[usize], p: usize) -> Vec<usize> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    for k in (db..r.len()).rev() {
        let c = r[k];
        if c == 0 {
            continue;
        }
        r[k] = 0;
        for j in 0..db {
            r[k - db + j] = (r[k - db + j] + (p - c * b[j] % p)) % p;
        }
    }
    r
}

impl FiniteField {
    pub fn new(p: usize, n: usize, modulus: Vec<usize>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::malformed("FiniteField", format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::BadModulus { detail: "degree must be at least 1".into() });
        }
        let mut order = 1usize;
        for _ in 0..n {
            order *= p;
            if order > MAX_FIELD_ORDER {
                return Err(Error::CapExceeded {
                    what: "field order",
                    actual: order,
                    cap: MAX_FIELD_ORDER,
                });
            }
        }
        if modulus.len() != n + 1 {
            return Err(Error::BadModulus {
                detail: format!("expected {} coefficients, found {}", n + 1, modulus.len()),
            });
        }
        if let Some(c) = modulus.iter().find(|&&c| c >= p) {
            return Err(Error::BadModulus { detail: format!("coefficient {c} not reduced mod {p}") });
        }
        if modulus[n] != 1 {
            return Err(Error::BadModulus { detail: "modulus must be monic".into() });
        }
        for d in 1..=n / 2 {
            let mut tail = vec![0usize; d];
            loop {
                let mut div = tail.clone();
                div.push(1);
                if poly_rem(&modulus, &div, p).iter().all(|&c| c == 0) {
                    return Err(Error::BadModulus {
                        detail: format!("divisible by a degree-{d} factor {div:?}"),
                    });
                }
                let mut i = 0;
                while i < d {
                    tail[i] += 1;
                    if tail[i] < p {
                        break;
                    }
                    tail[i] = 0;
                    i += 1;
                }
                if i == d {
                    break;
                }
            }
        }
        Ok(FiniteField { p, n, modulus })
    }

    /// The field with the lexicographically smallest monic irreducible of
    /// degree n: the tail coefficients count up in base p.
    pub fn generate(p: usize, n: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::malformed("FiniteField", format!("{p} is not prime")));
        }
        let mut order = 1usize;
        for _ in 0..n.max(1) {
            order *= p;
            if order > MAX_FIELD_ORDER {
                return Err(Error::CapExceeded {
                    what: "field order",
                    actual: order,
                    cap: MAX_FIELD_ORDER,
                });
            }
        }
        for k in 0..order {
            let mut modulus: Vec<usize> = Vec::with_capacity(n + 1);
            let mut rest = k;
            for _ in 0..n {
                modulus.push(rest % p);
                rest /= p;
            }
            modulus.push(1);
            if let Ok(f) = FiniteField::new(p, n, modulus) {
                return Ok(f);
            }
        }
        unreachable!("an irreducible of every degree exists over F_p")
    }

    pub fn order(&self) -> usize {
        self.p.pow(self.n as u32)
    }

    pub fn coeffs(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        let mut rest = e;
        for _ in 0..self.n {
            out.push(rest % self.p);
            rest /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, c: &[usize]) -> usize {
        c.iter().rev().fold(0, |acc, &d| acc * self.p + d % self.p)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let sum: Vec<usize> = ca.iter().zip(&cb).map(|(&x, &y)| (x + y) % self.p).collect();
        self.from_coeffs(&sum)
    }

    pub fn neg(&self, a: usize) -> usize {
        let c: Vec<usize> = self.coeffs(a).iter().map(|&x| (self.p - x) % self.p).collect();
        self.from_coeffs(&c)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let mut prod = vec![0usize; 2 * self.n];
        for (i, &x) in ca.iter().enumerate() {
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        let r = poly_rem(&prod, &self.modulus, self.p);
        self.from_coeffs(&r[..self.n])
    }

    pub fn pow(&self, mut a: usize, mut k: usize) -> usize {
        let mut acc = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: usize) -> usize {
        assert!(a != 0, "zero has no inverse");
        self.pow(a, self.order() - 2)
    }

    /// Evaluates the modulus at an element.
    pub fn eval_modulus(&self, x: usize) -> usize {
        self.modulus.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c % self.p))
    }

    /// The Frobenius permutation table e ↦ e^p.
    pub fn frobenius(&self) -> Vec<usize> {
        (0..self.order()).map(|e| self.pow(e, self.p)).collect()
    }
}

/// Monic product of (y − r) over the given roots, coefficients as field
/// elements, little-endian.
fn poly_from_roots(f: &FiniteField, roots: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut poly = vec![1usize];
    for r in roots {
        let mut next = vec![0usize; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] = f.add(next[i + 1], c);
            next[i] = f.add(next[i], f.mul(f.neg(r), c));
        }
        poly = next;
    }
    poly
}

/// A degree-n extension of its prime field, with the inclusion as a map of
/// element indices. The prime subfield is exactly the indices below p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FiniteField", into = "FiniteField")]
pub struct FieldExtension {
    pub base: FiniteField,
    pub field: FiniteField,
    pub embedding: FinMap,
}

impl TryFrom<FiniteField> for FieldExtension {
    type Error = Error;
    fn try_from(f: FiniteField) -> Result<Self> {
        FieldExtension::new(f)
    }
}

impl From<FieldExtension> for FiniteField {
    fn from(e: FieldExtension) -> Self {
        e.field
    }
}

impl FieldExtension {
    pub fn new(field: FiniteField) -> Result<Self> {
        let base = FiniteField::generate(field.p, 1)?;
        let embedding = FinMap::from_table((0..field.p).collect(), field.order())?;
        Ok(FieldExtension { base, field, embedding })
    }

    pub fn generate(p: usize, n: usize) -> Result<Self> {
        FieldExtension::new(FiniteField::generate(p, n)?)
    }

    /// Index of the residue class of x, the canonical generator.
    pub fn theta(&self) -> usize {
        if self.field.n == 1 {
            // degree 1: x ≡ -c0, the root of the modulus
            (self.field.p - self.field.modulus[0]) % self.field.p
        } else {
            self.field.p
        }
    }
}

/// The automorphisms fixing the prime field: Frobenius powers, indexed by
/// exponent, with the cyclic group of order n in the same indexing. Each
/// map permutes element indices.
pub fn aut_group(e: &FieldExtension) -> (FiniteGroup, Vec<FinMap>) {
    let q = e.field.order();
    let n = e.field.n;
    let frob = e.field.frobenius();
    let mut auts: Vec<Vec<usize>> = vec![(0..q).collect()];
    for _ in 1..n {
        let prev = auts.last().expect("seeded with the identity");
        auts.push(prev.iter().map(|&x| frob[x]).collect());
    }
    let closes: Vec<usize> = auts[n - 1].iter().map(|&x| frob[x]).collect();
    assert!(closes.iter().enumerate().all(|(i, &x)| x == i), "Frobenius order exceeds the degree");
    let distinct: BTreeSet<&Vec<usize>> = auts.iter().collect();
    assert_eq!(distinct.len(), n, "Frobenius order is below the degree");
    let maps = auts
        .into_iter()
        .map(|t| FinMap::from_table(t, q).expect("powers of a permutation are permutations"))
        .collect();
    (FiniteGroup::cyclic(n), maps)
}

/// All roots of the modulus in the field, ascending. Exactly n exist; fewer
/// means the data was corrupted.
pub fn tensor_trivialize(e: &FieldExtension) -> Result<Vec<usize>> {
    let roots: Vec<usize> = (0..e.field.order()).filter(|&x| e.field.eval_modulus(x) == 0).collect();
    if roots.len() != e.field.n {
        return Err(Error::NotSeparable {
            detail: format!("{} roots found, {} required", roots.len(), e.field.n),
        });
    }
    Ok(roots)
}

/// The function g ↦ g(a)·b on the automorphism group, as a value per
/// Frobenius exponent.
pub fn phi(e: &FieldExtension, a: usize, b: usize) -> Vec<usize> {
    let q = e.field.order();
    assert!(a < q && b < q, "element index out of range");
    let frob = e.field.frobenius();
    let mut ga = a;
    (0..e.field.n)
        .map(|_| {
            let value = e.field.mul(ga, b);
            ga = frob[ga];
            value
        })
        .collect()
}

/// L[x] modulo the base-field modulus, with coefficients in L. A simple
/// tensor a⊗b is the polynomial of a (coefficients read from the prime
/// field) scaled by b; scalars of the L-algebra structure enter through the
/// polynomial side.
pub struct TensorAlgebra {
    pub ext: FieldExtension,
}

impl TensorAlgebra {
    pub fn new(ext: FieldExtension) -> Self {
        TensorAlgebra { ext }
    }

    fn f(&self) -> &FiniteField {
        &self.ext.field
    }

    pub fn dim(&self) -> usize {
        self.f().n
    }

    pub fn zero(&self) -> Vec<usize> {
        vec![0; self.dim()]
    }

    pub fn tensor(&self, a: usize, b: usize) -> Vec<usize> {
        let f = self.f();
        f.coeffs(a).iter().map(|&c| f.mul(c, b)).collect()
    }

    pub fn add(&self, s: &[usize], t: &[usize]) -> Vec<usize> {
        s.iter().zip(t).map(|(&x, &y)| self.f().add(x, y)).collect()
    }

    pub fn mul(&self, s: &[usize], t: &[usize]) -> Vec<usize> {
        let f = self.f();
        let n = self.dim();
        let mut prod = vec![0usize; 2 * n];
        for (i, &x) in s.iter().enumerate() {
            for (j, &y) in t.iter().enumerate() {
                prod[i + j] = f.add(prod[i + j], f.mul(x, y));
            }
        }
        // reduce by the modulus, whose coefficients lie in the prime field
        for k in (n..2 * n).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for j in 0..n {
                let m = f.neg(f.mul(c, self.f().modulus[j] % f.p));
                prod[k - n + j] = f.add(prod[k - n + j], m);
            }
        }
        prod.truncate(n);
        prod
    }

    /// Evaluation at one element of L.
    pub fn eval(&self, t: &[usize], x: usize) -> usize {
        let f = self.f();
        t.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Evaluation at the root family g(θ), one value per automorphism; this
    /// extends `phi` from simple tensors to the whole algebra.
    pub fn trivialized(&self, t: &[usize]) -> Vec<usize> {
        let frob = self.f().frobenius();
        let mut root = self.ext.theta();
        (0..self.dim())
            .map(|_| {
                let value = self.eval(t, root);
                root = frob[root];
                value
            })
            .collect()
    }

    /// The diagonal automorphism action: coefficients move by g while x is
    /// substituted by the polynomial of g(θ).
    pub fn diagonal_action(&self, g: usize, t: &[usize]) -> Vec<usize> {
        let f = self.f();
        let mut sigma: Vec<usize> = (0..f.order()).collect();
        let frob = f.frobenius();
        for _ in 0..g {
            sigma = sigma.iter().map(|&x| frob[x]).collect();
        }
        let image_of_x = self.tensor(sigma[self.ext.theta()], 1);
        let mut acc = self.zero();
        let mut power = self.tensor(1, 1);
        for &c in t {
            let term: Vec<usize> = power.iter().map(|&w| f.mul(sigma[c], w)).collect();
            acc = self.add(&acc, &term);
            power = self.mul(&power, &image_of_x);
        }
        acc
    }

    /// Coordinates over the prime field: n coefficients, n digits each.
    pub fn k_coords(&self, t: &[usize]) -> Vec<usize> {
        t.iter().flat_map(|&c| self.f().coeffs(c)).collect()
    }

    pub fn from_k_coords(&self, v: &[usize]) -> Vec<usize> {
        let n = self.dim();
        (0..n).map(|i| self.f().from_coeffs(&v[i * n..(i + 1) * n])).collect()
    }
}

fn inv_mod(a: usize, p: usize) -> usize {
    let mut acc = 1usize;
    let mut base = a % p;
    let mut k = p - 2;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        k >>= 1;
    }
    acc
}

/// In-place row echelon over F_p; returns (rank, pivot columns).
fn row_reduce(rows: &mut [Vec<usize>], p: usize) -> (usize, Vec<usize>) {
    let mut rank = 0;
    let mut pivots = Vec::new();
    let width = rows.first().map_or(0, Vec::len);
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] % p != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = inv_mod(rows[rank][col], p);
        for x in rows[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] % p != 0 {
                let c = rows[r][col];
                for j in 0..width {
                    rows[r][j] = (rows[r][j] + (p - c) * rows[rank][j]) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    (rank, pivots)
}

/// Basis of the solution space of the homogeneous system, canonical
/// free-variable order.
fn nullspace(mut rows: Vec<Vec<usize>>, width: usize, p: usize) -> Vec<Vec<usize>> {
    let (_, pivots) = row_reduce(&mut rows, p);
    let mut basis = Vec::new();
    for free in (0..width).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0usize; width];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - rows[r][free] % p) % p;
        }
        basis.push(v);
    }
    basis
}

/// Rank over F_p of φ on the n² basis tensors x^i ⊗ θ^j; full rank n²
/// certifies that the trivialization is injective, hence bijective.
pub fn phi_basis_rank(e: &FieldExtension) -> usize {
    let f = &e.field;
    let n = f.n;
    let theta = FieldExtension::theta(e);
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        let ei = f.pow(theta, i);
        for j in 0..n {
            let ej = f.pow(theta, j);
            let values = phi(e, ei, ej);
            rows.push(values.iter().flat_map(|&v| f.coeffs(v)).collect());
        }
    }
    row_reduce(&mut rows, f.p).0
}

/// A subfield of L presented by its element indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntermediateField {
    pub elements: Vec<usize>,
    /// Degree over the prime field.
    pub degree: usize,
}

/// The subfield fixed by a subgroup of Frobenius exponents, cross-checked
/// against the equalizer of a ↦ a and a ↦ polynomial-of-a taken modulo
/// ∏_{h∈H}(y − h(θ)).
pub fn fixed_field(e: &FieldExtension, h: &[usize]) -> Result<IntermediateField> {
    let n = e.field.n;
    let members: BTreeSet<usize> = h.iter().copied().collect();
    if members.len() != h.len() || !members.contains(&0) || h.iter().any(|&x| x >= n) {
        return Err(Error::NotASubgroup {
            detail: format!("{h:?} is not a set of residues mod {n} containing 0"),
        });
    }
    for &a in h {
        for &b in h {
            if !members.contains(&((a + b) % n)) {
                return Err(Error::NotASubgroup {
                    detail: format!("{h:?} is not closed: {a}+{b} escapes"),
                });
            }
        }
    }

    let f = &e.field;
    let frob = f.frobenius();
    let frob_pow = |k: usize, x: usize| (0..k).fold(x, |v, _| frob[v]);
    let elements: Vec<usize> = (0..f.order())
        .filter(|&x| h.iter().all(|&k| frob_pow(k, x) == x))
        .collect();
    let degree = n / h.len();
    assert_eq!(elements.len(), f.p.pow(degree as u32), "invariants miscount");

    // equalizer route: a is fixed iff its digit polynomial reduces to the
    // constant a modulo the subgroup's factor ∏_{k∈H}(y − frob^k(θ)),
    // a polynomial in a fresh variable with coefficients in the field
    let theta = e.theta();
    let factor = poly_from_roots(f, h.iter().map(|&k| frob_pow(k, theta)));
    let deg = factor.len() - 1;
    let equalized: Vec<usize> = (0..f.order())
        .filter(|&a| {
            let mut r = f.coeffs(a);
            for k in (deg..r.len()).rev() {
                let lead = r[k];
                if lead == 0 {
                    continue;
                }
                r[k] = 0;
                for j in 0..deg {
                    let delta = f.neg(f.mul(lead, factor[j]));
                    r[k - deg + j] = f.add(r[k - deg + j], delta);
                }
            }
            r[0] == a && r[1..].iter().all(|&c| c == 0)
        })
        .collect();
    assert_eq!(equalized, elements, "equalizer disagrees with invariants");

    Ok(IntermediateField { elements, degree })
}

/// Both sides of the classical correspondence plus the split-algebra check
/// on the diagonal invariants of the tensor algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldCorrespondence {
    pub subgroup_lattice: Lattice<Vec<usize>>,
    pub field_lattice: Lattice<IntermediateField>,
    /// Subgroup node -> field node, inclusion-reversing.
    pub bijection: Vec<(usize, usize)>,
    pub order_reversal_verified: bool,
    /// Whether the diagonal invariants of L⊗L are exactly the functions
    /// into the prime field, of dimension |G|.
    pub invariants_form_split_algebra: bool,
}

pub fn field_correspondence(e: &FieldExtension) -> Result<FieldCorrespondence> {
    let n = e.field.n;
    let (aut, _) = aut_group(e);
    let subs = subgroups(&aut);
    let fields: Vec<IntermediateField> = crate::par::map_vec(&subs, |h| fixed_field(e, h))
        .into_iter()
        .collect::<Result<_>>()?;

    // field nodes largest-first, mirroring coarsest-last quotients
    let mut order: Vec<usize> = (0..fields.len()).collect();
    order.sort_by_key(|&i| (usize::MAX - fields[i].degree, fields[i].elements.clone()));
    let mut position = vec![0usize; fields.len()];
    for (rank, &i) in order.iter().enumerate() {
        position[i] = rank;
    }
    let field_nodes: Vec<IntermediateField> = order.iter().map(|&i| fields[i].clone()).collect();
    let bijection: Vec<(usize, usize)> = (0..subs.len()).map(|i| (i, position[i])).collect();

    let mut sub_leq = BTreeSet::new();
    for (i, a) in subs.iter().enumerate() {
        for (j, b) in subs.iter().enumerate() {
            if a.iter().all(|x| b.binary_search(x).is_ok()) {
                sub_leq.insert((i, j));
            }
        }
    }
    let mut field_leq = BTreeSet::new();
    for (i, a) in field_nodes.iter().enumerate() {
        for (j, b) in field_nodes.iter().enumerate() {
            if a.elements.iter().all(|x| b.elements.binary_search(x).is_ok()) {
                field_leq.insert((i, j));
            }
        }
    }
    let subgroup_lattice = Lattice::new(subs.clone(), sub_leq)?;
    let field_lattice = Lattice::new(field_nodes, field_leq)?;
    let order_reversal_verified = (0..subs.len()).all(|i| {
        (0..subs.len()).all(|j| {
            subgroup_lattice.le(i, j) == field_lattice.le(bijection[j].1, bijection[i].1)
        })
    });

    let t = TensorAlgebra::new(e.clone());
    let dim = n * n;
    // invariants of the diagonal action = kernel of (generator − identity)
    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(dim);
    for idx in 0..dim {
        let mut v = vec![0usize; dim];
        v[idx] = 1;
        let elem = t.from_k_coords(&v);
        let moved = t.diagonal_action(1, &elem);
        let mut w = t.k_coords(&moved);
        for (a, b) in w.iter_mut().zip(&v) {
            *a = (*a + e.field.p - b) % e.field.p;
        }
        cols.push(w);
    }
    // rows of the system: one equation per coordinate
    let system: Vec<Vec<usize>> = (0..dim).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let invariant_basis = nullspace(system, dim, e.field.p);
    let mut split = invariant_basis.len() == n;
    let mut value_rows = Vec::new();
    for v in &invariant_basis {
        let elem = t.from_k_coords(v);
        let values = t.trivialized(&elem);
        split &= values.iter().all(|&x| x < e.field.p);
        value_rows.push(values);
    }
    if split {
        let (rank, _) = row_reduce(&mut value_rows, e.field.p);
        split &= rank == n;
    }

    Ok(FieldCorrespondence {
        subgroup_lattice,
        field_lattice,
        bijection,
        order_reversal_verified,
        invariants_form_split_algebra: split,
    })
}
