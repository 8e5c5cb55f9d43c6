//! Residue-field coefficients: ℚ, simple number fields ℚ[a]/(m(a)), and prime fields.

use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, Integer, Signed, ToPrimitive};

use crate::error::RisoError;
use crate::field::{fmt_rat, Field};
use crate::linalg::{bareiss_det, ExactRing};
use crate::poly1::Poly1;
use crate::zassen::factor_q;

pub type QPoly = Poly1<BigRational>;
pub type CPoly = Poly1<Coeff>;

/// Default bound on the absolute degree of coefficient fields.
pub const DEFAULT_EXT_BOUND: usize = 24;

/// ℚ[a]/(m(a)) with m monic irreducible.
#[derive(Debug)]
pub struct NumberField {
    pub minpoly: QPoly,
}

impl PartialEq for NumberField {
    fn eq(&self, o: &Self) -> bool {
        self.minpoly == o.minpoly
    }
}

impl NumberField {
    pub fn new(minpoly: QPoly) -> Arc<Self> {
        Arc::new(NumberField { minpoly: minpoly.monic() })
    }

    pub fn degree(&self) -> usize {
        self.minpoly.deg() as usize
    }

    pub fn gen(self: &Arc<Self>) -> Coeff {
        Coeff::nf(self.clone(), QPoly::x())
    }

    pub fn minpoly_string(&self) -> String {
        fmt_qpoly(&self.minpoly, "a")
    }
}

#[derive(Clone, Debug)]
pub enum Coeff {
    Q(BigRational),
    /// Element of a number field, reduced and of degree ≥ 1 in the generator.
    Nf(Arc<NumberField>, QPoly),
    /// Residue `v` modulo the prime `p`.
    Fp(u64, u64),
}

impl Coeff {
    pub fn q(r: BigRational) -> Self {
        Coeff::Q(r)
    }

    pub fn int(n: i64) -> Self {
        Coeff::Q(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Coeff::Q(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn fp(p: u64, v: i64) -> Self {
        Coeff::Fp(p, v.rem_euclid(p as i64) as u64)
    }

    /// Normalizing constructor for number-field elements.
    pub fn nf(f: Arc<NumberField>, a: QPoly) -> Self {
        let r = a.rem(&f.minpoly);
        if r.deg() <= 0 {
            Coeff::Q(r.coeff(0))
        } else {
            Coeff::Nf(f, r)
        }
    }

    pub fn field(&self) -> Option<&Arc<NumberField>> {
        match self {
            Coeff::Nf(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Coeff::Q(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Coeff::Q(_))
    }

    fn as_qpoly(&self) -> QPoly {
        match self {
            Coeff::Q(r) => QPoly::constant(r.clone()),
            Coeff::Nf(_, a) => a.clone(),
            Coeff::Fp(..) => panic!("prime-field element used as number-field element"),
        }
    }

    fn to_fp(&self, p: u64) -> u64 {
        match self {
            Coeff::Fp(q, v) => {
                assert_eq!(*q, p, "mixed prime fields");
                *v
            }
            Coeff::Q(r) => {
                let pb = BigInt::from(p);
                let n = r.numer().mod_floor(&pb).to_u64().unwrap();
                let d = r.denom().mod_floor(&pb).to_u64().unwrap();
                assert!(d != 0, "denominator divisible by p");
                n * pow_mod(d, p - 2, p) % p
            }
            Coeff::Nf(..) => panic!("number-field element in prime field"),
        }
    }

    /// Applies a field embedding to this coefficient.
    pub fn embed(&self, e: &Embedding) -> Coeff {
        match self {
            Coeff::Nf(f, a) => {
                if **f == *e.to {
                    return self.clone();
                }
                match &e.from {
                    Some(src) if **src == **f => {
                        let img = a.compose(&e.image);
                        Coeff::nf(e.to.clone(), img)
                    }
                    _ => panic!("embedding does not apply to this field"),
                }
            }
            _ => self.clone(),
        }
    }

    /// Sign for display purposes: true when the leading rendered coefficient is negative.
    pub fn looks_negative(&self) -> bool {
        match self {
            Coeff::Q(r) => r.is_negative(),
            Coeff::Nf(_, a) => a.lc().is_negative(),
            Coeff::Fp(..) => false,
        }
    }

    /// Whether `to_string` yields a single token needing no parentheses in a product.
    pub fn is_atomic(&self) -> bool {
        match self {
            Coeff::Q(_) => true,
            Coeff::Nf(_, a) => a.c.iter().filter(|c| !c.is_zero()).count() == 1,
            Coeff::Fp(..) => true,
        }
    }
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn same_field(a: &Arc<NumberField>, b: &Arc<NumberField>) {
    assert!(Arc::ptr_eq(a, b) || **a == **b, "coefficients from different number fields");
}

impl PartialEq for Coeff {
    fn eq(&self, o: &Self) -> bool {
        match (self, o) {
            (Coeff::Q(a), Coeff::Q(b)) => a == b,
            (Coeff::Nf(f, a), Coeff::Nf(g, b)) => **f == **g && a == b,
            (Coeff::Fp(p, a), Coeff::Fp(q, b)) => p == q && a == b,
            (Coeff::Fp(p, a), x @ Coeff::Q(_)) | (x @ Coeff::Q(_), Coeff::Fp(p, a)) => {
                let xr = x.as_rational().unwrap();
                if num::Zero::is_zero(&(xr.denom() % BigInt::from(*p))) {
                    false
                } else {
                    x.to_fp(*p) == *a
                }
            }
            _ => false,
        }
    }
}

impl Field for Coeff {
    fn zero() -> Self {
        Coeff::Q(BigRational::zero())
    }
    fn one() -> Self {
        Coeff::Q(BigRational::one())
    }
    fn is_zero(&self) -> bool {
        match self {
            Coeff::Q(r) => r.is_zero(),
            Coeff::Nf(..) => false,
            Coeff::Fp(_, v) => *v == 0,
        }
    }
    fn add(&self, o: &Self) -> Self {
        match (self, o) {
            (Coeff::Q(a), Coeff::Q(b)) => Coeff::Q(a + b),
            (Coeff::Fp(p, a), x) | (x, Coeff::Fp(p, a)) => Coeff::Fp(*p, (a + x.to_fp(*p)) % p),
            (Coeff::Nf(f, a), Coeff::Nf(g, b)) => {
                same_field(f, g);
                Coeff::nf(f.clone(), a.add(b))
            }
            (Coeff::Nf(f, a), Coeff::Q(b)) | (Coeff::Q(b), Coeff::Nf(f, a)) => {
                Coeff::nf(f.clone(), a.add(&QPoly::constant(b.clone())))
            }
        }
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        match (self, o) {
            (Coeff::Q(a), Coeff::Q(b)) => Coeff::Q(a * b),
            (Coeff::Fp(p, a), x) | (x, Coeff::Fp(p, a)) => Coeff::Fp(*p, a * x.to_fp(*p) % p),
            (Coeff::Nf(f, a), Coeff::Nf(g, b)) => {
                same_field(f, g);
                Coeff::nf(f.clone(), a.mul(b))
            }
            (Coeff::Nf(f, a), Coeff::Q(b)) | (Coeff::Q(b), Coeff::Nf(f, a)) => {
                Coeff::nf(f.clone(), a.scale(b))
            }
        }
    }
    fn neg(&self) -> Self {
        match self {
            Coeff::Q(a) => Coeff::Q(-a),
            Coeff::Nf(f, a) => Coeff::Nf(f.clone(), a.neg()),
            Coeff::Fp(p, a) => Coeff::Fp(*p, (p - a) % p),
        }
    }
    fn inv(&self) -> Self {
        match self {
            Coeff::Q(a) => {
                assert!(!a.is_zero(), "inverse of zero");
                Coeff::Q(a.recip())
            }
            Coeff::Nf(f, a) => {
                let (g, s, _) = a.xgcd(&f.minpoly);
                assert!(g.deg() == 0, "non-invertible number-field element");
                Coeff::nf(f.clone(), s)
            }
            Coeff::Fp(p, a) => {
                assert!(*a != 0, "inverse of zero");
                Coeff::Fp(*p, pow_mod(*a, p - 2, *p))
            }
        }
    }
    fn from_i64(n: i64) -> Self {
        Coeff::int(n)
    }
}

pub fn fmt_qpoly(a: &QPoly, var: &str) -> String {
    let mut s = String::new();
    for (i, c) in a.c.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let abs = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        if i == 0 {
            s.push_str(&fmt_rat(&abs));
        } else if abs.is_one() {
            s.push_str(&mono);
        } else {
            s.push_str(&format!("{}*{}", fmt_rat(&abs), mono));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Q(r) => write!(f, "{}", fmt_rat(r)),
            Coeff::Nf(_, a) => write!(f, "{}", fmt_qpoly(a, "a")),
            Coeff::Fp(_, v) => write!(f, "{v}"),
        }
    }
}

/// A field embedding ℚ(α) → ℚ(γ) (or ℚ → ℚ(γ) when `from` is None), sending α to `image`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub from: Option<Arc<NumberField>>,
    pub to: Arc<NumberField>,
    pub image: QPoly,
}

// ---------- norms and factorization over number fields ----------

impl ExactRing for QPoly {
    fn zero() -> Self {
        Poly1::zero()
    }
    fn is_zero(&self) -> bool {
        Poly1::is_zero(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Poly1::mul(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Poly1::sub(self, o)
    }
    fn neg(&self) -> Self {
        Poly1::neg(self)
    }
    fn exact_div(&self, o: &Self) -> Self {
        self.divrem(o).0
    }
}

/// Common field of a coefficient list, if any coefficient is algebraic.
pub fn common_field<'a>(it: impl IntoIterator<Item = &'a Coeff>) -> Option<Arc<NumberField>> {
    let mut out: Option<Arc<NumberField>> = None;
    for c in it {
        if let Some(f) = c.field() {
            match &out {
                None => out = Some(f.clone()),
                Some(g) => same_field(f, g),
            }
        }
    }
    out
}

/// Norm N(x) ∈ ℚ[x] of g(x − k·a) for g ∈ F[x], F = ℚ(a).
fn shifted_norm(g: &CPoly, f: &Arc<NumberField>, k: i64) -> QPoly {
    let n = f.degree();
    // coefficients of g(x - k a) in F[x]
    let shift = CPoly::new(vec![f.gen().mul(&Coeff::int(-k)), Coeff::one()]);
    let h = g.compose(&shift);
    // represent h as Σ_j (Σ_i h_{ij} a^i) x^j, build multiplication-by-h matrix over ℚ[x]
    let hq: Vec<QPoly> = (0..n)
        .map(|i| {
            QPoly::new(h.c.iter().map(|cj| cj.as_qpoly().coeff(i)).collect())
        })
        .collect();
    // element as vector over ℚ[x] in basis a^i: multiply by a^col and reduce
    let mut mat = vec![vec![QPoly::zero(); n]; n];
    let mut cur = hq.clone();
    for col in 0..n {
        for row in 0..n {
            mat[row][col] = cur[row].clone();
        }
        // multiply cur by a: shift and reduce with minpoly
        let mut next = vec![QPoly::zero(); n];
        for i in 0..n - 1 {
            next[i + 1] = cur[i].clone();
        }
        let top = cur[n - 1].clone();
        for i in 0..n {
            let mi = f.minpoly.coeff(i);
            next[i] = next[i].sub(&top.scale(&mi));
        }
        cur = next;
    }
    bareiss_det(mat)
}

/// Monic irreducible factors of g over its coefficient field (ℚ or a number field).
/// `ctx` is the ambient field; coefficients must lie in it.
pub fn factor_c(g: &CPoly, ctx: Option<&Arc<NumberField>>) -> Vec<(CPoly, usize)> {
    if g.deg() == 1 {
        return vec![(g.monic(), 1)];
    }
    let field = ctx.cloned().or_else(|| common_field(g.c.iter()));
    let Some(f) = field else {
        let gq = QPoly::new(g.c.iter().map(|c| c.as_rational().expect("rational").clone()).collect());
        return factor_q(&gq)
            .into_iter()
            .map(|(h, m)| (CPoly::new(h.c.into_iter().map(Coeff::Q).collect()), m))
            .collect();
    };
    let mut out = vec![];
    if g.c.iter().all(|c| c.is_rational()) {
        // split over ℚ first; only the nonlinear rational factors need the norm method
        let gq = QPoly::new(g.c.iter().map(|c| c.as_rational().unwrap().clone()).collect());
        for (h, m) in factor_q(&gq) {
            let hc = CPoly::new(h.c.into_iter().map(Coeff::Q).collect());
            for fac in factor_squarefree_nf(&hc, &f) {
                out.push((fac, m));
            }
        }
    } else {
        for (h, m) in g.squarefree_decomposition() {
            for fac in factor_squarefree_nf(&h, &f) {
                out.push((fac, m));
            }
        }
    }
    out.sort_by(|a, b| a.0.deg().cmp(&b.0.deg()).then_with(|| format!("{:?}", a.0.c).cmp(&format!("{:?}", b.0.c))));
    out
}

fn factor_squarefree_nf(g: &CPoly, f: &Arc<NumberField>) -> Vec<CPoly> {
    if g.deg() <= 1 {
        return vec![g.monic()];
    }
    for k in shifts() {
        let nrm = shifted_norm(g, f, k);
        if nrm.gcd(&nrm.deriv()).deg() != 0 {
            continue;
        }
        let mut out = vec![];
        let mut rest = g.monic();
        for (nf, _) in factor_q(&nrm) {
            // nf(x + k a)
            let back = CPoly::new(vec![f.gen().mul(&Coeff::int(k)), Coeff::one()]);
            let nfc = CPoly::new(nf.c.iter().cloned().map(Coeff::Q).collect()).compose(&back);
            let d = rest.gcd(&nfc);
            if d.deg() > 0 {
                rest = rest.divrem(&d).0;
                out.push(d);
            }
        }
        if rest.deg() > 0 {
            out.push(rest.monic());
        }
        return out;
    }
    unreachable!("shift search exhausted")
}

fn shifts() -> impl Iterator<Item = i64> {
    (0..64).map(|i| if i % 2 == 0 { i / 2 } else { -(i + 1) / 2 })
}

/// Roots of g lying in its coefficient field, with multiplicities.
pub fn roots_in_field(g: &CPoly, ctx: Option<&Arc<NumberField>>) -> Vec<(Coeff, usize)> {
    factor_c(g, ctx)
        .into_iter()
        .filter(|(h, _)| h.deg() == 1)
        .map(|(h, m)| (h.coeff(0).neg(), m))
        .collect()
}

/// Adjoins a root of the irreducible polynomial h (degree ≥ 2) to the field of its coefficients.
/// Returns the embedding of the old field and the new root.
pub fn adjoin_root(
    h: &CPoly,
    ctx: Option<&Arc<NumberField>>,
    bound: usize,
) -> Result<(Embedding, Coeff), RisoError> {
    let old = ctx.cloned().or_else(|| common_field(h.c.iter()));
    let old_deg = old.as_ref().map_or(1, |f| f.degree());
    let new_deg = old_deg * h.deg() as usize;
    if new_deg > bound {
        return Err(RisoError::ExtensionRequired(format!(
            "splitting requires degree {new_deg} > bound {bound} (polynomial of degree {})",
            h.deg()
        )));
    }
    let hm = h.monic();
    match old {
        None => {
            let mp = QPoly::new(hm.c.iter().map(|c| c.as_rational().unwrap().clone()).collect());
            let nf = NumberField::new(mp);
            let root = nf.gen();
            Ok((Embedding { from: None, to: nf, image: QPoly::zero() }, root))
        }
        Some(f) => {
            for k in shifts() {
                let nrm = shifted_norm(&hm, &f, k);
                if nrm.gcd(&nrm.deriv()).deg() != 0 {
                    continue;
                }
                let e = NumberField::new(nrm);
                let gamma = e.gen();
                // H(y) = h(γ - k y) with a ↦ y, over E
                let lin = CPoly::new(vec![gamma.clone(), Coeff::int(-k)]);
                let mut hy = CPoly::zero();
                for cj in hm.c.iter().rev() {
                    let cy = CPoly::new(cj.as_qpoly().c.into_iter().map(Coeff::Q).collect());
                    hy = hy.mul(&lin).add(&cy);
                }
                let my = CPoly::new(f.minpoly.c.iter().cloned().map(Coeff::Q).collect());
                let d = my.gcd(&hy);
                assert_eq!(d.deg(), 1, "primitive element gcd not linear");
                let alpha = d.coeff(0).neg();
                let alpha_q = alpha.as_qpoly();
                let beta = gamma.sub(&alpha.mul(&Coeff::int(k)));
                return Ok((Embedding { from: Some(f.clone()), to: e, image: alpha_q }, beta));
            }
            unreachable!("shift search exhausted")
        }
    }
}

/// e2 ∘ e1.
pub fn compose_embeddings(e1: &Embedding, e2: &Embedding) -> Embedding {
    match &e1.from {
        None => Embedding { from: None, to: e2.to.clone(), image: QPoly::zero() },
        Some(f0) => {
            let img = Coeff::nf(e1.to.clone(), e1.image.clone()).embed(e2);
            Embedding { from: Some(f0.clone()), to: e2.to.clone(), image: img.as_qpoly() }
        }
    }
}

pub fn embed_poly(p: &CPoly, e: &Embedding) -> CPoly {
    CPoly::new(p.c.iter().map(|c| c.embed(e)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn cp(v: &[i64]) -> CPoly {
        CPoly::new(v.iter().map(|&a| Coeff::int(a)).collect())
    }

    #[test]
    fn number_field_arithmetic() {
        let f = NumberField::new(QPoly::new(vec![rat(-2), rat(0), rat(1)]));
        let a = f.gen();
        assert_eq!(a.mul(&a), Coeff::int(2));
        let b = a.add(&Coeff::int(1));
        assert_eq!(b.mul(&b.inv()), Coeff::one());
        assert_eq!(a.to_string(), "a");
    }

    #[test]
    fn adjoin_and_split() {
        // x^2 + 1 over Q
        let (emb, i) = adjoin_root(&cp(&[1, 0, 1]), None, 24).unwrap();
        assert_eq!(i.mul(&i), Coeff::int(-1));
        // x^2 - 2 over Q(i): irreducible, adjoin to get Q(i, sqrt 2) of degree 4
        let g = embed_poly(&cp(&[-2, 0, 1]), &emb);
        let fs = factor_c(&g, Some(&emb.to));
        assert_eq!(fs.len(), 1);
        let (emb2, r) = adjoin_root(&g, Some(&emb.to), 24).unwrap();
        assert_eq!(emb2.to.degree(), 4);
        assert_eq!(r.mul(&r), Coeff::int(2));
        let i2 = i.embed(&emb2);
        assert_eq!(i2.mul(&i2), Coeff::int(-1));
        // x^4 + 1 splits completely over Q(i, sqrt 2)
        let h = embed_poly(&cp(&[1, 0, 0, 0, 1]), &Embedding { from: None, to: emb2.to.clone(), image: QPoly::zero() });
        let roots = roots_in_field(&h, Some(&emb2.to));
        assert_eq!(roots.len(), 4);
    }

    #[test]
    fn cube_roots_of_unity() {
        let (emb, w) = adjoin_root(&cp(&[1, 1, 1]), None, 24).unwrap();
        assert_eq!(w.mul(&w).mul(&w), Coeff::one());
        let e0 = Embedding { from: None, to: emb.to.clone(), image: QPoly::zero() };
        let roots = roots_in_field(&embed_poly(&cp(&[-1, 0, 0, 1]), &e0), Some(&emb.to));
        assert_eq!(roots.len(), 3);
        let roots = roots_in_field(&embed_poly(&cp(&[1, 1, 1]), &e0), Some(&emb.to));
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn extension_bound() {
        assert!(matches!(adjoin_root(&cp(&[1, 0, 1]), None, 1), Err(RisoError::ExtensionRequired(_))));
    }

    #[test]
    fn prime_field() {
        let a = Coeff::fp(5, 3);
        assert_eq!(a.mul(&a.inv()), Coeff::fp(5, 1));
        assert_eq!(a.add(&Coeff::int(2)), Coeff::fp(5, 0));
        assert!(a.add(&Coeff::int(2)).is_zero());
    }
}
