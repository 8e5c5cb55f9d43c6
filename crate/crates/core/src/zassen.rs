//! Factorization of univariate polynomials over ℚ: Berlekamp modulo a small prime,
//! quadratic Hensel lifting along a factor tree, and subset recombination.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::poly1::Poly1;

type QPoly = Poly1<BigRational>;

// ---------- arithmetic in F_p[x], coefficients low to high ----------

fn fp_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_inv(a: u64, p: u64) -> u64 {
    fp_pow(a, p - 2, p)
}

fn fp_pow(mut a: u64, mut e: u64, p: u64) -> u64 {
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

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    fp_trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    fp_trim(r)
}

fn fp_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = fp_trim(b.to_vec());
    let mut r = fp_trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![], r);
    }
    let li = fp_inv(*b.last().unwrap(), p);
    let db = b.len() - 1;
    let mut q = vec![0u64; r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db] * li % p;
        if c == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[k + j] = (r[k + j] + p - c * y % p) % p;
        }
        q[k] = c;
    }
    r.truncate(db);
    (fp_trim(q), fp_trim(r))
}

fn fp_monic(a: &[u64], p: u64) -> Vec<u64> {
    match a.last() {
        None => vec![],
        Some(&l) => {
            let li = fp_inv(l, p);
            a.iter().map(|&x| x * li % p).collect()
        }
    }
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (fp_trim(a.to_vec()), fp_trim(b.to_vec()));
    while !b.is_empty() {
        let r = fp_divrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    fp_monic(&a, p)
}

fn fp_deriv(a: &[u64], p: u64) -> Vec<u64> {
    fp_trim(a.iter().enumerate().skip(1).map(|(i, &x)| (i as u64 % p) * x % p).collect())
}

/// Berlekamp factorization of a monic squarefree polynomial over F_p.
fn berlekamp(f: &[u64], p: u64) -> Vec<Vec<u64>> {
    let n = f.len() - 1;
    if n <= 1 {
        return vec![f.to_vec()];
    }
    // rows: x^{ip} mod f
    let xp = {
        let mut acc = vec![1u64];
        let mut base = vec![0u64, 1];
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = fp_divrem(&fp_mul(&acc, &base, p), f, p).1;
            }
            base = fp_divrem(&fp_mul(&base, &base, p), f, p).1;
            e >>= 1;
        }
        acc
    };
    let mut rows = vec![vec![0u64; n]; n];
    let mut cur = vec![1u64];
    for row in rows.iter_mut() {
        for (j, &c) in cur.iter().enumerate() {
            row[j] = c;
        }
        cur = fp_divrem(&fp_mul(&cur, &xp, p), f, p).1;
    }
    // (Q - I)^T, nullspace gives v with v(x)^p = v(x) mod f
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut v = rows[j][i];
            if i == j {
                v = (v + p - 1) % p;
            }
            m[i][j] = v;
        }
    }
    let basis = nullspace(m, p);
    let r = basis.len();
    let mut factors = vec![f.to_vec()];
    if r == 1 {
        return factors;
    }
    for v in basis.iter() {
        let v = fp_trim(v.clone());
        if v.len() <= 1 {
            continue;
        }
        let mut next = vec![];
        for u in factors.into_iter() {
            if u.len() <= 2 {
                next.push(u);
                continue;
            }
            let mut rest = u;
            for s in 0..p {
                if rest.len() <= 2 {
                    break;
                }
                let mut vs = v.clone();
                vs[0] = (vs[0] + p - s) % p;
                let g = fp_gcd(&rest, &vs, p);
                if g.len() > 1 && g.len() < rest.len() {
                    rest = fp_monic(&fp_divrem(&rest, &g, p).0, p);
                    next.push(g);
                }
            }
            next.push(rest);
        }
        factors = next;
        if factors.len() == r {
            break;
        }
    }
    factors
}

fn nullspace(mut m: Vec<Vec<u64>>, p: u64) -> Vec<Vec<u64>> {
    let rows = m.len();
    let cols = m[0].len();
    let mut pivot_col = vec![usize::MAX; rows];
    let mut r = 0;
    let mut is_pivot = vec![false; cols];
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        let inv = fp_inv(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + p - f * m[r][j] % p) % p;
                }
            }
        }
        pivot_col[r] = c;
        is_pivot[c] = true;
        r += 1;
        if r == rows {
            break;
        }
    }
    let mut basis = vec![];
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for i in 0..r {
            v[pivot_col[i]] = (p - m[i][free]) % p;
        }
        basis.push(v);
    }
    basis
}

// ---------- arithmetic in (Z/m)[x] with BigInt ----------

fn zm(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

fn zm_trim(mut a: Vec<BigInt>) -> Vec<BigInt> {
    while a.last().map_or(false, |x| x.is_zero()) {
        a.pop();
    }
    a
}

fn zm_add(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    zm_trim((0..n).map(|i| zm(&(a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)), m)).collect())
}

fn zm_sub(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    zm_trim((0..n).map(|i| zm(&(a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)), m)).collect())
}

fn zm_mul(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    zm_trim(r.into_iter().map(|x| zm(&x, m)).collect())
}

/// Division by a monic polynomial modulo m.
fn zm_divrem_monic(a: &[BigInt], b: &[BigInt], m: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut r: Vec<BigInt> = a.iter().map(|x| zm(x, m)).collect();
    r = zm_trim(r);
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![BigInt::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[k + j] = zm(&(&r[k + j] - &c * y), m);
        }
        q[k] = c;
    }
    r.truncate(db);
    (zm_trim(q), zm_trim(r))
}

fn to_big(a: &[u64]) -> Vec<BigInt> {
    a.iter().map(|&x| BigInt::from(x)).collect()
}

fn fp_xgcd(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    // returns s, t with s a + t b = 1 (a, b coprime)
    let (mut r0, mut r1) = (fp_trim(a.to_vec()), fp_trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![1u64], vec![]);
    let (mut t0, mut t1) = (vec![], vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        r0 = std::mem::replace(&mut r1, r);
        let s2 = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        s0 = std::mem::replace(&mut s1, s2);
        let t2 = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let li = fp_inv(r0[0], p);
    (
        s0.iter().map(|&x| x * li % p).collect(),
        t0.iter().map(|&x| x * li % p).collect(),
    )
}

/// One quadratic Hensel step: f ≡ g h (mod m), s g + t h ≡ 1 (mod m), h monic.
#[allow(clippy::too_many_arguments)]
fn hensel_step(
    f: &[BigInt],
    g: &[BigInt],
    h: &[BigInt],
    s: &[BigInt],
    t: &[BigInt],
    m2: &BigInt,
) -> (Vec<BigInt>, Vec<BigInt>, Vec<BigInt>, Vec<BigInt>) {
    let e = zm_sub(f, &zm_mul(g, h, m2), m2);
    let (q, r) = zm_divrem_monic(&zm_mul(s, &e, m2), h, m2);
    let g2 = zm_add(&zm_add(g, &zm_mul(t, &e, m2), m2), &zm_mul(&q, g, m2), m2);
    let h2 = zm_add(h, &r, m2);
    let b = zm_sub(&zm_add(&zm_mul(s, &g2, m2), &zm_mul(t, &h2, m2), m2), &[BigInt::one()], m2);
    let (c, d) = zm_divrem_monic(&zm_mul(s, &b, m2), &h2, m2);
    let s2 = zm_sub(s, &d, m2);
    let t2 = zm_sub(&zm_sub(t, &zm_mul(t, &b, m2), m2), &zm_mul(&c, &g2, m2), m2);
    (g2, h2, s2, t2)
}

/// Lifts a factorization of the monic `f` (mod p) into monic factors modulo p^(2^k) ≥ bound.
fn multifactor_lift(f: &[BigInt], facs: &[Vec<u64>], p: u64, levels: u32) -> Vec<Vec<BigInt>> {
    if facs.len() == 1 {
        return vec![f.to_vec()];
    }
    let mid = facs.len() / 2;
    let pm = BigInt::from(p);
    let mut g = vec![1u64];
    for a in &facs[..mid] {
        g = fp_mul(&g, a, p);
    }
    let mut h = vec![1u64];
    for a in &facs[mid..] {
        h = fp_mul(&h, a, p);
    }
    let (s, t) = fp_xgcd(&g, &h, p);
    let (mut g, mut h, mut s, mut t) = (to_big(&g), to_big(&h), to_big(&s), to_big(&t));
    let mut m = pm;
    for _ in 0..levels {
        m = &m * &m;
        let r = hensel_step(f, &g, &h, &s, &t, &m);
        g = r.0;
        h = r.1;
        s = r.2;
        t = r.3;
    }
    let mut out = multifactor_lift(&g, &facs[..mid], p, levels);
    out.extend(multifactor_lift(&h, &facs[mid..], p, levels));
    out
}

fn symmetric(a: &BigInt, m: &BigInt) -> BigInt {
    let r = a.mod_floor(m);
    if &r + &r > *m {
        r - m
    } else {
        r
    }
}

fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

fn primitive(a: Vec<BigInt>) -> Vec<BigInt> {
    let c = content(&a);
    if c.is_zero() {
        return a;
    }
    let sign = if a.last().map_or(false, |x| x.is_negative()) { -BigInt::one() } else { BigInt::one() };
    a.into_iter().map(|x| x / &c * &sign).collect()
}

/// Exact division over Z; None if not divisible.
fn zdiv(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    if r.len() < b.len() {
        return None;
    }
    let lb = b.last().unwrap();
    let mut q = vec![BigInt::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let (c, rem) = r[k + db].div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        for (j, y) in b.iter().enumerate() {
            r[k + j] -= &c * y;
        }
        q[k] = c;
    }
    if r.iter().all(|x| x.is_zero()) {
        Some(q)
    } else {
        None
    }
}

const PRIMES: [u64; 30] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127,
];

/// Factors a primitive squarefree integer polynomial of positive degree.
fn factor_squarefree_z(f: Vec<BigInt>) -> Vec<Vec<BigInt>> {
    let n = f.len() - 1;
    if n == 1 {
        return vec![f];
    }
    let lc = f[n].clone();
    let mut chosen = None;
    for &p in PRIMES.iter() {
        let pb = BigInt::from(p);
        if (&lc % &pb).is_zero() {
            continue;
        }
        let fp: Vec<u64> = f.iter().map(|x| x.mod_floor(&pb).to_u64().unwrap()).collect();
        let fp = fp_monic(&fp_trim(fp), p);
        if fp_gcd(&fp, &fp_deriv(&fp, p), p).len() != 1 {
            continue;
        }
        let facs = berlekamp(&fp, p);
        let better = match &chosen {
            None => true,
            Some((_, ref fs)) => facs.len() < Vec::<Vec<u64>>::len(fs),
        };
        if better {
            chosen = Some((p, facs));
        }
        if chosen.as_ref().map_or(false, |c| c.1.len() <= 2) {
            break;
        }
    }
    let (p, facs) = chosen.expect("no suitable prime");
    if facs.len() == 1 {
        return vec![f];
    }
    // coefficient bound for factors times lc
    let norm2: BigInt = f.iter().map(|x| x * x).sum();
    let bound = (norm2.sqrt() + 1u32) * (BigInt::one() << n) * lc.abs() * 2u32;
    let mut levels = 0u32;
    let mut m = BigInt::from(p);
    while m <= bound {
        m = &m * &m;
        levels += 1;
    }
    let lc_inv = lc.modinv(&m).expect("lc invertible");
    let fm: Vec<BigInt> = f.iter().map(|x| (x * &lc_inv).mod_floor(&m)).collect();
    let mut lifted = multifactor_lift(&fm, &facs, p, levels);

    let mut out = vec![];
    let mut rest = f;
    let mut size = 1;
    while 2 * size <= lifted.len() {
        let mut found = false;
        let idx: Vec<usize> = (0..lifted.len()).collect();
        for sub in combinations(&idx, size) {
            let lcr = rest.last().unwrap().clone();
            let mut g = vec![lcr];
            for &i in &sub {
                g = zm_mul(&g, &lifted[i], &m);
            }
            let g: Vec<BigInt> = g.iter().map(|x| symmetric(x, &m)).collect();
            let g = primitive(g);
            if let Some(q) = zdiv(&rest, &g) {
                out.push(g);
                rest = primitive(q);
                let mut keep = vec![];
                for (i, l) in lifted.into_iter().enumerate() {
                    if !sub.contains(&i) {
                        keep.push(l);
                    }
                }
                lifted = keep;
                found = true;
                break;
            }
        }
        if !found {
            size += 1;
        }
    }
    out.push(rest);
    out
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

fn to_integer_primitive(f: &QPoly) -> Vec<BigInt> {
    let l = f.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    primitive(f.c.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect())
}

fn to_monic_q(a: &[BigInt]) -> QPoly {
    Poly1::new(a.iter().map(|x| BigRational::from_integer(x.clone())).collect()).monic()
}

/// Monic irreducible factors over ℚ with multiplicities, sorted by (degree, coefficients).
pub fn factor_q(f: &QPoly) -> Vec<(QPoly, usize)> {
    let mut out = vec![];
    for (g, mult) in f.squarefree_decomposition() {
        let gz = to_integer_primitive(&g);
        // pull out x factors first
        let mut gz = gz;
        if gz[0].is_zero() {
            out.push((QPoly::x(), mult));
            gz.remove(0);
        }
        if gz.len() <= 1 {
            continue;
        }
        for h in factor_squarefree_z(gz) {
            out.push((to_monic_q(&h), mult));
        }
    }
    out.sort_by(|a, b| {
        a.0.deg().cmp(&b.0.deg()).then_with(|| format!("{:?}", a.0.c).cmp(&format!("{:?}", b.0.c)))
    });
    out
}

/// Rational roots of f with multiplicities.
pub fn rational_roots(f: &QPoly) -> Vec<(BigRational, usize)> {
    factor_q(f)
        .into_iter()
        .filter(|(g, _)| g.deg() == 1)
        .map(|(g, m)| (-g.coeff(0), m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn p(v: &[i64]) -> QPoly {
        Poly1::new(v.iter().map(|&a| rat(a)).collect())
    }

    fn product(fs: &[(QPoly, usize)]) -> QPoly {
        fs.iter().fold(QPoly::one(), |acc, (g, m)| acc.mul(&g.pow(*m as u32)))
    }

    #[test]
    fn factors_x4_minus_4() {
        let f = p(&[-4, 0, 0, 0, 1]);
        let fs = factor_q(&f);
        assert_eq!(fs, vec![(p(&[-2, 0, 1]), 1), (p(&[2, 0, 1]), 1)]);
    }

    #[test]
    fn swinnerton_dyer_like_irreducible() {
        // x^4 - 10x^2 + 1 is irreducible over Q but splits mod every prime
        let f = p(&[1, 0, -10, 0, 1]);
        assert_eq!(factor_q(&f).len(), 1);
    }

    #[test]
    fn mixed_product_roundtrip() {
        let f = p(&[3, 2]).mul(&p(&[1, 0, 1]).pow(2)).mul(&p(&[-5, 1, 0, 7])).mul(&p(&[0, 1]));
        let fs = factor_q(&f);
        assert_eq!(product(&fs), f.monic());
        assert_eq!(fs.len(), 4);
        let roots = rational_roots(&f);
        assert!(roots.contains(&(BigRational::new((-3).into(), 2.into()), 1)));
        assert!(roots.contains(&(rat(0), 1)));
    }

    #[test]
    fn cyclotomic_pieces() {
        // x^6 - 1 = (x-1)(x+1)(x^2+x+1)(x^2-x+1)
        let fs = factor_q(&p(&[-1, 0, 0, 0, 0, 0, 1]));
        assert_eq!(fs.len(), 4);
        assert_eq!(product(&fs), p(&[-1, 0, 0, 0, 0, 0, 1]));
    }
}
