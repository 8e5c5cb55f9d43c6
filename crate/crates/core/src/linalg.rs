//! Fraction-free determinants over rings with exact division.

/// A commutative ring whose division is exact whenever the quotient exists.
pub trait ExactRing: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact quotient; the caller guarantees divisibility.
    fn exact_div(&self, o: &Self) -> Self;
}

/// Bareiss elimination. Consumes the square matrix.
pub fn bareiss_det<R: ExactRing>(mut m: Vec<Vec<R>>) -> R {
    let n = m.len();
    if n == 0 {
        panic!("determinant of empty matrix");
    }
    let mut sign_neg = false;
    let mut prev: Option<R> = None;
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign_neg = !sign_neg;
                }
                None => return R::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = match &prev {
                    Some(p) => v.exact_div(p),
                    None => v,
                };
            }
        }
        prev = Some(m[k][k].clone());
    }
    let d = m[n - 1][n - 1].clone();
    if sign_neg {
        d.neg()
    } else {
        d
    }
}

/// Sylvester matrix of two polynomials given by coefficient lists (low to high) over `R`.
pub fn sylvester<R: ExactRing>(a: &[R], b: &[R]) -> Vec<Vec<R>> {
    let m = a.len() - 1;
    let n = b.len() - 1;
    let size = m + n;
    let mut rows = vec![];
    for i in 0..n {
        let mut row = vec![R::zero(); size];
        for (j, c) in a.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![R::zero(); size];
        for (j, c) in b.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant of two polynomials of positive total size via the Sylvester determinant.
/// Degree-zero inputs follow the usual conventions.
pub fn resultant<R: ExactRing>(a: &[R], b: &[R], one: R) -> R {
    let m = a.len() as isize - 1;
    let n = b.len() as isize - 1;
    if m < 0 || n < 0 {
        return R::zero();
    }
    if m == 0 {
        return pow(&a[0], n as u32, one);
    }
    if n == 0 {
        return pow(&b[0], m as u32, one);
    }
    bareiss_det(sylvester(a, b))
}

fn pow<R: ExactRing>(a: &R, e: u32, one: R) -> R {
    let mut acc = one;
    for _ in 0..e {
        acc = acc.mul(a);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    impl ExactRing for BigInt {
        fn zero() -> Self {
            BigInt::from(0)
        }
        fn is_zero(&self) -> bool {
            num::Zero::is_zero(self)
        }
        fn mul(&self, o: &Self) -> Self {
            self * o
        }
        fn sub(&self, o: &Self) -> Self {
            self - o
        }
        fn neg(&self) -> Self {
            -self
        }
        fn exact_div(&self, o: &Self) -> Self {
            self / o
        }
    }

    #[test]
    fn integer_det_and_resultant() {
        let m: Vec<Vec<BigInt>> = vec![
            vec![2.into(), 3.into(), 1.into()],
            vec![4.into(), 1.into(), 5.into()],
            vec![0.into(), 2.into(), 7.into()],
        ];
        assert_eq!(bareiss_det(m), BigInt::from(-82));
        // res(x^2 - 1, x - 2) = (2^2 - 1) = 3
        let a: Vec<BigInt> = vec![(-1).into(), 0.into(), 1.into()];
        let b: Vec<BigInt> = vec![(-2).into(), 1.into()];
        assert_eq!(resultant(&a, &b, BigInt::from(1)), BigInt::from(3));
    }
}
