//! Prime-field arithmetic, dual numbers over any [`Scalar`], exact rank, and a
//! small arithmetic-circuit type used to test forward differentiation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default primes, tried in order.
pub const DEFAULT_PRIMES: [u64; 3] = [32003, 1000003, 2147483647];

/// Residue modulo a prime `q < 2^32`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    v: u64,
    q: u64,
}

impl Fp {
    pub fn new(v: i64, q: u64) -> Self {
        debug_assert!(q > 1 && q < 1 << 32);
        Fp {
            v: v.rem_euclid(q as i64) as u64,
            q,
        }
    }

    pub fn from_residue(v: u64, q: u64) -> Self {
        Fp { v: v % q, q }
    }

    pub fn residue(&self) -> u64 {
        self.v
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = self.constant(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.v, self.q)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        let s = self.v + o.v;
        Fp {
            v: if s >= self.q { s - self.q } else { s },
            q: self.q,
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        Fp {
            v: if self.v >= o.v { self.v - o.v } else { self.v + self.q - o.v },
            q: self.q,
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp {
            v: self.v * o.v % self.q,
            q: self.q,
        }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp {
            v: if self.v == 0 { 0 } else { self.q - self.v },
            q: self.q,
        }
    }
}

impl Scalar for Fp {
    fn constant(&self, n: i64) -> Self {
        Fp::new(n, self.q)
    }

    fn inv(&self) -> Option<Self> {
        (self.v != 0).then(|| self.pow(self.q - 2))
    }

    fn is_zero(&self) -> bool {
        self.v == 0
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn constant_of(re: T) -> Self {
        let eps = re.zero_like();
        Dual { re, eps }
    }

    /// The variable `re` seeded with derivative one.
    pub fn variable(re: T) -> Self {
        let eps = re.one_like();
        Dual { re, eps }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual {
            re: self.re + o.re,
            eps: self.eps + o.eps,
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual {
            re: self.re - o.re,
            eps: self.eps - o.eps,
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual {
            re: self.re.clone() * o.re.clone(),
            eps: self.re * o.eps + self.eps * o.re,
        }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            re: -self.re,
            eps: -self.eps,
        }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(&self, n: i64) -> Self {
        Dual::constant_of(self.re.constant(n))
    }

    fn inv(&self) -> Option<Self> {
        let r = self.re.inv()?;
        let eps = -(self.eps.clone() * r.clone() * r.clone());
        Some(Dual { re: r, eps })
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

/// Dense matrix over `F_q`, row-major residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    q: u64,
    data: Vec<u64>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize, q: u64) -> Self {
        FieldMatrix {
            rows,
            cols,
            q,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Fp>], q: u64) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = FieldMatrix::zeros(rows.len(), cols, q);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, *x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> Fp {
        Fp { v: self.data[i * self.cols + j], q: self.q }
    }

    pub fn set(&mut self, i: usize, j: usize, x: Fp) {
        debug_assert_eq!(x.q, self.q);
        self.data[i * self.cols + j] = x.v;
    }

    pub fn mul(&self, other: &FieldMatrix) -> FieldMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = FieldMatrix::zeros(self.rows, other.cols, self.q);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = (out.data[idx] + a * other.data[k * other.cols + j]) % self.q;
                }
            }
        }
        out
    }

    /// Reduces the matrix in place to row echelon form restricted to the
    /// columns `cols`, returning the number of pivots found there. Pivot
    /// rows are moved to the top.
    pub fn eliminate_columns(&mut self, cols: std::ops::Range<usize>) -> usize {
        let q = self.q;
        let mut r = 0;
        for c in cols {
            let Some(p) = (r..self.rows).find(|&i| self.data[i * self.cols + c] != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = Fp { v: self.data[r * self.cols + c], q }.inv().unwrap().v;
            for j in c..self.cols {
                let idx = r * self.cols + j;
                self.data[idx] = self.data[idx] * inv % q;
            }
            for i in r + 1..self.rows {
                let f = self.data[i * self.cols + c];
                if f == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let sub = f * self.data[r * self.cols + j] % q;
                    let idx = i * self.cols + j;
                    self.data[idx] = (self.data[idx] + q - sub) % q;
                }
            }
            r += 1;
            if r == self.rows {
                break;
            }
        }
        r
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Rows `from..` as a new matrix.
    pub fn tail_rows(&self, from: usize) -> FieldMatrix {
        FieldMatrix {
            rows: self.rows - from,
            cols: self.cols,
            q: self.q,
            data: self.data[from * self.cols..].to_vec(),
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate_columns(0..self.cols)
    }
}

/// Arithmetic circuit over `+ - × ÷` and integer constants.
#[derive(Clone, Debug, PartialEq)]
pub enum Circuit {
    Var(usize),
    Const(i64),
    Add(Box<Circuit>, Box<Circuit>),
    Sub(Box<Circuit>, Box<Circuit>),
    Mul(Box<Circuit>, Box<Circuit>),
    Div(Box<Circuit>, Box<Circuit>),
}

impl Circuit {
    pub fn var(i: usize) -> Self {
        Circuit::Var(i)
    }

    /// Evaluates at `point`; constants are taken from the field of `point[0]`.
    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<T> {
        let anchor = point.first().ok_or(Error::Degenerate("empty evaluation point"))?;
        self.eval_with(point, anchor)
    }

    fn eval_with<T: Scalar>(&self, point: &[T], anchor: &T) -> Result<T> {
        use Circuit::*;
        Ok(match self {
            Var(i) => point[*i].clone(),
            Const(c) => anchor.constant(*c),
            Add(a, b) => a.eval_with(point, anchor)? + b.eval_with(point, anchor)?,
            Sub(a, b) => a.eval_with(point, anchor)? - b.eval_with(point, anchor)?,
            Mul(a, b) => a.eval_with(point, anchor)? * b.eval_with(point, anchor)?,
            Div(a, b) => a
                .eval_with(point, anchor)?
                .div(&b.eval_with(point, anchor)?)
                .ok_or(Error::Degenerate("division by zero in circuit"))?,
        })
    }

    /// Value and partial derivative along variable `direction`.
    pub fn dual_eval<T: Scalar>(&self, point: &[T], direction: usize) -> Result<Dual<T>> {
        let seeded: Vec<Dual<T>> = point
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if i == direction {
                    Dual::variable(x.clone())
                } else {
                    Dual::constant_of(x.clone())
                }
            })
            .collect();
        self.eval(&seeded)
    }
}

impl Add for Circuit {
    type Output = Circuit;
    fn add(self, o: Circuit) -> Circuit {
        Circuit::Add(Box::new(self), Box::new(o))
    }
}

impl Sub for Circuit {
    type Output = Circuit;
    fn sub(self, o: Circuit) -> Circuit {
        Circuit::Sub(Box::new(self), Box::new(o))
    }
}

impl Mul for Circuit {
    type Output = Circuit;
    fn mul(self, o: Circuit) -> Circuit {
        Circuit::Mul(Box::new(self), Box::new(o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Q: u64 = 32003;

    fn fp(v: i64) -> Fp {
        Fp::new(v, Q)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> FieldMatrix {
        let rows: Vec<Vec<Fp>> = (0..r)
            .map(|_| (0..c).map(|_| Fp::from_residue(rng.random_range(0..Q), Q)).collect())
            .collect();
        FieldMatrix::from_rows(&rows, Q)
    }

    #[test]
    fn field_axioms_spot_checks() {
        assert_eq!(fp(-1).residue(), Q - 1);
        assert_eq!(fp(7).inv().unwrap() * fp(7), fp(1));
        assert!(fp(0).inv().is_none());
        assert_eq!(fp(3) - fp(5), fp(-2));
        let big = Fp::new(2147483646, 2147483647);
        assert_eq!((big * big).residue(), 1);
    }

    #[test]
    fn rank_examples() {
        let mut id = FieldMatrix::zeros(3, 3, Q);
        for i in 0..3 {
            id.set(i, i, fp(1));
        }
        assert_eq!(id.rank(), 3);
        assert_eq!(FieldMatrix::zeros(4, 2, Q).rank(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let planted = random_matrix(&mut rng, 5, 3).mul(&random_matrix(&mut rng, 3, 5));
        assert_eq!(planted.rank(), 3);
    }

    #[test]
    fn dual_examples() {
        let sq = Circuit::var(0) * Circuit::var(0);
        let d = sq.dual_eval(&[fp(5)], 0).unwrap();
        assert_eq!((d.re, d.eps), (fp(25), fp(10)));
        let xy = Circuit::var(0) * Circuit::var(1);
        assert_eq!(xy.dual_eval(&[fp(2), fp(3)], 0).unwrap().eps, fp(3));
        let inv = Circuit::Div(Box::new(Circuit::Const(1)), Box::new(Circuit::var(0)));
        assert!(inv.dual_eval(&[fp(0)], 0).is_err());
        // d/dx 1/x = -1/x^2
        assert_eq!(inv.dual_eval(&[fp(4)], 0).unwrap().eps, -fp(16).inv().unwrap());
    }
}
