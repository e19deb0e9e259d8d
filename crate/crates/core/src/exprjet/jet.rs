use std::ops::{Add, Mul, Neg, Sub};

/// Value and all partial derivatives through third order of a scalar function of `m` variables.
///
/// Only the sorted index tuples are computed; the remaining entries are copies, so `h` and `t`
/// are symmetric bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    m: usize,
    v: f64,
    g: Vec<f64>,
    h: Vec<f64>,
    t: Vec<f64>,
}

impl Jet3 {
    pub fn constant(value: f64, m: usize) -> Jet3 {
        Jet3 {
            m,
            v: value,
            g: vec![0.0; m],
            h: vec![0.0; m * m],
            t: vec![0.0; m * m * m],
        }
    }

    /// The jet of the coordinate function `x_i` (0-based) at a point where it takes `value`.
    pub fn variable(value: f64, i: usize, m: usize) -> Jet3 {
        let mut jet = Jet3::constant(value, m);
        jet.g[i] = 1.0;
        jet
    }

    /// Seeds one variable jet per coordinate of `point`.
    pub fn seed(point: &[f64]) -> Vec<Jet3> {
        let m = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet3::variable(x, i, m))
            .collect()
    }

    /// Builds a jet from full derivative arrays; entries are read at sorted indices only.
    pub fn from_parts(
        value: f64,
        grad: &[f64],
        hess: impl Fn(usize, usize) -> f64,
        third: impl Fn(usize, usize, usize) -> f64,
    ) -> Jet3 {
        let m = grad.len();
        let mut jet = Jet3::constant(value, m);
        jet.g.copy_from_slice(grad);
        jet.fill(hess, third);
        jet
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn value(&self) -> f64 {
        self.v
    }

    pub fn grad(&self) -> &[f64] {
        &self.g
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.g[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.m + j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.t[(i * self.m + j) * self.m + k]
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().all(|x| x.is_finite())
            && self.t.iter().all(|x| x.is_finite())
    }

    /// Fills `h` and `t` from closures evaluated at sorted indices `i <= j (<= k)`.
    fn fill(
        &mut self,
        hess: impl Fn(usize, usize) -> f64,
        third: impl Fn(usize, usize, usize) -> f64,
    ) {
        let m = self.m;
        let mut h = vec![0.0; m * m];
        let mut t = vec![0.0; m * m * m];
        for i in 0..m {
            for j in i..m {
                let v = hess(i, j);
                h[i * m + j] = v;
                h[j * m + i] = v;
                for k in j..m {
                    let w = third(i, j, k);
                    for (a, b, c) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        t[(a * m + b) * m + c] = w;
                    }
                }
            }
        }
        self.h = h;
        self.t = t;
    }

    /// Applies a scalar function given its derivatives `d = [phi, phi', phi'', phi''']` at the value.
    pub fn compose(&self, d: [f64; 4]) -> Jet3 {
        let [d0, d1, d2, d3] = d;
        let mut out = Jet3::constant(d0, self.m);
        for (o, &w) in out.g.iter_mut().zip(&self.g) {
            *o = d1 * w;
        }
        let w = self;
        out.fill(
            |i, j| d2 * w.g[i] * w.g[j] + d1 * w.d2(i, j),
            |i, j, k| {
                d3 * w.g[i] * w.g[j] * w.g[k]
                    + d2 * (w.d2(i, j) * w.g[k] + w.d2(i, k) * w.g[j] + w.d2(j, k) * w.g[i])
                    + d1 * w.d3(i, j, k)
            },
        );
        out
    }

    pub fn scale(&self, c: f64) -> Jet3 {
        Jet3 {
            m: self.m,
            v: c * self.v,
            g: self.g.iter().map(|x| c * x).collect(),
            h: self.h.iter().map(|x| c * x).collect(),
            t: self.t.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Jet3 {
        let mut out = self.clone();
        out.v += c;
        out
    }

    /// `1/self`; the caller guarantees a nonzero value.
    pub fn recip(&self) -> Jet3 {
        let r = 1.0 / self.v;
        let r2 = r * r;
        self.compose([r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2])
    }

    pub fn powi(&self, exp: u32) -> Jet3 {
        match exp {
            0 => Jet3::constant(1.0, self.m),
            1 => self.clone(),
            _ => {
                let half = self.powi(exp / 2);
                let sq = &half * &half;
                if exp % 2 == 1 {
                    &sq * self
                } else {
                    sq
                }
            }
        }
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.v.exp();
        self.compose([e, e, e, e])
    }

    /// Natural log; the caller guarantees a positive value.
    pub fn ln(&self) -> Jet3 {
        let r = 1.0 / self.v;
        self.compose([self.v.ln(), r, -r * r, 2.0 * r * r * r])
    }

    /// Square root; the caller guarantees a positive value.
    pub fn sqrt(&self) -> Jet3 {
        let s = self.v.sqrt();
        let r = 1.0 / self.v;
        self.compose([s, 0.5 / s, -0.25 / s * r, 0.375 / s * r * r])
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.v.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.v.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tanh(&self) -> Jet3 {
        let th = self.v.tanh();
        let sech2 = 1.0 - th * th;
        self.compose([th, sech2, -2.0 * th * sech2, sech2 * (6.0 * th * th - 2.0)])
    }
}

fn check_arity(a: &Jet3, b: &Jet3) {
    assert_eq!(a.m, b.m, "jet arity mismatch");
}

impl Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        check_arity(self, rhs);
        Jet3 {
            m: self.m,
            v: self.v + rhs.v,
            g: self.g.iter().zip(&rhs.g).map(|(a, b)| a + b).collect(),
            h: self.h.iter().zip(&rhs.h).map(|(a, b)| a + b).collect(),
            t: self.t.iter().zip(&rhs.t).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        check_arity(self, rhs);
        Jet3 {
            m: self.m,
            v: self.v - rhs.v,
            g: self.g.iter().zip(&rhs.g).map(|(a, b)| a - b).collect(),
            h: self.h.iter().zip(&rhs.h).map(|(a, b)| a - b).collect(),
            t: self.t.iter().zip(&rhs.t).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        check_arity(self, rhs);
        let (a, b) = (self, rhs);
        let mut out = Jet3::constant(a.v * b.v, a.m);
        for i in 0..a.m {
            out.g[i] = a.g[i] * b.v + a.v * b.g[i];
        }
        out.fill(
            |i, j| a.d2(i, j) * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.d2(i, j),
            |i, j, k| {
                a.d3(i, j, k) * b.v
                    + a.d2(i, j) * b.g[k]
                    + a.d2(i, k) * b.g[j]
                    + a.d2(j, k) * b.g[i]
                    + a.g[i] * b.d2(j, k)
                    + a.g[j] * b.d2(i, k)
                    + a.g[k] * b.d2(i, j)
                    + a.v * b.d3(i, j, k)
            },
        );
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: Jet3) -> Jet3 {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_monomials() {
        // x*y*z at (1,2,3): d3/dxdydz = 1
        let v = Jet3::seed(&[1.0, 2.0, 3.0]);
        let p = &(&v[0] * &v[1]) * &v[2];
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.grad(), &[6.0, 3.0, 2.0]);
        assert_eq!(p.d2(0, 1), 3.0);
        assert_eq!(p.d3(2, 0, 1), 1.0);
        assert_eq!(p.d3(0, 0, 1), 0.0);
    }

    #[test]
    fn cube_via_powi() {
        let x = Jet3::variable(2.0, 0, 1);
        let c = x.powi(3);
        assert_eq!(
            (c.value(), c.d1(0), c.d2(0, 0), c.d3(0, 0, 0)),
            (8.0, 12.0, 12.0, 6.0)
        );
    }

    #[test]
    fn recip_derivatives() {
        let x = Jet3::variable(2.0, 0, 1);
        let r = x.recip();
        assert_eq!(r.value(), 0.5);
        assert_eq!(r.d1(0), -0.25);
        assert_eq!(r.d2(0, 0), 0.25);
        assert_eq!(r.d3(0, 0, 0), -0.375);
    }
}
