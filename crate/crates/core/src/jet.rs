//! Second-order forward derivatives: [`Taylor2`] in one radial variable and
//! [`Jet2`] in the bipolar pair `(u, rho) = (|v|, |v - q|)`.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::float::Float as _;
use core::ops::{Add, Mul, Neg, Sub};

/// Value with first and second derivative in a scalar argument.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Taylor2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Taylor2 {
    pub const fn constant(v: f64) -> Self {
        Taylor2 { v, d1: 0.0, d2: 0.0 }
    }

    /// `x^a` at `x > 0`.
    pub fn power(x: f64, a: f64) -> Self {
        let v = x.powf(a);
        Taylor2 {
            v,
            d1: a * v / x,
            d2: a * (a - 1.0) * v / (x * x),
        }
    }

    /// `(1 + x^2)^(-lambda)`.
    pub fn japanese_neg(x: f64, lambda: f64) -> Self {
        let q = 1.0 + x * x;
        let v = q.powf(-lambda);
        let d1 = -2.0 * lambda * x * v / q;
        let d2 = -2.0 * lambda * v / q * (1.0 - (2.0 * lambda + 2.0) * x * x / q);
        Taylor2 { v, d1, d2 }
    }

    pub fn scale(self, c: f64) -> Self {
        Taylor2 {
            v: self.v * c,
            d1: self.d1 * c,
            d2: self.d2 * c,
        }
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;
    fn add(self, o: Taylor2) -> Taylor2 {
        Taylor2 {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Taylor2 {
    type Output = Taylor2;
    fn sub(self, o: Taylor2) -> Taylor2 {
        Taylor2 {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
        }
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;
    fn mul(self, o: Taylor2) -> Taylor2 {
        Taylor2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

/// Value, gradient and Hessian in the two variables `(u, rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub du: f64,
    pub dr: f64,
    pub duu: f64,
    pub drr: f64,
    pub dur: f64,
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Jet2 {
            v,
            du: 0.0,
            dr: 0.0,
            duu: 0.0,
            drr: 0.0,
            dur: 0.0,
        }
    }

    pub fn of_u(t: Taylor2) -> Self {
        Jet2 {
            v: t.v,
            du: t.d1,
            duu: t.d2,
            ..Jet2::constant(0.0)
        }
    }

    pub fn of_rho(t: Taylor2) -> Self {
        Jet2 {
            v: t.v,
            dr: t.d1,
            drr: t.d2,
            ..Jet2::constant(0.0)
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet2 {
            v: self.v * c,
            du: self.du * c,
            dr: self.dr * c,
            duu: self.duu * c,
            drr: self.drr * c,
            dur: self.dur * c,
        }
    }

    pub fn recip(self) -> Self {
        let g = self.v;
        let g2 = g * g;
        let g3 = g2 * g;
        Jet2 {
            v: 1.0 / g,
            du: -self.du / g2,
            dr: -self.dr / g2,
            duu: -self.duu / g2 + 2.0 * self.du * self.du / g3,
            drr: -self.drr / g2 + 2.0 * self.dr * self.dr / g3,
            dur: -self.dur / g2 + 2.0 * self.du * self.dr / g3,
        }
    }

    /// Laplacian in `v` of `H(|v|, |v - q|)` with `|q| = s`.
    pub fn laplacian(&self, u: f64, rho: f64, s: f64) -> f64 {
        let cos = (u * u + rho * rho - s * s) / (2.0 * u * rho);
        self.duu + 2.0 * self.du / u + self.drr + 2.0 * self.dr / rho + 2.0 * self.dur * cos
    }

    /// Squared gradient norm in `v`.
    pub fn grad_sq(&self, u: f64, rho: f64, s: f64) -> f64 {
        let cos = (u * u + rho * rho - s * s) / (2.0 * u * rho);
        self.du * self.du + self.dr * self.dr + 2.0 * self.du * self.dr * cos
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            du: self.du + o.du,
            dr: self.dr + o.dr,
            duu: self.duu + o.duu,
            drr: self.drr + o.drr,
            dur: self.dur + o.dur,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            du: self.du * o.v + self.v * o.du,
            dr: self.dr * o.v + self.v * o.dr,
            duu: self.duu * o.v + 2.0 * self.du * o.du + self.v * o.duu,
            drr: self.drr * o.v + 2.0 * self.dr * o.dr + self.v * o.drr,
            dur: self.dur * o.v + self.du * o.dr + self.dr * o.du + self.v * o.dur,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn japanese_bracket_derivatives() {
        let h = 1e-5;
        for &x in &[0.0, 0.3, 1.0, 4.0] {
            let t = Taylor2::japanese_neg(x, 3.25);
            let f = |y: f64| (1.0 + y * y).powf(-3.25);
            assert!((t.d1 - (f(x + h) - f(x - h)) / (2.0 * h)).abs() < 1e-8);
            assert!((t.d2 - (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)).abs() < 1e-5);
        }
    }

    #[test]
    fn bipolar_laplacian_matches_stencil() {
        // H = u^2 rho^3 / (1 + u rho) sampled in 3D around q = (s, 0, 0).
        let s = 1.3;
        let q = [s, 0.0, 0.0];
        let field = |x: [f64; 3]| -> f64 {
            let u: f64 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let d = [x[0] - q[0], x[1] - q[1], x[2] - q[2]];
            let r: f64 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            u * u * r * r * r / (1.0 + u * r)
        };
        let x: [f64; 3] = [0.4, 0.7, -0.2];
        let u: f64 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let d = [x[0] - s, x[1], x[2]];
        let r: f64 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let ju = Jet2::of_u(Taylor2::power(u, 2.0));
        let jr = Jet2::of_rho(Taylor2::power(r, 3.0));
        let den = Jet2::constant(1.0)
            + Jet2 {
                v: u * r,
                du: r,
                dr: u,
                dur: 1.0,
                ..Jet2::constant(0.0)
            };
        let jet = ju * jr * den.recip();
        let h = 1e-3;
        let mut lap = 0.0;
        for i in 0..3 {
            let mut a = x;
            let mut b = x;
            a[i] += h;
            b[i] -= h;
            lap += (field(a) - 2.0 * field(x) + field(b)) / (h * h);
        }
        assert!((jet.v - field(x)).abs() < 1e-14);
        assert!((jet.laplacian(u, r, s) - lap).abs() < 1e-5 * lap.abs().max(1.0));
    }
}
