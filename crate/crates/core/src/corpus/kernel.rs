//! Symbolic one-variable kernels closed under differentiation and integration.

use crate::jet::{bump, smooth_step, Jet};
use crate::quadrature::integrate;
use crate::scalar::factorial;

const CAUCHY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Profile {
    /// `exp(-1/(1-u²))` on the affine image of `[a, b]` onto `[-1, 1]`.
    Bump { a: f64, b: f64 },
    /// `x · χ(x)` with `χ = 1` on `[-r, r]` and `χ = 0` outside `[-2r, 2r]`.
    Cutoff { r: f64 },
}

impl Profile {
    pub(crate) fn jet(&self, x: f64, order: usize) -> Jet {
        let t = Jet::variable(x, order);
        match *self {
            Profile::Bump { a, b } => bump(&t.scale(2.0 / (b - a)).add_const(-(a + b) / (b - a))),
            Profile::Cutoff { r } => {
                if x.abs() <= r {
                    return t;
                }
                let u = if x > 0.0 {
                    (-&t).scale(1.0 / r).add_const(2.0)
                } else {
                    t.scale(1.0 / r).add_const(2.0)
                };
                &t * &smooth_step(&u)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Kernel {
    /// `amp · sin(freq·x + quarter·π/2)`.
    Sinusoid { amp: f64, freq: f64, quarter: u8 },
    /// Ascending coefficients.
    Poly(Vec<f64>),
    Exp { coef: f64 },
    /// `coef · sign(x)^sign_power · |x|^exponent`.
    PowerAbs { coef: f64, sign_power: u32, exponent: f64 },
    /// `coef · x^n · log(1/|x|)`, zero at the origin.
    XnLog { coef: f64, n: u32 },
    /// `order`-th derivative of a smooth profile.
    Profile { profile: Profile, order: usize },
    /// `∫_0^x (x-t)^{m-1}/(m-1)! inner(t) dt`.
    Cauchy { m: usize, inner: Box<Kernel> },
    Sum(Vec<Kernel>),
}

fn quarter_sin(theta: f64, quarter: u8) -> f64 {
    match quarter % 4 {
        0 => theta.sin(),
        1 => theta.cos(),
        2 => -theta.sin(),
        _ => -theta.cos(),
    }
}

impl Kernel {
    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self {
            Kernel::Sinusoid { amp, freq, quarter } => amp * quarter_sin(freq * x, *quarter),
            Kernel::Poly(c) => c.iter().rev().fold(0.0, |acc, a| acc * x + a),
            Kernel::Exp { coef } => coef * x.exp(),
            Kernel::PowerAbs {
                coef,
                sign_power,
                exponent,
            } => {
                let sign = if sign_power % 2 == 0 { 1.0 } else { x.signum() };
                if x == 0.0 {
                    return if *exponent > 0.0 || sign_power % 2 == 1 { 0.0 } else { *coef };
                }
                coef * sign * x.abs().powf(*exponent)
            }
            Kernel::XnLog { coef, n } => {
                if x == 0.0 {
                    if *n == 0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    -coef * x.powi(*n as i32) * x.abs().ln()
                }
            }
            Kernel::Profile { profile, order } => profile.jet(x, *order).derivative(*order),
            Kernel::Cauchy { m, inner } => {
                let w = factorial(m - 1);
                let m = *m as i32;
                integrate(|t| (x - t).powi(m - 1) / w * inner.eval(t), 0.0, x, CAUCHY_TOL)
            }
            Kernel::Sum(parts) => parts.iter().map(|k| k.eval(x)).sum(),
        }
    }

    pub(crate) fn derive(&self) -> Kernel {
        match self {
            Kernel::Sinusoid { amp, freq, quarter } => Kernel::Sinusoid {
                amp: amp * freq,
                freq: *freq,
                quarter: (quarter + 1) % 4,
            },
            Kernel::Poly(c) => Kernel::Poly(if c.len() <= 1 {
                vec![0.0]
            } else {
                c.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect()
            }),
            Kernel::Exp { coef } => Kernel::Exp { coef: *coef },
            Kernel::PowerAbs {
                coef,
                sign_power,
                exponent,
            } => {
                if *exponent == 0.0 {
                    Kernel::Poly(vec![0.0])
                } else {
                    Kernel::PowerAbs {
                        coef: coef * exponent,
                        sign_power: sign_power + 1,
                        exponent: exponent - 1.0,
                    }
                }
            }
            Kernel::XnLog { coef, n } => {
                if *n == 0 {
                    // d/dx log(1/|x|) = -1/x
                    Kernel::PowerAbs {
                        coef: -coef,
                        sign_power: 1,
                        exponent: -1.0,
                    }
                } else {
                    let mut poly = vec![0.0; *n as usize];
                    poly[*n as usize - 1] = -coef;
                    Kernel::Sum(vec![
                        Kernel::XnLog {
                            coef: coef * *n as f64,
                            n: n - 1,
                        },
                        Kernel::Poly(poly),
                    ])
                }
            }
            Kernel::Profile { profile, order } => Kernel::Profile {
                profile: profile.clone(),
                order: order + 1,
            },
            Kernel::Cauchy { m, inner } => {
                if *m == 1 {
                    (**inner).clone()
                } else {
                    Kernel::Cauchy {
                        m: m - 1,
                        inner: inner.clone(),
                    }
                }
            }
            Kernel::Sum(parts) => Kernel::Sum(parts.iter().map(Kernel::derive).collect()),
        }
        .simplified()
    }

    pub(crate) fn nth_derive(&self, order: usize) -> Kernel {
        (0..order).fold(self.clone(), |k, _| k.derive())
    }

    /// Antiderivative vanishing at 0, in closed form whenever the kernel allows.
    pub(crate) fn integrate(&self) -> Kernel {
        match self {
            Kernel::Sinusoid { amp, freq, quarter } => {
                let a = amp / freq;
                let q = (quarter + 3) % 4;
                Kernel::Sum(vec![
                    Kernel::Sinusoid {
                        amp: a,
                        freq: *freq,
                        quarter: q,
                    },
                    Kernel::Poly(vec![-a * quarter_sin(0.0, q)]),
                ])
            }
            Kernel::Poly(c) => {
                let mut out = vec![0.0];
                out.extend(c.iter().enumerate().map(|(i, a)| a / (i + 1) as f64));
                Kernel::Poly(out)
            }
            Kernel::Exp { coef } => Kernel::Sum(vec![Kernel::Exp { coef: *coef }, Kernel::Poly(vec![-coef])]),
            Kernel::PowerAbs {
                coef,
                sign_power,
                exponent,
            } => Kernel::PowerAbs {
                coef: coef / (exponent + 1.0),
                sign_power: sign_power + 1,
                exponent: exponent + 1.0,
            },
            Kernel::XnLog { coef, n } => {
                let k = (*n + 1) as f64;
                let mut poly = vec![0.0; *n as usize + 2];
                poly[*n as usize + 1] = coef / (k * k);
                Kernel::Sum(vec![
                    Kernel::XnLog {
                        coef: coef / k,
                        n: n + 1,
                    },
                    Kernel::Poly(poly),
                ])
            }
            Kernel::Profile { profile, order } if *order >= 1 => {
                let lower = Kernel::Profile {
                    profile: profile.clone(),
                    order: order - 1,
                };
                let c = lower.eval(0.0);
                Kernel::Sum(vec![lower, Kernel::Poly(vec![-c])])
            }
            Kernel::Cauchy { m, inner } => Kernel::Cauchy {
                m: m + 1,
                inner: inner.clone(),
            },
            Kernel::Sum(parts) => Kernel::Sum(parts.iter().map(Kernel::integrate).collect()),
            other => Kernel::Cauchy {
                m: 1,
                inner: Box::new(other.clone()),
            },
        }
        .simplified()
    }

    /// Flattens nested sums and merges polynomial parts.
    fn simplified(self) -> Kernel {
        let Kernel::Sum(parts) = self else {
            return self;
        };
        let mut flat = Vec::new();
        let mut poly: Vec<f64> = Vec::new();
        let mut stack: Vec<Kernel> = parts.into_iter().rev().collect();
        while let Some(k) = stack.pop() {
            match k {
                Kernel::Sum(inner) => stack.extend(inner.into_iter().rev()),
                Kernel::Poly(c) => {
                    if poly.len() < c.len() {
                        poly.resize(c.len(), 0.0);
                    }
                    for (p, a) in poly.iter_mut().zip(c) {
                        *p += a;
                    }
                }
                other => flat.push(other),
            }
        }
        while poly.len() > 1 && poly.last() == Some(&0.0) {
            poly.pop();
        }
        if poly.iter().any(|&a| a != 0.0) || flat.is_empty() {
            flat.push(Kernel::Poly(if poly.is_empty() { vec![0.0] } else { poly }));
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Kernel::Sum(flat)
        }
    }
}
