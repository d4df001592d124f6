use crate::nonlinear::series::Algebra;

/// Total-mass bound `b` on a term and `d` on its difference between two inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Pair {
    pub b: f64,
    pub d: f64,
}

/// Majorant algebra: `M` bounds the masses of `e^{ρ|ξ|}|ŷ_x|` and `e^{ρ|ξ|}|ω̂|`
/// for both inputs, `V` those of their differences.
pub(crate) struct MajorantAlgebra {
    pub m: f64,
    pub v: f64,
    pub order: usize,
    pub geometric: usize,
}

fn c(j: usize) -> f64 {
    (2 * j * j + 3 * j + 1) as f64
}

impl MajorantAlgebra {
    pub fn new(m: f64, v: f64) -> Self {
        // keep terms until they fall below 1e-18 of the leading size
        let mut order = 2;
        while order < 4000 && c(order + 1) * m.powi(order as i32) * (1.0 + m) > 1e-18 {
            order += 1;
        }
        let mut geometric = 1;
        while geometric < 4000 && (2 * geometric + 2) as f64 * m.powi(2 * geometric as i32 + 1) > 1e-18 {
            geometric += 1;
        }
        Self { m, v, order, geometric }
    }
}

impl Algebra for MajorantAlgebra {
    type E = Pair;

    fn constant(&self, c: f64) -> Pair {
        Pair { b: c.abs(), d: 0.0 }
    }
    fn y_x(&self) -> Pair {
        Pair { b: self.m, d: self.v }
    }
    fn omega(&self) -> Pair {
        Pair { b: self.m, d: self.v }
    }
    fn h_omega(&self) -> Pair {
        Pair { b: self.m, d: self.v }
    }
    fn tj(&self, j: usize) -> Pair {
        if j == 0 {
            return self.h_omega();
        }
        let (m, v) = (self.m, self.v);
        Pair {
            b: (1 + 2 * j) as f64 * m.powi(j as i32) * (1.0 + m),
            d: c(j) * (m.powi(j as i32 - 1) + m.powi(j as i32)) * v,
        }
    }
    fn t1_omega(&self) -> Pair {
        // bilinear in (y_x, ω)
        Pair { b: 3.0 * self.m * self.m, d: 6.0 * self.m * self.v }
    }
    fn add(&self, a: &Pair, b: &Pair) -> Pair {
        Pair { b: a.b + b.b, d: a.d + b.d }
    }
    fn mul(&self, a: &Pair, b: &Pair) -> Pair {
        Pair { b: a.b * b.b, d: a.d * b.b + a.b * b.d }
    }
    fn scale(&self, a: &Pair, s: f64) -> Pair {
        Pair { b: a.b * s.abs(), d: a.d * s.abs() }
    }
    fn order(&self) -> usize {
        self.order
    }
    fn geometric_terms(&self) -> usize {
        self.geometric
    }
}
