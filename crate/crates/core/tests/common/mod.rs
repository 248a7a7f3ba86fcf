//! Shared test helpers: closed-form brackets of the soaring model with lift
//! and drag held constant.

#![allow(dead_code)]

pub struct Frozen {
    pub m: f64,
    pub g: f64,
    pub w0: f64,
    pub delta: f64,
    pub lift: f64,
    pub drag: f64,
}

impl Frozen {
    /// Albatross parameters with the forces taken at airspeed `v`.
    pub fn at(v: f64, cl: f64) -> Self {
        let (rho, s, cd0, k) = (1.2, 0.65, 0.01, 0.0156);
        let q = 0.5 * rho * v * v * s;
        Self {
            m: 9.5,
            g: 9.8,
            w0: 7.8,
            delta: 7.0,
            lift: q * cl,
            drag: q * (cd0 + k * cl * cl),
        }
    }

    /// dW/dz for the logistic profile.
    fn shear(&self, z: f64) -> f64 {
        let eta = (-z / self.delta).exp();
        let xi = 1.0 + eta;
        eta * self.w0 / (self.delta * xi * xi)
    }

    /// `[f, b]`.
    pub fn f_b(&self, x: &[f64]) -> [f64; 7] {
        let (v, gm, ph) = (x[3], x[4], x[6]);
        let (l, m) = (self.lift, self.m);
        [
            0.0,
            0.0,
            0.0,
            0.0,
            l * ph.sin() / (m * v),
            -l * ph.cos() / (gm.cos() * m * v),
            0.0,
        ]
    }

    /// `[f, [f, b]]`.
    pub fn f_f_b(&self, x: &[f64]) -> [f64; 7] {
        let (z, v, gm, ps, ph) = (x[2], x[3], x[4], x[5], x[6]);
        let (l, d, m, g) = (self.lift, self.drag, self.m, self.g);
        let k = self.shear(z);
        let (cg, sg, tg, secg) = (gm.cos(), gm.sin(), gm.tan(), 1.0 / gm.cos());
        let (cp, sp) = (ps.cos(), ps.sin());
        let (cf, sf) = (ph.cos(), ph.sin());
        let a = -d - m * g * sg + m * k * v * cg * sg * sp + tg * (m * g * cg - l * cf + m * k * v * sg * sg * sp);
        let b = k * cp + secg * tg / (m * v) * (m * k * v * cp * sg + l * sf);
        [
            l / m * (cp * sg * sf - cf * sp),
            l / m * (cf * cp + sg * sf * sp),
            -l * cg * sf / m,
            k * l * cf * cp * sg / m - l * sf / (m * m * v) * (-m * g * cg + m * k * v * sp * (cg * cg - sg * sg)),
            -l * sf / (m * m * v * v) * (-m * k * v * cg * sg * sp - d) - k * l * cf * cp * sg * tg / (m * v),
            l * cf * secg / (m * m * v * v) * a - k * l * cf * secg * sp * tg / (m * v) - l * sf / (m * v) * b,
            0.0,
        ]
    }
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}
