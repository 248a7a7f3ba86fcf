//! Classical fixed-step Runge–Kutta.

/// One RK4 step of `ṡ = deriv(t, s)`. Any error from `deriv` aborts the step
/// and is returned unchanged, so singularity errors keep the offending state.
pub fn rk4_step<const N: usize, E, F>(mut deriv: F, s: &[f64; N], t: f64, h: f64) -> Result<[f64; N], E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let k1 = deriv(t, s)?;
    let k2 = deriv(t + 0.5 * h, &axpy(s, 0.5 * h, &k1))?;
    let k3 = deriv(t + 0.5 * h, &axpy(s, 0.5 * h, &k2))?;
    let k4 = deriv(t + h, &axpy(s, h, &k3))?;
    let mut out = *s;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

fn axpy<const N: usize>(s: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *s;
    for (o, ki) in out.iter_mut().zip(k) {
        *o += a * ki;
    }
    out
}
