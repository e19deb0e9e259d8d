use crate::error::Result;

/// One classical fourth-order Runge-Kutta step for `y' = rhs(t, y)`.
pub(crate) fn rk4_step<F>(rhs: &F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let axpy =
        |a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(yi, ki)| yi + a * ki).collect() };
    let k1 = rhs(t, y)?;
    let k2 = rhs(t + 0.5 * h, &axpy(0.5 * h, &k1))?;
    let k3 = rhs(t + 0.5 * h, &axpy(0.5 * h, &k2))?;
    let k4 = rhs(t + h, &axpy(h, &k3))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}
