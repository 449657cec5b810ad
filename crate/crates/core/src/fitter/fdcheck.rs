//! Central-finite-difference gradient verification. This is the test oracle
//! for every analytic gradient in the crate; it is never used to optimize.

/// Maximum over coordinates of the relative disagreement between an analytic
/// gradient and central differences of `f`:
/// `|g_analytic - g_fd| / max(|g_fd|, 1e-8)`.
pub fn max_relative_grad_error<F>(f: F, params: &[f64], analytic: &[f64], epsilon: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(params.len(), analytic.len());
    let mut x = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + epsilon;
        let fp = f(&x);
        x[i] = orig - epsilon;
        let fm = f(&x);
        x[i] = orig;
        let fd = (fp - fm) / (2.0 * epsilon);
        let err = (analytic[i] - fd).abs() / fd.abs().max(1e-8);
        worst = worst.max(err);
    }
    worst
}

/// Checks a self-reporting energy function (value plus analytic gradient)
/// against central differences evaluated at `params`.
pub fn finite_difference_check<F>(energy: F, params: &[f64], epsilon: f64) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = energy(params);
    max_relative_grad_error(|x| energy(x).0, params, &analytic, epsilon)
}
