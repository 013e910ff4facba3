/// Inclination of the major axis from the y-axis for a rigid ellipse with
/// semi-axes `s1` (initially along x) and `s2` (initially along y) in simple
/// shear, `tan theta = (s2/s1) tan(k t)`, `k = s1 s2 gamma_dot / (s1^2 + s2^2)`,
/// continued across the poles of `tan`.
pub fn jeffery_angle(t: f64, s1: f64, s2: f64, gamma_dot: f64) -> f64 {
    let phi = s1 * s2 / (s1 * s1 + s2 * s2) * gamma_dot * t;
    let n = (phi / std::f64::consts::PI).round();
    let rest = phi - n * std::f64::consts::PI;
    (s2 / s1 * rest.tan()).atan() + n * std::f64::consts::PI
}

/// Period of a full rotation, `2 pi (s1^2 + s2^2) / (s1 s2 gamma_dot)`.
pub fn jeffery_period(s1: f64, s2: f64, gamma_dot: f64) -> f64 {
    2.0 * std::f64::consts::PI * (s1 * s1 + s2 * s2) / (s1 * s2 * gamma_dot)
}
