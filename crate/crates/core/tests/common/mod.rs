//! Reference quadrature used to cross-check the library's kernels.
//!
//! Deliberately built on different machinery than the library: fixed-order
//! Gauss-Legendre panels in explicitly chosen variables, refined by panel
//! doubling until two successive refinements agree. No adaptive bisection,
//! no variable transform shared with the implementation.

const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut curr = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * curr - (kf - 1.0) * prev) / kf;
        prev = curr;
        curr = next;
    }
    let dp = n as f64 * (x * curr - prev) / (x * x - 1.0);
    (curr, dp)
}

/// Composite fixed-order integration over consecutive [edges[i], edges[i+1]]
/// panels.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, edges: &[f64], rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        let mut panel = 0.0;
        for &(x, w) in rule {
            panel += w * f(mid + half * x);
        }
        total += half * panel;
    }
    total
}

/// Doubles the panel count until two successive results agree to `rel`.
fn refine<E: Fn(usize) -> f64>(eval: E, start: usize, rel: f64) -> f64 {
    let mut panels = start.max(4);
    let mut prev = eval(panels);
    for _ in 0..9 {
        panels *= 2;
        let next = eval(panels);
        let scale = next.abs().max(f64::MIN_POSITIVE);
        if ((next - prev) / scale).abs() <= rel {
            return next;
        }
        prev = next;
    }
    panic!("reference quadrature did not converge to {rel} (last panels: {panels})");
}

/// Reference value of the single-gap kernel
/// `∫_1^∞ dp (2p⁴ - 2p² + 1) (4p² + ρ²)^{-3/2} exp(-u √(4p² + ρ²))`
/// with `ρ = cQ/ζ` and `u = ζH/c`, accurate to ~1e-12 relative.
pub fn reference_kernel(q: f64, zeta: f64, gap: f64) -> f64 {
    let rho = SPEED_OF_LIGHT * q / zeta;
    let u = zeta * gap / SPEED_OF_LIGHT;
    assert!(rho >= 0.0 && u > 0.0, "bad reduced arguments");
    let rule = gauss_legendre(64);
    let numerator = |p: f64| 2.0 * p.powi(4) - 2.0 * p * p + 1.0;

    if rho <= 2.0 {
        // Direct p integration on geometrically spaced panels. The integrand
        // decays like exp(-2up), so cut where the exponent has fallen by 70
        // relative to the start.
        let w1 = (4.0 + rho * rho).sqrt();
        let p_max = 0.5 * w1 + 35.0 / u;
        let integrand = |p: f64| {
            let w = (4.0 * p * p + rho * rho).sqrt();
            numerator(p) / (w * w * w) * (-u * w).exp()
        };
        let decades = p_max.log10().max(0.1);
        refine(
            |panels| {
                let edges: Vec<f64> =
                    (0..=panels).map(|i| p_max.powf(i as f64 / panels as f64)).collect();
                integrate_panels(&integrand, &edges, &rule)
            },
            (4.0 * decades).ceil() as usize,
            1e-12,
        )
    } else {
        // Substitution p = (ρ/2) sinh θ makes the exponent -uρ cosh θ exact,
        // which keeps the nodes well placed however large ρ is.
        let theta_low = (2.0 / rho).asinh();
        let reach = theta_low.cosh() + 70.0 / (u * rho);
        let theta_high = reach.acosh();
        let integrand = |theta: f64| {
            let p = 0.5 * rho * theta.sinh();
            let w = rho * theta.cosh();
            numerator(p) / (w * w * w) * (-u * w).exp() * 0.5 * rho * theta.cosh()
        };
        let span = theta_high - theta_low;
        refine(
            |panels| {
                let edges: Vec<f64> = (0..=panels)
                    .map(|i| theta_low + span * i as f64 / panels as f64)
                    .collect();
                integrate_panels(&integrand, &edges, &rule)
            },
            (2.0 * span).ceil() as usize,
            1e-12,
        )
    }
}

/// Reference value of `∫_H^∞ E(Q; ζ, H') dH'` computed by quadrature over
/// the gap argument of `kernel`, on panels that halve toward the lower
/// limit. Accuracy is bounded by the accuracy of `kernel` itself.
pub fn reference_gap_integral<K: Fn(f64) -> f64>(kernel: &K, gap: f64, zeta: f64, q: f64) -> f64 {
    let rho = SPEED_OF_LIGHT * q / zeta;
    // Slowest decay in H' goes like exp(-ζ √(4 + ρ²) H'/c).
    let scale = SPEED_OF_LIGHT / (zeta * (4.0 + rho * rho).sqrt());
    let reach = 70.0 * scale;
    // The first geometric edge sits far below every decay scale; the stub
    // panel [0, s_min] is then smooth and narrow.
    let s_min = reach * 0.5_f64.powi(40);
    let ratio = reach / s_min;
    let rule = gauss_legendre(64);
    let integrand = |s: f64| kernel(gap + s);
    refine(
        |panels| {
            let mut edges: Vec<f64> = Vec::with_capacity(panels + 2);
            edges.push(0.0);
            for i in 0..=panels {
                edges.push(s_min * ratio.powf(i as f64 / panels as f64));
            }
            integrate_panels(&integrand, &edges, &rule)
        },
        40,
        1e-9,
    )
}

/// Log-spaced sample grid, inclusive of both ends.
pub fn log_grid(low: f64, high: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && low > 0.0 && high > low);
    let step = (high / low).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| low * step.powi(i as i32)).collect()
}

/// Outcome of sweeping a comparison over an argument grid.
pub struct GridReport {
    pub points: usize,
    pub worst: f64,
    pub worst_at: String,
}

impl GridReport {
    fn update(&mut self, rel: f64, q: f64, zeta: f64, gap: f64) {
        self.points += 1;
        if rel > self.worst {
            self.worst = rel;
            self.worst_at = format!("Q={q:.3e}, zeta={zeta:.3e}, H={gap:.3e}");
        }
    }
}

fn tight_settings() -> casimir::QuadratureSettings {
    casimir::QuadratureSettings { rel_tol: 1e-10, ..casimir::QuadratureSettings::default() }
}

/// Compares the single-gap kernel against [`reference_kernel`] over a
/// 5x5x5 grid spanning 8 decades of gap, frequency, and wavevector.
pub fn kernel_grid_report() -> GridReport {
    use casimir::kernels::{kernel_e, KernelArgs};
    let settings = tight_settings();
    let mut report = GridReport { points: 0, worst: 0.0, worst_at: String::new() };
    for &gap in &log_grid(1e-8, 1e-4, 5) {
        for &zeta in &log_grid(3e9, 3e13, 5) {
            for &q in &log_grid(5e2, 5e6, 5) {
                let args = KernelArgs { transverse_wavevector: q, zeta, gap };
                let got = kernel_e(&args, &settings).unwrap().value;
                let want = reference_kernel(q, zeta, gap);
                report.update(((got - want) / want).abs(), q, zeta, gap);
            }
        }
    }
    report
}

/// Compares the gap-integrated kernel against quadrature over the gap
/// argument of the single-gap kernel, on a 20-point grid.
pub fn gap_integrated_grid_report() -> GridReport {
    use casimir::kernels::{kernel_e, kernel_e_gap_integrated, KernelArgs};
    let settings = tight_settings();
    let mut report = GridReport { points: 0, worst: 0.0, worst_at: String::new() };
    for &gap in &[1e-8, 1e-6] {
        for &zeta in &[3e10, 3e12] {
            for &q in &log_grid(5e2, 5e6, 5) {
                let args = KernelArgs { transverse_wavevector: q, zeta, gap };
                let got = kernel_e_gap_integrated(&args, &settings).unwrap().value;
                let kernel = |h: f64| {
                    kernel_e(
                        &KernelArgs { transverse_wavevector: q, zeta, gap: h },
                        &settings,
                    )
                    .unwrap()
                    .value
                };
                let want = reference_gap_integral(&kernel, gap, zeta, q);
                report.update(((got - want) / want).abs(), q, zeta, gap);
            }
        }
    }
    report
}
