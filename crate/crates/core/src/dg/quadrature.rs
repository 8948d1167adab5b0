//! Quadrature on the reference triangle and the unit interval.

/// A point in barycentric coordinates with a weight normalised so the
/// weights sum to one (multiply by the cell area / edge length).
#[derive(Debug, Clone, Copy)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Six-point rule, exact for polynomials of degree 4.
pub fn triangle_degree4() -> [TriPoint; 6] {
    const A1: f64 = 0.445_948_490_915_965;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const W2: f64 = 0.109_951_743_655_322;
    let p = |a: f64, w: f64, k: usize| {
        let b = 1.0 - 2.0 * a;
        let bary = match k {
            0 => [a, a, b],
            1 => [a, b, a],
            _ => [b, a, a],
        };
        TriPoint { bary, weight: w }
    };
    [p(A1, W1, 0), p(A1, W1, 1), p(A1, W1, 2), p(A2, W2, 0), p(A2, W2, 1), p(A2, W2, 2)]
}

/// Three-point Gauss-Legendre rule on `[0, 1]`: `(t, weight)` pairs,
/// exact to degree 5.
pub fn edge_gauss3() -> [(f64, f64); 3] {
    let s = (0.6f64).sqrt() / 2.0;
    [(0.5 - s, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + s, 5.0 / 18.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn triangle_rule_integrates_monomials_to_degree_four() {
        // On the reference triangle (area 1/2): int x^a y^b = a! b! / (a+b+2)!
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let q: f64 = triangle_degree4()
                    .iter()
                    .map(|p| 0.5 * p.weight * p.bary[1].powi(a as i32) * p.bary[2].powi(b as i32))
                    .sum();
                assert!((q - exact).abs() < 1e-14, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn edge_rule_integrates_monomials_to_degree_five() {
        for k in 0..=5 {
            let q: f64 = edge_gauss3().iter().map(|&(t, w)| w * t.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
