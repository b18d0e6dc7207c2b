use serde::{Deserialize, Serialize};

/// Dense samples used to certify the cutoff constants.
pub const CERTIFICATE_SAMPLES: usize = 1_000_000;
/// Factor applied on top of the sampled suprema.
pub const SAFETY_FACTOR: f64 = 1.05;

/// `ψ(s)`: 1 on `[0, 1]`, 0 on `[2, ∞)`, and `1 − (10x³ − 15x⁴ + 6x⁵)` with
/// `x = s − 1` in between. C² with `ψ' ≤ 0`.
pub fn psi(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let y = 2.0 - s;
        // 1 − S(1 − y) = S(y) for the smoothstep S, which keeps ψ accurate near s = 2
        y * y * y * (10.0 + y * (-15.0 + 6.0 * y))
    }
}

pub fn psi_prime(s: f64) -> f64 {
    if s <= 1.0 || s >= 2.0 {
        return 0.0;
    }
    let x = s - 1.0;
    -30.0 * x * x * (1.0 - x) * (1.0 - x)
}

pub fn psi_second(s: f64) -> f64 {
    if s <= 1.0 || s >= 2.0 {
        return 0.0;
    }
    let x = s - 1.0;
    -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
}

/// Certified cutoff constants and the derived absolute constants used by the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffCertificate {
    /// `ψ'' ≥ −c1`
    pub c1: f64,
    /// `(ψ')² / ψ ≤ c2` where `ψ > 0`
    pub c2: f64,
    pub samples: usize,
    pub safety_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub cn: f64,
    pub n: usize,
}

impl CutoffCertificate {
    /// `c3 = max(c1, c2)`, `c4 = n·c3`, `c(n) = n·c4`.
    pub fn constants(&self, n: usize) -> Constants {
        let c3 = self.c1.max(self.c2);
        let c4 = n as f64 * c3;
        Constants { c1: self.c1, c2: self.c2, c3, c4, cn: n as f64 * c4, n }
    }

    /// Largest violation of the profile constraints on `samples` points of
    /// `[0, 3]`; zero means every constraint holds.
    pub fn check(&self, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..=samples {
            let s = 3.0 * k as f64 / samples as f64;
            let (p, d1, d2) = (psi(s), psi_prime(s), psi_second(s));
            worst = worst.max(p - 1.0).max(-p).max(d1).max(-self.c1 - d2);
            if p > 0.0 {
                worst = worst.max(d1 * d1 / p - self.c2);
            }
            if s <= 1.0 {
                worst = worst.max((p - 1.0).abs());
            }
            if s >= 2.0 {
                worst = worst.max(p.abs());
            }
        }
        worst
    }
}

/// Samples `[1, 2]` densely and inflates the suprema of `−ψ''` and `(ψ')²/ψ`.
pub fn build_cutoff() -> CutoffCertificate {
    let mut neg_second = 0.0f64;
    let mut ratio = 0.0f64;
    for k in 0..=CERTIFICATE_SAMPLES {
        let s = 1.0 + k as f64 / CERTIFICATE_SAMPLES as f64;
        neg_second = neg_second.max(-psi_second(s));
        let p = psi(s);
        if p > 0.0 {
            let d = psi_prime(s);
            ratio = ratio.max(d * d / p);
        }
    }
    CutoffCertificate {
        c1: SAFETY_FACTOR * neg_second,
        c2: SAFETY_FACTOR * ratio,
        samples: CERTIFICATE_SAMPLES,
        safety_factor: SAFETY_FACTOR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(psi(0.5), 1.0);
        assert_eq!(psi(3.0), 0.0);
        assert!((psi(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for s in [1.1, 1.37, 1.5, 1.8, 1.99] {
            let d1 = (psi(s + h) - psi(s - h)) / (2.0 * h);
            let d2 = (psi(s + h) - 2.0 * psi(s) + psi(s - h)) / (h * h);
            assert!((d1 - psi_prime(s)).abs() < 1e-8);
            assert!((d2 - psi_second(s)).abs() < 1e-4);
        }
    }

    #[test]
    fn certified_constants_against_independent_maximisation() {
        let cert = build_cutoff();
        // −ψ'' = 60x(1−x)(1−2x) peaks at x = (3 − √3)/6 with value 10/√3
        let c1 = 10.0 / 3f64.sqrt();
        assert!((cert.c1 / SAFETY_FACTOR - c1).abs() < 1e-9);
        // (ψ')²/ψ maximised by golden-section search on its own polynomial form
        let ratio = |x: f64| {
            let y = 1.0 - x;
            let d = 30.0 * x * x * y * y;
            d * d / (y * y * y * (10.0 - 15.0 * y + 6.0 * y * y))
        };
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-12 {
            let (x1, x2) = (b - g * (b - a), a + g * (b - a));
            if ratio(x1) < ratio(x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        let c2 = ratio(0.5 * (a + b));
        assert!((cert.c2 / SAFETY_FACTOR - c2).abs() < 1e-6 * c2, "{} {c2}", cert.c2);
        assert_eq!(cert.check(200_000), 0.0);
    }

    #[test]
    fn derived_constants() {
        let k = CutoffCertificate { c1: 2.0, c2: 3.0, samples: 0, safety_factor: 1.0 }.constants(2);
        assert_eq!((k.c3, k.c4, k.cn), (3.0, 6.0, 12.0));
    }
}
