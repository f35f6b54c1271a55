//! Bistable reaction terms and the variants the solver needs.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Shape {
    /// `-lambda u (u - alpha) (u - 1)`.
    Cubic { lambda: f64 },
    /// Piecewise-linear through `(u_i, f_i)`, linearly extrapolated outside the table.
    Tabulated { u: Vec<f64>, f: Vec<f64> },
}

/// A reaction term with zeros at `0`, `alpha`, `1`.
///
/// Constructors only check the zeros; the sign pattern is tested by
/// [`Nonlinearity::check_bistable`], so deliberately broken terms can still be
/// built and fed to the certification harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    alpha: f64,
    shape: Shape,
    lipschitz: f64,
    derivative_at_alpha: f64,
}

impl Nonlinearity {
    pub fn cubic(lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("cubic lambda must be positive, got {lambda}"));
        }
        check_alpha(alpha)?;
        // |f'| on [0, 1] peaks at an endpoint: lambda * alpha or lambda * (1 - alpha)
        Ok(Self {
            alpha,
            shape: Shape::Cubic { lambda },
            lipschitz: lambda * alpha.max(1.0 - alpha),
            derivative_at_alpha: lambda * alpha * (1.0 - alpha),
        })
    }

    /// Piecewise-linear table. `u` must be strictly increasing, start at 0,
    /// end at 1 and contain `alpha`; `f` must vanish at those three nodes.
    pub fn tabulated(alpha: f64, u: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        check_alpha(alpha)?;
        if u.len() != f.len() || u.len() < 3 {
            return invalid("tabulated nonlinearity needs matching u and f with at least 3 nodes");
        }
        if u.windows(2).any(|w| w[1] <= w[0]) || f.iter().any(|v| !v.is_finite()) {
            return invalid("tabulated u must be strictly increasing and f finite");
        }
        if u[0] != 0.0 || u[u.len() - 1] != 1.0 {
            return invalid("tabulated u must start at 0 and end at 1");
        }
        let Some(ia) = u.iter().position(|&x| (x - alpha).abs() <= ZERO_TOL) else {
            return invalid(format!("tabulated u must contain alpha = {alpha}"));
        };
        for i in [0, ia, u.len() - 1] {
            if f[i].abs() > ZERO_TOL {
                return invalid(format!("f({}) = {} but must vanish", u[i], f[i]));
            }
        }
        let slopes: Vec<f64> = (1..u.len())
            .map(|i| (f[i] - f[i - 1]) / (u[i] - u[i - 1]))
            .collect();
        let lipschitz = slopes.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        let derivative_at_alpha = 0.5 * (slopes[ia - 1] + slopes[ia]);
        Ok(Self {
            alpha,
            shape: Shape::Tabulated { u, f },
            lipschitz,
            derivative_at_alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn derivative_at_alpha(&self) -> f64 {
        self.derivative_at_alpha
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Cubic { lambda } => -lambda * x * (x - self.alpha) * (x - 1.0),
            Shape::Tabulated { u, f } => {
                let n = u.len();
                let i = u.partition_point(|&s| s <= x).clamp(1, n - 1);
                let t = (x - u[i - 1]) / (u[i] - u[i - 1]);
                f[i - 1] + t * (f[i] - f[i - 1])
            }
        }
    }

    /// Worst sign margin over `samples` interior points of each interval:
    /// `min(-f on (0, alpha), f on (alpha, 1))`. Positive means bistable.
    pub fn bistable_margin(&self, samples: usize) -> (f64, f64) {
        let mut worst = (f64::INFINITY, f64::NAN);
        let mut visit = |u: f64, m: f64| {
            if m < worst.0 {
                worst = (m, u);
            }
        };
        for k in 1..=samples {
            let s = k as f64 / (samples + 1) as f64;
            let lo = s * self.alpha;
            let hi = self.alpha + s * (1.0 - self.alpha);
            visit(lo, -self.eval(lo));
            visit(hi, self.eval(hi));
        }
        worst
    }

    /// Sign pattern `f < 0` on `(0, alpha)`, `f > 0` on `(alpha, 1)` on a 400-point sample.
    pub fn check_bistable(&self) -> Result<()> {
        let (margin, at) = self.bistable_margin(400);
        if margin <= 0.0 {
            return invalid(format!(
                "nonlinearity is not bistable: f({at}) = {} has the wrong sign",
                self.eval(at)
            ));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// `f` on `[0, 1]`, continued linearly with slope `-slope_out` outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedNonlinearity {
    base: Nonlinearity,
    slope_out: f64,
}

impl ExtendedNonlinearity {
    pub fn new(base: Nonlinearity, slope_out: f64) -> Result<Self> {
        if !(slope_out > 0.0 && slope_out.is_finite()) {
            return invalid(format!("slope_out must be positive, got {slope_out}"));
        }
        Ok(Self { base, slope_out })
    }

    pub fn base(&self) -> &Nonlinearity {
        &self.base
    }

    pub fn slope_out(&self) -> f64 {
        self.slope_out
    }

    pub fn alpha(&self) -> f64 {
        self.base.alpha
    }

    pub fn lipschitz(&self) -> f64 {
        self.base.lipschitz.max(self.slope_out)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u < 0.0 {
            -self.slope_out * u
        } else if u > 1.0 {
            -self.slope_out * (u - 1.0)
        } else {
            self.base.eval(u)
        }
    }
}

/// `f -> f_hat` with the given outer slope.
pub fn extend_nonlinearity(f: &Nonlinearity, slope_out: f64) -> Result<ExtendedNonlinearity> {
    ExtendedNonlinearity::new(f.clone(), slope_out)
}

/// Reaction term used by the semiflow.
///
/// The two reduced forms turn a sub-front problem into a monostable one on
/// `[0, 1]`: with `u = alpha (1 - v(-x))` the minus side reads
/// `v_t = mu_reflected * v - v - f(alpha (1 - v)) / alpha`, and with
/// `u = alpha + (1 - alpha) w` the plus side reads
/// `w_t = mu * w - w + f(alpha + (1 - alpha) w) / (1 - alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "f", rename_all = "snake_case")]
pub enum Reaction {
    Bistable(Nonlinearity),
    Extended(ExtendedNonlinearity),
    MinusReduced(Nonlinearity),
    PlusReduced(Nonlinearity),
}

impl Reaction {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Reaction::Bistable(f) => f.eval(u),
            Reaction::Extended(f) => f.eval(u),
            Reaction::MinusReduced(f) => -f.eval(f.alpha * (1.0 - u)) / f.alpha,
            Reaction::PlusReduced(f) => {
                let a = f.alpha;
                f.eval(a + (1.0 - a) * u) / (1.0 - a)
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Reaction::Bistable(f) | Reaction::MinusReduced(f) | Reaction::PlusReduced(f) => {
                f.lipschitz
            }
            Reaction::Extended(f) => f.lipschitz(),
        }
    }

    /// The underlying bistable term.
    pub fn base(&self) -> &Nonlinearity {
        match self {
            Reaction::Bistable(f) | Reaction::MinusReduced(f) | Reaction::PlusReduced(f) => f,
            Reaction::Extended(f) => f.base(),
        }
    }
}

impl From<Nonlinearity> for Reaction {
    fn from(f: Nonlinearity) -> Self {
        Reaction::Bistable(f)
    }
}

impl From<ExtendedNonlinearity> for Reaction {
    fn from(f: ExtendedNonlinearity) -> Self {
        Reaction::Extended(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_zeros_and_constants() {
        let f = Nonlinearity::cubic(1.0, 0.3).unwrap();
        for u in [0.0, 0.3, 1.0] {
            assert_eq!(f.eval(u), 0.0);
        }
        assert!((f.derivative_at_alpha() - 0.21).abs() < 1e-15);
        f.check_bistable().unwrap();
        // sampled Lipschitz bound
        let mut worst = 0.0_f64;
        for i in 0..1000 {
            let (a, b) = (i as f64 / 1000.0, (i + 1) as f64 / 1000.0);
            worst = worst.max(((f.eval(b) - f.eval(a)) / (b - a)).abs());
        }
        assert!(worst <= f.lipschitz() + 1e-12);
    }

    #[test]
    fn extension_signs() {
        let f = Nonlinearity::cubic(1.0, 0.3).unwrap();
        let s = 0.8;
        let fh = extend_nonlinearity(&f, s).unwrap();
        assert_eq!(fh.eval(-0.5), 0.5 * s);
        assert_eq!(fh.eval(1.5), -0.5 * s);
        for u in [0.0, 0.3, 1.0, 0.55] {
            assert_eq!(fh.eval(u), f.eval(u));
        }
        assert_eq!(fh.lipschitz(), s.max(f.lipschitz()));
    }

    #[test]
    fn corrupted_table_fails_sign_check() {
        let f = Nonlinearity::tabulated(
            0.3,
            vec![0.0, 0.15, 0.3, 0.6, 0.9, 1.0],
            vec![0.0, -0.02, 0.0, 0.05, -0.05, 0.0],
        )
        .unwrap();
        assert!(f.eval(0.9) < 0.0);
        assert!(f.check_bistable().is_err());
        assert!(Nonlinearity::tabulated(0.3, vec![0.0, 0.3, 1.0], vec![0.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn reduced_reactions_are_monostable() {
        let f = Nonlinearity::cubic(1.0, 0.3).unwrap();
        for r in [Reaction::MinusReduced(f.clone()), Reaction::PlusReduced(f.clone())] {
            assert!(r.eval(0.0).abs() < 1e-15);
            assert!(r.eval(1.0).abs() < 1e-15);
            for k in 1..20 {
                assert!(r.eval(k as f64 / 20.0) > 0.0);
            }
        }
    }
}
