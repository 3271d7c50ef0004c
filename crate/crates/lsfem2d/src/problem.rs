//! PDE data for `-div(A grad u) + b.grad u + c u = f` with homogeneous
//! Dirichlet/Neumann boundary conditions, plus a registry of manufactured
//! benchmark problems.

use crate::expr::Expr;
use crate::geometry::Mat2;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

/// Diffusion coefficient: either a constant symmetric matrix or a scalar
/// field times the identity.
#[derive(Clone)]
pub enum Diffusion {
    Constant(Mat2),
    /// `a(x, y) * I`; `smooth` records whether the field is continuous.
    Scalar { a: ScalarFn, smooth: bool },
}

impl Diffusion {
    pub fn eval(&self, x: f64, y: f64) -> Mat2 {
        match self {
            Diffusion::Constant(m) => *m,
            Diffusion::Scalar { a, .. } => Mat2::scalar(a(x, y)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Diffusion::Constant(_))
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            Diffusion::Constant(_) => true,
            Diffusion::Scalar { smooth, .. } => *smooth,
        }
    }
}

/// Exact solution callbacks for manufactured problems.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub grad_u: VectorFn,
    /// Flux `sigma = -A grad u`.
    pub sigma: VectorFn,
    /// `div sigma = -div(A grad u)`.
    pub div_sigma: ScalarFn,
}

/// Declared solvability regime of the problem data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Lower-order terms keep the plain bilinear form coercive.
    Coercive,
    /// Possibly indefinite; only unique solvability is assumed. Declared by
    /// the user, not verified.
    General,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Coercive => write!(f, "coercive"),
            Regime::General => write!(f, "general"),
        }
    }
}

/// Full problem data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub a: Diffusion,
    pub b_vec: VectorFn,
    pub c: ScalarFn,
    pub f: ScalarFn,
    pub exact: Option<ExactSolution>,
    pub regime_hint: Regime,
    /// Weights (r, s, t) for the convection term of the three-field method:
    /// `b . (r grad_h v - s psi - t A^{-1} tau) + c v`, r + s + t = 1.
    pub convection_weights: [f64; 3],
    /// Dirichlet trace of the potential; `None` means homogeneous data.
    /// Nonzero data enters the discrete systems through elimination of the
    /// known boundary degrees of freedom.
    pub dirichlet: Option<ScalarFn>,
}

/// Which coefficient to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    A,
    B,
    C,
    F,
}

/// Evaluated coefficient value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoeffValue {
    Matrix(Mat2),
    Vector([f64; 2]),
    Scalar(f64),
}

impl ProblemSpec {
    pub fn eval_a(&self, x: f64, y: f64) -> Mat2 {
        self.a.eval(x, y)
    }

    /// Evaluate one coefficient with an SPD spot-check on A.
    pub fn eval_coeff(&self, which: Coefficient, x: f64, y: f64) -> Result<CoeffValue> {
        Ok(match which {
            Coefficient::A => {
                let m = self.a.eval(x, y);
                let ev = m.sym_eigenvalues();
                if !m.is_symmetric(1e-12) || ev[0] <= 0.0 {
                    return Err(Error::Data(format!(
                        "diffusion matrix not symmetric positive definite at ({x}, {y}): eigenvalues {ev:?}"
                    )));
                }
                CoeffValue::Matrix(m)
            }
            Coefficient::B => CoeffValue::Vector((self.b_vec)(x, y)),
            Coefficient::C => CoeffValue::Scalar((self.c)(x, y)),
            Coefficient::F => CoeffValue::Scalar((self.f)(x, y)),
        })
    }

    pub fn set_convection_weights(&mut self, w: [f64; 3]) -> Result<()> {
        let sum = w[0] + w[1] + w[2];
        if w.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "convection weights must lie in [0,1] and sum to 1, got {w:?}"
            )));
        }
        self.convection_weights = w;
        Ok(())
    }

    /// Build a problem from parsed coefficient expressions (A = a(x, y) I).
    pub fn from_exprs(
        name: &str,
        a: Expr,
        b1: Expr,
        b2: Expr,
        c: Expr,
        f: Expr,
        regime_hint: Regime,
    ) -> ProblemSpec {
        let (b1, b2) = (Arc::new(b1), Arc::new(b2));
        ProblemSpec {
            name: name.to_string(),
            a: Diffusion::Scalar {
                a: {
                    let a = Arc::new(a);
                    Arc::new(move |x, y| a.eval(x, y))
                },
                smooth: true,
            },
            b_vec: Arc::new(move |x, y| [b1.eval(x, y), b2.eval(x, y)]),
            c: {
                let c = Arc::new(c);
                Arc::new(move |x, y| c.eval(x, y))
            },
            f: {
                let f = Arc::new(f);
                Arc::new(move |x, y| f.eval(x, y))
            },
            exact: None,
            regime_hint,
            convection_weights: [1.0, 0.0, 0.0],
            dirichlet: None,
        }
    }
}

fn zero_vec() -> VectorFn {
    Arc::new(|_, _| [0.0, 0.0])
}

fn zero_scalar() -> ScalarFn {
    Arc::new(|_, _| 0.0)
}

/// `u = sin(pi x) sin(pi y)` and its derived fields on the unit square.
fn sine_exact() -> ExactSolution {
    ExactSolution {
        u: Arc::new(|x, y| (PI * x).sin() * (PI * y).sin()),
        grad_u: Arc::new(|x, y| {
            [
                PI * (PI * x).cos() * (PI * y).sin(),
                PI * (PI * x).sin() * (PI * y).cos(),
            ]
        }),
        sigma: Arc::new(|x, y| {
            [
                -PI * (PI * x).cos() * (PI * y).sin(),
                -PI * (PI * x).sin() * (PI * y).cos(),
            ]
        }),
        div_sigma: Arc::new(|x, y| 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin()),
    }
}

/// Polar angle in [0, 2 pi) measured counterclockwise from the positive x axis.
fn polar_angle(x: f64, y: f64) -> f64 {
    let t = y.atan2(x);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Singular factor `s = r^(2/3) sin(2 theta / 3)` of the reentrant-corner
/// benchmark; harmonic on the L-shaped sector and zero on its two legs.
pub fn lshape_singular_factor(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return 0.0;
    }
    let theta = polar_angle(x, y);
    r2.powf(1.0 / 3.0) * (2.0 * theta / 3.0).sin()
}

fn lshape_singular_grad(x: f64, y: f64) -> [f64; 2] {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return [0.0, 0.0];
    }
    let theta = polar_angle(x, y);
    let scale = (2.0 / 3.0) * r2.powf(-1.0 / 6.0);
    [-scale * (theta / 3.0).sin(), scale * (theta / 3.0).cos()]
}

/// L-shape reentrant-corner benchmark: the harmonic singular function itself,
/// `u = r^{2/3} sin(2 theta / 3)`, with `f = 0`. It vanishes on the two legs
/// at the corner; the nonzero trace on the outer boundary is imposed through
/// the Dirichlet-data lift of the problem.
fn lshape_exact() -> ExactSolution {
    ExactSolution {
        u: Arc::new(lshape_singular_factor),
        grad_u: Arc::new(lshape_singular_grad),
        sigma: Arc::new(|x, y| {
            let g = lshape_singular_grad(x, y);
            [-g[0], -g[1]]
        }),
        div_sigma: Arc::new(|_, _| 0.0),
    }
}

/// Interface benchmark: `A = a(x) I` with `a = 1` for `x < 1/2` and `a = 10`
/// for `x >= 1/2`; `u = x (1 - x) sin(pi y)` has a flux with continuous
/// normal component across the interface, so `sigma` lies in H(div) but its
/// tangential part jumps and `sigma` is not in `H^1`.
fn jump_exact(a: impl Fn(f64) -> f64 + Copy + Send + Sync + 'static) -> ExactSolution {
    let u = |x: f64, y: f64| x * (1.0 - x) * (PI * y).sin();
    let grad = |x: f64, y: f64| {
        [
            (1.0 - 2.0 * x) * (PI * y).sin(),
            PI * x * (1.0 - x) * (PI * y).cos(),
        ]
    };
    ExactSolution {
        u: Arc::new(u),
        grad_u: Arc::new(grad),
        sigma: Arc::new(move |x, y| {
            let g = grad(x, y);
            [-a(x) * g[0], -a(x) * g[1]]
        }),
        div_sigma: Arc::new(move |x, y| {
            a(x) * (2.0 + PI * PI * x * (1.0 - x)) * (PI * y).sin()
        }),
    }
}

/// Construct a named benchmark problem. Recognized parameter keys:
/// `beta1`, `beta2` (convection), `kappa2` (reaction strength), and
/// `r`, `s`, `t` (three-field convection weights).
pub fn builtin_problem(name: &str, params: &BTreeMap<String, f64>) -> Result<ProblemSpec> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    let weights = [get("r", 1.0), get("s", 0.0), get("t", 0.0)];
    let mut p = match name {
        "poisson-sine" => {
            let exact = sine_exact();
            let ds = exact.div_sigma.clone();
            ProblemSpec {
                name: name.into(),
                a: Diffusion::Constant(Mat2::identity()),
                b_vec: zero_vec(),
                c: zero_scalar(),
                f: Arc::new(move |x, y| ds(x, y)),
                exact: Some(exact),
                regime_hint: Regime::Coercive,
                convection_weights: weights,
                dirichlet: None,
            }
        }
        "convection" => {
            let beta = [get("beta1", 2.0), get("beta2", 1.0)];
            let exact = sine_exact();
            let ds = exact.div_sigma.clone();
            let gu = exact.grad_u.clone();
            ProblemSpec {
                name: name.into(),
                a: Diffusion::Constant(Mat2::identity()),
                b_vec: Arc::new(move |_, _| beta),
                c: zero_scalar(),
                f: Arc::new(move |x, y| {
                    let g = gu(x, y);
                    ds(x, y) + beta[0] * g[0] + beta[1] * g[1]
                }),
                exact: Some(exact),
                regime_hint: Regime::Coercive,
                convection_weights: weights,
                dirichlet: None,
            }
        }
        "helmholtz-indefinite" => {
            // Reaction c = -kappa^2 with kappa^2 strictly between the first
            // two Dirichlet-Laplacian eigenvalues 2 pi^2 and 5 pi^2 of the
            // unit square, so the problem is indefinite but uniquely solvable.
            let kappa2 = get("kappa2", 30.0);
            let exact = sine_exact();
            let ds = exact.div_sigma.clone();
            let u = exact.u.clone();
            ProblemSpec {
                name: name.into(),
                a: Diffusion::Constant(Mat2::identity()),
                b_vec: zero_vec(),
                c: Arc::new(move |_, _| -kappa2),
                f: Arc::new(move |x, y| ds(x, y) - kappa2 * u(x, y)),
                exact: Some(exact),
                regime_hint: Regime::General,
                convection_weights: weights,
                dirichlet: None,
            }
        }
        "lshape-singular" => {
            let exact = lshape_exact();
            let ds = exact.div_sigma.clone();
            ProblemSpec {
                name: name.into(),
                a: Diffusion::Constant(Mat2::identity()),
                b_vec: zero_vec(),
                c: zero_scalar(),
                f: Arc::new(move |x, y| ds(x, y)),
                exact: Some(exact),
                regime_hint: Regime::Coercive,
                convection_weights: weights,
                dirichlet: None,
            }
        }
        "jump-diffusion" => {
            let a = |x: f64| if x < 0.5 { 1.0 } else { 10.0 };
            let exact = jump_exact(a);
            let ds = exact.div_sigma.clone();
            ProblemSpec {
                name: name.into(),
                a: Diffusion::Scalar {
                    a: Arc::new(move |x, _| a(x)),
                    smooth: false,
                },
                b_vec: zero_vec(),
                c: zero_scalar(),
                f: Arc::new(move |x, y| ds(x, y)),
                exact: Some(exact),
                regime_hint: Regime::Coercive,
                convection_weights: weights,
                dirichlet: None,
            }
        }
        other => return Err(Error::UnknownName(format!("problem '{other}'"))),
    };
    p.set_convection_weights(weights)?;
    Ok(p)
}

/// Names of the registered benchmark problems.
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "poisson-sine",
        "convection",
        "helmholtz-indefinite",
        "lshape-singular",
        "jump-diffusion",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_source_at_center() {
        let p = builtin_problem("poisson-sine", &BTreeMap::new()).unwrap();
        assert!(((p.f)(0.5, 0.5) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn helmholtz_kappa_between_eigenvalues() {
        let p = builtin_problem("helmholtz-indefinite", &BTreeMap::new()).unwrap();
        let kappa2 = -(p.c)(0.3, 0.7);
        assert!(kappa2 > 2.0 * PI * PI && kappa2 < 5.0 * PI * PI);
    }

    #[test]
    fn jump_diffusion_values() {
        let p = builtin_problem("jump-diffusion", &BTreeMap::new()).unwrap();
        match p.eval_coeff(Coefficient::A, 0.25, 0.4).unwrap() {
            CoeffValue::Matrix(m) => assert_eq!(m.m[0][0], 1.0),
            _ => unreachable!(),
        }
        match p.eval_coeff(Coefficient::A, 0.75, 0.4).unwrap() {
            CoeffValue::Matrix(m) => assert_eq!(m.m[0][0], 10.0),
            _ => unreachable!(),
        }
        assert!(!p.a.is_smooth());
    }

    #[test]
    fn lshape_singular_factor_value() {
        // At (r, theta) = (1, 3 pi / 4) the singular factor is sin(pi/2) = 1.
        let (x, y) = ((3.0 * PI / 4.0).cos(), (3.0 * PI / 4.0).sin());
        assert!((lshape_singular_factor(x, y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_problem() {
        assert!(builtin_problem("nope", &BTreeMap::new()).is_err());
    }

    #[test]
    fn manufactured_residual_identities() {
        // For every preset with exact callbacks the first-order system holds
        // pointwise: div sigma + b.grad u + c u - f = 0 and A grad u + sigma = 0.
        let mut state = 123456789u64;
        let mut rng = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64).fract()
        };
        for name in builtin_names() {
            let p = builtin_problem(name, &BTreeMap::new()).unwrap();
            let e = p.exact.as_ref().unwrap();
            for _ in 0..200 {
                let (x, y) = if *name == "lshape-singular" {
                    // Random point inside the L-shape.
                    loop {
                        let x = 2.0 * rng() - 1.0;
                        let y = 2.0 * rng() - 1.0;
                        if !(x >= 0.0 && y <= 0.0) && x.hypot(y) > 1e-3 {
                            break (x, y);
                        }
                    }
                } else {
                    (rng(), rng())
                };
                let a = p.eval_a(x, y);
                let gu = (e.grad_u)(x, y);
                let s = (e.sigma)(x, y);
                let agu = a.mul_vec(gu);
                let scale = 1.0 + agu[0].abs() + agu[1].abs();
                assert!(
                    (agu[0] + s[0]).abs() / scale < 1e-10 && (agu[1] + s[1]).abs() / scale < 1e-10,
                    "{name}: flux relation at ({x}, {y})"
                );
                let b = (p.b_vec)(x, y);
                let resid = (e.div_sigma)(x, y) + b[0] * gu[0] + b[1] * gu[1]
                    + (p.c)(x, y) * (e.u)(x, y)
                    - (p.f)(x, y);
                let fscale = 1.0 + (p.f)(x, y).abs();
                assert!(
                    resid.abs() / fscale < 1e-10,
                    "{name}: divergence relation at ({x}, {y}): {resid}"
                );
            }
        }
    }

    #[test]
    fn weights_validated() {
        let mut p = builtin_problem("poisson-sine", &BTreeMap::new()).unwrap();
        assert!(p.set_convection_weights([0.5, 0.25, 0.25]).is_ok());
        assert!(p.set_convection_weights([0.5, 0.25, 0.5]).is_err());
        assert!(p.set_convection_weights([-0.5, 1.0, 0.5]).is_err());
    }
}
