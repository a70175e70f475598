//! Iterative regularization of nonlinear ill-posed problems `F(x) = y` from
//! noisy data `y^δ` with `‖y − y^δ‖ ≤ δ`.
//!
//! The crate provides Landweber iteration, Nesterov's accelerated proximal
//! gradient method and the two-point gradient family, stopped by the
//! discrepancy principle or a noise-corrected variant. Two model problems
//! ship with it: a diagonal quadratic operator on truncated ℓ² and periodic
//! auto-convolution on piecewise-linear functions.
//!
//! ```
//! use itreg::prelude::*;
//!
//! let p = DiagonalProblem::new(100, 200).unwrap();
//! let xdag = p.harmonic(100.0);
//! let data = ObservedData::exact(p.apply(&xdag).unwrap());
//! let x0 = p.alternating_start(&xdag, 1.0 / 28.0).unwrap();
//! let stop = StoppingRule::discrepancy(1.0, 1e-3).unwrap();
//! let ball = BallConstraint::disabled(x0.clone());
//! let (x, trace) = nesterov_run(&p, &data, &SolverConfig::new(3.2682e-5), &x0, &ball, &stop).unwrap();
//! assert_eq!(trace.stop_reason, StopReason::DiscrepancyMet);
//! assert!(norm(&x.sub(&xdag)) < norm(&x0.sub(&xdag)));
//! ```

pub mod autoconv;
pub mod diagnostics;
pub mod diagonal;
pub mod error;
pub mod experiment;
pub mod hilbert;
pub mod io;
pub mod operator;
pub mod solvers;
pub mod stopping;

pub use error::{Error, Result};

// Runs the guide's code blocks as doc tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/stopping.md")]
    mod stopping {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

/// The types most programs need.
pub mod prelude {
    pub use crate::autoconv::{AutoconvProblem, FourierCoeffs};
    pub use crate::diagonal::DiagonalProblem;
    pub use crate::error::{Error, Result};
    pub use crate::hilbert::{inner, norm, project_ball, BallConstraint, Vector};
    pub use crate::operator::{residual, ForwardProblem, ObservedData};
    pub use crate::solvers::{
        landweber_run, nesterov_run, tpg_run, CombinationRule, IterationTrace, SolverConfig,
        StopReason,
    };
    pub use crate::stopping::StoppingRule;
}
