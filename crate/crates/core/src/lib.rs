//! Certified hitting-time and total-variation convergence bounds for
//! real-valued Langevin diffusions with symmetric targets.
//!
//! For a symmetric density `π` whose log-gradient pushes toward the origin
//! with strength at least `b` beyond 1, the Langevin diffusion
//! `dX = ½∇log π(X) dt + dB` hits 0 from `y` with a tail
//! `P(H_y ≥ t) ≤ s^{-t} B(max(1,|y|), s, b)`, and by coupling its distance to
//! stationarity in total variation obeys a bound of the same exponential form.
//!
//! ```
//! use langevin_bounds::{bounds, planner, target};
//!
//! let gaussian = target::make_exponential_power(2.0)?;
//! let hit = bounds::hitting_tail_bound(&gaussian, 2.0, 1.4, 20.0)?;
//! assert!(hit.bound < 0.01);
//!
//! let req = planner::PlanRequest {
//!     density: gaussian,
//!     y: 2.0,
//!     epsilon: 0.01,
//!     mode: bounds::BoundMode::TotalVariation,
//!     s_policy: planner::SPolicy::Fixed(1.4),
//! };
//! assert_eq!(planner::plan(&req)?.t_min_int, 20);
//! # Ok::<(), langevin_bounds::Error>(())
//! ```
//!
//! The guide under `book/` walks through the construction; its code
//! listings are compiled and run as doctests of this crate.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod interp;
pub mod pgf;
pub mod planner;
pub mod quadrature;
pub mod report;
pub mod simulator;
pub mod target;

pub use error::{Error, Result};

/// Chapters of the guide, compiled so their code listings run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/targets.md")]
    pub mod targets {}
    #[doc = include_str!("../../../book/src/pgf.md")]
    pub mod pgf {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    pub mod bounds {}
    #[doc = include_str!("../../../book/src/planning.md")]
    pub mod planning {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
}
