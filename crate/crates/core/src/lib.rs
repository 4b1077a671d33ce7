//! Self-supervised long-range perception.
//!
//! A robot logs its odometry together with a short-range binary sensor and a
//! long-range sensor. Every log record becomes a training instance whose
//! labels are the short-range readings observed when the robot was (before or
//! after) at a set of target poses relative to its current pose. Labels the
//! trajectory never reached are masked out of the loss.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geom;
pub mod sim;
pub mod dataset;
pub mod nn;
pub mod eval;
pub mod pipeline;
