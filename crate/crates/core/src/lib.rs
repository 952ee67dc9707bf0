//! Control stack for an adult-size humanoid soccer robot, built around a
//! deterministic simulation harness.
//!
//! - [`lipm`]: pendulum dynamics and capture-step planning
//! - [`gait`]: open-loop CPG walking, leg kinematics and corrective feedback
//! - [`kick`]: in-walk kick timing and leg-angle augmentation
//! - [`ball`]: ball state estimation and interception timing
//! - [`behavior`]: two-layer behavior FSM, role negotiation, collision avoidance
//! - [`heatmap`]: Gaussian blob targets and sub-pixel blob decoding
//! - [`harness`]: scenario files, closed-loop trials, logs and metrics

pub mod ball;
pub mod behavior;
pub mod gait;
pub mod harness;
pub mod heatmap;
pub mod kick;
pub mod lipm;
