//! Grant-free access simulator.
//!
//! `N` devices own the columns of an `M x N` sequence matrix `A`. In one
//! access slot a sparse set of devices transmits over flat Rayleigh channels
//! to `J` antennas, giving the multiple-measurement model `Y = A X + W` with
//! row-sparse `X`. Activity and channels are recovered with simultaneous
//! orthogonal matching pursuit, either with known sparsity or with a
//! noise-level stopping rule.

mod campaign;
mod instance;
mod metrics;
mod somp;

pub use campaign::{
    access_trial, aud_ce_campaign, m_grid, phase_transition, success_rate, transition_point,
    CampaignConfig, CampaignPoint, KStep, PhaseTransitionConfig, TransitionPoint, TrialOutcome,
};
pub use instance::{
    gen_instance, gen_instance_with, snr_linear, ActivityModel, MmvInstance, NoiseCalibration,
};
pub use metrics::{aer, nmse, relative_error};
pub use somp::{blind_threshold, somp, somp_blind, DetectionReport, Dictionary};
