//! The query channel: a trusted server releases `Z = Y + V`, a remote
//! station recovers `Ŷ = Z − V′` from its synchronized copy of the noise.

pub mod distortion;
pub mod frame;
pub mod session;

pub use distortion::{distortion_bound, one_level_band, transition_matrix, TransitionMatrix};
pub use frame::{decode_frame, encode_frame, Frame, FrameType};
pub use session::{
    run_session, run_session_loopback, DistortionReport, QueryRecord, Recovery, SessionConfig, SessionOutcome, SyncMode,
};
