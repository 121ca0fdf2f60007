//! Acoustic descriptors from participant speech and their per-session
//! functional projections.
//!
//! Every base descriptor contributes itself plus its first and second deltas,
//! and each of those tracks is summarized by the 24 functionals:
//!
//! | group         | base tracks | tracks with deltas | dimension |
//! |---------------|-------------|--------------------|-----------|
//! | spectral      | 12          | 36                 | 864       |
//! | prosody       | 4           | 12                 | 288       |
//! | voice quality | 4           | 12                 | 288       |
//! | merged        |             |                    | 1440      |

pub mod deltas;
pub mod frames;
pub mod functionals;
pub mod prosody;
pub mod spectral;
pub mod voice_quality;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Session;
use crate::scalar::Real;

pub use deltas::add_derivatives;
pub use frames::{frame_signal, Frame, FrameSet};
pub use functionals::{apply_functionals, FUNCTIONAL_COUNT, FUNCTIONAL_NAMES};
pub use prosody::prosodic_llds;
pub use spectral::spectral_llds;
pub use voice_quality::voice_quality_llds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LldGroup {
    Spectral,
    Prosody,
    VoiceQuality,
}

/// A per-frame descriptor track.
#[derive(Debug, Clone, PartialEq)]
pub struct LldTrack<T> {
    pub name: String,
    pub group: LldGroup,
    /// 0 for the base descriptor, 1 for Δ, 2 for ΔΔ.
    pub derivative: u8,
    pub values: Vec<T>,
}

impl<T: Real> LldTrack<T> {
    pub fn new(name: &str, group: LldGroup, values: Vec<T>) -> Self {
        LldTrack {
            name: name.to_string(),
            group,
            derivative: 0,
            values,
        }
    }

    /// The track followed by its Δ and ΔΔ tracks.
    pub fn with_derivatives(self) -> Result<[LldTrack<T>; 3]> {
        let (d, dd) = add_derivatives(&self.values)?;
        let derived = |values: Vec<T>, order: u8, suffix: &str| LldTrack {
            name: format!("{}{suffix}", self.name),
            group: self.group,
            derivative: order,
            values,
        };
        let first = derived(d, 1, "_d");
        let second = derived(dd, 2, "_dd");
        Ok([self, first, second])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AcousticGroup {
    Spectral,
    Prosody,
    VoiceQuality,
    Merged,
}

impl AcousticGroup {
    pub fn prefix(self) -> &'static str {
        match self {
            AcousticGroup::Spectral => "s",
            AcousticGroup::Prosody => "p",
            AcousticGroup::VoiceQuality => "vq",
            AcousticGroup::Merged => "m",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            AcousticGroup::Spectral => 864,
            AcousticGroup::Prosody | AcousticGroup::VoiceQuality => 288,
            AcousticGroup::Merged => 1440,
        }
    }
}

/// Named functional values for one session and one group.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticVector<T> {
    pub session_id: String,
    pub group: AcousticGroup,
    pub names: Vec<String>,
    pub values: Vec<T>,
}

impl<T> AcousticVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// All frame-level descriptors of one session.
#[derive(Debug, Clone)]
pub struct SessionLlds<T> {
    pub spectral: Vec<LldTrack<T>>,
    pub prosody: Vec<LldTrack<T>>,
    pub voice_quality: Vec<LldTrack<T>>,
}

pub fn session_llds<T: Real>(session: &Session<T>) -> Result<SessionLlds<T>> {
    let audio = session
        .audio
        .as_ref()
        .ok_or_else(|| Error::EmptyInput(format!("session {} has no audio", session.id)))?;
    let frames = frame_signal(audio, &session.turns)?;
    if frames.is_empty() {
        return Err(Error::EmptyInput(format!(
            "session {} has no complete participant frames",
            session.id
        )));
    }
    let spectral = spectral_llds(&frames)?;
    let prosody = prosodic_llds(&frames)?;
    let voice_quality = voice_quality_llds(&frames, &prosody[0].values)?;
    Ok(SessionLlds {
        spectral,
        prosody,
        voice_quality,
    })
}

fn project<T: Real>(
    session_id: &str,
    group: AcousticGroup,
    tracks: &[LldTrack<T>],
) -> Result<AcousticVector<T>> {
    let mut names = Vec::with_capacity(group.dimension());
    let mut values = Vec::with_capacity(group.dimension());
    for base in tracks {
        for track in base.clone().with_derivatives()? {
            let f = apply_functionals(&track.values)?;
            for (fname, v) in FUNCTIONAL_NAMES.iter().zip(f) {
                names.push(format!("{}_{}_{}", group.prefix(), track.name, fname));
                values.push(v);
            }
        }
    }
    Ok(AcousticVector {
        session_id: session_id.to_string(),
        group,
        names,
        values,
    })
}

impl<T: Real> SessionLlds<T> {
    pub fn vector(&self, session_id: &str, group: AcousticGroup) -> Result<AcousticVector<T>> {
        match group {
            AcousticGroup::Spectral => project(session_id, group, &self.spectral),
            AcousticGroup::Prosody => project(session_id, group, &self.prosody),
            AcousticGroup::VoiceQuality => project(session_id, group, &self.voice_quality),
            AcousticGroup::Merged => merge_groups(
                &self.vector(session_id, AcousticGroup::Prosody)?,
                &self.vector(session_id, AcousticGroup::Spectral)?,
                &self.vector(session_id, AcousticGroup::VoiceQuality)?,
            ),
        }
    }
}

/// Functional vector of one group (or the merged vector) for a session.
pub fn session_acoustic_vector<T: Real>(
    session: &Session<T>,
    group: AcousticGroup,
) -> Result<AcousticVector<T>> {
    session_llds(session)?.vector(&session.id, group)
}

/// Concatenates prosody, spectral and voice quality vectors, in that order.
pub fn merge_groups<T: Real>(
    p: &AcousticVector<T>,
    s: &AcousticVector<T>,
    vq: &AcousticVector<T>,
) -> Result<AcousticVector<T>> {
    let expected = [
        (p, AcousticGroup::Prosody),
        (s, AcousticGroup::Spectral),
        (vq, AcousticGroup::VoiceQuality),
    ];
    for (v, g) in expected {
        if v.group != g {
            return Err(Error::InvalidArgument(format!(
                "expected {g:?} vector, got {:?}",
                v.group
            )));
        }
        if v.session_id != p.session_id {
            return Err(Error::InvalidArgument(format!(
                "session mismatch: {} vs {}",
                p.session_id, v.session_id
            )));
        }
    }
    let mut names = Vec::with_capacity(AcousticGroup::Merged.dimension());
    let mut values = Vec::with_capacity(AcousticGroup::Merged.dimension());
    for v in [p, s, vq] {
        names.extend(v.names.iter().cloned());
        values.extend(v.values.iter().copied());
    }
    Ok(AcousticVector {
        session_id: p.session_id.clone(),
        group: AcousticGroup::Merged,
        names,
        values,
    })
}
