//! Greedy nearest-neighbor association of per-frame plate observations.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::speed::{TrackSample, TrackSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerParams {
    /// Maximum distance between predicted and observed corner.
    pub gate_px: f64,
    /// A track closes after this many consecutive frames without a match.
    pub max_missed: usize,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            gate_px: 60.0,
            max_missed: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub corner: Point2,
    pub edge: Option<[Point2; 2]>,
}

/// All observations of one frame. Frames without detections should still be
/// passed so that missed frames are counted.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservations {
    pub frame: usize,
    pub timestamp: f64,
    pub observations: Vec<Observation>,
}

/// A closed track together with the `(frame position, observation index)`
/// of each member, for looking up the originating detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub sequence: TrackSequence,
    pub members: Vec<(usize, usize)>,
}

struct OpenTrack {
    track: Track,
}

impl OpenTrack {
    fn last_frame(&self) -> usize {
        self.track.sequence.samples.last().map_or(0, |s| s.frame)
    }

    /// Constant-velocity prediction from the last two observations.
    fn predict(&self, frame: usize) -> Point2 {
        let s = &self.track.sequence.samples;
        let last = &s[s.len() - 1];
        if s.len() < 2 {
            return last.corner;
        }
        let prev = &s[s.len() - 2];
        let gap = (last.frame - prev.frame) as f64;
        let vel = (last.corner - prev.corner) * (1.0 / gap);
        last.corner + vel * (frame - last.frame) as f64
    }
}

/// Links observations into tracks. Within each frame, candidate pairs
/// inside the gate are matched greedily by increasing distance, so a track
/// receives at most one observation per frame. Tracks are returned in order
/// of creation with ids `0, 1, ...`.
pub fn associate_tracks(frames: &[FrameObservations], params: &TrackerParams) -> Vec<Track> {
    let mut open: Vec<OpenTrack> = Vec::new();
    let mut closed: Vec<Track> = Vec::new();
    let mut next_id = 0;

    for (pos, f) in frames.iter().enumerate() {
        let (still_open, done): (Vec<_>, Vec<_>) = open
            .into_iter()
            .partition(|t| f.frame.saturating_sub(t.last_frame()) <= params.max_missed);
        closed.extend(done.into_iter().map(|t| t.track));
        open = still_open;

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, t) in open.iter().enumerate() {
            let pred = t.predict(f.frame);
            for (oi, o) in f.observations.iter().enumerate() {
                let d = pred.distance(&o.corner);
                if d <= params.gate_px {
                    pairs.push((d, ti, oi));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_used = alloc::vec![false; open.len()];
        let mut obs_used = alloc::vec![false; f.observations.len()];
        for (_, ti, oi) in pairs {
            if track_used[ti] || obs_used[oi] {
                continue;
            }
            track_used[ti] = true;
            obs_used[oi] = true;
            push(&mut open[ti].track, pos, f, oi);
        }
        for (oi, used) in obs_used.iter().enumerate() {
            if !used {
                let mut track = Track {
                    sequence: TrackSequence::new(next_id, Vec::new()),
                    members: Vec::new(),
                };
                next_id += 1;
                push(&mut track, pos, f, oi);
                open.push(OpenTrack { track });
            }
        }
    }
    closed.extend(open.into_iter().map(|t| t.track));
    closed.sort_by_key(|t| t.sequence.track_id);
    closed
}

fn push(track: &mut Track, pos: usize, f: &FrameObservations, oi: usize) {
    let o = &f.observations[oi];
    track.sequence.samples.push(TrackSample {
        frame: f.frame,
        timestamp: f.timestamp,
        corner: o.corner,
        edge: o.edge,
    });
    track.members.push((pos, oi));
}
