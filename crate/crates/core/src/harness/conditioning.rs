use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::RngSpec;

/// Conditioning id taking effect from frame `start` onward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub id: String,
}

/// Parses `"0:A,64:B"`.
pub fn parse_segments(text: &str) -> Result<Vec<Segment>> {
    text.split(',')
        .map(|part| {
            let (start, id) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Parameter(format!("segment {part:?} is not of the form start:id")))?;
            let start = start
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("segment start {start:?} is not a frame index")))?;
            let id = id.trim();
            if id.is_empty() {
                return Err(Error::Parameter(format!("segment {part:?} has an empty id")));
            }
            Ok(Segment { start, id: id.to_string() })
        })
        .collect()
}

pub(crate) fn validate_segments(segments: &[Segment], total_frames: usize) -> Result<()> {
    let first = segments.first().ok_or_else(|| Error::Parameter("segment list is empty".into()))?;
    if first.start != 0 {
        return Err(Error::Parameter(format!("first segment must start at frame 0, got {}", first.start)));
    }
    for pair in segments.windows(2) {
        if pair[1].start <= pair[0].start {
            return Err(Error::Parameter(format!(
                "segment starts must strictly increase ({} then {})",
                pair[0].start, pair[1].start
            )));
        }
    }
    let last = segments.last().unwrap();
    if last.start >= total_frames {
        return Err(Error::Parameter(format!(
            "segment {:?} starts at frame {} but the video has {total_frames} frames",
            last.id, last.start
        )));
    }
    Ok(())
}

/// Per-frame conditioning: frame `f` carries the segment with the largest
/// start `<= f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningTable {
    frame_ids: Vec<String>,
    vectors: Vec<Vec<f32>>,
}

impl ConditioningTable {
    pub fn frames(&self) -> usize {
        self.frame_ids.len()
    }

    pub fn id(&self, frame: usize) -> &str {
        &self.frame_ids[frame]
    }

    pub fn vector(&self, frame: usize) -> &[f32] {
        &self.vectors[frame]
    }

    /// Maximal runs of frames sharing an id, as `(start, end_exclusive, id)`.
    pub fn runs(&self) -> Vec<(usize, usize, &str)> {
        let mut runs: Vec<(usize, usize, &str)> = Vec::new();
        for (f, id) in self.frame_ids.iter().enumerate() {
            match runs.last_mut() {
                Some(last) if last.2 == id => last.1 = f + 1,
                _ => runs.push((f, f + 1, id)),
            }
        }
        runs
    }
}

pub fn segment_conditioning(
    segments: &[Segment],
    total_frames: usize,
    embeddings: &BTreeMap<String, Vec<f32>>,
) -> Result<ConditioningTable> {
    validate_segments(segments, total_frames)?;
    for seg in segments {
        if !embeddings.contains_key(&seg.id) {
            return Err(Error::MissingEmbedding(seg.id.clone()));
        }
    }
    let mut frame_ids = Vec::with_capacity(total_frames);
    let mut vectors = Vec::with_capacity(total_frames);
    let mut current = 0;
    for f in 0..total_frames {
        while current + 1 < segments.len() && segments[current + 1].start <= f {
            current += 1;
        }
        let id = &segments[current].id;
        frame_ids.push(id.clone());
        vectors.push(embeddings[id].clone());
    }
    Ok(ConditioningTable { frame_ids, vectors })
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Deterministic stand-in embedding for an opaque conditioning id:
/// `dim` draws from `N(0, scale^2)` on a stream keyed by the id.
pub fn embedding_for(id: &str, dim: usize, scale: f32, rng: &RngSpec) -> Vec<f32> {
    let mut gen = rng.stream((1 << 32) | (fnv1a(id.as_bytes()) & 0xffff_ffff));
    (0..dim).map(|_| { let x: f32 = StandardNormal.sample(&mut gen); scale * x }).collect()
}
