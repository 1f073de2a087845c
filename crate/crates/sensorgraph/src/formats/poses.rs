//! Motion-pair files and pose lists.
//!
//! A motion-pair file holds one hand-eye pair per line:
//!
//! ```text
//! A: tx ty tz qx qy qz qw  B: tx ty tz qx qy qz qw
//! ```
//!
//! A pose list is a `FRAME name` header followed by one pose per line. It
//! carries absolute poses of one sensor, or repeated direct measurements of a
//! single transform.

use std::fmt::Write as _;
use std::path::Path;

use sensorgraph_core::handeye::MotionPair;
use sensorgraph_core::Pose;

use super::{read_with, records, Fields, FileError, ParseError};

pub fn parse_motion_pairs(text: &str) -> Result<Vec<MotionPair>, ParseError> {
    let mut pairs = Vec::new();
    for (line, content, _) in records(text) {
        let mut f = Fields::new(line, content);
        let a = tagged_pose(&mut f, "A:")?;
        let b = tagged_pose(&mut f, "B:")?;
        f.finish()?;
        pairs.push(MotionPair::new(a, b));
    }
    Ok(pairs)
}

fn tagged_pose(f: &mut Fields<'_>, tag: &str) -> Result<Pose, ParseError> {
    let tok = f.next_token(tag)?;
    if tok != tag {
        return Err(f.error(format!("expected {tag:?}, found {tok:?}")));
    }
    f.pose()
}

pub fn write_motion_pairs(pairs: &[MotionPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        let _ = writeln!(out, "A: {}  B: {}", p.a, p.b);
    }
    out
}

pub fn read_motion_pairs(path: &Path) -> Result<Vec<MotionPair>, FileError> {
    read_with(path, parse_motion_pairs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoseList {
    pub frame: String,
    pub poses: Vec<Pose>,
}

pub fn parse_pose_list(text: &str) -> Result<PoseList, ParseError> {
    let mut frame = None;
    let mut poses = Vec::new();
    for (line, content, _) in records(text) {
        let mut f = Fields::new(line, content);
        if frame.is_none() {
            if f.next_token("FRAME header")? != "FRAME" {
                return Err(f.error("expected a FRAME header before the first pose"));
            }
            frame = Some(f.next_token("frame name")?.to_owned());
            f.finish()?;
            continue;
        }
        poses.push(f.pose()?);
        f.finish()?;
    }
    let frame = frame.ok_or_else(|| ParseError::new(1, "missing FRAME header"))?;
    Ok(PoseList { frame, poses })
}

pub fn write_pose_list(list: &PoseList) -> String {
    let mut out = format!("FRAME {}\n", list.frame);
    for p in &list.poses {
        let _ = writeln!(out, "{p}");
    }
    out
}

pub fn read_pose_list(path: &Path) -> Result<PoseList, FileError> {
    read_with(path, parse_pose_list)
}
