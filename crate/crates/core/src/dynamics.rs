//! Anger trajectories, dynamic time warping and trapezoidal area under the
//! trajectory.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dialogue, Role};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryMode {
    /// One value per round: the mean anger of the turns in that round.
    #[default]
    Round,
    /// One trajectory per role, one value per turn of that role.
    Speaker,
}

impl FromStr for TrajectoryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "round" => Ok(TrajectoryMode::Round),
            "speaker" => Ok(TrajectoryMode::Speaker),
            _ => Err(Error::Config(format!("unknown trajectory mode `{s}` (round|speaker)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngerTrajectory {
    pub dialogue_id: String,
    /// `None` for round-averaged trajectories.
    pub speaker: Option<Role>,
    values: Vec<f64>,
}

impl AngerTrajectory {
    pub fn new(dialogue_id: impl Into<String>, speaker: Option<Role>, values: Vec<f64>) -> Result<Self> {
        let dialogue_id = dialogue_id.into();
        if values.is_empty() {
            return Err(Error::annotation(dialogue_id, "empty anger trajectory"));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::annotation(dialogue_id, format!("anger value {v} outside [0,1]")));
        }
        Ok(AngerTrajectory {
            dialogue_id,
            speaker,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn anger_values(dialogue: &Dialogue) -> Result<&[crate::corpus::TurnAnnotation]> {
    let ann = dialogue
        .annotations
        .as_ref()
        .ok_or_else(|| Error::annotation(&dialogue.id, "dialogue has no annotations"))?;
    if ann.per_turn.len() != dialogue.turns.len() {
        return Err(Error::annotation(&dialogue.id, "annotation length differs from turn count"));
    }
    Ok(&ann.per_turn)
}

/// Round-averaged trajectory. Round `r` holds turns `2r` and `2r + 1`; an
/// odd final turn forms a round of its own.
pub fn round_trajectory(dialogue: &Dialogue) -> Result<AngerTrajectory> {
    let anger = anger_values(dialogue)?;
    let values = anger
        .chunks(2)
        .map(|c| c.iter().map(|a| a.anger).sum::<f64>() / c.len() as f64)
        .collect();
    AngerTrajectory::new(&dialogue.id, None, values)
}

/// Buyer and seller trajectories, in that order.
pub fn speaker_trajectories(dialogue: &Dialogue) -> Result<[AngerTrajectory; 2]> {
    let anger = anger_values(dialogue)?;
    let of = |role: Role| {
        let values = dialogue
            .turns
            .iter()
            .zip(anger)
            .filter(|(u, _)| u.speaker == role)
            .map(|(_, a)| a.anger)
            .collect();
        AngerTrajectory::new(&dialogue.id, Some(role), values)
    };
    Ok([of(Role::Buyer)?, of(Role::Seller)?])
}

/// One trajectory in round mode, two (buyer, seller) in speaker mode.
pub fn trajectory(dialogue: &Dialogue, mode: TrajectoryMode) -> Result<Vec<AngerTrajectory>> {
    match mode {
        TrajectoryMode::Round => Ok(vec![round_trajectory(dialogue)?]),
        TrajectoryMode::Speaker => Ok(speaker_trajectories(dialogue)?.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DtwOptions {
    /// Divide the optimal cumulative cost by the number of cells on the
    /// optimal warping path.
    pub normalize: bool,
}

/// Classic DTW with `|a_i - b_j|` local cost, both ends anchored.
pub fn dtw(a: &[f64], b: &[f64]) -> Result<f64> {
    dtw_with(a, b, DtwOptions::default())
}

pub fn dtw_with(a: &[f64], b: &[f64], opts: DtwOptions) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("DTW of an empty sequence".into()));
    }
    let m = b.len();
    // (cost, path length) per cell, two rows at a time
    let mut prev = vec![(f64::INFINITY, 0usize); m + 1];
    let mut cur = vec![(f64::INFINITY, 0usize); m + 1];
    prev[0] = (0.0, 0);
    for &x in a {
        cur[0] = (f64::INFINITY, 0);
        for j in 1..=m {
            let local = (x - b[j - 1]).abs();
            // diagonal first so ties keep the shorter path
            let mut best = prev[j - 1];
            for cand in [prev[j], cur[j - 1]] {
                if cand.0 < best.0 {
                    best = cand;
                }
            }
            cur[j] = (best.0 + local, best.1 + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (cost, len) = prev[m];
    Ok(if opts.normalize { cost / len as f64 } else { cost })
}

/// Trapezoidal area with `dt = 1/(T-1)`.
pub fn auc_values(values: &[f64]) -> Result<f64> {
    let t = values.len();
    if t < 2 {
        return Err(Error::TooFewSamples(format!(
            "AUC needs at least 2 time steps, got {t}"
        )));
    }
    // sum of trapezoids times dt is the mean of the segment midpoints;
    // shifting by the first midpoint keeps constant inputs exact
    let mids: Vec<f64> = values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let base = mids[0];
    let dt = 1.0 / (t - 1) as f64;
    Ok(base + mids.iter().map(|m| m - base).sum::<f64>() * dt)
}

pub fn auc(traj: &AngerTrajectory) -> Result<f64> {
    auc_values(&traj.values)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `dialogue_id,t,value` rows with 1-based `t`. Speaker trajectories
/// carry the role as an `#buyer` / `#seller` suffix on the id.
pub fn write_csv<W: Write>(trajectories: &[AngerTrajectory], mut w: W) -> std::io::Result<()> {
    writeln!(w, "dialogue_id,t,value")?;
    for tr in trajectories {
        let id = match tr.speaker {
            Some(r) => format!("{}#{}", tr.dialogue_id, r.as_str()),
            None => tr.dialogue_id.clone(),
        };
        let id = csv_field(&id);
        for (t, v) in tr.values.iter().enumerate() {
            writeln!(w, "{id},{},{v}", t + 1)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotationSet, TurnAnnotation};

    fn annotated(anger: &[f64]) -> Dialogue {
        let texts: Vec<String> = (0..anger.len()).map(|i| format!("turn {i}")).collect();
        let mut d = Dialogue::from_texts("d1", Role::Buyer, &texts);
        d.annotations = Some(AnnotationSet {
            dialogue_id: "d1".into(),
            per_turn: anger
                .iter()
                .map(|&a| TurnAnnotation { anger: a, irp: vec![] })
                .collect(),
        });
        d
    }

    #[test]
    fn round_means() {
        let t = round_trajectory(&annotated(&[0.9, 0.98, 0.89, 0.90])).unwrap();
        assert!((t.values()[0] - 0.94).abs() < 1e-15);
        assert!((t.values()[1] - 0.895).abs() < 1e-15);
        let odd = round_trajectory(&annotated(&[0.2, 0.4, 0.7])).unwrap();
        assert_eq!(odd.values()[1], 0.7);
    }

    #[test]
    fn speaker_split() {
        let [b, s] = speaker_trajectories(&annotated(&[0.1, 0.2, 0.3, 0.4, 0.5])).unwrap();
        assert_eq!(b.values(), [0.1, 0.3, 0.5]);
        assert_eq!(s.values(), [0.2, 0.4]);
        assert_eq!(s.speaker, Some(Role::Seller));
    }

    #[test]
    fn unannotated_rejected() {
        let d = Dialogue::from_texts("x", Role::Buyer, &["a".into(), "b".into()]);
        assert!(matches!(round_trajectory(&d), Err(Error::Annotation { .. })));
    }

    #[test]
    fn dtw_fixtures() {
        assert_eq!(dtw(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(dtw(&[0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(dtw(&[0.3, 0.5, 0.1], &[0.3, 0.5, 0.1]).unwrap(), 0.0);
        assert_eq!(dtw(&[0.0], &[1.0, 1.0, 1.0]).unwrap(), 3.0);
        assert!(dtw(&[], &[1.0]).is_err());
    }

    #[test]
    fn dtw_normalized_by_path_length() {
        let n = dtw_with(&[0.0], &[1.0, 1.0, 1.0], DtwOptions { normalize: true }).unwrap();
        assert_eq!(n, 1.0);
        // [0,1] vs [1,0]: optimal raw cost 2 on the diagonal path of length 2
        let n = dtw_with(&[0.0, 1.0], &[1.0, 0.0], DtwOptions { normalize: true }).unwrap();
        assert_eq!(n, 1.0);
    }

    #[test]
    fn auc_fixtures() {
        assert_eq!(auc_values(&[0.0, 1.0, 0.0]).unwrap(), 0.5);
        assert_eq!(auc_values(&[0.1; 7]).unwrap(), 0.1);
        assert_eq!(auc_values(&[0.7; 101]).unwrap(), 0.7);
        assert_eq!(auc_values(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(auc_values(&[0.4]).is_err());
    }

    #[test]
    fn trajectory_bounds_checked() {
        assert!(AngerTrajectory::new("x", None, vec![1.2]).is_err());
        assert!(AngerTrajectory::new("x", None, vec![]).is_err());
    }

    #[test]
    fn csv_export() {
        let a = AngerTrajectory::new("a,1", None, vec![0.5, 0.25]).unwrap();
        let b = AngerTrajectory::new("b", Some(Role::Seller), vec![1.0]).unwrap();
        let mut out = Vec::new();
        write_csv(&[a, b], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "dialogue_id,t,value\n\"a,1\",1,0.5\n\"a,1\",2,0.25\nb#seller,1,1\n"
        );
    }
}
