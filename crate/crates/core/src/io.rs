//! Sphere projection and JSON/CSV documents for frames, lifts and homotopy
//! grids.
//!
//! Floats are written in shortest round-trip form, so reading a document
//! back reproduces every value bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotopy::{self, uniform_grid, verify_grid, GridData, Homotopy, VerificationReport};
use crate::lifting::{classify, lift, QuatPath};
use crate::quat::{rho, UnitQuaternion, Vec3};
use crate::so3::Rotation;
use crate::stabilize::{stabilize, wobble_shuvit, AxisFrame, WobbleParams};
use crate::tricks::{parse, Flip};

/// Projected norm at or below which a sample has no image on the sphere.
pub const PROJECTION_EPSILON: f64 = 1e-12;

/// Tolerance used when re-verifying a stored homotopy.
pub const DEFAULT_VERIFY_TOLERANCE: f64 = 1e-9;

/// Tolerance for stabilization homotopies, whose lift is sampled.
pub const STABILIZE_VERIFY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

/// Points on the unit 2-sphere, one per path sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedCurve {
    pub t: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

/// Drops the `i` component and renormalizes: `q ↦ (q0, −q2, −q3)/‖·‖`.
pub fn project_point(q: &UnitQuaternion) -> Option<[f64; 3]> {
    let p = [q.q0, -q.q2, -q.q3];
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > PROJECTION_EPSILON).then(|| p.map(|x| x / norm))
}

pub fn project(path: &QuatPath) -> Result<ProjectedCurve> {
    let mut t = Vec::with_capacity(path.len());
    let mut points = Vec::with_capacity(path.len());
    for (index, s) in path.samples().iter().enumerate() {
        points.push(project_point(&s.q).ok_or(Error::DegenerateProjection { index })?);
        t.push(s.t);
    }
    Ok(ProjectedCurve { t, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDocument {
    pub trick: String,
    #[serde(flatten)]
    pub curve: ProjectedCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub t: f64,
    #[serde(rename = "R")]
    pub r: [f64; 9],
}

/// A sampled flip with its class and landing, as exported for animation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSequence {
    pub trick: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    pub class: u8,
    pub landing: String,
    pub samples: Vec<FrameSample>,
}

impl FrameSequence {
    pub fn build(f: &Flip, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two frames".into()));
        }
        let class = classify(f)?;
        let samples = uniform_grid(n)
            .into_iter()
            .map(|t| FrameSample { t, r: f.at(t).to_row_major() })
            .collect();
        Ok(Self {
            trick: f.name().to_string(),
            expr: f.expr().map(|e| e.to_string()),
            class: class.residue(),
            landing: f.landing().tag().to_string(),
            samples,
        })
    }

    /// Frames as rotations; fails on a sample that is not a rotation.
    pub fn rotations(&self) -> Result<Vec<(f64, Rotation)>> {
        self.samples
            .iter()
            .map(|s| Ok((s.t, Rotation::from_row_major(s.r)?)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r11,r12,r13,r21,r22,r23,r31,r32,r33\n");
        for s in &self.samples {
            out.push_str(&format!("{:?}", s.t));
            for x in s.r {
                out.push(',');
                out.push_str(&format!("{x:?}"));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the rows of [`to_csv`](Self::to_csv). CSV carries no metadata,
    /// so only the samples are returned.
    pub fn samples_from_csv(src: &str) -> Result<Vec<FrameSample>> {
        let mut lines = src.lines();
        match lines.next() {
            Some(h) if h.trim() == "t,r11,r12,r13,r21,r22,r23,r31,r32,r33" => {}
            _ => return Err(Error::Serialization("missing or wrong CSV header".into())),
        }
        lines
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(row, line)| {
                let values: Vec<f64> = line
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Serialization(format!("row {}: {e}", row + 1)))?;
                if values.len() != 10 {
                    return Err(Error::Serialization(format!("row {}: expected 10 columns", row + 1)));
                }
                let mut r = [0.0; 9];
                r.copy_from_slice(&values[1..]);
                Ok(FrameSample { t: values[0], r })
            })
            .collect()
    }
}

pub fn export_frames(f: &Flip, n: usize, format: Format) -> Result<String> {
    let seq = FrameSequence::build(f, n)?;
    match format {
        Format::Json => seq.to_json(),
        Format::Csv => Ok(seq.to_csv()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftSample {
    pub t: f64,
    pub q: [f64; 4],
}

/// A lifted path with its projection onto the plotting sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftDocument {
    pub trick: String,
    pub class: u8,
    pub samples: Vec<LiftSample>,
    pub points: Vec<[f64; 3]>,
}

impl LiftDocument {
    pub fn build(f: &Flip, n: usize) -> Result<Self> {
        let path = lift(f, n)?;
        let class = classify(f)?;
        let curve = project(&path)?;
        Ok(Self {
            trick: f.name().to_string(),
            class: class.residue(),
            samples: path
                .samples()
                .iter()
                .map(|s| LiftSample { t: s.t, q: s.q.to_array() })
                .collect(),
            points: curve.points,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        Ok(serde_json::from_str(src)?)
    }
}

pub fn export_projection(f: &Flip, n: usize) -> Result<String> {
    let doc = ProjectionDocument {
        trick: f.name().to_string(),
        curve: project(&lift(f, n)?)?,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parameters that rebuild a stabilization homotopy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilizeParams {
    pub a: f64,
    pub omega: f64,
    pub n_samples: usize,
}

impl StabilizeParams {
    pub fn homotopy(&self) -> Result<Homotopy> {
        let p = WobbleParams::new(self.a, self.omega)?;
        let frame = AxisFrame::from_axis(-Vec3::K)?;
        Ok(stabilize(&wobble_shuvit(p), frame, self.n_samples)?.homotopy)
    }
}

/// Lift-space samples of a homotopy, `quat[i * t_grid.len() + j]` at
/// `(s_grid[i], t_grid[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyGrid {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<StabilizeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub quat: Vec<[f64; 4]>,
}

impl HomotopyGrid {
    pub fn sample(h: &Homotopy, grid_s: usize, grid_t: usize) -> Result<Self> {
        if grid_s < 2 || grid_t < 2 {
            return Err(Error::InvalidArgument("grids need at least two points".into()));
        }
        let (s_grid, t_grid) = (uniform_grid(grid_s), uniform_grid(grid_t));
        let quat = s_grid
            .iter()
            .flat_map(|&s| t_grid.iter().map(move |&t| h.lift_at(s, t).to_array()))
            .collect();
        Ok(Self {
            name: h.name().to_string(),
            params: None,
            source: h.source().expr().map(|e| e.to_string()),
            target: h.target().expr().map(|e| e.to_string()),
            s_grid,
            t_grid,
            quat,
        })
    }

    pub fn with_params(mut self, params: StabilizeParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let grid: Self = serde_json::from_str(src)?;
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let (ns, nt) = (self.s_grid.len(), self.t_grid.len());
        if ns < 2 || nt < 2 {
            return Err(Error::Serialization("grids need at least two points".into()));
        }
        if self.quat.len() != ns * nt {
            return Err(Error::Serialization(format!(
                "expected {} quaternions for a {ns}x{nt} grid, found {}",
                ns * nt,
                self.quat.len()
            )));
        }
        for grid in [&self.s_grid, &self.t_grid] {
            if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Serialization("grids must increase from 0 to 1".into()));
            }
        }
        Ok(())
    }

    fn unit(&self, index: usize) -> Result<UnitQuaternion> {
        let [a, b, c, d] = self.quat[index];
        UnitQuaternion::from_components(a, b, c, d)
    }

    /// The homotopy this grid claims to sample, when its name is known.
    pub fn rebuild(&self) -> Result<Option<Homotopy>> {
        if let Some(p) = self.params {
            return p.homotopy().map(Some);
        }
        if homotopy::NAMES.contains(&self.name.as_str()) {
            return homotopy::by_name(&self.name).map(Some);
        }
        Ok(None)
    }
}

/// Outcome of [`verify_document`].
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentVerification {
    pub report: VerificationReport,
    /// Largest difference between stored and recomputed lift values, when the
    /// homotopy could be rebuilt.
    pub stored_deviation: Option<f64>,
}

impl DocumentVerification {
    pub fn passed(&self) -> bool {
        self.report.passed() && self.stored_deviation.is_none_or(|d| d <= self.report.tol)
    }
}

/// Checks a stored grid. Known homotopies are rebuilt and compared sample by
/// sample; otherwise only the stored values are checked.
pub fn verify_document(grid: &HomotopyGrid) -> Result<DocumentVerification> {
    grid.validate()?;
    let tol = if grid.params.is_some() {
        STABILIZE_VERIFY_TOLERANCE
    } else {
        DEFAULT_VERIFY_TOLERANCE
    };
    let nt = grid.t_grid.len();
    let mut values = Vec::with_capacity(grid.s_grid.len());
    for i in 0..grid.s_grid.len() {
        let row = (0..nt)
            .map(|j| grid.unit(i * nt + j).map(|q| rho(&q)))
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    let data = GridData {
        s_grid: &grid.s_grid,
        t_grid: &grid.t_grid,
        values: &values,
    };
    let flip_of = |src: &Option<String>| -> Result<Option<Flip>> {
        src.as_deref()
            .map(|s| Flip::from_expr(parse(s)?))
            .transpose()
    };

    match grid.rebuild()? {
        Some(h) => {
            let mut stored = 0.0_f64;
            for (i, &s) in grid.s_grid.iter().enumerate() {
                for (j, &t) in grid.t_grid.iter().enumerate() {
                    let q = grid.unit(i * nt + j)?;
                    stored = stored.max(q.max_abs_diff(&h.lift_at(s, t)));
                }
            }
            let map = |s: f64, t: f64| h.map(s, t);
            let report = verify_grid(&data, Some(h.source()), Some(h.target()), Some(&map), tol);
            Ok(DocumentVerification {
                report,
                stored_deviation: Some(stored),
            })
        }
        None => {
            let (source, target) = (flip_of(&grid.source)?, flip_of(&grid.target)?);
            let report = verify_grid(&data, source.as_ref(), target.as_ref(), None, tol);
            Ok(DocumentVerification {
                report,
                stored_deviation: None,
            })
        }
    }
}

/// Unit-norm check on a projected curve.
pub fn max_projection_norm_error(curve: &ProjectedCurve) -> f64 {
    curve
        .points
        .iter()
        .map(|p| (p.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max)
}
