//! JSON formats for graphs, plants, gains and synthesis results.
//!
//! Matrices are row-major nested arrays. Graph nodes are 1-based in files
//! and 0-based in memory.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cliquelmi_core::graph::Graph;
use cliquelmi_core::lifting::{BlockPartition, Plant};
use cliquelmi_core::synth::{AnalysisOutcome, SynthesisResult};
use cliquelmi_core::verify::VerificationReport;
use cliquelmi_core::Mat;
use serde::{Deserialize, Serialize};

pub type Rows = Vec<Vec<f64>>;

pub fn to_rows(m: &Mat) -> Rows {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

pub fn from_rows(rows: &Rows, what: &str) -> Result<Mat> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        bail!("{what}: rows have different lengths");
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        bail!("{what}: non-finite entry");
    }
    Ok(Mat::from_fn(nr, nc, |r, c| rows[r][c]))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphFile {
    pub n: usize,
    /// 1-based node pairs.
    pub edges: Vec<(usize, usize)>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<Graph> {
        Ok(Graph::from_one_based(self.n, &self.edges)?)
    }

    pub fn from_graph(g: &Graph) -> Self {
        Self {
            n: g.node_count(),
            edges: g.edges().iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantFile {
    /// State dimension of each agent.
    pub nx: Vec<usize>,
    /// Input dimension of each agent.
    pub nu: Vec<usize>,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "Bw", default, skip_serializing_if = "Option::is_none")]
    pub bw: Option<Rows>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Rows>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Rows>,
    #[serde(rename = "Dw", default, skip_serializing_if = "Option::is_none")]
    pub dw: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
}

impl PlantFile {
    pub fn to_plant(&self) -> Result<Plant> {
        let px = BlockPartition::new(self.nx.clone())?;
        let pu = BlockPartition::new(self.nu.clone())?;
        let mut plant = Plant::new(px, pu, from_rows(&self.a, "A")?, from_rows(&self.b, "B")?)?;
        let opt = |m: &Option<Rows>, w: &str| m.as_ref().map(|r| from_rows(r, w)).transpose();
        plant.bw = opt(&self.bw, "Bw")?;
        plant.c = opt(&self.c, "C")?;
        plant.d = opt(&self.d, "D")?;
        plant.dw = opt(&self.dw, "Dw")?;
        plant.validate()?;
        Ok(plant)
    }

    pub fn from_plant(p: &Plant, graph: Option<&Graph>) -> Self {
        let opt = |m: &Option<Mat>| m.as_ref().map(to_rows);
        Self {
            nx: p.partition_x.sizes().to_vec(),
            nu: p.partition_u.sizes().to_vec(),
            a: to_rows(&p.a),
            b: to_rows(&p.b),
            bw: opt(&p.bw),
            c: opt(&p.c),
            d: opt(&p.d),
            dw: opt(&p.dw),
            graph: graph.map(GraphFile::from_graph),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LyapunovJson {
    pub he_max: f64,
    pub p_min: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HinfJson {
    pub norm: f64,
    pub gamma: f64,
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerificationJson {
    pub passed: bool,
    pub hurwitz: bool,
    pub spectral_abscissa: f64,
    pub lyapunov: Option<LyapunovJson>,
    pub sparsity_ok: bool,
    /// 1-based `(row agent, column agent, norm)` of the worst forbidden block.
    pub worst_block: Option<(usize, usize, f64)>,
    pub hinf: Option<HinfJson>,
    pub notes: Vec<String>,
}

impl From<&VerificationReport> for VerificationJson {
    fn from(r: &VerificationReport) -> Self {
        Self {
            passed: r.passed,
            hurwitz: r.hurwitz,
            spectral_abscissa: r.spectral_abscissa,
            lyapunov: r.lyapunov.as_ref().map(|l| LyapunovJson {
                he_max: l.he_max,
                p_min: l.p_min,
                passed: l.passed,
            }),
            sparsity_ok: r.sparsity_ok,
            worst_block: r.worst_block.map(|(i, j, v)| (i + 1, j + 1, v)),
            hinf: r.hinf.as_ref().map(|h| HinfJson {
                norm: h.norm,
                gamma: h.gamma,
                margin: h.margin,
                passed: h.passed,
            }),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResidualsJson {
    pub sdp_status: String,
    pub iterations: usize,
    pub max_violation: f64,
    pub min_slack: f64,
    pub equality: f64,
    pub diagnostics: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultFile {
    pub method: String,
    pub problem: String,
    pub status: String,
    #[serde(rename = "K")]
    pub k: Option<Rows>,
    #[serde(rename = "P")]
    pub p: Option<Rows>,
    pub gamma_achieved: Option<f64>,
    /// `C` used by an output-feedback gain.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub output_map: Option<Rows>,
    pub residuals: Option<ResidualsJson>,
    pub verification: Option<VerificationJson>,
    /// Outcome of the post-hoc sparse certificate search, when run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posthoc: Option<String>,
    pub notes: Vec<String>,
}

impl ResultFile {
    pub fn from_result(r: &SynthesisResult) -> Self {
        let problem = match r.kind {
            cliquelmi_core::synth::ProblemKind::Stabilize => "stab".to_string(),
            cliquelmi_core::synth::ProblemKind::HinfFixed(g) => format!("hinf(gamma={g})"),
            cliquelmi_core::synth::ProblemKind::HinfMinimize => "hinf(minimize)".to_string(),
        };
        Self {
            method: r.method.label().to_string(),
            problem,
            status: r.status.label().to_string(),
            k: r.k.as_ref().map(to_rows),
            p: r.p.as_ref().map(to_rows),
            gamma_achieved: r.gamma,
            output_map: r.output_map.as_ref().map(to_rows),
            residuals: r.sdp.as_ref().map(|s| ResidualsJson {
                sdp_status: format!("{:?}", s.status),
                iterations: s.iterations,
                max_violation: s.max_violation,
                min_slack: s.min_slack,
                equality: s.equality_residual,
                diagnostics: s.diagnostics.clone(),
            }),
            verification: r.report.as_ref().map(VerificationJson::from),
            posthoc: r.posthoc.as_ref().map(|o| match o {
                AnalysisOutcome::Certified(_) => "certified".to_string(),
                AnalysisOutcome::Infeasible { conclusive: true } => "infeasible".to_string(),
                AnalysisOutcome::Infeasible { conclusive: false } => "infeasible (inconclusive)".to_string(),
                AnalysisOutcome::NumericalFailure(s) => format!("numerical failure: {s}"),
            }),
            notes: r.notes.clone(),
        }
    }
}

/// Gain file: either a bare matrix or an object with a `K` field.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GainFile {
    Bare(Rows),
    Wrapped {
        #[serde(rename = "K")]
        k: Rows,
    },
}

impl GainFile {
    pub fn to_mat(&self) -> Result<Mat> {
        match self {
            GainFile::Bare(r) | GainFile::Wrapped { k: r } => from_rows(r, "K"),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plant_round_trip() {
        let text = r#"{"nx":[1,2],"nu":[1,1],
            "A":[[0,1,0],[0,0,1],[-1,0,0]],
            "B":[[1,0],[0,0],[0,1]],
            "graph":{"n":2,"edges":[[1,2]]}}"#;
        let f: PlantFile = serde_json::from_str(text).unwrap();
        let p = f.to_plant().unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.a[(2, 0)], -1.0);
        let g = f.graph.as_ref().unwrap().to_graph().unwrap();
        assert!(g.has_edge(0, 1));
        let back = PlantFile::from_plant(&p, Some(&g));
        assert_eq!(back.a, f.a);
        assert_eq!(back.graph, f.graph);
    }

    #[test]
    fn rejects_ragged_and_bad_nodes() {
        assert!(from_rows(&vec![vec![1.0, 2.0], vec![1.0]], "A").is_err());
        let g = GraphFile {
            n: 2,
            edges: vec![(0, 1)],
        };
        assert!(g.to_graph().is_err());
    }

    #[test]
    fn gain_file_forms() {
        let bare: GainFile = serde_json::from_str("[[1,2],[3,4]]").unwrap();
        let wrapped: GainFile = serde_json::from_str(r#"{"K":[[1,2],[3,4]],"status":"x"}"#).unwrap();
        assert_eq!(bare.to_mat().unwrap(), wrapped.to_mat().unwrap());
    }
}
