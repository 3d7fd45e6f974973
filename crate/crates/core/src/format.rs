//! JSON interchange for networks, mixtures and fit reports.
//!
//! A network file lists nodes in ordering position:
//!
//! ```json
//! {"nodes": [{"name": "A", "states": 2, "parents": [], "cpt": [[0.6, 0.4]]},
//!            {"name": "B", "states": 2, "parents": ["A"], "cpt": [[0.8, 0.2], [0.3, 0.7]]}]}
//! ```
//!
//! `cpt` holds one row per parent configuration (first parent most
//! significant) and may be omitted when only the structure is needed. A
//! mixture file adds `submodels` to every node; its `cpt` is the collapsed table.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::FitReport;
use crate::mixture::{MixtureNetwork, SubmodelSpec};
use crate::network::{DiscreteNetwork, NodeSpec, Structure};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub nodes: Vec<NodeFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeFile {
    pub name: String,
    pub states: usize,
    #[serde(default)]
    pub parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpt: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submodels: Option<Vec<SubmodelFile>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmodelFile {
    pub parents: Vec<String>,
    pub weight: f64,
    pub cpt: Vec<Vec<f64>>,
}

fn rows<T: Scalar>(flat: &[T], q: usize) -> Vec<Vec<f64>> {
    flat.chunks(q)
        .map(|r| r.iter().map(|v| v.as_f64()).collect())
        .collect()
}

fn flatten<T: Scalar>(rows: &[Vec<f64>]) -> Vec<T> {
    rows.iter().flatten().map(|&v| T::of(v)).collect()
}

fn names_of(structure: &Structure, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&p| structure.node(p).name.clone()).collect()
}

fn resolve(structure_names: &[&str], parents: &[String], child: &str) -> Result<Vec<usize>> {
    parents
        .iter()
        .map(|p| {
            structure_names.iter().position(|n| n == p).ok_or_else(|| {
                Error::Format(format!("node `{child}` has unknown or later parent `{p}`"))
            })
        })
        .collect()
}

impl NetworkFile {
    pub fn structure(&self) -> Result<Structure> {
        let names: Vec<&str> = self.nodes.iter().map(|n| n.name.as_str()).collect();
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let parents = resolve(&names[..i], &n.parents, &n.name)?;
                Ok(NodeSpec::new(n.name.clone(), n.states, parents))
            })
            .collect::<Result<Vec<_>>>()?;
        Structure::new(nodes)
    }

    pub fn network<T: Scalar>(&self) -> Result<DiscreteNetwork<T>> {
        let structure = self.structure()?;
        let cpts = self
            .nodes
            .iter()
            .map(|n| {
                n.cpt
                    .as_deref()
                    .map(flatten)
                    .ok_or_else(|| Error::Format(format!("node `{}` has no cpt", n.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteNetwork::new(structure, cpts)
    }

    pub fn mixture<T: Scalar>(&self) -> Result<MixtureNetwork<T>> {
        let structure = self.structure()?;
        let names: Vec<&str> = self.nodes.iter().map(|n| n.name.as_str()).collect();
        let specs = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let subs = n
                    .submodels
                    .as_ref()
                    .ok_or_else(|| Error::Format(format!("node `{}` has no submodels", n.name)))?;
                subs.iter()
                    .map(|s| {
                        Ok(SubmodelSpec {
                            parents: resolve(&names[..i], &s.parents, &n.name)?,
                            cpt: flatten(&s.cpt),
                            weight: T::of(s.weight),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MixtureNetwork::new(structure, specs)
    }

    pub fn from_structure(structure: &Structure) -> Self {
        NetworkFile {
            nodes: structure
                .nodes()
                .iter()
                .map(|n| NodeFile {
                    name: n.name.clone(),
                    states: n.cardinality,
                    parents: names_of(structure, &n.parents),
                    cpt: None,
                    submodels: None,
                })
                .collect(),
        }
    }

    pub fn from_network<T: Scalar>(net: &DiscreteNetwork<T>) -> Self {
        let mut file = Self::from_structure(net.structure());
        for (i, node) in file.nodes.iter_mut().enumerate() {
            node.cpt = Some(rows(net.cpt(i), node.states));
        }
        file
    }

    pub fn from_mixture<T: Scalar>(mix: &MixtureNetwork<T>) -> Self {
        let mut file = Self::from_network(&mix.collapse());
        let s = mix.structure();
        for (i, node) in file.nodes.iter_mut().enumerate() {
            node.submodels = Some(
                mix.submodels(i)
                    .iter()
                    .map(|sub| SubmodelFile {
                        parents: names_of(s, sub.parents()),
                        weight: sub.weight().as_f64(),
                        cpt: rows(sub.cpt(), node.states),
                    })
                    .collect(),
            );
        }
        file
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_network<T: Scalar>(path: impl AsRef<Path>) -> Result<DiscreteNetwork<T>> {
    NetworkFile::load(path)?.network()
}

pub fn save_network<T: Scalar>(path: impl AsRef<Path>, net: &DiscreteNetwork<T>) -> Result<()> {
    NetworkFile::from_network(net).save(path)
}

pub fn load_mixture<T: Scalar>(path: impl AsRef<Path>) -> Result<MixtureNetwork<T>> {
    NetworkFile::load(path)?.mixture()
}

pub fn save_mixture<T: Scalar>(path: impl AsRef<Path>, mix: &MixtureNetwork<T>) -> Result<()> {
    NetworkFile::from_mixture(mix).save(path)
}

/// Serialized [`FitReport`]. Non-finite scores serialize as `null`.
#[derive(Clone, Debug, Serialize)]
pub struct ReportFile {
    pub converged: bool,
    pub steps: usize,
    pub iterations: Vec<IterationFile>,
    pub top_submodels: Vec<TopSubmodels>,
    pub warnings: Vec<String>,
    pub mixture: NetworkFile,
    pub collapsed: NetworkFile,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationFile {
    pub iteration: usize,
    pub score: f64,
    pub objective: f64,
    pub weight_entropy: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TopSubmodels {
    pub node: String,
    pub submodels: Vec<WeightedSubset>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightedSubset {
    pub parents: Vec<String>,
    pub weight: f64,
}

/// How many submodels per node the report lists, heaviest first.
pub const TOP_SUBMODELS: usize = 3;

impl ReportFile {
    pub fn from_report<T: Scalar>(report: &FitReport<T>) -> Self {
        let s = report.mixture.structure();
        ReportFile {
            converged: report.converged,
            steps: report.steps(),
            iterations: report
                .iterations
                .iter()
                .map(|r| IterationFile {
                    iteration: r.iteration,
                    score: r.score.as_f64(),
                    objective: r.objective.as_f64(),
                    weight_entropy: r.weight_entropy.iter().map(|v| v.as_f64()).collect(),
                })
                .collect(),
            top_submodels: (0..s.len())
                .map(|i| TopSubmodels {
                    node: s.node(i).name.clone(),
                    submodels: report
                        .ranked_submodels(i)
                        .into_iter()
                        .take(TOP_SUBMODELS)
                        .map(|(parents, w)| WeightedSubset {
                            parents: names_of(s, &parents),
                            weight: w.as_f64(),
                        })
                        .collect(),
                })
                .collect(),
            warnings: report.warnings.clone(),
            mixture: NetworkFile::from_mixture(&report.mixture),
            collapsed: NetworkFile::from_network(&report.collapsed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = r#"{"nodes":[
        {"name":"A","states":2,"parents":[],"cpt":[[0.6,0.4]]},
        {"name":"B","states":3,"parents":["A"],"cpt":[[0.2,0.3,0.5],[0.1,0.1,0.8]]}]}"#;

    #[test]
    fn parses_network() {
        let file: NetworkFile = serde_json::from_str(CHAIN).unwrap();
        let net: DiscreteNetwork<f64> = file.network().unwrap();
        assert_eq!(net.prob(1, 2, 1), 0.8);
        assert_eq!(NetworkFile::from_network(&net), file);
    }

    #[test]
    fn structure_only_file() {
        let file: NetworkFile = serde_json::from_str(
            r#"{"nodes":[{"name":"A","states":2},{"name":"B","states":2,"parents":["A"]}]}"#,
        )
        .unwrap();
        assert_eq!(file.structure().unwrap().parents(1), &[0]);
        assert!(file.network::<f64>().is_err());
    }

    #[test]
    fn rejects_later_parent() {
        let file: NetworkFile = serde_json::from_str(
            r#"{"nodes":[{"name":"A","states":2,"parents":["B"]},{"name":"B","states":2}]}"#,
        )
        .unwrap();
        assert!(matches!(file.structure(), Err(Error::Format(_))));
    }

    #[test]
    fn mixture_round_trip() {
        let s = Structure::full(&["A", "B", "C"], &[2, 3, 2]).unwrap();
        let mix = MixtureNetwork::<f64>::random_capped(s, &[0, 1, 2], 5).unwrap();
        let file = NetworkFile::from_mixture(&mix);
        let text = serde_json::to_string(&file).unwrap();
        let back: MixtureNetwork<f64> = serde_json::from_str::<NetworkFile>(&text)
            .unwrap()
            .mixture()
            .unwrap();
        assert_eq!(back, mix);
        // the collapsed cpt makes a mixture file readable as a network file
        let net: DiscreteNetwork<f64> = file.network().unwrap();
        assert_eq!(net, mix.collapse());
    }
}
