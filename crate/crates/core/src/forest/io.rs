//! Versioned JSON model files.
//!
//! ```json
//! {"version": 1, "params": {...}, "feature_names": [...],
//!  "trees": [[{"kind": "internal", "feature": 0, "threshold": 0.5,
//!              "left": 1, "right": 2, "value": 2.5, "cover": 4}, ...], ...]}
//! ```
//! Leaf records carry `null` for `feature`, `threshold`, `left` and `right`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Forest, ForestParams, NodeKind, RegressionTree, TreeNode};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const SUPPORTED_VERSIONS: &[u32] = &[MODEL_FORMAT_VERSION];

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    params: ForestParams,
    feature_names: Vec<String>,
    trees: Vec<Vec<NodeRecord>>,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Internal,
    Leaf,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    kind: Kind,
    feature: Option<usize>,
    threshold: Option<f64>,
    left: Option<usize>,
    right: Option<usize>,
    value: f64,
    cover: u64,
}

impl From<&TreeNode> for NodeRecord {
    fn from(node: &TreeNode) -> Self {
        match node.kind {
            NodeKind::Internal {
                feature,
                threshold,
                left,
                right,
            } => NodeRecord {
                kind: Kind::Internal,
                feature: Some(feature),
                threshold: Some(threshold),
                left: Some(left),
                right: Some(right),
                value: node.value,
                cover: node.cover,
            },
            NodeKind::Leaf => NodeRecord {
                kind: Kind::Leaf,
                feature: None,
                threshold: None,
                left: None,
                right: None,
                value: node.value,
                cover: node.cover,
            },
        }
    }
}

impl NodeRecord {
    fn into_node(self, id: usize) -> Result<TreeNode> {
        let kind = match self.kind {
            Kind::Leaf => NodeKind::Leaf,
            Kind::Internal => match (self.feature, self.threshold, self.left, self.right) {
                (Some(feature), Some(threshold), Some(left), Some(right)) => NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                },
                _ => return Err(Error::Format(format!("internal node {id} is missing split fields"))),
            },
        };
        Ok(TreeNode {
            kind,
            value: self.value,
            cover: self.cover,
        })
    }
}

pub fn model_to_json(model: &Forest) -> Result<String> {
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        params: model.params().clone(),
        feature_names: model.feature_names().to_vec(),
        trees: model
            .trees()
            .iter()
            .map(|t| t.nodes().iter().map(NodeRecord::from).collect())
            .collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn model_from_json(text: &str) -> Result<Forest> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let version = raw
        .get("version")
        .ok_or_else(|| Error::Format("missing `version`".into()))?;
    let version = version
        .as_i64()
        .ok_or_else(|| Error::Format(format!("`version` must be an integer, got {version}")))?;
    if !SUPPORTED_VERSIONS.iter().any(|&v| i64::from(v) == version) {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: SUPPORTED_VERSIONS,
        });
    }
    let file: ModelFile = serde_json::from_value(raw).map_err(|e| Error::Format(e.to_string()))?;
    let n_features = file.feature_names.len();
    let trees = file
        .trees
        .into_iter()
        .enumerate()
        .map(|(t, records)| {
            let nodes = records
                .into_iter()
                .enumerate()
                .map(|(id, r)| r.into_node(id))
                .collect::<Result<Vec<_>>>()?;
            RegressionTree::new(nodes, n_features).map_err(|e| Error::Format(format!("tree {t}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Forest::new(trees, file.params, file.feature_names).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_model(model: &Forest, path: impl AsRef<Path>) -> Result<()> {
    let mut text = model_to_json(model)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Forest> {
    model_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::small_tree;

    fn t1_forest() -> Forest {
        Forest::from_trees(vec![small_tree()], vec!["f0".into(), "f1".into()]).unwrap()
    }

    #[test]
    fn round_trip_preserves_nodes() {
        let forest = t1_forest();
        let text = model_to_json(&forest).unwrap();
        assert!(text.contains(r#""kind":"internal""#));
        assert_eq!(model_from_json(&text).unwrap(), forest);
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let text = model_to_json(&t1_forest()).unwrap();
        let err = model_from_json(&text[..text.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn unknown_version_names_supported_ones() {
        let text = model_to_json(&t1_forest())
            .unwrap()
            .replacen(r#""version":1"#, r#""version":999"#, 1);
        let err = model_from_json(&text).unwrap_err();
        assert!(matches!(err, Error::UnsupportedVersion { found: 999, .. }));
        assert!(err.to_string().contains("[1]"), "{err}");
    }

    #[test]
    fn structural_damage_is_a_format_error() {
        let text = model_to_json(&t1_forest())
            .unwrap()
            .replacen(r#""left":1"#, r#""left":7"#, 1);
        assert!(matches!(model_from_json(&text), Err(Error::Format(_))));
        let text = model_to_json(&t1_forest())
            .unwrap()
            .replacen(r#""feature":0"#, r#""feature":null"#, 1);
        assert!(matches!(model_from_json(&text), Err(Error::Format(_))));
    }
}
