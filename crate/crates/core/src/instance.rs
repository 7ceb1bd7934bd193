//! Self-contained problem instances: a presentation plus the two words to
//! separate, in the JSON shape read by the command-line tool.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::groups::{FiniteGroup, GroupIso, GroupSpec};
use crate::words::{FpcPresentation, FpcWord, HnnPresentation, HnnWord, WordError};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("invalid instance: {0}")]
    Invariant(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PresentationSpec {
    /// `phi` lists the pairs `(a, phi(a))`; A and B are read off from it.
    Hnn { base: GroupSpec, phi: Vec<(usize, usize)> },
    Fpc { a: GroupSpec, b: GroupSpec, m: Vec<usize>, n: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordSpec {
    Hnn(HnnWord),
    Fpc(FpcWord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub presentation: PresentationSpec,
    pub u: WordSpec,
    pub v: WordSpec,
}

#[derive(Debug, Clone)]
pub enum Instance {
    Hnn { p: HnnPresentation, u: HnnWord, v: HnnWord },
    Fpc { p: FpcPresentation, u: FpcWord, v: FpcWord },
}

#[derive(Debug, Clone)]
pub enum Presentation {
    Hnn(HnnPresentation),
    Fpc(FpcPresentation),
}

impl PresentationSpec {
    pub fn build(&self) -> Result<Presentation, InstanceError> {
        match self {
            PresentationSpec::Hnn { base, phi } => {
                let g = FiniteGroup::from_spec(base).map_err(WordError::from)?;
                for &(a, b) in phi {
                    g.check_element(a).map_err(WordError::from)?;
                    g.check_element(b).map_err(WordError::from)?;
                }
                let a: Vec<usize> = phi.iter().map(|&(a, _)| a).collect();
                let b: Vec<usize> = phi.iter().map(|&(_, b)| b).collect();
                let a_sub = g.subgroup(&a).map_err(WordError::from)?;
                let b_sub = g.subgroup(&b).map_err(WordError::from)?;
                let iso = GroupIso::from_pairs(a_sub, b_sub, phi).map_err(WordError::from)?;
                Ok(Presentation::Hnn(HnnPresentation::new(g, iso)?))
            }
            PresentationSpec::Fpc { a, b, m, n } => {
                let ga = FiniteGroup::from_spec(a).map_err(WordError::from)?;
                let gb = FiniteGroup::from_spec(b).map_err(WordError::from)?;
                let ms = ga.subgroup(m).map_err(WordError::from)?;
                let ns = gb.subgroup(n).map_err(WordError::from)?;
                Ok(Presentation::Fpc(FpcPresentation::new(ga, gb, ms, ns)?))
            }
        }
    }

    pub fn from_hnn(p: &HnnPresentation) -> Self {
        PresentationSpec::Hnn { base: p.base().to_spec(), phi: p.phi().pairs() }
    }

    pub fn from_fpc(p: &FpcPresentation) -> Self {
        PresentationSpec::Fpc {
            a: p.a_grp().to_spec(),
            b: p.b_grp().to_spec(),
            m: p.m_sub().elements().to_vec(),
            n: p.n_sub().elements().to_vec(),
        }
    }
}

impl InstanceSpec {
    pub fn parse(json: &str) -> Result<Self, InstanceError> {
        serde_json::from_str(json).map_err(|e| InstanceError::Schema(e.to_string()))
    }

    pub fn build(&self) -> Result<Instance, InstanceError> {
        match (self.presentation.build()?, &self.u, &self.v) {
            (Presentation::Hnn(p), WordSpec::Hnn(u), WordSpec::Hnn(v)) => {
                p.validate_word(u)?;
                p.validate_word(v)?;
                Ok(Instance::Hnn { p, u: u.clone(), v: v.clone() })
            }
            (Presentation::Fpc(p), WordSpec::Fpc(u), WordSpec::Fpc(v)) => {
                p.validate_word(u)?;
                p.validate_word(v)?;
                Ok(Instance::Fpc { p, u: u.clone(), v: v.clone() })
            }
            _ => Err(InstanceError::Schema("word shape does not match the presentation type".into())),
        }
    }

    /// SHA-256 of the compact JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("instance serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Instance {
    pub fn to_spec(&self) -> InstanceSpec {
        match self {
            Instance::Hnn { p, u, v } => InstanceSpec {
                presentation: PresentationSpec::from_hnn(p),
                u: WordSpec::Hnn(u.clone()),
                v: WordSpec::Hnn(v.clone()),
            },
            Instance::Fpc { p, u, v } => InstanceSpec {
                presentation: PresentationSpec::from_fpc(p),
                u: WordSpec::Fpc(u.clone()),
                v: WordSpec::Fpc(v.clone()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z4_HNN: &str = r#"{
        "presentation": {"type": "hnn",
            "base": {"order": 4, "mul": [[0,1,2,3],[1,2,3,0],[2,3,0,1],[3,0,1,2]], "name": "Z/4"},
            "phi": [[0,0],[2,2]]},
        "u": {"g0": 1, "tail": [{"e": 1, "g": 0}]},
        "v": {"g0": 1, "tail": [{"e": 1, "g": 1}, {"e": 1, "g": 0}]}
    }"#;

    #[test]
    fn parses_hnn_instance() {
        let spec = InstanceSpec::parse(Z4_HNN).unwrap();
        let inst = spec.build().unwrap();
        match &inst {
            Instance::Hnn { p, u, v } => {
                assert_eq!(p.a_sub().elements(), &[0, 2]);
                assert_eq!(u.tail_len(), 1);
                assert_eq!(v.tail_len(), 2);
            }
            _ => panic!("expected an HNN instance"),
        }
        assert_eq!(inst.to_spec().hash(), spec.hash());
    }

    #[test]
    fn rejects_bad_phi_and_shapes() {
        let bad = Z4_HNN.replace("[[0,0],[2,2]]", "[[0,0],[1,1]]");
        assert!(matches!(InstanceSpec::parse(&bad).unwrap().build(), Err(InstanceError::Invariant(_))));
        assert!(matches!(InstanceSpec::parse("{\"u\": 1}"), Err(InstanceError::Schema(_))));
        let fpc_words = Z4_HNN.replace(r#"{"g0": 1, "tail": [{"e": 1, "g": 0}]}"#, r#"{"letters": []}"#);
        assert!(matches!(InstanceSpec::parse(&fpc_words).unwrap().build(), Err(InstanceError::Schema(_))));
    }
}
