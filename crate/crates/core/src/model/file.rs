use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClassDistribution, ClassSystem, ConnectionMatrix};
use crate::{Error, Result};

/// On-disk model description: `{"m": 2, "eps": [...], "p": [[...]], "phat": [[...]]}`.
///
/// `phat` is optional and defaults to `p` (perfect estimates).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub m: usize,
    pub eps: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phat: Option<Vec<Vec<f64>>>,
}

/// A validated [`ModelFile`].
#[derive(Clone, Debug)]
pub struct Model {
    pub classes: ClassSystem,
    pub dist: ClassDistribution,
    pub p: ConnectionMatrix,
    pub phat: ConnectionMatrix,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<Model> {
        let classes = ClassSystem::build(self.m)?;
        let dist = ClassDistribution::new(self.eps.clone())?;
        if dist.len() != classes.len() {
            return Err(Error::invalid(
                "eps",
                format!("{} entries, expected m! = {}", dist.len(), classes.len()),
            ));
        }
        let p = ConnectionMatrix::named("p", self.p.clone())?;
        p.check_size("p", classes.len())?;
        let phat = match &self.phat {
            Some(rows) => {
                let phat = ConnectionMatrix::named("phat", rows.clone())?;
                phat.check_size("phat", classes.len())?;
                phat
            }
            None => p.clone(),
        };
        Ok(Model {
            classes,
            dist,
            p,
            phat,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_valid_file() {
        let f =
            ModelFile::from_json(r#"{"m":2,"eps":[0.6,0.4],"p":[[0.4,0.2],[0.2,0.4]]}"#).unwrap();
        let model = f.validate().unwrap();
        assert_eq!(model.phat, model.p);
        assert_eq!(model.classes.len(), 2);
    }

    #[test]
    fn errors_name_the_entry() {
        let f =
            ModelFile::from_json(r#"{"m":2,"eps":[0.6,0.3],"p":[[0.4,0.2],[0.2,0.4]]}"#).unwrap();
        assert!(f.validate().unwrap_err().to_string().contains("eps"));
        let f = ModelFile::from_json(
            r#"{"m":2,"eps":[0.6,0.4],"p":[[0.4,0.2],[0.2,0.4]],"phat":[[0.4,1.5],[1.5,0.4]]}"#,
        )
        .unwrap();
        assert!(f.validate().unwrap_err().to_string().contains("phat[0][1]"));
        let f =
            ModelFile::from_json(r#"{"m":3,"eps":[0.6,0.4],"p":[[0.4,0.2],[0.2,0.4]]}"#).unwrap();
        assert!(f.validate().unwrap_err().to_string().contains("m! = 6"));
        assert!(ModelFile::from_json(r#"{"m":2,"eps":[1,0],"p":[[1,1],[1,1]],"q":1}"#).is_err());
    }
}
