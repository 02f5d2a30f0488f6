//! JSON kernel specifications.
//!
//! ```json
//! {"kernel": "min", "points": [1, 2, 3], "ordered": true}
//! {"kernel": "matrix", "matrix": [[2, 1], [1, 2]]}
//! ```
//!
//! Matrix kernels live on labels; `points` then lists labels and defaults
//! to every row of the matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{make_kernel, BuiltinKernelId, MatrixKernel};
use crate::point_config::{Kernel, Point, PointConfiguration};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kernel: BuiltinKernelId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default)]
    pub ordered: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl KernelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::KernelSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// The kernel alone.
    pub fn kernel(&self) -> Result<Box<dyn Kernel>> {
        match (self.kernel, &self.matrix) {
            (BuiltinKernelId::MatrixBacked, Some(m)) => Ok(Box::new(MatrixKernel::new(m.clone())?)),
            (BuiltinKernelId::MatrixBacked, None) => {
                Err(Error::KernelSpec("kernel \"matrix\" needs a \"matrix\" field".into()))
            }
            (_, Some(_)) => Err(Error::KernelSpec(format!(
                "\"matrix\" given for builtin kernel {}",
                self.kernel.as_str()
            ))),
            (id, None) => make_kernel(id),
        }
    }

    /// The point configuration, if one is given.
    pub fn config(&self) -> Result<Option<PointConfiguration>> {
        if self.kernel != BuiltinKernelId::MatrixBacked {
            return self
                .points
                .as_ref()
                .map(|p| PointConfiguration::from_reals(p, self.ordered))
                .transpose();
        }
        let dim = self.matrix.as_ref().map_or(0, Vec::len);
        let labels: Vec<usize> = match &self.points {
            None => (0..dim).collect(),
            Some(p) => p
                .iter()
                .map(|&v| {
                    if v >= 0.0 && v.fract() == 0.0 && (v as usize) < dim {
                        Ok(v as usize)
                    } else {
                        Err(Error::KernelSpec(format!("{v} is not a label of a {dim}x{dim} matrix")))
                    }
                })
                .collect::<Result<_>>()?,
        };
        let points = labels.into_iter().map(Point::Label).collect();
        PointConfiguration::new(points, self.ordered).map(Some)
    }

    pub fn load(&self) -> Result<(Box<dyn Kernel>, Option<PointConfiguration>)> {
        Ok((self.kernel()?, self.config()?))
    }
}
