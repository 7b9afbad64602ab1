use serde::{Deserialize, Serialize};

use crate::error::{PareError, Result};

/// Dense row-major tensor of 64-bit floats.
///
/// Vectors have shape `[n]`, matrices `[rows, cols]`, scalars `[1]`.
/// All model math in this crate runs on f64; the finite-difference
/// gradient checks depend on that precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn scalar(value: f64) -> Tensor {
        Tensor {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn vector(data: Vec<f64>) -> Tensor {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(PareError::numeric(format!(
                "tensor data length {} does not match shape {} ({} values)",
                data.len(),
                shape_string(shape),
                expected
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Interpret as a matrix, returning (rows, cols).
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            [r, c] => Ok((*r, *c)),
            _ => Err(PareError::numeric(format!(
                "expected a matrix, found shape {}",
                self.shape_string()
            ))),
        }
    }

    /// Value of a length-1 tensor.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() == 1 {
            Ok(self.data[0])
        } else {
            Err(PareError::numeric(format!(
                "expected a scalar, found shape {}",
                self.shape_string()
            )))
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn shape_string(&self) -> String {
        shape_string(&self.shape)
    }

    /// Elementwise in-place add; shapes must match.
    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(PareError::numeric(format!(
                "cannot add tensor of shape {} into shape {}",
                other.shape_string(),
                self.shape_string()
            )));
        }
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        Ok(())
    }

    pub fn fill(&mut self, value: f64) {
        for v in self.data.iter_mut() {
            *v = value;
        }
    }
}

pub(crate) fn shape_string(shape: &[usize]) -> String {
    let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    format!("[{}]", dims.join("x"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Tensor::from_vec(&[2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::from_vec(&[2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn add_assign_checks_shape() {
        let mut a = Tensor::zeros(&[2]);
        let b = Tensor::vector(vec![1.0, 2.0]);
        a.add_assign(&b).unwrap();
        assert_eq!(a.data(), &[1.0, 2.0]);
        let c = Tensor::zeros(&[3]);
        assert!(a.add_assign(&c).is_err());
    }

    #[test]
    fn finite_detection() {
        let mut t = Tensor::vector(vec![1.0, 2.0]);
        assert!(t.all_finite());
        t.data_mut()[1] = f64::NAN;
        assert!(!t.all_finite());
    }
}
